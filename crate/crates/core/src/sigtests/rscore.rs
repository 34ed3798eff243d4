//! R-score over a grid of space-time cells, and the randomized-prediction
//! baselines it is usually compared against.

use num_rational::Ratio;
use rand::seq::index::sample_weighted;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::replicate_rng;

/// Per-cell prediction and occurrence flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridOutcome {
    predicted: Vec<bool>,
    occurred: Vec<bool>,
}

impl GridOutcome {
    pub fn new(predicted: Vec<bool>, occurred: Vec<bool>) -> Result<Self> {
        if predicted.len() != occurred.len() {
            return Err(Error::arg(
                "predicted and occurred must have one entry per cell",
            ));
        }
        if predicted.is_empty() {
            return Err(Error::arg("grid has no cells"));
        }
        Ok(GridOutcome {
            predicted,
            occurred,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.predicted.len()
    }

    pub fn predicted(&self) -> &[bool] {
        &self.predicted
    }

    pub fn occurred(&self) -> &[bool] {
        &self.occurred
    }
}

/// Hit fraction over seismic cells minus false-alarm fraction over aseismic cells, exactly.
pub fn r_score_ratio(g: &GridOutcome) -> Result<Ratio<i64>> {
    r_score_counts(&g.predicted, &g.occurred)
}

fn r_score_counts(predicted: &[bool], occurred: &[bool]) -> Result<Ratio<i64>> {
    let (mut hits, mut seismic, mut false_alarms, mut aseismic) = (0i64, 0i64, 0i64, 0i64);
    for (&p, &o) in predicted.iter().zip(occurred) {
        match (p, o) {
            (true, true) => hits += 1,
            (true, false) => false_alarms += 1,
            _ => {}
        }
        if o {
            seismic += 1;
        } else {
            aseismic += 1;
        }
    }
    if seismic == 0 {
        return Err(Error::ZeroDenominator("no cell with an earthquake"));
    }
    if aseismic == 0 {
        return Err(Error::ZeroDenominator("no aseismic cell"));
    }
    Ok(Ratio::new(hits, seismic) - Ratio::new(false_alarms, aseismic))
}

pub fn r_score(g: &GridOutcome) -> Result<f64> {
    let r = r_score_ratio(g)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScheme {
    /// Fixed number of cells, chosen uniformly without replacement.
    Uniform,
    /// Independent coin per cell with probability proportional to its historical rate.
    RateCoins,
    /// Fixed number of cells, chosen without replacement with rate-proportional weights.
    RateWeighted,
}

/// Inputs for [`r_score_baseline`].
#[derive(Clone, Debug)]
pub struct BaselineInputs<'a> {
    /// Historical annual rate per cell (events per year).
    pub rates: &'a [f64],
    /// Number of cells the actual predictions flagged.
    pub n_predicted: usize,
    /// Fixed per-cell outcomes.
    pub occurred: &'a [bool],
    /// Historical annual average number of cells with events. When absent the
    /// Poisson expectation `sum(1 - exp(-rate))` is used.
    pub avg_active_cells: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineReport {
    pub scheme: BaselineScheme,
    pub sampling: &'static str,
    pub n_reps: usize,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub observed: Option<f64>,
    /// Fraction of replicates with R `>=` the observed score.
    pub p_estimate: Option<f64>,
    /// Mean number of cells predicted per replicate.
    pub mean_predicted: f64,
    /// Cells whose scheme-2 probability exceeded 1 and was clipped.
    pub clipped_cells: usize,
    pub seed: u64,
}

/// Empirical distribution of R under randomized predictions.
pub fn r_score_baseline(
    scheme: BaselineScheme,
    inputs: &BaselineInputs<'_>,
    observed: Option<f64>,
    n_reps: usize,
    seed: u64,
) -> Result<BaselineReport> {
    let n = inputs.occurred.len();
    if n == 0 {
        return Err(Error::arg("grid has no cells"));
    }
    if n_reps == 0 {
        return Err(Error::arg("n_reps must be >= 1"));
    }
    if inputs.n_predicted > n {
        return Err(Error::arg(format!(
            "n_predicted = {} exceeds {n} cells",
            inputs.n_predicted
        )));
    }
    if scheme != BaselineScheme::Uniform {
        if inputs.rates.len() != n {
            return Err(Error::arg("one historical rate per cell is required"));
        }
        if let Some(r) = inputs.rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::arg(format!("rates must be >= 0, got {r}")));
        }
    }
    // Validate denominators once; every replicate shares them.
    r_score_counts(&vec![false; n], inputs.occurred)?;

    let mut clipped_cells = 0;
    let coin_probs: Vec<f64> = if scheme == BaselineScheme::RateCoins {
        let avg = inputs
            .avg_active_cells
            .unwrap_or_else(|| inputs.rates.iter().map(|r| 1.0 - (-r).exp()).sum());
        if !(avg > 0.0) {
            return Err(Error::arg("average number of active cells must be > 0"));
        }
        let k = inputs.n_predicted as f64 / avg;
        inputs
            .rates
            .iter()
            .map(|r| {
                let p = k * r;
                if p > 1.0 {
                    clipped_cells += 1;
                }
                p.min(1.0)
            })
            .collect()
    } else {
        Vec::new()
    };
    if scheme == BaselineScheme::RateWeighted {
        let positive = inputs.rates.iter().filter(|r| **r > 0.0).count();
        if positive < inputs.n_predicted {
            return Err(Error::arg(format!(
                "only {positive} cells have positive weight, cannot pick {}",
                inputs.n_predicted
            )));
        }
    }

    let draws: Vec<(f64, usize)> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let mut predicted = vec![false; n];
            match scheme {
                BaselineScheme::Uniform => {
                    for i in rand::seq::index::sample(&mut rng, n, inputs.n_predicted) {
                        predicted[i] = true;
                    }
                }
                BaselineScheme::RateCoins => {
                    for (flag, p) in predicted.iter_mut().zip(&coin_probs) {
                        *flag = rng.random::<f64>() < *p;
                    }
                }
                BaselineScheme::RateWeighted => {
                    let picked =
                        sample_weighted(&mut rng, n, |i| inputs.rates[i], inputs.n_predicted)
                            .expect("weights validated");
                    for i in picked {
                        predicted[i] = true;
                    }
                }
            }
            let count = predicted.iter().filter(|p| **p).count();
            let r = r_score_counts(&predicted, inputs.occurred).expect("denominators validated");
            (*r.numer() as f64 / *r.denom() as f64, count)
        })
        .collect();

    let mut scores: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let mean = scores.iter().sum::<f64>() / n_reps as f64;
    let sd = if n_reps > 1 {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n_reps - 1) as f64).sqrt()
    } else {
        0.0
    };
    let p_estimate =
        observed.map(|o| scores.iter().filter(|&&s| s >= o).count() as f64 / n_reps as f64);
    scores.sort_by(f64::total_cmp);
    let quantile = |q: f64| scores[((q * (n_reps - 1) as f64).round() as usize).min(n_reps - 1)];
    Ok(BaselineReport {
        scheme,
        sampling: match scheme {
            BaselineScheme::Uniform => "uniform without replacement",
            BaselineScheme::RateCoins => "independent Bernoulli per cell, p clipped to [0, 1]",
            BaselineScheme::RateWeighted => "successive weighted draws without replacement",
        },
        n_reps,
        mean,
        sd,
        q05: quantile(0.05),
        q50: quantile(0.5),
        q95: quantile(0.95),
        observed,
        p_estimate,
        mean_predicted: draws.iter().map(|d| d.1 as f64).sum::<f64>() / n_reps as f64,
        clipped_cells,
        seed,
    })
}
