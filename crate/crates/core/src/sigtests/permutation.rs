//! Permutation test of a fixed alarm set against time-shuffled seismicity.
//!
//! By default alarms are generated once from the observed catalog and held
//! fixed. Each replicate permutes the event times relative to the (location,
//! magnitude) marks and recounts predicted events. An event never counts as
//! predicted by the alarm it triggered, wherever its permuted time lands.
//! [`AlarmHandling::Regenerate`] instead rebuilds the alarms from every
//! permuted catalog.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::alarm::{
    count_predicted, generate_alarms, unit_vectors, AlarmConfig, AlarmSet, PredictorMode,
};
use crate::catalog::{Catalog, Event};
use crate::error::{Error, Result};
use crate::nullmodels::shuffle;
use crate::rng::replicate_rng;
use crate::time::Instant;

/// Largest catalog [`exact_permutation_pvalue`] will enumerate (8! = 40320 orderings).
pub const EXACT_ENUMERATION_LIMIT: usize = 8;

/// What happens to the alarms when event times are permuted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmHandling {
    /// Alarms stay where the observed catalog put them.
    #[default]
    Fixed,
    /// Alarms are regenerated from each permuted catalog.
    Regenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictionParams {
    pub mag_threshold: f64,
    pub window_days: f64,
    pub radius_km: f64,
    pub mode: PredictorMode,
    pub alarms: AlarmHandling,
}

impl PredictionParams {
    pub fn new(mag_threshold: f64, window_days: f64, radius_km: f64, mode: PredictorMode) -> Self {
        PredictionParams {
            mag_threshold,
            window_days,
            radius_km,
            mode,
            alarms: AlarmHandling::Fixed,
        }
    }

    pub fn with_alarms(self, alarms: AlarmHandling) -> Self {
        PredictionParams { alarms, ..self }
    }

    pub fn alarm_config(&self) -> AlarmConfig {
        AlarmConfig {
            mag_threshold: self.mag_threshold,
            window_days: self.window_days,
            radius_km: self.radius_km,
        }
    }
}

/// Monte-Carlo significance report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport<C: Serialize = TestConfig> {
    pub observed: f64,
    pub n_reps: usize,
    /// Replicates whose statistic is `>=` the observed one.
    pub sims_geq: usize,
    /// `sims_geq / n_reps`; zero with `p_is_upper_bound` when no replicate reached the observed value.
    pub p_estimate: f64,
    /// When set, the p-value is reported as `< 1 / n_reps`.
    pub p_is_upper_bound: bool,
    pub max_sim: f64,
    pub sim_mean: f64,
    pub sim_sd: f64,
    pub seed: u64,
    pub config: C,
}

/// Configuration echo used by the built-in engines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestConfig {
    pub test: &'static str,
    pub statistic: &'static str,
    pub params: Option<PredictionParams>,
    pub n_targets: usize,
    pub n_alarms: usize,
}

impl<C: Serialize> TestReport<C> {
    pub fn from_counts(observed: f64, sims: &[f64], seed: u64, config: C) -> Result<Self> {
        if sims.is_empty() {
            return Err(Error::arg("at least one replicate is required"));
        }
        let n = sims.len();
        let sims_geq = sims.iter().filter(|&&s| s >= observed).count();
        let mean = sims.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Ok(TestReport {
            observed,
            n_reps: n,
            sims_geq,
            p_estimate: sims_geq as f64 / n as f64,
            p_is_upper_bound: sims_geq == 0,
            max_sim: sims.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sim_mean: mean,
            sim_sd: var.sqrt(),
            seed,
            config,
        })
    }

    /// Binomial standard error of the p-estimate.
    pub fn std_error(&self) -> f64 {
        let p = self.p_estimate;
        (p * (1.0 - p) / self.n_reps as f64).sqrt()
    }

    /// `"< 0.001"` style text when no replicate reached the observed value.
    pub fn p_display(&self) -> String {
        if self.p_is_upper_bound {
            format!("<{}", 1.0 / self.n_reps as f64)
        } else {
            format!("{}", self.p_estimate)
        }
    }
}

/// Targets with magnitude at or above the threshold, and the alarms they trigger.
pub fn prepare(catalog: &Catalog, params: &PredictionParams) -> Result<(Catalog, AlarmSet)> {
    let targets = catalog.above(params.mag_threshold)?;
    let alarms = generate_alarms(&targets, params.alarm_config(), params.mode)?;
    Ok((targets, alarms))
}

/// Predicted-event counts for `n_reps` time permutations of `targets` against fixed `alarms`.
/// Replicate `r` uses stream `r` of `seed`, so the output does not depend on scheduling.
pub fn permutation_counts(
    targets: &Catalog,
    alarms: &AlarmSet,
    n_reps: usize,
    seed: u64,
) -> Vec<usize> {
    let times: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    let units = unit_vectors(targets);
    let mags = targets.magnitudes();
    (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let mut t = times.clone();
            shuffle(&mut t, &mut rng);
            alarms.count_predicted_raw(&t, &units, &mags)
        })
        .collect()
}

/// Permutation test against a fixed alarm set. Alarms whose `trigger_index`
/// refers to a target keep excluding that target under every permutation.
pub fn permutation_test_fixed(
    targets: &Catalog,
    alarms: &AlarmSet,
    n_reps: usize,
    seed: u64,
    params: Option<PredictionParams>,
) -> Result<TestReport> {
    if n_reps == 0 {
        return Err(Error::arg("n_reps must be >= 1"));
    }
    let observed = count_predicted(targets, alarms) as f64;
    let sims: Vec<f64> = permutation_counts(targets, alarms, n_reps, seed)
        .into_iter()
        .map(|c| c as f64)
        .collect();
    TestReport::from_counts(
        observed,
        &sims,
        seed,
        TestConfig {
            test: "permutation",
            statistic: "predicted_events",
            params,
            n_targets: targets.len(),
            n_alarms: alarms.len(),
        },
    )
}

/// Generates alarms from `catalog` once, then tests the predicted-event count
/// against `n_reps` random permutations of the event times.
pub fn permutation_test(
    catalog: &Catalog,
    params: PredictionParams,
    n_reps: usize,
    seed: u64,
) -> Result<TestReport> {
    if n_reps == 0 {
        return Err(Error::arg("n_reps must be >= 1"));
    }
    let (targets, alarms) = prepare(catalog, &params)?;
    if params.alarms == AlarmHandling::Fixed {
        return permutation_test_fixed(&targets, &alarms, n_reps, seed, Some(params));
    }
    let times: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    let observed = count_predicted(&targets, &alarms) as f64;
    let sims: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let mut t = times.clone();
            shuffle(&mut t, &mut rng);
            regenerated_count(&targets, &t, &params).map(|c| c as f64)
        })
        .collect::<Result<_>>()?;
    TestReport::from_counts(
        observed,
        &sims,
        seed,
        TestConfig {
            test: "permutation",
            statistic: "predicted_events",
            params: Some(params),
            n_targets: targets.len(),
            n_alarms: alarms.len(),
        },
    )
}

/// Count after assigning `times[k]` to target `k` and regenerating the alarms.
fn regenerated_count(
    targets: &Catalog,
    times: &[Instant],
    params: &PredictionParams,
) -> Result<usize> {
    let events: Vec<Event> = targets
        .events()
        .iter()
        .zip(times)
        .map(|(e, &time)| Event { time, ..e.clone() })
        .collect();
    let permuted = Catalog::from_parts(events, targets);
    let alarms = generate_alarms(&permuted, params.alarm_config(), params.mode)?;
    Ok(count_predicted(&permuted, &alarms))
}

/// Exact permutation p-value by enumerating all `Q!` time assignments.
pub fn exact_permutation_pvalue(catalog: &Catalog, params: PredictionParams) -> Result<Ratio<u64>> {
    let (targets, alarms) = prepare(catalog, &params)?;
    if params.alarms == AlarmHandling::Fixed {
        return exact_pvalue_fixed(&targets, &alarms);
    }
    let n = targets.len();
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let times: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    let observed = count_predicted(&targets, &alarms);
    let (mut geq, mut total) = (0u64, 0u64);
    let mut failure = None;
    for_each_permutation(&times, |perm| {
        total += 1;
        match regenerated_count(&targets, perm, &params) {
            Ok(c) if c >= observed => geq += 1,
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(Ratio::new(geq, total)),
    }
}

pub fn exact_pvalue_fixed(targets: &Catalog, alarms: &AlarmSet) -> Result<Ratio<u64>> {
    let n = targets.len();
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let times: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    let units = unit_vectors(targets);
    let mags = targets.magnitudes();
    let observed = alarms.count_predicted_raw(&times, &units, &mags);

    let mut geq = 0u64;
    let mut total = 0u64;
    for_each_permutation(&times, |perm| {
        total += 1;
        if alarms.count_predicted_raw(perm, &units, &mags) >= observed {
            geq += 1;
        }
    });
    Ok(Ratio::new(geq, total))
}

/// Heap's algorithm; visits every ordering of `items` exactly once.
fn for_each_permutation<T: Clone>(items: &[T], mut visit: impl FnMut(&[T])) {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Draws one permutation-null replicate count; exposed for custom drivers.
pub fn one_permutation_count<R: Rng>(targets: &Catalog, alarms: &AlarmSet, rng: &mut R) -> usize {
    let mut t: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    shuffle(&mut t, rng);
    alarms.count_predicted_raw(&t, &unit_vectors(targets), &targets.magnitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Event, MagnitudeSelector, StudyVolume};
    use crate::geo::{Point, EARTH_RADIUS_KM};
    use crate::time::{TimeWindow, MS_PER_DAY};

    fn window() -> TimeWindow {
        let s = Instant::from_ymd(2004, 1, 1).unwrap();
        TimeWindow::new(s, s.plus_millis(100 * MS_PER_DAY)).unwrap()
    }

    fn ev(d: f64, km: f64, mb: f64) -> Event {
        let t = window().start.plus_millis((d * MS_PER_DAY as f64) as i64);
        let p = Point::new(0.0, (km / EARTH_RADIUS_KM).to_degrees()).unwrap();
        Event::new(t, p, 10.0, Some(mb), None, format!("{d}-{km}")).unwrap()
    }

    fn cat(events: Vec<Event>) -> Catalog {
        Catalog::new(events, StudyVolume::global(window()), MagnitudeSelector::Mb).unwrap()
    }

    fn params(mode: PredictorMode) -> PredictionParams {
        PredictionParams::new(5.0, 21.0, 50.0, mode)
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(&[1, 2, 3, 4], |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 24);
        let mut count = 0;
        for_each_permutation::<u8>(&[], |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn single_event_exact_p_is_one() {
        let c = cat(vec![ev(10.0, 0.0, 6.0)]);
        assert_eq!(
            exact_permutation_pvalue(&c, params(PredictorMode::PredictorI)).unwrap(),
            Ratio::from_integer(1)
        );
    }

    #[test]
    fn two_colocated_events() {
        let c = cat(vec![ev(10.0, 0.0, 6.0), ev(15.0, 0.0, 6.0)]);
        let p = params(PredictorMode::PredictorII);
        let (t, a) = prepare(&c, &p).unwrap();
        assert_eq!(count_predicted(&t, &a), 1);
        // Regenerated alarms: the swapped catalog is the same catalog, 1 predicted either way.
        let regen = p.with_alarms(AlarmHandling::Regenerate);
        assert_eq!(
            exact_permutation_pvalue(&c, regen).unwrap(),
            Ratio::from_integer(1)
        );
        // Fixed alarms: after the swap the first event sits at day 15, inside only
        // its own alarm (10, 31], and the second at day 10, inside none. 0 predicted.
        assert_eq!(exact_permutation_pvalue(&c, p).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn regenerated_monte_carlo_matches_exact() {
        let c = cat(vec![
            ev(0.0, 0.0, 6.0),
            ev(4.0, 10.0, 5.8),
            ev(30.0, 20.0, 6.3),
            ev(33.0, 200.0, 5.5),
            ev(60.0, 210.0, 5.9),
        ]);
        let p = params(PredictorMode::PredictorI).with_alarms(AlarmHandling::Regenerate);
        let exact = exact_permutation_pvalue(&c, p).unwrap();
        let exact = *exact.numer() as f64 / *exact.denom() as f64;
        let r = permutation_test(&c, p, 4000, 17).unwrap();
        let se = (exact * (1.0 - exact) / 4000.0).sqrt();
        assert!(
            (r.p_estimate - exact).abs() <= 3.0 * se,
            "{} vs {exact}",
            r.p_estimate
        );
    }

    #[test]
    fn enumeration_guard() {
        let c = cat((0..9).map(|i| ev(i as f64 * 5.0, 0.0, 6.0)).collect());
        assert!(matches!(
            exact_permutation_pvalue(&c, params(PredictorMode::PredictorI)),
            Err(Error::TooLarge { n: 9, limit: 8 })
        ));
    }

    #[test]
    fn far_apart_events_p_is_one() {
        let c = cat((0..6)
            .map(|i| ev(i as f64 * 3.0, i as f64 * 500.0, 6.0))
            .collect());
        let r = permutation_test(&c, params(PredictorMode::PredictorII), 200, 1).unwrap();
        assert_eq!(r.observed, 0.0);
        assert_eq!(r.sims_geq, 200);
        assert_eq!(r.p_estimate, 1.0);
        assert!(!r.p_is_upper_bound);
    }

    #[test]
    fn zero_reps_rejected() {
        let c = cat(vec![ev(1.0, 0.0, 6.0)]);
        assert!(permutation_test(&c, params(PredictorMode::PredictorI), 0, 1).is_err());
    }

    #[test]
    fn report_flags_zero_exceedances() {
        let r = TestReport::from_counts(5.0, &[1.0, 2.0, 4.0, 0.0], 3, ()).unwrap();
        assert_eq!(r.sims_geq, 0);
        assert_eq!(r.p_estimate, 0.0);
        assert!(r.p_is_upper_bound);
        assert_eq!(r.max_sim, 4.0);
        assert_eq!(r.p_display(), "<0.25");
    }

    #[test]
    fn replicates_are_schedule_independent() {
        let c = cat((0..30)
            .map(|i| {
                ev(
                    (i * 7 % 97) as f64,
                    (i % 5) as f64 * 20.0,
                    5.0 + (i % 7) as f64 * 0.2,
                )
            })
            .collect());
        let (t, a) = prepare(&c, &params(PredictorMode::PredictorII)).unwrap();
        let parallel = permutation_counts(&t, &a, 64, 99);
        let serial: Vec<usize> = (0..64)
            .map(|r| one_permutation_count(&t, &a, &mut replicate_rng(99, r)))
            .collect();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let r = TestReport::from_counts(2.0, &[1.0, 3.0], 7, ()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for k in [
            "observed",
            "n_reps",
            "sims_geq",
            "p_estimate",
            "p_is_upper_bound",
            "max_sim",
            "seed",
            "config",
        ] {
            assert!(v.get(k).is_some(), "{k} missing in {v}");
        }
        assert_eq!(v["p_estimate"], 0.5);
    }
}
