//! Tail probabilities for the number of successful alarms when each alarm
//! succeeds independently with its own probability.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::replicate_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PoiBinMethod {
    /// O(A^2) convolution recurrence.
    ExactDp,
    /// Independent Bernoulli draws.
    Simulate { n_reps: usize, seed: u64 },
    /// Poisson tail with mean `sum(p_j)`.
    PoissonApprox,
}

/// Probability mass function of a sum of independent Bernoulli(p_j).
pub fn poisson_binomial_pmf<T: Real>(probs: &[T]) -> Result<Vec<T>> {
    validate(probs)?;
    let mut pmf = vec![T::zero(); probs.len() + 1];
    pmf[0] = T::one();
    for (n, &p) in probs.iter().enumerate() {
        let q = T::one() - p;
        for k in (1..=n + 1).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] = pmf[0] * q;
    }
    Ok(pmf)
}

fn validate<T: Real>(probs: &[T]) -> Result<()> {
    match probs
        .iter()
        .position(|p| !(*p >= T::zero() && *p <= T::one()))
    {
        Some(j) => Err(Error::arg(format!("p[{j}] = {} outside [0, 1]", probs[j]))),
        None => Ok(()),
    }
}

/// `P(S >= s_obs)` where `S` is the Poisson-binomial sum of `probs`.
pub fn poisson_binomial_pvalue(s_obs: usize, probs: &[f64], method: PoiBinMethod) -> Result<f64> {
    validate(probs)?;
    if s_obs > probs.len() {
        return Err(Error::arg(format!(
            "S = {s_obs} exceeds the number of alarms {}",
            probs.len()
        )));
    }
    if s_obs == 0 {
        return Ok(1.0);
    }
    match method {
        PoiBinMethod::ExactDp => {
            let pmf = poisson_binomial_pmf(probs)?;
            Ok(pmf[s_obs..].iter().sum::<f64>().min(1.0))
        }
        PoiBinMethod::Simulate { n_reps, seed } => {
            if n_reps == 0 {
                return Err(Error::arg("n_reps must be >= 1"));
            }
            let mut rng = replicate_rng(seed, 0);
            let hits = (0..n_reps)
                .filter(|_| probs.iter().filter(|&&p| rng.random::<f64>() < p).count() >= s_obs)
                .count();
            Ok(hits as f64 / n_reps as f64)
        }
        PoiBinMethod::PoissonApprox => {
            let mean: f64 = probs.iter().sum();
            if mean == 0.0 {
                return Ok(0.0);
            }
            // P(N >= s) for N ~ Poisson(mean) is the regularized lower incomplete gamma P(s, mean).
            Ok(statrs::function::gamma::gamma_lr(s_obs as f64, mean))
        }
    }
}
