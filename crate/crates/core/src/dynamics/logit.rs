//! The logit choice rule.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `ln p(k) = β(u_k - max u) - ln Σ_l e^{β(u_l - max u)}`. Differences are
/// taken exactly before converting to floating point.
pub fn log_logit_choice(utilities: &[&Rational], beta: f64) -> Result<Vec<f64>> {
    let best = utilities.iter().copied().max().ok_or(Error::EmptyStrategySet { player: 0 })?;
    let shifted: Vec<f64> = utilities
        .iter()
        .map(|u| {
            let d = *u - best;
            if d.is_zero() {
                0.0
            } else {
                beta * rational::to_f64(&d)
            }
        })
        .collect();
    let norm = shifted.iter().map(|x| x.exp()).sum::<f64>().ln();
    Ok(shifted.into_iter().map(|x| x - norm).collect())
}

/// Choice probabilities `e^{βu_k} / Σ_l e^{βu_l}`.
pub fn logit_choice(utilities: &[Rational], beta: f64) -> Result<Vec<f64>> {
    let refs: Vec<&Rational> = utilities.iter().collect();
    Ok(log_logit_choice(&refs, beta)?.into_iter().map(f64::exp).collect())
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

pub fn ln_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, ln_add)
}
