//! Stationary distributions by GTH state reduction, and the numeric
//! classification of persisting states along a ladder of β values.
//!
//! GTH (Grassmann, Taksar and Heyman) eliminates states one at a time using
//! only additions, multiplications and divisions of nonnegative numbers, so
//! every probability comes out with small relative error, however tiny. The
//! log-domain variant runs the same recursion on logarithms and never
//! underflows.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dynamics::chain::{log_transition_matrix, LogTransitionMatrix, TransitionMatrix};
use crate::dynamics::logit::{ln_add, ln_sum};
use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::game::{Game, StateId};
use crate::revision::RevisionProcess;

/// Bound on `‖μP - μ‖∞` accepted from the solver.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    pub residual: f64,
}

fn gth(n: usize, mut a: Vec<f64>) -> Result<Vec<f64>> {
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        if s <= 0.0 {
            return Err(Error::ReducibleChain(k));
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let f = a[i * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += f * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for j in 1..n {
        pi[j] = (0..j).map(|i| pi[i] * a[i * n + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|x| x / total).collect())
}

fn log_gth(n: usize, mut a: Vec<f64>) -> Result<Vec<f64>> {
    for k in (1..n).rev() {
        let s = ln_sum(a[k * n..k * n + k].iter().copied());
        if s == f64::NEG_INFINITY {
            return Err(Error::ReducibleChain(k));
        }
        for i in 0..k {
            a[i * n + k] -= s;
        }
        for i in 0..k {
            let f = a[i * n + k];
            if f == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..k {
                let add = f + a[k * n + j];
                a[i * n + j] = ln_add(a[i * n + j], add);
            }
        }
    }
    let mut pi = vec![f64::NEG_INFINITY; n];
    pi[0] = 0.0;
    for j in 1..n {
        pi[j] = ln_sum((0..j).map(|i| pi[i] + a[i * n + j]));
    }
    let total = ln_sum(pi.iter().copied());
    Ok(pi.into_iter().map(|x| x - total).collect())
}

/// Solves `μP = μ`, `Σμ = 1` for an irreducible chain.
pub fn stationary_distribution(matrix: &TransitionMatrix) -> Result<StationaryDistribution> {
    matrix.check_irreducible()?;
    let n = matrix.n_states();
    let data = (0..n).flat_map(|i| matrix.row(i).iter().copied()).collect();
    let probabilities = gth(n, data)?;
    let residual = matrix.residual(&probabilities);
    if residual.is_nan() || residual > RESIDUAL_TOL {
        return Err(Error::SolveFailure(format!("residual {residual:e} above {RESIDUAL_TOL:e}")));
    }
    Ok(StationaryDistribution { probabilities, residual })
}

/// `ln μ` for an irreducible chain given in log form, with the residual of
/// the linear-domain balance equations.
pub fn log_stationary_distribution(matrix: &LogTransitionMatrix) -> Result<(Vec<f64>, f64)> {
    matrix.check_irreducible()?;
    let log_mu = log_gth(matrix.n_states(), matrix.raw().to_vec())?;
    let mu: Vec<f64> = log_mu.iter().map(|x| x.exp()).collect();
    let residual = matrix.to_linear().residual(&mu);
    if residual.is_nan() || residual > RESIDUAL_TOL {
        return Err(Error::SolveFailure(format!("residual {residual:e} above {RESIDUAL_TOL:e}")));
    }
    Ok((log_mu, residual))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub betas: Vec<f64>,
    /// States whose fitted slope is below `-slope_tol` vanish.
    pub slope_tol: f64,
    /// Number of trailing ladder points in the least-squares slope fit.
    pub window: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { betas: vec![4.0, 8.0, 16.0, 32.0, 64.0], slope_tol: 1e-3, window: 2 }
    }
}

impl EstimateOptions {
    pub fn validate(&self) -> Result<()> {
        if self.betas.len() < 3 {
            return Err(Error::InvalidParams("the β ladder needs at least 3 points".into()));
        }
        if self.betas.windows(2).any(|w| w[0] >= w[1]) || self.betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParams(
                "the β ladder must be finite, nonnegative and strictly increasing".into(),
            ));
        }
        if self.window < 2 || self.window > self.betas.len() {
            return Err(Error::InvalidParams(format!(
                "fit window {} must lie between 2 and the ladder length {}",
                self.window,
                self.betas.len()
            )));
        }
        if self.slope_tol.is_nan() || self.slope_tol <= 0.0 {
            return Err(Error::InvalidParams("slope tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StableEstimate {
    pub betas: Vec<f64>,
    /// `ln μ^β(s)`, one row per ladder point.
    pub log_probabilities: Vec<Vec<f64>>,
    /// Fitted slope of `ln μ^β(s)` against β.
    pub slopes: Vec<f64>,
    pub persisting: BTreeSet<StateId>,
    pub vanishing: BTreeSet<StateId>,
    pub max_residual: f64,
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Classifies states as persisting or vanishing from the decay of their
/// stationary probability as β grows.
pub fn numeric_stable_estimate(
    game: &Game,
    revision: &RevisionProcess,
    options: &EstimateOptions,
) -> Result<StableEstimate> {
    options.validate()?;
    let mut log_probabilities = Vec::with_capacity(options.betas.len());
    let mut max_residual: f64 = 0.0;
    for &beta in &options.betas {
        let config = DynamicsConfig::new(beta, revision.clone())?;
        let (log_mu, residual) = log_stationary_distribution(&log_transition_matrix(game, &config)?)?;
        max_residual = max_residual.max(residual);
        log_probabilities.push(log_mu);
    }
    let start = options.betas.len() - options.window;
    let xs = &options.betas[start..];
    let slopes: Vec<f64> = (0..game.n_states())
        .map(|s| {
            let ys: Vec<f64> = log_probabilities[start..].iter().map(|row| row[s]).collect();
            fit_slope(xs, &ys)
        })
        .collect();
    let (vanishing, persisting): (BTreeSet<StateId>, BTreeSet<StateId>) =
        (0..game.n_states()).partition(|&s| slopes[s] < -options.slope_tol);
    Ok(StableEstimate { betas: options.betas.clone(), log_probabilities, slopes, persisting, vanishing, max_residual })
}
