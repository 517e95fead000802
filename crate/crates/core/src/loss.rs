//! Regression losses and their analytic derivatives.
//!
//! Every loss is evaluated on the scaled residual `s = beta * r`, where `r` is
//! prediction minus target. `beta` controls where a residual falls relative to
//! the quadratic zone of Huber and logcosh.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shape of a loss, without its residual scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossFunction {
    Mse,
    Mae,
    /// Quadratic for `|s| <= delta`, linear beyond.
    Huber { delta: f64 },
    #[serde(rename = "logcosh")]
    LogCosh,
}

impl LossFunction {
    pub fn name(&self) -> &'static str {
        match self {
            LossFunction::Mse => "mse",
            LossFunction::Mae => "mae",
            LossFunction::Huber { .. } => "huber",
            LossFunction::LogCosh => "logcosh",
        }
    }
}

fn default_beta() -> f64 {
    1.0
}

/// A loss function together with its residual scale `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossKind {
    #[serde(flatten)]
    pub function: LossFunction,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl LossKind {
    pub fn new(function: LossFunction) -> Self {
        LossKind {
            function,
            beta: 1.0,
        }
    }

    pub fn mse() -> Self {
        Self::new(LossFunction::Mse)
    }

    pub fn mae() -> Self {
        Self::new(LossFunction::Mae)
    }

    pub fn huber(delta: f64) -> Self {
        Self::new(LossFunction::Huber { delta })
    }

    pub fn logcosh() -> Self {
        Self::new(LossFunction::LogCosh)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "loss beta must be positive and finite, got {}",
                self.beta
            )));
        }
        if let LossFunction::Huber { delta } = self.function {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "huber delta must be positive and finite, got {delta}"
                )));
            }
        }
        Ok(())
    }

    /// Per-sample loss of residual `r`. Callers guarantee `r` is finite.
    #[inline]
    pub(crate) fn value_unchecked(&self, r: f64) -> f64 {
        let s = self.beta * r;
        match self.function {
            LossFunction::Mse => s * s,
            LossFunction::Mae => s.abs(),
            LossFunction::Huber { delta } => {
                let a = s.abs();
                if a <= delta {
                    0.5 * s * s
                } else {
                    delta * a - 0.5 * delta * delta
                }
            }
            LossFunction::LogCosh => log_cosh(s),
        }
    }

    /// d/dr of [`Self::value_unchecked`].
    #[inline]
    pub(crate) fn gradient_unchecked(&self, r: f64) -> f64 {
        let beta = self.beta;
        let s = beta * r;
        match self.function {
            LossFunction::Mse => 2.0 * beta * s,
            LossFunction::Mae => beta * sign(s),
            LossFunction::Huber { delta } => {
                if s.abs() <= delta {
                    beta * s
                } else {
                    beta * delta * sign(s)
                }
            }
            LossFunction::LogCosh => beta * s.tanh(),
        }
    }
}

/// `sign` with `sign(0) = 0`.
#[inline]
fn sign(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `ln(cosh(s))` without overflow.
///
/// Small arguments go through `ln_1p(2 sinh^2(s/2))`, which keeps full relative
/// precision near zero; large ones through `|s| + ln_1p(exp(-2|s|)) - ln 2`.
#[inline]
pub fn log_cosh(s: f64) -> f64 {
    let a = s.abs();
    if a < 1.0 {
        let h = (0.5 * a).sinh();
        (2.0 * h * h).ln_1p()
    } else {
        a + (-2.0 * a).exp().ln_1p() - LN_2
    }
}

fn check_residual(r: f64) -> Result<()> {
    if r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("residual must be finite, got {r}")))
    }
}

/// Loss of a single residual (prediction minus target).
pub fn loss_value(kind: &LossKind, r: f64) -> Result<f64> {
    kind.validate()?;
    check_residual(r)?;
    Ok(kind.value_unchecked(r))
}

/// Derivative of [`loss_value`] with respect to the residual.
///
/// MAE returns the subgradient 0 at `r = 0`; Huber uses the quadratic branch at
/// the kink, where both one-sided derivatives agree.
pub fn loss_gradient(kind: &LossKind, r: f64) -> Result<f64> {
    kind.validate()?;
    check_residual(r)?;
    Ok(kind.gradient_unchecked(r))
}

/// Mean loss over paired predictions and targets.
pub fn batch_loss(kind: &LossKind, predictions: &[f64], targets: &[f64]) -> Result<f64> {
    kind.validate()?;
    if predictions.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    if predictions.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} predictions, {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    for (p, t) in predictions.iter().zip(targets) {
        let r = p - t;
        check_residual(r)?;
        total += kind.value_unchecked(r);
    }
    Ok(total / predictions.len() as f64)
}

fn constant_loss(kind: &LossKind, c: f64, targets: &[f64]) -> f64 {
    targets.iter().map(|t| kind.value_unchecked(c - t)).sum::<f64>() / targets.len() as f64
}

/// The constant prediction minimizing the mean loss over `targets`.
///
/// All four losses are convex in the constant, so a golden-section search over
/// `[min(targets), max(targets)]` converges to the global minimizer.
pub fn constant_model_minimizer(kind: &LossKind, targets: &[f64]) -> Result<f64> {
    kind.validate()?;
    if targets.is_empty() {
        return Err(Error::InvalidInput("empty targets".into()));
    }
    if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite target {bad}")));
    }
    let (mut lo, mut hi) = targets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    if lo == hi {
        return Ok(lo);
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = constant_loss(kind, a, targets);
    let mut fb = constant_loss(kind, b, targets);
    while hi - lo > 1e-9 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = constant_loss(kind, a, targets);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = constant_loss(kind, b, targets);
        }
    }
    Ok(0.5 * (lo + hi))
}
