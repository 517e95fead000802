//! Iterative branch peeling.
//!
//! Each iteration fits a fresh logcosh regressor to the samples nobody has
//! claimed yet, thresholds the residuals with a scaled MAD, and hands the
//! well-fit samples to the new branch. A final pass scores every sample
//! against every branch.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::network::{init_model, train, NetworkConfig, NetworkModel, TargetScaler, TrainConfig};
use crate::synthdata::{Dataset, Sample};

pub const EXTRACTION_FORMAT_VERSION: u32 = 1;

/// Consistency constant turning a MAD into a Gaussian standard deviation.
pub const MAD_TO_SIGMA: f64 = 1.4826;

const BETA_MIN: f64 = 1.0;
const BETA_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    /// [`choose_beta`] on the samples being fit.
    Automatic,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSettings {
    pub threshold_multiplier: f64,
    pub stop_fraction: f64,
    pub max_branches: usize,
    pub min_branch_size: usize,
    pub beta_rule: BetaRule,
    /// Replace logcosh, for comparison runs only.
    #[serde(default)]
    pub loss_override: Option<LossFunction>,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        ExtractionSettings {
            threshold_multiplier: 3.0,
            stop_fraction: 0.10,
            max_branches: 5,
            min_branch_size: 50,
            beta_rule: BetaRule::Automatic,
            loss_override: None,
        }
    }
}

impl ExtractionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_multiplier > 0.0 && self.threshold_multiplier.is_finite()) {
            return Err(Error::config("extraction.threshold_multiplier", "must be positive"));
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction < 1.0) {
            return Err(Error::config("extraction.stop_fraction", "must lie in (0, 1)"));
        }
        if self.max_branches == 0 {
            return Err(Error::config("extraction.max_branches", "must be at least 1"));
        }
        if self.min_branch_size == 0 {
            return Err(Error::config("extraction.min_branch_size", "must be at least 1"));
        }
        if let BetaRule::Fixed(b) = self.beta_rule {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config("extraction.beta_rule", "fixed beta must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractionConfig {
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub settings: ExtractionSettings,
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.train.validate()?;
        self.settings.validate()
    }

    /// The same config with every seed advanced by `offset`.
    fn reseeded(&self, offset: u64) -> Self {
        let mut cfg = self.clone();
        cfg.network.seed = cfg.network.seed.wrapping_add(offset);
        cfg.train.seed = cfg.train.seed.wrapping_add(offset);
        cfg
    }
}

/// One discovered rule together with the samples it claimed while peeling.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchModel {
    /// 1-based, in extraction order.
    pub index: usize,
    pub model: NetworkModel,
    /// Residual threshold in raw target units.
    pub tau: f64,
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Ordinal of the best-fitting branch, if that branch's residual is within its tau.
    pub primary_branch: Option<usize>,
    /// Two or more branches fit within their own tau.
    pub ambiguous: bool,
    /// `|y - prediction|` against each branch, in branch order.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub branches: Vec<BranchModel>,
    pub assignments: Vec<Assignment>,
    pub leftover_indices: Vec<usize>,
}

impl ExtractionResult {
    /// Branch ordinals whose residual for sample `i` lies within their tau.
    pub fn fitting_branches(&self, i: usize) -> Vec<usize> {
        self.assignments[i]
            .residuals
            .iter()
            .zip(&self.branches)
            .filter(|(r, b)| **r <= b.tau)
            .map(|(_, b)| b.index)
            .collect()
    }

    pub fn n_assigned(&self) -> usize {
        self.assignments.iter().filter(|a| a.primary_branch.is_some()).count()
    }

    pub fn n_ambiguous(&self) -> usize {
        self.assignments.iter().filter(|a| a.ambiguous).count()
    }

    pub fn n_unassigned(&self) -> usize {
        self.assignments.len() - self.n_assigned()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `k * 1.4826 * MAD(residuals)`, floored at `1e-9 * max(target_range, 1)`.
pub fn residual_threshold(residuals: &[f64], k: f64, target_range: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::InvalidInput("no residuals".into()));
    }
    let mut r = residuals.to_vec();
    let m = median(&mut r);
    let mut dev: Vec<f64> = residuals.iter().map(|v| (v - m).abs()).collect();
    let mad = median(&mut dev);
    let floor = 1e-9 * target_range.max(1.0);
    Ok((k * MAD_TO_SIGMA * mad).max(floor))
}

/// `8 / IQR` of targets already scaled to `[0, 1]`, clamped to `[1, 100]`.
pub fn beta_from_scaled_targets(scaled: &[f64]) -> Result<f64> {
    if scaled.is_empty() {
        return Err(Error::InvalidInput("no targets".into()));
    }
    let mut s = scaled.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    if iqr <= 0.0 {
        return Ok(BETA_MAX);
    }
    Ok((8.0 / iqr).clamp(BETA_MIN, BETA_MAX))
}

/// Residual scale for `data`, using the network's min-max target convention.
pub fn choose_beta(data: &Dataset) -> Result<f64> {
    let scaler = TargetScaler::fit(data.samples().iter().map(|s| s.y));
    let scaled: Vec<f64> = data.samples().iter().map(|s| scaler.scale(s.y)).collect();
    beta_from_scaled_targets(&scaled)
}

fn branch_loss(data: &Dataset, cfg: &ExtractionConfig) -> Result<LossKind> {
    let beta = match cfg.settings.beta_rule {
        BetaRule::Automatic => choose_beta(data)?,
        BetaRule::Fixed(b) => b,
    };
    let function = cfg.settings.loss_override.unwrap_or(LossFunction::LogCosh);
    Ok(LossKind::new(function).with_beta(beta))
}

/// Train a fresh regressor on all of `data`; with logcosh it follows the dominant branch.
pub fn fit_dominant_branch(data: &Dataset, cfg: &ExtractionConfig) -> Result<NetworkModel> {
    cfg.validate()?;
    if data.len() < cfg.settings.min_branch_size {
        return Err(Error::InsufficientData {
            have: data.len(),
            need: cfg.settings.min_branch_size,
        });
    }
    let mut tc = cfg.train.clone();
    tc.loss = branch_loss(data, cfg)?;
    tc.batch_size = tc.batch_size.min(data.len());
    let network = NetworkConfig {
        input_dim: data.input_dim(),
        ..cfg.network.clone()
    };
    let (model, _) = train(&init_model(&network)?, data, None, &tc)?;
    Ok(model)
}

/// Signed residuals, prediction minus target.
fn signed_residuals(samples: &[Sample], model: &NetworkModel) -> Result<Vec<f64>> {
    let preds = model.predict_samples(samples)?;
    Ok(preds.iter().zip(samples).map(|(p, s)| p - s.y).collect())
}

fn split_by_residual(residuals: &[f64], tau: f64) -> (Vec<usize>, Vec<usize>) {
    (0..residuals.len()).partition(|&i| residuals[i].abs() <= tau)
}

/// Indices with `|y - prediction| <= tau`, and the rest.
pub fn peel(data: &Dataset, model: &NetworkModel, tau: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    Ok(split_by_residual(&signed_residuals(data.samples(), model)?, tau))
}

/// Run the peeling loop and assign every sample against the found branches.
///
/// Stops when fewer than `stop_fraction * n` or `min_branch_size` samples remain
/// unclaimed, or when `max_branches` have been found.
pub fn extract_branches(data: &Dataset, cfg: &ExtractionConfig) -> Result<ExtractionResult> {
    cfg.validate()?;
    let n = data.len();
    let settings = &cfg.settings;
    if n < settings.min_branch_size {
        return Err(Error::InsufficientData {
            have: n,
            need: settings.min_branch_size,
        });
    }
    let target_range = data.target_range();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut branches: Vec<BranchModel> = Vec::new();

    for iteration in 0.. {
        if branches.len() >= settings.max_branches
            || (remaining.len() as f64) < settings.stop_fraction * n as f64
            || remaining.len() < settings.min_branch_size
        {
            break;
        }
        let subset = data.subset(&remaining);
        let model = fit_dominant_branch(&subset, &cfg.reseeded(iteration as u64))?;
        let residuals = signed_residuals(subset.samples(), &model)?;
        let tau = residual_threshold(&residuals, settings.threshold_multiplier, target_range)?;
        let (inliers, outliers) = split_by_residual(&residuals, tau);
        if inliers.is_empty() {
            return Err(Error::NoProgress { iteration });
        }
        branches.push(BranchModel {
            index: branches.len() + 1,
            model,
            tau,
            member_indices: inliers.iter().map(|&i| remaining[i]).collect(),
        });
        remaining = outliers.iter().map(|&i| remaining[i]).collect();
    }

    let assignments = assign_samples(&branches, data)?;
    Ok(ExtractionResult {
        branches,
        assignments,
        leftover_indices: remaining,
    })
}

/// Assign each sample to its best-fitting branch within tau, flagging samples
/// that two or more branches fit.
pub fn assign_samples(branches: &[BranchModel], data: &Dataset) -> Result<Vec<Assignment>> {
    let per_branch: Vec<Vec<f64>> = branches
        .iter()
        .map(|b| signed_residuals(data.samples(), &b.model))
        .collect::<Result<_>>()?;
    Ok((0..data.len())
        .map(|i| {
            let residuals: Vec<f64> = per_branch.iter().map(|r| r[i].abs()).collect();
            assign(&residuals, branches)
        })
        .collect())
}

fn assign(residuals: &[f64], branches: &[BranchModel]) -> Assignment {
    let best = residuals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j);
    let fitting = residuals.iter().zip(branches).filter(|(r, b)| **r <= b.tau).count();
    Assignment {
        primary_branch: best
            .filter(|&j| residuals[j] <= branches[j].tau)
            .map(|j| branches[j].index),
        ambiguous: fitting >= 2,
        residuals: residuals.to_vec(),
    }
}

#[derive(Serialize, Deserialize)]
struct BranchDocument {
    index: usize,
    tau: f64,
    member_indices: Vec<usize>,
    model: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct AssignmentDocument {
    index: usize,
    primary_branch: Option<usize>,
    ambiguous: bool,
    residuals: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ResultDocument {
    format_version: u32,
    branches: Vec<BranchDocument>,
    assignments: Vec<AssignmentDocument>,
    leftover_indices: Vec<usize>,
}

impl ExtractionResult {
    pub fn to_json(&self) -> String {
        let doc = ResultDocument {
            format_version: EXTRACTION_FORMAT_VERSION,
            branches: self
                .branches
                .iter()
                .map(|b| BranchDocument {
                    index: b.index,
                    tau: b.tau,
                    member_indices: b.member_indices.clone(),
                    model: b.model.to_json_value(),
                })
                .collect(),
            assignments: self
                .assignments
                .iter()
                .enumerate()
                .map(|(index, a)| AssignmentDocument {
                    index,
                    primary_branch: a.primary_branch,
                    ambiguous: a.ambiguous,
                    residuals: a.residuals.clone(),
                })
                .collect(),
            leftover_indices: self.leftover_indices.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("extraction document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultDocument = serde_json::from_str(text)?;
        if doc.format_version != EXTRACTION_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported extraction format_version {}",
                doc.format_version
            )));
        }
        let branches = doc
            .branches
            .into_iter()
            .map(|b| {
                Ok(BranchModel {
                    index: b.index,
                    tau: b.tau,
                    member_indices: b.member_indices,
                    model: NetworkModel::from_json_value(b.model)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut assignments = Vec::with_capacity(doc.assignments.len());
        for (i, a) in doc.assignments.into_iter().enumerate() {
            if a.index != i || a.residuals.len() != branches.len() {
                return Err(Error::InvalidInput(format!("malformed assignment record {i}")));
            }
            assignments.push(Assignment {
                primary_branch: a.primary_branch,
                ambiguous: a.ambiguous,
                residuals: a.residuals,
            });
        }
        Ok(ExtractionResult {
            branches,
            assignments,
            leftover_indices: doc.leftover_indices,
        })
    }

    /// `index,primary_branch,ambiguous` with `NA` for unassigned samples.
    pub fn write_assignments_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,primary_branch,ambiguous")?;
        for (i, a) in self.assignments.iter().enumerate() {
            let primary = a.primary_branch.map_or_else(|| "NA".to_string(), |b| b.to_string());
            writeln!(out, "{i},{primary},{}", a.ambiguous)?;
        }
        out.flush()
    }
}
