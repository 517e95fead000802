//! Scalar scores for how a regressor relates to two ground-truth branches,
//! and permutation-matched accuracy of an extraction against generator labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::ExtractionResult;
use crate::network::NetworkModel;
use crate::synthdata::BranchFunction;

/// Largest number of branches or labels the exhaustive matcher accepts.
pub const MAX_MATCHED_BRANCHES: usize = 6;

/// Anything that maps an input vector to a scalar.
pub trait Predictor {
    fn predict_one(&self, x: &[f64]) -> Result<f64>;

    fn predict_many(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict_one(x)).collect()
    }
}

impl Predictor for NetworkModel {
    fn predict_one(&self, x: &[f64]) -> Result<f64> {
        self.forward(x)
    }

    fn predict_many(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        self.predict(xs)
    }
}

impl Predictor for BranchFunction {
    fn predict_one(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
}

impl<F: Fn(&[f64]) -> f64> Predictor for F {
    fn predict_one(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

/// `n` evenly spaced points strictly inside `(lo, hi)`.
pub fn open_grid_1d(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    let step = (hi - lo) / (n + 1) as f64;
    (1..=n).map(|i| vec![lo + step * i as f64]).collect()
}

/// `n x n` grid over `[lo, hi]^2`, dropping points within `band` of either axis.
pub fn axis_excluded_grid_2d(lo: f64, hi: f64, n: usize, band: f64) -> Vec<Vec<f64>> {
    let step = (hi - lo) / (n - 1) as f64;
    let coords: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    coords
        .iter()
        .flat_map(|&x| coords.iter().map(move |&y| vec![x, y]))
        .filter(|p| p[0].abs() > band && p[1].abs() > band)
        .collect()
}

fn evaluate_all(
    model: &dyn Predictor,
    a: &dyn Predictor,
    b: &dyn Predictor,
    grid: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let xs: Vec<&[f64]> = grid.iter().map(|x| x.as_slice()).collect();
    Ok((model.predict_many(&xs)?, a.predict_many(&xs)?, b.predict_many(&xs)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdherenceReport {
    /// Share of grid points where the majority branch is strictly closer.
    pub fraction_closer_to_majority: f64,
    pub fraction_closer_to_minority: f64,
    pub fraction_ties: f64,
    pub mean_abs_error_to_majority: f64,
    pub mean_abs_error_to_minority: f64,
    pub region: String,
}

pub fn adherence(
    model: &dyn Predictor,
    majority: &dyn Predictor,
    minority: &dyn Predictor,
    grid: &[Vec<f64>],
    region: &str,
) -> Result<AdherenceReport> {
    if grid.is_empty() {
        return Err(Error::InvalidRegion("empty grid".into()));
    }
    let (pred, maj, min) = evaluate_all(model, majority, minority, grid)?;
    let n = grid.len() as f64;
    let (mut closer_maj, mut closer_min, mut ties) = (0usize, 0usize, 0usize);
    let (mut err_maj, mut err_min) = (0.0, 0.0);
    for i in 0..grid.len() {
        let da = (pred[i] - maj[i]).abs();
        let db = (pred[i] - min[i]).abs();
        err_maj += da;
        err_min += db;
        match da.partial_cmp(&db) {
            Some(std::cmp::Ordering::Less) => closer_maj += 1,
            Some(std::cmp::Ordering::Greater) => closer_min += 1,
            _ => ties += 1,
        }
    }
    Ok(AdherenceReport {
        fraction_closer_to_majority: closer_maj as f64 / n,
        fraction_closer_to_minority: closer_min as f64 / n,
        fraction_ties: ties as f64 / n,
        mean_abs_error_to_majority: err_maj / n,
        mean_abs_error_to_minority: err_min / n,
        region: region.to_string(),
    })
}

/// Share of genuinely multi-valued grid points where the model lies strictly
/// between the branches, at least 5% of the local gap away from each.
///
/// Points whose gap is at most 5% of `target_range` are filtered out first.
pub fn betweenness(
    model: &dyn Predictor,
    phi_a: &dyn Predictor,
    phi_b: &dyn Predictor,
    grid: &[Vec<f64>],
    target_range: f64,
) -> Result<f64> {
    let (pred, a, b) = evaluate_all(model, phi_a, phi_b, grid)?;
    let mut kept = 0usize;
    let mut between = 0usize;
    for i in 0..grid.len() {
        let gap = (a[i] - b[i]).abs();
        if gap <= 0.05 * target_range {
            continue;
        }
        kept += 1;
        let margin = 0.05 * gap;
        let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
        if pred[i] >= lo + margin && pred[i] <= hi - margin {
            between += 1;
        }
    }
    if kept == 0 {
        return Err(Error::InvalidRegion(
            "no grid point separates the branches by more than 5% of the target range".into(),
        ));
    }
    Ok(between as f64 / kept as f64)
}

/// Nearest-branch switches along an ordered grid, per grid point.
pub fn oscillation_index(
    model: &dyn Predictor,
    phi_a: &dyn Predictor,
    phi_b: &dyn Predictor,
    grid: &[Vec<f64>],
) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("oscillation needs at least 2 grid points".into()));
    }
    let (pred, a, b) = evaluate_all(model, phi_a, phi_b, grid)?;
    let nearer_a: Vec<bool> = (0..grid.len())
        .map(|i| (pred[i] - a[i]).abs() <= (pred[i] - b[i]).abs())
        .collect();
    let switches = nearer_a.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(switches as f64 / grid.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub accuracy: f64,
    /// True labels heading the columns of `counts`.
    pub true_labels: Vec<u32>,
    /// `counts[k][t]`: unambiguous samples with primary branch `k + 1` and true label `true_labels[t]`.
    pub counts: Vec<Vec<usize>>,
    /// Best matching found-branch ordinal to true label (`None` for unmatched branches).
    pub mapping: Vec<Option<u32>>,
    pub n_evaluated: usize,
    pub n_ambiguous: usize,
    pub n_unassigned: usize,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Accuracy under the best bijection between found branches and true labels.
///
/// Only samples with `mask[i]` are scored. Ambiguous samples count as correct
/// when their true label maps to any branch that fits them within tau;
/// unassigned samples count as wrong.
pub fn branch_accuracy(
    result: &ExtractionResult,
    truth: &[Option<u32>],
    mask: &[bool],
) -> Result<ConfusionReport> {
    let n = result.assignments.len();
    if truth.len() != n || mask.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n} assignments but {} labels and {} mask entries",
            truth.len(),
            mask.len()
        )));
    }
    let k = result.branches.len();
    if k > MAX_MATCHED_BRANCHES {
        return Err(Error::UnsupportedSize(format!(
            "{k} branches exceed the permutation limit of {MAX_MATCHED_BRANCHES}"
        )));
    }
    let mut labels = Vec::new();
    for i in (0..n).filter(|&i| mask[i]) {
        match truth[i] {
            Some(t) if !labels.contains(&t) => labels.push(t),
            Some(_) => {}
            None => {
                return Err(Error::InvalidInput(format!("sample {i} has no true label")));
            }
        }
    }
    labels.sort_unstable();
    if labels.len() > MAX_MATCHED_BRANCHES {
        return Err(Error::UnsupportedSize(format!(
            "{} true labels exceed the permutation limit of {MAX_MATCHED_BRANCHES}",
            labels.len()
        )));
    }
    let label_pos = |t: u32| labels.iter().position(|&l| l == t).expect("label collected");

    // Per masked sample: true column, and the set of branch rows that fit it.
    let scored: Vec<(usize, Option<usize>, bool, Vec<usize>)> = (0..n)
        .filter(|&i| mask[i])
        .map(|i| {
            let a = &result.assignments[i];
            let fitting: Vec<usize> = result.fitting_branches(i).iter().map(|b| b - 1).collect();
            (label_pos(truth[i].unwrap()), a.primary_branch.map(|p| p - 1), a.ambiguous, fitting)
        })
        .collect();

    let size = k.max(labels.len());
    let mut best: Option<(usize, Vec<usize>)> = None;
    for perm in permutations(size) {
        // perm[row] is the label column matched to found branch `row`; columns >= labels.len() are dummies
        let correct = scored
            .iter()
            .filter(|(col, primary, ambiguous, fitting)| {
                if *ambiguous {
                    fitting.iter().any(|&row| perm[row] == *col)
                } else {
                    primary.is_some_and(|row| perm[row] == *col)
                }
            })
            .count();
        if best.as_ref().is_none_or(|(c, _)| correct > *c) {
            best = Some((correct, perm));
        }
    }
    let (correct, perm) = best.unwrap_or((0, Vec::new()));

    let mut counts = vec![vec![0usize; labels.len()]; k];
    let (mut n_ambiguous, mut n_unassigned) = (0, 0);
    for (col, primary, ambiguous, _) in &scored {
        if *ambiguous {
            n_ambiguous += 1;
        } else if let Some(row) = primary {
            counts[*row][*col] += 1;
        } else {
            n_unassigned += 1;
        }
    }
    let mapping = (0..k).map(|row| labels.get(perm[row]).copied()).collect();
    Ok(ConfusionReport {
        accuracy: if scored.is_empty() { 0.0 } else { correct as f64 / scored.len() as f64 },
        true_labels: labels,
        counts,
        mapping,
        n_evaluated: scored.len(),
        n_ambiguous,
        n_unassigned,
    })
}
