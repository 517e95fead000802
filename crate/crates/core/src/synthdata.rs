//! Ground-truth branch functions and mixed multi-valued datasets.
//!
//! Two test problems are provided. The 1D problem mixes a quartic with a
//! version of it that is zero on `[-4, 4]`; the 2D problem mixes two
//! sigmoid-wrapped cubic-ish polynomials on `[-1.5, 1.5]^2`.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DOMAIN_1D: (f64, f64) = (-6.0, 6.0);
pub const DOMAIN_2D: (f64, f64) = (-1.5, 1.5);

/// Relative noise used when a [`MixSpec`] does not fix `noise_sigma`.
pub const DEFAULT_RELATIVE_NOISE: f64 = 0.02;

/// One `(x, y)` observation, optionally labelled with the branch that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
    pub true_branch: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    input_dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidInput("input_dim must be at least 1".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != input_dim {
                return Err(Error::InvalidInput(format!(
                    "sample {i} has {} inputs, expected {input_dim}",
                    s.x.len()
                )));
            }
            if !s.y.is_finite() || s.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("sample {i} is not finite")));
            }
        }
        Ok(Dataset { samples, input_dim })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// `max(y) - min(y)`, zero for empty data.
    pub fn target_range(&self) -> f64 {
        range(self.samples.iter().map(|s| s.y))
    }

    /// A new dataset holding the samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            input_dim: self.input_dim,
        }
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

pub(crate) fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo <= hi {
        hi - lo
    } else {
        0.0
    }
}

/// How a dataset mixes its two branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    /// Probability (or exact share, with `exact_counts`) of branch 1.
    pub fraction_branch1: f64,
    pub n_samples: usize,
    /// Standard deviation of additive Gaussian noise on `y`, raw target units.
    /// `None` means [`DEFAULT_RELATIVE_NOISE`] times the noiseless target range.
    #[serde(default)]
    pub noise_sigma: Option<f64>,
    pub seed: u64,
    /// Assign exactly `round(fraction_branch1 * n_samples)` samples to branch 1.
    #[serde(default)]
    pub exact_counts: bool,
}

impl Default for MixSpec {
    fn default() -> Self {
        MixSpec {
            fraction_branch1: 0.6,
            n_samples: 5000,
            noise_sigma: None,
            seed: 42,
            exact_counts: false,
        }
    }
}

impl MixSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction_branch1) {
            return Err(Error::config(
                "mix.fraction_branch1",
                format!("must lie in [0, 1], got {}", self.fraction_branch1),
            ));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be positive".into()));
        }
        if let Some(s) = self.noise_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config(
                    "mix.noise_sigma",
                    format!("must be non-negative, got {s}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

impl Problem {
    pub fn input_dim(self) -> usize {
        match self {
            Problem::OneD => 1,
            Problem::TwoD => 2,
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Problem::OneD => DOMAIN_1D,
            Problem::TwoD => DOMAIN_2D,
        }
    }

    /// Evaluate branch `branch` (1 or 2) at `x`.
    pub fn eval(self, branch: u32, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        match (self, branch) {
            (Problem::OneD, 1) => phi1_1d(x[0]),
            (Problem::OneD, 2) => phi2_1d(x[0]),
            (Problem::TwoD, 1) => phi1_2d(x[0], x[1]),
            (Problem::TwoD, 2) => phi2_2d(x[0], x[1]),
            _ => Err(Error::InvalidInput(format!("unknown branch {branch}"))),
        }
    }

    /// Branch `branch` as a standalone predictor.
    pub fn branch(self, branch: u32) -> BranchFunction {
        BranchFunction {
            problem: self,
            branch,
        }
    }
}

/// One ground-truth branch of a [`Problem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchFunction {
    pub problem: Problem,
    pub branch: u32,
}

impl BranchFunction {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.problem.eval(self.branch, x)
    }
}

fn check_1d(function: &'static str, x: f64) -> Result<()> {
    if (DOMAIN_1D.0..=DOMAIN_1D.1).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: vec![x],
            domain: "[-6, 6]",
        })
    }
}

fn check_2d(function: &'static str, x: f64, y: f64) -> Result<()> {
    let d = DOMAIN_2D.0..=DOMAIN_2D.1;
    if d.contains(&x) && d.contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: vec![x, y],
            domain: "[-1.5, 1.5]^2",
        })
    }
}

#[inline]
fn quartic(x: f64) -> f64 {
    let q = (x - 4.0) * (x + 4.0);
    q * q
}

pub fn phi1_1d(x: f64) -> Result<f64> {
    check_1d("phi1_1d", x)?;
    Ok(quartic(x))
}

/// Zero on `[-4, 4]`, equal to [`phi1_1d`] outside it.
pub fn phi2_1d(x: f64) -> Result<f64> {
    check_1d("phi2_1d", x)?;
    if (-4.0..=4.0).contains(&x) {
        Ok(0.0)
    } else {
        Ok(quartic(x))
    }
}

pub fn f1_2d(x: f64, y: f64) -> Result<f64> {
    check_2d("f1_2d", x, y)?;
    Ok(x * y * (2.0 * x + 2.0 * y))
}

pub fn f2_2d(x: f64, y: f64) -> Result<f64> {
    check_2d("f2_2d", x, y)?;
    Ok(x * y * (x * x + y * y))
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn phi1_2d(x: f64, y: f64) -> Result<f64> {
    f1_2d(x, y).map(sigmoid)
}

pub fn phi2_2d(x: f64, y: f64) -> Result<f64> {
    f2_2d(x, y).map(sigmoid)
}

/// Sample a mixed two-branch dataset.
///
/// Inputs are uniform over the problem domain. Each sample picks branch 1 with
/// probability `fraction_branch1` (or from an exact-count shuffle), and its
/// target is the branch value plus Gaussian noise.
pub fn generate(problem: Problem, spec: &MixSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_samples;
    let (lo, hi) = problem.domain();
    let dim = problem.input_dim();

    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..=hi)).collect())
        .collect();

    let branches: Vec<u32> = if spec.exact_counts {
        let n1 = (spec.fraction_branch1 * n as f64).round() as usize;
        let mut b: Vec<u32> = (0..n).map(|i| if i < n1 { 1 } else { 2 }).collect();
        b.shuffle(&mut rng);
        b
    } else {
        (0..n)
            .map(|_| {
                if rng.random::<f64>() < spec.fraction_branch1 {
                    1
                } else {
                    2
                }
            })
            .collect()
    };

    let clean: Vec<f64> = xs
        .iter()
        .zip(&branches)
        .map(|(x, &b)| problem.eval(b, x))
        .collect::<Result<_>>()?;

    let sigma = match spec.noise_sigma {
        Some(s) => s,
        None => DEFAULT_RELATIVE_NOISE * range(clean.iter().copied()),
    };
    let noise = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidInput(format!("noise distribution: {e}")))?;

    let samples = xs
        .into_iter()
        .zip(branches)
        .zip(clean)
        .map(|((x, b), y)| {
            let y = if sigma > 0.0 { y + noise.sample(&mut rng) } else { y };
            Sample {
                x,
                y,
                true_branch: Some(b),
            }
        })
        .collect();
    Dataset::new(samples, dim)
}

/// Seeded shuffle followed by a cut at `round(train_fraction * n)`.
pub fn train_test_split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = data.len();
    let cut = (train_fraction * n as f64).round() as usize;
    if cut == 0 || cut == n {
        return Err(Error::InvalidInput(format!(
            "split of {n} samples at fraction {train_fraction} leaves an empty part"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((data.subset(&idx[..cut]), data.subset(&idx[cut..])))
}

/// Format a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `data` as CSV with header `x1,...,xd,y,branch`.
pub fn write_csv<W: Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    let mut header: Vec<String> = (1..=data.input_dim).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    header.push("branch".into());
    writeln!(out, "{}", header.join(","))?;
    for s in &data.samples {
        let mut row: Vec<String> = s.x.iter().map(|&v| format_f64(v)).collect();
        row.push(format_f64(s.y));
        row.push(match s.true_branch {
            Some(b) => b.to_string(),
            None => "NA".into(),
        });
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// Read CSV written by [`write_csv`] (or by hand, following the same header).
pub fn read_csv<R: BufRead>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    let d = cols.len().saturating_sub(2);
    let expected: Vec<String> = (1..=d)
        .map(|i| format!("x{i}"))
        .chain(["y".to_string(), "branch".to_string()])
        .collect();
    if d == 0 || cols != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must be x1,...,xd,y,branch; got {}", cols.join(",")),
        });
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {s:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line,
                    message: format!("non-finite value {s:?}"),
                })
            }
        };
        let x = (0..d).map(|i| parse(&record[i])).collect::<Result<Vec<_>>>()?;
        let y = parse(&record[d])?;
        let b = record[d + 1].trim();
        let true_branch = if b == "NA" {
            None
        } else {
            Some(b.parse::<u32>().map_err(|_| Error::Parse {
                line,
                message: format!("branch must be a non-negative integer or NA, got {b:?}"),
            })?)
        };
        samples.push(Sample { x, y, true_branch });
    }
    Dataset::new(samples, d)
}
