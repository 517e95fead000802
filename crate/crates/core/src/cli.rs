//! The `branchfinder` command line: configuration handling and the six
//! subcommands, each writing its artifacts under `output_dir`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::extraction::{
    assign_samples, choose_beta, extract_branches, BetaRule, ExtractionConfig, ExtractionResult,
    ExtractionSettings,
};
use crate::loss::{LossFunction, LossKind};
use crate::metrics::{
    adherence, axis_excluded_grid_2d, betweenness, branch_accuracy, open_grid_1d,
    oscillation_index, Predictor,
};
use crate::network::{init_model, train, NetworkConfig, NetworkModel, TrainConfig};
use crate::synthdata::{
    format_f64, generate, read_csv, train_test_split, write_csv, Dataset, MixSpec, Problem,
};

/// Environment variable that replaces every seed in the configuration.
pub const SEED_ENV: &str = "BRANCHFINDER_SEED";

/// Half-width of the 1D evaluation interval around the origin.
pub const GRID_1D_HALF_WIDTH: f64 = 3.8;
pub const GRID_1D_POINTS: usize = 761;
/// Points per axis of the 2D evaluation grid, before the axis band is removed.
pub const GRID_2D_POINTS: usize = 61;
pub const AXIS_BAND_2D: f64 = 0.1;

/// Scalar top-level keys accepted as `--key value`; sections need a dotted path.
const TOP_LEVEL_KEYS: [&str; 5] = ["problem", "train_fraction", "split_seed", "output_dir", "emit_plot_data"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: Problem,
    pub mix: MixSpec,
    pub network: NetworkConfig,
    pub training: TrainConfig,
    pub extraction: ExtractionSettings,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub output_dir: PathBuf,
    pub emit_plot_data: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: Problem::OneD,
            mix: MixSpec::default(),
            network: NetworkConfig::default(),
            training: TrainConfig::default(),
            extraction: ExtractionSettings::default(),
            train_fraction: 0.8,
            split_seed: 7,
            output_dir: PathBuf::from("out"),
            emit_plot_data: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.mix.validate()?;
        self.network.validate()?;
        self.training.validate()?;
        self.extraction.validate()?;
        if self.network.input_dim != self.problem.input_dim() {
            return Err(Error::config(
                "network.input_dim",
                format!(
                    "must be {} for problem {}",
                    self.problem.input_dim(),
                    problem_name(self.problem)
                ),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie in (0, 1)"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn extraction_config(&self) -> ExtractionConfig {
        ExtractionConfig {
            network: self.network.clone(),
            train: self.training.clone(),
            settings: self.extraction.clone(),
        }
    }

    fn set_all_seeds(&mut self, seed: u64) {
        self.mix.seed = seed;
        self.network.seed = seed;
        self.training.seed = seed;
        self.split_seed = seed;
    }

    /// Build the effective config: defaults, then the file, then dotted
    /// overrides, then the seed environment variable.
    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, String)],
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let mut value = serde_json::to_value(RunConfig::default())?;
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let file: Value = serde_json::from_str(&text)?;
            merge(&mut value, file, "")?;
        }
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let mut config: RunConfig = serde_json::from_value(value)
            .map_err(|e| Error::config("config", e.to_string()))?;
        if let Some(raw) = env_seed {
            let seed = raw
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::config(SEED_ENV, format!("not an unsigned integer: {raw:?}")))?;
            config.set_all_seeds(seed);
        }
        config.validate()?;
        Ok(config)
    }
}

/// Object keys that come and go with the variant of a tagged enum.
fn is_open_object(map: &Map<String, Value>) -> bool {
    map.contains_key("kind")
}

fn merge(base: &mut Value, patch: Value, path: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            let open = is_open_object(base);
            for (key, v) in patch {
                let child = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, v, &child)?,
                    None if open => {
                        base.insert(key, v);
                    }
                    None => return Err(Error::config(child, "unknown key")),
                }
            }
            Ok(())
        }
        (slot, patch) => {
            *slot = patch;
            Ok(())
        }
    }
}

fn parse_override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let mut patch = parse_override_value(raw);
    for part in key.rsplit('.') {
        if part.is_empty() {
            return Err(Error::config(key, "empty path segment"));
        }
        let mut map = Map::new();
        map.insert(part.to_string(), patch);
        patch = Value::Object(map);
    }
    merge(root, patch, "")
}

fn problem_name(problem: Problem) -> &'static str {
    match problem {
        Problem::OneD => "1d",
        Problem::TwoD => "2d",
    }
}

#[derive(Debug, Parser)]
#[command(name = "branchfinder", version, about = "Find the branches of multi-valued sample data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config entry, `path.to.key=value` (also spelled `--path.to.key value`).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LossChoice {
    Mse,
    Mae,
    Huber,
    Logcosh,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset and write train.csv, test.csv and gen_meta.json.
    Gen(Common),
    /// Train one network on a CSV dataset.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training CSV.
        #[arg(long)]
        data: PathBuf,
        /// Test CSV; defaults to test.csv beside the training file.
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long, value_enum)]
        loss: Option<LossChoice>,
        #[arg(long)]
        huber_delta: Option<f64>,
    },
    /// Run branch extraction on a CSV dataset.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
    },
    /// Score an extraction against the labels of a CSV dataset.
    Eval {
        #[command(flatten)]
        common: Common,
        /// extraction.json written by `extract`.
        #[arg(long)]
        extraction: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Train MSE, MAE and logcosh networks on one dataset and compare them.
    CompareLosses(Common),
    /// Print the effective configuration as JSON.
    PrintConfig(Common),
}

/// Rewrite `--a.b value` and scalar `--key value` config flags into `--set a.b=value`.
fn rewrite_overrides(args: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut iter = args.into_iter();
    if let Some(program) = iter.next() {
        out.push(program);
    }
    while let Some(arg) = iter.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            out.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        let is_config_path = key.contains('.') || TOP_LEVEL_KEYS.contains(&key.as_str());
        if !is_config_path {
            out.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => iter.next().unwrap_or_default(),
        };
        out.push("--set".into());
        out.push(format!("{key}={value}"));
    }
    out
}

fn parse_sets(sets: &[String]) -> Result<Vec<(String, String)>> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Usage(format!("override {s:?} is not KEY=VALUE")))
        })
        .collect()
}

fn load_config(common: &Common, env_seed: Option<&str>) -> Result<RunConfig> {
    RunConfig::load(common.config.as_deref(), &parse_sets(&common.set)?, env_seed)
}

/// Parse `args` (program name first) and run the selected command.
///
/// `env_seed` is the value of [`SEED_ENV`], if set. Help and version text go
/// to `stdout`.
pub fn run(args: Vec<String>, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let cli = match Cli::try_parse_from(rewrite_overrides(args)) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return write!(stdout, "{e}").map_err(stdout_error);
        }
        Err(e) => return Err(Error::Usage(e.to_string())),
    };
    match cli.command {
        Command::Gen(common) => cmd_gen(&load_config(&common, env_seed)?, stdout),
        Command::Train {
            common,
            data,
            test,
            loss,
            huber_delta,
        } => {
            let mut config = load_config(&common, env_seed)?;
            if let Some(choice) = loss {
                config.training.loss.function = loss_function(choice, huber_delta)?;
            } else if let Some(delta) = huber_delta {
                match &mut config.training.loss.function {
                    LossFunction::Huber { delta: d } => *d = delta,
                    _ => return Err(Error::Usage("--huber-delta needs a huber loss".into())),
                }
                config.training.validate()?;
            }
            cmd_train(&config, &data, test.as_deref(), stdout)
        }
        Command::Extract { common, data } => cmd_extract(&load_config(&common, env_seed)?, &data, stdout),
        Command::Eval {
            common,
            extraction,
            data,
        } => cmd_eval(&load_config(&common, env_seed)?, &extraction, &data, stdout),
        Command::CompareLosses(common) => cmd_compare_losses(&load_config(&common, env_seed)?, stdout),
        Command::PrintConfig(common) => {
            let config = load_config(&common, env_seed)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&config)?).map_err(stdout_error)
        }
    }
}

fn loss_function(choice: LossChoice, huber_delta: Option<f64>) -> Result<LossFunction> {
    if huber_delta.is_some() && !matches!(choice, LossChoice::Huber) {
        return Err(Error::Usage("--huber-delta needs --loss huber".into()));
    }
    let f = match choice {
        LossChoice::Mse => LossFunction::Mse,
        LossChoice::Mae => LossFunction::Mae,
        LossChoice::Logcosh => LossFunction::LogCosh,
        LossChoice::Huber => LossFunction::Huber {
            delta: huber_delta.unwrap_or(1.0),
        },
    };
    LossKind::new(f.clone()).validate().map_err(|e| Error::config("huber_delta", e.to_string()))?;
    Ok(f)
}

fn stdout_error(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, |out| writeln!(out, "{text}"))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file))
}

fn check_dim(config: &RunConfig, data: &Dataset, path: &Path) -> Result<()> {
    if data.input_dim() != config.problem.input_dim() {
        return Err(Error::InvalidInput(format!(
            "{}: {} input columns but problem {} has {}",
            path.display(),
            data.input_dim(),
            problem_name(config.problem),
            config.problem.input_dim()
        )));
    }
    Ok(())
}

/// Loss with its residual scale resolved from `rule` on the training data.
pub fn resolve_loss(function: LossFunction, rule: BetaRule, data: &Dataset) -> Result<LossKind> {
    let beta = match rule {
        BetaRule::Automatic => choose_beta(data)?,
        BetaRule::Fixed(b) => b,
    };
    let kind = LossKind::new(function).with_beta(beta);
    kind.validate()?;
    Ok(kind)
}

/// Evaluation grid for a problem: the shrunk multi-valued interval in 1D,
/// the axis-excluded square in 2D.
pub fn evaluation_grid(problem: Problem) -> Vec<Vec<f64>> {
    match problem {
        Problem::OneD => open_grid_1d(-GRID_1D_HALF_WIDTH, GRID_1D_HALF_WIDTH, GRID_1D_POINTS),
        Problem::TwoD => {
            let (lo, hi) = problem.domain();
            axis_excluded_grid_2d(lo, hi, GRID_2D_POINTS, AXIS_BAND_2D)
        }
    }
}

/// Whether `x` lies in the region the evaluation grid covers.
pub fn in_evaluation_region(problem: Problem, x: &[f64]) -> bool {
    match problem {
        Problem::OneD => x[0].abs() < GRID_1D_HALF_WIDTH,
        Problem::TwoD => x.iter().all(|v| v.abs() > AXIS_BAND_2D),
    }
}

fn region_name(problem: Problem) -> String {
    match problem {
        Problem::OneD => format!("1d open interval (-{h}, {h}), {GRID_1D_POINTS} points", h = GRID_1D_HALF_WIDTH),
        Problem::TwoD => format!(
            "2d {n}x{n} grid over the domain, |x|,|y| > {AXIS_BAND_2D}",
            n = GRID_2D_POINTS
        ),
    }
}

/// Noiseless target range of the problem over its evaluation grid.
fn grid_target_range(problem: Problem, grid: &[Vec<f64>]) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in grid {
        for b in [1, 2] {
            let y = problem.eval(b, x)?;
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    Ok(hi - lo)
}

/// Behavioral scores of one model against the two true branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorScores {
    pub majority_branch: u32,
    pub adherence: crate::metrics::AdherenceReport,
    pub betweenness: f64,
    /// Only defined on the ordered 1D grid.
    pub oscillation_index: Option<f64>,
}

pub fn behavior_scores(model: &dyn Predictor, problem: Problem, majority_branch: u32) -> Result<BehaviorScores> {
    let grid = evaluation_grid(problem);
    let (phi1, phi2) = (problem.branch(1), problem.branch(2));
    let (maj, min) = if majority_branch == 1 { (&phi1, &phi2) } else { (&phi2, &phi1) };
    let range = grid_target_range(problem, &grid)?;
    Ok(BehaviorScores {
        majority_branch,
        adherence: adherence(model, maj, min, &grid, &region_name(problem))?,
        betweenness: betweenness(model, &phi1, &phi2, &grid, range)?,
        oscillation_index: match problem {
            Problem::OneD => Some(oscillation_index(model, &phi1, &phi2, &grid)?),
            Problem::TwoD => None,
        },
    })
}

fn format_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_f64)
}

pub fn cmd_gen(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let data = generate(config.problem, &config.mix)?;
    let (train_set, test_set) = train_test_split(&data, config.train_fraction, config.split_seed)?;
    write_file(&dir.join("train.csv"), |out| write_csv(&train_set, out))?;
    write_file(&dir.join("test.csv"), |out| write_csv(&test_set, out))?;
    let meta = json!({
        "config": config,
        "seeds": {
            "mix": config.mix.seed,
            "split": config.split_seed,
            "network": config.network.seed,
            "training": config.training.seed,
        },
        "n_samples": data.len(),
        "n_train": train_set.len(),
        "n_test": test_set.len(),
        "target_range": data.target_range(),
    });
    write_json(&dir.join("gen_meta.json"), &meta)?;
    writeln!(stdout, "n_train={} n_test={}", train_set.len(), test_set.len()).map_err(stdout_error)
}

pub fn cmd_train(config: &RunConfig, data_path: &Path, test_path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let train_set = read_dataset(data_path)?;
    check_dim(config, &train_set, data_path)?;
    let default_test = data_path.with_file_name("test.csv");
    let test_path = match test_path {
        Some(p) => Some(p.to_path_buf()),
        None if default_test.is_file() && default_test != data_path => Some(default_test),
        None => None,
    };
    let test_set = test_path.as_deref().map(read_dataset).transpose()?;
    if let (Some(t), Some(p)) = (&test_set, &test_path) {
        check_dim(config, t, p)?;
    }

    let mut training = config.training.clone();
    training.loss = resolve_loss(training.loss.function.clone(), config.extraction.beta_rule, &train_set)?;
    let model = init_model(&config.network)?;
    let (model, report) = train(&model, &train_set, test_set.as_ref(), &training)?;

    let dir = &config.output_dir;
    ensure_dir(dir)?;
    write_file(&dir.join("model.json"), |out| writeln!(out, "{}", model.to_json()))?;
    let doc = json!({
        "loss": training.loss,
        "train_data": data_path,
        "test_data": test_path,
        "report": report,
    });
    write_json(&dir.join("train_report.json"), &doc)?;
    writeln!(
        stdout,
        "final_train_loss={} final_test_loss={}",
        format_f64(report.final_train_loss),
        format_opt(report.final_validation_loss)
    )
    .map_err(stdout_error)
}

pub fn cmd_extract(config: &RunConfig, data_path: &Path, stdout: &mut dyn Write) -> Result<()> {
    let data = read_dataset(data_path)?;
    check_dim(config, &data, data_path)?;
    let result = extract_branches(&data, &config.extraction_config())?;
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    write_file(&dir.join("extraction.json"), |out| writeln!(out, "{}", result.to_json()))?;
    write_file(&dir.join("assignments.csv"), |out| result.write_assignments_csv(out))?;
    for b in &result.branches {
        let path = dir.join(format!("branch_{}_model.json", b.index));
        write_file(&path, |out| writeln!(out, "{}", b.model.to_json()))?;
    }
    writeln!(
        stdout,
        "branches={} assigned={} ambiguous={} unassigned={}",
        result.branches.len(),
        result.n_assigned(),
        result.n_ambiguous(),
        result.n_unassigned()
    )
    .map_err(stdout_error)
}

pub fn cmd_eval(config: &RunConfig, extraction_path: &Path, data_path: &Path, stdout: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(extraction_path).map_err(|e| Error::io(extraction_path, e))?;
    let stored = ExtractionResult::from_json(&text)?;
    let data = read_dataset(data_path)?;
    check_dim(config, &data, data_path)?;
    let truth: Vec<Option<u32>> = data.samples().iter().map(|s| s.true_branch).collect();
    if let Some(i) = truth.iter().position(Option::is_none) {
        return Err(Error::InvalidInput(format!(
            "{}: sample {i} has no true branch label, accuracy needs labels",
            data_path.display()
        )));
    }
    let result = ExtractionResult {
        assignments: assign_samples(&stored.branches, &data)?,
        leftover_indices: Vec::new(),
        branches: stored.branches,
    };
    let mask: Vec<bool> = data
        .samples()
        .iter()
        .map(|s| in_evaluation_region(config.problem, &s.x))
        .collect();
    let confusion = branch_accuracy(&result, &truth, &mask)?;

    let n1 = truth.iter().filter(|t| **t == Some(1)).count();
    let majority = if 2 * n1 >= truth.len() { 1 } else { 2 };
    let behavior = match result.branches.first() {
        Some(b) => Some(behavior_scores(&b.model, config.problem, majority)?),
        None => None,
    };

    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let doc = json!({
        "extraction": extraction_path,
        "data": data_path,
        "n_branches": result.branches.len(),
        "dominant_branch": behavior,
        "confusion": confusion,
    });
    write_json(&dir.join("metrics.json"), &doc)?;
    write_file(&dir.join("metrics.csv"), |out| {
        writeln!(
            out,
            "accuracy,n_branches,n_evaluated,n_ambiguous,n_unassigned,adherence_fraction,betweenness,oscillation_index"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_f64(confusion.accuracy),
            result.branches.len(),
            confusion.n_evaluated,
            confusion.n_ambiguous,
            confusion.n_unassigned,
            format_opt(behavior.as_ref().map(|b| b.adherence.fraction_closer_to_majority)),
            format_opt(behavior.as_ref().map(|b| b.betweenness)),
            format_opt(behavior.as_ref().and_then(|b| b.oscillation_index)),
        )
    })?;
    writeln!(stdout, "accuracy={}", format_f64(confusion.accuracy)).map_err(stdout_error)
}

/// Losses trained by `compare-losses`, in table order.
pub const COMPARED_LOSSES: [LossFunction; 3] = [LossFunction::Mse, LossFunction::Mae, LossFunction::LogCosh];

pub fn cmd_compare_losses(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let data = generate(config.problem, &config.mix)?;
    let (train_set, _) = train_test_split(&data, config.train_fraction, config.split_seed)?;
    let majority = if config.mix.fraction_branch1 >= 0.5 { 1 } else { 2 };
    let dir = &config.output_dir;
    ensure_dir(dir)?;

    let mut rows = Vec::new();
    for function in COMPARED_LOSSES {
        let mut training = config.training.clone();
        training.loss = resolve_loss(function.clone(), config.extraction.beta_rule, &train_set)?;
        let (model, _) = train(&init_model(&config.network)?, &train_set, None, &training)?;
        let scores = behavior_scores(&model, config.problem, majority)?;
        if config.emit_plot_data {
            write_curve(dir, config.problem, function.name(), &model)?;
        }
        rows.push((function.name(), scores));
    }

    write_file(&dir.join("loss_comparison.csv"), |out| {
        writeln!(out, "loss,adherence_fraction,betweenness,oscillation_index")?;
        for (name, s) in &rows {
            writeln!(
                out,
                "{name},{},{},{}",
                format_f64(s.adherence.fraction_closer_to_majority),
                format_f64(s.betweenness),
                format_opt(s.oscillation_index)
            )?;
        }
        Ok(())
    })?;
    for (name, s) in &rows {
        writeln!(
            stdout,
            "loss={name} adherence_fraction={} betweenness={} oscillation_index={}",
            format_f64(s.adherence.fraction_closer_to_majority),
            format_f64(s.betweenness),
            format_opt(s.oscillation_index)
        )
        .map_err(stdout_error)?;
    }
    Ok(())
}

fn write_curve(dir: &Path, problem: Problem, name: &str, model: &NetworkModel) -> Result<()> {
    let grid = evaluation_grid(problem);
    let xs: Vec<&[f64]> = grid.iter().map(|x| x.as_slice()).collect();
    let pred = model.predict(&xs)?;
    let phi: Vec<(f64, f64)> = grid
        .iter()
        .map(|x| Ok((problem.eval(1, x)?, problem.eval(2, x)?)))
        .collect::<Result<_>>()?;
    write_file(&dir.join(format!("curve_{name}.csv")), |out| {
        let xcols: Vec<String> = (1..=problem.input_dim()).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},y_pred,phi1,phi2", xcols.join(","))?;
        for ((x, p), (a, b)) in grid.iter().zip(&pred).zip(&phi) {
            let xs: Vec<String> = x.iter().map(|v| format_f64(*v)).collect();
            writeln!(out, "{},{},{},{}", xs.join(","), format_f64(*p), format_f64(*a), format_f64(*b))?;
        }
        Ok(())
    })
}
