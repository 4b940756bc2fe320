use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ensemble_info::combiners::{weighted_vote, FeatureEncoding, StackingConfig, DEFAULT_C_GRID};
use ensemble_info::metrics::concentration;
use ensemble_info::study::{compare_systems, BoundKind, Study, SystemPoint};
use ensemble_info::synth::{scaling_sweep, synth_system, toy_table, SynthConfig, ToyVariant};
use ensemble_info::{analyze, BoundConfig, CombinerSpec, EstimationMode, PredictionTable};

use crate::io::{read_raw, read_table, write_table};
use crate::report::{sha256_hex, ConcentrationValue, P0Source, ReportDocument, ReportSummary, SCHEMA_VERSION};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations: exit 1.
    Usage(String),
    /// Unreadable or invalid data: exit 2.
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<ensemble_info::Error> for CliError {
    fn from(e: ensemble_info::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CmdResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "ensinfo", version, about = "Information-theoretic metrics and error bounds for classifier ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute metrics and bounds for a prediction table.
    Analyze(AnalyzeArgs),
    /// Fill or replace the `yhat` column using a combiner.
    Combine(CombineArgs),
    /// Write one of the four toy systems.
    Toy(ToyArgs),
    /// Write a synthetic ensemble.
    Synth(SynthArgs),
    /// Sweep the number of models and emit per-N curves.
    Scale(ScaleArgs),
    /// Reductions and Pearson coefficients of reports against a baseline.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mti,
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Subset size for `--mode mti`.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

impl ModeArgs {
    fn mode(&self) -> Result<EstimationMode, CliError> {
        let m = match self.mode {
            ModeArg::Exact => EstimationMode::Exact,
            ModeArg::Mti => EstimationMode::Mti(self.k),
        };
        m.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    /// Number of classes; defaults to 1 + max(y).
    #[arg(long)]
    pub classes: Option<u32>,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Anchor error rate of the tight bound.
    #[arg(long)]
    pub p0: Option<f64>,
    /// Report of the baseline system: supplies p0 and normalisation.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Subset sizes for the n-model concentration.
    #[arg(long, value_delimiter = ',')]
    pub concentration: Vec<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Vote,
    WeightedVote,
    AccuracyWeightedVote,
    Stacking,
}

#[derive(Debug, Clone, Args)]
pub struct CombinerArgs {
    #[arg(long, value_enum, default_value = "vote")]
    pub method: MethodArg,
    /// Per-model weights for `weighted-vote`.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub meta_folds: usize,
    #[arg(long, default_value_t = 5)]
    pub inner_folds: usize,
    /// Regularisation grid for stacking.
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Vec<f64>,
    /// Meta-feature encoding for stacking; defaults by class count.
    #[arg(long, value_enum)]
    pub encoding: Option<EncodingArg>,
    /// Fold-assignment seed for stacking.
    #[arg(long, default_value_t = 0)]
    pub stack_seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EncodingArg {
    Raw,
    OneHot,
}

impl CombinerArgs {
    fn spec(&self) -> Result<CombinerSpec, CliError> {
        Ok(match self.method {
            MethodArg::Vote => CombinerSpec::MajorityVote,
            MethodArg::AccuracyWeightedVote => CombinerSpec::AccuracyWeightedVote,
            MethodArg::WeightedVote => {
                if self.weights.is_empty() {
                    return Err(CliError::Usage("--method weighted-vote needs --weights".into()));
                }
                CombinerSpec::WeightedVote {
                    weights: self.weights.clone(),
                }
            }
            MethodArg::Stacking => CombinerSpec::Stacking(StackingConfig {
                meta_folds: self.meta_folds,
                inner_folds: self.inner_folds,
                c_grid: if self.c_grid.is_empty() {
                    DEFAULT_C_GRID.to_vec()
                } else {
                    self.c_grid.clone()
                },
                seed: self.stack_seed,
                encoding: self.encoding.map(|e| match e {
                    EncodingArg::Raw => FeatureEncoding::RawBinary,
                    EncodingArg::OneHot => FeatureEncoding::OneHot,
                }),
            }),
        })
    }
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub classes: Option<u32>,
    #[command(flatten)]
    pub combiner: CombinerArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = ensemble_info::synth::DEFAULT_REPETITIONS)]
    pub repetitions: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, default_value_t = 5000)]
    pub instances: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: u32,
    /// One error rate for every model.
    #[arg(long, default_value_t = 0.3, conflicts_with = "errors")]
    pub error: f64,
    /// Per-model error rates.
    #[arg(long, value_delimiter = ',')]
    pub errors: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub shared_noise: f64,
    /// Class prior; uniform by default.
    #[arg(long, value_delimiter = ',')]
    pub prior: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GeneratorArgs {
    fn config(&self, n_models: usize) -> Result<SynthConfig, CliError> {
        let mut cfg = SynthConfig::uniform(n_models, self.instances, self.classes, self.error, self.shared_noise, self.seed);
        if !self.errors.is_empty() {
            if self.errors.len() != n_models {
                return Err(CliError::Usage(format!(
                    "--errors has {} values for {n_models} models",
                    self.errors.len()
                )));
            }
            cfg.per_model_error = self.errors.clone();
        }
        if !self.prior.is_empty() {
            cfg.truth_prior = self.prior.clone();
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub models: usize,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 5, 10, 15, 20, 30])]
    pub n_values: Vec<usize>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub combiner: CombinerArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Defaults to the error rate of the first point.
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Report of the baseline system.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Reports of the compared systems.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Defaults to the baseline error rate.
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> CmdResult {
    match output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn table_csv(table: &PredictionTable) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_table(table, &mut buf)?;
    Ok(buf)
}

fn read_summary(path: &Path) -> Result<ReportSummary, CliError> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ReportSummary::parse(&text).with_context(|| format!("parsing report {}", path.display()))?)
}

fn warn_all(study: &Study) {
    for w in &study.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> CmdResult {
    let mode = args.mode.mode()?;
    let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let table = read_raw(bytes.as_slice())?.into_table(args.classes)?;
    let baseline = args.baseline.as_deref().map(read_summary).transpose()?;
    let (p0, source) = match (args.p0, &baseline, table.combined()) {
        (Some(p), _, _) => (p, P0Source::Flag),
        (None, Some(b), _) => (
            b.report.error_rate.ok_or_else(|| anyhow!("baseline report has no error rate"))?,
            P0Source::Baseline,
        ),
        (None, None, Some(_)) => (table.combined_error_rate()?, P0Source::Combined),
        (None, None, None) => {
            return Err(CliError::Usage("no yhat column and no --baseline: --p0 is required".into()));
        }
    };
    let cfg = BoundConfig::new(p0, table.ymax()).with_context(|| format!("p0 = {p0} from {source:?}; pass --p0"))?;
    let report = analyze(&table, mode, &cfg)?;
    let concentration = args
        .concentration
        .iter()
        .map(|&n| Ok(ConcentrationValue { n, value: concentration(&table, n)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let normalized = match baseline.as_ref().and_then(|b| b.report.ensemble_strength) {
        Some(e) => Some(report.normalized(e)?),
        None => None,
    };
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION,
        input_sha256: sha256_hex(&bytes),
        n_instances: table.n_instances(),
        p0_source: source,
        report,
        concentration,
        normalized,
    };
    emit(args.output.as_deref(), doc.to_json()?.as_bytes())
}

pub fn combine_cmd(args: &CombineArgs) -> CmdResult {
    let spec = args.combiner.spec()?;
    let table = read_table(&args.input, args.classes)?;
    // the library truncates weights to serve model prefixes; a file must match exactly
    let yhat = match &spec {
        CombinerSpec::WeightedVote { weights } => weighted_vote(&table, weights)?,
        _ => spec.combine(&table)?,
    };
    emit(args.output.as_deref(), &table_csv(&table.with_combined(yhat)?)?)
}

pub fn toy_cmd(args: &ToyArgs) -> CmdResult {
    let variant = match args.variant {
        VariantArg::A => ToyVariant::A,
        VariantArg::B => ToyVariant::B,
        VariantArg::C => ToyVariant::C,
        VariantArg::D => ToyVariant::D,
    };
    let fixture = toy_table(variant, args.repetitions).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(args.output.as_deref(), &table_csv(&fixture.table)?)
}

pub fn synth_cmd(args: &SynthArgs) -> CmdResult {
    let cfg = args.generator.config(args.models)?;
    emit(args.output.as_deref(), &table_csv(&synth_system(&cfg)?)?)
}

pub fn scale_cmd(args: &ScaleArgs) -> CmdResult {
    let spec = args.combiner.spec()?;
    let mode = args.mode.mode()?;
    let n_max = args.n_values.iter().copied().max().unwrap_or(0);
    let cfg = args.generator.config(n_max)?;
    let series = scaling_sweep(&cfg, &args.n_values, &spec, mode, args.p0)?;
    let points: Vec<SystemPoint> = series
        .points
        .iter()
        .map(|p| SystemPoint::from_report(format!("n{}", p.n_models), &p.report))
        .collect::<ensemble_info::Result<_>>()?;
    let study = compare_systems(&points[0], &points, Some(series.p0))?;
    warn_all(&study);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "error_rate",
        "error_rate_reduction",
        "loose_info_reduction",
        "tight_info_reduction",
        "tight_strength_reduction",
        "i_relev",
        "i_redun",
        "i_combloss",
        "information",
        "strength",
    ])
    .map_err(anyhow::Error::from)?;
    for (p, row) in series.points.iter().zip(&study.rows) {
        let r = &p.report;
        let fields = [
            row.error_rate,
            row.error_rate_reduction,
            row.loose_info,
            row.tight_info,
            row.tight_strength,
            r.i_relev,
            r.i_redun,
            r.i_combloss.unwrap_or(f64::NAN),
            r.ensemble_information,
            r.ensemble_strength.unwrap_or(f64::NAN),
        ];
        let mut rec = vec![p.n_models.to_string()];
        rec.extend(fields.iter().map(f64::to_string));
        w.write_record(&rec).map_err(anyhow::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    emit(args.output.as_deref(), &bytes)
}

pub fn correlate_cmd(args: &CorrelateArgs) -> CmdResult {
    let base = read_summary(&args.baseline)?.to_point(&args.baseline.display().to_string())?;
    let systems = args
        .reports
        .iter()
        .map(|p| read_summary(p)?.to_point(&p.display().to_string()).map_err(CliError::from))
        .collect::<Result<Vec<_>, CliError>>()?;
    let study = compare_systems(&base, &systems, args.p0)?;
    warn_all(&study);
    for k in BoundKind::ALL {
        if study.correlation(k).is_none() {
            eprintln!("warning: pearson for {} undefined", k.name());
        }
    }
    let mut s = serde_json::to_string_pretty(&study).map_err(anyhow::Error::from)?;
    s.push('\n');
    emit(args.output.as_deref(), s.as_bytes())
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Analyze(a) => analyze_cmd(a),
        Command::Combine(a) => combine_cmd(a),
        Command::Toy(a) => toy_cmd(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Scale(a) => scale_cmd(a),
        Command::Correlate(a) => correlate_cmd(a),
    }
}
