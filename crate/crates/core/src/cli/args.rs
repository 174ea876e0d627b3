use super::CliError;
use crate::design::NRange;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "procova", version, about = "Trial design with prognostic covariate adjustment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Sample sizes and powers for each endpoint in a design config.
    Design(DesignArgs),
    /// Variance-reduction table for one or more cohort CSVs.
    Evaluate(EvaluateArgs),
    /// Monte Carlo operating characteristics, optionally with blinded SSR.
    Simulate(SimulateArgs),
    /// Power-versus-n and power-versus-information-fraction curve data.
    Curves(CurvesArgs),
    /// Credibility report in JSON and Markdown.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct DesignArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethodArg {
    Correlation,
    Randomization,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct EvaluateArgs {
    /// Cohort CSV, optionally prefixed with an id: `ID=PATH`.
    #[arg(long = "cohort", required = true)]
    pub cohorts: Vec<CohortSpec>,
    /// Standard baseline covariates (names without the `baseline_` prefix).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, value_enum, default_value = "correlation")]
    pub method: EvalMethodArg,
    /// Pseudo-randomizations for the randomization method.
    #[arg(long, default_value_t = 1000)]
    pub rerandomizations: usize,
    /// Bootstrap replicates for a conservative VR percentile.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub percentile: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Overrides `replications` in the config.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct CurvesArgs {
    /// Design config; defaults to 1000 participants at 90% power unadjusted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.15")]
    pub vr: Vec<f64>,
    /// Total-n range `start:end:step`.
    #[arg(long, default_value = "500:1500:10")]
    pub n: NRange,
    /// Information-fraction range `start:end:step`.
    #[arg(long, default_value = "0.5:1:0.01")]
    pub fractions: FractionRange,
    #[arg(long = "design-power", value_delimiter = ',', default_value = "0.8,0.9")]
    pub design_powers: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Json,
    Markdown,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Evaluation tables in percent (`cohort_id,endpoint,timepoint,n,...`).
    #[arg(long = "evaluations")]
    pub evaluations: Vec<PathBuf>,
    /// Cohort CSVs evaluated by correlation and appended.
    #[arg(long = "cohort")]
    pub cohorts: Vec<CohortSpec>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,markdown")]
    pub format: Vec<FormatArg>,
    #[arg(long)]
    pub out: PathBuf,
}

/// `[ID=]PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortSpec {
    pub id: Option<String>,
    pub path: PathBuf,
}

impl CohortSpec {
    pub fn cohort_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        })
    }
}

impl FromStr for CohortSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once('=') {
            Some((id, path)) if !id.is_empty() && !path.is_empty() => {
                Ok(Self { id: Some(id.to_string()), path: path.into() })
            }
            Some(_) => Err(format!("expected ID=PATH, got '{s}'")),
            None if s.is_empty() => Err("empty cohort path".into()),
            None => Ok(Self { id: None, path: s.into() }),
        }
    }
}

fn split_range(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected start:end:step, got '{s}'"));
    };
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    Ok([p(a)?, p(b)?, p(c)?])
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let [a, b, c] = split_range(s)?;
        let int = |x: f64| {
            if x >= 0.0 && x.fract() == 0.0 { Ok(x as u64) } else { Err(format!("'{x}' is not a whole number")) }
        };
        let r = NRange { start: int(a)?, end: int(b)?, step: int(c)? };
        r.values().map_err(|e| e.to_string())?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl FractionRange {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        // Rounded to the step's decimals so 0.57 prints as 0.57.
        (0..=count).map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9).collect()
    }
}

impl FromStr for FractionRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let [start, end, step] = split_range(s)?;
        if !(start > 0.0 && end >= start && step > 0.0 && end.is_finite()) {
            return Err(format!("invalid fraction range '{s}'"));
        }
        Ok(Self { start, end, step })
    }
}

/// A parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
}

impl RunConfig {
    pub fn out_dir(&self) -> &std::path::Path {
        match &self.command {
            Command::Design(a) => &a.out,
            Command::Evaluate(a) => &a.out,
            Command::Simulate(a) => &a.out,
            Command::Curves(a) => &a.out,
            Command::Report(a) => &a.out,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.command {
            Command::Evaluate(a) => a.seed,
            Command::Simulate(a) => Some(a.seed),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Design(_) => "design",
            Command::Evaluate(_) => "evaluate",
            Command::Simulate(_) => "simulate",
            Command::Curves(_) => "curves",
            Command::Report(_) => "report",
        }
    }

    /// Files read by the command, in argument order.
    pub fn input_paths(&self) -> Vec<&std::path::Path> {
        match &self.command {
            Command::Design(a) => vec![&a.config],
            Command::Evaluate(a) => a.cohorts.iter().map(|c| c.path.as_path()).collect(),
            Command::Simulate(a) => vec![&a.config],
            Command::Curves(a) => a.config.iter().map(|p| p.as_path()).collect(),
            Command::Report(a) => std::iter::once(a.config.as_path())
                .chain(a.evaluations.iter().map(|p| p.as_path()))
                .chain(a.cohorts.iter().map(|c| c.path.as_path()))
                .collect(),
        }
    }
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;
    if let Command::Evaluate(a) = &cli.command {
        let stochastic = a.method == EvalMethodArg::Randomization || a.bootstrap.is_some();
        if stochastic && a.seed.is_none() {
            return Err(CliError::Usage(
                "error: --seed is required with --method randomization or --bootstrap".into(),
            ));
        }
    }
    if let Command::Report(a) = &cli.command {
        if a.evaluations.is_empty() && a.cohorts.is_empty() {
            return Err(CliError::Usage("error: report needs --evaluations or --cohort".into()));
        }
    }
    Ok(RunConfig { command: cli.command })
}
