//! Argument parsing and command implementations for the `genpauli` binary.
//!
//! Commands return their stdout text and write files only under `--out`.
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical or
//! rate-expression failure. Verdicts never affect the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genpauli::channel::{channel_from_eigenvalues, channel_from_probabilities, choi_matrix};
use genpauli::dynamics::{analyze, build_trajectory_in, AnalysisConfig, WitnessConfig, DEFAULT_STEPS};
use genpauli::mub::{is_prime, mub_family};
use genpauli::ratefn::presets::PRESET_NAMES;
use genpauli::ratefn::{Preset, RateSet, DEFAULT_QUAD_TOL};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "genpauli", version, about = "Generalized Pauli channels, their dynamics and Markovianity checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the d+1 mutually unbiased bases for prime d and verify them.
    Mub(MubArgs),
    /// Convert between probabilities and eigenvalues and test complete positivity.
    Channel(ChannelArgs),
    /// Integrate a rate set and run every divisibility check.
    Dynamics(DynamicsArgs),
    /// Named rate sets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Debug, Args)]
pub struct MubArgs {
    /// Dimension (prime).
    #[arg(long)]
    pub d: usize,
    /// Write mub_d<d>.json and mub_d<d>_overlaps.csv into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stdout format: the family as JSON, or the cross-basis overlap table as CSV.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["lambdas", "probs"])))]
pub struct ChannelArgs {
    /// Dimension (prime).
    #[arg(long)]
    pub d: usize,
    /// Eigenvalues λ_1..λ_{d+1}, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambdas: Option<Vec<f64>>,
    /// Probabilities p_0..p_{d+1}, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub probs: Option<Vec<f64>>,
    /// Write channel.<format> into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("rates").required(true).args(["preset", "gamma"])))]
pub struct DynamicsArgs {
    /// Preset name (see `presets list`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Rate expression in `t`; repeat once per rate, d+1 times in total.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Vec<String>,
    /// Constant rates for the `semigroup` preset, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub constants: Vec<f64>,
    /// Dimension. Defaults to 3 for d-dependent presets and to the number of
    /// `--gamma` values minus one.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    /// Seed for every sampled check.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Absolute quadrature tolerance over the whole window.
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub tol: f64,
    /// Random pure states tried by the positivity witness search.
    #[arg(long, default_value_t = 2000)]
    pub attempts: usize,
    /// Refinement iterations for the best witness candidates.
    #[arg(long, default_value_t = 50)]
    pub refine: usize,
    /// Random state pairs for the trace-distance check.
    #[arg(long, default_value_t = 200)]
    pub blp_pairs: usize,
    /// Random Hermitian probes for the Frobenius check.
    #[arg(long, default_value_t = 20)]
    pub frobenius_samples: usize,
    /// Write trajectory.csv and report.json into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stdout format: the report as JSON or the trajectory as CSV.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum PresetsAction {
    /// List the available presets.
    List {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] genpauli::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use genpauli::Error as E;
        match self {
            CliError::Core(E::Parse(_) | E::Eval(_) | E::Quadrature { .. } | E::Numerical(_)) => 3,
            CliError::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn require_prime(d: usize) -> CliResult<()> {
    if d < 2 || !is_prime(d) {
        return Err(CliError::Usage(format!(
            "d = {d} is not supported: only prime dimensions have a MUB construction here"
        )));
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Mub(a) => cmd_mub(a),
        Command::Channel(a) => cmd_channel(a),
        Command::Dynamics(a) => cmd_dynamics(a),
        Command::Presets {
            action: PresetsAction::List { format },
        } => Ok(cmd_presets(*format)),
    }
}

#[derive(Serialize)]
struct MubOutput {
    family: genpauli::mub::MubFamilyJson,
    max_deviation: f64,
    cross_overlaps: Vec<OverlapRow>,
}

#[derive(Serialize)]
struct OverlapRow {
    alpha: usize,
    k: usize,
    beta: usize,
    l: usize,
    overlap: f64,
}

pub fn cmd_mub(a: &MubArgs) -> CliResult<String> {
    require_prime(a.d)?;
    let fam = mub_family(a.d)?;
    let rows: Vec<OverlapRow> = fam
        .cross_overlaps()
        .into_iter()
        .map(|(alpha, k, beta, l, overlap)| OverlapRow {
            alpha,
            k,
            beta,
            l,
            overlap,
        })
        .collect();
    let mut csv = String::from("alpha,k,beta,l,overlap\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{}", r.alpha, r.k, r.beta, r.l, fmt_f64(r.overlap));
    }
    let json = pretty(&MubOutput {
        family: fam.to_json(),
        max_deviation: fam.max_overlap_deviation(),
        cross_overlaps: rows,
    });
    if let Some(dir) = &a.out {
        let j = write_file(dir, &format!("mub_d{}.json", a.d), &json)?;
        let c = write_file(dir, &format!("mub_d{}_overlaps.csv", a.d), &csv)?;
        return Ok(format!("wrote {}\nwrote {}\n", j.display(), c.display()));
    }
    Ok(match a.format {
        Format::Json => json,
        Format::Csv => csv,
    })
}

#[derive(Serialize)]
struct ChannelOutput {
    dim: usize,
    probabilities: Vec<f64>,
    eigenvalues: Vec<f64>,
    cp: genpauli::CpVerdict,
    choi_min_eigenvalue: f64,
    choi_positive: bool,
}

pub fn cmd_channel(a: &ChannelArgs) -> CliResult<String> {
    require_prime(a.d)?;
    let fam = Arc::new(mub_family(a.d)?);
    let ch = match (&a.lambdas, &a.probs) {
        (Some(l), None) => channel_from_eigenvalues(&fam, l)?,
        (None, Some(p)) => channel_from_probabilities(&fam, p)?,
        _ => return Err(CliError::Usage("give exactly one of --lambdas or --probs".into())),
    };
    let choi = choi_matrix(&ch);
    let out = ChannelOutput {
        dim: a.d,
        probabilities: ch.probabilities().to_vec(),
        eigenvalues: ch.eigenvalues().to_vec(),
        cp: ch.cp(),
        choi_min_eigenvalue: choi.min_eigenvalue(),
        choi_positive: choi.is_positive(),
    };
    let (text, name) = match a.format {
        Format::Json => (pretty(&out), "channel.json"),
        Format::Csv => {
            let mut s = String::from("quantity,index,value\n");
            for (i, p) in out.probabilities.iter().enumerate() {
                let _ = writeln!(s, "p,{i},{}", fmt_f64(*p));
            }
            for (i, l) in out.eigenvalues.iter().enumerate() {
                let _ = writeln!(s, "lambda,{},{}", i + 1, fmt_f64(*l));
            }
            let _ = writeln!(s, "cp,,{}", out.cp.is_cp);
            let _ = writeln!(s, "cp_margin,,{}", fmt_f64(out.cp.margin));
            let _ = writeln!(s, "cp_lower_margin,,{}", fmt_f64(out.cp.lower_margin));
            let _ = writeln!(s, "cp_upper_margin,,{}", fmt_f64(out.cp.upper_margin));
            let _ = writeln!(s, "choi_min_eigenvalue,,{}", fmt_f64(out.choi_min_eigenvalue));
            let _ = writeln!(s, "choi_positive,,{}", out.choi_positive);
            (s, "channel.csv")
        }
    };
    if let Some(dir) = &a.out {
        let p = write_file(dir, name, &text)?;
        return Ok(format!("wrote {}\n", p.display()));
    }
    Ok(text)
}

/// Resolves the rate source of a `dynamics` invocation.
pub fn resolve_rates(a: &DynamicsArgs) -> CliResult<RateSet> {
    let rates = match (&a.preset, a.gamma.is_empty()) {
        (Some(name), true) => {
            if !a.constants.is_empty() && name != "semigroup" {
                return Err(CliError::Usage("--constants only applies to the semigroup preset".into()));
            }
            let preset = Preset::from_name(name, a.d, &a.constants).map_err(|e| CliError::Usage(e.to_string()))?;
            require_prime(preset.dim())?;
            preset.rate_set()?
        }
        (None, false) => {
            if !a.constants.is_empty() {
                return Err(CliError::Usage("--constants needs --preset semigroup".into()));
            }
            let n = a.gamma.len();
            if n < 3 {
                return Err(CliError::Usage(format!("need at least 3 --gamma values, got {n}")));
            }
            let d = a.d.unwrap_or(n - 1);
            if n != d + 1 {
                return Err(CliError::Usage(format!("d = {d} needs {} --gamma values, got {n}", d + 1)));
            }
            require_prime(d)?;
            RateSet::parse(d, &a.gamma)?
        }
        _ => return Err(CliError::Usage("give either --preset or --gamma, not both".into())),
    };
    Ok(rates)
}

fn validate_dynamics(a: &DynamicsArgs) -> CliResult<()> {
    if !(a.t_max.is_finite() && a.t_max > 0.0) {
        return Err(CliError::Usage(format!("--t-max must be positive, got {}", a.t_max)));
    }
    if a.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    Ok(())
}

pub fn cmd_dynamics(a: &DynamicsArgs) -> CliResult<String> {
    validate_dynamics(a)?;
    let rates = resolve_rates(a)?;
    let fam = Arc::new(mub_family(rates.dim())?);
    let traj = build_trajectory_in(&fam, &rates, a.t_max, a.steps, a.tol)?;
    let config = AnalysisConfig {
        witness: WitnessConfig {
            attempts: a.attempts,
            refine_iters: a.refine,
            seed: a.seed,
            ..WitnessConfig::default()
        },
        blp_pairs: a.blp_pairs,
        frobenius_samples: a.frobenius_samples,
    };
    let report = analyze(&traj, &config);
    let mut json = report.to_json();
    json.push('\n');
    let csv = traj.to_csv();
    if let Some(dir) = &a.out {
        let c = write_file(dir, "trajectory.csv", &csv)?;
        let j = write_file(dir, "report.json", &json)?;
        return Ok(format!("wrote {}\nwrote {}\n{}", c.display(), j.display(), report.summary()));
    }
    Ok(match a.format {
        Format::Json => json,
        Format::Csv => csv,
    })
}

#[derive(Serialize)]
struct PresetInfo {
    name: &'static str,
    dims: &'static str,
    rates: &'static str,
}

const PRESET_INFO: [PresetInfo; 4] = [
    PresetInfo {
        name: "eternal-qubit",
        dims: "2",
        rates: "1, 1, -tanh(t)",
    },
    PresetInfo {
        name: "eternal-general",
        dims: "prime d, default 3",
        rates: "1 + ((d-2)/d)tanh(t) twice, then -(2/d)tanh(t) d-1 times",
    },
    PresetInfo {
        name: "avg-decoherence",
        dims: "prime d, default 3",
        rates: "1 d times, then -(d-1)(exp(dt)-1)/(exp(dt)+d-1)",
    },
    PresetInfo {
        name: "semigroup",
        dims: "number of --constants minus one",
        rates: "the given --constants",
    },
];

pub fn cmd_presets(format: Format) -> String {
    debug_assert!(PRESET_INFO.iter().map(|p| p.name).eq(PRESET_NAMES));
    match format {
        Format::Json => pretty(&PRESET_INFO),
        Format::Csv => {
            let mut s = String::from("name,dims,rates\n");
            for p in &PRESET_INFO {
                let _ = writeln!(s, "{},\"{}\",\"{}\"", p.name, p.dims, p.rates);
            }
            s
        }
    }
}
