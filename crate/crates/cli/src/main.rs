use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use projens_cli::config::{validate, Diagnostic, DiagnosticKind, Experiment, ExperimentConfig, Num, PartialConfig};
use projens_cli::experiments;
use projens_cli::table::{recorded_version, CODE_VERSION};

/// Projected-ensemble experiments. Settings are layered as built-in defaults,
/// then the `--config` file, then command-line flags.
#[derive(Parser)]
#[command(name = "projens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Haar-averaged frame potentials against the closed forms
    Theorem1Verify(CommonArgs),
    /// Distance to a k-design versus initial-state entropy after a chaotic quench
    Fig1c(CommonArgs),
    /// Distance to a 2-design versus disorder strength
    DisorderScan(CommonArgs),
    /// Mean level-spacing ratio versus disorder strength
    GapRatio(CommonArgs),
    /// Loschmidt echo between two disorder realizations
    Echo(CommonArgs),
    /// Exact shadow-estimation bias versus entropy and bath size
    ShadowBias(CommonArgs),
    /// Finite-shot shadow error versus number of shots
    ShadowConvergence(CommonArgs),
    /// Energy of the Ising ground state estimated with patched shadows
    PatchedEnergy(CommonArgs),
    /// Schatten distances of explicit moment operators
    DesignCheck(CommonArgs),
}

impl Command {
    fn split(&self) -> (Experiment, &CommonArgs) {
        use Command::*;
        match self {
            Theorem1Verify(a) => (Experiment::Theorem1Verify, a),
            Fig1c(a) => (Experiment::Fig1c, a),
            DisorderScan(a) => (Experiment::DisorderScan, a),
            GapRatio(a) => (Experiment::GapRatio, a),
            Echo(a) => (Experiment::Echo, a),
            ShadowBias(a) => (Experiment::ShadowBias, a),
            ShadowConvergence(a) => (Experiment::ShadowConvergence, a),
            PatchedEnergy(a) => (Experiment::PatchedEnergy, a),
            DesignCheck(a) => (Experiment::DesignCheck, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, env = "PROJENS_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sc: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    w: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    jt: Option<f64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Chain lengths for gap-ratio and echo
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Option<Vec<usize>>,
    /// Bath sizes for shadow-bias
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    nb_values: Option<Vec<usize>>,
    /// Evolution times for echo
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    times: Option<Vec<f64>>,
    /// Exit with code 4 when the experiment's acceptance conditions fail
    #[arg(long)]
    check: bool,
}

impl CommonArgs {
    fn overrides(&self) -> PartialConfig {
        let nums = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v.iter().map(|&x| Num::from(x)).collect());
        PartialConfig {
            seed: self.seed,
            n_a: self.na,
            n_b: self.nb,
            k_values: self.k.clone(),
            s_c_values: nums(&self.sc),
            w_values: nums(&self.w),
            sizes: self.sizes.clone(),
            nb_values: self.nb_values.clone(),
            times: nums(&self.times),
            jt: self.jt.map(Num::from),
            shots: self.shots,
            realizations: self.realizations,
            out_path: self.out.as_ref().map(|p| p.display().to_string()),
            ..PartialConfig::default()
        }
    }
}

fn fail(diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{d}");
    }
    if diags.iter().any(|d| d.kind == DiagnosticKind::Invalid) {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn invalid(field: &'static str, message: String) -> ExitCode {
    fail(&[Diagnostic { kind: DiagnosticKind::Invalid, field, message }])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, args) = cli.command.split();

    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(path) = &args.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return invalid("config", format!("cannot read {}: {e}", path.display())),
        };
        let file = match PartialConfig::from_toml(&text) {
            Ok(p) => p,
            Err(e) => return invalid("config", e),
        };
        if let Some(e) = file.experiment.filter(|&e| e != experiment) {
            return invalid("experiment", format!("config file is for {e}, subcommand is {experiment}"));
        }
        cfg.apply(&file);
    }
    cfg.apply(&args.overrides());

    let diags = validate(&cfg);
    if !diags.is_empty() {
        return fail(&diags);
    }

    if let Some(n) = args.workers {
        if n == 0 {
            return invalid("workers", "workers must be positive".into());
        }
        // Only fails when a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let table = match experiments::run(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error reason=\"{e}\"");
            return ExitCode::from(1);
        }
    };

    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let csv = table.to_csv_string(&cfg, Some(ts));
    match &args.out {
        Some(path) => {
            if let Ok(old) = std::fs::read_to_string(path) {
                if let Some(v) = recorded_version(&old).filter(|&v| v != CODE_VERSION) {
                    eprintln!("warning: {} was written by code version {v}, now {CODE_VERSION}", path.display());
                }
            }
            if let Err(e) = std::fs::write(path, &csv) {
                eprintln!("error reason=\"cannot write {}: {e}\"", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{csv}"),
    }

    if args.check {
        let fails = experiments::check(&cfg, &table);
        for f in &fails {
            eprintln!("check failed: {f}");
        }
        if !fails.is_empty() {
            return ExitCode::from(4);
        }
    }
    ExitCode::SUCCESS
}
