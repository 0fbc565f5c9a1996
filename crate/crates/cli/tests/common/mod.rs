use std::path::Path;
use std::process::{Command, Output};

/// Small settings for every subcommand, quick enough for repeated runs.
pub const SMALL_RUNS: [(&str, &[&str]); 9] = [
    ("theorem1-verify", &["--na", "1", "--nb", "2", "--k", "1,2", "--sc", "0,1.5", "--realizations", "6"]),
    ("fig1c", &["--na", "1", "--nb", "3", "--k", "1,2", "--sc", "0,2,4", "--jt", "10"]),
    ("disorder-scan", &["--na", "1", "--nb", "2", "--k", "2", "--w", "0.1,1", "--realizations", "4", "--jt", "5"]),
    ("gap-ratio", &["--sizes", "4,5", "--w", "0.1,1", "--realizations", "3"]),
    ("echo", &["--sizes", "4", "--w", "1", "--times", "0,0.1,0.2", "--realizations", "3"]),
    ("shadow-bias", &["--nb-values", "2,3", "--sc", "0,1", "--realizations", "5"]),
    ("shadow-convergence", &["--na", "1", "--nb", "2", "--sc", "0,1", "--shots", "20", "--realizations", "3"]),
    ("patched-energy", &["--na", "2", "--nb", "1", "--sc", "0,2", "--shots", "50", "--realizations", "2", "--jt", "10"]),
    ("design-check", &["--na", "1", "--nb", "2", "--k", "1,2", "--sc", "0,1"]),
];

pub fn projens(args: &[&str], workers: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projens"))
        .args(args)
        .env("PROJENS_WORKERS", workers.to_string())
        .output()
        .expect("binary runs")
}

/// Runs a subcommand writing to `out` and returns the exit code.
pub fn run_to(sub: &str, flags: &[&str], out: &Path, workers: usize) -> Option<i32> {
    let mut args = vec![sub];
    args.extend_from_slice(flags);
    let out = out.to_str().expect("utf-8 path");
    args.extend_from_slice(&["--out", out]);
    projens(&args, workers).status.code()
}
