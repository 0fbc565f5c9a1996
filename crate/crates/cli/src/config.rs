//! Experiment configuration: per-experiment defaults, a TOML file layer and a
//! command-line layer, applied in that order, followed by validation.

use std::fmt;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use projens_core::model::MAX_CHAIN;
use projens_core::shadows::MAX_GRID_QUBITS;

/// Largest register simulated densely by the ensemble and shadow runners.
pub const MAX_REGISTER: usize = 12;
/// Largest `k * n_a` for which explicit moment operators are built.
pub const MAX_MOMENT_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Theorem1Verify,
    Fig1c,
    DisorderScan,
    GapRatio,
    Echo,
    ShadowBias,
    ShadowConvergence,
    PatchedEnergy,
    DesignCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Theorem1Verify,
        Experiment::Fig1c,
        Experiment::DisorderScan,
        Experiment::GapRatio,
        Experiment::Echo,
        Experiment::ShadowBias,
        Experiment::ShadowConvergence,
        Experiment::PatchedEnergy,
        Experiment::DesignCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Theorem1Verify => "theorem1-verify",
            Experiment::Fig1c => "fig1c",
            Experiment::DisorderScan => "disorder-scan",
            Experiment::GapRatio => "gap-ratio",
            Experiment::Echo => "echo",
            Experiment::ShadowBias => "shadow-bias",
            Experiment::ShadowConvergence => "shadow-convergence",
            Experiment::PatchedEnergy => "patched-energy",
            Experiment::DesignCheck => "design-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the support of `q(x)` is chosen for a given entropy `s_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QSubsetPolicy {
    /// The first `2^s_c` strings; fractional `s_c` uses a two-level weighting.
    First,
    /// `2^s_c` distinct strings drawn at random.
    Random,
    /// The first `2^s_c` entries of `explicit_support`.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingSection {
    pub h_x: f64,
    pub h_y: f64,
    pub j: f64,
}

impl Default for IsingSection {
    fn default() -> Self {
        Self { h_x: 0.8090, h_y: 0.9045, j: 1.0 }
    }
}

/// Fully resolved configuration. Its TOML serialization is echoed into the
/// CSV header and hashed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_a: usize,
    pub n_b: usize,
    pub k_values: Vec<usize>,
    pub s_c_values: Vec<f64>,
    pub w_values: Vec<f64>,
    /// Chain lengths for `gap-ratio` and `echo`.
    pub sizes: Vec<usize>,
    /// Bath sizes for `shadow-bias`.
    pub nb_values: Vec<usize>,
    /// Evolution times (units of 1/J) for `echo`.
    pub times: Vec<f64>,
    pub jt: f64,
    pub shots: usize,
    /// Disorder realizations, Haar instances or repeated runs, by experiment.
    pub realizations: usize,
    pub q_subset_policy: QSubsetPolicy,
    pub explicit_support: Vec<usize>,
    /// Failure probability for the Markov design bound.
    pub failure_prob: f64,
    #[serde(skip)]
    pub out_path: Option<String>,
    pub ising: IsingSection,
}

fn range_f(n: usize) -> Vec<f64> {
    (0..=n).map(|s| s as f64).collect()
}

impl ExperimentConfig {
    /// Defaults for each experiment, at the reference parameters where those are
    /// affordable.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            seed: 1,
            n_a: 4,
            n_b: 4,
            k_values: vec![1, 2, 3],
            s_c_values: range_f(8),
            w_values: vec![],
            sizes: vec![],
            nb_values: vec![],
            times: vec![],
            jt: 1000.0,
            shots: 5000,
            realizations: 100,
            q_subset_policy: QSubsetPolicy::First,
            explicit_support: vec![],
            failure_prob: 0.5,
            out_path: None,
            ising: IsingSection::default(),
        };
        match experiment {
            Experiment::Theorem1Verify => Self {
                n_a: 1,
                n_b: 3,
                k_values: vec![1, 2],
                s_c_values: vec![0.0, 2.0, 4.0],
                realizations: 200,
                ..base
            },
            Experiment::Fig1c => base,
            Experiment::DisorderScan => Self {
                k_values: vec![2],
                w_values: vec![0.001, 0.01, 0.1, 1.0, 10.0],
                realizations: 256,
                ..base
            },
            Experiment::GapRatio => Self {
                sizes: vec![8, 10],
                w_values: vec![0.1, 0.2, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.8, 1.0, 2.0, 5.0],
                ..base
            },
            Experiment::Echo => Self {
                sizes: vec![10],
                w_values: vec![1.0],
                times: (0..=10).map(|i| i as f64 * 0.05).collect(),
                realizations: 30,
                ..base
            },
            Experiment::ShadowBias => Self {
                n_a: 1,
                nb_values: vec![2, 3, 4],
                s_c_values: range_f(4),
                jt: 100.0,
                ..base
            },
            Experiment::ShadowConvergence => Self {
                n_a: 1,
                n_b: 4,
                s_c_values: vec![0.0, 2.0, 4.0],
                jt: 100.0,
                realizations: 20,
                ..base
            },
            Experiment::PatchedEnergy => Self {
                n_a: 4,
                n_b: 2,
                s_c_values: vec![0.0, 8.0],
                jt: 100.0,
                realizations: 20,
                ..base
            },
            Experiment::DesignCheck => Self {
                n_a: 2,
                n_b: 4,
                s_c_values: vec![0.0, 2.0, 4.0, 6.0],
                ..base
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`ExperimentConfig::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn apply(&mut self, p: &PartialConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &p.$f { self.$f = v.clone(); } )* };
        }
        take!(seed, n_a, n_b, k_values, sizes, nb_values, shots, realizations, q_subset_policy, explicit_support);
        if let Some(v) = &p.s_c_values {
            self.s_c_values = v.iter().map(|n| n.get()).collect();
        }
        if let Some(v) = &p.w_values {
            self.w_values = v.iter().map(|n| n.get()).collect();
        }
        if let Some(v) = &p.times {
            self.times = v.iter().map(|n| n.get()).collect();
        }
        if let Some(v) = p.jt {
            self.jt = v.get();
        }
        if let Some(v) = p.failure_prob {
            self.failure_prob = v.get();
        }
        if let Some(v) = &p.out_path {
            self.out_path = Some(v.clone());
        }
        if let Some(i) = &p.ising {
            if let Some(v) = i.h_x {
                self.ising.h_x = v.get();
            }
            if let Some(v) = i.h_y {
                self.ising.h_y = v.get();
            }
            if let Some(v) = i.j {
                self.ising.j = v.get();
            }
        }
    }

    pub fn ising_params(&self, n: usize) -> projens_core::model::IsingParams {
        projens_core::model::IsingParams { n, h_x: self.ising.h_x, h_y: self.ising.h_y, j: self.ising.j }
    }

    /// Evolution time `T` in units of `1/J`.
    pub fn time(&self) -> f64 {
        self.jt / self.ising.j
    }
}

/// Integer or float in the config file.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
}

impl Num {
    pub fn get(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Float(f) => f,
        }
    }
}

impl From<f64> for Num {
    fn from(f: f64) -> Self {
        Num::Float(f)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialIsing {
    pub h_x: Option<Num>,
    pub h_y: Option<Num>,
    pub j: Option<Num>,
}

/// One override layer; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub n_a: Option<usize>,
    pub n_b: Option<usize>,
    pub k_values: Option<Vec<usize>>,
    pub s_c_values: Option<Vec<Num>>,
    pub w_values: Option<Vec<Num>>,
    pub sizes: Option<Vec<usize>>,
    pub nb_values: Option<Vec<usize>>,
    pub times: Option<Vec<Num>>,
    pub jt: Option<Num>,
    pub shots: Option<usize>,
    pub realizations: Option<usize>,
    pub q_subset_policy: Option<QSubsetPolicy>,
    pub explicit_support: Option<Vec<usize>>,
    pub failure_prob: Option<Num>,
    pub out_path: Option<String>,
    pub ising: Option<PartialIsing>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().replace('\n', " "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// The configuration is malformed; exit code 2.
    Invalid,
    /// Valid but beyond the dense-simulation limits; exit code 3.
    Resource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Invalid => "invalid",
            DiagnosticKind::Resource => "resource",
        };
        write!(f, "{kind} field={} reason=\"{}\"", self.field, self.message)
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn invalid(&mut self, field: &'static str, message: impl Into<String>) {
        self.0.push(Diagnostic { kind: DiagnosticKind::Invalid, field, message: message.into() });
    }

    fn resource(&mut self, field: &'static str, message: impl Into<String>) {
        self.0.push(Diagnostic { kind: DiagnosticKind::Resource, field, message: message.into() });
    }

    fn nonempty<T>(&mut self, field: &'static str, v: &[T]) {
        if v.is_empty() {
            self.invalid(field, format!("{field} must not be empty"));
        }
    }

    fn positive(&mut self, field: &'static str, v: usize) {
        if v == 0 {
            self.invalid(field, format!("{field} must be positive"));
        }
    }
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// Every violation in `c`, empty iff the config can run.
pub fn validate(c: &ExperimentConfig) -> Vec<Diagnostic> {
    use Experiment::*;
    let mut d = Collector(Vec::new());
    let e = c.experiment;

    if !(c.jt >= 0.0) || !c.jt.is_finite() {
        d.invalid("jt", "jt must be ≥ 0");
    }
    if !(c.ising.j != 0.0 && c.ising.j.is_finite() && c.ising.h_x.is_finite() && c.ising.h_y.is_finite()) {
        d.invalid("ising", "Ising parameters must be finite with j ≠ 0");
    }
    if !(c.failure_prob > 0.0 && c.failure_prob <= 1.0) {
        d.invalid("failure_prob", "failure_prob must be in (0, 1]");
    }
    d.positive("realizations", c.realizations);

    let uses_split = matches!(e, Theorem1Verify | Fig1c | DisorderScan | ShadowConvergence | PatchedEnergy | DesignCheck);
    let uses_k = matches!(e, Theorem1Verify | Fig1c | DisorderScan | DesignCheck);
    let uses_sc = matches!(e, Theorem1Verify | Fig1c | ShadowBias | ShadowConvergence | PatchedEnergy | DesignCheck);
    let uses_w = matches!(e, DisorderScan | GapRatio | Echo);
    let uses_sizes = matches!(e, GapRatio | Echo);

    if uses_split || e == ShadowBias {
        d.positive("n_a", c.n_a);
    }
    if uses_split {
        d.positive("n_b", c.n_b);
    }
    if matches!(e, ShadowConvergence | PatchedEnergy) {
        d.positive("shots", c.shots);
    }
    if uses_k {
        d.nonempty("k_values", &c.k_values);
        if c.k_values.contains(&0) {
            d.invalid("k_values", "moment orders must be ≥ 1");
        }
    }
    if uses_sc {
        d.nonempty("s_c_values", &c.s_c_values);
    }
    if uses_w {
        d.nonempty("w_values", &c.w_values);
        if c.w_values.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            d.invalid("w_values", "disorder strengths must be finite and ≥ 0");
        }
    }
    if uses_sizes {
        d.nonempty("sizes", &c.sizes);
        if c.sizes.iter().any(|&n| n < 3) {
            d.invalid("sizes", "chain lengths must be ≥ 3");
        }
        if c.sizes.iter().any(|&n| n > MAX_CHAIN) {
            d.resource("sizes", format!("chain lengths above {MAX_CHAIN} are not simulated densely"));
        }
    }
    if e == Echo {
        d.nonempty("times", &c.times);
        if c.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            d.invalid("times", "times must be finite and ≥ 0");
        }
    }
    if e == ShadowBias {
        d.nonempty("nb_values", &c.nb_values);
        if c.nb_values.contains(&0) {
            d.invalid("nb_values", "bath sizes must be ≥ 1");
        }
        if let Some(&nb) = c.nb_values.iter().max() {
            if c.n_a + nb > MAX_REGISTER {
                d.resource("nb_values", format!("n_a + n_b above {MAX_REGISTER} qubits"));
            }
        }
    }
    if uses_split && e != PatchedEnergy && c.n_a + c.n_b > MAX_REGISTER {
        d.resource("n_b", format!("n_a + n_b = {} exceeds {MAX_REGISTER} qubits", c.n_a + c.n_b));
    }
    if e == PatchedEnergy {
        let grid = c.n_a * (c.n_b + 1);
        if grid > MAX_GRID_QUBITS {
            d.resource("n_b", format!("grid of {grid} qubits exceeds {MAX_GRID_QUBITS}"));
        }
    }
    if e == DesignCheck {
        if let Some(&k) = c.k_values.iter().max() {
            if k * c.n_a > MAX_MOMENT_QUBITS {
                d.resource(
                    "k_values",
                    format!("moment operator on 2^(k·n_a) = 2^{} dims is too large", k * c.n_a),
                );
            }
        }
    }

    // entropy ranges: s_c counts bits of the register, the bath, or the grid
    let sc_max = match e {
        ShadowBias => c.nb_values.iter().copied().max().unwrap_or(0),
        ShadowConvergence => c.n_b,
        PatchedEnergy => c.n_a * c.n_b,
        _ => c.n_a + c.n_b,
    } as f64;
    if uses_sc {
        if c.s_c_values.iter().any(|s| !(*s >= 0.0) || *s > sc_max) {
            d.invalid("s_c_values", format!("s_c must lie in [0, {sc_max}]"));
        }
        if c.q_subset_policy != QSubsetPolicy::First && c.s_c_values.iter().any(|&s| !is_integer(s)) {
            d.invalid("s_c_values", "random and explicit q subsets need integer s_c");
        }
        if c.q_subset_policy == QSubsetPolicy::Explicit {
            let need = c.s_c_values.iter().fold(0.0f64, |m, &s| m.max(2f64.powf(s)));
            if (c.explicit_support.len() as f64) < need {
                d.invalid("explicit_support", format!("explicit_support needs at least {need} strings"));
            }
            let mut seen = std::collections::HashSet::new();
            if !c.explicit_support.iter().all(|x| seen.insert(x)) {
                d.invalid("explicit_support", "explicit_support has duplicates");
            }
        }
    }
    if e == PatchedEnergy
        && c.q_subset_policy != QSubsetPolicy::First
        && c.n_a > 0
        && c.s_c_values.iter().any(|&s| !is_integer(s / c.n_a as f64))
    {
        d.invalid("s_c_values", "s_c must split into whole bits per row");
    }
    d.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_time_is_reported() {
        let mut c = ExperimentConfig::defaults(Experiment::Fig1c);
        c.jt = -1.0;
        let diags = validate(&c);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "jt must be ≥ 0");
        assert_eq!(diags[0].kind, DiagnosticKind::Invalid);
    }

    #[test]
    fn large_moment_operator_is_a_resource_problem() {
        let mut c = ExperimentConfig::defaults(Experiment::DesignCheck);
        c.n_a = 4;
        c.k_values = vec![5];
        let diags = validate(&c);
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::Resource && d.field == "k_values"));
    }

    #[test]
    fn defaults_are_valid() {
        for e in Experiment::ALL {
            assert!(validate(&ExperimentConfig::defaults(e)).is_empty(), "{e}");
        }
    }

    #[test]
    fn all_problems_are_collected() {
        let mut c = ExperimentConfig::defaults(Experiment::Fig1c);
        c.jt = -1.0;
        c.k_values.clear();
        c.s_c_values.clear();
        assert_eq!(validate(&c).len(), 3);
    }

    #[test]
    fn file_layer_overrides_defaults() {
        let p = PartialConfig::from_toml("seed = 9\ns_c_values = [0, 1.5]\n[ising]\nh_x = 1\n").unwrap();
        let mut c = ExperimentConfig::defaults(Experiment::Fig1c);
        c.apply(&p);
        assert_eq!(c.seed, 9);
        assert_eq!(c.s_c_values, vec![0.0, 1.5]);
        assert_eq!(c.ising.h_x, 1.0);
        assert_eq!(c.ising.h_y, 0.9045);
        assert!(PartialConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn hash_tracks_content_but_not_output_path() {
        let a = ExperimentConfig::defaults(Experiment::Echo);
        let mut b = a.clone();
        b.out_path = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
