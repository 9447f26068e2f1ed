//! Canned experiments that wire states, correlation measures and dynamics
//! into named pass/fail checks.
//!
//! Every demo is deterministic given its seed: random inputs are drawn from
//! [`derive_seed`] streams and per-time evaluations are collected in order.

mod cc;
mod lemma2;
mod structure;
mod time_series;

use std::collections::BTreeMap;

use serde::Serialize;

pub use cc::{cc_state_demo, random_cc_input, CcInput};
pub use lemma2::{lemma2_demo, lemma2_state, lemma2_sweep, Lemma2Point, SWEEP_EPSILONS, SWEEP_SIZES};
pub use structure::{saturation_demo, saturation_state, teleportation_state, teleportation_structure_demo};
pub use time_series::{disd_demo, markovian_demo, run_scenario_file, DisdSummary};

use crate::correlations::OptimizerConfig;
use crate::error::{Error, Result};
use crate::random::derive_seed;

pub const DEFAULT_SEED: u64 = 1;

/// Thresholds used by the checks, overridable by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Discord counted as zero.
    pub zero_discord: f64,
    /// Mutual information counted as zero.
    pub product_mi: f64,
    /// Commutator norm counted as zero.
    pub commutator: f64,
    /// Agreement of a discord value with its expected value.
    pub discord_match: f64,
    /// Coefficient k in |S − κε| ≤ kε².
    pub lemma2_quadratic: f64,
    /// S(E) = S(S+S′) for a pure global state.
    pub entropy_equality: f64,
    /// Entropy ceiling in the ε → 0 limit.
    pub vanishing_entropy: f64,
    pub robustness: f64,
    pub disd_ratio_min: f64,
    pub disd_ratio_max: f64,
    /// All correlation measures without the weak coupling.
    pub disd_zero: f64,
    /// Slack for entropy ≤ bound comparisons.
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_discord: 1e-7,
            product_mi: 1e-9,
            commutator: 1e-9,
            discord_match: 2e-4,
            lemma2_quadratic: 5.0,
            entropy_equality: 1e-9,
            vanishing_entropy: 2e-5,
            robustness: 1e-8,
            disd_ratio_min: 1.5,
            disd_ratio_max: 3.0,
            disd_zero: 1e-9,
            bound_slack: 1e-12,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 12] = [
        "zero_discord",
        "product_mi",
        "commutator",
        "discord_match",
        "lemma2_quadratic",
        "entropy_equality",
        "vanishing_entropy",
        "robustness",
        "disd_ratio_min",
        "disd_ratio_max",
        "disd_zero",
        "bound_slack",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "zero_discord" => &mut self.zero_discord,
            "product_mi" => &mut self.product_mi,
            "commutator" => &mut self.commutator,
            "discord_match" => &mut self.discord_match,
            "lemma2_quadratic" => &mut self.lemma2_quadratic,
            "entropy_equality" => &mut self.entropy_equality,
            "vanishing_entropy" => &mut self.vanishing_entropy,
            "robustness" => &mut self.robustness,
            "disd_ratio_min" => &mut self.disd_ratio_min,
            "disd_ratio_max" => &mut self.disd_ratio_max,
            "disd_zero" => &mut self.disd_zero,
            "bound_slack" => &mut self.bound_slack,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {name} = {value} must be finite and nonnegative")));
        }
        let slot = self.slot(name).ok_or_else(|| {
            Error::InvalidInput(format!("unknown tolerance '{name}' (known: {})", Self::NAMES.join(", ")))
        })?;
        *slot = value;
        Ok(())
    }

    /// Apply a list of overrides, keeping a record of what was changed.
    pub fn with_overrides(overrides: &[(String, f64)]) -> Result<(Self, BTreeMap<String, f64>)> {
        let mut tol = Self::default();
        let mut record = BTreeMap::new();
        for (name, value) in overrides {
            tol.set(name, *value)?;
            record.insert(name.clone(), *value);
        }
        Ok((tol, record))
    }
}

/// Parse `name=value`.
pub fn parse_tol_override(text: &str) -> Result<(String, f64)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("tolerance override '{text}' is not of the form name=value")))?;
    let name = name.trim();
    if !Tolerances::NAMES.contains(&name) {
        return Err(Error::InvalidInput(format!("unknown tolerance '{name}' (known: {})", Tolerances::NAMES.join(", "))));
    }
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("tolerance value '{}' is not a number", value.trim())))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {name} = {value} must be finite and nonnegative")));
    }
    Ok((name.to_string(), value))
}

/// How a measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// measured < threshold
    Below { threshold: f64 },
    /// measured ≤ threshold
    AtMost { threshold: f64 },
    /// |measured − target| ≤ tol
    Near { target: f64, tol: f64 },
    /// lo ≤ measured ≤ hi
    Within { lo: f64, hi: f64 },
}

impl Criterion {
    pub fn accepts(&self, x: f64) -> bool {
        match *self {
            Self::Below { threshold } => x < threshold,
            Self::AtMost { threshold } => x <= threshold,
            Self::Near { target, tol } => (x - target).abs() <= tol,
            Self::Within { lo, hi } => lo <= x && x <= hi,
        }
    }

    fn scaled(self, k: f64) -> Self {
        match self {
            Self::Below { threshold } => Self::Below { threshold: threshold * k },
            Self::AtMost { threshold } => Self::AtMost { threshold: threshold * k },
            Self::Near { target, tol } => Self::Near { target: target * k, tol: tol * k },
            Self::Within { lo, hi } => Self::Within { lo: lo * k, hi: hi * k },
        }
    }

    fn describe(&self) -> String {
        match *self {
            Self::Below { threshold } => format!("< {threshold:e}"),
            Self::AtMost { threshold } => format!("<= {threshold:e}"),
            Self::Near { target, tol } => format!("= {target} ± {tol:e}"),
            Self::Within { lo, hi } => format!("in [{lo}, {hi}]"),
        }
    }
}

/// Unit of a measured value. Entropic quantities are computed in nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Nats,
    Dimensionless,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub unit: Unit,
    pub criterion: Criterion,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, criterion: Criterion) -> Self {
        let passed = measured.is_finite() && criterion.accepts(measured);
        Self { name: name.into(), passed, measured, unit: Unit::Dimensionless, criterion }
    }

    /// Mark the measured value and its criterion as entropic (nats).
    pub fn nats(mut self) -> Self {
        self.unit = Unit::Nats;
        self
    }

    pub fn summary_line(&self, scenario: &str) -> String {
        self.summary_line_in(scenario, false)
    }

    /// With `bits`, entropic values and bounds are shown divided by ln 2;
    /// the verdict itself is unchanged.
    pub fn summary_line_in(&self, scenario: &str, bits: bool) -> String {
        let (k, suffix) = match (bits, self.unit) {
            (true, Unit::Nats) => (1.0 / std::f64::consts::LN_2, " (bits)"),
            _ => (1.0, ""),
        };
        format!(
            "{} {scenario}: {} measured={:.9e} expected {}{suffix}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured * k,
            self.criterion.scaled(k).describe()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    pub passed: bool,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Tolerances that differ from the defaults.
    pub tolerance_overrides: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_points: Option<usize>,
}

impl ScenarioResult {
    pub fn new(name: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { name: name.to_string(), passed, seed, checks, tolerance_overrides: BTreeMap::new(), time_points: None }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.summary_lines_in(false)
    }

    pub fn summary_lines_in(&self, bits: bool) -> Vec<String> {
        self.checks.iter().map(|c| c.summary_line_in(&self.name, bits)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }
}

/// A file produced alongside a verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub file_name: String,
    pub contents: String,
}

impl Attachment {
    pub fn new(file_name: impl Into<String>, contents: String) -> Self {
        Self { file_name: file_name.into(), contents }
    }
}

#[derive(Debug, Clone)]
pub struct DemoOutput {
    pub result: ScenarioResult,
    pub attachments: Vec<Attachment>,
}

/// Knobs shared by every demo run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub overrides: BTreeMap<String, f64>,
    /// Replaces the number of time points of time-series demos.
    pub time_points: Option<usize>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, tolerances: Tolerances::default(), overrides: BTreeMap::new(), time_points: None }
    }
}

impl RunSettings {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig::with_seed(self.seed)
    }

    pub(crate) fn stream(&self, index: u64) -> u64 {
        derive_seed(self.seed, index)
    }

    pub(crate) fn finish(&self, name: &str, checks: Vec<Check>, attachments: Vec<Attachment>) -> DemoOutput {
        let mut result = ScenarioResult::new(name, self.seed, checks);
        result.tolerance_overrides = self.overrides.clone();
        result.time_points = self.time_points;
        DemoOutput { result, attachments }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DemoInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const DEMOS: [DemoInfo; 6] = [
    DemoInfo {
        name: "teleportation",
        summary: "structure relativity: |phi>_1|Phi+>_23 has I(1:23) = 0 yet D(12|3) = ln 2",
    },
    DemoInfo {
        name: "saturation",
        summary: "discord saturation: rho_S (x) |Psi>_S'E gives D(S+S'|E) = S(E), I(S:S') = 0, LII = (0, S(E), 0)",
    },
    DemoInfo {
        name: "lemma2",
        summary: "small-disturbance entropy bound: S(S+S') <= kappa*eps with kappa = 1 - ln eps - ln p_max",
    },
    DemoInfo {
        name: "markovian-classicality",
        summary: "product state under independent unitary and GKSL evolution keeps zero two-way discord",
    },
    DemoInfo {
        name: "disd",
        summary: "dominant-interaction model: correlations of S and S' stay small over [0, C/c] and scale with eps",
    },
    DemoInfo {
        name: "cc-state",
        summary: "classical-classical states have zero two-way discord; separable weights give product states",
    },
];

/// Run one demo by name.
pub fn run_demo(name: &str, settings: &RunSettings) -> Result<DemoOutput> {
    match name {
        "teleportation" => teleportation_structure_demo(0.7, settings),
        "saturation" => {
            let c = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
            saturation_demo(&structure::real_amplitudes(&c), &structure::default_rho_s(), settings)
        }
        "lemma2" => lemma2_demo(settings),
        "markovian-classicality" => markovian_demo(20, settings),
        "disd" => disd_demo(settings),
        "cc-state" => cc::default_demo(settings),
        other => Err(Error::InvalidInput(format!(
            "unknown demo '{other}' (known: {})",
            DEMOS.iter().map(|d| d.name).collect::<Vec<_>>().join(", ")
        ))),
    }
}
