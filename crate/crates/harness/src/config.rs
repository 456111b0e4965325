//! TOML experiment configuration. Every field has a default, unknown keys are
//! rejected, and [`ExperimentConfig::validate`] runs before any work starts.

use std::path::{Path, PathBuf};

use fairshift_core::data::{DesignParams, ProtectedColumn, TabularSchema};
use fairshift_core::profile::FairKind;
use fairshift_core::solver::{Selection, SolverConfig};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Geometry,
    Tabular,
    Audit,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Geometry => "geometry",
            Mode::Tabular => "tabular",
            Mode::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// When set, must match the subcommand.
    pub mode: Option<Mode>,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub out: PathBuf,
    pub solver: SolverSection,
    pub simulate: SimulateConfig,
    pub geometry: GeometryConfig,
    pub tabular: TabularConfig,
    pub audit: AuditConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: None,
            seed: 20240501,
            workers: 0,
            out: PathBuf::from("fairshift-out"),
            solver: SolverSection::default(),
            simulate: SimulateConfig::default(),
            geometry: GeometryConfig::default(),
            tabular: TabularConfig::default(),
            audit: AuditConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionName {
    Uniform,
    BestGap,
}

/// Solver settings shared by `simulate` and `tabular`; iteration counts live
/// in the mode sections.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Multiplier bound; defaults to `1 / epsilon` (at most 100).
    pub bound: Option<f64>,
    pub eta0: f64,
    pub l2: f64,
    pub max_newton_steps: usize,
    pub tol: f64,
    pub selection: SelectionName,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            bound: d.bound,
            eta0: d.eta0,
            l2: d.l2,
            max_newton_steps: d.max_newton_steps,
            tol: d.tol,
            selection: SelectionName::Uniform,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self, iterations: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            iterations,
            bound: self.bound,
            eta0: self.eta0,
            l2: self.l2,
            max_newton_steps: self.max_newton_steps,
            tol: self.tol,
            selection: match self.selection {
                SelectionName::Uniform => Selection::Uniform,
                SelectionName::BestGap => Selection::BestGap,
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSection {
    pub class_sep: f64,
    pub group_shift: f64,
    pub tilt: f64,
    pub variance: f64,
}

impl Default for DesignSection {
    fn default() -> Self {
        let d = DesignParams::default();
        DesignSection {
            class_sep: d.class_sep,
            group_shift: d.group_shift,
            tilt: d.tilt,
            variance: d.variance,
        }
    }
}

impl From<DesignSection> for DesignParams {
    fn from(d: DesignSection) -> Self {
        DesignParams {
            class_sep: d.class_sep,
            group_shift: d.group_shift,
            tilt: d.tilt,
            variance: d.variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub p_minor: Vec<f64>,
    pub repetitions: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub iterations: usize,
    pub epsilon_baseline: f64,
    pub epsilon_fair: f64,
    pub design: DesignSection,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            p_minor: vec![0.01, 0.05, 0.1, 0.25],
            repetitions: 20,
            n_train: 2000,
            n_test: 20000,
            iterations: 25,
            epsilon_baseline: 10.0,
            epsilon_fair: 0.1,
            design: DesignSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Counterexample instance file; the shipped fixture when unset.
    pub counterexample: Option<PathBuf>,
    /// Two-group instances for the threshold sweep; random when unset.
    pub sweep_files: Vec<PathBuf>,
    pub sweep_instances: usize,
    pub sweep_points: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            counterexample: None,
            sweep_files: Vec::new(),
            sweep_instances: 16,
            sweep_points: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Compas,
    Adult,
    Custom,
}

impl DatasetName {
    pub fn name(self) -> &'static str {
        match self {
            DatasetName::Compas => "compas",
            DatasetName::Adult => "adult",
            DatasetName::Custom => "custom",
        }
    }

    /// Environment variable consulted when no path is configured.
    pub fn env_var(self) -> Option<&'static str> {
        match self {
            DatasetName::Compas => Some("FAIRSHIFT_COMPAS_CSV"),
            DatasetName::Adult => Some("FAIRSHIFT_ADULT_CSV"),
            DatasetName::Custom => None,
        }
    }

    pub fn default_epsilon_fair(self) -> f64 {
        match self {
            DatasetName::Adult => 0.02,
            _ => 0.1,
        }
    }

    pub fn default_schema(self) -> Option<TabularSchema> {
        let prot = |name: &str, privileged: &str| ProtectedColumn {
            name: name.into(),
            privileged: Some(privileged.into()),
        };
        let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        match self {
            DatasetName::Compas => Some(TabularSchema {
                numeric: strings(&[
                    "age",
                    "juv_fel_count",
                    "juv_misd_count",
                    "juv_other_count",
                    "priors_count",
                ]),
                categorical: strings(&["c_charge_degree"]),
                protected: vec![prot("race", "Caucasian"), prot("sex", "Male")],
                label: "two_year_recid".into(),
                positive_label: "1".into(),
            }),
            DatasetName::Adult => Some(TabularSchema {
                numeric: strings(&["age", "educational-num", "capital-gain", "capital-loss", "hours-per-week"]),
                categorical: strings(&["workclass", "marital-status", "occupation", "relationship"]),
                protected: vec![prot("race", "White"), prot("gender", "Male")],
                label: "income".into(),
                positive_label: ">50K".into(),
            }),
            DatasetName::Custom => None,
        }
    }

    pub fn download_hint(self) -> &'static str {
        match self {
            DatasetName::Compas => {
                "download compas-scores-two-years.csv from the ProPublica compas-analysis repository \
                 (github.com/propublica/compas-analysis) and pass it via [tabular] path or FAIRSHIFT_COMPAS_CSV"
            }
            DatasetName::Adult => {
                "download the UCI Adult census data as a CSV with a header row (columns age, workclass, \
                 educational-num, marital-status, occupation, relationship, race, gender, capital-gain, \
                 capital-loss, hours-per-week, income) and pass it via [tabular] path or FAIRSHIFT_ADULT_CSV"
            }
            DatasetName::Custom => "set [tabular] path and [tabular.schema]",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectedSection {
    pub name: String,
    pub privileged: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSection {
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    pub protected: Vec<ProtectedSection>,
    pub label: String,
    pub positive_label: String,
}

impl From<&SchemaSection> for TabularSchema {
    fn from(s: &SchemaSection) -> Self {
        TabularSchema {
            numeric: s.numeric.clone(),
            categorical: s.categorical.clone(),
            protected: s
                .protected
                .iter()
                .map(|p| ProtectedColumn {
                    name: p.name.clone(),
                    privileged: p.privileged.clone(),
                })
                .collect(),
            label: s.label.clone(),
            positive_label: s.positive_label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabularConfig {
    pub dataset: DatasetName,
    pub path: Option<PathBuf>,
    pub schema: Option<SchemaSection>,
    pub repetitions: usize,
    pub iterations: usize,
    pub train_ratio: f64,
    pub epsilon_baseline: f64,
    /// Defaults per dataset: 0.02 for Adult, 0.1 otherwise.
    pub epsilon_fair: Option<f64>,
}

impl Default for TabularConfig {
    fn default() -> Self {
        TabularConfig {
            dataset: DatasetName::Compas,
            path: None,
            schema: None,
            repetitions: 20,
            iterations: 50,
            train_ratio: 0.7,
            epsilon_baseline: 10.0,
            epsilon_fair: None,
        }
    }
}

impl TabularConfig {
    pub fn epsilon_fair(&self) -> f64 {
        self.epsilon_fair.unwrap_or_else(|| self.dataset.default_epsilon_fair())
    }

    pub fn schema(&self) -> Result<TabularSchema> {
        match (&self.schema, self.dataset.default_schema()) {
            (Some(s), _) => Ok(s.into()),
            (None, Some(s)) => Ok(s),
            (None, None) => Err(HarnessError::Config("custom dataset needs a [tabular.schema] section".into())),
        }
    }

    /// Configured path, else the dataset's environment variable.
    pub fn resolve_path(&self) -> Option<PathBuf> {
        self.path.clone().or_else(|| {
            self.dataset
                .env_var()
                .and_then(|v| std::env::var_os(v))
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// One file with `vertex`, `p_star` and `p_tilde` rows.
    pub instance: Option<PathBuf>,
    /// Vertex file, one profile per row.
    pub profiles: Option<PathBuf>,
    /// Group-by-disc matrices.
    pub p_star: Option<PathBuf>,
    pub p_tilde: Option<PathBuf>,
    /// `rp` or `crp`; `rp` when the disc attribute is trivial, else `crp`.
    pub fair: Option<String>,
}

impl AuditConfig {
    pub fn fair_kind(&self) -> Result<Option<FairKind>> {
        self.fair
            .as_deref()
            .map(|s| FairKind::parse(s).ok_or_else(|| HarnessError::Config(format!("unknown fair kind `{s}`"))))
            .transpose()
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::Config(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks the settings used by `mode`.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            check(m == mode, || format!("config is for `{}` but `{}` was requested", m.name(), mode.name()))?;
        }
        let s = &self.solver;
        if let Some(b) = s.bound {
            positive("solver.bound", b)?;
        }
        positive("solver.eta0", s.eta0)?;
        positive("solver.tol", s.tol)?;
        check(s.l2.is_finite() && s.l2 >= 0.0, || format!("solver.l2 must be >= 0, got {}", s.l2))?;
        check(s.max_newton_steps >= 1, || "solver.max_newton_steps must be at least 1".into())?;
        match mode {
            Mode::Simulate => {
                let c = &self.simulate;
                check(!c.p_minor.is_empty(), || "simulate.p_minor is empty".into())?;
                for &p in &c.p_minor {
                    check(p > 0.0 && p <= 0.25, || format!("simulate.p_minor value {p} outside (0, 0.25]"))?;
                }
                check(c.repetitions >= 1, || "simulate.repetitions must be at least 1".into())?;
                check(c.n_train >= 4 && c.n_test >= 4, || "simulate.n_train and n_test must be at least 4".into())?;
                check(c.iterations >= 1, || "simulate.iterations must be at least 1".into())?;
                check(c.epsilon_baseline >= 0.0 && c.epsilon_fair >= 0.0, || "epsilons must be >= 0".into())?;
                let d = c.design;
                for (n, v) in [("class_sep", d.class_sep), ("group_shift", d.group_shift), ("tilt", d.tilt)] {
                    check(v.is_finite(), || format!("simulate.design.{n} must be finite"))?;
                }
                positive("simulate.design.variance", d.variance)?;
            }
            Mode::Geometry => {
                let g = &self.geometry;
                check(g.sweep_points >= 2, || "geometry.sweep_points must be at least 2".into())?;
            }
            Mode::Tabular => {
                let t = &self.tabular;
                check(t.repetitions >= 1, || "tabular.repetitions must be at least 1".into())?;
                check(t.iterations >= 1, || "tabular.iterations must be at least 1".into())?;
                check(t.train_ratio > 0.0 && t.train_ratio < 1.0, || {
                    format!("tabular.train_ratio {} outside (0, 1)", t.train_ratio)
                })?;
                check(t.epsilon_baseline >= 0.0 && t.epsilon_fair() >= 0.0, || "epsilons must be >= 0".into())?;
                t.schema()?
                    .validate()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
            }
            Mode::Audit => {
                let a = &self.audit;
                let split = [&a.profiles, &a.p_star, &a.p_tilde];
                let n_split = split.iter().filter(|p| p.is_some()).count();
                check(
                    (a.instance.is_some() && n_split == 0) || (a.instance.is_none() && n_split == 3),
                    || "audit needs either `instance` or all of `profiles`, `p_star`, `p_tilde`".into(),
                )?;
                a.fair_kind()?;
            }
        }
        Ok(())
    }
}
