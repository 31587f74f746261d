//! Run configuration: one JSON document, overridden field by field from the
//! command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use optomech::basis::PathBounds;
use optomech::evolution::InitialState;
use optomech::fock::DEFAULT_BUFFER;
use optomech::oracle::{DirectMethod, Reduction, DEFAULT_CAP};
use optomech::{EigenLabel, Side, SystemParams};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Inclusive label ranges: `|l| <= l_max`, `n <= n_max`, `|k| <= k_max`, `m <= m_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRanges {
    pub l_max: usize,
    pub n_max: usize,
    pub k_max: usize,
    pub m_max: usize,
}

impl Default for LabelRanges {
    fn default() -> Self {
        LabelRanges { l_max: 1, n_max: 1, k_max: 1, m_max: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute distance between analytic and brute-force eigenvalues.
    pub spectrum: f64,
    /// Relative eigenvector residual.
    pub residual: f64,
    /// Max-norm deviation of the Gram matrix from the identity.
    pub gram: f64,
    /// Magnitude of the cross-trace sums.
    pub cross_trace: f64,
    /// Relative difference between path-sum and recursion eigenvectors.
    pub path_sum: f64,
    /// Trace distance between evolution routes.
    pub evolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { spectrum: 1e-6, residual: 1e-7, gram: 1e-7, cross_trace: 1e-8, path_sum: 1e-6, evolution: 1e-6 }
    }
}

/// Checks run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Spectrum,
    Residual,
    Gram,
    CrossTrace,
    PathSum,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Spectrum, Check::Residual, Check::Gram, Check::CrossTrace, Check::PathSum];
}

/// Which photon blocks the brute-force spectrum diagonalises.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumBlocks {
    /// The whole truncated generator, under `reduction`.
    #[default]
    All,
    /// Only the blocks `(l, n)` hosting the requested labels.
    Labels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMethod {
    Spectral,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub initial: InitialState,
    pub times: Vec<f64>,
    pub methods: Vec<EvolveMethod>,
    pub direct: DirectMethod,
    /// Spectral label set: `n + |l| <= Nc - 2`, `m + |k| <= m_cut`.
    pub m_cut: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            initial: InitialState::FockThermal { n: 1, mbar: 0.5 },
            times: vec![5.0, 50.0, 250.0, 500.0],
            methods: vec![EvolveMethod::Spectral, EvolveMethod::Direct],
            direct: DirectMethod::Expm,
            m_cut: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// `(Nc, Nm)` pairs to sweep.
    pub dims: Vec<(usize, usize)>,
    pub times: Vec<f64>,
    pub adaptive_rtol: f64,
    pub adaptive_atol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { dims: vec![(2, 8), (3, 10), (3, 14)], times: vec![5.0, 50.0, 500.0], adaptive_rtol: 1e-9, adaptive_atol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    pub l: i64,
    pub n: usize,
    pub k: i64,
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigvecConfig {
    pub label: LabelSpec,
    pub side: Side,
}

impl Default for EigvecConfig {
    fn default() -> Self {
        EigvecConfig { label: LabelSpec { l: 0, n: 0, k: 0, m: 0 }, side: Side::Right }
    }
}

impl EigvecConfig {
    pub fn eigen_label(&self) -> EigenLabel {
        let LabelSpec { l, n, k, m } = self.label;
        EigenLabel::right(l, n, k, m).with_side(self.side)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub nc: usize,
    pub nm: usize,
    /// Extra mechanical levels used while building displaced eigenvectors.
    pub buffer: usize,
    pub labels: LabelRanges,
    pub tolerances: Tolerances,
    pub format: Format,
    pub seed: u64,
    /// Largest dense eigenproblem `verify` will attempt.
    pub spectrum_cap: usize,
    pub reduction: Reduction,
    pub spectrum_blocks: SpectrumBlocks,
    pub checks: Vec<Check>,
    pub cross_trace_samples: usize,
    /// How far path-sum intermediates may stray from the target `(k, m)`.
    pub path_bounds: PathBounds,
    pub evolve: EvolveConfig,
    pub bench: BenchConfig,
    pub eigvec: EigvecConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::desk(),
            nc: 4,
            nm: 36,
            buffer: DEFAULT_BUFFER,
            labels: LabelRanges::default(),
            tolerances: Tolerances::default(),
            format: Format::Json,
            seed: 1,
            spectrum_cap: DEFAULT_CAP,
            reduction: Reduction::PhotonBlocks,
            spectrum_blocks: SpectrumBlocks::All,
            checks: Check::ALL.to_vec(),
            cross_trace_samples: 100,
            path_bounds: PathBounds::default(),
            evolve: EvolveConfig::default(),
            bench: BenchConfig::default(),
            eigvec: EigvecConfig::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| usage(e.to_string()))?;
        if self.nc < 1 || self.nm < 1 {
            return Err(usage(format!("dimensions must be >= 1, got nc={}, nm={}", self.nc, self.nm)));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("spectrum", t.spectrum),
            ("residual", t.residual),
            ("gram", t.gram),
            ("cross_trace", t.cross_trace),
            ("path_sum", t.path_sum),
            ("evolution", t.evolution),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(usage(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.checks.is_empty() {
            return Err(usage("checks must name at least one check"));
        }
        if self.spectrum_cap < 1 {
            return Err(usage("spectrum_cap must be >= 1"));
        }
        Ok(())
    }

    /// Labels that build elements must stay one photon level below the
    /// truncation edge: `n_max + l_max <= Nc - 2`.
    pub fn validate_edge(&self) -> Result<(), CliError> {
        let r = &self.labels;
        if self.nc < 2 || r.n_max + r.l_max > self.nc - 2 {
            return Err(usage(format!(
                "label ranges reach the cavity truncation edge: n_max + l_max = {} but Nc - 2 = {}",
                r.n_max + r.l_max,
                self.nc as i64 - 2
            )));
        }
        Ok(())
    }

    pub fn validate_times(times: &[f64]) -> Result<(), CliError> {
        if times.is_empty() {
            return Err(usage("at least one time is required"));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(usage(format!("times must be finite and >= 0, got {t}")));
        }
        Ok(())
    }
}
