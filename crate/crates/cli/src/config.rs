//! Run configuration, read from TOML. Every key is optional; unknown keys are errors.

use std::path::{Path, PathBuf};

use pmac::allencahn::AllenCahnParams;
use pmac::fastsum::FastsumParams;
use pmac::krylov::{LanczosOptions, PksmOptions};
use pmac::powermean::PowerMeanConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: InputConfig,
    pub grouping: GroupingConfig,
    pub power: PowerConfig,
    pub fastsum: FastsumConfig,
    pub eig: EigConfig,
    pub pksm: PksmConfig,
    pub ac: AcConfig,
    pub bench: BenchConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    /// feature CSV, one row per node
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    /// one `i j [w]` edge list per layer, used instead of features
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edge_lists: Vec<PathBuf>,
    /// node count for edge lists; defaults to the largest index plus one
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// PNG images for `segment-image`, stacked in order
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<PathBuf>,
    /// known labels, 1-based class ids with 0 for unlabeled
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// ground truth, 1-based class ids with 0 for unknown
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    /// share of each class drawn from the ground truth when `labels` is absent
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    FastsumBox,
    UnitBox,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub columns: Vec<usize>,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    /// kernel scale in the units of the raw features
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    /// kernel scale relative to the group centered and scaled into `[-1, 1]`
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_box: Option<f64>,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingMode,
    /// zero weights between different images
    #[serde(default)]
    pub per_component: bool,
}

fn default_kernel() -> String {
    "gaussian".into()
}

fn default_scaling() -> ScalingMode {
    ScalingMode::FastsumBox
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupingConfig {
    /// empty means one group of all columns (features) or `[RGB] + [xy]` (images)
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupConfig>,
    pub materialize_limit: usize,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self {
            groups: Vec::new(),
            materialize_limit: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub dense_limit: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            delta: None,
            dense_limit: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FastsumConfig {
    #[serde(rename = "N")]
    pub bandwidth: usize,
    pub m: usize,
    pub eps_b: f64,
    pub p: usize,
    pub oversampling: f64,
}

impl Default for FastsumConfig {
    fn default() -> Self {
        let d = FastsumParams::default();
        Self {
            bandwidth: d.bandwidth,
            m: d.cutoff,
            eps_b: d.eps_b,
            p: d.degree,
            oversampling: d.oversampling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigConfig {
    pub k: usize,
    pub tol: f64,
    pub max_restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subspace: Option<usize>,
    /// also write the eigenvectors in `eig`
    pub write_vectors: bool,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            k: 10,
            tol: 1e-8,
            max_restarts: LanczosOptions::default().max_restarts,
            max_subspace: None,
            write_vectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PksmConfig {
    pub dim: usize,
    pub tol: f64,
}

impl Default for PksmConfig {
    fn default() -> Self {
        let d = PksmOptions::default();
        Self {
            dim: d.max_dim,
            tol: d.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcConfig {
    pub epsilon: f64,
    pub omega0: f64,
    /// defaults to `omega0 + 3 / epsilon`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AcConfig {
    fn default() -> Self {
        let d = AllenCahnParams::default();
        Self {
            epsilon: d.epsilon,
            omega0: d.omega0,
            c: None,
            dt: d.dt,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmLayerConfig {
    /// block of each class; `-1` leaves the class outside every block
    pub partition: Vec<i64>,
    pub p_in: f64,
    pub p_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub name: String,
    /// 0-based layer indices
    pub layers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SbmPreset {
    /// two informative layers
    TwoLayer,
    /// one informative and one noisy layer
    TwoLayerNoisy,
    /// three layers, each separating one class from the rest
    ThreeLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// repetitions; defaults to 100 for `sbm-bench` and 5 for `fastsum-bench`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    pub preset: SbmPreset,
    /// nodes per class, overriding the preset
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<usize>,
    /// layers, overriding the preset
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<SbmLayerConfig>,
    /// layer subsets to compare, overriding the preset
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantConfig>,
    /// powers to compare, overriding the preset
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub p_values: Vec<f64>,
    pub label_fraction: f64,
    /// eigenpairs per SBM run; defaults to the number of classes
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub fastsum: FastsumBenchConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: None,
            preset: SbmPreset::TwoLayerNoisy,
            classes: Vec::new(),
            layers: Vec::new(),
            variants: Vec::new(),
            p_values: Vec::new(),
            label_fraction: 0.04,
            k: None,
            fastsum: FastsumBenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FastsumBenchConfig {
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    /// kernel scales in box units
    pub sigmas: Vec<f64>,
    pub kernel: String,
    /// sizes above this skip the direct sum (error and direct time left empty)
    pub direct_max_n: usize,
}

impl Default for FastsumBenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1000, 2000, 4000, 8000, 16000],
            dims: vec![2],
            sigmas: vec![0.1],
            kernel: default_kernel(),
            direct_max_n: 50_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// output directory; `--out` takes precedence
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Relative input paths are taken relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.input;
        i.features.iter_mut().for_each(fix);
        i.labels.iter_mut().for_each(fix);
        i.truth.iter_mut().for_each(fix);
        i.edge_lists.iter_mut().for_each(fix);
        i.images.iter_mut().for_each(fix);
        self.output.dir.iter_mut().for_each(fix);
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn fastsum_params(&self) -> FastsumParams {
        FastsumParams {
            bandwidth: self.fastsum.bandwidth,
            cutoff: self.fastsum.m,
            eps_b: self.fastsum.eps_b,
            degree: self.fastsum.p,
            oversampling: self.fastsum.oversampling,
        }
    }

    pub fn lanczos_options(&self, seed: u64) -> LanczosOptions {
        LanczosOptions {
            tol: self.eig.tol,
            max_subspace: self.eig.max_subspace,
            max_restarts: self.eig.max_restarts,
            seed,
        }
    }

    pub fn power_mean_config(&self, p: f64, seed: u64) -> CliResult<PowerMeanConfig> {
        let mut cfg =
            PowerMeanConfig::new(p).map_err(|e| CliError::config(format!("power.p: {e}")))?;
        if let Some(d) = self.power.delta {
            cfg = cfg
                .with_delta(d)
                .map_err(|e| CliError::config(format!("power.delta: {e}")))?;
        }
        cfg.dense_limit = self.power.dense_limit;
        cfg.pksm = PksmOptions {
            max_dim: self.pksm.dim,
            tol: self.pksm.tol,
        };
        cfg.lanczos = self.lanczos_options(seed);
        Ok(cfg)
    }

    pub fn allen_cahn_params(&self) -> CliResult<AllenCahnParams> {
        let a = &self.ac;
        let params = AllenCahnParams {
            epsilon: a.epsilon,
            omega0: a.omega0,
            c: a.c.unwrap_or(a.omega0 + 3.0 / a.epsilon),
            dt: a.dt,
            tol: a.tol,
            max_iter: a.max_iter,
        };
        params
            .validate()
            .map_err(|e| CliError::config(format!("ac: {e}")))?;
        Ok(params)
    }
}
