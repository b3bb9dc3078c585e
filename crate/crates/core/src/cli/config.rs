use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detect::{IdentifyOptions, MinMaxOptions, ScanAxes};
use crate::error::{Error, Result};
use crate::model::{
    validate_params, DamageProfile, FrequencyGrid, LoadCase, ParameterPoint, SystemParams,
};

/// Everything a run needs. Every section is optional; an empty file
/// reproduces the baseline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for random starts and measurement noise.
    pub seed: Option<u64>,
    pub system: SystemParams,
    /// True damage used for synthesis; its `eps` is also the known half-width.
    pub damage: DamageProfile,
    pub grid: GridConfig,
    pub loads: Vec<LoadCase>,
    pub load_mode: LoadMode,
    pub identify: IdentifyOptions,
    pub tune: TuneConfig,
    pub scan: ScanConfig,
    pub noise: NoiseConfig,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            system: SystemParams::baseline(),
            damage: DamageProfile::baseline(),
            grid: GridConfig::default(),
            loads: vec![LoadCase::real(0.0, 1.0), LoadCase::real(1.0, 1.0)],
            load_mode: LoadMode::Summed,
            identify: IdentifyOptions::default(),
            tune: TuneConfig::default(),
            scan: ScanConfig::default(),
            noise: NoiseConfig::default(),
            output: OutputConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// Whether load cases enter one functional or one run each.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadMode {
    #[default]
    Summed,
    Separate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Minimum distance from an undamaged resonance, as a fraction of the
    /// local modal spacing.
    pub guard: f64,
    /// Explicit frequencies; overrides the uniform grid settings when present.
    pub omegas: Option<Vec<f64>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lo: 1.0,
            hi: 120.0,
            count: 40,
            guard: 0.02,
            omegas: None,
        }
    }
}

impl GridConfig {
    pub fn build(&self, p: &SystemParams) -> Result<FrequencyGrid> {
        match &self.omegas {
            Some(w) => FrequencyGrid::new(w.clone()),
            None => FrequencyGrid::guarded(self.lo, self.hi, self.count, p, self.guard),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub start: ParameterPoint,
    #[serde(flatten)]
    pub options: MinMaxOptions,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            start: ParameterPoint::new(0.45, 0.75, 0.9),
            options: MinMaxOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    fn points(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !(self.hi >= self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidInput(format!("bad scan axis {self:?}")));
        }
        Ok(crate::detect::scan::linspace(self.lo, self.hi, self.n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub d: AxisSpec,
    pub x: AxisSpec,
    pub beta: Vec<f64>,
    /// Sublevel threshold on the functional.
    pub level: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            d: AxisSpec {
                lo: 0.1,
                hi: 1.0,
                n: 46,
            },
            x: AxisSpec {
                lo: 0.0,
                hi: 1.0,
                n: 51,
            },
            beta: vec![1.0],
            level: 1.0,
        }
    }
}

impl ScanConfig {
    pub fn axes(&self) -> Result<ScanAxes> {
        if self.beta.is_empty() || self.beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InvalidInput("scan.beta needs positive values".into()));
        }
        Ok(ScanAxes {
            d: self.d.points()?,
            x: self.x.points()?,
            beta: self.beta.clone(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Standard deviation of complex Gaussian noise relative to each sample's magnitude.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub elements: usize,
    /// Frequencies for the FRF comparison.
    pub frf_lo: f64,
    pub frf_hi: f64,
    pub frf_count: usize,
    pub frf_tolerance: f64,
    /// Accepted range for each of the first three eigenfrequency shifts, in percent.
    pub shift_range: [f64; 2],
    /// Required minimum of the largest relative change of the electric response.
    pub min_electric_change: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            elements: 200,
            frf_lo: 2.0,
            frf_hi: 115.0,
            frf_count: 30,
            frf_tolerance: 0.01,
            shift_range: [1.5, 4.5],
            min_electric_change: 0.10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(&self.system, &self.damage)?;
        if self.loads.is_empty() {
            return Err(Error::InvalidInput("at least one load case is required".into()));
        }
        for l in &self.loads {
            l.validate()?;
        }
        if !(self.noise.amplitude >= 0.0 && self.noise.amplitude.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise amplitude must be a finite non-negative number, got {}",
                self.noise.amplitude
            )));
        }
        self.identify.simplex.validate()?;
        self.tune.options.validate()?;
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.damage.eps
    }

    /// The seed, which must be given whenever a run draws random numbers.
    pub fn require_seed(&self, why: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidInput(format!("a seed is required for {why}; set `seed` or pass --seed")))
    }

    /// Load groups: all cases together, or one group per case.
    pub fn load_groups(&self) -> Vec<(String, Vec<LoadCase>)> {
        match self.load_mode {
            LoadMode::Summed => vec![(String::new(), self.loads.clone())],
            LoadMode::Separate => self
                .loads
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("_load{i}"), vec![*l]))
                .collect(),
        }
    }

    /// SHA-256 of the canonical JSON form (object keys sorted), hex encoded.
    /// The output location is not part of it.
    pub fn digest(&self) -> String {
        // serde_json::Value keeps object keys in a BTreeMap
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
