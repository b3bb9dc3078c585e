//! Measurement files, noise injection and tabular outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::detect::{Experiment, SurfaceScan, SyntheticExperiment};
use crate::error::{Error, Result};
use crate::model::{FrequencyGrid, LoadCase, MeasuredCase, MeasurementSet};

pub const FORMAT: &str = "pem-detect/measurements";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Parts {
    re: f64,
    im: f64,
}

impl From<Complex64> for Parts {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<Parts> for Complex64 {
    fn from(p: Parts) -> Self {
        Complex64::new(p.re, p.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    load: LoadCase,
    /// `[φ′(0), φ′(1)]` per frequency.
    m: Vec<[Parts; 2]>,
    /// `[μ₀, μ₁]` per frequency.
    g: Vec<[Parts; 2]>,
}

/// On-disk form of a [`MeasurementSet`]. Floats are written in shortest
/// round-trip form, so reading a file back reproduces the set bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    format: String,
    version: u32,
    beta: f64,
    omegas: Vec<f64>,
    /// Relative amplitude of the noise added to `m`, zero for clean data.
    noise_amplitude: f64,
    cases: Vec<CaseFile>,
}

fn pair(v: &[Complex64; 2]) -> [Parts; 2] {
    [v[0].into(), v[1].into()]
}

fn unpair(v: &[Parts; 2]) -> [Complex64; 2] {
    [v[0].into(), v[1].into()]
}

impl MeasurementFile {
    pub fn from_set(set: &MeasurementSet, noise_amplitude: f64) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            beta: set.beta,
            omegas: set.grid.omegas().to_vec(),
            noise_amplitude,
            cases: set
                .cases
                .iter()
                .map(|c| CaseFile {
                    load: c.load,
                    m: c.m.iter().map(pair).collect(),
                    g: c.g.iter().map(pair).collect(),
                })
                .collect(),
        }
    }

    pub fn into_set(self) -> Result<MeasurementSet> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Parse(format!(
                "unsupported measurement file {} v{}",
                self.format, self.version
            )));
        }
        let set = MeasurementSet {
            grid: FrequencyGrid::new(self.omegas)?,
            beta: self.beta,
            cases: self
                .cases
                .into_iter()
                .map(|c| MeasuredCase {
                    load: c.load,
                    m: c.m.iter().map(unpair).collect(),
                    g: c.g.iter().map(unpair).collect(),
                })
                .collect(),
        };
        set.validate()?;
        Ok(set)
    }
}

pub fn write_measurements(path: &Path, set: &MeasurementSet, noise_amplitude: f64) -> Result<()> {
    let file = MeasurementFile::from_set(set, noise_amplitude);
    write_json(path, &file)
}

pub fn read_measurements(path: &Path) -> Result<MeasurementSet> {
    let text = std::fs::read_to_string(path)?;
    let file: MeasurementFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.into_set()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Adds complex Gaussian noise to every measured slope:
/// `m ← m + a·|m|·(n₁ + i n₂)/√2` with standard normal `n₁, n₂`.
pub fn add_noise(set: &mut MeasurementSet, amplitude: f64, rng: &mut ChaCha8Rng) {
    if amplitude == 0.0 {
        return;
    }
    let scale = amplitude / std::f64::consts::SQRT_2;
    for case in &mut set.cases {
        for m in &mut case.m {
            for v in m.iter_mut() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *v += Complex64::new(re, im) * (scale * v.norm());
            }
        }
    }
}

/// Synthetic experiment with seeded measurement noise. Each tuning gets its
/// own noise stream so repeated measurements at one `β` agree.
pub struct NoisyExperiment {
    pub inner: SyntheticExperiment,
    pub amplitude: f64,
    pub seed: u64,
}

impl NoisyExperiment {
    pub fn rng_for(&self, beta: f64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ beta.to_bits().rotate_left(29))
    }
}

impl Experiment for NoisyExperiment {
    fn measure(&self, beta: f64) -> Result<MeasurementSet> {
        let mut set = self.inner.measure(beta)?;
        add_noise(&mut set, self.amplitude, &mut self.rng_for(beta));
        Ok(set)
    }
}

/// Long-form tensor, one row per cell: `d,x,beta,log10_E,in_sublevel`.
pub fn write_scan_csv(path: &Path, scan: &SurfaceScan) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["d", "x", "beta", "log10_E", "in_sublevel"])
        .map_err(csv_err)?;
    for (b, beta) in scan.axes.beta.iter().enumerate() {
        for (i, d) in scan.axes.d.iter().enumerate() {
            for (j, x) in scan.axes.x.iter().enumerate() {
                let v = scan.at(b, i, j);
                w.write_record([
                    d.to_string(),
                    x.to_string(),
                    beta.to_string(),
                    if v.is_finite() { v.to_string() } else { "NaN".into() },
                    scan.in_sublevel(b, i, j).to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-tuning sublevel area: `beta,area,valid_cells`.
pub fn write_areas_csv(path: &Path, scan: &SurfaceScan) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["beta", "area", "valid_cells"]).map_err(csv_err)?;
    let per = scan.axes.d.len() * scan.axes.x.len();
    for (b, beta) in scan.axes.beta.iter().enumerate() {
        let valid = scan.log10_e[b * per..(b + 1) * per]
            .iter()
            .filter(|v| v.is_finite())
            .count();
        w.write_record([beta.to_string(), scan.areas[b].to_string(), valid.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}
