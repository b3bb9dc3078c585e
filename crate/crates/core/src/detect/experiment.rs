use crate::error::{Error, Result};
use crate::model::{DamageProfile, FrequencyGrid, LoadCase, MeasurementSet, SystemParams};
use crate::spectral::synthesize_measurements;

/// Source of electric measurements for a given line tuning `β`.
///
/// Tuning the line changes the physical experiment, so every `β` comes with
/// its own data. The mechanical state under test is fixed.
pub trait Experiment: Sync {
    fn measure(&self, beta: f64) -> Result<MeasurementSet>;
}

/// Measurements computed from the model at a known damage profile.
#[derive(Debug, Clone)]
pub struct SyntheticExperiment {
    pub params: SystemParams,
    pub truth: DamageProfile,
    pub grid: FrequencyGrid,
    pub loads: Vec<LoadCase>,
}

impl Experiment for SyntheticExperiment {
    fn measure(&self, beta: f64) -> Result<MeasurementSet> {
        let s = synthesize_measurements(
            &self.params.with_beta(beta),
            &self.truth,
            &self.grid,
            &self.loads,
        )?;
        Ok(s.set)
    }
}

/// Previously recorded measurement sets, one per tuning.
#[derive(Debug, Clone)]
pub struct RecordedExperiment {
    sets: Vec<MeasurementSet>,
}

impl RecordedExperiment {
    pub fn new(sets: Vec<MeasurementSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidInput("no recorded measurement sets".into()));
        }
        for s in &sets {
            s.validate()?;
        }
        Ok(Self { sets })
    }

    pub fn single(set: MeasurementSet) -> Result<Self> {
        Self::new(vec![set])
    }

    pub fn betas(&self) -> Vec<f64> {
        self.sets.iter().map(|s| s.beta).collect()
    }
}

impl Experiment for RecordedExperiment {
    fn measure(&self, beta: f64) -> Result<MeasurementSet> {
        self.sets
            .iter()
            .find(|s| (s.beta - beta).abs() <= 1e-12 * beta.abs().max(1.0))
            .cloned()
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no measurements recorded at beta = {beta} (available: {:?})",
                    self.betas()
                ))
            })
    }
}
