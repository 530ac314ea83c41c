//! Experiment configuration (TOML).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{count_wells, wells_of};
use crate::potential::{HelixParams, PotentialModel, RegularizedPotential, DEFAULT_S_CUT};
use crate::spectral::{DEFAULT_ORDER, DEFAULT_POINTS};
use crate::tdse::{GaussianSpec, Grid, PropagationConfig};

pub const DEFAULT_T_FINAL: f64 = 1000.0;

/// Default time step: 0.02 for light (M < 10) and 0.05 for heavy systems.
pub fn default_dt(mass: f64) -> f64 {
    if mass >= 10.0 {
        0.05
    } else {
        0.02
    }
}

/// Steps per unit time, so observables are recorded about once per time unit.
pub fn default_stride(dt: f64) -> usize {
    (1.0 / dt).round().max(1.0) as usize
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Helical,
    /// Straight-line `1/|s|` reference; the helix is kept for the landscape.
    Coulomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelixSection {
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSection {
    pub s_cut: f64,
}

impl Default for RegularizationSection {
    fn default() -> Self {
        RegularizationSection {
            s_cut: DEFAULT_S_CUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable_stride: Option<usize>,
    /// Fail the run (exit status 4) when the packet reaches the grid edge.
    #[serde(default)]
    pub abort_on_contamination: bool,
}

impl Default for PropagationSection {
    fn default() -> Self {
        PropagationSection {
            enabled: true,
            dt: None,
            t_final: DEFAULT_T_FINAL,
            snapshot_times: Vec::new(),
            observable_stride: None,
            abort_on_contamination: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Well (1-based, innermost = 1) whose spectrum goes to `spectrum.csv`.
    #[serde(default = "one")]
    pub well: usize,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            enabled: true,
            well: 1,
            n_points: DEFAULT_POINTS,
            order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "one_f64")]
    pub mass: f64,
    pub helix: HelixSection,
    #[serde(default)]
    pub regularization: RegularizationSection,
    pub grid: Grid,
    pub wavepacket: GaussianSpec,
    #[serde(default)]
    pub propagation: PropagationSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

fn default_t_final() -> f64 {
    DEFAULT_T_FINAL
}

fn default_points() -> usize {
    DEFAULT_POINTS
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

/// Parse, fill defaults and validate.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.fill_defaults();
    config.validate()?;
    Ok(config)
}

pub fn to_toml(config: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(config).map_err(|e| Error::Config(e.to_string()))
}

impl ExperimentConfig {
    pub fn fill_defaults(&mut self) {
        let dt = *self.propagation.dt.get_or_insert(default_dt(self.mass));
        self.propagation
            .observable_stride
            .get_or_insert(default_stride(dt));
    }

    pub fn params(&self) -> Result<HelixParams> {
        HelixParams::new(self.helix.h, self.helix.r, self.mass)
    }

    pub fn model(&self) -> Result<PotentialModel> {
        Ok(match self.model {
            ModelKind::Helical => PotentialModel::Helical(self.params()?),
            ModelKind::Coulomb => PotentialModel::Coulomb,
        })
    }

    pub fn potential(&self) -> Result<RegularizedPotential> {
        RegularizedPotential::new(self.model()?, self.regularization.s_cut)
    }

    pub fn propagation_config(&self) -> PropagationConfig {
        let dt = self.propagation.dt.unwrap_or_else(|| default_dt(self.mass));
        PropagationConfig {
            dt,
            t_final: self.propagation.t_final,
            snapshot_times: self.propagation.snapshot_times.clone(),
            observable_stride: self
                .propagation
                .observable_stride
                .unwrap_or_else(|| default_stride(dt)),
        }
    }

    /// Checks every component invariant, naming the one violated.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        self.potential()?;
        self.grid.validate()?;
        let g = &self.wavepacket;
        if !(g.delta_s > 0.0) {
            return Err(Error::Config(format!(
                "wavepacket.delta_s must be positive, got {}",
                g.delta_s
            )));
        }
        if g.s0 - 8.0 * g.delta_s < self.grid.s_min || g.s0 + 8.0 * g.delta_s > self.grid.s_max {
            return Err(Error::PacketTouchesBoundary {
                s0: g.s0,
                delta_s: g.delta_s,
            });
        }
        if self.spectrum.n_points < 101
            || self.spectrum.order < 2
            || !self.spectrum.order.is_multiple_of(2)
        {
            return Err(Error::Config(format!(
                "spectrum needs n_points >= 101 and an even order >= 2, got {:?}",
                self.spectrum
            )));
        }
        if self.spectrum.well == 0 {
            return Err(Error::Config("spectrum.well is 1-based".into()));
        }
        if self.propagation.enabled {
            self.propagation_config().validate()?;
            if self.model == ModelKind::Helical && count_wells(&params) > 0 {
                let wells = wells_of(&params)?;
                let outer = wells.last().map_or(0.0, |w| w.right_boundary);
                if self.grid.s_max < outer || self.grid.s_min > wells[0].left_boundary {
                    return Err(Error::Config(format!(
                        "grid [{}, {}] does not cover the well region [{:.3}, {outer:.3}]",
                        self.grid.s_min, self.grid.s_max, wells[0].left_boundary
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[helix]
h = 5.8
R = 4.0

[grid]
s_min = -150.0
s_max = 1000.0
n_points = 2301

[wavepacket]
s0 = 220.0
delta_s = 4.0
"#;

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.mass, 1.0);
        assert_eq!(c.propagation.dt, Some(0.02));
        assert_eq!(c.propagation.observable_stride, Some(50));
        assert_eq!(c.regularization.s_cut, DEFAULT_S_CUT);
        assert_eq!(c.wavepacket.p0, 0.0);
        assert_eq!(c.model, ModelKind::Helical);
    }

    #[test]
    fn heavy_default_dt() {
        let c = parse_config(&format!("mass = 10.0\n{MINIMAL}")).unwrap();
        assert_eq!(c.propagation.dt, Some(0.05));
        assert_eq!(c.propagation.observable_stride, Some(20));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("delta_s = 4.0", "delta_s = 4.0\nsigma = 2.0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("sigma"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let again = parse_config(&to_toml(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn invariant_violations() {
        let bad_packet = MINIMAL.replace("s0 = 220.0", "s0 = 990.0");
        assert!(matches!(
            parse_config(&bad_packet),
            Err(Error::PacketTouchesBoundary { .. })
        ));
        let short_grid = MINIMAL
            .replace("s_max = 1000.0", "s_max = 50.0")
            .replace("s0 = 220.0", "s0 = 0.0");
        let err = parse_config(&short_grid).unwrap_err().to_string();
        assert!(err.contains("well region"), "{err}");
        let bad_helix = MINIMAL.replace("h = 5.8", "h = -1.0");
        assert!(matches!(
            parse_config(&bad_helix),
            Err(Error::InvalidParams(_))
        ));
    }
}
