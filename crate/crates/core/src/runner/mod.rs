//! Configuration, presets, experiment execution and persistence.

pub mod config;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{parse_config, to_toml, ExperimentConfig, ModelKind};
pub use presets::{list_presets, preset, Preset};

use crate::error::{Error, Result};
use crate::landscape::{find_extrema, segment_wells, ExtremaSet, WellSegment};
use crate::observables::{Recorder, DEFAULT_OCCUPANCY_FLOOR};
use crate::spectral::spectra_per_well;
use crate::tdse::{init_gaussian, propagate};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "HELIXQD_OUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "helixqd-out";

pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT), PathBuf::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Completed,
    Failed { stage: String, error: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub beta: f64,
    pub ratio: f64,
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
    pub wells: Vec<WellSegment>,
    /// Bound states of each isolated well, innermost first.
    pub bound_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationSummary {
    pub steps: usize,
    pub records: usize,
    pub realized_snapshot_times: Vec<f64>,
    pub final_norm: f64,
    pub norm_drift: f64,
    pub relative_energy_drift: f64,
    pub max_edge_density: f64,
    pub contaminated_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    pub output_directory: PathBuf,
    pub config: ExperimentConfig,
    pub derived: Derived,
    pub propagation: Option<PropagationSummary>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn well_count(&self) -> usize {
        self.derived.wells.len()
    }
}

/// Where a config writes: its own `output.directory`, else `<root>/<name>`.
pub fn output_dir(config: &ExperimentConfig, name: &str) -> PathBuf {
    config
        .output
        .directory
        .clone()
        .unwrap_or_else(|| default_output_root().join(name))
}

/// Run every stage and write all artifacts into `output.directory`
/// (or `<default root>/run`). On failure a manifest naming the failed
/// stage is still written.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    let dir = output_dir(config, "run");
    let started = Instant::now();
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: RunStatus::Running,
        output_directory: dir.clone(),
        config: config.clone(),
        derived: Derived::default(),
        propagation: None,
        wall_clock_seconds: 0.0,
    };
    let result = std::fs::create_dir_all(&dir)
        .map_err(|e| ("output", Error::io(&dir, e)))
        .and_then(|_| execute(config, &dir, &mut manifest));
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    match result {
        Ok(()) => {
            manifest.status = RunStatus::Completed;
            write_manifest(&dir, &manifest)?;
            Ok(manifest)
        }
        Err((stage, e)) => {
            log::error!("run failed during {stage}: {e}");
            manifest.status = RunStatus::Failed {
                stage: stage.to_string(),
                error: e.to_string(),
            };
            if let Err(write_err) = write_manifest(&dir, &manifest) {
                log::error!("could not write partial manifest: {write_err}");
            }
            Err(e)
        }
    }
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    let path = dir.join("manifest.json");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(path, e))
}

type Staged<T> = std::result::Result<T, (&'static str, Error)>;

fn stage<T>(name: &'static str, r: Result<T>) -> Staged<T> {
    r.map_err(|e| (name, e))
}

fn execute(config: &ExperimentConfig, dir: &Path, manifest: &mut RunManifest) -> Staged<()> {
    stage("config", config.validate())?;
    let params = stage("config", config.params())?;

    let extrema = match config.model {
        ModelKind::Helical => find_extrema(&params, f64::INFINITY),
        ModelKind::Coulomb => ExtremaSet {
            params,
            minima: vec![],
            maxima: vec![],
        },
    };
    let wells = if extrema.is_empty() {
        Vec::new()
    } else {
        stage("landscape", segment_wells(&extrema))?
    };
    manifest.derived = Derived {
        beta: params.beta(),
        ratio: params.ratio(),
        minima: extrema.minima.clone(),
        maxima: extrema.maxima.clone(),
        wells: wells.clone(),
        bound_counts: None,
    };
    stage(
        "output",
        output::write_file(&dir.join("extrema.csv"), |w| {
            output::write_extrema(w, &extrema)
        }),
    )?;

    if config.spectrum.enabled && !wells.is_empty() {
        let spectra = stage(
            "spectrum",
            spectra_per_well(&params, config.spectrum.n_points, config.spectrum.order),
        )?;
        manifest.derived.bound_counts = Some(spectra.iter().map(|s| s.bound_count).collect());
        let selected = stage(
            "spectrum",
            spectra.get(config.spectrum.well - 1).ok_or_else(|| {
                Error::Config(format!(
                    "spectrum.well = {} but only {} wells",
                    config.spectrum.well,
                    spectra.len()
                ))
            }),
        )?;
        stage(
            "output",
            output::write_file(&dir.join("spectrum.csv"), |w| {
                output::write_spectrum(w, selected)
            }),
        )?;
    }

    if !config.propagation.enabled {
        return Ok(());
    }
    let reg = stage("propagation", config.potential())?;
    let psi0 = stage(
        "propagation",
        init_gaussian(&config.grid, &config.wavepacket),
    )?;
    let potential = reg.sample(&config.grid.coords());
    let prop = config.propagation_config();
    let mut recorder = Recorder::new(wells, DEFAULT_OCCUPANCY_FLOOR);
    let (_, report) = stage(
        "propagation",
        propagate(&psi0, &potential, params.mass, &prop, &mut recorder),
    )?;

    let series = &recorder.series;
    let drift = |xs: &[f64], relative: bool| {
        let x0 = xs[0];
        let scale = if relative {
            x0.abs().max(f64::MIN_POSITIVE)
        } else {
            1.0
        };
        xs.iter()
            .map(|x| (x - x0).abs() / scale)
            .fold(0.0, f64::max)
    };
    manifest.propagation = Some(PropagationSummary {
        steps: report.steps,
        records: series.len(),
        realized_snapshot_times: report.snapshot_times.clone(),
        final_norm: *series.norm.last().unwrap_or(&f64::NAN),
        norm_drift: drift(&series.norm, false),
        relative_energy_drift: drift(&series.energy, true),
        max_edge_density: report.max_edge_density,
        contaminated_at: report.contaminated_at,
    });
    stage(
        "output",
        output::write_file(&dir.join("observables.csv"), |w| {
            output::write_observables(w, series)
        }),
    )?;
    for (i, snap) in recorder.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{i}.csv"));
        stage(
            "output",
            output::write_file(&path, |w| output::write_snapshot(w, snap)),
        )?;
    }
    if let (true, Some(t)) = (
        config.propagation.abort_on_contamination,
        report.contaminated_at,
    ) {
        return Err((
            "propagation",
            Error::BoundaryContamination {
                t,
                density: report.max_edge_density,
            },
        ));
    }
    Ok(())
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// `h/R`, keeping `R`.
    #[serde(rename = "helix.ratio")]
    Ratio,
    /// `R`, rescaling `h` so the ratio is unchanged.
    #[serde(rename = "helix.R")]
    Radius,
    /// `h`, keeping `R`.
    #[serde(rename = "helix.h")]
    Pitch,
    #[serde(rename = "mass")]
    Mass,
    #[serde(rename = "wavepacket.s0")]
    S0,
    #[serde(rename = "wavepacket.p0")]
    P0,
}

impl SweepParameter {
    pub const NAMES: [&'static str; 6] = [
        "helix.ratio",
        "helix.R",
        "helix.h",
        "mass",
        "wavepacket.s0",
        "wavepacket.p0",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn apply(self, config: &mut ExperimentConfig, value: f64) {
        let helix = &mut config.helix;
        match self {
            SweepParameter::Ratio => helix.h = value * helix.r,
            SweepParameter::Radius => {
                helix.h *= value / helix.r;
                helix.r = value;
            }
            SweepParameter::Pitch => helix.h = value,
            SweepParameter::Mass => config.mass = value,
            SweepParameter::S0 => config.wavepacket.s0 = value,
            SweepParameter::P0 => config.wavepacket.p0 = value,
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use SweepParameter::*;
        [Ratio, Radius, Pitch, Mass, S0, P0]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown sweep parameter `{s}`; expected one of {:?}",
                    Self::NAMES
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Skip spectra and propagation; only extrema and wells.
    pub landscape_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub index: usize,
    pub value: f64,
    pub directory: PathBuf,
    pub result: std::result::Result<RunManifest, String>,
}

/// Independent runs under `root/run_<i>`, optionally on `jobs` threads, plus
/// an `index.csv`. Individual failures are recorded, not propagated.
pub fn sweep(
    base: &ExperimentConfig,
    spec: &SweepSpec,
    root: &Path,
    jobs: Option<usize>,
) -> Result<Vec<SweepOutcome>> {
    if let Some(v) = spec.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("sweep value {v} is not finite")));
    }
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let run_one = |(index, &value): (usize, &f64)| {
        let mut config = base.clone();
        spec.parameter.apply(&mut config, value);
        if spec.landscape_only {
            config.propagation.enabled = false;
            config.spectrum.enabled = false;
        }
        let directory = root.join(format!("run_{index:03}"));
        config.output.directory = Some(directory.clone());
        let result = run_experiment(&config).map_err(|e| e.to_string());
        SweepOutcome {
            index,
            value,
            directory,
            result,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<SweepOutcome> =
        pool.install(|| spec.values.par_iter().enumerate().map(run_one).collect());
    output::write_file(&root.join("index.csv"), |w| {
        writeln!(w, "index,parameter,value,status,wells,directory,error")?;
        for o in &outcomes {
            let (status, wells, error) = match &o.result {
                Ok(m) => ("completed", m.well_count().to_string(), String::new()),
                Err(e) => ("failed", String::new(), e.replace(['\n', ','], " ")),
            };
            writeln!(
                w,
                "{},{},{},{status},{wells},{},{error}",
                o.index,
                spec.parameter.name(),
                output::fmt(o.value),
                o.directory.display()
            )?;
        }
        Ok(())
    })?;
    Ok(outcomes)
}
