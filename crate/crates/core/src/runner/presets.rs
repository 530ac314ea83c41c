//! Named scenarios.

use serde::Serialize;

use super::config::{
    ExperimentConfig, HelixSection, ModelKind, OutputSection, PropagationSection,
    RegularizationSection, SpectrumSection,
};
use crate::error::{Error, Result};
use crate::tdse::{GaussianSpec, Grid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub caption: &'static str,
    pub config: ExperimentConfig,
}

struct Row {
    name: &'static str,
    caption: &'static str,
    model: ModelKind,
    h: f64,
    r: f64,
    mass: f64,
    s0: f64,
    delta_s: f64,
    p0: f64,
    grid: (f64, f64, usize),
    snapshots: &'static [f64],
    t_final: f64,
}

const ROWS: &[Row] = &[
    Row {
        name: "fig2",
        caption: "Straight-line Coulomb reference: packet at rest at s0 = 220 reflecting off 1/|s|",
        model: ModelKind::Coulomb,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 220.0,
        delta_s: 4.0,
        p0: 0.0,
        grid: (-150.0, 1000.0, 2301),
        snapshots: &[0.0, 400.0, 1000.0],
        t_final: 1000.0,
    },
    Row {
        name: "fig3",
        caption: "Packet at rest at s0 = 220 outside the three wells of h = 5.8, R = 4; wells fill from the outside in",
        model: ModelKind::Helical,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 220.0,
        delta_s: 4.0,
        p0: 0.0,
        grid: (-150.0, 1000.0, 2301),
        snapshots: &[0.0, 500.0, 700.0, 1000.0],
        t_final: 1000.0,
    },
    Row {
        name: "fig4",
        caption: "Packet centred on the second minimum (s0 = 40.99, width 6), about a tenth of it in the third well",
        model: ModelKind::Helical,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 40.99,
        delta_s: 6.0,
        p0: 0.0,
        grid: (-150.0, 1000.0, 2301),
        snapshots: &[0.0, 140.0, 230.0, 400.0, 1000.0],
        t_final: 1000.0,
    },
    Row {
        name: "fig5",
        caption: "Packet in the innermost well (s0 = 13.63, width 4.5); slow leakage over t = 2000",
        model: ModelKind::Helical,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 13.63,
        delta_s: 4.5,
        p0: 0.0,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[0.0, 200.0],
        t_final: 2000.0,
    },
    Row {
        name: "fig6",
        caption: "Inbound packet from s0 = 220 with p0 = -0.154; reflected before the Coulomb wall",
        model: ModelKind::Helical,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 220.0,
        delta_s: 4.5,
        p0: -0.154,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[550.0, 1000.0],
        t_final: 1000.0,
    },
    Row {
        name: "fig7",
        caption: "Fast inbound packet from s0 = 220 with p0 = -0.8; partly transmitted through the capped wall",
        model: ModelKind::Helical,
        h: 5.8,
        r: 4.0,
        mass: 1.0,
        s0: 220.0,
        delta_s: 4.5,
        p0: -0.8,
        grid: (-500.0, 1500.0, 4001),
        snapshots: &[180.0, 310.0],
        t_final: 310.0,
    },
    Row {
        name: "fig8",
        caption: "Packet at rest at s0 = 350 outside the six wells of h = 10, R = 10",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 1.0,
        s0: 350.0,
        delta_s: 4.0,
        p0: 0.0,
        grid: (-150.0, 2000.0, 4301),
        snapshots: &[600.0, 750.0, 1100.0, 1500.0],
        t_final: 1500.0,
    },
    Row {
        name: "fig9",
        caption: "Packet in the innermost of six wells (s0 = 32.5, width 4); intrawell moments",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 1.0,
        s0: 32.5,
        delta_s: 4.0,
        p0: 0.0,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[0.0, 100.0, 200.0, 1000.0],
        t_final: 1000.0,
    },
    Row {
        name: "fig10",
        caption: "Inbound packet from s0 = 350 with p0 = -0.3 on h = 10, R = 10",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 1.0,
        s0: 350.0,
        delta_s: 4.0,
        p0: -0.3,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[940.0, 1500.0],
        t_final: 1500.0,
    },
    Row {
        name: "fig11",
        caption: "Heavy particles (M = 10) at rest at s0 = 350, width 1.2, on h = 10, R = 10",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 10.0,
        s0: 350.0,
        delta_s: 1.2,
        p0: 0.0,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[1800.0, 2500.0, 5000.0],
        t_final: 5000.0,
    },
    Row {
        name: "fig12",
        caption: "Heavy particles (M = 10) in the second well, s0 = 98, width 1.2",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 10.0,
        s0: 98.0,
        delta_s: 1.2,
        p0: 0.0,
        grid: (-150.0, 1500.0, 3301),
        snapshots: &[3000.0],
        t_final: 5000.0,
    },
    Row {
        name: "fig13",
        caption: "Heavy particles (M = 10) in the innermost well, s0 = 32.5, width 1.2",
        model: ModelKind::Helical,
        h: 10.0,
        r: 10.0,
        mass: 10.0,
        s0: 32.5,
        delta_s: 1.2,
        p0: 0.0,
        grid: (-500.0, 1500.0, 4001),
        snapshots: &[4100.0],
        t_final: 4100.0,
    },
];

fn build(row: &Row) -> ExperimentConfig {
    let mut config = ExperimentConfig {
        model: row.model,
        mass: row.mass,
        helix: HelixSection { h: row.h, r: row.r },
        regularization: RegularizationSection::default(),
        grid: Grid {
            s_min: row.grid.0,
            s_max: row.grid.1,
            n_points: row.grid.2,
        },
        wavepacket: GaussianSpec {
            s0: row.s0,
            delta_s: row.delta_s,
            p0: row.p0,
        },
        propagation: PropagationSection {
            t_final: row.t_final,
            snapshot_times: row.snapshots.to_vec(),
            ..Default::default()
        },
        spectrum: SpectrumSection::default(),
        output: OutputSection::default(),
    };
    config.fill_defaults();
    config
}

pub fn list_presets() -> Vec<Preset> {
    ROWS.iter()
        .map(|row| Preset {
            name: row.name,
            caption: row.caption,
            config: build(row),
        })
        .collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ROWS.iter()
        .find(|r| r.name == name)
        .map(build)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}
