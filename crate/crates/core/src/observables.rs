//! Well occupations, intrawell moments and density snapshots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::WellSegment;
use crate::tdse::{Grid, PropagationSink, WaveFunction};

/// Occupation below which intrawell moments are not reported.
pub const DEFAULT_OCCUPANCY_FLOOR: f64 = 1e-4;

/// Interpolation nodes per cell in [`interval_weights`].
const STENCIL: usize = 8;

/// `∫_0^θ ℓ_i(u) du` for the Lagrange basis on the integer nodes
/// `first, first + 1, …` (the cell is `[0, 1]`).
fn partial_cell(first: i64, theta: f64) -> [f64; STENCIL] {
    let nodes: [f64; STENCIL] = std::array::from_fn(|i| (first + i as i64) as f64);
    std::array::from_fn(|i| {
        // Monomial coefficients of ℓ_i, lowest degree first.
        let mut c = [0.0; STENCIL];
        c[0] = 1.0;
        let mut degree = 0;
        for (k, &x) in nodes.iter().enumerate() {
            if k == i {
                continue;
            }
            let scale = 1.0 / (nodes[i] - x);
            for d in (0..=degree).rev() {
                c[d + 1] += c[d] * scale;
                c[d] *= -x * scale;
            }
            degree += 1;
        }
        c.iter()
            .enumerate()
            .map(|(d, a)| a * theta.powi(d as i32 + 1) / (d + 1) as f64)
            .sum()
    })
}

/// Weights `w` with `Σ w[j] f(s_j) ≈ ∫_a^b f`, from a piecewise eighth-order
/// interpolant. Points further than four cells from both ends weigh exactly
/// the spacing, weights of adjacent intervals add up to those of their union,
/// and ends that fall between grid points cost no accuracy.
pub fn interval_weights(grid: &Grid, a: f64, b: f64) -> Vec<f64> {
    let n = grid.n_points;
    let d = grid.spacing();
    let mut w = vec![0.0; n];
    let locate = |x: f64| {
        let u = ((x - grid.s_min) / d).clamp(0.0, (n - 1) as f64);
        let j = (u.floor() as usize).min(n - 2);
        (j, u - j as f64)
    };
    let mut add = |cell: usize, theta: f64, sign: f64| {
        let first = (cell as i64 - (STENCIL as i64 / 2 - 1)).clamp(0, (n - STENCIL) as i64);
        let weights = partial_cell(first - cell as i64, theta);
        for (i, x) in weights.iter().enumerate() {
            w[first as usize + i] += sign * d * x;
        }
    };
    let ((ja, ta), (jb, tb)) = (locate(a), locate(b));
    if (jb, tb) <= (ja, ta) {
        return vec![0.0; n];
    }
    for cell in ja..jb {
        add(cell, 1.0, 1.0);
    }
    add(ja, ta, -1.0);
    add(jb, tb, 1.0);
    w
}

/// Interval weights of every well on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WellQuadrature {
    pub grid: Grid,
    centres: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl WellQuadrature {
    pub fn new(grid: &Grid, wells: &[WellSegment]) -> Self {
        WellQuadrature {
            grid: *grid,
            centres: wells.iter().map(|w| w.minimum_position).collect(),
            weights: wells
                .iter()
                .map(|w| interval_weights(grid, w.left_boundary, w.right_boundary))
                .collect(),
        }
    }

    pub fn occupations(&self, psi: &WaveFunction) -> Occupations {
        let rho = psi.density();
        let iwo: Vec<f64> = self.weights.iter().map(|w| dot(w, &rho)).collect();
        let outside = (psi.norm() - iwo.iter().sum::<f64>()).max(0.0);
        Occupations { iwo, outside }
    }

    /// Moments of well `k`, taken about its minimum to avoid cancellation.
    pub fn moments(&self, psi: &WaveFunction, k: usize, occupancy_floor: f64) -> IntrawellMoments {
        let c = self.centres[k];
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, (w, z)) in self.weights[k].iter().zip(&psi.amplitudes).enumerate() {
            let x = psi.grid.coord(i) - c;
            let p = w * z.norm_sqr();
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        if m0 < occupancy_floor || m0 <= 0.0 {
            return IntrawellMoments {
                iwo: m0,
                mean: f64::NAN,
                std: f64::NAN,
                valid: false,
            };
        }
        let mean = m1 / m0;
        IntrawellMoments {
            iwo: m0,
            mean: c + mean,
            std: (m2 / m0 - mean * mean).max(0.0).sqrt(),
            valid: true,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupations {
    /// IWO per well, innermost first.
    pub iwo: Vec<f64>,
    /// Probability outside every well.
    pub outside: f64,
}

pub fn well_occupations(psi: &WaveFunction, wells: &[WellSegment]) -> Occupations {
    WellQuadrature::new(&psi.grid, wells).occupations(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrawellMoments {
    pub iwo: f64,
    pub mean: f64,
    pub std: f64,
    /// False when the well holds less than the occupancy floor; mean and std
    /// are then NaN.
    pub valid: bool,
}

/// Renormalized `⟨s⟩` and spread over one well.
pub fn intrawell_moments(
    psi: &WaveFunction,
    well: &WellSegment,
    occupancy_floor: f64,
) -> IntrawellMoments {
    WellQuadrature::new(&psi.grid, std::slice::from_ref(well)).moments(psi, 0, occupancy_floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub s: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub abs2: Vec<f64>,
}

impl SnapshotRecord {
    pub fn from_wave(t: f64, psi: &WaveFunction) -> Self {
        SnapshotRecord {
            t,
            s: psi.grid.coords(),
            re: psi.amplitudes.iter().map(|z| z.re).collect(),
            im: psi.amplitudes.iter().map(|z| z.im).collect(),
            abs2: psi.density(),
        }
    }

    /// Riemann sum of the density, assuming a uniform grid.
    pub fn norm(&self) -> f64 {
        match self.s.as_slice() {
            [first, .., last] => {
                self.abs2.iter().sum::<f64>() * (last - first) / (self.s.len() - 1) as f64
            }
            _ => 0.0,
        }
    }
}

/// Time series of per-well observables; per-well vectors are indexed
/// `[well][record]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservablesSeries {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub outside: Vec<f64>,
    pub iwo: Vec<Vec<f64>>,
    pub mean_s: Vec<Vec<f64>>,
    pub std_s: Vec<Vec<f64>>,
    pub valid: Vec<Vec<bool>>,
}

impl ObservablesSeries {
    pub fn with_wells(n_wells: usize) -> Self {
        ObservablesSeries {
            iwo: vec![Vec::new(); n_wells],
            mean_s: vec![Vec::new(); n_wells],
            std_s: vec![Vec::new(); n_wells],
            valid: vec![Vec::new(); n_wells],
            ..Default::default()
        }
    }

    pub fn n_wells(&self) -> usize {
        self.iwo.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest IWO of well `k` over the series.
    pub fn peak(&self, k: usize) -> f64 {
        self.iwo[k].iter().copied().fold(0.0, f64::max)
    }
}

/// Earliest recorded time at which each well's IWO reaches `level`.
pub fn first_passage_times(series: &ObservablesSeries, level: f64) -> Vec<Option<f64>> {
    series
        .iwo
        .iter()
        .map(|iwo| {
            iwo.iter()
                .position(|&p| p >= level)
                .map(|i| series.times[i])
        })
        .collect()
}

/// Checks the occupation bounds for one record.
fn check_record(
    occ: &Occupations,
    moments: &[IntrawellMoments],
    wells: &[WellSegment],
    norm: f64,
) -> Result<()> {
    let tol = 1e-12;
    if let Some(k) = occ
        .iwo
        .iter()
        .position(|&p| !(-tol..=1.0 + tol).contains(&p))
    {
        return Err(Error::InvariantViolation(format!(
            "iwo[{k}] = {} outside [0, 1]",
            occ.iwo[k]
        )));
    }
    let total: f64 = occ.iwo.iter().sum();
    if total > norm + tol {
        return Err(Error::InvariantViolation(format!(
            "sum of IWO {total} exceeds norm {norm}"
        )));
    }
    for (k, (m, w)) in moments.iter().zip(wells).enumerate() {
        if m.valid && !(m.mean >= w.left_boundary && m.mean <= w.right_boundary && m.std >= 0.0) {
            return Err(Error::InvariantViolation(format!(
                "moments of well {} out of range: {m:?}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Sink collecting [`ObservablesSeries`] and snapshots during propagation.
#[derive(Debug, Clone)]
pub struct Recorder {
    pub wells: Vec<WellSegment>,
    pub occupancy_floor: f64,
    pub series: ObservablesSeries,
    pub snapshots: Vec<SnapshotRecord>,
    quadrature: Option<WellQuadrature>,
}

impl Recorder {
    pub fn new(wells: Vec<WellSegment>, occupancy_floor: f64) -> Self {
        let series = ObservablesSeries::with_wells(wells.len());
        Recorder {
            wells,
            occupancy_floor,
            series,
            snapshots: Vec::new(),
            quadrature: None,
        }
    }
}

impl PropagationSink for Recorder {
    fn observe(&mut self, t: f64, psi: &WaveFunction, energy: f64) -> Result<()> {
        let norm = psi.norm();
        if self.quadrature.as_ref().is_none_or(|q| q.grid != psi.grid) {
            self.quadrature = Some(WellQuadrature::new(&psi.grid, &self.wells));
        }
        let q = self.quadrature.as_ref().unwrap();
        let occ = q.occupations(psi);
        let moments: Vec<IntrawellMoments> = (0..self.wells.len())
            .map(|k| q.moments(psi, k, self.occupancy_floor))
            .collect();
        check_record(&occ, &moments, &self.wells, norm)?;
        let s = &mut self.series;
        s.times.push(t);
        s.norm.push(norm);
        s.energy.push(energy);
        s.outside.push(occ.outside);
        for (k, (p, m)) in occ.iwo.iter().zip(&moments).enumerate() {
            s.iwo[k].push(*p);
            s.mean_s[k].push(m.mean);
            s.std_s[k].push(m.std);
            s.valid[k].push(m.valid);
        }
        Ok(())
    }

    fn snapshot(&mut self, _index: usize, t: f64, psi: &WaveFunction) -> Result<()> {
        self.snapshots.push(SnapshotRecord::from_wave(t, psi));
        Ok(())
    }
}
