//! Split-operator propagation of the relative-motion wave function.
//!
//! The kinetic step is diagonal in the orthonormal discrete sine basis over
//! the interior grid points, which pins ψ to zero at both grid ends.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid points at each edge watched for boundary contamination.
pub const EDGE_POINTS: usize = 10;
/// Edge density above which later-time data are suspect.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub s_min: f64,
    pub s_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        (self.s_max - self.s_min) / (self.n_points - 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.s_max - self.s_min
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.s_min + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.coord(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min.is_finite() && self.s_max.is_finite() && self.s_min < self.s_max) {
            return Err(Error::InvalidGrid(format!(
                "need s_min < s_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.n_points < 64 {
            return Err(Error::InvalidGrid(format!(
                "n_points {} < 64",
                self.n_points
            )));
        }
        Ok(())
    }
}

pub fn make_grid(s_min: f64, s_max: f64, n_points: usize) -> Result<Grid> {
    let grid = Grid {
        s_min,
        s_max,
        n_points,
    };
    grid.validate()?;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid,
    pub amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Riemann sum of `|ψ|² Δ`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Probability on grid points with `s < cut`.
    pub fn probability_below(&self, cut: f64) -> f64 {
        let d = self.grid.spacing();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.coord(*i) < cut)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * d
    }

    /// Normalized position mean and standard deviation.
    pub fn position_moments(&self) -> (f64, f64) {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, z) in self.amplitudes.iter().enumerate() {
            let (s, w) = (self.grid.coord(i), z.norm_sqr());
            m0 += w;
            m1 += w * s;
            m2 += w * s * s;
        }
        let mean = m1 / m0;
        (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
    }

    /// Largest density within [`EDGE_POINTS`] of either end.
    pub fn edge_density(&self) -> f64 {
        let n = self.amplitudes.len();
        let k = EDGE_POINTS.min(n);
        self.amplitudes[..k]
            .iter()
            .chain(&self.amplitudes[n - k..])
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// `⟨p⟩` from a Fourier derivative over the full grid.
    pub fn momentum_expectation(&self) -> f64 {
        let n = self.amplitudes.len();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let ifft = FftPlanner::new().plan_fft_inverse(n);
        let mut buf = self.amplitudes.clone();
        fft.process(&mut buf);
        let dk = 2.0 * PI / (n as f64 * self.grid.spacing());
        for (j, c) in buf.iter_mut().enumerate() {
            let m = if j <= n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            *c *= m * dk / n as f64;
        }
        ifft.process(&mut buf);
        let d = self.grid.spacing();
        self.amplitudes
            .iter()
            .zip(&buf)
            .map(|(a, pa)| (a.conj() * pa).re)
            .sum::<f64>()
            * d
            / self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub s0: f64,
    /// Position standard deviation.
    pub delta_s: f64,
    #[serde(default)]
    pub p0: f64,
}

/// `𝒩 exp(-(s-s0)²/(4Δs²)) exp(i p0 (s-s0))`, renormalized on the grid.
pub fn init_gaussian(grid: &Grid, spec: &GaussianSpec) -> Result<WaveFunction> {
    grid.validate()?;
    if !(spec.delta_s > 0.0) || !spec.s0.is_finite() || !spec.p0.is_finite() {
        return Err(Error::InvalidPropagation(format!(
            "bad wave packet {spec:?}"
        )));
    }
    let margin = 8.0 * spec.delta_s;
    if spec.s0 - margin < grid.s_min || spec.s0 + margin > grid.s_max {
        return Err(Error::PacketTouchesBoundary {
            s0: spec.s0,
            delta_s: spec.delta_s,
        });
    }
    let norm = (2.0 * PI * spec.delta_s * spec.delta_s).powf(-0.25);
    let mut amplitudes: Vec<Complex64> = grid
        .coords()
        .into_iter()
        .map(|s| {
            let x = s - spec.s0;
            Complex64::from_polar(
                norm * (-x * x / (4.0 * spec.delta_s * spec.delta_s)).exp(),
                spec.p0 * x,
            )
        })
        .collect();
    let n = amplitudes.len();
    amplitudes[0] = Complex64::new(0.0, 0.0);
    amplitudes[n - 1] = Complex64::new(0.0, 0.0);
    let mut psi = WaveFunction {
        grid: *grid,
        amplitudes,
    };
    let scale = psi.norm().sqrt().recip();
    psi.amplitudes.iter_mut().for_each(|z| *z *= scale);
    Ok(psi)
}

/// Orthonormal (and hence self-inverse) DST-I of length `n`, evaluated
/// through an FFT of the odd extension of length `2(n+1)`.
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        SineTransform {
            n,
            fft,
            buf: vec![Complex64::default(); 2 * (n + 1)],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform of `x` (length `n`).
    pub fn apply(&mut self, x: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        let m = 2 * (n + 1);
        self.buf[0] = Complex64::default();
        self.buf[n + 1] = Complex64::default();
        for (j, &v) in x.iter().enumerate() {
            self.buf[j + 1] = v;
            self.buf[m - 1 - j] = -v;
        }
        self.fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        // Y_k = -2i Σ x_j sin(π j k/(n+1))
        let scale = Complex64::new(0.0, 0.5 * (2.0 / (n + 1) as f64).sqrt());
        for (k, v) in x.iter_mut().enumerate() {
            *v = self.buf[k + 1] * scale;
        }
    }
}

/// `(1/M) p² + V` on a grid, with the kinetic part diagonal in the sine basis.
pub struct Hamiltonian {
    grid: Grid,
    potential: Vec<f64>,
    /// `k_n² / M` for sine modes `n = 1..=N`.
    kinetic: Vec<f64>,
    dst: SineTransform,
    work: Vec<Complex64>,
}

impl Hamiltonian {
    /// `potential` is sampled on every grid point, edges included.
    pub fn new(grid: &Grid, potential: Vec<f64>, mass: f64) -> Result<Self> {
        grid.validate()?;
        if potential.len() != grid.n_points {
            return Err(Error::InvalidPropagation(format!(
                "potential has {} samples for {} grid points",
                potential.len(),
                grid.n_points
            )));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular(grid.coord(i)));
        }
        let interior = grid.n_points - 2;
        let kinetic = (1..=interior)
            .map(|n| {
                let k = n as f64 * PI / grid.length();
                k * k / mass
            })
            .collect();
        Ok(Hamiltonian {
            grid: *grid,
            potential,
            kinetic,
            dst: SineTransform::new(interior),
            work: vec![Complex64::default(); interior],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&mut self, psi: &WaveFunction) -> f64 {
        let n = self.grid.n_points;
        self.work.copy_from_slice(&psi.amplitudes[1..n - 1]);
        self.dst.apply(&mut self.work);
        let kinetic: f64 = self
            .work
            .iter()
            .zip(&self.kinetic)
            .map(|(c, k)| k * c.norm_sqr())
            .sum();
        let potential: f64 = psi
            .amplitudes
            .iter()
            .zip(&self.potential)
            .map(|(z, v)| v * z.norm_sqr())
            .sum();
        let weight: f64 = psi.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        (kinetic + potential) / weight
    }
}

pub fn total_energy(psi: &WaveFunction, potential: &[f64], mass: f64) -> Result<f64> {
    Ok(Hamiltonian::new(&psi.grid, potential.to_vec(), mass)?.energy(psi))
}

/// Precomputed Strang step `e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}`.
pub struct Propagator {
    hamiltonian: Hamiltonian,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic_phase: Vec<Complex64>,
}

impl Propagator {
    pub fn new(hamiltonian: Hamiltonian, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidPropagation(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let half_potential = hamiltonian
            .potential
            .iter()
            .map(|v| Complex64::from_polar(1.0, -0.5 * v * dt))
            .collect();
        let kinetic_phase = hamiltonian
            .kinetic
            .iter()
            .map(|k| Complex64::from_polar(1.0, -k * dt))
            .collect();
        Ok(Propagator {
            hamiltonian,
            dt,
            half_potential,
            kinetic_phase,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hamiltonian(&mut self) -> &mut Hamiltonian {
        &mut self.hamiltonian
    }

    pub fn step(&mut self, psi: &mut WaveFunction) {
        let n = psi.amplitudes.len();
        debug_assert_eq!(n, self.hamiltonian.grid.n_points);
        let h = &mut self.hamiltonian;
        for (z, p) in psi.amplitudes.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        h.work.copy_from_slice(&psi.amplitudes[1..n - 1]);
        h.dst.apply(&mut h.work);
        for (c, p) in h.work.iter_mut().zip(&self.kinetic_phase) {
            *c *= p;
        }
        h.dst.apply(&mut h.work);
        psi.amplitudes[1..n - 1].copy_from_slice(&h.work);
        psi.amplitudes[0] = Complex64::default();
        psi.amplitudes[n - 1] = Complex64::default();
        for (z, p) in psi.amplitudes.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
    }
}

/// One Strang step; builds the propagator, so prefer [`Propagator`] in loops.
pub fn strang_step(
    psi: &WaveFunction,
    potential: &[f64],
    mass: f64,
    dt: f64,
) -> Result<WaveFunction> {
    let mut prop = Propagator::new(Hamiltonian::new(&psi.grid, potential.to_vec(), mass)?, dt)?;
    let mut out = psi.clone();
    prop.step(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub observable_stride: usize,
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.t_final && self.t_final.is_finite()) {
            return Err(Error::InvalidPropagation(format!(
                "need 0 < dt <= t_final, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.observable_stride == 0 {
            return Err(Error::InvalidPropagation(
                "observable_stride must be >= 1".into(),
            ));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.t_final))
        {
            return Err(Error::InvalidPropagation(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Snapshot times rounded to step indices, sorted and deduplicated.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = self
            .snapshot_times
            .iter()
            .map(|t| (t / self.dt).round() as usize)
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}

/// Consumer of propagation output.
pub trait PropagationSink {
    /// Called at step 0, every `observable_stride` steps and at the last step.
    fn observe(&mut self, t: f64, psi: &WaveFunction, energy: f64) -> Result<()>;

    fn snapshot(&mut self, _index: usize, _t: f64, _psi: &WaveFunction) -> Result<()> {
        Ok(())
    }
}

impl PropagationSink for () {
    fn observe(&mut self, _t: f64, _psi: &WaveFunction, _energy: f64) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub steps: usize,
    pub snapshot_times: Vec<f64>,
    pub max_edge_density: f64,
    /// First observation time at which the edge density exceeded the limit.
    pub contaminated_at: Option<f64>,
}

/// Propagate `psi0` to `t_final`, feeding `sink`.
pub fn propagate(
    psi0: &WaveFunction,
    potential: &[f64],
    mass: f64,
    config: &PropagationConfig,
    sink: &mut dyn PropagationSink,
) -> Result<(WaveFunction, PropagationReport)> {
    config.validate()?;
    let mut prop = Propagator::new(
        Hamiltonian::new(&psi0.grid, potential.to_vec(), mass)?,
        config.dt,
    )?;
    let n_steps = config.n_steps();
    let snaps = config.snapshot_steps();
    let mut next_snap = 0;
    let mut psi = psi0.clone();
    let mut report = PropagationReport {
        steps: n_steps,
        ..Default::default()
    };
    for step in 0..=n_steps {
        if step > 0 {
            prop.step(&mut psi);
        }
        let t = step as f64 * config.dt;
        if step % config.observable_stride == 0 || step == n_steps {
            let edge = psi.edge_density();
            report.max_edge_density = report.max_edge_density.max(edge);
            if edge > EDGE_DENSITY_LIMIT && report.contaminated_at.is_none() {
                log::warn!("edge density {edge:.3e} exceeds {EDGE_DENSITY_LIMIT:e} at t = {t}; later data unreliable");
                report.contaminated_at = Some(t);
            }
            let energy = prop.hamiltonian().energy(&psi);
            sink.observe(t, &psi, energy)?;
        }
        while next_snap < snaps.len() && snaps[next_snap] == step {
            sink.snapshot(next_snap, t, &psi)?;
            report.snapshot_times.push(t);
            next_snap += 1;
        }
    }
    Ok((psi, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Analytic free evolution under `H = p²/M` (mass `M/2`).
    fn free_gaussian(s: f64, t: f64, spec: &GaussianSpec, mass: f64) -> Complex64 {
        let a = 1.0 / (4.0 * spec.delta_s * spec.delta_s);
        let m = mass / 2.0;
        let denom = Complex64::new(1.0, 2.0 * a * t / m);
        let x = s - spec.s0 - spec.p0 * t / m;
        let norm = (2.0 * PI * spec.delta_s * spec.delta_s).powf(-0.25);
        let phase = Complex64::new(
            0.0,
            spec.p0 * (s - spec.s0) - spec.p0 * spec.p0 * t / (2.0 * m),
        );
        norm / denom.sqrt() * (-a * x * x / denom + phase).exp()
    }

    struct Moments(Vec<(f64, f64, f64, f64)>);

    impl PropagationSink for Moments {
        fn observe(&mut self, t: f64, psi: &WaveFunction, energy: f64) -> Result<()> {
            let (mean, std) = psi.position_moments();
            self.0.push((t, mean, std, energy));
            Ok(())
        }
    }

    #[test]
    fn grid_spacing() {
        assert_eq!(make_grid(-150.0, 1000.0, 2301).unwrap().spacing(), 0.5);
        assert_relative_eq!(
            make_grid(0.0, 1.0, 101).unwrap().spacing(),
            0.01,
            max_relative = 1e-15
        );
        assert!(make_grid(0.0, 1.0, 1).is_err());
        assert!(make_grid(1.0, 0.0, 101).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let grid = make_grid(-100.0, 100.0, 2001).unwrap();
        let spec = GaussianSpec {
            s0: 3.0,
            delta_s: 4.0,
            p0: -0.3,
        };
        let psi = init_gaussian(&grid, &spec).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let (mean, std) = psi.position_moments();
        assert!((mean - 3.0).abs() < 1e-8);
        assert!((std - 4.0).abs() < 1e-6);
        assert!((psi.momentum_expectation() + 0.3).abs() < 1e-8);
    }

    #[test]
    fn packet_near_edge_rejected() {
        let grid = make_grid(0.0, 100.0, 1001).unwrap();
        let spec = GaussianSpec {
            s0: 20.0,
            delta_s: 4.0,
            p0: 0.0,
        };
        assert!(matches!(
            init_gaussian(&grid, &spec),
            Err(Error::PacketTouchesBoundary { .. })
        ));
    }

    #[test]
    fn sine_transform_orthonormal_and_involutive() {
        let n = 37;
        let mut dst = SineTransform::new(n);
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos()))
            .collect();
        let mut y = x.clone();
        dst.apply(&mut y);
        for k in 0..n {
            let direct: Complex64 = x
                .iter()
                .enumerate()
                .map(|(j, v)| v * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin())
                .sum::<Complex64>()
                * (2.0 / (n + 1) as f64).sqrt();
            assert!((direct - y[k]).norm() < 1e-12);
        }
        dst.apply(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn free_step_is_exact() {
        let grid = make_grid(-100.0, 100.0, 2001).unwrap();
        let spec = GaussianSpec {
            s0: -10.0,
            delta_s: 2.0,
            p0: 0.5,
        };
        let psi = init_gaussian(&grid, &spec).unwrap();
        let dt = 7.5;
        let out = strang_step(&psi, &vec![0.0; grid.n_points], 1.0, dt).unwrap();
        let err = out
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| (z - free_gaussian(grid.coord(i), dt, &spec, 1.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn constant_potential_is_global_phase() {
        let grid = make_grid(-60.0, 60.0, 801).unwrap();
        let spec = GaussianSpec {
            s0: 0.0,
            delta_s: 3.0,
            p0: 0.2,
        };
        let psi = init_gaussian(&grid, &spec).unwrap();
        let (c, dt) = (0.37, 2.0);
        let free = strang_step(&psi, &vec![0.0; grid.n_points], 2.0, dt).unwrap();
        let shifted = strang_step(&psi, &vec![c; grid.n_points], 2.0, dt).unwrap();
        let phase = Complex64::from_polar(1.0, -c * dt);
        for (a, b) in free.amplitudes.iter().zip(&shifted.amplitudes) {
            assert!((a * phase - b).norm() < 1e-13);
        }
    }

    #[test]
    fn free_spreading() {
        let grid = make_grid(-200.0, 200.0, 4001).unwrap();
        let spec = GaussianSpec {
            s0: 0.0,
            delta_s: 4.0,
            p0: 0.0,
        };
        let psi = init_gaussian(&grid, &spec).unwrap();
        let config = PropagationConfig {
            dt: 0.05,
            t_final: 16.0,
            snapshot_times: vec![],
            observable_stride: 20,
        };
        let mut sink = Moments(vec![]);
        propagate(&psi, &vec![0.0; grid.n_points], 1.0, &config, &mut sink).unwrap();
        for &(t, _, std, _) in &sink.0 {
            let expected = 4.0 * (1.0 + (t / 16.0).powi(2)).sqrt();
            assert!(
                (std - expected).abs() / expected < 1e-4,
                "t = {t}: {std} vs {expected}"
            );
        }
        let last = sink.0.last().unwrap();
        assert_eq!(last.0, 16.0);
        assert!((last.2 - 5.65685).abs() < 1e-4);
    }

    #[test]
    fn kinetic_energy_of_gaussian() {
        let grid = make_grid(-100.0, 100.0, 2001).unwrap();
        for mass in [1.0, 10.0] {
            let spec = GaussianSpec {
                s0: 5.0,
                delta_s: 3.0,
                p0: 0.7,
            };
            let psi = init_gaussian(&grid, &spec).unwrap();
            let e = total_energy(&psi, &vec![0.0; grid.n_points], mass).unwrap();
            let expected = (0.49 + 1.0 / 36.0) / mass;
            assert!((e - expected).abs() / expected < 1e-6, "{e} vs {expected}");
        }
    }

    #[test]
    fn harmonic_oscillation_and_conservation() {
        let grid = make_grid(-25.0, 25.0, 1001).unwrap();
        let s0 = 3.0;
        let spec = GaussianSpec {
            s0,
            delta_s: 0.8,
            p0: 0.0,
        };
        let psi = init_gaussian(&grid, &spec).unwrap();
        let v: Vec<f64> = grid.coords().iter().map(|s| 0.5 * s * s).collect();
        let period = 2.0 * PI / 2f64.sqrt();
        let config = PropagationConfig {
            dt: 0.001,
            t_final: 2.0 * period,
            snapshot_times: vec![],
            observable_stride: 50,
        };
        let mut sink = Moments(vec![]);
        let (out, _) = propagate(&psi, &v, 1.0, &config, &mut sink).unwrap();
        for &(t, mean, _, _) in &sink.0 {
            assert!(
                (mean - s0 * (2f64.sqrt() * t).cos()).abs() < 1e-3 * s0,
                "t = {t}: {mean}"
            );
        }
        let e0 = sink.0[0].3;
        for &(_, _, _, e) in &sink.0 {
            assert!((e - e0).abs() / e0 < 1e-6, "{e} vs {e0}");
        }
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_order_in_dt() {
        let grid = make_grid(-25.0, 25.0, 501).unwrap();
        let psi = init_gaussian(
            &grid,
            &GaussianSpec {
                s0: 2.0,
                delta_s: 1.0,
                p0: 0.5,
            },
        )
        .unwrap();
        let v: Vec<f64> = grid
            .coords()
            .iter()
            .map(|s| 0.5 * s * s + (s / 2.0).sin())
            .collect();
        let run = |dt: f64| {
            let config = PropagationConfig {
                dt,
                t_final: 2.0,
                snapshot_times: vec![],
                observable_stride: 1000,
            };
            propagate(&psi, &v, 1.0, &config, &mut ()).unwrap().0
        };
        let l2 = |a: &WaveFunction, b: &WaveFunction| {
            a.amplitudes
                .iter()
                .zip(&b.amplitudes)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt()
                * grid.spacing().sqrt()
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let ratio = l2(&a, &b) / l2(&b, &c);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn negative_momentum_moves_inward() {
        let grid = make_grid(0.0, 200.0, 2001).unwrap();
        let psi = init_gaussian(
            &grid,
            &GaussianSpec {
                s0: 100.0,
                delta_s: 4.0,
                p0: -0.154,
            },
        )
        .unwrap();
        let config = PropagationConfig {
            dt: 0.02,
            t_final: 10.0,
            snapshot_times: vec![],
            observable_stride: 50,
        };
        let mut sink = Moments(vec![]);
        propagate(&psi, &vec![0.0; grid.n_points], 1.0, &config, &mut sink).unwrap();
        assert!(sink.0.windows(2).all(|w| w[1].1 < w[0].1));
        // group velocity 2 p0 / M
        assert!((sink.0.last().unwrap().1 - (100.0 - 2.0 * 0.154 * 10.0)).abs() < 1e-6);
    }

    #[test]
    fn snapshots_round_to_steps() {
        let grid = make_grid(-50.0, 50.0, 201).unwrap();
        let psi = init_gaussian(
            &grid,
            &GaussianSpec {
                s0: 0.0,
                delta_s: 2.0,
                p0: 0.0,
            },
        )
        .unwrap();
        struct Snaps(Vec<(usize, f64, f64)>);
        impl PropagationSink for Snaps {
            fn observe(&mut self, _: f64, _: &WaveFunction, _: f64) -> Result<()> {
                Ok(())
            }
            fn snapshot(&mut self, i: usize, t: f64, psi: &WaveFunction) -> Result<()> {
                self.0.push((i, t, psi.norm()));
                Ok(())
            }
        }
        let config = PropagationConfig {
            dt: 0.3,
            t_final: 3.0,
            snapshot_times: vec![1.0, 0.0, 3.0, 0.95],
            observable_stride: 3,
        };
        let mut sink = Snaps(vec![]);
        let (_, report) =
            propagate(&psi, &vec![0.0; grid.n_points], 1.0, &config, &mut sink).unwrap();
        let times: Vec<f64> = sink.0.iter().map(|s| s.1).collect();
        assert_eq!(times.len(), 3);
        assert_eq!(times[0], 0.0);
        assert!((times[1] - 0.9).abs() < 1e-12);
        assert!((times[2] - 3.0).abs() < 1e-12);
        assert_eq!(report.snapshot_times, times);
    }

    #[test]
    fn contamination_is_reported() {
        let grid = make_grid(-40.0, 40.0, 401).unwrap();
        let psi = init_gaussian(
            &grid,
            &GaussianSpec {
                s0: 0.0,
                delta_s: 2.0,
                p0: 2.0,
            },
        )
        .unwrap();
        let config = PropagationConfig {
            dt: 0.02,
            t_final: 20.0,
            snapshot_times: vec![],
            observable_stride: 10,
        };
        let (_, report) =
            propagate(&psi, &vec![0.0; grid.n_points], 1.0, &config, &mut ()).unwrap();
        assert!(report.contaminated_at.is_some());
        assert!(report.max_edge_density > EDGE_DENSITY_LIMIT);
    }

    #[test]
    fn invalid_config() {
        let base = PropagationConfig {
            dt: 0.1,
            t_final: 1.0,
            snapshot_times: vec![0.5],
            observable_stride: 1,
        };
        assert!(base.validate().is_ok());
        assert!(PropagationConfig {
            dt: 0.0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(PropagationConfig {
            dt: 2.0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(PropagationConfig {
            observable_stride: 0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(PropagationConfig {
            snapshot_times: vec![1.5],
            ..base
        }
        .validate()
        .is_err());
    }
}
