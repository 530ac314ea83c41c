//! Bound-state spectra of isolated wells.
//!
//! The Hamiltonian `(1/M) p² + V` is discretized with a centered
//! finite-difference second derivative of configurable (even) order on a
//! uniform grid with zero Dirichlet padding, giving a symmetric banded matrix
//! of half-bandwidth `order / 2`.

pub mod band;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use band::{SymBandMatrix, Tridiagonal};

use crate::error::{Error, Result};
use crate::landscape::{isolate_well, wells_of, IsolatedWell};
use crate::potential::HelixParams;

pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_POINTS: usize = 4001;
/// Plateau margin on each side, in de Broglie lengths.
pub const MARGIN_WAVELENGTHS: f64 = 5.0;
/// Relative guard below the threshold for counting a state as bound.
pub const BOUND_GUARD: f64 = 1e-6;

/// Coefficients `c_0 ..= c_p` of the centered second-derivative stencil of
/// the given order (`p = order / 2`), so that
/// `f''(x) ≈ Σ_k c_|k| f(x + kΔ) / Δ²`.
pub fn second_derivative_stencil(order: usize) -> Vec<f64> {
    assert!(
        order >= 2 && order.is_multiple_of(2),
        "stencil order must be even and >= 2"
    );
    let p = order / 2;
    let mut coeffs = vec![0.0; p + 1];
    for k in 1..=p {
        // (p!)² / ((p-k)! (p+k)!) as a running product
        let ratio: f64 = (1..=k)
            .map(|j| (p + 1 - j) as f64 / (p + j) as f64)
            .product();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        coeffs[k] = 2.0 * sign * ratio / (k * k) as f64;
    }
    coeffs[0] = -2.0 * coeffs[1..].iter().sum::<f64>();
    coeffs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdParameters {
    pub order: usize,
    pub n_points: usize,
    /// `[a, b]`; the wave function vanishes at both ends.
    pub domain: (f64, f64),
}

impl FdParameters {
    pub fn spacing(&self) -> f64 {
        (self.domain.1 - self.domain.0) / (self.n_points - 1) as f64
    }

    /// Interior grid points, where the unknowns live.
    pub fn interior(&self) -> Vec<f64> {
        let d = self.spacing();
        (1..self.n_points - 1)
            .map(|i| self.domain.0 + i as f64 * d)
            .collect()
    }

    /// Default grid for `well`: the well plus [`MARGIN_WAVELENGTHS`] plateau
    /// wavelengths on either side.
    pub fn for_well(well: &IsolatedWell, mass: f64, n_points: usize, order: usize) -> Self {
        let margin = MARGIN_WAVELENGTHS * de_broglie_length(well, mass) * (1.0 + 1e-9);
        FdParameters {
            order,
            n_points,
            domain: (well.inner_edge - margin, well.outer_edge + margin),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.order < 2 || !self.order.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "stencil order {} must be even and >= 2",
                self.order
            )));
        }
        if self.n_points < 101 {
            return Err(Error::InvalidGrid(format!(
                "n_points {} < 101",
                self.n_points
            )));
        }
        if !(self.domain.0 < self.domain.1) {
            return Err(Error::InvalidGrid(format!(
                "empty domain {:?}",
                self.domain
            )));
        }
        Ok(())
    }
}

/// Wavelength of a particle with kinetic energy equal to the well depth.
pub fn de_broglie_length(well: &IsolatedWell, mass: f64) -> f64 {
    2.0 * PI / (mass * well.segment.depth).sqrt()
}

/// Discretized Hamiltonian plus the grid it lives on.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub matrix: SymBandMatrix,
    pub coords: Vec<f64>,
    pub spacing: f64,
}

/// `(1/M)(-d²/ds²) + diag(potential)` on interior points spaced `spacing`.
pub fn assemble_on_grid(potential: &[f64], spacing: f64, mass: f64, order: usize) -> SymBandMatrix {
    let stencil = second_derivative_stencil(order);
    let p = order / 2;
    let n = potential.len();
    let kinetic = -1.0 / (mass * spacing * spacing);
    let mut m = SymBandMatrix::zeros(n, p.min(n.saturating_sub(1)));
    for i in 0..n {
        m.set(i, i, kinetic * stencil[0] + potential[i]);
        for (d, &c) in stencil.iter().enumerate().skip(1) {
            if i + d < n {
                m.set(i + d, i, kinetic * c);
            }
        }
    }
    m
}

pub fn assemble_hamiltonian(
    well: &IsolatedWell,
    params: &HelixParams,
    fd: &FdParameters,
) -> Result<DiscreteHamiltonian> {
    fd.validate()?;
    let margin = MARGIN_WAVELENGTHS * de_broglie_length(well, params.mass);
    let inner = well.inner_edge - fd.domain.0;
    let outer = fd.domain.1 - well.outer_edge;
    if inner < margin || outer < margin {
        return Err(Error::DomainTooSmall(format!(
            "margins ({inner:.3}, {outer:.3}) below {MARGIN_WAVELENGTHS} de Broglie lengths ({margin:.3})"
        )));
    }
    let coords = fd.interior();
    let potential: Vec<f64> = coords.iter().map(|&s| well.value(s)).collect();
    let spacing = fd.spacing();
    Ok(DiscreteHamiltonian {
        matrix: assemble_on_grid(&potential, spacing, params.mass, fd.order),
        coords,
        spacing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending; includes a few states just above the threshold.
    pub eigenvalues: Vec<f64>,
    pub bound_count: usize,
    pub spacings: Vec<f64>,
    pub threshold: f64,
}

impl SpectrumResult {
    pub fn bound_states(&self) -> &[f64] {
        &self.eigenvalues[..self.bound_count]
    }
}

/// Eigenvalues up to `threshold + 5%`, counting those below
/// `threshold (1 - BOUND_GUARD)` as bound.
pub fn eigen_spectrum(h: &SymBandMatrix, threshold: f64) -> Result<SpectrumResult> {
    let ceiling = threshold + 0.05 * threshold.abs();
    let eigenvalues = h.eigenvalues_below(ceiling)?;
    if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Diagonalization(
            "eigenvalues not strictly increasing".into(),
        ));
    }
    let cut = threshold - BOUND_GUARD * threshold.abs();
    let bound_count = eigenvalues.iter().filter(|&&e| e < cut).count();
    let spacings = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(SpectrumResult {
        eigenvalues,
        bound_count,
        spacings,
        threshold,
    })
}

/// Eigenvector of `h` at `energy`, normalized so that `Σ ψ² Δ = 1`.
pub fn eigenstate(h: &DiscreteHamiltonian, energy: f64) -> Result<Vec<f64>> {
    let mut v = h.matrix.eigenvector(energy)?;
    let scale = h.spacing.sqrt().recip();
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(v)
}

/// Spectrum of one isolated well on its default grid.
pub fn well_spectrum(
    well: &IsolatedWell,
    params: &HelixParams,
    n_points: usize,
    order: usize,
) -> Result<(DiscreteHamiltonian, SpectrumResult)> {
    let fd = FdParameters::for_well(well, params.mass, n_points, order);
    let h = assemble_hamiltonian(well, params, &fd)?;
    let spectrum = eigen_spectrum(&h.matrix, well.plateau)?;
    Ok((h, spectrum))
}

/// Spectra of every well of `params`, innermost first.
pub fn spectra_per_well(
    params: &HelixParams,
    n_points: usize,
    order: usize,
) -> Result<Vec<SpectrumResult>> {
    let wells = wells_of(params)?;
    wells
        .par_iter()
        .map(|seg| {
            well_spectrum(&isolate_well(seg, params), params, n_points, order).map(|(_, s)| s)
        })
        .collect()
}

pub fn bound_counts_per_well(params: &HelixParams) -> Result<Vec<usize>> {
    Ok(spectra_per_well(params, DEFAULT_POINTS, DEFAULT_ORDER)?
        .iter()
        .map(|s| s.bound_count)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingProfile {
    /// `E_{n+1} - E_n` between bound states.
    pub spacings: Vec<f64>,
    /// `max ΔE / ΔE_1`.
    pub increase_ratio: f64,
    /// Length of the initial run of strictly increasing spacings (in intervals).
    pub rising_intervals: usize,
}

pub fn spacing_profile(result: &SpectrumResult) -> Result<SpacingProfile> {
    if result.bound_count < 2 {
        return Err(Error::InsufficientStates(result.bound_count));
    }
    let spacings: Vec<f64> = result
        .bound_states()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let max = spacings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rising_intervals = 1 + spacings.windows(2).take_while(|w| w[1] > w[0]).count();
    Ok(SpacingProfile {
        increase_ratio: max / spacings[0],
        rising_intervals,
        spacings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stencil_known_orders() {
        assert_eq!(second_derivative_stencil(2), vec![-2.0, 1.0]);
        let s4 = second_derivative_stencil(4);
        assert_relative_eq!(s4[0], -2.5, epsilon = 1e-15);
        assert_relative_eq!(s4[1], 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s4[2], -1.0 / 12.0, epsilon = 1e-15);
        let s10 = second_derivative_stencil(10);
        assert_relative_eq!(s10[0], -5269.0 / 1800.0, epsilon = 1e-14);
        assert_relative_eq!(s10[5], 1.0 / 3150.0, epsilon = 1e-16);
    }

    #[test]
    fn stencil_annihilates_constants_and_is_exact_on_quadratics() {
        for order in [2, 4, 6, 8, 10] {
            let c = second_derivative_stencil(order);
            let p = order as i64 / 2;
            let sum: f64 = c[0] + 2.0 * c[1..].iter().sum::<f64>();
            assert!(sum.abs() < 1e-13);
            let d = 0.1;
            let x0 = 1.7_f64;
            let apply = |f: &dyn Fn(f64) -> f64| -> f64 {
                (-p..=p)
                    .map(|k| c[k.unsigned_abs() as usize] * f(x0 + k as f64 * d))
                    .sum::<f64>()
                    / (d * d)
            };
            assert!((apply(&|x| x * x) - 2.0).abs() < 1e-10);
            // exact through degree order + 1
            let deg = order as i32 + 1;
            let exact = deg as f64 * (deg - 1) as f64 * x0.powi(deg - 2);
            assert!(
                (apply(&|x| x.powi(deg)) - exact).abs() < 1e-7 * exact.abs(),
                "order {order}"
            );
        }
    }

    #[test]
    fn hamiltonian_rows_annihilate_constants_in_the_interior() {
        let m = assemble_on_grid(&vec![0.0; 50], 0.2, 1.0, 10);
        let y = m.mul_vec(&vec![1.0; 50]);
        for v in &y[5..45] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn box_ground_state_converges() {
        // zero padding of a wide stencil is only exact for order 2, so the
        // box limit is approached as the grid is refined
        let c = 0.3;
        let mass = 2.0;
        let exact = c + (PI / 4.0).powi(2) / mass;
        let errors: Vec<f64> = [201, 401, 801, 1601]
            .iter()
            .map(|&n| {
                let fd = FdParameters {
                    order: 10,
                    n_points: n,
                    domain: (0.0, 4.0),
                };
                let m = assemble_on_grid(&vec![c; n - 2], fd.spacing(), mass, fd.order);
                (m.eigenvalues_below(c + 1.0).unwrap()[0] - exact).abs() / exact
            })
            .collect();
        // first order in the spacing: each halving halves the error
        assert!(
            errors.windows(2).all(|w| (w[0] / w[1] - 2.0).abs() < 0.05),
            "{errors:?}"
        );
        assert!(errors[3] < 2e-4, "{errors:?}");
        let m = assemble_on_grid(&vec![c; 399], 0.01, mass, 2);
        let exact2 = c + (PI / 4.0).powi(2) / mass;
        // order 2 is the exact discrete Dirichlet Laplacian
        let discrete = c + 4.0 * (PI * 0.01 / 8.0).sin().powi(2) / (0.01 * 0.01 * mass);
        assert!((m.eigenvalues_below(c + 1.0).unwrap()[0] - discrete).abs() < 1e-12);
        assert!((discrete - exact2).abs() / exact2 < 1e-5);
    }

    fn harmonic(n_points: usize, order: usize) -> Vec<f64> {
        let fd = FdParameters {
            order,
            n_points,
            domain: (-12.0, 12.0),
        };
        let v: Vec<f64> = fd.interior().iter().map(|s| 0.5 * s * s).collect();
        let m = assemble_on_grid(&v, fd.spacing(), 1.0, order);
        m.eigenvalues_below(15.0).unwrap()
    }

    #[test]
    fn harmonic_oscillator() {
        let ev = harmonic(2001, 10);
        for (n, e) in ev.iter().take(10).enumerate() {
            let exact = 2f64.sqrt() * (n as f64 + 0.5);
            assert!(((e - exact) / exact).abs() < 1e-6, "n={n}: {e} vs {exact}");
        }
        let res = SpectrumResult {
            bound_count: 10,
            spacings: vec![],
            threshold: 15.0,
            eigenvalues: ev[..10].to_vec(),
        };
        assert!((spacing_profile(&res).unwrap().increase_ratio - 1.0).abs() < 1e-4);
    }

    #[test]
    fn stencil_order_sets_convergence_rate() {
        let exact = 2f64.sqrt() * 5.5;
        for (order, expected_rate) in [(2usize, 4.0), (4, 16.0)] {
            let coarse = (harmonic(241, order)[5] - exact).abs();
            let fine = (harmonic(481, order)[5] - exact).abs();
            let rate = coarse / fine;
            assert!(
                (rate / expected_rate - 1.0).abs() < 0.15,
                "order {order}: rate {rate}"
            );
        }
    }

    #[test]
    fn spacing_needs_two_states() {
        let res = SpectrumResult {
            eigenvalues: vec![0.1, 0.5],
            bound_count: 1,
            spacings: vec![0.4],
            threshold: 0.3,
        };
        assert!(matches!(
            spacing_profile(&res),
            Err(Error::InsufficientStates(1))
        ));
    }

    #[test]
    fn rejects_tight_domain() {
        let p = HelixParams::new(5.8, 4.0, 1.0).unwrap();
        let seg = wells_of(&p).unwrap()[0];
        let iso = isolate_well(&seg, &p);
        let fd = FdParameters {
            order: 10,
            n_points: 1001,
            domain: (iso.inner_edge - 1.0, iso.outer_edge + 1.0),
        };
        assert!(matches!(
            assemble_hamiltonian(&iso, &p, &fd),
            Err(Error::DomainTooSmall(_))
        ));
        let bad = FdParameters {
            n_points: 50,
            ..FdParameters::for_well(&iso, 1.0, 1001, 10)
        };
        assert!(assemble_hamiltonian(&iso, &p, &bad).is_err());
    }

    #[test]
    fn bound_energies_lie_inside_the_well() {
        let p = HelixParams::new(10.0, 10.0, 10.0).unwrap();
        for (seg, spec) in wells_of(&p)
            .unwrap()
            .iter()
            .zip(spectra_per_well(&p, 2001, 10).unwrap())
        {
            for &e in spec.bound_states() {
                assert!(e > seg.minimum_value && e < seg.threshold);
            }
        }
    }
}
