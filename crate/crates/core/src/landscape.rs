//! Extrema, wells and bifurcations of the helical potential.
//!
//! Stationary points solve `sin(s/β) = -c s` with `c = h² / (4π² R² β)`: the
//! intersections of a sine with a straight line through the origin. Since
//! `|sin| ≤ 1` there are none beyond `s = 1/c`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{derivative_unchecked, potential_unchecked, HelixParams};

const TWO_PI: f64 = 2.0 * PI;
const ROOT_TOL: f64 = 1e-12;

/// Classified stationary points of `V` on `s > 0`, innermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub params: HelixParams,
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
}

impl ExtremaSet {
    pub fn well_count(&self) -> usize {
        self.minima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minima.is_empty()
    }
}

/// One well, bounded by its flanking maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSegment {
    /// 1-based, counted outward from the Coulomb wall.
    pub index: usize,
    pub left_boundary: f64,
    pub right_boundary: f64,
    pub minimum_position: f64,
    pub minimum_value: f64,
    /// Plateau of the isolated well: `V` at the outer (lower) flanking maximum.
    pub threshold: f64,
    pub depth: f64,
}

impl WellSegment {
    pub fn contains(&self, s: f64) -> bool {
        s >= self.left_boundary && s <= self.right_boundary
    }

    pub fn width(&self) -> f64 {
        self.right_boundary - self.left_boundary
    }
}

/// A single well continued by a constant plateau outside `[inner_edge, outer_edge]`,
/// the two points where the well's potential reaches the plateau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedWell {
    pub segment: WellSegment,
    pub params: HelixParams,
    pub plateau: f64,
    pub inner_edge: f64,
    pub outer_edge: f64,
}

impl IsolatedWell {
    pub fn value(&self, s: f64) -> f64 {
        if s <= self.inner_edge || s >= self.outer_edge {
            self.plateau
        } else {
            potential_unchecked(&self.params, s).min(self.plateau)
        }
    }
}

/// `F(s) = sin(s/β) + c s`; its positive zeros are the stationary points of `V`.
fn stationarity(params: &HelixParams) -> impl Fn(f64) -> f64 {
    let beta = params.beta();
    let c = slope(params);
    move |s| (s / beta).sin() + c * s
}

fn slope(params: &HelixParams) -> f64 {
    let (h, r) = (params.h, params.r);
    h * h / (4.0 * PI * PI * r * r * params.beta())
}

/// Residual of the stationarity condition at `s`.
pub fn extremum_residual(params: &HelixParams, s: f64) -> f64 {
    stationarity(params)(s)
}

/// Largest `s` at which an extremum can exist.
pub fn extremum_bound(params: &HelixParams) -> f64 {
    1.0 / slope(params)
}

/// Bisection on a sign-changing bracket, to absolute tolerance `tol`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points where `F` changes monotonicity, i.e. `cos(s/β) = -cβ`, in `(0, s_end)`.
fn monotone_breaks(params: &HelixParams, s_end: f64) -> Vec<f64> {
    let beta = params.beta();
    let a = slope(params) * beta;
    let mut breaks = Vec::new();
    if a >= 1.0 {
        return breaks;
    }
    let xc = (-a).acos();
    let mut m = 0.0;
    loop {
        let base = TWO_PI * m;
        let first = beta * (base + xc);
        if first >= s_end {
            break;
        }
        breaks.push(first);
        let second = beta * (base + TWO_PI - xc);
        if second < s_end {
            breaks.push(second);
        }
        m += 1.0;
    }
    breaks
}

/// All stationary points of `V` in `(0, min(s_max, bound)]`, classified by
/// comparing `V` at `root ± 1e-4 β`.
pub fn find_extrema(params: &HelixParams, s_max: f64) -> ExtremaSet {
    let f = stationarity(params);
    let beta = params.beta();
    let c = slope(params);
    let s_end = s_max.min(extremum_bound(params) * (1.0 + 1e-12));

    let mut edges = vec![0.0];
    edges.extend(monotone_breaks(params, s_end));
    edges.push(s_end);

    let mut roots = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if lo == 0.0 || flo * fhi >= 0.0 {
            // F > 0 on the first monotone piece; tangent roots are degenerate.
            continue;
        }
        let mut s = bisect(&f, lo, hi, ROOT_TOL);
        // guarded Newton polish
        let fp = (s / beta).cos() / beta + c;
        if fp != 0.0 {
            let cand = s - f(s) / fp;
            if cand > lo && cand < hi && f(cand).abs() <= f(s).abs() {
                s = cand;
            }
        }
        roots.push(s);
    }

    let delta = 1e-4 * beta;
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for s in roots {
        let v = potential_unchecked(params, s);
        let vl = potential_unchecked(params, s - delta);
        let vr = potential_unchecked(params, s + delta);
        if vl > v && vr > v {
            minima.push(s);
        } else if vl < v && vr < v {
            maxima.push(s);
        }
    }
    // a minimum whose partner maximum lies beyond s_max is dropped
    minima.truncate(maxima.len());
    ExtremaSet {
        params: *params,
        minima,
        maxima,
    }
}

/// Number of local minima of `V` on `s > 0`.
pub fn count_wells(params: &HelixParams) -> usize {
    find_extrema(params, f64::INFINITY).well_count()
}

fn count_wells_at_ratio(ratio: f64) -> usize {
    count_wells(&HelixParams {
        h: ratio,
        r: 1.0,
        mass: 1.0,
    })
}

/// Ratios `h/R` at which the 1st, 2nd, ... well appears, in decreasing order.
///
/// Writing `u = sqrt((4π²/r²)² - 1)`, new extrema appear where
/// `cos u = -1/sqrt(1+u²)` with `sin u < 0` (the tangency of the line with the
/// sine), which has exactly one root in each `((2m+1)π, (2m+2)π)`.
pub fn bifurcation_ratios(n_max: usize) -> Vec<f64> {
    let g = |u: f64| u.cos() + (1.0 + u * u).sqrt().recip();
    (0..n_max)
        .map(|m| {
            let lo = (2 * m + 1) as f64 * PI;
            let hi = lo + PI;
            let u = bisect(g, lo, hi, 1e-14 * hi);
            let ratio = TWO_PI / (1.0 + u * u).powf(0.25);
            let above = count_wells_at_ratio(ratio + 1e-3);
            let below = count_wells_at_ratio(ratio - 1e-3);
            if below != above + 1 {
                log::warn!("bifurcation ratio {ratio}: well count {above} -> {below} across ±1e-3");
            }
            ratio
        })
        .collect()
}

/// Small-ratio approximation `sqrt(8π/(2n+1))` from `cos(4π²/r²) = 0`.
///
/// Only odd `n = 2m - 1` are well emergences (the `m`-th well); even `n`
/// track the tangencies of the mirrored line `sin(s/β) = +c s`.
pub fn asymptotic_ratio(n: usize) -> f64 {
    (8.0 * PI / (2 * n + 1) as f64).sqrt()
}

/// Decreasing solve of `V(s) = level` on `(lo, hi)` where `V(lo) > level > V(hi)`.
fn crossing(params: &HelixParams, level: f64, lo: f64, hi: f64) -> f64 {
    bisect(|s| potential_unchecked(params, s) - level, lo, hi, ROOT_TOL)
}

/// Inner point of the first well where `V` climbs back to `level`.
fn inner_wall(params: &HelixParams, level: f64, min1: f64) -> f64 {
    let mut lo = 0.5 * min1;
    while potential_unchecked(params, lo) <= level {
        lo *= 0.5;
    }
    crossing(params, level, lo, min1)
}

/// One segment per minimum. Well `k ≥ 2` spans `[max_{k-1}, max_k]`; the
/// innermost starts where `V` on the Coulomb wall equals `V(max_1)`.
pub fn segment_wells(extrema: &ExtremaSet) -> Result<Vec<WellSegment>> {
    let params = &extrema.params;
    if extrema.is_empty() {
        return Err(Error::NoWells(params.ratio()));
    }
    let segments = extrema
        .minima
        .iter()
        .zip(&extrema.maxima)
        .enumerate()
        .map(|(i, (&min, &max))| {
            let threshold = potential_unchecked(params, max);
            let left_boundary = if i == 0 {
                inner_wall(params, threshold, min)
            } else {
                extrema.maxima[i - 1]
            };
            let minimum_value = potential_unchecked(params, min);
            WellSegment {
                index: i + 1,
                left_boundary,
                right_boundary: max,
                minimum_position: min,
                minimum_value,
                threshold,
                depth: threshold - minimum_value,
            }
        })
        .collect();
    Ok(segments)
}

/// Convenience: extrema plus segmentation for a parameter set.
pub fn wells_of(params: &HelixParams) -> Result<Vec<WellSegment>> {
    segment_wells(&find_extrema(params, f64::INFINITY))
}

pub fn isolate_well(segment: &WellSegment, params: &HelixParams) -> IsolatedWell {
    let plateau = segment.threshold;
    let inner_edge = if segment.index == 1 {
        segment.left_boundary
    } else if potential_unchecked(params, segment.left_boundary) > plateau {
        crossing(
            params,
            plateau,
            segment.left_boundary,
            segment.minimum_position,
        )
    } else {
        segment.left_boundary
    };
    IsolatedWell {
        segment: *segment,
        params: *params,
        plateau,
        inner_edge,
        outer_edge: segment.right_boundary,
    }
}

/// `dV/ds` at each extremum, for consistency checks.
pub fn derivative_at(params: &HelixParams, s: f64) -> f64 {
    derivative_unchecked(params, s)
}
