//! Symmetric banded matrices: Givens reduction to tridiagonal form, Sturm
//! bisection for eigenvalues, inverse iteration for eigenvectors.

use crate::error::{Error, Result};

/// Real symmetric matrix with half-bandwidth `bandwidth`, lower triangle stored
/// by diagonals: `diags[d][i] = A[i + d][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    bandwidth: usize,
    diags: Vec<Vec<f64>>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let diags = (0..=bandwidth)
            .map(|d| vec![0.0; n.saturating_sub(d)])
            .collect();
        SymBandMatrix {
            n,
            bandwidth,
            diags,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    /// Sets `A[i][j]` and `A[j][i]`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(
            d <= self.bandwidth,
            "({i}, {j}) outside bandwidth {}",
            self.bandwidth
        );
        self.diags[d][lo] = value;
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diags[0]
    }

    /// Entries of the `d`-th subdiagonal.
    pub fn subdiagonal(&self, d: usize) -> &[f64] {
        &self.diags[d]
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, diag) in self.diags.iter().enumerate().skip(1) {
            for (i, &a) in diag.iter().enumerate() {
                y[i + d] += a * x[i];
                y[i] += a * x[i + d];
            }
        }
        y
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let lower = i.saturating_sub(self.bandwidth);
            let upper = (i + self.bandwidth).min(self.n - 1);
            let radius: f64 = (lower..=upper)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            let c = self.get(i, i);
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// Orthogonally similar tridiagonal matrix `(diagonal, offdiagonal)`.
    pub fn tridiagonalize(&self) -> Tridiagonal {
        let n = self.n;
        let b = self.bandwidth;
        if b <= 1 || n < 3 {
            let off = if b == 0 {
                vec![0.0; n.saturating_sub(1)]
            } else {
                self.diags[1].clone()
            };
            return Tridiagonal {
                diag: self.diags[0].clone(),
                off,
            };
        }
        // one spare diagonal holds the bulge created by each rotation
        let mut work = Rotator::new(self);
        for j in 0..n - 2 {
            let last = (j + b).min(n - 1);
            for k in (j + 2..=last).rev() {
                if work.get(k, j) == 0.0 {
                    continue;
                }
                work.annihilate(k - 1, k, j);
                // chase the fill-in at (k + b, k - 1) off the end
                let mut row = k + b;
                let mut col = k - 1;
                while row < n {
                    if work.get(row, col) != 0.0 {
                        work.annihilate(row - 1, row, col);
                    }
                    col = row - 1;
                    row += b;
                }
            }
        }
        Tridiagonal {
            diag: work.diags[0].clone(),
            off: work.diags[1].clone(),
        }
    }

    /// Eigenvalues below `upper`, ascending.
    pub fn eigenvalues_below(&self, upper: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.gershgorin();
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Diagonalization("non-finite matrix entries".into()));
        }
        let tri = self.tridiagonalize();
        let cap = upper.min(hi + 1.0);
        let count = tri.count_below(cap);
        Ok((0..count)
            .map(|k| tri.kth_eigenvalue(k, lo - 1.0, cap))
            .collect())
    }

    /// Unit eigenvector for the (already converged) eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let scale = self
            .gershgorin()
            .1
            .abs()
            .max(self.gershgorin().0.abs())
            .max(1.0);
        // nudge off the eigenvalue so the factorization stays regular
        let shift = lambda + 1e-13 * scale;
        let lu = BandLu::factor(self, shift)?;
        let n = self.n;
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
            .collect();
        normalize(&mut x);
        for _ in 0..6 {
            let mut y = lu.solve(&x);
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Diagonalization("inverse iteration diverged".into()));
            }
            normalize(&mut y);
            let delta: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let delta_flip: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max);
            x = y;
            if delta.min(delta_flip) < 1e-13 {
                break;
            }
        }
        // sign convention: largest component positive
        let (imax, _) =
            x.iter().enumerate().fold(
                (0, 0.0),
                |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
            );
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(x)
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

/// Band storage of half-width `bandwidth + 1` used during the reduction.
struct Rotator {
    n: usize,
    width: usize,
    diags: Vec<Vec<f64>>,
}

impl Rotator {
    fn new(a: &SymBandMatrix) -> Self {
        let width = a.bandwidth + 1;
        let mut diags: Vec<Vec<f64>> = a.diags.clone();
        diags.push(vec![0.0; a.n.saturating_sub(width)]);
        Rotator {
            n: a.n,
            width,
            diags,
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.width {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.width {
            debug_assert!(
                value.abs() < 1e-300 || value == 0.0,
                "fill outside band at ({i},{j}): {value}"
            );
            return;
        }
        self.diags[d][lo] = value;
    }

    /// Rotation in the `(p, q = p + 1)` plane zeroing `A[q][col]` against `A[p][col]`.
    fn annihilate(&mut self, p: usize, q: usize, col: usize) {
        let a = self.get(p, col);
        let b = self.get(q, col);
        let r = a.hypot(b);
        if r == 0.0 {
            return;
        }
        let (c, s) = (a / r, b / r);
        let lo = p.saturating_sub(self.width);
        let hi = (q + self.width).min(self.n - 1);
        for x in lo..=hi {
            if x == p || x == q {
                continue;
            }
            let apx = self.get(p, x);
            let aqx = self.get(q, x);
            if apx == 0.0 && aqx == 0.0 {
                continue;
            }
            self.set(p, x, c * apx + s * aqx);
            self.set(q, x, c * aqx - s * apx);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(p, q);
        self.set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        self.set(p, q, c * s * (aqq - app) + (c * c - s * s) * apq);
        self.set(q, col, 0.0);
        self.set(p, col, r);
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let pivmin = f64::EPSILON * f64::EPSILON * scale.max(1.0);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bracketed in `[lo, hi]`.
    pub fn kth_eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// LU factorization with partial pivoting of `A - shift I` in band storage.
struct BandLu {
    n: usize,
    kl: usize,
    /// upper bandwidth after fill-in, `2 kl`
    ku: usize,
    /// row-major, row `i` holds columns `i - kl ..= i + ku`
    rows: Vec<f64>,
    pivots: Vec<usize>,
    multipliers: Vec<f64>,
}

impl BandLu {
    fn factor(a: &SymBandMatrix, shift: f64) -> Result<Self> {
        let n = a.n;
        let kl = a.bandwidth;
        let ku = 2 * kl;
        let stride = kl + ku + 1;
        let mut rows = vec![0.0; n * stride];
        let idx = |i: usize, j: usize| i * stride + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + kl).min(n - 1);
            for j in lo..=hi {
                let mut v = a.get(i, j);
                if i == j {
                    v -= shift;
                }
                rows[idx(i, j)] = v;
            }
        }
        let mut pivots = vec![0; n];
        let mut multipliers = vec![0.0; n * kl.max(1)];
        let tiny = f64::EPSILON * a.gershgorin().1.abs().max(a.gershgorin().0.abs()).max(1.0);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[idx(k, k)].abs();
            for i in k + 1..=last {
                let v = rows[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            let col_hi = (k + ku).min(n - 1);
            if p != k {
                for j in k..=col_hi {
                    rows.swap(idx(k, j), idx(p, j));
                }
            }
            let mut pivot = rows[idx(k, k)];
            if pivot.abs() < tiny {
                pivot = if pivot < 0.0 { -tiny } else { tiny };
                rows[idx(k, k)] = pivot;
            }
            for i in k + 1..=last {
                let m = rows[idx(i, k)] / pivot;
                multipliers[k * kl.max(1) + (i - k - 1)] = m;
                rows[idx(i, k)] = 0.0;
                if m != 0.0 {
                    for j in k + 1..=col_hi {
                        rows[idx(i, j)] -= m * rows[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            rows,
            pivots,
            multipliers,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kl = self.kl;
        let stride = kl + self.ku + 1;
        let idx = |i: usize, j: usize| i * stride + (j + kl - i);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.multipliers[k * kl.max(1) + (i - k - 1)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let col_hi = (k + self.ku).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=col_hi {
                acc -= self.rows[idx(k, j)] * x[j];
            }
            x[k] = acc / self.rows[idx(k, k)];
        }
        x
    }
}
