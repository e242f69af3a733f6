//! Direct solver for symmetric positive-definite banded systems as they
//! arise from the structured meshes in this crate: LL^T factorization on
//! a lower band stored column-major, O(n * hb^2) work, no pivoting.

use crate::error::{Error, Result};

/// Symmetric banded matrix; only the lower band is stored. Entry (i, j)
/// with j <= i <= j + hb lives at `data[j * (hb + 1) + (i - j)]`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub n: usize,
    pub half_bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            half_bandwidth,
            data: vec![0.0; n * (half_bandwidth + 1)],
        }
    }

    /// Adds into the lower-band entry (i, j); callers pass each symmetric
    /// pair once with i >= j.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.half_bandwidth && i < self.n);
        self.data[j * (self.half_bandwidth + 1) + (i - j)] += v;
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.half_bandwidth + 1) + (i - j)]
    }
}

/// Cholesky factor of a banded SPD matrix.
pub struct BandedCholesky {
    n: usize,
    hb: usize,
    /// Lower factor L in the same band layout as the input.
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors A = L L^T in band storage. Fails if a pivot is not
    /// strictly positive (matrix singular or indefinite).
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        let (n, hb) = (a.n, a.half_bandwidth);
        let w = hb + 1;
        let mut l = a.data.clone();
        // Right-looking band Cholesky: after scaling column j, subtract its
        // rank-1 contribution from each trailing column in the band. The
        // inner updates run over contiguous slices, which keeps the
        // O(n * hb^2) work vectorizable.
        for j in 0..n {
            let d = l[j * w];
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Singular(format!(
                    "non-positive pivot {d:.3e} at column {j}"
                )));
            }
            let dj = d.sqrt();
            l[j * w] = dj;
            let imax = (j + hb).min(n - 1);
            for i in j + 1..=imax {
                l[j * w + (i - j)] /= dj;
            }
            for k in j + 1..=imax {
                let ljk = l[j * w + (k - j)];
                if ljk == 0.0 {
                    continue;
                }
                let m = imax - k + 1;
                let (head, tail) = l.split_at_mut(k * w);
                let src = &head[j * w + (k - j)..j * w + (k - j) + m];
                for (dst, s) in tail[..m].iter_mut().zip(src) {
                    *dst -= ljk * *s;
                }
            }
        }
        Ok(Self { n, hb, l })
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::Geometry(format!(
                "rhs length {} != system size {}",
                b.len(),
                self.n
            )));
        }
        let (n, hb, w) = (self.n, self.hb, self.hb + 1);
        // Forward: L y = b.
        for j in 0..n {
            let y = b[j] / self.l[j * w];
            b[j] = y;
            let imax = (j + hb).min(n - 1);
            for i in j + 1..=imax {
                b[i] -= self.l[j * w + (i - j)] * y;
            }
        }
        // Backward: L^T x = y.
        for j in (0..n).rev() {
            let mut s = b[j];
            let imax = (j + hb).min(n - 1);
            for i in j + 1..=imax {
                s -= self.l[j * w + (i - j)] * b[i];
            }
            b[j] = s / self.l[j * w];
        }
        Ok(())
    }
}

/// Max-norm relative residual ||A x - b|| / ||b|| for verification.
pub fn relative_residual(a: &BandedMatrix, x: &[f64], b: &[f64]) -> f64 {
    let (n, hb) = (a.n, a.half_bandwidth);
    let mut rmax: f64 = 0.0;
    let mut bmax: f64 = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        let j0 = i.saturating_sub(hb);
        for j in j0..=i.min(n - 1) {
            s += a.at(i, j) * x[j];
        }
        for j in i + 1..=(i + hb).min(n - 1) {
            s += a.at(j, i) * x[j];
        }
        rmax = rmax.max((s - b[i]).abs());
        bmax = bmax.max(b[i].abs());
    }
    if bmax == 0.0 {
        rmax
    } else {
        rmax / bmax
    }
}
