//! Dense real-symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration.
//!
//! The two stages follow the classic EISPACK `tred2`/`tql2` pair. Output
//! eigenvalues are ascending. Each eigenvector column is normalised so that
//! its largest-magnitude component is positive, and columns whose eigenvalues
//! fall in one degenerate cluster keep the order in which QL produced them.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::spin::{RealMatrix, RealSymMatrix};

/// Maximum QL sweeps spent on a single eigenvalue.
pub const MAX_SWEEPS_PER_EIGENVALUE: usize = 50;

/// Off-diagonal elements below this fraction of the running norm are zero.
pub const QL_RELATIVE_THRESHOLD: f64 = 1e-14;

/// Eigenvalues closer than this fraction of `max |E|` form one cluster.
pub const CLUSTER_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Ascending eigenvalues with orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: RealMatrix,
}

impl Spectrum {
    /// Assemble a spectrum from precomputed parts. Column `k` of
    /// `eigenvectors` must belong to `eigenvalues[k]`.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: RealMatrix) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.order() {
            return Err(Error::DimensionError {
                expected: eigenvectors.order(),
                found: eigenvalues.len(),
            });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &RealMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Index ranges of near-degenerate eigenvalues, in ascending order.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        cluster_ranges(&self.eigenvalues)
    }

    /// `max |V^T V - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        v.transpose()
            .matmul(v)
            .sub(&RealMatrix::identity(self.len()))
            .max_abs()
    }

    /// `V diag(E) V^T`.
    pub fn reconstruct(&self) -> RealMatrix {
        let n = self.len();
        let v = &self.eigenvectors;
        let scaled = RealMatrix::from_fn(n, |i, k| v[(i, k)] * self.eigenvalues[k]);
        scaled.matmul(&v.transpose())
    }
}

fn cluster_ranges(sorted: &[f64]) -> Vec<Range<usize>> {
    let scale = sorted.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let tol = CLUSTER_RELATIVE_TOLERANCE * scale;
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > tol {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn eigendecompose(h: &RealSymMatrix) -> Result<Spectrum> {
    let n = h.order();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: RealMatrix::zeros(0),
        });
    }
    let mut v = h.matrix().as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    ql_implicit(n, &mut v, &mut d, &mut e)?;

    // stable ascending sort: exact ties keep QL order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = RealMatrix::from_fn(n, |i, col| v[i * n + order[col]]);
    for col in 0..n {
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, col)].abs() > vectors[(pivot, col)].abs() {
                pivot = i;
            }
        }
        if vectors[(pivot, col)] < 0.0 {
            for i in 0..n {
                vectors[(i, col)] = -vectors[(i, col)];
            }
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Householder reduction. On entry `v` holds the matrix; on exit it holds the
/// orthogonal transform, `d` the diagonal and `e[1..]` the sub-diagonal.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, accumulating into `v`.
fn ql_implicit(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= QL_RELATIVE_THRESHOLD * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::EigensolverFailure { order: n, index: l });
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[at(k, i + 1)];
                        let vk = v[at(k, i)];
                        v[at(k, i + 1)] = s * vk + c * vk1;
                        v[at(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= QL_RELATIVE_THRESHOLD * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
