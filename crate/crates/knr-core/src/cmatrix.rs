//! Dense square complex matrices on the truncated number basis.
//!
//! Dimensions here stay small (a few tens), so storage is a plain row-major
//! `Vec` and the eigensolver is a cyclic Jacobi sweep; no external linear
//! algebra backend is involved.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Row-major dense `dim x dim` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Rank-one matrix `v v†`.
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn diag(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.dim).map(move |i| self[(i, i)])
    }

    pub fn trace(&self) -> C64 {
        self.diag().sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    /// Plain `O(dim^3)` matrix product.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "matvec dimension mismatch");
        let n = self.dim;
        let mut out = vec![C64::ZERO; n];
        for i in 0..n {
            let mut acc = C64::ZERO;
            for j in 0..n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(&mut self, factor: C64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    /// `self += factor * rhs`.
    pub fn add_scaled(&mut self, factor: C64, rhs: &Self) {
        assert_eq!(self.dim, rhs.dim, "add_scaled dimension mismatch");
        for (x, y) in self.data.iter_mut().zip(rhs.data.iter()) {
            *x += factor * y;
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(-C64::ONE, rhs);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Overwrite with the Hermitian part `(A + A†)/2`.
    pub fn hermitize(&mut self) {
        for i in 0..self.dim {
            for j in i..self.dim {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    /// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi
    /// rotations. Returns eigenvalues in ascending order; column `k` of the
    /// returned matrix is the eigenvector for eigenvalue `k`.
    ///
    /// The input is taken to be Hermitian; only the upper triangle and the
    /// real part of the diagonal are read.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let n = self.dim;
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);

        // Absolute threshold scaled to the matrix magnitude.
        let scale = a.max_abs().max(1e-300);
        let tol = 1e-15 * scale;

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= tol * 1e-2 {
                        continue;
                    }
                    let phase = apq / mag;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    // Column update A <- A R with
                    //   R[p,p] = c, R[p,q] = s*phase, R[q,p] = -s*conj(phase), R[q,q] = c
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * phase.conj() * akq;
                        a[(k, q)] = s * phase * akp + c * akq;
                    }
                    // Row update A <- R† A.
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * phase * aqk;
                        a[(q, k)] = s * phase.conj() * apk + c * aqk;
                    }
                    // Clean the rotated pair against rounding.
                    a[(p, q)] = C64::ZERO;
                    a[(q, p)] = C64::ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * phase.conj() * vkq;
                        v[(k, q)] = s * phase * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

        let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                vectors[(k, new_col)] = v[(k, old_col)];
            }
        }
        (values, vectors)
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let (values, _) = self.eigh();
        values.first().copied().unwrap_or(0.0)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}
