//! Dense complex matrices, sized for the fiber dimension d (small: d ≤ 64).
//!
//! Row-major storage. The operations here are exactly what the spectral
//! machinery needs: products, LU solves, and spectral norms via a Hermitian
//! Jacobi eigensolver on `A^H A`. Everything is deterministic: fixed sweep
//! orders, fixed pivot rules, no randomized starts.

use num_complex::Complex64;

use crate::error::LinalgError;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row slices; panics if rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        ZMat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, rhs: &ZMat) -> ZMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = ZMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn sub(&self, rhs: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ZMat {
        let mut out = ZMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm ‖A‖₂ = σ_max(A), via Jacobi eigenvalues of A^H A.
    pub fn spectral_norm(&self) -> f64 {
        if self.data.iter().all(|z| z.norm_sqr() == 0.0) {
            return 0.0;
        }
        let gram = self.adjoint().mul(self);
        let eigs = hermitian_eigenvalues(&gram);
        eigs.iter().fold(0.0f64, |m, &x| m.max(x.max(0.0))).sqrt()
    }

    /// Solve A X = B by LU with partial pivoting; A must be square.
    pub fn solve(&self, b: &ZMat) -> Result<ZMat, LinalgError> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, b.rows, "dimension mismatch");
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[(col, col)].norm();
            for r in col + 1..n {
                let mag = lu[(r, col)].norm();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    let t = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = t;
                }
                perm.swap(col, pivot);
                for j in 0..x.cols {
                    let t = x[(col, j)];
                    x[(col, j)] = x[(pivot, j)];
                    x[(pivot, j)] = t;
                }
            }
            let diag = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / diag;
                lu[(r, col)] = factor;
                for j in col + 1..n {
                    let upd = lu[(col, j)];
                    lu[(r, j)] -= factor * upd;
                }
                for j in 0..x.cols {
                    let upd = x[(col, j)];
                    x[(r, j)] -= factor * upd;
                }
            }
        }
        // Back substitution.
        for j in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in i + 1..n {
                    acc -= lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ZMat, LinalgError> {
        self.solve(&ZMat::identity(self.rows))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for ZMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Only the values are needed (norm computations), so rotations are not
/// accumulated. Input is assumed Hermitian; the strictly lower triangle is
/// ignored after symmetrization.
pub fn hermitian_eigenvalues(h: &ZMat) -> Vec<f64> {
    assert_eq!(h.rows, h.cols);
    let n = h.rows;
    let mut a = h.clone();
    // Symmetrize to wash out rounding asymmetry from the Gram product.
    for i in 0..n {
        for j in i + 1..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
        let d = a[(i, i)].re;
        a[(i, i)] = Complex64::new(d, 0.0);
    }

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = f64::EPSILON * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 1e-3 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase that makes the pivot entry real, then a real Jacobi rotation.
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let sp = phase * s; // acts like the complex sine
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * sp.conj();
                    a[(k, q)] = akq * c - akp * sp;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * sp;
                    a[(q, k)] = aqk * c - apk * sp.conj();
                }
                let dp = a[(p, p)].re;
                let dq = a[(q, q)].re;
                a[(p, p)] = Complex64::new(dp, 0.0);
                a[(q, q)] = Complex64::new(dq, 0.0);
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}
