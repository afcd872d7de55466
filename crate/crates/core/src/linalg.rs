//! Dense complex linear algebra used by the solver: LU with partial
//! pivoting, one-norm condition estimates, and a deterministic largest
//! singular value. Matrices here are at most a few hundred rows, so simple
//! cubic kernels are plenty; matrix products go through `ndarray::dot`,
//! which dispatches to a SIMD complex gemm.

use ndarray::{Array1, Array2};

use crate::error::Error;
use crate::{Result, C64};

/// Largest entry magnitude.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum column sum of entry magnitudes (the operator 1-norm).
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0_f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Euclidean norm of a vector.
pub fn norm2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization with partial pivoting, `P A = L U` stored packed.
pub struct LuFactors {
    lu: Array2<C64>,
    piv: Vec<usize>,
}

/// Factors a square matrix; fails on exact singularity.
pub fn lu_factor(a: &Array2<C64>) -> Result<LuFactors> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "lu_factor requires a square matrix");
    let mut lu = a.clone();
    let mut piv = Vec::with_capacity(n);
    for c in 0..n {
        let mut best = c;
        let mut best_mag = lu[[c, c]].norm_sqr();
        for r in c + 1..n {
            let mag = lu[[r, c]].norm_sqr();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            return Err(Error::SingularSystem);
        }
        piv.push(best);
        if best != c {
            for j in 0..n {
                let tmp = lu[[c, j]];
                lu[[c, j]] = lu[[best, j]];
                lu[[best, j]] = tmp;
            }
        }
        let inv_pivot = C64::new(1.0, 0.0) / lu[[c, c]];
        for r in c + 1..n {
            let factor = lu[[r, c]] * inv_pivot;
            lu[[r, c]] = factor;
            if factor != C64::new(0.0, 0.0) {
                for j in c + 1..n {
                    let sub = factor * lu[[c, j]];
                    lu[[r, j]] -= sub;
                }
            }
        }
    }
    Ok(LuFactors { lu, piv })
}

impl LuFactors {
    fn n(&self) -> usize {
        self.lu.nrows()
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &Array1<C64>) -> Array1<C64> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let mut x = b.clone();
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                x.swap(c, p);
            }
        }
        for r in 1..n {
            let mut acc = x[r];
            for j in 0..r {
                acc -= self.lu[[r, j]] * x[j];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for j in r + 1..n {
                acc -= self.lu[[r, j]] * x[j];
            }
            x[r] = acc / self.lu[[r, r]];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &Array2<C64>) -> Array2<C64> {
        let n = self.n();
        assert_eq!(b.nrows(), n);
        let mut x = Array2::zeros((n, b.ncols()));
        for (j, col) in b.columns().into_iter().enumerate() {
            let sol = self.solve_vec(&col.to_owned());
            x.column_mut(j).assign(&sol);
        }
        x
    }

    /// Explicit inverse (the matrices here are small enough that this is the
    /// simplest trustworthy route to a condition number).
    pub fn inverse(&self) -> Array2<C64> {
        let n = self.n();
        let mut eye = Array2::zeros((n, n));
        for i in 0..n {
            eye[[i, i]] = C64::new(1.0, 0.0);
        }
        self.solve_mat(&eye)
    }
}

/// One-norm condition number via the explicit inverse.
pub fn cond_1(a: &Array2<C64>) -> Result<f64> {
    let lu = lu_factor(a)?;
    Ok(one_norm(a) * one_norm(&lu.inverse()))
}

/// Largest singular value by power iteration on `A^H A`, started from a
/// fixed vector so repeated calls are bit-for-bit reproducible. Scaling the
/// matrix by 2 scales the result exactly.
pub fn sigma_max(a: &Array2<C64>) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 || max_abs(a) == 0.0 {
        return 0.0;
    }
    let ah = a.t().mapv(|z| z.conj());
    let mut v = Array1::<C64>::from_elem(n, C64::new(1.0, 0.0));
    let nv = norm2(&v);
    v.mapv_inplace(|z| z / nv);
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = a.dot(&v);
        let s = norm2(&w);
        if s == 0.0 {
            // started orthogonal to the row space; perturb deterministically
            v[0] += C64::new(0.0, 1.0);
            let nv = norm2(&v);
            v.mapv_inplace(|z| z / nv);
            continue;
        }
        v = ah.dot(&w);
        let nv = norm2(&v);
        v.mapv_inplace(|z| z / nv);
        if (s - sigma).abs() <= 1e-13 * s {
            return s;
        }
        sigma = s;
    }
    sigma
}
