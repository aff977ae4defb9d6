//! Preconditioned Krylov solvers: Jacobi conjugate gradients for the SPD
//! systems, ILU(0) BiCGStab for the convection systems.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix, Ilu0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    /// Iteration cap; `None` means ten times the system size.
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn new(rel_tol: f64, max_iter: Option<usize>) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
        }
        if max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(Self { rel_tol, max_iter })
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||Ax - b|| / ||b||`, recomputed from the returned iterate.
    pub rel_residual: f64,
}

fn check_dims(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>) -> Result<()> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
        }
    }
    Ok(())
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.mul_vec_into(x, r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
}

fn inverse_diagonal(a: &CsrMatrix) -> Vec<f64> {
    a.diag()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

/// Solves `Ax = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, cfg: &SolverConfig) -> Result<Solution> {
    check_dims(a, b, x0)?;
    let n = a.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(Solution { x: vec![0.0; n], iterations: 0, rel_residual: 0.0 });
    }
    let target = cfg.rel_tol * bnorm;
    let cap = cfg.cap(n);
    let dinv = inverse_diagonal(a);

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut it = 0;

    // the outer loop restarts from the true residual whenever the recursive
    // one has drifted below the target
    loop {
        residual(a, &x, b, &mut r);
        let rn = norm2(&r);
        if rn <= target {
            return Ok(Solution { x, iterations: it, rel_residual: rn / bnorm });
        }
        if it >= cap {
            return Err(Error::SolverNotConverged { iterations: it, residual: rn / bnorm });
        }
        z.iter_mut().zip(&r).zip(&dinv).for_each(|((zi, ri), di)| *zi = ri * di);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while it < cap {
            it += 1;
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                return Err(Error::SolverNotConverged { iterations: it, residual: norm2(&r) / bnorm });
            }
            let alpha = rz / pap;
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
            if norm2(&r) <= target {
                break;
            }
            z.iter_mut().zip(&r).zip(&dinv).for_each(|((zi, ri), di)| *zi = ri * di);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
    }
}

/// Solves `Ax = b` for a general nonsingular `A`. On breakdown the iteration
/// restarts once from the current iterate. Falls back to Jacobi if the
/// incomplete factorization has a zero pivot.
pub fn solve_general(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, cfg: &SolverConfig) -> Result<Solution> {
    check_dims(a, b, x0)?;
    let n = a.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(Solution { x: vec![0.0; n], iterations: 0, rel_residual: 0.0 });
    }
    let target = cfg.rel_tol * bnorm;
    let cap = cfg.cap(n);
    let ilu = Ilu0::new(a);
    let dinv = inverse_diagonal(a);
    let precond = |r: &[f64], z: &mut [f64]| match &ilu {
        Some(f) => f.apply(r, z),
        None => z.iter_mut().zip(r).zip(&dinv).for_each(|((zi, ri), di)| *zi = ri * di),
    };

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut it = 0;
    let mut breakdowns = 0;

    'restart: loop {
        residual(a, &x, b, &mut r);
        let rn = norm2(&r);
        if rn <= target {
            return Ok(Solution { x, iterations: it, rel_residual: rn / bnorm });
        }
        if it >= cap {
            return Err(Error::SolverNotConverged { iterations: it, residual: rn / bnorm });
        }
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        p.iter_mut().for_each(|e| *e = 0.0);

        while it < cap {
            it += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || omega == 0.0 || !rho_new.is_finite() {
                breakdowns += 1;
                if breakdowns > 1 {
                    return Err(Error::SolverNotConverged { iterations: it, residual: norm2(&r) / bnorm });
                }
                continue 'restart;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precond(&p, &mut phat);
            a.mul_vec_into(&phat, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                breakdowns += 1;
                if breakdowns > 1 {
                    return Err(Error::SolverNotConverged { iterations: it, residual: norm2(&r) / bnorm });
                }
                continue 'restart;
            }
            alpha = rho / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm2(&s) <= target {
                x.iter_mut().zip(&phat).for_each(|(xi, pi)| *xi += alpha * pi);
                continue 'restart;
            }
            precond(&s, &mut shat);
            a.mul_vec_into(&shat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm2(&r) <= target {
                continue 'restart;
            }
        }
        residual(a, &x, b, &mut r);
        return Err(Error::SolverNotConverged { iterations: it, residual: norm2(&r) / bnorm });
    }
}
