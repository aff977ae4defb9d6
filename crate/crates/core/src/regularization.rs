//! Regularized production potential.
//!
//! `F_eps` is a C² convex function built from the second derivative
//!
//! ```text
//!            eps^(p-2)   s <= eps
//! F''(s) =   s^(p-2)     eps <= s <= 1/eps
//!            eps^(2-p)   s >= 1/eps
//! ```
//!
//! normalized by `F'(1) = 1/(p-1)` and the C² matching at `s = eps`. On the
//! middle branch `F(s) = s^p / (p(p-1)) + c2 eps^p`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedPotential {
    p: f64,
    eps: f64,
    inv_eps: f64,
    /// `(2-p)/(p-1)`
    q: f64,
    /// additive constant of the middle branch of `F`
    c2: f64,
    // values of the middle branch at 1/eps, used by the high branch
    f_hi: f64,
    fp_hi: f64,
    fpp_hi: f64,
    // powers of eps that appear in the tails
    eps_pm2: f64,
    eps_pm1: f64,
    eps_p: f64,
}

impl RegularizedPotential {
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "production exponent p must lie in (1, 2), got {p}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "regularization eps must lie in (0, 1), got {eps}"
            )));
        }
        let inv_eps = 1.0 / eps;
        let q = (2.0 - p) / (p - 1.0);
        let c2 = (p.powi(3) - 4.0 * p * p + 3.0 * p + 2.0) / (2.0 * p * (p - 1.0).powi(2));
        let eps_p = eps.powf(p);
        let f_hi = inv_eps.powf(p) / (p * (p - 1.0)) + c2 * eps_p;
        let fp_hi = inv_eps.powf(p - 1.0) / (p - 1.0);
        let fpp_hi = eps.powf(2.0 - p);
        Ok(Self {
            p,
            eps,
            inv_eps,
            q,
            c2,
            f_hi,
            fp_hi,
            fpp_hi,
            eps_pm2: eps.powf(p - 2.0),
            eps_pm1: eps.powf(p - 1.0),
            eps_p,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Constant `c2 = (p³-4p²+3p+2) / (2p(p-1)²)` of the middle branch.
    pub fn middle_constant(&self) -> f64 {
        self.c2
    }

    /// Lower bound `eps^(2-p)` of `F''`.
    pub fn min_curvature(&self) -> f64 {
        self.fpp_hi
    }

    /// Upper bound `eps^(p-2)` of `F''`.
    pub fn max_curvature(&self) -> f64 {
        self.eps_pm2
    }

    pub fn f_second(&self, s: f64) -> f64 {
        if s <= self.eps {
            self.eps_pm2
        } else if s >= self.inv_eps {
            self.fpp_hi
        } else {
            (s.ln() * (self.p - 2.0)).exp()
        }
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        if s <= self.eps {
            self.eps_pm2 * s + self.q * self.eps_pm1
        } else if s >= self.inv_eps {
            self.fp_hi + self.fpp_hi * (s - self.inv_eps)
        } else {
            (s.ln() * (self.p - 1.0)).exp() / (self.p - 1.0)
        }
    }

    pub fn f_value(&self, s: f64) -> f64 {
        if s <= self.eps {
            0.5 * self.eps_pm2 * s * s + self.q * self.eps_pm1 * s + self.q * self.q * self.eps_p
        } else if s >= self.inv_eps {
            let d = s - self.inv_eps;
            self.f_hi + self.fp_hi * d + 0.5 * self.fpp_hi * d * d
        } else {
            (s.ln() * self.p).exp() / (self.p * (self.p - 1.0)) + self.c2 * self.eps_p
        }
    }

    /// Mobility `a_eps(s) = (p-1) F'(s) / F''(s)`.
    pub fn a_eps(&self, s: f64) -> f64 {
        let p = self.p;
        if s <= self.eps {
            (p - 1.0) * s + (2.0 - p) * self.eps
        } else if s >= self.inv_eps {
            (p - 1.0) * s + (2.0 - p) * self.inv_eps
        } else {
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot() -> RegularizedPotential {
        RegularizedPotential::new(1.5, 0.01).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(RegularizedPotential::new(1.0, 0.1).is_err());
        assert!(RegularizedPotential::new(2.0, 0.1).is_err());
        assert!(RegularizedPotential::new(1.5, 0.0).is_err());
        assert!(RegularizedPotential::new(1.5, 1.0).is_err());
        assert!(RegularizedPotential::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn second_derivative_branches() {
        let f = pot();
        assert!(close(f.f_second(1.0), 1.0, 1e-14));
        assert!(close(f.f_second(0.005), 10.0, 1e-13));
        assert!(close(f.f_second(200.0), 0.1, 1e-13));
        assert!(close(f.f_second(-3.0), 10.0, 1e-13));
    }

    #[test]
    fn first_derivative_values() {
        let f = pot();
        assert!(close(f.f_prime(1.0), 2.0, 1e-14));
        assert!(close(f.f_prime(0.0), 0.1, 1e-13));
        assert!(close(f.f_prime(4.0), 4.0, 1e-13));
    }

    #[test]
    fn potential_values() {
        let f = pot();
        assert!(close(f.f_value(0.0), 0.001, 1e-13));
        assert!(close(f.f_value(0.01), 0.0025, 1e-12));
        assert!(close(f.f_value(1.0), 4.0 / 3.0 + 7.0 / 6.0 * 0.001, 1e-14));
        assert!(close(f.middle_constant(), 7.0 / 6.0, 1e-14));
    }

    #[test]
    fn mobility_values() {
        let f = pot();
        assert!(close(f.a_eps(1.0), 1.0, 1e-15));
        assert!(close(f.a_eps(0.0), 0.005, 1e-15));
        assert!(close(f.a_eps(200.0), 150.0, 1e-13));
    }

    #[test]
    fn mobility_matches_derivative_ratio() {
        for &(p, eps) in &[(1.1, 1e-1), (1.5, 1e-3), (1.9, 1e-5)] {
            let f = RegularizedPotential::new(p, eps).unwrap();
            for i in 0..2000 {
                let s = -2.0 + i as f64 * (2.0 / eps + 2.0) / 2000.0;
                let lhs = f.a_eps(s) * f.f_second(s);
                let rhs = (p - 1.0) * f.f_prime(s);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "p={p} eps={eps} s={s}");
            }
        }
    }
}
