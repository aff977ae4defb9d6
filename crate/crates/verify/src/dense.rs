//! Dense reference implementation of the schemes.
//!
//! Only the mesh topology is shared with the library. Geometry, quadrature,
//! the Λ matrices and all linear algebra are computed here from scratch.

use chemrep_core::{RegularizedPotential, Scheme, StructuredTriMesh};
use nalgebra::{DMatrix, DVector};

/// Seven-point rule, exact for degree 5 (barycentric point, weight / area).
const A1: f64 = 0.059_715_871_789_770;
const B1: f64 = 0.470_142_064_105_115;
const A2: f64 = 0.797_426_985_353_087;
const B2: f64 = 0.101_286_507_323_456;
const W0: f64 = 0.225;
const W1: f64 = 0.132_394_152_788_506;
const W2: f64 = 0.125_939_180_544_827;

fn rule() -> Vec<([f64; 3], f64)> {
    vec![
        ([1.0 / 3.0; 3], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
}

pub struct Dense {
    pub n: usize,
    pub nodes: Vec<[f64; 2]>,
    pub elems: Vec<[usize; 3]>,
    pub area: Vec<f64>,
    pub grads: Vec<[[f64; 2]; 3]>,
    pub lx: f64,
    pub ly: f64,
}

impl Dense {
    pub fn new(mesh: &StructuredTriMesh) -> Self {
        let nodes = mesh.nodes().to_vec();
        let elems = mesh.elements().to_vec();
        let mut area = Vec::new();
        let mut grads = Vec::new();
        for t in &elems {
            let p: Vec<[f64; 2]> = t.iter().map(|&i| nodes[i]).collect();
            // rows of the inverse of [[1,1,1],[x0,x1,x2],[y0,y1,y2]] hold (c, ∂x, ∂y)
            let v = DMatrix::from_row_slice(
                3,
                3,
                &[1.0, 1.0, 1.0, p[0][0], p[1][0], p[2][0], p[0][1], p[1][1], p[2][1]],
            );
            area.push(0.5 * v.determinant().abs());
            let inv = v.try_inverse().expect("degenerate element");
            grads.push([
                [inv[(0, 1)], inv[(0, 2)]],
                [inv[(1, 1)], inv[(1, 2)]],
                [inv[(2, 1)], inv[(2, 2)]],
            ]);
        }
        Self { n: nodes.len(), nodes, elems, area, grads, lx: mesh.lx(), ly: mesh.ly() }
    }

    fn quad(&self, e: usize, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.area[e] * rule().iter().map(|(b, w)| w * f(b)).sum::<f64>()
    }

    fn p1_at(&self, e: usize, u: &[f64], b: &[f64; 3]) -> f64 {
        (0..3).map(|i| u[self.elems[e][i]] * b[i]).sum()
    }

    pub fn grad(&self, u: &[f64]) -> Vec<[f64; 2]> {
        (0..self.elems.len())
            .map(|e| {
                let t = self.elems[e];
                let g = &self.grads[e];
                [
                    (0..3).map(|i| u[t[i]] * g[i][0]).sum(),
                    (0..3).map(|i| u[t[i]] * g[i][1]).sum(),
                ]
            })
            .collect()
    }

    pub fn mass(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (e, t) in self.elems.iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    m[(t[i], t[j])] += self.quad(e, |b| b[i] * b[j]);
                }
            }
        }
        m
    }

    /// Vertex-rule mass, `∫ Π^h(u w)`.
    pub fn lumped(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for (e, t) in self.elems.iter().enumerate() {
            for &a in t {
                d[a] += self.area[e] / 3.0;
            }
        }
        d
    }

    pub fn stiffness(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n, self.n);
        for (e, t) in self.elems.iter().enumerate() {
            let g = &self.grads[e];
            for i in 0..3 {
                for j in 0..3 {
                    s[(t[i], t[j])] += self.quad(e, |_| g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        s
    }

    /// `∫ φ_j w·∇φ_i` for element-constant `w`.
    pub fn convection_elem(&self, w: &[[f64; 2]]) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.n, self.n);
        for (e, t) in self.elems.iter().enumerate() {
            let g = &self.grads[e];
            for i in 0..3 {
                for j in 0..3 {
                    c[(t[i], t[j])] += self.quad(e, |b| b[j] * (w[e][0] * g[i][0] + w[e][1] * g[i][1]));
                }
            }
        }
        c
    }

    /// `∫ φ_j σ·∇φ_i` for a P1 vector field `σ`.
    pub fn convection_nodal(&self, s: &[[f64; 2]]) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.n, self.n);
        for (e, t) in self.elems.iter().enumerate() {
            let g = &self.grads[e];
            let sx: Vec<f64> = t.iter().map(|&a| s[a][0]).collect();
            let sy: Vec<f64> = t.iter().map(|&a| s[a][1]).collect();
            for i in 0..3 {
                for j in 0..3 {
                    c[(t[i], t[j])] += self.quad(e, |b| {
                        let wx: f64 = (0..3).map(|k| sx[k] * b[k]).sum();
                        let wy: f64 = (0..3).map(|k| sy[k] * b[k]).sum();
                        b[j] * (wx * g[i][0] + wy * g[i][1])
                    });
                }
            }
        }
        c
    }

    /// `(w, ∇φ_i)` for element-constant `w`.
    pub fn grad_load(&self, w: &[[f64; 2]]) -> DVector<f64> {
        let mut b = DVector::zeros(self.n);
        for (e, t) in self.elems.iter().enumerate() {
            let g = &self.grads[e];
            for i in 0..3 {
                b[t[i]] += self.quad(e, |_| w[e][0] * g[i][0] + w[e][1] * g[i][1]);
            }
        }
        b
    }

    pub fn vec_mass(&self) -> DMatrix<f64> {
        let m = self.mass();
        let mut out = DMatrix::zeros(2 * self.n, 2 * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                for d in 0..2 {
                    out[(2 * i + d, 2 * j + d)] = m[(i, j)];
                }
            }
        }
        out
    }

    /// `(rot σ, rot τ) + (div σ, div τ) + (σ, τ)`.
    pub fn bh(&self) -> DMatrix<f64> {
        let mut out = self.vec_mass();
        for (e, t) in self.elems.iter().enumerate() {
            let g = &self.grads[e];
            // (div, rot) of φ_i e_d
            let dr = |i: usize, d: usize| -> (f64, f64) {
                if d == 0 {
                    (g[i][0], -g[i][1])
                } else {
                    (g[i][1], g[i][0])
                }
            };
            for i in 0..3 {
                for a in 0..2 {
                    for j in 0..3 {
                        for c in 0..2 {
                            let (di, ri) = dr(i, a);
                            let (dj, rj) = dr(j, c);
                            out[(2 * t[i] + a, 2 * t[j] + c)] += self.quad(e, |_| di * dj + ri * rj);
                        }
                    }
                }
            }
        }
        out
    }

    /// `(Π^h(u) g, φ_k e_d)` for element-constant `g`.
    pub fn weighted_vec_load(&self, u: &[f64], g: &[[f64; 2]]) -> DVector<f64> {
        let mut b = DVector::zeros(2 * self.n);
        for (e, t) in self.elems.iter().enumerate() {
            for k in 0..3 {
                let w = self.quad(e, |bc| self.p1_at(e, u, bc) * bc[k]);
                b[2 * t[k]] += w * g[e][0];
                b[2 * t[k] + 1] += w * g[e][1];
            }
        }
        b
    }

    /// Element means of `Π^h f` by quadrature.
    pub fn means(&self, f: &[f64]) -> Vec<f64> {
        (0..self.elems.len())
            .map(|e| self.quad(e, |b| self.p1_at(e, f, b)) / self.area[e])
            .collect()
    }

    /// Interleaved DOFs of the normal component on the boundary.
    pub fn normal_dofs(&self) -> Vec<bool> {
        let on = |x: f64, l: f64| x.abs() < 1e-12 || (x - l).abs() < 1e-12;
        self.nodes
            .iter()
            .flat_map(|p| [on(p[0], self.lx), on(p[1], self.ly)])
            .collect()
    }

    /// Λ² found geometrically: the legs are the node pairs sharing a y (x leg)
    /// or an x (y leg) coordinate.
    pub fn lambda2(&self, pot: &RegularizedPotential, u: &[f64]) -> Vec<[f64; 2]> {
        let pm1 = pot.p() - 1.0;
        let dd = |a: f64, b: f64| {
            if (a - b).abs() <= 1e-12 * a.abs().max(1.0) {
                pot.a_eps(a)
            } else {
                pm1 * (pot.f_value(b) - pot.f_value(a)) / (pot.f_prime(b) - pot.f_prime(a))
            }
        };
        self.legs()
            .iter()
            .map(|&[(x0, x1), (y0, y1)]| [dd(u[x0], u[x1]), dd(u[y0], u[y1])])
            .collect()
    }

    /// Per element the node pairs `(right angle, x neighbour)`, `(right angle, y neighbour)`.
    pub fn legs(&self) -> Vec<[(usize, usize); 2]> {
        self.elems
            .iter()
            .map(|t| {
                let same = |a: usize, b: usize, d: usize| (self.nodes[a][d] - self.nodes[b][d]).abs() < 1e-12;
                for r in 0..3 {
                    let (a, b) = (t[(r + 1) % 3], t[(r + 2) % 3]);
                    let c = t[r];
                    if same(c, a, 1) && same(c, b, 0) {
                        return [(c, a), (c, b)];
                    }
                    if same(c, b, 1) && same(c, a, 0) {
                        return [(c, b), (c, a)];
                    }
                }
                panic!("element without a right angle at axis-aligned legs");
            })
            .collect()
    }
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().lu().solve(b).expect("singular oracle system")
}

/// Solves on the free DOFs only, zero on the fixed ones.
pub fn solve_free(a: &DMatrix<f64>, b: &DVector<f64>, fixed: &[bool]) -> DVector<f64> {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| !fixed[i]).collect();
    let af = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let bf = DVector::from_fn(free.len(), |i, _| b[free[i]]);
    let xf = solve(&af, &bf);
    let mut x = DVector::zeros(fixed.len());
    for (i, &f) in free.iter().enumerate() {
        x[f] = xf[i];
    }
    x
}

fn pos_pow(s: f64, r: f64) -> f64 {
    if s > 0.0 {
        s.powf(r)
    } else {
        0.0
    }
}

fn rel_change(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub struct OracleState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

/// One backward Euler step of `scheme`, solved as a fixed point with plain
/// Picard sweeps on dense systems.
pub fn oracle_step(d: &Dense, scheme: Scheme, p: f64, eps: f64, k: f64, prev: &OracleState) -> OracleState {
    let m = d.mass();
    let s = d.stiffness();
    let dl = d.lumped();
    let dm = DMatrix::from_diagonal(&dl);
    let u0 = DVector::from_column_slice(&prev.u);
    let v0 = DVector::from_column_slice(&prev.v);
    let v_mat = &m / k + &s + &m;
    let pot = RegularizedPotential::new(p, if scheme.uses_eps() { eps } else { 0.5 }).unwrap();
    let mut u = u0.clone();
    let vec_of = |x: &DVector<f64>| x.iter().copied().collect::<Vec<f64>>();

    match scheme {
        Scheme::Uv | Scheme::UvEps => {
            let mut v = v0.clone();
            for _ in 0..1000 {
                let gv = d.grad(&vec_of(&v));
                let un = if scheme == Scheme::Uv {
                    solve(&(&m / k + &s + d.convection_elem(&gv)), &(&m * &u0 / k))
                } else {
                    let flux: Vec<[f64; 2]> = d
                        .lambda2(&pot, &vec_of(&u))
                        .iter()
                        .zip(&gv)
                        .map(|(l, g)| [l[0] * g[0], l[1] * g[1]])
                        .collect();
                    solve(&(&dm / k + &s), &(&dm * &u0 / k - d.grad_load(&flux)))
                };
                let prod = if scheme == Scheme::Uv {
                    let pu = DVector::from_iterator(d.n, un.iter().map(|&x| pos_pow(x, p)));
                    dl.component_mul(&pu)
                } else {
                    &m * DVector::from_iterator(d.n, un.iter().map(|&x| p * (p - 1.0) * pot.f_value(x)))
                };
                let vn = solve(&v_mat, &(&m * &v0 / k + prod));
                let change = rel_change(&un, &u).max(rel_change(&vn, &v));
                u = un;
                v = vn;
                if change < 1e-15 {
                    break;
                }
            }
            OracleState { u: vec_of(&u), v: vec_of(&v), sigma: None }
        }
        Scheme::UsEps | Scheme::Us0 => {
            let fixed = d.normal_dofs();
            let vm = d.vec_mass();
            let s_mat = &vm / k + d.bh();
            let s0 = DVector::from_column_slice(prev.sigma.as_ref().expect("σ state"));
            let mut sig = s0.clone();
            for _ in 0..1000 {
                let nodal: Vec<[f64; 2]> = (0..d.n).map(|i| [sig[2 * i], sig[2 * i + 1]]).collect();
                let a = &dm / k + &s + d.convection_nodal(&nodal);
                let mut rhs = &dm * &u0 / k;
                if scheme == Scheme::Us0 {
                    let uv = vec_of(&u);
                    let coef = d.means(&uv.iter().map(|&x| pos_pow(x, 2.0 - p)).collect::<Vec<_>>());
                    let g = d.grad(&uv.iter().map(|&x| pos_pow(x, p - 1.0)).collect::<Vec<_>>());
                    let flux: Vec<[f64; 2]> = coef.iter().zip(&g).map(|(c, g)| [c * g[0], c * g[1]]).collect();
                    rhs += &s * &u - d.grad_load(&flux) / (p - 1.0);
                }
                let un = solve(&a, &rhs);
                let uv = vec_of(&un);
                let load = if scheme == Scheme::UsEps {
                    let g = d.grad(&uv.iter().map(|&x| pot.f_prime(x)).collect::<Vec<_>>());
                    d.weighted_vec_load(&uv, &g) * p
                } else {
                    let g = d.grad(&uv.iter().map(|&x| pos_pow(x, p - 1.0)).collect::<Vec<_>>());
                    d.weighted_vec_load(&uv, &g) * (p / (p - 1.0))
                };
                let sn = solve_free(&s_mat, &(&vm * &s0 / k + load), &fixed);
                let change = rel_change(&un, &u).max(rel_change(&sn, &sig));
                u = un;
                sig = sn;
                if change < 1e-15 {
                    break;
                }
            }
            let prod = DVector::from_iterator(
                d.n,
                u.iter().map(|&x| if scheme == Scheme::UsEps { p * (p - 1.0) * pot.f_value(x) } else { pos_pow(x, p) }),
            );
            let v = solve(&v_mat, &(&m * &v0 / k + dl.component_mul(&prod)));
            OracleState { u: vec_of(&u), v: vec_of(&v), sigma: Some(vec_of(&sig)) }
        }
    }
}

/// Largest absolute difference over all entries.
pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Initial data for the oracle comparisons: positive, with a node in the
/// lower regularization branch for small `ε`.
pub fn oracle_data(x: f64, y: f64) -> (f64, f64, [f64; 2]) {
    let u = 0.02 + 0.6 * x * x * (1.0 + 0.5 * y);
    let v = 1.0 + 0.4 * x * y + 0.3 * y * y;
    (u, v, [0.4 * y, 0.4 * x + 0.6 * y])
}

/// Max nodal difference between one library step and one oracle step on a
/// 2×2-cell mesh; infinite if the library step fails.
pub fn oracle_step_error(scheme: Scheme) -> f64 {
    use chemrep_core::{SchemeConfig, Simulator};
    let (p, eps, k) = (1.5, 0.05, 1e-3);
    let mesh = StructuredTriMesh::new(2, 2, 2.0, 2.0).unwrap();
    let mut cfg = SchemeConfig::new(scheme, p, eps, k);
    cfg.picard_tol = 1e-13;
    cfg.picard_max = 500;
    cfg.solver.rel_tol = 1e-15;
    let sim = Simulator::new(mesh.clone(), cfg).expect("valid configuration");
    let st = sim
        .init_state(&|x, y| oracle_data(x, y).0, &|x, y| oracle_data(x, y).1, &|x, y| oracle_data(x, y).2)
        .expect("positive data");
    let Ok((next, _)) = sim.step(&st) else {
        return f64::INFINITY;
    };
    let d = Dense::new(&mesh);
    let prev = OracleState {
        u: st.u.0.clone(),
        v: st.v.0.clone(),
        sigma: st.sigma.as_ref().map(|s| s.to_dofs()),
    };
    let want = oracle_step(&d, scheme, p, eps, k, &prev);
    let mut err = max_diff(&next.u.0, &want.u).max(max_diff(&next.v.0, &want.v));
    if let (Some(s), Some(ws)) = (&next.sigma, &want.sigma) {
        err = err.max(max_diff(&s.to_dofs(), ws));
    }
    err
}
