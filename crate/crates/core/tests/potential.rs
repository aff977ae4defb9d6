use chemrep_core::RegularizedPotential;
use chemrep_verify::props::{c2_jump, growth_violations, integration_error, lower_bound_violations, s_grid, EPSS};

const PS: [f64; 4] = [1.1, 1.4, 1.5, 1.9];

#[test]
fn twice_continuously_differentiable() {
    for p in PS {
        for eps in EPSS {
            let jump = c2_jump(p, eps);
            assert!(jump <= 1e-12, "p={p} eps={eps}: {jump:e}");
        }
    }
}

#[test]
fn lower_bounds_on_each_branch() {
    for p in PS {
        for eps in EPSS {
            assert_eq!(lower_bound_violations(p, eps), 0, "p={p} eps={eps}");
        }
    }
}

#[test]
fn growth_bound_with_unit_constants() {
    for p in PS {
        for eps in EPSS {
            assert_eq!(growth_violations(p, eps), 0, "p={p} eps={eps}");
        }
    }
}

#[test]
fn mobility_and_curvature_relations() {
    for p in PS {
        for eps in EPSS {
            let pot = RegularizedPotential::new(p, eps).unwrap();
            for s in s_grid(eps) {
                let (f1, f2) = (pot.f_prime(s), pot.f_second(s));
                assert!(f2 >= eps.powf(2.0 - p) * (1.0 - 1e-14), "F'' below bound at {s}");
                assert!(f2 <= eps.powf(p - 2.0) * (1.0 + 1e-14), "F'' above bound at {s}");
                let a = pot.a_eps(s);
                assert!((a * f2 - (p - 1.0) * f1).abs() <= 1e-12 * f1.abs().max(f2 * eps), "p={p} eps={eps} s={s}");
            }
        }
    }
}

#[test]
fn matches_integrated_second_derivative() {
    for p in PS {
        for eps in EPSS {
            let err = integration_error(p, eps);
            assert!(err <= 1e-7, "p={p} eps={eps}: {err:e}");
        }
    }
}
