#![allow(clippy::excessive_precision)]

use deepca::harness::{compute_theory_bounds, consensus_rate, rho_cap_at, rho_cap_terms, BoundInputs};
use proptest::prelude::*;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

// Reference values computed with 40-digit arithmetic from the closed forms.
#[test]
fn full_parameter_set_matches_reference() {
    let p = BoundInputs {
        k: 3,
        m: 10,
        lambda_k: 2.0,
        lambda_k1: 1.0,
        spectral_bound: 4.5,
        lambda2: 0.5437,
        tan_theta0: 3.0,
    };
    let b = compute_theory_bounds(&p, 20, 120, 1e-6).unwrap();
    assert_eq!(b.gamma, 0.75);
    assert_eq!(b.k_sufficient, 25);
    assert_eq!(b.t_sufficient, 71);
    assert_eq!(b.c_total, 1775);
    assert!(close(b.rho, 1.6760963329491976068e-10, 1e-12));
    assert!(close(b.rho_cap, 1.7475171187625021025e-5, 1e-12));
    assert!(close(b.rho_cap_first, 3.5332734691962592654e-7, 1e-12));
    let t1 = rho_cap_terms(&p, 1);
    assert!(close(t1[0], 0.375, 1e-15));
    assert!(close(t1[2], 5.0797708898307431222e-5, 1e-12));
    let t120 = rho_cap_terms(&p, 120);
    assert!(close(t120[2], 2.6343645562718087348e11, 1e-9));
    assert!(!b.k_steps_sufficient);
    assert!(b.max_iters_sufficient);
    assert!(b.rho_condition_met);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sufficient_k_meets_rho_cap(
        k in 1usize..6,
        m in 1usize..200,
        lambda_k1 in 0.01f64..5.0,
        gap in 0.01f64..5.0,
        l_scale in 1.0f64..3.0,
        lambda2 in 0.0f64..0.99,
        tan0 in 0.001f64..100.0,
        t in 1usize..500,
    ) {
        let lambda_k = lambda_k1 + gap;
        let p = BoundInputs {
            k,
            m,
            lambda_k,
            lambda_k1,
            spectral_bound: lambda_k * l_scale,
            lambda2,
            tan_theta0: tan0,
        };
        let b = compute_theory_bounds(&p, 1, t, 1e-6).unwrap();
        let rho = consensus_rate(lambda2, b.k_sufficient as usize);
        prop_assert!(rho < rho_cap_at(&p, t), "rho {} cap {}", rho, rho_cap_at(&p, t));
        prop_assert!(b.gamma > 0.0 && b.gamma < 1.0);
        prop_assert!((0.0..=1.0).contains(&b.rho));
    }
}
