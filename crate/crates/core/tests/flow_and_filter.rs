use fermigap::assembly::{critical_b, decomposition_identity, gap_lower_bound, relative_bound_b, GapBound};
use fermigap::doubled::build_doubled_h0;
use fermigap::flow::{apply_filter, integrate_flow, uniform_grid, w_hat, WeightFunction};
use fermigap::fock::FockSpace;
use fermigap::lieb_robinson::{evolution_checks, reference_decay, time_grid, Evolution};
use fermigap::linalg::{hermitian_eigen, spectral_norm, CMat, CVec, C64};
use fermigap::majorana::build_a;
use fermigap::models;
use proptest::prelude::*;

fn random_hermitian(dim: usize, entries: &[(f64, f64)]) -> CMat {
    let x = CMat::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[(i * dim + j) % entries.len()];
        C64::new(re, im)
    });
    (&x + x.adjoint()) * C64::from(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bump_is_even_bounded_and_compactly_supported(omega in -3.0f64..3.0, gamma in 0.1f64..2.0) {
        let w = w_hat(omega, gamma).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert_eq!(w, w_hat(-omega, gamma).unwrap());
        if omega.abs() >= gamma {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn time_weight_is_even(t in 0.0f64..10.0) {
        let tw = WeightFunction::new(0.8).unwrap().time_domain();
        prop_assert!((tw.eval(t) - tw.eval(-t)).abs() < 1e-14);
    }

    #[test]
    fn filter_fixes_functions_of_the_hamiltonian_and_kills_ground_state_leakage(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        probe in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let h0 = CMat::from_diagonal(&CVec::from_vec(vec![C64::from(0.0), C64::from(1.0), C64::from(1.3), C64::from(2.0)]));
        let v = random_hermitian(4, &entries) * C64::from(0.2);
        let states = integrate_flow(&h0, &v, &uniform_grid(0.2, 10), 2).unwrap();
        let st = states.last().unwrap();
        let gamma = 0.9 * states.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
        let ht = st.h_tilde();
        prop_assert!(spectral_norm(&(apply_filter(st, &ht, gamma) - &ht)) < 1e-12);
        let sq = &ht * &ht;
        prop_assert!(spectral_norm(&(apply_filter(st, &sq, gamma) - &sq)) < 1e-11);
        let a = CMat::from_fn(4, 4, |i, j| { let (re, im) = probe[i * 4 + j]; C64::new(re, im) });
        let v0 = st.conjugated_spectrum().vectors.column(0).into_owned();
        let p0 = &v0 * v0.adjoint();
        let q0 = CMat::identity(4, 4) - &p0;
        prop_assert!(spectral_norm(&(&q0 * apply_filter(st, &a, gamma) * &p0)) < 1e-10);
        prop_assert!(st.intertwining_residual < 1e-8);
    }

    #[test]
    fn gap_bound_decreases_in_b(b1 in 0.0f64..0.3, db in 0.0f64..0.009) {
        let lo = gap_lower_bound(b1, 1.0).unwrap().value().unwrap();
        let hi = gap_lower_bound(b1 + db, 1.0).unwrap().value().unwrap();
        prop_assert!(hi <= lo + 1e-15);
        prop_assert!(lo >= 0.5 - 1e-12);
    }

    #[test]
    fn relative_bound_dominates(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
        let bdg = build_a(&models::two_site_real().unwrap()).unwrap();
        let dh = build_doubled_h0(&bdg, 6).unwrap();
        let h0 = dh.h0.dense();
        let phi = dh.ground_state();
        let x = random_hermitian(16, &entries);
        let q = CMat::identity(16, 16) - &phi * phi.adjoint();
        let w = &q * x * &q;
        let rb = relative_bound_b(&w, &h0).unwrap();
        let gap_op = &h0 * &h0 * C64::from(rb.b * rb.b) - &w * &w;
        prop_assert!(hermitian_eigen(&gap_op).values[0] >= -1e-9);
    }

    #[test]
    fn decomposition_identity_any_order(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), k in 1usize..4) {
        let space = FockSpace::sites(4).unwrap();
        prop_assert!(decomposition_identity(&space, &perm[..k]).unwrap() < 1e-13);
    }

    #[test]
    fn reference_envelope_is_nonincreasing(mu in 0.0f64..2.0, r0 in 0.5f64..3.0, r in 0.0f64..40.0) {
        let (u1, f1) = reference_decay(mu, r0, r, 1).unwrap();
        let (u2, f2) = reference_decay(mu, r0, r + 0.5, 1).unwrap();
        prop_assert!(u2 <= u1 + 1e-15 && f2 <= f1 + 1e-15);
        prop_assert!(u1 > 0.0 && u1 <= 1.0);
    }
}

#[test]
fn bound_threshold_values() {
    assert!((gap_lower_bound(0.1, 1.0).unwrap().value().unwrap() - 0.888197).abs() < 1e-6);
    assert!((critical_b() - 0.309017).abs() < 1e-6);
    assert!(matches!(gap_lower_bound(0.35, 1.0).unwrap(), GapBound::ConditionViolated { .. }));
}

#[test]
fn heisenberg_evolution_is_isometric() {
    let chain = models::uniform_chain(4, 0.2).unwrap();
    let h = models::hopping_operator(&chain).unwrap().dense();
    let ev = Evolution::new(&h);
    let space = FockSpace::sites(4).unwrap();
    let a = fermigap::fock::number(&space, 1).unwrap().dense();
    let (iso, group) = evolution_checks(&ev, &a, &time_grid(2.0, 10));
    assert!(iso < 1e-12 && group < 1e-12);
}
