use fermigap::fock::{FockSpace, ModeSet};
use fermigap::linalg::{spectral_norm, CMat, C64};
use fermigap::localization::{pi_bar, pi_bar_direct, pi_truncate, truncation_check};
use fermigap::models::random_even_hermitian;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn averaging_is_a_unital_idempotent_contraction(seed in 0u64..10_000, mask in 1u64..16) {
        let space = FockSpace::sites(4).unwrap();
        let a = random_even_hermitian(&space, seed, 1.0);
        let x = ModeSet(mask);
        let once = pi_bar(&space, &a, x).unwrap();
        let twice = pi_bar(&space, &once, x).unwrap();
        prop_assert!(spectral_norm(&(&twice - &once)) < 1e-12);
        prop_assert!(spectral_norm(&once) <= spectral_norm(&a) + 1e-12);
        let id = CMat::identity(16, 16);
        prop_assert!(spectral_norm(&(pi_bar(&space, &id, x).unwrap() - &id)) < 1e-14);
        prop_assert!((once.trace() - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn composition_matches_direct_average(seed in 0u64..10_000, mask in 1u64..8) {
        let space = FockSpace::sites(3).unwrap();
        let a = random_even_hermitian(&space, seed, 1.0);
        let x = ModeSet(mask);
        let c = pi_bar(&space, &a, x).unwrap();
        let d = pi_bar_direct(&space, &a, x).unwrap();
        prop_assert!(spectral_norm(&(c - d)) < 1e-12);
    }

    #[test]
    fn averages_over_disjoint_sets_commute(seed in 0u64..10_000) {
        let space = FockSpace::sites(4).unwrap();
        let a = random_even_hermitian(&space, seed, 1.0);
        let (x, y) = (ModeSet::from_modes([0, 3]), ModeSet::single(1));
        let xy = pi_bar(&space, &pi_bar(&space, &a, y).unwrap(), x).unwrap();
        let yx = pi_bar(&space, &pi_bar(&space, &a, x).unwrap(), y).unwrap();
        prop_assert!(spectral_norm(&(xy - yx)) < 1e-12);
    }

    #[test]
    fn truncation_error_is_controlled_by_probes(seed in 0u64..10_000, mask in 1u64..8) {
        let space = FockSpace::sites(3).unwrap();
        let a = random_even_hermitian(&space, seed, 1.0);
        let check = truncation_check(&space, &a, ModeSet(mask)).unwrap();
        prop_assert!(check.holds(), "{:?}", check);
    }
}

#[test]
fn truncation_to_everything_is_identity() {
    let space = FockSpace::sites(3).unwrap();
    let a = random_even_hermitian(&space, 9, 1.0);
    let t = pi_truncate(&space, &a, ModeSet::all(3)).unwrap();
    assert!(spectral_norm(&(t - &a)) < 1e-15);
    let scalar = pi_truncate(&space, &a, ModeSet::EMPTY).unwrap();
    let expected = CMat::identity(8, 8) * (a.trace() / C64::from(8.0));
    assert!(spectral_norm(&(scalar - expected)) < 1e-12);
}
