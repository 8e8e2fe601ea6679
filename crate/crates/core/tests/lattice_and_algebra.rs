use std::collections::{BTreeSet, VecDeque};

use fermigap::fock::{annihilation, creation, majorana, FockSpace, ModeSet};
use fermigap::lattice::{Boundary, Lattice};
use fermigap::linalg::{anticommutator, spectral_norm, CMat, C64};
use fermigap::majorana::{build_a, structure_report, Species};
use fermigap::models;
use fermigap::polynomial::{Monomial, Polynomial};
use proptest::prelude::*;

fn bfs(lattice: &Lattice, from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; lattice.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for y in lattice.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn lattice_strategy() -> impl Strategy<Value = Lattice> {
    (prop::collection::vec((1usize..5, any::<bool>()), 1..3)).prop_map(|axes| {
        let dims: Vec<usize> = axes.iter().map(|a| a.0).collect();
        let bc: Vec<Boundary> =
            axes.iter().map(|a| if a.1 && a.0 >= 3 { Boundary::Periodic } else { Boundary::Open }).collect();
        Lattice::new(&dims, &bc).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_matches_breadth_first_search(lattice in lattice_strategy()) {
        for x in 0..lattice.len() {
            let d = bfs(&lattice, x);
            for y in 0..lattice.len() {
                prop_assert_eq!(lattice.dist(x, y), d[y]);
                prop_assert_eq!(lattice.dist(x, y), lattice.dist(y, x));
            }
        }
        let diam = (0..lattice.len()).flat_map(|x| (0..lattice.len()).map(move |y| (x, y)))
            .map(|(x, y)| lattice.dist(x, y)).max().unwrap();
        prop_assert_eq!(diam, lattice.diameter());
    }

    #[test]
    fn balls_are_nested_and_exhaust_the_lattice(lattice in lattice_strategy(), seed in 0usize..64) {
        let z: BTreeSet<usize> = [seed % lattice.len()].into();
        let mut prev = z.clone();
        for n in 0..=lattice.diameter() {
            let b = lattice.ball(&z, n).unwrap();
            prop_assert!(prev.is_subset(&b));
            prev = b;
        }
        prop_assert_eq!(prev.len(), lattice.len());
    }

    #[test]
    fn polynomial_operator_is_linear_multiplicative_and_adjoint_compatible(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        masks in prop::collection::vec((0u64..8, 0u64..8), 6),
    ) {
        let space = FockSpace::sites(3).unwrap();
        let mut p = Polynomial::default();
        let mut q = Polynomial::default();
        for (k, (&(re, im), &(c, a))) in coeffs.iter().zip(&masks).enumerate() {
            let target = if k % 2 == 0 { &mut p } else { &mut q };
            target.add_term(Monomial { create: c, annihilate: a }, C64::new(re, im));
        }
        let (pm, qm) = (p.to_operator(&space).dense(), q.to_operator(&space).dense());
        let sum = p.add(&q).to_operator(&space).dense();
        prop_assert!(spectral_norm(&(sum - &pm - &qm)) < 1e-12);
        let prod = p.mul(&q).to_operator(&space).dense();
        prop_assert!(spectral_norm(&(prod - &pm * &qm)) < 1e-12);
        let adj = p.adjoint().to_operator(&space).dense();
        prop_assert!(spectral_norm(&(adj - pm.adjoint())) < 1e-12);
    }

    #[test]
    fn majorana_structure_on_random_chains(n in 1usize..7, seed in 0u64..1000) {
        let model = models::random_gapped_chain(n, seed, 0.05).unwrap();
        let bdg = build_a(&model).unwrap();
        let r = structure_report(&bdg, Some(model.gap));
        prop_assert!(r.max_violation() < 1e-10, "{:?}", r);
        prop_assert!(r.abs_min_eigenvalue > 0.0);
    }
}

#[test]
fn car_on_five_modes() {
    let space = FockSpace::sites(5).unwrap();
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    for i in 0..5 {
        let a = annihilation(&space, i).unwrap().dense();
        for j in 0..5 {
            let ad = creation(&space, j).unwrap().dense();
            let expected = if i == j { id.clone() } else { CMat::zeros(dim, dim) };
            assert!(spectral_norm(&(anticommutator(&a, &ad) - expected)) < 1e-13);
        }
        let c = majorana(&space, i, Species::C).unwrap().dense();
        let d = majorana(&space, i, Species::D).unwrap().dense();
        assert!(spectral_norm(&(&c * &c - &id * C64::from(0.5))) < 1e-13);
        assert!(spectral_norm(&anticommutator(&c, &d)) < 1e-13);
    }
}

#[test]
fn mode_set_algebra() {
    let a = ModeSet::from_modes([0, 2, 5]);
    let b = ModeSet::from_modes([2, 3]);
    assert_eq!(a.union(b), ModeSet::from_modes([0, 2, 3, 5]));
    assert_eq!(a.intersection(b), ModeSet::single(2));
    assert_eq!(a.difference(b).complement(6), ModeSet::from_modes([1, 2, 3, 4]));
    assert!(ModeSet::EMPTY.is_subset(a));
}
