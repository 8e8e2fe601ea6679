//! Small gapped demonstration models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{assemble_polynomial, FactorKind, FockSpace, ModeSet, MonomialTerm, OperatorMatrix};
use crate::lattice::Lattice;
use crate::linalg::{CMat, C64};
use crate::polynomial::{Monomial, Polynomial};
use crate::single_particle::{from_matrix, SingleParticleModel};
use crate::transform::InteractionSet;

fn chain_model(t: CMat) -> Result<SingleParticleModel> {
    let n = t.nrows();
    from_matrix(Lattice::chain(n)?, t, 0.0, None)
}

/// `T = (t₀)`, a single site at distance `t₀` from the Fermi level.
pub fn one_site(t0: f64) -> Result<SingleParticleModel> {
    chain_model(CMat::from_element(1, 1, C64::from(t0)))
}

/// Two sites with complex hopping `−1 + 0.4i`.
pub fn two_site_complex() -> Result<SingleParticleModel> {
    chain_model(CMat::from_row_slice(
        2,
        2,
        &[C64::from(0.3), C64::new(-1.0, 0.4), C64::new(-1.0, -0.4), C64::from(-0.2)],
    ))
}

/// Two sites with real hopping `−1`.
pub fn two_site_real() -> Result<SingleParticleModel> {
    chain_model(CMat::from_row_slice(2, 2, &[C64::from(0.25), C64::from(-1.0), C64::from(-1.0), C64::from(-0.4)]))
}

/// Three sites, open chain, complex middle bond.
pub fn three_site() -> Result<SingleParticleModel> {
    let z = C64::from(0.0);
    chain_model(CMat::from_row_slice(
        3,
        3,
        &[
            C64::from(0.5),
            C64::from(-1.0),
            z,
            C64::from(-1.0),
            C64::from(-0.3),
            C64::new(-0.8, 0.2),
            z,
            C64::new(-0.8, -0.2),
            C64::from(0.4),
        ],
    ))
}

/// Open chain with hopping `−strong` on bonds (0,1), (2,3), … and `−weak` on the others.
pub fn dimerized_chain(n: usize, strong: f64, weak: f64) -> Result<SingleParticleModel> {
    if n < 2 {
        return Err(Error::InvalidDimension("dimerized chain needs at least 2 sites".into()));
    }
    let mut t = CMat::zeros(n, n);
    for x in 0..n - 1 {
        let amp = if x % 2 == 0 { -strong } else { -weak };
        t[(x, x + 1)] = C64::from(amp);
        t[(x + 1, x)] = C64::from(amp);
    }
    chain_model(t)
}

/// The default 6-site dimerized chain (−1 / −0.3).
pub fn dimerized_six() -> Result<SingleParticleModel> {
    dimerized_chain(6, 1.0, 0.3)
}

/// Open chain with uniform hopping `−1` and on-site energy `onsite`.
pub fn uniform_chain(n: usize, onsite: f64) -> Result<SingleParticleModel> {
    let mut t = CMat::from_diagonal_element(n, n, C64::from(onsite));
    for x in 0..n.saturating_sub(1) {
        t[(x, x + 1)] = C64::from(-1.0);
        t[(x + 1, x)] = C64::from(-1.0);
    }
    chain_model(t)
}

/// Random nearest-neighbour chain with complex hoppings, resampled until the Fermi gap is at least `min_gap`.
pub fn random_gapped_chain(n: usize, seed: u64, min_gap: f64) -> Result<SingleParticleModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let mut t = CMat::zeros(n, n);
        for x in 0..n {
            t[(x, x)] = C64::from(rng.random_range(-1.0..1.0));
        }
        for x in 0..n.saturating_sub(1) {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5));
            t[(x, x + 1)] = z;
            t[(x + 1, x)] = z.conj();
        }
        let model = chain_model(t)?;
        if model.gap >= min_gap {
            return Ok(model);
        }
    }
    Err(Error::Numerical(format!("no gapped sample with gap ≥ {min_gap} for seed {seed}")))
}

/// `u Σ_{⟨x,y⟩} n_x n_y` over nearest-neighbour pairs of the lattice.
pub fn nn_density_density(lattice: &Lattice, u: f64) -> Result<InteractionSet> {
    let mut pairs = Vec::new();
    for x in 0..lattice.len() {
        for y in lattice.neighbors(x) {
            if x < y {
                pairs.push((x, y));
            }
        }
    }
    InteractionSet::density_density(lattice.len(), &pairs, u)
}

/// Physical `Σ_{x,y} T_xy a_x† a_y` on the Fock space of the model's sites.
pub fn hopping_operator(model: &SingleParticleModel) -> Result<OperatorMatrix> {
    let n = model.t.nrows();
    let space = FockSpace::sites(n)?;
    let mut terms = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let z = model.t[(x, y)];
            if z != C64::from(0.0) {
                terms.push(MonomialTerm::new(z, vec![(x, FactorKind::Create), (y, FactorKind::Annihilate)]));
            }
        }
    }
    assemble_polynomial(&space, &terms)
}

/// Seeded random Hermitian matrix with entries only between basis states of equal parity, scaled by `scale`.
pub fn random_even_hermitian(space: &FockSpace, seed: u64, scale: f64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim();
    let x = CMat::from_fn(dim, dim, |i, j| {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if (i ^ j).count_ones() % 2 == 0 {
            z
        } else {
            C64::from(0.0)
        }
    });
    (&x + x.adjoint()) * C64::from(0.5 * scale)
}

/// Seeded random Hermitian even polynomial using every even monomial on the modes of `x`.
pub fn random_even_polynomial(x: ModeSet, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = x.0;
    let mut p = Polynomial::default();
    let mut create = bits;
    loop {
        let mut annihilate = bits;
        loop {
            let m = Monomial { create, annihilate };
            if m.degree() % 2 == 0 {
                p.add_term(m, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
            if annihilate == 0 {
                break;
            }
            annihilate = (annihilate - 1) & bits;
        }
        if create == 0 {
            break;
        }
        create = (create - 1) & bits;
    }
    p.add(&p.adjoint()).scale(C64::from(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_models_are_gapped() {
        for m in [one_site(1.0), two_site_complex(), two_site_real(), three_site(), dimerized_six(), uniform_chain(6, 0.0)] {
            let m = m.unwrap();
            assert!(m.gap > 0.1, "gap {}", m.gap);
        }
        let r = random_gapped_chain(4, 7, 0.2).unwrap();
        assert!(r.gap >= 0.2);
    }

    #[test]
    fn random_helpers() {
        let space = FockSpace::sites(3).unwrap();
        let v = random_even_hermitian(&space, 3, 1.0);
        assert!(crate::linalg::hermiticity_defect(&v) < 1e-15);
        assert!(crate::fock::OperatorMatrix::from_dense(3, v, crate::fock::Parity::Even, ModeSet::all(3)).parity_components().1 < 1e-15);
        let p = random_even_polynomial(ModeSet::from_modes([0, 2]), 5);
        assert_eq!(p.parity(), crate::fock::Parity::Even);
        assert!(p.support().is_subset(ModeSet::from_modes([0, 2])));
        let op = p.to_operator(&space).dense();
        assert!(crate::linalg::hermiticity_defect(&op) < 1e-14);
        let h = hopping_operator(&two_site_real().unwrap()).unwrap();
        assert_eq!(h.dim(), 4);
    }

    #[test]
    fn nn_pairs() {
        let v = nn_density_density(&Lattice::chain(6).unwrap(), 1.0).unwrap();
        assert_eq!(v.terms.len(), 5);
    }
}
