//! Normal-ordered fermion polynomials with exact sign tracking.
//!
//! A monomial `(S, T)` stands for `c†_{s1} ... c†_{sk} c_{t1} ... c_{tl}` with
//! `s1 < ... < sk` and `t1 < ... < tl`, stored as two bitmasks.

use std::collections::BTreeMap;

use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::fock::{FockSpace, ModeSet, OperatorMatrix, Parity};
use crate::linalg::{C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub create: u64,
    pub annihilate: u64,
}

impl Monomial {
    pub const IDENTITY: Monomial = Monomial { create: 0, annihilate: 0 };

    pub fn support(self) -> ModeSet {
        ModeSet(self.create | self.annihilate)
    }

    pub fn degree(self) -> usize {
        (self.create.count_ones() + self.annihilate.count_ones()) as usize
    }
}

/// Linear combination `Σ_k (ann_k c_k + cre_k c_k†)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub ann: Vec<C64>,
    pub cre: Vec<C64>,
}

impl LinearForm {
    pub fn zero(n_modes: usize) -> Self {
        Self { ann: vec![ZERO; n_modes], cre: vec![ZERO; n_modes] }
    }

    pub fn n_modes(&self) -> usize {
        self.ann.len()
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        LinearForm {
            ann: self.ann.iter().zip(&other.ann).map(|(a, b)| a + b).collect(),
            cre: self.cre.iter().zip(&other.cre).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> LinearForm {
        LinearForm { ann: self.ann.iter().map(|z| z * c).collect(), cre: self.cre.iter().map(|z| z * c).collect() }
    }

    pub fn adjoint(&self) -> LinearForm {
        LinearForm { ann: self.cre.iter().map(|z| z.conj()).collect(), cre: self.ann.iter().map(|z| z.conj()).collect() }
    }

    pub fn l1_norm(&self) -> f64 {
        self.ann.iter().chain(&self.cre).map(|z| z.norm()).sum()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::default();
        for (k, (&a, &c)) in self.ann.iter().zip(&self.cre).enumerate() {
            p.add_term(Monomial { create: 0, annihilate: 1 << k }, a);
            p.add_term(Monomial { create: 1 << k, annihilate: 0 }, c);
        }
        p
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    pub terms: BTreeMap<Monomial, C64>,
}

fn sign(count: u32) -> f64 {
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn above(mask: u64, j: usize) -> u32 {
    if j >= 63 {
        0
    } else {
        (mask >> (j + 1)).count_ones()
    }
}

impl Polynomial {
    pub fn constant(c: C64) -> Self {
        let mut p = Self::default();
        p.add_term(Monomial::IDENTITY, c);
        p
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == ZERO {
            return;
        }
        let e = self.terms.entry(m).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, c: C64) -> Polynomial {
        let mut out = Polynomial::default();
        for (&m, &z) in &self.terms {
            out.add_term(m, z * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Right multiplication by `c_j` (`create = false`) or `c_j†`.
    pub fn mul_ladder(&self, j: usize, create: bool) -> Polynomial {
        let bit = 1u64 << j;
        let mut out = Polynomial::default();
        for (&m, &c) in &self.terms {
            if !create {
                if m.annihilate & bit == 0 {
                    let s = sign(above(m.annihilate, j));
                    out.add_term(Monomial { create: m.create, annihilate: m.annihilate | bit }, c * s);
                }
            } else {
                if m.annihilate & bit != 0 {
                    let s = sign(above(m.annihilate, j));
                    out.add_term(Monomial { create: m.create, annihilate: m.annihilate & !bit }, c * s);
                }
                if m.create & bit == 0 {
                    let s = sign(m.annihilate.count_ones() + above(m.create, j));
                    out.add_term(Monomial { create: m.create | bit, annihilate: m.annihilate }, c * s);
                }
            }
        }
        out
    }

    pub fn mul_linear(&self, form: &LinearForm) -> Polynomial {
        let mut out = Polynomial::default();
        for k in 0..form.n_modes() {
            if form.ann[k] != ZERO {
                out = out.add(&self.mul_ladder(k, false).scale(form.ann[k]));
            }
            if form.cre[k] != ZERO {
                out = out.add(&self.mul_ladder(k, true).scale(form.cre[k]));
            }
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (&m, &c) in &other.terms {
            let mut part = self.scale(c);
            for j in (0..64).filter(|&j| m.create >> j & 1 == 1) {
                part = part.mul_ladder(j, true);
            }
            for j in (0..64).filter(|&j| m.annihilate >> j & 1 == 1) {
                part = part.mul_ladder(j, false);
            }
            out = out.add(&part);
        }
        out
    }

    pub fn adjoint(&self) -> Polynomial {
        let mut out = Polynomial::default();
        for (&m, &c) in &self.terms {
            let k = m.create.count_ones();
            let l = m.annihilate.count_ones();
            let s = sign(k * k.saturating_sub(1) / 2 + l * l.saturating_sub(1) / 2);
            out.add_term(Monomial { create: m.annihilate, annihilate: m.create }, c.conj() * s);
        }
        out
    }

    /// Drop coefficients with modulus below `epsilon`; returns the dropped `Σ|c|`.
    pub fn truncate(&mut self, epsilon: f64) -> f64 {
        let mut dropped = 0.0;
        self.terms.retain(|_, c| {
            let keep = c.norm() >= epsilon;
            if !keep {
                dropped += c.norm();
            }
            keep
        });
        dropped
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn support(&self) -> ModeSet {
        self.terms.keys().fold(ModeSet::EMPTY, |acc, m| acc.union(m.support()))
    }

    pub fn parity(&self) -> Parity {
        self.terms.keys().map(|m| Parity::from_degree(m.degree())).reduce(Parity::plus).unwrap_or(Parity::Even)
    }

    /// Split by exact mode support `S ∪ T`.
    pub fn group_by_support(&self) -> BTreeMap<ModeSet, Polynomial> {
        let mut out: BTreeMap<ModeSet, Polynomial> = BTreeMap::new();
        for (&m, &c) in &self.terms {
            out.entry(m.support()).or_default().add_term(m, c);
        }
        out
    }

    /// Relabel modes through `map[old] = new` (order-preserving maps keep all signs).
    pub fn relabel(&self, map: &[usize]) -> Polynomial {
        let remap = |mask: u64| (0..64).filter(|&k| mask >> k & 1 == 1).fold(0u64, |acc, k| acc | (1 << map[k]));
        let mut out = Polynomial::default();
        for (&m, &c) in &self.terms {
            out.add_term(Monomial { create: remap(m.create), annihilate: remap(m.annihilate) }, c);
        }
        out
    }

    /// Sparse matrix on the given Fock space.
    pub fn to_operator(&self, space: &FockSpace) -> OperatorMatrix {
        let dim = space.dim();
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (&m, &c) in &self.terms {
            for state in 0..dim {
                if let Some((out, s)) = apply_monomial(m, state) {
                    *acc.entry((out, state)).or_insert(ZERO) += c * s;
                }
            }
        }
        let mut coo = CooMatrix::new(dim, dim);
        for ((i, j), z) in acc {
            if z != ZERO {
                coo.push(i, j, z);
            }
        }
        OperatorMatrix::from_sparse(space.n_modes(), CscMatrix::from(&coo), self.parity(), self.support())
    }
}

fn apply_ladder(state: usize, j: usize, create: bool) -> Option<(usize, f64)> {
    let bit = 1usize << j;
    if (state & bit != 0) == create {
        return None;
    }
    Some((state ^ bit, sign((state & (bit - 1)).count_ones())))
}

/// Action of a normal-ordered monomial on a basis state.
pub fn apply_monomial(m: Monomial, state: usize) -> Option<(usize, f64)> {
    let mut st = state;
    let mut s = 1.0;
    for j in (0..64).rev().filter(|&j| m.annihilate >> j & 1 == 1) {
        let (n, f) = apply_ladder(st, j, false)?;
        st = n;
        s *= f;
    }
    for j in (0..64).rev().filter(|&j| m.create >> j & 1 == 1) {
        let (n, f) = apply_ladder(st, j, true)?;
        st = n;
        s *= f;
    }
    Some((st, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, creation};
    use crate::linalg::{max_abs, CMat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_form(rng: &mut ChaCha8Rng, n: usize) -> LinearForm {
        let mut f = LinearForm::zero(n);
        for k in 0..n {
            f.ann[k] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            f.cre[k] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        f
    }

    fn form_matrix(space: &FockSpace, f: &LinearForm) -> CMat {
        let mut m = CMat::zeros(space.dim(), space.dim());
        for k in 0..f.n_modes() {
            m += annihilation(space, k).unwrap().dense() * f.ann[k];
            m += creation(space, k).unwrap().dense() * f.cre[k];
        }
        m
    }

    #[test]
    fn products_of_forms_match_matrices() {
        let n = 4;
        let space = FockSpace::sites(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut poly = Polynomial::one();
        let mut mat = CMat::identity(space.dim(), space.dim());
        for _ in 0..4 {
            let f = random_form(&mut rng, n);
            poly = poly.mul_linear(&f);
            mat *= form_matrix(&space, &f);
            assert!(max_abs(&(poly.to_operator(&space).dense() - &mat)) < 1e-12);
        }
        assert!(max_abs(&(poly.adjoint().to_operator(&space).dense() - mat.adjoint())) < 1e-12);
    }

    #[test]
    fn polynomial_product_matches_matrices() {
        let n = 3;
        let space = FockSpace::sites(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = Polynomial::one().mul_linear(&random_form(&mut rng, n)).mul_linear(&random_form(&mut rng, n));
        let q = Polynomial::one().mul_linear(&random_form(&mut rng, n)).mul_linear(&random_form(&mut rng, n));
        let lhs = p.mul(&q).to_operator(&space).dense();
        let rhs = p.to_operator(&space).dense() * q.to_operator(&space).dense();
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn car_from_engine() {
        let p = Polynomial::one().mul_ladder(1, false).mul_ladder(1, true);
        let q = Polynomial::one().mul_ladder(1, true).mul_ladder(1, false);
        assert_eq!(p.add(&q), Polynomial::one());
    }
}
