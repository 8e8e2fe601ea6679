//! Interactions rewritten in the η fermions of the doubled space.
//!
//! Every physical ladder operator is a linear form in η, η†:
//! `a_x = (ζ_{1,x} + Σ_y ω̃_{2,x,y}) / √2` with
//! `ζ_{1,x} = (γ̃₁^{x,c} + i γ̃₁^{x,d}) / √2`, `ω̃_{2,x,y} = Σ_ν M^ν_{x,y} γ̃₂^{y,ν}`,
//! `γ̃₁ = (η† + η) / √2` and `γ̃₂ = i (η† − η) / √2`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FactorKind, FockSpace, ModeSet, MonomialTerm, OperatorMatrix, Parity};
use crate::lattice::Lattice;
use crate::linalg::{spectral_norm, CMat, C64, I, ONE, ZERO};
use crate::majorana::{m_coefficients, mode_index, BdgData, Species};
use crate::polynomial::{LinearForm, Polynomial};
use crate::single_particle::{fit_exponential_decay, DecayFit};

/// Default truncation threshold on η monomial coefficients.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// One local interaction `V_X`, a polynomial in the site fermions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub sites: Vec<usize>,
    pub monomials: Vec<MonomialTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSet {
    pub n_sites: usize,
    pub terms: Vec<InteractionTerm>,
}

impl InteractionSet {
    /// Group monomials into terms; a term's support is the union of its monomials' sites.
    pub fn new(n_sites: usize, monomials: Vec<Vec<MonomialTerm>>) -> Result<Self> {
        let mut terms = Vec::with_capacity(monomials.len());
        for group in monomials {
            let mut sites = BTreeSet::new();
            for m in &group {
                for &(site, _) in &m.factors {
                    if site >= n_sites {
                        return Err(Error::SiteOutOfRange { site, len: n_sites });
                    }
                    sites.insert(site);
                }
            }
            terms.push(InteractionTerm { sites: sites.into_iter().collect(), monomials: group });
        }
        Ok(Self { n_sites, terms })
    }

    pub fn empty(n_sites: usize) -> Self {
        Self { n_sites, terms: Vec::new() }
    }

    /// `Σ_{(x,y)} u n_x n_y`, one term per pair.
    pub fn density_density(n_sites: usize, pairs: &[(usize, usize)], u: f64) -> Result<Self> {
        let groups = pairs
            .iter()
            .map(|&(x, y)| {
                vec![MonomialTerm::new(
                    C64::from(u),
                    vec![(x, FactorKind::Create), (x, FactorKind::Annihilate), (y, FactorKind::Create), (y, FactorKind::Annihilate)],
                )]
            })
            .collect();
        Self::new(n_sites, groups)
    }

    pub fn max_support(&self) -> usize {
        self.terms.iter().map(|t| t.sites.len()).max().unwrap_or(0)
    }

    pub fn check_parity(&self) -> Result<()> {
        for (k, t) in self.terms.iter().enumerate() {
            for m in &t.monomials {
                if m.parity() != Parity::Even && m.coefficient != ZERO {
                    return Err(Error::Parity(format!("term {k} contains an odd monomial of degree {}", m.factors.len())));
                }
            }
        }
        Ok(())
    }

    /// Matrix of the whole interaction on the physical Fock space.
    pub fn physical_operator(&self) -> Result<OperatorMatrix> {
        let space = FockSpace::sites(self.n_sites)?;
        let mut total = OperatorMatrix::zero(space.n_modes());
        for t in &self.terms {
            total = total.add(&crate::fock::assemble_polynomial(&space, &t.monomials)?);
        }
        Ok(total)
    }
}

/// Norm of a physical term on the Fock space of its own sites.
pub fn term_norm(term: &InteractionTerm) -> Result<f64> {
    let map: BTreeMap<usize, usize> = term.sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let space = FockSpace::sites(term.sites.len())?;
    let relabeled: Vec<MonomialTerm> = term
        .monomials
        .iter()
        .map(|m| MonomialTerm::new(m.coefficient, m.factors.iter().map(|&(s, k)| (map[&s], k)).collect()))
        .collect();
    Ok(crate::fock::operator_norm(&crate::fock::assemble_polynomial(&space, &relabeled)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n_max: usize,
    pub k_h: f64,
    /// `Σ_{X ∋ x,y} ‖V_X‖` indexed `[x][y]`.
    pub pair_sums: Vec<Vec<f64>>,
    /// `Σ_{X ∋ x,y} K_h^{|X|} ‖V_X‖`.
    pub weighted_pair_sums: Vec<Vec<f64>>,
    pub fit: Option<DecayFit>,
    pub weighted_fit: Option<DecayFit>,
    pub finite: bool,
}

pub fn validate_assumptions(v: &InteractionSet, lattice: &Lattice, k_h: f64) -> Result<AssumptionReport> {
    if !(k_h > 1.0) {
        return Err(Error::InvalidInput(format!("K_h must exceed 1, got {k_h}")));
    }
    if lattice.len() != v.n_sites {
        return Err(Error::InvalidDimension("interaction and lattice site counts differ".into()));
    }
    v.check_parity()?;
    let n = v.n_sites;
    let mut pair = vec![vec![0.0; n]; n];
    let mut weighted = vec![vec![0.0; n]; n];
    for t in &v.terms {
        let norm = term_norm(t)?;
        let w = k_h.powi(t.sites.len() as i32) * norm;
        for &x in &t.sites {
            for &y in &t.sites {
                pair[x][y] += norm;
                weighted[x][y] += w;
            }
        }
    }
    let to_mat = |m: &Vec<Vec<f64>>| CMat::from_fn(n, n, |i, j| C64::from(m[i][j]));
    let fit = fit_exponential_decay(&to_mat(&pair), lattice, None).ok();
    let weighted_fit = fit_exponential_decay(&to_mat(&weighted), lattice, None).ok();
    let finite = weighted.iter().flatten().all(|v| v.is_finite());
    Ok(AssumptionReport { n_max: v.max_support(), k_h, pair_sums: pair, weighted_pair_sums: weighted, fit, weighted_fit, finite })
}

/// `γ̃₁^k` as a form in η.
pub fn gamma_tilde_1(n_modes: usize, k: usize) -> LinearForm {
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut f = LinearForm::zero(n_modes);
    f.ann[k] = r;
    f.cre[k] = r;
    f
}

/// `γ̃₂^k` as a form in η.
pub fn gamma_tilde_2(n_modes: usize, k: usize) -> LinearForm {
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut f = LinearForm::zero(n_modes);
    f.ann[k] = -I * r;
    f.cre[k] = I * r;
    f
}

/// Precomputed η-forms of `a_x` for a given `s(A)`.
#[derive(Debug, Clone)]
pub struct EtaForms {
    pub zeta: Vec<LinearForm>,
    /// `omega[x][y] = ω̃_{2,x,y}`.
    pub omega: Vec<Vec<LinearForm>>,
    pub a: Vec<LinearForm>,
    pub m: CMat,
}

impl EtaForms {
    pub fn new(bdg: &BdgData) -> Self {
        let n = bdg.n_sites();
        let nm = 2 * n;
        let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let m = m_coefficients(bdg);
        let zeta: Vec<LinearForm> = (0..n)
            .map(|x| {
                gamma_tilde_1(nm, mode_index(x, Species::C))
                    .add(&gamma_tilde_1(nm, mode_index(x, Species::D)).scale(I))
                    .scale(r)
            })
            .collect();
        let omega: Vec<Vec<LinearForm>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        [Species::C, Species::D].iter().fold(LinearForm::zero(nm), |acc, &nu| {
                            let col = mode_index(y, nu);
                            acc.add(&gamma_tilde_2(nm, col).scale(m[(x, col)]))
                        })
                    })
                    .collect()
            })
            .collect();
        let a = (0..n)
            .map(|x| omega[x].iter().fold(zeta[x].clone(), |acc, w| acc.add(w)).scale(r))
            .collect();
        Self { zeta, omega, a, m }
    }

    pub fn factor_form(&self, site: usize, kind: FactorKind) -> LinearForm {
        let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let a = &self.a[site];
        let ad = a.adjoint();
        match kind {
            FactorKind::Annihilate => a.clone(),
            FactorKind::Create => ad,
            FactorKind::MajoranaC => ad.add(a).scale(r),
            FactorKind::MajoranaD => ad.add(&a.scale(-ONE)).scale(I * r),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransformedTerm {
    pub modes: ModeSet,
    pub poly: Polynomial,
    /// Indices of the originating `V_X` terms.
    pub origin: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct TransformedInteraction {
    pub n_sites: usize,
    pub terms: Vec<TransformedTerm>,
    pub epsilon: f64,
    pub dropped_mass: f64,
}

impl TransformedInteraction {
    pub fn total(&self) -> Polynomial {
        self.terms.iter().fold(Polynomial::default(), |acc, t| acc.add(&t.poly))
    }

    pub fn operator(&self) -> Result<OperatorMatrix> {
        Ok(self.total().to_operator(&FockSpace::eta(self.n_sites)?))
    }
}

/// Expand a physical monomial into η polynomials.
pub fn expand_monomial(forms: &EtaForms, m: &MonomialTerm) -> Polynomial {
    let mut p = Polynomial::constant(m.coefficient);
    for &(site, kind) in &m.factors {
        p = p.mul_linear(&forms.factor_form(site, kind));
    }
    p
}

pub fn transform_to_eta(v: &InteractionSet, bdg: &BdgData, epsilon: f64) -> Result<TransformedInteraction> {
    if bdg.n_sites() != v.n_sites {
        return Err(Error::InvalidDimension("interaction and BdG site counts differ".into()));
    }
    v.check_parity()?;
    let forms = EtaForms::new(bdg);
    // Per-term expansions are kept separate so each η monomial records its origin.
    let mut by_support: BTreeMap<ModeSet, (Polynomial, BTreeSet<usize>)> = BTreeMap::new();
    for (k, term) in v.terms.iter().enumerate() {
        let mut poly = Polynomial::default();
        for m in &term.monomials {
            if m.coefficient != ZERO {
                poly = poly.add(&expand_monomial(&forms, m));
            }
        }
        for (support, part) in poly.group_by_support() {
            let e = by_support.entry(support).or_default();
            e.0 = e.0.add(&part);
            e.1.insert(k);
        }
    }
    let mut dropped_mass = 0.0;
    let mut terms = Vec::new();
    for (modes, (mut poly, origin)) in by_support {
        dropped_mass += poly.truncate(epsilon);
        if !poly.is_zero() {
            terms.push(TransformedTerm { modes, poly, origin });
        }
    }
    Ok(TransformedInteraction { n_sites: v.n_sites, terms, epsilon, dropped_mass })
}

/// Matrices of `a_x` on the η Fock space built through `γ₁ = (γ̃₁ + i s(A) γ̃₂)/√2`.
pub fn oracle_site_ladders(bdg: &BdgData) -> Result<Vec<CMat>> {
    let n = bdg.n_sites();
    let nm = 2 * n;
    let space = FockSpace::eta(n)?;
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut gt1 = Vec::with_capacity(nm);
    let mut gt2 = Vec::with_capacity(nm);
    for k in 0..nm {
        let eta = crate::fock::annihilation(&space, k)?.dense();
        let eta_d = crate::fock::creation(&space, k)?.dense();
        gt1.push((&eta_d + &eta) * r);
        gt2.push((&eta_d - &eta) * (I * r));
    }
    let dim = space.dim();
    let gamma1: Vec<CMat> = (0..nm)
        .map(|k| {
            let mut g = gt1[k].clone();
            for l in 0..nm {
                let c = I * bdg.sign_a[(k, l)];
                if c != ZERO {
                    g += &gt2[l] * c;
                }
            }
            g * r
        })
        .collect();
    Ok((0..n)
        .map(|x| {
            let mut a = CMat::zeros(dim, dim);
            a += &gamma1[mode_index(x, Species::C)];
            a += &gamma1[mode_index(x, Species::D)] * I;
            a * r
        })
        .collect())
}

/// Matrix of `V` on the η Fock space, evaluated through the oracle ladders.
pub fn oracle_matrix(v: &InteractionSet, bdg: &BdgData) -> Result<CMat> {
    let ladders = oracle_site_ladders(bdg)?;
    let dim = 1usize << (2 * v.n_sites);
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut total = CMat::zeros(dim, dim);
    for t in &v.terms {
        for m in &t.monomials {
            let mut prod = CMat::identity(dim, dim) * m.coefficient;
            for &(site, kind) in &m.factors {
                let a = &ladders[site];
                let f = match kind {
                    FactorKind::Annihilate => a.clone(),
                    FactorKind::Create => a.adjoint(),
                    FactorKind::MajoranaC => (a.adjoint() + a) * r,
                    FactorKind::MajoranaD => (a.adjoint() - a) * (I * r),
                };
                prod *= f;
            }
            total += prod;
        }
    }
    Ok(total)
}

/// `‖V (oracle) − Ṽ (expansion)‖` on the doubled space.
pub fn oracle_compare(v: &InteractionSet, tv: &TransformedInteraction, bdg: &BdgData, max_sites: usize) -> Result<f64> {
    if v.n_sites > max_sites {
        return Err(Error::DimensionGuard { sites: v.n_sites, max: max_sites });
    }
    let direct = oracle_matrix(v, bdg)?;
    let expanded = tv.operator()?.dense();
    Ok(spectral_norm(&(direct - expanded)))
}

/// Norm of an η polynomial on the Fock space of its own modes.
pub fn minimal_norm(poly: &Polynomial) -> Result<f64> {
    let support = poly.support();
    let mut map = vec![0usize; 64];
    for (i, m) in support.iter().enumerate() {
        map[m] = i;
    }
    let space = FockSpace::new(
        (0..support.len())
            .map(|i| crate::fock::ModeLabel { site: i, kind: crate::fock::ModeKind::Site })
            .collect(),
    )?;
    Ok(crate::fock::operator_norm(&poly.relabel(&map).to_operator(&space)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBoundProfile {
    /// `Σ_{X̃ ∋ x,y} |X̃|³ ‖Ṽ_X̃‖` indexed `[x][y]`.
    pub pair_sums: Vec<Vec<f64>>,
    /// `Σ_{X̃ ∋ x} |X̃|³ ‖Ṽ_X̃‖`.
    pub site_sums: Vec<f64>,
    pub fit: Option<DecayFit>,
    /// Largest `‖Ṽ_X̃‖ / Σ|coefficients|` over terms (must not exceed 1).
    pub triangle_ratio: f64,
}

pub fn local_bound_profile(tv: &TransformedInteraction, lattice: &Lattice) -> Result<LocalBoundProfile> {
    let n = tv.n_sites;
    let space = FockSpace::eta(n)?;
    let mut pair = vec![vec![0.0; n]; n];
    let mut site_sums = vec![0.0; n];
    let mut triangle_ratio: f64 = 0.0;
    for t in &tv.terms {
        let norm = minimal_norm(&t.poly)?;
        let l1 = t.poly.l1_norm();
        if l1 > 0.0 {
            triangle_ratio = triangle_ratio.max(norm / l1);
        }
        let weight = (t.modes.len() as f64).powi(3) * norm;
        let sites = space.sites_of(t.modes);
        for &x in &sites {
            site_sums[x] += weight;
            for &y in &sites {
                pair[x][y] += weight;
            }
        }
    }
    let mat = CMat::from_fn(n, n, |i, j| C64::from(pair[i][j]));
    let fit = match fit_exponential_decay(&mat, lattice, None) {
        Ok(f) => Some(f),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(LocalBoundProfile { pair_sums: pair, site_sums, fit, triangle_ratio })
}

/// Largest `‖ω̃_{2,x,y}‖ / (Σ_ν |M^ν_{x,y}| / √2)` over pairs with nonzero bound.
pub fn omega_bound_ratio(bdg: &BdgData) -> Result<f64> {
    let forms = EtaForms::new(bdg);
    let n = bdg.n_sites();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let bound = (forms.m[(x, 2 * y)].norm() + forms.m[(x, 2 * y + 1)].norm()) * r;
            if bound <= 1e-15 {
                continue;
            }
            let norm = minimal_norm(&forms.omega[x][y].to_polynomial())?;
            worst = worst.max(norm / bound);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorana::build_a;
    use crate::single_particle::from_matrix;

    fn bdg_of(t: CMat) -> BdgData {
        let n = t.nrows();
        build_a(&from_matrix(Lattice::chain(n).unwrap(), t, 0.0, None).unwrap()).unwrap()
    }

    fn n_x(x: usize) -> MonomialTerm {
        MonomialTerm::new(ONE, vec![(x, FactorKind::Create), (x, FactorKind::Annihilate)])
    }

    #[test]
    fn one_site_number_operator() {
        let bdg = bdg_of(CMat::from_element(1, 1, C64::from(1.0)));
        let v = InteractionSet::new(1, vec![vec![n_x(0)]]).unwrap();
        let tv = transform_to_eta(&v, &bdg, 0.0).unwrap();
        assert!(oracle_compare(&v, &tv, &bdg, 6).unwrap() < 1e-12);
    }

    #[test]
    fn two_site_density_density() {
        let t = CMat::from_row_slice(2, 2, &[C64::from(0.25), C64::from(-1.0), C64::from(-1.0), C64::from(-0.4)]);
        let bdg = bdg_of(t);
        let v = InteractionSet::density_density(2, &[(0, 1)], 1.0).unwrap();
        let tv = transform_to_eta(&v, &bdg, 0.0).unwrap();
        assert!(oracle_compare(&v, &tv, &bdg, 6).unwrap() < 1e-10);
        for term in &tv.terms {
            assert_eq!(term.poly.parity(), Parity::Even);
        }
        let profile = local_bound_profile(&tv, &Lattice::chain(2).unwrap()).unwrap();
        assert!(profile.triangle_ratio <= 1.0 + 1e-12);
        assert!(omega_bound_ratio(&bdg).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn majorana_factors_and_truncation() {
        let t = CMat::from_row_slice(2, 2, &[C64::from(0.5), C64::new(-1.0, 0.3), C64::new(-1.0, -0.3), C64::from(-0.3)]);
        let bdg = bdg_of(t);
        let v = InteractionSet::new(
            2,
            vec![vec![MonomialTerm::new(C64::new(0.0, 0.7), vec![(0, FactorKind::MajoranaC), (1, FactorKind::MajoranaD)])]],
        )
        .unwrap();
        let tv = transform_to_eta(&v, &bdg, 0.0).unwrap();
        assert!(oracle_compare(&v, &tv, &bdg, 6).unwrap() < 1e-10);
        let all_dropped = transform_to_eta(&v, &bdg, f64::INFINITY).unwrap();
        assert!(all_dropped.terms.is_empty());
        let full = spectral_norm(&oracle_matrix(&v, &bdg).unwrap());
        assert!((oracle_compare(&v, &all_dropped, &bdg, 6).unwrap() - full).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let lat = Lattice::chain(2).unwrap();
        let v = InteractionSet::density_density(2, &[(0, 1)], 1.0).unwrap();
        let rep = validate_assumptions(&v, &lat, 2.0).unwrap();
        assert!((rep.pair_sums[0][1] - 1.0).abs() < 1e-12);
        assert_eq!(rep.n_max, 2);
        let odd = InteractionSet::new(2, vec![vec![MonomialTerm::new(ONE, vec![(0, FactorKind::Annihilate)])]]).unwrap();
        assert!(matches!(validate_assumptions(&odd, &lat, 2.0), Err(Error::Parity(_))));
        let empty = validate_assumptions(&InteractionSet::empty(2), &lat, 2.0).unwrap();
        assert!(empty.pair_sums.iter().flatten().all(|&v| v == 0.0));
    }
}
