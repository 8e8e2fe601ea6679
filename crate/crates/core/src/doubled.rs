//! The frustration-free doubled Hamiltonian `η†|A|η` and its local terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, creation, majorana, total_number, FockSpace, ModeSet, OperatorMatrix, Parity, DENSE_LIMIT,
};
use crate::linalg::{hermitian_eigen, lanczos_lowest, spectral_norm, CMat, CVec, C64, I, ONE, ZERO};
use crate::majorana::{BdgData, Species};
use crate::polynomial::{Monomial, Polynomial};

pub const DEFAULT_MAX_SITES: usize = 6;
/// Entries of `|A|` below this are treated as zero when forming local terms.
pub const LOCAL_TERM_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LocalTerm {
    /// One or two sites.
    pub sites: Vec<usize>,
    pub op: OperatorMatrix,
}

#[derive(Debug, Clone)]
pub struct DoubledHamiltonian {
    pub n_sites: usize,
    pub space: FockSpace,
    pub h0: OperatorMatrix,
    pub local_terms: Vec<LocalTerm>,
    pub number_op: OperatorMatrix,
    pub gap: f64,
    /// `tr|A|`, the offset between `H̃₀` and `2η†|A|η`; never folded into `h0`.
    pub trace_abs_a: f64,
    pub abs_a: CMat,
}

impl DoubledHamiltonian {
    pub fn n_modes(&self) -> usize {
        self.space.n_modes()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// The η-vacuum.
    pub fn ground_state(&self) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[0] = ONE;
        v
    }

    /// Rank-one projector onto the η-vacuum.
    pub fn p0(&self) -> CMat {
        let mut p = CMat::zeros(self.dim(), self.dim());
        p[(0, 0)] = ONE;
        p
    }

    /// Modes of the η fermions on the given sites.
    pub fn modes_of_sites(&self, sites: &[usize]) -> ModeSet {
        self.space.modes_on_sites(sites)
    }

    /// `max_Z ‖H̃_{0,Z} Φ̃₀‖`.
    pub fn frustration_residual(&self) -> f64 {
        let g = self.ground_state();
        self.local_terms.iter().map(|t| t.op.apply(&g).norm()).fold(0.0, f64::max)
    }

    /// `‖H̃₀ - Σ_Z H̃_{0,Z}‖`.
    pub fn local_sum_residual(&self) -> f64 {
        let mut sum = OperatorMatrix::zero(self.n_modes());
        for t in &self.local_terms {
            sum = sum.add(&t.op);
        }
        residual_norm(&self.h0.sub(&sum))
    }
}

fn quadratic(abs_a: &CMat, rows: &[usize], cols: &[usize]) -> Polynomial {
    let mut p = Polynomial::default();
    for &k in rows {
        for &l in cols {
            let z = abs_a[(k, l)];
            if z.norm() >= LOCAL_TERM_CUTOFF {
                p.add_term(Monomial { create: 1 << k, annihilate: 1 << l }, z);
            }
        }
    }
    p
}

pub fn build_doubled_h0(bdg: &BdgData, max_sites: usize) -> Result<DoubledHamiltonian> {
    let n = bdg.n_sites();
    if n > max_sites {
        return Err(Error::DimensionGuard { sites: n, max: max_sites });
    }
    let space = FockSpace::eta(n)?;
    let all: Vec<usize> = (0..2 * n).collect();
    let mut full = Polynomial::default();
    for &k in &all {
        for &l in &all {
            full.add_term(Monomial { create: 1 << k, annihilate: 1 << l }, bdg.abs_a[(k, l)]);
        }
    }
    let h0 = full.to_operator(&space);
    let mut local_terms = Vec::new();
    for x in 0..n {
        for y in x..n {
            let mx = [2 * x, 2 * x + 1];
            let my = [2 * y, 2 * y + 1];
            let mut p = quadratic(&bdg.abs_a, &mx, &my);
            if x != y {
                p = p.add(&quadratic(&bdg.abs_a, &my, &mx));
            }
            if p.is_zero() {
                continue;
            }
            let sites = if x == y { vec![x] } else { vec![x, y] };
            let mut op = p.to_operator(&space);
            op.support = space.modes_on_sites(&sites);
            local_terms.push(LocalTerm { sites, op });
        }
    }
    Ok(DoubledHamiltonian {
        n_sites: n,
        number_op: total_number(&space),
        space,
        h0,
        local_terms,
        gap: bdg.gap,
        trace_abs_a: bdg.trace_abs_a(),
        abs_a: bdg.abs_a.clone(),
    })
}

/// Residuals of the two rewritings of the doubled Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    /// `‖γ₁Aγ₁ - γ₂Aγ₂ - 2iγ̃₁|A|γ̃₂‖`.
    pub gamma_form: f64,
    /// `‖2iγ̃₁|A|γ̃₂ - (2η†|A|η - tr|A|)‖`.
    pub eta_form: f64,
    /// `max ‖γ̃ - γ̃†‖`.
    pub self_adjoint: f64,
    /// Largest CAR defect of the η built from the copies.
    pub eta_car: f64,
    /// Spectrum of the copy-space operator against `2·spec(h0) - tr|A|`; skipped above 1024 dimensions.
    pub spectrum_match: Option<f64>,
}

impl DoublingReport {
    pub fn max_residual(&self) -> f64 {
        [self.gamma_form, self.eta_form, self.self_adjoint, self.eta_car, self.spectrum_match.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn residual_norm(op: &OperatorMatrix) -> f64 {
    if op.dim() <= 256 {
        spectral_norm(&op.dense())
    } else {
        crate::linalg::power_norm(op.dim(), |v| op.apply(v), |v| op.apply_adjoint(v), 1e-10, 10_000)
    }
}

fn lin_comb(terms: &[(C64, &OperatorMatrix)], n_modes: usize) -> OperatorMatrix {
    let mut out = OperatorMatrix::zero(n_modes);
    for (c, op) in terms {
        if *c != ZERO {
            out = out.add(&op.scale(*c));
        }
    }
    out
}

/// Realise both Majorana copies on `2|Λ|` physical modes and compare the rewritings.
pub fn verify_doubling_identity(bdg: &BdgData, dh: &DoubledHamiltonian) -> Result<DoublingReport> {
    let n = bdg.n_sites();
    let m = 2 * n;
    let space = FockSpace::two_copies(n)?;
    let nm = space.n_modes();
    // Copy j of site x is mode 2x + (j - 1); Majorana index k = 2x + μ.
    let gamma = |copy: usize| -> Result<Vec<OperatorMatrix>> {
        (0..m)
            .map(|k| {
                let species = if k % 2 == 0 { Species::C } else { Species::D };
                majorana(&space, 2 * (k / 2) + copy, species)
            })
            .collect()
    };
    let g1 = gamma(0)?;
    let g2 = gamma(1)?;
    let s = &bdg.sign_a;
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut gt1 = Vec::with_capacity(m);
    let mut gt2 = Vec::with_capacity(m);
    for k in 0..m {
        let mut t1: Vec<(C64, &OperatorMatrix)> = vec![(r, &g1[k])];
        let mut t2: Vec<(C64, &OperatorMatrix)> = vec![(r, &g2[k])];
        for l in 0..m {
            t1.push((-I * s[(k, l)] * r, &g2[l]));
            t2.push((-I * s[(k, l)] * r, &g1[l]));
        }
        gt1.push(lin_comb(&t1, nm));
        gt2.push(lin_comb(&t2, nm));
    }
    let self_adjoint = gt1
        .iter()
        .chain(&gt2)
        .map(|g| residual_norm(&g.sub(&g.adjoint())))
        .fold(0.0, f64::max);

    let mut lhs = OperatorMatrix::zero(nm);
    let mut gamma_tilde_form = OperatorMatrix::zero(nm);
    for k in 0..m {
        for l in 0..m {
            let a = bdg.a[(k, l)];
            if a != ZERO {
                lhs = lhs.add(&g1[k].mul(&g1[l]).sub(&g2[k].mul(&g2[l])).scale(a));
            }
            let b = bdg.abs_a[(k, l)];
            if b != ZERO {
                gamma_tilde_form = gamma_tilde_form.add(&gt1[k].mul(&gt2[l]).scale(I * 2.0 * b));
            }
        }
    }
    let eta: Vec<OperatorMatrix> = (0..m).map(|k| gt1[k].add(&gt2[k].scale(I)).scale(r)).collect();
    let mut eta_form = OperatorMatrix::identity(nm).scale(C64::from(-bdg.trace_abs_a()));
    for k in 0..m {
        for l in 0..m {
            let b = bdg.abs_a[(k, l)];
            if b != ZERO {
                eta_form = eta_form.add(&eta[k].adjoint().mul(&eta[l]).scale(C64::from(2.0) * b));
            }
        }
    }
    let id = OperatorMatrix::identity(nm);
    let mut eta_car: f64 = 0.0;
    for k in 0..m {
        for l in 0..m {
            let ekd = eta[k].adjoint();
            let anti = eta[l].mul(&ekd).add(&ekd.mul(&eta[l]));
            let target = if k == l { id.clone() } else { OperatorMatrix::zero(nm) };
            eta_car = eta_car.max(residual_norm(&anti.sub(&target)));
            let anti2 = eta[l].mul(&eta[k]).add(&eta[k].mul(&eta[l]));
            eta_car = eta_car.max(residual_norm(&anti2));
        }
    }
    let spectrum_match = if gamma_tilde_form.dim() <= 1024 {
        let copy_spec = hermitian_eigen(&gamma_tilde_form.dense()).values;
        let eta_spec = affine_spectrum(dh, 2.0, -dh.trace_abs_a)?;
        Some(copy_spec.iter().zip(&eta_spec).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(DoublingReport {
        gamma_form: residual_norm(&lhs.sub(&gamma_tilde_form)),
        eta_form: residual_norm(&gamma_tilde_form.sub(&eta_form)),
        self_adjoint,
        eta_car,
        spectrum_match,
    })
}

/// Full spectrum of `h0` (dense).
pub fn doubled_spectrum(dh: &DoubledHamiltonian) -> Result<Vec<f64>> {
    if dh.dim() > DENSE_LIMIT {
        return Err(Error::DimensionGuard { sites: dh.n_sites, max: 6 });
    }
    Ok(hermitian_eigen(&dh.h0.dense()).values)
}

/// Sorted spectrum of `scale·h0 + shift`.
pub fn affine_spectrum(dh: &DoubledHamiltonian, scale: f64, shift: f64) -> Result<Vec<f64>> {
    Ok(doubled_spectrum(dh)?.iter().map(|e| scale * e + shift).collect())
}

/// Smallest eigenvalue of `H̃₀² - (ΔE)² 𝓝̃²` for the supplied `delta_e`.
pub fn check_h0sq_vs_nsq(dh: &DoubledHamiltonian, delta_e: f64) -> Result<f64> {
    let n2 = dh.number_op.mul(&dh.number_op);
    let op = dh.h0.mul(&dh.h0).sub(&n2.scale(C64::from(delta_e * delta_e)));
    if op.dim() <= 1024 {
        Ok(hermitian_eigen(&op.dense()).values[0])
    } else {
        Ok(lanczos_lowest(op.dim(), 1, |v| op.apply(v), 1e-12)?[0])
    }
}

/// Sorted subset sums of the eigenvalues of `|A|`.
pub fn subset_sums(abs_a_eigenvalues: &[f64]) -> Vec<f64> {
    let m = abs_a_eigenvalues.len();
    let mut sums: Vec<f64> = (0..1usize << m)
        .map(|mask| (0..m).filter(|k| mask >> k & 1 == 1).map(|k| abs_a_eigenvalues[k]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    sums
}

/// `‖[A, B]‖` convenience used by checks.
pub fn commutator_norm(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    spectral_norm(&(a.mul(b).sub(&b.mul(a))).dense())
}

/// Physical-space `a_x` operators, exposed for oracles.
pub fn site_ladders(space: &FockSpace) -> Result<(Vec<OperatorMatrix>, Vec<OperatorMatrix>)> {
    let a: Result<Vec<_>> = (0..space.n_modes()).map(|k| annihilation(space, k)).collect();
    let ad: Result<Vec<_>> = (0..space.n_modes()).map(|k| creation(space, k)).collect();
    Ok((a?, ad?))
}

pub fn is_even(op: &OperatorMatrix) -> bool {
    op.parity == Parity::Even
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::majorana::build_a;
    use crate::single_particle::from_matrix;

    fn bdg_of(t: CMat) -> BdgData {
        let n = t.nrows();
        build_a(&from_matrix(Lattice::chain(n).unwrap(), t, 0.0, None).unwrap()).unwrap()
    }

    #[test]
    fn one_site_spectrum_and_identities() {
        let bdg = bdg_of(CMat::from_element(1, 1, C64::from(1.0)));
        let dh = build_doubled_h0(&bdg, 6).unwrap();
        let spec = doubled_spectrum(&dh).unwrap();
        for (a, b) in spec.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let shifted = affine_spectrum(&dh, 2.0, dh.trace_abs_a).unwrap();
        for (a, b) in shifted.iter().zip([2.0, 4.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let rep = verify_doubling_identity(&bdg, &dh).unwrap();
        assert!(rep.max_residual() < 1e-11, "{rep:?}");
        assert!(check_h0sq_vs_nsq(&dh, 1.0).unwrap().abs() < 1e-12);
        assert!(check_h0sq_vs_nsq(&dh, 1.01).unwrap() < -1e-3);
        assert!(dh.frustration_residual() < 1e-15);
    }

    #[test]
    fn two_site_complex_model() {
        let t = CMat::from_row_slice(
            2,
            2,
            &[C64::from(0.3), C64::new(-1.0, 0.4), C64::new(-1.0, -0.4), C64::from(-0.2)],
        );
        let bdg = bdg_of(t);
        let dh = build_doubled_h0(&bdg, 6).unwrap();
        assert!(dh.local_terms.len() <= 3);
        assert!(dh.local_sum_residual() < 1e-12);
        let rep = verify_doubling_identity(&bdg, &dh).unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        let spec = doubled_spectrum(&dh).unwrap();
        let sums = subset_sums(&hermitian_eigen(&bdg.abs_a).values);
        for (a, b) in spec.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(spec[1] >= bdg.gap - 1e-10);
    }

    #[test]
    fn guard() {
        let bdg = bdg_of(CMat::identity(3, 3));
        assert!(matches!(build_doubled_h0(&bdg, 2), Err(Error::DimensionGuard { .. })));
    }
}
