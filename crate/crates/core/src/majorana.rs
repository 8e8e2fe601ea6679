//! The Majorana matrix `A`, its absolute value `|A|` and sign `s(A)`.
//!
//! Majorana modes are ordered site-major with the species interleaved:
//! index `2x` is `(x, c)` and index `2x + 1` is `(x, d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, max_abs, spectral_norm, CMat, Spectrum, C64, I};
use crate::single_particle::SingleParticleModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    C,
    D,
}

impl Species {
    pub fn index(self) -> usize {
        match self {
            Species::C => 0,
            Species::D => 1,
        }
    }
}

/// Majorana index of `(site, species)`.
pub fn mode_index(site: usize, species: Species) -> usize {
    2 * site + species.index()
}

pub const GAPLESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BdgData {
    pub a: CMat,
    pub abs_a: CMat,
    pub sign_a: CMat,
    pub spectrum: Spectrum,
    pub gap: f64,
    /// `Σ_x T_xx`, tracked separately from any many-body operator.
    pub trace_t: f64,
}

impl BdgData {
    pub fn n_sites(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn trace_abs_a(&self) -> f64 {
        (0..self.abs_a.nrows()).map(|k| self.abs_a[(k, k)].re).sum()
    }

    /// Spectral data for an arbitrary Hermitian `A` (used for constructed test inputs too).
    pub fn from_a(a: CMat, trace_t: f64) -> Result<Self> {
        let spectrum = hermitian_eigen(&a);
        let gap = spectrum.values.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        if gap < GAPLESS_TOL {
            return Err(Error::Gapless { gap });
        }
        let abs_a = spectrum.apply_fn(f64::abs);
        let sign_a = spectrum.apply_fn(f64::signum);
        Ok(Self { a, abs_a, sign_a, spectrum, gap, trace_t })
    }
}

/// `A = i [[Im T, Re T], [-Re T, Im T]]` in the interleaved mode order.
pub fn majorana_matrix(t: &CMat) -> CMat {
    let n = t.nrows();
    let mut a = CMat::zeros(2 * n, 2 * n);
    for x in 0..n {
        for y in 0..n {
            let (re, im) = (t[(x, y)].re, t[(x, y)].im);
            let (xc, xd) = (mode_index(x, Species::C), mode_index(x, Species::D));
            let (yc, yd) = (mode_index(y, Species::C), mode_index(y, Species::D));
            a[(xc, yc)] = I * im;
            a[(xc, yd)] = I * re;
            a[(xd, yc)] = -I * re;
            a[(xd, yd)] = I * im;
        }
    }
    a
}

pub fn build_a(model: &SingleParticleModel) -> Result<BdgData> {
    let trace_t = (0..model.t.nrows()).map(|k| model.t[(k, k)].re).sum();
    BdgData::from_a(majorana_matrix(&model.t), trace_t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub a_real_part: f64,
    pub a_antisymmetry: f64,
    pub abs_symmetry: f64,
    pub abs_min_eigenvalue: f64,
    pub sign_antisymmetry: f64,
    pub sign_hermiticity: f64,
    pub sign_square: f64,
    pub polar: f64,
    pub projector: f64,
    /// `|min eig |A| - ΔE|` when a single-particle gap is supplied.
    pub gap_mismatch: Option<f64>,
}

impl StructureReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.a_real_part,
            self.a_antisymmetry,
            self.abs_symmetry,
            self.sign_antisymmetry,
            self.sign_hermiticity,
            self.sign_square,
            self.polar,
            self.projector,
            self.gap_mismatch.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn structure_report(bdg: &BdgData, single_particle_gap: Option<f64>) -> StructureReport {
    let n = bdg.a.nrows();
    let id = CMat::identity(n, n);
    let a_real_part = bdg.a.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let a_antisymmetry = max_abs(&(&bdg.a + bdg.a.transpose()));
    let abs_symmetry = max_abs(&(&bdg.abs_a - bdg.abs_a.transpose()));
    let abs_min_eigenvalue = hermitian_eigen(&bdg.abs_a).values[0];
    let sign_antisymmetry = max_abs(&(&bdg.sign_a + bdg.sign_a.transpose()));
    let sign_hermiticity = max_abs(&(&bdg.sign_a - bdg.sign_a.adjoint()));
    let sign_square = max_abs(&(&bdg.sign_a * &bdg.sign_a - &id));
    let polar = max_abs(&(&bdg.a - &bdg.sign_a * &bdg.abs_a));
    let p_plus = (&id + &bdg.sign_a).scale(0.5);
    let p_minus = (&id - &bdg.sign_a).scale(0.5);
    let projector = [
        spectral_norm(&(&p_plus * &p_plus - &p_plus)),
        spectral_norm(&(&p_minus * &p_minus - &p_minus)),
        spectral_norm(&(&p_plus - p_plus.adjoint())),
        spectral_norm(&(&p_plus * &p_minus)),
        spectral_norm(&(&p_plus + &p_minus - &id)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    StructureReport {
        a_real_part,
        a_antisymmetry,
        abs_symmetry,
        abs_min_eigenvalue,
        sign_antisymmetry,
        sign_hermiticity,
        sign_square,
        polar,
        projector,
        gap_mismatch: single_particle_gap.map(|g| (abs_min_eigenvalue - g).abs()),
    }
}

/// `M^ν_{x,y} = (i s(A)^{c,ν}_{x,y} - s(A)^{d,ν}_{x,y}) / √2`, rows `x`, columns `(y, ν)`.
pub fn m_coefficients(bdg: &BdgData) -> CMat {
    let n = bdg.n_sites();
    let s = &bdg.sign_a;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n, 2 * n, |x, col| {
        let sc = s[(mode_index(x, Species::C), col)];
        let sd = s[(mode_index(x, Species::D), col)];
        (I * sc - sd) * C64::from(r)
    })
}

/// Site carrying each Majorana index, for decay fits.
pub fn majorana_site_projection(n_sites: usize) -> Vec<usize> {
    (0..2 * n_sites).map(|k| k / 2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::single_particle::from_matrix;

    fn one_site() -> BdgData {
        let m = from_matrix(Lattice::chain(1).unwrap(), CMat::from_element(1, 1, C64::from(1.0)), 0.0, None).unwrap();
        build_a(&m).unwrap()
    }

    #[test]
    fn one_site_values() {
        let b = one_site();
        let expected = CMat::from_row_slice(2, 2, &[C64::from(0.0), I, -I, C64::from(0.0)]);
        assert!(max_abs(&(&b.a - &expected)) < 1e-15);
        assert!(max_abs(&(&b.abs_a - CMat::identity(2, 2))) < 1e-12);
        assert!(max_abs(&(&b.sign_a - &b.a)) < 1e-12);
        assert!(structure_report(&b, Some(1.0)).max_violation() < 1e-12);
    }

    #[test]
    fn one_site_m() {
        let m = m_coefficients(&one_site());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[(0, 0)] - C64::new(0.0, r)).norm() < 1e-12);
        assert!((m[(0, 1)] - C64::new(-r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetric_input_reports_antisymmetry_violation() {
        let a = CMat::from_row_slice(2, 2, &[C64::from(0.0), C64::from(1.0), C64::from(1.0), C64::from(0.0)]);
        let b = BdgData::from_a(a, 0.0).unwrap();
        let r = structure_report(&b, None);
        assert!((r.a_antisymmetry - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gapless_a_is_an_error() {
        let m = from_matrix(Lattice::chain(1).unwrap(), CMat::zeros(1, 1), 0.0, None).unwrap();
        assert!(matches!(build_a(&m), Err(Error::Gapless { .. })));
    }

    #[test]
    fn real_t_has_no_diagonal_species_blocks() {
        let t = CMat::from_row_slice(2, 2, &[C64::from(0.3), C64::from(-1.0), C64::from(-1.0), C64::from(0.1)]);
        let a = majorana_matrix(&t);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(a[(2 * x, 2 * y)], C64::from(0.0));
                assert_eq!(a[(2 * x + 1, 2 * y + 1)], C64::from(0.0));
            }
        }
    }
}
