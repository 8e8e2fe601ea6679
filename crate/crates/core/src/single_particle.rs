//! Single-particle hopping matrix `T = t - E_F`, its Fermi gap, and decay fits.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{hermitian_eigen, linear_regression, max_abs, CMat, Spectrum, C64};

/// Translation-invariant bond: `t_{x, x+offset} = amplitude`, with the conjugate on the reverse bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub offset: Vec<i64>,
    pub amplitude: C64,
}

/// Explicit matrix element `t_{i,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub amplitude: C64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HoppingSpec {
    pub bonds: Vec<Bond>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub width: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SingleParticleModel {
    pub lattice: Lattice,
    /// `T = t - E_F`, Hermitian.
    pub t: CMat,
    pub fermi_energy: f64,
    pub spectrum: Spectrum,
    pub gap: f64,
    pub disorder: Option<DisorderSpec>,
}

impl SingleParticleModel {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn is_gapless(&self, tol: f64) -> bool {
        self.gap < tol
    }

    /// `max |(U†TU - D)_{ij}|` for the computed eigendata.
    pub fn diagonalization_residual(&self) -> f64 {
        let d = self.spectrum.to_eigenbasis(&self.t);
        let mut diag = CMat::zeros(d.nrows(), d.ncols());
        for (k, &l) in self.spectrum.values.iter().enumerate() {
            diag[(k, k)] = C64::from(l);
        }
        max_abs(&(d - diag))
    }
}

fn check_finite(z: C64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite amplitude in {what}")))
    }
}

/// Assemble `T` from bonds, explicit entries, the Fermi energy and optional diagonal disorder.
///
/// An explicit entry whose mirror is absent gets the conjugate filled in; a mirror
/// that is present must be the conjugate.
pub fn assemble_t(
    lattice: &Lattice,
    hopping: &HoppingSpec,
    fermi_energy: f64,
    disorder: Option<DisorderSpec>,
) -> Result<SingleParticleModel> {
    if !fermi_energy.is_finite() {
        return Err(Error::InvalidInput("fermi_energy is not finite".into()));
    }
    let n = lattice.len();
    let mut t = CMat::zeros(n, n);
    for bond in &hopping.bonds {
        check_finite(bond.amplitude, "bond")?;
        if bond.offset.len() != lattice.spatial_dim() {
            return Err(Error::InvalidInput(format!(
                "bond offset {:?} does not match lattice dimension {}",
                bond.offset,
                lattice.spatial_dim()
            )));
        }
        if bond.offset.iter().all(|&o| o == 0) {
            if bond.amplitude.im != 0.0 {
                return Err(Error::Hermiticity("on-site bond with imaginary amplitude".into()));
            }
            for x in 0..n {
                t[(x, x)] += bond.amplitude;
            }
            continue;
        }
        for x in 0..n {
            if let Some(y) = lattice.translate(x, &bond.offset) {
                if y != x {
                    t[(x, y)] += bond.amplitude;
                    t[(y, x)] += bond.amplitude.conj();
                }
            }
        }
    }
    let mut explicit: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for e in &hopping.entries {
        check_finite(e.amplitude, "entry")?;
        if e.i >= n || e.j >= n {
            return Err(Error::SiteOutOfRange { site: e.i.max(e.j), len: n });
        }
        *explicit.entry((e.i, e.j)).or_default() += e.amplitude;
    }
    for (&(i, j), &amp) in &explicit {
        if i == j {
            if amp.im.abs() > 1e-12 {
                return Err(Error::Hermiticity(format!("diagonal entry ({i},{i}) is not real")));
            }
            t[(i, i)] += C64::from(amp.re);
        } else {
            match explicit.get(&(j, i)) {
                Some(&mirror) => {
                    if (mirror - amp.conj()).norm() > 1e-12 {
                        return Err(Error::Hermiticity(format!(
                            "entries ({i},{j}) and ({j},{i}) are not conjugate"
                        )));
                    }
                    t[(i, j)] += amp;
                }
                None => {
                    t[(i, j)] += amp;
                    t[(j, i)] += amp.conj();
                }
            }
        }
    }
    for x in 0..n {
        t[(x, x)] -= C64::from(fermi_energy);
    }
    if let Some(d) = disorder {
        if !d.width.is_finite() || d.width < 0.0 {
            return Err(Error::InvalidInput("disorder width must be finite and >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
        for x in 0..n {
            let v = if d.width > 0.0 { rng.random_range(-d.width..=d.width) } else { 0.0 };
            t[(x, x)] += C64::from(v);
        }
    }
    from_matrix(lattice.clone(), t, fermi_energy, disorder)
}

/// Wrap an explicit `T` (already shifted by the Fermi energy).
pub fn from_matrix(
    lattice: Lattice,
    t: CMat,
    fermi_energy: f64,
    disorder: Option<DisorderSpec>,
) -> Result<SingleParticleModel> {
    if t.nrows() != lattice.len() || t.ncols() != lattice.len() {
        return Err(Error::InvalidDimension(format!(
            "T is {}x{} but the lattice has {} sites",
            t.nrows(),
            t.ncols(),
            lattice.len()
        )));
    }
    for z in t.iter() {
        check_finite(*z, "T")?;
    }
    let defect = max_abs(&(&t - t.adjoint()));
    if defect > 1e-12 {
        return Err(Error::Hermiticity(format!("‖T - T†‖_max = {defect:e}")));
    }
    let spectrum = hermitian_eigen(&t);
    let gap = spectrum.values.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    Ok(SingleParticleModel { lattice, t, fermi_energy, spectrum, gap, disorder })
}

/// Distance from the Fermi level to the spectrum: `min |λ(T)|`.
pub fn gap_at_fermi(model: &SingleParticleModel) -> f64 {
    model.gap
}

/// `diag(T, -T^t)`, whose spectrum is `{λ_i} ∪ {-λ_i}`.
pub fn particle_hole_doubled(t: &CMat) -> CMat {
    let n = t.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(t);
    m.view_mut((n, n), (n, n)).copy_from(&(-t.transpose()));
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub prefactor: f64,
    pub rate: f64,
    pub r_squared: f64,
    /// `(distance, max |entry|)` per shell, including shells below the floor.
    pub samples: Vec<(usize, f64)>,
}

pub const DECAY_FLOOR: f64 = 1e-14;

/// Fit `max_{dist = r} |value| ≈ C e^{-m r}` from per-distance samples.
pub fn fit_shell_maxima(samples: Vec<(usize, f64)>) -> Result<DecayFit> {
    let used: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v > DECAY_FLOOR)
        .map(|&(r, v)| (r as f64, v.ln()))
        .collect();
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} shell(s) above the floor, need at least 2",
            used.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = used.into_iter().unzip();
    let (intercept, slope, r2) = linear_regression(&x, &y);
    Ok(DecayFit { prefactor: intercept.exp(), rate: -slope, r_squared: r2, samples })
}

/// Shell maxima of a site-indexed (or projected) matrix, then a log-linear fit.
///
/// `projection[k]` is the site carrying row/column index `k`; `None` means identity.
pub fn fit_exponential_decay(entries: &CMat, lattice: &Lattice, projection: Option<&[usize]>) -> Result<DecayFit> {
    let site = |k: usize| projection.map_or(k, |p| p[k]);
    let mut shells: BTreeMap<usize, f64> = BTreeMap::new();
    for i in 0..entries.nrows() {
        for j in 0..entries.ncols() {
            let r = lattice.dist(site(i), site(j));
            let v = entries[(i, j)].norm();
            let e = shells.entry(r).or_insert(0.0);
            *e = e.max(v);
        }
    }
    fit_shell_maxima(shells.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn two_site_chain() {
        let lat = Lattice::chain(2).unwrap();
        let hop = HoppingSpec { bonds: vec![Bond { offset: vec![1], amplitude: c(-1.0) }], entries: vec![] };
        let m = assemble_t(&lat, &hop, 0.0, None).unwrap();
        assert_eq!(m.t[(0, 1)], c(-1.0));
        assert_eq!(m.t[(1, 0)], c(-1.0));
        assert!((m.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((gap_at_fermi(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_site_shift() {
        let lat = Lattice::chain(1).unwrap();
        let m = assemble_t(&lat, &HoppingSpec::default(), -1.0, None).unwrap();
        assert_eq!(m.t[(0, 0)], c(1.0));
        assert_eq!(m.gap, 1.0);
    }

    #[test]
    fn gapless_flag() {
        let lat = Lattice::chain(2).unwrap();
        let hop = HoppingSpec {
            bonds: vec![],
            entries: vec![Entry { i: 0, j: 1, amplitude: c(1.0) }, Entry { i: 0, j: 0, amplitude: c(1.0) }],
        };
        // Fermi energy placed on an eigenvalue of [[1,1],[1,0]].
        let lam = (1.0 + 5f64.sqrt()) / 2.0;
        let m = assemble_t(&lat, &hop, lam, None).unwrap();
        assert!(m.is_gapless(1e-10));
    }

    #[test]
    fn hermiticity_and_nan_errors() {
        let lat = Lattice::chain(2).unwrap();
        let bad = HoppingSpec {
            bonds: vec![],
            entries: vec![Entry { i: 0, j: 1, amplitude: c(1.0) }, Entry { i: 1, j: 0, amplitude: c(2.0) }],
        };
        assert!(matches!(assemble_t(&lat, &bad, 0.0, None), Err(Error::Hermiticity(_))));
        let nan = HoppingSpec { bonds: vec![Bond { offset: vec![1], amplitude: c(f64::NAN) }], entries: vec![] };
        assert!(matches!(assemble_t(&lat, &nan, 0.0, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn periodic_bonds_and_disorder_reproducible() {
        let lat = Lattice::new(&[4], &[Boundary::Periodic]).unwrap();
        let hop = HoppingSpec { bonds: vec![Bond { offset: vec![1], amplitude: C64::new(0.0, 1.0) }], entries: vec![] };
        let d = Some(DisorderSpec { width: 0.5, seed: 7 });
        let a = assemble_t(&lat, &hop, 0.0, d).unwrap();
        let b = assemble_t(&lat, &hop, 0.0, d).unwrap();
        assert_eq!(a.t, b.t);
        assert_eq!(a.t[(3, 0)], C64::new(0.0, 1.0));
        assert_eq!(a.t[(0, 3)], C64::new(0.0, -1.0));
        for x in 0..4 {
            assert!(a.t[(x, x)].re.abs() <= 0.5);
        }
    }

    #[test]
    fn decay_fit_insufficient_for_identity() {
        let lat = Lattice::chain(4).unwrap();
        let id = CMat::identity(4, 4);
        assert!(matches!(fit_exponential_decay(&id, &lat, None), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn decay_fit_exact_exponential() {
        let lat = Lattice::chain(5).unwrap();
        let m = CMat::from_fn(5, 5, |i, j| c(2.0 * (-0.7 * i.abs_diff(j) as f64).exp()));
        let fit = fit_exponential_decay(&m, &lat, None).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!((fit.prefactor - 2.0).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }
}
