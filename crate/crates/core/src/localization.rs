//! Fermionic conditional expectations `Π̄_X`, truncations `Π̃_X`, shell decompositions and the projector sandwich.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, creation, hole, number, parity_operator, support_of, FockSpace, ModeSet, OperatorMatrix, Parity};
use crate::lattice::{Lattice, SiteSet};
use crate::linalg::{spectral_norm, CMat, C64};
use crate::single_particle::{fit_shell_maxima, DecayFit};

/// Relative tolerance for the even-parity precondition.
pub const PARITY_TOL: f64 = 1e-10;

/// The four single-mode unitaries `1, 1 − 2q, ξ + ξ†, (1 − 2q)(ξ + ξ†)`.
pub fn probe_unitaries(space: &FockSpace, mode: usize) -> Result<[CMat; 4]> {
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    let flip = &id - number(space, mode)?.dense() * C64::from(2.0);
    let swap = creation(space, mode)?.dense() + annihilation(space, mode)?.dense();
    let both = &flip * &swap;
    Ok([id, flip, swap, both])
}

fn check_even(space: &FockSpace, a: &CMat) -> Result<()> {
    let p = parity_operator(space, ModeSet::all(space.n_modes())).dense();
    let odd = spectral_norm(&((a - &p * a * &p) * C64::from(0.5)));
    if odd > PARITY_TOL * spectral_norm(a).max(1.0) {
        return Err(Error::Parity(format!("operator has an odd component of norm {odd:e}")));
    }
    Ok(())
}

fn average_mode(space: &FockSpace, a: &CMat, mode: usize) -> Result<CMat> {
    let us = probe_unitaries(space, mode)?;
    let mut acc = CMat::zeros(a.nrows(), a.ncols());
    for u in &us {
        acc += u.adjoint() * a * u;
    }
    Ok(acc * C64::from(0.25))
}

/// `Π̄_X(A)`: composition of single-mode averages over `X`.
pub fn pi_bar(space: &FockSpace, a: &CMat, x: ModeSet) -> Result<CMat> {
    check_even(space, a)?;
    pi_bar_unchecked(space, a, x)
}

/// `Π̄_X` without the parity precondition, for demonstrating the odd-parity failure.
pub fn pi_bar_unchecked(space: &FockSpace, a: &CMat, x: ModeSet) -> Result<CMat> {
    let mut out = a.clone();
    for m in x.iter() {
        space.check_mode(m)?;
        out = average_mode(space, &out, m)?;
    }
    Ok(out)
}

/// `Π̄_X(A)` as the explicit `4^{|X|}`-term average.
pub fn pi_bar_direct(space: &FockSpace, a: &CMat, x: ModeSet) -> Result<CMat> {
    check_even(space, a)?;
    let modes: Vec<usize> = x.iter().collect();
    let singles: Vec<[CMat; 4]> = modes.iter().map(|&m| probe_unitaries(space, m)).collect::<Result<_>>()?;
    let dim = space.dim();
    let total = 4usize.pow(modes.len() as u32);
    let mut acc = CMat::zeros(dim, dim);
    for code in 0..total {
        let u = product_unitary(&singles, code, dim);
        acc += u.adjoint() * a * &u;
    }
    Ok(acc / C64::from(total as f64))
}

fn product_unitary(singles: &[[CMat; 4]], code: usize, dim: usize) -> CMat {
    let mut u = CMat::identity(dim, dim);
    let mut c = code;
    for s in singles {
        u *= &s[c % 4];
        c /= 4;
    }
    u
}

/// `Π̃_X = Π̄_{complement of X}`.
pub fn pi_truncate(space: &FockSpace, a: &CMat, x: ModeSet) -> Result<CMat> {
    pi_bar(space, a, x.complement(space.n_modes()))
}

/// Truncation error against the probe-commutator bound of the truncation lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    /// `‖A − Π̃_X(A)‖`.
    pub error: f64,
    /// `max_σ ‖[A, U_Y(σ)]‖` over all probe unitaries on `Y = complement of X`.
    pub epsilon: f64,
}

impl TruncationCheck {
    pub fn holds(&self) -> bool {
        self.error <= self.epsilon + 1e-12
    }
}

pub fn truncation_check(space: &FockSpace, a: &CMat, x: ModeSet) -> Result<TruncationCheck> {
    let y = x.complement(space.n_modes());
    let error = spectral_norm(&(a - pi_truncate(space, a, x)?));
    let modes: Vec<usize> = y.iter().collect();
    let singles: Vec<[CMat; 4]> = modes.iter().map(|&m| probe_unitaries(space, m)).collect::<Result<_>>()?;
    let dim = space.dim();
    let mut epsilon: f64 = 0.0;
    for code in 0..4usize.pow(modes.len() as u32) {
        let u = product_unitary(&singles, code, dim);
        epsilon = epsilon.max(spectral_norm(&(a * &u - &u * a)));
    }
    Ok(TruncationCheck { error, epsilon })
}

/// `‖[q_x ξ_y + (ξ_x + ξ_x†) q_x ξ_y (ξ_x + ξ_x†)] − (2q_x − 1) ξ_y‖` and the norm of the `x`-dependent part.
pub fn odd_parity_remark(space: &FockSpace, x: usize, y: usize) -> Result<(f64, f64)> {
    if x == y {
        return Err(Error::InvalidInput("the odd-parity example needs two distinct modes".into()));
    }
    let dim = space.dim();
    let qx = number(space, x)?.dense();
    let xi_y = annihilation(space, y)?.dense();
    let swap = creation(space, x)?.dense() + annihilation(space, x)?.dense();
    let a = &qx * &xi_y;
    let lhs = &a + &swap * &a * &swap;
    let rhs = (&qx * C64::from(2.0) - CMat::identity(dim, dim)) * &xi_y;
    let residual = spectral_norm(&(lhs - &rhs));
    let still_on_x = spectral_norm(&(&qx * &xi_y * C64::from(2.0)));
    Ok((residual, still_on_x))
}

/// `Π_{x∈X} q̄_x`.
pub fn vacuum_projector(space: &FockSpace, x: ModeSet) -> Result<CMat> {
    let dim = space.dim();
    let mut p = CMat::identity(dim, dim);
    for m in x.iter() {
        p *= hole(space, m)?.dense();
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShellMode {
    /// Regions `Z_n = ball(Z, n)`.
    FlowConjugation,
    /// Regions `𝓩_n = ball(Z, 2n)`.
    Filter,
}

impl ShellMode {
    pub fn region(self, lattice: &Lattice, z: &SiteSet, n: usize) -> Result<SiteSet> {
        match self {
            ShellMode::FlowConjugation => lattice.ball(z, n),
            ShellMode::Filter => lattice.ball(z, 2 * n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Shell {
    pub n: usize,
    pub sites: Vec<usize>,
    pub op: CMat,
    pub norm: f64,
    /// `‖whole − Π̃_{region n}(whole)‖`.
    pub tail: f64,
    pub support_ok: bool,
}

#[derive(Debug, Clone)]
pub struct LocalizationShells {
    pub base: Vec<usize>,
    pub mode: ShellMode,
    pub shells: Vec<Shell>,
    /// `‖Σ_n Δⁿ − whole‖`.
    pub telescoping_residual: f64,
    pub fit: Option<DecayFit>,
}

impl LocalizationShells {
    pub fn support_ok(&self) -> bool {
        self.shells.iter().all(|s| s.support_ok)
    }
}

fn modes_of(space: &FockSpace, sites: &SiteSet) -> ModeSet {
    let v: Vec<usize> = sites.iter().copied().collect();
    space.modes_on_sites(&v)
}

fn within(space: &FockSpace, op: &CMat, allowed: ModeSet) -> Result<bool> {
    if spectral_norm(op) < 1e-13 {
        return Ok(true);
    }
    let om = OperatorMatrix::from_dense(space.n_modes(), op.clone(), Parity::Even, ModeSet::all(space.n_modes()));
    Ok(support_of(space, &om, 1e-10)?.is_subset(allowed))
}

/// `Δ⁰ = Π̃_{region 0}(whole)`, `Δⁿ = Π̃_{region n}(whole) − Π̃_{region n−1}(whole)`.
pub fn shell_decompose(
    space: &FockSpace,
    lattice: &Lattice,
    whole: &CMat,
    z: &[usize],
    n_max: usize,
    mode: ShellMode,
) -> Result<LocalizationShells> {
    check_even(space, whole)?;
    let zset: SiteSet = z.iter().copied().collect();
    let mut shells = Vec::new();
    let dim = space.dim();
    let mut prev = CMat::zeros(dim, dim);
    let mut total = CMat::zeros(dim, dim);
    for n in 0..=n_max {
        let region = mode.region(lattice, &zset, n)?;
        let modes = modes_of(space, &region);
        let trunc = pi_bar_unchecked(space, whole, modes.complement(space.n_modes()))?;
        let delta = &trunc - &prev;
        let support_ok = within(space, &delta, modes)?;
        total += &delta;
        shells.push(Shell {
            n,
            sites: region.iter().copied().collect(),
            norm: spectral_norm(&delta),
            tail: spectral_norm(&(whole - &trunc)),
            op: delta,
            support_ok,
        });
        prev = trunc;
    }
    let telescoping_residual = spectral_norm(&(total - whole));
    let fit = fit_shell_maxima(shells.iter().map(|s| (s.n, s.norm)).collect()).ok();
    Ok(LocalizationShells { base: z.to_vec(), mode, shells, telescoping_residual, fit })
}

#[derive(Debug, Clone)]
pub struct SandwichPart {
    pub n: usize,
    pub sites: Vec<usize>,
    pub op: CMat,
    pub norm: f64,
    pub annihilation_residual: f64,
    pub support_ok: bool,
    /// `‖W_{Z,n}‖ ≤ tail(n) + 4·tail(n−1)` with the measured truncation tails.
    pub norm_bound_ok: bool,
}

#[derive(Debug, Clone)]
pub struct SandwichSplit {
    pub parts: Vec<SandwichPart>,
    /// `‖Σ_n W_{Z,n} − W_Z‖`.
    pub sum_residual: f64,
    /// Largest residual of `P_{0,𝓩_n} = P_{0,𝓩_{n−1}} P_{0,𝓩_n∖𝓩_{n−1}}` and its companion identity.
    pub projector_identity_residual: f64,
}

/// Split a ground-state-annihilating `W_Z` into parts supported in the shell regions that each annihilate `Φ̃₀(0)`.
pub fn sandwich_split(space: &FockSpace, w: &CMat, shells: &LocalizationShells, phi0: &crate::linalg::CVec) -> Result<SandwichSplit> {
    let pre = (w * phi0).norm();
    if pre > 1e-8 {
        return Err(Error::Precondition(format!(
            "W_Z for Z = {:?} does not annihilate the ground state (residual {pre:e})",
            shells.base
        )));
    }
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    let mut parts = Vec::new();
    let mut sum = CMat::zeros(dim, dim);
    let mut identity_residual: f64 = 0.0;
    let mut truncated = CMat::zeros(dim, dim);
    let mut prev_p: Option<CMat> = None;
    let mut prev_modes = ModeSet::EMPTY;
    let mut prev_tail = 0.0;
    for shell in &shells.shells {
        let modes = space.modes_on_sites(&shell.sites);
        let p = vacuum_projector(space, modes)?;
        let mut part = (&id - &p) * &shell.op * (&id - &p);
        if let Some(pp) = &prev_p {
            let q = vacuum_projector(space, modes.difference(prev_modes))?;
            identity_residual = identity_residual.max(spectral_norm(&(pp * &q - &p)));
            identity_residual = identity_residual.max(spectral_norm(&((&id - &p) * &q - (&id - pp) * &q)));
            let t = &truncated;
            let oq = &id - &q;
            part += (&id - pp) * t * pp * &oq;
            part += &oq * pp * t * (&id - pp);
            part += &oq * pp * t * pp * &oq;
        }
        truncated += &shell.op;
        let norm = spectral_norm(&part);
        let bound = if shell.n == 0 { spectral_norm(&shell.op) } else { shell.tail + 4.0 * prev_tail };
        parts.push(SandwichPart {
            n: shell.n,
            sites: shell.sites.clone(),
            annihilation_residual: (&part * phi0).norm(),
            support_ok: within(space, &part, modes)?,
            norm_bound_ok: norm <= bound + 1e-10,
            norm,
            op: part.clone(),
        });
        sum += part;
        prev_p = Some(p);
        prev_modes = modes;
        prev_tail = shell.tail;
    }
    Ok(SandwichSplit { parts, sum_residual: spectral_norm(&(sum - w)), projector_identity_residual: identity_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_values() {
        let space = FockSpace::sites(2).unwrap();
        let id = CMat::identity(4, 4);
        let q0 = number(&space, 0).unwrap().dense();
        let avg = pi_bar(&space, &q0, ModeSet::single(0)).unwrap();
        assert!(spectral_norm(&(avg - &id * C64::from(0.5))) < 1e-15);
        let xi = annihilation(&space, 0).unwrap().dense();
        assert!(spectral_norm(&pi_bar_unchecked(&space, &xi, ModeSet::single(0)).unwrap()) < 1e-15);
        assert!(matches!(pi_bar(&space, &xi, ModeSet::single(0)), Err(Error::Parity(_))));
        let q1 = number(&space, 1).unwrap().dense();
        let avg = pi_bar(&space, &(&q0 * &q1), ModeSet::single(0)).unwrap();
        assert!(spectral_norm(&(avg - &q1 * C64::from(0.5))) < 1e-15);
    }

    #[test]
    fn composition_matches_direct() {
        let space = FockSpace::sites(3).unwrap();
        let a = number(&space, 0).unwrap().dense() * number(&space, 2).unwrap().dense()
            + creation(&space, 1).unwrap().dense() * annihilation(&space, 2).unwrap().dense();
        let x = ModeSet::from_modes([0, 2]);
        let d = pi_bar_direct(&space, &a, x).unwrap();
        let c = pi_bar(&space, &a, x).unwrap();
        assert!(spectral_norm(&(d - c)) < 1e-14);
    }

    #[test]
    fn remark_identity() {
        let space = FockSpace::sites(2).unwrap();
        let (r, still) = odd_parity_remark(&space, 0, 1).unwrap();
        assert!(r < 1e-15);
        assert!(still > 0.5);
    }
}
