//! Occupation-number Fock spaces and many-body operator matrices.
//!
//! Basis index bit `k` is the occupation of mode `k`. Ladder operators carry the
//! Jordan-Wigner sign `(-1)^(number of occupied modes before k)`.

use std::fmt;

use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{power_norm, spectral_norm, CMat, CVec, C64, I, ONE, ZERO};
use crate::majorana::Species;

/// Dense eigensolves and SVDs are used up to this Hilbert-space dimension.
pub const DENSE_LIMIT: usize = 4096;
pub const MAX_MODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ModeSet(pub u64);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);

    pub fn single(mode: usize) -> Self {
        ModeSet(1 << mode)
    }

    pub fn all(n_modes: usize) -> Self {
        if n_modes >= 64 {
            ModeSet(u64::MAX)
        } else {
            ModeSet((1u64 << n_modes) - 1)
        }
    }

    pub fn from_modes(modes: impl IntoIterator<Item = usize>) -> Self {
        ModeSet(modes.into_iter().fold(0, |acc, m| acc | (1 << m)))
    }

    pub fn contains(self, mode: usize) -> bool {
        self.0 >> mode & 1 == 1
    }

    pub fn insert(&mut self, mode: usize) {
        self.0 |= 1 << mode;
    }

    pub fn union(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 & other.0)
    }

    pub fn difference(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 & !other.0)
    }

    pub fn complement(self, n_modes: usize) -> ModeSet {
        ModeSet::all(n_modes).difference(self)
    }

    pub fn is_subset(self, other: ModeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&m| self.contains(m))
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// What a mode represents physically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeKind {
    /// The original fermion `a_x`.
    Site,
    /// The doubled-space fermion `η_x^μ`.
    Eta(Species),
    /// Copy `j` of the original fermion, used to realise the two Majorana copies.
    Copy(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub site: usize,
    pub kind: ModeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    pub modes: Vec<ModeLabel>,
}

impl FockSpace {
    pub fn new(modes: Vec<ModeLabel>) -> Result<Self> {
        if modes.len() > MAX_MODES {
            return Err(Error::DimensionGuard { sites: modes.len(), max: MAX_MODES });
        }
        Ok(Self { modes })
    }

    /// One mode per site.
    pub fn sites(n_sites: usize) -> Result<Self> {
        Self::new((0..n_sites).map(|site| ModeLabel { site, kind: ModeKind::Site }).collect())
    }

    /// Modes `(x, c), (x, d)` interleaved, site-major.
    pub fn eta(n_sites: usize) -> Result<Self> {
        Self::new(
            (0..n_sites)
                .flat_map(|site| {
                    [Species::C, Species::D].map(|s| ModeLabel { site, kind: ModeKind::Eta(s) })
                })
                .collect(),
        )
    }

    /// Two copies per site: `(x, copy 1), (x, copy 2)` interleaved.
    pub fn two_copies(n_sites: usize) -> Result<Self> {
        Self::new(
            (0..n_sites)
                .flat_map(|site| [1u8, 2].map(|j| ModeLabel { site, kind: ModeKind::Copy(j) }))
                .collect(),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.modes.len()
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.n_modes() {
            Ok(())
        } else {
            Err(Error::UnknownMode { mode, n_modes: self.n_modes() })
        }
    }

    /// Set of sites touched by a mode set.
    pub fn sites_of(&self, set: ModeSet) -> Vec<usize> {
        let mut sites: Vec<usize> = set.iter().map(|m| self.modes[m].site).collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// All modes living on the given sites.
    pub fn modes_on_sites(&self, sites: &[usize]) -> ModeSet {
        ModeSet::from_modes((0..self.n_modes()).filter(|&m| sites.contains(&self.modes[m].site)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn from_degree(degree: usize) -> Self {
        if degree % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    pub fn plus(self, other: Parity) -> Parity {
        if self == other {
            self
        } else {
            Parity::Mixed
        }
    }
}

#[derive(Debug, Clone)]
pub enum Storage {
    Sparse(CscMatrix<C64>),
    Dense(CMat),
}

/// A many-body operator with parity tag and declared support.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub n_modes: usize,
    pub storage: Storage,
    pub parity: Parity,
    pub support: ModeSet,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    pub fn from_dense(n_modes: usize, m: CMat, parity: Parity, support: ModeSet) -> Self {
        Self { n_modes, storage: Storage::Dense(m), parity, support }
    }

    pub fn from_sparse(n_modes: usize, m: CscMatrix<C64>, parity: Parity, support: ModeSet) -> Self {
        Self { n_modes, storage: Storage::Sparse(m), parity, support }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::from_sparse(n_modes, CscMatrix::identity(1 << n_modes), Parity::Even, ModeSet::EMPTY)
    }

    pub fn zero(n_modes: usize) -> Self {
        let d = 1 << n_modes;
        Self::from_sparse(n_modes, CscMatrix::zeros(d, d), Parity::Even, ModeSet::EMPTY)
    }

    pub fn dense(&self) -> CMat {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => CMat::from(s),
        }
    }

    pub fn sparse(&self) -> CscMatrix<C64> {
        match &self.storage {
            Storage::Sparse(s) => s.clone(),
            Storage::Dense(m) => dense_to_csc(m),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Sparse(s) => csc_matvec(s, v, false),
        }
    }

    pub fn apply_adjoint(&self, v: &CVec) -> CVec {
        match &self.storage {
            Storage::Dense(m) => m.adjoint() * v,
            Storage::Sparse(s) => csc_matvec(s, v, true),
        }
    }

    fn check_same_space(&self, other: &OperatorMatrix) {
        assert_eq!(self.n_modes, other.n_modes, "operators on different Fock spaces");
    }

    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.check_same_space(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a * b),
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(a * b),
            (Storage::Dense(a), Storage::Sparse(b)) => Storage::Dense(a * CMat::from(b)),
        };
        OperatorMatrix {
            n_modes: self.n_modes,
            storage,
            parity: self.parity.times(other.parity),
            support: self.support.union(other.support),
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.check_same_space(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a + b),
            _ => Storage::Dense(self.dense() + other.dense()),
        };
        OperatorMatrix {
            n_modes: self.n_modes,
            storage,
            parity: self.parity.plus(other.parity),
            support: self.support.union(other.support),
        }
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: C64) -> OperatorMatrix {
        let storage = match &self.storage {
            Storage::Sparse(s) => Storage::Sparse(s * c),
            Storage::Dense(m) => Storage::Dense(m * c),
        };
        OperatorMatrix { storage, ..self.clone() }
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        let storage = match &self.storage {
            Storage::Sparse(s) => {
                let t = s.transpose();
                let mut t = t;
                t.values_mut().iter_mut().for_each(|z| *z = z.conj());
                Storage::Sparse(t)
            }
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
        };
        OperatorMatrix { storage, ..self.clone() }
    }

    /// Norms of the even and odd parts.
    pub fn parity_components(&self) -> (f64, f64) {
        let m = self.dense();
        let mut even = m.clone();
        let mut odd = m;
        for i in 0..even.nrows() {
            for j in 0..even.ncols() {
                if (i.count_ones() + j.count_ones()) % 2 == 0 {
                    odd[(i, j)] = ZERO;
                } else {
                    even[(i, j)] = ZERO;
                }
            }
        }
        (spectral_norm(&even), spectral_norm(&odd))
    }

    /// Parity inferred from the matrix entries.
    pub fn measured_parity(&self, tol: f64) -> Parity {
        let (mut even, mut odd) = (false, false);
        let mut visit = |i: usize, j: usize, z: C64| {
            if z.norm() > tol {
                if (i.count_ones() + j.count_ones()) % 2 == 0 {
                    even = true;
                } else {
                    odd = true;
                }
            }
        };
        match &self.storage {
            Storage::Sparse(s) => s.triplet_iter().for_each(|(i, j, z)| visit(i, j, *z)),
            Storage::Dense(m) => {
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        visit(i, j, m[(i, j)]);
                    }
                }
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }
}

pub fn dense_to_csc(m: &CMat) -> CscMatrix<C64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != ZERO {
                coo.push(i, j, z);
            }
        }
    }
    CscMatrix::from(&coo)
}

fn csc_matvec(s: &CscMatrix<C64>, v: &CVec, adjoint: bool) -> CVec {
    let mut out = CVec::zeros(if adjoint { s.ncols() } else { s.nrows() });
    for (j, col) in s.col_iter().enumerate() {
        for (&i, &z) in col.row_indices().iter().zip(col.values()) {
            if adjoint {
                out[j] += z.conj() * v[i];
            } else {
                out[i] += z * v[j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    Create,
    Annihilate,
    MajoranaC,
    MajoranaD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coefficient: C64,
    /// Multiplication order, left to right.
    pub factors: Vec<(usize, FactorKind)>,
}

impl MonomialTerm {
    pub fn new(coefficient: C64, factors: Vec<(usize, FactorKind)>) -> Self {
        Self { coefficient, factors }
    }

    pub fn parity(&self) -> Parity {
        Parity::from_degree(self.factors.len())
    }

    pub fn modes(&self) -> ModeSet {
        ModeSet::from_modes(self.factors.iter().map(|&(m, _)| m))
    }
}

/// `a_k` or `a_k†` with its Jordan-Wigner string.
pub fn ladder(space: &FockSpace, mode: usize, create: bool) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let dim = space.dim();
    let bit = 1usize << mode;
    let below = bit - 1;
    let mut coo = CooMatrix::new(dim, dim);
    for state in 0..dim {
        let occupied = state & bit != 0;
        if occupied == create {
            continue;
        }
        let sign = if (state & below).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        coo.push(state ^ bit, state, C64::from(sign));
    }
    Ok(OperatorMatrix::from_sparse(space.n_modes(), CscMatrix::from(&coo), Parity::Odd, ModeSet::single(mode)))
}

pub fn annihilation(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    ladder(space, mode, false)
}

pub fn creation(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    ladder(space, mode, true)
}

/// `c = (a† + a)/√2` or `d = i(a† - a)/√2` on the given mode.
pub fn majorana(space: &FockSpace, mode: usize, species: Species) -> Result<OperatorMatrix> {
    let a = annihilation(space, mode)?;
    let ad = creation(space, mode)?;
    let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    Ok(match species {
        Species::C => ad.add(&a).scale(r),
        Species::D => ad.sub(&a).scale(I * r),
    })
}

pub fn factor(space: &FockSpace, mode: usize, kind: FactorKind) -> Result<OperatorMatrix> {
    match kind {
        FactorKind::Create => creation(space, mode),
        FactorKind::Annihilate => annihilation(space, mode),
        FactorKind::MajoranaC => majorana(space, mode, Species::C),
        FactorKind::MajoranaD => majorana(space, mode, Species::D),
    }
}

/// `q_k = a_k† a_k`.
pub fn number(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let dim = space.dim();
    let bit = 1usize << mode;
    let mut coo = CooMatrix::new(dim, dim);
    for state in (0..dim).filter(|s| s & bit != 0) {
        coo.push(state, state, ONE);
    }
    Ok(OperatorMatrix::from_sparse(space.n_modes(), CscMatrix::from(&coo), Parity::Even, ModeSet::single(mode)))
}

/// `q̄_k = 1 - q_k`.
pub fn hole(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix::identity(space.n_modes()).sub(&number(space, mode)?))
}

/// Diagonal operator with entries `f(basis state)`.
pub fn diagonal(space: &FockSpace, f: impl Fn(usize) -> C64, support: ModeSet) -> OperatorMatrix {
    let dim = space.dim();
    let mut coo = CooMatrix::new(dim, dim);
    for state in 0..dim {
        let z = f(state);
        if z != ZERO {
            coo.push(state, state, z);
        }
    }
    OperatorMatrix::from_sparse(space.n_modes(), CscMatrix::from(&coo), Parity::Even, support)
}

/// `(-1)^{number of occupied modes in set}`.
pub fn parity_operator(space: &FockSpace, set: ModeSet) -> OperatorMatrix {
    diagonal(
        space,
        |s| C64::from(if (s as u64 & set.0).count_ones() % 2 == 0 { 1.0 } else { -1.0 }),
        set,
    )
}

pub fn total_number(space: &FockSpace) -> OperatorMatrix {
    diagonal(space, |s| C64::from(s.count_ones() as f64), ModeSet::all(space.n_modes()))
}

/// `Σ coefficient · Π factors` with factors multiplied in listed order.
pub fn assemble_polynomial(space: &FockSpace, terms: &[MonomialTerm]) -> Result<OperatorMatrix> {
    let mut total = OperatorMatrix::zero(space.n_modes());
    let mut parity: Option<Parity> = None;
    for term in terms {
        let mut prod = OperatorMatrix::identity(space.n_modes());
        for &(mode, kind) in &term.factors {
            prod = prod.mul(&factor(space, mode, kind)?);
        }
        total = total.add(&prod.scale(term.coefficient));
        parity = Some(parity.map_or(term.parity(), |p| p.plus(term.parity())));
        total.support = total.support.union(term.modes());
    }
    total.parity = parity.unwrap_or(Parity::Even);
    Ok(total)
}

/// Largest singular value: dense up to [`DENSE_LIMIT`], power iteration above.
pub fn operator_norm(op: &OperatorMatrix) -> f64 {
    if op.dim() <= DENSE_LIMIT {
        spectral_norm(&op.dense())
    } else {
        power_norm(op.dim(), |v| op.apply(v), |v| op.apply_adjoint(v), 1e-8, 100_000)
    }
}

/// Smallest mode set outside of which `op` commutes with every `q_m` and `ξ_m + ξ_m†`.
///
/// For even operators the probes generate the full algebra of each mode, so the result
/// is the true support. Odd operators are rejected because their support depends on
/// the Jordan-Wigner strings.
pub fn support_of(space: &FockSpace, op: &OperatorMatrix, tol: f64) -> Result<ModeSet> {
    let parity = op.measured_parity(tol);
    if parity == Parity::Mixed {
        return Err(Error::Unsupported("support inference for mixed-parity operator".into()));
    }
    if parity == Parity::Odd {
        return Err(Error::Unsupported("support inference for odd operator is string-dependent".into()));
    }
    let m = op.dense();
    let mut set = ModeSet::EMPTY;
    for mode in 0..space.n_modes() {
        let q = number(space, mode)?.dense();
        let x = annihilation(space, mode)?.add(&creation(space, mode)?).dense();
        let c1 = spectral_norm(&(&m * &q - &q * &m));
        let c2 = spectral_norm(&(&m * &x - &x * &m));
        if c1 > tol || c2 > tol {
            set.insert(mode);
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, max_abs};

    fn c(re: f64) -> C64 {
        C64::from(re)
    }

    #[test]
    fn single_mode_creation() {
        let sp = FockSpace::sites(1).unwrap();
        let ad = creation(&sp, 0).unwrap().dense();
        let expected = CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        assert_eq!(ad, expected);
    }

    #[test]
    fn jordan_wigner_sign_on_second_mode() {
        let sp = FockSpace::sites(2).unwrap();
        let a1 = annihilation(&sp, 1).unwrap().dense();
        // |11> (index 3) -> -|01> (index 1): mode 0 occupied contributes a sign.
        assert_eq!(a1[(1, 3)], c(-1.0));
        assert_eq!(a1[(0, 2)], c(1.0));
    }

    #[test]
    fn car_on_four_modes() {
        let sp = FockSpace::sites(4).unwrap();
        let id = CMat::identity(16, 16);
        for i in 0..4 {
            let ai = annihilation(&sp, i).unwrap().dense();
            for j in 0..4 {
                let aj = annihilation(&sp, j).unwrap().dense();
                let ajd = aj.adjoint();
                let expected = if i == j { id.clone() } else { CMat::zeros(16, 16) };
                assert!(max_abs(&(anticommutator(&ai, &ajd) - expected)) < 1e-13);
                assert!(max_abs(&anticommutator(&ai, &aj)) < 1e-13);
            }
        }
    }

    #[test]
    fn majorana_properties() {
        let sp = FockSpace::sites(2).unwrap();
        let cx = majorana(&sp, 0, Species::C).unwrap();
        let dx = majorana(&sp, 0, Species::D).unwrap().dense();
        let cd = cx.dense();
        assert!(max_abs(&(&cd * &cd - CMat::identity(4, 4).scale(0.5))) < 1e-13);
        assert!(max_abs(&anticommutator(&cd, &dx)) < 1e-13);
        assert!((operator_norm(&cx) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn polynomials() {
        let sp = FockSpace::sites(2).unwrap();
        let q = assemble_polynomial(&sp, &[MonomialTerm::new(ONE, vec![(0, FactorKind::Create), (0, FactorKind::Annihilate)])]).unwrap();
        assert!(max_abs(&(q.dense() - number(&sp, 0).unwrap().dense())) < 1e-15);
        assert_eq!(q.parity, Parity::Even);
        let empty = assemble_polynomial(&sp, &[]).unwrap();
        assert_eq!(max_abs(&empty.dense()), 0.0);
        let u = 2.5;
        let nn = assemble_polynomial(
            &sp,
            &[MonomialTerm::new(
                c(u),
                vec![(0, FactorKind::Create), (0, FactorKind::Annihilate), (1, FactorKind::Create), (1, FactorKind::Annihilate)],
            )],
        )
        .unwrap()
        .dense();
        let mut expected = CMat::zeros(4, 4);
        expected[(3, 3)] = c(u);
        assert!(max_abs(&(nn - expected)) < 1e-15);
    }

    #[test]
    fn norms() {
        let sp = FockSpace::sites(3).unwrap();
        assert!((operator_norm(&number(&sp, 1).unwrap()) - 1.0).abs() < 1e-12);
        assert!((operator_norm(&annihilation(&sp, 2).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn supports() {
        let sp = FockSpace::sites(4).unwrap();
        let qq = number(&sp, 1).unwrap().mul(&number(&sp, 2).unwrap());
        assert_eq!(support_of(&sp, &qq, 1e-12).unwrap(), ModeSet::from_modes([1, 2]));
        assert_eq!(support_of(&sp, &OperatorMatrix::identity(4), 1e-12).unwrap(), ModeSet::EMPTY);
        let hop = creation(&sp, 0).unwrap().mul(&annihilation(&sp, 3).unwrap());
        assert_eq!(support_of(&sp, &hop, 1e-12).unwrap(), ModeSet::from_modes([0, 3]));
        let mixed = number(&sp, 0).unwrap().add(&annihilation(&sp, 1).unwrap());
        assert!(matches!(support_of(&sp, &mixed, 1e-12), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unknown_mode() {
        let sp = FockSpace::sites(2).unwrap();
        assert!(matches!(creation(&sp, 2), Err(Error::UnknownMode { .. })));
    }
}
