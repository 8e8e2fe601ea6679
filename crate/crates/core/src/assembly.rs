//! Effective interactions `W̃⁽¹⁾, W̃⁽²⁾, W̃⁽³⁾`, the reconstruction of `H̃(s)`, and the relative-bound gap machinery.

use serde::{Deserialize, Serialize};

use crate::doubled::DoubledHamiltonian;
use crate::error::{Error, Result};
use crate::fock::{hole, number, FockSpace, ModeSet};
use crate::flow::{filter_in, FlowState, WeightFunction};
use crate::linalg::{
    commutator, hermitian_eigen, hermitian_pinv, lanczos_lowest, linear_regression, spectral_norm, CMat, CVec, Spectrum,
    C64, I, ZERO,
};
use crate::majorana::BdgData;
use crate::transform::{transform_to_eta, InteractionSet};

/// Default bound on the flow intertwining residual for building effective interactions.
pub const DEFAULT_FLOW_BUDGET: f64 = 1e-6;

/// A labelled local operator on the doubled space.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub label: String,
    pub sites: Vec<usize>,
    pub op: CMat,
}

/// Everything needed to build effective interactions at any grid point of a flow.
#[derive(Debug, Clone)]
pub struct AssemblyContext {
    /// `𝓗̃₀`.
    pub h0: CMat,
    /// `𝓗̃_{0,Z}`.
    pub h0_terms: Vec<LocalOperator>,
    /// `Ṽ_Z`.
    pub v_terms: Vec<LocalOperator>,
    /// `Φ̃₀(0)`.
    pub phi0: CVec,
    pub states: Vec<FlowState>,
    pub gamma: f64,
    pub flow_budget: f64,
}

/// `Ṽ_Z` for each physical term, transformed one at a time.
pub fn per_term_operators(v: &InteractionSet, bdg: &BdgData, epsilon: f64) -> Result<Vec<LocalOperator>> {
    let mut out = Vec::with_capacity(v.terms.len());
    for term in &v.terms {
        let single = InteractionSet { n_sites: v.n_sites, terms: vec![term.clone()] };
        let tv = transform_to_eta(&single, bdg, epsilon)?;
        out.push(LocalOperator { label: site_label(&term.sites), sites: term.sites.clone(), op: tv.operator()?.dense() });
    }
    Ok(out)
}

pub fn site_label(sites: &[usize]) -> String {
    let inner: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

impl AssemblyContext {
    pub fn new(
        h0: CMat,
        h0_terms: Vec<LocalOperator>,
        v_terms: Vec<LocalOperator>,
        phi0: CVec,
        states: Vec<FlowState>,
        gamma: f64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("assembly needs at least one flow state".into()));
        }
        WeightFunction::new(gamma)?;
        Ok(Self { h0, h0_terms, v_terms, phi0, states, gamma, flow_budget: DEFAULT_FLOW_BUDGET })
    }

    /// Context from the doubled Hamiltonian and the per-term transformed interaction.
    pub fn from_doubled(dh: &DoubledHamiltonian, v_terms: Vec<LocalOperator>, states: Vec<FlowState>, gamma: f64) -> Result<Self> {
        let h0_terms = dh
            .local_terms
            .iter()
            .map(|t| LocalOperator { label: site_label(&t.sites), sites: t.sites.clone(), op: t.op.dense() })
            .collect();
        Self::new(dh.h0.dense(), h0_terms, v_terms, dh.ground_state(), states, gamma)
    }

    pub fn vt(&self) -> CMat {
        let n = self.h0.nrows();
        self.v_terms.iter().fold(CMat::zeros(n, n), |acc, t| acc + &t.op)
    }

    fn normal_order(&self, a: &CMat) -> CMat {
        let e = self.phi0.dotc(&(a * &self.phi0));
        let mut out = a.clone();
        for i in 0..out.nrows() {
            out[(i, i)] -= e;
        }
        out
    }

    fn check_state(&self, k: usize) -> Result<&FlowState> {
        let st = self.states.get(k).ok_or_else(|| Error::InvalidInput(format!("no flow state with index {k}")))?;
        if st.intertwining_residual > self.flow_budget {
            return Err(Error::RefuseToBuild(format!(
                "flow residual {:e} at s = {} exceeds budget {:e}",
                st.intertwining_residual, st.s, self.flow_budget
            )));
        }
        Ok(st)
    }

    /// Trapezoid weights on the flow grid up to index `k`.
    fn trapezoid(&self, k: usize) -> Vec<f64> {
        let mut w = vec![0.0; k + 1];
        for j in 0..k {
            let h = self.states[j + 1].s - self.states[j].s;
            w[j] += 0.5 * h;
            w[j + 1] += 0.5 * h;
        }
        w
    }

    /// `∫₀ˢ Ũ*(s′) i[X, D̃(s′)] Ũ(s′) ds′` by trapezoid.
    fn flow_integral(&self, x: &CMat, k: usize) -> CMat {
        let n = self.h0.nrows();
        let mut acc = CMat::zeros(n, n);
        for (j, w) in self.trapezoid(k).into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let st = &self.states[j];
            acc += st.conjugate(&(commutator(x, &st.d) * I)) * C64::from(w);
        }
        acc
    }

    fn filter(&self, st: &FlowState, a: &CMat) -> CMat {
        filter_in(&st.conjugated_spectrum(), a, self.gamma)
    }

    /// `W̃⁽¹⁾_Z(s) = s𝓡_s(:Ũ*Ṽ_ZŨ:)`.
    pub fn w1(&self, z: usize, k: usize) -> Result<EffectiveInteraction> {
        let st = self.check_state(k)?;
        let term = self.v_terms.get(z).ok_or_else(|| Error::InvalidInput(format!("no interaction term {z}")))?;
        let op = self.filter(st, &self.normal_order(&st.conjugate(&term.op))) * C64::from(st.s);
        Ok(self.finish(1, term, st.s, op))
    }

    /// `W̃⁽²⁾_Z(s) = 𝓡_s(:∫₀ˢ Ũ* i[𝓗̃_{0,Z}, D̃] Ũ:)`.
    pub fn w2(&self, z: usize, k: usize) -> Result<EffectiveInteraction> {
        let st = self.check_state(k)?;
        let term = self.h0_terms.get(z).ok_or_else(|| Error::InvalidInput(format!("no local term {z}")))?;
        let op = self.filter(st, &self.normal_order(&self.flow_integral(&term.op, k)));
        Ok(self.finish(2, term, st.s, op))
    }

    /// `W̃⁽³⁾_Z(s) = ∫dt w_γ(t) 𝓜_{t,Z}(s)`, via the kernel `g(ω) = (ŵ_γ(ω) − 1)/(iω)`.
    pub fn w3(&self, z: usize, k: usize) -> Result<EffectiveInteraction> {
        let st = self.check_state(k)?;
        let term = self.h0_terms.get(z).ok_or_else(|| Error::InvalidInput(format!("no local term {z}")))?;
        let integral = self.flow_integral(&self.h0, k);
        Ok(self.finish(3, term, st.s, self.w3_from(st, &integral, &term.op)))
    }

    fn w3_from(&self, st: &FlowState, integral: &CMat, h0z: &CMat) -> CMat {
        let uvu = st.conjugate(&self.vt());
        let l = commutator(&uvu, h0z) * (I * st.s) + commutator(integral, h0z) * I;
        w3_kernel(&st.conjugated_spectrum(), &l, self.gamma)
    }

    fn finish(&self, kind: u8, term: &LocalOperator, s: f64, op: CMat) -> EffectiveInteraction {
        let annihilation_residual = (&op * &self.phi0).norm();
        let norm = spectral_norm(&op);
        EffectiveInteraction {
            kind,
            label: term.label.clone(),
            sites: term.sites.clone(),
            s,
            operator: op,
            norm,
            annihilation_residual,
            localized_parts: None,
        }
    }

    /// All `W̃⁽ⁱ⁾_Z` at grid index `k`, kinds 1, 2, 3 in order.
    pub fn build_all(&self, k: usize) -> Result<Vec<EffectiveInteraction>> {
        let st = self.check_state(k)?;
        let integral = self.flow_integral(&self.h0, k);
        let mut out = Vec::new();
        for z in 0..self.v_terms.len() {
            out.push(self.w1(z, k)?);
        }
        for z in 0..self.h0_terms.len() {
            out.push(self.w2(z, k)?);
        }
        for term in &self.h0_terms {
            let op = self.w3_from(st, &integral, &term.op);
            out.push(self.finish(3, term, st.s, op));
        }
        Ok(out)
    }

    /// `‖Ũ*H̃_sŨ − (𝓗̃₀ + ΣW) − c‖` minimized over the scalar `c`.
    pub fn reconstruct(&self, k: usize, ws: &[EffectiveInteraction]) -> Result<Reconstruction> {
        let st = self.states.get(k).ok_or_else(|| Error::InvalidInput(format!("no flow state with index {k}")))?;
        if ws.iter().any(|w| (w.s - st.s).abs() > 1e-15) {
            return Err(Error::InvalidInput("effective interactions built at a different s".into()));
        }
        let mut diff = st.h_tilde() - &self.h0;
        for w in ws {
            diff -= &w.operator;
        }
        Ok(reconstruction_residual(&diff))
    }

    pub fn index_of(&self, s: f64) -> Option<usize> {
        self.states.iter().position(|st| (st.s - s).abs() < 1e-12)
    }
}

/// Exact spectral kernel of `∫dt w_γ(t)∫₀ᵗdt′ τ_{t′}(L)`.
pub fn w3_kernel(spectrum: &Spectrum, l: &CMat, gamma: f64) -> CMat {
    let w = WeightFunction { gamma };
    let mut m = spectrum.to_eigenbasis(l);
    let e = &spectrum.values;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let omega = e[i] - e[j];
            let g = if omega.abs() < 1e-14 { ZERO } else { C64::from(w.hat(omega) - 1.0) / (I * omega) };
            m[(i, j)] *= g;
        }
    }
    spectrum.from_eigenbasis(&m)
}

#[derive(Debug, Clone)]
pub struct EffectiveInteraction {
    pub kind: u8,
    pub label: String,
    pub sites: Vec<usize>,
    pub s: f64,
    pub operator: CMat,
    pub norm: f64,
    pub annihilation_residual: f64,
    /// `(n, W_{Z,n})` from the shell decomposition.
    pub localized_parts: Option<Vec<(usize, CMat)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub residual: f64,
    pub constant: f64,
}

/// Distance of a Hermitian matrix from the multiples of the identity.
pub fn reconstruction_residual(diff: &CMat) -> Reconstruction {
    let sym = (diff + diff.adjoint()) * C64::from(0.5);
    let values = hermitian_eigen(&sym).values;
    let (lo, hi) = (values[0], values[values.len() - 1]);
    let anti = spectral_norm(&(diff - &sym));
    Reconstruction { residual: 0.5 * (hi - lo) + anti, constant: 0.5 * (hi + lo) }
}

/// Least-squares line through `(s, ‖W(s)‖)` with a quadratic fit as a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScaling {
    pub s: Vec<f64>,
    pub norms: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// Intercept of `a + b s + c s²`.
    pub quadratic_intercept: f64,
}

pub fn norm_scaling(s: &[f64], norms: &[f64]) -> Result<NormScaling> {
    if s.len() < 3 || s.len() != norms.len() {
        return Err(Error::InsufficientData("norm scaling needs at least three couplings".into()));
    }
    let (intercept, slope, r_squared) = linear_regression(s, norms);
    let design = nalgebra::DMatrix::from_fn(s.len(), 3, |i, j| s[i].powi(j as i32));
    let rhs = nalgebra::DVector::from_column_slice(norms);
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Numerical(format!("quadratic fit failed: {e}")))?;
    Ok(NormScaling { s: s.to_vec(), norms: norms.to_vec(), intercept, slope, r_squared, quadratic_intercept: coef[0] })
}

/// Outcome of the relative bound `W² ≤ b²H₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBound {
    pub b: f64,
    /// `min eig(b²H₀² − W²)`.
    pub min_eigenvalue: f64,
}

/// `b = ‖W H₀⁺‖`; requires `WΦ₀ = 0` for the kernel vector of `H₀`.
pub fn relative_bound_b(w: &CMat, h0: &CMat) -> Result<RelativeBound> {
    let sp = hermitian_eigen(h0);
    for (k, &lam) in sp.values.iter().enumerate() {
        if lam.abs() <= 1e-10 {
            let r = (w * sp.vectors.column(k)).norm();
            if r > 1e-8 {
                return Err(Error::UnboundedRelative(format!("W does not annihilate the kernel of H0 (residual {r:e}); b = inf")));
            }
        }
    }
    let pinv = hermitian_pinv(h0, 1e-10);
    let b = crate::linalg::spectral_norm(&(w * pinv));
    let h2 = h0 * h0;
    let w2 = w.adjoint() * w;
    let min_eigenvalue = hermitian_eigen(&(h2 * C64::from(b * b) - w2)).values[0];
    Ok(RelativeBound { b, min_eigenvalue })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GapBound {
    Valid(f64),
    /// `b/√(1−2b) > ½`: the proposition's condition fails.
    ConditionViolated { ratio: f64 },
}

impl GapBound {
    pub fn value(self) -> Option<f64> {
        match self {
            GapBound::Valid(v) => Some(v),
            GapBound::ConditionViolated { .. } => None,
        }
    }
}

/// `[1 − b/√(1−2b)] ΔE`.
pub fn gap_lower_bound(b: f64, delta_e: f64) -> Result<GapBound> {
    if !(0.0..0.5).contains(&b) {
        return Err(Error::Domain(format!("b must lie in [0, 1/2), got {b}")));
    }
    let ratio = b / (1.0 - 2.0 * b).sqrt();
    if ratio > 0.5 + 1e-15 {
        return Ok(GapBound::ConditionViolated { ratio });
    }
    Ok(GapBound::Valid((1.0 - ratio) * delta_e))
}

/// Threshold `b* = (√5 − 1)/4` where `b/√(1−2b) = ½`.
pub fn critical_b() -> f64 {
    (5f64.sqrt() - 1.0) / 4.0
}

/// First excitation energy of `H` above the eigenvector `phi0` (which must be an eigenvector).
pub fn first_excitation(h: &CMat, phi0: &CVec) -> f64 {
    let shift = 10.0 * (1.0 + spectral_norm(h));
    let p = phi0 * phi0.adjoint() * C64::from(shift);
    hermitian_eigen(&(h + p)).values[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropositionCheck {
    pub b: f64,
    pub delta_e: f64,
    pub measured_e1: f64,
    pub ground_energy: f64,
    pub bound: Option<f64>,
    pub holds: bool,
}

/// Compare the measured `Ẽ₁` of `H₀ + W` with the relative-bound prediction.
pub fn proposition_check(h0: &CMat, w: &CMat, phi0: &CVec) -> Result<PropositionCheck> {
    let delta_e = first_excitation(h0, phi0);
    let rb = relative_bound_b(w, h0)?;
    let h = h0 + w;
    let ground_energy = hermitian_eigen(&h).values[0];
    let measured_e1 = first_excitation(&h, phi0);
    let bound = if rb.b < 0.5 { gap_lower_bound(rb.b, delta_e)?.value() } else { None };
    let holds = match bound {
        Some(v) => measured_e1 >= v - 1e-9 && ground_energy >= -1e-9,
        None => true,
    };
    Ok(PropositionCheck { b: rb.b, delta_e, measured_e1, ground_energy, bound, holds })
}

/// `1 − Π_{x∈X} q̄_x` against `Σ_n Q_{n−1} q_{x_n}`; `X` in the given order.
pub fn decomposition_identity(space: &FockSpace, x: &[usize]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidInput("decomposition needs a nonempty mode set".into()));
    }
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    let mut p0x = id.clone();
    for &m in x {
        p0x *= hole(space, m)?.dense();
    }
    let lhs = &id - p0x;
    let mut rhs = CMat::zeros(dim, dim);
    let mut q_prev = id.clone();
    for &m in x {
        rhs += &q_prev * number(space, m)?.dense();
        q_prev *= hole(space, m)?.dense();
    }
    Ok(spectral_norm(&(lhs - rhs)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub g_tilde: f64,
    /// Largest `⟨Ψ,W²Ψ⟩ / ((g̃/ΔE)² ⟨Ψ,H₀²Ψ⟩)` over trial vectors.
    pub worst_ratio: f64,
}

/// `g̃ = max_x Σ_{X∋x} |X| ‖W_X‖` and the bound `W² ≤ (g̃/ΔE)² H₀²` on trial vectors.
pub fn g_norm_and_lemma(
    space: &FockSpace,
    terms: &[(ModeSet, CMat)],
    h0: &CMat,
    delta_e: f64,
    trials: &[CVec],
) -> Result<LemmaCheck> {
    let n = space.n_modes();
    let dim = space.dim();
    let mut per_mode = vec![0.0; n];
    let mut w = CMat::zeros(dim, dim);
    for (x, wx) in terms {
        let mut p0x = CMat::identity(dim, dim);
        for m in x.iter() {
            p0x *= hole(space, m)?.dense();
        }
        let r = spectral_norm(&(wx * p0x));
        if r > 1e-10 {
            return Err(Error::Precondition(format!("W_X P_0X = 0 fails for X = {x} (residual {r:e})")));
        }
        let norm = spectral_norm(wx);
        for m in x.iter() {
            per_mode[m] += x.len() as f64 * norm;
        }
        w += wx;
    }
    let g_tilde = per_mode.iter().cloned().fold(0.0, f64::max);
    let factor = (g_tilde / delta_e).powi(2);
    let mut worst_ratio: f64 = 0.0;
    for psi in trials {
        let lhs = (&w * psi).norm_squared();
        let rhs = factor * (h0 * psi).norm_squared();
        if lhs <= 1e-300 {
            continue;
        }
        worst_ratio = worst_ratio.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
    }
    Ok(LemmaCheck { g_tilde, worst_ratio })
}

/// Largest `⟨Ψ,(ΣW⁽ⁱ⁾)²Ψ⟩ / (3 Σ⟨Ψ,(W⁽ⁱ⁾)²Ψ⟩)` over trial vectors.
pub fn cross_term_ratio(parts: &[CMat], trials: &[CVec]) -> f64 {
    let mut worst: f64 = 0.0;
    for psi in trials {
        let mut sum = CVec::zeros(psi.len());
        let mut sep = 0.0;
        for p in parts {
            let v = p * psi;
            sep += v.norm_squared();
            sum += v;
        }
        if sep > 0.0 {
            worst = worst.max(sum.norm_squared() / (parts.len() as f64 * sep));
        }
    }
    worst
}

/// Gap data of `H₀ + sV` along a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub s: Vec<f64>,
    pub e0: Vec<f64>,
    pub e1: Vec<f64>,
    pub gap: Vec<f64>,
    pub nondegenerate: Vec<bool>,
    /// Weyl bound `2‖V‖`.
    pub lipschitz: f64,
    pub max_slope: f64,
    /// Largest grid `s` with `gap ≥ gap(0)/2` on `[0, s]`.
    pub s_dagger: f64,
    pub continuous: bool,
}

pub fn gap_curve(h0: &CMat, v: &CMat, s_grid: &[f64], degeneracy_tol: f64) -> Result<GapCurve> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty coupling grid".into()));
    }
    let dim = h0.nrows();
    let mut e0 = Vec::new();
    let mut e1 = Vec::new();
    for &s in s_grid {
        let h = h0 + v * C64::from(s);
        let (a, b) = if dim <= crate::fock::DENSE_LIMIT {
            let values = hermitian_eigen(&h).values;
            (values[0], *values.get(1).unwrap_or(&f64::INFINITY))
        } else {
            let vals = lanczos_lowest(dim, 2, |x| &h * x, 1e-10).map_err(|e| Error::Numerical(format!("s = {s}: {e}")))?;
            (vals[0], vals[1])
        };
        if !a.is_finite() {
            return Err(Error::Numerical(format!("eigensolve failed at s = {s}")));
        }
        e0.push(a);
        e1.push(b);
    }
    let gap: Vec<f64> = e0.iter().zip(&e1).map(|(a, b)| b - a).collect();
    let nondegenerate = gap.iter().map(|&g| g > degeneracy_tol).collect();
    let lipschitz = 2.0 * spectral_norm(v);
    let mut max_slope: f64 = 0.0;
    let mut continuous = true;
    for k in 1..s_grid.len() {
        let ds = (s_grid[k] - s_grid[k - 1]).abs();
        let jump = (gap[k] - gap[k - 1]).abs();
        if ds > 0.0 {
            max_slope = max_slope.max(jump / ds);
        }
        if jump > lipschitz * ds + 1e-12 {
            continuous = false;
        }
    }
    let mut s_dagger = 0.0;
    for (k, &s) in s_grid.iter().enumerate() {
        if gap[k] >= 0.5 * gap[0] {
            s_dagger = s.abs();
        } else {
            break;
        }
    }
    Ok(GapCurve { s: s_grid.to_vec(), e0, e1, gap, nondegenerate, lipschitz, max_slope, s_dagger, continuous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn gap_bound_values() {
        assert_eq!(gap_lower_bound(0.0, 1.0).unwrap(), GapBound::Valid(1.0));
        let v = gap_lower_bound(0.1, 1.0).unwrap().value().unwrap();
        assert!((v - (1.0 - 0.1 / 0.8f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.888197).abs() < 1e-6);
        let bs = critical_b();
        assert!((gap_lower_bound(bs, 2.0).unwrap().value().unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(gap_lower_bound(0.4, 1.0).unwrap(), GapBound::ConditionViolated { .. }));
        assert!(gap_lower_bound(0.5, 1.0).is_err());
    }

    #[test]
    fn relative_bound_simple_cases() {
        let h0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE * 0.0, ONE, ONE * 2.0, ONE * 3.0]));
        assert_eq!(relative_bound_b(&CMat::zeros(4, 4), &h0).unwrap().b, 0.0);
        let half = relative_bound_b(&(&h0 * C64::from(0.5)), &h0).unwrap();
        assert!((half.b - 0.5).abs() < 1e-12 && half.min_eigenvalue > -1e-9);
        let mut bad = CMat::zeros(4, 4);
        bad[(0, 0)] = ONE;
        assert!(matches!(relative_bound_b(&bad, &h0), Err(Error::UnboundedRelative(_))));
    }

    #[test]
    fn decomposition_small() {
        let space = FockSpace::sites(3).unwrap();
        assert!(decomposition_identity(&space, &[1]).unwrap() < 1e-15);
        assert!(decomposition_identity(&space, &[0, 2]).unwrap() < 1e-15);
        assert!(decomposition_identity(&space, &[2, 0, 1]).unwrap() < 1e-13);
    }

    #[test]
    fn gap_curve_symmetry() {
        let h0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE * 0.0, ONE, ONE * 2.0]));
        let v = CMat::from_fn(3, 3, |i, j| C64::from(0.1 * (i + j) as f64));
        let plus = gap_curve(&h0, &v, &[0.0, 0.1, 0.2], 1e-8).unwrap();
        let minus = gap_curve(&h0, &(-&v), &[0.0, -0.1, -0.2], 1e-8).unwrap();
        assert_eq!(plus.gap, minus.gap);
        let flat = gap_curve(&h0, &CMat::zeros(3, 3), &[0.0, 0.5, 1.0], 1e-8).unwrap();
        assert!(flat.gap.iter().all(|&g| g == 1.0));
        assert_eq!(flat.s_dagger, 1.0);
    }
}
