//! Ground-state flow `H̃_s = 𝓗̃₀ + sṼ`, the parallel-transport unitary `Ũ(s)` and the filter `𝓡_s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, composite_gauss_legendre, hermitian_eigen, polar_unitarize, spectral_norm, unitarity_defect, CMat,
    Spectrum, C64, I, ZERO,
};

/// Default gap below which the ground state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `ŵ_γ(ω) = exp(1 − 1/(1 − (ω/γ)²))` for `|ω| < γ`, else 0.
pub fn w_hat(omega: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    Ok(bump(omega, gamma))
}

fn bump(omega: f64, gamma: f64) -> f64 {
    let x = omega / gamma;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub gamma: f64,
}

impl WeightFunction {
    pub fn new(gamma: f64) -> Result<Self> {
        w_hat(0.0, gamma)?;
        Ok(Self { gamma })
    }

    pub fn hat(&self, omega: f64) -> f64 {
        bump(omega, self.gamma)
    }

    /// Time-domain weight by Fourier inversion, `w(t) = (1/π) ∫₀^γ ŵ(ω) cos(ωt) dω`.
    pub fn time_domain(&self) -> TimeWeight {
        let (nodes, weights) = composite_gauss_legendre(0.0, self.gamma, 64, 16);
        let values = nodes.iter().map(|&w| self.hat(w) / std::f64::consts::PI).collect();
        TimeWeight { nodes, weights: values, quad: weights }
    }
}

/// Precomputed inverse-Fourier quadrature for `w_γ(t)`.
#[derive(Debug, Clone)]
pub struct TimeWeight {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    quad: Vec<f64>,
}

impl TimeWeight {
    pub fn eval(&self, t: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).zip(&self.quad).map(|((w, f), q)| q * f * (w * t).cos()).sum()
    }
}

/// Eigendata at one coupling plus the accumulated flow unitary.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub s: f64,
    /// Eigendata of `H̃_s`.
    pub spectrum: Spectrum,
    pub e0: f64,
    pub gap: f64,
    /// `Ũ(s)`.
    pub u: CMat,
    /// `D̃(s)`.
    pub d: CMat,
    /// `‖Ũ†P̃₀(s)Ũ − P̃₀(0)‖`.
    pub intertwining_residual: f64,
    pub unitarity_defect: f64,
}

impl FlowState {
    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// `P̃₀(s)`.
    pub fn ground_projector(&self) -> CMat {
        let v = self.spectrum.vectors.column(0);
        &v * v.adjoint()
    }

    /// Eigendata of `H̃(s) = Ũ*H̃_sŨ`: same eigenvalues, vectors `Ũ*v`.
    pub fn conjugated_spectrum(&self) -> Spectrum {
        Spectrum { values: self.spectrum.values.clone(), vectors: self.u.adjoint() * &self.spectrum.vectors }
    }

    /// `H̃(s) = Ũ*H̃_sŨ`.
    pub fn h_tilde(&self) -> CMat {
        let sp = self.conjugated_spectrum();
        sp.apply_fn(|l| l)
    }

    /// `Ũ* A Ũ`.
    pub fn conjugate(&self, a: &CMat) -> CMat {
        self.u.adjoint() * a * &self.u
    }
}

/// `(𝓡 A)_{mn} = ŵ_γ(E_m − E_n) A_{mn}` in the given eigenbasis.
pub fn filter_in(spectrum: &Spectrum, a: &CMat, gamma: f64) -> CMat {
    let mut m = spectrum.to_eigenbasis(a);
    let e = &spectrum.values;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= bump(e[i] - e[j], gamma);
        }
    }
    spectrum.from_eigenbasis(&m)
}

/// `𝓡_s(A)` in the eigenbasis of `H̃(s)`.
pub fn apply_filter(state: &FlowState, a: &CMat, gamma: f64) -> CMat {
    filter_in(&state.conjugated_spectrum(), a, gamma)
}

/// Smallest nonzero gap between distinct filter frequencies near `γ`; large values mean a well-conditioned filter.
pub fn filter_condition(state: &FlowState, gamma: f64) -> f64 {
    let e = &state.spectrum.values;
    let mut worst = f64::INFINITY;
    for a in e {
        for b in e {
            worst = worst.min(((a - b).abs() - gamma).abs());
        }
    }
    worst
}

/// Eigendata of `H0 + sV` and `D(s) = i[P₀, P₀′]`.
pub fn kato_generator(h0: &CMat, vt: &CMat, s: f64) -> Result<(Spectrum, CMat)> {
    kato_generator_tol(h0, vt, s, DEGENERACY_TOL)
}

pub fn kato_generator_tol(h0: &CMat, vt: &CMat, s: f64, gap_tol: f64) -> Result<(Spectrum, CMat)> {
    let h = h0 + vt * C64::from(s);
    let sp = hermitian_eigen(&h);
    let n = sp.dim();
    if n < 2 {
        return Ok((sp, CMat::zeros(n, n)));
    }
    let gap = sp.values[1] - sp.values[0];
    if gap < gap_tol {
        return Err(Error::DegenerateFlow { s, gap });
    }
    let v0 = sp.vectors.column(0).into_owned();
    let vv0 = vt * &v0;
    let mut d0 = crate::linalg::CVec::zeros(n);
    for k in 1..n {
        let vk = sp.vectors.column(k);
        let amp = vk.dotc(&vv0) / C64::from(sp.values[0] - sp.values[k]);
        d0 += vk * amp;
    }
    let p = &v0 * v0.adjoint();
    let pp = &d0 * v0.adjoint() + &v0 * d0.adjoint();
    let d = commutator(&p, &pp) * I;
    Ok((sp, d))
}

/// Flow integrated on `s_grid` (ascending, starting at 0) with `substeps` RK4 steps per interval.
pub fn integrate_flow(h0: &CMat, vt: &CMat, s_grid: &[f64], substeps: usize) -> Result<Vec<FlowState>> {
    integrate_flow_tol(h0, vt, s_grid, substeps, DEGENERACY_TOL)
}

pub fn integrate_flow_tol(h0: &CMat, vt: &CMat, s_grid: &[f64], substeps: usize, gap_tol: f64) -> Result<Vec<FlowState>> {
    if s_grid.is_empty() || s_grid[0] != 0.0 {
        return Err(Error::InvalidInput("flow grid must start at s = 0".into()));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("flow grid must be strictly ascending".into()));
    }
    if substeps == 0 {
        return Err(Error::InvalidInput("rk4 substeps must be positive".into()));
    }
    let n = h0.nrows();
    let abort = |e: Error, last: f64| match e {
        Error::DegenerateFlow { s, gap } => Error::FlowAborted { s, gap, last_good_s: last },
        other => other,
    };
    let (sp0, d0) = kato_generator_tol(h0, vt, 0.0, gap_tol).map_err(|e| abort(e, 0.0))?;
    let p_initial = {
        let v = sp0.vectors.column(0);
        &v * v.adjoint()
    };
    let mut u = CMat::identity(n, n);
    let mut states = vec![make_state(0.0, sp0, d0, u.clone(), &p_initial)];
    for w in s_grid.windows(2) {
        let last_good = w[0];
        let h = (w[1] - w[0]) / substeps as f64;
        let mut s = w[0];
        let mut d_start = states.last().map(|st| st.d.clone()).unwrap_or_else(|| CMat::zeros(n, n));
        let mut end = None;
        for k in 0..substeps {
            let s_mid = s + 0.5 * h;
            let s_end = if k + 1 == substeps { w[1] } else { s + h };
            let (_, d_mid) = kato_generator_tol(h0, vt, s_mid, gap_tol).map_err(|e| abort(e, last_good))?;
            let (sp_end, d_end) = kato_generator_tol(h0, vt, s_end, gap_tol).map_err(|e| abort(e, last_good))?;
            let f = |d: &CMat, x: &CMat| (d * x) * I;
            let k1 = f(&d_start, &u);
            let k2 = f(&d_mid, &(&u + &k1 * C64::from(0.5 * h)));
            let k3 = f(&d_mid, &(&u + &k2 * C64::from(0.5 * h)));
            let k4 = f(&d_end, &(&u + &k3 * C64::from(h)));
            u = polar_unitarize(&(&u + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0)));
            s = s_end;
            d_start = d_end.clone();
            end = Some((sp_end, d_end));
        }
        let (sp, d) = end.expect("substeps > 0");
        states.push(make_state(w[1], sp, d, u.clone(), &p_initial));
    }
    Ok(states)
}

fn make_state(s: f64, spectrum: Spectrum, d: CMat, u: CMat, p_initial: &CMat) -> FlowState {
    let e0 = spectrum.values[0];
    let gap = if spectrum.dim() > 1 { spectrum.values[1] - e0 } else { f64::INFINITY };
    let v = spectrum.vectors.column(0);
    let p = &v * v.adjoint();
    let intertwining_residual = spectral_norm(&(u.adjoint() * p * &u - p_initial));
    let unitarity_defect = unitarity_defect(&u);
    FlowState { s, spectrum, e0, gap, u, d, intertwining_residual, unitarity_defect }
}

/// Uniform grid `{0, s_max/steps, …, s_max}`.
pub fn uniform_grid(s_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| s_max * k as f64 / steps as f64).collect()
}

/// Filter gamma from the grid: `factor × min γ(s)`.
pub fn default_gamma(states: &[FlowState], factor: f64) -> f64 {
    factor * states.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min)
}

/// `‖[Ũ†H̃_sŨ, P̃₀(0)]‖`.
pub fn conjugated_commutator(state: &FlowState, p_initial: &CMat) -> f64 {
    spectral_norm(&commutator(&state.h_tilde(), p_initial))
}

/// `‖∫_{−T}^{T} w_γ(t) τ̃_{s,t}(A) dt − 𝓡_s(A)‖` with Gauss-Legendre in `t`.
///
/// `panels` panels of `order` nodes cover `[0, T]`; the integrand is even in `t` up to conjugation of the phase,
/// so `∫_{−T}^{T} w(t) e^{iΔt} dt = 2∫₀^T w(t) cos(Δt) dt`.
pub fn quasi_adiabatic_check(state: &FlowState, a: &CMat, gamma: f64, horizon: f64, panels: usize, order: usize) -> Result<f64> {
    if !(horizon > 0.0) || panels == 0 || order == 0 {
        return Err(Error::InvalidInput("horizon, panels and order must be positive".into()));
    }
    let weight = WeightFunction::new(gamma)?.time_domain();
    let (ts, ws) = composite_gauss_legendre(0.0, horizon, panels, order);
    let wt: Vec<f64> = ts.iter().map(|&t| weight.eval(t)).collect();
    let sp = state.conjugated_spectrum();
    let e = &sp.values;
    let mut m = sp.to_eigenbasis(a);
    let exact = filter_in(&sp, a, gamma);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] == ZERO {
                continue;
            }
            let delta = e[i] - e[j];
            let k: f64 = ts.iter().zip(&ws).zip(&wt).map(|((t, q), w)| 2.0 * q * w * (delta * t).cos()).sum();
            m[(i, j)] *= k;
        }
    }
    Ok(spectral_norm(&(sp.from_eigenbasis(&m) - exact)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn two_level() -> (CMat, CMat) {
        let h0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE * 0.0, ONE, ONE * 1.5]));
        let v = CMat::from_row_slice(
            3,
            3,
            &[ONE * 0.2, C64::new(0.3, 0.1), ONE * 0.1, C64::new(0.3, -0.1), ONE * -0.4, ONE * 0.2, ONE * 0.1, ONE * 0.2, ONE * 0.3],
        );
        (h0, v)
    }

    #[test]
    fn weight_values() {
        assert_eq!(w_hat(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(w_hat(1.0, 1.0).unwrap(), 0.0);
        assert!((w_hat(0.5, 1.0).unwrap() - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(w_hat(0.1, 0.0).is_err());
    }

    #[test]
    fn kato_matches_finite_difference() {
        let (h0, v) = two_level();
        let s = 0.3;
        let (_, d) = kato_generator(&h0, &v, s).unwrap();
        assert!(crate::linalg::hermiticity_defect(&d) < 1e-12);
        let ds = 1e-4;
        let proj = |s: f64| {
            let sp = hermitian_eigen(&(&h0 + &v * C64::from(s)));
            let c = sp.vectors.column(0);
            &c * c.adjoint()
        };
        let fd = (proj(s + ds) - proj(s - ds)) / C64::from(2.0 * ds);
        let p = proj(s);
        let pred = commutator(&d, &p) * I;
        assert!(spectral_norm(&(fd - pred)) < 1e-6);
    }

    #[test]
    fn flow_intertwines() {
        let (h0, v) = two_level();
        let states = integrate_flow(&h0, &v, &uniform_grid(0.2, 20), 1).unwrap();
        for st in &states {
            assert!(st.intertwining_residual < 1e-7, "{}", st.intertwining_residual);
            assert!(st.unitarity_defect < 1e-12);
        }
        let single = integrate_flow(&h0, &v, &[0.0], 1).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].intertwining_residual < 1e-15);
    }

    #[test]
    fn filter_identities() {
        let (h0, v) = two_level();
        let states = integrate_flow(&h0, &v, &uniform_grid(0.1, 10), 2).unwrap();
        let st = states.last().unwrap();
        let gamma = 0.9 * st.gap;
        let id = CMat::identity(3, 3);
        assert!(spectral_norm(&(apply_filter(st, &id, gamma) - &id)) < 1e-12);
        let ht = st.h_tilde();
        assert!(spectral_norm(&(apply_filter(st, &ht, gamma) - &ht)) < 1e-12);
    }

    #[test]
    fn quadrature_tail_shrinks() {
        let h0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE * 0.0, ONE]));
        let v = CMat::zeros(2, 2);
        let states = integrate_flow(&h0, &v, &[0.0], 1).unwrap();
        let a = CMat::from_element(2, 2, ONE);
        let r1 = quasi_adiabatic_check(&states[0], &a, 0.9, 20.0, 40, 16).unwrap();
        let r2 = quasi_adiabatic_check(&states[0], &a, 0.9, 40.0, 80, 16).unwrap();
        assert!(r2 <= 0.5 * r1, "{r1} {r2}");
    }
}
