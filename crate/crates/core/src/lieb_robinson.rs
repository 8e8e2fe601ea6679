//! Commutator growth under `τ_t(A) = e^{itH} A e^{−itH}` and the sub-exponential reference envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, linear_regression, spectral_norm, CMat, Spectrum, I};

/// Default crossing threshold as a fraction of `2‖A‖‖B‖`.
pub const DEFAULT_THETA: f64 = 0.1;

/// Heisenberg evolution through the eigenbasis of `H`.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub spectrum: Spectrum,
}

impl Evolution {
    pub fn new(h: &CMat) -> Self {
        Self { spectrum: hermitian_eigen(h) }
    }

    /// `τ_t(A)`, with matrix elements `e^{i(E_m − E_n)t} A_{mn}` in the eigenbasis.
    pub fn tau(&self, a: &CMat, t: f64) -> CMat {
        let mut m = self.spectrum.to_eigenbasis(a);
        let e = &self.spectrum.values;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                m[(i, j)] *= (I * ((e[i] - e[j]) * t)).exp();
            }
        }
        self.spectrum.from_eigenbasis(&m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LRProfile {
    pub distance: usize,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Declared supports intersect; the profile is still computed.
    pub overlapping: bool,
    /// `2‖A‖‖B‖`.
    pub trivial_bound: f64,
}

/// `‖[τ_t(A), B]‖` on `t_grid`.
pub fn commutator_profile(
    evolution: &Evolution,
    a: &CMat,
    b: &CMat,
    t_grid: &[f64],
    distance: usize,
    overlapping: bool,
) -> LRProfile {
    let norms = t_grid
        .iter()
        .map(|&t| {
            let at = evolution.tau(a, t);
            spectral_norm(&(&at * b - b * &at))
        })
        .collect();
    let trivial_bound = 2.0 * spectral_norm(a) * spectral_norm(b);
    LRProfile { distance, times: t_grid.to_vec(), norms, overlapping, trivial_bound }
}

impl LRProfile {
    /// First time the norm exceeds `level`, linearly interpolated.
    pub fn first_passage(&self, level: f64) -> Option<f64> {
        for k in 0..self.norms.len() {
            if self.norms[k] > level {
                if k == 0 {
                    return Some(self.times[0]);
                }
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                let (n0, n1) = (self.norms[k - 1], self.norms[k]);
                return Some(t0 + (level - n0) / (n1 - n0) * (t1 - t0));
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub theta: f64,
    /// `(r, t*(r))` for profiles that crossed the threshold.
    pub arrivals: Vec<(usize, f64)>,
    pub v_lr: f64,
    pub r_squared: f64,
    /// Arrival times are nondecreasing in `r`.
    pub monotone: bool,
}

/// `v_LR` as the slope of `r` against first-passage time at `θ·2‖A‖‖B‖`.
pub fn fit_velocity(profiles: &[LRProfile], theta: f64) -> Result<VelocityFit> {
    if profiles.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 distances, got {}", profiles.len())));
    }
    let mut arrivals: Vec<(usize, f64)> = profiles
        .iter()
        .filter_map(|p| p.first_passage(theta * p.trivial_bound).map(|t| (p.distance, t)))
        .collect();
    arrivals.sort_by_key(|a| a.0);
    if arrivals.len() < 2 {
        return Err(Error::InsufficientSignal(format!("only {} profiles crossed θ = {theta}", arrivals.len())));
    }
    let monotone = arrivals.windows(2).all(|w| w[1].1 >= w[0].1);
    let t: Vec<f64> = arrivals.iter().map(|a| a.1).collect();
    let r: Vec<f64> = arrivals.iter().map(|a| a.0 as f64).collect();
    let (_, v_lr, r_squared) = linear_regression(&t, &r);
    Ok(VelocityFit { theta, arrivals, v_lr, r_squared, monotone })
}

/// `u_μ(x) = exp(−μx/(ln x)²)`.
pub fn u_mu(mu: f64, x: f64) -> f64 {
    (-mu * x / x.ln().powi(2)).exp()
}

/// `(ũ_μ(r/r₀), F_{μ,r₀}(r))` with the plateau `ũ_μ(x) = u_μ(e²)` for `x ≤ e²`.
pub fn reference_decay(mu: f64, r0: f64, r: f64, spatial_dim: usize) -> Result<(f64, f64)> {
    if !(r >= 0.0) || !(r0 > 0.0) || !(mu >= 0.0) {
        return Err(Error::InvalidInput(format!("need r ≥ 0, r0 > 0, μ ≥ 0 (got r = {r}, r0 = {r0}, μ = {mu})")));
    }
    let x = r / r0;
    let e2 = std::f64::consts::E.powi(2);
    let u = if x <= e2 { u_mu(mu, e2) } else { u_mu(mu, x) };
    let f = u / (1.0 + x).powi(spatial_dim as i32 + 1);
    Ok((u, f))
}

/// `max_t ‖τ_t(A)‖ − ‖A‖` and `max ‖τ_{t+s}(A) − τ_t(τ_s(A))‖` over the grid.
pub fn evolution_checks(evolution: &Evolution, a: &CMat, t_grid: &[f64]) -> (f64, f64) {
    let base = spectral_norm(a);
    let mut iso: f64 = 0.0;
    let mut group: f64 = 0.0;
    for &t in t_grid {
        let at = evolution.tau(a, t);
        iso = iso.max((spectral_norm(&at) - base).abs());
        for &s in t_grid.iter().take(3) {
            let lhs = evolution.tau(a, t + s);
            let rhs = evolution.tau(&evolution.tau(a, s), t);
            group = group.max(spectral_norm(&(lhs - rhs)));
        }
    }
    (iso, group)
}

/// Uniform time grid `{0, dt, …, t_max}`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let mu = 0.5;
        let (u, _) = reference_decay(mu, 1.0, 0.0, 1).unwrap();
        assert!((u - (-mu * std::f64::consts::E.powi(2) / 4.0).exp()).abs() < 1e-15);
        let (u0, f0) = reference_decay(0.0, 2.0, 3.0, 1).unwrap();
        assert_eq!(u0, 1.0);
        assert!((f0 - 1.0 / 2.5f64.powi(2)).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for k in 0..400 {
            let (_, f) = reference_decay(0.7, 1.0, 0.25 * k as f64, 2).unwrap();
            assert!(f <= last + 1e-15);
            last = f;
        }
    }
}
