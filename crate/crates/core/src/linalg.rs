//! Dense and matrix-free linear-algebra helpers shared by the pipeline.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigendata of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ f(λ_k) v_k v_k†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(lam));
        }
        &scaled * self.vectors.adjoint()
    }

    /// Matrix elements `V† A V` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMat) -> CMat {
        self.vectors.adjoint() * a * &self.vectors
    }

    pub fn from_eigenbasis(&self, a: &CMat) -> CMat {
        &self.vectors * a * self.vectors.adjoint()
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Full eigendecomposition of a Hermitian matrix (the anti-Hermitian part is discarded).
pub fn hermitian_eigen(m: &CMat) -> Spectrum {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Spectrum { values, vectors }
}

/// Eigendecomposition of a real symmetric matrix, ascending.
pub fn real_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let h = (m + m.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn max_abs_eigenvalue(h: &CMat) -> f64 {
    h.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let scale = 1e-14 * (1.0 + max_abs(m));
    if hermiticity_defect(m) <= scale {
        return max_abs_eigenvalue(&hermitian_part(m));
    }
    let im = m * I;
    if hermiticity_defect(&im) <= scale {
        return max_abs_eigenvalue(&hermitian_part(&im));
    }
    let gram = hermitian_part(&(m.adjoint() * m));
    max_abs_eigenvalue(&gram).max(0.0).sqrt()
}

/// Largest singular value by power iteration on `A†A`, given matrix-vector products.
pub fn power_norm(
    dim: usize,
    apply: impl Fn(&CVec) -> CVec,
    apply_adjoint: impl Fn(&CVec) -> CVec,
    rel_tol: f64,
    max_iter: usize,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = CVec::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    x /= C64::from(x.norm());
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let y = apply(&x);
        let est = y.norm();
        let z = apply_adjoint(&y);
        let zn = z.norm();
        if zn == 0.0 {
            return 0.0;
        }
        x = z / C64::from(zn);
        if (est - prev).abs() <= rel_tol * est.max(f64::MIN_POSITIVE) {
            return est;
        }
        prev = est;
    }
    prev
}

/// Lowest `k` eigenvalues of a Hermitian operator by Lanczos with full reorthogonalisation.
pub fn lanczos_lowest(dim: usize, k: usize, apply: impl Fn(&CVec) -> CVec, tol: f64) -> Result<Vec<f64>> {
    if dim == 0 || k == 0 {
        return Ok(Vec::new());
    }
    let k = k.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c);
    let mut krylov = (4 * k + 40).min(dim);
    loop {
        let mut basis: Vec<CVec> = Vec::with_capacity(krylov);
        let mut alpha = Vec::with_capacity(krylov);
        let mut beta: Vec<f64> = Vec::with_capacity(krylov);
        let mut v = CVec::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        v /= C64::from(v.norm());
        for j in 0..krylov {
            basis.push(v.clone());
            let mut w = apply(&v);
            let a = basis[j].dotc(&w).re;
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&w);
                    w.axpy(-proj, b, ONE);
                }
            }
            let bn = w.norm();
            if j + 1 == krylov || bn < 1e-13 {
                beta.push(bn);
                break;
            }
            beta.push(bn);
            v = w / C64::from(bn);
        }
        let m = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alpha[i];
            if i + 1 < m {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let (vals, vecs) = real_symmetric_eigen(&tri);
        let last_beta = beta[m - 1];
        let converged = (0..k.min(m)).all(|i| (last_beta * vecs[(m - 1, i)]).abs() <= tol * (1.0 + vals[i].abs()));
        if (converged && m >= k) || m == dim || krylov == dim {
            if m < k {
                return Err(Error::Numerical(format!(
                    "Lanczos found an invariant subspace of size {m} < {k}"
                )));
            }
            return Ok(vals[..k].to_vec());
        }
        krylov = (2 * krylov).min(dim);
    }
}

/// Moore-Penrose pseudoinverse of a Hermitian matrix with eigenvalue cutoff.
pub fn hermitian_pinv(m: &CMat, cutoff: f64) -> CMat {
    hermitian_eigen(m).apply_fn(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 })
}

/// Closest unitary `U (U†U)^{-1/2}`.
pub fn polar_unitarize(u: &CMat) -> CMat {
    let g = u.adjoint() * u;
    let inv_sqrt = hermitian_eigen(&g).apply_fn(|l| 1.0 / l.sqrt());
    u * inv_sqrt
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    spectral_norm(&(u.adjoint() * u - CMat::identity(u.nrows(), u.ncols())))
}

/// Least-squares line `y = a + b x`; returns `(a, b, r^2)`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 && sxx > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (intercept, slope, r2)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` panels of `order` nodes.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, -2.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)]);
        let s = hermitian_eigen(&m);
        let r = 5f64.sqrt();
        assert!((s.values[0] + r).abs() < 1e-12 && (s.values[1] - r).abs() < 1e-12);
        assert!(max_abs(&(s.apply_fn(|l| l) - &m)) < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((integral - 2.0 / 13.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CMat::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = hermitian_part(&a);
        let dense = hermitian_eigen(&h).values;
        let lz = lanczos_lowest(n, 3, |v| &h * v, 1e-12).unwrap();
        for i in 0..3 {
            assert!((dense[i] - lz[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn power_norm_matches_svd() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = CMat::from_fn(n, n, |_, _| C64::new(rng.random::<f64>(), rng.random::<f64>() - 0.5));
        let exact = spectral_norm(&a);
        let est = power_norm(n, |v| &a * v, |v| a.adjoint() * v, 1e-12, 10_000);
        assert!((exact - est).abs() < 1e-6 * exact);
    }

    #[test]
    fn regression_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b, r2) = linear_regression(&x, &y);
        assert!((a - 2.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
