//! Ordered nested integrals `I_{m_1…m_ν}(τ)` by Chebyshev–Lobatto spectral integration.
//!
//! Internally every integral is taken over the rescaled weights `Ĵ_m = u^m s^{4−m}`, which are
//! entire in t and finite across b = 0. The physical value is `16^ν (γ²)^{2ν−p} Î`.

use crate::continuum::{Branch, FrequencyBranch, ScaledKernels};
use crate::error::{domain, Error, Result};
use crate::lattice::ModelParams;
use crate::quad::QuadValue;
use crate::specfun::TruncationPolicy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

const N_START: usize = 16;
const N_MAX: usize = 512;

type Matrix = Arc<Vec<f64>>;

fn unit_matrix(n: usize) -> Matrix {
    static CACHE: OnceLock<Mutex<HashMap<usize, Matrix>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().expect("cache poisoned").get(&n) {
        return m.clone();
    }
    let m = Arc::new(build_unit_matrix(n));
    cache.lock().expect("cache poisoned").entry(n).or_insert(m).clone()
}

/// Row k maps node values on [−1, 1] to `∫_{x_k}^{1} f dx`, with `x_k = cos(πk/n)`.
fn build_unit_matrix(n: usize) -> Vec<f64> {
    let dim = n + 1;
    let cos_tab: Vec<f64> = (0..2 * n).map(|r| (PI * r as f64 / n as f64).cos()).collect();
    let cs = |j: usize, k: usize| cos_tab[(j * k) % (2 * n)];
    let mut out = vec![0.0; dim * dim];
    let mut c = vec![0.0; dim + 1];
    let mut d = vec![0.0; dim];
    for i in 0..dim {
        let wi = if i == 0 || i == n { 0.5 } else { 1.0 };
        for j in 0..dim {
            let mut v = 2.0 / n as f64 * wi * cs(j, i);
            if j == 0 || j == n {
                v *= 0.5;
            }
            c[j] = v;
        }
        c[dim] = 0.0;
        d[1] = c[0] - 0.5 * c[2];
        for j in 2..=n {
            d[j] = (c[j - 1] - c[j + 1]) / (2.0 * j as f64);
        }
        for k in 0..dim {
            let mut s = 0.0;
            for j in 1..=n {
                s += d[j] * (1.0 - cs(j, k));
            }
            out[k * dim + i] = s;
        }
    }
    out
}

/// `∫_x^1 f` for one x, from node values.
fn tail_integral_at(values: &[f64], x: f64) -> f64 {
    let n = values.len() - 1;
    let mut c = vec![0.0; n + 2];
    for (j, cj) in c.iter_mut().enumerate().take(n + 1) {
        let mut s = 0.0;
        for (i, v) in values.iter().enumerate() {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * v * (PI * (j * i) as f64 / n as f64).cos();
        }
        *cj = 2.0 / n as f64 * s * if j == 0 || j == n { 0.5 } else { 1.0 };
    }
    let theta = x.clamp(-1.0, 1.0).acos();
    let mut s = 0.0;
    for j in 1..=n {
        let dj = if j == 1 {
            c[0] - 0.5 * c[2]
        } else {
            (c[j - 1] - c[j + 1]) / (2.0 * j as f64)
        };
        s += dj * (1.0 - (j as f64 * theta).cos());
    }
    s
}

/// Evaluator with per-word suffix-profile caches, shared across calls.
pub struct NestedIntegrator {
    kernels: ScaledKernels,
    rel_tol: f64,
    abs_tol: f64,
    profiles: Mutex<HashMap<(usize, Vec<u8>), Arc<Vec<f64>>>>,
    weights: Mutex<HashMap<(usize, u8), Arc<Vec<f64>>>>,
}

impl NestedIntegrator {
    pub fn new(params: &ModelParams, policy: &TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(Self {
            kernels: ScaledKernels::new(params)?,
            rel_tol: policy.quad_rel_tol,
            abs_tol: policy.quad_abs_tol,
            profiles: Mutex::new(HashMap::new()),
            weights: Mutex::new(HashMap::new()),
        })
    }

    pub fn kernels(&self) -> &ScaledKernels {
        &self.kernels
    }

    fn node_t(&self, n: usize, k: usize) -> f64 {
        0.5 * self.kernels.beta * (1.0 + (PI * k as f64 / n as f64).cos())
    }

    fn weight(&self, n: usize, m: u8) -> Arc<Vec<f64>> {
        if let Some(w) = self.weights.lock().expect("cache poisoned").get(&(n, m)) {
            return w.clone();
        }
        let w: Vec<f64> = (0..=n).map(|k| self.kernels.weight(m as usize, self.node_t(n, k))).collect();
        let w = Arc::new(w);
        self.weights.lock().expect("cache poisoned").entry((n, m)).or_insert(w).clone()
    }

    /// `Î_word(t_k)` at every node of the n-panel grid.
    fn profile(&self, n: usize, word: &[u8]) -> Arc<Vec<f64>> {
        if word.is_empty() {
            return Arc::new(vec![1.0; n + 1]);
        }
        let key = (n, word.to_vec());
        if let Some(p) = self.profiles.lock().expect("cache poisoned").get(&key) {
            return p.clone();
        }
        let f = self.integrand(n, word);
        let s = unit_matrix(n);
        let dim = n + 1;
        let half = 0.5 * self.kernels.beta;
        let out: Vec<f64> = (0..dim)
            .map(|k| half * s[k * dim..(k + 1) * dim].iter().zip(&f).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let out = Arc::new(out);
        self.profiles.lock().expect("cache poisoned").entry(key).or_insert(out).clone()
    }

    fn integrand(&self, n: usize, word: &[u8]) -> Vec<f64> {
        let inner = self.profile(n, &word[1..]);
        let w = self.weight(n, word[0]);
        w.iter().zip(inner.iter()).map(|(a, b)| a * b).collect()
    }

    fn value_at(&self, n: usize, word: &[u8], tau: f64) -> f64 {
        if word.is_empty() {
            return 1.0;
        }
        if tau == 0.0 {
            return self.profile(n, word)[n];
        }
        let f = self.integrand(n, word);
        let x = 2.0 * tau / self.kernels.beta - 1.0;
        0.5 * self.kernels.beta * tail_integral_at(&f, x)
    }

    /// Rescaled integral `Î_word(τ)` with the grid-doubling difference as error.
    pub fn scaled(&self, word: &[u8], tau: f64) -> Result<QuadValue> {
        if word.iter().any(|&m| m > 4) {
            return domain("indices must lie in 0..=4");
        }
        if !(0.0..self.kernels.beta).contains(&tau) {
            return domain("τ must lie in [0, β)");
        }
        if word.is_empty() {
            return Ok(QuadValue { value: 1.0, error: 0.0 });
        }
        let mut n = N_START;
        let mut prev = self.value_at(n, word, tau);
        let mut err = f64::INFINITY;
        while n < N_MAX {
            n *= 2;
            let v = self.value_at(n, word, tau);
            err = (v - prev).abs();
            if !v.is_finite() {
                break;
            }
            if err <= self.abs_tol.max(self.rel_tol * v.abs()) {
                return Ok(QuadValue { value: v, error: err });
            }
            prev = v;
        }
        Err(Error::Accuracy {
            detail: format!("nested integral {word:?} not converged at {N_MAX} nodes"),
            achieved: err,
            requested: self.abs_tol.max(self.rel_tol * prev.abs()),
        })
    }

    /// Physical integral `I_word(τ)` built from d(τ) and Q(τ).
    pub fn physical(&self, word: &[u8], tau: f64) -> Result<QuadValue> {
        let nu = word.len() as i32;
        let p: i32 = word.iter().map(|&m| m as i32).sum();
        let power = 2 * nu - p;
        let g2 = self.kernels.gamma_sq;
        if FrequencyBranch::new(g2).branch == Branch::Flat {
            if power > 0 {
                return Ok(QuadValue { value: 0.0, error: 0.0 });
            }
            if power < 0 {
                return domain("I diverges at b = 0 when p > 2ν");
            }
        }
        let scale = 16f64.powi(nu) * if power == 0 { 1.0 } else { g2.powi(power) };
        let v = self.scaled(word, tau)?;
        Ok(QuadValue {
            value: scale * v.value,
            error: scale.abs() * v.error,
        })
    }
}

/// `I_{m_1…m_ν}(τ) = ∫_τ^β J_{m_1}(t) I_{m_2…m_ν}(t) dt` with `J_m = d^m Q⁴`.
pub fn nested_integral(
    idx: &super::MultiIndex,
    tau: f64,
    params: &ModelParams,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let integ = NestedIntegrator::new(params, policy)?;
    Ok(integ.physical(&idx.entries, tau)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::MultiIndex;
    use crate::quad::{integrate, QuadTol};
    use approx::assert_relative_eq;

    fn params(b: f64, beta: f64) -> ModelParams {
        ModelParams::new(0.0, b, 1.0, beta, 0.0).unwrap()
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn unit_matrix_integrates_polynomials() {
        let n = 16;
        let s = unit_matrix(n);
        let f: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos().powi(5)).collect();
        for k in 0..=n {
            let x = (PI * k as f64 / n as f64).cos();
            let row: f64 = (0..=n).map(|i| s[k * (n + 1) + i] * f[i]).sum();
            assert!((row - (1.0 - x.powi(6)) / 6.0).abs() < 1e-14);
        }
        let vals: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos().powi(3)).collect();
        assert!((tail_integral_at(&vals, 0.3) - (1.0 - 0.3f64.powi(4)) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn empty_word_is_one() {
        let integ = NestedIntegrator::new(&params(0.5, 1.0), &pol()).unwrap();
        assert_eq!(integ.physical(&[], 0.3).unwrap().value, 1.0);
    }

    #[test]
    fn single_zero_index_against_quadrature() {
        let p = params(0.5, 1.0);
        let v = nested_integral(&MultiIndex::new(vec![0]).unwrap(), 0.0, &p, &pol()).unwrap();
        let q = integrate(|t: f64| 16.0 * t.sinh().powi(4), 0.0, 1.0, QuadTol::new(1e-14, 0.0)).unwrap();
        assert_relative_eq!(v, q.value, max_relative = 1e-12);
        assert!((v - 5.137_516_967_175_802).abs() < 1e-11);
    }

    #[test]
    fn nonzero_tau_against_quadrature() {
        let p = params(0.7, 0.9);
        let g = 1.4f64.sqrt();
        let d = |t: f64| (1.0 / (2.0 * g)) * (1.0 / (g * t).tanh() - 1.0 / (g * 0.9).tanh());
        let j = |m: i32, t: f64| d(t).powi(m) * (2.0 * (g * t).sinh()).powi(4);
        let tol = QuadTol::new(1e-13, 0.0);
        let inner = |t: f64| integrate(|y| j(1, y), t, 0.9, tol).unwrap().value;
        let q = integrate(|x| j(2, x) * inner(x), 0.25, 0.9, tol).unwrap().value;
        let v = nested_integral(&MultiIndex::new(vec![2, 1]).unwrap(), 0.25, &p, &pol()).unwrap();
        assert_relative_eq!(v, q, max_relative = 1e-10);
    }

    #[test]
    fn shuffle_and_repeat_identities() {
        for (b, beta) in [(0.245, 0.8), (0.5, 1.0), (0.245, 1.0), (0.5, 0.8)] {
            let integ = NestedIntegrator::new(&params(b, beta), &pol()).unwrap();
            let i = |w: &[u8]| integ.physical(w, 0.0).unwrap().value;
            for a in 0..=4u8 {
                for c in 0..=4u8 {
                    let lhs = i(&[a, c]) + i(&[c, a]);
                    assert_relative_eq!(lhs, i(&[a]) * i(&[c]), max_relative = 1e-8);
                }
            }
            let i0 = i(&[0]);
            let mut fact = 1.0;
            for nu in 1..=4 {
                fact *= nu as f64;
                assert_relative_eq!(i(&vec![0; nu]), i0.powi(nu as i32) / fact, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn flat_branch_limits() {
        let flat = NestedIntegrator::new(&params(0.0, 1.0), &pol()).unwrap();
        assert_eq!(flat.physical(&[0], 0.0).unwrap().value, 0.0);
        assert!(flat.physical(&[4], 0.0).is_err());
        // ν = 1, p = 2: J_2 → 16 (β−t)²t²/(4β²)
        let v = flat.physical(&[2], 0.0).unwrap().value;
        assert_relative_eq!(v, 4.0 / 30.0, max_relative = 1e-12);
        let near = NestedIntegrator::new(&params(1e-7, 1.0), &pol()).unwrap();
        assert_relative_eq!(near.physical(&[2], 0.0).unwrap().value, v, max_relative = 1e-6);
    }

    #[test]
    fn trig_branch_against_quadrature() {
        let p = params(-2.0, 1.0);
        let k = 2.0;
        let q = integrate(|t: f64| 16.0 * (k * t).sin().powi(4), 0.0, 1.0, QuadTol::new(1e-14, 0.0)).unwrap();
        let v = nested_integral(&MultiIndex::new(vec![0]).unwrap(), 0.0, &p, &pol()).unwrap();
        assert_relative_eq!(v, q.value, max_relative = 1e-12);
    }
}
