//! Matrix form of the Λ-symbol recurrence, used as an independent check of
//! [`lattice::lambda_symbol`](crate::lattice::lambda_symbol).
//!
//! `ℂ^μ(Λ) = Σ_d 𝔸^d(Λ−1)·ℂ(Λ−1)·𝕄^d(Λ−1)·ℙ^d`, with column μ of ℂ(Λ) equal to
//! `(σQ_ΛQ_{Λ−1})^{2μ−p}(Λ)^{2μ}_{2μ−p}`.

use crate::error::{domain, Error, Result};
use crate::lattice::LatticeState;
use crate::specfun::{binomial, coeff_a};

/// Dense rectangular matrix that remembers the size of its active principal minor.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedTriangular {
    pub rows: usize,
    pub cols: usize,
    pub minor_dim: usize,
    entries: Vec<f64>,
}

impl BandedTriangular {
    pub fn zeros(rows: usize, cols: usize, minor_dim: usize) -> Self {
        Self {
            rows,
            cols,
            minor_dim,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.entries[r * self.cols + c] = v;
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return domain(format!("shape mismatch: {}×{} · {}×{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.minor_dim.min(other.minor_dim));
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Zero above the diagonal.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c) == 0.0))
    }

    /// Zero below the diagonal.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|r| (0..r.min(self.cols)).all(|c| self.get(r, c) == 0.0))
    }

    /// Row i vanishes before column ⌈i/2⌉.
    pub fn has_c_pattern(&self) -> bool {
        (0..self.rows).all(|r| (0..r.div_ceil(2).min(self.cols)).all(|c| self.get(r, c) == 0.0))
    }

    /// Every entry outside the leading `rows_minor × cols_minor` block is zero.
    pub fn vanishes_outside(&self, rows_minor: usize, cols_minor: usize) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| (r < rows_minor && c < cols_minor) || self.get(r, c) == 0.0))
    }
}

/// `Q_0 … Q_upto` normalised by `Q_0 = 1`, from `ω_n = σQ_{n+1}/Q_n`.
pub fn q_sequence(state: &LatticeState, upto: usize) -> Result<Vec<f64>> {
    if upto > state.omega.len() {
        return domain(format!("Q_{upto} needs ω_{}, the lattice stops at ω_{}", upto - 1, state.omega.len().saturating_sub(1)));
    }
    let mut q = vec![1.0];
    for n in 0..upto {
        q.push(state.omega[n] * q[n] / state.sigma);
    }
    Ok(q)
}

fn q_product(state: &LatticeState, q: &[f64], k: usize) -> Result<f64> {
    let v = state.sigma * q[k] * q[k + 1];
    if v == 0.0 || !v.is_finite() {
        return Err(Error::SingularLattice {
            index: k,
            detail: format!("σQ_{k}Q_{} = {v}", k + 1),
        });
    }
    Ok(v)
}

/// `{𝔸^d(K)}_{p,i} = a^{2d−i}_{2d−p}/(σQ_KQ_{K+1})^{p−i}`, size `(2μ+1)²`.
pub fn build_a(d: usize, k: usize, mu: usize, state: &LatticeState) -> Result<BandedTriangular> {
    if d > mu {
        return domain(format!("minor d = {d} exceeds μ = {mu}"));
    }
    let q = q_sequence(state, k + 1)?;
    let denom = q_product(state, &q, k)?;
    let dim = 2 * mu + 1;
    let mut m = BandedTriangular::zeros(dim, dim, 2 * d + 1);
    for p in 0..=2 * d {
        for i in 0..=p {
            m.set(p, i, coeff_a(2 * d - p, 2 * d - i)? / denom.powi((p - i) as i32));
        }
    }
    Ok(m)
}

/// `{𝕄^d(K)}_{λ,q} = C(q,λ)·Q_K^{4q−4λ}` for `q ≤ d`, size `(μ+1)²`.
pub fn build_m(d: usize, k: usize, mu: usize, state: &LatticeState) -> Result<BandedTriangular> {
    if d > mu {
        return domain(format!("minor d = {d} exceeds μ = {mu}"));
    }
    let qk = q_sequence(state, k)?[k];
    let mut m = BandedTriangular::zeros(mu + 1, mu + 1, d + 1);
    for q in 0..=d {
        for lam in 0..=q {
            m.set(lam, q, binomial(q, lam) * qk.powi(4 * (q - lam) as i32));
        }
    }
    Ok(m)
}

/// Column projector `{ℙ^d}_{λ,q} = δ_{dλ}δ_{λq}`.
pub fn projector(d: usize, mu: usize) -> Result<BandedTriangular> {
    if d > mu {
        return domain(format!("projector column {d} exceeds μ = {mu}"));
    }
    let mut m = BandedTriangular::zeros(mu + 1, mu + 1, d + 1);
    m.set(d, d, 1.0);
    Ok(m)
}

/// `{ℂ(1)}_{p,z} = (σQ_1Q_0)^{2z−p}·a^{2z}_{2z−p}`.
fn c_base(mu: usize, state: &LatticeState) -> Result<BandedTriangular> {
    let q = q_sequence(state, 1)?;
    let s = q_product(state, &q, 0)?;
    let mut c = BandedTriangular::zeros(2 * mu + 1, mu + 1, mu + 1);
    for z in 0..=mu {
        for p in 0..=2 * z {
            c.set(p, z, s.powi((2 * z - p) as i32) * coeff_a(2 * z - p, 2 * z)?);
        }
    }
    Ok(c)
}

/// ℂ^μ(Λ), iterated from the Λ = 1 base.
pub fn c_matrix(lambda: usize, mu: usize, state: &LatticeState) -> Result<BandedTriangular> {
    if lambda == 0 {
        return domain("Λ must be at least 1");
    }
    let mut c = c_base(mu, state)?;
    for lam in 2..=lambda {
        let k = lam - 1;
        let mut next = BandedTriangular::zeros(2 * mu + 1, mu + 1, mu + 1);
        for d in 0..=mu {
            let x = build_a(d, k, mu, state)?
                .mul(&c)?
                .mul(&build_m(d, k, mu, state)?)?
                .mul(&projector(d, mu)?)?;
            next.add_assign(&x);
        }
        debug_assert!(next.has_c_pattern());
        c = next;
    }
    Ok(c)
}

/// `{ℂ^μ(Λ)}_{p,μ}/(σQ_ΛQ_{Λ−1})^{2μ−p}`, which should equal `(Λ)^{2μ}_{2μ−p}`.
pub fn lambda_from_matrix(lambda: usize, mu: usize, p: usize, state: &LatticeState) -> Result<f64> {
    if p > 2 * mu {
        return domain(format!("p = {p} exceeds 2μ = {}", 2 * mu));
    }
    let c = c_matrix(lambda, mu, state)?;
    let q = q_sequence(state, lambda)?;
    let s = q_product(state, &q, lambda - 1)?;
    Ok(c.get(p, mu) / s.powi((2 * mu - p) as i32))
}

fn falling(e: i64, d: i64) -> f64 {
    (0..d).map(|t| (e - t) as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Direct `{𝔸^{i3}(2)𝔸^{i2}(1)}_{p,λ}` and the closed form with `∂_x^{4i3−4i2}` at x = 1.
pub fn two_matrix_product_identity(
    i2: usize,
    i3: usize,
    p: usize,
    lambda_idx: usize,
    state: &LatticeState,
) -> Result<(f64, f64)> {
    if i2 > i3 || p > 2 * i3 || lambda_idx > p || lambda_idx > 2 * i2 {
        return domain(format!("indices outside the minors: i2={i2}, i3={i3}, p={p}, λ={lambda_idx}"));
    }
    let mu = i3;
    let lhs = build_a(i3, 2, mu, state)?.mul(&build_a(i2, 1, mu, state)?)?.get(p, lambda_idx);

    let q = q_sequence(state, 3)?;
    let u = 1.0 / q_product(state, &q, 2)?;
    let v = 1.0 / q_product(state, &q, 1)?;
    let n = p - lambda_idx;
    let order = (4 * i3 - 4 * i2) as i64;
    // x^{4i3−2p}(ux² + v)^n expanded in powers of x, then differentiated term by term
    let mut deriv = 0.0;
    for k in 0..=n {
        let e = (4 * i3 - 2 * p + 2 * k) as i64;
        deriv += binomial(n, k) * u.powi(k as i32) * v.powi((n - k) as i32) * falling(e, order);
    }
    let pref = 4f64.powi(lambda_idx as i32 - p as i32) * factorial(4 * i2 - 2 * lambda_idx)
        / (factorial(4 * i3 - 2 * p) * factorial(n));
    Ok((lhs, pref * deriv))
}
