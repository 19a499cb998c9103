//! Scaled parabolic cylinder functions, Pochhammer symbols, the `a_i^j`
//! coefficients and quartic Gaussian moments.
//!
//! The scaled function is `𝒟_{−s}(z) = z^{s} e^{z²/4} D_{−s}(z)`, which tends
//! to one for large `z`. Reference values come from inverting the slice
//! integral `∫ |x|^{2s−1} e^{−αx⁴−Bx²} dx = B^{−s} Γ(s) 𝒟_{−s}(B/√(2α))`.

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_upper, QuadTol};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Cutoffs and tolerances shared by all series and quadrature evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Poincaré order 𝒥.
    pub poincare_order: usize,
    /// Cap on every infinite k-sum.
    pub series_cutoff: usize,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    /// Highest correction order p.
    pub p_max: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            poincare_order: 3,
            series_cutoff: 64,
            quad_rel_tol: 1e-10,
            quad_abs_tol: 1e-14,
            p_max: 2,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_rel_tol > 0.0 && self.quad_abs_tol > 0.0) {
            return domain("tolerances must be positive");
        }
        if self.series_cutoff < 1 {
            return domain("series_cutoff must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn quad_tol(&self) -> QuadTol {
        QuadTol::new(self.quad_rel_tol, self.quad_abs_tol)
    }
}

/// Index `m` of the function `𝒟_{−m−1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PcfIndex {
    pub m: usize,
}

impl PcfIndex {
    pub fn new(m: usize) -> Self {
        Self { m }
    }
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Rising factorial `x(x+1)…(x+k−1)`.
pub fn pochhammer(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + i as f64))
}

pub fn pochhammer_exact(x: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc *= x + BigRational::from_integer(BigInt::from(i));
    }
    acc
}

pub fn binomial_exact(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial_exact(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Exact `a_i^j = C(j,i)·(1/2)_j/(1/2)_i`.
pub fn coeff_a_exact(i: usize, j: usize) -> Result<BigRational> {
    if i > j {
        return domain(format!("coeff_a requires i ≤ j, got i={i}, j={j}"));
    }
    let mut ratio = BigRational::one();
    for k in i..j {
        ratio *= BigRational::new(BigInt::from(2 * k + 1), BigInt::from(2));
    }
    Ok(ratio * BigRational::from_integer(binomial_exact(j, i)))
}

/// `a_i^j` as a float; see [`coeff_a_exact`].
pub fn coeff_a(i: usize, j: usize) -> Result<f64> {
    coeff_a_exact(i, j).map(|r| rational_to_f64(&r))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `2∫_0^∞ y^power exp(−αy⁴ − βy² − log_norm) dy`, centred on the peak of the integrand.
fn moment_core(power: f64, alpha: f64, beta: f64, log_norm: f64, tol: QuadTol) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain("quartic moment requires alpha > 0");
    }
    let peak_sq = if power > 0.0 && beta >= 0.0 {
        power / (beta + (beta * beta + 4.0 * alpha * power).sqrt())
    } else if beta < 0.0 {
        (-beta + (beta * beta + 4.0 * alpha * power.max(0.0)).sqrt()) / (4.0 * alpha)
    } else {
        0.0
    };
    let peak = peak_sq.sqrt();
    let quartic_scale = alpha.powf(-0.25);
    let width = if peak > 0.0 {
        let curv = power / peak_sq + 12.0 * alpha * peak_sq + 2.0 * beta;
        if curv > 0.0 {
            (1.0 / curv.sqrt()).min(quartic_scale)
        } else {
            quartic_scale
        }
    } else if beta > 0.0 {
        (1.0 / (2.0 * beta).sqrt()).min(quartic_scale)
    } else {
        quartic_scale
    };
    let log_h = |y: f64| -> f64 {
        let y2 = y * y;
        let lp = if power == 0.0 { 0.0 } else { power * y.ln() };
        lp - alpha * y2 * y2 - beta * y2
    };
    let h_peak = if peak > 0.0 { log_h(peak) } else { 0.0 };
    let integrand = |y: f64| -> f64 {
        if y <= 0.0 {
            return if power == 0.0 { (-h_peak).exp() } else { 0.0 };
        }
        (log_h(y) - h_peak).exp()
    };
    let lower = if peak > 0.0 {
        integrate(integrand, 0.0, peak, tol)?.value
    } else {
        0.0
    };
    let upper = integrate_upper(integrand, peak, width, tol)?.value;
    Ok(2.0 * (lower + upper) * (h_peak - log_norm).exp())
}

/// `∫_{−∞}^{∞} x^n exp(−αx⁴ − βx²) dx` by adaptive quadrature.
pub fn quartic_moment(n: usize, alpha: f64, beta_coef: f64, policy: &TruncationPolicy) -> Result<f64> {
    if n % 2 == 1 {
        if !(alpha > 0.0) {
            return domain("quartic moment requires alpha > 0");
        }
        return Ok(0.0);
    }
    moment_core(n as f64, alpha, beta_coef, 0.0, policy.quad_tol())
}

/// `𝒟_{−s}(z)` for real `s > 0`; `z = ∞` gives exactly one.
pub fn pcf_scaled_fractional(s: f64, z: f64, policy: &TruncationPolicy) -> Result<f64> {
    if !(s > 0.0) {
        return domain(format!("pcf index s must be positive, got {s}"));
    }
    if !(z > 0.0) {
        return domain(format!("scaled pcf requires z > 0, got {z}"));
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    // B = 1 and α = 1/(2z²) keep the integrand at unit width
    let alpha = 0.5 / (z * z);
    moment_core(2.0 * s - 1.0, alpha, 1.0, ln_gamma(s), policy.quad_tol())
}

/// Reference value of `𝒟_{−m−1/2}(z)` from the quartic-moment inversion.
pub fn pcf_scaled_ref(idx: PcfIndex, z: f64, policy: &TruncationPolicy) -> Result<f64> {
    pcf_scaled_fractional(idx.m as f64 + 0.5, z, policy)
}

/// `e^{z²/4} D_{−m−1/2}(z)` for any real `z`.
pub fn pcf_weighted_ref(idx: PcfIndex, z: f64, policy: &TruncationPolicy) -> Result<f64> {
    let s = idx.m as f64 + 0.5;
    if z > 0.0 {
        let d = pcf_scaled_ref(idx, z, policy)?;
        return Ok(d * (-s * z.ln()).exp());
    }
    moment_core(2.0 * idx.m as f64, 0.5, z, ln_gamma(s), policy.quad_tol())
}

/// j-th term `(−1)^j (m+1/2)_{2j} / (j!(2z²)^j)` of the Poincaré expansion.
pub fn poincare_term(idx: PcfIndex, z: f64, j: usize) -> f64 {
    let two_z2 = 2.0 * z * z;
    let mut t = pochhammer(idx.m as f64 + 0.5, 2 * j);
    for k in 1..=j {
        t /= k as f64 * two_z2;
    }
    if j % 2 == 1 {
        -t
    } else {
        t
    }
}

/// Poincaré truncation `Σ_{j≤J} (−1)^j (m+1/2)_{2j}/(j!(2z²)^j)`.
pub fn pcf_scaled_poincare(idx: PcfIndex, z: f64, order: usize) -> f64 {
    (0..=order).map(|j| poincare_term(idx, z, j)).sum()
}

/// `∫ exp(−ax⁴ − bx² − cx) dx` through the parabolic-cylinder series in `ξ = c²/(4√(2a))`.
pub fn j1_quartic(a: f64, b: f64, c: f64, policy: &TruncationPolicy) -> Result<f64> {
    if !(a > 0.0) {
        return domain("j1_quartic requires a > 0");
    }
    let root = (2.0 * a).sqrt();
    let xi = c * c / (4.0 * root);
    let z = b / root;
    let prefactor = std::f64::consts::PI.sqrt() / (2.0 * a).powf(0.25);
    let mut sum = 0.0;
    let mut small_run = 0;
    for m in 0..policy.series_cutoff {
        let weight = if m == 0 {
            1.0
        } else if xi == 0.0 {
            0.0
        } else {
            (m as f64 * xi.ln() - ln_gamma(m as f64 + 1.0)).exp()
        };
        let term = if weight == 0.0 {
            0.0
        } else {
            prefactor * weight * pcf_weighted_ref(PcfIndex::new(m), z, policy)?
        };
        sum += term;
        if term.abs() < policy.quad_abs_tol {
            small_run += 1;
            if small_run == 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Accuracy {
        detail: format!("j1 series not converged within {} terms", policy.series_cutoff),
        achieved: f64::NAN,
        requested: policy.quad_abs_tol,
    })
}
