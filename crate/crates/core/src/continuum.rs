//! Continuum objects: Mehler kernels, the Ω and Q_n closed forms, and the kernels d(τ), Q(τ).
//!
//! Every public function of γ depends on γ² = 2b/c only. Negative b runs on the
//! trigonometric continuation (sinh → sin, coth → cot).

use crate::error::{domain, Error, Result};
use crate::lattice::ModelParams;
use std::f64::consts::PI;

/// Distance from a node `kπ` of `sin(|γ|τ)` below which a kernel is treated as singular.
pub const NODE_GUARD: f64 = 1e-6;

const SERIES_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Hyperbolic,
    Flat,
    Trigonometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBranch {
    pub gamma_sq: f64,
    pub branch: Branch,
}

impl FrequencyBranch {
    pub fn new(gamma_sq: f64) -> Self {
        let branch = if gamma_sq > 0.0 {
            Branch::Hyperbolic
        } else if gamma_sq < 0.0 {
            Branch::Trigonometric
        } else {
            Branch::Flat
        };
        Self { gamma_sq, branch }
    }

    pub fn of(params: &ModelParams) -> Self {
        Self::new(params.gamma_sq())
    }

    /// `|γ|·τ`.
    pub fn phase(&self, tau: f64) -> f64 {
        self.gamma_sq.abs().sqrt() * tau
    }

    /// Error if `|γ|τ` lies within [`NODE_GUARD`] of a positive multiple of π.
    pub fn check_node(&self, tau: f64) -> Result<()> {
        if self.branch != Branch::Trigonometric {
            return Ok(());
        }
        let theta = self.phase(tau);
        let k = (theta / PI).round();
        if k >= 1.0 && (theta - k * PI).abs() < NODE_GUARD {
            return Err(Error::SingularFrequency(format!(
                "|γ|τ = {theta} is within {NODE_GUARD:e} of {k}π"
            )));
        }
        Ok(())
    }

    /// Error unless `|γ|β` is below the first node by more than [`NODE_GUARD`].
    pub fn check_before_first_node(&self, beta: f64) -> Result<()> {
        if self.branch == Branch::Trigonometric && self.phase(beta) > PI - NODE_GUARD {
            return Err(Error::SingularFrequency(format!(
                "|γ|β = {} is not below π by more than {NODE_GUARD:e}",
                self.phase(beta)
            )));
        }
        Ok(())
    }
}

/// `√u·coth√u`, continued to `√(−u)·cot√(−u)`.
pub fn scaled_coth(u: f64) -> f64 {
    if u.abs() < SERIES_SWITCH {
        return 1.0 + u / 3.0 - u * u / 45.0 + 2.0 * u.powi(3) / 945.0 - u.powi(4) / 4725.0;
    }
    if u > 0.0 {
        let r = u.sqrt();
        r / r.tanh()
    } else {
        let r = (-u).sqrt();
        r / r.tan()
    }
}

/// `sinh√u/√u`, continued to `sin√(−u)/√(−u)`.
pub fn scaled_sinh(u: f64) -> f64 {
    if u.abs() < SERIES_SWITCH {
        return 1.0 + u / 6.0 + u * u / 120.0 + u.powi(3) / 5040.0 + u.powi(4) / 362_880.0;
    }
    if u > 0.0 {
        let r = u.sqrt();
        r.sinh() / r
    } else {
        let r = (-u).sqrt();
        r.sin() / r
    }
}

/// `cosh√u`, continued to `cos√(−u)`.
pub fn scaled_cosh(u: f64) -> f64 {
    if u >= 0.0 {
        u.sqrt().cosh()
    } else {
        (-u).sqrt().cos()
    }
}

/// `√(k/(2π sinh ν))·exp{−k(x_i²+x_f²)/(2 tanh ν) + k x_i x_f/sinh ν}`.
pub fn mehler_kernel(k: f64, x_i: f64, x_f: f64, nu: f64) -> Result<f64> {
    if !(k > 0.0) || !(nu > 0.0) {
        return domain("mehler_kernel needs k > 0 and ν > 0");
    }
    let sh = nu.sinh();
    let expo = -k * (x_i * x_i + x_f * x_f) / (2.0 * nu.tanh()) + k * x_i * x_f / sh;
    Ok((k / (2.0 * PI * sh)).sqrt() * expo.exp())
}

/// Fixed-origin harmonic kernel as `(prefactor, exponent)`.
pub fn harmonic_fixed_origin(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let br = FrequencyBranch::of(params);
    br.check_before_first_node(params.beta)?;
    let u = br.gamma_sq * params.beta * params.beta;
    let s = params.beta * scaled_sinh(u);
    let k = scaled_coth(u) / params.beta;
    let pref = (2.0 * PI / params.c * s).powf(-0.5);
    let expo = -0.5 * params.c * k * params.x_f * params.x_f;
    Ok((pref, expo))
}

/// `σ = 1/(2(1+bΔ²/c))` for N slices, with the lattice positivity check.
fn lattice_sigma(params: &ModelParams, n: usize) -> Result<(f64, f64)> {
    params.validate()?;
    if n < 2 {
        return domain("N must be at least 2");
    }
    let delta = params.beta / n as f64;
    let g = 1.0 + params.b * delta * delta / params.c;
    if !(g > 0.0) {
        return Err(Error::SingularLattice {
            index: 0,
            detail: format!("1 + bΔ²/c = {g} is not positive"),
        });
    }
    Ok((0.5 / g, delta))
}

/// Roots and ratios of the characteristic equation `ρ² − ρ + σ² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic {
    pub sigma: f64,
    /// `√(1−4σ²)`.
    pub disc: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// `ρ_2/ρ_1 = (1−d)/(1+d) = −ũ_2/ũ_1`.
    pub ratio: f64,
}

impl Characteristic {
    pub fn new(sigma: f64) -> Result<Self> {
        let arg = 1.0 - 4.0 * sigma * sigma;
        if arg < 0.0 {
            return Err(Error::SingularLattice {
                index: 0,
                detail: format!("4σ² = {} exceeds 1; the closed forms need real roots", 4.0 * sigma * sigma),
            });
        }
        let disc = arg.sqrt();
        Ok(Self {
            sigma,
            disc,
            rho1: 0.5 * (1.0 + disc),
            rho2: 0.5 * (1.0 - disc),
            ratio: (1.0 - disc) / (1.0 + disc),
        })
    }

    /// `(1 − rⁿ)/(1 − r)`, equal to n at the double root.
    fn geometric(&self, n: f64) -> f64 {
        if self.disc == 0.0 {
            return n;
        }
        let lr = (-self.disc).ln_1p() - self.disc.ln_1p();
        (n * lr).exp_m1() / lr.exp_m1()
    }

    /// `Ω_n/ρ_1ⁿ`.
    fn omega_bracket(&self, n: f64) -> f64 {
        let rn = self.ratio.powf(n);
        0.5 * (1.0 + rn) + 0.5 * (1.0 - 2.0 * self.sigma * self.sigma) / self.rho1 * self.geometric(n)
    }

    /// `ln Ω_n` for n ≥ 0.
    pub fn ln_big_omega(&self, n: usize) -> f64 {
        n as f64 * self.rho1.ln() + self.omega_bracket(n as f64).ln()
    }

    /// `ω_n = Ω_n/Ω_{n−1}` with `Ω_{−1} = 1`.
    pub fn small_omega(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        self.rho1 * self.omega_bracket(n as f64) / self.omega_bracket(n as f64 - 1.0)
    }

    /// `p_n = u_1ρ_1ⁿ + u_2ρ_2ⁿ`.
    pub fn p_convergent(&self, n: usize) -> f64 {
        self.ln_big_omega(n).exp()
    }

    /// `q_n = ũ_1ρ_1ⁿ + ũ_2ρ_2ⁿ`.
    pub fn q_convergent(&self, n: usize) -> Result<f64> {
        if self.disc == 0.0 {
            return domain("q_n needs 4σ² < 1");
        }
        let u1 = 0.5 * (1.0 + 1.0 / self.disc);
        let u2 = 0.5 * (1.0 - 1.0 / self.disc);
        Ok(u1 * self.rho1.powi(n as i32) + u2 * self.rho2.powi(n as i32))
    }

    fn q_pair(&self, n: usize) -> Result<(f64, f64)> {
        if self.sigma == 0.0 {
            return domain("Q_n needs σ > 0");
        }
        let a = self.rho1 / self.sigma;
        let an = a.powi(n as i32);
        let tail = self.ratio * a.powi(-(n as i32));
        Ok((an - tail, an + tail))
    }
}

/// `(2πΔ/c)·[2(1+bΔ²/c)]^{N−1}·Ω_{N−2}`.
pub fn prefactor_finite_n(params: &ModelParams, n: usize) -> Result<f64> {
    let (sigma, delta) = lattice_sigma(params, n)?;
    let ch = Characteristic::new(sigma)?;
    let ln = (2.0 * PI * delta / params.c).ln() + (n - 1) as f64 * (1.0 / sigma).ln() + ch.ln_big_omega(n - 2);
    Ok(ln.exp())
}

/// `Q_n = (ρ_1/σ)ⁿ + (ũ_2/ũ_1)(ρ_2/σ)ⁿ` on the N-slice lattice.
pub fn big_q(k: usize, params: &ModelParams, n: usize) -> Result<f64> {
    let (sigma, _) = lattice_sigma(params, n)?;
    Ok(Characteristic::new(sigma)?.q_pair(k)?.0)
}

/// `Q̃_n = (ρ_1/σ)ⁿ − (ũ_2/ũ_1)(ρ_2/σ)ⁿ`.
pub fn q_tilde(k: usize, params: &ModelParams, n: usize) -> Result<f64> {
    let (sigma, _) = lattice_sigma(params, n)?;
    Ok(Characteristic::new(sigma)?.q_pair(k)?.1)
}

/// `−aΔx_f⁴ − (c/2Δ + bΔ)x_f² + ξ` with ω_{N−2} from the closed form.
pub fn exponent_finite_n(params: &ModelParams, n: usize) -> Result<f64> {
    let (sigma, delta) = lattice_sigma(params, n)?;
    let ch = Characteristic::new(sigma)?;
    let w = ch.small_omega(n - 2);
    let x2 = params.x_f * params.x_f;
    let g = 0.5 / sigma;
    Ok(-params.a * delta * x2 * x2 - (params.c / (2.0 * delta) + params.b * delta) * x2
        + params.c * x2 / (4.0 * delta * g * w))
}

/// `d(τ) = (1/2γ)(coth γτ − coth γβ)`.
///
/// At b = 0 the expression behaves like `(β−τ)/(2γ²τβ)` and has no finite limit.
pub fn kernel_d(tau: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !(tau > 0.0 && tau <= params.beta) {
        return domain("d(τ) needs 0 < τ ≤ β");
    }
    let br = FrequencyBranch::of(params);
    if br.branch == Branch::Flat {
        return domain("d(τ) diverges like 1/γ² at b = 0");
    }
    br.check_node(tau)?;
    br.check_node(params.beta)?;
    let g2 = br.gamma_sq;
    let e = 0.5 * (scaled_coth(g2 * tau * tau) / tau - scaled_coth(g2 * params.beta * params.beta) / params.beta);
    Ok(e / g2)
}

/// `Q(τ) = 2 sinh γτ`; on the trigonometric branch `2 sin|γ|τ` (the physical value is i times it); 0 at b = 0.
pub fn kernel_q(tau: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !(0.0..=params.beta).contains(&tau) {
        return domain("Q(τ) needs 0 ≤ τ ≤ β");
    }
    let br = FrequencyBranch::of(params);
    let th = br.phase(tau);
    Ok(match br.branch {
        Branch::Hyperbolic => 2.0 * th.sinh(),
        Branch::Flat => 0.0,
        Branch::Trigonometric => 2.0 * th.sin(),
    })
}

/// Kernels rescaled so that they stay finite across b = 0.
///
/// `s(t) = sinh(γt)/γ`, `K = γ coth γβ`, `u(t) = d(t)·γ²·s(t) = ½(cosh γt − K s(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledKernels {
    pub gamma_sq: f64,
    pub beta: f64,
    pub k_beta: f64,
    pub s_beta: f64,
}

impl ScaledKernels {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let br = FrequencyBranch::of(params);
        br.check_node(params.beta)?;
        let u = br.gamma_sq * params.beta * params.beta;
        Ok(Self {
            gamma_sq: br.gamma_sq,
            beta: params.beta,
            k_beta: scaled_coth(u) / params.beta,
            s_beta: params.beta * scaled_sinh(u),
        })
    }

    pub fn s(&self, t: f64) -> f64 {
        t * scaled_sinh(self.gamma_sq * t * t)
    }

    pub fn u(&self, t: f64) -> f64 {
        0.5 * (scaled_cosh(self.gamma_sq * t * t) - self.k_beta * self.s(t))
    }

    /// `u(t)^m·s(t)^{4−m}`, the integrand weight of a slot carrying index m.
    pub fn weight(&self, m: usize, t: f64) -> f64 {
        let s = self.s(t);
        self.u(t).powi(m as i32) * s.powi(4 - m as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeState;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(b: f64, beta: f64, x_f: f64) -> ModelParams {
        ModelParams::new(0.0, b, 1.0, beta, x_f).unwrap()
    }

    #[test]
    fn mehler_examples() {
        let v = mehler_kernel(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(v, (1.0 / (2.0 * PI * 1f64.sinh())).sqrt(), max_relative = 1e-15);
        assert!((v - 0.368024).abs() < 5e-5);
        assert_eq!(
            mehler_kernel(1.3, 0.2, -0.7, 0.4).unwrap(),
            mehler_kernel(1.3, -0.7, 0.2, 0.4).unwrap()
        );
        assert!(mehler_kernel(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn harmonic_examples() {
        let (pref, expo) = harmonic_fixed_origin(&params(0.0, 2.0, 0.5)).unwrap();
        assert_relative_eq!(pref, (1.0 / (2.0 * PI * 2.0)).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(expo, -0.25 / 4.0, max_relative = 1e-15);
        let (pref, _) = harmonic_fixed_origin(&params(0.5, 1.0, 0.0)).unwrap();
        assert_relative_eq!(pref, mehler_kernel(1.0, 0.0, 0.0, 1.0).unwrap(), max_relative = 1e-14);
        let (_, expo) = harmonic_fixed_origin(&params(0.5, 1.0, 1.0)).unwrap();
        assert_relative_eq!(expo, -0.5 / 1f64.tanh(), max_relative = 1e-14);
        assert!((expo + 0.656518).abs() < 1e-6);
    }

    #[test]
    fn harmonic_matches_mehler_with_unit_frequency_scale() {
        // k = cγ, ν = γβ for the fixed-origin case
        let p = params(0.8, 0.7, 0.9);
        let gamma = (1.6f64).sqrt();
        let (pref, expo) = harmonic_fixed_origin(&p).unwrap();
        let m = mehler_kernel(gamma, 0.0, 0.9, gamma * 0.7).unwrap();
        assert_relative_eq!(pref * expo.exp(), m, max_relative = 1e-13);
    }

    #[test]
    fn branches_join_continuously() {
        let (p0, e0) = harmonic_fixed_origin(&params(0.0, 1.3, 0.6)).unwrap();
        for b in [1e-9, -1e-9, 1e-5, -1e-5] {
            let (p, e) = harmonic_fixed_origin(&params(b, 1.3, 0.6)).unwrap();
            assert!((p - p0).abs() < 1e-4 * p0 && (e - e0).abs() < 1e-4 * e0.abs());
        }
        for u in [-2e-3, -9e-4, 9e-4, 2e-3] {
            let r = (u as f64).abs().sqrt();
            let exact = if u > 0.0 { r / r.tanh() } else { r / r.tan() };
            assert_relative_eq!(scaled_coth(u), exact, max_relative = 1e-15);
        }
    }

    #[test]
    fn trig_branch_blows_up_near_first_node() {
        let beta = 1.0;
        let theta = PI - 1e-4;
        let b = -0.5 * theta * theta / (beta * beta);
        let (_, expo) = harmonic_fixed_origin(&params(b, beta, 0.5)).unwrap();
        assert!(expo.abs() > 1e3);
        let b = -0.5 * PI * PI;
        assert!(matches!(harmonic_fixed_origin(&params(b, beta, 0.5)), Err(Error::SingularFrequency(_))));
    }

    #[test]
    fn prefactor_base_cases() {
        let p = params(0.7, 0.9, 0.0);
        let delta = 0.45;
        let g = 1.0 + 0.7 * delta * delta;
        assert_relative_eq!(prefactor_finite_n(&p, 2).unwrap(), 2.0 * PI * delta * 2.0 * g, max_relative = 1e-14);
        let ch = Characteristic::new(0.5 / g).unwrap();
        assert_relative_eq!(ch.ln_big_omega(1).exp(), 1.0 - ch.sigma * ch.sigma, max_relative = 1e-14);
    }

    #[test]
    fn prefactor_converges_with_power_law() {
        for b in [0.5, 1.0, 2.0] {
            let p = params(b, 1.0, 0.0);
            let gamma = (2.0 * b).sqrt();
            let limit = 2.0 * PI * gamma.sinh() / gamma;
            let ns = [8usize, 16, 32, 64, 128, 256];
            let errs: Vec<f64> = ns.iter().map(|&n| (prefactor_finite_n(&p, n).unwrap() - limit).abs()).collect();
            for w in errs.windows(2) {
                assert!(w[1] < w[0]);
                let slope = (w[0] / w[1]).log2();
                assert!((0.8..=2.2).contains(&slope), "b={b} slope={slope}");
            }
        }
        let lim = 2.0 * PI * (2f64.sqrt()).sinh() / 2f64.sqrt();
        assert!((lim - 8.597_275_368_434_78).abs() < 1e-12);
    }

    #[test]
    fn exponent_converges_to_coth_limit() {
        let p = params(1.0, 1.0, 1.0);
        let limit = -(2f64.sqrt() / 2.0) / (2f64.sqrt()).tanh();
        assert!((limit + 0.795_945_827_760_243_7).abs() < 1e-14);
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| (exponent_finite_n(&p, n).unwrap() - limit).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(errs[3] < 1e-2);
        assert_eq!(exponent_finite_n(&p.with_x_f(0.0), 16).unwrap(), 0.0);
    }

    #[test]
    fn exponent_matches_lattice_xi() {
        let p = ModelParams::new(0.3, 1.4, 1.2, 0.9, 0.7).unwrap();
        for n in [2usize, 3, 7, 40] {
            let st = LatticeState::new(&p, n).unwrap();
            let direct = -0.3 * st.delta * 0.7f64.powi(4)
                - (1.2 / (2.0 * st.delta) + 1.4 * st.delta) * 0.49
                + st.xi;
            assert_relative_eq!(exponent_finite_n(&p, n).unwrap(), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn omega_products_and_q_ratios() {
        let p = params(1.0, 1.0, 0.0);
        let n = 40;
        let st = LatticeState::new(&p, n).unwrap();
        let ch = Characteristic::new(st.sigma).unwrap();
        let mut prod = 1.0;
        for k in 0..=30 {
            prod *= st.omega[k];
            assert_relative_eq!(prod, ch.ln_big_omega(k).exp(), max_relative = 1e-12);
            assert_relative_eq!(ch.small_omega(k), st.omega[k], max_relative = 1e-12);
        }
        for k in 0..=20 {
            let q = big_q(k, &p, n).unwrap();
            let q1 = big_q(k + 1, &p, n).unwrap();
            assert_relative_eq!(st.sigma * q1 / q, st.omega[k], max_relative = 1e-12);
        }
        let r = ch.ratio;
        assert_relative_eq!(big_q(0, &p, n).unwrap(), 1.0 - r, max_relative = 1e-15);
    }

    #[test]
    fn convergents_shift_identity() {
        let ch = Characteristic::new(0.47).unwrap();
        for k in 1..=30 {
            assert_relative_eq!(ch.q_convergent(k).unwrap(), ch.p_convergent(k - 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn q_tilde_difference_identity() {
        let p = params(1.0, 1.0, 0.0);
        let n = 50;
        let (sigma, _) = lattice_sigma(&p, n).unwrap();
        let ch = Characteristic::new(sigma).unwrap();
        let u_ratio = -ch.ratio;
        for k in 1..=30 {
            let (qn, qtn) = ch.q_pair(k).unwrap();
            let (qm, qtm) = ch.q_pair(k - 1).unwrap();
            let lhs = qtn / qn - qtm / qm;
            let rhs = 2.0 * u_ratio * (ch.rho1 - ch.rho2) / (sigma * qn * qm);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_forms_reject_complex_roots() {
        let p = params(-20.0, 1.0, 0.3);
        assert!(matches!(prefactor_finite_n(&p, 4), Err(Error::SingularLattice { .. })));
        assert!(big_q(1, &p, 4).is_err());
    }

    #[test]
    fn kernel_examples() {
        let p = params(0.9, 1.1, 0.0);
        assert!(kernel_d(1.1, &p).unwrap().abs() < 1e-15);
        assert_eq!(kernel_q(0.0, &p).unwrap(), 0.0);
        let gamma = 1.8f64.sqrt();
        let tau = 0.4;
        let d = (1.0 / (2.0 * gamma)) * (1.0 / (gamma * tau).tanh() - 1.0 / (gamma * 1.1).tanh());
        assert_relative_eq!(kernel_d(tau, &p).unwrap(), d, max_relative = 1e-13);
        assert_relative_eq!(kernel_q(tau, &p).unwrap(), 2.0 * (gamma * tau).sinh(), max_relative = 1e-15);
        assert!(kernel_d(0.0, &p).is_err());
        assert!(kernel_d(0.5, &params(0.0, 1.1, 0.0)).is_err());
        let t = params(-0.9, 1.1, 0.0);
        let d = (1.0 / (2.0 * gamma)) * (1.0 / (gamma * tau).tan() - 1.0 / (gamma * 1.1).tan());
        assert_relative_eq!(kernel_d(tau, &t).unwrap(), -d, max_relative = 1e-12);
        assert_relative_eq!(kernel_q(tau, &t).unwrap(), 2.0 * (gamma * tau).sin(), max_relative = 1e-15);
    }

    #[test]
    fn flat_limit_of_d_by_series() {
        // γ²d(τ) = (β−τ)/(2τβ) + γ²(τ−β)/6 + O(γ⁴)
        let (beta, tau) = (1.3, 0.45);
        for g2 in [1e-2, -1e-2, 1e-3] {
            let d = kernel_d(tau, &params(0.5 * g2, beta, 0.0)).unwrap();
            let series = (beta - tau) / (2.0 * tau * beta) + g2 * (tau - beta) / 6.0;
            assert!((g2 * d - series).abs() < 5.0 * g2 * g2);
        }
    }

    #[test]
    fn scaled_kernels_reproduce_d_and_q() {
        let p = params(0.6, 0.8, 0.0);
        let k = ScaledKernels::new(&p).unwrap();
        let gamma = 1.2f64.sqrt();
        for tau in [0.1, 0.3, 0.8] {
            assert_relative_eq!(2.0 * gamma * k.s(tau), kernel_q(tau, &p).unwrap(), max_relative = 1e-13);
            let d = kernel_d(tau, &p).unwrap();
            assert_relative_eq!(k.u(tau), d * 1.2 * k.s(tau), max_relative = 1e-12);
        }
        assert!(k.u(0.8).abs() < 1e-15);
        assert_eq!(k.u(0.0), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn public_values_even_in_gamma(g2 in 0.05f64..4.0, tau in 0.05f64..1.0) {
            // flipping γ → −γ leaves γ² unchanged; check the explicit odd-function forms agree
            let b = 0.5 * g2;
            let p = params(b, 1.0, 0.4);
            let g = g2.sqrt();
            let d_plus = (1.0 / (2.0 * g)) * (1.0 / (g * tau).tanh() - 1.0 / g.tanh());
            let d_minus = (1.0 / (-2.0 * g)) * (1.0 / (-g * tau).tanh() - 1.0 / (-g).tanh());
            let d = kernel_d(tau, &p).unwrap();
            prop_assert!((d - d_plus).abs() <= 1e-10 * d.abs().max(1.0));
            prop_assert!((d - d_minus).abs() <= 1e-10 * d.abs().max(1.0));
        }
    }
}
