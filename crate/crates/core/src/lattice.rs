//! Time-sliced conditional Wiener integral at finite N.
//!
//! `W_N = (2πΔ/c)^{−N/2} ∫ dφ_1…dφ_{N−1} exp(−E_N)` with `φ_0 = 0`, `φ_N = x_f`.

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_real_line, QuadTol};
use crate::specfun::{coeff_a, ln_gamma, pcf_scaled_ref, PcfIndex, TruncationPolicy};
use std::cell::RefCell;
use std::f64::consts::PI;

/// Physical inputs: action `∫ (c/2)φ̇² + bφ² + aφ⁴` on `[0, β]`, `φ(0)=0`, `φ(β)=x_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    pub x_f: f64,
    pub x_i: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, beta: f64, x_f: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            c,
            beta,
            x_f,
            x_i: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.beta, self.x_f];
        if all.iter().any(|v| !v.is_finite()) {
            return domain("model parameters must be finite");
        }
        if !(self.c > 0.0) {
            return domain("c must be positive");
        }
        if !(self.beta > 0.0) {
            return domain("beta must be positive");
        }
        if self.a < 0.0 {
            return domain("a must be nonnegative");
        }
        if self.x_i != 0.0 {
            return domain("only x_i = 0 is supported");
        }
        Ok(())
    }

    /// `γ² = 2b/c`, sign included.
    pub fn gamma_sq(&self) -> f64 {
        2.0 * self.b / self.c
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }
    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }
    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }
    pub fn with_x_f(self, x_f: f64) -> Self {
        Self { x_f, ..self }
    }
}

/// Derived quantities of the N-slice lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub n: usize,
    pub delta: f64,
    /// `1 + bΔ²/c`.
    pub g: f64,
    pub sigma: f64,
    /// `c(1+bΔ²/c)/√(2aΔ³)`; infinite when `a = 0`.
    pub z: f64,
    /// `1/(2z²) = aΔ³/(c²g²)`, finite also at `a = 0`.
    pub inv_two_z_sq: f64,
    /// `ω_0 … ω_{N−2}`.
    pub omega: Vec<f64>,
    pub xi: f64,
}

impl LatticeState {
    pub fn new(params: &ModelParams, n: usize) -> Result<Self> {
        params.validate()?;
        if n == 0 {
            return domain("N must be at least 1");
        }
        let delta = params.beta / n as f64;
        let g = 1.0 + params.b * delta * delta / params.c;
        if !(g > 0.0) {
            return Err(Error::SingularLattice {
                index: 0,
                detail: format!("1 + bΔ²/c = {g} is not positive"),
            });
        }
        let sigma = 0.5 / g;
        let z = if params.a == 0.0 {
            f64::INFINITY
        } else {
            params.c * g / (2.0 * params.a * delta.powi(3)).sqrt()
        };
        let inv_two_z_sq = params.a * delta.powi(3) / (params.c * params.c * g * g);
        let mut omega = Vec::with_capacity(n.saturating_sub(1));
        if n >= 2 {
            omega.push(1.0);
            for i in 1..=(n - 2) {
                let next = 1.0 - sigma * sigma / omega[i - 1];
                if !(next > 0.0) {
                    return Err(Error::SingularLattice {
                        index: i,
                        detail: format!("ω_{i} = {next} is not positive"),
                    });
                }
                omega.push(next);
            }
        }
        let xi = if n >= 2 {
            params.c * params.x_f * params.x_f / (4.0 * delta * g * omega[n - 2])
        } else {
            0.0
        };
        Ok(Self {
            n,
            delta,
            g,
            sigma,
            z,
            inv_two_z_sq,
            omega,
            xi,
        })
    }

    /// `σ_i = 1 − ω_i`.
    pub fn sigma_seq(&self, i: usize) -> f64 {
        1.0 - self.omega[i]
    }
}

/// `E_N = Σ Δ[(c/2)((φ_i−φ_{i−1})/Δ)² + bφ_i² + aφ_i⁴]`.
pub fn discretized_action(path: &[f64], params: &ModelParams, n: usize) -> Result<f64> {
    if path.len() != n + 1 || n == 0 {
        return domain(format!("path must have N+1 = {} points, got {}", n + 1, path.len()));
    }
    if path[0] != 0.0 {
        return domain("path must start at 0");
    }
    let delta = params.beta / n as f64;
    let mut e = 0.0;
    for i in 1..=n {
        let v = (path[i] - path[i - 1]) / delta;
        let x2 = path[i] * path[i];
        e += delta * (0.5 * params.c * v * v + params.b * x2 + params.a * x2 * x2);
    }
    Ok(e)
}

/// Brute-force nested quadrature of the lattice integral, N ≤ 4.
pub fn wn_quadrature(params: &ModelParams, n: usize, policy: &TruncationPolicy) -> Result<f64> {
    params.validate()?;
    if !(1..=4).contains(&n) {
        return domain("wn_quadrature supports 1 ≤ N ≤ 4");
    }
    let delta = params.beta / n as f64;
    let norm = (2.0 * PI * delta / params.c).powf(-(n as f64) / 2.0);
    let mut path = vec![0.0; n + 1];
    path[n] = params.x_f;
    let width = (delta / params.c).sqrt();
    let tol = policy.quad_tol();
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    fn level(
        k: usize,
        path: &mut Vec<f64>,
        params: &ModelParams,
        n: usize,
        width: f64,
        tol: QuadTol,
        failure: &RefCell<Option<Error>>,
    ) -> f64 {
        if k == n {
            return match discretized_action(path, params, n) {
                Ok(e) => (-e).exp(),
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    0.0
                }
            };
        }
        let center = params.x_f * k as f64 / n as f64;
        let mut local = path.clone();
        let out = integrate_real_line(
            |x| {
                local[k] = x;
                level(k + 1, &mut local, params, n, width, tol, failure)
            },
            center,
            width,
            tol,
        );
        match out {
            Ok(v) => v.value,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        }
    }

    let value = level(1, &mut path, params, n, width, tol, &failure);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(norm * value)
}

/// Truncated series value with the estimated size of the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    pub tail_estimate: f64,
}

fn pcf_table(z: f64, len: usize, policy: &TruncationPolicy) -> Result<Vec<f64>> {
    (0..len).map(|s| pcf_scaled_ref(PcfIndex::new(s), z, policy)).collect()
}

/// Multi-series with every k_i below `cutoff`, summed as a transfer-matrix chain.
fn series_cube(params: &ModelParams, state: &LatticeState, dtab: &[f64], cutoff: usize) -> f64 {
    let n = state.n;
    let ln_g = state.g.ln();
    let x = params.c * params.x_f * params.x_f / state.delta;
    let ln_x = x.ln();
    let inner = |kp: usize, k: usize| -> f64 {
        (-2.0 * k as f64 * ln_g - ln_gamma(2.0 * k as f64 + 1.0) + ln_gamma((kp + k) as f64 + 0.5)).exp()
            * dtab[kp + k]
    };
    let last = |kp: usize, k: usize| -> f64 {
        if k > 0 && x == 0.0 {
            return 0.0;
        }
        let lx = if k == 0 { 0.0 } else { k as f64 * ln_x };
        (-(k as f64) * ln_g - ln_gamma(2.0 * k as f64 + 1.0) + lx + ln_gamma((kp + k) as f64 + 0.5)).exp()
            * dtab[kp + k]
    };
    let mut v = vec![0.0; cutoff];
    v[0] = 1.0;
    for _ in 1..n.saturating_sub(1) {
        let mut next = vec![0.0; cutoff];
        for (k, slot) in next.iter_mut().enumerate() {
            *slot = (0..cutoff).map(|kp| v[kp] * inner(kp, k)).sum();
        }
        v = next;
    }
    let mut total = 0.0;
    for k in 0..cutoff {
        total += (0..cutoff).map(|kp| v[kp] * last(kp, k)).sum::<f64>();
    }
    total
}

/// The exact series with each k_i summed up to `series_cutoff − 1`; no accuracy check.
pub fn wn_series_truncated(params: &ModelParams, n: usize, policy: &TruncationPolicy) -> Result<SeriesEstimate> {
    if !(2..=4).contains(&n) {
        return domain("wn_series_exact supports 2 ≤ N ≤ 4");
    }
    policy.validate()?;
    let state = LatticeState::new(params, n)?;
    let m = policy.series_cutoff;
    let dtab = pcf_table(state.z, 2 * m, policy)?;
    let pref = (2.0 * PI * state.delta / params.c).powf(-0.5)
        * (2.0 * PI * state.g).powf(-((n - 1) as f64) / 2.0)
        * (-params.a * state.delta * params.x_f.powi(4)
            - (params.c / (2.0 * state.delta) + params.b * state.delta) * params.x_f * params.x_f)
            .exp();
    let s_m = series_cube(params, &state, &dtab, m);
    let tail = if m >= 3 {
        let s_m1 = series_cube(params, &state, &dtab, m - 1);
        let s_m2 = series_cube(params, &state, &dtab, m - 2);
        let t1 = s_m - s_m1;
        let t0 = s_m1 - s_m2;
        let r = if t0 > 0.0 { t1 / t0 } else { 0.0 };
        if r > 0.0 && r < 1.0 {
            t1 * r / (1.0 - r)
        } else {
            t1.abs()
        }
    } else {
        s_m
    };
    Ok(SeriesEstimate {
        value: pref * s_m,
        tail_estimate: pref * tail.abs(),
    })
}

/// Parabolic-cylinder multi-series for `W_N`, N = 2..4.
pub fn wn_series_exact(params: &ModelParams, n: usize, policy: &TruncationPolicy) -> Result<SeriesEstimate> {
    let est = wn_series_truncated(params, n, policy)?;
    let requested = policy.quad_abs_tol.max(policy.quad_rel_tol * est.value.abs());
    if est.tail_estimate > requested {
        return Err(Error::Accuracy {
            detail: "k-sum tail exceeds tolerance; raise series_cutoff".into(),
            achieved: est.tail_estimate,
            requested,
        });
    }
    Ok(est)
}

/// The symbols `(Λ)^{2μ}_p` for one Λ and all μ ≤ order.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    pub lambda: usize,
    pub order: usize,
    entries: Vec<Vec<f64>>,
}

fn a_table(order: usize) -> Vec<Vec<f64>> {
    (0..=2 * order)
        .map(|n| (0..=n).map(|i| coeff_a(i, n).expect("i ≤ n")).collect())
        .collect()
}

impl LambdaTable {
    /// `(1)^{2μ}_i = a_i^{2μ}`.
    pub fn base(order: usize) -> Self {
        let a = a_table(order);
        let entries = (0..=order).map(|mu| a[2 * mu].clone()).collect();
        Self {
            lambda: 1,
            order,
            entries,
        }
    }

    /// Advance Λ → Λ+1 with the recurrence in ω_Λ and σ_Λ.
    pub fn next(&self, state: &LatticeState) -> Result<Self> {
        let lam = self.lambda + 1;
        if lam > state.omega.len() {
            return domain(format!("Λ = {lam} exceeds N−1 = {}", state.omega.len()));
        }
        let w = state.omega[lam - 1];
        let ratio = state.sigma * state.sigma / (w * state.omega[lam - 2]);
        let inv_w2 = 1.0 / (w * w);
        let a = a_table(self.order);
        let mut entries = Vec::with_capacity(self.order + 1);
        for mu in 0..=self.order {
            let mut row = vec![0.0; 2 * mu + 1];
            for (p, slot) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..=mu {
                    let outer = crate::specfun::binomial(mu, j) * inv_w2.powi(j as i32);
                    let prev = &self.entries[mu - j];
                    let lo = p.saturating_sub(2 * j);
                    let mut inner = 0.0;
                    for (i, prev_i) in prev.iter().enumerate().skip(lo) {
                        inner += a[2 * j + i][p] * prev_i * ratio.powi(i as i32);
                    }
                    s += outer * inner;
                }
                *slot = s;
            }
            entries.push(row);
        }
        Ok(Self {
            lambda: lam,
            order: self.order,
            entries,
        })
    }

    pub fn get(&self, mu: usize, p: usize) -> Result<f64> {
        if mu > self.order || p > 2 * mu {
            return domain(format!("(Λ)^{{2μ}}_p outside range: μ={mu}, p={p}"));
        }
        Ok(self.entries[mu][p])
    }
}

/// Table for a given Λ built by iterating the recurrence from Λ = 1.
pub fn lambda_table(lambda: usize, order: usize, state: &LatticeState) -> Result<LambdaTable> {
    if lambda == 0 {
        return domain("Λ must be at least 1");
    }
    let mut t = LambdaTable::base(order);
    while t.lambda < lambda {
        t = t.next(state)?;
    }
    Ok(t)
}

pub fn lambda_symbol(lambda: usize, mu: usize, p: usize, state: &LatticeState) -> Result<f64> {
    lambda_table(lambda, mu, state)?.get(mu, p)
}

/// Leading term of the recurrent summation, truncated at Poincaré order `order`.
pub fn wn_leading(params: &ModelParams, n: usize, order: usize, policy: &TruncationPolicy) -> Result<f64> {
    policy.validate()?;
    if n < 2 {
        return domain("wn_leading requires N ≥ 2");
    }
    let state = LatticeState::new(params, n)?;
    let table = lambda_table(n - 1, order, &state)?;
    let ln_det: f64 = state.omega.iter().map(|w| (2.0 * w * state.g).ln()).sum();
    let ln_pref = -0.5 * ((2.0 * PI * state.delta / params.c).ln() + ln_det);
    let x2 = params.x_f * params.x_f;
    let exponent = -params.a * state.delta * x2 * x2
        - (params.c / (2.0 * state.delta) + params.b * state.delta) * x2
        + state.xi;
    let mut sum = 0.0;
    let mut weight = 1.0;
    for nu in 0..=order {
        if nu > 0 {
            weight *= -state.inv_two_z_sq / nu as f64;
        }
        let mut inner = 0.0;
        for p in 0..=2 * nu {
            inner += state.xi.powi(p as i32) * table.get(nu, p)?;
        }
        sum += weight * inner;
    }
    Ok((ln_pref + exponent).exp() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(a: f64, b: f64, beta: f64, x_f: f64) -> ModelParams {
        ModelParams::new(a, b, 1.0, beta, x_f).unwrap()
    }

    #[test]
    fn action_examples() {
        let p = ModelParams::new(0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(discretized_action(&[0.0, 0.5, 1.0], &p, 2).unwrap(), 0.5);
        assert_eq!(discretized_action(&[0.0, 0.0, 0.0], &p.with_x_f(0.0), 2).unwrap(), 0.0);
        let q = ModelParams::new(0.3, 0.7, 1.3, 0.4, 0.9).unwrap();
        let single = 0.4 * (0.65 * (0.9f64 / 0.4).powi(2) + 0.7 * 0.81 + 0.3 * 0.9f64.powi(4));
        assert_relative_eq!(discretized_action(&[0.0, 0.9], &q, 1).unwrap(), single, max_relative = 1e-15);
        assert!(discretized_action(&[0.0, 1.0], &p, 2).is_err());
    }

    #[test]
    fn free_chain_is_exact_at_every_n() {
        let pol = TruncationPolicy::default();
        for n in 1..=4 {
            for x_f in [0.0, 0.7] {
                let p = params(0.0, 0.0, 0.8, x_f);
                let exact = (1.0 / (2.0 * PI * 0.8)).sqrt() * (-x_f * x_f / 1.6).exp();
                assert_relative_eq!(wn_quadrature(&p, n, &pol).unwrap(), exact, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn quadrature_even_in_endpoint() {
        let pol = TruncationPolicy::default();
        let p = params(0.2, 1.0, 0.5, 0.4);
        let a = wn_quadrature(&p, 3, &pol).unwrap();
        let b = wn_quadrature(&p.with_x_f(-0.4), 3, &pol).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn series_matches_quadrature_examples() {
        let pol = TruncationPolicy::default();
        let p = params(0.1, 1.0, 0.2, 0.1);
        let q2 = wn_quadrature(&p, 2, &pol).unwrap();
        assert_relative_eq!(wn_series_exact(&p, 2, &pol).unwrap().value, q2, max_relative = 1e-8);
        let q3 = wn_quadrature(&p, 3, &pol).unwrap();
        assert_relative_eq!(wn_series_exact(&p, 3, &pol).unwrap().value, q3, max_relative = 1e-6);
        let p = params(0.1, 1.0, 0.3, 0.2);
        let q3 = wn_quadrature(&p, 3, &pol).unwrap();
        assert_relative_eq!(wn_series_exact(&p, 3, &pol).unwrap().value, q3, max_relative = 1e-6);
    }

    #[test]
    fn series_matches_quadrature_at_four_slices() {
        let pol = TruncationPolicy::default();
        let p = params(0.1, 0.5, 0.3, 0.2);
        let q = wn_quadrature(&p, 4, &pol).unwrap();
        assert_relative_eq!(wn_series_exact(&p, 4, &pol).unwrap().value, q, max_relative = 1e-6);
    }

    #[test]
    fn monotone_refinement() {
        let pol = TruncationPolicy::default();
        let p = params(0.1, 1.0, 0.3, 0.2);
        let q = wn_quadrature(&p, 3, &pol).unwrap();
        let mut prev: Option<SeriesEstimate> = None;
        for m in [3usize, 4, 6, 8, 12, 20] {
            let est = wn_series_truncated(&p, 3, &TruncationPolicy { series_cutoff: m, ..pol }).unwrap();
            if let Some(pr) = prev {
                assert!((est.value - q).abs() <= (pr.value - q).abs() + pr.tail_estimate + 1e-14);
            }
            prev = Some(est);
        }
    }

    #[test]
    fn tiny_cutoff_reports_accuracy_error() {
        let pol = TruncationPolicy {
            series_cutoff: 2,
            ..Default::default()
        };
        let p = params(0.1, 1.0, 0.3, 0.5);
        assert!(matches!(wn_series_exact(&p, 3, &pol), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn lambda_base_and_trivial_entries() {
        let p = params(0.1, 1.0, 1.0, 0.3);
        let st = LatticeState::new(&p, 10).unwrap();
        for mu in 0..=3 {
            for i in 0..=2 * mu {
                assert_eq!(lambda_symbol(1, mu, i, &st).unwrap(), coeff_a(i, 2 * mu).unwrap());
            }
        }
        for lam in 1..=9 {
            assert_relative_eq!(lambda_symbol(lam, 0, 0, &st).unwrap(), 1.0, max_relative = 1e-15);
        }
        assert!(lambda_symbol(3, 1, 3, &st).is_err());
        assert!(lambda_symbol(10, 1, 0, &st).is_err());
    }

    #[test]
    fn xi_consistency() {
        let p = params(0.1, 0.7, 1.3, 0.6);
        let st = LatticeState::new(&p, 9).unwrap();
        let mut w = 1.0;
        for _ in 0..7 {
            w = 1.0 - st.sigma * st.sigma / w;
        }
        let xi = 0.6 * 0.6 / (w * 4.0 * st.delta * (1.0 + 0.7 * st.delta * st.delta));
        assert_relative_eq!(st.xi, xi, max_relative = 1e-15);
    }

    #[test]
    fn leading_term_is_exact_for_harmonic_chain() {
        let pol = TruncationPolicy::default();
        for n in 2..=4 {
            let p = params(0.0, 1.0, 0.7, 0.4);
            let q = wn_quadrature(&p, n, &pol).unwrap();
            assert_relative_eq!(wn_leading(&p, n, 0, &pol).unwrap(), q, max_relative = 1e-8);
        }
    }

    #[test]
    fn leading_term_is_asymptotic_in_inverse_z_squared() {
        let pol = TruncationPolicy::default();
        let p = params(0.1, 1.0, 0.3, 0.2);
        for n in 2..=4 {
            let exact = wn_series_exact(&p, n, &pol).unwrap().value;
            let errs: Vec<f64> = (0..4).map(|j| (wn_leading(&p, n, j, &pol).unwrap() - exact).abs()).collect();
            for w in errs.windows(2) {
                assert!(w[1] < 1e-2 * w[0], "n={n}: {errs:?}");
            }
        }
    }

    #[test]
    fn negative_b_singular_lattice() {
        let p = ModelParams::new(0.1, -50.0, 1.0, 1.0, 0.5).unwrap();
        assert!(matches!(LatticeState::new(&p, 2), Err(Error::SingularLattice { index: 0, .. })));
        let p = ModelParams::new(0.1, -6.4, 1.0, 1.0, 0.5).unwrap();
        match LatticeState::new(&p, 4) {
            Err(Error::SingularLattice { index, .. }) => assert!(index >= 1),
            other => panic!("expected singular lattice, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn omega_recurrence_stays_in_unit_interval(b in 0.0f64..5.0, n in 2usize..200) {
            let p = ModelParams::new(0.1, b, 1.0, 1.0, 0.3).unwrap();
            let st = LatticeState::new(&p, n).unwrap();
            prop_assert_eq!(st.omega[0], 1.0);
            for w in st.omega.windows(2) {
                prop_assert!((w[1] - (1.0 - st.sigma * st.sigma / w[0])).abs() < 1e-15);
                prop_assert!(w[1] > 0.0 && w[1] <= 1.0);
            }
        }

        #[test]
        fn leading_even_in_endpoint(x in -1.0f64..1.0, n in 2usize..40) {
            let p = ModelParams::new(0.05, 1.0, 1.0, 0.5, x).unwrap();
            let pol = TruncationPolicy::default();
            let u = wn_leading(&p, n, 2, &pol).unwrap();
            let v = wn_leading(&p.with_x_f(-x), n, 2, &pol).unwrap();
            prop_assert!((u - v).abs() <= 1e-14 * u.abs());
        }
    }
}
