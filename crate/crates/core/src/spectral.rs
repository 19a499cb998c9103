//! Pole structure of the energy transforms and the zero-momentum x-transform.

use crate::continuum::harmonic_fixed_origin;
use crate::correction::exponent_ratio;
use crate::error::{domain, Error, Result};
use crate::lattice::ModelParams;
use crate::specfun::{gamma, pcf_scaled_fractional, quartic_moment, TruncationPolicy};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleFamily {
    /// `(2π/γ) tanh(Eπ/γ)`: poles at `Im E = (n+1/2)γ`.
    FullMehler,
    /// `Γ(1/4 + iE/2γ)Γ(1/4 − iE/2γ)`: poles at `Im E = ±(2n+1/2)γ`.
    FixedOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub gamma: f64,
    /// `(Re E, Im E)`.
    pub poles: Vec<(f64, f64)>,
    pub family: PoleFamily,
}

pub fn harmonic_pole_positions(gamma: f64, n_max: usize, family: PoleFamily) -> Result<PoleSet> {
    if !(gamma > 0.0) {
        return domain(format!("γ must be positive, got {gamma}"));
    }
    let mut poles = Vec::new();
    for n in 0..=n_max {
        let n = n as f64;
        match family {
            PoleFamily::FullMehler => poles.push((0.0, (n + 0.5) * gamma)),
            PoleFamily::FixedOrigin => {
                let im = (2.0 * n + 0.5) * gamma;
                poles.push((0.0, im));
                poles.push((0.0, -im));
            }
        }
    }
    Ok(PoleSet { gamma, poles, family })
}

/// `1/Γ(x)`, entire; reflection below 1/2.
fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        (PI * x).sin() * gamma(1.0 - x) / PI
    } else {
        1.0 / gamma(x)
    }
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `Γ(1/4 + s)Γ(1/4 − s)` with `s = E_im/(2γ)`, i.e. the product at `E = i·E_im`.
pub fn gamma_product(e_im: f64, gamma_freq: f64) -> Result<f64> {
    if !(gamma_freq > 0.0) {
        return domain(format!("γ must be positive, got {gamma_freq}"));
    }
    let s = e_im / (2.0 * gamma_freq);
    if is_pole(0.25 + s) || is_pole(0.25 - s) {
        return Err(Error::PoleHit(e_im));
    }
    Ok(gamma(0.25 + s) * gamma(0.25 - s))
}

fn reciprocal_product(e_im: f64, gamma_freq: f64) -> f64 {
    let s = e_im / (2.0 * gamma_freq);
    rgamma(0.25 + s) * rgamma(0.25 - s)
}

/// Zeros of `1/[Γ(1/4+s)Γ(1/4−s)]` with `|E_im| ≤ search_radius`, found by bracketing and bisection.
pub fn locate_poles_numeric(gamma_freq: f64, search_radius: f64) -> Result<Vec<f64>> {
    if !(gamma_freq > 0.0) || !(search_radius > 0.0) {
        return domain("locate_poles_numeric needs γ > 0 and a positive radius");
    }
    let f = |e: f64| reciprocal_product(e, gamma_freq);
    let step = gamma_freq / 16.0;
    let steps = (2.0 * search_radius / step).ceil() as usize;
    let mut roots: Vec<f64> = Vec::new();
    let mut x0 = -search_radius;
    let mut f0 = f(x0);
    for k in 1..=steps {
        let x1 = (-search_radius + k as f64 * step).min(search_radius);
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(roots)
}

/// `lim_{p→0} ∫dx_f e^{−ipx_f}` of the fixed-origin propagator with the universal quartic exponent.
///
/// With `A = (c/2)γ coth γβ` and `B = a·I_0(0)/Q⁴(β)` this is
/// `pref·Γ(1/2)/√A·𝒟_{−1/2}(A/√(2B))`.
pub fn x_fourier_zero_momentum(params: &ModelParams, policy: &TruncationPolicy) -> Result<f64> {
    policy.validate()?;
    if params.a < 0.0 {
        return domain("the x-transform needs a ≥ 0");
    }
    let (pref, _) = harmonic_fixed_origin(params)?;
    let (_, expo_unit) = harmonic_fixed_origin(&params.with_x_f(1.0))?;
    let a_coef = -expo_unit;
    if params.a == 0.0 {
        if !(a_coef > 0.0) {
            return domain("Gaussian x-integral diverges: γ coth γβ ≤ 0 with a = 0");
        }
        return Ok(pref * (PI / a_coef).sqrt());
    }
    let b_coef = params.a * exponent_ratio(params)?;
    if !(b_coef > 0.0) {
        return domain(format!("quartic coefficient {b_coef} must be positive"));
    }
    if a_coef <= 0.0 {
        return Ok(pref * quartic_moment(0, b_coef, a_coef, policy)?);
    }
    let z = a_coef / (2.0 * b_coef).sqrt();
    Ok(pref * (PI / a_coef).sqrt() * pcf_scaled_fractional(0.5, z, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::full_propagator;
    use crate::quad::{integrate_real_line, QuadTol};
    use crate::specfun::{pcf_scaled_poincare, poincare_term, PcfIndex};
    use approx::assert_relative_eq;

    fn ims(set: &PoleSet) -> Vec<f64> {
        set.poles.iter().map(|p| p.1).collect()
    }

    #[test]
    fn analytic_poles() {
        let full = harmonic_pole_positions(1.0, 2, PoleFamily::FullMehler).unwrap();
        assert_eq!(ims(&full), vec![0.5, 1.5, 2.5]);
        let fixed = harmonic_pole_positions(2.0, 1, PoleFamily::FixedOrigin).unwrap();
        assert_eq!(ims(&fixed), vec![1.0, -1.0, 5.0, -5.0]);
        assert!(fixed.poles.iter().all(|p| p.0 == 0.0));
        let scaled = harmonic_pole_positions(3.0, 4, PoleFamily::FixedOrigin).unwrap();
        let base = harmonic_pole_positions(1.0, 4, PoleFamily::FixedOrigin).unwrap();
        for (a, b) in ims(&scaled).iter().zip(ims(&base)) {
            assert_relative_eq!(*a, 3.0 * b, max_relative = 1e-15);
        }
        assert!(harmonic_pole_positions(0.0, 1, PoleFamily::FullMehler).is_err());
    }

    #[test]
    fn gamma_product_values() {
        let g14 = 3.625609908221908;
        assert_relative_eq!(gamma_product(0.0, 1.0).unwrap(), g14 * g14, max_relative = 1e-13);
        assert!((gamma_product(0.0, 1.0).unwrap() - 13.1450).abs() < 1e-4);
        for e in [0.3, 1.7, 4.2] {
            assert_relative_eq!(gamma_product(e, 1.3).unwrap(), gamma_product(-e, 1.3).unwrap(), max_relative = 1e-14);
        }
        assert!(matches!(gamma_product(0.5, 1.0), Err(Error::PoleHit(_))));
        assert!(matches!(gamma_product(-4.5, 1.0), Err(Error::PoleHit(_))));
    }

    #[test]
    fn numeric_poles_match_fixed_origin_family() {
        for g in [0.5, 1.0, 2.0] {
            let found = locate_poles_numeric(g, (2.0 * 3.0 + 0.75) * g).unwrap();
            let mut expect = ims(&harmonic_pole_positions(g, 3, PoleFamily::FixedOrigin).unwrap());
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(found.len(), expect.len(), "γ={g}: {found:?}");
            for (f, e) in found.iter().zip(&expect) {
                assert!((f - e).abs() < 1e-8, "γ={g}: {f} vs {e}");
            }
        }
    }

    #[test]
    fn gaussian_limit() {
        let p = ModelParams::new(0.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        let (pref, _) = harmonic_fixed_origin(&p).unwrap();
        let coth1 = 1.0 / 1f64.tanh();
        let v = x_fourier_zero_momentum(&p, &TruncationPolicy::default()).unwrap();
        assert_relative_eq!(v, pref * (2.0 * PI / coth1).sqrt(), max_relative = 1e-12);
    }

    fn direct(params: &ModelParams) -> f64 {
        let mut pol = TruncationPolicy::default();
        pol.p_max = 0;
        let f = |x: f64| full_propagator(&params.with_x_f(x), &pol).unwrap().value;
        integrate_real_line(f, 0.0, 1.0, QuadTol::new(1e-12, 1e-15)).unwrap().value
    }

    #[test]
    fn transform_matches_direct_quadrature() {
        let pol = TruncationPolicy::default();
        for a in [0.0, 0.1, 0.5] {
            let p = ModelParams::new(a, 0.5, 1.0, 1.0, 0.0).unwrap();
            let v = x_fourier_zero_momentum(&p, &pol).unwrap();
            assert_relative_eq!(v, direct(&p), max_relative = 1e-6);
        }
        // trigonometric branch past γβ = π/2, where the Gaussian part changes sign
        let p = ModelParams::new(0.5, -2.0, 1.0, 1.0, 0.0).unwrap();
        let v = x_fourier_zero_momentum(&p, &pol).unwrap();
        assert_relative_eq!(v, direct(&p), max_relative = 1e-6);
        assert!(x_fourier_zero_momentum(&p.with_a(0.0), &pol).is_err());
    }

    #[test]
    fn leading_correction_is_three_quarters() {
        let z = 40.0;
        let first = poincare_term(PcfIndex::new(0), z, 1);
        assert_relative_eq!(-first * 2.0 * z * z, 0.75, max_relative = 1e-15);
        let exact = pcf_scaled_fractional(0.5, z, &TruncationPolicy::default()).unwrap();
        let omitted = poincare_term(PcfIndex::new(0), z, 1).abs();
        assert!((exact - 1.0).abs() <= omitted);
        assert!((exact - pcf_scaled_poincare(PcfIndex::new(0), z, 1)).abs() <= poincare_term(PcfIndex::new(0), z, 2).abs());
    }
}
