//! Correction series, its exponential resummation, and the assembled propagator.
//!
//! All sums are written in rescaled variables: a term `(−a)^ν c^{−p} X^{2ν−p} I_w(0)` equals
//! `(−a)^ν (4/c)^p Y^{2ν−p} Î_w(0)` with `Y = x_f²/s(β)²` and `Î` built from `u^m s^{4−m}`.

use super::factors::{enumerate_multi_indices, f_exact, f_product_exact};
use super::nested::NestedIntegrator;
use crate::continuum::{harmonic_fixed_origin, FrequencyBranch};
use crate::error::{domain, Error, Result};
use crate::lattice::ModelParams;
use crate::specfun::{binomial_exact, rational_to_f64, TruncationPolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

const NU_CAP: usize = 200;

/// `R(u)` with `I_0(0)/Q⁴(β) = β·R(γ²β²)`; `R(0) = 1/5`.
fn ratio_scaled(u: f64) -> f64 {
    if u.abs() < 0.05 {
        let c = [
            1.0 / 5.0,
            -4.0 / 105.0,
            4.0 / 525.0,
            -8.0 / 5775.0,
            3292.0 / 14_189_175.0,
            -2584.0 / 70_945_875.0,
            8.0 / 1_472_625.0,
            -5_613_008.0 / 7_218_388_051_875.0,
        ];
        return c.iter().rev().fold(0.0, |acc, k| acc * u + k);
    }
    if u > 0.0 {
        let x = u.sqrt();
        let (s, ch) = (x.sinh(), x.cosh());
        (3.0 * x - 4.0 * ch * s + ch.powi(3) * s + ch * s.powi(3)) / (8.0 * x * s.powi(4))
    } else {
        let t = (-u).sqrt();
        let (s, ch) = (t.sin(), t.cos());
        (3.0 * t + s * ch * ((2.0 * t).cos() - 4.0)) / (8.0 * t * s.powi(4))
    }
}

/// `I_0(0)/Q⁴(β)` in closed form.
pub fn exponent_ratio(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let br = FrequencyBranch::of(params);
    br.check_node(params.beta)?;
    Ok(params.beta * ratio_scaled(br.gamma_sq * params.beta * params.beta))
}

/// `−a·x_f⁴·I_0(0)/Q⁴(β)`.
pub fn universal_exponent(params: &ModelParams) -> Result<f64> {
    let r = exponent_ratio(params)?;
    Ok(-params.a * params.x_f.powi(4) * r)
}

/// One monomial `coefficient·(−a)^{a_power}·Y^{y_power}·Î_word` of a resummed polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTerm {
    pub coefficient: BigRational,
    pub a_power: usize,
    pub y_power: usize,
    pub word: Vec<u8>,
}

fn compositions(p: usize) -> Vec<Vec<u8>> {
    fn rec(left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for part in 1..=left.min(4) {
            cur.push(part as u8);
            rec(left - part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, &mut Vec::new(), &mut out);
    out
}

/// `Π F(n_i, x_i)` as a function of the zero-run lengths `k_1 … k_μ` after each nonzero index.
fn run_weight(parts: &[u8], k: &[usize]) -> BigRational {
    let mu = parts.len();
    let mut w = BigRational::from_integer(1.into());
    for i in 0..mu {
        let big_k: usize = k[i..].iter().sum();
        let rest: usize = parts[i + 1..].iter().map(|&n| n as usize).sum();
        let x = 2 * (big_k + mu - 1 - i) as i64 - rest as i64;
        w *= f_exact(parts[i] as usize, x).expect("parts lie in 1..=4");
    }
    w
}

fn grid_points(dim: usize, side: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..side).map(move |i| {
                    let mut w = v.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
    }
    out
}

fn build_reduced(p: usize) -> Result<Vec<ReducedTerm>> {
    let mut merged: BTreeMap<Vec<u8>, ReducedTerm> = BTreeMap::new();
    for parts in compositions(p) {
        let mu = parts.len();
        // the weight has total degree ≤ p in the run lengths
        let side = p + 1;
        let grid = grid_points(mu, side);
        let values: HashMap<Vec<usize>, BigRational> =
            grid.iter().map(|k| (k.clone(), run_weight(&parts, k))).collect();
        for r in &grid {
            if r.iter().sum::<usize>() > p {
                continue;
            }
            // multivariate forward difference Δ^r W(0)
            let mut diff = BigRational::zero();
            for s in grid_points(mu, side) {
                if s.iter().zip(r).any(|(a, b)| a > b) {
                    continue;
                }
                let mut c = BigInt::from(1);
                for (rl, sl) in r.iter().zip(&s) {
                    c *= binomial_exact(*rl, *sl);
                }
                let sign_odd = (r.iter().sum::<usize>() - s.iter().sum::<usize>()) % 2 == 1;
                let term = BigRational::from_integer(c) * &values[&s];
                if sign_odd {
                    diff -= term;
                } else {
                    diff += term;
                }
            }
            if diff.is_zero() {
                continue;
            }
            let a_power = mu + r.iter().sum::<usize>();
            if 2 * a_power < p {
                return domain(format!(
                    "resummed term with negative power of Y at p={p}, parts {parts:?}, runs {r:?}"
                ));
            }
            let mut word = Vec::with_capacity(a_power);
            for (n, rl) in parts.iter().zip(r) {
                word.push(*n);
                word.extend(std::iter::repeat(0).take(*rl));
            }
            merged
                .entry(word.clone())
                .and_modify(|t| t.coefficient += &diff)
                .or_insert(ReducedTerm {
                    coefficient: diff,
                    a_power,
                    y_power: 2 * a_power - p,
                    word,
                });
        }
    }
    Ok(merged.into_values().filter(|t| !t.coefficient.is_zero()).collect())
}

/// Monomials of the order-p polynomial left after factoring out `exp(−aI_0X²)`, cached per p.
pub fn reduced_terms(p: usize) -> Result<Arc<Vec<ReducedTerm>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<ReducedTerm>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("cache poisoned").get(&p) {
        return Ok(t.clone());
    }
    let terms = Arc::new(build_reduced(p)?);
    Ok(cache.lock().expect("cache poisoned").entry(p).or_insert(terms).clone())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coefficients printed for p = 1 and p = 2, as `(a_power, word, coefficient)`.
pub fn published_terms(p: usize) -> Vec<(usize, Vec<u8>, BigRational)> {
    match p {
        1 => vec![(1, vec![1], q(3, 1)), (2, vec![1, 0], q(8, 1))],
        2 => vec![
            (1, vec![2], q(3, 4)),
            (2, vec![2, 0], q(30, 1)),
            (2, vec![1, 1], q(21, 1)),
            (3, vec![2, 0, 0], q(48, 1)),
            (3, vec![1, 1, 0], q(144, 1)),
            (3, vec![1, 0, 1], q(24, 1)),
            (4, vec![1, 0, 1, 0], q(64, 1)),
            (4, vec![1, 1, 0, 0], q(128, 1)),
        ],
        _ => vec![],
    }
}

/// Differences between the generated polynomial and the printed coefficient set.
pub fn published_mismatches(p: usize) -> Result<Vec<String>> {
    let generated = reduced_terms(p)?;
    let printed = published_terms(p);
    if printed.is_empty() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for (a_power, word, c) in &printed {
        match generated.iter().find(|t| &t.word == word) {
            Some(t) if &t.coefficient == c && t.a_power == *a_power => {}
            Some(t) => out.push(format!("p={p} word {word:?}: printed {c}, generated {}", t.coefficient)),
            None => out.push(format!("p={p} word {word:?}: printed {c}, generated 0")),
        }
    }
    for t in generated.iter() {
        if !printed.iter().any(|(_, w, _)| w == &t.word) {
            out.push(format!("p={p} word {:?}: printed 0, generated {}", t.word, t.coefficient));
        }
    }
    Ok(out)
}

struct Setup {
    integ: NestedIntegrator,
    y: f64,
    universal: f64,
    minus_a: f64,
    four_over_c: f64,
}

impl Setup {
    fn new(params: &ModelParams, policy: &TruncationPolicy) -> Result<Self> {
        let integ = NestedIntegrator::new(params, policy)?;
        let s_beta = integ.kernels().s_beta;
        Ok(Self {
            y: params.x_f * params.x_f / (s_beta * s_beta),
            universal: universal_exponent(params)?,
            minus_a: -params.a,
            four_over_c: 4.0 / params.c,
            integ,
        })
    }

    /// `(−a)^ν (4/c)^p Y^{2ν−p}`.
    fn weight(&self, nu: usize, p: usize) -> f64 {
        let yp = 2 * nu - p;
        let ypow = if yp == 0 { 1.0 } else { self.y.powi(yp as i32) };
        self.minus_a.powi(nu as i32) * self.four_over_c.powi(p as i32) * ypow
    }

    fn reduced_polynomial(&self, p: usize) -> Result<(f64, f64)> {
        let mut value = 0.0;
        let mut err = 0.0;
        for t in reduced_terms(p)?.iter() {
            let w = self.weight(t.a_power, p) * rational_to_f64(&t.coefficient);
            if w == 0.0 {
                continue;
            }
            let i = self.integ.scaled(&t.word, 0.0)?;
            value += w * i.value;
            err += w.abs() * i.error;
        }
        Ok((value, err))
    }
}

/// Contribution of one order p.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderContribution {
    pub p: usize,
    pub value: f64,
    pub tail_estimate: f64,
    /// Largest ν reached (direct path) or zero (resummed path).
    pub nu_last: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionSeries {
    pub value: f64,
    /// `exp(−aI_0X²)`, the summed p = 0 tower.
    pub exp_factor: f64,
    pub orders: Vec<OrderContribution>,
}

fn check_orders(policy: &TruncationPolicy) -> Result<()> {
    policy.validate()?;
    if policy.p_max > 2 * policy.poincare_order {
        return domain(format!(
            "p_max = {} exceeds 2𝒥 = {}",
            policy.p_max,
            2 * policy.poincare_order
        ));
    }
    Ok(())
}

/// Direct ν-by-ν evaluation of the correction factor, orders p = 0 … p_max.
pub fn correction_series(params: &ModelParams, policy: &TruncationPolicy) -> Result<CorrectionSeries> {
    check_orders(policy)?;
    let setup = Setup::new(params, policy)?;
    let exp_factor = setup.universal.exp();
    let mut value = exp_factor;
    let mut orders = Vec::new();
    for p in 1..=policy.p_max {
        let mut partial = 0.0;
        let mut last = [f64::INFINITY; 2];
        let mut quad_err = 0.0;
        let mut nu = p.div_ceil(2);
        let mut done = false;
        while nu <= NU_CAP {
            let w = setup.weight(nu, p);
            let mut contrib = 0.0;
            if w != 0.0 {
                for idx in enumerate_multi_indices(nu, p) {
                    let f = rational_to_f64(&f_product_exact(&idx));
                    if f == 0.0 {
                        continue;
                    }
                    let i = setup.integ.scaled(&idx.entries, 0.0)?;
                    contrib += f * i.value;
                    quad_err += (w * f).abs() * i.error;
                }
                contrib *= w;
            }
            partial += contrib;
            last = [last[1], contrib.abs()];
            let small = policy.quad_abs_tol * partial.abs();
            if (last[0] <= small && last[1] <= small) || (last[0] == 0.0 && last[1] == 0.0) {
                done = true;
                break;
            }
            nu += 1;
        }
        if !done {
            return Err(Error::Accuracy {
                detail: format!("ν-sum at p={p} not converged by ν={NU_CAP}"),
                achieved: last[1],
                requested: policy.quad_abs_tol * partial.abs(),
            });
        }
        value += partial;
        orders.push(OrderContribution {
            p,
            value: partial,
            tail_estimate: last[0] + last[1] + quad_err,
            nu_last: nu,
        });
    }
    Ok(CorrectionSeries {
        value,
        exp_factor,
        orders,
    })
}

/// p = 0: `exp(−aI_0(0)x_f⁴/Q⁴(β))`.
pub fn assembly_p0(params: &ModelParams) -> Result<f64> {
    Ok(universal_exponent(params)?.exp())
}

/// p = 1: `exp(…)·{−3aX I_1 + 8a²X³ I_{1,0}}`.
pub fn assembly_p1(params: &ModelParams, policy: &TruncationPolicy) -> Result<f64> {
    let s = Setup::new(params, policy)?;
    let i = |w: &[u8]| s.integ.scaled(w, 0.0).map(|v| v.value);
    let poly = 3.0 * s.weight(1, 1) * i(&[1])? + 8.0 * s.weight(2, 1) * i(&[1, 0])?;
    Ok(s.universal.exp() * poly)
}

/// p = 2 with the printed coefficient set {3/4, 30, 21, 48, 144, 24, 64, 2·64}.
pub fn assembly_p2(params: &ModelParams, policy: &TruncationPolicy) -> Result<f64> {
    let s = Setup::new(params, policy)?;
    let i = |w: &[u8]| s.integ.scaled(w, 0.0).map(|v| v.value);
    let poly = 0.75 * s.weight(1, 2) * i(&[2])?
        + s.weight(2, 2) * (30.0 * i(&[2, 0])? + 21.0 * i(&[1, 1])?)
        + s.weight(3, 2) * (48.0 * i(&[2, 0, 0])? + 144.0 * i(&[1, 1, 0])? + 24.0 * i(&[1, 0, 1])?)
        + 64.0 * s.weight(4, 2) * (i(&[1, 0, 1, 0])? + 2.0 * i(&[1, 1, 0, 0])?);
    Ok(s.universal.exp() * poly)
}

/// Harmonic kernel × universal exponential × order-p polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorResult {
    pub harmonic_prefactor: f64,
    pub harmonic_exponent: f64,
    pub universal_exponent: f64,
    pub polynomial_factor: f64,
    pub value: f64,
    pub truncation: TruncationPolicy,
    /// Per-order polynomial contributions with propagated quadrature error.
    pub diagnostics: Vec<OrderContribution>,
    /// Disagreements between generated and printed p ≤ 2 coefficients; empty when they match.
    pub coefficient_mismatches: Vec<String>,
}

pub fn full_propagator(params: &ModelParams, policy: &TruncationPolicy) -> Result<PropagatorResult> {
    check_orders(policy)?;
    let (pref, harm) = harmonic_fixed_origin(params)?;
    let mut poly = 1.0;
    let mut diagnostics = Vec::new();
    let mut universal = 0.0;
    if params.a != 0.0 {
        let setup = Setup::new(params, policy)?;
        universal = setup.universal;
        for p in 1..=policy.p_max {
            let (v, err) = setup.reduced_polynomial(p)?;
            poly += v;
            diagnostics.push(OrderContribution {
                p,
                value: v,
                tail_estimate: err,
                nu_last: 0,
            });
        }
    }
    let mut coefficient_mismatches = Vec::new();
    for p in 1..=policy.p_max.min(2) {
        coefficient_mismatches.extend(published_mismatches(p)?);
    }
    let value = if poly == 0.0 {
        0.0
    } else {
        poly.signum() * (pref.ln() + harm + universal + poly.abs().ln()).exp()
    };
    Ok(PropagatorResult {
        harmonic_prefactor: pref,
        harmonic_exponent: harm,
        universal_exponent: universal,
        polynomial_factor: poly,
        value,
        truncation: *policy,
        diagnostics,
        coefficient_mismatches,
    })
}

/// `(−a)`-power sum of the printed-or-generated polynomial, for inspection.
pub fn polynomial_by_power(params: &ModelParams, p: usize, policy: &TruncationPolicy) -> Result<Vec<(usize, f64)>> {
    let setup = Setup::new(params, policy)?;
    let mut by: BTreeMap<usize, f64> = BTreeMap::new();
    for t in reduced_terms(p)?.iter() {
        let i = setup.integ.scaled(&t.word, 0.0)?.value;
        let w = setup.four_over_c.powi(p as i32) * setup.y.powi(t.y_power as i32);
        *by.entry(t.a_power).or_default() += rational_to_f64(&t.coefficient) * w * i;
    }
    Ok(by.into_iter().collect())
}
