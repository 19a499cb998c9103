//! Multi-indices and the Σ / F algebraic factors of the correction series.

use crate::error::{domain, Result};
use crate::specfun::{binomial_exact, rational_to_f64};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Ordered indices `(m_1 … m_ν)` with `0 ≤ m_j ≤ 4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub entries: Vec<u8>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if entries.iter().any(|&m| m > 4) {
            return domain("multi-index entries must lie in 0..=4");
        }
        Ok(Self { entries })
    }

    pub fn nu(&self) -> usize {
        self.entries.len()
    }

    pub fn p(&self) -> usize {
        self.entries.iter().map(|&m| m as usize).sum()
    }

    /// `x_j = 2(ν−j) − p_j` for each 1-based slot j, with `p_j = p − m_1 − … − m_j`.
    pub fn slot_arguments(&self) -> Vec<i64> {
        let nu = self.nu() as i64;
        let mut rest = self.p() as i64;
        self.entries
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                rest -= m as i64;
                2 * (nu - i as i64 - 1) - rest
            })
            .collect()
    }
}

/// All multi-indices of length ν with entry sum p, in lexicographic order.
pub fn enumerate_multi_indices(nu: usize, p: usize) -> Vec<MultiIndex> {
    fn rec(slot: usize, nu: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
        if slot == nu {
            if left == 0 {
                out.push(MultiIndex { entries: cur.clone() });
            }
            return;
        }
        let room = 4 * (nu - slot - 1);
        for m in 0..=left.min(4) {
            if left - m > room {
                continue;
            }
            cur.push(m as u8);
            rec(slot + 1, nu, left - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= 4 * nu {
        rec(0, nu, p, &mut Vec::with_capacity(nu), &mut out);
    }
    out
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn falling(x: &BigRational, k: usize) -> BigRational {
    let mut r = BigRational::one();
    for t in 0..k {
        r *= x - q(t as i64, 1);
    }
    r
}

/// Σ(m, x) from its defining sum `Σ_{α=max(2,m)}^{4} c_α C(α,m) Γ(x+1)/Γ(x−α+3)`.
pub fn sigma_exact(m: usize, x: i64) -> Result<BigRational> {
    if m > 4 {
        return domain("Σ needs 0 ≤ m ≤ 4");
    }
    let c = [q(3, 4), q(3, 1), q(1, 1)];
    let xr = q(x, 1);
    let mut s = BigRational::zero();
    for alpha in m.max(2)..=4 {
        s += &c[alpha - 2] * BigRational::from(binomial_exact(alpha, m)) * falling(&xr, alpha - 2);
    }
    Ok(s)
}

/// Σ(m, x) from the tabulated closed rows.
pub fn sigma_table_exact(m: usize, x: i64) -> Result<BigRational> {
    let x = q(x, 1);
    Ok(match m {
        0 => (&x + q(1, 2)) * (&x + q(3, 2)),
        1 => q(4, 1) * (&x + q(1, 2)) * (&x + q(3, 4)),
        2 => q(6, 1) * &x * (&x - q(1, 1)) + q(9, 1) * &x + q(3, 4),
        3 => q(4, 1) * (&x - q(1, 4)) * &x,
        4 => (&x - q(1, 1)) * &x,
        _ => return domain("Σ needs 0 ≤ m ≤ 4"),
    })
}

/// Σ(m_j, j, p_j) at `x = 2(ν−j) − p_j`.
pub fn sigma_factor(m: usize, j: usize, p_j: usize, nu: usize) -> Result<f64> {
    let x = 2 * (nu as i64 - j as i64) - p_j as i64;
    Ok(rational_to_f64(&sigma_exact(m, x)?))
}

/// F(m, x) from the rows of the algebraic-factor table; m = 2 uses `6[(x+1/4)² + 1/16]`.
pub fn f_exact(m: usize, x: i64) -> Result<BigRational> {
    let x = q(x, 1);
    Ok(match m {
        1 => q(4, 1) * (&x + q(3, 4)),
        2 => {
            let t = &x + q(1, 4);
            q(6, 1) * (&t * &t + q(1, 16))
        }
        3 => q(4, 1) * &x * (&x - q(1, 2)) * (&x - q(1, 4)),
        4 => &x * (&x - q(1, 1)) * (&x - q(1, 2)) * (&x - q(3, 2)),
        0 => return domain("F is defined for nonzero m only"),
        _ => return domain("F needs 1 ≤ m ≤ 4"),
    })
}

/// F(j_i, m, p_{j_i}) at `x = 2(ν−j_i) − p_{j_i}`.
pub fn f_factor(m: usize, j: usize, p_j: usize, nu: usize) -> Result<f64> {
    let x = 2 * (nu as i64 - j as i64) - p_j as i64;
    Ok(rational_to_f64(&f_exact(m, x)?))
}

/// `(1/2)_n` for any integer n, negative n meaning `Γ(1/2+n)/Γ(1/2)`.
pub fn half_pochhammer_signed(n: i64) -> BigRational {
    let half = q(1, 2);
    let mut r = BigRational::one();
    if n >= 0 {
        for k in 0..n {
            r *= &half + q(k, 1);
        }
    } else {
        for k in 1..=(-n) {
            r /= &half - q(k, 1);
        }
    }
    r
}

/// `Π_{nonzero m} F` for a whole multi-index.
pub fn f_product_exact(idx: &MultiIndex) -> BigRational {
    idx.entries
        .iter()
        .zip(idx.slot_arguments())
        .filter(|(&m, _)| m != 0)
        .map(|(&m, x)| f_exact(m as usize, x).expect("1 ≤ m ≤ 4"))
        .fold(BigRational::one(), |acc, f| acc * f)
}

/// `Π_j Σ(m_j, j, p_j)` for a whole multi-index.
pub fn sigma_product_exact(idx: &MultiIndex) -> BigRational {
    idx.entries
        .iter()
        .zip(idx.slot_arguments())
        .map(|(&m, x)| sigma_exact(m as usize, x).expect("m ≤ 4"))
        .fold(BigRational::one(), |acc, s| acc * s)
}
