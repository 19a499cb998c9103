//! Exact shuffle identities for ordered nested integrals.
//!
//! Words are index sequences `(m_1 … m_n)`; a combination is a finite rational sum of words.

use crate::correction::NestedIntegrator;
use crate::error::{domain, Result};
use crate::lattice::ModelParams;
use crate::specfun::{binomial_exact, factorial_exact, rational_to_f64, TruncationPolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexWord {
    pub letters: Vec<u8>,
}

impl IndexWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.iter().any(|&m| m > 4) {
            return domain("letters must lie in 0..=4");
        }
        Ok(Self { letters })
    }

    pub fn repeated(a: u8, n: usize) -> Result<Self> {
        Self::new(vec![a; n])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Canonical rational combination: words sorted, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntegralCombination {
    terms: BTreeMap<IndexWord, BigRational>,
}

impl IntegralCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(word: IndexWord, coefficient: BigRational) -> Self {
        let mut c = Self::new();
        c.add_term(word, coefficient);
        c
    }

    pub fn add_term(&mut self, word: IndexWord, coefficient: BigRational) {
        let entry = self.terms.entry(word).or_insert_with(BigRational::zero);
        *entry += coefficient;
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let mut out = Self::new();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * k);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexWord, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &IndexWord) -> BigRational {
        self.terms.get(word).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `I_m · I_{b}` as the sum of all insertions of the letter m into b.
pub fn shuffle_pair(a_word: &IndexWord, b_word: &IndexWord) -> Result<IntegralCombination> {
    if a_word.len() != 1 {
        return domain("shuffle_pair inserts a single letter");
    }
    let m = a_word.letters[0];
    let mut out = IntegralCombination::new();
    for pos in 0..=b_word.len() {
        let mut w = b_word.letters.clone();
        w.insert(pos, m);
        out.add_term(IndexWord { letters: w }, BigRational::one());
    }
    Ok(out)
}

/// All order-preserving placements of the two letters of `pair` into `b`, as position counts.
pub fn ordered_pair_placements(pair: &IndexWord, b_word: &IndexWord) -> Result<Vec<IndexWord>> {
    if pair.len() != 2 {
        return domain("ordered_pair_placements needs a two-letter word");
    }
    let n = b_word.len() + 2;
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut rest = b_word.letters.iter();
            let w: Vec<u8> = (0..n)
                .map(|i| {
                    if i == j {
                        pair.letters[0]
                    } else if i == k {
                        pair.letters[1]
                    } else {
                        *rest.next().expect("length matches")
                    }
                })
                .collect();
            out.push(IndexWord { letters: w });
        }
    }
    Ok(out)
}

/// Left-hand sides `I_{pattern}·I_{a…a}` of the zero-padded product identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroPattern {
    /// `I_{α,a}`
    AlphaA { alpha: u8, a: u8 },
    /// `I_{α,a,a}`
    AlphaAA { alpha: u8, a: u8 },
    /// `I_{α,a,β}`
    AlphaABeta { alpha: u8, beta: u8, a: u8 },
    /// `I_{α,β,a}`
    AlphaBetaA { alpha: u8, beta: u8, a: u8 },
    /// `I_{α,a,γ,a}`
    AlphaAGammaA { alpha: u8, gamma: u8, a: u8 },
    /// `I_{α,β,a,a}`
    AlphaBetaAA { alpha: u8, beta: u8, a: u8 },
}

impl ZeroPattern {
    fn head(&self) -> Vec<u8> {
        match *self {
            Self::AlphaA { alpha, a } => vec![alpha, a],
            Self::AlphaAA { alpha, a } => vec![alpha, a, a],
            Self::AlphaABeta { alpha, beta, a } => vec![alpha, a, beta],
            Self::AlphaBetaA { alpha, beta, a } => vec![alpha, beta, a],
            Self::AlphaAGammaA { alpha, gamma, a } => vec![alpha, a, gamma, a],
            Self::AlphaBetaAA { alpha, beta, a } => vec![alpha, beta, a, a],
        }
    }

    fn filler(&self) -> u8 {
        match *self {
            Self::AlphaA { a, .. }
            | Self::AlphaAA { a, .. }
            | Self::AlphaABeta { a, .. }
            | Self::AlphaBetaA { a, .. }
            | Self::AlphaAGammaA { a, .. }
            | Self::AlphaBetaAA { a, .. } => a,
        }
    }

    /// The two factors of the product, with total length n.
    pub fn lhs_words(&self, n: usize) -> Result<(IndexWord, IndexWord)> {
        let head = self.head();
        if n < head.len() {
            return domain(format!("n = {n} is shorter than the pattern"));
        }
        let tail = n - head.len();
        Ok((IndexWord::new(head)?, IndexWord::repeated(self.filler(), tail)?))
    }
}

/// Word `a…a α_i a…a γ_k a…a` of length n (1-based positions, `k = 0` for none).
fn placed(n: usize, a: u8, first: (usize, u8), second: Option<(usize, u8)>) -> IndexWord {
    let mut w = vec![a; n];
    w[first.0 - 1] = first.1;
    if let Some((k, l)) = second {
        w[k - 1] = l;
    }
    IndexWord { letters: w }
}

fn choose2(n: i64) -> BigRational {
    if n < 2 {
        int(0)
    } else {
        BigRational::from_integer(binomial_exact(n as usize, 2))
    }
}

/// Right-hand side of `I_{pattern}·I_{a…a}` with the displayed integer weights.
pub fn reduce_against_zeros(pattern: ZeroPattern, n: usize) -> Result<IntegralCombination> {
    pattern.lhs_words(n)?;
    let ni = n as i64;
    let mut out = IntegralCombination::new();
    match pattern {
        ZeroPattern::AlphaA { alpha, a } => {
            for j in 1..=n {
                out.add_term(placed(n, a, (j, alpha), None), int(ni - j as i64));
            }
        }
        ZeroPattern::AlphaAA { alpha, a } => {
            for i in 1..=n {
                out.add_term(placed(n, a, (i, alpha), None), choose2(ni - i as i64));
            }
        }
        ZeroPattern::AlphaABeta { alpha, beta, a } => {
            for j in 1..n {
                for l in j + 1..=n {
                    out.add_term(placed(n, a, (j, alpha), Some((l, beta))), int(l as i64 - 1 - j as i64));
                }
            }
        }
        ZeroPattern::AlphaBetaA { alpha, beta, a } => {
            for j in 1..n {
                for k in j + 1..=n {
                    out.add_term(placed(n, a, (j, alpha), Some((k, beta))), int(ni - k as i64));
                }
            }
        }
        ZeroPattern::AlphaAGammaA { alpha, gamma, a } => {
            for i in 1..n {
                for k in i + 1..=n {
                    let (i, k) = (i as i64, k as i64);
                    let w = (ni - k) * (ni - i - 2) - (ni - k) * (ni - k - 1);
                    out.add_term(placed(n, a, (i as usize, alpha), Some((k as usize, gamma))), int(w));
                }
            }
        }
        ZeroPattern::AlphaBetaAA { alpha, beta, a } => {
            for i in 1..n {
                for j in i + 1..=n {
                    out.add_term(placed(n, a, (i, alpha), Some((j, beta))), choose2(ni - j as i64));
                }
            }
        }
    }
    Ok(out)
}

/// `I_{a…a}(n) = I_a^n / n!`: returns the single-word combination and the factor `1/n!`.
pub fn repeated_word(a: u8, n: usize) -> Result<(IntegralCombination, BigRational)> {
    let word = IndexWord::repeated(a, n)?;
    Ok((
        IntegralCombination::single(word, BigRational::one()),
        BigRational::new(BigInt::one(), factorial_exact(n)),
    ))
}

/// `Σ coefficient · I_word(τ)`.
pub fn evaluate_combination(
    comb: &IntegralCombination,
    tau: f64,
    params: &ModelParams,
    policy: &TruncationPolicy,
) -> Result<f64> {
    if comb.is_empty() {
        return Ok(0.0);
    }
    let integ = NestedIntegrator::new(params, policy)?;
    evaluate_with(comb, tau, &integ)
}

/// Same as [`evaluate_combination`] with a caller-owned integrator, so caches are shared.
pub fn evaluate_with(comb: &IntegralCombination, tau: f64, integ: &NestedIntegrator) -> Result<f64> {
    let mut s = 0.0;
    for (w, c) in comb.terms() {
        s += rational_to_f64(c) * integ.physical(&w.letters, tau)?.value;
    }
    Ok(s)
}
