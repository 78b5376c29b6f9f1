//! Independent Bernoulli trials and the distribution of their success count.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::residue::ResidueProfile;

/// Distribution of `|B|` where `B` contains each party independently with
/// probability `p_i`, optionally leaving out two parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoissonTrialStats {
    /// `pmf[l] = P[|B| = l]` for `l = 0..=n`.
    #[serde(serialize_with = "crate::serde_util::rationals")]
    pub pmf: Vec<BigRational>,
    /// 0-based parties left out of the trial.
    pub excluded: Option<(usize, usize)>,
}

impl PoissonTrialStats {
    pub fn prob(&self, count: usize) -> BigRational {
        self.pmf.get(count).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mean(&self) -> BigRational {
        self.pmf
            .iter()
            .enumerate()
            .map(|(l, q)| q * BigRational::from_integer(l.into()))
            .sum()
    }

    /// `E[1{|B|<k}·(k − |B|)]`.
    pub fn truncated_deficit(&self, k: usize) -> BigRational {
        self.pmf
            .iter()
            .enumerate()
            .take(k)
            .map(|(l, q)| q * BigRational::from_integer((k - l).into()))
            .sum()
    }

    /// `E[| |B| − k |]`.
    pub fn abs_deviation(&self, k: usize) -> BigRational {
        self.pmf
            .iter()
            .enumerate()
            .map(|(l, q)| q * BigRational::from_integer((l as i64 - k as i64).abs().into()))
            .sum()
    }
}

/// Coefficients of `Π_i ((D − a_i) + a_i·x)`.
///
/// With `p_i = a_i / D` the `l`-th coefficient divided by `D^m` is the
/// probability of exactly `l` successes among the `m` trials.
pub fn bernoulli_polynomial<'a, I>(denominator: &BigInt, numerators: I) -> Vec<BigInt>
where
    I: IntoIterator<Item = &'a BigInt>,
{
    let mut coeffs = vec![BigInt::one()];
    for a in numerators {
        let fail = denominator - a;
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (l, c) in coeffs.iter().enumerate() {
            if !fail.is_zero() {
                next[l] += c * &fail;
            }
            if !a.is_zero() {
                next[l + 1] += c * a;
            }
        }
        coeffs = next;
    }
    coeffs
}

/// Success-count distribution for arbitrary rational success probabilities.
pub fn success_count_pmf(probs: &[BigRational]) -> Vec<BigRational> {
    let mut pmf = vec![BigRational::one()];
    for p in probs {
        let q = BigRational::one() - p;
        let mut next = vec![BigRational::zero(); pmf.len() + 1];
        for (l, c) in pmf.iter().enumerate() {
            next[l] += c * &q;
            next[l + 1] += c * p;
        }
        pmf = next;
    }
    pmf
}

/// Distribution of `|B|`, or of `|B̂|` when `exclude` names two parties.
pub fn poisson_binomial(
    p: &ResidueProfile,
    exclude: Option<(usize, usize)>,
) -> Result<PoissonTrialStats> {
    if let Some((i, j)) = exclude {
        if i == j || i >= p.n() || j >= p.n() {
            return Err(Error::invalid(format!(
                "excluded parties must be two distinct indices in 1..={}",
                p.n()
            )));
        }
    }
    let (d, nums) = p.common_denominator();
    let kept: Vec<&BigInt> = nums
        .iter()
        .enumerate()
        .filter(|(i, _)| exclude.is_none_or(|(a, b)| *i != a && *i != b))
        .map(|(_, a)| a)
        .collect();
    let m = kept.len();
    let coeffs = bernoulli_polynomial(&d, kept);
    let scale = num_traits::pow(d, m);
    let mut pmf: Vec<BigRational> = coeffs
        .into_iter()
        .map(|c| BigRational::new(c, scale.clone()))
        .collect();
    pmf.resize(p.n() + 1, BigRational::zero());
    Ok(PoissonTrialStats { pmf, excluded: exclude })
}

/// `E[1{|B|<k}·(k − |B|)]`, which also equals `½·E[| |B| − k |]`.
pub fn truncated_deficit(p: &ResidueProfile) -> BigRational {
    let stats = poisson_binomial(p, None).expect("no exclusion");
    let value = stats.truncated_deficit(p.k());
    debug_assert_eq!(
        &value * BigRational::from_integer(2.into()),
        stats.abs_deviation(p.k())
    );
    debug_assert!(!value.is_negative());
    value
}
