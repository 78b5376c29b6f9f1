//! Target inclusion probabilities for a rounding rule.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_fraction, Scalar};
use crate::subset::{Subset, MAX_PARTIES};

/// How far a float-mode residue sum may stray from an integer before it is
/// rejected rather than renormalized.
pub const RESIDUE_SUM_TOLERANCE: f64 = 1e-9;

/// A vector `p` in `[0,1)^n` whose entries sum to the integer `k`.
///
/// Entries are always stored exactly. Float input is converted to the exact
/// dyadic value it represents and renormalized so the sum is exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueProfile {
    residues: Vec<BigRational>,
    k: usize,
}

impl ResidueProfile {
    /// Builds a profile from exact rationals.
    pub fn new(residues: Vec<BigRational>) -> Result<Self> {
        if residues.len() > MAX_PARTIES {
            return Err(Error::invalid(format!(
                "{} parties exceeds the supported maximum of {MAX_PARTIES}",
                residues.len()
            )));
        }
        for (i, p) in residues.iter().enumerate() {
            if p.is_negative() || *p >= BigRational::one() {
                return Err(Error::ResidueOutOfRange {
                    party: i + 1,
                    value: format_fraction(p),
                });
            }
        }
        let sum: BigRational = residues.iter().sum();
        if !sum.is_integer() {
            return Err(Error::NonIntegralSum {
                sum: format_fraction(&sum),
            });
        }
        let k = sum.to_integer().to_usize().expect("sum bounded by n");
        Ok(ResidueProfile { residues, k })
    }

    /// Builds a profile from `(numerator, denominator)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(a, b)| BigRational::new(a.into(), b.into()))
                .collect(),
        )
    }

    /// Builds a profile from numerators over one common denominator.
    pub fn from_numerators(numerators: &[i64], denominator: i64) -> Result<Self> {
        Self::new(
            numerators
                .iter()
                .map(|&a| BigRational::new(a.into(), denominator.into()))
                .collect(),
        )
    }

    /// Parses a comma-separated list such as `0.1,0.7,1/3`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|x| x.trim().parse::<Scalar>())
            .collect::<Result<Vec<_>>>()?;
        validate_residues(&values)
    }

    pub fn n(&self) -> usize {
        self.residues.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn residues(&self) -> &[BigRational] {
        &self.residues
    }

    pub fn get(&self, i: usize) -> &BigRational {
        &self.residues[i]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.residues
            .iter()
            .map(crate::scalar::rational_to_f64)
            .collect()
    }

    /// Parties with positive residue.
    pub fn positive(&self) -> Subset {
        Subset::from_indices((0..self.n()).filter(|&i| self.residues[i].is_positive()))
    }

    /// `Σ_{i∈T} (1 − p_i)`.
    pub fn deficit(&self, coalition: Subset) -> BigRational {
        coalition
            .iter()
            .map(|i| BigRational::one() - &self.residues[i])
            .sum()
    }

    /// The `k` parties with largest residues, ties broken by lower index.
    pub fn top_k(&self) -> Subset {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.residues[b].cmp(&self.residues[a]).then(a.cmp(&b)));
        Subset::from_indices(idx.into_iter().take(self.k))
    }

    /// `s = Σ_{i∈[k]} (1 − p_i)` where `[k]` are the `k` largest residues.
    pub fn s(&self) -> BigRational {
        self.deficit(self.top_k())
    }

    /// Least common denominator `D` and numerators `a_i` with `p_i = a_i / D`.
    pub fn common_denominator(&self) -> (BigInt, Vec<BigInt>) {
        let d = self
            .residues
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let nums = self
            .residues
            .iter()
            .map(|p| p.numer() * (&d / p.denom()))
            .collect();
        (d, nums)
    }

    /// The profile with party `order[j]` moved to position `j`.
    pub fn reordered(&self, order: &[usize]) -> ResidueProfile {
        ResidueProfile {
            residues: order.iter().map(|&i| self.residues[i].clone()).collect(),
            k: self.k,
        }
    }

    /// Replaces entries; fails unless the result is a valid profile.
    pub fn with_values(&self, changes: &[(usize, BigRational)]) -> Result<ResidueProfile> {
        let mut residues = self.residues.clone();
        for (i, v) in changes {
            residues[*i] = v.clone();
        }
        ResidueProfile::new(residues)
    }
}

/// Checks raw residues and builds a profile.
///
/// Exact input must sum to an integer. If any entry is a float, a sum within
/// [`RESIDUE_SUM_TOLERANCE`] of an integer is renormalized proportionally.
pub fn validate_residues(raw: &[Scalar]) -> Result<ResidueProfile> {
    for (i, v) in raw.iter().enumerate() {
        if v.is_negative() || *v >= Scalar::one() {
            return Err(Error::ResidueOutOfRange {
                party: i + 1,
                value: v.to_string(),
            });
        }
    }
    let values: Vec<BigRational> = raw.iter().map(Scalar::to_exact).collect();
    if raw.iter().all(Scalar::is_exact) {
        return ResidueProfile::new(values);
    }
    let sum: BigRational = values.iter().sum();
    let target = sum.round();
    let gap = crate::scalar::rational_to_f64(&(&sum - &target).abs());
    if gap > RESIDUE_SUM_TOLERANCE {
        return Err(Error::NonIntegralSum {
            sum: crate::scalar::format_scientific(&sum, 17),
        });
    }
    let renormalized = if sum.is_zero() || target.is_zero() {
        vec![BigRational::zero(); values.len()]
    } else {
        let factor = &target / &sum;
        values.iter().map(|v| v * &factor).collect()
    };
    ResidueProfile::new(renormalized)
}

impl fmt::Display for ResidueProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(format_fraction).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for ResidueProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResidueProfile{self} k={}", self.k)
    }
}

impl Serialize for ResidueProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let values: Vec<String> = self.residues.iter().map(format_fraction).collect();
        values.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ResidueProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<Scalar>::deserialize(deserializer)?;
        validate_residues(&values).map_err(serde::de::Error::custom)
    }
}
