use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, FLOAT_SLACK};
use crate::subset::Subset;

/// Probability mass over the `k`-subsets of `n` parties.
///
/// Only subsets with positive mass are stored; keys iterate in colex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSubsetDistribution {
    pub n: usize,
    pub k: usize,
    pub masses: BTreeMap<Subset, Scalar>,
}

impl KSubsetDistribution {
    pub fn empty(n: usize, k: usize) -> Self {
        KSubsetDistribution {
            n,
            k,
            masses: BTreeMap::new(),
        }
    }

    /// The distribution putting all mass on `set`.
    pub fn point(n: usize, set: Subset) -> Self {
        let mut d = Self::empty(n, set.len());
        d.masses.insert(set, Scalar::one());
        d
    }

    /// Builds a distribution from exact masses, dropping zeros.
    pub fn from_exact<I>(n: usize, k: usize, masses: I) -> Self
    where
        I: IntoIterator<Item = (Subset, BigRational)>,
    {
        let mut d = Self::empty(n, k);
        for (s, m) in masses {
            if !m.is_zero() {
                d.add(s, Scalar::Exact(m));
            }
        }
        d
    }

    /// Adds `mass` to `set`.
    pub fn add(&mut self, set: Subset, mass: Scalar) {
        debug_assert_eq!(set.len(), self.k);
        match self.masses.get_mut(&set) {
            Some(m) => *m = m.clone() + mass,
            None => {
                self.masses.insert(set, mass);
            }
        }
    }

    pub fn prob(&self, set: Subset) -> Scalar {
        self.masses.get(&set).cloned().unwrap_or_else(Scalar::zero)
    }

    /// `P[S ⊇ T]`.
    pub fn prob_superset(&self, coalition: Subset) -> Scalar {
        self.masses
            .iter()
            .filter(|(s, _)| coalition.is_subset_of(**s))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn total(&self) -> Scalar {
        self.masses.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = Subset> + '_ {
        self.masses.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_exact(&self) -> bool {
        self.masses.values().all(Scalar::is_exact)
    }

    /// Inclusion probability of every party.
    pub fn marginals(&self) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.n];
        for (s, m) in &self.masses {
            for i in s.iter() {
                out[i] = out[i].clone() + m;
            }
        }
        out
    }

    /// Joint inclusion probability of parties `i` and `j`.
    pub fn pair_marginal(&self, i: usize, j: usize) -> Scalar {
        self.prob_superset(Subset::from_indices([i, j]))
    }

    /// Largest absolute gap between the marginals and `targets`.
    pub fn marginal_error(&self, targets: &[BigRational]) -> Scalar {
        self.marginals()
            .into_iter()
            .zip(targets)
            .map(|(m, t)| (m - Scalar::Exact(t.clone())).abs())
            .fold(Scalar::zero(), |acc, x| if x > acc { x } else { acc })
    }

    /// Checks that masses are nonnegative and sum to one.
    pub fn check_normalized(&self) -> Result<()> {
        if self.masses.values().any(Scalar::is_negative) {
            return Err(Error::invalid("negative probability mass"));
        }
        let total = self.total();
        let ok = if total.is_exact() {
            total == Scalar::one()
        } else {
            (total - Scalar::one()).abs().to_f64() <= FLOAT_SLACK
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("masses sum to {}", self.total())))
        }
    }

    /// Relabels parties: local party `i` becomes party `positions[i]` among `n`.
    pub fn embed(&self, positions: &[usize], n: usize) -> Self {
        let masses = self
            .masses
            .iter()
            .map(|(s, m)| (Subset::from_indices(s.iter().map(|i| positions[i])), m.clone()))
            .collect();
        KSubsetDistribution {
            n,
            k: self.k,
            masses,
        }
    }

    /// Uniform mixture of distributions over the same `n` and `k`.
    pub fn average(parts: &[KSubsetDistribution]) -> Self {
        assert!(!parts.is_empty());
        let weight = Scalar::ratio(1, parts.len() as i64);
        let mut out = Self::empty(parts[0].n, parts[0].k);
        for part in parts {
            for (s, m) in &part.masses {
                out.add(*s, m.clone() * &weight);
            }
        }
        out
    }

    /// Distribution of the image of the selected set under `f`, for maps that
    /// preserve set size.
    pub fn map_sets(&self, f: impl Fn(Subset) -> Subset) -> Self {
        let mut out = Self::empty(self.n, self.k);
        for (s, m) in &self.masses {
            out.add(f(*s), m.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginals_and_serialization() {
        let mut d = KSubsetDistribution::empty(3, 2);
        d.add(Subset::from_labels([1, 2]), Scalar::ratio(1, 4));
        d.add(Subset::from_labels([2, 3]), Scalar::ratio(3, 4));
        assert_eq!(
            d.marginals(),
            vec![Scalar::ratio(1, 4), Scalar::one(), Scalar::ratio(3, 4)]
        );
        assert!(d.check_normalized().is_ok());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"n":3,"k":2,"masses":{"{1,2}":"1/4","{2,3}":"3/4"}}"#);
        let back: KSubsetDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn embedding_relabels_parties() {
        let d = KSubsetDistribution::point(2, Subset::from_labels([2]));
        let e = d.embed(&[0, 3], 5);
        assert_eq!(e.prob(Subset::from_labels([4])), Scalar::one());
    }
}
