//! Votes, standard quotas and their fractional parts.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::ResidueProfile;
use crate::scalar::{format_fraction, Scalar};

/// Vote totals and a house size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVotes", into = "RawVotes")]
pub struct VoteProfile {
    votes: Vec<BigRational>,
    house_size: u64,
}

#[derive(Serialize, Deserialize)]
struct RawVotes {
    votes: Vec<Scalar>,
    house_size: u64,
}

impl TryFrom<RawVotes> for VoteProfile {
    type Error = Error;

    fn try_from(raw: RawVotes) -> Result<Self> {
        let votes = raw
            .votes
            .iter()
            .map(|v| crate::scalar::exact_or_err(v, "vote total"))
            .collect::<Result<Vec<_>>>()?;
        VoteProfile::new(votes, raw.house_size)
    }
}

impl From<VoteProfile> for RawVotes {
    fn from(v: VoteProfile) -> Self {
        RawVotes {
            votes: v.votes.into_iter().map(Scalar::Exact).collect(),
            house_size: v.house_size,
        }
    }
}

impl VoteProfile {
    pub fn new(votes: Vec<BigRational>, house_size: u64) -> Result<Self> {
        if votes.is_empty() {
            return Err(Error::invalid("at least one party is required"));
        }
        if house_size == 0 {
            return Err(Error::invalid("house size must be positive"));
        }
        if let Some(i) = votes.iter().position(|v| v.is_negative()) {
            return Err(Error::invalid(format!(
                "party {} has negative vote total {}",
                i + 1,
                format_fraction(&votes[i])
            )));
        }
        if votes.iter().all(Zero::is_zero) {
            return Err(Error::invalid("all vote totals are zero"));
        }
        Ok(VoteProfile { votes, house_size })
    }

    pub fn from_integers(votes: &[i64], house_size: u64) -> Result<Self> {
        Self::new(
            votes
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
            house_size,
        )
    }

    pub fn votes(&self) -> &[BigRational] {
        &self.votes
    }

    pub fn house_size(&self) -> u64 {
        self.house_size
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    /// The same votes with every total multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &BigRational) -> Result<Self> {
        Self::new(
            self.votes.iter().map(|v| v * factor).collect(),
            self.house_size,
        )
    }
}

/// Standard quotas of a vote profile and their split into integer and
/// fractional parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaBreakdown {
    pub quotas: Vec<BigRational>,
    pub lower_quotas: Vec<u64>,
    pub residues: ResidueProfile,
    pub k: usize,
}

impl QuotaBreakdown {
    pub fn n(&self) -> usize {
        self.quotas.len()
    }

    pub fn house_size(&self) -> u64 {
        self.lower_quotas.iter().sum::<u64>() + self.k as u64
    }
}

/// Computes `q_i = h·v_i / Σ v_j` exactly, with floors and residues.
pub fn compute_quotas(votes: &VoteProfile) -> QuotaBreakdown {
    let total: BigRational = votes.votes.iter().sum();
    let h = BigRational::from_integer(votes.house_size.into());
    let quotas: Vec<BigRational> = votes.votes.iter().map(|v| &h * v / &total).collect();
    let lower_quotas: Vec<u64> = quotas
        .iter()
        .map(|q| q.floor().to_integer().to_u64().expect("quota at most h"))
        .collect();
    let residues = ResidueProfile::new(quotas.iter().map(|q| q - q.floor()).collect())
        .expect("fractional parts of quotas summing to h form a valid profile");
    let k = residues.k();
    debug_assert_eq!(lower_quotas.iter().sum::<u64>() + k as u64, votes.house_size);
    QuotaBreakdown {
        quotas,
        lower_quotas,
        residues,
        k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn previous_election_quotas() {
        let v = VoteProfile::from_integers(&[110, 270, 210, 160, 70, 280], 11).unwrap();
        let q = compute_quotas(&v);
        assert_eq!(
            q.quotas,
            vec![r(11, 10), r(27, 10), r(21, 10), r(16, 10), r(7, 10), r(28, 10)]
        );
        assert_eq!(q.lower_quotas, vec![1, 2, 2, 1, 0, 2]);
        assert_eq!(
            q.residues.residues(),
            &[r(1, 10), r(7, 10), r(1, 10), r(6, 10), r(7, 10), r(8, 10)]
        );
        assert_eq!(q.k, 3);
        assert_eq!(q.house_size(), 11);
    }

    #[test]
    fn integral_quotas_have_no_residue() {
        let q = compute_quotas(&VoteProfile::from_integers(&[1, 1], 2).unwrap());
        assert_eq!(q.lower_quotas, vec![1, 1]);
        assert_eq!(q.k, 0);
    }

    #[test]
    fn four_party_residues() {
        let q = compute_quotas(&VoteProfile::from_integers(&[380, 140, 140, 140], 8).unwrap());
        assert_eq!(q.residues.residues(), &[r(4, 5), r(2, 5), r(2, 5), r(2, 5)]);
        assert_eq!(q.k, 2);
    }

    #[test]
    fn rejects_degenerate_votes() {
        assert!(VoteProfile::from_integers(&[0, 0], 3).is_err());
        assert!(VoteProfile::from_integers(&[1, -1], 3).is_err());
        assert!(VoteProfile::from_integers(&[1, 1], 0).is_err());
        assert!(VoteProfile::from_integers(&[], 1).is_err());
    }

    #[test]
    fn serde_uses_exact_strings() {
        let v = VoteProfile::new(vec![r(1, 3), r(2, 1)], 5).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"{"votes":["1/3","2"],"house_size":5}"#);
        let back: VoteProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<VoteProfile>(r#"{"votes":[0],"house_size":5}"#).is_err());
    }
}
