//! Apportionment methods induced by rounding rules: every party gets its
//! lower quota, and the rounding rule decides which parties get one more seat.

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quota::{compute_quotas, QuotaBreakdown, VoteProfile};
use crate::rules::{KSubsetDistribution, Rule};
use crate::scalar::Scalar;
use crate::subset::Subset;

/// Distribution of seat vectors of an induced apportionment method.
#[derive(Clone, Debug)]
pub struct SeatDistribution {
    pub quota: QuotaBreakdown,
    pub rounding: KSubsetDistribution,
}

impl SeatDistribution {
    pub fn new(quota: QuotaBreakdown, rounding: KSubsetDistribution) -> Self {
        debug_assert_eq!(quota.n(), rounding.n);
        debug_assert_eq!(quota.k, rounding.k);
        SeatDistribution { quota, rounding }
    }

    pub fn n(&self) -> usize {
        self.quota.n()
    }

    pub fn house_size(&self) -> u64 {
        self.quota.house_size()
    }

    /// Lower quotas plus one seat for every party in `set`.
    pub fn seat_vector(&self, set: Subset) -> Vec<u64> {
        self.quota
            .lower_quotas
            .iter()
            .enumerate()
            .map(|(i, l)| l + set.contains(i) as u64)
            .collect()
    }

    /// Seat vectors with positive probability, in colex order of the
    /// rounded-up sets.
    pub fn masses(&self) -> impl Iterator<Item = (Vec<u64>, &Scalar)> + '_ {
        self.rounding
            .masses
            .iter()
            .map(|(s, m)| (self.seat_vector(*s), m))
    }

    pub fn prob(&self, seats: &[u64]) -> Scalar {
        let lower = &self.quota.lower_quotas;
        if seats.len() != lower.len() {
            return Scalar::zero();
        }
        let mut set = Subset::EMPTY;
        for (i, (&s, &l)) in seats.iter().zip(lower).enumerate() {
            match s.checked_sub(l) {
                Some(0) => {}
                Some(1) => set = set.insert(i),
                _ => return Scalar::zero(),
            }
        }
        self.rounding.prob(set)
    }

    /// Expected number of seats of every party.
    pub fn expected_seats(&self) -> Vec<Scalar> {
        self.rounding
            .marginals()
            .into_iter()
            .zip(&self.quota.lower_quotas)
            .map(|(m, &l)| m + Scalar::from_int(l as i64))
            .collect()
    }

    /// `P[Σ_{i∈T} α_i = s]` for `s = 0..=h`.
    pub fn coalition_seat_pmf(&self, coalition: Subset) -> Vec<Scalar> {
        coalition_seat_pmf(&self.rounding, &self.quota.lower_quotas, coalition, self.house_size())
    }

    /// `P[Σ_{i∈T} α_i ≥ θ]` for `θ = 0..=h+1`.
    pub fn coalition_tails(&self, coalition: Subset) -> Vec<Scalar> {
        tails(&self.coalition_seat_pmf(coalition))
    }
}

impl Serialize for SeatDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Entries<'a>(&'a SeatDistribution);
        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                #[derive(Serialize)]
                struct Entry<'a> {
                    seats: Vec<u64>,
                    probability: &'a Scalar,
                }
                let mut seq = s.serialize_seq(Some(self.0.rounding.support_len()))?;
                for (seats, probability) in self.0.masses() {
                    seq.serialize_element(&Entry { seats, probability })?;
                }
                seq.end()
            }
        }
        let mut st = serializer.serialize_struct("SeatDistribution", 4)?;
        st.serialize_field("n", &self.n())?;
        st.serialize_field("house_size", &self.house_size())?;
        st.serialize_field("lower_quotas", &self.quota.lower_quotas)?;
        st.serialize_field("masses", &Entries(self))?;
        st.end()
    }
}

/// `P[Σ_{i∈T} α_i = s]` for `s = 0..=h` given the rounding distribution and
/// lower quotas.
pub fn coalition_seat_pmf(
    rounding: &KSubsetDistribution,
    lower_quotas: &[u64],
    coalition: Subset,
    house_size: u64,
) -> Vec<Scalar> {
    let base: u64 = coalition.iter().map(|i| lower_quotas[i]).sum();
    let mut pmf = vec![Scalar::zero(); house_size as usize + 1];
    for (s, m) in &rounding.masses {
        let seats = base + s.intersection(coalition).len() as u64;
        let slot = &mut pmf[seats as usize];
        *slot = slot.clone() + m;
    }
    pmf
}

/// Upper tails `P[X ≥ θ]` for `θ = 0..=len` of a pmf on `0..len`.
pub fn tails(pmf: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); pmf.len() + 1];
    for t in (0..pmf.len()).rev() {
        out[t] = out[t + 1].clone() + &pmf[t];
    }
    out
}

/// A coalition and a seat threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoalitionQuery {
    pub coalition: Subset,
    pub threshold: u64,
}

/// Builds the seat distribution of the method induced by `rule`.
pub fn induce_apportionment(rule: &Rule, votes: &VoteProfile) -> Result<SeatDistribution> {
    let quota = compute_quotas(votes);
    let rounding = rule.distribution(&quota.residues)?;
    Ok(SeatDistribution::new(quota, rounding))
}

/// `P[Σ_{i∈T} α_i ≥ θ]`.
pub fn coalition_threshold_prob(dist: &SeatDistribution, query: &CoalitionQuery) -> Result<Scalar> {
    if query.coalition.span() > dist.n() {
        return Err(Error::invalid(format!(
            "coalition {} names parties beyond {}",
            query.coalition,
            dist.n()
        )));
    }
    let tails = dist.coalition_tails(query.coalition);
    Ok(tails
        .get(query.threshold as usize)
        .cloned()
        .unwrap_or_else(Scalar::zero))
}

/// Outcome of a first-order dominance comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Dominance {
    Dominates,
    Violated {
        threshold: u64,
        before: Scalar,
        after: Scalar,
    },
}

impl Dominance {
    pub fn holds(&self) -> bool {
        matches!(self, Dominance::Dominates)
    }
}

/// Checks `after[θ] ≥ before[θ]` for every θ; reports the threshold with the
/// largest drop otherwise.
pub fn tails_dominate(before: &[Scalar], after: &[Scalar]) -> Dominance {
    tails_dominate_within(before, after, crate::scalar::FLOAT_SLACK)
}

/// [`tails_dominate`] with an explicit tolerance for float tails.
pub fn tails_dominate_within(before: &[Scalar], after: &[Scalar], slack: f64) -> Dominance {
    let mut worst: Option<(usize, Scalar)> = None;
    for (t, (b, a)) in before.iter().zip(after).enumerate() {
        if !a.ge_within(b, slack) {
            let drop = b.clone() - a;
            if worst.as_ref().is_none_or(|(_, w)| drop > *w) {
                worst = Some((t, drop));
            }
        }
    }
    match worst {
        None => Dominance::Dominates,
        Some((t, _)) => Dominance::Violated {
            threshold: t as u64,
            before: before[t].clone(),
            after: after[t].clone(),
        },
    }
}

/// Whether the seat count of `coalition` under `new` first-order
/// stochastically dominates its seat count under `old`.
pub fn dominance_compare(
    old: &SeatDistribution,
    new: &SeatDistribution,
    coalition: Subset,
) -> Result<Dominance> {
    if old.n() != new.n() || old.house_size() != new.house_size() {
        return Err(Error::invalid(
            "dominance needs the same parties and house size on both sides",
        ));
    }
    Ok(tails_dominate(
        &old.coalition_tails(coalition),
        &new.coalition_tails(coalition),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_previous() -> VoteProfile {
        VoteProfile::from_integers(&[110, 270, 210, 160, 70, 280], 11).unwrap()
    }

    fn table1_new() -> VoteProfile {
        VoteProfile::from_integers(&[110, 290, 210, 190, 10, 290], 11).unwrap()
    }

    #[test]
    fn left_coalition_majority() {
        let left = Subset::from_labels([1, 3, 5]);
        let q = CoalitionQuery {
            coalition: left,
            threshold: 6,
        };
        let old = induce_apportionment(&Rule::grimmett(), &table1_previous()).unwrap();
        let new = induce_apportionment(&Rule::grimmett(), &table1_new()).unwrap();
        assert_eq!(coalition_threshold_prob(&old, &q).unwrap(), Scalar::zero());
        assert_eq!(coalition_threshold_prob(&new, &q).unwrap(), Scalar::ratio(1, 10));
        // The left parties lose quota from the previous to the new election.
        match dominance_compare(&new, &old, left).unwrap() {
            Dominance::Violated {
                threshold,
                before,
                after,
            } => {
                assert_eq!(threshold, 6);
                assert_eq!(before, Scalar::ratio(1, 10));
                assert_eq!(after, Scalar::zero());
            }
            Dominance::Dominates => panic!("expected a violation"),
        }
    }

    #[test]
    fn trivial_thresholds() {
        let d = induce_apportionment(&Rule::Sampford, &table1_new()).unwrap();
        let t = Subset::from_labels([1, 3, 5]);
        let q = |threshold| CoalitionQuery {
            coalition: t,
            threshold,
        };
        assert_eq!(coalition_threshold_prob(&d, &q(0)).unwrap(), Scalar::one());
        assert_eq!(coalition_threshold_prob(&d, &q(12)).unwrap(), Scalar::zero());
        let all = Subset::full(6);
        let tails = d.coalition_tails(all);
        assert_eq!(tails[11], Scalar::one());
    }

    #[test]
    fn integral_quotas_give_one_vector() {
        let v = VoteProfile::from_integers(&[1, 1], 2).unwrap();
        for rule in Rule::all() {
            let d = induce_apportionment(&rule, &v).unwrap();
            assert_eq!(d.prob(&[1, 1]), Scalar::one(), "{rule}");
        }
    }

    #[test]
    fn quota_and_proportionality() {
        let d = induce_apportionment(&Rule::Sampford, &table1_previous()).unwrap();
        for (seats, _) in d.masses() {
            assert_eq!(seats.iter().sum::<u64>(), 11);
            for (s, q) in seats.iter().zip(&d.quota.quotas) {
                let s = num_rational::BigRational::from_integer((*s).into());
                assert!(s == q.floor() || s == q.ceil());
            }
        }
        let expected: Vec<Scalar> = d.quota.quotas.iter().cloned().map(Scalar::Exact).collect();
        assert_eq!(d.expected_seats(), expected);
    }

    #[test]
    fn reflexive_dominance() {
        let d = induce_apportionment(&Rule::grimmett(), &table1_previous()).unwrap();
        assert!(dominance_compare(&d, &d, Subset::from_labels([2, 4]))
            .unwrap()
            .holds());
    }

    #[test]
    fn crossing_tails_are_reported() {
        // X uniform on {0, 2}; Y = 1 surely. Tails: X (1, 1/2, 1/2, 0), Y (1, 1, 0, 0).
        let x = tails(&[Scalar::ratio(1, 2), Scalar::zero(), Scalar::ratio(1, 2)]);
        let y = tails(&[Scalar::zero(), Scalar::one(), Scalar::zero()]);
        assert_eq!(
            tails_dominate(&x, &y),
            Dominance::Violated {
                threshold: 2,
                before: Scalar::ratio(1, 2),
                after: Scalar::zero()
            }
        );
        assert_eq!(
            tails_dominate(&y, &x),
            Dominance::Violated {
                threshold: 1,
                before: Scalar::one(),
                after: Scalar::ratio(1, 2)
            }
        );
    }
}
