//! Instance families whose coalitions depend on the rule under test.

use num_rational::BigRational;
use serde::Serialize;

use crate::audit::{
    check_pairwise_threshold, check_pairwise_vote_count_threshold, check_strengthened_selection,
    AuditVerdict, Evidence,
};
use crate::error::{Error, Result};
use crate::quota::{compute_quotas, VoteProfile};
use crate::residue::ResidueProfile;
use crate::rules::Rule;
use crate::scalar::Scalar;
use crate::subset::{k_subsets, Subset};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// First set with the largest score; ties keep the earliest.
fn argmax(sets: impl IntoIterator<Item = Subset>, score: impl Fn(Subset) -> Scalar) -> Option<(Subset, Scalar)> {
    let mut best: Option<(Subset, Scalar)> = None;
    for s in sets {
        let value = score(s);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((s, value));
        }
    }
    best
}

/// Twelve parties, three seats: ten parties at `1/5`, then `1/m` and `1 − 1/m`.
pub fn fdco_new(m: u64) -> Result<ResidueProfile> {
    if m < 2 {
        return Err(Error::invalid("m must be at least 2"));
    }
    let m = m as i64;
    let mut r = vec![ratio(1, 5); 10];
    r.push(ratio(1, m));
    r.push(ratio(m - 1, m));
    ResidueProfile::new(r)
}

/// The earlier election: `1/4` on `shrink`, `1/6` on `grow`, `1/500` on the
/// other five of parties 1..10 and `199/200` on parties 11 and 12.
pub fn fdco_old(grow: Subset, shrink: Subset) -> Result<ResidueProfile> {
    let low = Subset::full(10);
    if grow.len() != 3 || shrink.len() != 2 || !grow.union(shrink).is_subset_of(low) || !grow.intersection(shrink).is_empty() {
        return Err(Error::invalid("need three and two disjoint parties among 1..10"));
    }
    let r = (0..12)
        .map(|i| {
            if i >= 10 {
                ratio(199, 200)
            } else if shrink.contains(i) {
                ratio(1, 4)
            } else if grow.contains(i) {
                ratio(1, 6)
            } else {
                ratio(1, 500)
            }
        })
        .collect();
    ResidueProfile::new(r)
}

fn as_votes(p: &ResidueProfile) -> Result<VoteProfile> {
    VoteProfile::new(p.residues().to_vec(), p.k() as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct FdcoStep {
    pub m: u64,
    pub grow: Subset,
    pub shrink: Subset,
    pub verdict: AuditVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct FdcoSweep {
    pub checked: Vec<u64>,
    /// First `m` with a violation.
    pub witness: Option<FdcoStep>,
    pub last: Option<FdcoStep>,
}

/// One member of the family. `T2` is the pair of parties among 1..10 most
/// likely to be jointly selected under `p(m)`; `T1` is the first three of the
/// remaining eight. Quotas of `T1` rise from `1/6` to `1/5` and those of `T2`
/// fall from `1/4` to `1/5`.
pub fn fdco_step(rule: &Rule, m: u64) -> Result<FdcoStep> {
    let new = fdco_new(m)?;
    let dist = rule.distribution(&new)?;
    let (shrink, joint) = argmax(k_subsets(10, 2), |r| dist.prob_superset(r)).expect("ten parties");
    let grow = Subset::from_indices(Subset::full(10).difference(shrink).iter().take(3));
    let old = fdco_old(grow, shrink)?;
    let mut verdict = check_pairwise_threshold(rule, &as_votes(&old)?, &as_votes(&new)?, grow, shrink)?;
    verdict.evidence.push(Evidence::quantity("m", Scalar::from_int(m as i64)));
    verdict
        .evidence
        .push(Evidence::quantity(format!("P[S ⊇ {shrink}] at m"), joint));
    Ok(FdcoStep {
        m,
        grow,
        shrink,
        verdict,
    })
}

/// Runs [`fdco_step`] for each `m` until the first violation.
pub fn fdco_sweep(rule: &Rule, ms: impl IntoIterator<Item = u64>) -> Result<FdcoSweep> {
    let mut sweep = FdcoSweep {
        checked: Vec::new(),
        witness: None,
        last: None,
    };
    for m in ms {
        let step = fdco_step(rule, m)?;
        sweep.checked.push(m);
        if step.verdict.is_violated() {
            sweep.witness = Some(step);
            break;
        }
        sweep.last = Some(step);
    }
    Ok(sweep)
}

/// `2..=linear`, then doubling up to `limit`.
pub fn fdco_schedule(linear: u64, limit: u64) -> Vec<u64> {
    let mut ms: Vec<u64> = (2..=linear).collect();
    let mut m = linear.max(1) * 2;
    while m <= limit {
        ms.push(m);
        m *= 2;
    }
    ms
}

/// Picks `T1` among the pairs of `candidates` with the largest `P[S = T1]`
/// under `before`, then deals the largest new totals among `candidates` to
/// `T1` and checks pairwise vote-count threshold monotonicity with `T2 = shrink`.
pub fn vote_count_instance(
    rule: &Rule,
    before: &VoteProfile,
    after_totals: &[BigRational],
    candidates: Subset,
    shrink: Subset,
) -> Result<(AuditVerdict, Subset, Scalar)> {
    let n = before.n();
    if after_totals.len() != n || candidates.span() > n {
        return Err(Error::invalid("vote vectors and candidates must cover the same parties"));
    }
    let residues = compute_quotas(before).residues;
    let dist = rule.distribution(&residues)?;
    let members: Vec<usize> = candidates.iter().collect();
    let pairs = k_subsets(members.len(), 2).map(|s| Subset::from_indices(s.iter().map(|j| members[j])));
    let (grow, prob) = argmax(pairs, |t| dist.prob(t)).ok_or_else(|| Error::invalid("need two candidates"))?;
    let mut pool: Vec<BigRational> = members.iter().map(|&i| after_totals[i].clone()).collect();
    pool.sort_by(|a, b| b.cmp(a));
    let mut after = after_totals.to_vec();
    let order = grow.iter().chain(candidates.difference(grow).iter());
    for (i, v) in order.zip(pool) {
        after[i] = v;
    }
    let after = VoteProfile::new(after, before.house_size())?;
    let mut verdict = check_pairwise_vote_count_threshold(rule, before, &after, grow, shrink)?;
    verdict
        .evidence
        .push(Evidence::quantity(format!("P[S={grow}] before"), prob.clone()));
    Ok((verdict, grow, prob))
}

/// Picks the `size`-set `T` with the largest `P[S = T]` under `before`, keeps
/// its residues, and gives the other parties `others` in label order.
pub fn strengthened_instance(
    rule: &Rule,
    before: &ResidueProfile,
    others: &[BigRational],
    size: usize,
) -> Result<AuditVerdict> {
    let n = before.n();
    if others.len() + size != n {
        return Err(Error::invalid(format!(
            "{} replacement residues for {} parties outside a {size}-set",
            others.len(),
            n
        )));
    }
    let dist = rule.distribution(before)?;
    let (t, _) = argmax(k_subsets(n, size), |t| dist.prob(t)).ok_or_else(|| Error::invalid("no candidate set"))?;
    let mut after = before.residues().to_vec();
    for (i, v) in Subset::full(n).difference(t).iter().zip(others) {
        after[i] = v.clone();
    }
    let after = ResidueProfile::new(after)?;
    check_strengthened_selection(rule, before, &after, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Order;

    #[test]
    fn fdco_profiles_are_valid() {
        let p = fdco_new(7).unwrap();
        assert_eq!(p.k(), 3);
        let q = fdco_old(Subset::from_labels([3, 4, 5]), Subset::from_labels([1, 2])).unwrap();
        assert_eq!(q.k(), 3);
        assert!(fdco_new(1).is_err());
    }

    #[test]
    fn schedule_shape() {
        assert_eq!(fdco_schedule(4, 20), vec![2, 3, 4, 8, 16]);
    }

    #[test]
    fn vdc_grimmett() {
        let v = VoteProfile::from_integers(&[380, 140, 140, 140], 8).unwrap();
        let after: Vec<BigRational> = [376, 142, 142, 100].iter().map(|&x| ratio(x, 1)).collect();
        let (verdict, grow, prob) = vote_count_instance(
            &Rule::grimmett(),
            &v,
            &after,
            Subset::from_labels([2, 3, 4]),
            Subset::from_labels([1]),
        )
        .unwrap();
        assert!(verdict.is_violated(), "{verdict}");
        assert_eq!(grow.len(), 2);
        assert!(prob >= Scalar::ratio(1, 15));
    }

    #[test]
    fn strengthened_relabels_for_grimmett() {
        let p = ResidueProfile::from_ratios(&[(1, 2); 4]).unwrap();
        let others = [ratio(99, 100), ratio(1, 100)];
        let v = strengthened_instance(&Rule::Systematic(Order::Numeric), &p, &others, 2).unwrap();
        assert!(v.is_violated(), "{v}");
    }
}
