//! Monotonicity axioms for rounding rules and apportionment methods.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{set_label, AuditVerdict, Axiom, Evidence, Instance, Outcome};
use crate::apportion::{induce_apportionment, tails_dominate_within, Dominance};
use crate::error::{Error, Result};
use crate::quota::{compute_quotas, VoteProfile};
use crate::residue::ResidueProfile;
use crate::rules::conditional_poisson::{conditional_poisson_set_probability, inclusion_probabilities};
use crate::rules::sampford::sampford_set_probability;
use crate::rules::Rule;
use crate::scalar::Scalar;
use crate::subset::{k_subsets, Subset};

/// Default step of the directional-derivative check.
pub const DERIVATIVE_STEP: (i64, i64) = (1, 10_000);

fn verdict(
    axiom: Axiom,
    rule: Option<&Rule>,
    instance: Instance,
    outcome: Outcome,
    evidence: Vec<Evidence>,
) -> AuditVerdict {
    AuditVerdict {
        axiom,
        rule: rule.map(|r| r.to_string()),
        instance,
        outcome,
        evidence,
    }
}

pub(crate) fn inconclusive(
    axiom: Axiom,
    rule: Option<&Rule>,
    instance: Instance,
    reason: String,
) -> AuditVerdict {
    verdict(
        axiom,
        rule,
        instance,
        Outcome::Inconclusive,
        vec![Evidence::note(format!("precondition failed: {reason}"))],
    )
}

pub(crate) fn check_range(sets: &[Subset], n: usize) -> Result<()> {
    for s in sets {
        if s.span() > n {
            return Err(Error::invalid(format!("set {s} names parties beyond {n}")));
        }
    }
    Ok(())
}

/// Finds a party in `up` that lost or a party in `down` that gained.
pub(crate) fn shift_violation(
    what: &str,
    before: &[BigRational],
    after: &[BigRational],
    up: Subset,
    down: Subset,
) -> Option<String> {
    if before.len() != after.len() {
        return Some(format!(
            "{} parties before and {} after",
            before.len(),
            after.len()
        ));
    }
    for i in 0..before.len() {
        if up.contains(i) && after[i] < before[i] {
            return Some(format!(
                "{what} of party {} falls from {} to {}",
                i + 1,
                before[i],
                after[i]
            ));
        }
        if down.contains(i) && after[i] > before[i] {
            return Some(format!(
                "{what} of party {} rises from {} to {}",
                i + 1,
                before[i],
                after[i]
            ));
        }
    }
    None
}

fn residue_pair_violation(
    p: &ResidueProfile,
    p2: &ResidueProfile,
    sets: &[Subset],
) -> Option<String> {
    if p.n() != p2.n() {
        return Some(format!("{} parties before and {} after", p.n(), p2.n()));
    }
    if p.k() != p2.k() {
        return Some(format!("residues sum to {} before and {} after", p.k(), p2.k()));
    }
    sets.iter()
        .find(|s| s.len() != p.k())
        .map(|s| format!("{s} does not have {} parties", p.k()))
}

/// `P[S = T]` for several sets, computing the distribution at most once.
pub fn set_probabilities(rule: &Rule, p: &ResidueProfile, sets: &[Subset]) -> Result<Vec<Scalar>> {
    match rule {
        Rule::Sampford => sets.iter().map(|s| rule.set_probability(p, *s)).collect(),
        _ if sets.len() == 1 => Ok(vec![rule.set_probability(p, sets[0])?]),
        _ => {
            let d = rule.distribution(p)?;
            Ok(sets.iter().map(|s| d.prob(*s)).collect())
        }
    }
}

fn outcome(ok: bool) -> Outcome {
    if ok {
        Outcome::Satisfied
    } else {
        Outcome::Violated
    }
}

/// Residues in `T` weakly rise, all others weakly fall: `P[S = T]` must not fall.
pub fn check_selection_monotonicity(
    rule: &Rule,
    p: &ResidueProfile,
    p2: &ResidueProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::Selection;
    let instance = Instance::ResiduePair {
        before: p.clone(),
        after: p2.clone(),
        coalitions: vec![coalition],
    };
    check_range(&[coalition], p.n())?;
    let others = Subset::full(p.n()).difference(coalition);
    if let Some(reason) = residue_pair_violation(p, p2, &[coalition]).or_else(|| {
        shift_violation("residue", p.residues(), p2.residues(), coalition, others)
    }) {
        return Ok(inconclusive(axiom, Some(rule), instance, reason));
    }
    let before = set_probabilities(rule, p, &[coalition])?.remove(0);
    let after = set_probabilities(rule, p2, &[coalition])?.remove(0);
    let ok = after.ge_within(&before, rule.slack());
    Ok(verdict(
        axiom,
        Some(rule),
        instance,
        outcome(ok),
        vec![Evidence::change(set_label(coalition), before, after)],
    ))
}

/// Residues in `T` weakly rise while all others move freely: `P[S = T]` must
/// not fall. No rounding rule satisfies this.
pub fn check_strengthened_selection(
    rule: &Rule,
    p: &ResidueProfile,
    p2: &ResidueProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::StrengthenedSelection;
    let instance = Instance::ResiduePair {
        before: p.clone(),
        after: p2.clone(),
        coalitions: vec![coalition],
    };
    check_range(&[coalition], p.n())?;
    if let Some(reason) = residue_pair_violation(p, p2, &[coalition]).or_else(|| {
        shift_violation("residue", p.residues(), p2.residues(), coalition, Subset::EMPTY)
    }) {
        return Ok(inconclusive(axiom, Some(rule), instance, reason));
    }
    let before = set_probabilities(rule, p, &[coalition])?.remove(0);
    let after = set_probabilities(rule, p2, &[coalition])?.remove(0);
    let ok = after.ge_within(&before, rule.slack());
    Ok(verdict(
        axiom,
        Some(rule),
        instance,
        outcome(ok),
        vec![Evidence::change(set_label(coalition), before, after)],
    ))
}

/// Residues in `T1` weakly rise and those in `T2` weakly fall: `P[S = T1]`
/// must not fall or `P[S = T2]` must not rise.
pub fn check_pairwise_selection(
    rule: &Rule,
    p: &ResidueProfile,
    p2: &ResidueProfile,
    grow: Subset,
    shrink: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::PairwiseSelection;
    let instance = Instance::ResiduePair {
        before: p.clone(),
        after: p2.clone(),
        coalitions: vec![grow, shrink],
    };
    check_range(&[grow, shrink], p.n())?;
    if let Some(reason) = residue_pair_violation(p, p2, &[grow, shrink])
        .or_else(|| shift_violation("residue", p.residues(), p2.residues(), grow, shrink))
    {
        return Ok(inconclusive(axiom, Some(rule), instance, reason));
    }
    let before = set_probabilities(rule, p, &[grow, shrink])?;
    let after = set_probabilities(rule, p2, &[grow, shrink])?;
    let slack = rule.slack();
    let ok = after[0].ge_within(&before[0], slack) || before[1].ge_within(&after[1], slack);
    let evidence = vec![
        Evidence::change(set_label(grow), before[0].clone(), after[0].clone()),
        Evidence::change(set_label(shrink), before[1].clone(), after[1].clone()),
    ];
    Ok(verdict(axiom, Some(rule), instance, outcome(ok), evidence))
}

#[derive(Clone, Copy)]
enum Basis {
    Quotas,
    Votes,
}

fn threshold_audit(
    axiom: Axiom,
    basis: Basis,
    rule: &Rule,
    v: &VoteProfile,
    v2: &VoteProfile,
    grow: Subset,
    shrink: Option<Subset>,
) -> Result<AuditVerdict> {
    let coalitions: Vec<Subset> = std::iter::once(grow).chain(shrink).collect();
    let instance = Instance::VotePair {
        before: v.clone(),
        after: v2.clone(),
        coalitions: coalitions.clone(),
    };
    check_range(&coalitions, v.n())?;
    if v.house_size() != v2.house_size() {
        return Ok(inconclusive(
            axiom,
            Some(rule),
            instance,
            format!("house sizes {} and {} differ", v.house_size(), v2.house_size()),
        ));
    }
    let down = shrink.unwrap_or_else(|| Subset::full(v.n()).difference(grow));
    let violation = match basis {
        Basis::Votes => shift_violation("votes", v.votes(), v2.votes(), grow, down),
        Basis::Quotas => shift_violation(
            "quota",
            &compute_quotas(v).quotas,
            &compute_quotas(v2).quotas,
            grow,
            down,
        ),
    };
    if let Some(reason) = violation {
        return Ok(inconclusive(axiom, Some(rule), instance, reason));
    }

    let old = induce_apportionment(rule, v)?;
    let new = induce_apportionment(rule, v2)?;
    let slack = rule.slack();
    let rising = tails_dominate_within(&old.coalition_tails(grow), &new.coalition_tails(grow), slack);
    let mut evidence = Vec::new();
    if let Dominance::Violated {
        threshold,
        before,
        after,
    } = &rising
    {
        evidence.push(Evidence::Tail {
            coalition: grow,
            threshold: *threshold,
            before: before.clone(),
            after: after.clone(),
        });
    }
    let ok = match shrink {
        None => rising.holds(),
        Some(t2) => {
            let falling =
                tails_dominate_within(&new.coalition_tails(t2), &old.coalition_tails(t2), slack);
            if let Dominance::Violated {
                threshold,
                before,
                after,
            } = &falling
            {
                evidence.push(Evidence::Tail {
                    coalition: t2,
                    threshold: *threshold,
                    before: after.clone(),
                    after: before.clone(),
                });
            }
            rising.holds() || falling.holds()
        }
    };
    if ok {
        evidence.push(Evidence::note("seat tails move in the required direction"));
    }
    Ok(verdict(axiom, Some(rule), instance, outcome(ok), evidence))
}

/// Quotas in `T` weakly rise, all others weakly fall: the seat count of `T`
/// must first-order stochastically dominate its old seat count.
pub fn check_threshold_monotonicity(
    rule: &Rule,
    v: &VoteProfile,
    v2: &VoteProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    threshold_audit(Axiom::Threshold, Basis::Quotas, rule, v, v2, coalition, None)
}

/// Quotas in `T1` weakly rise and those in `T2` weakly fall: the seat count of
/// `T1` must dominate its old count or the old count of `T2` must dominate
/// the new one.
pub fn check_pairwise_threshold(
    rule: &Rule,
    v: &VoteProfile,
    v2: &VoteProfile,
    grow: Subset,
    shrink: Subset,
) -> Result<AuditVerdict> {
    threshold_audit(
        Axiom::PairwiseThreshold,
        Basis::Quotas,
        rule,
        v,
        v2,
        grow,
        Some(shrink),
    )
}

/// Threshold monotonicity with preconditions on raw vote counts.
pub fn check_vote_count_threshold(
    rule: &Rule,
    v: &VoteProfile,
    v2: &VoteProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    threshold_audit(
        Axiom::VoteCountThreshold,
        Basis::Votes,
        rule,
        v,
        v2,
        coalition,
        None,
    )
}

/// Pairwise threshold monotonicity with preconditions on raw vote counts.
pub fn check_pairwise_vote_count_threshold(
    rule: &Rule,
    v: &VoteProfile,
    v2: &VoteProfile,
    grow: Subset,
    shrink: Subset,
) -> Result<AuditVerdict> {
    threshold_audit(
        Axiom::PairwiseVoteCountThreshold,
        Basis::Votes,
        rule,
        v,
        v2,
        grow,
        Some(shrink),
    )
}

/// Every quota-respecting seat vector must have positive probability.
pub fn check_full_support(rule: &Rule, votes: &VoteProfile) -> Result<AuditVerdict> {
    let quota = compute_quotas(votes);
    let mut v = full_support_of(rule, &quota.residues)?;
    v.instance = Instance::Votes {
        votes: votes.clone(),
    };
    Ok(v)
}

/// Every `k`-set of parties with positive residue must have positive probability.
pub fn full_support_of(rule: &Rule, p: &ResidueProfile) -> Result<AuditVerdict> {
    let d = rule.distribution(p)?;
    let positive: Vec<usize> = p.positive().iter().collect();
    let mut expected = 0u64;
    let mut missing = Vec::new();
    for local in k_subsets(positive.len(), p.k()) {
        expected += 1;
        let set = Subset::from_indices(local.iter().map(|j| positive[j]));
        if !d.prob(set).is_positive() {
            missing.push(set);
        }
    }
    let mut evidence = vec![
        Evidence::quantity("quota-respecting outcomes", Scalar::from_int(expected as i64)),
        Evidence::quantity(
            "outcomes with positive probability",
            Scalar::from_int((expected - missing.len() as u64) as i64),
        ),
    ];
    if let Some(first) = missing.first() {
        evidence.push(Evidence::quantity(set_label(*first), d.prob(*first)));
    }
    Ok(verdict(
        Axiom::FullSupport,
        Some(rule),
        Instance::Residues {
            residues: p.clone(),
            coalitions: missing.clone(),
        },
        outcome(missing.is_empty()),
        evidence,
    ))
}

/// Inclusion marginals must equal the residues: exactly for exact rules,
/// within `tolerance` in float mode.
pub fn check_marginals(rule: &Rule, p: &ResidueProfile, tolerance: f64) -> Result<AuditVerdict> {
    let d = rule.distribution(p)?;
    let error = d.marginal_error(p.residues());
    let ok = if error.is_exact() {
        error.is_zero()
    } else {
        error.to_f64() <= tolerance
    };
    Ok(verdict(
        Axiom::Marginals,
        Some(rule),
        Instance::Residues {
            residues: p.clone(),
            coalitions: vec![],
        },
        outcome(ok),
        vec![
            Evidence::quantity("max marginal error", error),
            Evidence::quantity("total mass", d.total()),
        ],
    ))
}

/// `|P_{p′}[S=T] − P_p[S=T]| ≤ ‖p − p′‖₁`.
pub fn check_lipschitz(
    rule: &Rule,
    p: &ResidueProfile,
    p2: &ResidueProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::Lipschitz;
    let instance = Instance::ResiduePair {
        before: p.clone(),
        after: p2.clone(),
        coalitions: vec![coalition],
    };
    check_range(&[coalition], p.n())?;
    if let Some(reason) = residue_pair_violation(p, p2, &[coalition]) {
        return Ok(inconclusive(axiom, Some(rule), instance, reason));
    }
    let before = set_probabilities(rule, p, &[coalition])?.remove(0);
    let after = set_probabilities(rule, p2, &[coalition])?.remove(0);
    let gap = (after.clone() - &before).abs();
    let diffs: Vec<BigRational> = p
        .residues()
        .iter()
        .zip(p2.residues())
        .map(|(a, b)| b - a)
        .collect();
    let l1: BigRational = diffs.iter().map(|d| d.abs()).sum();
    let bound = Scalar::Exact(l1.clone());
    let mut evidence = vec![
        Evidence::change(set_label(coalition), before, after),
        Evidence::quantity("|change|", gap.clone()),
        Evidence::quantity("l1 distance", bound.clone()),
    ];
    let moved = diffs.iter().filter(|d| !d.is_zero()).count();
    if moved == 2 {
        let delta = l1 / BigRational::from_integer(2.into());
        evidence.push(Evidence::note(format!(
            "two residues move by {delta}; bound 2*delta = {}",
            &delta * BigRational::from_integer(2.into())
        )));
    }
    let ok = bound.ge_within(&gap, rule.slack());
    Ok(verdict(axiom, Some(rule), instance, outcome(ok), evidence))
}

/// Central difference of Sampford's `P[S = T]` along `e_grow − e_shrink`.
pub fn sampford_directional_derivative(
    p: &ResidueProfile,
    coalition: Subset,
    grow: usize,
    shrink: usize,
    step: &BigRational,
) -> Result<BigRational> {
    if grow >= p.n() || shrink >= p.n() || grow == shrink {
        return Err(Error::invalid(format!(
            "grow and shrink must be distinct parties in 1..={}",
            p.n()
        )));
    }
    if !step.is_positive() {
        return Err(Error::invalid("step must be positive"));
    }
    let moved = |sign: i64| -> Result<ResidueProfile> {
        let h = step * BigRational::from_integer(sign.into());
        p.with_values(&[(grow, p.get(grow) + &h), (shrink, p.get(shrink) - &h)])
    };
    let (up, down) = (moved(1)?, moved(-1)?);
    let diff = sampford_set_probability(&up, coalition) - sampford_set_probability(&down, coalition);
    Ok(diff / (step * BigRational::from_integer(2.into())))
}

/// Sampford's `P[S = T]` must not decrease as `grow ∈ T` rises and
/// `shrink ∉ T` falls; the finite difference may undershoot by `100·step²`.
pub fn check_directional_derivative(
    p: &ResidueProfile,
    coalition: Subset,
    grow: usize,
    shrink: usize,
    step: &BigRational,
) -> Result<AuditVerdict> {
    let axiom = Axiom::DirectionalDerivative;
    let rule = Rule::Sampford;
    let instance = Instance::Residues {
        residues: p.clone(),
        coalitions: vec![coalition],
    };
    check_range(&[coalition], p.n())?;
    let reason = if coalition.len() != p.k() {
        Some(format!("{coalition} does not have {} parties", p.k()))
    } else if p.k() == 0 || p.k() >= p.n() {
        Some("need 1 <= k <= n-1".to_string())
    } else if grow >= p.n() || !coalition.contains(grow) {
        Some(format!("party {} is not in {coalition}", grow + 1))
    } else if shrink >= p.n() || coalition.contains(shrink) {
        Some(format!("party {} is in {coalition}", shrink + 1))
    } else if p.get(grow) < step || p.get(shrink) < step {
        Some("the step leaves the domain".to_string())
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(inconclusive(axiom, Some(&rule), instance, reason));
    }
    let derivative = match sampford_directional_derivative(p, coalition, grow, shrink, step) {
        Ok(d) => d,
        Err(Error::ResidueOutOfRange { .. }) => {
            return Ok(inconclusive(
                axiom,
                Some(&rule),
                instance,
                "the step leaves the domain".to_string(),
            ))
        }
        Err(e) => return Err(e),
    };
    let tolerance = step * step * BigRational::from_integer(100.into());
    let ok = derivative >= -tolerance.clone();
    let evidence = vec![
        Evidence::quantity("derivative", Scalar::Exact(derivative)),
        Evidence::quantity("tolerance", Scalar::Exact(tolerance)),
    ];
    Ok(verdict(axiom, Some(&rule), instance, outcome(ok), evidence))
}

/// Votes `(1,2,1,2)` with two seats. A method respecting quota and house
/// monotonicity never gives both seats to parties 1 and 3; positive
/// probability on that outcome means the rule fails house monotonicity.
pub fn check_house_monotonicity_witness(rule: &Rule) -> Result<AuditVerdict> {
    let votes = VoteProfile::from_integers(&[1, 2, 1, 2], 2)?;
    check_house_witness(rule, &votes, &[1, 0, 1, 0])
}

/// Violated when `seats`, an outcome that no house-monotone method respecting
/// quota can produce for `votes`, has positive probability.
pub fn check_house_witness(rule: &Rule, votes: &VoteProfile, seats: &[u64]) -> Result<AuditVerdict> {
    if seats.len() != votes.n() {
        return Err(Error::invalid(format!(
            "seat vector has {} entries for {} parties",
            seats.len(),
            votes.n()
        )));
    }
    let dist = induce_apportionment(rule, votes)?;
    let prob = dist.prob(seats);
    let labels: Vec<String> = seats.iter().map(|s| s.to_string()).collect();
    let violated = prob.is_positive();
    Ok(verdict(
        Axiom::HouseMonotonicity,
        Some(rule),
        Instance::Votes {
            votes: votes.clone(),
        },
        outcome(!violated),
        vec![Evidence::quantity(format!("P[seats=({})]", labels.join(",")), prob)],
    ))
}

/// Selection monotonicity for conditional Poisson given exact working
/// probabilities. Common scale factors cancel, so integer `π` work directly.
/// The marginals of `T` must weakly rise and all others weakly fall.
pub fn check_working_selection(
    pi: &[BigRational],
    pi2: &[BigRational],
    k: usize,
    coalition: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::Selection;
    let exact = |v: &[BigRational]| -> Vec<Scalar> { v.iter().cloned().map(Scalar::Exact).collect() };
    let (w, w2) = (exact(pi), exact(pi2));
    if w.len() != w2.len() {
        return Err(Error::invalid("working probabilities differ in length"));
    }
    if w.iter().chain(&w2).any(|x| x.is_negative()) {
        return Err(Error::invalid("working probabilities must be nonnegative"));
    }
    check_range(&[coalition], w.len())?;
    let marginals = |w: &[Scalar]| -> Result<ResidueProfile> {
        ResidueProfile::new(inclusion_probabilities(w, k).iter().map(Scalar::to_exact).collect())
    };
    let (p, p2) = (marginals(&w)?, marginals(&w2)?);
    let instance = Instance::ResiduePair {
        before: p.clone(),
        after: p2.clone(),
        coalitions: vec![coalition],
    };
    let others = Subset::full(p.n()).difference(coalition);
    if let Some(reason) = residue_pair_violation(&p, &p2, &[coalition])
        .or_else(|| shift_violation("marginal", p.residues(), p2.residues(), coalition, others))
    {
        return Ok(inconclusive(axiom, None, instance, reason));
    }
    let before = conditional_poisson_set_probability(&w, coalition);
    let after = conditional_poisson_set_probability(&w2, coalition);
    let ok = after >= before;
    let mut evidence = vec![Evidence::change(set_label(coalition), before, after)];
    for i in 0..p.n() {
        evidence.push(Evidence::change(
            format!("marginal {}", i + 1),
            Scalar::Exact(p.get(i).clone()),
            Scalar::Exact(p2.get(i).clone()),
        ));
    }
    Ok(AuditVerdict {
        axiom,
        rule: Some("cp (exact working probabilities)".to_string()),
        instance,
        outcome: outcome(ok),
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Order;

    fn profile(s: &str) -> ResidueProfile {
        ResidueProfile::parse_list(s).unwrap()
    }

    #[test]
    fn pipage_fixed_selection_counterexample() {
        let p = ResidueProfile::from_ratios(&[(1, 3), (1, 2), (1, 3), (2, 3), (2, 3), (1, 2)]).unwrap();
        let p2 = ResidueProfile::from_ratios(&[(1, 3), (1, 3), (1, 3), (2, 3), (2, 3), (2, 3)]).unwrap();
        let t = Subset::from_labels([1, 3, 6]);
        let v = check_selection_monotonicity(&Rule::Pipage(Order::Numeric), &p, &p2, t).unwrap();
        assert!(v.is_violated(), "{v}");
        let (before, after) = v.change(&set_label(t)).unwrap();
        assert!(before.is_positive());
        assert!(after.is_zero());
        let s = check_selection_monotonicity(&Rule::Sampford, &p, &p2, t).unwrap();
        assert!(s.is_satisfied(), "{s}");
    }

    #[test]
    fn unchanged_profile_is_satisfied() {
        let p = profile("0.1,0.7,0.1,0.6,0.7,0.8");
        let t = Subset::from_labels([2, 5, 6]);
        for rule in Rule::all() {
            let v = check_selection_monotonicity(&rule, &p, &p, t).unwrap();
            assert!(v.is_satisfied(), "{v}");
            let v = check_lipschitz(&rule, &p, &p, t).unwrap();
            assert!(v.is_satisfied(), "{v}");
        }
    }

    #[test]
    fn wrong_direction_is_inconclusive() {
        let p = profile("0.5,0.5");
        let p2 = profile("0.4,0.6");
        let v = check_selection_monotonicity(&Rule::Sampford, &p, &p2, Subset::from_labels([1])).unwrap();
        assert_eq!(v.outcome, Outcome::Inconclusive);
        let v = check_selection_monotonicity(&Rule::Sampford, &p, &p2, Subset::from_labels([1, 2])).unwrap();
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert!(check_selection_monotonicity(&Rule::Sampford, &p, &p2, Subset::from_labels([3])).is_err());
    }

    #[test]
    fn pairwise_systematic_under_random_order() {
        let p = profile("0.1,0.1,0.2,0.2,0.5,0.9");
        let p2 = profile("0.1,0.1,0.2,0.2,0.6,0.8");
        let t1 = Subset::from_labels([1, 2]);
        let t2 = Subset::from_labels([3, 4]);
        let v = check_pairwise_selection(&Rule::Systematic(Order::Random), &p, &p2, t1, t2).unwrap();
        assert!(v.is_violated(), "{v}");
        assert_eq!(v.change(&set_label(t1)).unwrap().1, &Scalar::zero());
        let v = check_pairwise_selection(&Rule::Sampford, &p, &p2, t1, t2).unwrap();
        assert!(v.is_satisfied(), "{v}");
    }

    #[test]
    fn apportia_threshold() {
        let v = VoteProfile::from_integers(&[110, 290, 210, 190, 10, 290], 11).unwrap();
        let v2 = VoteProfile::from_integers(&[110, 270, 210, 160, 70, 280], 11).unwrap();
        let left = Subset::from_labels([1, 3, 5]);
        let verdict = check_threshold_monotonicity(&Rule::grimmett(), &v, &v2, left).unwrap();
        assert!(verdict.is_violated(), "{verdict}");
        let (theta, before, after) = verdict.tail(left).unwrap();
        assert_eq!(theta, 6);
        assert_eq!(before, &Scalar::ratio(1, 10));
        assert_eq!(after, &Scalar::zero());
        let same = check_threshold_monotonicity(&Rule::grimmett(), &v, &v, left).unwrap();
        assert!(same.is_satisfied());
        let back = check_threshold_monotonicity(&Rule::grimmett(), &v2, &v, left).unwrap();
        assert_eq!(back.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn vdc_instance() {
        let v = VoteProfile::from_integers(&[380, 140, 140, 140], 8).unwrap();
        let v2 = VoteProfile::from_integers(&[376, 142, 142, 100], 8).unwrap();
        let t2 = Subset::from_labels([1]);
        let v_grimmett = check_pairwise_vote_count_threshold(
            &Rule::grimmett(),
            &v,
            &v2,
            Subset::from_labels([2, 3]),
            t2,
        )
        .unwrap();
        assert_ne!(v_grimmett.outcome, Outcome::Inconclusive, "{v_grimmett}");
        // Quota preconditions fail since party 1 gains vote share.
        let quota_based =
            check_pairwise_threshold(&Rule::grimmett(), &v, &v2, Subset::from_labels([2, 3]), t2).unwrap();
        assert_eq!(quota_based.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn full_support_cases() {
        let prev = VoteProfile::from_integers(&[110, 270, 210, 160, 70, 280], 11).unwrap();
        let g = check_full_support(&Rule::grimmett(), &prev).unwrap();
        assert!(g.is_violated());
        let s = check_full_support(&Rule::Sampford, &prev).unwrap();
        assert!(s.is_satisfied());
        let cp = check_full_support(&Rule::conditional_poisson(), &prev).unwrap();
        assert!(cp.is_satisfied());
    }

    #[test]
    fn lipschitz_two_coordinates() {
        let p = profile("0.3,0.3,0.4");
        let p2 = profile("0.35,0.25,0.4");
        let v = check_lipschitz(&Rule::Sampford, &p, &p2, Subset::from_labels([1])).unwrap();
        assert!(v.is_satisfied(), "{v}");
        assert!(v.evidence.iter().any(|e| matches!(e, Evidence::Note { .. })));
    }

    #[test]
    fn symmetric_derivative_is_nonnegative() {
        let p = profile("0.5,0.5,0.5,0.5");
        let step = BigRational::new(1.into(), 10_000.into());
        let v = check_directional_derivative(&p, Subset::from_labels([1, 2]), 0, 3, &step).unwrap();
        assert!(v.is_satisfied(), "{v}");
        let d = v.quantity("derivative").unwrap();
        assert!(!d.is_negative());
    }

    #[test]
    fn derivative_near_degenerate() {
        let p = profile("0.99,0.98,0.97,0.02,0.02,0.01,0.01");
        let step = BigRational::new(1.into(), 10_000.into());
        let v = check_directional_derivative(&p, Subset::from_labels([1, 2, 3]), 0, 6, &step).unwrap();
        assert!(v.is_satisfied(), "{v}");
    }

    #[test]
    fn strengthened_selection_fails() {
        let p = profile("0.5,0.5,0.5,0.5");
        let p2 = profile("0.5,0.5,0.99,0.01");
        let t = Subset::from_labels([1, 2]);
        for rule in Rule::all() {
            let v = check_strengthened_selection(&rule, &p, &p2, t).unwrap();
            let (_, after) = v.change(&set_label(t)).unwrap();
            assert!(after.le_within_slack(&Scalar::ratio(1, 100)), "{v}");
        }
        let s = check_strengthened_selection(&Rule::Sampford, &p, &p2, t).unwrap();
        assert!(s.is_violated());
    }

    #[test]
    fn marginals_of_all_rules() {
        let p = profile("0.1,0.7,0.1,0.6,0.7,0.8");
        for rule in Rule::all() {
            let v = check_marginals(&rule, &p, 1e-12).unwrap();
            assert!(v.is_satisfied(), "{v}");
        }
    }

    #[test]
    fn house_monotonicity_witness_all_rules() {
        for rule in Rule::all() {
            let v = check_house_monotonicity_witness(&rule).unwrap();
            assert!(v.is_violated(), "{v}");
        }
        let g = check_house_monotonicity_witness(&Rule::grimmett()).unwrap();
        assert_eq!(g.quantity("P[seats=(1,0,1,0)]").unwrap(), &Scalar::ratio(1, 3));
    }

    #[test]
    fn cp_huge_exact() {
        let ints = |xs: &[&str]| -> Vec<BigRational> {
            xs.iter().map(|x| BigRational::from_integer(x.parse().unwrap())).collect()
        };
        let pi = ints(&[
            "99620001435175085845613951348591",
            "33206667145059699577734936400435",
            "33206667145059699577734936400435",
            "23244667001544291253373835102276586",
            "23244667001544291253373835102276586",
            "1660333357252963458777541885429371",
        ]);
        let pi2 = ints(&[
            "99620001435175193801835755646020",
            "33206667145059681577227243883092",
            "33206667145059681577227243883092",
            "23244667001544299141767505142336500",
            "23244667001544299141767505142336500",
            "1660333357252962147206216649823732",
        ]);
        let t = Subset::from_labels([1, 2, 3]);
        let v = check_working_selection(&pi, &pi2, 3, t).unwrap();
        assert!(v.is_violated(), "{v}");
        let (before, after) = v.change(&set_label(t)).unwrap();
        assert!(before.is_exact() && after < before);
    }
}
