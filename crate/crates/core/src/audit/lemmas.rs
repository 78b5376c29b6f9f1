//! Identities and bounds about Sampford's normalizing constant.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::axioms::{check_range, inconclusive};
use super::{AuditVerdict, Axiom, Evidence, Instance, Outcome};
use crate::error::{Error, Result};
use crate::poisson::{poisson_binomial, success_count_pmf};
use crate::residue::ResidueProfile;
use crate::rules::sampford::sampford_f;
use crate::scalar::Scalar;
use crate::subset::{k_subsets, Subset};

/// Default step of the derivative-formula check.
pub const FORMULA_STEP: (i64, i64) = (1, 100_000);
/// Allowed disagreement in the derivative-formula check.
pub const FORMULA_TOLERANCE: f64 = 1e-8;

const ENUMERATION_LIMIT: usize = 24;

fn lemma_verdict(
    axiom: Axiom,
    p: &ResidueProfile,
    coalitions: Vec<Subset>,
    ok: bool,
    evidence: Vec<Evidence>,
) -> AuditVerdict {
    AuditVerdict {
        axiom,
        rule: None,
        instance: Instance::Residues {
            residues: p.clone(),
            coalitions,
        },
        outcome: if ok {
            Outcome::Satisfied
        } else {
            Outcome::Violated
        },
        evidence,
    }
}

fn q(value: BigRational) -> Scalar {
    Scalar::Exact(value)
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn enumerable(p: &ResidueProfile) -> Result<()> {
    if p.n() > ENUMERATION_LIMIT {
        return Err(Error::TooManyParties {
            n: p.n(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// `Σ_{|A|=size} f(A)` by enumeration.
pub fn sum_f(p: &ResidueProfile, size: usize) -> BigRational {
    k_subsets(p.n(), size).map(|a| sampford_f(a, p)).sum()
}

/// `Σ_{|A|=size} Π_{j∈A} p_j Π_{j∉A} (1−p_j)` by enumeration.
pub fn sum_poisson_mass(p: &ResidueProfile, size: usize) -> BigRational {
    k_subsets(p.n(), size)
        .map(|a| {
            (0..p.n())
                .map(|j| {
                    if a.contains(j) {
                        p.get(j).clone()
                    } else {
                        BigRational::one() - p.get(j)
                    }
                })
                .product::<BigRational>()
        })
        .sum()
}

/// `Σ_{|A|=k} f(A) = E[1{|B|<k}(k−|B|)] = ½E[| |B|−k |]`, with the sum over
/// `A` enumerated and the expectations taken from the success-count pmf.
pub fn verify_denominator_identity(p: &ResidueProfile) -> Result<AuditVerdict> {
    enumerable(p)?;
    let k = p.k();
    let lhs = sum_f(p, k);
    let stats = poisson_binomial(p, None)?;
    let middle = stats.truncated_deficit(k);
    let rhs = stats.abs_deviation(k) / int(2);
    let ok = lhs == middle && middle == rhs;
    Ok(lemma_verdict(
        Axiom::DenominatorIdentity,
        p,
        vec![],
        ok,
        vec![
            Evidence::quantity("sum of f over k-sets", q(lhs)),
            Evidence::quantity("E[1{|B|<k}(k-|B|)]", q(middle)),
            Evidence::quantity("E[||B|-k|]/2", q(rhs)),
        ],
    ))
}

/// `Σ_{|A|=ℓ+1} f(A) − Σ_{|A|=ℓ} f(A) = (k−ℓ)·Σ_{|A|=ℓ} Π_A p_j Π_{∉A}(1−p_j)`.
pub fn verify_telescoping_step(p: &ResidueProfile, level: usize) -> Result<AuditVerdict> {
    if level >= p.n() {
        return Err(Error::invalid(format!(
            "level must lie in 0..={}",
            p.n().saturating_sub(1)
        )));
    }
    enumerable(p)?;
    let lhs = sum_f(p, level + 1) - sum_f(p, level);
    let rhs = int(p.k() as i64 - level as i64) * sum_poisson_mass(p, level);
    let ok = lhs == rhs;
    Ok(lemma_verdict(
        Axiom::TelescopingStep,
        p,
        vec![],
        ok,
        vec![
            Evidence::quantity("level", Scalar::from_int(level as i64)),
            Evidence::quantity("difference of f sums", q(lhs)),
            Evidence::quantity("(k-l) P[|B|=l]", q(rhs)),
        ],
    ))
}

/// The labeling used by the bounds: the coalition is the `k` largest
/// residues, the growing party is its largest residue and the shrinking party
/// the smallest residue outside it.
pub fn canonical_labeling(p: &ResidueProfile) -> (Subset, usize, usize) {
    let coalition = p.top_k();
    let pick = |set: Subset, largest: bool| {
        set.iter().reduce(|best, i| {
            let better = if largest {
                p.get(i) > p.get(best)
            } else {
                p.get(i) < p.get(best)
            };
            if better {
                i
            } else {
                best
            }
        })
    };
    let grow = pick(coalition, true).unwrap_or(0);
    let outside = Subset::full(p.n()).difference(coalition);
    let shrink = pick(outside, false).unwrap_or(p.n().saturating_sub(1));
    (coalition, grow, shrink)
}

fn coalition_or_default(p: &ResidueProfile, coalition: Option<Subset>) -> Result<Subset> {
    let c = coalition.unwrap_or_else(|| p.top_k());
    check_range(&[c], p.n())?;
    if c.len() != p.k() {
        return Err(Error::invalid(format!("{c} does not have {} parties", p.k())));
    }
    Ok(c)
}

/// `E[| |B|−k |] ≤ 2s` with `s = Σ_{i∈A}(1−p_i)` for a `k`-set `A`.
pub fn verify_expectation_bound(
    p: &ResidueProfile,
    coalition: Option<Subset>,
) -> Result<AuditVerdict> {
    let a = coalition_or_default(p, coalition)?;
    let stats = poisson_binomial(p, None)?;
    let deviation = stats.abs_deviation(p.k());
    let s = p.deficit(a);
    let variance: BigRational = p
        .residues()
        .iter()
        .map(|x| x * (BigRational::one() - x))
        .sum();
    let bound = &s * int(2);
    let ok = deviation <= variance && variance <= bound;
    Ok(lemma_verdict(
        Axiom::ExpectationBound,
        p,
        vec![a],
        ok,
        vec![
            Evidence::quantity("E[||B|-k|]", q(deviation)),
            Evidence::quantity("Var|B|", q(variance)),
            Evidence::quantity("2s", q(bound)),
        ],
    ))
}

fn check_pair(p: &ResidueProfile, grow: usize, shrink: usize) -> Result<()> {
    if grow >= p.n() || shrink >= p.n() || grow == shrink {
        return Err(Error::invalid(format!(
            "grow and shrink must be distinct parties in 1..={}",
            p.n()
        )));
    }
    Ok(())
}

/// `(∂/∂p_grow − ∂/∂p_shrink) E[1{|B|<k}(k−|B|)] = (p_shrink − p_grow)·P[|B̂| = k−1]`
/// where `B̂` leaves out both parties. The left side is a central difference
/// of the expectation evaluated at perturbed residues.
pub fn verify_derivative_formula(
    p: &ResidueProfile,
    grow: usize,
    shrink: usize,
    step: &BigRational,
) -> Result<AuditVerdict> {
    check_pair(p, grow, shrink)?;
    if !step.is_positive() {
        return Err(Error::invalid("step must be positive"));
    }
    let k = p.k();
    let expectation = |h: &BigRational| -> BigRational {
        let mut values = p.residues().to_vec();
        values[grow] += h;
        values[shrink] -= h;
        success_count_pmf(&values)
            .iter()
            .enumerate()
            .take(k)
            .map(|(l, m)| m * int((k - l) as i64))
            .sum()
    };
    let difference = (expectation(step) - expectation(&-step.clone())) / (step * int(2));
    let hat = poisson_binomial(p, Some((grow, shrink)))?;
    let at_k_minus_one = if k == 0 {
        BigRational::zero()
    } else {
        hat.prob(k - 1)
    };
    let formula = (p.get(shrink) - p.get(grow)) * &at_k_minus_one;
    let gap = (&difference - &formula).abs();
    let ok = crate::scalar::rational_to_f64(&gap) <= FORMULA_TOLERANCE;
    Ok(lemma_verdict(
        Axiom::DerivativeFormula,
        p,
        vec![],
        ok,
        vec![
            Evidence::quantity("finite difference", q(difference)),
            Evidence::quantity("(p_shrink-p_grow) P[|B^|=k-1]", q(formula)),
            Evidence::quantity("P[|B^|=k-1]", q(at_k_minus_one)),
            Evidence::quantity("gap", q(gap)),
        ],
    ))
}

/// `P[|B̂| = k−1] ≥ (1−2s)/(p_grow·(1−p_shrink))` for `grow ∈ A`, `shrink ∉ A`
/// and `p_grow > 0`.
pub fn verify_probability_bound(
    p: &ResidueProfile,
    coalition: Option<Subset>,
    grow: usize,
    shrink: usize,
) -> Result<AuditVerdict> {
    let a = coalition_or_default(p, coalition)?;
    check_pair(p, grow, shrink)?;
    let axiom = Axiom::ProbabilityBound;
    let instance = Instance::Residues {
        residues: p.clone(),
        coalitions: vec![a],
    };
    let reason = if !a.contains(grow) {
        Some(format!("party {} is not in {a}", grow + 1))
    } else if a.contains(shrink) {
        Some(format!("party {} is in {a}", shrink + 1))
    } else if !p.get(grow).is_positive() {
        Some(format!("party {} has residue 0", grow + 1))
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(inconclusive(axiom, None, instance, reason));
    }
    let hat = poisson_binomial(p, Some((grow, shrink)))?;
    let prob = hat.prob(p.k() - 1);
    let s = p.deficit(a);
    let bound = (BigRational::one() - &s * int(2))
        / (p.get(grow) * (BigRational::one() - p.get(shrink)));
    let ok = prob >= bound;
    Ok(AuditVerdict {
        axiom,
        rule: None,
        instance,
        outcome: if ok {
            Outcome::Satisfied
        } else {
            Outcome::Violated
        },
        evidence: vec![
            Evidence::quantity("P[|B^|=k-1]", q(prob)),
            Evidence::quantity("(1-2s)/(p_grow(1-p_shrink))", q(bound)),
            Evidence::quantity("s", q(s)),
        ],
    })
}
