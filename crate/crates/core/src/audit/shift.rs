//! Shifts that couple Grimmett's method across two elections for coalitions
//! of at most two parties.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::axioms::{check_range, inconclusive, shift_violation};
use super::{AuditVerdict, Axiom, Evidence, Instance, Outcome};
use crate::error::{Error, Result};
use crate::quota::{compute_quotas, VoteProfile};
use crate::rules::Rule;
use crate::scalar::Scalar;
use crate::subset::Subset;

/// Changes `a..e` of five consecutive interval lengths and an offset `u0`
/// with `u0+a ≤ 0`, `u0+a+b ≥ 0`, `u0+a+b+c ≤ 0` and `u0+a+b+c+d ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftWitness {
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub a: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub b: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub c: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub d: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub e: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub u0: BigRational,
}

impl ShiftWitness {
    /// The partial sums `u0+a`, `u0+a+b`, `u0+a+b+c`, `u0+a+b+c+d`.
    pub fn partial_sums(&self) -> [BigRational; 4] {
        let s1 = &self.u0 + &self.a;
        let s2 = &s1 + &self.b;
        let s3 = &s2 + &self.c;
        let s4 = &s3 + &self.d;
        [s1, s2, s3, s4]
    }

    pub fn verify(&self) -> bool {
        let [s1, s2, s3, s4] = self.partial_sums();
        !s1.is_positive() && !s2.is_negative() && !s3.is_positive() && !s4.is_negative()
    }
}

fn shift_preconditions(v: &[BigRational; 5]) -> Option<String> {
    let [a, b, c, d, e] = v;
    if a.is_positive() || c.is_positive() || e.is_positive() {
        return Some("a, c and e must be at most 0".to_string());
    }
    if b.is_negative() || d.is_negative() {
        return Some("b and d must be at least 0".to_string());
    }
    let total: BigRational = v.iter().sum();
    if !total.is_zero() {
        return Some(format!("a+b+c+d+e = {total}, not 0"));
    }
    None
}

/// `u0 = −a` when `b ≤ −c`, otherwise `u0 = −a−b−c`.
pub fn construct_shift(
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
    e: BigRational,
) -> Result<ShiftWitness> {
    let values = [a, b, c, d, e];
    if let Some(reason) = shift_preconditions(&values) {
        return Err(Error::invalid(reason));
    }
    let [a, b, c, d, e] = values;
    let u0 = if b <= -c.clone() {
        -a.clone()
    } else {
        -(&a + &b + &c)
    };
    let witness = ShiftWitness { a, b, c, d, e, u0 };
    if !witness.verify() {
        return Err(Error::invalid(format!(
            "shift {} fails its inequalities",
            witness.u0
        )));
    }
    Ok(witness)
}

/// Audit form of [`construct_shift`].
pub fn audit_shift(values: [BigRational; 5]) -> AuditVerdict {
    let instance = Instance::Shift {
        values: values.clone().map(Scalar::Exact),
    };
    if let Some(reason) = shift_preconditions(&values) {
        return inconclusive(Axiom::Shift, None, instance, reason);
    }
    let [a, b, c, d, e] = values;
    let (outcome, evidence) = match construct_shift(a, b, c, d, e) {
        Ok(w) => {
            let mut evidence = vec![Evidence::quantity("u0", Scalar::Exact(w.u0.clone()))];
            for (label, s) in ["u0+a", "u0+a+b", "u0+a+b+c", "u0+a+b+c+d"]
                .into_iter()
                .zip(w.partial_sums())
            {
                evidence.push(Evidence::quantity(label, Scalar::Exact(s)));
            }
            (Outcome::Satisfied, evidence)
        }
        Err(e) => (Outcome::Violated, vec![Evidence::note(e.to_string())]),
    };
    AuditVerdict {
        axiom: Axiom::Shift,
        rule: None,
        instance,
        outcome,
        evidence,
    }
}

/// Splits the parties in numeric order into the five runs around a
/// coalition of one or two parties: before, first member, between, second
/// member, after.
fn runs(n: usize, coalition: Subset) -> [Subset; 5] {
    let members: Vec<usize> = coalition.iter().collect();
    let range = |lo: usize, hi: usize| Subset::from_indices(lo..hi);
    match members.as_slice() {
        [i] => [
            range(0, *i),
            Subset::singleton(*i),
            range(i + 1, n),
            Subset::EMPTY,
            Subset::EMPTY,
        ],
        [i, j] => [
            range(0, *i),
            Subset::singleton(*i),
            range(i + 1, *j),
            Subset::singleton(*j),
            range(j + 1, n),
        ],
        _ => unreachable!("coalition has one or two parties"),
    }
}

/// Couples Grimmett's method on `v` and `v′` for a coalition `T` of one or
/// two parties whose quotas weakly rise while all others weakly fall.
///
/// Laying quotas out in numeric order, the quota changes of the five runs
/// around `T` give `a..e`. Moving the shift by `u0` places every interval of
/// `T` under `v` inside the matching interval under `v′`, so with the shared
/// uniform offset `T` never loses seats.
pub fn verify_grimmett_coupling(
    v: &VoteProfile,
    v2: &VoteProfile,
    coalition: Subset,
) -> Result<AuditVerdict> {
    let axiom = Axiom::GrimmettCoupling;
    let rule = Rule::grimmett();
    let instance = Instance::VotePair {
        before: v.clone(),
        after: v2.clone(),
        coalitions: vec![coalition],
    };
    check_range(&[coalition], v.n())?;
    let q = compute_quotas(v).quotas;
    let q2 = compute_quotas(v2).quotas;
    let reason = if coalition.is_empty() || coalition.len() > 2 {
        Some(format!("{coalition} must have one or two parties"))
    } else if v.house_size() != v2.house_size() {
        Some("house sizes differ".to_string())
    } else {
        shift_violation(
            "quota",
            &q,
            &q2,
            coalition,
            Subset::full(v.n()).difference(coalition),
        )
    };
    if let Some(reason) = reason {
        return Ok(inconclusive(axiom, Some(&rule), instance, reason));
    }
    let changes = runs(v.n(), coalition).map(|run| {
        run.iter()
            .map(|i| &q2[i] - &q[i])
            .sum::<BigRational>()
    });
    let [a, b, c, d, e] = changes;
    let witness = construct_shift(a, b, c, d, e)?;
    let mut evidence = vec![Evidence::quantity("u0", Scalar::Exact(witness.u0.clone()))];
    for (label, x) in [
        ("a", &witness.a),
        ("b", &witness.b),
        ("c", &witness.c),
        ("d", &witness.d),
        ("e", &witness.e),
    ] {
        evidence.push(Evidence::quantity(label, Scalar::Exact(x.clone())));
    }
    Ok(AuditVerdict {
        axiom,
        rule: Some(rule.to_string()),
        instance,
        outcome: if witness.verify() {
            Outcome::Satisfied
        } else {
            Outcome::Violated
        },
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn all_zero() {
        let w = construct_shift(r(0), r(0), r(0), r(0), r(0)).unwrap();
        assert!(w.u0.is_zero());
        assert!(w.partial_sums().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn small_b_case() {
        let w = construct_shift(r(-1), r(1), r(-2), r(3), r(-1)).unwrap();
        assert_eq!(w.u0, r(1));
        assert!(w.verify());
    }

    #[test]
    fn large_b_case() {
        let w = construct_shift(r(-1), r(3), r(-1), r(0), r(-1)).unwrap();
        assert_eq!(w.u0, r(-1));
        assert!(w.verify());
    }

    #[test]
    fn rejects_bad_signs() {
        assert!(construct_shift(r(1), r(0), r(0), r(0), r(-1)).is_err());
        assert!(construct_shift(r(0), r(1), r(0), r(0), r(0)).is_err());
        assert_eq!(
            audit_shift([r(0), r(1), r(0), r(0), r(0)]).outcome,
            Outcome::Inconclusive
        );
    }

    #[test]
    fn coupling_on_a_pair() {
        let v = VoteProfile::from_integers(&[110, 270, 210, 160, 70, 280], 11).unwrap();
        let v2 = VoteProfile::from_integers(&[100, 290, 200, 170, 70, 270], 11).unwrap();
        let t = Subset::from_labels([2, 4]);
        let verdict = verify_grimmett_coupling(&v, &v2, t).unwrap();
        assert!(verdict.is_satisfied(), "{verdict}");
    }
}
