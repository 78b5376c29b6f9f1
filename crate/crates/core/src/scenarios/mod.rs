//! Named instances with known verdicts, and a randomized counterexample
//! search.

pub mod families;
pub mod gen;
pub mod search;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use families::{fdco_schedule, fdco_step, fdco_sweep, FdcoStep, FdcoSweep};
pub use search::{search_counterexamples, SearchConfig, SearchOutcome};

use crate::audit::{
    check_house_witness, check_lipschitz, check_pairwise_selection, check_pairwise_threshold,
    check_pairwise_vote_count_threshold, check_selection_monotonicity,
    check_strengthened_selection, check_threshold_monotonicity, check_vote_count_threshold,
    check_working_selection, AuditVerdict, Axiom, Outcome,
};
use crate::error::{Error, Result};
use crate::quota::VoteProfile;
use crate::residue::{validate_residues, ResidueProfile};
use crate::rules::Rule;
use crate::scalar::{exact_or_err, Scalar};
use crate::subset::Subset;

const REGISTRY: &str = include_str!("../../data/scenarios.json");

/// Arithmetic a scenario is declared to run in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Arithmetic {
    Exact,
    Float { bits: usize },
}

impl FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Arithmetic::Exact),
            _ => s
                .strip_prefix("float:")
                .and_then(|b| b.parse().ok())
                .map(|bits| Arithmetic::Float { bits })
                .ok_or_else(|| Error::parse(s, "expected exact or float:<bits>")),
        }
    }
}

impl TryFrom<String> for Arithmetic {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Arithmetic> for String {
    fn from(a: Arithmetic) -> String {
        a.to_string()
    }
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arithmetic::Exact => f.write_str("exact"),
            Arithmetic::Float { bits } => write!(f, "float:{bits}"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inputs {
    ResiduePair {
        before: Vec<Scalar>,
        after: Vec<Scalar>,
        coalitions: Vec<Subset>,
    },
    VotePair {
        before: Vec<Scalar>,
        after: Vec<Scalar>,
        house_size: u64,
        coalitions: Vec<Subset>,
    },
    /// Exact conditional Poisson working probabilities, any common scale.
    WorkingPair {
        before: Vec<Scalar>,
        after: Vec<Scalar>,
        k: usize,
        coalitions: Vec<Subset>,
    },
    /// Twelve-party family swept over `m`.
    Fdco { linear_sweep: u64, sweep_limit: u64 },
    /// Vote-count family: the rising pair is chosen among `candidates`.
    VoteCount {
        before: Vec<Scalar>,
        after: Vec<Scalar>,
        house_size: u64,
        candidates: Subset,
        shrink: Subset,
    },
    HouseWitness {
        votes: Vec<Scalar>,
        house_size: u64,
        seats: Vec<u64>,
    },
    /// The most likely `coalition_size`-set keeps its residues; the others
    /// take `others`.
    Strengthened {
        before: Vec<Scalar>,
        others: Vec<Scalar>,
        coalition_size: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Before,
    After,
    /// `after − before`.
    Delta,
    Value,
    /// Seat threshold of a tail entry.
    Threshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    /// Same sign and within a factor of ten.
    Band,
}

/// A numeric claim about one entry of a verdict's evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    /// An evidence label, or `tail:{..}` for the seat tail of a coalition.
    pub target: String,
    pub side: Side,
    pub op: Op,
    pub value: Scalar,
    /// Rule names the bound applies to; empty means all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<String>,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Op::Eq => "=",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Band => "~",
        };
        let side = match self.side {
            Side::Before => "before",
            Side::After => "after",
            Side::Delta => "delta",
            Side::Value => "value",
            Side::Threshold => "threshold",
        };
        write!(f, "{} {side} {op} {}", self.target, self.value)
    }
}

impl Bound {
    fn applies_to(&self, rule: &str) -> bool {
        self.rules.is_empty() || self.rules.iter().any(|r| r == rule)
    }

    fn actual(&self, verdict: &AuditVerdict) -> Option<Scalar> {
        if let Some(set) = self.target.strip_prefix("tail:") {
            let (threshold, before, after) = verdict.tail(set.parse().ok()?)?;
            return match self.side {
                Side::Before => Some(before.clone()),
                Side::After => Some(after.clone()),
                Side::Delta => Some(after.clone() - before),
                Side::Threshold => Some(Scalar::from_int(threshold as i64)),
                Side::Value => None,
            };
        }
        match self.side {
            Side::Value => verdict.quantity(&self.target).cloned(),
            Side::Threshold => None,
            side => {
                let (before, after) = verdict.change(&self.target)?;
                Some(match side {
                    Side::Before => before.clone(),
                    Side::After => after.clone(),
                    _ => after.clone() - before,
                })
            }
        }
    }

    fn holds(&self, x: &Scalar) -> bool {
        let v = &self.value;
        match self.op {
            Op::Eq => x == v,
            Op::Lt => x < v,
            Op::Le => x <= v,
            Op::Gt => x > v,
            Op::Ge => x >= v,
            Op::Band => {
                let ten = Scalar::from_int(10);
                let (ax, av) = (x.abs(), v.abs());
                x.is_negative() == v.is_negative()
                    && !x.is_zero()
                    && ax.clone() * &ten >= av
                    && ax <= av * &ten
            }
        }
    }
}

/// A named instance with its expected verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    /// Extra names the scenario answers to in [`matching_ids`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub description: String,
    pub axiom: Axiom,
    /// Rule specs such as `pipage/random` or `cp/256`.
    pub rules: Vec<String>,
    pub expected: Outcome,
    pub arithmetic: Arithmetic,
    pub inputs: Inputs,
    #[serde(default)]
    pub bounds: Vec<Bound>,
}

#[derive(Deserialize)]
struct Registry {
    version: u32,
    scenarios: Vec<Scenario>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub bound: String,
    pub actual: Option<Scalar>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioRun {
    pub rule: String,
    pub verdict: AuditVerdict,
    pub bounds: Vec<BoundCheck>,
    pub notes: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub description: String,
    pub axiom: Axiom,
    pub expected: Outcome,
    pub arithmetic: Arithmetic,
    pub runs: Vec<ScenarioRun>,
    pub passed: bool,
}

fn registry() -> &'static Registry {
    static CELL: OnceLock<Registry> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(REGISTRY).expect("embedded scenario registry parses"))
}

/// Version of the embedded scenario data.
pub fn registry_version() -> u32 {
    registry().version
}

pub fn scenarios() -> &'static [Scenario] {
    &registry().scenarios
}

pub fn scenario(id: &str) -> Result<&'static Scenario> {
    scenarios()
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))
}

/// Scenario ids matching a pattern where `*` matches any run of characters.
/// Ids of the scenarios whose id or an alias matches `pattern`.
pub fn matching_ids(pattern: &str) -> Vec<&'static str> {
    scenarios()
        .iter()
        .filter(|s| std::iter::once(&s.id).chain(&s.aliases).any(|name| glob_match(pattern, name)))
        .map(|s| s.id.as_str())
        .collect()
}

fn glob_match(pattern: &str, text: &str) -> bool {
    match pattern.split_once('*') {
        None => pattern == text,
        Some((head, rest)) => {
            let Some(tail) = text.strip_prefix(head) else {
                return false;
            };
            (0..=tail.len())
                .filter(|&i| tail.is_char_boundary(i))
                .any(|i| glob_match(rest, &tail[i..]))
        }
    }
}

pub fn run_scenario(id: &str) -> Result<ScenarioReport> {
    scenario(id)?.run()
}

fn residues(values: &[Scalar]) -> Result<ResidueProfile> {
    validate_residues(values)
}

fn votes(values: &[Scalar], house_size: u64) -> Result<VoteProfile> {
    let v = values
        .iter()
        .map(|x| exact_or_err(x, "vote total"))
        .collect::<Result<Vec<_>>>()?;
    VoteProfile::new(v, house_size)
}

fn exact_all(values: &[Scalar], what: &str) -> Result<Vec<num_rational::BigRational>> {
    values.iter().map(|x| exact_or_err(x, what)).collect()
}

fn coalition(coalitions: &[Subset], i: usize) -> Result<Subset> {
    coalitions
        .get(i)
        .copied()
        .ok_or_else(|| Error::invalid(format!("scenario needs at least {} coalitions", i + 1)))
}

impl Scenario {
    fn audit(&self, rule: &Rule) -> Result<(AuditVerdict, Vec<String>)> {
        let mut notes = Vec::new();
        let verdict = match &self.inputs {
            Inputs::ResiduePair {
                before,
                after,
                coalitions,
            } => {
                let (p, p2) = (residues(before)?, residues(after)?);
                let t = coalition(coalitions, 0)?;
                match self.axiom {
                    Axiom::Selection => check_selection_monotonicity(rule, &p, &p2, t)?,
                    Axiom::StrengthenedSelection => check_strengthened_selection(rule, &p, &p2, t)?,
                    Axiom::PairwiseSelection => {
                        check_pairwise_selection(rule, &p, &p2, t, coalition(coalitions, 1)?)?
                    }
                    Axiom::Lipschitz => check_lipschitz(rule, &p, &p2, t)?,
                    other => return Err(unsupported(other, "residue pairs")),
                }
            }
            Inputs::VotePair {
                before,
                after,
                house_size,
                coalitions,
            } => {
                let (v, v2) = (votes(before, *house_size)?, votes(after, *house_size)?);
                let t = coalition(coalitions, 0)?;
                match self.axiom {
                    Axiom::Threshold => check_threshold_monotonicity(rule, &v, &v2, t)?,
                    Axiom::VoteCountThreshold => check_vote_count_threshold(rule, &v, &v2, t)?,
                    Axiom::PairwiseThreshold => {
                        check_pairwise_threshold(rule, &v, &v2, t, coalition(coalitions, 1)?)?
                    }
                    Axiom::PairwiseVoteCountThreshold => check_pairwise_vote_count_threshold(
                        rule,
                        &v,
                        &v2,
                        t,
                        coalition(coalitions, 1)?,
                    )?,
                    other => return Err(unsupported(other, "vote pairs")),
                }
            }
            Inputs::WorkingPair {
                before,
                after,
                k,
                coalitions,
            } => {
                if self.axiom != Axiom::Selection {
                    return Err(unsupported(self.axiom, "working probabilities"));
                }
                let (w, w2) = (exact_all(before, "working probability")?, exact_all(after, "working probability")?);
                check_working_selection(&w, &w2, *k, coalition(coalitions, 0)?)?
            }
            Inputs::Fdco {
                linear_sweep,
                sweep_limit,
            } => {
                let ms = fdco_schedule(*linear_sweep, *sweep_limit);
                let sweep = fdco_sweep(rule, ms.iter().copied())?;
                let (first, last) = (ms.first().copied().unwrap_or(0), ms.last().copied().unwrap_or(0));
                match sweep.witness.or(sweep.last) {
                    Some(step) => {
                        notes.push(if step.verdict.is_violated() {
                            format!(
                                "violation at m = {} with T1 = {}, T2 = {} ({} values of m checked)",
                                step.m,
                                step.grow,
                                step.shrink,
                                sweep.checked.len()
                            )
                        } else {
                            format!("no violation for m in {first}..={last} ({} values)", ms.len())
                        });
                        step.verdict
                    }
                    None => return Err(Error::invalid("empty sweep")),
                }
            }
            Inputs::VoteCount {
                before,
                after,
                house_size,
                candidates,
                shrink,
            } => {
                let v = votes(before, *house_size)?;
                let totals = exact_all(after, "vote total")?;
                let (verdict, grow, prob) =
                    families::vote_count_instance(rule, &v, &totals, *candidates, *shrink)?;
                notes.push(format!("T1 = {grow} with P[S=T1] = {prob} before"));
                verdict
            }
            Inputs::HouseWitness {
                votes: v,
                house_size,
                seats,
            } => check_house_witness(rule, &votes(v, *house_size)?, seats)?,
            Inputs::Strengthened {
                before,
                others,
                coalition_size,
            } => {
                let p = residues(before)?;
                let others = exact_all(others, "residue")?;
                families::strengthened_instance(rule, &p, &others, *coalition_size)?
            }
        };
        Ok((verdict, notes))
    }

    fn run_rule(&self, spec: &str) -> Result<ScenarioRun> {
        let rule = Rule::from_spec(spec)?;
        let (verdict, notes) = self.audit(&rule)?;
        let bounds: Vec<BoundCheck> = self
            .bounds
            .iter()
            .filter(|b| b.applies_to(rule.name()))
            .map(|b| {
                let actual = b.actual(&verdict);
                BoundCheck {
                    bound: b.to_string(),
                    passed: actual.as_ref().is_some_and(|x| b.holds(x)),
                    actual,
                }
            })
            .collect();
        let passed = verdict.outcome == self.expected && bounds.iter().all(|b| b.passed);
        Ok(ScenarioRun {
            rule: rule.to_string(),
            verdict,
            bounds,
            notes,
            passed,
        })
    }

    /// Audits every listed rule, in parallel.
    pub fn run(&self) -> Result<ScenarioReport> {
        let runs = self
            .rules
            .par_iter()
            .map(|spec| self.run_rule(spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioReport {
            id: self.id.clone(),
            description: self.description.clone(),
            axiom: self.axiom,
            expected: self.expected,
            arithmetic: self.arithmetic,
            passed: !runs.is_empty() && runs.iter().all(|r| r.passed),
            runs,
        })
    }
}

fn unsupported(axiom: Axiom, what: &str) -> Error {
    Error::invalid(format!("{axiom} cannot be checked on {what}"))
}
