//! Checks of monotonicity axioms and of the identities and bounds behind the
//! Sampford analysis.

pub mod axioms;
pub mod lemmas;
pub mod shift;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use axioms::*;
pub use lemmas::*;
pub use shift::*;

use crate::error::{Error, Result};
use crate::quota::VoteProfile;
use crate::residue::ResidueProfile;
use crate::scalar::Scalar;
use crate::subset::Subset;

/// What an audit checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Selection,
    StrengthenedSelection,
    PairwiseSelection,
    Threshold,
    PairwiseThreshold,
    VoteCountThreshold,
    PairwiseVoteCountThreshold,
    FullSupport,
    Marginals,
    Lipschitz,
    HouseMonotonicity,
    DirectionalDerivative,
    DenominatorIdentity,
    TelescopingStep,
    ExpectationBound,
    DerivativeFormula,
    ProbabilityBound,
    Shift,
    GrimmettCoupling,
}

impl Axiom {
    pub const ALL: [Axiom; 19] = [
        Axiom::Selection,
        Axiom::StrengthenedSelection,
        Axiom::PairwiseSelection,
        Axiom::Threshold,
        Axiom::PairwiseThreshold,
        Axiom::VoteCountThreshold,
        Axiom::PairwiseVoteCountThreshold,
        Axiom::FullSupport,
        Axiom::Marginals,
        Axiom::Lipschitz,
        Axiom::HouseMonotonicity,
        Axiom::DirectionalDerivative,
        Axiom::DenominatorIdentity,
        Axiom::TelescopingStep,
        Axiom::ExpectationBound,
        Axiom::DerivativeFormula,
        Axiom::ProbabilityBound,
        Axiom::Shift,
        Axiom::GrimmettCoupling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Selection => "selection",
            Axiom::StrengthenedSelection => "strengthened-selection",
            Axiom::PairwiseSelection => "pairwise-selection",
            Axiom::Threshold => "threshold",
            Axiom::PairwiseThreshold => "pairwise-threshold",
            Axiom::VoteCountThreshold => "vote-count-threshold",
            Axiom::PairwiseVoteCountThreshold => "pairwise-vote-count-threshold",
            Axiom::FullSupport => "full-support",
            Axiom::Marginals => "marginals",
            Axiom::Lipschitz => "lipschitz",
            Axiom::HouseMonotonicity => "house-monotonicity",
            Axiom::DirectionalDerivative => "directional-derivative",
            Axiom::DenominatorIdentity => "denominator-identity",
            Axiom::TelescopingStep => "telescoping-step",
            Axiom::ExpectationBound => "expectation-bound",
            Axiom::DerivativeFormula => "derivative-formula",
            Axiom::ProbabilityBound => "probability-bound",
            Axiom::Shift => "shift",
            Axiom::GrimmettCoupling => "grimmett-coupling",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Axiom::ALL.iter().map(|a| a.name()).collect();
                Error::parse(s, format!("unknown axiom; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Satisfied,
    Violated,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Satisfied => "SATISFIED",
            Outcome::Violated => "VIOLATED",
            Outcome::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// The inputs an audit ran on.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    ResiduePair {
        before: ResidueProfile,
        after: ResidueProfile,
        coalitions: Vec<Subset>,
    },
    VotePair {
        before: VoteProfile,
        after: VoteProfile,
        coalitions: Vec<Subset>,
    },
    Residues {
        residues: ResidueProfile,
        coalitions: Vec<Subset>,
    },
    Votes {
        votes: VoteProfile,
    },
    Shift {
        values: [Scalar; 5],
    },
}

/// A number the verdict rests on.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A quantity before and after the change.
    Change {
        label: String,
        before: Scalar,
        after: Scalar,
    },
    /// `P[Σ_{i∈T} α_i ≥ θ]` before and after the change.
    Tail {
        coalition: Subset,
        threshold: u64,
        before: Scalar,
        after: Scalar,
    },
    Quantity {
        label: String,
        value: Scalar,
    },
    Note {
        text: String,
    },
}

impl Evidence {
    pub fn change(label: impl Into<String>, before: Scalar, after: Scalar) -> Self {
        Evidence::Change {
            label: label.into(),
            before,
            after,
        }
    }

    pub fn quantity(label: impl Into<String>, value: Scalar) -> Self {
        Evidence::Quantity {
            label: label.into(),
            value,
        }
    }

    pub fn note(text: impl Into<String>) -> Self {
        Evidence::Note { text: text.into() }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Change {
                label,
                before,
                after,
            } => write!(f, "{label}: {before} -> {after}"),
            Evidence::Tail {
                coalition,
                threshold,
                before,
                after,
            } => write!(f, "P[{coalition} holds >= {threshold} seats]: {before} -> {after}"),
            Evidence::Quantity { label, value } => write!(f, "{label} = {value}"),
            Evidence::Note { text } => f.write_str(text),
        }
    }
}

/// Result of one audit.
#[derive(Clone, Debug, Serialize)]
pub struct AuditVerdict {
    pub axiom: Axiom,
    pub rule: Option<String>,
    pub instance: Instance,
    pub outcome: Outcome,
    pub evidence: Vec<Evidence>,
}

impl AuditVerdict {
    pub fn is_satisfied(&self) -> bool {
        self.outcome == Outcome::Satisfied
    }

    pub fn is_violated(&self) -> bool {
        self.outcome == Outcome::Violated
    }

    /// The first change entry with the given label.
    pub fn change(&self, label: &str) -> Option<(&Scalar, &Scalar)> {
        self.evidence.iter().find_map(|e| match e {
            Evidence::Change {
                label: l,
                before,
                after,
            } if l == label => Some((before, after)),
            _ => None,
        })
    }

    pub fn quantity(&self, label: &str) -> Option<&Scalar> {
        self.evidence.iter().find_map(|e| match e {
            Evidence::Quantity { label: l, value } if l == label => Some(value),
            _ => None,
        })
    }

    /// Tail evidence for `coalition`.
    pub fn tail(&self, coalition: Subset) -> Option<(u64, &Scalar, &Scalar)> {
        self.evidence.iter().find_map(|e| match e {
            Evidence::Tail {
                coalition: c,
                threshold,
                before,
                after,
            } if *c == coalition => Some((*threshold, before, after)),
            _ => None,
        })
    }
}

impl fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.axiom)?;
        if let Some(rule) = &self.rule {
            write!(f, "[{rule}] ")?;
        }
        write!(f, "{}", self.outcome)?;
        for e in &self.evidence {
            write!(f, "; {e}")?;
        }
        Ok(())
    }
}

/// `P[S = T]` label used in evidence.
pub fn set_label(set: Subset) -> String {
    format!("P[S={set}]")
}
