//! Randomized search for counterexamples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::gen::{self, Perturbation};
use crate::audit::{
    check_lipschitz, check_pairwise_selection, check_pairwise_threshold,
    check_selection_monotonicity, check_threshold_monotonicity, check_vote_count_threshold,
    AuditVerdict, Axiom, Outcome,
};
use crate::error::{Error, Result};
use crate::rules::Rule;
use crate::subset::{Subset, MAX_PARTIES};

/// Trials evaluated in parallel before looking for a witness.
const CHUNK: u64 = 256;

#[derive(Clone, Debug, Serialize)]
pub struct SearchConfig {
    pub rule: Rule,
    pub axiom: Axiom,
    /// Largest number of parties.
    pub n: usize,
    /// Smallest number of parties; each trial draws from `min_n..=n`.
    pub min_n: usize,
    /// Residue sum; random in `1..n` when absent.
    pub k: Option<usize>,
    /// Size of the coalition in threshold searches; random in `1..n` when absent.
    pub coalition_size: Option<usize>,
    pub trial_count: u64,
    pub seed: u64,
    pub scheme: Perturbation,
}

impl SearchConfig {
    pub fn new(rule: Rule, axiom: Axiom, n: usize, trial_count: u64, seed: u64) -> Self {
        SearchConfig {
            rule,
            axiom,
            n,
            min_n: n,
            k: None,
            coalition_size: None,
            trial_count,
            seed,
            scheme: Perturbation::Within,
        }
    }

    pub fn supports(axiom: Axiom) -> bool {
        matches!(
            axiom,
            Axiom::Selection
                | Axiom::PairwiseSelection
                | Axiom::Lipschitz
                | Axiom::Threshold
                | Axiom::PairwiseThreshold
                | Axiom::VoteCountThreshold
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.trial_count == 0 {
            return Err(Error::invalid("trial count must be at least 1"));
        }
        if !Self::supports(self.axiom) {
            return Err(Error::invalid(format!("search does not generate instances for {}", self.axiom)));
        }
        if self.min_n < 2 || self.min_n > self.n || self.n > MAX_PARTIES {
            return Err(Error::invalid(format!(
                "need 2 <= min_n <= n <= {MAX_PARTIES}, got {}..={}",
                self.min_n, self.n
            )));
        }
        if let Some(k) = self.k {
            if k == 0 || k >= self.min_n {
                return Err(Error::invalid(format!("k = {k} must lie in 1..{}", self.min_n)));
            }
        }
        if let Some(c) = self.coalition_size {
            if c == 0 || c >= self.min_n {
                return Err(Error::invalid(format!(
                    "coalition size {c} must lie in 1..{}",
                    self.min_n
                )));
            }
        }
        Ok(())
    }

    /// Generator for one trial: a ChaCha stream selected by the trial index.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    /// Generates and audits the instance of one trial.
    pub fn run_trial(&self, trial: u64) -> Result<AuditVerdict> {
        let rng = &mut self.trial_rng(trial);
        let n = rng.random_range(self.min_n..=self.n);
        let k = self.k.unwrap_or_else(|| rng.random_range(1..n));
        let rule = &self.rule;
        match self.axiom {
            Axiom::Selection => {
                let (p, q, t) = gen::selection_pair(rng, n, k);
                check_selection_monotonicity(rule, &p, &q, t)
            }
            Axiom::PairwiseSelection => {
                let (p, q, t1, t2) = gen::pairwise_pair(rng, n, k);
                check_pairwise_selection(rule, &p, &q, t1, t2)
            }
            Axiom::Lipschitz => {
                let (p, q, t) = gen::free_pair(rng, n, k);
                check_lipschitz(rule, &p, &q, t)
            }
            Axiom::Threshold | Axiom::VoteCountThreshold | Axiom::PairwiseThreshold => {
                let size = self.coalition_size.unwrap_or_else(|| rng.random_range(1..n));
                let (v, w, t) = gen::threshold_pair(rng, n, k, size, self.scheme)?;
                match self.axiom {
                    Axiom::Threshold => check_threshold_monotonicity(rule, &v, &w, t),
                    Axiom::VoteCountThreshold => check_vote_count_threshold(rule, &v, &w, t),
                    _ => {
                        let others: Vec<usize> = Subset::full(n).difference(t).iter().collect();
                        let size = rng.random_range(1..=others.len());
                        let shrink = gen::random_subset(rng, others.len(), size);
                        let shrink = Subset::from_indices(shrink.iter().map(|j| others[j]));
                        check_pairwise_threshold(rule, &v, &w, t, shrink)
                    }
                }
            }
            other => Err(Error::invalid(format!("search does not generate instances for {other}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    /// Trials run; stops at the end of the chunk holding the first witness.
    pub trials: u64,
    pub satisfied: u64,
    pub inconclusive: u64,
    /// Trials whose audit failed with an error, such as a solver failure.
    pub failures: u64,
    pub first_failure: Option<String>,
    /// Lowest-index violating trial.
    pub witness: Option<(u64, AuditVerdict)>,
}

/// Runs trials in parallel chunks and returns the violation with the lowest
/// trial index. Results depend only on the configuration.
pub fn search_counterexamples(cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let mut out = SearchOutcome {
        trials: 0,
        satisfied: 0,
        inconclusive: 0,
        failures: 0,
        first_failure: None,
        witness: None,
    };
    let mut start = 0;
    while start < cfg.trial_count && out.witness.is_none() {
        let end = (start + CHUNK).min(cfg.trial_count);
        let results: Vec<Result<AuditVerdict>> = (start..end)
            .into_par_iter()
            .map(|t| cfg.run_trial(t))
            .collect();
        for (t, r) in (start..end).zip(results) {
            match r {
                Ok(v) => match v.outcome {
                    Outcome::Satisfied => out.satisfied += 1,
                    Outcome::Inconclusive => out.inconclusive += 1,
                    Outcome::Violated => {
                        if out.witness.is_none() {
                            out.witness = Some((t, v));
                        }
                    }
                },
                Err(e) => {
                    out.failures += 1;
                    out.first_failure.get_or_insert_with(|| format!("trial {t}: {e}"));
                }
            }
        }
        out.trials = end;
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Order;

    #[test]
    fn zero_trials_rejected() {
        let cfg = SearchConfig::new(Rule::Sampford, Axiom::Selection, 5, 0, 1);
        assert!(search_counterexamples(&cfg).is_err());
    }

    #[test]
    fn grimmett_three_party_coalitions_fail() {
        let mut cfg = SearchConfig::new(Rule::grimmett(), Axiom::Threshold, 6, 4000, 7);
        cfg.coalition_size = Some(3);
        let out = search_counterexamples(&cfg).unwrap();
        let (_, v) = out.witness.expect("a witness");
        assert!(v.is_violated());
    }

    #[test]
    fn deterministic() {
        let mut cfg = SearchConfig::new(Rule::Pipage(Order::Numeric), Axiom::Selection, 6, 600, 11);
        cfg.min_n = 3;
        let a = search_counterexamples(&cfg).unwrap();
        let b = search_counterexamples(&cfg).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.inconclusive, b.inconclusive);
        assert_eq!(a.witness.map(|w| w.0), b.witness.map(|w| w.0));
    }

    #[test]
    fn sampford_selection_holds() {
        let mut cfg = SearchConfig::new(Rule::Sampford, Axiom::Selection, 6, 300, 3);
        cfg.min_n = 2;
        let out = search_counterexamples(&cfg).unwrap();
        assert!(out.witness.is_none());
        assert_eq!(out.failures, 0);
        assert_eq!(out.inconclusive, 0);
    }
}
