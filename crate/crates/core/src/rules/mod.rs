//! Rounding rules: maps from a residue profile to a random `k`-subset whose
//! inclusion probabilities equal the residues.

pub mod conditional_poisson;
pub mod distribution;
pub mod pipage;
pub mod sampford;
pub mod systematic;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use conditional_poisson::{CpOptions, WorkingProbabilities};
pub use distribution::KSubsetDistribution;
pub use systematic::SystematicDraw;

use crate::error::{Error, Result};
use crate::residue::ResidueProfile;
use crate::scalar::Scalar;
use crate::subset::Subset;

/// The order in which order-dependent rules visit the parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Order {
    /// Parties in label order.
    Numeric,
    /// A uniformly random order, drawn once per selection.
    Random,
    /// An explicit 0-based permutation.
    Explicit(Vec<usize>),
}

impl Order {
    /// A fixed permutation, or `None` for [`Order::Random`].
    pub fn fixed(&self, n: usize) -> Option<Vec<usize>> {
        match self {
            Order::Numeric => Some((0..n).collect()),
            Order::Random => None,
            Order::Explicit(order) => Some(order.clone()),
        }
    }

    /// A permutation for one draw.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        self.fixed(n).unwrap_or_else(|| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            order
        })
    }
}

impl FromStr for Order {
    type Err = Error;

    /// `numeric`, `random`, or `explicit:3,1,2` with 1-based labels.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "numeric" => Ok(Order::Numeric),
            "random" => Ok(Order::Random),
            other => {
                let list = other
                    .strip_prefix("explicit:")
                    .ok_or_else(|| Error::parse(s, "expected numeric, random or explicit:<perm>"))?;
                let order = list
                    .split(',')
                    .map(|x| match x.trim().parse::<usize>() {
                        Ok(l) if l >= 1 => Ok(l - 1),
                        _ => Err(Error::parse(s, "permutation entries are labels 1..n")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Order::Explicit(order))
            }
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Numeric => write!(f, "numeric"),
            Order::Random => write!(f, "random"),
            Order::Explicit(order) => {
                let labels: Vec<String> = order.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "explicit:{}", labels.join(","))
            }
        }
    }
}

/// A rounding rule together with its options.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Rule {
    /// Systematic rounding; with numeric order this is Grimmett's method.
    Systematic(Order),
    Pipage(Order),
    ConditionalPoisson(CpOptions),
    Sampford,
}

impl Rule {
    pub fn grimmett() -> Self {
        Rule::Systematic(Order::Numeric)
    }

    pub fn conditional_poisson() -> Self {
        Rule::ConditionalPoisson(CpOptions::default())
    }

    /// The four rules with their default options.
    pub fn all() -> Vec<Rule> {
        vec![
            Rule::grimmett(),
            Rule::Pipage(Order::Numeric),
            Rule::conditional_poisson(),
            Rule::Sampford,
        ]
    }

    /// Builds a rule from its command-line name.
    pub fn from_name(name: &str, order: Order, cp: CpOptions) -> Result<Self> {
        match name {
            "grimmett" | "systematic" => Ok(Rule::Systematic(order)),
            "pipage" => Ok(Rule::Pipage(order)),
            "cp" | "conditional_poisson" => Ok(Rule::ConditionalPoisson(cp)),
            "sampford" => Ok(Rule::Sampford),
            other => Err(Error::parse(other, "unknown rule; expected grimmett, pipage, cp or sampford")),
        }
    }

    /// Parses `name` or `name/option`, where the option is an order for
    /// grimmett and pipage and a precision in bits for cp.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (name, option) = match spec.split_once('/') {
            Some((n, o)) => (n, Some(o)),
            None => (spec, None),
        };
        let order = match (name, option) {
            ("grimmett" | "systematic" | "pipage", Some(o)) => o.parse()?,
            _ => Order::Numeric,
        };
        let cp = match (name, option) {
            ("cp" | "conditional_poisson", Some(bits)) => CpOptions::with_precision(
                bits.parse()
                    .map_err(|_| Error::parse(spec, "precision must be a number of bits"))?,
            ),
            (_, Some(_)) if name == "sampford" => {
                return Err(Error::parse(spec, "sampford takes no option"))
            }
            _ => CpOptions::default(),
        };
        Rule::from_name(name, order, cp)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Systematic(_) => "grimmett",
            Rule::Pipage(_) => "pipage",
            Rule::ConditionalPoisson(_) => "cp",
            Rule::Sampford => "sampford",
        }
    }

    /// Tolerance for comparing probabilities produced by this rule.
    pub fn slack(&self) -> f64 {
        match self {
            Rule::ConditionalPoisson(options) => options.residual_target,
            _ => crate::scalar::FLOAT_SLACK,
        }
    }

    /// Whether distributions come out as exact rationals.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Rule::ConditionalPoisson(_))
    }

    /// Full distribution of the selected set.
    pub fn distribution(&self, p: &ResidueProfile) -> Result<KSubsetDistribution> {
        match self {
            Rule::Systematic(order) => match order.fixed(p.n()) {
                Some(order) => systematic::systematic_distribution(p, &order),
                None => systematic::systematic_random_order_distribution(p),
            },
            Rule::Pipage(order) => match order.fixed(p.n()) {
                Some(order) => pipage::pipage_distribution(p, &order),
                None => pipage::pipage_random_order_distribution(p),
            },
            Rule::ConditionalPoisson(options) => {
                let w = conditional_poisson::conditional_poisson_solve(p, options)?;
                conditional_poisson::conditional_poisson_distribution(&w.pi, p.k())
            }
            Rule::Sampford => Ok(sampford::sampford_distribution(p)),
        }
    }

    /// `P[S = set]`, avoiding full enumeration where the rule allows it.
    pub fn set_probability(&self, p: &ResidueProfile, set: Subset) -> Result<Scalar> {
        match self {
            Rule::Sampford => Ok(Scalar::Exact(sampford::sampford_set_probability(p, set))),
            Rule::ConditionalPoisson(options) => {
                if set.len() != p.k() {
                    return Ok(Scalar::zero());
                }
                let w = conditional_poisson::conditional_poisson_solve(p, options)?;
                if set.iter().any(|i| w.pi[i].is_zero()) {
                    return Ok(Scalar::zero());
                }
                Ok(conditional_poisson::conditional_poisson_set_probability(&w.pi, set))
            }
            _ => Ok(self.distribution(p)?.prob(set)),
        }
    }

    /// One random selection.
    pub fn sample<R: Rng + ?Sized>(&self, p: &ResidueProfile, rng: &mut R) -> Result<Subset> {
        match self {
            Rule::Systematic(order) => {
                let order = order.draw(p.n(), rng);
                Ok(systematic::systematic_sample(p, order, rng)?.0)
            }
            Rule::Pipage(order) => {
                let order = order.draw(p.n(), rng);
                pipage::pipage_sample(p, &order, rng)
            }
            Rule::ConditionalPoisson(options) => {
                let w = conditional_poisson::conditional_poisson_solve(p, options)?;
                conditional_poisson::conditional_poisson_sample(&w.pi, p.k(), rng)
            }
            Rule::Sampford => sampford::sampford_sample(p, rng, sampford::DEFAULT_MAX_RESTARTS),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Systematic(order) | Rule::Pipage(order) => {
                write!(f, "{} ({order} order)", self.name())
            }
            Rule::ConditionalPoisson(o) => write!(f, "cp ({} bits)", o.precision_bits),
            Rule::Sampford => write!(f, "sampford"),
        }
    }
}

/// A deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent Bernoulli inclusion of every party; the set may have any size.
pub fn poisson_sample<R: Rng + ?Sized>(p: &ResidueProfile, rng: &mut R) -> Subset {
    let (d, nums) = p.common_denominator();
    Subset::from_indices((0..p.n()).filter(|&i| pipage::bernoulli(&nums[i], &d, rng)))
}

/// Selection frequencies from repeated sampling.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    pub counts: BTreeMap<Subset, u64>,
}

impl MonteCarloEstimate {
    pub fn frequency(&self, set: Subset) -> f64 {
        *self.counts.get(&set).unwrap_or(&0) as f64 / self.samples as f64
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn std_error(&self, set: Subset) -> f64 {
        let f = self.frequency(set);
        (f * (1.0 - f) / self.samples as f64).sqrt()
    }
}

const CHUNK: u64 = 4096;

/// Estimates the distribution of `rule` from `samples` draws. Chunks use
/// seeds derived from `seed` and the chunk index, so the result does not
/// depend on the thread count.
pub fn monte_carlo(
    rule: &Rule,
    p: &ResidueProfile,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let chunks = samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<BTreeMap<Subset, u64>> {
            let mut rng = seeded_rng(seed ^ c.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut counts = BTreeMap::new();
            let size = CHUNK.min(samples - c * CHUNK);
            for _ in 0..size {
                *counts.entry(rule.sample(p, &mut rng)?).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (s, c) in b {
                *a.entry(s).or_insert(0) += c;
            }
            Ok(a)
        })?;
    Ok(MonteCarloEstimate {
        n: p.n(),
        k: p.k(),
        samples,
        counts,
    })
}

/// Rearranges `xs` into the next permutation in lexicographic order.
pub(crate) fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Folds `f` over all `n!` orders, splitting the work by the first two
/// entries.
pub(crate) fn for_each_order<A, I, F, M>(n: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &[usize]) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    if n < 2 {
        let mut acc = init();
        fold(&mut acc, &(0..n).collect::<Vec<_>>());
        return acc;
    }
    let prefixes: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    prefixes
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = init();
            let mut order = vec![a, b];
            order.extend((0..n).filter(|&x| x != a && x != b));
            loop {
                fold(&mut acc, &order);
                if !next_permutation(&mut order[2..]) {
                    break;
                }
            }
            acc
        })
        .reduce(&init, &merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visits_every_order_once() {
        let count = for_each_order(5, || 0usize, |acc, _| *acc += 1, |a, b| a + b);
        assert_eq!(count, 120);
        let mut seen = for_each_order(
            4,
            Vec::new,
            |acc, o| acc.push(o.to_vec()),
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn order_parsing() {
        assert_eq!("numeric".parse::<Order>().unwrap(), Order::Numeric);
        assert_eq!(
            "explicit:2,1,3".parse::<Order>().unwrap(),
            Order::Explicit(vec![1, 0, 2])
        );
        assert!("explicit:0,1".parse::<Order>().is_err());
        assert_eq!(Order::Explicit(vec![1, 0]).to_string(), "explicit:2,1");
    }

    #[test]
    fn poisson_sampling_rates() {
        let p = ResidueProfile::parse_list("0.1,0.7,0.1,0.6,0.7,0.8").unwrap();
        let mut rng = seeded_rng(9);
        let total: usize = (0..100_000).map(|_| poisson_sample(&p, &mut rng).len()).sum();
        assert!((total as f64 / 1e5 - 3.0).abs() < 0.02);
        let zeros = ResidueProfile::parse_list("0,0,0").unwrap();
        assert!(poisson_sample(&zeros, &mut rng).is_empty());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        let a = monte_carlo(&Rule::Sampford, &p, 10_000, 1).unwrap();
        let b = monte_carlo(&Rule::Sampford, &p, 10_000, 1).unwrap();
        assert_eq!(a.counts, b.counts);
        assert!((a.frequency(Subset::from_labels([1])) - 0.5).abs() < 4.0 * a.std_error(Subset::from_labels([1])) + 1e-9);
    }
}
