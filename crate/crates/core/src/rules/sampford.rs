//! Sampford rounding: the set `A` is chosen with probability proportional to
//! `f(A) = Σ_{i∈A}(1−p_i) · Π_{j∈A} p_j · Π_{j∉A}(1−p_j)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::KSubsetDistribution;
use crate::error::{Error, Result};
use crate::poisson::truncated_deficit;
use crate::residue::ResidueProfile;
use crate::subset::{k_subsets, Subset};

/// Default cap on restarts of the rejective sampler.
pub const DEFAULT_MAX_RESTARTS: u64 = 1_000_000;

/// `f(A)` for a set `A` of any size.
pub fn sampford_f(set: Subset, p: &ResidueProfile) -> BigRational {
    let one = BigRational::one();
    let mut lead = BigRational::zero();
    let mut product = BigRational::one();
    for i in 0..p.n() {
        let pi = p.get(i);
        if set.contains(i) {
            lead += &one - pi;
            product *= pi;
        } else {
            product *= &one - pi;
        }
    }
    lead * product
}

/// Integer weights `D^{n+1}·f(A)` of every `k`-set of positive parties.
///
/// Parties with zero residue are left out; they would contribute the same
/// factor `D` to every weight.
pub fn sampford_weights(p: &ResidueProfile) -> (Vec<(Subset, BigInt)>, BigInt) {
    let (d, nums) = p.common_denominator();
    let positive: Vec<usize> = p.positive().iter().collect();
    let m = positive.len();
    let k = p.k();
    let a: Vec<BigInt> = positive.iter().map(|&i| nums[i].clone()).collect();
    let b: Vec<BigInt> = a.iter().map(|x| &d - x).collect();

    let fits = (d.bits() as usize + 1) * (m + 1) + 2 * m + 8 < 126;
    let mut weights = Vec::new();
    let mut total = BigInt::zero();
    if fits {
        use num_traits::ToPrimitive;
        let a: Vec<i128> = a.iter().map(|x| x.to_i128().unwrap()).collect();
        let b: Vec<i128> = b.iter().map(|x| x.to_i128().unwrap()).collect();
        let mut small_total: i128 = 0;
        for local in k_subsets(m, k) {
            let mut lead = 0i128;
            let mut product = 1i128;
            for j in 0..m {
                if local.contains(j) {
                    lead += b[j];
                    product *= a[j];
                } else {
                    product *= b[j];
                }
            }
            let w = lead * product;
            small_total += w;
            weights.push((embed(local, &positive), BigInt::from(w)));
        }
        total = small_total.into();
    } else {
        for local in k_subsets(m, k) {
            let mut lead = BigInt::zero();
            let mut product = BigInt::one();
            for j in 0..m {
                if local.contains(j) {
                    lead += &b[j];
                    product *= &a[j];
                } else {
                    product *= &b[j];
                }
            }
            let w = lead * product;
            total += &w;
            weights.push((embed(local, &positive), w));
        }
    }
    (weights, total)
}

fn embed(local: Subset, positions: &[usize]) -> Subset {
    Subset::from_indices(local.iter().map(|j| positions[j]))
}

/// Exact distribution `P[S=A] = f(A) / Σ_{A'} f(A')`.
pub fn sampford_distribution(p: &ResidueProfile) -> KSubsetDistribution {
    if p.k() == 0 {
        return KSubsetDistribution::point(p.n(), Subset::EMPTY);
    }
    let (weights, total) = sampford_weights(p);
    KSubsetDistribution::from_exact(
        p.n(),
        p.k(),
        weights
            .into_iter()
            .map(|(s, w)| (s, BigRational::new(w, total.clone()))),
    )
}

/// `P[S=A]` for a single set, using `Σ_A f(A) = E[1{|B|<k}(k−|B|)]` so no
/// enumeration is needed.
pub fn sampford_set_probability(p: &ResidueProfile, set: Subset) -> BigRational {
    if set.len() != p.k() {
        return BigRational::zero();
    }
    if p.k() == 0 {
        return BigRational::one();
    }
    sampford_f(set, p) / truncated_deficit(p)
}

/// The rejective procedure: one draw proportional to `p`, then `k−1` draws
/// with replacement proportional to `p/(1−p)`; start over unless all `k`
/// draws are distinct.
pub fn sampford_sample<R: Rng + ?Sized>(
    p: &ResidueProfile,
    rng: &mut R,
    max_restarts: u64,
) -> Result<Subset> {
    let k = p.k();
    if k == 0 {
        return Ok(Subset::EMPTY);
    }
    let probs = p.to_f64();
    let first = WeightedIndex::new(&probs).map_err(|e| Error::invalid(e.to_string()))?;
    let odds: Vec<f64> = p
        .residues()
        .iter()
        .map(|x| crate::scalar::rational_to_f64(&(x / (BigRational::one() - x))))
        .collect();
    let rest = WeightedIndex::new(&odds).map_err(|e| Error::invalid(e.to_string()))?;
    for _ in 0..=max_restarts {
        let mut chosen = Subset::singleton(first.sample(rng));
        let mut distinct = true;
        for _ in 1..k {
            let i = rest.sample(rng);
            if chosen.contains(i) {
                distinct = false;
                break;
            }
            chosen = chosen.insert(i);
        }
        if distinct {
            return Ok(chosen);
        }
    }
    Err(Error::TooManyRestarts(max_restarts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use rand::SeedableRng;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn f_of_a_singleton() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        assert_eq!(sampford_f(Subset::from_labels([1]), &p), r(1, 8));
        let z = ResidueProfile::parse_list("0,0.5,0.5").unwrap();
        assert!(sampford_f(Subset::from_labels([1]), &z).is_zero());
    }

    #[test]
    fn f_matches_reverse_summation() {
        let p = ResidueProfile::parse_list("0.1,0.7,0.1,0.6,0.7,0.8").unwrap();
        let set = Subset::from_labels([1, 2, 3]);
        let mut lead = BigRational::zero();
        let mut product = BigRational::one();
        for i in (0..6).rev() {
            if set.contains(i) {
                lead += BigRational::one() - p.get(i);
                product *= p.get(i);
            } else {
                product *= BigRational::one() - p.get(i);
            }
        }
        assert_eq!(sampford_f(set, &p), lead * product);
    }

    #[test]
    fn two_halves() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        let d = sampford_distribution(&p);
        assert_eq!(d.prob(Subset::from_labels([1])), Scalar::ratio(1, 2));
    }

    #[test]
    fn four_party_marginals() {
        let p = ResidueProfile::parse_list("0.8,0.4,0.4,0.4").unwrap();
        let d = sampford_distribution(&p);
        assert_eq!(d.marginals()[0], Scalar::ratio(4, 5));
        assert_eq!(d.marginal_error(p.residues()), Scalar::zero());
        for s in d.support() {
            assert_eq!(
                d.prob(s),
                Scalar::Exact(sampford_set_probability(&p, s)),
                "{s}"
            );
        }
    }

    #[test]
    fn big_denominators_agree_with_small_path() {
        let base = ["1/3", "1/7", "1/11", "1/13", "1/17", "1/19", "1/23"];
        let mut values: Vec<BigRational> = base
            .iter()
            .map(|s| crate::scalar::parse_rational(s).unwrap())
            .collect();
        let sum: BigRational = values.iter().sum();
        let rest = BigRational::from_integer(2.into()) - sum;
        values.push(&rest / BigRational::from_integer(2.into()));
        values.push(rest / BigRational::from_integer(2.into()));
        let p = ResidueProfile::new(values).unwrap();
        let d = sampford_distribution(&p);
        assert_eq!(d.marginal_error(p.residues()), Scalar::zero());
    }

    #[test]
    fn sampler_terminates_near_one() {
        let p = ResidueProfile::parse_list("0.999,0.999,0.999,0.003").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = sampford_sample(&p, &mut rng, DEFAULT_MAX_RESTARTS).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn fair_coin_frequency() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let hits = (0..100_000)
            .filter(|_| sampford_sample(&p, &mut rng, 10).unwrap() == Subset::from_labels([1]))
            .count();
        assert!((hits as f64 / 1e5 - 0.5).abs() < 0.01);
    }
}
