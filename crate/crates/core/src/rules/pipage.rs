//! Pipage rounding: repeatedly take the first two fractional parties in a
//! fixed order and move mass between them until one of them is integral.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use super::systematic::validate_order;
use super::{for_each_order, KSubsetDistribution};
use crate::error::{Error, Result};
use crate::residue::ResidueProfile;
use crate::subset::Subset;

/// Largest party count for exact averaging over all orders.
pub const RANDOM_ORDER_LIMIT: usize = 8;

/// Outcome of one pairing step: the new values of the two parties and the
/// probability of that outcome as `numerator / denominator`.
struct Branch<T> {
    values: (T, T),
    weight: (T, T),
}

/// The two possible outcomes of pairing values `a` and `b` (out of `d`).
fn branches<T: Integer + Clone>(a: &T, b: &T, d: &T) -> [Branch<T>; 2] {
    let sum = a.clone() + b.clone();
    if sum <= *d {
        [
            Branch {
                values: (sum.clone(), T::zero()),
                weight: (a.clone(), sum.clone()),
            },
            Branch {
                values: (T::zero(), sum.clone()),
                weight: (b.clone(), sum),
            },
        ]
    } else {
        let over = sum.clone() - d.clone();
        let den = d.clone() + d.clone() - sum;
        [
            Branch {
                values: (d.clone(), over.clone()),
                weight: (d.clone() - b.clone(), den.clone()),
            },
            Branch {
                values: (over, d.clone()),
                weight: (d.clone() - a.clone(), den),
            },
        ]
    }
}

fn first_two_fractional<T: Integer>(state: &[T], d: &T, order: &[usize]) -> Option<(usize, usize)> {
    let mut found = order
        .iter()
        .copied()
        .filter(|&i| !state[i].is_zero() && state[i] != *d);
    let i = found.next()?;
    let j = found.next()?;
    Some((i, j))
}

fn recurse<T>(
    state: &mut Vec<T>,
    d: &T,
    order: &[usize],
    prob: BigRational,
    out: &mut HashMap<Subset, BigRational>,
) where
    T: Integer + Clone + Into<BigInt>,
{
    let Some((i, j)) = first_two_fractional(state, d, order) else {
        let set = Subset::from_indices((0..state.len()).filter(|&x| state[x] == *d));
        *out.entry(set).or_insert_with(BigRational::zero) += prob;
        return;
    };
    let (a, b) = (state[i].clone(), state[j].clone());
    for branch in branches(&a, &b, d) {
        let (num, den) = branch.weight;
        if num.is_zero() {
            continue;
        }
        state[i] = branch.values.0;
        state[j] = branch.values.1;
        let w = BigRational::new(num.into(), den.into());
        recurse(state, d, order, &prob * w, out);
    }
    state[i] = a;
    state[j] = b;
}

fn leaf_masses(p: &ResidueProfile, order: &[usize], out: &mut HashMap<Subset, BigRational>) {
    let (d, nums) = p.common_denominator();
    match (d.to_i64(), nums.iter().map(|a| a.to_i64()).collect::<Option<Vec<_>>>()) {
        (Some(d), Some(mut state)) if d < i64::MAX / 4 => {
            recurse(&mut state, &d, order, BigRational::one(), out)
        }
        _ => {
            let mut state = nums;
            recurse(&mut state, &d, order, BigRational::one(), out)
        }
    }
}

/// Exact distribution for a fixed order (0-based permutation).
pub fn pipage_distribution(p: &ResidueProfile, order: &[usize]) -> Result<KSubsetDistribution> {
    validate_order(order, p.n())?;
    let mut out = HashMap::new();
    leaf_masses(p, order, &mut out);
    Ok(KSubsetDistribution::from_exact(p.n(), p.k(), out))
}

/// Exact average of [`pipage_distribution`] over all `n!` orders.
pub fn pipage_random_order_distribution(p: &ResidueProfile) -> Result<KSubsetDistribution> {
    let n = p.n();
    if n > RANDOM_ORDER_LIMIT {
        return Err(Error::TooManyParties {
            n,
            limit: RANDOM_ORDER_LIMIT,
        });
    }
    let sums = for_each_order(
        n,
        HashMap::new,
        |acc, order| leaf_masses(p, order, acc),
        |mut a, b| {
            for (s, m) in b {
                *a.entry(s).or_insert_with(BigRational::zero) += m;
            }
            a
        },
    );
    let orders = BigRational::from_integer(BigInt::from((1..=n as u64).product::<u64>()));
    Ok(KSubsetDistribution::from_exact(
        n,
        p.k(),
        sums.into_iter().map(|(s, m)| (s, m / &orders)),
    ))
}

/// Bernoulli draw with success probability `num / den`, exact when both fit
/// in 128 bits.
pub(crate) fn bernoulli<R: Rng + ?Sized>(num: &BigInt, den: &BigInt, rng: &mut R) -> bool {
    match (num.to_u128(), den.to_u128()) {
        (Some(a), Some(b)) => rng.random_range(0..b) < a,
        _ => {
            let ratio = crate::scalar::rational_to_f64(&BigRational::new(num.clone(), den.clone()));
            rng.random::<f64>() < ratio
        }
    }
}

/// One pipage draw with the given order.
pub fn pipage_sample<R: Rng + ?Sized>(
    p: &ResidueProfile,
    order: &[usize],
    rng: &mut R,
) -> Result<Subset> {
    validate_order(order, p.n())?;
    let (d, mut state) = p.common_denominator();
    while let Some((i, j)) = first_two_fractional(&state, &d, order) {
        let [first, second] = branches(&state[i], &state[j], &d);
        let chosen = if bernoulli(&first.weight.0, &first.weight.1, rng) {
            first
        } else {
            second
        };
        state[i] = chosen.values.0;
        state[j] = chosen.values.1;
    }
    debug_assert!(state.iter().all(|x| x.is_zero() || *x == d || x.is_negative()));
    Ok(Subset::from_indices(
        (0..state.len()).filter(|&x| state[x] == d),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn numeric(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn update_sequence_reaches_the_coalition() {
        let p = ResidueProfile::parse_list("1/3,1/2,1/3,2/3,2/3,1/2").unwrap();
        let d = pipage_distribution(&p, &numeric(6)).unwrap();
        assert!(d.prob(Subset::from_labels([1, 3, 6])).is_positive());
        assert_eq!(d.marginal_error(p.residues()), Scalar::zero());
    }

    #[test]
    fn coalition_unreachable_after_shift() {
        let p = ResidueProfile::parse_list("1/3,1/3,1/3,2/3,2/3,2/3").unwrap();
        let d = pipage_distribution(&p, &numeric(6)).unwrap();
        assert_eq!(d.prob(Subset::from_labels([1, 3, 6])), Scalar::zero());
    }

    #[test]
    fn two_halves() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        for d in [
            pipage_distribution(&p, &numeric(2)).unwrap(),
            pipage_random_order_distribution(&p).unwrap(),
        ] {
            assert_eq!(d.prob(Subset::from_labels([1])), Scalar::ratio(1, 2));
        }
    }

    #[test]
    fn random_order_bounds() {
        let before = ResidueProfile::parse_list("0.07,0.9,0.57,0.37,0.99,0.1").unwrap();
        let after = ResidueProfile::parse_list("0.06,0.91,0.57,0.37,0.99,0.1").unwrap();
        let t = Subset::from_labels([2, 3, 4]);
        let pb = pipage_random_order_distribution(&before).unwrap().prob(t);
        let pa = pipage_random_order_distribution(&after).unwrap().prob(t);
        assert!(pb >= Scalar::ratio(43, 10000), "{pb}");
        assert!(pa <= Scalar::ratio(42, 10000), "{pa}");
    }

    #[test]
    fn samples_lie_in_the_support() {
        use rand::SeedableRng;
        let p = ResidueProfile::parse_list("0.1,0.7,0.1,0.6,0.7,0.8").unwrap();
        let d = pipage_distribution(&p, &numeric(6)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = pipage_sample(&p, &numeric(6), &mut rng).unwrap();
            assert!(d.prob(s).is_positive(), "{s}");
        }
    }
}
