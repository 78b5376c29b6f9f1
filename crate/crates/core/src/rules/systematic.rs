//! Systematic rounding: lay the residues out on a line in some order, shift
//! the line by a uniform amount, and select every party whose interval
//! contains an integer.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use super::{for_each_order, KSubsetDistribution};
use crate::error::{Error, Result};
use crate::residue::ResidueProfile;
use crate::subset::Subset;

/// Largest party count for exact averaging over all orders.
pub const RANDOM_ORDER_LIMIT: usize = 10;

/// One realization of the systematic procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystematicDraw {
    /// 0-based parties in the order they are laid out.
    pub order: Vec<usize>,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub shift: BigRational,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub offset: BigRational,
}

impl SystematicDraw {
    pub fn new(order: Vec<usize>, shift: BigRational) -> Self {
        SystematicDraw {
            order,
            shift,
            offset: BigRational::zero(),
        }
    }

    pub fn with_offset(mut self, offset: BigRational) -> Self {
        self.offset = offset;
        self
    }

    /// Parties whose interval `[u + u₀ + c_{j-1}, u + u₀ + c_j)` contains an
    /// integer.
    pub fn select(&self, p: &ResidueProfile) -> Subset {
        let mut start = &self.shift + &self.offset;
        let mut chosen = Subset::EMPTY;
        for &i in &self.order {
            let end = &start + p.get(i);
            if end.ceil() > start.ceil() {
                chosen = chosen.insert(i);
            }
            start = end;
        }
        chosen
    }
}

/// Checks that `order` is a permutation of `0..n`.
pub fn validate_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid(format!(
            "order lists {} parties but the profile has {n}",
            order.len()
        )));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::invalid("order is not a permutation of the parties"));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Interval lengths (in units of `1/D`) of each selected set for one order.
fn sweep<T>(nums: &[T], d: &T, order: &[usize], out: &mut HashMap<Subset, T>)
where
    T: Integer + Signed + Clone,
{
    let two = T::one() + T::one();
    let mut prefix = Vec::with_capacity(order.len() + 1);
    prefix.push(T::zero());
    for &i in order {
        let next = prefix.last().unwrap().clone() + nums[i].clone();
        prefix.push(next);
    }
    let mut breaks: Vec<T> = prefix
        .iter()
        .map(|c| (T::zero() - c.clone()).mod_floor(d))
        .collect();
    breaks.push(d.clone());
    breaks.sort();
    breaks.dedup();
    let two_d = two.clone() * d.clone();
    for w in breaks.windows(2) {
        let gap = w[1].clone() - w[0].clone();
        if gap.is_zero() {
            continue;
        }
        // Midpoint of the interval, measured in units of 1/(2D).
        let mid = w[0].clone() + w[1].clone();
        let mut chosen = Subset::EMPTY;
        let mut prev = mid.clone().div_ceil(&two_d);
        for (j, &i) in order.iter().enumerate() {
            let cur = (mid.clone() + two.clone() * prefix[j + 1].clone()).div_ceil(&two_d);
            if cur > prev {
                chosen = chosen.insert(i);
            }
            prev = cur;
        }
        let slot = out.entry(chosen).or_insert_with(T::zero);
        *slot = slot.clone() + gap;
    }
}

enum Numerators {
    Small(Vec<i128>, i128),
    Big(Vec<BigInt>, BigInt),
}

fn numerators(p: &ResidueProfile) -> Numerators {
    let (d, nums) = p.common_denominator();
    // Room for prefix sums, doubling and accumulation over all orders.
    let small = d.bits() < 80;
    if small {
        Numerators::Small(
            nums.iter().map(|a| a.to_i128().unwrap()).collect(),
            d.to_i128().unwrap(),
        )
    } else {
        Numerators::Big(nums, d)
    }
}

fn counts_to_distribution<T: Into<BigInt>>(
    n: usize,
    k: usize,
    counts: HashMap<Subset, T>,
    total: BigInt,
) -> KSubsetDistribution {
    KSubsetDistribution::from_exact(
        n,
        k,
        counts
            .into_iter()
            .map(|(s, c)| (s, BigRational::new(c.into(), total.clone()))),
    )
}

/// Exact distribution for a fixed order (0-based permutation).
pub fn systematic_distribution(p: &ResidueProfile, order: &[usize]) -> Result<KSubsetDistribution> {
    validate_order(order, p.n())?;
    let mut counts = HashMap::new();
    let dist = match numerators(p) {
        Numerators::Small(nums, d) => {
            sweep(&nums, &d, order, &mut counts);
            counts_to_distribution(p.n(), p.k(), counts, d.into())
        }
        Numerators::Big(nums, d) => {
            let mut big = HashMap::new();
            sweep(&nums, &d, order, &mut big);
            counts_to_distribution(p.n(), p.k(), big, d)
        }
    };
    Ok(dist)
}

/// Exact average of [`systematic_distribution`] over all `n!` orders.
pub fn systematic_random_order_distribution(p: &ResidueProfile) -> Result<KSubsetDistribution> {
    let n = p.n();
    if n > RANDOM_ORDER_LIMIT {
        return Err(Error::TooManyParties {
            n,
            limit: RANDOM_ORDER_LIMIT,
        });
    }
    let orders = BigInt::from((1..=n as u64).product::<u64>());
    let dist = match numerators(p) {
        Numerators::Small(nums, d) => {
            let counts = for_each_order(
                n,
                HashMap::<Subset, i128>::new,
                |acc, order| sweep(&nums, &d, order, acc),
                merge_counts,
            );
            counts_to_distribution(n, p.k(), counts, orders * BigInt::from(d))
        }
        Numerators::Big(nums, d) => {
            let counts = for_each_order(
                n,
                HashMap::<Subset, BigInt>::new,
                |acc, order| sweep(&nums, &d, order, acc),
                merge_counts,
            );
            counts_to_distribution(n, p.k(), counts, orders * d)
        }
    };
    Ok(dist)
}

fn merge_counts<T: Clone + std::ops::Add<Output = T>>(
    mut a: HashMap<Subset, T>,
    b: HashMap<Subset, T>,
) -> HashMap<Subset, T> {
    for (s, c) in b {
        match a.get_mut(&s) {
            Some(x) => *x = x.clone() + c,
            None => {
                a.insert(s, c);
            }
        }
    }
    a
}

/// Draws the shift `u` so that the selected set has exactly the law of
/// [`systematic_distribution`]: every selected set is constant on cells of
/// width `1/D`, so a uniformly chosen cell midpoint suffices when `D` fits in
/// 64 bits.
pub fn draw_shift<R: Rng + ?Sized>(p: &ResidueProfile, rng: &mut R) -> BigRational {
    let (d, _) = p.common_denominator();
    match d.to_u64() {
        Some(d) => {
            let t = rng.random_range(0..d);
            BigRational::new(BigInt::from(2 * t as u128 + 1), BigInt::from(2 * d as u128))
        }
        None => BigRational::from_float(rng.random::<f64>()).unwrap_or_else(BigRational::zero),
    }
}

/// One systematic draw with the given order.
pub fn systematic_sample<R: Rng + ?Sized>(
    p: &ResidueProfile,
    order: Vec<usize>,
    rng: &mut R,
) -> Result<(Subset, SystematicDraw)> {
    validate_order(&order, p.n())?;
    let draw = SystematicDraw::new(order, draw_shift(p, rng));
    Ok((draw.select(p), draw))
}
