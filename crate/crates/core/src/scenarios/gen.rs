//! Random instances on a fixed grid of residues.
//!
//! Residues are multiples of `1/DENOMINATOR`; moves between profiles are
//! random transfers between parties, so sums stay fixed and every profile is
//! exactly representable.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::quota::VoteProfile;
use crate::residue::ResidueProfile;
use crate::subset::Subset;

/// Grid of residues; divisible by every `n ≤ 8`.
pub const DENOMINATOR: i64 = 840;

/// How far vote transfers may go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// Lower quotas stay fixed.
    Within,
    /// Transfers may move parties across lower-quota boundaries.
    Crossing,
}

impl std::str::FromStr for Perturbation {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "within" => Ok(Perturbation::Within),
            "crossing" => Ok(Perturbation::Crossing),
            _ => Err(crate::error::Error::parse(s, "expected within or crossing")),
        }
    }
}

pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Subset {
    Subset::from_indices(sample(rng, n, size))
}

/// Numerators in `0..den` summing to `k·den`.
pub fn random_numerators<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, den: i64) -> Vec<i64> {
    let total = k as i64 * den;
    let base = total / n as i64;
    let extra = (total % n as i64) as usize;
    let mut a: Vec<i64> = (0..n).map(|i| base + (i < extra) as i64).collect();
    let everyone = Subset::full(n);
    transfer(rng, &mut a, everyone, everyone, 4 * n, |_, _| den - 1);
    a
}

/// Random transfers from `sources` to `targets`, each target capped by
/// `cap(index, value)`.
pub fn transfer<R, F>(
    rng: &mut R,
    a: &mut [i64],
    sources: Subset,
    targets: Subset,
    steps: usize,
    cap: F,
) where
    R: Rng + ?Sized,
    F: Fn(usize, i64) -> i64,
{
    let src: Vec<usize> = sources.iter().collect();
    let dst: Vec<usize> = targets.iter().collect();
    if src.is_empty() || dst.is_empty() {
        return;
    }
    for _ in 0..steps {
        let s = src[rng.random_range(0..src.len())];
        let t = dst[rng.random_range(0..dst.len())];
        if s == t {
            continue;
        }
        let room = (cap(t, a[t]) - a[t]).min(a[s]);
        if room <= 0 {
            continue;
        }
        let amount = rng.random_range(1..=room);
        a[s] -= amount;
        a[t] += amount;
    }
}

pub fn profile(numerators: &[i64], den: i64) -> ResidueProfile {
    ResidueProfile::from_numerators(numerators, den).expect("grid profile is valid")
}

/// A profile and a second one where residues in `T` weakly rise and all
/// others weakly fall.
pub fn selection_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> (ResidueProfile, ResidueProfile, Subset) {
    let den = DENOMINATOR;
    let a = random_numerators(rng, n, k, den);
    let t = random_subset(rng, n, k);
    let mut b = a.clone();
    let steps = rng.random_range(1..=n);
    transfer(rng, &mut b, Subset::full(n).difference(t), t, steps, |_, _| den - 1);
    (profile(&a, den), profile(&b, den), t)
}

/// Two `k`-sets and profiles where residues in `T1` weakly rise and those in
/// `T2` weakly fall; other parties move freely.
pub fn pairwise_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> (ResidueProfile, ResidueProfile, Subset, Subset) {
    let den = DENOMINATOR;
    let a = random_numerators(rng, n, k, den);
    let t1 = random_subset(rng, n, k);
    let t2 = random_subset(rng, n, k);
    let mut b = a.clone();
    let all = Subset::full(n);
    let steps = rng.random_range(1..=2 * n);
    transfer(rng, &mut b, all.difference(t1), all.difference(t2), steps, |_, _| den - 1);
    (profile(&a, den), profile(&b, den), t1, t2)
}

/// Two unrelated profiles with the same `k` plus a `k`-set.
pub fn free_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> (ResidueProfile, ResidueProfile, Subset) {
    let den = DENOMINATOR;
    let a = random_numerators(rng, n, k, den);
    let mut b = a.clone();
    let all = Subset::full(n);
    let steps = rng.random_range(1..=n);
    transfer(rng, &mut b, all, all, steps, |_, _| den - 1);
    let t = random_subset(rng, n, k);
    (profile(&a, den), profile(&b, den), t)
}

/// A profile that differs from `p` in two coordinates: `grow` rises and
/// `shrink` falls by the same amount.
pub fn two_coordinate_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> (ResidueProfile, ResidueProfile, Subset) {
    let den = DENOMINATOR;
    let a = random_numerators(rng, n, k, den);
    let mut b = a.clone();
    let picks = sample(rng, n, 2);
    let (g, s) = (picks.index(0), picks.index(1));
    let room = (den - 1 - b[g]).min(b[s]);
    if room > 0 {
        let delta = rng.random_range(1..=room);
        b[g] += delta;
        b[s] -= delta;
    }
    let t = random_subset(rng, n, k);
    (profile(&a, den), profile(&b, den), t)
}

/// Integer votes whose quotas are multiples of `1/DENOMINATOR` with residues
/// summing to `k` and `extra` additional seats spread as lower quotas.
pub fn random_votes<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, extra: u64) -> Vec<i64> {
    let den = DENOMINATOR;
    let residues = random_numerators(rng, n, k, den);
    let mut lower = vec![0i64; n];
    for _ in 0..extra {
        lower[rng.random_range(0..n)] += 1;
    }
    residues
        .iter()
        .zip(&lower)
        .map(|(a, l)| l * den + a)
        .collect()
}

/// A vote pair with the same total where every party in `T` weakly gains
/// and every other party weakly loses.
pub fn threshold_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    coalition_size: usize,
    scheme: Perturbation,
) -> Result<(VoteProfile, VoteProfile, Subset)> {
    let den = DENOMINATOR;
    let extra = rng.random_range(0..=2 * n as u64);
    let house = k as u64 + extra;
    let v = random_votes(rng, n, k, extra);
    let t = random_subset(rng, n, coalition_size);
    let mut w = v.clone();
    let steps = rng.random_range(1..=n);
    let others = Subset::full(n).difference(t);
    match scheme {
        Perturbation::Within => {
            let floor: Vec<i64> = v.iter().map(|x| x / den).collect();
            let mut w_src = w.clone();
            // Sources may not drop below their lower quota; targets may not reach the next one.
            for i in 0..n {
                w_src[i] -= floor[i] * den;
            }
            transfer(rng, &mut w_src, others, t, steps, |_, _| den - 1);
            for i in 0..n {
                w[i] = w_src[i] + floor[i] * den;
            }
        }
        Perturbation::Crossing => {
            let total: i64 = v.iter().sum();
            transfer(rng, &mut w, others, t, steps, |_, _| total);
        }
    }
    Ok((
        VoteProfile::from_integers(&v, house)?,
        VoteProfile::from_integers(&w, house)?,
        t,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quota::compute_quotas;
    use crate::rules::seeded_rng;
    use num_traits::ToPrimitive;

    #[test]
    fn numerators_are_valid() {
        let mut rng = seeded_rng(3);
        for n in 2..=8 {
            for k in 1..n {
                let a = random_numerators(&mut rng, n, k, DENOMINATOR);
                assert_eq!(a.iter().sum::<i64>(), k as i64 * DENOMINATOR);
                assert!(a.iter().all(|&x| (0..DENOMINATOR).contains(&x)));
            }
        }
    }

    #[test]
    fn selection_pairs_move_the_right_way() {
        let mut rng = seeded_rng(5);
        for _ in 0..100 {
            let (p, q, t) = selection_pair(&mut rng, 6, 3);
            for i in 0..6 {
                if t.contains(i) {
                    assert!(q.get(i) >= p.get(i));
                } else {
                    assert!(q.get(i) <= p.get(i));
                }
            }
        }
    }

    #[test]
    fn within_keeps_lower_quotas() {
        let mut rng = seeded_rng(9);
        for _ in 0..100 {
            let (v, w, t) = threshold_pair(&mut rng, 5, 2, 2, Perturbation::Within).unwrap();
            let (a, b) = (compute_quotas(&v), compute_quotas(&w));
            assert_eq!(a.lower_quotas, b.lower_quotas);
            for i in 0..5 {
                let (x, y) = (a.quotas[i].to_f64().unwrap(), b.quotas[i].to_f64().unwrap());
                assert!(if t.contains(i) { y >= x } else { y <= x });
            }
        }
    }
}
