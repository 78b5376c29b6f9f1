//! Rule outputs against slow, direct re-implementations.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use apportion_core::poisson::poisson_binomial;
use apportion_core::residue::ResidueProfile;
use apportion_core::rules::conditional_poisson::{conditional_poisson_distribution, inclusion_probabilities};
use apportion_core::rules::pipage::pipage_distribution;
use apportion_core::rules::sampford::sampford_distribution;
use apportion_core::rules::systematic::systematic_distribution;
use apportion_core::rules::{seeded_rng, KSubsetDistribution, Order, Rule};
use apportion_core::scalar::Scalar;
use apportion_core::scenarios::gen;
use apportion_core::subset::{all_subsets, k_subsets, Subset};

type Dist = BTreeMap<u64, BigRational>;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn exact_masses(d: &KSubsetDistribution, n: usize) -> Dist {
    all_subsets(n)
        .filter_map(|s| {
            let m = d.prob(s);
            (!m.is_zero()).then(|| (s.bits(), m.to_exact()))
        })
        .collect()
}

fn random_profile(seed: u64, max_n: usize) -> ResidueProfile {
    let mut rng = seeded_rng(seed);
    let n = rng.random_range(2..=max_n);
    let k = rng.random_range(1..n);
    let den = rng.random_range(max_n as i64..=60);
    gen::profile(&gen::random_numerators(&mut rng, n, k, den), den)
}

/// Systematic rounding: the selected set is constant between consecutive
/// points where `u + j` meets a cumulative sum, so evaluating at midpoints
/// weighted by their lengths gives the distribution.
fn systematic_oracle(p: &ResidueProfile, order: &[usize]) -> Dist {
    let mut cum = vec![BigRational::zero()];
    for &i in order {
        let next = cum.last().unwrap() + p.get(i);
        cum.push(next);
    }
    let mut cuts: Vec<BigRational> = cum.iter().map(|c| c - c.floor()).collect();
    cuts.push(BigRational::zero());
    cuts.push(BigRational::one());
    cuts.sort();
    cuts.dedup();
    let mut out = Dist::new();
    for w in cuts.windows(2) {
        let u = (&w[0] + &w[1]) / r(2, 1);
        let mut set = 0u64;
        for (pos, &i) in order.iter().enumerate() {
            let (lo, hi) = (&cum[pos], &cum[pos + 1]);
            let mut j = BigRational::zero();
            while &(&u + &j) < hi {
                if &(&u + &j) >= lo {
                    set |= 1 << i;
                }
                j += BigRational::one();
            }
        }
        *out.entry(set).or_insert_with(BigRational::zero) += &w[1] - &w[0];
    }
    out
}

/// Pipage rounding by direct recursion over the branching steps.
fn pipage_oracle(p: &ResidueProfile, order: &[usize]) -> Dist {
    fn go(state: Vec<BigRational>, order: &[usize], mass: BigRational, out: &mut Dist) {
        let one = BigRational::one();
        let frac: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| state[i] > BigRational::zero() && state[i] < one)
            .take(2)
            .collect();
        if frac.len() < 2 {
            let set = state
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == one)
                .fold(0u64, |acc, (i, _)| acc | 1 << i);
            *out.entry(set).or_insert_with(BigRational::zero) += mass;
            return;
        }
        let (i, j) = (frac[0], frac[1]);
        let (a, b) = (state[i].clone(), state[j].clone());
        let sum = &a + &b;
        let branches = if sum <= one {
            [
                (sum.clone(), BigRational::zero(), &a / &sum),
                (BigRational::zero(), sum.clone(), &b / &sum),
            ]
        } else {
            let den = r(2, 1) - &sum;
            [
                (one.clone(), &sum - &one, (&one - &b) / &den),
                (&sum - &one, one.clone(), (&one - &a) / &den),
            ]
        };
        for (x, y, w) in branches {
            if w.is_zero() {
                continue;
            }
            let mut next = state.clone();
            next[i] = x;
            next[j] = y;
            go(next, order, &mass * w, out);
        }
    }
    let mut out = Dist::new();
    go(p.residues().to_vec(), order, BigRational::one(), &mut out);
    out
}

/// Sampford's rejective procedure: sum the probabilities of all accepted
/// draw sequences and condition on acceptance.
fn sampford_oracle(p: &ResidueProfile) -> Dist {
    let n = p.n();
    let k = p.k();
    let one = BigRational::one();
    let total_p: BigRational = p.residues().iter().sum();
    let odds: Vec<BigRational> = p.residues().iter().map(|x| x / (&one - x)).collect();
    let total_odds: BigRational = odds.iter().sum();
    let mut out = Dist::new();
    let mut seq = Vec::new();
    fn extend(
        seq: &mut Vec<usize>,
        weight: BigRational,
        n: usize,
        k: usize,
        odds: &[BigRational],
        total_odds: &BigRational,
        out: &mut Dist,
    ) {
        if seq.len() == k {
            let set = seq.iter().fold(0u64, |acc, &i| acc | 1 << i);
            *out.entry(set).or_insert_with(BigRational::zero) += weight;
            return;
        }
        for i in 0..n {
            if seq.contains(&i) || odds[i].is_zero() {
                continue;
            }
            seq.push(i);
            extend(seq, &weight * &odds[i] / total_odds, n, k, odds, total_odds, out);
            seq.pop();
        }
    }
    for first in 0..n {
        if p.get(first).is_zero() {
            continue;
        }
        seq.push(first);
        extend(&mut seq, p.get(first) / &total_p, n, k, &odds, &total_odds, &mut out);
        seq.pop();
    }
    let accepted: BigRational = out.values().sum();
    out.values_mut().for_each(|v| *v /= &accepted);
    out
}

#[test]
fn systematic_matches_midpoint_oracle() {
    for seed in 0..60 {
        let p = random_profile(seed, 7);
        let mut order: Vec<usize> = (0..p.n()).collect();
        if seed % 2 == 1 {
            order.reverse();
        }
        let d = systematic_distribution(&p, &order).unwrap();
        assert_eq!(exact_masses(&d, p.n()), systematic_oracle(&p, &order), "{p}");
    }
}

#[test]
fn grimmett_on_apportia() {
    let new = ResidueProfile::parse_list("0.1,0.9,0.1,0.9,0.1,0.9").unwrap();
    let order: Vec<usize> = (0..6).collect();
    let oracle = systematic_oracle(&new, &order);
    assert_eq!(oracle[&Subset::from_labels([1, 3, 5]).bits()], r(1, 10));
    assert_eq!(oracle[&Subset::from_labels([2, 4, 6]).bits()], r(9, 10));
}

#[test]
fn pipage_matches_recursion() {
    for seed in 100..160 {
        let p = random_profile(seed, 7);
        let order: Vec<usize> = (0..p.n()).rev().collect();
        let d = pipage_distribution(&p, &order).unwrap();
        assert_eq!(exact_masses(&d, p.n()), pipage_oracle(&p, &order), "{p}");
    }
}

#[test]
fn pipage_random_order_is_the_average() {
    let p = random_profile(7, 5);
    let n = p.n();
    let mut orders = vec![(0..n).collect::<Vec<_>>()];
    loop {
        let mut next = orders.last().unwrap().clone();
        let Some(i) = (0..n - 1).rev().find(|&i| next[i] < next[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| next[j] > next[i]).unwrap();
        next.swap(i, j);
        next[i + 1..].reverse();
        orders.push(next);
    }
    let mut avg = Dist::new();
    for o in &orders {
        for (s, m) in pipage_oracle(&p, o) {
            *avg.entry(s).or_insert_with(BigRational::zero) += m / r(orders.len() as i64, 1);
        }
    }
    let d = Rule::Pipage(Order::Random).distribution(&p).unwrap();
    assert_eq!(exact_masses(&d, n), avg);
}

#[test]
fn sampford_matches_rejective_procedure() {
    for seed in 200..240 {
        let p = random_profile(seed, 6);
        let d = sampford_distribution(&p);
        assert_eq!(exact_masses(&d, p.n()), sampford_oracle(&p), "{p}");
    }
}

#[test]
fn conditional_poisson_by_enumeration() {
    let pi: Vec<Scalar> = [3, 1, 4, 1, 5, 9].iter().map(|&x| Scalar::from_int(x)).collect();
    let k = 3;
    let d = conditional_poisson_distribution(&pi, k).unwrap();
    let weight = |s: Subset| s.iter().fold(BigRational::one(), |acc, i| acc * pi[i].to_exact());
    let total: BigRational = k_subsets(6, k).map(weight).sum();
    for s in k_subsets(6, k) {
        assert_eq!(d.prob(s).to_exact(), weight(s) / &total);
    }
    let marginals = inclusion_probabilities(&pi, k);
    for (i, marginal) in marginals.iter().enumerate() {
        let m: BigRational = k_subsets(6, k).filter(|s| s.contains(i)).map(|s| weight(s) / &total).sum();
        assert_eq!(marginal.to_exact(), m);
    }
}

#[test]
fn poisson_binomial_by_enumeration() {
    for seed in 300..330 {
        let p = random_profile(seed, 8);
        let stats = poisson_binomial(&p, None).unwrap();
        let mut pmf = vec![BigRational::zero(); p.n() + 1];
        for s in all_subsets(p.n()) {
            let mass = (0..p.n()).fold(BigRational::one(), |acc, i| {
                acc * if s.contains(i) {
                    p.get(i).clone()
                } else {
                    BigRational::one() - p.get(i)
                }
            });
            pmf[s.len()] += mass;
        }
        assert_eq!(stats.pmf, pmf);
    }
}

#[test]
fn sampford_single_set_matches_distribution() {
    for seed in 400..420 {
        let p = random_profile(seed, 8);
        let d = sampford_distribution(&p);
        for s in k_subsets(p.n(), p.k()) {
            assert_eq!(Rule::Sampford.set_probability(&p, s).unwrap(), d.prob(s));
        }
    }
}
