//! Conditional Poisson rounding: the maximum-entropy distribution over
//! `k`-sets with the target marginals, `P[S=T] ∝ Π_{i∈T} π_i`.

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use super::KSubsetDistribution;
use crate::error::{Error, Result};
use crate::residue::ResidueProfile;
use crate::scalar::{HpFloat, Scalar, DEFAULT_PRECISION_BITS};
use crate::subset::{k_subsets, Subset};

/// Largest number of parties with positive weight for which the full
/// distribution is enumerated.
pub const ENUMERATION_LIMIT: usize = 24;

/// Settings of the Newton solve for working probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CpOptions {
    pub precision_bits: usize,
    pub residual_target: f64,
    pub max_iterations: usize,
}

impl Default for CpOptions {
    fn default() -> Self {
        CpOptions {
            precision_bits: DEFAULT_PRECISION_BITS,
            residual_target: 1e-12,
            max_iterations: 200,
        }
    }
}

impl CpOptions {
    /// 256-bit floats and a residual of `1e-40`.
    pub fn high_precision() -> Self {
        CpOptions {
            precision_bits: 256,
            residual_target: 1e-40,
            max_iterations: 200,
        }
    }

    pub fn with_precision(bits: usize) -> Self {
        CpOptions {
            precision_bits: bits,
            residual_target: if bits >= 256 { 1e-40 } else { 1e-12 },
            max_iterations: 200,
        }
    }
}

/// Working probabilities and the largest marginal error they achieve.
#[derive(Clone, Debug, Serialize)]
pub struct WorkingProbabilities {
    pub pi: Vec<Scalar>,
    pub residual: f64,
    pub iterations: usize,
}

/// `e_0..=e_k` of the values at positions not in `skip`.
pub fn elementary_symmetric(values: &[Scalar], k: usize, skip: Subset) -> Vec<Scalar> {
    let mut e = vec![Scalar::zero(); k + 1];
    e[0] = Scalar::one();
    let mut count = 0;
    for (i, v) in values.iter().enumerate() {
        if skip.contains(i) || v.is_zero() {
            continue;
        }
        count += 1;
        for r in (1..=k.min(count)).rev() {
            e[r] = e[r].clone() + e[r - 1].clone() * v;
        }
    }
    e
}

/// Inclusion probabilities `π_i e_{k−1}(π∖i) / e_k(π)`.
pub fn inclusion_probabilities(pi: &[Scalar], k: usize) -> Vec<Scalar> {
    if k == 0 {
        return vec![Scalar::zero(); pi.len()];
    }
    let total = elementary_symmetric(pi, k, Subset::EMPTY)[k].clone();
    (0..pi.len())
        .map(|i| {
            if pi[i].is_zero() {
                Scalar::zero()
            } else {
                let rest = elementary_symmetric(pi, k - 1, Subset::singleton(i));
                pi[i].clone() * &rest[k - 1] / &total
            }
        })
        .collect()
}

/// Joint inclusion probability of parties `i` and `j`.
fn pair_inclusion(pi: &[Scalar], k: usize, i: usize, j: usize, total: &Scalar) -> Scalar {
    if k < 2 {
        return Scalar::zero();
    }
    let rest = elementary_symmetric(pi, k - 2, Subset::from_indices([i, j]));
    pi[i].clone() * &pi[j] * &rest[k - 2] / total
}

fn max_residual(marginals: &[Scalar], targets: &[Scalar]) -> f64 {
    marginals
        .iter()
        .zip(targets)
        .map(|(m, t)| (m.clone() - t).abs().to_f64())
        .fold(0.0, f64::max)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Option<Vec<Scalar>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col].clone() / &a[col][col];
            if factor.is_zero() {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, pivot_x) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x = x.clone() - factor.clone() * pivot_x;
            }
            let delta = factor * &b[col];
            b[row] = b[row].clone() - delta;
        }
    }
    let mut x = vec![Scalar::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for c in row + 1..n {
            acc = acc - a[row][c].clone() * &x[c];
        }
        x[row] = acc / &a[row][row];
    }
    Some(x)
}

/// Newton iteration in log-coordinates for the working probabilities.
///
/// Starts from the odds `p_i/(1−p_i)`; each step solves the Jacobian system
/// with the last coordinate pinned (the marginals are invariant under a
/// common rescaling) and halves the step until the residual decreases.
pub fn conditional_poisson_solve(
    p: &ResidueProfile,
    options: &CpOptions,
) -> Result<WorkingProbabilities> {
    let bits = options.precision_bits;
    if bits == 0 {
        return Err(Error::invalid("precision must be positive"));
    }
    let n = p.n();
    let k = p.k();
    let positive: Vec<usize> = p.positive().iter().collect();
    let mut full = vec![Scalar::zero(); n];
    if k == 0 {
        return Ok(WorkingProbabilities {
            pi: full,
            residual: 0.0,
            iterations: 0,
        });
    }
    let m = positive.len();
    let targets: Vec<Scalar> = positive
        .iter()
        .map(|&i| Scalar::Float(HpFloat::from_rational(p.get(i), bits)))
        .collect();
    let one = BigRational::from_integer(1.into());
    let mut pi: Vec<Scalar> = positive
        .iter()
        .map(|&i| Scalar::Float(HpFloat::from_rational(&(p.get(i) / (&one - p.get(i))), bits)))
        .collect();

    let mut marginals = inclusion_probabilities(&pi, k);
    let mut residual = max_residual(&marginals, &targets);
    let mut iterations = 0;
    while residual > options.residual_target {
        if iterations >= options.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        iterations += 1;

        let total = elementary_symmetric(&pi, k, Subset::EMPTY)[k].clone();
        let size = m - 1;
        let mut jac = vec![vec![Scalar::zero(); size]; size];
        for i in 0..size {
            jac[i][i] = marginals[i].clone() * (Scalar::one() - &marginals[i]);
            for j in i + 1..size {
                let joint = pair_inclusion(&pi, k, i, j, &total);
                let v = joint - marginals[i].clone() * &marginals[j];
                jac[i][j] = v.clone();
                jac[j][i] = v;
            }
        }
        let rhs: Vec<Scalar> = (0..size)
            .map(|i| targets[i].clone() - &marginals[i])
            .collect();
        let Some(step) = solve_linear(jac, rhs) else {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        };

        let mut scale = Scalar::one();
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<Scalar> = (0..m)
                .map(|i| {
                    if i < size {
                        pi[i].clone() * (Scalar::one() + scale.clone() * &step[i])
                    } else {
                        pi[i].clone()
                    }
                })
                .collect();
            if candidate.iter().all(Scalar::is_positive) {
                let cand_marginals = inclusion_probabilities(&candidate, k);
                let cand_residual = max_residual(&cand_marginals, &targets);
                if cand_residual < residual {
                    pi = candidate;
                    marginals = cand_marginals;
                    residual = cand_residual;
                    accepted = true;
                    break;
                }
            }
            scale = scale * Scalar::ratio(1, 2);
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
    }

    for (local, &i) in positive.iter().enumerate() {
        full[i] = pi[local].clone();
    }
    Ok(WorkingProbabilities {
        pi: full,
        residual,
        iterations,
    })
}

/// `P[S=T] = Π_{i∈T} π_i / Σ_{T'} Π_{i∈T'} π_i`, exact when every `π_i` is.
pub fn conditional_poisson_distribution(pi: &[Scalar], k: usize) -> Result<KSubsetDistribution> {
    let n = pi.len();
    if pi.iter().any(Scalar::is_negative) {
        return Err(Error::invalid("working probabilities must be nonnegative"));
    }
    let positive: Vec<usize> = (0..n).filter(|&i| pi[i].is_positive()).collect();
    if k > positive.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} parties when only {} have positive weight",
            positive.len()
        )));
    }
    if positive.len() > ENUMERATION_LIMIT {
        return Err(Error::TooManyParties {
            n: positive.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let products: Vec<(Subset, Scalar)> = k_subsets(positive.len(), k)
        .map(|local| {
            let set = Subset::from_indices(local.iter().map(|j| positive[j]));
            let product = set
                .iter()
                .fold(Scalar::one(), |acc, i| acc * &pi[i]);
            (set, product)
        })
        .collect();
    let total: Scalar = products.iter().map(|(_, w)| w).sum();
    let mut dist = KSubsetDistribution::empty(n, k);
    for (set, w) in products {
        dist.add(set, w / &total);
    }
    Ok(dist)
}

/// `P[S=T]` for one set without enumerating the others.
pub fn conditional_poisson_set_probability(pi: &[Scalar], set: Subset) -> Scalar {
    let k = set.len();
    let total = elementary_symmetric(pi, k, Subset::EMPTY)[k].clone();
    let product = set.iter().fold(Scalar::one(), |acc, i| acc * &pi[i]);
    product / total
}

/// Sequential draw: party `i` is included with probability
/// `π_i e_{r−1}(π_{i+1..}) / e_r(π_{i..})` where `r` seats remain.
pub fn conditional_poisson_sample<R: Rng + ?Sized>(
    pi: &[Scalar],
    k: usize,
    rng: &mut R,
) -> Result<Subset> {
    let n = pi.len();
    // suffix[i][r] = e_r(π_i, .., π_{n-1})
    let mut suffix = vec![vec![Scalar::zero(); k + 1]; n + 1];
    suffix[n][0] = Scalar::one();
    for i in (0..n).rev() {
        suffix[i][0] = Scalar::one();
        for r in 1..=k {
            suffix[i][r] = suffix[i + 1][r].clone() + pi[i].clone() * &suffix[i + 1][r - 1];
        }
    }
    if suffix[0][k].is_zero() {
        return Err(Error::invalid("no set of the required size has positive weight"));
    }
    let mut chosen = Subset::EMPTY;
    let mut remaining = k;
    for i in 0..n {
        if remaining == 0 {
            break;
        }
        let prob = pi[i].clone() * &suffix[i + 1][remaining - 1] / &suffix[i][remaining];
        if remaining == n - i || rng.random::<f64>() < prob.to_f64() {
            chosen = chosen.insert(i);
            remaining -= 1;
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| Scalar::from_int(x)).collect()
    }

    #[test]
    fn product_masses() {
        let d = conditional_poisson_distribution(&ints(&[1, 2, 3]), 2).unwrap();
        assert_eq!(d.prob(Subset::from_labels([1, 2])), Scalar::ratio(2, 11));
        assert_eq!(d.prob(Subset::from_labels([1, 3])), Scalar::ratio(3, 11));
        assert_eq!(d.prob(Subset::from_labels([2, 3])), Scalar::ratio(6, 11));
        let d = conditional_poisson_distribution(&ints(&[1, 1]), 1).unwrap();
        assert_eq!(d.prob(Subset::from_labels([1])), Scalar::ratio(1, 2));
    }

    #[test]
    fn symmetric_profile_has_equal_weights() {
        let p = ResidueProfile::parse_list("0.5,0.5").unwrap();
        let w = conditional_poisson_solve(&p, &CpOptions::default()).unwrap();
        assert_eq!(w.pi[0], w.pi[1]);
        assert_eq!(w.iterations, 0);
    }

    #[test]
    fn newton_reaches_the_residual_target() {
        let p = ResidueProfile::parse_list("0.1,0.7,0.1,0.6,0.7,0.8").unwrap();
        let w = conditional_poisson_solve(&p, &CpOptions::default()).unwrap();
        assert!(w.residual <= 1e-12);
        let d = conditional_poisson_distribution(&w.pi, 3).unwrap();
        assert!(d.marginal_error(p.residues()).to_f64() <= 1e-12);
        let via_polys = inclusion_probabilities(&w.pi, 3);
        for (a, b) in via_polys.iter().zip(d.marginals()) {
            assert!((a.clone() - b).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn high_precision_solve() {
        let p = ResidueProfile::parse_list("0.1,0.7,0.1,0.6,0.7,0.8").unwrap();
        let w = conditional_poisson_solve(&p, &CpOptions::high_precision()).unwrap();
        assert!(w.residual <= 1e-40);
        assert_eq!(w.pi[0].precision_bits(), Some(256));
    }

    #[test]
    fn zero_residues_are_dropped() {
        let p = ResidueProfile::parse_list("0,0.5,0.5,0").unwrap();
        let w = conditional_poisson_solve(&p, &CpOptions::default()).unwrap();
        assert!(w.pi[0].is_zero() && w.pi[3].is_zero());
        let d = conditional_poisson_distribution(&w.pi, 1).unwrap();
        assert_eq!(d.support_len(), 2);
    }

    #[test]
    fn exact_set_probability_matches_enumeration() {
        let pi = ints(&[5, 2, 7, 1, 3]);
        let d = conditional_poisson_distribution(&pi, 3).unwrap();
        for s in d.support() {
            assert_eq!(conditional_poisson_set_probability(&pi, s), d.prob(s));
        }
        let m = inclusion_probabilities(&pi, 3);
        assert_eq!(m, d.marginals());
    }

    #[test]
    fn sequential_sampler_selects_k() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pi = ints(&[5, 2, 7, 1, 3]);
        for _ in 0..100 {
            assert_eq!(conditional_poisson_sample(&pi, 3, &mut rng).unwrap().len(), 3);
        }
    }
}
