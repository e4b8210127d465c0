use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::{Arrow, Error, Result};

/// A finite run of arrows at one site, bottom to top.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Stack(pub Vec<Arrow>);

impl Stack {
    pub fn from_mask(len: usize, rights: u32) -> Stack {
        Stack((0..len).map(|i| if rights >> i & 1 == 1 { Arrow::Right } else { Arrow::Left }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rights(&self) -> usize {
        self.0.iter().filter(|a| a.is_right()).count()
    }

    /// Left arrows among the first `1, 2, ..., n` arrows.
    pub fn prefix_lefts(&self) -> Vec<usize> {
        self.0
            .iter()
            .scan(0, |acc, a| {
                *acc += a.is_left() as usize;
                Some(*acc)
            })
            .collect()
    }

    /// `self ⪯ other`: every prefix of `self` holds at least as many left
    /// arrows as the same prefix of `other`.
    pub fn preceq(&self, other: &Stack) -> bool {
        self.len() == other.len() && self.prefix_lefts().iter().zip(other.prefix_lefts()).all(|(a, b)| *a >= b)
    }

    /// Probability of this stack when arrow `i` is right with probability `probs[i]`.
    pub fn probability(&self, probs: &[f64]) -> f64 {
        self.0.iter().zip(probs).map(|(a, &p)| if a.is_right() { p } else { 1.0 - p }).product()
    }
}

/// Largest block the stack machinery accepts: beyond three arrows the
/// stacks with a fixed number of right arrows are no longer totally ordered.
pub const MAX_STACK: usize = 3;

/// Law of the number of right arrows in a block whose arrows are
/// independent with right-probabilities `probs`, by enumeration of all
/// `2^n` outcomes.
pub fn poisson_binomial(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() > 16 {
        return Err(Error::Unsupported(format!("enumerating blocks of {} arrows", probs.len())));
    }
    if let Some(i) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidProbability { site: 0, level: i as u64 + 1, value: probs[i] });
    }
    let n = probs.len();
    let mut pmf = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let stack = Stack::from_mask(n, mask);
        pmf[mask.count_ones() as usize] += stack.probability(probs);
    }
    Ok(pmf)
}

/// All `n`-stacks with `y` right arrows, from the `⪯`-largest (right arrows
/// lowest) down to the smallest.
pub fn stack_chain(n: usize, y: usize) -> Result<Vec<Stack>> {
    if n == 0 || n > MAX_STACK {
        return Err(Error::Unsupported(format!("{n}-stacks are not totally ordered (need 1..={MAX_STACK})")));
    }
    if y > n {
        return Err(Error::Parameter(format!("{y} right arrows in a {n}-stack")));
    }
    let mut chain: Vec<Stack> =
        (0u32..(1 << n)).filter(|m| m.count_ones() as usize == y).map(|m| Stack::from_mask(n, m)).collect();
    chain.sort_by_key(|s| s.prefix_lefts().iter().sum::<usize>());
    debug_assert!(chain.windows(2).all(|w| w[1].preceq(&w[0])));
    Ok(chain)
}

/// Law over [`stack_chain`]`(n, y)` of the block's stack given that it holds
/// exactly `y` right arrows.
pub fn conditional_stack_pmf(probs: &[f64], y: usize) -> Result<Vec<f64>> {
    let chain = stack_chain(probs.len(), y)?;
    let weights: Vec<f64> = chain.iter().map(|s| s.probability(probs)).collect();
    let q: f64 = weights.iter().sum();
    if q <= 0.0 {
        return Err(Error::NullConditioning { y });
    }
    Ok(weights.into_iter().map(|w| w / q).collect())
}

/// Index `i` of the first cell with `u < p_0 + ... + p_i`; rounding
/// overshoot falls back to the last cell of positive mass.
pub(crate) fn inverse_cdf(pmf: impl IntoIterator<Item = (usize, f64)>, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = None;
    for (i, p) in pmf {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(i);
        if u < acc {
            return i;
        }
    }
    last.expect("pmf with positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // independent oracle: convolution of Bernoulli laws
    fn convolution(probs: &[f64]) -> Vec<f64> {
        let mut pmf = vec![1.0];
        for &p in probs {
            let mut next = vec![0.0; pmf.len() + 1];
            for (k, &q) in pmf.iter().enumerate() {
                next[k] += q * (1.0 - p);
                next[k + 1] += q * p;
            }
            pmf = next;
        }
        pmf
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn poisson_binomial_examples() {
        assert!(close(&poisson_binomial(&[1.0, 1.0, 1.0]).unwrap(), &[0.0, 0.0, 0.0, 1.0], 0.0));
        assert!(close(&poisson_binomial(&[0.5, 0.5]).unwrap(), &[0.25, 0.5, 0.25], 1e-15));
        assert!(close(&poisson_binomial(&[0.2, 0.5, 0.7]).unwrap(), &[0.12, 0.43, 0.38, 0.07], 1e-12));
        assert!(poisson_binomial(&[0.2, 1.1]).is_err());
    }

    #[test]
    fn chains() {
        let s = |t: &str| Stack(t.chars().map(|c| Arrow::from_char(c).unwrap()).collect());
        assert_eq!(stack_chain(3, 3).unwrap(), vec![s("RRR")]);
        assert_eq!(stack_chain(3, 1).unwrap(), vec![s("RLL"), s("LRL"), s("LLR")]);
        assert_eq!(stack_chain(2, 1).unwrap(), vec![s("RL"), s("LR")]);
        assert!(stack_chain(4, 2).is_err());
        assert!(stack_chain(2, 3).is_err());
        for n in 1..=3 {
            for y in 0..=n {
                let chain = stack_chain(n, y).unwrap();
                for i in 0..chain.len() {
                    for j in i..chain.len() {
                        assert!(chain[j].preceq(&chain[i]), "n={n} y={y}");
                    }
                }
            }
        }
    }

    #[test]
    fn four_stacks_are_not_a_chain() {
        let s = |t: &str| Stack(t.chars().map(|c| Arrow::from_char(c).unwrap()).collect());
        let (a, b) = (s("RLLR"), s("LRRL"));
        assert!(!a.preceq(&b) && !b.preceq(&a));
    }

    #[test]
    fn conditional_examples() {
        assert!(close(&conditional_stack_pmf(&[0.3, 0.3], 1).unwrap(), &[0.5, 0.5], 1e-15));
        let pmf = conditional_stack_pmf(&[0.2, 0.7], 1).unwrap();
        assert!(close(&pmf, &[0.06 / 0.62, 0.56 / 0.62], 1e-12));
        assert_eq!(conditional_stack_pmf(&[1.0, 0.5], 0), Err(Error::NullConditioning { y: 0 }));
    }

    #[test]
    fn inverse_cdf_skips_null_cells() {
        assert_eq!(inverse_cdf([(0, 0.0), (1, 0.5), (2, 0.5)], 0.0), 1);
        assert_eq!(inverse_cdf([(0, 0.0), (1, 0.5), (2, 0.5)], 0.7), 2);
        assert_eq!(inverse_cdf([(0, 0.3), (1, 0.7), (2, 0.0)], 0.999_999_999_999_999_9), 1);
    }

    proptest! {
        #[test]
        fn pmf_matches_convolution(probs in proptest::collection::vec(0.0f64..=1.0, 0..8)) {
            let pmf = poisson_binomial(&probs).unwrap();
            prop_assert!(close(&pmf, &convolution(&probs), 1e-12));
            prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mut rev = probs.clone();
            rev.reverse();
            prop_assert!(close(&pmf, &poisson_binomial(&rev).unwrap(), 1e-12));
        }

        #[test]
        fn conditional_matches_enumeration(probs in proptest::collection::vec(0.0f64..=1.0, 1..4), y in 0usize..4) {
            let n = probs.len();
            prop_assume!(y <= n);
            let q = poisson_binomial(&probs).unwrap()[y];
            match conditional_stack_pmf(&probs, y) {
                Err(Error::NullConditioning { .. }) => prop_assert_eq!(q, 0.0),
                Err(e) => prop_assert!(false, "{:?}", e),
                Ok(pmf) => {
                    prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    // enumeration oracle: condition the product law on the count
                    for (stack, p) in stack_chain(n, y).unwrap().iter().zip(&pmf) {
                        let mut joint = 0.0;
                        for mask in 0u32..(1 << n) {
                            let cand = Stack::from_mask(n, mask);
                            if &cand == stack {
                                joint += probs.iter().enumerate().map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p }).product::<f64>();
                            }
                        }
                        prop_assert!((joint / q - p).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
