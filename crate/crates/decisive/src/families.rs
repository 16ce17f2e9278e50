//! Built-in chain families used throughout the examples and tests.

use crate::chain::{LabelSet, MarkovChain, SparseDistribution, StateId, DEFAULT_EXPLORATION_CAP};
use crate::error::{Error, Result};
use crate::prob::Prob;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Random walk over the naturals: state 0 moves to 1 with probability 1,
/// state i ≥ 1 moves up with probability `p` and down with `1 − p`.
/// Every state is labelled `a`.
pub fn random_walk(p: Prob) -> MarkovChain {
    let up = p;
    let down = Prob::one() - up.clone();
    MarkovChain::lazy(
        move |s: StateId| {
            let row = if s.0 == 0 {
                SparseDistribution::dirac(StateId(1))
            } else {
                SparseDistribution::new(vec![
                    (StateId(s.0 + 1), up.clone()),
                    (StateId(s.0 - 1), down.clone()),
                ])
                .expect("walk row")
            };
            Some(row)
        },
        |_| LabelSet::singleton(0),
        vec!["a".into()],
        DEFAULT_EXPLORATION_CAP,
    )
}

/// Finite truncation of the random walk to {0, …, n} with a reflecting top:
/// state n moves down with probability 1.
pub fn truncated_walk(p: Prob, n: usize) -> Result<MarkovChain> {
    let up = p;
    let down = Prob::one() - up.clone();
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(SparseDistribution::dirac(StateId(1)));
    for i in 1..n {
        rows.push(SparseDistribution::new(vec![
            (StateId(i as u64 + 1), up.clone()),
            (StateId(i as u64 - 1), down.clone()),
        ])?);
    }
    rows.push(SparseDistribution::dirac(StateId(n as u64 - 1)));
    let names = (0..=n).map(|i| i.to_string()).collect();
    let labels = vec![LabelSet::singleton(0); n + 1];
    MarkovChain::finite(names, rows, vec!["a".into()], labels)
}

/// Three-state chain: s0 → s1 surely; s1 goes back to s0 with probability
/// 1 − q or on to s2 with q; s2 returns to s1 with 1 − q or loops with q.
/// It is the canonical finite quotient of the random walk under
/// 0 ↦ s0, 1 ↦ s1, n ≥ 2 ↦ s2. Every state is labelled `a`.
pub fn three_state_quotient(q: Prob) -> Result<MarkovChain> {
    let stay = q;
    let back = Prob::one() - stay.clone();
    let rows = vec![
        SparseDistribution::dirac(StateId(1)),
        SparseDistribution::new(vec![
            (StateId(0), back.clone()),
            (StateId(2), stay.clone()),
        ])?,
        SparseDistribution::new(vec![(StateId(1), back), (StateId(2), stay)])?,
    ];
    MarkovChain::finite(
        vec!["s0".into(), "s1".into(), "s2".into()],
        rows,
        vec!["a".into()],
        vec![LabelSet::singleton(0); 3],
    )
}

/// The quotient map of [`three_state_quotient`]: 0 ↦ s0, 1 ↦ s1, n ≥ 2 ↦ s2.
pub fn walk_quotient_map(n: StateId) -> StateId {
    StateId(n.0.min(2))
}

/// Countable chain alternating between a hub state `b` (encoded 0) and a ray
/// a_1, a_2, … (encoded 1, 2, …). From a_n the hub is reached with
/// probability 3^{-n}; otherwise the ray is climbed. From `b` the ray
/// restarts at a_1. The per-cycle return probability to `b` is bounded away
/// from 1, so `b` is almost surely visited only finitely often.
pub fn escaping_ray() -> MarkovChain {
    MarkovChain::lazy(
        |s: StateId| {
            if s.0 == 0 {
                return Some(SparseDistribution::dirac(StateId(1)));
            }
            let n = s.0 as u32;
            let hub = BigRational::new(BigInt::one(), BigInt::from(3u32).pow(n));
            let climb = BigRational::one() - hub.clone();
            Some(
                SparseDistribution::new(vec![
                    (StateId(0), Prob::from_rational(hub)),
                    (StateId(s.0 + 1), Prob::from_rational(climb)),
                ])
                .expect("ray row"),
            )
        },
        |s| {
            if s.0 == 0 {
                LabelSet::singleton(0)
            } else {
                LabelSet::EMPTY
            }
        },
        vec!["hub".into()],
        DEFAULT_EXPLORATION_CAP,
    )
}

/// Probability that the ray of [`escaping_ray`] is climbed forever from a_1,
/// i.e. the infinite product Π_{n≥1} (1 − 3^{-n}), truncated once the tail
/// is below `tol`.
pub fn escaping_ray_never_return(tol: f64) -> Prob {
    let mut product = BigRational::one();
    let mut n = 1u32;
    loop {
        let factor =
            BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(3u32).pow(n));
        product *= factor;
        // remaining tail changes the product by less than Σ_{k>n} 3^{-k}
        let tail = 0.5 * 3f64.powi(-(n as i32));
        if tail < tol {
            break;
        }
        n += 1;
    }
    Prob::from_rational(product)
}

/// Look up a family by name with a rational parameter, for the CLI and the
/// JSON model format.
pub fn by_name(name: &str, p: Option<Prob>) -> Result<MarkovChain> {
    match name {
        "random-walk" => {
            let p = p.ok_or_else(|| Error::InvalidModel("random-walk needs p".into()))?;
            Ok(random_walk(p))
        }
        "escaping-ray" => Ok(escaping_ray()),
        "three-state-quotient" => {
            let q = p.ok_or_else(|| {
                Error::InvalidModel("three-state-quotient needs a parameter".into())
            })?;
            three_state_quotient(q)
        }
        other => Err(Error::InvalidModel(format!("unknown family {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_kernel() {
        let ray = escaping_ray();
        let row = ray.successors(StateId(2)).unwrap();
        assert_eq!(row.get(StateId(0)), Prob::from_ratio(1, 9));
        assert_eq!(row.get(StateId(3)), Prob::from_ratio(8, 9));
    }

    #[test]
    fn never_return_value() {
        // Π (1 - 3^{-n}) ≈ 0.560126077...
        let p = escaping_ray_never_return(1e-13).to_f64();
        assert!((p - 0.5601260778).abs() < 1e-9);
    }

    #[test]
    fn truncation_reflects() {
        let t = truncated_walk(Prob::from_ratio(1, 3), 5).unwrap();
        assert_eq!(t.num_states(), Some(6));
        let top = t.successors(StateId(5)).unwrap();
        assert_eq!(top.entries(), &[(StateId(4), Prob::one())]);
    }
}
