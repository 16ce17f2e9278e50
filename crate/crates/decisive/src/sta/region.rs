//! Clock regions: canonical finite quotient of clock valuations by integer
//! parts (capped at the maximal guard constant) and the ordering of
//! fractional parts.
//!
//! All region computations go through exact rational representatives, so
//! delay-successor chains and resets are free of floating-point drift.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Tolerance when classifying float valuations against integer boundaries.
const INT_EPS: f64 = 1e-9;

/// Per-clock summary inside a region.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ClockPart {
    /// Strictly above the maximal constant.
    Above,
    /// Exactly the integer value (≤ max constant); fractional part zero.
    At(u32),
    /// Within (k, k+1) for k < max constant; fractional part positive.
    In(u32),
}

/// Canonical clock region: one [`ClockPart`] per clock plus the weak
/// ordering of the positive fractional parts (groups of equal fractions,
/// listed by increasing fraction).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Region {
    parts: Vec<ClockPart>,
    order: Vec<Vec<usize>>,
}

impl Region {
    /// Assemble a region from raw data (used by the exhaustive region
    /// enumerator); the caller guarantees canonical form.
    pub(crate) fn from_raw(parts: Vec<ClockPart>, order: Vec<Vec<usize>>) -> Region {
        Region { parts, order }
    }

    pub fn parts(&self) -> &[ClockPart] {
        &self.parts
    }

    pub fn fraction_order(&self) -> &[Vec<usize>] {
        &self.order
    }

    /// The region of the all-zero valuation.
    pub fn zero(clocks: usize) -> Region {
        Region {
            parts: vec![ClockPart::At(0); clocks],
            order: vec![],
        }
    }

    /// Time can only be spent in a region when no clock sits exactly at an
    /// integer at or below the max constant.
    pub fn is_punctual(&self) -> bool {
        self.parts.iter().any(|p| matches!(p, ClockPart::At(_)))
    }

    pub fn all_above(&self) -> bool {
        self.parts.iter().all(|p| matches!(p, ClockPart::Above))
    }

    /// Memoryless region: every clock is either exactly zero or above the
    /// max constant — the region carries no residual timing information.
    pub fn is_memoryless(&self) -> bool {
        self.parts
            .iter()
            .all(|p| matches!(p, ClockPart::At(0) | ClockPart::Above))
    }

    /// An exact interior point of the region.
    pub fn representative(&self, max_const: u32) -> Vec<BigRational> {
        let groups = self.order.len() as i64;
        let frac_of = |clock: usize| -> BigRational {
            for (g, members) in self.order.iter().enumerate() {
                if members.contains(&clock) {
                    return BigRational::new(BigInt::from(g as i64 + 1), BigInt::from(groups + 1));
                }
            }
            BigRational::zero()
        };
        self.parts
            .iter()
            .enumerate()
            .map(|(i, part)| match part {
                ClockPart::Above => BigRational::from_integer(BigInt::from(max_const + 1))
                    + BigRational::new(BigInt::one(), BigInt::from(2)),
                ClockPart::At(k) => BigRational::from_integer(BigInt::from(*k)),
                ClockPart::In(k) => BigRational::from_integer(BigInt::from(*k)) + frac_of(i),
            })
            .collect()
    }

    /// Readable form such as `x=0 ∧ 0<y<1` used in reports and DOT output.
    pub fn describe(&self, clock_names: &[String]) -> String {
        let mut conjuncts = Vec::new();
        for (i, part) in self.parts.iter().enumerate() {
            let x = &clock_names[i];
            match part {
                ClockPart::Above => conjuncts.push(format!("{x}>M")),
                ClockPart::At(k) => conjuncts.push(format!("{x}={k}")),
                ClockPart::In(k) => conjuncts.push(format!("{k}<{x}<{}", k + 1)),
            }
        }
        for w in self.order.windows(2) {
            let a = &clock_names[w[0][0]];
            let b = &clock_names[w[1][0]];
            conjuncts.push(format!("frac({a})<frac({b})"));
        }
        for group in &self.order {
            for w in group.windows(2) {
                conjuncts.push(format!(
                    "frac({})=frac({})",
                    clock_names[w[0]], clock_names[w[1]]
                ));
            }
        }
        conjuncts.join(" & ")
    }
}

/// Region of an exact rational valuation.
pub fn region_of_rational(valuation: &[BigRational], max_const: u32) -> Region {
    let max = BigRational::from_integer(BigInt::from(max_const));
    let mut parts = Vec::with_capacity(valuation.len());
    let mut fracs: Vec<(usize, BigRational)> = Vec::new();
    for (i, v) in valuation.iter().enumerate() {
        if *v > max {
            parts.push(ClockPart::Above);
            continue;
        }
        let floor = v.floor();
        let frac = v - &floor;
        let k = floor.to_integer().to_u32().expect("non-negative clock");
        if frac.is_zero() {
            parts.push(ClockPart::At(k));
        } else {
            parts.push(ClockPart::In(k));
            fracs.push((i, frac));
        }
    }
    fracs.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<BigRational> = None;
    for (i, f) in fracs {
        match &last {
            Some(prev) if *prev == f => order.last_mut().unwrap().push(i),
            _ => {
                order.push(vec![i]);
                last = Some(f);
            }
        }
    }
    Region { parts, order }
}

/// Region of a float valuation; values within 1e-9 of an integer are read
/// as that integer (resets and pinned delays produce exact integers up to
/// rounding).
pub fn region_of(valuation: &[f64], max_const: u32) -> Region {
    let rational: Vec<BigRational> = valuation.iter().map(|v| snap_to_rational(*v)).collect();
    region_of_rational(&rational, max_const)
}

fn snap_to_rational(v: f64) -> BigRational {
    let nearest = v.round();
    if (v - nearest).abs() < INT_EPS {
        BigRational::from_integer(BigInt::from_f64(nearest).expect("finite"))
    } else {
        BigRational::from_float(v).expect("finite clock value")
    }
}

/// The region after resetting the given clocks to zero.
pub fn reset_region(region: &Region, resets: &[usize], max_const: u32) -> Region {
    let mut rep = region.representative(max_const);
    for &i in resets {
        rep[i] = BigRational::zero();
    }
    region_of_rational(&rep, max_const)
}

/// The ordered chain of regions visited as time elapses from `region`,
/// ending with the all-above region. Each entry is tagged with whether the
/// delay set spent in it is a single point (punctual) or has positive
/// length.
pub fn delay_successors(region: &Region, max_const: u32) -> Vec<(Region, bool)> {
    let mut chain = Vec::new();
    let mut v = region.representative(max_const);
    let max = BigRational::from_integer(BigInt::from(max_const));
    loop {
        let r = region_of_rational(&v, max_const);
        let punctual = r.is_punctual();
        let done = r.all_above();
        chain.push((r, punctual));
        if done {
            break;
        }
        // distance until some clock at or below the max constant reaches
        // its next integer boundary
        let mut gap: Option<BigRational> = None;
        for x in &v {
            if *x > max {
                continue;
            }
            let next = x.floor() + BigRational::one();
            let d = next - x;
            gap = Some(match gap {
                Some(g) if g <= d => g,
                _ => d,
            });
        }
        let gap = gap.expect("some clock below the max constant");
        let advance = if punctual {
            // move strictly inside the next open region
            gap / BigRational::from_integer(BigInt::from(2))
        } else {
            gap
        };
        for x in &mut v {
            *x += advance.clone();
        }
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn boundary_classifications() {
        // x=0, y=0.3 with M=2
        let r = region_of(&[0.0, 0.3], 2);
        assert_eq!(r.parts(), &[ClockPart::At(0), ClockPart::In(0)]);
        assert!(r.is_punctual());
        // all clocks above the max constant
        let r = region_of(&[2.5, 7.0], 2);
        assert_eq!(r.parts(), &[ClockPart::Above, ClockPart::Above]);
        assert!(r.all_above());
        // exactly at the max constant is not above it
        let r = region_of(&[2.0], 2);
        assert_eq!(r.parts(), &[ClockPart::At(2)]);
    }

    #[test]
    fn fraction_ordering() {
        // 0 < x < y < 1
        let r = region_of(&[0.2, 0.7], 2);
        assert_eq!(r.fraction_order(), &[vec![0], vec![1]]);
        let r_rev = region_of(&[0.7, 0.2], 2);
        assert_eq!(r_rev.fraction_order(), &[vec![1], vec![0]]);
        assert_ne!(r, r_rev);
        // equal fractions share a group
        let r_eq = region_of(&[1.5, 0.5], 2);
        assert_eq!(r_eq.fraction_order(), &[vec![0, 1]]);
    }

    #[test]
    fn representative_round_trip() {
        for v in [
            vec![0.0, 0.3],
            vec![0.2, 0.7],
            vec![1.5, 0.5],
            vec![2.5, 0.1],
            vec![1.0, 1.0],
        ] {
            let r = region_of(&v, 2);
            let rep = r.representative(2);
            assert_eq!(region_of_rational(&rep, 2), r, "valuation {v:?}");
        }
    }

    #[test]
    fn snapping_near_integers() {
        let r1 = region_of(&[1.0 - 1e-12, 0.5], 2);
        let r2 = region_of(&[1.0, 0.5], 2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn resets() {
        let r = region_of(&[1.3, 0.8], 2);
        let reset = reset_region(&r, &[1], 2);
        assert_eq!(reset.parts(), &[ClockPart::In(1), ClockPart::At(0)]);
    }

    #[test]
    fn delay_chain_of_single_clock() {
        // from x=0 with M=1: x=0 → 0<x<1 → x=1 → above
        let chain = delay_successors(&Region::zero(1), 1);
        let shapes: Vec<(Vec<ClockPart>, bool)> = chain
            .iter()
            .map(|(r, p)| (r.parts().to_vec(), *p))
            .collect();
        assert_eq!(
            shapes,
            vec![
                (vec![ClockPart::At(0)], true),
                (vec![ClockPart::In(0)], false),
                (vec![ClockPart::At(1)], true),
                (vec![ClockPart::Above], false),
            ]
        );
    }

    #[test]
    fn delay_chain_two_clocks() {
        // x=0, 0<y<1 with M=2: the chain interleaves punctual and open
        // regions and ends all-above
        let start = region_of(&[0.0, 0.4], 2);
        let chain = delay_successors(&start, 2);
        assert!(chain.first().unwrap().1, "initial region is punctual");
        assert!(chain.last().unwrap().0.all_above());
        // consecutive regions alternate punctual/open
        for w in chain.windows(2) {
            assert_ne!(w[0].1, w[1].1, "{}", w[0].0.describe(&named(2)));
        }
        // the chain passes through 0<x<y<1
        let r1 = region_of(&[0.2, 0.6], 2);
        assert!(chain.iter().any(|(r, _)| *r == r1));
    }

    #[test]
    fn memoryless_detection() {
        assert!(Region::zero(2).is_memoryless());
        assert!(region_of(&[0.0, 5.0], 2).is_memoryless());
        assert!(!region_of(&[0.0, 0.5], 2).is_memoryless());
        assert!(region_of(&[9.0, 5.0], 2).is_memoryless());
    }
}
