//! Arc decompositions of the torus, in exact rational arithmetic.
//!
//! For each level j the torus splits into
//!
//! * the major family: arcs ‖α − a/q‖ ≤ q⁻¹P_j·P_{j+1}⁻⁴ for 2 ≤ q ≤ P_j and
//!   a coprime to q,
//! * a central piece around 0 — the (1, 0)-arc for j ≥ 2, and for j = 1 the
//!   annulus P₂⁻³/8 < ‖α‖ ≤ P₁P₂⁻⁴ (the core near 0 is deferred to the next
//!   level),
//! * the minor piece: everything else.
//!
//! There are also the split sets A(j, 0) = {‖α‖ ≤ ⅛P_j⁻³} and its
//! complement A(j, 1). All endpoints are exact rationals (the parameter
//! doubles are dyadic rationals), so membership, disjointness and measure
//! are decided exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};
use num::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Parameters, TorusPoint};
use crate::rational::{ratio_from_f64, ratio_string};

/// Torus interval with exact rational endpoints, a subset of [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        (x > &self.lo || (!self.lo_open && x == &self.lo))
            && (x < &self.hi || (!self.hi_open && x == &self.hi))
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }
}

/// One arc ‖α − a/q‖ ≤ radius with gcd(a, q) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub q: u64,
    pub a: u64,
    pub radius: BigRational,
}

fn mod_one(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// ‖x‖: exact distance to the nearest integer.
pub fn torus_norm_ratio(x: &BigRational) -> BigRational {
    let f = mod_one(x);
    let complement = BigRational::one() - &f;
    if f <= complement {
        f
    } else {
        complement
    }
}

impl Arc {
    pub fn center(&self) -> BigRational {
        BigRational::new(BigInt::from(self.a), BigInt::from(self.q))
    }

    pub fn contains(&self, alpha: &BigRational) -> bool {
        torus_norm_ratio(&(alpha - self.center())) <= self.radius
    }

    /// The arc as one or two intervals inside [0, 1).
    pub fn intervals(&self) -> Vec<Interval> {
        let two = BigRational::from_integer(BigInt::from(2));
        if &self.radius * &two >= BigRational::one() {
            return vec![Interval {
                lo: BigRational::zero(),
                hi: BigRational::one(),
                lo_open: false,
                hi_open: true,
            }];
        }
        let c = mod_one(&self.center());
        let lo = &c - &self.radius;
        let hi = &c + &self.radius;
        if lo < BigRational::zero() {
            // wraps below 0: [0, hi] ∪ [lo+1, 1)
            vec![
                Interval { lo: BigRational::zero(), hi, lo_open: false, hi_open: false },
                Interval { lo: lo + BigRational::one(), hi: BigRational::one(), lo_open: false, hi_open: true },
            ]
        } else if hi >= BigRational::one() {
            // wraps above 1: [lo, 1) ∪ [0, hi−1]
            vec![
                Interval { lo, hi: BigRational::one(), lo_open: false, hi_open: true },
                Interval { lo: BigRational::zero(), hi: hi - BigRational::one(), lo_open: false, hi_open: false },
            ]
        } else {
            vec![Interval { lo, hi, lo_open: false, hi_open: false }]
        }
    }
}

/// A measurable subset of the torus: a disjoint sorted union of intervals,
/// or the complement of one.
#[derive(Debug, Clone)]
pub struct ArcSet {
    pub label: String,
    intervals: Vec<Interval>,
    complement: bool,
}

impl ArcSet {
    pub fn full_torus() -> Self {
        ArcSet {
            label: "full-torus".into(),
            intervals: Vec::new(),
            complement: true,
        }
    }

    /// Build from intervals; sorts and verifies pairwise disjointness
    /// exactly (sharing a single closed endpoint counts as overlap).
    pub fn from_intervals(label: &str, mut intervals: Vec<Interval>) -> Result<Self> {
        intervals.retain(|iv| !iv.is_empty());
        intervals.sort_by(|x, y| x.lo.cmp(&y.lo).then(x.hi.cmp(&y.hi)));
        for w in intervals.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let disjoint = a.hi < b.lo || (a.hi == b.lo && (a.hi_open || b.lo_open));
            if !disjoint {
                return Err(Error::InvalidInput(format!(
                    "overlapping intervals in {label}: [{}, {}] and [{}, {}]",
                    ratio_string(&a.lo),
                    ratio_string(&a.hi),
                    ratio_string(&b.lo),
                    ratio_string(&b.hi),
                )));
            }
        }
        Ok(ArcSet {
            label: label.into(),
            intervals,
            complement: false,
        })
    }

    pub fn from_arcs(label: &str, arcs: &[Arc]) -> Result<Self> {
        let mut intervals = Vec::new();
        for arc in arcs {
            intervals.extend(arc.intervals());
        }
        Self::from_intervals(label, intervals)
    }

    /// The complement in [0, 1) of an interval-listed set.
    pub fn complement_of(label: &str, set: &ArcSet) -> Result<Self> {
        if set.complement {
            return Err(Error::InvalidInput(
                "complement of a complement set is not supported".into(),
            ));
        }
        Ok(ArcSet {
            label: label.into(),
            intervals: set.intervals.clone(),
            complement: true,
        })
    }

    pub fn is_complement(&self) -> bool {
        self.complement
    }

    pub fn contains(&self, alpha: &BigRational) -> bool {
        let a = mod_one(alpha);
        let inside = self.intervals.iter().any(|iv| iv.contains(&a));
        inside != self.complement
    }

    pub fn contains_point(&self, t: TorusPoint) -> bool {
        self.contains(&ratio_from_f64(t.value()).expect("torus point is finite"))
    }

    pub fn measure(&self) -> BigRational {
        let base: BigRational = self
            .intervals
            .iter()
            .fold(BigRational::zero(), |acc, iv| acc + iv.length());
        if self.complement {
            BigRational::one() - base
        } else {
            base
        }
    }

    /// The set as explicit disjoint intervals (resolving the complement
    /// flag); zero-length pieces are dropped.
    pub fn materialized_intervals(&self) -> Vec<Interval> {
        if !self.complement {
            return self
                .intervals
                .iter()
                .filter(|iv| iv.length() > BigRational::zero())
                .cloned()
                .collect();
        }
        let mut out = Vec::new();
        let mut cursor = BigRational::zero();
        let mut cursor_open = false; // complement currently includes the cursor point
        for iv in &self.intervals {
            let gap = Interval {
                lo: cursor.clone(),
                hi: iv.lo.clone(),
                lo_open: cursor_open,
                hi_open: !iv.lo_open,
            };
            if !gap.is_empty() && gap.length() > BigRational::zero() {
                out.push(gap);
            }
            cursor = iv.hi.clone();
            cursor_open = !iv.hi_open;
        }
        let tail = Interval {
            lo: cursor,
            hi: BigRational::one(),
            lo_open: cursor_open,
            hi_open: true,
        };
        if !tail.is_empty() && tail.length() > BigRational::zero() {
            out.push(tail);
        }
        out
    }

    pub fn piece_count(&self) -> usize {
        self.intervals.len()
    }
}

/// Exact radius q⁻¹ P_j P_{j+1}⁻⁴ of the level-j arc at denominator q.
pub fn major_radius(j: usize, p: &Parameters, q: u64) -> Result<BigRational> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidInput(format!("arc level must be 1..3, got {j}")));
    }
    if q == 0 {
        return Err(Error::InvalidInput("q must be positive".into()));
    }
    let pj = ratio_from_f64(p.p[j - 1])?;
    let pj1 = ratio_from_f64(p.p[j])?;
    let pj1_4 = &pj1 * &pj1 * &pj1 * &pj1;
    Ok(pj / (pj1_4 * BigRational::from_integer(BigInt::from(q))))
}

/// Lazy enumeration of the level-j major family: q = 2..⌊P_j⌋, a coprime.
pub fn major_arcs<'a>(
    j: usize,
    p: &'a Parameters,
) -> Result<impl Iterator<Item = Arc> + 'a> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidInput(format!("arc level must be 1..3, got {j}")));
    }
    if p.p[j - 1] < 2.0 {
        return Err(Error::Precondition(format!(
            "arc construction needs P_j >= 2, got {}",
            p.p[j - 1]
        )));
    }
    let q_max = p.p[j - 1].floor() as u64;
    Ok((2..=q_max).flat_map(move |q| {
        (1..q)
            .filter(move |a| gcd(*a, q) == 1)
            .map(move |a| Arc {
                q,
                a,
                radius: major_radius(j, p, q).expect("validated above"),
            })
    }))
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Euler's totient for 0..=n by sieve.
pub fn euler_phi_upto(n: u64) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n).collect();
    for i in 2..=n as usize {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= n as usize {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    phi
}

/// Σ_q φ(q) · 2 · radius(q): the major-family measure without materializing
/// any arcs (valid because the family is disjoint).
pub fn major_measure_phi(j: usize, p: &Parameters) -> Result<BigRational> {
    if p.p[j - 1] < 2.0 {
        return Err(Error::Precondition(format!(
            "arc construction needs P_j >= 2, got {}",
            p.p[j - 1]
        )));
    }
    let q_max = p.p[j - 1].floor() as u64;
    let phi = euler_phi_upto(q_max);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut total = BigRational::zero();
    for q in 2..=q_max {
        let r = major_radius(j, p, q)?;
        total += BigRational::from_integer(BigInt::from(phi[q as usize])) * &two * r;
    }
    Ok(total)
}

/// The central piece of level j: the (1, 0)-arc for j ≥ 2; for j = 1 the
/// annulus P₂⁻³/8 < ‖α‖ ≤ P₁P₂⁻⁴.
pub fn central_set(j: usize, p: &Parameters) -> Result<ArcSet> {
    let outer = major_radius(j, p, 1)?;
    let label = format!("central({j})");
    if j >= 2 {
        let arc = Arc { q: 1, a: 0, radius: outer };
        return ArcSet::from_intervals(&label, arc.intervals());
    }
    // j = 1: annulus (inner, outer], inner = P₂⁻³/8
    let p2 = ratio_from_f64(p.p[1])?;
    let inner = BigRational::one() / (&p2 * &p2 * &p2 * BigRational::from_integer(BigInt::from(8)));
    if inner >= outer {
        return Err(Error::Precondition(format!(
            "annulus is empty: inner {} >= outer {}",
            ratio_string(&inner),
            ratio_string(&outer)
        )));
    }
    let one = BigRational::one();
    ArcSet::from_intervals(
        &label,
        vec![
            Interval { lo: inner.clone(), hi: outer.clone(), lo_open: true, hi_open: false },
            Interval { lo: &one - &outer, hi: &one - &inner, lo_open: false, hi_open: true },
        ],
    )
}

/// A(j, 0) = {‖α‖ ≤ ⅛ P_j⁻³} and A(j, 1) its complement.
pub fn a_set(j: usize, p: &Parameters, piece: u8) -> Result<ArcSet> {
    if !(1..=4).contains(&j) {
        return Err(Error::InvalidInput(format!("A-set level must be 1..4, got {j}")));
    }
    let pj = ratio_from_f64(p.p[j - 1])?;
    let radius =
        BigRational::one() / (&pj * &pj * &pj * BigRational::from_integer(BigInt::from(8)));
    let core = Arc { q: 1, a: 0, radius };
    let zero = ArcSet::from_intervals(&format!("A({j},0)"), core.intervals())?;
    match piece {
        0 => Ok(zero),
        1 => ArcSet::complement_of(&format!("A({j},1)"), &zero),
        _ => Err(Error::InvalidInput(format!("A-set piece must be 0 or 1, got {piece}"))),
    }
}

/// The full level-j partition.
#[derive(Debug, Clone)]
pub struct ArcPartition {
    pub central: ArcSet,
    pub major: ArcSet,
    pub minor: ArcSet,
}

/// Build the level-j partition (central, major, minor) with exact
/// disjointness verification of central ∪ major.
pub fn build_arcs(j: usize, p: &Parameters) -> Result<ArcPartition> {
    let central = central_set(j, p)?;
    let arcs: Vec<Arc> = major_arcs(j, p)?.collect();
    let major = ArcSet::from_arcs(&format!("major({j})"), &arcs)?;
    // minor = complement of the disjoint union central ∪ major
    let mut all = central.intervals.clone();
    all.extend(major.intervals.iter().cloned());
    let union = ArcSet::from_intervals("union", all)?; // re-verifies disjointness
    let minor = ArcSet {
        label: format!("minor({j})"),
        intervals: union.intervals,
        complement: true,
    };
    Ok(ArcPartition { central, major, minor })
}

/// Which piece of the level-j partition contains a torus point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "piece")]
pub enum ArcClass {
    Central,
    Major { q: u64, a: u64 },
    Minor,
}

/// Classify a torus point exactly (the double is taken as the dyadic
/// rational it denotes).
pub fn classify_alpha(t: TorusPoint, j: usize, p: &Parameters) -> Result<ArcClass> {
    let alpha = ratio_from_f64(t.value())?;
    classify_ratio(&alpha, j, p)
}

pub fn classify_ratio(alpha: &BigRational, j: usize, p: &Parameters) -> Result<ArcClass> {
    let central = central_set(j, p)?;
    if central.contains(alpha) {
        return Ok(ArcClass::Central);
    }
    if p.p[j - 1] < 2.0 {
        return Err(Error::Precondition(format!(
            "arc classification needs P_j >= 2, got {}",
            p.p[j - 1]
        )));
    }
    let a_norm = mod_one(alpha);
    let q_max = p.p[j - 1].floor() as u64;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for q in 2..=q_max {
        // nearest numerator to alpha*q
        let scaled = &a_norm * BigRational::from_integer(BigInt::from(q));
        let nearest = (scaled + &half).floor().to_integer();
        let a_u = nearest
            .mod_floor(&BigInt::from(q))
            .to_u64()
            .expect("residue fits u64");
        if gcd(a_u, q) != 1 {
            continue;
        }
        let arc = Arc { q, a: a_u, radius: major_radius(j, p, q)? };
        if arc.contains(alpha) {
            return Ok(ArcClass::Major { q, a: a_u });
        }
    }
    Ok(ArcClass::Minor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::FromPrimitive;

    fn tiny() -> Parameters {
        Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0).unwrap()
    }

    #[test]
    fn partition_measure_is_one() {
        let p = tiny();
        for j in 1..=3 {
            let part = build_arcs(j, &p).unwrap();
            let total = part.central.measure() + part.major.measure() + part.minor.measure();
            assert_eq!(total, BigRational::one(), "level {j}");
            // the complement's materialized intervals carry the same measure
            let mat: BigRational = part
                .minor
                .materialized_intervals()
                .iter()
                .map(|iv| iv.length())
                .fold(BigRational::zero(), |a, b| a + b);
            assert_eq!(mat, part.minor.measure());
        }
    }

    #[test]
    fn phi_route_matches_interval_route() {
        let p = tiny();
        for j in 1..=3 {
            let arcs: Vec<Arc> = major_arcs(j, &p).unwrap().collect();
            let set = ArcSet::from_arcs("m", &arcs).unwrap();
            assert_eq!(set.measure(), major_measure_phi(j, &p).unwrap(), "level {j}");
        }
    }

    #[test]
    fn disjointness_exact_to_64() {
        // P1 = 64 exercises q up to 64 at level 1
        let p = Parameters::new(64.0, 29.34, 15.6, 9.3, 4.0).unwrap();
        for j in 1..=3 {
            assert!(build_arcs(j, &p).is_ok(), "level {j}");
        }
    }

    #[test]
    fn arc_counts_are_phi_sums() {
        let p = tiny();
        let phi = euler_phi_upto(16);
        let want: u64 = (2..=16).map(|q| phi[q as usize]).sum();
        assert_eq!(major_arcs(1, &p).unwrap().count() as u64, want);
    }

    #[test]
    fn classify_examples() {
        let p = tiny();
        // alpha = 0 is central for j >= 2
        let t = TorusPoint::new(0.0).unwrap();
        assert_eq!(classify_alpha(t, 2, &p).unwrap(), ArcClass::Central);
        // alpha = 1/2 sits at the center of the (2, 1) arc
        let t = TorusPoint::new(0.5).unwrap();
        assert_eq!(
            classify_alpha(t, 2, &p).unwrap(),
            ArcClass::Major { q: 2, a: 1 }
        );
        // for j = 1 the point 0 lies in the deferred core, not the annulus
        let t = TorusPoint::new(0.0).unwrap();
        assert_eq!(classify_alpha(t, 1, &p).unwrap(), ArcClass::Minor);
    }

    #[test]
    fn classification_matches_membership() {
        let p = tiny();
        for j in 1..=3 {
            let part = build_arcs(j, &p).unwrap();
            for k in 0..257u32 {
                let alpha = BigRational::new(BigInt::from(k), BigInt::from(257));
                let class = classify_ratio(&alpha, j, &p).unwrap();
                let (in_c, in_m, in_n) = (
                    part.central.contains(&alpha),
                    part.major.contains(&alpha),
                    part.minor.contains(&alpha),
                );
                // exactly one piece
                assert_eq!(
                    [in_c, in_m, in_n].iter().filter(|b| **b).count(),
                    1,
                    "alpha = {k}/257, level {j}"
                );
                match class {
                    ArcClass::Central => assert!(in_c),
                    ArcClass::Major { .. } => assert!(in_m),
                    ArcClass::Minor => assert!(in_n),
                }
            }
        }
    }

    #[test]
    fn annulus_boundaries() {
        let p = tiny();
        let c = central_set(1, &p).unwrap();
        let p2 = BigRational::from_f64(p.p[1]).unwrap();
        let inner = BigRational::one()
            / (&p2 * &p2 * &p2 * BigRational::from_integer(BigInt::from(8)));
        let outer = major_radius(1, &p, 1).unwrap();
        assert!(!c.contains(&inner), "inner boundary is excluded");
        assert!(c.contains(&outer), "outer boundary is included");
        let mid = (&inner + &outer) / BigRational::from_integer(BigInt::from(2));
        assert!(c.contains(&mid));
        // wrapped side
        let one = BigRational::one();
        assert!(c.contains(&(&one - &mid)));
        assert!(!c.contains(&(&one - &inner)));
        assert!(c.contains(&(&one - &outer)));
    }

    #[test]
    fn a_sets_partition() {
        let p = tiny();
        for j in 1..=4 {
            let a0 = a_set(j, &p, 0).unwrap();
            let a1 = a_set(j, &p, 1).unwrap();
            assert_eq!(a0.measure() + a1.measure(), BigRational::one());
            let zero = BigRational::zero();
            assert!(a0.contains(&zero));
            assert!(!a1.contains(&zero));
        }
        assert!(a_set(2, &tiny(), 2).is_err());
    }

    #[test]
    fn wrapped_central_membership() {
        let p = tiny();
        let c = central_set(2, &p).unwrap();
        let r = major_radius(2, &p, 1).unwrap();
        let half_r = &r / BigRational::from_integer(BigInt::from(2));
        let near_one = BigRational::one() - half_r;
        assert!(c.contains(&near_one));
        assert!(c.contains(&r));
        let beyond = &r * BigRational::new(BigInt::from(3), BigInt::from(2));
        assert!(!c.contains(&beyond));
    }

    #[test]
    fn full_torus_and_measures() {
        let t = ArcSet::full_torus();
        assert_eq!(t.measure(), BigRational::one());
        let x = BigRational::new(BigInt::from(5), BigInt::from(7));
        assert!(t.contains(&x));
        let mat = t.materialized_intervals();
        assert_eq!(mat.len(), 1);
        assert_eq!(mat[0].length(), BigRational::one());
    }

    #[test]
    fn overlap_is_rejected() {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let i1 = Interval {
            lo: BigRational::zero(),
            hi: half.clone(),
            lo_open: false,
            hi_open: false,
        };
        let i2 = Interval {
            lo: half.clone(),
            hi: BigRational::one(),
            lo_open: false,
            hi_open: true,
        };
        // shared closed endpoint: rejected
        assert!(ArcSet::from_intervals("x", vec![i1.clone(), i2.clone()]).is_err());
        // open on one side: accepted
        let i2_open = Interval { lo_open: true, ..i2 };
        assert!(ArcSet::from_intervals("x", vec![i1, i2_open]).is_ok());
    }
}
