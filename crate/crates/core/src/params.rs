//! Diminishing-ranges parameter schedule and the exact exponent arithmetic
//! behind it.
//!
//! The whole artifact is driven by one schedule: P₁ = N^{1/4} and
//! P_{j+1} = P_j^{13/16}, with a short interval length Y = N^γ. The exponent
//! 13/16 comes from the fourth-power smoothing step; iterating it three times
//! gives the exact exponent ladder (1, 13/16, 169/256, 2197/4096) relative to
//! P₁, i.e. (4096, 3328, 2704, 2197)/16384 relative to N. The admissible-γ
//! window is (γ₀, γ₁] with γ₀ = 4059/16384 and γ₁ = 4992/16384; both are kept
//! as exact rationals and only lowered to doubles at evaluation time.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::One;

use crate::error::{Error, Result};
use crate::rational::{pow_ratio, ratio_string, ratio_to_f64};

fn big(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// tunable macro constants

/// The four macro constants of the construction, kept in one place so a single
/// edit retunes every range, radius and shift bound in the crate.
///
/// * `lower_x` — x-ranges are (lower_x·X, X];
/// * `lower_z` — smoothed z-ranges are (lower_z·X⁴, X⁴]; equals lower_x⁴;
/// * `core_radius` — the mollification core around 0 is ‖α‖ ≤ core_radius·X⁻³;
/// * `shift_factor` — the differencing shift bound is h ≤ shift_factor·P₁⁻³P₂⁴.
#[derive(Debug, Clone)]
pub struct Constants {
    pub lower_x: BigRational,
    pub lower_z: BigRational,
    pub core_radius: BigRational,
    pub shift_factor: BigRational,
}

impl Default for Constants {
    fn default() -> Self {
        let lower_x = frac(1, 2);
        let lower_z = &lower_x * &lower_x * &lower_x * &lower_x;
        Constants {
            lower_x,
            lower_z,
            core_radius: frac(1, 8),
            shift_factor: big(32),
        }
    }
}

/// Shared instance of the default constants.
pub fn constants() -> &'static Constants {
    static C: OnceLock<Constants> = OnceLock::new();
    C.get_or_init(Constants::default)
}

// ---------------------------------------------------------------------------
// exponent arithmetic

/// θ_k = 1 − 1/k + 1/(k·2^{k−2}), the per-step exponent of the diminishing
/// ranges device for k-th powers. θ₄ = 13/16.
pub fn theta_k(k: u32) -> Result<BigRational> {
    if k < 3 {
        return Err(Error::Precondition(format!("theta_k needs k >= 3, got {k}")));
    }
    if k > 1 << 20 {
        return Err(Error::InvalidInput(format!("k = {k} is unreasonably large")));
    }
    let kk = BigRational::from(BigInt::from(k));
    let pow = BigRational::from(BigInt::from(2).pow(k - 2));
    Ok(BigRational::one() - kk.recip() + (kk * pow).recip())
}

/// γ₀(h, k) = 1 − (1/k)·Σ_{i=0}^{h−1} θ_k^i, exactly.
///
/// γ₀(4, 4) = 4059/16384 is the headline exponent; γ₀(3, 3) = 17/108
/// reproduces the classical cubes result.
pub fn gamma0_general(h: u32, k: u32) -> Result<BigRational> {
    if h < 1 {
        return Err(Error::Precondition("gamma0_general needs h >= 1".into()));
    }
    if h > 1 << 16 {
        return Err(Error::InvalidInput(format!("h = {h} is unreasonably large")));
    }
    let th = theta_k(k)?;
    let mut sum = BigRational::from(BigInt::from(0));
    let mut pw = BigRational::one();
    for _ in 0..h {
        sum += &pw;
        pw *= &th;
    }
    Ok(BigRational::one() - sum / BigRational::from(BigInt::from(k)))
}

/// The headline exponent γ₀ = γ₀(4,4) = 4059/16384.
pub fn gamma0() -> BigRational {
    frac(4059, 16384)
}

/// Upper end of the admissible window, γ₁ = 4992/16384 (= 39/128): the γ at
/// which Y² reaches P₂³.
pub fn gamma1() -> BigRational {
    frac(4992, 16384)
}

/// Exponents of (P₁, P₂, P₃, P₄) relative to P₁, exactly: (13/16)^{j-1}.
pub fn schedule_exponents() -> [BigRational; 4] {
    let r = frac(13, 16);
    let mut out = [
        BigRational::one(),
        BigRational::one(),
        BigRational::one(),
        BigRational::one(),
    ];
    for j in 1..4 {
        out[j] = &out[j - 1] * &r;
    }
    out
}

/// Is γ inside the admissible window (γ₀, γ₁]?
pub fn gamma_in_window(gamma: &BigRational) -> bool {
    gamma > &gamma0() && gamma <= &gamma1()
}

// ---------------------------------------------------------------------------
// lattice ranges

/// A real interval (lower, upper] whose lattice is the integers it contains.
/// Every range in this crate is open at the bottom and closed at the top;
/// the lattice count is ⌊upper⌋ − ⌊lower⌋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub lower: f64,
    pub upper: f64,
}

impl RangeSpec {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower < 0.0 || upper < lower {
            return Err(Error::InvalidInput(format!(
                "bad range ({lower}, {upper}]"
            )));
        }
        Ok(RangeSpec { lower, upper })
    }

    /// Number of integers in (lower, upper].
    pub fn count(&self) -> u64 {
        let hi = self.upper.floor() as i128;
        let lo = self.lower.floor() as i128;
        (hi - lo).max(0) as u64
    }

    /// The integers of the range, ascending.
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        let lo = self.lower.floor() as u64;
        let n = self.count();
        (1..=n).map(move |i| lo + i)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower < v && v <= self.upper
    }
}

/// The standard x-range (X/2, X] of a generating sum.
pub fn x_range(x: f64) -> RangeSpec {
    let c = ratio_to_f64(&constants().lower_x);
    RangeSpec {
        lower: c * x,
        upper: x,
    }
}

/// The smoothed z-range (X⁴/16, X⁴]. Callers must keep X⁴ within 2⁵³ so the
/// endpoints stay exact in doubles; budget checks upstream guarantee this.
pub fn z_range(x: f64) -> RangeSpec {
    let c = ratio_to_f64(&constants().lower_z);
    let x4 = x * x * x * x;
    RangeSpec {
        lower: c * x4,
        upper: x4,
    }
}

// ---------------------------------------------------------------------------
// the parameter tuple

/// A concrete parameter tuple 𝒫 = (P₁, P₂, P₃, P₄; Y), plus the context size
/// N = ⌊P₁⁴⌋ and (when built from the schedule) the γ that produced Y.
#[derive(Debug, Clone)]
pub struct Parameters {
    pub p: [f64; 4],
    pub y: f64,
    pub n: u128,
    pub gamma: Option<BigRational>,
}

impl Parameters {
    /// Direct construction. Positivity and Y ≥ 1 are hard invariants; the
    /// schedule chain P_j^{3/4} ≤ P_{j+1} ≤ P_j is *not* enforced here (tiny
    /// test tuples bend it) — see [`Parameters::schedule_ok`].
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64, y: f64) -> Result<Self> {
        for (name, v) in [("P1", p1), ("P2", p2), ("P3", p3), ("P4", p4)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !y.is_finite() || y < 1.0 {
            return Err(Error::InvalidInput(format!("Y must be >= 1, got {y}")));
        }
        let n = (p1 * p1 * p1 * p1).floor() as u128;
        Ok(Parameters {
            p: [p1, p2, p3, p4],
            y,
            n,
            gamma: None,
        })
    }

    /// Build the canonical tuple for context size N and exponent γ:
    /// P_j = N^{(13/16)^{j−1}/4}, Y = N^γ. The two float routes
    /// (iterated 13/16 powers vs. direct exponents) agree to ~1 ulp; the
    /// direct exponents are used.
    pub fn choose(n: f64, gamma: &BigRational) -> Result<Self> {
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::InvalidInput(format!("N must be positive, got {n}")));
        }
        let quarter = frac(1, 4);
        let exps = schedule_exponents();
        let mut p = [0.0; 4];
        for (j, e) in exps.iter().enumerate() {
            p[j] = pow_ratio(n, &(e * &quarter));
        }
        let y = pow_ratio(n, gamma);
        if y < 1.0 {
            return Err(Error::Precondition(format!(
                "Y = N^gamma = {y} < 1; interval is empty"
            )));
        }
        let mut out = Parameters::new(p[0], p[1], p[2], p[3], y)?;
        out.gamma = Some(gamma.clone());
        out.n = (p[0] * p[0] * p[0] * p[0]).round() as u128;
        Ok(out)
    }

    /// x-range of the j-th generating sum (j is 1-based).
    pub fn x_range(&self, j: usize) -> RangeSpec {
        x_range(self.p[j - 1])
    }

    /// Smoothed z-range of the j-th sum (j is 1-based).
    pub fn z_range(&self, j: usize) -> RangeSpec {
        z_range(self.p[j - 1])
    }

    /// Lattice count of the y-variable: y runs over 0 ≤ y < Y.
    pub fn y_count(&self) -> u64 {
        self.y.ceil() as u64
    }

    /// Shift bound for the differencing sum at level j:
    /// Z_j = shift_factor · P_j⁻³ P_{j+1}⁴.
    pub fn h_bound(&self, j: usize) -> f64 {
        let c = ratio_to_f64(&constants().shift_factor);
        let pj = self.p[j - 1];
        let pj1 = self.p[j];
        c * pj1.powi(4) / pj.powi(3)
    }

    /// Does the tuple satisfy the schedule chain P_j^{3/4} ≤ P_{j+1} ≤ P_j?
    pub fn schedule_ok(&self) -> bool {
        let slack = 1.0 + 1e-9;
        (0..3).all(|j| {
            self.p[j + 1] <= self.p[j] * slack && self.p[j].powf(0.75) <= self.p[j + 1] * slack
        })
    }

    /// Flat key/value view used by every serialized report: reals as decimal
    /// strings, rationals as "num/den".
    pub fn flat_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for (j, v) in self.p.iter().enumerate() {
            m.insert(format!("p{}", j + 1), format!("{v}"));
        }
        m.insert("y".into(), format!("{}", self.y));
        m.insert("n".into(), format!("{}", self.n));
        if let Some(g) = &self.gamma {
            m.insert("gamma".into(), ratio_string(g));
        }
        m
    }
}

// ---------------------------------------------------------------------------
// torus points

/// A point of ℝ/ℤ, stored as its representative in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint(f64);

impl TorusPoint {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite torus point {x}")));
        }
        let mut v = x.rem_euclid(1.0);
        if v >= 1.0 {
            // rem_euclid can return exactly 1.0 for tiny negative x
            v = 0.0;
        }
        Ok(TorusPoint(v))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Distance to the nearest integer, ‖α‖ = min(α, 1−α).
    pub fn distance(&self) -> f64 {
        self.0.min(1.0 - self.0)
    }
}

/// ‖α‖ for a raw real argument.
pub fn torus_distance(x: f64) -> Result<f64> {
    Ok(TorusPoint::new(x)?.distance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_ratio;

    #[test]
    fn gamma0_headline_values() {
        assert_eq!(ratio_string(&gamma0_general(4, 4).unwrap()), "4059/16384");
        assert_eq!(ratio_string(&gamma0_general(3, 3).unwrap()), "17/108");
        assert_eq!(ratio_string(&gamma0_general(5, 4).unwrap()), "36383/262144");
        assert_eq!(gamma0_general(4, 4).unwrap(), gamma0());
        assert_eq!(ratio_string(&theta_k(4).unwrap()), "13/16");
        assert_eq!(ratio_string(&theta_k(3).unwrap()), "5/6");
    }

    #[test]
    fn gamma0_rejects_bad_input() {
        assert!(gamma0_general(0, 4).is_err());
        assert!(gamma0_general(4, 2).is_err());
        assert!(theta_k(2).is_err());
    }

    #[test]
    fn schedule_exponent_ladder() {
        let e = schedule_exponents();
        assert_eq!(ratio_string(&e[0]), "1");
        assert_eq!(ratio_string(&e[1]), "13/16");
        assert_eq!(ratio_string(&e[2]), "169/256");
        assert_eq!(ratio_string(&e[3]), "2197/4096");
        // geometric with ratio 13/16, exactly
        let r = frac(13, 16);
        for j in 0..3 {
            assert_eq!(&e[j] * &r, e[j + 1]);
        }
        // relative to N: (4096, 3328, 2704, 2197)/16384
        let quarter = frac(1, 4);
        assert_eq!(ratio_string(&(&e[1] * &quarter)), "13/64");
        assert_eq!(ratio_string(&(&e[3] * &quarter)), "2197/16384");
    }

    #[test]
    fn choose_parameters_at_2_pow_32() {
        let (g, _) = parse_ratio("13/50").unwrap();
        let p = Parameters::choose((1u64 << 32) as f64, &g).unwrap();
        assert_eq!(p.p[0], 256.0);
        // oracle: 2^(32*13/64), 2^(32*169/1024), 2^(32*2197/16384)
        assert!((p.p[1] - 90.509667991878083).abs() < 1e-10);
        assert!((p.p[2] - 38.8879155193750041).abs() < 1e-10);
        assert!((p.p[3] - 19.576020673579507).abs() < 1e-10);
        assert_eq!(p.n, 1u128 << 32);
        assert!(p.schedule_ok());
        // iterated route agrees to 1e-12 relative
        for j in 0..3 {
            let iterated = p.p[j].powf(13.0 / 16.0);
            assert!((iterated - p.p[j + 1]).abs() <= 1e-12 * p.p[j + 1]);
        }
        // Y^2 <= 8 P2^3 whenever gamma <= gamma1
        assert!(p.y * p.y <= 8.0 * p.p[1].powi(3));
    }

    #[test]
    fn choose_rejects_empty_interval() {
        let (g, _) = parse_ratio("13/50").unwrap();
        assert!(Parameters::choose(0.0, &g).is_err());
        assert!(Parameters::choose(-5.0, &g).is_err());
        // N = 1 gives Y = 1 which is fine
        assert!(Parameters::choose(1.0, &g).is_ok());
    }

    #[test]
    fn gamma_window() {
        let (g, _) = parse_ratio("13/50").unwrap(); // 0.26
        assert!(gamma_in_window(&g));
        let (lo, _) = parse_ratio("4059/16384").unwrap();
        assert!(!gamma_in_window(&lo)); // window is open at gamma0
        let (hi, _) = parse_ratio("39/128").unwrap();
        assert!(gamma_in_window(&hi)); // closed at gamma1
        let (above, _) = parse_ratio("1/2").unwrap();
        assert!(!gamma_in_window(&above));
    }

    #[test]
    fn ranges_open_closed() {
        let r = x_range(8.0);
        assert_eq!(r.count(), 4);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![5, 6, 7, 8]);
        let r = z_range(2.0);
        assert_eq!(r.count(), 15);
        assert_eq!(r.iter().next(), Some(2));
        assert_eq!(r.iter().last(), Some(16));
        // boundary: lower endpoint excluded
        let r = RangeSpec::new(4.0, 8.0).unwrap();
        assert!(!r.contains(4.0));
        assert!(r.contains(8.0));
        assert_eq!(RangeSpec::new(0.9, 0.99).unwrap().count(), 0);
    }

    #[test]
    fn constants_are_coherent() {
        let c = constants();
        assert_eq!(ratio_string(&c.lower_x), "1/2");
        assert_eq!(ratio_string(&c.lower_z), "1/16");
        let fourth = &c.lower_x * &c.lower_x * &c.lower_x * &c.lower_x;
        assert_eq!(c.lower_z, fourth);
        assert_eq!(ratio_string(&c.core_radius), "1/8");
        assert_eq!(ratio_string(&c.shift_factor), "32");
    }

    #[test]
    fn torus_points() {
        assert_eq!(TorusPoint::new(1.25).unwrap().value(), 0.25);
        assert_eq!(TorusPoint::new(-0.25).unwrap().value(), 0.75);
        assert_eq!(TorusPoint::new(-3.0).unwrap().value(), 0.0);
        assert!((TorusPoint::new(0.75).unwrap().distance() - 0.25).abs() < 1e-15);
        assert_eq!(torus_distance(0.5).unwrap(), 0.5);
        assert!(TorusPoint::new(f64::NAN).is_err());
        // tiny negative values must wrap into [0, 1)
        let t = TorusPoint::new(-1e-300).unwrap();
        assert!(t.value() < 1.0);
    }

    #[test]
    fn h_bound_shape() {
        // with P2 = P1^{13/16}: Z1 = 32 P1^{1/4}
        let (g, _) = parse_ratio("13/50").unwrap();
        let p = Parameters::choose((1u64 << 32) as f64, &g).unwrap();
        let z1 = p.h_bound(1);
        assert!((z1 - 32.0 * 256.0f64.powf(0.25)).abs() < 1e-9 * z1);
    }

    #[test]
    fn y_count_convention() {
        let p = Parameters::new(4.0, 4.0, 4.0, 4.0, 2.0).unwrap();
        assert_eq!(p.y_count(), 2); // y in {0, 1}
        let p = Parameters::new(4.0, 4.0, 4.0, 4.0, 2.5).unwrap();
        assert_eq!(p.y_count(), 3); // y in {0, 1, 2}
        assert!(Parameters::new(4.0, 4.0, 4.0, 4.0, 0.5).is_err());
    }
}
