//! Exact phase reduction and deterministic accumulation.
//!
//! Exponential-sum terms are e(α·m) with m a (possibly 128-bit) integer.
//! Evaluating α·m in doubles and reducing mod 1 afterwards throws away all
//! the low bits exactly where they matter, so reduction happens *before* the
//! complex exponential:
//!
//! * α = a/q: α·m ≡ a·(m mod q)/q (mod 1), in integer arithmetic;
//! * α a double: the double *is* a dyadic rational M·2^&#8209;E, and
//!   frac(α·m) = (M·m mod 2^E)/2^E, computed with a 192-bit multiply and a
//!   mask. A fast path multiplies directly when α·m < 2⁸, where the naive
//!   product is already accurate to ~2e-13 absolute.
//!
//! Sums are accumulated in a fixed ascending term order with pairwise (tree)
//! combination, so results are bit-reproducible across runs and independent
//! of thread count by construction.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::TorusPoint;
use crate::rational::ratio_from_f64;

/// A torus point carried in the most exact form available. Rational points
/// keep numerator/denominator; everything else keeps the double (itself an
/// exact dyadic rational).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Ratio { a: u64, q: u64 },
    Value(f64),
}

impl Alpha {
    /// Exact rational point a/q, reduced mod 1 and to lowest terms.
    pub fn from_ratio(a: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let (mut a, mut q) = (a as i128, q as i128);
        if q < 0 {
            a = -a;
            q = -q;
        }
        a = a.rem_euclid(q);
        let g = gcd_u128(a as u128, q as u128);
        Ok(Alpha::Ratio {
            a: (a as u128 / g) as u64,
            q: (q as u128 / g) as u64,
        })
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        Ok(Alpha::Value(TorusPoint::new(x)?.value()))
    }

    pub fn from_torus(t: TorusPoint) -> Self {
        Alpha::Value(t.value())
    }

    /// From an arbitrary exact rational; falls back to the double value when
    /// numerator or denominator exceed 64 bits after reduction mod 1.
    pub fn from_big_ratio(r: &BigRational) -> Result<Self> {
        let f = r - r.floor();
        match (f.numer().to_u64(), f.denom().to_u64()) {
            (Some(a), Some(q)) => Ok(Alpha::Ratio { a, q }),
            _ => Alpha::from_f64(f.to_f64().ok_or_else(|| {
                Error::InvalidInput("rational out of double range".into())
            })?),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Alpha::Ratio { a, .. } => *a == 0,
            Alpha::Value(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Alpha::Ratio { a, q } => *a as f64 / *q as f64,
            Alpha::Value(x) => *x,
        }
    }

    /// The exact rational this point denotes (doubles are dyadic rationals).
    pub fn to_big_ratio(&self) -> BigRational {
        match self {
            Alpha::Ratio { a, q } => BigRational::new(BigInt::from(*a), BigInt::from(*q)),
            Alpha::Value(x) => ratio_from_f64(*x).expect("alpha is finite"),
        }
    }

    /// ‖α‖, the distance to the nearest integer.
    pub fn torus_norm(&self) -> f64 {
        let v = self.to_f64();
        v.min(1.0 - v)
    }

    /// 1 − α (the reflection used by conjugate-symmetry checks). Exact for
    /// rational points; exact for doubles in [1/2, 1) by Sterbenz.
    pub fn complement(&self) -> Alpha {
        match self {
            Alpha::Ratio { a, q } => {
                if *a == 0 {
                    Alpha::Ratio { a: 0, q: 1 }
                } else {
                    Alpha::Ratio { a: q - a, q: *q }
                }
            }
            Alpha::Value(x) => {
                if *x == 0.0 {
                    Alpha::Value(0.0)
                } else {
                    Alpha::Value(1.0 - x)
                }
            }
        }
    }

    /// frac(α·m) ∈ [0, 1).
    pub fn frac_mul(&self, m: u128) -> f64 {
        let (p, conj) = self.phase_folded(m);
        if conj {
            1.0 - p
        } else {
            p
        }
    }

    /// frac(α·m) folded into [0, 1/2] together with a conjugation flag, so
    /// that α and 1 − α yield the *same* folded phase (hence bit-identical
    /// trigonometry) with opposite flags. The fold happens in exact integer
    /// arithmetic, before any division can round.
    pub fn phase_folded(&self, m: u128) -> (f64, bool) {
        match self {
            Alpha::Ratio { a, q } => {
                let q128 = *q as u128;
                let r = (*a as u128 * (m % q128)) % q128;
                if 2 * r > q128 {
                    ((q128 - r) as f64 / *q as f64, true)
                } else {
                    (r as f64 / *q as f64, false)
                }
            }
            Alpha::Value(x) => frac_mul_dyadic_folded(*x, m),
        }
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alpha::Ratio { a, q } => write!(f, "{a}/{q}"),
            Alpha::Value(x) => write!(f, "{x}"),
        }
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// frac(x·m) for a double x ∈ [0, 1), treating x as the exact dyadic rational
/// it denotes.
#[cfg(test)]
fn frac_mul_dyadic(x: f64, m: u128) -> f64 {
    let (p, conj) = frac_mul_dyadic_folded(x, m);
    if conj {
        1.0 - p
    } else {
        p
    }
}

/// Folded form of `frac_mul_dyadic`: (φ, conj) with φ ∈ [0, 1/2], where the
/// fold φ ↦ 1 − φ is carried out on the exact 192-bit fraction.
fn frac_mul_dyadic_folded(x: f64, m: u128) -> (f64, bool) {
    if x == 0.0 || m == 0 {
        return (0.0, false);
    }
    // fast path: the naive product is accurate to ~2^-44 absolute below 2^8
    let approx = x * m as f64;
    if approx < 256.0 {
        let p = approx.fract();
        if p > 0.5 {
            return (1.0 - p, true); // exact: Sterbenz on [1/2, 1]
        }
        return (p, false);
    }
    // decode x = mant * 2^(-e), mant < 2^53, e > 0 since 0 < x < 1
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant_bits = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if exp_bits == 0 {
        (mant_bits, -1074i64)
    } else {
        (mant_bits | (1u64 << 52), exp_bits - 1075)
    };
    let e = (-exp) as u32; // x = mant / 2^e, 1 <= e <= 1074+52
    // 192-bit product mant * m
    let m_lo = m as u64;
    let m_hi = (m >> 64) as u64;
    let p0 = (mant as u128) * (m_lo as u128);
    let p1 = (mant as u128) * (m_hi as u128) + (p0 >> 64);
    let mut v = [p0 as u64, p1 as u64, (p1 >> 64) as u64]; // little-endian
    mask_limbs(&mut v, e);
    // fold: the fraction exceeds 1/2 iff bit e-1 is set (product < 2^181, so
    // e >= 182 never folds)
    let mut conj = false;
    if e <= 192 && bit_set(&v, e - 1) {
        let mut w = v;
        clear_bit(&mut w, e - 1);
        if w == [0, 0, 0] {
            return (0.5, false); // exactly one half: self-conjugate point
        }
        // 2^e - v, two's complement within e bits
        let mut carry = 1u128;
        for limb in v.iter_mut() {
            let t = (!*limb) as u128 + carry;
            *limb = t as u64;
            carry = t >> 64;
        }
        mask_limbs(&mut v, e);
        conj = true;
    }
    (frac_from_limbs(v, e), conj)
}

/// Zero out bit `e` and above in a little-endian 192-bit value.
fn mask_limbs(v: &mut [u64; 3], e: u32) {
    if e < 192 {
        let word = (e / 64) as usize;
        let bit = e % 64;
        if bit == 0 {
            for w in v.iter_mut().skip(word) {
                *w = 0;
            }
        } else {
            v[word] &= (1u64 << bit) - 1;
            for w in v.iter_mut().skip(word + 1) {
                *w = 0;
            }
        }
    }
}

fn bit_set(v: &[u64; 3], bit: u32) -> bool {
    if bit >= 192 {
        return false;
    }
    v[(bit / 64) as usize] >> (bit % 64) & 1 == 1
}

fn clear_bit(v: &mut [u64; 3], bit: u32) {
    if bit < 192 {
        v[(bit / 64) as usize] &= !(1u64 << (bit % 64));
    }
}

/// (already-masked value) / 2^e rounded to the nearest double.
fn frac_from_limbs(limbs: [u64; 3], e: u32) -> f64 {
    let v = limbs;
    // top set bit
    let mut top = None;
    for i in (0..3).rev() {
        if v[i] != 0 {
            top = Some(i * 64 + 63 - v[i].leading_zeros() as usize);
            break;
        }
    }
    let Some(top) = top else { return 0.0 };
    // pull the top <=64 bits into one u64 and convert
    let shift = (top as i64 - 63).max(0);
    let chunk = if shift == 0 {
        v[0]
    } else {
        let w = (shift / 64) as usize;
        let b = (shift % 64) as u32;
        if b == 0 {
            v[w]
        } else {
            let lo = v[w] >> b;
            let hi = if w + 1 < 3 { v[w + 1] << (64 - b) } else { 0 };
            lo | hi
        }
    };
    // value ~= chunk * 2^shift, frac = value / 2^e
    let mut out = chunk as f64 * exp2i(shift as i64 - e as i64);
    if out >= 1.0 {
        out = 0.0; // rounding to exactly 1.0 wraps to the same torus point
    }
    out
}

/// 2^k for |k| possibly beyond the normal exponent range, in two steps.
fn exp2i(k: i64) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else if k < 0 {
        let half = k / 2;
        f64::from_bits(((half + 1023) as u64) << 52) * f64::from_bits(((k - half + 1023) as u64) << 52)
    } else {
        f64::INFINITY // never reached: k <= 0 in all call sites
    }
}

/// e(φ) = exp(2πiφ) for the folded range φ ∈ [0, 1/2], with the quarter
/// turns pinned to their exact values.
fn e_half(phase: f64) -> Complex64 {
    if phase == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if phase == 0.5 {
        return Complex64::new(-1.0, 0.0);
    }
    if phase == 0.25 {
        return Complex64::new(0.0, 1.0);
    }
    let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
    Complex64::new(c, s)
}

/// e(φ) = exp(2πiφ) for φ ∈ [0, 1), with a conjugate fold so that
/// e(1 − φ) is the bit-exact conjugate of e(φ) whenever 1 − φ is exact
/// (always true on [1/2, 1) by Sterbenz).
pub fn e_of(phase: f64) -> Complex64 {
    debug_assert!((0.0..1.0).contains(&phase), "phase {phase} out of range");
    if phase > 0.5 {
        let c = e_half(1.0 - phase);
        return Complex64::new(c.re, -c.im);
    }
    e_half(phase)
}

/// e(α·m) with exact phase reduction and integer-domain conjugate folding:
/// unit(1 − α, m) is the bitwise conjugate of unit(α, m) for rational α.
pub fn unit(alpha: &Alpha, m: u128) -> Complex64 {
    let (p, conj) = alpha.phase_folded(m);
    let v = e_half(p);
    if conj {
        Complex64::new(v.re, -v.im)
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// deterministic pairwise accumulation

/// Pairwise (tree) summation via a binary counter of partial sums. The tree
/// shape depends only on the number of pushes, so for a fixed term order the
/// result is bit-identical across runs and thread counts.
pub struct Pairwise<T> {
    levels: Vec<Option<T>>,
    count: u64,
}

impl<T: Copy + std::ops::Add<Output = T>> Pairwise<T> {
    pub fn new() -> Self {
        Pairwise {
            levels: Vec::new(),
            count: 0,
        }
    }

    pub fn push(&mut self, v: T) {
        let mut carry = v;
        let mut level = 0usize;
        let mut c = self.count;
        while c & 1 == 1 {
            carry = self.levels[level].take().expect("counter invariant") + carry;
            c >>= 1;
            level += 1;
        }
        if level == self.levels.len() {
            self.levels.push(Some(carry));
        } else {
            self.levels[level] = Some(carry);
        }
        self.count += 1;
    }

    /// Fold the remaining partials, lowest level first.
    pub fn total(self, zero: T) -> T {
        let mut acc = zero;
        for slot in self.levels {
            if let Some(v) = slot {
                acc = acc + v;
            }
        }
        acc
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

impl<T: Copy + std::ops::Add<Output = T>> Default for Pairwise<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Pairwise sum of complex terms in iteration order.
pub fn pairwise_complex(it: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut acc = Pairwise::new();
    for v in it {
        acc.push(v);
    }
    acc.total(Complex64::new(0.0, 0.0))
}

/// Pairwise sum of real terms in iteration order.
pub fn pairwise_f64(it: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Pairwise::new();
    for v in it {
        acc.push(v);
    }
    acc.total(0.0)
}
