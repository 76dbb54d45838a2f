//! The exponential sums of the construction and their companion counting
//! functions.
//!
//! * `weyl_f` — f(α, X) = Σ_{X/2 < x ≤ X} e(αx⁴), the generating sum;
//! * `weyl_g` — g(α, Y) = Σ_{0 ≤ y < Y} e(αy), the short linear sum;
//! * `mollified_nu` — ν(α, X) = Σ_{X⁴/16 < z ≤ X⁴} ¼z^{−3/4} e(αz), the
//!   smoothed stand-in for f on the central arc;
//! * `diff_sum_h` — H(α, X, Z) = Σ_{1 ≤ h ≤ Z} Σ_{X/2 < x ≤ X−h} e(αΔ(x,h))
//!   with Δ(x, h) = (x+h)⁴ − x⁴, the Weyl-differenced sum;
//! * `count_r`, `count_r_prime`, `count_rho` — the arithmetic mirror images
//!   of |f|², H and |ν₂ν₃ν₄|².
//!
//! All lattice ranges are open-closed (lower, upper]. Phases are reduced
//! exactly before the complex exponential (see `phase`), and terms are added
//! in ascending order with pairwise combination.

use num_complex::Complex64;

use crate::arith::{exact_fourth_root, pow4};
use crate::error::{Error, Result};
use crate::params::{x_range, z_range, Parameters};
pub use crate::params::RangeSpec;
use crate::phase::{pairwise_complex, pairwise_f64, unit, Alpha};

/// Complex value type used throughout (finite components by construction).
pub type ComplexValue = Complex64;

/// f(α, X): the fourth-power generating sum over x ∈ (X/2, X].
pub fn weyl_f(alpha: &Alpha, x: f64) -> Complex64 {
    pairwise_complex(x_range(x).iter().map(|xi| unit(alpha, pow4(xi))))
}

/// g(α, Y): the linear sum over 0 ≤ y < Y. Closed geometric form away from
/// α = 0, direct count at α = 0. Satisfies |g| ≤ ⌈Y⌉ and |g| ≤ 1/(2‖α‖).
pub fn weyl_g(alpha: &Alpha, y: f64) -> Complex64 {
    let k = if y <= 0.0 { 0 } else { y.ceil() as u64 };
    if k == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if alpha.is_zero() {
        return Complex64::new(k as f64, 0.0);
    }
    let num = unit(alpha, k as u128) - 1.0;
    let den = unit(alpha, 1) - 1.0;
    num / den
}

/// The mollifier weight ¼z^{−3/4}.
pub fn nu_weight(z: u128) -> f64 {
    0.25 * (z as f64).powf(-0.75)
}

/// ν(α, X): the mollified sum over z ∈ (X⁴/16, X⁴]. The sum is evaluated
/// term by term; `term_budget` caps the number of terms (an error, never a
/// truncation).
pub fn mollified_nu(alpha: &Alpha, x: f64, term_budget: u64) -> Result<Complex64> {
    if !(x >= 2.0) {
        return Err(Error::Precondition(format!("nu needs X >= 2, got {x}")));
    }
    let zr = z_range(x);
    if zr.upper > 9.0e15 {
        return Err(Error::BudgetExceeded {
            what: "nu z-range endpoint beyond exact double range".into(),
            needed: zr.upper as u128,
            budget: 9_000_000_000_000_000,
        });
    }
    let n_terms = zr.count();
    if n_terms > term_budget {
        return Err(Error::BudgetExceeded {
            what: "nu term count".into(),
            needed: n_terms as u128,
            budget: term_budget as u128,
        });
    }
    Ok(pairwise_complex(zr.iter().map(|z| {
        let w = nu_weight(z as u128);
        let u = unit(alpha, z as u128);
        Complex64::new(w * u.re, w * u.im)
    })))
}

/// Σ of squared mollifier weights over the z-range of X: the exact value of
/// ∫|ν(·, X)|² by orthogonality. Serves as the closed-form side of the
/// quadrature cross-check.
pub fn nu_parseval(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Precondition(format!("nu needs X >= 2, got {x}")));
    }
    let zr = z_range(x);
    Ok(pairwise_f64(zr.iter().map(|z| {
        let w = nu_weight(z as u128);
        w * w
    })))
}

/// H(α, X, Z): the differenced sum. Z ≤ 0 gives the empty sum.
pub fn diff_sum_h(alpha: &Alpha, x: f64, z: f64) -> Complex64 {
    let mut acc = crate::phase::Pairwise::new();
    let h_max = z.floor() as i64;
    let mut h = 1i64;
    while h <= h_max {
        let xr = RangeSpec {
            lower: x_range(x).lower,
            upper: x - h as f64,
        };
        if xr.upper > xr.lower {
            for xi in xr.iter() {
                let delta = pow4(xi + h as u64) - pow4(xi);
                acc.push(unit(alpha, delta));
            }
        }
        h += 1;
    }
    acc.total(Complex64::new(0.0, 0.0))
}

/// Number of (h, x) pairs in the support of H(·, X, Z).
pub fn diff_sum_h_terms(x: f64, z: f64) -> u64 {
    let mut n = 0u64;
    let h_max = z.floor() as i64;
    for h in 1..=h_max {
        let lo = x_range(x).lower.floor() as i64;
        let hi = (x - h as f64).floor() as i64;
        n += (hi - lo).max(0) as u64;
    }
    n
}

/// H₁(α) = H(α, P₁, Z₁) with the canonical shift bound Z₁ = 32·P₁⁻³P₂⁴.
pub fn h1(alpha: &Alpha, p: &Parameters) -> Complex64 {
    diff_sum_h(alpha, p.p[0], p.h_bound(1))
}

/// r(n, X): ordered pairs x, x′ ∈ (X/2, X] with x′⁴ − x⁴ = n. Even in n;
/// r(0, X) is the lattice count of the range; vanishes for
/// 0 < |n| ≤ X³/2 and for |n| > (15/16)X⁴.
pub fn count_r(n: i128, x: f64) -> u64 {
    let xr = x_range(x);
    let lo = xr.lower.floor() as u64;
    let hi = xr.upper.floor() as u64;
    let mut c = 0u64;
    for xi in xr.iter() {
        let t = pow4(xi) as i128 + n;
        if t < 0 {
            continue;
        }
        if let Some(root) = exact_fourth_root(t as u128) {
            if root > lo && root <= hi {
                c += 1;
            }
        }
    }
    c
}

/// r′(n, 𝒫): pairs (h, x) with 1 ≤ h ≤ Z₁, P₁/2 < x, x + h ≤ P₁ and
/// (x+h)⁴ − x⁴ = n. For 0 < n ≤ 4P₂⁴ this equals r(n, P₁): the shift bound
/// Z₁ = 32·P₁⁻³P₂⁴ is wide enough that (x, x′) ↦ (x′−x, x) is a bijection.
pub fn count_r_prime(n: u128, p: &Parameters) -> u64 {
    if n == 0 {
        return 0;
    }
    let x1 = p.p[0];
    let h_max = p.h_bound(1).floor() as u64;
    let lo = x_range(x1).lower.floor() as u64;
    let mut c = 0u64;
    for h in 1..=h_max {
        let hi = (x1 - h as f64).floor() as u64;
        if hi <= lo {
            continue;
        }
        for xi in (lo + 1)..=hi {
            if pow4(xi + h) - pow4(xi) == n {
                c += 1;
            }
        }
    }
    c
}

/// ρ(n, 𝒫) = 4⁻⁶ Σ (z₂z₂′z₃z₃′z₄z₄′)^{−3/4} over z_j, z_j′ in the smoothed
/// ranges of P₂, P₃, P₄ with z₂+z₃+z₄ − (z₂′+z₃′+z₄′) = n.
///
/// Computed by convolving the three single-range weight profiles into the
/// triple-sum profile w(t) and correlating w against itself at lag n. Even in
/// n; vanishes for |n| > 3P₂⁴. `term_budget` caps the largest array.
pub fn count_rho(n: i128, p: &Parameters, term_budget: u64) -> Result<f64> {
    let w = triple_weight_profile(p, term_budget)?;
    let lag = n.unsigned_abs().min(w.len() as u128) as usize;
    let mut acc = 0.0f64;
    for t in lag..w.len() {
        acc += w[t] * w[t - lag];
    }
    Ok(acc / 4096.0) // 4^6
}

/// w(t) = Σ_{z₂+z₃+z₄ = t} (z₂z₃z₄)^{−3/4} as a dense vector indexed by t
/// (index 0 = sum 0; leading zeros kept for simplicity — the ranges are
/// anchored well above 0 only for large P, and tiny P keeps arrays short).
pub(crate) fn triple_weight_profile(p: &Parameters, term_budget: u64) -> Result<Vec<f64>> {
    let mut w: Vec<f64> = vec![1.0]; // delta at 0
    for j in 2..=4 {
        let zr = p.z_range(j);
        if zr.upper > 9.0e15 {
            return Err(Error::BudgetExceeded {
                what: format!("rho z-range for P{j} beyond exact double range"),
                needed: zr.upper as u128,
                budget: 9_000_000_000_000_000,
            });
        }
        let hi = zr.upper.floor() as u64;
        let out_len = w.len() + hi as usize;
        if out_len as u64 > term_budget {
            return Err(Error::BudgetExceeded {
                what: "rho convolution length".into(),
                needed: out_len as u128,
                budget: term_budget as u128,
            });
        }
        let mut out = vec![0.0f64; out_len];
        for z in zr.iter() {
            let wt = (z as f64).powf(-0.75);
            for (i, &wi) in w.iter().enumerate() {
                if wi != 0.0 {
                    out[i + z as usize] += wi * wt;
                }
            }
        }
        w = out;
    }
    Ok(w)
}

/// Total ρ-mass Σ_n ρ(n) = (Σ_t w(t))², divided by 4⁶ — a cheap sanity
/// identity for the convolution route.
pub fn rho_total_mass(p: &Parameters, term_budget: u64) -> Result<f64> {
    let w = triple_weight_profile(p, term_budget)?;
    let s: f64 = w.iter().sum();
    Ok(s * s / 4096.0)
}
