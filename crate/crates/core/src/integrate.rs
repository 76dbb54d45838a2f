//! Torus integration of the construction's trigonometric polynomials.
//!
//! Every integrand handled here is a product of factors f, g, ν, H (or
//! conjugates), i.e. a trig polynomial with known integer frequency support.
//! Three evaluation routes are provided:
//!
//! * full torus: uniform M-point grid averaging with M strictly above the
//!   frequency spread — orthogonality is then an exact identity (Nyquist),
//!   so Fourier coefficients come out alias-free and integer results round
//!   exactly. Factors are synthesized on the grid by an inverse FFT of
//!   their sparse coefficient lists; all-n extraction is one forward FFT.
//! * arc-restricted: adaptive 16-point Gauss–Legendre panels with automatic
//!   bisection to a requested relative tolerance; the achieved error
//!   estimate is part of the result.
//! * arc-restricted, exact-coefficient route: Σ_k c_k·∫_B e((k−n)α)dα with
//!   the interval transforms in closed form — an independent cross-check on
//!   the panel quadrature.
//!
//! The module also carries the arithmetic (integer, quadrature-free)
//! counterparts: the solution counts 𝒮⁽ʲ⁾, 𝒯⁽ʲ⁾ behind the S/T integrals and
//! the weighted closed form behind U.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::traits::ToPrimitive;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arcs::ArcSet;
use crate::arith::pow4;
use crate::error::{Error, Result};
use crate::params::{Parameters, RangeSpec};
use crate::phase::{e_of, pairwise_complex, unit, Alpha, Pairwise};
use crate::rational::ratio_to_f64;
use crate::weyl::{diff_sum_h, mollified_nu, nu_weight, weyl_f, weyl_g};

/// One factor of an integrand.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// f(α, X): frequencies x⁴ for x ∈ (X/2, X].
    F { x: f64 },
    /// g(α, Y): frequencies 0..⌈Y⌉−1.
    G { y: f64 },
    /// ν(α, X): frequencies z ∈ (X⁴/16, X⁴] with weights ¼z^{−3/4}.
    Nu { x: f64 },
    /// H(α, X, Z): frequencies (x+h)⁴−x⁴ with multiplicity.
    H { x: f64, z: f64 },
    /// Complex conjugate of a factor (negated frequencies).
    Conj(Box<Factor>),
}

impl Factor {
    /// Sparse coefficient list (frequency, weight), frequencies ascending.
    /// Coefficients are real for every factor in this crate.
    pub fn coefficients(&self) -> Vec<(i128, f64)> {
        match self {
            Factor::F { x } => {
                let xr = crate::params::x_range(*x);
                xr.iter().map(|xi| (pow4(xi) as i128, 1.0)).collect()
            }
            Factor::G { y } => {
                let k = if *y <= 0.0 { 0 } else { y.ceil() as i128 };
                (0..k).map(|f| (f, 1.0)).collect()
            }
            Factor::Nu { x } => {
                let zr = crate::params::z_range(*x);
                zr.iter()
                    .map(|z| (z as i128, nu_weight(z as u128)))
                    .collect()
            }
            Factor::H { x, z } => {
                let mut acc: BTreeMap<i128, f64> = BTreeMap::new();
                let h_max = z.floor() as i64;
                for h in 1..=h_max.max(0) {
                    let xr = RangeSpec {
                        lower: crate::params::x_range(*x).lower,
                        upper: *x - h as f64,
                    };
                    if xr.upper > xr.lower {
                        for xi in xr.iter() {
                            let d = (pow4(xi + h as u64) - pow4(xi)) as i128;
                            *acc.entry(d).or_insert(0.0) += 1.0;
                        }
                    }
                }
                acc.into_iter().collect()
            }
            Factor::Conj(inner) => {
                let mut v: Vec<(i128, f64)> = inner
                    .coefficients()
                    .into_iter()
                    .map(|(f, c)| (-f, c))
                    .collect();
                v.reverse();
                v
            }
        }
    }

    /// Pointwise evaluation (used by panel quadrature).
    pub fn eval(&self, alpha: &Alpha, nu_budget: u64) -> Result<Complex64> {
        Ok(match self {
            Factor::F { x } => weyl_f(alpha, *x),
            Factor::G { y } => weyl_g(alpha, *y),
            Factor::Nu { x } => mollified_nu(alpha, *x, nu_budget)?,
            Factor::H { x, z } => diff_sum_h(alpha, *x, *z),
            Factor::Conj(inner) => inner.eval(alpha, nu_budget)?.conj(),
        })
    }

    /// Structural key for caching grid synthesis between a factor and its
    /// conjugate.
    fn base(&self) -> &Factor {
        match self {
            Factor::Conj(inner) => inner.base(),
            other => other,
        }
    }

    fn conj_depth(&self) -> usize {
        match self {
            Factor::Conj(inner) => 1 + inner.conj_depth(),
            _ => 0,
        }
    }
}

/// A product of factors together with an extra e(−nα) twist supplied at
/// integration time.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub factors: Vec<Factor>,
}

impl Integrand {
    pub fn new(factors: Vec<Factor>) -> Self {
        Integrand { factors }
    }

    /// Inclusive frequency-support bounds (lo, hi) of the product; None if
    /// any factor is identically zero.
    pub fn support_bounds(&self) -> Option<(i128, i128)> {
        let mut lo = 0i128;
        let mut hi = 0i128;
        for f in &self.factors {
            let c = f.coefficients();
            let first = c.first()?.0;
            let last = c.last()?.0;
            lo += first;
            hi += last;
        }
        Some((lo, hi))
    }

    pub fn eval(&self, alpha: &Alpha, nu_budget: u64) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for f in &self.factors {
            acc *= f.eval(alpha, nu_budget)?;
        }
        Ok(acc)
    }
}

/// Resource limits for quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureBudget {
    /// Largest permitted uniform-grid size.
    pub max_grid_points: usize,
    /// Largest permitted number of panel evaluations per integral.
    pub max_panel_evals: usize,
    /// Relative tolerance for adaptive panels.
    pub rel_tol: f64,
    /// Term cap for pointwise ν evaluation inside panels.
    pub nu_terms: u64,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        QuadratureBudget {
            max_grid_points: 1 << 26,
            max_panel_evals: 500_000,
            rel_tol: 1e-8,
            nu_terms: 100_000_000,
        }
    }
}

/// Outcome of one integral evaluation.
#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub value: Complex64,
    /// "grid" (exact torus average), "panels" (adaptive quadrature) or
    /// "fourier-arcs" (coefficient × interval transforms).
    pub method: String,
    pub grid_m: Option<usize>,
    /// Absolute error estimate: 0 for alias-free grids, the accumulated
    /// bisection estimate for panels.
    pub error_estimate: f64,
    pub requested_rel_tol: f64,
    /// Panel evaluations consumed (0 for grid route).
    pub evals: usize,
}

// ---------------------------------------------------------------------------
// full-torus grid engine

/// Alias-free grid size for extracting coefficient n of the integrand:
/// the next power of two strictly above the widened support spread.
pub fn grid_size_for(integrand: &Integrand, n: i128) -> Result<usize> {
    let Some((lo, hi)) = integrand.support_bounds() else {
        return Ok(0);
    };
    let width = (hi.max(n) - lo.min(n))
        .checked_add(1)
        .ok_or_else(|| Error::InvalidInput("frequency spread overflows".into()))?;
    let width_usize = usize::try_from(width)
        .map_err(|_| Error::InvalidInput("frequency spread exceeds usize".into()))?;
    Ok(width_usize.next_power_of_two())
}

/// Synthesize the product of all factors on the M-point grid. Each distinct
/// base factor is synthesized by one inverse FFT; conjugate occurrences
/// reuse it pointwise, so peak memory stays at two grid buffers.
fn synthesize_product(integrand: &Integrand, m: usize) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(m);
    let mut acc = vec![Complex64::new(1.0, 0.0); m];
    let nf = integrand.factors.len();
    let mut consumed = vec![false; nf];
    for idx in 0..nf {
        if consumed[idx] {
            continue;
        }
        let base = integrand.factors[idx].base().clone();
        let mut tmp = vec![Complex64::new(0.0, 0.0); m];
        for (freq, coeff) in base.coefficients() {
            let slot = freq.rem_euclid(m as i128) as usize;
            tmp[slot].re += coeff;
        }
        ifft.process(&mut tmp);
        for (j, f) in integrand.factors.iter().enumerate().skip(idx) {
            if consumed[j] || f.base() != &base {
                continue;
            }
            consumed[j] = true;
            if f.conj_depth() % 2 == 1 {
                acc.par_iter_mut()
                    .zip(tmp.par_iter())
                    .for_each(|(a, t)| *a *= t.conj());
            } else {
                acc.par_iter_mut()
                    .zip(tmp.par_iter())
                    .for_each(|(a, t)| *a *= *t);
            }
        }
    }
    acc
}

/// (1/M)·Σ_m prod(m/M)·e(−n·m/M) over fixed 2¹⁶-point chunks combined in
/// chunk order — bit-reproducible for any thread count.
fn grid_bin(values: &[Complex64], n: i128) -> Complex64 {
    let m = values.len();
    let n_mod = n.rem_euclid(m as i128) as u128;
    const CHUNK: usize = 1 << 16;
    let partials: Vec<Complex64> = values
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let start = ci * CHUNK;
            pairwise_complex(chunk.iter().enumerate().map(|(off, v)| {
                let idx = (start + off) as u128;
                let r = (n_mod * idx) % m as u128;
                // phase r/M is an exact dyadic rational
                v * e_of(r as f64 / m as f64).conj()
            }))
        })
        .collect();
    let mut acc = Pairwise::new();
    for p in partials {
        acc.push(p);
    }
    acc.total(Complex64::new(0.0, 0.0)) / m as f64
}

/// The factor product sampled on a uniform M-point grid. Sample values are
/// exact for any M (frequencies only ever enter as e(k·m/M)); M sets the
/// resolution of grid-mean estimates of non-polynomial functionals
/// (|·|, |·|²) of the product, so callers wanting quadrature-grade means
/// should pass at least the Nyquist size from [`grid_size_for`].
pub fn grid_values(
    integrand: &Integrand,
    m: usize,
    budget: &QuadratureBudget,
) -> Result<Vec<Complex64>> {
    if m == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    if m > budget.max_grid_points {
        return Err(Error::BudgetExceeded {
            what: "uniform grid size".into(),
            needed: m as u128,
            budget: budget.max_grid_points as u128,
        });
    }
    Ok(synthesize_product(integrand, m))
}

/// Exact Fourier coefficient of the factor product at frequency n, via the
/// alias-free uniform grid.
pub fn fourier_coefficient(
    integrand: &Integrand,
    n: i128,
    budget: &QuadratureBudget,
) -> Result<IntegralResult> {
    let m = grid_size_for(integrand, n)?;
    if m == 0 {
        return Ok(IntegralResult {
            value: Complex64::new(0.0, 0.0),
            method: "grid".into(),
            grid_m: Some(0),
            error_estimate: 0.0,
            requested_rel_tol: budget.rel_tol,
            evals: 0,
        });
    }
    if m > budget.max_grid_points {
        return Err(Error::BudgetExceeded {
            what: "uniform grid size".into(),
            needed: m as u128,
            budget: budget.max_grid_points as u128,
        });
    }
    let values = synthesize_product(integrand, m);
    Ok(IntegralResult {
        value: grid_bin(&values, n),
        method: "grid".into(),
        grid_m: Some(m),
        error_estimate: 0.0,
        requested_rel_tol: budget.rel_tol,
        evals: 0,
    })
}

/// All Fourier coefficients of the factor product in one forward FFT.
pub struct CoefficientTable {
    pub m: usize,
    lo: i128,
    hi: i128,
    bins: Vec<Complex64>,
}

impl CoefficientTable {
    /// Coefficient at n; exact zero outside the support when alias-safe,
    /// error when n falls outside the alias-safe window.
    pub fn get(&self, n: i128) -> Result<Complex64> {
        if self.m == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let width = self.hi.max(n) - self.lo.min(n) + 1;
        if width > self.m as i128 {
            return Err(Error::InvalidInput(format!(
                "coefficient {n} outside the alias-safe window [{}, {}] of grid {}",
                self.lo, self.hi, self.m
            )));
        }
        if n < self.lo || n > self.hi {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.bins[n.rem_euclid(self.m as i128) as usize] / self.m as f64)
    }

    pub fn support(&self) -> (i128, i128) {
        (self.lo, self.hi)
    }
}

pub fn coefficient_table(
    integrand: &Integrand,
    budget: &QuadratureBudget,
) -> Result<CoefficientTable> {
    let Some((lo, hi)) = integrand.support_bounds() else {
        return Ok(CoefficientTable {
            m: 0,
            lo: 0,
            hi: 0,
            bins: Vec::new(),
        });
    };
    let m = grid_size_for(integrand, lo)?; // lo within [lo, hi]: plain spread
    if m > budget.max_grid_points {
        return Err(Error::BudgetExceeded {
            what: "uniform grid size".into(),
            needed: m as u128,
            budget: budget.max_grid_points as u128,
        });
    }
    let mut values = synthesize_product(integrand, m);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut values);
    Ok(CoefficientTable {
        m,
        lo,
        hi,
        bins: values,
    })
}

// ---------------------------------------------------------------------------
// adaptive Gauss–Legendre panels for arc-restricted integrals

/// Nodes and weights of 16-point Gauss–Legendre on [−1, 1], computed once
/// by Newton iteration on P₁₆.
fn gl16() -> &'static ([f64; 16], [f64; 16]) {
    static NODES: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    NODES.get_or_init(|| {
        const N: usize = 16;
        let mut xs = [0.0f64; 16];
        let mut ws = [0.0f64; 16];
        for i in 0..N {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                // Legendre recurrence up to P_N and derivative
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=N {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
            xs[N - 1 - i] = x;
            ws[N - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    })
}

fn gl16_panel<Ev>(f: &Ev, a: f64, b: f64) -> Result<Complex64>
where
    Ev: Fn(f64) -> Result<Complex64>,
{
    let (xs, ws) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Pairwise::new();
    for i in 0..16 {
        let v = f(mid + half * xs[i])?;
        acc.push(Complex64::new(ws[i] * v.re, ws[i] * v.im));
    }
    Ok(acc.total(Complex64::new(0.0, 0.0)) * half)
}

struct PanelState {
    evals: usize,
    max_evals: usize,
    error: f64,
}

fn adaptive_panel<Ev>(
    f: &Ev,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    st: &mut PanelState,
) -> Result<Complex64>
where
    Ev: Fn(f64) -> Result<Complex64>,
{
    st.evals += 48;
    if st.evals > st.max_evals {
        return Err(Error::BudgetExceeded {
            what: "panel evaluations".into(),
            needed: st.evals as u128,
            budget: st.max_evals as u128,
        });
    }
    let whole = gl16_panel(f, a, b)?;
    let mid = 0.5 * (a + b);
    let left = gl16_panel(f, a, mid)?;
    let right = gl16_panel(f, mid, b)?;
    let refined = left + right;
    let err = (whole - refined).norm();
    if err <= tol || depth >= 40 {
        st.error += err;
        return Ok(refined);
    }
    let l = adaptive_panel(f, a, mid, tol * 0.5, depth + 1, st)?;
    let r = adaptive_panel(f, mid, b, tol * 0.5, depth + 1, st)?;
    Ok(l + r)
}

/// ∫_B e(−nα)·Π factors dα by adaptive panels over the materialized
/// intervals of the arc set.
pub fn arc_quadrature(
    integrand: &Integrand,
    n: i128,
    set: &ArcSet,
    budget: &QuadratureBudget,
) -> Result<IntegralResult> {
    let nu_budget = budget.nu_terms;
    let eval = |alpha: f64| -> Result<Complex64> {
        let a = Alpha::from_f64(alpha.rem_euclid(1.0))?;
        // e(−nα) = conj(e(|n|α)) for n > 0, with exact phase reduction
        let twist = if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let v = unit(&a, n.unsigned_abs());
            if n > 0 {
                v.conj()
            } else {
                v
            }
        };
        Ok(integrand.eval(&a, nu_budget)? * twist)
    };
    let intervals = set.materialized_intervals();
    // coarse pass to set the absolute tolerance scale
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut total_len = 0.0f64;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for iv in &intervals {
        let a = ratio_to_f64(&iv.lo);
        let b = ratio_to_f64(&iv.hi);
        if b > a {
            coarse += gl16_panel(&eval, a, b)?;
            total_len += b - a;
            spans.push((a, b));
        }
    }
    let scale = coarse.norm().max(1e-12);
    let mut st = PanelState {
        evals: 48 * spans.len(),
        max_evals: budget.max_panel_evals,
        error: 0.0,
    };
    let mut value = Complex64::new(0.0, 0.0);
    for (a, b) in &spans {
        let share = budget.rel_tol * scale * ((b - a) / total_len.max(1e-300));
        value += adaptive_panel(&eval, *a, *b, share.max(1e-300), 0, &mut st)?;
    }
    Ok(IntegralResult {
        value,
        method: "panels".into(),
        grid_m: None,
        error_estimate: st.error,
        requested_rel_tol: budget.rel_tol,
        evals: st.evals,
    })
}

/// ∫ e(mα) dα over materialized intervals, in closed form with exact phase
/// reduction at the rational endpoints.
fn interval_transform(intervals: &[crate::arcs::Interval], m: i128) -> Complex64 {
    if m == 0 {
        let total: f64 = intervals.iter().map(|iv| ratio_to_f64(&iv.length())).sum();
        return Complex64::new(total, 0.0);
    }
    let mm = m.unsigned_abs();
    let mut acc = Pairwise::new();
    for iv in intervals {
        // e(m·b) − e(m·a), phases reduced exactly in rational arithmetic
        let pa = phase_of_ratio_times(&iv.lo, mm);
        let pb = phase_of_ratio_times(&iv.hi, mm);
        let mut term = e_of(pb) - e_of(pa);
        if m < 0 {
            term = term.conj();
        }
        acc.push(term);
    }
    let sum = acc.total(Complex64::new(0.0, 0.0));
    // ∫ e(mα) dα = [e(mb) − e(ma)] / (2πim)
    let denom = Complex64::new(0.0, std::f64::consts::TAU * m as f64);
    sum / denom
}

/// frac(r·m) for an exact rational r and integer m.
fn phase_of_ratio_times(r: &num::rational::BigRational, m: u128) -> f64 {
    use num::bigint::BigInt;
    let prod = r * num::rational::BigRational::from_integer(BigInt::from(m));
    let frac = &prod - prod.floor();
    frac.to_f64().unwrap_or(0.0).clamp(0.0, 1.0).rem_euclid(1.0)
}

/// ∫_B e(−nα)·Π factors dα via Σ_k c_k·∫_B e((k−n)α)dα — the exact-Fourier
/// route, independent of panel quadrature.
pub fn arc_fourier(
    integrand: &Integrand,
    n: i128,
    set: &ArcSet,
    budget: &QuadratureBudget,
) -> Result<IntegralResult> {
    let table = coefficient_table(integrand, budget)?;
    let intervals = set.materialized_intervals();
    let (lo, hi) = table.support();
    let mut acc = Pairwise::new();
    for k in lo..=hi {
        let c = table.get(k)?;
        if c.norm() == 0.0 {
            continue;
        }
        acc.push(c * interval_transform(&intervals, k - n));
    }
    Ok(IntegralResult {
        value: acc.total(Complex64::new(0.0, 0.0)),
        method: "fourier-arcs".into(),
        grid_m: Some(table.m),
        error_estimate: 0.0,
        requested_rel_tol: budget.rel_tol,
        evals: 0,
    })
}

/// Fully expanded sparse coefficients of a product of factors, by direct
/// convolution of the per-factor lists in ascending key order. Meant for
/// products whose expanded support stays small (a few thousand nonzero
/// frequencies); errs once an intermediate table outgrows `cap` entries.
pub fn sparse_product_coefficients(factors: &[Factor], cap: usize) -> Result<Vec<(i128, f64)>> {
    let mut acc: BTreeMap<i128, f64> = BTreeMap::new();
    acc.insert(0, 1.0);
    for f in factors {
        let coeffs = f.coefficients();
        let mut next: BTreeMap<i128, f64> = BTreeMap::new();
        for (&k, &v) in &acc {
            for &(dk, dv) in &coeffs {
                *next.entry(k + dk).or_insert(0.0) += v * dv;
            }
            if next.len() > cap {
                return Err(Error::BudgetExceeded {
                    what: "sparse product coefficients".into(),
                    needed: next.len() as u128,
                    budget: cap as u128,
                });
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().collect())
}

/// ∫_B e(−nα)·Π factors dα by expanding the product into its sparse
/// coefficient list and applying closed-form interval transforms. Exact up
/// to rounding, with no grid and no panels; complements `arc_fourier` when
/// the expanded support is tiny but the alias-free grid would be enormous.
pub fn arc_fourier_sparse(
    integrand: &Integrand,
    n: i128,
    set: &ArcSet,
    cap: usize,
) -> Result<IntegralResult> {
    let coeffs = sparse_product_coefficients(&integrand.factors, cap)?;
    let intervals = set.materialized_intervals();
    let mut acc = Pairwise::new();
    for &(k, c) in &coeffs {
        if c == 0.0 {
            continue;
        }
        acc.push(interval_transform(&intervals, k - n) * c);
    }
    Ok(IntegralResult {
        value: acc.total(Complex64::new(0.0, 0.0)),
        method: "fourier-sparse".into(),
        grid_m: None,
        error_estimate: 0.0,
        requested_rel_tol: 0.0,
        evals: coeffs.len(),
    })
}

// ---------------------------------------------------------------------------
// the named integrals

/// Which integral of the construction to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichIntegral {
    /// R(n) = ∫ e(−nα) f₁f₂f₃f₄ g dα
    R,
    /// U(n) = Y ∫ e(−nα) ν₁ν₂ν₃ν₄ dα
    U,
    /// S = ∫ |f₁f₂f₃f₄ g|² dα
    S,
    /// T = ∫ H₁ |f₂f₃f₄ g|² dα
    T,
    /// V = Y² ∫ |f₁ν₂ν₃ν₄|² dα
    V,
    /// W = Y² ∫ H₁ |ν₂ν₃ν₄|² dα
    W,
}

impl WhichIntegral {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "R" | "r" => WhichIntegral::R,
            "U" | "u" => WhichIntegral::U,
            "S" | "s" => WhichIntegral::S,
            "T" | "t" => WhichIntegral::T,
            "V" | "v" => WhichIntegral::V,
            "W" | "w" => WhichIntegral::W,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown integral {s}; expected one of R,U,S,T,V,W"
                )))
            }
        })
    }

    pub fn needs_n(&self) -> bool {
        matches!(self, WhichIntegral::R | WhichIntegral::U)
    }

    /// The factor list and the external scale (power of Y).
    pub fn integrand(&self, p: &Parameters) -> (Integrand, f64) {
        let conj = |f: &Factor| Factor::Conj(Box::new(f.clone()));
        let f1 = Factor::F { x: p.p[0] };
        let f2 = Factor::F { x: p.p[1] };
        let f3 = Factor::F { x: p.p[2] };
        let f4 = Factor::F { x: p.p[3] };
        let g = Factor::G { y: p.y };
        let nu = |j: usize| Factor::Nu { x: p.p[j - 1] };
        let h1 = Factor::H {
            x: p.p[0],
            z: p.h_bound(1),
        };
        match self {
            WhichIntegral::R => (
                Integrand::new(vec![f1, f2, f3, f4, g]),
                1.0,
            ),
            WhichIntegral::U => (
                Integrand::new(vec![nu(1), nu(2), nu(3), nu(4)]),
                p.y,
            ),
            WhichIntegral::S => {
                let base = vec![f1, f2, f3, f4, g];
                let mut v = base.clone();
                v.extend(base.iter().map(conj));
                (Integrand::new(v), 1.0)
            }
            WhichIntegral::T => {
                let rest = vec![f2, f3, f4, g];
                let mut v = vec![h1];
                v.extend(rest.iter().cloned());
                v.extend(rest.iter().map(conj));
                (Integrand::new(v), 1.0)
            }
            WhichIntegral::V => {
                let base = vec![f1, nu(2), nu(3), nu(4)];
                let mut v = base.clone();
                v.extend(base.iter().map(conj));
                (Integrand::new(v), p.y * p.y)
            }
            WhichIntegral::W => {
                let rest = vec![nu(2), nu(3), nu(4)];
                let mut v = vec![h1];
                v.extend(rest.iter().cloned());
                v.extend(rest.iter().map(conj));
                (Integrand::new(v), p.y * p.y)
            }
        }
    }
}

/// Evaluate a named integral over an arc set. Full-torus sets take the
/// exact grid route; everything else uses adaptive panels.
pub fn integral(
    which: WhichIntegral,
    p: &Parameters,
    set: &ArcSet,
    n: Option<i128>,
    budget: &QuadratureBudget,
) -> Result<IntegralResult> {
    let n = match (which.needs_n(), n) {
        (true, Some(n)) => n,
        (true, None) => {
            return Err(Error::InvalidInput(format!(
                "integral {which:?} requires n"
            )))
        }
        (false, _) => 0,
    };
    let (integrand, scale) = which.integrand(p);
    let mut out = if set.label == "full-torus" {
        fourier_coefficient(&integrand, n, budget)?
    } else {
        arc_quadrature(&integrand, n, set, budget)?
    };
    out.value *= scale;
    out.error_estimate *= scale.abs();
    Ok(out)
}

// ---------------------------------------------------------------------------
// arithmetic counterparts

/// U(n)'s weighted closed form: Y·Σ_{z₁+z₂+z₃+z₄=n} Π ¼zⱼ^{−3/4} over the
/// four smoothed ranges, by dense convolution.
pub fn u_closed_form(n: i128, p: &Parameters, term_budget: u64) -> Result<f64> {
    if n < 0 {
        return Ok(0.0);
    }
    let mut w: Vec<f64> = vec![1.0];
    for j in 1..=4 {
        let zr = p.z_range(j);
        if zr.upper > 9.0e15 {
            return Err(Error::BudgetExceeded {
                what: format!("z-range for P{j} beyond exact double range"),
                needed: zr.upper as u128,
                budget: 9_000_000_000_000_000,
            });
        }
        let hi = zr.upper.floor() as u64;
        let out_len = w.len() + hi as usize;
        if out_len as u64 > term_budget {
            return Err(Error::BudgetExceeded {
                what: "U convolution length".into(),
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
    let idx = n as usize;
    let raw = if idx < w.len() { w[idx] } else { 0.0 };
    Ok(p.y * raw / 256.0) // (1/4)^4
}

/// Histogram of the sums x_j⁴ + … + x₄⁴ + y over the level-j lattice, as a
/// dense count vector with its offset: hist[i] counts sums equal to
/// offset + i.
pub fn level_histogram(j: usize, p: &Parameters, budget: u64) -> Result<(Vec<u64>, u128)> {
    if !(1..=4).contains(&j) {
        return Err(Error::InvalidInput(format!("level must be 1..4, got {j}")));
    }
    // x-sum histogram by iterated sparse smear
    let mut base: BTreeMap<u128, u64> = BTreeMap::new();
    base.insert(0, 1);
    for lev in j..=4 {
        let xr = p.x_range(lev);
        if xr.count() == 0 {
            return Err(Error::Precondition(format!(
                "empty lattice range at level {lev}"
            )));
        }
        let mut next: BTreeMap<u128, u64> = BTreeMap::new();
        for (&s, &c) in &base {
            for x in xr.iter() {
                *next.entry(s + pow4(x)).or_insert(0) += c;
            }
        }
        base = next;
    }
    let ycount = p.y_count() as u128;
    let min_sum = *base.keys().next().expect("nonempty");
    let max_sum = *base.keys().last().expect("nonempty");
    let len = (max_sum - min_sum + ycount) as u64;
    if len > budget {
        return Err(Error::BudgetExceeded {
            what: "level histogram length".into(),
            needed: len as u128,
            budget: budget as u128,
        });
    }
    // smear each x-sum over y ∈ [0, ycount): R_j(n) = Σ_s cnt(s)·[s ≤ n < s+ycount]
    let mut hist = vec![0u64; len as usize];
    for (&s, &c) in &base {
        let start = (s - min_sum) as usize;
        for slot in hist.iter_mut().skip(start).take(ycount as usize) {
            *slot += c;
        }
    }
    Ok((hist, min_sum))
}

/// 𝒮⁽ʲ⁾: the number of solutions of
/// x_j⁴+…+x₄⁴+y = x_j′⁴+…+x₄′⁴+y′ over the level-j lattice — Σ_n R_j(n)².
pub fn s_count(j: usize, p: &Parameters, budget: u64) -> Result<u128> {
    let (hist, _) = level_histogram(j, p, budget)?;
    Ok(hist.iter().map(|&c| c as u128 * c as u128).sum())
}

/// Per-difference shift counts r′_j(d) = #{(h, x): 1 ≤ h ≤ Z_j,
/// P_j/2 < x ≤ P_j − h, (x+h)⁴ − x⁴ = d}.
pub fn r_prime_profile(j: usize, p: &Parameters) -> Result<BTreeMap<u128, u64>> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidInput(format!(
            "shift profile level must be 1..3, got {j}"
        )));
    }
    let pj = p.p[j - 1];
    let h_max = p.h_bound(j).floor() as u64;
    let lo = crate::params::x_range(pj).lower.floor() as u64;
    let mut out: BTreeMap<u128, u64> = BTreeMap::new();
    for h in 1..=h_max {
        let hi = (pj - h as f64).floor() as u64;
        if hi <= lo {
            continue;
        }
        for x in (lo + 1)..=hi {
            *out.entry(pow4(x + h) - pow4(x)).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// 𝒯⁽ʲ⁾ = Σ_{d ≥ 1} r′_j(d) · (autocorrelation of R_{j+1} at lag d): the
/// exact solution count of the differenced system.
pub fn t_count(j: usize, p: &Parameters, budget: u64) -> Result<u128> {
    let (hist, _) = level_histogram(j + 1, p, budget)?;
    let shifts = r_prime_profile(j, p)?;
    let mut total = 0u128;
    for (&d, &r) in &shifts {
        let d = d as usize;
        if d >= hist.len() {
            continue;
        }
        let mut corr = 0u128;
        for i in d..hist.len() {
            corr += hist[i] as u128 * hist[i - d] as u128;
        }
        total += r as u128 * corr;
    }
    Ok(total)
}

/// The diagonal product count: (x₄-lattice count) × (y-lattice count).
pub fn s4_diagonal(p: &Parameters) -> u128 {
    p.x_range(4).count() as u128 * p.y_count() as u128
}
