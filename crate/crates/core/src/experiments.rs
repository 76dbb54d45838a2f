//! Composite experiment drivers.
//!
//! Each driver reproduces, at desk scale, one verifiable statement of the
//! construction: direct counts R(n) against the expected main term ℛ(n),
//! the mean-square deviation trend, the diagonal-only phenomenon of the
//! innermost system, Bessel's inequality on the outer arc piece, the exact
//! induction chain, and the full bound suite for the generating sums.
//!
//! Every driver returns an [`ExperimentReport`] whose records are sorted
//! and whose pass/fail verdicts cite the envelope they were judged
//! against. The headline asymptotic statements carry unknowable implied
//! constants, so trend experiments judge ratio-boundedness along geometric
//! ladders and exact identities — never absolute thresholds against an
//! asymptotic bound.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num::rational::BigRational;
use num::BigInt;
use rayon::prelude::*;

use crate::arcs::{a_set, ArcSet, Interval};
use crate::arith::pow4;
use crate::error::{Error, Result};
use crate::integrate::{
    arc_fourier, arc_fourier_sparse, arc_quadrature, coefficient_table, fourier_coefficient,
    grid_size_for, grid_values, s4_diagonal, s_count, t_count, Factor, Integrand,
    QuadratureBudget, WhichIntegral,
};
use crate::params::{gamma0, schedule_exponents, Parameters};
use crate::phase::{pairwise_f64, Alpha};
use crate::rational::{ratio_string, ratio_to_f64};
use crate::report::{bval, fval, numeric_key, sval, uval, ExperimentReport};
use crate::weyl::{diff_sum_h, mollified_nu, nu_parseval, weyl_f, weyl_g};

// ---------------------------------------------------------------------------
// direct counting

/// Exact R(n): the number of solutions of x₁⁴+x₂⁴+x₃⁴+x₄⁴+y = n over the
/// lattice, by meet-in-the-middle (hash the multiset of x₁⁴+x₂⁴ values,
/// scan x₃, x₄, y).
pub fn direct_r(n: u128, p: &Parameters) -> Result<u64> {
    for j in 1..=4 {
        if p.x_range(j).count() == 0 {
            return Err(Error::Precondition(format!(
                "x-range {j} of the lattice is empty"
            )));
        }
    }
    let mut pairs: HashMap<u128, u64> = HashMap::new();
    for x1 in p.x_range(1).iter() {
        for x2 in p.x_range(2).iter() {
            *pairs.entry(pow4(x1) + pow4(x2)).or_insert(0) += 1;
        }
    }
    let ycount = p.y_count() as u128;
    let mut total = 0u64;
    for x3 in p.x_range(3).iter() {
        for x4 in p.x_range(4).iter() {
            let s = pow4(x3) + pow4(x4);
            for y in 0..ycount {
                let t = s + y;
                if t > n {
                    break;
                }
                if let Some(c) = pairs.get(&(n - t)) {
                    total += c;
                }
            }
        }
    }
    Ok(total)
}

/// R(n) for every n in [lo, hi] at once: the pair-sum table is built once,
/// then the two half-sums are convolved into the window. Empty lattice
/// ranges yield an all-zero window (the degenerate-parameter experiments
/// rely on this). Accumulation is by integer atomics, so scheduling cannot
/// affect the result.
pub fn direct_r_window(
    p: &Parameters,
    lo: u128,
    hi: u128,
    window_budget: u64,
) -> Result<Vec<u64>> {
    if hi < lo {
        return Err(Error::InvalidInput(format!("bad window [{lo}, {hi}]")));
    }
    let len = hi - lo + 1;
    if len > window_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "count window length".into(),
            needed: len,
            budget: window_budget as u128,
        });
    }
    let len = len as usize;
    if (1..=4).any(|j| p.x_range(j).count() == 0) {
        return Ok(vec![0; len]);
    }
    let mut front: HashMap<u128, u64> = HashMap::new();
    for x1 in p.x_range(1).iter() {
        for x2 in p.x_range(2).iter() {
            *front.entry(pow4(x1) + pow4(x2)).or_insert(0) += 1;
        }
    }
    let mut back: HashMap<u128, u64> = HashMap::new();
    let ycount = p.y_count() as u128;
    for x3 in p.x_range(3).iter() {
        for x4 in p.x_range(4).iter() {
            let s = pow4(x3) + pow4(x4);
            for y in 0..ycount {
                *back.entry(s + y).or_insert(0) += 1;
            }
        }
    }
    let mut front: Vec<(u128, u64)> = front.into_iter().collect();
    front.sort_unstable();
    let mut back: Vec<(u128, u64)> = back.into_iter().collect();
    back.sort_unstable();
    let out: Vec<AtomicU64> = (0..len).map(|_| AtomicU64::new(0)).collect();
    front.par_iter().for_each(|&(s, c)| {
        for &(t, d) in &back {
            let n = s + t;
            if n < lo {
                continue;
            }
            if n > hi {
                break;
            }
            out[(n - lo) as usize].fetch_add(c * d, Ordering::Relaxed);
        }
    });
    Ok(out.into_iter().map(AtomicU64::into_inner).collect())
}

/// The expected main term ℛ(n) = (1/32)·Y·P₂P₃P₄·n^{−3/4}.
pub fn expected_rr(n: u128, p: &Parameters) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("main term needs n > 0".into()));
    }
    Ok(p.y * p.p[1] * p.p[2] * p.p[3] * (n as f64).powf(-0.75) / 32.0)
}

/// Diagnostic form ℛ(n)·n^{γ₀}/Y: constant (= P₂P₃P₄·n^{γ₀−3/4}/32) once n
/// reaches the context size of a schedule-built tuple.
pub fn rr_diagnostic(n: u128, p: &Parameters) -> Result<f64> {
    let g0 = ratio_to_f64(&gamma0());
    Ok(expected_rr(n, p)? * (n as f64).powf(g0) / p.y)
}

/// The exponent identity behind ℛ(N) ≍ Y·N^{−γ₀}: with the schedule
/// P_j = N^{θ^{j−1}/4}, the exponent of P₂P₃P₄·N^{−3/4} is exactly −γ₀.
/// Verified in rational arithmetic.
pub fn exponent_identity_holds() -> bool {
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let three_quarters = BigRational::new(BigInt::from(3), BigInt::from(4));
    let e = schedule_exponents();
    let tail = (&e[1] + &e[2] + &e[3]) * &quarter;
    three_quarters - tail == gamma0()
}

// ---------------------------------------------------------------------------
// deterministic reductions

/// Σ f(i) over 0..n with fixed-size chunks reduced in chunk order —
/// bit-identical for every thread count.
fn chunked_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 1 << 14;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = ((ci + 1) * CHUNK).min(n);
            pairwise_f64((start..end).map(&f))
        })
        .collect();
    pairwise_f64(partials.into_iter())
}

// ---------------------------------------------------------------------------
// mean-square experiment

#[derive(Debug, Clone)]
pub struct MeanSquareConfig {
    /// Geometric ladder of context sizes N.
    pub ladder: Vec<u128>,
    /// Interval exponent: Y = N^γ.
    pub gamma: BigRational,
    /// Declared step envelope: each rung's normalized ratio may exceed the
    /// previous rung's by at most this factor.
    pub envelope: f64,
    /// Second normalization column uses N^{1−γ₀+ε}.
    pub epsilon: f64,
    /// Maximum count-window length.
    pub window_budget: u64,
    /// Fixed parameter tuple instead of the schedule (degenerate cases).
    pub params_override: Option<Parameters>,
}

impl Default for MeanSquareConfig {
    fn default() -> Self {
        MeanSquareConfig {
            ladder: vec![1 << 16, 1 << 20, 1 << 24],
            gamma: BigRational::new(BigInt::from(13), BigInt::from(50)),
            envelope: 4.0,
            epsilon: 0.05,
            window_budget: 1 << 27,
            params_override: None,
        }
    }
}

/// D(N) = Σ_{N/2<n≤N} |R(n) − ℛ(n)|², normalized by Y·N^{1−γ₀} (and the
/// ε-padded power), along the ladder. Pass = the normalized ratio sequence
/// is non-exploding (each step ≤ envelope × previous) and the exact total
/// count identity Σ_n R(n) = Π range counts holds on every rung.
pub fn mean_square_experiment(cfg: &MeanSquareConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("mean-square");
    report.set_config([
        ("gamma", ratio_string(&cfg.gamma)),
        ("envelope", cfg.envelope.to_string()),
        ("epsilon", cfg.epsilon.to_string()),
        ("window_budget", cfg.window_budget.to_string()),
        (
            "ladder",
            cfg.ladder
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
    ]);
    let g0 = ratio_to_f64(&gamma0());
    let ladder: Vec<u128> = match &cfg.params_override {
        Some(p) => vec![p.n],
        None => cfg.ladder.clone(),
    };
    let mut ratios: Vec<f64> = Vec::new();
    let mut identities_ok = true;
    for &n_ctx in &ladder {
        let p = match &cfg.params_override {
            Some(p) => p.clone(),
            None => Parameters::choose(n_ctx as f64, &cfg.gamma)?,
        };
        if report.parameters.is_empty() {
            report.set_parameters(p.flat_map());
        }
        // exact counts over (N/2, N]
        let lo = n_ctx / 2 + 1;
        let counts = direct_r_window(&p, lo, n_ctx, cfg.window_budget)?;
        let d = chunked_sum(counts.len(), |i| {
            let n = lo + i as u128;
            let rr = p.y * p.p[1] * p.p[2] * p.p[3] * (n as f64).powf(-0.75) / 32.0;
            let diff = counts[i] as f64 - rr;
            diff * diff
        });
        // total-count identity over the full support
        let (sum_r, expected_sum) = {
            let empty = (1..=4).any(|j| p.x_range(j).count() == 0);
            if empty {
                (0u128, 0u128)
            } else {
                let min_sum: u128 = (1..=4)
                    .map(|j| pow4(p.x_range(j).iter().next().expect("nonempty")))
                    .sum();
                let max_sum: u128 = (1..=4)
                    .map(|j| pow4(p.x_range(j).iter().last().expect("nonempty")))
                    .sum::<u128>()
                    + (p.y_count() as u128 - 1);
                let full = direct_r_window(&p, min_sum, max_sum, cfg.window_budget)?;
                let total: u128 = full.iter().map(|&c| c as u128).sum();
                let product: u128 = (1..=4)
                    .map(|j| p.x_range(j).count() as u128)
                    .product::<u128>()
                    * p.y_count() as u128;
                (total, product)
            }
        };
        let identity_ok = sum_r == expected_sum;
        identities_ok &= identity_ok;
        let denom0 = p.y * (n_ctx as f64).powf(1.0 - g0);
        let denom_eps = p.y * (n_ctx as f64).powf(1.0 - g0 + cfg.epsilon);
        let ratio0 = d / denom0;
        ratios.push(ratio0);
        report.push_record(
            numeric_key("N=", n_ctx),
            [
                ("n_ctx", uval(n_ctx)),
                ("y", fval(p.y)),
                ("d", fval(d)),
                ("ratio_eps0", fval(ratio0)),
                ("ratio_eps", fval(d / denom_eps)),
                ("sum_r", uval(sum_r)),
                ("expected_sum_r", uval(expected_sum)),
                ("count_identity", bval(identity_ok)),
            ],
        );
    }
    let mut steps_ok = true;
    let mut step_ratios = Vec::new();
    for w in ratios.windows(2) {
        let step = if w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY };
        steps_ok &= step <= cfg.envelope;
        step_ratios.push(step);
    }
    let finite = ratios.iter().all(|r| r.is_finite());
    report.sort_records();
    report.set_summary([
        ("pass", bval(steps_ok && identities_ok && finite)),
        ("envelope", fval(cfg.envelope)),
        (
            "envelope_rule",
            sval("ratio(N_{i+1}) <= envelope * ratio(N_i); ratios finite; count identity exact"),
        ),
        (
            "step_ratios",
            serde_json::Value::Array(step_ratios.iter().map(|&r| fval(r)).collect()),
        ),
        ("ratios_finite", bval(finite)),
        ("count_identities", bval(identities_ok)),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// diagonal-only experiment

/// Brute-forces x⁴ + y = x′⁴ + y′ over the innermost lattice and compares
/// with the diagonal count. Under the hypothesis Y ≤ P₄³/2 the two must be
/// equal; a violated hypothesis is flagged and the (possibly off-diagonal)
/// count is reported without judgment.
pub fn s4_diagonal_experiment(p4: f64, y: f64) -> Result<ExperimentReport> {
    let p = Parameters::new(p4, p4, p4, p4, y)?;
    let mut report = ExperimentReport::new("s4-diagonal");
    report.set_parameters(p.flat_map());
    report.set_config([("p4", p4.to_string()), ("y", y.to_string())]);
    let hypothesis_ok = y <= p4 * p4 * p4 / 2.0;
    // 4-loop brute force
    let xs: Vec<u64> = p.x_range(4).iter().collect();
    let ycount = p.y_count();
    let mut brute = 0u128;
    for &x in &xs {
        for &xp in &xs {
            for y1 in 0..ycount {
                for y2 in 0..ycount {
                    if pow4(x) + y1 as u128 == pow4(xp) + y2 as u128 {
                        brute += 1;
                    }
                }
            }
        }
    }
    let arithmetic = s_count(4, &p, 1 << 26)?;
    let diagonal = s4_diagonal(&p);
    let diagonal_only = brute == diagonal;
    report.push_record(
        "count".into(),
        [
            ("brute_force", uval(brute)),
            ("meet_in_the_middle", uval(arithmetic)),
            ("diagonal", uval(diagonal)),
            ("off_diagonal", uval(brute - diagonal.min(brute))),
            ("hypothesis_y_le_half_p4_cubed", bval(hypothesis_ok)),
            ("diagonal_only", bval(diagonal_only)),
        ],
    );
    let routes_agree = brute == arithmetic;
    let pass = routes_agree && (!hypothesis_ok || diagonal_only);
    report.set_summary([
        ("pass", bval(pass)),
        ("hypothesis_ok", bval(hypothesis_ok)),
        ("judged", bval(hypothesis_ok)),
        (
            "envelope_rule",
            sval("diagonal-only claimed iff Y <= P4^3/2; dual count routes must agree always"),
        ),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Bessel experiment

/// Σ_{N/2<n≤N} |R₁(n)|² ≤ S₁ on the outer piece 𝔄¹₁, with R₁ and S₁
/// computed by the exact coefficient route and S₁ cross-checked as S − S₀
/// against the integer solution count.
pub fn bessel_experiment(p: &Parameters, budget: &QuadratureBudget) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("bessel");
    report.set_parameters(p.flat_map());
    let outer = a_set(1, p, 1)?;
    let core = a_set(1, p, 0)?;
    let (r_integrand, _) = WhichIntegral::R.integrand(p);
    let n_ctx = p.n;
    let lo = n_ctx / 2 + 1;
    let mut lhs = 0.0f64;
    for n in lo..=n_ctx {
        let r1 = arc_fourier(&r_integrand, n as i128, &outer, budget)?.value;
        report.push_record(
            numeric_key("n=", n),
            [
                ("r1_re", fval(r1.re)),
                ("r1_im", fval(r1.im)),
                ("r1_sq", fval(r1.norm_sqr())),
            ],
        );
        lhs += r1.norm_sqr();
    }
    let (s_integrand, _) = WhichIntegral::S.integrand(p);
    let s1 = arc_fourier(&s_integrand, 0, &outer, budget)?.value.re;
    let s0 = arc_fourier(&s_integrand, 0, &core, budget)?.value.re;
    let s_exact = s_count(1, p, 1 << 26)? as f64;
    let split_ok = (s0 + s1 - s_exact).abs() <= 1e-6 * s_exact.max(1.0);
    // panel quadrature as the independent route on S₁
    let s1_panels = arc_quadrature(&s_integrand, 0, &outer, budget)?;
    let panel_ok = (s1_panels.value.re - s1).abs() <= 1e-6 * s1.abs().max(1.0);
    let tol = 1e-9 * s1.abs().max(1.0);
    let bessel_ok = lhs <= s1 + tol;
    report.sort_records();
    report.set_summary([
        ("pass", bval(bessel_ok && split_ok && panel_ok)),
        ("sum_r1_sq", fval(lhs)),
        ("s1", fval(s1)),
        ("s0", fval(s0)),
        ("s_exact", fval(s_exact)),
        ("split_identity", bval(split_ok)),
        ("panel_agreement", bval(panel_ok)),
        (
            "envelope_rule",
            sval("sum |R1|^2 <= S1 + 1e-9 rel; S0+S1 = S exact to 1e-6 rel; panels vs fourier 1e-6 rel"),
        ),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// induction chain experiment

/// The exact integer chain 𝒮⁽ʲ⁾ = 2𝒯⁽ʲ⁾ + count_j·𝒮⁽ʲ⁺¹⁾ for j = 1,2,3,
/// the diagonal lower bound at every level, and the diagonal-only value of
/// 𝒮⁽⁴⁾ under its hypothesis.
pub fn induction_chain_experiment(
    p: &Parameters,
    hist_budget: u64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("induction-chain");
    report.set_parameters(p.flat_map());
    let mut all_ok = true;
    let s_all: Vec<u128> = (1..=4)
        .map(|j| s_count(j, p, hist_budget))
        .collect::<Result<_>>()?;
    for j in 1..=3usize {
        let coverage = p.h_bound(j) >= p.x_range(j).count() as f64 - 1.0;
        let t_j = t_count(j, p, hist_budget)?;
        let count = p.x_range(j).count() as u128;
        let lhs = s_all[j - 1];
        let rhs = 2 * t_j + count * s_all[j];
        let identity = lhs == rhs;
        if coverage {
            all_ok &= identity;
        }
        let diag: u128 = (j..=4)
            .map(|l| p.x_range(l).count() as u128)
            .product::<u128>()
            * p.y_count() as u128;
        let lower = lhs >= diag;
        all_ok &= lower;
        report.push_record(
            format!("level={j}"),
            [
                ("s_j", uval(lhs)),
                ("t_j", uval(t_j)),
                ("x_count", uval(count)),
                ("s_next", uval(s_all[j])),
                ("two_t_plus_count_s_next", uval(rhs)),
                ("identity", bval(identity)),
                ("shift_coverage", bval(coverage)),
                ("diagonal", uval(diag)),
                ("diagonal_lower_bound", bval(lower)),
            ],
        );
    }
    let hypothesis = p.y <= p.p[3].powi(3) / 2.0;
    let diag4 = s4_diagonal(p);
    let diag_only = s_all[3] == diag4;
    if hypothesis {
        all_ok &= diag_only;
    }
    report.push_record(
        "level=4".into(),
        [
            ("s_j", uval(s_all[3])),
            ("diagonal", uval(diag4)),
            ("diagonal_only", bval(diag_only)),
            ("hypothesis_y_le_half_p4_cubed", bval(hypothesis)),
        ],
    );
    report.sort_records();
    report.set_summary([
        ("pass", bval(all_ok)),
        (
            "envelope_rule",
            sval("exact integer identities where shift coverage holds; diagonal bound everywhere"),
        ),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// lemma bound suite

#[derive(Debug, Clone)]
pub struct LemmaSuiteConfig {
    /// X-ladder for the generating-sum bounds.
    pub xs: Vec<f64>,
    /// α-grid density for cheap closed-form sums (g, f).
    pub alpha_grid: u64,
    /// α-grid density for the weighted sum ν (expensive per point).
    pub nu_grid: u64,
    /// Y-ladder for the g row (integers keep the trivial bound exact).
    pub y_ladder: Vec<f64>,
    pub quad: QuadratureBudget,
    /// Emit one record per sampled α (large CSVs) instead of per-item
    /// summaries only.
    pub per_alpha_records: bool,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        LemmaSuiteConfig {
            xs: vec![8.0, 16.0, 32.0, 64.0],
            alpha_grid: 10_000,
            nu_grid: 64,
            y_ladder: vec![4.0, 16.0, 64.0],
            quad: QuadratureBudget::default(),
            per_alpha_records: false,
        }
    }
}

/// Fixed envelopes of the bound suite, pinned from a measurement pass on
/// the default grids at first release (measured maxima in parentheses);
/// raising one is a reviewed change, never a silent one.
pub mod envelopes {
    /// |g(α,Y)| / min(Y, 1/(2‖α‖)) — the exact geometric bound.
    pub const G_RATIO: f64 = 1.0 + 1e-9;
    /// |f(α,X)| / X (0.5 exactly, at α = 0).
    pub const F_TRIVIAL: f64 = 0.5 + 1e-9;
    /// |ν(α,X)| / X (0.4999…; the margin absorbs the ~2X⁻⁴ discrete ripple
    /// above X/2 possible at other X).
    pub const NU_TRIVIAL: f64 = 0.502;
    /// |ν(α,X)|·‖α‖·X³ (0.43749…, converging to 7/16 from below).
    pub const NU_DECAY: f64 = 0.5;
    /// sup |f−ν| on the core box (1.0936 at X = 64, increments shrinking).
    pub const F_NU_CORE: f64 = 1.25;
    /// Growth factor allowed for the recorded sup under grid doubling
    /// (measured ≤ 1.0077).
    pub const F_NU_REFINE: f64 = 1.10;
    /// ∫|ν| / (X⁻³ ln X) (2.584 at X = 8, decreasing in X).
    pub const NU_L1: f64 = 3.0;
    /// ∫|ν|² / X⁻² (0.37499…, converging to 3/8 from below).
    pub const NU_L2: f64 = 0.5;
    /// ∫_A^{A+B}|f|² / (BX + X⁻² ln X) (0.49994; mean of |f|² is X/2).
    pub const F_WINDOW: f64 = 0.6;
    /// |∫_A^{A+B} H₁| / (X⁻² ln X) with the schedule shift bound (0.01253).
    pub const H_WINDOW: f64 = 0.1;
    /// |H(a/q,X,Z)| / (X·Z·(X⁻¹+q⁻¹+qX⁻³Z⁻¹)^{1/4}) with Z = X^{1/4}
    /// (0.6612 at X = 32, q = 16).
    pub const WEYL_H: f64 = 0.85;
}

/// Expanded-support cap for the exact window integrals of the suite; the
/// widest case (the shift sum at X = 64) stays below 2¹³ frequencies.
const SPARSE_CAP: usize = 1 << 20;

fn torus_norm_f64(alpha: f64) -> f64 {
    let frac = alpha.rem_euclid(1.0);
    frac.min(1.0 - frac)
}

struct RatioScan {
    max_ratio: f64,
    arg_max: f64,
    value_at_max: f64,
    bound_at_max: f64,
}

fn scan_max<F, B>(alphas: &[f64], value: F, bound: B) -> Result<RatioScan>
where
    F: Fn(f64) -> Result<f64>,
    B: Fn(f64) -> f64,
{
    let mut best = RatioScan {
        max_ratio: f64::NEG_INFINITY,
        arg_max: f64::NAN,
        value_at_max: f64::NAN,
        bound_at_max: f64::NAN,
    };
    for &a in alphas {
        let v = value(a)?;
        let b = bound(a);
        let r = v / b;
        if r > best.max_ratio {
            best = RatioScan {
                max_ratio: r,
                arg_max: a,
                value_at_max: v,
                bound_at_max: b,
            };
        }
    }
    Ok(best)
}

fn uniform_alphas(grid: u64) -> Vec<f64> {
    (1..grid).map(|k| k as f64 / grid as f64).collect()
}

/// A rational window [A, A+B] of the torus as a one-interval arc set.
fn window_set(a: (i64, i64), b: (i64, i64)) -> Result<ArcSet> {
    let lo = BigRational::new(BigInt::from(a.0), BigInt::from(a.1));
    let hi = &lo + BigRational::new(BigInt::from(b.0), BigInt::from(b.1));
    ArcSet::from_intervals(
        "window",
        vec![Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }],
    )
}

/// The full bound suite: for each estimate, the computed left side, the
/// bound shape on the right, their ratio, and the pinned envelope verdict.
/// Individual budget failures are recorded and the suite continues.
pub fn lemma_bound_suite(cfg: &LemmaSuiteConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("lemma-bounds");
    report.set_config([
        ("alpha_grid", cfg.alpha_grid.to_string()),
        ("nu_grid", cfg.nu_grid.to_string()),
        (
            "xs",
            cfg.xs
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        (
            "y_ladder",
            cfg.y_ladder
                .iter()
                .map(|y| y.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("per_alpha_records", cfg.per_alpha_records.to_string()),
    ]);
    let mut all_pass = true;
    let mut errors = 0u64;
    let alphas = uniform_alphas(cfg.alpha_grid);
    let nu_alphas = uniform_alphas(cfg.nu_grid);
    let nu_terms = cfg.quad.nu_terms;

    let mut per_alpha: Vec<(String, f64, f64, f64, f64)> = Vec::new();

    // --- g: |g(α,Y)| ≤ min(Y, 1/(2‖α‖)) exactly (integer Y) -------------
    for &y in &cfg.y_ladder {
        let value = |a: f64| -> Result<f64> {
            Ok(weyl_g(&Alpha::from_f64(a)?, y).norm())
        };
        let bound = |a: f64| y.min(1.0 / (2.0 * torus_norm_f64(a)));
        let scan = scan_max(&alphas, value, bound)?;
        if cfg.per_alpha_records {
            for &a in &alphas {
                let v = value(a)?;
                let b = bound(a);
                per_alpha.push((format!("g Y={y}"), a, v, b, v / b));
            }
        }
        let pass = scan.max_ratio <= envelopes::G_RATIO;
        all_pass &= pass;
        report.push_record(
            format!("item=g/Y={y:08.3}"),
            [
                ("item", sval("g-trivial")),
                ("y", fval(y)),
                ("max_ratio", fval(scan.max_ratio)),
                ("arg_max", fval(scan.arg_max)),
                ("value", fval(scan.value_at_max)),
                ("bound", fval(scan.bound_at_max)),
                ("envelope", fval(envelopes::G_RATIO)),
                ("pass", bval(pass)),
            ],
        );
        // α = 0 equality: g(0, Y) = ⌈Y⌉ terms exactly
        let g0 = weyl_g(&Alpha::from_ratio(0, 1)?, y).re;
        let eq = (g0 - y.ceil()).abs() < 1e-12;
        all_pass &= eq;
        report.push_record(
            format!("item=g0/Y={y:08.3}"),
            [
                ("item", sval("g-at-zero")),
                ("y", fval(y)),
                ("value", fval(g0)),
                ("bound", fval(y.ceil())),
                ("pass", bval(eq)),
            ],
        );
    }

    for &x in &cfg.xs {
        let key_x = format!("{x:08.1}");
        // --- fT: |f| ≤ X/2 + slack ------------------------------------
        let value = |a: f64| -> Result<f64> { Ok(weyl_f(&Alpha::from_f64(a)?, x).norm()) };
        let mut with_zero = vec![0.0];
        with_zero.extend_from_slice(&alphas);
        let scan = scan_max(&with_zero, value, |_| x)?;
        let pass = scan.max_ratio <= envelopes::F_TRIVIAL;
        all_pass &= pass;
        // α = 0 equality: f(0,X) = lattice count exactly
        let f0 = weyl_f(&Alpha::from_ratio(0, 1)?, x).re;
        let eq = (f0 - crate::params::x_range(x).count() as f64).abs() == 0.0;
        all_pass &= eq;
        report.push_record(
            format!("item=fT/X={key_x}"),
            [
                ("item", sval("f-trivial")),
                ("x", fval(x)),
                ("max_ratio", fval(scan.max_ratio)),
                ("arg_max", fval(scan.arg_max)),
                ("value", fval(scan.value_at_max)),
                ("bound", fval(x)),
                ("envelope", fval(envelopes::F_TRIVIAL)),
                ("alpha0_equality", bval(eq)),
                ("pass", bval(pass && eq)),
            ],
        );

        // --- nuT: |ν| ≤ envelope·X --------------------------------------
        let row = (|| -> Result<(RatioScan, bool)> {
            let value =
                |a: f64| -> Result<f64> { Ok(mollified_nu(&Alpha::from_f64(a)?, x, nu_terms)?.norm()) };
            let mut pts = vec![0.0];
            pts.extend_from_slice(&nu_alphas);
            let scan = scan_max(&pts, value, |_| x)?;
            let pass = scan.max_ratio <= envelopes::NU_TRIVIAL;
            Ok((scan, pass))
        })();
        match row {
            Ok((scan, pass)) => {
                all_pass &= pass;
                report.push_record(
                    format!("item=nuT/X={key_x}"),
                    [
                        ("item", sval("nu-trivial")),
                        ("x", fval(x)),
                        ("max_ratio", fval(scan.max_ratio)),
                        ("arg_max", fval(scan.arg_max)),
                        ("envelope", fval(envelopes::NU_TRIVIAL)),
                        ("pass", bval(pass)),
                    ],
                );
            }
            Err(e) => {
                errors += 1;
                report.push_record(
                    format!("item=nuT/X={key_x}"),
                    [
                        ("item", sval("nu-trivial")),
                        ("x", fval(x)),
                        ("error", sval(e.to_string())),
                        ("pass", bval(false)),
                    ],
                );
            }
        }

        // --- nu1: |ν|·‖α‖·X³ bounded ------------------------------------
        let row = (|| -> Result<(RatioScan, bool)> {
            let value =
                |a: f64| -> Result<f64> { Ok(mollified_nu(&Alpha::from_f64(a)?, x, nu_terms)?.norm()) };
            let bound = |a: f64| 1.0 / (torus_norm_f64(a) * x.powi(3));
            let scan = scan_max(&nu_alphas, value, bound)?;
            let pass = scan.max_ratio <= envelopes::NU_DECAY;
            Ok((scan, pass))
        })();
        match row {
            Ok((scan, pass)) => {
                all_pass &= pass;
                report.push_record(
                    format!("item=nu1/X={key_x}"),
                    [
                        ("item", sval("nu-decay")),
                        ("x", fval(x)),
                        ("max_ratio", fval(scan.max_ratio)),
                        ("arg_max", fval(scan.arg_max)),
                        ("envelope", fval(envelopes::NU_DECAY)),
                        ("pass", bval(pass)),
                    ],
                );
            }
            Err(e) => {
                errors += 1;
                report.push_record(
                    format!("item=nu1/X={key_x}"),
                    [
                        ("item", sval("nu-decay")),
                        ("x", fval(x)),
                        ("error", sval(e.to_string())),
                        ("pass", bval(false)),
                    ],
                );
            }
        }

        // --- f0: sup |f−ν| on the core box, stable under refinement -----
        let row = (|| -> Result<(f64, f64, bool)> {
            let radius = 0.125 * x.powi(-3);
            let sup_on = |g: u64| -> Result<f64> {
                let mut sup = 0.0f64;
                for k in 0..=g {
                    let a = radius * k as f64 / g as f64;
                    let alpha = Alpha::from_f64(a)?;
                    let d = (weyl_f(&alpha, x) - mollified_nu(&alpha, x, nu_terms)?).norm();
                    sup = sup.max(d);
                }
                Ok(sup)
            };
            let coarse = sup_on(cfg.nu_grid)?;
            let fine = sup_on(2 * cfg.nu_grid)?;
            let stable = fine <= coarse * envelopes::F_NU_REFINE + 1e-9;
            let bounded = fine <= envelopes::F_NU_CORE;
            Ok((coarse, fine, stable && bounded))
        })();
        match row {
            Ok((coarse, fine, pass)) => {
                all_pass &= pass;
                report.push_record(
                    format!("item=f0/X={key_x}"),
                    [
                        ("item", sval("f-nu-core")),
                        ("x", fval(x)),
                        ("sup_coarse", fval(coarse)),
                        ("sup_fine", fval(fine)),
                        ("refine_envelope", fval(envelopes::F_NU_REFINE)),
                        ("abs_envelope", fval(envelopes::F_NU_CORE)),
                        ("pass", bval(pass)),
                    ],
                );
            }
            Err(e) => {
                errors += 1;
                report.push_record(
                    format!("item=f0/X={key_x}"),
                    [
                        ("item", sval("f-nu-core")),
                        ("x", fval(x)),
                        ("error", sval(e.to_string())),
                        ("pass", bval(false)),
                    ],
                );
            }
        }

        // --- vi: ∫|ν| vs X⁻³ log X --------------------------------------
        let row = (|| -> Result<(f64, f64, bool)> {
            let integrand = Integrand::new(vec![Factor::Nu { x }]);
            let m = grid_size_for(&integrand, 0)?;
            let values = grid_values(&integrand, m, &cfg.quad)?;
            let mean = chunked_sum(values.len(), |i| values[i].norm()) / m as f64;
            let bound = x.powi(-3) * x.ln();
            let ratio = mean / bound;
            Ok((mean, ratio, ratio <= envelopes::NU_L1))
        })();
        match row {
            Ok((mean, ratio, pass)) => {
                all_pass &= pass;
                report.push_record(
                    format!("item=vi/X={key_x}"),
                    [
                        ("item", sval("nu-l1")),
                        ("x", fval(x)),
                        ("value", fval(mean)),
                        ("ratio", fval(ratio)),
                        ("envelope", fval(envelopes::NU_L1)),
                        ("pass", bval(pass)),
                    ],
                );
            }
            Err(e) => {
                errors += 1;
                report.push_record(
                    format!("item=vi/X={key_x}"),
                    [
                        ("item", sval("nu-l1")),
                        ("x", fval(x)),
                        ("error", sval(e.to_string())),
                        ("pass", bval(false)),
                    ],
                );
            }
        }

        // --- vii: ∫|ν|² = Parseval, ratio vs X⁻² -------------------------
        let row = (|| -> Result<(f64, f64, f64, bool)> {
            let integrand = Integrand::new(vec![
                Factor::Nu { x },
                Factor::Conj(Box::new(Factor::Nu { x })),
            ]);
            let grid = fourier_coefficient(&integrand, 0, &cfg.quad)?.value.re;
            let parseval = nu_parseval(x)?;
            let agree = (grid - parseval).abs() <= 1e-9 * parseval;
            let ratio = grid * x * x;
            Ok((grid, parseval, ratio, agree && ratio <= envelopes::NU_L2))
        })();
        match row {
            Ok((grid, parseval, ratio, pass)) => {
                all_pass &= pass;
                report.push_record(
                    format!("item=vii/X={key_x}"),
                    [
                        ("item", sval("nu-l2")),
                        ("x", fval(x)),
                        ("value", fval(grid)),
                        ("bound", fval(parseval)),
                        ("ratio", fval(ratio)),
                        ("envelope", fval(envelopes::NU_L2)),
                        ("pass", bval(pass)),
                    ],
                );
            }
            Err(e) => {
                errors += 1;
                report.push_record(
                    format!("item=vii/X={key_x}"),
                    [
                        ("item", sval("nu-l2")),
                        ("x", fval(x)),
                        ("error", sval(e.to_string())),
                        ("pass", bval(false)),
                    ],
                );
            }
        }

        // --- fi / Hi: window integrals ----------------------------------
        let windows: [((i64, i64), (i64, i64)); 4] = [
            ((0, 1), (1, 8)),
            ((1, 16), (1, 16)),
            ((1, 3), (1, 64)),
            ((7, 10), (1, 32)),
        ];
        for (wi, &(a, b)) in windows.iter().enumerate() {
            let set = window_set(a, b)?;
            let b_len = b.0 as f64 / b.1 as f64;
            // fi: ∫ |f|² over the window, exact via the expanded pair table
            let row = (|| -> Result<(f64, f64, bool)> {
                let integrand = Integrand::new(vec![
                    Factor::F { x },
                    Factor::Conj(Box::new(Factor::F { x })),
                ]);
                let v = arc_fourier_sparse(&integrand, 0, &set, SPARSE_CAP)?;
                let bound = b_len * x + x.powi(-2) * x.ln();
                let ratio = v.value.re / bound;
                Ok((v.value.re, ratio, ratio <= envelopes::F_WINDOW))
            })();
            match row {
                Ok((v, ratio, pass)) => {
                    all_pass &= pass;
                    report.push_record(
                        format!("item=fi/X={key_x}/w={wi}"),
                        [
                            ("item", sval("f-window")),
                            ("x", fval(x)),
                            ("window", sval(format!("[{}/{}, +{}/{}]", a.0, a.1, b.0, b.1))),
                            ("value", fval(v)),
                            ("ratio", fval(ratio)),
                            ("envelope", fval(envelopes::F_WINDOW)),
                            ("pass", bval(pass)),
                        ],
                    );
                }
                Err(e) => {
                    errors += 1;
                    report.push_record(
                        format!("item=fi/X={key_x}/w={wi}"),
                        [
                            ("item", sval("f-window")),
                            ("x", fval(x)),
                            ("error", sval(e.to_string())),
                            ("pass", bval(false)),
                        ],
                    );
                }
            }
            // Hi: |∫ H₁| over the window, exact via the expanded shift table
            let row = (|| -> Result<(f64, f64, bool)> {
                let p2 = x.powf(0.8125);
                let z = 32.0 * p2.powi(4) / x.powi(3);
                let integrand = Integrand::new(vec![Factor::H { x, z }]);
                let v = arc_fourier_sparse(&integrand, 0, &set, SPARSE_CAP)?;
                let bound = x.powi(-2) * x.ln();
                let ratio = v.value.norm() / bound;
                Ok((v.value.norm(), ratio, ratio <= envelopes::H_WINDOW))
            })();
            match row {
                Ok((v, ratio, pass)) => {
                    all_pass &= pass;
                    report.push_record(
                        format!("item=hi/X={key_x}/w={wi}"),
                        [
                            ("item", sval("h-window")),
                            ("x", fval(x)),
                            ("window", sval(format!("[{}/{}, +{}/{}]", a.0, a.1, b.0, b.1))),
                            ("value", fval(v)),
                            ("ratio", fval(ratio)),
                            ("envelope", fval(envelopes::H_WINDOW)),
                            ("pass", bval(pass)),
                        ],
                    );
                }
                Err(e) => {
                    errors += 1;
                    report.push_record(
                        format!("item=hi/X={key_x}/w={wi}"),
                        [
                            ("item", sval("h-window")),
                            ("x", fval(x)),
                            ("error", sval(e.to_string())),
                            ("pass", bval(false)),
                        ],
                    );
                }
            }
        }

        // --- Weyl-differencing shape over rational α --------------------
        if x >= 16.0 {
            let z = x.powf(0.25);
            let mut worst = RatioScan {
                max_ratio: f64::NEG_INFINITY,
                arg_max: f64::NAN,
                value_at_max: f64::NAN,
                bound_at_max: f64::NAN,
            };
            for q in 2i64..=24 {
                for aa in 1..q {
                    if num::integer::gcd(aa, q) != 1 {
                        continue;
                    }
                    let alpha = Alpha::from_ratio(aa, q)?;
                    let v = diff_sum_h(&alpha, x, z).norm();
                    let qf = q as f64;
                    let shape = (1.0 / x + 1.0 / qf + qf / (x.powi(3) * z)).powf(0.25);
                    let bound = x * z * shape;
                    let r = v / bound;
                    if r > worst.max_ratio {
                        worst = RatioScan {
                            max_ratio: r,
                            arg_max: aa as f64 / qf,
                            value_at_max: v,
                            bound_at_max: bound,
                        };
                    }
                    if cfg.per_alpha_records {
                        per_alpha.push((
                            format!("weyl-h X={x}"),
                            aa as f64 / qf,
                            v,
                            bound,
                            r,
                        ));
                    }
                }
            }
            let pass = worst.max_ratio <= envelopes::WEYL_H;
            all_pass &= pass;
            report.push_record(
                format!("item=weylH/X={key_x}"),
                [
                    ("item", sval("weyl-h")),
                    ("x", fval(x)),
                    ("z", fval(z)),
                    ("max_ratio", fval(worst.max_ratio)),
                    ("arg_max", fval(worst.arg_max)),
                    ("value", fval(worst.value_at_max)),
                    ("bound", fval(worst.bound_at_max)),
                    ("envelope", fval(envelopes::WEYL_H)),
                    ("pass", bval(pass)),
                ],
            );
        }
    }

    if cfg.per_alpha_records {
        for (i, (item, a, v, b, r)) in per_alpha.into_iter().enumerate() {
            report.push_record(
                format!("sample={i:08}"),
                [
                    ("item", sval(item)),
                    ("alpha", fval(a)),
                    ("value", fval(v)),
                    ("bound", fval(b)),
                    ("ratio", fval(r)),
                ],
            );
        }
    }
    report.sort_records();
    report.set_summary([
        ("pass", bval(all_pass && errors == 0)),
        ("errors", uval(errors as u128)),
        (
            "envelope_rule",
            sval("per-item pinned envelopes (see envelopes module); budget failures recorded"),
        ),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// orthogonality round-trip (grid vs direct count)

/// For one parameter tuple: every n in the support, fourier_coefficient vs
/// direct_R. Returns (checked n count, max |difference| before rounding);
/// errs if any rounded value disagrees.
pub fn orthogonality_roundtrip(p: &Parameters, budget: &QuadratureBudget) -> Result<(u64, f64)> {
    let (integrand, _) = WhichIntegral::R.integrand(p);
    let table = coefficient_table(&integrand, budget)?;
    let (lo, hi) = table.support();
    if lo < 0 {
        return Err(Error::InvalidInput("support must be positive".into()));
    }
    let counts = direct_r_window(p, lo as u128, hi as u128, 1 << 27)?;
    let mut checked = 0;
    let mut max_diff = 0.0f64;
    for n in lo..=hi {
        let c = table.get(n)?;
        let want = counts[(n - lo) as usize] as f64;
        let diff = (c.re - want).abs().max(c.im.abs());
        max_diff = max_diff.max(diff);
        if c.re.round() != want || diff >= 1e-6 {
            return Err(Error::InvalidInput(format!(
                "coefficient {n}: grid {} vs direct {want}",
                c.re
            )));
        }
        checked += 1;
    }
    Ok((checked, max_diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny4() -> Parameters {
        Parameters::new(4.0, 4.0, 4.0, 4.0, 2.0).unwrap()
    }

    #[test]
    fn direct_r_examples() {
        let p = tiny4();
        assert_eq!(direct_r(324, &p).unwrap(), 1);
        assert_eq!(direct_r(500, &p).unwrap(), 4);
        assert_eq!(direct_r(499, &p).unwrap(), 4);
        // below the support floor
        assert_eq!(direct_r(4 * 16, &p).unwrap(), 0);
    }

    #[test]
    fn window_matches_single_n() {
        let p = Parameters::new(6.0, 5.0, 4.0, 3.0, 3.0).unwrap();
        let w = direct_r_window(&p, 300, 3000, 1 << 20).unwrap();
        for (i, &c) in w.iter().enumerate() {
            let n = 300 + i as u128;
            assert_eq!(c, direct_r(n, &p).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn window_total_is_product_of_counts() {
        let p = Parameters::new(6.0, 5.0, 4.0, 3.0, 3.0).unwrap();
        let w = direct_r_window(&p, 0, 6000, 1 << 20).unwrap();
        let total: u128 = w.iter().map(|&c| c as u128).sum();
        let product: u128 = (1..=4)
            .map(|j| p.x_range(j).count() as u128)
            .product::<u128>()
            * p.y_count() as u128;
        assert_eq!(total, product);
    }

    #[test]
    fn empty_range_window_is_zero() {
        let p = Parameters::new(6.0, 5.0, 4.0, 0.9, 3.0).unwrap();
        assert_eq!(p.x_range(4).count(), 0);
        let w = direct_r_window(&p, 0, 100, 1 << 20).unwrap();
        assert!(w.iter().all(|&c| c == 0));
        assert!(direct_r(50, &p).is_err());
    }

    #[test]
    fn expected_rr_power_law() {
        let p = tiny4();
        let a = expected_rr(100, &p).unwrap();
        let b = expected_rr(1600, &p).unwrap();
        assert!((b / a - 0.125).abs() < 1e-12);
        assert!(a > 0.0);
        assert!(expected_rr(0, &p).is_err());
    }

    #[test]
    fn exponent_identity() {
        assert!(exponent_identity_holds());
    }

    #[test]
    fn rr_diagnostic_constant_at_context_size() {
        // schedule tuples: ℛ(N)·N^{γ₀}/Y = P₂P₃P₄·N^{γ₀−3/4}/32 ∈ (1/32, 1/8)
        let gamma = BigRational::new(BigInt::from(13), BigInt::from(50));
        for n_ctx in [1u128 << 16, 1 << 20, 1 << 24] {
            let p = Parameters::choose(n_ctx as f64, &gamma).unwrap();
            let d = rr_diagnostic(n_ctx, &p).unwrap();
            assert!(
                (0.03124..0.03126).contains(&d),
                "diagnostic at N = {n_ctx}: {d}"
            );
        }
    }

    #[test]
    fn mean_square_small_ladder() {
        let cfg = MeanSquareConfig {
            ladder: vec![1 << 12, 1 << 16],
            window_budget: 1 << 22,
            ..MeanSquareConfig::default()
        };
        let r = mean_square_experiment(&cfg).unwrap();
        assert_eq!(r.records.len(), 2);
        assert!(r.passed().unwrap(), "{}", r.to_json().unwrap());
        for rec in &r.records {
            assert_eq!(rec.fields["count_identity"], bval(true));
        }
    }

    #[test]
    fn mean_square_degenerate_is_sum_of_squared_main_terms() {
        let p = Parameters::new(6.0, 5.0, 4.0, 0.9, 3.0).unwrap();
        let cfg = MeanSquareConfig {
            params_override: Some(p.clone()),
            window_budget: 1 << 22,
            ..MeanSquareConfig::default()
        };
        let r = mean_square_experiment(&cfg).unwrap();
        let d = r.records[0].fields["d"].as_f64().unwrap();
        let lo = p.n / 2 + 1;
        let want: f64 = (lo..=p.n)
            .map(|n| expected_rr(n, &p).unwrap().powi(2))
            .sum();
        assert!((d - want).abs() <= 1e-12 * want, "{d} vs {want}");
    }

    #[test]
    fn s4_experiment_diagonal_and_violation() {
        let ok = s4_diagonal_experiment(4.0, 2.0).unwrap();
        assert!(ok.passed().unwrap());
        let rec = &ok.records[0];
        assert_eq!(rec.fields["brute_force"], uval(4));
        assert_eq!(rec.fields["diagonal"], uval(4));

        let big = s4_diagonal_experiment(8.0, 32.0).unwrap();
        assert!(big.passed().unwrap());

        // violated hypothesis: still runs, flags, does not judge diagonality
        // (P₄ = 3 has x ∈ {2,3}, so 3⁴−2⁴ = 65 < 100 forces off-diagonal hits)
        let bad = s4_diagonal_experiment(3.0, 100.0).unwrap();
        assert_eq!(bad.summary["hypothesis_ok"], bval(false));
        assert_eq!(bad.summary["judged"], bval(false));
        assert!(bad.passed().unwrap()); // routes agree; nothing claimed
        let off = &bad.records[0].fields["off_diagonal"];
        assert_eq!(*off, uval(70), "35 shifted pairs each way");
    }

    #[test]
    fn bessel_holds_on_tiny_parameters() {
        let p = tiny4();
        let r = bessel_experiment(&p, &QuadratureBudget::default()).unwrap();
        assert!(r.passed().unwrap(), "{}", r.to_json().unwrap());
        let lhs = r.summary["sum_r1_sq"].as_f64().unwrap();
        let s1 = r.summary["s1"].as_f64().unwrap();
        assert!(lhs <= s1 + 1e-9 * s1.max(1.0));
        assert!(s1 > 0.0);
    }

    #[test]
    fn induction_chain_report() {
        let p = Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0).unwrap();
        let r = induction_chain_experiment(&p, 1 << 26).unwrap();
        assert!(r.passed().unwrap(), "{}", r.to_json().unwrap());
        assert_eq!(r.records.len(), 4);
        for rec in &r.records[..3] {
            assert_eq!(rec.fields["identity"], bval(true));
            assert_eq!(rec.fields["shift_coverage"], bval(true));
        }
        assert_eq!(r.records[3].fields["diagonal_only"], bval(true));
    }

    #[test]
    fn orthogonality_roundtrip_tiny_sets() {
        let budget = QuadratureBudget::default();
        for (p1, p2, p3, p4, y) in [
            (4.0, 4.0, 4.0, 4.0, 2.0),
            (5.0, 4.0, 3.0, 2.0, 3.0),
            (6.0, 5.0, 4.0, 3.0, 4.0),
            (8.0, 6.0, 5.0, 4.0, 4.0),
        ] {
            let p = Parameters::new(p1, p2, p3, p4, y).unwrap();
            let (checked, max_diff) = orthogonality_roundtrip(&p, &budget).unwrap();
            assert!(checked > 10);
            assert!(max_diff < 1e-6, "max diff {max_diff}");
        }
    }

    #[test]
    fn lemma_suite_small_grid() {
        let cfg = LemmaSuiteConfig {
            xs: vec![8.0, 16.0],
            alpha_grid: 512,
            nu_grid: 16,
            y_ladder: vec![4.0, 16.0],
            ..LemmaSuiteConfig::default()
        };
        let r = lemma_bound_suite(&cfg).unwrap();
        assert!(r.passed().unwrap(), "{}", r.to_json().unwrap());
        assert_eq!(r.summary["errors"], uval(0));
        // every record carries a verdict and cites an envelope or equality
        for rec in &r.records {
            assert!(rec.fields.contains_key("pass"), "{}", rec.key);
        }
    }

    #[test]
    fn lemma_suite_records_budget_failure_and_continues() {
        let cfg = LemmaSuiteConfig {
            xs: vec![8.0],
            alpha_grid: 64,
            nu_grid: 8,
            y_ladder: vec![4.0],
            quad: QuadratureBudget {
                max_grid_points: 64,
                ..QuadratureBudget::default()
            },
            ..LemmaSuiteConfig::default()
        };
        let r = lemma_bound_suite(&cfg).unwrap();
        assert!(!r.passed().unwrap());
        assert_ne!(r.summary["errors"], uval(0));
        let errored: Vec<_> = r
            .records
            .iter()
            .filter(|rec| rec.fields.contains_key("error"))
            .collect();
        assert!(!errored.is_empty());
        // rows not needing the grid still succeeded
        assert!(r
            .records
            .iter()
            .any(|rec| rec.fields.get("pass") == Some(&bval(true))));
    }

    #[test]
    fn window_set_is_usable() {
        let s = window_set((1, 16), (1, 16)).unwrap();
        let iv = s.materialized_intervals();
        assert_eq!(iv.len(), 1);
        assert_eq!(ratio_to_f64(&iv[0].length()), 1.0 / 16.0);
    }
}
