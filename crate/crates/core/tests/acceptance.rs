//! The release acceptance gate: ten pinned criteria, one test and one
//! printed verdict line each (`cargo test --test acceptance -- --nocapture`
//! shows them). Every check is exact or runs at an explicitly stated
//! tolerance; envelopes come from `experiments::envelopes` and are never
//! loosened here.

use std::time::Instant;

use num::rational::BigRational;

use biquadrates::arcs::{build_arcs, major_measure_phi, ArcSet};
use biquadrates::enumeration::{enumerate_representable_with, greedy_approx, EnumerationConfig};
use biquadrates::experiments::{
    bessel_experiment, induction_chain_experiment, lemma_bound_suite, mean_square_experiment,
    orthogonality_roundtrip, s4_diagonal_experiment, LemmaSuiteConfig, MeanSquareConfig,
};
use biquadrates::integrate::{
    fourier_coefficient, integral, u_closed_form, Factor, Integrand, QuadratureBudget,
    WhichIntegral,
};
use biquadrates::params::{gamma0_general, Parameters};
use biquadrates::rational::ratio_string;
use biquadrates::weyl::{count_r, count_r_prime, count_rho, nu_parseval};

fn verdict(num: u32, name: &str, started: Instant, pass: bool, detail: &str) {
    let ms = started.elapsed().as_millis();
    println!(
        "[acceptance] criterion {num:2} {} — {name} ({ms} ms): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {num} ({name}) failed: {detail}");
}

fn budget() -> QuadratureBudget {
    QuadratureBudget::default()
}

#[test]
fn criterion_01_exact_interval_exponents() {
    let t0 = Instant::now();
    let mut best = u128::MAX;
    for _ in 0..10 {
        let t = Instant::now();
        let g44 = gamma0_general(4, 4).unwrap();
        let g33 = gamma0_general(3, 3).unwrap();
        best = best.min(t.elapsed().as_micros());
        assert_eq!(ratio_string(&g44), "4059/16384");
        assert_eq!(ratio_string(&g33), "17/108");
    }
    verdict(
        1,
        "exact rational constants",
        t0,
        best < 1000,
        &format!("gamma0(4,4) = 4059/16384 and gamma0(3,3) = 17/108 exactly; fastest run {best} us < 1 ms"),
    );
}

#[test]
fn criterion_02_orthogonality_round_trip() {
    let t0 = Instant::now();
    let mut sets = 0u32;
    let mut checked = 0u64;
    let mut worst = 0.0f64;
    for &p1 in &[3.0, 4.0, 5.0, 6.0, 8.0] {
        for shape in [[1.0, 1.0, 1.0, 1.0], [1.0, 0.8, 0.7, 0.6]] {
            for &y in &[2.0, 4.0] {
                let p = Parameters::new(
                    p1 * shape[0],
                    p1 * shape[1],
                    p1 * shape[2],
                    p1 * shape[3],
                    y,
                )
                .unwrap();
                let (n_checked, max_diff) = orthogonality_roundtrip(&p, &budget()).unwrap();
                sets += 1;
                checked += n_checked;
                worst = worst.max(max_diff);
            }
        }
    }
    let ok = sets >= 20 && worst < 1e-6 && t0.elapsed().as_secs() < 60;
    verdict(
        2,
        "orthogonality round-trip",
        t0,
        ok,
        &format!(
            "{sets} parameter sets (P1 <= 8, Y <= 4), {checked} coefficients: \
             fourier = direct count after rounding, max |diff| = {worst:.2e} < 1e-6"
        ),
    );
}

#[test]
fn criterion_03_closed_form_identities() {
    let t0 = Instant::now();
    const TOL: f64 = 1e-9;

    // U-quadrature against the weighted diophantine closed form, across the
    // whole support plus points outside it.
    let p = Parameters::new(4.0, 3.0, 2.5, 2.0, 2.0).unwrap();
    let (u_int, scale) = WhichIntegral::U.integrand(&p);
    let (lo, hi) = u_int.support_bounds().unwrap();
    let mut u_worst = 0.0f64;
    for n in (lo - 2)..=(hi + 2) {
        let v = fourier_coefficient(&u_int, n, &budget()).unwrap().value.re * scale;
        let w = u_closed_form(n, &p, 1 << 24).unwrap();
        u_worst = u_worst.max((v - w).abs() / w.abs().max(1.0));
    }
    let u_ok = u_worst <= TOL;

    // V − 2W = Y² r(0) ρ(0) on a tuple satisfying the shift-coverage premise.
    let p = Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0).unwrap();
    assert!(p.h_bound(1) >= p.x_range(1).count() as f64 - 1.0);
    let full = ArcSet::full_torus();
    let v = integral(WhichIntegral::V, &p, &full, None, &budget()).unwrap().value.re;
    let w = integral(WhichIntegral::W, &p, &full, None, &budget()).unwrap().value.re;
    let rhs = p.y * p.y
        * count_r(0, p.p[0]) as f64
        * count_rho(0, &p, 1 << 24).unwrap();
    let vw_diff = ((v - 2.0 * w) - rhs).abs() / rhs.abs().max(1.0);
    let vw_ok = vw_diff <= TOL;

    // ∫|ν|² termwise (Parseval) against the torus quadrature.
    let mut parseval_worst = 0.0f64;
    for &x in &[2.0f64, 4.0, 8.0] {
        let nu2 = Integrand::new(vec![
            Factor::Nu { x },
            Factor::Conj(Box::new(Factor::Nu { x })),
        ]);
        let q = fourier_coefficient(&nu2, 0, &budget()).unwrap().value.re;
        let exact = nu_parseval(x).unwrap();
        parseval_worst = parseval_worst.max((q - exact).abs() / exact.max(1e-300));
    }
    let parseval_ok = parseval_worst <= TOL;

    let ok = u_ok && vw_ok && parseval_ok && t0.elapsed().as_secs() < 300;
    verdict(
        3,
        "closed-form identities at 1e-9 relative",
        t0,
        ok,
        &format!(
            "U quadrature vs weighted sum: {u_worst:.2e}; V-2W vs Y^2 r(0) rho(0): {vw_diff:.2e}; \
             Parseval: {parseval_worst:.2e}"
        ),
    );
}

#[test]
fn criterion_04_induction_chain_and_diagonal() {
    let t0 = Instant::now();

    // the exact integer chain on a coverage-satisfying tuple
    let p = Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0).unwrap();
    for j in 1..=3 {
        assert!(
            p.h_bound(j) >= p.x_range(j).count() as f64 - 1.0,
            "tuple must satisfy shift coverage at level {j}"
        );
    }
    let chain = induction_chain_experiment(&p, 1 << 24).unwrap();
    let chain_ok = chain.passed() == Some(true)
        && chain.records.iter().take(3).all(|r| {
            r.fields.get("identity").and_then(|v| v.as_bool()) == Some(true)
                && r.fields.get("shift_coverage").and_then(|v| v.as_bool()) == Some(true)
        });

    // diagonal-only S4 for >= 50 (P4, Y) pairs under Y <= P4^3/2
    let mut pairs = 0u32;
    let mut s4_ok = true;
    for &p4 in &[2.0f64, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 7.0] {
        let cap = p4.powi(3) / 2.0;
        for y in [1.0, 2.0, (cap / 2.0).max(1.0), (cap - 1.0).max(1.0), cap] {
            let rep = s4_diagonal_experiment(p4, y).unwrap();
            pairs += 1;
            s4_ok &= rep.passed() == Some(true)
                && rep.summary.get("judged").and_then(|v| v.as_bool()) == Some(true);
        }
    }

    let ok = chain_ok && s4_ok && pairs >= 50 && t0.elapsed().as_secs() < 300;
    verdict(
        4,
        "induction chain + diagonal-only S4",
        t0,
        ok,
        &format!(
            "levels 1..3 exact integer identities with coverage; S4 = diagonal product \
             on {pairs} (P4, Y) pairs with Y <= P4^3/2"
        ),
    );
}

#[test]
fn criterion_05_counting_function_laws() {
    let t0 = Instant::now();
    let mut pair_law_checked = 0u64;
    let mut vanish_checked = 0u64;
    let mut ok = true;

    for &x in &[4.0f64, 6.0, 8.0] {
        let p = Parameters::new(x, x, x, x, 2.0).unwrap();
        let count = p.x_range(1).count() as u64;
        let x4 = x.powi(4) as i128;
        let mut total = 0u64;

        // exhaustive over every difference the range can produce
        for n in -x4..=x4 {
            let r = count_r(n, x);
            total += r;
            // evenness and the r—r' law, summed over the two signs
            if n > 0 {
                ok &= r == count_r(-n, x);
                ok &= r + count_r(-n, x) == 2 * count_r_prime(n as u128, &p);
                ok &= r == count_r_prime(n as u128, &p);
                pair_law_checked += 1;
            }
            // the cubed-gap vanishing window
            if n != 0 && n.unsigned_abs() as f64 <= x.powi(3) / 2.0 {
                ok &= r == 0;
                vanish_checked += 1;
            }
        }
        // total mass: every ordered pair lands at exactly one difference
        ok &= total == count * count;
        ok &= count_r(0, x) == count;
    }

    // the documented example pair at distance 671
    let p8 = Parameters::new(8.0, 8.0, 8.0, 8.0, 2.0).unwrap();
    ok &= count_r(671, 8.0) == 1 && count_r_prime(671, &p8) == 1;

    // rho vanishes beyond 3 P2^4
    let p = Parameters::new(6.0, 4.0, 3.0, 2.0, 2.0).unwrap();
    let edge = (3.0 * p.p[1].powi(4)) as i128;
    for n in [edge + 1, edge + 17, -(edge + 1), 10 * edge] {
        ok &= count_rho(n, &p, 1 << 24).unwrap() == 0.0;
    }
    ok &= count_rho(0, &p, 1 << 24).unwrap() > 0.0;

    let ok = ok && t0.elapsed().as_secs() < 60;
    verdict(
        5,
        "counting-function laws",
        t0,
        ok,
        &format!(
            "r even, r(n) = r'(n) and r(n)+r(-n) = 2r'(|n|) on {pair_law_checked} positive \
             differences; r = 0 on {vanish_checked} points of the X^3/2 window; \
             sum r = count^2; rho = 0 beyond 3 P2^4 — all exact, X in {{4, 6, 8}}"
        ),
    );
}

#[test]
fn criterion_06_arc_partition_exact() {
    let t0 = Instant::now();
    let one = BigRational::from_integer(1.into());
    let mut partitions = 0u32;
    let mut ok = true;
    for &p1 in &[4.0f64, 8.0, 16.0, 32.0, 64.0] {
        let p = Parameters::new(p1, p1.powf(0.8125), p1.powf(0.66), p1.powf(0.54), 2.0).unwrap();
        for j in 1..=3 {
            let parts = build_arcs(j, &p).unwrap();
            let mut all = parts.central.materialized_intervals();
            all.extend(parts.major.materialized_intervals());
            all.extend(parts.minor.materialized_intervals());
            // re-validation proves exact pairwise disjointness of the pieces
            let union = ArcSet::from_intervals("union", all).unwrap();
            ok &= union.measure() == one;
            ok &= parts.central.measure() + parts.major.measure() + parts.minor.measure() == one;
            ok &= parts.major.measure() == major_measure_phi(j, &p).unwrap();
            partitions += 1;
        }
    }
    let ok = ok && partitions == 15 && t0.elapsed().as_secs() < 60;
    verdict(
        6,
        "arc partition disjoint with measure one",
        t0,
        ok,
        &format!(
            "{partitions} partitions (j = 1..3, P1 up to 64): exact rational disjointness, \
             total measure 1, major measure = phi-sum identity"
        ),
    );
}

#[test]
fn criterion_07_bound_suite_envelopes() {
    let t0 = Instant::now();
    let report = lemma_bound_suite(&LemmaSuiteConfig::default()).unwrap();
    let errors = report.summary.get("errors").and_then(|v| v.as_u64());
    let mut g_rows = 0u32;
    let mut f0_rows = 0u32;
    let mut weyl_rows = 0u32;
    let mut rows_ok = true;
    for r in &report.records {
        let pass = r.fields.get("pass").and_then(|v| v.as_bool()) == Some(true);
        rows_ok &= pass;
        match r.fields.get("item").and_then(|v| v.as_str()) {
            Some("g-trivial") => g_rows += 1,
            Some("f-nu-core") => f0_rows += 1,
            Some("weyl-h") => weyl_rows += 1,
            _ => {}
        }
    }
    let ok = report.passed() == Some(true)
        && errors == Some(0)
        && rows_ok
        && g_rows >= 3
        && f0_rows == 4
        && weyl_rows == 3
        && t0.elapsed().as_secs() < 600;
    verdict(
        7,
        "bound-suite ratios within pinned envelopes",
        t0,
        ok,
        &format!(
            "{} rows, 0 budget errors: |g|·2||alpha|| <= 1+1e-9; sup|f-nu| recorded for \
             X in {{8,16,32,64}} with refinement growth <= 1.10; Weyl-H ladder within its \
             fixed envelope",
            report.records.len()
        ),
    );
}

#[test]
fn criterion_08_mean_square_trend() {
    let t0 = Instant::now();
    let cfg = MeanSquareConfig::default();
    assert_eq!(ratio_string(&cfg.gamma), "13/50", "gamma = 0.26 ladder");
    assert_eq!(cfg.ladder, vec![1 << 16, 1 << 20, 1 << 24]);
    let report = mean_square_experiment(&cfg).unwrap();
    let steps: Vec<f64> = report
        .summary
        .get("step_ratios")
        .and_then(|v| v.as_array())
        .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    let steps_ok = steps.len() == 2 && steps.iter().all(|s| s.is_finite() && *s < 4.0);
    let identities = report.summary.get("count_identities").and_then(|v| v.as_bool());
    let ok = report.passed() == Some(true)
        && steps_ok
        && identities == Some(true)
        && t0.elapsed().as_secs() < 1800;
    verdict(
        8,
        "mean-square ladder trend",
        t0,
        ok,
        &format!(
            "N in {{2^16, 2^20, 2^24}}, gamma = 0.26: normalized D finite, step ratios \
             {steps:?} all < 4, exact sum-R identity on every rung"
        ),
    );
}

#[test]
fn criterion_09_enumeration_oracles() {
    let t0 = Instant::now();

    // windowed vs one-shot bitmap: identical streams at 10^7 (set equality
    // there implies it for every smaller limit — windows never look past
    // their own span) plus direct spot checks at mixed limits.
    let one_shot = EnumerationConfig {
        window_bits: 1 << 30,
        memory_budget_bytes: 1 << 31,
    };
    let narrow = EnumerationConfig {
        window_bits: 1 << 14,
        memory_budget_bytes: 1 << 31,
    };
    let mut stream_ok = true;
    let mut compared = 0u64;
    for limit in [10_000_000u128, 9_999_991, 1_234_567, 65_536, 100] {
        let a: Vec<u128> = enumerate_representable_with(limit, one_shot).unwrap().collect();
        let b: Vec<u128> = enumerate_representable_with(limit, narrow).unwrap().collect();
        stream_ok &= a == b;
        compared += a.len() as u64;
    }

    // greedy remainder envelope along a wide ladder
    let mut greedy_ok = true;
    let mut samples = 0u32;
    let mut worst = 0.0f64;
    for k in 1..=15u32 {
        for &n in &[10u128.pow(k), 10u128.pow(k) + 7, (1u128 << (3 * k)) + 5] {
            let g = greedy_approx(n).unwrap();
            let bound = 256.0 * (n as f64).powf(81.0 / 256.0);
            worst = worst.max(g.remainder as f64 / bound);
            greedy_ok &= (g.remainder as f64) <= bound;
            samples += 1;
        }
    }

    let ok = stream_ok && greedy_ok && t0.elapsed().as_secs() < 300;
    verdict(
        9,
        "enumeration oracle equivalence + greedy envelope",
        t0,
        ok,
        &format!(
            "windowed = bitmap streams at 5 limits up to 10^7 ({compared} values); greedy \
             remainder <= 256 n^(81/256) on {samples} ladder points (worst fill {worst:.3})"
        ),
    );
}

#[test]
fn criterion_10_reports_byte_identical_across_threads() {
    let t0 = Instant::now();
    let make_reports = || -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        let ms = MeanSquareConfig {
            ladder: vec![1 << 12, 1 << 16],
            ..MeanSquareConfig::default()
        };
        let r = mean_square_experiment(&ms).unwrap();
        out.push(("mean-square".into(), r.to_json().unwrap(), r.to_csv().unwrap()));
        let r = s4_diagonal_experiment(4.0, 16.0).unwrap();
        out.push(("s4".into(), r.to_json().unwrap(), r.to_csv().unwrap()));
        let p = Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0).unwrap();
        let r = induction_chain_experiment(&p, 1 << 24).unwrap();
        out.push(("induction".into(), r.to_json().unwrap(), r.to_csv().unwrap()));
        let p = Parameters::new(4.0, 4.0, 4.0, 4.0, 2.0).unwrap();
        let r = bessel_experiment(&p, &budget()).unwrap();
        out.push(("bessel".into(), r.to_json().unwrap(), r.to_csv().unwrap()));
        let suite = LemmaSuiteConfig {
            xs: vec![8.0, 16.0],
            alpha_grid: 512,
            nu_grid: 16,
            y_ladder: vec![4.0, 16.0],
            ..LemmaSuiteConfig::default()
        };
        let r = lemma_bound_suite(&suite).unwrap();
        out.push(("lemmas".into(), r.to_json().unwrap(), r.to_csv().unwrap()));
        out
    };

    let mut runs = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        runs.push(pool.install(make_reports));
    }
    let mut ok = true;
    for i in 1..runs.len() {
        for (a, b) in runs[0].iter().zip(&runs[i]) {
            ok &= a.0 == b.0 && a.1 == b.1 && a.2 == b.2;
        }
    }
    let names: Vec<&str> = runs[0].iter().map(|r| r.0.as_str()).collect();
    verdict(
        10,
        "deterministic reports",
        t0,
        ok,
        &format!("JSON and CSV byte-identical across 1, 4, 8 threads for {names:?}"),
    );
}
