//! biq — command-line laboratory for sums of four fourth powers.
//!
//! Every invocation produces exactly one JSON report object on standard
//! output (or at `--out`); `--csv` additionally writes the per-record rows
//! as a CSV table. Reports embed the tool version and the effective
//! post-default configuration, and serialize deterministically: the same
//! subcommand with the same flags is byte-identical across runs and across
//! `--threads` settings. Execution-environment knobs (thread count, output
//! paths) therefore stay out of the report body, and `--timing` — which
//! stamps a wall-clock field — is off by default.
//!
//! Exit codes: 0 success; 1 precondition, budget, or numeric failures, with
//! a machine-readable `{"error": {...}}` object on standard error; 2 usage
//! errors. Rational quantities (α, exponents) accept exact `a/b` strings;
//! decimal input is accepted but flagged `inexact` in the report config.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num::rational::BigRational;

use biquadrates::arcs::{a_set, build_arcs, central_set, major_measure_phi, ArcSet};
use biquadrates::enumeration::{
    count_empty_intervals, count_empty_intervals_gamma, enumerate_representable_with,
    gap_statistics_with, greedy_approx, EnumerationConfig,
};
use biquadrates::error::{Error, Result};
use biquadrates::experiments::{
    bessel_experiment, induction_chain_experiment, lemma_bound_suite, mean_square_experiment,
    s4_diagonal_experiment, LemmaSuiteConfig, MeanSquareConfig,
};
use biquadrates::integrate::{integral, QuadratureBudget, WhichIntegral};
use biquadrates::params::{gamma0_general, gamma_in_window, Parameters};
use biquadrates::phase::Alpha;
use biquadrates::rational::{parse_ratio, ratio_string, ratio_to_f64};
use biquadrates::report::{bval, fval, numeric_key, sval, uval, ExperimentReport};
use biquadrates::weyl::{
    count_r, count_r_prime, count_rho, diff_sum_h, mollified_nu, weyl_f, weyl_g,
};

#[derive(Parser)]
#[command(
    name = "biq",
    version,
    about = "Computational laboratory for sums of four fourth powers",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel sections (default: one per core).
    /// Results are bit-identical for every setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Stamp the wall-clock duration into the report (off by default so
    /// identical runs stay byte-identical).
    #[arg(long, global = true)]
    timing: bool,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write the report records as CSV rows to this path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

/// Parameter tuple selection shared by the subcommands that need one:
/// either the canonical schedule (context size + exponent) or an explicit
/// five-tuple.
#[derive(Args, Clone, Debug)]
struct ParamArgs {
    /// Context size N; selects the schedule P_j = N^{(13/16)^{j-1}/4},
    /// Y = N^gamma.
    #[arg(long)]
    ctx: Option<f64>,

    /// Interval exponent gamma as "a/b" (decimals accepted, flagged
    /// inexact). Default 13/50 when --ctx is given.
    #[arg(long)]
    gamma: Option<String>,

    /// Explicit range sizes; all four plus --y must be given together.
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    p3: Option<f64>,
    #[arg(long)]
    p4: Option<f64>,

    /// Interval length Y (with explicit --p1..--p4).
    #[arg(long)]
    y: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<(Parameters, Vec<(&'static str, String)>)> {
        let explicit = [self.p1, self.p2, self.p3, self.p4, self.y];
        if explicit.iter().all(Option::is_some) {
            if self.ctx.is_some() || self.gamma.is_some() {
                return Err(Error::InvalidInput(
                    "give either --ctx (with --gamma) or the explicit tuple, not both".into(),
                ));
            }
            let p = Parameters::new(
                self.p1.unwrap(),
                self.p2.unwrap(),
                self.p3.unwrap(),
                self.p4.unwrap(),
                self.y.unwrap(),
            )?;
            return Ok((p, vec![("parameter_source", "explicit".into())]));
        }
        if explicit.iter().any(Option::is_some) {
            return Err(Error::InvalidInput(
                "explicit parameters need all of --p1 --p2 --p3 --p4 --y".into(),
            ));
        }
        let ctx = self.ctx.ok_or_else(|| {
            Error::InvalidInput(
                "parameters: give --ctx [--gamma a/b], or all of --p1..--p4 --y".into(),
            )
        })?;
        let (g, exact) = match &self.gamma {
            Some(s) => parse_ratio(s)?,
            None => (BigRational::new(13.into(), 50.into()), true),
        };
        let p = Parameters::choose(ctx, &g)?;
        Ok((
            p,
            vec![
                ("parameter_source", "schedule".into()),
                ("gamma_inexact", (!exact).to_string()),
            ],
        ))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// The exact interval exponent gamma0(h, k) as a rational.
    Gamma0 {
        /// Number of full-range variables in the h,k construction.
        #[arg(long, default_value_t = 4)]
        h: u32,
        /// Power being summed.
        #[arg(long, default_value_t = 4)]
        k: u32,
    },

    /// Resolve a parameter tuple and display its derived quantities.
    Params(ParamArgs),

    /// Stream the integers expressible as a sum of four fourth powers.
    Enumerate {
        /// Inclusive upper bound of the scan.
        #[arg(long)]
        limit: u128,
        /// Preferred sieve window width in integers.
        #[arg(long)]
        window_bits: Option<u64>,
        /// Bitmap memory budget in bytes.
        #[arg(long)]
        memory_budget: Option<u64>,
        /// Emit one record per representable integer (capped by --list-cap).
        #[arg(long)]
        list: bool,
        /// Largest value count --list will serialize before refusing.
        #[arg(long, default_value_t = 1 << 20)]
        list_cap: u64,
    },

    /// Gap statistics of the representable set up to a limit.
    Gaps {
        /// Inclusive upper bound of the scan.
        #[arg(long)]
        limit: u128,
        /// Preferred sieve window width in integers.
        #[arg(long)]
        window_bits: Option<u64>,
        /// Bitmap memory budget in bytes.
        #[arg(long)]
        memory_budget: Option<u64>,
    },

    /// K'(N, Y): how many n in (N/2, N] have no representable integer in
    /// (n-Y, n].
    Kprime {
        #[arg(long)]
        n: u128,
        /// Interval length Y.
        #[arg(long)]
        y: f64,
    },

    /// K_gamma(N): how many n <= N have no representable integer in
    /// (n - n^gamma, n].
    Kgamma {
        #[arg(long)]
        n: u128,
        /// Sliding exponent as "a/b" or decimal.
        #[arg(long)]
        gamma: String,
    },

    /// Greedy four-step fourth-power approximation of n.
    Greedy {
        #[arg(long)]
        n: u128,
    },

    /// Evaluate one generating sum at a torus point.
    #[command(name = "weyl-eval")]
    WeylEval {
        /// Which sum: f (biquadratic), g (linear box), nu (mollified), or
        /// h (differenced, needs --x and --z).
        #[arg(long)]
        sum: String,
        /// Torus point as "a/b" or decimal (negatives reduce mod 1).
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Range size X (sums f, nu, h).
        #[arg(long)]
        x: Option<f64>,
        /// Box length Y (sum g).
        #[arg(long)]
        y: Option<f64>,
        /// Shift bound Z (sum h).
        #[arg(long)]
        z: Option<f64>,
        /// Term budget for nu.
        #[arg(long, default_value_t = 100_000_000)]
        nu_terms: u64,
    },

    /// Build the level-j arc partition and verify it exactly.
    Arcs {
        /// Partition level (1..3).
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[command(flatten)]
        params: ParamArgs,
    },

    /// Evaluate one named torus integral over an arc set.
    Integrate {
        /// Which integral: R, U, S, T, V or W.
        #[arg(long)]
        which: String,
        /// Arc set: full, central, major, minor, a0 or a1.
        #[arg(long, default_value = "full")]
        set: String,
        /// Arc level for non-full sets (1..3; a0/a1 allow 4).
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Fourier index n (required for R and U).
        #[arg(long, allow_negative_numbers = true)]
        n: Option<i128>,
        #[command(flatten)]
        params: ParamArgs,
        /// Relative tolerance for adaptive panels.
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        /// Largest permitted uniform grid.
        #[arg(long, default_value_t = 1 << 26)]
        max_grid: usize,
        /// Largest permitted number of panel evaluations.
        #[arg(long, default_value_t = 500_000)]
        max_evals: usize,
        /// Term cap for pointwise nu evaluation.
        #[arg(long, default_value_t = 100_000_000)]
        nu_terms: u64,
    },

    /// Exact counting functions r, r' and the smoothed rho.
    #[command(name = "count-r")]
    CountR {
        /// Which counter: r (pairs at distance n), rprime (positive
        /// differences), or rho (smoothed expectation).
        #[arg(long, default_value = "r")]
        kind: String,
        /// The argument n (a difference; r and rho accept negatives).
        #[arg(long, allow_negative_numbers = true)]
        n: i128,
        /// Range size X (kind r only).
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
        /// Term budget for rho.
        #[arg(long, default_value_t = 100_000_000)]
        nu_terms: u64,
    },

    /// Run a named experiment, optionally configured by a flat TOML file.
    Experiment {
        /// One of: mean-square, s4, lemmas, bessel, induction-chain.
        #[arg(long)]
        name: String,
        /// Flat TOML config; unknown keys are rejected.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // The CLI owns the worker pool; library code only ever uses the
        // ambient one. A second build_global in the same process is a no-op.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let t0 = Instant::now();
    match run(&cli.cmd) {
        Ok(mut report) => {
            report.set_config([("tool_version", env!("CARGO_PKG_VERSION"))]);
            report.sort_records();
            if cli.timing {
                report.wall_ms = Some(t0.elapsed().as_millis());
            }
            match emit(&cli, &report) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    let obj = serde_json::json!({
        "error": { "kind": e.kind(), "message": e.to_string() }
    });
    eprintln!("{obj}");
    match e {
        Error::InvalidInput(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn emit(cli: &Cli, report: &ExperimentReport) -> Result<()> {
    let json = report.to_json()?;
    match &cli.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    if let Some(path) = &cli.csv {
        std::fs::write(path, report.to_csv()?)?;
    }
    Ok(())
}

fn run(cmd: &Cmd) -> Result<ExperimentReport> {
    match cmd {
        Cmd::Gamma0 { h, k } => cmd_gamma0(*h, *k),
        Cmd::Params(pa) => cmd_params(pa),
        Cmd::Enumerate {
            limit,
            window_bits,
            memory_budget,
            list,
            list_cap,
        } => cmd_enumerate(*limit, *window_bits, *memory_budget, *list, *list_cap),
        Cmd::Gaps {
            limit,
            window_bits,
            memory_budget,
        } => cmd_gaps(*limit, *window_bits, *memory_budget),
        Cmd::Kprime { n, y } => cmd_kprime(*n, *y),
        Cmd::Kgamma { n, gamma } => cmd_kgamma(*n, gamma),
        Cmd::Greedy { n } => cmd_greedy(*n),
        Cmd::WeylEval {
            sum,
            alpha,
            x,
            y,
            z,
            nu_terms,
        } => cmd_weyl_eval(sum, alpha, *x, *y, *z, *nu_terms),
        Cmd::Arcs { j, params } => cmd_arcs(*j, params),
        Cmd::Integrate {
            which,
            set,
            j,
            n,
            params,
            rel_tol,
            max_grid,
            max_evals,
            nu_terms,
        } => {
            let budget = QuadratureBudget {
                max_grid_points: *max_grid,
                max_panel_evals: *max_evals,
                rel_tol: *rel_tol,
                nu_terms: *nu_terms,
            };
            cmd_integrate(which, set, *j, *n, params, &budget)
        }
        Cmd::CountR {
            kind,
            n,
            x,
            params,
            nu_terms,
        } => cmd_count_r(kind, *n, *x, params, *nu_terms),
        Cmd::Experiment { name, config } => cmd_experiment(name, config),
    }
}

// ---------------------------------------------------------------------------
// plain subcommands

fn cmd_gamma0(h: u32, k: u32) -> Result<ExperimentReport> {
    let g = gamma0_general(h, k)?;
    let mut report = ExperimentReport::new("gamma0");
    report.set_config([("h", h.to_string()), ("k", k.to_string())]);
    report.set_summary([
        ("gamma0", sval(ratio_string(&g))),
        ("gamma0_decimal", fval(ratio_to_f64(&g))),
    ]);
    Ok(report)
}

fn cmd_params(pa: &ParamArgs) -> Result<ExperimentReport> {
    let (p, cfg) = pa.resolve()?;
    let mut report = ExperimentReport::new("params");
    report.set_config(cfg);
    report.set_parameters(p.flat_map());
    for j in 1..=4usize {
        let xr = p.x_range(j);
        let zr = p.z_range(j);
        let mut fields = vec![
            ("p", fval(p.p[j - 1])),
            ("x_lower", fval(xr.lower)),
            ("x_upper", fval(xr.upper)),
            ("x_count", uval(xr.count() as u128)),
            ("z_lower", fval(zr.lower)),
            ("z_upper", fval(zr.upper)),
            ("z_count", uval(zr.count() as u128)),
        ];
        if j < 4 {
            fields.push(("shift_bound", fval(p.h_bound(j))));
        }
        report.push_record(format!("j={j}"), fields);
    }
    let mut summary = vec![
        ("n", uval(p.n)),
        ("y", fval(p.y)),
        ("y_count", uval(p.y_count() as u128)),
        ("schedule_ok", bval(p.schedule_ok())),
    ];
    if let Some(g) = &p.gamma {
        summary.push(("gamma", sval(ratio_string(g))));
        summary.push(("gamma_in_window", bval(gamma_in_window(g))));
    }
    report.set_summary(summary);
    Ok(report)
}

fn enum_config(window_bits: Option<u64>, memory_budget: Option<u64>) -> EnumerationConfig {
    let d = EnumerationConfig::default();
    EnumerationConfig {
        memory_budget_bytes: memory_budget.unwrap_or(d.memory_budget_bytes),
        window_bits: window_bits.unwrap_or(d.window_bits),
    }
}

fn cmd_enumerate(
    limit: u128,
    window_bits: Option<u64>,
    memory_budget: Option<u64>,
    list: bool,
    list_cap: u64,
) -> Result<ExperimentReport> {
    let cfg = enum_config(window_bits, memory_budget);
    let mut report = ExperimentReport::new("enumerate");
    report.set_config([
        ("limit", limit.to_string()),
        ("window_bits", cfg.window_bits.to_string()),
        ("memory_budget_bytes", cfg.memory_budget_bytes.to_string()),
        ("list", list.to_string()),
        ("list_cap", list_cap.to_string()),
    ]);
    let mut count = 0u64;
    let mut first = 0u128;
    let mut last = 0u128;
    for v in enumerate_representable_with(limit, cfg)? {
        if count == 0 {
            first = v;
        }
        count += 1;
        last = v;
        if list {
            if count > list_cap {
                return Err(Error::BudgetExceeded {
                    what: "enumerate --list record count".into(),
                    needed: count as u128,
                    budget: list_cap as u128,
                });
            }
            report.push_record(numeric_key("n=", v), [("value", uval(v))]);
        }
    }
    report.set_summary([
        ("limit", uval(limit)),
        ("count", uval(count as u128)),
        ("first", uval(first)),
        ("last", uval(last)),
    ]);
    Ok(report)
}

fn cmd_gaps(
    limit: u128,
    window_bits: Option<u64>,
    memory_budget: Option<u64>,
) -> Result<ExperimentReport> {
    let cfg = enum_config(window_bits, memory_budget);
    let gaps = gap_statistics_with(limit, cfg)?;
    let mut report = ExperimentReport::new("gaps");
    report.set_config([
        ("limit", limit.to_string()),
        ("window_bits", cfg.window_bits.to_string()),
        ("memory_budget_bytes", cfg.memory_budget_bytes.to_string()),
    ]);
    for (gap, freq) in &gaps.histogram {
        report.push_record(
            numeric_key("gap=", *gap),
            [("gap", uval(*gap)), ("count", uval(*freq as u128))],
        );
    }
    report.set_summary([
        ("limit", uval(gaps.limit)),
        ("count", uval(gaps.count as u128)),
        ("first", uval(gaps.first)),
        ("last", uval(gaps.last)),
        ("max_gap", uval(gaps.max_gap)),
        ("max_gap_location", uval(gaps.max_gap_location)),
    ]);
    Ok(report)
}

fn cmd_kprime(n: u128, y: f64) -> Result<ExperimentReport> {
    let k = count_empty_intervals(n, y)?;
    let mut report = ExperimentReport::new("kprime");
    report.set_config([("n", n.to_string()), ("y", y.to_string())]);
    report.set_summary([
        ("n", uval(n)),
        ("y", fval(y)),
        ("kprime", uval(k as u128)),
    ]);
    Ok(report)
}

fn cmd_kgamma(n: u128, gamma: &str) -> Result<ExperimentReport> {
    let (g, exact) = parse_ratio(gamma)?;
    let gf = ratio_to_f64(&g);
    let k = count_empty_intervals_gamma(n, gf)?;
    let mut report = ExperimentReport::new("kgamma");
    report.set_config([
        ("n", n.to_string()),
        ("gamma", ratio_string(&g)),
        ("gamma_inexact", (!exact).to_string()),
    ]);
    report.set_summary([
        ("n", uval(n)),
        ("gamma", fval(gf)),
        ("kgamma", uval(k as u128)),
    ]);
    Ok(report)
}

fn cmd_greedy(n: u128) -> Result<ExperimentReport> {
    let g = greedy_approx(n)?;
    // (3/4)^4 = 81/256: each greedy step shrinks the exponent by 3/4.
    let bound = 256.0 * (n as f64).powf(81.0 / 256.0);
    let mut report = ExperimentReport::new("greedy");
    report.set_config([("n", n.to_string())]);
    report.set_summary([
        ("n", uval(g.n)),
        ("x1", uval(g.x[0] as u128)),
        ("x2", uval(g.x[1] as u128)),
        ("x3", uval(g.x[2] as u128)),
        ("x4", uval(g.x[3] as u128)),
        ("remainder", uval(g.remainder)),
        ("remainder_bound", fval(bound)),
        ("within_bound", bval((g.remainder as f64) <= bound)),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// torus-side subcommands

fn parse_alpha(s: &str) -> Result<(Alpha, bool)> {
    let (r, exact) = parse_ratio(s)?;
    Ok((Alpha::from_big_ratio(&r)?, !exact))
}

fn require(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidInput(format!("this sum needs --{name}")))
}

fn cmd_weyl_eval(
    sum: &str,
    alpha_str: &str,
    x: Option<f64>,
    y: Option<f64>,
    z: Option<f64>,
    nu_terms: u64,
) -> Result<ExperimentReport> {
    let (alpha, inexact) = parse_alpha(alpha_str)?;
    let value = match sum {
        "f" => weyl_f(&alpha, require("x", x)?),
        "g" => weyl_g(&alpha, require("y", y)?),
        "nu" => mollified_nu(&alpha, require("x", x)?, nu_terms)?,
        "h" => diff_sum_h(&alpha, require("x", x)?, require("z", z)?),
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown sum {other:?}; expected f, g, nu or h"
            )))
        }
    };
    let mut report = ExperimentReport::new("weyl-eval");
    let mut cfg = vec![
        ("sum", sum.to_string()),
        ("alpha", alpha_str.to_string()),
        ("alpha_inexact", inexact.to_string()),
    ];
    if let Some(x) = x {
        cfg.push(("x", x.to_string()));
    }
    if let Some(y) = y {
        cfg.push(("y", y.to_string()));
    }
    if let Some(z) = z {
        cfg.push(("z", z.to_string()));
    }
    if sum == "nu" {
        cfg.push(("nu_terms", nu_terms.to_string()));
    }
    report.set_config(cfg);
    report.set_summary([
        ("re", fval(value.re)),
        ("im", fval(value.im)),
        ("abs", fval(value.norm())),
    ]);
    Ok(report)
}

fn cmd_arcs(j: usize, pa: &ParamArgs) -> Result<ExperimentReport> {
    let (p, cfg) = pa.resolve()?;
    let parts = build_arcs(j, &p)?;
    let mut report = ExperimentReport::new("arcs");
    report.set_config(cfg);
    report.set_config([("j", j.to_string())]);
    report.set_parameters(p.flat_map());

    let mut all = Vec::new();
    for set in [&parts.central, &parts.major, &parts.minor] {
        let intervals = set.materialized_intervals();
        report.push_record(
            format!("piece={}", set.label),
            [
                ("label", sval(set.label.clone())),
                ("intervals", uval(intervals.len() as u128)),
                ("measure", sval(ratio_string(&set.measure()))),
                ("measure_decimal", fval(ratio_to_f64(&set.measure()))),
            ],
        );
        all.extend(intervals);
    }
    // Re-validating the union from scratch proves pairwise disjointness
    // across the pieces; the total length closes the torus exactly.
    let disjoint = ArcSet::from_intervals("union", all.clone());
    let total: BigRational = match &disjoint {
        Ok(u) => u.measure(),
        Err(_) => parts.central.measure() + parts.major.measure() + parts.minor.measure(),
    };
    let phi = major_measure_phi(j, &p)?;
    report.set_summary([
        ("disjoint", bval(disjoint.is_ok())),
        ("total_measure", sval(ratio_string(&total))),
        (
            "total_is_one",
            bval(total == BigRational::from_integer(1.into())),
        ),
        (
            "major_measure_phi_identity",
            bval(parts.major.measure() == phi),
        ),
        ("pass", bval(disjoint.is_ok() && total == BigRational::from_integer(1.into()))),
    ]);
    Ok(report)
}

fn resolve_set(name: &str, j: usize, p: &Parameters) -> Result<ArcSet> {
    match name {
        "full" => Ok(ArcSet::full_torus()),
        "central" => central_set(j, p),
        "major" => Ok(build_arcs(j, p)?.major),
        "minor" => Ok(build_arcs(j, p)?.minor),
        "a0" => a_set(j, p, 0),
        "a1" => a_set(j, p, 1),
        other => Err(Error::InvalidInput(format!(
            "unknown arc set {other:?}; expected full, central, major, minor, a0 or a1"
        ))),
    }
}

fn cmd_integrate(
    which_str: &str,
    set_str: &str,
    j: usize,
    n: Option<i128>,
    pa: &ParamArgs,
    budget: &QuadratureBudget,
) -> Result<ExperimentReport> {
    let which = WhichIntegral::parse(which_str)?;
    let (p, cfg) = pa.resolve()?;
    let set = resolve_set(set_str, j, &p)?;
    let result = integral(which, &p, &set, n, budget)?;
    let mut report = ExperimentReport::new("integrate");
    report.set_config(cfg);
    report.set_config([
        ("which", which_str.to_uppercase()),
        ("set", set_str.to_string()),
        ("j", j.to_string()),
        ("rel_tol", budget.rel_tol.to_string()),
        ("max_grid_points", budget.max_grid_points.to_string()),
        ("max_panel_evals", budget.max_panel_evals.to_string()),
        ("nu_terms", budget.nu_terms.to_string()),
    ]);
    if let Some(n) = n {
        report.set_config([("n", n.to_string())]);
    }
    report.set_parameters(p.flat_map());
    let mut summary = vec![
        ("re", fval(result.value.re)),
        ("im", fval(result.value.im)),
        ("abs", fval(result.value.norm())),
        ("method", sval(result.method.clone())),
        ("error_estimate", fval(result.error_estimate)),
        ("evals", uval(result.evals as u128)),
    ];
    if let Some(m) = result.grid_m {
        summary.push(("grid_m", uval(m as u128)));
    }
    report.set_summary(summary);
    Ok(report)
}

fn cmd_count_r(
    kind: &str,
    n: i128,
    x: Option<f64>,
    pa: &ParamArgs,
    nu_terms: u64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("count-r");
    let mut cfg = vec![("kind", kind.to_string()), ("n", n.to_string())];
    let value = match kind {
        "r" => {
            let x = require("x", x)?;
            cfg.push(("x", x.to_string()));
            uval(count_r(n, x) as u128)
        }
        "rprime" => {
            let (p, pcfg) = pa.resolve()?;
            report.set_parameters(p.flat_map());
            report.set_config(pcfg);
            let d = u128::try_from(n).map_err(|_| {
                Error::InvalidInput(format!("rprime counts positive differences, got n = {n}"))
            })?;
            uval(count_r_prime(d, &p) as u128)
        }
        "rho" => {
            let (p, pcfg) = pa.resolve()?;
            report.set_parameters(p.flat_map());
            report.set_config(pcfg);
            cfg.push(("nu_terms", nu_terms.to_string()));
            fval(count_rho(n, &p, nu_terms)?)
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown counter {other:?}; expected r, rprime or rho"
            )))
        }
    };
    report.set_config(cfg);
    report.set_summary([("n", sval(n.to_string())), ("value", value)]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// experiment dispatch with flat TOML configs

struct FlatConfig {
    table: toml::map::Map<String, toml::Value>,
}

impl FlatConfig {
    fn load(path: &Option<PathBuf>) -> Result<FlatConfig> {
        let table = match path {
            None => toml::map::Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                let t: toml::Table = text
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("config parse: {e}")))?;
                t
            }
        };
        Ok(FlatConfig { table })
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(toml::Value::Float(v)) => Ok(v),
            Some(toml::Value::Integer(v)) => Ok(v as f64),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be a number, got {other}"
            ))),
        }
    }

    fn integer(&mut self, key: &str, default: i64) -> Result<i64> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) => Ok(v),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be an integer, got {other}"
            ))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = self.integer(key, i64::try_from(default).unwrap_or(i64::MAX))?;
        u64::try_from(v)
            .map_err(|_| Error::InvalidInput(format!("config key {key:?} must be >= 0, got {v}")))
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64(key, default as u64)? as usize)
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(v)) => Ok(v),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be a boolean, got {other}"
            ))),
        }
    }

    fn ratio(&mut self, key: &str, default: BigRational) -> Result<BigRational> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(toml::Value::String(s)) => Ok(parse_ratio(&s)?.0),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be an \"a/b\" string, got {other}"
            ))),
        }
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.table.remove(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(x),
                    toml::Value::Integer(x) => Ok(x as f64),
                    other => Err(Error::InvalidInput(format!(
                        "config key {key:?} must list numbers, got {other}"
                    ))),
                })
                .collect(),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be an array, got {other}"
            ))),
        }
    }

    fn u128_list(&mut self, key: &str, default: &[u128]) -> Result<Vec<u128>> {
        match self.table.remove(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    toml::Value::Integer(x) if x >= 0 => Ok(x as u128),
                    other => Err(Error::InvalidInput(format!(
                        "config key {key:?} must list non-negative integers, got {other}"
                    ))),
                })
                .collect(),
            Some(other) => Err(Error::InvalidInput(format!(
                "config key {key:?} must be an array, got {other}"
            ))),
        }
    }

    /// Optional explicit tuple from keys p1..p4 and y; all five or none.
    fn params(&mut self) -> Result<Option<Parameters>> {
        let keys = ["p1", "p2", "p3", "p4", "y"];
        let present = keys.iter().filter(|k| self.table.contains_key(**k)).count();
        if present == 0 {
            return Ok(None);
        }
        if present < keys.len() {
            return Err(Error::InvalidInput(
                "explicit parameters need all of p1, p2, p3, p4, y".into(),
            ));
        }
        let mut v = [0.0; 5];
        for (slot, key) in v.iter_mut().zip(keys) {
            *slot = self.f64(key, 0.0)?;
        }
        Ok(Some(Parameters::new(v[0], v[1], v[2], v[3], v[4])?))
    }

    fn quad(&mut self) -> Result<QuadratureBudget> {
        let d = QuadratureBudget::default();
        Ok(QuadratureBudget {
            max_grid_points: self.usize("max_grid_points", d.max_grid_points)?,
            max_panel_evals: self.usize("max_panel_evals", d.max_panel_evals)?,
            rel_tol: self.f64("rel_tol", d.rel_tol)?,
            nu_terms: self.u64("nu_terms", d.nu_terms)?,
        })
    }

    fn finish(self) -> Result<()> {
        if self.table.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.table.keys().map(String::as_str).collect();
        Err(Error::InvalidInput(format!(
            "unknown config keys: {}",
            keys.join(", ")
        )))
    }
}

fn cmd_experiment(name: &str, path: &Option<PathBuf>) -> Result<ExperimentReport> {
    let mut cfg = FlatConfig::load(path)?;
    match name {
        "mean-square" => {
            let d = MeanSquareConfig::default();
            let c = MeanSquareConfig {
                ladder: cfg.u128_list("ladder", &d.ladder)?,
                gamma: cfg.ratio("gamma", d.gamma)?,
                envelope: cfg.f64("envelope", d.envelope)?,
                epsilon: cfg.f64("epsilon", d.epsilon)?,
                window_budget: cfg.u64("window_budget", d.window_budget)?,
                params_override: cfg.params()?,
            };
            cfg.finish()?;
            mean_square_experiment(&c)
        }
        "s4" => {
            let p4 = cfg.f64("p4", 4.0)?;
            let y = cfg.f64("y", 2.0)?;
            cfg.finish()?;
            s4_diagonal_experiment(p4, y)
        }
        "lemmas" => {
            let d = LemmaSuiteConfig::default();
            let c = LemmaSuiteConfig {
                xs: cfg.f64_list("xs", &d.xs)?,
                alpha_grid: cfg.u64("alpha_grid", d.alpha_grid)?,
                nu_grid: cfg.u64("nu_grid", d.nu_grid)?,
                y_ladder: cfg.f64_list("y_ladder", &d.y_ladder)?,
                quad: cfg.quad()?,
                per_alpha_records: cfg.bool("per_alpha_records", d.per_alpha_records)?,
            };
            cfg.finish()?;
            lemma_bound_suite(&c)
        }
        "bessel" => {
            let p = cfg
                .params()?
                .map_or_else(|| Parameters::new(4.0, 4.0, 4.0, 4.0, 2.0), Ok)?;
            let quad = cfg.quad()?;
            cfg.finish()?;
            bessel_experiment(&p, &quad)
        }
        "induction-chain" => {
            let p = cfg
                .params()?
                .map_or_else(|| Parameters::new(16.0, 9.0, 6.0, 4.0, 2.0), Ok)?;
            let hist = cfg.u64("hist_budget", 1 << 24)?;
            cfg.finish()?;
            induction_chain_experiment(&p, hist)
        }
        other => Err(Error::InvalidInput(format!(
            "unknown experiment {other:?}; expected mean-square, s4, lemmas, bessel or induction-chain"
        ))),
    }
}
