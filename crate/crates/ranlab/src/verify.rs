//! Aggregated statistical verification of every lemma-level claim at desk
//! scale. Each check is named, deterministic for a fixed seed, and
//! reports a one-line diagnostic; the CLI turns any failure into exit
//! code 3.

use crate::bounds::{
    beta_half_product_cdf, beta_product_tail_bound, event_cnk_margin, explicit_constants_dary,
    explicit_constants_ran, g_of_lambda, laforgia_check,
};
use crate::dary_tree::grow_tree;
use crate::experiments::{chernoff_weight_check, domination_check};
use crate::paths::{
    buono_upper_bound, deterministic_path_lower_bound, longest_path_exact, longest_path_heuristic,
    trace_triangles,
};
use crate::rng::Stream;
use crate::stats::{ks_two_sample_critical, ks_two_sample_statistic};
use crate::stochastics::{
    beta_binomial_mixture, estimate_moment, polya_urn_hits, sample_beta_power, sample_dirichlet,
    UpsilonKind,
};
use crate::subtree_dp::{
    adjusted_mass, largest_buono_subtree, largest_r_ary_subtree, random_legal_level_set,
    witness_is_buono, WeightedTreeSample,
};
use serde::Serialize;

/// One named statistical check.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl LemmaCheck {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        LemmaCheck {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Scales the sample sizes; `quick` keeps the whole sweep in a few
/// seconds for smoke runs.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub quick: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_601,
            quick: false,
        }
    }
}

/// Runs the whole catalog.
pub fn run_all(opts: VerifyOptions) -> Vec<LemmaCheck> {
    let mut checks = Vec::new();
    checks.push(simplex_invariants(opts));
    checks.push(beta_moment_closed_form(opts));
    checks.push(urn_matches_mixture(opts));
    checks.push(moment_dary_2_1(opts));
    checks.push(moment_ran_below_g(opts));
    checks.push(mass_conservation(opts));
    checks.push(adjusted_mass_lemma(opts));
    checks.push(tail_bound_grid(opts));
    checks.push(half_product_cdf_matches_mc(opts));
    checks.push(laforgia_grid(opts));
    checks.push(appendix_dary_grid());
    checks.push(appendix_ran());
    checks.push(domination_grid(opts));
    checks.push(chernoff_grid(opts));
    checks.push(path_bracket(opts));
    checks.push(cnk_margin_trend(opts));
    checks
}

fn scaled(opts: VerifyOptions, full: u64) -> u64 {
    if opts.quick {
        (full / 20).max(1_000)
    } else {
        full
    }
}

fn simplex_invariants(opts: VerifyOptions) -> LemmaCheck {
    let mut rng = Stream::new(opts.seed ^ 0x01);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in 2..=6u32 {
        for _ in 0..2_000 {
            let v = sample_dirichlet(d, &mut rng).expect("valid d");
            let sum: f64 = v.entries().iter().sum();
            worst = worst.max((sum - 1.0).abs());
            ok &= v.entries().iter().all(|&x| x > 0.0);
        }
    }
    LemmaCheck::new(
        "simplex_invariants",
        ok && worst <= 1e-12,
        format!("worst |sum-1| = {worst:.3e}"),
    )
}

fn beta_moment_closed_form(opts: VerifyOptions) -> LemmaCheck {
    // E[B^λ] = 1/((d−1)λ+1), within 3 CI half-widths.
    let n = scaled(opts, 1_000_000);
    let mut worst = 0.0f64;
    let mut pass = true;
    for (i, &d) in [2u32, 3, 5].iter().enumerate() {
        for (j, &lambda) in [0.5f64, 1.0, 2.0, 5.0].iter().enumerate() {
            let mut rng = Stream::new(opts.seed ^ (0x100 + 16 * i as u64 + j as u64));
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let term = sample_beta_power(d, &mut rng).expect("d >= 2").powf(lambda);
                sum += term;
                sum_sq += term * term;
            }
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            let hw = 1.96 * (var / n as f64).sqrt();
            let expect = 1.0 / (f64::from(d - 1) * lambda + 1.0);
            let sigmas = (mean - expect).abs() / hw.max(1e-300);
            worst = worst.max(sigmas / 3.0);
            pass &= (mean - expect).abs() <= 3.0 * hw;
        }
    }
    LemmaCheck::new(
        "beta_moment_closed_form",
        pass,
        format!("worst deviation = {:.2} of the 3-hw budget", worst),
    )
}

fn urn_matches_mixture(opts: VerifyOptions) -> LemmaCheck {
    let n = scaled(opts, 20_000) as usize;
    let mut pass = true;
    let mut detail = String::new();
    for &d in &[2u32, 3, 5] {
        for &t in &[10u64, 100] {
            let mut rng = Stream::new(opts.seed ^ (0x200 + u64::from(d) * 1_000 + t));
            let urn: Vec<f64> = (0..n)
                .map(|_| polya_urn_hits(d, t, &mut rng).expect("valid") as f64)
                .collect();
            let mix: Vec<f64> = (0..n)
                .map(|_| beta_binomial_mixture(d, t, &mut rng).expect("valid") as f64)
                .collect();
            let stat = ks_two_sample_statistic(&urn, &mix);
            let crit = ks_two_sample_critical(n, n, 0.01);
            if stat >= crit {
                pass = false;
                detail.push_str(&format!("(d={d},t={t}): {stat:.4} >= {crit:.4} "));
            }
        }
    }
    if detail.is_empty() {
        detail = "all 6 two-sample KS tests below the 1% critical value".into();
    }
    LemmaCheck::new("polya_urn_beta_binomial_mixture", pass, detail)
}

fn moment_dary_2_1(opts: VerifyOptions) -> LemmaCheck {
    let mut rng = Stream::new(opts.seed ^ 0x300);
    let est = estimate_moment(
        UpsilonKind::Dary { d: 2, r: 1 },
        1.0,
        scaled(opts, 400_000),
        &mut rng,
    )
    .expect("valid");
    let pass = (est.mean - 0.75).abs() <= 3.0 * est.half_width_95;
    LemmaCheck::new(
        "moment_dary21_three_quarters",
        pass,
        format!("mean = {:.5} (expect 0.75 ± {:.5})", est.mean, 3.0 * est.half_width_95),
    )
}

fn moment_ran_below_g(opts: VerifyOptions) -> LemmaCheck {
    let mut pass = true;
    let mut detail = String::new();
    for &lambda in &[2.0f64, 10.0, 100.0] {
        let mut rng = Stream::new(opts.seed ^ (0x400 + lambda as u64));
        let est = estimate_moment(UpsilonKind::Ran, lambda, scaled(opts, 100_000), &mut rng)
            .expect("valid");
        let g = g_of_lambda(lambda).expect("lambda > 1");
        detail.push_str(&format!("λ={lambda}: {:.4} < {:.4}; ", est.mean, g));
        pass &= est.mean < g;
    }
    LemmaCheck::new("moment_ran_below_g_lambda", pass, detail)
}

fn mass_conservation(opts: VerifyOptions) -> LemmaCheck {
    let trials = scaled(opts, 2_000);
    let mut worst = 0.0f64;
    let mut i = 0u64;
    for &(d, r, depth) in &[(2u32, 1u32, 8u32), (3, 2, 6), (4, 2, 5), (5, 3, 4)] {
        for _ in 0..(trials / 4).max(50) {
            i += 1;
            let mut rng = Stream::new(opts.seed ^ (0x500 + i));
            let s = WeightedTreeSample::sample(d, r, depth, &mut rng).expect("valid");
            for k in 0..=depth {
                worst = worst.max((s.level_mass_sum(k).expect("k <= depth") - 1.0).abs());
            }
        }
    }
    LemmaCheck::new(
        "mass_conservation",
        worst <= 1e-9,
        format!("worst |Σ M − 1| = {worst:.3e}"),
    )
}

fn adjusted_mass_lemma(opts: VerifyOptions) -> LemmaCheck {
    let trials = scaled(opts, 10_000);
    let mut worst = 0.0f64;
    let mut i = 0u64;
    let grid = [(2u32, 1u32, 8u32), (3, 1, 6), (3, 2, 6), (4, 2, 5), (5, 3, 4)];
    let per = (trials as usize / grid.len()).max(50);
    for &(d, r, n) in &grid {
        for _ in 0..per {
            i += 1;
            let mut rng = Stream::new(opts.seed ^ (0x600 + i));
            let s = WeightedTreeSample::sample(d, r, n, &mut rng).expect("valid");
            let c = random_legal_level_set(&s, n, &mut rng).expect("legal");
            let m = adjusted_mass(&s, &c).expect("legal set");
            worst = worst.max(m);
        }
    }
    LemmaCheck::new(
        "adjusted_mass_at_most_one",
        worst <= 1.0 + 1e-12,
        format!("max M̂(C) = {worst:.15}"),
    )
}

fn tail_bound_grid(opts: VerifyOptions) -> LemmaCheck {
    let samples = scaled(opts, 1_000_000);
    let mut pass = true;
    let mut detail = String::new();
    let mut idx = 0u64;
    for &d in &[2u32, 3, 5] {
        for &n in &[5u32, 10] {
            for &beta in &[0.02f64, 0.05, 0.1] {
                idx += 1;
                let tb = beta_product_tail_bound(d, beta, n).expect("valid");
                if tb.vacuous {
                    continue; // trivial bound of 1 dominates any frequency
                }
                let mut rng = Stream::new(opts.seed ^ (0x700 + idx));
                let threshold = beta.powi(n as i32);
                let mut hits = 0u64;
                for _ in 0..samples {
                    let mut prod = 1.0f64;
                    for _ in 0..n {
                        prod *= sample_beta_power(d, &mut rng).expect("valid");
                    }
                    if prod <= threshold {
                        hits += 1;
                    }
                }
                let p_hat = hits as f64 / samples as f64;
                let allowance =
                    3.0 * (p_hat * (1.0 - p_hat) / samples as f64).sqrt() + 1.0 / samples as f64;
                if p_hat > tb.value + allowance {
                    pass = false;
                    detail.push_str(&format!(
                        "(d={d},n={n},β={beta}): {p_hat:.4e} > {:.4e}; ",
                        tb.value
                    ));
                }
            }
        }
    }
    if detail.is_empty() {
        detail = "empirical tails dominated on the whole grid".into();
    }
    LemmaCheck::new("beta_product_tail_bound_dominates", pass, detail)
}

fn half_product_cdf_matches_mc(opts: VerifyOptions) -> LemmaCheck {
    let n = scaled(opts, 1_000_000);
    let mut pass = true;
    let mut detail = String::new();
    for (j, &eps) in [0.01f64, 0.1, 0.5].iter().enumerate() {
        let mut rng = Stream::new(opts.seed ^ (0x800 + j as u64));
        let mut hits = 0u64;
        for _ in 0..n {
            let b1 = sample_beta_power(3, &mut rng).expect("valid");
            let b2 = sample_beta_power(3, &mut rng).expect("valid");
            if b1 * b2 <= eps {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let expect = beta_half_product_cdf(eps).expect("valid eps");
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        let dev = (p_hat - expect).abs();
        if dev > 3.0 * sigma {
            pass = false;
        }
        detail.push_str(&format!("ε={eps}: dev={:.2}σ; ", dev / sigma));
    }
    LemmaCheck::new("beta_half_product_cdf_vs_mc", pass, detail)
}

fn laforgia_grid(opts: VerifyOptions) -> LemmaCheck {
    use rand::Rng;
    let mut rng = Stream::new(opts.seed ^ 0x900);
    let mut pass = true;
    for _ in 0..1_000 {
        let p = rng.gen_range(0.01..1000.0f64);
        let q = rng.gen_range(0.01..1000.0f64);
        let iota = rng.gen_range(1.0001..1.9999f64);
        let sigma = rng.gen_range(0.0001..0.9999f64);
        pass &= laforgia_check(p, q, iota, sigma).expect("valid ranges").pass;
    }
    LemmaCheck::new(
        "laforgia_random_grid",
        pass,
        "1000 random (p,q,ι,σ) tuples".into(),
    )
}

fn appendix_dary_grid() -> LemmaCheck {
    let mut pass = true;
    let mut detail = String::new();
    for d in 2..=6u32 {
        for r in 1..d {
            let report = explicit_constants_dary(d, r).expect("valid grid");
            let ok = report.all_pass() && report.kappa > 1.0 && report.delta < 1.0;
            if !ok {
                pass = false;
                detail.push_str(&format!("(d={d},r={r}) failed; "));
            }
        }
    }
    if detail.is_empty() {
        detail = "κ>1, δ<1, every inequality strict on 1 ≤ r < d ≤ 6".into();
    }
    LemmaCheck::new("appendix_dary_constants", pass, detail)
}

fn appendix_ran() -> LemmaCheck {
    let report = explicit_constants_ran();
    let delta_ok = (report.delta - (1.0 - 4e-8)).abs() <= 1e-15;
    LemmaCheck::new(
        "appendix_ran_constants",
        report.all_pass() && delta_ok,
        format!("δ = {:.12}, all checks pass = {}", report.delta, report.all_pass()),
    )
}

fn domination_grid(opts: VerifyOptions) -> LemmaCheck {
    let reps = scaled(opts, 10_000) as u32;
    let mut pass = true;
    let mut detail = String::new();
    for &(d, k, t) in &[(2u32, 1u32, 200u64), (3, 1, 200), (3, 2, 500)] {
        let out = domination_check(d, k, t, reps, opts.seed ^ 0xA00).expect("valid");
        if !out.pass {
            pass = false;
        }
        detail.push_str(&format!(
            "(d={d},k={k},t={t}): worst={:.4} allow={:.4}; ",
            out.max_cdf_violation, out.allowance
        ));
    }
    LemmaCheck::new("binomial_domination", pass, detail)
}

fn chernoff_grid(opts: VerifyOptions) -> LemmaCheck {
    let reps = scaled(opts, 10_000) as u32;
    let mut pass = true;
    let mut detail = String::new();
    for &(d, n, t) in &[(3u32, 3u32, 1_000u64), (2, 2, 500), (3, 3, 0)] {
        let out = chernoff_weight_check(d, n, t, reps, opts.seed ^ 0xB00).expect("valid");
        pass &= out.pass;
        detail.push_str(&format!(
            "(d={d},n={n},t={t}): worst_ratio={:.3}; ",
            out.worst_ratio
        ));
    }
    LemmaCheck::new("chernoff_weight_bound", pass, detail)
}

fn path_bracket(opts: VerifyOptions) -> LemmaCheck {
    let seeds = if opts.quick { 10u64 } else { 40 };
    let mut pass = true;
    let mut detail = String::new();
    'outer: for t in 0..=10u64 {
        for s in 0..seeds {
            let mut rng = Stream::new(opts.seed ^ (0xC00 + t * 1_000 + s));
            let (ran, delta) = crate::apollonian::grow_ran(t, &mut rng).expect("valid");
            let h = longest_path_heuristic(&ran, &delta);
            let e = longest_path_exact(&ran, &delta).expect("under cap");
            let bound = buono_upper_bound(&delta);
            let lower = deterministic_path_lower_bound(t);
            let trace = trace_triangles(&ran, &delta, &e).expect("valid path");
            let buono_ok = trace.is_empty() || witness_is_buono(delta.arena(), &trace);
            if !(h.length <= e.length && e.length <= bound && e.length as f64 >= lower && buono_ok)
            {
                pass = false;
                detail = format!("violated at t={t} seed={s}");
                break 'outer;
            }
        }
    }
    if detail.is_empty() {
        detail = format!("heuristic ≤ exact ≤ 3+buono and trace buono, t ≤ 10 × {seeds} seeds");
    }
    LemmaCheck::new("path_bracket_and_trace", pass, detail)
}

fn cnk_margin_trend(opts: VerifyOptions) -> LemmaCheck {
    // κ from the Theorem-1.1 recipe: estimate E[(1−Υ)^λ] at a λ that
    // brings d·E below 1, then κ = (d·E)^(-1/(2λ)).
    let (d, r) = (3u32, 2u32);
    let mut rng = Stream::new(opts.seed ^ 0xD00);
    let lambda = 40.0;
    let est = estimate_moment(UpsilonKind::Dary { d, r }, lambda, 50_000, &mut rng)
        .expect("valid");
    let de = f64::from(d) * est.mean;
    if de >= 1.0 {
        return LemmaCheck::new(
            "cnk_margin_trend",
            false,
            format!("λ={lambda} insufficient: d·E = {de}"),
        );
    }
    let kappa = de.powf(-1.0 / (2.0 * lambda));
    let depth = if opts.quick { 8u32 } else { 10 };
    let reps = if opts.quick { 60 } else { 150 };
    let mut hold_first = 0u32;
    let mut hold_last = 0u32;
    for i in 0..reps as u64 {
        let mut srng = Stream::new(opts.seed ^ (0xD10 + i));
        let s = WeightedTreeSample::sample(d, r, depth, &mut srng).expect("valid");
        if event_cnk_margin(&s, kappa, 1).expect("n ok") >= 1.0 {
            hold_first += 1;
        }
        if event_cnk_margin(&s, kappa, depth).expect("n ok") >= 1.0 {
            hold_last += 1;
        }
    }
    let f1 = f64::from(hold_first) / reps as f64;
    let fl = f64::from(hold_last) / reps as f64;
    LemmaCheck::new(
        "cnk_margin_trend",
        fl > f1 && fl >= 0.8,
        format!("κ={kappa:.4}: fraction holding n=1: {f1:.3}, n={depth}: {fl:.3}"),
    )
}

/// Smoke-level structural check mirroring the oracle-equivalence
/// acceptance criterion at reduced scale; exposed so `verify-lemmas`
/// exercises the DP surfaces too.
pub fn dp_consistency(opts: VerifyOptions) -> LemmaCheck {
    use rand::Rng;
    let mut pass = true;
    for seed in 0..20u64 {
        let mut rng = Stream::new(opts.seed ^ (0xE00 + seed));
        let t = rng.gen_range(0..=5u64);
        let tree = grow_tree(3, t, &mut rng).expect("valid");
        let w2 = largest_r_ary_subtree(&tree, 2).expect("valid");
        let w1 = largest_r_ary_subtree(&tree, 1).expect("valid");
        let b = largest_buono_subtree(&tree).expect("3-ary");
        pass &= w1.size <= w2.size && w2.size <= tree.node_count() && b.size <= tree.node_count();
    }
    LemmaCheck::new("dp_consistency", pass, "r-ary monotone, sizes bounded".into())
}
