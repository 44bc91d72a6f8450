//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each criterion also has a wall-clock budget.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{discrete_oracle, gauss_legendre, rel, source_fixed_point_oracle};
use twohop::numerics::{lambert_w, upper_incomplete_gamma};
use twohop::relay::RelaySolver;
use twohop::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rayleigh() -> FadingDistribution {
    FadingDistribution::rayleigh()
}

fn c1_rayleigh_boundary() -> Outcome {
    let g2 = solve_gamma2(&rayleigh()).map_err(err)?;
    check((g2 - 1.0).abs() <= 1e-10, || format!("gamma2 = {g2:.15}"))?;
    Ok(format!("gamma2 = {g2:.15}"))
}

/// Upper edge of `{x : d/dx (x^(α+1) e^(-βx)) > 0}` by bisection on a
/// central-difference slope; normalization of the density is irrelevant.
fn growth_edge_oracle(alpha: f64, beta: f64) -> f64 {
    let h = |x: f64| ((alpha + 1.0) * x.ln() - beta * x).exp();
    let slope = |x: f64| {
        let d = 1e-7 * x;
        (h(x + d) - h(x - d)) / (2.0 * d)
    };
    let (mut lo, mut hi) = (1e-6 / beta, 1e3 * (alpha + 1.0) / beta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c2_gamma_growth_region() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (alpha, beta) = (rng.gen_range(0.2..6.0), rng.gen_range(0.2..6.0));
        let dist = FadingDistribution::gamma(alpha, beta).map_err(err)?;
        let region = dist.growth_regions();
        check(region.intervals.len() == 1, || {
            format!("({alpha}, {beta}): {:?}", region.intervals)
        })?;
        let (lo, hi) = region.intervals[0];
        let expect = (1.0 + alpha) / beta;
        let oracle = growth_edge_oracle(alpha, beta);
        check(lo.abs() <= 1e-8, || format!("({alpha}, {beta}): lower edge {lo}"))?;
        check((hi - expect).abs() <= 1e-8, || {
            format!("({alpha}, {beta}): {hi} vs {expect}")
        })?;
        check((oracle - expect).abs() <= 1e-6 * expect, || {
            format!("({alpha}, {beta}): slope oracle {oracle} vs {expect}")
        })?;
        let numeric = dist.growth_regions_numeric(3.0 * expect, 300).map_err(err)?;
        let (_, nhi) = numeric.intervals[0];
        check((nhi - expect).abs() <= 1e-8, || {
            format!("({alpha}, {beta}): numeric edge {nhi} vs {expect}")
        })?;
        worst = worst.max((hi - expect).abs()).max((nhi - expect).abs());
    }
    Ok(format!("20 pairs, worst edge error {worst:.2e}"))
}

fn c3_sign_condition() -> Outcome {
    let mut max_l2: f64 = 0.0;
    let mut min_step = f64::INFINITY;
    for p_r in [1.0, 10.0, 100.0] {
        for b in [0.5, 1.0, 2.0] {
            let profile = build_g_profile(&rayleigh(), p_r, b, &ProfileGrid::default()).map_err(err)?;
            check(profile.failed.is_empty(), || {
                format!("P_r={p_r} b={b}: failed {:?}", profile.failed)
            })?;
            for r in profile.active_rows() {
                check(r.l2 <= 1.0 + 1e-9, || {
                    format!("P_r={p_r} b={b} D_r={}: l2 = {}", r.dr, r.l2)
                })?;
                max_l2 = max_l2.max(r.l2);
            }
            for w in profile.rows.windows(2) {
                let step = w[1].g - w[0].g;
                check(step >= -1e-9, || {
                    format!("P_r={p_r} b={b}: G drops by {step} at D_r={}", w[1].dr)
                })?;
                min_step = min_step.min(step);
            }
        }
    }
    Ok(format!("max active l2 = {max_l2:.12}, min G step = {min_step:.2e}"))
}

fn c4_derivative_identity() -> Outcome {
    let solver = RelaySolver::new(&rayleigh(), 100.0, 1.0).map_err(err)?;
    let profile = relay::build_with(&solver, &ProfileGrid::default()).map_err(err)?;
    let threshold = solver.threshold();
    // interior boundary-active points whose stencil stays active
    let candidates: Vec<&relay::ProfileRow> = profile
        .active_rows()
        .filter(|r| r.dr < 1.0 && r.dr * (1.0 - 1e-3) > threshold)
        .collect();
    check(candidates.len() >= 30, || {
        format!("only {} interior active points", candidates.len())
    })?;
    let stride = candidates.len() as f64 / 30.0;
    let mut worst: f64 = 0.0;
    for k in 0..30 {
        let r = candidates[(k as f64 * stride) as usize];
        let h = 1e-4 * r.dr;
        let fd = (solver.g(r.dr + h).map_err(err)? - solver.g(r.dr - h).map_err(err)?) / (2.0 * h);
        let e = rel(r.g_d, fd);
        check(e <= 1e-3, || format!("D_r={}: closed {} vs fd {fd}", r.dr, r.g_d))?;
        worst = worst.max(e);
    }
    Ok(format!("30 points, worst relative mismatch {worst:.2e}"))
}

fn c5_oracle_equivalence() -> Outcome {
    let b = 1.0;
    let mut lines = Vec::new();
    for (p, floor_dr) in [(10.0, 0.3), (100.0, 0.05)] {
        let single = solve_single_hop(&rayleigh(), p, b).map_err(err)?.expected_distortion;
        let relay = g_of_dr(&rayleigh(), p, b, floor_dr).map_err(err)?;
        let iv = solve_relay_interval(&rayleigh(), p, b, floor_dr).map_err(err)?;
        check(iv.boundary_active, || {
            format!("P={p} D_r={floor_dr} not boundary-active")
        })?;
        for (label, cont, floor) in [("single", single, 0.0), ("relay", relay, floor_dr)] {
            let k40 = discrete_oracle(40, p, b, floor);
            let gap = (cont - k40).abs() / k40;
            check(gap <= 0.01, || {
                format!("{label} P={p}: continuous {cont} vs K=40 {k40}")
            })?;
            check(cont <= k40 + 1e-4, || {
                format!("{label} P={p}: continuous {cont} above K=40 {k40}")
            })?;
            for k in [2, 5, 10] {
                let dk = discrete_oracle(k, p, b, floor);
                check(cont <= dk, || {
                    format!("{label} P={p}: continuous {cont} above K={k} {dk}")
                })?;
            }
            lines.push(format!("{label} P={p}: {cont:.6} vs K40 {k40:.6}"));
        }
    }
    Ok(lines.join("; "))
}

fn c6_fit_quality() -> Outcome {
    let profile = build_g_profile(&rayleigh(), 100.0, 1.0, &ProfileGrid::default()).map_err(err)?;
    let fit = fit_g_parametric(&profile).map_err(err)?;
    let mut acc = 0.0;
    let mut n = 0usize;
    for r in profile.rows.iter().filter(|r| r.dr >= 1e-3) {
        let e = (fit.g(r.dr).map_err(err)? - r.g) / r.g;
        acc += e * e;
        n += 1;
    }
    let rms = (acc / n as f64).sqrt();
    check(rms <= 0.05, || format!("relative RMS {rms:.4} over {n} points"))?;
    Ok(format!(
        "p_r = {:.4}, B = {:.4}, slope rms {:.4}, G rms {rms:.4} over {n} points",
        fit.p_r, fit.B, fit.rms_rel
    ))
}

fn c7_closed_form_consistency() -> Outcome {
    let b = 1.0;
    let profile = build_g_profile(&rayleigh(), 100.0, b, &ProfileGrid::default()).map_err(err)?;
    let fit = fit_g_parametric(&profile).map_err(err)?;
    let gamma2 = solve_gamma2(&rayleigh()).map_err(err)?;
    let gamma1 = solve_gamma1(&rayleigh(), 100.0, b, &fit, gamma2).map_err(err)?;
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let g = gamma1 + (gamma2 - gamma1) * k as f64 / 49.0;
        let cf = source_auxiliary_closed_form(g, gamma1, b, &fit).map_err(err)?;
        let oracle = source_fixed_point_oracle(g, gamma1, b, fit.p_r, fit.B);
        let e = rel(cf, oracle);
        check(e <= 1e-6, || format!("γ={g}: closed {cf} vs fixed point {oracle}"))?;
        worst = worst.max(e);
    }
    Ok(format!("γ1 = {gamma1:.6}, worst relative mismatch {worst:.2e}"))
}

fn c8_af_channel() -> Outcome {
    let mut lines = Vec::new();
    for (p_t, p_r) in [(100.0, 10.0), (100.0, 100.0), (100.0, 1000.0)] {
        let pdf = |s: f64| af_equivalent_pdf(s, p_t, p_r).unwrap_or(f64::NAN);
        // in t = ln s the log singularity at 0 is harmless
        let lower = (1e-14f64).ln();
        let scale = 1.0 / (1.0 + p_t / p_r);
        let upper = (60.0 * scale).ln();
        let density_t = |t: f64| pdf(t.exp()) * t.exp();
        let mass = gauss_legendre(density_t, lower, upper, 400);
        check((mass - 1.0).abs() <= 1e-4, || format!("({p_t}, {p_r}): mass {mass}"))?;
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let s = scale * 0.3 * k as f64;
            let integral = gauss_legendre(density_t, lower, s.ln(), 300);
            let cdf = af_equivalent_cdf(s, p_t, p_r).map_err(err)?;
            let e = (cdf - integral).abs();
            check(e <= 1e-3, || {
                format!("({p_t}, {p_r}) s={s}: cdf {cdf} vs ∫pdf {integral}")
            })?;
            worst = worst.max(e);
        }
        let mut worst_slope: f64 = 0.0;
        for k in 0..20 {
            let s = scale * 1e-3 * (5e3f64).powf(k as f64 / 19.0);
            let h = 1e-4 * s;
            let slope = (af_equivalent_cdf(s + h, p_t, p_r).map_err(err)?
                - af_equivalent_cdf(s - h, p_t, p_r).map_err(err)?)
                / (2.0 * h);
            let e = (slope - pdf(s)).abs();
            check(e <= 1e-3, || {
                format!("({p_t}, {p_r}) s={s}: dF/ds {slope} vs pdf {}", pdf(s))
            })?;
            worst_slope = worst_slope.max(e);
        }
        lines.push(format!(
            "({p_t}, {p_r}): mass {mass:.7}, cdf mismatch {worst:.1e}, slope mismatch {worst_slope:.1e}"
        ));
    }
    Ok(lines.join("; "))
}

fn c9_comparison() -> Outcome {
    let p_t = 100.0;
    let db: Vec<f64> = (0..=15).map(|k| 2.0 * k as f64).collect();
    let mut notes = Vec::new();
    for b in [0.5, 1.0, 2.0] {
        let mut curves: [Vec<f64>; 3] = Default::default();
        for &d in &db {
            let p_r = 10f64.powf(d / 10.0);
            let df = solve_decode_forward(&rayleigh(), &rayleigh(), p_t, p_r, b, 120)
                .map_err(|e| format!("DF b={b} {d} dB: {e}"))?
                .expected_distortion;
            let af = af_expected_distortion(p_t, p_r, b)
                .map_err(|e| format!("AF b={b} {d} dB: {e}"))?
                .expected_distortion();
            let sl = single_layer_distortion(&rayleigh(), &rayleigh(), p_t, p_r, b)
                .map_err(|e| format!("SL b={b} {d} dB: {e}"))?
                .distortion;
            check(df <= sl, || format!("(a) b={b} {d} dB: DF {df} > single-layer {sl}"))?;
            if b == 2.0 && d <= 10.0 {
                check(df <= af, || format!("(b) b=2 {d} dB: DF {df} > AF {af}"))?;
            }
            if b == 1.0 && d == 30.0 {
                let gap = (df - af).abs() / af;
                check(gap <= 0.05, || format!("(c) b=1 30 dB: |DF-AF|/AF = {gap:.4}"))?;
                notes.push(format!("b=1 30 dB gap {:.2}%", 100.0 * gap));
            }
            curves[0].push(df);
            curves[1].push(af);
            curves[2].push(sl);
        }
        for (name, c) in ["DF", "AF", "single-layer"].iter().zip(&curves) {
            for (i, w) in c.windows(2).enumerate() {
                check(w[1] <= w[0] + 1e-9, || {
                    format!("(d) b={b} {name} rises {} -> {} at {} dB", w[0], w[1], db[i + 1])
                })?;
            }
        }
    }
    Ok(format!("48 points per method; {}", notes.join(", ")))
}

fn c10_special_functions() -> Outcome {
    let mut worst_w: f64 = 0.0;
    for k in 0..=400 {
        let x = 10f64.powf(-12.0 + 24.0 * k as f64 / 400.0);
        let w = lambert_w(x).map_err(err)?;
        let e = rel(w * w.exp(), x);
        check(e <= 1e-10, || format!("W({x}) = {w}: residual {e}"))?;
        worst_w = worst_w.max(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_g: f64 = 0.0;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(-5.0..5.0);
        let x: f64 = 10f64.powf(rng.gen_range(-2.0..1.5));
        let lhs = upper_incomplete_gamma(a + 1.0, x).map_err(err)?;
        let rhs = a * upper_incomplete_gamma(a, x).map_err(err)? + (a * x.ln() - x).exp();
        let e = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
        check(e <= 1e-9, || format!("a={a} x={x}: Γ(a+1,x)={lhs} vs {rhs}"))?;
        worst_g = worst_g.max(e);
    }
    Ok(format!("Lambert W worst {worst_w:.1e}, recurrence worst {worst_g:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "1 rayleigh boundary gamma2 = 1",
            Duration::from_secs(1),
            c1_rayleigh_boundary,
        ),
        ("2 gamma growth region", Duration::from_secs(1), c2_gamma_growth_region),
        (
            "3 relay sign condition and monotone G",
            Duration::from_secs(30),
            c3_sign_condition,
        ),
        (
            "4 closed-form G derivative",
            Duration::from_secs(30),
            c4_derivative_identity,
        ),
        (
            "5 discrete-layer oracle equivalence",
            Duration::from_secs(120),
            c5_oracle_equivalence,
        ),
        ("6 parametric fit quality", Duration::from_secs(60), c6_fit_quality),
        (
            "7 source closed form vs fixed point",
            Duration::from_secs(10),
            c7_closed_form_consistency,
        ),
        ("8 AF equivalent channel", Duration::from_secs(60), c8_af_channel),
        (
            "9 DF / AF / single-layer comparison",
            Duration::from_secs(300),
            c9_comparison,
        ),
        ("10 special functions", Duration::from_secs(1), c10_special_functions),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; exceeded {budget:?} budget")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
