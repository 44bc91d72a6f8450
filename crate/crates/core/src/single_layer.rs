//! Single-rate decode-and-forward baseline.
//!
//! Source and relay each send one codeword at thresholds `γ0` and `l0`.
//! The destination reconstructs only when both hops are above threshold,
//! at the smaller of the two rates; any outage leaves unit distortion:
//! `D = 1 - Pr[γ ≥ γ0] Pr[l ≥ l0] (1 - e^(-b R))`,
//! `R = min(ln(1 + γ0 P_t), ln(1 + l0 P_r))`.

use crate::distributions::FadingDistribution;
use crate::error::Result;
use crate::single_hop::{check_b, check_power};

const GRID: usize = 200;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleLayerSolution {
    pub distortion: f64,
    pub gamma0: f64,
    pub l0: f64,
}

/// Baseline distortion at the given thresholds.
pub fn single_layer_objective(
    dist_t: &FadingDistribution,
    dist_r: &FadingDistribution,
    p_t: f64,
    p_r: f64,
    b: f64,
    gamma0: f64,
    l0: f64,
) -> f64 {
    let rate = (gamma0 * p_t).ln_1p().min((l0 * p_r).ln_1p());
    1.0 + dist_t.survival(gamma0) * dist_r.survival(l0) * (-b * rate).exp_m1()
}

/// Best thresholds by a 200×200 log grid refined with coordinate descent.
pub fn single_layer_distortion(
    dist_t: &FadingDistribution,
    dist_r: &FadingDistribution,
    p_t: f64,
    p_r: f64,
    b: f64,
) -> Result<SingleLayerSolution> {
    check_power(p_t)?;
    check_power(p_r)?;
    check_b(b)?;
    let objective = |lg: f64, ll: f64| single_layer_objective(dist_t, dist_r, p_t, p_r, b, lg.exp(), ll.exp());
    let axis = |d: &FadingDistribution| {
        let (lo, hi) = d.support_hint();
        let (a, z) = (lo.ln(), hi.ln());
        let step = (z - a) / (GRID - 1) as f64;
        ((0..GRID).map(move |i| a + step * i as f64), step)
    };
    let (t_axis, t_step) = axis(dist_t);
    let (r_axis, r_step) = axis(dist_r);
    let r_values: Vec<f64> = r_axis.collect();

    let mut best = (0.0, 0.0, f64::INFINITY);
    for lg in t_axis {
        for &ll in &r_values {
            let v = objective(lg, ll);
            if v < best.2 {
                best = (lg, ll, v);
            }
        }
    }

    let (mut lg, mut ll, mut value) = best;
    for _ in 0..100 {
        let before = value;
        lg = golden_section(|x| objective(x, ll), lg - t_step, lg + t_step);
        ll = golden_section(|y| objective(lg, y), ll - r_step, ll + r_step);
        value = objective(lg, ll);
        if value > before {
            // refinement never loses to the grid point it started from
            (lg, ll, value) = best;
            break;
        }
        best = (lg, ll, value);
        if before - value <= 1e-15 {
            break;
        }
    }
    Ok(SingleLayerSolution {
        distortion: value,
        gamma0: lg.exp(),
        l0: ll.exp(),
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
