//! Source (first-hop) layering against the relay's distortion profile.
//!
//! The relay input distortion at first-hop strength `γ` is
//! `D_r(γ) = I_t(γ)^(-b)`. On `[γ1, γ2]` the layering satisfies the fixed
//! point `I_t(γ)^(b+1) = γ² f(γ) G_D(I_t(γ)^(-b)) / (γ1² f(γ1))` with `G_D`
//! taken from the parametric fit. For Rayleigh first hops this has a
//! Lambert-W closed form.

use std::io::Write;
use std::sync::Arc;

use crate::distributions::FadingDistribution;
use crate::error::{Error, Result};
use crate::format::num;
use crate::numerics::{find_root, lambert_w_of_exp, Bracket, EvaluableMap};
use crate::relay::{build_with, fit_g_parametric, GProfile, ParametricFit, ProfileGrid, RelaySolver};
use crate::single_hop::{self, boundary_roots, check_b, check_power, ln_h, quadrature};
use crate::Map;

/// Largest accepted mismatch between the closed form and the fixed point.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
const CLOSED_FORM_CHECKS: usize = 16;

/// Upper edge `γ2`: the root of `γ f(γ) = 1 - F(γ)`.
pub fn solve_gamma2(dist: &FadingDistribution) -> Result<f64> {
    Ok(boundary_roots(dist)?[0].0)
}

/// Rayleigh closed form of `I_t(γ)` for the layering starting at `γ1`.
pub fn source_auxiliary_closed_form(gamma: f64, gamma1: f64, b: f64, fit: &ParametricFit) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma >= gamma1 && b > 0.0) || !gamma.is_finite() {
        return Err(Error::ClosedFormDomain(format!(
            "need 0 < γ1 <= γ and b > 0, got γ = {gamma}, γ1 = {gamma1}, b = {b}"
        )));
    }
    let ln_r = 2.0 * (gamma / gamma1).ln() + gamma1 - gamma;
    closed_form_from_ln_ratio(ln_r, b, fit)
}

/// `I = (W(c e^c R^k) / c)^(B/b)` with `c = b/(p B (b+1))`, `k = b/(B (b+1))`.
fn closed_form_from_ln_ratio(ln_r: f64, b: f64, fit: &ParametricFit) -> Result<f64> {
    let (p, big_b) = (fit.p_r, fit.B);
    let c = b / (p * big_b * (b + 1.0));
    let k = b / (big_b * (b + 1.0));
    let ln_arg = c.ln() + c + k * ln_r;
    let w = lambert_w_of_exp(ln_arg)?;
    let value = (big_b / b * (w.ln() - c.ln())).exp();
    if !value.is_finite() || value < 1.0 - 1e-12 {
        return Err(Error::ClosedFormDomain(format!("closed form gave {value}")));
    }
    Ok(value.max(1.0))
}

/// Solves the fixed point for `y = ln I_t(γ)` directly:
/// `(b+1) y + (e^(y b/B) - 1)/p_r = ln(γ² f(γ) / (γ1² f(γ1)))`.
pub fn source_auxiliary_fixed_point(
    dist: &FadingDistribution,
    gamma: f64,
    gamma1: f64,
    b: f64,
    fit: &ParametricFit,
) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma >= gamma1) {
        return Err(Error::Domain(format!(
            "need 0 < γ1 <= γ, got γ = {gamma}, γ1 = {gamma1}"
        )));
    }
    fixed_point_from_ln_ratio(ln_h(dist, gamma) - ln_h(dist, gamma1), b, fit)
}

fn fixed_point_from_ln_ratio(ln_r: f64, b: f64, fit: &ParametricFit) -> Result<f64> {
    if ln_r <= 0.0 {
        return Ok(1.0);
    }
    let (p, big_b) = (fit.p_r, fit.B);
    let g = |y: f64| (b + 1.0) * y + (y * b / big_b).exp_m1() / p - ln_r;
    let hi = ln_r / (b + 1.0);
    if g(hi) <= 0.0 {
        return Ok(hi.exp());
    }
    let y = find_root(g, Bracket::new(0.0, hi)?, 1e-15 * hi.max(1.0))?;
    Ok(y.exp())
}

/// Source layering anchored at `γ1`.
#[derive(Debug, Clone)]
struct SourceLayering {
    dist: FadingDistribution,
    b: f64,
    fit: ParametricFit,
    ln_h1: f64,
    closed_form: bool,
}

impl SourceLayering {
    fn new(dist: &FadingDistribution, gamma1: f64, gamma2: f64, b: f64, fit: &ParametricFit) -> Self {
        let mut layering = Self {
            dist: dist.clone(),
            b,
            fit: *fit,
            ln_h1: ln_h(dist, gamma1),
            closed_form: matches!(dist, FadingDistribution::Rayleigh),
        };
        if layering.closed_form && !layering.closed_form_agrees(gamma1, gamma2) {
            log::warn!("closed-form source layering disagrees with the fixed point; solving pointwise");
            layering.closed_form = false;
        }
        layering
    }

    fn closed_form_agrees(&self, gamma1: f64, gamma2: f64) -> bool {
        (0..=CLOSED_FORM_CHECKS).all(|k| {
            let g = gamma1 + (gamma2 - gamma1) * k as f64 / CLOSED_FORM_CHECKS as f64;
            let ln_r = ln_h(&self.dist, g) - self.ln_h1;
            match (
                closed_form_from_ln_ratio(ln_r, self.b, &self.fit),
                fixed_point_from_ln_ratio(ln_r, self.b, &self.fit),
            ) {
                (Ok(a), Ok(f)) => (a - f).abs() <= CLOSED_FORM_TOLERANCE * f,
                _ => false,
            }
        })
    }

    fn value(&self, gamma: f64) -> Result<f64> {
        let ln_r = ln_h(&self.dist, gamma) - self.ln_h1;
        if ln_r <= 0.0 {
            return Ok(1.0);
        }
        if self.closed_form {
            closed_form_from_ln_ratio(ln_r, self.b, &self.fit)
        } else {
            fixed_point_from_ln_ratio(ln_r, self.b, &self.fit)
        }
    }

    /// `∫ (I - 1)/γ² dγ + (I(γ2) - 1)/γ2`, integrated in `ln γ`.
    fn power(&self, gamma1: f64, gamma2: f64) -> Result<f64> {
        if gamma1 >= gamma2 {
            return Ok(0.0);
        }
        let mut failure = None;
        let body = quadrature().integrate(
            |t: f64| {
                let g = t.exp();
                match self.value(g) {
                    Ok(i) => (i - 1.0) / g,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            gamma1.ln(),
            gamma2.ln(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(body? + (self.value(gamma2)? - 1.0) / gamma2)
    }
}

fn region_lower_edge(dist: &FadingDistribution, gamma2: f64) -> Result<f64> {
    dist.growth_regions()
        .containing(gamma2)
        .map(|r| r.0)
        .ok_or(Error::OutsideGrowthRegion { x: gamma2 })
}

/// Lower edge `γ1` at which the source layering spends exactly `p_t`.
pub fn solve_gamma1(dist: &FadingDistribution, p_t: f64, b: f64, fit: &ParametricFit, gamma2: f64) -> Result<f64> {
    check_power(p_t)?;
    check_b(b)?;
    let lo = region_lower_edge(dist, gamma2)?;
    single_hop::solve_lower_edge(
        |g1| SourceLayering::new(dist, g1, gamma2, b, fit).power(g1, gamma2),
        lo,
        gamma2,
        p_t,
    )
}

/// Result of the decode-and-forward optimization.
#[derive(Debug, Clone)]
pub struct EndToEndSolution {
    pub gamma1: f64,
    pub gamma2: f64,
    pub b: f64,
    /// Source auxiliary function; 1 below `γ1`, frozen above `γ2`.
    pub i_t: Map,
    pub expected_distortion: f64,
    pub fit: ParametricFit,
    pub second_hop: GProfile,
}

impl EndToEndSolution {
    /// Writes `samples` rows of `gamma,I_t,D_r` over `[γ1, γ2]`, then the
    /// summary header and line.
    pub fn write_csv<W: Write>(&self, mut out: W, samples: usize) -> Result<()> {
        writeln!(out, "gamma,I_t,D_r")?;
        let n = samples.max(2);
        for k in 0..n {
            let g = self.gamma1 + (self.gamma2 - self.gamma1) * k as f64 / (n - 1) as f64;
            let i = self.i_t.eval(g)?;
            writeln!(out, "{},{},{}", num(g), num(i), num(i.powf(-self.b)))?;
        }
        writeln!(out, "gamma1,gamma2,distortion,p_r,B,rms_rel")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(self.gamma1),
            num(self.gamma2),
            num(self.expected_distortion),
            num(self.fit.p_r),
            num(self.fit.B),
            num(self.fit.rms_rel)
        )?;
        Ok(())
    }
}

/// Expected destination distortion
/// `∫ f(γ) G(D_r(γ)) dγ + F(γ1) G(1) + (1 - F(γ2)) G(D_r(γ2))`, with `G`
/// interpolated from the profile and `G_D` from the fit.
pub fn end_to_end_distortion(
    dist_t: &FadingDistribution,
    p_t: f64,
    b: f64,
    profile: &GProfile,
    fit: &ParametricFit,
) -> Result<EndToEndSolution> {
    check_power(p_t)?;
    check_b(b)?;
    let gamma2 = solve_gamma2(dist_t)?;
    let gamma1 = solve_gamma1(dist_t, p_t, b, fit, gamma2)?;
    let layering = Arc::new(SourceLayering::new(dist_t, gamma1, gamma2, b, fit));
    let g = profile.interpolant()?;
    let g_at = |gamma: f64| -> Result<f64> { Ok(g.value(layering.value(gamma)?.powf(-b))) };

    let mut failure = None;
    let body = quadrature().integrate(
        |t: f64| {
            let gamma = t.exp();
            match g_at(gamma) {
                Ok(v) => (dist_t.ln_density(gamma) + t).exp() * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        gamma1.ln(),
        gamma2.ln(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let expected_distortion =
        body? + dist_t.cumulative(gamma1) * g.value(1.0) + dist_t.survival(gamma2) * g_at(gamma2)?;

    let top = layering.value(gamma2)?;
    let map_layering = Arc::clone(&layering);
    let i_t = EvaluableMap::rule(move |x: f64| {
        if x <= gamma1 {
            1.0
        } else if x >= gamma2 {
            top
        } else {
            map_layering.value(x).unwrap_or(f64::NAN)
        }
    });
    Ok(EndToEndSolution {
        gamma1,
        gamma2,
        b,
        i_t,
        expected_distortion,
        fit: *fit,
        second_hop: profile.clone(),
    })
}

/// Full pipeline: relay profile on a grid adapted to the active range,
/// slope fit, then the source layering.
pub fn solve_decode_forward(
    dist_t: &FadingDistribution,
    dist_r: &FadingDistribution,
    p_t: f64,
    p_r: f64,
    b: f64,
    grid_points: usize,
) -> Result<EndToEndSolution> {
    let solver = RelaySolver::new(dist_r, p_r, b)?;
    let grid = ProfileGrid::adaptive(solver.threshold(), grid_points)?;
    let profile = build_with(&solver, &grid)?;
    let fit = fit_g_parametric(&profile)?;
    end_to_end_distortion(dist_t, p_t, b, &profile, &fit)
}
