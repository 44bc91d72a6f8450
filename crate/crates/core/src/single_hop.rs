//! Broadcast-approach layering for a single fading hop.
//!
//! The layering is described by the auxiliary function `I(x) = e^(R(x))`,
//! the exponential of the cumulative rate decodable at strength `x`, so the
//! distortion at strength `x` is `I(x)^(-b)`. On the allocated interval
//! `[x1, x2]` the optimum is `I(x) = (x² f(x) / (x1² f(x1)))^(1/(b+1))`.
//! Below `x1` nothing is decoded, above `x2` no further layers are sent.

use std::sync::Arc;

use crate::distributions::FadingDistribution;
use crate::error::{Error, Result};
use crate::numerics::{find_root, Bracket, EvaluableMap, Quadrature};
use crate::Map;

pub(crate) const INTEGRAL_REL_TOL: f64 = 1e-10;
/// Absolute floor: integrands near `x1 = x2` carry rounding noise far above
/// any relative target.
pub(crate) const INTEGRAL_ABS_TOL: f64 = 1e-15;
/// Offset keeping root brackets strictly inside an interval.
pub(crate) const EDGE_OFFSET: f64 = 1e-9;
const BOUNDARY_SCAN_POINTS: usize = 400;

/// Optimal layering of one hop under a power budget.
#[derive(Debug, Clone)]
pub struct AllocationSolution {
    pub x1: f64,
    pub x2: f64,
    pub b: f64,
    pub expected_distortion: f64,
    pub power_used: f64,
    /// Auxiliary function; 1 below `x1`, frozen at `I(x2)` above `x2`.
    pub i: Map,
}

impl AllocationSolution {
    /// Distortion delivered to a receiver of strength `x`.
    pub fn distortion_at(&self, x: f64) -> Result<f64> {
        Ok(self.i.eval(x)?.powf(-self.b))
    }

    /// Distortion of the strongest receivers, `I(x2)^(-b)`.
    pub fn terminal_distortion(&self) -> f64 {
        self.distortion_at(self.x2).unwrap_or(1.0)
    }
}

pub(crate) fn quadrature() -> Quadrature<f64> {
    Quadrature::new(INTEGRAL_REL_TOL).with_abs_tol(INTEGRAL_ABS_TOL)
}

/// `ln(x² f(x))`.
#[inline]
pub(crate) fn ln_h(dist: &FadingDistribution, x: f64) -> f64 {
    2.0 * x.ln() + dist.ln_density(x)
}

/// Auxiliary value given the precomputed `ln h(x1)`.
#[inline]
pub(crate) fn aux(dist: &FadingDistribution, x: f64, ln_h1: f64, b: f64) -> f64 {
    ((ln_h(dist, x) - ln_h1) / (b + 1.0)).exp()
}

/// `I(x) - 1` without cancellation near `x1`.
#[inline]
fn aux_m1(dist: &FadingDistribution, x: f64, ln_h1: f64, b: f64) -> f64 {
    ((ln_h(dist, x) - ln_h1) / (b + 1.0)).exp_m1()
}

fn check_interval(dist: &FadingDistribution, x1: f64, x2: f64) -> Result<(f64, f64)> {
    if !(x1 > 0.0) || !x1.is_finite() {
        return Err(Error::Domain(format!("allocation start must be positive, got {x1}")));
    }
    if x2 < x1 {
        return Err(Error::InvalidInput(format!(
            "allocation interval reversed: [{x1}, {x2}]"
        )));
    }
    let region = dist
        .growth_regions()
        .containing(x1)
        .ok_or(Error::OutsideGrowthRegion { x: x1 })?;
    if x2 >= region.1 {
        return Err(Error::OutsideGrowthRegion { x: x2 });
    }
    Ok(region)
}

/// `I(x)` for the layering that starts at `x1`.
pub fn auxiliary_value(dist: &FadingDistribution, x: f64, x1: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    if x < x1 {
        return Err(Error::OutsideGrowthRegion { x });
    }
    check_interval(dist, x1, x)?;
    if x == x1 {
        return Ok(1.0);
    }
    Ok(aux(dist, x, ln_h(dist, x1), b))
}

/// Power spent by the layering on `[x1, x2]`:
/// `∫ I(l)/l² dl + I(x2)/x2 - 1/x1`, exactly 0 when `x1 = x2`.
pub fn power_of(dist: &FadingDistribution, x1: f64, x2: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    check_interval(dist, x1, x2)?;
    power_unchecked(dist, x1, x2, b)
}

/// Evaluated as `∫ (I(l) - 1)/l² dl + (I(x2) - 1)/x2`, which telescopes to
/// the same value but never subtracts large terms; integrated in `ln l`.
pub(crate) fn power_unchecked(dist: &FadingDistribution, x1: f64, x2: f64, b: f64) -> Result<f64> {
    if x1 >= x2 {
        return Ok(0.0);
    }
    let ln_h1 = ln_h(dist, x1);
    let body = quadrature().integrate(
        |t: f64| {
            let l = t.exp();
            aux_m1(dist, l, ln_h1, b) / l
        },
        x1.ln(),
        x2.ln(),
    )?;
    Ok(body + aux_m1(dist, x2, ln_h1, b) / x2)
}

/// Expected distortion of the layering on `[x1, x2]` with the strongest
/// receivers' distortion replaced by `terminal` when given.
pub(crate) fn distortion_unchecked(
    dist: &FadingDistribution,
    x1: f64,
    x2: f64,
    b: f64,
    terminal: Option<f64>,
) -> Result<f64> {
    if x1 >= x2 {
        return Ok(dist.cumulative(x1) + dist.survival(x1) * terminal.unwrap_or(1.0));
    }
    let ln_h1 = ln_h(dist, x1);
    let body = quadrature().integrate(
        |t: f64| {
            let l = t.exp();
            (dist.ln_density(l) + t - b * (ln_h(dist, l) - ln_h1) / (b + 1.0)).exp()
        },
        x1.ln(),
        x2.ln(),
    )?;
    let last = terminal.unwrap_or_else(|| aux(dist, x2, ln_h1, b).powf(-b));
    Ok(body + dist.cumulative(x1) + dist.survival(x2) * last)
}

/// Roots of `x f(x) - (1 - F(x))` inside each growth interval.
pub(crate) fn boundary_roots(dist: &FadingDistribution) -> Result<Vec<(f64, (f64, f64))>> {
    let g = |x: f64| x * dist.density(x) - dist.survival(x);
    let mut roots = Vec::new();
    for &(lo, hi) in &dist.growth_regions().intervals {
        // log-spaced scan: the boundary may sit close to the lower edge
        let start = if lo > 0.0 { lo } else { hi * 1e-9 };
        let ratio = (hi / start).ln();
        let mut prev = (start, g(start));
        for k in 1..=BOUNDARY_SCAN_POINTS {
            let x = if k == BOUNDARY_SCAN_POINTS {
                hi * (1.0 - 1e-12)
            } else {
                start * (ratio * k as f64 / BOUNDARY_SCAN_POINTS as f64).exp()
            };
            let gx = g(x);
            if prev.1 == 0.0 {
                roots.push((prev.0, (lo, hi)));
            } else if prev.1 < 0.0 && gx > 0.0 || prev.1 > 0.0 && gx < 0.0 {
                let r = find_root(g, Bracket::new(prev.0, x)?, 1e-15 * x.max(1.0))?;
                roots.push((r, (lo, hi)));
            }
            prev = (x, gx);
        }
    }
    if roots.is_empty() {
        return Err(Error::BoundaryUnsolvable(format!(
            "x f(x) = 1 - F(x) has no root in the growth region of {dist}"
        )));
    }
    Ok(roots)
}

/// Finds `x1` in `(lo + offset, x2 - offset)` where a power that decreases
/// in `x1` meets `budget`. Budgets too small to resolve return the upper end.
pub(crate) fn solve_lower_edge<P>(power: P, lo: f64, x2: f64, budget: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
{
    let t_hi = (x2 - EDGE_OFFSET.min(0.5 * (x2 - lo))).ln();
    let t_lo = if lo > 0.0 {
        (lo + EDGE_OFFSET).ln()
    } else {
        EDGE_OFFSET.ln()
    };
    if !(t_lo < t_hi) {
        return Err(Error::InvalidInput(format!("empty allocation range ({lo}, {x2})")));
    }
    let residual = |t: f64| power(t.exp()).map(|p| p - budget);
    let r_hi = residual(t_hi)?;
    if r_hi >= 0.0 {
        return Ok(t_hi.exp());
    }
    let r_lo = residual(t_lo)?;
    if r_lo < 0.0 {
        return Err(Error::InfeasiblePower(format!(
            "budget {budget} exceeds the {} reachable with x1 -> {}",
            r_lo + budget,
            t_lo.exp()
        )));
    }
    Ok(find_root_fallible(residual, t_lo, t_hi, 1e-13)?.exp())
}

/// Brent root of a fallible function; the first inner error wins over
/// any convergence failure it caused.
pub(crate) fn find_root_fallible<G>(g: G, lo: f64, hi: f64, abs_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut failure = None;
    let root = find_root(
        |t| match g(t) {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        Bracket::new(lo, hi)?,
        abs_tol,
    );
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

pub(crate) fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "mismatch factor b must be positive, got {b}"
        )))
    }
}

pub(crate) fn check_power(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("power budget must be positive, got {p}")))
    }
}

/// Minimum expected distortion of a single hop with power budget `p`.
pub fn solve_single_hop(dist: &FadingDistribution, p: f64, b: f64) -> Result<AllocationSolution> {
    check_power(p)?;
    check_b(b)?;
    let mut best: Option<AllocationSolution> = None;
    let mut last_err = None;
    for (x2, (lo, _)) in boundary_roots(dist)? {
        match solve_on(dist, p, b, lo, x2) {
            Ok(s) => {
                if best
                    .as_ref()
                    .is_none_or(|b| s.expected_distortion < b.expected_distortion)
                {
                    best = Some(s);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap())
}

fn solve_on(dist: &FadingDistribution, p: f64, b: f64, lo: f64, x2: f64) -> Result<AllocationSolution> {
    let x1 = solve_lower_edge(|x1| power_unchecked(dist, x1, x2, b), lo, x2, p)?;
    let power_used = power_unchecked(dist, x1, x2, b)?;
    let expected_distortion = distortion_unchecked(dist, x1, x2, b, None)?;
    Ok(AllocationSolution {
        x1,
        x2,
        b,
        expected_distortion,
        power_used,
        i: layering_map(dist, x1, x2, b),
    })
}

pub(crate) fn layering_map(dist: &FadingDistribution, x1: f64, x2: f64, b: f64) -> Map {
    let dist = Arc::new(dist.clone());
    let ln_h1 = ln_h(&dist, x1);
    let top = aux(&dist, x2, ln_h1, b);
    EvaluableMap::rule(move |x: f64| {
        if x <= x1 {
            1.0
        } else if x >= x2 {
            top
        } else {
            aux(&dist, x, ln_h1, b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rayleigh() -> FadingDistribution {
        FadingDistribution::rayleigh()
    }

    #[test]
    fn auxiliary_substitution() {
        let v = auxiliary_value(&rayleigh(), 0.5, 0.2, 1.0).unwrap();
        let expect = ((0.25 * (-0.5f64).exp()) / (0.04 * (-0.2f64).exp())).sqrt();
        assert!((v - expect).abs() < 1e-14 * expect);
        assert_eq!(auxiliary_value(&rayleigh(), 0.3, 0.3, 1.0).unwrap(), 1.0);

        let g = FadingDistribution::gamma(2.0, 1.0).unwrap();
        let f = |x: f64| x * (-x).exp();
        let expect = (f(1.0) / (0.09 * f(0.3))).powf(1.0 / 3.0);
        assert!((auxiliary_value(&g, 1.0, 0.3, 2.0).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn auxiliary_outside_region() {
        assert!(matches!(
            auxiliary_value(&rayleigh(), 2.5, 0.2, 1.0),
            Err(Error::OutsideGrowthRegion { .. })
        ));
    }

    #[test]
    fn zero_width_power() {
        assert_eq!(power_of(&rayleigh(), 0.4, 0.4, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn power_matches_literal_form() {
        let d = rayleigh();
        let (x1, x2) = (0.2f64, 1.0f64);
        let i = |l: f64| -> f64 { ((l * l * (-l).exp()) / (x1 * x1 * (-x1).exp())).sqrt() };
        let body = Quadrature::new(1e-12).integrate(|l| i(l) / (l * l), x1, x2).unwrap();
        let literal = body + i(x2) / x2 - 1.0 / x1;
        let v = power_of(&d, x1, x2, 1.0).unwrap();
        assert!((v - literal).abs() < 1e-10 * literal, "{v} vs {literal}");
    }

    #[test]
    fn rayleigh_reference_solution() {
        let s = solve_single_hop(&rayleigh(), 100.0, 1.0).unwrap();
        assert!((s.x2 - 1.0).abs() < 1e-12);
        assert!((s.power_used - 100.0).abs() < 1e-6 * 100.0);
        assert!((s.x1 - 0.028038).abs() < 1e-5, "{}", s.x1);
        assert!(
            (s.expected_distortion - 0.131351).abs() < 1e-5,
            "{}",
            s.expected_distortion
        );
    }

    #[test]
    fn boundary_residual() {
        let g = FadingDistribution::gamma(2.0, 1.0).unwrap();
        let s = solve_single_hop(&g, 10.0, 1.0).unwrap();
        let r = s.x2 * g.density(s.x2) - g.survival(s.x2);
        assert!(r.abs() < 1e-8);
        assert!(s.x2 < 3.0);
    }

    #[test]
    fn tiny_budget_decodes_nothing() {
        let s = solve_single_hop(&rayleigh(), 1e-12, 1.0).unwrap();
        assert!(s.expected_distortion > 1.0 - 1e-6);
        assert!(s.x1 < s.x2);
    }

    #[test]
    fn monotone_in_power() {
        let d = rayleigh();
        let mut prev = 1.0;
        for k in 0..10 {
            let p = 0.1 * 10f64.powf(4.0 * k as f64 / 9.0);
            let s = solve_single_hop(&d, p, 1.0).unwrap();
            assert!(s.expected_distortion <= prev + 1e-12);
            prev = s.expected_distortion;
        }
    }

    #[test]
    fn layering_is_nondecreasing() {
        let s = solve_single_hop(&rayleigh(), 10.0, 2.0).unwrap();
        let mut prev = 0.0;
        for k in 0..=200 {
            let x = s.x1 + (s.x2 - s.x1) * k as f64 / 200.0;
            let v = s.i.eval(x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(s.i.eval(s.x1).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            solve_single_hop(&rayleigh(), 0.0, 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            solve_single_hop(&rayleigh(), 1.0, -1.0),
            Err(Error::InvalidInput(_))
        ));
    }
}
