//! Relay (second-hop) layering given the relay's own decoded distortion.
//!
//! A relay that decoded the source down to distortion `D_r` can never
//! deliver less than `D_r`, so its strongest receivers are floored there.
//! When the unconstrained optimum already stays above the floor nothing
//! changes; otherwise the interval `[l1, l2]` satisfies both the power
//! budget and `l2² f(l2) = D_r^(-(b+1)/b) l1² f(l1)`.
//!
//! `G(D_r)` is the resulting expected destination distortion. Its slope has
//! the closed form `1 - l2 f(l2) - F(l2)` on boundary-active solutions.

use std::io::Write;

use rayon::prelude::*;

use crate::distributions::FadingDistribution;
use crate::error::{Error, Result};
use crate::format::num;
use crate::numerics::{find_root, fit_two_param, upper_incomplete_gamma, Bracket, MonotoneCubic};
use crate::single_hop::{self, check_b, check_power, ln_h, solve_single_hop, AllocationSolution};

/// Fewest boundary-active profile points accepted by the fit.
pub const MIN_FIT_POINTS: usize = 20;
/// Largest tolerated fraction of failed profile points.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayInterval {
    pub l1: f64,
    pub l2: f64,
    /// Whether the `D_r` floor binds at the strongest receivers.
    pub boundary_active: bool,
}

/// Relay problem for fixed distribution, power and `b`, caching the
/// unconstrained solution shared by every `D_r`.
#[derive(Debug, Clone)]
pub struct RelaySolver {
    dist: FadingDistribution,
    p_r: f64,
    b: f64,
    free: AllocationSolution,
    region_lo: f64,
    threshold: f64,
}

impl RelaySolver {
    pub fn new(dist: &FadingDistribution, p_r: f64, b: f64) -> Result<Self> {
        check_power(p_r)?;
        check_b(b)?;
        let free = solve_single_hop(dist, p_r, b)?;
        let region_lo = dist
            .growth_regions()
            .containing(free.x1)
            .map(|r| r.0)
            .ok_or(Error::OutsideGrowthRegion { x: free.x1 })?;
        let threshold = free.terminal_distortion();
        Ok(Self {
            dist: dist.clone(),
            p_r,
            b,
            free,
            region_lo,
            threshold,
        })
    }

    /// Unconstrained single-hop solution.
    pub fn unconstrained(&self) -> &AllocationSolution {
        &self.free
    }

    /// Largest `D_r` at which the floor does not bind.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn interval(&self, dr: f64) -> Result<RelayInterval> {
        if !(dr > 0.0 && dr <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "relay distortion must lie in (0, 1], got {dr}"
            )));
        }
        if dr == 1.0 {
            return Ok(RelayInterval {
                l1: self.region_lo,
                l2: self.region_lo,
                boundary_active: true,
            });
        }
        if self.threshold >= dr {
            return Ok(RelayInterval {
                l1: self.free.x1,
                l2: self.free.x2,
                boundary_active: false,
            });
        }
        let ln_k = -(self.b + 1.0) / self.b * dr.ln();
        let p_r = self.p_r;
        let residual = |t: f64| -> Result<f64> {
            let l1 = t.exp();
            let l2 = self.upper_edge(l1, ln_k)?;
            Ok(single_hop::power_unchecked(&self.dist, l1, l2, self.b)? - p_r)
        };

        // the unconstrained x1 spends less than the budget on a shorter interval
        let t_hi = self.free.x1.ln();
        let floor = (self.region_lo + single_hop::EDGE_OFFSET * 1e-3).ln();
        let mut t_lo = t_hi;
        loop {
            t_lo = (t_lo - std::f64::consts::LN_10).max(floor);
            if residual(t_lo)? > 0.0 {
                break;
            }
            if t_lo <= floor {
                return Err(Error::RelayIntervalCollapse { dr });
            }
        }
        let l1 = single_hop::find_root_fallible(residual, t_lo, t_hi, 1e-13)?.exp();
        let l2 = self.upper_edge(l1, ln_k)?;
        if !(l1 < l2) {
            return Err(Error::RelayIntervalCollapse { dr });
        }
        Ok(RelayInterval {
            l1,
            l2,
            boundary_active: true,
        })
    }

    /// `l2` with `ln h(l2) = ln K + ln h(l1)`, inside `(l1, x2*]`.
    fn upper_edge(&self, l1: f64, ln_k: f64) -> Result<f64> {
        let target = ln_k + ln_h(&self.dist, l1);
        let x2 = self.free.x2;
        let g = |t: f64| ln_h(&self.dist, t.exp()) - target;
        let (lo, hi) = (l1.ln(), x2.ln());
        if g(hi) <= 0.0 {
            return Ok(x2);
        }
        let t = find_root(g, Bracket::new(lo, hi)?, 1e-14)?;
        Ok(t.exp())
    }

    pub fn g(&self, dr: f64) -> Result<f64> {
        let iv = self.interval(dr)?;
        self.g_of_interval(dr, &iv)
    }

    fn g_of_interval(&self, dr: f64, iv: &RelayInterval) -> Result<f64> {
        if !iv.boundary_active {
            return Ok(self.free.expected_distortion);
        }
        let terminal = Some(dr);
        single_hop::distortion_unchecked(&self.dist, iv.l1, iv.l2, self.b, terminal)
    }

    fn row(&self, dr: f64) -> Result<ProfileRow> {
        let iv = self.interval(dr)?;
        let g = self.g_of_interval(dr, &iv)?;
        let g_d = if iv.boundary_active {
            g_derivative(&self.dist, iv.l2)
        } else {
            0.0
        };
        Ok(ProfileRow {
            dr,
            g,
            g_d,
            l1: iv.l1,
            l2: iv.l2,
            boundary_active: iv.boundary_active,
        })
    }
}

/// Relay interval for input distortion `dr`.
pub fn solve_relay_interval(dist: &FadingDistribution, p_r: f64, b: f64, dr: f64) -> Result<RelayInterval> {
    RelaySolver::new(dist, p_r, b)?.interval(dr)
}

/// Expected destination distortion `G(dr)`.
pub fn g_of_dr(dist: &FadingDistribution, p_r: f64, b: f64, dr: f64) -> Result<f64> {
    RelaySolver::new(dist, p_r, b)?.g(dr)
}

/// `dG/dD_r = 1 - l2 f(l2) - F(l2)` at a boundary-active `l2`.
pub fn g_derivative(dist: &FadingDistribution, l2: f64) -> f64 {
    dist.survival(l2) - l2 * dist.density(l2)
}

/// Log-spaced `D_r` grid ending at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub points: usize,
    pub lower: f64,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        Self {
            points: 120,
            lower: 1e-4,
        }
    }
}

impl ProfileGrid {
    pub fn new(points: usize, lower: f64) -> Result<Self> {
        if points < 2 || !(lower > 0.0 && lower < 1.0) {
            return Err(Error::InvalidInput(format!(
                "profile grid needs >= 2 points and 0 < lower < 1, got ({points}, {lower})"
            )));
        }
        Ok(Self { points, lower })
    }

    /// Grid concentrated on the boundary-active range `[threshold, 1]`.
    /// `G` is constant below the threshold, so holding the first value
    /// under the grid is exact.
    pub fn adaptive(threshold: f64, points: usize) -> Result<Self> {
        Self::new(points, (0.8 * threshold).clamp(1e-12, 0.5))
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let ln_lo = self.lower.ln();
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    1.0
                } else {
                    (ln_lo * (1.0 - i as f64 / (n - 1) as f64)).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub dr: f64,
    pub g: f64,
    pub g_d: f64,
    pub l1: f64,
    pub l2: f64,
    pub boundary_active: bool,
}

/// Tabulated `G(D_r)` with slopes and relay intervals.
#[derive(Debug, Clone)]
pub struct GProfile {
    pub rows: Vec<ProfileRow>,
    pub relay_power: f64,
    pub b: f64,
    /// `D_r` values whose solve failed; excluded from `rows`.
    pub failed: Vec<f64>,
    pub threshold: f64,
}

impl GProfile {
    pub fn dr_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.dr).collect()
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.g).collect()
    }

    pub fn g_d_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.g_d).collect()
    }

    pub fn active_rows(&self) -> impl Iterator<Item = &ProfileRow> {
        self.rows.iter().filter(|r| r.boundary_active)
    }

    /// Monotone interpolant of `G`, held constant below the grid.
    pub fn interpolant(&self) -> Result<GInterpolant> {
        let table = MonotoneCubic::new(self.dr_grid(), self.g_values())?;
        Ok(GInterpolant { table })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dr,g,g_d,l1,l2,boundary_active")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                num(r.dr),
                num(r.g),
                num(r.g_d),
                num(r.l1),
                num(r.l2),
                r.boundary_active
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GInterpolant {
    table: MonotoneCubic<f64>,
}

impl GInterpolant {
    pub fn value(&self, dr: f64) -> f64 {
        if dr <= self.table.x_min() {
            self.table.ys()[0]
        } else if dr >= self.table.x_max() {
            *self.table.ys().last().unwrap()
        } else {
            self.table.value(dr)
        }
    }
}

/// Tabulates `G` over `grid`, solving points in parallel. Failed points are
/// dropped; more than [`MAX_FAILURE_FRACTION`] of them is an error.
pub fn build_g_profile(dist: &FadingDistribution, p_r: f64, b: f64, grid: &ProfileGrid) -> Result<GProfile> {
    let solver = RelaySolver::new(dist, p_r, b)?;
    build_with(&solver, grid)
}

pub fn build_with(solver: &RelaySolver, grid: &ProfileGrid) -> Result<GProfile> {
    let drs = grid.values();
    let results: Vec<(f64, Result<ProfileRow>)> = drs.par_iter().map(|&dr| (dr, solver.row(dr))).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (dr, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("relay profile point D_r = {dr} failed: {e}");
                failed.push(dr);
            }
        }
    }
    let total = drs.len();
    if failed.len() as f64 > MAX_FAILURE_FRACTION * total as f64 || rows.len() < 2 {
        return Err(Error::ProfileFailures {
            failed: failed.len(),
            total,
        });
    }
    Ok(GProfile {
        rows,
        relay_power: solver.p_r,
        b: solver.b,
        failed,
        threshold: solver.threshold,
    })
}

/// Two-parameter model of the slope, `G_D(D) = exp(-(D^(-1/B) - 1)/p_r)`,
/// and its antiderivative `G(D) = (B/p_r^B) e^(1/p_r) Γ(-B, D^(-1/B)/p_r) + C`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(non_snake_case)]
pub struct ParametricFit {
    pub p_r: f64,
    pub B: f64,
    /// Relative RMS residual of the slope fit.
    pub rms_rel: f64,
    /// Integration constant `C`.
    pub g_offset: f64,
}

impl ParametricFit {
    #[allow(non_snake_case)]
    pub fn new(p_r: f64, B: f64, rms_rel: f64, g_offset: f64) -> Result<Self> {
        if !(p_r > 0.0 && B > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fit parameters must be positive, got ({p_r}, {B})"
            )));
        }
        if !(rms_rel <= 0.5) {
            return Err(Error::FamilyMismatch { rms_rel });
        }
        Ok(Self {
            p_r,
            B,
            rms_rel,
            g_offset,
        })
    }

    pub fn g_d(&self, dr: f64) -> f64 {
        slope_model(self.p_r, self.B, dr)
    }

    /// Closed-form `G` without the offset.
    pub fn g_shape(&self, dr: f64) -> Result<f64> {
        let (p, big_b) = (self.p_r, self.B);
        let x = dr.powf(-1.0 / big_b) / p;
        let ln_scale = big_b.ln() - big_b * p.ln() + 1.0 / p;
        Ok((ln_scale).exp() * upper_incomplete_gamma(-big_b, x)?)
    }

    pub fn g(&self, dr: f64) -> Result<f64> {
        Ok(self.g_shape(dr)? + self.g_offset)
    }
}

fn slope_model(p: f64, big_b: f64, d: f64) -> f64 {
    (-(d.powf(-1.0 / big_b) - 1.0) / p).exp()
}

/// Fits the slope model to the boundary-active `(D_r, G_D)` points, then
/// picks the offset minimizing the relative squared error against `G`.
pub fn fit_g_parametric(profile: &GProfile) -> Result<ParametricFit> {
    let samples: Vec<(f64, f64)> = profile
        .active_rows()
        .filter(|r| r.g_d > 0.0 && r.g_d <= 1.0)
        .map(|r| (r.dr, r.g_d))
        .collect();
    if samples.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidInput(format!(
            "fit needs at least {MIN_FIT_POINTS} boundary-active points with positive slope, got {}",
            samples.len()
        )));
    }
    let fit = fit_two_param(slope_model, &samples)?;
    let mut shape = ParametricFit::new(fit.first, fit.second, fit.rms_rel, 0.0)?;
    let (mut num_acc, mut den_acc) = (0.0, 0.0);
    for r in &profile.rows {
        let w = 1.0 / (r.g * r.g);
        num_acc += w * (r.g - shape.g_shape(r.dr)?);
        den_acc += w;
    }
    shape.g_offset = num_acc / den_acc;
    Ok(shape)
}
