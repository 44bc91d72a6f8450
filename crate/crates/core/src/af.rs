//! Amplify-and-forward baseline over two Rayleigh hops.
//!
//! The relay scales and retransmits what it receives, so the destination
//! sees a single equivalent channel of strength `s`, normalized such that
//! the end-to-end SNR is `s·P_t`. Its density and distribution are
//! integrals over the second-hop strength `l > s P_t / P_r`; both are
//! evaluated with `l = s P_t/P_r + u²` and integrated in `ln u`, which
//! removes the endpoint singularity.

use std::io::Write;

use rayon::prelude::*;

use crate::distributions::FadingDistribution;
use crate::error::{Error, Result};
use crate::format::num;
use crate::numerics::Quadrature;
use crate::single_hop::{check_b, check_power, solve_single_hop, AllocationSolution};

pub const DEFAULT_GRID_POINTS: usize = 400;
/// Exponent beyond which `e^(-x)` is treated as zero.
const NEGLIGIBLE_EXPONENT: f64 = 700.0;
const TAIL_MASS: f64 = 1e-6;
const REL_TOL: f64 = 1e-10;

fn check_powers(p_t: f64, p_r: f64) -> Result<()> {
    check_power(p_t)?;
    check_power(p_r)
}

fn check_strength(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("equivalent strength must be positive, got {s}")))
    }
}

/// Integration range in `ln u` outside which the exponential factor is negligible.
fn u_range(s: f64, p_t: f64, p_r: f64) -> (f64, f64) {
    let l0 = s * p_t / p_r;
    let lo = (s * (1.0 / p_r + l0) / NEGLIGIBLE_EXPONENT).sqrt();
    let hi = NEGLIGIBLE_EXPONENT.sqrt();
    (lo.ln(), hi.ln())
}

/// `-l - s (1 + l P_r) / (l P_r - s P_t)` at `l = l0 + u²`.
#[inline]
fn exponent(s: f64, u2: f64, l: f64, p_r: f64) -> f64 {
    -l - s * (1.0 + l * p_r) / (u2 * p_r)
}

/// Density of the equivalent strength at `s > 0`.
pub fn af_equivalent_pdf(s: f64, p_t: f64, p_r: f64) -> Result<f64> {
    check_strength(s)?;
    check_powers(p_t, p_r)?;
    let l0 = s * p_t / p_r;
    let (v_lo, v_hi) = u_range(s, p_t, p_r);
    if v_lo >= v_hi {
        return Ok(0.0);
    }
    Quadrature::new(REL_TOL).integrate(
        |v: f64| {
            let u2 = (2.0 * v).exp();
            let l = l0 + u2;
            // 2 l (1 + l P_r) / (u² P_r) · e^(...)
            let ln_prefactor = (2.0 * l).ln() + (1.0 / p_r + l).ln() - 2.0 * v;
            (ln_prefactor + exponent(s, u2, l, p_r)).exp()
        },
        v_lo,
        v_hi,
    )
}

/// `1 - F_eq(s)`.
fn af_equivalent_survival(s: f64, p_t: f64, p_r: f64) -> Result<f64> {
    let l0 = s * p_t / p_r;
    let (v_lo, v_hi) = u_range(s, p_t, p_r);
    if v_lo >= v_hi {
        return Ok(0.0);
    }
    Quadrature::new(REL_TOL).integrate(
        |v: f64| {
            let u2 = (2.0 * v).exp();
            let l = l0 + u2;
            (2.0f64.ln() + 2.0 * v + exponent(s, u2, l, p_r)).exp()
        },
        v_lo,
        v_hi,
    )
}

/// Distribution function of the equivalent strength.
pub fn af_equivalent_cdf(s: f64, p_t: f64, p_r: f64) -> Result<f64> {
    check_powers(p_t, p_r)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    check_strength(s)?;
    Ok((1.0 - af_equivalent_survival(s, p_t, p_r)?).clamp(0.0, 1.0))
}

/// Equivalent channel tabulated on a log grid.
#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    pub s_grid: Vec<f64>,
    pub pdf_values: Vec<f64>,
    pub cdf_values: Vec<f64>,
    pub p_t: f64,
    pub p_r: f64,
}

impl EquivalentChannel {
    /// Log grid from far below the typical strength to where the tail
    /// mass drops under `1e-6`.
    pub fn build(p_t: f64, p_r: f64, points: usize) -> Result<Self> {
        check_powers(p_t, p_r)?;
        if points < 16 {
            return Err(Error::InvalidInput(format!(
                "equivalent channel needs >= 16 points, got {points}"
            )));
        }
        // s <= min(γ, l P_r/P_t): the tail decays at least like e^(-s (1 + P_t/P_r))
        let scale = 1.0 / (1.0 + p_t / p_r);
        let mut s_max = 12.0 * scale;
        while af_equivalent_survival(s_max, p_t, p_r)? > TAIL_MASS {
            s_max *= 1.5;
        }
        let s_min = 1e-7 * scale;
        let ratio = (s_max / s_min).ln();
        let s_grid: Vec<f64> = (0..points)
            .map(|i| s_min * (ratio * i as f64 / (points - 1) as f64).exp())
            .collect();
        let values: Vec<(f64, f64)> = s_grid
            .par_iter()
            .map(|&s| Ok((af_equivalent_pdf(s, p_t, p_r)?, af_equivalent_cdf(s, p_t, p_r)?)))
            .collect::<Result<_>>()?;
        let (pdf_values, cdf_values) = values.into_iter().unzip();
        Ok(Self {
            s_grid,
            pdf_values,
            cdf_values,
            p_t,
            p_r,
        })
    }

    pub fn to_distribution(&self) -> Result<FadingDistribution> {
        let knots: Vec<(f64, f64)> = self
            .s_grid
            .iter()
            .copied()
            .zip(self.pdf_values.iter().copied())
            .collect();
        FadingDistribution::tabulated(&knots)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,pdf,cdf")?;
        for ((s, p), c) in self.s_grid.iter().zip(&self.pdf_values).zip(&self.cdf_values) {
            writeln!(out, "{},{},{}", num(*s), num(*p), num(*c))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AfSolution {
    pub channel: EquivalentChannel,
    pub allocation: AllocationSolution,
}

impl AfSolution {
    pub fn expected_distortion(&self) -> f64 {
        self.allocation.expected_distortion
    }
}

/// Single-hop layering over the equivalent channel with budget `P_t`.
///
/// `s` is normalized so the end-to-end SNR is `s·P_t`; the source budget
/// therefore still multiplies the layer powers.
pub fn af_expected_distortion(p_t: f64, p_r: f64, b: f64) -> Result<AfSolution> {
    check_b(b)?;
    let channel = EquivalentChannel::build(p_t, p_r, DEFAULT_GRID_POINTS)?;
    let allocation = solve_single_hop(&channel.to_distribution()?, p_t, b)?;
    Ok(AfSolution { channel, allocation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_is_positive_and_finite() {
        for &s in &[1e-6, 1e-3, 0.1, 1.0, 5.0] {
            let v = af_equivalent_pdf(s, 100.0, 100.0).unwrap();
            assert!(v.is_finite() && v >= 0.0, "s={s}: {v}");
        }
        assert!(matches!(af_equivalent_pdf(0.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn strong_relay_is_transparent() {
        for &s in &[0.5, 1.0, 2.0] {
            let v = af_equivalent_pdf(s, 1.0, 1e4).unwrap();
            assert!((v - (-s).exp()).abs() < 1e-2, "s={s}: {v}");
        }
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        let (p_t, p_r) = (100.0, 100.0);
        for &s in &[0.05, 0.3] {
            let q = Quadrature::new(1e-9)
                .integrate(|x: f64| af_equivalent_pdf(x, p_t, p_r).unwrap(), 0.0, s)
                .unwrap();
            let c = af_equivalent_cdf(s, p_t, p_r).unwrap();
            assert!((q - c).abs() < 1e-3, "s={s}: {q} vs {c}");
        }
    }

    #[test]
    fn channel_table_round_trip() {
        let ch = EquivalentChannel::build(10.0, 10.0, 64).unwrap();
        assert!(ch.pdf_values.iter().all(|&p| p >= 0.0));
        assert!(*ch.cdf_values.last().unwrap() > 1.0 - 1e-5);
        let mut buf = Vec::new();
        ch.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("s,pdf,cdf\n"));
        ch.to_distribution().unwrap();
    }
}
