//! Two-parameter least-squares fitting on relative residuals.
//!
//! Coarse log-spaced grid search over a positive parameter box, then
//! Nelder–Mead refinement in log coordinates.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fitted parameters and the relative RMS residual at the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParamFit<S> {
    pub first: S,
    pub second: S,
    pub rms_rel: S,
}

/// Search box and effort for [`fit_two_param_in`].
#[derive(Debug, Clone, Copy)]
pub struct FitSettings<S> {
    pub first_range: (S, S),
    pub second_range: (S, S),
    pub grid: usize,
    pub max_iterations: usize,
    /// Fits whose relative RMS exceeds this are rejected.
    pub reject_above: S,
}

impl<S: Scalar> Default for FitSettings<S> {
    fn default() -> Self {
        Self {
            first_range: (S::lit(1e-3), S::lit(1e4)),
            second_range: (S::lit(1e-2), S::lit(1e2)),
            grid: 40,
            max_iterations: 4000,
            reject_above: S::lit(0.5),
        }
    }
}

pub const MIN_SAMPLES: usize = 8;

/// Fits `model(first, second, x)` to `(x, target)` samples with default settings.
pub fn fit_two_param<S, M>(model: M, samples: &[(S, S)]) -> Result<TwoParamFit<S>>
where
    S: Scalar,
    M: Fn(S, S, S) -> S,
{
    fit_two_param_in(model, samples, &FitSettings::default())
}

pub fn fit_two_param_in<S, M>(model: M, samples: &[(S, S)], settings: &FitSettings<S>) -> Result<TwoParamFit<S>>
where
    S: Scalar,
    M: Fn(S, S, S) -> S,
{
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "fit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(x, t)| !x.is_finite() || !(t > S::zero() && t <= S::one()))
    {
        return Err(Error::InvalidInput("fit targets must lie in (0, 1]".into()));
    }
    let x0 = samples[0].0;
    if samples.iter().all(|&(x, _)| x == x0) {
        // every parameter pair explains a single abscissa equally well
        return Err(Error::FamilyMismatch { rms_rel: f64::NAN });
    }

    let objective = |u: [S; 2]| -> S {
        let (p, q) = (u[0].exp(), u[1].exp());
        let mut acc = S::zero();
        for &(x, t) in samples {
            let r = (model(p, q, x) - t) / t;
            acc = acc + r * r;
        }
        let v = acc / S::lit(samples.len() as f64);
        if v.is_nan() {
            S::infinity()
        } else {
            v
        }
    };

    let (lp0, lp1) = (settings.first_range.0.ln(), settings.first_range.1.ln());
    let (lq0, lq1) = (settings.second_range.0.ln(), settings.second_range.1.ln());
    let n = settings.grid.max(2);
    let denom = S::lit((n - 1) as f64);
    let mut best = ([lp0, lq0], S::infinity());
    for i in 0..n {
        let lp = lp0 + (lp1 - lp0) * S::lit(i as f64) / denom;
        for j in 0..n {
            let lq = lq0 + (lq1 - lq0) * S::lit(j as f64) / denom;
            let v = objective([lp, lq]);
            if v < best.1 {
                best = ([lp, lq], v);
            }
        }
    }
    let step = [(lp1 - lp0) / denom, (lq1 - lq0) / denom];
    let (u, v) = nelder_mead(&objective, best.0, step, settings.max_iterations);
    let (u, v) = if v < best.1 { (u, v) } else { best };

    let rms_rel = v.sqrt();
    if !(rms_rel <= settings.reject_above) {
        return Err(Error::FamilyMismatch {
            rms_rel: rms_rel.as_f64(),
        });
    }
    Ok(TwoParamFit {
        first: u[0].exp(),
        second: u[1].exp(),
        rms_rel,
    })
}

fn nelder_mead<S, F>(f: &F, start: [S; 2], step: [S; 2], max_iterations: usize) -> ([S; 2], S)
where
    S: Scalar,
    F: Fn([S; 2]) -> S,
{
    let half = S::lit(0.5);
    let two = S::lit(2.0);
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut values = simplex.map(&f);

    for _ in 0..max_iterations {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = (0..2)
            .map(|k| {
                (simplex[1][k] - simplex[0][k])
                    .abs()
                    .max((simplex[2][k] - simplex[0][k]).abs())
            })
            .fold(S::zero(), |a, b| a.max(b));
        if spread <= S::epsilon() * (values[0].abs() + S::min_positive_value()) && size <= S::lit(1e-12) {
            break;
        }
        if size <= S::epsilon() {
            break;
        }

        let centroid = [
            half * (simplex[0][0] + simplex[1][0]),
            half * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: S| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };

        let reflected = along(-S::one());
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-two);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = along(-half);
                (c, f(c))
            } else {
                let c = along(half);
                (c, f(c))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + half * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + half * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    (simplex[best], values[best])
}
