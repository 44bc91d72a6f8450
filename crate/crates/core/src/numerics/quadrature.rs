//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! A semi-infinite range `[lo, ∞)` is mapped onto `(0, 1]` through
//! `t = 1 / (1 + x - lo)` before integration; the Kronrod nodes never touch
//! `t = 0`, so the integrand is only ever evaluated at finite abscissae.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<S> {
    pub value: S,
    pub error: S,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<S> {
    lo: S,
    hi: S,
    value: S,
    error: S,
    abs_sum: S,
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<S> {
    pub rel_tol: S,
    pub abs_tol: S,
    pub max_subdivisions: usize,
}

impl<S: Scalar> Default for Quadrature<S> {
    fn default() -> Self {
        Self::new(S::lit(1e-8))
    }
}

impl<S: Scalar> Quadrature<S> {
    pub fn new(rel_tol: S) -> Self {
        Self {
            rel_tol,
            abs_tol: S::zero(),
            max_subdivisions: 2000,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: S) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn integrate<F>(&self, f: F, lo: S, hi: S) -> Result<S>
    where
        F: FnMut(S) -> S,
    {
        self.estimate(f, lo, hi).map(|e| e.value)
    }

    /// Integrates `f` over `[lo, hi]`; `hi` may be `+∞`.
    pub fn estimate<F>(&self, mut f: F, lo: S, hi: S) -> Result<Estimate<S>>
    where
        F: FnMut(S) -> S,
    {
        if !(self.rel_tol > S::zero()) {
            return Err(Error::InvalidInput("rel_tol must be positive".into()));
        }
        if !lo.is_finite() || hi.is_nan() || !(lo < hi) {
            return Err(Error::Domain(format!(
                "integration range [{}, {}] must satisfy lo < hi with finite lo",
                lo, hi
            )));
        }
        if hi.is_infinite() {
            let one = S::one();
            self.adapt(
                move |t: S| {
                    let x = lo + (one - t) / t;
                    f(x) / (t * t)
                },
                S::zero(),
                one,
            )
        } else {
            self.adapt(f, lo, hi)
        }
    }

    fn adapt<F>(&self, mut f: F, lo: S, hi: S) -> Result<Estimate<S>>
    where
        F: FnMut(S) -> S,
    {
        let mut evaluations = 0usize;
        let first = kronrod15(&mut f, lo, hi);
        evaluations += 15;
        let mut segments = vec![first];
        let eps = S::epsilon();
        let hundred = S::lit(100.0);

        loop {
            let (value, error, abs_sum) = segments.iter().fold((S::zero(), S::zero(), S::zero()), |(v, e, a), s| {
                (v + s.value, e + s.error, a + s.abs_sum)
            });
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::NoConvergence {
                    estimate: value.as_f64(),
                    error_bound: error.as_f64(),
                    evaluations,
                });
            }
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol || error <= hundred * eps * abs_sum {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            if segments.len() >= self.max_subdivisions {
                return Err(Error::NoConvergence {
                    estimate: value.as_f64(),
                    error_bound: error.as_f64(),
                    evaluations,
                });
            }

            let worst = segments
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let seg = segments.swap_remove(worst);
            let mid = S::lit(0.5) * (seg.lo + seg.hi);
            if !(seg.lo < mid && mid < seg.hi) {
                // interval cannot be split further in this precision
                return Err(Error::NoConvergence {
                    estimate: value.as_f64(),
                    error_bound: error.as_f64(),
                    evaluations,
                });
            }
            segments.push(kronrod15(&mut f, seg.lo, mid));
            segments.push(kronrod15(&mut f, mid, seg.hi));
            evaluations += 30;
        }
    }
}

// index form mirrors the interleaved Gauss/Kronrod node tables
#[allow(clippy::needless_range_loop)]
fn kronrod15<S: Scalar, F: FnMut(S) -> S>(f: &mut F, lo: S, hi: S) -> Segment<S> {
    let half = S::lit(0.5);
    let centre = half * (lo + hi);
    let half_len = half * (hi - lo);
    let abs_half_len = half_len.abs();

    let fc = f(centre);
    let mut res_g = fc * S::lit(WG[3]);
    let mut res_k = fc * S::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [S::zero(); 7];
    let mut fv2 = [S::zero(); 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half_len * S::lit(XGK[jtw]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + S::lit(WG[j]) * (f1 + f2);
        res_k = res_k + S::lit(WGK[jtw]) * (f1 + f2);
        res_abs = res_abs + S::lit(WGK[jtw]) * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half_len * S::lit(XGK[jtwm1]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + S::lit(WGK[jtwm1]) * (f1 + f2);
        res_abs = res_abs + S::lit(WGK[jtwm1]) * (f1.abs() + f2.abs());
    }

    let res_kh = res_k * half;
    let mut res_asc = S::lit(WGK[7]) * (fc - res_kh).abs();
    for j in 0..7 {
        res_asc = res_asc + S::lit(WGK[j]) * ((fv1[j] - res_kh).abs() + (fv2[j] - res_kh).abs());
    }

    let value = res_k * half_len;
    res_abs = res_abs * abs_half_len;
    res_asc = res_asc * abs_half_len;
    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != S::zero() && error != S::zero() {
        let scaled = (S::lit(200.0) * error / res_asc).powf(S::lit(1.5));
        error = res_asc * scaled.min(S::one());
    }
    let round_off = S::lit(50.0) * S::epsilon() * res_abs;
    if res_abs > S::min_positive_value() / (S::lit(50.0) * S::epsilon()) {
        error = error.max(round_off);
    }

    Segment {
        lo,
        hi,
        value,
        error,
        abs_sum: res_abs,
    }
}

/// Integrates `f` over `[lo, hi]` (with `hi` possibly `+∞`) to relative
/// tolerance `rel_tol`.
pub fn integrate<S, F>(f: F, lo: S, hi: S, rel_tol: S) -> Result<S>
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    Quadrature::new(rel_tol).integrate(f, lo, hi)
}
