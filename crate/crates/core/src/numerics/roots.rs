//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> Bracket<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInput(format!(
                "bracket requires lo < hi, got [{lo}, {hi}]"
            )))
        }
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }
}

const MAX_ITERATIONS: usize = 300;

/// Finds `x*` in `bracket` with `g(x*) ≈ 0`.
///
/// The returned point lies inside a sign-change interval no wider than
/// `abs_tol + 4·eps·|x*|`. Deterministic for fixed inputs.
pub fn find_root<S, G>(mut g: G, bracket: Bracket<S>, abs_tol: S) -> Result<S>
where
    S: Scalar,
    G: FnMut(S) -> S,
{
    if !(abs_tol > S::zero()) {
        return Err(Error::InvalidInput("abs_tol must be positive".into()));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == S::zero() {
        return Ok(a);
    }
    if fb == S::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed {
            lo: a.as_f64(),
            hi: b.as_f64(),
            g_lo: fa.as_f64(),
            g_hi: fb.as_f64(),
        });
    }

    let two = S::lit(2.0);
    let half = S::lit(0.5);
    let three = S::lit(3.0);
    let eps = S::epsilon();

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * eps * b.abs() + half * abs_tol;
        let xm = half * (c - b);
        // [b, c] always straddles the root
        if xm.abs() <= tol1 || fb == S::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = S::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - S::one()));
                q = (qq - S::one()) * (r - S::one()) * (s - S::one());
            }
            if p > S::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > S::zero() { tol1 } else { -tol1 };
        }
        fb = g(b);
        if fb.is_nan() {
            return Err(Error::NoConvergence {
                estimate: b.as_f64(),
                error_bound: (c - b).abs().as_f64(),
                evaluations: 0,
            });
        }
    }
    Err(Error::NoConvergence {
        estimate: b.as_f64(),
        error_bound: (c - b).abs().as_f64(),
        evaluations: MAX_ITERATIONS,
    })
}

/// Bisection; slower than [`find_root`] but trivially correct.
pub fn bisect<S, G>(mut g: G, bracket: Bracket<S>, abs_tol: S) -> Result<S>
where
    S: Scalar,
    G: FnMut(S) -> S,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let glo = g(lo);
    let ghi = g(hi);
    if glo.signum() == ghi.signum() {
        return Err(Error::RootNotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            g_lo: glo.as_f64(),
            g_hi: ghi.as_f64(),
        });
    }
    let neg_lo = glo < S::zero();
    while hi - lo > abs_tol {
        let mid = S::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == S::zero() {
            return Ok(mid);
        }
        if (gm < S::zero()) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(S::lit(0.5) * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let r = find_root(|x: f64| x - 1.0, Bracket::new(0.0, 2.0).unwrap(), 1e-10).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_boundary_equation() {
        let g = |x: f64| x * (-x).exp() - (-x).exp();
        let r = find_root(g, Bracket::new(0.5, 2.0).unwrap(), 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two_matches_bisection() {
        let g = |x: f64| x * x - 2.0;
        let br = Bracket::new(1.0, 2.0).unwrap();
        let oracle = bisect(g, br, 1e-13).unwrap();
        assert!((oracle - std::f64::consts::SQRT_2).abs() < 1e-12);
        let r = find_root(g, br, 1e-12).unwrap();
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn reports_missing_sign_change() {
        let err = find_root(|x: f64| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), 1e-10);
        assert!(matches!(err, Err(Error::RootNotBracketed { .. })));
    }

    #[test]
    fn bracket_rejects_empty_interval() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(2.0, 1.0).is_err());
    }

    #[test]
    fn single_precision() {
        let r = find_root(|x: f32| x.cos() - x, Bracket::new(0.0, 1.0).unwrap(), 1e-6).unwrap();
        assert!((r - 0.739_085_1).abs() < 1e-5);
    }
}
