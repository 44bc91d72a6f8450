//! Principal branch of the Lambert W function.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `W₀(x)`, the solution of `w·eʷ = x` with `w ≥ -1`, for `x ≥ -1/e`.
pub fn lambert_w<S: Scalar>(x: S) -> Result<S> {
    let e = S::E();
    let branch = -S::one() / e;
    if x.is_nan() {
        return Err(Error::Domain("lambert_w of NaN".into()));
    }
    // values a few ulps below -1/e are rounding of the branch point itself
    let slack = S::lit(8.0) * S::epsilon() * branch.abs();
    if x < branch - slack {
        return Err(Error::Domain(format!("lambert_w requires x >= -1/e, got {x}")));
    }
    if x == S::zero() {
        return Ok(S::zero());
    }
    if x.is_infinite() {
        return Ok(x);
    }
    if x <= branch {
        return Ok(-S::one());
    }

    let mut w = initial_guess(x);
    halley(x, &mut w);
    Ok(w)
}

/// `W₀(eᴸ)` evaluated without forming `eᴸ`, so arguments far beyond the
/// floating-point range are accepted.
pub fn lambert_w_of_exp<S: Scalar>(log_x: S) -> Result<S> {
    if log_x.is_nan() {
        return Err(Error::Domain("lambert_w_of_exp of NaN".into()));
    }
    if log_x < S::lit(300.0) {
        return lambert_w(log_x.exp());
    }
    // solve w + ln w = L by Newton
    let mut w = log_x - log_x.ln();
    for _ in 0..64 {
        let r = w + w.ln() - log_x;
        let step = r / (S::one() + S::one() / w);
        w = w - step;
        if step.abs() <= S::lit(4.0) * S::epsilon() * w.abs() {
            break;
        }
    }
    Ok(w)
}

fn initial_guess<S: Scalar>(x: S) -> S {
    let one = S::one();
    let e = S::E();
    if x < S::lit(-0.25) {
        // series about the branch point in p = sqrt(2(e x + 1))
        let p = (S::lit(2.0) * (e * x + one)).max(S::zero()).sqrt();
        -one + p - p * p / S::lit(3.0) + S::lit(11.0 / 72.0) * p * p * p
    } else if x < S::lit(3.0) {
        // Padé-like start, accurate to a few digits on [-0.25, 3)
        let l = (one + x).ln();
        l * (one - (one + l).ln() / (S::lit(2.0) + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

fn halley<S: Scalar>(x: S, w: &mut S) {
    let one = S::one();
    let two = S::lit(2.0);
    for _ in 0..64 {
        let ew = w.exp();
        let f = *w * ew - x;
        let wp1 = *w + one;
        if wp1 <= S::epsilon() {
            break;
        }
        let denom = ew * wp1 - (*w + two) * f / (two * wp1);
        if denom == S::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        *w = *w - step;
        if step.abs() <= S::lit(4.0) * S::epsilon() * (one + w.abs()) {
            break;
        }
    }
}
