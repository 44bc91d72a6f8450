//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the solver modules; Rayleigh quantities are written
//! out from `f(x) = e^(-x)` directly.
#![allow(dead_code)]

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn rayleigh_cdf(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Expected distortion of `K` discrete layers at strengths `s` with
/// cumulative powers `t` (`t[0] = P >= t[1] >= ... >= t[K] = 0`). Layer
/// `k` carries `t[k] - t[k+1]` and sees `t[k+1]` as interference.
pub fn discrete_distortion(s: &[f64], t: &[f64], b: f64, floor: f64) -> f64 {
    let k = s.len();
    let mut rate = 0.0;
    let mut d = rayleigh_cdf(s[0]);
    for i in 0..k {
        let p = t[i] - t[i + 1];
        rate += (s[i] * p / (1.0 + s[i] * t[i + 1])).ln_1p();
        let upper = if i + 1 < k { rayleigh_cdf(s[i + 1]) } else { 1.0 };
        d += (upper - rayleigh_cdf(s[i])) * (-b * rate).exp().max(floor);
    }
    d
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Best `K`-layer distortion found by coordinate descent over the
/// cumulative powers, layers on a geometric grid over `[0.01, 2]`.
pub fn discrete_oracle(k: usize, p: f64, b: f64, floor: f64) -> f64 {
    let s: Vec<f64> = if k == 1 {
        vec![0.5]
    } else {
        (0..k).map(|i| 0.01 * 200f64.powf(i as f64 / (k - 1) as f64)).collect()
    };
    let mut t = vec![0.0; k + 1];
    t[0] = p;
    // start with all power on the layer nearest 0.5
    let j = (0..k)
        .min_by(|&a, &c| (s[a] - 0.5).abs().partial_cmp(&(s[c] - 0.5).abs()).unwrap())
        .unwrap();
    for v in t.iter_mut().take(j + 1) {
        *v = p;
    }
    let mut best = discrete_distortion(&s, &t, b, floor);
    for _ in 0..400 {
        for i in 1..k {
            let (lo, hi) = (t[i + 1], t[i - 1]);
            if hi - lo < 1e-15 {
                continue;
            }
            let current = discrete_distortion(&s, &t, b, floor);
            let trial = std::cell::RefCell::new(t.clone());
            let (x, fx) = golden_min(
                |v| {
                    let mut trial = trial.borrow_mut();
                    trial[i] = v;
                    discrete_distortion(&s, &trial, b, floor)
                },
                lo,
                hi,
                1e-10 * hi.max(1.0),
            );
            if fx < current {
                t[i] = x;
            }
        }
        let now = discrete_distortion(&s, &t, b, floor);
        if best - now < 1e-13 {
            best = now;
            break;
        }
        best = now;
    }
    best
}

/// `y` with `(b+1) y = ln R + ln G_D(e^(-b y))`, `G_D(D) = exp(-(D^(-1/B) - 1)/p)`,
/// by bisection on the fixed-point map written in `I` rather than `ln I`.
pub fn source_fixed_point_oracle(gamma: f64, gamma1: f64, b: f64, p: f64, big_b: f64) -> f64 {
    let h = |x: f64| x * x * (-x).exp();
    let ratio = h(gamma) / h(gamma1);
    let g_d = |d: f64| (-(d.powf(-1.0 / big_b) - 1.0) / p).exp();
    // I^(b+1) - ratio · G_D(I^-b) increases in I
    let residual = |i: f64| i.powf(b + 1.0) - ratio * g_d(i.powf(-b));
    let (mut lo, mut hi) = (1.0, ratio.powf(1.0 / (b + 1.0)).max(1.0));
    if residual(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Gauss–Legendre (5 points) on `n` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let mid = a + h * (k as f64 + 0.5);
        for (x, w) in X.iter().zip(W) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}
