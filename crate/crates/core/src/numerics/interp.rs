//! Shape-preserving interpolation and the evaluable-map wrapper.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Butland slopes).
///
/// Between consecutive knots the interpolant never leaves the range of the
/// two knot values, so monotone or non-negative data stay that way.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic<S> {
    xs: Vec<S>,
    ys: Vec<S>,
    slopes: Vec<S>,
}

impl<S: Scalar> MonotoneCubic<S> {
    pub fn new(xs: Vec<S>, ys: Vec<S>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidInput(format!(
                "knot arrays differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("interpolation table needs at least 2 knots".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("interpolation knots must be finite".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("knot abscissae must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn from_pairs(pairs: &[(S, S)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[S] {
        &self.xs
    }

    pub fn ys(&self) -> &[S] {
        &self.ys
    }

    pub fn x_min(&self) -> S {
        self.xs[0]
    }

    pub fn x_max(&self) -> S {
        *self.xs.last().unwrap()
    }

    pub fn contains(&self, x: S) -> bool {
        x >= self.x_min() && x <= self.x_max()
    }

    fn segment(&self, x: S) -> usize {
        let k = self.xs.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }

    /// Interpolated value; the caller guarantees `x` lies within the knots.
    pub fn value(&self, x: S) -> S {
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = S::lit(2.0);
        let three = S::lit(3.0);
        let h00 = two * t3 - three * t2 + S::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn derivative(&self, x: S) -> S {
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let six = S::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = S::lit(3.0) * t2 - S::lit(4.0) * t + S::one();
        let d01 = six * t - six * t2;
        let d11 = S::lit(3.0) * t2 - S::lit(2.0) * t;
        (d00 * self.ys[k] + d01 * self.ys[k + 1]) / h + d10 * self.slopes[k] + d11 * self.slopes[k + 1]
    }

    /// Exact integral of segment `k` from its left knot to local coordinate `t ∈ [0, 1]`.
    fn partial_segment_integral(&self, k: usize, t: S) -> S {
        let h = self.xs[k + 1] - self.xs[k];
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let half = S::lit(0.5);
        let i00 = half * t4 - t3 + t;
        let i10 = S::lit(0.25) * t4 - S::lit(2.0 / 3.0) * t3 + half * t2;
        let i01 = t3 - half * t4;
        let i11 = S::lit(0.25) * t4 - t3 / S::lit(3.0);
        h * (i00 * self.ys[k] + i10 * h * self.slopes[k] + i01 * self.ys[k + 1] + i11 * h * self.slopes[k + 1])
    }

    /// Running integral from the first knot, evaluated at every knot.
    pub fn cumulative_at_knots(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.xs.len());
        let mut acc = S::zero();
        out.push(acc);
        for k in 0..self.xs.len() - 1 {
            acc = acc + self.partial_segment_integral(k, S::one());
            out.push(acc);
        }
        out
    }

    /// Integral from the first knot to `x` (clamped to the knot range),
    /// given the precomputed knot cumulatives.
    pub fn integral_from_start(&self, cumulative: &[S], x: S) -> S {
        if x <= self.x_min() {
            return S::zero();
        }
        if x >= self.x_max() {
            return *cumulative.last().unwrap();
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        cumulative[k] + self.partial_segment_integral(k, (x - self.xs[k]) / h)
    }
}

fn pchip_slopes<S: Scalar>(xs: &[S], ys: &[S]) -> Vec<S> {
    let n = xs.len();
    let h: Vec<S> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<S> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    let mut d = vec![S::zero(); n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    let two = S::lit(2.0);
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == S::zero() || b == S::zero() || a.signum() != b.signum() {
            d[k] = S::zero();
        } else {
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope<S: Scalar>(h0: S, h1: S, del0: S, del1: S) -> S {
    let two = S::lit(2.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || del0 == S::zero() {
        S::zero()
    } else if del0.signum() != del1.signum() && d.abs() > (S::lit(3.0) * del0).abs() {
        S::lit(3.0) * del0
    } else {
        d
    }
}

/// Behaviour of a tabulated map outside its knot range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge<S> {
    Reject,
    /// Repeat the nearest knot value.
    Hold,
    Value(S),
}

type Rule<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

/// A real function of one argument, either a closed-form rule or a
/// monotone-cubic table with explicit edge handling.
#[derive(Clone)]
pub enum EvaluableMap<S> {
    Rule(Rule<S>),
    Table {
        table: MonotoneCubic<S>,
        below: Edge<S>,
        above: Edge<S>,
    },
}

impl<S: Scalar> EvaluableMap<S> {
    pub fn rule<F>(f: F) -> Self
    where
        F: Fn(S) -> S + Send + Sync + 'static,
    {
        EvaluableMap::Rule(Arc::new(f))
    }

    pub fn table(table: MonotoneCubic<S>) -> Self {
        EvaluableMap::Table {
            table,
            below: Edge::Reject,
            above: Edge::Reject,
        }
    }

    pub fn with_edges(self, below: Edge<S>, above: Edge<S>) -> Self {
        match self {
            EvaluableMap::Table { table, .. } => EvaluableMap::Table { table, below, above },
            rule => rule,
        }
    }

    pub fn eval(&self, x: S) -> Result<S> {
        match self {
            EvaluableMap::Rule(f) => Ok(f(x)),
            EvaluableMap::Table { table, below, above } => {
                if x < table.x_min() {
                    edge_value(*below, table.ys[0], x, table)
                } else if x > table.x_max() {
                    edge_value(*above, *table.ys.last().unwrap(), x, table)
                } else {
                    Ok(table.value(x))
                }
            }
        }
    }
}

fn edge_value<S: Scalar>(edge: Edge<S>, nearest: S, x: S, table: &MonotoneCubic<S>) -> Result<S> {
    match edge {
        Edge::Reject => Err(Error::Domain(format!(
            "{x} outside table range [{}, {}]",
            table.x_min(),
            table.x_max()
        ))),
        Edge::Hold => Ok(nearest),
        Edge::Value(v) => Ok(v),
    }
}

impl<S: Scalar> fmt::Debug for EvaluableMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvaluableMap::Rule(_) => f.write_str("EvaluableMap::Rule(..)"),
            EvaluableMap::Table { table, below, above } => f
                .debug_struct("EvaluableMap::Table")
                .field("knots", &table.xs.len())
                .field("range", &(table.x_min(), table.x_max()))
                .field("below", below)
                .field("above", above)
                .finish(),
        }
    }
}
