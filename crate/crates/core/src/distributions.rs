//! Channel-strength distributions and their growth regions.
//!
//! Channel *strength* (squared fading magnitude) is the modelled variable,
//! so Rayleigh fading is the unit-mean exponential density `e^(-x)`.
//!
//! The growth region of a density `f` is where `d/dx (x² f(x)) > 0`. Layer
//! power can only be allocated there, and an optimal allocation occupies at
//! most one interval of each region.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::format::num;
use crate::numerics::{find_root, ln_gamma, regularized_lower_gamma, upper_incomplete_gamma, Bracket, MonotoneCubic};

/// Tolerance on the total mass of a tabulated density before renormalization.
pub const TABULATED_MASS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaShape {
    shape: f64,
    rate: f64,
    ln_norm: f64,
}

impl GammaShape {
    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Density given by knots `(x, pdf)`, interpolated monotonically between
/// knots, held constant below the first knot and zero above the last.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPdf {
    pdf: MonotoneCubic<f64>,
    cumulative: Vec<f64>,
    below_mass: f64,
    original_mass: f64,
}

impl TabulatedPdf {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidDistribution(
                "tabulated pdf needs at least 2 knots".into(),
            ));
        }
        if knots[0].0 < 0.0 {
            return Err(Error::InvalidDistribution(
                "tabulated pdf knots must be non-negative".into(),
            ));
        }
        if knots.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(
                "tabulated pdf values must be finite and >= 0".into(),
            ));
        }
        let raw = MonotoneCubic::from_pairs(knots).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let raw_cum = raw.cumulative_at_knots();
        let mass = knots[0].0 * knots[0].1 + raw_cum.last().unwrap();
        if !((mass - 1.0).abs() <= TABULATED_MASS_TOLERANCE) {
            return Err(Error::InvalidDistribution(format!(
                "tabulated pdf has mass {mass}, outside 1 ± {TABULATED_MASS_TOLERANCE}"
            )));
        }
        let scaled: Vec<(f64, f64)> = knots.iter().map(|&(x, p)| (x, p / mass)).collect();
        let pdf = MonotoneCubic::from_pairs(&scaled)?;
        let cumulative = pdf.cumulative_at_knots();
        Ok(Self {
            below_mass: scaled[0].0 * scaled[0].1,
            pdf,
            cumulative,
            original_mass: mass,
        })
    }

    /// Mass of the knots as supplied, before renormalization.
    pub fn original_mass(&self) -> f64 {
        self.original_mass
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pdf.xs().iter().copied().zip(self.pdf.ys().iter().copied())
    }

    fn density(&self, x: f64) -> f64 {
        if x < self.pdf.x_min() {
            self.pdf.ys()[0]
        } else if x > self.pdf.x_max() {
            0.0
        } else {
            self.pdf.value(x).max(0.0)
        }
    }

    fn cumulative(&self, x: f64) -> f64 {
        if x < self.pdf.x_min() {
            x * self.pdf.ys()[0]
        } else {
            (self.below_mass + self.pdf.integral_from_start(&self.cumulative, x)).min(1.0)
        }
    }

    fn growth_regions(&self) -> GrowthRegion {
        let xs = self.pdf.xs();
        let ys = self.pdf.ys();
        let h: Vec<f64> = xs.iter().zip(ys).map(|(&x, &y)| x * x * y).collect();
        let n = xs.len();
        let slope: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                (h[b] - h[a]) / (xs[b] - xs[a])
            })
            .collect();
        let crossing = |i: usize| -> f64 {
            // zero of the linear interpolant of the slope between knots i and i+1
            let (s0, s1) = (slope[i], slope[i + 1]);
            xs[i] + (xs[i + 1] - xs[i]) * s0 / (s0 - s1)
        };
        let mut intervals = Vec::new();
        let mut start: Option<f64> = if slope[0] > 0.0 && ys[0] > 0.0 { Some(0.0) } else { None };
        for i in 0..n - 1 {
            let (now, next) = (slope[i] > 0.0, slope[i + 1] > 0.0);
            if now && !next {
                let lo = start.take().unwrap_or(xs[i]);
                let hi = crossing(i);
                if hi > lo {
                    intervals.push((lo, hi));
                }
            } else if !now && next {
                start = Some(crossing(i));
            }
        }
        if let Some(lo) = start {
            let hi = xs[n - 1];
            if hi > lo {
                intervals.push((lo, hi));
            }
        }
        GrowthRegion { intervals }
    }
}

/// Distribution of the channel strength of one hop.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingDistribution {
    /// Unit-mean exponential strength, `f(x) = e^(-x)`.
    Rayleigh,
    Gamma(GammaShape),
    Tabulated(Arc<TabulatedPdf>),
}

impl FadingDistribution {
    pub fn rayleigh() -> Self {
        FadingDistribution::Rayleigh
    }

    /// `f(x) = β^α x^(α-1) e^(-βx) / Γ(α)`.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "gamma parameters must be positive, got ({shape}, {rate})"
            )));
        }
        let ln_norm = shape * rate.ln() - ln_gamma(shape)?;
        Ok(FadingDistribution::Gamma(GammaShape { shape, rate, ln_norm }))
    }

    pub fn tabulated(knots: &[(f64, f64)]) -> Result<Self> {
        Ok(FadingDistribution::Tabulated(Arc::new(TabulatedPdf::new(knots)?)))
    }

    /// Parses `rayleigh`, `gamma:α,β` or `csv:path`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("rayleigh") {
            return Ok(Self::rayleigh());
        }
        if let Some(rest) = spec.strip_prefix("gamma:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("expected gamma:shape,rate, got {spec:?}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            return Self::gamma(parse(parts[0])?, parse(parts[1])?);
        }
        if let Some(path) = spec.strip_prefix("csv:") {
            return Self::load_csv(path);
        }
        Err(Error::Parse(format!(
            "unknown distribution {spec:?} (expected rayleigh, gamma:a,b or csv:path)"
        )))
    }

    /// Density, for `x ≥ 0`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.density(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.cumulative(x))
    }

    /// Unchecked density; `x` must be non-negative.
    pub(crate) fn density(&self, x: f64) -> f64 {
        match self {
            FadingDistribution::Rayleigh => (-x).exp(),
            FadingDistribution::Gamma(g) => {
                if x == 0.0 {
                    return if g.shape < 1.0 {
                        f64::INFINITY
                    } else if g.shape == 1.0 {
                        g.rate
                    } else {
                        0.0
                    };
                }
                (g.ln_norm + (g.shape - 1.0) * x.ln() - g.rate * x).exp()
            }
            FadingDistribution::Tabulated(t) => t.density(x),
        }
    }

    /// `ln f(x)`, accurate where `f` underflows.
    pub(crate) fn ln_density(&self, x: f64) -> f64 {
        match self {
            FadingDistribution::Rayleigh => -x,
            FadingDistribution::Gamma(g) if x > 0.0 => g.ln_norm + (g.shape - 1.0) * x.ln() - g.rate * x,
            _ => self.density(x).ln(),
        }
    }

    pub(crate) fn cumulative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            FadingDistribution::Rayleigh => -(-x).exp_m1(),
            FadingDistribution::Gamma(g) => regularized_lower_gamma(g.shape, g.rate * x).unwrap_or(f64::NAN),
            FadingDistribution::Tabulated(t) => t.cumulative(x),
        }
    }

    /// `1 - F(x)`, evaluated without cancellation where a closed form exists.
    pub(crate) fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self {
            FadingDistribution::Rayleigh => (-x).exp(),
            FadingDistribution::Gamma(g) => {
                let z = g.rate * x;
                if z < g.shape + 1.0 {
                    1.0 - regularized_lower_gamma(g.shape, z).unwrap_or(f64::NAN)
                } else {
                    let ln_g = ln_gamma(g.shape).unwrap_or(f64::NAN);
                    upper_incomplete_gamma(g.shape, z).unwrap_or(f64::NAN) / ln_g.exp()
                }
            }
            FadingDistribution::Tabulated(t) => (1.0 - t.cumulative(x)).max(0.0),
        }
    }

    /// Maximal open intervals on which `x² f(x)` is increasing.
    pub fn growth_regions(&self) -> GrowthRegion {
        match self {
            FadingDistribution::Rayleigh => GrowthRegion {
                intervals: vec![(0.0, 2.0)],
            },
            FadingDistribution::Gamma(g) => GrowthRegion {
                intervals: vec![(0.0, (1.0 + g.shape) / g.rate)],
            },
            FadingDistribution::Tabulated(t) => t.growth_regions(),
        }
    }

    /// Growth regions located numerically from central differences of
    /// `x² f(x)` on `samples` points of `(0, upper]`, with each sign change
    /// refined by root finding. Independent of the analytic forms above.
    pub fn growth_regions_numeric(&self, upper: f64, samples: usize) -> Result<GrowthRegion> {
        let slope = |x: f64| {
            let step = 1e-6 * x.max(1e-3);
            let lo = (x - step).max(0.0);
            let hi = x + step;
            (hi * hi * self.density(hi) - lo * lo * self.density(lo)) / (hi - lo)
        };
        let n = samples.max(4);
        let grid: Vec<f64> = (1..=n).map(|i| upper * i as f64 / n as f64).collect();
        let signs: Vec<bool> = grid.iter().map(|&x| slope(x) > 0.0).collect();
        let mut intervals = Vec::new();
        let mut start = if signs[0] { Some(0.0) } else { None };
        for i in 0..n - 1 {
            if signs[i] != signs[i + 1] {
                let edge = find_root(slope, Bracket::new(grid[i], grid[i + 1])?, 1e-12)?;
                if signs[i] {
                    intervals.push((start.take().unwrap_or(0.0), edge));
                } else {
                    start = Some(edge);
                }
            }
        }
        if let Some(lo) = start {
            intervals.push((lo, upper));
        }
        Ok(GrowthRegion { intervals })
    }

    /// Range of strengths worth scanning for thresholds.
    pub fn support_hint(&self) -> (f64, f64) {
        match self {
            FadingDistribution::Rayleigh => (1e-6, 50.0),
            FadingDistribution::Gamma(g) => (1e-6 / g.rate, (g.shape + 50.0) / g.rate),
            FadingDistribution::Tabulated(t) => (t.pdf.x_min().max(1e-12), t.pdf.x_max()),
        }
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file =
            std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_csv(file)
    }

    /// Reads a two-column `x,pdf` table.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "pdf" {
            return Err(Error::Parse(format!("expected header `x,pdf`, got {headers:?}")));
        }
        let mut knots = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", &record[i])))
            };
            knots.push((field(0)?, field(1)?));
        }
        Self::tabulated(&knots)
    }

    /// Writes the distribution as `x,pdf`; analytic kinds are sampled on
    /// `samples` points of their support hint.
    pub fn write_csv<W: Write>(&self, mut out: W, samples: usize) -> Result<()> {
        writeln!(out, "x,pdf")?;
        match self {
            FadingDistribution::Tabulated(t) => {
                for (x, p) in t.knots() {
                    writeln!(out, "{},{}", num(x), num(p))?;
                }
            }
            _ => {
                let (_, hi) = self.support_hint();
                let n = samples.max(2);
                for i in 0..n {
                    let x = hi * i as f64 / (n - 1) as f64;
                    writeln!(out, "{},{}", num(x), num(self.density(x)))?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for FadingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FadingDistribution::Rayleigh => f.write_str("rayleigh"),
            FadingDistribution::Gamma(g) => write!(f, "gamma:{},{}", g.shape, g.rate),
            FadingDistribution::Tabulated(t) => write!(f, "tabulated({} knots)", t.pdf.xs().len()),
        }
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("channel strength must be >= 0, got {x}")))
    }
}

/// Disjoint, ordered open intervals where `d/dx (x² f(x)) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRegion {
    pub intervals: Vec<(f64, f64)>,
}

impl GrowthRegion {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// The interval containing `x`; the lower edge is inclusive only at 0.
    pub fn containing(&self, x: f64) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .copied()
            .find(|&(lo, hi)| (x > lo || (lo == 0.0 && x == 0.0)) && x < hi)
    }

    /// Whether `[a, b]` fits inside a single interval.
    pub fn holds(&self, a: f64, b: f64) -> bool {
        matches!(self.containing(a), Some((_, hi)) if b < hi)
    }
}
