use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use twohop::FadingDistribution;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "twohop",
    version,
    about = "Expected distortion of layered two-hop transmission"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relay distortion profile G(D_r) and its parametric fit.
    SecondHop(ScenarioArgs),
    /// Decode-and-forward source layering and end-to-end distortion.
    E2e(ScenarioArgs),
    /// Amplify-and-forward baseline.
    Af(ScenarioArgs),
    /// Single-rate decode-and-forward baseline.
    SingleLayer(ScenarioArgs),
    /// Sweep relay SNR and compare all three strategies.
    Compare(ScenarioArgs),
    /// Parametric fit quality over a sweep.
    FitReport(ScenarioArgs),
}

impl Command {
    pub fn args(&self) -> &ScenarioArgs {
        match self {
            Command::SecondHop(a)
            | Command::E2e(a)
            | Command::Af(a)
            | Command::SingleLayer(a)
            | Command::Compare(a)
            | Command::FitReport(a) => a,
        }
    }
}

/// Raw flags. Values stay textual until merged with the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// First-hop transmit SNR in dB [default: 20]
    #[arg(long, allow_hyphen_values = true)]
    pub pt_db: Option<String>,
    /// Relay SNR in dB, a value or lo:hi:step [default: 20]
    #[arg(long, allow_hyphen_values = true)]
    pub pr_db: Option<String>,
    /// Mismatch factor, a value or comma list [default: 1]
    #[arg(long)]
    pub b: Option<String>,
    /// First-hop fading: rayleigh | gamma:a,b | csv:path [default: rayleigh]
    #[arg(long)]
    pub hop1_dist: Option<String>,
    /// Second-hop fading: rayleigh | gamma:a,b | csv:path [default: rayleigh]
    #[arg(long)]
    pub hop2_dist: Option<String>,
    /// Relay profile grid size [default: 120]
    #[arg(long)]
    pub grid: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot path (compare only)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// key=value file mirroring the flags; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: [&str; 8] = ["pt_db", "pr_db", "b", "hop1_dist", "hop2_dist", "grid", "out", "svg"];

/// Fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub pt_db: f64,
    pub pr_db: Vec<f64>,
    pub b: Vec<f64>,
    pub hop1: FadingDistribution,
    pub hop2: FadingDistribution,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Scenario {
    pub fn from_args(args: &ScenarioArgs) -> CliResult<Self> {
        let mut values = match &args.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("pt_db", args.pt_db.clone()),
            ("pr_db", args.pr_db.clone()),
            ("b", args.b.clone()),
            ("hop1_dist", args.hop1_dist.clone()),
            ("hop2_dist", args.hop2_dist.clone()),
            ("grid", args.grid.clone()),
            ("out", args.out.as_ref().map(|p| p.display().to_string())),
            ("svg", args.svg.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        let get = |k: &str, default: &str| values.get(k).cloned().unwrap_or_else(|| default.to_string());

        let pt_db = parse_real("pt_db", &get("pt_db", "20"))?;
        let grid: usize = get("grid", "120")
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("grid must be a positive integer, got '{}'", get("grid", ""))))?;
        if grid < 2 {
            return Err(CliError::Usage(format!("grid must be at least 2, got {grid}")));
        }
        Ok(Scenario {
            pt_db,
            pr_db: parse_range(&get("pr_db", "20"))?,
            b: parse_b_list(&get("b", "1"))?,
            hop1: parse_dist(&get("hop1_dist", "rayleigh"))?,
            hop2: parse_dist(&get("hop2_dist", "rayleigh"))?,
            grid,
            out: values.get("out").map(PathBuf::from),
            svg: values.get("svg").map(PathBuf::from),
        })
    }

    pub fn p_t(&self) -> f64 {
        db_to_linear(self.pt_db)
    }

    /// The single relay SNR of a non-sweep command.
    pub fn single_pr_db(&self) -> CliResult<f64> {
        match self.pr_db.as_slice() {
            [x] => Ok(*x),
            _ => Err(CliError::Usage(
                "this command takes a single --pr-db value, not a range".into(),
            )),
        }
    }

    pub fn single_b(&self) -> CliResult<f64> {
        match self.b.as_slice() {
            [x] => Ok(*x),
            _ => Err(CliError::Usage(
                "this command takes a single --b value, not a list".into(),
            )),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key '{key}'",
                path.display(),
                n + 1
            )));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_real(name: &str, s: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name} must be a number, got '{s}'")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("{name} must be finite, got '{s}'")));
    }
    Ok(v)
}

/// A value or an inclusive `lo:hi:step` range.
pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_real("pr_db", single)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (
                parse_real("pr_db", lo)?,
                parse_real("pr_db", hi)?,
                parse_real("pr_db", step)?,
            );
            if step <= 0.0 {
                return Err(CliError::Usage(format!("range step must be positive, got {step}")));
            }
            if hi < lo {
                return Err(CliError::Usage(format!("range is empty: {lo} > {hi}")));
            }
            // index-based to avoid accumulated drift; tolerate rounding at hi
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| lo + step * k as f64).collect())
        }
        _ => Err(CliError::Usage(format!("expected a value or lo:hi:step, got '{s}'"))),
    }
}

pub fn parse_b_list(s: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let b = parse_real("b", item)?;
        if b <= 0.0 {
            return Err(CliError::Usage(format!("b must be positive, got {b}")));
        }
        out.push(b);
    }
    Ok(out)
}

fn parse_dist(s: &str) -> CliResult<FadingDistribution> {
    FadingDistribution::parse(s.trim()).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:30:2").unwrap().len(), 16);
        assert_eq!(parse_range("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_range("-5").unwrap(), vec![-5.0]);
        assert!(parse_range("0:10:0").is_err());
        assert!(parse_range("10:0:1").is_err());
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn b_lists() {
        assert_eq!(parse_b_list("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(matches!(parse_b_list("0"), Err(CliError::Usage(_))));
        assert!(parse_b_list("1,-2").is_err());
        assert!(parse_b_list("x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.cfg");
        std::fs::write(&path, "# comment\npt_db = 10\npr-db=0:4:2\nb=2\n").unwrap();
        let args = ScenarioArgs {
            b: Some("0.5".into()),
            config: Some(path),
            ..Default::default()
        };
        let s = Scenario::from_args(&args).unwrap();
        assert_eq!(s.pt_db, 10.0);
        assert_eq!(s.pr_db, vec![0.0, 2.0, 4.0]);
        assert_eq!(s.b, vec![0.5]);
    }

    #[test]
    fn unknown_config_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "seed=3\n").unwrap();
        let args = ScenarioArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(Scenario::from_args(&args), Err(CliError::Config(_))));
    }
}
