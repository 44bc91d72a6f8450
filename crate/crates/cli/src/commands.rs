use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use twohop::format::num;
use twohop::relay::{build_with, RelaySolver};
use twohop::*;

use crate::args::{db_to_linear, Scenario};
use crate::error::{CliError, CliResult};
use crate::svg::{self, Series};

/// Samples of the source layering written by `e2e`.
const E2E_SAMPLES: usize = 101;

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn require_rayleigh(sc: &Scenario, what: &str) -> CliResult<()> {
    let ok = |d: &FadingDistribution| matches!(d, FadingDistribution::Rayleigh);
    if ok(&sc.hop1) && ok(&sc.hop2) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} supports rayleigh hops only")))
    }
}

pub fn second_hop(sc: &Scenario) -> CliResult<()> {
    let (p_r, b) = (db_to_linear(sc.single_pr_db()?), sc.single_b()?);
    let solver = RelaySolver::new(&sc.hop2, p_r, b)?;
    let grid = ProfileGrid::new(sc.grid, ProfileGrid::default().lower)?;
    let profile = build_with(&solver, &grid)?;
    let mut out = open_out(sc.out.as_deref())?;
    profile.write_csv(&mut out)?;
    out.flush()?;

    let region = sc.hop2.growth_regions();
    let edges: Vec<String> = region.intervals.iter().map(|&(_, hi)| num(hi)).collect();
    eprintln!("growth_region_upper={}", edges.join(";"));
    eprintln!("threshold={}", num(profile.threshold));
    let fit = fit_g_parametric(&profile)?;
    eprintln!("p_r={},B={},rms={}", num(fit.p_r), num(fit.B), num(fit.rms_rel));
    Ok(())
}

pub fn e2e(sc: &Scenario) -> CliResult<()> {
    let (p_r, b) = (db_to_linear(sc.single_pr_db()?), sc.single_b()?);
    let solution = solve_decode_forward(&sc.hop1, &sc.hop2, sc.p_t(), p_r, b, sc.grid)?;
    let mut out = open_out(sc.out.as_deref())?;
    solution.write_csv(&mut out, E2E_SAMPLES)?;
    out.flush()?;
    Ok(())
}

pub fn af(sc: &Scenario) -> CliResult<()> {
    require_rayleigh(sc, "the amplify-and-forward baseline")?;
    let (pr_db, b) = (sc.single_pr_db()?, sc.single_b()?);
    let s = af_expected_distortion(sc.p_t(), db_to_linear(pr_db), b)?;
    let mut out = open_out(sc.out.as_deref())?;
    writeln!(out, "pt_db,pr_db,b,distortion,x1,x2")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        num(sc.pt_db),
        num(pr_db),
        num(b),
        num(s.expected_distortion()),
        num(s.allocation.x1),
        num(s.allocation.x2)
    )?;
    out.flush()?;
    Ok(())
}

pub fn single_layer(sc: &Scenario) -> CliResult<()> {
    let (pr_db, b) = (sc.single_pr_db()?, sc.single_b()?);
    let s = single_layer_distortion(&sc.hop1, &sc.hop2, sc.p_t(), db_to_linear(pr_db), b)?;
    let mut out = open_out(sc.out.as_deref())?;
    writeln!(out, "pt_db,pr_db,b,distortion,gamma0,l0")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        num(sc.pt_db),
        num(pr_db),
        num(b),
        num(s.distortion),
        num(s.gamma0),
        num(s.l0)
    )?;
    out.flush()?;
    Ok(())
}

/// Sweep order: relay SNR ascending, then `b` in the order given.
fn sweep_points(sc: &Scenario) -> Vec<(usize, f64, f64)> {
    let mut points = Vec::with_capacity(sc.pr_db.len() * sc.b.len());
    for &pr in &sc.pr_db {
        for &b in &sc.b {
            points.push((points.len(), pr, b));
        }
    }
    points
}

fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn keep(label: &str, pr_db: f64, b: f64, r: twohop::Result<f64>) -> Option<f64> {
    r.map_err(|e| log::warn!("{label} at pr_db={pr_db}, b={b} failed: {}: {e}", e.code()))
        .ok()
}

type Picker = fn(&CompareRow) -> Option<f64>;

struct CompareRow {
    pr_db: f64,
    b: f64,
    df: Option<f64>,
    af: Option<f64>,
    sl: Option<f64>,
}

pub fn compare(sc: &Scenario) -> CliResult<()> {
    let p_t = sc.p_t();
    let af_ok = require_rayleigh(sc, "af").is_ok();
    if !af_ok {
        log::warn!("af column left empty: the amplify-and-forward baseline needs rayleigh hops");
    }
    let mut rows: Vec<(usize, CompareRow)> = sweep_points(sc)
        .into_par_iter()
        .map(|(idx, pr_db, b)| {
            let p_r = db_to_linear(pr_db);
            let df = keep(
                "df_multilayer",
                pr_db,
                b,
                solve_decode_forward(&sc.hop1, &sc.hop2, p_t, p_r, b, sc.grid).map(|s| s.expected_distortion),
            );
            let af = if af_ok {
                keep(
                    "af",
                    pr_db,
                    b,
                    af_expected_distortion(p_t, p_r, b).map(|s| s.expected_distortion()),
                )
            } else {
                None
            };
            let sl = keep(
                "single_layer",
                pr_db,
                b,
                single_layer_distortion(&sc.hop1, &sc.hop2, p_t, p_r, b).map(|s| s.distortion),
            );
            (idx, CompareRow { pr_db, b, df, af, sl })
        })
        .collect();
    rows.sort_by_key(|(idx, _)| *idx);

    let mut out = open_out(sc.out.as_deref())?;
    writeln!(out, "pr_db,b,df_multilayer,af,single_layer")?;
    for (_, r) in &rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(r.pr_db),
            num(r.b),
            cell(r.df),
            cell(r.af),
            cell(r.sl)
        )?;
    }
    out.flush()?;

    if let Some(path) = &sc.svg {
        let dashes = ["none", "7,4", "2,3", "10,3,2,3"];
        let methods: [(&str, &str, Picker); 3] = [
            ("DF multilayer", "#1f5fa8", |r| r.df),
            ("AF", "#c0392b", |r| r.af),
            ("single layer", "#2e8b3a", |r| r.sl),
        ];
        let mut series = Vec::new();
        for (label, color, pick) in methods {
            for (k, &b) in sc.b.iter().enumerate() {
                let points = rows
                    .iter()
                    .filter(|(_, r)| r.b == b)
                    .map(|(_, r)| (r.pr_db, pick(r).unwrap_or(f64::NAN)))
                    .collect();
                series.push(Series {
                    label: format!("{label}, b={}", num(b)),
                    color,
                    dash: dashes[k % dashes.len()],
                    points,
                });
            }
        }
        let title = format!("Expected distortion, transmit SNR {} dB", num(sc.pt_db));
        std::fs::write(
            path,
            svg::render(&title, "relay SNR (dB)", "expected distortion", &series),
        )?;
    }
    Ok(())
}

/// Sweep index, pr_db, b, and threshold with fit when the point succeeded.
type FitRow = (usize, f64, f64, Option<(f64, ParametricFit)>);

pub fn fit_report(sc: &Scenario) -> CliResult<()> {
    let rows: Vec<FitRow> = sweep_points(sc)
        .into_par_iter()
        .map(|(idx, pr_db, b)| {
            let attempt = || -> twohop::Result<(f64, ParametricFit)> {
                let solver = RelaySolver::new(&sc.hop2, db_to_linear(pr_db), b)?;
                let profile = build_with(&solver, &ProfileGrid::adaptive(solver.threshold(), sc.grid)?)?;
                Ok((solver.threshold(), fit_g_parametric(&profile)?))
            };
            let fit = attempt()
                .map_err(|e| log::warn!("fit at pr_db={pr_db}, b={b} failed: {}: {e}", e.code()))
                .ok();
            (idx, pr_db, b, fit)
        })
        .collect();

    let mut out = open_out(sc.out.as_deref())?;
    writeln!(out, "pr_db,b,threshold,p_r,B,rms_rel,g_offset")?;
    for (_, pr_db, b, fit) in rows {
        match fit {
            Some((t, f)) => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(pr_db),
                num(b),
                num(t),
                num(f.p_r),
                num(f.B),
                num(f.rms_rel),
                num(f.g_offset)
            )?,
            None => writeln!(out, "{},{},,,,,", num(pr_db), num(b))?,
        }
    }
    out.flush()?;
    Ok(())
}
