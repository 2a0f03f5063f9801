//! Bound sweeps over `(N, polarization)` grids and their CSV / JSON / SVG forms.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{bound_closed_form, bound_sum_form};

pub const CSV_SCHEMA_LINE: &str = "# schema=1";
pub const CSV_HEADER: &str = "N,epsilon,polarization,f_avg_max";

/// Closed form and sum form must agree this closely for a row to be written.
pub const CROSS_CHECK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    /// `(epsilon, polarization)` pairs; whichever was given is kept verbatim.
    pub points: Vec<(f64, f64)>,
}

impl SweepConfig {
    /// Exactly one of `epsilons` / `polarizations` must be given.
    pub fn new(ns: Vec<usize>, epsilons: Option<Vec<f64>>, polarizations: Option<Vec<f64>>) -> Result<Self> {
        let points: Vec<(f64, f64)> = match (epsilons, polarizations) {
            (Some(e), None) => e.into_iter().map(|e| (e, 1.0 - e)).collect(),
            (None, Some(p)) => p.into_iter().map(|p| (1.0 - p, p)).collect(),
            (None, None) => return Err(Error::Config("give either epsilon or polarization values".into())),
            (Some(_), Some(_)) => {
                return Err(Error::Config("give epsilon or polarization values, not both".into()))
            }
        };
        if ns.is_empty() || points.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if ns.contains(&0) {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if let Some((e, _)) = points.iter().find(|(e, _)| !(0.0..1.0).contains(e)) {
            return Err(Error::Config(format!("epsilon = {e} is outside [0, 1)")));
        }
        Ok(SweepConfig { ns, points })
    }

    /// `N = 1..=100` at polarizations 0.1, 0.3, 0.5, 0.7.
    pub fn default_grid() -> Self {
        SweepConfig::new((1..=100).collect(), None, Some(vec![0.1, 0.3, 0.5, 0.7])).expect("valid grid")
    }
}

/// `a..b` / `a..=b` / `a-b` ranges (inclusive) or comma-separated lists.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad N value `{s}`")));
    let text = text.trim();
    let range = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .or_else(|| text.split_once('-'));
    if let Some((a, b)) = range {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(Error::Config(format!("empty N range `{text}`")));
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(num).collect()
}

pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad value `{s}`"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub polarization: f64,
    pub f_avg_max: f64,
}

/// Evaluates every grid point in parallel and returns rows sorted by `(N, epsilon)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<BoundRow>> {
    let grid: Vec<(usize, (f64, f64))> =
        cfg.ns.iter().flat_map(|&n| cfg.points.iter().map(move |&p| (n, p))).collect();
    let mut rows = grid
        .into_par_iter()
        .map(|(n, (epsilon, polarization))| {
            let closed = bound_closed_form(n, epsilon)?;
            let sum = bound_sum_form(n, epsilon)?;
            if (closed - sum).abs() > CROSS_CHECK {
                return Err(Error::Validation(format!(
                    "bound forms disagree at N={n}, epsilon={epsilon}: {closed} vs {sum}"
                )));
            }
            Ok(BoundRow { n, epsilon, polarization, f_avg_max: closed })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.epsilon.total_cmp(&b.epsilon)));
    rows.dedup();
    Ok(rows)
}

pub fn to_csv(rows: &[BoundRow]) -> String {
    let mut out = format!("{CSV_SCHEMA_LINE}\n{CSV_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.epsilon, r.polarization, r.f_avg_max).expect("string write");
    }
    out
}

/// Parses what [`to_csv`] writes.
pub fn parse_csv(text: &str) -> Result<Vec<BoundRow>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(CSV_SCHEMA_LINE) {
        return Err(Error::Config(format!("CSV must start with `{CSV_SCHEMA_LINE}`")));
    }
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config(format!("CSV header must be `{CSV_HEADER}`")));
    }
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Config(format!("malformed CSV row {}: `{line}`", i + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(BoundRow {
                n: cols[0].parse().map_err(|_| bad())?,
                epsilon: real(cols[1])?,
                polarization: real(cols[2])?,
                f_avg_max: real(cols[3])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::Config("CSV has no data rows".into()));
    }
    Ok(rows)
}

/// Which quantity runs along the horizontal axis; the other one labels the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotAxis {
    N,
    Polarization,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn series(rows: &[BoundRow], x: PlotAxis) -> Vec<Series> {
    let mut keys: Vec<f64> = rows
        .iter()
        .map(|r| match x {
            PlotAxis::N => r.polarization,
            PlotAxis::Polarization => r.n as f64,
        })
        .collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let mut points: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| match x {
                    PlotAxis::N if r.polarization == k => Some((r.n as f64, r.f_avg_max)),
                    PlotAxis::Polarization if r.n as f64 == k => Some((r.polarization, r.f_avg_max)),
                    _ => None,
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = match x {
                PlotAxis::N => format!("1-eps = {k}"),
                PlotAxis::Polarization => format!("N = {k}"),
            };
            Series { label, points }
        })
        .collect()
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

/// Self-contained SVG line chart, one polyline per series.
pub fn to_svg(rows: &[BoundRow], x: PlotAxis) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    let all = series(rows, x);
    let xs = rows.iter().map(|r| match x {
        PlotAxis::N => r.n as f64,
        PlotAxis::Polarization => r.polarization,
    });
    let (x0, x1) = xs.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x1 + 0.5) };
    let y_lo = rows.iter().map(|r| r.f_avg_max).fold(1.0, f64::min).min(0.5);
    let (y0, y1) = (y_lo, 1.0);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| MARGIN_T + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let w = &mut s;
    let e = "string write";
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).expect(e);
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).expect(e);
    writeln!(w, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).expect(e);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        writeln!(w, r##"<line x1="{px:.2}" y1="{MARGIN_T}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, MARGIN_T + ph).expect(e);
        writeln!(w, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_T + ph + 18.0, tick(xv)).expect(e);
        writeln!(w, r##"<line x1="{MARGIN_L}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, MARGIN_L + pw).expect(e);
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_L - 6.0, py + 4.0, tick(yv)).expect(e);
    }
    let x_label = match x {
        PlotAxis::N => "number of MS sites N",
        PlotAxis::Polarization => "polarization 1-eps",
    };
    writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 15.0).expect(e);
    writeln!(w, r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">F_avg,max</text>"#, MARGIN_T + ph / 2.0, MARGIN_T + ph / 2.0).expect(e);
    for (i, ser) in all.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).expect(e);
        let ly = MARGIN_T + 10.0 + 18.0 * i as f64;
        let lx = MARGIN_L + pw + 12.0;
        writeln!(w, r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0).expect(e);
        writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, ser.label).expect(e);
    }
    writeln!(w, "</svg>").expect(e);
    Ok(s)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_n_list("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_n_list("5-6").unwrap(), vec![5, 6]);
        assert_eq!(parse_n_list("1, 7,50").unwrap(), vec![1, 7, 50]);
        assert!(parse_n_list("4..2").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn sweep_rows() {
        let cfg = SweepConfig::new(vec![50, 2], None, Some(vec![0.5, 1.0])).unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], BoundRow { n: 2, epsilon: 0.0, polarization: 1.0, f_avg_max: 1.0 });
        assert_eq!(rows[1], BoundRow { n: 2, epsilon: 0.5, polarization: 0.5, f_avg_max: 0.75 });
        assert!((rows[3].f_avg_max - 0.9999).abs() < 5e-5);
    }

    #[test]
    fn sweep_config_errors() {
        assert!(SweepConfig::new(vec![1], Some(vec![0.1]), Some(vec![0.9])).is_err());
        assert!(SweepConfig::new(vec![1], None, None).is_err());
        assert!(SweepConfig::new(vec![], Some(vec![0.1]), None).is_err());
        assert!(SweepConfig::new(vec![1], Some(vec![1.0]), None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = run_sweep(&SweepConfig::new((1..=6).collect(), Some(vec![0.1, 0.35]), None).unwrap()).unwrap();
        let text = to_csv(&rows);
        assert!(text.starts_with("# schema=1\nN,epsilon,polarization,f_avg_max\n"));
        assert_eq!(parse_csv(&text).unwrap(), rows);
        assert!(parse_csv("").is_err());
        assert!(parse_csv(&format!("{CSV_SCHEMA_LINE}\n{CSV_HEADER}\n")).is_err());
        assert!(parse_csv(&format!("{CSV_SCHEMA_LINE}\n{CSV_HEADER}\n1,2,3\n")).is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let rows = run_sweep(&SweepConfig::default_grid()).unwrap();
        let svg = to_svg(&rows, PlotAxis::N).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        let svg = to_svg(&rows[..10], PlotAxis::Polarization).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
