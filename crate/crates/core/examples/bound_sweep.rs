//! Bound sweep over N and polarization, written as CSV and SVG.
//!
//! `cargo run --example bound_sweep -- out_dir`

use std::path::PathBuf;

use msparity::harness::{parse_csv, run_sweep, to_csv, to_svg, PlotAxis, SweepConfig};

fn main() -> msparity::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let rows = run_sweep(&SweepConfig::new((1..=200).collect(), None, Some(vec![0.1, 0.3, 0.5, 0.7, 0.9]))?)?;
    let csv = to_csv(&rows);
    std::fs::write(dir.join("bound.csv"), &csv)?;
    let back = parse_csv(&csv)?;
    std::fs::write(dir.join("bound_vs_n.svg"), to_svg(&back, PlotAxis::N)?)?;
    let few: Vec<_> = back.iter().filter(|r| [1, 5, 20, 100].contains(&r.n)).cloned().collect();
    std::fs::write(dir.join("bound_vs_polarization.svg"), to_svg(&few, PlotAxis::Polarization)?)?;
    println!("{} rows written to {}", rows.len(), dir.display());
    Ok(())
}
