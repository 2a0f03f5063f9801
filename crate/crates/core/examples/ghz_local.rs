//! The GHZ-assisted circuit only touches one edge site per qubit, yet matches the
//! collective parity circuit branch by branch up to a phase.

use msparity::circuits::{compare_branches, run, Backend, CircuitKind, CircuitSpec};
use msparity::collective::MsConfig;

fn main() -> msparity::Result<()> {
    for n in 2..=5 {
        let ms = MsConfig::pure(n)?;
        let ghz = run(&CircuitSpec::new(CircuitKind::GhzLocal, ms, Backend::Dense)?)?;
        let parity = run(&CircuitSpec::new(CircuitKind::ParityCollective, ms, Backend::Dense)?)?;
        let rows = compare_branches(ghz.as_pure().unwrap(), parity.as_pure().unwrap())?;
        let line: Vec<String> = rows
            .iter()
            .map(|b| format!("{}: F={:.12} phase={:+.4}", b.branch, b.fidelity, b.phase))
            .collect();
        println!("N={n}  {}", line.join("  "));
    }
    Ok(())
}
