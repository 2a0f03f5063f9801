//! Hamming-weight measurement: each qubit flips its own half of the MS.

use msparity::circuits::{disentangle, run, Backend, CircuitKind, CircuitSpec};
use msparity::collective::MsConfig;
use msparity::measurement::{measure, sector_pvm};

fn main() -> msparity::Result<()> {
    let n = 4;
    let spec = CircuitSpec::new(CircuitKind::HammingHalf, MsConfig::pure(n)?, Backend::Dense)?;
    let state = run(&spec)?;
    for r in measure(&state, &sector_pvm(n))? {
        let Some(post) = &r.post_state else { continue };
        let clean = disentangle(&spec, post)?;
        let q = clean.partial_trace(&[0, 1])?;
        println!(
            "m = {}: p = {:.3}, after disentangling F_odd = {:.3}, purity = {:.3}",
            r.outcome,
            r.probability,
            msparity::metrics::fidelity(&q, msparity::metrics::BellTarget::OddPlus)?,
            q.purity()
        );
    }
    Ok(())
}
