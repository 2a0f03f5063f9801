//! Parity measurement through an ideal MS, then the same run with a leaky POVM.

use std::f64::consts::PI;

use msparity::circuits::{run, Backend, CircuitKind, CircuitSpec};
use msparity::collective::MsConfig;
use msparity::measurement::{measure, povm_from_theta, CollectivePovm, TwoOutcomeTheta};
use msparity::metrics::average_fidelity;

fn main() -> msparity::Result<()> {
    let n = 5;
    let spec = CircuitSpec::new(CircuitKind::ParityCollective, MsConfig::pure(n)?, Backend::Collective)?;
    let state = run(&spec)?;

    let flawless = povm_from_theta(&TwoOutcomeTheta::linear(n, PI / (2.0 * n as f64))?);
    for r in measure(&state, &flawless)? {
        println!(
            "outcome {}: p = {:.3}, F_even = {:.3}, F_odd = {:.3}",
            r.outcome, r.probability, r.fidelity_even, r.fidelity_odd
        );
    }

    // outcome 1 fires on m = 0 with probability 0.1 and on m = N with 0.8
    let mut a0 = vec![0.5; n + 1];
    let mut a1 = vec![0.5; n + 1];
    (a0[0], a1[0]) = (0.9, 0.1);
    (a0[n], a1[n]) = (0.2, 0.8);
    let records = measure(&state, &CollectivePovm::new(vec![a0, a1])?)?;
    println!("leaky POVM: F_odd after outcome 1 = {:.4} (0.8 / 0.9 = {:.4})", records[1].fidelity_odd, 0.8 / 0.9);
    println!("average fidelity = {:.4}", average_fidelity(&records));
    Ok(())
}
