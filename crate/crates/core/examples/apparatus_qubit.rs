//! Two-outcome POVM realized by coupling the MS to an apparatus qubit.

use std::f64::consts::PI;

use msparity::circuits::{disentangle, run, Backend, CircuitKind, CircuitSpec};
use msparity::collective::MsConfig;
use msparity::measurement::{apparatus_measure, measure, povm_from_theta, ApparatusSpec};
use msparity::metrics::{fidelity, BellTarget};

fn main() -> msparity::Result<()> {
    let n = 4;
    let g = 1.5;
    // cyclic coupling: theta(m) = pi m / N, so cos theta(N) = -1
    let coupling = ApparatusSpec::new(g, PI / (n as f64 * g))?;
    let theta = coupling.theta(n);
    let spec = CircuitSpec::new(CircuitKind::HammingHalf, MsConfig::pure(n)?, Backend::Dense)?;
    let state = run(&spec)?;

    let via_apparatus = apparatus_measure(&state, &theta)?;
    let via_povm = measure(&state, &povm_from_theta(&theta))?;
    for (a, b) in via_apparatus.iter().zip(&via_povm) {
        let clean = disentangle(&spec, a.post_state.as_ref().unwrap())?;
        let q = clean.partial_trace(&[0, 1])?;
        println!(
            "outcome {}: p = {:.3} (POVM {:.3}), disentangled F_even = {:.3}, F_odd = {:.3}",
            a.outcome,
            a.probability,
            b.probability,
            fidelity(&q, BellTarget::EvenPlus)?,
            fidelity(&q, BellTarget::OddPlus)?
        );
    }
    Ok(())
}
