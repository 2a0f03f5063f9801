//! The collective backend keeps one Dicke ladder per MS block, so N in the
//! thousands is cheap where a dense register would need 2^N amplitudes.

use msparity::circuits::{run, Backend, CircuitKind, CircuitSpec, MsUnitary};
use msparity::collective::MsConfig;
use msparity::measurement::{measure, threshold_pvm};
use msparity::metrics::{average_fidelity, bound_closed_form};

fn main() -> msparity::Result<()> {
    let n = 2000;
    let spec = CircuitSpec::new(CircuitKind::ParityCollective, MsConfig::pure(n)?, Backend::Collective)?;
    let records = measure(&run(&spec)?, &threshold_pvm(n))?;
    println!("pure MS, N={n}: F_avg = {:.12}", average_fidelity(&records));

    let n = 300;
    let kind = CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::CollectiveFlip };
    let spec = CircuitSpec::new(kind, MsConfig::new(n, 0.8)?, Backend::Collective)?;
    let records = measure(&run(&spec)?, &threshold_pvm(n))?;
    println!(
        "polarization 0.2, N={n}: threshold PVM F_avg = {:.12}, bound = {:.12}",
        average_fidelity(&records),
        bound_closed_form(n, 0.8)?
    );
    Ok(())
}
