//! The fidelity bound for a partially polarized MS, and the strategy attaining it.

use msparity::circuits::{run, Backend, CircuitSpec};
use msparity::collective::MsConfig;
use msparity::measurement::measure;
use msparity::metrics::{average_fidelity, bound_coefficient_program, optimal_strategy};

fn main() -> msparity::Result<()> {
    let (result, program) = bound_coefficient_program(50, 0.5)?;
    println!(
        "N=50, polarization 0.5: closed {:.10}, sum {:.10}, program {:.10}",
        result.closed_form, result.sum_form, result.program_form
    );
    let (_, small) = bound_coefficient_program(4, 0.5)?;
    println!("N=4 classes {:?}", small.distinct_values);
    println!("    multiplicities {:?}, beta {:?}", small.multiplicities, small.beta);
    println!("N=50 beta mass {:.12}", program.beta_mass());

    let (n, eps) = (4, 0.3);
    let strategy = optimal_strategy(n);
    let spec = CircuitSpec::new(strategy.circuit_kind(), MsConfig::new(n, eps)?, Backend::Dense)?;
    let simulated = average_fidelity(&measure(&run(&spec)?, &strategy.povm)?);
    println!(
        "N={n}, eps={eps}: simulated optimum {simulated:.12}, bound {:.12}",
        bound_coefficient_program(n, eps)?.0.closed_form
    );
    Ok(())
}
