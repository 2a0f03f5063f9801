//! Protocol circuits: input preparation, conditional evolution of the MS on the
//! target qubits, the disentangling gate, and the reduced two-qubit state.
//!
//! Target qubits always occupy slots 0 and 1, so the amplitude vector (or the
//! density matrix) splits into four contiguous qubit branches `00, 01, 10, 11`.

use serde::Serialize;

use crate::collective::{
    self, rho_epsilon_ensemble, Edge, MsConfig, SectorEnsemble,
};
use crate::error::{Error, Result};
use crate::qstate::linalg::{c, check_unitary, CMatrix, CVector, C64, ONE};
use crate::qstate::{
    DensityOperator, MonomialOp, OpSum, PureState, QuantumState, Slot, SlotRole, SubsystemLayout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Full `2^N` register for the MS.
    Dense,
    /// Dicke ladders; pure states, or sector ensembles for `rho_eps`.
    Collective,
    /// Collective when the scenario is representable there, dense otherwise.
    Auto,
}

/// Unitary on the MS used by the conditioned circuits.
#[derive(Debug, Clone, PartialEq)]
pub enum MsUnitary {
    Identity,
    /// `X^{(x) N}` on every MS site.
    CollectiveFlip,
    /// Arbitrary `2^N x 2^N` unitary (dense backend only).
    Matrix(CMatrix),
}

impl MsUnitary {
    fn is_tag(&self) -> bool {
        !matches!(self, MsUnitary::Matrix(_))
    }

    fn adjoint(&self) -> MsUnitary {
        match self {
            MsUnitary::Matrix(m) => MsUnitary::Matrix(m.adjoint()),
            other => other.clone(),
        }
    }

    /// Dense matrix on `n` sites.
    pub fn to_matrix(&self, n: usize) -> CMatrix {
        let d = 1usize << n;
        match self {
            MsUnitary::Identity => CMatrix::identity(d, d),
            MsUnitary::CollectiveFlip => {
                let mut m = CMatrix::zeros(d, d);
                for x in 0..d {
                    m[(x ^ (d - 1), x)] = ONE;
                }
                m
            }
            MsUnitary::Matrix(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitKind {
    /// Two controlled collective flips, one per target qubit.
    ParityCollective,
    /// First half of the MS flipped by qubit 1, second half by qubit 2.
    HammingHalf,
    /// GHZ preparation, controlled-Z from each qubit onto an edge site, GHZ undo.
    GhzLocal,
    /// `V_e` on even qubit branches, `V_o` on odd ones.
    ParityConditioned { v_even: MsUnitary, v_odd: MsUnitary },
    /// One MS unitary per qubit basis state, ordered `00, 01, 10, 11`.
    GeneralConditional { branches: Box<[MsUnitary; 4]> },
}

impl CircuitKind {
    pub fn name(&self) -> &'static str {
        match self {
            CircuitKind::ParityCollective => "parity_collective",
            CircuitKind::HammingHalf => "hamming_half",
            CircuitKind::GhzLocal => "ghz_local",
            CircuitKind::ParityConditioned { .. } => "parity_conditioned",
            CircuitKind::GeneralConditional { .. } => "general_conditional",
        }
    }

    fn unitaries(&self) -> Vec<&MsUnitary> {
        match self {
            CircuitKind::ParityConditioned { v_even, v_odd } => vec![v_even, v_odd],
            CircuitKind::GeneralConditional { branches } => branches.iter().collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    kind: CircuitKind,
    ms: MsConfig,
    backend: Backend,
}

impl CircuitSpec {
    pub fn new(kind: CircuitKind, ms: MsConfig, backend: Backend) -> Result<Self> {
        let n = ms.n();
        if kind == CircuitKind::HammingHalf && n % 2 != 0 {
            return Err(Error::Validation(format!("hamming_half needs an even MS size, got N={n}")));
        }
        for u in kind.unitaries() {
            if let MsUnitary::Matrix(m) = u {
                if n >= usize::BITS as usize || m.nrows() != 1usize << n || m.ncols() != 1usize << n {
                    return Err(Error::Layout(format!(
                        "MS unitary is {}x{}, expected 2^{n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                check_unitary(m, "MS unitary")?;
            }
        }
        let spec = CircuitSpec { kind, ms, backend };
        if backend == Backend::Collective {
            spec.check_collective()?;
        }
        Ok(spec)
    }

    pub fn kind(&self) -> &CircuitKind {
        &self.kind
    }

    pub fn ms(&self) -> &MsConfig {
        &self.ms
    }

    pub fn requested_backend(&self) -> Backend {
        self.backend
    }

    fn check_collective(&self) -> Result<()> {
        if self.kind.unitaries().iter().any(|u| !u.is_tag()) {
            return Err(Error::Representation(
                "explicit MS matrices need the dense backend".into(),
            ));
        }
        let conditioned = matches!(
            self.kind,
            CircuitKind::ParityConditioned { .. } | CircuitKind::GeneralConditional { .. }
        );
        if !self.ms.is_pure() && !conditioned {
            return Err(Error::Representation(format!(
                "mixed MS input for {} is only simulated on the dense backend",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Backend actually used: `Auto` resolves to collective when representable.
    pub fn backend(&self) -> Backend {
        match self.backend {
            Backend::Auto => {
                if self.check_collective().is_ok() {
                    Backend::Collective
                } else {
                    Backend::Dense
                }
            }
            b => b,
        }
    }

    /// MS slots for the resolved backend.
    pub fn ms_slots(&self) -> Vec<Slot> {
        let n = self.ms.n();
        let halves = self.kind == CircuitKind::HammingHalf;
        match (self.backend(), halves) {
            (Backend::Collective, true) => vec![Slot::ms_block(n / 2), Slot::ms_block(n / 2)],
            (Backend::Collective, false) => vec![Slot::ms_block(n)],
            (_, true) => vec![Slot::ms_sites(n / 2), Slot::ms_sites(n / 2)],
            (_, false) => vec![Slot::ms_sites(n)],
        }
    }

    pub fn layout(&self) -> Result<SubsystemLayout> {
        let mut slots = vec![Slot::target1(), Slot::target2()];
        slots.extend(self.ms_slots());
        SubsystemLayout::new(slots)
    }

    fn steps(&self) -> Vec<Step> {
        match &self.kind {
            CircuitKind::ParityCollective => vec![
                Step::Flip { control: 0, ms_slots: vec![] },
                Step::Flip { control: 1, ms_slots: vec![] },
            ],
            CircuitKind::HammingHalf => vec![
                Step::Flip { control: 0, ms_slots: vec![2] },
                Step::Flip { control: 1, ms_slots: vec![3] },
            ],
            CircuitKind::GhzLocal => vec![
                Step::Ghz { inverse: false },
                Step::EdgePhase { control: 0, edge: Edge::First },
                Step::EdgePhase { control: 1, edge: Edge::Last },
                Step::Ghz { inverse: true },
            ],
            CircuitKind::ParityConditioned { v_even, v_odd } => vec![Step::Conditional(Box::new([
                v_even.clone(),
                v_odd.clone(),
                v_odd.clone(),
                v_even.clone(),
            ]))],
            CircuitKind::GeneralConditional { branches } => {
                vec![Step::Conditional(branches.clone())]
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Step {
    Flip { control: usize, ms_slots: Vec<usize> },
    Ghz { inverse: bool },
    EdgePhase { control: usize, edge: Edge },
    Conditional(Box<[MsUnitary; 4]>),
}

impl Step {
    fn inverse(&self) -> Step {
        match self {
            Step::Ghz { inverse } => Step::Ghz { inverse: !inverse },
            Step::Conditional(b) => {
                Step::Conditional(Box::new([b[0].adjoint(), b[1].adjoint(), b[2].adjoint(), b[3].adjoint()]))
            }
            other => other.clone(),
        }
    }
}

/// Joint state of the two target qubits and the MS (plus apparatus when attached).
#[derive(Debug, Clone, PartialEq)]
pub enum JointState {
    Pure(PureState),
    Mixed(DensityOperator),
    Ensemble(SectorEnsemble),
}

impl JointState {
    pub fn layout(&self) -> &SubsystemLayout {
        match self {
            JointState::Pure(s) => s.layout(),
            JointState::Mixed(s) => s.layout(),
            JointState::Ensemble(s) => s.layout(),
        }
    }

    pub fn sector_probabilities(&self) -> Vec<f64> {
        match self {
            JointState::Pure(s) => collective::sector_probabilities(s),
            JointState::Mixed(s) => collective::sector_probabilities(s),
            JointState::Ensemble(s) => collective::sector_probabilities(s),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            JointState::Pure(s) => Some(s),
            _ => None,
        }
    }

    /// Density operator in the layout's basis. Ensembles are rejected because
    /// their members are sector stand-ins, not the physical basis states.
    pub fn to_density(&self) -> Result<DensityOperator> {
        match self {
            JointState::Pure(s) => Ok(s.to_density()),
            JointState::Mixed(s) => Ok(s.clone()),
            JointState::Ensemble(_) => Err(Error::Representation(
                "a sector ensemble has no dense density matrix in the ladder basis".into(),
            )),
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        match self {
            JointState::Pure(s) => s.partial_trace(keep),
            JointState::Mixed(s) => s.partial_trace(keep),
            JointState::Ensemble(s) => s.partial_trace(keep),
        }
    }

    /// Applies an operator sum to whichever representation is held.
    pub fn apply_sum(&self, op: &OpSum) -> Result<JointState> {
        Ok(match self {
            JointState::Pure(s) => JointState::Pure(s.apply_sum(op)?),
            JointState::Mixed(s) => JointState::Mixed(s.apply_sum(op)?),
            JointState::Ensemble(s) => JointState::Ensemble(s.apply_sum(op)?),
        })
    }

    fn apply_step(&self, step: &Step) -> Result<JointState> {
        match step {
            Step::Flip { control, ms_slots } => {
                let op = collective::flip_operator(self.layout(), Some(*control), ms_slots)?;
                self.apply_sum(&OpSum::single(op))
            }
            Step::Ghz { inverse } => self.apply_sum(&collective::ghz_operator(self.layout(), *inverse)?),
            Step::EdgePhase { control, edge } => Ok(match self {
                JointState::Pure(s) => JointState::Pure(collective::edge_phase_gate(s, *control, *edge)?),
                JointState::Mixed(s) => JointState::Mixed(collective::edge_phase_gate(s, *control, *edge)?),
                JointState::Ensemble(s) => {
                    JointState::Ensemble(collective::edge_phase_gate(s, *control, *edge)?)
                }
            }),
            Step::Conditional(branches) => self.apply_conditional(branches),
        }
    }

    fn apply_conditional(&self, branches: &[MsUnitary; 4]) -> Result<JointState> {
        let layout = self.layout();
        layout.check_protocol()?;
        if branches.iter().all(MsUnitary::is_tag) {
            let ms = layout.ms_slots();
            let op = MonomialOp::from_fn(layout.total_dim(), |idx| {
                let mut d = layout.digits(idx);
                if branches[2 * d[0] + d[1]] == MsUnitary::CollectiveFlip {
                    for &s in &ms {
                        d[s] = match layout.slots()[s].role {
                            SlotRole::MsSites { sites } => d[s] ^ ((1usize << sites) - 1),
                            SlotRole::MsBlock { size } => size - d[s],
                            _ => d[s],
                        };
                    }
                }
                (layout.index(&d), ONE)
            })?;
            return self.apply_sum(&OpSum::single(op));
        }

        // Explicit matrices act on the MS register, which must be everything after the qubits.
        let n = layout.ms_size();
        let rest = layout.total_dim() / 4;
        let dense_ms = layout.len() == 3 && matches!(layout.slots()[2].role, SlotRole::MsSites { .. });
        if !dense_ms {
            return Err(Error::Representation(
                "explicit MS matrices need a single dense MS register".into(),
            ));
        }
        let mats: Vec<CMatrix> = branches.iter().map(|u| u.to_matrix(n)).collect();
        match self {
            JointState::Pure(s) => {
                let mut out = CVector::zeros(s.dim());
                for (g, m) in mats.iter().enumerate() {
                    let chunk = s.amplitudes().rows(g * rest, rest);
                    out.rows_mut(g * rest, rest).copy_from(&(m * chunk));
                }
                Ok(JointState::Pure(PureState::normalized(out, layout.clone())?))
            }
            JointState::Mixed(rho) => {
                let src = rho.matrix();
                let mut out = CMatrix::zeros(rho.dim(), rho.dim());
                for (g, mg) in mats.iter().enumerate() {
                    for (h, mh) in mats.iter().enumerate() {
                        let block = src.view((g * rest, h * rest), (rest, rest));
                        out.view_mut((g * rest, h * rest), (rest, rest))
                            .copy_from(&(mg * block * mh.adjoint()));
                    }
                }
                Ok(JointState::Mixed(DensityOperator::new(out, layout.clone())?))
            }
            JointState::Ensemble(_) => Err(Error::Representation(
                "explicit MS matrices cannot act on a sector ensemble".into(),
            )),
        }
    }
}

/// `|+>|+>` on the two target-qubit slots.
pub fn plus_plus() -> PureState {
    let layout = SubsystemLayout::new(vec![Slot::target1(), Slot::target2()]).expect("two qubits");
    PureState::new(CVector::from_element(4, c(0.5, 0.0)), layout).expect("normalized")
}

/// `|+>|+> (x) rho_MS`, with `rho_MS = |0...0>` when `eps = 0` and `rho_eps` otherwise.
pub fn prepare_inputs(spec: &CircuitSpec) -> Result<JointState> {
    let layout = spec.layout()?;
    let qubits = plus_plus();
    let ms_layout = layout.select(&(2..layout.len()).collect::<Vec<_>>())?;
    if spec.ms().is_pure() {
        let ms = PureState::zero(ms_layout);
        return Ok(JointState::Pure(qubits.tensor(&ms)?.with_layout(layout)?));
    }
    match spec.backend() {
        Backend::Collective => {
            if ms_layout.len() != 1 {
                return Err(Error::Representation(
                    "mixed MS input on the collective backend needs a single block".into(),
                ));
            }
            let ens = rho_epsilon_ensemble(spec.ms())?;
            let ens = ens.map_members(|m| qubits.tensor(m)?.with_layout(layout.clone()))?;
            Ok(JointState::Ensemble(ens))
        }
        _ => {
            let rho = spec.ms().rho_epsilon_dense()?.with_layout(ms_layout)?;
            let joint = qubits.to_density().tensor(&rho)?.with_layout(layout)?;
            Ok(JointState::Mixed(joint))
        }
    }
}

fn check_input(spec: &CircuitSpec, input: &JointState) -> Result<()> {
    let expect = spec.layout()?;
    if input.layout() != &expect {
        return Err(Error::Layout(format!(
            "input layout {:?} does not match the circuit layout {:?}",
            input.layout().dims(),
            expect.dims()
        )));
    }
    Ok(())
}

/// Runs the circuit's conditional evolution `U_{q,MS}`.
pub fn evolve(spec: &CircuitSpec, input: &JointState) -> Result<JointState> {
    check_input(spec, input)?;
    spec.steps().iter().try_fold(input.clone(), |s, step| s.apply_step(step))
}

/// Applies the inverse of the evolution unitary (the post-processing gate).
pub fn disentangle(spec: &CircuitSpec, state: &JointState) -> Result<JointState> {
    check_input(spec, state)?;
    spec.steps()
        .iter()
        .rev()
        .try_fold(state.clone(), |s, step| s.apply_step(&step.inverse()))
}

/// Reduced state of the two target qubits.
pub fn qubit_marginal(state: &JointState) -> Result<DensityOperator> {
    state.partial_trace(&[0, 1])
}

/// Evolves the prepared input of `spec` in one call.
pub fn run(spec: &CircuitSpec) -> Result<JointState> {
    evolve(spec, &prepare_inputs(spec)?)
}

/// Normalized MS(+rest) state attached to each qubit basis branch `00, 01, 10, 11`
/// of a pure joint state, with the branch weight.
pub fn branch_states(state: &PureState) -> Result<[(f64, Option<PureState>); 4]> {
    state.layout().check_protocol()?;
    let rest_layout = state.layout().select(&(2..state.layout().len()).collect::<Vec<_>>())?;
    let rest = state.dim() / 4;
    let mut out: [(f64, Option<PureState>); 4] = Default::default();
    for (g, slot) in out.iter_mut().enumerate() {
        let chunk: CVector = state.amplitudes().rows(g * rest, rest).into_owned();
        let w = chunk.norm_squared();
        *slot = if w > 1e-24 {
            (w, Some(PureState::normalized(chunk, rest_layout.clone())?))
        } else {
            (w, None)
        };
    }
    Ok(out)
}

/// How one qubit branch of a state compares with the same branch of a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchComparison {
    pub branch: &'static str,
    /// `|<ref|psi>|^2` of the normalized branch states.
    pub fidelity: f64,
    /// `arg <ref|psi>`: the relative phase of the branch.
    pub phase: f64,
}

pub const BRANCH_LABELS: [&str; 4] = ["00", "01", "10", "11"];

pub fn compare_branches(state: &PureState, reference: &PureState) -> Result<Vec<BranchComparison>> {
    let a = branch_states(state)?;
    let b = branch_states(reference)?;
    Ok((0..4)
        .map(|g| {
            let (fidelity, phase) = match (&a[g].1, &b[g].1) {
                (Some(x), Some(y)) => {
                    let z: C64 = y.inner(x);
                    (z.norm_sqr(), z.arg())
                }
                (None, None) => (1.0, 0.0),
                _ => (0.0, 0.0),
            };
            BranchComparison { branch: BRANCH_LABELS[g], fidelity, phase }
        })
        .collect())
}

/// `rho_{q,MS}` after a parity-conditioned evolution, assembled from its four
/// blocks `rho_o, rho_e, chi_oe, chi_eo` rather than by conjugating the input.
pub fn assemble_conditioned_state(v_even: &CMatrix, v_odd: &CMatrix, rho_ms: &DensityOperator) -> Result<DensityOperator> {
    let r = rho_ms.matrix();
    let rho_o = v_odd * r * v_odd.adjoint();
    let rho_e = v_even * r * v_even.adjoint();
    let chi_oe = v_odd * r * v_even.adjoint();
    let chi_eo = chi_oe.adjoint();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = CVector::from_vec(vec![z, c(h, 0.0), c(h, 0.0), z]);
    let e = CVector::from_vec(vec![c(h, 0.0), z, z, c(h, 0.0)]);
    let outer = |a: &CVector, b: &CVector| a * b.adjoint();
    let m = (outer(&o, &o).kronecker(&rho_o)
        + outer(&e, &e).kronecker(&rho_e)
        + outer(&o, &e).kronecker(&chi_oe)
        + outer(&e, &o).kronecker(&chi_eo))
    .map(|x| x * 0.5);
    let layout = SubsystemLayout::new(vec![Slot::target1(), Slot::target2()])?.concat(rho_ms.layout())?;
    DensityOperator::new(m, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(kind: CircuitKind, n: usize, eps: f64, backend: Backend) -> CircuitSpec {
        CircuitSpec::new(kind, MsConfig::new(n, eps).unwrap(), backend).unwrap()
    }

    #[test]
    fn pure_inputs() {
        let s = spec(CircuitKind::ParityCollective, 2, 0.0, Backend::Dense);
        let JointState::Pure(p) = prepare_inputs(&s).unwrap() else { panic!() };
        let l = p.layout().clone();
        for q in 0..4 {
            assert!((p.amplitudes()[l.index(&[q / 2, q % 2, 0])] - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn mixed_inputs() {
        let s = spec(CircuitKind::ParityCollective, 1, 0.5, Backend::Dense);
        let JointState::Mixed(rho) = prepare_inputs(&s).unwrap() else { panic!() };
        let ms = rho.partial_trace(&[2]).unwrap();
        assert!((ms.matrix()[(0, 0)].re - 0.75).abs() < 1e-15);
        assert!((ms.matrix()[(1, 1)].re - 0.25).abs() < 1e-15);
        let q = rho.partial_trace(&[0, 1]).unwrap();
        assert!((q.matrix() - plus_plus().to_density().matrix()).camax() < 1e-15);

        let s = spec(
            CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::CollectiveFlip },
            2,
            0.5,
            Backend::Auto,
        );
        let input = prepare_inputs(&s).unwrap();
        assert!(matches!(input, JointState::Ensemble(_)));
        let p = input.sector_probabilities();
        assert!(p.iter().zip([0.5625, 0.375, 0.0625]).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn parity_collective_matches_psi_one() {
        for backend in [Backend::Dense, Backend::Collective] {
            let s = spec(CircuitKind::ParityCollective, 3, 0.0, backend);
            let JointState::Pure(out) = run(&s).unwrap() else { panic!() };
            let l = out.layout().clone();
            let top = l.slots()[2].dim - 1;
            let h = c(0.5, 0.0);
            for (q1, q2, m) in [(0, 0, 0), (1, 1, 0), (0, 1, top), (1, 0, top)] {
                assert!((out.amplitudes()[l.index(&[q1, q2, m])] - h).norm() < 1e-15);
            }
            assert!((out.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hamming_branches_sit_on_block_excitations() {
        let s = spec(CircuitKind::HammingHalf, 4, 0.0, Backend::Collective);
        let JointState::Pure(out) = run(&s).unwrap() else { panic!() };
        let l = out.layout().clone();
        for (q1, q2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let idx = l.index(&[q1, q2, 2 * q1, 2 * q2]);
            assert!((out.amplitudes()[idx] - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(CircuitSpec::new(CircuitKind::HammingHalf, MsConfig::pure(3).unwrap(), Backend::Dense).is_err());
    }

    #[test]
    fn ghz_circuit_odd_branch_carries_phase_i() {
        for backend in [Backend::Dense, Backend::Collective] {
            let ghz = run(&spec(CircuitKind::GhzLocal, 3, 0.0, backend)).unwrap();
            let par = run(&spec(CircuitKind::ParityCollective, 3, 0.0, backend)).unwrap();
            let cmp = compare_branches(ghz.as_pure().unwrap(), par.as_pure().unwrap()).unwrap();
            for b in &cmp {
                assert!((b.fidelity - 1.0).abs() < 1e-12);
            }
            assert!(cmp[0].phase.abs() < 1e-12 && cmp[3].phase.abs() < 1e-12);
            let half_pi = std::f64::consts::FRAC_PI_2;
            assert!((cmp[1].phase - half_pi).abs() < 1e-12 && (cmp[2].phase - half_pi).abs() < 1e-12);
        }
    }

    #[test]
    fn disentangle_undoes_evolution() {
        let kinds = [CircuitKind::ParityCollective, CircuitKind::HammingHalf, CircuitKind::GhzLocal];
        for kind in kinds {
            for backend in [Backend::Dense, Backend::Collective] {
                let s = spec(kind.clone(), 4, 0.0, backend);
                let input = prepare_inputs(&s).unwrap();
                let back = disentangle(&s, &evolve(&s, &input).unwrap()).unwrap();
                let d = back.as_pure().unwrap().amplitudes() - input.as_pure().unwrap().amplitudes();
                assert!(d.camax() < 1e-12, "{}", kind.name());
            }
        }
    }

    #[test]
    fn identity_conditioning_leaves_qubits_plus_plus() {
        let kind = CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::Identity };
        for backend in [Backend::Dense, Backend::Collective] {
            let s = spec(kind.clone(), 3, 0.4, backend);
            let q = qubit_marginal(&run(&s).unwrap()).unwrap();
            assert!((q.matrix() - plus_plus().to_density().matrix()).camax() < 1e-14);
        }
    }

    #[test]
    fn psi_one_marginal_is_even_odd_mixture() {
        let out = run(&spec(CircuitKind::ParityCollective, 3, 0.0, Backend::Dense)).unwrap();
        let q = qubit_marginal(&out).unwrap();
        let m = q.matrix();
        // 1/2 |e+><e+| + 1/2 |o+><o+|: 1/4 on the diagonal, 1/4 on the (00,11) and (01,10) coherences.
        for (i, j, v) in [(0, 0, 0.25), (3, 3, 0.25), (0, 3, 0.25), (1, 2, 0.25), (0, 1, 0.0), (1, 1, 0.25)] {
            assert!((m[(i, j)].re - v).abs() < 1e-15 && m[(i, j)].im.abs() < 1e-15);
        }
    }

    #[test]
    fn assembled_blocks_match_direct_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let ve = haar_unitary(1 << n, &mut rng);
            let vo = haar_unitary(1 << n, &mut rng);
            let ms = MsConfig::new(n, 0.35).unwrap();
            let s = CircuitSpec::new(
                CircuitKind::ParityConditioned { v_even: MsUnitary::Matrix(ve.clone()), v_odd: MsUnitary::Matrix(vo.clone()) },
                ms,
                Backend::Auto,
            )
            .unwrap();
            assert_eq!(s.backend(), Backend::Dense);
            let direct = run(&s).unwrap().to_density().unwrap();
            let assembled = assemble_conditioned_state(&ve, &vo, &ms.rho_epsilon_dense().unwrap()).unwrap();
            assert!((direct.matrix() - assembled.matrix()).camax() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn conditioned_odd_and_even_pairs_are_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            let ve = haar_unitary(1 << n, &mut rng);
            let vo = haar_unitary(1 << n, &mut rng);
            let s = CircuitSpec::new(
                CircuitKind::ParityConditioned { v_even: MsUnitary::Matrix(ve), v_odd: MsUnitary::Matrix(vo) },
                MsConfig::pure(n).unwrap(),
                Backend::Dense,
            )
            .unwrap();
            let out = run(&s).unwrap();
            let b = branch_states(out.as_pure().unwrap()).unwrap();
            let amp = |g: usize| b[g].1.as_ref().unwrap().amplitudes().clone();
            assert!((amp(1) - amp(2)).camax() < 1e-15);
            assert!((amp(0) - amp(3)).camax() < 1e-15);
        }
    }

    #[test]
    fn collective_backend_rejections() {
        let ms = MsConfig::new(2, 0.2).unwrap();
        let err = CircuitSpec::new(CircuitKind::ParityCollective, ms, Backend::Collective);
        assert!(matches!(err, Err(Error::Representation(_))));
        let m = MsUnitary::Matrix(CMatrix::identity(4, 4));
        let err = CircuitSpec::new(
            CircuitKind::ParityConditioned { v_even: m.clone(), v_odd: m },
            MsConfig::pure(2).unwrap(),
            Backend::Collective,
        );
        assert!(matches!(err, Err(Error::Representation(_))));
        let bad = MsUnitary::Matrix(CMatrix::from_element(4, 4, c(0.5, 0.0)));
        let err = CircuitSpec::new(
            CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: bad },
            MsConfig::pure(2).unwrap(),
            Backend::Dense,
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
