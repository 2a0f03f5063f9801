//! Permutation-symmetric description of the mesoscopic system (MS).
//!
//! The MS is a register of `N` two-level systems that can only be driven
//! collectively. An MS slot in a [`SubsystemLayout`] is either a dense register
//! ([`SlotRole::MsSites`], dimension `2^n`) or a Dicke ladder
//! ([`SlotRole::MsBlock`], dimension `n + 1`, digit = number of sites in `|1>`).
//! Every operation here works on both, which is what lets the ladder backend
//! reach `N` far beyond the dense cap while staying checkable against it.
//!
//! Excitation counts sites in `|1>`, so the thermal-like state `rho_eps` has
//! excitation probability `eps / 2` per site and sits near `m = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::binomial;
use crate::qstate::linalg::{c, hermitian_eig, CMatrix, CVector, C64, I, ONE};
use crate::qstate::{
    DensityOperator, MonomialOp, OpSum, PureState, QuantumState, Slot, SlotRole, SubsystemLayout,
};

/// Size and initial polarization of the MS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsConfig {
    n: usize,
    epsilon: f64,
}

impl MsConfig {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("the MS needs at least one site".into()));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Domain(format!(
                "epsilon must lie in [0, 1) (polarization in (0, 1]), got {epsilon}"
            )));
        }
        Ok(MsConfig { n, epsilon })
    }

    pub fn pure(n: usize) -> Result<Self> {
        Self::new(n, 0.0)
    }

    pub fn from_polarization(n: usize, polarization: f64) -> Result<Self> {
        Self::new(n, 1.0 - polarization)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn polarization(&self) -> f64 {
        1.0 - self.epsilon
    }

    /// Probability that a site is in `|0>`: `q = 1 - eps/2`.
    pub fn q(&self) -> f64 {
        1.0 - self.epsilon / 2.0
    }

    /// Probability that a site is excited: `eps/2`.
    pub fn excitation_probability(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn is_pure(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Population of each excitation sector in `rho_eps`: `b(m; N, eps/2)`.
    pub fn sector_weights(&self) -> Vec<f64> {
        binomial::pmf_table(self.n as u64, self.excitation_probability())
    }

    /// `rho_eps = ((1 + (1 - eps) sigma_z) / 2)^{(x) N}` on a dense register.
    pub fn rho_epsilon_dense(&self) -> Result<DensityOperator> {
        let slot = Slot::ms_sites(self.n);
        let layout = SubsystemLayout::new(vec![slot])?;
        let p = self.excitation_probability();
        let diag: Vec<f64> = (0..slot.dim)
            .map(|x| binomial::ln_term(x.count_ones() as u64, self.n as u64, p).exp())
            .collect();
        Ok(DensityOperator::from_raw(
            CMatrix::from_diagonal(&CVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)))),
            layout,
        ))
    }
}

/// Amplitudes of one symmetric block over its Dicke states `|m>`, `m = 0..=N_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeLadder {
    amplitudes: CVector,
}

impl DickeLadder {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Layout("a Dicke ladder needs a block of at least one site".into()));
        }
        Ok(DickeLadder { amplitudes })
    }

    pub fn basis(block_size: usize, m: usize) -> Result<Self> {
        if m > block_size {
            return Err(Error::Layout(format!("excitation {m} exceeds block size {block_size}")));
        }
        let mut a = CVector::zeros(block_size + 1);
        a[m] = ONE;
        Self::new(a)
    }

    pub fn block_size(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// `J_x = sum_j sigma_x^j` restricted to the Dicke ladder of `size` sites.
pub fn jx_ladder(size: usize) -> CMatrix {
    let mut m = CMatrix::zeros(size + 1, size + 1);
    for k in 0..size {
        let v = (((k + 1) * (size - k)) as f64).sqrt();
        m[(k + 1, k)] = c(v, 0.0);
        m[(k, k + 1)] = c(v, 0.0);
    }
    m
}

/// `exp(-i theta J_x)` on the ladder of `size` sites.
pub fn rotation_ladder(size: usize, theta: f64) -> CMatrix {
    let eig = hermitian_eig(&jx_ladder(size)).expect("J_x is real symmetric");
    let phases = CVector::from_iterator(
        size + 1,
        eig.values.iter().map(|&l| C64::from_polar(1.0, -theta * l)),
    );
    &eig.vectors * CMatrix::from_diagonal(&phases) * eig.vectors.adjoint()
}

/// `exp(-i theta J_x) = (cos theta - i sin theta sigma_x)^{(x) n}` on a dense register.
pub fn rotation_sites(sites: usize, theta: f64) -> CMatrix {
    let single = CMatrix::from_row_slice(
        2,
        2,
        &[c(theta.cos(), 0.0), c(0.0, -theta.sin()), c(0.0, -theta.sin()), c(theta.cos(), 0.0)],
    );
    (0..sites).fold(CMatrix::identity(1, 1), |acc, _| acc.kronecker(&single))
}

pub fn collective_rotation(theta: f64, block: &DickeLadder) -> DickeLadder {
    let amps = rotation_ladder(block.block_size(), theta) * block.amplitudes();
    DickeLadder { amplitudes: amps }
}

/// Phase by which `exp(-i pi/2 J_x)` differs from the bare flip on `n` sites:
/// `exp(-i pi/2 J_x) = (-i)^n X^{(x) n}`, so multiplying by `i^n` recovers the flip.
pub fn flip_phase_compensation(n: usize) -> C64 {
    I.powu(n as u32)
}

/// Isometry embedding the Dicke ladder of `size` sites into the dense register.
pub fn dicke_isometry(size: usize) -> CMatrix {
    let mut w = CMatrix::zeros(1 << size, size + 1);
    for x in 0..(1usize << size) {
        let m = x.count_ones() as usize;
        w[(x, m)] = c(binomial::choose(size as u64, m as u64).sqrt().recip(), 0.0);
    }
    w
}

fn digit_flip(slot: &Slot, digit: usize) -> usize {
    match slot.role {
        SlotRole::MsSites { sites } => digit ^ ((1usize << sites) - 1),
        SlotRole::MsBlock { size } => size - digit,
        _ => digit,
    }
}

fn check_control(layout: &SubsystemLayout, control: Option<usize>) -> Result<()> {
    if let Some(c) = control {
        let slot = layout
            .slots()
            .get(c)
            .ok_or_else(|| Error::Layout(format!("control slot {c} out of range")))?;
        if slot.dim != 2 || slot.is_ms() {
            return Err(Error::Layout(format!("control slot {c} is not a qubit")));
        }
    }
    Ok(())
}

/// `X` on every site of the listed MS slots (all MS slots when `ms_slots` is empty),
/// applied on branches where `control` is `|1>`, or unconditionally.
pub fn flip_operator(
    layout: &SubsystemLayout,
    control: Option<usize>,
    ms_slots: &[usize],
) -> Result<MonomialOp> {
    check_control(layout, control)?;
    let targets: Vec<usize> = if ms_slots.is_empty() { layout.ms_slots() } else { ms_slots.to_vec() };
    if targets.is_empty() {
        return Err(Error::Layout("layout has no MS slot to flip".into()));
    }
    for &t in &targets {
        if !layout.slots().get(t).is_some_and(Slot::is_ms) {
            return Err(Error::Layout(format!("slot {t} is not an MS slot")));
        }
    }
    MonomialOp::from_fn(layout.total_dim(), |idx| {
        let mut d = layout.digits(idx);
        if control.is_none_or(|c| d[c] == 1) {
            for &t in &targets {
                d[t] = digit_flip(&layout.slots()[t], d[t]);
            }
        }
        (layout.index(&d), ONE)
    })
}

/// Phase-exact (controlled) `X^{(x) N}` on the whole MS.
pub fn collective_flip<S: QuantumState>(state: &S, control: Option<usize>) -> Result<S> {
    state.apply_sum(&OpSum::single(flip_operator(state.layout(), control, &[])?))
}

/// Like [`collective_flip`] but restricted to the listed MS slots.
pub fn collective_flip_slots<S: QuantumState>(
    state: &S,
    control: Option<usize>,
    ms_slots: &[usize],
) -> Result<S> {
    state.apply_sum(&OpSum::single(flip_operator(state.layout(), control, ms_slots)?))
}

/// `exp(-/+ i pi/4 prod_j sigma_x^j) = (I -/+ i F) / sqrt(2)` with `F` the full flip.
pub fn ghz_operator(layout: &SubsystemLayout, inverse: bool) -> Result<OpSum> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if inverse { 1.0 } else { -1.0 };
    OpSum::new(vec![
        (c(h, 0.0), MonomialOp::identity(layout.total_dim())),
        (c(0.0, sign * h), flip_operator(layout, None, &[])?),
    ])
}

pub fn ghz_entangler<S: QuantumState>(state: &S, inverse: bool) -> Result<S> {
    state.apply_sum(&ghz_operator(state.layout(), inverse)?)
}

/// Which end of the MS chain a target qubit touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// Site 1: most significant bit of the first MS slot.
    First,
    /// Site N: least significant bit of the last MS slot.
    Last,
}

/// Controlled-Z from `control` onto an edge site of the MS.
///
/// On a Dicke ladder the edge site is not addressable; the gate is only defined
/// when the state lives on the GHZ manifold `{m = 0, m = N}` of a single block,
/// where it is a `-1` phase on the `m = N` component.
pub fn edge_phase_gate<S: QuantumState>(state: &S, control: usize, edge: Edge) -> Result<S> {
    let layout = state.layout();
    check_control(layout, Some(control))?;
    let ms = layout.ms_slots();
    let (&first, &last) = match (ms.first(), ms.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Layout("layout has no MS slot".into())),
    };
    let has_blocks = ms
        .iter()
        .any(|&s| matches!(layout.slots()[s].role, SlotRole::MsBlock { .. }));

    let op = if has_blocks {
        if ms.len() != 1 {
            return Err(Error::Representation(
                "edge phase on the collective backend needs a single MS block".into(),
            ));
        }
        let n = layout.ms_size();
        let table = layout.excitation_table();
        let mut offending = std::collections::BTreeSet::new();
        for (idx, p) in state.populations().into_iter().enumerate() {
            let m = table[idx];
            if m != 0 && m != n && p > 1e-12 {
                offending.insert(m);
            }
        }
        if !offending.is_empty() {
            return Err(Error::Representation(format!(
                "edge phase gate needs MS support on sectors {{0, {n}}}; state populates sectors {offending:?}"
            )));
        }
        MonomialOp::from_fn(layout.total_dim(), |idx| {
            let d = layout.digits(idx);
            let phase = if d[control] == 1 && table[idx] == n && n > 0 { -ONE } else { ONE };
            (idx, phase)
        })?
    } else {
        let (slot, bit) = match edge {
            Edge::First => (first, layout.slots()[first].ms_sites_count() - 1),
            Edge::Last => (last, 0),
        };
        MonomialOp::from_fn(layout.total_dim(), |idx| {
            let d = layout.digits(idx);
            let phase = if d[control] == 1 && (d[slot] >> bit) & 1 == 1 { -ONE } else { ONE };
            (idx, phase)
        })?
    };
    state.apply_sum(&OpSum::single(op))
}

/// Controlled `exp(-i theta J_x)` on one MS slot (dense or ladder).
pub fn controlled_rotation(
    state: &PureState,
    control: usize,
    ms_slot: usize,
    theta: f64,
) -> Result<PureState> {
    let layout = state.layout();
    check_control(layout, Some(control))?;
    let slot = *layout
        .slots()
        .get(ms_slot)
        .ok_or_else(|| Error::Layout(format!("slot {ms_slot} out of range")))?;
    let rot = match slot.role {
        SlotRole::MsSites { sites } => rotation_sites(sites, theta),
        SlotRole::MsBlock { size } => rotation_ladder(size, theta),
        _ => return Err(Error::Layout(format!("slot {ms_slot} is not an MS slot"))),
    };
    let d = slot.dim;
    let mut op = CMatrix::identity(2 * d, 2 * d);
    op.view_mut((d, d), (d, d)).copy_from(&rot);
    state.apply(&op, &[control, ms_slot])
}

/// `p(m) = <Pi(m)>` for `m = 0..=N`.
pub fn sector_probabilities<S: QuantumState>(state: &S) -> Vec<f64> {
    let layout = state.layout();
    let n = layout.ms_size();
    let table = layout.excitation_table();
    let mut p = vec![0.0; n + 1];
    for (idx, pop) in state.populations().into_iter().enumerate() {
        p[table[idx]] += pop;
    }
    p
}

/// Rewrites every Dicke-ladder slot as the dense register it stands for.
pub fn expand_blocks(state: &PureState) -> Result<PureState> {
    let old = state.layout();
    let new_slots: Vec<Slot> = old
        .slots()
        .iter()
        .map(|s| match s.role {
            SlotRole::MsBlock { size } => Slot::ms_sites(size),
            _ => *s,
        })
        .collect();
    let new = SubsystemLayout::new(new_slots)?;
    let norms: Vec<Vec<f64>> = old
        .slots()
        .iter()
        .map(|s| match s.role {
            SlotRole::MsBlock { size } => (0..=size)
                .map(|m| binomial::choose(size as u64, m as u64).sqrt().recip())
                .collect(),
            _ => Vec::new(),
        })
        .collect();
    let amps = CVector::from_iterator(
        new.total_dim(),
        (0..new.total_dim()).map(|idx| {
            let mut d = new.digits(idx);
            let mut scale = 1.0;
            for (k, s) in old.slots().iter().enumerate() {
                if let SlotRole::MsBlock { .. } = s.role {
                    let m = d[k].count_ones() as usize;
                    scale *= norms[k][m];
                    d[k] = m;
                }
            }
            state.amplitudes()[old.index(&d)] * scale
        }),
    );
    PureState::new(amps, new)
}

/// Mixed MS state on the ladder backend: an ensemble of pure members, one per
/// excitation sector of `rho_eps`, weighted by the sector population.
///
/// A member `|D_m>` stands in for the `C(N, m)` basis states of that sector. The
/// substitution is exact for sector-diagonal dynamics (identity, collective
/// flip) and sector measurements, which is all the ladder backend allows on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorEnsemble {
    members: Vec<(f64, PureState)>,
    layout: SubsystemLayout,
}

impl SectorEnsemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let layout = members
            .first()
            .map(|m| m.1.layout().clone())
            .ok_or_else(|| Error::Validation("empty ensemble".into()))?;
        if members.iter().any(|m| *m.1.layout() != layout) {
            return Err(Error::Layout("ensemble members have different layouts".into()));
        }
        if members.iter().any(|m| m.0 < 0.0) {
            return Err(Error::Validation("negative ensemble weight".into()));
        }
        Ok(SectorEnsemble { members, layout })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.0).sum()
    }

    /// Reduced state on `keep`, summed over members.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let parts = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, s.partial_trace(keep)?)))
            .collect::<Result<Vec<_>>>()?;
        DensityOperator::mixture(&parts)
    }

    pub fn map_members(&self, f: impl Fn(&PureState) -> Result<PureState>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        SectorEnsemble::new(members)
    }
}

impl QuantumState for SectorEnsemble {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn apply_sum(&self, op: &OpSum) -> Result<Self> {
        self.map_members(|s| op.apply_pure(s))
    }

    fn populations(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.layout.total_dim()];
        for (w, s) in &self.members {
            for (acc, a) in p.iter_mut().zip(s.amplitudes().iter()) {
                *acc += w * a.norm_sqr();
            }
        }
        p
    }
}

/// Single-block ladder ensemble for `rho_eps`; sectors with zero weight are dropped.
pub fn rho_epsilon_ensemble(ms: &MsConfig) -> Result<SectorEnsemble> {
    let layout = SubsystemLayout::new(vec![Slot::ms_block(ms.n())])?;
    let members = ms
        .sector_weights()
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .map(|(m, w)| Ok((w, PureState::basis(layout.clone(), &[m])?)))
        .collect::<Result<Vec<_>>>()?;
    SectorEnsemble::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::unitarity_error;
    use crate::qstate::CVector;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn ladder_layout(n: usize) -> SubsystemLayout {
        SubsystemLayout::new(vec![Slot::ms_block(n)]).unwrap()
    }

    fn close(a: &CVector, b: &CVector, tol: f64) -> bool {
        (a - b).camax() < tol
    }

    #[test]
    fn ms_config_domain() {
        assert!(MsConfig::new(0, 0.1).is_err());
        assert!(MsConfig::new(3, 1.0).is_err());
        assert!(MsConfig::new(3, -0.1).is_err());
        assert!(MsConfig::new(3, f64::NAN).is_err());
        let ms = MsConfig::from_polarization(2, 0.5).unwrap();
        assert_eq!(ms.q(), 0.75);
        assert_eq!(ms.sector_weights(), vec![0.5625, 0.375, 0.0625]);
    }

    #[test]
    fn rotation_zero_is_identity() {
        let l = DickeLadder::basis(4, 1).unwrap();
        let r = collective_rotation(0.0, &l);
        assert!(close(r.amplitudes(), l.amplitudes(), 1e-14));
    }

    #[test]
    fn rotation_half_pi_flips_with_phase() {
        // Dense oracle: exp(-i pi/2 sum sigma_x) on 3 qubits maps |000> to (-i)^3 |111>.
        let dense = rotation_sites(3, FRAC_PI_2);
        assert!((dense[(7, 0)] - c(0.0, 1.0)).norm() < 1e-14);
        let r = collective_rotation(FRAC_PI_2, &DickeLadder::basis(3, 0).unwrap());
        let mut expect = CVector::zeros(4);
        expect[3] = c(0.0, 1.0); // (-i)^3 = i
        assert!(close(r.amplitudes(), &expect, 1e-12));
        assert!((flip_phase_compensation(3) * c(0.0, 1.0) - ONE).norm() < 1e-15);
    }

    #[test]
    fn rotation_single_site() {
        let r = collective_rotation(FRAC_PI_4, &DickeLadder::basis(1, 0).unwrap());
        let expect = CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)]);
        assert!(close(r.amplitudes(), &expect, 1e-14));
    }

    #[test]
    fn ladder_rotation_is_the_symmetric_restriction_of_the_dense_one() {
        for n in 1..=5 {
            let w = dicke_isometry(n);
            for theta in [0.3, 1.1, FRAC_PI_2, 2.9] {
                let projected = w.adjoint() * rotation_sites(n, theta) * &w;
                let ladder = rotation_ladder(n, theta);
                assert!((projected - &ladder).camax() < 1e-12, "n={n} theta={theta}");
                assert!(unitarity_error(&ladder) < 1e-12);
            }
        }
    }

    #[test]
    fn flips_unconditional_and_controlled() {
        let l = ladder_layout(5);
        let s = PureState::basis(l.clone(), &[0]).unwrap();
        let f = collective_flip(&s, None).unwrap();
        assert_eq!(f.amplitudes()[5], ONE);
        let dense = SubsystemLayout::new(vec![Slot::ms_sites(3)]).unwrap();
        let f = collective_flip(&PureState::zero(dense), None).unwrap();
        assert_eq!(f.amplitudes()[7], ONE);

        // (|0>_c|m=0> + |1>_c|m=0>)/sqrt(2), N=2 -> (|0>_c|m=0> + |1>_c|m=2>)/sqrt(2)
        let cl = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_block(2)]).unwrap();
        let h = c(FRAC_1_SQRT_2, 0.0);
        let mut a = CVector::zeros(6);
        a[cl.index(&[0, 0])] = h;
        a[cl.index(&[1, 0])] = h;
        let s = PureState::new(a, cl.clone()).unwrap();
        let out = collective_flip(&s, Some(0)).unwrap();
        assert_eq!(out.amplitudes()[cl.index(&[0, 0])], h);
        assert_eq!(out.amplitudes()[cl.index(&[1, 2])], h);
        // dense oracle: controlled X(x)X
        let dl = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_sites(2)]).unwrap();
        let mut a = CVector::zeros(8);
        a[0] = h;
        a[4] = h;
        let dense = collective_flip(&PureState::new(a, dl).unwrap(), Some(0)).unwrap();
        assert!(close(expand_blocks(&out).unwrap().amplitudes(), dense.amplitudes(), 1e-15));
    }

    #[test]
    fn flip_is_an_involution() {
        let l = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_block(3), Slot::ms_block(2)]).unwrap();
        let amps = CVector::from_iterator(l.total_dim(), (0..l.total_dim()).map(|i| c(i as f64, -(i as f64) / 3.0)));
        let s = PureState::normalized(amps, l).unwrap();
        let twice = collective_flip(&collective_flip(&s, Some(0)).unwrap(), Some(0)).unwrap();
        assert_eq!(twice.amplitudes(), s.amplitudes());
    }

    #[test]
    fn ghz_entangler_from_ground() {
        for n in [1, 2, 4] {
            let s = PureState::zero(ladder_layout(n));
            let g = ghz_entangler(&s, false).unwrap();
            assert!((g.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
            assert!((g.amplitudes()[n] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
            // forward again lands on |1^N> up to a phase
            let gg = ghz_entangler(&g, false).unwrap();
            assert!((gg.amplitudes()[n].norm() - 1.0).abs() < 1e-14);
            let back = ghz_entangler(&g, true).unwrap();
            assert!(close(back.amplitudes(), s.amplitudes(), 1e-15));
        }
        // 2-qubit dense oracle exp(-i pi/4 X(x)X)|00> = (|00> - i|11>)/sqrt(2)
        let xx = crate::qstate::linalg::kron(&crate::qstate::linalg::pauli_x(), &crate::qstate::linalg::pauli_x());
        let u = (CMatrix::identity(4, 4) - xx.map(|z| z * I)).map(|z| z * FRAC_1_SQRT_2);
        let dl = SubsystemLayout::new(vec![Slot::ms_sites(2)]).unwrap();
        let expect = &u * PureState::zero(dl.clone()).amplitudes();
        let got = ghz_entangler(&PureState::zero(dl), false).unwrap();
        assert!(close(got.amplitudes(), &expect, 1e-15));
    }

    #[test]
    fn edge_phase_on_ghz_manifold() {
        let h = c(FRAC_1_SQRT_2, 0.0);
        for n in [1usize, 4] {
            let cl = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_block(n)]).unwrap();
            let mut a = CVector::zeros(cl.total_dim());
            a[cl.index(&[1, 0])] = h;
            a[cl.index(&[1, n])] = h;
            let s = PureState::new(a, cl.clone()).unwrap();
            let out = edge_phase_gate(&s, 0, Edge::First).unwrap();
            assert_eq!(out.amplitudes()[cl.index(&[1, n])], -h);
            assert_eq!(out.amplitudes()[cl.index(&[1, 0])], h);

            let dense_in = expand_blocks(&s).unwrap();
            for edge in [Edge::First, Edge::Last] {
                let d = edge_phase_gate(&dense_in, 0, edge).unwrap();
                assert!(close(d.amplitudes(), expand_blocks(&out).unwrap().amplitudes(), 1e-12));
            }
        }
        let cl = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_block(4)]).unwrap();
        let s = PureState::basis(cl.clone(), &[0, 4]).unwrap();
        assert_eq!(edge_phase_gate(&s, 0, Edge::First).unwrap(), s);
        let s = PureState::basis(cl, &[1, 2]).unwrap();
        match edge_phase_gate(&s, 0, Edge::First) {
            Err(Error::Representation(msg)) => assert!(msg.contains("{2}")),
            other => panic!("expected representation error, got {other:?}"),
        }
    }

    #[test]
    fn edge_phase_addresses_single_sites_densely() {
        let l = SubsystemLayout::new(vec![Slot::qubit(), Slot::ms_sites(3)]).unwrap();
        // site 1 excited only: digit 0b100
        let s = PureState::basis(l.clone(), &[1, 0b100]).unwrap();
        assert_eq!(edge_phase_gate(&s, 0, Edge::First).unwrap().amplitudes()[l.index(&[1, 4])], -ONE);
        assert_eq!(edge_phase_gate(&s, 0, Edge::Last).unwrap().amplitudes()[l.index(&[1, 4])], ONE);
    }

    #[test]
    fn sector_probabilities_of_rho_epsilon() {
        let ms = MsConfig::new(2, 0.5).unwrap();
        let p = sector_probabilities(&ms.rho_epsilon_dense().unwrap());
        let expect = [0.5625, 0.375, 0.0625];
        assert!(p.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
        let e = rho_epsilon_ensemble(&ms).unwrap();
        assert!(sector_probabilities(&e).iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(sector_probabilities(&PureState::zero(ladder_layout(3))), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rho_epsilon_dense_is_the_product_state() {
        let ms = MsConfig::new(3, 0.4).unwrap();
        let rho = ms.rho_epsilon_dense().unwrap();
        let single = DensityOperator::from_diagonal(&[0.8, 0.2], SubsystemLayout::qubits(1).unwrap()).unwrap();
        let prod = single.tensor(&single).unwrap().tensor(&single).unwrap();
        assert!((rho.matrix() - prod.matrix()).camax() < 1e-15);
        let pure = MsConfig::pure(3).unwrap().rho_epsilon_dense().unwrap();
        assert_eq!(pure.matrix()[(0, 0)], ONE);
        assert!((pure.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dicke_isometry_is_orthonormal() {
        let w = dicke_isometry(4);
        assert!((w.adjoint() * &w - CMatrix::identity(5, 5)).camax() < 1e-14);
    }
}
