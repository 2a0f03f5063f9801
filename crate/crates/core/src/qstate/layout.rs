use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::MAX_DENSE_DIM;

/// What a tensor factor represents in a protocol state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum SlotRole {
    TargetQubit1,
    TargetQubit2,
    /// `sites` two-level systems stored densely, site 1 as the most significant bit.
    MsSites { sites: usize },
    /// A permutation-symmetric block of `size` sites in the Dicke basis; digit = excitation.
    MsBlock { size: usize },
    Apparatus,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub role: SlotRole,
    pub dim: usize,
}

impl Slot {
    pub fn qubit() -> Self {
        Slot { role: SlotRole::Generic, dim: 2 }
    }

    pub fn generic(dim: usize) -> Self {
        Slot { role: SlotRole::Generic, dim }
    }

    pub fn target1() -> Self {
        Slot { role: SlotRole::TargetQubit1, dim: 2 }
    }

    pub fn target2() -> Self {
        Slot { role: SlotRole::TargetQubit2, dim: 2 }
    }

    pub fn apparatus() -> Self {
        Slot { role: SlotRole::Apparatus, dim: 2 }
    }

    /// Dense register of `sites` two-level systems (dimension `2^sites`).
    pub fn ms_sites(sites: usize) -> Self {
        Slot { role: SlotRole::MsSites { sites }, dim: 1usize << sites }
    }

    /// Dicke ladder of a block with `size` sites (dimension `size + 1`).
    pub fn ms_block(size: usize) -> Self {
        Slot { role: SlotRole::MsBlock { size }, dim: size + 1 }
    }

    pub fn is_ms(&self) -> bool {
        matches!(self.role, SlotRole::MsSites { .. } | SlotRole::MsBlock { .. })
    }

    /// Number of MS sites held by this slot (zero for non-MS slots).
    pub fn ms_sites_count(&self) -> usize {
        match self.role {
            SlotRole::MsSites { sites } => sites,
            SlotRole::MsBlock { size } => size,
            _ => 0,
        }
    }

    /// Excitation carried by basis digit `digit` of this slot.
    pub fn excitation(&self, digit: usize) -> usize {
        match self.role {
            SlotRole::MsSites { .. } => digit.count_ones() as usize,
            SlotRole::MsBlock { .. } => digit,
            _ => 0,
        }
    }
}

/// Ordered tensor factors of a state. Slot 0 is the leftmost factor and
/// basis indices are big-endian over slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsystemLayout {
    slots: Vec<Slot>,
}

impl SubsystemLayout {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Layout("layout needs at least one slot".into()));
        }
        let mut total: usize = 1;
        for (i, s) in slots.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::Layout(format!("slot {i} has dimension 0")));
            }
            total = total
                .checked_mul(s.dim)
                .filter(|&t| t <= MAX_DENSE_DIM)
                .ok_or_else(|| {
                    Error::Layout(format!(
                        "total dimension exceeds the dense cap of {MAX_DENSE_DIM}"
                    ))
                })?;
        }
        Ok(SubsystemLayout { slots })
    }

    /// Layout of `n` generic qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![Slot::qubit(); n])
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.slots.iter().map(|s| s.dim).product()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        Self::new(slots)
    }

    /// Sub-layout of the given slots, in the given order.
    pub fn select(&self, slots: &[usize]) -> Result<Self> {
        Self::new(slots.iter().map(|&i| self.slots[i]).collect())
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.slots.len()];
        for i in (0..self.slots.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.slots[i + 1].dim;
        }
        strides
    }

    /// Per-slot digits of a basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.slots.len()];
        for i in (0..self.slots.len()).rev() {
            out[i] = index % self.slots[i].dim;
            index /= self.slots[i].dim;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.slots)
            .fold(0, |acc, (&d, s)| acc * s.dim + d)
    }

    pub fn find(&self, role: SlotRole) -> Option<usize> {
        self.slots.iter().position(|s| s.role == role)
    }

    pub fn ms_slots(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.slots[i].is_ms()).collect()
    }

    /// Total number of MS sites over all MS slots.
    pub fn ms_size(&self) -> usize {
        self.slots.iter().map(Slot::ms_sites_count).sum()
    }

    /// Total MS excitation for every basis index.
    pub fn excitation_table(&self) -> Vec<usize> {
        let strides = self.strides();
        let mut table = vec![0usize; self.total_dim()];
        for (slot_idx, slot) in self.slots.iter().enumerate() {
            if !slot.is_ms() {
                continue;
            }
            let stride = strides[slot_idx];
            for (idx, t) in table.iter_mut().enumerate() {
                *t += slot.excitation((idx / stride) % slot.dim);
            }
        }
        table
    }

    /// Checks the protocol shape: slots 0 and 1 are the two target qubits.
    pub fn check_protocol(&self) -> Result<()> {
        let targets = self
            .slots
            .iter()
            .filter(|s| matches!(s.role, SlotRole::TargetQubit1 | SlotRole::TargetQubit2))
            .count();
        if targets != 2
            || self.slots.len() < 2
            || self.slots[0].role != SlotRole::TargetQubit1
            || self.slots[1].role != SlotRole::TargetQubit2
        {
            return Err(Error::Layout(
                "protocol layouts need exactly two target qubits in slots 0 and 1".into(),
            ));
        }
        Ok(())
    }

    /// Offsets of all basis states of `slots` (big-endian in the given order),
    /// with every other slot at digit zero.
    pub(crate) fn offsets(&self, slots: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &s in slots {
            let mut next = Vec::with_capacity(out.len() * self.slots[s].dim);
            for &base in &out {
                for d in 0..self.slots[s].dim {
                    next.push(base + d * strides[s]);
                }
            }
            out = next;
        }
        out
    }

    /// Slots not in `slots`, ascending.
    pub(crate) fn complement(&self, slots: &[usize]) -> Vec<usize> {
        (0..self.slots.len()).filter(|i| !slots.contains(i)).collect()
    }

    pub(crate) fn check_slots(&self, slots: &[usize]) -> Result<()> {
        for (k, &s) in slots.iter().enumerate() {
            if s >= self.slots.len() {
                return Err(Error::Layout(format!(
                    "slot {s} out of range for a {}-slot layout",
                    self.slots.len()
                )));
            }
            if slots[..k].contains(&s) {
                return Err(Error::Layout(format!("slot {s} selected twice")));
            }
        }
        Ok(())
    }
}
