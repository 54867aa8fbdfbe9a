use core::fmt;
use core::str::FromStr;

use crate::litmus::{FenceKind, Instr, LoadMode, StoreMode};
use crate::propagation::Policy;

/// The ten memory-model presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelId {
    Sc,
    Tso,
    Pso,
    Rmo,
    Armv8,
    Power,
    Sra,
    Psi,
    Wra,
    Fifo,
}

impl ModelId {
    pub const ALL: [ModelId; 10] = [
        ModelId::Sc,
        ModelId::Tso,
        ModelId::Pso,
        ModelId::Rmo,
        ModelId::Armv8,
        ModelId::Power,
        ModelId::Sra,
        ModelId::Psi,
        ModelId::Wra,
        ModelId::Fifo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Sc => "SC",
            ModelId::Tso => "TSO",
            ModelId::Pso => "PSO",
            ModelId::Rmo => "RMO",
            ModelId::Armv8 => "ARMv8",
            ModelId::Power => "POWER",
            ModelId::Sra => "SRA",
            ModelId::Psi => "PSI",
            ModelId::Wra => "WRA",
            ModelId::Fifo => "FIFO",
        }
    }

    pub fn policy(self) -> Policy {
        match self {
            ModelId::Sc | ModelId::Tso | ModelId::Pso | ModelId::Rmo | ModelId::Armv8 => {
                Policy::TrivialMca
            }
            ModelId::Power | ModelId::Sra | ModelId::Psi => Policy::Coherent,
            ModelId::Wra => Policy::PoLoc,
            ModelId::Fifo => Policy::Fifo,
        }
    }

    /// Models whose buffers are subsumed by the propagation unit, so each
    /// instruction may execute atomically against it.
    pub fn fusable(self) -> bool {
        matches!(self, ModelId::Sra | ModelId::Psi | ModelId::Wra | ModelId::Fifo)
    }

    pub fn allows_fence(self, kind: FenceKind) -> bool {
        match kind {
            _ if self == ModelId::Sc => true,
            FenceKind::Isync => true,
            FenceKind::Full => self != ModelId::Fifo,
            FenceKind::Lwsync => matches!(
                self,
                ModelId::Power | ModelId::Sra | ModelId::Psi | ModelId::Wra
            ),
            _ => matches!(
                self,
                ModelId::Sc | ModelId::Tso | ModelId::Pso | ModelId::Rmo
            ),
        }
    }

    pub fn allows_acq_rel(self) -> bool {
        matches!(self, ModelId::Armv8 | ModelId::Power)
    }

    /// Whether `instr` may appear in a source program compiled for this model.
    pub fn admits(self, instr: &Instr) -> bool {
        match instr {
            Instr::Fence(k) => self.allows_fence(*k),
            Instr::Load { mode: LoadMode::Acquire, .. }
            | Instr::Store { mode: StoreMode::Release, .. } => self.allows_acq_rel(),
            Instr::Rmw { .. } => self != ModelId::Fifo,
            _ => true,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown model `{0}`")]
pub struct UnknownModel(pub alloc::string::String);

impl FromStr for ModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownModel(s.into()))
    }
}
