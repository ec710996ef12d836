use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    CooperativeParameterOptimization,
    CooperativeImbrication,
}

/// Which side of the hybrid owns a search paradigm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Classical,
    Quantum,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolverTag {
    pub name: &'static str,
    pub classification: Classification,
    pub exploration: Role,
    pub exploitation: Role,
}

const fn tag(name: &'static str, classification: Classification, exploration: Role, exploitation: Role) -> SolverTag {
    SolverTag {
        name,
        classification,
        exploration,
        exploitation,
    }
}

/// Taxonomy of the hybrid solver families. `vqa` is listed for completeness;
/// it has no workflow here.
pub const REGISTRY: [SolverTag; 5] = [
    tag("vqa", Classification::CooperativeParameterOptimization, Role::Shared, Role::Shared),
    tag("qbsolv", Classification::CooperativeImbrication, Role::Classical, Role::Quantum),
    tag("kerberos", Classification::CooperativeImbrication, Role::Shared, Role::Shared),
    tag("hss", Classification::CooperativeImbrication, Role::Classical, Role::Quantum),
    tag("qhs", Classification::CooperativeImbrication, Role::Quantum, Role::Classical),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown solver {0:?}")]
pub struct UnknownSolver(pub String);

pub fn registry_lookup(name: &str) -> Result<SolverTag, UnknownSolver> {
    REGISTRY
        .iter()
        .find(|t| t.name == name)
        .copied()
        .ok_or_else(|| UnknownSolver(name.to_string()))
}
