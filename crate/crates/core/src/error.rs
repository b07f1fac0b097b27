use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph contains a cycle")]
    CycleDetected,
    #[error("node id {id} is out of range for a formation of {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("leader {0} is listed more than once")]
    DuplicateLeader(NodeId),
    #[error("need at least {min} nodes, got {got}")]
    TooFewNodes { got: usize, min: usize },
    #[error("nodes {first} and {second} are collocated")]
    CollocatedNodes { first: NodeId, second: NodeId },
    #[error("scale factor must be positive, got {alpha}")]
    NonPositiveScale { alpha: f64 },
    #[error("need at least two reference points to anchor a similarity, got {got}")]
    TooFewLeaders { got: usize },
    #[error("reference points are degenerate; the similarity system is singular")]
    DegenerateLeaders,
    #[error("weight parameters (c1, c2) must not both be zero")]
    ZeroParameters,
    #[error("follower {follower} and its neighbors must sit at pairwise distinct nominal points")]
    CollocatedTriple { follower: NodeId },
    #[error("the neighbors of follower {follower} share a nominal point; normalized weights are undefined")]
    CollocatedNeighbors { follower: NodeId },
    #[error("weight blocks for follower {follower} violate the equilibrium identities")]
    EquilibriumViolated { follower: NodeId },
    #[error("weight triple for follower {follower} does not match the graph")]
    TopologyMismatch { follower: NodeId },
    #[error("diagonal block of follower {follower} is singular and cannot be normalized")]
    SingularDiagonalBlock { follower: NodeId },
    #[error("follower-to-follower block is singular; desired positions are undefined")]
    SingularFollowerBlock,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("formation is not certified localizable; refusing to simulate")]
    UncertifiedFormation,
    #[error("integration step must be positive, got {dt}")]
    NonPositiveStep { dt: f64 },
    #[error("schedule keyframes must be nonempty with strictly increasing times and positive scales")]
    InvalidSchedule,
}
