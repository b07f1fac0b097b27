//! Similar-formation control over directed acyclic sensing graphs.
//!
//! This crate synthesizes matrix-weighted Laplacian controllers that steer a
//! planar multi-agent formation into any similar copy (rotation, uniform
//! scaling, translation) of a nominal shape. Two leaders pin the target
//! placement; every follower measures exactly two neighbors through a
//! directed acyclic graph and runs a linear control law whose 2×2 weight
//! blocks are scaled rotations.
//!
//! The pipeline is: describe the sensing topology ([`graph`]), pick a
//! nominal shape ([`geometry`]), synthesize or validate follower weight
//! triples ([`weights`]), assemble and certify the block Laplacian
//! ([`laplacian`]), then integrate the leader-follower dynamics
//! ([`simulator`]).

pub mod error;
pub mod geometry;
pub mod graph;
pub mod laplacian;
pub mod numeric;
pub mod report;
pub mod simulator;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{
    apply_similarity, similar_image_basis, solve_similarity_params, stack_points,
    unstack_points, within_similar_image, NominalConfiguration, SimilarImageBasis,
    SimilarityParams, SimilarityTransform,
};
pub use graph::{FormationGraph, NodeId, Permutation};
pub use laplacian::{
    assemble_laplacian, desired_followers, localizability_report, normalize_laplacian,
    BlockLaplacian, LocalizabilityReport,
};
pub use report::{ValidationReport, Violation};
pub use simulator::{
    closed_form_followers, control_input, random_follower_positions, simulate, tracking_error,
    ErrorSeries, Keyframe, LeaderMotion, LeaderSchedule, Trajectory,
};
pub use weights::{
    normalize_follower_weights, synthesize_follower_weights, EdgeWeight, FollowerWeightTriple,
};
