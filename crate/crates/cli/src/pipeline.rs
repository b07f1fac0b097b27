//! The scenario pipeline: validate, synthesize, certify, simulate.
//!
//! Stage order fixes the exit-code contract. Anything wrong with the input
//! itself (parse failures, assumption violations, collocated points, bad
//! weight data) surfaces as [`RunError::Input`]; a structurally sound
//! scenario that cannot be certified localizable, or whose initial leaders
//! are incompatible with every similar pose of the shape, surfaces as
//! [`RunError::Certification`]. Convergence never affects the exit code;
//! it is reported in the summary.

use std::time::Instant;

use nalgebra::{DVector, Vector2};

use simform::geometry::{COLLOCATION_TOLERANCE, FEASIBILITY_TOLERANCE};
use simform::weights::WEAK_EDGE_TOLERANCE;
use simform::{
    assemble_laplacian, localizability_report, normalize_follower_weights, normalize_laplacian,
    simulate, solve_similarity_params, stack_points, synthesize_follower_weights, tracking_error,
    unstack_points, BlockLaplacian, EdgeWeight, ErrorSeries, FollowerWeightTriple, Keyframe,
    LeaderMotion, LeaderSchedule, LocalizabilityReport, SimilarityParams, Trajectory,
};

use crate::error::{RunError, RunResult};
use crate::scenario::{BlockSpec, InitialSpec, Scenario, ScheduleSpec};
use crate::summary::RunSummary;

/// Final tracking error below which a run counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

/// A certified-or-not formation built from a scenario.
#[derive(Debug)]
pub struct BuiltFormation {
    pub laplacian: BlockLaplacian,
    pub report: LocalizabilityReport,
    /// Human-readable notes about near-singular edge weights.
    pub warnings: Vec<String>,
}

/// Everything a completed run produces.
#[derive(Debug)]
pub struct RunOutcome {
    pub name: String,
    pub trajectory: Trajectory,
    pub errors: ErrorSeries,
    pub report: LocalizabilityReport,
    pub summary: RunSummary,
    pub warnings: Vec<String>,
}

/// Validates the scenario's structure and assembles its normalized
/// Laplacian.
pub fn build_formation(scenario: &Scenario) -> RunResult<BuiltFormation> {
    let topology = scenario.graph.validate_topology();
    if !topology.is_valid() {
        return Err(RunError::Input(format!(
            "invalid formation structure:\n{topology}"
        )));
    }
    let collocation = scenario
        .tolerances
        .collocation
        .unwrap_or(COLLOCATION_TOLERANCE);
    let spacing = scenario.nominal.check_collocation_with(collocation);
    if !spacing.is_valid() {
        return Err(RunError::Input(format!(
            "invalid nominal configuration:\n{spacing}"
        )));
    }

    let mut triples = Vec::new();
    let mut warnings = Vec::new();
    for follower in scenario.graph.followers() {
        // Validation passed, so every list has exactly two entries.
        let list = &scenario.neighbor_lists[&follower];
        let (j, k) = (list[0], list[1]);
        let weight_error =
            |e: simform::Error| RunError::Input(format!("weights for follower {follower}: {e}"));
        let triple = match scenario.weights.get(&follower) {
            None => normalize_follower_weights(follower, (j, k), &scenario.nominal)
                .map_err(weight_error)?,
            Some(spec) => match (&spec.params, &spec.blocks) {
                (Some([c1, c2]), None) => {
                    synthesize_follower_weights(follower, (j, k), &scenario.nominal, *c1, *c2)
                        .map_err(weight_error)?
                }
                (None, Some(blocks)) => triple_from_blocks(scenario, follower, (j, k), blocks)?,
                _ => unreachable!("scenario parsing enforces exactly one override form"),
            },
        };
        for (neighbor, magnitude) in triple.weak_edges() {
            warnings.push(format!(
                "follower {follower}: weight toward {neighbor} has magnitude {magnitude:.3e} \
                 (below {WEAK_EDGE_TOLERANCE:.0e}); the edge carries almost no information"
            ));
        }
        triples.push(triple);
    }

    let assembled = assemble_laplacian(&scenario.graph, &triples)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let laplacian = normalize_laplacian(&assembled)
        .map_err(|e| RunError::Certification(format!("cannot normalize the formation: {e}")))?;
    let report = localizability_report(&laplacian, &scenario.graph);
    Ok(BuiltFormation {
        laplacian,
        report,
        warnings,
    })
}

fn triple_from_blocks(
    scenario: &Scenario,
    follower: simform::NodeId,
    neighbors: (simform::NodeId, simform::NodeId),
    blocks: &BlockSpec,
) -> RunResult<FollowerWeightTriple> {
    let read = |rows: [[f64; 2]; 2]| {
        EdgeWeight::from_matrix(&nalgebra::Matrix2::new(
            rows[0][0], rows[0][1], rows[1][0], rows[1][1],
        ))
    };
    let (first, second, diagonal) = match (
        read(blocks.first),
        read(blocks.second),
        read(blocks.diagonal),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(RunError::Input(format!(
                "weights for follower {follower}: a block is not a scaled rotation \
                 [[a, -b], [b, a]]"
            )))
        }
    };
    FollowerWeightTriple::from_blocks(
        follower,
        neighbors,
        first,
        second,
        diagonal,
        &scenario.nominal,
    )
    .map_err(|e| RunError::Input(format!("weights for follower {follower}: {e}")))
}

/// Rejects initial leader positions that no similar pose of the nominal
/// shape can explain. With two distinct leaders any placement fits
/// exactly; with more leaders this is a genuine constraint.
pub fn leader_gate(
    nominal_leaders: &[Vector2<f64>],
    initial_leaders: &[Vector2<f64>],
    tolerance: f64,
) -> RunResult<SimilarityParams> {
    let fit = solve_similarity_params(initial_leaders, nominal_leaders)
        .map_err(|e| RunError::Certification(format!("leader placement rejected: {e}")))?;
    let scale = 1.0 + stack_points(initial_leaders).norm();
    if fit.residual > tolerance * scale {
        return Err(RunError::Certification(format!(
            "initial leaders sit {:.3e} away from every similar pose of the nominal shape \
             (tolerance {:.1e})",
            fit.residual,
            tolerance * scale
        )));
    }
    Ok(fit)
}

/// Refuses to proceed unless the formation is certified and the initial
/// leader placement is feasible.
pub fn certify(built: &BuiltFormation, scenario: &Scenario, p0: &DVector<f64>) -> RunResult<()> {
    if !built.report.certified {
        return Err(RunError::Certification(format!(
            "formation is not certified localizable: follower block nonsingular = {}, \
             kernel dimension = {} (want 4), smallest eigenvalue real part = {}",
            built.report.ff_nonsingular,
            built.report.null_space_dim,
            built.report.min_real_part
        )));
    }
    let nominal: Vec<Vector2<f64>> = scenario
        .graph
        .leaders()
        .iter()
        .map(|&l| scenario.nominal.point(l))
        .collect();
    let initial = unstack_points(&built.laplacian.gather_leaders(p0));
    let tolerance = scenario
        .tolerances
        .feasibility
        .unwrap_or(FEASIBILITY_TOLERANCE);
    leader_gate(&nominal, &initial, tolerance).map(|_| ())
}

fn leader_schedule(scenario: &Scenario) -> RunResult<LeaderSchedule> {
    match &scenario.schedule {
        ScheduleSpec::Static => Ok(LeaderSchedule::Static),
        ScheduleSpec::Parameterized { keyframes } => {
            let nominal: Vec<Vector2<f64>> = scenario
                .graph
                .leaders()
                .iter()
                .map(|&l| scenario.nominal.point(l))
                .collect();
            let frames: Vec<Keyframe> = keyframes
                .iter()
                .map(|k| Keyframe {
                    t: k.t,
                    alpha: k.alpha,
                    theta: k.theta,
                    b: Vector2::new(k.b[0], k.b[1]),
                })
                .collect();
            let motion = LeaderMotion::new(nominal, frames)
                .map_err(|e| RunError::Input(format!("leader schedule: {e}")))?;
            Ok(LeaderSchedule::Maneuver(motion))
        }
    }
}

/// Runs a scenario end to end: build, certify, simulate, measure.
pub fn execute(scenario: &Scenario, overrides: &Overrides) -> RunResult<RunOutcome> {
    let mut scenario = scenario.clone();
    if let Some(seed) = overrides.seed {
        if let InitialSpec::Random { seed: s } = &mut scenario.initial {
            *s = Some(seed);
        }
    }
    if let Some(dt) = overrides.dt {
        scenario.dt = dt;
    }
    if let Some(horizon) = overrides.horizon {
        scenario.horizon = horizon;
    }
    if !(scenario.dt > 0.0) || !scenario.horizon.is_finite() || scenario.horizon < 0.0 {
        return Err(RunError::Input(format!(
            "need dt > 0 and a finite nonnegative horizon, got dt = {}, horizon = {}",
            scenario.dt, scenario.horizon
        )));
    }

    let built = build_formation(&scenario)?;
    let p0 = crate::scenario::initial_state(&scenario);
    certify(&built, &scenario, &p0)?;
    let schedule = leader_schedule(&scenario)?;

    let clock = Instant::now();
    let trajectory = simulate(&built.laplacian, &p0, &schedule, scenario.horizon, scenario.dt)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let errors = tracking_error(&trajectory, &built.laplacian, &schedule);
    let wall_time_seconds = clock.elapsed().as_secs_f64();

    let final_points = unstack_points(trajectory.states.last().expect("nonempty trajectory"));
    let fit = solve_similarity_params(&final_points, scenario.nominal.points())
        .map_err(|e| RunError::Input(format!("final configuration fit: {e}")))?;
    let final_error = *errors.errors.last().expect("nonempty error series");
    let (min_real, max_real) = built
        .report
        .ff_eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), ev| {
            (lo.min(ev.re), hi.max(ev.re))
        });

    let summary = RunSummary {
        name: scenario.name.clone(),
        certified: built.report.certified,
        converged: final_error < CONVERGENCE_TOLERANCE,
        leader_mode: match schedule {
            LeaderSchedule::Static => "static".to_string(),
            LeaderSchedule::Maneuver(_) => "maneuver".to_string(),
        },
        seed: scenario.seed(),
        samples: trajectory.times.len(),
        eigenvalue_min_real: min_real,
        eigenvalue_max_real: max_real,
        final_tracking_error: final_error,
        final_alpha: fit.alpha(),
        final_theta: fit.theta(),
        final_b: [fit.translation().x, fit.translation().y],
        final_fit_residual: fit.residual,
        wall_time_seconds,
    };

    Ok(RunOutcome {
        name: scenario.name.clone(),
        trajectory,
        errors,
        report: built.report,
        summary,
        warnings: built.warnings,
    })
}

/// Validation and certification without a simulation: the `check` verb.
pub fn check(scenario: &Scenario) -> RunResult<BuiltFormation> {
    let built = build_formation(scenario)?;
    let p0 = crate::scenario::initial_state(scenario);
    certify(&built, scenario, &p0)?;
    Ok(built)
}
