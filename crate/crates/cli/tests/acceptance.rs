//! Acceptance gates for the whole pipeline. Each test covers one shipping
//! criterion, pins its tolerances next to the assertions, and prints a
//! single `ACCEPTANCE n PASS` line once every check in it holds. Run with
//! `cargo test -p simform-cli --test acceptance -- --nocapture` to see the
//! lines.

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simform::geometry::FEASIBILITY_TOLERANCE;
use simform::{
    apply_similarity, assemble_laplacian, closed_form_followers, desired_followers,
    localizability_report, normalize_follower_weights, normalize_laplacian,
    random_follower_positions, simulate, solve_similarity_params, stack_points, tracking_error,
    BlockLaplacian, FollowerWeightTriple, FormationGraph, LeaderSchedule, NodeId,
    NominalConfiguration, SimilarityTransform, Violation,
};
use simform_cli::leader_gate;

/// The bundled eight-agent shape: two leaders on the x axis, six followers
/// around them.
fn nominal() -> NominalConfiguration {
    NominalConfiguration::from_rows(&[
        [1.0, 0.0],
        [-1.0, 0.0],
        [1.0, 1.0],
        [-1.0, 1.0],
        [-2.0, 0.0],
        [-1.0, -1.0],
        [1.0, -1.0],
        [2.0, 0.0],
    ])
    .unwrap()
}

const NEIGHBORS: [(usize, (usize, usize)); 6] = [
    (3, (1, 2)),
    (4, (2, 3)),
    (5, (2, 4)),
    (6, (2, 5)),
    (7, (1, 6)),
    (8, (1, 7)),
];

fn graph() -> FormationGraph {
    let edges = NEIGHBORS.iter().flat_map(|&(f, (j, k))| [(f, j), (f, k)]);
    FormationGraph::new(8, &[1, 2], edges).unwrap()
}

fn triples(r: &NominalConfiguration) -> Vec<FollowerWeightTriple> {
    NEIGHBORS
        .iter()
        .map(|&(f, (j, k))| {
            normalize_follower_weights(NodeId::new(f), (NodeId::new(j), NodeId::new(k)), r)
                .unwrap()
        })
        .collect()
}

fn laplacian() -> BlockLaplacian {
    let r = nominal();
    let assembled = assemble_laplacian(&graph(), &triples(&r)).unwrap();
    normalize_laplacian(&assembled).unwrap()
}

/// Nominal leader positions with the six followers scattered from `seed`.
fn scattered_start(r: &NominalConfiguration, seed: u64) -> DVector<f64> {
    let mut p0 = stack_points(r.points());
    for (slot, p) in (2..8).zip(random_follower_positions(seed, 6)) {
        p0[2 * slot] = p.x;
        p0[2 * slot + 1] = p.y;
    }
    p0
}

fn distance_from_one(re: f64, im: f64) -> f64 {
    ((re - 1.0).powi(2) + im.powi(2)).sqrt()
}

#[test]
fn acceptance_1_golden_weight_reproduction() {
    const BLOCK_TOLERANCE: f64 = 1e-12;
    let clock = Instant::now();
    let r = nominal();

    // Frozen golden blocks, each as the (a, b) of [[a, -b], [b, a]];
    // every diagonal is the identity.
    let golden: [(usize, (f64, f64), (f64, f64)); 6] = [
        (3, (-1.0, -0.5), (0.0, 0.5)),
        (4, (-0.8, 0.4), (-0.2, -0.4)),
        (5, (-1.0, 1.0), (0.0, -1.0)),
        (6, (-1.0, 1.0), (0.0, -1.0)),
        (7, (-0.8, 0.4), (-0.2, -0.4)),
        (8, (-1.0, 1.0), (0.0, -1.0)),
    ];
    let block = |(a, b): (f64, f64)| Matrix2::new(a, -b, b, a);

    let mut checked = 0;
    let mut worst = 0.0f64;
    for (&(f, (j, k)), &(gf, toward_j, toward_k)) in NEIGHBORS.iter().zip(&golden) {
        assert_eq!(f, gf);
        let triple =
            normalize_follower_weights(NodeId::new(f), (NodeId::new(j), NodeId::new(k)), &r)
                .unwrap();
        for (got, want) in [
            (triple.toward_first().matrix(), block(toward_j)),
            (triple.toward_second().matrix(), block(toward_k)),
            (triple.diagonal().matrix(), Matrix2::identity()),
        ] {
            let deviation = (got - want).amax();
            assert!(
                deviation <= BLOCK_TOLERANCE,
                "follower {f}: got {got} want {want}"
            );
            worst = worst.max(deviation);
            checked += 1;
        }
        if f == 4 {
            let (c1, c2) = triple.params();
            assert!((c1 - -0.4).abs() <= BLOCK_TOLERANCE && (c2 - 0.2).abs() <= BLOCK_TOLERANCE);
        }
        if f == 5 {
            let (c1, c2) = triple.params();
            assert!(c1.abs() <= BLOCK_TOLERANCE && (c2 - 1.0).abs() <= BLOCK_TOLERANCE);
        }
    }
    assert_eq!(checked, 18);
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3}s");
    println!(
        "ACCEPTANCE 1 PASS: 18 golden weight blocks reproduced within 1e-12 \
         (worst deviation {worst:.1e}); follower 4 params (-0.4, 0.2), follower 5 (0, 1); \
         {elapsed:.3}s"
    );
}

#[test]
fn acceptance_2_null_space_structure() {
    const KERNEL_TOLERANCE: f64 = 1e-10;
    const RANK_CUTOFF: f64 = 1e-9;
    let clock = Instant::now();
    let l = laplacian();
    let m = l.matrix();
    let r = nominal();

    // The four directions a similar motion can take: the shape itself, its
    // quarter turn, and the two unit translations, built by hand here.
    let n = r.points().len();
    let shape = stack_points(r.points());
    let mut quarter = DVector::zeros(2 * n);
    let mut shift_x = DVector::zeros(2 * n);
    let mut shift_y = DVector::zeros(2 * n);
    for (i, p) in r.points().iter().enumerate() {
        quarter[2 * i] = -p.y;
        quarter[2 * i + 1] = p.x;
        shift_x[2 * i] = 1.0;
        shift_y[2 * i + 1] = 1.0;
    }
    let mut worst = 0.0f64;
    for (name, v) in [
        ("shape", &shape),
        ("quarter turn", &quarter),
        ("x shift", &shift_x),
        ("y shift", &shift_y),
    ] {
        let residual = (m * v).norm();
        assert!(residual <= KERNEL_TOLERANCE, "{name}: |L v| = {residual:.3e}");
        worst = worst.max(residual);
    }

    let singular = m.clone().svd(false, false).singular_values;
    let rank = singular
        .iter()
        .filter(|&&s| s > RANK_CUTOFF * singular[0])
        .count();
    assert_eq!(rank, 12, "rank of L");
    assert_eq!(rank, 2 * n - 4);

    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3}s");
    println!(
        "ACCEPTANCE 2 PASS: all four similar-motion directions lie in the kernel \
         (worst |L v| = {worst:.1e} <= 1e-10) and rank(L) = 12 = 2n - 4; {elapsed:.3}s"
    );
}

#[test]
fn acceptance_3_unit_spectrum() {
    const SPECTRUM_TOLERANCE: f64 = 1e-9;
    let clock = Instant::now();
    let l = laplacian();
    let report = localizability_report(&l, &graph());
    assert!(report.certified);
    assert_eq!(report.ff_eigenvalues.len(), 12);
    for ev in &report.ff_eigenvalues {
        assert!(
            distance_from_one(ev.re, ev.im) <= SPECTRUM_TOLERANCE,
            "eigenvalue {ev} is not 1"
        );
    }

    // Independent route: all eigenvalues equal one exactly when L_ff - I is
    // nilpotent, and six followers feeding forward bound the index by six.
    let nilpotent = l.ff() - DMatrix::identity(12, 12);
    let mut power = DMatrix::identity(12, 12);
    for _ in 0..6 {
        power = &power * &nilpotent;
    }
    assert!(power.iter().all(|&x| x == 0.0), "(L_ff - I)^6 != 0");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut certified = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=12);
        let mut pairs = Vec::new();
        let mut edges = Vec::new();
        for f in 3..=n {
            let j = rng.random_range(1..f);
            let k = loop {
                let k = rng.random_range(1..f);
                if k != j {
                    break k;
                }
            };
            pairs.push((f, (j, k)));
            edges.push((f, j));
            edges.push((f, k));
        }
        // Jittered grid: cells 2.0 apart, jitter within 0.5, so no two
        // nodes come closer than 1.0.
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|ix| {
                [
                    (ix % 4) as f64 * 2.0 + rng.random_range(-0.5..0.5),
                    (ix / 4) as f64 * 2.0 + rng.random_range(-0.5..0.5),
                ]
            })
            .collect();
        let g = FormationGraph::new(n, &[1, 2], edges).unwrap();
        let r = NominalConfiguration::from_rows(&rows).unwrap();
        assert!(g.validate_topology().is_valid());
        assert!(r.check_collocation().is_valid());
        let triples: Vec<_> = pairs
            .iter()
            .map(|&(f, (j, k))| {
                normalize_follower_weights(NodeId::new(f), (NodeId::new(j), NodeId::new(k)), &r)
                    .unwrap()
            })
            .collect();
        let lap = normalize_laplacian(&assemble_laplacian(&g, &triples).unwrap()).unwrap();
        let rep = localizability_report(&lap, &g);
        let unit = rep
            .ff_eigenvalues
            .iter()
            .all(|ev| distance_from_one(ev.re, ev.im) <= SPECTRUM_TOLERANCE);
        if rep.certified && unit {
            certified += 1;
        }
    }
    assert_eq!(certified, 200);

    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.3}s");
    println!(
        "ACCEPTANCE 3 PASS: all 12 normalized eigenvalues equal 1 within 1e-9, \
         (L_ff - I)^6 vanishes exactly, and 200/200 random formations certified \
         with unit spectrum; {elapsed:.3}s"
    );
}

#[test]
fn acceptance_4_localization_and_equivariance() {
    const LOCALIZATION_TOLERANCE: f64 = 1e-9;
    const EQUIVARIANCE_RELATIVE: f64 = 1e-8;
    let l = laplacian();
    let r = nominal();

    let leaders = [r.point(NodeId::new(1)), r.point(NodeId::new(2))];
    let localized = desired_followers(&l, &leaders).unwrap();
    let mut worst = 0.0f64;
    for (got, f) in localized.iter().zip(3..=8) {
        let deviation = (got - r.point(NodeId::new(f))).norm();
        assert!(deviation <= LOCALIZATION_TOLERANCE, "follower {f}");
        worst = worst.max(deviation);
    }

    let pose = SimilarityTransform::new(2.0, FRAC_PI_3, Vector2::new(5.0, -3.0)).unwrap();
    let moved = apply_similarity(&pose, &r).unwrap();
    let moved_leaders = [moved.point(NodeId::new(1)), moved.point(NodeId::new(2))];
    let got = stack_points(&desired_followers(&l, &moved_leaders).unwrap());
    let want: Vec<Vector2<f64>> = (3..=8).map(|f| moved.point(NodeId::new(f))).collect();
    let want = stack_points(&want);
    let relative = (got - &want).norm() / want.norm();
    assert!(relative <= EQUIVARIANCE_RELATIVE, "relative error {relative:.3e}");

    println!(
        "ACCEPTANCE 4 PASS: nominal leaders localize the nominal followers \
         (worst {worst:.1e} <= 1e-9), and the (2, pi/3, (5, -3)) pose carries them along \
         (relative error {relative:.1e} <= 1e-8)"
    );
}

#[test]
fn acceptance_5_convergence_from_scattered_starts() {
    const CONVERGENCE_TOLERANCE: f64 = 1e-6;
    let clock = Instant::now();
    let l = laplacian();
    let r = nominal();
    let p0 = scattered_start(&r, 42);

    let trajectory = simulate(&l, &p0, &LeaderSchedule::Static, 30.0, 0.01).unwrap();
    assert_eq!(trajectory.times.len(), 3001);
    let errors = tracking_error(&trajectory, &l, &LeaderSchedule::Static);
    let final_error = *errors.errors.last().unwrap();
    assert!(final_error < CONVERGENCE_TOLERANCE, "final error {final_error:.3e}");
    let final_input = trajectory.inputs.last().unwrap().norm();
    assert!(final_input < CONVERGENCE_TOLERANCE, "final |u| {final_input:.3e}");

    let first = trajectory.states.first().unwrap();
    let last = trajectory.states.last().unwrap();
    for ix in 0..4 {
        assert_eq!(first[ix].to_bits(), last[ix].to_bits(), "leader entry {ix} moved");
    }

    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.3}s");
    println!(
        "ACCEPTANCE 5 PASS: seed-42 scattered followers converge in 30s of simulated \
         time (final error {final_error:.1e}, final |u| {final_input:.1e}, both < 1e-6) \
         with leaders bit-identical; {elapsed:.3}s"
    );
}

#[test]
fn acceptance_6_integrator_matches_the_closed_form() {
    const ORACLE_TOLERANCE: f64 = 1e-6;
    const RATIO_RANGE: (f64, f64) = (12.0, 20.0);
    let l = laplacian();
    let r = nominal();
    let p0 = scattered_start(&r, 42);
    let leaders = [r.point(NodeId::new(1)), r.point(NodeId::new(2))];
    let target = stack_points(&desired_followers(&l, &leaders).unwrap());

    // Worst gap between the integrator and the exact affine flow, advanced
    // one exact exponential step per sample.
    let max_deviation = |horizon: f64, dt: f64| -> f64 {
        let trajectory = simulate(&l, &p0, &LeaderSchedule::Static, horizon, dt).unwrap();
        let step = (-(l.ff() * dt)).exp();
        let start = l.gather_followers(&p0) - &target;
        let mut flow = DMatrix::identity(12, 12);
        let mut worst = 0.0f64;
        for state in &trajectory.states {
            let exact = &target + &flow * &start;
            worst = worst.max((l.gather_followers(state) - exact).norm());
            flow = &step * &flow;
        }
        worst
    };

    let full_run = max_deviation(30.0, 0.01);
    assert!(full_run <= ORACLE_TOLERANCE, "max deviation {full_run:.3e}");

    // Spot-check the propagated flow against exponentials evaluated from
    // scratch at scattered times.
    let trajectory = simulate(&l, &p0, &LeaderSchedule::Static, 30.0, 0.01).unwrap();
    for i in (0..trajectory.times.len()).step_by(500) {
        let exact = closed_form_followers(&l, &p0, trajectory.times[i]).unwrap();
        let deviation = (l.gather_followers(&trajectory.states[i]) - exact).norm();
        assert!(deviation <= ORACLE_TOLERANCE, "sample {i}: {deviation:.3e}");
    }

    let coarse = max_deviation(2.0, 0.1);
    let fine = max_deviation(2.0, 0.05);
    let ratio = coarse / fine;
    assert!(
        ratio >= RATIO_RANGE.0 && ratio <= RATIO_RANGE.1,
        "halving dt changed the deviation by {ratio:.2}"
    );

    println!(
        "ACCEPTANCE 6 PASS: integrator tracks the matrix-exponential flow within \
         {full_run:.1e} <= 1e-6 over the full run, and halving dt shrinks the gap \
         by {ratio:.1} (in [12, 20])"
    );
}

#[test]
fn acceptance_7_leader_selection_gate() {
    const RECOVERY_TOLERANCE: f64 = 1e-9;
    const REFUSAL_FLOOR: f64 = 1e-3;
    let r = nominal();

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for round in 0..1000 {
        let alpha = rng.random_range(0.2..4.0);
        let theta = rng.random_range(0.0..TAU);
        let b = Vector2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let pose = SimilarityTransform::new(alpha, theta, b).unwrap();
        let moved = apply_similarity(&pose, &r).unwrap();
        let fit = solve_similarity_params(moved.points(), r.points()).unwrap();
        assert!(
            (fit.alpha() - alpha).abs() <= RECOVERY_TOLERANCE * (1.0 + alpha),
            "round {round}: alpha"
        );
        let wrapped = (fit.theta() - theta + PI).rem_euclid(TAU) - PI;
        assert!(wrapped.abs() <= RECOVERY_TOLERANCE, "round {round}: theta");
        assert!(
            (fit.translation() - b).norm() <= RECOVERY_TOLERANCE * (1.0 + b.norm()),
            "round {round}: translation"
        );
        assert!(fit.residual <= RECOVERY_TOLERANCE, "round {round}: residual");
    }

    let two_leaders = [r.point(NodeId::new(1)), r.point(NodeId::new(2))];
    for round in 0..200 {
        let placed = [
            Vector2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
            Vector2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
        ];
        let fit = leader_gate(&two_leaders, &placed, FEASIBILITY_TOLERANCE)
            .unwrap_or_else(|e| panic!("round {round}: two leaders refused: {e}"));
        assert!(fit.residual <= RECOVERY_TOLERANCE, "round {round}: residual");
    }

    let three_leaders = [
        r.point(NodeId::new(1)),
        r.point(NodeId::new(2)),
        r.point(NodeId::new(3)),
    ];
    let displaced = [
        three_leaders[0],
        three_leaders[1],
        three_leaders[2] + Vector2::new(0.1, 0.0),
    ];
    let fit = solve_similarity_params(&displaced, &three_leaders).unwrap();
    assert!(fit.residual > REFUSAL_FLOOR, "residual {:.3e}", fit.residual);
    let refusal = leader_gate(&three_leaders, &displaced, FEASIBILITY_TOLERANCE).unwrap_err();
    assert_eq!(refusal.exit_code(), 2, "{refusal}");

    println!(
        "ACCEPTANCE 7 PASS: 1000 random poses recovered within 1e-9, 200 arbitrary \
         two-leader placements fit exactly, and a third leader displaced 0.1 is \
         refused with residual {:.1e} > 1e-3",
        fit.residual
    );
}

#[test]
fn acceptance_8_structural_validation() {
    let cyclic = FormationGraph::new(4, &[1, 2], [(3, 4), (3, 1), (4, 3), (4, 2)]).unwrap();
    assert!(cyclic
        .validate_topology()
        .violations()
        .iter()
        .any(|v| matches!(v, Violation::Cycle)));

    let overdegree =
        FormationGraph::new(4, &[1, 2], [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]).unwrap();
    assert!(overdegree.validate_topology().violations().iter().any(|v| matches!(
        v,
        Violation::FollowerDegree { follower, degree: 3 } if follower.get() == 4
    )));

    let three_leaders = FormationGraph::new(4, &[1, 2, 3], [(4, 1), (4, 2)]).unwrap();
    assert!(three_leaders
        .validate_topology()
        .violations()
        .iter()
        .any(|v| matches!(v, Violation::LeaderCount { count: 3 })));

    let collocated =
        NominalConfiguration::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 1.0]])
            .unwrap();
    assert!(collocated
        .check_collocation()
        .violations()
        .iter()
        .any(|v| matches!(v, Violation::Collocated { .. })));

    // Random DAGs with shuffled ids: renumbering must expose the feed-forward
    // order, making the permuted standard Laplacian lower triangular.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..100 {
        let n = rng.random_range(3..=12);
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut rng);
        let leaders = [order[0], order[1]];
        let mut edges = Vec::new();
        for k in 2..n {
            let f = order[k];
            let first = order[rng.random_range(0..k)];
            let second = loop {
                let candidate = order[rng.random_range(0..k)];
                if candidate != first {
                    break candidate;
                }
            };
            edges.push((f, first));
            edges.push((f, second));
        }
        let g = FormationGraph::new(n, &leaders, edges).unwrap();
        assert!(g.validate_topology().is_valid(), "case {case}");
        let p = g.topological_renumbering().unwrap().matrix();
        let permuted = &p * g.standard_laplacian() * p.transpose();
        for row in 0..n {
            for col in (row + 1)..n {
                assert!(
                    permuted[(row, col)] == 0.0,
                    "case {case}: entry ({row}, {col}) = {}",
                    permuted[(row, col)]
                );
            }
        }
    }

    println!(
        "ACCEPTANCE 8 PASS: cycle, follower degree, leader count, and collocation \
         each raise their named violation, and renumbering triangulates the \
         standard Laplacian on 100/100 random DAGs"
    );
}
