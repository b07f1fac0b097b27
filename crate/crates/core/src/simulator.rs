//! Leader-follower dynamics under a certified block Laplacian.
//!
//! Followers integrate the linear law ṗ_f = -(L_ff p_f + L_fl p_l(t));
//! leaders are exogenous, either pinned where the initial state puts them
//! or driven through keyframed similarity maneuvers. The integrator is a
//! fixed-step classical Runge-Kutta scheme, and a matrix-exponential
//! closed form is available as an independent cross-check for static
//! leaders.

use nalgebra::{DVector, Matrix2, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::stack_points;
use crate::laplacian::{BlockLaplacian, LocalizabilityReport};

/// One waypoint of a leader maneuver: the similarity pose the leaders
/// should present at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub t: f64,
    pub alpha: f64,
    pub theta: f64,
    pub b: Vector2<f64>,
}

/// Keyframed leader motion: poses interpolate linearly between waypoints
/// and clamp outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderMotion {
    nominal_leaders: Vec<Vector2<f64>>,
    keyframes: Vec<Keyframe>,
}

impl LeaderMotion {
    pub fn new(nominal_leaders: Vec<Vector2<f64>>, keyframes: Vec<Keyframe>) -> Result<Self> {
        let increasing = keyframes.windows(2).all(|w| w[0].t < w[1].t);
        let positive_scale = keyframes.iter().all(|k| k.alpha > 0.0 && k.t.is_finite());
        if keyframes.is_empty() || !increasing || !positive_scale {
            return Err(Error::InvalidSchedule);
        }
        Ok(LeaderMotion {
            nominal_leaders,
            keyframes,
        })
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    /// Leader positions at time `t`.
    pub fn leader_positions(&self, t: f64) -> Vec<Vector2<f64>> {
        let pose = self.pose_at(t);
        let (s, c) = pose.theta.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        self.nominal_leaders
            .iter()
            .map(|&p| pose.alpha * rot * p + pose.b)
            .collect()
    }

    fn pose_at(&self, t: f64) -> Keyframe {
        let frames = &self.keyframes;
        if t <= frames[0].t {
            frames[0]
        } else if t >= frames[frames.len() - 1].t {
            frames[frames.len() - 1]
        } else {
            let after = frames.iter().position(|k| k.t > t).unwrap();
            let (lo, hi) = (frames[after - 1], frames[after]);
            let s = (t - lo.t) / (hi.t - lo.t);
            Keyframe {
                t,
                alpha: lo.alpha + s * (hi.alpha - lo.alpha),
                theta: lo.theta + s * (hi.theta - lo.theta),
                b: lo.b + s * (hi.b - lo.b),
            }
        }
    }
}

/// How the leaders move during a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderSchedule {
    /// Leaders stay where the initial state puts them.
    Static,
    /// Leaders follow a keyframed similarity maneuver; the initial state's
    /// leader entries are ignored in favor of the schedule.
    Maneuver(LeaderMotion),
}

/// A sampled run of the formation dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample instants, starting at zero and spaced by the integration step.
    pub times: Vec<f64>,
    /// Full stacked configuration at each instant.
    pub states: Vec<DVector<f64>>,
    /// Control input -Lp at each instant; zero on leader rows.
    pub inputs: Vec<DVector<f64>>,
}

/// Distance to the momentary target shape at each sample instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
}

/// The distributed control input -Lp.
pub fn control_input(l: &BlockLaplacian, p: &DVector<f64>) -> Result<DVector<f64>> {
    if p.len() != 2 * l.node_count() {
        return Err(Error::DimensionMismatch {
            expected: 2 * l.node_count(),
            got: p.len(),
        });
    }
    Ok(-(l.matrix() * p))
}

/// Integrates the follower dynamics from `p0` over `horizon` with fixed
/// step `dt`, recording every step. Refuses to run a formation whose
/// Laplacian is not certified localizable.
pub fn simulate(
    l: &BlockLaplacian,
    p0: &DVector<f64>,
    schedule: &LeaderSchedule,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !horizon.is_finite() || horizon < 0.0 {
        return Err(Error::NonPositiveStep { dt });
    }
    if p0.len() != 2 * l.node_count() {
        return Err(Error::DimensionMismatch {
            expected: 2 * l.node_count(),
            got: p0.len(),
        });
    }
    if !LocalizabilityReport::from_laplacian(l).certified {
        return Err(Error::UncertifiedFormation);
    }
    let ff = l.ff();
    let fl = l.fl();
    let leaders0 = l.gather_leaders(p0);
    let leaders_at = |t: f64| -> DVector<f64> {
        match schedule {
            LeaderSchedule::Static => leaders0.clone(),
            LeaderSchedule::Maneuver(motion) => stack_points(&motion.leader_positions(t)),
        }
    };
    let derivative = |x: &DVector<f64>, pl: &DVector<f64>| -(&ff * x + &fl * pl);

    let steps = (horizon / dt + 1e-9).floor() as usize;
    let mut x = l.gather_followers(p0);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 * dt;
        let state = l.scatter(&leaders_at(t), &x);
        inputs.push(-(l.matrix() * &state));
        states.push(state);
        times.push(t);
        if i == steps {
            break;
        }
        let pl_start = leaders_at(t);
        let pl_mid = leaders_at(t + 0.5 * dt);
        let pl_end = leaders_at(t + dt);
        let k1 = derivative(&x, &pl_start);
        let k2 = derivative(&(&x + (0.5 * dt) * &k1), &pl_mid);
        let k3 = derivative(&(&x + (0.5 * dt) * &k2), &pl_mid);
        let k4 = derivative(&(&x + dt * &k3), &pl_end);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(Trajectory {
        times,
        states,
        inputs,
    })
}

/// Exact follower positions at time `t` for static leaders: the affine
/// flow p*_f + exp(-L_ff t)(p_f(0) - p*_f). Serves as an independent
/// reference for the integrator.
pub fn closed_form_followers(
    l: &BlockLaplacian,
    p0: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    if p0.len() != 2 * l.node_count() {
        return Err(Error::DimensionMismatch {
            expected: 2 * l.node_count(),
            got: p0.len(),
        });
    }
    let ff = l.ff();
    let rhs = -(l.fl() * l.gather_leaders(p0));
    let target = ff
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularFollowerBlock)?;
    let flow = (-t * ff).exp();
    Ok(&target + flow * (l.gather_followers(p0) - &target))
}

/// Distance between the recorded followers and the positions the leaders
/// pin down at each instant.
pub fn tracking_error(
    trajectory: &Trajectory,
    l: &BlockLaplacian,
    schedule: &LeaderSchedule,
) -> ErrorSeries {
    assert_eq!(trajectory.times.len(), trajectory.states.len());
    assert!(!trajectory.states.is_empty(), "empty trajectory");
    let factored = l.ff().lu();
    let fl = l.fl();
    let leaders0 = l.gather_leaders(&trajectory.states[0]);
    let errors = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, state)| {
            let pl = match schedule {
                LeaderSchedule::Static => leaders0.clone(),
                LeaderSchedule::Maneuver(motion) => stack_points(&motion.leader_positions(t)),
            };
            let desired = factored
                .solve(&-(&fl * pl))
                .expect("certified follower block became singular");
            (l.gather_followers(state) - desired).norm()
        })
        .collect();
    ErrorSeries {
        times: trajectory.times.clone(),
        errors,
    }
}

/// Deterministic follower spawn points, uniform over [-5, 5)². The same
/// seed always produces the same sequence.
pub fn random_follower_positions(seed: u64, count: usize) -> Vec<Vector2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = rng.random_range(-5.0..5.0);
            let y = rng.random_range(-5.0..5.0);
            Vector2::new(x, y)
        })
        .collect()
}
