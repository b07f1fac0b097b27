//! Planar configurations and similarity geometry.
//!
//! A configuration stacks n points into (x1, y1, ..., xn, yn). Scaling a
//! shape by α > 0, rotating it by θ, and shifting it by b produces a similar
//! copy; all similar copies of a fixed shape r sweep out a four-dimensional
//! subspace of R^2n spanned by r itself, its quarter-turn copy, and the two
//! coordinate shifts. Formation targets live inside that subspace, and the
//! positions of the leader agents select one member of it.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::numeric;
use crate::report::{ValidationReport, Violation};

/// Two nominal points closer than this count as collocated.
pub const COLLOCATION_TOLERANCE: f64 = 1e-9;

/// Positions fit inside a similar image when the least-squares residual is
/// below this, scaled by 1 + the stacked position norm.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;

/// The nominal shape of a formation: one point per node, id order.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalConfiguration {
    points: Vec<Vector2<f64>>,
}

impl NominalConfiguration {
    pub fn new(points: Vec<Vector2<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewNodes {
                got: points.len(),
                min: 2,
            });
        }
        Ok(NominalConfiguration { points })
    }

    pub fn from_rows(rows: &[[f64; 2]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Vector2::new(r[0], r[1])).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn point(&self, id: NodeId) -> Vector2<f64> {
        self.points[id.index()]
    }

    /// Coordinates interleaved as (x1, y1, ..., xn, yn).
    pub fn stacked(&self) -> DVector<f64> {
        stack_points(&self.points)
    }

    /// Reports every pair of points closer than [`COLLOCATION_TOLERANCE`].
    pub fn check_collocation(&self) -> ValidationReport {
        self.check_collocation_with(COLLOCATION_TOLERANCE)
    }

    pub fn check_collocation_with(&self, tolerance: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let distance = (self.points[i] - self.points[j]).norm();
                if distance <= tolerance {
                    report.push(Violation::Collocated {
                        first: NodeId::new(i + 1),
                        second: NodeId::new(j + 1),
                        distance,
                    });
                }
            }
        }
        report
    }
}

/// Interleaves points into a stacked coordinate vector.
pub fn stack_points(points: &[Vector2<f64>]) -> DVector<f64> {
    let mut v = DVector::zeros(2 * points.len());
    for (i, p) in points.iter().enumerate() {
        v[2 * i] = p.x;
        v[2 * i + 1] = p.y;
    }
    v
}

/// Splits a stacked coordinate vector back into points.
pub fn unstack_points(v: &DVector<f64>) -> Vec<Vector2<f64>> {
    assert!(v.len() % 2 == 0, "stacked vectors have even length");
    (0..v.len() / 2)
        .map(|i| Vector2::new(v[2 * i], v[2 * i + 1]))
        .collect()
}

/// Wraps an angle into [0, 2π).
fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let wrapped = theta.rem_euclid(tau);
    if wrapped >= tau {
        0.0
    } else {
        wrapped
    }
}

/// Scale α > 0, rotation θ, and translation b acting as p ↦ αR(θ)p + b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub alpha: f64,
    pub theta: f64,
    pub b: Vector2<f64>,
}

impl SimilarityTransform {
    /// θ is wrapped into [0, 2π).
    pub fn new(alpha: f64, theta: f64, b: Vector2<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveScale { alpha });
        }
        Ok(SimilarityTransform {
            alpha,
            theta: wrap_angle(theta),
            b,
        })
    }

    pub fn identity() -> Self {
        SimilarityTransform {
            alpha: 1.0,
            theta: 0.0,
            b: Vector2::zeros(),
        }
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn apply_point(&self, p: Vector2<f64>) -> Vector2<f64> {
        self.alpha * self.rotation() * p + self.b
    }

    /// The single transform equivalent to applying `self` first, then
    /// `second`.
    pub fn then(&self, second: &SimilarityTransform) -> Result<SimilarityTransform> {
        SimilarityTransform::new(
            self.alpha * second.alpha,
            self.theta + second.theta,
            second.alpha * second.rotation() * self.b + second.b,
        )
    }
}

/// Applies a similarity transform to every point of a configuration.
pub fn apply_similarity(
    transform: &SimilarityTransform,
    r: &NominalConfiguration,
) -> Result<NominalConfiguration> {
    if !(transform.alpha > 0.0) {
        return Err(Error::NonPositiveScale {
            alpha: transform.alpha,
        });
    }
    let rot = transform.rotation();
    NominalConfiguration::new(
        r.points()
            .iter()
            .map(|&p| transform.alpha * rot * p + transform.b)
            .collect(),
    )
}

/// Basis of the similar image of a shape r: every configuration reachable
/// from r by scaling, rotating, and translating is a linear combination of
/// these four vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarImageBasis {
    /// The shape itself; scaling direction.
    r: DVector<f64>,
    /// Quarter-turn copy of r, pointwise (-y, x); rotation direction.
    r_perp: DVector<f64>,
    /// Unit shift of every point along x.
    shift_x: DVector<f64>,
    /// Unit shift of every point along y.
    shift_y: DVector<f64>,
}

impl SimilarImageBasis {
    pub fn vectors(&self) -> [&DVector<f64>; 4] {
        [&self.r, &self.r_perp, &self.shift_x, &self.shift_y]
    }

    /// 2n-by-4 matrix with the basis vectors as columns.
    pub fn stacked(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.r.len(), 4);
        for (col, v) in self.vectors().into_iter().enumerate() {
            m.set_column(col, v);
        }
        m
    }

    /// Numerical rank of the stacked matrix; 4 whenever the generating
    /// points are pairwise distinct.
    pub fn rank(&self) -> usize {
        numeric::numerical_rank(&self.stacked())
    }
}

/// Builds the similar-image basis of a shape, rejecting collocated points.
pub fn similar_image_basis(r: &NominalConfiguration) -> Result<SimilarImageBasis> {
    if let Some(Violation::Collocated { first, second, .. }) =
        r.check_collocation().violations().first()
    {
        return Err(Error::CollocatedNodes {
            first: *first,
            second: *second,
        });
    }
    let n = r.len();
    let mut basis = SimilarImageBasis {
        r: DVector::zeros(2 * n),
        r_perp: DVector::zeros(2 * n),
        shift_x: DVector::zeros(2 * n),
        shift_y: DVector::zeros(2 * n),
    };
    for (i, p) in r.points().iter().enumerate() {
        basis.r[2 * i] = p.x;
        basis.r[2 * i + 1] = p.y;
        basis.r_perp[2 * i] = -p.y;
        basis.r_perp[2 * i + 1] = p.x;
        basis.shift_x[2 * i] = 1.0;
        basis.shift_y[2 * i + 1] = 1.0;
    }
    Ok(basis)
}

/// Per-point similarity regressor: row pair [x, -y, 1, 0; y, x, 0, 1] for
/// each point, so that m·z places the points at the transform encoded by z.
fn similarity_matrix(points: &[Vector2<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * points.len(), 4);
    for (i, p) in points.iter().enumerate() {
        m[(2 * i, 0)] = p.x;
        m[(2 * i, 1)] = -p.y;
        m[(2 * i, 2)] = 1.0;
        m[(2 * i + 1, 0)] = p.y;
        m[(2 * i + 1, 1)] = p.x;
        m[(2 * i + 1, 3)] = 1.0;
    }
    m
}

/// Least-squares similarity fit z = (α cos θ, α sin θ, b1, b2) together with
/// the residual norm of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityParams {
    pub z: Vector4<f64>,
    pub residual: f64,
}

impl SimilarityParams {
    pub fn alpha(&self) -> f64 {
        self.z[0].hypot(self.z[1])
    }

    /// Rotation angle in [0, 2π).
    pub fn theta(&self) -> f64 {
        wrap_angle(self.z[1].atan2(self.z[0]))
    }

    pub fn translation(&self) -> Vector2<f64> {
        Vector2::new(self.z[2], self.z[3])
    }

    pub fn transform(&self) -> Result<SimilarityTransform> {
        SimilarityTransform::new(self.alpha(), self.theta(), self.translation())
    }
}

/// Fits positions ≈ αR(θ)·reference + b through the 4×4 normal equations.
/// With exactly two distinct reference points the system is square, so any
/// two positions are matched exactly.
pub fn solve_similarity_params(
    positions: &[Vector2<f64>],
    reference: &[Vector2<f64>],
) -> Result<SimilarityParams> {
    if reference.len() < 2 {
        return Err(Error::TooFewLeaders {
            got: reference.len(),
        });
    }
    if positions.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: positions.len(),
        });
    }
    let m = similarity_matrix(reference);
    let stacked = stack_points(positions);
    let normal = m.transpose() * &m;
    let rhs = m.transpose() * &stacked;
    let z = normal.lu().solve(&rhs).ok_or(Error::DegenerateLeaders)?;
    let residual = (&stacked - &m * &z).norm();
    Ok(SimilarityParams {
        z: Vector4::new(z[0], z[1], z[2], z[3]),
        residual,
    })
}

/// True when the fit residual certifies that the positions lie inside the
/// similar image of the reference shape.
pub fn within_similar_image(params: &SimilarityParams, positions: &[Vector2<f64>]) -> bool {
    params.residual <= FEASIBILITY_TOLERANCE * (1.0 + stack_points(positions).norm())
}
