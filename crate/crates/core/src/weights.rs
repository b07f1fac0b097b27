//! Edge weights for two-neighbor follower control laws.
//!
//! Every weight is a scaled rotation [[a, -b], [b, a]], the matrix form of
//! the complex number a + ib; sums and products of such blocks stay in the
//! family and commute with each other. Reading nominal points as complex
//! numbers ρ, the weight triple of follower i with ordered neighbors (j, k),
//!
//!   W_ij = ζ(ρ_k - ρ_i),  W_ik = ζ(ρ_i - ρ_j),  W_ii = ζ(ρ_j - ρ_k),
//!
//! satisfies the two defining identities for every nonzero ζ = c1 + i c2:
//! the three blocks sum to zero, and W_ij ρ_j + W_ik ρ_k + W_ii ρ_i = 0, so
//! the nominal shape is an equilibrium of the follower's control law. Every
//! admissible triple has this form, and ζ = 1/(ρ_j - ρ_k) is the member
//! whose diagonal block is the identity.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::geometry::{NominalConfiguration, COLLOCATION_TOLERANCE};
use crate::graph::NodeId;

/// Edge blocks with magnitude below this carry almost no measurement
/// information and are surfaced to callers as weak.
pub const WEAK_EDGE_TOLERANCE: f64 = 1e-6;

/// Residual bound for accepting externally supplied blocks as a triple.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;

/// A scaled-rotation weight [[a, -b], [b, a]], acting on points the way the
/// complex number a + ib acts on x + iy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeWeight {
    pub a: f64,
    pub b: f64,
}

impl EdgeWeight {
    pub const ZERO: EdgeWeight = EdgeWeight { a: 0.0, b: 0.0 };
    pub const IDENTITY: EdgeWeight = EdgeWeight { a: 1.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Self {
        EdgeWeight { a, b }
    }

    pub fn from_complex(z: Complex64) -> Self {
        EdgeWeight { a: z.re, b: z.im }
    }

    pub fn complex(self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    pub fn matrix(self) -> Matrix2<f64> {
        Matrix2::new(self.a, -self.b, self.b, self.a)
    }

    /// Reads a 2×2 matrix back into the family; `None` when it is not a
    /// scaled rotation within a small relative tolerance.
    pub fn from_matrix(m: &Matrix2<f64>) -> Option<Self> {
        let scale = m.amax().max(1.0);
        let symmetric = (m[(0, 0)] - m[(1, 1)]).abs() <= 1e-9 * scale
            && (m[(0, 1)] + m[(1, 0)]).abs() <= 1e-9 * scale;
        if symmetric {
            Some(EdgeWeight {
                a: 0.5 * (m[(0, 0)] + m[(1, 1)]),
                b: 0.5 * (m[(1, 0)] - m[(0, 1)]),
            })
        } else {
            None
        }
    }

    /// The scale factor c of the underlying rotation, zero only for the
    /// zero block.
    pub fn magnitude(self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn apply(self, v: Vector2<f64>) -> Vector2<f64> {
        Vector2::new(self.a * v.x - self.b * v.y, self.b * v.x + self.a * v.y)
    }
}

impl Add for EdgeWeight {
    type Output = EdgeWeight;
    fn add(self, rhs: EdgeWeight) -> EdgeWeight {
        EdgeWeight::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for EdgeWeight {
    type Output = EdgeWeight;
    fn sub(self, rhs: EdgeWeight) -> EdgeWeight {
        EdgeWeight::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for EdgeWeight {
    type Output = EdgeWeight;
    fn neg(self) -> EdgeWeight {
        EdgeWeight::new(-self.a, -self.b)
    }
}

impl Mul for EdgeWeight {
    type Output = EdgeWeight;
    fn mul(self, rhs: EdgeWeight) -> EdgeWeight {
        EdgeWeight::from_complex(self.complex() * rhs.complex())
    }
}

impl Mul<f64> for EdgeWeight {
    type Output = EdgeWeight;
    fn mul(self, rhs: f64) -> EdgeWeight {
        EdgeWeight::new(self.a * rhs, self.b * rhs)
    }
}

/// The three weight blocks of one follower's control law, aligned with its
/// ascending neighbor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerWeightTriple {
    follower: NodeId,
    neighbors: (NodeId, NodeId),
    w_first: EdgeWeight,
    w_second: EdgeWeight,
    w_diag: EdgeWeight,
    params: (f64, f64),
}

impl FollowerWeightTriple {
    pub fn follower(&self) -> NodeId {
        self.follower
    }

    /// Neighbor pair in ascending id order.
    pub fn neighbors(&self) -> (NodeId, NodeId) {
        self.neighbors
    }

    /// Block on the edge toward the smaller neighbor id.
    pub fn toward_first(&self) -> EdgeWeight {
        self.w_first
    }

    /// Block on the edge toward the larger neighbor id.
    pub fn toward_second(&self) -> EdgeWeight {
        self.w_second
    }

    pub fn diagonal(&self) -> EdgeWeight {
        self.w_diag
    }

    /// Free parameters (c1, c2) of the family, relative to the ascending
    /// neighbor order.
    pub fn params(&self) -> (f64, f64) {
        self.params
    }

    /// Edge blocks whose magnitude falls below [`WEAK_EDGE_TOLERANCE`],
    /// paired with the neighbor they point to.
    pub fn weak_edges(&self) -> Vec<(NodeId, f64)> {
        [
            (self.neighbors.0, self.w_first),
            (self.neighbors.1, self.w_second),
        ]
        .into_iter()
        .filter(|(_, w)| w.magnitude() < WEAK_EDGE_TOLERANCE)
        .map(|(id, w)| (id, w.magnitude()))
        .collect()
    }

    /// Builds a triple from explicit blocks, verifying the zero-sum and
    /// nominal-annihilation identities against the shape. Blocks must be
    /// passed in the order of the given neighbor pair.
    pub fn from_blocks(
        follower: NodeId,
        neighbors: (NodeId, NodeId),
        toward_first: EdgeWeight,
        toward_second: EdgeWeight,
        diagonal: EdgeWeight,
        r: &NominalConfiguration,
    ) -> Result<Self> {
        let ((j, k), (w_first, w_second)) = if neighbors.0 <= neighbors.1 {
            (neighbors, (toward_first, toward_second))
        } else {
            ((neighbors.1, neighbors.0), (toward_second, toward_first))
        };
        let rho_i = complex_point(r, follower)?;
        let rho_j = complex_point(r, j)?;
        let rho_k = complex_point(r, k)?;
        let scale = w_first
            .magnitude()
            .max(w_second.magnitude())
            .max(diagonal.magnitude());
        let reach = rho_i.norm().max(rho_j.norm()).max(rho_k.norm());
        let zero_sum = (w_first + w_second + diagonal).magnitude();
        let annihilation = (w_first.complex() * rho_j
            + w_second.complex() * rho_k
            + diagonal.complex() * rho_i)
            .norm();
        if zero_sum > EQUILIBRIUM_TOLERANCE * (1.0 + scale)
            || annihilation > EQUILIBRIUM_TOLERANCE * (1.0 + scale) * (1.0 + reach)
        {
            return Err(Error::EquilibriumViolated { follower });
        }
        let params = [
            (diagonal, rho_j - rho_k),
            (w_first, rho_k - rho_i),
            (w_second, rho_i - rho_j),
        ]
        .into_iter()
        .find(|(_, gap)| gap.norm() > COLLOCATION_TOLERANCE)
        .map(|(w, gap)| {
            let zeta = w.complex() / gap;
            (zeta.re, zeta.im)
        })
        .ok_or(Error::CollocatedTriple { follower })?;
        Ok(FollowerWeightTriple {
            follower,
            neighbors: (j, k),
            w_first,
            w_second,
            w_diag: diagonal,
            params,
        })
    }
}

fn complex_point(r: &NominalConfiguration, id: NodeId) -> Result<Complex64> {
    if id.get() > r.len() {
        return Err(Error::NodeOutOfRange {
            id: id.get(),
            n: r.len(),
        });
    }
    let p = r.point(id);
    Ok(Complex64::new(p.x, p.y))
}

fn order_neighbors(neighbors: (NodeId, NodeId)) -> (NodeId, NodeId) {
    if neighbors.0 <= neighbors.1 {
        neighbors
    } else {
        (neighbors.1, neighbors.0)
    }
}

/// Evaluates the weight family at parameters (c1, c2). The neighbor pair is
/// ordered ascending first, so the parameters always refer to the same
/// member of the family regardless of argument order.
pub fn synthesize_follower_weights(
    follower: NodeId,
    neighbors: (NodeId, NodeId),
    r: &NominalConfiguration,
    c1: f64,
    c2: f64,
) -> Result<FollowerWeightTriple> {
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::ZeroParameters);
    }
    let (j, k) = order_neighbors(neighbors);
    let rho_i = complex_point(r, follower)?;
    let rho_j = complex_point(r, j)?;
    let rho_k = complex_point(r, k)?;
    let separated = (rho_i - rho_j).norm() > COLLOCATION_TOLERANCE
        && (rho_i - rho_k).norm() > COLLOCATION_TOLERANCE
        && (rho_j - rho_k).norm() > COLLOCATION_TOLERANCE;
    if !separated {
        return Err(Error::CollocatedTriple { follower });
    }
    let zeta = Complex64::new(c1, c2);
    Ok(FollowerWeightTriple {
        follower,
        neighbors: (j, k),
        w_first: EdgeWeight::from_complex(zeta * (rho_k - rho_i)),
        w_second: EdgeWeight::from_complex(zeta * (rho_i - rho_j)),
        w_diag: EdgeWeight::from_complex(zeta * (rho_j - rho_k)),
        params: (c1, c2),
    })
}

/// The member of the weight family whose diagonal block is the identity:
/// ζ = 1/(ρ_j - ρ_k).
pub fn normalize_follower_weights(
    follower: NodeId,
    neighbors: (NodeId, NodeId),
    r: &NominalConfiguration,
) -> Result<FollowerWeightTriple> {
    let (j, k) = order_neighbors(neighbors);
    let gap = complex_point(r, j)? - complex_point(r, k)?;
    if gap.norm() <= COLLOCATION_TOLERANCE {
        return Err(Error::CollocatedNeighbors { follower });
    }
    let zeta = gap.inv();
    let mut triple = synthesize_follower_weights(follower, (j, k), r, zeta.re, zeta.im)?;
    // The diagonal of this member is the identity by construction; pin it
    // exactly instead of keeping the rounded product ζ(ρ_j - ρ_k).
    triple.w_diag = EdgeWeight::IDENTITY;
    Ok(triple)
}
