//! Assembly and certification of the block-weighted formation Laplacian.
//!
//! The Laplacian stacks one 2×2 block per node pair. Leader rows are zero;
//! the row of follower i with neighbors (j, k) carries its weight triple:
//! W_ii on the diagonal and W_ij, W_ik toward the neighbors. Because each
//! triple sums to zero and annihilates the nominal shape, the full matrix
//! kills every similar copy of that shape, and the formation is localizable
//! exactly when nothing else is killed: the follower-follower block must be
//! nonsingular, the kernel four-dimensional, and the follower spectrum must
//! sit in the open right half plane so the dynamics contract onto the
//! target.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{FormationGraph, NodeId};
use crate::numeric::{numerical_rank, RANK_TOLERANCE};
use crate::weights::{EdgeWeight, FollowerWeightTriple};

/// A 2n×2n matrix-weighted Laplacian tied to the sensing graph it was
/// assembled from. Rows and columns follow node id order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLaplacian {
    graph: FormationGraph,
    matrix: DMatrix<f64>,
}

impl BlockLaplacian {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn leader_count(&self) -> usize {
        self.graph.leader_count()
    }

    pub fn follower_count(&self) -> usize {
        self.graph.follower_count()
    }

    pub fn graph(&self) -> &FormationGraph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The 2×2 block coupling node `i` to node `j`.
    pub fn block(&self, i: NodeId, j: NodeId) -> Matrix2<f64> {
        self.matrix
            .fixed_view::<2, 2>(2 * i.index(), 2 * j.index())
            .into_owned()
    }

    /// Follower-follower block, rows and columns in ascending follower id
    /// order.
    pub fn ff(&self) -> DMatrix<f64> {
        let followers = self.graph.followers();
        self.gather(&followers, &followers)
    }

    /// Follower-leader block: follower rows ascending, leader columns in
    /// declared order.
    pub fn fl(&self) -> DMatrix<f64> {
        self.gather(&self.graph.followers(), self.graph.leaders())
    }

    fn gather(&self, rows: &[NodeId], cols: &[NodeId]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * rows.len(), 2 * cols.len());
        for (bi, i) in rows.iter().enumerate() {
            for (bj, j) in cols.iter().enumerate() {
                out.fixed_view_mut::<2, 2>(2 * bi, 2 * bj)
                    .copy_from(&self.block(*i, *j));
            }
        }
        out
    }

    /// Extracts the leader coordinates from a full stacked state, in
    /// declared leader order.
    pub fn gather_leaders(&self, state: &DVector<f64>) -> DVector<f64> {
        gather_nodes(state, self.graph.leaders())
    }

    /// Extracts the follower coordinates from a full stacked state, in
    /// ascending follower id order.
    pub fn gather_followers(&self, state: &DVector<f64>) -> DVector<f64> {
        gather_nodes(state, &self.graph.followers())
    }

    /// Rebuilds a full stacked state from leader and follower coordinates.
    pub fn scatter(&self, leaders: &DVector<f64>, followers: &DVector<f64>) -> DVector<f64> {
        assert_eq!(leaders.len(), 2 * self.leader_count());
        assert_eq!(followers.len(), 2 * self.follower_count());
        let mut state = DVector::zeros(2 * self.node_count());
        for (slot, id) in self.graph.leaders().iter().enumerate() {
            state[2 * id.index()] = leaders[2 * slot];
            state[2 * id.index() + 1] = leaders[2 * slot + 1];
        }
        for (slot, id) in self.graph.followers().iter().enumerate() {
            state[2 * id.index()] = followers[2 * slot];
            state[2 * id.index() + 1] = followers[2 * slot + 1];
        }
        state
    }
}

fn gather_nodes(state: &DVector<f64>, nodes: &[NodeId]) -> DVector<f64> {
    let mut out = DVector::zeros(2 * nodes.len());
    for (slot, id) in nodes.iter().enumerate() {
        out[2 * slot] = state[2 * id.index()];
        out[2 * slot + 1] = state[2 * id.index() + 1];
    }
    out
}

/// Places one weight triple per follower into a block Laplacian. Every
/// follower of the graph must be covered exactly once, and each triple's
/// neighbor pair must match the graph's edges for that follower.
pub fn assemble_laplacian(
    graph: &FormationGraph,
    triples: &[FollowerWeightTriple],
) -> Result<BlockLaplacian> {
    let n = graph.node_count();
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    let mut covered = vec![false; n];
    for triple in triples {
        let f = triple.follower();
        if f.get() > n || graph.is_leader(f) || covered[f.index()] {
            return Err(Error::TopologyMismatch { follower: f });
        }
        let (j, k) = triple.neighbors();
        if graph.neighbors(f) != [j, k] {
            return Err(Error::TopologyMismatch { follower: f });
        }
        covered[f.index()] = true;
        let mut place = |col: NodeId, w: EdgeWeight| {
            matrix
                .fixed_view_mut::<2, 2>(2 * f.index(), 2 * col.index())
                .copy_from(&w.matrix());
        };
        place(j, triple.toward_first());
        place(k, triple.toward_second());
        place(f, triple.diagonal());
    }
    if let Some(f) = graph.followers().into_iter().find(|f| !covered[f.index()]) {
        return Err(Error::TopologyMismatch { follower: f });
    }
    Ok(BlockLaplacian {
        graph: graph.clone(),
        matrix,
    })
}

/// Left-multiplies every follower row by the inverse of its diagonal block,
/// producing the equivalent Laplacian whose follower diagonals are exactly
/// the identity. Rows already in that form pass through untouched.
pub fn normalize_laplacian(l: &BlockLaplacian) -> Result<BlockLaplacian> {
    let mut matrix = l.matrix.clone();
    for f in l.graph.followers() {
        let d = l.block(f, f);
        let diag = EdgeWeight::new(d[(0, 0)], d[(1, 0)]);
        if diag == EdgeWeight::IDENTITY {
            continue;
        }
        let squared = diag.a * diag.a + diag.b * diag.b;
        if squared == 0.0 {
            return Err(Error::SingularDiagonalBlock { follower: f });
        }
        let inverse = EdgeWeight::new(diag.a / squared, -diag.b / squared).matrix();
        let row = 2 * f.index();
        let strip = inverse * matrix.rows(row, 2);
        matrix.rows_mut(row, 2).copy_from(&strip);
        matrix
            .fixed_view_mut::<2, 2>(row, row)
            .copy_from(&Matrix2::identity());
    }
    Ok(BlockLaplacian {
        graph: l.graph.clone(),
        matrix,
    })
}

/// Certification summary for a block Laplacian: the algebraic conditions
/// under which the two leaders pin down every follower position.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizabilityReport {
    /// The follower-follower block has no singular value below the rank
    /// tolerance.
    pub ff_nonsingular: bool,
    /// Dimension of the kernel of the full Laplacian; four means the kernel
    /// is exactly the similar image of the nominal shape.
    pub null_space_dim: usize,
    /// Spectrum of the follower-follower block.
    pub ff_eigenvalues: Vec<Complex64>,
    /// Smallest real part across [`Self::ff_eigenvalues`]; positive means
    /// the follower dynamics contract.
    pub min_real_part: f64,
    /// All conditions hold and the sensing topology passes validation.
    pub certified: bool,
}

impl LocalizabilityReport {
    pub fn from_laplacian(l: &BlockLaplacian) -> Self {
        let null_space_dim = 2 * l.node_count() - numerical_rank(&l.matrix);
        let ff = l.ff();
        let ff_nonsingular = if ff.is_empty() {
            true
        } else {
            let sv = ff.clone().singular_values();
            sv[sv.len() - 1] > RANK_TOLERANCE * sv[0]
        };
        let ff_eigenvalues = if l.graph.has_cycle() {
            ff.complex_eigenvalues().iter().copied().collect()
        } else {
            structural_eigenvalues(l)
        };
        let min_real_part = ff_eigenvalues
            .iter()
            .map(|ev| ev.re)
            .fold(f64::INFINITY, f64::min);
        let certified = ff_nonsingular
            && null_space_dim == 4
            && min_real_part > 0.0
            && l.graph.validate_topology().is_valid();
        LocalizabilityReport {
            ff_nonsingular,
            null_space_dim,
            ff_eigenvalues,
            min_real_part,
            certified,
        }
    }
}

/// Eigenvalues of the follower-follower block read off its diagonal. Under
/// any acyclic ordering the block is similar to a block-triangular matrix
/// whose diagonal 2×2 blocks are scaled rotations, so each contributes its
/// exact conjugate pair a ± ib and no dense eigensolver noise enters.
fn structural_eigenvalues(l: &BlockLaplacian) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * l.follower_count());
    for f in l.graph.followers() {
        let d = l.block(f, f);
        let (a, b) = (d[(0, 0)], d[(1, 0)]);
        out.push(Complex64::new(a, b));
        out.push(Complex64::new(a, -b));
    }
    out
}

/// Certifies a Laplacian against the graph the caller believes it encodes.
/// A report over the wrong graph is never certified.
pub fn localizability_report(l: &BlockLaplacian, graph: &FormationGraph) -> LocalizabilityReport {
    let mut report = LocalizabilityReport::from_laplacian(l);
    if graph != &l.graph {
        report.certified = false;
    }
    report
}

/// Unique follower positions fixed by the given leader placement: the
/// solution of L_ff p_f = -L_fl p_l, in ascending follower id order.
pub fn desired_followers(
    l: &BlockLaplacian,
    leaders: &[Vector2<f64>],
) -> Result<Vec<Vector2<f64>>> {
    if leaders.len() != l.leader_count() {
        return Err(Error::DimensionMismatch {
            expected: l.leader_count(),
            got: leaders.len(),
        });
    }
    let pl = crate::geometry::stack_points(leaders);
    let rhs = -(l.fl() * pl);
    let pf = l
        .ff()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularFollowerBlock)?;
    Ok(crate::geometry::unstack_points(&pf))
}
