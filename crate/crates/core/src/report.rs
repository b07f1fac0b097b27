//! Validation reporting for formation inputs.
//!
//! Topology and geometry checks collect every broken constraint into a
//! [`ValidationReport`] instead of failing on the first one, so a caller sees
//! the whole picture in one pass. The numbered assumptions are the model
//! constraints under which weight synthesis and certification are defined:
//!
//! 1. every follower measures exactly two neighbors,
//! 2. nominal positions are pairwise distinct,
//! 3. the formation has exactly two leaders.

use std::fmt;

use crate::graph::NodeId;

/// A single violated constraint, with enough context to locate it.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The sensing graph has a directed cycle.
    Cycle,
    /// A follower whose neighbor count differs from two (Assumption 1).
    FollowerDegree { follower: NodeId, degree: usize },
    /// Two nodes share a nominal position (Assumption 2).
    Collocated {
        first: NodeId,
        second: NodeId,
        distance: f64,
    },
    /// Leader count differs from two (Assumption 3).
    LeaderCount { count: usize },
    /// A leader with incoming edges; leaders are anchors and measure nothing.
    LeaderInEdges { leader: NodeId, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle => write!(f, "graph contains a cycle"),
            Violation::FollowerDegree { follower, degree } => write!(
                f,
                "follower {follower} has {degree} neighbors (Assumption 1 requires exactly two)"
            ),
            Violation::Collocated {
                first,
                second,
                distance,
            } => write!(
                f,
                "nodes {first} and {second} are collocated at distance {distance:.3e} \
                 (Assumption 2 requires distinct nominal positions)"
            ),
            Violation::LeaderCount { count } => write!(
                f,
                "formation has {count} leaders (Assumption 3 requires exactly two)"
            ),
            Violation::LeaderInEdges { leader, count } => write!(
                f,
                "leader {leader} has {count} incoming edges (leaders measure nothing)"
            ),
        }
    }
}

/// Outcome of a validation pass: empty means the input is admissible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub(crate) fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }

    /// Combines two reports, keeping the order of both.
    pub fn merge(mut self, other: ValidationReport) -> ValidationReport {
        self.violations.extend(other.violations);
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
