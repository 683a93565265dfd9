use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// `x in [-1, 1]`
    Strip,
    /// Radially symmetric unit disc, `r in [0, 1]`.
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// `u = du/dn = 0`
    Clamped,
    /// `u = Laplacian u = 0`
    Navier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub geometry: Geometry,
    pub condition: Condition,
}

impl BoundarySpec {
    pub const fn new(geometry: Geometry, condition: Condition) -> Self {
        Self {
            geometry,
            condition,
        }
    }

    pub const ALL: [BoundarySpec; 4] = [
        Self::new(Geometry::Strip, Condition::Navier),
        Self::new(Geometry::Disc, Condition::Navier),
        Self::new(Geometry::Strip, Condition::Clamped),
        Self::new(Geometry::Disc, Condition::Clamped),
    ];

    pub fn domain(&self) -> (f64, f64) {
        match self.geometry {
            Geometry::Strip => (-1.0, 1.0),
            Geometry::Disc => (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryNode {
    First,
    Last,
}

/// `sum coeff * u^(k)` at one end node equals zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalConstraint {
    pub node: BoundaryNode,
    pub terms: Vec<(usize, f64)>,
}

impl NodalConstraint {
    fn single(node: BoundaryNode, k: usize) -> Self {
        Self {
            node,
            terms: vec![(k, 1.0)],
        }
    }

    pub fn apply(&self, nodal: &[f64; 4]) -> f64 {
        self.terms.iter().map(|&(k, c)| c * nodal[k]).sum()
    }
}

/// The four homogeneous end constraints; the disc origin takes `u' = u''' = 0`.
pub fn boundary_rows(spec: BoundarySpec) -> [NodalConstraint; 4] {
    use BoundaryNode::{First, Last};
    let single = NodalConstraint::single;
    match (spec.geometry, spec.condition) {
        (Geometry::Strip, Condition::Clamped) => [
            single(First, 0),
            single(First, 1),
            single(Last, 0),
            single(Last, 1),
        ],
        (Geometry::Strip, Condition::Navier) => [
            single(First, 0),
            single(First, 2),
            single(Last, 0),
            single(Last, 2),
        ],
        (Geometry::Disc, Condition::Clamped) => [
            single(First, 1),
            single(First, 3),
            single(Last, 0),
            single(Last, 1),
        ],
        (Geometry::Disc, Condition::Navier) => [
            single(First, 1),
            single(First, 3),
            single(Last, 0),
            // u'' + u'/r at r = 1
            NodalConstraint {
                node: Last,
                terms: vec![(2, 1.0), (1, 1.0)],
            },
        ],
    }
}
