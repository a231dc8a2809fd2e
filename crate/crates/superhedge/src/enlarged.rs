//! The randomized market: a grid of parameters θ per node and the fictitious
//! frictionless price `X = Π_{K^{*,0}}[S θ]` at each enlarged node `(ω, θ)`.
//!
//! Enlarged paths are never materialized. Because `X_t` depends on `(ω^t, θ_t)`
//! only, statements quantified over all θ-paths reduce to per-node statements
//! over the node's grid.

use crate::cone::SolvencyCone;
use crate::rational::dot;
use crate::scenario::{ScenarioTree, SupportMask};
use crate::Q;
use num_traits::{One, Signed};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub theta: Vec<Q>,
    pub x: Vec<Q>,
    /// `S θ` lies in the (relative) interior of the dual slice.
    pub interior: bool,
}

/// Per node, the list of θ points.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    pub points: Vec<Vec<Vec<Q>>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnlargedError {
    #[error("grid resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),
    #[error("no interior grid point at node {0}")]
    EmptyInteriorGrid(usize),
    #[error("grid misses a vertex of the dual slice at node {0}")]
    GridMissingVertices(usize),
    #[error("grid for node {node} has a point of length {got}, expected {expected}")]
    GridShape { node: usize, expected: usize, got: usize },
    #[error("expected {expected} node vectors, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct EnlargedTree<'a> {
    tree: &'a ScenarioTree,
    mask: SupportMask,
    points: Vec<Vec<GridPoint>>,
    vertex_complete: bool,
}

/// `φ(k/(N-1))` for `k = 0..N`, piecewise linear with `φ(0) = 1/c`,
/// `φ(1/2) = 1`, `φ(1) = c`.
pub fn axis_values(c: &Q, resolution: usize) -> Vec<Q> {
    let n = Q::from_integer(((resolution - 1) as i64).into());
    let two = Q::from_integer(2.into());
    let half = Q::new(1.into(), 2.into());
    let inv = Q::one() / c;
    (0..resolution)
        .map(|k| {
            let s = Q::from_integer((k as i64).into()) / &n;
            if s <= half {
                &inv + (Q::one() - &inv) * &two * &s
            } else {
                Q::one() + (c - Q::one()) * (&two * &s - Q::one())
            }
        })
        .collect()
}

fn sorted_unique(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v.dedup();
    v
}

/// Default θ grid at one node: the `φ` values, the point 1 and the
/// coordinates of every slice vertex divided by the mid price, per axis.
pub fn node_grid(cone: &SolvencyCone, resolution: usize) -> Vec<Vec<Q>> {
    let k = cone.d() - 1;
    let axes: Vec<Vec<Q>> = (0..k)
        .map(|i| {
            let mut vals = axis_values(cone.factor(), resolution);
            vals.push(Q::one());
            vals.extend(cone.vertices().iter().map(|v| &v[i] / &cone.mid()[i]));
            sorted_unique(vals)
        })
        .collect();
    let mut out: Vec<Vec<Q>> = vec![Vec::new()];
    for axis in &axes {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |a| {
            let mut q = p.clone();
            q.push(a.clone());
            q
        })).collect();
    }
    out
}

pub fn default_grid(tree: &ScenarioTree, resolution: usize) -> Result<ThetaGrid, EnlargedError> {
    if resolution < 2 {
        return Err(EnlargedError::ResolutionTooSmall(resolution));
    }
    Ok(ThetaGrid { points: tree.nodes().iter().map(|n| node_grid(&n.cone, resolution)).collect() })
}

/// `S θ` with the numéraire coordinate set to 1.
pub fn scaled_mid(cone: &SolvencyCone, theta: &[Q]) -> Vec<Q> {
    let mut y: Vec<Q> = theta.iter().zip(cone.mid()).map(|(t, s)| t * s).collect();
    y.push(Q::one());
    y
}

pub fn fictitious_price(cone: &SolvencyCone, theta: &[Q]) -> Vec<Q> {
    cone.project_to_slice(&scaled_mid(cone, theta)).expect("normalized by construction")
}

pub fn build_enlarged(tree: &ScenarioTree, resolution: usize) -> Result<EnlargedTree<'_>, EnlargedError> {
    build_enlarged_with_grid(tree, default_grid(tree, resolution)?)
}

pub fn build_enlarged_with_grid(tree: &ScenarioTree, grid: ThetaGrid) -> Result<EnlargedTree<'_>, EnlargedError> {
    if grid.points.len() != tree.len() {
        return Err(EnlargedError::DimensionMismatch { expected: tree.len(), got: grid.points.len() });
    }
    let mut points = Vec::with_capacity(tree.len());
    let mut vertex_complete = true;
    for (id, thetas) in grid.points.into_iter().enumerate() {
        let cone = tree.cone(id);
        let mut pts = Vec::with_capacity(thetas.len());
        for theta in thetas {
            if theta.len() != cone.d() - 1 {
                return Err(EnlargedError::GridShape { node: id, expected: cone.d() - 1, got: theta.len() });
            }
            let y = scaled_mid(cone, &theta);
            let interior = cone.in_dual_interior(&y).expect("length checked");
            let x = cone.project_to_slice(&y).expect("normalized by construction");
            pts.push(GridPoint { theta, x, interior });
        }
        if !pts.iter().any(|p| p.interior) {
            return Err(EnlargedError::EmptyInteriorGrid(id));
        }
        vertex_complete &= cone.vertices().iter().all(|v| pts.iter().any(|p| &p.x == v));
        points.push(pts);
    }
    Ok(EnlargedTree { tree, mask: tree.polar_mask(), points, vertex_complete })
}

impl<'a> EnlargedTree<'a> {
    pub fn tree(&self) -> &'a ScenarioTree {
        self.tree
    }

    pub fn mask(&self) -> &SupportMask {
        &self.mask
    }

    pub fn points(&self, node: usize) -> &[GridPoint] {
        &self.points[node]
    }

    /// Every slice vertex is the fictitious price of some grid point.
    pub fn vertex_complete(&self) -> bool {
        self.vertex_complete
    }

    pub fn first_missing_vertex(&self) -> Option<usize> {
        (0..self.tree.len()).find(|&id| {
            self.tree.cone(id).vertices().iter().any(|v| !self.points[id].iter().any(|p| &p.x == v))
        })
    }

    pub fn grid_size(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }
}

/// Both sides of the cone/randomization equivalence for an adapted `ζ`:
/// `ζ ∈ -K` at every reachable node, and `⟨ζ, X⟩ ≤ 0` at every reachable
/// enlarged node.
pub fn check_theorem_main(enl: &EnlargedTree<'_>, zeta: &[Vec<Q>]) -> Result<(bool, bool), EnlargedError> {
    let tree = enl.tree();
    if zeta.len() != tree.len() {
        return Err(EnlargedError::DimensionMismatch { expected: tree.len(), got: zeta.len() });
    }
    if let Some(id) = enl.first_missing_vertex() {
        return Err(EnlargedError::GridMissingVertices(id));
    }
    let mut cone_side = true;
    let mut grid_side = true;
    for id in (0..tree.len()).filter(|&i| enl.mask().is_reachable(i)) {
        let z = &zeta[id];
        if z.len() != tree.d() {
            return Err(EnlargedError::DimensionMismatch { expected: tree.d(), got: z.len() });
        }
        cone_side &= tree.cone(id).in_minus_cone(z).expect("length checked");
        grid_side &= enl.points(id).iter().all(|p| !dot(z, &p.x).is_positive());
    }
    Ok((cone_side, grid_side))
}
