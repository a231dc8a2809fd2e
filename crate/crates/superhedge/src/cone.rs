//! Solvency cones in dual vertex form.
//!
//! A cone `K` is never stored directly. We keep the vertex list `V` of its
//! normalized dual slice `K^{*,0} = K^* ∩ {y^d = 1}`; then `x ∈ K` iff
//! `⟨x, v⟩ ≥ 0` for every `v ∈ V`. Slice points are full `d`-vectors whose
//! last coordinate is 1.

use crate::linalg;
use crate::rational::{dot, norm2, sub};
use crate::Q;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct BidAskSpec {
    pub mid: Vec<Q>,
    pub factor: Q,
    /// Per risky asset `[lo, hi]`; `None` means `[S/c, cS]`.
    pub intervals: Option<Vec<(Q, Q)>>,
    /// Allows `c = 1` and collapsed intervals (zero spread on an axis).
    pub frictionless: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("need at least two assets, got {0}")]
    TooFewAssets(usize),
    #[error("mid price of asset {0} is not positive")]
    NonPositiveMid(usize),
    #[error("mid price of the numeraire must be 1")]
    NumeraireNotOne,
    #[error("spread factor must be greater than 1")]
    SpreadNotGreaterThanOne,
    #[error("interval of asset {asset}: {reason}")]
    IntervalViolatesAssumption2 { asset: usize, reason: String },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("last coordinate must equal 1")]
    SliceCoordinateNotOne,
    #[error("vertex {0} must be strictly positive with last coordinate 1")]
    BadVertex(usize),
    #[error("dual slice is not full-dimensional")]
    DegenerateSlice,
    #[error("mid price is not interior to the dual slice")]
    MidNotInterior,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Box { lo: Vec<Q>, hi: Vec<Q> },
    /// `a·z ≤ β` over the first `d-1` coordinates.
    Polytope { facets: Vec<(Vec<Q>, Q)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvencyCone {
    d: usize,
    vertices: Vec<Vec<Q>>,
    mid: Vec<Q>,
    shape: Shape,
    factor: Q,
    frictionless: bool,
}

fn check_mid(mid: &[Q]) -> Result<usize, ConeError> {
    let d = mid.len();
    if d < 2 {
        return Err(ConeError::TooFewAssets(d));
    }
    if let Some(i) = mid.iter().position(|s| !s.is_positive()) {
        return Err(ConeError::NonPositiveMid(i));
    }
    if !mid[d - 1].is_one() {
        return Err(ConeError::NumeraireNotOne);
    }
    Ok(d)
}

/// Builds the cone whose dual slice is the bid–ask box of `spec`.
pub fn build_cone(spec: &BidAskSpec) -> Result<SolvencyCone, ConeError> {
    let d = check_mid(&spec.mid)?;
    let c = &spec.factor;
    if !c.is_positive() || c < &Q::one() {
        return Err(ConeError::SpreadNotGreaterThanOne);
    }
    let (lo, hi): (Vec<Q>, Vec<Q>) = match &spec.intervals {
        Some(iv) => {
            if iv.len() != d - 1 {
                return Err(ConeError::DimensionMismatch { expected: d - 1, got: iv.len() });
            }
            iv.iter().cloned().unzip()
        }
        None => spec.mid[..d - 1].iter().map(|s| (s / c, s * c)).unzip(),
    };
    for i in 0..d - 1 {
        let s = &spec.mid[i];
        let bad = |reason: &str| ConeError::IntervalViolatesAssumption2 { asset: i, reason: reason.to_string() };
        if lo[i] > hi[i] {
            return Err(bad("lower end exceeds upper end"));
        }
        if &lo[i] < &(s / c) || &hi[i] > &(s * c) {
            return Err(bad("interval leaves [S/c, cS]"));
        }
        if lo[i] == hi[i] {
            if !spec.frictionless {
                return Err(bad("collapsed interval needs the frictionless toggle"));
            }
            if &lo[i] != s {
                return Err(bad("collapsed interval must sit at the mid price"));
            }
        } else if !(&lo[i] < s && s < &hi[i]) {
            return Err(bad("mid price must lie strictly inside the interval"));
        }
    }
    if !spec.frictionless && c.is_one() {
        return Err(ConeError::SpreadNotGreaterThanOne);
    }
    let vertices = box_corners(&lo, &hi);
    Ok(SolvencyCone {
        d,
        vertices,
        mid: spec.mid.clone(),
        shape: Shape::Box { lo, hi },
        factor: c.clone(),
        frictionless: spec.frictionless,
    })
}

fn box_corners(lo: &[Q], hi: &[Q]) -> Vec<Vec<Q>> {
    let k = lo.len();
    let mut out: Vec<Vec<Q>> = Vec::new();
    for mask in 0..(1usize << k) {
        let mut v: Vec<Q> = (0..k).map(|i| if mask >> i & 1 == 1 { hi[i].clone() } else { lo[i].clone() }).collect();
        v.push(Q::one());
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

impl SolvencyCone {
    /// General dual slice given by its vertices (or any finite generating set).
    pub fn from_vertices(mid: Vec<Q>, vertices: Vec<Vec<Q>>) -> Result<SolvencyCone, ConeError> {
        let d = check_mid(&mid)?;
        let mut vs: Vec<Vec<Q>> = Vec::new();
        for (j, v) in vertices.into_iter().enumerate() {
            if v.len() != d || !v[d - 1].is_one() || v.iter().any(|x| !x.is_positive()) {
                return Err(ConeError::BadVertex(j));
            }
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        if vs.is_empty() {
            return Err(ConeError::DegenerateSlice);
        }
        let k = d - 1;
        let diffs: Vec<Vec<Q>> = vs.iter().skip(1).map(|v| sub(&v[..k], &vs[0][..k])).collect();
        if linalg::rank(&diffs) < k {
            return Err(ConeError::DegenerateSlice);
        }
        let facets = facets_of(&vs, k);
        let cone = SolvencyCone {
            d,
            factor: extent_factor(&mid, &vs),
            vertices: vs,
            mid,
            shape: Shape::Polytope { facets },
            frictionless: false,
        };
        if !cone.slice_interior(&cone.mid) {
            return Err(ConeError::MidNotInterior);
        }
        Ok(cone)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    pub fn mid(&self) -> &[Q] {
        &self.mid
    }

    /// Declared spread factor for boxes, smallest enclosing factor otherwise.
    pub fn factor(&self) -> &Q {
        &self.factor
    }

    pub fn frictionless(&self) -> bool {
        self.frictionless
    }

    pub fn box_bounds(&self) -> Option<(&[Q], &[Q])> {
        match &self.shape {
            Shape::Box { lo, hi } => Some((lo, hi)),
            Shape::Polytope { .. } => None,
        }
    }

    /// The bid–ask description of a box cone, for serialization.
    pub fn bid_ask_spec(&self) -> Option<BidAskSpec> {
        let (lo, hi) = self.box_bounds()?;
        Some(BidAskSpec {
            mid: self.mid.clone(),
            factor: self.factor.clone(),
            intervals: Some(lo.iter().cloned().zip(hi.iter().cloned()).collect()),
            frictionless: self.frictionless,
        })
    }

    fn check_len(&self, x: &[Q]) -> Result<(), ConeError> {
        if x.len() != self.d {
            return Err(ConeError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(())
    }

    pub fn in_cone(&self, x: &[Q]) -> Result<bool, ConeError> {
        self.check_len(x)?;
        Ok(self.vertices.iter().all(|v| !dot(x, v).is_negative()))
    }

    pub fn in_minus_cone(&self, x: &[Q]) -> Result<bool, ConeError> {
        self.check_len(x)?;
        Ok(self.vertices.iter().all(|v| !dot(x, v).is_positive()))
    }

    pub fn in_dual(&self, y: &[Q]) -> Result<bool, ConeError> {
        self.check_len(y)?;
        let yd = &y[self.d - 1];
        if yd.is_zero() {
            return Ok(y.iter().all(Zero::is_zero));
        }
        if yd.is_negative() {
            return Ok(false);
        }
        Ok(self.slice_contains(&normalize(y)))
    }

    /// Relative interior of `K^*`; strict on every axis with a spread.
    pub fn in_dual_interior(&self, y: &[Q]) -> Result<bool, ConeError> {
        self.check_len(y)?;
        if !y[self.d - 1].is_positive() {
            return Ok(false);
        }
        Ok(self.slice_interior(&normalize(y)))
    }

    /// Closed membership of a normalized point in `K^{*,0}`.
    pub fn slice_contains(&self, z: &[Q]) -> bool {
        let k = self.d - 1;
        match &self.shape {
            Shape::Box { lo, hi } => (0..k).all(|i| lo[i] <= z[i] && z[i] <= hi[i]),
            Shape::Polytope { facets } => facets.iter().all(|(a, b)| &dot(a, &z[..k]) <= b),
        }
    }

    pub fn slice_interior(&self, z: &[Q]) -> bool {
        let k = self.d - 1;
        match &self.shape {
            Shape::Box { lo, hi } => {
                (0..k).all(|i| if lo[i] == hi[i] { z[i] == lo[i] } else { lo[i] < z[i] && z[i] < hi[i] })
            }
            Shape::Polytope { facets } => facets.iter().all(|(a, b)| &dot(a, &z[..k]) < b),
        }
    }

    /// Euclidean projection onto `K^{*,0}`.
    pub fn project_to_slice(&self, y: &[Q]) -> Result<Vec<Q>, ConeError> {
        self.check_len(y)?;
        if !y[self.d - 1].is_one() {
            return Err(ConeError::SliceCoordinateNotOne);
        }
        Ok(match &self.shape {
            Shape::Box { lo, hi } => {
                let mut z: Vec<Q> = (0..self.d - 1).map(|i| y[i].clone().max(lo[i].clone()).min(hi[i].clone())).collect();
                z.push(Q::one());
                z
            }
            Shape::Polytope { .. } => {
                if self.slice_contains(y) {
                    y.to_vec()
                } else {
                    project_onto_hull(&self.vertices, y)
                }
            }
        })
    }

    /// Vertices of a slice pulled strictly inside: boxes lose `width/1000` on
    /// each side (smallest nondegenerate width), general slices shrink by 1/1000
    /// toward the mid price.
    pub fn shrunk_vertices(&self) -> Vec<Vec<Q>> {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let widths = lo.iter().zip(hi).map(|(l, h)| h - l).filter(|w| w.is_positive());
                let Some(eps) = widths.min().map(|w| w / Q::from_integer(1000.into())) else {
                    return self.vertices.clone();
                };
                let (lo2, hi2): (Vec<Q>, Vec<Q>) = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| if l == h { (l.clone(), h.clone()) } else { (l + &eps, h - &eps) })
                    .unzip();
                box_corners(&lo2, &hi2)
            }
            Shape::Polytope { .. } => {
                let delta = Q::new(1.into(), 1000.into());
                self.vertices
                    .iter()
                    .map(|v| v.iter().zip(&self.mid).map(|(a, s)| a + &delta * (s - a)).collect())
                    .collect()
            }
        }
    }
}

fn normalize(y: &[Q]) -> Vec<Q> {
    let yd = y[y.len() - 1].clone();
    y.iter().map(|a| a / &yd).collect()
}

fn extent_factor(mid: &[Q], vs: &[Vec<Q>]) -> Q {
    let mut c = Q::one();
    for v in vs {
        for i in 0..mid.len() - 1 {
            let r = &v[i] / &mid[i];
            let r = if r < Q::one() { Q::one() / r } else { r };
            if r > c {
                c = r;
            }
        }
    }
    c
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Facet inequalities of a full-dimensional polytope in `Q^k`, by testing the
/// hyperplane through every affinely independent `k`-subset of the points.
fn facets_of(vs: &[Vec<Q>], k: usize) -> Vec<(Vec<Q>, Q)> {
    let mut out: Vec<(Vec<Q>, Q)> = Vec::new();
    for sub in subsets(vs.len(), k) {
        let rows: Vec<Vec<Q>> = sub
            .iter()
            .map(|&j| {
                let mut r = vs[j][..k].to_vec();
                r.push(-Q::one());
                r
            })
            .collect();
        let ns = linalg::nullspace(&rows, k + 1);
        if ns.len() != 1 {
            continue;
        }
        let mut n = ns.into_iter().next().unwrap();
        if n[..k].iter().all(Zero::is_zero) {
            continue;
        }
        let side: Vec<Q> = vs.iter().map(|v| dot(&n[..k], &v[..k]) - &n[k]).collect();
        if side.iter().all(|s| !s.is_positive()) {
        } else if side.iter().all(|s| !s.is_negative()) {
            n = n.iter().map(|x| -x).collect();
        } else {
            continue;
        }
        let lead = n.iter().find(|x| !x.is_zero()).unwrap().abs();
        let n: Vec<Q> = n.iter().map(|x| x / &lead).collect();
        let facet = (n[..k].to_vec(), n[k].clone());
        if !out.contains(&facet) {
            out.push(facet);
        }
    }
    out
}

/// Exact projection onto `conv(points)`: project onto the affine hull of
/// every affinely independent subset, keep those landing inside their own
/// hull, return the nearest.
fn project_onto_hull(points: &[Vec<Q>], y: &[Q]) -> Vec<Q> {
    let k = y.len() - 1;
    let mut best: Option<(Q, Vec<Q>)> = None;
    for size in 1..=(k + 1).min(points.len()) {
        for sub in subsets(points.len(), size) {
            let p0 = &points[sub[0]][..k];
            let dirs: Vec<Vec<Q>> = sub[1..].iter().map(|&j| sub_slice(&points[j][..k], p0)).collect();
            let gram: Vec<Vec<Q>> = dirs.iter().map(|a| dirs.iter().map(|b| dot(a, b)).collect()).collect();
            let rhs: Vec<Q> = dirs.iter().map(|a| dot(a, &sub_slice(&y[..k], p0))).collect();
            let beta = if dirs.is_empty() {
                Vec::new()
            } else {
                match linalg::solve_square(&gram, &rhs) {
                    Some(b) => b,
                    None => continue,
                }
            };
            let alpha0 = Q::one() - beta.iter().fold(Q::zero(), |a, b| a + b);
            if alpha0.is_negative() || beta.iter().any(Signed::is_negative) {
                continue;
            }
            let mut x = p0.to_vec();
            for (b, dir) in beta.iter().zip(&dirs) {
                for i in 0..k {
                    x[i] += b * &dir[i];
                }
            }
            let dist = norm2(&sub_slice(&x, &y[..k]));
            if best.as_ref().is_none_or(|(bd, _)| &dist < bd) {
                best = Some((dist, x));
            }
        }
    }
    let mut x = best.expect("a single point is always a candidate").1;
    x.push(Q::one());
    x
}

fn sub_slice(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
