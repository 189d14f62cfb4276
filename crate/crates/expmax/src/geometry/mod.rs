//! Exact geometric primitives shared by every other module: ball membership,
//! minimizing points, cone rotations, slices, shadows and parallelepipeds.
//!
//! All operations are pure functions of their inputs; values are immutable
//! after construction and safe to evaluate in parallel.

pub mod cone;
pub mod polytope;

pub use cone::{bottom_point, ConeFrame};
pub use polytope::{diamond_slice_measure, polytope_volume, HalfSpace};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which `ℓ^q` norm generates the metric balls.
///
/// `L1` balls are diamonds, `L2` balls are Euclidean balls, `Linf` balls are
/// axis-parallel cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    /// Evaluate `|v|_q`.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Distance between two points of equal dimension.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            NormKind::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            NormKind::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            NormKind::Linf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            NormKind::L1 => "diamond",
            NormKind::L2 => "ball",
            NormKind::Linf => "cube",
        }
    }
}

/// Maximum dimension supported by the geometric constructions.
pub const MAX_DIM: usize = 4;

/// A point of the open positive orthant `(0, ∞)^d`, `d ≤ 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantPoint {
    coords: Vec<f64>,
}

impl OrthantPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "dimension must be in 1..=4, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::domain(
                "orthant point must have strictly positive finite coordinates",
            ));
        }
        Ok(OrthantPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `|x|₁`; for orthant points this is just the coordinate sum.
    pub fn l1(&self) -> f64 {
        self.coords.iter().sum()
    }

    pub fn min_coord(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// An open metric ball of `(ℝ^d₊, ρ_q)`: the realized point set is
/// `{y ∈ ℝ^d₊ : |y - center|_q < radius}`, always intersected with the open
/// positive orthant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub kind: NormKind,
    pub center: OrthantPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(kind: NormKind, center: OrthantPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain("ball radius must be strictly positive"));
        }
        Ok(Ball {
            kind,
            center,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Membership test. Boundary points report `false` (open balls), and any
    /// point outside the open orthant reports `false`.
    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|&c| c <= 0.0) {
            return Ok(false);
        }
        Ok(self.kind.distance(p, self.center.coords()) < self.radius)
    }

    /// Per-coordinate bounding box of the ball (before orthant clipping).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let c = self.center.coords();
        let lo = c.iter().map(|&x| x - self.radius).collect();
        let hi = c.iter().map(|&x| x + self.radius).collect();
        (lo, hi)
    }

    /// True when the closed ball is disjoint from the boundary of the
    /// orthant, i.e. `radius ≤ min_i center_i`.
    pub fn is_interior(&self) -> bool {
        self.radius <= self.center.min_coord()
    }
}

/// The point of the closed ball where `|·|₁` is minimal (the density of `μ`
/// is maximal):
///
/// * cubes: `x - r·𝟏`,
/// * Euclidean balls: `x - (r/√d)·𝟏`,
/// * diamonds: `x - (r/d)·𝟏`.
///
/// For diamonds the minimizer is not unique; the formula point is returned.
/// Requires an interior ball (`r ≤ min_i x_i`), as the formulas are stated
/// only there.
pub fn minimizing_point(ball: &Ball) -> Result<Vec<f64>> {
    if !ball.is_interior() {
        return Err(Error::domain(
            "minimizing point requires radius ≤ min coordinate of the center",
        ));
    }
    let d = ball.dim() as f64;
    let step = match ball.kind {
        NormKind::Linf => ball.radius,
        NormKind::L2 => ball.radius / d.sqrt(),
        NormKind::L1 => ball.radius / d,
    };
    Ok(ball.center.coords().iter().map(|&x| x - step).collect())
}

/// A k-dimensional parallelepiped in `ℝ^k`: a vertex plus k linearly
/// independent edge vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelepiped {
    pub vertex: Vec<f64>,
    pub edges: Vec<Vec<f64>>,
}

impl Parallelepiped {
    pub fn new(vertex: Vec<f64>, edges: Vec<Vec<f64>>) -> Result<Self> {
        let k = vertex.len();
        if edges.len() != k || edges.iter().any(|e| e.len() != k) {
            return Err(Error::domain("parallelepiped needs k edges in ℝ^k"));
        }
        let p = Parallelepiped { vertex, edges };
        if p.volume() <= 0.0 {
            return Err(Error::domain("parallelepiped edges must be independent"));
        }
        Ok(p)
    }

    /// `|det(edges)|`.
    pub fn volume(&self) -> f64 {
        let k = self.vertex.len();
        let mut m: Vec<Vec<f64>> = self.edges.clone();
        det_in_place(&mut m, k).abs()
    }

    /// Membership with tolerance `tol` on the barycentric coordinates.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let k = self.vertex.len();
        let rhs: Vec<f64> = p.iter().zip(&self.vertex).map(|(a, b)| a - b).collect();
        // columns are the edges
        let mut m = vec![vec![0.0; k]; k];
        for (j, e) in self.edges.iter().enumerate() {
            for i in 0..k {
                m[i][j] = e[i];
            }
        }
        match solve(&m, &rhs) {
            Some(lambda) => lambda.iter().all(|&l| (-tol..=1.0 + tol).contains(&l)),
            None => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Small dense linear algebra (d ≤ 4 throughout the crate).
// ---------------------------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm2(a);
    scale(a, 1.0 / n)
}

fn det_in_place(m: &mut [Vec<f64>], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let (mut piv, mut best) = (col, m[col][col].abs());
        for r in col + 1..n {
            if m[r][col].abs() > best {
                piv = r;
                best = m[r][col].abs();
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Solve `M x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` for (numerically) singular systems.
pub fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    for col in 0..n {
        let (mut piv, mut best) = (col, a[col][col].abs());
        for r in col + 1..n {
            if a[r][col].abs() > best {
                piv = r;
                best = a[r][col].abs();
            }
        }
        if best < 1e-13 {
            return None;
        }
        a.swap(piv, col);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

// ---------------------------------------------------------------------------
// Shadows
// ---------------------------------------------------------------------------

/// A region of `ℝ^d` with a membership test and a bounding box; used by the
/// generic shadow search.
pub trait Region {
    fn dim(&self) -> usize;
    fn region_contains(&self, p: &[f64]) -> bool;
    /// A box guaranteed to contain the region.
    fn region_bounding_box(&self) -> (Vec<f64>, Vec<f64>);
}

impl Region for Ball {
    fn dim(&self) -> usize {
        Ball::dim(self)
    }
    fn region_contains(&self, p: &[f64]) -> bool {
        self.contains(p).unwrap_or(false)
    }
    fn region_bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.bounding_box()
    }
}

/// Shadow membership for Euclidean balls, decided exactly by the quadratic
/// `|p - s·dir - c|² < r²` over `s ≥ 0`. The orthant truncation of the ball
/// is honored by also requiring the witness point to lie in the orthant; the
/// set of admissible `s` is an interval by convexity, so a bisection refines
/// the quadratic interval.
pub fn shadow_contains_ball(ball: &Ball, direction: &[f64], p: &[f64]) -> Result<bool> {
    if direction.len() != ball.dim() || p.len() != ball.dim() {
        return Err(Error::DimensionMismatch {
            expected: ball.dim(),
            got: direction.len().max(p.len()),
        });
    }
    if (norm2(direction) - 1.0).abs() > 1e-9 {
        return Err(Error::domain("shadow direction must be a unit vector"));
    }
    match ball.kind {
        NormKind::L2 => {
            let w = sub(p, ball.center.coords());
            // |w - s d|² < r²  ⇔  s² - 2 s⟨w,d⟩ + |w|² - r² < 0
            let b = dot(&w, direction);
            let c = dot(&w, &w) - ball.radius * ball.radius;
            let disc = b * b - c;
            if disc <= 0.0 {
                return Ok(false);
            }
            let (s1, s2) = (b - disc.sqrt(), b + disc.sqrt());
            if s2 <= 0.0 {
                return Ok(false);
            }
            let lo = s1.max(0.0);
            // The ball itself is orthant-truncated; scan the admissible
            // interval for an orthant witness (the hit set is an interval).
            let steps = 256;
            for k in 0..=steps {
                let s = lo + (s2 - lo) * (k as f64 + 0.5) / (steps as f64 + 1.0);
                let q = axpy(p, -s, direction);
                if ball.contains(&q)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => Ok(shadow_contains(ball, direction, p)),
    }
}

/// Generic shadow membership: true iff `p - s·direction` lies in the region
/// for some `s ≥ 0`, decided by a 1D scan over `s` against the region's
/// membership test.
pub fn shadow_contains<R: Region + ?Sized>(region: &R, direction: &[f64], p: &[f64]) -> bool {
    if region.region_contains(p) {
        return true;
    }
    let (lo, hi) = region.region_bounding_box();
    // Upper bound on the travel needed to sweep the whole box from p.
    let diam: f64 = lo
        .iter()
        .zip(&hi)
        .zip(p)
        .map(|((&l, &h), &x)| (x - l).abs().max((x - h).abs()))
        .sum();
    let steps = 4096;
    for k in 0..=steps {
        let s = diam * k as f64 / steps as f64;
        let q = axpy(p, -s, direction);
        if region.region_contains(&q) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> OrthantPoint {
        OrthantPoint::new(c.to_vec()).unwrap()
    }

    fn ball(kind: NormKind, c: &[f64], r: f64) -> Ball {
        Ball::new(kind, pt(c), r).unwrap()
    }

    #[test]
    fn membership_matches_norms() {
        let d = ball(NormKind::L1, &[2.0, 2.0], 1.0);
        assert!(d.contains(&[2.5, 2.0]).unwrap()); // |Δ|₁ = 0.5
        let b = ball(NormKind::L2, &[3.0, 3.0], 1.0);
        assert!(!b.contains(&[3.0, 4.0]).unwrap()); // boundary excluded
        let q = ball(NormKind::Linf, &[2.0, 2.0], 1.0);
        assert!(!q.contains(&[2.5, -0.5]).unwrap()); // outside the orthant
    }

    #[test]
    fn membership_rejects_dimension_mismatch() {
        let q = ball(NormKind::Linf, &[2.0, 2.0], 1.0);
        assert!(q.contains(&[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn minimizing_points_follow_the_closed_forms() {
        let q = ball(NormKind::Linf, &[3.0, 3.0], 1.0);
        assert_eq!(minimizing_point(&q).unwrap(), vec![2.0, 2.0]);
        let b = ball(NormKind::L2, &[3.0, 3.0], std::f64::consts::SQRT_2);
        let z = minimizing_point(&b).unwrap();
        assert_relative_eq!(z[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(z[1], 2.0, epsilon = 1e-12);
        let d = ball(NormKind::L1, &[4.0, 4.0], 2.0);
        assert_eq!(minimizing_point(&d).unwrap(), vec![3.0, 3.0]);
    }

    #[test]
    fn minimizing_point_requires_interior_ball() {
        let q = ball(NormKind::Linf, &[1.0, 3.0], 2.0);
        assert!(minimizing_point(&q).is_err());
    }

    #[test]
    fn shadow_membership_for_balls() {
        let b = ball(NormKind::L2, &[3.0, 3.0], 1.0);
        let e1 = [1.0, 0.0];
        assert!(shadow_contains_ball(&b, &e1, &[10.0, 3.0]).unwrap());
        assert!(!shadow_contains_ball(&b, &e1, &[10.0, 5.0]).unwrap());
        // s = 0: points of the region are in its shadow
        assert!(shadow_contains_ball(&b, &e1, &[3.2, 3.1]).unwrap());
    }

    #[test]
    fn parallelepiped_volume_and_membership() {
        let p = Parallelepiped::new(
            vec![0.0, 0.0],
            vec![vec![2.0, 0.0], vec![1.0, 1.0]],
        )
        .unwrap();
        assert_relative_eq!(p.volume(), 2.0, epsilon = 1e-14);
        assert!(p.contains(&[1.5, 0.5], 1e-12));
        assert!(!p.contains(&[-0.1, 0.0], 1e-12));
    }

    #[test]
    fn solve_small_systems() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&m, &[5.0, 10.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.0, epsilon = 1e-12);
        let sing = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&sing, &[1.0, 2.0]).is_none());
    }
}
