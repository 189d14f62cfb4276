//! The rotated cone `C₊` and its geometry.
//!
//! `ConeFrame` holds an orthogonal map sending the diagonal direction
//! `(1,…,1)/√d` to the first coordinate axis, so the positive orthant maps to
//! an open cone with central axis `Ox₁`. The measure `e^{-|x|₁} dx` becomes
//! `e^{-√d·x₁} dx` there; after the scaling conventionally absorbed into the
//! constants it is `e^{-x₁} dx`.

use super::{axpy, dot, norm2, normalize, solve, sub};
use crate::error::{Error, Result};

/// Orthogonal change of frame between the positive orthant and the rotated
/// cone with axis `Ox₁`.
#[derive(Debug, Clone)]
pub struct ConeFrame {
    dim: usize,
    /// Householder reflection sending `𝟏/√d` to `e₁`; symmetric and
    /// involutive, so it serves as both directions of the map.
    matrix: Vec<Vec<f64>>,
}

impl ConeFrame {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=super::MAX_DIM).contains(&dim) {
            return Err(Error::domain("cone frame dimension must be in 1..=4"));
        }
        let d = dim as f64;
        let u: Vec<f64> = vec![1.0 / d.sqrt(); dim];
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        let w = sub(&u, &v);
        let ww = dot(&w, &w);
        let mut m = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] = if i == j { 1.0 } else { 0.0 };
                if ww > 0.0 {
                    m[i][j] -= 2.0 * w[i] * w[j] / ww;
                }
            }
        }
        Ok(ConeFrame { dim, matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Map orthant coordinates to cone coordinates.
    pub fn rotate(&self, p: &[f64]) -> Vec<f64> {
        self.apply(p)
    }

    /// Inverse map (the Householder matrix is involutive).
    pub fn rotate_inv(&self, p: &[f64]) -> Vec<f64> {
        self.apply(p)
    }

    fn apply(&self, p: &[f64]) -> Vec<f64> {
        debug_assert_eq!(p.len(), self.dim);
        self.matrix
            .iter()
            .map(|row| dot(row, p))
            .collect()
    }

    /// True iff `p` (cone coordinates) lies in the open cone `C₊`.
    pub fn cone_contains(&self, p: &[f64]) -> bool {
        self.rotate_inv(p).iter().all(|&c| c > 0.0)
    }

    /// Vertices of the cross-section `C_+ ∩ {x₁ = level}` as points of the
    /// hyperplane (first coordinate suppressed). They are the images of the
    /// scaled standard basis points `√d·level·e_i`; for `d = 3` the section
    /// is an equilateral triangle of side `√6·level`, for `d = 4` a regular
    /// tetrahedron of side `√8·level`.
    pub fn cross_section_vertices(&self, level: f64) -> Vec<Vec<f64>> {
        let d = self.dim;
        let s = (d as f64).sqrt() * level;
        (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = s;
                let img = self.rotate(&e);
                img[1..].to_vec()
            })
            .collect()
    }

    /// Outward unit normals (in cone coordinates) of the `d` facets of the
    /// cone, i.e. the images of `-e_i`.
    pub fn facet_normals(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = -1.0;
                self.rotate(&e)
            })
            .collect()
    }
}

/// The lowest point of the truncated ball `𝐁(m, r) ∩ cl(C₊)`: the argmin of
/// `x₁` over that closed set.
///
/// The free minimum `m - r·e₁` is returned when it lies in the closed cone;
/// otherwise the constrained minimizer is found by enumerating the faces of
/// the cone of every codimension (at most `2^d` subsets for `d ≤ 4`) and
/// solving the equality-constrained quadratic on each. Ties are broken by
/// lexicographically smallest coordinates.
pub fn bottom_point(frame: &ConeFrame, m: &[f64], r: f64) -> Result<Vec<f64>> {
    let d = frame.dim();
    if m.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.len(),
        });
    }
    if !frame.cone_contains(m) {
        return Err(Error::domain("ball center must lie in the open cone"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }

    let free = {
        let mut p = m.to_vec();
        p[0] -= r;
        p
    };
    let in_closed_cone =
        |p: &[f64]| frame.rotate_inv(p).iter().all(|&c| c >= -1e-12 * (1.0 + r));
    let mut best: Option<Vec<f64>> = None;
    let mut consider = |cand: Vec<f64>| {
        if !in_closed_cone(&cand) {
            return;
        }
        match &best {
            None => best = Some(cand),
            Some(b) => {
                let scale = 1.0 + r;
                if cand[0] < b[0] - 1e-12 * scale {
                    best = Some(cand);
                } else if (cand[0] - b[0]).abs() <= 1e-12 * scale {
                    // lexicographic tie-break
                    if cand
                        .iter()
                        .zip(b.iter())
                        .find(|(a, c)| (*a - *c).abs() > 1e-12 * scale)
                        .map(|(a, c)| a < c)
                        .unwrap_or(false)
                    {
                        best = Some(cand);
                    }
                }
            }
        }
    };

    if in_closed_cone(&free) {
        consider(free);
    }

    // Faces of the cone: in orthant coordinates the face with index set S is
    // {y : y_i = 0 for i ∈ S}. Minimize x₁ = ⟨g, y⟩ (orthant coordinates)
    // over the ball slice of that subspace.
    let m_orth = frame.rotate_inv(m);
    // gradient of x₁ as a function of orthant coordinates: first row of the
    // rotation matrix, which is 𝟏/√d by construction.
    let g: Vec<f64> = vec![1.0 / (d as f64).sqrt(); d];
    for mask in 1u32..(1 << d) {
        let s: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() == d {
            // the vertex of the cone (the origin)
            let dist = norm2(&m_orth);
            if dist <= r * (1.0 + 1e-12) {
                consider(frame.rotate(&vec![0.0; d]));
            }
            continue;
        }
        // Projection of m onto the subspace {y_i = 0, i ∈ S} and the
        // projected gradient within it.
        let mut proj = m_orth.clone();
        let mut gp = g.clone();
        for &i in &s {
            proj[i] = 0.0;
            gp[i] = 0.0;
        }
        let dist2 = m_orth
            .iter()
            .zip(&proj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        if dist2 > r * r {
            continue;
        }
        let rho = (r * r - dist2).sqrt();
        let gn = norm2(&gp);
        let cand_orth = if gn > 1e-14 {
            axpy(&proj, -rho / gn, &gp)
        } else {
            proj
        };
        consider(frame.rotate(&cand_orth));
    }

    best.ok_or_else(|| Error::domain("ball does not meet the closed cone"))
}

/// Exit length of a ray from a point strictly inside a sphere: the unique
/// positive `t` with `|origin + t·direction - center| = radius`.
pub fn exit_length(center: &[f64], radius: f64, origin: &[f64], direction: &[f64]) -> Result<f64> {
    let w = sub(origin, center);
    let c = dot(&w, &w) - radius * radius;
    if c >= 0.0 {
        return Err(Error::domain("ray origin must be strictly inside the ball"));
    }
    let dn = normalize(direction);
    let b = dot(&w, &dn);
    let disc = b * b - c;
    Ok(-b + disc.sqrt())
}

/// Linear interpolation helper used by cross-section constructions.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Solve for barycentric coefficients of `p - vertex` in the given edge
/// basis; `None` if the basis is singular.
pub fn skew_coordinates(vertex: &[f64], edges: &[Vec<f64>], p: &[f64]) -> Option<Vec<f64>> {
    let k = edges.len();
    let rhs = sub(p, vertex);
    let mut m = vec![vec![0.0; k]; k];
    for (j, e) in edges.iter().enumerate() {
        for i in 0..k {
            m[i][j] = e[i];
        }
    }
    solve(&m, &rhs)
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn rotation_aligns_the_diagonal() {
        let f2 = ConeFrame::new(2).unwrap();
        let img = f2.rotate(&[1.0, 1.0]);
        assert_relative_eq!(img[0], std::f64::consts::SQRT_2, epsilon = 1e-14);
        assert_relative_eq!(img[1], 0.0, epsilon = 1e-14);

        let f3 = ConeFrame::new(3).unwrap();
        let s = 1.0 / 3.0f64.sqrt();
        let img = f3.rotate(&[s, s, s]);
        assert_relative_eq!(img[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(img[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(img[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn round_trips_and_isometry_on_random_points() {
        let mut rng = crate::rng::master(11);
        for d in 1..=4usize {
            let f = ConeFrame::new(d).unwrap();
            let mut prev: Option<Vec<f64>> = None;
            for _ in 0..250 {
                let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let q = f.rotate_inv(&f.rotate(&p));
                for i in 0..d {
                    assert!((q[i] - p[i]).abs() < 1e-12);
                }
                if let Some(pr) = &prev {
                    let before = norm2(&sub(&p, pr));
                    let after = norm2(&sub(&f.rotate(&p), &f.rotate(pr)));
                    assert!((before - after).abs() < 1e-12);
                }
                prev = Some(p);
            }
        }
    }

    #[test]
    fn two_dimensional_cone_is_the_wedge() {
        let f = ConeFrame::new(2).unwrap();
        assert!(f.cone_contains(&[2.0, 1.5]));
        assert!(!f.cone_contains(&[2.0, 2.5]));
        assert!(!f.cone_contains(&[2.0, -2.5]));
    }

    #[test]
    fn cross_section_sizes_match_the_regular_simplices() {
        let f3 = ConeFrame::new(3).unwrap();
        let v = f3.cross_section_vertices(2.0);
        let side = norm2(&sub(&v[0], &v[1]));
        assert_relative_eq!(side, 6.0f64.sqrt() * 2.0, epsilon = 1e-10);

        let f4 = ConeFrame::new(4).unwrap();
        let v = f4.cross_section_vertices(1.5);
        for i in 0..4 {
            for j in i + 1..4 {
                let side = norm2(&sub(&v[i], &v[j]));
                assert_relative_eq!(side, 8.0f64.sqrt() * 1.5, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bottom_point_free_and_constrained() {
        let f = ConeFrame::new(2).unwrap();
        // free minimum inside the cone
        let a = bottom_point(&f, &[4.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(a[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(a[1], 1.0, epsilon = 1e-12);
        // constrained minimum on the face x₂ = x₁ (root of 2u² - 7.6u + 6.24)
        let a = bottom_point(&f, &[2.0, 1.8], 1.0).unwrap();
        assert_relative_eq!(a[0], 1.2, epsilon = 1e-10);
        assert_relative_eq!(a[1], 1.2, epsilon = 1e-10);
    }

    #[test]
    fn constrained_bottom_point_lies_on_the_sphere() {
        let mut rng = crate::rng::master(23);
        for d in 2..=4usize {
            let f = ConeFrame::new(d).unwrap();
            let mut checked = 0;
            while checked < 40 {
                let y: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..6.0)).collect();
                let m = f.rotate(&y);
                let r = rng.gen_range(0.5..4.0);
                if norm2(&m) <= r + 1e-9 {
                    // the cone vertex is inside the ball and is then the
                    // minimizer, strictly inside the sphere
                    continue;
                }
                let a = bottom_point(&f, &m, r).unwrap();
                let free_inside = {
                    let mut p = m.clone();
                    p[0] -= r;
                    f.rotate_inv(&p).iter().all(|&c| c >= 0.0)
                };
                if free_inside {
                    continue;
                }
                let dist = norm2(&sub(&a, &m));
                assert!(
                    (dist - r).abs() < 1e-10 * (1.0 + r),
                    "constrained minimizer must sit on the sphere, residual {}",
                    (dist - r).abs()
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn exit_length_from_center_is_radius() {
        let t = exit_length(&[1.0, 2.0, 3.0], 2.5, &[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(t, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn exit_lengths_sum_to_chord() {
        let c = [0.0, 0.0];
        let o = [0.3, -0.4];
        let dir = [3.0, 4.0];
        let t1 = exit_length(&c, 2.0, &o, &dir).unwrap();
        let t2 = exit_length(&c, 2.0, &o, &[-3.0, -4.0]).unwrap();
        // chord length through o along ±dir
        let dn = normalize(&dir);
        let b = dot(&sub(&o, &c), &dn);
        let chord = 2.0 * (b * b - (dot(&sub(&o, &c), &sub(&o, &c)) - 4.0)).sqrt();
        assert_relative_eq!(t1 + t2, chord, epsilon = 1e-12);
    }
}
