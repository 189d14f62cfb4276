//! Volumes of half-space intersections in dimensions 1–3, exact up to
//! floating-point error, via vertex enumeration and facet triangulation.
//!
//! This backs the diamond slice measure: an `ℓ¹` ball cut by a level
//! hyperplane of `x₀ = Σ x_i` is a polytope in `d-1` variables once the last
//! coordinate is eliminated, so its volume is computed here rather than by
//! Monte Carlo inside deterministic quadrature.

use super::{dot, norm2, solve, sub};
use crate::error::{Error, Result};

/// Closed half-space `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        HalfSpace { normal, offset }
    }

    fn slack(&self, p: &[f64]) -> f64 {
        self.offset - dot(&self.normal, p)
    }
}

fn dedup_vertices(verts: &mut Vec<Vec<f64>>, tol: f64) {
    let mut out: Vec<Vec<f64>> = Vec::new();
    'next: for v in verts.drain(..) {
        for u in &out {
            if norm2(&sub(&v, u)) < tol {
                continue 'next;
            }
        }
        out.push(v);
    }
    *verts = out;
}

/// Enumerate the vertices of `∩ half-spaces` in dimension `k ∈ {1, 2, 3}`.
pub fn polytope_vertices(halves: &[HalfSpace], k: usize, scale: f64) -> Vec<Vec<f64>> {
    let tol = 1e-9 * (1.0 + scale);
    let n = halves.len();
    let mut verts = Vec::new();
    let mut idx = vec![0usize; k];
    // iterate over all k-subsets of constraints
    fn rec(
        halves: &[HalfSpace],
        k: usize,
        start: usize,
        depth: usize,
        idx: &mut Vec<usize>,
        verts: &mut Vec<Vec<f64>>,
        tol: f64,
    ) {
        if depth == k {
            let m: Vec<Vec<f64>> = idx.iter().map(|&i| halves[i].normal.clone()).collect();
            let rhs: Vec<f64> = idx.iter().map(|&i| halves[i].offset).collect();
            if let Some(p) = solve(&m, &rhs) {
                if halves.iter().all(|h| h.slack(&p) >= -tol) {
                    verts.push(p);
                }
            }
            return;
        }
        for i in start..halves.len() {
            idx[depth] = i;
            rec(halves, k, i + 1, depth + 1, idx, verts, tol);
        }
    }
    if n >= k {
        rec(halves, k, 0, 0, &mut idx, &mut verts, tol);
    }
    dedup_vertices(&mut verts, tol);
    verts
}

/// Volume of the intersection of half-spaces in dimension `k ∈ {1, 2, 3}`.
///
/// `scale` is a characteristic length used to set tolerances. An empty or
/// lower-dimensional intersection yields 0.
pub fn polytope_volume(halves: &[HalfSpace], k: usize, scale: f64) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::capability("polytope volume supports dimensions 1..=3"));
    }
    let verts = polytope_vertices(halves, k, scale);
    if verts.len() < k + 1 {
        return Ok(0.0);
    }
    match k {
        1 => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in &verts {
                lo = lo.min(v[0]);
                hi = hi.max(v[0]);
            }
            Ok((hi - lo).max(0.0))
        }
        2 => Ok(hull_area_2d(&verts)),
        3 => Ok(hull_volume_3d(&verts, halves, scale)),
        _ => unreachable!(),
    }
}

fn centroid(verts: &[Vec<f64>]) -> Vec<f64> {
    let k = verts[0].len();
    let mut c = vec![0.0; k];
    for v in verts {
        for i in 0..k {
            c[i] += v[i];
        }
    }
    for x in &mut c {
        *x /= verts.len() as f64;
    }
    c
}

fn hull_area_2d(verts: &[Vec<f64>]) -> f64 {
    let c = centroid(verts);
    let mut pts: Vec<(f64, &Vec<f64>)> = verts
        .iter()
        .map(|v| ((v[1] - c[1]).atan2(v[0] - c[0]), v))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = pts.len();
    let mut area = 0.0;
    for i in 0..n {
        let a = pts[i].1;
        let b = pts[(i + 1) % n].1;
        area += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * area.abs()
}

fn hull_volume_3d(verts: &[Vec<f64>], halves: &[HalfSpace], scale: f64) -> f64 {
    let tol = 1e-8 * (1.0 + scale);
    let c = centroid(verts);
    let mut volume = 0.0;
    for h in halves {
        // vertices on this facet
        let on: Vec<&Vec<f64>> = verts.iter().filter(|v| h.slack(v).abs() < tol).collect();
        if on.len() < 3 {
            continue;
        }
        // order the facet polygon around its centroid in the facet plane
        let fc = centroid(&on.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
        let n = super::normalize(&h.normal);
        // build an in-plane basis
        let mut u = if n[0].abs() < 0.9 {
            vec![1.0, 0.0, 0.0]
        } else {
            vec![0.0, 1.0, 0.0]
        };
        let proj = dot(&u, &n);
        for i in 0..3 {
            u[i] -= proj * n[i];
        }
        let u = super::normalize(&u);
        let w = vec![
            n[1] * u[2] - n[2] * u[1],
            n[2] * u[0] - n[0] * u[2],
            n[0] * u[1] - n[1] * u[0],
        ];
        let mut ordered: Vec<(f64, &Vec<f64>)> = on
            .iter()
            .map(|v| {
                let r = sub(v, &fc);
                (dot(&r, &w).atan2(dot(&r, &u)), *v)
            })
            .collect();
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // fan of tetrahedra (facet triangle, apex at the hull centroid)
        let m = ordered.len();
        for i in 0..m {
            let a = ordered[i].1;
            let b = ordered[(i + 1) % m].1;
            let ab = sub(b, a);
            let af = sub(&fc, a);
            let ac = sub(&c, a);
            let cross = [
                ab[1] * af[2] - ab[2] * af[1],
                ab[2] * af[0] - ab[0] * af[2],
                ab[0] * af[1] - ab[1] * af[0],
            ];
            volume += dot(&cross, &ac).abs() / 6.0;
        }
    }
    volume
}

/// `λ_t(D_t)`: the `(d-1)`-dimensional Lebesgue measure (in the hyperplane
/// `Π_t = {x₀ = t}`) of the slice `D(z, r) ∩ Π_t`, where `D(z, r)` is the
/// orthant-truncated diamond. Returns 0 when the slice is empty, in
/// particular for `t` outside `(|z|₁ - r, |z|₁ + r)`.
pub fn diamond_slice_measure(z: &[f64], r: f64, t: f64) -> Result<f64> {
    let d = z.len();
    if !(1..=super::MAX_DIM).contains(&d) {
        return Err(Error::domain("dimension must be in 1..=4"));
    }
    if z.iter().any(|&c| c <= 0.0) || !(r > 0.0) {
        return Err(Error::domain("need z in the open orthant and r > 0"));
    }
    let z0: f64 = z.iter().sum();
    if t <= z0 - r || t >= z0 + r || t <= 0.0 {
        return Ok(0.0);
    }
    if d == 1 {
        // the slice is the point {t}; its 0-dimensional measure is 1 when
        // t belongs to the (truncated) interval
        return Ok(if (t - z[0]).abs() < r && t > 0.0 { 1.0 } else { 0.0 });
    }
    let k = d - 1;
    // Eliminate x_d = t - Σ_{i<d} x_i and express everything in the first
    // d-1 coordinates.
    let mut halves: Vec<HalfSpace> = Vec::new();
    // positivity: x_i > 0 and x_d = t - Σ x_i > 0
    for i in 0..k {
        let mut n = vec![0.0; k];
        n[i] = -1.0;
        halves.push(HalfSpace::new(n, 0.0));
    }
    halves.push(HalfSpace::new(vec![1.0; k], t));
    // ℓ¹ ball: for every sign pattern ε, Σ ε_i (x_i - z_i) ≤ r
    for mask in 0u32..(1 << d) {
        let eps: Vec<f64> = (0..d)
            .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
            .collect();
        let mut n = vec![0.0; k];
        for i in 0..k {
            n[i] = eps[i] - eps[d - 1];
        }
        let off = r - eps[d - 1] * (t - z[d - 1])
            + (0..k).map(|i| eps[i] * z[i]).sum::<f64>();
        if n.iter().all(|&c| c == 0.0) {
            if off < 0.0 {
                return Ok(0.0);
            }
            continue;
        }
        halves.push(HalfSpace::new(n, off));
    }
    let vol = polytope_volume(&halves, k, z0 + r)?;
    // Lifting the projected polytope back to the hyperplane stretches
    // (d-1)-volume by √d (Gram determinant of the edge directions e_i - e_d).
    Ok(vol * (d as f64).sqrt())
}
