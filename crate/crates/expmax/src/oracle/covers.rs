//! Containment certificates for the covering parallelepipeds.
//!
//! Three families are certified here:
//!
//! * the diamond slice cover: each slice `D_t` of a diamond fits in a
//!   parallelepiped `P_t` with edges parallel to permutations of
//!   `(1, -1, 0, …)`, whose measure is controlled by the diamond's;
//! * the cone covers in dimensions 3 and 4: cross-sections `B_h ∩ C_h` of a
//!   truncated ball fit in parallelograms/parallelepipeds anchored near the
//!   contact point, with side lengths controlled by the exit roots;
//! * the box–simplex comparison `|E| ≃ |Ẽ|` behind those measure bounds.
//!
//! Certificates combine exact convex optimization (suprema of linear
//! functionals over ball ∩ half-spaces by active-set enumeration) with
//! rejection-sampling containment tests; any violation is recorded with the
//! offending point.

use super::{ContactCase, DiamondSliceConfig, OracleReport, TruncatedBallConfig};
use crate::error::{Error, Result};
use crate::geometry::polytope::HalfSpace;
use crate::geometry::{add, axpy, dot, norm2, normalize, scale, solve, sub};
use crate::measure::{mu_quadrature, MeasureEstimate};
use crate::rng::substream;
use rand::Rng;

// ---------------------------------------------------------------------------
// Exact linear optimization over a ball intersected with half-spaces
// ---------------------------------------------------------------------------

/// `max ⟨objective, x⟩` over `{|x - center| ≤ radius} ∩ {n_j·x ≤ b_j}` in
/// dimension 2 or 3, by enumerating active sets (sphere tangency, sphere ∩
/// plane slices, plane vertices). Returns `None` when no feasible candidate
/// exists (empty region up to tolerance).
pub fn max_linear_over_ball_polytope(
    objective: &[f64],
    center: &[f64],
    radius: f64,
    halves: &[HalfSpace],
) -> Option<f64> {
    let dim = center.len();
    debug_assert!((2..=3).contains(&dim));
    let tol = 1e-9 * (1.0 + radius + norm2(center));
    let feasible = |x: &[f64]| -> bool {
        norm2(&sub(x, center)) <= radius + tol
            && halves.iter().all(|h| dot(&h.normal, x) <= h.offset + tol)
    };
    let mut best: Option<f64> = None;
    let mut consider = |x: Vec<f64>| {
        if feasible(&x) {
            let v = dot(objective, &x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    };

    // sphere tangency
    let on = norm2(objective);
    if on > 0.0 {
        consider(axpy(center, radius / on, objective));
    }

    let n = halves.len();
    let mut subset = Vec::new();
    enumerate_subsets(n, dim, &mut subset, &mut |s: &[usize]| {
        let k = s.len();
        let rows: Vec<&HalfSpace> = s.iter().map(|&i| &halves[i]).collect();
        if k == dim {
            // plane vertex
            let m: Vec<Vec<f64>> = rows.iter().map(|h| h.normal.clone()).collect();
            let rhs: Vec<f64> = rows.iter().map(|h| h.offset).collect();
            if let Some(x) = solve(&m, &rhs) {
                consider(x);
            }
            return;
        }
        // affine subspace A = {N x = b}: the slice of the ball is a ball
        // around the projection of the center
        let mut gram = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                gram[i][j] = dot(&rows[i].normal, &rows[j].normal);
            }
        }
        let resid: Vec<f64> = rows
            .iter()
            .map(|h| h.offset - dot(&h.normal, center))
            .collect();
        let Some(coef) = solve(&gram, &resid) else {
            return;
        };
        let mut proj = center.to_vec();
        for i in 0..k {
            proj = axpy(&proj, coef[i], &rows[i].normal);
        }
        let dist2 = norm2(&sub(&proj, center)).powi(2);
        if dist2 > radius * radius + tol {
            return;
        }
        let rho = (radius * radius - dist2).max(0.0).sqrt();
        // project the objective onto the subspace directions
        let cdot: Vec<f64> = rows.iter().map(|h| dot(&h.normal, objective)).collect();
        let Some(ccoef) = solve(&gram, &cdot) else {
            return;
        };
        let mut cw = objective.to_vec();
        for i in 0..k {
            cw = axpy(&cw, -ccoef[i], &rows[i].normal);
        }
        let cn = norm2(&cw);
        if cn > 1e-13 {
            consider(axpy(&proj, rho / cn, &cw));
        }
        consider(proj);
    });
    best
}

fn enumerate_subsets(n: usize, max_k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(
        n: usize,
        max_k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max_k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, max_k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(n, max_k, 0, cur, f);
}

/// Half-space representation of a simplex given by its vertices in
/// dimension 2 (triangle) or 3 (tetrahedron).
pub fn simplex_halfspaces(verts: &[Vec<f64>]) -> Vec<HalfSpace> {
    let dim = verts[0].len();
    debug_assert_eq!(verts.len(), dim + 1);
    let mut out = Vec::with_capacity(verts.len());
    for k in 0..verts.len() {
        let others: Vec<&Vec<f64>> = verts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, v)| v)
            .collect();
        let mut normal = match dim {
            2 => {
                let e = sub(others[1], others[0]);
                vec![-e[1], e[0]]
            }
            3 => {
                let u = sub(others[1], others[0]);
                let v = sub(others[2], others[0]);
                cross3(&u, &v)
            }
            _ => unreachable!(),
        };
        let mut offset = dot(&normal, others[0]);
        // orient so the excluded vertex is inside
        if dot(&normal, &verts[k]) > offset {
            normal = scale(&normal, -1.0);
            offset = -offset;
        }
        let nn = norm2(&normal);
        out.push(HalfSpace::new(scale(&normal, 1.0 / nn), offset / nn));
    }
    out
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rodrigues rotation of `v` about the unit `axis` by `angle`.
fn rotate3(v: &[f64], axis: &[f64], angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let cr = cross3(axis, v);
    let d = dot(axis, v);
    (0..3)
        .map(|i| v[i] * c + cr[i] * s + axis[i] * d * (1.0 - c))
        .collect()
}

// ---------------------------------------------------------------------------
// Box–simplex comparison (the measure engine of the slice bounds)
// ---------------------------------------------------------------------------

/// `|{y ∈ ∏(0, a_i) : Σ y_i < r}|` by inclusion–exclusion over the box
/// corners: `(1/m!)·Σ_S (-1)^{|S|} (r - Σ_{i∈S} a_i)₊^m`.
pub fn box_simplex_volume(a: &[f64], r: f64) -> f64 {
    let m = a.len();
    let mut vol = 0.0;
    for mask in 0u32..(1 << m) {
        let mut sum = r;
        let mut sign = 1.0;
        for (i, &ai) in a.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum -= ai;
                sign = -sign;
            }
        }
        if sum > 0.0 {
            vol += sign * sum.powi(m as i32);
        }
    }
    vol / (1..=m).product::<usize>() as f64
}

/// Certify the box–simplex comparison on one instance: the clipped set `E`
/// sits inside the rectangle `Ẽ = ∏(0, a_i ∧ r)` and holds at least
/// `m^{-m}` of its volume (witnessed by the inscribed box
/// `∏(0, (a_i ∧ r)/m)`). `|E|` is exact (inclusion–exclusion) for `m = 2`
/// and Monte Carlo for `m = 3`.
pub fn rectangle_lemma_check(a: &[f64], r: f64, samples: u64, seed: u64) -> Result<OracleReport> {
    let m = a.len();
    if !(2..=3).contains(&m) {
        return Err(Error::domain("the comparison is certified for m ∈ {2, 3}"));
    }
    if a.iter().any(|&x| !(x > 0.0)) || !(r > 0.0) {
        return Err(Error::domain("need positive side lengths and level"));
    }
    let mut report = OracleReport::new(
        "rectangle-lemma",
        serde_json::json!({"a": a, "r": r, "m": m}),
    );
    let tilde: Vec<f64> = a.iter().map(|&x| x.min(r)).collect();
    let vol_tilde: f64 = tilde.iter().product();
    let exact = box_simplex_volume(a, r);

    let mut rng = substream(seed, 0x7EC7);
    let mut hits = 0u64;
    for _ in 0..samples {
        let y: Vec<f64> = a.iter().map(|&ai| rng.gen_range(0.0..ai)).collect();
        if y.iter().sum::<f64>() < r {
            hits += 1;
            // E ⊆ Ẽ
            if y.iter().zip(&tilde).any(|(&yi, &ti)| yi >= ti + 1e-12) {
                report.record_violation(format!("point of E outside Ẽ: {y:?}"));
            }
        }
        report.samples += 1;
    }
    let vol_e = if m == 2 {
        exact
    } else {
        let box_vol: f64 = a.iter().product();
        box_vol * hits as f64 / samples as f64
    };
    // three-sigma slack for the Monte Carlo route
    let slack = if m == 2 {
        0.0
    } else {
        let p = hits as f64 / samples as f64;
        3.0 * (p * (1.0 - p) / samples as f64).sqrt() * a.iter().product::<f64>()
    };
    // the Monte Carlo value must agree with the corner-sum closed form
    report.record_residual(if m == 2 {
        0.0
    } else {
        ((vol_e - exact).abs() - slack).max(0.0) / vol_tilde
    });
    let lower = vol_tilde / (m as f64).powi(m as i32);
    if vol_e + slack < lower {
        report.record_violation(format!("|E| = {vol_e} below m^-m·|Ẽ| = {lower}"));
    }
    report.record_ratio(vol_e / vol_tilde);
    // the inscribed box ∏(0, (a_i∧r)/m) satisfies the level constraint
    let corner_sum: f64 = tilde.iter().map(|&t| t / m as f64).sum();
    if corner_sum > r + 1e-12 {
        report.record_violation("inscribed box escapes the level constraint".into());
    }
    // constraint inactive ⇒ E = Ẽ
    if r >= a.iter().sum::<f64>() && (vol_e - vol_tilde).abs() > 1e-9 * vol_tilde + slack {
        report.record_violation(format!(
            "inactive constraint but |E| = {vol_e} ≠ |Ẽ| = {vol_tilde}"
        ));
    }
    report.finalize(1e-9);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Diamond slice cover
// ---------------------------------------------------------------------------

/// The slice parallelepiped `P_t`: a box in the first `d-1` coordinates,
/// lifted to the level plane `x₀ = t` (so its edges are parallel to the
/// difference vectors `e_i - e_d`, i.e. permutations of `(1, -1, 0, …)`).
#[derive(Debug, Clone)]
pub struct SliceCover {
    pub level: f64,
    pub intervals: Vec<(f64, f64)>,
    /// True when the complementary route (level-sum elimination) was used
    /// because `Σ_{i<d} z_i < r - h`.
    pub used_alternative: bool,
}

impl SliceCover {
    pub fn contains_projected(&self, x: &[f64], tol: f64) -> bool {
        self.intervals
            .iter()
            .zip(x)
            .all(|(&(lo, hi), &xi)| xi >= lo - tol && xi <= hi + tol)
    }

    /// `λ_t(P_t) = √d · ∏ widths` (the lift stretches volume by √d).
    pub fn measure(&self) -> f64 {
        let d = self.intervals.len() + 1;
        (d as f64).sqrt()
            * self
                .intervals
                .iter()
                .map(|&(lo, hi)| (hi - lo).max(0.0))
                .product::<f64>()
    }

    /// Edge vectors in `ℝ^d` (all parallel to permutations of
    /// `(1, -1, 0, …, 0)`).
    pub fn edges(&self) -> Vec<Vec<f64>> {
        let d = self.intervals.len() + 1;
        self.intervals
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| {
                let mut e = vec![0.0; d];
                e[i] = hi - lo;
                e[d - 1] = -(hi - lo);
                e
            })
            .collect()
    }
}

/// Build the slice cover at level `t ∈ (b, b + 2r)` following the two
/// coordinate eliminations: the default route bounds `z_i - x_i`, the
/// alternative bounds `x_i` directly and applies when `Σ_{i<d} z_i < r - h`.
pub fn build_slice_cover(cfg: &DiamondSliceConfig, t: f64) -> Result<SliceCover> {
    let d = cfg.dim;
    let b = cfg.bottom_level();
    let r = cfg.r;
    if !(t > b && t < b + 2.0 * r) {
        return Err(Error::domain("slice level outside (b, b + 2r)"));
    }
    let h = t - b;
    let delta = (t - cfg.xi_level()).abs();
    let sum_small: f64 = cfg.z[..d - 1].iter().sum();
    let additional_holds = sum_small >= r - h;
    let a_i: Vec<f64> = cfg.z[..d - 1]
        .iter()
        .map(|&zi| zi + (h + 3.0 * delta) / 2.0)
        .collect();
    let intervals = if additional_holds {
        // y_i = z_i - x_i + (h + Δ)/2 ∈ (0, a_i ∧ R̃),
        // Σ_{i<d} y_i < R̃ = r - h + d(h + Δ)/2
        let cap = r - h + d as f64 * (h + delta) / 2.0;
        cfg.z[..d - 1]
            .iter()
            .zip(&a_i)
            .map(|(&zi, &ai)| {
                let hi = zi + (h + delta) / 2.0;
                (hi - ai.min(cap), hi)
            })
            .collect()
    } else {
        // y_i = x_i + Δ ∈ (0, a_i ∧ R̃₂), R̃₂ = z₀ - r + h + dΔ
        let z0: f64 = cfg.z.iter().sum();
        let cap = z0 - r + h + d as f64 * delta;
        a_i.iter().map(|&ai| (-delta, ai.min(cap) - delta)).collect()
    };
    Ok(SliceCover {
        level: t,
        intervals,
        used_alternative: !additional_holds,
    })
}

/// Certify one slice: `D_t ⊂ P_t` and `ξ_t ∈ P_t` by rejection sampling,
/// plus the measure bound
/// `λ_t(P_t) ≤ C·[1 + (t-b) ∨ (ξ₀-b)]^{d-1}·e^b·μ(D)` with the constant
/// recorded as an envelope ratio. `mu_log` is `log μ(D)`, computed once per
/// configuration by the caller.
pub fn slice_cover_check(
    cfg: &DiamondSliceConfig,
    t: f64,
    samples: u64,
    seed: u64,
    mu_log: f64,
) -> Result<OracleReport> {
    let d = cfg.dim;
    let cover = build_slice_cover(cfg, t)?;
    let mut report = OracleReport::new(
        "slice-cover",
        serde_json::json!({
            "config": cfg.summary(),
            "t": t,
            "alternative": cover.used_alternative,
        }),
    );
    let scale_len = cfg.z.iter().sum::<f64>() + cfg.r;
    let tol = 1e-9 * scale_len;

    // ξ projected to the level plane stays inside the cover
    let shift = (t - cfg.xi_level()) / d as f64;
    let xi_t: Vec<f64> = cfg.xi.iter().map(|&c| c + shift).collect();
    if !cover.contains_projected(&xi_t[..d - 1], tol) {
        report.record_violation(format!("projected ξ escaped the cover at t = {t}"));
    }

    // rejection-sample the slice D_t = D ∩ {x₀ = t}
    let mut rng = substream(seed, 0x51CE);
    let lo: Vec<f64> = cfg.z[..d - 1]
        .iter()
        .map(|&z| (z - cfg.r).max(0.0))
        .collect();
    let hi: Vec<f64> = cfg.z[..d - 1].iter().map(|&z| z + cfg.r).collect();
    for _ in 0..samples {
        let x: Vec<f64> = (0..d - 1).map(|i| rng.gen_range(lo[i]..hi[i])).collect();
        let xd = t - x.iter().sum::<f64>();
        if xd <= 0.0 {
            continue;
        }
        let mut full = x.clone();
        full.push(xd);
        let dist: f64 = full.iter().zip(&cfg.z).map(|(&a, &b)| (a - b).abs()).sum();
        if dist >= cfg.r {
            continue;
        }
        report.samples += 1;
        if !cover.contains_projected(&x, tol) {
            report.record_violation(format!("slice point escaped the cover: {full:?}"));
        }
    }

    // measure bound with recorded constant
    let b = cfg.bottom_level();
    let envelope_log =
        (d as f64 - 1.0) * (1.0 + (t - b).max(cfg.xi_level() - b)).ln() + b + mu_log;
    report.record_ratio((cover.measure().ln() - envelope_log).exp());
    report.finalize_one_sided(1e-9);
    Ok(report)
}

/// The two-branch lower bound for the diamond's measure:
/// `μ(D) ≳ e^{-b} · ∏_{i<d} (z_i + 1) ∧ r` when `Σ_{i<d} z_i ≥ r - h` for a
/// representative `h ∈ (1, 2)` (upper branch), `∧ (z₀ - r)` otherwise.
/// Returns the ratio of `μ(D)` to the branch value.
pub fn diamond_lower_bound_ratio(cfg: &DiamondSliceConfig) -> Result<f64> {
    let d = cfg.dim;
    let mu_log = diamond_measure_log(cfg)?.log_value;
    let b = cfg.bottom_level();
    let z0: f64 = cfg.z.iter().sum();
    let sum_small: f64 = cfg.z[..d - 1].iter().sum();
    // branch chosen at the representative depth h = 3/2
    let cap = if sum_small >= cfg.r - 1.5 {
        cfg.r
    } else {
        z0 - cfg.r
    };
    let bound_log = -b
        + cfg.z[..d - 1]
            .iter()
            .map(|&z| (z + 1.0).min(cap).ln())
            .sum::<f64>();
    Ok((mu_log - bound_log).exp())
}

/// `log μ(D(z, r))` for a slice configuration, by quadrature.
pub fn diamond_measure_log(cfg: &DiamondSliceConfig) -> Result<MeasureEstimate> {
    let ball = crate::geometry::Ball::new(
        crate::geometry::NormKind::L1,
        crate::geometry::OrthantPoint::new(cfg.z.clone())?,
        cfg.r,
    )?;
    mu_quadrature(&ball, 1e-8)
}

// ---------------------------------------------------------------------------
// Cone covers (dimensions 3 and 4)
// ---------------------------------------------------------------------------

/// One covering piece: a skewed coordinate system whose region (cone from
/// the moving contact point, or a translated/rotated doubled section copy)
/// carries a running interval hull per direction.
struct CoverPiece {
    /// Unit directions in the section plane; the skew coordinates of `x`
    /// solve `dirs·u = x - a'` with the fixed origin `a'`.
    dirs: Vec<Vec<f64>>,
    /// Edge vectors at `h = 0` for bounded (tetrahedron) pieces; empty for
    /// cone pieces.
    base_edges: Vec<Vec<f64>>,
    /// Running interval hull per direction.
    intervals: Vec<(f64, f64)>,
    /// `sin β` per direction (clamped at 0) for the exit-root envelopes.
    sin_betas: Vec<f64>,
}

impl CoverPiece {
    fn new(cfg: &TruncatedBallConfig, dirs: Vec<Vec<f64>>, base_edges: Vec<Vec<f64>>) -> Self {
        let sin_betas = dirs.iter().map(|e| cfg.sin_beta(e).max(0.0)).collect();
        let k = dirs.len();
        CoverPiece {
            dirs,
            base_edges,
            intervals: vec![(f64::INFINITY, f64::NEG_INFINITY); k],
            sin_betas,
        }
    }

    fn skew_coords(&self, origin: &[f64], x: &[f64]) -> Option<Vec<f64>> {
        let k = self.dirs.len();
        let rhs = sub(x, origin);
        let mut m = vec![vec![0.0; k]; k];
        for (j, e) in self.dirs.iter().enumerate() {
            for i in 0..k {
                m[i][j] = e[i];
            }
        }
        solve(&m, &rhs)
    }

    /// Region membership at parameter `h`: cone pieces require nonnegative
    /// skew coordinates from the moving anchor; tetra pieces additionally
    /// cap the barycentric sum at 1 with scaled edges.
    fn region_contains(&self, cfg: &TruncatedBallConfig, h: f64, x: &[f64], tol: f64) -> bool {
        let anchor = cfg.a_prime_h(h);
        if self.base_edges.is_empty() {
            match self.skew_coords(&anchor, x) {
                Some(u) => u.iter().all(|&c| c >= -tol),
                None => false,
            }
        } else {
            let s = 1.0 + h / cfg.a1();
            let k = self.base_edges.len();
            let rhs = sub(x, &anchor);
            let mut m = vec![vec![0.0; k]; k];
            for (j, e) in self.base_edges.iter().enumerate() {
                for i in 0..k {
                    m[i][j] = e[i] * s;
                }
            }
            match solve(&m, &rhs) {
                Some(lam) => {
                    lam.iter().all(|&c| c >= -tol) && lam.iter().sum::<f64>() <= 1.0 + tol
                }
                None => false,
            }
        }
    }

    /// Half-space representation of the region at `h`.
    fn region_halfspaces(&self, cfg: &TruncatedBallConfig, h: f64) -> Vec<HalfSpace> {
        let anchor = cfg.a_prime_h(h);
        if self.base_edges.is_empty() {
            // u_i(x) ≥ 0 ⇔ -g_i·x ≤ -g_i·anchor with g = dual basis
            let k = self.dirs.len();
            (0..k)
                .filter_map(|i| {
                    let mut ei = vec![0.0; k];
                    ei[i] = 1.0;
                    // g_i solves dirs_j · g = δ_ij: rows are the directions
                    let rows: Vec<Vec<f64>> = self.dirs.clone();
                    solve(&rows, &ei)
                        .map(|g| HalfSpace::new(scale(&g, -1.0), -dot(&g, &anchor)))
                })
                .collect()
        } else {
            let s = 1.0 + h / cfg.a1();
            let mut verts = vec![anchor.clone()];
            for e in &self.base_edges {
                verts.push(add(&anchor, &scale(e, s)));
            }
            simplex_halfspaces(&verts)
        }
    }
}

fn face_vertices_of_contact(cfg: &TruncatedBallConfig) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    // barycentric coordinates of a' over the section simplex
    let verts = cfg.section_vertices(0.0);
    let d = cfg.dim;
    let a = cfg.a_prime();
    let mut m = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    for i in 0..d - 1 {
        for (k, v) in verts.iter().enumerate() {
            m[i][k] = v[i];
        }
        rhs[i] = a[i];
    }
    for k in 0..d {
        m[d - 1][k] = 1.0;
    }
    rhs[d - 1] = 1.0;
    let lam = solve(&m, &rhs)
        .ok_or_else(|| Error::Classification("degenerate section simplex".into()))?;
    let on: Vec<usize> = (0..d).filter(|&k| lam[k] > 1e-7).collect();
    Ok((on, verts))
}

/// Build the covering pieces for a configuration.
fn build_pieces(cfg: &TruncatedBallConfig) -> Result<Vec<CoverPiece>> {
    match (cfg.dim, cfg.case) {
        (3, ContactCase::Vertex) => {
            let dirs = cfg.vertex_edge_dirs()?;
            Ok(vec![CoverPiece::new(cfg, dirs, vec![])])
        }
        (3, ContactCase::Face) => {
            // split the half-plane above the side into three π/3 sectors
            let (on, verts) = face_vertices_of_contact(cfg)?;
            if on.len() != 2 {
                return Err(Error::Classification(
                    "expected a side-interior contact point".into(),
                ));
            }
            let a = cfg.a_prime();
            let s_plus = normalize(&sub(&verts[on[0]], &a));
            let s_minus = normalize(&sub(&verts[on[1]], &a));
            let n_in = cfg.outward_normal(); // the section lies on this side
            let rot = |th: f64| -> Vec<f64> {
                normalize(&add(&scale(&s_plus, th.cos()), &scale(&n_in, th.sin())))
            };
            let r1 = rot(std::f64::consts::FRAC_PI_3);
            let r2 = rot(2.0 * std::f64::consts::FRAC_PI_3);
            Ok(vec![
                CoverPiece::new(cfg, vec![s_plus.clone(), r1.clone()], vec![]),
                CoverPiece::new(cfg, vec![r1, r2.clone()], vec![]),
                CoverPiece::new(cfg, vec![r2, s_minus], vec![]),
            ])
        }
        (4, ContactCase::Vertex) => {
            let dirs = cfg.vertex_edge_dirs()?;
            Ok(vec![CoverPiece::new(cfg, dirs, vec![])])
        }
        (4, ContactCase::Face) => {
            let (on, verts) = face_vertices_of_contact(cfg)?;
            if on.len() != 3 {
                return Err(Error::Classification(
                    "expected a facet-interior contact point".into(),
                ));
            }
            // canonical translate: the section copy with one facet vertex
            // moved to a'
            let v0 = &verts[on[0]];
            let edges0: Vec<Vec<f64>> = (0..4)
                .filter(|k| *k != on[0])
                .map(|k| sub(&verts[k], v0))
                .collect();
            let n_t = cfg.outward_normal();
            let mut pieces = Vec::new();
            let mut push_rotated = |edges: &[Vec<f64>]| {
                let doubled: Vec<Vec<f64>> = edges.iter().map(|e| scale(e, 2.0)).collect();
                let dirs: Vec<Vec<f64>> = edges.iter().map(|e| normalize(e)).collect();
                pieces.push(CoverPiece::new(cfg, dirs, doubled));
            };
            // Directional coverage: every copy covers the spherical cap of
            // radius arcsin(1/3) ≈ 19.47° around its own axis (the inscribed
            // cap of the vertex cone), and the in-plane ring additionally
            // covers the band down to the tangent plane through its two
            // in-plane edges. Rings at axis elevations ≈ 19.5°, 36°, 62°
            // plus a zenith copy tile the hemisphere with overlap; pieces
            // with axis elevation above the edge half-angle ≈ 35.3° stay in
            // the closed tangent half-space for any roll.
            for k in 0..12 {
                let th = k as f64 * std::f64::consts::PI / 6.0;
                let rot: Vec<Vec<f64>> = edges0.iter().map(|e| rotate3(e, &n_t, th)).collect();
                push_rotated(&rot);
            }
            let axis0 = normalize(&edges0.iter().fold(vec![0.0; 3], |acc, e| add(&acc, e)));
            let horiz = normalize(&axpy(&axis0, -dot(&axis0, &n_t), &n_t));
            let side = normalize(&cross3(&n_t, &horiz));
            let aim = |azimuth: f64, elevation: f64| -> Vec<Vec<f64>> {
                let (se, ce) = elevation.sin_cos();
                let (sa, ca) = azimuth.sin_cos();
                let target: Vec<f64> = (0..3)
                    .map(|i| ce * (ca * horiz[i] + sa * side[i]) + se * n_t[i])
                    .collect();
                let cr = cross3(&axis0, &target);
                let cn = norm2(&cr);
                if cn < 1e-12 {
                    return edges0.clone();
                }
                let axis = scale(&cr, 1.0 / cn);
                let ang = dot(&axis0, &target).clamp(-1.0, 1.0).acos();
                edges0.iter().map(|e| rotate3(e, &axis, ang)).collect()
            };
            for k in 0..12 {
                let az = k as f64 * std::f64::consts::PI / 6.0;
                push_rotated(&aim(az, 36.0f64.to_radians()));
            }
            for k in 0..8 {
                let az = k as f64 * std::f64::consts::FRAC_PI_4;
                push_rotated(&aim(az, 62.0f64.to_radians()));
            }
            push_rotated(&aim(0.0, std::f64::consts::FRAC_PI_2));
            Ok(pieces)
        }
        (4, ContactCase::Edge) => {
            let (on, verts) = face_vertices_of_contact(cfg)?;
            if on.len() != 2 {
                return Err(Error::Classification(
                    "expected an edge-interior contact point".into(),
                ));
            }
            let mut pieces = Vec::new();
            let mut push = |edges: &[Vec<f64>]| {
                let doubled: Vec<Vec<f64>> = edges.iter().map(|e| scale(e, 2.0)).collect();
                let dirs: Vec<Vec<f64>> = edges.iter().map(|e| normalize(e)).collect();
                pieces.push(CoverPiece::new(cfg, dirs, doubled));
            };
            let edges_at = |anchor_idx: usize| -> Vec<Vec<f64>> {
                (0..4)
                    .filter(|k| *k != anchor_idx)
                    .map(|k| sub(&verts[k], &verts[anchor_idx]))
                    .collect()
            };
            let e1 = edges_at(on[0]);
            let e2 = edges_at(on[1]);
            // facet planes through the edge: exclude the two remaining
            // vertices in turn
            let others: Vec<usize> = (0..4).filter(|k| !on.contains(k)).collect();
            let plane_normal = |excluded: usize| -> Vec<f64> {
                let tri: Vec<&Vec<f64>> = (0..4)
                    .filter(|k| *k != excluded)
                    .map(|k| &verts[k])
                    .collect();
                let u = sub(tri[1], tri[0]);
                let v = sub(tri[2], tri[0]);
                normalize(&cross3(&u, &v))
            };
            let n1 = plane_normal(others[0]);
            let n2 = plane_normal(others[1]);
            // rotations of the two translates about the facet normals sweep
            // the dihedral wedge between the facet planes; fine steps in
            // both senses keep overlapping caps all the way round
            let steps = 12;
            for k in 0..=steps {
                let th = k as f64 * (2.0 * std::f64::consts::FRAC_PI_3) / steps as f64;
                for sign in [1.0, -1.0] {
                    let rot1: Vec<Vec<f64>> =
                        e1.iter().map(|e| rotate3(e, &n1, sign * th)).collect();
                    push(&rot1);
                    let rot2: Vec<Vec<f64>> =
                        e2.iter().map(|e| rotate3(e, &n2, sign * th)).collect();
                    push(&rot2);
                }
            }
            Ok(pieces)
        }
        _ => Err(Error::Classification(format!(
            "no cover construction for d = {} case {:?}",
            cfg.dim, cfg.case
        ))),
    }
}

/// Uniform sample of the section ball `B_h` (a disc for d = 3).
fn sample_section_ball(rng: &mut impl Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let k = center.len();
    match k {
        2 => {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
            vec![center[0] + r * th.cos(), center[1] + r * th.sin()]
        }
        3 => loop {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm2(&v);
            if n <= 1.0 && n > 1e-12 {
                return add(center, &scale(&v, radius));
            }
        },
        _ => unreachable!(),
    }
}

/// Certify the cone cover of one configuration over a geometric `h` ladder:
/// containment of `B_h ∩ C_h` in the union of the piece boxes, monotonicity
/// of the per-piece boxes, side lengths against the `(a₁+h) ∧ p_h`
/// envelopes, and — in the d = 4 vertex case with `h < c₀R` — the explicit
/// side-root parallelepiped with its half-space ceiling.
pub fn cone_cover_check(
    cfg: &TruncatedBallConfig,
    ladder_steps: usize,
    samples_total: u64,
    seed: u64,
    c0: f64,
) -> Result<OracleReport> {
    if !(3..=4).contains(&cfg.dim) {
        return Err(Error::capability("cone covers are certified for d ∈ {3, 4}"));
    }
    if ladder_steps < 2 {
        return Err(Error::domain("need at least a 2-step ladder"));
    }
    let mut report = OracleReport::new(
        &format!("cone-cover-{}d", cfg.dim),
        serde_json::json!({"config": cfg.summary(), "c0": c0}),
    );
    let mut pieces = build_pieces(cfg)?;
    report.notes.push(format!("cover pieces: {}", pieces.len()));

    let r = cfg.radius;
    let a1 = cfg.a1();
    let h_top = match cfg.dim {
        3 => cfg.h_max() * 0.999,
        _ => r / 2.0,
    };
    // geometric ladder, plus extra points inside the h < c₀R branch
    let mut ladder: Vec<f64> = (0..ladder_steps)
        .map(|k| h_top * (1.0 / 400.0) * 400.0f64.powf(k as f64 / (ladder_steps - 1) as f64))
        .collect();
    if cfg.dim == 4 {
        let cap = c0 * cfg.big_r();
        if cap > 1e-9 {
            for k in 1..=5 {
                ladder.push(cap * k as f64 / 6.0);
            }
        }
    }
    ladder.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let per_h = (samples_total / ladder.len() as u64).max(64);

    let m_prime = cfg.m_prime();
    let a_fixed = cfg.a_prime();
    let tol_len = 1e-7 * (1.0 + r + a1);
    let mut rng = substream(seed, 0xC01E);
    let mut prev_intervals: Option<Vec<Vec<(f64, f64)>>> = None;
    let mut prev_side_parallelepiped: Option<(f64, Vec<f64>)> = None;

    for &h in &ladder {
        let r_h = cfg.r_h(h);
        if r_h <= 0.0 {
            continue;
        }
        let section = simplex_halfspaces(&cfg.section_vertices(h));
        // 1. update the interval hulls from exact extents
        for piece in pieces.iter_mut() {
            let mut halves = piece.region_halfspaces(cfg, h);
            halves.extend(section.iter().cloned());
            let k = piece.dirs.len();
            for i in 0..k {
                let mut ei = vec![0.0; k];
                ei[i] = 1.0;
                let Some(g) = solve(&piece.dirs, &ei) else { continue };
                let base = dot(&g, &a_fixed);
                if let Some(hi) = max_linear_over_ball_polytope(&g, &m_prime, r_h, &halves) {
                    piece.intervals[i].1 = piece.intervals[i].1.max(hi - base);
                }
                if let Some(lo_neg) =
                    max_linear_over_ball_polytope(&scale(&g, -1.0), &m_prime, r_h, &halves)
                {
                    piece.intervals[i].0 = piece.intervals[i].0.min(-lo_neg - base);
                }
            }
        }

        // 2. monotonicity of the hulls (interval nesting)
        if let Some(prev) = &prev_intervals {
            for (pi, piece) in pieces.iter().enumerate() {
                for (i, &(lo, hi)) in piece.intervals.iter().enumerate() {
                    let (plo, phi) = prev[pi][i];
                    if plo < lo - tol_len || phi > hi + tol_len {
                        report.record_violation(format!(
                            "interval hull shrank at h = {h}: [{plo}, {phi}] vs [{lo}, {hi}]"
                        ));
                    }
                }
            }
        }
        prev_intervals = Some(pieces.iter().map(|p| p.intervals.clone()).collect());

        // 3. side-length envelopes
        for piece in &pieces {
            for (i, &(lo, hi)) in piece.intervals.iter().enumerate() {
                if hi <= lo {
                    continue;
                }
                let side = hi - lo;
                let env = if cfg.dim == 3 && h > r / 3.0 {
                    r
                } else {
                    let exit = super::roots::section_exit_envelope(cfg, piece.sin_betas[i], h);
                    (a1 + h).min(exit)
                };
                report.record_ratio(side / env);
            }
        }

        // 4. sampled containment in the union of the piece boxes
        let mut hits = 0u64;
        let mut proposals = 0u64;
        while hits < per_h && proposals < per_h * 40 {
            proposals += 1;
            let x = sample_section_ball(&mut rng, &m_prime, r_h);
            if !section.iter().all(|hsp| dot(&hsp.normal, &x) <= hsp.offset) {
                continue;
            }
            hits += 1;
            report.samples += 1;
            let mut in_region = false;
            let mut boxed = false;
            for piece in &pieces {
                if piece.region_contains(cfg, h, &x, 1e-9 * (1.0 + a1 + r)) {
                    in_region = true;
                    if let Some(u) = piece.skew_coords(&a_fixed, &x) {
                        if u
                            .iter()
                            .zip(&piece.intervals)
                            .all(|(&c, &(lo, hi))| c >= lo - tol_len && c <= hi + tol_len)
                        {
                            boxed = true;
                            break;
                        }
                    }
                }
            }
            if !in_region {
                report.record_violation(format!("cover gap at h = {h}: {x:?}"));
            } else if !boxed {
                report.record_violation(format!("piece box missed a point at h = {h}"));
            }
            // the half-space ceiling is trivial: τ over B_h ∩ C_h never
            // exceeds the ball supremum R_h
            let t = cfg.tau(&x);
            if t > r_h + 1e-9 * (1.0 + r) {
                report.record_violation(format!("τ exceeded sup over B_h: {t} > {r_h}"));
            }
        }

        // 5. the explicit side-root parallelepiped in the d = 4 vertex case
        if cfg.dim == 4 && cfg.case == ContactCase::Vertex && h < c0 * cfg.big_r() {
            let anchor = cfg.a_prime_h(h);
            let dirs = cfg.vertex_edge_dirs()?;
            let mut vlens = Vec::with_capacity(3);
            for e in &dirs {
                let sr = super::roots::side_root(cfg, e, h)?;
                vlens.push(sr.v_len);
            }
            let coords_of = |x: &[f64], origin: &[f64]| -> Option<Vec<f64>> {
                let k = 3;
                let mut m = vec![vec![0.0; k]; k];
                for (j, e) in dirs.iter().enumerate() {
                    for i in 0..k {
                        m[i][j] = e[i];
                    }
                }
                solve(&m, &sub(x, origin))
            };
            for _ in 0..64 {
                let x = sample_section_ball(&mut rng, &m_prime, r_h);
                if !section.iter().all(|hsp| dot(&hsp.normal, &x) <= hsp.offset) {
                    continue;
                }
                report.samples += 1;
                if let Some(alpha) = coords_of(&x, &anchor) {
                    let ok = alpha
                        .iter()
                        .zip(&vlens)
                        .all(|(&al, &vl)| al >= -1e-7 && al <= vl + 1e-7 * (1.0 + r));
                    if !ok {
                        report.record_violation(format!(
                            "side-root parallelepiped missed a point at h = {h}"
                        ));
                    }
                }
            }
            // monotonicity by vertex algebra: the previous parallelepiped's
            // corners fit inside the current one
            if let Some((h_prev, prev_v)) = &prev_side_parallelepiped {
                let prev_anchor = cfg.a_prime_h(*h_prev);
                for mask in 0u32..8 {
                    let mut corner = prev_anchor.clone();
                    for (i, e) in dirs.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            corner = axpy(&corner, prev_v[i], e);
                        }
                    }
                    if let Some(alpha) = coords_of(&corner, &anchor) {
                        let ok = alpha.iter().zip(&vlens).all(|(&al, &vl)| {
                            al >= -1e-7 * (1.0 + r) && al <= vl + 1e-7 * (1.0 + r)
                        });
                        if !ok {
                            report.record_violation(format!(
                                "side-root family not increasing between h = {h_prev} and {h}"
                            ));
                        }
                    }
                }
            }
            prev_side_parallelepiped = Some((h, vlens));
        }
    }

    report.finalize_one_sided(1e-9);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_config, ContactCase, DiamondSliceConfig};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn ball_polytope_optimizer_dominates_sampling() {
        let mut rng = crate::rng::master(5);
        for dim in [2usize, 3] {
            for trial in 0..20 {
                let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let radius = rng.gen_range(0.5..2.0);
                let halves: Vec<HalfSpace> = (0..3)
                    .map(|_| {
                        let n: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let n = normalize(&n);
                        let off = dot(&n, &center) + rng.gen_range(-0.5..1.0);
                        HalfSpace::new(n, off)
                    })
                    .collect();
                let obj: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let exact = max_linear_over_ball_polytope(&obj, &center, radius, &halves);
                let mut best = f64::NEG_INFINITY;
                for _ in 0..60_000 {
                    let x: Vec<f64> = (0..dim)
                        .map(|i| center[i] + rng.gen_range(-radius..radius))
                        .collect();
                    if norm2(&sub(&x, &center)) <= radius
                        && halves.iter().all(|h| dot(&h.normal, &x) <= h.offset)
                    {
                        best = best.max(dot(&obj, &x));
                    }
                }
                match exact {
                    Some(v) => {
                        assert!(
                            v >= best - 1e-9,
                            "optimizer below a feasible sample: {v} < {best} (trial {trial})"
                        );
                        if best > f64::NEG_INFINITY {
                            assert!(v <= best + 0.2 * (1.0 + v.abs()), "{v} vs {best}");
                        }
                    }
                    None => assert_eq!(best, f64::NEG_INFINITY),
                }
            }
        }
    }

    #[test]
    fn box_simplex_volume_closed_forms() {
        // the worked instance: a = (1, 1.5), r = 1.5 ⇒ |E| = 1, |Ẽ| = 1.5
        assert_relative_eq!(box_simplex_volume(&[1.0, 1.5], 1.5), 1.0, epsilon = 1e-12);
        // inactive constraint: the whole box
        assert_relative_eq!(box_simplex_volume(&[1.0, 1.0], 3.0), 1.0, epsilon = 1e-12);
        // pure simplex: r smaller than every side
        assert_relative_eq!(
            box_simplex_volume(&[2.0, 2.0, 2.0], 1.0),
            1.0 / 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rectangle_lemma_reports_pass() {
        let rep = rectangle_lemma_check(&[1.0, 1.5], 1.5, 20_000, 3).unwrap();
        assert!(rep.pass, "{:?}", rep.notes);
        assert_relative_eq!(rep.envelope_ratio_max, 2.0 / 3.0, epsilon = 1e-12);
        let rep = rectangle_lemma_check(&[0.8, 1.1, 0.6], 1.2, 60_000, 4).unwrap();
        assert!(rep.pass, "{:?}", rep.notes);
        // Monte Carlo agrees with inclusion–exclusion for m = 3
        assert!(rep.max_residual < 0.02, "residual {}", rep.max_residual);
    }

    #[test]
    fn slice_cover_contains_slices_and_marked_point() {
        for dim in [2usize, 3] {
            for seed in 0..6u64 {
                let cfg = DiamondSliceConfig::random(dim, seed).unwrap();
                let mu = diamond_measure_log(&cfg).unwrap().log_value;
                let b = cfg.bottom_level();
                for frac in [1e-6, 0.2, 0.5, 0.9] {
                    let t = b + 2.0 * cfg.r * frac;
                    let rep = slice_cover_check(&cfg, t, 4000, seed, mu).unwrap();
                    assert_eq!(
                        rep.violations, 0,
                        "dim {dim} seed {seed} t {t}: {:?}",
                        rep.notes
                    );
                }
            }
        }
    }

    #[test]
    fn slice_cover_edges_lie_in_the_difference_directions() {
        let cfg = DiamondSliceConfig::new(vec![4.0, 5.0], 2.0, vec![4.1, 4.9]).unwrap();
        let cover = build_slice_cover(&cfg, cfg.bottom_level() + 1.0).unwrap();
        for e in cover.edges() {
            let nz: Vec<f64> = e.iter().copied().filter(|&c| c.abs() > 1e-12).collect();
            assert_eq!(nz.len(), 2);
            assert_relative_eq!(nz[0], -nz[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn slice_cover_alternative_route_engages() {
        // small z_i for i < d forces the alternative elimination near the
        // bottom of the diamond
        let cfg = DiamondSliceConfig::new(vec![0.5, 7.0], 4.0, vec![0.5, 7.0]).unwrap();
        let t = cfg.bottom_level() + 0.05;
        let cover = build_slice_cover(&cfg, t).unwrap();
        assert!(cover.used_alternative);
        let mu = diamond_measure_log(&cfg).unwrap().log_value;
        let rep = slice_cover_check(&cfg, t, 4000, 1, mu).unwrap();
        assert_eq!(rep.violations, 0, "{:?}", rep.notes);
    }

    #[test]
    fn diamond_lower_bound_ratios_are_order_one() {
        for seed in 0..10u64 {
            for dim in [2usize, 3] {
                let cfg = DiamondSliceConfig::random(dim, seed).unwrap();
                let ratio = diamond_lower_bound_ratio(&cfg).unwrap();
                assert!(
                    ratio > 1e-3 && ratio < 1e3,
                    "dim {dim} seed {seed}: ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn cone_cover_three_dimensional_cases() {
        for case in [ContactCase::Vertex, ContactCase::Face] {
            for seed in 0..4u64 {
                let cfg = random_config(3, case, seed).unwrap();
                let rep =
                    cone_cover_check(&cfg, 12, 6000, seed, crate::oracle::DEFAULT_C0).unwrap();
                assert!(
                    rep.pass,
                    "case {case:?} seed {seed}: violations {} residual {} spread [{}, {}] {:?}",
                    rep.violations,
                    rep.max_residual,
                    rep.envelope_ratio_min,
                    rep.envelope_ratio_max,
                    rep.notes
                );
            }
        }
    }

    #[test]
    fn cone_cover_four_dimensional_cases() {
        for case in [ContactCase::Vertex, ContactCase::Face, ContactCase::Edge] {
            for seed in 0..3u64 {
                let cfg = random_config(4, case, seed).unwrap();
                let rep =
                    cone_cover_check(&cfg, 10, 4000, seed, crate::oracle::DEFAULT_C0).unwrap();
                assert!(
                    rep.pass,
                    "case {case:?} seed {seed}: violations {} residual {} spread [{}, {}] {:?}",
                    rep.violations,
                    rep.max_residual,
                    rep.envelope_ratio_min,
                    rep.envelope_ratio_max,
                    rep.notes
                );
            }
        }
    }
}
