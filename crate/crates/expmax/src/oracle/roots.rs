//! Closed-form roots of the section geometry checked against independent
//! ray–sphere intersections, with their asymptotic envelopes.
//!
//! All quantities live in the cross-section plane `π_{a₁+h}` of the rotated
//! cone: the disc `B_h` of radius `R_h` about `m'`, the moving contact
//! point `a'_h`, and rays along section edge directions.

use super::{OracleReport, TruncatedBallConfig};
use crate::error::{Error, Result};
use crate::geometry::cone::exit_length;
use crate::geometry::{axpy, dot, norm2, normalize, scale, sub};
use crate::rng::substream;
use rand::Rng;

/// Exact drop `ξ(h)` of the planar section: the lower intersection of the
/// line `x₁ = 𝔞 + h` with the circle `∂𝐁(m, r)` sits at `(𝔞 + h, 𝔞 - ξ)`.
/// Returns the closed-form root and its envelope
/// `r·h / (m₂ - 𝔞 + √(r·h))`.
#[derive(Debug, Clone, Copy)]
pub struct RootPair {
    pub exact: f64,
    pub envelope: f64,
}

pub fn xi_of_h(cfg: &TruncatedBallConfig, h: f64) -> Result<RootPair> {
    if cfg.dim != 2 {
        return Err(Error::domain("ξ(h) is the planar root"));
    }
    let r = cfg.radius;
    if !(h > 0.0 && h <= r / std::f64::consts::SQRT_2) {
        return Err(Error::domain("need 0 < h ≤ r/√2"));
    }
    let fraka = cfg.a1();
    let (m1, m2) = (cfg.center[0], cfg.center[1]);
    let num = 2.0 * (m1 - fraka) * h - h * h;
    let exact = num / ((m2 - fraka) + ((m2 - fraka).powi(2) + num).sqrt());
    let envelope = r * h / ((m2 - fraka) + (r * h).sqrt());
    Ok(RootPair { exact, envelope })
}

/// Exit length along a section direction with vertical rise `sin β`:
/// the positive root of `p² + 2·p·R·sinβ - 2(m₁-a₁)h + h² = 0`.
pub fn section_exit_root(cfg: &TruncatedBallConfig, sin_beta: f64, h: f64) -> f64 {
    let num = 2.0 * cfg.axial_offset() * h - h * h;
    let rs = cfg.big_r() * sin_beta;
    num / ((rs * rs + num).sqrt() + rs)
}

/// Envelope `√(r·h) ∧ r·h/(R·sinβ)` of the exit root (the second branch is
/// `+∞` at `sinβ = 0`).
pub fn section_exit_envelope(cfg: &TruncatedBallConfig, sin_beta: f64, h: f64) -> f64 {
    let rh = (cfg.radius * h).sqrt();
    let denom = cfg.big_r() * sin_beta;
    if denom <= 0.0 {
        rh
    } else {
        rh.min(cfg.radius * h / denom)
    }
}

/// Which closed-form root family a check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Planar drop `ξ(h)`, d = 2.
    PlanarDrop,
    /// First-edge exit `p_h`, d = 3 (smallest tangent angle β).
    EdgeExit,
    /// Second-edge exit `q_h`, d = 3 (angle β + π/3).
    SecondEdgeExit,
    /// Per-edge exits `p_h^i`, d = 4.
    EdgeExit4,
    /// The parallelepiped side roots `z(0), z(π)` and the angular root
    /// `z(θ)`, d = 4 with `h < c₀·R`.
    SideRoot,
}

impl RootKind {
    pub fn tag(self) -> &'static str {
        match self {
            RootKind::PlanarDrop => "planar-drop",
            RootKind::EdgeExit => "edge-exit",
            RootKind::SecondEdgeExit => "second-edge-exit",
            RootKind::EdgeExit4 => "edge-exit-4d",
            RootKind::SideRoot => "side-root",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            RootKind::PlanarDrop => 2,
            RootKind::EdgeExit | RootKind::SecondEdgeExit => 3,
            RootKind::EdgeExit4 | RootKind::SideRoot => 4,
        }
    }
}

/// Data of a side root `z(θ)` at one edge in dimension 4.
#[derive(Debug, Clone)]
pub struct SideRoot {
    pub sin_beta: f64,
    /// θ between the horizontal projections of the ray and the inward axis.
    pub theta: f64,
    pub z_theta: f64,
    pub z_at_0: f64,
    pub z_at_pi: f64,
    pub direct: f64,
    /// Length of the constructed side `v_i` (to `∂H` when `sinβ ≥ 1/32`,
    /// else to `∂B_h`).
    pub v_len: f64,
}

/// Compute the side roots for one edge direction of the d = 4 vertex case.
pub fn side_root(cfg: &TruncatedBallConfig, edge: &[f64], h: f64) -> Result<SideRoot> {
    if cfg.dim != 4 {
        return Err(Error::domain("side roots live in dimension 4"));
    }
    let big_r = cfg.big_r();
    let r_h = cfg.r_h(h);
    if !(h > 0.0 && h <= cfg.radius / 2.0) {
        return Err(Error::domain("need 0 < h ≤ r/2"));
    }
    let n_out = cfg.outward_normal();
    let sin_omega = cfg.sin_omega();
    let cos_omega = (1.0 - sin_omega * sin_omega).max(0.0).sqrt();
    let sin_beta = cfg.sin_beta(edge);
    let cos_beta = (1.0 - sin_beta * sin_beta).max(0.0).sqrt();
    let a_h = cfg.a_prime_h(h);
    let m_prime = cfg.m_prime();
    let sqrt3 = 3.0f64.sqrt();
    let ell = big_r - sqrt3 * h * sin_omega;

    // horizontal unit of the inward axis
    let ax_in = cfg.inward_axis();
    let ax_horiz = axpy(&ax_in, -sin_omega, &n_out);
    let ax_horiz = normalize(&ax_horiz);
    // actual θ of this edge
    let e_horiz = axpy(edge, -sin_beta, &n_out);
    let theta = if norm2(&e_horiz) > 1e-12 {
        dot(&normalize(&e_horiz), &ax_horiz).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };

    let l_term = ell * ell + 3.0 * h * h * cos_omega * cos_omega - r_h * r_h;
    let z_of = |th: f64| -> f64 {
        let k = ell * sin_beta - sqrt3 * h * cos_omega * cos_beta * th.cos();
        -k + (k * k - l_term).sqrt()
    };
    let z_theta = z_of(theta);

    // the simplified ±forms
    let l_star = r_h * r_h - big_r * big_r + 2.0 * sqrt3 * big_r * h * sin_omega - 3.0 * h * h;
    let beta = sin_beta.asin();
    let omega = sin_omega.asin();
    let z_star = |plus: bool| -> f64 {
        let k_star = if plus {
            big_r * sin_beta + sqrt3 * h * (omega + beta).cos()
        } else {
            big_r * sin_beta - sqrt3 * h * (omega - beta).cos()
        };
        l_star / (k_star + (k_star * k_star + l_star).sqrt())
    };
    let z_at_pi = z_star(true);
    let z_at_0 = z_star(false);

    // direct ray–sphere exit from a'_h along the edge
    let direct = exit_length(&m_prime, r_h, &a_h, edge)?;

    // the constructed side: to ∂H when sinβ ≥ 1/32, else to ∂B_h
    let v_len = if sin_beta >= 1.0 / 32.0 {
        (r_h - big_r + sqrt3 * h * sin_omega) / sin_beta
    } else {
        direct
    };

    Ok(SideRoot {
        sin_beta,
        theta,
        z_theta,
        z_at_0,
        z_at_pi,
        direct,
        v_len,
    })
}

/// Residual of a point against the sphere `|x - m| = r` (full cone
/// coordinates).
fn sphere_residual(cfg: &TruncatedBallConfig, level: f64, x_prime: &[f64]) -> f64 {
    let mut p = vec![level];
    p.extend_from_slice(x_prime);
    (norm2(&sub(&p, &cfg.center)) - cfg.radius).abs()
}

/// Run the root-vs-geometry certificate for `count` random configurations
/// of the given kind, recording residuals and envelope ratios.
pub fn envelope_check(kind: RootKind, count: usize, seed: u64) -> Result<OracleReport> {
    let mut report = OracleReport::new(
        &format!("root-{}", kind.tag()),
        serde_json::json!({"kind": kind.tag(), "count": count}),
    );
    let mut rng = substream(seed, 0x1007);
    for i in 0..count {
        let cfg = super::random_config(kind.dim(), super::ContactCase::Vertex, seed ^ (i as u64))?;
        match kind {
            RootKind::PlanarDrop => {
                let h = rng.gen_range(0.0..1.0) * cfg.radius / std::f64::consts::SQRT_2;
                let h = h.max(1e-3);
                let pair = xi_of_h(&cfg, h)?;
                // the root point (𝔞 + h, 𝔞 - ξ) lies on the circle
                let fraka = cfg.a1();
                let res = sphere_residual(&cfg, fraka + h, &[fraka - pair.exact]);
                report.record_residual(res / (1.0 + cfg.radius));
                // direct root from the circle equation
                let drop = cfg.center[1]
                    - (cfg.radius * cfg.radius - (cfg.center[0] - fraka - h).powi(2)).sqrt();
                let direct = fraka - drop;
                report.record_residual((pair.exact - direct).abs() / (1.0 + cfg.radius));
                report.record_ratio(pair.exact / pair.envelope);
                report.samples += 1;
            }
            RootKind::EdgeExit | RootKind::SecondEdgeExit | RootKind::EdgeExit4 => {
                let dirs = cfg.vertex_edge_dirs()?;
                let h_cap = match kind {
                    RootKind::EdgeExit4 => cfg.radius / 2.0,
                    _ => cfg.radius / 3f64.sqrt(),
                };
                let h = rng.gen_range(1e-3..1.0) * h_cap;
                // order edges by tangent angle: the first edge carries the
                // smallest β
                let mut angles: Vec<(f64, &Vec<f64>)> =
                    dirs.iter().map(|e| (cfg.sin_beta(e), e)).collect();
                angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let picks: Vec<&(f64, &Vec<f64>)> = match kind {
                    RootKind::EdgeExit => vec![&angles[0]],
                    RootKind::SecondEdgeExit => vec![&angles[1]],
                    _ => angles.iter().collect(),
                };
                for &&(sin_beta, edge) in &picks {
                    let closed = section_exit_root(&cfg, sin_beta, h);
                    let direct =
                        exit_length(&cfg.m_prime(), cfg.r_h(h), &cfg.a_prime(), edge)?;
                    report
                        .record_residual((closed - direct).abs() / (1.0 + cfg.radius));
                    // the exit point lies on the sphere
                    let exit = axpy(&cfg.a_prime(), direct, edge);
                    let res = sphere_residual(&cfg, cfg.a1() + h, &exit);
                    report.record_residual(res / (1.0 + cfg.radius));
                    let env = section_exit_envelope(&cfg, sin_beta, h);
                    report.record_ratio(closed / env);
                    report.samples += 1;
                }
                if kind == RootKind::SecondEdgeExit && cfg.dim == 3 {
                    // the two planar edges are π/3 apart: sin(β + π/3)
                    let b0 = angles[0].0.asin();
                    let expect = (b0 + std::f64::consts::FRAC_PI_3).sin();
                    report.record_residual((angles[1].0 - expect).abs());
                }
            }
            RootKind::SideRoot => {
                let c0 = super::DEFAULT_C0;
                let h_cap = (c0 * cfg.big_r()).min(cfg.radius / 2.0);
                if h_cap <= 1e-6 {
                    continue;
                }
                let h = rng.gen_range(0.05..0.999) * h_cap;
                for edge in cfg.vertex_edge_dirs()? {
                    let sr = side_root(&cfg, &edge, h)?;
                    // closed-form angular root versus the direct exit
                    report
                        .record_residual((sr.z_theta - sr.direct).abs() / (1.0 + cfg.radius));
                    // the ± forms bracket the root
                    let tol = 1e-10 * (1.0 + cfg.radius);
                    if sr.direct > sr.z_at_0 + tol || sr.direct < sr.z_at_pi - tol {
                        report.record_violation(format!(
                            "ordering z(π) ≤ z(θ) ≤ z(0) failed: {} vs [{}, {}]",
                            sr.direct, sr.z_at_pi, sr.z_at_0
                        ));
                    }
                    // the ± forms solve the same quadratic at θ = 0, π
                    // (two independent algebraic routes)
                    let sqrt3 = 3.0f64.sqrt();
                    let ell = cfg.big_r() - sqrt3 * h * cfg.sin_omega();
                    let cos_omega =
                        (1.0 - cfg.sin_omega().powi(2)).max(0.0).sqrt();
                    let cos_beta = (1.0 - sr.sin_beta * sr.sin_beta).max(0.0).sqrt();
                    let l_term =
                        ell * ell + 3.0 * h * h * cos_omega * cos_omega - cfg.r_h(h).powi(2);
                    for (th, z) in [(0.0, sr.z_at_0), (std::f64::consts::PI, sr.z_at_pi)] {
                        let k = ell * sr.sin_beta
                            - sqrt3 * h * cos_omega * cos_beta * th.cos();
                        let quad = z * z + 2.0 * k * z + l_term;
                        report.record_residual(quad.abs() / (1.0 + cfg.radius.powi(2)));
                    }
                    // Lemma: with sinβ < 1/32 and h < c₀R the side reaches
                    // at least 4h
                    if sr.sin_beta < 1.0 / 32.0 && sr.v_len < 4.0 * h {
                        report.record_violation(format!(
                            "|v| = {} < 4h = {}",
                            sr.v_len,
                            4.0 * h
                        ));
                    }
                    // |v_i| ≲ p_h^i envelope
                    let env = section_exit_envelope(&cfg, sr.sin_beta, h);
                    report.record_ratio(sr.v_len / env);
                    report.samples += 1;
                }
            }
        }
    }
    report.finalize(1e-10);
    Ok(report)
}

/// Numerical checks of the regular-tetrahedron angles used by the d = 4
/// construction, recomputed from the cross-section vertices.
pub fn tetrahedron_angle_residuals() -> Result<f64> {
    let frame = crate::geometry::ConeFrame::new(4)?;
    let verts = frame.cross_section_vertices(1.0);
    let mut worst: f64 = 0.0;
    // γ: angle at a vertex between an edge and the axis of symmetry
    let centroid = {
        let mut c = vec![0.0; 3];
        for v in &verts {
            for (s, &x) in c.iter_mut().zip(v) {
                *s += x;
            }
        }
        scale(&c, 0.25)
    };
    let axis = normalize(&sub(&centroid, &verts[0]));
    let edge = normalize(&sub(&verts[1], &verts[0]));
    let sin_gamma = (1.0 - dot(&axis, &edge).powi(2)).sqrt();
    worst = worst.max((sin_gamma - 1.0 / 3f64.sqrt()).abs());
    // κ: angle between a face and an edge not in that face
    let face_n = {
        let u = sub(&verts[1], &verts[0]);
        let v = sub(&verts[2], &verts[0]);
        normalize(&[
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ])
    };
    let off_edge = normalize(&sub(&verts[3], &verts[0]));
    let sin_kappa = dot(&face_n, &off_edge).abs();
    worst = worst.max((sin_kappa - (2.0f64 / 3.0).sqrt()).abs());
    // the dihedral angle between two faces is 2γ
    let face_n2 = {
        let u = sub(&verts[1], &verts[0]);
        let v = sub(&verts[3], &verts[0]);
        normalize(&[
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ])
    };
    let dihedral = dot(&face_n, &face_n2).abs().acos();
    let gamma = (1.0f64 / 3f64.sqrt()).asin();
    worst = worst.max((dihedral - 2.0 * gamma).abs());
    // height / edge = √(2/3)
    let edge_len = norm2(&sub(&verts[1], &verts[0]));
    let face_centroid = {
        let mut c = vec![0.0; 3];
        for v in &verts[1..] {
            for (s, &x) in c.iter_mut().zip(v) {
                *s += x;
            }
        }
        scale(&c, 1.0 / 3.0)
    };
    let height = norm2(&sub(&verts[0], &face_centroid));
    worst = worst.max((height / edge_len - (2.0f64 / 3.0).sqrt()).abs());
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeFrame;
    use crate::oracle::ContactCase;
    use approx::assert_relative_eq;

    /// The worked planar instance: 𝔞 = 3, m = (7, 6), r = 5.
    fn planar_instance() -> TruncatedBallConfig {
        TruncatedBallConfig {
            dim: 2,
            frame: ConeFrame::new(2).unwrap(),
            center: vec![7.0, 6.0],
            radius: 5.0,
            bottom: vec![3.0, 3.0],
            case: ContactCase::Vertex,
        }
    }

    #[test]
    fn planar_drop_at_unit_depth_is_one() {
        let cfg = planar_instance();
        assert!(cfg.validate().unwrap() < 1e-10);
        let pair = xi_of_h(&cfg, 1.0).unwrap();
        // ξ² + 6ξ - 7 = 0 at h = 1
        assert_relative_eq!(pair.exact, 1.0, epsilon = 1e-12);
        // the point (4, 2) lies on the circle |x - (7,6)| = 5
        assert_relative_eq!(
            ((4.0f64 - 7.0).powi(2) + (2.0f64 - 6.0).powi(2)).sqrt(),
            5.0,
            epsilon = 1e-12
        );
        // continuity at the bottom point
        let tiny = xi_of_h(&cfg, 1e-9).unwrap();
        assert!(tiny.exact < 1e-8);
        // out-of-range h is refused
        assert!(xi_of_h(&cfg, 4.0).is_err());
    }

    #[test]
    fn worked_edge_exit_instance() {
        // R = 3, sinβ = 1, m₁ - a₁ = 4, h = 1 (r = 5): p² + 6p - 7 = 0,
        // realized as a planar section with m' - a' vertical.
        let num: f64 = 2.0 * 4.0 * 1.0 - 1.0;
        let rs: f64 = 3.0 * 1.0;
        let p = num / ((rs * rs + num).sqrt() + rs);
        assert_relative_eq!(p, 1.0, epsilon = 1e-12);
        // cross-check by the direct ray–sphere exit: a' at distance R above
        // m', ray along the outward normal, section radius R_h = 4
        let direct = exit_length(&[0.0, 0.0], 4.0, &[0.0, 3.0], &[0.0, 1.0]).unwrap();
        assert_relative_eq!(direct, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn envelope_checks_pass_per_kind() {
        for kind in [
            RootKind::PlanarDrop,
            RootKind::EdgeExit,
            RootKind::SecondEdgeExit,
            RootKind::EdgeExit4,
            RootKind::SideRoot,
        ] {
            let rep = envelope_check(kind, 40, 7).unwrap();
            assert!(
                rep.pass,
                "{}: violations {}, residual {}, spread [{}, {}] {:?}",
                rep.lemma,
                rep.violations,
                rep.max_residual,
                rep.envelope_ratio_min,
                rep.envelope_ratio_max,
                rep.notes
            );
        }
    }

    #[test]
    fn tetrahedron_angles_match_the_closed_forms() {
        assert!(tetrahedron_angle_residuals().unwrap() < 1e-12);
    }
}
