//! Numerical certification of the geometric machinery behind the `L^p`
//! bounds: closed-form roots checked against direct ray–sphere geometry,
//! containment certificates for the covering parallelepipeds, envelope
//! checks with recorded constants, and the slicing-decay estimate.

pub mod covers;
pub mod roots;
pub mod slicing;

use crate::error::{Error, Result};
use crate::geometry::{bottom_point, dot, norm2, normalize, scale, sub, ConeFrame};
use crate::rng::substream;
use rand::Rng;
use serde::Serialize;

/// Default small constant for the `h < c₀·R` branch of the
/// four-dimensional cover; recorded with results and overridable.
pub const DEFAULT_C0: f64 = 1.0 / 64.0;

/// Which boundary feature of the cross-section the bottom point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContactCase {
    /// `a'` is a vertex of the cross-section.
    Vertex,
    /// `a'` is an interior point of a facet of the cross-section.
    Face,
    /// `a'` is an interior point of an edge of the cross-section (d = 4).
    Edge,
}

/// A pass/fail certificate for one lemma instance.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub lemma: String,
    pub config: serde_json::Value,
    pub samples: u64,
    pub violations: u64,
    pub max_residual: f64,
    pub envelope_ratio_min: f64,
    pub envelope_ratio_max: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl OracleReport {
    pub fn new(lemma: &str, config: serde_json::Value) -> Self {
        OracleReport {
            lemma: lemma.to_string(),
            config,
            samples: 0,
            violations: 0,
            max_residual: 0.0,
            envelope_ratio_min: f64::INFINITY,
            envelope_ratio_max: f64::NEG_INFINITY,
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn record_residual(&mut self, r: f64) {
        if r > self.max_residual {
            self.max_residual = r;
        }
    }

    pub fn record_ratio(&mut self, r: f64) {
        self.envelope_ratio_min = self.envelope_ratio_min.min(r);
        self.envelope_ratio_max = self.envelope_ratio_max.max(r);
    }

    pub fn record_violation(&mut self, note: String) {
        self.violations += 1;
        if self.notes.len() < 8 {
            self.notes.push(note);
        }
    }

    /// Finalize the pass flag: zero violations, residuals below `tol`, and a
    /// bounded recorded envelope spread (two-sided `≃` comparisons).
    pub fn finalize(&mut self, tol: f64) {
        let spread_ok = if self.envelope_ratio_max == f64::NEG_INFINITY {
            true // no envelope recorded for this lemma
        } else {
            self.envelope_ratio_min > 0.0
                && self.envelope_ratio_max.is_finite()
                && self.envelope_ratio_max / self.envelope_ratio_min <= 1e3
        };
        self.pass = self.violations == 0 && self.max_residual < tol && spread_ok;
    }

    /// Finalize for one-sided (`≲`) bounds: the recorded maximum ratio must
    /// stay below an absolute constant, while arbitrarily small ratios are
    /// legitimate (a covering piece may be barely grazed).
    pub fn finalize_one_sided(&mut self, tol: f64) {
        let upper_ok =
            self.envelope_ratio_max == f64::NEG_INFINITY || self.envelope_ratio_max <= 1e3;
        self.pass = self.violations == 0 && self.max_residual < tol && upper_ok;
    }
}

/// A truncated Euclidean ball `𝐁(m, r) ∩ C₊` whose lowest point `a` lies on
/// the cone boundary, with the derived cross-section data used by the
/// covering constructions: disc radii `R_h`, the tangent-plane normal, the
/// angles `β_i` of the section edges with the tangent plane, and the axis
/// angle `ω`.
#[derive(Debug, Clone)]
pub struct TruncatedBallConfig {
    pub dim: usize,
    pub frame: ConeFrame,
    /// Ball center `m` in cone coordinates, inside the open cone.
    pub center: Vec<f64>,
    pub radius: f64,
    /// The bottom point `a ∈ ∂C₊` with `a₁ > 2`.
    pub bottom: Vec<f64>,
    pub case: ContactCase,
}

impl TruncatedBallConfig {
    pub fn a1(&self) -> f64 {
        self.bottom[0]
    }

    pub fn a_prime(&self) -> Vec<f64> {
        self.bottom[1..].to_vec()
    }

    pub fn m_prime(&self) -> Vec<f64> {
        self.center[1..].to_vec()
    }

    /// `m₁ - a₁`, the axial offset of the center above the bottom point.
    pub fn axial_offset(&self) -> f64 {
        self.center[0] - self.bottom[0]
    }

    /// Radius `R` of the section disc `B₀` at level `a₁`.
    pub fn big_r(&self) -> f64 {
        norm2(&sub(&self.a_prime(), &self.m_prime()))
    }

    /// Radius `R_h` of the section disc at level `a₁ + h`
    /// (`R_h² = r² - (m₁ - a₁ - h)²`).
    pub fn r_h(&self, h: f64) -> f64 {
        let ax = self.axial_offset() - h;
        (self.radius * self.radius - ax * ax).max(0.0).sqrt()
    }

    /// Upper end of the admissible `h` range: `r + (m₁ - a₁)`.
    pub fn h_max(&self) -> f64 {
        self.radius + self.axial_offset()
    }

    /// Outward unit normal of the tangent plane `T` at `a'` (pointing from
    /// `m'` to `a'`), in section-plane coordinates.
    pub fn outward_normal(&self) -> Vec<f64> {
        normalize(&sub(&self.a_prime(), &self.m_prime()))
    }

    /// Vertical coordinate `τ(x') = ⟨x' - m', n̂⟩` (normalized normal).
    pub fn tau(&self, x_prime: &[f64]) -> f64 {
        dot(&sub(x_prime, &self.m_prime()), &self.outward_normal())
    }

    /// Vertices of the cross-section `C_{a₁+h}` in section coordinates.
    pub fn section_vertices(&self, h: f64) -> Vec<Vec<f64>> {
        self.frame.cross_section_vertices(self.a1() + h)
    }

    /// The moving contact point `a'_h = (1 + h/a₁)·a'` (cross-sections
    /// dilate about the axis point of the section plane).
    pub fn a_prime_h(&self, h: f64) -> Vec<f64> {
        scale(&self.a_prime(), 1.0 + h / self.a1())
    }

    /// Unit direction of the section's central axis emanating from `a'`
    /// (toward the axis point, which is the section centroid).
    pub fn inward_axis(&self) -> Vec<f64> {
        normalize(&scale(&self.a_prime(), -1.0))
    }

    /// `sin ω`: angle between the inward axis at `a'` and the tangent plane.
    pub fn sin_omega(&self) -> f64 {
        dot(&self.inward_axis(), &self.outward_normal())
    }

    /// Unit edge directions of the cross-section from `a'` (vertex case):
    /// one per remaining vertex.
    pub fn vertex_edge_dirs(&self) -> Result<Vec<Vec<f64>>> {
        if self.case != ContactCase::Vertex {
            return Err(Error::Classification(
                "edge directions from a' require the vertex contact case".into(),
            ));
        }
        let verts = self.section_vertices(0.0);
        let a = self.a_prime();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for v in &verts {
            let d = sub(v, &a);
            if norm2(&d) > 1e-6 * self.a1() {
                dirs.push(normalize(&d));
            }
        }
        if dirs.len() != self.dim - 1 {
            return Err(Error::Classification(format!(
                "expected {} edges from the section vertex, found {}",
                self.dim - 1,
                dirs.len()
            )));
        }
        Ok(dirs)
    }

    /// `sin β` for a section direction: its component along the outward
    /// normal (edges of the section rise away from the disc).
    pub fn sin_beta(&self, dir: &[f64]) -> f64 {
        dot(dir, &self.outward_normal())
    }

    /// Validate all structural invariants, returning the worst residual.
    pub fn validate(&self) -> Result<f64> {
        let d = self.dim;
        if self.center.len() != d || self.bottom.len() != d {
            return Err(Error::domain("config dimension mismatch"));
        }
        if !(self.radius > (d as f64).sqrt()) {
            return Err(Error::domain("config requires r > √d"));
        }
        if self.a1() <= 2.0 {
            return Err(Error::domain("config requires a₁ > 2"));
        }
        if !self.frame.cone_contains(&self.center) {
            return Err(Error::domain("center must lie in the open cone"));
        }
        // a ∈ ∂C₊ and |m - a| = r
        let sphere_res = (norm2(&sub(&self.center, &self.bottom)) - self.radius).abs();
        let orth = self.frame.rotate_inv(&self.bottom);
        let min_coord = orth.iter().copied().fold(f64::INFINITY, f64::min);
        let boundary_res = min_coord.abs();
        // m₁ - a₁ within the per-dimension bracket
        let off = self.axial_offset();
        let lower = match d {
            2 => self.radius / std::f64::consts::SQRT_2,
            3 => self.radius / 3f64.sqrt(),
            4 => self.radius / 2.0,
            _ => return Err(Error::domain("dimensions 2..=4 only")),
        };
        if off < lower - 1e-9 * self.radius || off > self.radius + 1e-9 * self.radius {
            return Err(Error::domain(format!(
                "axial offset {off} outside [{lower}, r = {}]",
                self.radius
            )));
        }
        // the recomputed bottom point must reproduce a
        let bp = bottom_point(&self.frame, &self.center, self.radius)?;
        let bp_res = norm2(&sub(&bp, &self.bottom));
        Ok(sphere_res.max(boundary_res).max(bp_res))
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "a1": self.a1(),
            "radius": self.radius,
            "axial_offset": self.axial_offset(),
            "big_r": self.big_r(),
            "case": format!("{:?}", self.case),
        })
    }
}

/// Classify the contact feature from the orthant coordinates of the bottom
/// point: the number of vanishing coordinates (tolerance `1e-9` relative)
/// identifies the feature.
pub fn classify_contact(frame: &ConeFrame, bottom: &[f64]) -> Result<ContactCase> {
    let d = frame.dim();
    let orth = frame.rotate_inv(bottom);
    let scale = norm2(bottom).max(1.0);
    let zeros = orth.iter().filter(|&&c| c.abs() < 1e-9 * scale).count();
    match (d, zeros) {
        (2, 1) => Ok(ContactCase::Vertex),
        (3, 2) => Ok(ContactCase::Vertex),
        (3, 1) => Ok(ContactCase::Face),
        (4, 3) => Ok(ContactCase::Vertex),
        (4, 2) => Ok(ContactCase::Edge),
        (4, 1) => Ok(ContactCase::Face),
        _ => Err(Error::Classification(format!(
            "bottom point with {zeros} vanishing coordinates in dimension {d}"
        ))),
    }
}

/// Draw a random configuration with the requested contact case:
/// `a₁ ∈ (2, 20)`, `r ∈ (√d, 20)`, `m` constructed from a direction in the
/// feature's normal cone and accepted once the recomputed bottom point
/// reproduces `a`.
pub fn random_config(dim: usize, case: ContactCase, seed: u64) -> Result<TruncatedBallConfig> {
    if !(2..=4).contains(&dim) {
        return Err(Error::domain("configurations exist for d ∈ {2, 3, 4}"));
    }
    if case == ContactCase::Edge && dim != 4 {
        return Err(Error::Classification(
            "edge contact exists in dimension 4 only".into(),
        ));
    }
    if case == ContactCase::Face && dim == 2 {
        return Err(Error::Classification(
            "planar sections have vertex contact only".into(),
        ));
    }
    let frame = ConeFrame::new(dim)?;
    let mut rng = substream(seed, 0xC0F1);
    for _ in 0..20_000u32 {
        let a1: f64 = rng.gen_range(2.2..20.0);
        let r: f64 = rng.gen_range((dim as f64).sqrt() * 1.05..20.0);
        // pick a' on the requested feature of the cross-section
        let verts = frame.cross_section_vertices(a1);
        let a_prime: Vec<f64> = match (case, dim) {
            (ContactCase::Vertex, _) => verts[0].clone(),
            (ContactCase::Face, 3) => {
                let t = rng.gen_range(0.25..0.75);
                verts[0]
                    .iter()
                    .zip(&verts[1])
                    .map(|(&x, &y)| x + t * (y - x))
                    .collect()
            }
            (ContactCase::Face, 4) => {
                let mut w = [
                    rng.gen_range(0.2..1.0),
                    rng.gen_range(0.2..1.0),
                    rng.gen_range(0.2..1.0),
                ];
                let s: f64 = w.iter().sum();
                for x in &mut w {
                    *x /= s;
                }
                (0..3)
                    .map(|ax| w[0] * verts[0][ax] + w[1] * verts[1][ax] + w[2] * verts[2][ax])
                    .collect()
            }
            (ContactCase::Edge, 4) => {
                let t = rng.gen_range(0.25..0.75);
                verts[0]
                    .iter()
                    .zip(&verts[1])
                    .map(|(&x, &y)| x + t * (y - x))
                    .collect()
            }
            _ => unreachable!(),
        };
        let mut bottom = vec![a1];
        bottom.extend_from_slice(&a_prime);
        // Stationarity of x₁ at the contact point puts the direction from a
        // to m in the cone spanned by e₁ minus the inward normals of the
        // facets active at the feature (the sphere presses against them
        // from inside).
        let orth_a = frame.rotate_inv(&bottom);
        let scale_len = norm2(&bottom).max(1.0);
        let mut dir = vec![0.0; dim];
        let alpha: f64 = rng.gen_range(0.4..3.0);
        dir[0] += alpha;
        let active: Vec<usize> = (0..dim)
            .filter(|&j| orth_a[j].abs() < 1e-9 * scale_len)
            .collect();
        for &j in &active {
            // inward normal of the facet {y_j = 0} is the image of e_j
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            let n_in = frame.rotate(&e);
            let cap = 0.95 * alpha / (dim as f64).sqrt() / active.len() as f64;
            let w: f64 = rng.gen_range(0.0..cap);
            for (slot, &nv) in dir.iter_mut().zip(&n_in) {
                *slot -= w * nv;
            }
        }
        let dir = normalize(&dir);
        let m: Vec<f64> = bottom
            .iter()
            .zip(&dir)
            .map(|(&b, &u)| b + r * u)
            .collect();
        if !frame.cone_contains(&m) {
            continue;
        }
        let Ok(bp) = bottom_point(&frame, &m, r) else {
            continue;
        };
        if norm2(&sub(&bp, &bottom)) > 1e-7 * (1.0 + r) {
            continue;
        }
        let cfg = TruncatedBallConfig {
            dim,
            frame: frame.clone(),
            center: m,
            radius: r,
            bottom,
            case,
        };
        if cfg.validate().is_ok() && classify_contact(&cfg.frame, &cfg.bottom)? == case {
            return Ok(cfg);
        }
    }
    Err(Error::domain(format!(
        "no admissible configuration found (d = {dim}, case {case:?})"
    )))
}

/// A diamond `D(z, r)` with a marked point `ξ ∈ D`, coordinates renumbered
/// so the last center coordinate is maximal; `b = z₀ - r > 2` is the bottom
/// level of the diamond.
#[derive(Debug, Clone, Serialize)]
pub struct DiamondSliceConfig {
    pub dim: usize,
    pub z: Vec<f64>,
    pub r: f64,
    pub xi: Vec<f64>,
}

impl DiamondSliceConfig {
    pub fn new(z: Vec<f64>, r: f64, xi: Vec<f64>) -> Result<Self> {
        let dim = z.len();
        if !(2..=4).contains(&dim) || xi.len() != dim {
            return Err(Error::domain("slice configs need matching d ∈ {2, 3, 4}"));
        }
        if z.iter().any(|&c| c <= 0.0) || !(r >= 1.0) {
            return Err(Error::domain("need z in the orthant and r ≥ 1"));
        }
        let z0: f64 = z.iter().sum();
        if z0 - r <= 2.0 {
            return Err(Error::domain("need bottom level b = z₀ - r > 2"));
        }
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if (z[dim - 1] - zmax).abs() > 1e-12 * zmax {
            return Err(Error::domain("renumber coordinates so z_d is maximal"));
        }
        let dist: f64 = z.iter().zip(&xi).map(|(&a, &b)| (a - b).abs()).sum();
        if dist >= r || xi.iter().any(|&c| c <= 0.0) {
            return Err(Error::domain("ξ must lie in the open diamond"));
        }
        Ok(DiamondSliceConfig { dim, z, r, xi })
    }

    pub fn bottom_level(&self) -> f64 {
        self.z.iter().sum::<f64>() - self.r
    }

    pub fn xi_level(&self) -> f64 {
        self.xi.iter().sum()
    }

    /// Random admissible configuration.
    pub fn random(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = substream(seed, 0xD1A);
        loop {
            let r: f64 = rng.gen_range(1.0..8.0);
            let mut z: Vec<f64> = (0..dim).map(|_| rng.gen_range(1.0..10.0)).collect();
            // renumber so the last coordinate is maximal
            let (arg, _) =
                z.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
                        if v > acc.1 {
                            (i, v)
                        } else {
                            acc
                        }
                    });
            z.swap(arg, dim - 1);
            let z0: f64 = z.iter().sum();
            if z0 - r <= 2.2 {
                continue;
            }
            // draw ξ in the diamond by rejection
            for _ in 0..64 {
                let xi: Vec<f64> = z
                    .iter()
                    .map(|&c| c + rng.gen_range(-r..r) / dim as f64)
                    .collect();
                if xi.iter().any(|&c| c <= 0.0) {
                    continue;
                }
                let dist: f64 = z.iter().zip(&xi).map(|(&a, &b)| (a - b).abs()).sum();
                if dist < r * 0.999 {
                    return DiamondSliceConfig::new(z, r, xi);
                }
            }
        }
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "z": self.z,
            "r": self.r,
            "xi": self.xi,
            "bottom": self.bottom_level(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_configs_have_valid_invariants() {
        for (dim, case) in [
            (2, ContactCase::Vertex),
            (3, ContactCase::Vertex),
            (3, ContactCase::Face),
            (4, ContactCase::Vertex),
            (4, ContactCase::Face),
            (4, ContactCase::Edge),
        ] {
            for seed in 0..5u64 {
                let cfg = random_config(dim, case, seed).unwrap();
                let res = cfg.validate().unwrap();
                assert!(res < 1e-7 * (1.0 + cfg.radius), "residual {res}");
                assert_eq!(classify_contact(&cfg.frame, &cfg.bottom).unwrap(), case);
                // R² + (m₁-a₁)² = r²
                let lhs = cfg.big_r().powi(2) + cfg.axial_offset().powi(2);
                assert!((lhs - cfg.radius * cfg.radius).abs() < 1e-7 * cfg.radius);
                // edges from a' rise away from the disc center
                if case == ContactCase::Vertex && dim >= 3 {
                    for e in cfg.vertex_edge_dirs().unwrap() {
                        assert!(cfg.sin_beta(&e) >= -1e-9);
                    }
                }
                assert!(cfg.sin_omega() > 0.0);
            }
        }
    }

    #[test]
    fn classification_errors_on_interior_points() {
        let frame = ConeFrame::new(3).unwrap();
        let interior = frame.rotate(&[1.0, 1.0, 1.0]);
        assert!(classify_contact(&frame, &interior).is_err());
    }

    #[test]
    fn diamond_slice_configs_renumber_and_bound() {
        let cfg = DiamondSliceConfig::random(3, 1).unwrap();
        let zmax = cfg.z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(cfg.z[cfg.dim - 1], zmax);
        assert!(cfg.bottom_level() > 2.0);
        assert!(DiamondSliceConfig::new(vec![5.0, 1.0], 2.0, vec![5.0, 1.0]).is_err());
    }
}
