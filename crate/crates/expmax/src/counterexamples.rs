//! The weak-type (1,1) blow-up constructions: families of cubes/balls swept
//! along a diagonal cross-section segment, and the diamond witness built
//! from a near-Dirac mass high up one coordinate axis.
//!
//! Union-region measures are estimated by importance-sampled Monte Carlo in
//! diagonal coordinates (exponential law along the `ℓ¹`-radial direction,
//! uniform transverse), which keeps hit rates of order one at every sweep
//! size; all results are carried in the log domain.

use crate::error::{Error, Result};
use crate::geometry::{self, NormKind, OrthantPoint};
use crate::logdomain::ln_exp_diff;
use crate::measure::{mu_best, mu_cube_exact, MeasureEstimate, Method};
use crate::quad;
use crate::rng::{substream, SUBSTREAMS};
use rand::Rng;
use serde::Serialize;

/// Level-test constant hidden in the asymptotic comparisons: the witness
/// level sets use `M f ≥ LEVEL_FRACTION · λ`.
pub const LEVEL_FRACTION: f64 = 0.25;

/// A family of cubes or Euclidean balls of radius `s/2` whose centers sweep
/// the cross-section of the half-size ball by the diagonal hyperplane
/// `x₀ = d·s`. The swept union strictly outweighs the single ball as `s`
/// grows, which is what defeats the weak-type (1,1) bound.
#[derive(Debug, Clone, Serialize)]
pub struct SweptFamily {
    pub kind: NormKind,
    pub s: f64,
    pub dim: usize,
}

impl SweptFamily {
    pub fn cube(s: f64, dim: usize) -> Result<Self> {
        SweptFamily::new(NormKind::Linf, s, dim)
    }

    pub fn ball(s: f64, dim: usize) -> Result<Self> {
        SweptFamily::new(NormKind::L2, s, dim)
    }

    fn new(kind: NormKind, s: f64, dim: usize) -> Result<Self> {
        if kind == NormKind::L1 {
            return Err(Error::capability(
                "the swept construction covers cubes and Euclidean balls",
            ));
        }
        if !(s >= 2.0) || !(2..=3).contains(&dim) {
            return Err(Error::domain("swept family needs s ≥ 2 and d ∈ {2, 3}"));
        }
        Ok(SweptFamily { kind, s, dim })
    }

    /// Center of the base ball: `s·𝟏`.
    pub fn base_center(&self) -> Vec<f64> {
        vec![self.s; self.dim]
    }

    /// Radius of the swept balls: `s/2`.
    pub fn radius(&self) -> f64 {
        self.s / 2.0
    }

    /// The base ball `E_s` itself.
    pub fn base_ball(&self) -> geometry::Ball {
        geometry::Ball::new(
            self.kind,
            OrthantPoint::new(self.base_center()).unwrap(),
            self.radius(),
        )
        .unwrap()
    }

    /// Endpoints of the center segment for `d = 2`: the intersection of the
    /// half-size ball with the line `x + y = 2s`.
    pub fn segment_endpoints(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.dim != 2 {
            return None;
        }
        let s = self.s;
        let half = match self.kind {
            // half cube: |u| ≤ s/4 along the anti-diagonal direction (1,-1)
            NormKind::Linf => s / 4.0,
            // half ball: the diameter of the radius-s/4 disc in the line
            NormKind::L2 => s / 4.0 / std::f64::consts::SQRT_2,
            NormKind::L1 => unreachable!(),
        };
        let a = vec![s - half, s + half];
        let b = vec![s + half, s - half];
        Some((a, b))
    }

    /// Membership in the swept union region `Ê_s`: true iff some admissible
    /// center `c` (in the diagonal cross-section of the half-size ball) has
    /// `|p - c| < s/2` in the family norm. Both tests are exact:
    ///
    /// * cubes: the admissible centers form a box cut by the hyperplane, so
    ///   the test is interval intersection plus a hyperplane-range check;
    /// * balls: the admissible centers form a `(d-1)`-disc, and the distance
    ///   from a point to a disc has a closed form.
    pub fn region_contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim || p.iter().any(|&c| c <= 0.0) {
            return false;
        }
        let d = self.dim;
        let s = self.s;
        let r = self.radius();
        match self.kind {
            NormKind::Linf => {
                // centers c ∈ (3s/4, 5s/4)^d with Σc = ds and |p - c|_∞ < r:
                // per-coordinate interval intersection, then the hyperplane
                // must cross the resulting box
                let mut lo_sum = 0.0;
                let mut hi_sum = 0.0;
                for &pi in p {
                    let lo = (0.75 * s).max(pi - r);
                    let hi = (1.25 * s).min(pi + r);
                    if lo >= hi {
                        return false;
                    }
                    lo_sum += lo;
                    hi_sum += hi;
                }
                let target = d as f64 * s;
                lo_sum < target && target < hi_sum
            }
            NormKind::L2 => {
                // centers form the (d-1)-disc of radius s/4 centered at s·𝟏
                // in the hyperplane Σx = ds; point-to-disc distance:
                let df = d as f64;
                let excess: f64 = p.iter().sum::<f64>() - df * s;
                let axial = excess / df.sqrt();
                // in-plane component of p - s·𝟏
                let inplane_sq: f64 = p
                    .iter()
                    .map(|&pi| {
                        let v = pi - s - excess / df;
                        v * v
                    })
                    .sum();
                let rho = inplane_sq.sqrt();
                let disc_r = s / 4.0;
                let dist_sq = if rho <= disc_r {
                    axial * axial
                } else {
                    axial * axial + (rho - disc_r) * (rho - disc_r)
                };
                dist_sq < r * r
            }
            NormKind::L1 => unreachable!(),
        }
    }

    /// Membership in the diagonal prism `R_s ⊂ Ê_s`: base = center section
    /// translated by the family's inner offset, extruded along `𝟏/√d`.
    pub fn prism_contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim {
            return false;
        }
        let d = self.dim as f64;
        let s = self.s;
        let (offset, height) = match self.kind {
            NormKind::Linf => (s / 2.0, d.sqrt() * s),
            NormKind::L2 => (s / (2.0 * d.sqrt()), s),
            NormKind::L1 => unreachable!(),
        };
        let total: f64 = p.iter().sum();
        let base_sum = d * s - d * offset;
        // extrusion by τ ∈ (0, height) along 𝟏/√d adds τ·√d to the sum
        let tau = (total - base_sum) / d.sqrt();
        if !(0.0 < tau && tau < height) {
            return false;
        }
        // project back to the base hyperplane and test the cross-section
        let back: Vec<f64> = p
            .iter()
            .map(|&pi| pi - tau / d.sqrt() + offset)
            .collect();
        // `back` should now lie in the cross-section of the half-size ball
        // by {Σx = ds}
        let sum_back: f64 = back.iter().sum();
        if (sum_back - d * s).abs() > 1e-9 * d * s {
            return false;
        }
        let half = self.s / 4.0;
        match self.kind {
            NormKind::Linf => back.iter().all(|&b| (b - s).abs() < half),
            NormKind::L2 => back.iter().map(|&b| (b - s) * (b - s)).sum::<f64>() < half * half,
            NormKind::L1 => unreachable!(),
        }
    }

    /// Exact log-measure of the prism: `λ(Δ)·(e^{-T₀} - e^{-T₁})/√d` with
    /// the cross-section measure in closed form.
    pub fn prism_log_measure(&self) -> f64 {
        let d = self.dim as f64;
        let s = self.s;
        let (t0, t1, section) = match (self.kind, self.dim) {
            // cube: basis Δ - (s/2)𝟏 at Σ = ds/2, height √d·s
            (NormKind::Linf, 2) => (d * s / 2.0, 3.0 * d * s / 2.0, s / std::f64::consts::SQRT_2),
            (NormKind::Linf, 3) => (
                d * s / 2.0,
                3.0 * d * s / 2.0,
                3.0 * 3.0f64.sqrt() * s * s / 16.0,
            ),
            // ball: basis Δ̃ - (s/(2√d))𝟏 at Σ = ds - (√d/2)s, height s
            (NormKind::L2, 2) => (
                d * s - d.sqrt() * s / 2.0,
                d * s + d.sqrt() * s / 2.0,
                s / 2.0,
            ),
            (NormKind::L2, 3) => (
                d * s - d.sqrt() * s / 2.0,
                d * s + d.sqrt() * s / 2.0,
                std::f64::consts::PI * s * s / 16.0,
            ),
            _ => unreachable!(),
        };
        section.ln() - 0.5 * d.ln() + ln_exp_diff(t0, t1)
    }

    /// Log-measure of the base ball by the best deterministic route
    /// (exact product for cubes, quadrature for planar balls, Monte Carlo
    /// with an internal fixed seed for `d = 3` balls).
    pub fn base_log_measure(&self, n: u64, seed: u64) -> Result<MeasureEstimate> {
        let ball = self.base_ball();
        match (self.kind, self.dim) {
            (NormKind::Linf, _) => mu_cube_exact(&ball.center, ball.radius),
            (NormKind::L2, 2) => mu_best(&ball, quad::DEFAULT_REL_TOL),
            _ => crate::measure::mu_montecarlo(&ball, None, n, seed),
        }
    }

    /// The envelope prediction for the base measure:
    /// `e^{-ds/2}` for cubes, `s^{(d-1)/2}·e^{-s(d - √d/2)}` for balls.
    pub fn base_envelope_log(&self) -> f64 {
        let d = self.dim as f64;
        let s = self.s;
        match self.kind {
            NormKind::Linf => -d * s / 2.0,
            NormKind::L2 => 0.5 * (d - 1.0) * (s / 2.0).ln() - s * (d - d.sqrt() / 2.0),
            NormKind::L1 => unreachable!(),
        }
    }

    /// Bounding box of the union region (per coordinate).
    pub fn region_bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.s;
        (vec![s / 4.0; self.dim], vec![7.0 * s / 4.0; self.dim])
    }
}

impl geometry::Region for SweptFamily {
    fn dim(&self) -> usize {
        self.dim
    }
    fn region_contains(&self, p: &[f64]) -> bool {
        SweptFamily::region_contains(self, p)
    }
    fn region_bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        SweptFamily::region_bounding_box(self)
    }
}

/// Monte Carlo measure of an arbitrary region in diagonal coordinates:
/// `t = Σx` drawn from the truncated exponential on `(t_lo, t_hi)`, the
/// transverse component uniform on a centered box of half-width `y_half`
/// in an orthonormal basis of `𝟏^⊥`.
pub fn region_measure_diagonal_mc(
    contains: &dyn Fn(&[f64]) -> bool,
    dim: usize,
    t_lo: f64,
    t_hi: f64,
    y_half: f64,
    n: u64,
    seed: u64,
) -> Result<MeasureEstimate> {
    if n < 1_000 {
        return Err(Error::domain("Monte Carlo needs n ≥ 1000"));
    }
    let d = dim as f64;
    // orthonormal basis of the hyperplane 𝟏^⊥ from the cone frame: the
    // images of e₂, …, e_d under the involution sending 𝟏/√d to e₁
    let frame = geometry::ConeFrame::new(dim)?;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for i in 1..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        basis.push(frame.rotate_inv(&e));
    }
    let span = -(-(t_hi - t_lo)).exp_m1(); // 1 - e^{-(t_hi - t_lo)}
    // log of the sampling-cell mass: ∫ e^{-t} dt × vol(Y) / √d
    let log_const = ln_exp_diff(t_lo, t_hi)
        + ((dim - 1) as f64) * (2.0 * y_half).ln()
        - 0.5 * d.ln();

    let per_batch = n / SUBSTREAMS as u64;
    let n_eff = per_batch * SUBSTREAMS as u64;
    let batch_means: Vec<f64> = (0..SUBSTREAMS as u64)
        .map(|b| {
            let mut rng = substream(seed, b);
            let mut hits = 0u64;
            let mut p = vec![0.0f64; dim];
            for _ in 0..per_batch {
                let u: f64 = rng.gen();
                let t = t_lo - (-u * span).ln_1p();
                for (ax, slot) in p.iter_mut().enumerate() {
                    let _ = ax;
                    *slot = t / d;
                }
                for bvec in &basis {
                    let y = rng.gen_range(-y_half..y_half);
                    for (slot, &bv) in p.iter_mut().zip(bvec) {
                        *slot += y * bv;
                    }
                }
                if contains(&p) {
                    hits += 1;
                }
            }
            hits as f64 / per_batch as f64
        })
        .collect();

    let mean = batch_means.iter().sum::<f64>() / SUBSTREAMS as f64;
    if mean == 0.0 {
        return Ok(MeasureEstimate {
            log_value: f64::NEG_INFINITY,
            method: Method::MonteCarlo,
            rel_stderr: f64::INFINITY,
            samples: n_eff,
            zero_hits: true,
        });
    }
    let var = batch_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (SUBSTREAMS as f64 - 1.0);
    Ok(MeasureEstimate {
        log_value: log_const + mean.ln(),
        method: Method::MonteCarlo,
        rel_stderr: (var / SUBSTREAMS as f64).sqrt() / mean,
        samples: n_eff,
        zero_hits: false,
    })
}

/// One row of the counterexample sweep: union and base log-measures, their
/// log-ratio (the weak functional surrogate), and the analytic prism lower
/// bound for the ratio.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub family: String,
    pub s_or_n: f64,
    pub log_base_measure: f64,
    pub log_union_measure: f64,
    pub log_ratio: f64,
    pub analytic_prediction_log: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub rel_stderr: f64,
}

/// `log μ(Ê_s) - log μ(E_s)` for a swept family, with the analytic column
/// `log μ(R_s) - log μ(E_s)` (prism lower bound over base envelope).
pub fn counterexample_ratio(family: &SweptFamily, n: u64, seed: u64) -> Result<RatioRow> {
    let d = family.dim as f64;
    let s = family.s;
    let (t_lo, t_hi, y_half) = match family.kind {
        NormKind::Linf => (
            d * s / 2.0,
            3.0 * d * s / 2.0,
            0.75 * d.sqrt() * s,
        ),
        NormKind::L2 => (
            d * s - d.sqrt() * s / 2.0 - 1e-9,
            d * s + d.sqrt() * s / 2.0,
            0.75 * d.sqrt() * s,
        ),
        NormKind::L1 => unreachable!(),
    };
    let contains = |p: &[f64]| family.region_contains(p);
    let union = region_measure_diagonal_mc(&contains, family.dim, t_lo, t_hi, y_half, n, seed)?;
    if union.zero_hits {
        return Err(Error::ZeroHits { n });
    }
    let base = family.base_log_measure(n, seed ^ 0x5EED)?;
    Ok(RatioRow {
        family: family.kind.tag().to_string(),
        s_or_n: s,
        log_base_measure: base.log_value,
        log_union_measure: union.log_value,
        log_ratio: union.log_value - base.log_value,
        analytic_prediction_log: family.prism_log_measure() - base.log_value,
        n_samples: union.samples,
        seed,
        rel_stderr: union.rel_stderr.max(base.rel_stderr),
    })
}

/// The diamond witness: `f dμ` approximates the Dirac mass at
/// `(0, …, 0, N)` by an `ε`-cube indicator normalized in `L¹(dμ)`; any point
/// `ξ` with `|ξ|₁ < N` sees a large diamond average, quantified by the
/// closed-form lower bound `e^s / (1 + s - ξ_d)^{d-1}` with `s = |ξ|₁`.
#[derive(Debug, Clone, Serialize)]
pub struct DiamondWitness {
    pub n_param: f64,
    pub dim: usize,
    pub epsilon: f64,
    /// `log λ` with `λ = N^{1-d} e^N`.
    pub log_lambda: f64,
}

impl DiamondWitness {
    pub fn new(n_param: f64, dim: usize, epsilon: f64) -> Result<Self> {
        if !(n_param >= 8.0) {
            return Err(Error::domain("witness needs N ≥ 8"));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::domain("witness dimensions are 2 and 3"));
        }
        if !(epsilon > 0.0 && epsilon <= 0.01 * n_param) {
            return Err(Error::domain("smoothing needs 0 < ε ≤ 0.01·N"));
        }
        Ok(DiamondWitness {
            n_param,
            dim,
            epsilon,
            log_lambda: n_param + (1.0 - dim as f64) * n_param.ln(),
        })
    }

    /// Center of the mass cube `(ε, …, ε, N)`.
    pub fn mass_center(&self) -> Vec<f64> {
        let mut c = vec![self.epsilon; self.dim];
        c[self.dim - 1] = self.n_param;
        c
    }

    /// The normalized witness function evaluated at a point:
    /// `χ_Q((ε,…,ε,N), ε) / μ(Q)`.
    pub fn witness_density(&self) -> Result<(geometry::Ball, f64)> {
        let cube = geometry::Ball::new(
            NormKind::Linf,
            OrthantPoint::new(self.mass_center())?,
            self.epsilon,
        )?;
        let log_mass = mu_cube_exact(&cube.center, cube.radius)?.log_value;
        Ok((cube, log_mass))
    }

    /// `log` of the closed-form lower bound for the diamond maximal function
    /// at `ξ`: `s - (d-1)·ln(1 + s - ξ_d)`, with `s = |ξ|₁ < N`.
    pub fn lower_bound_log(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        if xi.iter().any(|&c| c <= 0.0) {
            return Err(Error::domain("ξ must lie in the open orthant"));
        }
        let s: f64 = xi.iter().sum();
        if s >= self.n_param {
            return Err(Error::domain("lower bound requires |ξ|₁ < N"));
        }
        let trans = 1.0 + s - xi[self.dim - 1];
        Ok(s - (self.dim as f64 - 1.0) * trans.ln())
    }

    /// The witness diamond used by the lower-bound certificate at `ξ`:
    /// centered at `(ξ₁, …, ξ_{d-1}, ξ_d + M)` with `M > N + s`, so it
    /// contains both `ξ` and the mass cube.
    pub fn witness_diamond(&self, xi: &[f64]) -> Result<geometry::Ball> {
        let s: f64 = xi.iter().sum();
        let m = self.n_param + s + 1.0;
        let mut c = xi.to_vec();
        c[self.dim - 1] += m;
        geometry::Ball::new(NormKind::L1, OrthantPoint::new(c)?, m * (1.0 + 1e-12))
    }

    /// `log(λ · μ{ξ : lower_bound(ξ) ≥ c·λ})`: the weak-functional surrogate
    /// of the witness.
    ///
    /// The level set at fixed `s = |ξ|₁` is the simplex
    /// `Σ_{i<d} ξ_i < min(g(s), s)` with
    /// `g(s) = (e^s/(cλ))^{1/(d-1)} - 1`, whose shell measure is closed
    /// form; the `s`-integral is evaluated by adaptive quadrature. A
    /// diagonal Monte Carlo route is available as a cross-check.
    pub fn weak_functional_log(&self, c: f64) -> Result<f64> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::domain("level fraction must lie in (0, 1]"));
        }
        let d = self.dim as f64;
        let log_cl = c.ln() + self.log_lambda;
        let s_min = log_cl.max(0.0);
        if s_min >= self.n_param {
            return Err(Error::domain("empty level set"));
        }
        let fact: f64 = (1..self.dim).product::<usize>() as f64;
        let integral = quad::integrate(
            |s| {
                let g = ((s - log_cl) / (d - 1.0)).exp() - 1.0;
                if g <= 0.0 {
                    return 0.0;
                }
                let m = g.min(s);
                (-(s - s_min)).exp() * m.powf(d - 1.0) / fact
            },
            s_min,
            self.n_param,
            1e-9,
        );
        if integral <= 0.0 {
            return Err(Error::domain("empty level set"));
        }
        Ok(self.log_lambda + integral.ln() - s_min)
    }

    /// Monte Carlo estimate of the same functional (used as an independent
    /// route in d = 3).
    pub fn weak_functional_log_mc(&self, c: f64, n: u64, seed: u64) -> Result<f64> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::domain("level fraction must lie in (0, 1]"));
        }
        let log_cl = c.ln() + self.log_lambda;
        let t_lo = log_cl.max(0.0);
        let t_hi = self.n_param;
        if t_lo >= t_hi {
            return Err(Error::domain("empty level set"));
        }
        let y_half = t_hi; // transverse extent of the orthant slice
        let contains = |p: &[f64]| -> bool {
            if p.iter().any(|&x| x <= 0.0) {
                return false;
            }
            match self.lower_bound_log(p) {
                Ok(lb) => lb >= log_cl,
                Err(_) => false,
            }
        };
        let est = region_measure_diagonal_mc(&contains, self.dim, t_lo, t_hi, y_half, n, seed)?;
        if est.zero_hits {
            return Err(Error::ZeroHits { n });
        }
        Ok(self.log_lambda + est.log_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn planar_cube_family_segment_and_membership() {
        let fam = SweptFamily::cube(4.0, 2).unwrap();
        let (a, b) = fam.segment_endpoints().unwrap();
        assert_eq!(a, vec![3.0, 5.0]);
        assert_eq!(b, vec![5.0, 3.0]);
        // membership via the admissible center (4.5, 3.5)
        assert!(fam.region_contains(&[5.5, 2.5]));
        // base ball is inside the region (its center is admissible)
        assert!(fam.region_contains(&fam.base_center()));
        // far away point is not
        assert!(!fam.region_contains(&[20.0, 20.0]));
        // the base measure for s = 4 is (e^{-2} - e^{-6})²
        let base = fam.base_log_measure(10_000, 0).unwrap();
        let expect = ((-2.0f64).exp() - (-6.0f64).exp()).powi(2);
        assert_relative_eq!(base.log_value, expect.ln(), epsilon = 1e-12);
    }

    #[test]
    fn ball_family_membership_matches_direct_segment_search() {
        let fam = SweptFamily::ball(4.0, 2).unwrap();
        let (a, b) = fam.segment_endpoints().unwrap();
        let mut rng = crate::rng::master(3);
        for _ in 0..2000 {
            let p = [rng.gen_range(0.5..9.0), rng.gen_range(0.5..9.0)];
            // brute-force min distance over the segment
            let mut best = f64::INFINITY;
            for k in 0..=400 {
                let t = k as f64 / 400.0;
                let c = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                best = best.min(d);
            }
            let expect = best < fam.radius();
            // skip points too close to the decision boundary for the coarse
            // segment scan to be authoritative
            if (best - fam.radius()).abs() < 1e-2 {
                continue;
            }
            assert_eq!(fam.region_contains(&p), expect, "p = {p:?}");
        }
    }

    #[test]
    fn membership_of_swept_regions_in_three_dimensions() {
        for fam in [
            SweptFamily::cube(4.0, 3).unwrap(),
            SweptFamily::ball(4.0, 3).unwrap(),
        ] {
            assert!(fam.region_contains(&fam.base_center()));
            // a point of the base ball is in the union
            assert!(fam.region_contains(&[4.0, 4.0, 5.2]));
            assert!(!fam.region_contains(&[12.0, 12.0, 12.0]));
        }
    }

    #[test]
    fn prisms_are_inside_the_unions() {
        let mut rng = crate::rng::master(7);
        for dim in [2usize, 3] {
            for fam in [
                SweptFamily::cube(6.0, dim).unwrap(),
                SweptFamily::ball(6.0, dim).unwrap(),
            ] {
                let (lo, hi) = fam.region_bounding_box();
                let mut inside = 0;
                let mut tried = 0;
                while inside < 2000 && tried < 400_000 {
                    tried += 1;
                    let p: Vec<f64> = (0..dim)
                        .map(|ax| rng.gen_range(lo[ax] * 0.5..hi[ax] * 1.2))
                        .collect();
                    if fam.prism_contains(&p) {
                        inside += 1;
                        assert!(
                            fam.region_contains(&p),
                            "prism point escaped the union: {p:?} ({}, d={dim})",
                            fam.kind.tag()
                        );
                    }
                }
                assert!(inside >= 2000, "prism sampler starved");
            }
        }
    }

    #[test]
    fn diagonal_mc_matches_exact_cube_measure() {
        // measure a plain cube through the diagonal sampler
        let cube = geometry::Ball::new(
            NormKind::Linf,
            OrthantPoint::new(vec![3.0, 3.0]).unwrap(),
            1.0,
        )
        .unwrap();
        let contains = |p: &[f64]| cube.contains(p).unwrap_or(false);
        let est =
            region_measure_diagonal_mc(&contains, 2, 4.0, 8.0, 2.0, 400_000, 17).unwrap();
        let exact = mu_cube_exact(&cube.center, cube.radius).unwrap();
        let diff = (est.log_value.exp() - exact.log_value.exp()).abs();
        assert!(diff <= 3.0 * est.rel_stderr * exact.log_value.exp());
    }

    #[test]
    fn union_ratio_is_nonnegative_and_grows() {
        let n = 200_000;
        let r4 = counterexample_ratio(&SweptFamily::cube(4.0, 2).unwrap(), n, 11).unwrap();
        let r8 = counterexample_ratio(&SweptFamily::cube(8.0, 2).unwrap(), n, 11).unwrap();
        assert!(r4.log_ratio >= 0.0, "union contains the base ball");
        assert!(r8.log_ratio >= 0.0);
        let growth = (r8.log_ratio - r4.log_ratio).exp();
        assert!(growth >= 1.4, "cube ratio growth {growth}");
        // the prism alone gives log-ratio ≥ log s + O(1)
        assert!(r8.analytic_prediction_log >= (8.0f64).ln() - 2.0);
    }

    #[test]
    fn witness_level_and_lower_bound_values() {
        let w = DiamondWitness::new(16.0, 2, 0.01).unwrap();
        assert_relative_eq!(w.log_lambda, 16.0 - 16.0f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(w.log_lambda.exp(), 5.5538e5, max_relative = 1e-3);
        let lb = w.lower_bound_log(&[0.1, 14.9]).unwrap();
        assert_relative_eq!(lb.exp(), 15.0f64.exp() / 1.1, max_relative = 1e-12);
        assert!(lb >= w.log_lambda, "the sample point is in the level set");
    }

    #[test]
    fn witness_mass_is_normalized_and_contained_in_the_diamond() {
        let w = DiamondWitness::new(16.0, 2, 0.01).unwrap();
        let (cube, log_mass) = w.witness_density().unwrap();
        // f = χ/μ(Q) integrates to exactly 1 by construction
        assert!(log_mass.is_finite());
        let xi = [0.1, 14.9];
        let d = w.witness_diamond(&xi).unwrap();
        assert!(d.contains(&xi).unwrap());
        // all corners of the mass cube are inside the diamond
        for dx in [-1.0, 1.0] {
            for dy in [-1.0, 1.0] {
                let p = [
                    cube.center.coords()[0] + dx * 0.99 * cube.radius,
                    cube.center.coords()[1] + dy * 0.99 * cube.radius,
                ];
                assert!(d.contains(&p).unwrap(), "corner {p:?} escaped");
            }
        }
    }

    #[test]
    fn witness_functional_grows_like_log_n() {
        let f16 = DiamondWitness::new(16.0, 2, 0.01)
            .unwrap()
            .weak_functional_log(LEVEL_FRACTION)
            .unwrap();
        let f32 = DiamondWitness::new(32.0, 2, 0.01)
            .unwrap()
            .weak_functional_log(LEVEL_FRACTION)
            .unwrap();
        let growth = (f32 - f16).exp();
        assert!(growth >= 1.1, "diamond functional growth {growth}");
    }

    #[test]
    fn witness_functional_is_monotone_in_the_level_fraction() {
        let w = DiamondWitness::new(16.0, 2, 0.01).unwrap();
        let f1 = w.weak_functional_log(0.2).unwrap();
        let f2 = w.weak_functional_log(0.4).unwrap();
        let f3 = w.weak_functional_log(0.8).unwrap();
        assert!(f1 >= f2 && f2 >= f3);
    }

    #[test]
    fn paper_admissible_region_is_inside_the_level_set() {
        // for s ∈ (N - (d-1)·ln N, N), points with ξ_i < N e^{(s-N)/(d-1)}/d
        // belong to the level set at fraction 1/4
        let w = DiamondWitness::new(32.0, 2, 0.01).unwrap();
        let n = w.n_param;
        let log_cl = LEVEL_FRACTION.ln() + w.log_lambda;
        let mut rng = crate::rng::master(23);
        for _ in 0..500 {
            let s = rng.gen_range(n - n.ln() + 1e-6..n - 1e-6);
            let cap = n * ((s - n) / 1.0).exp() / 2.0;
            let xi1 = rng.gen_range(0.0..cap).max(1e-12);
            let xi = [xi1, s - xi1];
            if xi[1] <= 0.0 {
                continue;
            }
            let lb = w.lower_bound_log(&xi).unwrap();
            assert!(lb >= log_cl, "ξ = {xi:?}, s = {s}");
        }
    }

    #[test]
    fn quadrature_and_mc_functionals_agree_in_dimension_three() {
        let w = DiamondWitness::new(16.0, 3, 0.01).unwrap();
        let a = w.weak_functional_log(LEVEL_FRACTION).unwrap();
        let b = w
            .weak_functional_log_mc(LEVEL_FRACTION, 2_000_000, 29)
            .unwrap();
        assert_relative_eq!(a, b, max_relative = 0.05);
    }
}
