//! Measures of balls, cubes and diamonds under `μ` and `μ_α`, carried in the
//! log domain, with three evaluation routes: exact product formulas,
//! adaptive slice quadrature, and seeded importance-sampled Monte Carlo.

use crate::error::{Error, Result};
use crate::geometry::{diamond_slice_measure, minimizing_point, Ball, NormKind, OrthantPoint};
use crate::logdomain::ln_exp_diff;
use crate::quad;
use crate::rng::{substream, SUBSTREAMS};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How a measure value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "montecarlo",
        }
    }
}

/// A log-domain measure value with method tag and statistical error.
///
/// `rel_stderr` is 0 unless the method is Monte Carlo, and `samples` is
/// positive only for Monte Carlo. A zero-hit Monte Carlo run reports
/// `log_value = -∞` together with `zero_hits = true`; the caller must
/// enlarge `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub log_value: f64,
    pub method: Method,
    pub rel_stderr: f64,
    pub samples: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_hits: bool,
}

impl MeasureEstimate {
    pub fn exact(log_value: f64) -> Self {
        MeasureEstimate {
            log_value,
            method: Method::Exact,
            rel_stderr: 0.0,
            samples: 0,
            zero_hits: false,
        }
    }

    pub fn quadrature(log_value: f64) -> Self {
        MeasureEstimate {
            log_value,
            method: Method::Quadrature,
            rel_stderr: 0.0,
            samples: 0,
            zero_hits: false,
        }
    }

    /// Serialize with the external JSON schema
    /// `{"log_value", "method", "rel_stderr", "samples"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "log_value": if self.log_value.is_finite() { serde_json::json!(self.log_value) } else { serde_json::Value::Null },
            "method": self.method.tag(),
            "rel_stderr": self.rel_stderr,
            "samples": self.samples,
        })
    }
}

/// Laguerre-type exponents: the density `∏ |x_i|^{α_i} e^{-|x_i|}` with every
/// `α_i > -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreParams {
    alpha: Vec<f64>,
}

impl LaguerreParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.iter().any(|&a| !(a > -1.0)) {
            return Err(Error::domain("every Laguerre exponent must exceed -1"));
        }
        Ok(LaguerreParams { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }
}

/// `log μ(Q(x, r))` by the exact product formula
/// `∏_i (e^{-max(0, x_i - r)} - e^{-(x_i + r)})`, valid for every cube,
/// boundary truncation included.
pub fn mu_cube_exact(x: &OrthantPoint, r: f64) -> Result<MeasureEstimate> {
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let mut log = 0.0;
    for &xi in x.coords() {
        let a = (xi - r).max(0.0);
        let b = xi + r;
        log += ln_exp_diff(a, b);
    }
    Ok(MeasureEstimate::exact(log))
}

/// `log μ_α(Q(x, r))` via per-coordinate 1D adaptive quadrature of
/// `t^{α} e^{-t}` (cubes factor over coordinates). Falls back to the exact
/// product when `α = 0`.
pub fn mu_alpha_cube(x: &OrthantPoint, r: f64, alpha: &LaguerreParams) -> Result<MeasureEstimate> {
    if alpha.alpha().len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: alpha.alpha().len(),
        });
    }
    if alpha.is_zero() {
        return mu_cube_exact(x, r);
    }
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let mut log = 0.0;
    for (&xi, &ai) in x.coords().iter().zip(alpha.alpha()) {
        let lo = (xi - r).max(0.0);
        let hi = xi + r;
        // factor out e^{-lo} to keep the integrand O(1)
        let v = quad::integrate(|t| t.powf(ai) * (-(t - lo)).exp(), lo, hi, 1e-10);
        log += v.ln() - lo;
    }
    Ok(MeasureEstimate::quadrature(log))
}

/// `log μ(ball)` by slice quadrature: `μ = (1/√d) ∫ e^{-t} λ_t(slice) dt`
/// over the level sets of `x₀ = Σ x_i`, using the exact polytope slice for
/// diamonds (any `d ≤ 4`) and exact chord slices for Euclidean balls in
/// `d = 2`. Cubes and higher-dimensional Euclidean balls are refused with a
/// capability error; callers fall back to Monte Carlo (or the exact cube
/// product).
pub fn mu_quadrature(ball: &Ball, rel_tol: f64) -> Result<MeasureEstimate> {
    if !(rel_tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let d = ball.dim();
    let c = ball.center.coords();
    let r = ball.radius;
    let z0 = ball.center.l1();
    match ball.kind {
        NormKind::L1 => {
            let t_lo = (z0 - r).max(0.0);
            // cap the decaying tail at negligible relative mass
            let t_hi = (z0 + r).min(t_lo + 80.0 + 8.0 * d as f64);
            let sqrt_d = (d as f64).sqrt();
            let cvec = c.to_vec();
            let val = quad::integrate(
                |t| {
                    (-(t - t_lo)).exp() * diamond_slice_measure(&cvec, r, t).unwrap_or(0.0)
                        / sqrt_d
                },
                t_lo,
                t_hi,
                rel_tol,
            );
            Ok(MeasureEstimate::quadrature(val.ln() - t_lo))
        }
        NormKind::L2 if d == 2 => {
            let t_lo = (z0 - r * std::f64::consts::SQRT_2).max(0.0);
            let t_hi = z0 + r * std::f64::consts::SQRT_2;
            let (cx, cy) = (c[0], c[1]);
            // Along x + y = t the hit set {(u, t-u) ∈ B} is the u-interval
            // of u² - (a+b)u + (a² + b² - r²)/2 < 0 with a = cx, b = t - cy,
            // clipped to 0 < u < t; dx dy = dt du in this parameterization.
            let val = quad::integrate(
                |t| {
                    let a = cx;
                    let b = t - cy;
                    let mid = 0.5 * (a + b);
                    let q = 0.5 * (r * r - 0.5 * (a - b) * (a - b));
                    if q <= 0.0 {
                        return 0.0;
                    }
                    let w = q.sqrt();
                    let lo = (mid - w).max(0.0);
                    let hi = (mid + w).min(t);
                    (-(t - t_lo)).exp() * (hi - lo).max(0.0)
                },
                t_lo,
                t_hi,
                rel_tol,
            );
            Ok(MeasureEstimate::quadrature(val.ln() - t_lo))
        }
        NormKind::Linf => Err(Error::capability(
            "cube measures have an exact product formula; quadrature not provided",
        )),
        NormKind::L2 => Err(Error::capability(
            "Euclidean-ball quadrature is implemented for d = 2 only",
        )),
    }
}

/// Best available deterministic route for `μ(ball)`: exact for cubes,
/// quadrature for diamonds (`d ≤ 4`) and planar Euclidean balls.
pub fn mu_best(ball: &Ball, rel_tol: f64) -> Result<MeasureEstimate> {
    match ball.kind {
        NormKind::Linf => mu_cube_exact(&ball.center, ball.radius),
        _ => mu_quadrature(ball, rel_tol),
    }
}

/// Unbiased Monte Carlo estimate of `μ(ball)` (or `μ_α(ball)` when `alpha`
/// is given).
///
/// Sampling law: the exponential measure itself restricted to the ball's
/// bounding box, drawn per coordinate by inverse CDF and weighted by the box
/// mass; `μ_α` is handled by the importance ratio `∏ x_i^{α_i}`. The
/// standard error comes from batch means over 32 sub-streams derived from
/// the seed, so the result is bit-identical for a fixed seed regardless of
/// evaluation order.
pub fn mu_montecarlo(
    ball: &Ball,
    alpha: Option<&LaguerreParams>,
    n: u64,
    seed: u64,
) -> Result<MeasureEstimate> {
    if n < 1_000 {
        return Err(Error::domain("Monte Carlo needs n ≥ 1000"));
    }
    if let Some(a) = alpha {
        if a.alpha().len() != ball.dim() {
            return Err(Error::DimensionMismatch {
                expected: ball.dim(),
                got: a.alpha().len(),
            });
        }
    }
    let d = ball.dim();
    let c = ball.center.coords();
    let r = ball.radius;
    let lo: Vec<f64> = c.iter().map(|&x| (x - r).max(0.0)).collect();
    let hi: Vec<f64> = c.iter().map(|&x| x + r).collect();
    // log of the box mass under μ, and the per-coordinate spans
    // 1 - e^{-(hi-lo)} used by the inverse CDF
    let mut log_box = 0.0;
    for i in 0..d {
        log_box += ln_exp_diff(lo[i], hi[i]);
    }
    let spans: Vec<f64> = (0..d).map(|i| -(-(hi[i] - lo[i])).exp_m1()).collect();

    let per_batch = n / SUBSTREAMS as u64;
    let n_eff = per_batch * SUBSTREAMS as u64;
    let batch_means: Vec<f64> = (0..SUBSTREAMS as u64)
        .map(|b| {
            let mut rng = substream(seed, b);
            let mut acc = 0.0f64;
            let mut p = vec![0.0f64; d];
            for _ in 0..per_batch {
                for i in 0..d {
                    let u: f64 = rng.gen();
                    p[i] = lo[i] - (-u * spans[i]).ln_1p();
                }
                if ball.contains(&p).unwrap_or(false) {
                    acc += match alpha {
                        None => 1.0,
                        Some(a) => p
                            .iter()
                            .zip(a.alpha())
                            .map(|(&x, &al)| x.powf(al))
                            .product::<f64>(),
                    };
                }
            }
            acc / per_batch as f64
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
    let stderr = (var / SUBSTREAMS as f64).sqrt();
    Ok(MeasureEstimate {
        log_value: log_box + mean.ln(),
        method: Method::MonteCarlo,
        rel_stderr: stderr / mean,
        samples: n_eff,
        zero_hits: false,
    })
}

/// The sharp-envelope prediction for interior balls (`1 ≤ r ≤ min_i x_i`):
///
/// * cubes: `exp(-|z_∞|₁)`,
/// * Euclidean balls: `exp(-|z₂|₁)·r^{(d-1)/2}`,
/// * diamonds: `exp(-|z₁|₁)·r^{d-1}`,
///
/// multiplied by `∏ x_i^{α_i}` for the Laguerre-type variant. Returned in
/// the log domain.
pub fn asymptotic_prediction(ball: &Ball, alpha: Option<&LaguerreParams>) -> Result<f64> {
    if ball.radius < 1.0 || !ball.is_interior() {
        return Err(Error::domain(
            "envelope prediction requires 1 ≤ r ≤ min_i x_i",
        ));
    }
    let d = ball.dim() as f64;
    let z = minimizing_point(ball)?;
    let z1: f64 = z.iter().sum();
    let poly = match ball.kind {
        NormKind::Linf => 0.0,
        NormKind::L2 => 0.5 * (d - 1.0) * ball.radius.ln(),
        NormKind::L1 => (d - 1.0) * ball.radius.ln(),
    };
    let mut log = -z1 + poly;
    if let Some(a) = alpha {
        if a.alpha().len() != ball.dim() {
            return Err(Error::DimensionMismatch {
                expected: ball.dim(),
                got: a.alpha().len(),
            });
        }
        log += ball
            .center
            .coords()
            .iter()
            .zip(a.alpha())
            .map(|(&x, &al)| al * x.ln())
            .sum::<f64>();
    }
    Ok(log)
}

/// `μ(ball(x, 2r)) / μ(ball(x, r))` in the linear domain, computed by the
/// best available method (Monte Carlo with a fixed internal seed for
/// Euclidean balls in `d ≥ 3`).
pub fn doubling_ratio(kind: NormKind, x: &OrthantPoint, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let small = Ball::new(kind, x.clone(), r)?;
    let big = Ball::new(kind, x.clone(), 2.0 * r)?;
    let log = |b: &Ball| -> Result<f64> {
        match (b.kind, b.dim()) {
            (NormKind::Linf, _) => Ok(mu_cube_exact(&b.center, b.radius)?.log_value),
            (NormKind::L1, _) | (NormKind::L2, 2) => {
                Ok(mu_quadrature(b, quad::DEFAULT_REL_TOL)?.log_value)
            }
            _ => Ok(mu_montecarlo(b, None, 400_000, 0x0DD_BA11)?.log_value),
        }
    };
    Ok((log(&big)? - log(&small)?).exp())
}

/// Empirical local-doubling scan: the largest doubling ratio over a grid of
/// centers and radii `r ≤ radius_cap`.
#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub kind: NormKind,
    pub radius_cap: f64,
    pub max_ratio: f64,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
}

pub fn doubling_report(
    kind: NormKind,
    dim: usize,
    radius_cap: f64,
    grid_steps: usize,
) -> Result<DoublingReport> {
    if !(radius_cap > 0.0) || grid_steps < 2 {
        return Err(Error::domain("need radius_cap > 0 and at least 2 steps"));
    }
    let mut best = (1.0f64, vec![0.0; dim], radius_cap);
    for ci in 0..grid_steps {
        let coord = 0.5 + 20.0 * ci as f64 / (grid_steps - 1) as f64;
        let x = OrthantPoint::new(vec![coord; dim])?;
        for ri in 0..grid_steps {
            let r = radius_cap * (ri + 1) as f64 / grid_steps as f64;
            let ratio = doubling_ratio(kind, &x, r)?;
            if ratio > best.0 {
                best = (ratio, x.coords().to_vec(), r);
            }
        }
    }
    Ok(DoublingReport {
        kind,
        radius_cap,
        max_ratio: best.0,
        argmax_center: best.1,
        argmax_radius: best.2,
    })
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
    fn cube_product_matches_the_one_dimensional_value() {
        // d = 1, x = 2, r = 1: e^{-1} - e^{-3} = 0.31809237…
        let est = mu_cube_exact(&pt(&[2.0]), 1.0).unwrap();
        let expect = (-1.0f64).exp() - (-3.0f64).exp();
        assert_relative_eq!(est.log_value, expect.ln(), epsilon = 1e-12);
        // the d = 2 value is the square of the 1D value
        let est2 = mu_cube_exact(&pt(&[2.0, 2.0]), 1.0).unwrap();
        assert_relative_eq!(est2.log_value, 2.0 * expect.ln(), epsilon = 1e-12);
    }

    #[test]
    fn cube_total_mass_tends_to_one() {
        // x = r·𝟏 with large r exhausts the orthant, whose total mass is 1
        for d in 1..=4 {
            let est = mu_cube_exact(&pt(&vec![40.0; d]), 40.0).unwrap();
            assert!(est.log_value.abs() < 1e-8, "d={d}: {}", est.log_value);
        }
    }

    #[test]
    fn cube_quadrature_is_refused() {
        let q = ball(NormKind::Linf, &[2.0, 2.0], 1.0);
        assert!(matches!(mu_quadrature(&q, 1e-8), Err(Error::Capability(_))));
        let b3 = ball(NormKind::L2, &[2.0, 2.0, 2.0], 1.0);
        assert!(matches!(mu_quadrature(&b3, 1e-8), Err(Error::Capability(_))));
    }

    #[test]
    fn diamond_quadrature_hits_the_slice_integral() {
        // μ(D((3,3),2)) = 2(e^{-4} - e^{-8})
        let d = ball(NormKind::L1, &[3.0, 3.0], 2.0);
        let est = mu_quadrature(&d, 1e-8).unwrap();
        let expect = 2.0 * ((-4.0f64).exp() - (-8.0f64).exp());
        assert_relative_eq!(est.log_value, expect.ln(), max_relative = 1e-7);
    }

    #[test]
    fn corner_diamond_stays_below_total_mass() {
        // r ≥ |z|₁ includes the orthant corner; still a finite sub-probability
        let d = ball(NormKind::L1, &[1.0, 1.0], 3.0);
        let est = mu_quadrature(&d, 1e-8).unwrap();
        assert!(est.log_value < 0.0);
        assert!(est.log_value.is_finite());
    }

    #[test]
    fn planar_ball_quadrature_agrees_with_monte_carlo() {
        let b = ball(NormKind::L2, &[3.0, 3.0], 1.0);
        let q = mu_quadrature(&b, 1e-9).unwrap();
        let mc = mu_montecarlo(&b, None, 1_000_000, 42).unwrap();
        let diff = (q.log_value.exp() - mc.log_value.exp()).abs();
        let tol = 3.0 * mc.rel_stderr * mc.log_value.exp();
        assert!(diff <= tol, "diff {diff} vs 3σ {tol}");
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let q = ball(NormKind::Linf, &[2.0, 2.0], 1.0);
        let a = mu_montecarlo(&q, None, 50_000, 7).unwrap();
        let b = mu_montecarlo(&q, None, 50_000, 7).unwrap();
        assert_eq!(a.log_value.to_bits(), b.log_value.to_bits());
        assert_eq!(a.rel_stderr.to_bits(), b.rel_stderr.to_bits());
    }

    #[test]
    fn monte_carlo_matches_exact_cube() {
        let q = ball(NormKind::Linf, &[2.0, 2.0], 1.0);
        let exact = mu_cube_exact(&pt(&[2.0, 2.0]), 1.0).unwrap();
        let mc = mu_montecarlo(&q, None, 1_000_000, 3).unwrap();
        let diff = (mc.log_value.exp() - exact.log_value.exp()).abs();
        assert!(diff <= 3.0 * mc.rel_stderr * exact.log_value.exp());
    }

    #[test]
    fn small_ball_limit() {
        // radius 1e-3 around (2,2): μ ≈ vol·e^{-4} with vol = πr²
        let r = 1e-3;
        let b = ball(NormKind::L2, &[2.0, 2.0], r);
        let mc = mu_montecarlo(&b, None, 1_000_000, 5).unwrap();
        let expect = std::f64::consts::PI * r * r * (-4.0f64).exp();
        let diff = (mc.log_value.exp() - expect).abs();
        assert!(diff <= 3.0 * mc.rel_stderr * expect + 2e-4 * expect);
    }

    #[test]
    fn laguerre_reweighting_matches_alpha_cube_quadrature() {
        let alpha = LaguerreParams::new(vec![0.5, -0.25]).unwrap();
        let x = pt(&[2.0, 3.0]);
        let r = 1.0;
        let exact = mu_alpha_cube(&x, r, &alpha).unwrap();
        let q = ball(NormKind::Linf, &[2.0, 3.0], r);
        let mc = mu_montecarlo(&q, Some(&alpha), 1_000_000, 11).unwrap();
        let diff = (mc.log_value.exp() - exact.log_value.exp()).abs();
        assert!(
            diff <= 3.5 * mc.rel_stderr * exact.log_value.exp(),
            "diff {diff}, stderr {}",
            mc.rel_stderr
        );
    }

    #[test]
    fn envelope_predictions_match_closed_forms() {
        let q = ball(NormKind::Linf, &[3.0, 3.0], 1.0);
        assert_relative_eq!(asymptotic_prediction(&q, None).unwrap(), -4.0, epsilon = 1e-12);
        let b = ball(NormKind::L2, &[3.0, 3.0], std::f64::consts::SQRT_2);
        assert_relative_eq!(
            asymptotic_prediction(&b, None).unwrap(),
            -4.0 + 0.25 * 2.0f64.ln(),
            epsilon = 1e-12
        );
        let d = ball(NormKind::L1, &[4.0, 4.0], 2.0);
        assert_relative_eq!(
            asymptotic_prediction(&d, None).unwrap(),
            (2.0f64).ln() - 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn envelope_requires_interior_radius() {
        let q = ball(NormKind::Linf, &[3.0, 3.0], 0.5);
        assert!(asymptotic_prediction(&q, None).is_err());
        let q = ball(NormKind::Linf, &[3.0, 3.0], 4.0);
        assert!(asymptotic_prediction(&q, None).is_err());
    }

    #[test]
    fn doubling_small_radius_is_lebesgue() {
        let ratio = doubling_ratio(NormKind::Linf, &pt(&[5.0, 5.0]), 0.01).unwrap();
        assert_relative_eq!(ratio, 4.0, max_relative = 1e-3);
    }

    #[test]
    fn doubling_interior_cube_product_formula() {
        let ratio = doubling_ratio(NormKind::Linf, &pt(&[10.0, 10.0]), 1.0).unwrap();
        let e = std::f64::consts::E;
        let expect = ((e * e - (-2.0f64).exp()) / (e - (-1.0f64).exp())).powi(2);
        assert_relative_eq!(ratio, expect, max_relative = 1e-10);
    }

    #[test]
    fn doubling_grows_without_bound_for_large_radii() {
        let x = pt(&[32.0, 32.0]);
        let r4 = doubling_ratio(NormKind::Linf, &x, 4.0).unwrap();
        let r8 = doubling_ratio(NormKind::Linf, &x, 8.0).unwrap();
        assert!(r8 > r4, "not doubling: ratio must grow ({r4} vs {r8})");
    }

    #[test]
    fn doubling_report_is_finite_on_a_grid() {
        let rep = doubling_report(NormKind::Linf, 2, 1.0, 20).unwrap();
        assert!(rep.max_ratio.is_finite());
        assert!(rep.max_ratio >= 1.0);
    }

    #[test]
    fn measure_monotonicity_and_norm_nesting() {
        let x = pt(&[4.0, 5.0]);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let m1 = mu_best(&Ball::new(kind, x.clone(), 1.0).unwrap(), 1e-9)
                .unwrap()
                .log_value;
            let m2 = mu_best(&Ball::new(kind, x.clone(), 2.0).unwrap(), 1e-9)
                .unwrap()
                .log_value;
            assert!(m1 <= m2);
        }
        let d = mu_best(&ball(NormKind::L1, &[4.0, 5.0], 1.5), 1e-9).unwrap();
        let b = mu_best(&ball(NormKind::L2, &[4.0, 5.0], 1.5), 1e-9).unwrap();
        let q = mu_best(&ball(NormKind::Linf, &[4.0, 5.0], 1.5), 1e-9).unwrap();
        assert!(d.log_value <= b.log_value && b.log_value <= q.log_value);
    }

    #[test]
    fn zero_hit_estimates_serialize_with_null_log_value() {
        let z = MeasureEstimate {
            log_value: f64::NEG_INFINITY,
            method: Method::MonteCarlo,
            rel_stderr: f64::INFINITY,
            samples: 1000,
            zero_hits: true,
        };
        assert_eq!(z.to_json()["log_value"], serde_json::Value::Null);
        assert_eq!(z.to_json()["method"], "montecarlo");
    }
}
