//! The slicing-decay estimate: energy leaked by the maximal operator from a
//! unit slab to another decays exponentially in their separation.
//!
//! For Euclidean balls the experiment runs in the rotated planar frame with
//! weight `e^{-x₁}` on the cone `{|x₂| < x₁}` and slabs
//! `S_i = {i < x₁ ≤ i+1}`; for diamonds it runs in the original orthant
//! with weight `e^{-|x|₁}` and diagonal slabs `{i < x₀ ≤ i+1}`. A driver
//! fits the decay rate δ of
//! `∫_{S_j} [M(f·χ_{S_i})]^p dν / ∫_{S_i} f^p dν ≍ e^{-δ|j-i|}`.

use crate::error::{Error, Result};
use crate::geometry::NormKind;
use crate::grid::GridFunction;
use crate::maximal::{cell_weights, maximal_function, CandidatePolicy, Weighting};
use crate::rng::substream;
use rand::Rng;
use serde::Serialize;

/// Geometry of one slicing experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SlicingSetup {
    pub kind: NormKind,
    /// Base slab index `i` (the support slab).
    pub base: usize,
    /// Largest separation `|j - i|` measured.
    pub max_sep: usize,
    /// Grid spacing.
    pub spacing: f64,
}

impl Default for SlicingSetup {
    fn default() -> Self {
        SlicingSetup {
            kind: NormKind::L2,
            base: 2,
            max_sep: 6,
            spacing: 0.25,
        }
    }
}

impl SlicingSetup {
    fn weighting(&self) -> Weighting {
        match self.kind {
            NormKind::L2 => Weighting::NuCone2,
            _ => Weighting::MuExp,
        }
    }

    /// Slab coordinate of a point: `x₁` in the cone frame, `x₀ = Σx` in the
    /// orthant frame.
    fn slab_coord(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::L2 => x[0],
            _ => x.iter().sum(),
        }
    }

    fn grid_layout(&self) -> (Vec<f64>, Vec<usize>) {
        let top = (self.base + self.max_sep + 2) as f64;
        let h = self.spacing;
        match self.kind {
            NormKind::L2 => {
                let n0 = (top / h).round() as usize;
                let n1 = 2 * n0;
                (vec![0.0, -top], vec![n0, n1])
            }
            _ => {
                let n = (top / h).round() as usize;
                (vec![0.0, 0.0], vec![n, n])
            }
        }
    }

    fn empty_grid(&self) -> Result<GridFunction> {
        let (origin, dims) = self.grid_layout();
        let len = dims.iter().product();
        GridFunction::new(origin, self.spacing, dims, vec![0.0; len])
    }
}

/// One slab-to-slab energy profile:
/// `∫_{S_{i+k}} [M(f χ_{S_i})]^p dν / ∫_{S_i} f^p dν` for a random
/// nonnegative `f` supported in `S_i`, for all separations
/// `k = 0, …, max_sep` from a single operator evaluation.
pub fn slab_ratios(
    setup: &SlicingSetup,
    p: f64,
    policy: &CandidatePolicy,
    f_seed: u64,
) -> Result<Vec<f64>> {
    if !(p > 1.0) {
        return Err(Error::domain("slicing ratios need p > 1"));
    }
    if setup.kind == NormKind::Linf {
        return Err(Error::capability(
            "slicing decay is measured for diamonds and Euclidean balls",
        ));
    }
    let (origin, dims) = setup.grid_layout();
    let mut rng = substream(f_seed, 0x511C);
    let base = setup.base as f64;
    let f = GridFunction::from_fn(origin, setup.spacing, dims, |x| {
        let t = setup.slab_coord(x);
        let in_cone = match setup.kind {
            NormKind::L2 => x[1].abs() < x[0],
            _ => true,
        };
        if in_cone && t > base && t <= base + 1.0 {
            rng.gen_range(0.0..1.0)
        } else {
            0.0
        }
    })?;
    if f.values().iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; setup.max_sep + 1]);
    }
    let weighting = setup.weighting();
    let mf = maximal_function(&f, setup.kind, policy, weighting, false)?;
    let weights = cell_weights(&f, weighting)?;
    let cell = f.cell_volume();

    let mut denom = 0.0;
    for (flat, &v) in f.values().iter().enumerate() {
        if v > 0.0 {
            denom += v.powf(p) * weights[flat] * cell;
        }
    }
    let mut out = Vec::with_capacity(setup.max_sep + 1);
    for k in 0..=setup.max_sep {
        let jlo = base + k as f64;
        let mut num = 0.0;
        for (flat, &v) in mf.values().iter().enumerate() {
            if v <= 0.0 || weights[flat] <= 0.0 {
                continue;
            }
            let t = setup.slab_coord(&f.cell_center_flat(flat));
            if t > jlo && t <= jlo + 1.0 {
                num += v.powf(p) * weights[flat] * cell;
            }
        }
        out.push(num / denom);
    }
    Ok(out)
}

/// Fitted decay data: mean log-ratios per separation and the least-squares
/// slope δ of `-log ratio` against `|j - i|`.
#[derive(Debug, Clone, Serialize)]
pub struct SlicingFit {
    pub setup: SlicingSetup,
    pub p: f64,
    pub trials: usize,
    pub mean_log_ratios: Vec<f64>,
    pub delta: f64,
}

/// Run `trials` random functions and fit the decay rate.
pub fn fit_slicing_decay(
    setup: &SlicingSetup,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<SlicingFit> {
    let policy = CandidatePolicy::default_for(&setup.empty_grid()?);
    let mut sums = vec![0.0f64; setup.max_sep + 1];
    for t in 0..trials {
        let ratios = slab_ratios(setup, p, &policy, crate::rng::derive_seed(seed, t as u64))?;
        for (s, r) in sums.iter_mut().zip(&ratios) {
            if *r <= 0.0 {
                return Err(Error::domain(
                    "vanishing slab ratio; enlarge the grid or radii ladder",
                ));
            }
            *s += r.ln();
        }
    }
    let mean: Vec<f64> = sums.iter().map(|s| s / trials as f64).collect();
    // least squares of mean log-ratio against separation
    let n = mean.len() as f64;
    let kbar = (mean.len() - 1) as f64 / 2.0;
    let ybar = mean.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, &y) in mean.iter().enumerate() {
        let dk = k as f64 - kbar;
        num += dk * (y - ybar);
        den += dk * dk;
    }
    Ok(SlicingFit {
        setup: setup.clone(),
        p,
        trials,
        mean_log_ratios: mean,
        delta: -num / den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_slab_ratio_is_bounded() {
        let setup = SlicingSetup {
            kind: NormKind::L2,
            base: 2,
            max_sep: 0,
            spacing: 0.25,
        };
        let policy = CandidatePolicy::default_for(&setup.empty_grid().unwrap());
        for seed in 0..8 {
            let r = slab_ratios(&setup, 2.0, &policy, seed).unwrap()[0];
            assert!(r > 0.0 && r < 50.0, "seed {seed}: same-slab ratio {r}");
        }
    }

    #[test]
    fn ratios_reject_p_at_most_one() {
        let setup = SlicingSetup::default();
        let policy = CandidatePolicy::default_for(&setup.empty_grid().unwrap());
        assert!(slab_ratios(&setup, 1.0, &policy, 3).is_err());
    }

    #[test]
    fn decay_is_monotone_and_fast_enough_planar_balls() {
        let fit = fit_slicing_decay(&SlicingSetup::default(), 2.0, 6, 11).unwrap();
        for w in fit.mean_log_ratios.windows(2) {
            assert!(
                w[0] > w[1],
                "log-ratios must decrease: {:?}",
                fit.mean_log_ratios
            );
        }
        assert!(fit.delta >= 0.2, "fitted δ = {} too small", fit.delta);
    }

    #[test]
    fn diamond_slabs_decay_as_well() {
        let setup = SlicingSetup {
            kind: NormKind::L1,
            base: 2,
            max_sep: 5,
            spacing: 0.25,
        };
        let fit = fit_slicing_decay(&setup, 2.0, 4, 5).unwrap();
        for w in fit.mean_log_ratios.windows(2) {
            assert!(w[0] > w[1], "{:?}", fit.mean_log_ratios);
        }
        assert!(fit.delta > 0.0, "δ = {}", fit.delta);
    }
}
