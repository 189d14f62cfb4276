//! Orchestrated sweeps assembling the weak-type blow-up versus `L^p`
//! stability evidence at desk scale.
//!
//! Every table row carries the seed and a hash of the resolved sweep
//! specification, and reruns are bit-identical: ladder entries are
//! independent and aggregated in ladder order.

use crate::counterexamples::{
    counterexample_ratio, DiamondWitness, SweptFamily, LEVEL_FRACTION,
};
use crate::error::{Error, Result};
use crate::geometry::NormKind;
use crate::grid::GridFunction;
use crate::maximal::{
    lambda_ladder, maximal_function, norms_and_weak, CandidatePolicy, Weighting,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Growth-factor acceptance thresholds: calibrations of the asymptotic
/// rates (linear in `s`, `√s`, `log N`, bounded) with desk-scale slack.
/// Configuration constants of this artifact, not literature values.
pub mod thresholds {
    /// Swept cubes: ratio growth per doubling of `s` (rate: linear).
    pub const CUBE_GROWTH_MIN: f64 = 1.4;
    /// Swept balls: ratio growth per doubling of `s` (rate: `√s`).
    pub const BALL_GROWTH_MIN: f64 = 1.3;
    /// Diamond witness: functional growth per doubling of `N` (rate: `log N`).
    pub const DIAMOND_GROWTH_MIN: f64 = 1.1;
    /// Grid-route weak functional growth per doubling (non-centered).
    pub const GRID_WEAK_GROWTH_MIN: f64 = 1.3;
    /// `L^p` ratio growth per doubling of the domain (rate: bounded).
    pub const LP_GROWTH_MAX: f64 = 1.10;
    /// Centered weak functional growth per doubling (rate: bounded).
    pub const CENTERED_GROWTH_MAX: f64 = 1.2;
}

/// Which construction a sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    /// Swept cube family, measured by Monte Carlo union ratios.
    SweptCubes,
    /// Swept ball family, measured by Monte Carlo union ratios.
    SweptBalls,
    /// Diamond witness functional (quadrature over level shells).
    DiamondWitness,
    /// Grid evaluation of the maximal operator on the normalized half-size
    /// ball indicator.
    GridHalfBall,
}

/// A resolved sweep: operator kind, exponent, size ladder, grid resolution
/// policy and seed. The resolution policy is fixed across the ladder so
/// growth comparisons are like-for-like.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub operator: NormKind,
    pub p: f64,
    pub ladder: Vec<f64>,
    /// Grid cells per side for grid-route entries.
    pub cells_per_side: usize,
    /// Candidate ladder ratio (stride is 1).
    pub ladder_ratio: f64,
    pub family: FamilyTag,
    pub mc_samples: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ladder.len() < 2 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("ladder must be strictly increasing"));
        }
        if !(self.ladder_ratio > 1.0 && self.ladder_ratio <= 2.0) {
            return Err(Error::domain("ladder ratio must lie in (1, 2]"));
        }
        Ok(())
    }

    /// FNV-1a hash of the serialized spec, carried by every table row.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// One row of a scan table.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub family: String,
    pub size: f64,
    /// The scanned quantity in the log domain (weak functional or `L^p`
    /// ratio).
    pub value_log: f64,
    /// Linear-domain growth factor from the previous ladder entry.
    pub growth: Option<f64>,
    pub seed: u64,
    pub policy_hash: String,
}

/// A scan table plus its pass verdict against the thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct ScanTable {
    pub spec: SweepSpec,
    pub rows: Vec<ScanRow>,
    pub pass: bool,
}

impl ScanTable {
    fn from_values(spec: &SweepSpec, family: &str, values_log: Vec<f64>) -> ScanTable {
        let hash = spec.hash();
        let mut rows = Vec::with_capacity(values_log.len());
        for (i, (&size, &v)) in spec.ladder.iter().zip(&values_log).enumerate() {
            rows.push(ScanRow {
                family: family.to_string(),
                size,
                value_log: v,
                growth: if i == 0 {
                    None
                } else {
                    Some((v - values_log[i - 1]).exp())
                },
                seed: spec.seed,
                policy_hash: hash.clone(),
            });
        }
        ScanTable {
            spec: spec.clone(),
            rows,
            pass: true,
        }
    }

    pub fn min_growth(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.growth)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_growth(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.growth)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Write the table as CSV with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "family,size,value_log,growth,seed,policy_hash")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.12e},{},{},{}",
                r.family,
                r.size,
                r.value_log,
                r.growth.map_or(String::new(), |g| format!("{g:.8}")),
                r.seed,
                r.policy_hash
            )?;
        }
        Ok(())
    }
}

/// Build the normalized half-size-ball indicator for the grid route: the
/// domain is `(0, 2s)²` at the spec's resolution, `f = χ` of the half-size
/// ball of the family (the weak functional is invariant under the
/// normalization of `f`, which therefore stays at 1).
fn half_ball_grid(spec: &SweepSpec, s: f64) -> Result<GridFunction> {
    let n = spec.cells_per_side;
    let h = 2.0 * s / n as f64;
    GridFunction::from_fn(vec![0.0, 0.0], h, vec![n, n], |x| {
        let dist = spec.operator.distance(x, &[s, s]);
        if dist < s / 4.0 {
            1.0
        } else {
            0.0
        }
    })
}

fn grid_policy(spec: &SweepSpec, grid: &GridFunction) -> CandidatePolicy {
    let mut p = CandidatePolicy::default_for(grid);
    p.ladder_ratio = spec.ladder_ratio;
    p
}

/// The grid-route weak functional at one ladder size.
fn grid_weak_functional(spec: &SweepSpec, s: f64, centered: bool) -> Result<f64> {
    let f = half_ball_grid(spec, s)?;
    let policy = grid_policy(spec, &f);
    let mf = maximal_function(&f, spec.operator, &policy, Weighting::MuExp, centered)?;
    let lambdas = lambda_ladder(&mf, 48, 1e-7);
    let rep = norms_and_weak(&f, &mf, 1.0, &lambdas, Weighting::MuExp)?;
    Ok(rep.weak.functional_log)
}

/// Weak-type (1,1) blow-up scan: per ladder entry, the weak functional of
/// the requested family with growth factors between consecutive entries.
pub fn weak11_scan(spec: &SweepSpec) -> Result<ScanTable> {
    spec.validate()?;
    let (family, values): (&str, Vec<f64>) = match spec.family {
        FamilyTag::SweptCubes | FamilyTag::SweptBalls => {
            let make = |s: f64| -> Result<f64> {
                let fam = match spec.family {
                    FamilyTag::SweptCubes => SweptFamily::cube(s, 2)?,
                    _ => SweptFamily::ball(s, 2)?,
                };
                Ok(counterexample_ratio(&fam, spec.mc_samples, spec.seed)?.log_ratio)
            };
            let vals: Result<Vec<f64>> = spec.ladder.iter().map(|&s| make(s)).collect();
            (
                if spec.family == FamilyTag::SweptCubes {
                    "swept-cubes"
                } else {
                    "swept-balls"
                },
                vals?,
            )
        }
        FamilyTag::DiamondWitness => {
            let vals: Result<Vec<f64>> = spec
                .ladder
                .iter()
                .map(|&n| {
                    DiamondWitness::new(n, 2, 0.01)?.weak_functional_log(LEVEL_FRACTION)
                })
                .collect();
            ("diamond-witness", vals?)
        }
        FamilyTag::GridHalfBall => {
            let vals: Result<Vec<f64>> = spec
                .ladder
                .par_iter()
                .map(|&s| grid_weak_functional(spec, s, false))
                .collect();
            ("grid-half-ball", vals?)
        }
    };
    let mut table = ScanTable::from_values(spec, family, values);
    let min_growth = table.min_growth();
    table.pass = match spec.family {
        FamilyTag::SweptCubes => min_growth >= thresholds::CUBE_GROWTH_MIN,
        FamilyTag::SweptBalls => min_growth >= thresholds::BALL_GROWTH_MIN,
        FamilyTag::DiamondWitness => min_growth >= thresholds::DIAMOND_GROWTH_MIN,
        FamilyTag::GridHalfBall => min_growth >= thresholds::GRID_WEAK_GROWTH_MIN,
    };
    Ok(table)
}

/// The test-function family for the `L^p` scan: the normalized half-size
/// ball indicator, the swept-region indicator, and ten seeded exponential
/// bumps `e^{-|x - x₀|₁}` (these realize the known worst directions).
fn lp_test_family(spec: &SweepSpec, s: f64) -> Result<Vec<GridFunction>> {
    let n = spec.cells_per_side;
    let h = 2.0 * s / n as f64;
    let mut family = Vec::new();
    family.push(half_ball_grid(spec, s)?);
    let swept = SweptFamily::cube(s, 2)?;
    family.push(GridFunction::from_fn(
        vec![0.0, 0.0],
        h,
        vec![n, n],
        |x| {
            if swept.region_contains(x) {
                1.0
            } else {
                0.0
            }
        },
    )?);
    let mut rng = crate::rng::substream(spec.seed, 0x1F);
    use rand::Rng;
    for _ in 0..10 {
        let x0 = [
            rng.gen_range(0.1 * 2.0 * s..0.9 * 2.0 * s),
            rng.gen_range(0.1 * 2.0 * s..0.9 * 2.0 * s),
        ];
        family.push(GridFunction::from_fn(
            vec![0.0, 0.0],
            h,
            vec![n, n],
            |x| (-((x[0] - x0[0]).abs() + (x[1] - x0[1]).abs())).exp(),
        )?);
    }
    Ok(family)
}

/// `L^p` stability scan: per ladder entry (domain `(0, 2s)²`), the largest
/// `‖Mf‖_p/‖f‖_p` over the test family; the growth factors per doubling
/// stay below [`thresholds::LP_GROWTH_MAX`] when the operator is bounded.
/// Refuses `p = 1` with a domain error (use the weak-type scan there).
pub fn lp_scan(spec: &SweepSpec) -> Result<ScanTable> {
    spec.validate()?;
    if !(spec.p > 1.0) {
        return Err(Error::domain(
            "the L^p scan requires p > 1; use the weak-type scan at p = 1",
        ));
    }
    let values: Result<Vec<f64>> = spec
        .ladder
        .iter()
        .map(|&s| -> Result<f64> {
            let family = lp_test_family(spec, s)?;
            let ratios: Result<Vec<f64>> = family
                .par_iter()
                .map(|f| -> Result<f64> {
                    let policy = grid_policy(spec, f);
                    let mf =
                        maximal_function(f, spec.operator, &policy, Weighting::MuExp, false)?;
                    let rep = norms_and_weak(f, &mf, spec.p, &[1.0], Weighting::MuExp)?;
                    Ok(rep.lp_ratio_log.expect("p > 1"))
                })
                .collect();
            Ok(ratios?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max))
        })
        .collect();
    let mut table = ScanTable::from_values(spec, "lp-ratio", values?);
    table.pass = table.max_growth() < thresholds::LP_GROWTH_MAX;
    Ok(table)
}

/// One row of the centered/non-centered contrast.
#[derive(Debug, Clone, Serialize)]
pub struct ContrastRow {
    pub size: f64,
    pub centered_log: f64,
    pub noncentered_log: f64,
    pub centered_growth: Option<f64>,
    pub noncentered_growth: Option<f64>,
    pub seed: u64,
    pub policy_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContrastTable {
    pub spec: SweepSpec,
    pub rows: Vec<ContrastRow>,
    pub pass: bool,
}

impl ContrastTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "size,centered_log,noncentered_log,centered_growth,noncentered_growth,seed,policy_hash"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.12e},{:.12e},{},{},{},{}",
                r.size,
                r.centered_log,
                r.noncentered_log,
                r.centered_growth.map_or(String::new(), |g| format!("{g:.8}")),
                r.noncentered_growth
                    .map_or(String::new(), |g| format!("{g:.8}")),
                r.seed,
                r.policy_hash
            )?;
        }
        Ok(())
    }
}

/// Centered versus non-centered weak functionals on a shared ladder: the
/// centered functional stays within [`thresholds::CENTERED_GROWTH_MAX`] per
/// doubling while the non-centered one grows past
/// [`thresholds::GRID_WEAK_GROWTH_MIN`].
pub fn centered_contrast(spec: &SweepSpec) -> Result<ContrastTable> {
    spec.validate()?;
    let pairs: Result<Vec<(f64, f64)>> = spec
        .ladder
        .par_iter()
        .map(|&s| -> Result<(f64, f64)> {
            Ok((
                grid_weak_functional(spec, s, true)?,
                grid_weak_functional(spec, s, false)?,
            ))
        })
        .collect();
    let pairs = pairs?;
    let hash = spec.hash();
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, (&size, &(c, nc))) in spec.ladder.iter().zip(&pairs).enumerate() {
        rows.push(ContrastRow {
            size,
            centered_log: c,
            noncentered_log: nc,
            centered_growth: (i > 0).then(|| (c - pairs[i - 1].0).exp()),
            noncentered_growth: (i > 0).then(|| (nc - pairs[i - 1].1).exp()),
            seed: spec.seed,
            policy_hash: hash.clone(),
        });
    }
    let centered_ok = rows
        .iter()
        .filter_map(|r| r.centered_growth)
        .all(|g| g < thresholds::CENTERED_GROWTH_MAX);
    let noncentered_ok = rows
        .iter()
        .filter_map(|r| r.noncentered_growth)
        .all(|g| g >= thresholds::GRID_WEAK_GROWTH_MIN);
    Ok(ContrastTable {
        spec: spec.clone(),
        rows,
        pass: centered_ok && noncentered_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec(family: FamilyTag) -> SweepSpec {
        SweepSpec {
            operator: NormKind::Linf,
            p: 2.0,
            ladder: vec![4.0, 8.0, 16.0],
            cells_per_side: 96,
            ladder_ratio: 2f64.powf(0.25),
            family,
            mc_samples: 100_000,
            seed: 7,
        }
    }

    #[test]
    fn spec_validation_and_hash_stability() {
        let spec = base_spec(FamilyTag::SweptCubes);
        assert!(spec.validate().is_ok());
        assert_eq!(spec.hash(), spec.hash());
        let mut bad = spec.clone();
        bad.ladder = vec![8.0, 4.0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn weak_scan_of_swept_cubes_grows() {
        let table = weak11_scan(&base_spec(FamilyTag::SweptCubes)).unwrap();
        assert!(table.pass, "min growth {}", table.min_growth());
        // deterministic rerun
        let again = weak11_scan(&base_spec(FamilyTag::SweptCubes)).unwrap();
        for (a, b) in table.rows.iter().zip(&again.rows) {
            assert_eq!(a.value_log.to_bits(), b.value_log.to_bits());
        }
    }

    #[test]
    fn weak_scan_of_diamond_witness_grows() {
        let mut spec = base_spec(FamilyTag::DiamondWitness);
        spec.ladder = vec![8.0, 16.0, 32.0];
        let table = weak11_scan(&spec).unwrap();
        assert!(table.pass, "min growth {}", table.min_growth());
    }

    #[test]
    fn lp_scan_is_flat_and_rejects_p_one() {
        let mut spec = base_spec(FamilyTag::GridHalfBall);
        spec.ladder = vec![4.0, 8.0];
        spec.cells_per_side = 96;
        let table = lp_scan(&spec).unwrap();
        assert!(
            table.pass,
            "max growth {} rows {:?}",
            table.max_growth(),
            table.rows.iter().map(|r| r.value_log).collect::<Vec<_>>()
        );
        spec.p = 1.0;
        assert!(lp_scan(&spec).is_err());
    }

    #[test]
    fn contrast_separates_centered_from_noncentered() {
        let mut spec = base_spec(FamilyTag::GridHalfBall);
        spec.ladder = vec![4.0, 8.0, 16.0];
        spec.cells_per_side = 128;
        let table = centered_contrast(&spec).unwrap();
        assert!(
            table.pass,
            "rows: {:?}",
            table
                .rows
                .iter()
                .map(|r| (r.size, r.centered_log, r.noncentered_log))
                .collect::<Vec<_>>()
        );
        // pointwise: centered functional never exceeds the non-centered one
        for r in &table.rows {
            assert!(r.centered_log <= r.noncentered_log + 1e-12);
        }
    }

    #[test]
    fn csv_emission_has_header_and_rows() {
        let table = weak11_scan(&base_spec(FamilyTag::SweptCubes)).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("family,size,value_log,growth,seed,policy_hash"));
        assert_eq!(text.lines().count(), 1 + table.rows.len());
    }
}
