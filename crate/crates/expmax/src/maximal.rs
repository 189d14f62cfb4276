//! Discretized non-centered, centered and strong maximal operators on grid
//! functions, with norms and weak-type functionals against `μ`.
//!
//! Candidate balls have centers on a strided subgrid of the cell centers and
//! radii on a geometric ladder. Averages use cell-center quadrature for both
//! numerator and denominator, so constants are reproduced exactly.
//!
//! Window sums are evaluated by block-decomposed sliding windows over
//! nonnegative data, never by subtracting prefix sums: the weight
//! `e^{-|x|₁}` spans dozens of orders of magnitude across a grid and prefix
//! differences would lose all relative accuracy in the light tail. Every
//! partial here is a direct sum of nonnegative terms.

use crate::error::{Error, Result};
use crate::geometry::NormKind;
use crate::grid::GridFunction;
use crate::logdomain::LogSumExp;
use serde::{Deserialize, Serialize};

/// Discretization of the uncountable supremum: candidate centers on a
/// strided subgrid, radii on a geometric ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePolicy {
    /// Center stride in grid cells (1 = every cell).
    pub center_stride: usize,
    /// Ladder ratio ρ ∈ (1, 2].
    pub ladder_ratio: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl CandidatePolicy {
    pub fn new(center_stride: usize, ladder_ratio: f64, r_min: f64, r_max: f64) -> Result<Self> {
        let p = CandidatePolicy {
            center_stride,
            ladder_ratio,
            r_min,
            r_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.center_stride == 0 {
            return Err(Error::domain("center stride must be at least 1"));
        }
        if !(self.ladder_ratio > 1.0 && self.ladder_ratio <= 2.0) {
            return Err(Error::domain("ladder ratio must lie in (1, 2]"));
        }
        if !(self.r_min > 0.0) || self.r_max < self.r_min {
            return Err(Error::domain("need 0 < r_min ≤ r_max"));
        }
        Ok(())
    }

    /// Default policy for a grid: stride 1, ρ = 2^{1/4}, radii from the
    /// spacing to the `ℓ¹` diameter of the grid box (which dominates the
    /// diameter in every supported norm).
    pub fn default_for(grid: &GridFunction) -> Self {
        let diam: f64 = grid
            .dims()
            .iter()
            .map(|&n| n as f64 * grid.spacing())
            .sum();
        CandidatePolicy {
            center_stride: 1,
            ladder_ratio: 2f64.powf(0.25),
            r_min: grid.spacing(),
            r_max: diam,
        }
    }

    /// The geometric radius ladder from `r_min` to `r_max` inclusive.
    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut r = self.r_min;
        while r < self.r_max * (1.0 - 1e-12) {
            out.push(r);
            r *= self.ladder_ratio;
        }
        out.push(self.r_max);
        out
    }
}

/// The weight attached to each grid cell (density at the cell center).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    /// `e^{-|x|₁}` with absolute values, valid on all of `ℝ^d`.
    MuExp,
    /// `e^{-x₁}` masked to the planar cone `{|x₂| < x₁}` (rotated-frame
    /// evaluations in d = 2).
    NuCone2,
}

impl Weighting {
    pub fn density(self, x: &[f64]) -> f64 {
        match self {
            Weighting::MuExp => (-x.iter().map(|c| c.abs()).sum::<f64>()).exp(),
            Weighting::NuCone2 => {
                debug_assert_eq!(x.len(), 2);
                if x[1].abs() < x[0] {
                    (-x[0]).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Per-cell density values for a grid.
pub fn cell_weights(grid: &GridFunction, weighting: Weighting) -> Result<Vec<f64>> {
    if weighting == Weighting::NuCone2 && grid.dim() != 2 {
        return Err(Error::capability("cone weighting is planar only"));
    }
    Ok((0..grid.len())
        .map(|i| weighting.density(&grid.cell_center_flat(i)))
        .collect())
}

// ---------------------------------------------------------------------------
// Cancellation-free sliding windows
// ---------------------------------------------------------------------------

/// `out[i] = Σ src[j]` over `j ∈ [i+lo, i+hi] ∩ [0, n)`.
///
/// Interior windows use block prefix/suffix accumulations (van Herk blocks
/// of the window length); border windows, clipped to the array, use the full
/// running prefix/suffix sums. All partials are direct sums of nonnegative
/// terms.
pub fn sliding_window_sum(src: &[f64], lo: i64, hi: i64, out: &mut Vec<f64>) {
    let n = src.len();
    out.clear();
    out.resize(n, 0.0);
    if n == 0 || hi < lo {
        return;
    }
    let w = (hi - lo + 1) as usize;
    let mut pref_full = vec![0.0f64; n];
    let mut suf_full = vec![0.0f64; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += src[i];
        pref_full[i] = acc;
    }
    acc = 0.0;
    for i in (0..n).rev() {
        acc += src[i];
        suf_full[i] = acc;
    }
    let mut pref = vec![0.0f64; n];
    let mut suf = vec![0.0f64; n];
    let mut b = 0;
    while b < n {
        let e = (b + w).min(n);
        let mut a = 0.0;
        for i in b..e {
            a += src[i];
            pref[i] = a;
        }
        a = 0.0;
        for i in (b..e).rev() {
            a += src[i];
            suf[i] = a;
        }
        b = e;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let a = i as i64 + lo;
        let bb = i as i64 + hi;
        if bb < 0 || a >= n as i64 {
            continue;
        }
        let clipped_lo = a < 0;
        let clipped_hi = bb >= n as i64;
        let a = a.max(0) as usize;
        let bb = bb.min(n as i64 - 1) as usize;
        *slot = match (clipped_lo, clipped_hi) {
            (true, true) => pref_full[n - 1],
            (true, false) => pref_full[bb],
            (false, true) => suf_full[a],
            (false, false) => {
                // exact window of length w: block pieces are adjacent or, at
                // a block start, coincide with the window
                if a / w == bb / w {
                    suf[a]
                } else {
                    suf[a] + pref[bb]
                }
            }
        };
    }
}

/// `out[i] = max src[j]` over the clipped window; `-∞` when empty.
pub fn sliding_window_max(src: &[f64], lo: i64, hi: i64, out: &mut Vec<f64>) {
    let n = src.len();
    out.clear();
    out.resize(n, f64::NEG_INFINITY);
    if n == 0 || hi < lo {
        return;
    }
    let w = (hi - lo + 1) as usize;
    let mut pref_full = vec![f64::NEG_INFINITY; n];
    let mut suf_full = vec![f64::NEG_INFINITY; n];
    let mut acc = f64::NEG_INFINITY;
    for i in 0..n {
        acc = acc.max(src[i]);
        pref_full[i] = acc;
    }
    acc = f64::NEG_INFINITY;
    for i in (0..n).rev() {
        acc = acc.max(src[i]);
        suf_full[i] = acc;
    }
    let mut pref = vec![f64::NEG_INFINITY; n];
    let mut suf = vec![f64::NEG_INFINITY; n];
    let mut b = 0;
    while b < n {
        let e = (b + w).min(n);
        let mut a = f64::NEG_INFINITY;
        for i in b..e {
            a = a.max(src[i]);
            pref[i] = a;
        }
        a = f64::NEG_INFINITY;
        for i in (b..e).rev() {
            a = a.max(src[i]);
            suf[i] = a;
        }
        b = e;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let a = i as i64 + lo;
        let bb = i as i64 + hi;
        if bb < 0 || a >= n as i64 {
            continue;
        }
        let clipped_lo = a < 0;
        let clipped_hi = bb >= n as i64;
        let a = a.max(0) as usize;
        let bb = bb.min(n as i64 - 1) as usize;
        *slot = match (clipped_lo, clipped_hi) {
            (true, true) => pref_full[n - 1],
            (true, false) => pref_full[bb],
            (false, true) => suf_full[a],
            (false, false) => {
                if a / w == bb / w {
                    suf[a]
                } else {
                    suf[a].max(pref[bb])
                }
            }
        };
    }
}

fn apply_axis<F: FnMut(&[f64], &mut Vec<f64>)>(
    data: &mut [f64],
    dims: &[usize],
    axis: usize,
    mut line_op: F,
) {
    match dims.len() {
        1 => {
            let mut out = Vec::new();
            line_op(data, &mut out);
            data.copy_from_slice(&out);
        }
        2 => {
            let (n0, n1) = (dims[0], dims[1]);
            let mut out = Vec::new();
            if axis == 1 {
                for r in 0..n0 {
                    line_op(&data[r * n1..(r + 1) * n1], &mut out);
                    data[r * n1..(r + 1) * n1].copy_from_slice(&out);
                }
            } else {
                let mut col = vec![0.0; n0];
                for c in 0..n1 {
                    for r in 0..n0 {
                        col[r] = data[r * n1 + c];
                    }
                    line_op(&col, &mut out);
                    for r in 0..n0 {
                        data[r * n1 + c] = out[r];
                    }
                }
            }
        }
        _ => unreachable!("fast axis ops are 1D/2D only"),
    }
}

/// Largest integer cell distance strictly below `r / h` (−1 when none).
fn strict_cells(r: f64, h: f64) -> i64 {
    let ratio = r / h;
    (((ratio * (1.0 - 1e-12)).ceil() as i64) - 1).max(-1)
}

/// Largest integer strictly below `(r/h)²`, for squared cell distances.
fn strict_cells_sq(r: f64, h: f64) -> i64 {
    let ratio = (r / h) * (r / h);
    (((ratio * (1.0 - 1e-12)).ceil() as i64) - 1).max(-1)
}

fn for_each_index(dims: &[i64], stride: i64, mut f: impl FnMut(&[i64])) {
    let d = dims.len();
    let mut idx = vec![0i64; d];
    loop {
        f(&idx);
        let mut ax = d;
        loop {
            if ax == 0 {
                return;
            }
            ax -= 1;
            idx[ax] += stride;
            if idx[ax] < dims[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// The maximal operators
// ---------------------------------------------------------------------------

/// `μ`-weighted mean of `f` over a ball: cell-center quadrature for both the
/// numerator and the denominator, over the cells of `f`'s grid whose centers
/// lie in the ball. Returns `None` when no cell center lies in the ball
/// (no candidate; excluded from suprema).
pub fn average_over_ball(
    f: &GridFunction,
    ball: &crate::geometry::Ball,
    weighting: Weighting,
) -> Result<Option<f64>> {
    if ball.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: ball.dim(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for flat in 0..f.len() {
        let x = f.cell_center_flat(flat);
        if ball.contains(&x)? {
            let w = weighting.density(&x);
            num += w * f.values()[flat];
            den += w;
        }
    }
    Ok(if den > 0.0 { Some(num / den) } else { None })
}

/// The discretized non-centered (or centered) maximal function of `f`.
///
/// At each grid point the result is the maximum of the weighted averages
/// over all candidate balls containing the point; with `centered = true` the
/// candidates are restricted to balls centered at the point itself. Points
/// contained in no candidate report 0.
pub fn maximal_function(
    f: &GridFunction,
    kind: NormKind,
    policy: &CandidatePolicy,
    weighting: Weighting,
    centered: bool,
) -> Result<GridFunction> {
    policy.validate()?;
    let weights = cell_weights(f, weighting)?;
    match f.dim() {
        1 | 2 => Ok(maximal_fast(f, kind, policy, &weights, centered)),
        3 => Ok(maximal_naive_impl(
            f,
            kind,
            policy,
            &weights,
            centered,
            CandidateFilter::All,
        )),
        d => Err(Error::capability(format!(
            "maximal operator evaluation supports d ≤ 3, got {d}"
        ))),
    }
}

/// Candidate admission for the reference evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateFilter {
    All,
    /// Only balls whose bounding box stays inside the closed orthant
    /// (`c_i ≥ r` per axis); used by reflection-comparison tests.
    BallInsideOrthant,
}

/// Reference implementation by direct candidate enumeration; cross-checks
/// the fast paths and serves `d = 3` grids. Candidates that cannot meet the
/// support box of `f` are pruned (their average is 0 and cannot raise the
/// supremum).
pub fn maximal_function_naive(
    f: &GridFunction,
    kind: NormKind,
    policy: &CandidatePolicy,
    weighting: Weighting,
    centered: bool,
    filter: CandidateFilter,
) -> Result<GridFunction> {
    policy.validate()?;
    let weights = cell_weights(f, weighting)?;
    Ok(maximal_naive_impl(
        f, kind, policy, &weights, centered, filter,
    ))
}

fn cell_in_kind(kind: NormKind, delta: &[i64], k: i64, k_sq: i64) -> bool {
    match kind {
        NormKind::Linf => delta.iter().all(|&d| d.abs() <= k),
        NormKind::L1 => delta.iter().map(|&d| d.abs()).sum::<i64>() <= k,
        NormKind::L2 => delta.iter().map(|&d| d * d).sum::<i64>() <= k_sq,
    }
}

fn dedup_radii(policy: &CandidatePolicy, h: f64) -> Vec<(i64, i64, f64)> {
    let mut out: Vec<(i64, i64, f64)> = Vec::new();
    for r in policy.radii() {
        let k = strict_cells(r, h);
        let ksq = strict_cells_sq(r, h);
        if k < 0 {
            continue;
        }
        if out.last().map(|&(a, b, _)| (a, b)) != Some((k, ksq)) {
            out.push((k, ksq, r));
        }
    }
    out
}

fn maximal_naive_impl(
    f: &GridFunction,
    kind: NormKind,
    policy: &CandidatePolicy,
    weights: &[f64],
    centered: bool,
    filter: CandidateFilter,
) -> GridFunction {
    let d = f.dim();
    let dims: Vec<i64> = f.dims().iter().map(|&n| n as i64).collect();
    let support = f.support_box();
    let mut out = f.zeros_like();
    let flat_of = |idx: &[i64]| -> usize {
        let mut fl = 0usize;
        for (ax, &i) in idx.iter().enumerate() {
            fl = fl * dims[ax] as usize + i as usize;
        }
        fl
    };

    for (k, ksq, r) in dedup_radii(policy, f.spacing()) {
        let stride = if centered { 1 } else { policy.center_stride as i64 };
        for_each_index(&dims, stride, |c| {
            let cf = flat_of(c);
            if weights[cf] <= 0.0 {
                return;
            }
            if filter == CandidateFilter::BallInsideOrthant {
                let x = f.cell_center_flat(cf);
                if x.iter().any(|&ci| ci - r < 0.0) {
                    return;
                }
            }
            if let Some((lo, hi)) = &support {
                let dist: Vec<i64> = (0..d)
                    .map(|ax| {
                        let lo = lo[ax] as i64;
                        let hi = hi[ax] as i64;
                        if c[ax] < lo {
                            lo - c[ax]
                        } else if c[ax] > hi {
                            c[ax] - hi
                        } else {
                            0
                        }
                    })
                    .collect();
                if !cell_in_kind(kind, &dist, k, ksq) {
                    return;
                }
            }
            let mut num = 0.0;
            let mut den = 0.0;
            let mut cells: Vec<usize> = Vec::new();
            let box_dims: Vec<i64> = vec![2 * k + 1; d];
            for_each_index(&box_dims, 1, |off| {
                let delta: Vec<i64> = off.iter().map(|&o| o - k).collect();
                if !cell_in_kind(kind, &delta, k, ksq) {
                    return;
                }
                let mut idx = vec![0i64; d];
                for ax in 0..d {
                    idx[ax] = c[ax] + delta[ax];
                    if idx[ax] < 0 || idx[ax] >= dims[ax] {
                        return;
                    }
                }
                let fl = flat_of(&idx);
                num += weights[fl] * f.values()[fl];
                den += weights[fl];
                if !centered {
                    cells.push(fl);
                }
            });
            if den <= 0.0 {
                return;
            }
            let avg = num / den;
            if centered {
                if avg > out.values()[cf] {
                    out.values_mut()[cf] = avg;
                }
            } else {
                for fl in cells {
                    if avg > out.values()[fl] {
                        out.values_mut()[fl] = avg;
                    }
                }
            }
        });
    }
    out
}

// --- fast paths -------------------------------------------------------------

fn maximal_fast(
    f: &GridFunction,
    kind: NormKind,
    policy: &CandidatePolicy,
    weights: &[f64],
    centered: bool,
) -> GridFunction {
    let mut out = f.zeros_like();
    let wf: Vec<f64> = weights
        .iter()
        .zip(f.values())
        .map(|(&w, &v)| w * v)
        .collect();

    for (k, ksq, _r) in dedup_radii(policy, f.spacing()) {
        let mut averages = match (f.dim(), kind) {
            (1, _) | (2, NormKind::Linf) => box_averages(f, weights, &wf, k),
            (2, NormKind::L1) => diamond_averages(f, weights, &wf, k),
            (2, NormKind::L2) => disc_averages(f, weights, &wf, ksq),
            _ => unreachable!(),
        };
        if centered {
            // candidates are centered at the evaluation point itself
            for (flat, (o, &a)) in out.values_mut().iter_mut().zip(&averages).enumerate() {
                if weights[flat] > 0.0 && a.is_finite() && a > *o {
                    *o = a;
                }
            }
        } else {
            mask_centers(f, weights, policy.center_stride, &mut averages);
            let dilated = match (f.dim(), kind) {
                (1, _) | (2, NormKind::Linf) => box_dilate(f, averages, k),
                (2, NormKind::L1) => diamond_dilate(f, averages, k),
                (2, NormKind::L2) => disc_dilate(f, averages, ksq),
                _ => unreachable!(),
            };
            for (o, &a) in out.values_mut().iter_mut().zip(&dilated) {
                if a.is_finite() && a > *o {
                    *o = a;
                }
            }
        }
    }
    out
}

fn mask_centers(f: &GridFunction, weights: &[f64], stride: usize, vals: &mut [f64]) {
    if stride == 1 {
        for (flat, v) in vals.iter_mut().enumerate() {
            if weights[flat] <= 0.0 {
                *v = f64::NEG_INFINITY;
            }
        }
        return;
    }
    for (flat, v) in vals.iter_mut().enumerate() {
        let on_stride = f.unflat(flat).iter().all(|&i| i % stride == 0);
        if !on_stride || weights[flat] <= 0.0 {
            *v = f64::NEG_INFINITY;
        }
    }
}

fn box_averages(f: &GridFunction, w: &[f64], wf: &[f64], k: i64) -> Vec<f64> {
    let dims = f.dims().to_vec();
    let mut num = wf.to_vec();
    let mut den = w.to_vec();
    for ax in 0..dims.len() {
        apply_axis(&mut num, &dims, ax, |line, out| {
            sliding_window_sum(line, -k, k, out)
        });
        apply_axis(&mut den, &dims, ax, |line, out| {
            sliding_window_sum(line, -k, k, out)
        });
    }
    num.iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { n / d } else { f64::NEG_INFINITY })
        .collect()
}

fn box_dilate(f: &GridFunction, mut vals: Vec<f64>, k: i64) -> Vec<f64> {
    let dims = f.dims().to_vec();
    for ax in 0..dims.len() {
        apply_axis(&mut vals, &dims, ax, |line, out| {
            sliding_window_max(line, -k, k, out)
        });
    }
    vals
}

/// Diagonal embedding of a 2D grid: cell `(i, j)` maps to
/// `(u, v) = (i + j, i - j + n₁ - 1)`, where the `ℓ¹` cell ball of radius
/// `k` becomes the `(u, v)` box of radius `k` (`|Δi| + |Δj| =
/// max(|Δu|, |Δv|)` and all embedded points share one parity).
struct DiagonalEmbedding {
    n0: usize,
    n1: usize,
    side: usize,
}

impl DiagonalEmbedding {
    fn new(f: &GridFunction) -> Self {
        let (n0, n1) = (f.dims()[0], f.dims()[1]);
        DiagonalEmbedding {
            n0,
            n1,
            side: n0 + n1 - 1,
        }
    }

    fn embed(&self, src: &[f64], fill: f64) -> Vec<f64> {
        let mut e = vec![fill; self.side * self.side];
        for i in 0..self.n0 {
            for j in 0..self.n1 {
                let u = i + j;
                let v = i + self.n1 - 1 - j;
                e[u * self.side + v] = src[i * self.n1 + j];
            }
        }
        e
    }

    fn extract(&self, emb: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n0 * self.n1];
        for i in 0..self.n0 {
            for j in 0..self.n1 {
                let u = i + j;
                let v = i + self.n1 - 1 - j;
                out[i * self.n1 + j] = emb[u * self.side + v];
            }
        }
        out
    }
}

fn diamond_averages(f: &GridFunction, w: &[f64], wf: &[f64], k: i64) -> Vec<f64> {
    let emb = DiagonalEmbedding::new(f);
    let dims = vec![emb.side, emb.side];
    let mut num = emb.embed(wf, 0.0);
    let mut den = emb.embed(w, 0.0);
    for ax in 0..2 {
        apply_axis(&mut num, &dims, ax, |line, out| {
            sliding_window_sum(line, -k, k, out)
        });
        apply_axis(&mut den, &dims, ax, |line, out| {
            sliding_window_sum(line, -k, k, out)
        });
    }
    let avg: Vec<f64> = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { n / d } else { f64::NEG_INFINITY })
        .collect();
    emb.extract(&avg)
}

fn diamond_dilate(f: &GridFunction, vals: Vec<f64>, k: i64) -> Vec<f64> {
    let emb = DiagonalEmbedding::new(f);
    let dims = vec![emb.side, emb.side];
    let mut e = emb.embed(&vals, f64::NEG_INFINITY);
    for ax in 0..2 {
        apply_axis(&mut e, &dims, ax, |line, out| {
            sliding_window_max(line, -k, k, out)
        });
    }
    emb.extract(&e)
}

/// Row half-widths of the disc stencil: `halfw[d0]` is the largest `|d1|`
/// with `d0² + d1² ≤ k_sq`.
fn disc_halfwidths(k_sq: i64) -> Vec<i64> {
    let k = (k_sq as f64).sqrt().floor() as i64;
    let mut hw = Vec::with_capacity((k + 1) as usize);
    for d0 in 0..=k {
        let rem = k_sq - d0 * d0;
        if rem < 0 {
            break;
        }
        let mut w = (rem as f64).sqrt().floor() as i64;
        while (w + 1) * (w + 1) <= rem {
            w += 1;
        }
        while w > 0 && w * w > rem {
            w -= 1;
        }
        hw.push(w);
    }
    hw
}

fn disc_averages(f: &GridFunction, w: &[f64], wf: &[f64], k_sq: i64) -> Vec<f64> {
    let (n0, n1) = (f.dims()[0], f.dims()[1]);
    let hw = disc_halfwidths(k_sq);
    let mut num = vec![0.0f64; f.len()];
    let mut den = vec![0.0f64; f.len()];
    let mut rs_num = vec![0.0f64; f.len()];
    let mut rs_den = vec![0.0f64; f.len()];
    let mut line = Vec::new();
    for (d0, &width) in hw.iter().enumerate() {
        for r in 0..n0 {
            sliding_window_sum(&wf[r * n1..(r + 1) * n1], -width, width, &mut line);
            rs_num[r * n1..(r + 1) * n1].copy_from_slice(&line);
            sliding_window_sum(&w[r * n1..(r + 1) * n1], -width, width, &mut line);
            rs_den[r * n1..(r + 1) * n1].copy_from_slice(&line);
        }
        let offsets: &[i64] = if d0 == 0 {
            &[0]
        } else {
            &[-(d0 as i64), d0 as i64]
        };
        for r in 0..n0 {
            for &off in offsets {
                let src = r as i64 + off;
                if src < 0 || src >= n0 as i64 {
                    continue;
                }
                let src = src as usize;
                for c in 0..n1 {
                    num[r * n1 + c] += rs_num[src * n1 + c];
                    den[r * n1 + c] += rs_den[src * n1 + c];
                }
            }
        }
    }
    num.iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { n / d } else { f64::NEG_INFINITY })
        .collect()
}

fn disc_dilate(f: &GridFunction, vals: Vec<f64>, k_sq: i64) -> Vec<f64> {
    let (n0, n1) = (f.dims()[0], f.dims()[1]);
    let hw = disc_halfwidths(k_sq);
    let mut out = vec![f64::NEG_INFINITY; f.len()];
    let mut rm = vec![f64::NEG_INFINITY; f.len()];
    let mut line = Vec::new();
    for (d0, &width) in hw.iter().enumerate() {
        for r in 0..n0 {
            sliding_window_max(&vals[r * n1..(r + 1) * n1], -width, width, &mut line);
            rm[r * n1..(r + 1) * n1].copy_from_slice(&line);
        }
        let offsets: &[i64] = if d0 == 0 {
            &[0]
        } else {
            &[-(d0 as i64), d0 as i64]
        };
        for r in 0..n0 {
            for &off in offsets {
                let src = r as i64 + off;
                if src < 0 || src >= n0 as i64 {
                    continue;
                }
                let src = src as usize;
                for c in 0..n1 {
                    let v = rm[src * n1 + c];
                    if v > out[r * n1 + c] {
                        out[r * n1 + c] = v;
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Strong maximal operator
// ---------------------------------------------------------------------------

/// Lebesgue-measure non-centered maximal function over axis-aligned
/// rectangles, evaluated as the composition of the per-axis one-dimensional
/// non-centered operators. The composition dominates the average over every
/// single rectangle containing the point (an upper bound for the exact
/// rectangle supremum); in d = 1 it coincides with the non-centered
/// Hardy-Littlewood maximal function.
pub fn strong_maximal(f: &GridFunction) -> GridFunction {
    let dims = f.dims().to_vec();
    let mut vals = f.values().to_vec();
    for ax in 0..dims.len() {
        match dims.len() {
            1 | 2 => apply_axis(&mut vals, &dims, ax, strong_1d),
            3 => apply_axis_3d(&mut vals, &dims, ax, strong_1d),
            _ => unreachable!(),
        }
    }
    let mut out = f.zeros_like();
    out.values_mut().copy_from_slice(&vals);
    out
}

fn apply_axis_3d<F: FnMut(&[f64], &mut Vec<f64>)>(
    data: &mut [f64],
    dims: &[usize],
    axis: usize,
    mut line_op: F,
) {
    let (n0, n1, n2) = (dims[0], dims[1], dims[2]);
    let idx = |i: usize, j: usize, l: usize| (i * n1 + j) * n2 + l;
    let len = dims[axis];
    let mut line = vec![0.0; len];
    let mut out = Vec::new();
    let (outer_a, outer_b) = match axis {
        0 => (n1, n2),
        1 => (n0, n2),
        _ => (n0, n1),
    };
    for a in 0..outer_a {
        for b in 0..outer_b {
            for (t, lv) in line.iter_mut().enumerate() {
                *lv = match axis {
                    0 => data[idx(t, a, b)],
                    1 => data[idx(a, t, b)],
                    _ => data[idx(a, b, t)],
                };
            }
            line_op(&line, &mut out);
            for (t, &ov) in out.iter().enumerate() {
                match axis {
                    0 => data[idx(t, a, b)] = ov,
                    1 => data[idx(a, t, b)] = ov,
                    _ => data[idx(a, b, t)] = ov,
                }
            }
        }
    }
}

/// 1D non-centered maximal function over all contiguous windows:
/// `out[i] = max over a ≤ i ≤ b of mean(src[a..=b])`; one sliding pass per
/// window length.
fn strong_1d(src: &[f64], out: &mut Vec<f64>) {
    let n = src.len();
    out.clear();
    out.resize(n, 0.0);
    let mut sums = Vec::new();
    let mut maxes = Vec::new();
    for len in 1..=n {
        let l = len as i64;
        // anchored window sums: sums[a] over [a, a + len - 1]
        sliding_window_sum(src, 0, l - 1, &mut sums);
        for (a, s) in sums.iter_mut().enumerate() {
            if a + len <= n {
                *s /= len as f64;
            } else {
                *s = f64::NEG_INFINITY; // clipped anchor, not a full window
            }
        }
        // point i is covered by anchors a ∈ [i - len + 1, i]
        sliding_window_max(&sums, -(l - 1), 0, &mut maxes);
        for i in 0..n {
            if maxes[i] > out[i] {
                out[i] = maxes[i];
            }
        }
    }
}

/// Exact rectangle supremum restricted to rectangles with all sides at most
/// `max_side` cells; a coarse-scale reference for `strong_maximal`.
pub fn strong_maximal_exact_small(f: &GridFunction, max_side: usize) -> GridFunction {
    let d = f.dim();
    let dims: Vec<i64> = f.dims().iter().map(|&n| n as i64).collect();
    let mut out = f.zeros_like();
    let flat_of = |idx: &[i64]| -> usize {
        let mut fl = 0usize;
        for (ax, &i) in idx.iter().enumerate() {
            fl = fl * dims[ax] as usize + i as usize;
        }
        fl
    };
    let sizes: Vec<i64> = vec![max_side as i64; d];
    for_each_index(&dims, 1, |lo| {
        for_each_index(&sizes, 1, |sz| {
            let size: Vec<i64> = sz.iter().map(|&s| s + 1).collect();
            if (0..d).any(|ax| lo[ax] + size[ax] > dims[ax]) {
                return;
            }
            let mut sum = 0.0;
            let mut count = 0i64;
            for_each_index(&size, 1, |off| {
                let idx: Vec<i64> = (0..d).map(|ax| lo[ax] + off[ax]).collect();
                sum += f.values()[flat_of(&idx)];
                count += 1;
            });
            let mean = sum / count as f64;
            for_each_index(&size, 1, |off| {
                let idx: Vec<i64> = (0..d).map(|ax| lo[ax] + off[ax]).collect();
                let fl = flat_of(&idx);
                if mean > out.values()[fl] {
                    out.values_mut()[fl] = mean;
                }
            });
        });
    });
    out
}

// ---------------------------------------------------------------------------
// Norms, weak-type functionals, even extension
// ---------------------------------------------------------------------------

/// Weak-type data of a maximal function against the grid measure: the level
/// measures `μ{Mf > λ}` in the log domain and the functional
/// `sup_λ λ·μ{Mf > λ}/‖f‖₁` (also log-domain).
#[derive(Debug, Clone, Serialize)]
pub struct WeakTypeReport {
    pub lambdas: Vec<f64>,
    pub level_log_measures: Vec<f64>,
    pub f_l1_log: f64,
    pub functional_log: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsReport {
    /// `log(‖Mf‖_p / ‖f‖_p)`; absent for `p = 1`.
    pub lp_ratio_log: Option<f64>,
    pub weak: WeakTypeReport,
}

/// `log ‖g‖_p` under the grid measure.
fn lp_norm_log(g: &GridFunction, weights: &[f64], p: f64) -> f64 {
    let log_cell = (g.dim() as f64) * g.spacing().ln();
    let mut acc = LogSumExp::new();
    for (flat, &v) in g.values().iter().enumerate() {
        if v > 0.0 && weights[flat] > 0.0 {
            acc.add(p * v.ln() + weights[flat].ln() + log_cell);
        }
    }
    acc.value() / p
}

/// Norms and weak-type functionals of a pair `(f, Mf)` on matching grids.
///
/// Requires `p ≥ 1` and a not identically vanishing `f`; the `L^p` ratio is
/// reported for `p > 1` only (at `p = 1` the weak-type report is the
/// meaningful object).
pub fn norms_and_weak(
    f: &GridFunction,
    mf: &GridFunction,
    p: f64,
    lambdas: &[f64],
    weighting: Weighting,
) -> Result<NormsReport> {
    if f.dims() != mf.dims() {
        return Err(Error::domain("f and Mf must share a grid layout"));
    }
    if !(p >= 1.0) {
        return Err(Error::domain("p must satisfy p ≥ 1"));
    }
    if f.values().iter().all(|&v| v == 0.0) {
        return Err(Error::domain("f must not vanish identically"));
    }
    let weights = cell_weights(f, weighting)?;
    let log_cell = (f.dim() as f64) * f.spacing().ln();
    let f_l1_log = lp_norm_log(f, &weights, 1.0);
    let lp_ratio_log = if p > 1.0 {
        Some(lp_norm_log(mf, &weights, p) - lp_norm_log(f, &weights, p))
    } else {
        None
    };
    let mut sorted: Vec<f64> = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut level_log_measures = Vec::with_capacity(sorted.len());
    let mut functional_log = f64::NEG_INFINITY;
    for &lam in &sorted {
        if !(lam > 0.0) {
            return Err(Error::domain("levels λ must be positive"));
        }
        let mut acc = LogSumExp::new();
        for (flat, &v) in mf.values().iter().enumerate() {
            if v > lam && weights[flat] > 0.0 {
                acc.add(weights[flat].ln() + log_cell);
            }
        }
        let lm = acc.value();
        level_log_measures.push(lm);
        if lm > f64::NEG_INFINITY {
            functional_log = functional_log.max(lam.ln() + lm - f_l1_log);
        }
    }
    Ok(NormsReport {
        lp_ratio_log,
        weak: WeakTypeReport {
            lambdas: sorted,
            level_log_measures,
            f_l1_log,
            functional_log,
        },
    })
}

/// A geometric λ grid spanning `(max(Mf)·lo_frac, max(Mf))`.
pub fn lambda_ladder(mf: &GridFunction, count: usize, lo_frac: f64) -> Vec<f64> {
    let top = mf.values().iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 || count == 0 {
        return vec![];
    }
    let lo = top * lo_frac;
    (0..count)
        .map(|i| lo * (top / lo).powf(i as f64 / (count.max(2) - 1) as f64) * 0.999_999)
        .collect()
}

/// Even extension across every coordinate hyperplane. The input grid must
/// touch the origin; the output covers the symmetric box with mirrored cell
/// centers, so reflection is exact on cells.
pub fn even_extension(f: &GridFunction) -> Result<GridFunction> {
    if !f.touches_origin() {
        return Err(Error::domain("even extension requires the grid to touch 0"));
    }
    let dims: Vec<usize> = f.dims().iter().map(|&n| 2 * n).collect();
    let origin: Vec<f64> = f
        .dims()
        .iter()
        .map(|&n| -(n as f64) * f.spacing())
        .collect();
    let layout = GridFunction::new(
        origin.clone(),
        f.spacing(),
        dims.clone(),
        vec![0.0; dims.iter().product()],
    )?;
    let mut values = vec![0.0; dims.iter().product()];
    for (flat, v) in values.iter_mut().enumerate() {
        let idx = layout.unflat(flat);
        let src: Vec<usize> = idx
            .iter()
            .enumerate()
            .map(|(ax, &i)| {
                let n = f.dims()[ax];
                if i < n {
                    n - 1 - i
                } else {
                    i - n
                }
            })
            .collect();
        *v = f.values()[f.flat(&src)];
    }
    GridFunction::new(origin, f.spacing(), dims, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, OrthantPoint};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn policy(r_min: f64, r_max: f64) -> CandidatePolicy {
        CandidatePolicy::new(1, 2f64.powf(0.25), r_min, r_max).unwrap()
    }

    fn random_grid(seed: u64, dims: &[usize], spacing: f64, origin: &[f64]) -> GridFunction {
        let mut rng = crate::rng::master(seed);
        GridFunction::from_fn(origin.to_vec(), spacing, dims.to_vec(), |_| {
            rng.gen_range(0.0..3.0)
        })
        .unwrap()
    }

    #[test]
    fn window_sum_matches_direct() {
        let mut rng = crate::rng::master(1);
        for (n, lo, hi) in [(57usize, -3i64, 5i64), (30, -40, 40), (9, 0, 2), (64, -7, -2)] {
            let src: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut out = Vec::new();
            sliding_window_sum(&src, lo, hi, &mut out);
            for i in 0..n {
                let a = (i as i64 + lo).max(0);
                let b = (i as i64 + hi).min(n as i64 - 1);
                let direct: f64 = if a <= b {
                    src[a as usize..=b as usize].iter().sum()
                } else {
                    0.0
                };
                assert_relative_eq!(out[i], direct, max_relative = 1e-13, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn window_max_matches_direct() {
        let mut rng = crate::rng::master(2);
        for (n, lo, hi) in [(41usize, -2i64, 2i64), (23, -30, 30), (11, 1, 4)] {
            let src: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let mut out = Vec::new();
            sliding_window_max(&src, lo, hi, &mut out);
            for i in 0..n {
                let a = (i as i64 + lo).max(0);
                let b = (i as i64 + hi).min(n as i64 - 1);
                let direct = if a <= b {
                    src[a as usize..=b as usize]
                        .iter()
                        .copied()
                        .fold(f64::NEG_INFINITY, f64::max)
                } else {
                    f64::NEG_INFINITY
                };
                assert_eq!(out[i], direct, "i={i} n={n} lo={lo} hi={hi}");
            }
        }
    }

    #[test]
    fn constant_function_maps_to_one() {
        let f = GridFunction::from_fn(vec![0.0, 0.0], 0.25, vec![20, 20], |_| 1.0).unwrap();
        let pol = CandidatePolicy::default_for(&f);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let mf = maximal_function(&f, kind, &pol, Weighting::MuExp, false).unwrap();
            for &v in mf.values() {
                assert_relative_eq!(v, 1.0, epsilon = 1e-12);
            }
            let mcf = maximal_function(&f, kind, &pol, Weighting::MuExp, true).unwrap();
            for &v in mcf.values() {
                assert_relative_eq!(v, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fast_paths_match_naive_enumeration() {
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let f = random_grid(37, &[13, 17], 0.5, &[0.0, 0.0]);
            let pol = policy(0.5, 6.0);
            let fast = maximal_function(&f, kind, &pol, Weighting::MuExp, false).unwrap();
            let naive = maximal_function_naive(
                &f,
                kind,
                &pol,
                Weighting::MuExp,
                false,
                CandidateFilter::All,
            )
            .unwrap();
            for (a, b) in fast.values().iter().zip(naive.values()) {
                assert_relative_eq!(a, b, max_relative = 1e-11, epsilon = 1e-13);
            }
            let fast_c = maximal_function(&f, kind, &pol, Weighting::MuExp, true).unwrap();
            let naive_c = maximal_function_naive(
                &f,
                kind,
                &pol,
                Weighting::MuExp,
                true,
                CandidateFilter::All,
            )
            .unwrap();
            for (a, b) in fast_c.values().iter().zip(naive_c.values()) {
                assert_relative_eq!(a, b, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn fast_paths_match_naive_with_stride_and_cone_weighting() {
        let f = random_grid(91, &[14, 15], 0.5, &[0.0, -3.75]);
        let pol = CandidatePolicy::new(2, 1.5, 0.5, 5.0).unwrap();
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let fast = maximal_function(&f, kind, &pol, Weighting::NuCone2, false).unwrap();
            let naive = maximal_function_naive(
                &f,
                kind,
                &pol,
                Weighting::NuCone2,
                false,
                CandidateFilter::All,
            )
            .unwrap();
            for (a, b) in fast.values().iter().zip(naive.values()) {
                assert_relative_eq!(a, b, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn monotone_in_the_function_argument() {
        let f = random_grid(5, &[16, 16], 0.25, &[0.0, 0.0]);
        let mut g = f.clone();
        for v in g.values_mut() {
            *v += 0.5;
        }
        let pol = policy(0.25, 4.0);
        let mf = maximal_function(&f, NormKind::Linf, &pol, Weighting::MuExp, false).unwrap();
        let mg = maximal_function(&g, NormKind::Linf, &pol, Weighting::MuExp, false).unwrap();
        for (a, b) in mf.values().iter().zip(mg.values()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn centered_below_noncentered_and_refinement_monotonicity() {
        let f = random_grid(8, &[15, 15], 0.25, &[0.0, 0.0]);
        let pol = policy(0.25, 4.0);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let m = maximal_function(&f, kind, &pol, Weighting::MuExp, false).unwrap();
            let mc = maximal_function(&f, kind, &pol, Weighting::MuExp, true).unwrap();
            for (a, b) in mc.values().iter().zip(m.values()) {
                assert!(*a <= b + 1e-13);
            }
            // enlarging the candidate family never decreases the output
            let denser = CandidatePolicy::new(1, 2f64.powf(0.125), 0.125, 5.0).unwrap();
            let m2 = maximal_function(&f, kind, &denser, Weighting::MuExp, false).unwrap();
            for (a, b) in m.values().iter().zip(m2.values()) {
                assert!(*a <= b + 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn homogeneity_and_sup_bound() {
        let f = random_grid(13, &[12, 12], 0.5, &[0.0, 0.0]);
        let pol = policy(0.5, 4.0);
        let mf = maximal_function(&f, NormKind::L2, &pol, Weighting::MuExp, false).unwrap();
        let sup = f.values().iter().copied().fold(0.0f64, f64::max);
        for &v in mf.values() {
            assert!(v <= sup + 1e-12);
        }
        let mut g = f.clone();
        for v in g.values_mut() {
            *v *= 3.0;
        }
        let mg = maximal_function(&g, NormKind::L2, &pol, Weighting::MuExp, false).unwrap();
        for (a, b) in mf.values().iter().zip(mg.values()) {
            assert_relative_eq!(3.0 * a, *b, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn permutation_equivariance_under_transpose() {
        let f = random_grid(17, &[11, 11], 0.5, &[0.0, 0.0]);
        let mut ft = f.zeros_like();
        for i in 0..11 {
            for j in 0..11 {
                ft.values_mut()[j * 11 + i] = f.values()[i * 11 + j];
            }
        }
        let pol = policy(0.5, 4.0);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let m = maximal_function(&f, kind, &pol, Weighting::MuExp, false).unwrap();
            let mt = maximal_function(&ft, kind, &pol, Weighting::MuExp, false).unwrap();
            for i in 0..11 {
                for j in 0..11 {
                    assert_relative_eq!(
                        m.values()[i * 11 + j],
                        mt.values()[j * 11 + i],
                        max_relative = 1e-11,
                        epsilon = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn three_dimensional_naive_path_runs() {
        let f = random_grid(19, &[6, 6, 6], 0.5, &[0.0, 0.0, 0.0]);
        let pol = policy(0.5, 2.0);
        let m = maximal_function(&f, NormKind::Linf, &pol, Weighting::MuExp, false).unwrap();
        let sup = f.values().iter().copied().fold(0.0f64, f64::max);
        for &v in m.values() {
            assert!(v <= sup + 1e-12 && v >= 0.0);
        }
        let mc = maximal_function(&f, NormKind::L1, &pol, Weighting::MuExp, true).unwrap();
        for (a, b) in mc.values().iter().zip(
            maximal_function(&f, NormKind::L1, &pol, Weighting::MuExp, false)
                .unwrap()
                .values(),
        ) {
            assert!(*a <= b + 1e-13);
        }
    }

    #[test]
    fn average_over_ball_reproduces_constants_and_zero() {
        let f = GridFunction::from_fn(vec![0.0, 0.0], 0.25, vec![24, 24], |_| 1.0).unwrap();
        let b = Ball::new(
            NormKind::Linf,
            OrthantPoint::new(vec![3.0, 3.0]).unwrap(),
            1.0,
        )
        .unwrap();
        let avg = average_over_ball(&f, &b, Weighting::MuExp).unwrap().unwrap();
        assert_relative_eq!(avg, 1.0, epsilon = 1e-13);
        // f supported away from the ball averages to zero
        let g = GridFunction::from_fn(vec![0.0, 0.0], 0.25, vec![24, 24], |x| {
            if x[0] > 5.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let avg = average_over_ball(&g, &b, Weighting::MuExp).unwrap().unwrap();
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn strong_maximal_fixes_constants_and_dominates_rectangles() {
        let f = GridFunction::from_fn(vec![0.0, 0.0], 0.5, vec![10, 12], |_| 2.5).unwrap();
        let m = strong_maximal(&f);
        for &v in m.values() {
            assert_relative_eq!(v, 2.5, epsilon = 1e-12);
        }
        let g = random_grid(23, &[9, 11], 0.5, &[0.0, 0.0]);
        let mg = strong_maximal(&g);
        let exact = strong_maximal_exact_small(&g, 5);
        for (a, b) in exact.values().iter().zip(mg.values()) {
            assert!(*a <= b + 1e-12, "composition must dominate rectangles");
        }
    }

    #[test]
    fn strong_maximal_1d_is_the_hardy_littlewood_function() {
        let g = random_grid(29, &[40], 0.25, &[0.0]);
        let m = strong_maximal(&g);
        let exact = strong_maximal_exact_small(&g, 40);
        for (a, b) in exact.values().iter().zip(m.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn norms_and_weak_identity_operator() {
        let f = random_grid(31, &[16, 16], 0.25, &[0.0, 0.0]);
        let lambdas = lambda_ladder(&f, 20, 1e-4);
        let rep = norms_and_weak(&f, &f, 2.0, &lambdas, Weighting::MuExp).unwrap();
        assert_relative_eq!(rep.lp_ratio_log.unwrap(), 0.0, epsilon = 1e-12);
        // level measures are non-increasing in λ
        for w in rep.weak.level_log_measures.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn weak_functional_of_constants_is_at_most_one() {
        let f = GridFunction::from_fn(vec![0.0, 0.0], 0.25, vec![32, 32], |_| 2.0).unwrap();
        let pol = CandidatePolicy::default_for(&f);
        let mf = maximal_function(&f, NormKind::Linf, &pol, Weighting::MuExp, false).unwrap();
        let lambdas = lambda_ladder(&mf, 24, 1e-3);
        let rep = norms_and_weak(&f, &mf, 1.0, &lambdas, Weighting::MuExp).unwrap();
        assert!(rep.lp_ratio_log.is_none());
        assert!(rep.weak.functional_log <= 1e-9, "{}", rep.weak.functional_log);
    }

    #[test]
    fn norms_reject_zero_function() {
        let f = GridFunction::from_fn(vec![0.0], 0.5, vec![8], |_| 0.0).unwrap();
        assert!(norms_and_weak(&f, &f, 2.0, &[1.0], Weighting::MuExp).is_err());
    }

    #[test]
    fn even_extension_doubles_mass_and_is_flip_invariant() {
        let f = random_grid(41, &[9, 9], 0.5, &[0.0, 0.0]);
        let ext = even_extension(&f).unwrap();
        let wf = cell_weights(&f, Weighting::MuExp).unwrap();
        let we = cell_weights(&ext, Weighting::MuExp).unwrap();
        let mass_f: f64 = f
            .values()
            .iter()
            .zip(&wf)
            .map(|(&v, &w)| v * w * f.cell_volume())
            .sum();
        let mass_e: f64 = ext
            .values()
            .iter()
            .zip(&we)
            .map(|(&v, &w)| v * w * ext.cell_volume())
            .sum();
        assert_relative_eq!(mass_e, 4.0 * mass_f, max_relative = 1e-12);
        // flip invariance in each coordinate
        let n = ext.dims()[0];
        for i in 0..n {
            for j in 0..n {
                let v = ext.values()[ext.flat(&[i, j])];
                assert_eq!(v, ext.values()[ext.flat(&[n - 1 - i, j])]);
                assert_eq!(v, ext.values()[ext.flat(&[i, n - 1 - j])]);
            }
        }
    }

    #[test]
    fn extension_maximal_dominates_the_orthant_interior_family() {
        // d = 1: the symmetric-grid evaluation dominates every orthant
        // candidate whose ball stays inside the orthant (reflection embeds
        // that family with identical cell sets).
        let f = random_grid(47, &[24], 0.25, &[0.0]);
        let ext = even_extension(&f).unwrap();
        let pol = policy(0.25, 12.0);
        let m_plus = maximal_function_naive(
            &f,
            NormKind::Linf,
            &pol,
            Weighting::MuExp,
            false,
            CandidateFilter::BallInsideOrthant,
        )
        .unwrap();
        let m_ext = maximal_function(&ext, NormKind::Linf, &pol, Weighting::MuExp, false).unwrap();
        let n = f.dims()[0];
        for i in 0..n {
            let ext_val = m_ext.values()[n + i];
            assert!(
                m_plus.values()[i] <= ext_val + 1e-11,
                "cell {i}: {} vs {}",
                m_plus.values()[i],
                ext_val
            );
        }
    }
}
