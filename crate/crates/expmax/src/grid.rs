//! Grid functions: nonnegative samples on a regular axis-aligned grid.
//!
//! Cell `k` (multi-index) covers `origin + spacing·[k, k+1]` and its sample
//! point is the cell center `origin + spacing·(k + ½)`. Grids live in the
//! closed orthant by default; even extensions produce grids on symmetric
//! boxes with negative origins.
//!
//! Serialization is binary-free: a CSV body `(index, value)` with a JSON
//! header `{origin, spacing, dims}`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Vec<f64>,
    spacing: f64,
    dims: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridHeader {
    origin: Vec<f64>,
    spacing: f64,
    dims: Vec<usize>,
}

impl GridFunction {
    pub fn new(origin: Vec<f64>, spacing: f64, dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if origin.is_empty() || origin.len() > 3 || origin.len() != dims.len() {
            return Err(Error::domain("grid dimension must be in 1..=3"));
        }
        if !(spacing > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::domain("grid dims must be positive"));
        }
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::domain(format!(
                "value buffer has {} entries for a {} cell grid",
                values.len(),
                len
            )));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain("grid values must be nonnegative and finite"));
        }
        Ok(GridFunction {
            origin,
            spacing,
            dims,
            values,
        })
    }

    /// All-zero grid with the same layout.
    pub fn zeros_like(&self) -> GridFunction {
        GridFunction {
            origin: self.origin.clone(),
            spacing: self.spacing,
            dims: self.dims.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    /// Build from a function of the cell center.
    pub fn from_fn(
        origin: Vec<f64>,
        spacing: f64,
        dims: Vec<usize>,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        let len: usize = dims.iter().product();
        let d = dims.len();
        let mut values = vec![0.0; len];
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0f64; d];
        for (flat, v) in values.iter_mut().enumerate() {
            let mut rem = flat;
            for ax in (0..d).rev() {
                idx[ax] = rem % dims[ax];
                rem /= dims[ax];
            }
            for ax in 0..d {
                x[ax] = origin[ax] + spacing * (idx[ax] as f64 + 0.5);
            }
            *v = f(&x);
        }
        GridFunction::new(origin, spacing, dims, values)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Row-major flat index of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (ax, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.dims[ax]);
            f = f * self.dims[ax] + i;
        }
        f
    }

    /// Multi-index of a flat index.
    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        for ax in (0..d).rev() {
            idx[ax] = flat % self.dims[ax];
            flat /= self.dims[ax];
        }
        idx
    }

    /// Cell center of a multi-index.
    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(ax, &i)| self.origin[ax] + self.spacing * (i as f64 + 0.5))
            .collect()
    }

    pub fn cell_center_flat(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflat(flat);
        self.cell_center(&idx)
    }

    /// Cell volume `spacing^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// True when the grid touches the orthant boundary (`origin ≈ 0`).
    pub fn touches_origin(&self) -> bool {
        self.origin.iter().all(|&o| o.abs() < 1e-12 * self.spacing)
    }

    /// Bounding box of the cells with strictly positive values, as inclusive
    /// index ranges per axis; `None` when the function vanishes identically.
    pub fn support_box(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let d = self.dim();
        let mut lo = vec![usize::MAX; d];
        let mut hi = vec![0usize; d];
        let mut any = false;
        for (flat, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                any = true;
                let idx = self.unflat(flat);
                for ax in 0..d {
                    lo[ax] = lo[ax].min(idx[ax]);
                    hi[ax] = hi[ax].max(idx[ax]);
                }
            }
        }
        if any {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Write the CSV body and the JSON header.
    pub fn save(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let header = GridHeader {
            origin: self.origin.clone(),
            spacing: self.spacing,
            dims: self.dims.clone(),
        };
        let mut jf = std::fs::File::create(json_path)?;
        serde_json::to_writer_pretty(&mut jf, &header)?;
        jf.write_all(b"\n")?;
        let mut cf = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        writeln!(cf, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(cf, "{i},{v:.17e}")?;
        }
        Ok(())
    }

    pub fn load(csv_path: &Path, json_path: &Path) -> Result<GridFunction> {
        let header: GridHeader = serde_json::from_reader(std::fs::File::open(json_path)?)?;
        let len: usize = header.dims.iter().product();
        let mut values = vec![0.0f64; len];
        let file = std::io::BufReader::new(std::fs::File::open(csv_path)?);
        for (ln, line) in file.lines().enumerate() {
            let line = line?;
            if ln == 0 {
                if line.trim() != "index,value" {
                    return Err(Error::Parse("expected header 'index,value'".into()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (i, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad CSV line {ln}")))?;
            let i: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index on line {ln}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value on line {ln}")))?;
            if i >= len {
                return Err(Error::Parse(format!("index {i} out of range")));
            }
            values[i] = v;
        }
        GridFunction::new(header.origin, header.spacing, header.dims, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_round_trip() {
        let g = GridFunction::new(vec![0.0, 0.0], 0.5, vec![3, 4], vec![0.0; 12]).unwrap();
        for flat in 0..12 {
            assert_eq!(g.flat(&g.unflat(flat)), flat);
        }
        assert_eq!(g.cell_center(&[1, 2]), vec![0.75, 1.25]);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(GridFunction::new(vec![0.0], 1.0, vec![2], vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn support_box_finds_the_positive_cells() {
        let mut g = GridFunction::new(vec![0.0, 0.0], 1.0, vec![4, 4], vec![0.0; 16]).unwrap();
        let i = g.flat(&[1, 2]);
        let j = g.flat(&[2, 3]);
        g.values_mut()[i] = 1.0;
        g.values_mut()[j] = 2.0;
        let (lo, hi) = g.support_box().unwrap();
        assert_eq!(lo, vec![1, 2]);
        assert_eq!(hi, vec![2, 3]);
        assert!(g.zeros_like().support_box().is_none());
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("expmax-grid-test");
        std::fs::create_dir_all(&dir).unwrap();
        let g = GridFunction::from_fn(vec![0.0, 0.0], 0.25, vec![5, 7], |x| x[0] + 2.0 * x[1])
            .unwrap();
        let csv = dir.join("f.csv");
        let json = dir.join("f.json");
        g.save(&csv, &json).unwrap();
        let h = GridFunction::load(&csv, &json).unwrap();
        assert_eq!(g, h);
    }
}
