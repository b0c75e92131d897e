use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        contract!(
            data.len() == rows * cols,
            "matrix data has {} entries, expected {rows}x{cols}",
            data.len()
        );
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        contract!(
            rows.iter().all(|r| r.len() == cols),
            "ragged rows in matrix literal"
        );
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `out = self * [input; 1]`: the last column acts as a bias.
    #[inline]
    pub fn affine_into(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len() + 1, self.cols);
        debug_assert_eq!(out.len(), self.rows);
        let n = input.len();
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = row[n];
            for (w, x) in row[..n].iter().zip(input) {
                acc += w * x;
            }
            *o = acc;
        }
    }

    /// `out = self^T * upstream`, dropping the bias column.
    #[inline]
    pub fn affine_transpose_into(&self, upstream: &[f64], out: &mut [f64]) {
        debug_assert_eq!(upstream.len(), self.rows);
        debug_assert_eq!(out.len() + 1, self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        let n = out.len();
        for (r, &u) in upstream.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            let row = &self.data[r * self.cols..r * self.cols + n];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * u;
            }
        }
    }

    /// `self += upstream (x) [input; 1]`, the weight gradient of an affine layer.
    #[inline]
    pub fn add_outer_affine(&mut self, upstream: &[f64], input: &[f64]) {
        let n = input.len();
        for (r, &u) in upstream.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (g, x) in row[..n].iter_mut().zip(input) {
                *g += u * x;
            }
            row[n] += u;
        }
    }
}
