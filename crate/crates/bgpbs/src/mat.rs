//! Minimal row-major f64 matrix.
//!
//! The model dimensions here are tiny (tens of rows/columns), so a flat
//! `Vec<f64>` with explicit loops is all the linear algebra the crate needs.
//! Serializes to JSON as a nested array of rows.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        if rows.is_empty() {
            return Err("matrix must have at least one row".into());
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err("matrix must have at least one column".into());
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(format!(
                    "ragged matrix: row 0 has {} columns, row {} has {}",
                    cols,
                    i,
                    r.len()
                ));
            }
            data.extend_from_slice(r);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `out += self * x`; `x` has `cols` entries, `out` has `rows`.
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *o += acc;
        }
    }

    /// `out += self^T * v`; `v` has `rows` entries, `out` has `cols`.
    pub fn matvec_t_acc(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (vi, row) in v.iter().zip(self.data.chunks_exact(self.cols)) {
            if *vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
    }

    /// Rank-one update `self += u * v^T`; `u` has `rows` entries, `v` `cols`.
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (ui, row) in u.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            for (a, b) in row.iter_mut().zip(v) {
                *a += ui * b;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        Mat::from_rows(rows)
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        (0..m.rows).map(|i| m.row(i).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_hand_arithmetic() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let mut y = vec![0.0; 3];
        a.matvec_acc(&[1.0, -1.0], &mut y);
        assert_eq!(y, vec![-1.0, -1.0, -1.0]);

        let mut z = vec![0.0; 2];
        a.matvec_t_acc(&[1.0, 1.0, 1.0], &mut z);
        assert_eq!(z, vec![9.0, 12.0]);
    }

    #[test]
    fn outer_product_accumulates() {
        let mut a = Mat::zeros(2, 3);
        a.add_outer(&[1.0, 2.0], &[3.0, 4.0, 5.0]);
        assert_eq!(a.row(0), &[3.0, 4.0, 5.0]);
        assert_eq!(a.row(1), &[6.0, 8.0, 10.0]);
    }

    #[test]
    fn json_round_trip_is_nested_arrays() {
        let a = Mat::from_rows(vec![vec![1.5, 2.0], vec![0.25, -1.0]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[1.5,2.0],[0.25,-1.0]]");
        let b: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ragged_input_rejected() {
        let r: Result<Mat, _> = serde_json::from_str("[[1.0,2.0],[3.0]]");
        assert!(r.is_err());
    }
}
