//! Exact dense linear algebra over an arbitrary coefficient field.
//!
//! Everything here is deterministic: elimination scans rows top to bottom
//! and columns left to right, always taking the first nonzero pivot, so the
//! same system yields the same echelon form, the same particular solution,
//! and the same kernel basis on every run.

use crate::error::{Error, Result};
use crate::field::CoeffField;

#[derive(Debug, Clone)]
pub struct Matrix<F: CoeffField> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

/// Full solution set of `A x = b`: `particular + span(kernel)`.
#[derive(Debug, Clone)]
pub struct AffineSolution<F: CoeffField> {
    /// Free variables set to zero.
    pub particular: Vec<F::Elem>,
    /// One vector per free column, unit in that column, increasing column order.
    pub kernel: Vec<Vec<F::Elem>>,
    /// Non-pivot columns, increasing; `kernel[i]` is the unit vector of `free_cols[i]`.
    pub free_cols: Vec<usize>,
}

impl<F: CoeffField> Matrix<F> {
    pub fn zero(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, data }
    }

    pub fn from_rows(field: F, cols: usize, rows_data: Vec<Vec<F::Elem>>) -> Self {
        let rows = rows_data.len();
        let mut data = Vec::with_capacity(rows * cols);
        for r in rows_data {
            assert_eq!(r.len(), cols, "ragged matrix row");
            data.extend(r);
        }
        Matrix { field, rows, cols, data }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: Vec<F::Elem>) {
        assert_eq!(row.len(), self.cols, "ragged matrix row");
        self.data.extend(row);
        self.rows += 1;
    }

    /// Reduced row echelon form in place; returns pivot column per pivot row.
    pub fn rref(&mut self) -> Result<Vec<usize>> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut pr = 0;
        for pc in 0..self.cols {
            if pr == self.rows {
                break;
            }
            let Some(hit) = (pr..self.rows).find(|&r| !f.is_zero(self.at(r, pc))) else {
                continue;
            };
            self.swap_rows(pr, hit);
            let inv = f.inv(self.at(pr, pc))?;
            for c in pc..self.cols {
                let v = f.mul(self.at(pr, c), &inv);
                self.set(pr, c, v);
            }
            for r in 0..self.rows {
                if r == pr || f.is_zero(self.at(r, pc)) {
                    continue;
                }
                let factor = self.at(r, pc).clone();
                for c in pc..self.cols {
                    let v = f.sub(self.at(r, c), &f.mul(&factor, self.at(pr, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        Ok(pivots)
    }

    pub fn rank(&self) -> Result<usize> {
        let mut m = self.clone();
        Ok(m.rref()?.len())
    }

    /// Determinant by Gaussian elimination with pivot tracking.
    pub fn determinant(&self) -> Result<F::Elem> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let f = self.field.clone();
        let mut m = self.clone();
        let n = self.rows;
        let mut det = f.one();
        for col in 0..n {
            let Some(pr) = (col..n).find(|&r| !f.is_zero(m.at(r, col))) else {
                return Ok(f.zero());
            };
            if pr != col {
                m.swap_rows(pr, col);
                det = f.neg(&det);
            }
            let pivot = m.at(col, col).clone();
            det = f.mul(&det, &pivot);
            for r in col + 1..n {
                if f.is_zero(m.at(r, col)) {
                    continue;
                }
                let factor = f.div(m.at(r, col), &pivot)?;
                for c in col..n {
                    let v = f.sub(m.at(r, c), &f.mul(&factor, m.at(col, c)));
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Solve `A x = b` exactly. Free variables are zero in the particular
    /// solution; the kernel basis has one vector per free column.
    pub fn solve_affine(&self, b: &[F::Elem]) -> Result<AffineSolution<F>> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let f = self.field.clone();
        let mut aug = Matrix::zero(f.clone(), self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let pivots = aug.rref()?;
        if pivots.last() == Some(&self.cols) {
            return Err(Error::Infeasible);
        }
        let mut particular = vec![f.zero(); self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            particular[pc] = aug.at(pr, self.cols).clone();
        }
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &pc in &pivots {
                v[pc] = true;
            }
            v
        };
        let mut kernel = Vec::new();
        let mut free_cols = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut vec_ = vec![f.zero(); self.cols];
            vec_[free] = f.one();
            for (pr, &pc) in pivots.iter().enumerate() {
                vec_[pc] = f.neg(aug.at(pr, free));
            }
            kernel.push(vec_);
            free_cols.push(free);
        }
        Ok(AffineSolution { particular, kernel, free_cols })
    }

    pub fn mul_vec(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(x.len(), self.cols);
        let f = &self.field;
        (0..self.rows)
            .map(|r| {
                let mut acc = f.zero();
                for c in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.at(r, c), &x[c]));
                }
                acc
            })
            .collect()
    }
}
