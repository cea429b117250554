use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Zero;

use super::{Polynomial, Rational, Var};
use crate::error::{Error, Result};

/// Dense matrix of polynomials, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix { rows, cols, data: vec![Polynomial::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> PolyMatrix {
        PolyMatrix::scalar(n, Polynomial::one())
    }

    pub fn scalar(n: usize, p: Polynomial) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = p.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<PolyMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(PolyMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Polynomial>) -> Result<PolyMatrix> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(PolyMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Polynomial] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Polynomial::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> PolyMatrix {
        PolyMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn scale(&self, c: &Polynomial) -> PolyMatrix {
        self.map(|p| p * c)
    }

    pub fn differentiate(&self, v: Var) -> PolyMatrix {
        self.map(|p| p.differentiate(v))
    }

    pub fn substitute(&self, b: &HashMap<Var, Polynomial>) -> PolyMatrix {
        self.map(|p| p.substitute(b))
    }

    pub fn set_zero(&self, vars: &[Var]) -> PolyMatrix {
        self.map(|p| p.set_zero(vars))
    }

    pub fn trace(&self) -> Polynomial {
        let mut t = Polynomial::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &PolyMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    /// `[[a, b], [c, d]]` from four blocks with matching shapes.
    pub fn block2(a: &PolyMatrix, b: &PolyMatrix, c: &PolyMatrix, d: &PolyMatrix) -> Result<PolyMatrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Shape("block shapes do not match".into()));
        }
        let mut out = PolyMatrix::zeros(a.rows + c.rows, a.cols + b.cols);
        out.set_block(0, 0, a);
        out.set_block(0, a.cols, b);
        out.set_block(a.rows, 0, c);
        out.set_block(a.rows, a.cols, d);
        Ok(out)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &PolyMatrix) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    pub fn kron(&self, other: &PolyMatrix) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * &other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Determinant by Laplace expansion memoised over column subsets.
    pub fn det(&self) -> Result<Polynomial> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Polynomial::one());
        }
        if n > 20 {
            return Err(Error::Shape("matrix too large for determinant".into()));
        }
        // minors[mask] = det of rows (n - |mask|).. with the columns in mask
        let mut minors: HashMap<u32, Polynomial> = HashMap::new();
        minors.insert(0, Polynomial::one());
        for size in 1..=n {
            let row = n - size;
            let mut next = HashMap::new();
            for mask in masks_of_size(n, size) {
                let mut acc = Polynomial::zero();
                let mut sign_pos = 0;
                for col in 0..n {
                    if mask & (1 << col) == 0 {
                        continue;
                    }
                    let a = &self[(row, col)];
                    if !a.is_zero() {
                        let sub = &minors[&(mask & !(1 << col))];
                        if !sub.is_zero() {
                            let t = a * sub;
                            if sign_pos % 2 == 0 {
                                acc += t;
                            } else {
                                acc -= t;
                            }
                        }
                    }
                    sign_pos += 1;
                }
                next.insert(mask, acc);
            }
            minors = next;
        }
        Ok(minors.remove(&((1u32 << n) - 1)).unwrap())
    }

    pub fn minor(&self, skip_row: usize, skip_col: usize) -> PolyMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                data.push(self[(i, j)].clone());
            }
        }
        PolyMatrix { rows: self.rows - 1, cols: self.cols - 1, data }
    }

    pub fn adjugate(&self) -> Result<PolyMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(PolyMatrix::identity(1));
        }
        let mut out = PolyMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = self.minor(i, j).det()?;
                out[(j, i)] = if (i + j) % 2 == 0 { d } else { -d };
            }
        }
        Ok(out)
    }

    /// Inverse over the polynomial ring; requires a nonzero constant determinant.
    pub fn inverse(&self) -> Result<PolyMatrix> {
        let d = self.det()?;
        let c = d.as_constant().filter(|c| !c.is_zero()).ok_or(Error::NotInvertible)?;
        let inv = Rational::from_integer(1.into()) / c;
        Ok(self.adjugate()?.scale(&Polynomial::constant(inv)))
    }
}

fn masks_of_size(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

impl Index<(usize, usize)> for PolyMatrix {
    type Output = Polynomial;
    fn index(&self, (i, j): (usize, usize)) -> &Polynomial {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for PolyMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Polynomial {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &PolyMatrix {
    type Output = PolyMatrix;
    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        self.try_mul(rhs).expect("matrix shapes")
    }
}

impl Add for &PolyMatrix {
    type Output = PolyMatrix;
    fn add(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shapes");
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &PolyMatrix {
    type Output = PolyMatrix;
    fn sub(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shapes");
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &PolyMatrix {
    type Output = PolyMatrix;
    fn neg(self) -> PolyMatrix {
        self.map(|p| -p)
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|p| p.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMatrix {}x{}\n{self}", self.rows, self.cols)
    }
}
