//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::poly::Rational;

pub type Mat = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(a: &mut Mat) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &Mat) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

/// One solution of `a·x = b` (free variables set to zero), or `None`.
pub fn solve(a: &Mat, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][cols].clone();
    }
    Some(x)
}

/// Basis of the right kernel of `a` (with `cols` columns).
pub fn nullspace(a: &Mat, cols: usize) -> Vec<Vec<Rational>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn solve_and_kernel() {
        let a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(rank(&a), 1);
        assert!(solve(&a, &[int(1), int(3)]).is_none());
        let x = solve(&a, &[int(1), int(2)]).unwrap();
        assert_eq!(x, vec![int(1), int(0)]);
        let k = nullspace(&a, 2);
        assert_eq!(k, vec![vec![int(-2), int(1)]]);
        let b = vec![vec![int(3), int(1)], vec![int(1), int(3)]];
        assert_eq!(solve(&b, &[int(1), int(0)]).unwrap(), vec![rat(3, 8), rat(-1, 8)]);
    }
}
