//! Matrix factorisations, defects and their algebra.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{monomials_of_weight, weight_of, GradingMatrix, Potential};
use crate::groebner::{groebner_basis, Exhausted, GroebnerBasis, OrderKind, ResourceBudget, TermOrder};
use crate::linalg;
use crate::poly::{Monomial, PolyMatrix, Polynomial, Rational, Var};

/// Q = [[0, E], [J, 0]] with EJ = JE = W·1, possibly over a parameter ring
/// cut out by `constraints`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFactorisation {
    pub e: PolyMatrix,
    pub j: PolyMatrix,
    pub potential: Potential,
    pub grading: Option<GradingMatrix>,
    pub constraints: Vec<Polynomial>,
}

impl MatrixFactorisation {
    pub fn new(e: PolyMatrix, j: PolyMatrix, potential: Potential) -> Result<Self> {
        if !e.is_square() || !j.is_square() || e.rows() != j.rows() {
            return Err(Error::Shape(format!(
                "E is {}x{}, J is {}x{}",
                e.rows(),
                e.cols(),
                j.rows(),
                j.cols()
            )));
        }
        Ok(MatrixFactorisation { e, j, potential, grading: None, constraints: Vec::new() })
    }

    pub fn with_constraints(mut self, constraints: Vec<Polynomial>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn rank(&self) -> usize {
        self.e.rows()
    }

    pub fn w(&self) -> &Polynomial {
        &self.potential.poly
    }

    pub fn q(&self) -> PolyMatrix {
        let n = self.rank();
        let z = PolyMatrix::zeros(n, n);
        PolyMatrix::block2(&z, &self.e, &self.j, &z).unwrap()
    }

    pub fn from_q(q: &PolyMatrix, potential: Potential) -> Result<Self> {
        let n = q.rows() / 2;
        if !q.is_square() || q.rows() != 2 * n {
            return Err(Error::Shape("Q must be 2N x 2N".into()));
        }
        if !q.submatrix(0, 0, n, n).is_zero() || !q.submatrix(n, n, n, n).is_zero() {
            return Err(Error::Shape("Q must be odd".into()));
        }
        MatrixFactorisation::new(q.submatrix(0, n, n, n), q.submatrix(n, 0, n, n), potential)
    }

    /// Q² − W·1 without reduction.
    pub fn raw_residual(&self) -> PolyMatrix {
        let n = self.rank();
        let w = PolyMatrix::scalar(n, self.w().clone());
        let ej = &(&self.e * &self.j) - &w;
        let je = &(&self.j * &self.e) - &w;
        ej.direct_sum(&je)
    }

    /// Gröbner basis of the constraint ideal, if there are constraints.
    pub fn constraint_basis(&self, budget: &ResourceBudget) -> std::result::Result<Option<GroebnerBasis>, Exhausted> {
        constraint_basis(&self.constraints, budget)
    }

    /// Q² − W·1 with each entry reduced modulo the constraint ideal.
    pub fn residual_mod(&self, gb: Option<&GroebnerBasis>) -> PolyMatrix {
        let r = self.raw_residual();
        match gb {
            Some(gb) => r.map(|p| gb.normal_form(p)),
            None => r,
        }
    }

    pub fn mf_residual(&self) -> PolyMatrix {
        let gb = self.constraint_basis(&ResourceBudget::unlimited()).expect("unlimited budget");
        self.residual_mod(gb.as_ref())
    }

    /// Positions (in Q) of nonzero constant entries.
    pub fn constant_entries(&self) -> Vec<(usize, usize)> {
        let q = self.q();
        let mut out = Vec::new();
        for r in 0..q.rows() {
            for s in 0..q.cols() {
                let p = &q[(r, s)];
                if !p.is_zero() && p.geometric_vars().is_empty() {
                    out.push((r, s));
                }
            }
        }
        out
    }

    /// Charges g with g_1 = 0 read off from the entry weights.
    pub fn infer_grading(&self) -> Result<GradingMatrix> {
        let q = self.q();
        let n = q.rows();
        let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for r in 0..n {
            for s in 0..n {
                let p = &q[(r, s)];
                if p.is_zero() {
                    continue;
                }
                let w = weight_of(p, &self.potential.ws)
                    .map_err(|_| Error::NotGraded(format!("entry ({}, {}) is not homogeneous", r + 1, s + 1)))?;
                let d = w - Rational::one();
                adj[r].push((s, d.clone()));
                adj[s].push((r, -d));
            }
        }
        let mut g: Vec<Option<Rational>> = vec![None; n];
        for root in 0..n {
            if g[root].is_some() {
                continue;
            }
            g[root] = Some(Rational::zero());
            let mut queue = VecDeque::from([root]);
            while let Some(r) = queue.pop_front() {
                let gr = g[r].clone().unwrap();
                for (s, d) in &adj[r] {
                    let want = &gr + d;
                    match &g[*s] {
                        Some(gs) if *gs != want => {
                            return Err(Error::NotGraded(format!("inconsistent charges at row/column {}", s + 1)));
                        }
                        Some(_) => {}
                        None => {
                            g[*s] = Some(want);
                            queue.push_back(*s);
                        }
                    }
                }
            }
        }
        Ok(GradingMatrix::new(g.into_iter().map(Option::unwrap).collect()).normalised())
    }

    /// Checks U(λ)Q(λ▷z)U(λ)⁻¹ = λQ(z) for a symbolic λ.
    pub fn lambda_check(&self, g: &GradingMatrix) -> bool {
        let q = self.q();
        if g.charges.len() != q.rows() {
            return false;
        }
        let mut den = BigInt::one();
        for (_, w) in self.potential.ws.iter() {
            den = den.lcm(w.denom());
        }
        for c in &g.charges {
            den = den.lcm(c.denom());
        }
        let k = Rational::from_integer(den);
        let lam = Var::geo("lambda_");
        let mut bind = HashMap::new();
        for (v, w) in self.potential.ws.iter() {
            let e = (w * &k).to_integer().to_u32().expect("weight exponent");
            bind.insert(v, &Polynomial::var(lam).pow(e) * &Polynomial::var(v));
        }
        let kint = |r: &Rational| (r * &k).to_integer().to_i64().expect("charge exponent");
        let kk = kint(&Rational::one());
        for r in 0..q.rows() {
            for s in 0..q.cols() {
                let p = &q[(r, s)];
                if p.is_zero() {
                    continue;
                }
                let a = kint(&g.charges[r]);
                let b = kk + kint(&g.charges[s]);
                let c = 0.max(-a).max(-b);
                let lp = |e: i64| Polynomial::var(lam).pow(e as u32);
                let lhs = &lp(a + c) * &p.substitute(&bind);
                let rhs = &lp(b + c) * p;
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Infers the grading and confirms it with the symbolic λ check.
    pub fn check_graded(&self) -> Result<GradingMatrix> {
        let g = self.infer_grading()?;
        if self.lambda_check(&g) {
            Ok(g)
        } else {
            Err(Error::NotGraded("λ identity fails".into()))
        }
    }

    pub fn graded(mut self) -> Result<Self> {
        self.grading = Some(self.check_graded()?);
        Ok(self)
    }

    pub fn direct_sum(&self, other: &MatrixFactorisation) -> Result<MatrixFactorisation> {
        if self.w() != other.w() {
            return Err(Error::PotentialMismatch);
        }
        let mut constraints = self.constraints.clone();
        for c in &other.constraints {
            if !constraints.contains(c) {
                constraints.push(c.clone());
            }
        }
        let grading = match (&self.grading, &other.grading) {
            (Some(a), Some(b)) => Some(a.direct_sum(b).normalised()),
            _ => None,
        };
        Ok(MatrixFactorisation {
            e: self.e.direct_sum(&other.e),
            j: self.j.direct_sum(&other.j),
            potential: self.potential.clone(),
            grading,
            constraints,
        })
    }

    /// U·Q·U⁻¹ for an even invertible U.
    pub fn similarity(&self, u: &PolyMatrix) -> Result<MatrixFactorisation> {
        let n = self.rank();
        if u.rows() != 2 * n || u.cols() != 2 * n {
            return Err(Error::Shape("U must be 2N x 2N".into()));
        }
        if !u.submatrix(0, n, n, n).is_zero() || !u.submatrix(n, 0, n, n).is_zero() {
            return Err(Error::Invalid("U must be even".into()));
        }
        let (u1, u2) = (u.submatrix(0, 0, n, n), u.submatrix(n, n, n, n));
        let (u1i, u2i) = (u1.inverse()?, u2.inverse()?);
        let mut out = self.clone();
        out.e = &(&u1 * &self.e) * &u2i;
        out.j = &(&u2 * &self.j) * &u1i;
        out.grading = None;
        Ok(out)
    }

    /// Graded tensor product; a factorisation of W_a + W_b.
    pub fn tensor_product(&self, other: &MatrixFactorisation) -> Result<MatrixFactorisation> {
        let potential = self.potential.plus(&other.potential)?;
        let (e, j) = tensor_blocks(&self.e, &self.j, &other.e, &other.j);
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().cloned());
        let grading = match (&self.grading, &other.grading) {
            (Some(a), Some(b)) => Some(tensor_charges(a, b)),
            _ => None,
        };
        Ok(MatrixFactorisation { e, j, potential, grading, constraints })
    }

    /// Upper triangular [[Q, λψ], [0, Q]] for a closed odd ψ.
    pub fn cone(&self, psi: &Morphism, lambda: &Rational) -> Result<MatrixFactorisation> {
        if psi.parity != Parity::Odd {
            return Err(Error::Invalid("cone needs an odd morphism".into()));
        }
        let gb = self.constraint_basis(&ResourceBudget::unlimited()).expect("unlimited budget");
        let d = differential(&self.q(), &self.q(), &psi.a, Parity::Odd);
        let d = match &gb {
            Some(gb) => d.map(|p| gb.normal_form(p)),
            None => d,
        };
        if !d.is_zero() {
            return Err(Error::NotClosed);
        }
        let n = self.rank();
        let l = Polynomial::constant(lambda.clone());
        let p1 = psi.a.submatrix(0, n, n, n).scale(&l);
        let p2 = psi.a.submatrix(n, 0, n, n).scale(&l);
        let z = PolyMatrix::zeros(n, n);
        let mut out = self.clone();
        out.e = PolyMatrix::block2(&self.e, &p1, &z, &self.e)?;
        out.j = PolyMatrix::block2(&self.j, &p2, &z, &self.j)?;
        out.grading = None;
        Ok(out)
    }

    /// Removes trivial rank-one summands (constant entries of E or J) by
    /// row and column operations. Returns the reduced factorisation and the
    /// number of summands removed.
    pub fn split_trivial(&self) -> (MatrixFactorisation, usize) {
        let mut cur = self.clone();
        let mut removed = 0;
        'outer: loop {
            let n = cur.rank();
            if n <= 1 {
                break;
            }
            for swap in [false, true] {
                let (e, j) = if swap { (&cur.j, &cur.e) } else { (&cur.e, &cur.j) };
                for r in 0..n {
                    for c in 0..n {
                        let Some(k) = e[(r, c)].as_constant().filter(|k| !k.is_zero()) else {
                            continue;
                        };
                        let (e2, j2) = eliminate(e, j, r, c, &k);
                        let (e2, j2) = if swap { (j2, e2) } else { (e2, j2) };
                        cur.e = e2;
                        cur.j = j2;
                        cur.grading = None;
                        removed += 1;
                        continue 'outer;
                    }
                }
            }
            break;
        }
        (cur, removed)
    }
}

/// Clears row r and column c of E around the unit pivot E[r][c] = k and
/// drops the trivial summand.
fn eliminate(e: &PolyMatrix, j: &PolyMatrix, r: usize, c: usize, k: &Rational) -> (PolyMatrix, PolyMatrix) {
    let n = e.rows();
    let kinv = Polynomial::constant(Rational::one() / k);
    let mut u = PolyMatrix::identity(n);
    for i in (0..n).filter(|&i| i != r) {
        u[(i, r)] = -(&e[(i, c)] * &kinv);
    }
    let mut v = PolyMatrix::identity(n);
    for l in (0..n).filter(|&l| l != c) {
        v[(c, l)] = -(&e[(r, l)] * &kinv);
    }
    let e2 = &(&u * e) * &v;
    let j2 = &(&v.inverse().unwrap() * j) * &u.inverse().unwrap();
    (e2.minor(r, c), j2.minor(c, r))
}

pub fn constraint_basis(constraints: &[Polynomial], budget: &ResourceBudget) -> std::result::Result<Option<GroebnerBasis>, Exhausted> {
    if constraints.iter().all(Polynomial::is_zero) {
        return Ok(None);
    }
    let order = TermOrder::for_polys(OrderKind::Block, constraints);
    groebner_basis(constraints, &order, budget).map(Some)
}

/// E, J of the tensor product of (Ea, Ja) and (Eb, Jb).
pub fn tensor_blocks(ea: &PolyMatrix, ja: &PolyMatrix, eb: &PolyMatrix, jb: &PolyMatrix) -> (PolyMatrix, PolyMatrix) {
    let ia = PolyMatrix::identity(ea.rows());
    let ib = PolyMatrix::identity(eb.rows());
    let e = PolyMatrix::block2(&ja.kron(&ib), &(-&ia.kron(eb)), &ia.kron(jb), &ea.kron(&ib)).unwrap();
    let j = PolyMatrix::block2(&ea.kron(&ib), &ia.kron(eb), &(-&ia.kron(jb)), &ja.kron(&ib)).unwrap();
    (e, j)
}

/// Charges of the tensor product; rows of E are (odd, even) then
/// (even, odd) pairs, columns (even, even) then (odd, odd).
pub fn tensor_charges(a: &GradingMatrix, b: &GradingMatrix) -> GradingMatrix {
    let (na, nb) = (a.rank(), b.rank());
    let (ae, ao) = (&a.charges[..na], &a.charges[na..]);
    let (be, bo) = (&b.charges[..nb], &b.charges[nb..]);
    let mut c = Vec::with_capacity(4 * na * nb);
    let mut push = |x: &[Rational], y: &[Rational]| {
        for p in x {
            for q in y {
                c.push(p + q);
            }
        }
    };
    push(ao, be);
    push(ae, bo);
    push(ae, be);
    push(ao, bo);
    GradingMatrix::new(c).normalised()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub a: PolyMatrix,
    pub parity: Parity,
    pub rcharge: Option<Rational>,
}

impl Morphism {
    /// Parity is read off the block structure.
    pub fn new(a: PolyMatrix) -> Result<Morphism> {
        let n = a.rows() / 2;
        let diag = a.submatrix(0, 0, n, n).is_zero() && a.submatrix(n, n, n, n).is_zero();
        let off = a.submatrix(0, n, n, n).is_zero() && a.submatrix(n, 0, n, n).is_zero();
        let parity = match (diag, off) {
            (true, _) => Parity::Odd,
            (false, true) => Parity::Even,
            _ => return Err(Error::Invalid("morphism has no definite parity".into())),
        };
        Ok(Morphism { a, parity, rcharge: None })
    }
}

/// d(A) = Q1·A − (−1)^{s(A)}·A·Q2.
pub fn differential(q1: &PolyMatrix, q2: &PolyMatrix, a: &PolyMatrix, parity: Parity) -> PolyMatrix {
    let l = q1 * a;
    let r = a * q2;
    match parity {
        Parity::Even => &l - &r,
        Parity::Odd => &l + &r,
    }
}

/// σ = diag(1_N, −1_N).
pub fn sigma(n: usize) -> PolyMatrix {
    let mut s = PolyMatrix::identity(2 * n);
    for i in n..2 * n {
        s[(i, i)] = Polynomial::int(-1);
    }
    s
}

/// Generic morphisms of given parity and R-charge: one coordinate per
/// (row, column, monomial).
fn morphism_slots(q: &MatrixFactorisation, g: &GradingMatrix, parity: Parity, r: &Rational) -> Vec<(usize, usize, Monomial)> {
    let n = q.rank();
    let vars: Vec<(Var, Rational)> = q.potential.vars().into_iter().map(|v| (v, q.potential.ws.weight(v).unwrap())).collect();
    let mut out = Vec::new();
    for i in 0..2 * n {
        for j in 0..2 * n {
            let odd = (i < n) != (j < n);
            if odd != (parity == Parity::Odd) {
                continue;
            }
            let w = &g.charges[j] - &g.charges[i] + r;
            for m in monomials_of_weight(&vars, &w) {
                out.push((i, j, m));
            }
        }
    }
    out
}

/// Basis of the cohomology of d_QQ on morphisms of given parity and R-charge.
pub fn morphism_space(q: &MatrixFactorisation, parity: Parity, r: &Rational) -> Result<Vec<Morphism>> {
    if !q.constraints.is_empty() || q.e.entries().iter().chain(q.j.entries()).any(|p| !p.param_vars().is_empty()) {
        return Err(Error::Invalid("morphism spaces need a parameter-free factorisation".into()));
    }
    let g = match &q.grading {
        Some(g) => g.clone(),
        None => q.check_graded()?,
    };
    let qm = q.q();
    let n2 = 2 * q.rank();
    let src = morphism_slots(q, &g, parity, r);
    let tgt = morphism_slots(q, &g, parity.flip(), &(r + Rational::one()));
    let prev = morphism_slots(q, &g, parity.flip(), &(r - Rational::one()));
    let index = |slots: &[(usize, usize, Monomial)]| -> HashMap<(usize, usize, Monomial), usize> {
        slots.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect()
    };
    let build = |(i, j, m): &(usize, usize, Monomial)| {
        let mut a = PolyMatrix::zeros(n2, n2);
        a[(*i, *j)] = Polynomial::term(Rational::one(), m.clone());
        a
    };
    let coords = |a: &PolyMatrix, idx: &HashMap<(usize, usize, Monomial), usize>, len: usize| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); len];
        for i in 0..n2 {
            for j in 0..n2 {
                for (m, c) in a[(i, j)].terms() {
                    let k = idx[&(i, j, m.clone())];
                    v[k] += c;
                }
            }
        }
        v
    };
    let tgt_idx = index(&tgt);
    let src_idx = index(&src);
    // columns of d: images of the source basis
    let d_cols: Vec<Vec<Rational>> = src
        .iter()
        .map(|s| coords(&differential(&qm, &qm, &build(s), parity), &tgt_idx, tgt.len()))
        .collect();
    let d_mat: linalg::Mat = (0..tgt.len()).map(|row| d_cols.iter().map(|c| c[row].clone()).collect()).collect();
    let kernel = if tgt.is_empty() {
        (0..src.len())
            .map(|k| {
                let mut v = vec![Rational::zero(); src.len()];
                v[k] = Rational::one();
                v
            })
            .collect()
    } else {
        linalg::nullspace(&d_mat, src.len())
    };
    let image: Vec<Vec<Rational>> = prev
        .iter()
        .map(|s| coords(&differential(&qm, &qm, &build(s), parity.flip()), &src_idx, src.len()))
        .collect();
    let mut span = image.clone();
    let mut base_rank = linalg::rank(&span);
    let mut out = Vec::new();
    for v in kernel {
        span.push(v.clone());
        let rk = linalg::rank(&span);
        if rk > base_rank {
            base_rank = rk;
            let mut a = PolyMatrix::zeros(n2, n2);
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    let (i, j, m) = &src[k];
                    a[(*i, *j)] += Polynomial::term(c.clone(), m.clone());
                }
            }
            out.push(Morphism { a, parity, rcharge: Some(r.clone()) });
        } else {
            span.pop();
        }
    }
    Ok(out)
}

/// Matrix factorisation of V1(x) − V2(y).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub name: Option<String>,
    pub mf: MatrixFactorisation,
    pub v1: Potential,
    pub v2: Potential,
    pub x_vars: Vec<Var>,
    pub y_vars: Vec<Var>,
}

impl Defect {
    pub fn new(
        v1: Potential,
        v2: Potential,
        x_vars: Vec<Var>,
        y_vars: Vec<Var>,
        e: PolyMatrix,
        j: PolyMatrix,
        constraints: Vec<Polynomial>,
    ) -> Result<Defect> {
        if x_vars.iter().any(|v| y_vars.contains(v)) {
            return Err(Error::OverlappingVariables);
        }
        let mut xs = x_vars.clone();
        xs.sort();
        let mut v1s = v1.vars();
        v1s.sort();
        let mut ys = y_vars.clone();
        ys.sort();
        let mut v2s = v2.vars();
        v2s.sort();
        if xs != v1s || ys != v2s {
            return Err(Error::Invalid("variable lists do not match the potentials".into()));
        }
        let w = Potential {
            poly: &v1.poly - &v2.poly,
            ws: v1.ws.merged(&v2.ws)?,
            name: None,
        };
        let mf = MatrixFactorisation::new(e, j, w)?.with_constraints(constraints);
        Ok(Defect { name: None, mf, v1, v2, x_vars, y_vars })
    }

    pub fn named(mut self, name: &str) -> Defect {
        self.name = Some(name.to_string());
        self
    }

    pub fn rank(&self) -> usize {
        self.mf.rank()
    }

    fn with_mf(&self, mf: MatrixFactorisation) -> Defect {
        Defect { mf, ..self.clone() }
    }

    /// [[0, Jᵀ], [−Eᵀ, 0]] as a defect from V2 to V1.
    pub fn adjoint(&self) -> Result<Defect> {
        if self.y_vars.len() % 2 == 1 {
            return Err(Error::UnsupportedParity);
        }
        let e = self.mf.j.transpose();
        let j = -&self.mf.e.transpose();
        let mut d = Defect::new(
            self.v2.clone(),
            self.v1.clone(),
            self.y_vars.clone(),
            self.x_vars.clone(),
            e,
            j,
            self.mf.constraints.clone(),
        )?;
        d.name = self.name.as_ref().map(|n| format!("{n}†"));
        Ok(d)
    }

    pub fn direct_sum(&self, other: &Defect) -> Result<Defect> {
        if self.x_vars != other.x_vars || self.y_vars != other.y_vars {
            return Err(Error::PotentialMismatch);
        }
        Ok(self.with_mf(self.mf.direct_sum(&other.mf)?))
    }

    pub fn similarity(&self, u: &PolyMatrix) -> Result<Defect> {
        Ok(self.with_mf(self.mf.similarity(u)?))
    }

    pub fn cone(&self, psi: &Morphism, lambda: &Rational) -> Result<Defect> {
        Ok(self.with_mf(self.mf.cone(psi, lambda)?))
    }

    /// Defect V1a + V1b ⊶ V2a + V2b.
    pub fn tensor_product(&self, other: &Defect) -> Result<Defect> {
        let v1 = self.v1.plus(&other.v1)?;
        let v2 = self.v2.plus(&other.v2)?;
        let (e, j) = tensor_blocks(&self.mf.e, &self.mf.j, &other.mf.e, &other.mf.j);
        let mut constraints = self.mf.constraints.clone();
        constraints.extend(other.mf.constraints.iter().cloned());
        let xs = self.x_vars.iter().chain(&other.x_vars).copied().collect();
        let ys = self.y_vars.iter().chain(&other.y_vars).copied().collect();
        Defect::new(v1, v2, xs, ys, e, j, constraints)
    }

    /// Substitutes y ↦ φ(y) (weight preserving, invertible): a defect
    /// between V1 and V2∘φ.
    pub fn transform_variables(&self, subst: &HashMap<Var, Polynomial>) -> Result<Transformed> {
        let n = self.y_vars.len();
        let mut jac = PolyMatrix::zeros(n, n);
        for (i, yi) in self.y_vars.iter().enumerate() {
            let img = subst.get(yi).cloned().unwrap_or_else(|| Polynomial::var(*yi));
            if weight_of(&img, &self.v2.ws).ok() != self.v2.ws.weight(*yi) {
                return Err(Error::Invalid(format!("substitution for {yi} is not weight preserving")));
            }
            for (k, yk) in self.y_vars.iter().enumerate() {
                jac[(i, k)] = img.differentiate(*yk);
            }
        }
        let det = jac.det()?.as_constant().filter(|d| !d.is_zero()).ok_or(Error::NotInvertible)?;
        let mut weights: Vec<Rational> = self.y_vars.iter().map(|v| self.v2.ws.weight(*v).unwrap()).collect();
        weights.sort();
        let distinct = weights.windows(2).all(|w| w[0] != w[1]);
        let cubic = self.v2.poly.geometric_coefficients().keys().all(|m| m.degree() >= 3);
        let mut v2 = Potential::new(self.v2.poly.substitute(subst))?;
        v2.name = self.v2.name.clone();
        let d = Defect::new(
            self.v1.clone(),
            v2,
            self.x_vars.clone(),
            self.y_vars.clone(),
            self.mf.e.substitute(subst),
            self.mf.j.substitute(subst),
            self.mf.constraints.clone(),
        )?;
        Ok(Transformed { defect: d, jacobian_det: det, applicable: distinct || cubic })
    }
}

#[derive(Clone, Debug)]
pub struct Transformed {
    pub defect: Defect,
    pub jacobian_det: Rational,
    /// Whether the pairwise-distinct-weights or cubic condition holds.
    pub applicable: bool,
}

/// The nested Koszul tensor product of the rank-one difference quotient
/// factorisations of V(x) − V(y), with J_i = x_i − g(y_i).
fn difference_defect(v: &Potential, xs: &[Var], ys: &[Var], g: &HashMap<Var, Polynomial>) -> Result<Defect> {
    let vars = v.vars();
    if vars.len() != xs.len() || vars.len() != ys.len() {
        return Err(Error::Invalid("copy variable lists have the wrong length".into()));
    }
    let gy: Vec<Polynomial> = ys.iter().map(|y| g.get(y).cloned().unwrap_or_else(|| Polynomial::var(*y))).collect();
    let eval = |k: usize| {
        // V(x_1..x_k, g(y)_{k+1}..g(y)_n)
        let b: HashMap<Var, Polynomial> = vars
            .iter()
            .enumerate()
            .map(|(i, &z)| (z, if i < k { Polynomial::var(xs[i]) } else { gy[i].clone() }))
            .collect();
        v.poly.substitute(&b)
    };
    let mut e = PolyMatrix::from_rows(vec![vec![Polynomial::one()]])?;
    let mut j = e.clone();
    let mut first = true;
    for i in 0..vars.len() {
        let ji = &Polynomial::var(xs[i]) - &gy[i];
        let ei = (&eval(i + 1) - &eval(i)).div_exact(&ji)?;
        let (ei, ji) = (PolyMatrix::from_rows(vec![vec![ei]])?, PolyMatrix::from_rows(vec![vec![ji]])?);
        if first {
            e = ei;
            j = ji;
            first = false;
        } else {
            // the displayed convention is the shift of the Koszul one
            let (te, tj) = tensor_blocks(&e, &j, &ei, &ji);
            (e, j) = (tj, te);
        }
    }
    let b1: Vec<(Var, Var)> = vars.iter().copied().zip(xs.iter().copied()).collect();
    let b2: Vec<(Var, Var)> = vars.iter().copied().zip(ys.iter().copied()).collect();
    Defect::new(v.rename(&b1)?, v.rename(&b2)?, xs.to_vec(), ys.to_vec(), e, j, Vec::new())
}

pub fn identity_defect(v: &Potential, xs: &[Var], ys: &[Var]) -> Result<Defect> {
    difference_defect(v, xs, ys, &HashMap::new())
}

/// Identity defect twisted by a linear symmetry g of V, acting on the y copy.
pub fn twisted_identity(v: &Potential, xs: &[Var], ys: &[Var], g: &HashMap<Var, Polynomial>) -> Result<Defect> {
    let vars = v.vars();
    let to_y: HashMap<Var, Polynomial> = vars.iter().zip(ys).map(|(a, b)| (*a, Polynomial::var(*b))).collect();
    let vy = v.poly.substitute(&to_y);
    if vy.substitute(g) != vy {
        return Err(Error::NotSymmetry);
    }
    difference_defect(v, xs, ys, g)
}

/// Fresh variable names `prefix1..prefixN`.
pub fn fresh_vars(prefix: &str, n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::geo(&format!("{prefix}{i}"))).collect()
}

/// Matrix from string literals; panics on parse errors.
pub fn mat(rows: &[&[&str]]) -> PolyMatrix {
    PolyMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| crate::poly::p(s)).collect()).collect()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, p};

    fn pot(s: &str) -> Potential {
        Potential::parse(s).unwrap()
    }

    #[test]
    fn rank_one() {
        let m = MatrixFactorisation::new(mat(&[&["x1"]]), mat(&[&["x1^2"]]), pot("x1^3")).unwrap();
        assert!(m.mf_residual().is_zero());
        let g = m.check_graded().unwrap();
        assert_eq!(g.charges.len(), 2);
        let bad = MatrixFactorisation::new(mat(&[&["x1"]]), mat(&[&["x1^2 + 1"]]), pot("x1^3")).unwrap();
        assert!(!bad.mf_residual().is_zero());
    }

    #[test]
    fn tensor_of_rank_one() {
        let a = MatrixFactorisation::new(mat(&[&["x1"]]), mat(&[&["x1^2"]]), pot("x1^3")).unwrap().graded().unwrap();
        let b = MatrixFactorisation::new(mat(&[&["y1"]]), mat(&[&["-y1^2"]]), Potential::new(p("-y1^3")).unwrap())
            .unwrap()
            .graded()
            .unwrap();
        let t = a.tensor_product(&b).unwrap();
        assert_eq!(t.rank(), 2);
        assert!(t.mf_residual().is_zero());
        let g = t.grading.clone().unwrap();
        assert!(t.lambda_check(&g));
        assert_eq!(t.check_graded().unwrap(), g);
        let q = t.q();
        let s = sigma(2);
        assert!((&(&q * &s) + &(&s * &q)).is_zero());
        assert!(a.tensor_product(&a).is_err());
    }

    #[test]
    fn identity_defects() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^2"), &xs[..1], &ys[..1]).unwrap();
        assert_eq!(d.mf.e, mat(&[&["x1 + y1"]]));
        assert_eq!(d.mf.j, mat(&[&["x1 - y1"]]));
        for v in ["x1^6 + x2^2", "x1^3 + x2^4", "x1^5*x2 + x2^3"] {
            let d = identity_defect(&pot(v), &xs, &ys).unwrap();
            assert_eq!(d.rank(), 2);
            assert!(d.mf.mf_residual().is_zero());
            assert!(d.mf.check_graded().is_ok());
        }
    }

    #[test]
    fn twisted() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let g: HashMap<_, _> = [(ys[0], p("-y1"))].into();
        let d = twisted_identity(&pot("x1^2"), &xs[..1], &ys[..1], &g).unwrap();
        assert_eq!(d.mf.j, mat(&[&["x1 + y1"]]));
        assert!(d.mf.mf_residual().is_zero());
        let g: HashMap<_, _> = [(ys[0], p("2*y1"))].into();
        assert!(matches!(twisted_identity(&pot("x1^2"), &xs[..1], &ys[..1], &g), Err(Error::NotSymmetry)));
    }

    #[test]
    fn adjoint_parity() {
        let xs = fresh_vars("x", 1);
        let ys = fresh_vars("y", 1);
        let d = identity_defect(&pot("x1^2"), &xs, &ys).unwrap();
        assert!(matches!(d.adjoint(), Err(Error::UnsupportedParity)));
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^3 + x2^3"), &xs, &ys).unwrap();
        let a = d.adjoint().unwrap();
        assert!(a.mf.mf_residual().is_zero());
        assert_eq!(a.adjoint().unwrap().mf.e, -&d.mf.e);
    }

    #[test]
    fn sums_and_similarity() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^3 + x2^3"), &xs, &ys).unwrap().named("id");
        let s = d.direct_sum(&d).unwrap();
        assert_eq!(s.rank(), 4);
        assert!(s.mf.mf_residual().is_zero());
        let mut u = PolyMatrix::identity(4);
        u[(0, 0)] = Polynomial::int(2);
        u[(2, 3)] = Polynomial::int(1);
        u[(3, 2)] = Polynomial::int(1);
        u[(2, 2)] = Polynomial::zero();
        u[(3, 3)] = Polynomial::zero();
        let t = d.similarity(&u).unwrap();
        assert!(t.mf.mf_residual().is_zero());
        let mut odd = PolyMatrix::zeros(4, 4);
        odd[(0, 2)] = Polynomial::one();
        assert!(d.similarity(&odd).is_err());
    }

    #[test]
    fn morphisms_of_identity() {
        let xs = fresh_vars("x", 1);
        let ys = fresh_vars("y", 1);
        let d = identity_defect(&pot("x1^2"), &xs, &ys).unwrap();
        let even = morphism_space(&d.mf, Parity::Even, &Rational::zero()).unwrap();
        assert_eq!(even.len(), 1);
        let odd = morphism_space(&d.mf, Parity::Odd, &Rational::zero()).unwrap();
        assert_eq!(odd.len(), 0);
    }

    #[test]
    fn cone_of_closed_morphism() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^3 + x2^3"), &xs, &ys).unwrap();
        let zero = Morphism::new(PolyMatrix::zeros(4, 4)).unwrap();
        let c = d.cone(&zero, &Rational::one()).unwrap();
        assert_eq!(c.mf.e, d.direct_sum(&d).unwrap().mf.e);
        let mut not_closed = PolyMatrix::zeros(4, 4);
        not_closed[(0, 2)] = Polynomial::one();
        let m = Morphism::new(not_closed).unwrap();
        assert!(matches!(d.cone(&m, &Rational::one()), Err(Error::NotClosed)));
    }

    #[test]
    fn trivial_summands() {
        // (x) ⊕ trivial (1, x^3) conjugated by a row operation
        let e = mat(&[&["x1", "0"], &["x1^2", "1"]]);
        let j = mat(&[&["x1^2", "0"], &["-x1^4", "x1^3"]]);
        let m = MatrixFactorisation::new(e, j, pot("x1^3")).unwrap();
        assert!(m.mf_residual().is_zero());
        assert_eq!(m.constant_entries().len(), 1);
        let (r, k) = m.split_trivial();
        assert_eq!(k, 1);
        assert_eq!(r.rank(), 1);
        assert!(r.mf_residual().is_zero());
    }

    #[test]
    fn variable_transform() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^2 + x2^2"), &xs, &ys).unwrap();
        let s: HashMap<_, _> = [(ys[0], p("-y1"))].into();
        let t = d.transform_variables(&s).unwrap();
        assert_eq!(t.jacobian_det, int(-1));
        assert!(t.defect.mf.mf_residual().is_zero());
        let bad: HashMap<_, _> = [(ys[0], p("y1^2"))].into();
        assert!(d.transform_variables(&bad).is_err());
    }
}
