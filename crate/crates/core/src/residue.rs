//! Jacobi rings, Grothendieck residues and quantum dimensions.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{monomials_of_weight, Potential};
use crate::groebner::{buchberger, GroebnerBasis, OrderKind, ResourceBudget, TermOrder};
use crate::linalg;
use crate::mf::{constraint_basis, Defect, MatrixFactorisation};
use crate::poly::{Monomial, PolyMatrix, Polynomial, Rational, Var};

const MAX_MILNOR: usize = 100_000;

/// C[z]/⟨∂W⟩ together with the data needed to evaluate residues.
#[derive(Clone, Debug)]
pub struct JacobiRing {
    potential: Potential,
    vars: Vec<Var>,
    gb: GroebnerBasis,
    basis: Vec<Monomial>,
    hessian_nf: Polynomial,
    socle: Monomial,
    socle_coeff: Rational,
    socle_weight: Rational,
    // residue of every monomial of socle weight
    table: HashMap<Monomial, Rational>,
}

impl JacobiRing {
    pub fn new(v: &Potential) -> Result<JacobiRing> {
        JacobiRing::with_order(v, &v.vars())
    }

    /// Uses `vars` as the order of ∂_{z_1}, …, ∂_{z_k}.
    pub fn with_order(v: &Potential, vars: &[Var]) -> Result<JacobiRing> {
        if !v.poly.param_vars().is_empty() {
            return Err(Error::Invalid("potential has parameter coefficients".into()));
        }
        let mut sorted = vars.to_vec();
        sorted.sort();
        let mut own = v.vars();
        own.sort();
        if sorted != own {
            return Err(Error::Invalid("variable order does not match the potential".into()));
        }
        let partials: Vec<Polynomial> = vars.iter().map(|z| v.poly.differentiate(*z)).collect();
        let order = TermOrder::new(OrderKind::Grevlex, vars.to_vec());
        let gb = buchberger(&partials, &order, &ResourceBudget::unlimited()).expect("unlimited budget");
        let basis = gb.standard_monomials(MAX_MILNOR).ok_or(Error::NotIsolatedSingularity)?;
        let hess = PolyMatrix::from_vec(
            vars.len(),
            vars.len(),
            partials.iter().flat_map(|d| vars.iter().map(|z| d.differentiate(*z))).collect(),
        )?
        .det()?;
        let hessian_nf = gb.normal_form(&hess);
        let weight = |m: &Monomial| v.ws.monomial_weight(m).expect("weights cover the ring");
        let socle_weight = vars
            .iter()
            .map(|z| v.ws.total() - v.ws.weight(*z).unwrap() * Rational::from_integer(2.into()))
            .fold(Rational::zero(), |a, b| a + b);
        let top: Vec<&Monomial> = basis.iter().filter(|m| weight(m) == socle_weight).collect();
        if top.len() != 1 {
            return Err(Error::Invalid(format!("socle has dimension {}", top.len())));
        }
        let socle = top[0].clone();
        let socle_coeff = hessian_nf.coeff(&socle);
        if socle_coeff.is_zero() {
            return Err(Error::Invalid("hessian vanishes in the Jacobi ring".into()));
        }
        let mu = Rational::from_integer(basis.len().into());
        let ws: Vec<(Var, Rational)> = vars.iter().map(|z| (*z, v.ws.weight(*z).unwrap())).collect();
        let table = monomials_of_weight(&ws, &socle_weight)
            .into_iter()
            .map(|m| {
                let c = gb.normal_form(&Polynomial::term(Rational::one(), m.clone())).coeff(&socle);
                (m, c * &mu / &socle_coeff)
            })
            .collect();
        Ok(JacobiRing {
            potential: v.clone(),
            vars: vars.to_vec(),
            gb,
            basis,
            hessian_nf,
            socle,
            socle_coeff,
            socle_weight,
            table,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn milnor(&self) -> usize {
        self.basis.len()
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn hessian_nf(&self) -> &Polynomial {
        &self.hessian_nf
    }

    pub fn socle(&self) -> (&Monomial, &Rational) {
        (&self.socle, &self.socle_coeff)
    }

    pub fn socle_weight(&self) -> &Rational {
        &self.socle_weight
    }

    /// res_z[f / ∂_{z_1}W ⋯ ∂_{z_k}W]. Variables outside the ring are
    /// carried along as coefficients.
    pub fn residue(&self, f: &Polynomial) -> Polynomial {
        let inside: HashSet<Var> = self.vars.iter().copied().collect();
        let mut out = Polynomial::zero();
        for (m, c) in f.collect_by(|v| inside.contains(&v)) {
            if let Some(k) = self.table.get(&m) {
                if !k.is_zero() {
                    out += c.scale(k);
                }
            }
        }
        out
    }
}

pub fn jacobi_ring(v: &Potential) -> Result<JacobiRing> {
    JacobiRing::new(v)
}

pub fn residue(f: &Polynomial, ring: &JacobiRing) -> Polynomial {
    ring.residue(f)
}

/// Residues from the transformation law: z_i^{ν_i} = Σ_j C_ij ∂_jW gives
/// res[f/∂W] = coefficient of z^{ν−1} in det(C)·f. C is found by solving
/// for homogeneous coefficients directly, without a Gröbner basis.
#[derive(Clone, Debug)]
pub struct LiftOracle {
    vars: Vec<Var>,
    nu: Vec<u32>,
    det_c: Polynomial,
}

impl LiftOracle {
    pub fn new(v: &Potential) -> Result<LiftOracle> {
        let vars = v.vars();
        if !v.poly.param_vars().is_empty() {
            return Err(Error::Invalid("potential has parameter coefficients".into()));
        }
        let partials: Vec<Polynomial> = vars.iter().map(|z| v.poly.differentiate(*z)).collect();
        let ws: Vec<(Var, Rational)> = vars.iter().map(|z| (*z, v.ws.weight(*z).unwrap())).collect();
        let d = v.ws.total().clone();
        let k = vars.len();
        let mut c = PolyMatrix::zeros(k, k);
        let mut nu = Vec::with_capacity(k);
        for i in 0..k {
            let mut found = false;
            for e in 1..=512u32 {
                let target = Polynomial::var(vars[i]).pow(e);
                let tw = &ws[i].1 * Rational::from_integer(e.into());
                if let Some(row) = lift_row(&partials, &ws, &d, &target, &tw) {
                    for (j, p) in row.into_iter().enumerate() {
                        c[(i, j)] = p;
                    }
                    nu.push(e);
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::NotIsolatedSingularity);
            }
        }
        Ok(LiftOracle { det_c: c.det()?, vars, nu })
    }

    pub fn nu(&self) -> &[u32] {
        &self.nu
    }

    pub fn residue(&self, f: &Polynomial) -> Polynomial {
        let inside: HashSet<Var> = self.vars.iter().copied().collect();
        let groups = f.collect_by(|v| inside.contains(&v));
        let target = Monomial::from_pairs(self.vars.iter().zip(&self.nu).map(|(v, n)| (*v, n - 1)));
        let mut out = Polynomial::zero();
        for (m, c) in self.det_c.terms() {
            if let Some(rest) = target.div(m) {
                if let Some(g) = groups.get(&rest) {
                    out += g.scale(c);
                }
            }
        }
        out
    }
}

/// Solves target = Σ_j C_j·partials_j with C_j homogeneous of weight
/// tw − (D − w_j).
fn lift_row(
    partials: &[Polynomial],
    ws: &[(Var, Rational)],
    d: &Rational,
    target: &Polynomial,
    tw: &Rational,
) -> Option<Vec<Polynomial>> {
    let slots: Vec<(usize, Monomial)> = ws
        .iter()
        .enumerate()
        .flat_map(|(j, (_, wj))| {
            let w = tw - (d - wj);
            monomials_of_weight(ws, &w).into_iter().map(move |m| (j, m))
        })
        .collect();
    let rows: Vec<Monomial> = monomials_of_weight(ws, tw);
    let ridx: HashMap<&Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut a: linalg::Mat = vec![vec![Rational::zero(); slots.len()]; rows.len()];
    for (col, (j, m)) in slots.iter().enumerate() {
        for (pm, pc) in partials[*j].terms() {
            let r = ridx[&pm.mul(m)];
            a[r][col] += pc;
        }
    }
    let b: Vec<Rational> = rows.iter().map(|m| target.coeff(m)).collect();
    let x = linalg::solve(&a, &b)?;
    let mut out = vec![Polynomial::zero(); partials.len()];
    for ((j, m), c) in slots.into_iter().zip(x) {
        if !c.is_zero() {
            out[j] += Polynomial::term(c, m);
        }
    }
    Some(out)
}

pub fn residue_lift_oracle(f: &Polynomial, v: &Potential) -> Result<Polynomial> {
    Ok(LiftOracle::new(v)?.residue(f))
}

/// str(A) = tr(σA).
pub fn supertrace(a: &PolyMatrix) -> Polynomial {
    let n = a.rows() / 2;
    let mut s = Polynomial::zero();
    for i in 0..a.rows() {
        if i < n {
            s += &a[(i, i)];
        } else {
            s -= &a[(i, i)];
        }
    }
    s
}

/// str of a product, computing only the diagonal of the final factor.
pub fn supertrace_of_product(mats: &[PolyMatrix]) -> Polynomial {
    let Some((last, init)) = mats.split_last() else {
        return Polynomial::zero();
    };
    let n2 = last.rows();
    let mut p = PolyMatrix::identity(n2);
    for m in init {
        p = &p * m;
    }
    let n = n2 / 2;
    let mut s = Polynomial::zero();
    for i in 0..n2 {
        let mut d = Polynomial::zero();
        for k in 0..n2 {
            if !p[(i, k)].is_zero() && !last[(k, i)].is_zero() {
                d += &p[(i, k)] * &last[(k, i)];
            }
        }
        if i < n {
            s += d;
        } else {
            s -= d;
        }
    }
    s
}

/// ⟨φ ψ⟩ = res_z[φ·str(∂_{z_1}Q ⋯ ∂_{z_k}Q·ψ)/∏∂W], derivatives in the
/// ring's variable order.
pub fn kapustin_li_in(ring: &JacobiRing, q: &PolyMatrix, phi: &Polynomial, psi: &PolyMatrix) -> Polynomial {
    let mut mats: Vec<PolyMatrix> = ring.vars().iter().map(|z| q.differentiate(*z)).collect();
    mats.push(psi.clone());
    let s = supertrace_of_product(&mats);
    ring.residue(&(phi * &s))
}

pub fn kapustin_li(q: &MatrixFactorisation, phi: &Polynomial, psi: &PolyMatrix) -> Result<Polynomial> {
    let ring = JacobiRing::new(&q.potential)?;
    Ok(kapustin_li_in(&ring, &q.q(), phi, psi))
}

/// (−1)^{k(k+1)/2}.
fn binom_sign(k: usize) -> Rational {
    if (k * (k + 1) / 2) % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumDimensions {
    pub ql: Polynomial,
    pub qr: Polynomial,
}

impl QuantumDimensions {
    pub fn product(&self) -> Polynomial {
        &self.ql * &self.qr
    }

    /// Both reduced modulo an ideal.
    pub fn reduced(&self, gb: Option<&GroebnerBasis>) -> QuantumDimensions {
        match gb {
            Some(gb) => QuantumDimensions { ql: gb.normal_form(&self.ql), qr: gb.normal_form(&self.qr) },
            None => self.clone(),
        }
    }

    pub fn swapped(&self) -> QuantumDimensions {
        QuantumDimensions { ql: self.qr.clone(), qr: self.ql.clone() }
    }
}

fn reduce_mod_constraints(d: &Defect, qd: QuantumDimensions) -> QuantumDimensions {
    let gb = constraint_basis(&d.mf.constraints, &ResourceBudget::unlimited()).expect("unlimited budget");
    qd.reduced(gb.as_ref())
}

/// Left and right quantum dimensions from the residue formulas, reduced
/// modulo the constraint ideal.
pub fn qdim(d: &Defect) -> Result<QuantumDimensions> {
    Ok(reduce_mod_constraints(d, qdim_unreduced(d)?))
}

pub fn qdim_unreduced(d: &Defect) -> Result<QuantumDimensions> {
    d.mf.check_graded()?;
    let q = d.mf.q();
    let mats: Vec<PolyMatrix> = d.x_vars.iter().chain(&d.y_vars).map(|z| q.differentiate(*z)).collect();
    // the integrand has weight 2ĉ, so only its y-free part reaches the
    // x-socle (and vice versa); evaluating there first is much cheaper
    let at = |vars: &[Var]| -> Vec<PolyMatrix> { mats.iter().map(|a| a.set_zero(vars)).collect() };
    let (n, m) = (d.x_vars.len(), d.y_vars.len());
    let jl = JacobiRing::with_order(&d.v1, &d.x_vars)?;
    let jr = JacobiRing::with_order(&d.v2, &d.y_vars)?;
    let ql = jl.residue(&supertrace_of_product(&at(&d.y_vars))).scale(&binom_sign(m));
    let qr = jr.residue(&supertrace_of_product(&at(&d.x_vars))).scale(&binom_sign(n));
    if !ql.geometric_vars().is_empty() {
        return Err(Error::ResidualDependence(format!("q_L = {ql}")));
    }
    if !qr.geometric_vars().is_empty() {
        return Err(Error::ResidualDependence(format!("q_R = {qr}")));
    }
    Ok(QuantumDimensions { ql, qr })
}

/// Q|_{y=0} and the boundary fermions ∂_{y_j}Q|_{y=0}.
pub fn fermions(d: &Defect) -> (PolyMatrix, Vec<PolyMatrix>) {
    let q = d.mf.q();
    let q1 = q.set_zero(&d.y_vars);
    let f = d.y_vars.iter().map(|y| q.differentiate(*y).set_zero(&d.y_vars)).collect();
    (q1, f)
}

/// Q|_{x=0} and ∂_{x_i}Q|_{x=0}.
pub fn dual_fermions(d: &Defect) -> (PolyMatrix, Vec<PolyMatrix>) {
    let q = d.mf.q();
    let q2 = q.set_zero(&d.x_vars);
    let f = d.x_vars.iter().map(|x| q.differentiate(*x).set_zero(&d.x_vars)).collect();
    (q2, f)
}

fn product(n2: usize, mats: &[PolyMatrix]) -> PolyMatrix {
    mats.iter().fold(PolyMatrix::identity(n2), |acc, m| &acc * m)
}

/// Quantum dimensions as boundary correlators of the fermions on
/// Q|_{y=0} (bulk V1) and Q|_{x=0} (bulk −V2).
pub fn qdim_via_fermions(d: &Defect) -> Result<QuantumDimensions> {
    d.mf.check_graded()?;
    let (n, m) = (d.x_vars.len(), d.y_vars.len());
    let n2 = 2 * d.rank();
    let (q1, f) = fermions(d);
    let jl = JacobiRing::with_order(&d.v1, &d.x_vars)?;
    let ql = kapustin_li_in(&jl, &q1, &Polynomial::one(), &product(n2, &f)).scale(&binom_sign(m));

    let (q2, ft) = dual_fermions(d);
    let neg = Potential::new(-&d.v2.poly)?;
    let jr = JacobiRing::with_order(&neg, &d.y_vars)?;
    // moving n odd factors past m and flipping the sign of m partials
    let mut sign = binom_sign(n);
    if (m + n * m) % 2 == 1 {
        sign = -sign;
    }
    let qr = kapustin_li_in(&jr, &q2, &Polynomial::one(), &product(n2, &ft)).scale(&sign);
    for p in [&ql, &qr] {
        if !p.geometric_vars().is_empty() {
            return Err(Error::ResidualDependence(format!("{p}")));
        }
    }
    Ok(reduce_mod_constraints(d, QuantumDimensions { ql, qr }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mf::{fresh_vars, identity_defect, twisted_identity};
    use crate::poly::{int, p, rat};

    fn pot(s: &str) -> Potential {
        Potential::parse(s).unwrap()
    }

    #[test]
    fn milnor_numbers() {
        assert_eq!(jacobi_ring(&pot("x1^3")).unwrap().milnor(), 2);
        assert_eq!(jacobi_ring(&pot("x1^12 + x2^2")).unwrap().milnor(), 11);
        assert_eq!(jacobi_ring(&pot("x1^3 + x2^3 + x3^3")).unwrap().milnor(), 8);
        let v = Potential {
            poly: p("x1^2*x2"),
            ws: crate::grading::WeightSystem::new([(Var::geo("x1"), rat(1, 2)), (Var::geo("x2"), int(1))], int(2)).unwrap(),
            name: None,
        };
        assert!(matches!(jacobi_ring(&v), Err(Error::NotIsolatedSingularity)));
    }

    #[test]
    fn residues() {
        let r = jacobi_ring(&pot("x1^3 + x2^3")).unwrap();
        assert_eq!(r.residue(&p("36*x1*x2")), Polynomial::int(4));
        let r2 = jacobi_ring(&pot("x1^2")).unwrap();
        assert_eq!(r2.residue(&p("1")), Polynomial::constant(rat(1, 2)));
        assert!(jacobi_ring(&pot("x1^3")).unwrap().residue(&p("x1^2")).is_zero());
        assert_eq!(residue_lift_oracle(&p("36*x1*x2"), &pot("x1^3 + x2^3")).unwrap(), Polynomial::int(4));
        assert_eq!(residue_lift_oracle(&p("1"), &pot("x1^2")).unwrap(), Polynomial::constant(rat(1, 2)));
    }

    #[test]
    fn oracle_agrees_on_mixed_potentials() {
        for v in ["x1^3*x2 + x2^3", "x1^2*x2 + x2^4", "x1^3 + x1*x2^3", "x1^4 + x2^4 + x1^2*x2^2"] {
            let v = pot(v);
            let ring = jacobi_ring(&v).unwrap();
            let oracle = LiftOracle::new(&v).unwrap();
            let hess = ring.hessian_nf().clone();
            assert_eq!(ring.residue(&hess), Polynomial::int(ring.milnor() as i64));
            assert_eq!(oracle.residue(&hess), Polynomial::int(ring.milnor() as i64));
            let ws: Vec<_> = ring.vars().iter().map(|z| (*z, v.ws.weight(*z).unwrap())).collect();
            for m in monomials_of_weight(&ws, ring.socle_weight()) {
                let f = Polynomial::term(int(1), m);
                assert_eq!(ring.residue(&f), oracle.residue(&f));
            }
        }
    }

    #[test]
    fn identity_qdims() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&pot("x1^2"), &xs[..1], &ys[..1]).unwrap();
        let one = QuantumDimensions { ql: Polynomial::one(), qr: Polynomial::one() };
        assert_eq!(qdim(&d).unwrap(), one);
        assert_eq!(qdim_via_fermions(&d).unwrap(), one);
        for v in ["x1^3 + x2^4", "x1^3*x2 + x2^3", "x1^6 + x2^2"] {
            let d = identity_defect(&pot(v), &xs, &ys).unwrap();
            assert_eq!(qdim(&d).unwrap(), one, "{v}");
            assert_eq!(qdim_via_fermions(&d).unwrap(), one, "{v}");
        }
    }

    #[test]
    fn twisted_qdims() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let g: HashMap<_, _> = [(ys[0], p("-y1"))].into();
        let d = twisted_identity(&pot("x1^2"), &xs[..1], &ys[..1], &g).unwrap();
        let q = qdim(&d).unwrap();
        assert_eq!(q.ql, Polynomial::int(-1));
        assert_eq!(q.qr, Polynomial::int(-1));
        assert_eq!(qdim_via_fermions(&d).unwrap(), q);
        let swap: HashMap<_, _> = [(ys[0], p("y2")), (ys[1], p("y1"))].into();
        let d = twisted_identity(&pot("x1^3 + x2^3"), &xs, &ys, &swap).unwrap();
        let q = qdim(&d).unwrap();
        assert_eq!(q.ql, Polynomial::int(-1));
        assert_eq!(q.qr, Polynomial::int(-1));
        assert_eq!(qdim_via_fermions(&d).unwrap(), q);
    }
}
