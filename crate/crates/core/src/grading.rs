//! Weight systems, central charges, grading matrices and the weight split
//! enumeration of admissible gradings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{display_cmp, fmt_rational, int, Monomial, Polynomial, Rational, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystem {
    weights: BTreeMap<Var, Rational>,
    total: Rational,
}

impl WeightSystem {
    pub fn new(weights: impl IntoIterator<Item = (Var, Rational)>, total: Rational) -> Result<WeightSystem> {
        let weights: BTreeMap<Var, Rational> = weights.into_iter().collect();
        if weights.values().any(|w| !w.is_positive()) || !total.is_positive() {
            return Err(Error::InvalidWeights);
        }
        Ok(WeightSystem { weights, total })
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    /// Weight of a variable; parameters weigh nothing.
    pub fn weight(&self, v: Var) -> Option<Rational> {
        if v.is_param() {
            return Some(Rational::zero());
        }
        self.weights.get(&v).cloned()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.weights.keys().copied().collect();
        v.sort_by(|a, b| display_cmp(*a, *b));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.weights.iter().map(|(v, w)| (*v, w))
    }

    pub fn monomial_weight(&self, m: &Monomial) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (v, e) in m.iter() {
            let w = self.weight(v).ok_or_else(|| Error::UnknownVariable(v.name().to_string()))?;
            acc += w * int(e as i64);
        }
        Ok(acc)
    }

    /// Multiplies every weight and the total by `c`.
    pub fn scaled(&self, c: &Rational) -> WeightSystem {
        WeightSystem {
            weights: self.weights.iter().map(|(v, w)| (*v, w * c)).collect(),
            total: &self.total * c,
        }
    }

    pub fn normalised(&self) -> WeightSystem {
        self.scaled(&(int(2) / &self.total))
    }

    /// Union with another system of the same total weight.
    pub fn merged(&self, other: &WeightSystem) -> Result<WeightSystem> {
        if self.total != other.total {
            return Err(Error::Invalid("weight systems with different totals".into()));
        }
        let mut weights = self.weights.clone();
        for (v, w) in &other.weights {
            if let Some(old) = weights.insert(*v, w.clone()) {
                if &old != w {
                    return Err(Error::OverlappingVariables);
                }
            }
        }
        Ok(WeightSystem { weights, total: self.total.clone() })
    }

    pub fn is_integral(&self) -> bool {
        self.total.is_integer() && self.weights.values().all(|w| w.is_integer())
    }

    /// Integer weight of a variable (panics on non-integral systems).
    pub fn int_weight(&self, v: Var) -> i64 {
        self.weight(v).and_then(|w| w.to_integer().to_i64()).expect("integral weight")
    }

    pub fn int_total(&self) -> i64 {
        self.total.to_integer().to_i64().expect("integral total")
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.vars() {
            write!(f, "|{v}|={} ", fmt_rational(&self.weights[&v]))?;
        }
        write!(f, "D={}", fmt_rational(&self.total))
    }
}

/// Common weighted degree of every term of `f`.
pub fn weight_of(f: &Polynomial, ws: &WeightSystem) -> Result<Rational> {
    let mut degs = BTreeSet::new();
    for (m, _) in f.terms() {
        degs.insert(ws.monomial_weight(m)?);
    }
    match degs.len() {
        0 => Err(Error::ZeroPolynomial),
        1 => Ok(degs.into_iter().next().unwrap()),
        _ => Err(Error::NotQuasiHomogeneous),
    }
}

/// Solves for weights making every term of `poly` have weight `d`.
pub fn infer_weights(poly: &Polynomial, d: &Rational) -> Result<WeightSystem> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut vars: Vec<Var> = poly.geometric_vars().into_iter().collect();
    vars.sort_by(|a, b| display_cmp(*a, *b));
    let rows: Vec<Vec<Rational>> = poly
        .geometric_coefficients()
        .keys()
        .map(|m| vars.iter().map(|&v| int(m.exponent(v) as i64)).collect())
        .collect();
    let rhs = vec![d.clone(); rows.len()];
    let sol = linalg::solve(&rows, &rhs).ok_or(Error::NotQuasiHomogeneous)?;
    if linalg::rank(&rows) < vars.len() {
        return Err(Error::UnderdeterminedWeights);
    }
    if sol.iter().any(|w| !w.is_positive()) {
        return Err(Error::InvalidWeights);
    }
    WeightSystem::new(vars.into_iter().zip(sol), d.clone())
}

/// ĉ = Σ(1 − |z_i|) for a system normalised to total weight 2.
pub fn central_charge(ws: &WeightSystem) -> Result<Rational> {
    if ws.total != int(2) {
        return Err(Error::NotNormalised(fmt_rational(&ws.total)));
    }
    Ok(ws.weights.values().fold(Rational::zero(), |acc, w| acc + Rational::one() - w))
}

/// Smallest factor making all weights and the total integral.
pub fn integer_scale(systems: &[&WeightSystem]) -> Rational {
    let mut den = BigInt::one();
    for ws in systems {
        for w in ws.weights.values().chain(std::iter::once(&ws.total)) {
            den = den.lcm(w.denom());
        }
    }
    let mut g = BigInt::zero();
    for ws in systems {
        for w in ws.weights.values().chain(std::iter::once(&ws.total)) {
            g = g.gcd(&(w * Rational::from_integer(den.clone())).to_integer());
        }
    }
    Rational::new(den, g)
}

/// Minimal integral system with the same ratios.
pub fn integer_rescale(ws: &WeightSystem) -> WeightSystem {
    ws.scaled(&integer_scale(&[ws]))
}

/// Quasi-homogeneous polynomial normalised to total weight 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    pub poly: Polynomial,
    pub ws: WeightSystem,
    pub name: Option<String>,
}

impl Potential {
    pub fn new(poly: Polynomial) -> Result<Potential> {
        if poly.geometric_coefficients().keys().any(|m| m.degree() < 2) {
            return Err(Error::NotInMaximalSquare);
        }
        let ws = infer_weights(&poly, &int(2))?;
        Ok(Potential { poly, ws, name: None })
    }

    pub fn parse(s: &str) -> Result<Potential> {
        Potential::new(Polynomial::parse(s)?)
    }

    pub fn named(mut self, name: &str) -> Potential {
        self.name = Some(name.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.poly.to_string())
    }

    /// Geometric variables in canonical order.
    pub fn vars(&self) -> Vec<Var> {
        self.ws.vars()
    }

    pub fn central_charge(&self) -> Rational {
        central_charge(&self.ws).expect("normalised")
    }

    /// Renames variables (the map must be injective on this potential's
    /// variables).
    pub fn rename(&self, map: &[(Var, Var)]) -> Result<Potential> {
        let b = map.iter().map(|(a, b)| (*a, Polynomial::var(*b))).collect();
        let mut out = Potential::new(self.poly.substitute(&b))?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Sum of two potentials in disjoint variables.
    pub fn plus(&self, other: &Potential) -> Result<Potential> {
        if self.vars().iter().any(|v| other.vars().contains(v)) {
            return Err(Error::OverlappingVariables);
        }
        let ws = self.ws.merged(&other.ws)?;
        Ok(Potential { poly: &self.poly + &other.poly, ws, name: None })
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

/// Charges g_1..g_{2N} of U(λ), in units where the potential has weight 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GradingMatrix {
    #[serde(serialize_with = "ser_rationals")]
    pub charges: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&fmt_rational(r))?;
    }
    seq.end()
}

impl GradingMatrix {
    pub fn new(charges: Vec<Rational>) -> GradingMatrix {
        GradingMatrix { charges }
    }

    pub fn rank(&self) -> usize {
        self.charges.len() / 2
    }

    /// Shifts so that g_1 = 0.
    pub fn normalised(&self) -> GradingMatrix {
        let g1 = self.charges.first().cloned().unwrap_or_else(Rational::zero);
        GradingMatrix { charges: self.charges.iter().map(|g| g - &g1).collect() }
    }

    pub fn weight_matrix(&self, r: &Rational) -> WeightMatrix {
        let n = self.charges.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| &self.charges[j] - &self.charges[i] + r).collect())
            .collect();
        WeightMatrix { entries }
    }

    /// Charges for the direct sum.
    pub fn direct_sum(&self, other: &GradingMatrix) -> GradingMatrix {
        let (n, m) = (self.rank(), other.rank());
        let mut c = Vec::with_capacity(2 * (n + m));
        c.extend_from_slice(&self.charges[..n]);
        c.extend_from_slice(&other.charges[..m]);
        c.extend_from_slice(&self.charges[n..]);
        c.extend_from_slice(&other.charges[m..]);
        GradingMatrix { charges: c }
    }
}

/// w_rs = g_s − g_r + R for the full 2N×2N matrix Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    pub entries: Vec<Vec<Rational>>,
}

impl WeightMatrix {
    pub fn rank(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn e_block(&self) -> Vec<Vec<Rational>> {
        let n = self.rank();
        (0..n).map(|i| self.entries[i][n..].to_vec()).collect()
    }

    pub fn j_block(&self) -> Vec<Vec<Rational>> {
        let n = self.rank();
        (n..2 * n).map(|i| self.entries[i][..n].to_vec()).collect()
    }

    pub fn scaled(&self, c: &Rational) -> WeightMatrix {
        WeightMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(|w| w * c).collect()).collect(),
        }
    }
}

/// Per-monomial sets of weights of proper nontrivial divisors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSplitSets {
    pub total: i64,
    pub sets: Vec<(Monomial, BTreeSet<i64>)>,
}

/// Split sets of `poly` under an integral weight system.
pub fn weight_split_sets_in(poly: &Polynomial, ws: &WeightSystem) -> WeightSplitSets {
    let d = ws.int_total();
    let sets = poly
        .geometric_coefficients()
        .into_keys()
        .map(|m| {
            let pairs: Vec<(i64, u32)> = m.iter().map(|(v, e)| (ws.int_weight(v), e)).collect();
            let mut s = BTreeSet::new();
            divisor_weights(&pairs, 0, 0, &mut s);
            s.retain(|&w| w > 0 && w < d);
            (m, s)
        })
        .collect();
    WeightSplitSets { total: d, sets }
}

fn divisor_weights(pairs: &[(i64, u32)], k: usize, acc: i64, out: &mut BTreeSet<i64>) {
    if k == pairs.len() {
        out.insert(acc);
        return;
    }
    let (w, e) = pairs[k];
    for i in 0..=e as i64 {
        divisor_weights(pairs, k + 1, acc + i * w, out);
    }
}

pub fn weight_split_sets(v: &Potential) -> WeightSplitSets {
    weight_split_sets_in(&v.poly, &integer_rescale(&v.ws))
}

/// Whether every row and column of w(E) and w(J) meets every split set.
pub fn passes_weight_split(wm: &WeightMatrix, splits: &[&WeightSplitSets]) -> bool {
    let n = wm.rank();
    let as_int = |w: &Rational| if w.is_integer() { w.to_integer().to_i64() } else { None };
    let blocks = [wm.e_block(), wm.j_block()];
    for s in splits.iter().flat_map(|s| s.sets.iter().map(|(_, set)| set)) {
        for b in &blocks {
            for i in 0..n {
                if !(0..n).any(|j| as_int(&b[i][j]).is_some_and(|w| s.contains(&w))) {
                    return false;
                }
                if !(0..n).any(|j| as_int(&b[j][i]).is_some_and(|w| s.contains(&w))) {
                    return false;
                }
            }
        }
    }
    true
}

/// All monomials in `vars` of weighted degree exactly `w`.
pub fn monomials_of_weight(vars: &[(Var, Rational)], w: &Rational) -> Vec<Monomial> {
    let mut out = Vec::new();
    if w.is_negative() {
        return out;
    }
    fn rec(vars: &[(Var, Rational)], k: usize, left: &Rational, cur: &mut Vec<(Var, u32)>, out: &mut Vec<Monomial>) {
        if k == vars.len() {
            if left.is_zero() {
                out.push(Monomial::from_pairs(cur.iter().copied()));
            }
            return;
        }
        let (v, wv) = &vars[k];
        if !wv.is_positive() {
            rec(vars, k + 1, left, cur, out);
            return;
        }
        let mut e = 0u32;
        let mut rest = left.clone();
        while !rest.is_negative() {
            cur.push((*v, e));
            rec(vars, k + 1, &rest, cur, out);
            cur.pop();
            e += 1;
            rest -= wv;
        }
    }
    rec(vars, 0, w, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.display_order(b));
    out
}

/// Whether `w` is a nonnegative integer combination of `weights`.
pub fn realizable(w: i64, weights: &[i64]) -> bool {
    if w < 0 {
        return false;
    }
    let mut ok = vec![false; w as usize + 1];
    ok[0] = true;
    for i in 1..=w as usize {
        ok[i] = weights.iter().any(|&a| a > 0 && i as i64 >= a && ok[i - a as usize]);
    }
    ok[w as usize]
}

/// One admissible grading, in integral units: w(E)_ij = p_j − q_i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntGrading {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
}

impl IntGrading {
    pub fn canonical(mut p: Vec<i64>, mut q: Vec<i64>) -> IntGrading {
        p.sort_unstable();
        q.sort_unstable();
        let m = q[0];
        IntGrading { p: p.iter().map(|x| x - m).collect(), q: q.iter().map(|x| x - m).collect() }
    }

    pub fn w_e(&self) -> Vec<Vec<i64>> {
        self.q.iter().map(|qi| self.p.iter().map(|pj| pj - qi).collect()).collect()
    }

    /// The grading of the factorisation with E and J exchanged.
    pub fn swapped(&self, d: i64) -> IntGrading {
        IntGrading::canonical(self.q.iter().map(|x| x + d).collect(), self.p.clone())
    }

    pub fn up_to_swap(&self, d: i64) -> IntGrading {
        self.clone().min(self.swapped(d))
    }

    /// Charges in units where the total weight is 2.
    pub fn to_grading(&self, d: i64) -> GradingMatrix {
        let k = Rational::new(BigInt::from(d), BigInt::from(2));
        let mut c: Vec<Rational> = self.q.iter().map(|&q| int(q) / &k).collect();
        c.extend(self.p.iter().map(|&p| int(p) / &k - Rational::one()));
        GradingMatrix { charges: c }.normalised()
    }

    /// Inverse of [`IntGrading::to_grading`]; `None` if not integral.
    pub fn from_grading(g: &GradingMatrix, d: i64) -> Option<IntGrading> {
        let n = g.rank();
        let k = Rational::new(BigInt::from(d), BigInt::from(2));
        let conv = |r: Rational| if r.is_integer() { r.to_integer().to_i64() } else { None };
        let q: Option<Vec<i64>> = g.charges[..n].iter().map(|c| conv(c * &k)).collect();
        let p: Option<Vec<i64>> = g.charges[n..].iter().map(|c| conv(c * &k + &k)).collect();
        Some(IntGrading::canonical(p?, q?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GradingClass {
    pub grading: IntGrading,
    pub fermion_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradingEnumeration {
    /// Total weight after the common integral rescaling.
    pub total: i64,
    /// Classes up to row and column permutations.
    pub classes: Vec<GradingClass>,
    /// Classes additionally up to exchanging E and J.
    pub classes_up_to_swap: Vec<IntGrading>,
}

impl GradingEnumeration {
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    pub fn count_up_to_swap(&self) -> usize {
        self.classes_up_to_swap.len()
    }

    pub fn contains(&self, g: &IntGrading) -> bool {
        self.classes.iter().any(|c| &c.grading == g)
    }

    pub fn gradings(&self) -> Vec<GradingMatrix> {
        self.classes.iter().map(|c| c.grading.to_grading(self.total)).collect()
    }
}

/// Necessary conditions for an orbifold equivalence between V1 and V2.
pub fn check_obstructions(v1: &Potential, v2: &Potential) -> Result<()> {
    let (c1, c2) = (v1.central_charge(), v2.central_charge());
    if c1 != c2 {
        return Err(Error::ObstructionCentralCharge(fmt_rational(&c1), fmt_rational(&c2)));
    }
    if (v1.vars().len() + v2.vars().len()) % 2 == 1 {
        return Err(Error::ObstructionParity);
    }
    Ok(())
}

/// All rank-N weight matrices of V1(x) − V2(y) passing the weight split
/// criterion, with every entry of w(E) and w(J) in 1..D−1.
pub fn enumerate_gradings(v1: &Potential, v2: &Potential, n: usize) -> Result<GradingEnumeration> {
    check_obstructions(v1, v2)?;
    if n == 0 {
        return Err(Error::Invalid("rank must be positive".into()));
    }
    let w = v1.ws.merged(&v2.ws).map_err(|_| Error::OverlappingVariables)?;
    let wi = w.scaled(&integer_scale(&[&w]));
    let d = wi.int_total();
    let mut sets: Vec<Vec<bool>> = Vec::new();
    for sp in [weight_split_sets_in(&v1.poly, &wi), weight_split_sets_in(&v2.poly, &wi)] {
        for (_, s) in sp.sets {
            let mut mask = vec![false; d as usize + 1];
            for x in s {
                mask[x as usize] = true;
            }
            sets.push(mask);
        }
    }
    let xw: Vec<i64> = v1.vars().iter().map(|&v| wi.int_weight(v)).collect();
    let yw: Vec<i64> = v2.vars().iter().map(|&v| wi.int_weight(v)).collect();

    // a value set Q of row charges (0 ∈ Q) and P of column charges; every
    // q ∈ Q must meet every split set against P and vice versa
    let hits = |a: i64, others: &[i64], row: bool| {
        sets.iter().all(|s| {
            others.iter().any(|&b| {
                let e = if row { b - a } else { a - b };
                e > 0 && e < d && s[e as usize]
            })
        })
    };
    let qsets = subsets_with_zero(d - 2, n);
    let mut found: Vec<(Vec<i64>, Vec<i64>)> = qsets
        .par_iter()
        .flat_map_iter(|qs| {
            let qmax = *qs.last().unwrap();
            let cands: Vec<i64> = (qmax + 1..d).filter(|&p| hits(p, qs, false)).collect();
            let mut out = Vec::new();
            let mut chosen = Vec::new();
            choose_supports(&cands, 0, n, &mut chosen, &mut |ps: &[i64]| {
                if qs.iter().all(|&q| hits(q, ps, true)) {
                    out.push(ps.to_vec());
                }
            });
            out.into_iter().map(move |ps| (qs.clone(), ps))
        })
        .collect();
    found.sort();
    let mut classes = Vec::new();
    for (qs, ps) in found {
        for q in multisets_with_support(&qs, n) {
            for p in multisets_with_support(&ps, n) {
                let g = IntGrading::canonical(p.clone(), q.clone());
                let fermion_ok = fermion_condition(&g, d, &xw, &yw);
                classes.push(GradingClass { grading: g, fermion_ok });
            }
        }
    }
    classes.sort_by(|a, b| a.grading.cmp(&b.grading));
    classes.dedup_by(|a, b| a.grading == b.grading);
    let mut swapq: Vec<IntGrading> = classes.iter().map(|c| c.grading.up_to_swap(d)).collect();
    swapq.sort();
    swapq.dedup();
    Ok(GradingEnumeration { total: d, classes, classes_up_to_swap: swapq })
}

/// Fermions need, for each y_j, an entry of weight |y_j| + (x-realizable),
/// and symmetrically for each x_i.
pub fn fermion_condition(g: &IntGrading, d: i64, xw: &[i64], yw: &[i64]) -> bool {
    let mut entries: Vec<i64> = g.w_e().into_iter().flatten().collect();
    entries.extend(entries.clone().into_iter().map(|e| d - e));
    let ok = |own: &[i64], other: &[i64]| {
        own.iter().all(|&w| entries.iter().any(|&e| realizable(e - w, other)))
    };
    ok(yw, xw) && ok(xw, yw)
}

fn subsets_with_zero(max: i64, n: usize) -> Vec<Vec<i64>> {
    let vals: Vec<i64> = (1..=max).collect();
    let mut out = Vec::new();
    let mut cur = vec![0];
    fn rec(vals: &[i64], start: usize, n: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        out.push(cur.clone());
        if cur.len() == n {
            return;
        }
        for i in start..vals.len() {
            cur.push(vals[i]);
            rec(vals, i + 1, n, cur, out);
            cur.pop();
        }
    }
    rec(&vals, 0, n, &mut cur, &mut out);
    out
}

fn choose_supports(c: &[i64], start: usize, n: usize, cur: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if !cur.is_empty() {
        f(cur);
    }
    if cur.len() == n {
        return;
    }
    for i in start..c.len() {
        cur.push(c[i]);
        choose_supports(c, i + 1, n, cur, f);
        cur.pop();
    }
}

/// Sorted multisets of size n whose distinct values are exactly `support`.
fn multisets_with_support(support: &[i64], n: usize) -> Vec<Vec<i64>> {
    let k = support.len();
    let mut out = Vec::new();
    let mut counts = vec![1usize; k];
    fn rec(i: usize, left: usize, counts: &mut Vec<usize>, support: &[i64], out: &mut Vec<Vec<i64>>) {
        if i + 1 == counts.len() {
            counts[i] = 1 + left;
            let mut v = Vec::new();
            for (s, &c) in support.iter().zip(counts.iter()) {
                v.extend(std::iter::repeat(*s).take(c));
            }
            out.push(v);
            return;
        }
        for extra in 0..=left {
            counts[i] = 1 + extra;
            rec(i + 1, left - extra, counts, support, out);
        }
    }
    if k == 0 || k > n {
        return out;
    }
    rec(0, n - k, &mut counts, support, &mut out);
    out
}
