//! Perturbative ansatz, equation extraction and the existence decision for
//! graded defects of a given rank.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{enumerate_gradings, monomials_of_weight, GradingMatrix, IntGrading, Potential};
use crate::groebner::{contains_one, OrderKind, ResourceBudget, SolvabilityVerdict, Status};
use crate::mf::{Defect, MatrixFactorisation};
use crate::poly::{fmt_rational, parse_rational, Monomial, PolyMatrix, Polynomial, Rational, Tier, Var};
use crate::residue::{qdim_unreduced, QuantumDimensions};

/// Hands out parameters `prefix1, prefix2, …`.
#[derive(Clone, Debug)]
pub struct ParamSource {
    prefix: String,
    issued: Vec<Var>,
}

impl ParamSource {
    pub fn new(prefix: &str) -> ParamSource {
        ParamSource { prefix: prefix.to_string(), issued: Vec::new() }
    }

    pub fn fresh(&mut self) -> Result<Var> {
        let v = Var::new(&format!("{}{}", self.prefix, self.issued.len() + 1), Tier::Parameter)?;
        self.issued.push(v);
        Ok(v)
    }

    pub fn issued(&self) -> &[Var] {
        &self.issued
    }
}

fn generic_terms(weight: &Rational, vars: &[(Var, Rational)], fresh: &mut ParamSource) -> Result<Vec<(Var, Monomial)>> {
    monomials_of_weight(vars, weight).into_iter().map(|m| Ok((fresh.fresh()?, m))).collect()
}

fn sum_terms(terms: &[(Var, Monomial)]) -> Polynomial {
    let mut out = Polynomial::zero();
    for (a, m) in terms {
        out += Polynomial::var(*a).mul_monomial(&Rational::one(), m);
    }
    out
}

/// Σ_p a_p z^p over all monomials of exactly this weight. Zero if the
/// weight is not realizable.
pub fn generic_entry(weight: &Rational, vars: &[(Var, Rational)], fresh: &mut ParamSource) -> Result<Polynomial> {
    if weight.is_zero() {
        return Err(Error::Invalid("a weight-0 entry would be a nonzero constant".into()));
    }
    Ok(sum_terms(&generic_terms(weight, vars, fresh)?))
}

fn weighted(v: &Potential) -> Vec<(Var, Rational)> {
    v.vars().into_iter().map(|z| (z, v.ws.weight(z).unwrap())).collect()
}

/// Generic graded Q with parameter coefficients, split into layers by
/// y-degree.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub q: PolyMatrix,
    pub grading: GradingMatrix,
    pub layers: Vec<PolyMatrix>,
    pub params: Vec<Var>,
    /// Parameter, position (r, s) in Q and the monomial it multiplies.
    pub slots: Vec<Slot>,
    pub v1: Potential,
    pub v2: Option<Potential>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub param: Var,
    pub row: usize,
    pub col: usize,
    pub monomial: Monomial,
    pub layer: usize,
}

impl Ansatz {
    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn rank(&self) -> usize {
        self.grading.rank()
    }

    /// κ_max of the expansion; 0 while only Q|_{y=0} is present.
    pub fn kappa_max(&self) -> usize {
        self.layers.len() - 1
    }

    /// The full ansatz as a defect of V1 − V2.
    pub fn defect(&self) -> Result<Defect> {
        let v2 = self.v2.clone().ok_or_else(|| Error::Invalid("ansatz has no y-layers yet".into()))?;
        let n = self.rank();
        Defect::new(
            self.v1.clone(),
            v2.clone(),
            self.v1.vars(),
            v2.vars(),
            self.q.submatrix(0, n, n, n),
            self.q.submatrix(n, 0, n, n),
            Vec::new(),
        )
    }
}

fn odd_positions(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..2 * n).flat_map(move |r| (0..2 * n).map(move |s| (r, s))).filter(move |&(r, s)| (r < n) != (s < n))
}

/// Generic E and J blocks in x only, entry weights w_rs = g_s − g_r + 1.
pub fn build_q1_ansatz(v1: &Potential, grading: &GradingMatrix, fresh: &mut ParamSource) -> Result<Ansatz> {
    let n = grading.rank();
    let g = &grading.charges;
    let xs = weighted(v1);
    let mut q = PolyMatrix::zeros(2 * n, 2 * n);
    let mut slots = Vec::new();
    for (r, s) in odd_positions(n) {
        let w = &g[s] - &g[r] + Rational::one();
        if w.is_positive() {
            let t = generic_terms(&w, &xs, fresh)?;
            q[(r, s)] = sum_terms(&t);
            slots.extend(t.into_iter().map(|(param, monomial)| Slot { param, row: r, col: s, monomial, layer: 0 }));
        }
    }
    for i in 0..2 * n {
        if (0..2 * n).all(|k| q[(i, k)].is_zero()) || (0..2 * n).all(|k| q[(k, i)].is_zero()) {
            return Err(Error::Invalid(format!("grading forces row or column {} of Q|y=0 to vanish", i + 1)));
        }
    }
    Ok(Ansatz {
        q: q.clone(),
        grading: grading.clone(),
        layers: vec![q],
        params: fresh.issued().to_vec(),
        slots,
        v1: v1.clone(),
        v2: None,
    })
}

/// Largest κ for which a y-monomial of degree κ can still appear.
pub fn kappa_max(y_weights: &[Rational], grading: &GradingMatrix) -> usize {
    let Some(min) = y_weights.iter().min() else {
        return 0;
    };
    let g = &grading.charges;
    let spread = g.iter().flat_map(|a| g.iter().map(move |b| b - a)).max().unwrap_or_else(Rational::zero);
    let mut k = 0usize;
    while !(Rational::one() - min * Rational::from_integer(k.into()) + &spread).is_negative() {
        k += 1;
    }
    k - 1
}

fn y_monomials(ys: &[(Var, Rational)], degree: usize) -> Vec<(Monomial, Rational)> {
    fn rec(ys: &[(Var, Rational)], k: usize, left: u32, cur: &mut Vec<(Var, u32)>, out: &mut Vec<Vec<(Var, u32)>>) {
        if k + 1 == ys.len() {
            cur.push((ys[k].0, left));
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push((ys[k].0, e));
            rec(ys, k + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    if !ys.is_empty() {
        rec(ys, 0, degree as u32, &mut Vec::new(), &mut raw);
    }
    raw.into_iter()
        .map(|pairs| {
            let w = pairs.iter().fold(Rational::zero(), |acc, (v, e)| {
                acc + ys.iter().find(|(u, _)| u == v).unwrap().1.clone() * Rational::from_integer((*e).into())
            });
            (Monomial::from_pairs(pairs), w)
        })
        .collect()
}

/// Adds every y-layer up to κ_max. The coefficient of y^p is a generic odd
/// matrix of R-charge 1 − |y^p| in the x-variables.
pub fn assemble_full_ansatz(q1: Ansatz, v2: &Potential, fresh: &mut ParamSource) -> Result<Ansatz> {
    let ys = weighted(v2);
    let yw: Vec<Rational> = ys.iter().map(|(_, w)| w.clone()).collect();
    let k_max = kappa_max(&yw, &q1.grading);
    assemble_layers(q1, v2, k_max, fresh)
}

fn assemble_layers(q1: Ansatz, v2: &Potential, k_max: usize, fresh: &mut ParamSource) -> Result<Ansatz> {
    let n = q1.rank();
    let g = q1.grading.charges.clone();
    let xs = weighted(&q1.v1);
    let ys = weighted(v2);
    let mut layers = vec![q1.layers[0].clone()];
    let mut q = q1.layers[0].clone();
    let mut slots = q1.slots;
    for kappa in 1..=k_max {
        let mut layer = PolyMatrix::zeros(2 * n, 2 * n);
        for (mono, wy) in y_monomials(&ys, kappa) {
            for (r, s) in odd_positions(n) {
                let w = &g[s] - &g[r] + Rational::one() - &wy;
                if w.is_negative() {
                    continue;
                }
                for (param, m) in generic_terms(&w, &xs, fresh)? {
                    let monomial = m.mul(&mono);
                    layer[(r, s)] += Polynomial::var(param).mul_monomial(&Rational::one(), &monomial);
                    slots.push(Slot { param, row: r, col: s, monomial, layer: kappa });
                }
            }
        }
        q = &q + &layer;
        layers.push(layer);
    }
    Ok(Ansatz {
        q,
        grading: q1.grading,
        layers,
        params: fresh.issued().to_vec(),
        slots,
        v1: q1.v1,
        v2: Some(v2.clone()),
    })
}

/// Permutes rows and columns of `d` within the two blocks (and exchanges E
/// and J if needed) so that its charges agree with `g`.
pub fn align(d: &Defect, g: &GradingMatrix) -> Result<Defect> {
    let n = g.rank();
    for swap in [false, true] {
        let mut cand = d.clone();
        if swap {
            std::mem::swap(&mut cand.mf.e, &mut cand.mf.j);
        }
        let h = cand.mf.infer_grading()?;
        let mut order: Vec<usize> = (0..2 * n).collect();
        order[..n].sort_by(|&a, &b| h.charges[a].cmp(&h.charges[b]));
        order[n..].sort_by(|&a, &b| h.charges[a].cmp(&h.charges[b]));
        let sorted = GradingMatrix::new(order.iter().map(|&i| h.charges[i].clone()).collect()).normalised();
        if &sorted != g {
            continue;
        }
        let mut p = PolyMatrix::zeros(2 * n, 2 * n);
        for (i, &k) in order.iter().enumerate() {
            p[(i, k)] = Polynomial::one();
        }
        return cand.similarity(&p);
    }
    Err(Error::Invalid("defect grading differs from the ansatz grading".into()))
}

/// Parameter values under which the ansatz becomes `d` (already aligned).
/// Fails if some term of `d` has no slot.
pub fn instantiate(ans: &Ansatz, d: &Defect) -> Result<HashMap<Var, Polynomial>> {
    let q = d.mf.q();
    let mut bind: HashMap<Var, Polynomial> = HashMap::new();
    let mut covered: HashMap<(usize, usize), usize> = HashMap::new();
    for s in &ans.slots {
        let c = q[(s.row, s.col)].geometric_coefficients().get(&s.monomial).cloned().unwrap_or_else(Polynomial::zero);
        if !c.is_zero() {
            *covered.entry((s.row, s.col)).or_default() += 1;
        }
        bind.insert(s.param, c);
    }
    for r in 0..q.rows() {
        for c in 0..q.cols() {
            let have = q[(r, c)].geometric_coefficients().len();
            if have != covered.get(&(r, c)).copied().unwrap_or(0) {
                return Err(Error::Invalid(format!("entry ({}, {}) has terms outside the ansatz", r + 1, c + 1)));
            }
        }
    }
    Ok(bind)
}

/// f^MF, the symbolic quantum dimensions and f^qd.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub f_mf: Vec<Polynomial>,
    pub qdims: QuantumDimensions,
    pub f_qd: Polynomial,
}

impl EquationSystem {
    pub fn all(&self) -> Vec<Polynomial> {
        let mut v = self.f_mf.clone();
        v.push(self.f_qd.clone());
        v
    }
}

pub fn aux_var() -> Var {
    Var::param("a_aux")
}

/// Coefficients of every x,y-monomial of Q² − W·1 together with
/// f^qd = q_L q_R a_aux − 1.
pub fn extract_equations(ans: &Ansatz) -> Result<EquationSystem> {
    let d = ans.defect()?;
    if !d.mf.lambda_check(&ans.grading) {
        return Err(Error::NotGraded("ansatz fails the λ check".into()));
    }
    let f_mf = mf_equations(&d.mf);
    let qdims = qdim_unreduced(&d)?;
    let f_qd = &(&qdims.product() * &Polynomial::var(aux_var())) - &Polynomial::one();
    Ok(EquationSystem { f_mf, qdims, f_qd })
}

/// Coefficients of Q² − W·1, deduplicated.
pub fn mf_equations(mf: &MatrixFactorisation) -> Vec<Polynomial> {
    let w = PolyMatrix::scalar(mf.rank(), mf.w().clone());
    let mut seen: BTreeMap<String, Polynomial> = BTreeMap::new();
    for block in [&(&mf.e * &mf.j) - &w, &(&mf.j * &mf.e) - &w] {
        for entry in block.entries() {
            for (_, c) in entry.geometric_coefficients() {
                if !c.is_zero() {
                    let c = monic(&c);
                    seen.entry(c.to_string()).or_insert(c);
                }
            }
        }
    }
    seen.into_values().collect()
}

fn monic(p: &Polynomial) -> Polynomial {
    let lead = p.terms().map(|(_, c)| c.clone()).next().unwrap();
    p.scale(&(Rational::one() / lead))
}

/// A coefficient fixed before the Gröbner computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pin {
    pub param: String,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

impl Pin {
    /// `name=value`, e.g. `a3=1` or `a7=-1/2`.
    pub fn parse(s: &str) -> Result<Pin> {
        let (name, value) = s.split_once('=').ok_or_else(|| Error::Invalid(format!("pin `{s}` is not name=value")))?;
        let name = name.trim();
        if !crate::poly::valid_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        Ok(Pin { param: name.to_string(), value: parse_rational(value.trim())? })
    }
}

fn apply_pins(eqs: &[Polynomial], pins: &[Pin]) -> Vec<Polynomial> {
    let bind: HashMap<Var, Polynomial> = pins
        .iter()
        .filter_map(|p| Var::lookup(&p.param).map(|v| (v, Polynomial::constant(p.value.clone()))))
        .collect();
    if bind.is_empty() {
        return eqs.to_vec();
    }
    eqs.iter().map(|e| e.substitute(&bind)).collect()
}

/// 1 ∈ ⟨f^MF, f^qd⟩ after applying the pins.
pub fn decide(system: &EquationSystem, pins: &[Pin], budget: &ResourceBudget) -> SolvabilityVerdict {
    contains_one(&apply_pins(&system.all(), pins), OrderKind::Grevlex, budget)
}

/// Coefficients of Q|_{y=0}² − V1: the equations involving layer 0 only.
pub fn layer0_equations(ans: &Ansatz) -> Result<Vec<Polynomial>> {
    Ok(mf_equations(&MatrixFactorisation::from_q(&ans.layers[0], ans.v1.clone())?))
}

/// How a Solvable verdict was reached.
#[derive(Clone, Debug)]
pub struct StagedVerdict {
    pub verdict: SolvabilityVerdict,
    /// Extra pins chosen for Q|_{y=0}; empty if the plain system decided.
    pub auto_pins: Vec<Pin>,
    pub attempts: usize,
}

const STAGE_ATTEMPTS: usize = 12;

/// Decides by first fixing Q|_{y=0}: layer-0 parameters are greedily set to
/// 0, 1 or −1 while the layer-0 system stays solvable, then the whole
/// system is decided with those values. A Solvable outcome is a
/// certificate for the unpinned system too. If no attempt succeeds the
/// plain system is decided with what remains of the budget, so Unsolvable
/// is only ever reported for the plain system.
pub fn decide_staged(ans: &Ansatz, sys: &EquationSystem, pins: &[Pin], budget: &ResourceBudget) -> Result<StagedVerdict> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let deadline = budget.time_limit.map(|t| Instant::now() + t);
    let left = || deadline.map(|d| d.saturating_duration_since(Instant::now()));
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let l0 = apply_pins(&layer0_equations(ans)?, pins);
    let pinned: Vec<&str> = pins.iter().map(|p| p.param.as_str()).collect();
    let free: Vec<Var> = ans
        .slots
        .iter()
        .filter(|s| s.layer == 0 && !pinned.contains(&s.param.name()))
        .map(|s| s.param)
        .collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let small = |cap: Duration| ResourceBudget { time_limit: Some(left().map_or(cap, |l| l.min(cap))), ..Default::default() };
    let mut attempts = 0;
    while attempts < STAGE_ATTEMPTS && !expired() {
        let mut order = free.clone();
        if attempts > 0 {
            order.shuffle(&mut rng);
        }
        attempts += 1;
        let mut chosen: Vec<Pin> = Vec::new();
        let mut eqs = l0.clone();
        for v in order {
            for val in [0i64, 1, -1] {
                let mut trial = eqs.clone();
                trial.push(&Polynomial::var(v) - &Polynomial::int(val));
                if contains_one(&trial, OrderKind::Grevlex, &small(Duration::from_secs(5))).status == Status::Solvable {
                    eqs = apply_pins(&eqs, &[Pin { param: v.name().into(), value: Rational::from_integer(val.into()) }]);
                    chosen.push(Pin { param: v.name().into(), value: Rational::from_integer(val.into()) });
                    break;
                }
            }
        }
        let mut all = pins.to_vec();
        all.extend(chosen.iter().cloned());
        let v = decide(sys, &all, &small(Duration::from_secs(120)));
        if v.status == Status::Solvable {
            return Ok(StagedVerdict { verdict: v, auto_pins: chosen, attempts });
        }
    }
    let v = decide(sys, pins, &ResourceBudget { time_limit: left(), ..budget.clone() });
    Ok(StagedVerdict { verdict: v, auto_pins: Vec::new(), attempts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GradingStatus {
    Solvable,
    Unsolvable,
    #[serde(rename = "Unsolvable-under-pins")]
    UnsolvableUnderPins,
    Unknown,
    Skipped,
    Rejected,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradingResult {
    pub index: usize,
    pub grading: IntGrading,
    #[serde(serialize_with = "ser_rationals")]
    pub charges: Vec<Rational>,
    pub param_count: usize,
    pub kappa_max: usize,
    pub equations: usize,
    pub status: GradingStatus,
    pub detail: Option<String>,
    pub elapsed_ms: u128,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Obstruction {
    CentralCharge,
    Parity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchVerdict {
    Solvable,
    Unsolvable,
    #[serde(rename = "Unsolvable-under-pins")]
    UnsolvableUnderPins,
    Unknown,
    NoAdmissibleGrading,
    Obstructed,
}

impl SearchVerdict {
    /// 0 Solvable, 1 negative, 2 Unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            SearchVerdict::Solvable => 0,
            SearchVerdict::Unknown => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub v1: String,
    pub v2: String,
    pub rank: usize,
    #[serde(serialize_with = "ser_rationals")]
    pub central_charges: Vec<Rational>,
    pub obstructions: Vec<Obstruction>,
    pub pins: Vec<Pin>,
    pub gradings_total: usize,
    pub results: Vec<GradingResult>,
    pub verdict: SearchVerdict,
    pub elapsed_ms: u128,
}

impl SearchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchConfig {
    pub pins: Vec<Pin>,
    /// Wall-clock cap for the whole search.
    pub budget: Option<Duration>,
    pub exhaustive: bool,
    /// Restricts the search to these gradings.
    pub only: Option<Vec<IntGrading>>,
    /// Parameter prefix; `a` when empty.
    pub param_prefix: String,
    /// Decide the plain system only, without the staged attempt of
    /// [`decide_staged`].
    pub direct: bool,
}

/// Necessary conditions: equal central charge and an even
/// total number of variables.
pub fn obstructions(v1: &Potential, v2: &Potential) -> Vec<Obstruction> {
    let mut out = Vec::new();
    if v1.central_charge() != v2.central_charge() {
        out.push(Obstruction::CentralCharge);
    }
    if (v1.vars().len() + v2.vars().len()) % 2 == 1 {
        out.push(Obstruction::Parity);
    }
    out
}

/// Ansatz and equations for one grading.
pub fn equations_for(v1: &Potential, v2: &Potential, g: &GradingMatrix, prefix: &str) -> Result<(Ansatz, EquationSystem)> {
    let mut fresh = ParamSource::new(if prefix.is_empty() { "a" } else { prefix });
    let q1 = build_q1_ansatz(v1, g, &mut fresh)?;
    let ans = assemble_full_ansatz(q1, v2, &mut fresh)?;
    let sys = extract_equations(&ans)?;
    Ok((ans, sys))
}

fn run_one(
    index: usize,
    ig: &IntGrading,
    total: i64,
    v1: &Potential,
    v2: &Potential,
    cfg: &SearchConfig,
    deadline: Option<Instant>,
) -> GradingResult {
    let t0 = Instant::now();
    let g = ig.to_grading(total);
    let mut res = GradingResult {
        index,
        grading: ig.clone(),
        charges: g.charges.clone(),
        param_count: 0,
        kappa_max: 0,
        equations: 0,
        status: GradingStatus::Unknown,
        detail: None,
        elapsed_ms: 0,
    };
    match equations_for(v1, v2, &g, &cfg.param_prefix) {
        Err(e) => {
            res.status = GradingStatus::Rejected;
            res.detail = Some(e.to_string());
        }
        Ok((ans, sys)) => {
            res.param_count = ans.param_count();
            res.kappa_max = ans.kappa_max();
            res.equations = sys.f_mf.len() + 1;
            let budget = ResourceBudget {
                time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
                ..Default::default()
            };
            let (v, note) = if !cfg.direct {
                match decide_staged(&ans, &sys, &cfg.pins, &budget) {
                    Ok(sv) if !sv.auto_pins.is_empty() => {
                        let note = format!("Q|y=0 fixed by {} values on attempt {}", sv.auto_pins.len(), sv.attempts);
                        (sv.verdict, Some(note))
                    }
                    Ok(sv) => (sv.verdict, None),
                    Err(e) => {
                        res.status = GradingStatus::Rejected;
                        res.detail = Some(e.to_string());
                        res.elapsed_ms = t0.elapsed().as_millis();
                        return res;
                    }
                }
            } else {
                (decide(&sys, &cfg.pins, &budget), None)
            };
            res.status = match v.status {
                Status::Solvable => GradingStatus::Solvable,
                Status::Unsolvable if cfg.pins.is_empty() => GradingStatus::Unsolvable,
                Status::Unsolvable => GradingStatus::UnsolvableUnderPins,
                Status::Unknown => GradingStatus::Unknown,
            };
            res.detail = match (v.witness, note) {
                (Some(w), Some(n)) => Some(format!("{w}; {n}")),
                (w, n) => w.or(n),
            };
        }
    }
    res.elapsed_ms = t0.elapsed().as_millis();
    res
}

/// Runs the ansatz/decide pipeline over every admissible rank-N grading,
/// cheapest first.
pub fn search(v1: &Potential, v2: &Potential, n: usize, cfg: &SearchConfig) -> Result<SearchReport> {
    let t0 = Instant::now();
    let deadline = cfg.budget.map(|b| t0 + b);
    let mut report = SearchReport {
        v1: v1.label(),
        v2: v2.label(),
        rank: n,
        central_charges: vec![v1.central_charge(), v2.central_charge()],
        obstructions: obstructions(v1, v2),
        pins: cfg.pins.clone(),
        gradings_total: 0,
        results: Vec::new(),
        verdict: SearchVerdict::Obstructed,
        elapsed_ms: 0,
    };
    if !report.obstructions.is_empty() {
        report.elapsed_ms = t0.elapsed().as_millis();
        return Ok(report);
    }
    if v1.vars().iter().any(|v| v2.vars().contains(v)) {
        return Err(Error::OverlappingVariables);
    }
    let en = enumerate_gradings(v1, v2, n)?;
    let mut cands: Vec<IntGrading> = en.classes.iter().map(|c| c.grading.clone()).collect();
    if let Some(only) = &cfg.only {
        cands.retain(|g| only.contains(g));
    }
    report.gradings_total = cands.len();
    // cheapest first: fewer Q|y=0 parameters means a smaller system
    let mut costed: Vec<(usize, IntGrading)> = cands
        .into_iter()
        .map(|ig| {
            let mut f = ParamSource::new("a_probe");
            let c = build_q1_ansatz(v1, &ig.to_grading(en.total), &mut f).map(|a| a.param_count()).unwrap_or(0);
            (c, ig)
        })
        .collect();
    costed.sort();
    let found = AtomicBool::new(false);
    let mut results: Vec<GradingResult> = costed
        .par_iter()
        .enumerate()
        .map(|(i, (_, ig))| {
            if !cfg.exhaustive && found.load(Ordering::SeqCst) {
                let g = ig.to_grading(en.total);
                return GradingResult {
                    index: i,
                    grading: ig.clone(),
                    charges: g.charges,
                    param_count: 0,
                    kappa_max: 0,
                    equations: 0,
                    status: GradingStatus::Skipped,
                    detail: Some("an earlier grading is solvable".into()),
                    elapsed_ms: 0,
                };
            }
            let r = run_one(i, ig, en.total, v1, v2, cfg, deadline);
            if r.status == GradingStatus::Solvable {
                found.store(true, Ordering::SeqCst);
            }
            r
        })
        .collect();
    results.sort_by_key(|r| r.index);
    let has = |s: GradingStatus| results.iter().any(|r| r.status == s);
    report.verdict = if has(GradingStatus::Solvable) {
        SearchVerdict::Solvable
    } else if results.is_empty() || results.iter().all(|r| r.status == GradingStatus::Rejected) {
        SearchVerdict::NoAdmissibleGrading
    } else if has(GradingStatus::Unknown) {
        SearchVerdict::Unknown
    } else if has(GradingStatus::UnsolvableUnderPins) {
        SearchVerdict::UnsolvableUnderPins
    } else {
        SearchVerdict::Unsolvable
    };
    report.results = results;
    report.elapsed_ms = t0.elapsed().as_millis();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, p, rat};

    fn pot(s: &str) -> Potential {
        Potential::parse(s).unwrap()
    }

    #[test]
    fn generic_entries() {
        let v = pot("x1^12 + x2^2");
        let xs = weighted(&v);
        let mut f = ParamSource::new("b");
        let e = generic_entry(&int(1), &xs, &mut f).unwrap();
        assert_eq!(e.num_terms(), 2);
        assert_eq!(e.geometric_coefficients().len(), 2);
        assert!(e.geometric_coefficients().contains_key(&p("x1^6").terms().next().unwrap().0.clone()));
        assert_eq!(generic_entry(&rat(1, 6), &xs, &mut f).unwrap().num_terms(), 1);
        assert!(generic_entry(&rat(1, 12), &xs, &mut f).unwrap().is_zero());
        assert!(generic_entry(&rat(1, 7), &xs, &mut f).unwrap().is_zero());
        assert!(generic_entry(&int(0), &xs, &mut f).is_err());
    }

    #[test]
    fn kappa_bounds() {
        let g = GradingMatrix::new(vec![int(0), int(1)]);
        assert_eq!(kappa_max(&[rat(1, 2)], &g), 4);
        let g0 = GradingMatrix::new(vec![int(0), int(0)]);
        assert_eq!(kappa_max(&[int(1)], &g0), 1);
    }

    #[test]
    fn rank_one_cubic() {
        let v1 = pot("x1^3");
        let mut f = ParamSource::new("b");
        // E weight 2/3, J weight 4/3
        let g = GradingMatrix::new(vec![int(0), rat(-1, 3)]);
        let q1 = build_q1_ansatz(&v1, &g, &mut f).unwrap();
        assert_eq!(q1.param_count(), 2);
        let mf = MatrixFactorisation::from_q(&q1.q, v1.clone()).unwrap();
        let eqs = mf_equations(&mf);
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0] == p("b1*b2 - 1") || eqs[0] == p("1 - b1*b2"));
    }

    fn a11_e6_ansatz(f: &mut ParamSource) -> Ansatz {
        // w(E) = [[6, 4], [8, 6]] with total weight 12
        let g = IntGrading::canonical(vec![6, 4], vec![0, -2]).to_grading(12);
        build_q1_ansatz(&pot("x1^12 + x2^2"), &g, f).unwrap()
    }

    #[test]
    fn layers_stop_at_kappa_max() {
        let v2 = pot("y1^3 + y2^4");
        let mut f = ParamSource::new("b");
        let q1 = a11_e6_ansatz(&mut f);
        let k = kappa_max(&[rat(2, 3), rat(1, 2)], &q1.grading);
        let full = assemble_layers(q1.clone(), &v2, k, &mut f.clone()).unwrap();
        let more = assemble_layers(q1, &v2, k + 1, &mut f).unwrap();
        assert!(full.layers[k].entries().iter().any(|e| !e.is_zero()));
        assert!(more.layers[k + 1].is_zero());
        assert_eq!(full.q, more.q);
        assert_eq!(full.param_count(), more.param_count());
    }

    #[test]
    fn factorisation_equations_are_quadratic() {
        let mut f = ParamSource::new("b");
        let q1 = a11_e6_ansatz(&mut f);
        let ans = assemble_full_ansatz(q1, &pot("y1^3 + y2^4"), &mut f).unwrap();
        let sys = extract_equations(&ans).unwrap();
        assert!(!sys.f_mf.is_empty());
        for e in &sys.f_mf {
            assert!(e.geometric_vars().is_empty());
            assert!(e.total_degree().unwrap() <= 2, "{e}");
        }
    }

    #[test]
    fn degenerate_grading_rejected() {
        let v1 = pot("x1^3");
        let mut f = ParamSource::new("b");
        let g = GradingMatrix::new(vec![int(0), int(-3)]);
        assert!(build_q1_ansatz(&v1, &g, &mut f).is_err());
    }

    #[test]
    fn tiny_budget_is_unknown() {
        let sys = EquationSystem {
            f_mf: ["b1^5 + b2^4 + b3^3 - 1", "b1^3 + b2^3 + b3^2 - 1"].iter().map(|s| p(s)).collect(),
            qdims: QuantumDimensions { ql: p("b1"), qr: p("b2*b3") },
            f_qd: p("b1*b2*b3*a_aux - 1"),
        };
        let v = decide(&sys, &[], &ResourceBudget { time_limit: Some(Duration::from_nanos(1)), ..Default::default() });
        assert_eq!(v.status, Status::Unknown);
    }

    #[test]
    fn pins_parse() {
        assert_eq!(Pin::parse("a3=1").unwrap(), Pin { param: "a3".into(), value: int(1) });
        assert_eq!(Pin::parse(" a7 = -1/2").unwrap().value, rat(-1, 2));
        assert!(Pin::parse("a3").is_err());
    }

    #[test]
    fn obstruction_tags() {
        let a2 = pot("x1^3 + x2^2");
        let a3 = pot("y1^4 + y2^2");
        assert_eq!(obstructions(&a2, &a3), vec![Obstruction::CentralCharge]);
        let r = search(&a2, &a3, 2, &SearchConfig::default()).unwrap();
        assert_eq!(r.verdict, SearchVerdict::Obstructed);
        assert_eq!(r.verdict.exit_code(), 1);
    }
}
