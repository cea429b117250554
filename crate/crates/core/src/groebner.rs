//! Buchberger's algorithm over the rationals with fraction-free reduction.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::{display_cmp, Monomial, Polynomial, Rational, Var};

mod modular;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderKind {
    Grevlex,
    Lex,
    /// Grevlex on geometric variables, ties broken by grevlex on parameters.
    Block,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermOrder {
    kind: OrderKind,
    vars: Vec<Var>,
    split: usize,
}

impl TermOrder {
    /// Variables are used in the given order (first is largest).
    pub fn new(kind: OrderKind, vars: Vec<Var>) -> TermOrder {
        let mut vars = vars;
        let mut seen = std::collections::HashSet::new();
        vars.retain(|v| seen.insert(*v));
        let split = if kind == OrderKind::Block {
            vars.sort_by_key(|v| v.is_param());
            vars.iter().filter(|v| !v.is_param()).count()
        } else {
            vars.len()
        };
        TermOrder { kind, vars, split }
    }

    /// Order over all variables of `polys`, sorted canonically
    /// (geometric first, `a_aux` last).
    pub fn for_polys<'a>(kind: OrderKind, polys: impl IntoIterator<Item = &'a Polynomial>) -> TermOrder {
        let mut vars: Vec<Var> = polys.into_iter().flat_map(|p| p.vars()).collect();
        vars.sort_by(|a, b| display_cmp(*a, *b));
        vars.dedup();
        TermOrder::new(kind, vars)
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    fn extended(&self, extra: impl IntoIterator<Item = Var>) -> TermOrder {
        let mut vars = self.vars.clone();
        let mut extra: Vec<Var> = extra.into_iter().filter(|v| !vars.contains(v)).collect();
        if extra.is_empty() {
            return self.clone();
        }
        extra.sort_by(|a, b| display_cmp(*a, *b));
        extra.dedup();
        vars.extend(extra);
        TermOrder::new(self.kind, vars)
    }

    fn cmp_exp(&self, a: &Mono, b: &Mono) -> Ordering {
        match self.kind {
            OrderKind::Grevlex => grevlex(&a.e, &b.e, a.deg, b.deg),
            OrderKind::Lex => a.e.cmp(&b.e),
            OrderKind::Block => {
                let (a1, a2) = a.e.split_at(self.split);
                let (b1, b2) = b.e.split_at(self.split);
                let d1a: u32 = a1.iter().map(|&x| x as u32).sum();
                let d1b: u32 = b1.iter().map(|&x| x as u32).sum();
                grevlex(a1, b1, d1a, d1b).then_with(|| grevlex(a2, b2, a.deg - d1a, b.deg - d1b))
            }
        }
    }

    /// Compares two monomials in the variables of this order.
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let idx = self.index();
        let ord = self.extended(a.vars().chain(b.vars()));
        let idx = if ord.vars.len() == self.vars.len() { idx } else { ord.index() };
        ord.cmp_exp(&Mono::from_monomial(a, &idx), &Mono::from_monomial(b, &idx))
    }

    fn index(&self) -> HashMap<Var, usize> {
        self.vars.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }
}

fn grevlex(a: &[u16], b: &[u16], da: u32, db: u32) -> Ordering {
    da.cmp(&db).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        Ordering::Equal
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Mono {
    e: Box<[u16]>,
    deg: u32,
    mask: u64,
}

impl Mono {
    fn new(e: Box<[u16]>) -> Mono {
        let deg = e.iter().map(|&x| x as u32).sum();
        let mask = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .fold(0u64, |m, (i, _)| m | 1 << (i % 64));
        Mono { e, deg, mask }
    }

    fn from_monomial(m: &Monomial, idx: &HashMap<Var, usize>) -> Mono {
        let mut e = vec![0u16; idx.len()];
        for (v, k) in m.iter() {
            e[idx[&v]] = u16::try_from(k).expect("exponent overflow");
        }
        Mono::new(e.into_boxed_slice())
    }

    fn to_monomial(&self, vars: &[Var]) -> Monomial {
        Monomial::from_pairs(
            self.e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (vars[i], k as u32)),
        )
    }

    fn mul(&self, o: &Mono) -> Mono {
        let e: Box<[u16]> = self
            .e
            .iter()
            .zip(o.e.iter())
            .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
            .collect();
        Mono { e, deg: self.deg + o.deg, mask: self.mask | o.mask }
    }

    fn divides(&self, o: &Mono) -> bool {
        self.mask & !o.mask == 0 && self.deg <= o.deg && self.e.iter().zip(o.e.iter()).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Mono) -> Mono {
        Mono::new(self.e.iter().zip(o.e.iter()).map(|(a, b)| a - b).collect())
    }

    fn lcm(&self, o: &Mono) -> Mono {
        Mono::new(self.e.iter().zip(o.e.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    fn coprime(&self, o: &Mono) -> bool {
        self.e.iter().zip(o.e.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    fn is_one(&self) -> bool {
        self.deg == 0
    }
}

/// Terms sorted ascending, so the leading term is last.
type Terms = Vec<(Mono, BigInt)>;

#[derive(Clone, Debug)]
struct DPoly {
    t: Terms,
    sugar: u32,
}

impl DPoly {
    fn lt(&self) -> &Mono {
        &self.t.last().unwrap().0
    }

    fn lc(&self) -> &BigInt {
        &self.t.last().unwrap().1
    }
}

fn to_terms(p: &Polynomial, ord: &TermOrder, idx: &HashMap<Var, usize>) -> (Terms, BigInt) {
    let den = p.denominator_lcm();
    let mut t: Terms = p
        .terms()
        .map(|(m, c)| {
            let c = c * Rational::from_integer(den.clone());
            (Mono::from_monomial(m, idx), c.to_integer())
        })
        .collect();
    t.sort_by(|a, b| ord.cmp_exp(&a.0, &b.0));
    (t, den)
}

fn from_terms(t: &Terms, vars: &[Var], scale: &Rational) -> Polynomial {
    Polynomial::from_terms(
        t.iter()
            .map(|(m, c)| (m.to_monomial(vars), Rational::from_integer(c.clone()) / scale)),
    )
}

fn content(t: &Terms) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in t {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Makes the leading coefficient positive and the content one; returns the
/// divisor applied.
fn normalise(t: &mut Terms) -> BigInt {
    if t.is_empty() {
        return BigInt::one();
    }
    let mut g = content(t);
    if t.last().unwrap().1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, c) in t.iter_mut() {
            *c /= &g;
        }
    }
    g
}

/// `a·p − b·(m·g)` for ascending term lists.
fn sub_mul(ord: &TermOrder, p: Terms, a: &BigInt, b: &BigInt, m: &Mono, g: &[(Mono, BigInt)]) -> Terms {
    let mut out = Vec::with_capacity(p.len() + g.len());
    let scale_p = !a.is_one();
    let mut gi = g.iter().map(|(gm, gc)| (gm.mul(m), gc * b)).peekable();
    let mut pi = p.into_iter().peekable();
    loop {
        match (pi.peek(), gi.peek()) {
            (None, None) => break,
            (Some(_), None) => {
                let (pm, pc) = pi.next().unwrap();
                out.push((pm, if scale_p { pc * a } else { pc }));
            }
            (None, Some(_)) => {
                let (gm, gc) = gi.next().unwrap();
                out.push((gm, -gc));
            }
            (Some((pm, _)), Some((gm, _))) => match ord.cmp_exp(pm, gm) {
                Ordering::Less => {
                    let (pm, pc) = pi.next().unwrap();
                    out.push((pm, if scale_p { pc * a } else { pc }));
                }
                Ordering::Greater => {
                    let (gm, gc) = gi.next().unwrap();
                    out.push((gm, -gc));
                }
                Ordering::Equal => {
                    let (pm, pc) = pi.next().unwrap();
                    let (_, gc) = gi.next().unwrap();
                    let c = if scale_p { pc * a } else { pc } - gc;
                    if !c.is_zero() {
                        out.push((pm, c));
                    }
                }
            },
        }
    }
    out
}

struct Interrupted;

/// Reduces `p` by `basis`. Returns the remainder and the rational factor
/// `s` with `remainder ≡ s·p` modulo the ideal.
fn reduce(
    ord: &TermOrder,
    mut p: Terms,
    basis: &[&DPoly],
    full: bool,
    deadline: Option<Instant>,
) -> Result<(Terms, Rational), Interrupted> {
    let mut r: Terms = Vec::new();
    let mut scale = Rational::one();
    let mut steps = 0u64;
    while let Some((m, c)) = p.last() {
        let g = basis.iter().find(|g| g.lt().divides(m));
        match g {
            None => {
                let t = p.pop().unwrap();
                r.push(t);
                if !full {
                    break;
                }
            }
            Some(g) => {
                let lg = g.lc();
                let d = c.gcd(lg);
                let (mut a, mut b) = (lg / &d, c / &d);
                if a.is_negative() {
                    a = -a;
                    b = -b;
                }
                let t = m.div(g.lt());
                p.pop();
                let gt = &g.t[..g.t.len() - 1];
                p = sub_mul(ord, p, &a, &b, &t, gt);
                if !a.is_one() {
                    for (_, rc) in r.iter_mut() {
                        *rc *= &a;
                    }
                    scale *= Rational::from_integer(a);
                }
                steps += 1;
                if steps % 16 == 0 {
                    let g = content(&p);
                    let g = r.iter().fold(g, |g, (_, c)| g.gcd(c));
                    if !g.is_zero() && !g.is_one() {
                        for (_, c) in p.iter_mut().chain(r.iter_mut()) {
                            *c /= &g;
                        }
                        scale /= Rational::from_integer(g);
                    }
                    if let Some(dl) = deadline {
                        if Instant::now() > dl {
                            return Err(Interrupted);
                        }
                    }
                }
            }
        }
    }
    // r was built in descending order; the unreduced tail of p is ascending
    r.reverse();
    if !p.is_empty() {
        p.extend(r);
        r = p;
    }
    let g = normalise(&mut r);
    scale /= Rational::from_integer(g);
    Ok((r, scale))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceBudget {
    pub max_pair_degree: Option<u32>,
    pub max_basis_size: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl ResourceBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn seconds(s: f64) -> Self {
        ResourceBudget { time_limit: Some(Duration::from_secs_f64(s)), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exhausted {
    pub reason: String,
    pub basis_size: usize,
    pub pairs_left: usize,
}

impl fmt::Display for Exhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (basis size {}, {} pairs pending)",
            self.reason, self.basis_size, self.pairs_left
        )
    }
}

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    order: TermOrder,
    generators: Vec<Polynomial>,
    internal: Vec<DPoly>,
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
    sugar: u32,
}

pub fn buchberger(
    gens: &[Polynomial],
    order: &TermOrder,
    budget: &ResourceBudget,
) -> Result<GroebnerBasis, Exhausted> {
    let ord = order.extended(gens.iter().flat_map(|g| g.vars()));
    let idx = ord.index();
    let deadline = budget.time_limit.map(|d| Instant::now() + d);
    let mut inputs: Vec<Terms> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| to_terms(g, &ord, &idx).0)
        .collect();
    inputs.sort_by(|a, b| ord.cmp_exp(&a.last().unwrap().0, &b.last().unwrap().0));

    let mut polys: Vec<DPoly> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let exhausted = |reason: &str, active: &Vec<usize>, pairs: &Vec<Pair>| Exhausted {
        reason: reason.to_string(),
        basis_size: active.len(),
        pairs_left: pairs.len(),
    };

    let mut queue: Vec<(Terms, u32)> = inputs
        .into_iter()
        .map(|t| {
            let s = t.iter().map(|(m, _)| m.deg).max().unwrap_or(0);
            (t, s)
        })
        .collect();
    queue.reverse();

    loop {
        let (t, sugar) = if let Some(q) = queue.pop() {
            q
        } else {
            if pairs.is_empty() {
                break;
            }
            let k = (0..pairs.len())
                .min_by(|&a, &b| {
                    pairs[a]
                        .sugar
                        .cmp(&pairs[b].sugar)
                        .then_with(|| ord.cmp_exp(&pairs[a].lcm, &pairs[b].lcm))
                })
                .unwrap();
            let pr = pairs.swap_remove(k);
            if let Some(maxd) = budget.max_pair_degree {
                if pr.lcm.deg > maxd {
                    return Err(exhausted("pair degree bound exceeded", &active, &pairs));
                }
            }
            (spoly(&ord, &polys[pr.i], &polys[pr.j], &pr.lcm), pr.sugar)
        };
        if let Some(dl) = deadline {
            if Instant::now() > dl {
                return Err(exhausted("time limit exceeded", &active, &pairs));
            }
        }
        let basis: Vec<&DPoly> = active.iter().map(|&i| &polys[i]).collect();
        let (h, _) = reduce(&ord, t, &basis, true, deadline)
            .map_err(|_| exhausted("time limit exceeded", &active, &pairs))?;
        if h.is_empty() {
            continue;
        }
        let hp = DPoly { t: h, sugar };
        if hp.lt().is_one() {
            return Ok(GroebnerBasis::unit(ord));
        }
        let hi = polys.len();
        polys.push(hp);
        update(&polys, &mut active, &mut pairs, hi);
        if let Some(maxb) = budget.max_basis_size {
            if active.len() > maxb {
                return Err(exhausted("basis size bound exceeded", &active, &pairs));
            }
        }
    }

    let basis = active.iter().map(|&i| polys[i].clone()).collect();
    Ok(interreduce(ord, basis))
}

/// Reduced basis. Grevlex bases are computed multi-modularly and certified
/// over Q; other orders use `buchberger`.
pub fn groebner_basis(
    gens: &[Polynomial],
    order: &TermOrder,
    budget: &ResourceBudget,
) -> Result<GroebnerBasis, Exhausted> {
    let ord = order.extended(gens.iter().flat_map(|g| g.vars()));
    let nonzero: Vec<&Polynomial> = gens.iter().filter(|g| !g.is_zero()).collect();
    if !modular::applicable(&ord) || nonzero.is_empty() {
        return buchberger(gens, order, budget);
    }
    if nonzero.iter().any(|g| g.is_constant()) {
        return Ok(GroebnerBasis::unit(ord));
    }
    let idx = ord.index();
    let inputs = nonzero.iter().map(|g| to_terms(g, &ord, &idx).0).collect();
    let deadline = budget.time_limit.map(|d| Instant::now() + d);
    modular::modular_basis(ord, inputs, budget, deadline)
}

/// Minimal reduced basis from a Gröbner basis.
fn interreduce(ord: TermOrder, basis: Vec<DPoly>) -> GroebnerBasis {
    if basis.iter().any(|d| d.lt().is_one()) {
        return GroebnerBasis::unit(ord);
    }
    let mut minimal: Vec<DPoly> = Vec::new();
    for (i, d) in basis.iter().enumerate() {
        let lt = d.lt();
        let dominated = basis
            .iter()
            .enumerate()
            .any(|(j, e)| j != i && e.lt().divides(lt) && (e.lt() != lt || j < i));
        if !dominated {
            minimal.push(d.clone());
        }
    }
    minimal.sort_by(|a, b| ord.cmp_exp(a.lt(), b.lt()));
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<&DPoly> = minimal.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, p)| p).collect();
        let lead = minimal[k].t.last().cloned().unwrap();
        let tail = minimal[k].t[..minimal[k].t.len() - 1].to_vec();
        let (mut r, s) = match reduce(&ord, tail, &others, true, None) {
            Ok(x) => x,
            Err(_) => unreachable!("no deadline"),
        };
        // reassemble lead·(scale) + reduced tail: scale the lead to match
        let lead_c = Rational::from_integer(lead.1) * &s;
        let den = lead_c.denom().clone();
        let mut t: Terms = r.drain(..).map(|(m, c)| (m, c * &den)).collect();
        t.push((lead.0, lead_c.numer().clone()));
        normalise(&mut t);
        reduced.push(DPoly { t, sugar: minimal[k].sugar });
    }
    GroebnerBasis::from_internal(ord, reduced)
}

fn spoly(ord: &TermOrder, f: &DPoly, g: &DPoly, lcm: &Mono) -> Terms {
    let (cf, cg) = (f.lc(), g.lc());
    let d = cf.gcd(cg);
    let (a, b) = (cg / &d, cf / &d);
    let mf = lcm.div(f.lt());
    let mg = lcm.div(g.lt());
    let ft: Terms = f.t[..f.t.len() - 1].iter().map(|(m, c)| (m.mul(&mf), c.clone())).collect();
    sub_mul(ord, ft, &a, &b, &mg, &g.t[..g.t.len() - 1])
}

trait Leading {
    fn lt(&self) -> &Mono;
    fn sugar(&self) -> u32;
}

impl Leading for DPoly {
    fn lt(&self) -> &Mono {
        DPoly::lt(self)
    }

    fn sugar(&self) -> u32 {
        self.sugar
    }
}

/// Gebauer–Möller installation of `polys[h]`.
fn update<P: Leading>(polys: &[P], active: &mut Vec<usize>, pairs: &mut Vec<Pair>, h: usize) {
    let lh = polys[h].lt().clone();
    let sugar_h = polys[h].sugar();
    let pair_sugar = |g: usize, lcm: &Mono| {
        let sg = polys[g].sugar() + lcm.deg - polys[g].lt().deg;
        let sh = sugar_h + lcm.deg - lh.deg;
        sg.max(sh)
    };
    let cands: Vec<(usize, Mono)> = active.iter().map(|&g| (g, lh.lcm(polys[g].lt()))).collect();
    let mut kept: Vec<(usize, Mono)> = Vec::new();
    for (k, (g, l)) in cands.iter().enumerate() {
        let coprime = lh.coprime(polys[*g].lt());
        let beaten = cands[k + 1..].iter().any(|(_, l2)| l2.divides(l))
            || kept.iter().any(|(_, l2)| l2.divides(l));
        if coprime || !beaten {
            kept.push((*g, l.clone()));
        }
    }
    let new_pairs: Vec<Pair> = kept
        .into_iter()
        .filter(|(g, _)| !lh.coprime(polys[*g].lt()))
        .map(|(g, l)| Pair { i: g, j: h, sugar: pair_sugar(g, &l), lcm: l })
        .collect();
    pairs.retain(|p| {
        !(lh.divides(&p.lcm)
            && lh.lcm(polys[p.i].lt()) != p.lcm
            && lh.lcm(polys[p.j].lt()) != p.lcm)
    });
    pairs.extend(new_pairs);
    active.retain(|&g| !lh.divides(polys[g].lt()));
    active.push(h);
}

impl GroebnerBasis {
    fn unit(order: TermOrder) -> GroebnerBasis {
        let n = order.vars.len();
        let one = DPoly { t: vec![(Mono::new(vec![0u16; n].into_boxed_slice()), BigInt::one())], sugar: 0 };
        GroebnerBasis::from_internal(order, vec![one])
    }

    fn from_internal(order: TermOrder, internal: Vec<DPoly>) -> GroebnerBasis {
        let generators = internal
            .iter()
            .map(|d| {
                let lc = Rational::from_integer(d.lc().clone());
                from_terms(&d.t, &order.vars, &lc)
            })
            .collect();
        GroebnerBasis { order, generators, internal }
    }

    pub fn order(&self) -> &TermOrder {
        &self.order
    }

    /// Reduced basis with monic leading coefficients, ascending leading terms.
    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn is_unit(&self) -> bool {
        self.internal.len() == 1 && self.internal[0].lt().is_one()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.internal.iter().map(|d| d.lt().to_monomial(&self.order.vars)).collect()
    }

    pub fn leading_monomial(&self, f: &Polynomial) -> Option<Monomial> {
        let idx = self.order.index();
        if f.vars().iter().any(|v| !idx.contains_key(v)) {
            return None;
        }
        let (t, _) = to_terms(f, &self.order, &idx);
        t.last().map(|(m, _)| m.to_monomial(&self.order.vars))
    }

    /// Remainder of `f`; variables outside the basis ring are carried along
    /// as coefficients.
    pub fn normal_form(&self, f: &Polynomial) -> Polynomial {
        if f.is_zero() {
            return Polynomial::zero();
        }
        if self.is_unit() {
            return Polynomial::zero();
        }
        let idx = self.order.index();
        let inside = |v: Var| idx.contains_key(&v);
        let mut out = Polynomial::zero();
        let groups: BTreeMap<Monomial, Polynomial> = f.collect_by(|v| !inside(v));
        let basis: Vec<&DPoly> = self.internal.iter().collect();
        for (outer, coeff) in groups {
            let (t, den) = to_terms(&coeff, &self.order, &idx);
            let (r, s) = match reduce(&self.order, t, &basis, true, None) {
                Ok(x) => x,
                Err(_) => unreachable!("no deadline"),
            };
            let scale = s * Rational::from_integer(den);
            out += from_terms(&r, &self.order.vars, &scale).mul_monomial(&Rational::one(), &outer);
        }
        out
    }

    pub fn reduces_to_zero(&self, f: &Polynomial) -> bool {
        self.normal_form(f).is_zero()
    }

    /// Re-checks Buchberger's criterion on every pair.
    pub fn verify(&self) -> bool {
        let basis: Vec<&DPoly> = self.internal.iter().collect();
        for i in 0..self.internal.len() {
            for j in i + 1..self.internal.len() {
                let (f, g) = (&self.internal[i], &self.internal[j]);
                let l = f.lt().lcm(g.lt());
                let s = spoly(&self.order, f, g, &l);
                match reduce(&self.order, s, &basis, true, None) {
                    Ok((r, _)) if r.is_empty() => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Monomials outside the leading-term ideal, or `None` if there are
    /// infinitely many (or more than `limit`).
    pub fn standard_monomials(&self, limit: usize) -> Option<Vec<Monomial>> {
        let n = self.order.vars.len();
        let lts: Vec<&Mono> = self.internal.iter().map(|d| d.lt()).collect();
        for i in 0..n {
            let pure = lts.iter().any(|m| m.e[i] > 0 && m.deg == m.e[i] as u32);
            if !pure {
                return None;
            }
        }
        let mut out = Vec::new();
        let mut stack = vec![vec![0u16; n]];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !seen.insert(e.clone()) {
                continue;
            }
            let m = Mono::new(e.clone().into_boxed_slice());
            if lts.iter().any(|l| l.divides(&m)) {
                continue;
            }
            out.push(m.to_monomial(&self.order.vars));
            if out.len() > limit {
                return None;
            }
            for i in 0..n {
                let mut f = e.clone();
                f[i] += 1;
                stack.push(f);
            }
        }
        out.sort_by(|a, b| self.order.cmp(a, b));
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solvable,
    Unsolvable,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SolvabilityVerdict {
    pub status: Status,
    pub witness: Option<String>,
    pub basis: Option<GroebnerBasis>,
}

/// Decides whether 1 lies in the ideal generated by `gens`.
pub fn contains_one(gens: &[Polynomial], order_kind: OrderKind, budget: &ResourceBudget) -> SolvabilityVerdict {
    let nonzero: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if nonzero.iter().any(|g| g.is_constant()) {
        return SolvabilityVerdict {
            status: Status::Unsolvable,
            witness: Some("nonzero constant generator".into()),
            basis: None,
        };
    }
    let order = TermOrder::for_polys(order_kind, &nonzero);
    match buchberger(&nonzero, &order, budget) {
        Ok(gb) if gb.is_unit() => SolvabilityVerdict {
            status: Status::Unsolvable,
            witness: Some("reduced basis is {1}".into()),
            basis: Some(gb),
        },
        Ok(gb) => SolvabilityVerdict {
            status: Status::Solvable,
            witness: Some(format!("reduced basis with {} elements", gb.generators().len())),
            basis: Some(gb),
        },
        Err(e) => SolvabilityVerdict { status: Status::Unknown, witness: Some(e.to_string()), basis: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::p;
    use proptest::prelude::*;

    fn gb(gens: &[&str], kind: OrderKind) -> GroebnerBasis {
        let g: Vec<Polynomial> = gens.iter().map(|s| p(s)).collect();
        buchberger(&g, &TermOrder::for_polys(kind, &g), &ResourceBudget::unlimited()).unwrap()
    }

    #[test]
    fn small_examples() {
        let b = gb(&["x1^2 - 1", "x1 - 1"], OrderKind::Lex);
        assert_eq!(b.generators(), &[p("x1 - 1")]);
        assert!(gb(&["x1", "1 - x1"], OrderKind::Lex).is_unit());
        let b = gb(&["a2^2 - 3*a1^2", "a1^3 - 1/4"], OrderKind::Grevlex);
        assert!(!b.is_unit());
        assert!(b.verify());
        assert!(b.reduces_to_zero(&p("a1^3 - 1/4")));
        assert_eq!(b.normal_form(&Polynomial::one()), Polynomial::one());
    }

    #[test]
    fn cyclic3() {
        let b = gb(
            &["x1 + x2 + x3", "x1*x2 + x2*x3 + x3*x1", "x1*x2*x3 - 1"],
            OrderKind::Grevlex,
        );
        assert!(b.verify());
        assert!(b.reduces_to_zero(&p("x1^3 - 1")));
        let lex = gb(&["x1 + x2 + x3", "x1*x2 + x2*x3 + x3*x1", "x1*x2*x3 - 1"], OrderKind::Lex);
        assert!(lex.verify());
        assert!(lex.generators().contains(&p("x3^3 - 1")));
    }

    #[test]
    fn verdicts() {
        let v = contains_one(&[p("a"), p("1 - a")], OrderKind::Block, &ResourceBudget::unlimited());
        assert_eq!(v.status, Status::Unsolvable);
        let v = contains_one(&[p("a1^2 + 1"), p("6*a_aux - 1")], OrderKind::Block, &ResourceBudget::unlimited());
        assert_eq!(v.status, Status::Solvable);
        let hard: Vec<Polynomial> = ["x1^5 + x2^4 + x3^3 - 1", "x1^3 + x2^3 + x3^2 - 1", "x1*x2*x3 - 2"]
            .iter()
            .map(|s| p(s))
            .collect();
        let v = contains_one(&hard, OrderKind::Lex, &ResourceBudget { time_limit: Some(Duration::from_nanos(1)), ..Default::default() });
        assert_eq!(v.status, Status::Unknown);
    }

    #[test]
    fn modular_agrees() {
        let cases: [&[&str]; 4] = [
            &["x1 + x2 + x3", "x1*x2 + x2*x3 + x3*x1", "x1*x2*x3 - 1"],
            &["a1^2 + 1/3*a2", "a1*a2 - 7/5", "a2^3 - a1"],
            &["2*x1 - 3", "x1^2 - 1"],
            &["x1^2*x2 - 5*x2^2", "x1*x2^2 + 1/7*x1"],
        ];
        for gens in cases {
            let g: Vec<Polynomial> = gens.iter().map(|s| p(s)).collect();
            let ord = TermOrder::for_polys(OrderKind::Grevlex, &g);
            let plain = buchberger(&g, &ord, &ResourceBudget::unlimited()).unwrap();
            let modular = groebner_basis(&g, &ord, &ResourceBudget::unlimited()).unwrap();
            assert_eq!(plain.generators(), modular.generators(), "{gens:?}");
            assert!(modular.verify());
        }
    }

    #[test]
    fn standard_monomials() {
        let b = gb(&["3*x1^2", "3*x2^2"], OrderKind::Grevlex);
        assert_eq!(b.standard_monomials(100).unwrap().len(), 4);
        let b = gb(&["2*x1*x2", "x1^2"], OrderKind::Grevlex);
        assert!(b.standard_monomials(100).is_none());
    }

    #[test]
    fn extra_variables_are_coefficients() {
        let b = gb(&["a1^2 + 1"], OrderKind::Block);
        assert_eq!(b.normal_form(&p("x1*a1^3 + y1*a1^2")), p("-x1*a1 - y1"));
    }

    fn arb_small() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec((-3i64..=3, 0u32..3, 0u32..3), 1..4).prop_map(|ts| {
            let (x, y) = (Var::geo("x1"), Var::geo("x2"));
            Polynomial::from_terms(ts.into_iter().map(|(c, a, b)| {
                (Monomial::from_pairs([(x, a), (y, b)]), crate::poly::int(c))
            }))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn order_independent_membership(f in arb_small(), g in arb_small(), h in arb_small()) {
            let gens = vec![f.clone(), g.clone()];
            let o1 = TermOrder::for_polys(OrderKind::Grevlex, [&f, &g, &h]);
            let o2 = TermOrder::for_polys(OrderKind::Lex, [&f, &g, &h]);
            let b1 = buchberger(&gens, &o1, &ResourceBudget::unlimited()).unwrap();
            let b2 = buchberger(&gens, &o2, &ResourceBudget::unlimited()).unwrap();
            prop_assert!(b1.verify());
            prop_assert!(b2.verify());
            let b3 = groebner_basis(&gens, &o1, &ResourceBudget::unlimited()).unwrap();
            prop_assert_eq!(b1.generators(), b3.generators());
            prop_assert_eq!(b1.is_unit(), b2.is_unit());
            let probe = &(&f * &h) + &g;
            prop_assert!(b1.reduces_to_zero(&probe));
            prop_assert!(b2.reduces_to_zero(&probe));
            prop_assert_eq!(b1.reduces_to_zero(&h), b2.reduces_to_zero(&h));
            let nf = b1.normal_form(&h);
            prop_assert_eq!(b1.normal_form(&nf), nf.clone());
            prop_assert_eq!(b1.normal_form(&(&h + &h)), &nf + &nf);
        }
    }
}
