//! Multi-modular Gröbner bases for degree-compatible orders.
//!
//! The generators are homogenised and a reduced basis is computed modulo
//! several word-sized primes. Coefficients are lifted by Chinese remaindering
//! and rational reconstruction. The lift is then certified over Q: it must be
//! a Gröbner basis whose ideal contains every generator, with the same leading
//! terms as the basis modulo a prime. Reduction mod p can only lower the rank
//! of each graded piece of a homogeneous ideal, so those checks force the two
//! ideals to coincide. Dehomogenising a grevlex basis (homogenising variable
//! last) gives a basis of the original ideal.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::*;

type ModTerms = Vec<(Mono, u32)>;

const MAX_PRIMES: usize = 400;

struct ModPoly {
    t: ModTerms,
}

impl Leading for ModPoly {
    fn lt(&self) -> &Mono {
        &self.t.last().unwrap().0
    }

    // generators are homogeneous, so sugar is plain degree
    fn sugar(&self) -> u32 {
        self.lt().deg
    }
}

fn mulm(a: u32, b: u32, q: u32) -> u32 {
    (a as u64 * b as u64 % q as u64) as u32
}

fn powm(mut a: u32, mut e: u32, q: u32) -> u32 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, q);
        }
        a = mulm(a, a, q);
        e >>= 1;
    }
    r
}

fn invm(a: u32, q: u32) -> u32 {
    powm(a, q - 2, q)
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d: &u32| d * d <= n).all(|d| n % d != 0)
}

/// Primes below 2^31, largest first.
fn primes() -> impl Iterator<Item = u32> {
    (1u32 << 30..1u32 << 31).rev().filter(|&n| n % 2 == 1 && is_prime(n))
}

fn to_mod(c: &BigInt, q: u32) -> u32 {
    c.mod_floor(&BigInt::from(q)).to_u32().unwrap()
}

fn monic(t: &mut ModTerms, q: u32) {
    if let Some(&(_, l)) = t.last() {
        if l != 1 {
            let i = invm(l, q);
            for (_, c) in t.iter_mut() {
                *c = mulm(*c, i, q);
            }
        }
    }
}

/// `p − c·m·g` for ascending term lists.
fn sub_mul_mod(ord: &TermOrder, p: ModTerms, c: u32, m: &Mono, g: &[(Mono, u32)], q: u32) -> ModTerms {
    let mut out = Vec::with_capacity(p.len() + g.len());
    let mut gi = g.iter().map(|(gm, gc)| (gm.mul(m), mulm(*gc, c, q))).peekable();
    let mut pi = p.into_iter().peekable();
    loop {
        let step = match (pi.peek(), gi.peek()) {
            (None, None) => break,
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (Some((pm, _)), Some((gm, _))) => ord.cmp_exp(pm, gm),
        };
        match step {
            Ordering::Less => out.push(pi.next().unwrap()),
            Ordering::Greater => {
                let (gm, gc) = gi.next().unwrap();
                if gc != 0 {
                    out.push((gm, q - gc));
                }
            }
            Ordering::Equal => {
                let (pm, pc) = pi.next().unwrap();
                let (_, gc) = gi.next().unwrap();
                let v = if pc >= gc { pc - gc } else { pc + q - gc };
                if v != 0 {
                    out.push((pm, v));
                }
            }
        }
    }
    out
}

fn reduce_mod(
    ord: &TermOrder,
    mut p: ModTerms,
    basis: &[&ModPoly],
    q: u32,
    deadline: Option<Instant>,
) -> Result<ModTerms, Interrupted> {
    let mut r: ModTerms = Vec::new();
    let mut steps = 0u64;
    while let Some((m, c)) = p.last() {
        match basis.iter().find(|g| g.lt().divides(m)) {
            None => r.push(p.pop().unwrap()),
            Some(g) => {
                let (t, c) = (m.div(g.lt()), *c);
                p.pop();
                p = sub_mul_mod(ord, p, c, &t, &g.t[..g.t.len() - 1], q);
                steps += 1;
                if steps % 64 == 0 && deadline.is_some_and(|dl| Instant::now() > dl) {
                    return Err(Interrupted);
                }
            }
        }
    }
    r.reverse();
    monic(&mut r, q);
    Ok(r)
}

fn spoly_mod(ord: &TermOrder, f: &ModPoly, g: &ModPoly, lcm: &Mono, q: u32) -> ModTerms {
    let mf = lcm.div(f.lt());
    let mg = lcm.div(g.lt());
    let ft: ModTerms = f.t[..f.t.len() - 1].iter().map(|(m, c)| (m.mul(&mf), *c)).collect();
    sub_mul_mod(ord, ft, 1, &mg, &g.t[..g.t.len() - 1], q)
}

enum ModOutcome {
    Basis(Vec<ModTerms>),
    BadPrime,
}

/// Reduced basis modulo `q`, ascending by leading term.
fn gb_mod(
    ord: &TermOrder,
    inputs: &[Terms],
    q: u32,
    budget: &ResourceBudget,
    deadline: Option<Instant>,
) -> Result<ModOutcome, Exhausted> {
    let mut polys: Vec<ModPoly> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let exhausted = |reason: &str, active: &Vec<usize>, pairs: &Vec<Pair>| Exhausted {
        reason: reason.to_string(),
        basis_size: active.len(),
        pairs_left: pairs.len(),
    };
    let mut queue: Vec<ModTerms> = Vec::new();
    for t in inputs {
        if to_mod(&t.last().unwrap().1, q) == 0 {
            return Ok(ModOutcome::BadPrime);
        }
        let mut m: ModTerms = t.iter().map(|(m, c)| (m.clone(), to_mod(c, q))).filter(|(_, c)| *c != 0).collect();
        monic(&mut m, q);
        queue.push(m);
    }
    queue.sort_by(|a, b| ord.cmp_exp(&b.last().unwrap().0, &a.last().unwrap().0));
    loop {
        let t = if let Some(t) = queue.pop() {
            t
        } else {
            if pairs.is_empty() {
                break;
            }
            let k = (0..pairs.len())
                .min_by(|&a, &b| {
                    pairs[a].sugar.cmp(&pairs[b].sugar).then_with(|| ord.cmp_exp(&pairs[a].lcm, &pairs[b].lcm))
                })
                .unwrap();
            let pr = pairs.swap_remove(k);
            if budget.max_pair_degree.is_some_and(|d| pr.lcm.deg > d) {
                return Err(exhausted("pair degree bound exceeded", &active, &pairs));
            }
            spoly_mod(ord, &polys[pr.i], &polys[pr.j], &pr.lcm, q)
        };
        let basis: Vec<&ModPoly> = active.iter().map(|&i| &polys[i]).collect();
        let h = reduce_mod(ord, t, &basis, q, deadline)
            .map_err(|_| exhausted("time limit exceeded", &active, &pairs))?;
        if h.is_empty() {
            continue;
        }
        let hi = polys.len();
        polys.push(ModPoly { t: h });
        update(&polys, &mut active, &mut pairs, hi);
        if budget.max_basis_size.is_some_and(|b| active.len() > b) {
            return Err(exhausted("basis size bound exceeded", &active, &pairs));
        }
    }
    // active leading terms are already pairwise non-dividing
    let mut minimal: Vec<&ModPoly> = active.iter().map(|&i| &polys[i]).collect();
    minimal.sort_by(|a, b| ord.cmp_exp(a.lt(), b.lt()));
    let mut out = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<&ModPoly> = minimal.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, p)| *p).collect();
        let g = &minimal[k].t;
        let mut t = reduce_tail(ord, g[..g.len() - 1].to_vec(), &others, q);
        t.push(g.last().unwrap().clone());
        out.push(t);
    }
    Ok(ModOutcome::Basis(out))
}

/// Full reduction of a tail, without making it monic.
fn reduce_tail(ord: &TermOrder, mut p: ModTerms, basis: &[&ModPoly], q: u32) -> ModTerms {
    let mut r: ModTerms = Vec::new();
    while let Some((m, c)) = p.last() {
        match basis.iter().find(|g| g.lt().divides(m)) {
            None => r.push(p.pop().unwrap()),
            Some(g) => {
                let (t, c) = (m.div(g.lt()), *c);
                p.pop();
                p = sub_mul_mod(ord, p, c, &t, &g.t[..g.t.len() - 1], q);
            }
        }
    }
    r.reverse();
    r
}

/// `a/b` with `a ≡ b·x mod m` and both below `sqrt(m/2)`.
fn rational_reconstruction(x: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.clone());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let qt = &r0 / &r1;
        let r2 = &r0 - &qt * &r1;
        let t2 = &t0 - &qt * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Rational::new(r1, t1))
}

/// Chinese-remainder accumulation for one leading-term pattern.
struct Lift {
    lts: Vec<Mono>,
    coeffs: Vec<HashMap<Mono, BigInt>>,
    modulus: BigInt,
}

impl Lift {
    fn new(g: &[ModTerms], q: u32) -> Lift {
        Lift {
            lts: g.iter().map(|t| t.last().unwrap().0.clone()).collect(),
            coeffs: g.iter().map(|t| t.iter().map(|(m, c)| (m.clone(), BigInt::from(*c))).collect()).collect(),
            modulus: BigInt::from(q),
        }
    }

    fn matches(&self, g: &[ModTerms]) -> bool {
        self.lts.len() == g.len() && self.lts.iter().zip(g).all(|(l, t)| *l == t.last().unwrap().0)
    }

    /// Every leading term here is a multiple of one in `g`.
    fn dominated_by(&self, g: &[ModTerms]) -> bool {
        self.lts.iter().all(|l| g.iter().any(|t| t.last().unwrap().0.divides(l)))
    }

    fn absorb(&mut self, g: &[ModTerms], q: u32) {
        let qb = BigInt::from(q);
        let minv = BigInt::from(invm(to_mod(&self.modulus, q), q));
        for (acc, t) in self.coeffs.iter_mut().zip(g) {
            let new: HashMap<&Mono, u32> = t.iter().map(|(m, c)| (m, *c)).collect();
            for m in new.keys() {
                acc.entry((*m).clone()).or_insert_with(BigInt::zero);
            }
            for (m, x) in acc.iter_mut() {
                let r = BigInt::from(new.get(m).copied().unwrap_or(0));
                let delta = ((r - &*x) * &minv).mod_floor(&qb);
                *x += &self.modulus * delta;
            }
        }
        self.modulus *= qb;
    }

    fn reconstruct(&self) -> Option<Vec<Vec<(Mono, Rational)>>> {
        self.coeffs
            .iter()
            .map(|acc| {
                acc.iter()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(m, x)| rational_reconstruction(x, &self.modulus).map(|r| (m.clone(), r)))
                    .collect()
            })
            .collect()
    }
}

fn agrees_mod(cand: &[Vec<(Mono, Rational)>], g: &[ModTerms], q: u32) -> bool {
    cand.len() == g.len()
        && cand.iter().zip(g).all(|(c, t)| {
            let mut img: HashMap<&Mono, u32> = HashMap::new();
            for (m, r) in c {
                let d = to_mod(r.denom(), q);
                if d == 0 {
                    return false;
                }
                let v = mulm(to_mod(r.numer(), q), invm(d, q), q);
                if v != 0 {
                    img.insert(m, v);
                }
            }
            img.len() == t.len() && t.iter().all(|(m, c)| img.get(m) == Some(c))
        })
}

fn integral(ord: &TermOrder, c: &[(Mono, Rational)]) -> DPoly {
    let den = c.iter().fold(BigInt::one(), |l, (_, r)| l.lcm(r.denom()));
    let mut t: Terms = c.iter().map(|(m, r)| (m.clone(), (r * Rational::from_integer(den.clone())).to_integer())).collect();
    t.sort_by(|a, b| ord.cmp_exp(&a.0, &b.0));
    normalise(&mut t);
    let sugar = t.last().unwrap().0.deg;
    DPoly { t, sugar }
}

/// Checks over Q that `cand` is a Gröbner basis and that every input
/// reduces to zero.
fn certify(ord: &TermOrder, cand: &[DPoly], inputs: &[Terms], deadline: Option<Instant>) -> Result<bool, Interrupted> {
    let mut active = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..cand.len() {
        update(cand, &mut active, &mut pairs, i);
    }
    let basis: Vec<&DPoly> = cand.iter().collect();
    let zero = |t: Terms| reduce(ord, t, &basis, false, deadline).map(|(r, _)| r.is_empty());
    let pair_ok: Result<Vec<bool>, Interrupted> = pairs
        .par_iter()
        .map(|p| zero(spoly(ord, &cand[p.i], &cand[p.j], &p.lcm)))
        .collect();
    if !pair_ok?.into_iter().all(|b| b) {
        return Ok(false);
    }
    let input_ok: Result<Vec<bool>, Interrupted> = inputs.par_iter().map(|t| zero(t.clone())).collect();
    Ok(input_ok?.into_iter().all(|b| b))
}

/// Whether the multi-modular path applies: the order must be grevlex on the
/// variables that occur.
pub(super) fn applicable(ord: &TermOrder) -> bool {
    match ord.kind {
        OrderKind::Grevlex => true,
        OrderKind::Block => ord.split == 0 || ord.split == ord.vars.len(),
        OrderKind::Lex => false,
    }
}

pub(super) fn modular_basis(
    ord: TermOrder,
    inputs: Vec<Terms>,
    budget: &ResourceBudget,
    deadline: Option<Instant>,
) -> Result<GroebnerBasis, Exhausted> {
    let n = ord.vars.len();
    let hord = TermOrder { kind: OrderKind::Grevlex, vars: ord.vars.clone(), split: n + 1 };
    let hom: Vec<Terms> = inputs
        .iter()
        .map(|t| {
            let d = t.iter().map(|(m, _)| m.deg).max().unwrap();
            let mut h: Terms = t
                .iter()
                .map(|(m, c)| {
                    let mut e = m.e.to_vec();
                    e.push(u16::try_from(d - m.deg).expect("exponent overflow"));
                    (Mono::new(e.into_boxed_slice()), c.clone())
                })
                .collect();
            h.sort_by(|a, b| hord.cmp_exp(&a.0, &b.0));
            h
        })
        .collect();
    let fail = |reason: &str, size: usize| Exhausted { reason: reason.to_string(), basis_size: size, pairs_left: 0 };
    let timed_out = || deadline.is_some_and(|dl| Instant::now() > dl);

    let mut lift: Option<Lift> = None;
    for (used, q) in primes().enumerate() {
        if used >= MAX_PRIMES {
            return Err(fail("modular lifting did not stabilise", lift.map_or(0, |l| l.lts.len())));
        }
        let g = match gb_mod(&hord, &hom, q, budget, deadline)? {
            ModOutcome::Basis(g) => g,
            ModOutcome::BadPrime => continue,
        };
        let Some(l) = lift.as_mut() else {
            lift = Some(Lift::new(&g, q));
            continue;
        };
        if !l.matches(&g) {
            // a prime with a strictly larger leading ideal exposes the old ones as unlucky
            if l.dominated_by(&g) {
                lift = Some(Lift::new(&g, q));
            }
            continue;
        }
        if let Some(cand) = l.reconstruct() {
            if agrees_mod(&cand, &g, q) {
                let cand: Vec<DPoly> = cand.iter().map(|c| integral(&hord, c)).collect();
                match certify(&hord, &cand, &hom, deadline) {
                    Ok(true) => return Ok(dehomogenise(ord, &cand)),
                    Ok(false) => {}
                    Err(Interrupted) => return Err(fail("time limit exceeded", cand.len())),
                }
            }
        }
        l.absorb(&g, q);
        if timed_out() {
            return Err(fail("time limit exceeded", l.lts.len()));
        }
    }
    unreachable!("infinitely many primes")
}

fn dehomogenise(ord: TermOrder, cand: &[DPoly]) -> GroebnerBasis {
    let n = ord.vars.len();
    let basis = cand
        .iter()
        .map(|d| {
            let mut t: Terms = d.t.iter().map(|(m, c)| (Mono::new(m.e[..n].into()), c.clone())).collect();
            t.sort_by(|a, b| ord.cmp_exp(&a.0, &b.0));
            let sugar = t.last().unwrap().0.deg;
            DPoly { t, sugar }
        })
        .collect();
    interreduce(ord, basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruction() {
        let m = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        let r = Rational::new(BigInt::from(-355), BigInt::from(113));
        let inv113 = BigInt::from(113).extended_gcd(&m).x.mod_floor(&m);
        let x = (BigInt::from(-355) * inv113).mod_floor(&m);
        assert_eq!(rational_reconstruction(&x, &m), Some(r));
    }

    #[test]
    fn primes_are_prime() {
        let ps: Vec<u32> = primes().take(3).collect();
        assert_eq!(ps[0], 2_147_483_647);
        assert!(ps.iter().all(|&p| is_prime(p)));
    }
}
