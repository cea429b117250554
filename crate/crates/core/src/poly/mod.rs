//! Sparse polynomials over the rationals in geometric and parameter variables.

mod matrix;
mod monomial;
mod parse;
mod var;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use matrix::PolyMatrix;
pub use monomial::Monomial;
pub use parse::{parse_rational, ParseContext};
pub use var::{default_tier, display_cmp, natural_cmp, valid_name, Tier, Var};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Prints a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn one() -> Polynomial {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Polynomial {
        Polynomial::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Polynomial {
        Polynomial::constant(int(n))
    }

    pub fn var(v: Var) -> Polynomial {
        Polynomial::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(c: Rational, m: Monomial) -> Polynomial {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rational)>) -> Polynomial {
        let mut p = Polynomial::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    /// Parses with default tiers (see [`default_tier`]).
    pub fn parse(s: &str) -> Result<Polynomial> {
        ParseContext::default().parse(s)
    }

    /// Parses treating the listed names as parameters.
    pub fn parse_with_params(s: &str, params: &[&str]) -> Result<Polynomial> {
        ParseContext::with_params(params).parse(s)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        self.is_constant().then(|| self.constant_term())
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn geometric_vars(&self) -> BTreeSet<Var> {
        self.vars().into_iter().filter(|v| !v.is_param()).collect()
    }

    pub fn param_vars(&self) -> BTreeSet<Var> {
        self.vars().into_iter().filter(|v| v.is_param()).collect()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rational, m: &Monomial) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn differentiate(&self, v: Var) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            if e > 0 {
                out.add_term(
                    rest.mul(&Monomial::var_pow(v, e - 1)),
                    c * Rational::from_integer(BigInt::from(e)),
                );
            }
        }
        out
    }

    /// Derivative with respect to a named variable; errors on unknown names.
    pub fn differentiate_by_name(&self, name: &str) -> Result<Polynomial> {
        let v = Var::lookup(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(self.differentiate(v))
    }

    /// Simultaneous substitution. Variables without a binding stay put.
    pub fn substitute(&self, bindings: &HashMap<Var, Polynomial>) -> Polynomial {
        let mut cache: HashMap<(Var, u32), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut acc = Polynomial::constant(c.clone());
            for (v, e) in m.iter() {
                match bindings.get(&v) {
                    Some(p) => {
                        let pw = cache.entry((v, e)).or_insert_with(|| p.pow(e));
                        acc = &acc * &*pw;
                    }
                    None => kept = kept.mul(&Monomial::var_pow(v, e)),
                }
            }
            if !kept.is_one() {
                acc = acc.mul_monomial(&Rational::one(), &kept);
            }
            out += acc;
        }
        out
    }

    /// Substitutes rational values for variables.
    pub fn evaluate(&self, values: &HashMap<Var, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut coef = c.clone();
            for (v, e) in m.iter() {
                match values.get(&v) {
                    Some(x) => coef *= num_traits::pow(x.clone(), e as usize),
                    None => kept = kept.mul(&Monomial::var_pow(v, e)),
                }
            }
            out.add_term(kept, coef);
        }
        out
    }

    /// Sets the given variables to zero.
    pub fn set_zero(&self, vars: &[Var]) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| vars.iter().all(|&v| m.exponent(v) == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Groups terms by their monomial in the variables selected by `pred`;
    /// each group's coefficient is a polynomial in the remaining variables.
    pub fn collect_by(&self, pred: impl Fn(Var) -> bool) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (outer, inner) = m.split(&pred);
            out.entry(outer).or_default().add_term(inner, c.clone());
        }
        out
    }

    /// Coefficient polynomials of the geometric monomials.
    pub fn geometric_coefficients(&self) -> BTreeMap<Monomial, Polynomial> {
        self.collect_by(|v| !v.is_param())
    }

    pub fn map_coefficients(&self, f: impl Fn(&Rational) -> Rational) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Weighted degrees occurring, under a weight function on variables.
    pub fn weighted_degrees(&self, w: impl Fn(Var) -> Rational) -> BTreeSet<Rational> {
        self.terms
            .keys()
            .map(|m| {
                m.iter()
                    .fold(Rational::zero(), |acc, (v, e)| acc + w(v) * int(e as i64))
            })
            .collect()
    }

    /// Leading term under graded lex on variable ids.
    fn grlex_lead(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    /// Exact quotient `self / d`; fails if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Result<Polynomial> {
        let (dm, dc) = d.grlex_lead().ok_or(Error::InexactDivision)?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = Polynomial::zero();
        while let Some((m, c)) = r.grlex_lead() {
            let t = m.div(&dm).ok_or(Error::InexactDivision)?;
            let c = c / &dc;
            r -= d.mul_monomial(&c, &t);
            q.add_term(t, c);
        }
        Ok(q)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

fn grlex(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        let mut vars: Vec<Var> = a.vars().chain(b.vars()).collect();
        vars.sort();
        vars.dedup();
        for v in vars {
            let c = a.exponent(v).cmp(&b.exponent(v));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    })
}

impl From<Var> for Polynomial {
    fn from(v: Var) -> Self {
        Polynomial::var(v)
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for Polynomial {
    fn add_assign(&mut self, rhs: Polynomial) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            for (m, c) in lhs.terms {
                self.add_term(m, c);
            }
        } else {
            for (m, c) in rhs.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl SubAssign for Polynomial {
    fn sub_assign(&mut self, rhs: Polynomial) {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += rhs;
        self
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= rhs;
        self
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(mut self) -> Polynomial {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let (a, b) = if self.terms.len() <= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Polynomial {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.0.display_order(b.0));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                f.write_str(&fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&abs))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl std::str::FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Polynomial::parse(s)
    }
}

impl serde::Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Polynomial::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses with default tiers, panicking on error. For literals in code.
pub fn p(s: &str) -> Polynomial {
    Polynomial::parse(s).unwrap_or_else(|e| panic!("bad polynomial literal {s:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn differentiation_examples() {
        let f = p("x1^12 + x2^2");
        assert_eq!(f.differentiate(Var::geo("x1")), p("12*x1^11"));
        assert_eq!(f.differentiate(Var::geo("x2")), p("2*x2"));
        let g = p("a1*x1^3*y2 + y1");
        assert_eq!(g.differentiate(Var::geo("y1")), Polynomial::one());
        assert!(f.differentiate_by_name("never_seen_var_q").is_err());
    }

    #[test]
    fn substitution_examples() {
        let (x1, x2, y1) = (Var::geo("x1"), Var::geo("x2"), Var::geo("y1"));
        let b: HashMap<_, _> = [(x1, Polynomial::var(y1))].into();
        assert_eq!(p("x1^2 - y1").substitute(&b), p("y1^2 - y1"));
        let b: HashMap<_, _> = [(x1, p("x1 + x2")), (x2, p("x2"))].into();
        assert_eq!(p("x1*x2").substitute(&b), p("x1*x2 + x2^2"));
        let id: HashMap<_, _> = [(x1, Polynomial::var(x1)), (x2, Polynomial::var(x2))].into();
        let f = p("3/7*x1^4*x2 - x2^3 + a1*x1");
        assert_eq!(f.substitute(&id), f);
    }

    #[test]
    fn exact_division() {
        let f = p("x1^3 - y1^3");
        assert_eq!(f.div_exact(&p("x1 - y1")).unwrap(), p("x1^2 + x1*y1 + y1^2"));
        assert!(p("x1^2 + 1").div_exact(&p("x1 - y1")).is_err());
    }

    #[test]
    fn zero_is_empty() {
        let f = p("x1^2 + 2*a1*x2 - 1/3");
        assert!((&f - &f).is_zero());
        assert_eq!(Polynomial::zero().num_terms(), 0);
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        let names = ["x1", "x2", "y1", "a1"];
        proptest::collection::vec(
            (-5i64..=5, 1i64..=3, proptest::collection::vec(0u32..3, 4)),
            0..5,
        )
        .prop_map(move |ts| {
            Polynomial::from_terms(ts.into_iter().map(|(n, d, es)| {
                let m = Monomial::from_pairs(
                    names.iter().zip(es).map(|(nm, e)| (Var::named(nm).unwrap(), e)),
                );
                (m, rat(n, d))
            }))
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn round_trip(a in arb_poly()) {
            prop_assert_eq!(Polynomial::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn linear_maps(a in arb_poly(), b in arb_poly(), k in -4i64..4) {
            let x = Var::geo("x1");
            let k = int(k);
            let lhs = (&a.scale(&k) + &b).differentiate(x);
            prop_assert_eq!(lhs, &a.differentiate(x).scale(&k) + &b.differentiate(x));
            let bind: HashMap<_, _> = [(x, p("x2 - 2*y1"))].into();
            let lhs = (&a.scale(&k) + &b).substitute(&bind);
            prop_assert_eq!(lhs, &a.substitute(&bind).scale(&k) + &b.substitute(&bind));
        }

        #[test]
        fn leibniz_and_homomorphism(a in arb_poly(), b in arb_poly()) {
            let x = Var::geo("x2");
            let prod = &a * &b;
            prop_assert_eq!(
                prod.differentiate(x),
                &(&a.differentiate(x) * &b) + &(&a * &b.differentiate(x))
            );
            let bind: HashMap<_, _> = [(x, p("x1*y1 + 1"))].into();
            prop_assert_eq!(prod.substitute(&bind), &a.substitute(&bind) * &b.substitute(&bind));
        }
    }
}
