use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Polynomial, Rational, Tier, Var};
use crate::error::{Error, Result};

/// Decides the tier of names met while parsing. Names listed as parameters
/// become parameter variables; anything else uses the registry or the
/// default naming rule.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    params: HashSet<String>,
}

impl ParseContext {
    pub fn with_params(params: &[&str]) -> Self {
        ParseContext {
            params: params.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn resolve(&self, name: &str) -> Result<Var> {
        if self.params.contains(name) {
            Var::new(name, Tier::Parameter)
        } else {
            Var::named(name)
        }
    }

    pub fn parse(&self, s: &str) -> Result<Polynomial> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, ctx: self };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            if sign < 0 {
                acc -= t;
            } else {
                acc += t;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.natural()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn natural(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(txt.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.natural()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let d = self.natural()?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    Ok(Polynomial::constant(Rational::new(n, d)))
                } else {
                    Ok(Polynomial::constant(Rational::from_integer(n)))
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_lowercase()
                        || self.s[self.pos].is_ascii_digit()
                        || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let v = self.ctx.resolve(name).map_err(|e| Error::Parse {
                    pos: start,
                    msg: e.to_string(),
                })?;
                Ok(Polynomial::var(v))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let poly = ParseContext::default().parse(s)?;
    if poly.vars().is_empty() {
        Ok(poly.constant_term())
    } else {
        Err(Error::Parse { pos: 0, msg: format!("not a rational number: {s}") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::p;

    #[test]
    fn grammar() {
        let f = p("-3/8*x1^2*a4*a1^3*a2^3");
        assert_eq!(f.num_terms(), 1);
        assert_eq!(f.to_string(), "-3/8*x1^2*a1^3*a2^3*a4");
        assert_eq!(Polynomial::parse(&f.to_string()).unwrap(), f);
        assert_eq!(p("a1*(y1+y2)"), p("a1*y1 + a1*y2"));
        assert_eq!(p("(a1^2+1)*x1^10"), p("a1^2*x1^10 + x1^10"));
        assert_eq!(p("x - x"), Polynomial::zero());
        assert_eq!(p("- 2 + x1"), p("x1 - 2"));
    }

    #[test]
    fn errors() {
        assert!(Polynomial::parse("x1 +").is_err());
        assert!(Polynomial::parse("x1 / 2").is_err());
        assert!(Polynomial::parse("1/0").is_err());
        assert!(Polynomial::parse("X1").is_err());
        assert!(Polynomial::parse("(x1").is_err());
    }

    #[test]
    fn explicit_params() {
        let f = Polynomial::parse_with_params("s_prm*x1 + t_prm", &["s_prm", "t_prm"]).unwrap();
        assert_eq!(f.param_vars().len(), 2);
        assert_eq!(parse_rational("-3/8").unwrap(), crate::poly::rat(-3, 8));
        assert!(parse_rational("x1").is_err());
    }
}
