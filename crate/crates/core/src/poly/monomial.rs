use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::var::{display_cmp, Var};

/// Sparse power product, stored sorted by variable id without zero exponents.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial::var_pow(v, 1)
    }

    pub fn var_pow(v: Var, e: u32) -> Monomial {
        let mut m = Monomial::one();
        if e > 0 {
            m.0.push((v, e));
        }
        m
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Monomial {
        let mut m = Monomial::one();
        for (v, e) in pairs {
            m = m.mul(&Monomial::var_pow(v, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1.checked_add(b[j].1).expect("exponent overflow");
                    out.push((a[i].0, e));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(
            self.0
                .iter()
                .map(|&(v, e)| (v, e.checked_mul(k).expect("exponent overflow")))
                .filter(|&(_, e)| e > 0)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, e)| other.exponent(v) >= e)
    }

    /// `self / other`, or `None` if `other` does not divide `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::new();
        for &(v, e) in &self.0 {
            let d = other.exponent(v);
            if d > e {
                return None;
            }
            if e > d {
                out.push((v, e - d));
            }
        }
        if other.0.iter().any(|&(v, _)| self.exponent(v) == 0) {
            return None;
        }
        Some(Monomial(out))
    }

    /// Drops `v` and returns its former exponent.
    pub fn without(&self, v: Var) -> (Monomial, u32) {
        let e = self.exponent(v);
        (
            Monomial(self.0.iter().copied().filter(|&(w, _)| w != v).collect()),
            e,
        )
    }

    /// Splits into (part in variables satisfying `pred`, rest).
    pub fn split(&self, pred: impl Fn(Var) -> bool) -> (Monomial, Monomial) {
        let (mut a, mut b) = (SmallVec::new(), SmallVec::new());
        for &(v, e) in &self.0 {
            if pred(v) {
                a.push((v, e));
            } else {
                b.push((v, e));
            }
        }
        (Monomial(a), Monomial(b))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    /// Variables in display order.
    pub(crate) fn display_pairs(&self) -> Vec<(Var, u32)> {
        let mut p: Vec<_> = self.0.to_vec();
        p.sort_by(|a, b| display_cmp(a.0, b.0));
        p
    }

    /// Comparison used for printing: higher degree first, then
    /// lexicographic on the display variable order.
    pub(crate) fn display_order(&self, other: &Monomial) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            let (a, b) = (self.display_pairs(), other.display_pairs());
            for (x, y) in a.iter().zip(b.iter()) {
                let c = display_cmp(x.0, y.0).then_with(|| y.1.cmp(&x.1));
                if c != Ordering::Equal {
                    return c;
                }
            }
            b.len().cmp(&a.len())
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.display_pairs().into_iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
