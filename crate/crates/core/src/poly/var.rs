use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Geometric,
    Parameter,
}

/// Interned variable. Identity is process-wide: a name always maps to the
/// same `Var`, and its tier cannot change once registered.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

#[derive(Default)]
struct Registry {
    names: Vec<&'static str>,
    tiers: Vec<Tier>,
    lookup: HashMap<&'static str, Var>,
}

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(Default::default)
}

pub fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Tier used when a name is first seen without explicit context:
/// `a`, `a<digits>…` and `a_…` are parameters, everything else is geometric.
pub fn default_tier(name: &str) -> Tier {
    let rest = match name.strip_prefix('a') {
        Some(r) => r,
        None => return Tier::Geometric,
    };
    match rest.chars().next() {
        None => Tier::Parameter,
        Some(c) if c.is_ascii_digit() || c == '_' => Tier::Parameter,
        _ => Tier::Geometric,
    }
}

impl Var {
    pub fn new(name: &str, tier: Tier) -> Result<Var> {
        if !valid_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if let Some(v) = Var::lookup(name) {
            return if v.tier() == tier {
                Ok(v)
            } else {
                Err(Error::TierMismatch(name.to_string()))
            };
        }
        let mut reg = registry().write().unwrap();
        if let Some(&v) = reg.lookup.get(name) {
            return if reg.tiers[v.0 as usize] == tier {
                Ok(v)
            } else {
                Err(Error::TierMismatch(name.to_string()))
            };
        }
        let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
        let v = Var(reg.names.len() as u32);
        reg.names.push(leaked);
        reg.tiers.push(tier);
        reg.lookup.insert(leaked, v);
        Ok(v)
    }

    /// Existing variable, or a new one with the default tier for its name.
    pub fn named(name: &str) -> Result<Var> {
        match Var::lookup(name) {
            Some(v) => Ok(v),
            None => Var::new(name, default_tier(name)),
        }
    }

    /// Panicking shorthand for a geometric variable.
    pub fn geo(name: &str) -> Var {
        Var::new(name, Tier::Geometric).expect("geometric variable")
    }

    /// Panicking shorthand for a parameter variable.
    pub fn param(name: &str) -> Var {
        Var::new(name, Tier::Parameter).expect("parameter variable")
    }

    pub fn lookup(name: &str) -> Option<Var> {
        registry().read().unwrap().lookup.get(name).copied()
    }

    pub fn name(self) -> &'static str {
        registry().read().unwrap().names[self.0 as usize]
    }

    pub fn tier(self) -> Tier {
        registry().read().unwrap().tiers[self.0 as usize]
    }

    pub fn is_param(self) -> bool {
        self.tier() == Tier::Parameter
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Orders names so that digit runs compare numerically (`x2 < x10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (ab, bb) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < ab.len() && j < bb.len() {
        if ab[i].is_ascii_digit() && bb[j].is_ascii_digit() {
            let si = i;
            while i < ab.len() && ab[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < bb.len() && bb[j].is_ascii_digit() {
                j += 1;
            }
            let na = a[si..i].trim_start_matches('0');
            let nb = b[sj..j].trim_start_matches('0');
            let c = na.len().cmp(&nb.len()).then_with(|| na.cmp(nb));
            if c != Ordering::Equal {
                return c;
            }
        } else {
            let c = ab[i].cmp(&bb[j]);
            if c != Ordering::Equal {
                return c;
            }
            i += 1;
            j += 1;
        }
    }
    (ab.len() - i).cmp(&(bb.len() - j)).then_with(|| a.cmp(b))
}

/// Display/canonical order: geometric before parameter, `a_aux` last, names
/// compared naturally.
pub fn display_cmp(a: Var, b: Var) -> Ordering {
    let key = |v: Var| (v.tier(), v.name() == "a_aux");
    key(a)
        .cmp(&key(b))
        .then_with(|| natural_cmp(a.name(), b.name()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiers_are_sticky() {
        let v = Var::geo("zz_tier_probe");
        assert_eq!(Var::geo("zz_tier_probe"), v);
        assert!(matches!(
            Var::new("zz_tier_probe", Tier::Parameter),
            Err(Error::TierMismatch(_))
        ));
    }

    #[test]
    fn default_tiers() {
        assert_eq!(default_tier("a"), Tier::Parameter);
        assert_eq!(default_tier("a12"), Tier::Parameter);
        assert_eq!(default_tier("a_aux"), Tier::Parameter);
        assert_eq!(default_tier("abc"), Tier::Geometric);
        assert_eq!(default_tier("x1"), Tier::Geometric);
    }

    #[test]
    fn rejects_bad_names() {
        assert!(Var::new("X", Tier::Geometric).is_err());
        assert!(Var::new("1x", Tier::Geometric).is_err());
        assert!(Var::new("", Tier::Geometric).is_err());
    }

    #[test]
    fn natural_order() {
        assert_eq!(natural_cmp("x2", "x10"), Ordering::Less);
        assert_eq!(natural_cmp("x10", "x9"), Ordering::Greater);
        assert_eq!(natural_cmp("a1", "b0"), Ordering::Less);
    }
}
