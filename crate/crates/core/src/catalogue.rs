//! Named potentials and the table of known orbifold equivalences.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::Potential;
use crate::poly::{Polynomial, Rational, Var};

/// Largest index shipped for the A and D series and the derived families.
pub const SERIES_MAX: usize = 40;
const FAMILY_MAX: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct CatalogueEntry {
    pub name: String,
    pub poly: Polynomial,
    pub variables: Vec<String>,
    #[serde(serialize_with = "ser_rational")]
    pub central_charge: Rational,
    pub families: Vec<&'static str>,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::poly::fmt_rational(r))
}

impl CatalogueEntry {
    fn build(name: String, poly: &str, families: &[&'static str]) -> CatalogueEntry {
        let v = Potential::parse(poly).unwrap_or_else(|e| panic!("catalogue entry {name}: {e}"));
        CatalogueEntry {
            variables: v.vars().iter().map(|x| x.name().to_string()).collect(),
            central_charge: v.central_charge(),
            poly: v.poly,
            name,
            families: families.to_vec(),
        }
    }

    pub fn potential(&self) -> Potential {
        Potential::new(self.poly.clone()).expect("catalogue entries are potentials").named(&self.name)
    }

    /// The same potential written in variables `prefix1, prefix2, …`,
    /// numbered in the entry's variable order.
    pub fn potential_in(&self, prefix: &str) -> Result<Potential> {
        let v = self.potential();
        let mut vars = v.vars();
        vars.sort_by(|a, b| crate::poly::display_cmp(*a, *b));
        let map: Vec<(Var, Var)> = vars
            .iter()
            .enumerate()
            .map(|(i, &x)| Ok((x, Var::named(&format!("{prefix}{}", i + 1))?)))
            .collect::<Result<_>>()?;
        Ok(v.rename(&map)?.named(&self.name))
    }
}

fn build_catalogue() -> Vec<CatalogueEntry> {
    let mut out = Vec::new();
    let mut add = |name: String, poly: String, fam: &[&'static str]| out.push(CatalogueEntry::build(name, &poly, fam));

    for n in 1..=SERIES_MAX {
        add(format!("A{n}"), format!("x1^{} + x2^2", n + 1), &["ADE", "simple"]);
    }
    for d in 4..=SERIES_MAX {
        add(format!("D{d}"), format!("x1^{} + x1*x2^2", d - 1), &["ADE", "simple"]);
    }
    add("E6".into(), "x1^3 + x2^4".into(), &["ADE", "simple"]);
    add("E7".into(), "x1^3 + x1*x2^3".into(), &["ADE", "simple"]);
    add("E8".into(), "x1^3 + x2^5".into(), &["ADE", "simple"]);

    let unimodal: [(&str, &str); 14] = [
        ("E12", "x1^3 + x2^7"),
        ("E13", "x1^5*x2 + x2^3"),
        ("E14", "x1^8 + x2^2 + x3^3"),
        ("Z11", "y1^3*y2 + y2^5"),
        ("Z12", "x1^3*x2 + x1*x2^4"),
        ("Z13", "x1^6 + x1*x2^3 + x3^2"),
        ("W12", "x1^4 + x2^5"),
        ("W13", "-y1^2 + y2^4 + y2*y3^4"),
        ("Q10", "y1^4 + y1*y2^2 + y3^3"),
        ("Q11", "y2*y3^3 + y2^3 + y1^2*y3"),
        ("Q12", "x1^5 + x1*x2^2 + x3^3"),
        ("S11", "x1^2*x3 + x2*x3^2 + x2^4"),
        ("S12", "x1^2*x2 + x2^2*x3 + x1*x3^3"),
        ("U12", "x1^3 + x2^3 + x3^4"),
    ];
    for (n, f) in unimodal {
        add(n.into(), f.into(), &["exceptional", "unimodal"]);
    }
    add("E18".into(), "y1^10 + y2^3 + y3^2".into(), &["exceptional", "bimodal"]);
    add("Q17".into(), "x1^3 + x2*x3^2 + x1*x2^5".into(), &["exceptional", "bimodal"]);
    add("Q17T".into(), "x1^3*x2 + x2^5*x3 + x3^2".into(), &["exceptional", "bimodal", "transpose"]);
    add("W17".into(), "x1^4 + x1*x2^5".into(), &["exceptional", "bimodal"]);

    add("A2xA2".into(), "y1^3 + y2^3".into(), &["fermat", "sum"]);
    add("chain".into(), "x1^10*x2 + x2^3".into(), &["chain"]);
    add("loop".into(), "y1*y2^7 + y1^3*y2".into(), &["loop"]);

    for n in 2..=FAMILY_MAX {
        add(format!("DT{}", n + 1), format!("y1^{n}*y2 + y2^2"), &["chain", "transpose"]);
        add(format!("L{n}"), format!("x1^{n}*x2 + x1*x2^2"), &["loop"]);
        add(format!("C{n}"), format!("x1^2*x2 + x2^{n}*x3 + x3^2"), &["chain"]);
    }
    out
}

/// Every shipped potential. Names are unique.
pub fn catalogue() -> &'static [CatalogueEntry] {
    static CAT: OnceLock<Vec<CatalogueEntry>> = OnceLock::new();
    CAT.get_or_init(build_catalogue)
}

fn index() -> &'static HashMap<String, usize> {
    static IDX: OnceLock<HashMap<String, usize>> = OnceLock::new();
    IDX.get_or_init(|| catalogue().iter().enumerate().map(|(i, e)| (e.name.to_ascii_lowercase(), i)).collect())
}

/// Case-insensitive lookup by name.
pub fn lookup(name: &str) -> Option<&'static CatalogueEntry> {
    index().get(&name.to_ascii_lowercase()).map(|&i| &catalogue()[i])
}

/// A catalogue name or a polynomial, written in variables `prefix1, …`.
pub fn resolve(spec: &str, prefix: &str) -> Result<Potential> {
    match lookup(spec.trim()) {
        Some(e) => e.potential_in(prefix),
        None => {
            let v = Potential::parse(spec).map_err(|e| match e {
                Error::Parse { .. } => Error::Invalid(format!("`{spec}` is neither a catalogue name nor a polynomial")),
                other => other,
            })?;
            let mut vars = v.vars();
            vars.sort_by(|a, b| crate::poly::display_cmp(*a, *b));
            let map: Vec<(Var, Var)> = vars
                .iter()
                .enumerate()
                .map(|(i, &x)| Ok((x, Var::named(&format!("{prefix}{}", i + 1))?)))
                .collect::<Result<_>>()?;
            v.rename(&map)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownEquivalence {
    pub left: String,
    pub right: String,
    pub provenance: String,
}

fn eq(out: &mut Vec<KnownEquivalence>, l: impl Into<String>, r: impl Into<String>, how: impl Into<String>) {
    out.push(KnownEquivalence { left: l.into(), right: r.into(), provenance: how.into() });
}

/// Proven orbifold equivalences between catalogue names.
pub fn known_equivalences() -> Vec<KnownEquivalence> {
    let mut out = Vec::new();
    eq(&mut out, "A11", "E6", "explicit rank-2 defect (fixture a11_e6)");
    eq(&mut out, "A17", "E7", "A-E equivalence");
    eq(&mut out, "A29", "E8", "A-E equivalence, smallest defect has rank 4");
    for (d, e) in [("D7", "E6"), ("D10", "E7"), ("D16", "E8")] {
        eq(&mut out, d, e, "direct D-E defect of rank at most 3 (slot ships empty)");
    }
    // A_{d-1} ~ D_{d/2+1} for even d
    for k in 3..=(SERIES_MAX + 1) / 2 {
        eq(&mut out, format!("A{}", 2 * k - 1), format!("D{}", k + 1), "A-D equivalence");
    }
    eq(&mut out, "E14", "Q10", "tensor composition: E14 = A7 x A2 and Q10 = D5 x A2");
    eq(&mut out, "Q12", "E18", "tensor composition: Q12 = D6 x A2 and E18 = A9 x A2");
    eq(&mut out, "A5", "A2xA2", "explicit rank-2 defect (fixture appendix1_a5_a2a2)");
    eq(&mut out, "E13", "Z11", "explicit rank-3 defect (fixture appendix2_e13_z11)");
    eq(&mut out, "Z13", "Q11", "explicit rank-6 defect (fixture appendix3_z13_q11)");
    eq(&mut out, "S11", "W13", "explicit rank-4 defect (fixture appendix4_s11_w13)");
    eq(&mut out, "chain", "loop", "explicit rank-3 defect (fixture appendix5_chain_loop)");
    for n in 2..=FAMILY_MAX {
        eq(&mut out, format!("A{}", 2 * n - 1), format!("DT{}", n + 1), "transformation of variables");
        eq(&mut out, format!("L{n}"), format!("D{}", 2 * n), "transformation of variables");
        eq(&mut out, format!("C{n}"), format!("D{}", 2 * n + 1), "transformation of variables, up to a square");
    }
    out
}

/// Whether `a` and `b` appear as a pair in the table, in either order.
pub fn is_known(a: &str, b: &str) -> Option<KnownEquivalence> {
    let (a, b) = (a.to_ascii_lowercase(), b.to_ascii_lowercase());
    known_equivalences().into_iter().find(|k| {
        let (l, r) = (k.left.to_ascii_lowercase(), k.right.to_ascii_lowercase());
        (l == a && r == b) || (l == b && r == a)
    })
}

/// Defect fixtures that are referenced but not distributed.
pub const EMPTY_SLOTS: &[(&str, &str, &str)] = &[
    ("D7", "E6", "rank at most 3; matrices published only online, not shipped"),
    ("D10", "E7", "rank at most 3; matrices published only online, not shipped"),
    ("D16", "E8", "rank at most 3; matrices published only online, not shipped"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::infer_weights;
    use crate::poly::{int, p, rat};

    #[test]
    fn examples() {
        let e = lookup("E13").unwrap();
        assert_eq!(e.poly, p("x1^5*x2 + x2^3"));
        assert_eq!(e.central_charge, rat(16, 15));
        let q = lookup("q10").unwrap();
        assert_eq!(q.poly, p("y1^4 + y1*y2^2 + y3^3"));
        assert_eq!(q.central_charge, rat(13, 12));
        assert_eq!(lookup("A5").unwrap().central_charge, rat(2, 3));
        assert!(lookup("X99").is_none());
    }

    #[test]
    fn names_unique_and_charges_recomputed() {
        let mut names: Vec<&str> = catalogue().iter().map(|e| e.name.as_str()).collect();
        names.sort();
        let n = names.len();
        names.dedup();
        assert_eq!(n, names.len());
        for e in catalogue() {
            let ws = infer_weights(&e.poly, &int(2)).unwrap();
            assert_eq!(crate::grading::central_charge(&ws).unwrap(), e.central_charge, "{}", e.name);
        }
        let uni = catalogue().iter().filter(|e| e.families.contains(&"unimodal")).count();
        assert_eq!(uni, 14);
    }

    #[test]
    fn equivalences_have_equal_charge() {
        for k in known_equivalences() {
            let (l, r) = (lookup(&k.left).unwrap(), lookup(&k.right).unwrap());
            assert_eq!(l.central_charge, r.central_charge, "{} {}", k.left, k.right);
        }
        assert!(is_known("A11", "E6").is_some());
        assert!(is_known("Q10", "E14").unwrap().provenance.contains("composition"));
        assert!(is_known("Q12", "E18").is_some());
        assert!(is_known("Q17", "W17").is_none());
        assert_eq!(lookup("Q17").unwrap().central_charge, lookup("W17").unwrap().central_charge);
    }

    #[test]
    fn resolve_renames() {
        let v = resolve("Q10", "x").unwrap();
        assert_eq!(v.poly, p("x1^4 + x1*x2^2 + x3^3"));
        let w = resolve("x1^3 + x2^3", "y").unwrap();
        assert_eq!(w.poly, p("y1^3 + y2^3"));
        assert!(resolve("nonsense!", "y").is_err());
    }
}
