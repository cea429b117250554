//! JSON archive format for defects.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::Potential;
use crate::mf::Defect;
use crate::poly::{PolyMatrix, Polynomial, Var};

/// On-disk form of a defect. Polynomials are kept as written so that files
/// round-trip byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectFile {
    pub name: String,
    #[serde(rename = "V1")]
    pub v1: String,
    #[serde(rename = "V2")]
    pub v2: String,
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(rename = "E")]
    pub e: Vec<String>,
    #[serde(rename = "J", default)]
    pub j: Vec<String>,
    /// `"-adjugate(E)"` when J is not listed.
    #[serde(rename = "J_from", default, skip_serializing_if = "Option::is_none")]
    pub j_from: Option<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(rename = "expected_qL", default, skip_serializing_if = "Option::is_none")]
    pub expected_ql: Option<String>,
    #[serde(rename = "expected_qR", default, skip_serializing_if = "Option::is_none")]
    pub expected_qr: Option<String>,
}

impl DefectFile {
    pub fn from_json(s: &str) -> Result<DefectFile> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DefectFile> {
        DefectFile::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json())?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    fn parse(&self, s: &str) -> Result<Polynomial> {
        let params: Vec<&str> = self.params.iter().map(String::as_str).collect();
        Polynomial::parse_with_params(s, &params)
    }

    fn vars(&self, names: &[String]) -> Result<Vec<Var>> {
        names.iter().map(|n| Var::named(n)).collect()
    }

    fn matrix(&self, entries: &[String]) -> Result<PolyMatrix> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n * n != entries.len() || n == 0 {
            return Err(Error::Shape(format!("{} entries do not form a square matrix", entries.len())));
        }
        let data = entries.iter().map(|s| self.parse(s)).collect::<Result<Vec<_>>>()?;
        PolyMatrix::from_vec(n, n, data)
    }

    pub fn to_defect(&self) -> Result<Defect> {
        // parameters must be registered before the potentials are parsed
        let constraints = self.constraints.iter().map(|s| self.parse(s)).collect::<Result<Vec<_>>>()?;
        let v1 = Potential::new(self.parse(&self.v1)?)?;
        let v2 = Potential::new(self.parse(&self.v2)?)?;
        let e = self.matrix(&self.e)?;
        let j = match (&self.j_from, self.j.is_empty()) {
            (None, false) => self.matrix(&self.j)?,
            (Some(rule), true) if rule == "-adjugate(E)" => -&e.adjugate()?,
            (Some(rule), _) => return Err(Error::Invalid(format!("unknown J rule {rule:?}"))),
            (None, true) => return Err(Error::Invalid("J missing".into())),
        };
        let d = Defect::new(v1, v2, self.vars(&self.x_vars)?, self.vars(&self.y_vars)?, e, j, constraints)?;
        Ok(d.named(&self.name))
    }

    pub fn expected(&self) -> Result<Option<(Polynomial, Polynomial)>> {
        match (&self.expected_ql, &self.expected_qr) {
            (Some(l), Some(r)) => Ok(Some((self.parse(l)?, self.parse(r)?))),
            _ => Ok(None),
        }
    }

    pub fn from_defect(d: &Defect, expected: Option<(&Polynomial, &Polynomial)>) -> DefectFile {
        let names = |vs: &[Var]| vs.iter().map(|v| v.name().to_string()).collect::<Vec<_>>();
        let mut params: Vec<Var> = d.mf.e.entries().iter().chain(d.mf.j.entries()).chain(&d.mf.constraints).flat_map(|p| p.param_vars()).collect();
        params.sort();
        params.dedup();
        let strings = |m: &PolyMatrix| m.entries().iter().map(|p| p.to_string()).collect();
        DefectFile {
            name: d.name.clone().unwrap_or_default(),
            v1: d.v1.poly.to_string(),
            v2: d.v2.poly.to_string(),
            x_vars: names(&d.x_vars),
            y_vars: names(&d.y_vars),
            params: names(&params),
            e: strings(&d.mf.e),
            j: strings(&d.mf.j),
            j_from: None,
            constraints: d.mf.constraints.iter().map(|p| p.to_string()).collect(),
            expected_ql: expected.map(|(l, _)| l.to_string()),
            expected_qr: expected.map(|(_, r)| r.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Potential;
    use crate::mf::{fresh_vars, identity_defect};

    #[test]
    fn defect_round_trip() {
        let xs = fresh_vars("x", 2);
        let ys = fresh_vars("y", 2);
        let d = identity_defect(&Potential::parse("x1^3 + x2^4").unwrap(), &xs, &ys).unwrap().named("id E6");
        let f = DefectFile::from_defect(&d, Some((&Polynomial::one(), &Polynomial::one())));
        let json = f.to_json();
        let back = DefectFile::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        let d2 = back.to_defect().unwrap();
        assert_eq!(d2.mf.e, d.mf.e);
        assert_eq!(d2.mf.j, d.mf.j);
        assert_eq!(d2.x_vars, d.x_vars);
    }

    #[test]
    fn rejects_bad_shapes() {
        let f = DefectFile {
            name: "bad".into(),
            v1: "x1^2".into(),
            v2: "y1^2".into(),
            x_vars: vec!["x1".into()],
            y_vars: vec!["y1".into()],
            params: vec![],
            e: vec!["x1".into(), "y1".into()],
            j: vec!["x1".into()],
            j_from: None,
            constraints: vec![],
            expected_ql: None,
            expected_qr: None,
        };
        assert!(matches!(f.to_defect(), Err(Error::Shape(_))));
    }
}
