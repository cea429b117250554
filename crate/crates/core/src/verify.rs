//! End-to-end verification of archived defects.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::archive::DefectFile;
use crate::error::Result;
use crate::groebner::{ResourceBudget, Status};
use crate::mf::{constraint_basis, Defect};
use crate::poly::{fmt_rational, Polynomial};
use crate::residue::qdim;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub ideal_ms: u64,
    pub residual_ms: u64,
    pub grading_ms: u64,
    pub qdim_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub rank: usize,
    /// Solvable means the constraint ideal is proper.
    pub ideal: Status,
    pub mf_ok: bool,
    pub graded_ok: bool,
    pub grading: Option<Vec<String>>,
    pub ql: Option<Polynomial>,
    pub qr: Option<Polynomial>,
    pub product: Option<Polynomial>,
    pub ql_match: Option<bool>,
    pub qr_match: Option<bool>,
    pub error: Option<String>,
    pub timings: Timings,
}

impl VerificationReport {
    pub fn expected_match(&self) -> Option<bool> {
        match (self.ql_match, self.qr_match) {
            (Some(a), Some(b)) => Some(a && b),
            _ => None,
        }
    }

    pub fn ok(&self) -> bool {
        self.mf_ok && self.graded_ok && self.ideal == Status::Solvable && self.expected_match() != Some(false) && self.error.is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Residual, gradedness, quantum dimensions and properness of the
/// constraint ideal, with every comparison done modulo that ideal.
pub fn verify_defect(d: &Defect, expected: Option<(&Polynomial, &Polynomial)>, budget: &ResourceBudget) -> VerificationReport {
    let mut r = VerificationReport {
        name: d.name.clone().unwrap_or_default(),
        rank: d.rank(),
        ideal: Status::Unknown,
        mf_ok: false,
        graded_ok: false,
        grading: None,
        ql: None,
        qr: None,
        product: None,
        ql_match: None,
        qr_match: None,
        error: None,
        timings: Timings::default(),
    };
    let t = Instant::now();
    let gb = match constraint_basis(&d.mf.constraints, budget) {
        Ok(gb) => gb,
        Err(e) => {
            r.error = Some(format!("constraint ideal: {e}"));
            return r;
        }
    };
    r.ideal = match &gb {
        Some(gb) if gb.is_unit() => Status::Unsolvable,
        _ => Status::Solvable,
    };
    r.timings.ideal_ms = ms(t);

    let t = Instant::now();
    r.mf_ok = d.mf.residual_mod(gb.as_ref()).is_zero();
    r.timings.residual_ms = ms(t);

    let t = Instant::now();
    match d.mf.check_graded() {
        Ok(g) => {
            r.graded_ok = true;
            r.grading = Some(g.charges.iter().map(fmt_rational).collect());
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r.timings.grading_ms = ms(t);
    if !r.graded_ok {
        return r;
    }

    let t = Instant::now();
    match qdim(d) {
        Ok(q) => {
            let nf = |p: &Polynomial| match &gb {
                Some(gb) => gb.normal_form(p),
                None => p.clone(),
            };
            if let Some((el, er)) = expected {
                r.ql_match = Some(nf(&(&q.ql - el)).is_zero());
                r.qr_match = Some(nf(&(&q.qr - er)).is_zero());
            }
            r.product = Some(nf(&q.product()));
            r.ql = Some(q.ql);
            r.qr = Some(q.qr);
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r.timings.qdim_ms = ms(t);
    r
}

pub fn verify_file(f: &DefectFile, budget: &ResourceBudget) -> Result<VerificationReport> {
    let d = f.to_defect()?;
    let expected = f.expected()?;
    Ok(verify_defect(&d, expected.as_ref().map(|(l, r)| (l, r)), budget))
}
