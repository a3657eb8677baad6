//! Structured pass/fail records shared by the theorem suite, frame checks and
//! the stability module.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::hilbert_module::ModuleVector;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// One named inequality or identity. `residual` is the measured violation
/// (or defect) and the check passes when it does not exceed `limit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub limit: f64,
}

impl CheckResult {
    pub fn new(name: &str, residual: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: residual <= limit,
            residual,
            limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conclusion {
    pub passed: bool,
    pub residual: f64,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem_id: String,
    pub status: Status,
    pub hypotheses: Vec<CheckResult>,
    /// `None` when some hypothesis failed.
    pub conclusion: Option<Conclusion>,
    pub tolerance: f64,
    pub seed: u64,
    /// Derived quantities (bounds, norms, counts) worth reading alongside
    /// the residuals.
    pub info: BTreeMap<String, f64>,
    pub witness: Option<ModuleVector>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Accumulates hypotheses and conclusion checks for one report.
#[derive(Clone, Debug)]
pub struct ReportBuilder {
    id: String,
    seed: u64,
    tol: f64,
    hypotheses: Vec<CheckResult>,
    checks: Vec<CheckResult>,
    info: BTreeMap<String, f64>,
    witness: Option<ModuleVector>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(id: &str, seed: u64, tol: f64) -> Self {
        Self {
            id: id.to_string(),
            seed,
            tol,
            hypotheses: Vec::new(),
            checks: Vec::new(),
            info: BTreeMap::new(),
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `tol · max(1, scale)`.
    pub fn lim(&self, scale: f64) -> f64 {
        self.tol * scale.max(1.0)
    }

    pub fn hyp(&mut self, name: &str, residual: f64, limit: f64) -> bool {
        let c = CheckResult::new(name, residual, limit);
        let ok = c.passed;
        self.hypotheses.push(c);
        ok
    }

    pub fn hyp_flag(&mut self, name: &str, ok: bool) -> bool {
        self.hyp(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    /// A hypothesis whose evaluation may itself fail; errors count as failure.
    pub fn hyp_result(&mut self, name: &str, r: Result<f64>, limit: f64) -> bool {
        self.hyp(name, r.unwrap_or(f64::INFINITY), limit)
    }

    pub fn hypotheses_ok(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed)
    }

    pub fn check(&mut self, name: &str, residual: f64, limit: f64) -> bool {
        let c = CheckResult::new(name, residual, limit);
        let ok = c.passed;
        self.checks.push(c);
        ok
    }

    pub fn check_result(&mut self, name: &str, r: Result<f64>, limit: f64) -> bool {
        self.check(name, r.unwrap_or(f64::INFINITY), limit)
    }

    pub fn check_flag(&mut self, name: &str, ok: bool) -> bool {
        self.check(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn info(&mut self, key: &str, value: f64) {
        self.info.insert(key.to_string(), value);
    }

    pub fn witness(&mut self, w: ModuleVector) {
        if self.witness.is_none() {
            self.witness = Some(w);
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Copy another report's checks under a name prefix. A report without a
    /// conclusion contributes one failing check.
    pub fn absorb(&mut self, prefix: &str, other: &TheoremReport) {
        match &other.conclusion {
            Some(c) => {
                for chk in &c.checks {
                    self.check(&format!("{prefix}: {}", chk.name), chk.residual, chk.limit);
                }
            }
            None => {
                self.check(&format!("{prefix}: hypotheses"), f64::INFINITY, 0.0);
            }
        }
        if let Some(w) = &other.witness {
            self.witness(w.clone());
        }
    }

    pub fn finish(self) -> TheoremReport {
        let hyp_ok = self.hypotheses_ok();
        let conclusion = hyp_ok.then(|| Conclusion {
            passed: self.checks.iter().all(|c| c.passed),
            residual: self.checks.iter().fold(0.0_f64, |m, c| m.max(c.residual)),
            checks: self.checks,
        });
        let status = match &conclusion {
            None => Status::NotApplicable,
            Some(c) if c.passed => Status::Pass,
            Some(_) => Status::Fail,
        };
        TheoremReport {
            theorem_id: self.id,
            status,
            hypotheses: self.hypotheses,
            conclusion,
            tolerance: self.tol,
            seed: self.seed,
            info: self.info,
            witness: self.witness,
            notes: self.notes,
        }
    }
}
