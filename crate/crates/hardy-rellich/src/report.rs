//! Residual reports and the JSON report document.

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Outcome of one case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Whether a case checks an equality or a one-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Identity,
    Inequality,
}

/// Named reals kept in insertion order and serialized as a JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Terms(pub Vec<(String, f64)>);

impl Terms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.0.push((name.into(), value));
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.push(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().map(|(_, v)| v).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl Serialize for Terms {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &finite_or_null(*v))?;
        }
        map.end()
    }
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Case parameters; unset fields are omitted from the JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Terms::is_empty")]
    pub extra: Terms,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn ell(mut self, ell: u32) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn f(mut self, label: impl Into<String>) -> Self {
        self.f = Some(label.into());
        self
    }

    pub fn extra(mut self, name: impl Into<String>, value: f64) -> Self {
        self.extra.push(name, value);
        self
    }
}

/// One verified (or skipped) case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub id: String,
    pub kind: CheckKind,
    pub params: Params,
    #[serde(serialize_with = "ser_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f64")]
    pub rhs: f64,
    pub terms: Terms,
    #[serde(serialize_with = "ser_f64")]
    pub abs_residual: f64,
    /// `|lhs - rhs|/(|lhs| + |rhs| + ε)` for identities, the normalized
    /// slack `(lhs - rhs)/(|lhs| + |rhs| + ε)` for inequalities.
    #[serde(serialize_with = "ser_f64")]
    pub rel_residual: f64,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Terms::is_empty")]
    pub diagnostics: Terms,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    finite_or_null(*x).serialize(s)
}

/// `|x - y|/(|x| + |y| + ε)` with `ε` the smallest positive normal.
pub fn relative_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / (x.abs() + y.abs() + f64::MIN_POSITIVE)
}

impl ResidualReport {
    /// Identity `lhs = Σ terms`; passes when the relative residual is within
    /// `tolerance`.
    pub fn identity(id: &str, params: Params, lhs: f64, terms: Terms, tolerance: f64) -> Self {
        let rhs = terms.sum();
        let rel = relative_gap(lhs, rhs);
        let ok = rel <= tolerance;
        Self {
            id: id.to_owned(),
            kind: CheckKind::Identity,
            params,
            lhs,
            rhs,
            terms,
            abs_residual: (lhs - rhs).abs(),
            rel_residual: rel,
            tolerance,
            status: if ok { Status::Pass } else { Status::Fail },
            diagnostics: Terms::new(),
            note: None,
        }
    }

    /// Inequality `lhs ≥ Σ terms`; passes when the normalized slack is at
    /// least `-tolerance`.
    pub fn inequality(id: &str, params: Params, lhs: f64, terms: Terms, tolerance: f64) -> Self {
        let rhs = terms.sum();
        let slack = lhs - rhs;
        let normalized = slack / (lhs.abs() + rhs.abs() + f64::MIN_POSITIVE);
        let ok = normalized >= -tolerance;
        Self {
            id: id.to_owned(),
            kind: CheckKind::Inequality,
            params,
            lhs,
            rhs,
            terms,
            abs_residual: slack,
            rel_residual: normalized,
            tolerance,
            status: if ok { Status::Pass } else { Status::Fail },
            diagnostics: Terms::new(),
            note: None,
        }
    }

    /// A case whose precondition does not hold.
    pub fn skipped(id: &str, kind: CheckKind, params: Params, reason: impl Into<String>) -> Self {
        Self {
            id: id.to_owned(),
            kind,
            params,
            lhs: 0.0,
            rhs: 0.0,
            terms: Terms::new(),
            abs_residual: 0.0,
            rel_residual: 0.0,
            tolerance: 0.0,
            status: Status::Skipped,
            diagnostics: Terms::new(),
            note: Some(reason.into()),
        }
    }

    /// A case that could not be evaluated at all.
    pub fn failed(id: &str, kind: CheckKind, params: Params, reason: impl Into<String>) -> Self {
        Self { status: Status::Fail, ..Self::skipped(id, kind, params, reason) }
    }

    /// Slack of an inequality (`lhs - rhs`).
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_diagnostic(mut self, name: impl Into<String>, value: f64) -> Self {
        self.diagnostics.push(name, value);
        self
    }

    /// Adds a secondary identity check that must also hold; a miss fails
    /// the whole case.
    pub fn require(mut self, name: &str, x: f64, y: f64, tolerance: f64) -> Self {
        let gap = relative_gap(x, y);
        self.diagnostics.push(name, gap);
        if !(gap <= tolerance) && self.status == Status::Pass {
            self.status = Status::Fail;
            self.note = Some(format!("{name} residual {gap:e} exceeds {tolerance:e}"));
        }
        self
    }

    /// Adds `scale` to the denominator of the relative residual of an
    /// identity. Inner-product identities whose sides vanish use the
    /// Cauchy-Schwarz bound here, so exact zeros are not judged on roundoff.
    pub fn with_scale(mut self, scale: f64) -> Self {
        if self.kind == CheckKind::Identity && self.status != Status::Skipped {
            self.rel_residual = (self.lhs - self.rhs).abs() / (self.lhs.abs() + self.rhs.abs() + scale.abs() + f64::MIN_POSITIVE);
            let tol = self.tolerance;
            self = self.with_diagnostic("scale", scale).retolerance(tol);
        }
        self
    }

    /// Adds a secondary inequality `x ≥ y`; records its normalized slack and
    /// fails the case when it drops below `-tolerance`.
    pub fn require_at_least(mut self, name: &str, x: f64, y: f64, tolerance: f64) -> Self {
        let slack = (x - y) / (x.abs() + y.abs() + f64::MIN_POSITIVE);
        self.diagnostics.push(name, slack);
        if !(slack >= -tolerance) && self.status == Status::Pass {
            self.status = Status::Fail;
            self.note = Some(format!("{name} slack {slack:e} below {:e}", -tolerance));
        }
        self
    }

    /// Fails the case on any non-finite number.
    pub fn check_finite(mut self) -> Self {
        let bad = !self.lhs.is_finite()
            || !self.rhs.is_finite()
            || self.terms.iter().any(|(_, v)| !v.is_finite());
        if bad && self.status != Status::Skipped {
            self.status = Status::Fail;
            self.note = Some("non-finite value".to_owned());
        }
        self
    }
}

impl ResidualReport {
    /// Recomputes the status of an identity or inequality against a new
    /// tolerance; skipped cases stay skipped.
    pub fn retolerance(mut self, tol: f64) -> Self {
        if self.status == Status::Skipped || self.note.as_deref() == Some("non-finite value") {
            return self;
        }
        self.tolerance = tol;
        let ok = match self.kind {
            CheckKind::Identity => self.rel_residual <= tol,
            CheckKind::Inequality => self.rel_residual >= -tol,
        };
        let secondary_ok = self.note.is_none();
        self.status = if ok && secondary_ok { Status::Pass } else { Status::Fail };
        self
    }
}

/// Tolerances recorded in the report metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub quadrature: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-9, quadrature: 1e-8, inequality: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub version: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub run: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// The full report written by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub meta: Meta,
    pub cases: Vec<ResidualReport>,
}

impl ReportDocument {
    pub fn new(seed: u64, tolerances: Tolerances, cases: Vec<ResidualReport>) -> Self {
        let meta = Meta { seed, tolerances, version: env!("CARGO_PKG_VERSION").to_owned() };
        Self { meta, cases }
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary { run: self.cases.len(), ..Summary::default() };
        for c in &self.cases {
            match c.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Skipped => s.skipped += 1,
            }
        }
        s
    }

    /// Pretty JSON; contains no timestamps, so equal inputs give equal bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per case with the main numeric columns.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "params", "lhs", "rhs", "abs_residual", "rel_residual", "status"])?;
        for c in &self.cases {
            let params = serde_json::to_string(&c.params).expect("params serialize");
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skipped => "skipped",
            };
            w.write_record([
                c.id.clone(),
                params,
                format!("{:e}", c.lhs),
                format!("{:e}", c.rhs),
                format!("{:e}", c.abs_residual),
                format!("{:e}", c.rel_residual),
                status.to_owned(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
