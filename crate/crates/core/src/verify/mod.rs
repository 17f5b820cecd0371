//! Checkers that compare both sides of every identity and explicit bound,
//! and report ratios where only an asymptotic statement is available.

mod lemmas;
mod sweep;
mod theorems;

use std::fmt;

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::arith::{rational_to_f64, ExactRational};

pub use lemmas::{check_lemma, lemma_records, multipliers, LemmaId, LemmaParams};
pub use sweep::{sweep, CheckId, SweepSpec};
pub use theorems::{
    check_mean_square, check_theorem_k2, check_theorem_ksup3, even_vanishing_record, r22_records,
    ratio_theorem_ksup4, row_sum_record, sharpness_ratio, sharpness_record, theorem_k2_bound,
    theorem_ksup3_bound, xu_moment_report,
};

/// Relative slack applied to every floating-point right-hand side of a bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// One side of a check.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(ExactRational),
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn magnitude(&self) -> f64 {
        match self {
            Value::Exact(r) => rational_to_f64(r).abs(),
            Value::Real(x) => x.abs(),
            Value::Complex(z) => z.norm(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Real(x) => *x == 0.0,
            Value::Complex(z) => z.norm() == 0.0,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Real(x) => f.write_str(&format_real(*x)),
            Value::Complex(z) => {
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{}{}{}i",
                    format_real(z.re),
                    sign,
                    format_real(z.im.abs())
                )
            }
        }
    }
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// `lhs <= rhs`, with [`BOUND_SLACK`] on floating right-hand sides.
    Bound,
    /// `|lhs - rhs| <= tolerance`.
    Identity,
    /// Ratio only; nothing asserted.
    Ratio,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Bound => "bound",
            CheckKind::Identity => "identity",
            CheckKind::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub check_id: String,
    /// Named integer parameters in a fixed order, e.g. `n`, `k`, `m`.
    pub params: Vec<(String, i64)>,
    pub kind: CheckKind,
    pub lhs: Value,
    pub rhs: Value,
    /// `lhs / rhs` in magnitude; 0 when both sides vanish.
    pub ratio: f64,
    /// `|lhs - rhs|` for identities.
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: String,
}

fn magnitude_ratio(lhs: &Value, rhs: &Value) -> f64 {
    if lhs.is_zero() && rhs.is_zero() {
        0.0
    } else {
        lhs.magnitude() / rhs.magnitude()
    }
}

fn params(list: &[(&str, i64)]) -> Vec<(String, i64)> {
    list.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

impl VerificationRecord {
    /// Inequality `lhs <= rhs`. Exact pairs compare exactly; anything
    /// involving a float gets [`BOUND_SLACK`] on the right.
    pub fn bound(check_id: &str, p: &[(&str, i64)], lhs: Value, rhs: Value) -> Self {
        let pass = match (&lhs, &rhs) {
            (Value::Exact(a), Value::Exact(b)) => a <= b,
            _ => {
                let l = match &lhs {
                    Value::Exact(r) => rational_to_f64(r),
                    other => other.magnitude(),
                };
                let r = match &rhs {
                    Value::Exact(r) => rational_to_f64(r),
                    Value::Real(x) => *x,
                    Value::Complex(z) => z.norm(),
                };
                l <= r * (1.0 + BOUND_SLACK)
            }
        };
        VerificationRecord {
            check_id: check_id.to_string(),
            params: params(p),
            kind: CheckKind::Bound,
            ratio: magnitude_ratio(&lhs, &rhs),
            lhs,
            rhs,
            deviation: None,
            tolerance: None,
            pass,
            note: String::new(),
        }
    }

    /// Identity `lhs = rhs` up to an absolute `tolerance`; exact pairs must
    /// match exactly.
    pub fn identity(
        check_id: &str,
        p: &[(&str, i64)],
        lhs: Value,
        rhs: Value,
        tolerance: f64,
    ) -> Self {
        let deviation = match (&lhs, &rhs) {
            (Value::Exact(a), Value::Exact(b)) => rational_to_f64(&(a - b).abs()),
            _ => (to_complex(&lhs) - to_complex(&rhs)).norm(),
        };
        let pass = match (&lhs, &rhs) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => deviation <= tolerance,
        };
        VerificationRecord {
            check_id: check_id.to_string(),
            params: params(p),
            kind: CheckKind::Identity,
            ratio: magnitude_ratio(&lhs, &rhs),
            lhs,
            rhs,
            deviation: Some(deviation),
            tolerance: Some(tolerance),
            pass,
            note: String::new(),
        }
    }

    /// Ratio report: `pass` is always true and the note says so.
    pub fn ratio_report(check_id: &str, p: &[(&str, i64)], lhs: Value, rhs: Value) -> Self {
        VerificationRecord {
            check_id: check_id.to_string(),
            params: params(p),
            kind: CheckKind::Ratio,
            ratio: magnitude_ratio(&lhs, &rhs),
            lhs,
            rhs,
            deviation: None,
            tolerance: None,
            pass: true,
            note: "ratio report".to_string(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {}", self.note, note);
        }
        self
    }

    pub fn param(&self, name: &str) -> Option<i64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

fn to_complex(v: &Value) -> Complex64 {
    match v {
        Value::Exact(r) => Complex64::new(rational_to_f64(r), 0.0),
        Value::Real(x) => Complex64::new(*x, 0.0),
        Value::Complex(z) => *z,
    }
}

/// A unit of work that could not run, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub params: Vec<(String, i64)>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub check_id: String,
    pub ranges: Vec<(String, String)>,
    pub records: Vec<VerificationRecord>,
    pub skipped: Vec<Skipped>,
    pub worst_ratio: f64,
    pub failures: usize,
}

impl SweepReport {
    pub fn new(
        check_id: impl Into<String>,
        ranges: Vec<(String, String)>,
        records: Vec<VerificationRecord>,
        skipped: Vec<Skipped>,
    ) -> SweepReport {
        let worst_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let failures = records.iter().filter(|r| !r.pass).count();
        SweepReport {
            check_id: check_id.into(),
            ranges,
            records,
            skipped,
            worst_ratio,
            failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn failing(&self) -> impl Iterator<Item = &VerificationRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}
