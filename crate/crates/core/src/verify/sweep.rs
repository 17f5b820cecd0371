use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::lemmas::{lemma_records, LemmaId};
use super::theorems::{
    check_mean_square, check_theorem_k2, check_theorem_ksup3, even_vanishing_record, r22_records,
    ratio_theorem_ksup4, row_sum_record, sharpness_record, xu_moment_report,
};
use super::{Skipped, SweepReport, VerificationRecord};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckId {
    TheoremK2,
    TheoremKsup3,
    RatioKsup4,
    MeanSquare,
    XuMoment,
    RowSum,
    EvenVanishing,
    R22,
    Sharpness,
    Lemma(LemmaId),
}

impl CheckId {
    pub const FIXED: [CheckId; 9] = [
        CheckId::TheoremK2,
        CheckId::TheoremKsup3,
        CheckId::RatioKsup4,
        CheckId::MeanSquare,
        CheckId::XuMoment,
        CheckId::RowSum,
        CheckId::EvenVanishing,
        CheckId::R22,
        CheckId::Sharpness,
    ];

    pub fn name(self) -> String {
        match self {
            CheckId::TheoremK2 => "theorem_k2".into(),
            CheckId::TheoremKsup3 => "theorem_ksup3".into(),
            CheckId::RatioKsup4 => "ratio_ksup4".into(),
            CheckId::MeanSquare => "mean_square".into(),
            CheckId::XuMoment => "xu_moment".into(),
            CheckId::RowSum => "row_sum".into(),
            CheckId::EvenVanishing => "even_vanishing".into(),
            CheckId::R22 => "r22".into(),
            CheckId::Sharpness => "sharpness".into(),
            CheckId::Lemma(id) => format!("lemma_{}", id.name()),
        }
    }

    /// Whether the check runs once per value of `k` (for `xu_moment`, `k` is `l`).
    pub fn uses_k(self) -> bool {
        matches!(
            self,
            CheckId::TheoremKsup3 | CheckId::RatioKsup4 | CheckId::RowSum | CheckId::XuMoment
        )
    }

    /// All every-`m` or every-parameter records for one `(n, k)` unit.
    pub fn run_unit(
        self,
        n: u64,
        k: u32,
        seed: u64,
        samples: usize,
    ) -> Result<Vec<VerificationRecord>> {
        match self {
            CheckId::TheoremK2 => Ok(check_theorem_k2(n)?.records),
            CheckId::TheoremKsup3 => Ok(check_theorem_ksup3(n, k)?.records),
            CheckId::RatioKsup4 => Ok(vec![ratio_theorem_ksup4(n, k)?]),
            CheckId::MeanSquare => Ok(vec![check_mean_square(n)?]),
            CheckId::XuMoment => Ok(vec![xu_moment_report(n, k)?]),
            CheckId::RowSum => Ok(vec![row_sum_record(n, k)?]),
            CheckId::EvenVanishing => Ok(vec![even_vanishing_record(n)?]),
            CheckId::R22 => r22_records(n),
            CheckId::Sharpness => Ok(vec![sharpness_record(n)?]),
            CheckId::Lemma(id) => lemma_records(id, n, seed, samples),
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for CheckId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(c) = CheckId::FIXED.into_iter().find(|c| c.name() == s) {
            return Ok(c);
        }
        let lemma = s.strip_prefix("lemma_").unwrap_or(s);
        lemma
            .parse::<LemmaId>()
            .map(CheckId::Lemma)
            .map_err(|_| format!("unknown check `{s}`"))
    }
}

/// What to sweep and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub check: CheckId,
    pub n_min: u64,
    pub n_max: u64,
    /// Values of `k` (ignored by checks that do not depend on `k`).
    pub ks: Vec<u32>,
    pub odd_only: bool,
    /// Worker threads; has no effect on the report.
    pub threads: usize,
    pub seed: u64,
    pub samples: usize,
}

impl SweepSpec {
    pub fn new(check: CheckId, n_min: u64, n_max: u64) -> SweepSpec {
        SweepSpec {
            check,
            n_min,
            n_max,
            ks: vec![2],
            odd_only: false,
            threads: 1,
            seed: 42,
            samples: 1000,
        }
    }

    fn units(&self) -> Vec<(u64, u32)> {
        let ks: Vec<u32> = if self.check.uses_k() {
            self.ks.clone()
        } else {
            vec![self.ks.first().copied().unwrap_or(2)]
        };
        (self.n_min..=self.n_max)
            .filter(|n| !self.odd_only || n % 2 == 1)
            .flat_map(|n| ks.iter().map(move |&k| (n, k)))
            .collect()
    }
}

/// Runs every `(n, k)` unit of `spec`, in parallel, and merges in `(n, k)`
/// order. Units whose hypotheses or guards fail are listed as skipped.
pub fn sweep(spec: &SweepSpec) -> SweepReport {
    let units = spec.units();
    let run = |&(n, k): &(u64, u32)| spec.check.run_unit(n, k, spec.seed, spec.samples);
    let results: Vec<Result<Vec<VerificationRecord>>> = match rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| units.par_iter().map(run).collect()),
        Err(_) => units.iter().map(run).collect(),
    };

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (&(n, k), result) in units.iter().zip(results) {
        match result {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => {
                let mut params = vec![("n".to_string(), n as i64)];
                if spec.check.uses_k() {
                    params.push(("k".to_string(), k as i64));
                }
                skipped.push(Skipped {
                    params,
                    reason: e.to_string(),
                });
            }
        }
    }

    let ks = spec
        .ks
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut ranges = vec![("n".to_string(), format!("{}..{}", spec.n_min, spec.n_max))];
    if spec.check.uses_k() {
        ranges.push(("k".to_string(), ks));
    }
    if spec.odd_only {
        ranges.push(("odd_only".to_string(), "true".to_string()));
    }
    if matches!(spec.check, CheckId::Lemma(LemmaId::Partition)) {
        ranges.push(("seed".to_string(), spec.seed.to_string()));
        ranges.push(("samples".to_string(), spec.samples.to_string()));
    }
    SweepReport::new(spec.check.name(), ranges, records, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for c in CheckId::FIXED {
            assert_eq!(c.name().parse::<CheckId>().unwrap(), c);
        }
        for id in LemmaId::ALL {
            let c = CheckId::Lemma(id);
            assert_eq!(c.name().parse::<CheckId>().unwrap(), c);
            assert_eq!(id.name().parse::<CheckId>().unwrap(), c);
        }
        assert!("bogus".parse::<CheckId>().is_err());
    }

    #[test]
    fn theorem_k2_sweep_is_thread_independent() {
        let mut spec = SweepSpec::new(CheckId::TheoremK2, 2, 50);
        let one = sweep(&spec);
        assert_eq!(one.failures, 0);
        spec.threads = 8;
        assert_eq!(sweep(&spec), one);
    }

    #[test]
    fn hypothesis_failures_are_skipped() {
        let spec = SweepSpec::new(CheckId::MeanSquare, 3, 12);
        let rep = sweep(&spec);
        assert_eq!(rep.records.len(), 5);
        assert_eq!(rep.skipped.len(), 5);
        assert!(rep.skipped[0].reason.contains("odd"));
    }

    #[test]
    fn records_are_ordered_by_n_then_k() {
        let mut spec = SweepSpec::new(CheckId::RowSum, 2, 12);
        spec.ks = vec![2, 3];
        spec.threads = 4;
        let rep = sweep(&spec);
        let keys: Vec<(i64, i64)> = rep
            .records
            .iter()
            .map(|r| (r.param("n").unwrap(), r.param("k").unwrap()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(rep.passed());
    }
}
