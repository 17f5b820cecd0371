use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{divisors, gcd};
use crate::characters::CharacterGroup;
use crate::expsums::{
    closed_form_twisted, coprime_linear_sum, coprime_linear_sum_rhs, gcd_partition_check,
    gcd_weighted_distance_bound, gcd_weighted_distance_sum, incomplete_inverse_prefix,
    incomplete_inverse_sum_bound, inverse_weighted_sum, inverse_weighted_sum_bound,
    reciprocal_distance_bounds, reciprocal_distance_sum, twisted_linear_sum, Sign,
};
use crate::{Error, Result};

use super::{SweepReport, Value, VerificationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    /// `|sum a e_n(k m a^-1)| <= 2 n^{3/2} tau(n) (n,k)^{1/2} log(en)`.
    Kloos,
    /// `sum_{b<q} b e_q(-kb) = -q/(1 - e_q(-k))`.
    Alk11,
    /// Divisor-sum evaluation of `sum over reduced b of b e_n(-kb)`.
    SumTech,
    /// Partition of `1..=n` by `gcd(n, k)`.
    Partition,
    /// Reciprocal-distance sum `<= (q/2) log(e q / (2 (l, q)))`.
    Recip,
    /// gcd-weighted distance sum `<= (1/2) n^{1/2} sigma_{1/2}(n) log(en)`.
    GcdDist,
    /// `|T(chi)| <= 2n max_A |sum_{a<=A} chi(a)| <= 2 sqrt 3 n^{3/2} log n`.
    AbelPv,
    /// Incomplete sums `<= n^{1/2} tau(n) (n, mk)^{1/2} log(en)`.
    Incomplete,
}

impl LemmaId {
    pub const ALL: [LemmaId; 8] = [
        LemmaId::Kloos,
        LemmaId::Alk11,
        LemmaId::SumTech,
        LemmaId::Partition,
        LemmaId::Recip,
        LemmaId::GcdDist,
        LemmaId::AbelPv,
        LemmaId::Incomplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Kloos => "kloos",
            LemmaId::Alk11 => "alk11",
            LemmaId::SumTech => "sum_tech",
            LemmaId::Partition => "partition",
            LemmaId::Recip => "recip",
            LemmaId::GcdDist => "gcd_dist",
            LemmaId::AbelPv => "abel_pv",
            LemmaId::Incomplete => "incomplete",
        }
    }

    /// Smallest modulus the lemma's hypotheses allow.
    pub fn min_modulus(self) -> u64 {
        match self {
            LemmaId::Kloos | LemmaId::Partition | LemmaId::AbelPv | LemmaId::Incomplete => 1,
            LemmaId::Alk11 | LemmaId::SumTech | LemmaId::Recip | LemmaId::GcdDist => 2,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown lemma `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaParams {
    /// Largest modulus (`n` or `q`) in the sweep.
    pub max: u64,
    pub seed: u64,
    /// Random functions per modulus for the partition check.
    pub samples: usize,
    pub threads: usize,
}

impl Default for LemmaParams {
    fn default() -> Self {
        LemmaParams {
            max: 100,
            seed: 42,
            samples: 1000,
            threads: 1,
        }
    }
}

/// `1` followed by the next three reduced residues mod `n` (fewer if `n` is small).
pub fn multipliers(n: u64) -> Vec<u64> {
    (1..=n.max(1)).filter(|&m| gcd(m, n) == 1).take(4).collect()
}

fn check_modulus(id: LemmaId, n: u64) -> Result<()> {
    if n < id.min_modulus() {
        return Err(Error::Hypothesis(format!(
            "lemma {id} needs modulus >= {} (got {n})",
            id.min_modulus()
        )));
    }
    Ok(())
}

/// Per-modulus RNG derived from the sweep seed, independent of scheduling.
fn rng_for(seed: u64, n: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// All records of one lemma at one modulus.
pub fn lemma_records(
    id: LemmaId,
    n: u64,
    seed: u64,
    samples: usize,
) -> Result<Vec<VerificationRecord>> {
    check_modulus(id, n)?;
    let cid = format!("lemma_{}", id.name());
    let ni = n as i64;
    let mut out = Vec::new();
    match id {
        LemmaId::Kloos => {
            for m in multipliers(n) {
                for k in 1..=n {
                    let lhs = inverse_weighted_sum(n, m, k)?;
                    out.push(VerificationRecord::bound(
                        &cid,
                        &[("n", ni), ("m", m as i64), ("k", k as i64)],
                        Value::Real(lhs.norm()),
                        Value::Real(inverse_weighted_sum_bound(n, k)),
                    ));
                }
            }
        }
        LemmaId::Incomplete => {
            for m in multipliers(n) {
                for k in 1..=n {
                    let prefix = incomplete_inverse_prefix(n, m, k)?;
                    let worst = prefix[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
                    out.push(
                        VerificationRecord::bound(
                            &cid,
                            &[("n", ni), ("m", m as i64), ("k", k as i64)],
                            Value::Real(worst),
                            Value::Real(incomplete_inverse_sum_bound(n, m, k)),
                        )
                        .with_note("lhs is the maximum over t <= n"),
                    );
                }
            }
        }
        LemmaId::Alk11 => {
            for k in (1..=3 * n).filter(|k| k % n != 0) {
                out.push(VerificationRecord::identity(
                    &cid,
                    &[("q", ni), ("k", k as i64)],
                    Value::Complex(twisted_linear_sum(n, k)),
                    Value::Complex(closed_form_twisted(n, k)?),
                    1e-9 * n as f64,
                ));
            }
        }
        LemmaId::SumTech => {
            for k in 1..=2 * n {
                out.push(VerificationRecord::identity(
                    &cid,
                    &[("n", ni), ("k", k as i64)],
                    Value::Complex(coprime_linear_sum(n, k)),
                    Value::Complex(coprime_linear_sum_rhs(n, k)?),
                    1e-9 * (n * n) as f64,
                ));
            }
        }
        LemmaId::Partition => {
            let mut rng = rng_for(seed, n);
            for sample in 0..samples {
                let f: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let scale: f64 = f.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
                let (lhs, rhs) = gcd_partition_check(n, &f)?;
                out.push(VerificationRecord::identity(
                    &cid,
                    &[("n", ni), ("sample", sample as i64)],
                    Value::Complex(lhs),
                    Value::Complex(rhs),
                    1e-9 * scale,
                ));
            }
        }
        LemmaId::Recip => {
            for l in 1..=2 * n {
                // The sharp form implies the (q/2) log(eq) one since 2 (l, q) >= 2.
                let (sharp, _) = reciprocal_distance_bounds(n, l);
                for (sign, s) in [(Sign::Plus, 1), (Sign::Minus, -1)] {
                    out.push(VerificationRecord::bound(
                        &cid,
                        &[("q", ni), ("l", l as i64), ("sign", s)],
                        Value::Real(reciprocal_distance_sum(n, l, sign)),
                        Value::Real(sharp),
                    ));
                }
            }
        }
        LemmaId::GcdDist => {
            let bound = gcd_weighted_distance_bound(n);
            for d in divisors(n) {
                out.push(VerificationRecord::bound(
                    &cid,
                    &[("n", ni), ("d", d as i64)],
                    Value::Real(gcd_weighted_distance_sum(n, d)?),
                    Value::Real(bound),
                ));
            }
        }
        LemmaId::AbelPv => {
            let group = CharacterGroup::new(n);
            let nf = n as f64;
            let bound = 2.0 * 3f64.sqrt() * nf.powf(1.5) * nf.ln();
            for (i, chi) in group.characters().enumerate().filter(|(_, c)| !c.principal) {
                let t = group.weighted_sum(&chi).norm();
                let max_partial = group
                    .partial_sums(&chi)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let p = [("n", ni), ("chi", i as i64)];
                out.push(VerificationRecord::bound(
                    &format!("{cid}.abel"),
                    &p,
                    Value::Real(t),
                    Value::Real(2.0 * nf * max_partial),
                ));
                out.push(VerificationRecord::bound(
                    &format!("{cid}.pv"),
                    &p,
                    Value::Real(2.0 * nf * max_partial),
                    Value::Real(bound),
                ));
                out.push(VerificationRecord::bound(
                    &cid,
                    &p,
                    Value::Real(t),
                    Value::Real(bound),
                ));
            }
        }
    }
    Ok(out)
}

/// Runs one lemma over every modulus from its minimum up to `params.max`.
pub fn check_lemma(id: LemmaId, params: &LemmaParams) -> Result<SweepReport> {
    if params.max < id.min_modulus() {
        return Err(Error::Hypothesis(format!(
            "lemma {id} needs modulus >= {} (got max = {})",
            id.min_modulus(),
            params.max
        )));
    }
    let spec = super::SweepSpec {
        check: super::CheckId::Lemma(id),
        n_min: id.min_modulus(),
        n_max: params.max,
        ks: vec![2],
        odd_only: false,
        threads: params.threads,
        seed: params.seed,
        samples: params.samples,
    };
    Ok(super::sweep(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alk11_small_sweep() {
        let rep = check_lemma(
            LemmaId::Alk11,
            &LemmaParams {
                max: 20,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rep.passed());
        assert_eq!(
            rep.records.len(),
            (2..=20u64).map(|q| 3 * q - 3).sum::<u64>() as usize
        );
    }

    #[test]
    fn abel_pv_at_three() {
        let recs = lemma_records(LemmaId::AbelPv, 3, 42, 0).unwrap();
        let last = recs.iter().find(|r| r.check_id == "lemma_abel_pv").unwrap();
        assert!((last.lhs.magnitude() - 1.0).abs() < 1e-12);
        assert!((last.rhs.magnitude() - 19.7744).abs() < 1e-3);
        assert!(recs.iter().all(|r| r.pass));
    }

    #[test]
    fn partition_is_reproducible() {
        let a = lemma_records(LemmaId::Partition, 30, 42, 5).unwrap();
        let b = lemma_records(LemmaId::Partition, 30, 42, 5).unwrap();
        let c = lemma_records(LemmaId::Partition, 30, 43, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|r| r.pass));
    }

    #[test]
    fn hypotheses_are_named() {
        let err = lemma_records(LemmaId::SumTech, 1, 42, 1).unwrap_err();
        assert!(err.to_string().contains("sum_tech"));
        assert!("nope".parse::<LemmaId>().is_err());
        for id in LemmaId::ALL {
            assert_eq!(id.name().parse::<LemmaId>().unwrap(), id);
        }
    }

    #[test]
    fn multiplier_sets() {
        assert_eq!(multipliers(1), vec![1]);
        assert_eq!(multipliers(2), vec![1]);
        assert_eq!(multipliers(10), vec![1, 3, 7, 9]);
        assert_eq!(multipliers(5), vec![1, 2, 3, 4]);
    }
}
