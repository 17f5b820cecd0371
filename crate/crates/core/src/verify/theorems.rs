use std::f64::consts::E;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::{
    c_constant, euler_phi, factorize, gcd, rational_to_f64, sigma_half, ExactRational,
};
use crate::sk_engine::{
    error_terms, mean_square_error, r22_closed_form, r2_parts, s2_leading_term, s2_table, sk_table,
    CharacterExpansion,
};
use crate::{Error, Result};

use super::{CheckKind, SweepReport, Value, VerificationRecord};

fn require_odd(n: u64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        Err(Error::Hypothesis(format!("needs odd n >= 3 (got n = {n})")))
    } else {
        Ok(())
    }
}

fn range(name: &str, value: impl ToString) -> (String, String) {
    (name.to_string(), value.to_string())
}

/// `n^2 sigma_{1/2}(n) (tau(n) log(e n))^2 + n phi(n)/4`.
pub fn theorem_k2_bound(n: u64) -> f64 {
    let nf = n as f64;
    let tau = factorize(n).tau() as f64;
    let log_term = tau * (E * nf).ln();
    nf * nf * sigma_half(n) * log_term * log_term + nf * euler_phi(n) as f64 / 4.0
}

/// `(2 sqrt 3)^k n^{3k/2} (log n)^k`.
pub fn theorem_ksup3_bound(n: u64, k: u32) -> f64 {
    let nf = n as f64;
    (2.0 * 3f64.sqrt() * nf.powf(1.5) * nf.ln()).powi(k as i32)
}

/// `|S_2(n, m) - n^2 phi(n)/4|` against [`theorem_k2_bound`] for every reduced `m`.
pub fn check_theorem_k2(n: u64) -> Result<SweepReport> {
    let bound = theorem_k2_bound(n);
    let records = error_terms(n, 2)?
        .into_iter()
        .map(|(m, e)| {
            VerificationRecord::bound(
                "theorem_k2",
                &[("n", n as i64), ("k", 2), ("m", m as i64)],
                Value::Exact(e.abs()),
                Value::Real(bound),
            )
        })
        .collect();
    Ok(SweepReport::new(
        "theorem_k2",
        vec![range("n", n)],
        records,
        vec![],
    ))
}

/// `|R_k(n, m)|` against [`theorem_ksup3_bound`] for every reduced `m`.
pub fn check_theorem_ksup3(n: u64, k: u32) -> Result<SweepReport> {
    if k < 3 {
        return Err(Error::Hypothesis(format!("needs k >= 3 (got k = {k})")));
    }
    let bound = theorem_ksup3_bound(n, k);
    let records = error_terms(n, k)?
        .into_iter()
        .map(|(m, e)| {
            VerificationRecord::bound(
                "theorem_ksup3",
                &[("n", n as i64), ("k", k as i64), ("m", m as i64)],
                Value::Exact(e.abs()),
                Value::Real(bound),
            )
        })
        .collect();
    Ok(SweepReport::new(
        "theorem_ksup3",
        vec![range("n", n), range("k", k)],
        records,
        vec![],
    ))
}

fn max_abs_error(n: u64, k: u32) -> Result<ExactRational> {
    Ok(error_terms(n, k)?
        .into_iter()
        .map(|(_, e)| e.abs())
        .max()
        .unwrap_or_else(ExactRational::zero))
}

/// `max_m |R_k(n, m)| / (n^{3(k-2)/2} phi(n)^3 (log n)^{k-4} (log log n)^2)`.
pub fn ratio_theorem_ksup4(n: u64, k: u32) -> Result<VerificationRecord> {
    require_odd(n)?;
    if k < 4 {
        return Err(Error::Hypothesis(format!("needs k >= 4 (got k = {k})")));
    }
    let nf = n as f64;
    let phi = euler_phi(n) as f64;
    let loglog = nf.ln().ln();
    let scale =
        nf.powf(1.5 * (k - 2) as f64) * phi.powi(3) * nf.ln().powi(k as i32 - 4) * loglog * loglog;
    Ok(VerificationRecord::ratio_report(
        "ratio_ksup4",
        &[("n", n as i64), ("k", k as i64)],
        Value::Exact(max_abs_error(n, k)?),
        Value::Real(scale),
    )
    .with_note(
        "scale uses phi(n)^3; the fourth-moment chain carries phi(n)^4 before dividing by phi(n)",
    ))
}

/// Exact mean square against `5 C_n/144 (n phi(n))^3`. Passes when the exact
/// mean square equals the odd-character fourth moment to 1e-6 relative.
pub fn check_mean_square(n: u64) -> Result<VerificationRecord> {
    require_odd(n)?;
    let lhs = mean_square_error(n)?;
    let n_phi = BigInt::from(n) * BigInt::from(euler_phi(n));
    let rhs = c_constant(n)?
        * BigRational::new(BigInt::from(5), BigInt::from(144))
        * BigRational::from_integer(num_traits::pow(n_phi, 3));
    let moment = CharacterExpansion::new(n).odd_fourth_moment();
    let exact = rational_to_f64(&lhs);
    let deviation = if exact == 0.0 {
        moment.abs()
    } else {
        (exact - moment).abs() / exact
    };
    let ratio = rational_to_f64(&(&lhs / &rhs));
    Ok(VerificationRecord {
        check_id: "mean_square".into(),
        params: vec![("n".into(), n as i64)],
        kind: CheckKind::Identity,
        lhs: Value::Exact(lhs),
        rhs: Value::Exact(rhs),
        ratio,
        deviation: Some(deviation),
        tolerance: Some(1e-6),
        pass: deviation <= 1e-6,
        note: format!(
            "odd-character fourth moment = {}; relative deviation = {}",
            super::format_real(moment),
            super::format_real(deviation)
        ),
    })
}

/// `sum over odd chi of conj(chi(2^l)) |T(chi)|^4` against
/// `C_q (3l + 5) q^3 phi(q)^4 / (72 * 2^{l+1})`. Passes when the imaginary
/// part is negligible; the ratio is reported only.
pub fn xu_moment_report(q: u64, l: u32) -> Result<VerificationRecord> {
    require_odd(q)?;
    if l > 4 {
        return Err(Error::Hypothesis(format!(
            "needs 0 <= l <= 4 (got l = {l})"
        )));
    }
    let exp = CharacterExpansion::new(q);
    let group = exp.group();
    let two_l = 1i64 << l;
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (chi, t) in group.characters().zip(exp.weighted_sums()) {
        if !chi.is_odd() {
            continue;
        }
        let fourth = t.norm_sqr() * t.norm_sqr();
        total += group.value(&chi, two_l).conj() * fourth;
        scale += fourth;
    }
    let phi = BigInt::from(euler_phi(q));
    let rhs = c_constant(q)?
        * BigRational::new(
            BigInt::from(3 * l as i64 + 5)
                * num_traits::pow(BigInt::from(q), 3)
                * num_traits::pow(phi, 4),
            BigInt::from(72) << (l as usize + 1),
        );
    let imag_ok = total.im.abs() <= 1e-6 * scale.max(1.0);
    let mut rec = VerificationRecord::ratio_report(
        "xu_moment",
        &[("q", q as i64), ("l", l as i64)],
        Value::Real(total.re),
        Value::Exact(rhs),
    )
    .with_note(format!("imaginary part = {}", super::format_real(total.im)));
    rec.pass = imag_ok;
    Ok(rec)
}

/// Row sum of `S_k(n, .)` against `(n phi(n)/2)^k`, exactly.
pub fn row_sum_record(n: u64, k: u32) -> Result<VerificationRecord> {
    let table = sk_table(n, k)?;
    let total = BigRational::from_integer(BigInt::from(table.total()));
    let half = BigRational::new(
        BigInt::from(n) * BigInt::from(euler_phi(n)),
        BigInt::from(2),
    );
    let expected = num_traits::pow(half, k as usize);
    Ok(VerificationRecord::identity(
        "row_sum",
        &[("n", n as i64), ("k", k as i64)],
        Value::Exact(total),
        Value::Exact(expected),
        0.0,
    ))
}

/// Largest `|T(chi)|` over even non-principal `chi` against `1e-8 n phi(n)`.
pub fn even_vanishing_record(n: u64) -> Result<VerificationRecord> {
    if n < 1 {
        return Err(Error::Hypothesis("needs n >= 1".into()));
    }
    let exp = CharacterExpansion::new(n);
    let worst = exp
        .group()
        .characters()
        .zip(exp.weighted_sums())
        .filter(|(chi, _)| !chi.principal && !chi.is_odd())
        .map(|(_, t)| t.norm())
        .fold(0.0, f64::max);
    let tol = 1e-8 * (n * euler_phi(n)) as f64;
    Ok(VerificationRecord::bound(
        "even_vanishing",
        &[("n", n as i64)],
        Value::Real(worst),
        Value::Real(tol),
    ))
}

/// For every reduced `m`: `R_22` from its double sum against the closed
/// form, and `n phi(n)^2/4 + R_21 + R_22` against the exact `S_2(n, m)`;
/// then one record bounding the spread of `R_22` over `m`.
pub fn r22_records(n: u64) -> Result<Vec<VerificationRecord>> {
    if n < 2 {
        return Err(Error::Hypothesis(format!("needs n >= 2 (got n = {n})")));
    }
    let tol = 1e-6 * (n as f64).powi(3);
    let closed = r22_closed_form(n);
    let closed_f = rational_to_f64(&closed);
    let leading = rational_to_f64(&s2_leading_term(n));
    let table = s2_table(n)?;
    let mut out = Vec::new();
    let mut r22_values = Vec::new();
    for m in (1..=n).filter(|&m| gcd(m, n) == 1) {
        let (r21, r22) = r2_parts(n, m)?;
        let p = [("n", n as i64), ("m", m as i64)];
        out.push(VerificationRecord::identity(
            "r22",
            &p,
            Value::Complex(r22),
            Value::Exact(closed.clone()),
            tol,
        ));
        let s2 = BigRational::from_integer(BigInt::from(table.get(m).clone()));
        out.push(VerificationRecord::identity(
            "step1",
            &p,
            Value::Complex(Complex64::new(leading, 0.0) + r21 + r22),
            Value::Exact(s2),
            tol,
        ));
        r22_values.push(r22);
    }
    let spread = r22_values
        .iter()
        .flat_map(|a| r22_values.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    out.push(
        VerificationRecord::bound(
            "r22_spread",
            &[("n", n as i64)],
            Value::Real(spread),
            Value::Real(tol),
        )
        .with_note(format!("closed form = {}", super::format_real(closed_f))),
    );
    Ok(out)
}

/// `max_m |S_2(n, m) - n^2 phi(n)/4| / (n^{3/2} phi(n))`.
pub fn sharpness_ratio(n: u64) -> Result<f64> {
    require_odd(n)?;
    let worst = max_abs_error(n, 2)?;
    Ok(rational_to_f64(&worst) / ((n as f64).powf(1.5) * euler_phi(n) as f64))
}

pub fn sharpness_record(n: u64) -> Result<VerificationRecord> {
    require_odd(n)?;
    let scale = (n as f64).powf(1.5) * euler_phi(n) as f64;
    Ok(VerificationRecord::ratio_report(
        "sharpness",
        &[("n", n as i64)],
        Value::Exact(max_abs_error(n, 2)?),
        Value::Real(scale),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_k2_examples() {
        let rep = check_theorem_k2(5).unwrap();
        assert_eq!(rep.records.len(), 4);
        assert!(rep.passed());
        let worst = rep
            .records
            .iter()
            .map(|r| r.lhs.magnitude())
            .fold(0.0, f64::max);
        assert_eq!(worst, 4.0);
        let expected = 25.0 * (1.0 + 5f64.sqrt()) * (2.0 * (5.0 * E).ln()).powi(2) + 5.0;
        assert!((theorem_k2_bound(5) - expected).abs() < 1e-9);
        assert!((theorem_k2_bound(5) - 2208.49).abs() < 0.01);
        let rep = check_theorem_k2(2).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.records[0].lhs.magnitude(), 0.0);
        assert!(rep.passed());
        let rep = check_theorem_k2(12).unwrap();
        assert_eq!(rep.records.len(), 4);
        assert!(rep.passed());
    }

    #[test]
    fn theorem_ksup3_examples() {
        let rep = check_theorem_ksup3(5, 3).unwrap();
        assert_eq!(rep.records.len(), 4);
        assert!(rep.passed());
        assert!(rep.worst_ratio < 1e-3);
        let rep = check_theorem_ksup3(2, 3).unwrap();
        assert_eq!(rep.records[0].lhs.magnitude(), 0.0);
        assert!(rep.passed());
        let rep = check_theorem_ksup3(30, 3).unwrap();
        assert_eq!(rep.records.len(), 8);
        assert!(rep.passed());
        assert!(check_theorem_ksup3(5, 2).is_err());
    }

    #[test]
    fn ratio_ksup4_examples() {
        for n in [3, 9, 15] {
            let rec = ratio_theorem_ksup4(n, 4).unwrap();
            assert!(rec.ratio.is_finite() && rec.ratio > 0.0, "n={n}");
            assert_eq!(rec.kind, CheckKind::Ratio);
            assert!(rec.note.starts_with("ratio report"));
        }
        assert!(ratio_theorem_ksup4(10, 4).is_err());
        assert!(ratio_theorem_ksup4(9, 3).is_err());
    }

    #[test]
    fn mean_square_examples() {
        let rec = check_mean_square(5).unwrap();
        assert!(rec.pass);
        assert_eq!(
            rec.lhs,
            Value::Exact(ExactRational::from_integer(BigInt::from(50)))
        );
        assert!((rec.rhs.magnitude() - 363.2478632478632).abs() < 1e-9);
        assert!((rec.ratio - 0.13764705882352942).abs() < 1e-12);
        let rec = check_mean_square(3).unwrap();
        assert!(rec.pass);
        assert_eq!(
            rec.lhs,
            Value::Exact(BigRational::new(BigInt::from(1), BigInt::from(2)))
        );
        assert!(check_mean_square(6).is_err());
    }

    #[test]
    fn xu_examples() {
        let rec = xu_moment_report(5, 0).unwrap();
        assert!((rec.lhs.magnitude() - 200.0).abs() < 1e-9);
        let expected = BigRational::new(BigInt::from(17 * 5 * 125 * 256), BigInt::from(13 * 144));
        assert_eq!(rec.rhs, Value::Exact(expected));
        assert!(rec.pass);
        assert!((xu_moment_report(3, 0).unwrap().lhs.magnitude() - 1.0).abs() < 1e-12);
        for q in [7, 15, 21, 45] {
            assert!(xu_moment_report(q, 1).unwrap().pass);
        }
        assert!(xu_moment_report(8, 0).is_err());
        assert!(xu_moment_report(7, 5).is_err());
    }

    #[test]
    fn r22_and_row_sum_small() {
        for n in 2..=30 {
            assert!(r22_records(n).unwrap().iter().all(|r| r.pass), "n={n}");
            assert!(row_sum_record(n, 3).unwrap().pass);
            assert!(even_vanishing_record(n).unwrap().pass);
        }
    }
}
