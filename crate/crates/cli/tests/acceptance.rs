//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use congrusum::arith::gcd;
use congrusum::sk_engine::{mean_square_error, sk_with_method, Method};
use congrusum::verify::{
    check_lemma, check_mean_square, sweep, CheckId, LemmaId, LemmaParams, SweepReport, SweepSpec,
};
use congrusum::ExactRational;
use congrusum_cli::run_captured;
use num_bigint::BigUint;

const ORACLE_TABLE: &str = include_str!("golden/oracle_table.csv");
const MEAN_SQUARE_RATIO: &str = include_str!("golden/mean_square_ratio.csv");

type Outcome = Result<String, String>;

fn golden_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.expect("golden csv"))
        .collect()
}

fn require_clean(report: &SweepReport) -> Result<(), String> {
    if !report.skipped.is_empty() {
        return Err(format!(
            "{}: {} skipped units, first: {:?}",
            report.check_id,
            report.skipped.len(),
            report.skipped[0]
        ));
    }
    if report.records.is_empty() {
        return Err(format!("{}: no records", report.check_id));
    }
    if let Some(r) = report.failing().next() {
        return Err(format!(
            "{}: {} failures, first {:?} lhs {} rhs {}",
            report.check_id, report.failures, r.params, r.lhs, r.rhs
        ));
    }
    Ok(())
}

fn swept(check: CheckId, n_min: u64, n_max: u64, ks: &[u32], odd_only: bool) -> SweepReport {
    let mut spec = SweepSpec::new(check, n_min, n_max);
    spec.ks = ks.to_vec();
    spec.odd_only = odd_only;
    spec.threads = 8;
    sweep(&spec)
}

fn oracle_table() -> Outcome {
    let rows = golden_rows(ORACLE_TABLE);
    for row in &rows {
        let n: u64 = row[0].parse().unwrap();
        let k: u32 = row[1].parse().unwrap();
        let m: u64 = row[2].parse().unwrap();
        let want: BigUint = row[3].parse().unwrap();
        for method in Method::ALL {
            if method == Method::Direct2 && k != 2 {
                continue;
            }
            let got = sk_with_method(n, k, m, method)
                .map_err(|e| e.to_string())?
                .value;
            if got != want {
                return Err(format!(
                    "S_{k}({n}, {m}) by {method} = {got}, expected {want}"
                ));
            }
        }
        let argv = [
            "congrusum",
            "sk",
            "compute",
            "--n",
            &row[0],
            "--k",
            &row[1],
            "--m",
            &row[2],
        ];
        let (code, out, err) = run_captured(argv);
        if code != 0 || out.trim() != want.to_string() {
            return Err(format!(
                "cli S_{k}({n}, {m}): exit {code}, `{}` {err}",
                out.trim()
            ));
        }
    }
    Ok(format!("{} golden values, every method", rows.len()))
}

fn row_sums() -> Outcome {
    let a = swept(CheckId::RowSum, 2, 300, &[2], false);
    let b = swept(CheckId::RowSum, 2, 100, &[3, 4], false);
    require_clean(&a)?;
    require_clean(&b)?;
    Ok(format!(
        "{} exact row sums",
        a.records.len() + b.records.len()
    ))
}

fn theorem_k2() -> Outcome {
    let rep = swept(CheckId::TheoremK2, 2, 500, &[2], false);
    require_clean(&rep)?;
    Ok(format!(
        "{} residues, worst ratio {:.4}",
        rep.records.len(),
        rep.worst_ratio
    ))
}

fn theorem_ksup3() -> Outcome {
    let a = swept(CheckId::TheoremKsup3, 2, 120, &[3], false);
    let b = swept(CheckId::TheoremKsup3, 2, 60, &[4], false);
    require_clean(&a)?;
    require_clean(&b)?;
    Ok(format!(
        "{} residues, worst ratio {:.2e}",
        a.records.len() + b.records.len(),
        a.worst_ratio.max(b.worst_ratio)
    ))
}

fn lemma(id: LemmaId, max: u64, samples: usize) -> Result<usize, String> {
    let params = LemmaParams {
        max,
        seed: 42,
        samples,
        threads: 8,
    };
    let rep = check_lemma(id, &params).map_err(|e| e.to_string())?;
    require_clean(&rep)?;
    Ok(rep.records.len())
}

fn lemma_identities() -> Outcome {
    let total = lemma(LemmaId::Alk11, 100, 20)?
        + lemma(LemmaId::SumTech, 100, 20)?
        + lemma(LemmaId::Partition, 100, 20)?;
    Ok(format!("{total} identity records"))
}

fn lemma_bounds() -> Outcome {
    let mut total = 0;
    for id in [
        LemmaId::Kloos,
        LemmaId::Recip,
        LemmaId::GcdDist,
        LemmaId::Incomplete,
        LemmaId::AbelPv,
    ] {
        total += lemma(id, 200, 20)?;
    }
    Ok(format!("{total} bound records"))
}

fn mean_square_identity() -> Outcome {
    let rep = swept(CheckId::MeanSquare, 3, 301, &[2], true);
    require_clean(&rep)?;
    let anchors = [
        (3, ExactRational::new(1.into(), 2.into())),
        (5, ExactRational::from_integer(50.into())),
    ];
    for (n, want) in anchors {
        let got = mean_square_error(n).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("mean square at {n} = {got}, expected {want}"));
        }
    }
    let worst = rep
        .records
        .iter()
        .filter_map(|r| r.deviation)
        .fold(0.0, f64::max);
    Ok(format!(
        "{} odd moduli, worst relative gap {worst:.2e}",
        rep.records.len()
    ))
}

fn ratio_convergence() -> Outcome {
    let mut ratios = Vec::new();
    for row in golden_rows(MEAN_SQUARE_RATIO) {
        let n: u64 = row[0].parse().unwrap();
        let exact: ExactRational = row[1].parse().unwrap();
        let golden: f64 = row[2].parse().unwrap();
        let rec = check_mean_square(n).map_err(|e| e.to_string())?;
        match &rec.lhs {
            congrusum::Value::Exact(v) if *v == exact => {}
            other => return Err(format!("mean square at {n} = {other}, expected {exact}")),
        }
        if n == 1001 && (rec.ratio - golden).abs() > 1e-6 {
            return Err(format!("ratio at 1001 = {}, golden {golden}", rec.ratio));
        }
        ratios.push((n, rec.ratio));
    }
    let gap = |n: u64| {
        ratios
            .iter()
            .find(|r| r.0 == n)
            .map(|r| (r.1 - 1.0).abs())
            .unwrap()
    };
    if gap(1001) >= gap(101) {
        return Err(format!("|ratio - 1| did not shrink: {ratios:?}"));
    }
    let shown: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}:{r:.6}")).collect();
    Ok(shown.join(" "))
}

fn even_vanishing() -> Outcome {
    let rep = swept(CheckId::EvenVanishing, 1, 500, &[2], false);
    require_clean(&rep)?;
    let worst = rep
        .records
        .iter()
        .map(|r| r.lhs.magnitude())
        .fold(0.0, f64::max);
    Ok(format!(
        "{} moduli, largest |T| {worst:.2e}",
        rep.records.len()
    ))
}

fn r22_closed_form() -> Outcome {
    let rep = swept(CheckId::R22, 2, 100, &[2], false);
    require_clean(&rep)?;
    let residues: usize = (2..=100u64)
        .map(|n| (1..=n).filter(|&m| gcd(m, n) == 1).count())
        .sum();
    if rep.records.len() != 2 * residues + 99 {
        return Err(format!(
            "{} records for {residues} residues",
            rep.records.len()
        ));
    }
    Ok(format!("{} records", rep.records.len()))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 3] = [
        &["sweep", "--check", "theorem_k2", "--n-range", "2..60"],
        &[
            "sweep",
            "--check",
            "lemma_partition",
            "--n-range",
            "1..40",
            "--seed",
            "7",
            "--samples",
            "5",
        ],
        &[
            "sweep",
            "--check",
            "row_sum",
            "--n-range",
            "2..40",
            "--k-range",
            "2..4",
            "--format",
            "json",
        ],
    ];
    for cmd in commands {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8", "8"] {
            let mut argv = vec!["congrusum"];
            argv.extend_from_slice(cmd);
            argv.extend_from_slice(&["--threads", threads]);
            let (code, out, err) = run_captured(argv);
            if code != 0 {
                return Err(format!("{cmd:?} exited {code}: {err}"));
            }
            outputs.push(out);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{cmd:?} output depends on thread count or run"));
        }
    }
    Ok("3 sweeps byte-identical at 1, 4, 8 threads and on rerun".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle table", oracle_table),
        ("row-sum identity", row_sums),
        ("explicit bound k = 2", theorem_k2),
        ("explicit bound k = 3, 4", theorem_ksup3),
        ("lemma identities", lemma_identities),
        ("lemma bounds", lemma_bounds),
        ("mean-square identity", mean_square_identity),
        ("mean-square ratio convergence", ratio_convergence),
        ("even-character vanishing", even_vanishing),
        ("R22 closed form", r22_closed_form),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
