//! Additive characters `e_n(x) = exp(2 pi i x / n)` and the exponential sums
//! built from them: Kloosterman-type sums twisted by `a`, linear sums
//! `sum b e_q(-kb)`, and reciprocal distances `1/|1 - e_q(x)|`.
//!
//! Every phase is reduced exactly modulo `n` before any trigonometric call.

use std::f64::consts::{E, TAU};

use num_complex::Complex64;

use crate::arith::{divisors, factorize, gcd, mod_inverse, sigma_half};
use crate::{Error, Result};

/// `e_n(r)` for every residue `r` in `0..n`.
#[derive(Debug, Clone)]
pub struct AdditiveRoots {
    n: u64,
    table: Vec<Complex64>,
}

impl AdditiveRoots {
    pub fn new(n: u64) -> AdditiveRoots {
        assert!(n >= 1, "additive characters need a positive modulus");
        let table = (0..n).map(|r| phase(r, n)).collect();
        AdditiveRoots { n, table }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// `e_n(x)` for `x` already known to be non-negative.
    pub fn at(&self, x: u64) -> Complex64 {
        self.table[(x % self.n) as usize]
    }

    pub fn at_signed(&self, x: i64) -> Complex64 {
        self.table[x.rem_euclid(self.n as i64) as usize]
    }
}

fn phase(r: u64, n: u64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (TAU * r as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// `e_n(x) = exp(2 pi i x / n)`.
pub fn e_n(n: u64, x: i64) -> Complex64 {
    assert!(n >= 1, "e_n needs a positive modulus");
    phase(x.rem_euclid(n as i64) as u64, n)
}

/// Which of `e_q(a l)` and `e_q(-a l)` a reciprocal-distance sum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

fn require_coprime(m: u64, n: u64) -> Result<()> {
    if gcd(m, n) != 1 {
        Err(Error::NotCoprime { m, n })
    } else {
        Ok(())
    }
}

fn mulmod3(a: u64, b: u64, c: u64, n: u64) -> u64 {
    let n = n as u128;
    ((a as u128 % n) * (b as u128 % n) % n * (c as u128 % n) % n) as u64
}

/// `sum over reduced a <= n of a * e_n(k m a^-1)`.
pub fn inverse_weighted_sum(n: u64, m: u64, k: u64) -> Result<Complex64> {
    require_coprime(m, n)?;
    let roots = AdditiveRoots::new(n);
    Ok(inverse_weighted_sum_with(&roots, m, k))
}

pub(crate) fn inverse_weighted_sum_with(roots: &AdditiveRoots, m: u64, k: u64) -> Complex64 {
    let n = roots.modulus();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=n {
        if gcd(a, n) != 1 {
            continue;
        }
        let inv = mod_inverse(a, n).expect("reduced residue");
        acc += roots.at(mulmod3(k, m, inv, n)) * a as f64;
    }
    acc
}

/// The incomplete sum `sum over reduced a <= t of e_n(k m a^-1)`.
pub fn incomplete_inverse_sum(n: u64, m: u64, k: u64, t: u64) -> Result<Complex64> {
    require_coprime(m, n)?;
    if t < 1 || t > n {
        return Err(Error::Hypothesis(format!(
            "incomplete sum length t = {t} must lie in 1..={n}"
        )));
    }
    Ok(incomplete_inverse_prefix(n, m, k)?[t as usize])
}

/// All prefixes of the incomplete inverse sum; entry `t` covers `a <= t`.
pub fn incomplete_inverse_prefix(n: u64, m: u64, k: u64) -> Result<Vec<Complex64>> {
    require_coprime(m, n)?;
    let roots = AdditiveRoots::new(n);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(acc);
    for a in 1..=n {
        if gcd(a, n) == 1 {
            let inv = mod_inverse(a, n).expect("reduced residue");
            acc += roots.at(mulmod3(k, m, inv, n));
        }
        out.push(acc);
    }
    Ok(out)
}

/// Bound `2 n^{3/2} tau(n) (n, k)^{1/2} log(e n)` on the inverse weighted sum.
pub fn inverse_weighted_sum_bound(n: u64, k: u64) -> f64 {
    let nf = n as f64;
    2.0 * nf.powf(1.5) * factorize(n).tau() as f64 * (gcd(n, k) as f64).sqrt() * (E * nf).ln()
}

/// Bound `n^{1/2} tau(n) (n, m k)^{1/2} log(e n)` on every incomplete sum.
pub fn incomplete_inverse_sum_bound(n: u64, m: u64, k: u64) -> f64 {
    let nf = n as f64;
    // gcd(n, 0) = n, matching gcd(n, m k) when n | m k.
    let g = gcd(n, mulmod3(m, k, 1, n));
    nf.sqrt() * factorize(n).tau() as f64 * (g as f64).sqrt() * (E * nf).ln()
}

/// Kloosterman sum `sum over reduced x of e_n(u x + v x^-1)`, summed directly.
pub fn kloosterman(n: u64, u: i64, v: i64) -> Complex64 {
    let roots = AdditiveRoots::new(n);
    let ni = n as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..=n {
        if gcd(x, n) != 1 {
            continue;
        }
        let inv = mod_inverse(x, n).expect("reduced residue") as i128;
        let arg = (u as i128 * x as i128 + v as i128 * inv).rem_euclid(ni);
        acc += roots.at(arg as u64);
    }
    acc
}

/// `sum_{b=1}^{q-1} b e_q(-k b)`.
pub fn twisted_linear_sum(q: u64, k: u64) -> Complex64 {
    let roots = AdditiveRoots::new(q);
    (1..q)
        .map(|b| roots.at_signed(-((k % q * b % q) as i64)) * b as f64)
        .sum()
}

/// Closed form `-q / (1 - e_q(-k))`, valid when `q` does not divide `k`.
pub fn closed_form_twisted(q: u64, k: u64) -> Result<Complex64> {
    if q < 2 || k % q == 0 {
        return Err(Error::Hypothesis(format!(
            "closed form needs q >= 2 and q not dividing k (q = {q}, k = {k})"
        )));
    }
    Ok(-(q as f64) / (1.0 - e_n(q, -((k % q) as i64))))
}

/// `sum over reduced b <= n of b e_n(-k b)`, summed directly.
pub fn coprime_linear_sum(n: u64, k: u64) -> Complex64 {
    let roots = AdditiveRoots::new(n);
    (1..=n)
        .filter(|&b| gcd(b, n) == 1)
        .map(|b| roots.at_signed(-((k % n * b % n) as i64)) * b as f64)
        .sum()
}

/// Divisor-sum evaluation of [`coprime_linear_sum`]:
/// `-n sum_{d|n, (n/d) !| k} mu(d)/(1 - e_{n/d}(-k)) + (n/2) sum_{d|n, d<n, (n/d) | k} mu(d)(n/d - 1)`.
pub fn coprime_linear_sum_rhs(n: u64, k: u64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Hypothesis(format!("needs n >= 2 (got n = {n})")));
    }
    let nf = n as f64;
    let mut twisted = Complex64::new(0.0, 0.0);
    let mut flat = 0i64;
    for d in divisors(n) {
        let mu = factorize(d).mobius();
        if mu == 0 {
            continue;
        }
        let r = n / d;
        if k % r != 0 {
            twisted += f64::from(mu) / (1.0 - e_n(r, -((k % r) as i64)));
        } else if d < n {
            flat += i64::from(mu) * (r as i64 - 1);
        }
    }
    Ok(-nf * twisted + Complex64::new(nf / 2.0 * flat as f64, 0.0))
}

/// Both sides of the partition of `1..=n` by `d = gcd(n, k)`:
/// `sum_k f(k)` and `sum_{d|n} sum_{h <= n/d, gcd(n/d, h) = 1} f(h d)`.
///
/// `f[k - 1]` holds `f(k)`.
pub fn gcd_partition_check(n: u64, f: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if n < 1 || f.len() as u64 != n {
        return Err(Error::Hypothesis(format!(
            "function table must have exactly n = {n} entries (got {})",
            f.len()
        )));
    }
    let lhs: Complex64 = f.iter().sum();
    let mut rhs = Complex64::new(0.0, 0.0);
    for d in divisors(n) {
        let r = n / d;
        for h in (1..=r).filter(|&h| gcd(r, h) == 1) {
            rhs += f[(h * d - 1) as usize];
        }
    }
    Ok((lhs, rhs))
}

/// `sum over a mod q with q !| a l of 1/|1 - e_q(+-a l)|`; zero when `q | l`.
pub fn reciprocal_distance_sum(q: u64, l: u64, sign: Sign) -> f64 {
    let roots = AdditiveRoots::new(q);
    let mut acc = 0.0;
    for a in 1..q {
        let x = (a as u128 * l as u128 % q as u128) as u64;
        if x == 0 {
            continue;
        }
        let z = match sign {
            Sign::Plus => roots.at(x),
            Sign::Minus => roots.at(q - x),
        };
        acc += 1.0 / (Complex64::new(1.0, 0.0) - z).norm();
    }
    acc
}

/// The two bounds `(q/2) log(e q / (2 (l, q)))` and `(q/2) log(e q)`.
pub fn reciprocal_distance_bounds(q: u64, l: u64) -> (f64, f64) {
    let qf = q as f64;
    let sharp = qf / 2.0 * (E * qf / (2.0 * gcd(l, q) as f64)).ln();
    let loose = qf / 2.0 * (E * qf).ln();
    (sharp, loose)
}

/// `sum_{k=1, (n/d) !| k}^{n-1} (n, k)^{1/2} / |1 - e_{n/d}(-k)|`; zero when `d = n`.
pub fn gcd_weighted_distance_sum(n: u64, d: u64) -> Result<f64> {
    if n < 2 || d == 0 || n % d != 0 {
        return Err(Error::Hypothesis(format!(
            "needs n >= 2 and d dividing n (n = {n}, d = {d})"
        )));
    }
    let r = n / d;
    let roots = AdditiveRoots::new(r);
    let mut acc = 0.0;
    for k in 1..n {
        let x = k % r;
        if x == 0 {
            continue;
        }
        let denom = (Complex64::new(1.0, 0.0) - roots.at(r - x)).norm();
        acc += (gcd(n, k) as f64).sqrt() / denom;
    }
    Ok(acc)
}

/// `(1/2) n^{1/2} sigma_{1/2}(n) log(e n)`.
pub fn gcd_weighted_distance_bound(n: u64) -> f64 {
    let nf = n as f64;
    0.5 * nf.sqrt() * sigma_half(n) * (E * nf).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64, tol: f64) -> bool {
        (a - Complex64::new(re, im)).norm() <= tol
    }

    #[test]
    fn e_n_examples() {
        assert_eq!(e_n(4, 0), Complex64::new(1.0, 0.0));
        assert!(close(e_n(4, 1), 0.0, 1.0, 1e-15));
        let h = 2f64.sqrt() / 2.0;
        assert!(close(e_n(8, 3), -h, h, 1e-15));
        assert!(close(e_n(8, -5), -h, h, 1e-15));
        assert_eq!(e_n(7, 3), e_n(7, 3 + 7 * 1000));
    }

    #[test]
    fn inverse_weighted_sum_examples() {
        assert!(close(
            inverse_weighted_sum(5, 1, 5).unwrap(),
            10.0,
            0.0,
            1e-12
        ));
        assert!(close(
            inverse_weighted_sum(5, 1, 1).unwrap(),
            -2.5,
            -2.2653842965929876,
            1e-12
        ));
        assert!(close(
            inverse_weighted_sum(2, 1, 1).unwrap(),
            -1.0,
            0.0,
            1e-12
        ));
        assert_eq!(
            inverse_weighted_sum(6, 2, 1),
            Err(Error::NotCoprime { m: 2, n: 6 })
        );
    }

    #[test]
    fn incomplete_inverse_sum_examples() {
        assert!(close(
            incomplete_inverse_sum(5, 1, 5, 5).unwrap(),
            4.0,
            0.0,
            1e-12
        ));
        assert!(close(
            incomplete_inverse_sum(5, 1, 1, 2).unwrap(),
            -0.5,
            0.36327126400268,
            1e-12
        ));
        assert_eq!(incomplete_inverse_sum(3, 1, 1, 1).unwrap(), e_n(3, 1));
        assert!(incomplete_inverse_sum(5, 1, 1, 0).is_err());
        assert!(incomplete_inverse_sum(5, 1, 1, 6).is_err());
    }

    #[test]
    fn kloosterman_examples() {
        assert!(close(kloosterman(5, 1, 1), 0.381966011250105, 0.0, 1e-12));
        assert!(close(kloosterman(5, 0, 0), 4.0, 0.0, 1e-12));
        assert!(close(kloosterman(2, 1, 1), 1.0, 0.0, 1e-12));
    }

    #[test]
    fn kloosterman_sums_are_real() {
        for n in 1..=120u64 {
            let phi = factorize(n).euler_phi() as f64;
            for u in 0..n as i64 {
                for v in [0, 1, 2, -3] {
                    assert!(
                        kloosterman(n, u, v).im.abs() <= 1e-9 * phi,
                        "n={n} u={u} v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn twisted_linear_sum_examples() {
        assert!(close(twisted_linear_sum(4, 1), -2.0, 2.0, 1e-12));
        assert!(close(closed_form_twisted(4, 1).unwrap(), -2.0, 2.0, 1e-12));
        assert!(close(twisted_linear_sum(2, 1), -1.0, 0.0, 1e-12));
        assert!(close(closed_form_twisted(2, 1).unwrap(), -1.0, 0.0, 1e-12));
        assert!(close(twisted_linear_sum(3, 3), 3.0, 0.0, 1e-12));
        assert!(closed_form_twisted(3, 3).is_err());
    }

    #[test]
    fn coprime_linear_sum_examples() {
        assert!(close(coprime_linear_sum(2, 1), -1.0, 0.0, 1e-12));
        assert!(close(
            coprime_linear_sum_rhs(2, 1).unwrap(),
            -1.0,
            0.0,
            1e-12
        ));
        assert!(close(coprime_linear_sum(5, 5), 10.0, 0.0, 1e-12));
        assert!(close(
            coprime_linear_sum_rhs(5, 5).unwrap(),
            10.0,
            0.0,
            1e-12
        ));
        let sqrt12 = 12f64.sqrt();
        assert!(close(coprime_linear_sum(6, 1), 3.0, sqrt12, 1e-12));
        assert!(close(
            coprime_linear_sum_rhs(6, 1).unwrap(),
            3.0,
            sqrt12,
            1e-12
        ));
        assert!(coprime_linear_sum_rhs(1, 1).is_err());
    }

    #[test]
    fn gcd_partition_examples() {
        let one = [Complex64::new(3.5, -1.0)];
        assert_eq!(gcd_partition_check(1, &one).unwrap(), (one[0], one[0]));
        let f: Vec<Complex64> = (1..=6).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let (lhs, rhs) = gcd_partition_check(6, &f).unwrap();
        assert_eq!((lhs.re, rhs.re), (21.0, 21.0));
        let mut ind = vec![Complex64::new(0.0, 0.0); 4];
        ind[3] = Complex64::new(1.0, 0.0);
        let (lhs, rhs) = gcd_partition_check(4, &ind).unwrap();
        assert_eq!((lhs.re, rhs.re), (1.0, 1.0));
        assert!(gcd_partition_check(4, &f).is_err());
    }

    #[test]
    fn reciprocal_distance_examples() {
        let s = reciprocal_distance_sum(5, 1, Sign::Plus);
        assert!((s - 2.7527638409423467).abs() < 1e-12);
        let (_, loose) = reciprocal_distance_bounds(5, 1);
        assert!((loose - 2.5 * (5.0 * E).ln()).abs() < 1e-12);
        assert!((reciprocal_distance_sum(2, 1, Sign::Minus) - 0.5).abs() < 1e-15);
        assert!((reciprocal_distance_sum(4, 2, Sign::Plus) - 1.0).abs() < 1e-15);
        assert_eq!(reciprocal_distance_sum(6, 12, Sign::Plus), 0.0);
    }

    #[test]
    fn gcd_weighted_distance_examples() {
        assert!((gcd_weighted_distance_sum(2, 1).unwrap() - 0.5).abs() < 1e-15);
        let bound = 0.5 * 2f64.sqrt() * (1.0 + 2f64.sqrt()) * (2.0 * E).ln();
        assert!((gcd_weighted_distance_bound(2) - bound).abs() < 1e-12);
        assert!((gcd_weighted_distance_sum(4, 1).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(gcd_weighted_distance_sum(3, 3).unwrap(), 0.0);
        assert!(gcd_weighted_distance_sum(6, 4).is_err());
    }

    #[test]
    fn distance_inequality_on_random_rationals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let den: i64 = rng.gen_range(1..=10_000);
            let x = rng.gen_range(-10 * den..=10 * den) as f64 / den as f64;
            let y = rng.gen_range(-10 * den..=10 * den) as f64 / den as f64;
            let e = |t: f64| {
                let (s, c) = (TAU * t).sin_cos();
                Complex64::new(c, s)
            };
            let diff = x - y;
            let dist = (diff - diff.round()).abs();
            assert!((e(x) - e(y)).norm() >= 4.0 * dist - 1e-12, "x={x} y={y}");
        }
    }
}
