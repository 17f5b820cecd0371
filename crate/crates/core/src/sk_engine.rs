//! Exact evaluation of `S_k(n, m)` by four independent routes.
//!
//! * [`sk_bruteforce`] walks every reduced `(k-1)`-tuple; the last coordinate
//!   is forced by the congruence.
//! * [`s2_direct`] is the `O(phi(n))` special case `k = 2`.
//! * [`sk_convolution_table`] iterates the multiplicative convolution
//!   `(f * g)(m) = sum_{ab = m} f(a) g(b)` starting from `f(a) = a`.
//! * [`sk_characters`] expands over Dirichlet characters in floating point and
//!   rounds, returning the distance to the nearest integer as a certificate.
//!
//! All exact values are arbitrary-precision integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{divisors, euler_phi, factorize, gcd, ExactRational};
use crate::characters::CharacterGroup;
use crate::expsums::{e_n, inverse_weighted_sum_with, AdditiveRoots};
use crate::{Error, Result};

/// Tuples the brute-force oracle may enumerate.
pub const BRUTEFORCE_GUARD: u128 = 100_000_000;
/// Cell updates the convolution table may perform.
pub const CONVOLUTION_GUARD: u128 = 1_000_000_000;
/// Largest residual the character route accepts before declaring precision loss.
pub const MAX_RESIDUAL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    BruteForce,
    Direct2,
    Convolution,
    Characters,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BruteForce,
        Method::Direct2,
        Method::Convolution,
        Method::Characters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::BruteForce => "bruteforce",
            Method::Direct2 => "direct2",
            Method::Convolution => "convolution",
            Method::Characters => "characters",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// One evaluated `S_k(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkResult {
    pub n: u64,
    pub k: u32,
    pub m: u64,
    pub value: BigUint,
    pub method: Method,
    /// Distance from the complex estimate to `value`; characters route only.
    pub residual: Option<f64>,
}

/// Values attached to the residue classes `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTable {
    modulus: u64,
    values: Vec<BigUint>,
}

impl ResidueTable {
    /// Table from values listed for classes `1..=n` in order.
    pub fn from_values(modulus: u64, values: Vec<BigUint>) -> ResidueTable {
        assert_eq!(values.len() as u64, modulus);
        ResidueTable { modulus, values }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Value at class `m` (any representative).
    pub fn get(&self, m: u64) -> &BigUint {
        let r = m % self.modulus;
        let class = if r == 0 { self.modulus } else { r };
        &self.values[class as usize - 1]
    }

    /// `(class, value)` for classes `1..=n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigUint)> {
        (1..=self.modulus).zip(&self.values)
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn total(&self) -> BigUint {
        self.values.iter().sum()
    }
}

fn check_args(n: u64, k: u32, m: u64) -> Result<()> {
    if n < 2 || k < 2 {
        return Err(Error::Hypothesis(format!(
            "S_k(n, m) needs n >= 2 and k >= 2 (got n = {n}, k = {k})"
        )));
    }
    if gcd(m, n) != 1 {
        return Err(Error::NotCoprime { m, n });
    }
    Ok(())
}

fn reduced_residues(n: u64) -> Vec<u64> {
    (1..=n).filter(|&a| gcd(a, n) == 1).collect()
}

/// Inverses of all residues `0..n`, zero on non-units.
fn inverse_table(n: u64) -> Vec<u64> {
    let mut inv = vec![0u64; n as usize];
    for a in reduced_residues(n) {
        let r = (a % n) as usize;
        if inv[r] == 0 {
            let b = crate::arith::mod_inverse(a, n).expect("reduced residue");
            inv[r] = b % n;
            inv[(b % n) as usize] = r as u64;
        }
    }
    inv
}

fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

/// Representative in `1..=n`.
fn class(r: u64, n: u64) -> u64 {
    if r == 0 {
        n
    } else {
        r
    }
}

/// u128 running sum that spills into a `BigUint` on overflow.
#[derive(Default)]
struct Accumulator {
    small: u128,
    big: BigUint,
}

impl Accumulator {
    fn add(&mut self, x: u128) {
        match self.small.checked_add(x) {
            Some(s) => self.small = s,
            None => {
                self.big += BigUint::from(self.small);
                self.small = x;
            }
        }
    }

    fn add_big(&mut self, x: BigUint) {
        self.big += x;
    }

    fn finish(self) -> BigUint {
        self.big + BigUint::from(self.small)
    }
}

/// Definitional oracle: sums `a_1 ... a_k` over every reduced tuple with
/// product `m` mod `n`.
pub fn sk_bruteforce(n: u64, k: u32, m: u64) -> Result<SkResult> {
    check_args(n, k, m)?;
    let phi = euler_phi(n) as u128;
    let tuples = (1..k)
        .try_fold(1u128, |acc, _| acc.checked_mul(phi))
        .unwrap_or(u128::MAX);
    if tuples > BRUTEFORCE_GUARD {
        return Err(Error::GuardExceeded {
            what: "brute-force tuple",
            limit: BRUTEFORCE_GUARD,
            actual: tuples,
        });
    }
    let residues = reduced_residues(n);
    let inv = inverse_table(n);
    let target = m % n;
    let mut acc = Accumulator::default();

    fn walk(
        depth: u32,
        free: u32,
        prod_mod: u64,
        prod: BigOrSmall,
        ctx: &(u64, u64, &[u64], &[u64]),
        acc: &mut Accumulator,
    ) {
        let (n, target, residues, inv) = *ctx;
        if depth == free {
            let last = class(mulmod(target, inv[prod_mod as usize], n), n);
            match prod.times(last) {
                BigOrSmall::Small(v) => acc.add(v),
                BigOrSmall::Big(v) => acc.add_big(v),
            }
            return;
        }
        for &a in residues {
            walk(
                depth + 1,
                free,
                mulmod(prod_mod, a, n),
                prod.clone().times(a),
                ctx,
                acc,
            );
        }
    }

    walk(
        0,
        k - 1,
        1 % n,
        BigOrSmall::Small(1),
        &(n, target, &residues, &inv),
        &mut acc,
    );
    Ok(SkResult {
        n,
        k,
        m,
        value: acc.finish(),
        method: Method::BruteForce,
        residual: None,
    })
}

#[derive(Clone)]
enum BigOrSmall {
    Small(u128),
    Big(BigUint),
}

impl BigOrSmall {
    fn times(self, x: u64) -> BigOrSmall {
        match self {
            BigOrSmall::Small(v) => match v.checked_mul(x as u128) {
                Some(p) => BigOrSmall::Small(p),
                None => BigOrSmall::Big(BigUint::from(v) * x),
            },
            BigOrSmall::Big(v) => BigOrSmall::Big(v * x),
        }
    }
}

/// `S_2(n, m) = sum over reduced a of a * rep(m a^-1)`.
pub fn s2_direct(n: u64, m: u64) -> Result<SkResult> {
    check_args(n, 2, m)?;
    let inv = inverse_table(n);
    Ok(SkResult {
        n,
        k: 2,
        m,
        value: s2_with(n, m, &inv),
        method: Method::Direct2,
        residual: None,
    })
}

fn s2_with(n: u64, m: u64, inv: &[u64]) -> BigUint {
    let mut acc = Accumulator::default();
    for a in 1..=n {
        let ia = inv[(a % n) as usize];
        if ia == 0 && n > 1 {
            continue;
        }
        acc.add(a as u128 * class(mulmod(m % n, ia, n), n) as u128);
    }
    acc.finish()
}

/// `S_2(n, m)` for every class `m`, via [`s2_direct`] per reduced class.
pub fn s2_table(n: u64) -> Result<ResidueTable> {
    check_args(n, 2, 1)?;
    let inv = inverse_table(n);
    let values = (1..=n)
        .into_par_iter()
        .map(|m| {
            if gcd(m, n) == 1 {
                s2_with(n, m, &inv)
            } else {
                BigUint::zero()
            }
        })
        .collect();
    Ok(ResidueTable::from_values(n, values))
}

/// `S_k(n, m)` for every class `m` by `k - 1` rounds of multiplicative
/// convolution with `f(a) = a [gcd(a, n) = 1]`.
pub fn sk_convolution_table(n: u64, k: u32) -> Result<ResidueTable> {
    check_args(n, k, 1)?;
    let phi = euler_phi(n) as u128;
    let cells = (k as u128 - 1)
        .saturating_mul(n as u128)
        .saturating_mul(phi);
    if cells > CONVOLUTION_GUARD {
        return Err(Error::GuardExceeded {
            what: "convolution cell",
            limit: CONVOLUTION_GUARD,
            actual: cells,
        });
    }
    let residues = reduced_residues(n);
    let inv = inverse_table(n);
    // Indexed by residue 0..n.
    let mut current: Vec<BigUint> = (0..n)
        .map(|r| {
            if gcd(r, n) == 1 {
                BigUint::from(class(r, n))
            } else {
                BigUint::zero()
            }
        })
        .collect();
    for _ in 1..k {
        current = (0..n)
            .into_par_iter()
            .map(|c| {
                if gcd(c, n) != 1 {
                    return BigUint::zero();
                }
                let mut acc = BigUint::zero();
                for &b in &residues {
                    let a = mulmod(c, inv[(b % n) as usize], n);
                    acc += &current[a as usize] * b;
                }
                acc
            })
            .collect();
    }
    // Rotate residue 0 (class n) to the end.
    current.rotate_left(1);
    Ok(ResidueTable::from_values(n, current))
}

/// Character-expansion evaluator; caches `T(chi)` for every character mod `n`.
#[derive(Debug, Clone)]
pub struct CharacterExpansion {
    group: CharacterGroup,
    weighted_sums: Vec<Complex64>,
}

impl CharacterExpansion {
    pub fn new(n: u64) -> CharacterExpansion {
        let group = CharacterGroup::new(n);
        let weighted_sums = group
            .characters()
            .map(|chi| group.weighted_sum(&chi))
            .collect();
        CharacterExpansion {
            group,
            weighted_sums,
        }
    }

    pub fn group(&self) -> &CharacterGroup {
        &self.group
    }

    /// `T(chi)` in the group's enumeration order.
    pub fn weighted_sums(&self) -> &[Complex64] {
        &self.weighted_sums
    }

    /// `(1/phi(n)) sum_chi conj(chi(m)) T(chi)^k` as a complex double.
    pub fn estimate(&self, k: u32, m: u64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (chi, t) in self.group.characters().zip(&self.weighted_sums) {
            acc += self.group.value(&chi, m as i64).conj() * t.powu(k);
        }
        acc / self.weighted_sums.len() as f64
    }

    pub fn sk(&self, k: u32, m: u64) -> Result<SkResult> {
        let n = self.group.modulus();
        check_args(n, k, m)?;
        let est = self.estimate(k, m);
        let rounded = est.re.round();
        let residual = (est - Complex64::new(rounded, 0.0)).norm();
        // Beyond 2^52 neighbouring doubles are at least one apart, so the
        // rounding step certifies nothing.
        if !(residual < MAX_RESIDUAL) || rounded.abs() >= 2f64.powi(52) || rounded < 0.0 {
            return Err(Error::PrecisionLoss { residual });
        }
        Ok(SkResult {
            n,
            k,
            m,
            value: BigUint::from(rounded as u64),
            method: Method::Characters,
            residual: Some(residual),
        })
    }

    /// `(1/phi(n)) sum over odd chi of |T(chi)|^4`.
    pub fn odd_fourth_moment(&self) -> f64 {
        let total: f64 = self
            .group
            .characters()
            .zip(&self.weighted_sums)
            .filter(|(chi, _)| chi.is_odd())
            .map(|(_, t)| t.norm_sqr() * t.norm_sqr())
            .sum();
        total / self.weighted_sums.len() as f64
    }
}

/// `S_k(n, m)` by the character expansion, rounded to the nearest integer.
pub fn sk_characters(n: u64, k: u32, m: u64) -> Result<SkResult> {
    check_args(n, k, m)?;
    CharacterExpansion::new(n).sk(k, m)
}

/// `S_k(n, m)` by the named route.
pub fn sk_with_method(n: u64, k: u32, m: u64, method: Method) -> Result<SkResult> {
    match method {
        Method::BruteForce => sk_bruteforce(n, k, m),
        Method::Direct2 => {
            if k != 2 {
                return Err(Error::Hypothesis(format!(
                    "direct2 evaluates k = 2 only (got k = {k})"
                )));
            }
            s2_direct(n, m)
        }
        Method::Convolution => {
            check_args(n, k, m)?;
            let table = sk_convolution_table(n, k)?;
            Ok(SkResult {
                n,
                k,
                m,
                value: table.get(m).clone(),
                method: Method::Convolution,
                residual: None,
            })
        }
        Method::Characters => sk_characters(n, k, m),
    }
}

/// Cheapest exact route for a single value.
pub fn sk_exact(n: u64, k: u32, m: u64) -> Result<SkResult> {
    check_args(n, k, m)?;
    if k == 2 {
        return s2_direct(n, m);
    }
    let phi = euler_phi(n) as u128;
    let tuples = (1..k)
        .try_fold(1u128, |acc, _| acc.checked_mul(phi))
        .unwrap_or(u128::MAX);
    let cells = (k as u128 - 1) * phi * phi;
    if tuples <= cells && tuples <= BRUTEFORCE_GUARD {
        sk_bruteforce(n, k, m)
    } else {
        sk_with_method(n, k, m, Method::Convolution)
    }
}

/// Exact table of `S_k(n, .)`: direct evaluation for `k = 2`, convolution otherwise.
pub fn sk_table(n: u64, k: u32) -> Result<ResidueTable> {
    if k == 2 {
        s2_table(n)
    } else {
        sk_convolution_table(n, k)
    }
}

/// `2^{-k} n^k phi(n)^{k-1}`.
pub fn main_term(n: u64, k: u32) -> ExactRational {
    let phi = BigInt::from(euler_phi(n));
    let numer = num_traits::pow(BigInt::from(n), k as usize) * num_traits::pow(phi, k as usize - 1);
    BigRational::new(numer, BigInt::one() << k as usize)
}

/// `S_k(n, m)` minus the main term, exactly.
pub fn error_term(n: u64, k: u32, m: u64) -> Result<ExactRational> {
    let s = sk_exact(n, k, m)?;
    Ok(BigRational::from_integer(BigInt::from(s.value)) - main_term(n, k))
}

/// Error terms for every reduced class `m`, ascending.
pub fn error_terms(n: u64, k: u32) -> Result<Vec<(u64, ExactRational)>> {
    let table = sk_table(n, k)?;
    let main = main_term(n, k);
    Ok(table
        .iter()
        .filter(|&(m, _)| gcd(m, n) == 1)
        .map(|(m, v)| {
            (
                m,
                BigRational::from_integer(BigInt::from(v.clone())) - &main,
            )
        })
        .collect())
}

fn require_odd(n: u64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        Err(Error::Hypothesis(format!("needs odd n >= 3 (got n = {n})")))
    } else {
        Ok(())
    }
}

/// `sum over reduced m of (S_2(n, m) - n^2 phi(n)/4)^2`, exactly.
pub fn mean_square_error(n: u64) -> Result<ExactRational> {
    require_odd(n)?;
    let table = s2_table(n)?;
    let main_times_4 = BigInt::from(n) * BigInt::from(n) * BigInt::from(euler_phi(n));
    let total: BigInt = table
        .iter()
        .filter(|&(m, _)| gcd(m, n) == 1)
        .map(|(_, v)| {
            let e = BigInt::from(v.clone()) * 4 - &main_times_4;
            &e * &e
        })
        .sum();
    Ok(BigRational::new(total, BigInt::from(16)))
}

/// The same mean square through `(1/phi(n)) sum over odd chi of |T(chi)|^4`.
pub fn mean_square_via_characters(n: u64) -> Result<f64> {
    require_odd(n)?;
    Ok(CharacterExpansion::new(n).odd_fourth_moment())
}

/// `n^2 phi(n)/4 - n phi(n)^2/4 - n phi(n)/4`.
pub fn r22_closed_form(n: u64) -> ExactRational {
    let n_big = BigInt::from(n);
    let phi = BigInt::from(euler_phi(n));
    let numer = &n_big * &n_big * &phi - &n_big * &phi * &phi - &n_big * &phi;
    BigRational::new(numer, BigInt::from(4))
}

/// `(R_21(n, m), R_22(n, m))` from their defining double sums.
pub fn r2_parts(n: u64, m: u64) -> Result<(Complex64, Complex64)> {
    check_args(n, 2, m)?;
    let roots = AdditiveRoots::new(n);
    // a_sums[k] = sum over reduced a of a e_n(k m a^-1), k = 0..n.
    let a_sums: Vec<Complex64> = (0..n)
        .map(|k| inverse_weighted_sum_with(&roots, m, k))
        .collect();
    let mut r21 = Complex64::new(0.0, 0.0);
    let mut r22 = Complex64::new(0.0, 0.0);
    for d in divisors(n) {
        let mu = factorize(d).mobius();
        if mu == 0 {
            continue;
        }
        let r = n / d;
        let mut twisted = Complex64::new(0.0, 0.0);
        let mut flat = Complex64::new(0.0, 0.0);
        for k in 1..n {
            if k % r != 0 {
                twisted += a_sums[k as usize] / (1.0 - e_n(r, -((k % r) as i64)));
            } else {
                flat += a_sums[k as usize];
            }
        }
        r21 -= twisted * f64::from(mu);
        if d < n {
            r22 += flat * (0.5 * f64::from(mu) * (r - 1) as f64);
        }
    }
    Ok((r21, r22))
}

pub fn r21_direct(n: u64, m: u64) -> Result<Complex64> {
    Ok(r2_parts(n, m)?.0)
}

pub fn r22_direct(n: u64, m: u64) -> Result<Complex64> {
    Ok(r2_parts(n, m)?.1)
}

/// `n phi(n)^2 / 4`, the `k = n` term isolated from the additive expansion of `S_2`.
pub fn s2_leading_term(n: u64) -> ExactRational {
    let phi = BigInt::from(euler_phi(n));
    BigRational::new(BigInt::from(n) * &phi * &phi, BigInt::from(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn q(n: i64, d: i64) -> ExactRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn bruteforce_examples() {
        for k in 2..=6 {
            assert_eq!(sk_bruteforce(2, k, 1).unwrap().value, big(1));
        }
        assert_eq!(sk_bruteforce(5, 2, 1).unwrap().value, big(29));
        assert_eq!(sk_bruteforce(4, 3, 3).unwrap().value, big(36));
        assert_eq!(sk_bruteforce(4, 3, 1).unwrap().value, big(28));
        assert_eq!(
            sk_bruteforce(10, 2, 5).unwrap_err(),
            Error::NotCoprime { m: 5, n: 10 }
        );
        assert!(matches!(
            sk_bruteforce(1009, 4, 1),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn direct_examples() {
        assert_eq!(s2_direct(5, 2).unwrap().value, big(28));
        assert_eq!(s2_direct(5, 4).unwrap().value, big(21));
        assert_eq!(s2_direct(3, 1).unwrap().value, big(5));
        assert!(s2_direct(6, 3).is_err());
    }

    #[test]
    fn convolution_examples() {
        let t = sk_convolution_table(5, 2).unwrap();
        let expected: Vec<BigUint> = [29u64, 28, 22, 21, 0].into_iter().map(big).collect();
        assert_eq!(t.values(), expected.as_slice());
        let t = sk_convolution_table(4, 3).unwrap();
        assert_eq!(t.get(1), &big(28));
        assert_eq!(t.get(3), &big(36));
        assert_eq!(t.get(2), &big(0));
        assert_eq!(t.get(4), &big(0));
        assert!(matches!(
            sk_convolution_table(100_003, 2),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn characters_examples() {
        let r = sk_characters(5, 2, 1).unwrap();
        assert_eq!(r.value, big(29));
        assert!(r.residual.unwrap() < 1e-6);
        assert_eq!(sk_characters(3, 2, 2).unwrap().value, big(4));
        assert_eq!(sk_characters(2, 5, 1).unwrap().value, big(1));
    }

    #[test]
    fn characters_reject_unrepresentable_magnitudes() {
        // S_6(211, 1) is about 10^24, far beyond integer resolution of a double.
        assert!(matches!(
            sk_characters(211, 6, 1),
            Err(Error::PrecisionLoss { .. })
        ));
    }

    #[test]
    fn main_and_error_terms() {
        assert_eq!(main_term(5, 2), q(25, 1));
        assert_eq!(main_term(4, 3), q(32, 1));
        assert_eq!(main_term(3, 2), q(9, 2));
        for k in 2..8 {
            assert_eq!(main_term(2, k), q(1, 1));
        }
        assert_eq!(error_term(5, 2, 1).unwrap(), q(4, 1));
        assert_eq!(error_term(5, 2, 4).unwrap(), q(-4, 1));
        assert_eq!(error_term(2, 3, 1).unwrap(), q(0, 1));
    }

    #[test]
    fn mean_square_examples() {
        assert_eq!(mean_square_error(5).unwrap(), q(50, 1));
        assert_eq!(mean_square_error(3).unwrap(), q(1, 2));
        assert_eq!(mean_square_error(9).unwrap(), q(7803, 2));
        assert!(mean_square_error(4).is_err());
        assert!((mean_square_via_characters(5).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn r22_examples() {
        assert_eq!(r22_closed_form(5), q(0, 1));
        assert_eq!(r22_closed_form(2), q(0, 1));
        let (r21, r22) = r2_parts(5, 1).unwrap();
        assert!(r22.norm() < 1e-9);
        // 29 = n phi(n)^2 / 4 + R_21 + R_22 = 20 + 9 + 0.
        assert_eq!(s2_leading_term(5), q(20, 1));
        assert!((r21 - Complex64::new(9.0, 0.0)).norm() < 1e-9);
        assert!(r2_parts(6, 2).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("auto".parse::<Method>().is_err());
    }
}
