//! Elementary arithmetic functions and the exact constant `C_n`.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

const SMALL_PRIME_LIMIT: u64 = 1 << 16;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = SMALL_PRIME_LIMIT as usize;
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i32 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn tau(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(_, e)| u64::from(e) + 1)
            .product()
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factor `n` by trial division, first over the sieved primes below 2^16 and
/// then over odd candidates.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize: n must be positive");
    let mut rest = n;
    let mut factors = Vec::new();
    let mut push = |rest: &mut u64, p: u64| {
        let mut e = 0;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        push(&mut rest, p);
    }
    let mut p = SMALL_PRIME_LIMIT + 1;
    while rest > 1 && p.saturating_mul(p) <= rest {
        push(&mut rest, p);
        p += 2;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Factorization { value: n, factors }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).factors == [(n, 1)]
}

pub fn mobius(n: u64) -> i32 {
    factorize(n).mobius()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).euler_phi()
}

pub fn tau(n: u64) -> u64 {
    factorize(n).tau()
}

pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).divisors()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `n` as a residue in `1..=n`.
pub fn mod_inverse(a: u64, n: u64) -> Result<u64> {
    if n == 1 {
        return Ok(1);
    }
    let ext = (a as i128 % n as i128).extended_gcd(&(n as i128));
    if ext.gcd != 1 {
        return Err(Error::NotInvertible { a, n });
    }
    let inv = ext.x.rem_euclid(n as i128) as u64;
    Ok(if inv == 0 { n } else { inv })
}

/// The value of `sigma_lambda(n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaValue {
    Exact(ExactRational),
    Real(f64),
}

impl SigmaValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            SigmaValue::Exact(r) => rational_to_f64(r),
            SigmaValue::Real(x) => *x,
        }
    }
}

/// `sigma_lambda(n) = sum over d | n of d^lambda`.
///
/// Integer orders are exact; the order 1/2 is returned in double precision.
/// Every other order is rejected.
pub fn sigma(n: u64, lambda: Ratio<i64>) -> Result<SigmaValue> {
    let divs = divisors(n);
    if lambda.is_integer() {
        let e = *lambda.numer();
        let sum = divs.iter().fold(ExactRational::zero(), |acc, &d| {
            let base = ExactRational::from_integer(BigInt::from(d));
            let power = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
            acc + if e >= 0 { power } else { power.recip() }
        });
        Ok(SigmaValue::Exact(sum))
    } else if lambda == Ratio::new(1, 2) {
        Ok(SigmaValue::Real(sigma_half(n)))
    } else {
        Err(Error::UnsupportedSigmaOrder(lambda.to_string()))
    }
}

/// `sigma_{1/2}(n)`, summed over ascending divisors.
pub fn sigma_half(n: u64) -> f64 {
    divisors(n).iter().map(|&d| (d as f64).sqrt()).sum()
}

/// The Euler product `C_n` over `p^a || n` of
/// `1 + (2p^3 + p^2 - 1)/((p^2 + 1)(p^2 + p + 1)) - 1/(p^{3(a-1)} (p^2 + p + 1))`.
///
/// Defined for odd `n >= 3` only.
pub fn c_constant(n: u64) -> Result<ExactRational> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Hypothesis(format!(
            "C_n is defined for odd n >= 3 (got n = {n})"
        )));
    }
    let one = ExactRational::one();
    let product = factorize(n)
        .factors()
        .iter()
        .fold(one.clone(), |acc, &(p, a)| {
            let p = BigInt::from(p);
            let p2 = &p * &p;
            let p3 = &p2 * &p;
            let cyclo = &p2 + &p + 1;
            let first = ExactRational::new(BigInt::from(2) * &p3 + &p2 - 1, (&p2 + 1) * &cyclo);
            let second =
                ExactRational::new(BigInt::one(), num_traits::pow(p3, (a - 1) as usize) * cyclo);
            acc * (&one + first - second)
        });
    Ok(product)
}

/// Lower and upper sandwich `prod (1 + 4/(5p)) <= C_n <= prod (1 + 2/p)` over
/// the primes dividing `n`.
pub fn c_constant_bounds(n: u64) -> (ExactRational, ExactRational) {
    let one = ExactRational::one();
    factorize(n)
        .primes()
        .fold((one.clone(), one.clone()), |(lo, hi), p| {
            let p = BigInt::from(p);
            (
                lo * (&one + ExactRational::new(BigInt::from(4), BigInt::from(5) * &p)),
                hi * (&one + ExactRational::new(BigInt::from(2), p)),
            )
        })
}

/// Nearest double to a rational, robust to numerators and denominators far
/// beyond the `f64` range.
pub fn rational_to_f64(r: &ExactRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let numer = r.numer().abs();
    let denom = r.denom();
    // Scale so that the quotient keeps at least 64 significant bits.
    let shift = numer.bits() as i64 - denom.bits() as i64 - 64;
    let quotient = if shift > 0 {
        numer / (denom << shift as usize)
    } else {
        (numer << (-shift) as usize) / denom
    };
    let mantissa = big_to_f64(&quotient);
    let value = mantissa * 2f64.powi(shift as i32);
    if r.is_negative() {
        -value
    } else {
        value
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}
