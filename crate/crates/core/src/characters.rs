//! The full group of Dirichlet characters modulo `n`.
//!
//! `(Z/n)*` is split over the prime powers `p^a || n`. Odd prime powers are
//! cyclic and generated by their smallest primitive root; `2^a` contributes
//! nothing for `a = 1`, the cyclic group `<3>` of order 2 for `a = 2`, and
//! `<2^a - 1> x <5>` of orders `2` and `2^(a-2)` for `a >= 3`. A character is
//! an exponent vector over the resulting cyclic factors, and its values are
//! kept as exact fractions of a turn until something has to be summed.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;

use crate::arith::{factorize, gcd};
use crate::{Error, Result};

/// One prime-power component of `(Z/n)*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// Discrete logs of every residue mod `modulus`, one entry per generator;
    /// `None` off the units.
    logs: Vec<Option<Vec<u64>>>,
}

impl Component {
    fn new(prime: u64, exponent: u32) -> Component {
        let modulus = prime.pow(exponent);
        let mut logs = vec![None; modulus as usize];
        let (generators, orders) = if prime == 2 {
            match exponent {
                1 => {
                    logs[1] = Some(vec![]);
                    (vec![], vec![])
                }
                2 => {
                    logs[1] = Some(vec![0]);
                    logs[3] = Some(vec![1]);
                    (vec![3], vec![2])
                }
                _ => {
                    let order5 = modulus / 4;
                    let mut x = 1u64;
                    for j in 0..order5 {
                        logs[x as usize] = Some(vec![0, j]);
                        logs[(modulus - x) as usize] = Some(vec![1, j]);
                        x = x * 5 % modulus;
                    }
                    (vec![modulus - 1, 5], vec![2, order5])
                }
            }
        } else {
            let order = modulus / prime * (prime - 1);
            let g = smallest_primitive_root(prime, modulus, order);
            let mut x = 1u64;
            for j in 0..order {
                logs[x as usize] = Some(vec![j]);
                x = (x as u128 * g as u128 % modulus as u128) as u64;
            }
            (vec![g], vec![order])
        };
        Component {
            prime,
            exponent,
            modulus,
            generators,
            orders,
            logs,
        }
    }

    /// Discrete log vector of a unit `a` (any representative).
    pub fn log(&self, a: u64) -> Option<&[u64]> {
        self.logs[(a % self.modulus) as usize].as_deref()
    }
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn smallest_primitive_root(prime: u64, modulus: u64, order: u64) -> u64 {
    if modulus == 2 {
        return 1;
    }
    let order_primes: Vec<u64> = factorize(order).primes().collect();
    (2..modulus)
        .find(|&g| {
            g % prime != 0
                && order_primes
                    .iter()
                    .all(|&q| pow_mod(g, order / q, modulus) != 1)
        })
        .expect("odd prime powers are cyclic")
}

/// Parity of a character, the sign of `chi(-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// A character mod `modulus`, identified by its exponent vector over the
/// cyclic factors of its group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub index: Vec<u64>,
    pub parity: Parity,
    pub principal: bool,
}

impl DirichletCharacter {
    pub fn is_odd(&self) -> bool {
        self.parity == Parity::Odd
    }
}

/// A character value: zero, or `exp(2 pi i * t)` for an exact `t` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitValue {
    Zero,
    Root(Ratio<u64>),
}

impl UnitValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, UnitValue::Zero)
    }

    pub fn exponent(&self) -> Option<Ratio<u64>> {
        match self {
            UnitValue::Zero => None,
            UnitValue::Root(t) => Some(*t),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            UnitValue::Zero => Complex64::new(0.0, 0.0),
            UnitValue::Root(t) => turn(*t.numer(), *t.denom()),
        }
    }

    pub fn mul(self, other: UnitValue) -> UnitValue {
        match (self, other) {
            (UnitValue::Root(s), UnitValue::Root(t)) => {
                let sum = s + t;
                UnitValue::Root(if sum >= Ratio::from_integer(1) {
                    sum - 1
                } else {
                    sum
                })
            }
            _ => UnitValue::Zero,
        }
    }
}

/// `exp(2 pi i * num / den)` with `num < den`.
fn turn(num: u64, den: u64) -> Complex64 {
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (std::f64::consts::TAU * num as f64 / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// The group of all `phi(n)` Dirichlet characters modulo `n`.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    modulus: u64,
    components: Vec<Component>,
    /// Orders of the cyclic factors, flattened over components.
    orders: Vec<u64>,
    /// Exponent of the group (lcm of `orders`); all phases are multiples of `1/exponent`.
    exponent: u64,
    /// `exponent / orders[j]`.
    weights: Vec<u64>,
    /// Flattened discrete logs of residues `0..n`, `orders.len()` entries each.
    logs: Vec<u64>,
    reduced: Vec<bool>,
    roots: Vec<Complex64>,
}

impl CharacterGroup {
    /// Builds the character group mod `n`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn new(n: u64) -> CharacterGroup {
        assert!(n >= 1, "character group needs a positive modulus");
        let components: Vec<Component> = factorize(n)
            .factors()
            .iter()
            .map(|&(p, e)| Component::new(p, e))
            .collect();
        let orders: Vec<u64> = components.iter().flat_map(|c| c.orders.clone()).collect();
        let exponent = orders.iter().fold(1u64, |acc, &o| acc.lcm(&o));
        let weights = orders.iter().map(|&o| exponent / o).collect();
        let rank = orders.len();

        let mut logs = vec![0u64; n as usize * rank];
        let mut reduced = vec![false; n as usize];
        for a in 0..n {
            if gcd(a, n) != 1 {
                continue;
            }
            reduced[a as usize] = true;
            let mut offset = a as usize * rank;
            for c in &components {
                let log = c.log(a).expect("unit modulo every component");
                logs[offset..offset + log.len()].copy_from_slice(log);
                offset += log.len();
            }
        }
        let roots = (0..exponent).map(|j| turn(j, exponent)).collect();
        CharacterGroup {
            modulus: n,
            components,
            orders,
            exponent,
            weights,
            logs,
            reduced,
            roots,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Orders of the cyclic factors, in index-vector order.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Number of characters, equal to `phi(n)`.
    pub fn len(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Discrete-log vector of `a`, or `None` if `gcd(a, n) > 1`.
    pub fn discrete_log(&self, a: i64) -> Option<&[u64]> {
        let r = a.rem_euclid(self.modulus as i64) as usize;
        self.reduced[r].then(|| {
            let rank = self.orders.len();
            &self.logs[r * rank..(r + 1) * rank]
        })
    }

    /// Rebuilds a unit from its discrete-log vector.
    pub fn from_discrete_log(&self, log: &[u64]) -> u64 {
        let n = self.modulus;
        let mut acc = 0u64;
        let mut modulus_so_far = 1u64;
        let mut offset = 0;
        for c in &self.components {
            let mut local = 1u64;
            for (j, &g) in c.generators.iter().enumerate() {
                local = local * pow_mod(g, log[offset + j], c.modulus) % c.modulus;
            }
            offset += c.generators.len();
            acc = crt_pair(acc, modulus_so_far, local, c.modulus);
            modulus_so_far *= c.modulus;
        }
        if n == 1 {
            0
        } else {
            acc
        }
    }

    /// The `i`-th character in lexicographic order of index vectors; index 0
    /// is principal.
    pub fn character(&self, i: usize) -> DirichletCharacter {
        assert!(i < self.len(), "character index out of range");
        let mut index = vec![0u64; self.orders.len()];
        let mut rest = i as u64;
        for (slot, &o) in index.iter_mut().zip(&self.orders).rev() {
            *slot = rest % o;
            rest /= o;
        }
        self.from_index(index)
    }

    /// Character with the given exponent vector (entries reduced mod the orders).
    pub fn from_index(&self, mut index: Vec<u64>) -> DirichletCharacter {
        assert_eq!(index.len(), self.orders.len(), "index vector length");
        for (x, &o) in index.iter_mut().zip(&self.orders) {
            *x %= o;
        }
        let principal = index.iter().all(|&x| x == 0);
        let mut chi = DirichletCharacter {
            modulus: self.modulus,
            index,
            parity: Parity::Even,
            principal,
        };
        if self.modulus > 2 && self.phase(&chi, self.modulus - 1) != Some(0) {
            chi.parity = Parity::Odd;
        }
        chi
    }

    pub fn characters(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.len()).map(move |i| self.character(i))
    }

    pub fn principal(&self) -> DirichletCharacter {
        self.character(0)
    }

    pub fn conjugate(&self, chi: &DirichletCharacter) -> DirichletCharacter {
        let index = chi
            .index
            .iter()
            .zip(&self.orders)
            .map(|(&x, &o)| (o - x) % o)
            .collect();
        self.from_index(index)
    }

    /// Phase of `chi(a)` in units of `1/exponent`, `None` when `chi(a) = 0`.
    fn phase(&self, chi: &DirichletCharacter, a: u64) -> Option<u64> {
        debug_assert_eq!(chi.modulus, self.modulus);
        let r = (a % self.modulus) as usize;
        if !self.reduced[r] {
            return None;
        }
        let rank = self.orders.len();
        let logs = &self.logs[r * rank..(r + 1) * rank];
        let mut e = 0u64;
        for ((&x, &l), (&w, &o)) in chi
            .index
            .iter()
            .zip(logs)
            .zip(self.weights.iter().zip(&self.orders))
        {
            e += (x * l % o) * w;
        }
        Some(e % self.exponent)
    }

    pub fn evaluate(&self, chi: &DirichletCharacter, a: i64) -> UnitValue {
        let r = a.rem_euclid(self.modulus as i64) as u64;
        match self.phase(chi, r) {
            None => UnitValue::Zero,
            Some(e) => UnitValue::Root(Ratio::new(e, self.exponent)),
        }
    }

    /// `chi(a)` as a complex double.
    pub fn value(&self, chi: &DirichletCharacter, a: i64) -> Complex64 {
        let r = a.rem_euclid(self.modulus as i64) as u64;
        self.phase(chi, r)
            .map_or(Complex64::new(0.0, 0.0), |e| self.roots[e as usize])
    }

    /// `T(chi) = sum_{a=1}^{n} a chi(a)`, accumulated in ascending `a`.
    pub fn weighted_sum(&self, chi: &DirichletCharacter) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 1..=self.modulus {
            if let Some(e) = self.phase(chi, a) {
                acc += self.roots[e as usize] * a as f64;
            }
        }
        acc
    }

    /// `sum_{a <= upto} chi(a)` for `0 <= upto <= n`.
    pub fn partial_character_sum(&self, chi: &DirichletCharacter, upto: u64) -> Result<Complex64> {
        if upto > self.modulus {
            return Err(Error::Hypothesis(format!(
                "partial sum length {upto} exceeds modulus {}",
                self.modulus
            )));
        }
        Ok(self.partial_sums(chi)[upto as usize])
    }

    /// All prefix sums `sum_{a <= A} chi(a)` for `A = 0..=n`.
    pub fn partial_sums(&self, chi: &DirichletCharacter) -> Vec<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.modulus as usize + 1);
        out.push(acc);
        for a in 1..=self.modulus {
            if let Some(e) = self.phase(chi, a) {
                acc += self.roots[e as usize];
            }
            out.push(acc);
        }
        out
    }
}

/// Combine `x = a mod m` with `x = b mod k` for coprime `m`, `k`.
fn crt_pair(a: u64, m: u64, b: u64, k: u64) -> u64 {
    if m == 1 {
        return b % k;
    }
    let (m, k, a, b) = (m as i128, k as i128, a as i128, b as i128);
    let ext = m.extended_gcd(&k);
    // x = a + m * ((b - a) * m^{-1} mod k)
    let t = ((b - a) * ext.x).rem_euclid(k);
    (a + m * t).rem_euclid(m * k) as u64
}
