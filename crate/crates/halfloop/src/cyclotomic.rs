//! Exact arithmetic in the cyclotomic field `Q(zeta_m)`, `zeta_m = exp(2*pi*i/m)`.
//!
//! Elements are stored on the power basis `1, zeta, ..., zeta^(phi(m)-1)`
//! reduced modulo the m-th cyclotomic polynomial, so the representation is
//! unique and zero-testing is a coefficient check. A model working over n
//! branches fixes one global order `m = lcm(n, 4)`, which keeps both the
//! branch phase `tau = zeta_m^(m/n)` and the imaginary unit `i = zeta_m^(m/4)`
//! in a single field.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Euler totient.
pub fn euler_phi(m: u32) -> u32 {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Divisors of `m` in ascending order.
pub fn divisors(m: u32) -> Vec<u32> {
    let mut divs = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            divs.push(d);
            if d != m / d {
                divs.push(m / d);
            }
        }
        d += 1;
    }
    divs.sort_unstable();
    divs
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Exact division of integer polynomials; `den` must be monic and divide `num`.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    assert!(rem.len() > dn);
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for qd in (0..=qn).rev() {
        let c = rem[qd + dn].clone();
        if !c.is_zero() {
            quot[qd] = c.clone();
            for (k, dk) in den.iter().enumerate() {
                let delta = &c * dk;
                rem[qd + k] -= delta;
            }
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
    quot
}

/// The m-th cyclotomic polynomial as a dense integer coefficient vector
/// (constant term first, monic). Computed by dividing `x^m - 1` by `Phi_d`
/// for every proper divisor `d`, and cached; the cache is write-once per key.
pub fn cyclotomic_polynomial(m: u32) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    assert!(m >= 1, "cyclotomic polynomial needs m >= 1");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    let result = if m == 1 {
        vec![-BigInt::one(), BigInt::one()]
    } else {
        // x^m - 1
        let mut num = vec![BigInt::zero(); m as usize + 1];
        num[0] = -BigInt::one();
        num[m as usize] = BigInt::one();
        let mut den = vec![BigInt::one()];
        for d in divisors(m) {
            if d != m {
                den = int_poly_mul(&den, &cyclotomic_polynomial(d));
            }
        }
        int_poly_div_exact(&num, &den)
    };
    debug_assert_eq!(result.len() as u32 - 1, euler_phi(m));
    let arc = Arc::new(result);
    cache.lock().unwrap().entry(m).or_insert_with(|| arc.clone());
    arc
}

/// Error for field division by zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionByZero;

impl fmt::Display for DivisionByZero {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "division by zero in cyclotomic field")
    }
}

impl std::error::Error for DivisionByZero {}

/// An element of `Q(zeta_m)` in the canonical power basis.
///
/// All binary operations require both operands to live at the same order;
/// mixing orders is a usage error (callers lift with [`CycNum::lift_order`]
/// first). The derived ordering is arbitrary but total, which makes the type
/// usable as a deterministic map key.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycNum {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl CycNum {
    fn from_reduced(order: u32, coeffs: Vec<BigRational>) -> Self {
        debug_assert_eq!(coeffs.len() as u32, euler_phi(order));
        CycNum { order, coeffs }
    }

    /// Reduce an arbitrary-degree coefficient vector modulo `zeta^m = 1` and
    /// then modulo `Phi_m`.
    fn reduce(order: u32, mut dense: Vec<BigRational>) -> Self {
        let m = order as usize;
        let phi = euler_phi(order) as usize;
        // exponents mod m
        if dense.len() > m {
            for k in m..dense.len() {
                let c = std::mem::replace(&mut dense[k], BigRational::zero());
                if !c.is_zero() {
                    dense[k % m] += c;
                }
            }
            dense.truncate(m);
        }
        // remainder modulo the monic integer polynomial Phi_m
        let modulus = cyclotomic_polynomial(order);
        if dense.len() > phi {
            for deg in (phi..dense.len()).rev() {
                let c = std::mem::replace(&mut dense[deg], BigRational::zero());
                if c.is_zero() {
                    continue;
                }
                // subtract c * x^(deg-phi) * Phi_m, whose leading term cancels x^deg
                for (k, pk) in modulus.iter().take(phi).enumerate() {
                    let delta = &c * BigRational::from_integer(pk.clone());
                    dense[deg - phi + k] -= delta;
                }
            }
            dense.truncate(phi);
        }
        dense.resize(phi, BigRational::zero());
        CycNum::from_reduced(order, dense)
    }

    pub fn zero(order: u32) -> Self {
        CycNum::from_reduced(order, vec![BigRational::zero(); euler_phi(order) as usize])
    }

    pub fn one(order: u32) -> Self {
        CycNum::from_rational(order, BigRational::one())
    }

    pub fn from_rational(order: u32, q: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); euler_phi(order) as usize];
        coeffs[0] = q;
        CycNum::from_reduced(order, coeffs)
    }

    pub fn from_int(order: u32, n: i64) -> Self {
        CycNum::from_rational(order, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(order: u32, num: i64, den: i64) -> Self {
        assert!(den != 0);
        CycNum::from_rational(
            order,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    /// `zeta_m^k`, reduced to canonical form; `k` may be negative.
    pub fn root(order: u32, k: i64) -> Self {
        let m = order as i64;
        let k = k.rem_euclid(m) as usize;
        let mut dense = vec![BigRational::zero(); k + 1];
        dense[k] = BigRational::one();
        CycNum::reduce(order, dense)
    }

    /// The primitive n-th root `tau = zeta_m^(m/n)`; requires `n | m`.
    pub fn tau(order: u32, n: u32) -> Self {
        assert!(order % n == 0, "branch count must divide the field order");
        CycNum::root(order, (order / n) as i64)
    }

    /// The imaginary unit `zeta_m^(m/4)`; requires `4 | m`.
    pub fn imaginary_unit(order: u32) -> Self {
        assert!(order % 4 == 0, "imaginary unit needs 4 | m");
        CycNum::root(order, (order / 4) as i64)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_same_order(&self, other: &CycNum) {
        assert_eq!(
            self.order, other.order,
            "cyclotomic order mismatch ({} vs {}); lift_order first",
            self.order, other.order
        );
    }

    pub fn add(&self, other: &CycNum) -> CycNum {
        self.check_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        CycNum::from_reduced(self.order, coeffs)
    }

    pub fn sub(&self, other: &CycNum) -> CycNum {
        self.check_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        CycNum::from_reduced(self.order, coeffs)
    }

    pub fn neg(&self) -> CycNum {
        CycNum::from_reduced(self.order, self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn mul(&self, other: &CycNum) -> CycNum {
        self.check_same_order(other);
        let mut dense =
            vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    dense[i + j] += a * b;
                }
            }
        }
        CycNum::reduce(self.order, dense)
    }

    pub fn scale(&self, q: &BigRational) -> CycNum {
        CycNum::from_reduced(self.order, self.coeffs.iter().map(|a| a * q).collect())
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on the
    /// coefficient polynomial and `Phi_m`.
    pub fn inverse(&self) -> Result<CycNum, DivisionByZero> {
        if self.is_zero() {
            return Err(DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(CycNum::from_rational(self.order, q.recip()));
        }
        let modulus: Vec<BigRational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        // extended gcd of (self.coeffs, modulus) in Q[x]
        let mut r0 = trim(modulus);
        let mut r1 = trim(self.coeffs.clone());
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = rat_poly_divmod(&r0, &r1);
            let s = rat_poly_sub(&s0, &rat_poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = trim(s);
        }
        // r0 = gcd (a nonzero constant, since Phi_m is irreducible over Q)
        assert_eq!(r0.len(), 1, "nonconstant gcd against irreducible modulus");
        let scale = r0[0].recip();
        let coeffs: Vec<BigRational> = s0.iter().map(|c| c * &scale).collect();
        Ok(CycNum::reduce(self.order, coeffs))
    }

    pub fn div(&self, other: &CycNum) -> Result<CycNum, DivisionByZero> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, e: i64) -> CycNum {
        if e < 0 {
            return self
                .inverse()
                .expect("negative power of zero")
                .pow(-e);
        }
        let mut base = self.clone();
        let mut e = e as u64;
        let mut acc = CycNum::one(self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Complex conjugation `zeta -> zeta^(-1)`.
    pub fn conj(&self) -> CycNum {
        let m = self.order as usize;
        let mut dense = vec![BigRational::zero(); m];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[(m - k) % m] += c;
            }
        }
        CycNum::reduce(self.order, dense)
    }

    /// Image under the canonical embedding `Q(zeta_m) -> Q(zeta_m')`,
    /// `zeta_m -> zeta_m'^(m'/m)`; `m` must divide `m'`.
    pub fn lift_order(&self, target: u32) -> CycNum {
        assert!(
            target % self.order == 0,
            "target order {} is not a multiple of {}",
            target,
            self.order
        );
        if target == self.order {
            return self.clone();
        }
        let step = (target / self.order) as usize;
        let mut dense = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[k * step] = c.clone();
            }
        }
        CycNum::reduce(target, dense)
    }

    /// Evaluate the power-basis expansion at `zeta_m = exp(2*pi*i/m)`.
    pub fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let x = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
            let angle = 2.0 * std::f64::consts::PI * (k as f64) / (self.order as f64);
            acc += Complex64::from_polar(1.0, angle) * x;
        }
        acc
    }
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

fn rat_poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(out)
}

fn rat_poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] -= bi;
    }
    trim(out)
}

fn rat_poly_divmod(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!den.is_empty());
    let mut rem = num.to_vec();
    if rem.len() < den.len() {
        return (vec![], trim(rem));
    }
    let dn = den.len() - 1;
    let lead = den[dn].clone();
    let mut quot = vec![BigRational::zero(); rem.len() - dn];
    for qd in (0..quot.len()).rev() {
        let c = &rem[qd + dn] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[qd] = c.clone();
        for (k, dk) in den.iter().enumerate() {
            let delta = &c * dk;
            rem[qd + k] -= delta;
        }
    }
    (trim(quot), trim(rem))
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = k == 0 || !abs.is_one();
            if show_coeff {
                if abs.denom().is_one() {
                    write!(f, "{}", abs.numer())?;
                } else {
                    write!(f, "{}/{}", abs.numer(), abs.denom())?;
                }
                if k > 0 {
                    write!(f, "*")?;
                }
            }
            if k == 1 {
                write!(f, "z{}", self.order)?;
            } else if k > 1 {
                write!(f, "z{}^{}", self.order, k)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polynomial_small_orders() {
        // Phi_1 = x - 1, Phi_4 = x^2 + 1
        assert_eq!(*cyclotomic_polynomial(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(
            *cyclotomic_polynomial(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
    }

    #[test]
    fn cyclotomic_polynomial_12_by_direct_division() {
        // Independent route: divide x^12 - 1 by Phi_1 Phi_2 Phi_3 Phi_4 Phi_6
        // computed from their closed forms, and confirm degree phi(12) = 4.
        let phi1 = vec![BigInt::from(-1), BigInt::from(1)];
        let phi2 = vec![BigInt::from(1), BigInt::from(1)];
        let phi3 = vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)];
        let phi4 = vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)];
        let phi6 = vec![BigInt::from(1), BigInt::from(-1), BigInt::from(1)];
        let mut den = phi1;
        for p in [phi2, phi3, phi4, phi6] {
            den = int_poly_mul(&den, &p);
        }
        let mut num = vec![BigInt::zero(); 13];
        num[0] = -BigInt::one();
        num[12] = BigInt::one();
        let expected = int_poly_div_exact(&num, &den);
        assert_eq!(expected.len(), 5);
        assert_eq!(*cyclotomic_polynomial(12), expected);
        // frozen value: x^4 - x^2 + 1
        assert_eq!(
            expected,
            vec![
                BigInt::from(1),
                BigInt::from(0),
                BigInt::from(-1),
                BigInt::from(0),
                BigInt::from(1)
            ]
        );
    }

    #[test]
    fn primitive_root_relations() {
        let i = CycNum::root(4, 1);
        assert_eq!(i.mul(&i), CycNum::from_int(4, -1));

        let z = CycNum::root(3, 0)
            .add(&CycNum::root(3, 1))
            .add(&CycNum::root(3, 2));
        assert!(z.is_zero());

        // zeta_12^4 is a primitive cube root: cube is 1 but it is not 1 itself
        let r = CycNum::root(12, 4);
        assert!(r.pow(3).is_one());
        assert!(!r.is_one());
        assert_eq!(CycNum::tau(12, 3), r);
    }

    #[test]
    fn field_arithmetic_examples() {
        let a = CycNum::root(12, 7);
        assert_eq!(a.add(&CycNum::zero(12)), a);
        let z3 = CycNum::root(3, 1);
        assert!(z3.mul(&z3.pow(2)).is_one());
        // (1 + zeta_3)(1 + zeta_3^2) = 1, using zeta_3 + zeta_3^2 = -1
        let one = CycNum::one(3);
        let lhs = one.add(&z3).mul(&one.add(&z3.pow(2)));
        assert!(lhs.is_one());
    }

    #[test]
    fn inverse_examples() {
        assert!(CycNum::one(12).inverse().unwrap().is_one());
        // inverse of a root of unity is the complementary power
        for k in 0..5 {
            let r = CycNum::root(5, k);
            assert_eq!(r.inverse().unwrap(), CycNum::root(5, 5 - k));
        }
        // inverse(1 - zeta_3) = (2 + zeta_3)/3, checked by multiplying back
        let z3 = CycNum::root(3, 1);
        let x = CycNum::one(3).sub(&z3);
        let inv = x.inverse().unwrap();
        assert!(x.mul(&inv).is_one());
        let expected = CycNum::from_rational(3, q(2, 3)).add(&z3.scale(&q(1, 3)));
        assert_eq!(inv, expected);
        assert_eq!(CycNum::zero(3).inverse(), Err(DivisionByZero));
    }

    #[test]
    fn lift_order_examples() {
        let c = CycNum::from_ratio(1, 7, 3);
        assert_eq!(c.lift_order(12).as_rational(), Some(&q(7, 3)));
        let z3 = CycNum::root(3, 1);
        let lifted = z3.lift_order(12);
        assert_eq!(lifted, CycNum::root(12, 4));
        assert!(lifted.pow(3).is_one());
        assert_eq!(CycNum::root(2, 1).lift_order(4), CycNum::from_int(4, -1));
    }

    #[test]
    fn lift_order_commutes_with_arithmetic() {
        let a = CycNum::root(3, 1).add(&CycNum::from_ratio(3, 5, 2));
        let b = CycNum::root(3, 2).sub(&CycNum::from_int(3, 4));
        assert_eq!(
            a.mul(&b).lift_order(12),
            a.lift_order(12).mul(&b.lift_order(12))
        );
        assert_eq!(
            a.add(&b).lift_order(12),
            a.lift_order(12).add(&b.lift_order(12))
        );
    }

    #[test]
    fn to_complex_examples() {
        let i = CycNum::root(4, 1).to_complex();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        // zeta_3 - zeta_3^2 = i*sqrt(3)
        let d = CycNum::root(3, 1).sub(&CycNum::root(3, 2)).to_complex();
        assert!((d - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn to_complex_is_a_ring_homomorphism_on_samples() {
        // pseudo-random small elements of Q(zeta_12)
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 13) as i64 - 6
        };
        for _ in 0..50 {
            let mk = |next: &mut dyn FnMut() -> i64| {
                let mut c = CycNum::zero(12);
                for k in 0..4 {
                    c = c.add(&CycNum::root(12, k).scale(&q(next(), 1 + next().abs())));
                }
                c
            };
            let a = mk(&mut next);
            let b = mk(&mut next);
            let lhs = a.mul(&b).to_complex();
            let rhs = a.to_complex() * b.to_complex();
            assert!((lhs - rhs).norm() < 1e-9, "mul homomorphism failed");
            let lhs = a.add(&b).to_complex();
            let rhs = a.to_complex() + b.to_complex();
            assert!((lhs - rhs).norm() < 1e-9, "add homomorphism failed");
        }
    }

    #[test]
    fn root_of_unity_power_sums_cancel() {
        // sum_{k in Z_n} zeta_n^{p k} = n when n | p, else 0, for 0 <= p < 3n
        for n in [1u32, 2, 3, 4, 6] {
            for p in 0..(3 * n) {
                let mut acc = CycNum::zero(n);
                for k in 0..n {
                    acc = acc.add(&CycNum::root(n, (p * k) as i64));
                }
                if p % n == 0 {
                    assert_eq!(acc, CycNum::from_int(n, n as i64));
                } else {
                    assert!(acc.is_zero(), "n={} p={} gave {}", n, p, acc);
                }
            }
        }
    }

    #[test]
    fn modulus_root_identities() {
        for m in [1u32, 2, 3, 4, 5, 6, 8, 12, 20] {
            let z = CycNum::root(m, 1);
            assert!(z.pow(m as i64).is_one());
            // Phi_m(zeta_m) = 0
            let phi = cyclotomic_polynomial(m);
            let mut acc = CycNum::zero(m);
            for (k, c) in phi.iter().enumerate() {
                acc = acc.add(
                    &CycNum::root(m, k as i64).scale(&BigRational::from_integer(c.clone())),
                );
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn conjugation_inverts_roots() {
        for k in 0..12 {
            assert_eq!(CycNum::root(12, k).conj(), CycNum::root(12, -k));
        }
        let a = CycNum::root(12, 5).add(&CycNum::from_ratio(12, 3, 7));
        assert!(a.mul(&a.conj()).is_rational() || !a.mul(&a.conj()).is_zero());
    }

    #[test]
    fn random_inverses_multiply_to_one() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 33) % 9) as i64 - 4
        };
        for m in [3u32, 4, 12] {
            for _ in 0..20 {
                let mut c = CycNum::zero(m);
                for k in 0..euler_phi(m) as i64 {
                    c = c.add(&CycNum::root(m, k).scale(&q(next(), 1)));
                }
                if c.is_zero() {
                    continue;
                }
                assert!(c.mul(&c.inverse().unwrap()).is_one());
            }
        }
    }
}
