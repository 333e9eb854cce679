//! Exact arithmetic in the p-th cyclotomic field Q(z), z a primitive p-th
//! root of unity, with coordinates over the power basis z^0 .. z^(p-2) and
//! the relation z^(p-1) = -(1 + z + ... + z^(p-2)).

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// An element of Q(z). `coeffs` has length p-1; entry k is the coordinate of
/// z^k. For p = 2 the single coordinate is an ordinary rational (z = -1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycRat {
    p: usize,
    coeffs: Vec<BigRational>,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl CycRat {
    pub fn zero(p: usize) -> Self {
        CycRat { p, coeffs: vec![BigRational::zero(); p - 1] }
    }

    pub fn one(p: usize) -> Self {
        let mut c = Self::zero(p);
        c.coeffs[0] = BigRational::one();
        c
    }

    pub fn from_rational(r: BigRational, p: usize) -> Self {
        let mut c = Self::zero(p);
        c.coeffs[0] = r;
        c
    }

    pub fn from_integer(n: i64, p: usize) -> Self {
        Self::from_rational(big(n), p)
    }

    pub fn from_ratio(num: i64, den: i64, p: usize) -> Self {
        Self::from_rational(big(num) / big(den), p)
    }

    /// z^k, reduced into the power basis.
    pub fn zeta_pow(p: usize, k: i64) -> Self {
        let k = k.rem_euclid(p as i64) as usize;
        let mut c = Self::zero(p);
        if k == p - 1 {
            for e in c.coeffs.iter_mut() {
                *e = -BigRational::one();
            }
        } else {
            c.coeffs[k] = BigRational::one();
        }
        c
    }

    pub fn zeta(p: usize) -> Self {
        Self::zeta_pow(p, 1)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
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

    fn check_compatible(&self, other: &CycRat) {
        assert_eq!(self.p, other.p, "mixed cyclotomic fields");
    }

    pub fn add(&self, other: &CycRat) -> CycRat {
        self.check_compatible(other);
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        CycRat { p: self.p, coeffs }
    }

    pub fn sub(&self, other: &CycRat) -> CycRat {
        self.check_compatible(other);
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        CycRat { p: self.p, coeffs }
    }

    pub fn neg(&self) -> CycRat {
        CycRat { p: self.p, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &CycRat) -> CycRat {
        self.check_compatible(other);
        let p = self.p;
        let mut raw = vec![BigRational::zero(); 2 * (p - 1) - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[i + j] += a * b;
            }
        }
        Self::reduce(p, raw)
    }

    pub fn mul_rational(&self, r: &BigRational) -> CycRat {
        CycRat { p: self.p, coeffs: self.coeffs.iter().map(|a| a * r).collect() }
    }

    /// Fold powers z^m with m >= p-1 into the basis using z^p = 1 and
    /// z^(p-1) = -(1 + ... + z^(p-2)).
    fn reduce(p: usize, raw: Vec<BigRational>) -> CycRat {
        let mut coeffs = vec![BigRational::zero(); p - 1];
        for (m, c) in raw.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = m % p;
            if e == p - 1 {
                for slot in coeffs.iter_mut() {
                    *slot -= &c;
                }
            } else {
                coeffs[e] += &c;
            }
        }
        CycRat { p, coeffs }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// the p-th cyclotomic polynomial 1 + x + ... + x^(p-1).
    pub fn inverse(&self) -> Result<CycRat> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p;
        let phi: Vec<BigRational> = vec![BigRational::one(); p];
        let mut r0 = phi;
        let mut r1 = self.coeffs.clone();
        let mut t0: Vec<BigRational> = vec![];
        let mut t1: Vec<BigRational> = vec![BigRational::one()];
        while poly_degree(&r1).map_or(false, |d| d > 0) {
            let (q, r) = poly_divmod(&r0, &r1);
            let next_t = poly_sub(&t0, &poly_mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, next_t);
        }
        if poly_degree(&r1).is_none() {
            // gcd jumped past a constant: impossible for irreducible modulus.
            return Err(Error::DivisionByZero);
        }
        let c = r1[0].clone();
        let mut raw: Vec<BigRational> = t1.iter().map(|t| t / &c).collect();
        raw.resize(2 * (p - 1) - 1, BigRational::zero());
        let inv = Self::reduce(p, raw);
        debug_assert!(self.mul(&inv).is_one());
        Ok(inv)
    }

    pub fn div(&self, other: &CycRat) -> Result<CycRat> {
        Ok(self.mul(&other.inverse()?))
    }

    /// The field automorphism z -> z^k, for k not divisible by p.
    pub fn galois(&self, k: usize) -> Result<CycRat> {
        let p = self.p;
        if k % p == 0 {
            return Err(Error::UnsupportedOperation(format!(
                "z -> z^{k} is not an automorphism when p divides k"
            )));
        }
        let mut out = Self::zero(p);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let target = Self::zeta_pow(p, (j * k) as i64).mul_rational(c);
            out = out.add(&target);
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> CycRat {
        let mut acc = Self::one(self.p);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

fn poly_degree(a: &[BigRational]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (k, slot) in out.iter_mut().enumerate() {
        let av = a.get(k).cloned().unwrap_or_else(BigRational::zero);
        let bv = b.get(k).cloned().unwrap_or_else(BigRational::zero);
        *slot = av - bv;
    }
    out
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, av) in a.iter().enumerate() {
        if av.is_zero() {
            continue;
        }
        for (j, bv) in b.iter().enumerate() {
            out[i + j] += av * bv;
        }
    }
    out
}

/// Division with remainder over Q[x]; `b` must be nonzero.
fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let db = poly_degree(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut rem: Vec<BigRational> = a.to_vec();
    let mut quot = vec![BigRational::zero(); a.len().saturating_sub(db) + 1];
    while let Some(da) = poly_degree(&rem) {
        if da < db {
            break;
        }
        let factor = &rem[da] / &lead;
        let shift = da - db;
        quot[shift] = factor.clone();
        for (k, bv) in b.iter().enumerate().take(db + 1) {
            let delta = &factor * bv;
            rem[shift + k] -= delta;
        }
    }
    (quot, rem)
}

pub fn display_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let negative = c.is_negative();
            if first {
                if negative {
                    write!(f, "-")?;
                }
                first = false;
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let power = match k {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{k}"),
            };
            if k == 0 {
                write!(f, "{}", display_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{power}")?;
            } else {
                write!(f, "{}*{power}", display_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycRat(p={}, {})", self.p, self)
    }
}

impl Serialize for CycRat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(display_rational).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycRat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let p = strings.len() + 1;
        if !crate::perm::is_prime(p) {
            return Err(D::Error::custom(format!(
                "coefficient vector of length {} does not match a prime field degree",
                strings.len()
            )));
        }
        let coeffs = strings
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(|e| D::Error::custom(format!("{s}: {e}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CycRat { p, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_powers_sum_to_zero() {
        for p in [2, 3, 5, 7] {
            let mut acc = CycRat::zero(p);
            for k in 0..p as i64 {
                acc = acc.add(&CycRat::zeta_pow(p, k));
            }
            assert!(acc.is_zero(), "p={p}");
        }
    }

    #[test]
    fn zeta_has_multiplicative_order_p() {
        for p in [2, 3, 5, 7] {
            let z = CycRat::zeta(p);
            assert!(z.pow(p as u32).is_one());
            for e in 1..p as u32 {
                assert!(!z.pow(e).is_one(), "p={p} e={e}");
            }
        }
    }

    #[test]
    fn p_equals_two_behaves_like_signed_rationals() {
        let z = CycRat::zeta(2);
        assert_eq!(z, CycRat::from_integer(-1, 2));
        let a = CycRat::from_ratio(3, 4, 2);
        assert_eq!(a.mul(&z), CycRat::from_ratio(-3, 4, 2));
    }

    #[test]
    fn inverse_multiplies_back_to_one() {
        let samples = [
            CycRat::one(5),
            CycRat::from_integer(7, 5),
            CycRat::zeta(5),
            CycRat::one(5).add(&CycRat::zeta(5).mul_rational(&big(2))),
            CycRat::zeta_pow(5, 3).sub(&CycRat::from_ratio(1, 3, 5)),
        ];
        for a in &samples {
            let inv = a.inverse().unwrap();
            assert!(a.mul(&inv).is_one(), "{a}");
        }
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert!(matches!(CycRat::zero(3).inverse(), Err(Error::DivisionByZero)));
    }

    /// Frozen: the product of (1 - z^k) over k = 1..p-1 equals p.
    #[test]
    fn product_of_one_minus_conjugates_is_p() {
        for p in [3, 5, 7] {
            let one = CycRat::one(p);
            let mut acc = one.clone();
            for k in 1..p as i64 {
                acc = acc.mul(&one.sub(&CycRat::zeta_pow(p, k)));
            }
            assert_eq!(acc, CycRat::from_integer(p as i64, p), "p={p}");
        }
    }

    /// Frozen: the norm of z - 1 for odd p equals p (an even number of
    /// sign flips relative to 1 - z^k).
    #[test]
    fn norm_of_zeta_minus_one_is_p_for_odd_p() {
        for p in [3, 5, 7] {
            let a = CycRat::zeta(p).sub(&CycRat::one(p));
            let mut acc = CycRat::one(p);
            for k in 1..p {
                acc = acc.mul(&a.galois(k).unwrap());
            }
            assert_eq!(acc, CycRat::from_integer(p as i64, p), "p={p}");
        }
    }

    #[test]
    fn galois_maps_are_ring_homomorphisms_and_compose() {
        let p = 7;
        let a = CycRat::zeta(p).add(&CycRat::from_integer(2, p));
        let b = CycRat::zeta_pow(p, 4).sub(&CycRat::from_ratio(5, 3, p));
        for k in 1..p {
            let lhs = a.mul(&b).galois(k).unwrap();
            let rhs = a.galois(k).unwrap().mul(&b.galois(k).unwrap());
            assert_eq!(lhs, rhs);
            let sum = a.add(&b).galois(k).unwrap();
            assert_eq!(sum, a.galois(k).unwrap().add(&b.galois(k).unwrap()));
        }
        for k in 1..p {
            for l in 1..p {
                let once = a.galois(k).unwrap().galois(l).unwrap();
                let joint = a.galois(k * l % p).unwrap();
                assert_eq!(once, joint);
            }
        }
    }

    #[test]
    fn arithmetic_laws_on_samples() {
        let p = 5;
        let xs = [
            CycRat::zeta(p),
            CycRat::from_ratio(-2, 7, p),
            CycRat::zeta_pow(p, 4).add(&CycRat::from_integer(3, p)),
        ];
        for a in &xs {
            for b in &xs {
                assert_eq!(a.mul(b), b.mul(a));
                assert_eq!(a.add(b), b.add(a));
                for c in &xs {
                    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
                    assert_eq!(a.mul(&b.mul(c)), a.mul(b).mul(c));
                }
            }
        }
    }

    #[test]
    fn display_is_canonical() {
        let p = 5;
        let a = CycRat::from_ratio(-3, 2, p)
            .add(&CycRat::zeta(p))
            .sub(&CycRat::zeta_pow(p, 3).mul_rational(&big(2)));
        assert_eq!(a.to_string(), "-3/2 + z - 2*z^3");
        assert_eq!(CycRat::zero(3).to_string(), "0");
        assert_eq!(CycRat::zeta_pow(3, 2).to_string(), "-1 - z");
    }

    #[test]
    fn serde_round_trip() {
        let a = CycRat::from_ratio(-3, 2, 5).add(&CycRat::zeta_pow(5, 2));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[\"-3/2\",\"0\",\"1\",\"0\"]");
        let back: CycRat = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
        assert!(serde_json::from_str::<CycRat>("[\"1\",\"0\",\"0\"]").is_err());
    }
}
