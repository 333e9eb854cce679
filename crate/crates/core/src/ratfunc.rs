//! Rational functions as exact numerator/denominator pairs, plus evaluation,
//! substitution, derivatives, and a seeded Jacobian rank probe.
//!
//! No multivariate gcd is attempted: equality is decided by cross
//! multiplication, which is exact because the coefficient rings are integral
//! domains. Construction normalizes the denominator's leading coefficient to
//! one so that equal construction paths give identical bytes.

use crate::cyc::CycRat;
use crate::error::{Error, Result};
use crate::poly::{same_ring, Poly, Ring};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub struct RatFunc {
    den: Poly,
    num: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        assert!(same_ring(num.ring(), den.ring()), "mixed rings");
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let lead = den.leading().expect("nonzero denominator").1.clone();
        if lead.is_one() {
            return Ok(RatFunc { den, num });
        }
        let inv = lead.inverse()?;
        Ok(RatFunc { den: den.scale(&inv), num: num.scale(&inv) })
    }

    pub fn from_poly(num: Poly) -> RatFunc {
        let den = Poly::one(num.ring());
        RatFunc { den, num }
    }

    pub fn zero(ring: &Arc<Ring>) -> RatFunc {
        Self::from_poly(Poly::zero(ring))
    }

    pub fn one(ring: &Arc<Ring>) -> RatFunc {
        Self::from_poly(Poly::one(ring))
    }

    pub fn constant(ring: &Arc<Ring>, c: CycRat) -> RatFunc {
        Self::from_poly(Poly::constant(ring, c))
    }

    pub fn var(ring: &Arc<Ring>, i: usize) -> RatFunc {
        Self::from_poly(Poly::var(ring, i))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn ring(&self) -> &Arc<Ring> {
        self.num.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn num_terms(&self) -> usize {
        self.num.num_terms() + self.den.num_terms()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("product of nonzero denominators")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { den: self.den.clone(), num: self.num.neg() }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("product of nonzero denominators")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn inverse(&self) -> Result<RatFunc> {
        if self.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &CycRat) -> RatFunc {
        RatFunc { den: self.den.clone(), num: self.num.scale(c) }
    }

    pub fn pow(&self, e: i64) -> Result<RatFunc> {
        if e >= 0 {
            Ok(RatFunc { den: self.den.pow(e as u32), num: self.num.pow(e as u32) })
        } else {
            let inv = self.inverse()?;
            Ok(RatFunc { den: inv.den.pow((-e) as u32), num: inv.num.pow((-e) as u32) })
        }
    }

    pub fn eval(&self, point: &[CycRat]) -> Result<CycRat> {
        let dv = self.den.eval(point)?;
        if dv.is_zero() {
            return Err(Error::DenominatorVanishes { context: "point evaluation".into() });
        }
        self.num.eval(point)?.div(&dv)
    }

    pub fn derivative(&self, var: usize) -> Result<RatFunc> {
        let num = self
            .num
            .derivative(var)?
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(var)?));
        let den = self.den.mul(&self.den);
        RatFunc::new(num, den)
    }

    /// Replace variable i by `images[i]`. All images must live over one
    /// common ring. When the source ring carries a root-adjunction rule, the
    /// images are required to satisfy the same relation, which makes the
    /// substitution a well-defined ring map on the quotient.
    pub fn substitute(&self, images: &[RatFunc]) -> Result<RatFunc> {
        let src = self.ring();
        assert_eq!(images.len(), src.nvars(), "one image per variable required");
        let target = images[0].ring().clone();
        for im in images {
            assert!(same_ring(im.ring(), &target), "mixed image rings");
        }
        if let Some(rw) = &src.rewrite {
            let lhs = images[rw.var].pow(rw.power as i64)?;
            let mut rhs = RatFunc::one(&target);
            for (i, &e) in rw.replacement.0.iter().enumerate() {
                if e > 0 {
                    rhs = rhs.mul(&images[i].pow(e as i64)?);
                }
            }
            if lhs != rhs {
                return Err(Error::UnsupportedOperation(
                    "substitution images violate the root relation of the source ring".into(),
                ));
            }
        }
        let num = eval_poly_at(&self.num, images, &target)?;
        let den = eval_poly_at(&self.den, images, &target)?;
        if den.is_zero() {
            return Err(Error::DenominatorVanishes { context: "substitution".into() });
        }
        num.div(&den)
    }
}

/// Evaluate a polynomial at rational-function arguments.
fn eval_poly_at(poly: &Poly, images: &[RatFunc], target: &Arc<Ring>) -> Result<RatFunc> {
    // Cache powers per variable up to the largest exponent that occurs.
    let nvars = images.len();
    let mut max_e = vec![0u32; nvars];
    for (m, _) in poly.terms() {
        for (i, &e) in m.0.iter().enumerate() {
            max_e[i] = max_e[i].max(e);
        }
    }
    let mut powers: Vec<Vec<RatFunc>> = Vec::with_capacity(nvars);
    for (i, im) in images.iter().enumerate() {
        let mut col = vec![RatFunc::one(target)];
        for e in 1..=max_e[i] {
            let next = col[(e - 1) as usize].mul(im);
            col.push(next);
        }
        powers.push(col);
    }
    let mut acc = RatFunc::zero(target);
    for (m, c) in poly.terms() {
        let mut term = RatFunc::constant(target, translate_coeff(c, target.p));
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                term = term.mul(&powers[i][e as usize]);
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Coefficients keep their cyclotomic level across substitution; source and
/// target must agree on it.
fn translate_coeff(c: &CycRat, target_p: usize) -> CycRat {
    assert_eq!(c.p(), target_p, "substitution across coefficient fields");
    c.clone()
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        assert!(same_ring(self.ring(), other.ring()), "mixed rings");
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFunc {}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self)
    }
}

#[derive(Serialize)]
struct RatFuncOut<'a> {
    den: &'a Poly,
    num: &'a Poly,
}

#[derive(Deserialize)]
struct RatFuncIn {
    den: Poly,
    num: Poly,
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RatFuncOut { den: &self.den, num: &self.num }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RatFuncIn::deserialize(deserializer)?;
        if !same_ring(raw.num.ring(), raw.den.ring()) {
            return Err(D::Error::custom("numerator and denominator rings differ"));
        }
        RatFunc::new(raw.num, raw.den).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Deterministic splittable PRNG used wherever randomness is needed; the
/// stream depends only on the seed.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from 1..=bound.
    pub fn next_in(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound + 1
    }
}

pub const DEFAULT_JACOBIAN_SEED: u64 = 0x5EED;
const JACOBIAN_ATTEMPTS: usize = 4;

/// Rank of the Jacobian matrix of `funcs` evaluated at seeded random integer
/// points. The returned value is the maximum over a few points, hence a
/// certified lower bound for the generic rank (and exact whenever it reaches
/// the row count). Points where any denominator vanishes are skipped.
pub fn jacobian_rank_at(funcs: &[RatFunc], seed: u64) -> Result<usize> {
    assert!(!funcs.is_empty(), "rank of an empty family");
    let ring = funcs[0].ring().clone();
    for f in funcs {
        assert!(same_ring(f.ring(), &ring), "mixed rings");
    }
    let nvars = ring.nvars();
    let mut partials: Vec<Vec<RatFunc>> = Vec::with_capacity(funcs.len());
    for f in funcs {
        let row = (0..nvars).map(|v| f.derivative(v)).collect::<Result<Vec<_>>>()?;
        partials.push(row);
    }
    let mut rng = SplitMix64::new(seed);
    let mut best = 0usize;
    let mut usable = 0usize;
    for _ in 0..JACOBIAN_ATTEMPTS {
        let point: Vec<CycRat> =
            (0..nvars).map(|_| CycRat::from_integer(rng.next_in(10007) as i64, ring.p)).collect();
        let mut rows = Vec::with_capacity(funcs.len());
        let mut singular = false;
        'rows: for row in &partials {
            let mut vals = Vec::with_capacity(nvars);
            for f in row {
                match f.eval(&point) {
                    Ok(v) => vals.push(v),
                    Err(_) => {
                        singular = true;
                        break 'rows;
                    }
                }
            }
            rows.push(vals);
        }
        if singular {
            continue;
        }
        usable += 1;
        best = best.max(matrix_rank(rows));
        if best == funcs.len().min(nvars) {
            return Ok(best);
        }
    }
    if usable == 0 {
        return Err(Error::EvaluationSingular { attempts: JACOBIAN_ATTEMPTS });
    }
    Ok(best)
}

/// Exact Gaussian elimination over the cyclotomic field.
pub fn matrix_rank(mut rows: Vec<Vec<CycRat>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inverse().expect("nonzero pivot");
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].mul(&inv);
            for c in col..ncols {
                let delta = factor.mul(&rows[rank][c]);
                rows[r][c] = rows[r][c].sub(&delta);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
