//! Sparse multivariate polynomials with cyclotomic-rational coefficients.
//!
//! A `Ring` fixes the coefficient field Q(z_p), the ordered variable list,
//! and optionally one monic rewrite rule `v^q -> monomial` presenting the
//! quotient by `v^q - monomial`. With the rule our quotients are integral
//! domains that are free modules over the rewrite-free subring with basis
//! v^0 .. v^(q-1), so the reduced form is canonical and the zero test exact.

use crate::cyc::CycRat;
use crate::error::{Error, Result};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Exponent vector; ordered by total degree first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn unit(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::unit(nvars);
        m.0[i] = 1;
        m
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        assert_eq!(self.0.len(), other.0.len(), "mixed variable lists");
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Monic rewrite rule: `vars[var]^power` equals the `replacement` monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rewrite {
    pub power: u32,
    pub replacement: Mono,
    pub var: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ring {
    /// Cyclotomic level of the coefficient field Q(z_p).
    pub p: usize,
    pub rewrite: Option<Rewrite>,
    pub vars: Vec<String>,
}

impl Ring {
    pub fn free(p: usize, vars: Vec<String>) -> Arc<Ring> {
        Arc::new(Ring { p, rewrite: None, vars })
    }

    pub fn with_root(
        p: usize,
        vars: Vec<String>,
        var: usize,
        power: u32,
        replacement: Mono,
    ) -> Result<Arc<Ring>> {
        if var >= vars.len() || replacement.0.len() != vars.len() {
            return Err(Error::MalformedCertificate("rewrite rule indices out of range".into()));
        }
        if power < 2 || replacement.0[var] != 0 {
            return Err(Error::MalformedCertificate(
                "rewrite rule must be a proper monic root adjunction".into(),
            ));
        }
        Ok(Arc::new(Ring { p, rewrite: Some(Rewrite { power, replacement, var }), vars }))
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !crate::perm::is_prime(self.p) {
            return Err(format!("coefficient level {} is not prime", self.p));
        }
        if let Some(rw) = &self.rewrite {
            if rw.var >= self.vars.len()
                || rw.replacement.0.len() != self.vars.len()
                || rw.power < 2
                || rw.replacement.0[rw.var] != 0
            {
                return Err("rewrite rule is inconsistent with the variable list".into());
            }
        }
        Ok(())
    }

    /// Reduce a monomial modulo the rewrite rule, if any.
    fn reduce_mono(&self, mut m: Mono) -> Mono {
        if let Some(rw) = &self.rewrite {
            while m.0[rw.var] >= rw.power {
                m.0[rw.var] -= rw.power;
                m = m.mul(&rw.replacement);
            }
        }
        m
    }
}

pub fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A reduced polynomial: monomials all strictly below the rewrite power in
/// the adjoined variable, coefficients nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ring: Arc<Ring>,
    terms: BTreeMap<Mono, CycRat>,
}

impl Poly {
    pub fn zero(ring: &Arc<Ring>) -> Poly {
        Poly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: CycRat) -> Poly {
        assert_eq!(c.p(), ring.p, "coefficient field mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::unit(ring.nvars()), c);
        }
        Poly { ring: ring.clone(), terms }
    }

    pub fn one(ring: &Arc<Ring>) -> Poly {
        Self::constant(ring, CycRat::one(ring.p))
    }

    pub fn integer(ring: &Arc<Ring>, n: i64) -> Poly {
        Self::constant(ring, CycRat::from_integer(n, ring.p))
    }

    pub fn var(ring: &Arc<Ring>, i: usize) -> Poly {
        assert!(i < ring.nvars(), "variable index out of range");
        Self::monomial(ring, Mono::var(ring.nvars(), i), CycRat::one(ring.p))
    }

    pub fn monomial(ring: &Arc<Ring>, mono: Mono, coeff: CycRat) -> Poly {
        assert_eq!(mono.0.len(), ring.nvars(), "monomial width mismatch");
        assert_eq!(coeff.p(), ring.p, "coefficient field mismatch");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(ring.reduce_mono(mono), coeff);
        }
        Poly { ring: ring.clone(), terms }
    }

    pub fn from_terms(ring: &Arc<Ring>, list: Vec<(Mono, CycRat)>) -> Poly {
        let mut acc = Poly::zero(ring);
        for (m, c) in list {
            acc = acc.add(&Self::monomial(ring, m, c));
        }
        acc
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &CycRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::unit(self.ring.nvars()))
                .map_or(false, |c| c.is_one())
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    pub fn leading(&self) -> Option<(&Mono, &CycRat)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Mono) -> CycRat {
        self.terms.get(m).cloned().unwrap_or_else(|| CycRat::zero(self.ring.p))
    }

    fn check_ring(&self, other: &Poly) {
        assert!(same_ring(&self.ring, &other.ring), "mixed rings");
    }

    fn insert(terms: &mut BTreeMap<Mono, CycRat>, m: Mono, c: CycRat) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_ring(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert(&mut terms, m.clone(), c.clone());
        }
        Poly { ring: self.ring.clone(), terms }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect();
        Poly { ring: self.ring.clone(), terms }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_ring(other);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = self.ring.reduce_mono(ma.mul(mb));
                Self::insert(&mut terms, m, ca.mul(cb));
            }
        }
        Poly { ring: self.ring.clone(), terms }
    }

    pub fn scale(&self, c: &CycRat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ring);
        }
        let terms = self.terms.iter().map(|(m, k)| (m.clone(), k.mul(c))).collect();
        Poly { ring: self.ring.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
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

    /// Partial derivative; defined only on rewrite-free rings, where the
    /// monomial basis is genuinely free.
    pub fn derivative(&self, var: usize) -> Result<Poly> {
        if self.ring.rewrite.is_some() {
            return Err(Error::UnsupportedOperation(
                "derivative on a ring with a root adjunction".into(),
            ));
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] = e - 1;
            let scaled = c.mul(&CycRat::from_integer(e as i64, self.ring.p));
            Self::insert(&mut terms, m2, scaled);
        }
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    /// Evaluate at a numeric point; defined only on rewrite-free rings.
    pub fn eval(&self, point: &[CycRat]) -> Result<CycRat> {
        if self.ring.rewrite.is_some() {
            return Err(Error::UnsupportedOperation(
                "evaluation on a ring with a root adjunction".into(),
            ));
        }
        assert_eq!(point.len(), self.ring.nvars(), "point width mismatch");
        let mut acc = CycRat::zero(self.ring.p);
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&point[i].pow(e));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Elementary symmetric polynomial e_k in the chosen variables.
    pub fn elementary_symmetric(ring: &Arc<Ring>, k: usize, vars: &[usize]) -> Poly {
        let mut e: Vec<Poly> = vec![Poly::zero(ring); k + 1];
        e[0] = Poly::one(ring);
        for &v in vars {
            let xv = Poly::var(ring, v);
            for j in (1..=k).rev() {
                let bump = e[j - 1].mul(&xv);
                e[j] = e[j].add(&bump);
            }
        }
        e.pop().expect("k+1 slots")
    }
}

fn format_mono(ring: &Ring, m: &Mono) -> String {
    let factors: Vec<String> = m
        .0
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                ring.vars[i].clone()
            } else {
                format!("{}^{}", ring.vars[i], e)
            }
        })
        .collect();
    factors.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mono = format_mono(&self.ring, m);
            match c.as_rational() {
                Some(r) => {
                    use num_traits::{One, Signed};
                    let mag = r.abs();
                    let neg = r.is_negative();
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
                    if mono.is_empty() {
                        write!(f, "{}", crate::cyc::display_rational(&mag))?;
                    } else if mag.is_one() {
                        write!(f, "{mono}")?;
                    } else {
                        write!(f, "{}*{mono}", crate::cyc::display_rational(&mag))?;
                    }
                }
                None => {
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    if mono.is_empty() {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "({c})*{mono}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

#[derive(Serialize)]
struct TermOut<'a> {
    coeff: &'a CycRat,
    mono: &'a Mono,
}

#[derive(Deserialize)]
struct TermIn {
    coeff: CycRat,
    mono: Mono,
}

#[derive(Serialize)]
struct PolyOut<'a> {
    ring: &'a Ring,
    terms: Vec<TermOut<'a>>,
}

#[derive(Deserialize)]
struct PolyIn {
    ring: Ring,
    terms: Vec<TermIn>,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let out = PolyOut {
            ring: &self.ring,
            terms: self.terms.iter().map(|(m, c)| TermOut { coeff: c, mono: m }).collect(),
        };
        out.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyIn::deserialize(deserializer)?;
        raw.ring.validate().map_err(D::Error::custom)?;
        let ring = Arc::new(raw.ring);
        let mut acc = Poly::zero(&ring);
        for t in raw.terms {
            if t.mono.0.len() != ring.nvars() {
                return Err(D::Error::custom("monomial width does not match the ring"));
            }
            if t.coeff.p() != ring.p {
                return Err(D::Error::custom("coefficient field does not match the ring"));
            }
            acc = acc.add(&Poly::monomial(&ring, t.mono, t.coeff));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy_ring() -> Arc<Ring> {
        Ring::free(2, vec!["x".into(), "y".into()])
    }

    #[test]
    fn graded_lex_order_is_frozen() {
        let r = xy_ring();
        let p = Poly::var(&r, 0)
            .pow(2)
            .add(&Poly::var(&r, 0).mul(&Poly::var(&r, 1)))
            .add(&Poly::var(&r, 1).pow(2))
            .add(&Poly::var(&r, 0))
            .add(&Poly::one(&r));
        assert_eq!(p.to_string(), "x^2 + x*y + y^2 + x + 1");
        assert_eq!(p.leading().unwrap().0, &Mono(vec![2, 0]));
    }

    #[test]
    fn binomial_square_expands() {
        let r = xy_ring();
        let s = Poly::var(&r, 0).add(&Poly::var(&r, 1));
        assert_eq!(s.pow(2).to_string(), "x^2 + 2*x*y + y^2");
        assert_eq!(s.sub(&s).to_string(), "0");
    }

    #[test]
    fn elementary_symmetric_expansions() {
        let r = Ring::free(2, vec!["x1".into(), "x2".into(), "x3".into()]);
        let e2 = Poly::elementary_symmetric(&r, 2, &[0, 1, 2]);
        assert_eq!(e2.to_string(), "x1*x2 + x1*x3 + x2*x3");
        let e3 = Poly::elementary_symmetric(&r, 3, &[0, 1, 2]);
        assert_eq!(e3.to_string(), "x1*x2*x3");
        let e0 = Poly::elementary_symmetric(&r, 0, &[0, 1, 2]);
        assert!(e0.is_one());
    }

    /// Newton's identity p2 = e1^2 - 2 e2 as an exact polynomial identity.
    #[test]
    fn newton_identity_degree_two() {
        let r = Ring::free(2, vec!["x1".into(), "x2".into(), "x3".into()]);
        let e1 = Poly::elementary_symmetric(&r, 1, &[0, 1, 2]);
        let e2 = Poly::elementary_symmetric(&r, 2, &[0, 1, 2]);
        let power_sum = (0..3).map(|i| Poly::var(&r, i).pow(2)).fold(Poly::zero(&r), |a, b| a.add(&b));
        let rhs = e1.pow(2).sub(&e2.scale(&CycRat::from_integer(2, 2)));
        assert_eq!(power_sum, rhs);
    }

    fn root_ring() -> Arc<Ring> {
        // x1, x2, x3, w with w^3 = x1*x2*x3.
        Ring::with_root(
            3,
            vec!["x1".into(), "x2".into(), "x3".into(), "w".into()],
            3,
            3,
            Mono(vec![1, 1, 1, 0]),
        )
        .unwrap()
    }

    #[test]
    fn rewrite_reduces_high_root_powers() {
        let r = root_ring();
        let w = Poly::var(&r, 3);
        let w4 = w.pow(4);
        assert_eq!(w4.to_string(), "x1*x2*x3*w");
        // w^3 - x1*x2*x3 is exactly zero in the quotient.
        let rel = w.pow(3).sub(&Poly::from_terms(
            &r,
            vec![(Mono(vec![1, 1, 1, 0]), CycRat::one(3))],
        ));
        assert!(rel.is_zero());
    }

    #[test]
    fn quotient_keeps_low_powers_free() {
        let r = root_ring();
        let w = Poly::var(&r, 3);
        for e in 0..3 {
            let p = w.pow(e);
            assert_eq!(p.num_terms(), 1);
            assert_eq!(p.leading().unwrap().0 .0[3], e);
        }
    }

    #[test]
    fn derivative_and_eval_are_free_ring_only() {
        let r = root_ring();
        let w = Poly::var(&r, 3);
        assert!(w.derivative(3).is_err());
        assert!(w.eval(&[CycRat::one(3), CycRat::one(3), CycRat::one(3), CycRat::one(3)]).is_err());
    }

    #[test]
    fn derivative_satisfies_product_rule() {
        let r = xy_ring();
        let f = Poly::var(&r, 0).pow(3).add(&Poly::var(&r, 1).scale(&CycRat::from_integer(5, 2)));
        let g = Poly::var(&r, 0).mul(&Poly::var(&r, 1)).add(&Poly::one(&r));
        let lhs = f.mul(&g).derivative(0).unwrap();
        let rhs = f.derivative(0).unwrap().mul(&g).add(&f.mul(&g.derivative(0).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_matches_hand_computation() {
        let r = xy_ring();
        // x^2*y - 3*y at (2, 5): 4*5 - 15 = 5.
        let f = Poly::var(&r, 0)
            .pow(2)
            .mul(&Poly::var(&r, 1))
            .sub(&Poly::var(&r, 1).scale(&CycRat::from_integer(3, 2)));
        let v = f.eval(&[CycRat::from_integer(2, 2), CycRat::from_integer(5, 2)]).unwrap();
        assert_eq!(v, CycRat::from_integer(5, 2));
    }

    #[test]
    fn cyclotomic_coefficients_display_in_parentheses() {
        let r = Ring::free(3, vec!["t".into()]);
        let z = CycRat::zeta(3);
        let f = Poly::var(&r, 0).scale(&z).add(&Poly::one(&r));
        assert_eq!(f.to_string(), "(z)*t + 1");
    }

    #[test]
    fn serde_round_trip_with_rewrite() {
        let r = root_ring();
        let f = Poly::var(&r, 3).pow(4).add(&Poly::var(&r, 0).scale(&CycRat::zeta(3)));
        let json = serde_json::to_string(&f).unwrap();
        let back: Poly = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn serde_rejects_width_mismatch() {
        let r = xy_ring();
        let f = Poly::var(&r, 0);
        let mut v: serde_json::Value = serde_json::to_value(&f).unwrap();
        v["terms"][0]["mono"] = serde_json::json!([1, 0, 0]);
        assert!(serde_json::from_value::<Poly>(v).is_err());
    }
}
