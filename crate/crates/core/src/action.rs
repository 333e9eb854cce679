//! Monomial field actions: each variable maps to a nonzero scalar times a
//! variable. These cover everything the towers need, since the relevant
//! group actions permute coordinates and multiply distinguished variables by
//! roots of unity.

use crate::cyc::CycRat;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::poly::{Mono, Poly, Ring};
use crate::ratfunc::RatFunc;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

/// The action sending variable i to `scales[i] * x_{perm(i+1)}` (indices into
/// the ring's variable list; the permutation is on 1-based positions).
#[derive(Clone, PartialEq, Eq)]
pub struct MonomialAction {
    perm: Permutation,
    scales: Vec<CycRat>,
}

impl MonomialAction {
    pub fn new(perm: Permutation, scales: Vec<CycRat>) -> Result<Self> {
        if perm.degree() != scales.len() {
            return Err(Error::MalformedCertificate(format!(
                "action width mismatch: permutation degree {} vs {} scales",
                perm.degree(),
                scales.len()
            )));
        }
        if scales.iter().any(|s| s.is_zero()) {
            return Err(Error::MalformedCertificate("action scale must be nonzero".into()));
        }
        Ok(MonomialAction { perm, scales })
    }

    pub fn identity(nvars: usize, p: usize) -> Self {
        MonomialAction {
            perm: Permutation::identity(nvars),
            scales: vec![CycRat::one(p); nvars],
        }
    }

    /// Lift a point permutation to a scale-free variable action; variables
    /// beyond the permutation's degree stay fixed.
    pub fn from_permutation(g: &Permutation, nvars: usize, p: usize) -> Self {
        assert!(g.degree() <= nvars, "permutation wider than the variable list");
        let mut images: Vec<usize> = (1..=nvars).collect();
        for i in 1..=g.degree() {
            images[i - 1] = g.apply(i);
        }
        MonomialAction {
            perm: Permutation::from_images(images).expect("padded bijection"),
            scales: vec![CycRat::one(p); nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.scales.len()
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn scales(&self) -> &[CycRat] {
        &self.scales
    }

    pub fn is_identity(&self) -> bool {
        self.perm.is_identity() && self.scales.iter().all(|s| s.is_one())
    }

    /// Composition acting like function composition: (a.compose(b))(f) =
    /// a(b(f)) for the right action on functions defined by `act_poly`.
    pub fn compose(&self, other: &MonomialAction) -> MonomialAction {
        assert_eq!(self.nvars(), other.nvars(), "width mismatch");
        let perm = self.perm.compose(&other.perm);
        let scales = (0..self.nvars())
            .map(|i| {
                let through = other.perm.apply(i + 1) - 1;
                other.scales[i].mul(&self.scales[through])
            })
            .collect();
        MonomialAction { perm, scales }
    }

    pub fn inverse(&self) -> MonomialAction {
        let perm = self.perm.inverse();
        let scales = (0..self.nvars())
            .map(|j| {
                let src = perm.apply(j + 1) - 1;
                self.scales[src].inverse().expect("nonzero scale")
            })
            .collect();
        MonomialAction { perm, scales }
    }

    pub fn act_mono(&self, m: &Mono) -> (Mono, CycRat) {
        assert_eq!(m.0.len(), self.nvars(), "width mismatch");
        let p = self.scales[0].p();
        let mut out = vec![0u32; m.0.len()];
        let mut coeff = CycRat::one(p);
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            out[self.perm.apply(i + 1) - 1] += e;
            coeff = coeff.mul(&self.scales[i].pow(e));
        }
        (Mono(out), coeff)
    }

    pub fn act_poly(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(f.ring());
        for (m, c) in f.terms() {
            let (m2, factor) = self.act_mono(m);
            acc = acc.add(&Poly::monomial(f.ring(), m2, c.mul(&factor)));
        }
        acc
    }

    pub fn act_ratfunc(&self, f: &RatFunc) -> RatFunc {
        let num = self.act_poly(f.num());
        let den = self.act_poly(f.den());
        RatFunc::new(num, den).expect("monomial actions preserve nonzeroness")
    }

    /// Whether the action descends to the quotient presented by the ring's
    /// rewrite rule, i.e. maps the relation to a consequence of itself.
    pub fn is_automorphism_of(&self, ring: &Arc<Ring>) -> bool {
        if ring.nvars() != self.nvars() || ring.p != self.scales[0].p() {
            return false;
        }
        match &ring.rewrite {
            None => true,
            Some(rw) => {
                let v = Poly::var(ring, rw.var);
                let lhs = self.act_poly(&v).pow(rw.power);
                let rep = Poly::monomial(ring, rw.replacement.clone(), CycRat::one(ring.p));
                let rhs = self.act_poly(&rep);
                lhs == rhs
            }
        }
    }
}

impl fmt::Debug for MonomialAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonomialAction(perm={:?}, scales=[", self.perm)?;
        for (k, s) in self.scales.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "])")
    }
}

#[derive(Serialize)]
struct ActionOut<'a> {
    perm: &'a Permutation,
    scales: &'a [CycRat],
}

#[derive(Deserialize)]
struct ActionIn {
    perm: Permutation,
    scales: Vec<CycRat>,
}

impl Serialize for MonomialAction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ActionOut { perm: &self.perm, scales: &self.scales }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MonomialAction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ActionIn::deserialize(deserializer)?;
        MonomialAction::new(raw.perm, raw.scales).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{sylow_group, DEFAULT_ENUM_CAP};

    fn free_ring(n: usize, p: usize) -> Arc<Ring> {
        Ring::free(p, (1..=n).map(|i| format!("x{i}")).collect())
    }

    #[test]
    fn permutation_action_moves_monomials() {
        let r = free_ring(3, 2);
        let cyc = Permutation::from_images(vec![2, 3, 1]).unwrap();
        let a = MonomialAction::from_permutation(&cyc, 3, 2);
        // x1^2 * x2 maps to x2^2 * x3.
        let f = Poly::var(&r, 0).pow(2).mul(&Poly::var(&r, 1));
        assert_eq!(a.act_poly(&f).to_string(), "x2^2*x3");
    }

    #[test]
    fn composition_matches_sequential_application() {
        let p = 3;
        let r = free_ring(3, p);
        let cyc = Permutation::from_images(vec![2, 3, 1]).unwrap();
        let swap = Permutation::from_images(vec![2, 1, 3]).unwrap();
        let z = CycRat::zeta(p);
        let a = MonomialAction::new(cyc, vec![z.clone(), CycRat::one(p), z.pow(2)]).unwrap();
        let b = MonomialAction::new(swap, vec![CycRat::one(p), z.clone(), CycRat::one(p)]).unwrap();
        let f = Poly::var(&r, 0)
            .mul(&Poly::var(&r, 1).pow(2))
            .add(&Poly::var(&r, 2).scale(&z));
        let seq = a.act_poly(&b.act_poly(&f));
        let joint = a.compose(&b).act_poly(&f);
        assert_eq!(seq, joint);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = 5;
        let cyc = Permutation::from_images(vec![3, 1, 2]).unwrap();
        let a = MonomialAction::new(
            cyc,
            vec![CycRat::zeta(p), CycRat::zeta_pow(p, 3), CycRat::from_integer(1, p)],
        )
        .unwrap();
        assert!(a.compose(&a.inverse()).is_identity());
        assert!(a.inverse().compose(&a).is_identity());
    }

    #[test]
    fn lifting_is_a_group_homomorphism() {
        let g = sylow_group(4, 2).unwrap();
        let elems = g.enumerate(DEFAULT_ENUM_CAP).unwrap();
        for a in &elems {
            for b in &elems {
                let lhs = MonomialAction::from_permutation(&a.compose(b), 4, 2);
                let rhs = MonomialAction::from_permutation(a, 4, 2)
                    .compose(&MonomialAction::from_permutation(b, 4, 2));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn elementary_symmetric_is_invariant_under_permutations() {
        let r = free_ring(4, 2);
        let e2 = Poly::elementary_symmetric(&r, 2, &[0, 1, 2, 3]);
        for g in sylow_group(4, 2).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap() {
            let a = MonomialAction::from_permutation(&g, 4, 2);
            assert_eq!(a.act_poly(&e2), e2);
        }
    }

    #[test]
    fn action_on_rational_functions() {
        let r = free_ring(2, 2);
        let swap = Permutation::from_images(vec![2, 1]).unwrap();
        let a = MonomialAction::from_permutation(&swap, 2, 2);
        let f = RatFunc::var(&r, 0).div(&RatFunc::var(&r, 1)).unwrap();
        let g = a.act_ratfunc(&f);
        assert_eq!(g, RatFunc::var(&r, 1).div(&RatFunc::var(&r, 0)).unwrap());
        assert_eq!(a.act_ratfunc(&g), f);
    }

    #[test]
    fn automorphism_check_respects_the_root_relation() {
        let p = 3;
        // Ring x1, x2, x3, w with w^3 = x1*x2*x3.
        let ring = Ring::with_root(
            p,
            vec!["x1".into(), "x2".into(), "x3".into(), "w".into()],
            3,
            3,
            Mono(vec![1, 1, 1, 0]),
        )
        .unwrap();
        // Scaling w by a cube root of unity is an automorphism.
        let ok = MonomialAction::new(
            Permutation::identity(4),
            vec![CycRat::one(p), CycRat::one(p), CycRat::one(p), CycRat::zeta_pow(p, -1)],
        )
        .unwrap();
        assert!(ok.is_automorphism_of(&ring));
        // Cycling the x's while fixing w also is.
        let cyc = Permutation::from_images(vec![2, 3, 1, 4]).unwrap();
        let rot = MonomialAction::from_permutation(&cyc, 4, p);
        assert!(rot.is_automorphism_of(&ring));
        // Scaling w by 2 is not.
        let bad = MonomialAction::new(
            Permutation::identity(4),
            vec![CycRat::one(p), CycRat::one(p), CycRat::one(p), CycRat::from_integer(2, p)],
        )
        .unwrap();
        assert!(!bad.is_automorphism_of(&ring));
        // Moving only one x breaks the product relation.
        let swap_top = Permutation::from_images(vec![1, 2, 4, 3]).unwrap();
        let perm_bad = MonomialAction::from_permutation(&swap_top, 4, p);
        assert!(!perm_bad.is_automorphism_of(&ring));
    }

    #[test]
    fn serde_round_trip() {
        let p = 3;
        let a = MonomialAction::new(
            Permutation::from_images(vec![2, 1]).unwrap(),
            vec![CycRat::zeta(p), CycRat::one(p)],
        )
        .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let back: MonomialAction = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
