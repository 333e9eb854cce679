//! Wreath elements over Z/p with a permutation on top, the sum-zero kernel
//! subgroup, and the exact block embedding into a symmetric group of degree
//! n*p.

use crate::error::{Error, Result};
use crate::group::block_decompose;
use crate::perm::{generator_indices, is_prime, order_exponent, sigma, GeneratorIndex, Permutation};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// A pair (twist; top) acting on n fibers of size p. `twist[c]` rotates the
/// fiber that lands on block c+1 after the top permutation has moved blocks:
/// the pair sends a point (block b, residue r) to (top(b), r + twist[top(b)]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathElement {
    pub p: usize,
    pub top: Permutation,
    pub twist: Vec<usize>,
}

impl WreathElement {
    pub fn new(twist: Vec<usize>, top: Permutation, p: usize) -> Result<Self> {
        if twist.len() != top.degree() {
            return Err(Error::NotAMember {
                reason: format!("twist length {} != top degree {}", twist.len(), top.degree()),
            });
        }
        if twist.iter().any(|&t| t >= p) {
            return Err(Error::NotAMember { reason: format!("twist entry outside 0..{p}") });
        }
        Ok(WreathElement { p, top, twist })
    }

    pub fn identity(n: usize, p: usize) -> Self {
        WreathElement { p, top: Permutation::identity(n), twist: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.top.degree()
    }

    pub fn is_identity(&self) -> bool {
        self.top.is_identity() && self.twist.iter().all(|&t| t == 0)
    }

    /// Group law matching composition of the embedded permutations:
    /// (a; s)(b; t) = (a + s.b; st) with (s.b)_i = b_{s^-1(i)}.
    pub fn compose(&self, other: &WreathElement) -> WreathElement {
        let n = self.n();
        let top = self.top.compose(&other.top);
        let mut twist = vec![0usize; n];
        for i in 1..=n {
            let moved = other.twist[self.top.inverse_apply(i) - 1];
            twist[i - 1] = (self.twist[i - 1] + moved) % self.p;
        }
        WreathElement { p: self.p, top, twist }
    }

    /// (a; s)^-1 = (-s^-1.a; s^-1).
    pub fn inverse(&self) -> WreathElement {
        let n = self.n();
        let top = self.top.inverse();
        let mut twist = vec![0usize; n];
        for i in 1..=n {
            let a = self.twist[self.top.apply(i) - 1];
            twist[i - 1] = (self.p - a) % self.p;
        }
        WreathElement { p: self.p, top, twist }
    }

    /// Sum of the fiber rotations mod p; a homomorphism onto Z/p.
    pub fn phi(&self) -> usize {
        self.twist.iter().sum::<usize>() % self.p
    }

    /// Faithful action on {1..n*p}: block b, residue r goes to block top(b)
    /// with the residue rotated by the twist at the destination.
    pub fn embed(&self) -> Permutation {
        let n = self.n();
        let p = self.p;
        let mut images = vec![0usize; n * p];
        for b in 1..=n {
            let tb = self.top.apply(b);
            let c = self.twist[tb - 1];
            for r in 1..=p {
                images[(b - 1) * p + r - 1] = (tb - 1) * p + (r - 1 + c) % p + 1;
            }
        }
        Permutation::from_images(images).expect("embedding of a wreath element is a bijection")
    }

    /// Inverse of `embed`: split a degree n*p permutation that maps aligned
    /// p-blocks rigidly onto p-blocks.
    pub fn decompose(x: &Permutation, p: usize) -> Result<WreathElement> {
        if x.degree() % p != 0 {
            return Err(Error::NotAMember {
                reason: format!("degree {} is not a multiple of {p}", x.degree()),
            });
        }
        let (top, twist) = block_decompose(x, p)?;
        Ok(WreathElement { p, top, twist })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WreathGenerator {
    pub element: WreathElement,
    pub label: String,
}

/// Generators of the sum-zero kernel subgroup of Z/p wr Sym(n): untwisted
/// adjacent transpositions together with adjacent twist differences.
pub fn kernel_generators(n: usize, p: usize) -> Vec<WreathGenerator> {
    let mut out = Vec::new();
    for s in 1..n {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(s - 1, s);
        let top = Permutation::from_images(images).expect("adjacent swap");
        out.push(WreathGenerator {
            element: WreathElement { p, top, twist: vec![0; n] },
            label: format!("t_{s}"),
        });
    }
    for i in 1..n {
        let mut twist = vec![0usize; n];
        twist[i - 1] = 1;
        twist[i] = p - 1;
        out.push(WreathGenerator {
            element: WreathElement { p, top: Permutation::identity(n), twist },
            label: format!("d_{i}"),
        });
    }
    out
}

/// Generators of the full wreath product Z/p wr Sym(n): untwisted adjacent
/// transpositions plus a single unit twist.
pub fn full_wreath_generators(n: usize, p: usize) -> Vec<WreathGenerator> {
    let mut out: Vec<WreathGenerator> =
        kernel_generators(n, p).into_iter().filter(|g| g.label.starts_with('t')).collect();
    let mut twist = vec![0usize; n];
    if n > 0 {
        twist[0] = 1;
    }
    out.push(WreathGenerator {
        element: WreathElement { p, top: Permutation::identity(n), twist },
        label: "e_1".into(),
    });
    out
}

/// Breadth-first closure of wreath generators; deterministic first-visit
/// order, capped.
pub fn enumerate_wreath(
    gens: &[WreathElement],
    n: usize,
    p: usize,
    cap: usize,
) -> Result<Vec<WreathElement>> {
    let id = WreathElement::identity(n, p);
    let mut seen: HashSet<WreathElement> = HashSet::new();
    let mut out = vec![id.clone()];
    seen.insert(id);
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        head += 1;
        for g in gens {
            let next = g.compose(&cur);
            if !seen.contains(&next) {
                if out.len() >= cap {
                    return Err(Error::EnumerationBudget { cap });
                }
                seen.insert(next.clone());
                out.push(next);
            }
        }
    }
    Ok(out)
}

fn factorial_u128(n: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for k in 2..=n as u128 {
        acc = acc.checked_mul(k).ok_or(Error::UnsupportedShape {
            n,
            p: 0,
            reason: "factorial overflows u128".into(),
        })?;
    }
    Ok(acc)
}

fn pow_u128(base: usize, exp: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128).ok_or(Error::UnsupportedShape {
            n: base,
            p: 0,
            reason: "power overflows u128".into(),
        })?;
    }
    Ok(acc)
}

/// Structural comparison of the orientation subgroup at degree n*p with the
/// sum-zero wreath elements whose top lies in the degree-n Sylow group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SylowKernelReport {
    pub ambient_degree: usize,
    pub generator_count: usize,
    pub generators_in_kernel: bool,
    pub kernel_order: u128,
    pub kernel_over_sylow_order: u128,
    pub legendre_consistent: bool,
    pub orientation_order: u128,
    pub round_trip_ok: bool,
}

impl SylowKernelReport {
    pub fn holds(&self) -> bool {
        self.generators_in_kernel
            && self.legendre_consistent
            && self.round_trip_ok
            && self.orientation_order == self.kernel_over_sylow_order
    }
}

/// Block-wise embedding of one permutation of {1..q} per block into the
/// symmetric group on the concatenated blocks.
fn embed_block_tuple(tuple: &[&Permutation], q: usize, n: usize) -> Permutation {
    let mut images = Vec::with_capacity(n);
    for (b, alpha) in tuple.iter().enumerate() {
        for t in 1..=q {
            images.push(b * q + alpha.apply(t));
        }
    }
    Permutation::from_images(images).expect("block-wise images form a bijection")
}

/// The top-level cycle regroups block tuples by rotation: conjugating the
/// block-wise action of (a_1, ..., a_p) on the p blocks of size p^(m-1) by
/// sigma_{m-1,1} equals the block-wise action of (a_p, a_1, ..., a_{p-1}).
/// Checked exhaustively over every tuple whose entries are the identity or a
/// Sylow generator of one block; vacuously true at m <= 1 where the blocks
/// carry no generators.
pub fn wreath_conjugation_check(p: usize, m: usize) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Ok(true);
    }
    let mut n = 1usize;
    for _ in 0..m {
        n = n.checked_mul(p).ok_or(Error::UnsupportedShape {
            n: usize::MAX,
            p,
            reason: format!("p^{m} exceeds the addressable degree"),
        })?;
    }
    let q = n / p;
    let top = sigma(n, p, GeneratorIndex { i: m - 1, s: 1 })?;
    let top_inv = top.inverse();
    let mut choices = vec![Permutation::identity(q)];
    for idx in generator_indices(q, p) {
        choices.push(sigma(q, p, idx)?);
    }
    let mut digits = vec![0usize; p];
    loop {
        let tuple: Vec<&Permutation> = digits.iter().map(|&d| &choices[d]).collect();
        let conjugated = top.compose(&embed_block_tuple(&tuple, q, n)).compose(&top_inv);
        let rotated: Vec<&Permutation> = (0..p).map(|j| tuple[(j + p - 1) % p]).collect();
        if conjugated != embed_block_tuple(&rotated, q, n) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == p {
                return Ok(true);
            }
            digits[k] += 1;
            if digits[k] < choices.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Check that every generator of the degree n*p orientation subgroup embeds a
/// sum-zero wreath element with Sylow top, that the embedding round-trips, and
/// that the group orders agree on both sides.
pub fn sylow_in_kernel_check(n: usize, p: usize) -> Result<SylowKernelReport> {
    let ambient = crate::group::orientation_group(n * p, p)?;
    let mut generators_in_kernel = true;
    let mut round_trip_ok = true;
    for g in &ambient.generators {
        let w = WreathElement::decompose(&g.images, p)?;
        if w.phi() != 0 || crate::group::normal_form(n, p, &w.top).is_err() {
            generators_in_kernel = false;
        }
        if w.embed() != g.images {
            round_trip_ok = false;
        }
    }
    let nu_ambient = order_exponent(n * p, p);
    let nu_base = order_exponent(n, p);
    let legendre_consistent = nu_ambient == n + nu_base;
    let orientation_order = pow_u128(p, nu_ambient - 1)?;
    let kernel_over_sylow_order = pow_u128(p, n - 1 + nu_base)?;
    let kernel_order = factorial_u128(n)?
        .checked_mul(pow_u128(p, n - 1)?)
        .ok_or(Error::UnsupportedShape { n, p, reason: "kernel order overflows u128".into() })?;
    Ok(SylowKernelReport {
        ambient_degree: n * p,
        generator_count: ambient.generators.len(),
        generators_in_kernel,
        kernel_order,
        kernel_over_sylow_order,
        legendre_consistent,
        orientation_order,
        round_trip_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{h_tilde, orientation_group, sylow_group, DEFAULT_ENUM_CAP};

    #[test]
    fn conjugation_by_the_top_cycle_rotates_block_tuples() {
        for (p, m) in [(2usize, 2usize), (2, 3), (3, 2)] {
            assert!(wreath_conjugation_check(p, m).unwrap(), "(p, m) = ({p}, {m})");
        }
        // Single-level groups have no block generators below the cycle.
        assert!(wreath_conjugation_check(5, 1).unwrap());
        assert!(wreath_conjugation_check(3, 0).unwrap());
    }

    fn all_wreath(n: usize, p: usize) -> Vec<WreathElement> {
        let gens: Vec<WreathElement> =
            full_wreath_generators(n, p).into_iter().map(|g| g.element).collect();
        enumerate_wreath(&gens, n, p, DEFAULT_ENUM_CAP).unwrap()
    }

    #[test]
    fn group_law_matches_embedded_composition() {
        for &(n, p) in &[(2, 2), (2, 3), (3, 2)] {
            let elems = all_wreath(n, p);
            assert_eq!(elems.len(), factorial_u128(n).unwrap() as usize * p.pow(n as u32));
            for a in &elems {
                for b in &elems {
                    assert_eq!(a.compose(b).embed(), a.embed().compose(&b.embed()));
                }
            }
        }
    }

    #[test]
    fn inverse_cancels_and_matches_embedding() {
        for w in all_wreath(3, 2) {
            assert!(w.compose(&w.inverse()).is_identity());
            assert!(w.inverse().compose(&w).is_identity());
            assert_eq!(w.inverse().embed(), w.embed().inverse());
        }
    }

    #[test]
    fn embed_then_decompose_round_trips() {
        for w in all_wreath(3, 2) {
            assert_eq!(WreathElement::decompose(&w.embed(), 2).unwrap(), w);
        }
        for w in all_wreath(2, 3) {
            assert_eq!(WreathElement::decompose(&w.embed(), 3).unwrap(), w);
        }
    }

    #[test]
    fn decompose_rejects_block_breaking_maps() {
        let x = Permutation::from_images(vec![1, 3, 2, 4]).unwrap();
        assert!(WreathElement::decompose(&x, 2).is_err());
        let odd = Permutation::identity(5);
        assert!(WreathElement::decompose(&odd, 2).is_err());
    }

    #[test]
    fn phi_is_a_homomorphism() {
        let elems = all_wreath(2, 3);
        for a in &elems {
            for b in &elems {
                assert_eq!(a.compose(b).phi(), (a.phi() + b.phi()) % 3);
            }
        }
    }

    #[test]
    fn kernel_order_matches_factorial_formula() {
        for &(n, p, expect) in &[(2, 2, 4), (3, 2, 24), (2, 3, 6), (3, 3, 54)] {
            let gens: Vec<WreathElement> =
                kernel_generators(n, p).into_iter().map(|g| g.element).collect();
            let got = enumerate_wreath(&gens, n, p, DEFAULT_ENUM_CAP).unwrap().len();
            assert_eq!(got, expect, "n={n} p={p}");
        }
    }

    #[test]
    fn kernel_is_exactly_the_sum_zero_subgroup() {
        for &(n, p) in &[(3, 2), (2, 3)] {
            let gens: Vec<WreathElement> =
                kernel_generators(n, p).into_iter().map(|g| g.element).collect();
            let kernel: HashSet<WreathElement> =
                enumerate_wreath(&gens, n, p, DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
            for w in all_wreath(n, p) {
                assert_eq!(kernel.contains(&w), w.phi() == 0, "{w:?}");
            }
        }
    }

    /// The twist-sum of a wreath element equals the bottom exponent sum of its
    /// embedded permutation whenever the top lies in the smaller Sylow group.
    #[test]
    fn phi_matches_bottom_exponent_sum_after_embedding() {
        // n = 2, p = 2: the top group Sym(2) is already its own Sylow group.
        for w in all_wreath(2, 2) {
            assert_eq!(w.phi(), h_tilde(4, 2, &w.embed()).unwrap());
        }
        // n = 3, p = 3 restricted to tops in the cyclic Sylow group.
        let c = crate::perm::Permutation::from_images(vec![2, 3, 1]).unwrap();
        let mut gens = vec![WreathElement::new(vec![1, 0, 0], Permutation::identity(3), 3).unwrap()];
        gens.push(WreathElement::new(vec![0; 3], c, 3).unwrap());
        let elems = enumerate_wreath(&gens, 3, 3, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(elems.len(), 81);
        for w in &elems {
            assert_eq!(w.phi(), h_tilde(9, 3, &w.embed()).unwrap());
        }
    }

    #[test]
    fn kernel_image_over_sylow_top_equals_orientation_group() {
        // n = 2, p = 2.
        let gens: Vec<WreathElement> =
            kernel_generators(2, 2).into_iter().map(|g| g.element).collect();
        let image: HashSet<Permutation> = enumerate_wreath(&gens, 2, 2, DEFAULT_ENUM_CAP)
            .unwrap()
            .iter()
            .map(|w| w.embed())
            .collect();
        let orientation: HashSet<Permutation> =
            orientation_group(4, 2).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
        assert_eq!(image, orientation);

        // n = 3, p = 3 with tops restricted to the cyclic Sylow group.
        let c = Permutation::from_images(vec![2, 3, 1]).unwrap();
        let restricted = vec![
            WreathElement::new(vec![1, 2, 0], Permutation::identity(3), 3).unwrap(),
            WreathElement::new(vec![0, 1, 2], Permutation::identity(3), 3).unwrap(),
            WreathElement::new(vec![0; 3], c, 3).unwrap(),
        ];
        let elems = enumerate_wreath(&restricted, 3, 3, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(elems.len(), 27);
        let image: HashSet<Permutation> = elems.iter().map(|w| w.embed()).collect();
        let orientation: HashSet<Permutation> =
            orientation_group(9, 3).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
        assert_eq!(image, orientation);
    }

    #[test]
    fn embedded_sylow_tops_generate_the_ambient_sylow_group() {
        // Z/2 wr Sylow(2) at n = 2 embeds onto the full degree-4 Sylow group.
        let embedded: HashSet<Permutation> = all_wreath(2, 2).iter().map(|w| w.embed()).collect();
        let sylow: HashSet<Permutation> =
            sylow_group(4, 2).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
        assert_eq!(embedded, sylow);
    }

    #[test]
    fn structural_report_holds_in_range() {
        for &(n, p) in &[(2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (2, 5)] {
            let r = sylow_in_kernel_check(n, p).unwrap();
            assert!(r.holds(), "n={n} p={p}: {r:?}");
            assert!(r.legendre_consistent);
        }
    }

    #[test]
    fn report_orders_for_3_3() {
        let r = sylow_in_kernel_check(3, 3).unwrap();
        assert_eq!(r.ambient_degree, 9);
        assert_eq!(r.orientation_order, 27);
        assert_eq!(r.kernel_over_sylow_order, 27);
        assert_eq!(r.kernel_order, 54);
    }
}
