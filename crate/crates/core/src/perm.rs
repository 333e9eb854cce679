//! Permutations of {1..n} and the standard generating family for the
//! Sylow p-subgroup of the symmetric group.
//!
//! Composition convention throughout the crate: `(f * g)(x) = f(g(x))`
//! (apply the right factor first). Points are 1-based.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A permutation of {1..n}. `images[k]` is the image of point `k + 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Perm{}", self.cycle_string())
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    /// Build from a 1-based image table; must be a bijection of {1..n}.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if im == 0 || im > n || seen[im - 1] {
                return Err(Error::MalformedCertificate(format!(
                    "image table {images:?} is not a bijection of 1..={n}"
                )));
            }
            seen[im - 1] = true;
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point - 1]
    }

    /// The preimage of `point`, i.e. `inverse().apply(point)` without
    /// materializing the inverse.
    pub fn inverse_apply(&self, point: usize) -> usize {
        self.images.iter().position(|&im| im == point).expect("point in range") + 1
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &im)| im == k + 1)
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        let images = (1..=self.degree()).map(|x| self.apply(other.apply(x))).collect();
        Permutation { images }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (k, &im) in self.images.iter().enumerate() {
            images[im - 1] = k + 1;
        }
        Permutation { images }
    }

    /// Multiplicative order.
    pub fn order(&self) -> usize {
        let mut acc = self.clone();
        let mut ord = 1;
        while !acc.is_identity() {
            acc = acc.compose(self);
            ord += 1;
        }
        ord
    }

    pub fn moved_points(&self) -> Vec<usize> {
        (1..=self.degree()).filter(|&x| self.apply(x) != x).collect()
    }

    /// Disjoint cycle notation, fixed points omitted; "()" for the identity.
    pub fn cycle_string(&self) -> String {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 1..=n {
            if seen[start - 1] || self.apply(start) == start {
                continue;
            }
            let mut cyc = vec![start];
            seen[start - 1] = true;
            let mut q = self.apply(start);
            while q != start {
                seen[q - 1] = true;
                cyc.push(q);
                q = self.apply(q);
            }
            out.push('(');
            out.push_str(&cyc.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

/// Index (i, s) of a generator sigma_{i,s}; valid when 1 <= s <= n / p^(i+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex {
    pub i: usize,
    pub s: usize,
}

fn checked_pow(p: usize, e: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// floor(log_p n); zero when n < p.
pub fn floor_log(p: usize, n: usize) -> usize {
    let mut e = 0;
    let mut acc = p;
    while acc <= n {
        e += 1;
        match acc.checked_mul(p) {
            Some(v) => acc = v,
            None => break,
        }
    }
    e
}

/// The generator sigma_{i,s} of the Sylow p-subgroup of the symmetric group
/// on {1..n}: for 1 <= j <= p^i it cycles
///   b + j -> b + p^i + j -> ... -> b + (p-1)p^i + j -> b + j,
/// where b = (s-1)p^(i+1).
pub fn sigma(n: usize, p: usize, idx: GeneratorIndex) -> Result<Permutation> {
    let GeneratorIndex { i, s } = idx;
    let block = checked_pow(p, i + 1).unwrap_or(usize::MAX);
    let valid = s >= 1 && block <= n && s <= n / block;
    if !valid {
        return Err(Error::IndexOutOfRange { n, p, i, s });
    }
    let pi = checked_pow(p, i).unwrap();
    let base = (s - 1) * block;
    let mut images: Vec<usize> = (1..=n).collect();
    for k in 0..p {
        for j in 1..=pi {
            let from = base + k * pi + j;
            let to = base + ((k + 1) % p) * pi + j;
            images[from - 1] = to;
        }
    }
    Ok(Permutation { images })
}

/// All valid generator indices for (n, p), ordered by (i, s) lexicographically.
pub fn generator_indices(n: usize, p: usize) -> Vec<GeneratorIndex> {
    let mut out = Vec::new();
    let top = floor_log(p, n); // i ranges over 0..top
    for i in 0..top {
        let block = checked_pow(p, i + 1).unwrap();
        for s in 1..=n / block {
            out.push(GeneratorIndex { i, s });
        }
    }
    out
}

/// nu_p(n!) = sum_{k>=1} floor(n / p^k): the exponent of the p-part of n!,
/// hence log_p of the Sylow subgroup order.
pub fn order_exponent(n: usize, p: usize) -> usize {
    let mut total = 0;
    let mut q = p;
    loop {
        total += n / q;
        match q.checked_mul(p) {
            Some(next) if next <= n => q = next,
            _ => break,
        }
        if q > n {
            break;
        }
    }
    total
}

pub fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_is_a_transposition_at_level_zero() {
        let g = sigma(13, 2, GeneratorIndex { i: 0, s: 1 }).unwrap();
        assert_eq!(g.cycle_string(), "(1 2)");
    }

    #[test]
    fn sigma_level_two_matches_the_four_pair_pattern() {
        let g = sigma(13, 2, GeneratorIndex { i: 2, s: 1 }).unwrap();
        assert_eq!(g.cycle_string(), "(1 5)(2 6)(3 7)(4 8)");
    }

    #[test]
    fn sigma_p3_level_one_cycles_three_triples() {
        let g = sigma(9, 3, GeneratorIndex { i: 1, s: 1 }).unwrap();
        assert_eq!(g.cycle_string(), "(1 4 7)(2 5 8)(3 6 9)");
    }

    #[test]
    fn sigma_rejects_out_of_range_indices() {
        assert!(sigma(13, 2, GeneratorIndex { i: 2, s: 2 }).is_err());
        assert!(sigma(13, 2, GeneratorIndex { i: 0, s: 7 }).is_err());
        assert!(sigma(2, 3, GeneratorIndex { i: 0, s: 1 }).is_err());
    }

    #[test]
    fn indices_13_2_form_the_expected_triangle() {
        let idx = generator_indices(13, 2);
        assert_eq!(idx.len(), 10); // nu_2(13!) = 6 + 3 + 1
        assert_eq!(idx.first(), Some(&GeneratorIndex { i: 0, s: 1 }));
        assert_eq!(idx.last(), Some(&GeneratorIndex { i: 2, s: 1 }));
        let per_level: Vec<usize> = (0..3).map(|i| idx.iter().filter(|g| g.i == i).count()).collect();
        assert_eq!(per_level, vec![6, 3, 1]);
    }

    #[test]
    fn indices_empty_below_p() {
        assert!(generator_indices(2, 3).is_empty());
        assert!(generator_indices(1, 2).is_empty());
    }

    #[test]
    fn order_exponent_matches_legendre_sums() {
        assert_eq!(order_exponent(13, 2), 10);
        assert_eq!(order_exponent(9, 3), 4);
        assert_eq!(order_exponent(10, 5), 2);
        assert_eq!(order_exponent(4, 2), 3);
        assert_eq!(order_exponent(2, 3), 0);
    }

    #[test]
    fn generator_count_equals_order_exponent() {
        for &(n, p) in &[(13, 2), (9, 3), (10, 5), (6, 2), (6, 3), (25, 5)] {
            assert_eq!(generator_indices(n, p).len(), order_exponent(n, p));
        }
    }

    #[test]
    fn sigma_has_order_p_and_moves_p_to_the_i_plus_one_points() {
        for &(n, p) in &[(13, 2), (9, 3), (10, 5)] {
            for idx in generator_indices(n, p) {
                let g = sigma(n, p, idx).unwrap();
                assert_eq!(g.order(), p);
                let expected = checked_pow(p, idx.i + 1).unwrap();
                assert_eq!(g.moved_points().len(), expected);
            }
        }
    }

    /// Generators with s beyond the first p^(k-1) slots of their level have
    /// support disjoint from the leading-slot generators, so they commute.
    #[test]
    fn trailing_generators_commute_with_leading_family() {
        for &(n, p) in &[(13, 2), (9, 3), (12, 3)] {
            let m = floor_log(p, n);
            let all = generator_indices(n, p);
            for k in 1..=m {
                let i = m - k;
                let lead_bound = checked_pow(p, k - 1).unwrap();
                for idx in all.iter().filter(|g| g.i == i && g.s > lead_bound) {
                    let a = sigma(n, p, *idx).unwrap();
                    for kk in 1..=m {
                        let ii = m - kk;
                        let bound = checked_pow(p, kk - 1).unwrap();
                        for jdx in all.iter().filter(|g| g.i == ii && g.s <= bound) {
                            let b = sigma(n, p, *jdx).unwrap();
                            assert_eq!(a.compose(&b), b.compose(&a), "{idx:?} vs {jdx:?}");
                        }
                    }
                }
            }
        }
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just(()).prop_perturb(move |_, mut rng| {
            let mut v: Vec<usize> = (1..=n).collect();
            for k in (1..n).rev() {
                let j = (rng.next_u64() as usize) % (k + 1);
                v.swap(k, j);
            }
            Permutation::from_images(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in arb_perm(7), b in arb_perm(7), c in arb_perm(7)) {
            prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }

        #[test]
        fn inverse_cancels(a in arb_perm(7)) {
            prop_assert!(a.compose(&a.inverse()).is_identity());
            prop_assert!(a.inverse().compose(&a).is_identity());
        }

        #[test]
        fn right_to_left_application(a in arb_perm(7), b in arb_perm(7), x in 1usize..=7) {
            prop_assert_eq!(a.compose(&b).apply(x), a.apply(b.apply(x)));
        }
    }
}
