//! Generated permutation groups: the Sylow family, its index-p orientation
//! subgroup, and exact normal forms with respect to the standard generators.

use crate::error::{Error, Result};
use crate::perm::{generator_indices, sigma, GeneratorIndex, Permutation};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

pub const DEFAULT_ENUM_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Sylow,
    Orientation,
    KernelSylowAmbient,
}

/// A finitely generated permutation group, kept as labeled generators.
/// Field order is alphabetical so serialized output is canonical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub generators: Vec<LabeledGenerator>,
    pub n: usize,
    pub p: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledGenerator {
    pub images: Permutation,
    pub label: String,
}

impl GroupSpec {
    pub fn degree(&self) -> usize {
        self.n
    }

    /// Breadth-first closure of the generators, starting from the identity.
    /// Returned in first-visit order, which is deterministic.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Permutation>> {
        let id = Permutation::identity(self.n);
        let mut seen: HashSet<Permutation> = HashSet::new();
        let mut out = vec![id.clone()];
        seen.insert(id);
        let mut head = 0;
        while head < out.len() {
            let cur = out[head].clone();
            head += 1;
            for g in &self.generators {
                let next = g.images.compose(&cur);
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

    pub fn order(&self, cap: usize) -> Result<usize> {
        Ok(self.enumerate(cap)?.len())
    }
}

fn sigma_label(idx: GeneratorIndex) -> String {
    format!("s_{{{},{}}}", idx.i, idx.s)
}

/// The full Sylow p-subgroup of the symmetric group on {1..n}, generated by
/// every sigma_{i,s}.
pub fn sylow_group(n: usize, p: usize) -> Result<GroupSpec> {
    if !crate::perm::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let generators = generator_indices(n, p)
        .into_iter()
        .map(|idx| {
            Ok(LabeledGenerator { images: sigma(n, p, idx)?, label: sigma_label(idx) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupSpec { family: Family::Sylow, generators, n, p })
}

/// The orientation subgroup: adjacent products sigma_{0,s} sigma_{0,s+1}^{-1}
/// together with every sigma_{i,s} for i >= 1. Index p in the Sylow group
/// whenever floor(n/p) >= 1; trivial below that.
pub fn orientation_group(n: usize, p: usize) -> Result<GroupSpec> {
    if !crate::perm::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut generators = Vec::new();
    let level0 = n / p;
    for s in 1..level0 {
        let a = sigma(n, p, GeneratorIndex { i: 0, s })?;
        let b = sigma(n, p, GeneratorIndex { i: 0, s: s + 1 })?;
        generators.push(LabeledGenerator {
            images: a.compose(&b.inverse()),
            label: format!("s_{{0,{}}}s_{{0,{}}}^-1", s, s + 1),
        });
    }
    for idx in generator_indices(n, p).into_iter().filter(|g| g.i >= 1) {
        generators.push(LabeledGenerator { images: sigma(n, p, idx)?, label: sigma_label(idx) });
    }
    Ok(GroupSpec { family: Family::Orientation, generators, n, p })
}

/// The subgroup generated by the level-zero differences alone
/// (sigma_{0,s} sigma_{0,s+1}^{-1} for adjacent s). This is the kernel of the
/// coordinate-sum map restricted to the bottom torus; it is what the tower
/// construction quotients out first.
pub fn bottom_difference_group(n: usize, p: usize) -> Result<GroupSpec> {
    let mut g = orientation_group(n, p)?;
    g.generators.retain(|gen| gen.label.contains("^-1"));
    Ok(g)
}

/// Exponent vector r(i, s) in {0..p-1} per generator index, ordered like
/// `generator_indices`. The product is taken with descending i and, within a
/// level, ascending s.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVector {
    pub n: usize,
    pub p: usize,
    pub exponents: Vec<(GeneratorIndex, usize)>,
}

impl ExponentVector {
    /// Multiply the word out: descending i, ascending s, left to right.
    pub fn evaluate(&self) -> Result<Permutation> {
        let mut acc = Permutation::identity(self.n);
        let mut levels: Vec<&(GeneratorIndex, usize)> = self.exponents.iter().collect();
        levels.sort_by(|a, b| b.0.i.cmp(&a.0.i).then(a.0.s.cmp(&b.0.s)));
        for (idx, r) in levels {
            let g = sigma(self.n, self.p, *idx)?;
            for _ in 0..*r {
                acc = acc.compose(&g);
            }
        }
        Ok(acc)
    }
}

/// Split a permutation that respects the partition of {1..n} into aligned
/// p-blocks into (block permutation, per-block rotation). Points beyond
/// p*floor(n/p) must be fixed. Rotation c on block b means
/// (b-1)p + r maps to (tau(b)-1)p + (r - 1 + c mod p) + 1.
pub fn block_decompose(x: &Permutation, p: usize) -> Result<(Permutation, Vec<usize>)> {
    let n = x.degree();
    let m = n / p;
    for q in p * m + 1..=n {
        if x.apply(q) != q {
            return Err(Error::NotAMember {
                reason: format!("point {q} beyond the last full block is moved"),
            });
        }
    }
    let mut tau = vec![0usize; m];
    let mut rot = vec![0usize; m];
    for b in 1..=m {
        let img = x.apply((b - 1) * p + 1);
        let tb = (img - 1) / p + 1;
        let c = (img - 1) % p; // rotation sending residue 1 to residue c+1
        for r in 1..=p {
            let expect = (tb - 1) * p + ((r - 1 + c) % p) + 1;
            if x.apply((b - 1) * p + r) != expect {
                return Err(Error::NotAMember {
                    reason: format!("block {b} is not mapped by a rigid rotation"),
                });
            }
        }
        tau[b - 1] = tb;
        rot[b - 1] = c;
    }
    let tau = Permutation::from_images(tau)
        .map_err(|_| Error::NotAMember { reason: "block map is not a bijection".into() })?;
    // Re-index rotations by destination block: rot_dest[tau(b)] = rot[b].
    let mut rot_dest = vec![0usize; m];
    for b in 1..=m {
        rot_dest[tau.apply(b) - 1] = rot[b - 1];
    }
    Ok((tau, rot_dest))
}

/// Normal form of `x` in the Sylow group: the unique exponent vector whose
/// ordered product (descending i, ascending s) equals `x`. Errors with
/// `NotAMember` when `x` is outside the group.
pub fn normal_form(n: usize, p: usize, x: &Permutation) -> Result<ExponentVector> {
    if x.degree() != n {
        return Err(Error::NotAMember { reason: format!("degree {} != {}", x.degree(), n) });
    }
    let mut exponents = Vec::new();
    peel(n, p, x, 0, &mut exponents)?;
    exponents.sort_by(|a, b| a.0.cmp(&b.0));
    let ev = ExponentVector { n, p, exponents };
    debug_assert_eq!(&ev.evaluate()?, x);
    Ok(ev)
}

/// Recursive layer of `normal_form`: peel the bottom torus at depth `d`
/// (contributing exponents at level i = d) and recurse on the block action.
fn peel(
    n: usize,
    p: usize,
    x: &Permutation,
    d: usize,
    out: &mut Vec<(GeneratorIndex, usize)>,
) -> Result<()> {
    let m = x.degree() / p;
    if m == 0 {
        if x.is_identity() {
            return Ok(());
        }
        return Err(Error::NotAMember { reason: "residual action below one block".into() });
    }
    let (tau, _) = block_decompose(x, p)?;
    peel(n, p, &tau, d + 1, out)?;
    // Lift the block part just recovered and divide it off; what is left must
    // be a product of bottom rotations.
    let mut lift = Permutation::identity(x.degree());
    let mut lifted: Vec<&(GeneratorIndex, usize)> = out.iter().filter(|(g, _)| g.i > d).collect();
    lifted.sort_by(|a, b| b.0.i.cmp(&a.0.i).then(a.0.s.cmp(&b.0.s)));
    for (idx, r) in lifted {
        let g = sigma(x.degree(), p, GeneratorIndex { i: idx.i - d, s: idx.s })?;
        for _ in 0..*r {
            lift = lift.compose(&g);
        }
    }
    let a = lift.inverse().compose(x);
    let (tau_a, rot) = block_decompose(&a, p)?;
    if !tau_a.is_identity() {
        return Err(Error::NotAMember { reason: "torus part still permutes blocks".into() });
    }
    for (b, &c) in rot.iter().enumerate() {
        if c != 0 {
            out.push((GeneratorIndex { i: d, s: b + 1 }, c));
        }
    }
    Ok(())
}

/// The coordinate-sum extension: sum of the bottom-level exponents mod p.
/// It is a homomorphism onto Z/p whose kernel is the orientation subgroup.
pub fn h_tilde(n: usize, p: usize, x: &Permutation) -> Result<usize> {
    let nf = normal_form(n, p, x)?;
    Ok(nf.exponents.iter().filter(|(g, _)| g.i == 0).map(|(_, r)| r).sum::<usize>() % p)
}

/// Test-support closure by repeated set product, independent of the BFS
/// order used by `enumerate`.
pub fn closure_by_products(gens: &[Permutation], n: usize, cap: usize) -> Result<Vec<Permutation>> {
    let mut set: HashSet<Permutation> = HashSet::new();
    set.insert(Permutation::identity(n));
    for g in gens {
        set.insert(g.clone());
    }
    loop {
        let snapshot: Vec<Permutation> = set.iter().cloned().collect();
        let before = set.len();
        for a in &snapshot {
            for b in &snapshot {
                set.insert(a.compose(b));
                if set.len() > cap {
                    return Err(Error::EnumerationBudget { cap });
                }
            }
        }
        if set.len() == before {
            break;
        }
    }
    let mut out: Vec<Permutation> = set.into_iter().collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::order_exponent;

    #[test]
    fn orientation_generators_for_4_2() {
        let h = orientation_group(4, 2).unwrap();
        let cycles: Vec<String> = h.generators.iter().map(|g| g.images.cycle_string()).collect();
        assert_eq!(cycles, vec!["(1 2)(3 4)", "(1 3)(2 4)"]);
    }

    #[test]
    fn sylow_order_4_2_is_8() {
        let g = sylow_group(4, 2).unwrap();
        assert_eq!(g.order(DEFAULT_ENUM_CAP).unwrap(), 8);
    }

    #[test]
    fn sylow_order_9_3_is_81() {
        let g = sylow_group(9, 3).unwrap();
        assert_eq!(g.order(DEFAULT_ENUM_CAP).unwrap(), 81);
    }

    #[test]
    fn enumerated_order_is_p_to_the_legendre_exponent() {
        for &(n, p) in &[(4, 2), (6, 2), (8, 2), (13, 2), (3, 3), (6, 3), (9, 3), (10, 5)] {
            let g = sylow_group(n, p).unwrap();
            let expect = (p as u128).pow(order_exponent(n, p) as u32);
            assert_eq!(g.order(DEFAULT_ENUM_CAP).unwrap() as u128, expect, "n={n} p={p}");
        }
    }

    #[test]
    fn enumerate_agrees_with_product_closure() {
        for &(n, p) in &[(4, 2), (6, 2), (9, 3)] {
            let g = sylow_group(n, p).unwrap();
            let mut bfs = g.enumerate(DEFAULT_ENUM_CAP).unwrap();
            bfs.sort();
            let gens: Vec<Permutation> = g.generators.iter().map(|x| x.images.clone()).collect();
            let prod = closure_by_products(&gens, n, DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(bfs, prod);
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = sylow_group(13, 2).unwrap();
        assert!(matches!(g.enumerate(100), Err(Error::EnumerationBudget { cap: 100 })));
    }

    #[test]
    fn orientation_has_index_p() {
        for &(n, p) in &[(4, 2), (6, 2), (8, 2), (6, 3), (9, 3), (10, 5)] {
            let g = sylow_group(n, p).unwrap().order(DEFAULT_ENUM_CAP).unwrap();
            let h = orientation_group(n, p).unwrap().order(DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(g, h * p, "n={n} p={p}");
        }
    }

    #[test]
    fn orientation_2_2_is_trivial() {
        let h = orientation_group(2, 2).unwrap();
        assert_eq!(h.order(DEFAULT_ENUM_CAP).unwrap(), 1);
    }

    /// The adjacent differences already generate every sigma_{0,s} sigma_{0,s'}^{-1}.
    #[test]
    fn adjacent_differences_generate_the_full_difference_family() {
        for &(n, p) in &[(8, 2), (9, 3), (10, 5)] {
            let adjacent = orientation_group(n, p).unwrap();
            let mut full = adjacent.clone();
            let m = n / p;
            for s in 1..=m {
                for s2 in 1..=m {
                    if s == s2 {
                        continue;
                    }
                    let a = sigma(n, p, GeneratorIndex { i: 0, s }).unwrap();
                    let b = sigma(n, p, GeneratorIndex { i: 0, s: s2 }).unwrap();
                    full.generators.push(LabeledGenerator {
                        images: a.compose(&b.inverse()),
                        label: format!("d{s},{s2}"),
                    });
                }
            }
            let mut ea = adjacent.enumerate(DEFAULT_ENUM_CAP).unwrap();
            let mut ef = full.enumerate(DEFAULT_ENUM_CAP).unwrap();
            ea.sort();
            ef.sort();
            assert_eq!(ea, ef, "n={n} p={p}");
        }
    }

    #[test]
    fn normal_form_round_trips_over_the_whole_group() {
        for &(n, p) in &[(8, 2), (9, 3), (10, 5)] {
            let g = sylow_group(n, p).unwrap();
            for x in g.enumerate(DEFAULT_ENUM_CAP).unwrap() {
                let nf = normal_form(n, p, &x).unwrap();
                assert_eq!(nf.evaluate().unwrap(), x);
                assert!(nf.exponents.iter().all(|(_, r)| *r >= 1 && *r < p));
            }
        }
    }

    /// Oracle for uniqueness: all p^nu ordered products are pairwise distinct.
    #[test]
    fn all_exponent_vectors_give_distinct_elements_8_2() {
        let n = 8;
        let p = 2;
        let idx = generator_indices(n, p);
        let total = 1usize << idx.len(); // p = 2
        let mut seen = HashSet::new();
        for mask in 0..total {
            let exponents: Vec<(GeneratorIndex, usize)> = idx
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, g)| (*g, 1))
                .collect();
            let ev = ExponentVector { n, p, exponents };
            assert!(seen.insert(ev.evaluate().unwrap()));
        }
        assert_eq!(seen.len(), 128);
    }

    #[test]
    fn membership_in_orientation_iff_bottom_exponent_sum_vanishes() {
        let n = 6;
        let p = 2;
        let h: HashSet<Permutation> =
            orientation_group(n, p).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
        for x in sylow_group(n, p).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap() {
            let sum = h_tilde(n, p, &x).unwrap();
            assert_eq!(sum == 0, h.contains(&x), "{x:?}");
        }
    }

    #[test]
    fn h_tilde_is_a_homomorphism() {
        for &(n, p) in &[(6, 2), (9, 3)] {
            let elems = sylow_group(n, p).unwrap().enumerate(DEFAULT_ENUM_CAP).unwrap();
            for a in &elems {
                for b in &elems {
                    let lhs = h_tilde(n, p, &a.compose(b)).unwrap();
                    let rhs = (h_tilde(n, p, a).unwrap() + h_tilde(n, p, b).unwrap()) % p;
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn normal_form_rejects_outsiders() {
        // A 3-cycle moving across block boundaries is not in the Sylow 2-group.
        let x = Permutation::from_images(vec![2, 3, 1, 4]).unwrap();
        assert!(matches!(normal_form(4, 2, &x), Err(Error::NotAMember { .. })));
    }

    #[test]
    fn bottom_difference_group_order() {
        // Kernel of the sum on the bottom torus: p^(m-1) elements.
        assert_eq!(bottom_difference_group(8, 2).unwrap().order(DEFAULT_ENUM_CAP).unwrap(), 8);
        assert_eq!(bottom_difference_group(9, 3).unwrap().order(DEFAULT_ENUM_CAP).unwrap(), 9);
        assert_eq!(bottom_difference_group(6, 3).unwrap().order(DEFAULT_ENUM_CAP).unwrap(), 3);
    }
}
