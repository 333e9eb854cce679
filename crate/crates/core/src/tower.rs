//! Certificate builders for explicit rational generator systems of fixed
//! fields.
//!
//! A *tower certificate* packages, as exact symbolic data, everything needed
//! to re-check that a claimed generator system for a fixed field is correct:
//!
//! * a finite permutation group acting on ambient coordinates `x1..xn`;
//! * a working *domain*: either the ambient coordinates themselves (the
//!   even-prime towers) or an invertible linear change of coordinates into
//!   block combinations `t1..tm` plus the untouched trailing coordinates
//!   (odd primes), with the solve-back expressions recorded and re-checked;
//! * *level 0*: named invariant generators, each stored as an exact rational
//!   function over the domain ring;
//! * an ordered list of *step relations*. Step `k` adjoins one new named
//!   element. Its relation is a univariate polynomial whose coefficients are
//!   rational functions over the names introduced before it; substituting the
//!   domain expressions of those names and the new element must give zero
//!   identically. The product of the `degree_claim`s is the certificate
//!   budget and must equal the enumerated group order;
//! * *recovery*: one rational function over the names per domain variable,
//!   exhibiting the domain coordinate inside the adjoined field;
//! * for odd primes, one *affine node*: coordinates that are not claimed
//!   invariant but on which the group acts affinely over the recovered block
//!   field. Invariant replacements for these exist by the affine
//!   linear-action theorem once the recorded affine images and the
//!   faithfulness of the base action are re-checked, so the node contributes
//!   no budget factor.
//!
//! Soundness sketch (the verifier in `verify` re-checks every ingredient):
//! level-0 invariance puts the level-0 field `E0` inside the fixed field;
//! the step relations bound `[E : E0] <= budget`; recovery shows `E` is the
//! whole function field; and `[E : E^G] = |G|` exactly, so
//! `budget == |G|` forces `E0 = E^G` (up to the affine node's free
//! coordinates, which the affine linear-action theorem converts into honest
//! invariant generators of the same count).
//!
//! Two further certificate kinds share the same verification pipeline: the
//! kernel-invariants certificate (elementary symmetric functions in `t` and
//! `t^p` under the sum-zero monomial subgroup) and the cubic discriminant
//! identity, plus a wrapper around the cyclic generator system of the
//! `cyclic` module.

use crate::action::MonomialAction;
use crate::cyc::CycRat;
use crate::cyclic::CyclicSystem;
use crate::error::{Error, Result};
use crate::group::{orientation_group, GroupSpec};
use crate::perm::is_prime;
use crate::poly::{Poly, Ring};
use crate::ratfunc::RatFunc;
use crate::wreath::{kernel_generators, WreathElement};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Default ceiling on the number of terms of any single polynomial stored in
/// or expanded by a certificate check.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

// ---------------------------------------------------------------------------
// Data model
// ---------------------------------------------------------------------------

/// One named field generator with its exact expression over the domain ring.
/// `definition` is a human-readable construction formula; it is commentary,
/// never parsed, and carries no checked content.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedGenerator {
    pub definition: String,
    pub expr: RatFunc,
    pub name: String,
}

/// Claim: the group element with this label acts on the level's generators
/// by the given monomial action (generator `j` maps to `scale_j` times
/// generator `perm(j)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionClaim {
    pub action: MonomialAction,
    pub element: String,
}

/// One layer of the tower: a batch of named generators plus optional
/// residual-action claims for the group generators on exactly this batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorLevel {
    pub generators: Vec<NamedGenerator>,
    pub residual_action: Vec<ActionClaim>,
}

/// One adjunction step. `coefficients[k]` is the coefficient of `X^k`, a
/// rational function over the name ring (variables = all generator names in
/// order of introduction); only names introduced strictly earlier may occur.
/// `new_expr` is the adjoined element over the domain ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRelation {
    pub coefficients: Vec<RatFunc>,
    pub definition: String,
    pub degree_claim: u64,
    pub new_expr: RatFunc,
    pub new_generator: String,
}

/// An ambient coordinate that is not itself a domain variable, together with
/// the exact expression recovering it. The expression lives over the extended
/// ring (ambient variables followed by the block variables `t1..tm`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedVar {
    pub expr: RatFunc,
    pub index: usize,
}

/// The working coordinates of a certificate. `defs[i]` expresses domain
/// variable `i` over the ambient ring. `free_indices` are ambient coordinates
/// handled by the affine node instead of the invariant levels; `solved` are
/// the ambient coordinates recovered from the domain variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub defs: Vec<RatFunc>,
    pub free_indices: Vec<usize>,
    pub p: usize,
    pub solved: Vec<SolvedVar>,
    pub vars: Vec<String>,
}

/// Affine image of one flagged coordinate under one group generator:
/// `constant` (over the name ring) plus a linear combination of the flagged
/// coordinates themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineImage {
    pub constant: RatFunc,
    pub linear: Vec<LinearTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub coeff: CycRat,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineClaim {
    pub element: String,
    pub images: Vec<AffineImage>,
}

/// Marker for one application of the affine linear-action theorem: the group
/// acts affinely on the `flagged` ambient coordinates over the field
/// generated by the `base` names, and faithfully on that base. The theorem
/// replaces the flagged coordinates by the same number of invariant
/// generators, so the node is budget-neutral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineNode {
    pub base: Vec<String>,
    pub claims: Vec<AffineClaim>,
    pub flagged: Vec<usize>,
    pub replaced: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerCertificate {
    pub affine_node: Option<AffineNode>,
    pub budget: u64,
    pub case_id: String,
    pub domain: Domain,
    pub group: GroupSpec,
    pub levels: Vec<GeneratorLevel>,
    pub recovery: Vec<RatFunc>,
    pub relations: Vec<StepRelation>,
}

/// Invariants of the sum-zero monomial subgroup: the full product of the
/// block variables together with the elementary symmetric functions of their
/// p-th powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub generators: Vec<NamedGenerator>,
    pub group: GroupSpec,
    pub n: usize,
    pub p: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecializationClaim {
    pub point: Vec<CycRat>,
    pub value: CycRat,
}

/// The cubic discriminant as a polynomial identity: substituting the signed
/// elementary symmetric functions of the roots into `discriminant` gives the
/// square of `root_difference`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantCertificate {
    pub discriminant: Poly,
    pub root_difference: Poly,
    pub specializations: Vec<SpecializationClaim>,
}

/// Snapshot of the cyclic generator system for one prime; verification
/// rebuilds the system and compares field by field, then re-runs the full
/// structural check suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicCertificate {
    pub final_generators: Vec<RatFunc>,
    pub g1: MonomialAction,
    pub g2: MonomialAction,
    pub p: usize,
    pub u: Vec<RatFunc>,
    pub v: Vec<RatFunc>,
    pub z: RatFunc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Certificate {
    CyclicSystem(CyclicCertificate),
    Discriminant(DiscriminantCertificate),
    Kernel(KernelCertificate),
    Tower(TowerCertificate),
}

impl Certificate {
    pub fn case_id(&self) -> String {
        match self {
            Certificate::CyclicSystem(c) => format!("cyclic-p{}", c.p),
            Certificate::Discriminant(_) => "discriminant".into(),
            Certificate::Kernel(c) => format!("kernel-n{}-p{}", c.n, c.p),
            Certificate::Tower(c) => c.case_id.clone(),
        }
    }
}

impl TowerCertificate {
    /// All generator names in order of introduction (level order).
    pub fn names(&self) -> Vec<String> {
        self.levels
            .iter()
            .flat_map(|l| l.generators.iter().map(|g| g.name.clone()))
            .collect()
    }

    /// The free polynomial ring on the generator names, over the same
    /// cyclotomic coefficient field as the domain.
    pub fn name_ring(&self) -> Arc<Ring> {
        Ring::free(self.domain.p, self.names())
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn check_failed(check: &str, witness: String) -> Error {
    Error::CheckFailed { check: check.into(), witness }
}

fn xring(n: usize, p: usize) -> Arc<Ring> {
    Ring::free(p, (1..=n).map(|i| format!("x{i}")).collect())
}

/// Monomial action of a wreath element on the block variables `t1..tn`:
/// `t_i` maps to `zeta^{twist[top(i)]} * t_{top(i)}`. This assignment is a
/// group homomorphism for the wreath composition law used throughout.
pub fn wreath_monomial_action(w: &WreathElement, tring: &Arc<Ring>) -> Result<MonomialAction> {
    let n = w.n();
    if tring.nvars() != n {
        return Err(Error::RingMismatch);
    }
    let p = w.p;
    let scales = (1..=n)
        .map(|i| CycRat::zeta_pow(p, w.twist[w.top.apply(i) - 1] as i64))
        .collect::<Vec<_>>();
    MonomialAction::new(w.top.clone(), scales)
}

/// Find, for every entry of `exprs`, which entry its image under `action`
/// equals up to a p-th root of unity scale; returns the assembled monomial
/// action on the entries. Fails when some image is not of that shape.
fn derive_monomial_claim(
    element: &str,
    action: &MonomialAction,
    exprs: &[RatFunc],
    p: usize,
) -> Result<ActionClaim> {
    let mut images = Vec::with_capacity(exprs.len());
    let mut scales = Vec::with_capacity(exprs.len());
    for (j, f) in exprs.iter().enumerate() {
        let img = action.act_ratfunc(f);
        let mut found = None;
        'search: for (k, cand) in exprs.iter().enumerate() {
            for e in 0..p.max(2) {
                let scale = if p == 2 {
                    CycRat::from_integer(if e == 0 { 1 } else { -1 }, p)
                } else {
                    CycRat::zeta_pow(p, e as i64)
                };
                if img == cand.scale(&scale) {
                    found = Some((k + 1, scale));
                    break 'search;
                }
            }
        }
        match found {
            Some((k, scale)) => {
                images.push(k);
                scales.push(scale);
            }
            None => {
                return Err(check_failed(
                    "residual-action",
                    format!("image of entry {} under {element} is not monomial", j + 1),
                ))
            }
        }
    }
    let perm = crate::perm::Permutation::from_images(images)?;
    Ok(ActionClaim { action: MonomialAction::new(perm, scales)?, element: element.into() })
}

/// Derive the induced monomial action of an ambient permutation on the
/// domain variables: `act(def_b)` must equal `zeta^e * def_{b'}` for a unique
/// pair, where the defining expressions bridge the two coordinate systems.
/// The search is itself a proof: every reported image is an exact ambient
/// identity, so a returned action faithfully describes the element on the
/// domain subfield.
pub fn derive_domain_action(
    label: &str,
    perm: &crate::perm::Permutation,
    defs: &[RatFunc],
    dring: &Arc<Ring>,
) -> Result<MonomialAction> {
    let p = dring.p;
    let ambient = MonomialAction::from_permutation(perm, defs[0].ring().nvars(), p);
    let mut images = Vec::with_capacity(defs.len());
    let mut scales = Vec::with_capacity(defs.len());
    for (b, def) in defs.iter().enumerate() {
        let img = ambient.act_ratfunc(def);
        let mut found = None;
        'search: for (k, cand) in defs.iter().enumerate() {
            for e in 0..p.max(2) {
                let scale = if p == 2 {
                    CycRat::from_integer(if e == 0 { 1 } else { -1 }, p)
                } else {
                    CycRat::zeta_pow(p, e as i64)
                };
                if img == cand.scale(&scale) {
                    found = Some((k + 1, scale));
                    break 'search;
                }
            }
        }
        match found {
            Some((k, scale)) => {
                images.push(k);
                scales.push(scale);
            }
            None => {
                return Err(check_failed(
                    "domain-bridge",
                    format!("{label} does not act monomially on domain variable {}", b + 1),
                ))
            }
        }
    }
    let perm = crate::perm::Permutation::from_images(images)?;
    MonomialAction::new(perm, scales)
}

// ---------------------------------------------------------------------------
// Even-prime towers
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum SqRef {
    Name(String),
    /// Square of the terminal product divided by the squares named in `asq`.
    ProdSquare { prod: String, asq: Vec<String> },
}

enum Recipe {
    /// X^2 - v X + usq  (roots: the two paired squares).
    Quad { v: String, usq: SqRef },
    /// X = v - partner.
    LinSibling { v: String, partner: String },
    /// 2 (da - db) X - (w (da - db) + s).
    LinPair { w: String, s: String, da: String, db: String },
    /// X = w - partner.
    LinSiblingW { w: String, partner: String },
    /// X^2 - sq.
    QuadRoot { sq: String },
    /// X * (product of factors) - prod.
    LinLast { prod: String, factors: Vec<String> },
}

struct P2Step {
    name: String,
    expr: Poly,
    definition: String,
    recipe: Recipe,
}

struct P2Out {
    level0: Vec<(String, Poly, String)>,
    steps: Vec<P2Step>,
    stage_sizes: Vec<usize>,
    prod_name: String,
}

struct Cur {
    base: String,
    expr: Poly,
}

struct Fam {
    label: String,
    entries: Vec<(Poly, String)>,
}

/// One recursion stage: pair the current variables, hand the products and
/// the derived sum/skew families to the child, then (on unwind) emit the
/// relations recovering this stage's squares and family entries. Odd stage
/// sizes split their last index off as direct level-0 generators and fold
/// the last current variable into the running product multiplier `a`.
fn p2_stage(
    out: &mut P2Out,
    curs: Vec<Cur>,
    fams: Vec<Fam>,
    a: Poly,
    a_def: String,
    asq: Vec<String>,
    depth: usize,
) -> (Vec<SqRef>, BTreeMap<String, Vec<String>>) {
    let m = curs.len();
    if m == 1 {
        let prod = a.mul(&curs[0].expr);
        let def = if a_def.is_empty() {
            curs[0].base.clone()
        } else {
            format!("{}*{}", curs[0].base, a_def)
        };
        out.prod_name = "tprod".to_string();
        out.level0.push(("tprod".into(), prod, def));
        let mut fam_syms = BTreeMap::new();
        for f in fams {
            let sym = format!("{}_1", f.label);
            out.level0.push((sym.clone(), f.entries[0].0.clone(), f.entries[0].1.clone()));
            fam_syms.insert(f.label, vec![sym]);
        }
        return (vec![SqRef::ProdSquare { prod: "tprod".into(), asq }], fam_syms);
    }

    let mut curs = curs;
    let mut fams = fams;
    let mut a = a;
    let mut a_def = a_def;
    let mut asq = asq;
    let mut split_sq = None;
    let mut split_fam: BTreeMap<String, String> = BTreeMap::new();
    if m % 2 == 1 {
        let last = curs.pop().expect("nonempty");
        let sym = format!("sq_{}", last.base);
        out.level0.push((sym.clone(), last.expr.pow(2), format!("{}^2", last.base)));
        for f in fams.iter_mut() {
            let entry = f.entries.pop().expect("family entry per current");
            let esym = format!("{}_{}", f.label, m);
            out.level0.push((esym.clone(), entry.0, entry.1));
            split_fam.insert(f.label.clone(), esym);
        }
        a = a.mul(&last.expr);
        a_def = if a_def.is_empty() { last.base.clone() } else { format!("{}*{}", last.base, a_def) };
        asq.push(sym.clone());
        split_sq = Some(sym);
    }
    let m2 = curs.len() / 2;

    let mut next_curs = Vec::with_capacity(m2);
    let v_label = format!("v{depth}");
    let mut v_entries = Vec::with_capacity(m2);
    let mut w_fams: Vec<Fam> = fams
        .iter()
        .map(|f| Fam { label: format!("w{}", f.label), entries: Vec::with_capacity(m2) })
        .collect();
    let mut s_fams: Vec<Fam> = fams
        .iter()
        .map(|f| Fam { label: format!("s{}", f.label), entries: Vec::with_capacity(m2) })
        .collect();
    for i in 0..m2 {
        let (ya, yb) = (&curs[2 * i], &curs[2 * i + 1]);
        next_curs.push(Cur {
            base: format!("u{}_{}", depth + 1, i + 1),
            expr: ya.expr.mul(&yb.expr),
        });
        v_entries.push((
            ya.expr.pow(2).add(&yb.expr.pow(2)),
            format!("{}^2 + {}^2", ya.base, yb.base),
        ));
        let dsq = ya.expr.pow(2).sub(&yb.expr.pow(2));
        for (k, f) in fams.iter().enumerate() {
            let (ea, eb) = (&f.entries[2 * i], &f.entries[2 * i + 1]);
            w_fams[k].entries.push((
                ea.0.add(&eb.0),
                format!("{}_{} + {}_{}", f.label, 2 * i + 1, f.label, 2 * i + 2),
            ));
            s_fams[k].entries.push((
                ea.0.sub(&eb.0).mul(&dsq),
                format!(
                    "({}_{} - {}_{})*({}^2 - {}^2)",
                    f.label,
                    2 * i + 1,
                    f.label,
                    2 * i + 2,
                    ya.base,
                    yb.base
                ),
            ));
        }
    }
    let mut next_fams = vec![Fam { label: v_label.clone(), entries: v_entries }];
    next_fams.extend(w_fams);
    next_fams.extend(s_fams);

    let (child_ysq, child_fams) = p2_stage(out, next_curs, next_fams, a, a_def, asq, depth + 1);

    let stage_start = out.steps.len();
    let mut sq_syms = Vec::with_capacity(2 * m2);
    for i in 0..m2 {
        let (ya, yb) = (&curs[2 * i], &curs[2 * i + 1]);
        let v_sym = child_fams[&v_label][i].clone();
        let sqa = format!("sq_{}", ya.base);
        out.steps.push(P2Step {
            name: sqa.clone(),
            expr: ya.expr.pow(2),
            definition: format!("{}^2", ya.base),
            recipe: Recipe::Quad { v: v_sym.clone(), usq: child_ysq[i].clone() },
        });
        let sqb = format!("sq_{}", yb.base);
        out.steps.push(P2Step {
            name: sqb.clone(),
            expr: yb.expr.pow(2),
            definition: format!("{}^2", yb.base),
            recipe: Recipe::LinSibling { v: v_sym, partner: sqa.clone() },
        });
        sq_syms.push(sqa);
        sq_syms.push(sqb);
    }
    let mut fam_syms: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for f in &fams {
        let w_syms = &child_fams[&format!("w{}", f.label)];
        let s_syms = &child_fams[&format!("s{}", f.label)];
        let mut syms = Vec::with_capacity(f.entries.len());
        for i in 0..m2 {
            let fa = format!("{}_{}", f.label, 2 * i + 1);
            out.steps.push(P2Step {
                name: fa.clone(),
                expr: f.entries[2 * i].0.clone(),
                definition: f.entries[2 * i].1.clone(),
                recipe: Recipe::LinPair {
                    w: w_syms[i].clone(),
                    s: s_syms[i].clone(),
                    da: sq_syms[2 * i].clone(),
                    db: sq_syms[2 * i + 1].clone(),
                },
            });
            let fb = format!("{}_{}", f.label, 2 * i + 2);
            out.steps.push(P2Step {
                name: fb.clone(),
                expr: f.entries[2 * i + 1].0.clone(),
                definition: f.entries[2 * i + 1].1.clone(),
                recipe: Recipe::LinSiblingW { w: w_syms[i].clone(), partner: fa.clone() },
            });
            syms.push(fa);
            syms.push(fb);
        }
        if let Some(extra) = split_fam.get(&f.label) {
            syms.push(extra.clone());
        }
        fam_syms.insert(f.label.clone(), syms);
    }
    out.stage_sizes.push(out.steps.len() - stage_start);

    let mut ysq: Vec<SqRef> = sq_syms.into_iter().map(SqRef::Name).collect();
    if let Some(sym) = split_sq {
        ysq.push(SqRef::Name(sym));
    }
    (ysq, fam_syms)
}

/// Tower certificate for the orientation subgroup at the even prime, any
/// ambient degree `n >= 2`. Odd `n` contributes its last coordinate as a free
/// invariant generator.
pub fn build_p2_tower(n: usize) -> Result<TowerCertificate> {
    if n < 2 {
        return Err(Error::UnsupportedDegree {
            n,
            reason: "a tower needs at least two coordinates".into(),
        });
    }
    let p = 2usize;
    let ring = xring(n, p);
    let group = orientation_group(n, p)?;

    let even_n = n - (n % 2);
    let m0 = even_n / 2;
    let tvar = |i: usize| Poly::var(&ring, i);
    let curs: Vec<Cur> = (0..m0)
        .map(|i| Cur {
            base: format!("t{}", i + 1),
            expr: tvar(2 * i).sub(&tvar(2 * i + 1)),
        })
        .collect();
    let fams = vec![Fam {
        label: "z".into(),
        entries: (0..m0)
            .map(|i| {
                (tvar(2 * i).add(&tvar(2 * i + 1)), format!("x{} + x{}", 2 * i + 1, 2 * i + 2))
            })
            .collect(),
    }];

    let mut out = P2Out {
        level0: Vec::new(),
        steps: Vec::new(),
        stage_sizes: Vec::new(),
        prod_name: String::new(),
    };
    let (top_ysq, top_fams) =
        p2_stage(&mut out, curs, fams, Poly::one(&ring), String::new(), Vec::new(), 1);
    if n % 2 == 1 {
        out.level0.push((format!("x{n}"), Poly::var(&ring, n - 1), format!("x{n}")));
    }

    // J-level: the block differences themselves.
    let mut t_syms: Vec<String> = Vec::with_capacity(m0);
    let j_start = out.steps.len();
    if m0 >= 2 {
        for (i, sq) in top_ysq.iter().enumerate().take(m0 - 1) {
            let sq_name = match sq {
                SqRef::Name(s) => s.clone(),
                SqRef::ProdSquare { .. } => unreachable!("m0 >= 2 always returns names"),
            };
            let name = format!("t{}", i + 1);
            out.steps.push(P2Step {
                name: name.clone(),
                expr: tvar(2 * i).sub(&tvar(2 * i + 1)),
                definition: format!("x{} - x{}", 2 * i + 1, 2 * i + 2),
                recipe: Recipe::QuadRoot { sq: sq_name },
            });
            t_syms.push(name);
        }
        let name = format!("t{m0}");
        out.steps.push(P2Step {
            name: name.clone(),
            expr: tvar(2 * (m0 - 1)).sub(&tvar(2 * m0 - 1)),
            definition: format!("x{} - x{}", 2 * m0 - 1, 2 * m0),
            recipe: Recipe::LinLast { prod: out.prod_name.clone(), factors: t_syms.clone() },
        });
        t_syms.push(name);
    } else {
        t_syms.push(out.prod_name.clone());
    }
    let j_size = out.steps.len() - j_start;

    // Name ring: level-0 names then step names in emission order.
    let mut names: Vec<String> = out.level0.iter().map(|g| g.0.clone()).collect();
    names.extend(out.steps.iter().map(|s| s.name.clone()));
    let nring = Ring::free(p, names.clone());
    let index: BTreeMap<String, usize> =
        names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let nv = |name: &str| RatFunc::var(&nring, index[name]);
    let sqref = |r: &SqRef| -> Result<RatFunc> {
        match r {
            SqRef::Name(s) => Ok(nv(s)),
            SqRef::ProdSquare { prod, asq } => {
                let mut f = nv(prod).mul(&nv(prod));
                for s in asq {
                    f = f.div(&nv(s))?;
                }
                Ok(f)
            }
        }
    };

    let mut relations = Vec::with_capacity(out.steps.len());
    let mut budget = 1u64;
    for step in &out.steps {
        let one = RatFunc::one(&nring);
        let (coefficients, degree_claim) = match &step.recipe {
            Recipe::Quad { v, usq } => (vec![sqref(usq)?, nv(v).neg(), one], 2),
            Recipe::LinSibling { v, partner } => (vec![nv(partner).sub(&nv(v)), one], 1),
            Recipe::LinPair { w, s, da, db } => {
                let delta = nv(da).sub(&nv(db));
                let two = RatFunc::constant(&nring, CycRat::from_integer(2, p));
                (vec![nv(w).mul(&delta).add(&nv(s)).neg(), two.mul(&delta)], 1)
            }
            Recipe::LinSiblingW { w, partner } => (vec![nv(partner).sub(&nv(w)), one], 1),
            Recipe::QuadRoot { sq } => (vec![nv(sq).neg(), RatFunc::zero(&nring), one], 2),
            Recipe::LinLast { prod, factors } => {
                let mut lead = RatFunc::one(&nring);
                for f in factors {
                    lead = lead.mul(&nv(f));
                }
                (vec![nv(prod).neg(), lead], 1)
            }
        };
        budget *= degree_claim;
        relations.push(StepRelation {
            coefficients,
            definition: step.definition.clone(),
            degree_claim,
            new_expr: RatFunc::from_poly(step.expr.clone()),
            new_generator: step.name.clone(),
        });
    }

    // Levels: level 0, one level per emitted stage (coarsest first), J-level.
    let mut levels = vec![GeneratorLevel {
        generators: out
            .level0
            .iter()
            .map(|(name, expr, def)| NamedGenerator {
                definition: def.clone(),
                expr: RatFunc::from_poly(expr.clone()),
                name: name.clone(),
            })
            .collect(),
        residual_action: Vec::new(),
    }];
    let mut cursor = 0usize;
    let mut groups: Vec<&[P2Step]> = Vec::new();
    for size in &out.stage_sizes {
        groups.push(&out.steps[cursor..cursor + size]);
        cursor += size;
    }
    if j_size > 0 {
        groups.push(&out.steps[cursor..cursor + j_size]);
    }
    for batch in groups {
        let generators: Vec<NamedGenerator> = batch
            .iter()
            .map(|s| NamedGenerator {
                definition: s.definition.clone(),
                expr: RatFunc::from_poly(s.expr.clone()),
                name: s.name.clone(),
            })
            .collect();
        let exprs: Vec<RatFunc> = generators.iter().map(|g| g.expr.clone()).collect();
        let mut residual_action = Vec::with_capacity(group.generators.len());
        for g in &group.generators {
            let ambient = MonomialAction::from_permutation(&g.images, n, p);
            residual_action.push(derive_monomial_claim(&g.label, &ambient, &exprs, p)?);
        }
        levels.push(GeneratorLevel { generators, residual_action });
    }

    // Recovery: x_{2i-1} = (z_i + t_i)/2, x_{2i} = (z_i - t_i)/2.
    let z_syms = &top_fams["z"];
    let half = RatFunc::constant(&nring, CycRat::from_ratio(1, 2, p));
    let mut recovery = Vec::with_capacity(n);
    for i in 0..m0 {
        let z = nv(&z_syms[i]);
        let t = nv(&t_syms[i]);
        recovery.push(z.add(&t).mul(&half));
        recovery.push(z.sub(&t).mul(&half));
    }
    if n % 2 == 1 {
        recovery.push(nv(&format!("x{n}")));
    }

    let domain = Domain {
        defs: (0..n).map(|i| RatFunc::var(&ring, i)).collect(),
        free_indices: Vec::new(),
        p,
        solved: Vec::new(),
        vars: (1..=n).map(|i| format!("x{i}")).collect(),
    };

    Ok(TowerCertificate {
        affine_node: None,
        budget,
        case_id: format!("p2-n{n}"),
        domain,
        group,
        levels,
        recovery,
        relations,
    })
}

// ---------------------------------------------------------------------------
// Odd-prime towers
// ---------------------------------------------------------------------------

/// Tower certificate for the orientation subgroup at an odd prime `p` with
/// `n = m*p + r` ambient coordinates, `m <= p` blocks, `r < p` trailing free
/// coordinates. The block combinations `t_b` diagonalise the bottom
/// rotations; the non-final coordinates of each block are covered by the
/// affine node. The fully filled case `m == p` needs the cyclic residual
/// level and ships for `p = 3`.
pub fn build_podd_tower(n: usize, p: usize) -> Result<TowerCertificate> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::UnsupportedShape {
            n,
            p,
            reason: "the even prime has its own tower builder".into(),
        });
    }
    if n == 0 {
        return Err(Error::UnsupportedDegree { n, reason: "empty coordinate set".into() });
    }
    let m = n / p;
    if m > p {
        return Err(Error::UnsupportedShape {
            n,
            p,
            reason: format!("more than p = {p} blocks is out of scope"),
        });
    }
    if m == p && p > 3 {
        return Err(Error::UnsupportedShape {
            n,
            p,
            reason: "the fully filled cyclic residual level ships for p = 3".into(),
        });
    }

    let ring = xring(n, p);
    let group = orientation_group(n, p)?;
    let zeta = |k: i64| CycRat::zeta_pow(p, k);

    // Domain: t_b = sum_u zeta^{-(u-1)} x_{(b-1)p+u}, then trailing x's.
    let mut dvars: Vec<String> = (1..=m).map(|b| format!("t{b}")).collect();
    dvars.extend((m * p + 1..=n).map(|i| format!("x{i}")));
    let dring = Ring::free(p, dvars.clone());
    let mut defs = Vec::with_capacity(dvars.len());
    for b in 0..m {
        let mut acc = Poly::zero(&ring);
        for u in 0..p {
            acc = acc.add(&Poly::var(&ring, b * p + u).scale(&zeta(-(u as i64))));
        }
        defs.push(RatFunc::from_poly(acc));
    }
    for i in m * p..n {
        defs.push(RatFunc::var(&ring, i));
    }

    // Solve-back: x_{bp} = zeta^{-(p-1)} (t_b - sum_{u<p} zeta^{-(u-1)} x_..).
    // Over the extended ring x1..xn, t1..tm.
    let mut xtvars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    xtvars.extend((1..=m).map(|b| format!("t{b}")));
    let xtring = Ring::free(p, xtvars);
    let mut solved = Vec::with_capacity(m);
    for b in 0..m {
        let mut acc = Poly::var(&xtring, n + b);
        for u in 0..p - 1 {
            acc = acc.sub(&Poly::var(&xtring, b * p + u).scale(&zeta(-(u as i64))));
        }
        solved.push(SolvedVar {
            expr: RatFunc::from_poly(acc.scale(&zeta(-((p - 1) as i64)).inverse()?)),
            index: b * p + p,
        });
    }
    let free_indices: Vec<usize> =
        (0..m).flat_map(|b| (1..p).map(move |u| b * p + u)).collect();

    // Level-0 invariant generators over the domain ring.
    let tv = |b: usize| Poly::var(&dring, b);
    let tprod = (0..m).fold(Poly::one(&dring), |acc, b| acc.mul(&tv(b)));
    let tprod_def =
        (1..=m).map(|b| format!("t{b}")).collect::<Vec<_>>().join("*");
    let mut level0: Vec<NamedGenerator> = Vec::new();
    if m >= 1 {
        level0.push(NamedGenerator {
            definition: tprod_def.clone(),
            expr: RatFunc::from_poly(tprod.clone()),
            name: "tp".into(),
        });
    }
    let cyclic = if m == p { Some(CyclicSystem::build(p)?) } else { None };
    if let Some(sys) = &cyclic {
        // Reinterpret the cyclic system with x_i -> t_i^p and w -> t1..tp.
        let mut images: Vec<RatFunc> =
            (0..p).map(|b| RatFunc::from_poly(tv(b).pow(p as u32))).collect();
        images.push(RatFunc::from_poly(tprod.clone()));
        for (k, g) in sys.final_generators.iter().enumerate() {
            level0.push(NamedGenerator {
                definition: format!("G{k}(t1^{p},...,t{p}^{p}; {tprod_def})"),
                expr: g.substitute(&images)?,
                name: format!("hg{k}"),
            });
        }
    } else {
        for b in 1..m {
            level0.push(NamedGenerator {
                definition: format!("t{b}^{p}"),
                expr: RatFunc::from_poly(tv(b - 1).pow(p as u32)),
                name: format!("tc{b}"),
            });
        }
    }
    for i in m * p + 1..=n {
        level0.push(NamedGenerator {
            definition: format!("x{i}"),
            expr: RatFunc::var(&dring, m + (i - m * p - 1)),
            name: format!("x{i}"),
        });
    }

    // Steps.
    struct POddStep {
        name: String,
        expr: RatFunc,
        definition: String,
        coeff_recipe: PORecipe,
    }
    enum PORecipe {
        /// X^p - c0 with c0 a name-ring expression built by the closure id.
        Root { of: String },
        RootProduct,
        LinearTc { b: usize },
        LinLast,
    }
    let mut mid_steps: Vec<POddStep> = Vec::new();
    let mut j_steps: Vec<POddStep> = Vec::new();
    if m >= 2 {
        if cyclic.is_some() {
            let sys = cyclic.as_ref().expect("cyclic present");
            let mut images: Vec<RatFunc> =
                (0..p).map(|b| RatFunc::from_poly(tv(b).pow(p as u32))).collect();
            images.push(RatFunc::from_poly(tprod.clone()));
            mid_steps.push(POddStep {
                name: "s0".into(),
                expr: sys.s[0].substitute(&images)?,
                definition: "U1/U0 evaluated at (t1^p,...,tp^p; tp)".into(),
                coeff_recipe: PORecipe::RootProduct,
            });
            for b in 1..p {
                mid_steps.push(POddStep {
                    name: format!("tc{b}"),
                    expr: RatFunc::from_poly(tv(b - 1).pow(p as u32)),
                    definition: format!("t{b}^{p}"),
                    coeff_recipe: PORecipe::LinearTc { b },
                });
            }
        }
        for b in 1..m {
            j_steps.push(POddStep {
                name: format!("t{b}"),
                expr: RatFunc::var(&dring, b - 1),
                definition: defs[b - 1].to_string(),
                coeff_recipe: PORecipe::Root { of: format!("tc{b}") },
            });
        }
        j_steps.push(POddStep {
            name: format!("t{m}"),
            expr: RatFunc::var(&dring, m - 1),
            definition: defs[m - 1].to_string(),
            coeff_recipe: PORecipe::LinLast,
        });
    }

    // Name ring.
    let mut names: Vec<String> = level0.iter().map(|g| g.name.clone()).collect();
    names.extend(mid_steps.iter().map(|s| s.name.clone()));
    names.extend(j_steps.iter().map(|s| s.name.clone()));
    let nring = Ring::free(p, names.clone());
    let index: BTreeMap<String, usize> =
        names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let nv = |name: &str| RatFunc::var(&nring, index[name]);

    // Formal pieces for the cyclic residual level: G_k as names (tail from
    // the partition of unity), v_j = G_{j+1}/G_j, and the chain
    // prod_{j<i} s_j = s0^i / prod_{j<=i-2} v_j^{i-1-j}.
    let formal_g = |k: usize| -> RatFunc {
        if k < p - 1 {
            nv(&format!("hg{k}"))
        } else {
            let mut tail = RatFunc::one(&nring);
            for j in 0..p - 1 {
                tail = tail.sub(&nv(&format!("hg{j}")));
            }
            tail
        }
    };
    let formal_v = |j: usize| -> Result<RatFunc> { formal_g((j + 1) % p).div(&formal_g(j)) };
    let formal_chain = |i: usize| -> Result<RatFunc> {
        // prod_{j<i} s_j with s_j = s0 / (v_0 ... v_{j-1}).
        let mut acc = nv("s0").pow(i as i64)?;
        for j in 0..i.saturating_sub(1) {
            acc = acc.div(&formal_v(j)?.pow((i - 1 - j) as i64)?)?;
        }
        Ok(acc)
    };

    let mut relations: Vec<StepRelation> = Vec::new();
    let mut budget = 1u64;
    for step in mid_steps.iter().chain(j_steps.iter()) {
        let one = RatFunc::one(&nring);
        let zerof = RatFunc::zero(&nring);
        let (coefficients, degree_claim): (Vec<RatFunc>, u64) = match &step.coeff_recipe {
            PORecipe::Root { of } => {
                let mut c = vec![nv(of).neg()];
                c.extend(std::iter::repeat_n(zerof.clone(), p - 1));
                c.push(one);
                (c, p as u64)
            }
            PORecipe::RootProduct => {
                // s0^p = prod_j v_j^{p-1-j}.
                let mut prod = RatFunc::one(&nring);
                for j in 0..p - 1 {
                    prod = prod.mul(&formal_v(j)?.pow((p - 1 - j) as i64)?);
                }
                let mut c = vec![prod.neg()];
                c.extend(std::iter::repeat_n(zerof.clone(), p - 1));
                c.push(one);
                (c, p as u64)
            }
            PORecipe::LinearTc { b } => {
                // tc_b = tp * pi_b / pi_{b-1},
                // pi_k proportional to sum_i zeta^{-ik} chain_i.
                let pi = |k: usize| -> Result<RatFunc> {
                    let mut acc = RatFunc::zero(&nring);
                    for i in 0..p {
                        acc = acc.add(
                            &formal_chain(i)?
                                .scale(&CycRat::zeta_pow(p, -((i * k) as i64))),
                        );
                    }
                    Ok(acc)
                };
                let xbar = pi(*b)?.div(&pi(b - 1)?)?;
                (vec![nv("tp").mul(&xbar).neg(), one], 1)
            }
            PORecipe::LinLast => {
                let mut lead = RatFunc::one(&nring);
                for b in 1..m {
                    lead = lead.mul(&nv(&format!("t{b}")));
                }
                (vec![nv("tp").neg(), lead], 1)
            }
        };
        budget *= degree_claim;
        relations.push(StepRelation {
            coefficients,
            definition: step.definition.clone(),
            degree_claim,
            new_expr: step.expr.clone(),
            new_generator: step.name.clone(),
        });
    }

    // Levels with residual claims: J-level entries transform monomially.
    let mut levels = vec![GeneratorLevel { generators: level0, residual_action: Vec::new() }];
    let block_actions: Vec<(String, MonomialAction)> = group
        .generators
        .iter()
        .map(|g| Ok((g.label.clone(), derive_domain_action(&g.label, &g.images, &defs, &dring)?)))
        .collect::<Result<Vec<_>>>()?;
    if !mid_steps.is_empty() {
        levels.push(GeneratorLevel {
            generators: mid_steps
                .iter()
                .map(|s| NamedGenerator {
                    definition: s.definition.clone(),
                    expr: s.expr.clone(),
                    name: s.name.clone(),
                })
                .collect(),
            residual_action: Vec::new(),
        });
    }
    if !j_steps.is_empty() {
        let generators: Vec<NamedGenerator> = j_steps
            .iter()
            .map(|s| NamedGenerator {
                definition: s.definition.clone(),
                expr: s.expr.clone(),
                name: s.name.clone(),
            })
            .collect();
        let exprs: Vec<RatFunc> = generators.iter().map(|g| g.expr.clone()).collect();
        let mut residual_action = Vec::with_capacity(block_actions.len());
        for (label, act) in &block_actions {
            residual_action.push(derive_monomial_claim(label, act, &exprs, p)?);
        }
        levels.push(GeneratorLevel { generators, residual_action });
    }

    // Affine node covering the flagged coordinates.
    let t_name = |b: usize| -> String {
        if m >= 2 {
            format!("t{b}")
        } else {
            "tp".into()
        }
    };
    let affine_node = if m >= 1 {
        let base: Vec<String> = (1..=m).map(t_name).collect();
        let pos_of: BTreeMap<usize, usize> =
            free_indices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut claims = Vec::with_capacity(group.generators.len());
        for g in &group.generators {
            let mut images = Vec::with_capacity(free_indices.len());
            for &f in &free_indices {
                let img = g.images.apply(f);
                if let Some(&pos) = pos_of.get(&img) {
                    images.push(AffineImage {
                        constant: RatFunc::zero(&nring),
                        linear: vec![LinearTerm { coeff: CycRat::one(p), position: pos }],
                    });
                } else {
                    // img is the final coordinate of block b', recovered as
                    // zeta^{1-p}(t_{b'} - sum_{u<p} zeta^{-(u-1)} x_..).
                    let b1 = (img - 1) / p;
                    debug_assert_eq!(img, b1 * p + p);
                    let lead = zeta(-((p - 1) as i64)).inverse()?;
                    let constant = nv(&t_name(b1 + 1)).scale(&lead);
                    let linear = (0..p - 1)
                        .map(|u| LinearTerm {
                            coeff: zeta(-(u as i64)).mul(&lead).neg(),
                            position: pos_of[&(b1 * p + u + 1)],
                        })
                        .collect();
                    images.push(AffineImage { constant, linear });
                }
            }
            claims.push(AffineClaim { element: g.label.clone(), images });
        }
        Some(AffineNode { base, claims, replaced: free_indices.len(), flagged: free_indices.clone() })
    } else {
        None
    };

    // Recovery per domain variable.
    let mut recovery = Vec::with_capacity(dvars.len());
    for b in 1..=m {
        recovery.push(nv(&t_name(b)));
    }
    for i in m * p + 1..=n {
        recovery.push(nv(&format!("x{i}")));
    }

    Ok(TowerCertificate {
        affine_node,
        budget,
        case_id: format!("podd-n{n}-p{p}"),
        domain: Domain { defs, free_indices, p, solved, vars: dvars },
        group,
        levels,
        recovery,
        relations,
    })
}

// ---------------------------------------------------------------------------
// Kernel invariants
// ---------------------------------------------------------------------------

/// Invariant generators for the sum-zero monomial subgroup on `t1..tn`:
/// the full product and the elementary symmetric functions of the p-th
/// powers. The group is stored through its faithful ambient embedding on
/// `n*p` points.
pub fn build_kernel_generators(n: usize, p: usize) -> Result<KernelCertificate> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::UnsupportedDegree { n, reason: "empty coordinate set".into() });
    }
    let tring = Ring::free(p, (1..=n).map(|b| format!("t{b}")).collect());
    let mut generators = Vec::with_capacity(n);
    let prod = (0..n).fold(Poly::one(&tring), |acc, b| acc.mul(&Poly::var(&tring, b)));
    generators.push(NamedGenerator {
        definition: format!("e_{n}(t1,...,t{n})"),
        expr: RatFunc::from_poly(prod),
        name: "en".into(),
    });
    let powers: Vec<Poly> = (0..n).map(|b| Poly::var(&tring, b).pow(p as u32)).collect();
    for k in 1..n {
        // e_k of the p-th powers, expanded over the subsets directly.
        let mut acc = Poly::zero(&tring);
        let mut choose = vec![0usize; k];
        fn rec(
            acc: &mut Poly,
            powers: &[Poly],
            choose: &mut [usize],
            depth: usize,
            start: usize,
            tring: &Arc<Ring>,
        ) {
            if depth == choose.len() {
                let mut term = Poly::one(tring);
                for &i in choose.iter() {
                    term = term.mul(&powers[i]);
                }
                *acc = acc.add(&term);
                return;
            }
            for i in start..powers.len() {
                choose[depth] = i;
                rec(acc, powers, choose, depth + 1, i + 1, tring);
            }
        }
        rec(&mut acc, &powers, &mut choose, 0, 0, &tring);
        generators.push(NamedGenerator {
            definition: format!("e_{k}(t1^{p},...,t{n}^{p})"),
            expr: RatFunc::from_poly(acc),
            name: format!("e{k}p"),
        });
    }

    let generators_perm = kernel_generators(n, p)
        .into_iter()
        .map(|g| crate::group::LabeledGenerator { images: g.element.embed(), label: g.label })
        .collect();
    let group = GroupSpec {
        family: crate::group::Family::KernelSylowAmbient,
        generators: generators_perm,
        n: n * p,
        p,
    };
    Ok(KernelCertificate { generators, group, n, p })
}

// ---------------------------------------------------------------------------
// Discriminant identity
// ---------------------------------------------------------------------------

/// The cubic discriminant certificate: `disc(b, c, w)` equals the squared
/// root-difference product under the signed Vieta substitution
/// `b = -(x1+x2+x3)`, `c = x1x2+x1x3+x2x3`, `w = -x1x2x3`.
pub fn build_discriminant() -> Result<DiscriminantCertificate> {
    let p = 2usize;
    let bcw = Ring::free(p, vec!["b".into(), "c".into(), "w".into()]);
    let b = Poly::var(&bcw, 0);
    let c = Poly::var(&bcw, 1);
    let w = Poly::var(&bcw, 2);
    let cst = |k: i64| Poly::integer(&bcw, k);
    let discriminant = cst(18)
        .mul(&b)
        .mul(&c)
        .mul(&w)
        .sub(&cst(4).mul(&b.pow(3)).mul(&w))
        .add(&b.pow(2).mul(&c.pow(2)))
        .sub(&cst(4).mul(&c.pow(3)))
        .sub(&cst(27).mul(&w.pow(2)));
    let xr = xring(3, p);
    let x = |i: usize| Poly::var(&xr, i);
    let root_difference = x(0).sub(&x(1)).mul(&x(0).sub(&x(2))).mul(&x(1).sub(&x(2)));
    let q = |k: i64| CycRat::from_integer(k, p);
    let specializations = vec![
        SpecializationClaim { point: vec![q(0), q(1), q(2)], value: q(4) },
        SpecializationClaim { point: vec![q(0), q(0), q(1)], value: q(0) },
    ];
    Ok(DiscriminantCertificate { discriminant, root_difference, specializations })
}

/// Snapshot certificate of the cyclic generator system at prime `p`.
pub fn build_cyclic_certificate(p: usize) -> Result<CyclicCertificate> {
    let sys = CyclicSystem::build(p)?;
    Ok(CyclicCertificate {
        final_generators: sys.final_generators.clone(),
        g1: sys.g1.clone(),
        g2: sys.g2.clone(),
        p,
        u: sys.u.clone(),
        v: sys.v.clone(),
        z: sys.z.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_budgets_match_group_orders() {
        for (n, expect) in [(2usize, 1u64), (3, 1), (4, 4), (5, 4), (6, 8), (7, 8), (8, 64)] {
            let cert = build_p2_tower(n).unwrap();
            assert_eq!(cert.budget, expect, "budget at n = {n}");
            let order = cert.group.enumerate(1 << 20).unwrap().len() as u64;
            assert_eq!(cert.budget, order, "group order at n = {n}");
            let product: u64 = cert.relations.iter().map(|r| r.degree_claim).product();
            assert_eq!(product, cert.budget);
        }
    }

    #[test]
    fn p2_level0_counts_match_ambient() {
        for n in 2..=9 {
            let cert = build_p2_tower(n).unwrap();
            assert_eq!(cert.levels[0].generators.len(), n, "level-0 count at n = {n}");
            assert_eq!(cert.recovery.len(), n);
        }
    }

    #[test]
    fn p2_n4_frozen_shape() {
        let cert = build_p2_tower(4).unwrap();
        let names: Vec<&str> =
            cert.levels[0].generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["tprod", "v1_1", "wz_1", "sz_1"]);
        assert_eq!(
            cert.levels[0].generators[0].expr.to_string(),
            "x1*x3 - x1*x4 - x2*x3 + x2*x4"
        );
        let steps: Vec<&str> =
            cert.relations.iter().map(|r| r.new_generator.as_str()).collect();
        assert_eq!(steps, ["sq_t1", "sq_t2", "z_1", "z_2", "t1", "t2"]);
        let degrees: Vec<u64> = cert.relations.iter().map(|r| r.degree_claim).collect();
        assert_eq!(degrees, [2, 1, 1, 1, 2, 1]);
    }

    #[test]
    fn p2_n6_has_split_constants() {
        let cert = build_p2_tower(6).unwrap();
        let names: Vec<&str> =
            cert.levels[0].generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["sq_t3", "z_3", "tprod", "v1_1", "wz_1", "sz_1"]);
        assert_eq!(cert.budget, 8);
    }

    #[test]
    fn p2_n8_level0_is_three_stage() {
        let cert = build_p2_tower(8).unwrap();
        assert_eq!(cert.levels[0].generators.len(), 8);
        assert_eq!(cert.budget, 64);
        // Three step levels: coarse stage, middle stage, block differences.
        assert_eq!(cert.levels.len(), 4);
        let last = cert.levels.last().unwrap();
        let names: Vec<&str> = last.generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["t1", "t2", "t3", "t4"]);
        assert!(!last.residual_action.is_empty());
    }

    #[test]
    fn p2_rejects_degenerate_degrees() {
        assert!(matches!(build_p2_tower(1), Err(Error::UnsupportedDegree { .. })));
        assert!(matches!(build_p2_tower(0), Err(Error::UnsupportedDegree { .. })));
    }

    #[test]
    fn podd_budgets_match_group_orders() {
        for (n, p, expect) in [(3usize, 3usize, 1u64), (6, 3, 3), (9, 3, 27), (10, 5, 5), (4, 3, 1)] {
            let cert = build_podd_tower(n, p).unwrap();
            assert_eq!(cert.budget, expect, "budget at (n, p) = ({n}, {p})");
            let order = cert.group.enumerate(1 << 20).unwrap().len() as u64;
            assert_eq!(cert.budget, order, "order at (n, p) = ({n}, {p})");
        }
    }

    #[test]
    fn podd_level0_plus_flagged_covers_ambient() {
        for (n, p) in [(3usize, 3usize), (6, 3), (9, 3), (10, 5), (7, 3), (2, 3)] {
            let cert = build_podd_tower(n, p).unwrap();
            let named = cert.levels[0].generators.len();
            let flagged =
                cert.affine_node.as_ref().map(|a| a.flagged.len()).unwrap_or(0);
            assert_eq!(named + flagged, n, "coverage at (n, p) = ({n}, {p})");
        }
    }

    #[test]
    fn podd_t_definitions_are_frozen_for_6_3() {
        let cert = build_podd_tower(6, 3).unwrap();
        assert_eq!(cert.domain.defs[0].to_string(), "x1 + (-1 - z)*x2 + (z)*x3");
        assert_eq!(cert.domain.defs[1].to_string(), "x4 + (-1 - z)*x5 + (z)*x6");
        assert_eq!(cert.domain.solved.len(), 2);
        let names: Vec<&str> =
            cert.levels[0].generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["tp", "tc1"]);
        let steps: Vec<&str> =
            cert.relations.iter().map(|r| r.new_generator.as_str()).collect();
        assert_eq!(steps, ["t1", "t2"]);
        let degrees: Vec<u64> = cert.relations.iter().map(|r| r.degree_claim).collect();
        assert_eq!(degrees, [3, 1]);
    }

    #[test]
    fn podd_9_3_has_cyclic_residual_level() {
        let cert = build_podd_tower(9, 3).unwrap();
        let names: Vec<&str> =
            cert.levels[0].generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["tp", "hg0", "hg1"]);
        let steps: Vec<&str> =
            cert.relations.iter().map(|r| r.new_generator.as_str()).collect();
        assert_eq!(steps, ["s0", "tc1", "tc2", "t1", "t2", "t3"]);
        let degrees: Vec<u64> = cert.relations.iter().map(|r| r.degree_claim).collect();
        assert_eq!(degrees, [3, 1, 1, 3, 3, 1]);
        assert_eq!(cert.budget, 27);
        assert_eq!(cert.affine_node.as_ref().unwrap().flagged, vec![1, 2, 4, 5, 7, 8]);
    }

    #[test]
    fn podd_rejects_out_of_scope_shapes() {
        assert!(matches!(build_podd_tower(12, 3), Err(Error::UnsupportedShape { .. })));
        assert!(matches!(build_podd_tower(6, 2), Err(Error::UnsupportedShape { .. })));
        assert!(matches!(build_podd_tower(25, 5), Err(Error::UnsupportedShape { .. })));
        assert!(matches!(build_podd_tower(6, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn kernel_generators_are_frozen_for_2_3() {
        let cert = build_kernel_generators(2, 3).unwrap();
        assert_eq!(cert.generators.len(), 2);
        assert_eq!(cert.generators[0].expr.to_string(), "t1*t2");
        assert_eq!(cert.generators[1].expr.to_string(), "t1^3 + t2^3");
        assert_eq!(cert.group.n, 6);
    }

    #[test]
    fn wreath_action_is_a_homomorphism() {
        for (n, p) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let tring = Ring::free(p, (1..=n).map(|b| format!("t{b}")).collect());
            let gens: Vec<WreathElement> =
                kernel_generators(n, p).into_iter().map(|g| g.element).collect();
            let f = Poly::var(&tring, 0)
                .add(&Poly::var(&tring, n - 1).pow(2))
                .add(&Poly::one(&tring));
            for a in &gens {
                for b in &gens {
                    let joint =
                        wreath_monomial_action(&a.compose(b), &tring).unwrap().act_poly(&f);
                    let seq = wreath_monomial_action(a, &tring)
                        .unwrap()
                        .act_poly(&wreath_monomial_action(b, &tring).unwrap().act_poly(&f));
                    assert_eq!(joint, seq, "homomorphism at (n, p) = ({n}, {p})");
                }
            }
        }
    }

    #[test]
    fn discriminant_identity_holds() {
        let cert = build_discriminant().unwrap();
        let xr = cert.root_difference.ring().clone();
        let e1 = Poly::elementary_symmetric(&xr, 1, &[0, 1, 2]);
        let e2 = Poly::elementary_symmetric(&xr, 2, &[0, 1, 2]);
        let e3 = Poly::elementary_symmetric(&xr, 3, &[0, 1, 2]);
        let images = vec![
            RatFunc::from_poly(e1.neg()),
            RatFunc::from_poly(e2),
            RatFunc::from_poly(e3.neg()),
        ];
        let substituted =
            RatFunc::from_poly(cert.discriminant.clone()).substitute(&images).unwrap();
        assert_eq!(substituted, RatFunc::from_poly(cert.root_difference.pow(2)));
    }

    #[test]
    fn certificate_json_round_trips() {
        let cert = Certificate::Tower(build_p2_tower(4).unwrap());
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("\"case\":\"tower\""));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);

        let kc = Certificate::Kernel(build_kernel_generators(2, 3).unwrap());
        let text = serde_json::to_string(&kc).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, kc);
    }
}
