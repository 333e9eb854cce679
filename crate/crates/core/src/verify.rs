//! Certificate verification: every claim stored in a certificate is
//! re-checked from scratch by exact symbolic computation, and the results are
//! assembled into a deterministic report.
//!
//! # Soundness of the acceptance logic
//!
//! Write `E = F(x1..xn)` for the ambient rational function field, `G` for the
//! certificate's group acting on it, and `E0` for the subfield generated by
//! the level-0 generators. The checks combine as follows:
//!
//! * **invariance** shows every level-0 generator is fixed by every group
//!   generator, hence by all of `G`; so `E0` is contained in the fixed field
//!   `E^G`.
//! * **relations** and **recovery** show `E` is reached from `E0` by the
//!   chain of step adjunctions: each step satisfies a monic-equivalent
//!   polynomial of the claimed degree over the field below it (leading
//!   coefficient checked nonzero), and the recovery expressions rewrite every
//!   working coordinate as a rational function of the adjoined names. Hence
//!   `[E : E0] <=` product of the degree claims `= budget`.
//! * **budget** enumerates `G` and checks `budget == |G|`. Since `G` acts
//!   faithfully (**faithful**) on `E`, Artin's theorem gives exactly
//!   `[E : E^G] = |G|`. Combining: `|G| = [E : E^G] <= [E : E0] <= |G|`,
//!   which forces `E0 = E^G`.
//! * When an **affine node** is present, the flagged coordinates are not part
//!   of the invariant level; the checks instead confirm the group acts on
//!   them affinely with coefficients in the recovered base field and acts
//!   faithfully on that base. The affine linear-action theorem then replaces
//!   the flagged coordinates by the same number of invariant generators
//!   without changing any field degree, so the budget comparison applies to
//!   the block subfield verbatim and the conclusion extends to all of `E`.
//!
//! This argument is exercised end to end on the two-variable symmetric toy
//! case in the tests, where the fixed field is classically known to be
//! generated by the two elementary symmetric functions.
//!
//! Checks never trust stored claims: residual actions are re-derived from the
//! group generators and compared against the stored ones, solve-back
//! expressions are substituted and compared with the identity, and every
//! polynomial identity is expanded exactly. Random evaluation appears only in
//! the Jacobian rank check, where a full-rank witness at a sampled point is
//! already a proof of algebraic independence (the rank can only drop at
//! special points, never rise).

use crate::action::MonomialAction;
use crate::cyc::CycRat;
use crate::cyclic::CyclicSystem;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::perm::{is_prime, Permutation};
use crate::poly::{Poly, Ring};
use crate::ratfunc::{jacobian_rank_at, matrix_rank, RatFunc, SplitMix64};
use crate::tower::{
    derive_domain_action, wreath_monomial_action, Certificate, CyclicCertificate,
    DiscriminantCertificate, GeneratorLevel, KernelCertificate, TowerCertificate,
    DEFAULT_TERM_CAP,
};
use crate::wreath::WreathElement;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

/// Tunable limits and seeds for a verification run.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Maximum number of group elements to enumerate.
    pub cap_elems: usize,
    /// Maximum number of terms in any polynomial handled by a check.
    pub cap_terms: usize,
    /// Seed for the Jacobian rank evaluation points.
    pub seed: u64,
    /// Stop at the first failing check instead of running the full suite.
    pub fast_fail: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cap_elems: crate::group::DEFAULT_ENUM_CAP,
            cap_terms: DEFAULT_TERM_CAP,
            seed: crate::ratfunc::DEFAULT_JACOBIAN_SEED,
            fast_fail: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Outcome of verifying one certificate. Serialization skips the timing
/// field so that identical inputs produce byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case: String,
    pub checks: Vec<CheckRecord>,
    pub ok: bool,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

impl VerificationReport {
    fn new(case: String, checks: Vec<CheckRecord>, elapsed_ms: u128) -> Self {
        let ok = checks.iter().all(|c| c.status == CheckStatus::Pass);
        VerificationReport { case, checks, ok, elapsed_ms }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

fn ensure(cond: bool, check: &str, witness: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::CheckFailed { check: check.into(), witness: witness() })
    }
}

/// Failures of these kinds are verdicts about the certificate (recorded and
/// reported); everything else is an environment or resource error that
/// aborts the run.
fn is_soft(e: &Error) -> bool {
    matches!(
        e,
        Error::CheckFailed { .. }
            | Error::DenominatorVanishes { .. }
            | Error::DivisionByZero
            | Error::NotAMember { .. }
            | Error::MalformedCertificate(_)
    )
}

/// Sequencer for the checks after the structural gate: in fast-fail mode the
/// first failure suppresses (and never evaluates) the remaining checks.
struct Gate {
    records: Vec<CheckRecord>,
    all_ok: bool,
    fast_fail: bool,
}

impl Gate {
    fn new(records: Vec<CheckRecord>, fast_fail: bool) -> Self {
        Gate { records, all_ok: true, fast_fail }
    }

    fn active(&self) -> bool {
        self.all_ok || !self.fast_fail
    }

    fn run(&mut self, name: &str, check: impl FnOnce() -> Result<()>) -> Result<()> {
        if self.active() {
            let ok = run_check(&mut self.records, name, check())?;
            self.all_ok = self.all_ok && ok;
        }
        Ok(())
    }
}

fn run_check(records: &mut Vec<CheckRecord>, name: &str, result: Result<()>) -> Result<bool> {
    match result {
        Ok(()) => {
            records.push(CheckRecord {
                name: name.into(),
                status: CheckStatus::Pass,
                witness: None,
            });
            Ok(true)
        }
        Err(e) if is_soft(&e) => {
            records.push(CheckRecord {
                name: name.into(),
                status: CheckStatus::Fail,
                witness: Some(e.to_string()),
            });
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

fn rings_match(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    **a == **b
}

fn term_guard(f: &RatFunc, cap: usize) -> Result<()> {
    let terms = f.num().num_terms().max(f.den().num_terms());
    if terms > cap {
        return Err(Error::SizeLimit { terms, cap });
    }
    Ok(())
}

/// Run every check appropriate to the certificate kind and assemble the
/// report. Check failures are recorded (exit status 1 territory); resource
/// and environment errors abort with `Err` (exit status 2 territory).
pub fn verify_certificate(cert: &Certificate, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    let checks = match cert {
        Certificate::Tower(c) => verify_tower(c, opts)?,
        Certificate::Kernel(c) => verify_kernel(c, opts)?,
        Certificate::CyclicSystem(c) => verify_cyclic(c, opts)?,
        Certificate::Discriminant(c) => verify_discriminant(c, opts)?,
    };
    Ok(VerificationReport::new(cert.case_id(), checks, start.elapsed().as_millis()))
}

// ---------------------------------------------------------------------------
// Tower verification
// ---------------------------------------------------------------------------

struct TowerCtx<'a> {
    cert: &'a TowerCertificate,
    xr: Arc<Ring>,
    dring: Arc<Ring>,
    /// Domain-ring expression of each name, in name order.
    name_images: Vec<RatFunc>,
    /// Number of block (non-identity) domain variables.
    blocks: usize,
    n: usize,
    p: usize,
}

fn as_identity_var(f: &RatFunc) -> Option<usize> {
    if !f.is_polynomial() {
        return None;
    }
    let num = f.num();
    if num.num_terms() != 1 {
        return None;
    }
    let (mono, coeff) = num.terms().next().expect("one term");
    if coeff != &CycRat::one(num.ring().p) {
        return None;
    }
    let mut var = None;
    for (i, &e) in mono.0.iter().enumerate() {
        match (e, var) {
            (0, _) => {}
            (1, None) => var = Some(i),
            _ => return None,
        }
    }
    var
}

fn build_ctx(cert: &TowerCertificate) -> TowerCtx<'_> {
    let xr = cert.domain.defs[0].ring().clone();
    let dring = cert.levels[0].generators[0].expr.ring().clone();
    let mut name_images: Vec<RatFunc> =
        cert.levels[0].generators.iter().map(|g| g.expr.clone()).collect();
    name_images.extend(cert.relations.iter().map(|r| r.new_expr.clone()));
    let blocks = cert.domain.solved.len();
    TowerCtx { cert, n: xr.nvars(), p: cert.domain.p, xr, dring, name_images, blocks }
}

fn check_tower_structure(cert: &TowerCertificate) -> Result<()> {
    const C: &str = "structure";
    let d = &cert.domain;
    ensure(!cert.levels.is_empty(), C, || "certificate has no generator levels".into())?;
    ensure(!cert.levels[0].generators.is_empty(), C, || "level 0 is empty".into())?;
    ensure(!d.vars.is_empty(), C, || "domain has no variables".into())?;
    ensure(d.vars.len() == d.defs.len(), C, || {
        format!("{} domain variables but {} definitions", d.vars.len(), d.defs.len())
    })?;
    ensure(cert.recovery.len() == d.vars.len(), C, || {
        format!("{} recovery entries for {} domain variables", cert.recovery.len(), d.vars.len())
    })?;
    ensure(is_prime(d.p), C, || format!("domain prime {} is not prime", d.p))?;
    ensure(cert.group.p == d.p, C, || {
        format!("group prime {} differs from domain prime {}", cert.group.p, d.p)
    })?;

    // Ambient ring consistency.
    let xr = d.defs[0].ring();
    let n = xr.nvars();
    ensure(xr.p == d.p && xr.rewrite.is_none(), C, || "ambient ring malformed".into())?;
    for def in &d.defs {
        ensure(rings_match(def.ring(), xr), C, || "definition rings disagree".into())?;
    }
    ensure(cert.group.n == n, C, || {
        format!("group degree {} differs from ambient degree {}", cert.group.n, n)
    })?;
    for g in &cert.group.generators {
        ensure(g.images.degree() == n, C, || {
            format!("generator {} has degree {} instead of {}", g.label, g.images.degree(), n)
        })?;
    }

    // Domain ring consistency.
    let dring = cert.levels[0].generators[0].expr.ring();
    ensure(
        dring.p == d.p && dring.rewrite.is_none() && dring.vars == d.vars,
        C,
        || "domain ring does not list the domain variables".into(),
    )?;
    for level in &cert.levels {
        for g in &level.generators {
            ensure(rings_match(g.expr.ring(), dring), C, || {
                format!("generator {} lives in a different ring", g.name)
            })?;
        }
    }
    for rel in &cert.relations {
        ensure(rings_match(rel.new_expr.ring(), dring), C, || {
            format!("step {} expression lives in a different ring", rel.new_generator)
        })?;
    }

    // Names and step ordering.
    let names: Vec<String> = cert.names();
    let unique: BTreeSet<&String> = names.iter().collect();
    ensure(unique.len() == names.len(), C, || "generator names are not unique".into())?;
    let step_names: Vec<&String> = cert
        .levels
        .iter()
        .skip(1)
        .flat_map(|l| l.generators.iter().map(|g| &g.name))
        .collect();
    ensure(step_names.len() == cert.relations.len(), C, || {
        format!("{} step generators but {} relations", step_names.len(), cert.relations.len())
    })?;
    for (rel, name) in cert.relations.iter().zip(&step_names) {
        ensure(&&rel.new_generator == name, C, || {
            format!("relation order mismatch: {} vs {}", rel.new_generator, name)
        })?;
    }

    // Relations: shape, name ring, stratification, budget.
    let level0_count = cert.levels[0].generators.len();
    let mut product: u64 = 1;
    for (k, rel) in cert.relations.iter().enumerate() {
        ensure(rel.degree_claim >= 1, C, || {
            format!("step {} claims degree 0", rel.new_generator)
        })?;
        ensure(rel.coefficients.len() as u64 == rel.degree_claim + 1, C, || {
            format!(
                "step {} has {} coefficients for degree {}",
                rel.new_generator,
                rel.coefficients.len(),
                rel.degree_claim
            )
        })?;
        let lead = rel.coefficients.last().expect("nonempty");
        ensure(!lead.is_zero(), C, || {
            format!("step {} has zero leading coefficient", rel.new_generator)
        })?;
        let cutoff = level0_count + k;
        for (ci, coeff) in rel.coefficients.iter().enumerate() {
            ensure(
                coeff.ring().vars == names && coeff.ring().p == d.p,
                C,
                || format!("step {} coefficient ring mismatch", rel.new_generator),
            )?;
            for poly in [coeff.num(), coeff.den()] {
                for (mono, _) in poly.terms() {
                    for (vi, &e) in mono.0.iter().enumerate() {
                        ensure(vi < cutoff || e == 0, C, || {
                            format!(
                                "coefficient {ci} of step {} references the later name {}",
                                rel.new_generator, names[vi]
                            )
                        })?;
                    }
                }
            }
        }
        product = product.saturating_mul(rel.degree_claim);
    }
    ensure(product == cert.budget, C, || {
        format!("degree product {product} differs from recorded budget {}", cert.budget)
    })?;

    // Recovery entries live over the name ring.
    for (i, rec) in cert.recovery.iter().enumerate() {
        ensure(rec.ring().vars == names && rec.ring().p == d.p, C, || {
            format!("recovery entry {} ring mismatch", d.vars[i])
        })?;
    }

    // Ambient coordinate partition: identity definitions, solved, flagged.
    let mut identity_coords = BTreeSet::new();
    let mut block_defs = 0usize;
    let mut seen_identity = false;
    for def in d.defs.iter() {
        match as_identity_var(def) {
            Some(i) => {
                seen_identity = true;
                ensure(identity_coords.insert(i + 1), C, || {
                    format!("coordinate x{} defined twice", i + 1)
                })?;
            }
            None => {
                ensure(!seen_identity, C, || {
                    "block definitions must precede trailing identity definitions".into()
                })?;
                block_defs += 1;
            }
        }
    }
    ensure(d.solved.len() == block_defs, C, || {
        format!("{} solved coordinates for {} block definitions", d.solved.len(), block_defs)
    })?;
    let mut covered = identity_coords.clone();
    for s in &d.solved {
        ensure(s.index >= 1 && s.index <= n, C, || {
            format!("solved index {} out of range", s.index)
        })?;
        ensure(covered.insert(s.index), C, || {
            format!("coordinate x{} accounted twice", s.index)
        })?;
        ensure(
            s.expr.ring().nvars() == n + block_defs
                && s.expr.ring().vars[..n] == xr.vars[..]
                && s.expr.ring().p == d.p,
            C,
            || format!("solved expression for x{} has a malformed ring", s.index),
        )?;
    }
    for &f in &d.free_indices {
        ensure(f >= 1 && f <= n, C, || format!("flagged index {f} out of range"))?;
        ensure(covered.insert(f), C, || format!("coordinate x{f} accounted twice"))?;
    }
    ensure(covered.len() == n, C, || {
        format!("only {} of {} ambient coordinates accounted for", covered.len(), n)
    })?;
    ensure(cert.levels[0].generators.len() + d.free_indices.len() == n, C, || {
        format!(
            "level-0 count {} plus flagged count {} does not equal ambient degree {n}",
            cert.levels[0].generators.len(),
            d.free_indices.len()
        )
    })?;

    // Residual-action claims: widths and known elements.
    let labels: BTreeSet<&String> = cert.group.generators.iter().map(|g| &g.label).collect();
    for (li, level) in cert.levels.iter().enumerate() {
        for claim in &level.residual_action {
            ensure(claim.action.perm().degree() == level.generators.len(), C, || {
                format!("claim width mismatch on level {li} for {}", claim.element)
            })?;
            ensure(labels.contains(&claim.element), C, || {
                format!("claim on level {li} names unknown element {}", claim.element)
            })?;
        }
    }

    // Affine node.
    match &cert.affine_node {
        None => ensure(d.free_indices.is_empty(), C, || {
            "flagged coordinates present but no affine node".into()
        })?,
        Some(node) => {
            ensure(node.flagged == d.free_indices, C, || {
                "affine node flags differ from the domain's free coordinates".into()
            })?;
            ensure(node.replaced == node.flagged.len(), C, || {
                format!(
                    "affine node replaces {} generators for {} flagged coordinates",
                    node.replaced,
                    node.flagged.len()
                )
            })?;
            let name_set: BTreeSet<&String> = names.iter().collect();
            for b in &node.base {
                ensure(name_set.contains(b), C, || {
                    format!("affine base references unknown name {b}")
                })?;
            }
            let mut claimed: Vec<&String> = node.claims.iter().map(|c| &c.element).collect();
            claimed.sort();
            let mut expected: Vec<&String> =
                cert.group.generators.iter().map(|g| &g.label).collect();
            expected.sort();
            ensure(claimed == expected, C, || {
                "affine claims do not cover the group generators exactly once".into()
            })?;
            for claim in &node.claims {
                ensure(claim.images.len() == node.flagged.len(), C, || {
                    format!("affine claim for {} has the wrong width", claim.element)
                })?;
                for img in &claim.images {
                    ensure(
                        img.constant.ring().vars == names && img.constant.ring().p == d.p,
                        C,
                        || format!("affine constant ring mismatch under {}", claim.element),
                    )?;
                    for term in &img.linear {
                        ensure(term.position < node.flagged.len(), C, || {
                            format!("affine linear index out of range under {}", claim.element)
                        })?;
                        ensure(term.coeff.p() == d.p && !term.coeff.is_zero(), C, || {
                            format!("affine linear coefficient malformed under {}", claim.element)
                        })?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn scan_tower_terms(cert: &TowerCertificate, cap: usize) -> Result<()> {
    for def in &cert.domain.defs {
        term_guard(def, cap)?;
    }
    for s in &cert.domain.solved {
        term_guard(&s.expr, cap)?;
    }
    for level in &cert.levels {
        for g in &level.generators {
            term_guard(&g.expr, cap)?;
        }
    }
    for rel in &cert.relations {
        term_guard(&rel.new_expr, cap)?;
        for c in &rel.coefficients {
            term_guard(c, cap)?;
        }
    }
    for r in &cert.recovery {
        term_guard(r, cap)?;
    }
    if let Some(node) = &cert.affine_node {
        for claim in &node.claims {
            for img in &claim.images {
                term_guard(&img.constant, cap)?;
            }
        }
    }
    Ok(())
}

/// The exact linear bridge between ambient and domain coordinates: composing
/// each solve-back expression with the definitions must reproduce the solved
/// ambient coordinate identically.
fn check_domain_bridge(ctx: &TowerCtx) -> Result<()> {
    const C: &str = "domain-bridge";
    let d = &ctx.cert.domain;
    if d.solved.is_empty() {
        return Ok(());
    }
    let mut images: Vec<RatFunc> =
        (0..ctx.n).map(|i| RatFunc::var(&ctx.xr, i)).collect();
    images.extend(d.defs.iter().take(ctx.blocks).cloned());
    for s in &d.solved {
        let composed = s.expr.substitute(&images)?;
        ensure(composed == RatFunc::var(&ctx.xr, s.index - 1), C, || {
            format!("solve-back for x{} does not invert the definitions", s.index)
        })?;
    }
    Ok(())
}

/// Monomial action of each group generator on the domain variables, derived
/// from exact ambient identities. `Err` strings double as check witnesses.
fn generator_domain_actions(
    ctx: &TowerCtx,
) -> BTreeMap<String, std::result::Result<MonomialAction, String>> {
    let mut out = BTreeMap::new();
    for g in &ctx.cert.group.generators {
        let act = derive_domain_action(&g.label, &g.images, &ctx.cert.domain.defs, &ctx.dring)
            .map_err(|e| e.to_string());
        out.insert(g.label.clone(), act);
    }
    out
}

fn check_tower_invariance(
    ctx: &TowerCtx,
    actions: &BTreeMap<String, std::result::Result<MonomialAction, String>>,
) -> Result<()> {
    const C: &str = "invariance";
    for g in &ctx.cert.group.generators {
        let action = match &actions[&g.label] {
            Ok(a) => a,
            Err(w) => return Err(Error::CheckFailed { check: C.into(), witness: w.clone() }),
        };
        for gen in &ctx.cert.levels[0].generators {
            ensure(action.act_ratfunc(&gen.expr) == gen.expr, C, || {
                format!("generator {} is moved by {}", gen.name, g.label)
            })?;
        }
    }
    Ok(())
}

fn check_residual_actions(
    ctx: &TowerCtx,
    actions: &BTreeMap<String, std::result::Result<MonomialAction, String>>,
) -> Result<()> {
    const C: &str = "residual-action";
    for (li, level) in ctx.cert.levels.iter().enumerate() {
        let exprs: Vec<&RatFunc> = level.generators.iter().map(|g| &g.expr).collect();
        for claim in &level.residual_action {
            let action = match &actions[&claim.element] {
                Ok(a) => a,
                Err(w) => {
                    return Err(Error::CheckFailed { check: C.into(), witness: w.clone() })
                }
            };
            for (j, expr) in exprs.iter().enumerate() {
                let actual = action.act_ratfunc(expr);
                let target = claim.action.perm().apply(j + 1) - 1;
                let claimed = exprs[target].scale(&claim.action.scales()[j]);
                ensure(actual == claimed, C, || {
                    format!(
                        "level {li}: {} sends {} elsewhere than claimed",
                        claim.element, level.generators[j].name
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn check_tower_relations(ctx: &TowerCtx, cap: usize) -> Result<()> {
    const C: &str = "relations";
    for rel in &ctx.cert.relations {
        let lead = rel.coefficients.last().expect("validated nonempty");
        let lead_image = lead.substitute(&ctx.name_images)?;
        ensure(!lead_image.is_zero(), C, || {
            format!("step {} has a vanishing leading coefficient", rel.new_generator)
        })?;
        let mut residual = RatFunc::zero(&ctx.dring);
        let mut power = RatFunc::one(&ctx.dring);
        for (i, coeff) in rel.coefficients.iter().enumerate() {
            if i > 0 {
                power = power.mul(&rel.new_expr);
                term_guard(&power, cap)?;
            }
            if coeff.is_zero() {
                continue;
            }
            let image = coeff.substitute(&ctx.name_images)?;
            term_guard(&image, cap)?;
            residual = residual.add(&image.mul(&power));
            term_guard(&residual, cap)?;
        }
        ensure(residual.is_zero(), C, || {
            format!(
                "step {} leaves a nonzero residual with {} terms",
                rel.new_generator,
                residual.num().num_terms()
            )
        })?;
    }
    Ok(())
}

fn check_tower_recovery(ctx: &TowerCtx) -> Result<()> {
    const C: &str = "recovery";
    for (i, rec) in ctx.cert.recovery.iter().enumerate() {
        let image = rec.substitute(&ctx.name_images)?;
        ensure(image == RatFunc::var(&ctx.dring, i), C, || {
            format!("recovery does not reproduce {}", ctx.cert.domain.vars[i])
        })?;
    }
    Ok(())
}

fn check_tower_budget(ctx: &TowerCtx, elems: &[Permutation]) -> Result<()> {
    const C: &str = "budget";
    ensure(elems.len() as u64 == ctx.cert.budget, C, || {
        format!("group order {} differs from budget {}", elems.len(), ctx.cert.budget)
    })
}

/// Faithfulness on ambient coordinates and, when an affine node is present,
/// on the block variables of the base field (the hypothesis of the affine
/// linear-action theorem).
fn check_tower_faithful(ctx: &TowerCtx, elems: &[Permutation]) -> Result<()> {
    const C: &str = "faithful";
    let needs_base = ctx.cert.affine_node.is_some() && ctx.blocks > 0;
    for (idx, e) in elems.iter().enumerate() {
        if e.is_identity() {
            continue;
        }
        if needs_base {
            let label = format!("element {idx} {}", e.cycle_string());
            let action = derive_domain_action(&label, e, &ctx.cert.domain.defs, &ctx.dring)?;
            let trivial = (1..=ctx.blocks).all(|b| {
                action.perm().apply(b) == b
                    && action.scales()[b - 1] == CycRat::one(ctx.p)
            });
            ensure(!trivial, C, || {
                format!("{} acts trivially on the block variables", e.cycle_string())
            })?;
        }
    }
    Ok(())
}

fn check_affine_node(ctx: &TowerCtx) -> Result<()> {
    const C: &str = "affine-node";
    let node = match &ctx.cert.affine_node {
        None => return Ok(()),
        Some(node) => node,
    };
    let gens: BTreeMap<&String, &Permutation> =
        ctx.cert.group.generators.iter().map(|g| (&g.label, &g.images)).collect();
    for claim in &node.claims {
        let perm = gens[&claim.element];
        for (k, &f) in node.flagged.iter().enumerate() {
            let lhs = RatFunc::var(&ctx.xr, perm.apply(f) - 1);
            let constant_domain = claim.images[k].constant.substitute(&ctx.name_images)?;
            let mut rhs = constant_domain.substitute(&ctx.cert.domain.defs)?;
            for term in &claim.images[k].linear {
                rhs = rhs
                    .add(&RatFunc::var(&ctx.xr, node.flagged[term.position] - 1)
                        .scale(&term.coeff));
            }
            ensure(lhs == rhs, C, || {
                format!("affine image of x{f} under {} is misstated", claim.element)
            })?;
        }
    }
    Ok(())
}

/// Jacobian rank of the level-0 generators, pushed to ambient coordinates by
/// the chain rule through the domain definitions, plus one unit row per
/// flagged coordinate. Full rank at a sampled point proves the generator
/// system together with the affine node spans all `n` independent directions.
fn check_tower_independence(ctx: &TowerCtx, seed: u64) -> Result<()> {
    const C: &str = "independence";
    let n = ctx.n;
    let p = ctx.p;
    let level0: Vec<&RatFunc> =
        ctx.cert.levels[0].generators.iter().map(|g| &g.expr).collect();
    let dvars = ctx.dring.nvars();
    let mut gen_partials = Vec::with_capacity(level0.len());
    for g in &level0 {
        let row: Result<Vec<RatFunc>> = (0..dvars).map(|j| g.derivative(j)).collect();
        gen_partials.push(row?);
    }
    let mut def_partials = Vec::with_capacity(dvars);
    for def in &ctx.cert.domain.defs {
        let row: Result<Vec<RatFunc>> = (0..n).map(|i| def.derivative(i)).collect();
        def_partials.push(row?);
    }

    let mut rng = SplitMix64::new(seed);
    let mut best = 0usize;
    let mut usable = 0usize;
    for _ in 0..4 {
        let xpt: Vec<CycRat> =
            (0..n).map(|_| CycRat::from_integer(rng.next_in(10007) as i64, p)).collect();
        let attempt = (|| -> Result<usize> {
            let tpt: Vec<CycRat> = ctx
                .cert
                .domain
                .defs
                .iter()
                .map(|def| def.eval(&xpt))
                .collect::<Result<Vec<_>>>()?;
            let dphi: Vec<Vec<CycRat>> = def_partials
                .iter()
                .map(|row| row.iter().map(|f| f.eval(&xpt)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::with_capacity(level0.len() + ctx.cert.domain.free_indices.len());
            for partials in &gen_partials {
                let jt: Vec<CycRat> =
                    partials.iter().map(|f| f.eval(&tpt)).collect::<Result<Vec<_>>>()?;
                let mut row = vec![CycRat::zero(p); n];
                for (j, jv) in jt.iter().enumerate() {
                    for (i, cell) in row.iter_mut().enumerate() {
                        *cell = cell.add(&jv.mul(&dphi[j][i]));
                    }
                }
                rows.push(row);
            }
            for &f in &ctx.cert.domain.free_indices {
                let mut row = vec![CycRat::zero(p); n];
                row[f - 1] = CycRat::one(p);
                rows.push(row);
            }
            Ok(matrix_rank(rows))
        })();
        match attempt {
            Ok(rank) => {
                usable += 1;
                best = best.max(rank);
                if best == n {
                    break;
                }
            }
            Err(Error::DenominatorVanishes { .. }) | Err(Error::DivisionByZero) => continue,
            Err(e) => return Err(e),
        }
    }
    if usable == 0 {
        return Err(Error::EvaluationSingular { attempts: 4 });
    }
    ensure(best == n, C, || {
        format!("jacobian rank {best} falls short of ambient degree {n}")
    })
}

fn verify_tower(cert: &TowerCertificate, opts: &VerifyOptions) -> Result<Vec<CheckRecord>> {
    scan_tower_terms(cert, opts.cap_terms)?;
    let mut records = Vec::new();
    if !run_check(&mut records, "structure", check_tower_structure(cert))? {
        return Ok(records);
    }
    let ctx = build_ctx(cert);
    let mut gate = Gate::new(records, opts.fast_fail);
    gate.run("domain-bridge", || check_domain_bridge(&ctx))?;
    let actions = generator_domain_actions(&ctx);
    gate.run("invariance", || check_tower_invariance(&ctx, &actions))?;
    gate.run("residual-action", || check_residual_actions(&ctx, &actions))?;
    gate.run("relations", || check_tower_relations(&ctx, opts.cap_terms))?;
    gate.run("recovery", || check_tower_recovery(&ctx))?;
    if gate.active() {
        let elems = cert.group.enumerate(opts.cap_elems)?;
        gate.run("budget", || check_tower_budget(&ctx, &elems))?;
        gate.run("faithful", || check_tower_faithful(&ctx, &elems))?;
    }
    gate.run("affine-node", || check_affine_node(&ctx))?;
    gate.run("independence", || check_tower_independence(&ctx, opts.seed))?;
    Ok(gate.records)
}

// ---------------------------------------------------------------------------
// Kernel verification
// ---------------------------------------------------------------------------

fn verify_kernel(cert: &KernelCertificate, opts: &VerifyOptions) -> Result<Vec<CheckRecord>> {
    for g in &cert.generators {
        term_guard(&g.expr, opts.cap_terms)?;
    }
    let mut records = Vec::new();
    if !run_check(&mut records, "structure", check_kernel_structure(cert))? {
        return Ok(records);
    }
    let mut gate = Gate::new(records, opts.fast_fail);
    gate.run("membership", || check_kernel_membership(cert))?;
    if gate.active() {
        let elems = cert.group.enumerate(opts.cap_elems)?;
        gate.run("order", || check_kernel_order(cert, &elems))?;
        gate.run("invariance", || check_kernel_invariance(cert, &elems))?;
    }
    gate.run("independence", || check_kernel_independence(cert, opts.seed))?;
    Ok(gate.records)
}

fn check_kernel_structure(cert: &KernelCertificate) -> Result<()> {
    const C: &str = "structure";
    ensure(is_prime(cert.p), C, || format!("{} is not prime", cert.p))?;
    ensure(cert.n >= 1, C, || "no block variables".into())?;
    ensure(cert.group.family == crate::group::Family::KernelSylowAmbient, C, || {
        "group family is not the ambient kernel embedding".into()
    })?;
    ensure(cert.group.p == cert.p, C, || {
        format!("group prime {} differs from {}", cert.group.p, cert.p)
    })?;
    ensure(cert.group.n == cert.n * cert.p, C, || {
        format!("group degree {} is not {}", cert.group.n, cert.n * cert.p)
    })?;
    ensure(cert.generators.len() == cert.n, C, || {
        format!("{} generators for {} variables", cert.generators.len(), cert.n)
    })?;
    let tring = cert.generators[0].expr.ring();
    ensure(
        tring.nvars() == cert.n && tring.p == cert.p && tring.rewrite.is_none(),
        C,
        || "generator ring does not match the block variables".into(),
    )?;
    for g in &cert.generators {
        ensure(rings_match(g.expr.ring(), tring), C, || {
            format!("generator {} lives in a different ring", g.name)
        })?;
    }
    let unique: BTreeSet<&String> = cert.generators.iter().map(|g| &g.name).collect();
    ensure(unique.len() == cert.generators.len(), C, || "generator names repeat".into())?;
    for g in &cert.group.generators {
        ensure(g.images.degree() == cert.group.n, C, || {
            format!("group generator {} has the wrong degree", g.label)
        })?;
    }
    Ok(())
}

fn check_kernel_membership(cert: &KernelCertificate) -> Result<()> {
    const C: &str = "membership";
    for g in &cert.group.generators {
        let w = WreathElement::decompose(&g.images, cert.p)?;
        ensure(w.phi() == 0, C, || {
            format!("generator {} has twist sum {} instead of 0", g.label, w.phi())
        })?;
    }
    Ok(())
}

fn check_kernel_order(cert: &KernelCertificate, elems: &[Permutation]) -> Result<()> {
    const C: &str = "order";
    let expected: u128 = (1..=cert.n as u128).product::<u128>()
        * (cert.p as u128).pow(cert.n as u32 - 1);
    ensure(elems.len() as u128 == expected, C, || {
        format!("enumerated order {} differs from n! p^(n-1) = {expected}", elems.len())
    })
}

/// Exhaustive invariance over every element of the enumerated group, acting
/// through the block-variable monomial action of each wreath decomposition.
fn check_kernel_invariance(cert: &KernelCertificate, elems: &[Permutation]) -> Result<()> {
    const C: &str = "invariance";
    let tring = cert.generators[0].expr.ring();
    for e in elems {
        let w = WreathElement::decompose(e, cert.p)?;
        let action = wreath_monomial_action(&w, tring)?;
        for g in &cert.generators {
            ensure(action.act_ratfunc(&g.expr) == g.expr, C, || {
                format!("generator {} is moved by {}", g.name, e.cycle_string())
            })?;
        }
    }
    Ok(())
}

fn check_kernel_independence(cert: &KernelCertificate, seed: u64) -> Result<()> {
    const C: &str = "independence";
    let funcs: Vec<RatFunc> = cert.generators.iter().map(|g| g.expr.clone()).collect();
    let rank = jacobian_rank_at(&funcs, seed)?;
    ensure(rank == cert.n, C, || {
        format!("jacobian rank {rank} falls short of {}", cert.n)
    })
}

// ---------------------------------------------------------------------------
// Cyclic-system and discriminant verification
// ---------------------------------------------------------------------------

fn verify_cyclic(cert: &CyclicCertificate, opts: &VerifyOptions) -> Result<Vec<CheckRecord>> {
    for f in cert.final_generators.iter().chain(&cert.u).chain(&cert.v) {
        term_guard(f, opts.cap_terms)?;
    }
    term_guard(&cert.z, opts.cap_terms)?;
    let mut records = Vec::new();
    let sys = CyclicSystem::build(cert.p)?;
    if !run_check(&mut records, "parameters", check_cyclic_parameters(cert, &sys))? {
        return Ok(records);
    }
    let canonical = check_cyclic_canonical(cert, &sys);
    let ok = run_check(&mut records, "canonical-match", canonical)?;
    if !ok && opts.fast_fail {
        return Ok(records);
    }
    let named: [(&str, Result<()>); 10] = [
        ("group-action", sys.check_group_action()),
        ("ambient-relations", sys.check_ambient_relations()),
        ("u-transform", sys.check_u_transform()),
        ("v-transform", sys.check_v_transform()),
        ("v-product-identity", sys.check_v_product_identity()),
        ("z-construction", sys.check_z_construction()),
        ("final-generator-cycle", sys.check_final_generator_cycle()),
        ("final-generators-fixed", sys.check_final_generators_fixed()),
        ("degree-zero", sys.check_degree_zero()),
        ("recovery", sys.check_recovery()),
    ];
    for (name, result) in named {
        let ok = run_check(&mut records, name, result)?;
        if !ok && opts.fast_fail {
            break;
        }
    }
    Ok(records)
}

fn check_cyclic_parameters(cert: &CyclicCertificate, sys: &CyclicSystem) -> Result<()> {
    const C: &str = "parameters";
    ensure(is_prime(cert.p) && cert.p % 2 == 1, C, || {
        format!("{} is not an odd prime", cert.p)
    })?;
    ensure(cert.final_generators.len() == cert.p - 1, C, || {
        format!("{} final generators for p = {}", cert.final_generators.len(), cert.p)
    })?;
    ensure(cert.u.len() == cert.p && cert.v.len() == cert.p, C, || {
        "u or v family has the wrong length".into()
    })?;
    ensure(sys.p == cert.p, C, || "rebuilt system prime mismatch".into())?;
    Ok(())
}

fn check_cyclic_canonical(cert: &CyclicCertificate, sys: &CyclicSystem) -> Result<()> {
    const C: &str = "canonical-match";
    let safe_eq = |a: &RatFunc, b: &RatFunc| rings_match(a.ring(), b.ring()) && a == b;
    for (i, (stored, built)) in cert.final_generators.iter().zip(&sys.final_generators).enumerate()
    {
        ensure(safe_eq(stored, built), C, || {
            format!("final generator {i} differs from the canonical construction")
        })?;
    }
    for (i, (stored, built)) in cert.u.iter().zip(&sys.u).enumerate() {
        ensure(safe_eq(stored, built), C, || format!("u[{i}] differs"))?;
    }
    for (i, (stored, built)) in cert.v.iter().zip(&sys.v).enumerate() {
        ensure(safe_eq(stored, built), C, || format!("v[{i}] differs"))?;
    }
    ensure(safe_eq(&cert.z, &sys.z), C, || "z differs".into())?;
    ensure(cert.g1 == sys.g1 && cert.g2 == sys.g2, C, || {
        "stored actions differ from the canonical ones".into()
    })?;
    Ok(())
}

fn verify_discriminant(
    cert: &DiscriminantCertificate,
    opts: &VerifyOptions,
) -> Result<Vec<CheckRecord>> {
    if cert.discriminant.num_terms() > opts.cap_terms
        || cert.root_difference.num_terms() > opts.cap_terms
    {
        return Err(Error::SizeLimit {
            terms: cert.discriminant.num_terms().max(cert.root_difference.num_terms()),
            cap: opts.cap_terms,
        });
    }
    let mut gate = Gate::new(Vec::new(), opts.fast_fail);
    gate.run("identity", || check_discriminant_identity(cert))?;
    gate.run("alternation", || check_discriminant_alternation(cert))?;
    gate.run("specializations", || check_discriminant_specializations(cert))?;
    Ok(gate.records)
}

fn vieta_images(cert: &DiscriminantCertificate) -> Result<Vec<RatFunc>> {
    let xr = cert.root_difference.ring();
    ensure(xr.nvars() == 3, "identity", || "root ring must have three variables".into())?;
    ensure(cert.discriminant.ring().nvars() == 3, "identity", || {
        "coefficient ring must have three variables".into()
    })?;
    let all = [0usize, 1, 2];
    Ok(vec![
        RatFunc::from_poly(Poly::elementary_symmetric(xr, 1, &all).neg()),
        RatFunc::from_poly(Poly::elementary_symmetric(xr, 2, &all)),
        RatFunc::from_poly(Poly::elementary_symmetric(xr, 3, &all).neg()),
    ])
}

fn check_discriminant_identity(cert: &DiscriminantCertificate) -> Result<()> {
    const C: &str = "identity";
    let images = vieta_images(cert)?;
    let substituted = RatFunc::from_poly(cert.discriminant.clone()).substitute(&images)?;
    let square = RatFunc::from_poly(cert.root_difference.pow(2));
    ensure(substituted == square, C, || {
        "discriminant does not equal the squared root-difference product".into()
    })
}

fn check_discriminant_alternation(cert: &DiscriminantCertificate) -> Result<()> {
    const C: &str = "alternation";
    let xr = cert.root_difference.ring();
    let p = xr.p;
    let swap = MonomialAction::from_permutation(
        &Permutation::from_images(vec![2, 1, 3])?,
        3,
        p,
    );
    let rotate = MonomialAction::from_permutation(
        &Permutation::from_images(vec![2, 3, 1])?,
        3,
        p,
    );
    ensure(
        swap.act_poly(&cert.root_difference) == cert.root_difference.neg(),
        C,
        || "transposition does not negate the root-difference product".into(),
    )?;
    ensure(
        rotate.act_poly(&cert.root_difference) == cert.root_difference,
        C,
        || "3-cycle does not fix the root-difference product".into(),
    )?;
    Ok(())
}

fn check_discriminant_specializations(cert: &DiscriminantCertificate) -> Result<()> {
    const C: &str = "specializations";
    let images = vieta_images(cert)?;
    for (k, claim) in cert.specializations.iter().enumerate() {
        ensure(claim.point.len() == 3, C, || {
            format!("specialization {k} does not give three roots")
        })?;
        let coeffs: Vec<CycRat> = images
            .iter()
            .map(|f| f.eval(&claim.point))
            .collect::<Result<Vec<_>>>()?;
        let disc_value = RatFunc::from_poly(cert.discriminant.clone()).eval(&coeffs)?;
        ensure(disc_value == claim.value, C, || {
            format!("specialization {k}: discriminant value differs from the claim")
        })?;
        let prod_value = RatFunc::from_poly(cert.root_difference.clone()).eval(&claim.point)?;
        ensure(prod_value.mul(&prod_value) == claim.value, C, || {
            format!("specialization {k}: squared product differs from the claim")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Standalone entry points and oracles
// ---------------------------------------------------------------------------

/// Invariance of one generator level under a permutation group acting
/// directly on the level's own variables. Checking the group generators
/// suffices: the invariants of a set of generators form a field fixed by the
/// whole generated group.
pub fn check_invariance(level: &GeneratorLevel, group: &GroupSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut records = Vec::new();
    let result = (|| -> Result<()> {
        const C: &str = "invariance";
        for gen in &level.generators {
            ensure(gen.expr.ring().nvars() == group.n, C, || {
                format!("generator {} does not live on {} ambient variables", gen.name, group.n)
            })?;
        }
        for g in &group.generators {
            let action = MonomialAction::from_permutation(&g.images, group.n, group.p);
            for gen in &level.generators {
                ensure(action.act_ratfunc(&gen.expr) == gen.expr, C, || {
                    format!("generator {} is moved by {}", gen.name, g.label)
                })?;
            }
        }
        Ok(())
    })();
    run_check(&mut records, "invariance", result)?;
    Ok(VerificationReport::new(
        "invariance".into(),
        records,
        start.elapsed().as_millis(),
    ))
}

/// All step relations of a tower certificate, checked by exact substitution.
pub fn check_relations(cert: &TowerCertificate) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut records = Vec::new();
    if run_check(&mut records, "structure", check_tower_structure(cert))? {
        let ctx = build_ctx(cert);
        run_check(&mut records, "relations", check_tower_relations(&ctx, DEFAULT_TERM_CAP))?;
    }
    Ok(VerificationReport::new(cert.case_id.clone(), records, start.elapsed().as_millis()))
}

/// Degree budget against the enumerated group order.
pub fn check_budget(cert: &TowerCertificate, cap_elems: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut records = Vec::new();
    if run_check(&mut records, "structure", check_tower_structure(cert))? {
        let ctx = build_ctx(cert);
        let elems = cert.group.enumerate(cap_elems)?;
        run_check(&mut records, "budget", check_tower_budget(&ctx, &elems))?;
    }
    Ok(VerificationReport::new(cert.case_id.clone(), records, start.elapsed().as_millis()))
}

/// Faithfulness of the enumerated group on its ambient points: only the
/// identity fixes everything. Vacuously true for the trivial group.
pub fn check_faithful(group: &GroupSpec, cap_elems: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut records = Vec::new();
    let result = (|| -> Result<()> {
        const C: &str = "faithful";
        let elems = group.enumerate(cap_elems)?;
        let mut seen = BTreeSet::new();
        for e in &elems {
            ensure(seen.insert(e.images().to_vec()), C, || {
                format!("element {} appears twice", e.cycle_string())
            })?;
        }
        Ok(())
    })();
    run_check(&mut records, "faithful", result)?;
    Ok(VerificationReport::new("faithful".into(), records, start.elapsed().as_millis()))
}

/// Size of the orbit of `f` under the enumerated group acting by coordinate
/// permutation; `f` is invariant exactly when the orbit has size 1.
pub fn orbit_oracle(f: &RatFunc, group: &GroupSpec, cap_elems: usize) -> Result<usize> {
    if f.ring().nvars() != group.n {
        return Err(Error::RingMismatch);
    }
    let p = f.ring().p;
    let mut orbit: Vec<RatFunc> = Vec::new();
    for e in group.enumerate(cap_elems)? {
        let image = MonomialAction::from_permutation(&e, group.n, p).act_ratfunc(f);
        if !orbit.iter().any(|o| o == &image) {
            orbit.push(image);
        }
    }
    Ok(orbit.len())
}

// ---------------------------------------------------------------------------
// Seeded mutations
// ---------------------------------------------------------------------------

fn bump(f: &RatFunc) -> RatFunc {
    f.add(&RatFunc::one(f.ring()))
}

fn shift_support_var(f: &RatFunc, rng: &mut SplitMix64) -> RatFunc {
    let ring = f.ring();
    let mut support: Vec<usize> = Vec::new();
    for (mono, _) in f.num().terms().chain(f.den().terms()) {
        for (i, &e) in mono.0.iter().enumerate() {
            if e > 0 && !support.contains(&i) {
                support.push(i);
            }
        }
    }
    if support.is_empty() {
        return bump(f);
    }
    support.sort_unstable();
    let target = support[(rng.next_in(support.len() as u64) - 1) as usize];
    let images: Vec<RatFunc> = (0..ring.nvars())
        .map(|j| {
            let v = RatFunc::var(ring, j);
            if j == target {
                bump(&v)
            } else {
                v
            }
        })
        .collect();
    f.substitute(&images).expect("free-ring substitution cannot fail")
}

fn swap_first_two(perm: &Permutation) -> Permutation {
    let n = perm.degree();
    let mut images: Vec<usize> = Vec::with_capacity(n);
    for i in 1..=n {
        let j = match i {
            1 => 2,
            2 => 1,
            other => other,
        };
        images.push(perm.apply(j));
    }
    Permutation::from_images(images).expect("valid swap composition")
}

fn next_prime_after(p: usize) -> usize {
    match p {
        2 => 3,
        3 => 5,
        5 => 7,
        _ => 3,
    }
}

fn corrupt_scale(action: &MonomialAction, p: usize) -> MonomialAction {
    let mut scales = action.scales().to_vec();
    let factor = if p == 2 {
        CycRat::from_integer(-1, p)
    } else {
        CycRat::zeta_pow(p, 1)
    };
    scales[0] = scales[0].mul(&factor);
    MonomialAction::new(action.perm().clone(), scales).expect("same width")
}

fn tower_mutations(cert: &TowerCertificate, rng: &mut SplitMix64) -> Vec<(String, Certificate)> {
    let mut out = Vec::with_capacity(10);
    let mut push = |name: &str, mutated: TowerCertificate| {
        out.push((name.to_string(), Certificate::Tower(mutated)));
    };
    let pick = |rng: &mut SplitMix64, len: usize| (rng.next_in(len as u64) - 1) as usize;

    // 1. Shift one variable inside a level-0 generator expression.
    {
        let mut c = cert.clone();
        let k = pick(rng, c.levels[0].generators.len());
        let expr = shift_support_var(&c.levels[0].generators[k].expr, rng);
        c.levels[0].generators[k].expr = expr;
        push("level0-expr-shift", c);
    }
    // 2. Scale one level-0 generator expression.
    {
        let mut c = cert.clone();
        let k = pick(rng, c.levels[0].generators.len());
        let expr = c.levels[0].generators[k].expr.scale(&CycRat::from_integer(2, c.domain.p));
        c.levels[0].generators[k].expr = expr;
        push("level0-expr-scale", c);
    }
    // 3. Bump one relation coefficient.
    if cert.relations.is_empty() {
        let mut c = cert.clone();
        c.budget += 1;
        push("budget-bump", c);
    } else {
        let mut c = cert.clone();
        let k = pick(rng, c.relations.len());
        let j = pick(rng, c.relations[k].coefficients.len());
        c.relations[k].coefficients[j] = bump(&c.relations[k].coefficients[j]);
        push("relation-coefficient", c);
    }
    // 4. Inflate one degree claim.
    if cert.relations.is_empty() {
        let mut c = cert.clone();
        let k = pick(rng, c.recovery.len());
        c.recovery[k] = bump(&c.recovery[k]);
        push("recovery-shift", c);
    } else {
        let mut c = cert.clone();
        let k = pick(rng, c.relations.len());
        c.relations[k].degree_claim += 1;
        push("relation-degree", c);
    }
    // 5. Bump one recovery expression.
    {
        let mut c = cert.clone();
        let k = pick(rng, c.recovery.len());
        c.recovery[k] = bump(&c.recovery[k]);
        push("recovery-expr", c);
    }
    // 6. Misstate the budget.
    {
        let mut c = cert.clone();
        c.budget += 1;
        push("budget-value", c);
    }
    // 7. Corrupt one group generator permutation.
    if cert.group.generators.is_empty() {
        let mut c = cert.clone();
        c.group.n += 1;
        push("group-degree", c);
    } else {
        let mut c = cert.clone();
        let k = pick(rng, c.group.generators.len());
        c.group.generators[k].images = swap_first_two(&c.group.generators[k].images);
        push("group-generator", c);
    }
    // 8. Corrupt one residual-action scale.
    {
        let sites: Vec<(usize, usize)> = cert
            .levels
            .iter()
            .enumerate()
            .flat_map(|(li, l)| (0..l.residual_action.len()).map(move |ci| (li, ci)))
            .collect();
        if sites.is_empty() {
            let mut c = cert.clone();
            c.domain.defs[0] = bump(&c.domain.defs[0]);
            push("domain-def-shift", c);
        } else {
            let mut c = cert.clone();
            let (li, ci) = sites[pick(rng, sites.len())];
            let action = corrupt_scale(&c.levels[li].residual_action[ci].action, c.domain.p);
            c.levels[li].residual_action[ci].action = action;
            push("residual-claim-scale", c);
        }
    }
    // 9. Corrupt the affine node (or the domain naming when there is none).
    {
        let has_claims =
            cert.affine_node.as_ref().map(|n| !n.claims.is_empty()).unwrap_or(false);
        if has_claims {
            let mut c = cert.clone();
            let node = c.affine_node.as_mut().expect("present");
            let k = pick(rng, node.claims.len());
            let j = pick(rng, node.claims[k].images.len());
            node.claims[k].images[j].constant = bump(&node.claims[k].images[j].constant);
            push("affine-constant", c);
        } else if cert.affine_node.is_some() {
            let mut c = cert.clone();
            c.affine_node.as_mut().expect("present").replaced += 1;
            push("affine-replaced", c);
        } else {
            let mut c = cert.clone();
            c.domain.vars[0] = format!("{}_mut", c.domain.vars[0]);
            push("domain-var-rename", c);
        }
    }
    // 10. Misstate the group prime.
    {
        let mut c = cert.clone();
        c.group.p = next_prime_after(c.group.p);
        push("group-prime", c);
    }
    out
}

fn kernel_mutations(cert: &KernelCertificate, rng: &mut SplitMix64) -> Vec<(String, Certificate)> {
    let mut out = Vec::with_capacity(10);
    let mut push = |name: &str, mutated: KernelCertificate| {
        out.push((name.to_string(), Certificate::Kernel(mutated)));
    };
    let pick = |rng: &mut SplitMix64, len: usize| (rng.next_in(len as u64) - 1) as usize;
    let tring = cert.generators[0].expr.ring().clone();
    let t1 = RatFunc::var(&tring, 0);

    {
        let mut c = cert.clone();
        let k = pick(rng, c.generators.len());
        c.generators[k].expr = shift_support_var(&c.generators[k].expr, rng);
        push("gen-expr-shift", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.generators.len());
        c.generators[k].expr = c.generators[k].expr.mul(&t1);
        push("gen-expr-mul-var", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.generators.len());
        c.generators.remove(k);
        push("gen-drop", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.generators.len());
        let other = (k + 1) % c.generators.len();
        c.generators[k].expr = c.generators[other].expr.clone();
        push("gen-duplicate", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.generators.len());
        c.generators[k].expr = c.generators[k].expr.add(&t1);
        push("gen-add-var", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.group.generators.len());
        c.group.generators[k].images = swap_first_two(&c.group.generators[k].images);
        push("group-generator", c);
    }
    {
        let mut c = cert.clone();
        c.group.n += c.p;
        push("group-degree", c);
    }
    {
        let mut c = cert.clone();
        c.n += 1;
        push("block-count", c);
    }
    {
        let mut c = cert.clone();
        c.p = next_prime_after(c.p);
        push("prime", c);
    }
    {
        let mut c = cert.clone();
        c.group.family = crate::group::Family::Sylow;
        push("family", c);
    }
    out
}

fn cyclic_mutations(cert: &CyclicCertificate, rng: &mut SplitMix64) -> Vec<(String, Certificate)> {
    let mut out = Vec::with_capacity(10);
    let mut push = |name: &str, mutated: CyclicCertificate| {
        out.push((name.to_string(), Certificate::CyclicSystem(mutated)));
    };
    let pick = |rng: &mut SplitMix64, len: usize| (rng.next_in(len as u64) - 1) as usize;
    {
        let mut c = cert.clone();
        c.z = bump(&c.z);
        push("z-shift", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.final_generators.len());
        c.final_generators[k] = bump(&c.final_generators[k]);
        push("final-generator-shift", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.u.len());
        c.u[k] = bump(&c.u[k]);
        push("u-shift", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.v.len());
        c.v[k] = bump(&c.v[k]);
        push("v-shift", c);
    }
    {
        let mut c = cert.clone();
        c.g1 = corrupt_scale(&c.g1, c.p);
        push("g1-scale", c);
    }
    {
        let mut c = cert.clone();
        c.g2 = corrupt_scale(&c.g2, c.p);
        push("g2-scale", c);
    }
    {
        let mut c = cert.clone();
        c.final_generators.pop();
        push("final-generator-drop", c);
    }
    {
        let mut c = cert.clone();
        c.u.pop();
        push("u-drop", c);
    }
    {
        let mut c = cert.clone();
        let k = pick(rng, c.final_generators.len());
        c.final_generators[k] =
            c.final_generators[k].scale(&CycRat::from_integer(2, c.p));
        push("final-generator-scale", c);
    }
    {
        let mut c = cert.clone();
        c.z = c.z.scale(&CycRat::from_integer(2, c.p));
        push("z-scale", c);
    }
    out
}

fn discriminant_mutations(
    cert: &DiscriminantCertificate,
    _rng: &mut SplitMix64,
) -> Vec<(String, Certificate)> {
    let mut out = Vec::with_capacity(10);
    let mut push = |name: &str, mutated: DiscriminantCertificate| {
        out.push((name.to_string(), Certificate::Discriminant(mutated)));
    };
    let one = Poly::one(cert.discriminant.ring());
    let xone = Poly::one(cert.root_difference.ring());
    let two = CycRat::from_integer(2, 2);
    {
        let mut c = cert.clone();
        c.discriminant = c.discriminant.add(&one);
        push("discriminant-shift", c);
    }
    {
        let mut c = cert.clone();
        c.discriminant = c.discriminant.scale(&two);
        push("discriminant-scale", c);
    }
    {
        let mut c = cert.clone();
        c.root_difference = c.root_difference.add(&xone);
        push("product-shift", c);
    }
    {
        let mut c = cert.clone();
        c.root_difference = c.root_difference.scale(&two);
        push("product-scale", c);
    }
    {
        let mut c = cert.clone();
        c.specializations[0].value = c.specializations[0].value.add(&CycRat::one(2));
        push("specialization-value", c);
    }
    {
        let mut c = cert.clone();
        c.specializations[0].point[0] =
            c.specializations[0].point[0].add(&CycRat::one(2));
        push("specialization-point", c);
    }
    {
        let mut c = cert.clone();
        c.specializations[1].value = c.specializations[1].value.add(&CycRat::one(2));
        push("specialization-value-degenerate", c);
    }
    {
        let mut c = cert.clone();
        c.specializations[0].value = c.specializations[0].value.mul(&two);
        push("specialization-value-scale", c);
    }
    {
        let mut c = cert.clone();
        c.discriminant = c.discriminant.neg();
        push("discriminant-negate", c);
    }
    {
        let mut c = cert.clone();
        let xr = c.root_difference.ring().clone();
        let images: Vec<RatFunc> = (0..3)
            .map(|j| {
                let v = RatFunc::var(&xr, j);
                if j == 0 {
                    bump(&v)
                } else {
                    v
                }
            })
            .collect();
        let shifted = RatFunc::from_poly(c.root_difference.clone())
            .substitute(&images)
            .expect("free-ring substitution");
        c.root_difference = shifted.num().clone();
        push("product-var-shift", c);
    }
    out
}

/// Exactly ten deterministic single-field corruptions of a certificate,
/// driven by the seed. Each mutation changes one stored field; a sound
/// verifier must fail at least one check on every one of them.
pub fn seeded_mutations(cert: &Certificate, seed: u64) -> Vec<(String, Certificate)> {
    let mut rng = SplitMix64::new(seed);
    match cert {
        Certificate::Tower(c) => tower_mutations(c, &mut rng),
        Certificate::Kernel(c) => kernel_mutations(c, &mut rng),
        Certificate::CyclicSystem(c) => cyclic_mutations(c, &mut rng),
        Certificate::Discriminant(c) => discriminant_mutations(c, &mut rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::sylow_group;
    use crate::tower::{
        build_cyclic_certificate, build_discriminant, build_kernel_generators, build_p2_tower,
        build_podd_tower, Domain, NamedGenerator, StepRelation,
    };

    fn opts() -> VerifyOptions {
        VerifyOptions::default()
    }

    /// The classical two-variable symmetric case: the fixed field of the
    /// full symmetric group on x1, x2 is generated by e1 and e2, with x1
    /// adjoined by the quadratic X^2 - e1 X + e2. Every check of the
    /// acceptance logic passes, documenting the soundness theorem on a case
    /// known independently of this codebase.
    fn toy_symmetric_cert() -> TowerCertificate {
        let p = 2usize;
        let ring = Ring::free(p, vec!["x1".into(), "x2".into()]);
        let x1 = Poly::var(&ring, 0);
        let x2 = Poly::var(&ring, 1);
        let e1 = RatFunc::from_poly(x1.add(&x2));
        let e2 = RatFunc::from_poly(x1.mul(&x2));
        let names = vec!["e1".to_string(), "e2".to_string(), "t1".to_string()];
        let nring = Ring::free(p, names);
        let nv = |i: usize| RatFunc::var(&nring, i);
        TowerCertificate {
            affine_node: None,
            budget: 2,
            case_id: "toy-sym2".into(),
            domain: Domain {
                defs: vec![RatFunc::var(&ring, 0), RatFunc::var(&ring, 1)],
                free_indices: vec![],
                p,
                solved: vec![],
                vars: vec!["x1".into(), "x2".into()],
            },
            group: sylow_group(2, 2).unwrap(),
            levels: vec![
                GeneratorLevel {
                    generators: vec![
                        NamedGenerator {
                            definition: "x1 + x2".into(),
                            expr: e1,
                            name: "e1".into(),
                        },
                        NamedGenerator {
                            definition: "x1*x2".into(),
                            expr: e2,
                            name: "e2".into(),
                        },
                    ],
                    residual_action: vec![],
                },
                GeneratorLevel {
                    generators: vec![NamedGenerator {
                        definition: "x1".into(),
                        expr: RatFunc::var(&ring, 0),
                        name: "t1".into(),
                    }],
                    residual_action: vec![],
                },
            ],
            recovery: vec![nv(2), nv(0).sub(&nv(2))],
            relations: vec![StepRelation {
                coefficients: vec![nv(1), nv(0).neg(), RatFunc::one(&nring)],
                definition: "x1".into(),
                degree_claim: 2,
                new_expr: RatFunc::var(&ring, 0),
                new_generator: "t1".into(),
            }],
        }
    }

    #[test]
    fn toy_symmetric_case_passes_all_checks() {
        let cert = Certificate::Tower(toy_symmetric_cert());
        let report = verify_certificate(&cert, &opts()).unwrap();
        assert!(report.ok, "failures: {:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.checks.len(), 10);
    }

    #[test]
    fn p2_towers_verify() {
        for n in [2usize, 4, 5] {
            let cert = Certificate::Tower(build_p2_tower(n).unwrap());
            let report = verify_certificate(&cert, &opts()).unwrap();
            assert!(
                report.ok,
                "n = {n} failures: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn podd_towers_verify() {
        for (n, p) in [(3usize, 3usize), (6, 3), (4, 3)] {
            let cert = Certificate::Tower(build_podd_tower(n, p).unwrap());
            let report = verify_certificate(&cert, &opts()).unwrap();
            assert!(
                report.ok,
                "(n, p) = ({n}, {p}) failures: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn kernel_certificates_verify() {
        for (n, p) in [(2usize, 2usize), (2, 3)] {
            let cert = Certificate::Kernel(build_kernel_generators(n, p).unwrap());
            let report = verify_certificate(&cert, &opts()).unwrap();
            assert!(
                report.ok,
                "(n, p) = ({n}, {p}) failures: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn cyclic_certificate_verifies() {
        let cert = Certificate::CyclicSystem(build_cyclic_certificate(3).unwrap());
        let report = verify_certificate(&cert, &opts()).unwrap();
        assert!(report.ok, "failures: {:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.checks.len(), 12);
    }

    #[test]
    fn discriminant_certificate_verifies() {
        let cert = Certificate::Discriminant(build_discriminant().unwrap());
        let report = verify_certificate(&cert, &opts()).unwrap();
        assert!(report.ok, "failures: {:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn corrupted_generator_fails_with_witness() {
        let mut cert = build_p2_tower(4).unwrap();
        // Replace the first level-0 generator with the non-invariant x1.
        let dring = cert.levels[0].generators[0].expr.ring().clone();
        cert.levels[0].generators[0].expr = RatFunc::var(&dring, 0);
        let report = verify_certificate(&Certificate::Tower(cert), &opts()).unwrap();
        assert!(!report.ok);
        let invariance = report.checks.iter().find(|c| c.name == "invariance").unwrap();
        assert_eq!(invariance.status, CheckStatus::Fail);
        assert!(invariance.witness.as_deref().unwrap().contains("tprod"));
    }

    #[test]
    fn report_serialization_is_deterministic() {
        let cert = Certificate::Tower(build_p2_tower(4).unwrap());
        let a = serde_json::to_string(&verify_certificate(&cert, &opts()).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_certificate(&cert, &opts()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_oracle_matches_invariance() {
        let sigma2 = sylow_group(2, 2).unwrap();
        let ring = Ring::free(2, vec!["x1".into(), "x2".into()]);
        let sym = RatFunc::from_poly(Poly::var(&ring, 0).add(&Poly::var(&ring, 1)));
        let skew = RatFunc::var(&ring, 0);
        assert_eq!(orbit_oracle(&sym, &sigma2, 1 << 10).unwrap(), 1);
        assert_eq!(orbit_oracle(&skew, &sigma2, 1 << 10).unwrap(), 2);

        // The product of the block combinations is fixed by the bottom
        // rotation differences: the scales multiply to zeta^0.
        let cert = build_podd_tower(9, 3).unwrap();
        let tp_x = cert.domain.defs[0]
            .mul(&cert.domain.defs[1])
            .mul(&cert.domain.defs[2]);
        let rotations = crate::group::bottom_difference_group(9, 3).unwrap();
        assert_eq!(orbit_oracle(&tp_x, &rotations, 1 << 10).unwrap(), 1);

        // Agreement between the two oracles on every level-0 generator of
        // the ambient-domain towers.
        let p2 = build_p2_tower(4).unwrap();
        let level_report = check_invariance(&p2.levels[0], &p2.group).unwrap();
        assert!(level_report.ok);
        for g in &p2.levels[0].generators {
            assert_eq!(orbit_oracle(&g.expr, &p2.group, 1 << 10).unwrap(), 1, "{}", g.name);
        }
    }

    #[test]
    fn every_tower_mutation_flips_a_check() {
        let fast = VerifyOptions { fast_fail: true, ..VerifyOptions::default() };
        for base in [
            Certificate::Tower(build_p2_tower(4).unwrap()),
            Certificate::Tower(build_podd_tower(6, 3).unwrap()),
        ] {
            let mutations = seeded_mutations(&base, 0xC0FFEE);
            assert_eq!(mutations.len(), 10);
            for (site, mutated) in mutations {
                let report = verify_certificate(&mutated, &fast).unwrap();
                assert!(!report.ok, "mutation {site} slipped through");
            }
        }
    }

    #[test]
    fn every_kernel_mutation_flips_a_check() {
        let fast = VerifyOptions { fast_fail: true, ..VerifyOptions::default() };
        let base = Certificate::Kernel(build_kernel_generators(2, 2).unwrap());
        let mutations = seeded_mutations(&base, 0xC0FFEE);
        assert_eq!(mutations.len(), 10);
        for (site, mutated) in mutations {
            let report = verify_certificate(&mutated, &fast).unwrap();
            assert!(!report.ok, "mutation {site} slipped through");
        }
    }

    #[test]
    fn spec_entry_points_pass_on_built_certificates() {
        let cert = build_p2_tower(4).unwrap();
        assert!(check_relations(&cert).unwrap().ok);
        assert!(check_budget(&cert, 1 << 10).unwrap().ok);
        assert!(check_faithful(&cert.group, 1 << 10).unwrap().ok);
    }
}
