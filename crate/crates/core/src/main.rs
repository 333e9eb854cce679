//! Command-line front door: summarize the permutation groups, build
//! certificates as canonical JSON, and re-verify certificate files.
//!
//! Exit status: 0 when the command succeeds (for `verify`: every check
//! passed), 1 when verification ran but at least one check failed, 2 for
//! usage, I/O, parse, and resource errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use invariant_towers::group::{sylow_group, GroupSpec, DEFAULT_ENUM_CAP};
use invariant_towers::perm::order_exponent;
use invariant_towers::ratfunc::DEFAULT_JACOBIAN_SEED;
use invariant_towers::tower::{
    build_cyclic_certificate, build_discriminant, build_kernel_generators, build_p2_tower,
    build_podd_tower, Certificate, DEFAULT_TERM_CAP,
};
use invariant_towers::verify::{verify_certificate, CheckStatus, VerificationReport, VerifyOptions};
use invariant_towers::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "invariant-towers",
    version,
    about = "Exact generator towers for fixed fields of p-group actions on rational function fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the Sylow p-subgroup of the symmetric group on n points.
    GroupInfo(GroupInfoArgs),
    /// Construct a certificate and write it as canonical JSON.
    Build(BuildArgs),
    /// Re-check every claim in a certificate file and report the results.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Case {
    /// Full tower for the orientation subgroup at p = 2.
    P2,
    /// Full tower for the orientation subgroup at an odd prime.
    Podd,
    /// Invariant generators for the kernel group on block variables.
    Kernel,
    /// Cyclic generator system for one block at an odd prime.
    Cyclic,
    /// Cubic discriminant identity with specializations.
    Discriminant,
}

#[derive(Args)]
struct GroupInfoArgs {
    /// Number of points the group permutes.
    #[arg(long, env = "NT_N")]
    n: usize,
    /// The prime p.
    #[arg(long, env = "NT_P")]
    p: usize,
    /// Output format (dot draws one row of points per generator).
    #[arg(long, env = "NT_FORMAT", value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this path instead of standard output.
    #[arg(long, env = "NT_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Certificate family to construct.
    #[arg(long, env = "NT_CASE", value_enum)]
    case: Case,
    /// Ambient degree (p2, podd) or block count (kernel).
    #[arg(long, env = "NT_N")]
    n: Option<usize>,
    /// The prime p (podd, kernel, cyclic).
    #[arg(long, env = "NT_P")]
    p: Option<usize>,
    /// Certificates are always canonical JSON; only json is accepted here.
    #[arg(long, env = "NT_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this path instead of standard output.
    #[arg(long, env = "NT_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate file to verify.
    path: PathBuf,
    /// Output format for the report.
    #[arg(long, env = "NT_FORMAT", value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to this path instead of standard output.
    #[arg(long, env = "NT_OUT")]
    out: Option<PathBuf>,
    /// Maximum number of group elements to enumerate.
    #[arg(long, env = "NT_CAP_ELEMS", default_value_t = DEFAULT_ENUM_CAP)]
    cap_elems: usize,
    /// Maximum number of terms in any intermediate polynomial.
    #[arg(long, env = "NT_CAP_TERMS", default_value_t = DEFAULT_TERM_CAP)]
    cap_terms: usize,
    /// Seed for the sampled evaluation points of the rank check.
    #[arg(long, env = "NT_SEED", default_value_t = DEFAULT_JACOBIAN_SEED)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GroupInfo(args) => {
            let group = sylow_group(args.n, args.p)?;
            let text = match args.format {
                Format::Text => group_info_text(&group),
                Format::Json => group_info_json(&group)?,
                Format::Dot => group_info_dot(&group),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Command::Build(args) => {
            let text = cmd_build(&args)?;
            emit(&args.out, &text)?;
            Ok(0)
        }
        Command::Verify(args) => {
            let (text, code) = cmd_verify(&args)?;
            emit(&args.out, &text)?;
            Ok(code)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Group order as `p^e` with the numeric value appended when it fits.
fn order_display(p: usize, e: usize) -> String {
    match u32::try_from(e).ok().and_then(|e| (p as u128).checked_pow(e)) {
        Some(v) => format!("{p}^{e} = {v}"),
        None => format!("{p}^{e}"),
    }
}

fn orientation_index(n: usize, p: usize) -> usize {
    if order_exponent(n, p) >= 1 {
        p
    } else {
        1
    }
}

fn group_info_text(group: &GroupSpec) -> String {
    let e = order_exponent(group.n, group.p);
    let mut s = String::new();
    if group.generators.is_empty() {
        let _ = writeln!(
            s,
            "Sylow {}-subgroup of the symmetric group on {} points: trivial group",
            group.p, group.n
        );
        return s;
    }
    let _ = writeln!(
        s,
        "Sylow {}-subgroup of the symmetric group on {} points",
        group.p, group.n
    );
    let _ = writeln!(s, "order exponent: nu_{}({}!) = {e}", group.p, group.n);
    let _ = writeln!(s, "group order: {}", order_display(group.p, e));
    let _ = writeln!(
        s,
        "orientation subgroup index: {}",
        orientation_index(group.n, group.p)
    );
    let _ = writeln!(s, "generators ({}):", group.generators.len());
    for g in &group.generators {
        let _ = writeln!(s, "  {}  {}", g.label, g.images.cycle_string());
    }
    s
}

fn group_info_json(group: &GroupSpec) -> Result<String> {
    let e = order_exponent(group.n, group.p);
    let order_value = u32::try_from(e)
        .ok()
        .and_then(|e| (group.p as u128).checked_pow(e))
        .and_then(|v| u64::try_from(v).ok());
    let generators: Vec<serde_json::Value> = group
        .generators
        .iter()
        .map(|g| {
            serde_json::json!({
                "cycles": g.images.cycle_string(),
                "label": g.label,
            })
        })
        .collect();
    let value = serde_json::json!({
        "family": "sylow",
        "generators": generators,
        "n": group.n,
        "order": format!("{}^{e}", group.p),
        "order_exponent": e,
        "order_value": order_value,
        "orientation_index": orientation_index(group.n, group.p),
        "p": group.p,
        "trivial": group.generators.is_empty(),
    });
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// One cluster of points per generator; arcs join each moved point to its
/// image, with transposition pairs drawn once as a double-headed edge.
fn group_info_dot(group: &GroupSpec) -> String {
    let mut s = String::new();
    s.push_str("digraph generators {\n");
    s.push_str("  rankdir=LR;\n");
    s.push_str("  node [shape=point, width=0.1];\n");
    for (gi, g) in group.generators.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_g{gi} {{");
        let _ = writeln!(s, "    label=\"{}\";", g.label);
        for pt in 1..=group.n {
            let _ = writeln!(s, "    g{gi}_p{pt} [xlabel=\"{pt}\"];");
        }
        let mut drawn = vec![false; group.n + 1];
        for pt in 1..=group.n {
            let img = g.images.apply(pt);
            if img == pt || drawn[pt] {
                continue;
            }
            if g.images.apply(img) == pt {
                let _ = writeln!(s, "    g{gi}_p{pt} -> g{gi}_p{img} [dir=both];");
                drawn[img] = true;
            } else {
                let _ = writeln!(s, "    g{gi}_p{pt} -> g{gi}_p{img};");
            }
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

fn cmd_build(args: &BuildArgs) -> Result<String> {
    if args.format != Format::Json {
        return Err(Error::UnsupportedOperation(
            "certificates are always written as canonical JSON; use --format json".into(),
        ));
    }
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| {
            Error::UnsupportedOperation(format!("--{flag} is required for this case"))
        })
    };
    let cert = match args.case {
        Case::P2 => Certificate::Tower(build_p2_tower(need(args.n, "n")?)?),
        Case::Podd => {
            Certificate::Tower(build_podd_tower(need(args.n, "n")?, need(args.p, "p")?)?)
        }
        Case::Kernel => Certificate::Kernel(build_kernel_generators(
            need(args.n, "n")?,
            need(args.p, "p")?,
        )?),
        Case::Cyclic => Certificate::CyclicSystem(build_cyclic_certificate(need(args.p, "p")?)?),
        Case::Discriminant => Certificate::Discriminant(build_discriminant()?),
    };
    let mut text = serde_json::to_string_pretty(&cert)?;
    text.push('\n');
    Ok(text)
}

fn report_text(report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case {}: {} checks", report.case, report.checks.len());
    for c in &report.checks {
        match (&c.status, &c.witness) {
            (CheckStatus::Pass, _) => {
                let _ = writeln!(s, "  PASS {}", c.name);
            }
            (CheckStatus::Fail, Some(w)) => {
                let _ = writeln!(s, "  FAIL {} — {w}", c.name);
            }
            (CheckStatus::Fail, None) => {
                let _ = writeln!(s, "  FAIL {}", c.name);
            }
        }
    }
    let _ = writeln!(s, "result: {}", if report.ok { "PASS" } else { "FAIL" });
    s
}

fn cmd_verify(args: &VerifyArgs) -> Result<(String, u8)> {
    let raw = fs::read_to_string(&args.path)?;
    let cert: Certificate = serde_json::from_str(&raw)?;
    let opts = VerifyOptions {
        cap_elems: args.cap_elems,
        cap_terms: args.cap_terms,
        seed: args.seed,
        fast_fail: false,
    };
    let report = verify_certificate(&cert, &opts)?;
    let text = match args.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&report)?;
            t.push('\n');
            t
        }
        Format::Text => report_text(&report),
        Format::Dot => {
            return Err(Error::UnsupportedOperation(
                "reports have no diagram form; use json or text".into(),
            ))
        }
    };
    Ok((text, if report.ok { 0 } else { 1 }))
}
