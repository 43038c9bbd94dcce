use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcert_core::combinatorics::{format_rational, parse_rational};
use kcert_core::decomposition::{
    decompose_for_cover, decompose_for_refutation, validate_decomposition, Decomposition, RangePolicy,
};
use kcert_core::generate::{self, EdgeMode, Generated};
use kcert_core::io::{hypergraph_to_string, parse_hypergraph, parse_xor, xor_to_string};
use kcert_core::kikuchi_even::{build_even_kikuchi, shortest_even_cover_via_kikuchi, trace_audit, Caps};
use kcert_core::kikuchi_odd::{build_colored_kikuchi, delete_heavy_edges, equalize_deletion, Eta};
use kcert_core::moore::{ihara_moore_certificate, moore_bound_audit};
use kcert_core::oracle::{graph_girth, min_even_cover_oracle};
use kcert_core::refuter::{
    default_eta, parse_eta, refute, verify_certificate_report, RefutationCertificate, RefuteOptions,
};
use kcert_core::spectral::theorem_ell;
use kcert_core::{verify_even_cover, Error, EvenCover, Hypergraph, XorInstance};
use num_rational::BigRational;

const EXIT_VERIFY: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "kcert", version, about = "Kikuchi-matrix even covers and XOR refutation certificates")]
struct Cli {
    /// Worker threads (the KCERT_THREADS variable takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance.
    Gen(GenArgs),
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Partition the clauses into heavy-set groups.
    Decompose(DecomposeArgs),
    #[command(subcommand)]
    Kikuchi(KikuchiCmd),
    /// Emit a refutation certificate as canonical JSON.
    Refute(RefuteArgs),
    /// Recheck a certificate against its instance (exit 2 on mismatch).
    VerifyCert { instance: PathBuf, certificate: PathBuf },
    #[command(subcommand)]
    Audit(AuditCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Uniform k-uniform hypergraph.
    Random,
    Cycle,
    Path,
    Complete,
    Petersen,
    Heawood,
    /// Union of random Hamiltonian cycles.
    CycleUnion,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Number of cycles for `cycle-union`.
    #[arg(long, default_value_t = 2)]
    cycles: usize,
    /// Attach uniformly random signs (XOR output).
    #[arg(long)]
    signed: bool,
    #[arg(long)]
    with_replacement: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Shortest nontrivial closed walk in the level-r Kikuchi graph.
    Find {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Check a cover given as 1-based clause indices.
    Verify {
        input: PathBuf,
        /// File with whitespace-separated 1-based clause indices.
        cover: PathBuf,
    },
    /// Exact minimum even cover up to a size cap.
    Oracle {
        input: PathBuf,
        #[arg(long)]
        cap: usize,
    },
}

#[derive(Args, Clone, Copy)]
struct CapArgs {
    #[arg(long, default_value_t = Caps::default().max_vertices)]
    max_vertices: u128,
    #[arg(long, default_value_t = Caps::default().max_edges)]
    max_edges: u128,
}

impl From<CapArgs> for Caps {
    fn from(c: CapArgs) -> Caps {
        Caps { max_vertices: c.max_vertices, max_edges: c.max_edges }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    Cover,
    Refute,
}

#[derive(Args)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Cover)]
    mode: ModeArg,
    #[arg(long)]
    r: u32,
    #[arg(long, default_value = "1/4")]
    eps: String,
    /// Allow r outside [2k, n/8].
    #[arg(long)]
    relaxed: bool,
}

#[derive(Args)]
struct KikuchiArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Colored graphs of the refutation decomposition.
    #[arg(long)]
    odd: bool,
    /// Only this level (odd mode).
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, default_value = "1/4")]
    eps: String,
    /// Deletion threshold: integer or `inf`; defaults to max{1, ceil(4^k/eps^2)}.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    relaxed: bool,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Subcommand)]
enum KikuchiCmd {
    Stats(KikuchiArgs),
    Dump(KikuchiArgs),
}

#[derive(Args)]
struct RefuteArgs {
    input: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "1/4")]
    eps: String,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    relaxed: bool,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Girth against the Moore-type bounds.
    Moore { input: PathBuf },
    /// Girth and the PSD certificate for an even l.
    Girth {
        input: PathBuf,
        #[arg(long)]
        ell: usize,
    },
    /// Exact tr((Gamma^-1 A)^l) against the walk-counting bound.
    Trace {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Defaults to 2 ceil(r log2 n).
        #[arg(long)]
        ell: Option<u32>,
        #[command(flatten)]
        caps: CapArgs,
    },
}

enum Failure {
    Lib(Error),
    Verify(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> CliResult {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Accepts either file format; XOR signs are dropped.
fn read_hypergraph(path: &Path) -> std::result::Result<Hypergraph, Failure> {
    let text = read(path)?;
    if text.starts_with("xor") {
        Ok(parse_xor(&text)?.hypergraph().clone())
    } else {
        Ok(parse_hypergraph(&text)?)
    }
}

fn read_xor(path: &Path) -> std::result::Result<XorInstance, Failure> {
    Ok(parse_xor(&read(path)?)?)
}

fn rational_arg(s: &str, what: &str) -> std::result::Result<BigRational, Failure> {
    parse_rational(s).ok_or_else(|| Failure::Other(format!("{what}: `{s}` is not a rational")))
}

fn eta_arg(s: Option<&str>) -> std::result::Result<Option<Eta>, Failure> {
    s.map(|s| parse_eta(s).ok_or_else(|| Failure::Other(format!("eta: `{s}` is not a positive integer or `inf`"))))
        .transpose()
}

fn policy(relaxed: bool) -> RangePolicy {
    if relaxed {
        RangePolicy::Relaxed
    } else {
        RangePolicy::Strict
    }
}

fn cover_line(c: &EvenCover) -> String {
    c.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn gen(a: &GenArgs) -> CliResult {
    let mode = if a.with_replacement { EdgeMode::WithReplacement } else { EdgeMode::WithoutReplacement };
    let h = match a.kind {
        GenKind::Random => match generate::gen_random(a.n, a.k, a.m, a.seed, mode, a.signed)? {
            Generated::Xor(x) => return emit(&xor_to_string(&x), a.output.as_deref()),
            Generated::Hypergraph(h) => h,
        },
        GenKind::Cycle => generate::cycle(a.n),
        GenKind::Path => generate::path(a.n),
        GenKind::Complete => generate::complete(a.n),
        GenKind::Petersen => generate::petersen(),
        GenKind::Heawood => generate::heawood(),
        GenKind::CycleUnion => generate::random_cycle_union(a.n, a.cycles, a.seed),
    };
    if a.signed {
        let x = generate::with_random_signs(h, a.seed);
        emit(&xor_to_string(&x), a.output.as_deref())
    } else {
        emit(&hypergraph_to_string(&h), a.output.as_deref())
    }
}

fn cover(c: &CoverCmd) -> CliResult {
    match c {
        CoverCmd::Find { input, r, caps } => {
            let h = read_hypergraph(input)?;
            match shortest_even_cover_via_kikuchi(&h, *r, (*caps).into())? {
                Some(w) => {
                    if !verify_even_cover(&h, &w.cover)? {
                        return Err(Failure::Verify("emitted cover failed verification".into()));
                    }
                    println!("walk-length {}", w.length());
                    println!("{}", w.cover.len());
                    println!("{}", cover_line(&w.cover));
                }
                None => println!("none"),
            }
        }
        CoverCmd::Verify { input, cover } => {
            let h = read_hypergraph(input)?;
            let text = read(cover)?;
            let mut idx = Vec::new();
            for tok in text.split_whitespace() {
                let i: usize = tok
                    .parse()
                    .map_err(|_| Failure::Other(format!("cover index `{tok}` is not a positive integer")))?;
                if i == 0 {
                    return Err(Failure::Other("cover indices are 1-based".into()));
                }
                idx.push(i - 1);
            }
            if verify_even_cover(&h, &EvenCover::new(idx))? {
                println!("valid");
            } else {
                return Err(Failure::Verify("not an even cover".into()));
            }
        }
        CoverCmd::Oracle { input, cap } => {
            let h = read_hypergraph(input)?;
            match min_even_cover_oracle(&h, *cap)? {
                Some((size, c)) => {
                    println!("{size}");
                    println!("{}", cover_line(&c));
                }
                None => println!("none"),
            }
        }
    }
    Ok(())
}

fn decomposition_text(h: &Hypergraph, d: &Decomposition) -> String {
    let mut out = format!("decomposition {} {} {} {} {}\n", d.mode.as_str(), d.n, d.m, d.k, d.r);
    if let Some(e) = &d.eps {
        writeln!(out, "eps {}", format_rational(e)).unwrap();
    }
    for (level, groups) in &d.levels {
        writeln!(out, "level {level} tau {} groups {}", d.threshold(*level), groups.len()).unwrap();
        for g in groups {
            let center: Vec<String> = g.center.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(out, "  [{}] {}", center.join(" "), cover_line(&EvenCover::new(g.clause_indices.clone()))).unwrap();
        }
    }
    let report = validate_decomposition(h, d);
    for v in &report.violations {
        writeln!(out, "violation {v}").unwrap();
    }
    for (level, ok) in &report.density_ok {
        writeln!(out, "density level {level} {}", if *ok { "ok" } else { "exceeded" }).unwrap();
    }
    out
}

fn decompose(a: &DecomposeArgs) -> CliResult {
    let h = read_hypergraph(&a.input)?;
    let d = match a.mode {
        ModeArg::Cover => decompose_for_cover(&h, a.r)?,
        ModeArg::Refute => decompose_for_refutation(&h, a.r, &rational_arg(&a.eps, "eps")?, policy(a.relaxed))?,
    };
    print!("{}", decomposition_text(&h, &d));
    if !validate_decomposition(&h, &d).violations.is_empty() {
        return Err(Failure::Verify("decomposition violates its postconditions".into()));
    }
    Ok(())
}

fn kikuchi(cmd: &KikuchiCmd) -> CliResult {
    let (a, dump) = match cmd {
        KikuchiCmd::Stats(a) => (a, false),
        KikuchiCmd::Dump(a) => (a, true),
    };
    let h = read_hypergraph(&a.input)?;
    if !a.odd {
        let g = build_even_kikuchi(&h, a.r, a.caps.into())?;
        if dump {
            print!("{}", g.dump());
        } else {
            let s = g.stats();
            println!("vertices {}", s.num_vertices);
            println!("edges {}", s.num_edges);
            println!("alpha {}", s.alpha);
            println!("d {}", format_rational(&s.d));
            println!("degenerate {}", s.degenerate);
            for (deg, count) in &s.degree_histogram {
                println!("degree {deg} {count}");
            }
        }
        return Ok(());
    }
    let eps = rational_arg(&a.eps, "eps")?;
    let eta = eta_arg(a.eta.as_deref())?.unwrap_or_else(|| default_eta(h.k(), &eps));
    let r = u32::try_from(a.r).map_err(|_| Failure::Other("r too large".into()))?;
    let d = decompose_for_refutation(&h, r, &eps, policy(a.relaxed))?;
    for t in 1..h.k() {
        if a.level.is_some_and(|l| l != t) || d.clause_count(t) == 0 {
            continue;
        }
        let g = build_colored_kikuchi(&h, d.groups(t), a.r, a.caps.into())?;
        if dump {
            print!("{}", g.dump());
            continue;
        }
        let pre = delete_heavy_edges(&g, eta);
        let del = equalize_deletion(&g, &pre);
        let w = g.degree_window();
        println!("level {t}");
        println!("  vertices {}", g.num_vertices());
        println!("  edges {}", g.edges().len());
        println!("  ordered-pairs {}", g.pair_count());
        println!("  alpha {} closed-form {}", g.alpha(), g.closed_form_alpha());
        println!(
            "  d {} window [{}, {}] {}",
            format_rational(&w.d),
            format_rational(&w.low),
            format_rational(&w.high),
            if w.within { "inside" } else { "outside" }
        );
        println!("  eta {eta}");
        println!("  max-pair-deletion {}", format_rational(&pre.max_pair_deletion_fraction()));
        match del.kappa {
            Some(kappa) => println!("  kappa {kappa} rho {}", format_rational(&del.rho)),
            None => println!("  kappa none"),
        }
        println!("  surviving-edges {}", del.survivors.len());
    }
    Ok(())
}

fn refute_cmd(a: &RefuteArgs) -> CliResult {
    let inst = read_xor(&a.input)?;
    let mut opts = RefuteOptions::new(a.r, a.seed);
    if inst.k() % 2 == 1 {
        opts.eps = Some(rational_arg(&a.eps, "eps")?);
        opts.eta = eta_arg(a.eta.as_deref())?;
    }
    opts.policy = policy(a.relaxed);
    opts.caps = a.caps.into();
    let cert = refute(&inst, &opts)?;
    emit(&cert.to_canonical_json(), a.output.as_deref())?;
    if a.output.is_some() {
        println!("certified_bound {}", format_rational(&cert.certified_bound));
    }
    Ok(())
}

fn verify_cert(instance: &Path, certificate: &Path) -> CliResult {
    let inst = read_xor(instance)?;
    let cert = RefutationCertificate::from_json(&read(certificate)?)?;
    let report = verify_certificate_report(&inst, &cert)?;
    if report.ok() {
        println!("ok certified_bound {}", format_rational(&cert.certified_bound));
        Ok(())
    } else {
        for f in &report.failures {
            println!("fail {f}");
        }
        Err(Failure::Verify(format!("{} check(s) failed", report.failures.len())))
    }
}

fn audit(cmd: &AuditCmd) -> CliResult {
    match cmd {
        AuditCmd::Moore { input } => {
            let g = read_hypergraph(input)?;
            let a = moore_bound_audit(&g)?;
            let show = |x: Option<u64>| x.map_or("n/a".to_string(), |v| v.to_string());
            println!("n {} m {} d {}", a.n, a.m, format_rational(&a.d));
            println!("girth {}", a.girth.map_or("inf".to_string(), |g| g.to_string()));
            println!("exact-bound {} {}", show(a.exact_bound), if a.exact_ok() { "ok" } else { "VIOLATED" });
            println!("weak-bound {} {}", show(a.weak_bound), if a.weak_ok() { "ok" } else { "VIOLATED" });
            if !(a.exact_ok() && a.weak_ok()) {
                return Err(Failure::Verify("girth exceeds a Moore bound".into()));
            }
        }
        AuditCmd::Girth { input, ell } => {
            let g = read_hypergraph(input)?;
            let girth = graph_girth(&g)?;
            let c = ihara_moore_certificate(&g, *ell)?;
            println!("girth {}", girth.map_or("inf".to_string(), |g| g.to_string()));
            println!("psd-margin {:e} {}", c.margin, if c.pass { "pass" } else { "fail" });
            if girth.is_none_or(|g| g > *ell) && !c.pass {
                return Err(Failure::Verify("girth exceeds l but the PSD certificate fails".into()));
            }
        }
        AuditCmd::Trace { input, r, ell, caps } => {
            let h = read_hypergraph(input)?;
            let ell = ell.unwrap_or_else(|| theorem_ell(h.n() as u64, *r as u64));
            let a = trace_audit(&h, *r, ell, (*caps).into())?;
            println!("ell {ell}");
            println!("trace {}", format_rational(&a.trace));
            println!("bound {}", format_rational(&a.bound.displayed));
            println!("bound-binomial {}", format_rational(&a.bound.tight));
            println!("{}", if a.holds() { "within" } else { "exceeds" });
        }
    }
    Ok(())
}

fn configure_threads(flag: Option<usize>) {
    let env = std::env::var("KCERT_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = env.or(flag).filter(|&n| n > 0) {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Cover(c) => cover(c),
        Command::Decompose(a) => decompose(a),
        Command::Kikuchi(k) => kikuchi(k),
        Command::Refute(a) => refute_cmd(a),
        Command::VerifyCert { instance, certificate } => verify_cert(instance, certificate),
        Command::Audit(a) => audit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => ExitCode::from(EXIT_CAPACITY),
                Error::Certificate(_) => ExitCode::from(EXIT_VERIFY),
                _ => ExitCode::FAILURE,
            }
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
