//! Refutation certificates for k-XOR instances.
//!
//! Even `k`: `psi(x) = x^T A_b x / (N d)` on the lifted assignment, and
//! `A_b <= lambda Gamma` gives `psi <= lambda tr(Gamma) / (N d) = 2 lambda`.
//!
//! Odd `k`: the instance is split by the refutation decomposition into levels
//! `psi = (1/k) sum_t psi_t` with `psi_t = (k/m) sum_i x_{U_i} Y_i` and
//! `Y_i = sum_{C in H_i} b_C x_{C~}`. Cauchy-Schwarz gives
//! `psi_t^2 <= (k^2 p_t / m^2) (m_t + sum_{C != C'} b_C b_C' x_{C xor C'})`,
//! and the pair sum equals `x^T A^_b x / (2 kappa)` on the colored Kikuchi
//! graph after deletion and equalization, which is at most
//! `lambda tr(Gamma^) / (2 kappa)`. Each level also has the trivial bound
//! `psi_t <= k m_t / m`, and the smaller of the two is used.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, ceil, format_rational, parse_rational, rational_from_f64, rational_int, sqrt_upper};
use crate::decomposition::{decompose_for_refutation, RangePolicy};
use crate::error::{Error, Result};
use crate::generate::rng_from_seed;
use crate::hypergraph::{Assignment, XorInstance};
use crate::io::instance_digest;
use crate::kikuchi_even::{build_even_kikuchi, lift_assignment, Caps};
use crate::kikuchi_odd::{
    build_colored_kikuchi, delete_heavy_edges, equalize_deletion, measured_caps,
    predicted_deletion_fraction, ColoredKikuchiGraph, DeletionResult, Eta,
};
use crate::spectral::{spectral_norm_reweighted, LanczosOptions, WeightedOperator};

mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
    }
}

mod opt_rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`"))))
            .transpose()
    }
}

mod eta_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(e: &Option<Eta>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match e {
            Some(e) => s.serialize_some(&e.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Eta>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| super::parse_eta(&s).ok_or_else(|| serde::de::Error::custom(format!("bad eta `{s}`"))))
            .transpose()
    }
}

pub fn parse_eta(s: &str) -> Option<Eta> {
    match s {
        "inf" => Some(Eta::Unbounded),
        _ => s.parse().ok().filter(|&x| x >= 1).map(Eta::Finite),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub lambda: f64,
    pub residual: f64,
    pub lambda_cert: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvenRecord {
    pub vertices: usize,
    pub edges: usize,
    pub alpha: String,
    #[serde(with = "rational_str")]
    pub d: BigRational,
    #[serde(with = "rational_str")]
    pub gamma_trace: BigRational,
    pub spectral: Option<SpectralRecord>,
    /// `lambda_cert tr(Gamma) / (N d)`.
    #[serde(with = "opt_rational_str")]
    pub spectral_bound: Option<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// No clauses at this level.
    Empty,
    /// Only singleton groups: the pair sum vanishes.
    FirstTerm,
    Spectral,
    /// Fallback `k m_t / m`.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub t: usize,
    /// `p_t`.
    pub groups: usize,
    /// `m_t`.
    pub clauses: usize,
    pub tau: u64,
    /// `p_t tau_t <= 2m`.
    pub density_ok: bool,
    pub ordered_pairs: usize,
    pub vertices: usize,
    /// Measured edges per ordered pair before deletion.
    pub alpha: u64,
    pub alpha_closed_form: String,
    pub kappa: Option<u64>,
    #[serde(with = "rational_str")]
    pub rho: BigRational,
    #[serde(with = "rational_str")]
    pub max_pair_deletion: BigRational,
    #[serde(with = "rational_str")]
    pub predicted_deletion: BigRational,
    pub surviving_edges: usize,
    #[serde(with = "rational_str")]
    pub d: BigRational,
    #[serde(with = "rational_str")]
    pub gamma_trace: BigRational,
    pub spectral: Option<SpectralRecord>,
    /// `k^2 p_t m_t / m^2`.
    #[serde(with = "rational_str")]
    pub first_term: BigRational,
    /// Upper bound on `(k^2 p_t / m^2) sum_{C != C'} b_C b_C' x_{C xor C'}`.
    #[serde(with = "opt_rational_str")]
    pub f_hat_bound: Option<BigRational>,
    #[serde(with = "opt_rational_str")]
    pub spectral_bound: Option<BigRational>,
    #[serde(with = "rational_str")]
    pub trivial_bound: BigRational,
    #[serde(with = "rational_str")]
    pub psi_bound: BigRational,
    pub source: BoundSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub digest: String,
    pub mode: Parity,
    pub n: u32,
    pub k: usize,
    pub m: usize,
    pub r: usize,
    #[serde(with = "opt_rational_str")]
    pub eps: Option<BigRational>,
    #[serde(with = "eta_str")]
    pub eta: Option<Eta>,
    /// `2 ceil(r log2 n)`, recorded for the trace audits only.
    pub ell: u32,
    pub seed: u64,
    pub relaxed_range: bool,
    pub even: Option<EvenRecord>,
    pub levels: Vec<LevelRecord>,
    #[serde(with = "rational_str")]
    pub certified_bound: BigRational,
}

impl RefutationCertificate {
    /// Canonical JSON: keys sorted, rationals as `p/q` strings.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("certificate serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Certificate(format!("malformed certificate: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefuteOptions {
    pub r: usize,
    /// Required for odd `k`.
    pub eps: Option<BigRational>,
    /// Odd `k`; defaults to `max{1, ceil(4^k / eps^2)}`.
    pub eta: Option<Eta>,
    pub policy: RangePolicy,
    pub caps: Caps,
    pub seed: u64,
    pub lanczos: LanczosOptions,
}

impl RefuteOptions {
    pub fn new(r: usize, seed: u64) -> Self {
        RefuteOptions {
            r,
            eps: None,
            eta: None,
            policy: RangePolicy::Strict,
            caps: Caps::default(),
            seed,
            lanczos: LanczosOptions { seed, ..LanczosOptions::default() },
        }
    }
}

pub fn default_eta(k: usize, eps: &BigRational) -> Eta {
    let x = ceil(&(rational_int(num_traits::pow(BigInt::from(4), k)) / (eps * eps)));
    Eta::Finite(x.to_u64().unwrap_or(u64::MAX).max(1))
}

fn spectral_record(op: &WeightedOperator, opts: LanczosOptions) -> Result<SpectralRecord> {
    let s = spectral_norm_reweighted(op, opts)?;
    Ok(SpectralRecord {
        lambda: s.lambda,
        residual: s.residual,
        lambda_cert: s.lambda_cert,
        iterations: s.iterations,
    })
}

pub fn refute(inst: &XorInstance, opts: &RefuteOptions) -> Result<RefutationCertificate> {
    if inst.k().is_multiple_of(2) {
        refute_even(inst, opts)
    } else {
        refute_odd(inst, opts)
    }
}

/// `min(lambda_cert tr(Gamma) / (N d), 1)`; the first term collapses to `2 lambda_cert`.
pub fn even_bound(spectral_bound: Option<&BigRational>) -> BigRational {
    match spectral_bound {
        Some(b) => b.clone().min(BigRational::one()),
        None => BigRational::one(),
    }
}

pub fn refute_even(inst: &XorInstance, opts: &RefuteOptions) -> Result<RefutationCertificate> {
    let (n, k, m) = (inst.n(), inst.k(), inst.m());
    if k % 2 == 1 {
        return Err(Error::Arity(format!("k = {k} is odd; use the odd refutation")));
    }
    if m == 0 {
        return Err(Error::EmptyInstance);
    }
    let g = build_even_kikuchi(inst.hypergraph(), opts.r, opts.caps)?;
    let nv = g.num_vertices();
    let d = g.avg_degree();
    let gamma_trace = g.gamma_trace();
    let alpha = g.alpha();
    let num_edges = g.edges().len();
    let (spectral, spectral_bound) = if num_edges == 0 {
        (None, None)
    } else {
        let df = crate::combinatorics::to_f64(&d);
        let gamma: Vec<f64> = g.degrees().iter().map(|&x| x as f64 + df).collect();
        let sg = g.signed(inst)?;
        let entries: Vec<(usize, usize, f64)> = sg
            .graph
            .edges()
            .iter()
            .zip(&sg.edge_signs)
            .map(|(e, &b)| (e.s as usize, e.t as usize, b as f64))
            .collect();
        let op = WeightedOperator::new(nv, &entries, &gamma)?;
        let rec = spectral_record(&op, opts.lanczos)?;
        let bound = rational_from_f64(rec.lambda_cert) * &gamma_trace
            / (rational_int(BigInt::from(nv)) * &d);
        (Some(rec), Some(bound))
    };
    let certified_bound = even_bound(spectral_bound.as_ref());
    Ok(RefutationCertificate {
        digest: instance_digest(inst),
        mode: Parity::Even,
        n,
        k,
        m,
        r: opts.r,
        eps: opts.eps.clone(),
        eta: None,
        ell: crate::spectral::theorem_ell(n as u64, opts.r as u64),
        seed: opts.seed,
        relaxed_range: opts.policy == RangePolicy::Relaxed,
        even: Some(EvenRecord {
            vertices: nv,
            edges: num_edges,
            alpha: alpha.to_string(),
            d,
            gamma_trace,
            spectral,
            spectral_bound,
        }),
        levels: Vec::new(),
        certified_bound,
    })
}

/// Exact tail of the odd chain for one level, from the recorded spectral value.
pub struct LevelChain {
    pub first_term: BigRational,
    pub f_hat_bound: Option<BigRational>,
    pub spectral_bound: Option<BigRational>,
    pub trivial_bound: BigRational,
    pub psi_bound: BigRational,
}

/// Inputs: `p_t`, `m_t`, and, when the level has a usable Kikuchi graph,
/// `(lambda_cert, tr(Gamma^), kappa)`.
pub fn level_chain(k: usize, m: usize, groups: usize, clauses: usize, spectral: Option<(f64, &BigRational, u64)>, has_pairs: bool) -> LevelChain {
    let kk = rational_int(BigInt::from(k * k));
    let m2 = rational_int(BigInt::from(m) * BigInt::from(m));
    let coeff = kk * rational_int(BigInt::from(groups)) / m2;
    let first_term = &coeff * rational_int(BigInt::from(clauses));
    let trivial_bound = BigRational::new(BigInt::from(k * clauses), BigInt::from(m));
    let f_hat_bound = match (has_pairs, spectral) {
        (false, _) => Some(BigRational::zero()),
        (true, Some((lambda_cert, gamma_trace, kappa))) if kappa > 0 => {
            let pair_sum = rational_from_f64(lambda_cert) * gamma_trace
                / rational_int(BigInt::from(2 * kappa));
            Some(&coeff * pair_sum)
        }
        _ => None,
    };
    let spectral_bound = f_hat_bound.as_ref().map(|f| sqrt_upper(&(&first_term + f)));
    let psi_bound = match &spectral_bound {
        Some(s) => s.clone().min(trivial_bound.clone()),
        None => trivial_bound.clone(),
    };
    LevelChain {
        first_term,
        f_hat_bound,
        spectral_bound,
        trivial_bound,
        psi_bound,
    }
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn surviving_operator(
    g: &ColoredKikuchiGraph,
    del: &DeletionResult,
    signs: &[i8],
) -> Result<(WeightedOperator, BigRational, BigRational)> {
    let nv = g.num_vertices();
    let mut deg = vec![0u32; nv];
    for &i in &del.survivors {
        let e = g.edges()[i];
        deg[e.s as usize] += 1;
        deg[e.t as usize] += 1;
    }
    let ne = del.survivors.len();
    let d = BigRational::new(BigInt::from(2 * ne), BigInt::from(nv));
    let df = crate::combinatorics::to_f64(&d);
    let gamma: Vec<f64> = deg.iter().map(|&x| x as f64 + df).collect();
    let entries: Vec<(usize, usize, f64)> = del
        .survivors
        .iter()
        .map(|&i| {
            let e = g.edges()[i];
            (e.s as usize, e.t as usize, signs[i] as f64)
        })
        .collect();
    let op = WeightedOperator::new(nv, &entries, &gamma)?;
    Ok((op, d, rational_int(BigInt::from(4 * ne))))
}

struct OddLevel {
    record: LevelRecord,
    graph: Option<(ColoredKikuchiGraph, DeletionResult)>,
}

fn odd_level(
    inst: &XorInstance,
    d: &crate::decomposition::Decomposition,
    t: usize,
    eta: Eta,
    opts: &RefuteOptions,
    lanczos: LanczosOptions,
) -> Result<OddLevel> {
    let (n, k, m) = (inst.n(), inst.k(), inst.m());
    let groups = d.groups(t);
    let p_t = groups.len();
    let m_t = d.clause_count(t);
    let tau = d.threshold(t);
    let ordered_pairs: usize = groups.iter().map(|g| g.len() * g.len().saturating_sub(1)).sum();
    let mut record = LevelRecord {
        t,
        groups: p_t,
        clauses: m_t,
        tau,
        density_ok: BigInt::from(p_t) * BigInt::from(tau) <= BigInt::from(2 * m),
        ordered_pairs,
        vertices: binomial(2 * n as u64, opts.r as u64).unwrap_or(u128::MAX).min(usize::MAX as u128) as usize,
        alpha: 0,
        alpha_closed_form: crate::kikuchi_odd::closed_form_alpha(n, k, t, opts.r).to_string(),
        kappa: None,
        rho: BigRational::zero(),
        max_pair_deletion: BigRational::zero(),
        predicted_deletion: BigRational::zero(),
        surviving_edges: 0,
        d: BigRational::zero(),
        gamma_trace: BigRational::zero(),
        spectral: None,
        first_term: BigRational::zero(),
        f_hat_bound: None,
        spectral_bound: None,
        trivial_bound: BigRational::zero(),
        psi_bound: BigRational::zero(),
        source: BoundSource::Empty,
    };
    if m_t == 0 {
        return Ok(OddLevel { record, graph: None });
    }
    let clauses: Vec<usize> = groups.iter().flat_map(|g| g.clause_indices.iter().copied()).collect();
    record.predicted_deletion =
        predicted_deletion_fraction(k, t, n, opts.r, eta, &measured_caps(inst.hypergraph(), &clauses));
    if ordered_pairs == 0 {
        let chain = level_chain(k, m, p_t, m_t, None, false);
        apply_chain(&mut record, chain, BoundSource::FirstTerm);
        return Ok(OddLevel { record, graph: None });
    }
    let g = build_colored_kikuchi(inst.hypergraph(), groups, opts.r, opts.caps)?;
    let pre = delete_heavy_edges(&g, eta);
    let del = equalize_deletion(&g, &pre);
    record.alpha = g.alpha();
    record.kappa = del.kappa;
    record.rho = del.rho.clone();
    record.max_pair_deletion = pre.max_pair_deletion_fraction();
    record.surviving_edges = del.survivors.len();
    let usable = !del.degenerate() && del.rho <= half();
    let mut spectral = None;
    if usable {
        let signs = g.edge_signs(inst);
        let (op, dd, gamma_trace) = surviving_operator(&g, &del, &signs)?;
        let rec = spectral_record(&op, lanczos)?;
        record.d = dd;
        record.gamma_trace = gamma_trace;
        spectral = Some(rec.lambda_cert);
        record.spectral = Some(rec);
    }
    let chain = level_chain(
        k,
        m,
        p_t,
        m_t,
        spectral.map(|l| (l, &record.gamma_trace, del.kappa.unwrap_or(0))),
        true,
    );
    let source = if chain.spectral_bound.as_ref().is_some_and(|s| *s <= chain.trivial_bound) {
        BoundSource::Spectral
    } else {
        BoundSource::Trivial
    };
    apply_chain(&mut record, chain, source);
    Ok(OddLevel { record, graph: Some((g, del)) })
}

fn apply_chain(record: &mut LevelRecord, chain: LevelChain, source: BoundSource) {
    record.first_term = chain.first_term;
    record.f_hat_bound = chain.f_hat_bound;
    record.spectral_bound = chain.spectral_bound;
    record.trivial_bound = chain.trivial_bound;
    record.psi_bound = chain.psi_bound;
    record.source = source;
}

fn odd_levels(inst: &XorInstance, opts: &RefuteOptions, lanczos: LanczosOptions) -> Result<(Eta, Vec<OddLevel>)> {
    let k = inst.k();
    let eps = opts
        .eps
        .as_ref()
        .ok_or_else(|| Error::Parameter("odd refutation needs eps".into()))?;
    let eta = opts.eta.unwrap_or_else(|| default_eta(k, eps));
    let r = u32::try_from(opts.r).map_err(|_| Error::Parameter("r too large".into()))?;
    let d = decompose_for_refutation(inst.hypergraph(), r, eps, opts.policy)?;
    let levels: Result<Vec<OddLevel>> = (1..k)
        .into_par_iter()
        .map(|t| odd_level(inst, &d, t, eta, opts, lanczos))
        .collect();
    Ok((eta, levels?))
}

pub fn refute_odd(inst: &XorInstance, opts: &RefuteOptions) -> Result<RefutationCertificate> {
    let (n, k, m) = (inst.n(), inst.k(), inst.m());
    if k % 2 == 0 {
        return Err(Error::Arity(format!("k = {k} is even; use the even refutation")));
    }
    if m == 0 {
        return Err(Error::EmptyInstance);
    }
    let (eta, levels) = odd_levels(inst, opts, opts.lanczos)?;
    let levels: Vec<LevelRecord> = levels.into_iter().map(|l| l.record).collect();
    let certified_bound = odd_bound(k, &levels);
    Ok(RefutationCertificate {
        digest: instance_digest(inst),
        mode: Parity::Odd,
        n,
        k,
        m,
        r: opts.r,
        eps: opts.eps.clone(),
        eta: Some(eta),
        ell: crate::spectral::theorem_ell(n as u64, opts.r as u64),
        seed: opts.seed,
        relaxed_range: opts.policy == RangePolicy::Relaxed,
        even: None,
        levels,
        certified_bound,
    })
}

/// `(1/k) sum_t psi_t bound`.
pub fn odd_bound(k: usize, levels: &[LevelRecord]) -> BigRational {
    let total: BigRational = levels.iter().map(|l| l.psi_bound.clone()).sum();
    total / rational_int(BigInt::from(k))
}

/// Outcome of an independent recheck.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond {
            self.failures.push(what());
        }
    }
}

/// Seed for the independent spectral recomputation.
fn verify_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

const LAMBDA_TOL: f64 = 1e-6;

fn check_spectral(rep: &mut VerifyReport, label: &str, recorded: &Option<SpectralRecord>, fresh: &Option<SpectralRecord>) {
    match (recorded, fresh) {
        (None, None) => {}
        (Some(a), Some(b)) => {
            rep.check((a.lambda - b.lambda).abs() <= LAMBDA_TOL * b.lambda.max(1.0), || {
                format!("{label}: lambda {} differs from recomputed {}", a.lambda, b.lambda)
            });
            rep.check(a.lambda_cert >= a.lambda + a.residual, || {
                format!("{label}: lambda_cert {} below lambda + residual", a.lambda_cert)
            });
            // a Ritz value never exceeds the norm, so it is a floor for any valid lambda_cert
            rep.check(a.lambda_cert >= b.lambda - 1e-12 * b.lambda.max(1.0), || {
                format!("{label}: lambda_cert {} below recomputed Ritz value {}", a.lambda_cert, b.lambda)
            });
        }
        _ => rep.failures.push(format!("{label}: spectral record presence differs")),
    }
}

pub fn verify_certificate(inst: &XorInstance, cert: &RefutationCertificate) -> Result<bool> {
    Ok(verify_certificate_report(inst, cert)?.ok())
}

/// Rebuilds every object from the instance and the recorded parameters,
/// recomputes the spectral norms with an independent seed, and rechecks the
/// exact arithmetic from the recorded `lambda_cert` values.
pub fn verify_certificate_report(inst: &XorInstance, cert: &RefutationCertificate) -> Result<VerifyReport> {
    let digest = instance_digest(inst);
    if digest != cert.digest {
        return Err(Error::Certificate(format!(
            "digest mismatch: certificate {}, instance {digest}",
            cert.digest
        )));
    }
    let mut rep = VerifyReport::default();
    let parity = if inst.k().is_multiple_of(2) { Parity::Even } else { Parity::Odd };
    rep.check(cert.mode == parity, || "mode does not match k".into());
    rep.check(cert.n == inst.n() && cert.k == inst.k() && cert.m == inst.m(), || {
        "n, k, m do not match the instance".into()
    });
    rep.check(!cert.certified_bound.is_negative(), || "negative certified bound".into());
    if !rep.ok() {
        return Ok(rep);
    }
    let mut opts = RefuteOptions::new(cert.r, cert.seed);
    opts.eps = cert.eps.clone();
    opts.eta = cert.eta;
    opts.policy = if cert.relaxed_range { RangePolicy::Relaxed } else { RangePolicy::Strict };
    let lanczos = LanczosOptions { seed: verify_seed(cert.seed), ..LanczosOptions::default() };
    opts.lanczos = lanczos;
    rep.check(cert.ell == crate::spectral::theorem_ell(cert.n as u64, cert.r as u64), || "ell".into());
    match parity {
        Parity::Even => verify_even(inst, cert, &opts, &mut rep)?,
        Parity::Odd => verify_odd(inst, cert, &opts, &mut rep)?,
    }
    Ok(rep)
}

fn verify_even(inst: &XorInstance, cert: &RefutationCertificate, opts: &RefuteOptions, rep: &mut VerifyReport) -> Result<()> {
    let fresh = refute_even(inst, opts)?;
    let (Some(a), Some(b)) = (&cert.even, &fresh.even) else {
        rep.failures.push("missing even record".into());
        return Ok(());
    };
    rep.check(a.vertices == b.vertices && a.edges == b.edges && a.alpha == b.alpha, || {
        "Kikuchi graph size differs".into()
    });
    rep.check(a.d == b.d, || format!("d recorded {} recomputed {}", a.d, b.d));
    rep.check(a.gamma_trace == b.gamma_trace, || "tr(Gamma) differs".into());
    // tr(Gamma) = 2 N d
    rep.check(
        a.edges == 0 || a.gamma_trace == rational_int(BigInt::from(2 * a.vertices)) * &a.d,
        || "tr(Gamma) != 2 N d".into(),
    );
    check_spectral(rep, "even", &a.spectral, &b.spectral);
    let expect = a.spectral.as_ref().map(|s| {
        rational_from_f64(s.lambda_cert) * &a.gamma_trace / (rational_int(BigInt::from(a.vertices)) * &a.d)
    });
    rep.check(expect == a.spectral_bound, || "spectral bound does not follow from lambda_cert".into());
    if let Some(sb) = &a.spectral_bound {
        let two = rational_from_f64(a.spectral.as_ref().unwrap().lambda_cert) * rational_int(2);
        rep.check(*sb == two, || "spectral bound != 2 lambda_cert".into());
    }
    rep.check(cert.certified_bound == even_bound(a.spectral_bound.as_ref()), || {
        "certified bound does not follow from the spectral bound".into()
    });
    Ok(())
}

fn verify_odd(inst: &XorInstance, cert: &RefutationCertificate, opts: &RefuteOptions, rep: &mut VerifyReport) -> Result<()> {
    let (eta, fresh) = odd_levels(inst, opts, opts.lanczos)?;
    rep.check(cert.eta == Some(eta), || "eta differs".into());
    if cert.levels.len() != fresh.len() {
        rep.failures.push("level count differs".into());
        return Ok(());
    }
    let (k, m) = (inst.k(), inst.m());
    let mut rng = rng_from_seed(verify_seed(cert.seed));
    for (a, f) in cert.levels.iter().zip(&fresh) {
        let b = &f.record;
        let t = a.t;
        let same = a.t == b.t
            && a.groups == b.groups
            && a.clauses == b.clauses
            && a.tau == b.tau
            && a.density_ok == b.density_ok
            && a.ordered_pairs == b.ordered_pairs
            && a.vertices == b.vertices
            && a.alpha == b.alpha
            && a.alpha_closed_form == b.alpha_closed_form
            && a.kappa == b.kappa
            && a.max_pair_deletion == b.max_pair_deletion
            && a.predicted_deletion == b.predicted_deletion
            && a.surviving_edges == b.surviving_edges
            && a.d == b.d
            && a.gamma_trace == b.gamma_trace;
        rep.check(same, || format!("level {t}: structural fields differ from recomputation"));
        rep.check(a.rho == b.rho, || format!("level {t}: rho {} recomputed {}", a.rho, b.rho));
        // the equalization identity with the recorded rho
        if let Some((g, del)) = &f.graph {
            let signs = g.edge_signs(inst);
            let all: Vec<usize> = (0..g.edges().len()).collect();
            let one_minus = BigRational::one() - &a.rho;
            for _ in 0..3 {
                let x = Assignment::new((0..inst.n()).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())?;
                let lifted = lift_assignment(&x, 2 * inst.n(), g.r());
                let full = rational_int(g.quadratic_form(&signs, &all, &lifted));
                let kept = rational_int(g.quadratic_form(&signs, &del.survivors, &lifted));
                rep.check(&one_minus * full == kept, || {
                    format!("level {t}: equalization identity fails with recorded rho")
                });
            }
        }
        check_spectral(rep, &format!("level {t}"), &a.spectral, &b.spectral);
        let has_pairs = a.ordered_pairs > 0;
        let chain = level_chain(
            k,
            m,
            a.groups,
            a.clauses,
            a.spectral.as_ref().map(|s| (s.lambda_cert, &a.gamma_trace, a.kappa.unwrap_or(0))),
            has_pairs,
        );
        if a.clauses > 0 {
            rep.check(
                chain.first_term == a.first_term
                    && chain.f_hat_bound == a.f_hat_bound
                    && chain.spectral_bound == a.spectral_bound
                    && chain.trivial_bound == a.trivial_bound
                    && chain.psi_bound == a.psi_bound,
                || format!("level {t}: bound chain does not recompute"),
            );
        } else {
            rep.check(a.psi_bound.is_zero(), || format!("level {t}: empty level with nonzero bound"));
        }
    }
    rep.check(cert.certified_bound == odd_bound(k, &cert.levels), || {
        "certified bound is not (1/k) sum of level bounds".into()
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rational;
    use crate::generate::{random_xor, EdgeMode};
    use crate::hypergraph::Hypergraph;
    use crate::oracle::brute_force_max_xor;

    fn xor(n: u32, k: usize, e: &[&[u32]], signs: &[i8]) -> XorInstance {
        let h = Hypergraph::from_one_based(n, k, &e.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap();
        XorInstance::new(h, signs.to_vec()).unwrap()
    }

    #[test]
    fn single_clause_even() {
        let inst = xor(2, 2, &[&[1, 2]], &[1]);
        let c = refute_even(&inst, &RefuteOptions::new(1, 0)).unwrap();
        let e = c.even.as_ref().unwrap();
        assert_eq!(e.vertices, 2);
        assert_eq!(e.d, rational(1, 1));
        assert_eq!(e.gamma_trace, rational(4, 1));
        assert!((e.spectral.as_ref().unwrap().lambda - 0.5).abs() < 1e-12);
        assert_eq!(c.certified_bound, rational(1, 1));
        assert!(verify_certificate(&inst, &c).unwrap());
    }

    #[test]
    fn contradictory_pair_is_sound() {
        let inst = xor(2, 2, &[&[1, 2], &[1, 2]], &[1, -1]);
        let c = refute_even(&inst, &RefuteOptions::new(1, 0)).unwrap();
        assert!(c.certified_bound >= BigRational::zero());
        assert!(c.certified_bound >= brute_force_max_xor(&inst).unwrap());
    }

    #[test]
    fn even_collapse_to_two_lambda() {
        let inst = random_xor(10, 4, 120, 2, EdgeMode::WithoutReplacement).unwrap();
        let c = refute_even(&inst, &RefuteOptions::new(2, 2)).unwrap();
        let e = c.even.as_ref().unwrap();
        let lc = rational_from_f64(e.spectral.as_ref().unwrap().lambda_cert);
        assert_eq!(e.spectral_bound.clone().unwrap(), lc * rational(2, 1));
        assert!(c.certified_bound >= brute_force_max_xor(&inst).unwrap());
        assert!(verify_certificate(&inst, &c).unwrap());
    }

    fn odd_opts(r: usize, seed: u64) -> RefuteOptions {
        let mut o = RefuteOptions::new(r, seed);
        o.eps = Some(rational(9, 20));
        o.policy = RangePolicy::Relaxed;
        o
    }

    #[test]
    fn odd_random_sound() {
        let inst = random_xor(10, 3, 60, 9, EdgeMode::WithoutReplacement).unwrap();
        let c = refute_odd(&inst, &odd_opts(2, 9)).unwrap();
        assert!(c.certified_bound >= brute_force_max_xor(&inst).unwrap());
        assert!(verify_certificate(&inst, &c).unwrap());
    }

    #[test]
    fn singleton_groups_use_first_term() {
        // pairwise disjoint minimum vertices: every level-1 group is a singleton
        let inst = xor(9, 3, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]], &[1, -1, 1]);
        let c = refute_odd(&inst, &odd_opts(2, 0)).unwrap();
        let l1 = &c.levels[0];
        assert_eq!(l1.source, BoundSource::FirstTerm);
        assert_eq!((l1.groups, l1.clauses), (3, 3));
        // k sqrt(p m_1) / m = 3 * 3 / 3, capped by the trivial bound 3
        assert_eq!(l1.psi_bound, rational(3, 1));
        assert_eq!(c.certified_bound, rational(1, 1));
    }

    #[test]
    fn strict_range_rejected() {
        let inst = random_xor(12, 3, 20, 1, EdgeMode::WithoutReplacement).unwrap();
        let mut o = odd_opts(6, 0);
        o.policy = RangePolicy::Strict;
        assert!(matches!(refute_odd(&inst, &o), Err(Error::Parameter(_))));
    }

    #[test]
    fn tampering_detected() {
        let inst = random_xor(10, 4, 120, 2, EdgeMode::WithoutReplacement).unwrap();
        let c = refute_even(&inst, &RefuteOptions::new(2, 2)).unwrap();
        let mut low = c.clone();
        let s = low.even.as_mut().unwrap().spectral.as_mut().unwrap();
        s.lambda_cert *= 0.9;
        assert!(!verify_certificate(&inst, &low).unwrap());

        let inst = random_xor(10, 3, 70, 3, EdgeMode::WithoutReplacement).unwrap();
        let mut o = odd_opts(2, 3);
        o.eta = Some(Eta::Finite(2));
        let c = refute_odd(&inst, &o).unwrap();
        assert!(verify_certificate(&inst, &c).unwrap());
        let mut bad = c.clone();
        let lvl = bad.levels.iter_mut().find(|l| l.alpha > 0).unwrap();
        lvl.rho += rational(1, 7);
        assert!(!verify_certificate(&inst, &bad).unwrap());

        let other = random_xor(10, 3, 70, 4, EdgeMode::WithoutReplacement).unwrap();
        assert!(matches!(verify_certificate(&other, &c), Err(Error::Certificate(_))));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let inst = random_xor(9, 3, 40, 5, EdgeMode::WithoutReplacement).unwrap();
        let c = refute_odd(&inst, &odd_opts(2, 5)).unwrap();
        let text = c.to_canonical_json();
        let back = RefutationCertificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_canonical_json(), text);
        let again = refute_odd(&inst, &odd_opts(2, 5)).unwrap();
        assert_eq!(again.to_canonical_json(), text);
        assert!(text.find("\"certified_bound\"").unwrap() < text.find("\"digest\"").unwrap());
    }
}
