//! Greedy partition of a hypergraph into groups of clauses sharing a common
//! center set, level by level from `t = k - 1` down to `t = 1`.
//!
//! Cover mode uses group size `max{2, ceil((n/r)^(k/2 - t))}` and sends the
//! remaining clauses to level 0. Refute mode uses
//! `tau_t = max{1, ceil((n/r)^(k/2 - t))} * ceil(4k / eps^2)` and splits the
//! remaining clauses by their smallest vertex into level-1 groups.
//!
//! Ties are broken deterministically: the lexicographically smallest
//! qualifying center is taken first, and a group takes the earliest clause
//! indices containing it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::{ceil, ceil_pow_half, combinations, rational_int};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecompositionMode {
    Cover,
    Refute,
}

impl DecompositionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecompositionMode::Cover => "cover",
            DecompositionMode::Refute => "refute",
        }
    }
}

/// Whether the `2k <= r <= n/8` range of the refutation decomposition is
/// enforced. `Relaxed` only asks `1 <= r <= n`, for desk-scale experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RangePolicy {
    #[default]
    Strict,
    Relaxed,
}

/// Clauses sharing a center set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    pub level: usize,
    pub center: Vec<u32>,
    pub clause_indices: Vec<usize>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.clause_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clause_indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub mode: DecompositionMode,
    pub n: u32,
    pub k: usize,
    pub m: usize,
    pub r: u32,
    pub eps: Option<BigRational>,
    /// Group-size threshold per level; index 0 is unused. Saturates at
    /// `u64::MAX` when the threshold does not fit.
    pub thresholds: Vec<u64>,
    /// Level -> groups. Cover mode uses levels `0..k`, refute mode `1..k`.
    pub levels: BTreeMap<usize, Vec<Group>>,
}

impl Decomposition {
    pub fn groups(&self, level: usize) -> &[Group] {
        self.levels.get(&level).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of groups at a level (`p_t`).
    pub fn group_count(&self, level: usize) -> usize {
        self.groups(level).len()
    }

    /// Number of clauses at a level (`m_t`).
    pub fn clause_count(&self, level: usize) -> usize {
        self.groups(level).iter().map(Group::len).sum()
    }

    pub fn threshold(&self, level: usize) -> u64 {
        self.thresholds.get(level).copied().unwrap_or(0)
    }

    pub fn all_groups(&self) -> impl Iterator<Item = &Group> {
        self.levels.values().flatten()
    }

    /// The clauses of one level as a hypergraph with the same vertex set.
    pub fn level_hypergraph(&self, h: &Hypergraph, level: usize) -> Hypergraph {
        let idx: Vec<usize> = self
            .groups(level)
            .iter()
            .flat_map(|g| g.clause_indices.iter().copied())
            .collect();
        h.select(&idx).expect("decomposition indices are valid")
    }
}

fn to_u64_saturating(x: &BigInt) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

/// `ceil((n/r)^(k/2 - t))`, computed exactly.
pub fn ceil_density_power(n: u32, r: u32, k: usize, t: usize) -> BigInt {
    let base = BigRational::new(BigInt::from(n), BigInt::from(r));
    ceil_pow_half(&base, k as i32 - 2 * t as i32)
}

/// Cover-mode group size at level `t`: `max{2, ceil((n/r)^(k/2 - t))}`.
pub fn cover_threshold(n: u32, r: u32, k: usize, t: usize) -> u64 {
    to_u64_saturating(&ceil_density_power(n, r, k, t).max(BigInt::from(2)))
}

/// Cover-mode intersection cap for sets of size `j`: `max{1, ceil((n/r)^(k/2 - j))}`.
pub fn cover_cap(n: u32, r: u32, k: usize, j: usize) -> u64 {
    to_u64_saturating(&ceil_density_power(n, r, k, j).max(BigInt::one()))
}

/// `ceil(4k / eps^2)`.
pub fn refute_multiplier(k: usize, eps: &BigRational) -> BigInt {
    ceil(&(rational_int(4 * k as i64) / (eps * eps)))
}

/// Refute-mode threshold `tau_t = max{1, ceil((n/r)^(k/2 - t))} * ceil(4k/eps^2)`.
pub fn refute_threshold(n: u32, r: u32, k: usize, t: usize, eps: &BigRational) -> u64 {
    let base = ceil_density_power(n, r, k, t).max(BigInt::one());
    to_u64_saturating(&(base * refute_multiplier(k, eps)))
}

/// Extracts groups of exactly `size` clauses around size-`t` centers, always
/// taking the lexicographically smallest qualifying center.
fn greedy_level(h: &Hypergraph, current: &mut BTreeSet<usize>, t: usize, size: u64) -> Vec<Group> {
    let mut containing: BTreeMap<Vec<u32>, BTreeSet<usize>> = BTreeMap::new();
    for &c in current.iter() {
        for u in combinations(h.edge(c), t) {
            containing.entry(u).or_default().insert(c);
        }
    }
    let mut groups = Vec::new();
    if size == 0 || size == u64::MAX {
        return groups;
    }
    let size = size as usize;
    // counts only decrease, so a center that stops qualifying never returns
    let keys: Vec<Vec<u32>> = containing
        .iter()
        .filter(|(_, s)| s.len() >= size)
        .map(|(k, _)| k.clone())
        .collect();
    for center in keys {
        while containing.get(&center).is_some_and(|s| s.len() >= size) {
            let taken: Vec<usize> = containing[&center].iter().take(size).copied().collect();
            for &c in &taken {
                current.remove(&c);
                for u in combinations(h.edge(c), t) {
                    if let Some(s) = containing.get_mut(&u) {
                        s.remove(&c);
                    }
                }
            }
            groups.push(Group {
                level: t,
                center: center.clone(),
                clause_indices: taken,
            });
        }
    }
    groups
}

fn check_r(h: &Hypergraph, r: u32) -> Result<()> {
    if r < 1 || r > h.n() {
        return Err(Error::Parameter(format!(
            "r = {r} must satisfy 1 <= r <= n = {}",
            h.n()
        )));
    }
    Ok(())
}

/// Even-cover decomposition into levels `k-1, ..., 1` plus leftovers at level 0.
pub fn decompose_for_cover(h: &Hypergraph, r: u32) -> Result<Decomposition> {
    check_r(h, r)?;
    let (n, k) = (h.n(), h.k());
    let mut thresholds = vec![0u64; k.max(1)];
    let mut current: BTreeSet<usize> = (0..h.m()).collect();
    let mut levels = BTreeMap::new();
    for t in (1..k).rev() {
        let size = cover_threshold(n, r, k, t);
        thresholds[t] = size;
        let groups = greedy_level(h, &mut current, t, size);
        levels.insert(t, groups);
    }
    let leftover = if current.is_empty() {
        Vec::new()
    } else {
        vec![Group {
            level: 0,
            center: Vec::new(),
            clause_indices: current.into_iter().collect(),
        }]
    };
    levels.insert(0, leftover);
    Ok(Decomposition {
        mode: DecompositionMode::Cover,
        n,
        k,
        m: h.m(),
        r,
        eps: None,
        thresholds,
        levels,
    })
}

/// Refutation decomposition: greedy levels `k-1, ..., 1` with thresholds
/// `tau_t`, then every remaining clause joins the level-1 group centered at
/// its smallest vertex.
pub fn decompose_for_refutation(
    h: &Hypergraph,
    r: u32,
    eps: &BigRational,
    policy: RangePolicy,
) -> Result<Decomposition> {
    let (n, k) = (h.n(), h.k());
    if k < 2 {
        return Err(Error::Parameter("refutation decomposition needs k >= 2".into()));
    }
    if !eps.is_positive() || *eps >= BigRational::new(1.into(), 2.into()) {
        return Err(Error::Parameter(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    match policy {
        RangePolicy::Strict => {
            if (r as usize) < 2 * k || 8 * r > n {
                return Err(Error::Parameter(format!(
                    "r = {r} must satisfy 2k = {} <= r <= n/8 = {}",
                    2 * k,
                    n as f64 / 8.0
                )));
            }
        }
        RangePolicy::Relaxed => check_r(h, r)?,
    }
    let mut thresholds = vec![0u64; k];
    let mut current: BTreeSet<usize> = (0..h.m()).collect();
    let mut levels = BTreeMap::new();
    for t in (1..k).rev() {
        let size = refute_threshold(n, r, k, t, eps);
        thresholds[t] = size;
        levels.insert(t, greedy_level(h, &mut current, t, size));
    }
    let mut parts: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for c in current {
        parts.entry(h.edge(c)[0]).or_default().push(c);
    }
    let level1 = levels.get_mut(&1).expect("level 1 exists for k >= 2");
    for (v, clauses) in parts {
        level1.push(Group {
            level: 1,
            center: vec![v],
            clause_indices: clauses,
        });
    }
    Ok(Decomposition {
        mode: DecompositionMode::Refute,
        n,
        k,
        m: h.m(),
        r,
        eps: Some(eps.clone()),
        thresholds,
        levels,
    })
}

/// One failed check, with enough context to locate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ClauseIndexOutOfRange { level: usize, group: usize, clause: usize },
    ClauseMissing { clause: usize },
    ClauseRepeated { clause: usize },
    WrongLevel { level: usize, group: usize, recorded: usize },
    CenterSize { level: usize, group: usize, size: usize },
    CenterNotContained { level: usize, group: usize, clause: usize },
    GroupSize { level: usize, group: usize, size: usize, rule: String },
    IntersectionCap { level: usize, set: Vec<u32>, count: usize, cap: u64 },
    UnexpectedLevel { level: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ClauseIndexOutOfRange { level, group, clause } => {
                write!(f, "level {level} group {group}: clause index {clause} out of range")
            }
            Violation::ClauseMissing { clause } => write!(f, "clause {clause} is in no group"),
            Violation::ClauseRepeated { clause } => {
                write!(f, "clause {clause} appears in more than one group")
            }
            Violation::WrongLevel { level, group, recorded } => {
                write!(f, "level {level} group {group} records level {recorded}")
            }
            Violation::CenterSize { level, group, size } => {
                write!(f, "level {level} group {group}: center has size {size}")
            }
            Violation::CenterNotContained { level, group, clause } => write!(
                f,
                "level {level} group {group}: clause {clause} does not contain the center"
            ),
            Violation::GroupSize { level, group, size, rule } => {
                write!(f, "level {level} group {group}: size {size} breaks rule {rule}")
            }
            Violation::IntersectionCap { level, set, count, cap } => write!(
                f,
                "level {level}: set {set:?} lies in {count} clauses, cap is {cap}"
            ),
            Violation::UnexpectedLevel { level } => write!(f, "unexpected level {level}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `p_t * tau_t <= 2m` per refute-mode level; informational only.
    pub density_ok: BTreeMap<usize, bool>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the partition property, group sizes, center containment, and the
/// intersection caps of every level by exhaustive subset counting.
pub fn validate_decomposition(h: &Hypergraph, d: &Decomposition) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let k = h.k();
    let mut seen = vec![0usize; h.m()];
    for (&level, groups) in &d.levels {
        let level_ok = match d.mode {
            DecompositionMode::Cover => level < k.max(1),
            DecompositionMode::Refute => level >= 1 && level < k,
        };
        if !level_ok {
            v.push(Violation::UnexpectedLevel { level });
        }
        for (gi, g) in groups.iter().enumerate() {
            if g.level != level {
                v.push(Violation::WrongLevel { level, group: gi, recorded: g.level });
            }
            if g.center.len() != level {
                v.push(Violation::CenterSize { level, group: gi, size: g.center.len() });
            }
            for &c in &g.clause_indices {
                if c >= h.m() {
                    v.push(Violation::ClauseIndexOutOfRange { level, group: gi, clause: c });
                    continue;
                }
                seen[c] += 1;
                let e = h.edge(c);
                if !g.center.iter().all(|x| e.binary_search(x).is_ok()) {
                    v.push(Violation::CenterNotContained { level, group: gi, clause: c });
                }
            }
            let size = g.len();
            let threshold = d.threshold(level);
            let size_ok = match (d.mode, level) {
                (DecompositionMode::Cover, 0) => size >= 1,
                (DecompositionMode::Cover, _) => size as u64 == threshold,
                (DecompositionMode::Refute, 1) => size >= 1 && size as u64 <= threshold,
                (DecompositionMode::Refute, _) => size as u64 == threshold,
            };
            if !size_ok {
                let rule = match (d.mode, level) {
                    (DecompositionMode::Cover, 0) => "leftover group nonempty".to_string(),
                    (DecompositionMode::Refute, 1) => format!("1 <= size <= {threshold}"),
                    _ => format!("size == {threshold}"),
                };
                v.push(Violation::GroupSize { level, group: gi, size, rule });
            }
        }
    }
    for (c, &count) in seen.iter().enumerate() {
        match count {
            0 => v.push(Violation::ClauseMissing { clause: c }),
            1 => {}
            _ => v.push(Violation::ClauseRepeated { clause: c }),
        }
    }
    // intersection caps: sets of size j in (level, k) inside a level's clauses
    for (&level, groups) in &d.levels {
        let clauses: Vec<usize> = groups
            .iter()
            .flat_map(|g| g.clause_indices.iter().copied())
            .filter(|&c| c < h.m())
            .collect();
        for j in level + 1..k {
            let cap = match d.mode {
                DecompositionMode::Cover => cover_cap(d.n, d.r, k, j),
                DecompositionMode::Refute => d.threshold(j).saturating_sub(1),
            };
            let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
            for &c in &clauses {
                for u in combinations(h.edge(c), j) {
                    *counts.entry(u).or_default() += 1;
                }
            }
            let mut worst: Vec<(Vec<u32>, usize)> = counts
                .into_iter()
                .filter(|(_, n)| *n as u64 > cap)
                .collect();
            worst.sort();
            for (set, count) in worst {
                v.push(Violation::IntersectionCap { level, set, count, cap });
            }
        }
    }
    if d.mode == DecompositionMode::Refute {
        for t in 1..k {
            let lhs = BigInt::from(d.group_count(t)) * BigInt::from(d.threshold(t));
            report
                .density_ok
                .insert(t, lhs <= BigInt::from(2 * d.m) || d.group_count(t).is_zero());
        }
    }
    report
}
