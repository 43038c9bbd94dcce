//! Exact oracles: minimum even cover by exhaustive F2 search, graph girth by
//! BFS, and the maximum XOR value by scanning all assignments.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{EvenCover, Hypergraph, XorInstance};

/// Largest edge count searched by plain enumeration.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 30;
/// Largest edge count searched by meet-in-the-middle.
pub const MITM_EDGE_LIMIT: usize = 44;
/// Largest variable count for [`brute_force_max_xor`].
pub const BRUTE_FORCE_VAR_LIMIT: u32 = 24;

/// Images of the edges under an injective linear map from their span into
/// `F2^rank`, so that a subset sums to zero iff its images do.
fn compress_edges(h: &Hypergraph) -> (Vec<u64>, usize) {
    let words = (h.n() as usize).div_ceil(64);
    // basis rows: (pivot bit, reduced vector, image)
    let mut basis: Vec<(usize, Vec<u64>, u64)> = Vec::new();
    let mut images = Vec::with_capacity(h.m());
    for e in h.edges() {
        let mut v = vec![0u64; words];
        for &x in e {
            v[x as usize / 64] ^= 1 << (x % 64);
        }
        let mut image = 0u64;
        for (pivot, b, img) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (a, bb) in v.iter_mut().zip(b) {
                    *a ^= bb;
                }
                image ^= img;
            }
        }
        match v.iter().position(|&w| w != 0) {
            None => images.push(image),
            Some(w) => {
                let pivot = w * 64 + v[w].trailing_zeros() as usize;
                let q = basis.len();
                // new independent edge maps to a fresh unit vector
                basis.push((pivot, v, image ^ (1u64 << q)));
                images.push(1u64 << q);
            }
        }
    }
    let rank = basis.len();
    (images, rank)
}

/// Minimum nonempty even cover of size at most `size_cap`, searched
/// exhaustively. Returns `None` when no such cover exists. Errors when
/// `m` exceeds [`MITM_EDGE_LIMIT`].
pub fn min_even_cover_oracle(h: &Hypergraph, size_cap: usize) -> Result<Option<(usize, EvenCover)>> {
    let m = h.m();
    if m > MITM_EDGE_LIMIT {
        return Err(Error::Capacity(format!(
            "even-cover oracle handles at most {MITM_EDGE_LIMIT} edges, got m = {m}"
        )));
    }
    let (images, rank) = compress_edges(h);
    if rank == m || size_cap == 0 {
        return Ok(None);
    }
    let found = if m <= EXHAUSTIVE_EDGE_LIMIT {
        smallest_zero_subset(&images, size_cap.min(rank + 1))
    } else {
        mitm_zero_subset(&images)
    };
    Ok(found
        .filter(|s| s.len() <= size_cap)
        .map(|s| (s.len(), EvenCover::new(s))))
}

/// Plain enumeration of subsets in increasing size, lexicographic within a size.
pub fn smallest_zero_subset(images: &[u64], max_size: usize) -> Option<Vec<usize>> {
    fn dfs(
        images: &[u64],
        start: usize,
        remaining: usize,
        acc: u64,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if remaining == 0 {
            return acc == 0;
        }
        for i in start..=images.len() - remaining {
            chosen.push(i);
            if dfs(images, i + 1, remaining - 1, acc ^ images[i], chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let max_size = max_size.min(images.len());
    for size in 1..=max_size {
        let mut chosen = Vec::with_capacity(size);
        if dfs(images, 0, size, 0, &mut chosen) {
            return Some(chosen);
        }
    }
    None
}

/// Meet-in-the-middle search for the smallest nonempty zero-sum subset.
pub fn mitm_zero_subset(images: &[u64]) -> Option<Vec<usize>> {
    let m = images.len();
    let a = m / 2;
    let b = m - a;
    let (left, right) = images.split_at(a);

    // best (size, mask) per left vector; a separate slot for the best nonempty zero
    let mut table: HashMap<u64, (u32, u64)> = HashMap::with_capacity(1 << a.min(24));
    let mut nonempty_zero: Option<(u32, u64)> = None;
    let mut sums = vec![0u64; 1 << a];
    for mask in 0u64..(1 << a) {
        if mask != 0 {
            let low = mask.trailing_zeros() as usize;
            sums[mask as usize] = sums[(mask & (mask - 1)) as usize] ^ left[low];
        }
        let v = sums[mask as usize];
        let size = mask.count_ones();
        let slot = table.entry(v).or_insert((size, mask));
        if size < slot.0 {
            *slot = (size, mask);
        }
        if v == 0 && mask != 0 && nonempty_zero.is_none_or(|(s, _)| size < s) {
            nonempty_zero = Some((size, mask));
        }
    }
    drop(sums);

    let mut best: Option<(u32, u64, u64)> = None;
    let mut acc = 0u64;
    let mut prev_gray = 0u64;
    for step in 0u64..(1 << b) {
        let gray = step ^ (step >> 1);
        if step != 0 {
            let flipped = (gray ^ prev_gray).trailing_zeros() as usize;
            acc ^= right[flipped];
        }
        prev_gray = gray;
        let rsize = gray.count_ones();
        let entry = if gray == 0 {
            nonempty_zero
        } else {
            table.get(&acc).copied()
        };
        if let Some((lsize, lmask)) = entry {
            let total = lsize + rsize;
            let better = match best {
                None => true,
                Some((s, bl, br)) => total < s || (total == s && (lmask, gray) < (bl, br)),
            };
            if better {
                best = Some((total, lmask, gray));
            }
        }
    }
    best.map(|(_, lmask, rmask)| {
        let mut out: Vec<usize> = (0..a).filter(|i| lmask >> i & 1 == 1).collect();
        out.extend((0..b).filter(|i| rmask >> i & 1 == 1).map(|i| i + a));
        out
    })
}

/// Exact girth of a graph (`k = 2`); `None` for forests. A repeated edge
/// gives girth 2.
pub fn graph_girth(g: &Hypergraph) -> Result<Option<usize>> {
    if g.k() != 2 {
        return Err(Error::Arity(format!("girth needs k = 2, got k = {}", g.k())));
    }
    if g.has_duplicate_edges() {
        return Ok(Some(2));
    }
    let n = g.n() as usize;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, e) in g.edges().iter().enumerate() {
        adj[e[0] as usize].push((e[1] as usize, id));
        adj[e[1] as usize].push((e[0] as usize, id));
    }
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut touched = Vec::new();
    for root in 0..n {
        for &v in &touched {
            dist[v] = usize::MAX;
            parent_edge[v] = usize::MAX;
        }
        touched.clear();
        dist[root] = 0;
        touched.push(root);
        let mut queue = VecDeque::from([root]);
        'bfs: while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &(w, id) in &adj[u] {
                if id == parent_edge[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent_edge[w] = id;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                    if best == 3 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 3 {
            break;
        }
    }
    Ok((best != usize::MAX).then_some(best))
}

/// Maximum of `sum_C b_C x_C` over all assignments, as an integer.
pub fn brute_force_max_xor_sum(inst: &XorInstance) -> Result<i64> {
    let n = inst.n();
    if n > BRUTE_FORCE_VAR_LIMIT {
        return Err(Error::Capacity(format!(
            "exhaustive XOR scan handles n <= {BRUTE_FORCE_VAR_LIMIT}, got n = {n}"
        )));
    }
    let h = inst.hypergraph();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
    for (c, e) in h.edges().iter().enumerate() {
        for &v in e {
            incident[v as usize].push(c);
        }
    }
    let high = n.saturating_sub(12).min(8);
    let low = n - high;
    let scan = |prefix: u64| -> i64 {
        // clause values x_C under the starting assignment prefix << low
        let start = prefix << low;
        let mut values: Vec<i8> = h
            .edges()
            .iter()
            .map(|e| {
                e.iter()
                    .fold(1i8, |a, &v| if start >> v & 1 == 1 { -a } else { a })
            })
            .collect();
        let mut sum: i64 = values
            .iter()
            .zip(inst.signs())
            .map(|(&x, &b)| (x * b) as i64)
            .sum();
        let mut best = sum;
        for step in 1u64..(1 << low) {
            let v = step.trailing_zeros() as usize;
            for &c in &incident[v] {
                sum -= 2 * (values[c] * inst.signs()[c]) as i64;
                values[c] = -values[c];
            }
            best = best.max(sum);
        }
        best
    };
    Ok((0u64..(1 << high))
        .into_par_iter()
        .map(scan)
        .max()
        .unwrap_or(0))
}

/// `max_x psi(x)` over all `2^n` assignments, exactly.
pub fn brute_force_max_xor(inst: &XorInstance) -> Result<BigRational> {
    if inst.m() == 0 {
        return Err(Error::EmptyInstance);
    }
    let s = brute_force_max_xor_sum(inst)?;
    Ok(BigRational::new(BigInt::from(s), BigInt::from(inst.m())))
}
