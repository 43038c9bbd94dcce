//! One test per acceptance criterion; each prints a single pass/fail line.

use std::time::{Duration, Instant};

use kcert_core::combinatorics::rational;
use kcert_core::decomposition::{
    decompose_for_cover, decompose_for_refutation, validate_decomposition, Group, RangePolicy,
};
use kcert_core::generate::{random_cycle_union, random_graph, random_hypergraph, random_xor, EdgeMode};
use kcert_core::generate::{cycle, heawood, petersen, rng_from_seed};
use kcert_core::kikuchi_even::{build_even_kikuchi, lift_assignment, shortest_even_cover_via_kikuchi, trace_audit, Caps};
use kcert_core::kikuchi_odd::{
    build_colored_kikuchi, delete_heavy_edges, equalize_deletion, measured_caps, predicted_deletion_fraction,
    reduce_large_intersection, Eta,
};
use kcert_core::moore::{ihara_moore_certificate, moore_bound_audit, nb_direct_count, nb_matrices, quotient_remainder_check};
use kcert_core::oracle::{brute_force_max_xor, graph_girth, min_even_cover_oracle};
use kcert_core::refuter::{refute, RefuteOptions};
use kcert_core::{verify_even_cover, Assignment, Hypergraph};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

fn report(id: u32, name: &str, start: Instant, budget: Duration, failures: &[String]) {
    let elapsed = start.elapsed();
    let within = elapsed <= budget;
    let ok = failures.is_empty() && within;
    println!(
        "criterion {id:>2} {name}: {} ({:.1}s of {}s budget{})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if failures.is_empty() { String::new() } else { format!("; {} failure(s)", failures.len()) }
    );
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
    assert!(within, "criterion {id} exceeded its budget: {elapsed:?}");
}

#[test]
fn criterion_01_soundness_sweep() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_from_seed(101);
    for i in 0..200u64 {
        let k = [2usize, 3, 4, 5][i as usize % 4];
        let n: u32 = rng.random_range(k as u32 + 2..=12);
        let m: usize = rng.random_range(1..=80);
        let r = rng.random_range(1..=3usize).max(k / 2).min(n as usize);
        let inst = random_xor(n, k, m, 1000 + i, EdgeMode::WithReplacement).unwrap();
        let mut opts = RefuteOptions::new(r, i);
        if k % 2 == 1 {
            opts.eps = Some(rational(1, 4));
            opts.policy = RangePolicy::Relaxed;
        }
        let cert = match refute(&inst, &opts) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("instance {i} (n={n} k={k} m={m} r={r}): {e}"));
                continue;
            }
        };
        let truth = brute_force_max_xor(&inst).unwrap();
        if cert.certified_bound < truth {
            failures.push(format!(
                "instance {i}: certified {} < true optimum {}",
                cert.certified_bound, truth
            ));
        }
    }
    report(1, "soundness sweep", start, Duration::from_secs(600), &failures);
}

/// `||Gamma^{-1/2} A Gamma^{-1/2}||` by dense eigendecomposition.
fn reweighted_norm_dense(g: &Hypergraph) -> (f64, f64) {
    let n = g.n() as usize;
    let d = 2.0 * g.m() as f64 / n as f64;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut deg = vec![0.0; n];
    for e in g.edges() {
        let (u, v) = (e[0] as usize, e[1] as usize);
        a[(u, v)] += 1.0;
        a[(v, u)] += 1.0;
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    let s: Vec<f64> = deg.iter().map(|x| 1.0 / (x + d).sqrt()).collect();
    let w = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * s[i] * s[j]);
    let eig = kcert_core::spectral::dense_eigenvalues(w);
    let norm = eig.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    (norm, d)
}

#[test]
fn criterion_02_reweighted_norm_under_girth() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checks = 0;
    for i in 0..50u64 {
        let n = 20 + 4 * i as u32;
        let g = if i % 2 == 0 {
            random_graph(n, (n as usize * 6) / 5, i).unwrap()
        } else {
            random_cycle_union(n, 2, i)
        };
        let girth = graph_girth(&g).unwrap();
        let (norm, d) = reweighted_norm_dense(&g);
        // forests: every even l is below the girth; check up to 16
        let top = girth.map_or(16, |x| x - 1);
        for ell in (2..=top).step_by(2) {
            checks += 1;
            let bound = 2.0 * (n as f64).powf(1.0 / ell as f64) / d.sqrt();
            if norm >= bound + 1e-8 {
                failures.push(format!("graph {i} (girth {girth:?}) l={ell}: norm {norm} >= {bound}"));
            }
        }
    }
    assert!(checks >= 50);
    report(2, "reweighted norm below 2 n^(1/l)/sqrt(d)", start, Duration::from_secs(120), &failures);
}

#[test]
fn criterion_03_trace_bound_on_cover_free() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut found = 0;
    let mut seed = 0u64;
    while found < 30 && seed < 5000 {
        seed += 1;
        let (k, n, m, r, ell) = match seed % 3 {
            0 => (2usize, 12u32, 12usize, 1usize, 4u32),
            1 => (4, 10, 6, 2, 4),
            _ => (4, 9, 5, 3, 6),
        };
        let ell = if seed.is_multiple_of(5) { ell + 2 } else { ell };
        let h = random_hypergraph(n, k, m, seed, EdgeMode::WithoutReplacement).unwrap();
        if min_even_cover_oracle(&h, ell as usize).unwrap().is_some() {
            continue;
        }
        let nv = build_even_kikuchi(&h, r, Caps::default()).unwrap().num_vertices();
        if nv > 2000 {
            continue;
        }
        found += 1;
        match trace_audit(&h, r, ell, Caps::default()) {
            Ok(a) if a.holds() => {}
            Ok(a) => failures.push(format!("seed {seed}: trace {} > bound {}", a.trace, a.bound.displayed)),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    if found < 30 {
        failures.push(format!("only {found} cover-free hypergraphs generated"));
    }
    report(3, "exact trace within walk bound on cover-free hypergraphs", start, Duration::from_secs(300), &failures);
}

#[test]
fn criterion_04_non_backtracking_machinery() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..30u64 {
        let n = 6 + (i % 7) as u32;
        let max_m = (n * (n - 1) / 2) as usize;
        let g = random_graph(n, (n as usize + i as usize % 9).min(max_m), 400 + i).unwrap();
        let seq = nb_matrices(&g, 6).unwrap();
        for s in 0..=6 {
            if nb_direct_count(&g, s).unwrap() != *seq.get(s) {
                failures.push(format!("graph {i}: recurrence differs from enumeration at s={s}"));
            }
        }
    }
    let mut named: Vec<(String, Hypergraph)> = (5..=12).map(|c| (format!("C{c}"), cycle(c))).collect();
    named.push(("Petersen".into(), petersen()));
    named.push(("Heawood".into(), heawood()));
    for (name, g) in &named {
        let girth = graph_girth(g).unwrap().unwrap();
        for ell in (2..girth).filter(|l| l % 2 == 0) {
            let c = ihara_moore_certificate(g, ell).unwrap();
            if !c.pass {
                failures.push(format!("{name} l={ell}: PSD margin {}", c.margin));
            }
        }
    }
    for i in 0..20u64 {
        let g = random_graph(15, 30, 700 + i).unwrap();
        let seq = nb_matrices(&g, 6).unwrap();
        for s in 1..=6 {
            for k in 1..=s {
                let q = quotient_remainder_check(&seq, s, k).unwrap();
                if !q.holds() {
                    failures.push(format!("graph {i} s={s} k={k}: {} > {}", q.lhs, q.rhs));
                }
            }
        }
    }
    report(4, "non-backtracking matrices and Moore certificate", start, Duration::from_secs(120), &failures);
}

#[test]
fn criterion_05_moore_bound_audit() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..100u64 {
        let n = 50 + 19 * i as u32;
        let g = match i % 3 {
            0 => random_cycle_union(n, 2 + (i as usize % 4), i),
            1 => random_graph(n, n as usize * (2 + i as usize % 5), i).unwrap(),
            _ => random_graph(n, n as usize * 12, i).unwrap(),
        };
        let a = moore_bound_audit(&g).unwrap();
        if a.exact_bound.is_none() {
            failures.push(format!("graph {i}: average degree {} not above 2", a.d));
            continue;
        }
        if !a.exact_ok() || !a.weak_ok() {
            failures.push(format!(
                "graph {i}: girth {:?} exceeds bounds {:?}/{:?}",
                a.girth, a.exact_bound, a.weak_bound
            ));
        }
    }
    report(5, "Moore girth bounds", start, Duration::from_secs(120), &failures);
}

#[test]
fn criterion_06_deletion_process() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_from_seed(606);
    let mut levels_checked = 0;
    for i in 0..50u64 {
        let (k, n, m, r) = if i % 2 == 0 { (3usize, 12u32, 60usize, 3usize) } else { (5, 10, 40, 4) };
        let inst = random_xor(n, k, m, 6000 + i, EdgeMode::WithoutReplacement).unwrap();
        let h = inst.hypergraph();
        let d = decompose_for_refutation(h, r as u32, &rational(1, 4), RangePolicy::Relaxed).unwrap();
        let eta = [Eta::Finite(1), Eta::Finite(2), Eta::Finite(4), Eta::Finite(16)][i as usize / 2 % 4];
        for t in 1..k {
            let groups = d.groups(t);
            if groups.iter().all(|g| g.len() < 2) {
                continue;
            }
            let g = build_colored_kikuchi(h, groups, r, Caps::default()).unwrap();
            if g.edges().is_empty() {
                continue;
            }
            levels_checked += 1;
            let pre = delete_heavy_edges(&g, eta);
            let clauses: Vec<usize> = groups.iter().flat_map(|g| g.clause_indices.iter().copied()).collect();
            let predicted = predicted_deletion_fraction(k, t, n, r, eta, &measured_caps(h, &clauses));
            let measured = pre.max_pair_deletion_fraction();
            if measured > predicted {
                failures.push(format!("instance {i} level {t}: deleted {measured} > predicted {predicted}"));
            }
            let del = equalize_deletion(&g, &pre);
            let signs = g.edge_signs(&inst);
            let all: Vec<usize> = (0..g.edges().len()).collect();
            let keep = BigRational::one() - &del.rho;
            for _ in 0..20 {
                let x = Assignment::new((0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()).unwrap();
                let lifted = lift_assignment(&x, 2 * n, r);
                let full = BigRational::from_integer(g.quadratic_form(&signs, &all, &lifted));
                let kept = BigRational::from_integer(g.quadratic_form(&signs, &del.survivors, &lifted));
                if kept != &keep * &full {
                    failures.push(format!("instance {i} level {t}: {kept} != (1 - {}) * {full}", del.rho));
                }
            }
        }
    }
    if levels_checked < 50 {
        failures.push(format!("only {levels_checked} levels exercised"));
    }
    report(6, "deletion fraction and equalization identity", start, Duration::from_secs(300), &failures);
}

#[test]
fn criterion_07_even_refutation_strength() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut good = 0;
    let mut bounds = Vec::new();
    for seed in 0..10u64 {
        let inst = random_xor(200, 2, 8000, seed, EdgeMode::WithoutReplacement).unwrap();
        let cert = refute(&inst, &RefuteOptions::new(1, seed)).unwrap();
        let b = kcert_core::combinatorics::to_f64(&cert.certified_bound);
        bounds.push(format!("{b:.3}"));
        if cert.certified_bound <= rational(1, 2) {
            good += 1;
        }
    }
    if good < 9 {
        failures.push(format!("only {good}/10 bounds at most 1/2: {bounds:?}"));
    }
    println!("    bounds {}", bounds.join(" "));
    report(7, "even-mode refutation strength", start, Duration::from_secs(60), &failures);
}

#[test]
fn criterion_08_decomposition_postconditions() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut dense_checked = 0;
    for i in 0..100u64 {
        let k = if i % 2 == 0 { 3 } else { 5 };
        let (n, r) = if k == 3 { (64u32, 6 + (i % 3) as u32) } else { (96, 10 + (i % 2) as u32) };
        // every tenth refute-mode k = 3 instance meets the density precondition m >= n tau_1;
        // tau_1 = ceil(sqrt(64/6)) * ceil(12 / (1/4)^2) = 4 * 192 at r = 6
        let dense = k == 3 && i % 4 == 2 && i % 10 == 2;
        let m = if dense { 64 * 4 * 192 + 100 } else { 40 + (i as usize * 7) % 160 };
        let r = if dense { 6 } else { r };
        let h = random_hypergraph(n, k, m, 800 + i, EdgeMode::WithReplacement).unwrap();
        let d = if i % 4 < 2 {
            decompose_for_cover(&h, r).unwrap()
        } else {
            decompose_for_refutation(&h, r, &rational(1, 4), RangePolicy::Strict).unwrap()
        };
        let rep = validate_decomposition(&h, &d);
        if !rep.violations.is_empty() {
            failures.push(format!("instance {i} ({}): {}", d.mode.as_str(), rep.violations[0]));
        }
        // p_t tau_t <= 2m: automatic for t >= 2; level 1 holds greedy groups (p tau <= m_1)
        // plus at most n leftover parts, so it needs m >= n tau_1
        let tau1 = d.threshold(1) as u128;
        for (&level, &ok) in &rep.density_ok {
            let applies = level >= 2 || m as u128 >= n as u128 * tau1;
            if applies && !ok {
                failures.push(format!("instance {i} ({}): level {level} too many groups", d.mode.as_str()));
            }
            dense_checked += usize::from(applies && level == 1);
        }
    }
    if dense_checked == 0 {
        failures.push("density precondition never met".into());
    }
    report(8, "decomposition postconditions", start, Duration::from_secs(120), &failures);
}

/// Smallest nonempty zero-sum subset by scanning all masks; `None` if none.
fn exhaustive_min_cover(h: &Hypergraph) -> Option<usize> {
    let vecs: Vec<u128> = h.edges().iter().map(|e| e.iter().fold(0u128, |a, &v| a | 1 << v)).collect();
    let m = vecs.len();
    (1u64..1 << m)
        .filter(|mask| {
            let mut x = 0u128;
            for (j, v) in vecs.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    x ^= v;
                }
            }
            x == 0
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

/// Groups whose clauses pairwise meet exactly in a one-vertex center.
fn sunflowers(n: u32, groups: usize, petals: usize, seed: u64) -> (Hypergraph, Vec<Group>) {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    let mut out = Vec::new();
    for _ in 0..groups {
        let pool: Vec<u32> = rand::seq::index::sample(&mut rng, n as usize, 1 + 2 * petals)
            .into_iter()
            .map(|v| v as u32)
            .collect();
        let center = pool[0];
        let mut idx = Vec::new();
        for p in 0..petals {
            let mut e = vec![center, pool[1 + 2 * p], pool[2 + 2 * p]];
            e.sort_unstable();
            idx.push(edges.len());
            edges.push(e);
        }
        out.push(Group { level: 1, center: vec![center], clause_indices: idx });
    }
    (Hypergraph::new(n, 3, edges).unwrap(), out)
}

#[test]
fn criterion_09_emitted_covers_verify() {
    let start = Instant::now();
    let mut failures = Vec::new();
    // oracle, with minimality against an independent scan
    for i in 0..40u64 {
        let (k, n) = if i % 2 == 0 { (2usize, 8u32) } else { (3, 7) };
        let m = 6 + (i as usize % 15);
        let h = random_hypergraph(n, k, m, 900 + i, EdgeMode::WithReplacement).unwrap();
        let got = min_even_cover_oracle(&h, m).unwrap();
        if let Some((size, c)) = &got {
            if !verify_even_cover(&h, c).unwrap() || c.len() != *size {
                failures.push(format!("oracle cover {i} does not verify"));
            }
        }
        let scan = exhaustive_min_cover(&h);
        if got.as_ref().map(|g| g.0) != scan {
            failures.push(format!("oracle {i}: {:?} but exhaustive scan gives {scan:?}", got.map(|g| g.0)));
        }
    }
    // Kikuchi walks
    let mut walks = 0;
    for i in 0..30u64 {
        let (k, n, m, r) = if i % 2 == 0 { (2usize, 12u32, 14usize, 1usize) } else { (4, 10, 12, 2) };
        let h = random_hypergraph(n, k, m, 950 + i, EdgeMode::WithoutReplacement).unwrap();
        if let Some(w) = shortest_even_cover_via_kikuchi(&h, r, Caps::default()).unwrap() {
            walks += 1;
            if w.cover.is_empty() || !verify_even_cover(&h, &w.cover).unwrap() {
                failures.push(format!("Kikuchi cover {i} does not verify"));
            }
        }
    }
    // large-intersection reduction
    let mut lifted = 0;
    for i in 0..30u64 {
        let (h, groups) = sunflowers(9, 4, 3, 990 + i);
        let red = reduce_large_intersection(&h, &groups).unwrap();
        if let Some((_, c)) = min_even_cover_oracle(&red.hypergraph, red.hypergraph.m()).unwrap() {
            let back = red.back_map(&c).unwrap();
            if back.is_empty() {
                continue;
            }
            lifted += 1;
            if !verify_even_cover(&h, &back).unwrap() {
                failures.push(format!("back-mapped cover {i} does not verify"));
            }
        }
    }
    if walks == 0 || lifted == 0 {
        failures.push(format!("paths not exercised: {walks} walks, {lifted} back-maps"));
    }
    report(9, "every emitted cover verifies", start, Duration::from_secs(180), &failures);
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let even = random_xor(14, 4, 60, 10, EdgeMode::WithoutReplacement).unwrap();
    let odd = random_xor(12, 3, 50, 11, EdgeMode::WithoutReplacement).unwrap();
    let mut odd_opts = RefuteOptions::new(3, 7);
    odd_opts.eps = Some(rational(1, 4));
    odd_opts.eta = Some(Eta::Finite(2));
    odd_opts.policy = RangePolicy::Relaxed;
    let runs = [(&even, RefuteOptions::new(2, 5)), (&odd, odd_opts)];
    for (inst, opts) in &runs {
        let a = refute(inst, opts).unwrap().to_canonical_json();
        let b = refute(inst, opts).unwrap().to_canonical_json();
        let c = single.install(|| refute(inst, opts).unwrap().to_canonical_json());
        if a != b || a != c {
            failures.push(format!("k={} certificate not byte-identical", inst.k()));
        }
    }
    let dump = || build_even_kikuchi(even.hypergraph(), 2, Caps::default()).unwrap().dump();
    if dump() != single.install(dump) {
        failures.push("even dump differs".into());
    }
    let d = decompose_for_refutation(odd.hypergraph(), 3, &rational(1, 4), RangePolicy::Relaxed).unwrap();
    let odd_dump = || build_colored_kikuchi(odd.hypergraph(), d.groups(1), 3, Caps::default()).unwrap().dump();
    if odd_dump() != single.install(odd_dump) {
        failures.push("colored dump differs".into());
    }
    let g1 = random_xor(12, 3, 50, 11, EdgeMode::WithoutReplacement).unwrap();
    if g1 != odd {
        failures.push("generator not deterministic".into());
    }
    report(10, "determinism", start, Duration::from_secs(120), &failures);
}
