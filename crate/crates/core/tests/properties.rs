use kcert_core::combinatorics::{binomial, rational};
use kcert_core::decomposition::{decompose_for_cover, validate_decomposition, RangePolicy};
use kcert_core::generate::{random_graph, random_hypergraph, random_xor, EdgeMode};
use kcert_core::io::{hypergraph_to_string, parse_hypergraph, parse_xor, xor_to_string};
use kcert_core::kikuchi_even::{shortest_even_cover_via_kikuchi, Caps};
use kcert_core::moore::{nb_direct_count, nb_matrices};
use kcert_core::oracle::brute_force_max_xor;
use kcert_core::refuter::{refute, verify_certificate, RefutationCertificate, RefuteOptions};
use kcert_core::{verify_even_cover, Hypergraph, XorInstance};
use proptest::prelude::*;

fn mode(with: bool) -> EdgeMode {
    if with {
        EdgeMode::WithReplacement
    } else {
        EdgeMode::WithoutReplacement
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn text_formats_round_trip(n in 5u32..14, k in 1usize..5, m in 0usize..20, seed: u64, with: bool) {
        let m = m.min(binomial(n as u64, k as u64).unwrap() as usize);
        let h = random_hypergraph(n, k, m, seed, mode(with)).unwrap();
        prop_assert_eq!(parse_hypergraph(&hypergraph_to_string(&h)).unwrap(), h);
        let x = random_xor(n, k, m, seed, mode(with)).unwrap();
        prop_assert_eq!(parse_xor(&xor_to_string(&x)).unwrap(), x);
    }

    #[test]
    fn refutation_is_sound_and_verifies(n in 5u32..10, k in 2usize..5, m in 1usize..40, r in 1usize..3, seed: u64) {
        let inst = random_xor(n, k, m, seed, EdgeMode::WithReplacement).unwrap();
        let mut opts = RefuteOptions::new(r.max(k / 2), seed);
        if k % 2 == 1 {
            opts.eps = Some(rational(1, 4));
            opts.policy = RangePolicy::Relaxed;
        }
        let cert = refute(&inst, &opts).unwrap();
        prop_assert!(cert.certified_bound >= brute_force_max_xor(&inst).unwrap());
        prop_assert!(verify_certificate(&inst, &cert).unwrap());
        let text = cert.to_canonical_json();
        prop_assert_eq!(RefutationCertificate::from_json(&text).unwrap(), cert);
    }

    #[test]
    fn kikuchi_covers_verify(n in 6u32..11, m in 3usize..14, seed: u64, four: bool) {
        let (k, r) = if four { (4, 2) } else { (2, 1) };
        let h = random_hypergraph(n, k, m, seed, EdgeMode::WithReplacement).unwrap();
        if let Some(w) = shortest_even_cover_via_kikuchi(&h, r, Caps::default()).unwrap() {
            prop_assert!(!w.cover.is_empty());
            prop_assert!(verify_even_cover(&h, &w.cover).unwrap());
        }
    }

    #[test]
    fn cover_decomposition_validates(n in 8u32..20, k in 2usize..5, m in 0usize..60, r in 1u32..6, seed: u64) {
        let h = random_hypergraph(n, k, m, seed, EdgeMode::WithReplacement).unwrap();
        let d = decompose_for_cover(&h, r.min(n)).unwrap();
        let rep = validate_decomposition(&h, &d);
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn non_backtracking_recurrence(n in 3u32..10, extra in 0usize..8, seed: u64) {
        let m = ((n - 1) as usize + extra).min((n * (n - 1) / 2) as usize);
        let g = random_graph(n, m, seed).unwrap();
        let seq = nb_matrices(&g, 5).unwrap();
        for s in 0..=5 {
            prop_assert_eq!(&nb_direct_count(&g, s).unwrap(), seq.get(s));
        }
    }

    #[test]
    fn duplicated_clauses_stay_sound(n in 5u32..9, k in 2usize..4, m in 1usize..15, seed: u64) {
        let inst = random_xor(n, k, m, seed, EdgeMode::WithReplacement).unwrap();
        let h = inst.hypergraph();
        let mut edges = h.edges().to_vec();
        edges.extend_from_slice(h.edges());
        let mut signs = inst.signs().to_vec();
        signs.extend_from_slice(inst.signs());
        let doubled = XorInstance::new(Hypergraph::new(n, k, edges).unwrap(), signs).unwrap();
        prop_assert_eq!(brute_force_max_xor(&doubled).unwrap(), brute_force_max_xor(&inst).unwrap());
        let mut opts = RefuteOptions::new(k / 2 + 1, seed);
        if k % 2 == 1 {
            opts.eps = Some(rational(1, 4));
            opts.policy = RangePolicy::Relaxed;
        }
        let cert = refute(&doubled, &opts).unwrap();
        prop_assert!(cert.certified_bound >= brute_force_max_xor(&inst).unwrap());
    }
}
