use clique_probe::detector::*;
use clique_probe::oracle::*;
use clique_probe::recoverer::*;
use clique_probe::solver::{build_from_oracle, clique_number, DenseSubgraph};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn answers_are_symmetric_and_cached(seed in any::<u64>(), n in 2u32..40, picks in proptest::collection::vec((1u32..40, 1u32..40), 1..80)) {
        let k = (n / 3).max(1);
        let inst = sample_instance(n, k, Hypothesis::Planted, seed).unwrap();
        let mut o = EdgeOracle::new(inst.clone(), None);
        let mut seen = std::collections::HashSet::new();
        for (i, j) in picks {
            let (i, j) = (1 + (i - 1) % n, 1 + (j - 1) % n);
            if i == j {
                prop_assert!(o.query_edge(i, j).is_err());
                continue;
            }
            let a = o.query_edge(i, j).unwrap();
            prop_assert_eq!(a, o.query_edge(j, i).unwrap());
            if inst.in_clique(i) && inst.in_clique(j) {
                prop_assert!(a);
            }
            seen.insert((i.min(j), i.max(j)));
            prop_assert_eq!(o.queries_used(), seen.len() as u64);
        }
    }

    #[test]
    fn budget_is_exact(seed in any::<u64>(), budget in 0u64..30) {
        let inst = sample_instance(20, 5, Hypothesis::Null, seed).unwrap();
        let mut o = EdgeOracle::new(inst, Some(budget));
        let mut answered = 0u64;
        'outer: for i in 1..=20u32 {
            for j in i + 1..=20 {
                match o.query_edge(i, j) {
                    Ok(_) => answered += 1,
                    Err(e) => {
                        prop_assert!(e.is_budget_exhausted());
                        break 'outer;
                    }
                }
            }
        }
        prop_assert_eq!(answered, budget);
        prop_assert_eq!(o.queries_used(), budget);
        prop_assert_eq!(o.remaining_budget(), Some(0));
    }

    #[test]
    fn order_of_queries_does_not_matter(seed in any::<u64>()) {
        let inst = sample_instance(30, 6, Hypothesis::Planted, seed).unwrap();
        let mut fwd = EdgeOracle::new(inst.clone(), None);
        let mut rev = EdgeOracle::new(inst.clone(), None);
        let pairs: Vec<(u32, u32)> = (1..=30u32).flat_map(|i| (i + 1..=30).map(move |j| (i, j))).collect();
        let a: Vec<bool> = pairs.iter().map(|&(i, j)| fwd.query_edge(i, j).unwrap()).collect();
        let mut b: Vec<bool> = pairs.iter().rev().map(|&(i, j)| rev.query_edge(j, i).unwrap()).collect();
        b.reverse();
        prop_assert_eq!(&a, &b);
        let m = inst.materialize();
        for (x, &(i, j)) in pairs.iter().enumerate() {
            prop_assert_eq!(m[i as usize - 1][j as usize - 1], a[x]);
        }
    }
}

/// Parameters recomputed from the formulas with plain floating point.
fn reference_params(n: f64, k: f64, eps0: f64) -> (u64, u64) {
    let lg = n.log2();
    let e = ((4.0 + 2.0 * eps0).sqrt() - 2.0).min(k / lg - 2.0);
    let m = ((2.0 + e) * n / k * lg).ceil().min(n);
    let t = ((2.0 + e / 2.0) * lg).ceil();
    (m as u64, t as u64)
}

#[test]
fn derived_parameters_match_formulas() {
    for &(n, k, eps0) in &[
        (65536u32, 2048u32, 4.0),
        (4096, 512, 4.0),
        (1024, 128, 1.0),
        (65536, 4096, 4.0),
        (65536, 776, 4.0),
        (1 << 20, 8192, 2.5),
    ] {
        let p = derive_params(n, k, eps0, SubsetMode::FirstM).unwrap();
        let (m, t) = reference_params(f64::from(n), f64::from(k), eps0);
        assert_eq!(
            (u64::from(p.m), u64::from(p.threshold)),
            (m, t),
            "n={n} k={k}"
        );
        // 2 eps' + eps'^2 / 2 <= eps0
        assert!(2.0 * p.eps_prime + p.eps_prime * p.eps_prime / 2.0 <= eps0 + 1e-9);
    }
    let p = derive_params(65536, 2048, 4.0, SubsetMode::FirstM).unwrap();
    assert_eq!((p.m, p.threshold), (1774, 44));
    assert!(matches!(
        derive_params(16, 4, 1.0, SubsetMode::FirstM),
        Err(clique_probe::Error::BelowDetectability { .. })
    ));
}

#[test]
fn random_subsets_are_seeded() {
    let a = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(3)).unwrap();
    let b = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(3)).unwrap();
    let c = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(4)).unwrap();
    assert_eq!(a.s_vertices, b.s_vertices);
    assert_ne!(a.s_vertices, c.s_vertices);
    assert_eq!(a.s_vertices.len(), a.m as usize);
    assert!(a.s_vertices.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn statistics_agree_on_decisions() {
    let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
    for seed in 0..6 {
        for h in [Hypothesis::Null, Hypothesis::Planted] {
            let inst = sample_instance(4096, 512, h, seed).unwrap();
            let exact = detect(&mut EdgeOracle::new(inst.clone(), None), &p).unwrap();
            let dec = detect_with(
                &mut EdgeOracle::new(inst.clone(), None),
                &p,
                Statistic::Decision,
            )
            .unwrap();
            assert_eq!(exact.decision, dec.decision);
            assert!(exact.witness_exact);
            assert!(dec.witness_size <= exact.witness_size);
            assert_eq!(exact.queries, p.pair_count());
            assert_eq!(dec.queries, p.pair_count());
            // the exact statistic is the clique number of the subgraph on S
            let mut o = EdgeOracle::new(inst, None);
            let g: DenseSubgraph = build_from_oracle(&p.s_vertices, &mut o).unwrap();
            assert_eq!(exact.witness_size as usize, clique_number(&g));
        }
    }
}

#[test]
fn recovery_charges_stay_within_budget() {
    let (n, k, eps0) = (4096u32, 512u32, 4.0);
    let p = derive_params(n, k, eps0, SubsetMode::FirstM).unwrap();
    for seed in 0..4 {
        let inst = sample_instance(n, k, Hypothesis::Planted, seed).unwrap();
        let mut o = EdgeOracle::new(inst.clone(), None);
        let out = recover(&mut o, &p, eps0).unwrap();
        assert!(verify_estimate(&out, &inst).unwrap());
        assert_eq!(out.queries_step1 + out.queries_step2, o.queries_used());
        assert!(out.queries_step2 <= filter_size(n, eps0) * u64::from(n - p.m));
        assert!((o.queries_used() as f64) <= recovery_budget(n, k, eps0));
        // every estimate member outside D passed the filter
        assert!(out.t_set.iter().all(|v| !p.s_vertices.contains(v)));
    }
}

#[test]
fn recovery_respects_a_budget_cap() {
    let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
    let inst = sample_instance(4096, 512, Hypothesis::Planted, 1).unwrap();
    let mut o = EdgeOracle::new(inst, Some(p.pair_count() + 1000));
    let e = recover(&mut o, &p, 4.0).unwrap_err();
    assert!(e.is_budget_exhausted());
    assert_eq!(o.queries_used(), p.pair_count() + 1000);
}
