use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hyperzeros::conditions::{build_coloring_decomposition, ColoringParams};
use hyperzeros::dynamics::{
    check_trace_reconstruction, construct_2tree, count_2trees, graph_max_degree, heat_bath_kernel,
    sample_decomposed_trace, two_tree_count_bound, HeatBath, ScanSchedule, WitnessGraph,
};
use hyperzeros::exact::{
    brute_force_partition_poly, factorized_partition_poly, projected_counts,
    single_edge_closed_form, DEFAULT_BUDGET,
};
use hyperzeros::gen::{
    component_of, random_atomic_csp, random_graph, random_hypergraph, tiny_corpus, Instance,
};
use hyperzeros::interpolate::{
    binomial_transform, cluster_series, fisher_partition_poly, verify_reduction_identity,
};
use hyperzeros::model::{coloring_csp, Hypergraph, ProjectionScheme};
use hyperzeros::zerofree::{coloring_gamma, find_roots, verify_strip};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorized_matches_brute_force(seed in any::<u64>(), n in 3usize..7, k in 2usize..4, q in 2u32..4) {
        let mut r = rng(seed);
        let h = random_hypergraph(n, k.min(n), 2, n / 2, &mut r).unwrap();
        let csp = coloring_csp(&h, q).unwrap();
        let sp = ProjectionScheme::identity(csp.domains(), Some(0));
        prop_assert_eq!(brute_force_partition_poly(&csp, &sp).unwrap(), factorized_partition_poly(&csp, &sp).unwrap());
    }

    #[test]
    fn single_edge_closed_form_matches(k in 2usize..5, q in 2u32..5) {
        let h = Hypergraph::new(k, k, vec![(0..k).collect()]).unwrap();
        let csp = coloring_csp(&h, q).unwrap();
        let sp = ProjectionScheme::identity(csp.domains(), Some(0));
        prop_assert_eq!(single_edge_closed_form(k as u32, q).unwrap(), factorized_partition_poly(&csp, &sp).unwrap());
    }

    #[test]
    fn root_multiplicities_sum_to_degree(k in 2u32..6, q in 2u32..6, m in 1u32..4) {
        let p = single_edge_closed_form(k, q).unwrap().pow(m);
        let roots = find_roots(&p, 128).unwrap();
        prop_assert_eq!(roots.total_multiplicity(), p.degree().unwrap());
        for r in &roots.roots {
            let z = r.to_c64();
            // backward error against Σ|a_i||z|^i
            let scale: f64 = p
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, a)| a.to_f64().unwrap().abs() * z.norm().powi(i as i32))
                .sum();
            prop_assert!(p.eval_c64(z).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn kernels_are_stochastic_and_fix_psi(idx in 0usize..8, re in 0.05f64..1.5, im in -0.01f64..0.01) {
        let t = &tiny_corpus()[idx];
        let counts = projected_counts(&t.csp(), &t.projection(), DEFAULT_BUDGET).unwrap();
        let hb = HeatBath::new(&counts, Complex64::new(re, im)).unwrap();
        let schedule = ScanSchedule::new(t.h.n()).unwrap();
        for s in 0..t.h.n() as i64 {
            let kern = heat_bath_kernel(&hb, &schedule, s).unwrap();
            prop_assert!(kern.max_row_sum_error() < 1e-12);
            prop_assert!(kern.apply(hb.psi()).l1_distance(hb.psi()) < 1e-10);
        }
    }

    #[test]
    fn traces_reconstruct(idx in 0usize..8, seed in any::<u64>(), sweeps in 1usize..4) {
        let t = &tiny_corpus()[idx];
        let csp = t.csp();
        let proj = t.projection();
        let lam = Complex64::new(1.0, 0.0);
        let hb = HeatBath::new(&projected_counts(&csp, &proj, DEFAULT_BUDGET).unwrap(), lam).unwrap();
        let p = ColoringParams::new(t.h.k() as u64, t.h.delta() as u64, t.q as u64, t.b as u64, 1.0).unwrap();
        let scheme = build_coloring_decomposition(&p, t.h.n(), lam).unwrap();
        let trace = sample_decomposed_trace(&hb, &scheme, sweeps * t.h.n(), &mut rng(seed)).unwrap();
        for c in 0..csp.constraints().len() {
            let g = WitnessGraph::new(&csp, c, trace.t_min).unwrap();
            prop_assert!(check_trace_reconstruction(&trace, &g, &proj).unwrap());
        }
    }

    #[test]
    fn two_tree_bounds_hold(seed in any::<u64>(), n in 4usize..12, d in 1usize..5) {
        let mut r = rng(seed);
        let adj = random_graph(n, d, 3 * n, &mut r);
        let dmax = graph_max_degree(&adj).max(1);
        let comp = component_of(&adj, 0);
        let tree = construct_2tree(&adj, &comp, 0).unwrap();
        prop_assert!(tree.is_valid(&adj));
        prop_assert!(tree.vertices.len() >= comp.len() / (dmax + 1));
        for j in 2..=4 {
            prop_assert!(count_2trees(&adj, 0, j).unwrap() as f64 <= two_tree_count_bound(dmax, j));
        }
    }

    #[test]
    fn fisher_identities(seed in any::<u64>(), n in 3usize..6, m in 1usize..6) {
        let mut r = rng(seed);
        let csp = random_atomic_csp(&vec![2; n], 2, m, &mut r).unwrap();
        prop_assert!(verify_reduction_identity(&csp, None).unwrap().exact_identity);
        let rep = verify_reduction_identity(&csp, Some(Complex64::new(0.3, 0.4))).unwrap();
        prop_assert!(rep.rel_error.unwrap() < 1e-12);
        let f = fisher_partition_poly(&csp).unwrap();
        prop_assert_eq!(cluster_series(&csp, 6).unwrap().coeffs, binomial_transform(&f, 6));
    }

    #[test]
    fn instance_roundtrip(seed in any::<u64>()) {
        let h = random_hypergraph(7, 3, 2, 3, &mut rng(seed)).unwrap();
        let inst = Instance::coloring(&h, 3, Some(1));
        let back: Instance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        prop_assert_eq!(back.csp().unwrap(), inst.csp().unwrap());
    }
}

#[test]
fn strip_margin_scales_past_gamma() {
    // every corpus polynomial clears the coloring γ of its own (k, Δ)
    for t in tiny_corpus().iter().filter(|t| t.q > t.h.k() as u32) {
        let sp = ProjectionScheme::identity(t.csp().domains(), Some(0));
        let p = factorized_partition_poly(&t.csp(), &sp).unwrap();
        let g = coloring_gamma(t.h.k() as u64, t.h.delta() as u64);
        assert!(verify_strip(&p, &g, 256).unwrap().pass, "{}", t.name);
    }
    let half: BigRational = BigRational::new(1.into(), 2.into());
    assert!(
        verify_strip(&single_edge_closed_form(3, 3).unwrap(), &half, 256)
            .unwrap()
            .pass
    );
}
