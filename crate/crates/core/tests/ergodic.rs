use osc_core::netdyn::ergodic::{
    build_transition_matrix, ergodic_average_check, exact_survival, stationary_distribution, ErgodicityConfig,
    Statistic, TinyNetSpec,
};
use osc_core::netdyn::LologParams;
use osc_core::{Preset, RngStream};

#[test]
fn random_tiny_instances() {
    let mut rng = RngStream::new(99);
    for (trial, (ns, nd)) in [(1, 2), (2, 2), (2, 3), (3, 3), (2, 5), (1, 1), (3, 2), (5, 2)].into_iter().enumerate() {
        let params = LologParams::from(&Preset::ALL[trial % 3].config().lolog);
        let dw = rng.uniform_range(-1.0, 1.0);
        let spec = TinyNetSpec::random_sd(ns, nd, &params, dw, &mut rng).unwrap();
        assert!(spec.n_links() <= 10);
        let eta = 0.5 / (spec.n_links() + 1) as f64;
        let p = build_transition_matrix(&spec, &ErgodicityConfig { eta, ..Default::default() }).unwrap();
        assert!(p.max_row_error() < 1e-12);
        assert!(p.is_irreducible() && p.has_positive_diagonal());
        let st = stationary_distribution(&p).unwrap();
        assert!((st.pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let pi_p = p.left_multiply(&st.pi);
        assert!(pi_p.iter().zip(&st.pi).all(|(a, b)| (a - b).abs() < 1e-10));
        let s = exact_survival(&spec, &st.pi);
        assert!(s > 0.0 && s < 1.0);
    }
}

/// Mean gap over independent chains shrinks as the chains lengthen.
#[test]
fn gap_shrinks_with_horizon() {
    let params = LologParams::from(&Preset::FastFashion.config().lolog);
    let spec = TinyNetSpec::random_sd(2, 3, &params, 0.5, &mut RngStream::new(3)).unwrap();
    let p = build_transition_matrix(&spec, &ErgodicityConfig { eta: 0.05, ..Default::default() }).unwrap();
    let st = stationary_distribution(&p).unwrap();
    for stat in Statistic::ALL {
        let gaps: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&t| {
                (0..12u64)
                    .map(|c| {
                        let mut rng = RngStream::new(1000 + c);
                        ergodic_average_check(&p, &st.pi, |s| stat.eval(&spec, s), t, 0, &mut rng).unwrap().gap
                    })
                    .sum::<f64>()
                    / 12.0
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{}: {gaps:?}", stat.name());
    }
}
