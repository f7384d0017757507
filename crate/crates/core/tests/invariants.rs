use proptest::prelude::*;

use erds::entropy::{
    boltzmann_lambda, dist_alpha_density, lambda_s, rel_boltzmann_b, rel_entropy_density, xi_star, xi_star_s,
    Entropy, EntropyModel, TruncationParams,
};
use erds::models::{
    mobility_matrix, reaction, ExchangePair, GradientSystem, MobilitySpec, ReactionSpec, SktParams, SktSystem,
};
use erds::solver::{simulate, Grid1D, StateField, TimeConfig};
use erds::models::ErdsSystem;

fn model() -> EntropyModel {
    EntropyModel::default()
}

fn spec() -> MobilitySpec {
    let mut s = MobilitySpec::default();
    s.fill_defaults(2);
    s
}

fn state() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..5.0, 3)
}

fn min_eigen(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lambda_functions_are_nonnegative(r in 0.0f64..50.0, s in 1.01f64..2.0, e in 0.01f64..10.0) {
        prop_assert!(boltzmann_lambda(r).unwrap() >= 0.0);
        prop_assert!(lambda_s(r, s).unwrap() >= -1e-14);
        prop_assert!(rel_boltzmann_b(r, e).unwrap() >= 0.0);
    }

    #[test]
    fn relative_entropy_is_a_bregman_distance(z in state(), zt in state()) {
        let m = model();
        let v = rel_entropy_density(&z, &zt, &m).unwrap();
        prop_assert!(v >= -1e-12 * (1.0 + m.density_raw(&z).abs()));
        prop_assert!(rel_entropy_density(&zt, &zt, &m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hessian_is_symmetric_positive_definite(z in state()) {
        let h = model().hessian_raw(&z);
        prop_assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax());
        prop_assert!(min_eigen(&h) > 0.0);
    }

    #[test]
    fn mobility_is_symmetric_psd(z in state()) {
        let m = mobility_matrix(&z, &spec(), &model()).unwrap();
        prop_assert!((&m - m.transpose()).amax() <= 1e-12 * m.amax());
        prop_assert!(min_eigen(&m) >= -1e-12 * m.amax());
    }

    #[test]
    fn reactions_conserve_and_dissipate(z in state(), kappa in 0.0f64..5.0) {
        let m = model();
        let spec = ReactionSpec { pairs: vec![ExchangePair { i: 1, j: 2, kappa }] };
        let r = reaction(&z, &spec, &m).unwrap();
        prop_assert_eq!(r[0], 0.0);
        prop_assert!((r[1] + r[2]).abs() <= 1e-12 * (1.0 + r[1].abs()));
        let g = m.gradient_vec(&z);
        let sign: f64 = (1..3).map(|i| g[i] * r[i]).sum();
        prop_assert!(sign <= 1e-12);
    }

    #[test]
    fn truncation_is_a_cutoff(z in prop::collection::vec(0.0f64..40.0, 3), e in 2.0f64..10.0, n in 2.0f64..4.0) {
        let p = TruncationParams::new(e, n, 0.1, 1.0).unwrap();
        let size: f64 = z.iter().sum();
        let v = xi_star(&z, &p).value;
        prop_assert!((0.0..=1.0).contains(&v));
        if size <= e {
            prop_assert_eq!(v, 1.0);
        }
        if size >= e.powf(n) {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn truncation_decreases_along_rays(z in prop::collection::vec(0.01f64..10.0, 3), t in 1.0f64..5.0) {
        let p = TruncationParams::new(3.0, 2.0, 0.1, 1.0).unwrap();
        let far: Vec<f64> = z.iter().map(|v| v * t).collect();
        prop_assert!(xi_star(&far, &p).value <= xi_star(&z, &p).value + 1e-15);
    }

    #[test]
    fn skt_truncation_is_a_cutoff(c in prop::collection::vec(0.0f64..20.0, 2), s in 1.0f64..2.0) {
        let v = xi_star_s(&c, 4.0, 2.0, s).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn distance_vanishes_only_on_the_diagonal(z in state(), zt in prop::collection::vec(0.2f64..2.0, 3)) {
        let p = TruncationParams::new(20.0, 2.0, 0.1, 1.0).unwrap();
        let m = model();
        prop_assert!(dist_alpha_density(&zt, &zt, &p, &m).unwrap().abs() < 1e-12);
        prop_assert!(dist_alpha_density(&z, &zt, &p, &m).unwrap() >= -1e-12);
    }

    #[test]
    fn skt_detailed_balance_gives_symmetric_mobility(c in prop::collection::vec(0.05f64..5.0, 2), s in 1.0f64..2.0) {
        let sys = SktSystem::new(SktParams {
            s,
            a: vec![vec![1.0, 1.0, 0.5], vec![1.0, 0.25, 1.0]],
            pi: vec![1.0, 2.0],
            detailed_balance: true,
        })
        .unwrap();
        let z = [1.0, c[0], c[1]];
        let m = sys.mobility(&z);
        prop_assert!((&m - m.transpose()).amax() <= 1e-10 * m.amax());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scheme_conserves_and_stays_positive(
        vals in prop::collection::vec(0.2f64..2.0, 3 * 12),
    ) {
        let sys = ErdsSystem::new(model(), spec(), ReactionSpec::none()).unwrap();
        let grid = Grid1D::unit(12);
        let z0 = StateField::from_fn(grid, 3, {
            let mut j = 0;
            move |_| {
                let c = vals[3 * j..3 * j + 3].to_vec();
                j += 1;
                c
            }
        });
        let traj = simulate(&sys, &z0, &TimeConfig::fixed(0.01, 1e-4, 10)).unwrap();
        let last = traj.last();
        for k in 0..3 {
            let (a, b) = (z0.integral(k), last.integral(k));
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
        prop_assert!(last.values.iter().all(|v| *v > 0.0 && v.is_finite()));
        prop_assert_eq!(traj.total_floors(), 0);
        let h: Vec<f64> = traj.series.iter().map(|r| r.h).collect();
        prop_assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));
        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(traj.series.len(), traj.steps() + 1);
    }
}
