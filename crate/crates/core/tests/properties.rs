use proptest::prelude::*;

use iabsim_core::analytic::{association_probability, load_pmf, LoadKernel, LoadPmf, Omega, PathlossLaw};
use iabsim_core::config::Exponents;
use iabsim_core::geometry::{sample_blockage_field, BlockageField, LinkState, Point, Rect, Segment};
use iabsim_core::numerics::{integrate, Quadrature};
use iabsim_core::sim::{build_association_map, simulate, BlockingMode, NetworkRealization, SimSettings};
use iabsim_core::{LinkType, NetworkConfig, Tier};

fn tier() -> impl Strategy<Value = Tier> {
    prop_oneof![Just(Tier::Macro), Just(Tier::Small)]
}

fn link() -> impl Strategy<Value = LinkType> {
    prop_oneof![Just(LinkType::Access), Just(LinkType::Backhaul)]
}

fn config_with(lambda_m: f64, ratio: f64, t_s_db: f64, p_s_db: f64) -> NetworkConfig {
    NetworkConfig {
        lambda_m,
        lambda_s: lambda_m * ratio,
        lambda_u: lambda_m * ratio * 20.0,
        t_s: 10f64.powf(t_s_db / 10.0),
        p_s: 10f64.powf((p_s_db - 30.0) / 10.0),
        ..NetworkConfig::baseline()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn intensity_is_los_plus_nlos(ln_l in 0.0f64..60.0, mu in 10.0f64..2000.0, k in link(), i in tier()) {
        let law = PathlossLaw::with_mu(&NetworkConfig::baseline(), mu);
        let l = ln_l.exp();
        let (a, b) = law.intensity_split(k, i, l);
        let total = law.intensity(k, i, l);
        prop_assert!((a + b - total).abs() <= 1e-9 * total.max(1e-300));
    }

    #[test]
    fn density_is_the_derivative(ln_l in 5.0f64..50.0, mu in 20.0f64..1000.0, k in link(), i in tier()) {
        let law = PathlossLaw::with_mu(&NetworkConfig::baseline(), mu);
        let l = ln_l.exp();
        let h = l * 1e-5;
        let fd = (law.intensity(k, i, l + h) - law.intensity(k, i, l - h)) / (2.0 * h);
        let d = law.density(k, i, l);
        prop_assert!((fd - d).abs() <= 1e-5 * d.abs().max(1e-12 * law.intensity(k, i, l) / l), "{fd} vs {d}");
    }

    #[test]
    fn equal_exponents_reduce_to_a_power_law(alpha in 2.0f64..5.0, mu in 10.0f64..2000.0, ln_l in 0.0f64..40.0, i in tier()) {
        let mut c = NetworkConfig::baseline();
        c.alpha = [[Exponents { los: alpha, nlos: alpha }; 2]; 2];
        let law = PathlossLaw::with_mu(&c, mu);
        let l = ln_l.exp();
        let exact = std::f64::consts::PI * c.density_m2(i) * l.powf(2.0 / alpha);
        let got = law.intensity(LinkType::Access, i, l);
        prop_assert!((got - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn load_pmfs_normalise_with_the_right_mean(ratio in 0.05f64..80.0) {
        for kernel in [LoadKernel::Typical, LoadKernel::Tagged] {
            let pmf = LoadPmf::new(kernel, 1.0, ratio).unwrap();
            let mass: f64 = pmf.iter().map(|(_, p)| p).sum();
            prop_assert!((mass - pmf.mass()).abs() < 1e-9);
            prop_assert!(mass > 1.0 - 1e-4 && mass <= 1.0 + 1e-9);
        }
        // untruncated sums of the closed form
        let n_max = (ratio * 40.0 + 400.0) as u64;
        let (mut mass, mut mean) = (0.0, 0.0);
        for n in 0..=n_max {
            let p = load_pmf(LoadKernel::Typical, 1.0, ratio, n);
            mass += p;
            mean += n as f64 * p;
        }
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
        prop_assert!((mean - ratio).abs() < 1e-9 * ratio.max(1.0), "mean {mean} vs {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn association_probabilities_sum_to_one(
        lambda_m in 1.0f64..30.0,
        ratio in 0.5f64..30.0,
        t_s_db in -10.0f64..25.0,
        p_s_db in 10.0f64..40.0,
        mu in 30.0f64..1000.0,
    ) {
        let c = config_with(lambda_m, ratio, t_s_db, p_s_db);
        let law = PathlossLaw::with_mu(&c, mu);
        let omega = Omega::new(&c);
        let a_m = association_probability(&law, &omega, Tier::Macro).unwrap().value;
        let a_s = association_probability(&law, &omega, Tier::Small).unwrap().value;
        prop_assert!((a_m + a_s - 1.0).abs() < 1e-6, "{a_m} + {a_s}");
    }

    #[test]
    fn common_power_scale_leaves_association_unchanged(ln_scale in -10.0f64..10.0, mu in 30.0f64..1000.0) {
        let c = NetworkConfig::baseline();
        let s = ln_scale.exp();
        let scaled = NetworkConfig { p_m: c.p_m * s, p_s: c.p_s * s, ..c.clone() };
        let law = PathlossLaw::with_mu(&c, mu);
        let a = association_probability(&law, &Omega::new(&c), Tier::Macro).unwrap().value;
        let b = association_probability(&law, &Omega::new(&scaled), Tier::Macro).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn quadrature_is_additive_over_a_split(a in -3.0f64..0.0, b in 0.5f64..4.0, t in 0.05f64..0.95, w in 0.1f64..6.0) {
        let f = |x: f64| (w * x).sin() * (-0.3 * x * x).exp() + 1.0 / (1.0 + x * x);
        let c = a + t * (b - a);
        let q = Quadrature::new(1e-13, 1e-12);
        let whole = q.integrate(f, a, b);
        let left = integrate(f, a, c, 1e-13, 1e-12);
        let right = integrate(f, c, b, 1e-13, 1e-12);
        prop_assert!(whole.converged && left.converged && right.converged);
        prop_assert!((whole.value - left.value - right.value).abs() < 1e-10);
    }
}

fn shifted(field: &BlockageField, dx: f64, dy: f64) -> BlockageField {
    let w = field.window();
    let segments = field.segments().iter().map(|s| Segment { midpoint: s.midpoint.translate(dx, dy), ..*s }).collect();
    BlockageField::new(Rect::new(w.min.translate(dx, dy), w.max.translate(dx, dy)), segments).unwrap()
}

fn point_in(window: Rect, u: f64, v: f64) -> Point {
    Point::new(window.min.x + u * window.width(), window.min.y + v * window.height())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn link_states_are_translation_invariant(
        seed in 0u64..1000,
        dx in -500.0f64..500.0,
        dy in -500.0f64..500.0,
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 20),
    ) {
        // multiples of 1/8 m keep the shifted coordinates exact
        let (dx, dy) = ((dx * 8.0).round() / 8.0, (dy * 8.0).round() / 8.0);
        let window = Rect::centered_square(400.0);
        let field = sample_blockage_field(1500.0, 5.0, window, seed).unwrap();
        let moved = shifted(&field, dx, dy);
        for (a, b, c, d) in pts {
            let x = point_in(window, a, b);
            let y = point_in(window, c, d);
            prop_assert_eq!(
                field.count_blockages(x, y),
                moved.count_blockages(x.translate(dx, dy), y.translate(dx, dy))
            );
        }
    }

    #[test]
    fn more_segments_never_unblock(
        seed in 0u64..1000,
        extra in 1usize..60,
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 30),
    ) {
        let window = Rect::centered_square(400.0);
        let field = sample_blockage_field(1000.0, 5.0, window, seed).unwrap();
        let more = sample_blockage_field(1000.0, 5.0, window, seed + 10_000).unwrap();
        let mut segments = field.segments().to_vec();
        segments.extend(more.segments().iter().take(extra).copied());
        let denser = BlockageField::new(window, segments).unwrap();
        for (a, b, c, d) in pts {
            let x = point_in(window, a, b);
            let y = point_in(window, c, d);
            if field.link_state(x, y) == LinkState::Nlos {
                prop_assert_eq!(denser.link_state(x, y), LinkState::Nlos);
            }
            prop_assert!(denser.count_blockages(x, y) >= field.count_blockages(x, y));
        }
    }

    #[test]
    fn association_ignores_a_common_power_scale(seed in 0u64..500, ln_scale in -8.0f64..8.0) {
        let c = NetworkConfig { lambda_u: 300.0, ..NetworkConfig::baseline() };
        let s = ln_scale.exp();
        let scaled = NetworkConfig { p_m: c.p_m * s, p_s: c.p_s * s, ..c.clone() };
        let window = Rect::centered_square(600.0);
        let real = iabsim_core::sim::sample_realization(&c, window, seed).unwrap();
        prop_assume!(!real.mbs.is_empty());
        prop_assert_eq!(build_association_map(&real, &c).unwrap(), build_association_map(&real, &scaled).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn analytic_coverage_is_a_ccdf(mu in 50.0f64..800.0, t_s_db in 0.0f64..20.0) {
        let c = NetworkConfig { t_s: 10f64.powf(t_s_db / 10.0), mu: Some(mu), ..NetworkConfig::baseline() };
        let law = PathlossLaw::new(&c).unwrap();
        let omega = Omega::new(&c);
        let mut prev = [1.0f64; 2];
        for db in (-20..=30).step_by(5) {
            let tau = 10f64.powf(db as f64 / 10.0);
            let now = [
                iabsim_core::analytic::mbs_coverage(&law, &omega, &c, tau).unwrap().value,
                iabsim_core::analytic::sbs_access_coverage(&law, &omega, &c, tau).unwrap().value,
            ];
            for k in 0..2 {
                prop_assert!((0.0..=1.0 + 1e-9).contains(&now[k]));
                prop_assert!(now[k] <= prev[k] + 1e-7);
            }
            prev = now;
        }
    }

    #[test]
    fn replay_is_exact(seed in any::<u64>()) {
        let c = NetworkConfig { lambda_u: 200.0, ..NetworkConfig::baseline() };
        for mode in [BlockingMode::Correlated, BlockingMode::Independent { mu: 200.0 }] {
            let settings = SimSettings { window: Rect::centered_square(600.0), mode, with_loads: true };
            let a = simulate(&c, &settings, 2, seed).unwrap();
            let b = simulate(&c, &settings, 2, seed).unwrap();
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }

    #[test]
    fn independent_links_are_symmetric(seed in any::<u64>(), pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 20)) {
        let window = Rect::centered_square(800.0);
        let real = NetworkRealization::from_parts(
            vec![],
            vec![],
            vec![],
            BlockageField::new(window, vec![]).unwrap(),
            window,
            BlockingMode::Independent { mu: 200.0 },
            seed,
        );
        for (a, b, c, d) in pts {
            let x = point_in(window, a, b);
            let y = point_in(window, c, d);
            prop_assert_eq!(real.link_state(x, y), real.link_state(y, x));
        }
        prop_assert!(real.cache_consistent());
    }
}
