use bqc_core::blend::{BlendFunction, BlendShape};
use bqc_core::energy::{EnergyModel, ModelKind};
use bqc_core::experiments::{modeling_error_audit, BOUND_RTOL};
use bqc_core::lattice::{delta2, diff1, dual_norm, forces_to_dual, Deformation, Displacement, DualFunctional, LatticeConfig};
use bqc_core::potential::Potential;
use bqc_core::sampling::{random_smooth_state, seeded_rng};
use bqc_core::solve::{equilibrate, DeadLoad, SolveOptions};
use bqc_core::stability::{coercivity, coercivity_constant};
use proptest::prelude::*;

fn cfg(n: usize) -> LatticeConfig {
    LatticeConfig::new(n).unwrap()
}

fn rotate(v: &[f64], j: usize) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| v[(i + n - j % n) % n]).collect()
}

fn shape_strategy() -> impl Strategy<Value = BlendShape> {
    prop_oneof![
        Just(BlendShape::Linear),
        Just(BlendShape::Cubic),
        Just(BlendShape::Quintic),
    ]
}

fn state(n: usize, f: f64, amp: f64, seed: u64) -> Deformation {
    random_smooth_state(cfg(n), f, 4, amp, &mut seeded_rng(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stencils_commute_with_shifts(n in 6usize..40, j in 0usize..40, seed in any::<u64>()) {
        let y = state(n, 1.0, 0.1, seed);
        let shifted = Deformation::new(cfg(n), 1.0, Displacement::project(rotate(y.displacement().values(), j))).unwrap();
        let a = rotate(&diff1(&y), j);
        let b = diff1(&shifted);
        for (x, z) in a.iter().zip(&b) {
            prop_assert!((x - z).abs() < 1e-12);
        }
        let pot = Potential::lennard_jones();
        let alpha: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 / 5.0).collect();
        let beta: Vec<f64> = (0..n).map(|i| ((i * 3) % 4) as f64 / 4.0).collect();
        let m = EnergyModel::custom(pot.clone(), alpha.clone(), beta.clone()).unwrap();
        let ms = EnergyModel::custom(pot, rotate(&alpha, j), rotate(&beta, j)).unwrap();
        let t = rotate(m.first_variation(&y).unwrap().strain_rep(), j);
        let ts = ms.first_variation(&shifted).unwrap();
        for (x, z) in t.iter().zip(ts.strain_rep()) {
            prop_assert!((x - z).abs() < 1e-10);
        }
        prop_assert!((m.value(&y).unwrap() - ms.value(&shifted).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn summation_by_parts(t in prop::collection::vec(-5.0f64..5.0, 5..30), seed in any::<u64>()) {
        let n = t.len();
        let g = DualFunctional::from_strain_rep(t);
        let u = bqc_core::sampling::random_smooth_displacement(cfg(n), 3, 1.0, &mut seeded_rng(seed));
        let eps = 1.0 / n as f64;
        let lhs: f64 = eps * g.site_forces().iter().zip(u.values()).map(|(f, v)| f * v).sum::<f64>();
        prop_assert!((lhs - g.apply(&u)).abs() < 1e-9 * (1.0 + lhs.abs()));
        let back = forces_to_dual(&g.site_forces()).unwrap();
        for (x, z) in back.strain_rep().iter().zip(g.strain_rep()) {
            prop_assert!((x - z).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_norm_bounds_pairings(t in prop::collection::vec(-5.0f64..5.0, 5..30), seed in any::<u64>()) {
        let n = t.len();
        let eps = 1.0 / n as f64;
        let g = DualFunctional::from_strain_rep(t.clone());
        let mean = t.iter().sum::<f64>() / n as f64;
        let closed = (eps * t.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
        let norm = dual_norm(&g, 2.0).unwrap();
        prop_assert!((norm - closed).abs() <= 1e-12 * (1.0 + closed));
        let mut rng = seeded_rng(seed);
        for _ in 0..20 {
            let u = bqc_core::sampling::random_smooth_displacement(cfg(n), 5, 1.0, &mut rng);
            let w = u.derivative();
            let u12 = (eps * w.iter().map(|x| x * x).sum::<f64>()).sqrt();
            prop_assert!(g.apply(&u).abs() <= norm * u12 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn second_difference_is_linear(
        s in prop::collection::vec(-1.0f64..1.0, 6..20),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let t: Vec<f64> = s.iter().map(|x| x * x - 0.3).collect();
        let combo: Vec<f64> = s.iter().zip(&t).map(|(x, y)| a * x + b * y).collect();
        let lhs = delta2(&combo);
        let (ds, dt) = (delta2(&s), delta2(&t));
        for i in 0..s.len() {
            prop_assert!((lhs[i] - (a * ds[i] + b * dt[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn envelopes_are_nonincreasing(order in 1usize..5, r0 in 0.6f64..1.5, step in 0.0f64..0.5, stiffness in 2.0f64..8.0) {
        for pot in [Potential::lennard_jones(), Potential::morse(stiffness).unwrap()] {
            let near = pot.envelope(order, r0).unwrap();
            let far = pot.envelope(order, r0 + step).unwrap();
            prop_assert!(far <= near * (1.0 + 1e-12));
            prop_assert!(pot.eval_derivative(order, r0).unwrap().abs() <= near * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ghost_seminorms_chain_and_shift(shape in shape_strategy(), k in 2usize..=64, p in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]) {
        let n = 256;
        let blend = BlendFunction::build(cfg(n), shape.clone(), n / 2, 17, k).unwrap();
        let r = blend.ghost_report(p).unwrap();
        prop_assert!(r.alpha_seminorm <= r.gamma_seminorm * (1.0 + 1e-12));
        if let Some(bound) = r.total_bound() {
            prop_assert!(r.gamma_seminorm <= bound * (1.0 + 1e-12));
        }
        let moved = BlendFunction::build(cfg(n), shape, n / 2 - 1, 17, k).unwrap();
        let m = moved.ghost_report(p).unwrap();
        prop_assert!((m.alpha_seminorm - r.alpha_seminorm).abs() <= 1e-12 * r.alpha_seminorm);
    }

    #[test]
    fn site_forces_balance(seed in any::<u64>(), kind in prop::sample::select(vec![ModelKind::Atomistic, ModelKind::Bqce, ModelKind::Bqnl])) {
        let n = 32;
        let y = state(n, 1.0, 0.1, seed);
        let blend = BlendFunction::build(cfg(n), BlendShape::Cubic, 16, 5, 4).unwrap();
        let m = EnergyModel::from_kind(kind, Potential::lennard_jones(), &blend).unwrap();
        let forces = m.first_variation(&y).unwrap().site_forces();
        let scale = forces.iter().fold(1.0_f64, |s, f| s.max(f.abs()));
        prop_assert!(forces.iter().sum::<f64>().abs() <= 1e-12 * scale * n as f64);
    }

    #[test]
    fn modeling_audit_holds(seed in any::<u64>(), p in 1.0f64..8.0, amp in 0.01f64..0.2, shape in shape_strategy()) {
        let n = 64;
        let y = state(n, 1.0, amp, seed);
        let blend = BlendFunction::build(cfg(n), shape, 32, 9, 6).unwrap();
        for m in [EnergyModel::bqce(Potential::lennard_jones(), &blend).unwrap(), EnergyModel::bqnl(Potential::lennard_jones(), &blend).unwrap()] {
            let a = modeling_error_audit(&m, &y, p).unwrap();
            prop_assert!(a.lhs <= a.rhs * (1.0 + BOUND_RTOL));
            if m.kind() == ModelKind::Bqnl {
                prop_assert_eq!(a.parts.ghost, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stability_bounds_hold(seed in any::<u64>(), f in 0.95f64..1.08, amp in 0.01f64..0.15) {
        let n = 48;
        let y = state(n, f, amp, seed);
        let pot = Potential::morse(4.0).unwrap();
        let blend = BlendFunction::build(cfg(n), BlendShape::Cubic, 24, 7, 5).unwrap();
        let atomistic = coercivity_constant(&EnergyModel::atomistic(pot.clone(), cfg(n)), &y).unwrap().0;
        for m in [EnergyModel::bqce(pot.clone(), &blend).unwrap(), EnergyModel::bqnl(pot.clone(), &blend).unwrap()] {
            let r = coercivity(&m, &y).unwrap();
            prop_assert!(r.coercivity >= r.bound_a_priori.unwrap() - 1e-12);
            prop_assert!(atomistic >= r.bound_a_posteriori.unwrap() - 1e-12);
        }
    }

    #[test]
    fn equilibria_are_gauged_and_converged(seed in any::<u64>(), scale in 0.05f64..0.5) {
        let n = 64;
        let pot = Potential::lennard_jones();
        let blend = BlendFunction::build(cfg(n), BlendShape::Cubic, 32, 9, 6).unwrap();
        let m = EnergyModel::bqnl(pot, &blend).unwrap();
        let raw: Vec<f64> = {
            use rand::Rng;
            let mut rng = seeded_rng(seed);
            (0..n).map(|_| rng.gen_range(-1.0..1.0) * scale).collect()
        };
        let mut values = raw;
        let mean = values.iter().sum::<f64>() / n as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        let load = DeadLoad::new(values).unwrap();
        let opts = SolveOptions::default();
        let (y, report) = equilibrate(&m, &load, &Deformation::uniform(cfg(n), 1.0).unwrap(), &opts).unwrap();
        prop_assert!(report.residual <= opts.newton_tol);
        let sum: f64 = y.displacement().values().iter().sum();
        prop_assert!(sum.abs() <= 1e-12);
    }
}
