use lmg_otto::eigen::eigendecompose;
use lmg_otto::perturbation::{delta_populations, mirrored_gamma_y, perturbative_work};
use lmg_otto::phase_space::{squeezed_vacuum_fock, transition_table_exact};
use lmg_otto::spin::{lmg_hamiltonian, CouplingPair, ScalingMode, SpinSector};
use lmg_otto::sweep::sweep_cycle;
use lmg_otto::thermo::{run_otto_cycle, EngineParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = EngineParams> {
    (
        0.05f64..3.0,
        0.0f64..2.0,
        0.05f64..3.0,
        0.0f64..2.0,
        0.05f64..2.0,
        1.05f64..8.0,
        any::<bool>(),
    )
        .prop_map(|(gxh, gyh, gxl, gyl, tl, ratio, ext)| EngineParams {
            hot: CouplingPair::new(gxh, gyh).unwrap(),
            cold: CouplingPair::new(gxl, gyl).unwrap(),
            t_hot: tl * ratio,
            t_cold: tl,
            mode: if ext {
                ScalingMode::Extensive
            } else {
                ScalingMode::NonExtensive
            },
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_law_holds(p in params(), n in 1u32..=24) {
        let s = SpinSector::from_spins(n).unwrap();
        let r = run_otto_cycle(&s, &p).unwrap();
        prop_assert!((r.w - (r.q_in + r.q_out)).abs() <= 1e-12 * r.w.abs().max(r.q_in.abs()));
        let scale = r.u_a.abs().max(r.u_b.abs()).max(r.u_c.abs()).max(r.u_d.abs());
        if let (Some(eta), true) = (r.eta, r.q_in > 1e-9 * scale) {
            // Carnot, once heat flow is above roundoff
            prop_assert!(eta <= 1.0 - p.t_cold / p.t_hot + 1e-9);
        }
    }

    #[test]
    fn work_scales_with_energy_unit(p in params(), n in 2u32..=16, lambda in 0.1f64..10.0) {
        let s = SpinSector::from_spins(n).unwrap();
        let a = run_otto_cycle(&s, &p).unwrap();
        let b = run_otto_cycle(&s, &p.rescaled(lambda)).unwrap();
        for (x, y) in [(a.u_a, b.u_a), (a.u_b, b.u_b), (a.u_c, b.u_c), (a.u_d, b.u_d)] {
            prop_assert!((lambda * x - y).abs() <= 1e-10 * (lambda * x).abs().max(lambda));
        }
    }

    #[test]
    fn extensive_spectrum_is_nonextensive_over_n(gx in 0.05f64..3.0, gy in 0.0f64..3.0, n in 1u32..=40) {
        let s = SpinSector::from_spins(n).unwrap();
        let c = CouplingPair::new(gx, gy).unwrap();
        let ne = eigendecompose(&lmg_hamiltonian(&s, &c, ScalingMode::NonExtensive).unwrap()).unwrap();
        let ex = eigendecompose(&lmg_hamiltonian(&s, &c, ScalingMode::Extensive).unwrap()).unwrap();
        let scale = ne.max_abs().max(1.0);
        for (a, b) in ne.eigenvalues().iter().zip(ex.eigenvalues()) {
            prop_assert!((a / n as f64 - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn delta_populations_balance(p in params(), n in 1u32..=60) {
        let s = SpinSector::from_spins(n).unwrap();
        let d = delta_populations(&s, &p).unwrap();
        prop_assert!(d.values.iter().sum::<f64>().abs() <= 1e-12);
        let k = d.values.len();
        for i in 0..k {
            prop_assert!((d.values[i] - d.values[k - 1 - i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn interference_work_is_odd_in_delta_gamma_y(p in params(), n in 1u32..=30) {
        let s = SpinSector::from_spins(n).unwrap();
        let t = transition_table_exact(&s).unwrap();
        let a = perturbative_work(&s, &p, &t).unwrap();
        let b = perturbative_work(&s, &mirrored_gamma_y(&p), &t).unwrap();
        prop_assert_eq!(a.w_xy, -b.w_xy);
        prop_assert_eq!(a.w_x, b.w_x);
    }

    #[test]
    fn exact_table_is_doubly_stochastic(twice_s in 1u32..=120) {
        let s = SpinSector::new(twice_s as i64).unwrap();
        let t = transition_table_exact(&s).unwrap();
        for v in t.row_sums().iter().chain(t.column_sums().iter()) {
            prop_assert!((v - 1.0).abs() <= 1e-10);
        }
        let d = s.dim();
        for i in 0..d {
            for j in 0..d {
                prop_assert!((t.at(i, j) - t.at(j, i)).abs() <= 1e-10);
                prop_assert!((t.at(i, j) - t.at(d - 1 - i, d - 1 - j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn squeezed_vacuum_is_even_and_normalised(r in 0.0f64..1.5) {
        let f = squeezed_vacuum_fock(r, 400).unwrap();
        prop_assert!(f.probs.iter().skip(1).step_by(2).all(|&p| p == 0.0));
        prop_assert!((f.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn sweep_is_deterministic() {
    let p = EngineParams::default();
    let a = sweep_cycle(&p, 1, 24, &ScalingMode::ALL).unwrap();
    let b = sweep_cycle(&p, 1, 24, &ScalingMode::ALL).unwrap();
    assert_eq!(a, b);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.w.to_bits(), y.w.to_bits());
    }
}

#[test]
fn sweep_rows_match_single_cycles() {
    let p = EngineParams::default().with_mode(ScalingMode::Extensive);
    let t = sweep_cycle(&p, 3, 9, &[ScalingMode::Extensive]).unwrap();
    for n in 3..=9 {
        let r = run_otto_cycle(&SpinSector::from_spins(n).unwrap(), &p).unwrap();
        let row = t.row(ScalingMode::Extensive, n).unwrap();
        assert_eq!(row.w, r.w);
        assert!(rel(row.q_in, r.q_in) == 0.0);
    }
}

#[test]
fn failing_size_is_reported() {
    let p = EngineParams {
        t_cold: -1.0,
        ..EngineParams::default()
    };
    assert!(sweep_cycle(&p, 1, 4, &ScalingMode::ALL).is_err());
}
