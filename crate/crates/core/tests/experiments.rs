use injection_ising::dynamics::{IntegrationSettings, NoiseModel};
use injection_ising::experiments::{
    coupling_phase_sweep, linspace, order_transitions, run_ensemble, sweep_coupling_ratio, ExperimentSpec, RatioAxis,
    Regime,
};
use injection_ising::ising::IsingProblem;
use injection_ising::standing_wave::{CavityGeometry, PhaseOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn single_free_laser_stays_pinned() {
    for eta in [0.0, 0.04] {
        let mut spec = ExperimentSpec::two_site(1.0, eta, 8, 1);
        spec.problem = IsingProblem::new(1).unwrap();
        let r = run_ensemble(&spec).unwrap();
        assert_eq!(r.success_fraction, None);
        assert_eq!(r.regime, Regime::Pinned);
        assert_eq!(r.mean_abs_dphi, None);
        for o in &r.outcomes {
            assert!(o.final_phases[0].abs() < 1e-3);
            assert!(!o.readout.all_resolved());
        }
    }
}

#[test]
fn eta_sweep_passes_through_all_three_regimes() {
    let spec = ExperimentSpec::two_site(1.0, 0.04, 12, 2);
    let rows = sweep_coupling_ratio(&spec, RatioAxis::Eta, &[0.04, 0.005, 0.01]).unwrap();
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert_eq!(values, vec![0.005, 0.01, 0.04]);
    let regimes: Vec<Regime> = rows.iter().map(|r| r.regime).collect();
    assert_eq!(regimes, vec![Regime::Pinned, Regime::Intermediate, Regime::Bifurcated]);
    assert_eq!(rows[2].success_fraction, Some(1.0));
    assert_eq!(rows[0].success_fraction, Some(0.0));
}

#[test]
fn regime_never_falls_back_as_eta_grows() {
    let spec = ExperimentSpec::two_site(1.0, 0.04, 6, 3);
    let rows = sweep_coupling_ratio(&spec, RatioAxis::Eta, &linspace(0.0025, 0.05, 9)).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].regime <= w[1].regime, "{:?} then {:?}", w[0], w[1]);
    }
    let dphi: Vec<f64> = rows.iter().map(|r| r.mean_abs_dphi.unwrap()).collect();
    for w in dphi.windows(2) {
        assert!(w[0] <= w[1] + 1e-9, "{dphi:?}");
    }
}

#[test]
fn strong_master_pins_the_pair() {
    let spec = ExperimentSpec::two_site(1.0, 0.04, 10, 4);
    let rows = sweep_coupling_ratio(&spec, RatioAxis::Zeta, &[0.005, 0.05]).unwrap();
    assert_eq!(rows[0].regime, Regime::Bifurcated);
    assert_eq!(rows[1].regime, Regime::Pinned);
}

#[test]
fn no_injection_and_no_coupling_is_flagged() {
    let mut spec = ExperimentSpec::two_site(1.0, 0.0, 20, 5);
    spec.params.master_atten = 0.0;
    spec.noise = NoiseModel::langevin();
    let r = run_ensemble(&spec).unwrap();
    assert!(r.unconstrained);
    assert_eq!(r.regime, Regime::Intermediate);
    assert!(r.std_abs_dphi.unwrap() > 0.05);
}

#[test]
fn coupling_phase_sweep_is_a_square_wave() {
    let mut spec = ExperimentSpec::two_site(1.0, 0.04, 6, 6);
    spec.settings = IntegrationSettings::new(10e-9, 1e-13, 1e-11);
    let g = CavityGeometry::default();
    let thetas = linspace(0.0, 4.0 * std::f64::consts::PI, 17);
    let rows = coupling_phase_sweep(&spec, &thetas, &g).unwrap();
    assert_eq!(order_transitions(&rows), 4);
    for r in &rows {
        assert_eq!(r.observed, r.predicted);
        match r.predicted {
            PhaseOrder::InPhase => assert!(r.mean_abs_dphi.unwrap() < 0.1 * std::f64::consts::PI),
            PhaseOrder::AntiPhase => assert!(r.mean_abs_dphi.unwrap() > 0.9 * std::f64::consts::PI),
        }
    }
}

#[test]
fn successes_sit_at_the_exact_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in [2, 3] {
        let pairs: Vec<(usize, usize, f64)> = (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .map(|(a, b)| (a, b, rng.gen_range(-1.0..1.0)))
            .collect();
        let mut spec = ExperimentSpec::two_site(1.0, 0.04, 10, 8);
        spec.problem = IsingProblem::from_parts(m, pairs, vec![0.0; m]).unwrap();
        let r = run_ensemble(&spec).unwrap();
        let min = r.ground_state.as_ref().unwrap().minimum_energy;
        for o in r.outcomes.iter().filter(|o| o.success == Some(true)) {
            assert_eq!(spec.problem.energy(&o.readout.spins).unwrap(), min);
        }
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let mut spec = ExperimentSpec::two_site(1.0, 0.01, 8, 9);
    spec.noise = NoiseModel::langevin();
    spec.settings = IntegrationSettings::new(2e-9, 1e-13, 1e-11);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = pool.install(|| run_ensemble(&spec)).unwrap();
        serde_json::to_vec(&r).unwrap()
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}
