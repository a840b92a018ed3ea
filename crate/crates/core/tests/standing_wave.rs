use injection_ising::standing_wave::{
    count_transitions, phase_order_trace, select_frequency, sweep_path_length, CavityGeometry, PhaseOrder,
    SweepCoordinate, SPEED_OF_LIGHT,
};
use proptest::prelude::*;

fn geometry(kappa: f64) -> CavityGeometry {
    CavityGeometry {
        pull_factor: kappa,
        ..CavityGeometry::default()
    }
}

#[test]
fn observed_numbers() {
    let g = CavityGeometry::default();
    let fsr = SPEED_OF_LIGHT / (2.0 * 1.55);
    assert!((g.free_spectral_range(1.55) - fsr).abs() < 1e-6);
    assert!((fsr / 96.8e6 - 1.0).abs() < 1e-3);

    let quarter = g.wavelength / 4.0;
    let curve = sweep_path_length(0.0, 21.0 * quarter, 42_001, &g, SweepCoordinate::MirrorDisplacement).unwrap();
    assert_eq!(curve.cycles(), 21);
    assert_eq!(count_transitions(&phase_order_trace(&curve)), 21);
    assert!((curve.period().unwrap() / quarter - 1.0).abs() < 1e-6);

    let weak = sweep_path_length(0.0, quarter, 100_001, &geometry(0.31), SweepCoordinate::MirrorDisplacement).unwrap();
    assert!((weak.peak_to_peak() / 30e6 - 1.0).abs() < 0.05);
}

#[test]
fn resonant_lengths_have_no_shift() {
    let g = CavityGeometry::default();
    let n0 = (2.0 * g.path_length / g.wavelength).round() as u64;
    for n in n0..n0 + 50 {
        let sel = select_frequency(n as f64 * g.wavelength / 2.0, &g);
        assert_eq!(sel.loop_count, n);
        // 2L/λ is an integer up to one rounding of the product
        assert!(sel.frequency_shift.abs() <= g.free_spectral_range(g.path_length) * 1e-9);
    }
}

proptest! {
    #[test]
    fn half_wavelength_shift_flips_order(length in 0.5f64..3.0, kappa in 0.1f64..1.0) {
        let g = geometry(kappa);
        let x = 2.0 * length / g.wavelength;
        prop_assume!((x - x.floor() - 0.5).abs() > 1e-3);
        let a = select_frequency(length, &g);
        let b = select_frequency(length + g.wavelength / 2.0, &g);
        prop_assert_eq!(b.loop_count, a.loop_count + 1);
        prop_assert_ne!(a.phase_order, b.phase_order);
        // the free spectral range itself moves by λ/2L between the two lengths
        let scale = kappa * g.free_spectral_range(length);
        prop_assert!((a.frequency_shift - b.frequency_shift).abs() <= 1e-6 * scale);
    }

    #[test]
    fn shift_vanishes_only_on_resonance(length in 0.5f64..3.0) {
        let g = CavityGeometry::default();
        let x = 2.0 * length / g.wavelength;
        prop_assume!((x - x.round()).abs() > 1e-6);
        prop_assert!(select_frequency(length, &g).frequency_shift != 0.0);
    }

    #[test]
    fn sweeps_stay_within_half_the_spacing(
        start in 0.5f64..3.0,
        span in 1e-7f64..1e-5,
        points in 2usize..500,
        kappa in 0.0f64..1.0,
    ) {
        let g = geometry(kappa);
        let curve = sweep_path_length(start, start + span, points, &g, SweepCoordinate::PathLength).unwrap();
        for p in &curve.points {
            let bound = kappa * SPEED_OF_LIGHT / (4.0 * p.path_length) * (1.0 + 1e-12);
            prop_assert!(p.frequency_shift.abs() <= bound);
            let parity = if p.loop_count % 2 == 0 { PhaseOrder::InPhase } else { PhaseOrder::AntiPhase };
            prop_assert_eq!(p.phase_order, parity);
        }
    }
}
