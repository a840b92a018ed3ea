use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use injection_ising::locking::{
    detuning_from_phase, is_stable, locking_bandwidth, locking_curve, locking_phase, FrequencySweep, Injection,
    LockingParams,
};
use injection_ising::Error;
use proptest::prelude::*;

fn field(alpha: f64, wq: f64, wqe: f64) -> LockingParams {
    LockingParams {
        injection: Injection::Field {
            injection_amplitude: 2.0e8,
            internal_amplitude: 100.0,
        },
        photon_decay_rate: wq,
        external_decay_rate: wqe,
        master_frequency: 1.2e15,
        linewidth_factor: alpha,
    }
}

/// Largest detuning with a locked solution, found by bisection on success.
fn numerical_half_width(p: &LockingParams) -> f64 {
    let (mut lo, mut hi) = (0.0, 10.0 * p.half_width());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if locking_phase(mid, p).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn band_edge_matches_bandwidth_when_external_rate_equals_decay_rate() {
    for p in [
        field(0.0, 1e12, 1e12),
        LockingParams {
            injection: Injection::Power {
                input_w: 3e-6,
                output_w: 1e-3,
            },
            ..field(0.0, 2e11, 2e11)
        },
    ] {
        let edge = numerical_half_width(&p);
        let band = 2.0 * PI * locking_bandwidth(&p);
        assert!((edge - band).abs() <= 1e-9 * band, "{edge} vs {band}");
    }
}

#[test]
fn worked_example_with_linewidth_factor() {
    let p = field(0.5, 1e12, 4e11);
    let expected = (2f64.sqrt() / 2.0) * 1.5 * (2.0e8 / 100.0) * 4e11f64.sqrt();
    let got = detuning_from_phase(FRAC_PI_4, &p);
    assert!((got - expected).abs() <= 1e-12 * expected);
}

#[test]
fn outside_the_band_is_unlocked() {
    let p = field(0.0, 1e12, 1e12);
    let k = p.half_width();
    assert!(matches!(locking_phase(1.01 * k, &p), Err(Error::Unlocked { .. })));
    assert!(matches!(locking_phase(-1.01 * k, &p), Err(Error::Unlocked { .. })));
    assert!((locking_phase(k, &p).unwrap() - FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn observed_fixture_locks_over_its_bandwidth() {
    let p = LockingParams::observed_fixture();
    assert!((locking_bandwidth(&p) - 1.3e9).abs() < 1.0);
    let sweep = FrequencySweep {
        excursion_hz: 4.5e9,
        points: 4501,
    };
    let curve = locking_curve(&sweep, &p, 0.8).unwrap();
    let locked = curve.iter().filter(|c| c.locked()).count() as f64 / curve.len() as f64;
    assert!((locked - 1.3 / 4.5).abs() < 2.0 / 4501.0, "{locked}");
    // brightest where the slave follows the master in phase
    let mid = &curve[2250];
    assert_eq!(mid.detuning_hz, 0.0);
    assert!((mid.intensity - 0.9).abs() < 1e-12);
    for c in curve.iter().filter(|c| !c.locked()) {
        assert_eq!(c.intensity, 0.5);
    }
}

proptest! {
    #[test]
    fn antisymmetric_without_linewidth_factor(frac in -0.999f64..0.999) {
        let p = field(0.0, 1e12, 1e12);
        let d = frac * p.half_width();
        prop_assert_eq!(locking_phase(-d, &p).unwrap(), -locking_phase(d, &p).unwrap());
    }

    #[test]
    fn monotone_in_detuning(alpha in 0.0f64..4.0, a in -0.99f64..0.99, b in -0.99f64..0.99) {
        prop_assume!((a - b).abs() > 1e-6);
        let p = field(alpha, 1e12, 1e12);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let phi_lo = locking_phase(lo * p.half_width(), &p).unwrap();
        let phi_hi = locking_phase(hi * p.half_width(), &p).unwrap();
        prop_assert!(phi_lo < phi_hi);
    }

    #[test]
    fn root_is_stable_and_reproduces_detuning(alpha in -3.0f64..3.0, frac in -0.99f64..0.99) {
        let p = field(alpha, 1e12, 5e11);
        let d = frac * p.half_width();
        let phi = locking_phase(d, &p).unwrap();
        prop_assert!(is_stable(phi, &p));
        prop_assert!((detuning_from_phase(phi, &p) - d).abs() <= 1e-9 * p.half_width());
    }
}
