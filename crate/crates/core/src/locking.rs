//! Single-laser injection locking.
//!
//! A slave laser injected by a master detuned by `Δω = ω - ω_r0` locks at the
//! phase offset `φ₀` solving
//!
//! ```text
//! Δω = (sin φ₀ + α cos φ₀) (F₀/A₀) √(ω/Q_e)
//! ```
//!
//! inside the locking range, and the full-width locking bandwidth is
//! `Δf_LB = (1/2π)(ω/Q) √(P_in/P_out)` with `P_in = ħω|F₀|²` and
//! `P_out = ħω|A₀|² ω/Q_e`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{fmt_float, LaserParams};
use crate::error::{Error, Result};
use crate::standing_wave::SPEED_OF_LIGHT;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Residual tolerance of the numerical root, relative to the band-edge scale.
const ROOT_TOLERANCE: f64 = 1e-12;

/// Injection strength given either as field amplitudes or as powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    /// `F₀` in √(photons/s) and `A₀` in √photons.
    Field {
        injection_amplitude: f64,
        internal_amplitude: f64,
    },
    /// Input and output powers in watts.
    Power { input_w: f64, output_w: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockingParams {
    pub injection: Injection,
    /// ω/Q (s⁻¹).
    pub photon_decay_rate: f64,
    /// ω/Q_e (s⁻¹).
    pub external_decay_rate: f64,
    /// Master angular frequency ω (rad/s).
    pub master_frequency: f64,
    /// α.
    pub linewidth_factor: f64,
}

impl LockingParams {
    /// Master wavelength of the two-slave experiment, 1577.5 nm.
    pub const MASTER_WAVELENGTH: f64 = 1577.5e-9;

    /// Parameters whose locked window spans 1.3 GHz, for equal 1.12 mW
    /// slave output power and ω/Q = 1e12 s⁻¹.
    ///
    /// The full locked width equals `Δf_LB` when `ω/Q_e = (ω/Q)/2`, which is
    /// the choice made here.
    pub fn observed_fixture() -> Self {
        let photon_decay_rate = 1e12;
        let bandwidth_hz = 1.3e9;
        let ratio = 2.0 * PI * bandwidth_hz / photon_decay_rate;
        let output_w = 1.12e-3;
        Self {
            injection: Injection::Power {
                input_w: output_w * ratio * ratio,
                output_w,
            },
            photon_decay_rate,
            external_decay_rate: photon_decay_rate / 2.0,
            master_frequency: 2.0 * PI * SPEED_OF_LIGHT / Self::MASTER_WAVELENGTH,
            linewidth_factor: 0.0,
        }
    }

    /// The locking problem seen by one slave of the laser network: injection
    /// field `(ω/Q)√n_M ζ / √(ω/Q_e)` against internal amplitude `amplitude`.
    pub fn from_laser(params: &LaserParams, amplitude: f64) -> Self {
        let wq = params.photon_decay_rate;
        Self {
            injection: Injection::Field {
                injection_amplitude: wq * params.master_photon_number.sqrt() * params.master_atten
                    / params.external_decay_rate.sqrt(),
                internal_amplitude: amplitude,
            },
            photon_decay_rate: wq,
            external_decay_rate: params.external_decay_rate,
            master_frequency: 2.0 * PI * SPEED_OF_LIGHT / Self::MASTER_WAVELENGTH,
            linewidth_factor: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = match self.injection {
            Injection::Field {
                injection_amplitude,
                internal_amplitude,
            } => (injection_amplitude, internal_amplitude),
            Injection::Power { input_w, output_w } => (input_w, output_w),
        };
        for (name, v) in [
            ("injection", a),
            ("injection", b),
            ("photon_decay_rate", self.photon_decay_rate),
            ("external_decay_rate", self.external_decay_rate),
            ("master_frequency", self.master_frequency),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !self.linewidth_factor.is_finite() {
            return Err(Error::invalid("linewidth_factor", "must be finite"));
        }
        Ok(())
    }

    /// `F₀ / A₀`.
    pub fn field_ratio(&self) -> f64 {
        match self.injection {
            Injection::Field {
                injection_amplitude,
                internal_amplitude,
            } => injection_amplitude / internal_amplitude,
            Injection::Power { input_w, output_w } => {
                (input_w / output_w).sqrt() * self.external_decay_rate.sqrt()
            }
        }
    }

    /// `P_in / P_out`.
    pub fn power_ratio(&self) -> f64 {
        match self.injection {
            Injection::Power { input_w, output_w } => input_w / output_w,
            Injection::Field { .. } => {
                let r = self.field_ratio();
                r * r / self.external_decay_rate
            }
        }
    }

    /// `(P_in, P_out)` in watts.
    pub fn powers(&self) -> (f64, f64) {
        match self.injection {
            Injection::Power { input_w, output_w } => (input_w, output_w),
            Injection::Field {
                injection_amplitude,
                internal_amplitude,
            } => {
                let hw = HBAR * self.master_frequency;
                (
                    hw * injection_amplitude * injection_amplitude,
                    hw * internal_amplitude * internal_amplitude * self.external_decay_rate,
                )
            }
        }
    }

    /// `(F₀/A₀) √(ω/Q_e)`: the detuning at `φ₀ = π/2` when `α = 0`.
    pub fn edge_scale(&self) -> f64 {
        self.field_ratio() * self.external_decay_rate.sqrt()
    }

    /// Half-width of the locking range in rad/s, `√(1+α²)` times the edge scale.
    pub fn half_width(&self) -> f64 {
        self.edge_scale() * self.linewidth_factor.hypot(1.0)
    }
}

/// `Δω` for a locked phase `φ₀`.
pub fn detuning_from_phase(phase: f64, p: &LockingParams) -> f64 {
    (phase.sin() + p.linewidth_factor * phase.cos()) * p.edge_scale()
}

/// d(dφ/dt)/dφ for the locking equation `dφ/dt = Δω - K (sin φ + α cos φ)`.
pub fn drift_slope(phase: f64, p: &LockingParams) -> f64 {
    -p.edge_scale() * (phase.cos() - p.linewidth_factor * phase.sin())
}

/// A locked phase is stable when the drift decreases through it.
pub fn is_stable(phase: f64, p: &LockingParams) -> bool {
    drift_slope(phase, p) < 0.0
}

/// The stable locked phase for detuning `Δω`.
///
/// For `α = 0` this is `arcsin(Δω / K)`. Otherwise the root is found by
/// safeguarded Newton iteration on the stable branch
/// `(-π/2 - atan α, π/2 - atan α)`, which contains `φ₀(0) = -atan α` and on
/// which the right-hand side increases monotonically.
pub fn locking_phase(detuning: f64, p: &LockingParams) -> Result<f64> {
    let half_width = p.half_width();
    if !(detuning.abs() <= half_width) {
        return Err(Error::Unlocked {
            detuning,
            half_width,
        });
    }
    let k = p.edge_scale();
    let alpha = p.linewidth_factor;
    if alpha == 0.0 {
        return Ok((detuning / k).clamp(-1.0, 1.0).asin());
    }
    let offset = alpha.atan();
    let residual = |phi: f64| (phi.sin() + alpha * phi.cos()) * k - detuning;
    let slope = |phi: f64| (phi.cos() - alpha * phi.sin()) * k;
    let (mut lo, mut hi) = (-FRAC_PI_2 - offset, FRAC_PI_2 - offset);
    if detuning == half_width {
        return Ok(hi);
    }
    if detuning == -half_width {
        return Ok(lo);
    }
    let mut phi = -offset;
    for _ in 0..200 {
        let r = residual(phi);
        if r.abs() <= ROOT_TOLERANCE * k {
            return Ok(phi);
        }
        if r < 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let d = slope(phi);
        let newton = phi - r / d;
        phi = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(phi)
}

/// Full-width locking bandwidth in Hz, `(1/2π)(ω/Q)√(P_in/P_out)`.
pub fn locking_bandwidth(p: &LockingParams) -> f64 {
    p.photon_decay_rate * p.power_ratio().sqrt() / (2.0 * PI)
}

/// Linear master-frequency ramp, centred on zero detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    /// Peak-to-peak excursion of the master frequency (Hz).
    pub excursion_hz: f64,
    pub points: usize,
}

impl FrequencySweep {
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![0.0];
        }
        (0..n)
            .map(|k| self.excursion_hz * (k as f64 / (n - 1) as f64 - 0.5))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockingPoint {
    pub detuning_hz: f64,
    /// Locked phase, `None` outside the locking range.
    pub phase: Option<f64>,
    /// Normalized master/slave interference intensity `(1 + V cos φ₀)/2`;
    /// the fringe average `1/2` when unlocked.
    pub intensity: f64,
}

impl LockingPoint {
    pub fn locked(&self) -> bool {
        self.phase.is_some()
    }
}

/// Phase and interference intensity across a frequency ramp.
pub fn locking_curve(sweep: &FrequencySweep, p: &LockingParams, visibility: f64) -> Result<Vec<LockingPoint>> {
    p.validate()?;
    if sweep.points == 0 || !(sweep.excursion_hz.is_finite() && sweep.excursion_hz > 0.0) {
        return Err(Error::invalid("sweep", "needs at least one point and a positive excursion"));
    }
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::invalid("visibility", "must lie in [0, 1]"));
    }
    Ok(sweep
        .frequencies()
        .into_iter()
        .map(|df| {
            let phase = locking_phase(2.0 * PI * df, p).ok();
            let intensity = phase.map_or(0.5, |phi| 0.5 * (1.0 + visibility * phi.cos()));
            LockingPoint {
                detuning_hz: df,
                phase,
                intensity,
            }
        })
        .collect())
}

/// CSV `df_hz,phi_rad,intensity,locked`; unlocked rows leave `phi_rad` empty.
pub fn write_locking_csv<W: Write>(points: &[LockingPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "df_hz,phi_rad,intensity,locked")?;
    for pt in points {
        let phi = pt.phase.map(fmt_float).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            fmt_float(pt.detuning_hz),
            phi,
            fmt_float(pt.intensity),
            u8::from(pt.locked())
        )?;
    }
    Ok(())
}
