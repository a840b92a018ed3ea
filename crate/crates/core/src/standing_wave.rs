//! Quasi-static standing-wave model of two mutually coupled slaves.
//!
//! The pair oscillates where a standing wave with an integer number of loops
//! `N = round(2L/λ_M)` fits between the two facets. Away from exact resonance
//! the common frequency is pulled by a fraction of the free spectral range
//! `c/2L`, giving a sawtooth in `L` with period `λ_M/2`. Even `N` means the
//! slaves oscillate in phase, odd `N` means they are in antiphase.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::fmt_float;
use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Nominal coupling path length `L` (m).
    pub path_length: f64,
    /// Free-running wavelength `λ_M` (m).
    pub wavelength: f64,
    /// Fraction `κ ∈ (0, 1]` of the full frequency excursion realized.
    pub pull_factor: f64,
}

impl Default for CavityGeometry {
    /// 1550 mm coupling path at 1577.5 nm, ideal pulling.
    fn default() -> Self {
        Self {
            path_length: 1.55,
            wavelength: 1577.5e-9,
            pull_factor: 1.0,
        }
    }
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_length.is_finite() && self.path_length > 0.0) {
            return Err(Error::invalid("path_length", "must be positive"));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if self.path_length < 100.0 * self.wavelength {
            return Err(Error::invalid("path_length", "must be much longer than the wavelength"));
        }
        if !(self.pull_factor > 0.0 && self.pull_factor <= 1.0) {
            return Err(Error::invalid("pull_factor", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `Δν_FSR = c / 2L` at length `length`.
    pub fn free_spectral_range(&self, length: f64) -> f64 {
        SPEED_OF_LIGHT / (2.0 * length)
    }
}

/// Relative phase of the two slaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOrder {
    /// Relative phase 0.
    InPhase,
    /// Relative phase π.
    AntiPhase,
}

impl PhaseOrder {
    pub fn from_loop_count(loops: u64) -> Self {
        if loops.is_multiple_of(2) {
            PhaseOrder::InPhase
        } else {
            PhaseOrder::AntiPhase
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            PhaseOrder::InPhase => 0.0,
            PhaseOrder::AntiPhase => PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySelection {
    pub frequency_shift: f64,
    pub loop_count: u64,
    pub phase_order: PhaseOrder,
}

/// Oscillation frequency shift (Hz), loop count and phase order at path length `length`.
pub fn select_frequency(length: f64, g: &CavityGeometry) -> FrequencySelection {
    let loops_exact = 2.0 * length / g.wavelength;
    let loop_count = loops_exact.round();
    let frequency_shift = -g.pull_factor * g.free_spectral_range(length) * (loops_exact - loop_count);
    let loop_count = loop_count as u64;
    FrequencySelection {
        frequency_shift,
        loop_count,
        phase_order: PhaseOrder::from_loop_count(loop_count),
    }
}

/// How the swept coordinate maps to a path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCoordinate {
    /// The coordinate is the path length itself.
    PathLength,
    /// The coordinate is a mirror displacement `d` folded into the coupling
    /// path, so `L = L₀ + 2d` with `L₀` the geometry's nominal length.
    MirrorDisplacement,
}

impl SweepCoordinate {
    fn to_length(self, coordinate: f64, g: &CavityGeometry) -> f64 {
        match self {
            SweepCoordinate::PathLength => coordinate,
            SweepCoordinate::MirrorDisplacement => g.path_length + 2.0 * coordinate,
        }
    }

    fn coordinate_of(self, length: f64, g: &CavityGeometry) -> f64 {
        match self {
            SweepCoordinate::PathLength => length,
            SweepCoordinate::MirrorDisplacement => (length - g.path_length) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SawtoothPoint {
    pub coordinate: f64,
    pub path_length: f64,
    pub frequency_shift: f64,
    pub loop_count: u64,
    pub phase_order: PhaseOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SawtoothCurve {
    pub geometry: CavityGeometry,
    pub coordinate: SweepCoordinate,
    pub points: Vec<SawtoothPoint>,
    /// Coordinates inside the sweep where the loop count steps by one
    /// (`2L/λ_M` crossing a half-integer), in increasing order.
    pub boundaries: Vec<f64>,
}

impl SawtoothCurve {
    /// Number of completed sawtooth cycles, one per loop-count step.
    pub fn cycles(&self) -> usize {
        self.boundaries.len()
    }

    /// Largest minus smallest sampled frequency shift.
    pub fn peak_to_peak(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.frequency_shift), hi.max(p.frequency_shift))
            });
        hi - lo
    }

    /// Mean spacing between successive boundaries; `None` with fewer than two.
    pub fn period(&self) -> Option<f64> {
        let b = &self.boundaries;
        (b.len() >= 2).then(|| (b[b.len() - 1] - b[0]) / (b.len() - 1) as f64)
    }

    /// CSV `coordinate_m,freq_shift_hz,loop_count,phase_order` with the phase order in radians.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "coordinate_m,freq_shift_hz,loop_count,phase_order")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_float(p.coordinate),
                fmt_float(p.frequency_shift),
                p.loop_count,
                fmt_float(p.phase_order.radians())
            )?;
        }
        Ok(())
    }
}

/// Applies [`select_frequency`] at `steps` evenly spaced coordinates in `[start, stop]`.
pub fn sweep_path_length(
    start: f64,
    stop: f64,
    steps: usize,
    g: &CavityGeometry,
    coordinate: SweepCoordinate,
) -> Result<SawtoothCurve> {
    g.validate()?;
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(Error::invalid("sweep", "needs start < stop"));
    }
    if steps < 2 {
        return Err(Error::invalid("sweep", "needs at least two steps"));
    }
    let first_length = coordinate.to_length(start, g);
    if !(first_length > 0.0) {
        return Err(Error::invalid("sweep", "path length must stay positive"));
    }
    let span = stop - start;
    let points = (0..steps)
        .map(|k| {
            let c = if k == steps - 1 {
                stop
            } else {
                start + span * (k as f64 / (steps - 1) as f64)
            };
            let length = coordinate.to_length(c, g);
            let sel = select_frequency(length, g);
            SawtoothPoint {
                coordinate: c,
                path_length: length,
                frequency_shift: sel.frequency_shift,
                loop_count: sel.loop_count,
                phase_order: sel.phase_order,
            }
        })
        .collect::<Vec<_>>();

    // loop count steps from k to k+1 at 2L/λ = k + 1/2
    let first = points[0].loop_count;
    let last = points[steps - 1].loop_count;
    let boundaries = (first..last)
        .map(|k| coordinate.coordinate_of((k as f64 + 0.5) * g.wavelength / 2.0, g))
        .collect();
    Ok(SawtoothCurve {
        geometry: *g,
        coordinate,
        points,
        boundaries,
    })
}

/// Binary phase-order channel of a sweep: `(coordinate, relative phase ∈ {0, π})`.
pub fn phase_order_trace(curve: &SawtoothCurve) -> Vec<(f64, f64)> {
    curve
        .points
        .iter()
        .map(|p| (p.coordinate, p.phase_order.radians()))
        .collect()
}

/// Number of value changes between consecutive entries of a phase-order trace.
pub fn count_transitions(trace: &[(f64, f64)]) -> usize {
    trace.windows(2).filter(|w| w[0].1 != w[1].1).count()
}
