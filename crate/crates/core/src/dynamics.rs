//! c-number Langevin equations for slave lasers under master injection.
//!
//! For slave laser `i`, with the master phase as the zero reference:
//!
//! ```text
//! dA_i/dt = -1/2 [ω/Q - E_i] A_i + (ω/Q) √n_M (ζ cos φ_i - η λ_i sin φ_i)
//!           - (ω/Q) Σ_{j≠i} (η/2) J_ij A_j cos(φ_j - φ_i)                  + F_A
//! dφ_i/dt = (1/A_i) { (ω/Q) √n_M (-ζ sin φ_i - η λ_i cos φ_i)
//!           - (ω/Q) Σ_{j≠i} (η/2) J_ij A_j sin(φ_j - φ_i) } + δ_i          + F_φ
//! dN_i/dt = P - (N_i/τ_sp) {1 + β (A_i² + 1)}                            + F_N
//! ```
//!
//! where `E_i = β N_i / τ_sp` and `δ_i` is the free-running detuning of the
//! slave from the master. The equations are integrated with explicit
//! Euler-Maruyama.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingProblem;

/// Largest admissible `dt · ω/Q`.
pub const STABILITY_LIMIT: f64 = 0.5;

/// Amplitude floor as a fraction of the free-running steady-state amplitude.
pub const AMPLITUDE_FLOOR_FRACTION: f64 = 1e-6;

/// Default standard deviation of the initial phase kick, radians.
pub const DEFAULT_KICK_SIGMA: f64 = 1e-3;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let y = phi.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Physical constants of the slave lasers and the network coupling strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    /// ω/Q, cavity photon decay rate (s⁻¹).
    pub photon_decay_rate: f64,
    /// ω/Q_e, external coupling rate (s⁻¹).
    pub external_decay_rate: f64,
    /// τ_sp, spontaneous emission lifetime (s).
    pub spont_lifetime: f64,
    /// β, fraction of spontaneous emission coupled into the lasing mode.
    pub spont_coupling: f64,
    /// ζ, attenuation of the master injection.
    pub master_atten: f64,
    /// η, common attenuation of the Ising and Zeeman terms.
    pub coupling_atten: f64,
    /// α, linewidth enhancement factor. Only the locking algebra uses it.
    pub linewidth_factor: f64,
    /// P, pump rate (carriers/s).
    pub pump_rate: f64,
    /// n_M, master photon number.
    pub master_photon_number: f64,
    /// Free-running detuning per laser (rad/s). Empty means all zero.
    pub self_detuning: Vec<f64>,
}

impl LaserParams {
    /// Operating point used for the phase-bifurcation runs: ω/Q = 1e12 s⁻¹,
    /// τ_sp = 1 ns, ζ = 0.005, β = 1e-4, pumped at twice threshold, with the
    /// master photon number equal to the free-running slave photon number.
    pub fn bifurcation_defaults(coupling_atten: f64) -> Self {
        let mut p = Self {
            photon_decay_rate: 1e12,
            external_decay_rate: 1e12,
            spont_lifetime: 1e-9,
            spont_coupling: 1e-4,
            master_atten: 0.005,
            coupling_atten,
            linewidth_factor: 0.0,
            pump_rate: 0.0,
            master_photon_number: 0.0,
            self_detuning: Vec::new(),
        };
        p.pump_rate = 2.0 * p.threshold_pump_rate();
        p.master_photon_number = p.free_running_photon_number();
        p
    }

    /// Carrier number at which the spontaneous emission rate equals the photon decay rate.
    pub fn threshold_carriers(&self) -> f64 {
        self.photon_decay_rate * self.spont_lifetime / self.spont_coupling
    }

    /// `P_th = N_th / τ_sp = (ω/Q) / β`.
    pub fn threshold_pump_rate(&self) -> f64 {
        self.threshold_carriers() / self.spont_lifetime
    }

    /// Photon number `A_ss²` of a free-running slave (no master, no coupling).
    /// Zero below threshold.
    pub fn free_running_photon_number(&self) -> f64 {
        let n = self.threshold_carriers();
        let a2 = (self.pump_rate * self.spont_lifetime / n - 1.0) / self.spont_coupling - 1.0;
        a2.max(0.0)
    }

    /// `(A_ss, N_ss)` of a free-running slave: `E_CV = ω/Q` and zero carrier drift.
    pub fn free_running_steady_state(&self) -> (f64, f64) {
        (self.free_running_photon_number().sqrt(), self.threshold_carriers())
    }

    pub fn detuning(&self, i: usize) -> f64 {
        self.self_detuning.get(i).copied().unwrap_or(0.0)
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        let positive = [
            ("photon_decay_rate", self.photon_decay_rate),
            ("external_decay_rate", self.external_decay_rate),
            ("spont_lifetime", self.spont_lifetime),
            ("pump_rate", self.pump_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.spont_coupling > 0.0 && self.spont_coupling <= 1.0) {
            return Err(Error::invalid(
                "spont_coupling",
                format!("must lie in (0, 1], got {}", self.spont_coupling),
            ));
        }
        let non_negative = [
            ("master_atten", self.master_atten),
            ("coupling_atten", self.coupling_atten),
            ("master_photon_number", self.master_photon_number),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be non-negative and finite, got {v}")));
            }
        }
        if !self.linewidth_factor.is_finite() {
            return Err(Error::invalid("linewidth_factor", "must be finite"));
        }
        if !self.self_detuning.is_empty() && self.self_detuning.len() != sites {
            return Err(Error::invalid(
                "self_detuning",
                format!("has {} entries for {sites} lasers", self.self_detuning.len()),
            ));
        }
        if self.self_detuning.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("self_detuning", "must be finite"));
        }
        if self.free_running_photon_number() <= 0.0 {
            return Err(Error::invalid("pump_rate", "slave lasers are below threshold"));
        }
        Ok(())
    }
}

/// How Langevin forces are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Deterministic integration.
    Off,
    /// Diffusion per unit time: amplitude `E_CV/2`, phase `E_CV/(2A²)`,
    /// carriers `N/τ_sp + P`, each multiplied by its scale.
    Langevin {
        amplitude_scale: f64,
        phase_scale: f64,
        carrier_scale: f64,
    },
    /// No diffusion; each phase receives one Gaussian kick of `sigma`
    /// radians at `t = 0` to break the symmetry of the initial state.
    SymmetryBreaking { sigma: f64 },
}

impl NoiseModel {
    pub fn langevin() -> Self {
        NoiseModel::Langevin {
            amplitude_scale: 1.0,
            phase_scale: 1.0,
            carrier_scale: 1.0,
        }
    }

    pub fn kick() -> Self {
        NoiseModel::SymmetryBreaking {
            sigma: DEFAULT_KICK_SIGMA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub model: NoiseModel,
    pub seed: u64,
}

impl NoiseParams {
    pub fn off() -> Self {
        Self {
            model: NoiseModel::Off,
            seed: 0,
        }
    }

    pub fn enabled(&self) -> bool {
        !matches!(self.model, NoiseModel::Off)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// `(amplitude, phase, carrier)` diffusion coefficients per unit time.
    pub fn diffusion(&self, amplitude: f64, carriers: f64, params: &LaserParams) -> (f64, f64, f64) {
        match self.model {
            NoiseModel::Langevin {
                amplitude_scale,
                phase_scale,
                carrier_scale,
            } => {
                let e_cv = params.spont_coupling * carriers / params.spont_lifetime;
                (
                    amplitude_scale * e_cv / 2.0,
                    phase_scale * e_cv / (2.0 * amplitude * amplitude),
                    carrier_scale * (carriers / params.spont_lifetime + params.pump_rate),
                )
            }
            _ => (0.0, 0.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.model {
            NoiseModel::Off => Ok(()),
            NoiseModel::Langevin {
                amplitude_scale,
                phase_scale,
                carrier_scale,
            } => {
                if [amplitude_scale, phase_scale, carrier_scale]
                    .iter()
                    .all(|s| s.is_finite() && *s >= 0.0)
                {
                    Ok(())
                } else {
                    Err(Error::invalid("noise", "diffusion scales must be non-negative"))
                }
            }
            NoiseModel::SymmetryBreaking { sigma } => {
                if sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("noise", "kick sigma must be non-negative"))
                }
            }
        }
    }
}

/// Amplitudes, phases and carrier numbers of every laser at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub time: f64,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub carriers: Vec<f64>,
}

impl NetworkState {
    /// Every laser at the free-running steady state with phase zero.
    pub fn initial(params: &LaserParams, lasers: usize) -> Self {
        let (a, n) = params.free_running_steady_state();
        Self {
            time: 0.0,
            amplitude: vec![a; lasers],
            phase: vec![0.0; lasers],
            carriers: vec![n; lasers],
        }
    }

    pub fn lasers(&self) -> usize {
        self.amplitude.len()
    }

    /// Wrapped `φ_i - φ_j`.
    pub fn relative_phase(&self, i: usize, j: usize) -> f64 {
        wrap_phase(self.phase[i] - self.phase[j])
    }

    fn check_shape(&self, lasers: usize) -> Result<()> {
        if self.amplitude.len() != lasers || self.phase.len() != lasers || self.carriers.len() != lasers
        {
            return Err(Error::Contract(format!(
                "state vectors do not all have length {lasers}"
            )));
        }
        Ok(())
    }
}

/// Sampled time series of the network state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_interval: f64,
    pub samples: Vec<NetworkState>,
    /// Pairs `(i, j)` whose relative phase is tracked.
    pub pairs: Vec<(usize, usize)>,
    /// `relative_phases[k][p]` is wrapped `φ_i - φ_j` for pair `p` at sample `k`.
    pub relative_phases: Vec<Vec<f64>>,
    /// Steps on which some amplitude was raised to the floor.
    pub amplitude_clamps: u64,
    /// Steps on which some carrier number was raised to zero.
    pub carrier_clamps: u64,
}

impl Trajectory {
    fn new(sample_interval: f64, pairs: Vec<(usize, usize)>) -> Self {
        Self {
            sample_interval,
            samples: Vec::new(),
            pairs,
            relative_phases: Vec::new(),
            amplitude_clamps: 0,
            carrier_clamps: 0,
        }
    }

    fn record(&mut self, state: &NetworkState) {
        self.relative_phases.push(
            self.pairs
                .iter()
                .map(|&(i, j)| state.relative_phase(i, j))
                .collect(),
        );
        self.samples.push(state.clone());
    }

    pub fn final_state(&self) -> &NetworkState {
        self.samples.last().expect("trajectory holds at least one sample")
    }

    /// CSV with header `t,A_0,phi_0,N_0,...` and one `dphi_i_j` column per tracked pair.
    /// Floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let lasers = self.samples.first().map_or(0, NetworkState::lasers);
        let mut header = vec!["t".to_string()];
        for i in 0..lasers {
            header.push(format!("A_{i}"));
            header.push(format!("phi_{i}"));
            header.push(format!("N_{i}"));
        }
        for (i, j) in &self.pairs {
            header.push(format!("dphi_{i}_{j}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for (state, rel) in self.samples.iter().zip(&self.relative_phases) {
            let mut row = vec![fmt_float(state.time)];
            for i in 0..lasers {
                row.push(fmt_float(state.amplitude[i]));
                row.push(fmt_float(state.phase[i]));
                row.push(fmt_float(state.carriers[i]));
            }
            row.extend(rel.iter().map(|&v| fmt_float(v)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Time step, duration and sampling of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub duration: f64,
    pub dt: f64,
    pub sample_interval: f64,
}

impl IntegrationSettings {
    /// `dt = 0.1 / (ω/Q)` for the default 1e12 s⁻¹ decay rate.
    pub fn new(duration: f64, dt: f64, sample_interval: f64) -> Self {
        Self {
            duration,
            dt,
            sample_interval,
        }
    }

    /// `(steps_per_sample, sample_count)`.
    pub fn schedule(&self) -> Result<(u64, usize)> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.sample_interval >= self.dt) {
            return Err(Error::invalid("sample_interval", "must be at least dt"));
        }
        if !(self.duration >= self.sample_interval) {
            return Err(Error::invalid("duration", "must be at least one sample interval"));
        }
        let ratio = self.sample_interval / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio {
            return Err(Error::invalid(
                "sample_interval",
                format!("must be an integer multiple of dt (ratio {ratio})"),
            ));
        }
        let intervals = (self.duration / self.sample_interval + 1e-9).floor();
        Ok((steps as u64, intervals as usize + 1))
    }
}

/// Coupled slave lasers: validated parameters plus the problem's adjacency.
#[derive(Debug, Clone)]
pub struct LaserNetwork {
    params: LaserParams,
    zeeman: Vec<f64>,
    neighbours: Vec<Vec<(usize, f64)>>,
    amplitude_floor: f64,
    sqrt_master: f64,
}

impl LaserNetwork {
    pub fn new(params: LaserParams, problem: &IsingProblem) -> Result<Self> {
        let m = problem.sites();
        params.validate(m)?;
        let mut neighbours = vec![Vec::new(); m];
        for (i, j, v) in problem.couplings() {
            neighbours[i].push((j, v));
            neighbours[j].push((i, v));
        }
        for list in &mut neighbours {
            list.sort_by_key(|&(j, _)| j);
        }
        let amplitude_floor = AMPLITUDE_FLOOR_FRACTION * params.free_running_photon_number().sqrt();
        let sqrt_master = params.master_photon_number.sqrt();
        Ok(Self {
            params,
            zeeman: problem.zeeman().to_vec(),
            neighbours,
            amplitude_floor,
            sqrt_master,
        })
    }

    pub fn params(&self) -> &LaserParams {
        &self.params
    }

    pub fn lasers(&self) -> usize {
        self.zeeman.len()
    }

    pub fn amplitude_floor(&self) -> f64 {
        self.amplitude_floor
    }

    /// Deterministic part of `dA_i/dt`.
    pub fn amplitude_drift(&self, state: &NetworkState, i: usize) -> f64 {
        let p = &self.params;
        let wq = p.photon_decay_rate;
        let (a, phi, n) = (state.amplitude[i], state.phase[i], state.carriers[i]);
        let e_cv = p.spont_coupling * n / p.spont_lifetime;
        let (sin_phi, cos_phi) = phi.sin_cos();
        let gain = -0.5 * (wq - e_cv) * a;
        let master = wq
            * self.sqrt_master
            * (p.master_atten * cos_phi - p.coupling_atten * self.zeeman[i] * sin_phi);
        let mut coupling = 0.0;
        for &(j, jij) in &self.neighbours[i] {
            coupling += 0.5 * p.coupling_atten * jij * state.amplitude[j] * (state.phase[j] - phi).cos();
        }
        gain + master - wq * coupling
    }

    /// Deterministic part of `dφ_i/dt`, including the free-running detuning.
    pub fn phase_drift(&self, state: &NetworkState, i: usize) -> f64 {
        let p = &self.params;
        let wq = p.photon_decay_rate;
        let (a, phi) = (state.amplitude[i], state.phase[i]);
        let (sin_phi, cos_phi) = phi.sin_cos();
        let master = wq
            * self.sqrt_master
            * (-p.master_atten * sin_phi - p.coupling_atten * self.zeeman[i] * cos_phi);
        let mut coupling = 0.0;
        for &(j, jij) in &self.neighbours[i] {
            coupling += 0.5 * p.coupling_atten * jij * state.amplitude[j] * (state.phase[j] - phi).sin();
        }
        (master - wq * coupling) / a + p.detuning(i)
    }

    /// Deterministic part of `dN_i/dt`.
    pub fn carrier_drift(&self, state: &NetworkState, i: usize) -> f64 {
        let p = &self.params;
        let a = state.amplitude[i];
        p.pump_rate
            - state.carriers[i] / p.spont_lifetime * (1.0 + p.spont_coupling * (a * a + 1.0))
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        let ratio = dt * self.params.photon_decay_rate;
        if !(dt > 0.0) || ratio > STABILITY_LIMIT {
            return Err(Error::Unstable {
                dt,
                ratio,
                limit: STABILITY_LIMIT,
            });
        }
        Ok(())
    }

    /// One Euler-Maruyama step. Returns the new state and whether any
    /// amplitude / carrier number had to be clamped.
    pub fn step<R: rand::Rng + ?Sized>(
        &self,
        state: &NetworkState,
        dt: f64,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<(NetworkState, StepClamps)> {
        self.check_dt(dt)?;
        state.check_shape(self.lasers())?;
        let mut next = state.clone();
        next.time = state.time + dt;
        let clamps = self.step_into(state, &mut next, dt, noise, rng)?;
        Ok((next, clamps))
    }

    fn step_into<R: rand::Rng + ?Sized>(
        &self,
        state: &NetworkState,
        next: &mut NetworkState,
        dt: f64,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<StepClamps> {
        let sqrt_dt = dt.sqrt();
        let langevin = matches!(noise.model, NoiseModel::Langevin { .. });
        let mut clamps = StepClamps::default();
        for i in 0..self.lasers() {
            let da = self.amplitude_drift(state, i);
            let dphi = self.phase_drift(state, i);
            let dn = self.carrier_drift(state, i);
            let (mut a, mut phi, mut n) = (
                state.amplitude[i] + da * dt,
                state.phase[i] + dphi * dt,
                state.carriers[i] + dn * dt,
            );
            if langevin {
                let (d_a, d_phi, d_n) = noise.diffusion(state.amplitude[i], state.carriers[i], &self.params);
                let xi: [f64; 3] = [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ];
                a += sqrt_dt * d_a.sqrt() * xi[0];
                phi += sqrt_dt * d_phi.sqrt() * xi[1];
                n += sqrt_dt * d_n.sqrt() * xi[2];
            }
            for (value, name) in [(a, "amplitude"), (phi, "phase"), (n, "carriers")] {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        time: state.time,
                        laser: i,
                        variable: name,
                    });
                }
            }
            if a < self.amplitude_floor {
                a = self.amplitude_floor;
                clamps.amplitude = true;
            }
            if n < 0.0 {
                n = 0.0;
                clamps.carriers = true;
            }
            next.amplitude[i] = a;
            next.phase[i] = wrap_phase(phi);
            next.carriers[i] = n;
        }
        Ok(clamps)
    }

    /// Integrates from `initial`, recording `floor(duration / sample_interval) + 1`
    /// samples. All pairs `(i, j)` with `i < j` have their relative phase tracked.
    pub fn integrate(
        &self,
        initial: &NetworkState,
        settings: &IntegrationSettings,
        noise: &NoiseParams,
    ) -> Result<Trajectory> {
        let m = self.lasers();
        let pairs = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .collect();
        self.integrate_with_pairs(initial, settings, noise, pairs)
    }

    pub fn integrate_with_pairs(
        &self,
        initial: &NetworkState,
        settings: &IntegrationSettings,
        noise: &NoiseParams,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Trajectory> {
        noise.validate()?;
        self.check_dt(settings.dt)?;
        initial.check_shape(self.lasers())?;
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= self.lasers() || j >= self.lasers()) {
            return Err(Error::Contract(format!("tracked pair ({i},{j}) out of range")));
        }
        let (steps_per_sample, sample_count) = settings.schedule()?;
        let dt = settings.dt;
        let mut rng = noise.rng();

        let mut state = initial.clone();
        state.phase.iter_mut().for_each(|p| *p = wrap_phase(*p));
        if let NoiseModel::SymmetryBreaking { sigma } = noise.model {
            for p in &mut state.phase {
                let xi: f64 = StandardNormal.sample(&mut rng);
                *p = wrap_phase(*p + sigma * xi);
            }
        }
        let t0 = state.time;
        let mut traj = Trajectory::new(settings.sample_interval, pairs);
        traj.record(&state);

        let mut next = state.clone();
        let mut step_index: u64 = 0;
        for _ in 1..sample_count {
            for _ in 0..steps_per_sample {
                match self.step_into(&state, &mut next, dt, noise, &mut rng) {
                    Ok(clamps) => {
                        traj.amplitude_clamps += u64::from(clamps.amplitude);
                        traj.carrier_clamps += u64::from(clamps.carriers);
                    }
                    Err(e) => {
                        return Err(Error::Aborted {
                            source: Box::new(e),
                            partial: Box::new(traj),
                        })
                    }
                }
                step_index += 1;
                next.time = t0 + step_index as f64 * dt;
                std::mem::swap(&mut state, &mut next);
            }
            traj.record(&state);
        }
        Ok(traj)
    }
}

/// Clamp events raised by a single step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepClamps {
    pub amplitude: bool,
    pub carriers: bool,
}

/// Deterministic `dA_i/dt`; see [`LaserNetwork::amplitude_drift`].
pub fn amplitude_drift(
    state: &NetworkState,
    i: usize,
    params: &LaserParams,
    problem: &IsingProblem,
) -> Result<f64> {
    let net = LaserNetwork::new(params.clone(), problem)?;
    state.check_shape(net.lasers())?;
    check_site(i, net.lasers())?;
    Ok(net.amplitude_drift(state, i))
}

/// Deterministic `dφ_i/dt`; requires `A_i > 0`.
pub fn phase_drift(
    state: &NetworkState,
    i: usize,
    params: &LaserParams,
    problem: &IsingProblem,
) -> Result<f64> {
    let net = LaserNetwork::new(params.clone(), problem)?;
    state.check_shape(net.lasers())?;
    check_site(i, net.lasers())?;
    if !(state.amplitude[i] > 0.0) {
        return Err(Error::Contract(format!("phase drift needs A_{i} > 0")));
    }
    Ok(net.phase_drift(state, i))
}

/// Deterministic `dN_i/dt`.
pub fn carrier_drift(state: &NetworkState, i: usize, params: &LaserParams) -> Result<f64> {
    check_site(i, state.lasers())?;
    let p = params;
    let a = state.amplitude[i];
    Ok(p.pump_rate - state.carriers[i] / p.spont_lifetime * (1.0 + p.spont_coupling * (a * a + 1.0)))
}

fn check_site(i: usize, lasers: usize) -> Result<()> {
    if i >= lasers {
        return Err(Error::Contract(format!("laser index {i} out of range for {lasers} lasers")));
    }
    Ok(())
}

/// Integrates `problem` on the laser network defined by `params`.
pub fn integrate(
    initial: &NetworkState,
    settings: &IntegrationSettings,
    params: &LaserParams,
    problem: &IsingProblem,
    noise: &NoiseParams,
) -> Result<Trajectory> {
    LaserNetwork::new(params.clone(), problem)?.integrate(initial, settings, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn single(params: &LaserParams) -> (LaserNetwork, NetworkState) {
        let problem = IsingProblem::new(1).unwrap();
        let net = LaserNetwork::new(params.clone(), &problem).unwrap();
        (net, NetworkState::initial(params, 1))
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap_phase(0.25), 0.25);
        for k in -5..5 {
            let w = wrap_phase(0.3 + 2.0 * PI * k as f64);
            assert!(w > -PI && w <= PI);
            assert!((w - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_operating_point() {
        let p = LaserParams::bifurcation_defaults(0.04);
        assert_eq!(p.threshold_carriers(), 1e7);
        assert!((p.threshold_pump_rate() - 1e16).abs() < 1.0);
        assert!((p.pump_rate - 2e16).abs() < 2.0);
        // A² + 1 = 1/β at twice threshold
        assert!((p.free_running_photon_number() - 9999.0).abs() < 1e-6);
    }

    #[test]
    fn steady_state_drifts_vanish_without_master() {
        let mut p = LaserParams::bifurcation_defaults(0.0);
        p.master_photon_number = 0.0;
        let (net, s) = single(&p);
        assert!(net.amplitude_drift(&s, 0).abs() < 1e-9 * p.photon_decay_rate);
        assert!(net.carrier_drift(&s, 0).abs() < 1e-9 * p.pump_rate);
        assert_eq!(net.phase_drift(&s, 0), 0.0);
    }

    #[test]
    fn empty_cavity_fills_at_pump_rate() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let s = NetworkState {
            time: 0.0,
            amplitude: vec![0.0],
            phase: vec![0.0],
            carriers: vec![0.0],
        };
        assert_eq!(carrier_drift(&s, 0, &p).unwrap(), p.pump_rate);
    }

    #[test]
    fn carrier_steady_state_formula() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let a: f64 = 37.0;
        let n = p.pump_rate * p.spont_lifetime / (1.0 + p.spont_coupling * (a * a + 1.0));
        let s = NetworkState {
            time: 0.0,
            amplitude: vec![a],
            phase: vec![0.3],
            carriers: vec![n],
        };
        assert!(carrier_drift(&s, 0, &p).unwrap().abs() < 1e-6 * p.pump_rate);
    }

    #[test]
    fn in_phase_pair_amplitude_drift() {
        let mut p = LaserParams::bifurcation_defaults(0.04);
        p.master_photon_number = 0.0;
        let problem = IsingProblem::pair(1.0);
        let s = NetworkState {
            time: 0.0,
            amplitude: vec![90.0, 110.0],
            phase: vec![0.0, 0.0],
            carriers: vec![1.01e7, 1.0e7],
        };
        let wq = p.photon_decay_rate;
        let e_cv = p.spont_coupling * 1.01e7 / p.spont_lifetime;
        let expected = -0.5 * (wq - e_cv) * 90.0 - 0.5 * wq * 0.04 * 110.0;
        let got = amplitude_drift(&s, 0, &p, &problem).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs(), "{got} vs {expected}");
    }

    #[test]
    fn phases_at_reference_have_no_phase_drift() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let problem = IsingProblem::pair(1.0);
        let s = NetworkState::initial(&p, 2);
        for i in 0..2 {
            assert_eq!(phase_drift(&s, i, &p, &problem).unwrap(), 0.0);
        }
    }

    #[test]
    fn antiferromagnetic_point_coupling_vanishes() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let problem = IsingProblem::pair(1.0);
        let (a, n) = p.free_running_steady_state();
        let s = NetworkState {
            time: 0.0,
            amplitude: vec![a, a],
            phase: vec![FRAC_PI_2, -FRAC_PI_2],
            carriers: vec![n, n],
        };
        let got = phase_drift(&s, 0, &p, &problem).unwrap();
        let master_only = p.photon_decay_rate * p.master_photon_number.sqrt() * p.master_atten * -1.0 / a;
        assert!((got - master_only).abs() < 1e-6 * master_only.abs());

        let mut no_master = p.clone();
        no_master.master_photon_number = 0.0;
        let got = phase_drift(&s, 0, &no_master, &problem).unwrap();
        assert!(got.abs() < 1e-3, "{got}");
    }

    #[test]
    fn phase_drift_requires_positive_amplitude() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let mut s = NetworkState::initial(&p, 1);
        s.amplitude[0] = 0.0;
        assert!(phase_drift(&s, 0, &p, &IsingProblem::new(1).unwrap()).is_err());
    }

    #[test]
    fn fixed_point_is_preserved_by_step() {
        let mut p = LaserParams::bifurcation_defaults(0.0);
        p.master_photon_number = 0.0;
        let (net, s) = single(&p);
        let mut rng = NoiseParams::off().rng();
        let (next, clamps) = net.step(&s, 1e-13, &NoiseParams::off(), &mut rng).unwrap();
        assert_eq!(clamps, StepClamps::default());
        assert!((next.amplitude[0] - s.amplitude[0]).abs() < 1e-12 * s.amplitude[0]);
        assert!((next.carriers[0] - s.carriers[0]).abs() < 1e-12 * s.carriers[0]);
        assert_eq!(next.phase[0], 0.0);
    }

    #[test]
    fn noise_free_step_is_explicit_euler() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let mut problem = IsingProblem::pair(1.0);
        problem.set_zeeman(1, 0.3).unwrap();
        let net = LaserNetwork::new(p, &problem).unwrap();
        let s = NetworkState {
            time: 1e-9,
            amplitude: vec![95.0, 103.0],
            phase: vec![0.4, -1.1],
            carriers: vec![1.02e7, 0.99e7],
        };
        let dt = 1e-13;
        let mut rng = NoiseParams::off().rng();
        let (next, _) = net.step(&s, dt, &NoiseParams::off(), &mut rng).unwrap();
        for i in 0..2 {
            assert_eq!(next.amplitude[i], s.amplitude[i] + net.amplitude_drift(&s, i) * dt);
            assert_eq!(next.phase[i], wrap_phase(s.phase[i] + net.phase_drift(&s, i) * dt));
            assert_eq!(next.carriers[i], s.carriers[i] + net.carrier_drift(&s, i) * dt);
        }
        assert_eq!(next.time, s.time + dt);
    }

    #[test]
    fn stability_guard_refuses_large_steps() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let (net, s) = single(&p);
        let mut rng = NoiseParams::off().rng();
        assert!(matches!(
            net.step(&s, 1e-12, &NoiseParams::off(), &mut rng),
            Err(Error::Unstable { .. })
        ));
        assert!(net.step(&s, 5e-13, &NoiseParams::off(), &mut rng).is_ok());
    }

    #[test]
    fn non_finite_state_aborts_with_partial_trajectory() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let (net, mut s) = single(&p);
        s.carriers[0] = f64::NAN;
        let settings = IntegrationSettings::new(1e-12, 1e-13, 1e-13);
        match net.integrate(&s, &settings, &NoiseParams::off()) {
            Err(Error::Aborted { source, partial }) => {
                assert!(matches!(*source, Error::NonFinite { laser: 0, time, .. } if time == 0.0));
                assert_eq!(partial.samples.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn amplitude_floor_clamps_are_counted() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let (net, mut s) = single(&p);
        // far below threshold: the field decays towards zero
        s.carriers[0] = 0.0;
        s.amplitude[0] = 2.0 * net.amplitude_floor();
        let settings = IntegrationSettings::new(1e-11, 1e-13, 1e-12);
        let mut no_master = p.clone();
        no_master.master_photon_number = 0.0;
        let net = LaserNetwork::new(no_master, &IsingProblem::new(1).unwrap()).unwrap();
        let traj = net.integrate(&s, &settings, &NoiseParams::off()).unwrap();
        assert!(traj.amplitude_clamps > 0);
        assert!(traj.samples.iter().all(|st| st.amplitude[0] >= net.amplitude_floor()));
    }

    #[test]
    fn sample_schedule() {
        let s = IntegrationSettings::new(20e-9, 1e-13, 1e-11);
        assert_eq!(s.schedule().unwrap(), (100, 2001));
        let s = IntegrationSettings::new(1.05e-11, 1e-13, 1e-12);
        assert_eq!(s.schedule().unwrap(), (10, 11));
        assert!(IntegrationSettings::new(1e-9, 1e-13, 1.5e-13).schedule().is_err());
        assert!(IntegrationSettings::new(1e-9, 1e-12, 1e-13).schedule().is_err());
        assert!(IntegrationSettings::new(1e-12, 1e-13, 1e-11).schedule().is_err());
    }

    #[test]
    fn trajectory_times_and_count() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let net = LaserNetwork::new(p.clone(), &IsingProblem::pair(1.0)).unwrap();
        let settings = IntegrationSettings::new(1.05e-11, 1e-13, 1e-12);
        let traj = net
            .integrate(&NetworkState::initial(&p, 2), &settings, &NoiseParams::off())
            .unwrap();
        assert_eq!(traj.samples.len(), 11);
        assert!(traj.samples.windows(2).all(|w| w[1].time > w[0].time));
        assert!((traj.final_state().time - 1e-11).abs() < 1e-24);
        assert_eq!(traj.pairs, vec![(0, 1)]);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let base = LaserParams::bifurcation_defaults(0.04);
        let mut bad = base.clone();
        bad.spont_coupling = 1.5;
        assert!(bad.validate(2).is_err());
        let mut bad = base.clone();
        bad.coupling_atten = -0.1;
        assert!(bad.validate(2).is_err());
        let mut bad = base.clone();
        bad.self_detuning = vec![0.0; 3];
        assert!(bad.validate(2).is_err());
        let mut bad = base.clone();
        bad.pump_rate = 0.5 * base.threshold_pump_rate();
        assert!(bad.validate(2).is_err());
        let mut bad = base;
        bad.spont_lifetime = 0.0;
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn disabled_noise_has_zero_diffusion() {
        let p = LaserParams::bifurcation_defaults(0.04);
        let off = NoiseParams::off();
        assert!(!off.enabled());
        assert_eq!(off.diffusion(100.0, 1e7, &p), (0.0, 0.0, 0.0));
        let kick = NoiseParams { model: NoiseModel::kick(), seed: 1 };
        assert_eq!(kick.diffusion(100.0, 1e7, &p), (0.0, 0.0, 0.0));
        let on = NoiseParams { model: NoiseModel::langevin(), seed: 1 };
        let (da, dp, dn) = on.diffusion(100.0, 1e7, &p);
        assert!((da - 5e11).abs() < 1.0);
        assert!((dp - 5e7).abs() < 1e-3);
        assert!((dn - 3e16).abs() < 1e3);
    }
}
