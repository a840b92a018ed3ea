//! Run configuration: a flat `key = value` file with `#` comments.
//!
//! Every key has a default, so an empty file is a valid configuration. Keys
//! that carry a physical unit name it in a suffix (`_s`, `_per_s`, `_m`,
//! `_hz`, `_w`, `_rad`). Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::dynamics::{IntegrationSettings, LaserParams, NoiseModel};
use crate::error::{Error, Result};
use crate::experiments::{linspace, ExperimentSpec, RatioAxis, RegimeThresholds};
use crate::ising::IsingProblem;
use crate::locking::{FrequencySweep, Injection, LockingParams};
use crate::standing_wave::{CavityGeometry, SweepCoordinate, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    /// A float, or `auto` for a value derived from other keys.
    FloatOrAuto,
    FloatList,
    Count,
    Seed,
    Bool,
    Path,
    Choice(&'static [&'static str]),
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: &'static str,
    help: &'static str,
}

const NOISE_MODES: &[&str] = &["off", "langevin", "kick"];
const SWEEP_KINDS: &[&str] = &["eta", "zeta", "path_length", "mirror_displacement", "coupling_phase"];
const COORDINATES: &[&str] = &["mirror_displacement", "path_length"];
const INJECTIONS: &[&str] = &["power", "field"];

/// The defaults table. Order here is the order of the resolved echo.
const KEYS: &[Key] = &[
    Key { name: "omega_over_q_per_s", kind: Kind::Float, default: "1e12", help: "photon decay rate" },
    Key { name: "omega_over_qe_per_s", kind: Kind::Float, default: "1e12", help: "external coupling rate" },
    Key { name: "tau_sp_s", kind: Kind::Float, default: "1e-9", help: "spontaneous emission lifetime" },
    Key { name: "beta", kind: Kind::Float, default: "1e-4", help: "spontaneous emission coupling" },
    Key { name: "zeta", kind: Kind::Float, default: "0.005", help: "master injection attenuation" },
    Key { name: "eta", kind: Kind::Float, default: "0.04", help: "mutual coupling attenuation" },
    Key { name: "alpha", kind: Kind::Float, default: "0", help: "linewidth enhancement factor" },
    Key { name: "pump_over_threshold", kind: Kind::Float, default: "2", help: "pump rate in units of threshold" },
    Key { name: "pump_rate_per_s", kind: Kind::FloatOrAuto, default: "auto", help: "overrides pump_over_threshold" },
    Key { name: "master_photon_number", kind: Kind::FloatOrAuto, default: "auto", help: "auto: free-running slave photon number" },
    Key { name: "self_detuning_rad_per_s", kind: Kind::FloatList, default: "", help: "comma-separated, one per laser" },
    Key { name: "problem_file", kind: Kind::Path, default: "", help: "empty: two sites coupled by j12" },
    Key { name: "j12", kind: Kind::Float, default: "1", help: "coupling of the built-in two-site problem" },
    Key { name: "noise_mode", kind: Kind::Choice(NOISE_MODES), default: "kick", help: "off | langevin | kick" },
    Key { name: "kick_sigma_rad", kind: Kind::Float, default: "1e-3", help: "initial phase kick" },
    Key { name: "noise_amplitude_scale", kind: Kind::Float, default: "1", help: "langevin amplitude diffusion scale" },
    Key { name: "noise_phase_scale", kind: Kind::Float, default: "1", help: "langevin phase diffusion scale" },
    Key { name: "noise_carrier_scale", kind: Kind::Float, default: "1", help: "langevin carrier diffusion scale" },
    Key { name: "duration_s", kind: Kind::Float, default: "2e-8", help: "simulated time per trial" },
    Key { name: "dt_s", kind: Kind::Float, default: "1e-13", help: "integration step" },
    Key { name: "sample_interval_s", kind: Kind::Float, default: "1e-11", help: "integer multiple of dt_s" },
    Key { name: "trials", kind: Kind::Count, default: "100", help: "trials per ensemble" },
    Key { name: "seed", kind: Kind::Seed, default: "1", help: "master seed, overridden by --seed" },
    Key { name: "readout_threshold", kind: Kind::Float, default: "0.5", help: "minimum |sin phi| for a resolved spin" },
    Key { name: "score", kind: Kind::Bool, default: "true", help: "compare readouts with exact ground states" },
    Key { name: "oracle_limit", kind: Kind::Count, default: "24", help: "largest problem the enumerator accepts" },
    Key { name: "sweep_kind", kind: Kind::Choice(SWEEP_KINDS), default: "eta", help: "eta | zeta | path_length | mirror_displacement | coupling_phase" },
    Key { name: "sweep_points", kind: Kind::Count, default: "8", help: "sweep points" },
    Key { name: "sweep_ratio_start", kind: Kind::Float, default: "0.0025", help: "first eta or zeta" },
    Key { name: "sweep_ratio_stop", kind: Kind::Float, default: "0.04", help: "last eta or zeta" },
    Key { name: "sweep_start_m", kind: Kind::Float, default: "0", help: "first length coordinate" },
    Key { name: "sweep_stop_m", kind: Kind::Float, default: "7.8875e-7", help: "last length coordinate" },
    Key { name: "sweep_start_rad", kind: Kind::Float, default: "0", help: "first coupling phase" },
    Key { name: "sweep_stop_rad", kind: Kind::Float, default: "12.566370614359172", help: "last coupling phase" },
    Key { name: "path_length_m", kind: Kind::Float, default: "1.55", help: "coupling path length" },
    Key { name: "wavelength_m", kind: Kind::Float, default: "1.5775e-6", help: "master wavelength" },
    Key { name: "pull_factor", kind: Kind::Float, default: "1", help: "frequency pulling factor" },
    Key { name: "standingwave_coordinate", kind: Kind::Choice(COORDINATES), default: "mirror_displacement", help: "mirror_displacement | path_length" },
    Key { name: "standingwave_start_m", kind: Kind::Float, default: "0", help: "first coordinate" },
    Key { name: "standingwave_stop_m", kind: Kind::Float, default: "8.281875e-6", help: "last coordinate" },
    Key { name: "standingwave_points", kind: Kind::Count, default: "42001", help: "sweep points" },
    Key { name: "lock_injection", kind: Kind::Choice(INJECTIONS), default: "power", help: "power | field" },
    Key { name: "lock_input_w", kind: Kind::FloatOrAuto, default: "auto", help: "auto: 1.3 GHz locking bandwidth" },
    Key { name: "lock_output_w", kind: Kind::Float, default: "1.12e-3", help: "slave output power" },
    Key { name: "lock_injection_amplitude", kind: Kind::Float, default: "0", help: "F0 when lock_injection = field" },
    Key { name: "lock_internal_amplitude", kind: Kind::Float, default: "0", help: "A0 when lock_injection = field" },
    Key { name: "lock_omega_over_qe_per_s", kind: Kind::Float, default: "5e11", help: "external coupling rate of the locked slave" },
    Key { name: "lock_excursion_hz", kind: Kind::Float, default: "4.5e9", help: "peak-to-peak master frequency ramp" },
    Key { name: "lock_points", kind: Kind::Count, default: "901", help: "ramp points" },
    Key { name: "lock_visibility", kind: Kind::Float, default: "1", help: "interference fringe visibility" },
];

fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

fn check_value(k: &Key, value: &str) -> std::result::Result<(), String> {
    let float = |s: &str| -> std::result::Result<(), String> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(()),
            _ => Err(format!("expected a finite number, got `{s}`")),
        }
    };
    match k.kind {
        Kind::Float => float(value),
        Kind::FloatOrAuto if value == "auto" => Ok(()),
        Kind::FloatOrAuto => float(value),
        Kind::FloatList => value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .try_for_each(float),
        Kind::Count => value
            .parse::<usize>()
            .map(drop)
            .map_err(|_| format!("expected a non-negative integer, got `{value}`")),
        Kind::Seed => value
            .parse::<u64>()
            .map(drop)
            .map_err(|_| format!("expected an unsigned 64-bit integer, got `{value}`")),
        Kind::Bool => match value {
            "true" | "false" => Ok(()),
            _ => Err(format!("expected true or false, got `{value}`")),
        },
        Kind::Path => Ok(()),
        Kind::Choice(options) if options.contains(&value) => Ok(()),
        Kind::Choice(options) => Err(format!("expected one of {}, got `{value}`", options.join(", "))),
    }
}

/// Fully resolved configuration: every key of the defaults table has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
    /// Directory relative paths in the file are resolved against.
    base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, path)?;
        if let Some(dir) = path.parent() {
            cfg.base_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }

    /// Parses `text` on top of the defaults. `path` is only used in messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                reason,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(first) = seen.insert(k.to_string(), line_no) {
                return Err(err(format!("`{k}` already set on line {first}")));
            }
            cfg.set(k, v).map_err(|e| match e {
                Error::Config(reason) => err(reason),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let k = key(name).ok_or_else(|| Error::Config(format!("unknown key `{name}`")))?;
        check_value(k, value).map_err(|reason| Error::Config(format!("`{name}`: {reason}")))?;
        self.values.insert(k.name, value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn raw(&self, name: &'static str) -> &str {
        self.values.get(name).map(String::as_str).expect("every key has a value")
    }

    fn float(&self, name: &'static str) -> f64 {
        self.raw(name).parse().expect("checked on insertion")
    }

    fn float_or_auto(&self, name: &'static str) -> Option<f64> {
        match self.raw(name) {
            "auto" => None,
            v => Some(v.parse().expect("checked on insertion")),
        }
    }

    fn count(&self, name: &'static str) -> usize {
        self.raw(name).parse().expect("checked on insertion")
    }

    pub fn seed(&self) -> u64 {
        self.raw("seed").parse().expect("checked on insertion")
    }

    /// The resolved configuration in the same format it is read in.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{} = {}", k.name, self.raw(k.name));
        }
        out
    }

    /// Resolved values keyed by name, for manifests.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    /// Table of keys, defaults and descriptions.
    pub fn documentation() -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{:<26} {:<20} {}", k.name, k.default, k.help);
        }
        out
    }

    pub fn laser_params(&self) -> LaserParams {
        let mut p = LaserParams::bifurcation_defaults(self.float("eta"));
        p.photon_decay_rate = self.float("omega_over_q_per_s");
        p.external_decay_rate = self.float("omega_over_qe_per_s");
        p.spont_lifetime = self.float("tau_sp_s");
        p.spont_coupling = self.float("beta");
        p.master_atten = self.float("zeta");
        p.linewidth_factor = self.float("alpha");
        p.pump_rate = self
            .float_or_auto("pump_rate_per_s")
            .unwrap_or_else(|| self.float("pump_over_threshold") * p.threshold_pump_rate());
        p.master_photon_number = self
            .float_or_auto("master_photon_number")
            .unwrap_or_else(|| p.free_running_photon_number());
        p.self_detuning = self
            .raw("self_detuning_rad_per_s")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().expect("checked on insertion"))
            .collect();
        p
    }

    pub fn noise_model(&self) -> NoiseModel {
        match self.raw("noise_mode") {
            "off" => NoiseModel::Off,
            "langevin" => NoiseModel::Langevin {
                amplitude_scale: self.float("noise_amplitude_scale"),
                phase_scale: self.float("noise_phase_scale"),
                carrier_scale: self.float("noise_carrier_scale"),
            },
            _ => NoiseModel::SymmetryBreaking {
                sigma: self.float("kick_sigma_rad"),
            },
        }
    }

    pub fn problem_path(&self) -> Option<PathBuf> {
        match self.raw("problem_file") {
            "" => None,
            p => Some(self.base_dir.join(p)),
        }
    }

    pub fn problem(&self) -> Result<IsingProblem> {
        match self.problem_path() {
            Some(path) => IsingProblem::from_file(path),
            None => Ok(IsingProblem::pair(self.float("j12"))),
        }
    }

    pub fn oracle_limit(&self) -> usize {
        self.count("oracle_limit")
    }

    pub fn settings(&self) -> IntegrationSettings {
        IntegrationSettings::new(self.float("duration_s"), self.float("dt_s"), self.float("sample_interval_s"))
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let spec = ExperimentSpec {
            problem: self.problem()?,
            params: self.laser_params(),
            noise: self.noise_model(),
            settings: self.settings(),
            trials: self.count("trials"),
            readout_threshold: self.float("readout_threshold"),
            master_seed: self.seed(),
            score: self.raw("score") == "true",
            thresholds: RegimeThresholds::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn geometry(&self) -> CavityGeometry {
        CavityGeometry {
            path_length: self.float("path_length_m"),
            wavelength: self.float("wavelength_m"),
            pull_factor: self.float("pull_factor"),
        }
    }

    /// `(start, stop, points, coordinate)` of the standing-wave sweep.
    pub fn standing_wave_sweep(&self) -> (f64, f64, usize, SweepCoordinate) {
        let coordinate = match self.raw("standingwave_coordinate") {
            "path_length" => SweepCoordinate::PathLength,
            _ => SweepCoordinate::MirrorDisplacement,
        };
        (
            self.float("standingwave_start_m"),
            self.float("standingwave_stop_m"),
            self.count("standingwave_points"),
            coordinate,
        )
    }

    pub fn locking_params(&self) -> LockingParams {
        let photon_decay_rate = self.float("omega_over_q_per_s");
        let injection = match self.raw("lock_injection") {
            "field" => Injection::Field {
                injection_amplitude: self.float("lock_injection_amplitude"),
                internal_amplitude: self.float("lock_internal_amplitude"),
            },
            _ => {
                let output_w = self.float("lock_output_w");
                let input_w = self.float_or_auto("lock_input_w").unwrap_or_else(|| {
                    let ratio = 2.0 * std::f64::consts::PI * 1.3e9 / photon_decay_rate;
                    output_w * ratio * ratio
                });
                Injection::Power { input_w, output_w }
            }
        };
        LockingParams {
            injection,
            photon_decay_rate,
            external_decay_rate: self.float("lock_omega_over_qe_per_s"),
            master_frequency: 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.float("wavelength_m"),
            linewidth_factor: self.float("alpha"),
        }
    }

    pub fn frequency_sweep(&self) -> FrequencySweep {
        FrequencySweep {
            excursion_hz: self.float("lock_excursion_hz"),
            points: self.count("lock_points"),
        }
    }

    pub fn lock_visibility(&self) -> f64 {
        self.float("lock_visibility")
    }

    pub fn sweep(&self) -> SweepPlan {
        let n = self.count("sweep_points");
        match self.raw("sweep_kind") {
            "zeta" => SweepPlan::Ratio(RatioAxis::Zeta, self.ratio_values(n)),
            "path_length" => SweepPlan::Length(
                SweepCoordinate::PathLength,
                linspace(self.float("sweep_start_m"), self.float("sweep_stop_m"), n),
            ),
            "mirror_displacement" => SweepPlan::Length(
                SweepCoordinate::MirrorDisplacement,
                linspace(self.float("sweep_start_m"), self.float("sweep_stop_m"), n),
            ),
            "coupling_phase" => {
                SweepPlan::CouplingPhase(linspace(self.float("sweep_start_rad"), self.float("sweep_stop_rad"), n))
            }
            _ => SweepPlan::Ratio(RatioAxis::Eta, self.ratio_values(n)),
        }
    }

    fn ratio_values(&self, n: usize) -> Vec<f64> {
        linspace(self.float("sweep_ratio_start"), self.float("sweep_ratio_stop"), n)
    }
}

/// What the `sweep` command iterates over.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepPlan {
    Ratio(RatioAxis, Vec<f64>),
    Length(SweepCoordinate, Vec<f64>),
    CouplingPhase(Vec<f64>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DEFAULT_KICK_SIGMA;
    use crate::ising::{DEFAULT_ENUMERATION_LIMIT, DEFAULT_READOUT_THRESHOLD};

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn defaults_cover_every_key() {
        let cfg = RunConfig::default();
        for k in KEYS {
            check_value(k, k.default).unwrap_or_else(|e| panic!("{}: {e}", k.name));
            assert!(cfg.get(k.name).is_some());
        }
        assert_eq!(cfg.oracle_limit(), DEFAULT_ENUMERATION_LIMIT);
        assert_eq!(cfg.float("readout_threshold"), DEFAULT_READOUT_THRESHOLD);
        assert_eq!(cfg.float("kick_sigma_rad"), DEFAULT_KICK_SIGMA);
    }

    #[test]
    fn defaults_reproduce_operating_point() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.laser_params(), LaserParams::bifurcation_defaults(0.04));
        assert_eq!(cfg.experiment().unwrap(), ExperimentSpec::two_site(1.0, 0.04, 100, 1));
        assert_eq!(cfg.geometry(), CavityGeometry::default());
        let lp = cfg.locking_params();
        let fixture = LockingParams::observed_fixture();
        assert_eq!(lp.photon_decay_rate, fixture.photon_decay_rate);
        assert_eq!(lp.external_decay_rate, fixture.external_decay_rate);
        assert_eq!(lp.injection, fixture.injection);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        match parse("eta = 0.01\n\n# fine\netaa = 0.02\n") {
            Err(Error::Parse { line, reason, .. }) => {
                assert_eq!(line, 4);
                assert!(reason.contains("etaa"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_and_duplicates() {
        assert!(parse("trials = -3").is_err());
        assert!(parse("noise_mode = loud").is_err());
        assert!(parse("dt_s = nan").is_err());
        assert!(parse("eta").is_err());
        assert!(matches!(parse("eta = 1\neta = 2"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn comments_overrides_and_echo() {
        let mut cfg = parse("eta = 0.01 # weaker\nnoise_mode = langevin\n").unwrap();
        cfg.apply_override("trials=7").unwrap();
        assert!(cfg.apply_override("trials").is_err());
        assert!(cfg.apply_override("nope=1").is_err());
        assert_eq!(cfg.laser_params().coupling_atten, 0.01);
        assert_eq!(cfg.noise_model(), NoiseModel::langevin());
        let again = parse(&cfg.echo()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn sweep_plans() {
        let mut cfg = RunConfig::default();
        cfg.set("sweep_kind", "coupling_phase").unwrap();
        cfg.set("sweep_points", "3").unwrap();
        match cfg.sweep() {
            SweepPlan::CouplingPhase(v) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}
