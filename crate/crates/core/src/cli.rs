//! Command-line front end.
//!
//! Each subcommand resolves a [`RunConfig`], writes its data files plus
//! `config.resolved` and `manifest.json` into the output directory, and prints
//! a short summary on standard output. Diagnostics go to standard error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, SweepPlan};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{
    coupling_phase_sweep, derive_seed, order_transitions, path_length_order_sweep, run_ensemble,
    sweep_coupling_ratio, write_ensemble_csv, write_order_csv, write_sweep_csv,
};
use crate::locking::{locking_bandwidth, locking_curve, write_locking_csv};
use crate::standing_wave::{count_transitions, phase_order_trace, sweep_path_length, SweepCoordinate};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "injection-ising", version, about = "Injection-locked laser network Ising machine simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trial and write its trajectory.
    Simulate(Common),
    /// Run a seeded ensemble and score it against the exact ground states.
    Solve(Common),
    /// Enumerate the exact ground states of the problem.
    Oracle(Common),
    /// Locked phase and interference intensity across a master frequency ramp.
    Lockcurve(Common),
    /// Standing-wave frequency shift and phase order across a length sweep.
    Standingwave(Common),
    /// Regime table over eta or zeta, or phase-order table over a length sweep.
    Sweep(Common),
    /// List configuration keys with their defaults.
    Keys,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Problem file, overriding `problem_file`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Master seed, overriding `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Format of the summary.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Exit status for an error: 2 for bad input (including unreadable files or
/// an unwritable output directory), 3 for numerical failure, 4 when the exact
/// solver refuses the problem size.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::OracleInfeasible { .. } => EXIT_ORACLE,
        Error::Aborted { source, .. } => exit_code(source),
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::Json(_) => 1,
        _ => EXIT_CONFIG,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    let (name, common) = match &command {
        Command::Simulate(c) => ("simulate", c),
        Command::Solve(c) => ("solve", c),
        Command::Oracle(c) => ("oracle", c),
        Command::Lockcurve(c) => ("lockcurve", c),
        Command::Standingwave(c) => ("standingwave", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Keys => {
            print!("{}", RunConfig::documentation());
            return Ok(());
        }
    };
    let cfg = resolve(common)?;
    let mut run = Run::new(name, &cfg, &common.out)?;
    let summary = match command {
        Command::Simulate(_) => simulate(&cfg, &mut run)?,
        Command::Solve(_) => solve(&cfg, &mut run)?,
        Command::Oracle(_) => oracle(&cfg, &mut run)?,
        Command::Lockcurve(_) => lockcurve(&cfg, &mut run)?,
        Command::Standingwave(_) => standingwave(&cfg, &mut run)?,
        Command::Sweep(_) => sweep(&cfg, &mut run)?,
        Command::Keys => unreachable!(),
    };
    run.finish(summary, common.format)
}

/// Defaults, then the config file, then `--set`, `--problem` and `--seed`.
pub fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for s in &common.set {
        cfg.apply_override(s)?;
    }
    if let Some(p) = &common.problem {
        let abs = std::path::absolute(p)?;
        cfg.set("problem_file", &abs.to_string_lossy())?;
    }
    if let Some(seed) = common.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    Ok(cfg)
}

struct Run {
    command: &'static str,
    dir: PathBuf,
    config: RunConfig,
    outputs: Vec<String>,
}

impl Run {
    fn new(command: &'static str, cfg: &RunConfig, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            command,
            dir: dir.to_path_buf(),
            config: cfg.clone(),
            outputs: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn finish(mut self, summary: Map<String, Value>, format: Format) -> Result<()> {
        fs::write(self.dir.join("config.resolved"), self.config.echo())?;
        let rendered = match format {
            Format::Csv => summary_csv(&summary),
            Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        };
        let summary_name = match format {
            Format::Csv => "summary.csv",
            Format::Json => "summary.json",
        };
        fs::write(self.dir.join(summary_name), &rendered)?;
        self.outputs.push(summary_name.to_string());
        let manifest = json!({
            "program": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.config.seed(),
            "config": self.config.to_map(),
            "outputs": self.outputs,
            "summary": summary,
        });
        fs::write(self.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        if self.command != "oracle" {
            print!("{rendered}");
        }
        Ok(())
    }
}

fn summary_csv(summary: &Map<String, Value>) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in summary {
        let v = match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let v = if v.contains(',') { format!("\"{v}\"") } else { v };
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn finish_csv<W: Write>(mut w: W) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn simulate(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let spec = cfg.experiment()?;
    // same stream as trial 0 of `solve`
    let seed = derive_seed(spec.master_seed, 0, 0);
    let traj: Trajectory = spec.run_trial(seed)?;
    let mut w = run.create("trajectory.csv")?;
    traj.write_csv(&mut w)?;
    finish_csv(w)?;
    let last = traj.final_state();
    let mut s = Map::new();
    s.insert("trial_seed".into(), json!(seed));
    s.insert("samples".into(), json!(traj.samples.len()));
    s.insert("final_time_s".into(), json!(last.time));
    s.insert("final_phases_rad".into(), json!(last.phase));
    s.insert("final_amplitudes".into(), json!(last.amplitude));
    s.insert("amplitude_clamps".into(), json!(traj.amplitude_clamps));
    s.insert("carrier_clamps".into(), json!(traj.carrier_clamps));
    Ok(s)
}

fn solve(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let spec = cfg.experiment()?;
    let r = run_ensemble(&spec)?;
    let mut w = run.create("trials.csv")?;
    write_ensemble_csv(&r, &mut w)?;
    finish_csv(w)?;
    for a in &r.aborted {
        eprintln!("trial {} (seed {}) aborted: {}", a.index, a.seed, a.reason);
    }
    if r.unconstrained {
        eprintln!("warning: no master injection and no coupling; phase variance grows without bound");
    }
    let mut s = Map::new();
    s.insert("trials".into(), json!(spec.trials));
    s.insert("completed".into(), json!(r.outcomes.len()));
    s.insert("aborted".into(), json!(r.aborted.len()));
    s.insert("ground_state_energy".into(), json!(r.ground_state.as_ref().map(|g| g.minimum_energy)));
    s.insert("ground_states".into(), json!(r.ground_state.as_ref().map(|g| g.configurations.len())));
    s.insert("success_fraction".into(), json!(r.success_fraction));
    s.insert("regime".into(), json!(r.regime.as_str()));
    s.insert("pinned".into(), json!(r.regimes.pinned));
    s.insert("intermediate".into(), json!(r.regimes.intermediate));
    s.insert("bifurcated".into(), json!(r.regimes.bifurcated));
    s.insert("mean_abs_dphi_rad".into(), json!(r.mean_abs_dphi));
    s.insert("std_abs_dphi_rad".into(), json!(r.std_abs_dphi));
    s.insert("unconstrained".into(), json!(r.unconstrained));
    s.insert("non_stationary".into(), json!(r.non_stationary));
    Ok(s)
}

fn oracle(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let problem = cfg.problem()?;
    let g = problem.brute_force_ground_state_with_limit(cfg.oracle_limit())?;
    let mut text = format!("sites {}\nminimum_energy {}\nground_states {}\n", problem.sites(), g.minimum_energy, g.configurations.len());
    for c in &g.configurations {
        text.push_str(&format!("{c}\n"));
    }
    let mut w = run.create("ground_states.txt")?;
    w.write_all(text.as_bytes())?;
    finish_csv(w)?;
    print!("{text}");
    let mut s = Map::new();
    s.insert("sites".into(), json!(problem.sites()));
    s.insert("minimum_energy".into(), json!(g.minimum_energy));
    s.insert(
        "ground_states".into(),
        json!(g.configurations.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
    );
    Ok(s)
}

fn lockcurve(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let p = cfg.locking_params();
    let points = locking_curve(&cfg.frequency_sweep(), &p, cfg.lock_visibility())?;
    let mut w = run.create("lockcurve.csv")?;
    write_locking_csv(&points, &mut w)?;
    finish_csv(w)?;
    let locked = points.iter().filter(|pt| pt.locked()).count();
    let mut s = Map::new();
    s.insert("points".into(), json!(points.len()));
    s.insert("locked".into(), json!(locked));
    s.insert("locked_fraction".into(), json!(locked as f64 / points.len() as f64));
    s.insert("locking_bandwidth_hz".into(), json!(locking_bandwidth(&p)));
    s.insert("half_width_rad_per_s".into(), json!(p.half_width()));
    Ok(s)
}

fn standingwave(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let g = cfg.geometry();
    let (start, stop, points, coordinate) = cfg.standing_wave_sweep();
    let curve = sweep_path_length(start, stop, points, &g, coordinate)?;
    let mut w = run.create("standingwave.csv")?;
    curve.write_csv(&mut w)?;
    finish_csv(w)?;
    let mut s = Map::new();
    s.insert("points".into(), json!(curve.points.len()));
    s.insert("cycles".into(), json!(curve.cycles()));
    s.insert("peak_to_peak_hz".into(), json!(curve.peak_to_peak()));
    s.insert("period_m".into(), json!(curve.period()));
    s.insert("transitions".into(), json!(count_transitions(&phase_order_trace(&curve))));
    s.insert("free_spectral_range_hz".into(), json!(g.free_spectral_range(g.path_length)));
    Ok(s)
}

fn sweep(cfg: &RunConfig, run: &mut Run) -> Result<Map<String, Value>> {
    let spec = cfg.experiment()?;
    let mut s = Map::new();
    match cfg.sweep() {
        SweepPlan::Ratio(axis, values) => {
            let rows = sweep_coupling_ratio(&spec, axis, &values)?;
            let mut w = run.create("sweep.csv")?;
            write_sweep_csv(&rows, axis, &mut w)?;
            finish_csv(w)?;
            s.insert("rows".into(), json!(rows.len()));
            s.insert("regimes".into(), json!(rows.iter().map(|r| r.regime.as_str()).collect::<Vec<_>>()));
        }
        SweepPlan::Length(coordinate, values) => {
            let g = cfg.geometry();
            let coords: Vec<(f64, f64)> = values
                .iter()
                .map(|&c| match coordinate {
                    SweepCoordinate::PathLength => (c, c),
                    SweepCoordinate::MirrorDisplacement => (c, g.path_length + 2.0 * c),
                })
                .collect();
            if let Some(&(_, l)) = coords.iter().find(|&&(_, l)| !(l > 0.0)) {
                return Err(Error::Config(format!("sweep reaches non-positive path length {l} m")));
            }
            let rows = path_length_order_sweep(&spec, &coords, &g)?;
            let mut w = run.create("sweep.csv")?;
            write_order_csv(&rows, "coordinate_m", &mut w)?;
            finish_csv(w)?;
            s.insert("rows".into(), json!(rows.len()));
            s.insert("transitions".into(), json!(order_transitions(&rows)));
        }
        SweepPlan::CouplingPhase(thetas) => {
            let g = cfg.geometry();
            let rows = coupling_phase_sweep(&spec, &thetas, &g)?;
            let mut w = run.create("sweep.csv")?;
            write_order_csv(&rows, "theta_rad", &mut w)?;
            finish_csv(w)?;
            s.insert("rows".into(), json!(rows.len()));
            s.insert("transitions".into(), json!(order_transitions(&rows)));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DEFAULT_KICK_SIGMA;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::OracleInfeasible { sites: 30, limit: 24 }), EXIT_ORACLE);
        let nf = Error::NonFinite {
            time: 0.0,
            laser: 0,
            variable: "phase",
        };
        assert_eq!(exit_code(&nf), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::TooManyAborts { aborted: 20, trials: 100 }), EXIT_NUMERICAL);
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["injection-ising", "solve", "--set", "eta=0.01", "--seed", "3", "--format", "json"]).unwrap();
        match cli.command {
            Command::Solve(c) => {
                assert_eq!(c.set, vec!["eta=0.01".to_string()]);
                assert_eq!(c.seed, Some(3));
                assert_eq!(c.format, Format::Json);
                let cfg = resolve(&c).unwrap();
                assert_eq!(cfg.seed(), 3);
                assert_eq!(cfg.get("kick_sigma_rad").unwrap().parse::<f64>().unwrap(), DEFAULT_KICK_SIGMA);
            }
            other => panic!("{other:?}"),
        }
    }
}
