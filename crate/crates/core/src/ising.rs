//! Ising problems with a Zeeman term.
//!
//! ```text
//! H(σ) = Σ_{i<j} J_ij σ_i σ_j + Σ_i λ_i σ_i,   σ_i ∈ {+1, -1}
//! ```
//!
//! Couplings are stored once per unordered pair. Spins are read out of slave
//! laser phases through the sign of `sin φ`: the master laser defines phase
//! zero, and the two spin states sit at `φ = ±π/2`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest site count the exhaustive oracle accepts by default (2^24 states).
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// Default `|sin φ|` below which a site is reported as unresolved.
pub const DEFAULT_READOUT_THRESHOLD: f64 = 0.5;

/// An Ising problem: site count, symmetric pair couplings and local fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    sites: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    zeeman: Vec<f64>,
}

impl IsingProblem {
    /// A problem with `sites` spins, no couplings and zero field.
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::invalid("sites", "an Ising problem needs at least one site"));
        }
        Ok(Self {
            sites,
            couplings: BTreeMap::new(),
            zeeman: vec![0.0; sites],
        })
    }

    /// Builds a problem from a pair list and a field vector.
    ///
    /// Pairs may be given in either order; a pair listed twice is rejected.
    pub fn from_parts(
        sites: usize,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        zeeman: Vec<f64>,
    ) -> Result<Self> {
        let mut problem = Self::new(sites)?;
        if zeeman.len() != sites {
            return Err(Error::Contract(format!(
                "zeeman vector has length {}, expected {sites}",
                zeeman.len()
            )));
        }
        for (i, j, value) in couplings {
            if problem.coupling_entry(i, j)?.is_some() {
                return Err(Error::Contract(format!("coupling ({i},{j}) given twice")));
            }
            problem.set_coupling(i, j, value)?;
        }
        for (i, &h) in zeeman.iter().enumerate() {
            problem.set_zeeman(i, h)?;
        }
        Ok(problem)
    }

    /// Two sites joined by a single coupling `j12`, zero field.
    pub fn pair(j12: f64) -> Self {
        let mut p = Self::new(2).expect("two sites");
        p.set_coupling(0, 1, j12).expect("valid pair");
        p
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    fn key(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i >= self.sites || j >= self.sites {
            return Err(Error::Contract(format!(
                "site index ({i},{j}) out of range for {} sites",
                self.sites
            )));
        }
        if i == j {
            return Err(Error::Contract(format!("self-coupling on site {i}")));
        }
        Ok((i.min(j), i.max(j)))
    }

    fn coupling_entry(&self, i: usize, j: usize) -> Result<Option<f64>> {
        let key = self.key(i, j)?;
        Ok(self.couplings.get(&key).copied())
    }

    /// Sets `J_ij` (equivalently `J_ji`).
    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::invalid("coupling", format!("J_{i}{j} = {value}")));
        }
        let key = self.key(i, j)?;
        self.couplings.insert(key, value);
        Ok(())
    }

    pub fn set_zeeman(&mut self, i: usize, value: f64) -> Result<()> {
        if i >= self.sites {
            return Err(Error::Contract(format!(
                "site index {i} out of range for {} sites",
                self.sites
            )));
        }
        if !value.is_finite() {
            return Err(Error::invalid("zeeman", format!("lambda_{i} = {value}")));
        }
        self.zeeman[i] = value;
        Ok(())
    }

    /// `J_ij`, zero for uncoupled or identical sites. Panics on out-of-range indices.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.sites && j < self.sites, "site index out of range");
        if i == j {
            return 0.0;
        }
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Stored pairs `(i, j, J_ij)` with `i < j`, in lexicographic order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn zeeman(&self) -> &[f64] {
        &self.zeeman
    }

    /// Dense symmetric coupling matrix, zero diagonal.
    pub fn coupling_matrix(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.sites]; self.sites];
        for (i, j, v) in self.couplings() {
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }

    /// Energy of `config`, each unordered pair counted once.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if config.len() != self.sites {
            return Err(Error::Contract(format!(
                "configuration has {} spins, problem has {} sites",
                config.len(),
                self.sites
            )));
        }
        let s = config.as_slice();
        Ok(self.energy_unchecked(|i| f64::from(s[i])))
    }

    // Summation order is shared with the enumerator so both give identical bits.
    fn energy_unchecked(&self, spin: impl Fn(usize) -> f64) -> f64 {
        let mut e = 0.0;
        for (&(i, j), &v) in &self.couplings {
            e += v * spin(i) * spin(j);
        }
        for (i, &h) in self.zeeman.iter().enumerate() {
            e += h * spin(i);
        }
        e
    }

    /// Exhaustive ground-state search up to [`DEFAULT_ENUMERATION_LIMIT`] sites.
    pub fn brute_force_ground_state(&self) -> Result<GroundStateResult> {
        self.brute_force_ground_state_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    /// Enumerates all `2^M` configurations and returns every minimizer.
    ///
    /// Bit `i` of the enumeration index set means `σ_i = -1`, so the
    /// configurations come out in a fixed order starting from all-up.
    pub fn brute_force_ground_state_with_limit(&self, limit: usize) -> Result<GroundStateResult> {
        if self.sites > limit || self.sites >= usize::BITS as usize {
            return Err(Error::OracleInfeasible {
                sites: self.sites,
                limit,
            });
        }
        let mut best = f64::INFINITY;
        let mut minimizers: Vec<u64> = Vec::new();
        for mask in 0..(1u64 << self.sites) {
            let e = self.energy_unchecked(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
            if e < best {
                best = e;
                minimizers.clear();
                minimizers.push(mask);
            } else if e == best {
                minimizers.push(mask);
            }
        }
        let configurations = minimizers
            .into_iter()
            .map(|mask| SpinConfig::from_mask(mask, self.sites))
            .collect();
        Ok(GroundStateResult {
            minimum_energy: best,
            configurations,
        })
    }

    /// Reads a problem in the line-oriented text format.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the text format:
    ///
    /// ```text
    /// M <site_count>
    /// J <i> <j> <value>     # 0-based, i < j
    /// H <i> <value>
    /// ```
    ///
    /// `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut problem: Option<IsingProblem> = None;
        let mut seen_fields = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match (tokens[0], problem.as_mut()) {
                ("M", None) => {
                    if tokens.len() != 2 {
                        return Err(err(lineno, "expected `M <site_count>`".into()));
                    }
                    let m: usize = tokens[1]
                        .parse()
                        .map_err(|_| err(lineno, format!("bad site count `{}`", tokens[1])))?;
                    if m == 0 {
                        return Err(err(lineno, "empty problem (M = 0)".into()));
                    }
                    problem = Some(IsingProblem::new(m).expect("m > 0"));
                    seen_fields = vec![false; m];
                }
                ("M", Some(_)) => return Err(err(lineno, "site count given twice".into())),
                (_, None) => {
                    return Err(err(lineno, "the first record must be `M <site_count>`".into()))
                }
                ("J", Some(p)) => {
                    if tokens.len() != 4 {
                        return Err(err(lineno, "expected `J <i> <j> <value>`".into()));
                    }
                    let i = parse_index(tokens[1], p.sites).map_err(|r| err(lineno, r))?;
                    let j = parse_index(tokens[2], p.sites).map_err(|r| err(lineno, r))?;
                    if i >= j {
                        return Err(err(lineno, format!("coupling indices must satisfy i < j, got {i} {j}")));
                    }
                    let v = parse_value(tokens[3]).map_err(|r| err(lineno, r))?;
                    if p.couplings.contains_key(&(i, j)) {
                        return Err(err(lineno, format!("duplicate coupling ({i},{j})")));
                    }
                    p.couplings.insert((i, j), v);
                }
                ("H", Some(p)) => {
                    if tokens.len() != 3 {
                        return Err(err(lineno, "expected `H <i> <value>`".into()));
                    }
                    let i = parse_index(tokens[1], p.sites).map_err(|r| err(lineno, r))?;
                    let v = parse_value(tokens[2]).map_err(|r| err(lineno, r))?;
                    if seen_fields[i] {
                        return Err(err(lineno, format!("duplicate field on site {i}")));
                    }
                    seen_fields[i] = true;
                    p.zeeman[i] = v;
                }
                (other, Some(_)) => {
                    return Err(err(lineno, format!("unknown record type `{other}`")))
                }
            }
        }
        problem.ok_or_else(|| err(0, "empty problem: no `M` record".into()))
    }

    /// Writes the text format; parsing the output yields an identical problem.
    pub fn to_text(&self) -> String {
        let mut out = format!("M {}\n", self.sites);
        for (i, j, v) in self.couplings() {
            out.push_str(&format!("J {i} {j} {v:?}\n"));
        }
        for (i, &h) in self.zeeman.iter().enumerate() {
            if h != 0.0 {
                out.push_str(&format!("H {i} {h:?}\n"));
            }
        }
        out
    }
}

fn parse_index(token: &str, sites: usize) -> std::result::Result<usize, String> {
    let i: usize = token
        .parse()
        .map_err(|_| format!("bad site index `{token}`"))?;
    if i >= sites {
        return Err(format!("site index {i} out of range for {sites} sites"));
    }
    Ok(i)
}

fn parse_value(token: &str) -> std::result::Result<f64, String> {
    let v: f64 = token.parse().map_err(|_| format!("bad value `{token}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{token}`"));
    }
    Ok(v)
}

/// A spin configuration with entries in {+1, -1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Contract(format!("spin value {bad} is not +1 or -1")));
        }
        Ok(Self(spins))
    }

    fn from_mask(mask: u64, sites: usize) -> Self {
        Self((0..sites).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(c: SpinConfig) -> Self {
        c.0
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|&s| if s > 0 { "+1" } else { "-1" })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Exact minimum energy and every configuration attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub minimum_energy: f64,
    pub configurations: Vec<SpinConfig>,
}

impl GroundStateResult {
    pub fn contains(&self, config: &SpinConfig) -> bool {
        self.configurations.iter().any(|c| c == config)
    }
}

/// Spins read out of a set of phases, with a per-site resolution flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub spins: SpinConfig,
    pub resolved: Vec<bool>,
}

impl Readout {
    pub fn all_resolved(&self) -> bool {
        self.resolved.iter().all(|&r| r)
    }

    pub fn none_resolved(&self) -> bool {
        self.resolved.iter().all(|&r| !r)
    }
}

/// Maps phases (radians, master reference at 0) to spins by the sign of `sin φ`.
///
/// A site whose `|sin φ|` is below `threshold` is still near the master
/// reference (0 or π) and is flagged unresolved; its spin entry is the sign
/// of `sin φ`, with `+1` for an exact zero.
pub fn readout_spins(phases: &[f64], threshold: f64) -> Readout {
    let mut spins = Vec::with_capacity(phases.len());
    let mut resolved = Vec::with_capacity(phases.len());
    for &phi in phases {
        let s = phi.sin();
        spins.push(if s < 0.0 { -1 } else { 1 });
        resolved.push(s.abs() >= threshold);
    }
    Readout {
        spins: SpinConfig(spins),
        resolved,
    }
}
