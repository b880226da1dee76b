//! Experiment knobs and their `key = value` file form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::machine::Step;
use crate::operator::{DEFAULT_CHAIN_CAP, DEFAULT_WINDOW};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "SCOTTLIMIT_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    /// Default stage count for `chain`.
    pub chain_cap: Step,
    /// Zero-claim window and fixed-point window.
    pub window: Step,
    /// Size of the exhaustive machine enumeration.
    pub enum_states: usize,
    pub enum_symbols: usize,
    /// Chain length checked per enumerated machine.
    pub chain_stages: Step,
    /// Machines sampled for the monotonicity sweep.
    pub sampled_machines: usize,
    /// Machines sampled for the continuity sweep.
    pub continuity_machines: usize,
    /// Directed sets drawn per continuity machine.
    pub directed_sets: usize,
    /// Observations are drawn over indices `0..observation_width`.
    pub observation_width: usize,
    /// Largest halting step for which the limit is checked.
    pub omega_fuel: Step,
    /// Bounds `0..=overhead_max` for the overhead sweep.
    pub overhead_max: Step,
    /// Decider bounds `0..=diagonal_max`.
    pub diagonal_max: Step,
    /// Ticks `X` may run before it is reported undetermined.
    pub diagonal_fuel: Step,
    pub fuel_schedule: Vec<Step>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            chain_cap: DEFAULT_CHAIN_CAP,
            window: DEFAULT_WINDOW,
            enum_states: 2,
            enum_symbols: 2,
            chain_stages: 64,
            sampled_machines: 50,
            continuity_machines: 20,
            directed_sets: 1000,
            observation_width: 5,
            omega_fuel: 64,
            overhead_max: 100,
            diagonal_max: 25,
            diagonal_fuel: 1000,
            fuel_schedule: (0..=10).map(|i| 1 << i).collect(),
        }
    }
}

impl Config {
    pub const KEYS: [&'static str; 15] = [
        "seed",
        "chain_cap",
        "window",
        "enum_states",
        "enum_symbols",
        "chain_stages",
        "sampled_machines",
        "continuity_machines",
        "directed_sets",
        "observation_width",
        "omega_fuel",
        "overhead_max",
        "diagonal_max",
        "diagonal_fuel",
        "fuel_schedule",
    ];

    /// Apply `key = value` lines on top of `self`. `#` starts a comment.
    pub fn merge_text(mut self, text: &str) -> Result<Config, ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Syntax { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(self)
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Config::default().merge_text(&text)
    }

    /// Defaults, overridden by the file named in [`CONFIG_ENV`] if set.
    pub fn from_env() -> Result<Config, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Config::from_file(Path::new(&p)),
            _ => Ok(Config::default()),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("{key}: not a non-negative integer: {v:?}"))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "chain_cap" => self.chain_cap = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "enum_states" => self.enum_states = num(key, value)?,
            "enum_symbols" => self.enum_symbols = num(key, value)?,
            "chain_stages" => self.chain_stages = num(key, value)?,
            "sampled_machines" => self.sampled_machines = num(key, value)?,
            "continuity_machines" => self.continuity_machines = num(key, value)?,
            "directed_sets" => self.directed_sets = num(key, value)?,
            "observation_width" => self.observation_width = num(key, value)?,
            "omega_fuel" => self.omega_fuel = num(key, value)?,
            "overhead_max" => self.overhead_max = num(key, value)?,
            "diagonal_max" => self.diagonal_max = num(key, value)?,
            "diagonal_fuel" => self.diagonal_fuel = num(key, value)?,
            "fuel_schedule" => {
                self.fuel_schedule = value.split(',').map(|v| num(key, v.trim())).collect::<Result<_, _>>()?
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// The `key = value` form of every setting.
    pub fn to_text(&self) -> String {
        let schedule: Vec<String> = self.fuel_schedule.iter().map(u64::to_string).collect();
        let values = [
            self.seed.to_string(),
            self.chain_cap.to_string(),
            self.window.to_string(),
            self.enum_states.to_string(),
            self.enum_symbols.to_string(),
            self.chain_stages.to_string(),
            self.sampled_machines.to_string(),
            self.continuity_machines.to_string(),
            self.directed_sets.to_string(),
            self.observation_width.to_string(),
            self.omega_fuel.to_string(),
            self.overhead_max.to_string(),
            self.diagonal_max.to_string(),
            self.diagonal_fuel.to_string(),
            schedule.join(","),
        ];
        Config::KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
