//! Flat `key=value` run-configuration files.
//!
//! One assignment per line; `#` starts a comment (whole-line or trailing);
//! blank lines are ignored. Unknown and duplicate keys are rejected so that
//! typos surface as config errors instead of silently running defaults.
//! SNR is accepted in dB only and converted to linear scale exactly once,
//! downstream of parsing.

use std::fmt;

/// A malformed run configuration (maps to exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parsed run configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Number of sub-bands.
    pub u: u32,
    /// Hopped sub-bands; `None` lets FH commands maximize over `v`.
    pub v: Option<u32>,
    /// SNR in dB (required by every command except `sweep-snr`).
    pub gamma_db: Option<f64>,
    /// User-count pmf `q_1, q_2, …`.
    pub q: Vec<f64>,
    /// Designed user count for FD; defaults to `u`.
    pub n_des: u32,
    /// Target outage probability.
    pub eps: Option<f64>,
    /// FH bound selector (1, 2 or 3).
    pub bound: u8,
    /// Monte Carlo draws per ψ kernel.
    pub psi_samples: u64,
    /// Monte Carlo draws for oracle estimates.
    pub mc_samples: u64,
    /// ε grid for `sweep-eps` and `compare`.
    pub eps_start: f64,
    pub eps_stop: f64,
    pub eps_points: u32,
    /// SNR grid (dB) for `sweep-snr`.
    pub gamma_db_start: f64,
    pub gamma_db_stop: f64,
    pub gamma_db_points: u32,
}

impl RunConfig {
    /// Parses the text of a configuration file.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut u = None;
        let mut v = None;
        let mut gamma_db = None;
        let mut q: Option<Vec<f64>> = None;
        let mut n_des = None;
        let mut eps = None;
        let mut bound = None;
        let mut psi_samples = None;
        let mut mc_samples = None;
        let mut eps_start = None;
        let mut eps_stop = None;
        let mut eps_points = None;
        let mut gamma_db_start = None;
        let mut gamma_db_stop = None;
        let mut gamma_db_points = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {lineno}: expected key=value, got {line:?}"));
            };
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return err(format!("line {lineno}: empty value for {key:?}"));
            }

            fn parse_as<T: std::str::FromStr>(
                key: &str,
                value: &str,
                lineno: usize,
            ) -> Result<T, ConfigError> {
                value.parse().map_err(|_| {
                    ConfigError(format!("line {lineno}: cannot parse {key}={value:?}"))
                })
            }
            fn set<T>(
                slot: &mut Option<T>,
                key: &str,
                value: T,
                lineno: usize,
            ) -> Result<(), ConfigError> {
                if slot.is_some() {
                    return err(format!("line {lineno}: duplicate key {key:?}"));
                }
                *slot = Some(value);
                Ok(())
            }

            match key {
                "u" => set(&mut u, key, parse_as::<u32>(key, value, lineno)?, lineno)?,
                "v" => set(&mut v, key, parse_as::<u32>(key, value, lineno)?, lineno)?,
                "gamma_db" => {
                    set(&mut gamma_db, key, parse_as::<f64>(key, value, lineno)?, lineno)?
                }
                "q" => {
                    let probs = value
                        .split(',')
                        .map(|s| {
                            s.trim().parse::<f64>().map_err(|_| {
                                ConfigError(format!("line {lineno}: bad pmf entry {s:?}"))
                            })
                        })
                        .collect::<Result<Vec<f64>, _>>()?;
                    set(&mut q, key, probs, lineno)?;
                }
                "n_des" => set(&mut n_des, key, parse_as::<u32>(key, value, lineno)?, lineno)?,
                "eps" => set(&mut eps, key, parse_as::<f64>(key, value, lineno)?, lineno)?,
                "bound" => set(&mut bound, key, parse_as::<u8>(key, value, lineno)?, lineno)?,
                "psi_samples" => {
                    set(&mut psi_samples, key, parse_as::<u64>(key, value, lineno)?, lineno)?
                }
                "mc_samples" => {
                    set(&mut mc_samples, key, parse_as::<u64>(key, value, lineno)?, lineno)?
                }
                "eps_start" => {
                    set(&mut eps_start, key, parse_as::<f64>(key, value, lineno)?, lineno)?
                }
                "eps_stop" => {
                    set(&mut eps_stop, key, parse_as::<f64>(key, value, lineno)?, lineno)?
                }
                "eps_points" => {
                    set(&mut eps_points, key, parse_as::<u32>(key, value, lineno)?, lineno)?
                }
                "gamma_db_start" => {
                    set(&mut gamma_db_start, key, parse_as::<f64>(key, value, lineno)?, lineno)?
                }
                "gamma_db_stop" => {
                    set(&mut gamma_db_stop, key, parse_as::<f64>(key, value, lineno)?, lineno)?
                }
                "gamma_db_points" => {
                    set(&mut gamma_db_points, key, parse_as::<u32>(key, value, lineno)?, lineno)?
                }
                _ => return err(format!("line {lineno}: unknown key {key:?}")),
            }
        }

        let Some(u) = u else {
            return err("missing required key \"u\"");
        };
        let Some(q) = q else {
            return err("missing required key \"q\"");
        };
        let cfg = RunConfig {
            u,
            v,
            gamma_db,
            q,
            n_des: n_des.unwrap_or(u),
            eps,
            bound: bound.unwrap_or(1),
            psi_samples: psi_samples.unwrap_or(200_000),
            mc_samples: mc_samples.unwrap_or(1_000_000),
            eps_start: eps_start.unwrap_or(0.01),
            eps_stop: eps_stop.unwrap_or(0.2),
            eps_points: eps_points.unwrap_or(20),
            gamma_db_start: gamma_db_start.unwrap_or(0.0),
            gamma_db_stop: gamma_db_stop.unwrap_or(30.0),
            gamma_db_points: gamma_db_points.unwrap_or(16),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.u == 0 {
            return err("u must be at least 1");
        }
        if let Some(v) = self.v {
            if v == 0 || v > self.u {
                return err(format!("v must satisfy 1 ≤ v ≤ u, got v={v} with u={}", self.u));
            }
        }
        if !(1..=3).contains(&self.bound) {
            return err(format!("bound must be 1, 2 or 3, got {}", self.bound));
        }
        if self.psi_samples == 0 || self.mc_samples == 0 {
            return err("psi_samples and mc_samples must be positive");
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e < 1.0) {
                return err(format!("eps must lie in (0, 1), got {e}"));
            }
        }
        if self.eps_points == 0 || self.gamma_db_points == 0 {
            return err("grid point counts must be positive");
        }
        for bound in [self.eps_start, self.eps_stop] {
            if !(bound > 0.0 && bound < 1.0) {
                return err(format!("eps grid endpoints must lie in (0, 1), got {bound}"));
            }
        }
        if self.eps_start > self.eps_stop {
            return err("eps_start must not exceed eps_stop");
        }
        if self.gamma_db_start > self.gamma_db_stop {
            return err("gamma_db_start must not exceed gamma_db_stop");
        }
        Ok(())
    }

    /// The configured SNR in dB, or a config error naming the command that
    /// needed it.
    pub fn require_gamma_db(&self, needed_by: &str) -> Result<f64, ConfigError> {
        self.gamma_db
            .ok_or_else(|| ConfigError(format!("{needed_by} requires key \"gamma_db\"")))
    }

    /// The configured ε, or a config error naming the command that needed it.
    pub fn require_eps(&self, needed_by: &str) -> Result<f64, ConfigError> {
        self.eps
            .ok_or_else(|| ConfigError(format!("{needed_by} requires key \"eps\"")))
    }
}

/// `points` evenly spaced values from `start` to `stop` (inclusive);
/// a single point degenerates to `start`.
pub fn linspace(start: f64, stop: f64, points: u32) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|k| start + (stop - start) * f64::from(k) / f64::from(points - 1))
        .collect()
}
