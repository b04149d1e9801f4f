//! Line-based experiment configuration.
//!
//! Configs are plain text, one assignment per line, `section.key = value`,
//! with `#` comments and blank lines ignored.  Every key is known ahead of
//! time; an unrecognized key is a hard error so that typos cannot silently
//! fall back to defaults.  Values round-trip bit-exactly through
//! [`ExperimentConfig::serialize`] followed by [`load_str`].

use std::fmt::Write as _;
use std::path::Path;

use crate::HarnessError;

/// Everything an experiment run needs, with workable defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Shallowness parameter `mu`.
    pub mu: f64,
    /// Inverse Bond number.
    pub inv_bond: f64,
    /// Horizontal dimension, 1 or 2.
    pub dim: usize,
    /// Carrier wavevectors on the macroscopic integer lattice.
    pub carriers: [[i64; 2]; 3],
    /// Scale ratios `M = 1/eps`, ascending (so the eps list is descending).
    pub m_list: Vec<u32>,
    /// Microscopic grid points per axis at the smallest scale ratio.
    pub micro_n: usize,
    /// Macroscopic grid points per axis.
    pub macro_n: usize,
    /// Macroscopic end time.
    pub t0: f64,
    /// Macroscopic step size.
    pub dt_macro: f64,
    /// Microscopic step size.
    pub dt_micro: f64,
    /// Snapshots per macroscopic unit.
    pub snapshots: usize,
    /// Sample times (microscopic) for the residual experiment.
    pub residual_times: Vec<f64>,
    /// Sobolev index handed to the error metric.
    pub norm_index: f64,
    /// Envelope family: `gaussian` or `mode`.
    pub envelope_family: String,
    /// Per-wave envelope amplitudes.
    pub envelope_amplitude: [f64; 3],
    /// Bump concentration (gaussian family).
    pub envelope_width: f64,
    /// Macroscopic mode number (mode family).
    pub envelope_mode: i64,
    /// Required distance to the bottom.
    pub h_min: f64,
    /// Required hyperbolicity minimum.
    pub a0: f64,
    /// Relative harmonic-defect gate.
    pub resonance_tol: f64,
    /// Truncation order of the surface operator expansion.
    pub dno_order: usize,
    /// Dispersion-table scan: smallest wavenumber.
    pub table_k_min: f64,
    /// Dispersion-table scan: largest wavenumber.
    pub table_k_max: f64,
    /// Dispersion-table scan: sample count.
    pub table_samples: usize,
    /// Resonance scan: `mu` range and sample count.
    pub scan_mu: (f64, f64, usize),
    /// Resonance scan: inverse-Bond range and sample count.
    pub scan_ib: (f64, f64, usize),
    /// Resonance scan: wavenumber range and sample count.
    pub scan_k: (f64, f64, usize),
    /// Resonance scan: interaction order, 2 or 3.
    pub scan_order: usize,
    /// Output directory for CSV reports and snapshot binaries.
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            mu: 1.0,
            inv_bond: 0.0,
            dim: 1,
            carriers: [[1, 0], [2, 0], [3, 0]],
            m_list: vec![16, 32, 64],
            micro_n: 512,
            macro_n: 64,
            t0: 1.0,
            dt_macro: 0.01,
            dt_micro: 0.04,
            snapshots: 16,
            residual_times: vec![0.5],
            norm_index: 4.0,
            envelope_family: String::from("gaussian"),
            envelope_amplitude: [0.1, 0.1, 0.1],
            envelope_width: 2.0,
            envelope_mode: 1,
            h_min: 0.5,
            a0: 0.5,
            resonance_tol: 1e-3,
            dno_order: 4,
            table_k_min: 0.1,
            table_k_max: 5.0,
            table_samples: 50,
            scan_mu: (1.0, 4.0, 7),
            scan_ib: (0.0, 0.5, 6),
            scan_k: (0.5, 5.0, 40),
            scan_order: 3,
            out_dir: String::from("out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, HarnessError> {
    v.trim().parse().map_err(|_| HarnessError::InvalidValue {
        key: key.to_string(),
        message: format!("expected a real number, got `{v}`"),
    })
}

fn parse_usize(key: &str, v: &str) -> Result<usize, HarnessError> {
    v.trim().parse().map_err(|_| HarnessError::InvalidValue {
        key: key.to_string(),
        message: format!("expected a nonnegative integer, got `{v}`"),
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str, what: &str) -> Result<Vec<T>, HarnessError> {
    v.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| HarnessError::InvalidValue {
                key: key.to_string(),
                message: format!("expected {what}, got `{s}`"),
            })
        })
        .collect()
}

fn parse_vector(key: &str, v: &str) -> Result<[i64; 2], HarnessError> {
    let parts: Vec<i64> = parse_list(key, v, "a lattice integer")?;
    match parts.len() {
        1 => Ok([parts[0], 0]),
        2 => Ok([parts[0], parts[1]]),
        _ => Err(HarnessError::InvalidValue {
            key: key.to_string(),
            message: String::from("expected one or two lattice components"),
        }),
    }
}

fn parse_range(key: &str, v: &str) -> Result<(f64, f64, usize), HarnessError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 3 {
        return Err(HarnessError::InvalidValue {
            key: key.to_string(),
            message: String::from("expected `min,max,samples`"),
        });
    }
    Ok((
        parse_f64(key, parts[0])?,
        parse_f64(key, parts[1])?,
        parse_usize(key, parts[2])?,
    ))
}

impl ExperimentConfig {
    /// Apply one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let v = value.trim();
        match key {
            "params.mu" => self.mu = parse_f64(key, v)?,
            "params.inv_bond" => self.inv_bond = parse_f64(key, v)?,
            "params.dim" => self.dim = parse_usize(key, v)?,
            "carrier.xi1" => self.carriers[0] = parse_vector(key, v)?,
            "carrier.xi2" => self.carriers[1] = parse_vector(key, v)?,
            "carrier.xi3" => self.carriers[2] = parse_vector(key, v)?,
            "scale.m_list" => {
                let list: Vec<u32> = parse_list(key, v, "a scale ratio")?;
                self.m_list = list;
            }
            "scale.micro_n" => self.micro_n = parse_usize(key, v)?,
            "scale.macro_n" => self.macro_n = parse_usize(key, v)?,
            "run.t0" => self.t0 = parse_f64(key, v)?,
            "run.dt_macro" => self.dt_macro = parse_f64(key, v)?,
            "run.dt_micro" => self.dt_micro = parse_f64(key, v)?,
            "run.snapshots" => self.snapshots = parse_usize(key, v)?,
            "run.residual_times" => self.residual_times = parse_list(key, v, "a sample time")?,
            "run.norm_index" => self.norm_index = parse_f64(key, v)?,
            "envelope.family" => self.envelope_family = v.to_string(),
            "envelope.amplitude" => {
                let list: Vec<f64> = parse_list(key, v, "an amplitude")?;
                if list.len() != 3 {
                    return Err(HarnessError::InvalidValue {
                        key: key.to_string(),
                        message: String::from("expected three amplitudes"),
                    });
                }
                self.envelope_amplitude = [list[0], list[1], list[2]];
            }
            "envelope.width" => self.envelope_width = parse_f64(key, v)?,
            "envelope.mode" => {
                self.envelope_mode = v.parse().map_err(|_| HarnessError::InvalidValue {
                    key: key.to_string(),
                    message: format!("expected an integer, got `{v}`"),
                })?
            }
            "gates.h_min" => self.h_min = parse_f64(key, v)?,
            "gates.a0" => self.a0 = parse_f64(key, v)?,
            "gates.resonance_tol" => self.resonance_tol = parse_f64(key, v)?,
            "gates.dno_order" => self.dno_order = parse_usize(key, v)?,
            "table.k_min" => self.table_k_min = parse_f64(key, v)?,
            "table.k_max" => self.table_k_max = parse_f64(key, v)?,
            "table.samples" => self.table_samples = parse_usize(key, v)?,
            "scan.mu" => self.scan_mu = parse_range(key, v)?,
            "scan.inv_bond" => self.scan_ib = parse_range(key, v)?,
            "scan.k" => self.scan_k = parse_range(key, v)?,
            "scan.order" => self.scan_order = parse_usize(key, v)?,
            "output.dir" => self.out_dir = v.to_string(),
            _ => return Err(HarnessError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Reject configs that violate the structural invariants.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |key: &str, message: &str| {
            Err(HarnessError::InvalidValue {
                key: key.to_string(),
                message: message.to_string(),
            })
        };
        if self.dim != 1 && self.dim != 2 {
            return bad("params.dim", "dimension must be 1 or 2");
        }
        if self.dim == 1 && self.carriers.iter().any(|c| c[1] != 0) {
            return bad("carrier.xi*", "second component must vanish when dim = 1");
        }
        if self.m_list.is_empty() || self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("scale.m_list", "scale ratios must be strictly ascending");
        }
        if self.m_list.iter().any(|&m| m == 0) {
            return bad("scale.m_list", "scale ratios must be positive");
        }
        for (key, v) in [
            ("gates.h_min", self.h_min),
            ("gates.a0", self.a0),
            ("gates.resonance_tol", self.resonance_tol),
        ] {
            if !(v > 0.0) {
                return bad(key, "gates must be positive");
            }
        }
        for (key, v) in [
            ("run.t0", self.t0),
            ("run.dt_macro", self.dt_macro),
            ("run.dt_micro", self.dt_micro),
        ] {
            if !(v > 0.0) {
                return bad(key, "times must be positive");
            }
        }
        if self.micro_n < 8 || self.macro_n < 8 {
            return bad("scale.micro_n", "grids need at least 8 points");
        }
        if self.envelope_family != "gaussian" && self.envelope_family != "mode" {
            return bad("envelope.family", "family must be `gaussian` or `mode`");
        }
        Ok(())
    }

    /// Render the full configuration in its own input syntax.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let fl = |x: f64| format!("{x}");
        let _ = writeln!(s, "params.mu = {}", fl(self.mu));
        let _ = writeln!(s, "params.inv_bond = {}", fl(self.inv_bond));
        let _ = writeln!(s, "params.dim = {}", self.dim);
        for (i, c) in self.carriers.iter().enumerate() {
            let _ = writeln!(s, "carrier.xi{} = {},{}", i + 1, c[0], c[1]);
        }
        let ms: Vec<String> = self.m_list.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "scale.m_list = {}", ms.join(","));
        let _ = writeln!(s, "scale.micro_n = {}", self.micro_n);
        let _ = writeln!(s, "scale.macro_n = {}", self.macro_n);
        let _ = writeln!(s, "run.t0 = {}", fl(self.t0));
        let _ = writeln!(s, "run.dt_macro = {}", fl(self.dt_macro));
        let _ = writeln!(s, "run.dt_micro = {}", fl(self.dt_micro));
        let _ = writeln!(s, "run.snapshots = {}", self.snapshots);
        let ts: Vec<String> = self.residual_times.iter().map(|t| fl(*t)).collect();
        let _ = writeln!(s, "run.residual_times = {}", ts.join(","));
        let _ = writeln!(s, "run.norm_index = {}", fl(self.norm_index));
        let _ = writeln!(s, "envelope.family = {}", self.envelope_family);
        let amps: Vec<String> = self.envelope_amplitude.iter().map(|a| fl(*a)).collect();
        let _ = writeln!(s, "envelope.amplitude = {}", amps.join(","));
        let _ = writeln!(s, "envelope.width = {}", fl(self.envelope_width));
        let _ = writeln!(s, "envelope.mode = {}", self.envelope_mode);
        let _ = writeln!(s, "gates.h_min = {}", fl(self.h_min));
        let _ = writeln!(s, "gates.a0 = {}", fl(self.a0));
        let _ = writeln!(s, "gates.resonance_tol = {}", fl(self.resonance_tol));
        let _ = writeln!(s, "gates.dno_order = {}", self.dno_order);
        let _ = writeln!(s, "table.k_min = {}", fl(self.table_k_min));
        let _ = writeln!(s, "table.k_max = {}", fl(self.table_k_max));
        let _ = writeln!(s, "table.samples = {}", self.table_samples);
        let _ = writeln!(
            s,
            "scan.mu = {},{},{}",
            fl(self.scan_mu.0),
            fl(self.scan_mu.1),
            self.scan_mu.2
        );
        let _ = writeln!(
            s,
            "scan.inv_bond = {},{},{}",
            fl(self.scan_ib.0),
            fl(self.scan_ib.1),
            self.scan_ib.2
        );
        let _ = writeln!(
            s,
            "scan.k = {},{},{}",
            fl(self.scan_k.0),
            fl(self.scan_k.1),
            self.scan_k.2
        );
        let _ = writeln!(s, "scan.order = {}", self.scan_order);
        let _ = writeln!(s, "output.dir = {}", self.out_dir);
        s
    }

    /// The descending steepness list implied by the scale ratios.
    pub fn eps_list(&self) -> Vec<f64> {
        self.m_list.iter().map(|&m| 1.0 / m as f64).collect()
    }
}

/// Parse a configuration from its textual form, starting from defaults.
pub fn load_str(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::default();
    let mut assignments = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(HarnessError::Parse {
                line: lineno + 1,
                message: format!("expected `section.key = value`, got `{line}`"),
            });
        };
        cfg.set(key.trim(), value).map_err(|e| match e {
            HarnessError::UnknownKey(k) => HarnessError::Parse {
                line: lineno + 1,
                message: format!("unknown key `{k}`"),
            },
            HarnessError::InvalidValue { key, message } => HarnessError::Parse {
                line: lineno + 1,
                message: format!("bad value for `{key}`: {message}"),
            },
            other => other,
        })?;
        assignments += 1;
    }
    if assignments == 0 {
        return Err(HarnessError::Parse {
            line: 0,
            message: String::from("configuration contains no assignments"),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Load and validate a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    load_str(&text)
}
