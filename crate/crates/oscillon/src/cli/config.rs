//! Sectioned key = value run configuration. Unknown sections or keys are
//! errors (no silent typos), every field is validated by name, and the
//! canonical echo is deterministic so manifests diff cleanly.

use crate::init::InitKind;
use crate::potential::BuiltinName;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid value for {field}: {msg}")]
    Validation { field: String, msg: String },
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.into(), msg: msg.into() }
}

/// Which potential to run.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialChoice {
    Builtin { name: BuiltinName, alpha: Option<f64> },
    /// raw coefficients c_1..c_d plus a user-supplied certificate candidate
    Custom { coefficients: Vec<f64>, q: u32, a0: f64, a1: f64, a2: f64, a3: f64, phisecond_c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    StrangExact,
    Rk4,
}

/// Parsed and validated run configuration with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialChoice,
    pub grid_n: usize,
    pub time_s: f64,
    pub time_t: f64,
    pub dt: f64,
    pub method: MethodChoice,
    pub adapt: bool,
    pub local_error_target: f64,
    pub dealias: bool,
    pub h: f64,
    pub init: InitKind,
    pub experiment: ExperimentParams,
    pub out_dir: String,
    pub snapshot_stride: usize,
    pub timeseries_stride: usize,
}

/// Experiment-specific knobs (all have defaults).
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams {
    /// explicit start times; empty means the default dyadic grid
    pub s_list: Vec<f64>,
    pub n_seeds: usize,
    /// decomposition step
    pub dt: f64,
    /// box dimension: modal truncation and ε grid
    pub m_modes: usize,
    pub eps_decades: f64,
    pub eps_per_decade: usize,
    /// oracle comparison FD resolutions
    pub m_list: Vec<usize>,
    pub dt_fd: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            s_list: Vec::new(),
            n_seeds: 10,
            dt: 0.005,
            m_modes: 16,
            eps_decades: 2.0,
            eps_per_decade: 4,
            m_list: vec![64, 128, 256],
            dt_fd: 5e-4,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialChoice::Builtin { name: BuiltinName::Vminus, alpha: None },
            grid_n: 128,
            time_s: 0.0,
            time_t: 10.0,
            dt: 0.01,
            method: MethodChoice::StrangExact,
            adapt: false,
            local_error_target: 1e-8,
            dealias: false,
            h: 1.0,
            init: InitKind::Thermal { seed: 1, amplitude: 1.0, k0: 4.0 },
            experiment: ExperimentParams::default(),
            out_dir: "out".into(),
            snapshot_stride: 10,
            timeseries_stride: 1,
        }
    }
}

struct RawItem {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn parse_items(text: &str) -> Result<Vec<RawItem>, ConfigError> {
    let mut items = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or(ConfigError::Parse { line, msg: "unterminated section header".into() })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(ConfigError::Parse {
            line,
            msg: format!("expected key = value, got '{trimmed}'"),
        })?;
        if section.is_empty() {
            return Err(ConfigError::Parse { line, msg: "key outside any [section]".into() });
        }
        items.push(RawItem {
            line,
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(items)
}

fn parse_f64(item: &RawItem) -> Result<f64, ConfigError> {
    item.value.parse::<f64>().map_err(|_| ConfigError::Parse {
        line: item.line,
        msg: format!("{}.{} must be a number, got '{}'", item.section, item.key, item.value),
    })
}

fn parse_usize(item: &RawItem) -> Result<usize, ConfigError> {
    item.value.parse::<usize>().map_err(|_| ConfigError::Parse {
        line: item.line,
        msg: format!("{}.{} must be an integer, got '{}'", item.section, item.key, item.value),
    })
}

fn parse_bool(item: &RawItem) -> Result<bool, ConfigError> {
    match item.value.as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(ConfigError::Parse {
            line: item.line,
            msg: format!("{}.{} must be a boolean, got '{other}'", item.section, item.key),
        }),
    }
}

fn parse_f64_list(item: &RawItem) -> Result<Vec<f64>, ConfigError> {
    item.value
        .split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| ConfigError::Parse {
                line: item.line,
                msg: format!("{}.{}: '{tok}' is not a number", item.section, item.key),
            })
        })
        .collect()
}

fn parse_usize_list(item: &RawItem) -> Result<Vec<usize>, ConfigError> {
    item.value
        .split(',')
        .map(|tok| {
            tok.trim().parse::<usize>().map_err(|_| ConfigError::Parse {
                line: item.line,
                msg: format!("{}.{}: '{tok}' is not an integer", item.section, item.key),
            })
        })
        .collect()
}

/// Parse, fill defaults, and validate.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let items = parse_items(text)?;
    let mut cfg = RunConfig::default();

    // accumulate potential fields before assembling the choice
    let mut pot_name: Option<String> = None;
    let mut pot_alpha: Option<f64> = None;
    let mut pot_coeffs: Option<Vec<f64>> = None;
    let mut pot_q: Option<u32> = None;
    let mut pot_a = [None::<f64>; 4];
    let mut pot_c2: Option<f64> = None;

    let mut init_kind: Option<String> = None;
    let mut init_seed: u64 = 1;
    let mut init_amplitude: f64 = 1.0;
    let mut init_k0: f64 = 4.0;
    let mut init_k: u32 = 1;
    let mut init_path: Option<String> = None;

    for item in &items {
        match (item.section.as_str(), item.key.as_str()) {
            ("potential", "name") => pot_name = Some(item.value.clone()),
            ("potential", "alpha") => pot_alpha = Some(parse_f64(item)?),
            ("potential", "coefficients") => pot_coeffs = Some(parse_f64_list(item)?),
            ("potential", "q") => pot_q = Some(parse_usize(item)? as u32),
            ("potential", "a0") => pot_a[0] = Some(parse_f64(item)?),
            ("potential", "a1") => pot_a[1] = Some(parse_f64(item)?),
            ("potential", "a2") => pot_a[2] = Some(parse_f64(item)?),
            ("potential", "a3") => pot_a[3] = Some(parse_f64(item)?),
            ("potential", "phisecond_c") => pot_c2 = Some(parse_f64(item)?),
            ("grid", "N") => cfg.grid_n = parse_usize(item)?,
            ("time", "s") => cfg.time_s = parse_f64(item)?,
            ("time", "t") => cfg.time_t = parse_f64(item)?,
            ("time", "dt") => cfg.dt = parse_f64(item)?,
            ("time", "method") => {
                cfg.method = match item.value.as_str() {
                    "strang_exact" => MethodChoice::StrangExact,
                    "rk4" => MethodChoice::Rk4,
                    other => {
                        return Err(ConfigError::Parse {
                            line: item.line,
                            msg: format!("time.method must be strang_exact or rk4, got '{other}'"),
                        })
                    }
                }
            }
            ("time", "adapt") => cfg.adapt = parse_bool(item)?,
            ("time", "local_error_target") => cfg.local_error_target = parse_f64(item)?,
            ("time", "dealias") => cfg.dealias = parse_bool(item)?,
            ("physics", "H") => cfg.h = parse_f64(item)?,
            ("init", "kind") => init_kind = Some(item.value.clone()),
            ("init", "seed") => {
                init_seed = item.value.parse::<u64>().map_err(|_| ConfigError::Parse {
                    line: item.line,
                    msg: format!("init.seed must be a nonnegative integer, got '{}'", item.value),
                })?
            }
            ("init", "amplitude") => init_amplitude = parse_f64(item)?,
            ("init", "k0") => init_k0 = parse_f64(item)?,
            ("init", "k") => init_k = parse_usize(item)? as u32,
            ("init", "path") => init_path = Some(item.value.clone()),
            ("experiment", "s_list") => cfg.experiment.s_list = parse_f64_list(item)?,
            ("experiment", "n_seeds") => cfg.experiment.n_seeds = parse_usize(item)?,
            ("experiment", "dt") => cfg.experiment.dt = parse_f64(item)?,
            ("experiment", "m_modes") => cfg.experiment.m_modes = parse_usize(item)?,
            ("experiment", "eps_decades") => cfg.experiment.eps_decades = parse_f64(item)?,
            ("experiment", "eps_per_decade") => cfg.experiment.eps_per_decade = parse_usize(item)?,
            ("experiment", "m_list") => cfg.experiment.m_list = parse_usize_list(item)?,
            ("experiment", "dt_fd") => cfg.experiment.dt_fd = parse_f64(item)?,
            ("output", "directory") => cfg.out_dir = item.value.clone(),
            ("output", "snapshot_stride") => cfg.snapshot_stride = parse_usize(item)?,
            ("output", "timeseries_stride") => cfg.timeseries_stride = parse_usize(item)?,
            (section, key) => {
                return Err(ConfigError::Parse {
                    line: item.line,
                    msg: format!("unknown key '{key}' in section [{section}]"),
                })
            }
        }
    }

    // assemble the potential choice
    cfg.potential = match (pot_name, pot_coeffs) {
        (Some(_), Some(_)) => {
            return Err(invalid("potential", "give either name or coefficients, not both"))
        }
        (Some(name), None) => {
            let parsed: BuiltinName = name
                .parse()
                .map_err(|e| invalid("potential.name", format!("{e}")))?;
            PotentialChoice::Builtin { name: parsed, alpha: pot_alpha }
        }
        (None, Some(coefficients)) => {
            let q = pot_q.ok_or_else(|| invalid("potential.q", "required for custom coefficients"))?;
            let [a0, a1, a2, a3] = pot_a;
            PotentialChoice::Custom {
                coefficients,
                q,
                a0: a0.ok_or_else(|| invalid("potential.a0", "required for custom coefficients"))?,
                a1: a1.unwrap_or(0.0),
                a2: a2.ok_or_else(|| invalid("potential.a2", "required for custom coefficients"))?,
                a3: a3.unwrap_or(0.0),
                phisecond_c: pot_c2.unwrap_or(1.0),
            }
        }
        (None, None) => cfg.potential,
    };

    // assemble init
    let kind = init_kind.unwrap_or_else(|| "thermal".into());
    cfg.init = match kind.as_str() {
        "thermal" => InitKind::Thermal { seed: init_seed, amplitude: init_amplitude, k0: init_k0 },
        "mode" => InitKind::Mode { k: init_k, amplitude: init_amplitude },
        "file" => InitKind::File {
            path: init_path.ok_or_else(|| invalid("init.path", "required for kind = file"))?,
        },
        other => return Err(invalid("init.kind", format!("unknown kind '{other}'"))),
    };

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if !(cfg.h > 0.0) {
        return Err(invalid("physics.H", "must be > 0"));
    }
    if cfg.grid_n < 8 || !cfg.grid_n.is_power_of_two() {
        return Err(invalid("grid.N", "must be a power of two >= 8"));
    }
    if cfg.time_t < cfg.time_s {
        return Err(invalid("time.t", "must be >= time.s"));
    }
    if !(cfg.dt > 0.0) {
        return Err(invalid("time.dt", "must be > 0"));
    }
    if !(cfg.local_error_target > 0.0) {
        return Err(invalid("time.local_error_target", "must be > 0"));
    }
    if let InitKind::Thermal { amplitude, k0, .. } = &cfg.init {
        if *amplitude < 0.0 {
            return Err(invalid("init.amplitude", "must be >= 0"));
        }
        if !(*k0 > 0.0) {
            return Err(invalid("init.k0", "must be > 0"));
        }
    }
    if cfg.experiment.n_seeds == 0 {
        return Err(invalid("experiment.n_seeds", "must be >= 1"));
    }
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    // shortest round-trip representation keeps the echo canonical
    format!("{x}")
}

/// Deterministic canonical echo; `parse_config(canonical(cfg)) == cfg`.
pub fn canonical(cfg: &RunConfig) -> String {
    let mut s = String::new();
    s.push_str("[potential]\n");
    match &cfg.potential {
        PotentialChoice::Builtin { name, alpha } => {
            let n = match name {
                BuiltinName::Vplus => "Vplus",
                BuiltinName::Vminus => "Vminus",
                BuiltinName::ValphaPlus => "Valpha_plus",
                BuiltinName::ValphaMinus => "Valpha_minus",
                BuiltinName::Vzero => "Vzero",
            };
            s.push_str(&format!("name = {n}\n"));
            if let Some(a) = alpha {
                s.push_str(&format!("alpha = {}\n", fmt_f64(*a)));
            }
        }
        PotentialChoice::Custom { coefficients, q, a0, a1, a2, a3, phisecond_c } => {
            let cs: Vec<String> = coefficients.iter().map(|c| fmt_f64(*c)).collect();
            s.push_str(&format!("coefficients = {}\n", cs.join(", ")));
            s.push_str(&format!("q = {q}\n"));
            s.push_str(&format!("a0 = {}\n", fmt_f64(*a0)));
            s.push_str(&format!("a1 = {}\n", fmt_f64(*a1)));
            s.push_str(&format!("a2 = {}\n", fmt_f64(*a2)));
            s.push_str(&format!("a3 = {}\n", fmt_f64(*a3)));
            s.push_str(&format!("phisecond_c = {}\n", fmt_f64(*phisecond_c)));
        }
    }
    s.push_str(&format!("\n[grid]\nN = {}\n", cfg.grid_n));
    s.push_str(&format!(
        "\n[time]\ns = {}\nt = {}\ndt = {}\nmethod = {}\nadapt = {}\nlocal_error_target = {}\ndealias = {}\n",
        fmt_f64(cfg.time_s),
        fmt_f64(cfg.time_t),
        fmt_f64(cfg.dt),
        match cfg.method {
            MethodChoice::StrangExact => "strang_exact",
            MethodChoice::Rk4 => "rk4",
        },
        cfg.adapt,
        fmt_f64(cfg.local_error_target),
        cfg.dealias,
    ));
    s.push_str(&format!("\n[physics]\nH = {}\n", fmt_f64(cfg.h)));
    s.push_str("\n[init]\n");
    match &cfg.init {
        InitKind::Thermal { seed, amplitude, k0 } => {
            s.push_str(&format!(
                "kind = thermal\nseed = {seed}\namplitude = {}\nk0 = {}\n",
                fmt_f64(*amplitude),
                fmt_f64(*k0)
            ));
        }
        InitKind::Mode { k, amplitude } => {
            s.push_str(&format!("kind = mode\nk = {k}\namplitude = {}\n", fmt_f64(*amplitude)));
        }
        InitKind::File { path } => {
            s.push_str(&format!("kind = file\npath = {path}\n"));
        }
    }
    let e = &cfg.experiment;
    s.push_str("\n[experiment]\n");
    if !e.s_list.is_empty() {
        let xs: Vec<String> = e.s_list.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&format!("s_list = {}\n", xs.join(", ")));
    }
    s.push_str(&format!("n_seeds = {}\n", e.n_seeds));
    s.push_str(&format!("dt = {}\n", fmt_f64(e.dt)));
    s.push_str(&format!("m_modes = {}\n", e.m_modes));
    s.push_str(&format!("eps_decades = {}\n", fmt_f64(e.eps_decades)));
    s.push_str(&format!("eps_per_decade = {}\n", e.eps_per_decade));
    let ms: Vec<String> = e.m_list.iter().map(|m| m.to_string()).collect();
    s.push_str(&format!("m_list = {}\n", ms.join(", ")));
    s.push_str(&format!("dt_fd = {}\n", fmt_f64(e.dt_fd)));
    s.push_str(&format!(
        "\n[output]\ndirectory = {}\nsnapshot_stride = {}\ntimeseries_stride = {}\n",
        cfg.out_dir, cfg.snapshot_stride, cfg.timeseries_stride
    ));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults_and_echoes() {
        let cfg = parse_config("[potential]\nname = Vminus\n").unwrap();
        assert_eq!(cfg.grid_n, 128);
        assert_eq!(cfg.h, 1.0);
        let echo = canonical(&cfg);
        let reparsed = parse_config(&echo).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn negative_h_is_validation_error() {
        let err = parse_config("[potential]\nname = Vminus\n\n[physics]\nH = -1\n").unwrap_err();
        match err {
            ConfigError::Validation { field, .. } => assert_eq!(field, "physics.H"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_is_parse_error_with_line() {
        let err = parse_config("[potential]\nname = Vminus\n\n[grid]\nptoential = 3\n").unwrap_err();
        match err {
            ConfigError::Parse { line, msg } => {
                assert_eq!(line, 5);
                assert!(msg.contains("ptoential"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config(
            "# run setup\n[potential]\nname = Vplus  # the defocusing case\n\n[grid]\nN = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.grid_n, 64);
    }

    #[test]
    fn custom_potential_requires_certificate_fields() {
        let err = parse_config("[potential]\ncoefficients = 0, 1\nq = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { .. }));
        let ok = parse_config(
            "[potential]\ncoefficients = 0, 1\nq = 2\na0 = 2\na2 = 2\n",
        )
        .unwrap();
        match ok.potential {
            PotentialChoice::Custom { q, a0, .. } => {
                assert_eq!(q, 2);
                assert_eq!(a0, 2.0);
            }
            other => panic!("expected custom potential, got {other:?}"),
        }
    }

    #[test]
    fn grid_must_be_power_of_two() {
        let err = parse_config("[potential]\nname = Vminus\n\n[grid]\nN = 100\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { .. }));
    }
}
