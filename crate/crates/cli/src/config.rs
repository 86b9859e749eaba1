//! Strict scenario configuration: flat `key = value` text with optional
//! organizational `[section]` headers.
//!
//! Unknown keys are rejected (with a nearest-key suggestion), as are keys
//! that do not apply to the selected mode — reproducible runs must not carry
//! silently ignored inputs. Validation reports every error, not just the
//! first. Rationals are written as exact `p/q` strings; decimal literals are
//! rejected wherever exact arithmetic is claimed.

use std::fmt;

use ehrenfest_core::observable::Potential;
use ehrenfest_core::propagator::Integrator;
use ehrenfest_core::rat::{parse_rational, rational, rational_string};
use ehrenfest_core::Rational;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Counterexample,
    Evolve,
    Crosscheck,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Counterexample => "counterexample",
            Mode::Evolve => "evolve",
            Mode::Crosscheck => "crosscheck",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        match s {
            "counterexample" => Some(Mode::Counterexample),
            "evolve" => Some(Mode::Evolve),
            "crosscheck" => Some(Mode::Crosscheck),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableKind {
    Position,
    Momentum,
    Kinetic,
    Potential,
    Hamiltonian,
}

impl ObservableKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Position => "position",
            ObservableKind::Momentum => "momentum",
            ObservableKind::Kinetic => "kinetic",
            ObservableKind::Potential => "potential",
            ObservableKind::Hamiltonian => "hamiltonian",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "position" => Some(Self::Position),
            "momentum" => Some(Self::Momentum),
            "kinetic" => Some(Self::Kinetic),
            "potential" => Some(Self::Potential),
            "hamiltonian" => Some(Self::Hamiltonian),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveConfig {
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub t_final: f64,
    pub save_every: usize,
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
    pub potential: Potential<f64>,
    pub observables: Vec<ObservableKind>,
    pub integrator: Integrator,
    pub residual_bound: Option<f64>,
    pub richardson: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            n: 512,
            length: 40.0,
            dt: 1e-3,
            t_final: 6.4,
            save_every: 10,
            x0: 2.0,
            p0: 0.0,
            sigma: 1.0,
            potential: Potential::Harmonic,
            observables: vec![
                ObservableKind::Position,
                ObservableKind::Momentum,
                ObservableKind::Hamiltonian,
            ],
            integrator: Integrator::CrankNicolson,
            residual_bound: None,
            richardson: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CounterexampleConfig {
    pub n_bumps: usize,
    pub orthogonality_samples: usize,
    pub hermiticity_pairs: usize,
    pub t0_fraction: Rational,
    pub eta_fraction: Rational,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            n_bumps: 20,
            orthogonality_samples: 100,
            hermiticity_pairs: 20,
            t0_fraction: rational(1, 4),
            eta_fraction: rational(1, 16),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrosscheckConfig {
    pub n_bumps: usize,
    /// `None` selects the breakpoint-aligned grid automatically.
    pub grid_n: Option<usize>,
    pub grid_length: Option<f64>,
    /// `None` compares at every resonance time and zero witness.
    pub times: Option<Vec<Rational>>,
    pub refine: bool,
    pub t0_fraction: Rational,
    pub eta_fraction: Rational,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            n_bumps: 5,
            grid_n: None,
            grid_length: None,
            times: None,
            refine: true,
            t0_fraction: rational(1, 4),
            eta_fraction: rational(1, 16),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub seed: u64,
    pub evolve: EvolveConfig,
    pub counterexample: CounterexampleConfig,
    pub crosscheck: CrosscheckConfig,
}

impl ScenarioConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            seed: 0,
            evolve: EvolveConfig::default(),
            counterexample: CounterexampleConfig::default(),
            crosscheck: CrosscheckConfig::default(),
        }
    }

    /// Canonical rendering of the effective configuration; hashed into the
    /// manifest and usable as a config file.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("mode = {}\n", self.mode.name()));
        s.push_str(&format!("seed = {}\n", self.seed));
        match self.mode {
            Mode::Evolve => {
                let e = &self.evolve;
                s.push_str(&format!("n = {}\n", e.n));
                s.push_str(&format!("length = {}\n", e.length));
                s.push_str(&format!("dt = {}\n", e.dt));
                s.push_str(&format!("t_final = {}\n", e.t_final));
                s.push_str(&format!("save_every = {}\n", e.save_every));
                s.push_str(&format!("x0 = {}\n", e.x0));
                s.push_str(&format!("p0 = {}\n", e.p0));
                s.push_str(&format!("sigma = {}\n", e.sigma));
                s.push_str(&format!("potential = {}\n", e.potential.name()));
                if let Potential::Barrier { height, width } = e.potential {
                    s.push_str(&format!("barrier_height = {height}\n"));
                    s.push_str(&format!("barrier_width = {width}\n"));
                }
                let names: Vec<&str> = e.observables.iter().map(|o| o.name()).collect();
                s.push_str(&format!("observables = {}\n", names.join(", ")));
                s.push_str(&format!("integrator = {}\n", e.integrator.name()));
                if let Some(b) = e.residual_bound {
                    s.push_str(&format!("residual_bound = {b}\n"));
                }
                s.push_str(&format!("richardson = {}\n", e.richardson));
            }
            Mode::Counterexample => {
                let c = &self.counterexample;
                s.push_str(&format!("n_bumps = {}\n", c.n_bumps));
                s.push_str(&format!(
                    "orthogonality_samples = {}\n",
                    c.orthogonality_samples
                ));
                s.push_str(&format!("hermiticity_pairs = {}\n", c.hermiticity_pairs));
                s.push_str(&format!(
                    "t0_fraction = {}\n",
                    rational_string(&c.t0_fraction)
                ));
                s.push_str(&format!(
                    "eta_fraction = {}\n",
                    rational_string(&c.eta_fraction)
                ));
            }
            Mode::Crosscheck => {
                let c = &self.crosscheck;
                s.push_str(&format!("n_bumps = {}\n", c.n_bumps));
                if let Some(n) = c.grid_n {
                    s.push_str(&format!("grid_n = {n}\n"));
                }
                if let Some(l) = c.grid_length {
                    s.push_str(&format!("grid_length = {l}\n"));
                }
                if let Some(times) = &c.times {
                    let rendered: Vec<String> = times.iter().map(rational_string).collect();
                    s.push_str(&format!("times = {}\n", rendered.join(", ")));
                }
                s.push_str(&format!("refine = {}\n", c.refine));
                s.push_str(&format!(
                    "t0_fraction = {}\n",
                    rational_string(&c.t0_fraction)
                ));
                s.push_str(&format!(
                    "eta_fraction = {}\n",
                    rational_string(&c.eta_fraction)
                ));
            }
        }
        s
    }
}

const SECTIONS: &[&str] = &[
    "grid",
    "times",
    "initial",
    "potential",
    "observables",
    "integrator",
    "counterexample",
    "crosscheck",
];

struct KeySpec {
    name: &'static str,
    modes: &'static [Mode],
}

const KEYS: &[KeySpec] = &[
    KeySpec {
        name: "mode",
        modes: &[Mode::Counterexample, Mode::Evolve, Mode::Crosscheck],
    },
    KeySpec {
        name: "seed",
        modes: &[Mode::Counterexample, Mode::Evolve, Mode::Crosscheck],
    },
    KeySpec {
        name: "n",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "length",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "dt",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "t_final",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "save_every",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "x0",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "p0",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "sigma",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "potential",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "barrier_height",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "barrier_width",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "observables",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "integrator",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "residual_bound",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "richardson",
        modes: &[Mode::Evolve],
    },
    KeySpec {
        name: "n_bumps",
        modes: &[Mode::Counterexample, Mode::Crosscheck],
    },
    KeySpec {
        name: "orthogonality_samples",
        modes: &[Mode::Counterexample],
    },
    KeySpec {
        name: "hermiticity_pairs",
        modes: &[Mode::Counterexample],
    },
    KeySpec {
        name: "t0_fraction",
        modes: &[Mode::Counterexample, Mode::Crosscheck],
    },
    KeySpec {
        name: "eta_fraction",
        modes: &[Mode::Counterexample, Mode::Crosscheck],
    },
    KeySpec {
        name: "grid_n",
        modes: &[Mode::Crosscheck],
    },
    KeySpec {
        name: "grid_length",
        modes: &[Mode::Crosscheck],
    },
    KeySpec {
        name: "times",
        modes: &[Mode::Crosscheck],
    },
    KeySpec {
        name: "refine",
        modes: &[Mode::Crosscheck],
    },
];

fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggest(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (levenshtein(key, k.name), k.name))
        .filter(|&(d, _)| d <= 2)
        .min_by_key(|&(d, _)| d)
        .map(|(_, name)| name)
}

/// Parse and validate a configuration against the selected mode, collecting
/// every error.
pub fn parse_config(text: &str, mode: Mode) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let mut errors: Vec<ConfigError> = Vec::new();
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(section) = line.strip_prefix('[') {
            match section.strip_suffix(']') {
                Some(name) if SECTIONS.contains(&name.trim()) => {}
                Some(name) => errors.push(ConfigError {
                    line: line_no,
                    message: format!(
                        "unknown section `[{}]`; known sections: {}",
                        name.trim(),
                        SECTIONS.join(", ")
                    ),
                }),
                None => errors.push(ConfigError {
                    line: line_no,
                    message: "unterminated section header".to_string(),
                }),
            }
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                let key = key.trim().to_string();
                let value = value.trim().to_string();
                if value.is_empty() {
                    errors.push(ConfigError {
                        line: line_no,
                        message: format!("empty value for `{key}`"),
                    });
                    continue;
                }
                if pairs.iter().any(|(_, k, _)| *k == key) {
                    errors.push(ConfigError {
                        line: line_no,
                        message: format!("duplicate key `{key}`"),
                    });
                    continue;
                }
                pairs.push((line_no, key, value));
            }
            None => errors.push(ConfigError {
                line: line_no,
                message: format!("syntax error: expected `key = value`, got `{line}`"),
            }),
        }
    }

    let mut config = ScenarioConfig::defaults(mode);
    for (line, key, value) in &pairs {
        let line = *line;
        let spec = match KEYS.iter().find(|k| k.name == key) {
            Some(s) => s,
            None => {
                let hint = suggest(key)
                    .map(|s| format!("; did you mean `{s}`?"))
                    .unwrap_or_default();
                errors.push(ConfigError {
                    line,
                    message: format!("unknown key `{key}`{hint}"),
                });
                continue;
            }
        };
        if !spec.modes.contains(&mode) {
            errors.push(ConfigError {
                line,
                message: format!("key `{key}` is not valid in {} mode", mode.name()),
            });
            continue;
        }
        if key == "barrier_height" || key == "barrier_width" {
            continue; // applied below, once the potential kind is known
        }
        if let Err(message) = apply_key(&mut config, key, value) {
            errors.push(ConfigError { line, message });
        }
    }

    // Barrier parameters are only meaningful for the barrier potential;
    // applying them last makes the check independent of key order.
    for (line, key, value) in &pairs {
        if key != "barrier_height" && key != "barrier_width" {
            continue;
        }
        let line = *line;
        match &mut config.evolve.potential {
            Potential::Barrier { height, width } => {
                let result = if key == "barrier_height" {
                    parse_f64(value, key).map(|v| *height = v)
                } else {
                    parse_positive_f64(value, key).map(|v| *width = v)
                };
                if let Err(message) = result {
                    errors.push(ConfigError { line, message });
                }
            }
            _ => errors.push(ConfigError {
                line,
                message: format!("key `{key}` requires potential = barrier"),
            }),
        }
    }
    let rule_sum = config.counterexample.t0_fraction.clone()
        + rational(6, 1) * config.counterexample.eta_fraction.clone();
    if rule_sum >= rational(1, 1) {
        errors.push(ConfigError {
            line: 0,
            message: "t0_fraction + 6*eta_fraction must be below 1".to_string(),
        });
    }

    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

fn parse_f64(value: &str, field: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|e| format!("field `{field}`: bad number `{value}`: {e}"))?;
    if !v.is_finite() {
        return Err(format!("field `{field}`: value must be finite"));
    }
    Ok(v)
}

fn parse_positive_f64(value: &str, field: &str) -> Result<f64, String> {
    let v = parse_f64(value, field)?;
    if v <= 0.0 {
        return Err(format!("field `{field}`: value must be positive"));
    }
    Ok(v)
}

fn parse_usize(value: &str, field: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|e| format!("field `{field}`: bad integer `{value}`: {e}"))
}

fn parse_bool(value: &str, field: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("field `{field}`: expected true or false")),
    }
}

fn parse_fraction(value: &str, field: &str) -> Result<Rational, String> {
    let r = parse_rational(value).map_err(|e| format!("field `{field}`: {e}"))?;
    if r <= Rational::zero() {
        return Err(format!("field `{field}`: fraction must be positive"));
    }
    Ok(r)
}

fn apply_key(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "mode" => match Mode::parse(value) {
            Some(m) if m == config.mode => Ok(()),
            Some(m) => Err(format!(
                "config says mode = {}, but the {} subcommand was invoked",
                m.name(),
                config.mode.name()
            )),
            None => Err(format!("field `mode`: unknown mode `{value}`")),
        },
        "seed" => {
            config.seed = value
                .parse()
                .map_err(|e| format!("field `seed`: bad integer `{value}`: {e}"))?;
            Ok(())
        }
        "n" => {
            let n = parse_usize(value, key)?;
            if n < 16 || !n.is_power_of_two() {
                return Err("field `n`: node count must be a power of two, at least 16".into());
            }
            config.evolve.n = n;
            Ok(())
        }
        "length" => {
            config.evolve.length = parse_positive_f64(value, key)?;
            Ok(())
        }
        "dt" => {
            config.evolve.dt = parse_positive_f64(value, key)?;
            Ok(())
        }
        "t_final" => {
            config.evolve.t_final = parse_positive_f64(value, key)?;
            Ok(())
        }
        "save_every" => {
            let v = parse_usize(value, key)?;
            if v == 0 {
                return Err("field `save_every`: must be at least 1".into());
            }
            config.evolve.save_every = v;
            Ok(())
        }
        "x0" => {
            config.evolve.x0 = parse_f64(value, key)?;
            Ok(())
        }
        "p0" => {
            config.evolve.p0 = parse_f64(value, key)?;
            Ok(())
        }
        "sigma" => {
            config.evolve.sigma = parse_positive_f64(value, key)?;
            Ok(())
        }
        "potential" => {
            config.evolve.potential = match value {
                "free" => Potential::Free,
                "harmonic" => Potential::Harmonic,
                "quartic" => Potential::Quartic,
                "barrier" => Potential::Barrier {
                    height: 1.0,
                    width: 1.0,
                },
                _ => {
                    return Err(format!(
                        "field `potential`: unknown potential `{value}` (free, harmonic, quartic, barrier)"
                    ))
                }
            };
            Ok(())
        }
        "observables" => {
            let mut list = Vec::new();
            for item in value.split(',') {
                let item = item.trim();
                match ObservableKind::parse(item) {
                    Some(o) => list.push(o),
                    None => {
                        return Err(format!(
                            "field `observables`: unknown observable `{item}` (position, momentum, kinetic, potential, hamiltonian)"
                        ))
                    }
                }
            }
            if list.is_empty() {
                return Err("field `observables`: list must not be empty".into());
            }
            config.evolve.observables = list;
            Ok(())
        }
        "integrator" => {
            config.evolve.integrator = match value {
                "crank_nicolson" => Integrator::CrankNicolson,
                "split_fourier" => Integrator::SplitFourier,
                _ => {
                    return Err(format!(
                        "field `integrator`: unknown integrator `{value}` (crank_nicolson, split_fourier)"
                    ))
                }
            };
            Ok(())
        }
        "residual_bound" => {
            config.evolve.residual_bound = Some(parse_positive_f64(value, key)?);
            Ok(())
        }
        "richardson" => {
            config.evolve.richardson = parse_bool(value, key)?;
            Ok(())
        }
        "n_bumps" => {
            let v = parse_usize(value, key)?;
            if v == 0 {
                return Err("field `n_bumps`: must be at least 1".into());
            }
            config.counterexample.n_bumps = v;
            config.crosscheck.n_bumps = v;
            Ok(())
        }
        "orthogonality_samples" => {
            let v = parse_usize(value, key)?;
            if v == 0 {
                return Err("field `orthogonality_samples`: must be at least 1".into());
            }
            config.counterexample.orthogonality_samples = v;
            Ok(())
        }
        "hermiticity_pairs" => {
            let v = parse_usize(value, key)?;
            if v == 0 {
                return Err("field `hermiticity_pairs`: must be at least 1".into());
            }
            config.counterexample.hermiticity_pairs = v;
            Ok(())
        }
        "t0_fraction" => {
            let r = parse_fraction(value, key)?;
            config.counterexample.t0_fraction = r.clone();
            config.crosscheck.t0_fraction = r;
            Ok(())
        }
        "eta_fraction" => {
            let r = parse_fraction(value, key)?;
            config.counterexample.eta_fraction = r.clone();
            config.crosscheck.eta_fraction = r;
            Ok(())
        }
        "grid_n" => {
            let n = parse_usize(value, key)?;
            if n < 16 || !n.is_power_of_two() {
                return Err(
                    "field `grid_n`: node count must be a power of two, at least 16".into(),
                );
            }
            config.crosscheck.grid_n = Some(n);
            Ok(())
        }
        "grid_length" => {
            let l = parse_positive_f64(value, key)?;
            if l < 8.0 {
                return Err("field `grid_length`: the box must cover [-1, 4] (length >= 8)".into());
            }
            config.crosscheck.grid_length = Some(l);
            Ok(())
        }
        "times" => {
            let mut times = Vec::new();
            for item in value.split(',') {
                times.push(parse_rational(item.trim()).map_err(|e| format!("field `times`: {e}"))?);
            }
            config.crosscheck.times = Some(times);
            Ok(())
        }
        "refine" => {
            config.crosscheck.refine = parse_bool(value, key)?;
            Ok(())
        }
        _ => unreachable!("key table and dispatch must agree"),
    }
}

/// FNV-1a 64-bit hash of the canonical config text, hex-encoded.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in config.canonical_text().bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
