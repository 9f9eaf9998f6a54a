//! Run configuration: a flat `key = value` text format with `[section]`
//! headers, command-line overrides, and the comment block echoed into every
//! output file.
//!
//! ```text
//! [run]
//! task = regression
//! seeds = 1, 2, 3, 4, 5
//!
//! [activations]
//! select = relu; lisa; kdac:beta1=1.2,beta2=0.8,mu=0.01
//!
//! [kdac]
//! mu = 0.01
//!
//! [train]
//! lr = 1e-3
//! epochs = 20
//! ```
//!
//! `[kdac]` keys (and the `--beta1/--beta2/--mu` flags) override the
//! matching parameter of every selected KDAC activation. `mu` may be a
//! comma-separated list, which expands each KDAC entry once per value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::activations::{list_registry, ActivationKind};
use crate::error::{config, Error, Result};
use crate::nn::tasks::{Task, TaskSpec};
use crate::nn::TrainConfig;
use crate::numfmt::fmt17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gradcheck,
    Curves,
    Bench,
    Timing,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Gradcheck => "gradcheck",
            Command::Curves => "curves",
            Command::Bench => "bench",
            Command::Timing => "timing",
        })
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gradcheck" => Command::Gradcheck,
            "curves" => Command::Curves,
            "bench" => Command::Bench,
            "timing" => Command::Timing,
            other => return config(format!("unknown command `{other}`")),
        })
    }
}

/// Effective configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub activations: Vec<ActivationKind>,
    pub task: Task,
    pub seeds: Vec<u64>,
    pub repeats: usize,
    pub train: TrainConfig,
    pub samples: usize,
    pub hidden: usize,
    pub data_seed: u64,
    pub curve_min: f64,
    pub curve_max: f64,
    pub curve_steps: usize,
    pub calls: u64,
    pub out: Option<PathBuf>,
}

/// Default number of repetitions per (activation, task) cell.
pub const DEFAULT_REPEATS: usize = 5;

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let activations = match command {
            Command::Curves => vec![ActivationKind::default_for("kdac").unwrap()],
            _ => list_registry(),
        };
        RunConfig {
            command,
            activations,
            task: Task::Regression,
            seeds: (0..DEFAULT_REPEATS as u64).collect(),
            repeats: DEFAULT_REPEATS,
            train: TrainConfig::default(),
            samples: 512,
            hidden: 16,
            data_seed: 7,
            curve_min: -5.0,
            curve_max: 5.0,
            curve_steps: 1001,
            calls: 10_000_000,
            out: None,
        }
    }

    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec {
            task: self.task,
            samples: self.samples,
            hidden: self.hidden,
            data_seed: self.data_seed,
        }
    }

    pub fn train_for_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..self.train.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return config("repeats must be >= 1");
        }
        if self.seeds.len() != self.repeats {
            return config(format!(
                "{} seeds listed but repeats = {}",
                self.seeds.len(),
                self.repeats
            ));
        }
        if self.activations.is_empty() {
            return config("no activations selected");
        }
        for a in &self.activations {
            a.validate()?;
        }
        self.train.validate()?;
        if self.samples < 2 {
            return config("samples must be >= 2");
        }
        if self.hidden < 1 {
            return config("hidden must be >= 1");
        }
        if !(self.curve_min.is_finite() && self.curve_max.is_finite() && self.curve_min < self.curve_max) {
            return config(format!(
                "curve range [{}, {}] is empty or not finite",
                self.curve_min, self.curve_max
            ));
        }
        if self.curve_steps < 2 {
            return config("curve steps must be >= 2");
        }
        if self.calls < 1 {
            return config("calls must be >= 1");
        }
        Ok(())
    }

    /// The effective configuration in file syntax. Parsing this text yields
    /// the same `RunConfig`.
    pub fn to_config_text(&self) -> String {
        let mut s = String::from("[run]\n");
        let line = |s: &mut String, k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line(&mut s, "command", self.command.to_string());
        line(&mut s, "task", self.task.to_string());
        line(&mut s, "seeds", join(self.seeds.iter().map(u64::to_string), ", "));
        line(&mut s, "repeats", self.repeats.to_string());
        if let Some(out) = &self.out {
            line(&mut s, "out", out.display().to_string());
        }
        s.push_str("\n[activations]\n");
        line(
            &mut s,
            "select",
            join(self.activations.iter().map(|a| a.to_string()), "; "),
        );
        s.push_str("\n[train]\n");
        line(&mut s, "seed", self.train.seed.to_string());
        line(&mut s, "lr", fmt17(self.train.learning_rate));
        line(&mut s, "epochs", self.train.epochs.to_string());
        line(&mut s, "batch_size", self.train.batch_size.to_string());
        line(&mut s, "adam_beta1", fmt17(self.train.adam_beta1));
        line(&mut s, "adam_beta2", fmt17(self.train.adam_beta2));
        line(&mut s, "adam_eps", fmt17(self.train.adam_eps));
        s.push_str("\n[task]\n");
        line(&mut s, "samples", self.samples.to_string());
        line(&mut s, "hidden", self.hidden.to_string());
        line(&mut s, "data_seed", self.data_seed.to_string());
        s.push_str("\n[curves]\n");
        line(&mut s, "min", fmt17(self.curve_min));
        line(&mut s, "max", fmt17(self.curve_max));
        line(&mut s, "steps", self.curve_steps.to_string());
        s.push_str("\n[timing]\n");
        line(&mut s, "calls", self.calls.to_string());
        s
    }

    /// `#`-prefixed copy of [`RunConfig::to_config_text`] between marker lines.
    pub fn header_comment(&self) -> String {
        let mut out = String::from(CONFIG_BEGIN);
        out.push('\n');
        for l in self.to_config_text().lines() {
            if l.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str("# ");
                out.push_str(l);
                out.push('\n');
            }
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        out
    }

    /// Recovers the configuration echoed at the top of an output file.
    pub fn from_output_header(text: &str) -> Result<Self> {
        let mut body = String::new();
        let mut inside = false;
        let mut found = false;
        for line in text.lines() {
            if line == CONFIG_BEGIN {
                inside = true;
                found = true;
                continue;
            }
            if line == CONFIG_END {
                break;
            }
            if inside {
                let stripped = line.strip_prefix('#').unwrap_or(line);
                body.push_str(stripped.strip_prefix(' ').unwrap_or(stripped));
                body.push('\n');
            }
        }
        if !found {
            return config("no echoed configuration block found");
        }
        let cfg = ConfigSource::parse(&body)?;
        let command = cfg
            .get("run", "command")
            .ok_or_else(|| Error::Config("echoed configuration lacks run.command".into()))?
            .value
            .parse()?;
        resolve(command, Some(&cfg), &Overrides::default())
    }
}

pub const CONFIG_BEGIN: &str = "# --- effective config ---";
pub const CONFIG_END: &str = "# --- end config ---";

fn join(items: impl Iterator<Item = String>, sep: &str) -> String {
    items.collect::<Vec<_>>().join(sep)
}

/// Keys accepted in each section.
const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["command", "task", "seeds", "repeats", "out"]),
    ("activations", &["select"]),
    ("kdac", &["beta1", "beta2", "mu"]),
    (
        "train",
        &[
            "seed",
            "lr",
            "epochs",
            "batch_size",
            "adam_beta1",
            "adam_beta2",
            "adam_eps",
        ],
    ),
    ("task", &["samples", "hidden", "data_seed"]),
    ("curves", &["min", "max", "steps"]),
    ("timing", &["calls"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// A parsed config file: `(section, key) -> value`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigSource {
    entries: BTreeMap<(String, String), Entry>,
}

impl ConfigSource {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header `{line}`")))?
                    .trim();
                let known = SCHEMA
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| err(format!("unknown section `[{name}]`")))?;
                section = Some(known.0);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| err(format!("key `{key}` appears before any [section]")))?;
            let allowed = SCHEMA.iter().find(|(s, _)| *s == sec).unwrap().1;
            if !allowed.contains(&key) {
                return Err(err(format!("unknown key `{key}` in [{sec}]")));
            }
            let prev = entries.insert(
                (sec.to_string(), key.to_string()),
                Entry {
                    value: value.to_string(),
                    line: line_no,
                },
            );
            if prev.is_some() {
                return Err(err(format!("key `{key}` repeated in [{sec}]")));
            }
        }
        Ok(ConfigSource { entries })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }
}

/// Values supplied on the command line; each wins over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub activation: Option<String>,
    pub task: Option<String>,
    pub seeds: Option<String>,
    pub repeats: Option<usize>,
    pub out: Option<PathBuf>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub mu: Option<String>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub hidden: Option<usize>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub steps: Option<usize>,
    pub calls: Option<u64>,
}

fn parse_value<T: FromStr>(e: &Entry, what: &str) -> Result<T> {
    e.value.parse().map_err(|_| Error::Parse {
        line: e.line,
        message: format!("`{}` is not a valid {what}", e.value),
    })
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::Config(format!("`{p}` is not a valid {what}")))
        })
        .collect()
}

fn parse_selectors(s: &str) -> Result<Vec<ActivationKind>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect()
}

fn with_line<T>(e: &Entry, r: Result<T>) -> Result<T> {
    r.map_err(|err| match err {
        Error::Config(message) => Error::Parse { line: e.line, message },
        other => other,
    })
}

/// Merges defaults, the optional config file and command-line overrides.
pub fn resolve(command: Command, file: Option<&ConfigSource>, flags: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(command);
    let empty = ConfigSource::default();
    let file = file.unwrap_or(&empty);

    // the subcommand on the command line wins; the key is only checked
    if let Some(e) = file.get("run", "command") {
        with_line(e, e.value.parse::<Command>())?;
    }
    macro_rules! set {
        ($section:literal, $key:literal, $dst:expr, $what:literal) => {
            if let Some(e) = file.get($section, $key) {
                $dst = parse_value(e, $what)?;
            }
        };
    }
    set!("train", "seed", cfg.train.seed, "integer seed");
    set!("train", "lr", cfg.train.learning_rate, "learning rate");
    set!("train", "epochs", cfg.train.epochs, "epoch count");
    set!("train", "batch_size", cfg.train.batch_size, "batch size");
    set!("train", "adam_beta1", cfg.train.adam_beta1, "number");
    set!("train", "adam_beta2", cfg.train.adam_beta2, "number");
    set!("train", "adam_eps", cfg.train.adam_eps, "number");
    set!("task", "samples", cfg.samples, "sample count");
    set!("task", "hidden", cfg.hidden, "layer width");
    set!("task", "data_seed", cfg.data_seed, "integer seed");
    set!("curves", "min", cfg.curve_min, "number");
    set!("curves", "max", cfg.curve_max, "number");
    set!("curves", "steps", cfg.curve_steps, "step count");
    set!("timing", "calls", cfg.calls, "call count");
    set!("run", "repeats", cfg.repeats, "repeat count");
    if let Some(e) = file.get("run", "task") {
        cfg.task = with_line(e, e.value.parse())?;
    }
    if let Some(e) = file.get("run", "out") {
        cfg.out = Some(PathBuf::from(&e.value));
    }
    if let Some(e) = file.get("activations", "select") {
        cfg.activations = with_line(e, parse_selectors(&e.value))?;
    }
    let mut seeds: Option<Vec<u64>> = match file.get("run", "seeds") {
        Some(e) => Some(with_line(e, parse_list(&e.value, "seed"))?),
        None => None,
    };

    let mut beta1 = file
        .get("kdac", "beta1")
        .map(|e| parse_value::<f64>(e, "number"))
        .transpose()?;
    let mut beta2 = file
        .get("kdac", "beta2")
        .map(|e| parse_value::<f64>(e, "number"))
        .transpose()?;
    let mut mu: Option<Vec<f64>> = match file.get("kdac", "mu") {
        Some(e) => Some(with_line(e, parse_list(&e.value, "number"))?),
        None => None,
    };

    // command-line flags
    if let Some(a) = &flags.activation {
        cfg.activations = parse_selectors(a)?;
    }
    if let Some(t) = &flags.task {
        cfg.task = t.parse()?;
    }
    if let Some(s) = &flags.seeds {
        seeds = Some(parse_list(s, "seed")?);
    }
    if let Some(r) = flags.repeats {
        cfg.repeats = r;
        if flags.seeds.is_none() {
            seeds = None;
        }
    }
    if let Some(o) = &flags.out {
        cfg.out = Some(o.clone());
    }
    beta1 = flags.beta1.or(beta1);
    beta2 = flags.beta2.or(beta2);
    if let Some(m) = &flags.mu {
        mu = Some(parse_list(m, "number")?);
    }
    if let Some(v) = flags.lr {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = flags.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = flags.batch_size {
        cfg.train.batch_size = v;
    }
    if let Some(v) = flags.seed {
        cfg.train.seed = v;
    }
    if let Some(v) = flags.samples {
        cfg.samples = v;
    }
    if let Some(v) = flags.hidden {
        cfg.hidden = v;
    }
    if let Some(v) = flags.min {
        cfg.curve_min = v;
    }
    if let Some(v) = flags.max {
        cfg.curve_max = v;
    }
    if let Some(v) = flags.steps {
        cfg.curve_steps = v;
    }
    if let Some(v) = flags.calls {
        cfg.calls = v;
    }

    match seeds {
        Some(s) => {
            if file.get("run", "repeats").is_none() && flags.repeats.is_none() {
                cfg.repeats = s.len();
            }
            cfg.seeds = s;
        }
        None => {
            cfg.seeds = (0..cfg.repeats as u64).map(|i| cfg.train.seed + i).collect();
        }
    }

    cfg.activations = apply_kdac_overrides(&cfg.activations, beta1, beta2, mu.as_deref())?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_kdac_overrides(
    kinds: &[ActivationKind],
    beta1: Option<f64>,
    beta2: Option<f64>,
    mu: Option<&[f64]>,
) -> Result<Vec<ActivationKind>> {
    if mu.is_some_and(<[f64]>::is_empty) {
        return config("mu list is empty");
    }
    let mut out = Vec::new();
    for &k in kinds {
        match k {
            ActivationKind::Kdac {
                beta1: b1,
                beta2: b2,
                mu: m,
            } => {
                let b1 = beta1.unwrap_or(b1);
                let b2 = beta2.unwrap_or(b2);
                let mus = mu.map(<[f64]>::to_vec).unwrap_or_else(|| vec![m]);
                for m in mus {
                    let kind = ActivationKind::Kdac {
                        beta1: b1,
                        beta2: b2,
                        mu: m,
                    };
                    kind.validate()?;
                    out.push(kind);
                }
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

/// Reads the optional config file and merges it with the flags.
pub fn parse_config(command: Command, path: Option<&std::path::Path>, flags: &Overrides) -> Result<RunConfig> {
    let source = match path {
        Some(p) => {
            Some(ConfigSource::parse(&std::fs::read_to_string(p).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", p.display()))
            })?)?)
        }
        None => None,
    };
    resolve(command, source.as_ref(), flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdac_flags_populate_params() {
        let flags = Overrides {
            mu: Some("0.01".into()),
            beta1: Some(1.2),
            beta2: Some(0.8),
            ..Default::default()
        };
        let cfg = resolve(Command::Curves, None, &flags).unwrap();
        assert_eq!(
            cfg.activations,
            vec![ActivationKind::Kdac {
                beta1: 1.2,
                beta2: 0.8,
                mu: 0.01
            }]
        );
    }

    #[test]
    fn mu_list_expands() {
        let flags = Overrides {
            activation: Some("kdac".into()),
            beta1: Some(0.8),
            beta2: Some(0.5),
            mu: Some("0.0001,0.01,0.5".into()),
            ..Default::default()
        };
        let cfg = resolve(Command::Curves, None, &flags).unwrap();
        assert_eq!(cfg.activations.len(), 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ConfigSource::parse("[kdac]\nbeta1 = 1\nbetta1 = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("betta1"), "{msg}");
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn flags_override_file() {
        let src = ConfigSource::parse("[train]\nlr = 1e-2\nepochs = 3\n").unwrap();
        let cfg = resolve(
            Command::Bench,
            Some(&src),
            &Overrides {
                lr: Some(1e-3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.train.learning_rate, 1e-3);
        assert_eq!(cfg.train.epochs, 3);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = ConfigSource::parse("[train]\nlr 1e-3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = ConfigSource::parse("lr = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = ConfigSource::parse("[nope]\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let src = ConfigSource::parse("[train]\n\nepochs = many\n").unwrap();
        let err = resolve(Command::Bench, Some(&src), &Overrides::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let src = ConfigSource::parse("[activations]\nselect = relu; gelu\n").unwrap();
        let err = resolve(Command::Bench, Some(&src), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("gelu"));
    }

    #[test]
    fn seeds_and_repeats() {
        let cfg = resolve(Command::Bench, None, &Overrides::default()).unwrap();
        assert_eq!(cfg.repeats, 5);
        assert_eq!(cfg.seeds, vec![0, 1, 2, 3, 4]);
        let src = ConfigSource::parse("[run]\nseeds = 10, 20\n").unwrap();
        let cfg = resolve(Command::Bench, Some(&src), &Overrides::default()).unwrap();
        assert_eq!((cfg.seeds.clone(), cfg.repeats), (vec![10, 20], 2));
        let src = ConfigSource::parse("[run]\nseeds = 10, 20\nrepeats = 3\n").unwrap();
        assert!(resolve(Command::Bench, Some(&src), &Overrides::default()).is_err());
        let cfg = resolve(
            Command::Bench,
            None,
            &Overrides {
                repeats: Some(0),
                ..Default::default()
            },
        );
        assert!(cfg.is_err());
    }

    #[test]
    fn header_round_trip() {
        let flags = Overrides {
            mu: Some("0.0001,0.5".into()),
            seeds: Some("3,9".into()),
            lr: Some(0.0123),
            out: Some("some/out.csv".into()),
            ..Default::default()
        };
        let cfg = resolve(Command::Bench, None, &flags).unwrap();
        let doc = format!("{}x,y\n1,2\n", cfg.header_comment());
        assert_eq!(RunConfig::from_output_header(&doc).unwrap(), cfg);
    }
}
