//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sqg_core::uniqueness::Regime;
use sqg_core::Exponent;

use crate::error::{CliError, CliResult};

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: &[&str] = &[
    "alpha", "n", "box", "T", "dt", "depth", "s", "p", "q", "trials", "seed", "out", "threads", "N", "eps", "init",
    "amplitude",
];

/// Lemma identifiers accepted by `verify-lemma`.
pub const LEMMAS: &[&str] = &[
    "bernstein",
    "semigroup",
    "embedding",
    "multiplier",
    "paraproduct",
    "bilinear",
    "bilinear-endpoint",
    "product",
    "commutator",
    "duhamel",
    "divergence-form",
];

/// Raw string settings after merging.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_config(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::param(format!("config line {}: expected key = value", i + 1)));
            };
            let key = k.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::param(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::param(format!("cannot read config {}: {e}", path.display())))?;
        Settings::parse_config(&text)
    }

    /// Flag values win over file values.
    pub fn overlay(mut self, flags: impl IntoIterator<Item = (&'static str, String)>) -> Self {
        for (k, v) in flags {
            self.values.insert(k.to_string(), v);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::param(format!("cannot parse --{key} value `{v}`"))),
        }
    }

    fn real(&self, key: &str) -> CliResult<Option<f64>> {
        match self.parsed::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(CliError::param(format!("--{key} must be finite"))),
            other => Ok(other),
        }
    }

    fn exponent(&self, key: &str) -> CliResult<Option<Exponent>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => Exponent::from_str(v)
                .map(Some)
                .map_err(|_| CliError::param(format!("--{key} must be a number ≥ 1 or `inf`, got `{v}`"))),
        }
    }
}

/// Which experiment to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Solve,
    VerifyLemma(String),
    Counterexample(CounterexampleKind),
    Uniqueness(Regime),
    Continuity,
}

impl Task {
    pub fn name(&self) -> String {
        match self {
            Task::Solve => "solve".into(),
            Task::VerifyLemma(id) => format!("verify-lemma {id}"),
            Task::Counterexample(k) => format!("counterexample {}", k.id()),
            Task::Uniqueness(r) => format!("uniqueness {r}"),
            Task::Continuity => "continuity".into(),
        }
    }

    fn is_randomized(&self) -> bool {
        match self {
            Task::VerifyLemma(id) => id != "duhamel",
            Task::Counterexample(_) | Task::Continuity => false,
            Task::Solve | Task::Uniqueness(_) => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// Single-product pairing against its symmetrized counterpart.
    Pairing,
    /// Low-frequency norm of the product with a lower-bound series.
    Product,
}

impl CounterexampleKind {
    pub fn id(self) -> &'static str {
        match self {
            CounterexampleKind::Pairing => "a1",
            CounterexampleKind::Product => "a3",
        }
    }
}

impl FromStr for CounterexampleKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "a1" => Ok(CounterexampleKind::Pairing),
            "a3" => Ok(CounterexampleKind::Product),
            other => Err(CliError::param(format!("unknown counterexample `{other}` (expected a1 or a3)"))),
        }
    }
}

/// Initial datum of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Random,
    Zero,
    Cosine,
}

impl FromStr for Init {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "random" => Ok(Init::Random),
            "zero" => Ok(Init::Zero),
            "cosine" => Ok(Init::Cosine),
            other => Err(CliError::param(format!("unknown --init `{other}` (expected random, zero or cosine)"))),
        }
    }
}

/// Validated parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub alpha: f64,
    pub n: usize,
    pub box_length: f64,
    pub horizon: f64,
    pub dt: f64,
    pub depth: usize,
    pub s: Option<f64>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub trials: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub terms: Option<usize>,
    pub eps: Option<f64>,
    pub init: Init,
    pub amplitude: Option<f64>,
}

impl RunConfig {
    pub fn from_settings(task: Task, settings: &Settings) -> CliResult<Self> {
        if let Task::VerifyLemma(id) = &task {
            if !LEMMAS.contains(&id.as_str()) {
                return Err(CliError::param(format!(
                    "unknown lemma id `{id}`; expected one of {}",
                    LEMMAS.join(", ")
                )));
            }
        }
        let (alpha_default, n_default, box_default, t_default, dt_default) = match &task {
            Task::Solve => (2.0, 64, 2.0 * PI, 0.1, 0.005),
            Task::VerifyLemma(id) if id == "duhamel" => (2.0, 256, PI, 0.0, 0.0),
            Task::VerifyLemma(_) => (2.0, 128, 2.0 * PI, 0.1, 0.01),
            Task::Counterexample(_) => (2.0, 0, 0.0, 0.0, 0.0),
            Task::Uniqueness(r) => (r.default_alpha(), 64, 2.0 * PI, 0.4, 0.025),
            Task::Continuity => (2.0, 1024, 2.0 * PI, 0.1, 0.0),
        };
        let alpha = settings.real("alpha")?.unwrap_or(alpha_default);
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(CliError::param(format!("--alpha must lie in (0, 2], got {alpha}")));
        }
        if let Task::Uniqueness(r) = &task {
            if !r.contains(alpha) {
                return Err(CliError::param(format!("--alpha {alpha} is outside the {r} regime")));
            }
        }
        let n = settings.parsed::<usize>("n")?.unwrap_or(n_default);
        let box_length = settings.real("box")?.unwrap_or(box_default);
        let horizon = settings.real("T")?.unwrap_or(t_default);
        let dt = settings.real("dt")?.unwrap_or(dt_default);
        let depth = settings.parsed::<usize>("depth")?.unwrap_or(1);
        let trials = settings.parsed::<usize>("trials")?.unwrap_or(16);
        let seed = settings.parsed::<u64>("seed")?;
        let threads = settings.parsed::<usize>("threads")?;
        let terms = settings.parsed::<usize>("N")?;
        let eps = settings.real("eps")?;
        let init = settings.parsed_with::<Init>("init")?.unwrap_or(Init::Random);
        let amplitude = settings.real("amplitude")?;
        let out = PathBuf::from(settings.get("out").unwrap_or("sqg-out"));
        let gridded = !matches!(task, Task::Counterexample(_));
        if gridded && !(box_length > 0.0) {
            return Err(CliError::param("--box must be positive"));
        }
        if gridded && n < 8 {
            return Err(CliError::param(format!("--n must be at least 8, got {n}")));
        }
        if depth == 0 || trials == 0 || threads == Some(0) {
            return Err(CliError::param("--depth, --trials and --threads must be positive"));
        }
        if amplitude.is_some_and(|a| !(a >= 0.0)) {
            return Err(CliError::param("--amplitude must be non-negative"));
        }
        let needs_seed = task.is_randomized() && !(task == Task::Solve && init != Init::Random);
        if needs_seed && seed.is_none() {
            return Err(CliError::param(format!("{} draws random data; --seed is required", task.name())));
        }
        Ok(RunConfig {
            task,
            alpha,
            n,
            box_length,
            horizon,
            dt,
            depth,
            s: settings.real("s")?,
            p: settings.exponent("p")?,
            q: settings.exponent("q")?,
            trials,
            seed,
            out,
            threads,
            terms,
            eps,
            init,
            amplitude,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

impl Settings {
    fn parsed_with<T: FromStr<Err = CliError>>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key).map(T::from_str).transpose()
    }
}
