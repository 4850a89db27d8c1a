use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Ballot,
    Simulate,
    Series,
    Tails,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Analyze,
        Command::Ballot,
        Command::Simulate,
        Command::Series,
        Command::Tails,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Ballot => "ballot",
            Command::Simulate => "simulate",
            Command::Series => "series",
            Command::Tails => "tails",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Analyze => "Cumulant analysis and criticality verdict of a step law",
            Command::Ballot => "Exact constrained-path probability with its ballot-order formula",
            Command::Simulate => "Monte Carlo trees: direct, spine, or maxbar mode",
            Command::Series => "The series for the mean total progeny",
            Command::Tails => "Tail tables of Z and M, the Z log Z trend, or the maximum profile",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn schema(self) -> &'static [Key] {
        match self {
            Command::Analyze => ANALYZE,
            Command::Ballot => BALLOT,
            Command::Simulate => SIMULATE,
            Command::Series => SERIES,
            Command::Tails => TAILS,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Text,
    UInt,
    Float,
    Flag,
    List,
    Choice(&'static [&'static str]),
    Path,
}

#[derive(Debug)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Key {
    Key {
        name,
        kind,
        default,
        help,
    }
}

const STEP: Key = key("step", Kind::Text, None, "step law, e.g. \"-1:0.75,1:0.25\"");
const OFFSPRING: Key = key(
    "offspring",
    Kind::Text,
    Some("const:2"),
    "offspring law: const:K, geom:Q, poisson:MU, or table:K:P,...",
);
const SEED: Key = key("seed", Kind::UInt, Some("0"), "master seed (falls back to KRILLWALK_SEED)");
const MAX_NODES: Key = key("max-nodes", Kind::UInt, Some("10000000"), "living nodes per tree before truncation");
const MAX_DEPTH: Key = key("max-depth", Kind::UInt, Some("1000000"), "generations per tree before truncation");
const OUT: Key = key("out", Kind::Path, None, "output file (standard output when absent)");

static ANALYZE: &[Key] = &[
    STEP,
    OFFSPRING,
    key("calibrate", Kind::Flag, Some("false"), "replace p in the {-1,+1} law by its critical value"),
    OUT,
];

static BALLOT: &[Key] = &[
    STEP,
    key("n", Kind::UInt, None, "horizon"),
    key("terminal", Kind::Text, None, "eq:K or ge:K"),
    key(
        "profile",
        Kind::Text,
        Some("one_sided:0"),
        "one_sided:M, corridor:M,TOP, fnk:K, useful:K,M0, or pin:I,J",
    ),
    key("exact", Kind::Flag, Some("false"), "enumerate paths in rational arithmetic"),
    key("state-cap", Kind::UInt, Some("1000000"), "largest DP layer"),
    OUT,
];

static SIMULATE: &[Key] = &[
    STEP,
    OFFSPRING,
    key("trials", Kind::UInt, Some("1000"), "number of trees"),
    SEED,
    MAX_NODES,
    MAX_DEPTH,
    key("mode", Kind::Choice(&["direct", "spine", "maxbar"]), Some("direct"), "what to simulate"),
    key("spine-n", Kind::UInt, Some("20"), "spine length in spine mode"),
    key("offspine-budget", Kind::UInt, None, "explore off-spine subtrees within this many nodes"),
    key("prune-eps", Kind::Float, Some("0.000001"), "total pruning error allowed in maxbar mode"),
    key("frontier-budget", Kind::UInt, Some("100000"), "largest best-first frontier in maxbar mode"),
    key("emit", Kind::Path, None, "per-trial CSV"),
    OUT,
];

static SERIES: &[Key] = &[
    STEP,
    OFFSPRING,
    key("N", Kind::UInt, Some("1000"), "last exactly summed term"),
    OUT,
];

static TAILS: &[Key] = &[
    key("target", Kind::Choice(&["z", "m", "zlogz", "profile"]), None, "which experiment"),
    STEP,
    OFFSPRING,
    key(
        "thresholds",
        Kind::List,
        None,
        "z: values of n; m: values of k (rows 0..max); zlogz: sample sizes",
    ),
    key("trials", Kind::UInt, Some("1000000"), "number of trees"),
    SEED,
    MAX_NODES,
    MAX_DEPTH,
    key("format", Kind::Choice(&["csv", "json"]), Some("csv"), "output format"),
    OUT,
];

/// Rewrites `raw` in the canonical form for `kind`.
fn canonical(key: &Key, raw: &str) -> Result<String, CliError> {
    let raw = raw.trim();
    let bad = |what: &str| CliError::Usage(format!("--{}: {what}: {raw:?}", key.name));
    if raw.contains('\n') {
        return Err(bad("value spans lines"));
    }
    Ok(match key.kind {
        Kind::Text | Kind::Path => {
            if raw.is_empty() {
                return Err(bad("empty value"));
            }
            raw.to_string()
        }
        Kind::UInt => raw
            .parse::<u64>()
            .map_err(|_| bad("expected a nonnegative integer"))?
            .to_string(),
        Kind::Float => {
            let v: f64 = raw.parse().map_err(|_| bad("expected a number"))?;
            if !v.is_finite() {
                return Err(bad("expected a finite number"));
            }
            format!("{v:?}")
        }
        Kind::Flag => match raw {
            "true" | "1" | "yes" => "true".into(),
            "false" | "0" | "no" => "false".into(),
            _ => return Err(bad("expected true or false")),
        },
        Kind::List => {
            let items: Result<Vec<u64>, _> = raw.split(',').map(|s| s.trim().parse::<u64>()).collect();
            let items = items.map_err(|_| bad("expected comma-separated nonnegative integers"))?;
            items.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        }
        Kind::Choice(options) => {
            if !options.contains(&raw) {
                return Err(bad(&format!("expected one of {}", options.join(", "))));
            }
            raw.to_string()
        }
    })
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_string();
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(CliError::Usage(format!("config line {}: duplicate key {k:?}", i + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Reads a config file into a map.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok(parse_kv(&text)?.into_iter().collect())
}

/// A fully resolved run: the subcommand and every parameter in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    command: Command,
    entries: Vec<(&'static str, String)>,
}

/// Values for one run, by source.
#[derive(Debug, Default)]
pub struct Sources {
    pub flags: BTreeMap<String, String>,
    pub file: BTreeMap<String, String>,
    pub env_seed: Option<String>,
}

impl RunConfig {
    /// Flags override the file, the file overrides `KRILLWALK_SEED`, and that
    /// overrides the defaults.
    pub fn resolve(command: Command, mut sources: Sources) -> Result<Self, CliError> {
        if let Some(c) = sources.file.remove("command") {
            if c != command.name() {
                return Err(CliError::Usage(format!(
                    "config file is for {c:?}, not {:?}",
                    command.name()
                )));
            }
        }
        let schema = command.schema();
        for k in sources.file.keys().chain(sources.flags.keys()) {
            if !schema.iter().any(|key| key.name == k) {
                return Err(CliError::Usage(format!("unknown key {k:?} for {command}")));
            }
        }
        let mut entries = Vec::with_capacity(schema.len());
        for key in schema {
            let raw = sources
                .flags
                .get(key.name)
                .or_else(|| sources.file.get(key.name))
                .cloned()
                .or_else(|| (key.name == "seed").then(|| sources.env_seed.clone()).flatten())
                .or_else(|| key.default.map(str::to_string));
            if let Some(raw) = raw {
                entries.push((key.name, canonical(key, &raw)?));
            }
        }
        Ok(RunConfig { command, entries })
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn entries(&self) -> &[(&'static str, String)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("{} needs --{name}", self.command)))
    }

    pub fn uint(&self, name: &str) -> Result<u64, CliError> {
        // canonical values parse by construction
        Ok(self.require(name)?.parse().expect("canonical integer"))
    }

    pub fn float(&self, name: &str) -> Result<f64, CliError> {
        Ok(self.require(name)?.parse().expect("canonical float"))
    }

    pub fn flag(&self, name: &str) -> bool {
        self.get(name) == Some("true")
    }

    pub fn list(&self, name: &str) -> Result<Vec<u64>, CliError> {
        Ok(self
            .require(name)?
            .split(',')
            .map(|s| s.parse().expect("canonical list"))
            .collect())
    }

    pub fn path(&self, name: &str) -> Option<PathBuf> {
        self.get(name).map(PathBuf::from)
    }

    /// The flat `key = value` form, starting with the subcommand.
    pub fn to_kv(&self) -> String {
        let mut s = format!("command = {}\n", self.command);
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// Inverse of [`RunConfig::to_kv`]: `command` is required and no
    /// defaults are filled in beyond those the text omits.
    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        let mut file: BTreeMap<String, String> = parse_kv(text)?.into_iter().collect();
        let name = file
            .get("command")
            .cloned()
            .ok_or_else(|| CliError::Usage("missing command".into()))?;
        let command = Command::from_name(&name)
            .ok_or_else(|| CliError::Usage(format!("unknown command {name:?}")))?;
        file.remove("command");
        RunConfig::resolve(
            command,
            Sources {
                file,
                ..Sources::default()
            },
        )
    }

    /// The entries as a JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), self.command.name().into());
        for (k, v) in &self.entries {
            map.insert((*k).into(), v.clone().into());
        }
        serde_json::Value::Object(map)
    }
}
