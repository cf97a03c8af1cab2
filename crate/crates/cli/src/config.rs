use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CantorBuild,
    MeasureProfile,
    KsetCheck,
    CapacitySweep,
    CriticalAlpha,
    ConstructPsi,
    ConstructOuter,
    Bump,
    ChainVerify,
    ChainCrosscheck,
    DilationSweep,
    Approximant,
    Layercake,
    FullReport,
}

impl Command {
    pub fn name(&self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    /// Commands that draw random numbers and therefore need a seed.
    pub fn stochastic(&self) -> bool {
        matches!(self, Command::ChainCrosscheck)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, msg) = match self {
            Failure::Validation(m) => ("validation", m),
            Failure::Numerical(m) => ("numerical", m),
            Failure::Io(m) => ("io", m),
        };
        json!({ "error": { "kind": kind, "message": msg } })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl From<critcyc::Error> for Failure {
    fn from(e: critcyc::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    #[serde(default)]
    params: Map<String, Value>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    resolution: Option<u64>,
}

/// Effective settings after layering defaults, the config file and flags.
#[derive(Debug, Clone)]
pub struct Config {
    pub command: Command,
    /// Parameter overrides (config file keys, then `--param`), still untyped.
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub resolution: Option<u64>,
}

impl Config {
    pub fn echo(&self) -> Value {
        json!({
            "params": self.params,
            "seed": self.seed,
            "out": self.out.display().to_string(),
            "resolution": self.resolution,
        })
    }

    pub fn provenance_line(&self, truncation: Option<&str>) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        format!("command={} seed={} truncation={}", self.command.name(), seed, truncation.unwrap_or("none"))
    }

    /// The seed, required for stochastic commands.
    pub fn require_seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::Validation(format!("{} is stochastic and needs --seed", self.command.name())))
    }
}

fn parse_override(s: &str) -> Result<(String, Value), Failure> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Failure::Validation(format!("parameter override '{s}' is not key=value")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Flags override config keys; `--param` overrides config `params`.
pub fn resolve(
    command: Command,
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    resolution: Option<u64>,
    overrides: &[String],
) -> Result<Config, Failure> {
    let file = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Validation(format!("config {}: {e}", p.display())))?;
            serde_json::from_str::<FileConfig>(&text)?
        }
        None => FileConfig::default(),
    };
    if let Some(c) = &file.command {
        if *c != command.name() {
            return Err(Failure::Validation(format!("config is for '{c}', not '{}'", command.name())));
        }
    }
    let mut params = file.params;
    for o in overrides {
        let (k, v) = parse_override(o)?;
        params.insert(k, v);
    }
    let cfg = Config {
        command,
        params,
        seed: seed.or(file.seed),
        out: out.or(file.out).unwrap_or_else(|| PathBuf::from("critcyc-out")),
        resolution: resolution.or(file.resolution),
    };
    if command.stochastic() {
        cfg.require_seed()?;
    }
    Ok(cfg)
}

pub fn write_outputs(dir: &Path, csv: &str, summary: &Value, manifest: &Value) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("result.csv"), csv).map_err(io)?;
    let pretty = |v: &Value| serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Failure::Io(e.to_string()));
    std::fs::write(dir.join("summary.json"), pretty(summary)?).map_err(io)?;
    std::fs::write(dir.join("manifest.json"), pretty(manifest)?).map_err(io)?;
    Ok(())
}
