use std::fmt;
use std::path::Path;

use pecbound::rational::{self, Rational};
use pecbound::{Error, Mode};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Provenance block attached to every output. Equal manifests mean
/// byte-identical outputs.
pub struct Manifest {
    command: &'static str,
    args: Vec<String>,
    inputs: Vec<(String, String)>,
    pub seed: u64,
    mode: Mode,
}

impl Manifest {
    pub fn new(command: &'static str, args: Vec<String>, seed: u64, mode: Mode) -> Self {
        Manifest { command, args, inputs: Vec::new(), seed, mode }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(path, e))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push((path.display().to_string(), hex));
        String::from_utf8(bytes).map_err(|e| Failure::input(path, e))
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "args": self.args,
            "inputs": self.inputs.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
            "seed": self.seed,
            "mode": self.mode.to_string(),
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// Exact string of a value. Float-mode results are shown as the shortest
/// decimal that round-trips, not the binary expansion.
pub fn exact_string(r: &Rational, mode: Mode) -> String {
    match mode {
        Mode::Exact => rational::format(r),
        Mode::Float => rational::from_f64_decimal(rational::to_f64(r))
            .map_or_else(|| rational::format(r), |d| rational::format(&d)),
    }
}

pub fn exact(r: &Rational, mode: Mode) -> Value {
    json!({ "exact": exact_string(r, mode), "decimal": rational::to_f64(r) })
}

pub fn rate_map(rates: &[Rational], mode: Mode) -> Value {
    Value::Object(
        rates
            .iter()
            .enumerate()
            .map(|(j, r)| (format!("R[{}]", j + 1), exact(r, mode)))
            .collect::<Map<_, _>>(),
    )
}

pub fn big(n: u128) -> Value {
    u64::try_from(n).map_or_else(|_| json!(n.to_string()), |n| json!(n))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Usage(String),
    Input { path: String, message: String, code: u8 },
}

impl Failure {
    pub fn input(path: &Path, e: impl Into<Failure>) -> Failure {
        let inner = e.into();
        Failure::Input { path: path.display().to_string(), code: inner.exit_code(), message: inner.to_string() }
    }

    /// 2 input error, 3 model restriction, 4 tuple cap exceeded, 1 other.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::ModelRestriction(_)) => 3,
            Failure::Core(Error::TupleCapExceeded { .. }) => 4,
            Failure::Core(Error::MalformedSystem(_)) => 1,
            Failure::Core(_) | Failure::Usage(_) => 2,
            Failure::Input { code, .. } => *code,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
            Failure::Input { path, message, .. } => write!(f, "{path}: {message}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(format!("invalid JSON: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::string::FromUtf8Error> for Failure {
    fn from(e: std::string::FromUtf8Error) -> Self {
        Failure::Usage(format!("not UTF-8: {e}"))
    }
}
