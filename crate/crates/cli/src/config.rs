//! Settings resolution: defaults, then a flat `key = value` file, then flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use ncsym::su2::HalfInteger;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ncsym::Error> for CliError {
    fn from(e: ncsym::Error) -> Self {
        match e {
            ncsym::Error::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    TorusTrace,
    Su2,
    Moments,
    Symplectic,
    Moyal,
    SymbolCompactness,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::TorusTrace, Suite::Su2, Suite::Moments, Suite::Symplectic, Suite::Moyal, Suite::SymbolCompactness];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TorusTrace => "torus-trace",
            Suite::Su2 => "su2",
            Suite::Moments => "moments",
            Suite::Symplectic => "symplectic",
            Suite::Moyal => "moyal",
            Suite::SymbolCompactness => "symbol-compactness",
        }
    }

    /// Check names and default tolerances.
    pub fn checks(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::TorusTrace => {
                &[("slope", 0.02), ("normalised_trace", 0.03), ("connes", 0.05), ("diagonal_identity", 1e-12)]
            }
            Suite::Su2 => &[
                ("ratio", 0.02),
                ("ratio_imag", 0.01),
                ("casimir", 1e-12),
                ("commutator", 1e-12),
                ("covariance", 1e-9),
                ("eta", 1e-12),
                ("intertwining", 0.05),
            ],
            Suite::Moments => &[
                ("odd_vanishing", 1e-12),
                ("first_reduction", 1e-12),
                ("main_reduction", 1e-12),
                ("quadrature", 1e-12),
            ],
            Suite::Symplectic => &[("normal_form", 1e-10), ("membership", 1e-10), ("invariance", 1e-6)],
            Suite::Moyal => &[
                ("ccr_phase", 1e-13),
                ("ccr_antisymmetry", 1e-14),
                ("multiplier_identity", 1e-13),
                ("h_decay", 1.05),
                ("h_shell_convergence", 0.2),
                ("h_cell_convergence", 0.01),
                ("riesz_limit", 1e-4),
                ("riesz_decay", 1.05),
            ],
            Suite::SymbolCompactness => &[("tail_ratio", 0.2), ("word_decrease", 1.0 - 1e-9)],
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| bad(format!("unknown suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(bad(format!("unknown format '{s}'"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub d: usize,
    /// Upper-triangular entries of `theta`, row by row.
    pub theta: Vec<f64>,
    pub nmax: u64,
    pub lmax: HalfInteger,
    pub max_degree: u32,
    pub word: String,
    pub radii: Vec<u64>,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

const KEYS: [&str; 12] =
    ["suite", "d", "theta", "nmax", "lmax", "max-degree", "word", "radii", "samples", "seed", "out", "format"];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| bad(format!("invalid value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

fn default_nmax(d: usize) -> u64 {
    match d {
        2 => 4096,
        3 => 256,
        _ => 64,
    }
}

impl VerifyConfig {
    /// Builds a config from raw settings; missing keys take defaults.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, CliError> {
        for key in settings.keys() {
            if !KEYS.contains(&key.as_str()) && !key.starts_with("tol.") {
                return Err(bad(format!("unknown key '{key}'")));
            }
        }
        let get = |k: &str| settings.get(k).map(String::as_str);
        let suite: Suite = get("suite").ok_or_else(|| bad("no suite given"))?.trim().parse()?;
        let d: usize = get("d").map(|v| parse("d", v)).transpose()?.unwrap_or(2);
        if d < 2 {
            return Err(bad("d must be at least 2"));
        }
        let pairs = d * (d - 1) / 2;
        let theta = match get("theta") {
            Some(v) => parse_list("theta", v)?,
            None => (0..pairs).map(|k| 0.7 / (k + 1) as f64).collect(),
        };
        if theta.len() != pairs {
            return Err(bad(format!("theta needs {pairs} entries for d = {d}, got {}", theta.len())));
        }
        let nmax = get("nmax").map(|v| parse("nmax", v)).transpose()?.unwrap_or_else(|| default_nmax(d));
        let lmax: HalfInteger = get("lmax").map(|v| parse("lmax", v)).transpose()?.unwrap_or(HalfInteger::integer(200));
        let max_degree = get("max-degree").map(|v| parse("max-degree", v)).transpose()?.unwrap_or(10);
        let word = get("word").unwrap_or("b1b1").trim().to_string();
        let radii = match get("radii") {
            Some(v) => parse_list("radii", v)?,
            None => vec![50, 100, 200, 400],
        };
        let samples = get("samples").map(|v| parse("samples", v)).transpose()?.unwrap_or(match suite {
            Suite::TorusTrace => 5,
            Suite::SymbolCompactness => 3,
            _ => 20,
        });
        if samples == 0 {
            return Err(bad("samples must be positive"));
        }
        let seed = get("seed").map(|v| parse("seed", v)).transpose()?.unwrap_or(1);
        let out = get("out").map(|v| PathBuf::from(v.trim()));
        let format = get("format").map(str::parse).transpose()?.unwrap_or(Format::Json);

        let mut tolerances: BTreeMap<String, f64> = suite.checks().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (key, v) in settings.iter().filter(|(k, _)| k.starts_with("tol.")) {
            let check = &key[4..];
            let slot = tolerances.get_mut(check).ok_or_else(|| bad(format!("suite {suite} has no check '{check}'")))?;
            let t: f64 = parse(key, v)?;
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("tolerance {key} must be positive")));
            }
            *slot = t;
        }
        Ok(VerifyConfig {
            suite,
            d,
            theta,
            nmax,
            lmax,
            max_degree,
            word,
            radii,
            samples,
            seed,
            tolerances,
            out,
            format,
        })
    }

    pub fn tol(&self, check: &str) -> f64 {
        self.tolerances[check]
    }

    /// Resolved settings, as echoed in reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: &[String]| v.join(",");
        let mut m = BTreeMap::new();
        m.insert("suite".into(), self.suite.to_string());
        m.insert("d".into(), self.d.to_string());
        m.insert("theta".into(), join(&self.theta.iter().map(f64::to_string).collect::<Vec<_>>()));
        m.insert("nmax".into(), self.nmax.to_string());
        m.insert("lmax".into(), self.lmax.to_string());
        m.insert("max-degree".into(), self.max_degree.to_string());
        m.insert("word".into(), self.word.clone());
        m.insert("radii".into(), join(&self.radii.iter().map(u64::to_string).collect::<Vec<_>>()));
        m.insert("samples".into(), self.samples.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("format".into(), self.format.to_string());
        if let Some(out) = &self.out {
            m.insert("out".into(), out.display().to_string());
        }
        for (k, v) in &self.tolerances {
            m.insert(format!("tol.{k}"), format!("{v:e}"));
        }
        m
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut m = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(bad(format!("line {}: empty key", i + 1)));
        }
        m.insert(k.to_string(), v.trim().to_string());
    }
    Ok(m)
}

#[derive(Debug, Parser)]
#[command(name = "verify", about = "Run a verification suite and emit a pass/fail report")]
struct Flags {
    /// torus-trace | su2 | moments | symplectic | moyal | symbol-compactness
    suite_pos: Option<String>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Upper-triangular entries of theta, comma separated
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    lmax: Option<String>,
    #[arg(long = "max-degree")]
    max_degree: Option<String>,
    /// SU(2) word such as b1b1 or "b1^2+b2^2"
    #[arg(long, allow_hyphen_values = true)]
    word: Option<String>,
    /// Comma-separated radii for symbol-compactness
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// json | csv
    #[arg(long)]
    format: Option<String>,
    /// Flat key = value file; flags override it
    #[arg(long)]
    config: Option<String>,
}

/// Outcome of argument parsing.
pub enum Invocation {
    Run(VerifyConfig),
    /// Help or version text to print before exiting with status 0.
    Info(String),
}

/// Parses the command line (without the program name at index 0 stripped).
/// `--tol.<check> <v>` and `--tol.<check>=<v>` are accepted for any check of the suite.
pub fn parse_args<I: IntoIterator<Item = String>>(args: I) -> Result<Invocation, CliError> {
    let mut rest = Vec::new();
    let mut tols = BTreeMap::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if let Some(t) = a.strip_prefix("--tol.") {
            let (k, v) = match t.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => (t.to_string(), it.next().ok_or_else(|| bad(format!("missing value for {a}")))?),
            };
            tols.insert(format!("tol.{k}"), v);
        } else {
            rest.push(a);
        }
    }
    let flags = match Flags::try_parse_from(rest) {
        Ok(f) => f,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return Ok(Invocation::Info(e.to_string()));
        }
        Err(e) => return Err(bad(e.to_string())),
    };
    let mut settings = match &flags.config {
        Some(p) => read_config_file(Path::new(p))?,
        None => BTreeMap::new(),
    };
    if flags.suite.is_some() && flags.suite_pos.is_some() && flags.suite != flags.suite_pos {
        return Err(bad("conflicting suite names"));
    }
    let pairs = [
        ("suite", flags.suite.or(flags.suite_pos)),
        ("d", flags.d),
        ("theta", flags.theta),
        ("nmax", flags.nmax),
        ("lmax", flags.lmax),
        ("max-degree", flags.max_degree),
        ("word", flags.word),
        ("radii", flags.radii),
        ("samples", flags.samples),
        ("seed", flags.seed),
        ("out", flags.out),
        ("format", flags.format),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            settings.insert(k.to_string(), v);
        }
    }
    settings.extend(tols);
    VerifyConfig::from_settings(&settings).map(Invocation::Run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("verify").chain(s.split_whitespace()).map(String::from).collect()
    }

    fn run(s: &str) -> VerifyConfig {
        match parse_args(args(s)).unwrap() {
            Invocation::Run(c) => c,
            Invocation::Info(_) => panic!("unexpected info"),
        }
    }

    #[test]
    fn positional_and_flag_suite() {
        assert_eq!(run("torus-trace --d 2 --nmax 4096").suite, Suite::TorusTrace);
        assert_eq!(run("--suite su2 --lmax 7/2").lmax, HalfInteger::new(7));
        assert!(parse_args(args("su2 --suite moments")).is_err());
    }

    #[test]
    fn tolerance_flags_override_defaults() {
        let c = run("su2 --tol.ratio 0.5 --tol.eta=1e-9");
        assert_eq!(c.tol("ratio"), 0.5);
        assert_eq!(c.tol("eta"), 1e-9);
        assert_eq!(c.tol("casimir"), 1e-12);
        assert!(matches!(parse_args(args("su2 --tol.slope 0.1")), Err(CliError::Config(_))));
        assert!(matches!(parse_args(args("su2 --tol.ratio -1")), Err(CliError::Config(_))));
        assert!(matches!(parse_args(args("su2 --tol.ratio 0")), Err(CliError::Config(_))));
    }

    #[test]
    fn theta_length_and_defaults() {
        let c = run("symplectic --d 4");
        assert_eq!(c.theta.len(), 6);
        assert_eq!(c.nmax, 64);
        assert_eq!(run("torus-trace --d 2 --theta 0.3").theta, vec![0.3]);
        assert!(parse_args(args("torus-trace --d 2 --theta 0.3,0.1")).is_err());
        assert!(parse_args(args("moments --d 1")).is_err());
    }

    #[test]
    fn config_text_parsing() {
        let m =
            parse_config_text("# pinned run\nsuite = moments\nd=4 # inline\n\ntol.main_reduction = 1e-11\n").unwrap();
        assert_eq!(m["suite"], "moments");
        assert_eq!(m["d"], "4");
        let c = VerifyConfig::from_settings(&m).unwrap();
        assert_eq!(c.tol("main_reduction"), 1e-11);
        assert!(parse_config_text("suite moments").is_err());
        let mut m2 = m.clone();
        m2.insert("colour".into(), "blue".into());
        assert!(VerifyConfig::from_settings(&m2).is_err());
    }

    #[test]
    fn unknown_suite_and_format() {
        assert!(matches!(parse_args(args("spectral")), Err(CliError::Config(_))));
        assert!(parse_args(args("moments --format xml")).is_err());
        assert!(matches!(parse_args(args("--help")).unwrap(), Invocation::Info(_)));
    }

    #[test]
    fn missing_config_file_is_io() {
        let e = parse_args(args("--config /nonexistent/dir/x.conf")).err().unwrap();
        assert_eq!(e.exit_code(), 3);
    }
}
