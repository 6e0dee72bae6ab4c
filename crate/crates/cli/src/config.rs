//! `key = value` simulation configs.
//!
//! ```text
//! # ST(2,3,6) over AWGN
//! code = st
//! r = 2
//! d = 3
//! m = 6
//! channel = awgn
//! snr_db = 6, 7, 8, 9
//! decoders = admm, ml, bdd
//! codeword = 1,2,3,4,5,6,1,2,3,4,5,6
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use multiperm::channels::{sigma_from_snr_db, ChannelSpec};
use multiperm::codes::{derangement_constraints, st_constraints, ConstraintSet, Entry, StCodeParams};
use multiperm::decoders::AdmmOptions;
use multiperm::initvec::GridSpec;
use multiperm::{InitialVector, Multipermutation, MultiplicityVector};
use thiserror::Error;

pub const DEFAULT_TARGET_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Admm,
    Ml,
    MinDist,
    ChebLpSoft,
    ChebLpHard,
    Bdd,
    Turbo,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 7] = [
        DecoderKind::Admm,
        DecoderKind::Ml,
        DecoderKind::MinDist,
        DecoderKind::ChebLpSoft,
        DecoderKind::ChebLpHard,
        DecoderKind::Bdd,
        DecoderKind::Turbo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Admm => "admm",
            DecoderKind::Ml => "ml",
            DecoderKind::MinDist => "min-dist",
            DecoderKind::ChebLpSoft => "cheb-lp-soft",
            DecoderKind::ChebLpHard => "cheb-lp-hard",
            DecoderKind::Bdd => "bdd",
            DecoderKind::Turbo => "turbo",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown decoder `{s}`"))
    }
}

/// A code together with the structure some decoders need.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub constraints: ConstraintSet,
    /// Present for ST codes; required by `bdd`.
    pub st: Option<StCodeParams>,
}

impl CodeSpec {
    pub fn st(p: StCodeParams) -> Self {
        Self {
            constraints: st_constraints(&p),
            st: Some(p),
        }
    }

    pub fn derangement(mult: &MultiplicityVector) -> Self {
        Self {
            constraints: derangement_constraints(mult),
            st: None,
        }
    }

    pub fn custom(constraints: ConstraintSet) -> Self {
        Self { constraints, st: None }
    }

    pub fn multiplicity(&self) -> &MultiplicityVector {
        self.constraints.multiplicity()
    }
}

/// Parses a constraint file: one `zero i j` or `equal i1 j1 i2 j2` per line,
/// with 1-based rows and columns.
pub fn parse_constraints(text: &str, mult: &MultiplicityVector) -> Result<ConstraintSet, ConfigError> {
    let mut c = ConstraintSet::unconstrained(mult.clone());
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |msg: String| ConfigError::Line { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let kind = words.next().unwrap_or_default();
        let nums: Vec<usize> = words
            .map(|w| w.parse::<usize>().map_err(|_| err(format!("bad index `{w}`"))))
            .collect::<Result<_, _>>()?;
        let entry = |i: usize, j: usize| -> Result<Entry, ConfigError> {
            if i == 0 || j == 0 || i > mult.m() || j > mult.n() {
                return Err(err(format!(
                    "entry ({i}, {j}) outside the {}x{} matrix",
                    mult.m(),
                    mult.n()
                )));
            }
            Ok(Entry::new(i - 1, j - 1))
        };
        let res = match (kind, nums.as_slice()) {
            ("zero", &[i, j]) => c.add_zero(entry(i, j)?),
            ("equal", &[i1, j1, i2, j2]) => c.add_equality(entry(i1, j1)?, entry(i2, j2)?),
            _ => return Err(err(format!("expected `zero i j` or `equal i1 j1 i2 j2`, got `{body}`"))),
        };
        res.map_err(|e| err(e.to_string()))?;
    }
    Ok(c)
}

/// One simulated channel condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    /// Written to the `snr_db` column: the SNR for AWGN, `p` for the QSC.
    pub label: f64,
    pub spec: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodewordChoice {
    Fixed(Multipermutation),
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurboHard {
    ChebLp,
    Bdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurboSoft {
    ChebLp,
    Admm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboConfig {
    pub iterations: usize,
    pub grid: GridSpec,
    pub hard: TurboHard,
    pub soft: TurboSoft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub points: Vec<ChannelPoint>,
    pub initial_vector: InitialVector,
    pub decoders: Vec<DecoderKind>,
    pub codeword: CodewordChoice,
    pub max_trials: u64,
    pub target_errors: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record `avg_decode_ms`. Off keeps the CSV reproducible byte for byte.
    pub timing: bool,
    pub admm: AdmmOptions,
    pub turbo: TurboConfig,
}

impl SimConfig {
    /// A config for `code` with defaults everywhere else.
    pub fn new(code: CodeSpec, points: Vec<ChannelPoint>, decoders: Vec<DecoderKind>) -> Self {
        let m = code.multiplicity().m();
        Self {
            code,
            points,
            initial_vector: InitialVector::natural(m),
            decoders,
            codeword: CodewordChoice::Random,
            max_trials: DEFAULT_MAX_TRIALS,
            target_errors: DEFAULT_TARGET_ERRORS,
            seed: 0,
            out: None,
            timing: false,
            admm: AdmmOptions::default(),
            turbo: TurboConfig {
                iterations: 1,
                grid: GridSpec::new(1.0, true).expect("positive"),
                hard: TurboHard::ChebLp,
                soft: TurboSoft::ChebLp,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.decoders.is_empty() {
            return Err(invalid("`decoders` must name at least one decoder"));
        }
        if self.points.is_empty() {
            return Err(invalid("no channel points"));
        }
        if self.max_trials == 0 {
            return Err(invalid("`max_trials` must be at least 1"));
        }
        if self.target_errors == 0 {
            return Err(invalid("`target_errors` must be at least 1"));
        }
        let mult = self.code.multiplicity();
        if self.initial_vector.m() != mult.m() {
            return Err(invalid(format!(
                "`initial_vector` has {} levels, the code has {} symbols",
                self.initial_vector.m(),
                mult.m()
            )));
        }
        if let CodewordChoice::Fixed(x) = &self.codeword {
            if x.multiplicity() != mult || !self.code.constraints.is_member_symbols(x.symbols()) {
                return Err(invalid("`codeword` is not a codeword of the configured code"));
            }
        }
        let qsc = self.points.iter().any(|p| matches!(p.spec, ChannelSpec::Qsc { .. }));
        for &d in &self.decoders {
            if d == DecoderKind::Bdd && self.code.st.is_none() {
                return Err(invalid("`bdd` needs an ST code"));
            }
            if d == DecoderKind::Turbo && qsc {
                return Err(invalid("`turbo` needs an AWGN channel"));
            }
            if d == DecoderKind::Turbo && self.turbo.hard == TurboHard::Bdd && self.code.st.is_none() {
                return Err(invalid("`turbo_hard = bdd` needs an ST code"));
            }
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse `{s}`")))
        .collect()
}

fn parse_one<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse::<T>().map_err(|_| format!("cannot parse `{value}`"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got `{value}`")),
    }
}

const KEYS: &[&str] = &[
    "code",
    "r",
    "d",
    "m",
    "multiplicity",
    "constraints",
    "channel",
    "snr_db",
    "sigma",
    "p",
    "initial_vector",
    "decoders",
    "codeword",
    "max_trials",
    "target_errors",
    "seed",
    "out",
    "timing",
    "mu",
    "max_iter",
    "eps",
    "sample_median",
    "turbo_iters",
    "delta",
    "largest_cell",
    "turbo_hard",
    "turbo_soft",
];

/// Parses a config. Relative paths inside it resolve against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<SimConfig, ConfigError> {
    // key -> (line, value)
    let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Line {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Line {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        if let Some((first, _)) = kv.insert(key, (line, value)) {
            return Err(ConfigError::Line {
                line,
                msg: format!("`{key}` already set on line {first}"),
            });
        }
    }

    let at = |key: &str, msg: String| match kv.get(key) {
        Some(&(line, _)) => ConfigError::Line {
            line,
            msg: format!("`{key}`: {msg}"),
        },
        None => invalid(format!("`{key}`: {msg}")),
    };
    let required = |key: &str| {
        kv.get(key)
            .map(|&(_, v)| v)
            .ok_or_else(|| invalid(format!("missing key `{key}`")))
    };
    let optional = |key: &str| kv.get(key).map(|&(_, v)| v);
    fn get<T: FromStr>(
        v: Option<&str>,
        key: &str,
        at: &dyn Fn(&str, String) -> ConfigError,
    ) -> Result<Option<T>, ConfigError> {
        v.map(|v| parse_one::<T>(v).map_err(|e| at(key, e))).transpose()
    }

    let code = match required("code")? {
        "st" => {
            let r = get::<usize>(Some(required("r")?), "r", &at)?.unwrap();
            let d = get::<usize>(Some(required("d")?), "d", &at)?.unwrap();
            let m = get::<usize>(Some(required("m")?), "m", &at)?.unwrap();
            CodeSpec::st(StCodeParams::new(r, d, m).map_err(|e| at("code", e.to_string()))?)
        }
        kind @ ("derangement" | "custom") => {
            let counts = parse_list::<usize>(required("multiplicity")?).map_err(|e| at("multiplicity", e))?;
            let mult = MultiplicityVector::new(counts).map_err(|e| at("multiplicity", e.to_string()))?;
            if kind == "derangement" {
                CodeSpec::derangement(&mult)
            } else {
                let path = base.join(required("constraints")?);
                let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Io {
                    path: path.display().to_string(),
                    msg: e.to_string(),
                })?;
                let c = parse_constraints(&text, &mult).map_err(|e| match e {
                    ConfigError::Line { line, msg } => invalid(format!("{}:{line}: {msg}", path.display())),
                    other => other,
                })?;
                CodeSpec::custom(c)
            }
        }
        other => return Err(at("code", format!("expected st, derangement or custom, got `{other}`"))),
    };

    let points: Vec<ChannelPoint> = match required("channel")? {
        "awgn" => match (optional("snr_db"), optional("sigma")) {
            (Some(v), None) => parse_list::<f64>(v)
                .map_err(|e| at("snr_db", e))?
                .into_iter()
                .map(|snr| {
                    Ok(ChannelPoint {
                        label: snr,
                        spec: ChannelSpec::awgn(sigma_from_snr_db(snr)).map_err(|e| at("snr_db", e.to_string()))?,
                    })
                })
                .collect::<Result<_, ConfigError>>()?,
            (None, Some(v)) => parse_list::<f64>(v)
                .map_err(|e| at("sigma", e))?
                .into_iter()
                .map(|s| {
                    Ok(ChannelPoint {
                        label: multiperm::channels::snr_db_from_sigma(s),
                        spec: ChannelSpec::awgn(s).map_err(|e| at("sigma", e.to_string()))?,
                    })
                })
                .collect::<Result<_, ConfigError>>()?,
            _ => return Err(invalid("awgn needs exactly one of `snr_db` or `sigma`")),
        },
        "qsc" => parse_list::<f64>(required("p")?)
            .map_err(|e| at("p", e))?
            .into_iter()
            .map(|p| {
                Ok(ChannelPoint {
                    label: p,
                    spec: ChannelSpec::qsc(p).map_err(|e| at("p", e.to_string()))?,
                })
            })
            .collect::<Result<_, ConfigError>>()?,
        other => return Err(at("channel", format!("expected awgn or qsc, got `{other}`"))),
    };

    let decoders = parse_list::<DecoderKind>(required("decoders")?).map_err(|e| at("decoders", e))?;
    let mut cfg = SimConfig::new(code, points, decoders);
    let mult = cfg.code.multiplicity().clone();

    if let Some(v) = optional("initial_vector") {
        let t = parse_list::<f64>(v).map_err(|e| at("initial_vector", e))?;
        cfg.initial_vector = InitialVector::new(t).map_err(|e| at("initial_vector", e.to_string()))?;
    }
    if let Some(v) = optional("codeword") {
        cfg.codeword = if v == "random" {
            CodewordChoice::Random
        } else {
            let s = parse_list::<usize>(v).map_err(|e| at("codeword", e))?;
            CodewordChoice::Fixed(Multipermutation::new(s, mult).map_err(|e| at("codeword", e.to_string()))?)
        };
    }
    if let Some(v) = get::<u64>(optional("max_trials"), "max_trials", &at)? {
        cfg.max_trials = v;
    }
    if let Some(v) = get::<u64>(optional("target_errors"), "target_errors", &at)? {
        cfg.target_errors = v;
    }
    if let Some(v) = get::<u64>(optional("seed"), "seed", &at)? {
        cfg.seed = v;
    }
    cfg.out = optional("out").map(|p| base.join(p));
    if let Some(v) = optional("timing") {
        cfg.timing = parse_bool(v).map_err(|e| at("timing", e))?;
    }
    if let Some(v) = get::<f64>(optional("mu"), "mu", &at)? {
        if !(v > 0.0) {
            return Err(at("mu", "must be positive".into()));
        }
        cfg.admm.mu = v;
    }
    if let Some(v) = get::<usize>(optional("max_iter"), "max_iter", &at)? {
        cfg.admm.max_iter = v;
    }
    if let Some(v) = get::<f64>(optional("eps"), "eps", &at)? {
        cfg.admm.eps = v;
    }
    if let Some(v) = optional("sample_median") {
        cfg.admm.projection.sample_median = parse_bool(v).map_err(|e| at("sample_median", e))?;
    }
    if let Some(v) = get::<usize>(optional("turbo_iters"), "turbo_iters", &at)? {
        cfg.turbo.iterations = v;
    }
    let delta = get::<f64>(optional("delta"), "delta", &at)?.unwrap_or(cfg.turbo.grid.delta);
    let largest = match optional("largest_cell") {
        Some(v) => parse_bool(v).map_err(|e| at("largest_cell", e))?,
        None => cfg.turbo.grid.largest_cell,
    };
    cfg.turbo.grid = GridSpec::new(delta, largest).map_err(|e| at("delta", e.to_string()))?;
    if let Some(v) = optional("turbo_hard") {
        cfg.turbo.hard = match v {
            "cheb-lp" => TurboHard::ChebLp,
            "bdd" => TurboHard::Bdd,
            _ => return Err(at("turbo_hard", format!("expected cheb-lp or bdd, got `{v}`"))),
        };
    }
    if let Some(v) = optional("turbo_soft") {
        cfg.turbo.soft = match v {
            "cheb-lp" => TurboSoft::ChebLp,
            "admm" => TurboSoft::Admm,
            _ => return Err(at("turbo_soft", format!("expected cheb-lp or admm, got `{v}`"))),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "code = st\nr = 2\nd = 3\nm = 6\nchannel = awgn\nsnr_db = 6\ndecoders = admm\n";

    fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        parse_config_str(text, Path::new("."))
    }

    #[test]
    fn minimal_file() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.decoders, vec![DecoderKind::Admm]);
        assert_eq!(cfg.code.st, Some(StCodeParams::new(2, 3, 6).unwrap()));
        assert_eq!(cfg.codeword, CodewordChoice::Random);
        assert_eq!(cfg.target_errors, 100);
        assert_eq!(cfg.max_trials, 1_000_000);
        assert_eq!(cfg.admm.mu, 5.5);
        assert_eq!(cfg.admm.max_iter, 200);
    }

    #[test]
    fn snr_list_maps_to_sigma() {
        let cfg = parse(&MINIMAL.replace("snr_db = 6", "snr_db = 6,7,8,9")).unwrap();
        let labels: Vec<f64> = cfg.points.iter().map(|p| p.label).collect();
        assert_eq!(labels, vec![6.0, 7.0, 8.0, 9.0]);
        for p in &cfg.points {
            let ChannelSpec::Awgn { sigma } = p.spec else { panic!() };
            assert!((sigma - 10f64.powf(-p.label / 20.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn missing_decoders_names_key() {
        let text = MINIMAL.replace("decoders = admm\n", "");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("decoders"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse(&format!("{MINIMAL}# comment\nfoo = 1\n")).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Line {
                line: 9,
                msg: "unknown key `foo`".into()
            }
        );
        let err = parse(&MINIMAL.replace("r = 2", "r = two")).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 2, .. }), "{err}");
        let err = parse(&format!("{MINIMAL}r = 3\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 8, .. }), "{err}");
        let err = parse(&format!("{MINIMAL}just words\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 8, .. }), "{err}");
    }

    #[test]
    fn rejects_inconsistent_settings() {
        assert!(parse(&MINIMAL.replace("decoders = admm", "decoders = ")).is_err());
        assert!(parse(&MINIMAL.replace("decoders = admm", "decoders = viterbi")).is_err());
        assert!(parse(&format!("{MINIMAL}codeword = 1,1,2,2,3,3,4,4,5,5,6,6\n")).is_err());
        assert!(parse(&format!("{MINIMAL}max_trials = 0\n")).is_err());
        let derange = "code = derangement\nmultiplicity = 2,2,2\nchannel = qsc\np = 0.1\ndecoders = bdd\n";
        assert!(parse(derange).unwrap_err().to_string().contains("ST"));
        let turbo_qsc = MINIMAL
            .replace("channel = awgn\nsnr_db = 6", "channel = qsc\np = 0.1")
            .replace("admm", "turbo");
        assert!(parse(&turbo_qsc).is_err());
    }

    #[test]
    fn full_file() {
        let text = "code = derangement\nmultiplicity = 2, 2, 2\nchannel = awgn\nsigma = 0.5, 0.25\n\
                    decoders = admm, ml, min-dist, cheb-lp-soft, cheb-lp-hard, turbo\n\
                    codeword = 2,2,3,3,1,1\ninitial_vector = 0.5, 1.5, 2.5\nmax_trials = 10\n\
                    target_errors = 3\nseed = 99\ntiming = yes\nmu = 3\nmax_iter = 50\neps = 1e-6\n\
                    sample_median = true\nturbo_iters = 2\ndelta = 0.5\nlargest_cell = false\n\
                    turbo_soft = admm\n";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.decoders.len(), 6);
        assert_eq!(cfg.points.len(), 2);
        assert!((cfg.points[0].label - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert_eq!(cfg.initial_vector.values(), &[0.5, 1.5, 2.5]);
        assert_eq!((cfg.max_trials, cfg.target_errors, cfg.seed), (10, 3, 99));
        assert!(cfg.timing && cfg.admm.projection.sample_median);
        assert_eq!(cfg.admm.max_iter, 50);
        assert_eq!(cfg.turbo.iterations, 2);
        assert_eq!(cfg.turbo.grid, GridSpec::new(0.5, false).unwrap());
        assert_eq!(cfg.turbo.soft, TurboSoft::Admm);
    }

    #[test]
    fn constraint_files() {
        let mult = MultiplicityVector::new(vec![1, 2, 1]).unwrap();
        let c = parse_constraints("# fig\nzero 3 1\nequal 1 3 2 4\n", &mult).unwrap();
        assert_eq!(c.kappa(), 1);
        assert_eq!(c.iota(), 1);
        assert!(c.zeros().contains(&Entry::new(2, 0)));
        let err = parse_constraints("zero 1 1\nzero 4 1\n", &mult).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 2, .. }));
        assert!(parse_constraints("one 1 1\n", &mult).is_err());
        let err = parse_constraints("zero 1 1\nzero 1 1\n", &mult).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 2, .. }));
    }
}
