use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiperm::channels::{sigma_from_snr_db, ChannelOutput, ChannelSpec};
use multiperm::codes::{decode_st, encode_st, enumerate_codebook, StCodeParams, DEFAULT_ENUMERATION_CAP};
use multiperm::ensemble::{
    ball_size_bounds, expected_cardinality, monte_carlo_ball_size, monte_carlo_cardinality, scaling_report,
    EnsembleParams,
};
use multiperm::polytope::{project_capped_sum, project_capped_sum_sorted, project_simplex};
use multiperm::ranking::{rank_mp, unrank_mp};
use multiperm::{InitialVector, Multipermutation, MultiplicityVector};
use multiperm_cli::config::{parse_constraints, CodeSpec, ConfigError, DecoderKind, SimConfig};
use multiperm_cli::sim::{simulate, write_csv, Roster};
use num_bigint::BigUint;

#[derive(Parser)]
#[command(name = "multiperm", version, about = "LP-decodable multipermutation codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Word-error-rate simulation from a config file; CSV on stdout or `out`.
    Simulate {
        config: PathBuf,
        /// Overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Encode a message with an ST code.
    StEncode {
        #[command(flatten)]
        st: StArgs,
        message: BigUint,
    },
    /// Recover the message of an ST codeword.
    StDecode {
        #[command(flatten)]
        st: StArgs,
        #[arg(value_delimiter = ',', required = true)]
        word: Vec<usize>,
    },
    /// Rank of a multipermutation; the multiplicity is read off the word.
    Rank {
        #[arg(value_delimiter = ',', required = true)]
        word: Vec<usize>,
    },
    /// Multipermutation of a given rank.
    Unrank {
        #[arg(long, value_delimiter = ',', required = true)]
        multiplicity: Vec<usize>,
        index: BigUint,
    },
    /// Decode one received word.
    Decode(DecodeArgs),
    /// Euclidean projection onto the simplex or a capped-sum set.
    Project {
        #[arg(long, value_enum)]
        set: ProjectSet,
        /// Required sum for `capped`.
        #[arg(long, default_value_t = 1)]
        target: usize,
        /// Use the sorting algorithm instead of the median search.
        #[arg(long)]
        sorted: bool,
        #[arg(value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
    },
    /// Random fixed-at-zero or fixed-at-equality ensembles.
    Ensemble {
        #[arg(long, value_delimiter = ',', required = true)]
        multiplicity: Vec<usize>,
        /// Number of fixed-at-zero entries.
        #[arg(long, conflicts_with = "iota")]
        kappa: Option<usize>,
        /// Number of fixed-at-equality pairs.
        #[arg(long)]
        iota: Option<usize>,
        /// Monte Carlo draws.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report the Chebyshev ball size at this radius.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Exponent constants of ST codes against random ensembles.
    Scaling {
        #[arg(long)]
        r: usize,
        /// m / d.
        #[arg(long)]
        ratio: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
    },
    /// List every codeword.
    Codebook {
        #[command(flatten)]
        code: CodeArgs,
    },
}

#[derive(Args)]
struct StArgs {
    #[arg(long)]
    r: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: usize,
}

impl StArgs {
    fn params(&self) -> multiperm::Result<StCodeParams> {
        StCodeParams::new(self.r, self.d, self.m)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeKind {
    St,
    Derangement,
    Custom,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, value_enum, default_value = "st")]
    code: CodeKind,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    multiplicity: Option<Vec<usize>>,
    /// Constraint file for `--code custom`.
    #[arg(long)]
    constraints: Option<PathBuf>,
}

impl CodeArgs {
    fn spec(&self) -> Result<CodeSpec, Failure> {
        let mult = || -> Result<MultiplicityVector, Failure> {
            let counts = self
                .multiplicity
                .clone()
                .ok_or(Failure::Usage("--multiplicity is required".into()))?;
            Ok(MultiplicityVector::new(counts)?)
        };
        Ok(match self.code {
            CodeKind::St => {
                let (Some(r), Some(d), Some(m)) = (self.r, self.d, self.m) else {
                    return Err(Failure::Usage("--code st needs --r, --d and --m".into()));
                };
                CodeSpec::st(StCodeParams::new(r, d, m)?)
            }
            CodeKind::Derangement => CodeSpec::derangement(&mult()?),
            CodeKind::Custom => {
                let path = self
                    .constraints
                    .as_ref()
                    .ok_or(Failure::Usage("--constraints is required".into()))?;
                let text =
                    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                CodeSpec::custom(parse_constraints(&text, &mult()?)?)
            }
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelKind {
    Awgn,
    Qsc,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    decoder: DecoderKind,
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_enum, default_value = "awgn")]
    channel: ChannelKind,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    initial_vector: Option<Vec<f64>>,
    /// Transmitted word, to report whether decoding succeeded.
    #[arg(long, value_delimiter = ',')]
    word: Option<Vec<usize>>,
    /// Reals for AWGN, symbols for the QSC.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    received: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectSet {
    Simplex,
    Capped,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] multiperm::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("decoding failed")]
    Decode,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Usage(_) => 2,
            Failure::Decode => 3,
            Failure::Core(_) | Failure::Io(_) => 1,
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn run(cmd: Cmd, out: &mut impl Write) -> Result<(), Failure> {
    match cmd {
        Cmd::Simulate {
            config,
            out: path,
            threads,
        } => {
            let mut cfg = multiperm_cli::parse_config(&config)?;
            if path.is_some() {
                cfg.out = path;
            }
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let rows = simulate(&cfg)?;
            match &cfg.out {
                Some(p) => write_csv(&rows, BufWriter::new(File::create(p)?))?,
                None => write_csv(&rows, out)?,
            }
        }
        Cmd::StEncode { st, message } => {
            writeln!(out, "{}", join(encode_st(&message, &st.params()?)?.symbols()))?;
        }
        Cmd::StDecode { st, word } => {
            writeln!(out, "{}", decode_st(&word, &st.params()?)?)?;
        }
        Cmd::Rank { word } => {
            let m = word.iter().copied().max().unwrap_or(0);
            writeln!(out, "{}", rank_mp(&Multipermutation::from_symbols(word, m)?))?;
        }
        Cmd::Unrank { multiplicity, index } => {
            let mult = MultiplicityVector::new(multiplicity)?;
            writeln!(out, "{}", join(unrank_mp(&index, &mult)?.symbols()))?;
        }
        Cmd::Decode(args) => decode(args, out)?,
        Cmd::Project {
            set,
            target,
            sorted,
            values,
        } => {
            let z = match set {
                ProjectSet::Simplex => project_simplex(&values),
                ProjectSet::Capped if sorted => project_capped_sum_sorted(&values, target)?,
                ProjectSet::Capped => project_capped_sum(&values, target)?,
            };
            writeln!(out, "{}", join(&z))?;
        }
        Cmd::Ensemble {
            multiplicity,
            kappa,
            iota,
            trials,
            seed,
            radius,
        } => {
            let mult = MultiplicityVector::new(multiplicity)?;
            let p = match (kappa, iota) {
                (Some(k), None) => EnsembleParams::zeros(mult, k)?,
                (None, Some(i)) => EnsembleParams::equalities(mult, i)?,
                _ => return Err(Failure::Usage("give one of --kappa or --iota".into())),
            };
            let exact = expected_cardinality(&p);
            let approx = num_traits::ToPrimitive::to_f64(&exact).unwrap_or(f64::NAN);
            writeln!(out, "expected_cardinality = {exact} ({approx})")?;
            if trials > 0 {
                let e = monte_carlo_cardinality(&p, trials, seed);
                writeln!(
                    out,
                    "monte_carlo_cardinality = {} +- {} ({} draws)",
                    e.mean, e.stderr, e.samples
                )?;
            }
            if let Some(d) = radius {
                let (lo, hi) = ball_size_bounds(&p, d)?;
                writeln!(out, "ball_size_bounds = [{lo}, {hi}]")?;
                if trials > 0 {
                    let e = monte_carlo_ball_size(&p, d, trials, seed);
                    writeln!(out, "monte_carlo_ball_size = {} +- {}", e.mean, e.stderr)?;
                }
            }
        }
        Cmd::Scaling { r, ratio, d } => {
            writeln!(out, "d,m,kappa,c_st,c_r")?;
            for row in scaling_report(r, ratio, d)? {
                writeln!(out, "{},{},{},{},{}", row.d, row.m, row.kappa, row.c_st, row.c_r)?;
            }
        }
        Cmd::Codebook { code } => {
            for x in enumerate_codebook(&code.spec()?.constraints, DEFAULT_ENUMERATION_CAP)? {
                writeln!(out, "{}", join(x.symbols()))?;
            }
        }
    }
    Ok(())
}

fn decode(args: DecodeArgs, out: &mut impl Write) -> Result<(), Failure> {
    let code = args.code.spec()?;
    let mult = code.multiplicity().clone();
    let spec = match args.channel {
        ChannelKind::Awgn => match (args.sigma, args.snr_db) {
            (Some(s), None) => ChannelSpec::awgn(s)?,
            (None, Some(snr)) => ChannelSpec::awgn(sigma_from_snr_db(snr))?,
            _ => return Err(Failure::Usage("awgn needs one of --sigma or --snr-db".into())),
        },
        ChannelKind::Qsc => ChannelSpec::qsc(args.p.ok_or(Failure::Usage("qsc needs --p".into()))?)?,
    };
    if args.received.len() != mult.n() {
        return Err(Failure::Usage(format!(
            "expected {} received values, got {}",
            mult.n(),
            args.received.len()
        )));
    }
    let y = match spec {
        ChannelSpec::Awgn { .. } => ChannelOutput::Real(args.received.clone()),
        ChannelSpec::Qsc { .. } => ChannelOutput::Symbols(
            args.received
                .iter()
                .map(|&v| {
                    if v.fract() == 0.0 && v >= 1.0 && v <= mult.m() as f64 {
                        Ok(v as usize)
                    } else {
                        Err(Failure::Usage(format!("`{v}` is not a symbol in 1..={}", mult.m())))
                    }
                })
                .collect::<Result<_, _>>()?,
        ),
    };
    let mut cfg = SimConfig::new(code, vec![], vec![args.decoder]);
    if let Some(t) = args.initial_vector {
        cfg.initial_vector = InitialVector::new(t)?;
    }
    if let Some(w) = &args.word {
        cfg.codeword = multiperm_cli::config::CodewordChoice::Fixed(Multipermutation::new(w.clone(), mult.clone())?);
    }
    let roster = Roster::new(&cfg)?;
    if args.decoder == DecoderKind::Bdd && cfg.code.st.is_none() {
        return Err(Failure::Usage("bdd needs --code st".into()));
    }
    let d = roster.decode(args.decoder, &y, &spec)?;
    match &d.word {
        Some(w) => writeln!(out, "decoded = {}", join(w))?,
        None => writeln!(out, "decoded = failure")?,
    }
    writeln!(out, "iterations = {}", d.iterations)?;
    writeln!(out, "certificate = {}", d.integral)?;
    let codeword = d.word.as_ref().filter(|w| {
        Multipermutation::new(w.to_vec(), mult.clone()).is_ok() && cfg.code.constraints.is_member_symbols(w)
    });
    if let Some(w) = &args.word {
        writeln!(out, "correct = {}", d.word.as_ref() == Some(w))?;
    }
    match codeword {
        Some(_) => Ok(()),
        None => Err(Failure::Decode),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.cmd, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
