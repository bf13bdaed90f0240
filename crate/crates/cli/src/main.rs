use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use weyl_cdma::correlation::BitPair;
use weyl_cdma::decomposition::{decompose, despread_for_bits, CoefficientKind};
use weyl_cdma::formats::{
    correlation_profile, parse_sequence, parse_sim_config, write_ber_csv, write_ber_json,
    write_coefficients_csv, write_profile_csv, write_sequence_csv, write_sequence_json, ProfileRow,
    SweepSpec,
};
use weyl_cdma::sequences::Family;
use weyl_cdma::sequences::{
    gold_degree_for_len, gold_sequence, weyl_sequence, GoldParams, SpreadingSequence, WeylParams,
};
use weyl_cdma::simulator::{
    db_to_linear, snr_lower_bound, sweep_with_progress, OffsetsMode, PhaseMode, SimConfig,
};
use weyl_cdma::spectral::{verify_diagonalization, EigenKind, RESIDUAL_PER_N, VERIFY_LIMIT};

#[derive(Parser, Debug)]
#[command(
    name = "weyl-cdma",
    version,
    about = "Weyl and Gold spreading sequences for chip-synchronous CDMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one spreading sequence as CSV or JSON.
    Generate(GenerateArgs),
    /// Cross-correlation or despread profile of two sequence files over every gap.
    Correlate(CorrelateArgs),
    /// Check the closed-form eigendecomposition of the shift operators.
    VerifyBasis(VerifyArgs),
    /// Expand a sequence in the Weyl bases.
    Decompose(DecomposeArgs),
    /// Monte Carlo BER sweep over users and Eb/N0.
    Simulate(SimulateArgs),
    /// Lower bound on the despread SNR.
    Bound(BoundArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyArg {
    Weyl,
    Gold,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Same,
    Different,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum CoeffArg {
    #[default]
    Alpha,
    Beta,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum PhaseArg {
    #[default]
    Zero,
    Uniform,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Sequence length (weyl), or 2^degree - 1 (gold).
    #[arg(long)]
    n: Option<usize>,
    /// Weyl index, 1..=N.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// LFSR degree for gold; inferred from --n when omitted.
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, default_value_t = 0)]
    shift: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Wrap sign: 1 for periodic, -1 for odd correlation.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    b_sign: i8,
    /// Despread with bit pair `prev,cur` instead (unnormalized W).
    #[arg(long, allow_hyphen_values = true)]
    bits: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 1)]
    l_min: usize,
    /// Defaults to N.
    #[arg(long)]
    l_max: Option<usize>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Write α coefficients here.
    #[arg(long)]
    alpha: Option<PathBuf>,
    /// Write β coefficients here.
    #[arg(long)]
    beta: Option<PathBuf>,
    /// Coefficients printed when neither --alpha nor --beta is given.
    #[arg(long, value_enum, default_value_t)]
    kind: CoeffArg,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// TOML config; replaces the sweep flags below.
    #[arg(long, conflicts_with_all = ["family", "n", "sigma", "k_users", "ebn0_db", "symbols", "seed", "phase", "offsets"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    k_users: Vec<usize>,
    /// Comma-separated list; `inf` means noiseless.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebn0_db: Vec<f64>,
    #[arg(long)]
    symbols: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    phase: Option<PhaseArg>,
    /// `uniform`, or a comma-separated gap per interferer.
    #[arg(long)]
    offsets: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Eb/N0 in dB; `inf` for the noise-free limit.
    #[arg(long, allow_negative_numbers = true)]
    ebn0_db: f64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<weyl_cdma::Error> for Failure {
    fn from(e: weyl_cdma::Error) -> Self {
        match e {
            weyl_cdma::Error::Parameter { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn missing(flag: &str) -> Failure {
    Failure::Usage(format!("missing required flag: --{flag}"))
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Runtime(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_sequence(path: &Path) -> CliResult<SpreadingSequence> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    parse_sequence(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn generate(args: GenerateArgs) -> CliResult {
    let (seq, summary) = match args.family {
        FamilyArg::Weyl => {
            let n = args.n.ok_or_else(|| missing("n"))?;
            let k = args.k.ok_or_else(|| missing("k"))?;
            let seq = weyl_sequence(WeylParams::new(k, n, args.sigma)?);
            (seq, format!("weyl N={n} k={k} sigma={}", args.sigma))
        }
        FamilyArg::Gold => {
            let degree = match (args.degree, args.n) {
                (Some(d), _) => d,
                (None, Some(n)) => gold_degree_for_len(n)?,
                (None, None) => return Err(missing("degree")),
            };
            let params = GoldParams::preferred(degree, args.shift)?;
            if let Some(n) = args.n.filter(|&n| n != params.len()) {
                return Err(Failure::Usage(format!(
                    "--n {n} does not match degree {degree} (N = {})",
                    params.len()
                )));
            }
            let seq = gold_sequence(&params)?;
            let summary = format!(
                "gold N={} degree={degree} shift={} polynomials {} / {}",
                params.len(),
                args.shift,
                params.poly_a,
                params.poly_b
            );
            (seq, summary)
        }
    };
    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_sequence_csv(&seq, &mut out)?,
        Format::Json => write_sequence_json(&seq, &mut out)?,
    }
    out.flush()?;
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn parse_bits(text: &str) -> CliResult<BitPair> {
    let signs: Vec<i8> = text
        .split(',')
        .map(|s| s.trim().parse::<i8>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--bits: `{text}` is not `prev,cur`")))?;
    match signs[..] {
        [prev, cur] => Ok(BitPair::new(prev, cur)?),
        _ => Err(Failure::Usage(format!(
            "--bits: `{text}` is not `prev,cur`"
        ))),
    }
}

fn correlate(args: CorrelateArgs) -> CliResult {
    let a = read_sequence(&args.a)?;
    let b = read_sequence(&args.b)?;
    let rows = match args.bits {
        Some(bits) => {
            let pair = parse_bits(&bits)?;
            (0..=a.len())
                .map(|l| Ok(ProfileRow::new(l, despread_for_bits(&a, &b, l, pair)?)))
                .collect::<weyl_cdma::Result<Vec<_>>>()?
        }
        None => correlation_profile(&a, &b, args.b_sign)?,
    };
    let mut out = open_output(args.out.as_deref())?;
    write_profile_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn verify_basis(args: VerifyArgs) -> CliResult<bool> {
    let n = args.n;
    if n > VERIFY_LIMIT {
        return Err(Failure::Usage(format!(
            "N = {n} exceeds {VERIFY_LIMIT}; dense verification is O(N^3) per gap, \
             use a smaller N (the closed form does not depend on N)"
        )));
    }
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let l_max = args.l_max.unwrap_or(n);
    if args.l_min == 0 || args.l_min > l_max || l_max > n {
        return Err(Failure::Usage(format!(
            "gap range {}..={l_max} must lie within 1..={n}",
            args.l_min
        )));
    }
    let kind = match args.kind {
        KindArg::Same => EigenKind::SameBits,
        KindArg::Different => EigenKind::DifferentBits,
    };
    let mut worst = 0.0f64;
    for l in args.l_min..=l_max {
        worst = worst.max(verify_diagonalization(kind, n, l)?);
    }
    let tol = RESIDUAL_PER_N * n as f64;
    let pass = worst <= tol;
    println!(
        "N={n} kind={kind:?} l={}..={l_max} max residual {worst:.3e} (tolerance {tol:.1e}) {}",
        args.l_min,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}

fn decompose_cmd(args: DecomposeArgs) -> CliResult {
    let seq = read_sequence(&args.input)?;
    let targets = [
        (CoefficientKind::Alpha, args.alpha.as_deref()),
        (CoefficientKind::Beta, args.beta.as_deref()),
    ];
    if targets.iter().all(|(_, p)| p.is_none()) {
        let kind = match args.kind {
            CoeffArg::Alpha => CoefficientKind::Alpha,
            CoeffArg::Beta => CoefficientKind::Beta,
        };
        let mut out = open_output(None)?;
        write_coefficients_csv(&decompose(&seq, kind)?, &mut out)?;
        out.flush()?;
        return Ok(());
    }
    for (kind, path) in targets {
        if let Some(path) = path {
            let coeffs = decompose(&seq, kind)?;
            let mut out = open_output(Some(path))?;
            write_coefficients_csv(&coeffs, &mut out)?;
            out.flush()?;
            println!("{} energy {:.12}", kind.name(), coeffs.energy());
        }
    }
    Ok(())
}

fn parse_offsets(text: &str) -> CliResult<OffsetsMode> {
    if text == "uniform" {
        return Ok(OffsetsMode::Uniform);
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("--offsets: `{s}` is not a gap")))
        })
        .collect::<CliResult<Vec<_>>>()
        .map(OffsetsMode::Fixed)
}

fn sweep_from_flags(args: &SimulateArgs) -> CliResult<SweepSpec> {
    let family = match args.family.ok_or_else(|| missing("family"))? {
        FamilyArg::Weyl => Family::Weyl {
            sigma: args.sigma.unwrap_or(0.0),
        },
        FamilyArg::Gold => Family::Gold,
    };
    if args.k_users.is_empty() {
        return Err(missing("k-users"));
    }
    if args.ebn0_db.is_empty() {
        return Err(missing("ebn0-db"));
    }
    let template = SimConfig {
        n: args.n.ok_or_else(|| missing("n"))?,
        users: args.k_users[0],
        family,
        ebn0_db: args.ebn0_db.clone(),
        symbols_per_user: args.symbols.ok_or_else(|| missing("symbols"))?,
        rng_seed: args.seed.unwrap_or(0),
        phase_mode: match args.phase.unwrap_or_default() {
            PhaseArg::Zero => PhaseMode::Zero,
            PhaseArg::Uniform => PhaseMode::Uniform,
        },
        offsets_mode: match &args.offsets {
            Some(s) => parse_offsets(s)?,
            None => OffsetsMode::Uniform,
        },
    };
    for &k in &args.k_users {
        SimConfig {
            users: k,
            ..template.clone()
        }
        .validate()?;
    }
    Ok(SweepSpec {
        template,
        users: args.k_users.clone(),
    })
}

fn simulate(args: SimulateArgs) -> CliResult {
    let spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
            parse_sim_config(&text)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?
        }
        None => sweep_from_flags(&args)?,
    };
    let total = spec.users.len() * spec.ebn0_db().len();
    let mut done = 0;
    let result = sweep_with_progress(&spec.template, &spec.users, spec.ebn0_db(), |p| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {} N={} K={} Eb/N0={} dB: {} errors / {} bits, BER {:.4e} ± {:.1e}",
            p.family, p.n, p.users, p.ebn0_db, p.errors, p.bits, p.ber, p.ci95
        );
    })?;
    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_ber_csv(&result, &mut out)?,
        Format::Json => write_ber_json(&result, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn bound(args: BoundArgs) -> CliResult {
    let value = snr_lower_bound(args.k, args.n, db_to_linear(args.ebn0_db))?;
    println!("{value:.12}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate(a)?,
        Command::Correlate(a) => correlate(a)?,
        Command::VerifyBasis(a) => {
            return Ok(if verify_basis(a)? {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Decompose(a) => decompose_cmd(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Bound(a) => bound(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
