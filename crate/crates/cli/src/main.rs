//! `affine-cs`: command-line front end for the operator calculus and its
//! verification suite.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use affine_cs::characters::{finite_character_exact, weyl_kac_character};
use affine_cs::suite::{self, SuiteOptions};
use affine_cs::verify::{self, PREFACTOR};
use affine_cs::{
    AnchoredSeries, Correction, Error, LayerCache, RootDatum, RootSystemSpec, StabilizeConfig, Verdict,
    VerificationReport, VERSION,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "affine-cs", version, about = "Exact Demazure-Lusztig calculus and Casselman-Shalika checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Root system, e.g. A1, A2!, D4 ("!" = untwisted affine).
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Anchor labels <a_i, Lambda>, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    labels: Vec<i64>,
    /// Truncation depth (height below the anchor).
    #[arg(long, global = true, default_value_t = 6)]
    depth: u32,
    /// Empty layers required before a sum counts as stabilized.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    margin: u64,
    /// Depth held back when comparing reflected series.
    #[arg(long, global = true, default_value_t = 3)]
    buffer: u32,
    /// Exact value substituted for v, as "p" or "p/r"; repeatable.
    #[arg(long = "q", global = true, value_parser = parse_rational)]
    q: Vec<BigRational>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for the Weyl layer cache.
    #[arg(long, global = true, env = "AFFINE_CS_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Largest admissible Weyl layer.
    #[arg(long, global = true, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    layer_cap: u64,
    /// Seed for the random monomials in property runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Which form of the correction factor to compare against.
    #[arg(long, global = true, default_value = "direct")]
    correction: Correction,
    /// Report 0 ms everywhere so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive coroots up to the depth, with multiplicities.
    Roots,
    /// Exponents of the finite root system.
    Exponents,
    /// Weyl group layers by length.
    Weyl {
        #[arg(long, default_value_t = 3)]
        max_length: usize,
    },
    /// Weyl-Kac character at the anchor labels.
    Character,
    /// sum_w T_w(e^Lambda), without the q-power prefactor.
    Whittaker,
    #[command(subcommand)]
    Verify(Check),
}

#[derive(Subcommand, Debug)]
enum Check {
    FiniteCs,
    AffineCs,
    Recursion {
        /// w' as a reduced word, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        word: Option<Vec<usize>>,
        #[arg(long)]
        generator: Option<usize>,
        /// Without --word, check every (w', i) with l(w') up to this.
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    Symmetrizer,
    GkLimit {
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<i64>,
    },
    HeckeRelations {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    DenominatorIdentity,
    Polynomiality,
    /// The full acceptance suite.
    All,
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: BigInt = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if den == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    let q = BigRational::new(num, den);
    if q == BigRational::from_integer(0.into()) {
        return Err("q must be nonzero".into());
    }
    Ok(q)
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Core(e) => match e {
                Error::InvalidSpec(_)
                | Error::WrongKind { .. }
                | Error::DimensionMismatch { .. }
                | Error::BadGenerator { .. }
                | Error::NegativeDepth(_)
                | Error::NotDominant(_)
                | Error::LengthCondition { .. }
                | Error::ZeroParameter
                | Error::Parse { .. } => EXIT_USAGE,
                Error::Unstabilized { .. } | Error::LayerCapExceeded { .. } => Verdict::Unstabilized.exit_code() as u8,
                _ => EXIT_INTERNAL,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(s) => f.write_str(s),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

struct Ctx {
    g: Global,
    config: StabilizeConfig,
}

impl Ctx {
    fn spec(&self) -> Result<RootSystemSpec, Failure> {
        let s = self.g.spec.as_deref().ok_or_else(|| Failure::Usage("--spec is required".into()))?;
        Ok(s.parse()?)
    }

    fn datum(&self) -> Result<RootDatum, Failure> {
        Ok(RootDatum::new(self.spec()?))
    }

    fn labels(&self, datum: &RootDatum) -> Result<Vec<i64>, Failure> {
        if self.g.labels.is_empty() {
            return Err(Failure::Usage("--labels is required".into()));
        }
        datum.check_len(&self.g.labels)?;
        Ok(self.g.labels.clone())
    }
}

/// Output of one invocation: a JSON value, its text rendering, and the
/// verdict that decides the exit code.
struct Outcome {
    json: Value,
    text: String,
    verdict: Verdict,
}

impl Outcome {
    fn info(json: Value, text: String) -> Self {
        Self { json, text, verdict: Verdict::Pass }
    }

    /// Diagnostics are printed but never decide the exit code.
    fn reports(mut reports: Vec<VerificationReport>, mut diagnostics: Vec<VerificationReport>, no_timing: bool) -> Self {
        if no_timing {
            reports.iter_mut().chain(diagnostics.iter_mut()).for_each(|r| r.ms = 0);
        }
        let verdict = Verdict::worst(reports.iter().map(|r| r.verdict));
        let mut text: String = reports.iter().map(|r| r.summary() + "\n").collect();
        for d in &diagnostics {
            text.push_str(&format!("diagnostic {}\n", d.summary()));
        }
        let json = match (reports.len(), diagnostics.is_empty()) {
            (1, true) => json!(reports[0]),
            (_, true) => json!(reports),
            _ => json!({ "reports": reports, "diagnostics": diagnostics }),
        };
        Self { json, text, verdict }
    }
}

fn series_text(s: &AnchoredSeries) -> String {
    let mut out = format!(
        "{} anchor {:?} {}\n",
        s.spec(),
        s.anchor(),
        if s.is_exact() { "exact".to_string() } else { format!("depth {}", s.depth()) }
    );
    for (beta, c) in s.terms() {
        out.push_str(&format!("{beta:?}\t{c}\n"));
    }
    out
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let config = StabilizeConfig {
        margin: cli.global.margin as usize,
        layer_cap: cli.global.layer_cap as usize,
        ..StabilizeConfig::default()
    };
    let ctx = Ctx { g: cli.global, config };
    let g = &ctx.g;
    Ok(match cli.command {
        Command::Roots => {
            let datum = ctx.datum()?;
            let roots = datum.positive_coroots_up_to(g.depth);
            let text = roots
                .iter()
                .map(|r| format!("{:?}\t{:?}\tmult {}\n", r.coords, r.kind, r.multiplicity))
                .collect();
            Outcome::info(json!(roots), text)
        }
        Command::Exponents => {
            let datum = ctx.datum()?;
            let e = datum.exponents();
            let text = format!("{:?}\n", e.values);
            Outcome::info(json!({ "spec": datum.spec().to_string(), "exponents": e.values }), text)
        }
        Command::Weyl { max_length } => {
            let datum = ctx.datum()?;
            let cap = config.layer_cap;
            let layers = match &g.cache_dir {
                Some(dir) => LayerCache::new(dir).load_or_compute(&datum, max_length, cap)?,
                None => affine_cs::weyl::enumerate_layers(&datum, max_length, cap)?,
            };
            let mut text = String::new();
            for (k, layer) in layers.iter().enumerate() {
                text.push_str(&format!("length {k}: {} elements\n", layer.len()));
                for w in layer {
                    text.push_str(&format!("  {:?}\n", w.word));
                }
            }
            let sizes: Vec<usize> = layers.iter().map(Vec::len).collect();
            Outcome::info(json!({ "spec": datum.spec().to_string(), "sizes": sizes, "layers": layers }), text)
        }
        Command::Character => {
            let datum = ctx.datum()?;
            let labels = ctx.labels(&datum)?;
            let chi = if datum.is_affine() {
                weyl_kac_character(&datum, &labels, g.depth)?
            } else {
                finite_character_exact(&datum, &labels)?
            };
            Outcome::info(chi.to_json(), series_text(&chi))
        }
        Command::Whittaker => {
            let datum = ctx.datum()?;
            let labels = ctx.labels(&datum)?;
            let depth = datum.is_affine().then_some(g.depth);
            let st = verify::whittaker_normalized(&datum, &labels, depth, config)?;
            let mut json = st.series.to_json();
            json["prefactor"] = json!(PREFACTOR);
            json["achieved_L"] = json!(st.achieved_length);
            json["stabilized"] = json!(st.stabilized);
            let text = format!(
                "prefactor {PREFACTOR} omitted; achieved L={} stabilized={}\n{}",
                st.achieved_length,
                st.stabilized,
                series_text(&st.series)
            );
            let verdict = if st.stabilized { Verdict::Pass } else { Verdict::Unstabilized };
            Outcome { json, text, verdict }
        }
        Command::Verify(check) => verify_cmd(&ctx, check)?,
    })
}

fn verify_cmd(ctx: &Ctx, check: Check) -> Result<Outcome, Failure> {
    let g = &ctx.g;
    let cfg = ctx.config;
    if let Check::All = check {
        let results = suite::all(&SuiteOptions { config: cfg, seed: g.seed })?;
        let mut results = results;
        if g.no_timing {
            for r in &mut results {
                r.reports.iter_mut().chain(r.diagnostics.iter_mut()).for_each(|x| x.ms = 0);
            }
        }
        let verdict = Verdict::worst(results.iter().map(|r| r.verdict));
        let mut text = String::new();
        for r in &results {
            text.push_str(&r.line());
            text.push('\n');
            for d in &r.diagnostics {
                text.push_str(&format!("    diagnostic {}\n", d.summary()));
            }
        }
        return Ok(Outcome { json: json!(results), text, verdict });
    }
    let datum = ctx.datum()?;
    let mut diagnostics = Vec::new();
    let reports = match check {
        Check::FiniteCs => vec![verify::verify_finite_cs(&datum, &ctx.labels(&datum)?)?],
        Check::AffineCs => {
            let labels = ctx.labels(&datum)?;
            vec![verify::verify_affine_cs(&datum, &labels, g.depth, cfg, g.correction, &g.q)?]
        }
        Check::Recursion { word, generator, max_length } => {
            let labels = ctx.labels(&datum)?;
            match (word, generator) {
                (word, Some(i)) => vec![verify::verify_recursion(&datum, &labels, &word.unwrap_or_default(), i)?],
                (Some(_), None) => return Err(Failure::Usage("--word needs --generator".into())),
                (None, None) => vec![verify::verify_recursion_upto(&datum, &labels, max_length)?],
            }
        }
        Check::Symmetrizer => {
            let labels = ctx.labels(&datum)?;
            let mut reports = verify::verify_symmetrizer_properties(&datum, &labels, g.depth, g.buffer, cfg)?;
            diagnostics = reports.split_off(4);
            reports
        }
        Check::GkLimit { nu } => vec![verify::verify_gk_limit(&datum, &nu, g.depth, cfg, g.correction)?],
        Check::HeckeRelations { count } => vec![verify::verify_hecke_relations(&datum, g.seed, count)?],
        Check::DenominatorIdentity => vec![verify::verify_denominator_identity(&datum, g.depth)?],
        Check::Polynomiality => {
            let labels = ctx.labels(&datum)?;
            vec![verify::verify_polynomiality(&datum, &labels, g.depth, cfg)?]
        }
        Check::All => unreachable!(),
    };
    Ok(Outcome::reports(reports, diagnostics, g.no_timing))
}

fn header(cli: &Cli) -> String {
    let g = &cli.global;
    let (spec, hash) = match g.spec.as_deref().map(str::parse::<RootSystemSpec>) {
        Some(Ok(s)) => (s.to_string(), s.spec_hash()),
        _ => ("-".to_string(), "-".to_string()),
    };
    format!("# affine-cs {VERSION} spec={spec} spec_hash={hash} seed={}", g.seed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    eprintln!("{}", header(&cli));
    let format = cli.global.format;
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let written = match format {
                Format::Json => serde_json::to_string_pretty(&out.json)
                    .map_err(std::io::Error::from)
                    .and_then(|s| writeln!(stdout, "{s}")),
                Format::Text => write!(stdout, "{}", out.text),
            };
            if written.is_err() {
                return ExitCode::from(EXIT_INTERNAL);
            }
            ExitCode::from(out.verdict.exit_code() as u8)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
