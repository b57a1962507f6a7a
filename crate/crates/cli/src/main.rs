use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fermilat::io::{potential_from_json, potential_to_json, read_kpath, write_bands, write_poly};
use fermilat::isospectral::UnityClassification;
use fermilat::laurent::kappa;
use fermilat::*;
use serde::Serialize;

const TOOL: &str = "fermilat";
const DEFAULT_CHECK_TOL: f64 = 1e-8;
const DEFAULT_SEPARATION_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = TOOL, version, about = "Spectral computations for discrete periodic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Energy λ₀ as real and imaginary parts.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true, global = true)]
    lambda0: Option<Vec<f64>>,
    /// Tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of random samples for sampled identities.
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,
    /// Output path (file prefix for `separate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Band energies at one quasi-momentum, as CSV.
    Spectrum {
        potential: PathBuf,
        /// Quasi-momentum in cycles, one value per axis.
        #[arg(long, num_args = 1.., allow_hyphen_values = true, required = true)]
        k: Vec<f64>,
    },
    /// Band energies along a k-path file, as CSV.
    Bands {
        potential: PathBuf,
        #[arg(long)]
        kpath: PathBuf,
    },
    /// Coefficients of the Fermi polynomial at λ₀, as JSON lines.
    FermiPoly { potential: PathBuf },
    /// Isospectrality and identity checks; prints a JSON report.
    Check(CheckArgs),
    /// Splits a separable potential into block components.
    Separate {
        potential: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        partition: Vec<usize>,
    },
    /// Sums block components into one potential on the concatenated lattice.
    Combine {
        #[arg(required = true)]
        components: Vec<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("mode").required(true).multiple(false)))]
struct CheckArgs {
    /// Fermi isospectrality of V and Y at λ₀.
    #[arg(long, num_args = 2, value_names = ["V", "Y"], group = "mode")]
    fermi: Option<Vec<PathBuf>>,
    /// Floquet isospectrality of V and Y.
    #[arg(long, num_args = 2, value_names = ["V", "Y"], group = "mode")]
    floquet: Option<Vec<PathBuf>>,
    /// Mean and rational identities for a Fermi isospectral pair.
    #[arg(long, num_args = 2, value_names = ["V", "Y"], group = "mode")]
    identities: Option<Vec<PathBuf>>,
    /// Fourier shell identities for a Fermi isospectral pair.
    #[arg(long, num_args = 2, value_names = ["V", "Y"], group = "mode")]
    shells: Option<Vec<PathBuf>>,
    /// Distance of the Fermi polynomial of V from that of the zero potential.
    #[arg(long, value_name = "V", group = "mode")]
    ambarzumian: Option<PathBuf>,
    /// Rigidity assertions for a separable Y and a transform of it.
    #[arg(long, value_name = "Y", requires = "partition", group = "mode")]
    rigidity: Option<PathBuf>,
    /// Root-of-unity determinant classification for three periods.
    #[arg(long, num_args = 3, value_names = ["Q1", "Q2", "Q3"], group = "mode")]
    classify_roots: Option<Vec<usize>>,
    /// Partition for `--rigidity`, e.g. `1,2`.
    #[arg(long, value_delimiter = ',')]
    partition: Option<Vec<usize>>,
    /// Transform for `--rigidity`: `reflect` or `translate:m1,m2,...`.
    #[arg(long, default_value = "reflect")]
    transform: String,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::EigensolverFailure(_) => 3,
            Error::InterpolationInconsistency(_) | Error::MissingLeadingTerm { .. } => 4,
            Error::NotCoprime(_)
            | Error::DimensionTooSmall { .. }
            | Error::PreconditionFailed(_)
            | Error::LatticeMismatch(..)
            | Error::SamplingExhausted { .. } => 5,
            Error::NotSeparable { .. } => 6,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::parse(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: Config<'a>,
    passed: bool,
    report: T,
}

#[derive(Serialize)]
struct Config<'a> {
    command: &'a Command,
    lambda0: [f64; 2],
    tol: f64,
    seed: u64,
    samples: usize,
}

fn read_potential(path: &Path) -> CliResult<Potential> {
    let text = fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    potential_from_json(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn read_pair(paths: &[PathBuf]) -> CliResult<(Potential, Potential)> {
    Ok((read_potential(&paths[0])?, read_potential(&paths[1])?))
}

/// Writes to `--out` if given, otherwise to stdout.
fn emit(out: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            body(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn warn_if_not_coprime(v: &Potential) {
    if !v.lattice().is_pairwise_coprime() {
        eprintln!("warning: periods {:?} are not pairwise coprime", v.lattice().periods());
    }
}

fn parse_transform(text: &str) -> CliResult<Transform> {
    if text == "reflect" {
        return Ok(Transform::Reflect);
    }
    let shift = text
        .strip_prefix("translate:")
        .ok_or_else(|| Failure::parse(format!("unknown transform {text:?}; expected reflect or translate:m1,m2,...")))?;
    shift
        .split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|e| Failure::parse(format!("transform {text:?}: {e}"))))
        .collect::<CliResult<Vec<_>>>()
        .map(Transform::Translate)
}

fn run(cli: &Cli) -> CliResult<bool> {
    let common = &cli.common;
    let lambda0 = match common.lambda0.as_deref() {
        Some([re, im]) => Complex64::new(*re, *im),
        _ => Complex64::new(0.0, 0.0),
    };
    match &cli.command {
        Command::Spectrum { potential, k } => {
            let v = read_potential(potential)?;
            warn_if_not_coprime(&v);
            let sample = spectrum_at(&v, k)?;
            emit(&common.out, |w| write_bands(&[sample], w))?;
            Ok(true)
        }
        Command::Bands { potential, kpath } => {
            let v = read_potential(potential)?;
            warn_if_not_coprime(&v);
            let file = fs::File::open(kpath).map_err(|e| Failure::parse(format!("{}: {e}", kpath.display())))?;
            let path = read_kpath(BufReader::new(file), v.lattice().dim())?;
            let samples = band_structure(&v, &path)?;
            emit(&common.out, |w| write_bands(&samples, w))?;
            Ok(true)
        }
        Command::FermiPoly { potential } => {
            let v = read_potential(potential)?;
            let poly = fermi_poly(&v, lambda0)?;
            emit(&common.out, |w| write_poly(&poly, w))?;
            report_leading_terms(&v, &poly);
            Ok(true)
        }
        Command::Check(args) => check(cli, args, lambda0),
        Command::Separate { potential, partition } => {
            let v = read_potential(potential)?;
            let p = Partition::new(partition.clone(), v.lattice().dim())?;
            let coeffs = v.dft();
            let tol = common.tol.unwrap_or(DEFAULT_SEPARATION_TOL) * (1.0 + coeffs.max_abs());
            let parts = v.separate(&p, tol)?;
            let back = combine_separable(&parts, v.lattice())?;
            let residual = back
                .values()
                .iter()
                .zip(v.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let prefix = common.out.clone().unwrap_or_else(|| potential.with_extension(""));
            for (j, part) in parts.iter().enumerate() {
                let path = PathBuf::from(format!("{}_part{}.json", prefix.display(), j + 1));
                fs::write(&path, potential_to_json(part) + "\n")?;
                println!("wrote {}", path.display());
            }
            println!("recombination residual {}", fermilat::io::g17(residual));
            Ok(true)
        }
        Command::Combine { components } => {
            let parts = components.iter().map(|p| read_potential(p)).collect::<CliResult<Vec<_>>>()?;
            let periods: Vec<usize> = parts.iter().flat_map(|p| p.lattice().periods().to_vec()).collect();
            let v = combine_separable(&parts, &Lattice::new(periods)?)?;
            emit(&common.out, |w| writeln!(w, "{}", potential_to_json(&v)))?;
            Ok(true)
        }
    }
}

fn report_leading_terms(v: &Potential, poly: &LaurentPoly) {
    let expected = kappa(v.lattice());
    match poly.leading_terms() {
        Ok(terms) => {
            for (axis, ((plus, minus), k)) in terms.iter().zip(&expected).enumerate() {
                let dev = (plus - k).norm().max((minus - k).norm());
                eprintln!(
                    "axis {}: z^+{b} coefficient {}, z^-{b} coefficient {}, expected {k}, deviation {}",
                    axis + 1,
                    fermilat::io::g17(plus.re),
                    fermilat::io::g17(minus.re),
                    fermilat::io::g17(dev),
                    b = poly.bounds()[axis],
                );
            }
        }
        Err(e) => eprintln!(
            "extremal coefficients not resolved above the pruning threshold {}: {e}",
            fermilat::io::g17(poly.prune_threshold())
        ),
    }
}

fn check(cli: &Cli, args: &CheckArgs, lambda0: Complex64) -> CliResult<bool> {
    let common = &cli.common;
    let tol = common.tol.unwrap_or(DEFAULT_CHECK_TOL);
    let config = Config {
        command: &cli.command,
        lambda0: [lambda0.re, lambda0.im],
        tol,
        seed: common.seed,
        samples: common.samples,
    };
    fn print<T: Serialize>(out: &Option<PathBuf>, config: Config<'_>, passed: bool, report: T) -> CliResult<bool> {
        let envelope = Envelope {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            config,
            passed,
            report,
        };
        let text = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::parse(e.to_string()))?;
        emit(out, |w| writeln!(w, "{text}"))?;
        Ok(passed)
    }

    if let Some(paths) = &args.fermi {
        let (v, y) = read_pair(paths)?;
        let r = fermi_isospectral(&v, &y, lambda0, tol)?;
        return print(&common.out, config, r.verdict, r);
    }
    if let Some(paths) = &args.floquet {
        let (v, y) = read_pair(paths)?;
        let r = floquet_isospectral_seeded(&v, &y, tol, common.seed)?;
        return print(&common.out, config, r.verdict, r);
    }
    if let Some(paths) = &args.identities {
        #[derive(Serialize)]
        struct Identities {
            mean: IsospectralityReport,
            rational: IsospectralityReport,
        }
        let (v, y) = read_pair(paths)?;
        let mean = verify_mean_identity(&v, &y, tol)?;
        let rational = verify_g55(&v, &y, common.samples, common.seed, tol)?;
        let passed = mean.verdict && rational.verdict;
        return print(&common.out, config, passed, Identities { mean, rational });
    }
    if let Some(paths) = &args.shells {
        let (v, y) = read_pair(paths)?;
        let r = verify_shell_identities(&v, &y, tol)?;
        return print(&common.out, config, r.verdict, r);
    }
    if let Some(path) = &args.ambarzumian {
        let v = read_potential(path)?;
        let r = ambarzumian_check(&v, lambda0, tol)?;
        return print(&common.out, config, r.verdict, r);
    }
    if let Some(path) = &args.rigidity {
        let y = read_potential(path)?;
        let parts = args.partition.clone().unwrap_or_default();
        let p = Partition::new(parts, y.lattice().dim())?;
        let transform = parse_transform(&args.transform)?;
        let r = rigidity_suite(&y, &p, &transform, lambda0, tol)?;
        return print(&common.out, config, r.passed, r);
    }
    if let Some(q) = &args.classify_roots {
        let r: UnityClassification = classify_unity_determinants(q[0], q[1], q[2], common.tol.unwrap_or(1e-9))?;
        return print(&common.out, config, r.passed(), r);
    }
    unreachable!("clap requires exactly one check mode")
}

fn configure_threads() -> CliResult<()> {
    if let Ok(value) = std::env::var("FERMILAT_THREADS") {
        let n: usize = value
            .parse()
            .map_err(|_| Failure::parse(format!("FERMILAT_THREADS={value:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::parse(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
