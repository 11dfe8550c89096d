//! `rolewicz` — command-line runner for exact weighted backward shift
//! experiments with machine-readable (JSON/CSV) output.
//!
//! Exit codes: 0 all checks passed, 1 usage or parse error, 2 a
//! mathematical check failed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use serde::Serialize;
use serde_json::value::RawValue;

use rolewicz::exactnum::{parse_rational, rational_to_string, Rational, Scalar};
use rolewicz::hyperengine::{
    build_schedule_from_stream, orbit_approach_error, partial_hypercyclic_vector,
};
use rolewicz::periodic::{make_periodic, periodicity_holds_at, verified_prefix};
use rolewicz::spectral::{
    eigen_membership, eigen_residual_check, eigenspace_dimension_check, eigenvector,
    spectrum_probe,
};
use rolewicz::{Field, FiniteSequence, ShiftOperator, Space};

const SCHEMA_HEADER: &str = "# rolewicz-schema v1\n";
const DEFAULT_DEPTH_LIMIT: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "rolewicz",
    version,
    about = "Exact verification toolkit for unbounded weighted backward shifts on lp and c0"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply A, B or their powers; check the right-inverse law; find an
    /// unboundedness witness
    Operator(OperatorArgs),
    /// Build the dense-target schedule, the partial hypercyclic vector
    /// and the orbit-approach error table
    Hypercyclic(HypercyclicArgs),
    /// Construct a periodic point and verify A^N x = x exactly
    Periodic(PeriodicArgs),
    /// Construct the eigenvector of a scalar and verify the eigen
    /// identities
    Eigen(EigenArgs),
    /// Run the eigen suite over a grid of complex-rational scalars
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Lp,
    C0,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Operator weight w as scalar text (must satisfy |w| > 1)
    #[arg(long, allow_hyphen_values = true)]
    w: String,
    /// Ground field; inferred from the supplied scalars when omitted
    #[arg(long, value_enum)]
    field: Option<FieldArg>,
    /// Ambient space
    #[arg(long, value_enum, default_value_t = SpaceArg::Lp)]
    space: SpaceArg,
    /// Exponent p of lp (rational text, p >= 1)
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    p: String,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append decimal projection columns to CSV output
    #[arg(long)]
    approx: bool,
}

#[derive(Args)]
struct OperatorArgs {
    #[command(flatten)]
    common: Common,
    /// Apply the named operator (A or B) to --x
    #[arg(long)]
    apply: Option<String>,
    /// Power for --apply and --check
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Input sequence as comma-separated scalar texts, e.g. "1,0,3"
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Verification to run (right-inverse)
    #[arg(long)]
    check: Option<String>,
    /// Find the least k with |w|^k > BOUND
    #[arg(long, value_name = "BOUND", allow_hyphen_values = true)]
    unbounded_above: Option<String>,
}

#[derive(Args)]
struct HypercyclicArgs {
    #[command(flatten)]
    common: Common,
    /// Number of canonical targets to schedule
    #[arg(long)]
    terms: u64,
}

#[derive(Args)]
struct PeriodicArgs {
    #[command(flatten)]
    common: Common,
    /// Seed entries as comma-separated scalar texts
    #[arg(long, allow_hyphen_values = true)]
    seed: String,
    /// Period N (>= seed length; the seed is zero-padded)
    #[arg(long)]
    period: Option<u64>,
    /// Verify the identity (A^N x)_k = x_k for all k up to this depth
    #[arg(long, default_value_t = 50)]
    verify_upto: u64,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    common: Common,
    /// The eigenvalue candidate as scalar text
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    /// Number of eigenvector entries to report
    #[arg(long, default_value_t = 16)]
    entries: u64,
    /// Depth of the residual / decay / dimension checks
    #[arg(long, default_value_t = 64)]
    check_upto: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    /// Real-part range "a..b"
    #[arg(long, value_name = "A..B", allow_hyphen_values = true)]
    grid_re: String,
    /// Imaginary-part range "a..b"
    #[arg(long, value_name = "A..B", allow_hyphen_values = true)]
    grid_im: String,
    /// Grid step (rational text, > 0)
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    step: String,
    /// Depth of the per-lambda checks
    #[arg(long = "K", default_value_t = 64)]
    k: u64,
}

/// Usage-level failure; maps to exit code 1.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Outcome {
    output: String,
    ok: bool,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                0
            } else {
                1
            };
        }
    };
    let (out_path, result) = match cli.cmd {
        Cmd::Operator(a) => (a.common.out.clone(), run_operator(&a)),
        Cmd::Hypercyclic(a) => (a.common.out.clone(), run_hypercyclic(&a)),
        Cmd::Periodic(a) => (a.common.out.clone(), run_periodic(&a)),
        Cmd::Eigen(a) => (a.common.out.clone(), run_eigen(&a)),
        Cmd::Spectrum(a) => (a.common.out.clone(), run_spectrum(&a)),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(&out_path, &outcome.output) {
                eprintln!("error: {e}");
                return 1;
            }
            if outcome.ok {
                0
            } else {
                2
            }
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn emit(out_path: &Option<PathBuf>, output: &str) -> std::io::Result<()> {
    match out_path {
        Some(path) => std::fs::write(path, format!("{output}\n")),
        None => {
            println!("{output}");
            Ok(())
        }
    }
}

fn depth_limit() -> Result<u64, Usage> {
    match std::env::var("ROLEWICZ_DEPTH_LIMIT") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| Usage(format!("invalid ROLEWICZ_DEPTH_LIMIT {v:?}"))),
        Err(_) => Ok(DEFAULT_DEPTH_LIMIT),
    }
}

fn check_depth(name: &str, value: u64) -> Result<(), Usage> {
    let limit = depth_limit()?;
    if value > limit {
        return Err(Usage(format!(
            "{name} = {value} exceeds the depth limit {limit} (set ROLEWICZ_DEPTH_LIMIT to raise it)"
        )));
    }
    Ok(())
}

/// Field resolution: explicit flag wins (and is validated); otherwise
/// complex as soon as any supplied scalar has an imaginary part.
fn resolve_field(explicit: Option<FieldArg>, scalars: &[&Scalar]) -> Result<Field, Usage> {
    let needs_complex = scalars.iter().any(|s| !s.is_real_valued());
    match explicit {
        Some(FieldArg::Real) => {
            if needs_complex {
                return Err(Usage(
                    "field mismatch: a supplied scalar is complex but --field real was given"
                        .to_string(),
                ));
            }
            Ok(Field::Real)
        }
        Some(FieldArg::Complex) => Ok(Field::Complex),
        None => Ok(if needs_complex {
            Field::Complex
        } else {
            Field::Real
        }),
    }
}

fn build_space(common: &Common) -> Result<Space, Usage> {
    match common.space {
        SpaceArg::C0 => Ok(Space::c0()),
        SpaceArg::Lp => {
            let p = parse_rational(&common.p)?;
            Ok(Space::lp(p)?)
        }
    }
}

fn build_operator(common: &Common, extra_scalars: &[&Scalar]) -> Result<ShiftOperator, Usage> {
    let w = Scalar::parse(&common.w)?;
    let mut scalars: Vec<&Scalar> = vec![&w];
    scalars.extend_from_slice(extra_scalars);
    let field = resolve_field(common.field, &scalars)?;
    let space = build_space(common)?;
    Ok(ShiftOperator::new(w, space, field)?)
}

fn approx_rational(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn approx_scalar(s: &Scalar) -> String {
    if s.is_real_valued() {
        format!("{}", approx_rational(&s.re()))
    } else {
        format!("{}{:+}i", approx_rational(&s.re()), approx_rational(&s.im()))
    }
}

fn run_operator(args: &OperatorArgs) -> Result<Outcome, Usage> {
    let actions = [
        args.apply.is_some(),
        args.check.is_some(),
        args.unbounded_above.is_some(),
    ];
    if actions.iter().filter(|&&b| b).count() != 1 {
        return Err(Usage(
            "operator needs exactly one of --apply, --check, --unbounded-above".to_string(),
        ));
    }
    check_depth("--n", args.n)?;

    if let Some(bound_text) = &args.unbounded_above {
        let op = build_operator(&args.common, &[])?;
        let bound = parse_rational(bound_text)?;
        let (k, ratio_sq) = op.unboundedness_witness(&bound)?;
        #[derive(Serialize)]
        struct Repr {
            bound: String,
            k: u64,
            ratio_sq: String,
        }
        let output = match args.common.format {
            FormatArg::Json => serde_json::to_string(&Repr {
                bound: rational_to_string(&bound),
                k,
                ratio_sq: rational_to_string(&ratio_sq),
            })
            .expect("serializable"),
            FormatArg::Csv => {
                let mut out = format!("{SCHEMA_HEADER}k,ratio_sq");
                if args.common.approx {
                    out.push_str(",ratio_sq_approx");
                }
                out.push('\n');
                out.push_str(&format!("{k},{}", rational_to_string(&ratio_sq)));
                if args.common.approx {
                    out.push_str(&format!(",{}", approx_rational(&ratio_sq)));
                }
                out
            }
        };
        return Ok(Outcome { output, ok: true });
    }

    let x_text = args
        .x
        .as_ref()
        .ok_or_else(|| Usage("--x is required for this operator action".to_string()))?;
    let x = FiniteSequence::parse_list(x_text)?;
    let scalars: Vec<&Scalar> = x.entries().iter().collect();
    let op = build_operator(&args.common, &scalars)?;

    if let Some(which) = &args.apply {
        let image = match which.to_ascii_uppercase().as_str() {
            "A" => op.apply_a_pow(args.n, &x),
            "B" => op.apply_b_pow(args.n, &x),
            other => return Err(Usage(format!("unknown operator {other:?} (use A or B)"))),
        };
        let output = match args.common.format {
            FormatArg::Json => image.to_json(),
            FormatArg::Csv => {
                let mut out = format!("{SCHEMA_HEADER}k,value");
                if args.common.approx {
                    out.push_str(",value_approx");
                }
                out.push('\n');
                for (i, s) in image.entries().iter().enumerate() {
                    out.push_str(&format!("{},{}", i + 1, s));
                    if args.common.approx {
                        out.push_str(&format!(",{}", approx_scalar(s)));
                    }
                    out.push('\n');
                }
                out.pop();
                out
            }
        };
        return Ok(Outcome { output, ok: true });
    }

    let check = args.check.as_deref().unwrap_or_default();
    if check != "right-inverse" {
        return Err(Usage(format!(
            "unknown check {check:?} (supported: right-inverse)"
        )));
    }
    let ok = op.right_inverse_check(args.n, &x);
    #[derive(Serialize)]
    struct Repr {
        check: &'static str,
        n: u64,
        x: Vec<String>,
        ok: bool,
    }
    let output = match args.common.format {
        FormatArg::Json => serde_json::to_string(&Repr {
            check: "right-inverse",
            n: args.n,
            x: x.entry_strings(),
            ok,
        })
        .expect("serializable"),
        FormatArg::Csv => format!("{SCHEMA_HEADER}n,ok\n{},{ok}", args.n),
    };
    Ok(Outcome { output, ok })
}

fn run_hypercyclic(args: &HypercyclicArgs) -> Result<Outcome, Usage> {
    check_depth("--terms", args.terms)?;
    let op = build_operator(&args.common, &[])?;
    let schedule = build_schedule_from_stream(&op, args.terms)?;
    let partial = partial_hypercyclic_vector(&op, &schedule)?;

    #[derive(Serialize)]
    struct OrbitRow {
        k: u64,
        n: u64,
        err_hi: String,
        paper_bound: String,
        ok: bool,
    }
    let mut rows = Vec::new();
    let mut all_ok = true;
    for k in 1..=schedule.depth() {
        let oe = orbit_approach_error(&op, &partial, k)?;
        all_ok &= oe.within_bound;
        rows.push(OrbitRow {
            k,
            n: oe.n,
            err_hi: rational_to_string(&oe.err.hi),
            paper_bound: rational_to_string(&oe.paper_bound),
            ok: oe.within_bound,
        });
    }

    let output = match args.common.format {
        FormatArg::Json => {
            #[derive(Serialize)]
            struct Repr {
                schedule: Box<RawValue>,
                partial_sum: Vec<String>,
                tail_bound_hi: String,
                orbit: Vec<OrbitRow>,
            }
            serde_json::to_string(&Repr {
                schedule: RawValue::from_string(schedule.to_json()).expect("valid json"),
                partial_sum: partial.x.entry_strings(),
                tail_bound_hi: rational_to_string(&partial.tail_bound_hi),
                orbit: rows,
            })
            .expect("serializable")
        }
        FormatArg::Csv => {
            let mut out = format!("{SCHEMA_HEADER}k,n,err_hi,paper_bound,ok");
            if args.common.approx {
                out.push_str(",err_hi_approx,paper_bound_approx");
            }
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}",
                    r.k, r.n, r.err_hi, r.paper_bound, r.ok
                ));
                if args.common.approx {
                    let eh = approx_rational(&parse_rational(&r.err_hi).expect("round trip"));
                    let pb =
                        approx_rational(&parse_rational(&r.paper_bound).expect("round trip"));
                    out.push_str(&format!(",{eh},{pb}"));
                }
                out.push('\n');
            }
            out.pop();
            out
        }
    };
    Ok(Outcome {
        output,
        ok: all_ok,
    })
}

fn run_periodic(args: &PeriodicArgs) -> Result<Outcome, Usage> {
    check_depth("--verify-upto", args.verify_upto)?;
    let seed_raw = FiniteSequence::parse_list(&args.seed)?;
    let mut seed: Vec<Scalar> = args
        .seed
        .split(',')
        .map(Scalar::parse)
        .collect::<Result<_, _>>()?;
    let period = args.period.unwrap_or(seed.len() as u64);
    check_depth("--period", period)?;
    if period < seed_raw.support() {
        return Err(Usage(format!(
            "--period {period} is shorter than the seed support {}",
            seed_raw.support()
        )));
    }
    seed.resize(period as usize, Scalar::zero());
    let scalars: Vec<&Scalar> = seed.iter().collect();
    let op = build_operator(&args.common, &scalars)?;
    let mut point = make_periodic(&op, seed)?;

    // hidden test hook: scale one entry to break the identity on purpose
    if let Ok(v) = std::env::var("ROLEWICZ_TEST_MUTATE_ENTRY") {
        let idx: u64 = v
            .parse()
            .map_err(|_| Usage(format!("invalid ROLEWICZ_TEST_MUTATE_ENTRY {v:?}")))?;
        point = point.with_entry_scaled(idx, Scalar::from_int(2));
    }

    let verified = verified_prefix(&point, args.verify_upto);
    let ok = verified == args.verify_upto;
    let output = match args.common.format {
        FormatArg::Json => point.to_json(args.verify_upto, verified),
        FormatArg::Csv => {
            let mut out = format!("{SCHEMA_HEADER}k,entry,identity_ok");
            if args.common.approx {
                out.push_str(",entry_approx");
            }
            out.push('\n');
            for k in 1..=args.verify_upto {
                let e = point.entry(k);
                out.push_str(&format!("{k},{e},{}", periodicity_holds_at(&point, k)));
                if args.common.approx {
                    out.push_str(&format!(",{}", approx_scalar(&e)));
                }
                out.push('\n');
            }
            out.pop();
            out
        }
    };
    Ok(Outcome { output, ok })
}

fn run_eigen(args: &EigenArgs) -> Result<Outcome, Usage> {
    check_depth("--entries", args.entries)?;
    check_depth("--check-upto", args.check_upto)?;
    let lambda = Scalar::parse(&args.lambda)?;
    let op = build_operator(&args.common, &[&lambda])?;
    let ep = eigenvector(&op, lambda.clone())?;
    let residual_ok = eigen_residual_check(&ep, args.check_upto);
    let membership = eigen_membership(&ep, op.space(), args.check_upto);
    let dim_ok = eigenspace_dimension_check(&op, &lambda, args.check_upto)?;
    let ok = residual_ok && membership.certified && dim_ok;

    let output = match args.common.format {
        FormatArg::Json => {
            #[derive(Serialize)]
            struct Repr {
                lambda: String,
                k0: u64,
                residual_ok: bool,
                dim_ok: bool,
                membership_certified: bool,
                checked_upto: u64,
                entries: Vec<String>,
            }
            serde_json::to_string(&Repr {
                lambda: lambda.to_string(),
                k0: membership.k0,
                residual_ok,
                dim_ok,
                membership_certified: membership.certified,
                checked_upto: args.check_upto,
                entries: ep
                    .prefix(args.entries)
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            })
            .expect("serializable")
        }
        FormatArg::Csv => {
            let mut out = format!("{SCHEMA_HEADER}k,term");
            if args.common.approx {
                out.push_str(",term_approx");
            }
            out.push('\n');
            for k in 1..=args.entries {
                let t = ep.term(k);
                out.push_str(&format!("{k},{t}"));
                if args.common.approx {
                    out.push_str(&format!(",{}", approx_scalar(&t)));
                }
                out.push('\n');
            }
            out.pop();
            out
        }
    };
    Ok(Outcome { output, ok })
}

fn parse_range(text: &str) -> Result<(Rational, Rational), Usage> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| Usage(format!("invalid range {text:?} (expected \"a..b\")")))?;
    let lo = parse_rational(a)?;
    let hi = parse_rational(b)?;
    if lo > hi {
        return Err(Usage(format!("empty range {text:?}")));
    }
    Ok((lo, hi))
}

fn run_spectrum(args: &SpectrumArgs) -> Result<Outcome, Usage> {
    check_depth("--K", args.k)?;
    let (re_lo, re_hi) = parse_range(&args.grid_re)?;
    let (im_lo, im_hi) = parse_range(&args.grid_im)?;
    let step = parse_rational(&args.step)?;
    if step <= Rational::from_integer(0.into()) {
        return Err(Usage("--step must be positive".to_string()));
    }

    let w = Scalar::parse(&args.common.w)?;
    // the spectral statement lives over the complex field; an explicit
    // --field real still runs, with mismatches recorded per cell
    let field = match args.common.field {
        Some(FieldArg::Real) => {
            if !w.is_real_valued() {
                return Err(Usage(
                    "field mismatch: complex weight with --field real".to_string(),
                ));
            }
            Field::Real
        }
        _ => Field::Complex,
    };
    let op = ShiftOperator::new(w, build_space(&args.common)?, field)?;

    let mut grid = Vec::new();
    let mut re = re_lo;
    while re <= re_hi {
        let mut im = im_lo.clone();
        while im <= im_hi {
            grid.push(Scalar::complex(re.clone(), im.clone()));
            im += &step;
        }
        re += &step;
    }
    check_depth("grid size", grid.len() as u64)?;

    let report = spectrum_probe(&op, &grid, args.k);
    let ok = report.all_pass();
    let output = match args.common.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Csv => {
            if args.common.approx {
                let mut out = format!(
                    "{SCHEMA_HEADER}lambda_re,lambda_im,k0,pass,lambda_re_approx,lambda_im_approx\n"
                );
                for c in &report.cells {
                    let lam = Scalar::parse(&c.lambda).expect("round trip");
                    let k0 = c.membership_k0.map_or(String::new(), |v| v.to_string());
                    out.push_str(&format!(
                        "{},{},{k0},{},{},{}\n",
                        rational_to_string(&lam.re()),
                        rational_to_string(&lam.im()),
                        c.pass,
                        approx_rational(&lam.re()),
                        approx_rational(&lam.im()),
                    ));
                }
                out.pop();
                out
            } else {
                let mut out = report.to_csv();
                out.pop();
                out
            }
        }
    };
    Ok(Outcome { output, ok })
}
