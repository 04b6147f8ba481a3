use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use dalab::bounds::{crossover, log_exponent_shape, BoundError, Variant};
use dalab::diophfun::P1Target;
use dalab::divclass::{integer_kernel, ClassError, ClassFile};
use dalab::exec::Exec;
use dalab::geomdemo::{DemoInstance, PipelineReport};
use dalab::placeval::Place;
use dalab::scanlab::{
    abc_key, fit_abc, fmt_sig, identity_suite, ingest_triples, scan, FittedConstants, ScanError, ScanParams,
    TripleSource,
};

#[derive(Parser)]
#[command(name = "dalab", version, about = "Truncated-counting Diophantine approximation laboratory")]
struct Cli {
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan abc triples against a bound.
    Scan {
        #[command(subcommand)]
        what: ScanWhat,
    },
    /// Exact identity checks.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Fit the constant of a bound.
    Fit {
        #[command(subcommand)]
        what: FitWhat,
    },
    /// Sweep the proof pipeline of a rational map on projective space.
    Demo(DemoArgs),
    /// Find an integer relation among divisor classes.
    Depsolve {
        #[arg(long)]
        classes: PathBuf,
    },
    /// Least R beyond which the exponent of bound A stays below that of bound B.
    Crossover {
        #[arg(long)]
        a: Variant,
        #[arg(long)]
        b: Variant,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        kappa: f64,
    },
}

#[derive(Subcommand)]
enum ScanWhat {
    Abc(ScanAbcArgs),
}

#[derive(Subcommand)]
enum VerifyWhat {
    Identity {
        #[arg(long)]
        cmax: u64,
    },
}

#[derive(Subcommand)]
enum FitWhat {
    Kappa {
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        cmax: u64,
        #[arg(long, default_value = "1")]
        alpha: P1Target,
        #[arg(long, default_value = "inf")]
        place: Place,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
}

#[derive(Args)]
struct ScanAbcArgs {
    /// Enumerate every triple with c <= N.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    cmax: Option<u64>,
    /// Read `a b c` lines from a file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "thm1bis")]
    variant: Variant,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value = "inf")]
    place: Place,
    #[arg(long, default_value = "1")]
    alpha: P1Target,
    /// CSV of per-triple records.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the fitted constant instead of comparing against it.
    #[arg(long)]
    bless: bool,
    #[arg(long, default_value = "fitted_constants.txt")]
    constants: PathBuf,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    height: i128,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value = "inf")]
    place: Place,
    /// Check the main inequality at this constant; without it only the fit is reported.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// CSV of per-point reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Status {
    Ok,
    Violation,
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn scan_abc(args: ScanAbcArgs, exec: Exec) -> anyhow::Result<Status> {
    let params = ScanParams::new(args.variant, args.eps, args.kappa, args.place, args.alpha.clone())?;
    let source = match (&args.cmax, &args.input) {
        (Some(c), _) => TripleSource::Enumerate(*c),
        (None, Some(path)) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let triples = ingest_triples(BufReader::new(file)).collect::<Result<Vec<_>, _>>()?;
            TripleSource::List(triples)
        }
        (None, None) => bail!("either --cmax or --input is required"),
    };
    let mut out = args.out.as_deref().map(create).transpose()?;
    let summary = scan(&source, &params, exec, out.as_mut().map(|w| w as &mut dyn Write))?;
    if let Some(mut w) = out {
        w.flush()?;
    }
    println!("{summary}");

    let mut status = if summary.identity_failures > 0 { Status::Violation } else { Status::Ok };
    if let (Some(c_max), Some(at)) = (args.cmax, summary.kappa_fit.triple) {
        let mut key = abc_key(args.variant, c_max, args.eps);
        if args.place != Place::Infinity || !matches!(args.alpha, P1Target::One) {
            key = format!("{key} place={} alpha={}", args.place, args.alpha);
        }
        let mut locked = FittedConstants::load(&args.constants)?;
        let value = summary.kappa_fit.value;
        if args.bless {
            locked.set(&key, value, &at.to_string());
            locked.save(&args.constants)?;
            println!("blessed `{key}` = {} in {}", fmt_sig(value), args.constants.display());
        } else if let Some(v) = locked.get(&key) {
            if (v - value).abs() <= 1e-9 * v.abs().max(1.0) {
                println!("locked `{key}` matches");
            } else {
                println!("locked `{key}` = {} differs from fitted {}", fmt_sig(v), fmt_sig(value));
                status = Status::Violation;
            }
        }
    } else if args.bless {
        bail!("--bless needs an enumerated source (--cmax) with a non-vacuous fit");
    }
    Ok(status)
}

fn fit_kappa(variant: Variant, cmax: u64, alpha: P1Target, place: Place, eps: f64, exec: Exec) -> anyhow::Result<Status> {
    let fast = if matches!(alpha, P1Target::One) {
        match fit_abc(cmax, variant, eps, place, exec) {
            Ok(fit) => Some(fit),
            Err(ScanError::Unsupported(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let (triples, vacuous, kappa, at) = match fast {
        Some(f) => (f.triples, f.vacuous, f.kappa.value, f.kappa.triple),
        None => {
            let params = ScanParams::new(variant, eps, 0.0, place, alpha.clone())?;
            let s = scan(&TripleSource::Enumerate(cmax), &params, exec, None)?;
            (s.records, s.vacuous, s.kappa_fit.value, s.kappa_fit.triple)
        }
    };
    println!("variant = {variant}");
    println!("alpha = {alpha}");
    println!("place = {place}");
    println!("epsilon = {}", fmt_sig(eps));
    println!("triples = {triples}");
    println!("vacuous = {vacuous}");
    match at {
        Some(t) => println!("kappa = {} at {t}", fmt_sig(kappa)),
        None => println!("kappa = none (every record vacuous)"),
    }
    Ok(Status::Ok)
}

fn demo(args: DemoArgs, exec: Exec) -> anyhow::Result<Status> {
    let inst: DemoInstance = read(&args.instance)?.parse()?;
    if args.height < 0 {
        bail!("--height must be nonnegative");
    }
    let pipe = inst.pipeline(args.place, args.eps, args.kappa.unwrap_or(0.0))?;
    let mut out = args.out.as_deref().map(create).transpose()?;
    let mut write_err = None;
    let summary = match out.as_mut() {
        Some(w) => {
            writeln!(w, "{}", PipelineReport::CSV_HEADER)?;
            let mut visit = |r: &PipelineReport| {
                if write_err.is_none() {
                    if let Err(e) = writeln!(w, "{}", r.csv_row()) {
                        write_err = Some(e);
                    }
                }
            };
            pipe.sweep_each(args.height, exec, Some(&mut visit))
        }
        None => pipe.sweep_each(args.height, exec, None),
    };
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if let Some(mut w) = out {
        w.flush()?;
    }
    println!("M = {}", inst.m());
    println!("step_a_bound = {}", fmt_sig(inst.step_a_bound()));
    println!("{summary}");
    let a_ok = summary.slack_a.value <= inst.step_a_bound() || summary.reports == 0;
    let main_ok = args.kappa.is_none() || summary.main_violations == 0;
    Ok(if summary.d_failures == 0 && a_ok && main_ok { Status::Ok } else { Status::Violation })
}

fn depsolve(path: &Path) -> anyhow::Result<Status> {
    let file: ClassFile = read(path)?.parse()?;
    println!("rho = {}", file.rho);
    println!("classes = {}", file.vectors.len());
    match integer_kernel(&file.vectors) {
        Ok(rel) => {
            println!("relation = {rel}");
            println!("verified = {}", rel.verify(&file.vectors));
            Ok(Status::Ok)
        }
        Err(ClassError::NoRelation) if file.vectors.len() > file.rho => {
            println!("relation = none, although {} classes exceed rank {}", file.vectors.len(), file.rho);
            Ok(Status::Violation)
        }
        Err(ClassError::NoRelation) => {
            println!("relation = none");
            Ok(Status::Ok)
        }
        Err(e) => Err(e.into()),
    }
}

fn crossover_cmd(a: Variant, b: Variant, eps: f64, kappa: f64) -> anyhow::Result<Status> {
    let fa = log_exponent_shape(a, eps, kappa)?;
    let fb = log_exponent_shape(b, eps, kappa)?;
    match crossover(&fa, &fb) {
        Ok(r0) => println!("R0 = {}", fmt_sig(r0)),
        Err(BoundError::NoCrossoverInRange) => println!("R0 = none below 1e300"),
        Err(e) => return Err(e.into()),
    }
    Ok(Status::Ok)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let exec = Exec::from_jobs(cli.jobs);
    match cli.command {
        Command::Scan { what: ScanWhat::Abc(args) } => scan_abc(args, exec),
        Command::Verify { what: VerifyWhat::Identity { cmax } } => {
            let r = identity_suite(cmax, exec);
            println!("triples = {}", r.triples);
            println!("failures = {}", r.failures);
            if let Some(t) = r.first_failure {
                println!("first_failure = {t}");
            }
            Ok(if r.failures == 0 { Status::Ok } else { Status::Violation })
        }
        Command::Fit { what: FitWhat::Kappa { variant, cmax, alpha, place, eps } } => {
            fit_kappa(variant, cmax, alpha, place, eps, exec)
        }
        Command::Demo(args) => demo(args, exec),
        Command::Depsolve { classes } => depsolve(&classes),
        Command::Crossover { a, b, eps, kappa } => crossover_cmd(a, b, eps, kappa),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
