//! `arrow-sim`: run the benchmark suite, assemble and disassemble programs,
//! and fit timing parameters.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use arrow_core::bench::{check_sew, BenchmarkId, Profile, RunMode, Variant, DEFAULT_SEED};
use arrow_core::isa::{assemble, encode, format_instruction, Program, Sew, VectorConfig};
use arrow_core::report::{emit_report, run_suite, Format, SuiteSpec, DEFAULT_BUDGET};
use arrow_core::timing::{calibrate, Calibration, Grid};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "arrow-sim", version, about = "Dual-lane RISC-V vector co-processor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run benchmarks and report cycles, speedup and energy.
    Run(RunArgs),
    /// Assemble a source file.
    Asm {
        file: PathBuf,
        /// Write the little-endian text image here instead of printing a listing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disassemble a text image.
    Disasm { file: PathBuf },
    /// Fit timing parameters to reference cycle counts.
    Calibrate {
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Starting point; unfitted parameters keep these values.
        #[arg(long)]
        timing: Option<PathBuf>,
        #[arg(long, default_value = "8", value_parser = parse_sew)]
        sew: Sew,
        /// Save the fitted configuration as TOML.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sim,
    Analytic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Scalar,
    Vector,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Benchmark name or `all`; comma separated.
    #[arg(long, default_value = "all", value_delimiter = ',', value_parser = parse_bench)]
    bench: Vec<Selection<BenchmarkId>>,
    /// small, medium, large or `all`; comma separated.
    #[arg(long, default_value = "small", value_delimiter = ',', value_parser = parse_profile)]
    profile: Vec<Selection<Profile>>,
    #[arg(long, value_enum, default_value = "sim")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "both")]
    variant: VariantArg,
    /// Element width in bits.
    #[arg(long, default_value = "8", value_parser = parse_sew)]
    sew: Sew,
    #[arg(long, default_value_t = 2)]
    lanes: u32,
    #[arg(long, default_value_t = 256)]
    vlen: u32,
    #[arg(long, default_value_t = 64)]
    elen: u32,
    #[arg(long)]
    timing: Option<PathBuf>,
    #[arg(long)]
    power: Option<PathBuf>,
    /// Overrides `clock_hz` from the timing file.
    #[arg(long)]
    clock_mhz: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Rows whose estimated cycles exceed this are reported as infeasible.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_cycles: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
enum Selection<T> {
    All,
    One(T),
}

fn parse_bench(s: &str) -> Result<Selection<BenchmarkId>, String> {
    if s == "all" {
        return Ok(Selection::All);
    }
    s.parse().map(Selection::One).map_err(|_| {
        let names: Vec<&str> = BenchmarkId::ALL.iter().map(|b| b.name()).collect();
        format!("expected `all` or one of {}", names.join(", "))
    })
}

fn parse_profile(s: &str) -> Result<Selection<Profile>, String> {
    if s == "all" {
        return Ok(Selection::All);
    }
    s.parse().map(Selection::One).map_err(|_| "expected small, medium, large or all".to_string())
}

fn parse_sew(s: &str) -> Result<Sew, String> {
    s.parse::<u32>().ok().and_then(Sew::from_bits).ok_or_else(|| "expected 8, 16, 32 or 64".to_string())
}

fn expand<T: Copy + PartialEq>(sel: &[Selection<T>], all: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for s in sel {
        let items = match s {
            Selection::All => all.to_vec(),
            Selection::One(t) => vec![*t],
        };
        for t in items {
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let cfg = VectorConfig::new(args.vlen, args.elen, args.lanes)?;
    check_sew(args.sew)?;
    if !cfg.supports(args.sew) {
        bail!("SEW={} exceeds ELEN={}", args.sew.bits(), args.elen);
    }
    let (mut timing, _) = config::load_timing(args.timing.as_deref())?;
    if let Some(mhz) = args.clock_mhz {
        if !(mhz > 0.0 && mhz.is_finite()) {
            bail!("--clock-mhz must be positive");
        }
        timing.clock_hz = mhz * 1e6;
    }
    let (power, _) = config::load_power(args.power.as_deref())?;
    let spec = SuiteSpec {
        benches: expand(&args.bench, &BenchmarkId::ALL),
        profiles: expand(&args.profile, &Profile::ALL),
        variants: match args.variant {
            VariantArg::Scalar => vec![Variant::Scalar],
            VariantArg::Vector => vec![Variant::Vector],
            VariantArg::Both => Variant::BOTH.to_vec(),
        },
        mode: match args.mode {
            ModeArg::Sim => RunMode::Sim,
            ModeArg::Analytic => RunMode::Analytic,
        },
        sew: args.sew,
        seed: args.seed,
        cfg,
        timing,
        power,
        budget: args.max_cycles,
    };
    let results = run_suite(&spec);
    let format = match args.format {
        FormatArg::Table => Format::Table,
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    emit_report(&results, format, args.out.as_deref())?;
    let failed: Vec<String> =
        results.iter().filter(|r| !r.passed()).map(|r| format!("{} {}", r.bench, r.profile)).collect();
    if !failed.is_empty() {
        eprintln!("verification failed: {}", failed.join(", "));
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn listing(program: &Program) -> Result<String> {
    let mut out = String::new();
    let mut labels: Vec<(&usize, &String)> = program.labels.iter().map(|(k, v)| (v, k)).collect();
    labels.sort();
    let mut next = labels.into_iter().peekable();
    for (i, inst) in program.instructions.iter().enumerate() {
        while let Some((_, name)) = next.next_if(|(idx, _)| **idx == i) {
            out += &format!("{name}:\n");
        }
        let word = encode(inst)?;
        out += &format!("{:08x}:  {:08x}  {}\n", program.pc_of(i), word.0, format_instruction(inst));
    }
    Ok(out)
}

fn cmd_asm(file: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let program = assemble(&text)?;
    match out {
        Some(path) => {
            let image = program.to_image()?;
            std::fs::write(path, &image).with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!("{} instructions, {} bytes", program.instructions.len(), image.len());
        }
        None => print!("{}", listing(&program)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_disasm(file: &Path) -> Result<ExitCode> {
    let bytes = std::fs::read(file).with_context(|| format!("cannot read {}", file.display()))?;
    print!("{}", listing(&Program::from_image(&bytes)?)?);
    Ok(ExitCode::SUCCESS)
}

fn print_calibration(fit: &Calibration) {
    let t = &fit.timing;
    println!("mem_latency     {}", t.mem_latency);
    println!("bus_initiation  {}", t.bus_initiation);
    println!("mul_cpi         {}", t.mul_cpi);
    println!("div_cpi         {}", t.div_cpi);
    println!("max rel error   {:.3}", fit.max_rel_error);
    println!();
    println!("{:<10} {:<7} {:<7} {:>10} {:>10} {:>8}", "benchmark", "profile", "variant", "target", "model", "error");
    for r in &fit.residuals {
        let signed = (r.model as f64 - r.target.cycles) / r.target.cycles;
        println!(
            "{:<10} {:<7} {:<7} {:>10.3e} {:>10} {:>+7.1}%",
            r.target.bench.name(),
            r.target.profile.name(),
            r.target.variant.name(),
            r.target.cycles,
            r.model,
            signed * 100.0
        );
    }
}

fn cmd_calibrate(targets: Option<&Path>, timing: Option<&Path>, sew: Sew, write: Option<&Path>) -> Result<ExitCode> {
    check_sew(sew)?;
    let (set, _) = config::load_targets(targets)?;
    let (base, _) = config::load_timing(timing)?;
    let fit = calibrate(&set, &base, &Grid::default(), &VectorConfig::default(), sew)?;
    print_calibration(&fit);
    if let Some(path) = write {
        fit.timing.save(path)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Asm { file, out } => cmd_asm(&file, out.as_deref()),
        Command::Disasm { file } => cmd_disasm(&file),
        Command::Calibrate { targets, timing, sew, write } => {
            cmd_calibrate(targets.as_deref(), timing.as_deref(), sew, write.as_deref())
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
