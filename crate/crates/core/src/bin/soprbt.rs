//! Command-line front end: `generate`, `reduce`, `analyze`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use soprbt::analysis;
use soprbt::io::report::InputSummary;
use soprbt::io::system::TripleChainMeta;
use soprbt::io::{self, MassKind, Report, SystemMeta};
use soprbt::pipeline::{self, PipelineConfig};
use soprbt::so_model::{generate_triple_chain, FrequencyGrid, TripleChainParams};
use soprbt::{Error, Result};

#[derive(Parser)]
#[command(
    name = "soprbt",
    version,
    about = "Passivity-preserving second-order model reduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the triple-chain benchmark as a system directory.
    Generate(GenerateArgs),
    /// Reduce a system directory and write the reduced model and report.
    Reduce(ReduceArgs),
    /// Compare two system directories on a frequency grid.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    n_per_row: usize,
    #[arg(long, default_value_t = 50.0)]
    k0: f64,
    #[arg(long, default_value_t = 10.0)]
    k1: f64,
    #[arg(long, default_value_t = 20.0)]
    k2: f64,
    #[arg(long, default_value_t = 1.0)]
    k3: f64,
    #[arg(long, default_value_t = 1.0)]
    m0: f64,
    #[arg(long, default_value_t = 1.0)]
    m1: f64,
    #[arg(long, default_value_t = 2.0)]
    m2: f64,
    #[arg(long, default_value_t = 3.0)]
    m3: f64,
    #[arg(long, default_value_t = 2e-3)]
    alpha: f64,
    #[arg(long, default_value_t = 2e-3)]
    beta: f64,
    /// Viscosity of the three extra dampers.
    #[arg(long, default_value_t = 5.0)]
    viscosity: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-2)]
    omega_lo: f64,
    #[arg(long, default_value_t = 1e2)]
    omega_hi: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<FrequencyGrid> {
        if !(self.omega_lo > 0.0 && self.omega_lo < self.omega_hi && self.omega_hi.is_finite()) {
            return Err(Error::Validation(format!(
                "frequency range needs 0 < lo < hi, got [{}, {}]",
                self.omega_lo, self.omega_hi
            )));
        }
        if self.points < 2 {
            return Err(Error::Validation(
                "frequency grid needs at least 2 points".into(),
            ));
        }
        Ok(FrequencyGrid::log(
            self.omega_lo,
            self.omega_hi,
            self.points,
        ))
    }
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Characteristic values kept per sign. Omit to drop only zero values.
    #[arg(long)]
    target_r: Option<usize>,
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Distance from 1 within which a characteristic value counts as 1.
    #[arg(long)]
    tol_one: Option<f64>,
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    path_tol: Option<f64>,
    #[arg(long)]
    assembly_tol: Option<f64>,
    /// Largest accepted condition number of the typed eigenvector basis.
    #[arg(long)]
    semi_simple_cond: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Include the logged state transforms in report.json.
    #[arg(long)]
    emit_transforms: bool,
    /// Include stage timings in report.json (makes it nondeterministic).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    reduced: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let params = TripleChainParams {
        k0: a.k0,
        k1: a.k1,
        k2: a.k2,
        k3: a.k3,
        m0: a.m0,
        m1: a.m1,
        m2: a.m2,
        m3: a.m3,
        alpha: a.alpha,
        beta: a.beta,
        v: a.viscosity,
    };
    let sys = generate_triple_chain(a.n_per_row, &params)?;
    let meta = SystemMeta {
        n: sys.n(),
        m: sys.inputs(),
        mass: MassKind::Matrix,
        triple_chain: Some(TripleChainMeta {
            n_per_row: a.n_per_row,
            params,
        }),
        reduced_from: None,
    };
    io::write_system(&a.out, &sys, &meta)?;
    println!("wrote {} ({} positions)", a.out.display(), sys.n());
    Ok(())
}

fn positive(name: &str, v: Option<f64>, slot: &mut f64) -> Result<()> {
    if let Some(v) = v {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Validation(format!(
                "{name} must be positive, got {v}"
            )));
        }
        *slot = v;
    }
    Ok(())
}

fn config(a: &ReduceArgs) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig {
        target_r: a.target_r,
        ..Default::default()
    };
    if a.target_r == Some(0) {
        return Err(Error::Validation("target_r must be at least 1".into()));
    }
    positive("cluster_tol", a.cluster_tol, &mut cfg.cluster_tol)?;
    positive("tol_one", a.tol_one, &mut cfg.recovery.tol_one)?;
    positive("rank_tol", a.rank_tol, &mut cfg.kyp.rank_tol)?;
    positive("path_tol", a.path_tol, &mut cfg.kyp.path_tol)?;
    positive(
        "assembly_tol",
        a.assembly_tol,
        &mut cfg.recovery.assembly_tol,
    )?;
    positive(
        "semi_simple_cond",
        a.semi_simple_cond,
        &mut cfg.recovery.sign.max_cond,
    )?;
    Ok(cfg)
}

fn reduce(a: &ReduceArgs) -> Result<()> {
    let cfg = config(a)?;
    let omegas = a.grid.grid()?.omegas();
    let loaded = io::read_system(&a.input)?;
    let sys = &loaded.sys;
    let validation = sys.validation_report(&cfg.validation)?;
    let out = pipeline::reduce_second_order(sys, &cfg)?;
    let checks = pipeline::verify(sys, &out, &cfg, &omegas)?;
    let input = InputSummary {
        source: Some(a.input.display().to_string()),
        n: sys.n(),
        m: sys.inputs(),
        asymmetry: loaded.asymmetry,
    };
    let mut report = Report::new(input, &cfg, validation, &out, checks);
    if a.timings {
        report.timings = Some(out.timings.clone());
    }
    if a.emit_transforms {
        report.transforms = Some(out.recovery.transforms.clone());
    }
    io::write_reduced(
        &a.out,
        &out.recovery.result,
        Some(&a.input.display().to_string()),
    )?;
    analysis::write_spectrum_csv(&a.out.join("spectrum.csv"), &out.spectrum)?;
    io::report::write(&a.out.join("report.json"), &report)?;
    let failed: Vec<String> = report
        .verification
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "{} = {:.3e} (threshold {:.1e})",
                c.name, c.value, c.threshold
            )
        })
        .collect();
    if !failed.is_empty() {
        return Err(Error::Assembly(format!(
            "verification failed: {}",
            failed.join("; ")
        )));
    }
    println!(
        "reduced {} -> {} positions (kept r = {}), error bound {:.6e}, negative damping eigenvalues {}",
        sys.n(),
        out.recovery.final_r,
        out.plan.r,
        out.plan.error_bound,
        report.reduced_model.d_negative_count
    );
    Ok(())
}

fn bound_from_report(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join("report.json")).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value.get("error_bound")?.as_f64()
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let omegas = a.grid.grid()?.omegas();
    let orig = io::read_system(&a.original)?;
    let red = io::read_system(&a.reduced)?;
    let rows = analysis::compare(&orig.sys, &red.sys, &omegas)?;
    let summary = analysis::summarize(&rows, bound_from_report(&a.reduced));
    std::fs::create_dir_all(&a.out)?;
    analysis::write_csv(&a.out.join("frequency.csv"), &rows)?;
    io::report::write(&a.out.join("summary.json"), &summary)?;
    println!(
        "max abs error {:.6e} at {:.4e} rad/s, max rel error {:.6e} at {:.4e} rad/s",
        summary.max_abs_error, summary.omega_max_abs, summary.max_rel_error, summary.omega_max_rel
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Reduce(a) => reduce(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            if let Error::Planning { feasible, .. } = &e {
                if !feasible.is_empty() {
                    eprintln!("feasible orders nearby: {feasible:?}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
