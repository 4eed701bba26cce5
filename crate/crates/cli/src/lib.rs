//! `envwit` command line: entanglement certification of a density matrix and
//! the scan / sweep experiments.
//!
//! Exit codes: 0 success (or no entanglement detected), 1 input or I/O
//! error, 2 entanglement certified.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use envwit::ensembles::min_pt_eigenvalue;
use envwit::experiments::{
    self, amplitude_scan, bell_mixture_scan, default_workers, fig3_sweep, fig4_theta_sweep,
    linspace, table1_qutrit, CsvRow, Ensemble, Sidecar, SweepConfig,
};
use envwit::matcore::Tolerance;
use envwit::measure::{measurement_plan, MeasurementPlan, PlanKind};
use envwit::pncp::{reduction_map, theta_params};
use envwit::witness::{
    computational_delta_t, delta_choi, delta_lambda, family_delta, minor_hierarchy,
    DetectionVerdict,
};
use envwit::{Delta, Density, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CERTIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "envwit",
    version,
    about = "Nonlinear entanglement witnesses from Schmidt-family envelopes"
)]
pub struct Cli {
    /// Eigenvalue tolerance used for PSD / PPT verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub eig_tol: f64,
    /// Minors and witness values must fall below -det_tol to count.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub det_tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a density matrix (JSON with d_a, d_b, re, im) for entanglement.
    Certify(CertifyArgs),
    /// Mixtures x psi+ + (1-x) psi- against the phi+- witnesses and family 1.
    ScanBell(ScanArgs),
    /// Amplitude-damped Bell state against family 2.
    ScanAmplitude(ScanArgs),
    /// Linear vs nonlinear detection on random two-qubit NPT states over a.
    SweepA(SweepArgs),
    /// Linear vs nonlinear detection on random two-qutrit NPT states.
    Table1(Table1Args),
    /// Generalized Choi witnesses on noisy random qutrit states over theta.
    SweepTheta(SweepArgs),
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub file: PathBuf,
    /// Choi-map angles to evaluate on two-qutrit input (repeatable).
    #[arg(long = "theta", allow_negative_numbers = true)]
    pub thetas: Vec<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// start:stop:count
    #[arg(long)]
    pub grid: Option<String>,
    /// CSV path, or `-` for stdout (no sidecar).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// start:stop:count
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Keep states with tr(W rho) < epsilon (sweep-theta only).
    #[arg(long, default_value_t = 0.03)]
    pub epsilon: f64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// hs, bures or both.
    #[arg(long, default_value = "both")]
    pub ensemble: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `start:stop:count`, or a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::BadConfig(format!("grid `{spec}` is not start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad())?;
            Ok(vec![v])
        }
        [start, stop, count] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            if count == 0 || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            Ok(linspace(start, stop, count))
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Serialize)]
pub struct DeltaReport {
    pub label: String,
    pub delta: Vec<Vec<f64>>,
    pub determinant: f64,
    pub verdict: DetectionVerdict<f64>,
}

#[derive(Debug, Serialize)]
pub struct ChoiReport {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(flatten)]
    pub delta: DeltaReport,
}

#[derive(Debug, Serialize)]
pub struct PptReport {
    pub min_pt_eigenvalue: f64,
    pub npt: bool,
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub d_a: usize,
    pub d_b: usize,
    pub ppt: PptReport,
    pub families: Vec<DeltaReport>,
    pub reduction: Option<DeltaReport>,
    pub choi: Vec<ChoiReport>,
    pub measurement_plans: Vec<MeasurementPlan<f64>>,
    pub certified: bool,
}

fn delta_report(label: String, delta: &Delta, tol: &Tolerance<f64>) -> DeltaReport {
    DeltaReport {
        label,
        delta: delta.rows(),
        determinant: delta.determinant(),
        verdict: minor_hierarchy(delta, tol),
    }
}

/// Runs every applicable witness on `rho`. `certified` is set by the Delta
/// minor hierarchies; the PPT verdict is reported alongside.
pub fn certify(
    rho: &Density,
    thetas: &[f64],
    tol: &Tolerance<f64>,
) -> Result<CertifyReport, Error> {
    let dims = rho.dims();
    let min_pt = min_pt_eigenvalue(rho, tol);
    let mut families = Vec::new();
    let mut plans = Vec::new();
    if dims.d_a == 2 && dims.d_b == 2 {
        for n in 1..=6 {
            let r = delta_report(format!("family {n}"), &family_delta(rho, n, tol)?, tol);
            if r.verdict.detected() {
                plans.push(measurement_plan(PlanKind::Family(n), dims)?);
            }
            families.push(r);
        }
    } else {
        let r = delta_report("computational".into(), &computational_delta_t(rho), tol);
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for m in &r.verdict.violating_minors {
            for (x, &i) in m.indices.iter().enumerate() {
                for &j in &m.indices[x + 1..] {
                    if !blocks.contains(&(i, j)) {
                        blocks.push((i, j));
                    }
                }
            }
        }
        for (i, j) in blocks {
            plans.push(measurement_plan(PlanKind::Block(i, j), dims)?);
        }
        families.push(r);
    }
    let reduction = if dims.d_a == dims.d_b {
        Some(delta_report(
            "reduction".into(),
            &delta_lambda(rho, &reduction_map(dims.d_b))?,
            tol,
        ))
    } else {
        None
    };
    let mut choi = Vec::new();
    if dims.d_a == 3 && dims.d_b == 3 {
        for &theta in thetas {
            let p = theta_params(theta);
            // envelope partner of W[a, b, c]
            let delta = delta_choi(rho, p.swapped())?;
            choi.push(ChoiReport {
                theta,
                a: p.a,
                b: p.b,
                c: p.c,
                delta: delta_report(format!("choi theta={theta}"), &delta, tol),
            });
        }
    }
    let certified = families.iter().any(|r| r.verdict.detected())
        || reduction.as_ref().is_some_and(|r| r.verdict.detected())
        || choi.iter().any(|r| r.delta.verdict.detected());
    Ok(CertifyReport {
        d_a: dims.d_a,
        d_b: dims.d_b,
        ppt: PptReport {
            min_pt_eigenvalue: min_pt,
            npt: min_pt < -tol.eig_tol,
        },
        families,
        reduction,
        choi,
        measurement_plans: plans,
        certified,
    })
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Error> {
    match out {
        Some(p) if p != Path::new("-") => std::fs::write(p, body)?,
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// CSV to `out` (default `<command>.csv`) plus the config sidecar, or to
/// stdout with `-`.
fn emit_csv<R: CsvRow>(
    command: &str,
    out: Option<&Path>,
    rows: &[R],
    cfg: &SweepConfig,
) -> Result<(), Error> {
    let default = PathBuf::from(format!("{command}.csv"));
    let path = out.unwrap_or(&default);
    let body = experiments::to_csv(rows);
    if path == Path::new("-") {
        return emit(None, &body);
    }
    std::fs::write(path, body)?;
    let argv: Vec<String> = std::env::args().collect();
    let record = argv.join(" ");
    let sidecar = experiments::write_sidecar(path, &Sidecar::new(&record, cfg))?;
    eprintln!("wrote {} and {}", path.display(), sidecar.display());
    Ok(())
}

fn grid_or(spec: &Option<String>, default: &str) -> Result<Vec<f64>, Error> {
    parse_grid(spec.as_deref().unwrap_or(default))
}

fn sweep_config(args: &SweepArgs, grid: Vec<f64>, tol: Tolerance<f64>) -> SweepConfig {
    SweepConfig {
        seed: args.seed,
        trials: args.trials,
        grid,
        epsilon: args.epsilon,
        ensemble: Ensemble::Hs,
        workers: args.workers.unwrap_or_else(default_workers),
        tol,
    }
}

fn execute(cli: Cli) -> Result<i32, Error> {
    let tol = Tolerance::new(cli.eig_tol, cli.det_tol)?;
    match cli.command {
        Command::Certify(args) => {
            let rho = Density::read_json(&args.file, &tol)?;
            let thetas = if args.thetas.is_empty() {
                vec![0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]
            } else {
                args.thetas.clone()
            };
            let report = certify(&rho, &thetas, &tol)?;
            emit(
                args.out.as_deref(),
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )?;
            Ok(if report.certified {
                EXIT_CERTIFIED
            } else {
                EXIT_OK
            })
        }
        Command::ScanBell(args) => {
            let grid = grid_or(&args.grid, "0:1:11")?;
            if grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::BadMixingParameter(
                    *grid.iter().find(|x| !(0.0..=1.0).contains(*x)).unwrap(),
                ));
            }
            let cfg = SweepConfig {
                grid: grid.clone(),
                trials: 1,
                workers: 1,
                tol,
                ..SweepConfig::default()
            };
            emit_csv(
                "scan-bell",
                args.out.as_deref(),
                &bell_mixture_scan(&grid, &tol)?,
                &cfg,
            )?;
            Ok(EXIT_OK)
        }
        Command::ScanAmplitude(args) => {
            let grid = grid_or(&args.grid, "0:1:21")?;
            let cfg = SweepConfig {
                grid: grid.clone(),
                trials: 1,
                workers: 1,
                tol,
                ..SweepConfig::default()
            };
            emit_csv(
                "scan-amplitude",
                args.out.as_deref(),
                &amplitude_scan(&grid, &tol)?,
                &cfg,
            )?;
            Ok(EXIT_OK)
        }
        Command::SweepA(args) => {
            let cfg = sweep_config(&args, grid_or(&args.grid, "0.05:0.95:19")?, tol);
            emit_csv("sweep-a", args.out.as_deref(), &fig3_sweep(&cfg)?, &cfg)?;
            Ok(EXIT_OK)
        }
        Command::SweepTheta(args) => {
            let cfg = sweep_config(&args, grid_or(&args.grid, "0:6.283185307179586:25")?, tol);
            emit_csv(
                "sweep-theta",
                args.out.as_deref(),
                &fig4_theta_sweep(&cfg)?,
                &cfg,
            )?;
            Ok(EXIT_OK)
        }
        Command::Table1(args) => {
            let ensembles = match args.ensemble.to_ascii_lowercase().as_str() {
                "both" => vec![Ensemble::Hs, Ensemble::Bures],
                other => vec![other.parse::<Ensemble>()?],
            };
            let mut cfg = SweepConfig {
                seed: args.seed,
                trials: args.trials,
                grid: Vec::new(),
                ensemble: ensembles[0],
                workers: args.workers.unwrap_or_else(default_workers),
                tol,
                ..SweepConfig::default()
            };
            let mut rows = Vec::new();
            for &e in &ensembles {
                cfg.ensemble = e;
                rows.push(table1_qutrit(&cfg)?);
            }
            emit_csv("table1", args.out.as_deref(), &rows, &cfg)?;
            Ok(EXIT_OK)
        }
        Command::Selftest { seed } => {
            let checks = envwit::selftest::run(seed);
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += (!c.passed) as usize;
            }
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_INPUT })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use envwit::matcore::BipartiteDims;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.25").unwrap(), vec![0.25]);
        for bad in ["0:1", "a:b:c", "0:1:0", "0:1:2:3", ""] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_input_errors() {
        assert_eq!(run(["envwit", "scan-bell", "--bogus"]), EXIT_INPUT);
        assert_eq!(run(["envwit", "frobnicate"]), EXIT_INPUT);
        assert_eq!(run(["envwit", "--help"]), EXIT_OK);
    }

    #[test]
    fn bad_tolerances_rejected() {
        assert_eq!(
            run(["envwit", "--eig-tol", "0", "scan-bell", "--out", "-"]),
            EXIT_INPUT
        );
    }

    #[test]
    fn certify_reports() {
        let tol = Tolerance::default();
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mixed = Density::maximally_mixed(dims);
        let r = certify(&mixed, &[], &tol).unwrap();
        assert!(!r.certified && r.measurement_plans.is_empty());
        assert!(r.families.iter().all(|f| f.verdict.psd));
        let rho = envwit::states::amplitude_damped(0.5).unwrap();
        let r = certify(&rho, &[], &tol).unwrap();
        assert!(r.certified);
        assert!((r.families[1].determinant + 0.125).abs() < 1e-12);
        assert!(r
            .measurement_plans
            .iter()
            .any(|p| p.kind == PlanKind::Family(2)));
    }
}
