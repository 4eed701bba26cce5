//! Analytic scans and seeded Monte Carlo sweeps.
//!
//! Sampling is sharded into fixed batches of `BATCH` trials; batch `b` draws
//! from stream `b` of the configured seed, and only integer hit counts are
//! reduced, so results do not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    bures_density, haar_pure, hs_density, min_pt_eigenvalue, npt_filter, RngStream,
};
use crate::error::{Error, Result};
use crate::matcore::{partial_transpose, BipartiteDims, Tolerance};
use crate::pncp::{theta_params, ChoiParams};
use crate::states::{
    amplitude_damped, bell, bell_diagonal, density_from_pure, minimal_measurement_state,
    BellDiagonalCoords, BellKind, DensityMatrix,
};
use crate::witness::{
    choi_closed_form_witness, computational_delta_t, delta_choi, expectation, family_delta,
    minor_hierarchy, WitnessOperator,
};

pub const BATCH: u64 = 1000;
const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Hs,
    Bures,
}

impl Ensemble {
    pub fn sample(self, dims: BipartiteDims, rng: &mut RngStream) -> DensityMatrix<f64> {
        match self {
            Ensemble::Hs => hs_density(dims, rng),
            Ensemble::Bures => bures_density(dims, rng),
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Hs => "hs",
            Ensemble::Bures => "bures",
        })
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hs" | "hilbert-schmidt" => Ok(Ensemble::Hs),
            "bures" => Ok(Ensemble::Bures),
            other => Err(Error::BadConfig(format!("unknown ensemble `{other}`"))),
        }
    }
}

/// Binomial hit count with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectionStats {
    pub trials: u64,
    pub hits: u64,
    pub fraction: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl DetectionStats {
    pub fn new(hits: u64, trials: u64) -> Self {
        assert!(hits <= trials, "hits {hits} exceed trials {trials}");
        if trials == 0 {
            return Self {
                trials,
                hits,
                fraction: 0.0,
                wilson_low: 0.0,
                wilson_high: 1.0,
            };
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = WILSON_Z * WILSON_Z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            trials,
            hits,
            fraction: p,
            wilson_low: (centre - half).max(0.0).min(p),
            wilson_high: (centre + half).min(1.0).max(p),
        }
    }

    /// Binomial standard error at the observed fraction.
    pub fn sigma(&self) -> f64 {
        (self.fraction * (1.0 - self.fraction) / self.trials.max(1) as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: u64,
    pub grid: Vec<f64>,
    pub epsilon: f64,
    pub ensemble: Ensemble,
    pub workers: usize,
    pub tol: Tolerance<f64>,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100_000,
            grid: Vec::new(),
            epsilon: 0.03,
            ensemble: Ensemble::Hs,
            workers: default_workers(),
            tol: Tolerance::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self, needs_grid: bool) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::BadConfig("trials must be at least 1".into()));
        }
        if needs_grid && self.grid.is_empty() {
            return Err(Error::BadConfig("grid is empty".into()));
        }
        if self.grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::BadConfig(format!(
                "epsilon {} must be >= 0",
                self.epsilon
            )));
        }
        if self.workers == 0 {
            return Err(Error::BadConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// `count` evenly spaced points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Runs `job(rng, n)` over the fixed batches covering `total`, in a pool of
/// `workers` threads, returning per-batch results in batch order.
fn sharded<R, F>(cfg: &SweepConfig, total: u64, job: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&mut RngStream, u64) -> R + Sync,
{
    let batches = total.div_ceil(BATCH);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = RngStream::new(cfg.seed, b);
                job(&mut rng, BATCH.min(total - b * BATCH))
            })
            .collect()
    }))
}

/// Draws from `ensemble` until `n` NPT states have been kept.
fn npt_samples(
    ensemble: Ensemble,
    dims: BipartiteDims,
    n: u64,
    rng: &mut RngStream,
    tol: &Tolerance<f64>,
) -> (Vec<DensityMatrix<f64>>, u64) {
    let mut kept = Vec::with_capacity(n as usize);
    let mut drawn = 0;
    while (kept.len() as u64) < n {
        let rho = ensemble.sample(dims, rng);
        drawn += 1;
        if npt_filter(&rho, tol) {
            kept.push(rho);
        }
    }
    (kept, drawn)
}

fn sum_vecs(acc: &mut [u64], v: &[u64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn pt_witness(rho: DensityMatrix<f64>) -> WitnessOperator<f64> {
    let dims = rho.dims();
    let w = partial_transpose(rho.mat(), dims).expect("square");
    WitnessOperator::new(dims, w, &Tolerance::default()).expect("partial transpose is Hermitian")
}

// ---------------------------------------------------------------- analytic

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellMixtureRow {
    pub x: f64,
    #[serde(rename = "trW_plus")]
    pub tr_w_plus: f64,
    #[serde(rename = "trW_minus")]
    pub tr_w_minus: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
}

/// `rho = x psi+ + (1 - x) psi-` against `W+- = (phi+-)^Gamma` and family 1.
pub fn bell_mixture_scan(grid: &[f64], tol: &Tolerance<f64>) -> Result<Vec<BellMixtureRow>> {
    let psi_plus = density_from_pure(&bell::<f64>(BellKind::PsiPlus))?;
    let psi_minus = density_from_pure(&bell::<f64>(BellKind::PsiMinus))?;
    let w_plus = pt_witness(density_from_pure(&bell(BellKind::PhiPlus))?);
    let w_minus = pt_witness(density_from_pure(&bell(BellKind::PhiMinus))?);
    grid.iter()
        .map(|&x| {
            let rho = psi_plus.mix(&psi_minus, x)?;
            Ok(BellMixtureRow {
                x,
                tr_w_plus: expectation(&w_plus, &rho, tol)?,
                tr_w_minus: expectation(&w_minus, &rho, tol)?,
                f1: family_delta(&rho, 1, tol)?.determinant(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeRow {
    pub gamma: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    pub min_pt_eigenvalue: f64,
}

pub fn amplitude_scan(grid: &[f64], tol: &Tolerance<f64>) -> Result<Vec<AmplitudeRow>> {
    grid.iter()
        .map(|&gamma| {
            let rho = amplitude_damped(gamma)?;
            Ok(AmplitudeRow {
                gamma,
                f2: family_delta(&rho, 2, tol)?.determinant(),
                min_pt_eigenvalue: min_pt_eigenvalue(&rho, tol),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TetrahedronReport {
    pub probabilities: [f64; 4],
    pub xyz: [f64; 3],
    /// Partial-transpose eigenvalues, ordered like the probabilities.
    pub lambda: [f64; 4],
    pub in_octahedron: bool,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    /// `tr(W_i rho)` for `W = (psi-, phi-, phi+, psi+)^Gamma`.
    pub tr_w: [f64; 4],
}

/// Bell-diagonal diagnostics. `lambda` comes from a numerical PT eigensolve,
/// matched to the closed form `1/2 - p_i` for labelling.
pub fn bell_tetrahedron_report(
    coords: &BellDiagonalCoords<f64>,
    tol: &Tolerance<f64>,
) -> Result<TetrahedronReport> {
    let rho = bell_diagonal(coords);
    let mut numeric = rho.pt_eigenvalues(tol);
    let closed = coords.pt_spectrum();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| closed[a].total_cmp(&closed[b]));
    numeric.sort_by(f64::total_cmp);
    let mut lambda = [0.0; 4];
    for (rank, &slot) in order.iter().enumerate() {
        lambda[slot] = numeric[rank];
    }
    let wedge = [
        BellKind::PsiMinus,
        BellKind::PhiMinus,
        BellKind::PhiPlus,
        BellKind::PsiPlus,
    ];
    let mut tr_w = [0.0; 4];
    for (slot, kind) in wedge.into_iter().enumerate() {
        tr_w[slot] = expectation(&pt_witness(density_from_pure(&bell(kind))?), &rho, tol)?;
    }
    Ok(TetrahedronReport {
        probabilities: coords.probabilities(),
        xyz: [coords.x(), coords.y(), coords.z()],
        lambda,
        in_octahedron: lambda.iter().all(|&l| l >= -tol.eig_tol),
        f1: family_delta(&rho, 1, tol)?.determinant(),
        f2: family_delta(&rho, 2, tol)?.determinant(),
        tr_w,
    })
}

// ------------------------------------------------------------- Monte Carlo

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    pub a: f64,
    pub trials: u64,
    pub frac_linear: f64,
    pub linear_wilson_low: f64,
    pub linear_wilson_high: f64,
    pub frac_nonlinear: f64,
    pub nonlinear_wilson_low: f64,
    pub nonlinear_wilson_high: f64,
    pub nonlinear_hits: u64,
    /// Samples detected linearly but with no violated minor.
    pub dominance_violations: u64,
}

/// Two-qubit HS states, NPT only. Linear witness `(psi_1)^Gamma` with
/// `psi_1 = a phi+ + b phi-`; nonlinear witness `det Delta` of family 1.
/// `trials` counts kept NPT states; every grid point sees the same samples.
pub fn fig3_sweep(cfg: &SweepConfig) -> Result<Vec<Fig3Row>> {
    cfg.validate(true)?;
    if cfg.grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::BadConfig("a must lie in (0, 1)".into()));
    }
    let dims = BipartiteDims::new(2, 2)?;
    let tol = cfg.tol;
    let witnesses = cfg
        .grid
        .iter()
        .map(|&a| {
            let b = (1.0 - a * a).sqrt();
            Ok(pt_witness(density_from_pure(&minimal_measurement_state(
                1, a, b,
            )?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let g = witnesses.len();
    // [linear hits per a.., dominance violations per a.., nonlinear hits]
    let per_batch = sharded(cfg, cfg.trials, |rng, n| {
        let mut counts = vec![0u64; 2 * g + 1];
        let (states, _) = npt_samples(Ensemble::Hs, dims, n, rng, &tol);
        for rho in &states {
            let delta = family_delta(rho, 1, &tol).expect("two qubits");
            let nonlinear = delta.determinant() < -tol.det_tol;
            let minors = minor_hierarchy(&delta, &tol).detected();
            counts[2 * g] += nonlinear as u64;
            for (k, w) in witnesses.iter().enumerate() {
                if expectation(w, rho, &tol).expect("dims") < -tol.det_tol {
                    counts[k] += 1;
                    counts[g + k] += !minors as u64;
                }
            }
        }
        counts
    })?;
    let mut total = vec![0u64; 2 * g + 1];
    per_batch.iter().for_each(|c| sum_vecs(&mut total, c));
    let nl = DetectionStats::new(total[2 * g], cfg.trials);
    Ok(cfg
        .grid
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let lin = DetectionStats::new(total[k], cfg.trials);
            Fig3Row {
                a,
                trials: cfg.trials,
                frac_linear: lin.fraction,
                linear_wilson_low: lin.wilson_low,
                linear_wilson_high: lin.wilson_high,
                frac_nonlinear: nl.fraction,
                nonlinear_wilson_low: nl.wilson_low,
                nonlinear_wilson_high: nl.wilson_high,
                nonlinear_hits: nl.hits,
                dominance_violations: total[g + k],
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub ensemble: Ensemble,
    pub trials: u64,
    pub frac_linear_pct: f64,
    pub linear_wilson_low_pct: f64,
    pub linear_wilson_high_pct: f64,
    pub frac_nonlinear_pct: f64,
    pub nonlinear_wilson_low_pct: f64,
    pub nonlinear_wilson_high_pct: f64,
    /// Any principal minor of Delta negative (superset of the determinant test).
    pub frac_minor_pct: f64,
    pub npt_rate: f64,
    pub dominance_violations: u64,
}

/// Two-qutrit NPT states from `cfg.ensemble`. Linear witness
/// `(phi3+)^Gamma`; nonlinear witness `det Delta_T` in the computational basis.
pub fn table1_qutrit(cfg: &SweepConfig) -> Result<Table1Row> {
    cfg.validate(false)?;
    let dims = BipartiteDims::new(3, 3)?;
    let tol = cfg.tol;
    let ensemble = cfg.ensemble;
    // [drawn, linear, nonlinear, minor, dominance violations]
    let per_batch = sharded(cfg, cfg.trials, |rng, n| {
        let mut c = [0u64; 5];
        let (states, drawn) = npt_samples(ensemble, dims, n, rng, &tol);
        c[0] = drawn;
        for rho in &states {
            let delta = computational_delta_t(rho);
            let k = delta.k();
            // (phi3+)^Gamma = SWAP / 3, so tr(W rho) = sum_ij rho_{ij,ji} / 3 = tr(Delta) off-diagonal sum / 3
            let linear = delta.entries().iter().sum::<f64>() / k as f64;
            let lin = linear < -tol.det_tol;
            let det = delta.determinant() < -tol.det_tol;
            let minors = minor_hierarchy(&delta, &tol).detected();
            c[1] += lin as u64;
            c[2] += det as u64;
            c[3] += minors as u64;
            c[4] += (lin && !minors) as u64;
        }
        c
    })?;
    let mut t = [0u64; 5];
    per_batch.iter().for_each(|c| sum_vecs(&mut t, c));
    let lin = DetectionStats::new(t[1], cfg.trials);
    let nl = DetectionStats::new(t[2], cfg.trials);
    Ok(Table1Row {
        ensemble,
        trials: cfg.trials,
        frac_linear_pct: 100.0 * lin.fraction,
        linear_wilson_low_pct: 100.0 * lin.wilson_low,
        linear_wilson_high_pct: 100.0 * lin.wilson_high,
        frac_nonlinear_pct: 100.0 * nl.fraction,
        nonlinear_wilson_low_pct: 100.0 * nl.wilson_low,
        nonlinear_wilson_high_pct: 100.0 * nl.wilson_high,
        frac_minor_pct: 100.0 * DetectionStats::new(t[3], cfg.trials).fraction,
        npt_rate: cfg.trials as f64 / t[0] as f64,
        dominance_violations: t[4],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig4Row {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub trials: u64,
    /// States with `tr(W rho) < epsilon`.
    pub retained: u64,
    pub frac_linear: f64,
    pub linear_wilson_low: f64,
    pub linear_wilson_high: f64,
    pub frac_nonlinear: f64,
    pub nonlinear_wilson_low: f64,
    pub nonlinear_wilson_high: f64,
    pub frac_linear_all: f64,
    pub frac_nonlinear_all: f64,
    pub dominance_violations: u64,
}

/// `rho = p |psi><psi| + (1 - p) I/9` with Haar `psi` and uniform `p`.
/// Linear witness `W[a, b, c]`; nonlinear witness its envelope partner
/// `Delta` with `b` and `c` exchanged, detected when any principal minor is
/// negative. Fractions are over the retained set and, in the `_all`
/// columns, over every sample.
pub fn fig4_theta_sweep(cfg: &SweepConfig) -> Result<Vec<Fig4Row>> {
    cfg.validate(true)?;
    let dims = BipartiteDims::new(3, 3)?;
    let tol = cfg.tol;
    let mixed = DensityMatrix::<f64>::maximally_mixed(dims);
    let params: Vec<ChoiParams<f64>> = cfg.grid.iter().map(|&t| theta_params(t)).collect();
    let witnesses: Vec<WitnessOperator<f64>> = params
        .iter()
        .map(|&p| choi_closed_form_witness(p))
        .collect();
    let g = params.len();
    // per theta: [retained, linear|retained, nonlinear|retained, linear, nonlinear, dominance]
    let per_batch = sharded(cfg, cfg.trials, |rng, n| {
        let mut c = vec![0u64; 6 * g];
        for _ in 0..n {
            let psi = density_from_pure(&haar_pure::<f64>(dims, rng)).expect("normalized");
            let p = rng.uniform();
            let rho = psi.mix(&mixed, p).expect("p in [0, 1)");
            for k in 0..g {
                let lin_value = expectation(&witnesses[k], &rho, &tol).expect("dims");
                let delta = delta_choi(&rho, params[k].swapped()).expect("qutrits");
                let lin = lin_value < -tol.det_tol;
                let nl = minor_hierarchy(&delta, &tol).detected();
                let row = &mut c[6 * k..6 * k + 6];
                if lin_value < cfg.epsilon {
                    row[0] += 1;
                    row[1] += lin as u64;
                    row[2] += nl as u64;
                }
                row[3] += lin as u64;
                row[4] += nl as u64;
                row[5] += (lin && !nl) as u64;
            }
        }
        c
    })?;
    let mut t = vec![0u64; 6 * g];
    per_batch.iter().for_each(|c| sum_vecs(&mut t, c));
    Ok((0..g)
        .map(|k| {
            let row = &t[6 * k..6 * k + 6];
            let lin = DetectionStats::new(row[1], row[0]);
            let nl = DetectionStats::new(row[2], row[0]);
            Fig4Row {
                theta: cfg.grid[k],
                a: params[k].a,
                b: params[k].b,
                c: params[k].c,
                trials: cfg.trials,
                retained: row[0],
                frac_linear: lin.fraction,
                linear_wilson_low: lin.wilson_low,
                linear_wilson_high: lin.wilson_high,
                frac_nonlinear: nl.fraction,
                nonlinear_wilson_low: nl.wilson_low,
                nonlinear_wilson_high: nl.wilson_high,
                frac_linear_all: row[3] as f64 / cfg.trials as f64,
                frac_nonlinear_all: row[4] as f64 / cfg.trials as f64,
                dominance_violations: row[5],
            }
        })
        .collect())
}

// ------------------------------------------------------------------ output

/// C-style `%.12g`.
pub fn fmt_g12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, x))
    }
}

/// A row that can be written as CSV.
pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

fn f(x: f64) -> String {
    fmt_g12(x)
}

impl CsvRow for BellMixtureRow {
    fn header() -> Vec<&'static str> {
        vec!["x", "trW_plus", "trW_minus", "F1"]
    }
    fn fields(&self) -> Vec<String> {
        vec![f(self.x), f(self.tr_w_plus), f(self.tr_w_minus), f(self.f1)]
    }
}

impl CsvRow for AmplitudeRow {
    fn header() -> Vec<&'static str> {
        vec!["gamma", "F2", "min_pt_eigenvalue"]
    }
    fn fields(&self) -> Vec<String> {
        vec![f(self.gamma), f(self.f2), f(self.min_pt_eigenvalue)]
    }
}

impl CsvRow for Fig3Row {
    fn header() -> Vec<&'static str> {
        vec![
            "a",
            "trials",
            "frac_linear",
            "linear_wilson_low",
            "linear_wilson_high",
            "frac_nonlinear",
            "nonlinear_wilson_low",
            "nonlinear_wilson_high",
            "nonlinear_hits",
            "dominance_violations",
        ]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            f(self.a),
            self.trials.to_string(),
            f(self.frac_linear),
            f(self.linear_wilson_low),
            f(self.linear_wilson_high),
            f(self.frac_nonlinear),
            f(self.nonlinear_wilson_low),
            f(self.nonlinear_wilson_high),
            self.nonlinear_hits.to_string(),
            self.dominance_violations.to_string(),
        ]
    }
}

impl CsvRow for Table1Row {
    fn header() -> Vec<&'static str> {
        vec![
            "ensemble",
            "trials",
            "frac_linear_pct",
            "linear_wilson_low_pct",
            "linear_wilson_high_pct",
            "frac_nonlinear_pct",
            "nonlinear_wilson_low_pct",
            "nonlinear_wilson_high_pct",
            "frac_minor_pct",
            "npt_rate",
            "dominance_violations",
        ]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.ensemble.to_string(),
            self.trials.to_string(),
            f(self.frac_linear_pct),
            f(self.linear_wilson_low_pct),
            f(self.linear_wilson_high_pct),
            f(self.frac_nonlinear_pct),
            f(self.nonlinear_wilson_low_pct),
            f(self.nonlinear_wilson_high_pct),
            f(self.frac_minor_pct),
            f(self.npt_rate),
            self.dominance_violations.to_string(),
        ]
    }
}

impl CsvRow for Fig4Row {
    fn header() -> Vec<&'static str> {
        vec![
            "theta",
            "a",
            "b",
            "c",
            "trials",
            "retained",
            "frac_linear",
            "linear_wilson_low",
            "linear_wilson_high",
            "frac_nonlinear",
            "nonlinear_wilson_low",
            "nonlinear_wilson_high",
            "frac_linear_all",
            "frac_nonlinear_all",
            "dominance_violations",
        ]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            f(self.theta),
            f(self.a),
            f(self.b),
            f(self.c),
            self.trials.to_string(),
            self.retained.to_string(),
            f(self.frac_linear),
            f(self.linear_wilson_low),
            f(self.linear_wilson_high),
            f(self.frac_nonlinear),
            f(self.nonlinear_wilson_low),
            f(self.nonlinear_wilson_high),
            f(self.frac_linear_all),
            f(self.frac_nonlinear_all),
            self.dominance_violations.to_string(),
        ]
    }
}

pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = R::header().join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.fields().join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: CsvRow>(path: impl AsRef<Path>, rows: &[R]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(to_csv(rows).as_bytes())?;
    Ok(())
}

/// Replay record written next to each CSV.
#[derive(Clone, Debug, Serialize)]
pub struct Sidecar<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub trials: u64,
    pub grid: &'a [f64],
    pub epsilon: f64,
    pub ensemble: Ensemble,
    pub workers: usize,
    pub eig_tol: f64,
    pub det_tol: f64,
    pub batch: u64,
    pub timestamp_unix: u64,
}

impl<'a> Sidecar<'a> {
    pub fn new(command: &'a str, cfg: &'a SweepConfig) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command,
            seed: cfg.seed,
            trials: cfg.trials,
            grid: &cfg.grid,
            epsilon: cfg.epsilon,
            ensemble: cfg.ensemble,
            workers: cfg.workers,
            eig_tol: cfg.tol.eig_tol,
            det_tol: cfg.tol.det_tol,
            batch: BATCH,
            timestamp_unix,
        }
    }
}

/// `out.csv` -> `out.config.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.config.json"))
}

pub fn write_sidecar(csv: &Path, sidecar: &Sidecar<'_>) -> Result<PathBuf> {
    let path = sidecar_path(csv);
    std::fs::write(&path, serde_json::to_string_pretty(sidecar)?)?;
    Ok(path)
}
