//! Simulation scenarios and the replicate-parallel table and ROC experiments.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::classic::{cp_als, hooi, hosvd, tpa};
use crate::error::{HopcaError, Result};
use crate::linalg::leading_left_singular;
use crate::metrics::{roc_sweep, signal_mse, support_metrics, RocMethod};
use crate::model::{CpModel, FittedModel, SolverConfig};
use crate::sparse::{sparse_cp_als, sparse_cp_tpa, sparse_hooi, sparse_hosvd, LambdaChoice, ModePenalty, PenaltyKind, PenaltySpec};
use crate::tensor::{Matrix, Mode, Tensor3, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// 100×100×100, `U` sparse.
    One,
    /// 1000×20×20, `U` sparse.
    Two,
    /// 100×100×100, all factors sparse.
    Three,
    /// 1000×20×20, all factors sparse.
    Four,
}

impl Scenario {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            3 => Ok(Scenario::Three),
            4 => Ok(Scenario::Four),
            _ => Err(HopcaError::arg(format!("scenario must be 1..4, got {id}"))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
            Scenario::Three => 3,
            Scenario::Four => 4,
        }
    }

    pub fn dims(self) -> [usize; 3] {
        match self {
            Scenario::One | Scenario::Three => [100, 100, 100],
            Scenario::Two | Scenario::Four => [1000, 20, 20],
        }
    }

    pub fn sparse_modes(self) -> [bool; 3] {
        match self {
            Scenario::One | Scenario::Two => [true, false, false],
            Scenario::Three | Scenario::Four => [true, true, true],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignalLevel {
    #[default]
    High,
    Low,
}

impl FromStr for SignalLevel {
    type Err = HopcaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(SignalLevel::High),
            "low" => Ok(SignalLevel::Low),
            _ => Err(HopcaError::arg(format!("signal level must be high or low, got {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimScenarioSpec {
    pub scenario: Scenario,
    pub k: usize,
    /// Fraction of zero entries in each sparse factor.
    pub sparsity: f64,
    pub signal: SignalLevel,
    pub seed: u64,
    /// Omit the noise term.
    pub noiseless: bool,
}

impl SimScenarioSpec {
    pub fn new(scenario: Scenario, k: usize, seed: u64) -> Self {
        SimScenarioSpec { scenario, k, sparsity: 0.5, signal: SignalLevel::High, seed, noiseless: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.k, 1 | 2) {
            return Err(HopcaError::arg(format!("K must be 1 or 2, got {}", self.k)));
        }
        if self.sparsity != 0.5 && self.sparsity != 0.9 {
            return Err(HopcaError::arg(format!("sparsity must be 0.5 or 0.9, got {}", self.sparsity)));
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        let high = if self.k == 1 { vec![100.0] } else { vec![200.0, 100.0] };
        match self.signal {
            SignalLevel::High => high,
            SignalLevel::Low => high.into_iter().map(|d| d / 2.0).collect(),
        }
    }

    /// The same scenario with the seed of replicate `r`.
    pub fn replicate(&self, r: usize) -> Self {
        SimScenarioSpec { seed: replicate_seed(self.seed, r), ..self.clone() }
    }
}

/// Independent seed for replicate `r` of a run seeded with `seed`.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64 + 1);
    rng.next_u64()
}

/// A simulated data set with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTruth {
    pub spec: SimScenarioSpec,
    /// Unit-column true factors and weights.
    pub model: CpModel,
    /// Noise-free signal `Σ dₖ uₖ∘vₖ∘wₖ`.
    pub signal: Tensor3,
    /// Observed data.
    pub x: Tensor3,
}

impl SimTruth {
    /// Support mask of the `k`-th true factor of `mode`.
    pub fn support(&self, mode: Mode, k: usize) -> Vec<bool> {
        self.model.factor(mode).column(k).iter().map(|v| *v != 0.0).collect()
    }
}

fn sparse_factor(rng: &mut ChaCha8Rng, n: usize, k: usize, sparsity: f64) -> Matrix {
    let zeros = (sparsity * n as f64).round() as usize;
    let mut m = Matrix::zeros(n, k);
    for c in 0..k {
        loop {
            let mut col = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
            for i in sample(rng, n, zeros) {
                col[i] = 0.0;
            }
            let norm = col.norm();
            if norm > 0.0 {
                m.set_column(c, &(col / norm));
                break;
            }
        }
    }
    m
}

/// Draws factors, weights and noise for a scenario.
pub fn simulate(spec: &SimScenarioSpec) -> Result<SimTruth> {
    spec.validate()?;
    let dims = spec.scenario.dims();
    let sparse = spec.scenario.sparse_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = sparse_factor(&mut rng, dims[0], spec.k, spec.sparsity);
    let (v, w) = if sparse[1] {
        let v = sparse_factor(&mut rng, dims[1], spec.k, spec.sparsity);
        let w = sparse_factor(&mut rng, dims[2], spec.k, spec.sparsity);
        (v, w)
    } else {
        let g = Matrix::from_fn(dims[1], dims[2], |_, _| StandardNormal.sample(&mut rng));
        let v = leading_left_singular(&g, spec.k).vectors;
        let w = leading_left_singular(&g.transpose(), spec.k).vectors;
        (v, w)
    };
    let model = CpModel::new(u, v, w, spec.weights())?;
    let signal = model.reconstruct();
    let mut x = signal.clone();
    if !spec.noiseless {
        let noise: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        x.add_assign(&Tensor3::new(dims, noise)?);
    }
    Ok(SimTruth { spec: spec.clone(), model, signal, x })
}

/// Decomposition methods available to the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    CpAls,
    Tpa,
    Hosvd,
    Hooi,
    SparseCpTpa,
    SparseCpAls,
    SparseHosvd,
    SparseHooi,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::CpAls,
        Method::Tpa,
        Method::Hosvd,
        Method::Hooi,
        Method::SparseCpTpa,
        Method::SparseCpAls,
        Method::SparseHosvd,
        Method::SparseHooi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CpAls => "cp-als",
            Method::Tpa => "tpa",
            Method::Hosvd => "hosvd",
            Method::Hooi => "hooi",
            Method::SparseCpTpa => "sparse-cp-tpa",
            Method::SparseCpAls => "sparse-cp-als",
            Method::SparseHosvd => "sparse-hosvd",
            Method::SparseHooi => "sparse-hooi",
        }
    }

    pub fn is_sparse(self) -> bool {
        matches!(self, Method::SparseCpTpa | Method::SparseCpAls | Method::SparseHosvd | Method::SparseHooi)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HopcaError;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HopcaError::arg(format!("unknown method {s}")))
    }
}

/// Fits `method` with `k` components (Tucker ranks `k,k,k`). Sparse methods
/// use `pen`; dense methods ignore it.
pub fn fit_method(method: Method, x: &Tensor3, k: usize, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<FittedModel> {
    let ranks = x.dims().map(|n| k.min(n));
    Ok(match method {
        Method::CpAls => FittedModel::Cp(cp_als(x, k, cfg)?.0),
        Method::Tpa => FittedModel::Cp(tpa(x, k, cfg)?.0),
        Method::Hosvd => FittedModel::Tucker(hosvd(x, ranks)?.0),
        Method::Hooi => FittedModel::Tucker(hooi(x, ranks, cfg)?.0),
        Method::SparseCpTpa => FittedModel::Cp(sparse_cp_tpa(x, k, pen, cfg)?.0),
        Method::SparseCpAls => FittedModel::Cp(sparse_cp_als(x, k, pen, cfg)?.0),
        Method::SparseHosvd => FittedModel::Tucker(sparse_hosvd(x, ranks, pen, cfg)?.0),
        Method::SparseHooi => FittedModel::Tucker(sparse_hooi(x, ranks, pen, cfg)?.0),
    })
}

/// Settings shared by the experiments.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub base: SimScenarioSpec,
    pub replicates: usize,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub solver: SolverConfig,
    /// λ grid for the BIC search of sparse methods; `None` uses the default
    /// grid of each update.
    pub lambda_grid: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(base: SimScenarioSpec, replicates: usize) -> Self {
        // sparse CP-ALS and sparse HOOI have no convergence guarantee
        let solver = SolverConfig::default().with_max_iter(100);
        ExperimentConfig { base, replicates, jobs: 0, solver, lambda_grid: None }
    }

    /// Lasso penalties on the scenario's sparse modes, BIC-selected.
    pub fn penalty(&self) -> PenaltySpec {
        let modes = self.base.scenario.sparse_modes();
        match &self.lambda_grid {
            None => PenaltySpec::lasso_bic_on(modes),
            Some(g) => PenaltySpec {
                modes: modes.map(|on| {
                    if on {
                        ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Grid(g.clone()) }
                    } else {
                        ModePenalty::none()
                    }
                }),
            },
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| HopcaError::arg(format!("thread pool: {e}")))
    }
}

/// Means over successful replicates for one method.
#[derive(Clone, Debug)]
pub struct MethodSummary {
    pub method: Method,
    /// `tp[k][mode]`, averaged over replicates.
    pub tp: Vec<[f64; 3]>,
    pub fp: Vec<[f64; 3]>,
    pub mse: f64,
    pub succeeded: usize,
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug)]
pub struct Timing {
    pub method: Method,
    pub replicate: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TableResult {
    pub rows: Vec<MethodSummary>,
    pub timings: Vec<Timing>,
}

impl TableResult {
    pub fn row(&self, method: Method) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub const CSV_HEADER: [&'static str; 8] = ["method", "component", "mode", "tp", "fp", "mse", "replicates", "failed"];

    /// One record per (method, component, mode).
    pub fn csv_records(&self) -> Vec<[String; 8]> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (k, (tp, fp)) in r.tp.iter().zip(&r.fp).enumerate() {
                for m in Mode::ALL {
                    out.push([
                        r.method.name().to_string(),
                        (k + 1).to_string(),
                        m.number().to_string(),
                        format!("{:.6}", tp[m.index()]),
                        format!("{:.6}", fp[m.index()]),
                        format!("{:.6e}", r.mse),
                        r.succeeded.to_string(),
                        r.failures.len().to_string(),
                    ]);
                }
            }
        }
        out
    }
}

struct ReplicateOutcome {
    method: Method,
    replicate: usize,
    seconds: f64,
    result: Result<([Vec<f64>; 3], [Vec<f64>; 3], f64)>,
}

fn evaluate(method: Method, truth: &SimTruth, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<([Vec<f64>; 3], [Vec<f64>; 3], f64)> {
    let k = truth.spec.k;
    let fitted = fit_method(method, &truth.x, k, pen, cfg)?;
    let metrics = support_metrics(&fitted.cp_view(), &truth.model)?;
    let mut tp: [Vec<f64>; 3] = Default::default();
    let mut fp: [Vec<f64>; 3] = Default::default();
    for m in Mode::ALL {
        tp[m.index()] = vec![0.0; k];
        fp[m.index()] = vec![0.0; k];
        for (mt, r) in metrics.matches.iter().zip(&metrics.rates) {
            tp[m.index()][mt.truth] = r[m.index()].tp;
            fp[m.index()][mt.truth] = r[m.index()].fp;
        }
    }
    Ok((tp, fp, signal_mse(&fitted.reconstruct(), &truth.signal)?))
}

/// Runs every method on every replicate and averages TP/FP and signal MSE.
/// Failed fits are excluded from the means and listed per method.
pub fn run_table_experiment(cfg: &ExperimentConfig, methods: &[Method]) -> Result<TableResult> {
    cfg.base.validate()?;
    cfg.solver.validate()?;
    if cfg.replicates == 0 {
        return Err(HopcaError::arg("replicates must be at least 1"));
    }
    if methods.is_empty() {
        return Ok(TableResult::default());
    }
    let pen = cfg.penalty();
    pen.validate()?;
    let outcomes: Vec<Vec<ReplicateOutcome>> = cfg.pool()?.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let truth = simulate(&cfg.base.replicate(r));
                methods
                    .iter()
                    .map(|&method| {
                        let start = Instant::now();
                        let result = match &truth {
                            Ok(t) => evaluate(method, t, &pen, &cfg.solver),
                            Err(e) => Err(HopcaError::arg(format!("simulation failed: {e}"))),
                        };
                        ReplicateOutcome { method, replicate: r, seconds: start.elapsed().as_secs_f64(), result }
                    })
                    .collect()
            })
            .collect()
    });
    let k = cfg.base.k;
    let mut table = TableResult::default();
    for &method in methods {
        let mut s = MethodSummary {
            method,
            tp: vec![[0.0; 3]; k],
            fp: vec![[0.0; 3]; k],
            mse: 0.0,
            succeeded: 0,
            failures: Vec::new(),
        };
        for o in outcomes.iter().flatten().filter(|o| o.method == method) {
            table.timings.push(Timing { method, replicate: o.replicate, seconds: o.seconds });
            match &o.result {
                Ok((tp, fp, mse)) => {
                    s.succeeded += 1;
                    s.mse += mse;
                    for c in 0..k {
                        for m in 0..3 {
                            s.tp[c][m] += tp[m][c];
                            s.fp[c][m] += fp[m][c];
                        }
                    }
                }
                Err(e) => s.failures.push((o.replicate, e.to_string())),
            }
        }
        if s.succeeded > 0 {
            let n = s.succeeded as f64;
            s.mse /= n;
            for c in 0..k {
                for m in 0..3 {
                    s.tp[c][m] /= n;
                    s.fp[c][m] /= n;
                }
            }
        } else {
            s.mse = f64::NAN;
        }
        table.rows.push(s);
    }
    Ok(table)
}

/// One averaged ROC point.
#[derive(Clone, Debug, PartialEq)]
pub struct RocRow {
    pub method: &'static str,
    pub lambda: f64,
    pub mode: Mode,
    pub component: usize,
    pub tp: f64,
    pub fp: f64,
}

impl RocRow {
    pub const CSV_HEADER: [&'static str; 6] = ["method", "lambda", "mode", "component", "tp", "fp"];

    pub fn csv_record(&self) -> [String; 6] {
        [
            self.method.to_string(),
            format!("{:.6e}", self.lambda),
            self.mode.number().to_string(),
            (self.component + 1).to_string(),
            format!("{:.6}", self.tp),
            format!("{:.6}", self.fp),
        ]
    }
}

/// Evenly spaced relative levels `0, 1/(n−1), …, 1`.
pub fn default_roc_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// ROC sweeps per replicate, averaged at matched grid indices.
pub fn run_roc_experiment(cfg: &ExperimentConfig, methods: &[RocMethod], grid: &[f64]) -> Result<Vec<RocRow>> {
    cfg.base.validate()?;
    cfg.solver.validate()?;
    if cfg.replicates == 0 {
        return Err(HopcaError::arg("replicates must be at least 1"));
    }
    let per_rep: Vec<Result<Vec<Vec<RocRow>>>> = cfg.pool()?.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let truth = simulate(&cfg.base.replicate(r))?;
                methods
                    .iter()
                    .map(|&m| {
                        let pts = roc_sweep(&truth.x, &truth.model, m, grid, &cfg.solver)?;
                        Ok(pts
                            .into_iter()
                            .map(|p| RocRow {
                                method: m.name(),
                                lambda: p.lambda,
                                mode: p.mode,
                                component: p.component,
                                tp: p.tp,
                                fp: p.fp,
                            })
                            .collect())
                    })
                    .collect()
            })
            .collect()
    });
    let mut sums: Vec<(RocRow, usize)> = Vec::new();
    for rep in per_rep {
        for rows in rep? {
            for row in rows {
                let key = |a: &RocRow| {
                    a.method == row.method && a.lambda == row.lambda && a.mode == row.mode && a.component == row.component
                };
                match sums.iter_mut().find(|(a, _)| key(a)) {
                    Some((a, n)) => {
                        a.tp += row.tp;
                        a.fp += row.fp;
                        *n += 1;
                    }
                    None => sums.push((row, 1)),
                }
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|(mut r, n)| {
            r.tp /= n as f64;
            r.fp /= n as f64;
            r
        })
        .collect())
}
