use std::fs;
use std::path::Path;

use hopca::generalized::{general_cp_tpa, ModePenaltyFn};
use hopca::io::{load_model, read_matrix_csv, read_t3, save_model, write_csv, write_t3};
use hopca::select::default_grid;
use hopca::sim::{default_roc_grid, run_roc_experiment, run_table_experiment, ExperimentConfig, RocRow, SignalLevel};
use hopca::*;

use crate::{
    BicArgs, CliError, DecomposeArgs, DecomposeMethod, ExperimentArgs, PenaltyArg, ScenarioArgs, SignalArg, SimulateArgs,
    SmootherArg, SolverArgs, VarexArgs,
};

type CmdResult = std::result::Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("not a number: {t:?}"))))
        .collect()
}

fn parse_lambda(s: Option<&str>, default: LambdaChoice) -> std::result::Result<LambdaChoice, CliError> {
    let Some(s) = s else { return Ok(default) };
    if s.eq_ignore_ascii_case("bic") {
        return Ok(LambdaChoice::Bic);
    }
    let v = parse_list(s)?;
    Ok(if v.len() == 1 { LambdaChoice::Fixed(v[0]) } else { LambdaChoice::Grid(v) })
}

fn solver_config(a: &SolverArgs) -> SolverConfig {
    let mut cfg = SolverConfig::default().with_seed(a.seed);
    if let Some(m) = a.max_iter {
        cfg = cfg.with_max_iter(m);
    }
    if let Some(t) = a.tol {
        cfg = cfg.with_tol(t);
    }
    cfg
}

fn scalar_levels(choices: &[LambdaChoice; 3]) -> std::result::Result<[f64; 3], CliError> {
    let mut out = [0.0; 3];
    for (i, c) in choices.iter().enumerate() {
        out[i] = match c {
            LambdaChoice::Fixed(l) => *l,
            _ => return Err(usage("this method needs a single fixed λ per mode")),
        };
    }
    Ok(out)
}

fn quad_operators(a: &DecomposeArgs, dims: [usize; 3]) -> std::result::Result<QuadOperators, CliError> {
    let load = |p: &Option<std::path::PathBuf>, n: usize| -> std::result::Result<Matrix, CliError> {
        Ok(match p {
            Some(p) => read_matrix_csv(p)?,
            None => Matrix::identity(n, n),
        })
    };
    Ok(QuadOperators::new(load(&a.q1, dims[0])?, load(&a.q2, dims[1])?, load(&a.q3, dims[2])?)?)
}

pub fn decompose(a: DecomposeArgs) -> CmdResult {
    if a.rank == 0 {
        return Err(usage("--rank must be at least 1"));
    }
    let x = read_t3(&a.input)?;
    let mut cfg = solver_config(&a.solver);
    cfg.orthogonalize = a.orthogonalize;
    let ranks = x.dims().map(|n| a.rank.min(n));
    let raw = [a.lambda_u.as_deref(), a.lambda_v.as_deref(), a.lambda_w.as_deref()];
    let sparse_default = |m: DecomposeMethod| match m {
        DecomposeMethod::SparseCpTpa | DecomposeMethod::SparseCpAls | DecomposeMethod::SparseHosvd | DecomposeMethod::SparseHooi
            if a.penalty != PenaltyArg::Group =>
        {
            LambdaChoice::Bic
        }
        _ => LambdaChoice::Fixed(0.0),
    };
    let mut choices = [LambdaChoice::Fixed(0.0), LambdaChoice::Fixed(0.0), LambdaChoice::Fixed(0.0)];
    for (i, r) in raw.iter().enumerate() {
        choices[i] = parse_lambda(*r, sparse_default(a.method))?;
    }
    let kind = match a.penalty {
        PenaltyArg::Nonneg => PenaltyKind::NonnegLasso,
        _ => PenaltyKind::Lasso,
    };
    let pen = PenaltySpec { modes: choices.clone().map(|lambda| ModePenalty { kind, lambda }) };

    let (fitted, diag) = match a.method {
        DecomposeMethod::CpAls => fit_cp(cp_als(&x, a.rank, &cfg)?),
        DecomposeMethod::Tpa => fit_cp(tpa(&x, a.rank, &cfg)?),
        DecomposeMethod::Hosvd => fit_tucker(hosvd(&x, ranks)?),
        DecomposeMethod::Hooi => fit_tucker(hooi(&x, ranks, &cfg)?),
        DecomposeMethod::SparseCpTpa if a.penalty == PenaltyArg::Group => {
            let levels = scalar_levels(&choices)?;
            let groups = x.dims().map(|n| GroupLasso::contiguous(n, a.group_size));
            let [g1, g2, g3] = groups;
            let (g1, g2, g3) = (g1?, g2?, g3?);
            let pens = [
                ModePenaltyFn::new(&g1, levels[0]),
                ModePenaltyFn::new(&g2, levels[1]),
                ModePenaltyFn::new(&g3, levels[2]),
            ];
            fit_cp(general_cp_tpa(&x, a.rank, &pens, &cfg)?)
        }
        _ if a.penalty == PenaltyArg::Group => {
            return Err(usage("--penalty group is only available with sparse-cp-tpa"));
        }
        DecomposeMethod::SparseCpTpa => fit_cp(sparse_cp_tpa(&x, a.rank, &pen, &cfg)?),
        DecomposeMethod::SparseCpAls => fit_cp(sparse_cp_als(&x, a.rank, &pen, &cfg)?),
        DecomposeMethod::SparseHosvd => fit_tucker(sparse_hosvd(&x, ranks, &pen, &cfg)?),
        DecomposeMethod::SparseHooi => fit_tucker(sparse_hooi(&x, ranks, &pen, &cfg)?),
        DecomposeMethod::Gcp => fit_cp(gcp(&x, a.rank, &quad_operators(&a, x.dims())?, [0.0; 3], &cfg)?),
        DecomposeMethod::SparseGcp => {
            if a.penalty != PenaltyArg::Lasso {
                return Err(usage("sparse-gcp supports only --penalty lasso"));
            }
            let levels = scalar_levels(&choices)?;
            fit_cp(gcp(&x, a.rank, &quad_operators(&a, x.dims())?, levels, &cfg)?)
        }
        DecomposeMethod::Fpca => fit_cp(fpca(&x, a.rank, &smoothers(&a, x.dims())?, &cfg)?),
        DecomposeMethod::FpcaHalfsmooth => {
            let h = fpca_half_smoothing(&x, &smoothers(&a, x.dims())?, ranks, &cfg)?;
            (FittedModel::Tucker(h.model), h.diagnostics)
        }
    };
    save_model(&a.out, &fitted, &diag)?;
    if let FittedModel::Cp(m) = &fitted {
        let d: Vec<String> = m.d.iter().map(|v| format!("{v:.6e}")).collect();
        println!("d = {}", d.join(", "));
    }
    for f in &diag.flags {
        eprintln!("warning: {f}");
    }
    Ok(())
}

fn fit_cp((m, d): (CpModel, Diagnostics)) -> (FittedModel, Diagnostics) {
    (FittedModel::Cp(m), d)
}

fn fit_tucker((m, d): (TuckerModel, Diagnostics)) -> (FittedModel, Diagnostics) {
    (FittedModel::Tucker(m), d)
}

fn smoothers(a: &DecomposeArgs, dims: [usize; 3]) -> std::result::Result<SmootherSet, CliError> {
    let kind = match a.smoother {
        SmootherArg::Second => Smoother::SecondDifference,
        SmootherArg::Fourth => Smoother::FourthDifference,
    };
    Ok(SmootherSet::from_differences(dims, a.alpha, kind)?)
}

fn scenario_spec(a: &ScenarioArgs) -> std::result::Result<SimScenarioSpec, CliError> {
    let spec = SimScenarioSpec {
        scenario: Scenario::from_id(a.scenario)?,
        k: a.k,
        sparsity: a.sparsity,
        signal: match a.signal {
            SignalArg::High => SignalLevel::High,
            SignalArg::Low => SignalLevel::Low,
        },
        seed: a.seed,
        noiseless: a.noiseless,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let spec = scenario_spec(&a.scenario)?;
    let truth = hopca::simulate(&spec)?;
    fs::create_dir_all(&a.out).map_err(HopcaError::from)?;
    write_t3(a.out.join("x.t3"), &truth.x)?;
    write_t3(a.out.join("signal.t3"), &truth.signal)?;
    save_model(a.out.join("truth"), &FittedModel::Cp(truth.model), &Diagnostics::default())?;
    Ok(())
}

fn experiment_config(a: &ExperimentArgs) -> std::result::Result<ExperimentConfig, CliError> {
    if a.replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    let mut cfg = ExperimentConfig::new(scenario_spec(&a.scenario)?, a.replicates);
    cfg.jobs = a.jobs;
    if let Some(m) = a.max_iter {
        cfg.solver = cfg.solver.with_max_iter(m);
    }
    if let Some(t) = a.tol {
        cfg.solver = cfg.solver.with_tol(t);
    }
    Ok(cfg)
}

fn method_names(a: &ExperimentArgs) -> Option<Vec<String>> {
    a.methods.as_ref().map(|m| m.split(',').map(|s| s.trim().to_string()).collect())
}

pub fn table(a: ExperimentArgs) -> CmdResult {
    let mut cfg = experiment_config(&a)?;
    cfg.lambda_grid = a.grid.as_deref().map(parse_list).transpose()?;
    let methods = match method_names(&a) {
        None => Method::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Method>().map_err(|e| usage(e.to_string())))
            .collect::<std::result::Result<_, _>>()?,
    };
    let res = run_table_experiment(&cfg, &methods)?;
    fs::create_dir_all(&a.out).map_err(HopcaError::from)?;
    write_csv(a.out.join("metrics.csv"), &hopca::sim::TableResult::CSV_HEADER, res.csv_records())?;
    let timing = res.timings.iter().map(|t| [t.method.name().to_string(), (t.replicate + 1).to_string(), format!("{:.6}", t.seconds)]);
    write_csv(a.out.join("timing.csv"), &["method", "replicate", "seconds"], timing)?;
    for r in &res.rows {
        println!("{:<14} mse={:.4e} replicates={} failed={}", r.method.name(), r.mse, r.succeeded, r.failures.len());
        for (rep, msg) in &r.failures {
            eprintln!("warning: {} replicate {} failed: {msg}", r.method.name(), rep + 1);
        }
    }
    Ok(())
}

pub fn roc(a: ExperimentArgs) -> CmdResult {
    let cfg = experiment_config(&a)?;
    let sparse_modes = cfg.base.scenario.sparse_modes();
    let all = [RocMethod::SparseCpTpa { sparse_modes }, RocMethod::NaiveCp, RocMethod::NaiveTucker];
    let methods = match method_names(&a) {
        None => all.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| {
                all.iter()
                    .copied()
                    .find(|m| m.name() == n.as_str() || m.name().replace('_', "-") == *n)
                    .ok_or_else(|| usage(format!("unknown ROC method {n}")))
            })
            .collect::<std::result::Result<_, _>>()?,
    };
    let grid = match a.grid.as_deref() {
        None => default_roc_grid(21),
        Some(g) => parse_list(g)?,
    };
    let rows = run_roc_experiment(&cfg, &methods, &grid)?;
    fs::create_dir_all(&a.out).map_err(HopcaError::from)?;
    write_csv(a.out.join("roc.csv"), &RocRow::CSV_HEADER, rows.iter().map(|r| r.csv_record()))?;
    Ok(())
}

fn emit(out: Option<&Path>, file: &str, header: &[&str], rows: Vec<Vec<String>>) -> CmdResult {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(HopcaError::from)?;
            write_csv(dir.join(file), header, rows)?;
        }
        None => {
            println!("{}", header.join(","));
            for r in rows {
                println!("{}", r.join(","));
            }
        }
    }
    Ok(())
}

pub fn varex(a: VarexArgs) -> CmdResult {
    let x = read_t3(&a.input)?;
    let model = load_model(&a.model)?;
    let cols = Mode::ALL.iter().map(|m| model.factor(*m).ncols()).max().unwrap_or(0);
    let k = a.k.unwrap_or(cols);
    let rep = match &model {
        FittedModel::Cp(m) => cp_variance_explained(&x, m, k)?,
        FittedModel::Tucker(t) => variance_explained(&x, [&t.u, &t.v, &t.w], k)?,
    };
    let rows = rep.cumulative.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), format!("{v:.10}")]).collect();
    emit(a.out.as_deref(), "varex.csv", &["k", "cumulative"], rows)
}

pub fn bic(a: BicArgs) -> CmdResult {
    let x = read_t3(&a.input)?;
    let mode = Mode::from_number(a.mode as usize)?;
    let fit = tpa_rank_one(&x, &solver_config(&a.solver))?;
    let f = [fit.u, fit.v, fit.w];
    let grid = match a.grid.as_deref() {
        Some(g) => parse_list(g)?,
        None => default_grid(x.contract_except(mode, &f).amax()),
    };
    let kind = if a.nonneg { PenaltyKind::NonnegLasso } else { PenaltyKind::Lasso };
    let sel = bic_select(&x, &f, mode, kind, &grid)?;
    let rows = sel
        .points
        .iter()
        .map(|p| vec![format!("{:.10e}", p.lambda), format!("{:.10}", p.bic), p.nnz.to_string(), format!("{:.10e}", p.rss)])
        .collect();
    emit(a.out.as_deref(), "bic.csv", &["lambda", "bic", "nnz", "rss"], rows)?;
    eprintln!("selected lambda = {:.6e}", sel.lambda);
    Ok(())
}
