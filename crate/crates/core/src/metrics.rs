//! Support recovery and signal recovery metrics, and ROC sweeps.

use crate::classic::{cp_als, hosvd};
use crate::error::{HopcaError, Result};
use crate::model::{CpModel, SolverConfig};
use crate::sparse::{sparse_cp_tpa, LambdaChoice, ModePenalty, PenaltyKind, PenaltySpec};
use crate::tensor::{Mode, Tensor3};

/// Pairing of an estimated component with a true component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentMatch {
    pub estimated: usize,
    pub truth: usize,
    /// Signed cosines between matched factors, per mode.
    pub cosines: [f64; 3],
}

impl ComponentMatch {
    pub fn signs(&self) -> [f64; 3] {
        self.cosines.map(|c| if c < 0.0 { -1.0 } else { 1.0 })
    }
}

/// True and false positive rates of one support estimate.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Rates {
    pub tp: f64,
    pub fp: f64,
}

#[derive(Clone, Debug)]
pub struct RecoveryMetrics {
    pub matches: Vec<ComponentMatch>,
    /// Rates per matched pair (in `matches` order), per mode.
    pub rates: Vec<[Rates; 3]>,
    pub flags: Vec<String>,
}

impl RecoveryMetrics {
    /// Rates of `mode` averaged over matched components.
    pub fn mean(&self, mode: Mode) -> Rates {
        let n = self.rates.len().max(1) as f64;
        let (tp, fp) = self.rates.iter().fold((0.0, 0.0), |(a, b), r| (a + r[mode.index()].tp, b + r[mode.index()].fp));
        Rates { tp: tp / n, fp: fp / n }
    }
}

/// TP = correctly nonzero / truly nonzero, FP = falsely nonzero / truly
/// zero. An empty denominator gives TP = 1 and FP = 0.
pub fn support_rates(estimated: &[f64], truth: &[f64]) -> Rates {
    let (mut tp, mut pos, mut fp, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (e, t) in estimated.iter().zip(truth) {
        if *t != 0.0 {
            pos += 1;
            tp += usize::from(*e != 0.0);
        } else {
            neg += 1;
            fp += usize::from(*e != 0.0);
        }
    }
    Rates {
        tp: if pos == 0 { 1.0 } else { tp as f64 / pos as f64 },
        fp: if neg == 0 { 0.0 } else { fp as f64 / neg as f64 },
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

/// Greedy pairing: repeatedly takes the unmatched pair with the largest
/// `|cos_u·cos_v·cos_w|`. Ties go to the lowest (truth, estimate) indices.
pub fn match_components(estimated: &CpModel, truth: &CpModel) -> Vec<ComponentMatch> {
    let mut candidates = Vec::new();
    for t in 0..truth.k() {
        for e in 0..estimated.k() {
            let cosines = Mode::ALL.map(|m| {
                cosine(estimated.factor(m).column(e).as_slice(), truth.factor(m).column(t).as_slice())
            });
            let score = cosines.iter().product::<f64>().abs();
            candidates.push((score, t, e, cosines));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_t = vec![false; truth.k()];
    let mut used_e = vec![false; estimated.k()];
    let mut out = Vec::new();
    for (_, t, e, cosines) in candidates {
        if !used_t[t] && !used_e[e] {
            used_t[t] = true;
            used_e[e] = true;
            out.push(ComponentMatch { estimated: e, truth: t, cosines });
        }
    }
    out.sort_by_key(|m| m.truth);
    out
}

/// Per-mode TP/FP rates after greedy component matching.
pub fn support_metrics(estimated: &CpModel, truth: &CpModel) -> Result<RecoveryMetrics> {
    if estimated.dims() != truth.dims() {
        return Err(HopcaError::dim(format!("model dims {:?} vs truth {:?}", estimated.dims(), truth.dims())));
    }
    let mut flags = Vec::new();
    if estimated.k() != truth.k() {
        flags.push(format!(
            "component count mismatch: estimated {} vs truth {}; matched {}",
            estimated.k(),
            truth.k(),
            estimated.k().min(truth.k())
        ));
    }
    let matches = match_components(estimated, truth);
    let rates = matches
        .iter()
        .map(|m| {
            Mode::ALL.map(|mode| {
                support_rates(
                    estimated.factor(mode).column(m.estimated).as_slice(),
                    truth.factor(mode).column(m.truth).as_slice(),
                )
            })
        })
        .collect();
    Ok(RecoveryMetrics { matches, rates, flags })
}

/// `‖x̂ − x_signal‖² / npq`.
pub fn signal_mse(estimated: &Tensor3, signal: &Tensor3) -> Result<f64> {
    if estimated.dims() != signal.dims() {
        return Err(HopcaError::dim(format!("{:?} vs {:?}", estimated.dims(), signal.dims())));
    }
    Ok(estimated.sub(signal).frob_norm_sq() / signal.len() as f64)
}

/// Methods traced by [`roc_sweep`]. Grid values are relative levels
/// `t ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RocMethod {
    /// Sparse CP-TPA with lasso level `t·max|contraction|` on the flagged modes.
    SparseCpTpa { sparse_modes: [bool; 3] },
    /// CP-ALS factors with entries `|u| ≤ t·max|u|` zeroed per column.
    NaiveCp,
    /// HOSVD factors (ranks `K,K,K`) thresholded the same way.
    NaiveTucker,
}

impl RocMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RocMethod::SparseCpTpa { .. } => "sparse_cp_tpa",
            RocMethod::NaiveCp => "naive_cp",
            RocMethod::NaiveTucker => "naive_tucker",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub lambda: f64,
    pub mode: Mode,
    /// Index of the true component.
    pub component: usize,
    pub tp: f64,
    pub fp: f64,
}

/// Zeroes entries with `|u| ≤ t·max|u|` in each column.
pub fn naive_threshold(model: &CpModel, t: f64) -> CpModel {
    let mut out = model.clone();
    for m in Mode::ALL {
        let f = out.factor_mut(m);
        for mut col in f.column_iter_mut() {
            let cut = t * col.amax();
            col.apply(|v| {
                if v.abs() <= cut {
                    *v = 0.0
                }
            });
        }
    }
    out
}

fn rates_to_points(lambda: f64, metrics: &RecoveryMetrics, out: &mut Vec<RocPoint>) {
    for (m, r) in metrics.matches.iter().zip(&metrics.rates) {
        for mode in Mode::ALL {
            let rate = r[mode.index()];
            out.push(RocPoint { lambda, mode, component: m.truth, tp: rate.tp, fp: rate.fp });
        }
    }
}

/// Support recovery along a grid of relative penalty levels.
pub fn roc_sweep(x: &Tensor3, truth: &CpModel, method: RocMethod, grid: &[f64], cfg: &SolverConfig) -> Result<Vec<RocPoint>> {
    if grid.is_empty() {
        return Err(HopcaError::arg("grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(HopcaError::arg("grid must be non-negative and strictly increasing"));
    }
    let k = truth.k();
    let mut out = Vec::new();
    match method {
        RocMethod::SparseCpTpa { sparse_modes } => {
            for &t in grid {
                let pen = PenaltySpec {
                    modes: sparse_modes.map(|on| {
                        if on {
                            ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Relative(t) }
                        } else {
                            ModePenalty::none()
                        }
                    }),
                };
                let (model, _) = sparse_cp_tpa(x, k, &pen, cfg)?;
                rates_to_points(t, &support_metrics(&model, truth)?, &mut out);
            }
        }
        RocMethod::NaiveCp | RocMethod::NaiveTucker => {
            let base = if method == RocMethod::NaiveCp {
                cp_als(x, k, cfg)?.0
            } else {
                let ranks = x.dims().map(|n| k.min(n));
                hosvd(x, ranks)?.0.as_cp_columns()
            };
            for &t in grid {
                rates_to_points(t, &support_metrics(&naive_threshold(&base, t), truth)?, &mut out);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_rates() {
        let truth = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        let est = [0.5, 0.1, 0.0, 0.0, 0.7, 0.0];
        let r = support_rates(&est, &truth);
        assert!((r.tp - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.fp - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_and_dense_supports() {
        let truth = [1.0, 0.0, -1.0, 0.0];
        assert_eq!(support_rates(&truth, &truth), Rates { tp: 1.0, fp: 0.0 });
        assert_eq!(support_rates(&[1.0; 4], &truth), Rates { tp: 1.0, fp: 1.0 });
    }

    #[test]
    fn naive_threshold_extremes() {
        let m = CpModel::new(
            crate::tensor::Matrix::from_column_slice(3, 1, &[0.6, -0.8, 0.0]),
            crate::tensor::Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            crate::tensor::Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(naive_threshold(&m, 0.0).u.as_slice(), &[0.6, -0.8, 0.0]);
        assert_eq!(naive_threshold(&m, 0.75).u.as_slice(), &[0.0, -0.8, 0.0]);
        assert!(naive_threshold(&m, 1.0).u.iter().all(|v| *v == 0.0));
    }
}
