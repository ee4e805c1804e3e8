//! Block-coordinate alternation shared by the power-type rank-one solvers
//! (TPA, Sparse CP-TPA, general penalties, Generalized CP, tensor FPCA).
//!
//! Each sweep updates `u`, `v`, `w` in turn and records the objective after
//! every update. A sweep is converged when no factor direction (the factor
//! scaled to unit norm) moved by more than `tol` in any coordinate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{leading_left_singular, normalized};
use crate::model::{Init, SolverConfig};
use crate::tensor::{matricize, Mode, Tensor3, Vector};

pub(crate) struct Alternation {
    pub factors: [Vector; 3],
    pub sweeps: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
    /// The mode whose update produced a zero factor, if any.
    pub zeroed: Option<Mode>,
}

/// Result of a single factor update.
pub(crate) enum Step {
    Factor(Vector),
    /// The update produced the zero vector.
    Zero,
}

pub(crate) fn direction_change(new: &Vector, old: &Vector) -> f64 {
    match (normalized(new), normalized(old)) {
        (Some(a), Some(b)) => (a - b).amax(),
        _ => f64::INFINITY,
    }
}

pub(crate) fn alternate(
    init: [Vector; 3],
    cfg: &SolverConfig,
    mut update: impl FnMut(Mode, &[Vector; 3]) -> Step,
    objective: impl Fn(&[Vector; 3]) -> f64,
) -> Alternation {
    let mut factors = init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iter {
        sweeps += 1;
        let previous = factors.clone();
        for mode in Mode::ALL {
            match update(mode, &factors) {
                Step::Factor(f) => factors[mode.index()] = f,
                Step::Zero => {
                    for f in factors.iter_mut() {
                        f.fill(0.0);
                    }
                    return Alternation { factors, sweeps, converged: true, trace, zeroed: Some(mode) };
                }
            }
            trace.push(objective(&factors));
        }
        let delta = Mode::ALL
            .iter()
            .map(|m| direction_change(&factors[m.index()], &previous[m.index()]))
            .fold(0.0, f64::max);
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    Alternation { factors, sweeps, converged, trace, zeroed: None }
}

/// Leading left singular vector of the mode-`m` unfolding.
pub(crate) fn leading_vector(x: &Tensor3, mode: Mode) -> Vector {
    let s = leading_left_singular(&matricize(x, mode), 1);
    s.vectors.column(0).into_owned()
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    loop {
        let v = Vector::from_fn(len, |_, _| StandardNormal.sample(rng));
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

pub(crate) fn component_rng(cfg: &SolverConfig, component: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(component as u64);
    rng
}

/// Starting triple: `u` is left empty (zero) and filled by the first update;
/// `v` and `w` come from the configured initialization.
pub(crate) fn initial_triple(x: &Tensor3, cfg: &SolverConfig, rng: &mut ChaCha8Rng) -> [Vector; 3] {
    let [n, p, q] = x.dims();
    match cfg.init {
        Init::Hosvd => {
            let v = leading_vector(x, Mode::Two);
            let w = leading_vector(x, Mode::Three);
            [Vector::zeros(n), v, w]
        }
        Init::Random => [Vector::zeros(n), random_unit(rng, p), random_unit(rng, q)],
    }
}
