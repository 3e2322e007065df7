//! Critical points of quadratic-loss training on hypersurface neurovarieties.
//!
//! Training a network with end-to-end filter `w` on data `(X, Y)` with the
//! squared loss equals, up to a constant, minimizing `(w - u)^T T (w - u)`
//! over the neurovariety, with `T = psi(X X^T)`. For a hypersurface `f = 0`
//! the critical points solve a square Lagrange system, which is attacked by
//! multi-start Newton; for generic data their number is the generic ED
//! degree of the architecture.

mod solver;
mod training;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::idealgen::vanishing_generators;
use crate::lcn::Architecture;
use crate::polyring::MultiPoly;
use crate::Result;

pub use solver::{solve_critical_points, CriticalPoint, CriticalPointReport};
pub use training::{
    gaussian_training_data, input_dim, loss_offset, loss_quadratic_form, network_output, psi_map,
    training_loss, training_reduce,
};

/// Minimize `(w - u)^T T (w - u)` subject to `f(w) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDistanceProblem {
    pub k: usize,
    pub t: DMatrix<f64>,
    pub u: DVector<f64>,
    pub f: MultiPoly,
    /// Number of critical points to expect, when known.
    pub expected: Option<u64>,
}

/// Unweighted distance to the `2 x 2` rank-one matrices `AD - BC = 0` from
/// a random Gaussian (hence full-rank) point: two critical points, the
/// truncated singular value decompositions.
pub fn eckart_young_problem(seed: u64) -> Result<WeightedDistanceProblem> {
    let arch = Architecture::new(vec![2, 2], vec![2, 1])?;
    let f = vanishing_generators(&arch)?.generators.remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
    Ok(WeightedDistanceProblem {
        k: 4,
        t: DMatrix::identity(4, 4),
        u,
        f,
        expected: Some(2),
    })
}

/// Training-derived problem for `arch` with `d_l` outputs and Gaussian data
/// of `d0 + 5` samples.
pub fn training_problem(arch: &Architecture, d_l: usize, data_seed: u64) -> Result<WeightedDistanceProblem> {
    let d0 = input_dim(&crate::lcn::reduce_arch(arch), d_l);
    let (x, y) = gaussian_training_data(&crate::lcn::reduce_arch(arch), d_l, d0 + 5, data_seed);
    training_reduce(&x, &y, arch)
}
