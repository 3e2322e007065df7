use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::WeightedDistanceProblem;
use crate::eddegree::generic_ed_degree;
use crate::idealgen::vanishing_generators;
use crate::lcn::{reduce_arch, Architecture};
use crate::{Error, Result};

/// `psi(M)_{ij} = sum_{m < d_l} M_{i + s m, j + s m}` for a `d0 x d0` matrix
/// with `d0 = k + (d_l - 1) s`.
pub fn psi_map(m: &DMatrix<f64>, k: usize, s: usize, d_l: usize) -> Result<DMatrix<f64>> {
    if d_l == 0 || k == 0 {
        return Err(Error::InvalidInput("psi needs k >= 1 and d_L >= 1".into()));
    }
    let d0 = k + (d_l - 1) * s;
    if m.nrows() != d0 || m.ncols() != d0 {
        return Err(Error::DimensionMismatch(format!(
            "psi expects a {d0}x{d0} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = DMatrix::zeros(k, k);
    for r in 0..d_l {
        out += m.view((r * s, r * s), (k, k));
    }
    Ok(out)
}

/// Input width `d0 = k + (d_L - 1) s` of a network with end-to-end filter
/// size `k`, total stride `s` and `d_L` outputs.
pub fn input_dim(arch: &Architecture, d_l: usize) -> usize {
    arch.output_size() + (d_l - 1) * arch.total_stride()
}

/// `alpha_w(X)`: output row `i` is `sum_j w_j X[i s + j, :]`.
pub fn network_output(w: &[f64], s: usize, d_l: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(d_l, x.ncols());
    for i in 0..d_l {
        for (j, wj) in w.iter().enumerate() {
            let contrib = x.row(i * s + j) * *wj;
            let mut row = out.row_mut(i);
            row += contrib;
        }
    }
    out
}

/// `||alpha_w(X) - Y||_F^2`.
pub fn training_loss(w: &[f64], s: usize, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (network_output(w, s, y.nrows(), x) - y).norm_squared()
}

/// Gaussian inputs `X` (`d0 x N`) and labels `Y` (`d_L x N`).
pub fn gaussian_training_data(
    arch: &Architecture,
    d_l: usize,
    n: usize,
    seed: u64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d0 = input_dim(arch, d_l);
    let mut draw = |r: usize, c: usize| -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
    };
    let x = draw(d0, n);
    let y = draw(d_l, n);
    (x, y)
}

/// Quadratic part `T = psi(X X^T)` and linear part `b` of the training
/// loss in the end-to-end filter, so that
/// `loss(w) = w^T T w - 2 w^T b + ||Y||^2`.
pub fn loss_quadratic_form(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    k: usize,
    s: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d_l = y.nrows();
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} samples, Y has {}",
            x.ncols(),
            y.ncols()
        )));
    }
    let t = psi_map(&(x * x.transpose()), k, s, d_l)?;
    let yx = y * x.transpose();
    let b = DVector::from_fn(k, |j, _| (0..d_l).map(|i| yx[(i, i * s + j)]).sum());
    Ok((t, b))
}

/// Rewrites training of `arch` on `(X, Y)` as the weighted distance problem
/// `min (w - u)^T T (w - u)` over the neurovariety, which must be a
/// hypersurface.
pub fn training_reduce(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    arch: &Architecture,
) -> Result<WeightedDistanceProblem> {
    let reduced = reduce_arch(arch);
    let k = reduced.output_size();
    let s = reduced.total_stride();
    let d_l = y.nrows();
    let d0 = input_dim(&reduced, d_l);
    if x.nrows() != d0 {
        return Err(Error::DimensionMismatch(format!(
            "X must have {d0} rows for {d_l} outputs, got {}",
            x.nrows()
        )));
    }
    if x.ncols() < d0 {
        return Err(Error::RankDeficient);
    }
    if reduced.dimension() + 1 != k {
        return Err(Error::Unsupported(format!(
            "non-hypersurface neurovariety: {reduced} has codimension {}",
            k - reduced.dimension()
        )));
    }
    let gens = vanishing_generators(&reduced)?;
    if gens.len() != 1 {
        return Err(Error::Unsupported(format!(
            "expected one defining polynomial for {reduced}, found {}",
            gens.len()
        )));
    }
    let gram = x * x.transpose();
    if gram.clone().cholesky().is_none() {
        return Err(Error::RankDeficient);
    }
    let (t, b) = loss_quadratic_form(x, y, k, s)?;
    let u = t.clone().cholesky().ok_or(Error::RankDeficient)?.solve(&b);
    let expected = generic_ed_degree(reduced.filter_sizes())?;
    Ok(WeightedDistanceProblem {
        k,
        t,
        u,
        f: gens.generators[0].clone(),
        expected: Some(expected.try_into().map_err(|_| {
            Error::Unsupported("expected count exceeds u64".into())
        })?),
    })
}

/// The constant `C` with `loss(w) = (w - u)^T T (w - u) + C`.
pub fn loss_offset(p: &WeightedDistanceProblem, y: &DMatrix<f64>) -> f64 {
    y.norm_squared() - p.u.dot(&(&p.t * &p.u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_matrix(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn psi_of_identity_and_single_window() {
        let (k, s, d_l) = (4, 3, 5);
        let d0 = k + (d_l - 1) * s;
        let psi = psi_map(&DMatrix::identity(d0, d0), k, s, d_l).unwrap();
        assert_eq!(psi, DMatrix::identity(k, k) * d_l as f64);
        let m = random_matrix(k, k, 1);
        assert_eq!(psi_map(&m, k, 7, 1).unwrap(), m);
        assert!(psi_map(&m, k, 2, 2).is_err());
    }

    #[test]
    fn psi_entries_by_definition() {
        let (k, s, d_l) = (3, 2, 3);
        let d0 = k + (d_l - 1) * s;
        let m = random_matrix(d0, d0, 2);
        let psi = psi_map(&m, k, s, d_l).unwrap();
        for i in 0..k {
            for j in 0..k {
                let direct: f64 = (0..d_l).map(|r| m[(i + s * r, j + s * r)]).sum();
                assert_eq!(psi[(i, j)], direct);
            }
        }
    }

    #[test]
    fn single_output_is_least_squares() {
        let a = Architecture::new(vec![2, 2], vec![2, 1]).unwrap();
        let (x, y) = gaussian_training_data(&a, 1, 12, 3);
        let (t, b) = loss_quadratic_form(&x, &y, 4, 2).unwrap();
        assert!((t - &x * x.transpose()).norm() < 1e-12);
        assert!((b - &x * y.transpose()).norm() < 1e-12);
    }

    #[test]
    fn loss_identity() {
        for (ks, ss) in [(vec![2, 2], vec![2, 1]), (vec![3, 2], vec![2, 1])] {
            let a = Architecture::new(ks, ss).unwrap();
            let d0 = input_dim(&a, 3);
            let (x, y) = gaussian_training_data(&a, 3, d0 + 5, 11);
            let p = training_reduce(&x, &y, &a).unwrap();
            let c = loss_offset(&p, &y);
            let w = random_matrix(p.k, 20, 5);
            for col in w.column_iter() {
                let wv: Vec<f64> = col.iter().copied().collect();
                let loss = training_loss(&wv, a.total_stride(), &x, &y);
                let diff = col - &p.u;
                let quad = diff.dot(&(&p.t * &diff)) + c;
                assert!((loss - quad).abs() <= 1e-9 * loss.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_non_hypersurface_and_rank_deficient() {
        let a = Architecture::new(vec![5, 2], vec![3, 1]).unwrap();
        let (x, y) = gaussian_training_data(&a, 3, 20, 1);
        assert!(matches!(training_reduce(&x, &y, &a), Err(Error::Unsupported(_))));
        let a = Architecture::new(vec![2, 2], vec![2, 1]).unwrap();
        let d0 = input_dim(&a, 3);
        let (x, y) = gaussian_training_data(&a, 3, d0 - 1, 1);
        assert_eq!(training_reduce(&x, &y, &a), Err(Error::RankDeficient));
    }

    proptest! {
        #[test]
        fn psi_linear_and_symmetric(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let (k, s, d_l) = (3, 2, 4);
            let d0 = k + (d_l - 1) * s;
            let m = random_matrix(d0, d0, seed);
            let n = random_matrix(d0, d0, seed.wrapping_add(1));
            let lhs = psi_map(&(&m * a + &n * b), k, s, d_l).unwrap();
            let rhs = psi_map(&m, k, s, d_l).unwrap() * a + psi_map(&n, k, s, d_l).unwrap() * b;
            prop_assert!((lhs - rhs).amax() < 1e-12);
            let sym = &m + m.transpose();
            let p = psi_map(&sym, k, s, d_l).unwrap();
            prop_assert_eq!(p.clone(), p.transpose());
        }

        #[test]
        fn psi_preserves_positive_definiteness(seed in any::<u64>()) {
            let (k, s, d_l) = (4, 3, 3);
            let d0 = k + (d_l - 1) * s;
            let g = random_matrix(d0, d0 + 2, seed);
            let spd = &g * g.transpose();
            let p = psi_map(&spd, k, s, d_l).unwrap();
            prop_assert!(p.symmetric_eigenvalues().min() > 0.0);
        }
    }
}
