//! Sampling oracles for generated ideals: exact vanishing on parametrized
//! samples, non-vanishing at random ambient points, the numeric dimension of
//! the parametrization, and rank-one checks on the Segre side.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::idealgen::{clear_denominators, vanishing_generators, IdealGenerators};
use crate::lcn::{
    compose_filters, outer_product, reduce_arch, sample_neuromanifold_f64,
    sample_neuromanifold_with, tensor_to_filter, Architecture, Filter, Tensor,
};
use crate::polyring::{coefficient_vars, display_names, parse_poly, MultiPoly};
use crate::Result;

/// Relative cutoff below which singular values count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub sample: usize,
    pub generator: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub architecture: String,
    pub reduced: String,
    pub samples_tested: usize,
    pub generators_tested: usize,
    pub failures: Vec<Failure>,
    pub jacobian_rank: usize,
    pub expected_dim: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.jacobian_rank == self.expected_dim
    }
}

/// Draws `n` exact samples of the end-to-end filter of `arch`.
pub fn rational_samples(arch: &Architecture, n: usize, seed: u64) -> Vec<Vec<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_neuromanifold_with(arch, &mut rng).1.into_inner())
        .collect()
}

/// `(sample, generator)` pairs where a generator fails to vanish.
pub fn vanishing_failures(gens: &[MultiPoly], samples: &[Vec<BigRational>]) -> Result<Vec<Failure>> {
    let per_sample: Vec<Result<Vec<Failure>>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let ints = clear_denominators(pt);
            let mut out = Vec::new();
            for (j, g) in gens.iter().enumerate() {
                let zero = if g.is_homogeneous() {
                    g.eval_int(&ints)?.is_zero()
                } else {
                    g.eval_at(pt)?.is_zero()
                };
                if !zero {
                    out.push(Failure { sample: i, generator: j });
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_sample {
        all.extend(r?);
    }
    Ok(all)
}

/// Jacobian of `(w_1, ..., w_L) -> w` at the given layer filters. The map is
/// multilinear, so the column for entry `j` of layer `l` is the composition
/// with `w_l` replaced by the unit vector `e_j`.
pub fn parametrization_jacobian(arch: &Architecture, layers: &[Filter<f64>]) -> Result<DMatrix<f64>> {
    let k = arch.output_size();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (l, &kl) in arch.filter_sizes().iter().enumerate() {
        for j in 0..kl {
            let mut varied = layers.to_vec();
            let mut unit = vec![0.0; kl];
            unit[j] = 1.0;
            varied[l] = Filter::new(unit);
            cols.push(compose_filters(arch, &varied)?.into_inner());
        }
    }
    Ok(DMatrix::from_fn(k, cols.len(), |i, j| cols[j][i]))
}

/// Numeric rank: singular values at or above `RANK_TOLERANCE * sigma_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= RANK_TOLERANCE * max).count()
}

/// Rank of the parametrization Jacobian at a random Gaussian sample. A low
/// rank is retried once at a fresh point before it is reported.
pub fn jacobian_rank(arch: &Architecture, seed: u64) -> Result<usize> {
    let expected = arch.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rank = 0;
    for _ in 0..2 {
        let (layers, _) = sample_neuromanifold_f64(arch, &mut rng);
        rank = numeric_rank(&parametrization_jacobian(arch, &layers)?);
        if rank >= expected {
            break;
        }
    }
    Ok(rank)
}

/// Checks the generators of `arch` on `n_samples` exact parametrized samples
/// and the dimension of the parametrization.
pub fn verify_ideal(arch: &Architecture, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let gens = vanishing_generators(arch)?;
    verify_with(arch, &gens, n_samples, seed)
}

pub fn verify_with(
    arch: &Architecture,
    gens: &IdealGenerators,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let samples = rational_samples(arch, n_samples, seed);
    let failures = vanishing_failures(&gens.generators, &samples)?;
    Ok(VerificationReport {
        architecture: arch.to_string(),
        reduced: reduce_arch(arch).to_string(),
        samples_tested: n_samples,
        generators_tested: gens.len(),
        failures,
        jacobian_rank: jacobian_rank(arch, seed)?,
        expected_dim: arch.dimension(),
    })
}

/// Random nonzero ambient rational point, numerators in `[-1e6, 1e6]`,
/// denominators in `[1, 1e6]`, so that accidental coincidences are rare.
pub fn random_ambient_point<R: Rng>(k: usize, rng: &mut R) -> Vec<BigRational> {
    loop {
        let p: Vec<BigRational> = (0..k)
            .map(|_| {
                let num: i64 = rng.random_range(-1_000_000..=1_000_000);
                let den: i64 = rng.random_range(1..=1_000_000);
                BigRational::new(num.into(), den.into())
            })
            .collect();
        if p.iter().any(|x| !x.is_zero()) {
            return p;
        }
    }
}

/// Number of random ambient points (origin excluded) at which some
/// generator is nonzero.
pub fn smoke_nonmembership(arch: &Architecture, n_trials: usize, seed: u64) -> Result<usize> {
    let gens = vanishing_generators(arch)?;
    smoke_with(&gens, n_trials, seed)
}

pub fn smoke_with(gens: &IdealGenerators, n_trials: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<BigRational>> = (0..n_trials)
        .map(|_| random_ambient_point(gens.vars.len(), &mut rng))
        .collect();
    let hits: Vec<Result<bool>> = points.par_iter().map(|p| gens.vanishes_at(p)).collect();
    let mut violations = 0;
    for h in hits {
        if !h? {
            violations += 1;
        }
    }
    Ok(violations)
}

/// True iff every 2x2 minor of every flattening `(i_l) x (rest)` vanishes,
/// i.e. the tensor has rank at most one.
pub fn flattening_minors_vanish(t: &Tensor<BigRational>) -> bool {
    let n = t.data.len();
    for (axis, &dim) in t.shape.iter().enumerate() {
        let rest = n / dim;
        let mut flat = vec![vec![BigRational::zero(); rest]; dim];
        let mut fill = vec![0usize; dim];
        for (idx, v) in t.data.iter().enumerate() {
            let i = t.multi_index(idx)[axis];
            flat[i][fill[i]] = v.clone();
            fill[i] += 1;
        }
        for a in 0..dim {
            for b in a + 1..dim {
                for c in 0..rest {
                    for d in c + 1..rest {
                        let m = &flat[a][c] * &flat[b][d] - &flat[a][d] * &flat[b][c];
                        if !m.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// On `n` samples: the outer product of the layer filters has rank one, and
/// the linear Segre map sends it to the composed filter.
pub fn segre_consistency(arch: &Architecture, n: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let (layers, w) = sample_neuromanifold_with(arch, &mut rng);
        let t = outer_product(&layers);
        if !flattening_minors_vanish(&t) || tensor_to_filter(arch, &t)? != w {
            return Ok(false);
        }
    }
    Ok(true)
}

const RADICAL_5_2: [&str; 5] = [
    "C*E*G - B*F*G - C*D*H + A*F*H",
    "C*E*F - B*F^2 - C^2*H",
    "C*D*F - A*F^2 - C^2*G",
    "B*D*F - A*E*F - B*C*G + A*C*H",
    "B*D*E*G - A*E^2*G - B^2*G^2 - B*D^2*H + A*D*E*H + 2*A*B*G*H - A^2*H^2",
];

const RADICAL_3_2_2: [&str; 13] = [
    "D*G - C*H",
    "D*F - B*H",
    "C*F - B*G",
    "F*G*H - E*H^2 - F^2*I + D*H*I",
    "B*G*H - A*H^2 - B*F*I",
    "D*E*H - A*H^2 - D^2*I",
    "C*E*H - A*G*H - C*D*I",
    "B*E*H - A*F*H - B*D*I",
    "B*C*H - A*D*H - B^2*I",
    "C*E*G - A*G^2 - C^2*I",
    "B*E*G - A*F*G - B*C*I",
    "B*E*F - A*F^2 - B^2*I",
    "B*C*D - A*D^2 - B^2*E + A*B*F",
];

/// Known minimal generators of the vanishing ideal for
/// `((5,2),(3,1))` and `((3,2,2),(2,2,1))`, in `c`-indexed variables.
pub fn reference_radical_generators(arch: &Architecture) -> Option<Vec<MultiPoly>> {
    let reduced = reduce_arch(arch);
    let texts: &[&str] = match (reduced.filter_sizes(), reduced.strides()) {
        ([5, 2], [3, 1]) => &RADICAL_5_2,
        ([3, 2, 2], [2, 2, 1]) => &RADICAL_3_2_2,
        _ => return None,
    };
    let k = reduced.output_size();
    let letters = display_names(k).into();
    let vars = coefficient_vars(k);
    Some(
        texts
            .iter()
            .map(|t| {
                parse_poly(t, &letters)
                    .and_then(|p| p.with_vars(vars.clone()))
                    .expect("reference generators parse")
            })
            .collect(),
    )
}

/// Outcome of comparing generated and reference generators on samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceCheck {
    pub points: usize,
    /// Samples at which all generated polynomials vanish.
    pub ours_vanish: usize,
    /// Of those, samples at which all reference polynomials vanish as well.
    pub reference_vanish: usize,
}

pub fn compare_with_reference(
    arch: &Architecture,
    n_points: usize,
    seed: u64,
) -> Result<Option<ReferenceCheck>> {
    let Some(reference) = reference_radical_generators(arch) else {
        return Ok(None);
    };
    let ours = vanishing_generators(arch)?;
    let samples = rational_samples(arch, n_points, seed);
    let flags: Vec<Result<(bool, bool)>> = samples
        .par_iter()
        .map(|p| {
            let a = ours.vanishes_at(p)?;
            let ints = clear_denominators(p);
            let mut b = true;
            for g in &reference {
                if !g.eval_int(&ints)?.is_zero() {
                    b = false;
                    break;
                }
            }
            Ok((a, a && b))
        })
        .collect();
    let mut check = ReferenceCheck {
        points: n_points,
        ours_vanish: 0,
        reference_vanish: 0,
    };
    for f in flags {
        let (a, b) = f?;
        check.ours_vanish += a as usize;
        check.reference_vanish += b as usize;
    }
    Ok(Some(check))
}

/// All reduced architectures with at most `max_layers` layers, filter sizes
/// in `2..=max_k`, non-final strides in `2..=max_s`, and output size at most
/// `max_out`.
pub fn small_architectures(
    max_layers: usize,
    max_k: usize,
    max_s: usize,
    max_out: usize,
) -> Vec<Architecture> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
    while let Some((ks, ss)) = stack.pop() {
        if !ks.is_empty() {
            let mut strides = ss.clone();
            strides.push(1);
            let arch = Architecture::new(ks.clone(), strides).expect("positive entries");
            if arch.output_size() > max_out {
                continue;
            }
            out.push(arch);
        }
        if ks.len() == max_layers {
            continue;
        }
        for k in 2..=max_k {
            if ks.is_empty() {
                stack.push((vec![k], Vec::new()));
            } else {
                for s in 2..=max_s {
                    let mut nk = ks.clone();
                    nk.push(k);
                    let mut ns = ss.clone();
                    ns.push(s);
                    stack.push((nk, ns));
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.layers(), a.filter_sizes(), a.strides()).cmp(&(b.layers(), b.filter_sizes(), b.strides()))
    });
    out
}
