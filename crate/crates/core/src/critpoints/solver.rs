use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::WeightedDistanceProblem;
use crate::polyring::MultiPoly;
use crate::{Error, Result};

const MAX_ITERS: usize = 100;
const RESIDUAL_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-8;
const REAL_TOL: f64 = 1e-8;
const SINGULAR_TOL: f64 = 1e-8;
const BATCH: usize = 100;

/// A polynomial with float coefficients, laid out for fast evaluation.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl Compiled {
    fn new(p: &MultiPoly, scale: f64) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect();
                (c.to_f64().unwrap_or(f64::NAN) * scale, factors)
            })
            .collect();
        Compiled { terms }
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().fold(Complex64::zero(), |acc, (c, factors)| {
            let mono = factors
                .iter()
                .fold(Complex64::new(*c, 0.0), |t, &(i, e)| t * z[i].powu(e));
            acc + mono
        })
    }
}

/// `f`, its gradient and Hessian, compiled.
struct Hypersurface {
    f: Compiled,
    grad: Vec<Compiled>,
    hess: Vec<Vec<Compiled>>,
}

impl Hypersurface {
    fn new(f: &MultiPoly, scale: f64) -> Self {
        let k = f.nvars();
        let grads: Vec<MultiPoly> = (0..k).map(|i| f.partial_derivative(i)).collect();
        let hess = grads
            .iter()
            .map(|g| (0..k).map(|j| Compiled::new(&g.partial_derivative(j), scale)).collect())
            .collect();
        Hypersurface {
            f: Compiled::new(f, scale),
            grad: grads.iter().map(|g| Compiled::new(g, scale)).collect(),
            hess,
        }
    }
}

/// The Lagrange system `f(w) = 0, T (w - u) - lambda grad f(w) = 0` in a
/// normalized frame: `||u|| = 1`, `max |T_ij| = 1`, `max |coef f| = 1`.
struct LagrangeSystem {
    k: usize,
    t: DMatrix<Complex64>,
    u: DVector<Complex64>,
    surface: Hypersurface,
}

impl LagrangeSystem {
    fn residual(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        let k = self.k;
        let w: Vec<Complex64> = z.iter().take(k).copied().collect();
        let lambda = z[k];
        let wv = DVector::from_column_slice(&w);
        let tw = &self.t * (wv - &self.u);
        let mut out = DVector::zeros(k + 1);
        out[0] = self.surface.f.eval(&w);
        for i in 0..k {
            out[i + 1] = tw[i] - lambda * self.surface.grad[i].eval(&w);
        }
        out
    }

    fn jacobian(&self, z: &DVector<Complex64>) -> DMatrix<Complex64> {
        let k = self.k;
        let w: Vec<Complex64> = z.iter().take(k).copied().collect();
        let lambda = z[k];
        let mut j = DMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            let g = self.surface.grad[i].eval(&w);
            j[(0, i)] = g;
            j[(i + 1, k)] = -g;
            for c in 0..k {
                j[(i + 1, c)] = self.t[(i, c)] - lambda * self.surface.hess[i][c].eval(&w);
            }
        }
        j
    }

    fn gradient_norm(&self, w: &[Complex64]) -> f64 {
        self.surface
            .grad
            .iter()
            .map(|g| g.eval(w).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `grad f(w)` is not negligible, so the point is on the smooth locus.
    fn is_smooth(&self, z: &DVector<Complex64>) -> bool {
        let w: Vec<Complex64> = z.iter().take(self.k).copied().collect();
        let size = w.iter().map(|c| c.norm()).fold(1.0, f64::max);
        self.gradient_norm(&w) >= SINGULAR_TOL * size
    }

    /// Least-squares multiplier for a given `w`.
    fn initial_lambda(&self, w: &DVector<Complex64>) -> Complex64 {
        let ws: Vec<Complex64> = w.iter().copied().collect();
        let g = DVector::from_fn(self.k, |i, _| self.surface.grad[i].eval(&ws));
        let r = &self.t * (w - &self.u);
        let denom = g.norm_squared();
        if denom == 0.0 {
            return Complex64::zero();
        }
        g.dotc(&r) / denom
    }

    /// Damped Newton from `z`. Returns the refined point and its residual.
    fn newton(&self, mut z: DVector<Complex64>) -> Option<(DVector<Complex64>, f64)> {
        let mut f = self.residual(&z);
        let mut norm = f.norm();
        for _ in 0..MAX_ITERS {
            if norm < RESIDUAL_TOL {
                // one extra step to settle the last digits
                if let Some(step) = self.jacobian(&z).lu().solve(&(-&f)) {
                    let cand = &z + step;
                    let fc = self.residual(&cand);
                    if fc.norm() <= norm {
                        z = cand;
                        norm = fc.norm();
                    }
                }
                return Some((z, norm));
            }
            let step = self.jacobian(&z).lu().solve(&(-&f))?;
            let mut alpha = 1.0;
            loop {
                let cand = &z + &step * Complex64::new(alpha, 0.0);
                let fc = self.residual(&cand);
                let nc = fc.norm();
                if nc.is_finite() && nc <= (1.0 - 1e-4 * alpha) * norm {
                    z = cand;
                    f = fc;
                    norm = nc;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-10 {
                    return None;
                }
            }
            if z.norm() > 1e8 {
                return None;
            }
        }
        (norm < RESIDUAL_TOL).then_some((z, norm))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub w: Vec<Complex64>,
    pub lambda: Complex64,
    /// Residual of the normalized Lagrange system.
    pub residual: f64,
    pub real: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPointReport {
    pub points: Vec<CriticalPoint>,
    pub distinct_count: usize,
    pub real_count: usize,
    pub expected: Option<u64>,
    pub starts_run: usize,
    pub converged: usize,
    pub max_residual: f64,
    pub conjugation_closed: bool,
}

impl CriticalPointReport {
    pub fn shortfall(&self) -> bool {
        self.expected.is_some_and(|e| (self.distinct_count as u64) < e)
    }
}

fn insert_distinct(distinct: &mut Vec<(DVector<Complex64>, f64)>, z: DVector<Complex64>, res: f64) -> bool {
    if distinct.iter().all(|(d, _)| relative_distance(d, &z) >= DEDUP_TOL) {
        distinct.push((z, res));
        true
    } else {
        false
    }
}

fn relative_distance(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn is_real(z: &DVector<Complex64>) -> bool {
    let im = z.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    im / z.norm().max(1.0) < REAL_TOL
}

fn start_point(sys: &LagrangeSystem, seed: u64, index: usize) -> DVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let scale = 1.0 / (2.0 * sys.k as f64).sqrt();
    let w = DVector::from_fn(sys.k, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * scale
    });
    let lambda = sys.initial_lambda(&w);
    let mut z = DVector::zeros(sys.k + 1);
    z.rows_mut(0, sys.k).copy_from(&w);
    z[sys.k] = lambda;
    z
}

/// Multi-start damped Newton on the Lagrange system of `p`. Starts run in
/// batches; once the expected count is reached and no new point appeared in
/// the last 60% of the starts so far, the remaining starts are skipped.
pub fn solve_critical_points(
    p: &WeightedDistanceProblem,
    starts: usize,
    seed: u64,
) -> Result<CriticalPointReport> {
    if p.f.is_zero() || p.f.is_constant() {
        return Err(Error::InvalidInput("hypersurface polynomial is constant".into()));
    }
    if p.f.nvars() != p.k || p.t.nrows() != p.k || p.t.ncols() != p.k || p.u.len() != p.k {
        return Err(Error::DimensionMismatch(format!(
            "problem of size {} with {} variables, T {}x{}, u of length {}",
            p.k,
            p.f.nvars(),
            p.t.nrows(),
            p.t.ncols(),
            p.u.len()
        )));
    }
    let sigma = if p.f.is_homogeneous() && p.u.norm() > 0.0 {
        p.u.norm()
    } else {
        1.0
    };
    let tau = p.t.amax().max(f64::MIN_POSITIVE);
    let coef_max = p
        .f
        .terms()
        .map(|(_, c)| c.to_f64().unwrap_or(f64::INFINITY).abs())
        .fold(0.0, f64::max);
    let degree = p.f.total_degree().unwrap_or(0) as i32;
    let to_c = |x: f64| Complex64::new(x, 0.0);
    let sys = LagrangeSystem {
        k: p.k,
        t: p.t.map(|x| to_c(x / tau)),
        u: p.u.map(|x| to_c(x / sigma)),
        surface: Hypersurface::new(&p.f, 1.0 / coef_max),
    };

    let mut distinct: Vec<(DVector<Complex64>, f64)> = Vec::new();
    let mut converged = 0usize;
    let mut last_new = 0usize;
    let mut run = 0usize;
    while run < starts {
        let end = (run + BATCH).min(starts);
        let results: Vec<Option<(DVector<Complex64>, f64)>> = (run..end)
            .into_par_iter()
            .map(|i| sys.newton(start_point(&sys, seed, i)))
            .collect();
        for (offset, r) in results.into_iter().enumerate() {
            let Some((z, res)) = r else { continue };
            if !sys.is_smooth(&z) {
                continue;
            }
            converged += 1;
            if insert_distinct(&mut distinct, z.clone(), res) {
                last_new = run + offset + 1;
                // real data: the conjugate of a solution is a solution
                if let Some((c, cres)) = sys.newton(z.map(|c| c.conj())) {
                    if sys.is_smooth(&c) {
                        insert_distinct(&mut distinct, c, cres);
                    }
                }
            }
        }
        run = end;
        let saturated = p.expected.is_some_and(|e| distinct.len() as u64 == e);
        if saturated && (last_new as f64) <= 0.4 * run as f64 {
            break;
        }
    }

    let conjugation_closed = distinct.iter().all(|(z, _)| {
        let conj = z.map(|c| c.conj());
        distinct
            .iter()
            .any(|(d, _)| relative_distance(d, &conj) < DEDUP_TOL)
    });
    // back to the original frame: w = sigma w', lambda = lambda' tau / (c sigma^(d-2))
    let lambda_scale = tau * coef_max / sigma.powi(degree - 2);
    let mut points: Vec<CriticalPoint> = distinct
        .iter()
        .map(|(z, res)| CriticalPoint {
            w: z.iter().take(p.k).map(|c| c * sigma).collect(),
            lambda: z[p.k] * lambda_scale,
            residual: *res,
            real: is_real(z),
        })
        .collect();
    points.sort_by(|a, b| {
        let key = |c: &CriticalPoint| -> Vec<f64> {
            c.w.iter().flat_map(|z| [z.re, z.im]).collect()
        };
        (!a.real)
            .cmp(&!b.real)
            .then_with(|| {
                key(a)
                    .iter()
                    .zip(key(b).iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let max_residual = points.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(CriticalPointReport {
        distinct_count: points.len(),
        real_count: points.iter().filter(|c| c.real).count(),
        points,
        expected: p.expected,
        starts_run: run,
        converged,
        max_residual,
        conjugation_closed,
    })
}
