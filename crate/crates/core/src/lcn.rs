//! 1D-LCN architectures, filter composition, convolutional matrices and
//! sampling of the neuromanifold.
//!
//! Filters are 0-indexed. An end-to-end filter `w` of size `k` corresponds to
//! the binary form `sum_j w[j] x^(k-1-j) y^j`, so `w[0]` (variable `A`) is the
//! coefficient of the leading power of `x`.

use std::fmt;
use std::ops::{Add, Deref, Mul};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::polyring::MultiPoly;
use crate::{Error, Result};

/// Filter sizes and strides of an `L`-layer network. The last stride is
/// always stored as 1 since it does not affect the end-to-end filter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Architecture {
    filter_sizes: Vec<usize>,
    strides: Vec<usize>,
}

/// Derived quantities of an architecture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArchInfo {
    pub layers: usize,
    pub output_size: usize,
    pub cumulative_strides: Vec<usize>,
    pub total_stride: usize,
    pub reduced: bool,
}

impl Architecture {
    pub fn new(filter_sizes: Vec<usize>, mut strides: Vec<usize>) -> Result<Self> {
        if filter_sizes.is_empty() {
            return Err(Error::InvalidArchitecture("no layers".into()));
        }
        if filter_sizes.len() != strides.len() {
            return Err(Error::InvalidArchitecture(format!(
                "{} filter sizes but {} strides",
                filter_sizes.len(),
                strides.len()
            )));
        }
        if filter_sizes.iter().chain(&strides).any(|&v| v == 0) {
            return Err(Error::InvalidArchitecture(
                "filter sizes and strides must be positive".into(),
            ));
        }
        *strides.last_mut().unwrap() = 1;
        Ok(Architecture {
            filter_sizes,
            strides,
        })
    }

    /// Parses comma-separated literals such as `"3,2,2"` and `"2,2,1"`.
    pub fn parse(filter_sizes: &str, strides: &str) -> Result<Self> {
        Self::new(parse_list(filter_sizes)?, parse_list(strides)?)
    }

    pub fn single_layer(k: usize) -> Result<Self> {
        Self::new(vec![k], vec![1])
    }

    pub fn filter_sizes(&self) -> &[usize] {
        &self.filter_sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn layers(&self) -> usize {
        self.filter_sizes.len()
    }

    /// `S_l = s_1 ... s_{l-1}` for each layer, with `S_1 = 1`.
    pub fn cumulative_strides(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.layers());
        let mut acc = 1;
        for &s in &self.strides {
            out.push(acc);
            acc *= s;
        }
        out
    }

    /// End-to-end filter size `k_1 + sum_{l>=2} (k_l - 1) S_l`.
    pub fn output_size(&self) -> usize {
        self.filter_sizes
            .iter()
            .zip(self.cumulative_strides())
            .map(|(&k, s)| (k - 1) * s)
            .sum::<usize>()
            + 1
    }

    pub fn total_stride(&self) -> usize {
        self.strides.iter().product()
    }

    /// All filter sizes exceed 1 and all strides but the last exceed 1.
    pub fn is_reduced(&self) -> bool {
        self.filter_sizes.iter().all(|&k| k > 1)
            && self.strides[..self.layers() - 1].iter().all(|&s| s > 1)
    }

    /// `k_1 + ... + k_L - (L - 1)`, the dimension of the neuromanifold of a
    /// reduced architecture.
    pub fn dimension(&self) -> usize {
        self.filter_sizes.iter().sum::<usize>() + 1 - self.layers()
    }

    pub fn info(&self) -> ArchInfo {
        ArchInfo {
            layers: self.layers(),
            output_size: self.output_size(),
            cumulative_strides: self.cumulative_strides(),
            total_stride: self.total_stride(),
            reduced: self.is_reduced(),
        }
    }
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("expected a positive integer, got `{t}`")))
        })
        .collect()
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "(({}),({}))",
            join(&self.filter_sizes),
            join(&self.strides)
        )
    }
}

/// Validates an architecture literal and returns it with derived data.
pub fn validate(filter_sizes: Vec<usize>, strides: Vec<usize>) -> Result<(Architecture, ArchInfo)> {
    let arch = Architecture::new(filter_sizes, strides)?;
    let info = arch.info();
    Ok((arch, info))
}

/// Merges layers until the architecture is reduced or has one layer.
///
/// A layer with stride 1 is merged with its successor. A size-1 layer
/// (a scalar) is absorbed into its predecessor, or, when it is the first
/// layer, merged into the second. The merge of layers `i, i+1` uses
/// `k = k_i + s_i (k_{i+1} - 1)` and stride `s_i s_{i+1}`. The output filter
/// size is preserved.
pub fn reduce_arch(arch: &Architecture) -> Architecture {
    let mut k = arch.filter_sizes.clone();
    let mut s = arch.strides.clone();
    loop {
        let n = k.len();
        if n == 1 {
            break;
        }
        let pair = (0..n - 1)
            .find(|&i| s[i] == 1)
            .or_else(|| (1..n).find(|&i| k[i] == 1).map(|i| i - 1))
            .or_else(|| (k[0] == 1).then_some(0));
        let Some(i) = pair else { break };
        k[i] += s[i] * (k[i + 1] - 1);
        s[i] *= s[i + 1];
        k.remove(i + 1);
        s.remove(i + 1);
    }
    Architecture::new(k, s).expect("merging keeps entries positive")
}

/// A filter: a sequence of coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Filter<T>(Vec<T>);

impl<T> Filter<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Filter(entries)
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for Filter<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> From<Vec<T>> for Filter<T> {
    fn from(v: Vec<T>) -> Self {
        Filter(v)
    }
}

/// `pi_s(w) = sum_j w[j] x^(s(k-1-j)) y^(s j)` for symbolic coefficients.
/// The entries of `w` must share a variable list containing `x` and `y` at
/// the given indices.
pub fn pi_s(w: &[MultiPoly], s: usize, x: usize, y: usize) -> Result<MultiPoly> {
    let Some(first) = w.first() else {
        return Err(Error::InvalidInput("empty filter".into()));
    };
    let vars = first.vars().clone();
    let k = w.len();
    let mut out = MultiPoly::zero(vars.clone());
    for (j, c) in w.iter().enumerate() {
        let mut exps = vec![0u32; vars.len()];
        exps[x] = (s * (k - 1 - j)) as u32;
        exps[y] = (s * j) as u32;
        let mono = MultiPoly::from_terms(vars.clone(), [(exps, BigInt::from(1))])?;
        out = out.checked_add(&c.checked_mul(&mono)?)?;
    }
    Ok(out)
}

/// `pi_s` for an integer filter, as a polynomial in the variables `x, y`.
pub fn pi_s_int(w: &[BigInt], s: usize) -> MultiPoly {
    let vars: Arc<[String]> = vec!["x".to_string(), "y".to_string()].into();
    let k = w.len();
    MultiPoly::from_terms(
        vars,
        w.iter().enumerate().map(|(j, c)| {
            (vec![(s * (k - 1 - j)) as u32, (s * j) as u32], c.clone())
        }),
    )
    .expect("two variables")
}

fn upsample<T: Clone + Zero>(w: &[T], factor: usize) -> Vec<T> {
    let mut out = vec![T::zero(); (w.len() - 1) * factor + 1];
    for (j, v) in w.iter().enumerate() {
        out[j * factor] = v.clone();
    }
    out
}

fn convolve<T>(a: &[T], b: &[T]) -> Vec<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// End-to-end filter of the network: the coefficients of
/// `pi_{S_L}(w_L) ... pi_{S_2}(w_2) pi_1(w_1)`.
pub fn compose_filters<T>(arch: &Architecture, layer_filters: &[Filter<T>]) -> Result<Filter<T>>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    if layer_filters.len() != arch.layers() {
        return Err(Error::LengthMismatch {
            expected: arch.layers(),
            got: layer_filters.len(),
        });
    }
    for (w, &k) in layer_filters.iter().zip(arch.filter_sizes()) {
        if w.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: w.len(),
            });
        }
    }
    let strides = arch.cumulative_strides();
    let mut out = layer_filters[0].0.clone();
    for (w, &s) in layer_filters.iter().zip(&strides).skip(1) {
        out = convolve(&out, &upsample(w, s));
    }
    Ok(Filter(out))
}

/// Dense matrix of the convolution with filter `w` and stride `s`:
/// entry `(i, j)` is `w[j - i s]` when that index is in range, else zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub stride: usize,
    pub filter: Vec<T>,
    pub data: Vec<T>,
}

impl<T: Clone + Zero> ConvMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols).map(<[T]>::to_vec).collect()
    }
}

impl<T> ConvMatrix<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    /// `[sum_j w[j] x[i s + j]]_i`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.filter
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (j, w)| {
                        acc + w.clone() * x[i * self.stride + j].clone()
                    })
            })
            .collect())
    }

    /// Dense product `self * inner`.
    pub fn compose(&self, inner: &ConvMatrix<T>) -> Result<Vec<Vec<T>>> {
        if self.cols != inner.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, inner.rows, inner.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..inner.cols)
                    .map(|j| {
                        (0..self.cols).fold(T::zero(), |acc, m| {
                            acc + self.get(i, m).clone() * inner.get(m, j).clone()
                        })
                    })
                    .collect()
            })
            .collect())
    }
}

pub fn conv_matrix<T: Clone + Zero>(w: &[T], stride: usize, d_out: usize) -> ConvMatrix<T> {
    assert!(d_out >= 1 && stride >= 1 && !w.is_empty());
    let k = w.len();
    let cols = k + (d_out - 1) * stride;
    let mut data = vec![T::zero(); d_out * cols];
    for i in 0..d_out {
        for (j, v) in w.iter().enumerate() {
            data[i * cols + i * stride + j] = v.clone();
        }
    }
    ConvMatrix {
        rows: d_out,
        cols,
        stride,
        filter: w.to_vec(),
        data,
    }
}

/// Rational in `[-10, 10] / [1, 10]`.
pub(crate) fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    let num: i64 = rng.random_range(-10..=10);
    let den: i64 = rng.random_range(1..=10);
    BigRational::new(num.into(), den.into())
}

/// Layer filters drawn independently with random rational entries, and the
/// composed end-to-end filter.
pub fn sample_neuromanifold(
    arch: &Architecture,
    seed: u64,
) -> (Vec<Filter<BigRational>>, Filter<BigRational>) {
    sample_neuromanifold_with(arch, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_neuromanifold_with<R: Rng>(
    arch: &Architecture,
    rng: &mut R,
) -> (Vec<Filter<BigRational>>, Filter<BigRational>) {
    let layers: Vec<Filter<BigRational>> = arch
        .filter_sizes()
        .iter()
        .map(|&k| Filter((0..k).map(|_| random_rational(rng)).collect()))
        .collect();
    let w = compose_filters(arch, &layers).expect("sizes match by construction");
    (layers, w)
}

/// Gaussian float layer filters and their composition.
pub fn sample_neuromanifold_f64<R: Rng>(
    arch: &Architecture,
    rng: &mut R,
) -> (Vec<Filter<f64>>, Filter<f64>) {
    let layers: Vec<Filter<f64>> = arch
        .filter_sizes()
        .iter()
        .map(|&k| Filter((0..k).map(|_| rng.sample(StandardNormal)).collect()))
        .collect();
    let w = compose_filters(arch, &layers).expect("sizes match by construction");
    (layers, w)
}

/// Dense order-`L` tensor in row-major order (first index slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for (slot, &n) in idx.iter_mut().zip(&self.shape).rev() {
            *slot = flat % n;
            flat /= n;
        }
        idx
    }
}

/// `w_1 ⊗ ... ⊗ w_L`, a point of the Segre variety.
pub fn outer_product<T>(filters: &[Filter<T>]) -> Tensor<T>
where
    T: Clone + Mul<Output = T>,
{
    let shape: Vec<usize> = filters.iter().map(|f| f.len()).collect();
    let mut data: Vec<T> = filters[0].0.clone();
    for f in &filters[1..] {
        data = data
            .iter()
            .flat_map(|a| f.iter().map(move |b| a.clone() * b.clone()))
            .collect();
    }
    Tensor { shape, data }
}

/// The linear map from `k_1 x ... x k_L` tensors to end-to-end filters whose
/// restriction to rank-one tensors is [`compose_filters`]: entry
/// `(j_1, ..., j_L)` contributes to filter index `sum_l S_l j_l`.
pub fn tensor_to_filter<T>(arch: &Architecture, t: &Tensor<T>) -> Result<Filter<T>>
where
    T: Clone + Zero + Add<Output = T>,
{
    if t.shape != arch.filter_sizes() {
        return Err(Error::DimensionMismatch(format!(
            "tensor shape {:?} vs filter sizes {:?}",
            t.shape,
            arch.filter_sizes()
        )));
    }
    let strides = arch.cumulative_strides();
    let mut out = vec![T::zero(); arch.output_size()];
    for (flat, v) in t.data.iter().enumerate() {
        let pos: usize = t
            .multi_index(flat)
            .iter()
            .zip(&strides)
            .map(|(j, s)| j * s)
            .sum();
        out[pos] = out[pos].clone() + v.clone();
    }
    Ok(Filter(out))
}
