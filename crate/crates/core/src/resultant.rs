//! Resultant matrices of several binary forms and the two-layer ideal.
//!
//! For forms `q_1, ..., q_s` of degrees `n_i`, the matrix `R_l` has `l + 1`
//! columns and, for each nonzero `q_i`, `max(0, l - n_i + 1)` rows holding
//! the coefficients of `q_i` shifted right by `0, 1, ...`. The forms share a
//! common factor of degree at least `m` iff `R_{n_* + n^* - m}` has rank
//! below `n_* + n^* - 2m + 2`, so the minors of that size generate the
//! condition.

use std::sync::Arc;

use serde::Serialize;

use crate::decomp::{profile, s_decompose, DecompProfile};
use crate::idealgen::IdealGenerators;
use crate::polyring::{coefficient_vars, MultiPoly, PolyMatrix};
use crate::{Error, Result};

/// Origin of one resultant row: which input form, shifted by how much.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RowSource {
    pub poly: usize,
    pub shift: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultantMatrix {
    pub l: usize,
    pub matrix: PolyMatrix,
    pub row_provenance: Vec<RowSource>,
}

fn is_zero_form(q: &[MultiPoly]) -> bool {
    q.iter().all(MultiPoly::is_zero)
}

/// Builds `R_l` from coefficient sequences (a form of degree `n` is given by
/// its `n + 1` coefficients, leading power of `x` first). Zero forms add no
/// rows.
pub fn build_resultant(polys: &[Vec<MultiPoly>], l: usize) -> Result<ResultantMatrix> {
    let vars: Arc<[String]> = polys
        .iter()
        .find(|q| !is_zero_form(q))
        .map(|q| q[0].vars().clone())
        .ok_or(Error::AllZero)?;
    let zero = MultiPoly::zero(vars.clone());
    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for (idx, q) in polys.iter().enumerate() {
        if is_zero_form(q) {
            continue;
        }
        let n = q.len() - 1;
        if l < n {
            continue;
        }
        for shift in 0..=l - n {
            let mut row = vec![zero.clone(); l + 1];
            for (j, c) in q.iter().enumerate() {
                row[shift + j] = c.clone();
            }
            rows.push(row);
            provenance.push(RowSource { poly: idx, shift });
        }
    }
    let matrix = if rows.is_empty() {
        PolyMatrix::new(0, l + 1, vars, Vec::new())?
    } else {
        PolyMatrix::from_rows(vars, rows)?
    };
    Ok(ResultantMatrix {
        l,
        matrix,
        row_provenance: provenance,
    })
}

/// Parameters of the two-layer ideal for the architecture
/// `((k1, k2), (s1, 1))`.
///
/// `I_1` is generated by the `size1`-minors of `R_{l1}` over all nonzero
/// slots, with `l1 = n_* + n^* - m`, `size1 = n_* + n^* - 2m + 2` and
/// `m = k2 - 1`. `I_2` is generated by the `size2`-minors of `R_{l2}` over
/// the `r` slots of top degree, `l2 = 2n^* - m`, `size2 = 2n^* - 2m + 2`; it
/// is only needed when `1 < r < ` (number of nonzero slots).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoLayerIdealRecipe {
    pub k1: usize,
    pub k2: usize,
    pub s1: usize,
    pub k: usize,
    pub m: usize,
    pub profile: DecompProfile,
    pub l1: usize,
    pub size1: usize,
    pub l2: usize,
    pub size2: usize,
    pub i2_active: bool,
    /// Some slot is a constant (degree 0).
    pub has_constant_slots: bool,
}

impl TwoLayerIdealRecipe {
    pub fn new(k1: usize, k2: usize, s1: usize) -> Result<Self> {
        if k1 < 2 || k2 < 2 || s1 < 2 {
            return Err(Error::NotReduced(format!("(({k1},{k2}),({s1},1))")));
        }
        let k = k1 + s1 * (k2 - 1);
        let m = k2 - 1;
        let profile = profile(k, s1);
        let (hi, lo) = (profile.n_star_hi, profile.n_star_lo);
        let l1 = lo + hi - m;
        let l2 = 2 * hi - m;
        let i2_active = profile.r > 1 && profile.r < profile.nonzero_slots();
        let has_constant_slots = profile.degrees.iter().any(|d| *d == Some(0));
        Ok(TwoLayerIdealRecipe {
            k1,
            k2,
            s1,
            k,
            m,
            l1,
            size1: l1 + 2 - m,
            l2,
            size2: l2 + 2 - m,
            i2_active,
            has_constant_slots,
            profile,
        })
    }

    /// The slot forms of the generic filter `(c_0, ..., c_{k-1})`.
    pub fn slot_forms(&self, vars: &Arc<[String]>) -> Vec<Vec<MultiPoly>> {
        let coeffs: Vec<MultiPoly> = (0..self.k).map(|i| MultiPoly::var(vars.clone(), i)).collect();
        s_decompose(&coeffs, self.s1)
    }

    /// `R_{l1}` and, when `I_2` is active, `R_{l2}`.
    pub fn matrices(&self, vars: &Arc<[String]>) -> Result<(ResultantMatrix, Option<ResultantMatrix>)> {
        let slots = self.slot_forms(vars);
        let r1 = build_resultant(&slots, self.l1)?;
        let r2 = if self.i2_active {
            Some(build_resultant(&slots[..self.profile.r], self.l2)?)
        } else {
            None
        };
        Ok((r1, r2))
    }

    pub fn label(&self) -> String {
        format!("two_layer({},{};{})", self.k1, self.k2, self.s1)
    }
}

/// Generators of the two-layer ideal `I_1 + I_2` in the variables
/// `c_0, ..., c_{k-1}`.
pub fn two_layer_ideal(k1: usize, k2: usize, s1: usize) -> Result<IdealGenerators> {
    let recipe = TwoLayerIdealRecipe::new(k1, k2, s1)?;
    let vars = coefficient_vars(recipe.k);
    let (r1, r2) = recipe.matrices(&vars)?;
    let mut ideal = IdealGenerators::empty(vars);
    let label = recipe.label();
    ideal.extend(r1.matrix.minors(recipe.size1), &format!("{label}/I1"));
    let mut enumerated = minor_count(&r1, recipe.size1);
    if let Some(r2) = r2 {
        ideal.extend(r2.matrix.minors(recipe.size2), &format!("{label}/I2"));
        enumerated += minor_count(&r2, recipe.size2);
    }
    ideal.pre_dedup_count = enumerated;
    Ok(ideal)
}

/// Number of `size`-minors of the matrix, zero ones included.
fn minor_count(r: &ResultantMatrix, size: usize) -> usize {
    let binom = |n: usize, k: usize| -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    };
    binom(r.matrix.rows(), size) * binom(r.matrix.cols(), size)
}
