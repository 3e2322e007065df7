//! Recursive generators for the vanishing locus of an LCN neurovariety.
//!
//! For `L >= 3` layers the neurovariety is the intersection of the variety of
//! the architecture with layers 1 and 2 merged and the two-layer variety
//! splitting off the first layer. The two-layer case is handled by the
//! resultant minors of [`crate::resultant::two_layer_ideal`]. No radicals are
//! taken, so the generators cut out the right set but need not generate the
//! vanishing ideal itself.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::lcn::{reduce_arch, Architecture};
use crate::polyring::{coefficient_vars, MultiPoly, PolyJson};
use crate::resultant::two_layer_ideal;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct IdealGenerators {
    pub vars: Arc<[String]>,
    pub generators: Vec<MultiPoly>,
    pub provenance: Vec<String>,
    /// Minors enumerated over all branches, before removing zeros and
    /// repeats.
    pub pre_dedup_count: usize,
    seen: HashSet<String>,
}

#[derive(Serialize)]
pub struct IdealJson {
    pub vars: Vec<String>,
    pub generators: Vec<PolyJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<String>>,
    pub pre_dedup_count: usize,
}

impl IdealGenerators {
    pub fn empty(vars: Arc<[String]>) -> Self {
        IdealGenerators {
            vars,
            generators: Vec::new(),
            provenance: Vec::new(),
            pre_dedup_count: 0,
            seen: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Adds a generator unless it repeats one already present up to sign and
    /// integer content. Returns whether it was new.
    pub fn push(&mut self, g: MultiPoly, provenance: String) -> bool {
        self.pre_dedup_count += 1;
        if g.is_zero() {
            return false;
        }
        let norm = g.primitive_normalized();
        if !self.seen.insert(norm.to_text()) {
            return false;
        }
        self.generators.push(norm);
        self.provenance.push(provenance);
        true
    }

    pub fn extend<I: IntoIterator<Item = MultiPoly>>(&mut self, gens: I, provenance: &str) {
        for g in gens {
            self.push(g, provenance.to_string());
        }
    }

    /// Union with another generator set over the same variables.
    pub fn union(mut self, other: IdealGenerators) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::VariableMismatch);
        }
        let carried = self.pre_dedup_count + other.pre_dedup_count;
        for (g, p) in other.generators.into_iter().zip(other.provenance) {
            self.push(g, p);
        }
        self.pre_dedup_count = carried;
        Ok(self)
    }

    fn map_provenance(mut self, f: impl Fn(&str) -> String) -> Self {
        self.provenance = self.provenance.iter().map(|p| f(p)).collect();
        self
    }

    /// True iff every generator vanishes exactly at `point`.
    pub fn vanishes_at(&self, point: &[BigRational]) -> Result<bool> {
        if point.len() != self.vars.len() {
            return Err(Error::LengthMismatch {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        if self.generators.iter().all(MultiPoly::is_homogeneous) {
            let ints = clear_denominators(point);
            for g in &self.generators {
                if !g.eval_int(&ints)?.is_zero() {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        for g in &self.generators {
            if !g.eval_at(point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn texts(&self, names: &[String]) -> Vec<String> {
        self.generators.iter().map(|g| g.to_text_with(names)).collect()
    }

    pub fn to_json(&self, with_provenance: bool) -> IdealJson {
        IdealJson {
            vars: self.vars.to_vec(),
            generators: self.generators.iter().map(MultiPoly::to_json).collect(),
            provenance: with_provenance.then(|| self.provenance.clone()),
            pre_dedup_count: self.pre_dedup_count,
        }
    }
}

/// Scales a rational point by the lcm of its denominators. Homogeneous
/// polynomials vanish at the result iff they vanish at the point.
pub fn clear_denominators(point: &[BigRational]) -> Vec<BigInt> {
    let lcm = point
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    point
        .iter()
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect()
}

/// Generators whose common complex zero locus is the neurovariety of `arch`.
/// The architecture is reduced first; a single layer gives the empty list.
pub fn vanishing_generators(arch: &Architecture) -> Result<IdealGenerators> {
    let arch = reduce_arch(arch);
    let k = arch.output_size();
    let ks = arch.filter_sizes();
    let ss = arch.strides();
    match ks.len() {
        1 => Ok(IdealGenerators::empty(coefficient_vars(k))),
        2 => two_layer_ideal(ks[0], ks[1], ss[0]),
        _ => {
            let (k1, s1) = (ks[0], ss[0]);
            if (k - k1) % s1 != 0 {
                return Err(Error::InvalidArchitecture(format!(
                    "internal: {s1} does not divide {} in {arch}",
                    k - k1
                )));
            }
            let mut merged_k = vec![k1 + s1 * (ks[1] - 1)];
            merged_k.extend_from_slice(&ks[2..]);
            let mut merged_s = vec![s1 * ss[1]];
            merged_s.extend_from_slice(&ss[2..]);
            let merged = Architecture::new(merged_k, merged_s)?;
            let (a, b) = rayon::join(
                || vanishing_generators(&merged),
                || two_layer_ideal(k1, (k - k1) / s1 + 1, s1),
            );
            let a = a?.map_provenance(|p| format!("merge(1,2)→{p}"));
            let b = b?.map_provenance(|p| p.replacen("two_layer", "base", 1));
            a.union(b)
        }
    }
}

/// True iff every generator vanishes exactly at `point`.
pub fn check_membership_sample(gens: &IdealGenerators, point: &[BigRational]) -> Result<bool> {
    gens.vanishes_at(point)
}
