use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exponent vector, one entry per ambient variable.
///
/// Monomials are ordered graded-lexicographically with `c_0` as the most
/// significant variable: higher total degree first, then larger exponent of
/// `c_0`, then of `c_1`, and so on. Under this order `A*D` comes before
/// `B*C`, which is the order used for printing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with arbitrary-precision integer
/// coefficients over an ordered list of named variables.
///
/// Zero coefficients are never stored, so two equal polynomials have equal
/// term maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<[String]>,
    terms: BTreeMap<Monomial, BigInt>,
}

/// Variable list `c0, c1, ..., c{k-1}` used for filter coefficients.
pub fn coefficient_vars(k: usize) -> Arc<[String]> {
    (0..k).map(|i| format!("c{i}")).collect()
}

/// Display names for filter coefficients: `A..Z` when `k <= 26`, otherwise
/// the `c`-indexed names.
pub fn display_names(k: usize) -> Vec<String> {
    if k <= 26 {
        (0..k)
            .map(|i| char::from(b'A' + i as u8).to_string())
            .collect()
    } else {
        (0..k).map(|i| format!("c{i}")).collect()
    }
}

impl MultiPoly {
    pub fn zero(vars: Arc<[String]>) -> Self {
        MultiPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<[String]>, c: BigInt) -> Self {
        let mut p = Self::zero(vars);
        let n = p.nvars();
        p.add_term(Monomial::one(n), c);
        p
    }

    pub fn one(vars: Arc<[String]>) -> Self {
        Self::constant(vars, BigInt::one())
    }

    pub fn var(vars: Arc<[String]>, index: usize) -> Self {
        assert!(index < vars.len(), "variable index out of range");
        let mut p = Self::zero(vars);
        let n = p.nvars();
        p.terms.insert(Monomial::var(n, index), BigInt::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// monomials are summed.
    pub fn from_terms<I>(vars: Arc<[String]>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut p = Self::zero(vars);
        for (exps, c) in terms {
            if exps.len() != p.nvars() {
                return Err(Error::LengthMismatch {
                    expected: p.nvars(),
                    got: exps.len(),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn same_vars(&self, other: &MultiPoly) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    /// Terms in printing order (leading term first).
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> + '_ {
        self.terms.iter().rev()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.last_key_value()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &MultiPoly) -> Result<()> {
        if self.same_vars(other) {
            Ok(())
        } else {
            Err(Error::VariableMismatch)
        }
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    /// Exact product. Fails when the operands use different variable lists.
    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut out = MultiPoly::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.vars.clone());
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn partial_derivative(&self, index: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[index] -= 1;
            out.add_term(Monomial(exps), c * BigInt::from(e));
        }
        out
    }

    /// Gcd of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Sign-normalized copy: the leading term gets a positive coefficient.
    pub fn sign_normalized(&self) -> MultiPoly {
        match self.leading_term() {
            Some((_, c)) if c.is_negative() => -self,
            _ => self.clone(),
        }
    }

    /// Primitive, sign-normalized copy: content divided out and leading
    /// coefficient positive. Used as a dedup key up to sign and content.
    pub fn primitive_normalized(&self) -> MultiPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.sign_normalized();
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c / &g)).collect(),
        }
        .sign_normalized()
    }

    /// Same polynomial over a different (equal length) variable list.
    pub fn with_vars(&self, vars: Arc<[String]>) -> Result<MultiPoly> {
        if vars.len() != self.nvars() {
            return Err(Error::LengthMismatch {
                expected: self.nvars(),
                got: vars.len(),
            });
        }
        Ok(MultiPoly {
            vars,
            terms: self.terms.clone(),
        })
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut maxes = vec![0u32; self.nvars()];
        for m in self.terms.keys() {
            for (mx, &e) in maxes.iter_mut().zip(&m.0) {
                *mx = (*mx).max(e);
            }
        }
        maxes
    }

    /// Evaluates with a positional assignment `point[i]` for variable `i`.
    pub fn eval_at(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.nvars() {
            return Err(Error::LengthMismatch {
                expected: self.nvars(),
                got: point.len(),
            });
        }
        Ok(eval_generic(self, point, BigRational::one, |c| {
            BigRational::from_integer(c.clone())
        }))
    }

    /// Evaluates with a named assignment. Every variable that occurs in a
    /// term must be assigned; unused variables may be omitted.
    pub fn eval(&self, assignment: &HashMap<String, BigRational>) -> Result<BigRational> {
        let used = self.max_exponents();
        let mut point = Vec::with_capacity(self.nvars());
        for (name, &e) in self.vars.iter().zip(&used) {
            match assignment.get(name) {
                Some(v) => point.push(v.clone()),
                None if e == 0 => point.push(BigRational::zero()),
                None => return Err(Error::MissingAssignment(name.clone())),
            }
        }
        self.eval_at(&point)
    }

    /// Exact evaluation at an integer point.
    pub fn eval_int(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.nvars() {
            return Err(Error::LengthMismatch {
                expected: self.nvars(),
                got: point.len(),
            });
        }
        Ok(eval_generic(self, point, BigInt::one, BigInt::clone))
    }
}

fn eval_generic<T, F, G>(p: &MultiPoly, point: &[T], one: F, lift: G) -> T
where
    T: Clone + Zero + for<'a> Mul<&'a T, Output = T> + for<'a> Add<&'a T, Output = T>,
    F: Fn() -> T,
    G: Fn(&BigInt) -> T,
{
    let maxes = p.max_exponents();
    let powers: Vec<Vec<T>> = point
        .iter()
        .zip(&maxes)
        .map(|(x, &e)| {
            let mut pw = Vec::with_capacity(e as usize + 1);
            pw.push(one());
            for i in 0..e as usize {
                let next = pw[i].clone() * x;
                pw.push(next);
            }
            pw
        })
        .collect();
    let mut acc = T::zero();
    for (m, c) in &p.terms {
        let mut t = lift(c);
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                t = t * &powers[i][e as usize];
            }
        }
        acc = acc + &t;
    }
    acc
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(mut self) -> MultiPoly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

// Operator forms panic on mismatched variable lists; use the `checked_*`
// methods when the operands come from untrusted sources.
impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("variable lists differ")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("variable lists differ")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("variable lists differ")
    }
}
