//! Generic Euclidean distance degree of the Segre variety
//! `P^{n_1} x ... x P^{n_L}` with `n_j = k_j - 1`.
//!
//! ```text
//! C_k = sum_{t=0}^{kbar} (-1)^t (2^{kbar+1-t} - 1) (kbar-t)!
//!         sum_{i_1+...+i_L = t, i_j <= n_j} prod_j binom(n_j+1, i_j) / (n_j-i_j)!
//! ```
//!
//! where `kbar = n_1 + ... + n_L`. It depends only on the multiset of filter
//! sizes, so strides play no role.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::lcn::{reduce_arch, Architecture};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EDReport {
    pub filter_sizes: Vec<usize>,
    pub k_bar: usize,
    #[serde(serialize_with = "as_decimal")]
    pub value: BigInt,
}

fn as_decimal<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Visits every `(i_1, ..., i_L)` with `i_j <= bounds[j]` summing to `t`,
/// in lexicographic order. The last entry is implied by the others, and each
/// prefix is kept completable.
fn for_each_composition(bounds: &[usize], t: usize, mut f: impl FnMut(&[usize])) {
    let l = bounds.len();
    if l == 0 {
        if t == 0 {
            f(&[]);
        }
        return;
    }
    let mut cap = vec![0usize; l + 1];
    for j in (0..l).rev() {
        cap[j] = cap[j + 1] + bounds[j];
    }
    if t > cap[0] {
        return;
    }
    let mut idx = vec![0usize; l];
    let fill = |idx: &mut [usize], from: usize| {
        let mut partial: usize = idx[..from].iter().sum();
        for j in from..l - 1 {
            idx[j] = (t - partial).saturating_sub(cap[j + 1]);
            partial += idx[j];
        }
        idx[l - 1] = t - partial;
    };
    fill(&mut idx, 0);
    loop {
        f(&idx);
        let mut j = l - 1;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            let prefix: usize = idx[..=j].iter().sum();
            if idx[j] < bounds[j] && prefix < t {
                idx[j] += 1;
                fill(&mut idx, j + 1);
                break;
            }
        }
    }
}

/// `C_k` for filter sizes `k_i >= 2` (any order).
pub fn generic_ed_degree(k: &[usize]) -> Result<BigInt> {
    if k.is_empty() {
        return Err(Error::InvalidInput("no filter sizes".into()));
    }
    if k.iter().any(|&x| x < 2) {
        let sizes: Vec<String> = k.iter().map(usize::to_string).collect();
        return Err(Error::NotReduced(format!("({})", sizes.join(","))));
    }
    let n: Vec<usize> = k.iter().map(|x| x - 1).collect();
    let k_bar: usize = n.iter().sum();
    let inv_fact: Vec<Vec<BigRational>> = n
        .iter()
        .map(|&nj| {
            (0..=nj)
                .map(|i| BigRational::new(binomial(nj + 1, i), factorial(nj - i)))
                .collect()
        })
        .collect();
    let mut total = BigInt::zero();
    for t in 0..=k_bar {
        let mut inner = BigRational::zero();
        for_each_composition(&n, t, |idx| {
            let term = idx
                .iter()
                .enumerate()
                .fold(BigRational::one(), |acc, (j, &i)| acc * &inv_fact[j][i]);
            inner += term;
        });
        let scaled = inner * BigRational::from_integer(factorial(k_bar - t));
        assert!(scaled.is_integer(), "t-term {t} of C_{k:?} is not integral");
        let weight = (BigInt::one() << (k_bar + 1 - t)) - 1;
        let term = scaled.to_integer() * weight;
        if t % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    assert!(total.is_positive(), "C_{k:?} must be positive");
    Ok(total)
}

pub fn ed_report(k: &[usize]) -> Result<EDReport> {
    let value = generic_ed_degree(k)?;
    Ok(EDReport {
        filter_sizes: k.to_vec(),
        k_bar: k.iter().map(|x| x - 1).sum(),
        value,
    })
}

/// `C_k` of the reduced form of `arch`.
pub fn ed_degree_of_architecture(arch: &Architecture) -> Result<EDReport> {
    ed_report(reduce_arch(arch).filter_sizes())
}

/// Number of critical points of rank-`r` approximation of a generic
/// `m x n` matrix: `binom(min(m, n), r)`.
pub fn fully_connected_count(m: usize, n: usize, r: usize) -> Result<BigUint> {
    let lo = m.min(n);
    if r < 1 || r > lo {
        return Err(Error::InvalidInput(format!(
            "rank {r} outside 1..={lo} for a {m}x{n} matrix"
        )));
    }
    Ok(binomial(lo, r).to_biguint().expect("binomials are nonnegative"))
}

/// The two-layer table `C_{(k1, k2)}` for `2 <= k1 <= k1_max`,
/// `2 <= k2 <= k2_max`.
pub fn two_layer_table(k1_max: usize, k2_max: usize) -> Result<Vec<Vec<BigInt>>> {
    (2..=k1_max)
        .map(|a| (2..=k2_max).map(|b| generic_ed_degree(&[a, b])).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeNode {
    pub report: EDReport,
    pub children: Vec<MergeNode>,
}

fn merges(k: &[usize]) -> Vec<Vec<usize>> {
    let l = k.len();
    let mut pairs: Vec<(usize, usize)> = (0..l - 1).map(|i| (i, i + 1)).collect();
    for i in 0..l {
        for j in i + 2..l {
            pairs.push((i, j));
        }
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for (i, j) in pairs {
        let mut child = k.to_vec();
        child[i] = k[i] + k[j] - 1;
        child.remove(j);
        let mut key = child.clone();
        key.sort_unstable();
        if !seen.contains(&key) {
            seen.push(key);
            out.push(child);
        }
    }
    out
}

/// Tree of dimension-preserving merges `k_i, k_j -> k_i + k_j - 1`, down to
/// two layers. Children are distinct as multisets.
pub fn merge_tree(k: &[usize]) -> Result<MergeNode> {
    if k.len() < 2 {
        return Err(Error::InvalidInput("merge tree needs at least two layers".into()));
    }
    build_tree(k)
}

fn build_tree(k: &[usize]) -> Result<MergeNode> {
    let report = ed_report(k)?;
    let children = if k.len() > 2 {
        merges(k).iter().map(|c| build_tree(c)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(MergeNode { report, children })
}

impl MergeNode {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let sizes: Vec<String> = self.report.filter_sizes.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{}({}) {}",
            "  ".repeat(depth),
            sizes.join(","),
            self.report.value
        );
        for c in &self.children {
            c.render_into(out, depth + 1);
        }
    }

    pub fn find(&self, k: &[usize]) -> Option<&MergeNode> {
        if self.report.filter_sizes == k {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE: [[u64; 8]; 8] = [
        [6, 10, 14, 18, 22, 26, 30, 34],
        [10, 39, 83, 143, 219, 311, 419, 543],
        [14, 83, 284, 676, 1324, 2292, 3644, 5444],
        [18, 143, 676, 2205, 5557, 11821, 22341, 38717],
        [22, 219, 1324, 5557, 17730, 46222, 104026, 209766],
        [26, 311, 2292, 11821, 46222, 145635, 388327, 910171],
        [30, 419, 3644, 22341, 104026, 388327, 1213560, 3288712],
        [34, 543, 5444, 38717, 209766, 910171, 3288712, 10218105],
    ];

    fn c(k: &[usize]) -> u64 {
        generic_ed_degree(k).unwrap().try_into().unwrap()
    }

    #[test]
    fn full_two_layer_table() {
        let t = two_layer_table(9, 9).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(t[a][b], BigInt::from(TABLE[a][b]), "k=({},{})", a + 2, b + 2);
            }
        }
    }

    #[test]
    fn figure_values() {
        assert_eq!(c(&[2, 3, 4, 5]), 2976084);
        assert_eq!(c(&[2, 3, 8]), 12698);
        assert_eq!(c(&[4, 4, 5]), 806396);
        assert_eq!(c(&[2, 6, 5]), 139726);
        assert_eq!(c(&[2, 10]), 38);
        assert_eq!(c(&[9, 3]), 543);
        assert_eq!(c(&[4, 8]), 3644);
    }

    #[test]
    fn single_factor_is_one() {
        // the ED degree of a projective space (a linear space) is 1
        for k in 2..12 {
            assert_eq!(c(&[k]), 1);
        }
    }

    #[test]
    fn rejects_small_filters() {
        assert!(generic_ed_degree(&[1, 2]).is_err());
        assert!(generic_ed_degree(&[]).is_err());
    }

    #[test]
    fn two_by_n_rows_are_linear() {
        // C_{2,k} = 4k - 2: the ED degree of P^1 x P^n is 2(n+1) + 2n
        for k in 2..30 {
            assert_eq!(c(&[2, k]), 4 * k as u64 - 2);
        }
    }

    #[test]
    fn monotone_along_rows_and_columns() {
        let t = two_layer_table(9, 9).unwrap();
        for a in 0..8 {
            for b in 0..7 {
                assert!(t[a][b] < t[a][b + 1]);
                assert!(t[b][a] < t[b + 1][a]);
            }
        }
    }

    #[test]
    fn fully_connected_examples() {
        assert_eq!(fully_connected_count(3, 3, 1).unwrap(), BigUint::from(3u32));
        assert_eq!(fully_connected_count(5, 4, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(fully_connected_count(2, 2, 1).unwrap(), BigUint::from(2u32));
        assert!(fully_connected_count(2, 2, 3).is_err());
        assert!(fully_connected_count(2, 2, 0).is_err());
    }

    #[test]
    fn merge_tree_matches_figure() {
        let tree = merge_tree(&[2, 3, 4, 5]).unwrap();
        assert_eq!(tree.report.value, BigInt::from(2976084));
        let kids: Vec<Vec<usize>> = tree.children.iter().map(|c| c.report.filter_sizes.clone()).collect();
        for want in [vec![2, 3, 8], vec![4, 4, 5], vec![2, 6, 5]] {
            assert!(kids.contains(&want), "missing {want:?}");
        }
        let n = tree.find(&[2, 3, 8]).unwrap();
        let leaves: Vec<(Vec<usize>, BigInt)> = n
            .children
            .iter()
            .map(|c| (c.report.filter_sizes.clone(), c.report.value.clone()))
            .collect();
        assert_eq!(
            leaves,
            vec![
                (vec![4, 8], BigInt::from(3644)),
                (vec![2, 10], BigInt::from(38)),
                (vec![9, 3], BigInt::from(543)),
            ]
        );
        let n = tree.find(&[4, 4, 5]).unwrap();
        let sizes: Vec<_> = n.children.iter().map(|c| c.report.filter_sizes.clone()).collect();
        assert_eq!(sizes, vec![vec![7, 5], vec![4, 8]]);
        // k_bar is preserved by every merge
        fn check(n: &MergeNode, kb: usize) {
            assert_eq!(n.report.k_bar, kb);
            n.children.iter().for_each(|c| check(c, kb));
        }
        check(&tree, 10);
        assert!(merge_tree(&[2, 2]).unwrap().children.is_empty());
        assert!(merge_tree(&[3]).is_err());
    }

    #[test]
    fn compositions_enumerated_once() {
        let bounds = [2, 0, 3, 1];
        for t in 0..=7 {
            let mut got = Vec::new();
            for_each_composition(&bounds, t, |v| got.push(v.to_vec()));
            let mut brute = Vec::new();
            for a in 0..=2 {
                for c in 0..=3 {
                    for d in 0..=1 {
                        if a + c + d == t {
                            brute.push(vec![a, 0, c, d]);
                        }
                    }
                }
            }
            got.sort();
            brute.sort();
            assert_eq!(got, brute, "t={t}");
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut k in prop::collection::vec(2usize..7, 1..5), seed in any::<u64>()) {
            let base = generic_ed_degree(&k).unwrap();
            let n = k.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                k.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(generic_ed_degree(&k).unwrap(), base);
        }

        #[test]
        fn stride_independent(k in prop::collection::vec(2usize..6, 2..4), s in prop::collection::vec(2usize..5, 3)) {
            let mut strides: Vec<usize> = s[..k.len()].to_vec();
            *strides.last_mut().unwrap() = 1;
            let arch = Architecture::new(k.clone(), strides).unwrap();
            let arch1 = Architecture::new(k.clone(), {
                let mut t = vec![2; k.len()];
                *t.last_mut().unwrap() = 1;
                t
            }).unwrap();
            prop_assert_eq!(
                ed_degree_of_architecture(&arch).unwrap().value,
                ed_degree_of_architecture(&arch1).unwrap().value
            );
        }
    }
}
