use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MultiPoly;
use crate::{Error, Result};

/// Dense row-major matrix of polynomials over a shared variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    vars: Arc<[String]>,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        vars: Arc<[String]>,
        entries: Vec<MultiPoly>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|e| e.vars() != &vars) {
            return Err(Error::VariableMismatch);
        }
        Ok(PolyMatrix {
            rows,
            cols,
            vars,
            entries,
        })
    }

    pub fn from_rows(vars: Arc<[String]>, rows: Vec<Vec<MultiPoly>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::LengthMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Self::new(r, c, vars, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i * self.cols + j]
    }

    /// Exact symbolic determinant by Laplace expansion, memoized over column
    /// subsets. No division ever happens, so the result is the determinant
    /// itself rather than a multiple of it.
    pub fn determinant(&self) -> Result<MultiPoly> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let rows: Vec<usize> = (0..self.rows).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        let table = self.subset_determinants(&rows, &cols);
        let full = if self.rows == 0 { 0 } else { (1u64 << self.cols) - 1 };
        Ok(table
            .get(&full)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(self.vars.clone())))
    }

    /// Determinants of the submatrices on `rows` (in order) and every
    /// `rows.len()`-subset of `cols`, keyed by the column bitmask. Zero
    /// determinants are absent from the map.
    fn subset_determinants(&self, rows: &[usize], cols: &[usize]) -> HashMap<u64, MultiPoly> {
        assert!(cols.len() <= 63, "too many columns for bitmask expansion");
        let mut level: HashMap<u64, MultiPoly> = HashMap::new();
        level.insert(0, MultiPoly::one(self.vars.clone()));
        for (depth, &r) in rows.iter().enumerate() {
            let mut next: HashMap<u64, MultiPoly> = HashMap::new();
            for (&mask, minor) in &level {
                for (ci, &c) in cols.iter().enumerate() {
                    let bit = 1u64 << ci;
                    if mask & bit != 0 {
                        continue;
                    }
                    let entry = self.get(r, c);
                    if entry.is_zero() {
                        continue;
                    }
                    // Expanding along row `depth`: the sign depends on the
                    // position of column ci among the chosen columns.
                    let pos = (mask & (bit - 1)).count_ones() as usize;
                    let mut term = minor * entry;
                    if (depth + pos) % 2 == 1 {
                        term = -term;
                    }
                    let new_mask = mask | bit;
                    match next.get_mut(&new_mask) {
                        Some(acc) => *acc = &*acc + &term,
                        None => {
                            next.insert(new_mask, term);
                        }
                    }
                }
            }
            next.retain(|_, p| !p.is_zero());
            level = next;
        }
        level
    }

    /// All `size x size` minors in lexicographic order of (row set, column
    /// set). Zero minors are dropped, each minor is sign-normalized, and
    /// repeats up to sign keep their first occurrence. A size larger than
    /// either dimension yields an empty list.
    pub fn minors(&self, size: usize) -> Vec<MultiPoly> {
        if size == 0 || size > self.rows || size > self.cols {
            return Vec::new();
        }
        let all_cols: Vec<usize> = (0..self.cols).collect();
        let col_sets = combinations(self.cols, size);
        let mut out: Vec<MultiPoly> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for row_set in combinations(self.rows, size) {
            let table = self.subset_determinants(&row_set, &all_cols);
            for col_set in &col_sets {
                let mask = col_set.iter().fold(0u64, |m, &c| m | (1u64 << c));
                if let Some(det) = table.get(&mask) {
                    let norm = det.sign_normalized();
                    let key = norm.to_text();
                    if seen.insert(key) {
                        out.push(norm);
                    }
                }
            }
        }
        out
    }

    /// Substitutes a rational point for the variables.
    pub fn eval_at(&self, point: &[BigRational]) -> Result<Vec<Vec<BigRational>>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).eval_at(point))
                    .collect()
            })
            .collect()
    }

    pub fn to_text_with(&self, names: &[String]) -> String {
        let cells: Vec<String> = self.entries.iter().map(|e| e.to_text_with(names)).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        let mut out = String::new();
        for i in 0..self.rows {
            out.push('[');
            for j in 0..self.cols {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("{:>width$}", cells[i * self.cols + j]));
            }
            out.push_str("]\n");
        }
        out
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text_with(&self.vars))
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact rank of a rational matrix by Gaussian elimination.
pub fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot;
            for c in col..ncols {
                let delta = &factor * &m[rank][c];
                m[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Exact determinant of an integer matrix by Bareiss elimination. Used as an
/// independent check on the symbolic expansion.
pub fn integer_determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{display_names, parse_poly};

    fn letter_matrix(rows: &[&[&str]]) -> PolyMatrix {
        let n = rows.iter().flat_map(|r| r.iter()).count().max(9);
        let vars: Arc<[String]> = display_names(n.min(26)).into();
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_poly(s, &vars).unwrap()).collect())
            .collect();
        PolyMatrix::from_rows(vars, entries).unwrap()
    }

    #[test]
    fn resultant_determinant() {
        let m = letter_matrix(&[&["A", "C", "E"], &["B", "D", "0"], &["0", "B", "D"]]);
        assert_eq!(m.determinant().unwrap().to_text(), "A*D^2 + B^2*E - B*C*D");
    }

    #[test]
    fn identity_and_sign_convention() {
        let id = letter_matrix(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
        assert_eq!(id.determinant().unwrap().to_text(), "1");
        let m = letter_matrix(&[&["B", "D"], &["A", "C"]]);
        assert_eq!(m.determinant().unwrap().to_text(), "-A*D + B*C");
    }

    #[test]
    fn non_square_is_error() {
        let m = letter_matrix(&[&["A", "B", "C"], &["D", "E", "F"]]);
        assert_eq!(
            m.determinant(),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn oversized_minors_are_empty() {
        let m = letter_matrix(&[&["A", "B"], &["C", "D"]]);
        assert!(m.minors(3).is_empty());
        assert_eq!(m.minors(2).len(), 1);
        assert_eq!(m.minors(1).len(), 4);
    }

    #[test]
    fn minor_counts_of_displayed_resultants() {
        let r2 = letter_matrix(&[
            &["A", "E", "I"],
            &["B", "F", "0"],
            &["0", "B", "F"],
            &["C", "G", "0"],
            &["0", "C", "G"],
            &["D", "H", "0"],
            &["0", "D", "H"],
        ]);
        assert!(r2.minors(3).len() <= 35);
        let r4 = letter_matrix(&[
            &["A", "C", "E", "G", "I"],
            &["B", "D", "F", "H", "0"],
            &["0", "B", "D", "F", "H"],
        ]);
        assert!(r4.minors(3).len() <= 10);
    }

    #[test]
    fn combinations_lex() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn bareiss_small() {
        let m: Vec<Vec<BigInt>> = [[2, -1, 0], [1, 3, 4], [0, 5, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        // 2*(3-20) + 1*(1-0) = -33
        assert_eq!(integer_determinant(&m), BigInt::from(-33));
    }

    #[test]
    fn rank_of_rationals() {
        let q = |x: i64| BigRational::from_integer(x.into());
        let m = vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ];
        assert_eq!(rational_rank(&m), 2);
    }
}
