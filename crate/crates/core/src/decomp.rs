//! The `s`-decomposition of binary forms, in filter-coefficient coordinates.
//!
//! A form `P = sum_j c_j x^(k-1-j) y^j` splits into `s` slots by the residue
//! of the `x`-exponent modulo `s`. Slot `i` (1-based) collects the `c_j`
//! with `k-1-j ≡ i-1 (mod s)`; after the substitution `x^s -> x, y^s -> y`
//! it is a form of degree `floor((k-i)/s)`, listed by decreasing power of
//! `x`. Slots with negative degree are empty (the zero polynomial).

use serde::Serialize;

use crate::{Error, Result};

/// Degree bookkeeping of the `s`-decomposition of a form with `k`
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompProfile {
    pub s: usize,
    /// Total degree `k - 1`.
    pub m: usize,
    /// Degree of each slot, `None` for identically-zero slots.
    pub degrees: Vec<Option<usize>>,
    /// Largest slot degree `n*`.
    pub n_star_hi: usize,
    /// Smallest degree over nonzero slots `n_*`.
    pub n_star_lo: usize,
    /// Number of slots of degree `n*`.
    pub r: usize,
}

impl DecompProfile {
    pub fn nonzero_slots(&self) -> usize {
        self.degrees.iter().flatten().count()
    }
}

fn slot_degree(k: usize, s: usize, slot: usize) -> Option<usize> {
    // slot is 1-based
    (slot <= k).then(|| (k - slot) / s)
}

pub fn profile(k: usize, s: usize) -> DecompProfile {
    assert!(k >= 1 && s >= 1, "profile needs k >= 1 and s >= 1");
    let degrees: Vec<Option<usize>> = (1..=s).map(|i| slot_degree(k, s, i)).collect();
    let n_star_hi = degrees.iter().flatten().copied().max().unwrap_or(0);
    let n_star_lo = degrees.iter().flatten().copied().min().unwrap_or(0);
    let r = degrees.iter().filter(|d| **d == Some(n_star_hi)).count();
    DecompProfile {
        s,
        m: k - 1,
        degrees,
        n_star_hi,
        n_star_lo,
        r,
    }
}

/// Splits `coeffs` into `s` slots (index 0 holds slot 1).
pub fn s_decompose<T: Clone>(coeffs: &[T], s: usize) -> Vec<Vec<T>> {
    assert!(s >= 1);
    let k = coeffs.len();
    let mut slots = vec![Vec::new(); s];
    for (j, c) in coeffs.iter().enumerate() {
        slots[(k - 1 - j) % s].push(c.clone());
    }
    slots
}

/// Inverse of [`s_decompose`] for a form with `k` coefficients.
pub fn s_recompose<T: Clone>(slots: &[Vec<T>], s: usize, k: usize) -> Result<Vec<T>> {
    if slots.len() != s {
        return Err(Error::LengthMismatch {
            expected: s,
            got: slots.len(),
        });
    }
    for (i, slot) in slots.iter().enumerate() {
        let expected = slot_degree(k, s, i + 1).map_or(0, |d| d + 1);
        if slot.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: slot.len(),
            });
        }
    }
    let mut cursors = vec![0usize; s];
    Ok((0..k)
        .map(|j| {
            let slot = (k - 1 - j) % s;
            let v = slots[slot][cursors[slot]].clone();
            cursors[slot] += 1;
            v
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcn::{compose_filters, Architecture, Filter};
    use proptest::prelude::*;

    fn letters(k: usize) -> Vec<char> {
        (0..k).map(|i| char::from(b'A' + i as u8)).collect()
    }

    fn slot_strings(k: usize, s: usize) -> Vec<String> {
        s_decompose(&letters(k), s)
            .into_iter()
            .map(|v| v.into_iter().collect())
            .collect()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(slot_strings(5, 2), vec!["ACE", "BD"]);
        assert_eq!(slot_strings(8, 3), vec!["BEH", "ADG", "CF"]);
        assert_eq!(slot_strings(9, 4), vec!["AEI", "DH", "CG", "BF"]);
        assert_eq!(slot_strings(6, 1), vec!["ABCDEF"]);
        assert_eq!(slot_strings(4, 2), vec!["BD", "AC"]);
    }

    #[test]
    fn recompose_examples() {
        let v = letters(9);
        assert_eq!(s_recompose(&s_decompose(&v, 4), 4, 9).unwrap(), v);
        let unit = s_recompose(&[vec![1, 0], vec![0]], 2, 3).unwrap();
        assert_eq!(unit, vec![1, 0, 0]);
        assert!(s_recompose(&[vec![1, 0], vec![0, 0]], 2, 3).is_err());
        assert!(s_recompose(&[vec![1, 0]], 2, 3).is_err());
    }

    #[test]
    fn profile_examples() {
        let p = profile(8, 3);
        assert_eq!(p.degrees, vec![Some(2), Some(2), Some(1)]);
        assert_eq!((p.n_star_hi, p.n_star_lo, p.r), (2, 1, 2));
        let p = profile(5, 2);
        assert_eq!(p.degrees, vec![Some(2), Some(1)]);
        assert_eq!((p.n_star_hi, p.n_star_lo, p.r), (2, 1, 1));
        let p = profile(9, 4);
        assert_eq!(p.degrees, vec![Some(2), Some(1), Some(1), Some(1)]);
        assert_eq!((p.n_star_hi, p.r), (2, 1));
        let p = profile(2, 4);
        assert_eq!(p.degrees, vec![Some(0), Some(0), None, None]);
        assert_eq!(p.nonzero_slots(), 2);
    }

    #[test]
    fn degree_bookkeeping_exhaustive() {
        for k in 1..=30 {
            for s in 1..=k {
                let p = profile(k, s);
                let slots = s_decompose(&letters(k.min(26)).repeat(2)[..k], s);
                for (i, slot) in slots.iter().enumerate() {
                    let expected = (k - 1 - i) / s;
                    assert_eq!(p.degrees[i], Some(expected));
                    assert_eq!(slot.len(), expected + 1);
                }
                assert_eq!(p.n_star_hi, (k - 1) / s);
                assert!(p.n_star_hi - p.n_star_lo <= 1);
                assert!(p.degrees[..p.r].iter().all(|d| *d == Some(p.n_star_hi)));
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(v in prop::collection::vec(-50i64..50, 1..20), s in 1usize..8) {
            let k = v.len();
            prop_assert_eq!(s_recompose(&s_decompose(&v, s), s, k).unwrap(), v);
        }

        #[test]
        fn linear(a in prop::collection::vec(-9i64..9, 12), b in prop::collection::vec(-9i64..9, 12),
                  x in -5i64..5, y in -5i64..5, s in 1usize..6) {
            let combo: Vec<i64> = a.iter().zip(&b).map(|(p, q)| x * p + y * q).collect();
            let lhs = s_decompose(&combo, s);
            let (da, db) = (s_decompose(&a, s), s_decompose(&b, s));
            for i in 0..s {
                let rhs: Vec<i64> = da[i].iter().zip(&db[i]).map(|(p, q)| x * p + y * q).collect();
                prop_assert_eq!(&lhs[i], &rhs);
            }
        }

        #[test]
        fn multiplicative_on_stride_subring(
            q in prop::collection::vec(-9i64..9, 1..7),
            w2 in prop::collection::vec(-9i64..9, 2..5),
            s in 2usize..5,
        ) {
            // P = pi_s(w2) lies in C[x^s, y^s]; sigma_s(P Q) = P' sigma_s(Q)
            let arch = Architecture::new(vec![q.len(), w2.len()], vec![s, 1]).unwrap();
            let product = compose_filters(&arch, &[Filter::new(q.clone()), Filter::new(w2.clone())]).unwrap();
            let lhs = s_decompose(&product, s);
            let rhs = s_decompose(&q, s);
            for i in 0..s {
                let expected: Vec<i64> = if rhs[i].is_empty() {
                    vec![0; lhs[i].len()]
                } else {
                    let mut out = vec![0; rhs[i].len() + w2.len() - 1];
                    for (a, x) in rhs[i].iter().enumerate() {
                        for (b, y) in w2.iter().enumerate() {
                            out[a + b] += x * y;
                        }
                    }
                    out
                };
                prop_assert_eq!(&lhs[i], &expected);
            }
        }
    }
}
