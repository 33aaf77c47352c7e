//! Kendall tau-b rank correlation in `O(n log n)`.
//!
//! Sort pairs by the first coordinate (second as tiebreak), then count the
//! swaps a stable merge sort needs to order the second coordinate. Each swap
//! is one discordant pair; tie groups are counted along the way for the
//! tau-b correction.

use crate::centrality::ScoreVector;
use crate::error::{Error, Result};

/// Number of pairs within runs of equal values in a sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]).is_lt() {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall tau-b between two paired samples. NaN when either sample is
/// constant.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewValues(n));
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let firsts: Vec<u64> = pairs.iter().map(|p| p.0.to_bits()).collect();
    let joint: Vec<(u64, u64)> = pairs.iter().map(|p| (p.0.to_bits(), p.1.to_bits())).collect();
    let ties_a = tied_pairs(&firsts);
    let ties_joint = tied_pairs(&joint);

    let mut seconds: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut seconds, &mut buf);
    let sorted_bits: Vec<u64> = seconds.iter().map(|x| x.to_bits()).collect();
    let ties_b = tied_pairs(&sorted_bits);

    let total = (n as u64) * (n as u64 - 1) / 2;
    let numerator = total as f64 - ties_a as f64 - ties_b as f64 + ties_joint as f64 - 2.0 * swaps as f64;
    let denominator = ((total - ties_a) as f64 * (total - ties_b) as f64).sqrt();
    if denominator == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(numerator / denominator)
}

/// Kendall tau-b between the attack orders of two methods. Scores of a
/// method attacked in ascending order are negated first, so a positive value
/// means both methods tend to attack the same nodes early.
pub fn kendall_tau(a: &ScoreVector, b: &ScoreVector) -> Result<f64> {
    kendall_tau_b(&attack_keys(a), &attack_keys(b))
}

fn attack_keys(v: &ScoreVector) -> Vec<f64> {
    if v.method.ascending() {
        v.scores.iter().map(|s| -s).collect()
    } else {
        v.scores.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Pair-by-pair definition of tau-b.
    fn brute(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let (mut conc, mut disc, mut ta, mut tb) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in i + 1..n {
                let da = a[i].partial_cmp(&a[j]).unwrap();
                let db = b[i].partial_cmp(&b[j]).unwrap();
                use std::cmp::Ordering::Equal;
                match (da, db) {
                    (Equal, Equal) => {}
                    (Equal, _) => ta += 1,
                    (_, Equal) => tb += 1,
                    (x, y) if x == y => conc += 1,
                    _ => disc += 1,
                }
            }
        }
        (conc - disc) as f64 / (((conc + disc + ta) * (conc + disc + tb)) as f64).sqrt()
    }

    #[test]
    fn identical_and_reversed() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r: Vec<f64> = a.iter().rev().copied().collect();
        assert_eq!(kendall_tau_b(&a, &a).unwrap(), 1.0);
        assert_eq!(kendall_tau_b(&a, &r).unwrap(), -1.0);
    }

    #[test]
    fn one_swap_of_four() {
        let tau = kendall_tau_b(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((tau - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn errors_and_degenerate_input() {
        assert!(matches!(kendall_tau_b(&[1.0], &[1.0]), Err(Error::TooFewValues(1))));
        assert!(kendall_tau_b(&[1.0, 2.0], &[1.0]).is_err());
        assert!(kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap().is_nan());
    }

    proptest! {
        #[test]
        fn matches_pairwise_definition(
            pairs in proptest::collection::vec((0u8..6, 0u8..6), 2..60)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let fast = kendall_tau_b(&a, &b).unwrap();
            let slow = brute(&a, &b);
            if slow.is_nan() {
                prop_assert!(fast.is_nan());
            } else {
                prop_assert!((fast - slow).abs() < 1e-12, "{} vs {}", fast, slow);
            }
        }
    }
}
