//! Pearson and Spearman correlation with average-rank tie handling.

use crate::error::{Error, Result};

/// Pearson linear correlation. Errors on length mismatch, fewer than 3
/// points, or zero variance in either argument.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 points, got {}", a.len())));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Degenerate("zero variance makes the correlation undefined".into()));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Fractional ranks (1-based) with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank-order correlation: Pearson correlation of the average
/// ranks. Errors as [`pearson`], with zero rank variance reported as
/// degenerate.
pub fn srcc(pred: &[f64], mos: &[f64]) -> Result<f64> {
    if pred.len() != mos.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", pred.len(), mos.len())));
    }
    if pred.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 points, got {}", pred.len())));
    }
    pearson(&average_ranks(pred), &average_ranks(mos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn identical_and_reversed_rankings() {
        assert_eq!(srcc(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(srcc(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn one_transposition_of_four() {
        // Spearman via the distance formula: 1 - 6*2 / (4*15) = 0.8.
        let v = srcc(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn error_cases() {
        assert!(srcc(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(srcc(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        let degenerate = srcc(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(degenerate, Error::Degenerate(_)));
    }

    #[test]
    fn ties_share_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn matches_rank_distance_formula_on_random_vectors() {
        // Independent oracle for the tie-free case:
        // 1 - 6 * sum(d^2) / (n(n^2-1)).
        let mut rng = crate::rng::derive_stream(7, &["srcc-oracle"]);
        for _ in 0..100 {
            let n = rng.gen_range(3..40);
            // Distinct values so the distance formula applies.
            let mut pred: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let mut mos: Vec<f64> = (0..n).map(|i| i as f64).collect();
            for i in (1..n).rev() {
                pred.swap(i, rng.gen_range(0..=i));
                mos.swap(i, rng.gen_range(0..=i));
            }
            let ranks_p = average_ranks(&pred);
            let ranks_m = average_ranks(&mos);
            let d2: f64 = ranks_p.iter().zip(&ranks_m).map(|(a, b)| (a - b) * (a - b)).sum();
            let nf = n as f64;
            let oracle = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
            let ours = srcc(&pred, &mos).unwrap();
            assert_abs_diff_eq!(ours, oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn invariant_under_strictly_increasing_transforms() {
        let mut rng = crate::rng::derive_stream(9, &["srcc-monotone"]);
        for _ in 0..20 {
            let pred: Vec<f64> = (0..25).map(|_| rng.gen::<f64>()).collect();
            let mos: Vec<f64> = (0..25).map(|_| rng.gen::<f64>()).collect();
            let base = srcc(&pred, &mos).unwrap();
            let warped: Vec<f64> = pred.iter().map(|&x| (3.0 * x).exp() + x.powi(3)).collect();
            let squashed: Vec<f64> = mos.iter().map(|&y| y.atan() * 2.0 + y).collect();
            assert_abs_diff_eq!(srcc(&warped, &mos).unwrap(), base, epsilon = 1e-12);
            assert_abs_diff_eq!(srcc(&pred, &squashed).unwrap(), base, epsilon = 1e-12);
        }
    }
}
