//! Small statistical helpers for the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::{BTreeMap, BTreeSet};

/// Total variation distance between two empirical distributions.
pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let mut s = 0.0;
    for k in keys {
        let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
        let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
        s += (pa - pb).abs();
    }
    0.5 * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson goodness of fit of `counts` against `probs`, the last entry of
/// each being the remainder cell. Adjacent cells are pooled from the tail
/// until each expects at least `min_expected` hits.
pub fn chi_square_gof(counts: &[u64], probs: &[f64], min_expected: f64) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs).rev() {
        o += *c as f64;
        e += p * nf;
        if e >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells.iter().map(|(o, e)| if *e > 0.0 { (o - e) * (o - e) / e } else { 0.0 }).sum();
    let dof = cells.len().saturating_sub(1) as u64;
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive degrees of freedom").cdf(statistic)
    };
    ChiSquare { statistic, dof, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_of_equal_and_disjoint() {
        let a = BTreeMap::from([(1, 5u64), (2, 5)]);
        let b = BTreeMap::from([(1, 50u64), (2, 50)]);
        let c = BTreeMap::from([(3, 1u64)]);
        assert_eq!(total_variation(&a, &b), 0.0);
        assert_eq!(total_variation(&a, &c), 1.0);
    }

    #[test]
    fn chi_square_pools_and_scores() {
        let exact = chi_square_gof(&[500, 300, 200], &[0.5, 0.3, 0.2], 5.0);
        assert_eq!(exact.statistic, 0.0);
        assert_eq!(exact.dof, 2);
        assert!((exact.p_value - 1.0).abs() < 1e-12);
        // the small tail cell is merged into its neighbour
        let pooled = chi_square_gof(&[600, 399, 1], &[0.6, 0.399, 0.001], 5.0);
        assert_eq!(pooled.dof, 1);
        let bad = chi_square_gof(&[900, 100], &[0.5, 0.5], 5.0);
        assert!(bad.p_value < 1e-10);
    }
}
