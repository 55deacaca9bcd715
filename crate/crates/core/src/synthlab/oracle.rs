//! Brute-force reference computations kept separate from the production code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::ranker::TransitionMatrix;

/// Solves `(I - gamma * P^T) x = (1 - gamma) * e` densely with partial pivoting.
pub fn oracle_linear_solve(p: &TransitionMatrix, e: &[f64], gamma: f64) -> Vec<f64> {
    let n = p.len();
    assert_eq!(e.len(), n, "teleport length");
    assert!(n <= 64, "dense oracle is limited to 64 nodes");
    let dense = p.to_dense();
    // augmented matrix [A | b], A = I - gamma * P^T
    let mut a = vec![vec![0.0; n + 1]; n];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = if r == c { 1.0 } else { 0.0 } - gamma * dense[c][r];
        }
        a[r][n] = (1.0 - gamma) * e[r];
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-300, "singular system");
        a.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow(base: &BigRational, exp: u64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Exact smoothed multinomial posterior of `query` given dense integer count
/// documents, with smoothing `alpha = alpha.0 / alpha.1`.
pub fn oracle_nb_posterior(docs: &[(Vec<u64>, Label)], alpha: (u64, u64), query: &[u64]) -> Result<[f64; 3]> {
    if docs.is_empty() {
        return Err(Error::Empty("toy dataset"));
    }
    let vocab = query.len();
    let alpha = ratio(alpha.0, alpha.1);
    let mut joint: Vec<BigRational> = Vec::with_capacity(3);
    for label in Label::ALL {
        let class_docs: Vec<&Vec<u64>> = docs.iter().filter(|(_, l)| *l == label).map(|(d, _)| d).collect();
        if class_docs.is_empty() {
            return Err(Error::MissingClass(label));
        }
        let mut counts = vec![0u64; vocab];
        for d in &class_docs {
            for (t, &c) in d.iter().enumerate() {
                counts[t] += c;
            }
        }
        let total: u64 = counts.iter().sum();
        let denom = BigRational::from_integer(BigInt::from(total)) + &alpha * BigInt::from(vocab as u64);
        let mut p = ratio(class_docs.len() as u64, docs.len() as u64);
        for (t, &q) in query.iter().enumerate() {
            let theta = (BigRational::from_integer(BigInt::from(counts[t])) + &alpha) / &denom;
            p *= pow(&theta, q);
        }
        joint.push(p);
    }
    let z = joint.iter().fold(BigRational::zero(), |acc, p| acc + p);
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&joint) {
        *o = (p / &z).to_f64().expect("finite posterior");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_scaled_teleport() {
        let p = TransitionMatrix::from_entries(vec!["a".into(), "b".into()], &[]).unwrap();
        let x = oracle_linear_solve(&p, &[0.25, 0.75], 0.85);
        assert!((x[0] - 0.0375).abs() < 1e-15);
        assert!((x[1] - 0.1125).abs() < 1e-15);
    }

    #[test]
    fn two_cycle_is_symmetric() {
        let p = TransitionMatrix::from_entries(vec!["a".into(), "b".into()], &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let x = oracle_linear_solve(&p, &[0.5, 0.5], 0.85);
        assert!((x[0] - x[1]).abs() < 1e-15);
        assert!((x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn toy_posterior_exact() {
        let docs = vec![
            (vec![2, 0], Label::Relevant),
            (vec![0, 1], Label::News),
            (vec![1, 1], Label::Noise),
            (vec![1, 1], Label::Noise),
        ];
        let p = oracle_nb_posterior(&docs, (1, 1), &[2, 0]).unwrap();
        let raw = [0.25 * 9.0 / 16.0, 0.25 / 9.0, 0.5 * 0.25];
        let z: f64 = raw.iter().sum();
        for c in 0..3 {
            assert!((p[c] - raw[c] / z).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_data_uniform_posterior() {
        let docs: Vec<_> = Label::ALL.iter().map(|&l| (vec![1, 1], l)).collect();
        let p = oracle_nb_posterior(&docs, (1, 1), &[3, 1]).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn missing_class_is_an_error() {
        let docs = vec![(vec![1], Label::News), (vec![1], Label::Noise)];
        assert!(matches!(
            oracle_nb_posterior(&docs, (1, 1), &[1]),
            Err(Error::MissingClass(Label::Relevant))
        ));
    }
}
