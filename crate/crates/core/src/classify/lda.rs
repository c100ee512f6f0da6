//! Linear discriminant analysis with a shared, ridge-regularised covariance.

use serde::{Deserialize, Serialize};

use super::network::softmax;

/// Per-class linear discriminants `coef[c] . x + intercept[c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct LdaModel {
    #[serde(with = "crate::numfmt::nested")]
    pub means: Vec<Vec<f64>>,
    #[serde(with = "crate::numfmt::nested")]
    pub coef: Vec<Vec<f64>>,
    #[serde(with = "crate::numfmt::vec")]
    pub intercept: Vec<f64>,
}

/// Lower-triangular Cholesky factor of a symmetric `d x d` matrix, or `None`
/// when it is not numerically positive definite.
pub(crate) fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let v = a[i * d + i] - s;
                if v <= 0.0 || !v.is_finite() {
                    return None;
                }
                l[i * d + i] = v.sqrt();
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub(crate) fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|k| l[i * d + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| l[k * d + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * d + i];
    }
    x
}

/// Fits class means, priors and the pooled within-class covariance
/// (divisor `n - classes`, at least 1) with `ridge` on the diagonal.
/// Returns `None` when the regularised covariance is singular.
pub(crate) fn fit(xs: &[&[f64]], ys: &[usize], classes: usize, ridge: f64) -> Option<LdaModel> {
    let d = xs[0].len();
    let mut means = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for (x, &y) in xs.iter().zip(ys) {
        counts[y] += 1;
        means[y].iter_mut().zip(*x).for_each(|(m, v)| *m += v);
    }
    for (m, n) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= *n as f64);
    }
    let mut cov = vec![0.0; d * d];
    let mut centred = vec![0.0; d];
    for (x, &y) in xs.iter().zip(ys) {
        centred.iter_mut().zip(*x).zip(&means[y]).for_each(|((c, v), m)| *c = v - m);
        for i in 0..d {
            let ci = centred[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..=i {
                cov[i * d + j] += ci * centred[j];
            }
        }
    }
    let denom = xs.len().saturating_sub(classes).max(1) as f64;
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
        cov[i * d + i] += ridge;
    }
    let l = cholesky(&cov, d)?;
    let n = xs.len() as f64;
    let mut coef = Vec::with_capacity(classes);
    let mut intercept = Vec::with_capacity(classes);
    for (m, count) in means.iter().zip(&counts) {
        let w = cholesky_solve(&l, d, m);
        let quad: f64 = w.iter().zip(m).map(|(a, b)| a * b).sum();
        intercept.push(-0.5 * quad + (*count as f64 / n).ln());
        coef.push(w);
    }
    if coef.iter().flatten().chain(&intercept).any(|v| !v.is_finite()) {
        return None;
    }
    Some(LdaModel { means, coef, intercept })
}

impl LdaModel {
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let delta: Vec<f64> = self
            .coef
            .iter()
            .zip(&self.intercept)
            .map(|(w, b)| b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect();
        softmax(&delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let x = cholesky_solve(&l, 3, &[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn symmetric_classes_give_half_at_midpoint() {
        // Mirror-image clouds around (1, -2) with identical spread.
        let offsets = [[0.3, 0.1], [-0.2, 0.4], [0.1, -0.5], [-0.4, -0.1], [0.5, 0.2]];
        let mut data = Vec::new();
        let mut ys = Vec::new();
        for o in offsets {
            data.push(vec![1.0 + 2.0 + o[0], -2.0 + 1.0 + o[1]]);
            ys.push(0);
            data.push(vec![1.0 - 2.0 - o[0], -2.0 - 1.0 - o[1]]);
            ys.push(1);
        }
        let xs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let m = fit(&xs, &ys, 2, 1e-6).unwrap();
        let p = m.posterior(&[1.0, -2.0]);
        assert!((p[0] - 0.5).abs() < 1e-6, "{p:?}");
        assert!(m.posterior(&[3.0, -1.0])[0] > 0.99);
    }
}
