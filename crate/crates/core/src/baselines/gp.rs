//! Fixed-hyperparameter Gaussian process regression with a squared-exponential
//! kernel, plus the expected-improvement acquisition for minimization.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("no observations")]
    Empty,
    #[error("observation dimensions disagree")]
    DimensionMismatch,
    #[error("kernel matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Clone)]
pub struct GaussianProcess {
    x: Vec<Vec<f64>>,
    lengthscales: Vec<f64>,
    /// Lower Cholesky factor of K + noise*I, row-major.
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
}

fn sq_exp(a: &[f64], b: &[f64], ls: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).zip(ls).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    (-0.5 * d2).exp()
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    y
}

fn backward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (b[i] - s) / l[i * n + i];
    }
    x
}

impl GaussianProcess {
    /// Fits to standardized targets. `noise` is the observation variance on
    /// that standardized scale (unit signal variance).
    pub fn fit(x: Vec<Vec<f64>>, y: &[f64], lengthscales: Vec<f64>, noise: f64) -> Result<Self, GpError> {
        let n = x.len();
        if n == 0 {
            return Err(GpError::Empty);
        }
        if y.len() != n || x.iter().any(|p| p.len() != lengthscales.len()) {
            return Err(GpError::DimensionMismatch);
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
        let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = sq_exp(&x[i], &x[j], &lengthscales);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let mut jitter = noise.max(1e-10);
        let chol = loop {
            let mut kn = k.clone();
            for i in 0..n {
                kn[i * n + i] += jitter;
            }
            if let Some(l) = cholesky(&kn, n) {
                break l;
            }
            jitter *= 10.0;
            if jitter > 1.0 {
                return Err(GpError::NotPositiveDefinite);
            }
        };
        let alpha = backward(&chol, n, &forward(&chol, n, &ys));
        Ok(Self { x, lengthscales, chol, alpha, y_mean, y_scale })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Posterior mean and standard deviation in the original target units.
    pub fn predict(&self, p: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let ks: Vec<f64> = self.x.iter().map(|xi| sq_exp(xi, p, &self.lengthscales)).collect();
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward(&self.chol, n, &ks);
        let var = (1.0 - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        (self.y_mean + mean * self.y_scale, var.sqrt() * self.y_scale)
    }
}

fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement below `best`.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    let imp = best - mean;
    if sd <= 0.0 {
        return imp.max(0.0);
    }
    let z = imp / sd;
    imp * norm_cdf(z) + sd * norm_pdf(z)
}
