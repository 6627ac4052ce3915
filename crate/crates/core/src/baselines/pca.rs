use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_indexed;
use crate::sparse::SparseMatrix;

pub const PCA_TOL: f64 = 1e-9;
pub const PCA_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Unit-norm, mutually orthogonal principal axes, largest variance first.
    pub components: Vec<Vec<f64>>,
    /// Variance captured by each component (covariance eigenvalue).
    pub explained_variance: Vec<f64>,
    /// Sum of all column variances.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| if self.total_variance > 0.0 { v / self.total_variance } else { 0.0 })
            .collect()
    }

    /// Keeps the first `k` components.
    pub fn truncated(&self, k: usize) -> PcaModel {
        PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k].to_vec(),
            explained_variance: self.explained_variance[..k].to_vec(),
            total_variance: self.total_variance,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Covariance-vector product without forming the covariance matrix.
struct Covariance<'a> {
    x: &'a SparseMatrix,
    mean: &'a [f64],
    denom: f64,
}

impl Covariance<'_> {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mean_dot = dot(self.mean, v);
        let u: Vec<f64> = (0..self.x.rows())
            .map(|r| self.x.row_entries(r).map(|(j, val)| val * v[j]).sum::<f64>() - mean_dot)
            .collect();
        let mut out = vec![0.0; self.x.cols()];
        for (r, &ur) in u.iter().enumerate() {
            for (j, val) in self.x.row_entries(r) {
                out[j] += val * ur;
            }
        }
        let usum: f64 = u.iter().sum();
        for (o, m) in out.iter_mut().zip(self.mean) {
            *o = (*o - m * usum) / self.denom;
        }
        out
    }
}

/// Extra block vectors beyond `k`; they let close eigenvalues at the edge
/// of the requested range separate.
const OVERSAMPLE: usize = 5;

/// Gram-Schmidt (applied twice for stability) in column order. A column that
/// vanishes is replaced by a fresh random direction.
fn orthonormalize(block: &mut [Vec<f64>], refill: &mut impl FnMut() -> Vec<f64>) {
    for i in 0..block.len() {
        for _attempt in 0..8 {
            for _ in 0..2 {
                for j in 0..i {
                    let p = dot(&block[i], &block[j]);
                    let (head, tail) = block.split_at_mut(i);
                    for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                        *a -= p * b;
                    }
                }
            }
            let n = norm(&block[i]);
            if n > 1e-10 {
                block[i].iter_mut().for_each(|a| *a /= n);
                break;
            }
            block[i] = refill();
        }
    }
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|a| *a = -*a);
    }
}

/// `block * s`, where `s` is `b x b` (column-major from nalgebra).
fn rotate(block: &[Vec<f64>], s: &nalgebra::DMatrix<f64>, order: &[usize]) -> Vec<Vec<f64>> {
    let d = block[0].len();
    order
        .iter()
        .map(|&c| {
            let mut out = vec![0.0; d];
            for (r, v) in block.iter().enumerate() {
                let w = s[(r, c)];
                if w != 0.0 {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += w * x;
                    }
                }
            }
            out
        })
        .collect()
}

/// Top-`k` principal components by block power iteration: the block is
/// multiplied by the covariance, re-orthonormalized, and rotated onto its
/// Ritz vectors each step. A component has converged when its eigen-residual
/// `|C v - lambda v|` is within [`PCA_TOL`] of the largest eigenvalue.
pub fn pca_fit(x: &SparseMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 || k == 0 || k > (n - 1).min(d) {
        return Err(Error::invalid(format!(
            "cannot extract {k} components from a {n}x{d} matrix"
        )));
    }
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (j, v) in x.row_entries(r) {
            mean[j] += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let denom = (n - 1) as f64;
    let mut sq = vec![0.0; d];
    for r in 0..n {
        for (j, v) in x.row_entries(r) {
            sq[j] += v * v;
        }
    }
    let total_variance: f64 = (0..d).map(|j| (sq[j] - n as f64 * mean[j] * mean[j]) / denom).sum();

    let cov = Covariance { x, mean: &mean, denom };
    let b = (k + OVERSAMPLE).min(d);
    let mut rng = rng_indexed(0, "pca/start", 0);
    let mut fresh = move || -> Vec<f64> { (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let mut block: Vec<Vec<f64>> = (0..b).map(|_| fresh()).collect();
    orthonormalize(&mut block, &mut fresh);

    let mut worst = 0;
    for _ in 0..PCA_MAX_ITER {
        let images: Vec<Vec<f64>> = block.iter().map(|v| cov.apply(v)).collect();
        let h = nalgebra::DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&block[i], &images[j]) + dot(&block[j], &images[i])));
        let eig = nalgebra::SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
        let ritz = rotate(&block, &eig.eigenvectors, &order);
        let ritz_images = rotate(&images, &eig.eigenvectors, &order);
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

        let scale = values[0].abs().max(f64::MIN_POSITIVE);
        let unconverged = (0..k).find(|&i| {
            let r: f64 = ritz_images[i]
                .iter()
                .zip(&ritz[i])
                .map(|(cv, v)| (cv - values[i] * v).powi(2))
                .sum::<f64>()
                .sqrt();
            r > PCA_TOL * scale
        });
        match unconverged {
            None => {
                let mut components = ritz;
                components.truncate(k);
                components.iter_mut().for_each(|c| fix_sign(c));
                return Ok(PcaModel {
                    mean,
                    components,
                    explained_variance: values[..k].iter().map(|v| v.max(0.0)).collect(),
                    total_variance,
                });
            }
            Some(c) => worst = c,
        }
        // a vanishing image means the Ritz vector already spans null space
        block = ritz_images
            .into_iter()
            .zip(ritz)
            .map(|(img, v)| if norm(&img) > 1e-12 * scale { img } else { v })
            .collect();
        orthonormalize(&mut block, &mut fresh);
    }
    Err(Error::NoConvergence { component: worst })
}

/// Projects rows onto the model's components: `(x - mean) * components^T`.
pub fn pca_transform(model: &PcaModel, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
    if x.cols() != model.mean.len() {
        return Err(Error::Shape {
            expected: model.mean.len(),
            actual: x.cols(),
        });
    }
    let offsets: Vec<f64> = model.components.iter().map(|c| dot(c, &model.mean)).collect();
    Ok((0..x.rows())
        .map(|r| {
            model
                .components
                .iter()
                .zip(&offsets)
                .map(|(c, off)| x.row_entries(r).map(|(j, v)| v * c[j]).sum::<f64>() - off)
                .collect()
        })
        .collect())
}
