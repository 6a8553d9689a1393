//! Second-order factorization machine trained with seeded mini-batch gradient descent on the
//! logistic loss. `reg_param` penalizes linear weights and factors, not the intercept.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::logistic::softplus;
use super::{sigmoid, ClassifierError, Dataset, FmModel, FmParams};

/// Adds the logistic-loss gradient of row `i` into `grad`, returns the row's loss.
fn accumulate(model: &FmModel, data: &Dataset, i: usize, grad: &mut FmModel, sums: &mut [f64]) -> f64 {
    let x = data.row(i);
    let k = model.factor_dim;
    let score = model.score(x);
    let y = f64::from(data.label(i));
    let r = sigmoid(score) - y;
    grad.intercept += r;
    for (g, xi) in grad.weights.iter_mut().zip(x) {
        *g += r * xi;
    }
    if k > 0 {
        for (f, s) in sums.iter_mut().enumerate() {
            *s = x.iter().enumerate().map(|(j, xj)| model.factors[j * k + f] * xj).sum();
        }
        for (j, xj) in x.iter().enumerate() {
            if *xj == 0.0 {
                continue;
            }
            for f in 0..k {
                let v = model.factors[j * k + f];
                grad.factors[j * k + f] += r * xj * (sums[f] - v * xj);
            }
        }
    }
    softplus(score) - y * score
}

fn zeros_like(model: &FmModel) -> FmModel {
    FmModel {
        intercept: 0.0,
        weights: vec![0.0; model.weights.len()],
        factor_dim: model.factor_dim,
        factors: vec![0.0; model.factors.len()],
    }
}

/// Objective `mean(logloss) + reg/2 * (|w|^2 + |V|^2)` over `rows` and its gradient.
fn batch_objective(model: &FmModel, data: &Dataset, rows: &[usize], reg_param: f64) -> (f64, FmModel) {
    let mut grad = zeros_like(model);
    let mut sums = vec![0.0; model.factor_dim];
    let mut loss = 0.0;
    for &i in rows {
        loss += accumulate(model, data, i, &mut grad, &mut sums);
    }
    let n = rows.len().max(1) as f64;
    grad.intercept /= n;
    let mut penalty = 0.0;
    for (g, w) in grad.weights.iter_mut().zip(&model.weights) {
        *g = *g / n + reg_param * w;
        penalty += w * w;
    }
    for (g, v) in grad.factors.iter_mut().zip(&model.factors) {
        *g = *g / n + reg_param * v;
        penalty += v * v;
    }
    (loss / n + 0.5 * reg_param * penalty, grad)
}

/// Full-data objective and gradient, laid out like the model itself.
pub fn fm_objective(model: &FmModel, data: &Dataset, reg_param: f64) -> (f64, FmModel) {
    let rows: Vec<usize> = (0..data.len()).collect();
    batch_objective(model, data, &rows, reg_param)
}

pub(crate) fn fit_fm(data: &Dataset, p: &FmParams) -> Result<FmModel, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::InvalidData("no training rows".into()));
    }
    let dim = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let normal = Normal::new(0.0, p.init_std).map_err(|e| ClassifierError::InvalidParam(format!("fm: initStd: {e}")))?;
    let factors = (0..dim * p.factor_dim).map(|_| normal.sample(&mut rng)).collect();
    let mut model = FmModel { intercept: 0.0, weights: vec![0.0; dim], factor_dim: p.factor_dim, factors };
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..p.max_iter {
        order.shuffle(&mut rng);
        for batch in order.chunks(p.batch_size) {
            let (_, grad) = batch_objective(&model, data, batch, p.reg_param);
            if p.fit_intercept {
                model.intercept -= p.step_size * grad.intercept;
            }
            if p.fit_linear {
                for (w, g) in model.weights.iter_mut().zip(&grad.weights) {
                    *w -= p.step_size * g;
                }
            }
            if !p.freeze_factors {
                for (v, g) in model.factors.iter_mut().zip(&grad.factors) {
                    *v -= p.step_size * g;
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 2) as f64, ((i / 2) % 2) as f64, 0.5]).collect();
        let labels: Vec<u8> = (0..50).map(|i| u8::from((i % 2) != (i / 2) % 2)).collect();
        Dataset::new(rows, labels).unwrap()
    }

    #[test]
    fn seeded_fit_is_reproducible() {
        let p = FmParams { max_iter: 5, batch_size: 7, ..FmParams::default() };
        assert_eq!(fit_fm(&data(), &p).unwrap(), fit_fm(&data(), &p).unwrap());
    }

    #[test]
    fn frozen_zero_factors_stay_zero() {
        let p = FmParams { init_std: 0.0, freeze_factors: true, ..FmParams::default() };
        let m = fit_fm(&data(), &p).unwrap();
        assert!(m.factors.iter().all(|v| *v == 0.0));
        assert_eq!(m.interaction(&[1.0, 1.0, 0.5]), 0.0);
    }

    #[test]
    fn interaction_matches_pairwise_sum() {
        let m = FmModel {
            intercept: 0.0,
            weights: vec![0.0; 3],
            factor_dim: 2,
            factors: vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6],
        };
        let x = [1.0, 2.0, -1.0];
        let mut direct = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let dot: f64 = (0..2).map(|f| m.factors[i * 2 + f] * m.factors[j * 2 + f]).sum();
                direct += dot * x[i] * x[j];
            }
        }
        assert!((m.interaction(&x) - direct).abs() < 1e-12);
    }

    #[test]
    fn training_lowers_objective() {
        let d = data();
        let p = FmParams { max_iter: 50, step_size: 0.5, batch_size: 10, ..FmParams::default() };
        let m = fit_fm(&d, &p).unwrap();
        let mut init = m.clone();
        init.intercept = 0.0;
        init.weights.fill(0.0);
        init.factors.fill(0.0);
        assert!(fm_objective(&m, &d, 0.0).0 < fm_objective(&init, &d, 0.0).0);
    }
}
