//! L2-regularized logistic regression fit by full-batch gradient descent with an Armijo
//! backtracking line search. The intercept is not penalized.

use super::{linear_score, sigmoid, ClassifierError, Dataset, LogisticParams};

/// `log(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Value and gradient of `mean(logloss) + reg/2 * |w|^2`.
/// Returns `(objective, d/dw, d/db)`.
pub fn logistic_objective(weights: &[f64], intercept: f64, data: &Dataset, reg_param: f64) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for i in 0..data.len() {
        let x = data.row(i);
        let z = linear_score(weights, intercept, x);
        let y = f64::from(data.label(i));
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += r * xi;
        }
        gb += r;
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + reg_param * w;
    }
    (loss / n + 0.5 * reg_param * penalty, gw, gb / n)
}

/// Weights, intercept and the objective value after each accepted step.
pub(crate) struct LogisticFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

pub(crate) fn fit_logistic(data: &Dataset, p: &LogisticParams) -> Result<LogisticFit, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::InvalidData("no training rows".into()));
    }
    let (work, scales) = if p.standardization { data.standardized() } else { (data.clone(), vec![1.0; data.dim()]) };
    let mut w = vec![0.0; data.dim()];
    let mut b = 0.0;
    let (mut f, mut gw, mut gb) = logistic_objective(&w, b, &work, p.reg_param);
    if !p.fit_intercept {
        gb = 0.0;
    }
    let mut history = vec![f];
    for _ in 0..p.max_iter {
        let gnorm2 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if gnorm2.sqrt() < p.tol {
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let cand_b = b - step * gb;
            let (cf, cgw, cgb) = logistic_objective(&cand_w, cand_b, &work, p.reg_param);
            if cf <= f - 1e-4 * step * gnorm2 {
                accepted = Some((cand_w, cand_b, cf, cgw, cgb));
                break;
            }
            step *= 0.5;
        }
        let Some((nw, nb, nf, ngw, ngb)) = accepted else { break };
        w = nw;
        b = nb;
        f = nf;
        gw = ngw;
        gb = if p.fit_intercept { ngb } else { 0.0 };
        history.push(f);
    }
    let weights = w
        .iter()
        .zip(&scales)
        .map(|(wi, s)| if *s > 0.0 { wi / s } else { 0.0 })
        .collect();
    Ok(LogisticFit { weights, intercept: b, history })
}
