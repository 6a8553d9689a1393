//! Linear SVM: mean hinge loss plus `reg/2 * |w|^2`, minimized by deterministic full-batch
//! subgradient descent. Step size is `1 / (reg * t)` when `reg > 0`, otherwise fixed.
//! The iterate with the lowest objective is kept.

use super::{linear_score, ClassifierError, Dataset, SvmParams};

/// Objective and a subgradient at `(w, b)`, with labels mapped to +-1.
/// At points where no margin equals exactly 1 this is the gradient.
pub fn hinge_objective(weights: &[f64], intercept: f64, data: &Dataset, reg_param: f64) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for i in 0..data.len() {
        let x = data.row(i);
        let y = if data.label(i) == 1 { 1.0 } else { -1.0 };
        let m = y * linear_score(weights, intercept, x);
        if m < 1.0 {
            loss += 1.0 - m;
            for (g, xi) in gw.iter_mut().zip(x) {
                *g -= y * xi;
            }
            gb -= y;
        }
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum();
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + reg_param * w;
    }
    (loss / n + 0.5 * reg_param * penalty, gw, gb / n)
}

pub(crate) fn fit_svm(data: &Dataset, p: &SvmParams) -> Result<(Vec<f64>, f64), ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::InvalidData("no training rows".into()));
    }
    let (work, scales) = if p.standardization { data.standardized() } else { (data.clone(), vec![1.0; data.dim()]) };
    let mut w = vec![0.0; data.dim()];
    let mut b = 0.0;
    let (mut f, mut gw, mut gb) = hinge_objective(&w, b, &work, p.reg_param);
    let mut best = (f, w.clone(), b);
    for t in 1..=p.max_iter {
        if !p.fit_intercept {
            gb = 0.0;
        }
        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if gnorm < p.tol {
            break;
        }
        let step = if p.reg_param > 0.0 { 1.0 / (p.reg_param * t as f64) } else { p.step_size };
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= step * gi;
        }
        b -= step * gb;
        if p.reg_param > 0.0 {
            // the optimum lies in the ball of radius 1/sqrt(reg)
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let radius = 1.0 / p.reg_param.sqrt();
            if norm > radius {
                w.iter_mut().for_each(|x| *x *= radius / norm);
            }
        }
        (f, gw, gb) = hinge_objective(&w, b, &work, p.reg_param);
        if f < best.0 {
            best = (f, w.clone(), b);
        }
    }
    let (_, w, b) = best;
    let weights = w
        .iter()
        .zip(&scales)
        .map(|(wi, s)| if *s > 0.0 { wi / s } else { 0.0 })
        .collect();
    Ok((weights, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair_classified() {
        let d = Dataset::new(vec![vec![-2.0], vec![2.0]], vec![0, 1]).unwrap();
        let p = SvmParams { reg_param: 0.1, max_iter: 1000, standardization: false, ..SvmParams::default() };
        let (w, b) = fit_svm(&d, &p).unwrap();
        assert!(linear_score(&w, b, &[-2.0]) < 0.0);
        assert!(linear_score(&w, b, &[2.0]) > 0.0);

        // coarse grid oracle: the best grid point also separates the pair with margin >= 1
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for wi in -50..=50 {
            for bi in -20..=20 {
                let (wv, bv) = (wi as f64 * 0.1, bi as f64 * 0.1);
                let (f, _, _) = hinge_objective(&[wv], bv, &d, 0.1);
                if f < best.0 {
                    best = (f, wv, bv);
                }
            }
        }
        assert!(best.1 * 2.0 + best.2 >= 1.0 && -best.1 * 2.0 + best.2 <= -1.0);
        let (f, _, _) = hinge_objective(&w, b, &d, 0.1);
        assert!(f <= best.0 + 5e-3, "{f} vs {best:?}");
    }

    #[test]
    fn all_positive_labels_push_intercept_up() {
        let d = Dataset::new(vec![vec![0.3], vec![-0.7], vec![1.1]], vec![1, 1, 1]).unwrap();
        let (w, b) = fit_svm(&d, &SvmParams::default()).unwrap();
        assert!(b > 0.0);
        for x in [-0.7, 0.3, 1.1] {
            assert!(linear_score(&w, b, &[x]) > 0.0);
        }
    }
}
