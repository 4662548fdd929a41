use crate::error::{Error, Result};
use crate::scalar::{dot, squared_norm, Scalar};

use super::{Label, LabeledExample, ModelState};

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_finite<T: Scalar>(v: &[T], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `w^T x`.
pub fn decision_value<T: Scalar>(w: &[T], x: &[T]) -> Result<T> {
    check_dim(w.len(), x.len())?;
    Ok(dot(w, x))
}

/// Regularized hinge loss `max(0, 1 - y w^T x) + (lambda / 2) ||w||^2`.
pub fn hinge_loss<T: Scalar>(w: &[T], x: &[T], y: Label, lambda: T) -> Result<T> {
    check_dim(w.len(), x.len())?;
    check_finite(w, "weights")?;
    check_finite(x, "feature vector")?;
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    let hinge = (T::one() - y.signed::<T>() * dot(w, x)).max(T::zero());
    Ok(hinge + lambda / T::of(2.0) * squared_norm(w))
}

/// Normal when `w^T x >= 0`, attack otherwise.
pub fn predict<T: Scalar>(w: &[T], x: &[T]) -> Result<Label> {
    let score = decision_value(w, x)?;
    Ok(if score >= T::zero() { Label::Normal } else { Label::Attack })
}

/// Subgradient of the batch-averaged regularized hinge loss:
/// `lambda * w - (1/M) * sum over margin violators of y_j x_j`.
pub fn subgradient<T: Scalar>(w: &[T], batch: &[LabeledExample<T>], lambda: T) -> Result<Vec<T>> {
    subgradient_on(w, batch.iter(), lambda)
}

pub(crate) fn subgradient_on<'a, T, I>(w: &[T], batch: I, lambda: T) -> Result<Vec<T>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a LabeledExample<T>>,
{
    let mut acc = vec![T::zero(); w.len()];
    let mut m = 0usize;
    for ex in batch {
        check_dim(w.len(), ex.x.len())?;
        m += 1;
        let y = ex.y.signed::<T>();
        if y * dot(w, &ex.x) < T::one() {
            for (a, &xk) in acc.iter_mut().zip(&ex.x) {
                *a += y * xk;
            }
        }
    }
    if m == 0 {
        return Err(Error::EmptyBatch);
    }
    let inv_m = T::one() / T::of_usize(m);
    Ok(w.iter().zip(acc).map(|(&wk, a)| lambda * wk - a * inv_m).collect())
}

/// One mini-batch update `w <- w - alpha * subgradient`.
///
/// The model is left untouched when the update fails.
pub fn sgd_step<T: Scalar>(model: &mut ModelState<T>, batch: &[LabeledExample<T>]) -> Result<()> {
    if batch.len() > model.hyperparams.batch_size {
        return Err(Error::InvalidArgument(format!(
            "batch of {} exceeds the configured size {}",
            batch.len(),
            model.hyperparams.batch_size
        )));
    }
    sgd_step_on(model, batch.iter())
}

pub(crate) fn sgd_step_on<'a, T, I>(model: &mut ModelState<T>, batch: I) -> Result<()>
where
    T: Scalar,
    I: IntoIterator<Item = &'a LabeledExample<T>>,
{
    let hp = model.hyperparams;
    let g = subgradient_on(&model.weights, batch, hp.lambda)?;
    let mut next = model.weights.clone();
    for (w, gk) in next.iter_mut().zip(g) {
        // zero components are skipped so a stationary batch leaves weights bit-identical
        if gk != T::zero() {
            *w -= hp.alpha * gk;
        }
    }
    if next.iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence { iteration: model.iteration + 1 });
    }
    model.weights = next;
    model.iteration += 1;
    Ok(())
}

/// `(1/N) * sum of hinge terms + (lambda / 2) ||w||^2`, regularizer counted once.
pub fn empirical_risk<T: Scalar>(w: &[T], data: &[LabeledExample<T>], lambda: T) -> Result<T> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut total = T::zero();
    for ex in data {
        check_dim(w.len(), ex.x.len())?;
        total += (T::one() - ex.margin(w)).max(T::zero());
    }
    Ok(total / T::of_usize(data.len()) + lambda / T::of(2.0) * squared_norm(w))
}

#[cfg(test)]
mod tests {
    use super::super::Hyperparams;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ex(x: &[f64], y: Label) -> LabeledExample<f64> {
        LabeledExample::new(x.to_vec(), y)
    }

    fn model(w: &[f64], lambda: f64, alpha: f64) -> ModelState<f64> {
        let mut m = ModelState::new(w.len() - 1, Hyperparams::new(lambda, alpha, 8).unwrap()).unwrap();
        m.weights = w.to_vec();
        m
    }

    #[test]
    fn hinge_examples() {
        let x = [0.3, -2.0, 1.0];
        assert_eq!(hinge_loss(&[0.0; 3], &x, Label::Attack, 0.1).unwrap(), 1.0);
        assert_eq!(hinge_loss(&[3.0, 0.0], &[1.0, 0.0], Label::Normal, 2.0).unwrap(), 9.0);
        assert_eq!(hinge_loss(&[1.0, 0.0], &[1.0, 0.0], Label::Attack, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn hinge_errors() {
        assert!(matches!(
            hinge_loss(&[1.0, 0.0], &[1.0], Label::Normal, 0.0),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(hinge_loss(&[f64::NAN], &[1.0], Label::Normal, 0.0).is_err());
        assert!(hinge_loss(&[1.0], &[f64::INFINITY], Label::Normal, 0.0).is_err());
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(&[1.0, -1.0, 0.0], &[2.0, 1.0, 1.0]).unwrap(), Label::Normal);
        assert_eq!(predict(&[-1.0, 0.0, 0.0], &[2.0, 1.0, 1.0]).unwrap(), Label::Attack);
        assert_eq!(predict(&[0.0; 3], &[2.0, 1.0, 1.0]).unwrap(), Label::Normal);
        assert!(predict(&[0.0; 2], &[2.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn subgradient_examples() {
        let g = subgradient(&[0.0, 0.0], &[ex(&[1.0, 2.0], Label::Normal)], 0.0).unwrap();
        assert_eq!(g, vec![-1.0, -2.0]);
        let g = subgradient(&[5.0, 0.0], &[ex(&[1.0, 0.0], Label::Normal)], 0.0).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let w = [2.0, -3.0];
        let batch = [ex(&[1.0, 0.0], Label::Normal), ex(&[0.0, 1.0], Label::Attack)];
        assert_eq!(subgradient(&w, &batch, 0.25).unwrap(), vec![0.5, -0.75]);
        assert!(matches!(subgradient::<f64>(&w, &[], 0.1), Err(Error::EmptyBatch)));
    }

    #[test]
    fn sgd_step_examples() {
        let mut m = model(&[0.0, 0.0], 0.0, 0.5);
        sgd_step(&mut m, &[ex(&[1.0, 2.0], Label::Normal)]).unwrap();
        assert_eq!(m.weights, vec![0.5, 1.0]);
        assert_eq!(m.iteration, 1);

        let mut m = model(&[4.0, -1.0], 0.0, 0.5);
        let before = m.weights.clone();
        sgd_step(&mut m, &[ex(&[1.0, 0.0], Label::Normal), ex(&[0.0, 2.0], Label::Attack)]).unwrap();
        assert_eq!(m.weights, before);

        let mut m = model(&[1.0, 0.0], 0.2, 0.5);
        sgd_step(&mut m, &[ex(&[2.0, 0.0], Label::Normal)]).unwrap();
        assert_relative_eq!(m.weights[0], 0.9, epsilon = 1e-15);
        assert_eq!(m.weights[1], 0.0);
    }

    #[test]
    fn sgd_step_errors_leave_model_untouched() {
        let mut m = model(&[0.0, 0.0], 0.0, 0.5);
        assert!(matches!(sgd_step(&mut m, &[]), Err(Error::EmptyBatch)));
        let mut m = model(&[0.0, 0.0], 0.0, 1e308);
        let before = m.clone();
        let err = sgd_step(&mut m, &[ex(&[1e10, 0.0], Label::Normal)]).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        assert_eq!(m, before);
        let mut m = model(&[0.0, 0.0], 0.0, 0.5);
        let too_many = vec![ex(&[1.0, 1.0], Label::Normal); 9];
        assert!(sgd_step(&mut m, &too_many).is_err());
    }

    #[test]
    fn sgd_step_matches_finite_difference_direction() {
        // central differences of the batch loss at the starting point of the first example
        let batch = [ex(&[1.0, 2.0], Label::Normal)];
        let loss = |w: &[f64]| empirical_risk(w, &batch, 0.0).unwrap();
        let h = 1e-6;
        let fd: Vec<f64> = (0..2)
            .map(|k| {
                let mut p = vec![0.1, 0.1];
                let mut q = p.clone();
                p[k] += h;
                q[k] -= h;
                (loss(&p) - loss(&q)) / (2.0 * h)
            })
            .collect();
        let mut m = model(&[0.1, 0.1], 0.0, 0.5);
        sgd_step(&mut m, &batch).unwrap();
        assert_relative_eq!(m.weights[0], 0.1 - 0.5 * fd[0], epsilon = 1e-8);
        assert_relative_eq!(m.weights[1], 0.1 - 0.5 * fd[1], epsilon = 1e-8);
    }

    #[test]
    fn empirical_risk_examples() {
        let data = [ex(&[0.5, 1.0], Label::Normal), ex(&[-3.0, 1.0], Label::Attack)];
        assert_eq!(empirical_risk(&[0.0, 0.0], &data, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_risk(&[4.0, 0.0], &data, 0.0).unwrap(), 0.0);
        // hinge terms {2, 0}
        let data = [ex(&[1.0, 0.0], Label::Attack), ex(&[1.0, 0.0], Label::Normal)];
        assert_eq!(empirical_risk(&[1.0, 0.0], &data, 0.0).unwrap(), 1.0);
        // regularizer once, not per sample
        assert_eq!(empirical_risk(&[1.0, 0.0], &data, 2.0).unwrap(), 2.0);
        assert!(matches!(empirical_risk::<f64>(&[1.0], &[], 0.0), Err(Error::EmptyData)));
    }

    #[test]
    fn works_in_single_precision() {
        let g = subgradient(&[0.0f32, 0.0], &[LabeledExample::new(vec![1.0f32, 2.0], Label::Normal)], 0.0).unwrap();
        assert_eq!(g, vec![-1.0f32, -2.0]);
        assert_eq!(hinge_loss(&[3.0f32, 0.0], &[1.0, 0.0], Label::Normal, 2.0).unwrap(), 9.0);
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<f64>, Vec<LabeledExample<f64>>)> {
        (2usize..6).prop_flat_map(|d| {
            let w = prop::collection::vec(-3.0..3.0f64, d);
            let batch = prop::collection::vec(
                (prop::collection::vec(-2.0..2.0f64, d), any::<bool>())
                    .prop_map(|(x, a)| LabeledExample::new(x, if a { Label::Attack } else { Label::Normal })),
                1..12,
            );
            (w, batch)
        })
    }

    proptest! {
        #[test]
        fn zero_hinge_implies_correct_prediction(
            w in prop::collection::vec(-3.0..3.0f64, 3),
            x in prop::collection::vec(-3.0..3.0f64, 3),
            attack in any::<bool>(),
        ) {
            let y = if attack { Label::Attack } else { Label::Normal };
            if hinge_loss(&w, &x, y, 0.0).unwrap() == 0.0 {
                prop_assert_eq!(predict(&w, &x).unwrap(), y);
            }
        }

        #[test]
        fn hinge_is_nonnegative((w, batch) in arb_instance(), lambda in 0.0..2.0f64) {
            for e in &batch {
                prop_assert!(hinge_loss(&w, &e.x, e.y, lambda).unwrap() >= 0.0);
            }
        }

        #[test]
        fn small_steps_descend((w, batch) in arb_instance(), alpha in 1e-6..1e-3f64) {
            let g = subgradient(&w, &batch, 0.0).unwrap();
            let gnorm: f64 = g.iter().map(|v| v.abs()).sum();
            // reject draws where the step could cross a hinge kink
            let near_kink = batch.iter().any(|e| {
                let reach = alpha * gnorm * e.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                (e.margin(&w) - 1.0).abs() <= reach * 1.01 + 1e-12
            });
            prop_assume!(!near_kink);
            let mut m = model(&w, 0.0, alpha);
            m.hyperparams.batch_size = batch.len();
            let before = empirical_risk(&w, &batch, 0.0).unwrap();
            sgd_step(&mut m, &batch).unwrap();
            let after = empirical_risk(&m.weights, &batch, 0.0).unwrap();
            prop_assert!(after <= before + 1e-12, "{} > {}", after, before);
        }

        #[test]
        fn satisfied_batch_is_a_fixed_point(
            (w, batch) in arb_instance(),
        ) {
            let satisfied: Vec<_> = batch
                .into_iter()
                .map(|mut e| {
                    // pick the label that makes the margin positive, then scale so it exceeds 1
                    let s = dot(&w, &e.x);
                    e.y = if s >= 0.0 { Label::Normal } else { Label::Attack };
                    let scale = if s.abs() > 1e-9 { 2.0 / s.abs() } else { 0.0 };
                    e.x.iter_mut().for_each(|v| *v *= scale);
                    e
                })
                .filter(|e| e.margin(&w) >= 1.0)
                .collect();
            prop_assume!(!satisfied.is_empty());
            let mut m = model(&w, 0.0, 0.3);
            m.hyperparams.batch_size = satisfied.len();
            sgd_step(&mut m, &satisfied).unwrap();
            let same = m.weights.iter().zip(&w).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
    }
}
