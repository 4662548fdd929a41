use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{sgd_step_on, LabeledExample, ModelState};

/// Runs `epochs` passes of mini-batch SGD. Each pass reshuffles the data and
/// visits every example exactly once; the last batch of a pass may be short.
pub fn train_epochs<T: Scalar, R: Rng + ?Sized>(
    model: &mut ModelState<T>,
    data: &[LabeledExample<T>],
    epochs: usize,
    rng: &mut R,
) -> Result<()> {
    let steps_per_epoch = data.len().div_ceil(model.hyperparams.batch_size.max(1));
    train_steps(model, data, epochs * steps_per_epoch, rng)
}

/// Runs exactly `steps` mini-batch updates, drawing batches without
/// replacement from a permutation that is reshuffled whenever it runs out.
pub fn train_steps<T: Scalar, R: Rng + ?Sized>(
    model: &mut ModelState<T>,
    data: &[LabeledExample<T>],
    steps: usize,
    rng: &mut R,
) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let m = model.hyperparams.batch_size;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut cursor = order.len();
    for _ in 0..steps {
        if cursor >= order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        let end = (cursor + m).min(order.len());
        sgd_step_on(model, order[cursor..end].iter().map(|&i| &data[i]))?;
        cursor = end;
    }
    Ok(())
}
