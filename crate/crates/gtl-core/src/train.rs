//! The training loop shared by pre-training, scouts, and experiment
//! fine-tuning: seeded batch order, optional gradient masking, post-epoch
//! metrics, and configurable stop rules.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::guidance::{apply_guidance, GuidanceMatrix};
use crate::net::{evaluate, loss_and_grad, Batch, NetworkSpec, ParamSet, Sgd};
use crate::rng::rng_from_seed;
use crate::CHANGED_PARAM_EPS;

/// Full-batch training or seeded-shuffle mini-batches of a fixed size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    Full,
    Mini { size: usize },
}

/// When to stop before the epoch cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Run all epochs.
    None,
    /// Stop at the first epoch whose train accuracy reaches the threshold.
    AccuracyOnce(f64),
    /// Stop once train accuracy has held the threshold for `patience`
    /// consecutive epochs.
    AccuracySustained { threshold: f64, patience: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub batch: BatchMode,
    pub stop: StopRule,
    /// Seed for mini-batch shuffling. Ignored in full-batch mode.
    pub shuffle_seed: u64,
}

impl TrainConfig {
    pub fn full_batch(lr: f64, momentum: f64, max_epochs: usize) -> TrainConfig {
        TrainConfig {
            lr,
            momentum,
            max_epochs,
            batch: BatchMode::Full,
            stop: StopRule::None,
            shuffle_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::Config(alloc::format!(
                "training.lr must be >= 0, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(alloc::format!(
                "training.momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("training.epochs must be >= 1".into()));
        }
        if let BatchMode::Mini { size: 0 } = self.batch {
            return Err(Error::Config("training.batch_size must be >= 1".into()));
        }
        match self.stop {
            StopRule::AccuracyOnce(t) => {
                if !(0.0 < t && t <= 1.0) {
                    return Err(Error::Config(alloc::format!(
                        "stop accuracy must be in (0, 1], got {t}"
                    )));
                }
            }
            StopRule::AccuracySustained { threshold, patience } => {
                if !(0.0 < threshold && threshold <= 1.0) {
                    return Err(Error::Config(alloc::format!(
                        "stop threshold must be in (0, 1], got {threshold}"
                    )));
                }
                if patience == 0 {
                    return Err(Error::Config("stop patience must be >= 1".into()));
                }
            }
            StopRule::None => {}
        }
        Ok(())
    }
}

/// Post-epoch measurements. `epoch` is zero-based;
/// `changed_param_fraction` compares against the parameters the loop started
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
    pub changed_param_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ParamSet,
    pub records: Vec<EpochRecord>,
    pub epochs_used: usize,
}

impl TrainOutcome {
    pub fn final_train_acc(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.train_acc)
    }

    /// Train-accuracy curve in epoch order.
    pub fn train_acc_curve(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_acc).collect()
    }
}

/// Trains from `start`, recording post-epoch metrics on the full training
/// batch (and on `eval_data` when given). When a guidance matrix is supplied
/// it is applied to the raw gradients before the optimizer sees them.
pub fn train(
    start: &ParamSet,
    spec: &NetworkSpec,
    train_data: &Batch,
    eval_data: Option<&Batch>,
    guidance: Option<&GuidanceMatrix>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if let Some(g) = guidance {
        if !g.values.congruent_with(start) {
            return Err(Error::Shape(alloc::format!(
                "guidance shape {:?} does not match parameter shape {:?}",
                g.values.shape(),
                start.shape()
            )));
        }
    }

    let mut params = start.clone();
    let mut sgd = Sgd::new(cfg.lr, cfg.momentum)?;
    let mut rng = rng_from_seed(cfg.shuffle_seed);
    let mut records = Vec::new();
    let mut sustained = 0usize;

    let n = train_data.len();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.max_epochs {
        match cfg.batch {
            BatchMode::Full => {
                params = step(&mut sgd, &params, spec, train_data, guidance)?;
            }
            BatchMode::Mini { size } => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(size) {
                    let mini = train_data.select_rows(chunk);
                    params = step(&mut sgd, &params, spec, &mini, guidance)?;
                }
            }
        }

        let (train_loss, train_acc) = evaluate(&params, spec, train_data)?;
        let test_acc = match eval_data {
            Some(data) => Some(evaluate(&params, spec, data)?.1),
            None => None,
        };
        records.push(EpochRecord {
            epoch,
            train_loss,
            train_acc,
            test_acc,
            changed_param_fraction: params.changed_fraction(start, CHANGED_PARAM_EPS)?,
        });

        match cfg.stop {
            StopRule::None => {}
            StopRule::AccuracyOnce(threshold) => {
                if train_acc >= threshold {
                    break;
                }
            }
            StopRule::AccuracySustained { threshold, patience } => {
                if train_acc >= threshold {
                    sustained += 1;
                    if sustained >= patience {
                        break;
                    }
                } else {
                    sustained = 0;
                }
            }
        }
    }

    let epochs_used = records.len();
    Ok(TrainOutcome {
        params,
        records,
        epochs_used,
    })
}

fn step(
    sgd: &mut Sgd,
    params: &ParamSet,
    spec: &NetworkSpec,
    batch: &Batch,
    guidance: Option<&GuidanceMatrix>,
) -> Result<ParamSet> {
    let (_, grads) = loss_and_grad(params, spec, batch)?;
    let grads = match guidance {
        Some(g) => apply_guidance(&grads, g)?,
        None => grads,
    };
    sgd.step(params, &grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::{GuidanceMatrix, NormKind, StatKind};
    use crate::mat::Matrix;
    use crate::net::{init_params, Activation, NetworkSpec, OutputHead};

    fn xor_batch() -> Batch {
        Batch::new(
            Matrix::from_vec(4, 2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]).unwrap(),
            Matrix::from_vec(4, 1, vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
        )
        .unwrap()
    }

    fn xor_spec(seed: u64) -> NetworkSpec {
        NetworkSpec::new(
            vec![2, 8, 1],
            Activation::Tanh,
            OutputHead::SigmoidBce,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn zero_lr_leaves_params_bit_identical() {
        let spec = xor_spec(3);
        let start = init_params(&spec).unwrap();
        let cfg = TrainConfig::full_batch(0.0, 0.0, 5);
        let out = train(&start, &spec, &xor_batch(), None, None, &cfg).unwrap();
        assert!(out.params.bits_eq(&start));
        assert_eq!(out.epochs_used, 5);
        assert!(out.records.iter().all(|r| r.changed_param_fraction == 0.0));
    }

    #[test]
    fn training_is_deterministic() {
        let spec = xor_spec(3);
        let start = init_params(&spec).unwrap();
        let cfg = TrainConfig {
            lr: 0.5,
            momentum: 0.9,
            max_epochs: 30,
            batch: BatchMode::Mini { size: 2 },
            stop: StopRule::None,
            shuffle_seed: 99,
        };
        let a = train(&start, &spec, &xor_batch(), None, None, &cfg).unwrap();
        let b = train(&start, &spec, &xor_batch(), None, None, &cfg).unwrap();
        assert!(a.params.bits_eq(&b.params));
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn all_ones_guidance_matches_unguided_bitwise() {
        let spec = xor_spec(7);
        let start = init_params(&spec).unwrap();
        let ones = GuidanceMatrix::ones_like(&start, StatKind::Squared, NormKind::Max);
        let cfg = TrainConfig {
            lr: 0.3,
            momentum: 0.5,
            max_epochs: 25,
            batch: BatchMode::Full,
            stop: StopRule::None,
            shuffle_seed: 0,
        };
        let plain = train(&start, &spec, &xor_batch(), None, None, &cfg).unwrap();
        let masked = train(&start, &spec, &xor_batch(), None, Some(&ones), &cfg).unwrap();
        assert!(plain.params.bits_eq(&masked.params));
    }

    #[test]
    fn zero_guidance_freezes_everything() {
        let spec = xor_spec(7);
        let start = init_params(&spec).unwrap();
        let mut zeros = GuidanceMatrix::ones_like(&start, StatKind::Squared, NormKind::ForcedZero);
        zeros.values = zeros.values.map(|_| 0.0);
        let cfg = TrainConfig {
            lr: 0.9,
            momentum: 0.9,
            max_epochs: 10,
            batch: BatchMode::Full,
            stop: StopRule::None,
            shuffle_seed: 0,
        };
        let out = train(&start, &spec, &xor_batch(), None, Some(&zeros), &cfg).unwrap();
        assert!(out.params.bits_eq(&start));
    }

    #[test]
    fn accuracy_once_stops_early_on_separable_data() {
        // Two linearly separable blobs.
        let inputs = Matrix::from_vec(
            6,
            2,
            vec![0.9, 0.8, 1.0, 0.9, 0.8, 1.0, -0.9, -0.8, -1.0, -0.9, -0.8, -1.0],
        )
        .unwrap();
        let targets = Matrix::from_vec(
            6,
            2,
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        )
        .unwrap();
        let batch = Batch::new(inputs, targets).unwrap();
        let spec = NetworkSpec::new(
            vec![2, 4, 2],
            Activation::Tanh,
            OutputHead::SoftmaxCe,
            5,
        )
        .unwrap();
        let start = init_params(&spec).unwrap();
        let cfg = TrainConfig {
            lr: 0.5,
            momentum: 0.0,
            max_epochs: 500,
            batch: BatchMode::Full,
            stop: StopRule::AccuracyOnce(0.9),
            shuffle_seed: 0,
        };
        let out = train(&start, &spec, &batch, None, None, &cfg).unwrap();
        assert!(out.epochs_used < 500);
        assert!(out.final_train_acc() >= 0.9);
    }
}
