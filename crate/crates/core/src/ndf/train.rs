//! Batch objective with its gradient, Adam updates and the training loop.

use std::io::Write;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::Features;
use super::loss::{check_lambda, l1, sign, LOSS_EPS};
use super::model::{backward, forward};
use super::params::NetworkParams;
use crate::error::{Error, Result};
use crate::kv::KvConfig;
use crate::scalar::Real;
use crate::signal::{Spectrogram, Stft};

/// One training example: microphone spectrograms (channel 0 is the reference, channel 1 the
/// element facing the target direction) and time-domain targets.
#[derive(Debug, Clone)]
pub struct TrainItem<T> {
    pub mics: Vec<Spectrogram<T>>,
    pub z_coh: Vec<T>,
    pub z_diff: Vec<T>,
    pub z_vdm: Vec<T>,
    pub beta: T,
}

impl<T: Real> TrainItem<T> {
    fn reference(&self) -> Result<&Spectrogram<T>> {
        self.mics
            .first()
            .ok_or_else(|| Error::ShapeMismatch("training item without channels".into()))
    }

    fn check(&self) -> Result<()> {
        let n = self.reference()?.signal_len();
        for (name, z) in [("z_coh", &self.z_coh), ("z_diff", &self.z_diff), ("z_vdm", &self.z_vdm)] {
            if z.len() != n {
                return Err(Error::ShapeMismatch(format!("{name} has {} samples, input {n}", z.len())));
            }
        }
        Ok(())
    }
}

/// Objective options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSettings {
    pub lambda_vdm: f64,
    /// L1 on complex spectra instead of waveforms.
    pub spectral: bool,
}

impl Default for LossSettings {
    fn default() -> Self {
        Self {
            lambda_vdm: 1.0,
            spectral: false,
        }
    }
}

/// Loss components of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub coh: f64,
    pub diff: f64,
    pub vdm: f64,
    pub total: f64,
}

impl LossTerms {
    pub fn is_finite(&self) -> bool {
        self.coh.is_finite() && self.diff.is_finite() && self.vdm.is_finite() && self.total.is_finite()
    }
}

fn spec_l1<T: Real>(s: &Spectrogram<T>) -> f64 {
    s.data()
        .iter()
        .map(|c| c.re.to_f64_lossy().abs() + c.im.to_f64_lossy().abs())
        .sum()
}

struct Targets<T> {
    coh: Spectrogram<T>,
    diff: Spectrogram<T>,
    vdm: Spectrogram<T>,
}

/// Batch loss and, when `grad` is given, its gradient accumulated into `grad`.
pub fn batch_objective<T: Real>(
    params: &NetworkParams<T>,
    items: &[&TrainItem<T>],
    settings: LossSettings,
    mut grad: Option<&mut NetworkParams<T>>,
) -> Result<LossTerms> {
    check_lambda(settings.lambda_vdm)?;
    let first = items
        .first()
        .ok_or_else(|| Error::Dataset("empty training batch".into()))?;
    let stft = Stft::<T>::new(first.reference()?.config())?;
    let lambda = T::lit(settings.lambda_vdm);

    let spectral_targets: Vec<Targets<T>> = if settings.spectral {
        items
            .iter()
            .map(|it| {
                Ok(Targets {
                    coh: stft.forward(&it.z_coh)?,
                    diff: stft.forward(&it.z_diff)?,
                    vdm: stft.forward(&it.z_vdm)?,
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut den = [0.0f64; 3];
    for (i, it) in items.iter().enumerate() {
        it.check()?;
        if settings.spectral {
            let t = &spectral_targets[i];
            den[0] += spec_l1(&t.coh);
            den[1] += spec_l1(&t.diff);
            den[2] += spec_l1(&t.vdm);
        } else {
            den[0] += l1(&it.z_coh);
            den[1] += l1(&it.z_diff);
            den[2] += l1(&it.z_vdm);
        }
    }
    let den = den.map(|d| d + LOSS_EPS);
    let inv = den.map(|d| T::lit(1.0 / d));
    let mut num = [0.0f64; 3];

    for (i, it) in items.iter().enumerate() {
        let y1 = it.reference()?;
        let feats = Features::from_spectrograms(&it.mics)?;
        let (masks, cache) = forward(params, &feats)?;
        let masked = |m: &[Complex<T>]| -> Result<Spectrogram<T>> {
            Spectrogram::from_data(y1.config(), y1.signal_len(), m.iter().zip(y1.data()).map(|(a, b)| a * b).collect())
        };
        let est_coh = masked(&masks.coh)?;
        let est_diff = masked(&masks.diff)?;
        let beta = it.beta;

        // gradients with respect to the masked spectra
        let (g_coh, g_diff) = if settings.spectral {
            let t = &spectral_targets[i];
            let est_vdm = est_coh.add_scaled(&est_diff, beta)?;
            let mut g_coh = Spectrogram::zeros(y1.config(), y1.signal_len());
            let mut g_diff = g_coh.clone();
            for k in 0..est_coh.data().len() {
                let dc = est_coh.data()[k] - t.coh.data()[k];
                let dd = est_diff.data()[k] - t.diff.data()[k];
                let dv = est_vdm.data()[k] - t.vdm.data()[k];
                num[0] += dc.re.to_f64_lossy().abs() + dc.im.to_f64_lossy().abs();
                num[1] += dd.re.to_f64_lossy().abs() + dd.im.to_f64_lossy().abs();
                num[2] += dv.re.to_f64_lossy().abs() + dv.im.to_f64_lossy().abs();
                let sv = Complex::new(sign(dv.re), sign(dv.im)) * (lambda * inv[2]);
                g_coh.data_mut()[k] = Complex::new(sign(dc.re), sign(dc.im)) * inv[0] + sv;
                g_diff.data_mut()[k] = Complex::new(sign(dd.re), sign(dd.im)) * inv[1] + sv * beta;
            }
            (g_coh, g_diff)
        } else {
            let zc = stft.inverse(&est_coh)?;
            let zd = stft.inverse(&est_diff)?;
            let n = zc.len();
            let mut gc = vec![T::zero(); n];
            let mut gd = vec![T::zero(); n];
            for k in 0..n {
                let zv = zc[k] + beta * zd[k];
                let (ec, ed, ev) = (zc[k] - it.z_coh[k], zd[k] - it.z_diff[k], zv - it.z_vdm[k]);
                num[0] += ec.to_f64_lossy().abs();
                num[1] += ed.to_f64_lossy().abs();
                num[2] += ev.to_f64_lossy().abs();
                let sv = sign(ev) * lambda * inv[2];
                gc[k] = sign(ec) * inv[0] + sv;
                gd[k] = sign(ed) * inv[1] + sv * beta;
            }
            (stft.inverse_adjoint(&gc, n)?, stft.inverse_adjoint(&gd, n)?)
        };

        if let Some(g) = grad.as_deref_mut() {
            let to_mask = |gs: &Spectrogram<T>| -> Vec<Complex<T>> {
                gs.data().iter().zip(y1.data()).map(|(a, b)| a * b.conj()).collect()
            };
            backward(params, &cache, &to_mask(&g_coh), &to_mask(&g_diff), g)?;
        }
    }
    let [coh, diff, vdm] = [0, 1, 2].map(|k| num[k] / den[k]);
    Ok(LossTerms {
        coh,
        diff,
        vdm,
        total: coh + diff + settings.lambda_vdm * vdm,
    })
}

/// Optimizer and loop settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stop after this many updates even if epochs remain.
    pub max_steps: Option<usize>,
    pub clip_norm: Option<f64>,
    pub loss: LossSettings,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 10,
            epochs: 150,
            max_steps: None,
            clip_norm: None,
            loss: LossSettings::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Keys `lr`, `batch_size`, `epochs`, `max_steps`, `clip_norm`, `lambda_vdm`, `spectral_loss`.
    pub fn apply(&mut self, cfg: &mut KvConfig) -> Result<()> {
        cfg.take_into("lr", &mut self.lr)?;
        cfg.take_into("batch_size", &mut self.batch_size)?;
        cfg.take_into("epochs", &mut self.epochs)?;
        if let Some(v) = cfg.take("max_steps")? {
            self.max_steps = Some(v);
        }
        if let Some(v) = cfg.take("clip_norm")? {
            self.clip_norm = Some(v);
        }
        cfg.take_into("lambda_vdm", &mut self.loss.lambda_vdm)?;
        cfg.take_into("spectral_loss", &mut self.loss.spectral)?;
        check_lambda(self.loss.lambda_vdm)?;
        if self.batch_size == 0 || !(self.lr > 0.0) {
            return Err(Error::InvalidConfig("batch_size and lr must be positive".into()));
        }
        Ok(())
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: NetworkParams<T>,
    v: NetworkParams<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(params: &NetworkParams<T>) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut NetworkParams<T>, grad: &NetworkParams<T>, cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
        let lr = T::lit(cfg.lr);
        let eps = T::lit(cfg.eps);
        let c1 = T::one() - T::lit(cfg.beta1.powi(self.t));
        let c2 = T::one() - T::lit(cfg.beta2.powi(self.t));
        let one = T::one();
        for (((p, &g), m), v) in params
            .values_mut()
            .zip(grad.values())
            .zip(self.m.values_mut())
            .zip(self.v.values_mut())
        {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}

/// One row of the loss trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub terms: LossTerms,
}

/// Columns `step,L_coh,L_diff,L_vdm,L_final`.
pub fn write_loss_trace<W: Write>(trace: &[LossRecord], mut out: W) -> Result<()> {
    writeln!(out, "step,L_coh,L_diff,L_vdm,L_final")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.step, r.terms.coh, r.terms.diff, r.terms.vdm, r.terms.total
        )?;
    }
    Ok(())
}

/// Trains in place and returns the loss of every update, computed before the update.
/// `on_step` sees each record as it is produced.
pub fn train<T: Real>(
    params: &mut NetworkParams<T>,
    items: &[TrainItem<T>],
    cfg: &TrainConfig,
    mut on_step: impl FnMut(&LossRecord),
) -> Result<Vec<LossRecord>> {
    if items.is_empty() {
        return Err(Error::Dataset("no training items".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1".into()));
    }
    check_lambda(cfg.loss.lambda_vdm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(params);
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut trace = Vec::new();
    let mut step = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|m| step >= m) {
                return Ok(trace);
            }
            let batch: Vec<&TrainItem<T>> = chunk.iter().map(|&i| &items[i]).collect();
            let mut grad = params.zeros_like();
            let terms = batch_objective(params, &batch, cfg.loss, Some(&mut grad))?;
            if !terms.is_finite() || !grad.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss at step {step}: coh {} diff {} vdm {} total {}",
                    terms.coh, terms.diff, terms.vdm, terms.total
                )));
            }
            if let Some(max) = cfg.clip_norm {
                let norm = grad.norm().to_f64_lossy();
                if norm > max {
                    grad.scale(T::lit(max / norm));
                }
            }
            adam.step(params, &grad, cfg);
            let record = LossRecord { step, terms };
            on_step(&record);
            trace.push(record);
            step += 1;
        }
    }
    Ok(trace)
}
