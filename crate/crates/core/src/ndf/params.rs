//! Named parameter tensors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::NetConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(name: &str, shape: &[usize]) -> Self {
        Self {
            name: name.to_string(),
            shape: shape.to_vec(),
            data: vec![T::zero(); shape.iter().product()],
        }
    }
}

/// Recurrent cell tensors: `w_ih [4H, in]`, `w_hh [4H, H]`, `bias [4H]`, gates ordered i, f, g, o.
pub const LSTM_PARTS: [&str; 3] = ["w_ih", "w_hh", "bias"];
pub const LSTM_LAYERS: [&str; 4] = ["freq_fwd", "freq_bwd", "coh_time", "diff_time"];
pub const OUTPUT_LAYERS: [&str; 2] = ["coh_out", "diff_out"];

/// Index of the first tensor of each block in [`NetworkParams::tensors`].
pub(crate) const FREQ_FWD: usize = 0;
pub(crate) const FREQ_BWD: usize = 3;
pub(crate) const COH_TIME: usize = 6;
pub(crate) const DIFF_TIME: usize = 9;
pub(crate) const COH_OUT: usize = 12;
pub(crate) const DIFF_OUT: usize = 14;

/// Names, shapes and fan-in of every tensor, in storage order.
pub fn layout(cfg: &NetConfig) -> Vec<(String, Vec<usize>, usize)> {
    let (hf, ht) = (cfg.hidden_freq, cfg.hidden_time);
    let mut out = Vec::new();
    for (layer, input, h) in [
        ("freq_fwd", cfg.input_size(), hf),
        ("freq_bwd", cfg.input_size(), hf),
        ("coh_time", 2 * hf, ht),
        ("diff_time", 2 * hf, ht),
    ] {
        out.push((format!("{layer}.w_ih"), vec![4 * h, input], input));
        out.push((format!("{layer}.w_hh"), vec![4 * h, h], h));
        out.push((format!("{layer}.bias"), vec![4 * h], h));
    }
    for layer in OUTPUT_LAYERS {
        out.push((format!("{layer}.weight"), vec![2, ht], ht));
        out.push((format!("{layer}.bias"), vec![2], ht));
    }
    out
}

/// All network weights, or a gradient with the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    pub config: NetConfig,
    tensors: Vec<Tensor<T>>,
}

impl<T: Real> NetworkParams<T> {
    pub fn zeros(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let tensors = layout(&config)
            .into_iter()
            .map(|(name, shape, _)| Tensor::zeros(&name, &shape))
            .collect();
        Ok(Self { config, tensors })
    }

    /// Uniform in `+-1/sqrt(fan_in)`, forget-gate bias shifted by +1, seeded by `config.seed`.
    pub fn init(config: NetConfig) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for (t, (_, _, fan_in)) in p.tensors.iter_mut().zip(layout(&config)) {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut t.data {
                *v = T::lit(rng.gen_range(-bound..bound));
            }
            if t.name.ends_with("time.bias") || t.name.starts_with("freq") && t.name.ends_with(".bias") {
                let h = t.data.len() / 4;
                for v in &mut t.data[h..2 * h] {
                    *v += T::one();
                }
            }
        }
        Ok(p)
    }

    /// Builds from tensors, checking names and shapes against `config`.
    pub fn from_tensors(config: NetConfig, tensors: Vec<Tensor<T>>) -> Result<Self> {
        config.validate()?;
        let expected = layout(&config);
        if expected.len() != tensors.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        for ((name, shape, _), t) in expected.iter().zip(&tensors) {
            if *name != t.name || *shape != t.shape || t.data.len() != shape.iter().product::<usize>() {
                return Err(Error::Checkpoint(format!(
                    "tensor {} {:?} does not match {} {:?}",
                    t.name, t.shape, name, shape
                )));
            }
        }
        Ok(Self { config, tensors })
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<T>> {
        self.tensors.iter_mut().find(|t| t.name == name)
    }

    pub(crate) fn data(&self, index: usize) -> &[T] {
        &self.tensors[index].data
    }

    pub(crate) fn data_mut(&mut self, index: usize) -> &mut [T] {
        &mut self.tensors[index].data
    }

    pub fn num_params(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            config: self.config,
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor::zeros(&t.name, &t.shape))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// Flat view of every value in storage order.
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.tensors.iter().flat_map(|t| t.data.iter())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.tensors.iter_mut().flat_map(|t| t.data.iter_mut())
    }

    /// Euclidean norm over all values.
    pub fn norm(&self) -> T {
        self.values().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, other: &Self, a: T) {
        for (x, &y) in self.values_mut().zip(other.values()) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: T) {
        self.values_mut().for_each(|v| *v *= a);
    }

    pub fn cast<U: Real>(&self) -> NetworkParams<U> {
        NetworkParams {
            config: self.config,
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: t.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NetConfig {
        NetConfig {
            channels: 2,
            bins: 9,
            hidden_freq: 8,
            hidden_time: 8,
            seed: 3,
        }
    }

    #[test]
    fn count_matches_enumeration() {
        let p = NetworkParams::<f64>::init(tiny()).unwrap();
        let enumerated: usize = p.tensors().iter().map(|t| t.shape.iter().product::<usize>()).sum();
        assert_eq!(enumerated, p.num_params());
        assert_eq!(enumerated, tiny().param_count());
        // 2 * 32 * (4 + 8 + 1) + 2 * 32 * (16 + 8 + 1) + 2 * 18
        assert_eq!(enumerated, 832 + 1600 + 36);
    }

    #[test]
    fn init_is_seeded() {
        let a = NetworkParams::<f64>::init(tiny()).unwrap();
        let b = NetworkParams::<f64>::init(tiny()).unwrap();
        assert_eq!(a, b);
        let c = NetworkParams::<f64>::init(tiny().with_seed(4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_bounds_and_forget_bias() {
        let p = NetworkParams::<f64>::init(tiny()).unwrap();
        let w = p.get("coh_time.w_ih").unwrap();
        assert!(w.data.iter().all(|v| v.abs() <= 1.0 / 16f64.sqrt()));
        let b = p.get("freq_fwd.bias").unwrap();
        let bound = 1.0 / 8f64.sqrt();
        assert!(b.data[8..16].iter().all(|v| (v - 1.0).abs() <= bound));
        assert!(b.data[..8].iter().all(|v| v.abs() <= bound));
        assert!(p.get("coh_out.bias").unwrap().data.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn from_tensors_rejects_wrong_shape() {
        let p = NetworkParams::<f32>::init(tiny()).unwrap();
        let mut t = p.tensors().to_vec();
        t[0].shape = vec![1, 1];
        assert!(NetworkParams::from_tensors(tiny(), t).is_err());
    }
}
