//! Forward and reverse passes of the dual-mask network.

use num_complex::Complex;

use super::features::Features;
use super::linalg::matmul;
use super::lstm::{lstm_backward, lstm_forward, LstmCache, LstmGrads, LstmWeights};
use super::params::{NetworkParams, COH_OUT, COH_TIME, DIFF_OUT, DIFF_TIME, FREQ_BWD, FREQ_FWD};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Activations of one item, kept for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    frames: usize,
    bins: usize,
    /// Stage-1 input `[F][T][2Q]`.
    x_freq: Vec<T>,
    fwd: LstmCache<T>,
    bwd: LstmCache<T>,
    /// Stage-2 input `[T][F][2 H_f]`.
    x_time: Vec<T>,
    coh: LstmCache<T>,
    diff: LstmCache<T>,
    /// Mask values `[T][F][2]` after tanh.
    m_coh: Vec<T>,
    m_diff: Vec<T>,
}

/// Mask values of one item as `[T][F]` complex arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMasks<T> {
    pub frames: usize,
    pub bins: usize,
    pub coh: Vec<Complex<T>>,
    pub diff: Vec<Complex<T>>,
}

fn weights<T: Real>(p: &NetworkParams<T>, first: usize, input: usize, hidden: usize) -> LstmWeights<'_, T> {
    LstmWeights {
        w_ih: p.data(first),
        w_hh: p.data(first + 1),
        bias: p.data(first + 2),
        input,
        hidden,
    }
}

fn grads<T: Real>(g: &mut NetworkParams<T>, first: usize) -> LstmGrads<'_, T> {
    let [w_ih, w_hh, bias] = &mut g.tensors_mut()[first..first + 3] else {
        unreachable!("three tensors per recurrent block")
    };
    LstmGrads {
        w_ih: &mut w_ih.data,
        w_hh: &mut w_hh.data,
        bias: &mut bias.data,
    }
}

fn to_complex<T: Real>(m: &[T]) -> Vec<Complex<T>> {
    m.chunks_exact(2).map(|v| Complex::new(v[0], v[1])).collect()
}

/// Linear map `[rows, H] -> [rows, 2]` followed by tanh.
fn output_layer<T: Real>(p: &NetworkParams<T>, first: usize, h: &[T], rows: usize, hidden: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * 2];
    let bias = p.data(first + 1);
    for r in out.chunks_exact_mut(2) {
        r.copy_from_slice(bias);
    }
    matmul(h, false, p.data(first), true, &mut out, rows, hidden, 2, true);
    out.iter_mut().for_each(|v| *v = v.tanh());
    out
}

fn check_input<T: Real>(p: &NetworkParams<T>, x: &Features<T>) -> Result<()> {
    let cfg = p.config;
    if x.channels != cfg.channels {
        return Err(Error::ShapeMismatch(format!(
            "input has {} channels, network expects {}",
            x.channels, cfg.channels
        )));
    }
    if x.data.len() != x.frames * x.bins * 2 * x.channels {
        return Err(Error::ShapeMismatch("feature buffer size".into()));
    }
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("network input".into()));
    }
    Ok(())
}

/// Runs the network on one item and keeps what the reverse pass needs.
pub fn forward<T: Real>(p: &NetworkParams<T>, x: &Features<T>) -> Result<(RawMasks<T>, ForwardCache<T>)> {
    check_input(p, x)?;
    let cfg = p.config;
    let (nt, nf, d_in) = (x.frames, x.bins, cfg.input_size());
    let (hf, ht) = (cfg.hidden_freq, cfg.hidden_time);

    let mut x_freq = vec![T::zero(); nf * nt * d_in];
    for t in 0..nt {
        for f in 0..nf {
            let src = (t * nf + f) * d_in;
            let dst = (f * nt + t) * d_in;
            x_freq[dst..dst + d_in].copy_from_slice(&x.data[src..src + d_in]);
        }
    }
    let fwd = lstm_forward(weights(p, FREQ_FWD, d_in, hf), &x_freq, nf, nt, false);
    let bwd = lstm_forward(weights(p, FREQ_BWD, d_in, hf), &x_freq, nf, nt, true);

    let mut x_time = vec![T::zero(); nt * nf * 2 * hf];
    for f in 0..nf {
        for t in 0..nt {
            let src = (f * nt + t) * hf;
            let dst = (t * nf + f) * 2 * hf;
            x_time[dst..dst + hf].copy_from_slice(&fwd.out[src..src + hf]);
            x_time[dst + hf..dst + 2 * hf].copy_from_slice(&bwd.out[src..src + hf]);
        }
    }
    let coh = lstm_forward(weights(p, COH_TIME, 2 * hf, ht), &x_time, nt, nf, false);
    let diff = lstm_forward(weights(p, DIFF_TIME, 2 * hf, ht), &x_time, nt, nf, false);

    let m_coh = output_layer(p, COH_OUT, &coh.out, nt * nf, ht);
    let m_diff = output_layer(p, DIFF_OUT, &diff.out, nt * nf, ht);
    let masks = RawMasks {
        frames: nt,
        bins: nf,
        coh: to_complex(&m_coh),
        diff: to_complex(&m_diff),
    };
    let cache = ForwardCache {
        frames: nt,
        bins: nf,
        x_freq,
        fwd,
        bwd,
        x_time,
        coh,
        diff,
        m_coh,
        m_diff,
    };
    Ok((masks, cache))
}

/// Accumulates parameter gradients given the loss gradient with respect to both masks,
/// each `[T][F]` with the real and imaginary parts as independent coordinates.
pub fn backward<T: Real>(
    p: &NetworkParams<T>,
    cache: &ForwardCache<T>,
    d_coh: &[Complex<T>],
    d_diff: &[Complex<T>],
    g: &mut NetworkParams<T>,
) -> Result<()> {
    let (nt, nf) = (cache.frames, cache.bins);
    if d_coh.len() != nt * nf || d_diff.len() != nt * nf {
        return Err(Error::ShapeMismatch("mask gradient size".into()));
    }
    let cfg = p.config;
    let (d_in, hf, ht) = (cfg.input_size(), cfg.hidden_freq, cfg.hidden_time);
    let rows = nt * nf;

    let mut d_x_time = vec![T::zero(); nt * nf * 2 * hf];
    for (d_mask, m, out_idx, time_idx, lstm) in [
        (d_coh, &cache.m_coh, COH_OUT, COH_TIME, &cache.coh),
        (d_diff, &cache.m_diff, DIFF_OUT, DIFF_TIME, &cache.diff),
    ] {
        let mut d_pre = vec![T::zero(); rows * 2];
        for (i, d) in d_mask.iter().enumerate() {
            d_pre[2 * i] = d.re * (T::one() - m[2 * i] * m[2 * i]);
            d_pre[2 * i + 1] = d.im * (T::one() - m[2 * i + 1] * m[2 * i + 1]);
        }
        matmul(&d_pre, true, &lstm.out, false, g.data_mut(out_idx), 2, rows, ht, true);
        let gb = g.data_mut(out_idx + 1);
        for r in d_pre.chunks_exact(2) {
            gb[0] += r[0];
            gb[1] += r[1];
        }
        let mut d_h = vec![T::zero(); rows * ht];
        matmul(&d_pre, false, p.data(out_idx), false, &mut d_h, rows, 2, ht, false);
        let dx = lstm_backward(
            weights(p, time_idx, 2 * hf, ht),
            &cache.x_time,
            lstm,
            &d_h,
            grads(g, time_idx),
            true,
        )
        .expect("input gradient requested");
        d_x_time.iter_mut().zip(&dx).for_each(|(a, &b)| *a += b);
    }

    let mut d_fwd = vec![T::zero(); nf * nt * hf];
    let mut d_bwd = vec![T::zero(); nf * nt * hf];
    for t in 0..nt {
        for f in 0..nf {
            let src = (t * nf + f) * 2 * hf;
            let dst = (f * nt + t) * hf;
            d_fwd[dst..dst + hf].copy_from_slice(&d_x_time[src..src + hf]);
            d_bwd[dst..dst + hf].copy_from_slice(&d_x_time[src + hf..src + 2 * hf]);
        }
    }
    lstm_backward(weights(p, FREQ_FWD, d_in, hf), &cache.x_freq, &cache.fwd, &d_fwd, grads(g, FREQ_FWD), false);
    lstm_backward(weights(p, FREQ_BWD, d_in, hf), &cache.x_freq, &cache.bwd, &d_bwd, grads(g, FREQ_BWD), false);
    Ok(())
}

/// Mask inference without keeping activations for training.
pub fn infer_masks<T: Real>(p: &NetworkParams<T>, x: &Features<T>) -> Result<RawMasks<T>> {
    forward(p, x).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndf::config::NetConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> NetConfig {
        NetConfig {
            channels: 2,
            bins: 9,
            hidden_freq: 8,
            hidden_time: 8,
            seed: 11,
        }
    }

    fn features(frames: usize, seed: u64) -> Features<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        Features {
            frames,
            bins: 9,
            channels: 2,
            data: (0..frames * 9 * 4).map(|_| r.gen_range(-1.0..1.0)).collect(),
            scale: 1.0,
        }
    }

    #[test]
    fn zero_network_gives_zero_masks() {
        let p = NetworkParams::<f64>::zeros(cfg()).unwrap();
        let (m, _) = forward(&p, &features(6, 1)).unwrap();
        assert_eq!((m.frames, m.bins, m.coh.len(), m.diff.len()), (6, 9, 54, 54));
        assert!(m.coh.iter().chain(&m.diff).all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn masks_are_causal_in_time() {
        let p = NetworkParams::<f64>::init(cfg()).unwrap();
        let x = features(8, 2);
        let (a, _) = forward(&p, &x).unwrap();
        let mut y = x.clone();
        let t0 = 5;
        for v in &mut y.data[t0 * 36..(t0 + 1) * 36] {
            *v += 0.5;
        }
        let (b, _) = forward(&p, &y).unwrap();
        assert_eq!(a.coh[..t0 * 9], b.coh[..t0 * 9]);
        assert_eq!(a.diff[..t0 * 9], b.diff[..t0 * 9]);
        assert_ne!(a.coh[t0 * 9..], b.coh[t0 * 9..]);
    }

    #[test]
    fn rejects_bad_input() {
        let p = NetworkParams::<f64>::init(cfg()).unwrap();
        let mut x = features(4, 3);
        x.channels = 3;
        assert!(forward(&p, &x).is_err());
        let mut x = features(4, 3);
        x.data[5] = f64::NAN;
        assert!(matches!(forward(&p, &x), Err(Error::NonFinite(_))));
    }

    #[test]
    fn backward_matches_finite_differences_on_mask_objective() {
        let p = NetworkParams::<f64>::init(cfg()).unwrap();
        let x = features(5, 4);
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let wc: Vec<Complex<f64>> = (0..45).map(|_| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let wd: Vec<Complex<f64>> = (0..45).map(|_| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let objective = |p: &NetworkParams<f64>| {
            let (m, _) = forward(p, &x).unwrap();
            let dot = |a: &[Complex<f64>], b: &[Complex<f64>]| a.iter().zip(b).map(|(u, v)| u.re * v.re + u.im * v.im).sum::<f64>();
            dot(&m.coh, &wc) + dot(&m.diff, &wd)
        };
        let (_, cache) = forward(&p, &x).unwrap();
        let mut g = p.zeros_like();
        backward(&p, &cache, &wc, &wd, &mut g).unwrap();
        let mut q = p.clone();
        let h = 1e-6;
        for ti in 0..g.tensors().len() {
            for idx in (0..g.tensors()[ti].data.len()).step_by(7) {
                let v = q.tensors()[ti].data[idx];
                q.tensors_mut()[ti].data[idx] = v + h;
                let up = objective(&q);
                q.tensors_mut()[ti].data[idx] = v - h;
                let down = objective(&q);
                q.tensors_mut()[ti].data[idx] = v;
                let num = (up - down) / (2.0 * h);
                let ana = g.tensors()[ti].data[idx];
                assert!((num - ana).abs() < 1e-7 * (1.0 + ana.abs()), "{} {idx}: {num} vs {ana}", g.tensors()[ti].name);
            }
        }
    }
}
