//! Batched LSTM over `[steps][batch][features]` buffers, gates ordered i, f, g, o.

use super::linalg::matmul;
use crate::scalar::Real;

/// Borrowed cell weights: `w_ih [4H, input]`, `w_hh [4H, H]`, `bias [4H]`.
#[derive(Clone, Copy)]
pub struct LstmWeights<'a, T> {
    pub w_ih: &'a [T],
    pub w_hh: &'a [T],
    pub bias: &'a [T],
    pub input: usize,
    pub hidden: usize,
}

/// Gradient buffers with the layout of [`LstmWeights`].
pub struct LstmGrads<'a, T> {
    pub w_ih: &'a mut [T],
    pub w_hh: &'a mut [T],
    pub bias: &'a mut [T],
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache<T> {
    pub steps: usize,
    pub batch: usize,
    pub hidden: usize,
    pub reverse: bool,
    /// Post-activation gates `[steps][batch][4H]`.
    gates: Vec<T>,
    /// Cell states `[steps][batch][H]`.
    cells: Vec<T>,
    /// Hidden outputs `[steps][batch][H]`, indexed by sequence position.
    pub out: Vec<T>,
}

/// Runs the recurrence over `x [steps][batch][input]`. With `reverse` the sequence is read
/// from the last step to the first; outputs stay aligned with their input positions.
pub fn lstm_forward<T: Real>(w: LstmWeights<'_, T>, x: &[T], steps: usize, batch: usize, reverse: bool) -> LstmCache<T> {
    let (h, inp) = (w.hidden, w.input);
    let g4 = 4 * h;
    assert_eq!(x.len(), steps * batch * inp, "lstm input shape");
    let mut gates = vec![T::zero(); steps * batch * g4];
    let mut cells = vec![T::zero(); steps * batch * h];
    let mut out = vec![T::zero(); steps * batch * h];
    let zeros = vec![T::zero(); batch * h];
    let mut prev: Option<usize> = None;
    for k in 0..steps {
        let s = if reverse { steps - 1 - k } else { k };
        let a = &mut gates[s * batch * g4..(s + 1) * batch * g4];
        for row in a.chunks_exact_mut(g4) {
            row.copy_from_slice(w.bias);
        }
        matmul(&x[s * batch * inp..(s + 1) * batch * inp], false, w.w_ih, true, a, batch, inp, g4, true);
        let (h_prev, c_prev) = match prev {
            Some(p) => (&out[p * batch * h..(p + 1) * batch * h], &cells[p * batch * h..(p + 1) * batch * h]),
            None => (&zeros[..], &zeros[..]),
        };
        if prev.is_some() {
            matmul(h_prev, false, w.w_hh, true, a, batch, h, g4, true);
        }
        let mut c_new = vec![T::zero(); batch * h];
        let mut h_new = vec![T::zero(); batch * h];
        for b in 0..batch {
            let row = &mut a[b * g4..(b + 1) * g4];
            for j in 0..h {
                let i = row[j].sigmoid();
                let f = row[h + j].sigmoid();
                let g = row[2 * h + j].tanh();
                let o = row[3 * h + j].sigmoid();
                row[j] = i;
                row[h + j] = f;
                row[2 * h + j] = g;
                row[3 * h + j] = o;
                let c = f * c_prev[b * h + j] + i * g;
                c_new[b * h + j] = c;
                h_new[b * h + j] = o * c.tanh();
            }
        }
        cells[s * batch * h..(s + 1) * batch * h].copy_from_slice(&c_new);
        out[s * batch * h..(s + 1) * batch * h].copy_from_slice(&h_new);
        prev = Some(s);
    }
    LstmCache {
        steps,
        batch,
        hidden: h,
        reverse,
        gates,
        cells,
        out,
    }
}

/// Back-propagates `d_out [steps][batch][H]`, accumulating into `grads`. Returns the input
/// gradient when `want_input` is set.
pub fn lstm_backward<T: Real>(
    w: LstmWeights<'_, T>,
    x: &[T],
    cache: &LstmCache<T>,
    d_out: &[T],
    grads: LstmGrads<'_, T>,
    want_input: bool,
) -> Option<Vec<T>> {
    let (steps, batch, h, inp) = (cache.steps, cache.batch, w.hidden, w.input);
    let g4 = 4 * h;
    assert_eq!(d_out.len(), steps * batch * h, "lstm output gradient shape");
    let mut dx = want_input.then(|| vec![T::zero(); steps * batch * inp]);
    let mut dh_next = vec![T::zero(); batch * h];
    let mut dc_next = vec![T::zero(); batch * h];
    let mut da = vec![T::zero(); batch * g4];
    let zeros = vec![T::zero(); batch * h];
    let one = T::one();
    for k in (0..steps).rev() {
        let s = if cache.reverse { steps - 1 - k } else { k };
        let prev = match (k, cache.reverse) {
            (0, _) => None,
            (_, false) => Some(s - 1),
            (_, true) => Some(s + 1),
        };
        let gates = &cache.gates[s * batch * g4..(s + 1) * batch * g4];
        let cells = &cache.cells[s * batch * h..(s + 1) * batch * h];
        let c_prev = prev.map_or(&zeros[..], |p| &cache.cells[p * batch * h..(p + 1) * batch * h]);
        let d_step = &d_out[s * batch * h..(s + 1) * batch * h];
        for b in 0..batch {
            let row = &gates[b * g4..(b + 1) * g4];
            let dar = &mut da[b * g4..(b + 1) * g4];
            for j in 0..h {
                let idx = b * h + j;
                let (i, f, g, o) = (row[j], row[h + j], row[2 * h + j], row[3 * h + j]);
                let tc = cells[idx].tanh();
                let dh = d_step[idx] + dh_next[idx];
                let d_o = dh * tc;
                let dc = dc_next[idx] + dh * o * (one - tc * tc);
                dar[j] = dc * g * i * (one - i);
                dar[h + j] = dc * c_prev[idx] * f * (one - f);
                dar[2 * h + j] = dc * i * (one - g * g);
                dar[3 * h + j] = d_o * o * (one - o);
                dc_next[idx] = dc * f;
            }
        }
        matmul(&da, true, &x[s * batch * inp..(s + 1) * batch * inp], false, grads.w_ih, g4, batch, inp, true);
        if let Some(p) = prev {
            matmul(&da, true, &cache.out[p * batch * h..(p + 1) * batch * h], false, grads.w_hh, g4, batch, h, true);
        }
        for row in da.chunks_exact(g4) {
            for (gb, &v) in grads.bias.iter_mut().zip(row) {
                *gb += v;
            }
        }
        if let Some(dx) = dx.as_mut() {
            matmul(&da, false, w.w_ih, false, &mut dx[s * batch * inp..(s + 1) * batch * inp], batch, g4, inp, false);
        }
        matmul(&da, false, w.w_hh, false, &mut dh_next, batch, g4, h, false);
    }
    dx
}
