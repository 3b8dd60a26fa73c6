//! Complex mask pairs and their recombination into the directional estimate.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Spectrogram;

/// Coherent and diffuse masks for one item.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPair<T> {
    pub coh: Spectrogram<T>,
    pub diff: Spectrogram<T>,
}

impl<T: Real> MaskPair<T> {
    pub fn new(coh: Spectrogram<T>, diff: Spectrogram<T>) -> Result<Self> {
        coh.check_shape(&diff)?;
        Ok(Self { coh, diff })
    }

    /// True when every real and imaginary component lies strictly inside (-1, 1).
    pub fn is_bounded(&self) -> bool {
        [&self.coh, &self.diff].iter().all(|m| {
            m.data()
                .iter()
                .all(|c| c.re.abs() < T::one() && c.im.abs() < T::one())
        })
    }
}

/// Masked spectra for one item.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates<T> {
    pub coh: Spectrogram<T>,
    pub diff: Spectrogram<T>,
    pub vdm: Spectrogram<T>,
}

/// `coh = M_coh Y1`, `diff = M_diff Y1`, `vdm = coh + beta diff`.
pub fn apply_and_combine<T: Real>(
    masks: &MaskPair<T>,
    y1: &Spectrogram<T>,
    beta: T,
) -> Result<Estimates<T>> {
    if !masks.coh.same_shape(y1) {
        return Err(Error::ShapeMismatch(format!(
            "masks are {}x{}, reference is {}x{}",
            masks.coh.frames(),
            masks.coh.bins(),
            y1.frames(),
            y1.bins()
        )));
    }
    let coh = masks.coh.hadamard(y1)?;
    let diff = masks.diff.hadamard(y1)?;
    let vdm = coh.add_scaled(&diff, beta)?;
    Ok(Estimates { coh, diff, vdm })
}
