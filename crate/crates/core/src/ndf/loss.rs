//! Normalized L1 losses and the combined objective.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const LOSS_EPS: f64 = 1e-7;

/// `sum_b |z_b - est_b|_1 / (sum_b |z_b|_1 + 1e-7)` over a batch of equal-length pairs.
pub fn norm_l1_loss<T: Real>(estimates: &[&[T]], targets: &[&[T]]) -> Result<f64> {
    if estimates.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} estimates for {} targets",
            estimates.len(),
            targets.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, z) in estimates.iter().zip(targets) {
        if e.len() != z.len() {
            return Err(Error::ShapeMismatch(format!("estimate of {} samples, target {}", e.len(), z.len())));
        }
        num += e.iter().zip(z.iter()).map(|(a, b)| (a.to_f64_lossy() - b.to_f64_lossy()).abs()).sum::<f64>();
        den += l1(z);
    }
    Ok(num / (den + LOSS_EPS))
}

pub(crate) fn l1<T: Real>(x: &[T]) -> f64 {
    x.iter().map(|v| v.to_f64_lossy().abs()).sum()
}

/// Subgradient of `|x|`, zero at zero.
pub(crate) fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Checks that `lambda` is 0 or 1.
pub fn check_lambda(lambda_vdm: f64) -> Result<()> {
    if lambda_vdm == 0.0 || lambda_vdm == 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda_vdm))
    }
}

/// `L_coh + L_diff + lambda L_vdm` with `lambda` restricted to {0, 1}.
pub fn total_loss(l_coh: f64, l_diff: f64, l_vdm: f64, lambda_vdm: f64) -> Result<f64> {
    check_lambda(lambda_vdm)?;
    Ok(l_coh + l_diff + lambda_vdm * l_vdm)
}
