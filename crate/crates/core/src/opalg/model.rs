use num_bigint::BigInt;

use super::diffop::DiffOp;
use crate::exactalg::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model requires k >= 2, got {0}")]
    InvalidK(i64),
}

/// The model fields in polar form, all read as real derivations:
/// `X1 = dt`, `X2 = dtheta + t^k R`, `R = r dr`, `M = (t/k) dt`.
#[derive(Debug, Clone)]
pub struct ModelFields {
    pub k: u32,
    pub x1: DiffOp,
    pub x2: DiffOp,
    pub r: DiffOp,
    pub m: DiffOp,
}

pub fn build_model(k: i64) -> Result<ModelFields, ModelError> {
    if k < 2 || k > u32::MAX as i64 {
        return Err(ModelError::InvalidK(k));
    }
    let ku = k as u32;
    let x1 = DiffOp::dt();
    let x2 = &DiffOp::dtheta() + &(&DiffOp::t_pow(ku) * &DiffOp::rr());
    let m = (&DiffOp::t() * &DiffOp::dt()).scale(&Rational::new(BigInt::from(1), BigInt::from(k)));
    Ok(ModelFields { k: ku, x1, x2, r: DiffOp::rr(), m })
}
