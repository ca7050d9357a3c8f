use serde::Serialize;

use super::Iet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum KeaneStatus {
    NoConnectionFound,
    /// `T^n(a) = b` for discontinuities `a`, `b` (given as exact strings).
    ConnectionAt {
        n: u64,
        a: String,
        b: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeaneReport {
    pub horizon: u64,
    #[serde(flatten)]
    pub status: KeaneStatus,
}

/// Scans forward orbits of `{0} ∪ interior breakpoints` for `horizon` steps and
/// reports the connection with the smallest `n` (ties broken by starting point).
///
/// The coincidence `T(T⁻¹0) = 0` at `n = 1` is always present and is skipped.
pub fn keane_check<S: Scalar>(iet: &Iet<S>, horizon: u64) -> Result<KeaneReport> {
    if !S::EXACT {
        return Err(Error::FloatModeUnsupported);
    }
    let mut points = vec![S::zero()];
    points.extend(iet.discontinuities());
    let preimage_of_zero = iet.apply_inverse_unchecked(&S::zero());
    let mut orbit = points.clone();
    for n in 1..=horizon {
        for (a, y) in points.iter().zip(orbit.iter_mut()) {
            *y = iet.apply_unchecked(y);
            if let Some(b) = points.iter().find(|p| *p == y) {
                let allowed = n == 1 && *a == preimage_of_zero && b.is_zero();
                if !allowed {
                    return Ok(KeaneReport {
                        horizon,
                        status: KeaneStatus::ConnectionAt {
                            n,
                            a: a.to_exact_string(),
                            b: b.to_exact_string(),
                        },
                    });
                }
            }
        }
    }
    Ok(KeaneReport {
        horizon,
        status: KeaneStatus::NoConnectionFound,
    })
}
