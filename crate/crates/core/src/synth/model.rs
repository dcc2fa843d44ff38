use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("exponent {0} outside (0, 1)")]
    Exponent(f64),
    #[error("need 0 < t_l < t_e, got t_l = {t_l}, t_e = {t_e}")]
    Range { t_l: f64, t_e: f64 },
    #[error("prefactor must be positive, got {0}")]
    Prefactor(f64),
    #[error("elapsed time {0} outside the defined range")]
    OutOfRange(f64),
}

/// Pure power-law spread `prefactor * t^(-alpha)` on `[t_l, t_e]`, with `t`
/// the elapsed time since the open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealizedSpreadModel {
    pub prefactor: f64,
    pub alpha: f64,
    pub t_l: f64,
    pub t_e: f64,
}

/// Daily mean of the idealized spread, exact and in the `t_l << t_e`
/// approximation `spread(t_e) / (1 - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealMean {
    pub exact: f64,
    pub approximation: f64,
}

impl IdealMean {
    pub fn relative_gap(&self) -> f64 {
        (self.approximation - self.exact).abs() / self.exact
    }
}

impl IdealizedSpreadModel {
    pub fn new(prefactor: f64, alpha: f64, t_l: f64, t_e: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::Exponent(alpha));
        }
        if !(t_l > 0.0 && t_l < t_e && t_e.is_finite()) {
            return Err(ModelError::Range { t_l, t_e });
        }
        if !(prefactor > 0.0 && prefactor.is_finite()) {
            return Err(ModelError::Prefactor(prefactor));
        }
        Ok(Self {
            prefactor,
            alpha,
            t_l,
            t_e,
        })
    }

    pub fn spread_at(&self, elapsed: f64) -> Result<f64, ModelError> {
        if !(self.t_l <= elapsed && elapsed <= self.t_e) {
            return Err(ModelError::OutOfRange(elapsed));
        }
        Ok(self.prefactor * elapsed.powf(-self.alpha))
    }

    pub fn mean(&self) -> IdealMean {
        let q = 1.0 - self.alpha;
        let exact = self.prefactor / q * (self.t_e.powf(q) - self.t_l.powf(q)) / (self.t_e - self.t_l);
        IdealMean {
            exact,
            approximation: self.prefactor * self.t_e.powf(-self.alpha) / q,
        }
    }

    /// Spread at the close over the exact daily mean.
    pub fn terminal_ratio(&self) -> f64 {
        self.prefactor * self.t_e.powf(-self.alpha) / self.mean().exact
    }

    /// The same curve written against the reference time `scale`:
    /// `c * (t / scale)^(-alpha)` with `c = prefactor * scale^(-alpha)`.
    pub fn prefactor_at_scale(&self, scale: f64) -> f64 {
        self.prefactor * scale.powf(-self.alpha)
    }

    /// Prefactor that keeps the curve unchanged when the reference time is
    /// multiplied by `k`.
    pub fn rescaled_prefactor(prefactor: f64, alpha: f64, k: f64) -> f64 {
        prefactor * k.powf(-alpha)
    }
}
