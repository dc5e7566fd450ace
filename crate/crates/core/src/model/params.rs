use crate::error::{KelsimError, Result};

/// Physical and analytical constants of the model.
///
/// `lambda0` and `c_gn` are the maximal-regularity and Gagliardo-Nirenberg
/// constants. They are existential in the analysis, so here they are either
/// supplied by the user or taken from the empirical estimators in
/// [`crate::diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub chi: f64,
    pub mu: f64,
    pub c_d: f64,
    pub m_exp: f64,
    pub lambda0: f64,
    pub c_gn: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            dim: 2,
            chi: 1.0,
            mu: 0.0,
            c_d: 1.0,
            m_exp: 1.0,
            lambda0: 1.0,
            c_gn: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KelsimError::Config(msg));
        if self.dim < 1 {
            return bad(format!("dim must be >= 1, got {}", self.dim));
        }
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return bad(format!("chi must be positive, got {}", self.chi));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be nonnegative, got {}", self.mu));
        }
        if !(self.c_d > 0.0 && self.c_d.is_finite()) {
            return bad(format!("c_d must be positive, got {}", self.c_d));
        }
        if !self.m_exp.is_finite() {
            return bad(format!("m must be finite, got {}", self.m_exp));
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return bad(format!("lambda0 must be positive, got {}", self.lambda0));
        }
        if !(self.c_gn > 0.0 && self.c_gn.is_finite()) {
            return bad(format!("c_gn must be positive, got {}", self.c_gn));
        }
        Ok(())
    }

    /// `chi * max{1, lambda0}`, the combination that recurs in every threshold.
    pub fn sensitivity_scale(&self) -> f64 {
        self.chi * self.lambda0.max(1.0)
    }
}
