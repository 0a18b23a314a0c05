//! Numerical tolerance policy shared by every rank and positivity decision.
//!
//! A single relative scale `rel` drives all thresholds:
//!
//! * Hermiticity: `‖A − A†‖_max ≤ rel · max(1, ‖A‖_max)`
//! * rank: singular values above `max(m, n) · σ_max · rel` count
//! * support: eigenvalues above `dim · λ_max · rel` belong to the support
//! * comb normalization residuals: `comb` (defaults to `10 · rel`)

/// Default relative tolerance.
pub const DEFAULT_REL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub comb: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::with_rel(DEFAULT_REL)
    }
}

impl Tolerance {
    /// Scales the whole policy from one relative tolerance.
    pub fn with_rel(rel: f64) -> Self {
        Self { rel, comb: 10.0 * rel }
    }

    pub fn with_comb(mut self, comb: f64) -> Self {
        self.comb = comb;
        self
    }

    pub fn hermiticity(&self, max_abs: f64) -> f64 {
        self.rel * max_abs.max(1.0)
    }

    pub fn rank_threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        rows.max(cols) as f64 * sigma_max * self.rel
    }

    pub fn support_cutoff(&self, dim: usize, lambda_max: f64) -> f64 {
        dim as f64 * lambda_max.max(0.0) * self.rel
    }
}
