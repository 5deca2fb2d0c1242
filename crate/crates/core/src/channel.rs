//! Noncoherent 4-FSK on AWGN: envelope detector outputs and their densities.
//!
//! Symbol `x` is sent on tone `x` (tone index = GF(4) symbol value). The
//! detector output for one channel use is `y ∈ R₊^Q`: the transmitted tone
//! sees a Rice envelope and every other tone a Rayleigh envelope, with
//! `σ² = μ = 2Es/N0` after the `2/N0` scaling. Because `μ/σ² = 1` the Bessel
//! argument of the Rice density is `y` itself.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::special::log_i0;

/// Alphabet size.
pub const Q: usize = 4;

/// Detector outputs for one channel use.
pub type Observation = [f64; Q];

/// Channel state: the symbol SNR `Es/N0` (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    es_over_n0: f64,
}

impl ChannelParams {
    pub fn new(es_over_n0: f64) -> Result<Self, Error> {
        if !(es_over_n0 > 0.0 && es_over_n0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Es/N0 must be positive and finite, got {es_over_n0}"
            )));
        }
        Ok(Self { es_over_n0 })
    }

    pub fn from_db(es_over_n0_db: f64) -> Result<Self, Error> {
        Self::new(db_to_linear(es_over_n0_db))
    }

    pub fn es_over_n0(&self) -> f64 {
        self.es_over_n0
    }

    pub fn es_over_n0_db(&self) -> f64 {
        10.0 * self.es_over_n0.log10()
    }

    /// Per-quadrature noise variance `σ² = 2Es/N0`.
    pub fn sigma2(&self) -> f64 {
        2.0 * self.es_over_n0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2().sqrt()
    }

    /// Rice noncentrality `μ = 2Es/N0`.
    pub fn mu(&self) -> f64 {
        2.0 * self.es_over_n0
    }

    /// Envelope of tone `x` and of the other tones, from four standard
    /// normals per tone. Shared by the sampler and by estimators that reuse
    /// one set of normals across SNR values.
    pub fn observation_from_normals(&self, x: usize, z: &[f64; 2 * Q]) -> Observation {
        let s = self.sigma();
        let mu = self.mu();
        let mut y = [0.0; Q];
        for (k, yk) in y.iter_mut().enumerate() {
            let i = s * z[2 * k] + if k == x { mu } else { 0.0 };
            let q = s * z[2 * k + 1];
            *yk = i.hypot(q);
        }
        y
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Draws the detector output for symbol `x ∈ 0..Q`.
pub fn sample_observation<R: Rng + ?Sized>(x: usize, params: &ChannelParams, rng: &mut R) -> Observation {
    assert!(x < Q, "symbol index {x} out of range");
    let mut z = [0.0; 2 * Q];
    for v in &mut z {
        *v = rng.sample(StandardNormal);
    }
    params.observation_from_normals(x, &z)
}

/// `log W(y|x)`. Returns `-∞` if any component is `≤ 0` (the density
/// vanishes on the boundary of its support).
pub fn log_density(y: &Observation, x: usize, params: &ChannelParams) -> f64 {
    assert!(x < Q, "symbol index {x} out of range");
    if y.iter().any(|&v| !(v > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let s2 = params.sigma2();
    let mu = params.mu();
    let sum_log: f64 = y.iter().map(|v| v.ln()).sum();
    let energy: f64 = y.iter().map(|v| v * v).sum();
    sum_log - Q as f64 * s2.ln() + log_i0(y[x]) - (mu * mu + energy) / (2.0 * s2)
}

/// Per-tone decoding metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// The envelope `y_i` itself.
    #[default]
    Envelope,
    /// Square-law `y_i²`.
    SquareLaw,
}

impl Metric {
    #[inline]
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Metric::Envelope => y,
            Metric::SquareLaw => y * y,
        }
    }
}

/// Envelope branch metric of `symbol`; larger is better.
pub fn branch_metric(y: &Observation, symbol: usize) -> f64 {
    y[symbol]
}
