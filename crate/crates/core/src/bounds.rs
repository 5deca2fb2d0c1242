//! Finite-blocklength benchmarks for noncoherent 4-FSK: the saddlepoint
//! approximation of the random-coding union (RCU) bound and the normal
//! approximation.
//!
//! Every integral over `R₊^Q` is estimated from one pool of standard normals
//! (common random numbers across `ρ` and SNR). Observations are drawn from
//! `W(·|0)` and weighted by `1/p(y)`, `p(y) = (1/Q) Σ_i W(y|i)`; since every
//! integrand is symmetric in the tones, this has the same expectation as
//! weighting by `1/W(y|0)` with lower variance. All quantities depend on `y`
//! only through `ℓ_i = log I0(y_i)` (the remaining factors of `W` are common
//! to all tones and cancel), and are evaluated in the log domain.
//!
//! Writing `τ = 1/(1+ρ)`, `π_i ∝ e^{τℓ_i}` and `H = -Σ π_i log π_i`, the
//! integrands reduce to `g/f^{1+ρ} = H` and `g'/f^{1+ρ} = H² + τ³ Var_π(ℓ)`,
//! and the importance weight is `f^{1+ρ}/p = Q (Σ_i e^{τℓ_i})^{1+ρ} / Σ_i e^{ℓ_i}`.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Q};
use crate::error::Error;
use crate::special::{big_psi, log_i0, log_sum_exp, q_function};

const LN_Q: f64 = 1.386_294_361_119_890_6; // ln 4

/// Samples drawn from one random substream.
const BLOCK: usize = 4096;

/// Lower end of the search interval for `ρ̂ < 0`.
const RHO_MIN: f64 = -0.99;
/// Largest `ρ` tried when widening the bracket above 1.
const RHO_MAX: f64 = 64.0;

/// Blocklength and codebook size at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    /// Blocklength in channel uses.
    pub n: usize,
    /// `log_4 M`: the codebook holds `M = 4^K` codewords.
    #[serde(rename = "K")]
    pub k: usize,
    pub params: ChannelParams,
}

impl BoundPoint {
    pub fn new(n: usize, k: usize, params: ChannelParams) -> Result<Self, Error> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1 and K >= 1, got n = {n}, K = {k}"
            )));
        }
        Ok(Self { n, k, params })
    }

    /// `ln M`.
    pub fn log_m(&self) -> f64 {
        self.k as f64 * LN_Q
    }

    /// Rate in nats per channel use.
    pub fn r_nats(&self) -> f64 {
        self.log_m() / self.n as f64
    }

    /// Rate in bits per channel use.
    pub fn r_bits(&self) -> f64 {
        self.r_nats() / LN_2
    }
}

/// Sample counts, tolerances and randomness for the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub e0_samples: usize,
    pub omega_samples: usize,
    pub capacity_samples: usize,
    /// Bisection stops once `|E0'(ρ) - R|` is below this (nats).
    pub tol: f64,
    pub seed: u64,
    pub workers: usize,
}

impl BoundConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            e0_samples: 200_000,
            omega_samples: 100_000,
            capacity_samples: 100_000,
            tol: 1e-4,
            seed,
            workers: 1,
        }
    }

    fn max_samples(&self) -> usize {
        self.e0_samples.max(self.omega_samples).max(self.capacity_samples)
    }
}

/// Standard normals, `2Q` per sample, from substreams of `BLOCK` samples.
/// The pool depends only on `(seed, len)`, not on the worker count.
#[derive(Debug, Clone)]
pub struct NormalPool {
    z: Vec<[f64; 2 * Q]>,
}

impl NormalPool {
    pub fn generate(seed: u64, len: usize, workers: usize) -> Self {
        let mut z = vec![[0.0; 2 * Q]; len];
        for_each_block(&mut z, workers, |block, out| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            for s in out {
                for v in s.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
        });
        Self { z }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Runs `f(block index, block)` over `BLOCK`-sized chunks of `data` on up to
/// `workers` threads. Each block is written by exactly one thread.
fn for_each_block<T: Send, F>(data: &mut [T], workers: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync,
{
    let blocks: Vec<(usize, &mut [T])> = data.chunks_mut(BLOCK).enumerate().collect();
    let workers = workers.clamp(1, blocks.len().max(1));
    if workers == 1 {
        for (b, chunk) in blocks {
            f(b, chunk);
        }
        return;
    }
    let mut lanes: Vec<Vec<(usize, &mut [T])>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, item) in blocks.into_iter().enumerate() {
        lanes[i % workers].push(item);
    }
    let f = &f;
    std::thread::scope(|scope| {
        for lane in lanes {
            scope.spawn(move || {
                for (b, chunk) in lane {
                    f(b, chunk);
                }
            });
        }
    });
}

/// `ℓ_i = log I0(y_i)` for observations `y ~ W(·|x)` at one SNR, shifted so
/// that `max_i ℓ_i = 0` per sample.
#[derive(Debug, Clone)]
pub struct ChannelSamples {
    ell: Vec<[f64; Q]>,
    /// `log Σ_i e^{ℓ_i}` per sample.
    lse: Vec<f64>,
    sent: usize,
}

impl ChannelSamples {
    /// Observations for tone 0 built from the first `count` entries of `pool`.
    pub fn from_pool(params: &ChannelParams, pool: &NormalPool, count: usize, workers: usize) -> Self {
        Self::from_pool_sent(params, pool, count, workers, 0)
    }

    /// As [`from_pool`](Self::from_pool), conditioning on tone `sent`
    /// instead. By symmetry every estimate is unchanged in distribution.
    pub fn from_pool_sent(params: &ChannelParams, pool: &NormalPool, count: usize, workers: usize, sent: usize) -> Self {
        assert!(sent < Q, "tone {sent} out of range");
        let count = count.min(pool.len());
        let mut ell = vec![[0.0; Q]; count];
        let z = &pool.z[..count];
        for_each_block(&mut ell, workers, |block, out| {
            let base = block * BLOCK;
            for (j, l) in out.iter_mut().enumerate() {
                let y = params.observation_from_normals(sent, &z[base + j]);
                let mut max = f64::NEG_INFINITY;
                for (li, yi) in l.iter_mut().zip(y) {
                    *li = log_i0(yi);
                    max = max.max(*li);
                }
                for li in l.iter_mut() {
                    *li -= max;
                }
            }
        });
        let lse = ell.iter().map(|l| log_sum_exp(l)).collect();
        Self { ell, lse, sent }
    }

    /// Fresh pool of `count` samples from `seed`.
    pub fn draw(params: &ChannelParams, count: usize, seed: u64, workers: usize) -> Self {
        let pool = NormalPool::generate(seed, count, workers);
        Self::from_pool(params, &pool, count, workers)
    }

    pub fn len(&self) -> usize {
        self.ell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ell.is_empty()
    }

    /// A prefix of these samples.
    pub fn prefix(&self, count: usize) -> Self {
        let count = count.min(self.ell.len());
        Self {
            ell: self.ell[..count].to_vec(),
            lse: self.lse[..count].to_vec(),
            sent: self.sent,
        }
    }

    /// Per-sample tilted quantities at `ρ`: `(log w, H, Var_π ℓ)`.
    fn tilted(&self, rho: f64) -> Result<Vec<(f64, f64, f64)>, Error> {
        let tau = 1.0 / (1.0 + rho);
        let mut out = Vec::with_capacity(self.ell.len());
        for (i, (l, &lse)) in self.ell.iter().zip(&self.lse).enumerate() {
            let t = Tilt::new(l, tau);
            let mean_l: f64 = t.pi.iter().zip(l).map(|(p, v)| p * v).sum();
            let var_l: f64 = t.pi.iter().zip(l).map(|(p, v)| p * (v - mean_l).powi(2)).sum();
            let log_w = t.log_weight(rho, lse);
            if !(log_w.is_finite() && t.entropy.is_finite() && var_l.is_finite()) {
                return Err(Error::NonFinite { rho, sample: i });
            }
            out.push((log_w, t.entropy, var_l));
        }
        Ok(out)
    }

    /// `E0(ρ)`, `E0'(ρ)`, `E0''(ρ)` with standard errors.
    pub fn gallager(&self, rho: f64) -> Result<GallagerEval, Error> {
        check_rho(rho)?;
        let tilted = self.tilted(rho)?;
        let n = tilted.len() as f64;
        let tau = 1.0 / (1.0 + rho);
        let tau3 = tau * tau * tau;
        let max_log = tilted.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut s0, mut s00, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0);
        for &(lw, h, v) in &tilted {
            let w = (lw - max_log).exp();
            s0 += w;
            s00 += w * w;
            s1 += w * h;
            s2 += w * (h * h + tau3 * v);
        }
        let mean_w = s0 / n;
        let r = s1 / s0;
        let d = s2 / s0 - r * r;
        let (mut v1, mut v2) = (0.0, 0.0);
        for &(lw, h, v) in &tilted {
            let w = (lw - max_log).exp();
            v1 += (w * (h - r)).powi(2);
            let g = h * h + tau3 * v;
            v2 += (w * (g - s2 / s0 - 2.0 * r * (h - r))).powi(2);
        }
        let var_w = (s00 / n - mean_w * mean_w).max(0.0);
        Ok(GallagerEval {
            rho,
            e0: (1.0 + rho) * LN_Q - max_log - mean_w.ln(),
            e0p: LN_Q - r,
            e0pp: -d,
            se_e0: (var_w / n).sqrt() / mean_w,
            se_e0p: v1.sqrt() / s0,
            se_e0pp: v2.sqrt() / s0,
            ess: s0 * s0 / s00,
        })
    }

    /// `E0'(ρ)` alone, for root finding: one pass, rescaling the weight
    /// sums whenever a larger log-weight appears.
    fn e0p(&self, rho: f64) -> Result<f64, Error> {
        let tau = 1.0 / (1.0 + rho);
        let (mut max_log, mut s0, mut s1) = (f64::NEG_INFINITY, 0.0, 0.0);
        for (i, (l, &lse)) in self.ell.iter().zip(&self.lse).enumerate() {
            let t = Tilt::new(l, tau);
            let lw = t.log_weight(rho, lse);
            if !(lw.is_finite() && t.entropy.is_finite()) {
                return Err(Error::NonFinite { rho, sample: i });
            }
            if lw > max_log {
                let scale = (max_log - lw).exp();
                s0 *= scale;
                s1 *= scale;
                max_log = lw;
            }
            let w = (lw - max_log).exp();
            s0 += w;
            s1 += w * t.entropy;
        }
        Ok(LN_Q - s1 / s0)
    }

    /// `ω̄''(ρ)`: the mean of `Var_π(ℓ)` at `τ = 1/(1+ρ)` under the tilted
    /// law `Q_ρ ∝ ((1/Q) Σ W(y|i)^τ)^{1+ρ}`, by self-normalized weighting.
    pub fn omega_pp(&self, rho: f64) -> Result<OmegaEval, Error> {
        check_rho(rho)?;
        let tilted = self.tilted(rho)?;
        let max_log = tilted.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut s0, mut s00, mut s1) = (0.0, 0.0, 0.0);
        for &(lw, _, v) in &tilted {
            let w = (lw - max_log).exp();
            s0 += w;
            s00 += w * w;
            s1 += w * v;
        }
        let value = s1 / s0;
        let ess = s0 * s0 / s00;
        if ess < 0.01 * tilted.len() as f64 {
            return Err(Error::LowEffectiveSampleSize {
                ess,
                samples: tilted.len(),
            });
        }
        let var: f64 = tilted
            .iter()
            .map(|&(lw, _, v)| ((lw - max_log).exp() * (v - value)).powi(2))
            .sum();
        Ok(OmegaEval {
            value,
            std_err: var.sqrt() / s0,
            ess,
        })
    }

    /// Capacity and dispersion from the information density
    /// `i(y) = log2 Q - log2(1 + Σ_{i≠x} I0(y_i)/I0(y_x))` for sent tone `x`.
    pub fn capacity_dispersion(&self) -> CapacityDispersion {
        let n = self.ell.len() as f64;
        let dens: Vec<f64> = self
            .ell
            .iter()
            .zip(&self.lse)
            .map(|(l, lse)| (LN_Q - (lse - l[self.sent])) / LN_2)
            .collect();
        let c = dens.iter().sum::<f64>() / n;
        let v = dens.iter().map(|d| (d - c).powi(2)).sum::<f64>() / (n - 1.0);
        CapacityDispersion {
            c_bits: c,
            v_bits: v,
            se_c_bits: (v / n).sqrt(),
        }
    }

    /// Solves `E0'(ρ̂) = R` by bisection. `E0'` is evaluated on these fixed
    /// samples, where it is exactly nonincreasing in `ρ`.
    pub fn solve_rho_hat(&self, r_nats: f64, tol: f64) -> Result<RhoHat, Error> {
        let at0 = self.e0p(0.0)?;
        let at1 = self.e0p(1.0)?;
        let (region, mut lo, mut hi) = if at0 < r_nats {
            (RhoRegion::Below, RHO_MIN, 0.0)
        } else if at1 > r_nats {
            let mut hi = 2.0;
            while self.e0p(hi)? > r_nats {
                if hi >= RHO_MAX {
                    return Err(Error::Bracket(format!(
                        "E0'({hi}) still exceeds R = {r_nats} nats"
                    )));
                }
                hi *= 2.0;
            }
            (RhoRegion::Above, 1.0, hi)
        } else {
            (RhoRegion::Interior, 0.0, 1.0)
        };
        if region == RhoRegion::Below && self.e0p(lo)? < r_nats {
            return Err(Error::Bracket(format!(
                "E0'({lo}) is below R = {r_nats} nats; rate too close to log Q"
            )));
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let d = self.e0p(mid)? - r_nats;
            if d.abs() < tol || hi - lo < 1e-12 {
                break;
            }
            if d > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(RhoHat { region, rho: mid })
    }

    /// Saddlepoint RCU approximation at `point` (whose `params` must be the
    /// ones these samples were drawn at). `omega` supplies `ω̄''`, typically
    /// a prefix of these samples.
    pub fn rcu(&self, omega: &ChannelSamples, point: &BoundPoint, tol: f64) -> Result<RcuEvaluation, Error> {
        let n = point.n as f64;
        let r = point.r_nats();
        let rho_hat = self.solve_rho_hat(r, tol)?;
        let rho = rho_hat.rho;
        let g = self.gallager(rho)?;
        let v = -g.e0pp;
        let om = omega.omega_pp(rho)?;
        let exponent = (-n * (g.e0 - rho * r)).exp();
        let theta = theta_n(rho, point.n, om.value);
        let psi = theta * (big_psi(rho * (n * v).sqrt()) + big_psi((1.0 - rho) * (n * v).sqrt()));
        let xi = match rho_hat.region {
            RhoRegion::Below => 1.0,
            RhoRegion::Interior => 0.0,
            RhoRegion::Above => {
                let g1 = self.gallager(1.0)?;
                let om1 = omega.omega_pp(1.0)?;
                (-n * (g1.e0 - r)).exp() * theta_n(1.0, point.n, om1.value)
            }
        };
        let raw = xi + psi * exponent;
        let rcu = raw.clamp(0.0, 1.0);
        let std_err = if rcu > 0.0 && rcu < 1.0 {
            (psi * exponent * n * g.se_e0).abs()
        } else {
            0.0
        };
        Ok(RcuEvaluation {
            esno_db: point.params.es_over_n0_db(),
            region: rho_hat.region,
            rho_hat: rho,
            e0: g.e0,
            v,
            omega_pp: om.value,
            theta_n: theta,
            psi_n: psi,
            xi_tilde: xi,
            rcu,
            std_err,
        })
    }
}

/// Tilted posterior `π_i ∝ e^{τℓ_i}` of one sample (`max ℓ = 0`).
struct Tilt {
    /// `log Σ_i e^{τℓ_i}`.
    lse: f64,
    pi: [f64; Q],
    entropy: f64,
}

impl Tilt {
    #[inline]
    fn new(l: &[f64; Q], tau: f64) -> Self {
        let e = l.map(|v| (tau * v).exp());
        let sum: f64 = e.iter().sum();
        let lse = sum.ln();
        let pi = e.map(|v| v / sum);
        let mean_a: f64 = pi.iter().zip(l).map(|(p, v)| p * tau * v).sum();
        Self {
            lse,
            pi,
            entropy: (lse - mean_a).max(0.0),
        }
    }

    /// `log(f^{1+ρ}/p)` given `log Σ_i e^{ℓ_i}`.
    #[inline]
    fn log_weight(&self, rho: f64, lse_ell: f64) -> f64 {
        (1.0 + rho) * self.lse - lse_ell + LN_Q
    }
}

fn check_rho(rho: f64) -> Result<(), Error> {
    if rho > -1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must exceed -1, got {rho}")))
    }
}

/// `θ_n(ρ) = (1+ρ)^{-1/2} ((1+ρ)/√(2πnω̄''))^ρ`.
pub fn theta_n(rho: f64, n: usize, omega_pp: f64) -> f64 {
    let base = (1.0 + rho) / (2.0 * PI * n as f64 * omega_pp).sqrt();
    base.powf(rho) / (1.0 + rho).sqrt()
}

/// `E0` and its first two derivatives at one `ρ`, with Monte-Carlo standard
/// errors. `ess` is the effective sample size of the importance weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagerEval {
    pub rho: f64,
    pub e0: f64,
    pub e0p: f64,
    pub e0pp: f64,
    pub se_e0: f64,
    pub se_e0p: f64,
    pub se_e0pp: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEval {
    pub value: f64,
    pub std_err: f64,
    pub ess: f64,
}

/// Where the solution of `E0'(ρ) = R` lies relative to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoRegion {
    /// `ρ̂ < 0`: the rate exceeds `E0'(0) = C`.
    Below,
    Interior,
    /// `ρ̂ > 1`: the rate is below the critical rate `E0'(1)`.
    Above,
}

impl RhoRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            RhoRegion::Below => "below",
            RhoRegion::Interior => "interior",
            RhoRegion::Above => "above",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoHat {
    pub region: RhoRegion,
    pub rho: f64,
}

/// One point of the saddlepoint RCU curve. `v = -E0''(ρ̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcuEvaluation {
    pub esno_db: f64,
    pub region: RhoRegion,
    pub rho_hat: f64,
    pub e0: f64,
    pub v: f64,
    pub omega_pp: f64,
    pub theta_n: f64,
    pub psi_n: f64,
    pub xi_tilde: f64,
    pub rcu: f64,
    /// Standard error of `rcu` propagated from that of `E0(ρ̂)`.
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityDispersion {
    pub c_bits: f64,
    pub v_bits: f64,
    pub se_c_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalApproxEvaluation {
    pub esno_db: f64,
    pub c_bits: f64,
    pub v_bits: f64,
    pub fer: f64,
    /// Standard error of `fer` propagated from that of `C`.
    pub std_err: f64,
}

/// `E0`, `E0'`, `E0''` at `ρ > -1` from `samples` fresh observations.
pub fn e0_and_derivatives(
    rho: f64,
    params: &ChannelParams,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<GallagerEval, Error> {
    if samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "E0 estimation needs at least 10^4 samples, got {samples}"
        )));
    }
    ChannelSamples::draw(params, samples, seed, workers).gallager(rho)
}

/// `ω̄''(ρ)` from `samples` fresh observations. Defined for every `ρ > -1`.
pub fn omega_pp(rho: f64, params: &ChannelParams, samples: usize, seed: u64, workers: usize) -> Result<f64, Error> {
    Ok(ChannelSamples::draw(params, samples, seed, workers).omega_pp(rho)?.value)
}

/// Solution of `E0'(ρ̂) = R` at `point`.
pub fn solve_rho_hat(point: &BoundPoint, cfg: &BoundConfig) -> Result<RhoHat, Error> {
    ChannelSamples::draw(&point.params, cfg.e0_samples, cfg.seed, cfg.workers).solve_rho_hat(point.r_nats(), cfg.tol)
}

/// Capacity and dispersion in bits from `samples ≥ 10^5` observations.
pub fn capacity_dispersion(
    params: &ChannelParams,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<CapacityDispersion, Error> {
    if samples < 100_000 {
        return Err(Error::InvalidParameter(format!(
            "capacity estimation needs at least 10^5 samples, got {samples}"
        )));
    }
    Ok(ChannelSamples::draw(params, samples, seed, workers).capacity_dispersion())
}

/// Saddlepoint RCU approximation at one point.
pub fn rcu_saddlepoint(point: &BoundPoint, cfg: &BoundConfig) -> Result<RcuEvaluation, Error> {
    let pool = NormalPool::generate(cfg.seed, cfg.max_samples(), cfg.workers);
    rcu_at(point, cfg, &pool)
}

fn rcu_at(point: &BoundPoint, cfg: &BoundConfig, pool: &NormalPool) -> Result<RcuEvaluation, Error> {
    let samples = ChannelSamples::from_pool(&point.params, pool, cfg.e0_samples, cfg.workers);
    let omega = if cfg.omega_samples <= samples.len() {
        samples.prefix(cfg.omega_samples)
    } else {
        ChannelSamples::from_pool(&point.params, pool, cfg.omega_samples, cfg.workers)
    };
    samples.rcu(&omega, point, cfg.tol)
}

/// Saddlepoint RCU curve over an Es/N0 grid (dB), reusing one pool of
/// random numbers at every point.
pub fn rcu_curve(n: usize, k: usize, esno_db: &[f64], cfg: &BoundConfig) -> Result<Vec<RcuEvaluation>, Error> {
    let pool = NormalPool::generate(cfg.seed, cfg.max_samples(), cfg.workers);
    esno_db
        .iter()
        .map(|&db| rcu_at(&BoundPoint::new(n, k, ChannelParams::from_db(db)?)?, cfg, &pool))
        .collect()
}

/// `FER = q((n(C-R) + ½ log2 n) / √(nV))` with `C`, `R` in bits per use.
pub fn normal_approx_from(point: &BoundPoint, cd: &CapacityDispersion) -> Result<NormalApproxEvaluation, Error> {
    if !(cd.v_bits > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dispersion must be positive, got {}",
            cd.v_bits
        )));
    }
    let n = point.n as f64;
    let scale = (n * cd.v_bits).sqrt();
    let z = (n * (cd.c_bits - point.r_bits()) + 0.5 * n.log2()) / scale;
    let density = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    Ok(NormalApproxEvaluation {
        esno_db: point.params.es_over_n0_db(),
        c_bits: cd.c_bits,
        v_bits: cd.v_bits,
        fer: q_function(z),
        std_err: density * n / scale * cd.se_c_bits,
    })
}

/// Normal approximation at one point.
pub fn normal_approx_fer(point: &BoundPoint, cfg: &BoundConfig) -> Result<NormalApproxEvaluation, Error> {
    let cd = capacity_dispersion(&point.params, cfg.capacity_samples, cfg.seed, cfg.workers)?;
    normal_approx_from(point, &cd)
}

/// Normal-approximation curve over an Es/N0 grid (dB) with common random
/// numbers.
pub fn normal_curve(
    n: usize,
    k: usize,
    esno_db: &[f64],
    cfg: &BoundConfig,
) -> Result<Vec<NormalApproxEvaluation>, Error> {
    if cfg.capacity_samples < 100_000 {
        return Err(Error::InvalidParameter(format!(
            "capacity estimation needs at least 10^5 samples, got {}",
            cfg.capacity_samples
        )));
    }
    let pool = NormalPool::generate(cfg.seed, cfg.capacity_samples, cfg.workers);
    esno_db
        .iter()
        .map(|&db| {
            let point = BoundPoint::new(n, k, ChannelParams::from_db(db)?)?;
            let cd = ChannelSamples::from_pool(&point.params, &pool, cfg.capacity_samples, cfg.workers)
                .capacity_dispersion();
            normal_approx_from(&point, &cd)
        })
        .collect()
}
