//! Deterministic quadrature oracles for the channel and the bounds.
//!
//! These evaluate the defining integrals literally (raw densities, plain
//! powers, direct Bessel series) on a truncated tensor Gauss–Legendre grid,
//! sharing no code with the Monte-Carlo estimators.

use std::f64::consts::PI;

use qfsk_lab::channel::ChannelParams;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `∫_a^b f` with an `n`-point Gauss–Legendre rule on each of `panels`
/// equal sub-intervals.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += 0.5 * h * wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    total
}

/// `I0(z)` by its power series in plain arithmetic (moderate `z` only).
pub fn bessel_i0(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-18 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Rayleigh density of one envelope.
pub fn rayleigh_pdf(y: f64, p: &ChannelParams) -> f64 {
    let s2 = p.sigma2();
    y / s2 * (-y * y / (2.0 * s2)).exp()
}

/// Rice density of the transmitted envelope, with Bessel argument `y`.
pub fn rice_pdf(y: f64, p: &ChannelParams) -> f64 {
    let s2 = p.sigma2();
    let mu = p.mu();
    y / s2 * bessel_i0(y) * (-(y * y + mu * mu) / (2.0 * s2)).exp()
}

/// Upper truncation `μ + 12σ`.
pub fn upper(p: &ChannelParams) -> f64 {
    p.mu() + 12.0 * p.sigma()
}

/// Integrals of the 4-D channel law at one SNR on a tensor grid.
pub struct TensorOracle {
    y: Vec<f64>,
    w: Vec<f64>,
    ray: Vec<f64>,
    i0: Vec<f64>,
    rice_const: f64,
}

impl TensorOracle {
    pub fn new(params: &ChannelParams, nodes: usize) -> Self {
        let (x, wt) = gauss_legendre(nodes);
        let b = upper(params);
        let y: Vec<f64> = x.iter().map(|v| 0.5 * b * (v + 1.0)).collect();
        let w: Vec<f64> = wt.iter().map(|v| 0.5 * b * v).collect();
        let ray = y.iter().map(|&v| rayleigh_pdf(v, params)).collect();
        let i0 = y.iter().map(|&v| bessel_i0(v)).collect();
        let mu = params.mu();
        Self {
            y,
            w,
            ray,
            i0,
            rice_const: (-mu * mu / (2.0 * params.sigma2())).exp(),
        }
    }

    /// Calls `f(weight, W)` once per unordered node tuple, where `weight`
    /// includes the tuple's multiplicity and `W[i] = W(y|i)`.
    fn for_each(&self, mut f: impl FnMut(f64, [f64; 4])) {
        let n = self.y.len();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for d in c..n {
                        let idx = [a, b, c, d];
                        let mult = multiplicity(&idx) as f64;
                        let mut weight = mult;
                        let mut dens = 1.0;
                        for &k in &idx {
                            weight *= self.w[k];
                            dens *= self.ray[k];
                        }
                        if dens == 0.0 {
                            continue;
                        }
                        let wy = idx.map(|k| dens * self.i0[k] * self.rice_const);
                        f(weight, wy);
                    }
                }
            }
        }
    }

    /// `∫ W(y|i) dy`. Over a permutation orbit of nodes `W(y|i)` averages
    /// to the mean over tones, so one value serves every `i`.
    pub fn mass(&self) -> f64 {
        let mut m = 0.0;
        self.for_each(|wt, wy| m += wt * wy.iter().sum::<f64>() / 4.0);
        m
    }

    /// `E0(ρ) = -log ∫ ((1/4) Σ_i W(y|i)^{1/(1+ρ)})^{1+ρ} dy` for each `ρ`.
    pub fn e0(&self, rhos: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; rhos.len()];
        self.for_each(|wt, wy| {
            for (a, &rho) in acc.iter_mut().zip(rhos) {
                let tau = 1.0 / (1.0 + rho);
                let beta: f64 = wy.iter().map(|v| v.powf(tau)).sum::<f64>() / 4.0;
                *a += wt * beta.powf(1.0 + rho);
            }
        });
        acc.iter().map(|v| -v.ln()).collect()
    }

    /// `ω̄''(ρ)`: `∫ Q_ρ(y) ∂²/∂τ² log β(y, τ) dy` at `τ = 1/(1+ρ)`, from the
    /// literal `β`, `β'`, `β''`.
    pub fn omega_pp(&self, rhos: &[f64]) -> Vec<f64> {
        let mut num = vec![0.0; rhos.len()];
        let mut den = vec![0.0; rhos.len()];
        self.for_each(|wt, wy| {
            for (i, &rho) in rhos.iter().enumerate() {
                let tau = 1.0 / (1.0 + rho);
                let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
                for &v in &wy {
                    let p = v.powf(tau);
                    let l = v.ln();
                    b0 += p / 4.0;
                    b1 += p * l / 4.0;
                    b2 += p * l * l / 4.0;
                }
                let q = b0.powf(1.0 + rho);
                num[i] += wt * q * (b0 * b2 - b1 * b1) / (b0 * b0);
                den[i] += wt * q;
            }
        });
        num.iter().zip(&den).map(|(a, b)| a / b).collect()
    }

    /// Mutual information with uniform inputs, in bits.
    pub fn capacity_bits(&self) -> f64 {
        let mut c = 0.0;
        self.for_each(|wt, wy| {
            let p: f64 = wy.iter().sum::<f64>() / 4.0;
            for &v in &wy {
                if v > 0.0 {
                    c += wt * v / 4.0 * (v / p).log2();
                }
            }
        });
        c
    }
}

fn multiplicity(idx: &[usize; 4]) -> u32 {
    let mut m = 24;
    let mut run = 1;
    for i in 1..4 {
        if idx[i] == idx[i - 1] {
            run += 1;
            m /= run;
        } else {
            run = 1;
        }
    }
    m
}

/// Central differences of a smooth function: `(f', f'')` at `x`.
pub fn central_differences(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let (lo, mid, hi) = (f(x - h), f(x), f(x + h));
    ((hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-13);
    }

    #[test]
    fn multiplicities_count_permutations() {
        assert_eq!(multiplicity(&[0, 1, 2, 3]), 24);
        assert_eq!(multiplicity(&[0, 0, 2, 3]), 12);
        assert_eq!(multiplicity(&[0, 0, 2, 2]), 6);
        assert_eq!(multiplicity(&[1, 1, 1, 3]), 4);
        assert_eq!(multiplicity(&[5, 5, 5, 5]), 1);
    }
}
