mod common;

use common::quadrature::{bessel_i0, integrate, rayleigh_pdf, rice_pdf, upper};
use qfsk_lab::channel::{log_density, sample_observation, ChannelParams, Q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 1_000_000;

fn draws(params: &ChannelParams, x: usize, seed: u64) -> Vec<[f64; Q]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..DRAWS).map(|_| sample_observation(x, params, &mut rng)).collect()
}

#[test]
fn second_moments() {
    let p = ChannelParams::from_db(2.0).unwrap();
    let ys = draws(&p, 1, 21);
    let s2 = p.sigma2();
    let rice_m2 = integrate(|y| y * y * rice_pdf(y, &p), 0.0, upper(&p), 32, 64);
    assert!((rice_m2 - (p.mu() * p.mu() + 2.0 * s2)).abs() < 1e-8 * rice_m2);
    for j in 0..Q {
        let m2 = ys.iter().map(|y| y[j] * y[j]).sum::<f64>() / DRAWS as f64;
        let want = if j == 1 { rice_m2 } else { 2.0 * s2 };
        assert!(((m2 - want) / want).abs() < 0.01, "tone {j}: {m2} vs {want}");
    }
}

/// Kolmogorov–Smirnov statistic of `sample` against `cdf`.
fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 1e-3.
fn ks_critical(n: usize) -> f64 {
    (-(0.5e-3f64).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[test]
fn envelopes_pass_kolmogorov_smirnov() {
    for db in [-2.0, 4.0] {
        let p = ChannelParams::from_db(db).unwrap();
        let ys = draws(&p, 3, 31);
        let s2 = p.sigma2();
        let rayleigh_cdf = |y: f64| 1.0 - (-y * y / (2.0 * s2)).exp();
        // Rice CDF tabulated by quadrature of the density.
        let top = upper(&p);
        let steps = 20_000;
        let h = top / steps as f64;
        let mut table = vec![0.0; steps + 1];
        for i in 0..steps {
            let lo = i as f64 * h;
            table[i + 1] = table[i] + integrate(|y| rice_pdf(y, &p), lo, lo + h, 8, 1);
        }
        let rice_cdf = |y: f64| {
            let t = (y / h).min(steps as f64 - 1e-9);
            let i = t as usize;
            table[i] + (t - i as f64) * (table[i + 1] - table[i])
        };
        let crit = ks_critical(DRAWS);
        let d_rice = ks_statistic(ys.iter().map(|y| y[3]).collect(), rice_cdf);
        assert!(d_rice < crit, "{db} dB Rice: D = {d_rice}, critical {crit}");
        for j in 0..3 {
            let d = ks_statistic(ys.iter().map(|y| y[j]).collect(), rayleigh_cdf);
            assert!(d < crit, "{db} dB Rayleigh tone {j}: D = {d}, critical {crit}");
        }
    }
}

#[test]
fn log_density_matches_product_of_marginals() {
    let p = ChannelParams::from_db(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..1000 {
        let y = sample_observation(0, &p, &mut rng);
        for x in 0..Q {
            let direct: f64 = (0..Q)
                .map(|k| if k == x { rice_pdf(y[k], &p) } else { rayleigh_pdf(y[k], &p) })
                .product();
            let got = log_density(&y, x, &p).exp();
            assert!(((got - direct) / direct).abs() < 1e-10, "{got} vs {direct}");
        }
    }
    assert!(bessel_i0(0.0) == 1.0);
}
