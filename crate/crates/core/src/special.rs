//! Special functions evaluated in the log or scaled domain.

use std::f64::consts::PI;

/// Below this argument `log I0` uses the power series, above it the
/// large-argument expansion.
const LOG_I0_CROSSOVER: f64 = 15.0;

/// `log I0(z)` for the modified Bessel function of the first kind, order 0.
///
/// `I0` is even, so negative arguments are folded. Relative error is below
/// `1e-12` over the whole real line; the value never overflows.
pub fn log_i0(z: f64) -> f64 {
    let z = z.abs();
    if z.is_nan() {
        return f64::NAN;
    }
    if z < LOG_I0_CROSSOVER {
        // I0(z) = Σ (z²/4)^k / (k!)²
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut tail = 0.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            tail += term;
            if term < (1.0 + tail) * 1e-17 {
                break;
            }
            k += 1.0;
        }
        tail.ln_1p()
    } else {
        // I0(z) ~ e^z / √(2πz) · Σ ((2k-1)!!)² / (k! (8z)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
            if next >= term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 {
                break;
            }
            k += 1.0;
        }
        z - 0.5 * (2.0 * PI * z).ln() + sum.ln()
    }
}

/// Scaled complementary error function `erfcx(x) = e^{x²} erfc(x)`.
///
/// Finite for every finite `x ≥ 0`; negative arguments use
/// `erfcx(-x) = 2e^{x²} - erfcx(x)` and overflow to `+∞` for large `|x|`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 25.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // erfcx(x) ~ 1/(x√π) · Σ (-1)^k (2k-1)!! / (2x²)^k
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
    }
    sum / (x * PI.sqrt())
}

/// Upper tail of the standard normal distribution, `q(x) = P[Z > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Ψ(z) = ½ erfc(|z|/√2) e^{z²/2} sign(z)`, evaluated through `erfcx` so
/// that it stays finite for large `|z|`. `sign(0)` is taken as `+1`.
pub fn big_psi(z: f64) -> f64 {
    let v = 0.5 * erfcx(z.abs() / std::f64::consts::SQRT_2);
    if z < 0.0 {
        -v
    } else {
        v
    }
}

/// `log Σ exp(a_i)`, exact for `-∞` entries and `-∞` for an empty slice.
pub fn log_sum_exp(a: &[f64]) -> f64 {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + a.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    // Reference values from 40-digit arithmetic.
    const LOG_I0: [(f64, f64); 12] = [
        (0.0, 0.0),
        (0.001, 2.499_999_843_750_017_4e-7),
        (0.5, 0.061_549_719_185_481_303_941),
        (1.0, 0.235_914_358_507_178_648_69),
        (5.0, 3.304_681_775_822_533_433_8),
        (14.9, 12.639_073_730_400_433_245),
        (15.0, 12.735_669_109_476_906_261),
        (15.1, 12.832_287_538_686_563_419),
        (30.0, 27.384_701_433_171_935_85),
        (100.0, 96.779_732_689_942_583_717),
        (500.0, 495.974_007_668_106_696_46),
        (10000.0, 9994.475_903_781_432_301),
    ];

    #[test]
    fn log_i0_matches_reference() {
        for (z, want) in LOG_I0 {
            assert!(rel(log_i0(z), want) < 1e-12, "z={z}: {} vs {want}", log_i0(z));
            assert_eq!(log_i0(-z), log_i0(z));
        }
    }

    #[test]
    fn log_i0_is_continuous_at_crossover() {
        let below = log_i0(LOG_I0_CROSSOVER - 1e-12);
        let above = log_i0(LOG_I0_CROSSOVER);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn log_i0_large_argument_leading_term() {
        // The leading asymptotic form omits the 1/(8z) correction, so the
        // agreement at z = 500 is about 5e-7 relative, not machine precision.
        let z: f64 = 500.0;
        let lead = z - 0.5 * (2.0 * PI * z).ln();
        assert!(rel(log_i0(z), lead) < 1e-6);
        assert!((log_i0(z) - lead - (1.0 + 1.0 / (8.0 * z)).ln()).abs() < 1e-6);
    }

    #[test]
    fn erfcx_matches_reference() {
        let cases = [
            (0.0, 1.0),
            (0.1, 0.896_456_979_969_126_641_93),
            (1.0, 0.427_583_576_155_807_004_41),
            (5.0, 0.110_704_637_733_068_626_37),
            (20.0, 0.028_174_348_741_051_319_319),
            (25.5, 0.022_108_108_052_519_826_561),
            (26.5, 0.021_275_046_685_371_105_955),
            (50.0, 0.011_281_536_265_323_772_5),
            (1000.0, 5.641_893_014_533_876_542e-4),
        ];
        for (x, want) in cases {
            assert!(rel(erfcx(x), want) < 1e-12, "x={x}: {} vs {want}", erfcx(x));
        }
        assert!((erfcx(-1.0) - (2.0 * 1f64.exp() - 0.427_583_576_155_807_004_41)).abs() < 1e-12);
    }

    #[test]
    fn q_function_matches_reference() {
        let cases = [
            (0.0, 0.5),
            (1.0, 0.158_655_253_931_457_051_41),
            (3.0, 1.349_898_031_630_094_526_7e-3),
            (6.0, 9.865_876_450_376_981_407e-10),
            (10.0, 7.619_853_024_160_526_066e-24),
            (20.0, 2.753_624_118_606_233_695_1e-89),
        ];
        for (x, want) in cases {
            assert!(rel(q_function(x), want) < 1e-12, "x={x}");
        }
        assert!((q_function(-1.0) + q_function(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn big_psi_properties() {
        assert_eq!(big_psi(0.0), 0.5);
        assert_eq!(big_psi(-2.0), -big_psi(2.0));
        // Ψ(z) → 1/(z√(2π)) for large z, and stays finite far beyond the
        // point where e^{z²/2} overflows.
        let z = 1e3;
        assert!(rel(big_psi(z), 1.0 / (z * (2.0 * PI).sqrt())) < 1e-6);
        let direct = 0.5 * libm::erfc(3.0 / 2f64.sqrt()) * (4.5f64).exp();
        assert!(rel(big_psi(3.0), direct) < 1e-13);
    }

    #[test]
    fn log_sum_exp_edges() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
