//! Monte-Carlo frame-error campaigns, pairwise error estimates, gaps between
//! FER curves and result persistence.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::{NormalApproxEvaluation, RcuEvaluation};
use crate::channel::{db_to_linear, sample_observation, ChannelParams, Observation};
use crate::codes::CodeConfig;
use crate::decoder::{DecodeStatus, DecoderConfig, ListViterbi};
use crate::error::Error;
use crate::gf4::Gf4Symbol;
use crate::special::log_i0;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Below this many errors the Wilson interval replaces the normal one.
const WILSON_BELOW: u64 = 10;

/// Frames per worker in the first round of a grid point.
const FIRST_ROUND: u64 = 16;

/// Upper limit on frames per worker in one round.
const MAX_ROUND: u64 = 4096;

/// Per-point stopping rule: stop after `min_frame_errors` errors or
/// `max_frames` frames, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_frames: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub code: CodeConfig,
    pub decoder: DecoderConfig,
    pub ebno_grid_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.decoder.validate()?;
        if self.stop.min_frame_errors == 0 || self.stop.max_frames == 0 {
            return Err(Error::InvalidParameter(
                "stopping rule needs min_frame_errors >= 1 and max_frames >= 1".into(),
            ));
        }
        if self.ebno_grid_db.is_empty() {
            return Err(Error::InvalidParameter("empty Eb/N0 grid".into()));
        }
        if let Some(v) = self.ebno_grid_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite grid value {v}")));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// Interval method used for a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Normal,
    Wilson,
}

impl CiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CiMethod::Normal => "normal",
            CiMethod::Wilson => "wilson",
        }
    }
}

/// Statistics of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub ebno_db: f64,
    pub esno_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    /// Wrong message delivered with a passing CRC.
    pub undetected: u64,
    /// No path in the largest list passed the CRC.
    pub list_exhausted: u64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_method: CiMethod,
    /// Mean list size of the last decoding pass, over all frames.
    pub mean_list_size: f64,
    /// Mean 1-based rank of the delivered path, over frames that passed.
    pub mean_rank: f64,
    /// Smallest Hamming distance between a wrongly delivered codeword and
    /// the transmitted one.
    pub min_undetected_distance: Option<usize>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

/// `Es/N0` (linear) for a given `Eb/N0` in dB: `Eb/N0 · 2K/n`.
pub fn ebno_to_esno(ebno_db: f64, code: &CodeConfig) -> f64 {
    db_to_linear(ebno_db) * code.rate_bits()
}

/// `Es/N0` in dB for `Eb/N0` in dB at `K` information symbols and `n`
/// channel symbols.
pub fn ebno_db_to_esno_db(ebno_db: f64, k: usize, n: usize) -> f64 {
    ebno_db + 10.0 * (2.0 * k as f64 / n as f64).log10()
}

pub fn esno_db_to_ebno_db(esno_db: f64, k: usize, n: usize) -> f64 {
    esno_db - 10.0 * (2.0 * k as f64 / n as f64).log10()
}

/// 95% confidence interval on a binomial proportion: normal approximation,
/// or Wilson's score interval below ten errors.
pub fn binomial_ci(errors: u64, frames: u64) -> (f64, f64, CiMethod) {
    if frames == 0 {
        return (0.0, 1.0, CiMethod::Wilson);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    if errors >= WILSON_BELOW {
        let half = Z95 * (p * (1.0 - p) / n).sqrt();
        return ((p - half).max(0.0), (p + half).min(1.0), CiMethod::Normal);
    }
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    (low, (centre + half).min(1.0), CiMethod::Wilson)
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    frames: u64,
    undetected: u64,
    exhausted: u64,
    list_sum: u64,
    rank_sum: u64,
    passed: u64,
    min_distance: Option<usize>,
}

impl Tally {
    fn errors(&self) -> u64 {
        self.undetected + self.exhausted
    }

    fn merge(&mut self, o: &Tally) {
        self.frames += o.frames;
        self.undetected += o.undetected;
        self.exhausted += o.exhausted;
        self.list_sum += o.list_sum;
        self.rank_sum += o.rank_sum;
        self.passed += o.passed;
        self.min_distance = match (self.min_distance, o.min_distance) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

struct Worker {
    rng: ChaCha8Rng,
    decoder: ListViterbi,
    msg: Vec<Gf4Symbol>,
    obs: Vec<Observation>,
}

impl Worker {
    fn run(&mut self, frames: u64, params: &ChannelParams, cfg: &DecoderConfig) -> Result<Tally, Error> {
        let mut t = Tally::default();
        for _ in 0..frames {
            for s in self.msg.iter_mut() {
                *s = Gf4Symbol::new(self.rng.random_range(0..4));
            }
            let code = self.decoder.code();
            let word = code.encode(&self.msg);
            self.obs.clear();
            for c in &word {
                self.obs.push(sample_observation(c.value() as usize, params, &mut self.rng));
            }
            let out = self.decoder.decode(&self.obs, cfg)?;
            t.frames += 1;
            t.list_sum += out.final_list_size as u64;
            match (out.status, out.decision) {
                (DecodeStatus::ListExhausted, _) | (_, None) => t.exhausted += 1,
                (DecodeStatus::CrcPass, Some(dec)) => {
                    t.passed += 1;
                    t.rank_sum += out.list_rank_used as u64;
                    if dec != self.msg {
                        t.undetected += 1;
                        let other = self.decoder.code().encode(&dec);
                        let d = other.iter().zip(&word).filter(|(a, b)| a != b).count();
                        t.min_distance = Some(t.min_distance.map_or(d, |m| m.min(d)));
                    }
                }
            }
        }
        Ok(t)
    }
}

/// Substream of worker `w` at grid point `p`.
fn worker_rng(seed: u64, point: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | worker as u64);
    rng
}

/// Frames per worker in the next round, from the aggregate tally only so
/// that the schedule does not depend on thread timing.
fn next_round(total: &Tally, stop: &StopRule, workers: u64) -> u64 {
    let per_worker = if total.frames == 0 {
        FIRST_ROUND
    } else if total.errors() == 0 {
        total.frames / workers
    } else {
        let missing = stop.min_frame_errors.saturating_sub(total.errors());
        let needed = missing.saturating_mul(total.frames) / total.errors();
        // Aim a little short to limit overshoot past the error target.
        (needed * 3 / 4 / workers).max(1)
    };
    per_worker.clamp(1, MAX_ROUND)
}

/// Runs the sweep, one grid point after another. Results depend only on
/// `(seed, workers)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, Error> {
    cfg.validate()?;
    let code = &cfg.code;
    let mut points = Vec::with_capacity(cfg.ebno_grid_db.len());
    for (p, &ebno_db) in cfg.ebno_grid_db.iter().enumerate() {
        let start = Instant::now();
        let params = ChannelParams::new(ebno_to_esno(ebno_db, code))?;
        let mut workers: Vec<Worker> = (0..cfg.workers)
            .map(|w| Worker {
                rng: worker_rng(cfg.seed, p, w),
                decoder: ListViterbi::new(code),
                msg: vec![Gf4Symbol::ZERO; code.k()],
                obs: Vec::with_capacity(code.n()),
            })
            .collect();
        let mut total = Tally::default();
        while total.errors() < cfg.stop.min_frame_errors && total.frames < cfg.stop.max_frames {
            let nw = cfg.workers as u64;
            let round = (next_round(&total, &cfg.stop, nw) * nw).min(cfg.stop.max_frames - total.frames);
            let shares: Vec<u64> = (0..nw).map(|w| round / nw + u64::from(w < round % nw)).collect();
            let tallies: Vec<Result<Tally, Error>> = if cfg.workers == 1 {
                vec![workers[0].run(shares[0], &params, &cfg.decoder)]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = workers
                        .iter_mut()
                        .zip(&shares)
                        .map(|(w, &n)| s.spawn(move || w.run(n, &params, &cfg.decoder)))
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
                })
            };
            for t in tallies {
                total.merge(&t?);
            }
        }
        let errors = total.errors();
        let (ci_low, ci_high, ci_method) = binomial_ci(errors, total.frames);
        points.push(SweepPoint {
            ebno_db,
            esno_db: params.es_over_n0_db(),
            frames: total.frames,
            frame_errors: errors,
            undetected: total.undetected,
            list_exhausted: total.exhausted,
            fer: errors as f64 / total.frames as f64,
            ci_low,
            ci_high,
            ci_method,
            mean_list_size: total.list_sum as f64 / total.frames as f64,
            mean_rank: if total.passed == 0 {
                f64::NAN
            } else {
                total.rank_sum as f64 / total.passed as f64
            },
            min_undetected_distance: total.min_distance,
            wall_time: start.elapsed(),
        });
    }
    Ok(SweepResult { points })
}

/// Pairwise error estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2Estimate {
    pub p2: f64,
    pub std_err: f64,
    pub samples: u64,
}

/// Monte-Carlo probability that `d` Rayleigh envelopes sum to at least the
/// sum of `d` Rice envelopes (ties count as errors).
///
/// Importance sampling: correct tones are drawn with in-phase mean `μ/2`
/// instead of `μ`, wrong tones as Rice envelopes with noncentrality `μ/2`
/// instead of Rayleigh, so errors are common. Each sample carries the exact
/// likelihood ratio; for the wrong tones that is the phase-averaged ratio
/// `e^{a²/(2σ²)} / I0(a·y/σ²)`, which covers every phase of the dominant
/// error points. This resolves probabilities far below `1/samples`.
pub fn estimate_p2<R: Rng + ?Sized>(d: u32, params: &ChannelParams, samples: u64, rng: &mut R) -> Result<P2Estimate, Error> {
    if d == 0 || samples < 2 {
        return Err(Error::InvalidParameter("estimate_p2 needs d >= 1 and samples >= 2".into()));
    }
    let s = params.sigma();
    let mu = params.mu();
    let a = 0.5 * mu;
    let inv = 1.0 / (2.0 * params.sigma2());
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let (mut t, mut log_w) = (0.0, 0.0);
        for _ in 0..d {
            let z: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let right = mu - a + s * z[0];
            let wrong = (a + s * z[2]).hypot(s * z[3]);
            t += right.hypot(s * z[1]) - wrong;
            log_w += ((right - mu + a).powi(2) - (right - mu).powi(2)) * inv;
            log_w += a * a * inv - log_i0(2.0 * a * wrong * inv);
        }
        if t <= 0.0 {
            let v = log_w.exp();
            sum += v;
            sum2 += v * v;
        }
    }
    let n = samples as f64;
    let p = sum / n;
    let var = ((sum2 - n * p * p) / (n - 1.0)).max(0.0);
    Ok(P2Estimate {
        p2: p,
        std_err: (var / n).sqrt(),
        samples,
    })
}

/// Horizontal distances between two FER curves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapReport {
    /// `(fer, gap_db)`, positive when the first curve needs more SNR.
    pub gaps: Vec<(f64, f64)>,
    /// Queried FER values outside the overlap of the two curves.
    pub omitted: Vec<f64>,
}

/// SNR at which a decreasing `(snr_db, fer)` curve crosses `target`, by
/// linear interpolation of `log fer` in SNR. Points with `fer = 0` are
/// ignored; the first crossing wins.
pub fn interpolate_snr(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(s, f)| s.is_finite() && *f > 0.0)
        .map(|&(s, f)| (s, f.ln()))
        .collect();
    let t = target.ln();
    for w in pts.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 >= t && t >= f1 {
            if f0 == f1 {
                return Some(s0);
            }
            return Some(s0 + (s1 - s0) * (f0 - t) / (f0 - f1));
        }
    }
    None
}

/// Gap in dB between `curve` and `bound` at each queried FER. Both curves
/// must use the same SNR reference and be sorted by SNR.
pub fn gap_to_bound(curve: &[(f64, f64)], bound: &[(f64, f64)], fers: &[f64]) -> GapReport {
    let mut report = GapReport::default();
    for &f in fers {
        match (interpolate_snr(curve, f), interpolate_snr(bound, f)) {
            (Some(a), Some(b)) => report.gaps.push((f, a - b)),
            _ => report.omitted.push(f),
        }
    }
    report
}

/// Preamble written as `#` lines at the top of every CSV file.
#[derive(Debug, Clone, Default)]
pub struct CsvPreamble {
    pub lines: Vec<String>,
}

impl CsvPreamble {
    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        for l in &self.lines {
            writeln!(out, "# {l}")?;
        }
        Ok(())
    }
}

/// Fixed-precision float formatting shared by every CSV column.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == 0.0 || v.is_infinite() {
        format!("{v}")
    } else {
        format!("{v:.6e}")
    }
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "ebno_db",
    "esno_db",
    "frames",
    "frame_errors",
    "undetected",
    "list_exhausted",
    "fer",
    "ci_low",
    "ci_high",
    "ci_method",
    "mean_list_size",
    "mean_rank",
    "min_undetected_distance",
    "status",
];

/// Writes one row per grid point. Wall time is left out so that repeated
/// runs give identical files.
pub fn write_sweep_csv(out: impl Write, preamble: &CsvPreamble, result: &SweepResult, stop: &StopRule) -> Result<(), Error> {
    let mut out = out;
    preamble.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for p in &result.points {
        let status = if p.frame_errors >= stop.min_frame_errors {
            "errors"
        } else {
            "max_frames"
        };
        w.write_record([
            format!("{:.4}", p.ebno_db),
            format!("{:.4}", p.esno_db),
            p.frames.to_string(),
            p.frame_errors.to_string(),
            p.undetected.to_string(),
            p.list_exhausted.to_string(),
            fmt_f64(p.fer),
            fmt_f64(p.ci_low),
            fmt_f64(p.ci_high),
            p.ci_method.as_str().into(),
            format!("{:.6}", p.mean_list_size),
            if p.mean_rank.is_nan() {
                "nan".into()
            } else {
                format!("{:.6}", p.mean_rank)
            },
            p.min_undetected_distance.map_or(String::new(), |d| d.to_string()),
            status.into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const RCU_COLUMNS: [&str; 9] = ["ebno_db", "esno_db", "region", "rho_hat", "E0", "V", "omega_pp", "rcu", "std_err"];

/// Writes one row per SNR of a saddlepoint-RCU curve for `K` symbols in `n`
/// channel uses.
pub fn write_rcu_csv(out: impl Write, preamble: &CsvPreamble, rows: &[RcuEvaluation], k: usize, n: usize) -> Result<(), Error> {
    let mut out = out;
    preamble.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RCU_COLUMNS)?;
    for r in rows {
        w.write_record([
            format!("{:.4}", esno_db_to_ebno_db(r.esno_db, k, n)),
            format!("{:.4}", r.esno_db),
            r.region.as_str().into(),
            fmt_f64(r.rho_hat),
            fmt_f64(r.e0),
            fmt_f64(r.v),
            fmt_f64(r.omega_pp),
            fmt_f64(r.rcu),
            fmt_f64(r.std_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const NORMAL_COLUMNS: [&str; 6] = ["ebno_db", "esno_db", "C_bits", "V_bits", "fer_normal", "std_err"];

pub fn write_normal_csv(
    out: impl Write,
    preamble: &CsvPreamble,
    rows: &[NormalApproxEvaluation],
    k: usize,
    n: usize,
) -> Result<(), Error> {
    let mut out = out;
    preamble.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NORMAL_COLUMNS)?;
    for r in rows {
        w.write_record([
            format!("{:.4}", esno_db_to_ebno_db(r.esno_db, k, n)),
            format!("{:.4}", r.esno_db),
            fmt_f64(r.c_bits),
            fmt_f64(r.v_bits),
            fmt_f64(r.fer),
            fmt_f64(r.std_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const GAP_COLUMNS: [&str; 2] = ["fer", "gap_db"];

pub fn write_gap_csv(out: impl Write, preamble: &CsvPreamble, report: &GapReport) -> Result<(), Error> {
    let mut out = out;
    preamble.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GAP_COLUMNS)?;
    for &(f, g) in &report.gaps {
        w.write_record([fmt_f64(f), format!("{g:.4}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `(x, y)` pairs from named columns of a CSV file, skipping `#`
/// lines and empty cells.
pub fn read_curve(input: impl std::io::Read, x_col: &str, y_cols: &[&str]) -> Result<(String, Vec<(f64, f64)>), Error> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = r.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let xi = find(x_col).ok_or_else(|| Error::Parse(format!("missing column {x_col}")))?;
    let (yname, yi) = y_cols
        .iter()
        .find_map(|c| find(c).map(|i| (c.to_string(), i)))
        .ok_or_else(|| Error::Parse(format!("none of the columns {y_cols:?} present")))?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Option<f64>, Error> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        };
        if let (Some(x), Some(y)) = (parse(xi)?, parse(yi)?) {
            pts.push((x, y));
        }
    }
    Ok((yname, pts))
}

/// Run description stored next to every result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub build: String,
    pub invocation: Vec<String>,
    pub command: String,
    pub seed: u64,
    pub workers: usize,
    /// Reference of the input SNR grid: `ebno` or `esno`.
    pub snr_ref: String,
    pub conversion: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn conversion_note() -> String {
        "Es/N0 = Eb/N0 * 2K/n (2 bits per GF(4) symbol, n channel uses)".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{ConvCodeSpec, CrcSpec};

    fn code(k: usize, m: usize) -> CodeConfig {
        let crc = match m {
            0 => None,
            _ => Some(CrcSpec::new(crate::spectrum::crc_candidates(m)[0].poly().clone()).unwrap()),
        };
        CodeConfig::new(k, ConvCodeSpec::memory2(), crc).unwrap()
    }

    #[test]
    fn ebno_conversion() {
        let c = CodeConfig::new(64, ConvCodeSpec::memory4(), Some(CrcSpec::new("1,0,0,0,0,0,1".parse().unwrap()).unwrap())).unwrap();
        assert_eq!(c.n(), 148);
        let r = ebno_to_esno(3.0, &c) / db_to_linear(3.0);
        assert!((r - 128.0 / 148.0).abs() < 1e-15);
        let db = ebno_db_to_esno_db(3.0, 64, 148);
        assert!((db_to_linear(db) - ebno_to_esno(3.0, &c)).abs() < 1e-12);
        assert!((esno_db_to_ebno_db(db, 64, 148) - 3.0).abs() < 1e-12);
        assert!(ebno_to_esno(1.0, &c) < ebno_to_esno(1.1, &c));
    }

    #[test]
    fn ci_methods() {
        let (lo, hi, m) = binomial_ci(100, 10_000);
        assert_eq!(m, CiMethod::Normal);
        assert!(lo < 0.01 && hi > 0.01 && (hi - lo - 2.0 * Z95 * (0.01f64 * 0.99 / 1e4).sqrt()).abs() < 1e-12);
        let (lo, hi, m) = binomial_ci(0, 1000);
        assert_eq!(m, CiMethod::Wilson);
        assert_eq!(lo, 0.0);
        // Wilson upper limit at zero successes: z²/(n + z²).
        assert!((hi - Z95 * Z95 / (1000.0 + Z95 * Z95)).abs() < 1e-15);
    }

    #[test]
    fn accounting_adds_up() {
        let cfg = SweepConfig {
            code: code(12, 2),
            decoder: DecoderConfig {
                max_list: 8,
                ..Default::default()
            },
            ebno_grid_db: vec![-2.0, 2.0],
            stop: StopRule {
                min_frame_errors: 30,
                max_frames: 3000,
            },
            seed: 5,
            workers: 3,
        };
        let res = run_sweep(&cfg).unwrap();
        for p in &res.points {
            assert_eq!(p.undetected + p.list_exhausted, p.frame_errors);
            assert_eq!(p.fer, p.frame_errors as f64 / p.frames as f64);
            assert!(p.frame_errors >= 30 || p.frames == 3000);
            assert!(p.ci_low <= p.fer && p.fer <= p.ci_high);
            assert!(p.mean_list_size >= 1.0 && p.mean_list_size <= 8.0);
        }
        assert!(res.points[0].fer > res.points[1].fer);
    }

    #[test]
    fn frame_cap_is_exact() {
        let cfg = SweepConfig {
            code: code(10, 0),
            decoder: DecoderConfig::default(),
            ebno_grid_db: vec![12.0],
            stop: StopRule {
                min_frame_errors: 1,
                max_frames: 1001,
            },
            seed: 1,
            workers: 4,
        };
        let p = &run_sweep(&cfg).unwrap().points[0];
        assert_eq!((p.frames, p.frame_errors), (1001, 0));
        assert_eq!(p.mean_list_size, 1.0);
    }

    #[test]
    fn gap_of_shifted_curve() {
        let base: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 0.5, 10f64.powf(-0.4 * i as f64))).collect();
        let shifted: Vec<(f64, f64)> = base.iter().map(|&(s, f)| (s + 0.5, f)).collect();
        let r = gap_to_bound(&base, &base, &[1e-1, 1e-2]);
        assert!(r.gaps.iter().all(|g| g.1.abs() < 1e-12));
        let r = gap_to_bound(&shifted, &base, &[1e-1, 1e-2, 1e-3, 1e-9]);
        assert_eq!(r.omitted, vec![1e-9]);
        assert!(r.gaps.iter().all(|g| (g.1 - 0.5).abs() < 1e-12));
    }

    #[test]
    fn p2_rejects_zero_distance() {
        let p = ChannelParams::new(1.0).unwrap();
        assert!(estimate_p2(0, &p, 10, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let res = SweepResult {
            points: vec![SweepPoint {
                ebno_db: 1.0,
                esno_db: 0.5,
                frames: 10,
                frame_errors: 2,
                undetected: 1,
                list_exhausted: 1,
                fer: 0.2,
                ci_low: 0.05,
                ci_high: 0.5,
                ci_method: CiMethod::Wilson,
                mean_list_size: 3.0,
                mean_rank: 1.5,
                min_undetected_distance: Some(9),
                wall_time: Duration::from_secs(1),
            }],
        };
        let mut buf = Vec::new();
        let pre = CsvPreamble {
            lines: vec!["seed 1".into()],
        };
        write_sweep_csv(&mut buf, &pre, &res, &StopRule::default()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed 1\nebno_db,"));
        let (name, pts) = read_curve(&buf[..], "ebno_db", &["rcu", "fer"]).unwrap();
        assert_eq!(name, "fer");
        assert_eq!(pts, vec![(1.0, 0.2)]);
    }
}
