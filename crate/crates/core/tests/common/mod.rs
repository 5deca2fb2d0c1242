//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

pub mod quadrature;

use qfsk_lab::codes::{concat_generators, CodeConfig, ConvCodeSpec, CrcSpec, Trellis};
use qfsk_lab::gf4::{poly_divmod, Gf4Poly, Gf4Symbol};

/// Brute-force spectrum: encodes all `4^K` messages and tallies codeword
/// weights. Returns `(n_t, n_c)` indexed by weight `0..=d_tilde`.
///
/// `n_t` counts codewords whose CRC word starts at position 0 and whose
/// quotient `q = word / g` has no internal run of `ν + m` zeros, i.e. paths
/// that leave the zero state of the concatenated trellis exactly once.
pub fn brute_force_spectrum(code: &CodeConfig, d_tilde: u32) -> (Vec<u64>, Vec<u64>) {
    let k = code.k();
    assert!(k <= 11, "brute force limited to small K");
    let mut n_t = vec![0u64; d_tilde as usize + 1];
    let mut n_c = vec![0u64; d_tilde as usize + 1];
    let one = Gf4Poly::one();
    let g = code.crc().map_or(&one, CrcSpec::poly);
    let run = code.nu() + code.m();
    let mut msg = vec![Gf4Symbol::ZERO; k];
    for idx in 1..(1u64 << (2 * k)) {
        for (i, s) in msg.iter_mut().enumerate() {
            *s = Gf4Symbol::new((idx >> (2 * i)) as u8);
        }
        let cw = code.encode(&msg);
        let w = cw.iter().filter(|c| !c.is_zero()).count() as u32;
        if w > d_tilde {
            continue;
        }
        n_c[w as usize] += 1;
        let word = match code.crc() {
            Some(crc) => qfsk_lab::codes::crc_encode(&msg, crc),
            None => msg.clone(),
        };
        if word[0].is_zero() {
            continue;
        }
        let (q, rem) = poly_divmod(&Gf4Poly::from_coeffs(word), g).unwrap();
        assert!(rem.is_zero());
        let mut zeros = 0;
        let mut single = true;
        for c in q.coeffs() {
            if c.is_zero() {
                zeros += 1;
                if zeros >= run {
                    single = false;
                    break;
                }
            } else {
                zeros = 0;
            }
        }
        if single {
            n_t[w as usize] += 1;
        }
    }
    (n_t, n_c)
}

/// Block-code weight distribution by dynamic programming on the trellis of
/// the product code `[g·g1, g·g2]` (memory `ν + m`), fed `K` free symbols and
/// flushed with `ν + m` zeros. Returns `n_c` indexed by weight.
pub fn product_trellis_spectrum(
    conv: &ConvCodeSpec,
    crc: Option<&CrcSpec>,
    k: usize,
    d_tilde: u32,
) -> Vec<u64> {
    let product = match crc {
        Some(crc) => {
            let (h1, h2) = concat_generators(crc, conv);
            ConvCodeSpec::new(h1, h2).unwrap()
        }
        None => conv.clone(),
    };
    let trellis = Trellis::new(&product);
    let states = trellis.num_states();
    let width = d_tilde as usize + 1;
    let mut cur = vec![0u64; states * width];
    cur[0] = 1;
    let steps = k + product.nu();
    for t in 0..steps {
        let mut next = vec![0u64; states * width];
        let inputs: &[u8] = if t < k { &[0, 1, 2, 3] } else { &[0] };
        for s in 0..states {
            for w in 0..width {
                let c = cur[s * width + w];
                if c == 0 {
                    continue;
                }
                for &u in inputs {
                    let nw = w + trellis.output_weight(s, u) as usize;
                    if nw < width {
                        next[trellis.next_state(s, u) * width + nw] += c;
                    }
                }
            }
        }
        cur = next;
    }
    let mut n_c = cur[..width].to_vec();
    n_c[0] -= 1; // the all-zero codeword
    n_c
}

/// Every zero-terminated path of the base trellis with its summed metric,
/// sorted by metric (descending). Paths are the `4^(K+m)` CRC-word-length
/// inputs, CRC or not.
pub fn exhaustive_paths(
    obs: &[qfsk_lab::channel::Observation],
    code: &CodeConfig,
    metric: qfsk_lab::channel::Metric,
) -> Vec<(Vec<Gf4Symbol>, f64)> {
    let len = code.crc_word_len();
    assert!(len <= 8, "exhaustive search limited to short inputs");
    let mut out = Vec::with_capacity(1 << (2 * len));
    for idx in 0..(1u64 << (2 * len)) {
        let input: Vec<Gf4Symbol> = (0..len).map(|i| Gf4Symbol::new((idx >> (2 * i)) as u8)).collect();
        let cw = qfsk_lab::codes::conv_encode_zt(&input, code.conv());
        let m: f64 = cw
            .iter()
            .zip(obs)
            .map(|(c, y)| metric.apply(y[c.value() as usize]))
            .sum();
        out.push((input, m));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Noisy observations of a random codeword; returns the message too.
pub fn noisy_frame(
    code: &CodeConfig,
    params: &qfsk_lab::channel::ChannelParams,
    rng: &mut impl rand::Rng,
) -> (Vec<Gf4Symbol>, Vec<qfsk_lab::channel::Observation>) {
    let msg: Vec<Gf4Symbol> = (0..code.k()).map(|_| Gf4Symbol::new(rng.random_range(0..4))).collect();
    let obs = code
        .encode(&msg)
        .iter()
        .map(|c| qfsk_lab::channel::sample_observation(c.value() as usize, params, rng))
        .collect();
    (msg, obs)
}
