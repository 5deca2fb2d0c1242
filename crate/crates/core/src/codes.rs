//! CRC and zero-terminated convolutional encoding over GF(4).
//!
//! A CRC-ZTCC codeword is built by appending `m` systematic CRC symbols to a
//! `K`-symbol message, appending `ν` zeros to flush the encoder, and running
//! the rate-1/2 feedforward encoder `[g1 g2]` over the result. Every trellis
//! step emits the `g1` output followed by the `g2` output.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gf4::{poly_divmod, poly_mul, Gf4Poly, Gf4Symbol};

/// Largest supported encoder memory; the trellis has `4^ν` states.
pub const MAX_MEMORY: usize = 8;

/// A rate-1/2 feedforward convolutional code over GF(4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCodeSpec {
    nu: usize,
    g1: Gf4Poly,
    g2: Gf4Poly,
}

impl ConvCodeSpec {
    /// Both generators must have degree `ν = max(deg g1, deg g2)` and a
    /// nonzero constant term.
    pub fn new(g1: Gf4Poly, g2: Gf4Poly) -> Result<Self, Error> {
        let (d1, d2) = match (g1.degree(), g2.degree()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidCode("zero generator polynomial".into())),
        };
        if d1 != d2 {
            return Err(Error::InvalidCode(format!(
                "generator degrees differ: deg g1 = {d1}, deg g2 = {d2}"
            )));
        }
        if d1 == 0 || d1 > MAX_MEMORY {
            return Err(Error::InvalidCode(format!(
                "memory {d1} outside 1..={MAX_MEMORY}"
            )));
        }
        if g1.coeff(0).is_zero() || g2.coeff(0).is_zero() {
            return Err(Error::InvalidCode(
                "generators need a nonzero constant term".into(),
            ));
        }
        Ok(Self { nu: d1, g1, g2 })
    }

    /// Memory-2 code with `g1 = (1,1,1)`, `g2 = (1,α,1)`, `d_free = 6`.
    pub fn memory2() -> Self {
        Self::new(
            "1,1,1".parse().unwrap(),
            "1,a,1".parse().unwrap(),
        )
        .unwrap()
    }

    /// Memory-4 code with `g1 = (1,1,1,β,α)`, `g2 = (1,α,1,α,β)`, `d_free = 9`.
    pub fn memory4() -> Self {
        Self::new(
            "1,1,1,b,a".parse().unwrap(),
            "1,a,1,a,b".parse().unwrap(),
        )
        .unwrap()
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn g1(&self) -> &Gf4Poly {
        &self.g1
    }

    pub fn g2(&self) -> &Gf4Poly {
        &self.g2
    }

    pub fn num_states(&self) -> usize {
        1 << (2 * self.nu)
    }
}

/// A CRC generator polynomial of degree `m` with unit constant term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrcSpec {
    g: Gf4Poly,
}

impl CrcSpec {
    pub fn new(g: Gf4Poly) -> Result<Self, Error> {
        if g.is_zero() {
            return Err(Error::InvalidCode("zero CRC polynomial".into()));
        }
        if g.coeff(0) != Gf4Symbol::ONE {
            return Err(Error::InvalidCode(format!(
                "CRC polynomial {g} must have constant term 1"
            )));
        }
        Ok(Self { g })
    }

    /// Rescales `g` so that its constant term is 1. The set of codewords
    /// divisible by `g` is unchanged.
    pub fn normalized(g: Gf4Poly) -> Result<Self, Error> {
        let inv = g
            .coeff(0)
            .inv()
            .ok_or_else(|| Error::InvalidCode(format!("CRC polynomial {g} divisible by x")))?;
        Self::new(g.scale(inv))
    }

    /// Degree `m`, the number of parity symbols.
    pub fn m(&self) -> usize {
        self.g.degree().unwrap_or(0)
    }

    pub fn poly(&self) -> &Gf4Poly {
        &self.g
    }
}

/// Message length, inner code and optional CRC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    k: usize,
    conv: ConvCodeSpec,
    crc: Option<CrcSpec>,
}

impl CodeConfig {
    pub fn new(k: usize, conv: ConvCodeSpec, crc: Option<CrcSpec>) -> Result<Self, Error> {
        if k == 0 {
            return Err(Error::InvalidCode("message length K must be >= 1".into()));
        }
        // a degree-0 CRC is the trivial code
        let crc = crc.filter(|c| c.m() > 0);
        Ok(Self { k, conv, crc })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn conv(&self) -> &ConvCodeSpec {
        &self.conv
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    pub fn nu(&self) -> usize {
        self.conv.nu
    }

    /// CRC degree, zero without a CRC.
    pub fn m(&self) -> usize {
        self.crc.as_ref().map_or(0, CrcSpec::m)
    }

    /// Length of the CRC word, `K + m`.
    pub fn crc_word_len(&self) -> usize {
        self.k + self.m()
    }

    /// Number of trellis steps, `K + m + ν`.
    pub fn trellis_len(&self) -> usize {
        self.k + self.m() + self.nu()
    }

    /// Blocklength in channel symbols, `n = 2(K + m + ν)`.
    pub fn n(&self) -> usize {
        2 * self.trellis_len()
    }

    /// Information symbols per channel symbol, `K / n`.
    pub fn rate_symbols(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    /// Information bits per channel symbol, `2K / n`.
    pub fn rate_bits(&self) -> f64 {
        2.0 * self.rate_symbols()
    }

    /// CRC-encodes (when configured) and convolutionally encodes a message.
    pub fn encode(&self, msg: &[Gf4Symbol]) -> Vec<Gf4Symbol> {
        assert_eq!(msg.len(), self.k, "message length");
        match &self.crc {
            Some(crc) => conv_encode_zt(&crc_encode(msg, crc), &self.conv),
            None => conv_encode_zt(msg, &self.conv),
        }
    }

    /// Checks the CRC on a decoded CRC word; always true without a CRC.
    pub fn check(&self, word: &[Gf4Symbol]) -> bool {
        self.crc.as_ref().is_none_or(|crc| crc_check(word, crc))
    }
}

/// Polynomial of a word in trellis order: symbol `t` is the `x^t`
/// coefficient. This is the ordering under which the CRC-ZTCC equals the
/// convolutional code with generators `(g·g1, g·g2)`.
pub fn word_poly(word: &[Gf4Symbol]) -> Gf4Poly {
    Gf4Poly::from_coeffs(word.to_vec())
}

/// Systematic CRC encoding: the message is followed by `m` parity symbols
/// chosen so that the word polynomial `msg(x) + x^K·p(x)` is divisible by `g`.
///
/// With `r = msg mod g` the parity is `p = r·x^(−K) mod g`; `x` is invertible
/// modulo `g` because the constant term of `g` is nonzero.
pub fn crc_encode(msg: &[Gf4Symbol], crc: &CrcSpec) -> Vec<Gf4Symbol> {
    let m = crc.m();
    let g = crc.poly().coeffs();
    let (_, rem) = poly_divmod(&word_poly(msg), crc.poly()).expect("nonzero CRC");
    let mut p = rem.to_symbols(m + 1);
    let g0_inv = g[0].inv().expect("unit constant term");
    for _ in 0..msg.len() {
        // p <- p·x^(−1) mod g: clear the constant term with a multiple of g,
        // then divide by x.
        let c = p[0] * g0_inv;
        if !c.is_zero() {
            for (pi, &gi) in p.iter_mut().zip(g) {
                *pi += c * gi;
            }
        }
        p.rotate_left(1);
        p[m] = Gf4Symbol::ZERO;
    }
    let mut out = msg.to_vec();
    out.extend_from_slice(&p[..m]);
    out
}

/// True iff the word polynomial (trellis order) is divisible by `g`.
pub fn crc_check(word: &[Gf4Symbol], crc: &CrcSpec) -> bool {
    let (_, rem) = poly_divmod(&word_poly(word), crc.poly()).expect("nonzero CRC");
    rem.is_zero()
}

/// Zero-terminated encoding: appends `ν` zeros and emits the `g1` then the
/// `g2` output for each of the `L + ν` input symbols.
pub fn conv_encode_zt(input: &[Gf4Symbol], conv: &ConvCodeSpec) -> Vec<Gf4Symbol> {
    let nu = conv.nu;
    let (g1, g2) = (conv.g1.coeffs(), conv.g2.coeffs());
    let mut out = Vec::with_capacity(2 * (input.len() + nu));
    // hist[j] = input symbol j steps ago (hist[0] = current)
    let mut hist = vec![Gf4Symbol::ZERO; nu + 1];
    let flush = std::iter::repeat_n(Gf4Symbol::ZERO, nu);
    for u in input.iter().copied().chain(flush) {
        hist.rotate_right(1);
        hist[0] = u;
        let mut c1 = Gf4Symbol::ZERO;
        let mut c2 = Gf4Symbol::ZERO;
        for j in 0..=nu {
            c1 += g1[j] * hist[j];
            c2 += g2[j] * hist[j];
        }
        out.push(c1);
        out.push(c2);
    }
    out
}

/// Generators `(g·g1, g·g2)` of the equivalent memory-`(m+ν)` code.
pub fn concat_generators(crc: &CrcSpec, conv: &ConvCodeSpec) -> (Gf4Poly, Gf4Poly) {
    (poly_mul(crc.poly(), &conv.g1), poly_mul(crc.poly(), &conv.g2))
}

/// Precomputed state transitions of the rate-1/2 encoder.
///
/// The state packs the last `ν` inputs, the most recent one in the two low
/// bits, so `next = ((state << 2) | u) & mask`.
#[derive(Debug, Clone)]
pub struct Trellis {
    nu: usize,
    num_states: usize,
    /// `outputs[state * 4 + u]` = `(c1, c2)` symbol pair.
    outputs: Vec<[Gf4Symbol; 2]>,
}

impl Trellis {
    pub fn new(conv: &ConvCodeSpec) -> Self {
        let nu = conv.nu;
        let num_states = conv.num_states();
        let (g1, g2) = (conv.g1.coeffs(), conv.g2.coeffs());
        let mut outputs = Vec::with_capacity(num_states * 4);
        for state in 0..num_states {
            for u in 0..4u8 {
                let mut c1 = g1[0] * Gf4Symbol::new(u);
                let mut c2 = g2[0] * Gf4Symbol::new(u);
                for j in 1..=nu {
                    let past = Gf4Symbol::new((state >> (2 * (j - 1))) as u8);
                    c1 += g1[j] * past;
                    c2 += g2[j] * past;
                }
                outputs.push([c1, c2]);
            }
        }
        Self {
            nu,
            num_states,
            outputs,
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn next_state(&self, state: usize, u: u8) -> usize {
        ((state << 2) | u as usize) & (self.num_states - 1)
    }

    /// Input symbol that drives `prev` to `next` (the low two bits of `next`).
    #[inline]
    pub fn input_of(next: usize) -> u8 {
        (next & 3) as u8
    }

    #[inline]
    pub fn output(&self, state: usize, u: u8) -> [Gf4Symbol; 2] {
        self.outputs[state * 4 + u as usize]
    }

    /// Hamming weight (0, 1 or 2) of the branch output.
    #[inline]
    pub fn output_weight(&self, state: usize, u: u8) -> u32 {
        let [a, b] = self.output(state, u);
        (!a.is_zero()) as u32 + (!b.is_zero()) as u32
    }

    /// Predecessors of `next`: the states whose oldest symbol is dropped.
    #[inline]
    pub fn predecessors(&self, next: usize) -> [usize; 4] {
        let base = next >> 2;
        let top = 2 * (self.nu - 1);
        [
            base,
            base | (1 << top),
            base | (2 << top),
            base | (3 << top),
        ]
    }
}

/// JSON form of a [`CodeConfig`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodeConfigJson {
    #[serde(rename = "K")]
    pub k: usize,
    pub nu: usize,
    pub g1: Gf4Poly,
    pub g2: Gf4Poly,
    #[serde(default)]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Gf4Poly>,
}

impl TryFrom<CodeConfigJson> for CodeConfig {
    type Error = Error;

    fn try_from(raw: CodeConfigJson) -> Result<Self, Error> {
        let conv = ConvCodeSpec::new(raw.g1, raw.g2)?;
        if conv.nu() != raw.nu {
            return Err(Error::InvalidCode(format!(
                "nu = {} but generators have degree {}",
                raw.nu,
                conv.nu()
            )));
        }
        let crc = match (raw.m, raw.g) {
            (0, None) => None,
            (0, Some(g)) if g.degree() == Some(0) => None,
            (m, Some(g)) => {
                let crc = CrcSpec::new(g)?;
                if crc.m() != m {
                    return Err(Error::InvalidCode(format!(
                        "m = {m} but CRC polynomial has degree {}",
                        crc.m()
                    )));
                }
                Some(crc)
            }
            (m, None) => {
                return Err(Error::InvalidCode(format!(
                    "m = {m} requires a CRC polynomial g"
                )))
            }
        };
        CodeConfig::new(raw.k, conv, crc)
    }
}

impl From<&CodeConfig> for CodeConfigJson {
    fn from(c: &CodeConfig) -> Self {
        Self {
            k: c.k,
            nu: c.nu(),
            g1: c.conv.g1.clone(),
            g2: c.conv.g2.clone(),
            m: c.m(),
            g: c.crc.as_ref().map(|crc| crc.poly().clone()),
        }
    }
}

impl Serialize for CodeConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CodeConfigJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CodeConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        CodeConfigJson::deserialize(deserializer)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}
