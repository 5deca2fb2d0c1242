//! Truncated distance spectra and distance-spectrum-optimal CRC search.
//!
//! Error events are enumerated once on the `4^ν`-state trellis of the base
//! code. A CRC-ZTCC codeword is a base-code codeword whose input polynomial
//! is divisible by the CRC polynomial `g`, so each candidate CRC only needs
//! divisibility tests on the stored events and on their compositions.
//!
//! Block-code counts `N_c(w)` include every placement of an event inside the
//! `K + m` input window, and every codeword made of several events separated
//! by at least `ν` zero inputs, as long as the total weight stays within `d̃`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codes::{ConvCodeSpec, CrcSpec, Trellis};
use crate::error::Error;
use crate::gf4::{Gf4Poly, Gf4Symbol};

/// Default limit on the number of stored error events.
pub const DEFAULT_EVENT_CAP: usize = 20_000_000;

/// A path that leaves the zero state once and remerges with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorEvent {
    /// Input sequence in trellis order; nonzero constant and leading term.
    pub input: Gf4Poly,
    /// Hamming weight of the encoder output along the event.
    pub weight: u32,
}

impl ErrorEvent {
    /// Number of input symbols from the first to the last nonzero one.
    pub fn len(&self) -> usize {
        self.input.coeffs().len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_zero()
    }
}

/// Minimum output weight needed to drive each state back to zero.
fn weight_to_zero(trellis: &Trellis) -> Vec<u32> {
    let n = trellis.num_states();
    let mut dist = vec![u32::MAX; n];
    dist[0] = 0;
    // every state reaches zero in at most ν steps, so ν + n rounds is plenty
    loop {
        let mut changed = false;
        for s in 0..n {
            for u in 0..4u8 {
                let ns = trellis.next_state(s, u);
                if dist[ns] == u32::MAX {
                    continue;
                }
                let cand = dist[ns] + trellis.output_weight(s, u);
                if cand < dist[s] {
                    dist[s] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

struct EventSearch<'a, F> {
    trellis: &'a Trellis,
    to_zero: Vec<u32>,
    max_len: usize,
    d_tilde: u32,
    cap: usize,
    found: usize,
    input: Vec<u8>,
    emit: F,
}

impl<F: FnMut(&[u8], u32)> EventSearch<'_, F> {
    fn walk(&mut self, state: usize, weight: u32, last_nonzero: usize) -> Result<(), Error> {
        let t = self.input.len();
        for u in 0..4u8 {
            if u != 0 && t >= self.max_len {
                break;
            }
            let ns = self.trellis.next_state(state, u);
            let w = weight + self.trellis.output_weight(state, u);
            if w + self.to_zero[ns] > self.d_tilde {
                continue;
            }
            if ns == 0 {
                // remerged: u == 0 and the last ν inputs were zero
                self.found += 3;
                if self.found > self.cap {
                    return Err(Error::CandidateCap { cap: self.cap });
                }
                (self.emit)(&self.input[..=last_nonzero], w);
                continue;
            }
            self.input.push(u);
            let last = if u != 0 { t } else { last_nonzero };
            let r = self.walk(ns, w, last);
            self.input.pop();
            r?;
        }
        Ok(())
    }
}

/// Depth-first walk over monic error events (first input symbol 1). The
/// three scalar multiples of each event count against `cap`.
fn walk_monic_events(
    conv: &ConvCodeSpec,
    max_input_len: usize,
    d_tilde: u32,
    cap: usize,
    emit: impl FnMut(&[u8], u32),
) -> Result<(), Error> {
    if d_tilde == 0 || max_input_len == 0 {
        return Ok(());
    }
    let trellis = Trellis::new(conv);
    let mut search = EventSearch {
        to_zero: weight_to_zero(&trellis),
        trellis: &trellis,
        max_len: max_input_len,
        d_tilde,
        cap,
        found: 0,
        input: vec![1],
        emit,
    };
    let w0 = trellis.output_weight(0, 1);
    let s0 = trellis.next_state(0, 1);
    if w0 + search.to_zero[s0] <= d_tilde {
        search.walk(s0, w0, 0)?;
    }
    Ok(())
}

/// Every error event of the base code with output weight `≤ d_tilde` and at
/// most `max_input_len` input symbols, including all nonzero scalar
/// multiples. Events are the building blocks of block codewords: the caller
/// handles placements inside the window and multi-event compositions.
///
/// The result is exhaustive and duplicate-free, sorted by weight; each input
/// polynomial starts at `x^0`. Fails once more than `cap` events are found.
pub fn enumerate_bounded_weight_codewords(
    conv: &ConvCodeSpec,
    max_input_len: usize,
    d_tilde: u32,
    cap: usize,
) -> Result<Vec<ErrorEvent>, Error> {
    let mut events = Vec::new();
    walk_monic_events(conv, max_input_len, d_tilde, cap, |input, weight| {
        let base = Gf4Poly::from_values(input);
        for c in Gf4Symbol::NONZERO {
            events.push(ErrorEvent {
                input: base.scale(c),
                weight,
            });
        }
    })?;
    events.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.input.cmp(&b.input)));
    Ok(events)
}

/// Free distance of the base code (weight of its lightest error event).
pub fn free_distance(conv: &ConvCodeSpec) -> u32 {
    let trellis = Trellis::new(conv);
    let to_zero = weight_to_zero(&trellis);
    (1..4u8)
        .map(|u| trellis.output_weight(0, u) + to_zero[trellis.next_state(0, u)])
        .min()
        .unwrap()
}

/// Truncated distance spectrum, indexed by weight `0..=d_tilde`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSpectrum {
    /// Weight truncation `d̃`.
    pub d_tilde: u32,
    /// `n_t[w]`: error events of weight `w` on the trellis of the
    /// concatenated code (paths that leave and rejoin its zero state once),
    /// counted once regardless of position.
    pub n_t: Vec<u64>,
    /// `n_c[w]`: block codewords of weight `w`.
    pub n_c: Vec<u64>,
}

impl DistanceSpectrum {
    pub fn empty(d_tilde: u32) -> Self {
        Self {
            d_tilde,
            n_t: vec![0; d_tilde as usize + 1],
            n_c: vec![0; d_tilde as usize + 1],
        }
    }

    /// Smallest weight with at least one codeword, if any within `d̃`.
    pub fn d_min(&self) -> Option<u32> {
        self.n_c.iter().position(|&c| c > 0).map(|w| w as u32)
    }

    pub fn n_t_at(&self, w: u32) -> u64 {
        self.n_t.get(w as usize).copied().unwrap_or(0)
    }

    pub fn n_c_at(&self, w: u32) -> u64 {
        self.n_c.get(w as usize).copied().unwrap_or(0)
    }

    /// Distance-spectrum ordering: larger `d_min` first, then fewer
    /// codewords at `d_min`, `d_min + 1`, … up to `d̃`. `Less` means better.
    pub fn dso_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self.d_min(), other.d_min()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) if a != b => b.cmp(&a),
            (Some(d), _) => self.n_c[d as usize..].cmp(&other.n_c[d as usize..]),
        }
    }
}

/// Residue arithmetic modulo `g` on packed GF(4) vectors: coefficient `i`
/// lives in bits `2i..2i+2` of a `u32`.
#[derive(Debug, Clone)]
struct PackedModulus {
    m: usize,
    mask: u32,
    /// `reduce[c]` = packed `c · x^m mod g`.
    reduce: [u32; 4],
    /// `pow[j]` = packed `x^j mod g`.
    pow: Vec<u32>,
}

#[inline]
fn packed_mul_alpha(a: u32) -> u32 {
    let bit0 = a & 0x5555_5555;
    let bit1 = a & 0xaaaa_aaaa;
    (bit0 << 1) ^ bit1 ^ (bit1 >> 1)
}

#[inline]
fn packed_mul_beta(a: u32) -> u32 {
    let bit0 = a & 0x5555_5555;
    let bit1 = a & 0xaaaa_aaaa;
    (bit0 << 1) ^ bit0 ^ (bit1 >> 1)
}

#[inline]
fn packed_scale(a: u32, c: u8) -> u32 {
    match c {
        0 => 0,
        1 => a,
        2 => packed_mul_alpha(a),
        _ => packed_mul_beta(a),
    }
}

impl PackedModulus {
    fn new(g: &Gf4Poly, max_power: usize) -> Self {
        let m = g.degree().unwrap_or(0);
        assert!(m <= 16, "CRC degree above 16 is not supported");
        let mask = if m == 16 { u32::MAX } else { (1u32 << (2 * m)) - 1 };
        let mut reduce = [0u32; 4];
        if m > 0 {
            // x^m = lead^{-1}·(g_0 + … + g_{m-1} x^{m-1}) in characteristic 2
            let lead_inv = g.leading().inv().unwrap();
            let mut low = 0u32;
            for i in 0..m {
                low |= ((g.coeff(i) * lead_inv).value() as u32) << (2 * i);
            }
            for c in 1..4u8 {
                reduce[c as usize] = packed_scale(low, c);
            }
        }
        let mut pm = Self {
            m,
            mask,
            reduce,
            pow: Vec::with_capacity(max_power + 1),
        };
        let mut r = if m == 0 { 0 } else { 1 };
        for _ in 0..=max_power {
            pm.pow.push(r);
            r = pm.mul_x(r);
        }
        pm
    }

    #[inline]
    fn mul_x(&self, r: u32) -> u32 {
        if self.m == 0 {
            return 0;
        }
        let top = (r >> (2 * (self.m - 1))) & 3;
        ((r << 2) & self.mask) ^ self.reduce[top as usize]
    }

    fn residue(&self, nonzeros: &[(u8, u8)]) -> u32 {
        nonzeros
            .iter()
            .fold(0, |acc, &(pos, c)| acc ^ packed_scale(self.pow[pos as usize], c))
    }
}

/// Monic event in the compact form used while counting.
#[derive(Debug, Clone)]
struct CompactEvent {
    nonzeros: Vec<(u8, u8)>,
    len: usize,
    weight: u32,
}

/// Distance spectrum of the CRC-ZTCC with `K`-symbol messages.
///
/// `events` must be the exhaustive event list for input length `K + m` at
/// some weight cap `d̃` (as produced by [`enumerate_bounded_weight_codewords`]);
/// the spectrum is truncated at that same `d̃`. `crc = None` gives the bare
/// ZTCC spectrum.
pub fn spectrum_for_crc(
    events: &[ErrorEvent],
    nu: usize,
    crc: Option<&CrcSpec>,
    k: usize,
    d_tilde: u32,
) -> DistanceSpectrum {
    let mut compact = compact_events(events);
    sort_compact(&mut compact);
    let window = k + crc.map_or(0, CrcSpec::m);
    let ctx = CountContext::new(&compact, nu, window, d_tilde);
    ctx.spectrum(crc.map(CrcSpec::poly))
}

impl CompactEvent {
    fn new(input: &[Gf4Symbol], weight: u32) -> Self {
        Self {
            nonzeros: input
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i as u8, c.value()))
                .collect(),
            len: input.len(),
            weight,
        }
    }
}

fn compact_events(events: &[ErrorEvent]) -> Vec<CompactEvent> {
    events
        .iter()
        .filter(|e| e.input.coeff(0) == Gf4Symbol::ONE)
        .map(|e| CompactEvent::new(e.input.coeffs(), e.weight))
        .collect()
}

fn sort_compact(events: &mut [CompactEvent]) {
    events.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.nonzeros.cmp(&b.nonzeros)));
}

/// Geometry shared by all candidates of one search.
struct CountContext<'a> {
    events: &'a [CompactEvent],
    nu: usize,
    window: usize,
    d_tilde: u32,
    /// Lightest event weight; compositions need room for another event.
    d_free: u32,
}

impl<'a> CountContext<'a> {
    fn new(events: &'a [CompactEvent], nu: usize, window: usize, d_tilde: u32) -> Self {
        let d_free = events.iter().map(|e| e.weight).min().unwrap_or(u32::MAX);
        Self {
            events,
            nu,
            window,
            d_tilde,
            d_free,
        }
    }

    fn spectrum(&self, g: Option<&Gf4Poly>) -> DistanceSpectrum {
        let one = Gf4Poly::one();
        let modulus = PackedModulus::new(g.unwrap_or(&one), self.window + 1);
        let mut spec = DistanceSpectrum::empty(self.d_tilde);
        let fits: Vec<&CompactEvent> = self
            .events
            .iter()
            .filter(|e| e.len <= self.window && e.weight <= self.d_tilde)
            .collect();
        let residues: Vec<u32> = fits.iter().map(|e| modulus.residue(&e.nonzeros)).collect();

        for (e, &r) in fits.iter().zip(&residues) {
            if r == 0 {
                let w = e.weight as usize;
                spec.n_t[w] += 3;
                spec.n_c[w] += 3 * (self.window - e.len + 1) as u64;
            }
        }

        if self.d_free.saturating_mul(2) > self.d_tilde {
            return spec;
        }
        // events light enough to appear inside a composition, with their
        // residues at every shift: shifted[i][s] = x^s · r_i mod g
        let max_part = self.d_tilde - self.d_free;
        let parts: Vec<(usize, Vec<u32>)> = fits
            .iter()
            .zip(&residues)
            .enumerate()
            .filter(|(_, (e, _))| e.weight <= max_part)
            .map(|(i, (e, &r))| {
                let mut shifted = Vec::with_capacity(self.window - e.len + 1);
                let mut cur = r;
                for _ in 0..=(self.window - e.len) {
                    shifted.push(cur);
                    cur = modulus.mul_x(cur);
                }
                (i, shifted)
            })
            .collect();
        for &(i, ref shifted) in &parts {
            let e = fits[i];
            let r = shifted[0];
            self.compose(&fits, &parts, r, e.weight, e.len, r == 0, &mut spec);
        }
        spec
    }

    /// Extends a prefix (first event at position 0, residue `res`, total
    /// weight `weight`, last nonzero input at `end - 1`) with further events.
    ///
    /// `split` records whether some prefix ending at an event boundary is
    /// already a CRC codeword; if so, the composed codeword leaves the zero
    /// state of the concatenated trellis more than once and is not counted
    /// as a single error event in `n_t`.
    #[allow(clippy::too_many_arguments)]
    fn compose(
        &self,
        fits: &[&CompactEvent],
        parts: &[(usize, Vec<u32>)],
        res: u32,
        weight: u32,
        end: usize,
        split: bool,
        spec: &mut DistanceSpectrum,
    ) {
        let first_start = end + self.nu;
        for (i, shifted) in parts {
            let e = fits[*i];
            let w = weight + e.weight;
            if w > self.d_tilde {
                // parts are sorted by weight
                break;
            }
            if first_start + e.len > self.window {
                continue;
            }
            let deeper = w + self.d_free <= self.d_tilde;
            for s in first_start..=(self.window - e.len) {
                let base = shifted[s];
                for c in 1..4u8 {
                    let r = res ^ packed_scale(base, c);
                    let stop = s + e.len;
                    if r == 0 {
                        spec.n_c[w as usize] += 3 * (self.window - stop + 1) as u64;
                        if !split {
                            spec.n_t[w as usize] += 3;
                        }
                    }
                    if deeper {
                        self.compose(fits, parts, r, w, stop, split || r == 0, spec);
                    }
                }
            }
        }
    }
}

/// Outcome of a distance-spectrum-optimal CRC search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub nu: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub d_tilde: u32,
    #[serde(with = "crc_text")]
    pub best: CrcSpec,
    pub d_min: u32,
    pub spectrum: DistanceSpectrum,
    /// Every candidate whose spectrum equals the best one through `d̃`,
    /// including `best`.
    #[serde(with = "crc_text_vec")]
    pub co_optimal: Vec<CrcSpec>,
    pub candidates_searched: usize,
}

impl SearchReport {
    /// `ν  m  g  d_min  N_t  N_c` row.
    pub fn table_row(&self) -> String {
        format!(
            "{:>2}  {:>2}  ({})  {:>3}  {:>4}  {:>6}",
            self.nu,
            self.m,
            self.best.poly().to_string().replace(',', ", "),
            self.d_min,
            self.spectrum.n_t_at(self.d_min),
            self.spectrum.n_c_at(self.d_min)
        )
    }
}

mod crc_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(crc: &CrcSpec, s: S) -> Result<S::Ok, S::Error> {
        crc.poly().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CrcSpec, D::Error> {
        CrcSpec::new(Gf4Poly::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

mod crc_text_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(crcs: &[CrcSpec], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(crcs.iter().map(CrcSpec::poly))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CrcSpec>, D::Error> {
        Vec::<Gf4Poly>::deserialize(d)?
            .into_iter()
            .map(|g| CrcSpec::new(g).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// All degree-`m` polynomials with constant term 1 and nonzero leading
/// coefficient, in lexicographic order of their coefficient sequences.
pub fn crc_candidates(m: usize) -> Vec<CrcSpec> {
    if m == 0 {
        return vec![CrcSpec::new(Gf4Poly::one()).unwrap()];
    }
    let middle = 1usize << (2 * (m - 1));
    let mut out = Vec::with_capacity(3 * middle);
    for idx in 0..middle {
        for lead in 1..4u8 {
            let mut coeffs = vec![Gf4Symbol::ONE];
            // most significant digit first so that the order is lexicographic
            for j in (0..m - 1).rev() {
                coeffs.push(Gf4Symbol::new((idx >> (2 * j)) as u8));
            }
            coeffs.push(Gf4Symbol::new(lead));
            out.push(CrcSpec::new(Gf4Poly::from_coeffs(coeffs)).unwrap());
        }
    }
    out.sort();
    out
}

/// Options for [`dso_search`].
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub d_tilde: u32,
    pub workers: usize,
    pub event_cap: usize,
}

impl SearchOptions {
    /// `d̃ = d_free + 12`, one worker.
    pub fn for_code(conv: &ConvCodeSpec) -> Self {
        Self {
            d_tilde: free_distance(conv) + 12,
            workers: 1,
            event_cap: DEFAULT_EVENT_CAP,
        }
    }
}

/// Exhaustive search for the distance-spectrum-optimal degree-`m` CRC.
///
/// Candidates are ranked by [`DistanceSpectrum::dso_cmp`]; remaining ties
/// through `d̃` are all reported, and the lexicographically smallest one is
/// returned as `best`.
pub fn dso_search(
    conv: &ConvCodeSpec,
    k: usize,
    m: usize,
    opts: &SearchOptions,
) -> Result<SearchReport, Error> {
    let mut compact = Vec::new();
    walk_monic_events(conv, k + m, opts.d_tilde, opts.event_cap, |input, weight| {
        let syms: Vec<Gf4Symbol> = input.iter().map(|&v| Gf4Symbol::new(v)).collect();
        compact.push(CompactEvent::new(&syms, weight));
    })?;
    sort_compact(&mut compact);
    let ctx = CountContext::new(&compact, conv.nu(), k + m, opts.d_tilde);
    let candidates = crc_candidates(m);
    let spectra = evaluate_parallel(&ctx, &candidates, opts.workers.max(1));

    let mut best_idx: Option<usize> = None;
    for (i, s) in spectra.iter().enumerate() {
        if s.d_min().is_none() {
            continue;
        }
        best_idx = match best_idx {
            Some(b) if spectra[b].dso_cmp(s) != std::cmp::Ordering::Greater => Some(b),
            _ => Some(i),
        };
    }
    let best_idx = best_idx.ok_or(Error::DtildeTooSmall {
        dtilde: opts.d_tilde,
    })?;
    let best_spec = spectra[best_idx].clone();
    let co_optimal: Vec<CrcSpec> = candidates
        .iter()
        .zip(&spectra)
        .filter(|(_, s)| s.n_c == best_spec.n_c)
        .map(|(c, _)| c.clone())
        .collect();
    Ok(SearchReport {
        nu: conv.nu(),
        k,
        m,
        d_tilde: opts.d_tilde,
        best: candidates[best_idx].clone(),
        d_min: best_spec.d_min().unwrap(),
        spectrum: best_spec,
        co_optimal,
        candidates_searched: candidates.len(),
    })
}

/// Evaluates candidates on `workers` threads; results are merged by
/// candidate index.
fn evaluate_parallel(
    ctx: &CountContext<'_>,
    candidates: &[CrcSpec],
    workers: usize,
) -> Vec<DistanceSpectrum> {
    let eval = |c: &CrcSpec| ctx.spectrum(Some(c.poly()).filter(|g| g.degree() != Some(0)));
    if workers <= 1 || candidates.len() < 2 {
        return candidates.iter().map(eval).collect();
    }
    let chunk = candidates.len().div_ceil(workers);
    let mut merged: BTreeMap<usize, Vec<DistanceSpectrum>> = BTreeMap::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = candidates
            .chunks(chunk)
            .enumerate()
            .map(|(w, part)| (w, scope.spawn(move || part.iter().map(eval).collect::<Vec<_>>())))
            .collect();
        for (w, h) in handles {
            merged.insert(w, h.join().expect("search worker panicked"));
        }
    });
    merged.into_values().flatten().collect()
}

/// Union-bound estimate `Σ_{d=d_min}^{d̃} N_c(d)·P_2(d)`, truncated at `d̃`.
pub fn union_bound_fer(spectrum: &DistanceSpectrum, p2: impl Fn(u32) -> f64) -> f64 {
    spectrum
        .n_c
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(d, &n)| n as f64 * p2(d as u32))
        .sum()
}
