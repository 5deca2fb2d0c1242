//! Parallel list Viterbi decoding of CRC-ZTCCs on the base-code trellis.
//!
//! Each state keeps its `L` best partial paths; at every step the candidate
//! lists of the four predecessors are merged and truncated to `L`. Entries
//! are ordered by metric (descending), then predecessor state, then
//! predecessor rank (both ascending), so the lists for `L` are prefixes of
//! the lists for `2L`. The adaptive decoder reruns from scratch with
//! doubled `L` until a path passes the CRC.

use serde::{Deserialize, Serialize};

use crate::channel::{Metric, Observation};
use crate::codes::{CodeConfig, Trellis};
use crate::error::Error;
use crate::gf4::{poly_divmod, Gf4Poly, Gf4Symbol};

/// Rank bits of a packed back pointer; the top two bits select the
/// predecessor.
const RANK_BITS: u32 = 30;
const RANK_MASK: u32 = (1 << RANK_BITS) - 1;

/// List-size schedule and metric of the adaptive decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default = "default_initial")]
    pub initial_list: usize,
    #[serde(default = "default_max")]
    pub max_list: usize,
    #[serde(default)]
    pub metric: Metric,
}

fn default_initial() -> usize {
    1
}

fn default_max() -> usize {
    2048
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            initial_list: default_initial(),
            max_list: default_max(),
            metric: Metric::Envelope,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.initial_list == 0 {
            return Err(Error::InvalidParameter("initial list size must be >= 1".into()));
        }
        if !self.max_list.is_power_of_two() || self.max_list < self.initial_list {
            return Err(Error::InvalidParameter(format!(
                "maximum list size must be a power of two >= {}, got {}",
                self.initial_list, self.max_list
            )));
        }
        if self.max_list > RANK_MASK as usize {
            return Err(Error::InvalidParameter(format!("maximum list size {} is too large", self.max_list)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeStatus {
    #[serde(rename = "CRC_PASS")]
    CrcPass,
    #[serde(rename = "LIST_EXHAUSTED")]
    ListExhausted,
}

/// Result of adaptive list decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// The `K` message symbols, absent when the list was exhausted.
    pub decision: Option<Vec<Gf4Symbol>>,
    /// 1-based rank of the chosen path in the final list (0 if none).
    pub list_rank_used: usize,
    /// List size of the last pass.
    pub final_list_size: usize,
    pub status: DecodeStatus,
}

/// A zero-terminated trellis path: its `K + m` information symbols and its
/// summed metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCandidate {
    pub input: Vec<Gf4Symbol>,
    pub metric: f64,
}

/// `c·x^t mod g` for every position and symbol, packed two bits per
/// coefficient, so a word's residue is an XOR of table entries.
#[derive(Debug, Clone)]
struct CrcResidues {
    table: Vec<[u64; 4]>,
}

impl CrcResidues {
    fn new(g: &Gf4Poly, len: usize) -> Option<Self> {
        let m = g.degree()?;
        if m == 0 || m > 32 {
            return None;
        }
        let mut table = Vec::with_capacity(len);
        let mut r = Gf4Poly::one();
        for _ in 0..len {
            let (_, rem) = poly_divmod(&r, g).ok()?;
            let mut row = [0u64; 4];
            for c in Gf4Symbol::ALL {
                row[c.value() as usize] = rem
                    .scale(c)
                    .to_symbols(m)
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, s)| acc | (s.value() as u64) << (2 * i));
            }
            table.push(row);
            r = rem.shift(1);
        }
        Some(Self { table })
    }

    fn passes(&self, word: &[Gf4Symbol]) -> bool {
        word.iter()
            .zip(&self.table)
            .fold(0, |acc, (s, row)| acc ^ row[s.value() as usize])
            == 0
    }
}

/// Reusable list Viterbi decoder for one code.
#[derive(Debug, Clone)]
pub struct ListViterbi {
    code: CodeConfig,
    trellis: Trellis,
    /// `c1·4 + c2` of the branch leaving `state` with input `u`.
    out_idx: Vec<u8>,
    crc: Option<CrcResidues>,
    branch: Vec<[f64; 16]>,
    back: Vec<u32>,
    cur: Vec<f64>,
    cur_len: Vec<usize>,
    next: Vec<f64>,
    next_len: Vec<usize>,
}

impl ListViterbi {
    pub fn new(code: &CodeConfig) -> Self {
        let trellis = Trellis::new(code.conv());
        let mut out_idx = Vec::with_capacity(trellis.num_states() * 4);
        for s in 0..trellis.num_states() {
            for u in 0..4u8 {
                let [c1, c2] = trellis.output(s, u);
                out_idx.push(c1.value() * 4 + c2.value());
            }
        }
        let crc = code.crc().and_then(|c| CrcResidues::new(c.poly(), code.crc_word_len()));
        Self {
            code: code.clone(),
            trellis,
            out_idx,
            crc,
            branch: Vec::new(),
            back: Vec::new(),
            cur: Vec::new(),
            cur_len: Vec::new(),
            next: Vec::new(),
            next_len: Vec::new(),
        }
    }

    pub fn code(&self) -> &CodeConfig {
        &self.code
    }

    fn crc_passes(&self, word: &[Gf4Symbol]) -> bool {
        match &self.crc {
            Some(table) => table.passes(word),
            None => self.code.check(word),
        }
    }

    /// The maximum-metric zero-terminated path.
    pub fn best_path(&mut self, obs: &[Observation], metric: Metric) -> Result<PathCandidate, Error> {
        Ok(self.list(obs, 1, metric)?.remove(0))
    }

    /// The `l` best zero-terminated paths in nonincreasing metric order.
    pub fn list(&mut self, obs: &[Observation], l: usize, metric: Metric) -> Result<Vec<PathCandidate>, Error> {
        if l == 0 || l > RANK_MASK as usize {
            return Err(Error::InvalidParameter(format!("list size must be in 1..=2^30, got {l}")));
        }
        self.forward(obs, l, metric)?;
        let finals = self.cur_len[0];
        Ok((0..finals).map(|r| self.traceback(r, l)).collect())
    }

    /// Adaptive decoding: list sizes `initial, 2·initial, …, max_list`,
    /// returning the first path in metric order that passes the CRC.
    pub fn decode(&mut self, obs: &[Observation], cfg: &DecoderConfig) -> Result<DecodeOutcome, Error> {
        cfg.validate()?;
        let k = self.code.k();
        if self.code.crc().is_none() {
            let best = self.best_path(obs, cfg.metric)?;
            return Ok(DecodeOutcome {
                decision: Some(best.input[..k].to_vec()),
                list_rank_used: 1,
                final_list_size: 1,
                status: DecodeStatus::CrcPass,
            });
        }
        let mut l = cfg.initial_list;
        let mut checked = 0;
        loop {
            self.forward(obs, l, cfg.metric)?;
            let finals = self.cur_len[0];
            // Lists are nested, so ranks checked at smaller sizes are skipped.
            for r in checked..finals {
                let path = self.traceback(r, l);
                if self.crc_passes(&path.input) {
                    return Ok(DecodeOutcome {
                        decision: Some(path.input[..k].to_vec()),
                        list_rank_used: r + 1,
                        final_list_size: l,
                        status: DecodeStatus::CrcPass,
                    });
                }
            }
            checked = finals;
            if l >= cfg.max_list || finals < l {
                return Ok(DecodeOutcome {
                    decision: None,
                    list_rank_used: 0,
                    final_list_size: l,
                    status: DecodeStatus::ListExhausted,
                });
            }
            l = (2 * l).min(cfg.max_list);
        }
    }

    fn forward(&mut self, obs: &[Observation], l: usize, metric: Metric) -> Result<(), Error> {
        let steps = self.code.trellis_len();
        if obs.len() != 2 * steps {
            return Err(Error::ObservationLength {
                expected: 2 * steps,
                got: obs.len(),
            });
        }
        let info = self.code.crc_word_len();
        let states = self.trellis.num_states();
        let top = 2 * (self.trellis.nu() - 1);

        self.branch.clear();
        self.branch.extend(obs.chunks_exact(2).map(|pair| {
            let mut t = [0.0; 16];
            for (c1, &y1) in pair[0].iter().enumerate() {
                for (c2, &y2) in pair[1].iter().enumerate() {
                    t[c1 * 4 + c2] = metric.apply(y1) + metric.apply(y2);
                }
            }
            t
        }));
        self.back.clear();
        self.back.resize(steps * states * l, 0);
        for v in [&mut self.cur, &mut self.next] {
            v.clear();
            v.resize(states * l, 0.0);
        }
        for v in [&mut self.cur_len, &mut self.next_len] {
            v.clear();
            v.resize(states, 0);
        }
        self.cur_len[0] = 1;

        for t in 0..steps {
            let bm = &self.branch[t];
            let back = &mut self.back[t * states * l..(t + 1) * states * l];
            for ns in 0..states {
                let u = Trellis::input_of(ns);
                if t >= info && u != 0 {
                    self.next_len[ns] = 0;
                    continue;
                }
                let base = ns >> 2;
                let preds = [base, base | (1 << top), base | (2 << top), base | (3 << top)];
                let mut head = [0usize; 4];
                let mut gain = [0.0; 4];
                for (j, &p) in preds.iter().enumerate() {
                    gain[j] = bm[self.out_idx[p * 4 + u as usize] as usize];
                }
                let out = &mut self.next[ns * l..(ns + 1) * l];
                let mut count = 0;
                while count < l {
                    let mut pick = usize::MAX;
                    let mut best = f64::NEG_INFINITY;
                    for (j, &p) in preds.iter().enumerate() {
                        if head[j] < self.cur_len[p] {
                            let m = self.cur[p * l + head[j]] + gain[j];
                            if pick == usize::MAX || m > best {
                                best = m;
                                pick = j;
                            }
                        }
                    }
                    if pick == usize::MAX {
                        break;
                    }
                    out[count] = best;
                    back[ns * l + count] = ((pick as u32) << RANK_BITS) | head[pick] as u32;
                    head[pick] += 1;
                    count += 1;
                }
                self.next_len[ns] = count;
            }
            std::mem::swap(&mut self.cur, &mut self.next);
            std::mem::swap(&mut self.cur_len, &mut self.next_len);
        }
        Ok(())
    }

    /// Path of rank `r` ending in state 0 after a forward pass with size `l`.
    fn traceback(&self, r: usize, l: usize) -> PathCandidate {
        let steps = self.code.trellis_len();
        let info = self.code.crc_word_len();
        let states = self.trellis.num_states();
        let top = 2 * (self.trellis.nu() - 1);
        let metric = self.cur[r];
        let mut input = vec![Gf4Symbol::ZERO; info];
        let (mut s, mut rank) = (0usize, r);
        for t in (0..steps).rev() {
            let b = self.back[(t * states + s) * l + rank];
            if t < info {
                input[t] = Gf4Symbol::new(Trellis::input_of(s));
            }
            rank = (b & RANK_MASK) as usize;
            s = (s >> 2) | (((b >> RANK_BITS) as usize) << top);
        }
        debug_assert_eq!(s, 0);
        PathCandidate { input, metric }
    }
}

/// Maximum-metric zero-terminated path under the envelope metric.
pub fn viterbi_best_path(obs: &[Observation], code: &CodeConfig) -> Result<PathCandidate, Error> {
    ListViterbi::new(code).best_path(obs, Metric::Envelope)
}

/// The `l` globally best zero-terminated paths under the envelope metric.
pub fn list_viterbi(obs: &[Observation], code: &CodeConfig, l: usize) -> Result<Vec<PathCandidate>, Error> {
    ListViterbi::new(code).list(obs, l, Metric::Envelope)
}

/// Adaptive list decoding with CRC selection.
pub fn decode_adaptive(obs: &[Observation], code: &CodeConfig, cfg: &DecoderConfig) -> Result<DecodeOutcome, Error> {
    ListViterbi::new(code).decode(obs, cfg)
}
