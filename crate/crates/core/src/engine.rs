//! Frame decoders over a [`GpcLayout`].
//!
//! All three decoders share one state type. Component decoding works purely
//! on the stored syndromes (except for the genie, which compares against the
//! transmitted frame), and every bit flip updates the syndromes of both
//! codewords protecting the bit.
//!
//! Anchor-based decoding keeps, per codeword, a [`Status`], a conflict set
//! and, for anchors, the error locations that were applied. A decoding
//! result that would flip a bit of a trusted anchor freezes the codeword
//! instead and records a symmetric conflict; an anchor that has already
//! collected `delta` conflicts is backtracked when hit again.

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::bch::{DecodeOutcome, Syndrome, MAX_T};
use crate::error::{Error, Result};
use crate::layout::{CodewordId, GpcLayout, VIRTUAL_BIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Status {
    Anchor = 0,
    Eligible = 1,
    Failed = 2,
    Frozen = 3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    /// Conventional iterative bounded-distance decoding.
    Iterative,
    /// Anchor-based decoding.
    Anchor,
    /// Iterative decoding with a genie that turns miscorrections into failures.
    Genie,
}

impl DecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderKind::Iterative => "iterative",
            DecoderKind::Anchor => "anchor",
            DecoderKind::Genie => "genie",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterative" | "bdd" => Ok(DecoderKind::Iterative),
            "anchor" => Ok(DecoderKind::Anchor),
            "genie" | "ideal" => Ok(DecoderKind::Genie),
            _ => Err(Error::Parameter(format!("unknown decoder '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeParams {
    /// Iterations per schedule step.
    pub ell: usize,
    /// Conflict threshold for anchor backtracking.
    pub delta: usize,
    /// Leading iterations that correct at most `t − 1` errors.
    pub reduced_t_iters: usize,
}

impl DecodeParams {
    pub fn new(ell: usize) -> Self {
        Self {
            ell,
            delta: 1,
            reduced_t_iters: 0,
        }
    }

    pub fn with_delta(mut self, delta: usize) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_reduced_t(mut self, iters: usize) -> Self {
        self.reduced_t_iters = iters;
        self
    }
}

/// Per-frame decoder statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FrameStats {
    pub iterations: usize,
    /// Component decodings whose bit flips were applied.
    pub corrections: usize,
    pub bit_flips: usize,
    /// Codewords frozen because their flips contradicted an anchor.
    pub frozen_events: usize,
    pub backtracks: usize,
    pub syndrome_zero: bool,
}

/// An applied error location: the flipped bit and the other codeword it touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErrorLocation {
    pub bit: u32,
    pub affected: u32,
}

type Locations = ArrayVec<ErrorLocation, MAX_T>;

#[derive(Clone, Debug)]
pub struct DecoderState<'a> {
    layout: &'a GpcLayout,
    kind: DecoderKind,
    bits: Vec<u8>,
    truth: Option<Vec<u8>>,
    syndromes: Vec<Syndrome>,
    nonzero: usize,
    status: Vec<Status>,
    conflicts: Vec<Vec<u32>>,
    anchor_errors: Vec<Locations>,
    /// Last plain/genie decode failed and nothing changed since.
    stale: Vec<bool>,
    transitions: [[u64; 4]; 4],
    stats: FrameStats,
}

impl<'a> DecoderState<'a> {
    /// Loads a received frame; every codeword starts eligible for decoding.
    pub fn new(layout: &'a GpcLayout, frame: Vec<u8>, kind: DecoderKind) -> Result<Self> {
        if frame.len() != layout.num_bits() {
            return Err(Error::Parameter(format!(
                "frame has {} bits, layout needs {}",
                frame.len(),
                layout.num_bits()
            )));
        }
        let ncw = layout.num_codewords();
        let mut state = Self {
            layout,
            kind,
            bits: frame,
            truth: None,
            syndromes: vec![Syndrome::ZERO; ncw],
            nonzero: 0,
            status: vec![Status::Eligible; ncw],
            conflicts: vec![Vec::new(); ncw],
            anchor_errors: vec![Locations::new(); ncw],
            stale: vec![false; ncw],
            transitions: [[0; 4]; 4],
            stats: FrameStats::default(),
        };
        state.recompute_syndromes();
        Ok(state)
    }

    /// Decoder state with the genie's knowledge of the transmitted frame.
    pub fn with_truth(layout: &'a GpcLayout, frame: Vec<u8>, truth: Vec<u8>) -> Result<Self> {
        let mut state = Self::new(layout, frame, DecoderKind::Genie)?;
        if truth.len() != layout.num_bits() {
            return Err(Error::Parameter("true frame length mismatch".into()));
        }
        if let Some(cw) = syndromes_of(layout, &truth).iter().position(|syn| !syn.is_zero()) {
            return Err(Error::Parameter(format!(
                "true frame is not a codeword: {} has nonzero syndrome",
                layout.id(cw)
            )));
        }
        state.truth = Some(truth);
        Ok(state)
    }

    fn recompute_syndromes(&mut self) {
        self.syndromes = syndromes_of(self.layout, &self.bits);
        self.nonzero = self.syndromes.iter().filter(|syn| !syn.is_zero()).count();
    }

    pub fn layout(&self) -> &'a GpcLayout {
        self.layout
    }
    pub fn kind(&self) -> DecoderKind {
        self.kind
    }
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
    pub fn stats(&self) -> &FrameStats {
        &self.stats
    }
    pub fn truth(&self) -> Option<&[u8]> {
        self.truth.as_deref()
    }
    pub fn syndrome(&self, cw: usize) -> &Syndrome {
        &self.syndromes[cw]
    }
    pub fn status_of(&self, cw: usize) -> Status {
        self.status[cw]
    }
    pub fn conflicts_of(&self, cw: usize) -> &[u32] {
        &self.conflicts[cw]
    }
    pub fn all_syndromes_zero(&self) -> bool {
        self.nonzero == 0
    }

    /// Status of a codeword by id.
    pub fn status(&self, id: CodewordId) -> Result<Status> {
        Ok(self.status[self.layout.index_of(id)?])
    }

    pub fn conflicts(&self, id: CodewordId) -> Result<Vec<CodewordId>> {
        let cw = self.layout.index_of(id)?;
        let mut out: Vec<CodewordId> = self.conflicts[cw].iter().map(|&k| self.layout.id(k as usize)).collect();
        out.sort();
        Ok(out)
    }

    /// Stored error locations of an anchor, as affected codewords.
    pub fn anchor_errors(&self, id: CodewordId) -> Result<Vec<CodewordId>> {
        let cw = self.layout.index_of(id)?;
        Ok(self.anchor_errors[cw].iter().map(|l| self.layout.id(l.affected as usize)).collect())
    }

    pub(crate) fn anchor_locations(&self, cw: usize) -> &[ErrorLocation] {
        &self.anchor_errors[cw]
    }

    /// Counts of observed status transitions, `[from][to]`.
    pub fn transition_counts(&self) -> &[[u64; 4]; 4] {
        &self.transitions
    }

    /// Number of bits differing from `reference`.
    pub fn bit_errors(&self, reference: &[u8]) -> usize {
        self.bits.iter().zip(reference).map(|(a, b)| ((a ^ b) & 1) as usize).sum()
    }

    fn set_status(&mut self, cw: usize, to: Status) {
        let from = self.status[cw];
        if from != to {
            self.transitions[from as usize][to as usize] += 1;
            self.status[cw] = to;
        }
    }

    /// Flips one bit and updates both incident syndromes.
    pub fn flip(&mut self, bit: usize) {
        self.bits[bit] ^= 1;
        self.stats.bit_flips += 1;
        let code = self.layout.code();
        for (cw, pos) in self.layout.incidence(bit) {
            let cw = cw as usize;
            let was_zero = self.syndromes[cw].is_zero();
            self.syndromes[cw] ^= code.column(pos as usize);
            match (was_zero, self.syndromes[cw].is_zero()) {
                (true, false) => self.nonzero += 1,
                (false, true) => self.nonzero -= 1,
                _ => {}
            }
            self.stale[cw] = false;
        }
    }

    /// Component decoding of one codeword with capability `cap`, returning
    /// the implied error locations. Patterns touching known-zero positions
    /// count as failures.
    fn component_decode(&self, cw: usize, cap: usize) -> Option<Locations> {
        let cw_bits = self.layout.cw_bits(cw);
        let mut locs = Locations::new();
        match &self.truth {
            Some(truth) => {
                for &b in cw_bits {
                    if b != VIRTUAL_BIT && (self.bits[b as usize] ^ truth[b as usize]) & 1 == 1 {
                        if locs.len() == cap {
                            return None;
                        }
                        locs.push(ErrorLocation {
                            bit: b,
                            affected: self.layout.other_codeword(b as usize, cw) as u32,
                        });
                    }
                }
            }
            None => {
                let DecodeOutcome::Corrected(pos) = self.layout.code().bdd_decode_limited(&self.syndromes[cw], cap)
                else {
                    return None;
                };
                for p in pos {
                    let b = cw_bits[p as usize];
                    if b == VIRTUAL_BIT {
                        return None;
                    }
                    locs.push(ErrorLocation {
                        bit: b,
                        affected: self.layout.other_codeword(b as usize, cw) as u32,
                    });
                }
            }
        }
        Some(locs)
    }

    fn capability(&self, iteration: usize, params: &DecodeParams) -> usize {
        let t = self.layout.code().t();
        if iteration < params.reduced_t_iters {
            t - 1
        } else {
            t
        }
    }

    /// Runs the decoder selected at construction for `params.ell`
    /// iterations per schedule step. Statuses, conflicts and anchors carry
    /// over between calls, so calling again resumes decoding.
    pub fn run(&mut self, params: &DecodeParams) {
        self.run_observed(params, &mut |_| {});
    }

    /// As [`run`](Self::run), calling `observer` after every codeword visit.
    pub fn run_observed(&mut self, params: &DecodeParams, observer: &mut dyn FnMut(&DecoderState)) {
        let layout = self.layout;
        for step in layout.schedule() {
            for it in 0..params.ell {
                if step.codewords().all(|cw| self.syndromes[cw as usize].is_zero()) {
                    break;
                }
                let cap = self.capability(it, params);
                if params.reduced_t_iters > 0 && it == params.reduced_t_iters {
                    self.stale.iter_mut().for_each(|s| *s = false);
                    for cw in 0..self.status.len() {
                        if self.status[cw] == Status::Failed {
                            self.set_status(cw, Status::Eligible);
                        }
                    }
                }
                for cw in step.codewords() {
                    let cw = cw as usize;
                    match self.kind {
                        DecoderKind::Anchor => self.visit_anchor(cw, cap, params.delta),
                        _ => self.visit_plain(cw, cap),
                    }
                    observer(self);
                }
                self.stats.iterations += 1;
            }
        }
        self.stats.syndrome_zero = self.all_syndromes_zero();
    }

    fn visit_plain(&mut self, cw: usize, cap: usize) {
        if self.stale[cw] || self.syndromes[cw].is_zero() {
            return;
        }
        match self.component_decode(cw, cap) {
            Some(locs) => {
                for loc in &locs {
                    self.flip(loc.bit as usize);
                }
                self.stats.corrections += 1;
            }
            None => self.stale[cw] = true,
        }
    }

    /// Main routine of anchor-based decoding for one codeword.
    fn visit_anchor(&mut self, cw: usize, cap: usize, delta: usize) {
        if self.status[cw] != Status::Eligible {
            return;
        }
        let Some(locs) = self.component_decode(cw, cap) else {
            self.set_status(cw, Status::Failed);
            return;
        };
        // Consistency checks against the anchors as they stand now.
        let mut backtrack: ArrayVec<u32, MAX_T> = ArrayVec::new();
        for loc in &locs {
            let k = loc.affected as usize;
            if self.status[k] != Status::Anchor {
                continue;
            }
            if self.conflicts[k].len() >= delta {
                if !backtrack.contains(&loc.affected) {
                    backtrack.push(loc.affected);
                }
            } else {
                if self.status[cw] == Status::Eligible {
                    self.stats.frozen_events += 1;
                }
                self.set_status(cw, Status::Frozen);
                self.add_conflict(cw, k);
            }
        }
        if self.status[cw] != Status::Eligible {
            return;
        }
        for loc in &locs {
            self.correct(cw, *loc);
        }
        self.set_status(cw, Status::Anchor);
        self.anchor_errors[cw] = locs;
        self.stats.corrections += 1;
        for k in backtrack {
            self.backtrack(k as usize);
        }
    }

    fn add_conflict(&mut self, a: usize, b: usize) {
        if !self.conflicts[a].contains(&(b as u32)) {
            self.conflicts[a].push(b as u32);
        }
        if !self.conflicts[b].contains(&(a as u32)) {
            self.conflicts[b].push(a as u32);
        }
    }

    fn remove_all_conflicts(&mut self, cw: usize) {
        for k in std::mem::take(&mut self.conflicts[cw]) {
            self.conflicts[k as usize].retain(|&x| x as usize != cw);
        }
    }

    /// Error-correction step for the bit shared by `initiator` and `loc.affected`.
    fn correct(&mut self, initiator: usize, loc: ErrorLocation) {
        let k = loc.affected as usize;
        if self.status[initiator] == Status::Anchor && self.status[k] == Status::Anchor {
            return;
        }
        self.flip(loc.bit as usize);
        match self.status[k] {
            Status::Failed => self.set_status(k, Status::Eligible),
            Status::Frozen => {
                self.set_status(k, Status::Eligible);
                self.remove_all_conflicts(k);
            }
            _ => {}
        }
    }

    /// Reverts an anchor: drops its conflicts (unfreezing partners left
    /// without conflicts), undoes its flips except where the affected
    /// codeword is itself an anchor, and freezes it.
    fn backtrack(&mut self, anchor: usize) {
        debug_assert_eq!(self.status[anchor], Status::Anchor);
        for k in std::mem::take(&mut self.conflicts[anchor]) {
            let k = k as usize;
            self.conflicts[k].retain(|&x| x as usize != anchor);
            if self.conflicts[k].is_empty() {
                self.set_status(k, Status::Eligible);
            }
        }
        for loc in std::mem::take(&mut self.anchor_errors[anchor]) {
            self.correct(anchor, loc);
        }
        self.set_status(anchor, Status::Frozen);
        self.stats.backtracks += 1;
    }

    // Direct manipulation, used to stage decoder scenarios and by post-processing.

    pub fn set_status_of(&mut self, id: CodewordId, status: Status) -> Result<()> {
        let cw = self.layout.index_of(id)?;
        self.set_status(cw, status);
        Ok(())
    }

    /// Marks `id` as an anchor that applied flips towards `affected`
    /// (the flips themselves are not performed).
    pub fn install_anchor(&mut self, id: CodewordId, affected: &[CodewordId]) -> Result<()> {
        let cw = self.layout.index_of(id)?;
        if affected.len() > self.layout.code().t() {
            return Err(Error::Parameter("anchor error set larger than t".into()));
        }
        let mut locs = Locations::new();
        for &a in affected {
            let k = self.layout.index_of(a)?;
            let bit = self.shared_bit(cw, k).ok_or_else(|| Error::Parameter(format!("{id} and {a} share no bit")))?;
            locs.push(ErrorLocation {
                bit: bit as u32,
                affected: k as u32,
            });
        }
        self.set_status(cw, Status::Anchor);
        self.anchor_errors[cw] = locs;
        Ok(())
    }

    pub fn add_conflict_between(&mut self, a: CodewordId, b: CodewordId) -> Result<()> {
        let (a, b) = (self.layout.index_of(a)?, self.layout.index_of(b)?);
        self.add_conflict(a, b);
        Ok(())
    }

    fn shared_bit(&self, a: usize, b: usize) -> Option<usize> {
        self.layout
            .cw_bits(a)
            .iter()
            .filter(|&&bit| bit != VIRTUAL_BIT)
            .find(|&&bit| self.layout.other_codeword(bit as usize, a) == b)
            .map(|&bit| bit as usize)
    }

    /// Runs the anchor main routine on a single codeword.
    pub fn visit(&mut self, id: CodewordId, delta: usize) -> Result<()> {
        let cw = self.layout.index_of(id)?;
        let t = self.layout.code().t();
        match self.kind {
            DecoderKind::Anchor => self.visit_anchor(cw, t, delta),
            _ => self.visit_plain(cw, t),
        }
        Ok(())
    }

    /// Error-correction step initiated by `initiator` on the bit it shares with `affected`.
    pub fn error_correction_step(&mut self, initiator: CodewordId, affected: CodewordId) -> Result<()> {
        let (i, k) = (self.layout.index_of(initiator)?, self.layout.index_of(affected)?);
        let bit = self
            .shared_bit(i, k)
            .ok_or_else(|| Error::Parameter(format!("{initiator} and {affected} share no bit")))?;
        self.correct(
            i,
            ErrorLocation {
                bit: bit as u32,
                affected: k as u32,
            },
        );
        Ok(())
    }

    /// Backtracks an anchor; fails if `id` is not an anchor.
    pub fn backtrack_anchor(&mut self, id: CodewordId) -> Result<()> {
        let cw = self.layout.index_of(id)?;
        if self.status[cw] != Status::Anchor {
            return Err(Error::Invariant(format!("backtrack called on non-anchor {id}")));
        }
        self.backtrack(cw);
        Ok(())
    }

    /// Flips a bit from outside the decoder (post-processing). Frozen or
    /// failed codewords touched by the flip become eligible again, as with
    /// any other bit change.
    pub fn external_flip(&mut self, bit: usize) {
        self.flip(bit);
        for (cw, _) in self.layout.incidence(bit) {
            let cw = cw as usize;
            match self.status[cw] {
                Status::Failed => self.set_status(cw, Status::Eligible),
                Status::Frozen => {
                    self.set_status(cw, Status::Eligible);
                    self.remove_all_conflicts(cw);
                }
                _ => {}
            }
        }
    }

    /// Checks the structural invariants of the anchor bookkeeping and that
    /// the stored syndromes match the frame.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let t = self.layout.code().t();
        for cw in 0..self.status.len() {
            for &k in &self.conflicts[cw] {
                if !self.conflicts[k as usize].contains(&(cw as u32)) {
                    return Err(format!("asymmetric conflict {} -> {}", self.layout.id(cw), self.layout.id(k as usize)));
                }
            }
            if self.status[cw] == Status::Anchor {
                for &k in &self.conflicts[cw] {
                    if self.status[k as usize] != Status::Frozen {
                        return Err(format!("anchor {} in conflict with non-frozen codeword", self.layout.id(cw)));
                    }
                }
                if self.anchor_errors[cw].len() > t {
                    return Err("anchor error set larger than t".into());
                }
            } else if !self.conflicts[cw].is_empty() && self.status[cw] != Status::Frozen {
                return Err(format!("non-frozen, non-anchor {} holds conflicts", self.layout.id(cw)));
            }
        }
        let mut copy = self.clone();
        copy.recompute_syndromes();
        if copy.syndromes != self.syndromes || copy.nonzero != self.nonzero {
            return Err("stored syndromes out of sync with the frame".into());
        }
        Ok(())
    }
}

/// Syndromes of every codeword, accumulated over the set bits of `frame`.
fn syndromes_of(layout: &GpcLayout, frame: &[u8]) -> Vec<Syndrome> {
    let code = layout.code();
    let mut syndromes = vec![Syndrome::ZERO; layout.num_codewords()];
    for_each_set_bit(frame, |bit| {
        for (cw, pos) in layout.incidence(bit) {
            syndromes[cw as usize] ^= code.column(pos as usize);
        }
    });
    syndromes
}

/// Calls `f` with the index of every byte whose low bit is set, skipping
/// all-zero words quickly.
pub(crate) fn for_each_set_bit(frame: &[u8], mut f: impl FnMut(usize)) {
    let mut chunks = frame.chunks_exact(8);
    let mut base = 0;
    for chunk in &mut chunks {
        let word = u64::from_le_bytes(chunk.try_into().expect("eight bytes")) & 0x0101_0101_0101_0101;
        let mut w = word;
        while w != 0 {
            f(base + w.trailing_zeros() as usize / 8);
            w &= w - 1;
        }
        base += 8;
    }
    for (i, &b) in chunks.remainder().iter().enumerate() {
        if b & 1 == 1 {
            f(base + i);
        }
    }
}

/// Number of bytes with the low bit set.
pub(crate) fn count_set_bits(frame: &[u8]) -> usize {
    frame.iter().map(|&b| (b & 1) as usize).sum()
}

/// Conventional iterative bounded-distance decoding.
pub fn iterative_bdd<'a>(layout: &'a GpcLayout, frame: Vec<u8>, params: &DecodeParams) -> Result<DecoderState<'a>> {
    let mut state = DecoderState::new(layout, frame, DecoderKind::Iterative)?;
    state.run(params);
    Ok(state)
}

/// Iterative decoding where each component decoder is the genie-aided BDD.
pub fn genie_decode<'a>(
    layout: &'a GpcLayout,
    frame: Vec<u8>,
    true_frame: Vec<u8>,
    params: &DecodeParams,
) -> Result<DecoderState<'a>> {
    let mut state = DecoderState::with_truth(layout, frame, true_frame)?;
    state.run(params);
    Ok(state)
}

/// Anchor-based decoding.
pub fn anchor_decode<'a>(layout: &'a GpcLayout, frame: Vec<u8>, params: &DecodeParams) -> Result<DecoderState<'a>> {
    let mut state = DecoderState::new(layout, frame, DecoderKind::Anchor)?;
    state.run(params);
    Ok(state)
}

/// Runs the requested decoder; the genie variant decodes against the all-zero frame.
pub fn decode_frame<'a>(
    layout: &'a GpcLayout,
    kind: DecoderKind,
    frame: Vec<u8>,
    truth: Option<Vec<u8>>,
    params: &DecodeParams,
) -> Result<DecoderState<'a>> {
    match kind {
        DecoderKind::Iterative => iterative_bdd(layout, frame, params),
        DecoderKind::Anchor => anchor_decode(layout, frame, params),
        DecoderKind::Genie => {
            let truth = truth.unwrap_or_else(|| vec![0; layout.num_bits()]);
            genie_decode(layout, frame, truth, params)
        }
    }
}
