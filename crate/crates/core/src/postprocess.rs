//! Post-processing for frames the iterative decoder could not finish.
//!
//! Both techniques start from the failed codewords (nonzero syndrome) on
//! each side of the code and the bits where a failed codeword of one side
//! meets a failed codeword of the other. Bit-flip-and-iterate flips those
//! bits and resumes decoding. Algebraic-erasure post-processing erases them
//! and solves the component parity checks; for anchor-based decoding it can
//! first add suspicious anchors (anchors that corrected exactly `t` errors,
//! all pointing at failed codewords) to the failed sets.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{DecodeParams, DecoderState, Status};
use crate::error::{Error, Result};
use crate::layout::{CodewordId, VIRTUAL_BIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PpVariant {
    None,
    Bitflip,
    Erasure,
}

impl PpVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            PpVariant::None => "none",
            PpVariant::Bitflip => "bitflip",
            PpVariant::Erasure => "erasure",
        }
    }
}

impl std::str::FromStr for PpVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PpVariant::None),
            "bitflip" => Ok(PpVariant::Bitflip),
            "erasure" => Ok(PpVariant::Erasure),
            _ => Err(Error::Parameter(format!("unknown post-processing variant '{s}'"))),
        }
    }
}

/// Failed codewords per side, their bit intersection and suspicious anchors.
/// Codewords are dense layout indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FailureReport {
    pub failed: [Vec<u32>; 2],
    pub intersection: Vec<u32>,
    pub suspicious_anchors: Vec<u32>,
}

impl FailureReport {
    pub fn is_clean(&self) -> bool {
        self.failed[0].is_empty() && self.failed[1].is_empty()
    }
}

/// Outcome record of one post-processing attempt.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PpOutcome {
    pub pp_variant: String,
    pub pp_success: bool,
    pub f1: usize,
    pub f2: usize,
    pub intersection: usize,
    pub augmented_f1: usize,
    pub augmented_f2: usize,
}

pub fn build_failure_report(state: &DecoderState) -> FailureReport {
    let layout = state.layout();
    let t = layout.code().t();
    let ncw = layout.num_codewords();
    let mut is_failed = vec![false; ncw];
    let mut report = FailureReport::default();
    for (cw, failed) in is_failed.iter_mut().enumerate() {
        if !state.syndrome(cw).is_zero() {
            *failed = true;
            report.failed[layout.side(cw) as usize].push(cw as u32);
        }
    }
    report.intersection = intersection(state, &is_failed, &report.failed[0]);
    for cw in 0..ncw {
        if state.status_of(cw) != Status::Anchor {
            continue;
        }
        let locs = state.anchor_locations(cw);
        if locs.len() == t && locs.iter().all(|l| is_failed[l.affected as usize]) {
            report.suspicious_anchors.push(cw as u32);
        }
    }
    report
}

/// Bits whose two codewords are both marked; `side0` lists the marked codewords of side 0.
fn intersection(state: &DecoderState, marked: &[bool], side0: &[u32]) -> Vec<u32> {
    let layout = state.layout();
    let mut bits = Vec::new();
    for &cw in side0 {
        for &b in layout.cw_bits(cw as usize) {
            if b != VIRTUAL_BIT && marked[layout.other_codeword(b as usize, cw as usize)] {
                bits.push(b);
            }
        }
    }
    bits.sort_unstable();
    bits
}

/// Flips every bit of the intersection, then resumes the state's decoder
/// for `extra_iters` iterations. Returns whether all syndromes are zero.
pub fn bitflip_iterate_pp(state: &mut DecoderState, params: &DecodeParams, extra_iters: usize) -> PpOutcome {
    let report = build_failure_report(state);
    let mut outcome = PpOutcome {
        pp_variant: "bitflip".into(),
        f1: report.failed[0].len(),
        f2: report.failed[1].len(),
        intersection: report.intersection.len(),
        ..Default::default()
    };
    if report.is_clean() {
        outcome.pp_success = true;
        return outcome;
    }
    for &b in &report.intersection {
        state.external_flip(b as usize);
    }
    let resume = DecodeParams {
        ell: extra_iters,
        delta: params.delta,
        reduced_t_iters: 0,
    };
    state.run(&resume);
    outcome.pp_success = state.all_syndromes_zero();
    outcome
}

/// Largest number of augmentation subsets tried by the exhaustive search.
pub const MAX_AUGMENTATION_COMBINATIONS: usize = 64;

/// Algebraic-erasure post-processing with suspicious-anchor augmentation.
///
/// Suspicious anchors join the failed set of their side in random order as
/// long as one side stays below `d_min`. With `exhaustive`, subsets of the
/// candidates are tried instead (largest first, at most
/// [`MAX_AUGMENTATION_COMBINATIONS`]) until one decodes.
pub fn erasure_pp<R: Rng>(state: &mut DecoderState, rng: &mut R, exhaustive: bool) -> PpOutcome {
    let report = build_failure_report(state);
    let mut outcome = PpOutcome {
        pp_variant: "erasure".into(),
        f1: report.failed[0].len(),
        f2: report.failed[1].len(),
        ..Default::default()
    };
    if report.is_clean() {
        outcome.pp_success = true;
        return outcome;
    }
    let d_min = state.layout().code().d_min();
    let mut candidates = report.suspicious_anchors.clone();
    candidates.shuffle(rng);

    if exhaustive && !candidates.is_empty() {
        let pool = &candidates[..candidates.len().min(6)];
        let mut masks: Vec<u32> = (0..1u32 << pool.len()).collect();
        masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        let mut tried = 0;
        for mask in masks {
            let chosen: Vec<u32> = pool.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect();
            let Some(sets) = augment(state, &report, &chosen, d_min, true) else {
                continue;
            };
            tried += 1;
            let mut trial = state.clone();
            let erased = erase_and_solve(&mut trial, &sets);
            if trial.all_syndromes_zero() || tried >= MAX_AUGMENTATION_COMBINATIONS {
                *state = trial;
                fill_counts(&mut outcome, &report, &sets, erased);
                outcome.pp_success = state.all_syndromes_zero();
                return outcome;
            }
        }
    }

    let sets = augment(state, &report, &candidates, d_min, false).expect("greedy augmentation always succeeds");
    let erased = erase_and_solve(state, &sets);
    fill_counts(&mut outcome, &report, &sets, erased);
    outcome.pp_success = state.all_syndromes_zero();
    outcome
}

fn fill_counts(outcome: &mut PpOutcome, report: &FailureReport, sets: &[Vec<u32>; 2], erased: usize) {
    outcome.augmented_f1 = sets[0].len() - report.failed[0].len();
    outcome.augmented_f2 = sets[1].len() - report.failed[1].len();
    outcome.intersection = erased;
}

/// Adds `chosen` anchors to the failed sets while `|F1| < d_min` or
/// `|F2| < d_min` holds. With `strict`, returns `None` if any would violate it.
fn augment(state: &DecoderState, report: &FailureReport, chosen: &[u32], d_min: usize, strict: bool) -> Option<[Vec<u32>; 2]> {
    let layout = state.layout();
    let mut sets = report.failed.clone();
    for &cw in chosen {
        let side = layout.side(cw as usize) as usize;
        sets[side].push(cw);
        if !(sets[0].len() < d_min || sets[1].len() < d_min) {
            sets[side].pop();
            if strict {
                return None;
            }
        }
    }
    Some(sets)
}

/// Erases the intersection of the two sets and fills it in codeword by
/// codeword until nothing more resolves. Returns the number of erased bits.
fn erase_and_solve(state: &mut DecoderState, sets: &[Vec<u32>; 2]) -> usize {
    let layout = state.layout();
    let code = layout.code();
    let mut marked = vec![false; layout.num_codewords()];
    for &cw in sets.iter().flatten() {
        marked[cw as usize] = true;
    }
    let erased = intersection(state, &marked, &sets[0]);
    let total = erased.len();
    let mut unresolved = vec![false; layout.num_bits()];
    for &b in &erased {
        unresolved[b as usize] = true;
    }
    let mut remaining = total;

    // Codewords on the side opposite the smaller set see fewer erasures each.
    let small = if sets[0].len() <= sets[1].len() { 0 } else { 1 };
    let order: Vec<u32> = sets[1 - small].iter().chain(sets[small].iter()).copied().collect();

    let mut progress = true;
    while remaining > 0 && progress {
        progress = false;
        for &cw in &order {
            let cw = cw as usize;
            let bits = layout.cw_bits(cw);
            let mut positions = Vec::new();
            let mut target = *state.syndrome(cw);
            for (pos, &b) in bits.iter().enumerate() {
                if b != VIRTUAL_BIT && unresolved[b as usize] {
                    positions.push(pos);
                    if state.bits()[b as usize] & 1 == 1 {
                        target ^= code.column(pos);
                    }
                }
            }
            if positions.is_empty() {
                continue;
            }
            let Some(values) = code.solve_erasures(&target, &positions) else {
                continue;
            };
            for (&pos, &v) in positions.iter().zip(&values) {
                let b = bits[pos] as usize;
                if state.bits()[b] & 1 != v {
                    state.external_flip(b);
                }
                unresolved[b] = false;
                remaining -= 1;
            }
            progress = true;
        }
    }
    total
}

/// Converts dense codeword indices to ids.
pub fn ids(state: &DecoderState, cws: &[u32]) -> Vec<CodewordId> {
    cws.iter().map(|&cw| state.layout().id(cw as usize)).collect()
}
