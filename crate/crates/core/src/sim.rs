//! Monte Carlo BER estimation over the binary symmetric channel.
//!
//! The all-zero frame is transmitted. Every frame draws its errors from its
//! own ChaCha stream keyed by `(seed, frame index)`, and frames are folded
//! strictly in index order, so a run gives the same record for any worker
//! count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{count_set_bits, decode_frame, DecodeParams, DecoderKind, FrameStats};
use crate::error::{Error, Result};
use crate::layout::GpcLayout;
use crate::postprocess::{bitflip_iterate_pp, erasure_pp, PpOutcome, PpVariant};

/// Frames handed to the workers per round.
const BATCH: u64 = 512;

/// Bernoulli(p) error vector of length `num_bits`.
///
/// Error positions are drawn as geometric gaps, so the cost scales with the
/// number of errors rather than the frame length.
pub fn sample_bsc<R: Rng + ?Sized>(rng: &mut R, num_bits: usize, p: f64) -> Vec<u8> {
    let mut out = vec![0u8; num_bits];
    if p <= 0.0 {
        return out;
    }
    if p >= 1.0 {
        out.fill(1);
        return out;
    }
    if p > 0.25 {
        for b in out.iter_mut() {
            *b = (rng.random::<f64>() < p) as u8;
        }
        return out;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        // U in (0, 1]; the gap is the number of error-free bits before the next error.
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (num_bits - pos) as f64 {
            break;
        }
        pos += gap as usize;
        out[pos] = 1;
        pos += 1;
        if pos >= num_bits {
            break;
        }
    }
    out
}

/// Random stream of frame `index` under master `seed`.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stop after `min_frame_errors` frame errors or `max_frames` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_frames: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub decoder: DecoderKind,
    pub p: f64,
    pub params: DecodeParams,
    pub pp: PpVariant,
    /// Extra iterations after bit-flip post-processing.
    pub pp_iters: usize,
    /// Exhaustive suspicious-anchor search in erasure post-processing.
    pub exhaustive: bool,
    pub stop: StopRule,
    pub seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
    /// Keep a [`FrameRecord`] for every simulated frame.
    pub record_frames: bool,
}

impl TrialConfig {
    pub fn new(decoder: DecoderKind, p: f64, params: DecodeParams) -> Self {
        Self {
            decoder,
            p,
            params,
            pp: PpVariant::None,
            pp_iters: 10,
            exhaustive: false,
            stop: StopRule::default(),
            seed: 1,
            workers: 0,
            record_frames: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 0.5) {
            return Err(Error::Parameter(format!("p must lie in (0, 0.5), got {}", self.p)));
        }
        if self.stop.min_frame_errors == 0 || self.stop.max_frames == 0 {
            return Err(Error::Parameter("stop rule limits must be positive".into()));
        }
        if self.params.ell == 0 {
            return Err(Error::Parameter("ell must be positive".into()));
        }
        Ok(())
    }

    /// Label used in the `variant` column, e.g. `anchor` or `anchor+erasure`.
    pub fn variant_label(&self) -> String {
        match self.pp {
            PpVariant::None => self.decoder.as_str().to_string(),
            pp => format!("{}+{}", self.decoder.as_str(), pp.as_str()),
        }
    }
}

/// Result of one frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameRecord {
    pub index: u64,
    pub channel_errors: usize,
    pub bit_errors: usize,
    #[serde(flatten)]
    pub stats: FrameStats,
    pub pp: Option<PpOutcome>,
}

/// Accumulated BER estimate. Serializes to the CSV columns
/// `variant,p,frames,bit_errors,frame_errors,ber,fer,ell,delta,seed`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerRecord {
    pub variant: String,
    pub p: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub ell: usize,
    pub delta: usize,
    pub seed: u64,
    #[serde(skip)]
    pub bits_per_frame: usize,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl BerRecord {
    fn empty(config: &TrialConfig, bits_per_frame: usize) -> Self {
        Self {
            variant: config.variant_label(),
            p: config.p,
            frames: 0,
            bit_errors: 0,
            frame_errors: 0,
            ber: 0.0,
            fer: 0.0,
            ell: config.params.ell,
            delta: config.params.delta,
            seed: config.seed,
            bits_per_frame,
            wall_time_s: 0.0,
        }
    }

    fn absorb(&mut self, frame: &FrameRecord) {
        self.frames += 1;
        self.bit_errors += frame.bit_errors as u64;
        self.frame_errors += (frame.bit_errors > 0) as u64;
    }

    fn finish(&mut self) {
        if self.frames > 0 {
            self.ber = self.bit_errors as f64 / (self.frames as f64 * self.bits_per_frame as f64);
            self.fer = self.frame_errors as f64 / self.frames as f64;
        }
    }

    /// Writes records as CSV with a header row.
    pub fn write_csv<W: std::io::Write>(records: &[BerRecord], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decodes one frame of the run: sample, decode, post-process, count.
pub fn simulate_frame(layout: &GpcLayout, config: &TrialConfig, index: u64) -> Result<FrameRecord> {
    let mut rng = frame_rng(config.seed, index);
    let frame = sample_bsc(&mut rng, layout.num_bits(), config.p);
    let channel_errors = count_set_bits(&frame);
    if channel_errors == 0 {
        return Ok(FrameRecord {
            index,
            channel_errors,
            bit_errors: 0,
            stats: FrameStats {
                syndrome_zero: true,
                ..Default::default()
            },
            pp: None,
        });
    }
    let mut state = decode_frame(layout, config.decoder, frame, None, &config.params)?;
    let stats = state.stats().clone();
    let pp = if state.all_syndromes_zero() {
        None
    } else {
        match config.pp {
            PpVariant::None => None,
            PpVariant::Bitflip => Some(bitflip_iterate_pp(&mut state, &config.params, config.pp_iters)),
            PpVariant::Erasure => Some(erasure_pp(&mut state, &mut rng, config.exhaustive)),
        }
    };
    let bit_errors = count_set_bits(state.bits());
    Ok(FrameRecord {
        index,
        channel_errors,
        bit_errors,
        stats,
        pp,
    })
}

/// Runs frames until the stop rule fires, using the configured number of workers.
pub fn run_trials(layout: &GpcLayout, config: &TrialConfig) -> Result<BerRecord> {
    Ok(run_trials_detailed(layout, config)?.0)
}

/// As [`run_trials`], also returning the per-frame records when
/// `config.record_frames` is set.
pub fn run_trials_detailed(layout: &GpcLayout, config: &TrialConfig) -> Result<(BerRecord, Vec<FrameRecord>)> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        if config.workers != 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
            return pool.install(|| {
                accumulate(layout, config, |range| {
                    use rayon::prelude::*;
                    range.into_par_iter().map(|i| simulate_frame(layout, config, i)).collect()
                })
            });
        }
    }
    accumulate(layout, config, |range| range.map(|i| simulate_frame(layout, config, i)).collect())
}

/// Single-threaded reference path.
pub fn run_trials_sequential(layout: &GpcLayout, config: &TrialConfig) -> Result<BerRecord> {
    config.validate()?;
    Ok(accumulate(layout, config, |range| range.map(|i| simulate_frame(layout, config, i)).collect())?.0)
}

fn accumulate<F>(layout: &GpcLayout, config: &TrialConfig, mut batch: F) -> Result<(BerRecord, Vec<FrameRecord>)>
where
    F: FnMut(std::ops::Range<u64>) -> Result<Vec<FrameRecord>>,
{
    let start = Instant::now();
    let mut record = BerRecord::empty(config, layout.num_bits());
    let mut frames = Vec::new();
    let mut next = 0u64;
    'outer: while next < config.stop.max_frames {
        let end = (next + BATCH).min(config.stop.max_frames);
        for frame in batch(next..end)? {
            record.absorb(&frame);
            if config.record_frames {
                frames.push(frame);
            }
            if record.frame_errors >= config.stop.min_frame_errors {
                break 'outer;
            }
        }
        next = end;
    }
    record.finish();
    record.wall_time_s = start.elapsed().as_secs_f64();
    Ok((record, frames))
}
