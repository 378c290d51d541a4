use std::sync::Arc;

use gpc_core::engine::decode_frame;
use gpc_core::sim::{frame_rng, run_trials, run_trials_detailed, run_trials_sequential, sample_bsc, StopRule, TrialConfig};
use gpc_core::{BchCode, BerRecord, DecodeParams, DecoderKind, GpcLayout, PpVariant};

fn layout() -> GpcLayout {
    GpcLayout::product(Arc::new(BchCode::new(5, 2, 1, 0).unwrap()))
}

fn config(kind: DecoderKind, p: f64, frames: u64) -> TrialConfig {
    let mut cfg = TrialConfig::new(kind, p, DecodeParams::new(8));
    cfg.stop = StopRule {
        min_frame_errors: 40,
        max_frames: frames,
    };
    cfg.seed = 2024;
    cfg
}

#[test]
fn worker_count_does_not_change_records() {
    let layout = layout();
    for kind in [DecoderKind::Iterative, DecoderKind::Anchor, DecoderKind::Genie] {
        let mut cfg = config(kind, 0.06, 20_000);
        cfg.pp = PpVariant::Erasure;
        cfg.workers = 1;
        let mut one = run_trials(&layout, &cfg).unwrap();
        cfg.workers = 8;
        let mut eight = run_trials(&layout, &cfg).unwrap();
        let mut seq = run_trials_sequential(&layout, &cfg).unwrap();
        for r in [&mut one, &mut eight, &mut seq] {
            r.wall_time_s = 0.0;
        }
        assert_eq!(one, eight);
        assert_eq!(one, seq);
        assert!(one.frame_errors == 40 || one.frames == 20_000, "{one:?}");
    }
}

#[test]
fn records_are_consistent() {
    let layout = layout();
    let cfg = config(DecoderKind::Iterative, 0.06, 3000);
    let rec = run_trials(&layout, &cfg).unwrap();
    assert!(rec.frames <= 3000 && rec.frames > 0);
    assert!((0.0..=1.0).contains(&rec.ber));
    assert_eq!(rec.ber, rec.bit_errors as f64 / (rec.frames as f64 * layout.num_bits() as f64));
    assert_eq!(rec.fer, rec.frame_errors as f64 / rec.frames as f64);
    assert!(rec.frame_errors <= rec.frames && rec.frame_errors <= rec.bit_errors);
}

#[test]
fn per_frame_records_sum_to_totals() {
    let layout = layout();
    let mut cfg = config(DecoderKind::Anchor, 0.06, 500);
    cfg.record_frames = true;
    let (rec, frames) = run_trials_detailed(&layout, &cfg).unwrap();
    assert_eq!(frames.len() as u64, rec.frames);
    assert_eq!(frames.iter().map(|f| f.bit_errors as u64).sum::<u64>(), rec.bit_errors);
    assert!(frames.iter().enumerate().all(|(i, f)| f.index == i as u64));
    let json = serde_json::to_string(&frames[0]).unwrap();
    assert!(json.contains("\"backtracks\""));
}

#[test]
fn genie_ber_does_not_grow_with_iterations() {
    let layout = layout();
    let mut last = u64::MAX;
    for ell in [1, 2, 4, 8] {
        let mut cfg = config(DecoderKind::Genie, 0.08, 1500);
        cfg.stop.min_frame_errors = u64::MAX;
        cfg.params = DecodeParams::new(ell);
        let rec = run_trials(&layout, &cfg).unwrap();
        assert!(rec.bit_errors <= last, "ell={ell}");
        last = rec.bit_errors;
    }
}

#[test]
fn csv_is_identical_across_worker_counts() {
    let layout = layout();
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let mut records = Vec::new();
        for p in [0.05, 0.07] {
            let mut cfg = config(DecoderKind::Anchor, p, 2000);
            cfg.workers = workers;
            records.push(run_trials(&layout, &cfg).unwrap());
        }
        let mut buf = Vec::new();
        BerRecord::write_csv(&records, &mut buf).unwrap();
        outputs.push(buf);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn staircase_first_block_benefits_from_known_zeros() {
    let code = Arc::new(BchCode::new(5, 2, 1, 0).unwrap());
    let blocks = 8;
    let layout = GpcLayout::staircase(code, blocks, 4).unwrap();
    let params = DecodeParams::new(6);
    let mut per_block = vec![0usize; blocks];
    for idx in 0..1500 {
        let mut rng = frame_rng(12, idx);
        let frame = sample_bsc(&mut rng, layout.num_bits(), 0.075);
        let state = decode_frame(&layout, DecoderKind::Genie, frame, None, &params).unwrap();
        for (bit, &v) in state.bits().iter().enumerate() {
            if v == 1 {
                per_block[layout.block_of(bit) - 1] += 1;
            }
        }
    }
    let later: usize = per_block[1..blocks - 1].iter().sum();
    let mean_later = later as f64 / (blocks - 2) as f64;
    assert!(mean_later > 0.0, "operating point must leave residual errors: {per_block:?}");
    assert!((per_block[0] as f64) <= mean_later, "{per_block:?}");
}
