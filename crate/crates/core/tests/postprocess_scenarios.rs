use std::sync::Arc;

use gpc_core::engine::{anchor_decode, genie_decode, iterative_bdd};
use gpc_core::postprocess::{bitflip_iterate_pp, build_failure_report, erasure_pp, ids};
use gpc_core::sim::{frame_rng, run_trials, StopRule, TrialConfig};
use gpc_core::{BchCode, DecodeParams, DecoderKind, GpcLayout, PpVariant};
use rand::seq::index::sample;
use rand::Rng;

fn plant(layout: &GpcLayout, rows: &[usize], cols: &[usize], pattern: &[[u8; 6]]) -> Vec<u8> {
    let mut frame = vec![0u8; layout.num_bits()];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            if pattern.get(i).map_or(1, |row| row[j]) == 1 {
                frame[layout.product_bit(r, c)] = 1;
            }
        }
    }
    frame
}

fn count(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

#[test]
fn clean_frame_has_empty_report() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(5, 2, 1, 0).unwrap()));
    let state = iterative_bdd(&layout, vec![0; layout.num_bits()], &DecodeParams::new(2)).unwrap();
    let report = build_failure_report(&state);
    assert!(report.is_clean());
    assert!(report.intersection.is_empty() && report.suspicious_anchors.is_empty());
    let mut state = state;
    let mut rng = frame_rng(0, 0);
    assert!(erasure_pp(&mut state, &mut rng, false).pp_success);
}

#[test]
fn minimal_stall_patterns_are_cleared_by_bitflip() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(7, 2, 1, 0).unwrap()));
    let params = DecodeParams::new(10);
    for trial in 0..20 {
        let mut rng = frame_rng(400, trial);
        let rows = sample(&mut rng, 128, 3).into_vec();
        let cols = sample(&mut rng, 128, 3).into_vec();
        let frame = plant(&layout, &rows, &cols, &[]);
        let mut state = genie_decode(&layout, frame.clone(), vec![0; layout.num_bits()], &params).unwrap();
        assert_eq!(state.bits(), &frame[..]);
        let report = build_failure_report(&state);
        assert_eq!(report.failed[0].len(), 3);
        assert_eq!(report.failed[1].len(), 3);
        let planted: Vec<u32> = (0..frame.len()).filter(|&b| frame[b] == 1).map(|b| b as u32).collect();
        assert_eq!(report.intersection, planted);
        let out = bitflip_iterate_pp(&mut state, &params, 1);
        assert!(out.pp_success);
        assert_eq!(count(state.bits()), 0);
    }
}

/// Uniform 6×6 binary matrix with all row and column weights 3.
fn weight_three_matrix<R: Rng>(rng: &mut R) -> [[u8; 6]; 6] {
    loop {
        let mut m = [[0u8; 6]; 6];
        for row in m.iter_mut() {
            for j in sample(rng, 6, 3) {
                row[j] = 1;
            }
        }
        if (0..6).all(|j| m.iter().map(|r| r[j]).sum::<u8>() == 3) {
            return m;
        }
    }
}

#[test]
fn size_eighteen_stopping_sets_are_recovered_by_erasures() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(8, 2, 1, 61).unwrap()));
    let n = layout.code().n();
    let params = DecodeParams::new(4);
    for trial in 0..20 {
        let mut rng = frame_rng(800, trial);
        let m = weight_three_matrix(&mut rng);
        let rows = sample(&mut rng, n, 6).into_vec();
        let cols = sample(&mut rng, n, 6).into_vec();
        let frame = plant(&layout, &rows, &cols, &m);
        assert_eq!(count(&frame), 18);
        let mut state = genie_decode(&layout, frame.clone(), vec![0; layout.num_bits()], &params).unwrap();
        assert_eq!(state.bits(), &frame[..], "genie must stall");
        let out = erasure_pp(&mut state, &mut rng, false);
        assert!(out.pp_success, "trial {trial}: {out:?}");
        assert_eq!((out.f1, out.f2, out.intersection), (6, 6, 36));
        assert_eq!(count(state.bits()), 0);
    }
}

/// Three rows that all miscorrect onto the same weight-6 row codeword and
/// become anchors, leaving its six columns with three errors each.
fn anchored_miscorrection_frame(layout: &GpcLayout, seed: u64) -> Vec<u8> {
    let code = layout.code();
    let n = code.n();
    let mut rng = frame_rng(seed, 0);
    // A weight-6 codeword: four random positions completed by decoding.
    let word: Vec<usize> = loop {
        let four = sample(&mut rng, n, 4).into_vec();
        let syn = code.syndrome_of_support(four.iter().copied());
        let outcome = code.bdd_decode(&syn);
        if outcome.positions().len() == 2 {
            break four.iter().copied().chain(outcome.positions().iter().map(|&p| p as usize)).collect();
        }
    };
    let mut frame = vec![0u8; layout.num_bits()];
    for (i, r) in [10usize, 70, 150].into_iter().enumerate() {
        // Each row keeps four of the six positions, a different pair left out.
        for (j, &c) in word.iter().enumerate() {
            if j / 2 != i {
                frame[layout.product_bit(r, c)] = 1;
            }
        }
    }
    frame
}

#[test]
fn anchored_miscorrections_need_augmentation() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(8, 2, 1, 61).unwrap()));
    let params = DecodeParams::new(4);
    let mut state = anchor_decode(&layout, anchored_miscorrection_frame(&layout, 31), &params).unwrap();
    let report = build_failure_report(&state);
    assert!(report.failed[0].is_empty());
    assert_eq!(report.failed[1].len(), 6);
    assert!(report.intersection.is_empty());
    let mut suspicious: Vec<u32> = ids(&state, &report.suspicious_anchors).iter().map(|id| id.index).collect();
    suspicious.sort_unstable();
    assert_eq!(suspicious, vec![10, 70, 150]);

    // Conventional post-processing has nothing to work with.
    let mut bitflip_state = state.clone();
    assert!(!bitflip_iterate_pp(&mut bitflip_state, &params, 4).pp_success);

    let mut rng = frame_rng(31, 1);
    let out = erasure_pp(&mut state, &mut rng, false);
    assert!(out.pp_success, "{out:?}");
    assert_eq!(out.augmented_f1, 3);
    assert_eq!(count(state.bits()), 0);
}

#[test]
fn exhaustive_augmentation_also_recovers() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(8, 2, 1, 61).unwrap()));
    for seed in 40..45 {
        let mut state = anchor_decode(&layout, anchored_miscorrection_frame(&layout, seed), &DecodeParams::new(4)).unwrap();
        let mut rng = frame_rng(seed, 1);
        let out = erasure_pp(&mut state, &mut rng, true);
        assert!(out.pp_success, "{out:?}");
        assert_eq!(count(state.bits()), 0);
    }
}

#[test]
fn post_processing_lowers_frame_error_rate() {
    let layout = GpcLayout::product(Arc::new(BchCode::new(5, 2, 1, 0).unwrap()));
    let mut base = TrialConfig::new(DecoderKind::Genie, 0.07, DecodeParams::new(8));
    base.stop = StopRule {
        min_frame_errors: u64::MAX,
        max_frames: 4000,
    };
    base.workers = 1;
    let before = run_trials(&layout, &base).unwrap();
    for pp in [PpVariant::Bitflip, PpVariant::Erasure] {
        let mut cfg = base.clone();
        cfg.pp = pp;
        let after = run_trials(&layout, &cfg).unwrap();
        assert!(before.frame_errors > 0);
        assert!(after.frame_errors < before.frame_errors, "{pp:?}: {} vs {}", after.frame_errors, before.frame_errors);
    }
}
