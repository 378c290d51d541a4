//! Bundled run specifications for the BER figures, at reduced Monte Carlo
//! depth. Each figure becomes one CSV; a manifest records what was run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use gpc_core::analysis::{self, DeModel, FloorModel};
use gpc_core::sim::{run_trials, StopRule, TrialConfig};
use gpc_core::{BchCode, BerRecord, DecodeParams, DecoderKind, GpcLayout, PpVariant};
use serde_json::json;

use crate::error::CliError;
use crate::{write_predictions, Prediction};

#[derive(Args, Debug)]
pub struct ReproArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Frame budget per point.
    #[arg(long, default_value_t = 20_000)]
    max_frames: u64,
    /// Frame errors after which a point stops early.
    #[arg(long, default_value_t = 50)]
    min_frame_errors: u64,
    /// Crossover probabilities per curve, log-spaced below the DE threshold.
    #[arg(long, default_value_t = 6)]
    points: usize,
    /// Master seed shared by all curves.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Only these figures (comma separated: fig2, fig4, fig5).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

/// One simulated curve.
struct Curve {
    label: &'static str,
    decoder: DecoderKind,
    pp: PpVariant,
    params: DecodeParams,
}

impl Curve {
    fn new(label: &'static str, decoder: DecoderKind, params: DecodeParams) -> Self {
        Self {
            label,
            decoder,
            pp: PpVariant::None,
            params,
        }
    }

    fn with_pp(mut self, pp: PpVariant) -> Self {
        self.pp = pp;
        self
    }
}

/// Analytical curves drawn next to the simulations.
#[derive(Clone, Copy)]
enum Model {
    De,
    Floor,
    FloorPp,
}

struct Panel {
    /// (ν, t, e, s)
    code: (u32, usize, usize, usize),
    ell: usize,
    curves: Vec<Curve>,
    models: Vec<Model>,
}

struct Figure {
    name: &'static str,
    panels: Vec<Panel>,
}

fn figures() -> Vec<Figure> {
    let p10 = DecodeParams::new(10);
    let p4 = DecodeParams::new(4);
    vec![
        Figure {
            name: "fig2",
            panels: vec![Panel {
                code: (7, 2, 1, 0),
                ell: 10,
                curves: vec![
                    Curve::new("iterative", DecoderKind::Iterative, p10),
                    Curve::new("iterative-t1x1", DecoderKind::Iterative, p10.with_reduced_t(1)),
                    Curve::new("anchor", DecoderKind::Anchor, p10),
                    Curve::new("anchor-l15-t1x5", DecoderKind::Anchor, DecodeParams::new(15).with_reduced_t(5)),
                    Curve::new("genie", DecoderKind::Genie, p10),
                ],
                models: vec![Model::De, Model::Floor],
            }],
        },
        Figure {
            name: "fig4",
            panels: vec![Panel {
                code: (8, 2, 1, 61),
                ell: 4,
                curves: vec![
                    Curve::new("iterative", DecoderKind::Iterative, p4),
                    Curve::new("iterative+bitflip", DecoderKind::Iterative, p4).with_pp(PpVariant::Bitflip),
                    Curve::new("anchor", DecoderKind::Anchor, p4),
                    Curve::new("anchor+erasure", DecoderKind::Anchor, p4).with_pp(PpVariant::Erasure),
                    Curve::new("genie", DecoderKind::Genie, p4),
                    Curve::new("genie+erasure", DecoderKind::Genie, p4).with_pp(PpVariant::Erasure),
                ],
                models: vec![Model::De, Model::Floor, Model::FloorPp],
            }],
        },
        Figure {
            name: "fig5",
            panels: [(8, 3, 0, 0), (8, 4, 2, 0)]
                .into_iter()
                .map(|code| Panel {
                    code,
                    ell: 10,
                    curves: vec![
                        Curve::new("iterative", DecoderKind::Iterative, p10),
                        Curve::new("anchor", DecoderKind::Anchor, p10),
                        Curve::new("genie", DecoderKind::Genie, p10),
                    ],
                    models: vec![Model::De],
                })
                .collect(),
        },
    ]
}

fn code_tag((nu, t, e, s): (u32, usize, usize, usize)) -> String {
    if s == 0 {
        format!("({nu},{t},{e})")
    } else {
        format!("({nu},{t},{e},s{s})")
    }
}

/// Log-spaced crossover probabilities from 0.68× to 1.02× the point where
/// density evolution predicts BER 1e-2, which spans the simulated waterfall.
fn p_grid(model: &DeModel, ell: usize, points: usize) -> Result<Vec<f64>, CliError> {
    let edge = analysis::density_evolution_inverse(model, ell, 1e-2, 1e-4, 0.2)?;
    let (lo, hi) = ((0.68 * edge).ln(), (1.02 * edge).ln());
    Ok(match points {
        0 => Vec::new(),
        1 => vec![edge],
        _ => (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()).collect(),
    })
}

pub fn run(args: &ReproArgs) -> Result<(), CliError> {
    if args.max_frames == 0 || args.min_frame_errors == 0 {
        return Err(CliError::Usage("--max-frames and --min-frame-errors must be positive".into()));
    }
    let all = figures();
    if let Some(bad) = args.only.iter().find(|o| !all.iter().any(|f| f.name == o.as_str())) {
        return Err(CliError::Usage(format!("unknown figure '{bad}'")));
    }
    std::fs::create_dir_all(&args.out)?;
    let stop = StopRule {
        min_frame_errors: args.min_frame_errors,
        max_frames: args.max_frames,
    };
    let mut manifest_figs = Vec::new();
    for fig in all.iter().filter(|f| args.only.is_empty() || args.only.iter().any(|o| o == f.name)) {
        let path = args.out.join(format!("{}.csv", fig.name));
        let mut records = Vec::new();
        let mut predictions: Vec<Prediction> = Vec::new();
        let mut manifest_curves = Vec::new();
        for panel in &fig.panels {
            let (nu, t, e, s) = panel.code;
            let code = Arc::new(BchCode::new(nu, t, e, s)?);
            let n = code.n();
            let layout = GpcLayout::product(code);
            let de_model = DeModel::product(n, t as u32);
            let grid = p_grid(&de_model, panel.ell, args.points)?;
            let tag = code_tag(panel.code);
            for curve in &panel.curves {
                for &p in &grid {
                    let mut cfg = TrialConfig::new(curve.decoder, p, curve.params);
                    cfg.pp = curve.pp;
                    cfg.stop = stop;
                    cfg.seed = args.seed;
                    cfg.workers = args.workers;
                    let mut rec = run_trials(&layout, &cfg)?;
                    rec.variant = format!("{tag} {}", curve.label);
                    records.push(rec);
                }
                manifest_curves.push(json!({
                    "code": tag,
                    "curve": curve.label,
                    "decoder": curve.decoder.as_str(),
                    "pp": curve.pp.as_str(),
                    "ell": curve.params.ell,
                    "delta": curve.params.delta,
                    "reduced_t_iters": curve.params.reduced_t_iters,
                    "p": grid,
                }));
            }
            for &model in &panel.models {
                for &p in &grid {
                    predictions.push(match model {
                        Model::De => (
                            format!("{tag} de"),
                            p,
                            analysis::density_evolution(&de_model, p, panel.ell)?,
                            Some(panel.ell),
                        ),
                        Model::Floor => (
                            format!("{tag} floor"),
                            p,
                            analysis::error_floor(&FloorModel::minimal(n as u64, t as u32), p)?,
                            None,
                        ),
                        Model::FloorPp => (
                            format!("{tag} floor-pp"),
                            p,
                            analysis::error_floor(&FloorModel::after_erasure_pp(n as u64), p)?,
                            None,
                        ),
                    });
                }
            }
        }
        let mut out = BufWriter::new(File::create(&path)?);
        BerRecord::write_csv(&records, &mut out)?;
        write_predictions(&mut out, &predictions, false)?;
        out.flush()?;
        manifest_figs.push(json!({ "figure": fig.name, "file": path.file_name().map(|f| f.to_string_lossy()), "curves": manifest_curves }));
    }
    let manifest = json!({
        "gpc_version": env!("CARGO_PKG_VERSION"),
        "core_version": gpc_core::VERSION,
        "seed": args.seed,
        "rng": "ChaCha8, one stream per frame index",
        "stop": { "min_frame_errors": stop.min_frame_errors, "max_frames": stop.max_frames },
        "figures": manifest_figs,
    });
    let mut file = File::create(args.out.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut file, &manifest)?;
    writeln!(file)?;
    Ok(())
}
