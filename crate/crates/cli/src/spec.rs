//! Run specifications: flags merged over an optional config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gpc_core::sim::StopRule;
use gpc_core::{BchCode, DecodeParams, DecoderKind, GpcLayout, PpVariant};

use crate::error::CliError;

/// Keys accepted in a config file, in the order `--help` documents them.
pub const KEYS: &[&str] = &[
    "nu",
    "t",
    "e",
    "s",
    "layout",
    "blocks",
    "window",
    "decoder",
    "pp",
    "pp_iters",
    "exhaustive",
    "delta",
    "ell",
    "reduced_t_iters",
    "p",
    "min_frame_errors",
    "max_frames",
    "seed",
    "workers",
    "output",
    "format",
    "verbose_frames",
];

/// Largest supported conflict threshold.
pub const MAX_DELTA: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutSpec {
    Product,
    Staircase { blocks: usize, window: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a `simulate` run needs, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub nu: u32,
    pub t: usize,
    pub e: usize,
    pub s: usize,
    pub layout: LayoutSpec,
    pub decoder: DecoderKind,
    pub pp: PpVariant,
    pub pp_iters: usize,
    pub exhaustive: bool,
    pub params: DecodeParams,
    pub p: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub verbose_frames: bool,
}

impl RunSpec {
    pub fn code(&self) -> Result<BchCode, CliError> {
        BchCode::new(self.nu, self.t, self.e, self.s).map_err(|e| CliError::Usage(format!("code parameters: {e}")))
    }

    pub fn build_layout(&self) -> Result<GpcLayout, CliError> {
        let code = Arc::new(self.code()?);
        match self.layout {
            LayoutSpec::Product => Ok(GpcLayout::product(code)),
            LayoutSpec::Staircase { blocks, window } => {
                GpcLayout::staircase(code, blocks, window).map_err(|e| CliError::Usage(format!("layout: {e}")))
            }
        }
    }
}

/// Raw key/value settings; later sources override earlier ones.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Reads a flat `key = value` file, or a JSON object when the first
    /// non-blank character is `{`.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            return Self::parse_json(text);
        }
        let mut settings = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            settings.set(key.trim(), value.trim().trim_matches('"'))?;
        }
        Ok(settings)
    }

    fn parse_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config JSON: {e}")))?;
        let object = value
            .as_object()
            .ok_or_else(|| CliError::Usage("config JSON must be an object".into()))?;
        let mut settings = Self::default();
        for (key, v) in object {
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| i.as_str().map(str::to_string).unwrap_or_else(|| i.to_string()))
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            settings.set(key, &text)?;
        }
        Ok(settings)
    }

    /// Stores a value; unknown keys are usage errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("unknown key '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| CliError::Usage(format!("invalid value '{v}' for key '{key}': {e}"))),
        }
    }

    /// Validates the settings into a [`RunSpec`].
    pub fn to_run_spec(&self) -> Result<RunSpec, CliError> {
        let nu = self.parsed("nu", 7u32)?;
        let t = self.parsed("t", 2usize)?;
        let e = self.parsed("e", 1usize)?;
        let s = self.parsed("s", 0usize)?;
        let layout = match self.get("layout").unwrap_or("product") {
            "product" => LayoutSpec::Product,
            "staircase" => LayoutSpec::Staircase {
                blocks: self.parsed("blocks", 16usize)?,
                window: self.parsed("window", 6usize)?,
            },
            other => return Err(CliError::Usage(format!("invalid value '{other}' for key 'layout': expected product or staircase"))),
        };
        let decoder: DecoderKind = self.parsed("decoder", DecoderKind::Anchor)?;
        let pp: PpVariant = self.parsed("pp", PpVariant::None)?;
        let delta = self.parsed("delta", 1usize)?;
        if delta > MAX_DELTA {
            return Err(CliError::Usage(format!("key 'delta' must lie in 0..={MAX_DELTA}, got {delta}")));
        }
        let ell = self.parsed("ell", 10usize)?;
        if ell == 0 {
            return Err(CliError::Usage("key 'ell' must be positive".into()));
        }
        let reduced = self.parsed("reduced_t_iters", 0usize)?;
        if reduced > 0 && t < 2 {
            return Err(CliError::Usage("key 'reduced_t_iters' needs t >= 2".into()));
        }
        let p = match self.get("p") {
            Some(v) => parse_p_sweep(v).map_err(|e| CliError::Usage(format!("key 'p': {e}")))?,
            None => return Err(CliError::Usage("missing key 'p'".into())),
        };
        let stop = StopRule {
            min_frame_errors: self.parsed("min_frame_errors", StopRule::default().min_frame_errors)?,
            max_frames: self.parsed("max_frames", StopRule::default().max_frames)?,
        };
        if stop.min_frame_errors == 0 {
            return Err(CliError::Usage("key 'min_frame_errors' must be positive".into()));
        }
        if stop.max_frames == 0 {
            return Err(CliError::Usage("key 'max_frames' must be positive".into()));
        }
        let format = match self.get("format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(CliError::Usage(format!("invalid value '{other}' for key 'format': expected csv or json"))),
        };
        let spec = RunSpec {
            nu,
            t,
            e,
            s,
            layout,
            decoder,
            pp,
            pp_iters: self.parsed("pp_iters", 10usize)?,
            exhaustive: self.parsed("exhaustive", false)?,
            params: DecodeParams::new(ell).with_delta(delta).with_reduced_t(reduced),
            p,
            stop,
            seed: self.parsed("seed", 1u64)?,
            workers: self.parsed("workers", 0usize)?,
            output: self.get("output").map(PathBuf::from),
            format,
            verbose_frames: self.parsed("verbose_frames", false)?,
        };
        // Build once so downstream modules never see invalid parameters.
        spec.build_layout()?;
        Ok(spec)
    }
}

/// Parses `a,b,c` or the log-spaced range `a..b:N`.
pub fn parse_p_sweep(text: &str) -> Result<Vec<f64>, String> {
    let values = if let Some((range, count)) = text.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or("range must look like a..b:N")?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("{count}: {e}"))?;
        if count == 0 || !(lo > 0.0 && hi >= lo) {
            return Err("range needs 0 < a <= b and N >= 1".into());
        }
        if count == 1 {
            vec![lo]
        } else {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    } else {
        text.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if let Some(bad) = values.iter().find(|&&p| !(p > 0.0 && p < 0.5)) {
        return Err(format!("crossover probability {bad} outside (0, 0.5)"));
    }
    Ok(values)
}
