//! Run configuration: flags merged over an optional JSON config file.
//!
//! File schema (all fields optional; explicit flags win):
//!
//! ```json
//! {
//!   "nodes": 3, "files": 6, "file_bits": 8, "iv_bits": 2, "seed": 7,
//!   "mode": { "type": "mixture", "param": 2, "weights": ["1/2", "1/4", "1/4"] },
//!   "output": "report.json", "format": "json", "verify": true
//! }
//! ```
//!
//! Defaults derived when omitted: `files` is the smallest feasible count
//! for the mode, `iv_bits` the least common multiple of the scheme
//! parameters in play, `file_bits` 8, `seed` 0.

use anyhow::{bail, Context};
use serde::Deserialize;
use starmap::mixture::{minimal_mixture_files, mixture_params, MixtureWeights};
use starmap::render::parse_ratio;
use starmap::scheme::{minimal_files, JobSpec};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
pub enum ModeSpec {
    Pure { param: u32 },
    Forwarding { param: u32 },
    Mixture { param: u32, weights: MixtureWeights },
}

impl ModeSpec {
    pub fn param(&self) -> u32 {
        match self {
            ModeSpec::Pure { param }
            | ModeSpec::Forwarding { param }
            | ModeSpec::Mixture { param, .. } => *param,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModeSpec::Pure { .. } => "pure",
            ModeSpec::Forwarding { .. } => "forwarding",
            ModeSpec::Mixture { .. } => "mixture",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nodes: Option<u32>,
    pub files: Option<u32>,
    pub file_bits: Option<u32>,
    pub iv_bits: Option<u32>,
    pub seed: Option<u64>,
    pub mode: Option<FileMode>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub verify: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMode {
    #[serde(rename = "type")]
    pub kind: String,
    pub param: Option<u32>,
    pub weights: Option<[String; 3]>,
}

pub fn load_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub job: JobSpec,
    pub mode: ModeSpec,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub verify: bool,
    /// Which defaults were derived rather than given, for `--explain`.
    pub derived: Vec<String>,
}

pub struct RunInputs {
    pub nodes: Option<u32>,
    pub files: Option<u32>,
    pub file_bits: Option<u32>,
    pub iv_bits: Option<u32>,
    pub seed: Option<u64>,
    pub param: Option<u32>,
    pub mixture: Option<String>,
    pub forwarding: bool,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub skip_verify: bool,
    pub file: FileConfig,
}

fn parse_weights(raw: [&str; 3]) -> anyhow::Result<MixtureWeights> {
    let parsed: Vec<_> = raw
        .iter()
        .map(|w| parse_ratio(w).map_err(|e| anyhow::anyhow!("{e}")))
        .collect::<anyhow::Result<_>>()?;
    MixtureWeights::new(parsed[0], parsed[1], parsed[2]).map_err(|e| anyhow::anyhow!("{e}"))
}

fn lcm(a: u32, b: u32) -> u32 {
    num_lcm(a, b)
}

fn num_lcm(a: u32, b: u32) -> u32 {
    if a == 0 || b == 0 {
        return a.max(b).max(1);
    }
    let gcd = {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / gcd * b
}

pub fn resolve(inputs: RunInputs) -> anyhow::Result<RunConfig> {
    let file = inputs.file;
    let mut derived = Vec::new();

    let nodes = inputs
        .nodes
        .or(file.nodes)
        .context("the node count is required (flag --nodes/-K or config field \"nodes\")")?;

    // Mode: any mode-shaped flag overrides the file's mode wholesale.
    let flags_specify_mode =
        inputs.param.is_some() || inputs.mixture.is_some() || inputs.forwarding;
    let mode = match &file.mode {
        Some(m) if !flags_specify_mode => {
            let param = inputs
                .param
                .or(m.param)
                .context("the config file mode is missing its \"param\" field")?;
            match m.kind.as_str() {
                "pure" => ModeSpec::Pure { param },
                "forwarding" => ModeSpec::Forwarding { param },
                "mixture" => {
                    let w = m
                        .weights
                        .as_ref()
                        .context("mixture mode in the config file needs \"weights\"")?;
                    ModeSpec::Mixture {
                        param,
                        weights: parse_weights([&w[0], &w[1], &w[2]])?,
                    }
                }
                other => bail!("unknown mode type {other:?} in config file"),
            }
        }
        _ => {
            let param = inputs
                .param
                .or(file.mode.as_ref().and_then(|m| m.param))
                .context("the scheme parameter is required (flag --param/-i)")?;
            if let Some(spec) = &inputs.mixture {
                let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    bail!("--mixture takes exactly three comma-separated weights, got {spec:?}");
                }
                if inputs.forwarding {
                    bail!("--mixture and --forwarding are mutually exclusive");
                }
                ModeSpec::Mixture {
                    param,
                    weights: parse_weights([parts[0], parts[1], parts[2]])?,
                }
            } else if inputs.forwarding {
                ModeSpec::Forwarding { param }
            } else {
                ModeSpec::Pure { param }
            }
        }
    };

    let iv_bits = match inputs.iv_bits.or(file.iv_bits) {
        Some(v) => v,
        None => {
            let v = match mode {
                ModeSpec::Pure { param } | ModeSpec::Forwarding { param } => param.max(1),
                ModeSpec::Mixture { param, .. } => {
                    mixture_params(nodes, param).into_iter().fold(1, lcm)
                }
            };
            derived.push(format!(
                "iv_bits defaulted to {v} (lcm of the scheme parameters in play)"
            ));
            v
        }
    };

    let files = match inputs.files.or(file.files) {
        Some(n) => n,
        None => {
            let n = match mode {
                ModeSpec::Pure { param } | ModeSpec::Forwarding { param } => {
                    minimal_files(nodes, param)
                }
                ModeSpec::Mixture { param, weights } => {
                    minimal_mixture_files(nodes, param, &weights)
                }
            };
            derived.push(format!("files defaulted to {n} (smallest feasible count)"));
            u32::try_from(n).context("derived file count does not fit in u32")?
        }
    };

    let file_bits = inputs.file_bits.or(file.file_bits).unwrap_or_else(|| {
        derived.push("file_bits defaulted to 8".into());
        8
    });
    let seed = inputs.seed.or(file.seed).unwrap_or_else(|| {
        derived.push("seed defaulted to 0".into());
        0
    });

    let format = match inputs.format {
        Some(f) => f,
        None => match file.format.as_deref() {
            Some("csv") => OutputFormat::Csv,
            Some("json") | None => OutputFormat::Json,
            Some(other) => bail!("unknown format {other:?} in config file"),
        },
    };
    let verify = if inputs.skip_verify {
        false
    } else {
        file.verify.unwrap_or(true)
    };

    Ok(RunConfig {
        job: JobSpec {
            node_count: nodes,
            file_count: files,
            file_bits,
            iv_bits,
            seed,
        },
        mode,
        output: inputs.output.or(file.output),
        format,
        verify,
        derived,
    })
}

/// Resolves an output path against `STARMAP_OUT_DIR` for relative paths.
pub fn resolve_output_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("STARMAP_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}
