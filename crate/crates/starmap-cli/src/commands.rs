use crate::config::{
    load_file, resolve, resolve_output_path, FileConfig, ModeSpec, OutputFormat, RunConfig,
    RunInputs,
};
use anyhow::Context;
use clap::{Args, Subcommand};
use starmap::bounds::plane_bounds;
use starmap::geometry::{corner_points, SccQuadruple, TradeoffSurface};
use starmap::mixture::check_mixture;
use starmap::render::{decimal_str, parse_ratio};
use starmap::scheme::check_build;
use starmap::sim::{execute, execute_forwarding, execute_mixture, Execution};
use starmap::verify::verify_sweep;
use starmap::Rat;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Subcommand)]
pub enum Command {
    /// Execute one job end to end and emit its load report.
    Run(RunArgs),
    /// Sample the optimal upload/download surfaces on a rational grid.
    Surface(SurfaceArgs),
    /// Dump the corner-point tables.
    Pareto(ParetoArgs),
    /// Evaluate the communication lower bounds at one (r, c) point.
    Bounds(BoundsArgs),
    /// Batch-verify every scheme parameter up to a cluster size.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Number of computing nodes.
    #[arg(short = 'K', long = "nodes", alias = "K")]
    nodes: Option<u32>,
    /// Number of files (default: smallest feasible count for the mode).
    #[arg(short = 'N', long = "files", alias = "N")]
    files: Option<u32>,
    /// Bits per file (default 8).
    #[arg(short = 'W', long = "file-bits", alias = "W")]
    file_bits: Option<u32>,
    /// Bits per IV (default: lcm of the scheme parameters in play).
    #[arg(short = 'V', long = "iv-bits", alias = "V")]
    iv_bits: Option<u32>,
    /// Scheme parameter.
    #[arg(short = 'i', long = "param", alias = "i")]
    param: Option<u32>,
    /// Reproducibility seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Run a mixture with weights "w1,w2,w3" over parameters (i-1, i, K).
    #[arg(long, value_name = "W1,W2,W3")]
    mixture: Option<String>,
    /// Relay uplink parts verbatim instead of chain coding.
    #[arg(long)]
    forwarding: bool,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout if omitted); relative paths land in $STARMAP_OUT_DIR.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Output format (default json).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Also write the shuffle trace (line-delimited) to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Skip the oracle and closed-form verification.
    #[arg(long)]
    skip_verify: bool,
    /// Print the resolved configuration and derived defaults, then exit.
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
pub struct SurfaceArgs {
    /// Number of computing nodes.
    #[arg(short = 'K', long = "nodes", alias = "K")]
    nodes: u32,
    /// Grid points per axis.
    #[arg(long, default_value_t = 50)]
    resolution: u32,
    /// Decimal digits in the rendered columns.
    #[arg(long, default_value_t = 6)]
    precision: usize,
    /// Output file (stdout if omitted).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ParetoArgs {
    /// Number of computing nodes.
    #[arg(short = 'K', long = "nodes", alias = "K")]
    nodes: u32,
    /// Decimal digits in the rendered columns.
    #[arg(long, default_value_t = 6)]
    precision: usize,
    /// Output file (stdout if omitted).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Number of computing nodes.
    #[arg(short = 'K', long = "nodes", alias = "K")]
    nodes: u32,
    /// Storage load r, as `p/q`, integer, or decimal.
    #[arg(short = 'r', long)]
    r: String,
    /// Computation load c, as `p/q`, integer, or decimal.
    #[arg(short = 'c', long)]
    c: String,
    /// Output file (stdout if omitted).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Largest cluster size to verify.
    #[arg(long = "max-nodes", alias = "K-max", default_value_t = 8)]
    max_nodes: u32,
    /// Upper limit on --max-nodes (runtime guard).
    #[arg(long, default_value_t = 8)]
    ceiling: u32,
    /// Reproducibility seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

pub fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Pareto(args) => cmd_pareto(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn write_output(path: Option<&PathBuf>, contents: &str) -> anyhow::Result<()> {
    match path {
        None => {
            print!("{contents}");
            Ok(())
        }
        Some(path) => {
            let path = resolve_output_path(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            std::fs::write(&path, contents)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn validate_run(config: &RunConfig) -> Vec<String> {
    let mut problems: Vec<String> = Vec::new();
    match config.mode {
        ModeSpec::Pure { param } | ModeSpec::Forwarding { param } => {
            for error in check_build(&config.job, param) {
                problems.push(error.to_string());
            }
        }
        ModeSpec::Mixture { param, weights } => {
            for error in check_mixture(&config.job, param, &weights) {
                problems.push(error.to_string());
            }
        }
    }
    problems
}

fn quadruple_fields(q: &SccQuadruple<Rat>, precision: usize) -> [(String, String); 4] {
    [
        (q.storage.to_string(), decimal_str(&q.storage, precision)),
        (
            q.computation.to_string(),
            decimal_str(&q.computation, precision),
        ),
        (q.upload.to_string(), decimal_str(&q.upload, precision)),
        (q.download.to_string(), decimal_str(&q.download, precision)),
    ]
}

fn run_report(config: &RunConfig, exec: &Execution, verified: bool) -> (String, String) {
    let q = exec.report.quadruple();
    let raw = exec.report.raw;
    let verdict = if exec.verdict.passed() {
        "pass"
    } else {
        "fail"
    };
    let closed_form = exec.matches_closed_form();
    let json = serde_json::json!({
        "mode": config.mode.name(),
        "nodes": config.job.node_count,
        "files": config.job.file_count,
        "file_bits": config.job.file_bits,
        "iv_bits": config.job.iv_bits,
        "seed": config.job.seed,
        "param": config.mode.param(),
        "report": {
            "storage": q.storage.to_string(),
            "computation": q.computation.to_string(),
            "upload": q.upload.to_string(),
            "download": q.download.to_string(),
            "storage_decimal": decimal_str(&q.storage, 6),
            "computation_decimal": decimal_str(&q.computation, 6),
            "upload_decimal": decimal_str(&q.upload, 6),
            "download_decimal": decimal_str(&q.download, 6),
            "raw": {
                "stored_files": raw.stored_files,
                "computed_ivs": raw.computed_ivs,
                "uplink_bits": raw.uplink_bits,
                "downlink_bits": raw.downlink_bits,
            },
        },
        "verdict": verdict,
        "closed_form_match": closed_form,
        "chain_buffer_peak": exec.chain_buffer_peak,
        "verified": verified,
    });
    let json = format!(
        "{}\n",
        serde_json::to_string_pretty(&json).expect("serializable")
    );

    let csv = format!(
        "mode,nodes,files,file_bits,iv_bits,seed,param,storage,computation,upload,download,\
         stored_files,computed_ivs,uplink_bits,downlink_bits,verdict,closed_form_match,chain_buffer_peak\n\
         {},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        config.mode.name(),
        config.job.node_count,
        config.job.file_count,
        config.job.file_bits,
        config.job.iv_bits,
        config.job.seed,
        config.mode.param(),
        q.storage,
        q.computation,
        q.upload,
        q.download,
        raw.stored_files,
        raw.computed_ivs,
        raw.uplink_bits,
        raw.downlink_bits,
        verdict,
        closed_form,
        exec.chain_buffer_peak,
    );
    (json, csv)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let config = resolve(RunInputs {
        nodes: args.nodes,
        files: args.files,
        file_bits: args.file_bits,
        iv_bits: args.iv_bits,
        seed: args.seed,
        param: args.param,
        mixture: args.mixture.clone(),
        forwarding: args.forwarding,
        output: args.output.clone(),
        format: args.format,
        skip_verify: args.skip_verify,
        file,
    })?;

    if args.explain {
        println!(
            "mode: {} (param {})\nnodes: {}\nfiles: {}\nfile_bits: {}\niv_bits: {}\nseed: {}",
            config.mode.name(),
            config.mode.param(),
            config.job.node_count,
            config.job.file_count,
            config.job.file_bits,
            config.job.iv_bits,
            config.job.seed
        );
        for note in &config.derived {
            println!("derived: {note}");
        }
        for problem in validate_run(&config) {
            println!("violated: {problem}");
        }
        return Ok(ExitCode::SUCCESS);
    }

    let problems = validate_run(&config);
    if !problems.is_empty() {
        for problem in &problems {
            eprintln!("invalid configuration: {problem}");
        }
        return Ok(ExitCode::from(2));
    }

    let exec = match config.mode {
        ModeSpec::Pure { param } => execute(&config.job, param),
        ModeSpec::Forwarding { param } => execute_forwarding(&config.job, param),
        ModeSpec::Mixture { param, weights } => execute_mixture(&config.job, param, &weights),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let (json, csv) = run_report(&config, &exec, config.verify);
    match config.format {
        OutputFormat::Json => write_output(config.output.as_ref(), &json)?,
        OutputFormat::Csv => write_output(config.output.as_ref(), &csv)?,
    }

    if let Some(trace_path) = &args.trace {
        let mut lines = exec.trace.lines();
        lines.push(exec.report.record_line());
        write_output(Some(trace_path), &(lines.join("\n") + "\n"))?;
    }

    if config.verify && !(exec.verdict.passed() && exec.matches_closed_form()) {
        eprintln!(
            "verification failed: verdict {:?}, closed-form match {}",
            exec.verdict,
            exec.matches_closed_form()
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_surface(args: SurfaceArgs) -> anyhow::Result<ExitCode> {
    anyhow::ensure!(args.nodes >= 2, "the surface needs at least 2 nodes");
    anyhow::ensure!(
        args.resolution >= 2,
        "the grid needs at least 2 points per axis"
    );
    anyhow::ensure!(args.precision <= 12, "--precision supports at most 12 digits");
    let k = args.nodes;
    let uplink = TradeoffSurface::<Rat>::new(k, starmap::geometry::Space::Uplink)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let downlink = TradeoffSurface::<Rat>::new(k, starmap::geometry::Space::Downlink)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let steps = i64::from(args.resolution) - 1;
    let span = Rat::new(i64::from(k) - 1, steps);
    let mut out = String::from("r,c,upload,download,r_exact,c_exact,upload_exact,download_exact\n");
    for a in 0..=steps {
        let r = Rat::from_integer(1) + span * Rat::from_integer(a);
        let c_span = (r - Rat::from_integer(1)) / Rat::from_integer(steps);
        let mut previous: Option<Rat> = None;
        for b in 0..=steps {
            let c = Rat::from_integer(1) + c_span * Rat::from_integer(b);
            if previous == Some(c) {
                continue;
            }
            previous = Some(c);
            let upload = uplink.value(r, c).map_err(|e| anyhow::anyhow!("{e}"))?;
            let download = downlink.value(r, c).map_err(|e| anyhow::anyhow!("{e}"))?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                decimal_str(&r, args.precision),
                decimal_str(&c, args.precision),
                decimal_str(&upload, args.precision),
                decimal_str(&download, args.precision),
                r,
                c,
                upload,
                download
            ));
        }
    }
    write_output(args.output.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pareto(args: ParetoArgs) -> anyhow::Result<ExitCode> {
    anyhow::ensure!(args.nodes >= 2, "corner tables need at least 2 nodes");
    anyhow::ensure!(args.precision <= 12, "--precision supports at most 12 digits");
    let (scheme, full) = corner_points::<Rat>(args.nodes);
    let mut out = String::from(
        "kind,i,storage,computation,upload,download,\
         storage_exact,computation_exact,upload_exact,download_exact\n",
    );
    for (kind, table) in [("scheme_corner", &scheme), ("full_compute_corner", &full)] {
        for (ix, point) in table.iter().enumerate() {
            let fields = quadruple_fields(point, args.precision);
            out.push_str(&format!(
                "{kind},{},{},{},{},{},{},{},{},{}\n",
                ix + 1,
                fields[0].1,
                fields[1].1,
                fields[2].1,
                fields[3].1,
                fields[0].0,
                fields[1].0,
                fields[2].0,
                fields[3].0
            ));
        }
    }
    write_output(args.output.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<ExitCode> {
    let r = parse_ratio(&args.r).map_err(|e| anyhow::anyhow!("{e}"))?;
    let c = parse_ratio(&args.c).map_err(|e| anyhow::anyhow!("{e}"))?;
    let pair = plane_bounds(args.nodes, r, c).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut out = String::from("space,r,c,best_plane,plane_value,envelope_value,bound\n");
    for (space, bound) in [("uplink", &pair.uplink), ("downlink", &pair.downlink)] {
        out.push_str(&format!(
            "{space},{r},{c},{},{},{},{}\n",
            bound.best_plane.map(|i| i.to_string()).unwrap_or_default(),
            bound.plane_value.map(|v| v.to_string()).unwrap_or_default(),
            bound.envelope_value,
            bound.bound
        ));
    }
    write_output(args.output.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    anyhow::ensure!(
        args.max_nodes >= 2,
        "verification needs at least 2 nodes, got {}",
        args.max_nodes
    );
    anyhow::ensure!(
        args.max_nodes <= args.ceiling,
        "--max-nodes {} exceeds the ceiling {}; raise --ceiling to allow larger sweeps",
        args.max_nodes,
        args.ceiling
    );
    let outcomes = verify_sweep(args.max_nodes, args.seed).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut passed = 0usize;
    for outcome in &outcomes {
        if outcome.passed() {
            passed += 1;
            println!(
                "K={} i={}: PASS — {}",
                outcome.node_count, outcome.param, outcome.report_line
            );
        } else {
            println!("K={} i={}: FAIL", outcome.node_count, outcome.param);
            for failure in outcome.failures() {
                println!("  {}: {}", failure.name, failure.detail);
            }
        }
    }
    println!("{passed}/{} cases passed", outcomes.len());
    if passed == outcomes.len() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
