//! The `ecm` command line.
//!
//! Subcommands: `predict`, `scale`, `compare`, `sched`, `list`. Exit status is
//! 0 on success, 1 for bad input (unreadable or invalid files, bad flags) and
//! 2 when the model is infeasible (a micro-op with nowhere to issue).

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::assets::{self, AssetKind};
use crate::error::Error;
use crate::kernel::KernelModel;
use crate::machine::MachineModel;
use crate::model::{self, Analysis, BandwidthSource, EcmInput, EcmPrediction};
use crate::notation::{format_prediction, format_shorthand, Style};
use crate::scaling::{self, Placement, ScalingMode};
use crate::scheduler::{ClassSchedule, ScheduleResult};
use crate::units::fmt_cycles;
use crate::validate::{self, MeasurementSet};

pub const DEFAULT_MACHINE: &str = "haswell-ep-2695v3";

#[derive(Debug, Parser)]
#[command(
    name = "ecm",
    version,
    about = "Execution-Cache-Memory performance model"
)]
pub struct Cli {
    /// Use Unicode delimiters (‖, ⌉) in table output.
    #[arg(long, global = true)]
    pub unicode: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-core prediction per memory level.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Kernel file or bundled name; repeatable; `all` for every bundled kernel.
        #[arg(short, long = "kernel", required = true)]
        kernels: Vec<String>,
    },
    /// Multicore scaling curve (CSV by default).
    Scale {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        kernel: String,
        #[arg(long, value_enum, default_value = "per_domain")]
        mode: ScalingMode,
        #[arg(long, value_enum, default_value = "fill_first")]
        placement: Placement,
        #[arg(long, default_value_t = 14)]
        max_cores: u32,
    },
    /// Model error against measurement fixtures.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Kernels to compare; `all` takes every kernel in the fixture file.
        #[arg(short, long = "kernel", default_value = "all")]
        kernels: Vec<String>,
        /// Measurement file or bundled name.
        #[arg(long, default_value = "haswell-microbench")]
        fixtures: String,
    },
    /// Port/AGU binding of the in-core schedule.
    Sched {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        kernel: String,
    },
    /// Bundled machines, kernels and fixtures.
    List,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Machine file or bundled name.
    #[arg(short, long, default_value = DEFAULT_MACHINE)]
    pub machine: String,
    /// Sustained memory bandwidth in GB/s, overriding the kernel's own.
    #[arg(short, long)]
    pub bandwidth: Option<f64>,
    /// Add the off-core penalty per load stream to the L3 and memory terms.
    #[arg(long)]
    pub penalty: bool,
    #[arg(short, long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_infeasible() => 2,
            _ => 1,
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let style = if cli.unicode {
        Style::Unicode
    } else {
        Style::Ascii
    };
    match &cli.command {
        Command::Predict { common, kernels } => cmd_predict(common, kernels, style, out),
        Command::Scale {
            common,
            kernel,
            mode,
            placement,
            max_cores,
        } => cmd_scale(common, kernel, *mode, *placement, *max_cores, out),
        Command::Compare {
            common,
            kernels,
            fixtures,
        } => cmd_compare(common, kernels, fixtures, out),
        Command::Sched { common, kernel } => cmd_sched(common, kernel, out),
        Command::List => cmd_list(out),
    }
}

fn load_machine(name: &str) -> CliResult<MachineModel> {
    Ok(assets::machine(name)?)
}

fn expand_kernels(names: &[String]) -> CliResult<Vec<KernelModel>> {
    let mut kernels = Vec::new();
    for name in names {
        if name == "all" {
            for a in assets::bundled(AssetKind::Kernel) {
                kernels.push(assets::kernel(a.name)?);
            }
        } else {
            kernels.push(assets::kernel(name)?);
        }
    }
    Ok(kernels)
}

fn check_bandwidth(common: &Common) -> CliResult {
    match common.bandwidth {
        Some(bw) if !(bw > 0.0 && bw.is_finite()) => Err(CliError::Usage(format!(
            "--bandwidth must be positive, got {bw}"
        ))),
        _ => Ok(()),
    }
}

fn run_model(
    common: &Common,
    machine: &MachineModel,
    kernel: &KernelModel,
) -> CliResult<(Analysis, BandwidthSource)> {
    let (bw, source) = model::resolve_bandwidth(kernel, machine, common.bandwidth);
    Ok((model::analyze(kernel, machine, bw, common.penalty)?, source))
}

#[derive(Debug, Serialize)]
pub struct LevelPerformance {
    pub level: String,
    pub cycles: f64,
    /// Work units per second.
    pub performance: f64,
    pub unit: String,
}

#[derive(Debug, Serialize)]
pub struct PredictReport {
    pub kernel: String,
    pub loop_body: String,
    pub machine: String,
    pub bandwidth_gbs: f64,
    pub bandwidth_source: BandwidthSource,
    pub penalty: bool,
    pub input: EcmInput,
    pub input_shorthand: String,
    pub prediction: EcmPrediction,
    pub prediction_shorthand: String,
    pub levels: Vec<LevelPerformance>,
}

pub fn predict_report(
    common: &Common,
    machine: &MachineModel,
    kernel: &KernelModel,
) -> CliResult<PredictReport> {
    let (a, source) = run_model(common, machine, kernel)?;
    let levels = a
        .prediction
        .levels
        .iter()
        .map(|l| {
            let performance = model::performance(
                &a.prediction,
                &l.level,
                kernel.work_per_cl,
                machine.core_clock_ghz,
            )?;
            Ok(LevelPerformance {
                level: l.level.clone(),
                cycles: l.cycles,
                performance,
                unit: format!("{}/s", kernel.work_unit),
            })
        })
        .collect::<Result<_, Error>>()?;
    Ok(PredictReport {
        kernel: kernel.name.clone(),
        loop_body: kernel.loop_body.clone(),
        machine: machine.name.clone(),
        bandwidth_gbs: a.bandwidth_gbs,
        bandwidth_source: source,
        penalty: a.penalty,
        input_shorthand: format_shorthand(&a.input, Style::Ascii),
        prediction_shorthand: format_prediction(&a.prediction, Style::Ascii),
        input: a.input,
        prediction: a.prediction,
        levels,
    })
}

fn cmd_predict(common: &Common, names: &[String], style: Style, out: &mut dyn Write) -> CliResult {
    check_bandwidth(common)?;
    let machine = load_machine(&common.machine)?;
    let reports = expand_kernels(names)?
        .iter()
        .map(|k| predict_report(common, &machine, k))
        .collect::<CliResult<Vec<_>>>()?;
    match common.format.unwrap_or(OutputFormat::Table) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &reports).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "kernel,level,cycles_per_cl,performance,unit")?;
            for r in &reports {
                for l in &r.levels {
                    writeln!(
                        out,
                        "{},{},{:.4},{:.6e},{}",
                        r.kernel, l.level, l.cycles, l.performance, l.unit
                    )?;
                }
            }
        }
        OutputFormat::Table => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                let source = match r.bandwidth_source {
                    BandwidthSource::Override => "override",
                    BandwidthSource::Kernel => "kernel",
                    BandwidthSource::MachineDefault => "machine default",
                };
                writeln!(out, "kernel      {}  ({})", r.kernel, r.loop_body)?;
                writeln!(out, "machine     {}", r.machine)?;
                writeln!(
                    out,
                    "bandwidth   {} GB/s ({source}){}",
                    r.bandwidth_gbs,
                    if r.penalty { ", off-core penalty" } else { "" }
                )?;
                writeln!(out, "input       {}", format_shorthand(&r.input, style))?;
                writeln!(
                    out,
                    "prediction  {}",
                    format_prediction(&r.prediction, style)
                )?;
                writeln!(out, "{:<6} {:>8} {:>14}", "level", "cy/CL", "performance")?;
                for l in &r.levels {
                    writeln!(
                        out,
                        "{:<6} {:>8} {:>9.1} M{}",
                        l.level,
                        fmt_cycles(l.cycles),
                        l.performance / 1e6,
                        l.unit
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_scale(
    common: &Common,
    kernel: &str,
    mode: ScalingMode,
    placement: Placement,
    max_cores: u32,
    out: &mut dyn Write,
) -> CliResult {
    check_bandwidth(common)?;
    if common.penalty {
        return Err(CliError::Usage("--penalty is not used by scale".into()));
    }
    if max_cores == 0 {
        return Err(CliError::Usage("--max-cores must be at least 1".into()));
    }
    let machine = load_machine(&common.machine)?;
    let kernel = assets::kernel(kernel)?;
    let (bw, _) = model::resolve_bandwidth(&kernel, &machine, common.bandwidth);
    let curve = scaling::scale(&kernel, &machine, bw, max_cores, mode, placement)?;
    match common.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &curve).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => write!(out, "{}", curve.to_csv())?,
        OutputFormat::Table => {
            writeln!(
                out,
                "kernel {} on {}, {} at {bw} GB/s per domain",
                kernel.name,
                machine.name,
                mode.as_str()
            )?;
            writeln!(
                out,
                "n_saturate {} per domain, roofline {:.1} M{}/s",
                curve.n_saturate,
                curve.roofline_limit / 1e6,
                kernel.work_unit
            )?;
            writeln!(out, "{:>5} {:>14} {:>10}", "cores", "performance", "cy/CL")?;
            for p in &curve.points {
                writeln!(
                    out,
                    "{:>5} {:>14.1} {:>10.2}",
                    p.cores,
                    p.performance / 1e6,
                    p.cycles_per_cl
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub level: String,
    pub predicted: f64,
    pub measured: f64,
    pub rel_error_pct: f64,
    pub error_pct: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published_error_pct: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub kernel: String,
    pub source: String,
    pub rows: Vec<CompareRow>,
}

/// Errors are computed against the prediction at display precision, the
/// precision at which predictions are published.
pub fn compare_reports(
    common: &Common,
    machine: &MachineModel,
    names: &[String],
    fixtures: &MeasurementSet,
) -> CliResult<Vec<CompareReport>> {
    let names: Vec<String> = if names.iter().any(|n| n == "all") {
        fixtures.records.iter().map(|r| r.kernel.clone()).collect()
    } else {
        names.to_vec()
    };
    let mut reports = Vec::new();
    for name in names {
        let kernel = assets::kernel(&name)?;
        let record = fixtures.find(&kernel.name).ok_or_else(|| {
            CliError::Usage(format!("no measurements for kernel `{}`", kernel.name))
        })?;
        let (a, _) = run_model(common, machine, &kernel)?;
        let report = validate::compare(&a.prediction.rounded(), record);
        reports.push(CompareReport {
            kernel: kernel.name.clone(),
            source: record.source.clone(),
            rows: report
                .per_level
                .iter()
                .map(|e| CompareRow {
                    level: e.level.clone(),
                    predicted: e.predicted,
                    measured: e.measured,
                    rel_error_pct: e.rel_error_pct,
                    error_pct: e.display_pct(),
                    published_error_pct: record.published_error_pct.get(&e.level).copied(),
                })
                .collect(),
        });
    }
    Ok(reports)
}

fn cmd_compare(
    common: &Common,
    names: &[String],
    fixtures: &str,
    out: &mut dyn Write,
) -> CliResult {
    check_bandwidth(common)?;
    let machine = load_machine(&common.machine)?;
    let fixtures = assets::measurements(fixtures)?;
    let reports = compare_reports(common, &machine, names, &fixtures)?;
    match common.format.unwrap_or(OutputFormat::Table) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &reports).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(
                out,
                "kernel,level,predicted,measured,rel_error_pct,error_pct,published_error_pct"
            )?;
            for r in &reports {
                for row in &r.rows {
                    let published = row
                        .published_error_pct
                        .map(|p| p.to_string())
                        .unwrap_or_default();
                    writeln!(
                        out,
                        "{},{},{},{},{:.4},{},{published}",
                        r.kernel,
                        row.level,
                        row.predicted,
                        row.measured,
                        row.rel_error_pct,
                        row.error_pct
                    )?;
                }
            }
        }
        OutputFormat::Table => {
            let cell = |rows: &[CompareRow], f: &dyn Fn(&CompareRow) -> String| {
                rows.iter().map(f).collect::<Vec<_>>().join(" ] ")
            };
            writeln!(
                out,
                "{:<14} {:<24} {:<24} {:<20} published",
                "kernel", "prediction", "measurement", "error %"
            )?;
            for r in &reports {
                let published = if r.rows.iter().all(|x| x.published_error_pct.is_some()) {
                    cell(&r.rows, &|x| format!("{}", x.published_error_pct.unwrap()))
                } else {
                    "-".into()
                };
                writeln!(
                    out,
                    "{:<14} {:<24} {:<24} {:<20} {published}",
                    r.kernel,
                    cell(&r.rows, &|x| fmt_cycles(x.predicted)),
                    cell(&r.rows, &|x| fmt_cycles(x.measured)),
                    cell(&r.rows, &|x| x.error_pct.to_string()),
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_sched(common: &Common, kernel: &str, out: &mut dyn Write) -> CliResult {
    let machine = load_machine(&common.machine)?;
    let kernel = assets::kernel(kernel)?;
    if kernel.uops.is_empty() {
        return Err(CliError::Usage(format!(
            "kernel `{}` states its core cycles explicitly; nothing to schedule",
            kernel.name
        )));
    }
    kernel.validate_against(&machine)?;
    let result: ScheduleResult =
        crate::scheduler::schedule(&kernel.uops, &machine.resources, machine.retire_width)?;
    match common.format.unwrap_or(OutputFormat::Table) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &result).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "class,resource,units,cycles,bottleneck")?;
            for (class, c) in [
                ("data_transfer", &result.data_transfer),
                ("overlapping", &result.overlapping),
            ] {
                for (id, n) in &c.binding {
                    writeln!(
                        out,
                        "{class},{id},{n},{},{}",
                        c.cycles,
                        c.bottleneck.contains(id)
                    )?;
                }
            }
        }
        OutputFormat::Table => {
            writeln!(out, "kernel {} on {}", kernel.name, machine.name)?;
            let show =
                |out: &mut dyn Write, label: &str, c: &ClassSchedule| -> std::io::Result<()> {
                    writeln!(
                        out,
                        "{label:<6} {} cy (steady state {:.3} cy)",
                        c.cycles, c.steady_state_cy
                    )?;
                    let binding: Vec<String> = c
                        .binding
                        .iter()
                        .map(|(id, n)| format!("{id}:{n}"))
                        .collect();
                    writeln!(
                        out,
                        "       binding    {}",
                        if binding.is_empty() {
                            "-".into()
                        } else {
                            binding.join(" ")
                        }
                    )?;
                    writeln!(
                        out,
                        "       bottleneck {}",
                        if c.bottleneck.is_empty() {
                            "-".into()
                        } else {
                            c.bottleneck.join(" ")
                        }
                    )
                };
            show(out, "T_nOL", &result.data_transfer)?;
            show(out, "T_OL", &result.overlapping)?;
        }
    }
    Ok(())
}

fn cmd_list(out: &mut dyn Write) -> CliResult {
    for a in assets::BUNDLED {
        let detail = match a.kind {
            AssetKind::Machine => {
                let m = assets::machine(a.name)?;
                format!(
                    "{} GHz, {} cores",
                    m.core_clock_ghz,
                    m.memory.cores_per_chip()
                )
            }
            AssetKind::Kernel => assets::kernel(a.name)?.loop_body,
            AssetKind::Measurements => {
                format!("{} records", assets::measurements(a.name)?.records.len())
            }
        };
        writeln!(
            out,
            "{:<8} {:<26} {detail}",
            a.kind.extension(),
            format!("{}.{}", a.name, a.kind.extension())
        )?;
    }
    Ok(())
}
