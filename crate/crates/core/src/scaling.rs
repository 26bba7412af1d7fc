//! Multicore scaling within a chip.
//!
//! Single-core performance scales linearly with the core count until the
//! sustained memory bandwidth of the domain caps it:
//!
//! ```text
//! P(n) = min(n * P_mem, I * b_S)        n_S = ceil(T_mem / T_L3Mem)
//! ```
//!
//! In Cluster-on-Die mode the chip is a set of independent domains, each with
//! its own bandwidth, and chip performance is the sum over domains.

use serde::Serialize;

use crate::error::Result;
use crate::kernel::KernelModel;
use crate::machine::MachineModel;
use crate::model::{analyze, EcmPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// One memory domain.
    #[value(name = "per_domain", alias = "per-domain")]
    PerDomain,
    /// All domains of the chip, each saturating on its own.
    #[value(name = "chip_cod", alias = "chip-cod")]
    ChipCod,
    /// The chip as a single domain (CoD off); bandwidth is the chip figure.
    #[value(name = "chip_uniform", alias = "chip-uniform")]
    ChipUniform,
}

impl ScalingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::PerDomain => "per_domain",
            ScalingMode::ChipCod => "chip_cod",
            ScalingMode::ChipUniform => "chip_uniform",
        }
    }
}

/// How cores are spread over the domains in [`ScalingMode::ChipCod`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    #[value(name = "fill_first", alias = "fill-first")]
    FillFirst,
    #[value(name = "round_robin", alias = "round-robin")]
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub cores: u32,
    /// Work units per second.
    pub performance: f64,
    /// Cycles per cache-line iteration of the whole core group.
    pub cycles_per_cl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
    /// Cores that saturate one domain.
    pub n_saturate: u32,
    /// Bandwidth-bound performance of the whole configuration.
    pub roofline_limit: f64,
    pub mode: ScalingMode,
    /// First core count at which the curve reaches `roofline_limit`, if any.
    pub cores_to_plateau: Option<u32>,
}

/// The numbers a domain curve depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainModel {
    /// Single-core performance with data in memory.
    pub single_core: f64,
    /// `I * b_S` for one domain.
    pub roofline: f64,
    pub n_saturate: u32,
}

impl DomainModel {
    pub fn new(
        pred: &EcmPrediction,
        t_mem_link: f64,
        work_per_cl: f64,
        clock_ghz: f64,
        roofline: f64,
    ) -> Self {
        let t_mem = pred.memory_cycles();
        DomainModel {
            single_core: work_per_cl / t_mem * clock_ghz * 1e9,
            roofline,
            n_saturate: saturation_cores(t_mem, t_mem_link),
        }
    }

    pub fn performance(&self, cores: u32) -> f64 {
        if cores == 0 {
            0.0
        } else if cores >= self.n_saturate {
            self.roofline
        } else {
            (cores as f64 * self.single_core).min(self.roofline)
        }
    }
}

/// `ceil(t_mem / t_mem_link)`, robust to ratios that are integers up to rounding.
pub fn saturation_cores(t_mem: f64, t_mem_link: f64) -> u32 {
    let ratio = t_mem / t_mem_link;
    (ratio - ratio * 1e-12).ceil().max(1.0) as u32
}

fn split(cores: u32, domains: u32, per_domain: u32, placement: Placement) -> Vec<u32> {
    match placement {
        Placement::FillFirst => (0..domains)
            .map(|d| cores.saturating_sub(d * per_domain).min(per_domain))
            .collect(),
        Placement::RoundRobin => (0..domains)
            .map(|d| cores / domains + u32::from(d < cores % domains))
            .collect(),
    }
}

pub fn scale(
    kernel: &KernelModel,
    machine: &MachineModel,
    bandwidth_gbs: f64,
    max_cores: u32,
    mode: ScalingMode,
    placement: Placement,
) -> Result<ScalingCurve> {
    let analysis = analyze(kernel, machine, bandwidth_gbs, false)?;
    let t_mem_link = *analysis.input.t_data_cy.last().expect("memory term");
    let roofline = kernel.intensity(machine) * bandwidth_gbs * 1e9;
    let domain = DomainModel::new(
        &analysis.prediction,
        t_mem_link,
        kernel.work_per_cl,
        machine.core_clock_ghz,
        roofline,
    );

    let mem = &machine.memory;
    let (domains, max_cores) = match mode {
        ScalingMode::PerDomain => (1, max_cores.max(1)),
        ScalingMode::ChipCod => (
            mem.domains_per_chip,
            max_cores.clamp(1, mem.cores_per_chip()),
        ),
        ScalingMode::ChipUniform => (1, max_cores.clamp(1, mem.cores_per_chip())),
    };
    let chip_perf = |n: u32| -> f64 {
        match mode {
            ScalingMode::ChipCod => split(n, domains, mem.cores_per_domain, placement)
                .into_iter()
                .map(|c| domain.performance(c))
                .sum(),
            _ => domain.performance(n),
        }
    };
    let roofline_limit = roofline * domains as f64;
    let work_rate = kernel.work_per_cl * machine.core_clock_ghz * 1e9;

    let points: Vec<ScalingPoint> = (1..=max_cores)
        .map(|cores| {
            let performance = chip_perf(cores);
            ScalingPoint {
                cores,
                performance,
                cycles_per_cl: work_rate / performance,
            }
        })
        .collect();
    let cores_to_plateau = points
        .iter()
        .find(|p| p.performance >= roofline_limit * (1.0 - 1e-12))
        .map(|p| p.cores);

    Ok(ScalingCurve {
        points,
        n_saturate: domain.n_saturate,
        roofline_limit,
        mode,
        cores_to_plateau,
    })
}

impl ScalingCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cores,performance,cycles_per_cl,mode\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6e},{:.6},{}\n",
                p.cores,
                p.performance,
                p.cycles_per_cl,
                self.mode.as_str()
            ));
        }
        out
    }
}
