//! Assembling the model input and applying the overlap rule.
//!
//! In-core time splits into `t_ol` (overlaps with data transfers) and `t_nol`
//! (cycles retiring loads and stores, which do not). Transfer times between
//! adjacent levels never overlap each other. With data in level `k`:
//!
//! ```text
//! T(k) = max(t_ol, t_nol + t_data[0] + ... + t_data[k-1])
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::machine::{level_names, MachineModel};
use crate::scheduler::{self, ScheduleResult};
use crate::traffic::{self, TrafficBreakdown};
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmInput {
    pub t_ol_cy: f64,
    pub t_nol_cy: f64,
    /// One transfer time per link, inner to outer, memory last.
    pub t_data_cy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCycles {
    pub level: String,
    pub cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmPrediction {
    /// Innermost first.
    pub levels: Vec<LevelCycles>,
    pub t_core_cy: f64,
}

impl EcmPrediction {
    pub fn cycles(&self, level: &str) -> Result<f64> {
        self.levels
            .iter()
            .find(|l| l.level == level)
            .map(|l| l.cycles)
            .ok_or_else(|| Error::UnknownLevel(level.to_owned()))
    }

    /// Cycles of the outermost (memory) level.
    pub fn memory_cycles(&self) -> f64 {
        self.levels.last().map_or(self.t_core_cy, |l| l.cycles)
    }

    /// Same prediction at display precision.
    pub fn rounded(&self) -> Self {
        EcmPrediction {
            levels: self
                .levels
                .iter()
                .map(|l| LevelCycles {
                    level: l.level.clone(),
                    cycles: units::round1(l.cycles),
                })
                .collect(),
            t_core_cy: units::round1(self.t_core_cy),
        }
    }
}

/// Where the memory bandwidth of a prediction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthSource {
    Override,
    Kernel,
    MachineDefault,
}

/// Command-line override, else the kernel's own figure, else the machine fallback.
pub fn resolve_bandwidth(
    kernel: &KernelModel,
    machine: &MachineModel,
    override_gbs: Option<f64>,
) -> (f64, BandwidthSource) {
    match (override_gbs, kernel.sustained_bandwidth_gbs) {
        (Some(bw), _) => (bw, BandwidthSource::Override),
        (None, Some(bw)) => (bw, BandwidthSource::Kernel),
        (None, None) => (
            machine.memory.default_bandwidth_gbs,
            BandwidthSource::MachineDefault,
        ),
    }
}

/// Everything that went into one prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub kernel: String,
    pub machine: String,
    pub bandwidth_gbs: f64,
    pub penalty: bool,
    /// `None` when the kernel states its core cycles explicitly.
    pub schedule: Option<ScheduleResult>,
    pub traffic: TrafficBreakdown,
    pub input: EcmInput,
    pub prediction: EcmPrediction,
}

pub fn analyze(
    kernel: &KernelModel,
    machine: &MachineModel,
    bandwidth_gbs: f64,
    use_penalty: bool,
) -> Result<Analysis> {
    kernel.validate_against(machine)?;
    let schedule = match kernel.explicit_core {
        Some(_) => None,
        None => Some(scheduler::schedule(
            &kernel.uops,
            &machine.resources,
            machine.retire_width,
        )?),
    };
    let traffic = traffic::account(kernel, machine, bandwidth_gbs)?;
    let input = assemble(kernel, machine, schedule.as_ref(), &traffic, use_penalty);
    let prediction = predict(&input);
    Ok(Analysis {
        kernel: kernel.name.clone(),
        machine: machine.name.clone(),
        bandwidth_gbs,
        penalty: use_penalty,
        schedule,
        traffic,
        input,
        prediction,
    })
}

pub fn build_input(
    kernel: &KernelModel,
    machine: &MachineModel,
    bandwidth_gbs: f64,
    use_penalty: bool,
) -> Result<EcmInput> {
    analyze(kernel, machine, bandwidth_gbs, use_penalty).map(|a| a.input)
}

fn assemble(
    kernel: &KernelModel,
    machine: &MachineModel,
    schedule: Option<&ScheduleResult>,
    traffic: &TrafficBreakdown,
    use_penalty: bool,
) -> EcmInput {
    let (t_ol_cy, t_nol_cy) = match (kernel.explicit_core, schedule) {
        (Some(c), _) => (c.t_ol, c.t_nol),
        (None, Some(s)) => (s.t_ol_cy, s.t_nol_cy),
        (None, None) => unreachable!("schedule computed when no explicit core cycles"),
    };
    let mut t_data_cy = traffic.data_cycles();
    if use_penalty {
        // every transfer beyond the core-private L2 pays per load stream
        let extra = machine.off_core_penalty_cy * kernel.stream_counts().explicit_loads as f64;
        for t in t_data_cy.iter_mut().skip(1) {
            *t += extra;
        }
    }
    EcmInput {
        t_ol_cy,
        t_nol_cy,
        t_data_cy,
    }
}

pub fn predict(input: &EcmInput) -> EcmPrediction {
    let names = level_names(input.t_data_cy.len());
    let mut transfer = input.t_nol_cy;
    let mut levels = Vec::with_capacity(names.len());
    for (i, level) in names.into_iter().enumerate() {
        if i > 0 {
            transfer += input.t_data_cy[i - 1];
        }
        levels.push(LevelCycles {
            level,
            cycles: input.t_ol_cy.max(transfer),
        });
    }
    EcmPrediction {
        levels,
        t_core_cy: input.t_ol_cy.max(input.t_nol_cy),
    }
}

/// Work units per second with data in `level`.
pub fn performance(
    pred: &EcmPrediction,
    level: &str,
    work_per_cl: f64,
    clock_ghz: f64,
) -> Result<f64> {
    let cycles = pred.cycles(level)?;
    if work_per_cl == 0.0 {
        return Ok(0.0);
    }
    Ok(work_per_cl / cycles * clock_ghz * 1e9)
}
