//! Cache-line traffic per cache-line iteration, link by link.
//!
//! Write-allocate inclusive hierarchy: every line is streamed through all
//! cache levels. With E explicit load streams, R write-allocate streams,
//! S regular store streams and N non-temporal store streams:
//!
//! * L1<->L2 moves E+R lines in and S+N lines out. Non-temporal lines leave
//!   L1 for the line-fill buffers and are charged at the evict bandwidth.
//! * every deeper cache link moves E+R lines in and S lines out.
//! * memory sees E+R+S+N lines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelModel, StreamCounts};
use crate::machine::{Direction, MachineModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyPolicy {
    #[default]
    InclusiveWriteAllocate,
    /// Write-through L1 (named for completeness; not modeled).
    WriteThroughL1,
    /// Victim last-level cache (named for completeness; not modeled).
    VictimL3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTraffic {
    pub link: String,
    pub loads_cl: u32,
    pub evicts_cl: u32,
    pub cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficBreakdown {
    /// Cache links, inner to outer.
    pub per_link: Vec<LinkTraffic>,
    /// Lines crossing the last-level-cache/memory boundary.
    pub memory_cls: u32,
    pub mem_cycles: f64,
}

impl TrafficBreakdown {
    /// Transfer times inner to outer, memory last.
    pub fn data_cycles(&self) -> Vec<f64> {
        self.per_link
            .iter()
            .map(|l| l.cycles)
            .chain(std::iter::once(self.mem_cycles))
            .collect()
    }
}

pub fn memory_cls(c: StreamCounts) -> u32 {
    c.explicit_loads + c.rfo() + c.stores + c.nt_stores
}

pub fn account(
    kernel: &KernelModel,
    machine: &MachineModel,
    bandwidth_gbs: f64,
) -> Result<TrafficBreakdown> {
    account_with_policy(kernel, machine, bandwidth_gbs, HierarchyPolicy::default())
}

pub fn account_with_policy(
    kernel: &KernelModel,
    machine: &MachineModel,
    bandwidth_gbs: f64,
    policy: HierarchyPolicy,
) -> Result<TrafficBreakdown> {
    if policy != HierarchyPolicy::InclusiveWriteAllocate {
        return Err(Error::UnsupportedPolicy(policy));
    }
    account_counts(kernel.stream_counts(), machine, bandwidth_gbs)
}

pub fn account_counts(
    counts: StreamCounts,
    machine: &MachineModel,
    bandwidth_gbs: f64,
) -> Result<TrafficBreakdown> {
    let mem_cy_per_cl = machine.mem_cycles_per_cl(bandwidth_gbs)?;
    let loads = counts.explicit_loads + counts.rfo();
    let per_link = machine
        .cache_links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let evicts = if i == 0 {
                counts.stores + counts.nt_stores
            } else {
                counts.stores
            };
            let cycles = loads as f64
                * link.cycles_per_cl(machine.cacheline_bytes, Direction::Load)
                + evicts as f64 * link.cycles_per_cl(machine.cacheline_bytes, Direction::Evict);
            LinkTraffic {
                link: link.name.clone(),
                loads_cl: loads,
                evicts_cl: evicts,
                cycles,
            }
        })
        .collect();
    let memory_cls = memory_cls(counts);
    Ok(TrafficBreakdown {
        per_link,
        memory_cls,
        mem_cycles: memory_cls as f64 * mem_cy_per_cl,
    })
}
