//! Steady-state in-core cycles per cache-line iteration.
//!
//! Each op class (data transfer, overlapping) is scheduled on its own. A
//! micro-op needs one unit on one of its eligible ports and, when it has an
//! AGU demand, one unit on one of its AGUs as well. The class takes the
//! smallest integer `C` for which
//!
//! * every port and AGU demand can be assigned with no resource above `C`, and
//! * the micro-op total fits in `C * retire_width`.
//!
//! Feasibility for a given `C` is a bipartite transportation problem, solved
//! exactly with max-flow; `C` itself comes from a binary search. Hazards and
//! dependencies are ignored, as the model assumes optimal throughput.
//!
//! Port and AGU demands share one flow network. Resources named by both kinds
//! of demand share their capacity; with disjoint port and AGU ids the two
//! problems are independent apart from the common budget `C`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::kernel::{MicroOpSpec, OpClass};
use crate::machine::IssueResource;

/// Pseudo resource reported when the retire width decides the cycle count.
pub const RETIRE: &str = "retire";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSchedule {
    pub cycles: u32,
    /// Fractional throughput bound (`cycles` is its ceiling). Unlike
    /// `cycles`, it scales exactly with the micro-op counts.
    pub steady_state_cy: f64,
    /// Units placed on each resource in one optimal assignment.
    pub binding: BTreeMap<String, u32>,
    /// Resources whose combined capacity forces `cycles`.
    pub bottleneck: Vec<String>,
}

impl ClassSchedule {
    fn idle() -> Self {
        ClassSchedule {
            cycles: 0,
            steady_state_cy: 0.0,
            binding: BTreeMap::new(),
            bottleneck: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleResult {
    pub t_nol_cy: f64,
    pub t_ol_cy: f64,
    pub data_transfer: ClassSchedule,
    pub overlapping: ClassSchedule,
}

impl ScheduleResult {
    pub fn t_core_cy(&self) -> f64 {
        self.t_nol_cy.max(self.t_ol_cy)
    }
}

pub fn schedule(
    uops: &[MicroOpSpec],
    resources: &[IssueResource],
    retire_width: u32,
) -> Result<ScheduleResult> {
    let of = |class| -> Vec<&MicroOpSpec> { uops.iter().filter(|u| u.op_class == class).collect() };
    let data_transfer = schedule_class(&of(OpClass::DataTransfer), resources, retire_width)?;
    let overlapping = schedule_class(&of(OpClass::Overlapping), resources, retire_width)?;
    Ok(ScheduleResult {
        t_nol_cy: data_transfer.cycles as f64,
        t_ol_cy: overlapping.cycles as f64,
        data_transfer,
        overlapping,
    })
}

/// One group of interchangeable units and the resources that accept them.
#[derive(Debug, Clone)]
struct Demand {
    units: u64,
    resources: Vec<usize>,
}

struct Problem {
    demands: Vec<Demand>,
    n_resources: usize,
    micro_ops: u64,
    retire_width: u64,
}

fn index_of(resources: &[IssueResource], ids: &[String]) -> Vec<usize> {
    let mut idx: Vec<usize> = ids
        .iter()
        .filter_map(|id| resources.iter().position(|r| &r.id == id))
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

pub fn schedule_class(
    uops: &[&MicroOpSpec],
    resources: &[IssueResource],
    retire_width: u32,
) -> Result<ClassSchedule> {
    let mut demands = Vec::new();
    for u in uops {
        let ports = index_of(resources, &u.eligible);
        if ports.is_empty() {
            return Err(Error::Infeasible {
                uop: u.name.clone(),
                wanted: u.eligible.clone(),
            });
        }
        demands.push(Demand {
            units: u.count_per_cl as u64,
            resources: ports,
        });
        if !u.agu_demand.is_empty() {
            let agus = index_of(resources, &u.agu_demand);
            if agus.is_empty() {
                return Err(Error::Infeasible {
                    uop: u.name.clone(),
                    wanted: u.agu_demand.clone(),
                });
            }
            demands.push(Demand {
                units: u.count_per_cl as u64,
                resources: agus,
            });
        }
    }
    let problem = Problem {
        micro_ops: uops.iter().map(|u| u.count_per_cl as u64).sum(),
        demands,
        n_resources: resources.len(),
        retire_width: retire_width.max(1) as u64,
    };
    if problem.micro_ops == 0 {
        return Ok(ClassSchedule::idle());
    }

    let cycles = problem.min_cycles();
    let (assign_cy, retire_cy) = problem.steady_state();
    let (feasible, binding) = problem.solve(cycles);
    debug_assert!(feasible);
    let binding = binding
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(i, n)| (resources[i].id.clone(), n as u32))
        .collect();

    let mut bottleneck = Vec::new();
    if cycles > 0 {
        if let Some(side) = problem.violated_set(cycles - 1) {
            bottleneck.extend(side.into_iter().map(|i| resources[i].id.clone()));
        }
        if problem.retire_bound() == cycles && retire_cy >= assign_cy {
            bottleneck.push(RETIRE.to_owned());
        }
    }

    Ok(ClassSchedule {
        cycles: cycles as u32,
        steady_state_cy: assign_cy.max(retire_cy),
        binding,
        bottleneck,
    })
}

impl Problem {
    fn total_units(&self) -> u64 {
        self.demands.iter().map(|d| d.units).sum()
    }

    fn retire_bound(&self) -> u64 {
        self.micro_ops.div_ceil(self.retire_width)
    }

    /// Max-flow with every resource capped at `cap` and demands multiplied by
    /// `scale`. Returns (source node, sink node, network, resource edge ids).
    fn network(&self, cap: u64, scale: u64) -> (usize, usize, FlowNetwork, Vec<usize>) {
        let d = self.demands.len();
        let src = 0;
        let sink = 1 + d + self.n_resources;
        let mut g = FlowNetwork::new(sink + 1);
        for (i, demand) in self.demands.iter().enumerate() {
            g.add_edge(src, 1 + i, demand.units * scale);
            for &r in &demand.resources {
                g.add_edge(1 + i, 1 + d + r, demand.units * scale);
            }
        }
        let edges = (0..self.n_resources)
            .map(|r| g.add_edge(1 + d + r, sink, cap))
            .collect();
        (src, sink, g, edges)
    }

    fn assignable(&self, cap: u64, scale: u64) -> bool {
        let (s, t, mut g, _) = self.network(cap, scale);
        g.max_flow(s, t) == self.total_units() * scale
    }

    fn solve(&self, cap: u64) -> (bool, Vec<u64>) {
        let (s, t, mut g, edges) = self.network(cap, 1);
        let ok = g.max_flow(s, t) == self.total_units();
        (ok, edges.iter().map(|&e| g.flow_on(e)).collect())
    }

    /// Smallest per-resource cap that fits `scale` copies of the demand.
    fn min_cap(&self, scale: u64) -> u64 {
        let mut lo = 0;
        let mut hi = self.total_units() * scale;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.assignable(mid, scale) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    fn min_cycles(&self) -> u64 {
        self.min_cap(1).max(self.retire_bound())
    }

    /// Fractional bounds from assignment and from retirement. The smallest
    /// fractional cap equals D(S)/|S| for the tightest resource set S, so
    /// trying every denominator up to the resource count finds it.
    fn steady_state(&self) -> (f64, f64) {
        let used = {
            let mut all: Vec<usize> = self
                .demands
                .iter()
                .flat_map(|d| d.resources.iter().copied())
                .collect();
            all.sort_unstable();
            all.dedup();
            all.len().max(1) as u64
        };
        let assign = (1..=used)
            .map(|q| self.min_cap(q) as f64 / q as f64)
            .fold(f64::INFINITY, f64::min);
        (assign, self.micro_ops as f64 / self.retire_width as f64)
    }

    /// Resources on the source side of a min cut when capped at `cap`, or
    /// `None` if the demand fits.
    fn violated_set(&self, cap: u64) -> Option<Vec<usize>> {
        let (s, t, mut g, _) = self.network(cap, 1);
        if g.max_flow(s, t) == self.total_units() {
            return None;
        }
        let side = g.residual_reachable(s);
        let first = 1 + self.demands.len();
        Some((0..self.n_resources).filter(|&r| side[first + r]).collect())
    }
}
