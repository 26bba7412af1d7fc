//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use ecm_core::kernel::{MicroOpSpec, OpClass};
use ecm_core::machine::{IssueResource, ResourceKind};
use proptest::prelude::*;

pub const MACHINE: &str = "haswell-ep-2695v3";

/// A random scheduling problem: resources `R0..Rn` and micro-ops whose port
/// and AGU sets are bitmasks over them.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n_resources: usize,
    /// (count, eligible mask, agu mask); an AGU mask of 0 means no AGU demand.
    pub ops: Vec<(u32, u32, u32)>,
    pub retire_width: u32,
}

impl Instance {
    pub fn resources(&self) -> Vec<IssueResource> {
        (0..self.n_resources)
            .map(|i| IssueResource {
                id: format!("R{i}"),
                kind: ResourceKind::Port,
                capabilities: vec![],
            })
            .collect()
    }

    pub fn uops(&self) -> Vec<MicroOpSpec> {
        let ids = |mask: u32| -> Vec<String> {
            (0..self.n_resources)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| format!("R{b}"))
                .collect()
        };
        self.ops
            .iter()
            .enumerate()
            .map(|(i, &(count, eligible, agu))| MicroOpSpec {
                name: format!("u{i}"),
                count_per_cl: count,
                eligible: ids(eligible),
                agu_demand: ids(agu),
                op_class: OpClass::Overlapping,
            })
            .collect()
    }

    /// Demand groups: one per port set and one per AGU set.
    pub fn groups(&self) -> Vec<(u32, u32)> {
        let mut g = Vec::new();
        for &(count, eligible, agu) in &self.ops {
            g.push((count, eligible));
            if agu != 0 {
                g.push((count, agu));
            }
        }
        g
    }

    pub fn micro_ops(&self) -> u32 {
        self.ops.iter().map(|o| o.0).sum()
    }

    pub fn retire_bound(&self) -> u32 {
        self.micro_ops().div_ceil(self.retire_width)
    }
}

pub fn instance(
    max_kinds: usize,
    max_resources: usize,
    max_count: u32,
) -> impl Strategy<Value = Instance> {
    (1..=max_resources).prop_flat_map(move |n| {
        let full = (1u32 << n) - 1;
        let op = (0..=max_count, 1..=full, prop_oneof![Just(0u32), 1..=full]);
        (prop::collection::vec(op, 1..=max_kinds), 1u32..=8).prop_map(move |(ops, retire_width)| {
            Instance {
                n_resources: n,
                ops,
                retire_width,
            }
        })
    })
}

/// Optimal integer cycle count by exhaustive search over unit placements.
pub fn exhaustive_cycles(inst: &Instance) -> u32 {
    let mut groups: Vec<(u32, Vec<usize>)> = inst
        .groups()
        .into_iter()
        .filter(|g| g.0 > 0)
        .map(|(c, mask)| {
            (
                c,
                (0..inst.n_resources)
                    .filter(|b| mask >> b & 1 == 1)
                    .collect(),
            )
        })
        .collect();
    // most constrained first keeps the search tree narrow
    groups.sort_by_key(|g| (g.1.len(), std::cmp::Reverse(g.0)));
    let total: u32 = groups.iter().map(|g| g.0).sum();
    let mut cap = 0;
    while cap < total {
        let mut search = Search {
            groups: &groups,
            cap,
            loads: [0; 8],
            dead: HashSet::new(),
        };
        if search.group(0) {
            break;
        }
        cap += 1;
    }
    cap.max(inst.retire_bound())
}

struct Search<'a> {
    groups: &'a [(u32, Vec<usize>)],
    cap: u32,
    loads: [u32; 8],
    /// (group, packed loads) states known to fail.
    dead: HashSet<(usize, u64)>,
}

impl Search<'_> {
    fn key(&self) -> u64 {
        self.loads.iter().fold(0, |k, &l| k << 8 | l as u64)
    }

    /// Remaining groups each fit in the spare capacity of their resources.
    fn may_fit(&self, g: usize) -> bool {
        let spare = |r: &usize| self.cap - self.loads[*r];
        let remaining: u32 = self.groups[g..].iter().map(|x| x.0).sum();
        let all_spare: u32 = (0..8).map(|r| spare(&r)).sum();
        remaining <= all_spare
            && self.groups[g..]
                .iter()
                .all(|(n, rs)| *n <= rs.iter().map(spare).sum())
    }

    fn group(&mut self, g: usize) -> bool {
        if g == self.groups.len() {
            return true;
        }
        let key = (g, self.key());
        if self.dead.contains(&key) || !self.may_fit(g) {
            return false;
        }
        let ok = self.split(g, 0, self.groups[g].0);
        if !ok {
            self.dead.insert(key);
        }
        ok
    }

    /// Every way to put `left` units of group `g` on its resources `i..`.
    fn split(&mut self, g: usize, i: usize, left: u32) -> bool {
        let rs = &self.groups[g].1;
        if left == 0 {
            return self.group(g + 1);
        }
        if i == rs.len() {
            return false;
        }
        let r = rs[i];
        let room = self.cap - self.loads[r];
        for take in (0..=room.min(left)).rev() {
            self.loads[r] += take;
            let ok = self.split(g, i + 1, left - take);
            self.loads[r] -= take;
            if ok {
                return true;
            }
        }
        false
    }
}

/// Largest demand density over all resource subsets: units that must land in
/// `S` divided by `|S|`. Returns the fractional bound and its integer ceiling.
pub fn hall_bound(inst: &Instance) -> (f64, u32) {
    let groups = inst.groups();
    let mut frac = 0.0f64;
    let mut int = 0u32;
    for s in 1u32..(1 << inst.n_resources) {
        let demand: u32 = groups
            .iter()
            .filter(|&&(_, m)| m & !s == 0)
            .map(|g| g.0)
            .sum();
        let size = s.count_ones();
        frac = frac.max(demand as f64 / size as f64);
        int = int.max(demand.div_ceil(size));
    }
    (frac, int)
}
