//! Loop kernel descriptions: data streams, the micro-op mix of one
//! cache-line iteration, and the work that iteration performs.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::MachineModel;
use crate::traffic;

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    ExplicitLoad,
    /// Regular store; implies a write-allocate (RFO) load of the same line.
    Store,
    NtStore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    pub name: String,
    pub kind: StreamKind,
    #[serde(default = "one")]
    pub count: u32,
    /// For a store stream: the explicit load stream whose lines it writes
    /// back in place. Such stores need no write-allocate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overwrites: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    /// Loads and stores between registers and L1; never overlaps transfers.
    DataTransfer,
    Overlapping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroOpSpec {
    pub name: String,
    pub count_per_cl: u32,
    /// Ports that can execute the micro-op.
    pub eligible: Vec<String>,
    /// AGUs usable for its address generation, empty if none is needed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agu_demand: Vec<String>,
    pub op_class: OpClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreCycles {
    pub t_ol: f64,
    pub t_nol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelModel {
    pub name: String,
    pub loop_body: String,
    /// Work done per cache-line iteration, in `work_unit`s.
    pub work_per_cl: f64,
    /// Free-form unit tag echoed in performance output ("Up", "Flop", ...).
    pub work_unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sustained_bandwidth_gbs: Option<f64>,
    /// Bypasses the scheduler when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_core: Option<CoreCycles>,
    pub streams: Vec<StreamSpec>,
    #[serde(default)]
    pub uops: Vec<MicroOpSpec>,
}

/// Stream totals by kind. RFO streams are never declared: every regular
/// store stream that is not in place implies one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamCounts {
    pub explicit_loads: u32,
    /// Regular (write-allocate) store streams, including in-place ones.
    pub stores: u32,
    /// Regular stores that overwrite lines already loaded explicitly.
    pub in_place_stores: u32,
    pub nt_stores: u32,
}

impl StreamCounts {
    pub fn rfo(&self) -> u32 {
        self.stores - self.in_place_stores
    }

    pub fn write_streams(&self) -> u32 {
        self.stores + self.nt_stores
    }
}

impl KernelModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let kernel: KernelModel = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_owned(),
            message: e.to_string(),
        })?;
        kernel.validate(origin)?;
        Ok(kernel)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("kernel model serializes")
    }

    pub fn validate(&self, origin: &str) -> Result<()> {
        let bad = |field: &str, inv: &str| Err(Error::validation(origin, field, inv));
        if self.name.trim().is_empty() {
            return bad("name", "must not be empty");
        }
        if !(self.work_per_cl > 0.0 && self.work_per_cl.is_finite()) {
            return bad("work_per_cl", "must be > 0");
        }
        if let Some(bw) = self.sustained_bandwidth_gbs {
            if bw.is_nan() || bw <= 0.0 {
                return bad("sustained_bandwidth_gbs", "must be > 0");
            }
        }
        if self.streams.is_empty() {
            return bad("streams", "a kernel needs at least one data stream");
        }
        let mut names = HashSet::new();
        for s in &self.streams {
            if s.count < 1 {
                return bad(&format!("streams.{}.count", s.name), "must be >= 1");
            }
            if !names.insert(s.name.as_str()) {
                return bad(
                    &format!("streams.{}", s.name),
                    "stream names must be unique",
                );
            }
        }
        for s in &self.streams {
            let Some(target) = &s.overwrites else {
                continue;
            };
            let field = format!("streams.{}.overwrites", s.name);
            if s.kind != StreamKind::Store {
                return bad(&field, "only regular store streams can overwrite in place");
            }
            match self.streams.iter().find(|l| &l.name == target) {
                Some(l) if l.kind == StreamKind::ExplicitLoad && l.count >= s.count => {}
                _ => {
                    return bad(
                        &field,
                        "must name an explicit_load stream with at least as many lines",
                    )
                }
            }
        }
        for u in &self.uops {
            if u.count_per_cl < 1 {
                return bad(&format!("uops.{}.count_per_cl", u.name), "must be >= 1");
            }
            if u.eligible.is_empty() {
                return bad(&format!("uops.{}.eligible", u.name), "must not be empty");
            }
        }
        match self.explicit_core {
            Some(c) => {
                if !(c.t_ol >= 0.0 && c.t_nol >= 0.0) {
                    return bad("explicit_core", "cycle counts must be >= 0");
                }
            }
            None if self.uops.is_empty() => {
                return bad("uops", "required unless explicit_core is given");
            }
            None => {}
        }
        Ok(())
    }

    /// Check micro-op classes against the machine: an op is `data_transfer`
    /// exactly when every known eligible port moves data to or from L1.
    pub fn validate_against(&self, machine: &MachineModel) -> Result<()> {
        for u in &self.uops {
            let ports: Vec<_> = u
                .eligible
                .iter()
                .filter_map(|id| machine.resource(id))
                .collect();
            if ports.is_empty() {
                continue;
            }
            let moves_data = ports
                .iter()
                .all(|r| r.capabilities.iter().any(|c| c.is_data_transfer()));
            let declared = u.op_class == OpClass::DataTransfer;
            if moves_data != declared {
                return Err(Error::validation(
                    &self.name,
                    format!("uops.{}.op_class", u.name),
                    "data_transfer exactly for micro-ops issuing on load/store ports",
                ));
            }
        }
        Ok(())
    }

    pub fn stream_counts(&self) -> StreamCounts {
        self.streams
            .iter()
            .fold(StreamCounts::default(), |mut acc, s| {
                match s.kind {
                    StreamKind::ExplicitLoad => acc.explicit_loads += s.count,
                    StreamKind::Store => {
                        acc.stores += s.count;
                        if s.overwrites.is_some() {
                            acc.in_place_stores += s.count;
                        }
                    }
                    StreamKind::NtStore => acc.nt_stores += s.count,
                }
                acc
            })
    }

    /// Work units per byte of memory traffic.
    pub fn intensity(&self, machine: &MachineModel) -> f64 {
        let cls = traffic::memory_cls(self.stream_counts());
        self.work_per_cl / (cls as f64 * machine.cacheline_bytes as f64)
    }
}
