//! Machine descriptions: core clock, cache-link bandwidths, issue resources
//! and memory-domain topology.
//!
//! Machine files are TOML documents. See `assets/machines/` for the bundled
//! Haswell-EP description and the README for the schema.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

fn default_penalty() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineModel {
    pub name: String,
    pub core_clock_ghz: f64,
    pub cacheline_bytes: u32,
    /// Innermost (L1<->L2) first.
    pub cache_links: Vec<CacheLink>,
    pub memory: MemoryModel,
    pub resources: Vec<IssueResource>,
    /// Micro-ops retired per cycle.
    pub retire_width: u32,
    /// Extra cycles per explicit load stream for each off-core level. Only
    /// applied when the caller asks for it.
    #[serde(default = "default_penalty")]
    pub off_core_penalty_cy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheLink {
    pub name: String,
    /// Bytes per cycle toward the core.
    pub load_bandwidth_bpc: f64,
    /// Bytes per cycle away from the core.
    pub evict_bandwidth_bpc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryModel {
    /// 2 with Cluster-on-Die enabled, 1 otherwise.
    pub domains_per_chip: u32,
    pub cores_per_domain: u32,
    /// Sustained per-domain bandwidth used when a kernel brings none.
    pub default_bandwidth_gbs: f64,
}

impl MemoryModel {
    pub fn cores_per_chip(&self) -> u32 {
        self.domains_per_chip * self.cores_per_domain
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Port,
    Agu,
}

/// Closed vocabulary of execution capabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Alu,
    Fma,
    Add,
    Mul,
    Div,
    Load,
    StoreData,
    AguFull,
    AguSimple,
    Lea,
    Branch,
    Shuffle,
}

impl Capability {
    /// Capabilities that move data between registers and L1.
    pub fn is_data_transfer(self) -> bool {
        matches!(self, Capability::Load | Capability::StoreData)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueResource {
    pub id: String,
    pub kind: ResourceKind,
    #[serde(default)]
    pub capabilities: Vec<Capability>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Load,
    Evict,
}

impl MachineModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Parse and validate. `origin` names the document in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let machine: MachineModel = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_owned(),
            message: e.to_string(),
        })?;
        machine.validate(origin)?;
        Ok(machine)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("machine model serializes")
    }

    pub fn validate(&self, origin: &str) -> Result<()> {
        let bad = |field: &str, inv: &str| Err(Error::validation(origin, field, inv));
        if self.name.trim().is_empty() {
            return bad("name", "must not be empty");
        }
        if !(self.core_clock_ghz > 0.0 && self.core_clock_ghz.is_finite()) {
            return bad("core_clock_ghz", "must be > 0");
        }
        if self.cacheline_bytes == 0 {
            return bad("cacheline_bytes", "must be > 0");
        }
        if self.cache_links.is_empty() {
            return bad(
                "cache_links",
                "must list at least one link (inner to outer)",
            );
        }
        let mut names = HashSet::new();
        for link in &self.cache_links {
            let field = format!("cache_links.{}", link.name);
            if !names.insert(link.name.as_str()) {
                return bad(&field, "link names must be unique");
            }
            if !(link.load_bandwidth_bpc > 0.0 && link.load_bandwidth_bpc.is_finite()) {
                return bad(&format!("{field}.load_bandwidth_bpc"), "must be > 0");
            }
            if !(link.evict_bandwidth_bpc > 0.0 && link.evict_bandwidth_bpc.is_finite()) {
                return bad(&format!("{field}.evict_bandwidth_bpc"), "must be > 0");
            }
        }
        if self.memory.domains_per_chip < 1 {
            return bad("memory.domains_per_chip", "must be >= 1");
        }
        if self.memory.cores_per_domain < 1 {
            return bad("memory.cores_per_domain", "must be >= 1");
        }
        if self.memory.default_bandwidth_gbs.is_nan() || self.memory.default_bandwidth_gbs <= 0.0 {
            return bad("memory.default_bandwidth_gbs", "must be > 0");
        }
        let mut ids = HashSet::new();
        for r in &self.resources {
            if !ids.insert(r.id.as_str()) {
                return bad(
                    &format!("resources.{}", r.id),
                    "resource ids must be unique",
                );
            }
        }
        if self.retire_width == 0 {
            return bad("retire_width", "must be > 0");
        }
        if self.off_core_penalty_cy.is_nan() || self.off_core_penalty_cy < 0.0 {
            return bad("off_core_penalty_cy", "must be >= 0");
        }
        Ok(())
    }

    pub fn link(&self, name: &str) -> Result<&CacheLink> {
        self.cache_links
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLink(name.to_owned()))
    }

    /// Cycles to move one cache line across `link` in `direction`.
    pub fn link_cycles_per_cl(&self, link: &str, direction: Direction) -> Result<f64> {
        let link = self.link(link)?;
        Ok(link.cycles_per_cl(self.cacheline_bytes, direction))
    }

    /// Cycles per cache line at a sustained memory bandwidth in GB/s.
    pub fn mem_cycles_per_cl(&self, bandwidth_gbs: f64) -> Result<f64> {
        if bandwidth_gbs.is_nan() || bandwidth_gbs <= 0.0 {
            return Err(Error::NonPositiveBandwidth(bandwidth_gbs));
        }
        Ok(units::gbs_to_cycles(
            self.cacheline_bytes as f64,
            self.core_clock_ghz,
            bandwidth_gbs,
        ))
    }

    /// Names of the memory levels, innermost first: `L1`, `L2`, ... and `Mem`.
    pub fn level_names(&self) -> Vec<String> {
        level_names(self.cache_links.len() + 1)
    }

    /// Name of the link between the outermost cache and memory.
    pub fn memory_link_name(&self) -> String {
        format!("L{}Mem", self.cache_links.len() + 1)
    }

    pub fn resource(&self, id: &str) -> Option<&IssueResource> {
        self.resources.iter().find(|r| r.id == id)
    }
}

impl CacheLink {
    pub fn cycles_per_cl(&self, cacheline_bytes: u32, direction: Direction) -> f64 {
        let bw = match direction {
            Direction::Load => self.load_bandwidth_bpc,
            Direction::Evict => self.evict_bandwidth_bpc,
        };
        cacheline_bytes as f64 / bw
    }
}

/// Level names for a hierarchy with `data_terms` transfer terms.
pub fn level_names(data_terms: usize) -> Vec<String> {
    (1..=data_terms)
        .map(|i| format!("L{i}"))
        .chain(std::iter::once("Mem".to_owned()))
        .collect()
}
