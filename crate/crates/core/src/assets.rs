//! Bundled machine, kernel and measurement files.
//!
//! Files are compiled into the binary. Setting `ECM_ASSET_DIR` makes
//! [`resolve`] look in that directory (with `machines/`, `kernels/` and
//! `measurements/` subdirectories) before falling back to the embedded copies.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::machine::MachineModel;
use crate::validate::MeasurementSet;

pub const ASSET_DIR_ENV: &str = "ECM_ASSET_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssetKind {
    Machine,
    Kernel,
    Measurements,
}

impl AssetKind {
    pub fn extension(self) -> &'static str {
        match self {
            AssetKind::Machine => "machine",
            AssetKind::Kernel => "kernel",
            AssetKind::Measurements => "meas",
        }
    }

    fn subdir(self) -> &'static str {
        match self {
            AssetKind::Machine => "machines",
            AssetKind::Kernel => "kernels",
            AssetKind::Measurements => "measurements",
        }
    }
}

#[derive(Debug)]
pub struct Asset {
    pub kind: AssetKind,
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! asset {
    ($kind:ident, $dir:literal, $name:literal, $ext:literal) => {
        Asset {
            kind: AssetKind::$kind,
            name: $name,
            text: include_str!(concat!("../assets/", $dir, "/", $name, ".", $ext)),
        }
    };
}

pub static BUNDLED: &[Asset] = &[
    asset!(Machine, "machines", "haswell-ep-2695v3", "machine"),
    asset!(Kernel, "kernels", "ddot", "kernel"),
    asset!(Kernel, "kernels", "load", "kernel"),
    asset!(Kernel, "kernels", "store", "kernel"),
    asset!(Kernel, "kernels", "update", "kernel"),
    asset!(Kernel, "kernels", "copy", "kernel"),
    asset!(Kernel, "kernels", "stream-triad", "kernel"),
    asset!(Kernel, "kernels", "schoenauer", "kernel"),
    asset!(Kernel, "kernels", "stream-triad-nt", "kernel"),
    asset!(Kernel, "kernels", "schoenauer-nt", "kernel"),
    asset!(Measurements, "measurements", "haswell-microbench", "meas"),
];

/// The seven regular-store microbenchmarks, in published order.
pub const BENCHMARK_KERNELS: [&str; 7] = [
    "ddot",
    "load",
    "store",
    "update",
    "copy",
    "stream-triad",
    "schoenauer",
];

pub fn bundled(kind: AssetKind) -> impl Iterator<Item = &'static Asset> {
    BUNDLED.iter().filter(move |a| a.kind == kind)
}

fn strip_ext(name: &str, kind: AssetKind) -> &str {
    name.strip_suffix(kind.extension())
        .and_then(|s| s.strip_suffix('.'))
        .unwrap_or(name)
}

fn find(kind: AssetKind, name: &str) -> Result<&'static Asset> {
    let stem = strip_ext(name, kind);
    bundled(kind)
        .find(|a| a.name == stem)
        .ok_or_else(|| Error::UnknownAsset(name.to_owned()))
}

/// Where a requested file comes from.
#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Embedded(&'static Asset),
}

impl Source {
    pub fn origin(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Embedded(a) => format!("<bundled>/{}.{}", a.name, a.kind.extension()),
        }
    }

    pub fn read(&self) -> Result<String> {
        match self {
            Source::File(p) => std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.clone(),
                source,
            }),
            Source::Embedded(a) => Ok(a.text.to_owned()),
        }
    }
}

/// Resolve a user-supplied name: an existing path wins, then the asset
/// directory override, then the embedded copy.
pub fn resolve(kind: AssetKind, name: &str) -> Result<Source> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Ok(Source::File(direct.to_owned()));
    }
    if let Some(dir) = std::env::var_os(ASSET_DIR_ENV) {
        let file = format!("{}.{}", strip_ext(name, kind), kind.extension());
        for candidate in [
            Path::new(&dir).join(kind.subdir()).join(&file),
            Path::new(&dir).join(&file),
        ] {
            if candidate.is_file() {
                return Ok(Source::File(candidate));
            }
        }
    }
    find(kind, name).map(Source::Embedded)
}

pub fn machine(name: &str) -> Result<MachineModel> {
    let src = resolve(AssetKind::Machine, name)?;
    MachineModel::from_toml_str(&src.read()?, &src.origin())
}

pub fn kernel(name: &str) -> Result<KernelModel> {
    let src = resolve(AssetKind::Kernel, name)?;
    KernelModel::from_toml_str(&src.read()?, &src.origin())
}

pub fn measurements(name: &str) -> Result<MeasurementSet> {
    let src = resolve(AssetKind::Measurements, name)?;
    MeasurementSet::from_toml_str(&src.read()?, &src.origin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory() {
        assert_eq!(bundled(AssetKind::Machine).count(), 1);
        assert_eq!(bundled(AssetKind::Kernel).count(), 9);
        for a in BUNDLED {
            match a.kind {
                AssetKind::Machine => drop(machine(a.name).unwrap()),
                AssetKind::Kernel => drop(kernel(a.name).unwrap()),
                AssetKind::Measurements => drop(measurements(a.name).unwrap()),
            }
        }
    }

    #[test]
    fn names_resolve_with_or_without_extension() {
        assert_eq!(kernel("ddot.kernel").unwrap().name, "ddot");
        assert_eq!(kernel("ddot").unwrap().name, "ddot");
        assert!(matches!(kernel("nope"), Err(Error::UnknownAsset(_))));
    }
}
