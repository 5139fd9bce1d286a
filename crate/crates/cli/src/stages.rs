use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use forge_core::csp::{CloudedSystem, Lin2System, OneInThreeInstance};
use forge_core::formats::{parse_clouded, parse_lin2, parse_o3, parse_tspg};
use forge_core::tsp::{build_tsp, BuildMode, TspInstance};

/// Bad input on the command line or in a file; maps to the usage exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

pub enum Stage {
    Lin2(Lin2System),
    Clouded(CloudedSystem),
    O3(OneInThreeInstance),
    Tsp(TspInstance),
}

impl Stage {
    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Lin2(_) => "lin2",
            Stage::Clouded(_) => "clouded",
            Stage::O3(_) => "o3",
            Stage::Tsp(_) => "tspg",
        }
    }
}

pub fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load(path: &Path) -> anyhow::Result<Stage> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let ctx = || format!("parsing {}", path.display());
    Ok(match ext {
        "lin2" => Stage::Lin2(parse_lin2(&text).with_context(ctx)?),
        "clouded" => Stage::Clouded(parse_clouded(&text).with_context(ctx)?),
        "o3" => Stage::O3(parse_o3(&text).with_context(ctx)?),
        "tspg" => Stage::Tsp(parse_tspg(&text).with_context(ctx)?),
        _ => return usage(format!("{}: unknown stage extension {ext:?}", path.display())),
    })
}

pub fn load_o3(path: &Path) -> anyhow::Result<OneInThreeInstance> {
    match load(path)? {
        Stage::O3(inst) => Ok(inst),
        other => usage(format!("{}: expected an .o3 file, got .{}", path.display(), other.kind())),
    }
}

/// Pipeline mode when the instance has the pipeline's shape, direct otherwise.
pub fn build_auto(inst: &OneInThreeInstance) -> anyhow::Result<(TspInstance, BuildMode)> {
    let mode = if !inst.clusters().is_empty() && inst.validate_pipeline().is_ok() {
        BuildMode::Pipeline
    } else {
        BuildMode::Direct
    };
    Ok((build_tsp(inst, mode)?, mode))
}

/// A TSP instance from a `.tspg` file or built from an `.o3` file, with the
/// source instance when there is one.
pub fn load_tsp(path: &Path) -> anyhow::Result<(TspInstance, Option<OneInThreeInstance>)> {
    match load(path)? {
        Stage::Tsp(g) => Ok((g, None)),
        Stage::O3(inst) => Ok((build_auto(&inst)?.0, Some(inst))),
        other => usage(format!("{}: expected .o3 or .tspg, got .{}", path.display(), other.kind())),
    }
}

pub fn sidecar(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

/// `out` with `.ext` appended, keeping its own extension.
pub fn appended(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
