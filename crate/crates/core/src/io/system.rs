//! System directories: `M.mtx`, `D.mtx`, `K.mtx`, `B.mtx` and `meta.json`.
//!
//! Reduced models carry an identity mass matrix, recorded in `meta.json`
//! instead of an `M.mtx` file, plus the stiffness factor `G.mtx` with
//! `K = G G^T`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mtx::{read_mtx, write_mtx, Storage};
use super::{create_dir, write_json};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::recovery::ReducedSecondOrder;
use crate::so_model::{SecondOrderSystem, TripleChainParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassKind {
    Matrix,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMeta {
    pub n: usize,
    pub m: usize,
    pub mass: MassKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple_chain: Option<TripleChainMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_from: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleChainMeta {
    pub n_per_row: usize,
    pub params: TripleChainParams,
}

#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub sys: SecondOrderSystem,
    pub meta: Option<SystemMeta>,
    /// Largest `||X - X^T||_F` among the stored M, D, K before symmetrizing.
    pub asymmetry: f64,
}

fn symmetrize(a: Mat) -> (Mat, f64) {
    let skew = (&a - a.transpose()).norm();
    ((&a + a.transpose()) * 0.5, skew)
}

pub fn write_system(dir: &Path, sys: &SecondOrderSystem, meta: &SystemMeta) -> Result<()> {
    create_dir(dir)?;
    if meta.mass == MassKind::Matrix {
        write_mtx(&dir.join("M.mtx"), &sys.m, Storage::Symmetric)?;
    }
    write_mtx(&dir.join("D.mtx"), &sys.d, Storage::Symmetric)?;
    write_mtx(&dir.join("K.mtx"), &sys.k, Storage::Symmetric)?;
    write_mtx(&dir.join("B.mtx"), &sys.b, Storage::General)?;
    write_json(&dir.join("meta.json"), meta)
}

pub fn write_reduced(dir: &Path, red: &ReducedSecondOrder, source: Option<&str>) -> Result<()> {
    let meta = SystemMeta {
        n: red.r(),
        m: red.b.ncols(),
        mass: MassKind::Identity,
        triple_chain: None,
        reduced_from: source.map(str::to_owned),
    };
    write_system(dir, &red.to_system(), &meta)?;
    write_mtx(&dir.join("G.mtx"), &red.g, Storage::General)
}

/// Load a system directory, symmetrizing M, D and K on ingest.
pub fn read_system(dir: &Path) -> Result<LoadedSystem> {
    if !dir.is_dir() {
        return Err(Error::Io(format!("{} is not a directory", dir.display())));
    }
    let meta_path = dir.join("meta.json");
    let meta: Option<SystemMeta> = if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path)?;
        Some(
            serde_json::from_str(&text)
                .map_err(|e| Error::Io(format!("{}: {e}", meta_path.display())))?,
        )
    } else {
        None
    };
    let (d, skew_d) = symmetrize(read_mtx(&dir.join("D.mtx"))?);
    let (k, skew_k) = symmetrize(read_mtx(&dir.join("K.mtx"))?);
    let b = read_mtx(&dir.join("B.mtx"))?;
    let m_path = dir.join("M.mtx");
    let (m, skew_m) = match (&meta, m_path.exists()) {
        (_, true) => symmetrize(read_mtx(&m_path)?),
        (
            Some(SystemMeta {
                mass: MassKind::Identity,
                ..
            }),
            false,
        ) => (Mat::identity(d.nrows(), d.nrows()), 0.0),
        _ => return Err(Error::Io(format!("{}: missing M.mtx", dir.display()))),
    };
    let sys = SecondOrderSystem::new(m, d, k, b);
    if let Some(meta) = &meta {
        if meta.n != sys.n() || meta.m != sys.inputs() {
            return Err(Error::Io(format!(
                "{}: meta.json declares n = {}, m = {} but matrices give n = {}, m = {}",
                dir.display(),
                meta.n,
                meta.m,
                sys.n(),
                sys.inputs()
            )));
        }
    }
    Ok(LoadedSystem {
        sys,
        meta,
        asymmetry: skew_m.max(skew_d).max(skew_k),
    })
}
