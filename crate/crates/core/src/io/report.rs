//! Machine-readable reduction report.

use serde::Serialize;

use crate::kyp::{KypMethod, KypResiduals};
use crate::linalg;
use crate::pipeline::{PipelineConfig, PipelineOutput, StageTiming};
use crate::prbt::TruncationPlan;
use crate::recovery::{OverdampedReport, RecoveryReport, Transform};
use crate::so_model::ValidationReport;

pub const SCHEMA_VERSION: u32 = 1;

/// One re-verified invariant.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    /// Strict variant for definiteness: passes iff `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub source: Option<String>,
    pub n: usize,
    pub m: usize,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub target_r: Option<usize>,
    pub cluster_tol: f64,
    pub tol_one: f64,
    pub rank_tol: f64,
    pub path_tol: f64,
    pub assembly_tol: f64,
    pub semi_simple_cond: f64,
}

impl From<&PipelineConfig> for ConfigSummary {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            target_r: c.target_r,
            cluster_tol: c.cluster_tol,
            tol_one: c.recovery.tol_one,
            rank_tol: c.kyp.rank_tol,
            path_tol: c.kyp.path_tol,
            assembly_tol: c.recovery.assembly_tol,
            semi_simple_cond: c.recovery.sign.max_cond,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KypSummary {
    pub method: KypMethod,
    pub rank: usize,
    pub undamped: usize,
    pub p_norm: f64,
    pub residuals: KypResiduals,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub negative: Vec<f64>,
    pub positive: Vec<f64>,
    pub zero_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionSummary {
    pub r: usize,
    pub sigma: Vec<f64>,
    pub biorthogonality: f64,
    pub raw_biorthogonality: f64,
    pub structure_defect: f64,
    pub certificate_primal: f64,
    pub certificate_dual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedModelSummary {
    pub r: usize,
    pub d_eigenvalues: Vec<f64>,
    pub d_negative_count: usize,
    pub k_min_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub input: InputSummary,
    pub config: ConfigSummary,
    pub validation: ValidationReport,
    pub kyp: KypSummary,
    pub spectrum: SpectrumSummary,
    pub plan: TruncationPlan,
    pub error_bound: f64,
    pub reduction: ReductionSummary,
    pub recovery: RecoveryReport,
    pub overdamped: Option<OverdampedReport>,
    pub reduced_model: ReducedModelSummary,
    pub verification: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTiming>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transforms: Option<Vec<Transform>>,
}

impl Report {
    pub fn new(
        input: InputSummary,
        cfg: &PipelineConfig,
        validation: ValidationReport,
        out: &PipelineOutput,
        verification: Vec<Check>,
    ) -> Self {
        let (primal, dual) = out.reduced.certificate();
        let rom = &out.recovery.result;
        Self {
            schema_version: SCHEMA_VERSION,
            input,
            config: cfg.into(),
            validation,
            kyp: KypSummary {
                method: out.kyp.method,
                rank: out.kyp.rank,
                undamped: out.kyp.undamped,
                p_norm: linalg::norm2(&out.kyp.p),
                residuals: out.kyp.residuals,
            },
            spectrum: SpectrumSummary {
                negative: out.spectrum.neg.clone(),
                positive: out.spectrum.pos.clone(),
                zero_count: out.spectrum.zero_count(),
            },
            plan: out.plan.clone(),
            error_bound: out.plan.error_bound,
            reduction: ReductionSummary {
                r: out.reduced.r,
                sigma: out.reduced.sigma.clone(),
                biorthogonality: out.reduced.biorthogonality,
                raw_biorthogonality: out.reduced.raw_biorthogonality,
                structure_defect: out.reduced.structure_defect,
                certificate_primal: primal,
                certificate_dual: dual,
            },
            recovery: out.recovery.clone(),
            overdamped: out.overdamped.clone(),
            reduced_model: ReducedModelSummary {
                r: rom.r(),
                d_eigenvalues: linalg::sym_eigvals(&rom.d),
                d_negative_count: rom.negative_damping_count(),
                k_min_eig: linalg::lambda_min(&rom.k),
            },
            verification,
            timings: None,
            transforms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verification.iter().all(|c| c.passed)
    }
}

pub fn write<T: Serialize>(path: &std::path::Path, value: &T) -> crate::Result<()> {
    super::write_json(path, value)
}
