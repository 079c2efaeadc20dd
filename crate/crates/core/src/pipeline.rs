//! End-to-end reduction: lift, minimal KYP solution, signed balancing,
//! truncation, and second-order recovery.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fo_realization::{lift, StructuredFirstOrder};
use crate::io::Check;
use crate::kyp::{self, KypOptions, KypSolution};
use crate::linalg::{self, Mat};
use crate::prbt::{self, ReducedStructured, SignedSpectrum, TruncationPlan};
use crate::recovery::{self, OverdampedReport, RecoveryOptions, RecoveryReport};
use crate::so_model::{SecondOrderSystem, ValidationTol};
use crate::tolerances;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Kept characteristic values per sign; `None` keeps every nonzero one.
    pub target_r: Option<usize>,
    pub validation: ValidationTol,
    pub kyp: KypOptions,
    pub cluster_tol: f64,
    pub recovery: RecoveryOptions,
    /// Run the overdamping preservation check when the input is overdamped.
    pub check_overdamped: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            target_r: None,
            validation: ValidationTol::default(),
            kyp: KypOptions::default(),
            cluster_tol: tolerances::CLUSTER,
            recovery: RecoveryOptions::default(),
            check_overdamped: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub fo: StructuredFirstOrder,
    pub kyp: KypSolution,
    pub l: Mat,
    pub spectrum: SignedSpectrum,
    pub plan: TruncationPlan,
    pub reduced: ReducedStructured,
    pub recovery: RecoveryReport,
    pub overdamped: Option<OverdampedReport>,
    pub timings: Vec<StageTiming>,
}

struct Clock {
    last: Instant,
    out: Vec<StageTiming>,
}

impl Clock {
    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.out.push(StageTiming {
            stage,
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

fn staged<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e: Error| e.in_stage(stage))
}

pub fn reduce_second_order(
    sys: &SecondOrderSystem,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let mut clock = Clock {
        last: Instant::now(),
        out: Vec::new(),
    };
    staged("validate", sys.validate(&cfg.validation))?;
    let fo = staged("lift", lift(sys))?;
    clock.lap("lift");
    let sol = staged("kyp", kyp::solve_min_kyp(&fo, &cfg.kyp))?;
    clock.lap("kyp");
    let l = staged("factorize", kyp::factorize(&sol.p, cfg.kyp.rank_tol))?;
    let spectrum = prbt::signed_eigendecomposition(&l, cfg.cluster_tol);
    let plan = staged(
        "plan",
        match cfg.target_r {
            Some(r) => prbt::plan_truncation(&spectrum, r),
            None => prbt::plan_full(&spectrum),
        },
    )?;
    let reduced = staged("reduce", prbt::reduce(&fo, &l, &spectrum, &plan))?;
    clock.lap("balance");
    let rec = staged("recover", recovery::recover(&reduced, &cfg.recovery))?;
    clock.lap("recover");
    let overdamped = if cfg.check_overdamped {
        staged(
            "overdamped",
            recovery::overdamped_pipeline_check(sys, &reduced, &rec.result),
        )?
    } else {
        None
    };
    clock.lap("checks");
    Ok(PipelineOutput {
        fo,
        kyp: sol,
        l,
        spectrum,
        plan,
        reduced,
        recovery: rec,
        overdamped,
        timings: clock.out,
    })
}

/// Recompute the invariants of a pipeline run from its matrices rather than
/// trusting the residuals each stage reported.
pub fn verify(
    sys: &SecondOrderSystem,
    out: &PipelineOutput,
    cfg: &PipelineConfig,
    omegas: &[f64],
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p_norm = linalg::norm2(&out.kyp.p).max(f64::MIN_POSITIVE);
    let kyp = out.fo.kyp_residual(&out.kyp.p);
    checks.push(Check::at_most(
        "kyp_lmi_max_eig_rel",
        kyp.lmi_max_eig / p_norm,
        1e-6,
    ));
    checks.push(Check::at_most(
        "kyp_coupling_rel",
        kyp.coupling_norm / linalg::norm2(&out.fo.b),
        1e-8,
    ));
    let n2 = out.kyp.p.nrows();
    checks.push(Check::at_most(
        "kyp_below_identity",
        linalg::lambda_max(&(&out.kyp.p - Mat::identity(n2, n2))),
        1e-6,
    ));

    let plan = &out.plan;
    let bound = 2.0 * (plan.truncated_sum_neg + plan.truncated_sum_pos);
    checks.push(Check::at_most(
        "error_bound_identity",
        (plan.error_bound - bound).abs(),
        0.0,
    ));

    let red = &out.reduced.sys;
    let defects = red.structure_defects();
    checks.push(Check::at_most(
        "reduced_structure_defect",
        defects
            .self_adjoint
            .max(defects.top_of_b)
            .max(defects.output),
        1e-12,
    ));
    let (primal, dual) = out.reduced.certificate();
    let a_scale = red.a.amax().max(1.0);
    checks.push(Check::at_most(
        "reduced_passivity_certificate",
        primal.max(dual) / a_scale,
        1e-8,
    ));

    let rom = &out.recovery.result;
    let d_scale = rom.d.amax().max(f64::MIN_POSITIVE);
    checks.push(Check::at_most(
        "damping_symmetry",
        (&rom.d - rom.d.transpose()).amax() / d_scale,
        1e-12,
    ));
    checks.push(Check::below(
        "stiffness_min_eig_negated",
        -linalg::lambda_min(&rom.k),
        0.0,
    ));
    checks.push(Check::at_most(
        "damping_negative_count",
        rom.negative_damping_count() as f64,
        sys.inputs() as f64,
    ));

    let mut transfer: f64 = 0.0;
    for &w in omegas {
        let s = Complex64::new(0.0, w);
        let g1 = red.transfer_function(s)?;
        let g2 = rom.transfer_function(s)?;
        transfer =
            transfer.max(linalg::cnorm2(&(g2 - &g1)) / linalg::cnorm2(&g1).max(f64::MIN_POSITIVE));
    }
    checks.push(Check::at_most("transfer_mismatch", transfer, 1e-8));

    let (a_replay, _) = recovery::replay(&red.a, &red.b, &out.recovery.transforms)?;
    let a_final = rom.first_order().a;
    let replay = (&a_replay - &a_final).amax() / a_final.amax().max(f64::MIN_POSITIVE);
    checks.push(Check::at_most(
        "replay_mismatch",
        replay,
        cfg.recovery.assembly_tol,
    ));

    let res = &out.recovery.residuals;
    checks.push(Check::at_most(
        "moments_mismatch",
        res.moments_mismatch,
        1e-8,
    ));
    checks.push(Check::at_most(
        "padding_mismatch",
        res.padding_mismatch,
        1e-10,
    ));
    Ok(checks)
}
