//! Report assembly shared by the command-line tool and the acceptance suite:
//! the full per-generator report, fuzz campaigns over instance families and
//! state trajectories.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{
    contraction_equivalence_check, equivalence_report, ConditionResult, ContractionEquivalenceReport, RunConfig,
    Tolerances, Verdict,
};
use crate::duality::{kossakowski_check, predual_generator, DensityMatrix, KossakowskiReport};
use crate::error::{Error, Result};
use crate::instances::{random_density, Family, InstanceRecipe};
use crate::linalg::{max_abs, CMatrix};
use crate::rng::derive_seed;
use crate::semigroup::{GeneratorSpec, SemigroupHandle};

/// States evolved by the trace-preservation check of a report.
pub const KOSSAKOWSKI_STATES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionOutcome {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ContractionEquivalenceReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyDetail {
    pub conditions: bool,
    pub contraction_equivalence: Option<bool>,
    pub trace_equivalence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullReport {
    pub instance: serde_json::Value,
    pub conditions: Vec<ConditionResult>,
    pub consistency: bool,
    pub consistency_detail: ConsistencyDetail,
    pub tolerances: Tolerances,
    pub lambda_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub symmetry_margin: f64,
    pub contraction_equivalence: ContractionOutcome,
    pub kossakowski: KossakowskiReport,
}

pub fn full_report(instance: serde_json::Value, spec: &GeneratorSpec, cfg: &RunConfig) -> Result<FullReport> {
    let h = SemigroupHandle::from_spec(spec);
    let eq = equivalence_report(&h, cfg)?;
    let contraction_equivalence = match contraction_equivalence_check(&h, cfg) {
        Ok(r) => ContractionOutcome { applicable: true, reason: None, report: Some(r) },
        Err(Error::Hypothesis { what, margin }) => ContractionOutcome {
            applicable: false,
            reason: Some(format!("hypothesis fails: {what} (margin {margin:e})")),
            report: None,
        },
        Err(e) => return Err(e),
    };
    let n = h.n();
    let states: Vec<DensityMatrix> = (0..KOSSAKOWSKI_STATES)
        .map(|i| random_density(n, derive_seed(cfg.seed, &format!("kossakowski/{i}"))))
        .collect();
    let scale = max_abs(h.generator().rep()).max(1.0);
    let kossakowski = kossakowski_check(h.generator(), &states, &cfg.t_grid, cfg.hypothesis_tol * scale)?;

    let detail = ConsistencyDetail {
        conditions: eq.consistency,
        contraction_equivalence: contraction_equivalence.report.as_ref().map(|r| r.direction_consistency),
        trace_equivalence: kossakowski.equivalence_consistent,
    };
    Ok(FullReport {
        instance,
        consistency: detail.conditions && detail.contraction_equivalence.unwrap_or(true) && detail.trace_equivalence,
        consistency_detail: detail,
        conditions: eq.conditions,
        tolerances: eq.tolerances,
        lambda_grid: eq.lambda_grid,
        t_grid: eq.t_grid,
        symmetry_margin: eq.symmetry_margin,
        contraction_equivalence,
        kossakowski,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub min_margin: f64,
    pub worst_index: usize,
    pub satisfied: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzEntry {
    pub index: usize,
    pub recipe: InstanceRecipe,
    pub consistency: bool,
    pub margins: BTreeMap<&'static str, f64>,
    pub verdicts: BTreeMap<&'static str, Verdict>,
    pub contraction_applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub family: Family,
    pub count: usize,
    pub n: usize,
    pub seed: u64,
    pub inconsistencies: usize,
    pub worst_margins: BTreeMap<&'static str, ConditionSummary>,
    pub instances: Vec<FuzzEntry>,
}

impl FuzzSummary {
    pub fn consistent(&self) -> bool {
        self.inconsistencies == 0
    }
}

/// Runs `count` campaign recipes. Instances are evaluated concurrently on
/// `threads` workers (rayon's default when `None`); results are ordered by
/// recipe index, so the output does not depend on the thread count.
pub fn fuzz(family: Family, count: usize, n: usize, cfg: &RunConfig, threads: Option<usize>) -> Result<FuzzSummary> {
    cfg.validate()?;
    let run = || -> Result<Vec<FuzzEntry>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let recipe = InstanceRecipe::campaign(family, n, cfg.seed, i as u64);
                let spec = recipe.build()?;
                let inst = serde_json::to_value(&recipe).expect("recipes serialize");
                let rep = full_report(inst, &spec, cfg)?;
                Ok(FuzzEntry {
                    index: i,
                    consistency: rep.consistency,
                    margins: rep.conditions.iter().map(|c| (c.id.label(), c.min_margin)).collect(),
                    verdicts: rep.conditions.iter().map(|c| (c.id.label(), c.verdict)).collect(),
                    contraction_applicable: rep.contraction_equivalence.applicable,
                    recipe,
                })
            })
            .collect()
    };
    let instances = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut worst: BTreeMap<&'static str, ConditionSummary> = BTreeMap::new();
    for e in &instances {
        for (&label, &m) in &e.margins {
            let s = worst.entry(label).or_insert(ConditionSummary {
                min_margin: f64::INFINITY,
                worst_index: e.index,
                satisfied: 0,
                violated: 0,
                inconclusive: 0,
            });
            if m < s.min_margin {
                s.min_margin = m;
                s.worst_index = e.index;
            }
            match e.verdicts[label] {
                Verdict::Satisfied => s.satisfied += 1,
                Verdict::Violated => s.violated += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
            }
        }
    }
    Ok(FuzzSummary {
        family,
        count,
        n: instances.first().map_or(n, |e| e.recipe.n),
        seed: cfg.seed,
        inconsistencies: instances.iter().filter(|e| !e.consistency).count(),
        worst_margins: worst,
        instances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: CMatrix,
    pub trace: f64,
    pub min_eig: f64,
    pub purity: f64,
}

/// ρ_t = e^{tL*}(ρ) at each requested time.
pub fn trajectory(spec: &GeneratorSpec, rho: &DensityMatrix, times: &[f64]) -> Result<Vec<TrajectoryPoint>> {
    let l = spec.superoperator();
    if rho.dim() != l.dim() {
        return Err(Error::dim(l.dim(), rho.dim()));
    }
    let dual = predual_generator(&l);
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::NegativeTime(t));
            }
            let rt = dual.exp_scaled(t).apply(rho.as_cmatrix())?;
            Ok(TrajectoryPoint {
                t,
                trace: rt.trace().re,
                min_eig: rt.min_eig(),
                purity: (&rt * &rt).trace().re,
                rho: rt,
            })
        })
        .collect()
}

pub fn report_text(r: &FullReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "instance: {}", r.instance);
    let _ = writeln!(s, "lambda grid: {:?}  t grid: {:?}", r.lambda_grid, r.t_grid);
    for c in &r.conditions {
        let _ = writeln!(s, "  {:>4}  {:<12}  min margin {:+.6e}", c.id.label(), verdict_name(c.verdict), c.min_margin);
    }
    match &r.contraction_equivalence.report {
        Some(t2) => {
            let _ = writeln!(
                s,
                "contraction semigroup: L(1) {:.3e}, symmetry {:.3e}, unital {:.3e}, positivity {:?}, consistent {}",
                t2.unit_in_domain_l1_zero, t2.symmetric, t2.unital, t2.positive.status, t2.direction_consistency
            );
        }
        None => {
            let _ = writeln!(
                s,
                "contraction semigroup: not applicable ({})",
                r.contraction_equivalence.reason.as_deref().unwrap_or("")
            );
        }
    }
    let k = &r.kossakowski;
    let _ = writeln!(
        s,
        "trace preservation: margin {:.3e}, L(1) {:.3e}, consistent {}",
        k.trace_preserving_margin, k.l1_zero_margin, k.equivalence_consistent
    );
    let _ = writeln!(s, "consistency: {}", r.consistency);
    s
}

pub fn fuzz_text(f: &FuzzSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family {} n {} count {} seed {}", f.family, f.n, f.count, f.seed);
    for (label, c) in &f.worst_margins {
        let _ = writeln!(
            s,
            "  {:>4}  worst {:+.6e} (instance {})  satisfied {} violated {} inconclusive {}",
            label, c.min_margin, c.worst_index, c.satisfied, c.violated, c.inconclusive
        );
    }
    let _ = writeln!(s, "inconsistencies: {}", f.inconsistencies);
    s
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}
