//! Evaluation of the equivalent positivity conditions for a semigroup
//! T_t = e^{tL} of symmetric maps:
//!
//! 1. T_t positive for every t in the time grid.
//! 2. (λ − L)⁻¹ positive for every λ in the "large λ" grid.
//! 3. Resolvent dissipation D_R(a) ⪰ 0 over self-adjoint probes.
//! 4. Resolvent dissipation D_R(u) ⪰ 0 over unitary probes.
//! 5. Semigroup dissipation D_{T_t}(a) ⪰ 0.
//! 6. Semigroup dissipation D_{T_t}(u) ⪰ 0.
//! 7. e^{s(λ − L)⁻¹} positive over an (s, λ) grid.
//!
//! plus the generator-level inequalities EHO1 (self-adjoint) and EHO2
//! (unitary). Every check reports a signed margin; see [`Verdict`].

mod contraction;
pub mod dissipation;
mod probes;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_margin, CMatrix};
use crate::rng::derive_seed;
use crate::semigroup::{QuadratureConfig, SemigroupHandle};
use crate::superop::{ser_complex_vec, ConeVerdict, SearchBudget, Superoperator};

pub use contraction::{
    contraction_equivalence_check, unital_contraction_check, ContractionEquivalenceReport, UnitalContractionReport,
};
pub use dissipation::*;
pub use probes::ProbeSet;

/// Tolerances, probe counts and grids shared by every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Margins at or above −tol count as satisfied.
    pub tol: f64,
    /// Margins below −decisive_tol count as violated; the band in between is
    /// inconclusive.
    pub decisive_tol: f64,
    /// Tolerance for hypothesis checks (symmetry, unitality, contractivity),
    /// relative to max(1, entry size).
    pub hypothesis_tol: f64,
    pub n_selfadjoint: usize,
    pub n_unitary: usize,
    pub seed: u64,
    /// Explicit λ grid; `None` selects {1, 10, 100} · max(1, abscissa + 1).
    pub lambda_grid: Option<Vec<f64>>,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub budget: SearchBudget,
    pub quadrature: QuadratureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-9,
            decisive_tol: 1e-6,
            hypothesis_tol: 1e-9,
            n_selfadjoint: 50,
            n_unitary: 50,
            seed: 0,
            lambda_grid: None,
            t_grid: vec![0.1, 1.0, 10.0],
            s_grid: vec![0.5, 1.0, 2.0],
            budget: SearchBudget::default(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("tol", self.tol), ("decisive_tol", self.decisive_tol), ("hypothesis_tol", self.hypothesis_tol)]
        {
            if !(v > 0.0) {
                return Err(Error::schema(name, "tolerances must be positive"));
            }
        }
        if self.decisive_tol < self.tol {
            return Err(Error::schema("decisive_tol", "must be at least tol"));
        }
        if self.t_grid.is_empty() || self.s_grid.is_empty() {
            return Err(Error::schema("t_grid", "grids must be non-empty"));
        }
        if self.t_grid.iter().chain(&self.s_grid).any(|t| !(*t >= 0.0)) {
            return Err(Error::schema("t_grid", "times must be non-negative"));
        }
        if let Some(g) = &self.lambda_grid {
            if g.is_empty() || g.iter().any(|l| !(*l > 0.0)) {
                return Err(Error::schema("lambda_grid", "must be a non-empty list of positive values"));
            }
        }
        if self.budget.n_random == 0 || self.budget.n_descent == 0 {
            return Err(Error::schema("budget", "sample counts must be positive"));
        }
        Ok(())
    }

    pub fn lambdas(&self, h: &SemigroupHandle) -> Vec<f64> {
        self.lambda_grid.clone().unwrap_or_else(|| h.lambda_grid())
    }

    pub fn probes(&self, n: usize) -> ProbeSet {
        ProbeSet::generate(n, self.n_selfadjoint, self.n_unitary, derive_seed(self.seed, "probes"))
    }

    fn budget_for(&self, tag: &str, k: usize) -> SearchBudget {
        self.budget.with_seed(derive_seed(self.seed, &format!("{tag}/{k}")))
    }

    pub fn verdict(&self, margin: f64) -> Verdict {
        if margin >= -self.tol {
            Verdict::Satisfied
        } else if margin < -self.decisive_tol {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    Eho1,
    Eho2,
}

impl ConditionId {
    pub const ALL: [ConditionId; 9] = [
        ConditionId::C1,
        ConditionId::C2,
        ConditionId::C3,
        ConditionId::C4,
        ConditionId::C5,
        ConditionId::C6,
        ConditionId::C7,
        ConditionId::Eho1,
        ConditionId::Eho2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ConditionId::C1 => "1",
            ConditionId::C2 => "2",
            ConditionId::C3 => "3",
            ConditionId::C4 => "4",
            ConditionId::C5 => "5",
            ConditionId::C6 => "6",
            ConditionId::C7 => "7",
            ConditionId::Eho1 => "EHO1",
            ConditionId::Eho2 => "EHO2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown { kind: "condition", name: s.to_string() })
    }
}

impl Serialize for ConditionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Which probe produced the worst margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeRef {
    Selfadjoint {
        index: usize,
    },
    Unitary {
        index: usize,
    },
    /// Rank-one ray v v† from a positivity search.
    Vector {
        #[serde(serialize_with = "ser_complex_vec")]
        v: Option<Vec<num_complex::Complex64>>,
    },
}

/// A grid coordinate: λ for resolvent conditions, t for semigroup
/// conditions, (s, λ) for condition 7; empty for the generator-level ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl GridPoint {
    const NONE: GridPoint = GridPoint { lambda: None, t: None, s: None };

    fn lambda(l: f64) -> Self {
        GridPoint { lambda: Some(l), ..Self::NONE }
    }

    fn time(t: f64) -> Self {
        GridPoint { t: Some(t), ..Self::NONE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointMargin {
    pub point: GridPoint,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstProbe {
    pub point: GridPoint,
    pub probe: ProbeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub id: ConditionId,
    pub grid: Vec<GridPoint>,
    pub per_point: Vec<PointMargin>,
    pub min_margin: f64,
    pub worst_probe: WorstProbe,
    pub verdict: Verdict,
}

/// The worst probe of a condition, re-evaluated independently of the sweep.
pub fn reproduce_margin(h: &SemigroupHandle, id: ConditionId, probes: &ProbeSet, worst: &WorstProbe) -> Result<f64> {
    let map = condition_map(h, id, &worst.point)?;
    Ok(match &worst.probe {
        ProbeRef::Selfadjoint { index } => psd_margin(map_dissipation(&map, &probes.selfadjoint[*index])?.as_mat()),
        ProbeRef::Unitary { index } => psd_margin(map_dissipation_unitary(&map, &probes.unitaries[*index])?.as_mat()),
        ProbeRef::Vector { v } => {
            let v = v.as_ref().ok_or_else(|| Error::InvalidArgument("no witness vector".into()))?;
            map.cone_margin(&nalgebra::DVector::from_column_slice(v))
        }
    })
}

/// The map whose positivity or dissipation a condition inspects at a point.
fn condition_map(h: &SemigroupHandle, id: ConditionId, p: &GridPoint) -> Result<Superoperator> {
    let need = |x: Option<f64>, what: &str| x.ok_or_else(|| Error::InvalidArgument(format!("grid point lacks {what}")));
    match id {
        ConditionId::C1 | ConditionId::C5 | ConditionId::C6 => h.evolve(need(p.t, "t")?),
        ConditionId::C2 | ConditionId::C3 | ConditionId::C4 => h.resolvent(need(p.lambda, "lambda")?),
        ConditionId::C7 => Ok(h.resolvent(need(p.lambda, "lambda")?)?.exp_scaled(need(p.s, "s")?)),
        ConditionId::Eho1 | ConditionId::Eho2 => Ok(h.generator().clone()),
    }
}

pub fn check_condition(
    h: &SemigroupHandle,
    id: ConditionId,
    probes: &ProbeSet,
    cfg: &RunConfig,
) -> Result<ConditionResult> {
    cfg.validate()?;
    if probes.selfadjoint.iter().chain(&probes.unitaries).any(|p| p.dim() != h.n()) {
        return Err(Error::dim(h.n(), "probe of another dimension"));
    }
    let lambdas = cfg.lambdas(h);
    let grid: Vec<GridPoint> = match id {
        ConditionId::C1 | ConditionId::C5 | ConditionId::C6 => cfg.t_grid.iter().map(|&t| GridPoint::time(t)).collect(),
        ConditionId::C2 | ConditionId::C3 | ConditionId::C4 => lambdas.iter().map(|&l| GridPoint::lambda(l)).collect(),
        ConditionId::C7 => cfg
            .s_grid
            .iter()
            .flat_map(|&s| lambdas.iter().map(move |&l| GridPoint { lambda: Some(l), t: None, s: Some(s) }))
            .collect(),
        ConditionId::Eho1 | ConditionId::Eho2 => vec![GridPoint::NONE],
    };

    let mut per_point = Vec::with_capacity(grid.len());
    let mut worst: Option<(f64, WorstProbe)> = None;
    for (k, point) in grid.iter().enumerate() {
        let map = condition_map(h, id, point)?;
        let (margin, probe) = match id {
            ConditionId::C1 | ConditionId::C2 | ConditionId::C7 => {
                let cone = map.positivity_check(&cfg.budget_for(id.label(), k), cfg.tol)?;
                (cone.margin, cone_probe(&cone))
            }
            ConditionId::C3 | ConditionId::C5 | ConditionId::Eho1 => {
                let m1 = map.apply(&CMatrix::identity(h.n()))?;
                worst_over(&probes.selfadjoint, |a| psd_margin(map_dissipation_with_unit(&map, &m1, a).as_mat()))
                    .map(|(m, i)| (m, ProbeRef::Selfadjoint { index: i }))
                    .unwrap_or((0.0, ProbeRef::Selfadjoint { index: 0 }))
            }
            ConditionId::C4 | ConditionId::C6 | ConditionId::Eho2 => {
                let m1 = map.apply(&CMatrix::identity(h.n()))?;
                worst_over(&probes.unitaries, |u| psd_margin(map_dissipation_unitary_with_unit(&map, &m1, u).as_mat()))
                    .map(|(m, i)| (m, ProbeRef::Unitary { index: i }))
                    .unwrap_or((0.0, ProbeRef::Unitary { index: 0 }))
            }
        };
        per_point.push(PointMargin { point: *point, margin });
        if worst.as_ref().is_none_or(|(w, _)| margin < *w) {
            worst = Some((margin, WorstProbe { point: *point, probe }));
        }
    }
    let (min_margin, worst_probe) = worst.ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok(ConditionResult { id, grid, per_point, min_margin, worst_probe, verdict: cfg.verdict(min_margin) })
}

fn cone_probe(cone: &ConeVerdict) -> ProbeRef {
    ProbeRef::Vector { v: cone.witness.clone() }
}

fn worst_over(items: &[CMatrix], f: impl Fn(&CMatrix) -> f64) -> Option<(f64, usize)> {
    items.iter().enumerate().map(|(i, x)| (f(x), i)).min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub decisive_tol: f64,
    pub hypothesis_tol: f64,
}

impl From<&RunConfig> for Tolerances {
    fn from(c: &RunConfig) -> Self {
        Tolerances { tol: c.tol, decisive_tol: c.decisive_tol, hypothesis_tol: c.hypothesis_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub conditions: Vec<ConditionResult>,
    /// False iff some condition is satisfied while another is violated.
    pub consistency: bool,
    pub symmetry_margin: f64,
    pub lambda_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tolerances: Tolerances,
}

impl EquivalenceReport {
    pub fn condition(&self, id: ConditionId) -> &ConditionResult {
        self.conditions.iter().find(|c| c.id == id).expect("every condition is evaluated")
    }
}

/// Relative symmetry margin of a map: ‖S(x†) − S(x)†‖ over max(1, ‖S‖_max).
pub(crate) fn relative_symmetry(s: &Superoperator, tol: f64) -> Result<f64> {
    let scale = crate::linalg::max_abs(s.rep()).max(1.0);
    Ok(s.is_symmetric_map(tol)?.margin / scale)
}

/// All conditions for one generator, with the symmetry hypothesis checked on
/// L and on T_t over the time grid.
pub fn equivalence_report(h: &SemigroupHandle, cfg: &RunConfig) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let mut symmetry = relative_symmetry(h.generator(), cfg.hypothesis_tol)?;
    for &t in &cfg.t_grid {
        symmetry = symmetry.max(relative_symmetry(&h.evolve(t)?, cfg.hypothesis_tol)?);
    }
    if symmetry > cfg.hypothesis_tol {
        return Err(Error::Hypothesis { what: "semigroup of symmetric maps".into(), margin: symmetry });
    }
    let probes = cfg.probes(h.n());
    let conditions =
        ConditionId::ALL.par_iter().map(|&id| check_condition(h, id, &probes, cfg)).collect::<Result<Vec<_>>>()?;
    let any = |v: Verdict| conditions.iter().any(|c| c.verdict == v);
    let consistency = !(any(Verdict::Satisfied) && any(Verdict::Violated));
    Ok(EquivalenceReport {
        conditions,
        consistency,
        symmetry_margin: symmetry,
        lambda_grid: cfg.lambdas(h),
        t_grid: cfg.t_grid.clone(),
        tolerances: cfg.into(),
    })
}
