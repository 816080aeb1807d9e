//! Contraction semigroups: L(1) = 0 and L symmetric against positivity and
//! unitality of T_t, and positivity of unital contraction semigroups.

use serde::Serialize;

use super::{relative_symmetry, RunConfig};
use crate::error::{Error, Result};
use crate::instances::random_density;
use crate::linalg::{max_abs, CMatrix};
use crate::rng::derive_seed;
use crate::semigroup::SemigroupHandle;
use crate::superop::{ConeStatus, ConeVerdict, ContractionStatus, ContractionVerdict, Superoperator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEquivalenceReport {
    /// ‖L(1)‖_max.
    pub unit_in_domain_l1_zero: f64,
    /// Relative symmetry margin of L.
    pub symmetric: f64,
    /// Worst contraction verdict over the time grid.
    pub contraction: ContractionVerdict,
    /// Positivity of T_t merged over the time grid.
    pub positive: ConeVerdict,
    /// max_t ‖T_t(1) − 1‖_max over max(1, entry size of T_t).
    pub unital: f64,
    /// Both sides of the equivalence agree.
    pub direction_consistency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitalContractionReport {
    pub positivity: ConeVerdict,
    /// Extremes of spectrum(T_t(a)) over PSD a with ‖a‖ = 1 and the time
    /// grid; both must lie in [−tol, 2 + tol].
    pub spectral_min: f64,
    pub spectral_max: f64,
    pub spectral_samples: usize,
    pub spectral_ok: bool,
}

fn scale_of(l: &Superoperator) -> f64 {
    max_abs(l.rep()).max(1.0)
}

/// ‖T(1) − 1‖_max relative to the entry size of T.
fn unital_gap(tt: &Superoperator, one: &CMatrix) -> Result<f64> {
    Ok(tt.apply(one)?.max_dist(one) / scale_of(tt))
}

/// Contraction verdicts of T_t over the grid, worst first by norm bound.
fn contraction_over(h: &SemigroupHandle, cfg: &RunConfig) -> Result<ContractionVerdict> {
    let mut worst: Option<ContractionVerdict> = None;
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let budget = cfg.budget.with_seed(derive_seed(cfg.seed, &format!("contraction/{k}")));
        let v = h.evolve(t)?.contraction_check(&budget, cfg.hypothesis_tol)?;
        worst = Some(match worst {
            None => v,
            Some(w) => merge_contraction(w, v),
        });
    }
    worst.ok_or_else(|| Error::InvalidArgument("empty time grid".into()))
}

fn merge_contraction(a: ContractionVerdict, b: ContractionVerdict) -> ContractionVerdict {
    use ContractionStatus::*;
    let status = match (a.status, b.status) {
        (Violated, _) | (_, Violated) => Violated,
        (CertifiedContraction, CertifiedContraction) => CertifiedContraction,
        _ => NoViolationFound,
    };
    ContractionVerdict { status, norm_lower_bound: a.norm_lower_bound.max(b.norm_lower_bound) }
}

fn positivity_over(h: &SemigroupHandle, cfg: &RunConfig) -> Result<ConeVerdict> {
    let mut merged: Option<ConeVerdict> = None;
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let budget = cfg.budget.with_seed(derive_seed(cfg.seed, &format!("positive/{k}")));
        let v = h.evolve(t)?.positivity_check(&budget, cfg.tol)?;
        merged = Some(match merged {
            None => v,
            Some(m) => merge_cone(m, v),
        });
    }
    merged.ok_or_else(|| Error::InvalidArgument("empty time grid".into()))
}

fn merge_cone(a: ConeVerdict, b: ConeVerdict) -> ConeVerdict {
    use ConeStatus::*;
    let status = match (a.status, b.status) {
        (Violated, _) | (_, Violated) => Violated,
        (CertifiedPositive, CertifiedPositive) => CertifiedPositive,
        _ => NoViolationFound,
    };
    let samples_used = a.samples_used + b.samples_used;
    let (worse, other) = if b.margin < a.margin { (b, a) } else { (a, b) };
    let witness = worse.witness.or(other.witness);
    ConeVerdict { status, witness, margin: worse.margin, samples_used }
}

/// Both sides of: L(1) = 0 and L symmetric ⟺ T_t positive and unital, for a
/// semigroup of contractions.
pub fn contraction_equivalence_check(h: &SemigroupHandle, cfg: &RunConfig) -> Result<ContractionEquivalenceReport> {
    cfg.validate()?;
    let contraction = contraction_over(h, cfg)?;
    if contraction.status == ContractionStatus::Violated {
        return Err(Error::Hypothesis {
            what: "semigroup of contractions".into(),
            margin: contraction.norm_lower_bound - 1.0,
        });
    }
    let l = h.generator();
    let n = h.n();
    let scale = scale_of(l);
    let one = CMatrix::identity(n);
    let l1 = l.apply(&one)?.max_norm();
    let symmetric = relative_symmetry(l, cfg.hypothesis_tol)?;

    let mut unital: f64 = 0.0;
    for &t in &cfg.t_grid {
        unital = unital.max(unital_gap(&h.evolve(t)?, &one)?);
    }
    let positive = positivity_over(h, cfg)?;

    let side_tol = cfg.hypothesis_tol * scale;
    let left = l1 <= side_tol && symmetric <= cfg.hypothesis_tol;
    let right = !positive.is_violated() && unital <= cfg.hypothesis_tol;
    Ok(ContractionEquivalenceReport {
        unit_in_domain_l1_zero: l1,
        symmetric,
        contraction,
        positive,
        unital,
        direction_consistency: left == right,
    })
}

/// Positivity of a unital contraction semigroup, with the spectral argument
/// replayed directly: for PSD a of norm one, σ(T_t(2a)) ⊆ [0, 2].
pub fn unital_contraction_check(h: &SemigroupHandle, cfg: &RunConfig) -> Result<UnitalContractionReport> {
    cfg.validate()?;
    let n = h.n();
    let one = CMatrix::identity(n);
    let contraction = contraction_over(h, cfg)?;
    if contraction.status == ContractionStatus::Violated {
        return Err(Error::Hypothesis {
            what: "semigroup of contractions".into(),
            margin: contraction.norm_lower_bound - 1.0,
        });
    }
    for &t in &cfg.t_grid {
        let gap = unital_gap(&h.evolve(t)?, &one)?;
        if gap > cfg.hypothesis_tol {
            return Err(Error::Hypothesis { what: format!("unital semigroup (t = {t})"), margin: gap });
        }
    }
    let positivity = positivity_over(h, cfg)?;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut samples = 0;
    let probes: Vec<CMatrix> = (0..cfg.n_selfadjoint.max(1))
        .map(|i| {
            let rho = random_density(n, derive_seed(cfg.seed, &format!("spectral/{i}"))).into_cmatrix();
            let s = rho.spectral_norm();
            rho.scale_real(1.0 / s)
        })
        .collect();
    for &t in &cfg.t_grid {
        let tt = h.evolve(t)?;
        for a in &probes {
            let ta = tt.apply(a)?.scale_real(2.0);
            for z in ta.spectrum().eigenvalues {
                lo = lo.min(z.re);
                hi = hi.max(z.re);
            }
            samples += 1;
        }
    }
    Ok(UnitalContractionReport {
        positivity,
        spectral_min: lo,
        spectral_max: hi,
        spectral_samples: samples,
        spectral_ok: lo >= -cfg.tol && hi <= 2.0 + cfg.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::semigroup::GeneratorSpec;

    fn quick() -> RunConfig {
        RunConfig { n_selfadjoint: 10, n_unitary: 10, ..RunConfig::default() }
    }

    #[test]
    fn lindblad_both_sides_hold() {
        for seed in 0..3 {
            let h = SemigroupHandle::from_spec(&instances::random_lindblad(3, 2, seed, 4.0));
            let r = contraction_equivalence_check(&h, &quick()).unwrap();
            assert!(r.unit_in_domain_l1_zero <= 1e-12);
            assert!(r.symmetric <= 1e-10);
            assert!(r.unital <= 1e-10);
            assert_eq!(r.positive.status, ConeStatus::CertifiedPositive);
            assert!(r.direction_consistency);
        }
    }

    #[test]
    fn automorphism_group() {
        let h = SemigroupHandle::from_spec(&GeneratorSpec::hamiltonian(instances::pauli_z()).unwrap());
        let r = contraction_equivalence_check(&h, &quick()).unwrap();
        assert!(r.direction_consistency);
        assert_eq!(r.contraction.status, ContractionStatus::CertifiedContraction);
        let c = unital_contraction_check(&h, &quick()).unwrap();
        assert!(!c.positivity.is_violated());
        assert!(c.spectral_ok);
        // Unitary conjugation preserves spectra: T_t(2a) has spectrum in [0, 2].
        assert!(c.spectral_min >= -1e-12 && c.spectral_max <= 2.0 + 1e-12);
    }

    #[test]
    fn transpose_mixed_is_positive_without_cp() {
        let spec = instances::transpose_mixed(&instances::random_lindblad(2, 2, 1, 1.0), 1.0).unwrap();
        let h = SemigroupHandle::from_spec(&spec);
        let r = contraction_equivalence_check(&h, &quick()).unwrap();
        assert!(r.direction_consistency);
        assert_eq!(r.positive.status, ConeStatus::NoViolationFound);
        assert!(h.evolve(1.0).unwrap().cp_check(1e-9).unwrap().min_choi_eig < -1e-3);
    }

    #[test]
    fn flip_fails_contraction() {
        let h = SemigroupHandle::from_spec(&instances::flip_nonpositive());
        let err = unital_contraction_check(&h, &quick()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { ref what, .. } if what.contains("contraction")), "{err}");
        assert!(matches!(contraction_equivalence_check(&h, &quick()), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn random_lindblad_unital_contraction() {
        let h = SemigroupHandle::from_spec(&instances::random_lindblad(3, 2, 5, 4.0));
        let c = unital_contraction_check(&h, &quick()).unwrap();
        assert!(!c.positivity.is_violated());
        assert!(c.spectral_ok);
    }

    #[test]
    fn non_unital_is_rejected() {
        let h = SemigroupHandle::new(Superoperator::identity(2).scale_real(-1.0));
        let err = unital_contraction_check(&h, &quick()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { ref what, .. } if what.contains("unital")), "{err}");
    }
}
