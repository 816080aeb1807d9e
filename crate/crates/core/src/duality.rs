//! Schrödinger-picture evolution on the trace pairing η(a) = Tr(ρ a), and
//! the trace-preservation criterion for the predual semigroup.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::superop::Superoperator;

/// Hermitian, PSD, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const PSD_TOL: f64 = 1e-9;
    pub const TRACE_TOL: f64 = 1e-10;

    pub fn new(rho: CMatrix) -> Result<Self> {
        let cls = rho.classify(Self::PSD_TOL)?;
        if !cls.hermitian {
            return Err(Error::InvalidArgument(format!(
                "state is not Hermitian (deviation {:e})",
                cls.hermitian_margin
            )));
        }
        if !cls.psd {
            return Err(Error::InvalidArgument(format!("state is not PSD (min eigenvalue {:e})", cls.min_eig)));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidArgument(format!("state trace is {tr}, expected 1")));
        }
        Ok(DensityMatrix(rho))
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_cmatrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = CMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Generator of the predual semigroup: the Hilbert–Schmidt adjoint L*.
pub fn predual_generator(l: &Superoperator) -> Superoperator {
    l.hs_adjoint()
}

/// ρ_t = e^{t L*}(ρ).
pub fn predual_evolve(l: &Superoperator, t: f64, rho: &DensityMatrix) -> Result<CMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    predual_generator(l).exp_scaled(t).apply(rho.as_cmatrix())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatePositivity {
    /// Smallest eigenvalue over all evolved states.
    pub min_eig: f64,
    pub violated: bool,
    pub states_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KossakowskiReport {
    /// max over probes and times of |Tr ρ_t − Tr ρ|.
    pub trace_preserving_margin: f64,
    /// The same, each term divided by max(1, entry size of e^{tL*}); the
    /// equivalence test uses this so that fast-growing flows are judged at
    /// their own rounding level.
    pub relative_trace_margin: f64,
    /// ‖L(1)‖_max; L*(η)(1) = η(L(1)), so it vanishes for all η iff L(1) = 0.
    pub l1_zero_margin: f64,
    pub state_positivity: StatePositivity,
    pub equivalence_consistent: bool,
}

pub fn kossakowski_check(
    l: &Superoperator,
    probes: &[DensityMatrix],
    t_grid: &[f64],
    tol: f64,
) -> Result<KossakowskiReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = l.dim();
    if let Some(p) = probes.iter().find(|p| p.dim() != n) {
        return Err(Error::dim(n, p.dim()));
    }
    let dual = predual_generator(l);
    let mut trace_margin: f64 = 0.0;
    let mut relative: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut count = 0;
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let flow = dual.exp_scaled(t);
        let size = crate::linalg::max_abs(flow.rep()).max(1.0);
        for rho in probes {
            let rt = flow.apply(rho.as_cmatrix())?;
            let gap = (rt.trace() - rho.as_cmatrix().trace()).norm();
            trace_margin = trace_margin.max(gap);
            relative = relative.max(gap / size);
            min_eig = min_eig.min(rt.min_eig());
            count += 1;
        }
    }
    let l1 = l.apply(&CMatrix::identity(n))?.max_norm();
    Ok(KossakowskiReport {
        trace_preserving_margin: trace_margin,
        relative_trace_margin: relative,
        l1_zero_margin: l1,
        state_positivity: StatePositivity { min_eig, violated: min_eig < -tol, states_checked: count },
        equivalence_consistent: (relative <= tol) == (l1 <= tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{self, pauli_x};
    use crate::semigroup::{GeneratorSpec, SemigroupHandle};
    use num_complex::Complex64 as C64;

    fn pairing_gap(l: &Superoperator, seed: u64) -> f64 {
        let n = l.dim();
        let dual = predual_generator(l);
        let rho = crate::instances::random_unitary(n, seed) + instances::random_hermitian(n, seed + 100, 1.0);
        let a = instances::random_hermitian(n, seed + 200, 1.0).scale(C64::new(0.3, 0.7));
        let lhs = (dual.apply(&rho).unwrap().adjoint() * &a).trace();
        let rhs = (rho.adjoint() * l.apply(&a).unwrap()).trace();
        (lhs - rhs).norm()
    }

    #[test]
    fn predual_generator_examples() {
        let sz = instances::pauli_z();
        let ham = GeneratorSpec::hamiltonian(sz.clone()).unwrap().superoperator();
        let dual = predual_generator(&ham);
        let expected = Superoperator::from_map(2, |r| sz.commutator(r).scale(C64::new(0.0, -1.0)));
        assert!(dual.max_dist(&expected) < 1e-15);
        for seed in 0..10 {
            assert!(pairing_gap(&ham, seed) < 1e-10);
        }

        let deph = instances::dephasing(2).superoperator();
        assert_eq!(predual_generator(&deph), deph);
        assert_eq!(predual_generator(&Superoperator::zero(3)), Superoperator::zero(3));
    }

    #[test]
    fn predual_of_lindblad_is_schrodinger_form() {
        for seed in 0..50 {
            let spec = instances::random_lindblad(3, 2, seed, 4.0);
            let (h, vs) = spec.lindblad_data().unwrap();
            let i = C64::new(0.0, 1.0);
            let schrodinger = Superoperator::from_map(3, |r| {
                let mut out = h.commutator(r).scale(-i);
                for v in vs {
                    let k = v.adjoint() * v;
                    out += &(v * r * v.adjoint() - (&k * r + r * &k).scale_real(0.5));
                }
                out
            });
            let l = spec.superoperator();
            assert!(predual_generator(&l).max_dist(&schrodinger) < 1e-12);
            assert!(pairing_gap(&l, seed) < 1e-10);
        }
    }

    #[test]
    fn predual_evolve_examples() {
        let rho = instances::random_density(2, 3);
        let same = predual_evolve(&Superoperator::zero(2), 2.0, &rho).unwrap();
        assert!(same.max_dist(rho.as_cmatrix()) < 1e-15);

        let plus = DensityMatrix::new((CMatrix::identity(2) + pauli_x()).scale_real(0.5)).unwrap();
        let deph = instances::dephasing(2).superoperator();
        for t in [0.1, 1.0, 2.5] {
            let rt = predual_evolve(&deph, t, &plus).unwrap();
            let expected = (CMatrix::identity(2) + pauli_x().scale_real((-2.0 * t).exp())).scale_real(0.5);
            assert!(rt.max_dist(&expected) < 1e-14);
        }

        let h = instances::random_hermitian(3, 5, 1.0);
        let ham = GeneratorSpec::hamiltonian(h.clone()).unwrap().superoperator();
        let rho = instances::random_density(3, 6);
        let purity = |m: &CMatrix| (m * m).trace().re;
        let t = 1.3;
        let rt = predual_evolve(&ham, t, &rho).unwrap();
        let u = h.scale(C64::new(0.0, -t)).exp();
        assert!(rt.max_dist(&(&u * rho.as_cmatrix() * u.adjoint())) < 1e-12);
        assert!((purity(&rt) - purity(rho.as_cmatrix())).abs() < 1e-12);
    }

    #[test]
    fn predual_pairs_with_heisenberg_evolution() {
        let spec = instances::random_lindblad(3, 2, 8, 4.0);
        let l = spec.superoperator();
        let h = SemigroupHandle::from_spec(&spec);
        for seed in 0..10 {
            let rho = instances::random_density(3, seed);
            let a = instances::random_hermitian(3, seed + 50, 1.0);
            let t = 0.25 * seed as f64;
            let lhs = (predual_evolve(&l, t, &rho).unwrap().adjoint() * &a).trace();
            let rhs = (rho.as_cmatrix().adjoint() * h.evolve(t).unwrap().apply(&a).unwrap()).trace();
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn kossakowski_examples() {
        let probes: Vec<_> = (0..10).map(|s| instances::random_density(2, s)).collect();
        let grid = [0.5, 1.0, 2.0];

        let lind = instances::random_lindblad(2, 2, 1, 4.0).superoperator();
        let rep = kossakowski_check(&lind, &probes, &grid, 1e-9).unwrap();
        assert!(rep.trace_preserving_margin <= 1e-10);
        assert!(rep.l1_zero_margin <= 1e-12);
        assert!(rep.state_positivity.min_eig >= -1e-10 && !rep.state_positivity.violated);
        assert!(rep.equivalence_consistent);

        let dil = Superoperator::identity(2);
        let rep = kossakowski_check(&dil, &probes, &grid, 1e-9).unwrap();
        assert!((rep.trace_preserving_margin - ((2f64).exp() - 1.0)).abs() < 1e-9);
        assert_eq!(rep.l1_zero_margin, 1.0);
        assert!(rep.equivalence_consistent);

        let ham = GeneratorSpec::hamiltonian(instances::random_hermitian(2, 2, 1.0)).unwrap().superoperator();
        let rep = kossakowski_check(&ham, &probes, &grid, 1e-9).unwrap();
        assert!(rep.trace_preserving_margin < 1e-13 && rep.state_positivity.min_eig > -1e-12);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(CMatrix::diag_real(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(CMatrix::unit(2, 0, 1) + CMatrix::diag_real(&[0.5, 0.5])).is_err());
        let ok = serde_json::from_str::<DensityMatrix>(r#"{"n":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#);
        assert!(ok.is_ok());
    }
}
