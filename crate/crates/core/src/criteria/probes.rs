use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{random_hermitian, random_unitary};
use crate::linalg::CMatrix;
use crate::rng::derive_seed;

/// Self-adjoint and unitary probes for the dissipation conditions.
///
/// Structured members come first: the unit, the rank-one projectors onto
/// basis vectors and onto (e_i + e_j)/√2, and for unitaries the reflections
/// 1 − 2P through those projectors. Seeded random members follow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    pub selfadjoint: Vec<CMatrix>,
    pub unitaries: Vec<CMatrix>,
    pub seed: u64,
}

impl ProbeSet {
    pub fn generate(n: usize, n_selfadjoint: usize, n_unitary: usize, seed: u64) -> Self {
        let one = CMatrix::identity(n);
        let projectors = structured_projectors(n);
        let mut selfadjoint = vec![one.clone()];
        selfadjoint.extend(projectors.iter().cloned());
        selfadjoint
            .extend((0..n_selfadjoint).map(|i| random_hermitian(n, derive_seed(seed, &format!("probe-a/{i}")), 1.0)));

        let mut unitaries = vec![one.clone()];
        unitaries.extend(projectors.iter().map(|p| &one - p.scale_real(2.0)));
        unitaries.extend((0..n_unitary).map(|i| random_unitary(n, derive_seed(seed, &format!("probe-u/{i}")))));
        ProbeSet { selfadjoint, unitaries, seed }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for (k, a) in self.selfadjoint.iter().enumerate() {
            if !a.classify(tol)?.hermitian {
                return Err(Error::InvalidArgument(format!("selfadjoint probe {k} is not Hermitian")));
            }
        }
        for (k, u) in self.unitaries.iter().enumerate() {
            if !u.classify(tol)?.unitary {
                return Err(Error::InvalidArgument(format!("unitary probe {k} is not unitary")));
            }
        }
        Ok(())
    }
}

fn structured_projectors(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(CMatrix::unit(n, i, i));
    }
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = DVector::zeros(n);
            v[i] = h;
            v[j] = h;
            out.push(CMatrix::projector(&v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_pass_their_class() {
        for n in 1..=4 {
            let p = ProbeSet::generate(n, 50, 50, 3);
            p.validate(1e-9).unwrap();
            let structured = 1 + n + n * (n - 1) / 2;
            assert_eq!(p.selfadjoint.len(), 50 + structured);
            assert_eq!(p.unitaries.len(), 50 + structured);
            assert_eq!(p.selfadjoint[0], CMatrix::identity(n));
        }
    }

    #[test]
    fn probes_are_seed_deterministic() {
        assert_eq!(ProbeSet::generate(3, 5, 5, 1), ProbeSet::generate(3, 5, 5, 1));
        assert_ne!(ProbeSet::generate(3, 5, 5, 1), ProbeSet::generate(3, 5, 5, 2));
    }
}
