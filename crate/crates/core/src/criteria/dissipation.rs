//! Dissipation operators. For a map M on the algebra,
//!
//!   D_M(a) = M(a²) + a M(1) a − M(a) a − a M(a)        (a self-adjoint)
//!   D_M(u) = M(1) + u† M(1) u − M(u†) u − u† M(u)      (u unitary)
//!
//! With M the generator these are the Evans–Hanche-Olsen inequalities; with
//! M a resolvent or a semigroup element they are the remaining dissipation
//! conditions. Each condition holds at a point iff the operator is PSD.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DEFAULT_TOL};
use crate::quadrature;
use crate::semigroup::{QuadratureConfig, SemigroupHandle};
use crate::superop::Superoperator;

pub fn map_dissipation(m: &Superoperator, a: &CMatrix) -> Result<CMatrix> {
    let one = CMatrix::identity(m.dim());
    let m1 = m.apply(&one)?;
    Ok(map_dissipation_with_unit(m, &m1, a))
}

/// Variant with M(1) precomputed, for probe loops.
pub(crate) fn map_dissipation_with_unit(m: &Superoperator, m1: &CMatrix, a: &CMatrix) -> CMatrix {
    let ma = m.apply_unchecked(a);
    let ma2 = m.apply_unchecked(&(a * a));
    ma2 + a * m1 * a - &ma * a - a * &ma
}

pub fn map_dissipation_unitary(m: &Superoperator, u: &CMatrix) -> Result<CMatrix> {
    let one = CMatrix::identity(m.dim());
    let m1 = m.apply(&one)?;
    Ok(map_dissipation_unitary_with_unit(m, &m1, u))
}

pub(crate) fn map_dissipation_unitary_with_unit(m: &Superoperator, m1: &CMatrix, u: &CMatrix) -> CMatrix {
    let ud = u.adjoint();
    let mu = m.apply_unchecked(u);
    let mud = m.apply_unchecked(&ud);
    m1 + &ud * m1 * u - mud * u - &ud * mu
}

fn require_hermitian(a: &CMatrix) -> Result<()> {
    let cls = a.classify(DEFAULT_TOL)?;
    if !cls.hermitian {
        return Err(Error::InvalidArgument(format!(
            "probe is not self-adjoint (deviation {:e})",
            cls.hermitian_margin
        )));
    }
    Ok(())
}

fn require_unitary(u: &CMatrix) -> Result<()> {
    let cls = u.classify(DEFAULT_TOL)?;
    if !cls.unitary {
        return Err(Error::InvalidArgument(format!("probe is not unitary (deviation {:e})", cls.unitary_margin)));
    }
    Ok(())
}

/// R(a²) + a R(1) a − R(a) a − a R(a) with R = (λ − L)⁻¹.
pub fn dissipation_resolvent(h: &SemigroupHandle, lambda: f64, a: &CMatrix) -> Result<CMatrix> {
    require_hermitian(a)?;
    map_dissipation(&h.resolvent(lambda)?, a)
}

/// R(1) + u† R(1) u − R(u†) u − u† R(u).
pub fn dissipation_resolvent_unitary(h: &SemigroupHandle, lambda: f64, u: &CMatrix) -> Result<CMatrix> {
    require_unitary(u)?;
    map_dissipation_unitary(&h.resolvent(lambda)?, u)
}

/// T_t(a²) + a T_t(1) a − T_t(a) a − a T_t(a).
pub fn dissipation_semigroup(h: &SemigroupHandle, t: f64, a: &CMatrix) -> Result<CMatrix> {
    require_hermitian(a)?;
    map_dissipation(&h.evolve(t)?, a)
}

/// T_t(1) + u† T_t(1) u − T_t(u†) u − u† T_t(u).
pub fn dissipation_semigroup_unitary(h: &SemigroupHandle, t: f64, u: &CMatrix) -> Result<CMatrix> {
    require_unitary(u)?;
    map_dissipation_unitary(&h.evolve(t)?, u)
}

/// L(a²) + a L(1) a − L(a) a − a L(a).
pub fn eho_dissipation(l: &Superoperator, a: &CMatrix) -> Result<CMatrix> {
    require_hermitian(a)?;
    map_dissipation(l, a)
}

/// L(1) + u† L(1) u − L(u†) u − u† L(u).
pub fn eho_dissipation_unitary(l: &Superoperator, u: &CMatrix) -> Result<CMatrix> {
    require_unitary(u)?;
    map_dissipation_unitary(l, u)
}

/// ∫₀^∞ e^{−λt} D_{T_t}(a) dt by the same truncated composite rule as
/// [`SemigroupHandle::laplace_resolvent`]. Since D is linear in the map, this
/// equals D_{(λ−L)⁻¹}(a).
pub fn laplace_dissipation(h: &SemigroupHandle, lambda: f64, a: &CMatrix, quad: &QuadratureConfig) -> Result<CMatrix> {
    require_hermitian(a)?;
    let decay = lambda - h.spectral_abscissa();
    if !(decay > 0.0) {
        return Err(Error::DecayFailure { lambda, abscissa: h.spectral_abscissa() });
    }
    let horizon = ((1.0 / (quad.truncation_eps * decay)).ln() / decay).max(1.0 / decay);
    let mut acc = CMatrix::zeros(h.n());
    for (t, w) in quadrature::composite(0.0, horizon, quad.panels, quad.order) {
        let d = map_dissipation(&h.evolve(t)?, a)?;
        acc += &d.scale_real(w * (-lambda * t).exp());
    }
    Ok(acc)
}
