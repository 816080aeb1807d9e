//! Norm-continuous semigroups T_t = e^{tL} on M(n, C), their resolvents, and
//! the three routes back to T_t used in the positivity arguments: the
//! Laplace integral, the Euler product and the Yosida approximation.
//!
//! In finite dimension every generator is bounded and its domain is the
//! whole algebra, so "1 ∈ D(L)" and "x* ∈ D(L)" hold trivially; what remains
//! of the domain bookkeeping is checked when a [`GeneratorSpec`] is built.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Mat};
use crate::quadrature;
use crate::superop::Superoperator;

/// Minimum distance between λ and the spectral abscissa, relative to
/// max(1, |abscissa|).
pub const RESOLVENT_GAP: f64 = 1e-9;

/// Declarative description of a generator.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Explicit(Superoperator),
    /// L(x) = i[H, x].
    Hamiltonian(CMatrix),
    /// L(x) = i[H, x] + Σ_k (V_k† x V_k − ½{V_k† V_k, x}).
    Lindblad {
        h: CMatrix,
        vs: Vec<CMatrix>,
    },
}

impl GeneratorSpec {
    pub fn explicit(superop: Superoperator) -> Self {
        GeneratorSpec::Explicit(superop)
    }

    pub fn hamiltonian(h: CMatrix) -> Result<Self> {
        let spec = GeneratorSpec::Hamiltonian(h);
        spec.validate()?;
        Ok(spec)
    }

    pub fn lindblad(h: CMatrix, vs: Vec<CMatrix>) -> Result<Self> {
        let spec = GeneratorSpec::Lindblad { h, vs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        match self {
            GeneratorSpec::Explicit(s) => s.dim(),
            GeneratorSpec::Hamiltonian(h) => h.dim(),
            GeneratorSpec::Lindblad { h, .. } => h.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Explicit(_) => "explicit",
            GeneratorSpec::Hamiltonian(_) => "hamiltonian",
            GeneratorSpec::Lindblad { .. } => "lindblad",
        }
    }

    /// Hamiltonian and jump operators, for the structured kinds.
    pub fn lindblad_data(&self) -> Option<(&CMatrix, &[CMatrix])> {
        match self {
            GeneratorSpec::Explicit(_) => None,
            GeneratorSpec::Hamiltonian(h) => Some((h, &[])),
            GeneratorSpec::Lindblad { h, vs } => Some((h, vs)),
        }
    }

    pub fn superoperator(&self) -> Superoperator {
        match self {
            GeneratorSpec::Explicit(s) => s.clone(),
            GeneratorSpec::Hamiltonian(h) => lindblad_superop(h, &[]),
            GeneratorSpec::Lindblad { h, vs } => lindblad_superop(h, vs),
        }
    }

    fn validate(&self) -> Result<()> {
        let Some((h, vs)) = self.lindblad_data() else {
            return Ok(());
        };
        let n = h.dim();
        if let Some(v) = vs.iter().find(|v| v.dim() != n) {
            return Err(Error::dim(n, v.dim()));
        }
        let herm = h.max_dist(&h.adjoint());
        if herm > 1e-10 * h.max_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!("H is not Hermitian (deviation {herm:e})")));
        }
        let l = self.superoperator();
        let scale = linalg::max_abs(l.rep()).max(1.0);
        let unit_image = l.apply(&CMatrix::identity(n))?.max_norm();
        if unit_image > 1e-12 * scale {
            return Err(Error::Inconsistent {
                what: "L(1) = 0 for a Lindblad generator".into(),
                discrepancy: unit_image,
            });
        }
        let sym = l.is_symmetric_map(1.0)?.margin;
        if sym > 1e-12 * scale {
            return Err(Error::Inconsistent { what: "hermiticity preservation".into(), discrepancy: sym });
        }
        Ok(())
    }
}

fn lindblad_superop(h: &CMatrix, vs: &[CMatrix]) -> Superoperator {
    let n = h.dim();
    let i = C64::new(0.0, 1.0);
    let commutator = Superoperator::left_mul(h).subtract(&Superoperator::right_mul(h)).expect("same dim");
    let mut l = commutator.scale(i);
    for v in vs {
        let k = v.adjoint() * v;
        let jump = Superoperator::sandwich(&v.adjoint(), v).expect("same dim");
        let anti = Superoperator::left_mul(&k).add(&Superoperator::right_mul(&k)).expect("same dim");
        l = l.add(&jump).and_then(|l| l.subtract(&anti.scale_real(0.5))).expect("same dim");
    }
    debug_assert_eq!(l.dim(), n);
    l
}

/// Wire format: `{"n", "kind", "superop", "H", "V"}`; unknown fields rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorJson {
    n: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    superop: Option<Superoperator>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<CMatrix>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    v: Option<Vec<CMatrix>>,
}

impl Serialize for GeneratorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (superop, h, v) = match self {
            GeneratorSpec::Explicit(op) => (Some(op.clone()), None, None),
            GeneratorSpec::Hamiltonian(h) => (None, Some(h.clone()), None),
            GeneratorSpec::Lindblad { h, vs } => (None, Some(h.clone()), Some(vs.clone())),
        };
        GeneratorJson { n: self.n(), kind: self.kind().to_string(), superop, h, v }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneratorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = GeneratorJson::deserialize(d)?;
        GeneratorSpec::from_json(raw).map_err(serde::de::Error::custom)
    }
}

impl GeneratorSpec {
    fn from_json(raw: GeneratorJson) -> Result<Self> {
        let forbid = |present: bool, field: &str| {
            if present {
                Err(Error::schema(field, format!("not allowed for kind `{}`", raw.kind)))
            } else {
                Ok(())
            }
        };
        let spec = match raw.kind.as_str() {
            "explicit" => {
                forbid(raw.h.is_some(), "H")?;
                forbid(raw.v.is_some(), "V")?;
                let op = raw.superop.ok_or_else(|| Error::schema("superop", "required for kind `explicit`"))?;
                GeneratorSpec::Explicit(op)
            }
            "hamiltonian" => {
                forbid(raw.superop.is_some(), "superop")?;
                forbid(raw.v.is_some(), "V")?;
                let h = raw.h.ok_or_else(|| Error::schema("H", "required for kind `hamiltonian`"))?;
                GeneratorSpec::hamiltonian(h)?
            }
            "lindblad" => {
                forbid(raw.superop.is_some(), "superop")?;
                let h = raw.h.ok_or_else(|| Error::schema("H", "required for kind `lindblad`"))?;
                GeneratorSpec::lindblad(h, raw.v.unwrap_or_default())?
            }
            other => return Err(Error::schema("kind", format!("unknown kind `{other}`"))),
        };
        if spec.n() != raw.n {
            return Err(Error::schema("n", format!("declared {} but payload has dimension {}", raw.n, spec.n())));
        }
        Ok(spec)
    }
}

/// Quadrature settings for the Laplace integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub order: usize,
    pub truncation_eps: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { panels: 64, order: 8, truncation_eps: 1e-10 }
    }
}

/// A generator together with its cached spectrum.
#[derive(Debug, Clone)]
pub struct SemigroupHandle {
    generator: Superoperator,
    spectrum: Vec<C64>,
    abscissa: f64,
}

impl SemigroupHandle {
    pub fn new(generator: Superoperator) -> Self {
        let spectrum = generator.rep_eigenvalues();
        let abscissa = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        SemigroupHandle { generator, spectrum, abscissa }
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Self {
        Self::new(spec.superoperator())
    }

    pub fn generator(&self) -> &Superoperator {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.generator.dim()
    }

    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.abscissa
    }

    /// The "large λ" grid {1, 10, 100} · max(1, abscissa + 1).
    pub fn lambda_grid(&self) -> Vec<f64> {
        let base = (self.abscissa + 1.0).max(1.0);
        [1.0, 10.0, 100.0].iter().map(|k| k * base).collect()
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        let gap = RESOLVENT_GAP * self.abscissa.abs().max(1.0);
        if !(lambda > self.abscissa + gap) {
            return Err(Error::ResolventPole { lambda, abscissa: self.abscissa, gap });
        }
        Ok(())
    }

    /// T_t = e^{tL}.
    pub fn evolve(&self, t: f64) -> Result<Superoperator> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if t == 0.0 {
            return Ok(Superoperator::identity(self.n()));
        }
        Ok(self.generator.exp_scaled(t))
    }

    /// (λ − L)⁻¹.
    pub fn resolvent(&self, lambda: f64) -> Result<Superoperator> {
        self.check_lambda(lambda)?;
        let d = self.n() * self.n();
        let shifted = Mat::identity(d, d) * C64::new(lambda, 0.0) - self.generator.rep();
        let inv =
            shifted.lu().try_inverse().ok_or(Error::ResolventPole { lambda, abscissa: self.abscissa, gap: 0.0 })?;
        Ok(Superoperator::from_rep(self.n(), inv))
    }

    /// ∫₀^∞ e^{−λt} T_t dt by composite Gauss–Legendre on [0, T*], where T*
    /// makes the tail bound e^{(α−λ)T*}/(λ−α) equal the truncation epsilon.
    pub fn laplace_resolvent(&self, lambda: f64, quad: &QuadratureConfig) -> Result<Superoperator> {
        let decay = lambda - self.abscissa;
        if !(decay > RESOLVENT_GAP * self.abscissa.abs().max(1.0)) {
            return Err(Error::DecayFailure { lambda, abscissa: self.abscissa });
        }
        if quad.panels == 0 || quad.order == 0 || !(quad.truncation_eps > 0.0) {
            return Err(Error::InvalidArgument("quadrature settings must be positive".into()));
        }
        let horizon = ((1.0 / (quad.truncation_eps * decay)).ln() / decay).max(1.0 / decay);
        let d = self.n() * self.n();
        let mut acc = Mat::zeros(d, d);
        for (t, w) in quadrature::composite(0.0, horizon, quad.panels, quad.order) {
            let tt = self.generator.exp_scaled(t);
            acc += tt.rep() * C64::new(w * (-lambda * t).exp(), 0.0);
        }
        Ok(Superoperator::from_rep(self.n(), acc))
    }

    /// ((m/t)(m/t − L)⁻¹)^m.
    pub fn euler_product(&self, t: f64, m: u32) -> Result<Superoperator> {
        if !(t > 0.0) || m == 0 {
            return Err(Error::InvalidArgument(format!("euler product needs t > 0 and m ≥ 1 (t = {t}, m = {m})")));
        }
        let mu = m as f64 / t;
        Ok(self.resolvent(mu)?.scale_real(mu).power(m))
    }

    /// L_λ = λ²(λ − L)⁻¹ − λ, cross-checked against λ L (λ − L)⁻¹.
    pub fn yosida_generator(&self, lambda: f64) -> Result<Superoperator> {
        let r = self.resolvent(lambda)?;
        let shifted = r.scale_real(lambda * lambda).subtract(&Superoperator::identity(self.n()).scale_real(lambda))?;
        let product = self.generator.compose(&r)?.scale_real(lambda);
        let scale = linalg::max_abs(shifted.rep()).max(linalg::max_abs(self.generator.rep())).max(1.0);
        let gap = shifted.max_dist(&product);
        if gap > 1e-9 * scale {
            return Err(Error::Inconsistent { what: "Yosida generator forms disagree".into(), discrepancy: gap });
        }
        Ok(shifted)
    }

    /// U_t^λ = e^{−tλ} S_{λ²t} where S_s = e^{s(λ − L)⁻¹}.
    ///
    /// S_{λ²t} overflows for large λt, so it is taken as the k-th power of
    /// e^{−tλ/k} S_{λ²t/k}, with k keeping each scalar exponent below 256.
    pub fn yosida_semigroup(&self, lambda: f64, t: f64) -> Result<Superoperator> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let r = self.resolvent(lambda)?;
        if t == 0.0 {
            return Ok(Superoperator::identity(self.n()));
        }
        let k = (t * lambda / 256.0).ceil().max(1.0);
        let step = r.exp_scaled(lambda * lambda * t / k).scale_real((-t * lambda / k).exp());
        Ok(step.power(k as u32))
    }
}

/// Largest real part of the spectrum of the representing matrix.
pub fn spectral_abscissa(l: &Superoperator) -> f64 {
    l.rep_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn sorted_re(v: &[C64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|z| z.re).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    fn dephasing() -> SemigroupHandle {
        SemigroupHandle::from_spec(&instances::dephasing(2))
    }

    fn zero() -> SemigroupHandle {
        SemigroupHandle::new(Superoperator::zero(2))
    }

    #[test]
    fn evolve_zero_generator_is_identity() {
        for t in [0.0, 0.3, 5.0] {
            assert_eq!(zero().evolve(t).unwrap(), Superoperator::identity(2));
        }
        assert!(matches!(zero().evolve(-1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn evolve_dephasing() {
        let h = dephasing();
        // Oracle: the rep is diagonal in the matrix-unit basis.
        let ev = sorted_re(h.spectrum());
        assert_eq!(ev.len(), 4);
        assert!((ev[0] + 2.0).abs() < 1e-14 && (ev[1] + 2.0).abs() < 1e-14);
        assert!(ev[2].abs() < 1e-14 && ev[3].abs() < 1e-14);
        let t = 0.7;
        let x = CMatrix::from_fn(2, |i, j| C64::new(1.0 + i as f64, j as f64 - 0.5));
        let y = h.evolve(t).unwrap().apply(&x).unwrap();
        let decay = (-2.0 * t).exp();
        let expected = CMatrix::from_fn(2, |i, j| if i == j { x.get(i, j) } else { x.get(i, j) * decay });
        assert!(y.max_dist(&expected) < 1e-14);
    }

    #[test]
    fn evolve_hamiltonian_is_conjugation() {
        let sz = CMatrix::diag_real(&[1.0, -1.0]);
        let h = SemigroupHandle::from_spec(&GeneratorSpec::hamiltonian(sz.clone()).unwrap());
        let t = 0.9;
        let u = sz.scale(C64::new(0.0, t)).exp(); // e^{iHt}
        for seed in 0..5 {
            let x = instances::random_hermitian(2, seed, 1.0) + instances::random_unitary(2, seed);
            let got = h.evolve(t).unwrap().apply(&x).unwrap();
            let expected = &u * &x * u.adjoint();
            assert!(got.max_dist(&expected) < 1e-10);
        }
    }

    #[test]
    fn resolvent_examples() {
        let r = zero().resolvent(2.0).unwrap();
        assert!(r.max_dist(&Superoperator::identity(2).scale_real(0.5)) < 1e-15);

        for seed in 0..5 {
            let h = SemigroupHandle::from_spec(&instances::random_lindblad(3, 2, seed, 4.0));
            for lambda in h.lambda_grid() {
                let r = h.resolvent(lambda).unwrap();
                let img = r.apply(&CMatrix::identity(3)).unwrap();
                assert!(img.max_dist(&CMatrix::identity(3).scale_real(1.0 / lambda)) < 1e-12);
                let back =
                    Superoperator::identity(3).scale_real(lambda).subtract(h.generator()).unwrap().compose(&r).unwrap();
                assert!(back.max_dist(&Superoperator::identity(3)) < 1e-10);
            }
        }

        // Oracle: 1/(λ − μ) over μ ∈ {0, 0, −2, −2}.
        let ev = sorted_re(&dephasing().resolvent(1.0).unwrap().rep_eigenvalues());
        let expected = [1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0];
        assert!(ev.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn resolvent_pole_is_rejected() {
        let h = SemigroupHandle::from_spec(&instances::flip_nonpositive());
        assert!((h.spectral_abscissa() - 2.0).abs() < 1e-12);
        assert!(matches!(h.resolvent(2.0), Err(Error::ResolventPole { .. })));
        assert!(matches!(h.resolvent(1.0), Err(Error::ResolventPole { .. })));
        assert!(h.resolvent(2.5).is_ok());
        assert!(matches!(h.laplace_resolvent(1.5, &QuadratureConfig::default()), Err(Error::DecayFailure { .. })));
    }

    #[test]
    fn laplace_examples() {
        let q = QuadratureConfig::default();
        let r = zero().laplace_resolvent(1.0, &q).unwrap();
        assert!(r.max_dist(&Superoperator::identity(2)) < 1e-8);

        let h = dephasing();
        let ev = sorted_re(&h.laplace_resolvent(1.0, &q).unwrap().rep_eigenvalues());
        let expected = [1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0];
        assert!(ev.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-6));

        let sz = CMatrix::diag_real(&[1.0, -1.0]);
        let h = SemigroupHandle::from_spec(&GeneratorSpec::hamiltonian(sz).unwrap());
        let diff = h.laplace_resolvent(1.0, &q).unwrap().max_dist(&h.resolvent(1.0).unwrap());
        assert!(diff < 1e-6);
    }

    #[test]
    fn euler_examples() {
        for m in [1, 5, 32] {
            assert!(zero().euler_product(1.0, m).unwrap().max_dist(&Superoperator::identity(2)) < 1e-15);
        }
        let h = SemigroupHandle::from_spec(&instances::random_lindblad(2, 1, 3, 4.0));
        for m in [1, 8, 64] {
            let one = h.euler_product(1.0, m).unwrap().apply(&CMatrix::identity(2)).unwrap();
            assert!(one.max_dist(&CMatrix::identity(2)) < 1e-12);
        }

        let h = dephasing();
        let exact = h.evolve(1.0).unwrap();
        let errs: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&m| h.euler_product(1.0, m).unwrap().subtract(&exact).unwrap().rep_norm())
            .collect();
        // Oracle: scalar error |(1 + 2/m)^{-m} − e^{-2}| on the decaying eigenspace.
        for (err, m) in errs.iter().zip([8, 16, 32, 64]) {
            let scalar = ((1.0 + 2.0 / m as f64).powi(-m) - (-2f64).exp()).abs();
            assert!((err - scalar).abs() < 1e-12);
        }
        for w in errs.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn yosida_examples() {
        let y = zero().yosida_generator(7.0).unwrap();
        assert!(y.max_dist(&Superoperator::zero(2)) < 1e-14);

        let h = dephasing();
        let ev = sorted_re(&h.yosida_generator(10.0).unwrap().rep_eigenvalues());
        assert!((ev[0] + 5.0 / 3.0).abs() < 1e-12 && (ev[1] + 5.0 / 3.0).abs() < 1e-12);
        assert!(ev[2].abs() < 1e-12 && ev[3].abs() < 1e-12);

        let mut prev = f64::INFINITY;
        for lambda in [10.0, 100.0, 1000.0] {
            let err = h.yosida_generator(lambda).unwrap().subtract(h.generator()).unwrap().rep_norm();
            // μ²/(λ − μ) at μ = −2
            assert!((err - 4.0 / (lambda + 2.0)).abs() < 1e-9);
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn yosida_semigroup_examples() {
        for (lambda, t) in [(3.0, 0.5), (1000.0, 2.0)] {
            let u = zero().yosida_semigroup(lambda, t).unwrap();
            assert!(u.max_dist(&Superoperator::identity(2)) < 1e-9);
        }
        let h = dephasing();
        let exact = h.evolve(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for lambda in [10.0, 100.0, 1000.0] {
            let u = h.yosida_semigroup(lambda, 1.0).unwrap();
            let err = u.subtract(&exact).unwrap().rep_norm();
            assert!(err < prev);
            prev = err;
            let direct = h.yosida_generator(lambda).unwrap().exp_scaled(1.0);
            assert!(u.max_dist(&direct) < 1e-9);
        }
        assert!(prev <= 1e-2);
    }

    #[test]
    fn abscissa_examples() {
        assert_eq!(spectral_abscissa(&Superoperator::zero(2)), 0.0);
        assert!(spectral_abscissa(dephasing().generator()).abs() < 1e-14);
        let flip = instances::flip_nonpositive().superoperator();
        assert!((spectral_abscissa(&flip) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_grid_policy() {
        assert_eq!(dephasing().lambda_grid(), vec![1.0, 10.0, 100.0]);
        let flip = SemigroupHandle::from_spec(&instances::flip_nonpositive());
        let g = flip.lambda_grid();
        assert!((g[0] - 3.0).abs() < 1e-9 && (g[2] - 300.0).abs() < 1e-7);
    }

    #[test]
    fn generator_json() {
        let spec = instances::random_lindblad(2, 2, 5, 1.0);
        let text = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let explicit = GeneratorSpec::explicit(instances::flip_nonpositive().superoperator());
        let text = serde_json::to_string(&explicit).unwrap();
        assert!(text.contains(r#""kind":"explicit""#));
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&text).unwrap(), explicit);

        let bad = r#"{"n":1,"kind":"hamiltonian","H":{"n":1,"re":[[1]],"im":[[0]]},"extra":0}"#;
        assert!(serde_json::from_str::<GeneratorSpec>(bad).is_err());
        let wrong_n = r#"{"n":2,"kind":"hamiltonian","H":{"n":1,"re":[[1]],"im":[[0]]}}"#;
        assert!(serde_json::from_str::<GeneratorSpec>(wrong_n).unwrap_err().to_string().contains("`n`"));
        let not_herm = r#"{"n":2,"kind":"hamiltonian","H":{"n":2,"re":[[0,1],[0,0]],"im":[[0,0],[0,0]]}}"#;
        assert!(serde_json::from_str::<GeneratorSpec>(not_herm).is_err());
    }
}
