//! Linear maps on M(n, C) as n² × n² matrices acting on column-stacked
//! vectorizations, together with the map-level predicates: symmetry,
//! unitality, positivity, complete positivity and contractivity.
//!
//! Vectorization sends entry (i, j) to index i + n j, so that
//! vec(A X B) = (Bᵀ ⊗ A) vec(X).

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, min_eig_hermitian, CMatrix, Mat};
use crate::rng::{self, substream};

pub const VEC_CONVENTION: &str = "column-stacking";

#[derive(Clone, PartialEq)]
pub struct Superoperator {
    n: usize,
    rep: Mat,
}

impl std::fmt::Debug for Superoperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Superoperator(n = {}){}", self.n, self.rep)
    }
}

impl Superoperator {
    pub fn new(n: usize, rep: Mat) -> Result<Self> {
        let d = n * n;
        if n == 0 || rep.nrows() != d || rep.ncols() != d {
            return Err(Error::dim(format!("{d}x{d}"), format!("{}x{}", rep.nrows(), rep.ncols())));
        }
        CMatrix::new(rep.clone())?;
        Ok(Superoperator { n, rep })
    }

    pub(crate) fn from_rep(n: usize, rep: Mat) -> Self {
        debug_assert_eq!(rep.nrows(), n * n);
        Superoperator { n, rep }
    }

    /// Tabulates a linear map on the matrix-unit basis.
    pub fn from_map(n: usize, mut f: impl FnMut(&CMatrix) -> CMatrix) -> Self {
        let d = n * n;
        let mut rep = Mat::zeros(d, d);
        for j in 0..n {
            for i in 0..n {
                let image = f(&CMatrix::unit(n, i, j));
                rep.set_column(i + n * j, &image.vec());
            }
        }
        Superoperator { n, rep }
    }

    pub fn identity(n: usize) -> Self {
        Superoperator { n, rep: Mat::identity(n * n, n * n) }
    }

    pub fn zero(n: usize) -> Self {
        Superoperator { n, rep: Mat::zeros(n * n, n * n) }
    }

    /// x ↦ a x b.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::dim(a.dim(), b.dim()));
        }
        Ok(Superoperator { n: a.dim(), rep: linalg::kron(&b.as_mat().transpose(), a.as_mat()) })
    }

    /// x ↦ u† x u.
    pub fn conjugation(u: &CMatrix) -> Self {
        Self::sandwich(&u.adjoint(), u).expect("same dimension")
    }

    /// x ↦ a x.
    pub fn left_mul(a: &CMatrix) -> Self {
        Self::sandwich(a, &CMatrix::identity(a.dim())).expect("same dimension")
    }

    /// x ↦ x b.
    pub fn right_mul(b: &CMatrix) -> Self {
        Self::sandwich(&CMatrix::identity(b.dim()), b).expect("same dimension")
    }

    /// x ↦ xᵀ.
    pub fn transpose_map(n: usize) -> Self {
        Self::from_map(n, CMatrix::transpose)
    }

    /// x ↦ Tr(x) 1 / n.
    pub fn trace_map(n: usize) -> Self {
        Self::from_map(n, |x| CMatrix::identity(n).scale(x.trace() / n as f64))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rep(&self) -> &Mat {
        &self.rep
    }

    pub fn into_rep(self) -> Mat {
        self.rep
    }

    fn check_same(&self, other: &Superoperator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::dim(self.n, other.n));
        }
        Ok(())
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.dim() != self.n {
            return Err(Error::dim(self.n, x.dim()));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        let v = &self.rep * x.vec();
        CMatrix::from_mat(Mat::from_column_slice(self.n, self.n, v.as_slice()))
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Superoperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Superoperator { n: self.n, rep: &self.rep * &other.rep })
    }

    pub fn add(&self, other: &Superoperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Superoperator { n: self.n, rep: &self.rep + &other.rep })
    }

    pub fn subtract(&self, other: &Superoperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Superoperator { n: self.n, rep: &self.rep - &other.rep })
    }

    pub fn scale(&self, s: C64) -> Self {
        Superoperator { n: self.n, rep: &self.rep * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// self^k by repeated squaring.
    pub fn power(&self, mut k: u32) -> Self {
        let d = self.n * self.n;
        let mut base = self.rep.clone();
        let mut acc = Mat::identity(d, d);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Superoperator { n: self.n, rep: acc }
    }

    /// e^{t·self}.
    pub fn exp_scaled(&self, t: f64) -> Self {
        Superoperator { n: self.n, rep: linalg::mat_exp(&(&self.rep * C64::new(t, 0.0))) }
    }

    /// Adjoint for the Hilbert–Schmidt inner product ⟨A, B⟩ = Tr(A†B).
    pub fn hs_adjoint(&self) -> Self {
        Superoperator { n: self.n, rep: self.rep.adjoint() }
    }

    /// Entrywise max distance between representing matrices.
    pub fn max_dist(&self, other: &Superoperator) -> f64 {
        max_abs(&(&self.rep - &other.rep))
    }

    /// Spectral norm of the representing matrix (the norm on the
    /// Hilbert–Schmidt space, not the operator norm on the algebra).
    pub fn rep_norm(&self) -> f64 {
        linalg::spectral_norm(&self.rep)
    }

    pub fn rep_eigenvalues(&self) -> Vec<C64> {
        linalg::spectrum(&self.rep).eigenvalues
    }

    /// x ↦ S(xᵀ)ᵀ.
    pub fn transpose_conjugate(&self) -> Self {
        let tau = Self::transpose_map(self.n);
        Superoperator { n: self.n, rep: &tau.rep * &self.rep * &tau.rep }
    }

    /// Checks S(x†) = S(x)† on the matrix-unit basis; both sides are
    /// antilinear in x, so the basis suffices.
    pub fn is_symmetric_map(&self, tol: f64) -> Result<MapCheck> {
        check_tol(tol)?;
        let n = self.n;
        let mut margin: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.apply_unchecked(&CMatrix::unit(n, j, i));
                let rhs = self.apply_unchecked(&CMatrix::unit(n, i, j)).adjoint();
                margin = margin.max(lhs.max_dist(&rhs));
            }
        }
        Ok(MapCheck::new(margin, tol))
    }

    pub fn is_unital(&self, tol: f64) -> Result<MapCheck> {
        check_tol(tol)?;
        let one = CMatrix::identity(self.n);
        Ok(MapCheck::new(self.apply_unchecked(&one).max_dist(&one), tol))
    }

    /// Choi matrix Σ_ij E_ij ⊗ S(E_ij), unnormalized.
    pub fn choi(&self) -> CMatrix {
        let n = self.n;
        let mut c = Mat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let image = self.apply_unchecked(&CMatrix::unit(n, i, j));
                for k in 0..n {
                    for l in 0..n {
                        c[(i * n + k, j * n + l)] = image.get(k, l);
                    }
                }
            }
        }
        CMatrix::from_mat(c)
    }

    pub fn cp_check(&self, tol: f64) -> Result<CpVerdict> {
        check_tol(tol)?;
        let choi = self.choi();
        let cls = choi.classify(tol)?;
        Ok(CpVerdict { verdict: cls.psd, min_choi_eig: cls.min_eig, hermitian_margin: cls.hermitian_margin })
    }

    /// Signed positivity margin of S on the ray v v†: the smallest eigenvalue
    /// of the Hermitian part of S(v v†), minus a bound on its anti-Hermitian
    /// part so that non-Hermitian images register as violations.
    pub fn cone_margin(&self, v: &DVector<C64>) -> f64 {
        cone_eval(self, v).0
    }

    /// Sampled search for a rank-one witness against positivity.
    ///
    /// Positivity is equivalent to S(vv†) ⪰ 0 for every unit vector v. The
    /// search evaluates structured and seeded random vectors, then runs
    /// alternating eigenvector minimization from the worst starters.
    pub fn positivity_check(&self, budget: &SearchBudget, tol: f64) -> Result<ConeVerdict> {
        check_tol(tol)?;
        budget.validate()?;
        let n = self.n;
        let mut starts: Vec<(f64, usize, DVector<C64>)> = structured_vectors(n)
            .into_iter()
            .chain((0..budget.n_random).map(|i| {
                let mut r = substream(budget.seed, i as u64);
                rng::unit_vector(&mut r, n)
            }))
            .enumerate()
            .map(|(k, v)| (self.cone_margin(&v), k, v))
            .collect();
        let mut samples_used = starts.len();
        starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let (mut best, _, ref v0) = starts[0];
        let mut witness = v0.clone();
        for (f0, _, v) in starts.iter().take(budget.n_descent) {
            let (f, v, evals) = descend_cone(self, v.clone(), *f0, budget.descent_steps);
            samples_used += evals;
            if f < best {
                best = f;
                witness = v;
            }
        }

        let status = if best < -tol {
            ConeStatus::Violated
        } else if self.cp_check(tol)?.verdict {
            ConeStatus::CertifiedPositive
        } else {
            ConeStatus::NoViolationFound
        };
        Ok(ConeVerdict {
            status,
            witness: (status == ConeStatus::Violated).then(|| witness.iter().copied().collect()),
            margin: best,
            samples_used,
        })
    }

    /// Sampled lower bound on the operator norm of S on (M(n), ‖·‖₂) with
    /// monotone polar-factor ascent from the best starters.
    pub fn contraction_check(&self, budget: &SearchBudget, tol: f64) -> Result<ContractionVerdict> {
        check_tol(tol)?;
        budget.validate()?;
        let n = self.n;
        let mut starts: Vec<(f64, usize, CMatrix)> = structured_matrices(n)
            .into_iter()
            .chain((0..budget.n_random).map(|i| {
                let mut r = substream(rng::derive_seed(budget.seed, "contraction"), i as u64);
                let g = CMatrix::from_mat(rng::gaussian_matrix(&mut r, n));
                let s = g.spectral_norm();
                g.scale_real(1.0 / s)
            }))
            .enumerate()
            .map(|(k, x)| (norm_ratio(self, &x), k, x))
            .collect();
        starts.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut bound = starts[0].0;
        for (_, _, x) in starts.iter().take(budget.n_descent) {
            bound = bound.max(ascend_norm(self, x.clone(), budget.descent_steps));
        }

        let status = if bound > 1.0 + tol {
            ContractionStatus::Violated
        } else if self.is_symmetric_map(tol)?.verdict && self.is_unital(tol)?.verdict && self.cp_check(tol)?.verdict {
            ContractionStatus::CertifiedContraction
        } else {
            ContractionStatus::NoViolationFound
        };
        Ok(ContractionVerdict { status, norm_lower_bound: bound })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Margin and minimizing eigenvector for the ray through v.
fn cone_eval(s: &Superoperator, v: &DVector<C64>) -> (f64, DVector<C64>) {
    let img = s.apply_unchecked(&CMatrix::projector(v));
    let m = img.as_mat();
    let (_, w) = min_eig_hermitian(m);
    (linalg::psd_margin(m), w)
}

/// Alternating minimization of v ↦ min_w ⟨w, S(vv†) w⟩ over unit (v, w).
/// With w fixed the objective is the quadratic form of S*(ww†) in v, so
/// each half-step is an eigenvector problem and the value never increases.
fn descend_cone(s: &Superoperator, mut v: DVector<C64>, mut f: f64, steps: usize) -> (f64, DVector<C64>, usize) {
    let dual = s.hs_adjoint();
    let mut evals = 0;
    for _ in 0..steps {
        let (_, w) = cone_eval(s, &v);
        let g = dual.apply_unchecked(&CMatrix::projector(&w));
        let (_, cand) = min_eig_hermitian(g.as_mat());
        let (fc, _) = cone_eval(s, &cand);
        evals += 1;
        if fc < f - 1e-15 * f.abs().max(1.0) {
            f = fc;
            v = cand;
        } else {
            break;
        }
    }
    (f, v, evals)
}

fn norm_ratio(s: &Superoperator, x: &CMatrix) -> f64 {
    let nx = x.spectral_norm();
    if nx == 0.0 {
        return 0.0;
    }
    s.apply_unchecked(x).spectral_norm() / nx
}

/// Monotone ascent: with (p, q) the top singular pair of S(x), the unit-ball
/// maximizer of Re⟨S*(p q†), y⟩ is the polar factor of S*(p q†), and
/// ‖S(y)‖ ≥ that value ≥ ‖S(x)‖.
fn ascend_norm(s: &Superoperator, mut x: CMatrix, steps: usize) -> f64 {
    let dual = s.hs_adjoint();
    let mut best = norm_ratio(s, &x);
    for _ in 0..steps {
        let img = s.apply_unchecked(&x);
        let svd = img.as_mat().clone().svd(true, true);
        let k = svd.singular_values.imax();
        let p = svd.u.as_ref().expect("u requested").column(k).into_owned();
        let q = svd.v_t.as_ref().expect("v_t requested").row(k).adjoint();
        let g = dual.apply_unchecked(&CMatrix::outer(&p, &q));
        let gsvd = g.into_mat().svd(true, true);
        let polar = gsvd.u.expect("u requested") * gsvd.v_t.expect("v_t requested");
        let cand = CMatrix::from_mat(polar);
        let val = norm_ratio(s, &cand);
        if val > best + 1e-15 * best.max(1.0) {
            best = val;
            x = cand;
        } else {
            break;
        }
    }
    best
}

/// Basis vectors and the normalized (e_i ± e_j), (e_i ± i e_j).
fn structured_vectors(n: usize) -> Vec<DVector<C64>> {
    let one = C64::new(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = DVector::zeros(n);
        v[i] = one;
        out.push(v);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for phase in [one, -one, C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
                let mut v = DVector::zeros(n);
                v[i] = C64::new(h, 0.0);
                v[j] = phase * h;
                out.push(v);
            }
        }
    }
    out
}

/// Identity, matrix units, Hermitian units, and diagonal sign patterns.
fn structured_matrices(n: usize) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::identity(n)];
    for i in 0..n {
        for j in 0..n {
            out.push(CMatrix::unit(n, i, j));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(CMatrix::unit(n, i, j) + CMatrix::unit(n, j, i));
        }
    }
    for mask in 1..(1usize << n.min(4)) {
        let d: Vec<f64> = (0..n).map(|k| if k < 4 && mask & (1 << k) != 0 { -1.0 } else { 1.0 }).collect();
        out.push(CMatrix::diag_real(&d));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapCheck {
    pub verdict: bool,
    pub margin: f64,
}

impl MapCheck {
    fn new(margin: f64, tol: f64) -> Self {
        MapCheck { verdict: margin <= tol, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpVerdict {
    pub verdict: bool,
    pub min_choi_eig: f64,
    pub hermitian_margin: f64,
}

/// Work limits and seed of the sampled searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBudget {
    pub n_random: usize,
    pub n_descent: usize,
    pub descent_steps: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { n_random: 128, n_descent: 4, descent_steps: 50, seed: 0 }
    }
}

impl SearchBudget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_random == 0 || self.n_descent == 0 {
            return Err(Error::InvalidArgument("search budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeStatus {
    CertifiedPositive,
    NoViolationFound,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    /// Unit vector v with S(vv†) not PSD; present iff violated.
    #[serde(serialize_with = "ser_complex_vec")]
    pub witness: Option<Vec<C64>>,
    /// Most negative margin observed.
    pub margin: f64,
    pub samples_used: usize,
}

impl ConeVerdict {
    pub fn is_violated(&self) -> bool {
        self.status == ConeStatus::Violated
    }

    pub fn witness_vector(&self) -> Option<DVector<C64>> {
        self.witness.as_ref().map(|w| DVector::from_column_slice(w))
    }
}

pub(crate) fn ser_complex_vec<S: Serializer>(v: &Option<Vec<C64>>, s: S) -> Result<S::Ok, S::Error> {
    v.as_ref().map(|w| w.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).serialize(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionStatus {
    CertifiedContraction,
    NoViolationFound,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionVerdict {
    pub status: ContractionStatus,
    pub norm_lower_bound: f64,
}

/// Wire format: `{"n": int, "rep": CMatrix, "vec": "column-stacking"}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperopJson {
    n: usize,
    rep: CMatrix,
    vec: Option<String>,
}

impl Serialize for Superoperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SuperopJson { n: self.n, rep: CMatrix::from_mat(self.rep.clone()), vec: Some(VEC_CONVENTION.to_string()) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Superoperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = SuperopJson::deserialize(d)?;
        let err = |e: Error| serde::de::Error::custom(e);
        match raw.vec.as_deref() {
            None => return Err(err(Error::schema("vec", "missing; expected \"column-stacking\""))),
            Some(VEC_CONVENTION) => {}
            Some(other) => return Err(err(Error::schema("vec", format!("unsupported convention `{other}`")))),
        }
        if raw.rep.dim() != raw.n * raw.n {
            return Err(err(Error::schema(
                "rep",
                format!("expected {0}x{0} for n = {1}, found {2}x{2}", raw.n * raw.n, raw.n, raw.rep.dim()),
            )));
        }
        Superoperator::new(raw.n, raw.rep.into_mat()).map_err(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn sample_matrix(seed: u64, n: usize) -> CMatrix {
        CMatrix::from_mat(rng::gaussian_matrix(&mut substream(seed, 0), n))
    }

    /// e^{tL} for L = id − conj(σ_x), built independently of mat_exp:
    /// e^{tL}(x) = e^t (cosh t · x − sinh t · σ_x x σ_x).
    fn flip_semigroup(t: f64) -> Superoperator {
        let sx = sigma_x();
        Superoperator::from_map(2, |x| {
            (x.scale_real(t.cosh()) - (&sx * x * &sx).scale_real(t.sinh())).scale_real(t.exp())
        })
    }

    #[test]
    fn apply_examples() {
        let x = sample_matrix(1, 3);
        assert_eq!(Superoperator::identity(3).apply(&x).unwrap(), x);

        let s = Superoperator::conjugation(&sigma_x());
        let y = s.apply(&CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        assert!(y.max_dist(&CMatrix::diag_real(&[0.0, 1.0])) < 1e-15);

        let (a, b) = (sample_matrix(2, 3), sample_matrix(3, 3));
        let s = Superoperator::sandwich(&a, &b).unwrap();
        assert!(s.apply(&x).unwrap().max_dist(&(&a * &x * &b)) < 1e-12);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let s = Superoperator::identity(2);
        assert!(matches!(s.apply(&CMatrix::identity(3)), Err(Error::Dimension { .. })));
        assert!(s.compose(&Superoperator::identity(3)).is_err());
    }

    #[test]
    fn algebra_of_maps() {
        let u = crate::instances::random_unitary(3, 4);
        let v = crate::instances::random_unitary(3, 5);
        let s = Superoperator::conjugation(&u);
        assert_eq!(s.compose(&Superoperator::identity(3)).unwrap(), s);
        // (UV)† x (UV) = V† (U† x U) V
        let cuv = Superoperator::conjugation(&(&u * &v));
        let composed = Superoperator::conjugation(&v).compose(&s).unwrap();
        assert!(composed.max_dist(&cuv) < 1e-13);
        assert_eq!(s.subtract(&s).unwrap(), Superoperator::zero(3));
    }

    #[test]
    fn symmetry_examples() {
        let u = crate::instances::random_unitary(2, 9);
        let chk = Superoperator::conjugation(&u).is_symmetric_map(1e-12).unwrap();
        assert!(chk.verdict && chk.margin <= 1e-15);

        let times_i = Superoperator::identity(2).scale(c(0.0, 1.0));
        let chk = times_i.is_symmetric_map(1e-9).unwrap();
        assert!(!chk.verdict);
        assert!((chk.margin - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unital_examples() {
        assert!(Superoperator::identity(3).is_unital(1e-12).unwrap().verdict);
        assert!(Superoperator::trace_map(3).is_unital(1e-12).unwrap().verdict);
        let chk = Superoperator::identity(2).scale_real(2.0).is_unital(1e-9).unwrap();
        assert!(!chk.verdict);
        assert_eq!(chk.margin, 1.0);
    }

    #[test]
    fn choi_examples() {
        // Identity: unnormalized maximally entangled projector, eigenvalues {2, 0, 0, 0}.
        let choi = Superoperator::identity(2).choi();
        let ev = choi.spectrum().eigenvalues;
        assert!((ev[3].re - 2.0).abs() < 1e-14);
        assert!(ev[..3].iter().all(|z| z.norm() < 1e-14));
        assert!(Superoperator::identity(2).cp_check(1e-10).unwrap().verdict);

        // Transpose: SWAP, eigenvalues {1, 1, 1, -1}.
        let t = Superoperator::transpose_map(2);
        let swap = Mat::from_fn(4, 4, |r, col| {
            let (i, k) = (r / 2, r % 2);
            let (j, l) = (col / 2, col % 2);
            c(if i == l && k == j { 1.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(t.choi().as_mat(), &swap);
        let cp = t.cp_check(1e-10).unwrap();
        assert!(!cp.verdict);
        assert!((cp.min_choi_eig + 1.0).abs() < 1e-10);

        // Normalized trace map: C = 1/n.
        let choi = Superoperator::trace_map(3).choi();
        assert!(choi.max_dist(&CMatrix::identity(9).scale_real(1.0 / 3.0)) < 1e-15);
        assert!(Superoperator::trace_map(3).cp_check(1e-10).unwrap().verdict);
    }

    #[test]
    fn positivity_transpose_is_not_violated() {
        let v = Superoperator::transpose_map(2).positivity_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ConeStatus::NoViolationFound);
        assert!(v.margin >= -1e-12);
        assert!(v.witness.is_none());
    }

    #[test]
    fn positivity_negation_is_violated() {
        let v = Superoperator::identity(2).scale_real(-1.0).positivity_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ConeStatus::Violated);
        assert!((v.margin + 1.0).abs() < 1e-12);
        let w = v.witness_vector().unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_flip_semigroup_closed_form_witness() {
        let s = flip_semigroup(1.0);
        let v = s.positivity_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ConeStatus::Violated);
        let expected = -(1f64).exp() * (1f64).sinh();
        assert!((v.margin - expected).abs() < 1e-10, "{} vs {expected}", v.margin);
        let w = v.witness_vector().unwrap();
        assert!((s.cone_margin(&w) - v.margin).abs() < 1e-12);
        // The oracle: at v = e_0 the image is e(cosh 1 |0><0| − sinh 1 |1><1|).
        let e0 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let img = s.apply(&CMatrix::projector(&e0)).unwrap();
        assert!((img.min_eig() - expected).abs() < 1e-12);
    }

    #[test]
    fn positivity_cp_map_is_certified() {
        let u = crate::instances::random_unitary(3, 2);
        let v = Superoperator::conjugation(&u).positivity_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ConeStatus::CertifiedPositive);
    }

    #[test]
    fn positivity_is_seed_deterministic() {
        let s = flip_semigroup(0.3).add(&Superoperator::transpose_map(2)).unwrap();
        let b = SearchBudget::default().with_seed(11);
        assert_eq!(s.positivity_check(&b, 1e-9).unwrap(), s.positivity_check(&b, 1e-9).unwrap());
    }

    #[test]
    fn contraction_examples() {
        let u = crate::instances::random_unitary(3, 8);
        let v = Superoperator::conjugation(&u).contraction_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ContractionStatus::CertifiedContraction);
        assert!((v.norm_lower_bound - 1.0).abs() < 1e-12);

        let v = Superoperator::identity(2).scale_real(2.0).contraction_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ContractionStatus::Violated);
        assert!(v.norm_lower_bound >= 2.0 - 1e-9);

        // Oracle: the map's eigenvalues are 1 on {1, σ_x} and e^{2t} on {σ_z, iσ_y}.
        let s = flip_semigroup(1.0);
        let mut ev: Vec<f64> = s.rep_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        let e2 = (2f64).exp();
        assert!((ev[0] - 1.0).abs() < 1e-10 && (ev[3] - e2).abs() < 1e-9);
        let v = s.contraction_check(&SearchBudget::default(), 1e-9).unwrap();
        assert_eq!(v.status, ContractionStatus::Violated);
        assert!(v.norm_lower_bound >= 7.0);
        assert!(v.norm_lower_bound <= e2 + 1e-9);
    }

    #[test]
    fn hs_adjoint_examples() {
        let u = crate::instances::random_unitary(3, 1);
        let adj = Superoperator::conjugation(&u).hs_adjoint();
        // x ↦ u† x u has adjoint ρ ↦ u ρ u†
        assert!(adj.max_dist(&Superoperator::conjugation(&u.adjoint())) < 1e-14);
        assert_eq!(Superoperator::identity(3).hs_adjoint(), Superoperator::identity(3));
    }

    #[test]
    fn json_requires_vec_field() {
        let s = Superoperator::transpose_map(2);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""vec":"column-stacking""#));
        let back: Superoperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);

        let missing = text.replace(r#","vec":"column-stacking""#, "");
        let err = serde_json::from_str::<Superoperator>(&missing).unwrap_err().to_string();
        assert!(err.contains("vec"), "{err}");
        let wrong = text.replace("column-stacking", "row-stacking");
        assert!(serde_json::from_str::<Superoperator>(&wrong).is_err());
    }
}
