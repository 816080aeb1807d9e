//! Dense complex matrices over M(n, C) and the spectral predicates used by
//! every positivity and norm check in the crate.
//!
//! Equality-style comparisons use the entrywise max norm; operator estimates
//! use the spectral norm.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for every predicate.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type Mat = DMatrix<C64>;

/// An element of the algebra M(n, C).
#[derive(Clone, PartialEq)]
pub struct CMatrix(Mat);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}", self.0)
    }
}

impl CMatrix {
    /// Wraps a square matrix, rejecting non-square or non-finite input.
    pub fn new(m: Mat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dim("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        check_finite(&m)?;
        Ok(CMatrix(m))
    }

    /// Wraps without validation; callers guarantee shape and finiteness.
    pub(crate) fn from_mat(m: Mat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        CMatrix(m)
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix(Mat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(Mat::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(Mat::from_fn(n, n, f))
    }

    /// Row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::dim(format!("{n}x{n}"), "ragged rows"));
        }
        Self::new(Mat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        CMatrix(Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) }))
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Matrix unit E_ij.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        CMatrix(m)
    }

    /// Rank-one operator v w†.
    pub fn outer(v: &DVector<C64>, w: &DVector<C64>) -> Self {
        CMatrix(v * w.adjoint())
    }

    /// Projector v v† (v need not be normalized).
    pub fn projector(v: &DVector<C64>) -> Self {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &CMatrix) -> Self {
        CMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Entrywise max norm.
    pub fn max_norm(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn max_dist(&self, other: &CMatrix) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.0)
    }

    /// (x + x†)/2.
    pub fn hermitian_part(&self) -> Self {
        CMatrix(hermitian_part(&self.0))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eig(&self) -> f64 {
        min_eig_hermitian(&self.0).0
    }

    pub fn spectrum(&self) -> SpectralData {
        spectrum(&self.0)
    }

    pub fn exp(&self) -> Self {
        CMatrix(mat_exp(&self.0))
    }

    pub fn classify(&self, tol: f64) -> Result<ElementClass> {
        classify_element(&self.0, tol)
    }

    /// Column-stacked vectorization: entry (i, j) lands at index i + n j.
    pub fn vec(&self) -> DVector<C64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn devec(v: &DVector<C64>) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() || n == 0 {
            return Err(Error::dim("perfect-square length", v.len()));
        }
        Ok(CMatrix(Mat::from_column_slice(n, n, v.as_slice())))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

/// Wire format: `{"n": int, "re": [[real]], "im": [[real]]}`, row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CMatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].im).collect()).collect();
        CMatrixJson { n, re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = CMatrixJson::deserialize(d)?;
        CMatrix::try_from_json(raw).map_err(serde::de::Error::custom)
    }
}

impl CMatrix {
    fn try_from_json(raw: CMatrixJson) -> Result<Self> {
        let n = raw.n;
        if n == 0 {
            return Err(Error::schema("n", "must be at least 1"));
        }
        for (name, rows) in [("re", &raw.re), ("im", &raw.im)] {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::schema(name, format!("expected {n}x{n} array")));
            }
        }
        let m = Mat::from_fn(n, n, |i, j| C64::new(raw.re[i][j], raw.im[i][j]));
        check_finite(&m).map_err(|e| Error::schema("re/im", e.to_string()))?;
        Ok(CMatrix(m))
    }
}

/// Membership flags for the structured subsets of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementClass {
    pub hermitian: bool,
    pub psd: bool,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eig: f64,
    pub unitary: bool,
    pub hermitian_margin: f64,
    pub unitary_margin: f64,
}

pub fn classify_element(x: &Mat, tol: f64) -> Result<ElementClass> {
    if x.nrows() != x.ncols() {
        return Err(Error::dim("square matrix", format!("{}x{}", x.nrows(), x.ncols())));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = x.nrows();
    let hermitian_margin = max_abs(&(x - x.adjoint()));
    let hermitian = hermitian_margin <= tol;
    let min_eig = min_eig_hermitian(x).0;
    let unitary_margin = max_abs(&(x.adjoint() * x - Mat::identity(n, n)));
    Ok(ElementClass {
        hermitian,
        psd: hermitian && min_eig >= -tol,
        min_eig,
        unitary: unitary_margin <= tol,
        hermitian_margin,
        unitary_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    /// Ascending real part (Hermitian input) or ascending (re, im) otherwise.
    pub eigenvalues: Vec<C64>,
    pub min_hermitian_eigenvalue: Option<f64>,
}

impl SpectralData {
    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn spectrum(m: &Mat) -> SpectralData {
    let scale = max_abs(m).max(1.0);
    if max_abs(&(m - m.adjoint())) <= 1e-12 * scale {
        let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let min = ev.first().copied();
        SpectralData { eigenvalues: ev.into_iter().map(|x| C64::new(x, 0.0)).collect(), min_hermitian_eigenvalue: min }
    } else {
        let mut ev = general_eigenvalues(m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        SpectralData { eigenvalues: ev, min_hermitian_eigenvalue: None }
    }
}

/// Eigenvalues of a general complex matrix, read off the complex Schur form.
pub fn general_eigenvalues(m: &Mat) -> Vec<C64> {
    let (_, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn one_norm(m: &Mat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Smallest eigenvalue of the Hermitian part of `m` and a unit eigenvector.
pub fn min_eig_hermitian(m: &Mat) -> (f64, DVector<C64>) {
    let eig = hermitian_part(m).symmetric_eigen();
    let (k, &val) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty matrix");
    (val, eig.eigenvectors.column(k).into_owned())
}

/// Signed PSD margin: smallest eigenvalue of the Hermitian part minus a
/// bound (n · max entry) on the anti-Hermitian part, so a non-Hermitian
/// matrix never counts as positive.
pub fn psd_margin(m: &Mat) -> f64 {
    let anti = max_abs(&(m - m.adjoint())) * 0.5 * m.nrows() as f64;
    min_eig_hermitian(m).0 - anti
}

fn check_finite(m: &Mat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

// Padé coefficients b_0..b_m of the [m/m] approximant, with the 1-norm
// thresholds below which each degree meets unit roundoff.
const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(f64, &[f64]); 4] = [
    (1.495585217958292e-2, &PADE_3),
    (2.539_398_330_063_23e-1, &PADE_5),
    (9.504178996162932e-1, &PADE_7),
    (2.097847961257068e0, &PADE_9),
];
const THETA_13: f64 = 5.371920351148152;

/// Matrix exponential.
///
/// Normal inputs go through a unitary diagonalization; everything else uses
/// scaling and squaring with a diagonal Padé approximant of degree 3 to 13.
pub fn mat_exp(m: &Mat) -> Mat {
    assert_eq!(m.nrows(), m.ncols(), "mat_exp needs a square matrix");
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    if let Some(e) = exp_normal(m) {
        return e;
    }
    exp_pade(m)
}

fn exp_normal(m: &Mat) -> Option<Mat> {
    let scale = max_abs(m);
    if scale == 0.0 {
        let n = m.nrows();
        return Some(Mat::identity(n, n));
    }
    let adj = m.adjoint();
    if max_abs(&(m - &adj)) <= 1e-14 * scale {
        let eig = hermitian_part(m).symmetric_eigen();
        let d = eig.eigenvalues.map(|x| C64::new(x.exp(), 0.0));
        return Some(&eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.adjoint());
    }
    if max_abs(&(m + &adj)) <= 1e-14 * scale {
        // m = iK with K Hermitian
        let k = m * C64::new(0.0, -1.0);
        let eig = hermitian_part(&k).symmetric_eigen();
        let d = eig.eigenvalues.map(|x| C64::new(0.0, x).exp());
        return Some(&eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.adjoint());
    }
    if max_abs(&(m * &adj - &adj * m)) > 1e-13 * scale * scale {
        return None;
    }
    let (q, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    let off =
        t.iter().enumerate().filter(|(k, _)| k % t.nrows() != k / t.nrows()).map(|(_, z)| z.norm()).fold(0.0, f64::max);
    if off > 1e-12 * scale {
        return None;
    }
    let d = t.diagonal().map(|z| z.exp());
    Some(&q * Mat::from_diagonal(&d) * q.adjoint())
}

fn exp_pade(a: &Mat) -> Mat {
    let n = a.nrows();
    let ident = Mat::identity(n, n);
    let norm = one_norm(a);
    for (theta, coeffs) in THETA {
        if norm <= theta {
            return pade_low(a, &ident, coeffs);
        }
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scaled = a * C64::new(2f64.powi(-s), 0.0);
    let mut r = pade_13(&scaled, &ident);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pade_solve(u: Mat, v: Mat) -> Mat {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular within the degree thresholds")
}

fn pade_low(a: &Mat, ident: &Mat, b: &[f64]) -> Mat {
    let a2 = a * a;
    let m = b.len() - 1;
    let mut pow = ident.clone();
    let mut u_inner = ident * real(b[1]);
    let mut v = ident * real(b[0]);
    for k in 1..=m / 2 {
        pow = &pow * &a2;
        if 2 * k < m {
            u_inner += &pow * real(b[2 * k + 1]);
        }
        v += &pow * real(b[2 * k]);
    }
    pade_solve(a * u_inner, v)
}

fn pade_13(a: &Mat, ident: &Mat) -> Mat {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]));
    let u = a * (u_hi + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + ident * real(b[1]));
    let v_hi = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]));
    let v = v_hi + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + ident * real(b[0]);
    pade_solve(u, v)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}
