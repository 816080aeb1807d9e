//! Named and seeded generator families: completely positive (Lindblad),
//! automorphism (Hamiltonian), positive but not completely positive, and
//! non-positive controls.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::duality::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{self, derive_seed, substream};
use crate::semigroup::GeneratorSpec;
use crate::superop::Superoperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lindblad,
    Hamiltonian,
    Dephasing,
    /// x ↦ L(xᵀ)ᵀ for a random Lindblad L.
    TransposeConjugated,
    /// Random Lindblad plus γ(τ − id) with τ the transpose.
    TransposeMixed,
    FlipNonpositive,
    /// L(x) = scale · x.
    Dilation,
    /// Random hermiticity-preserving superoperator with no further structure.
    Explicit,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Lindblad,
        Family::Hamiltonian,
        Family::Dephasing,
        Family::TransposeConjugated,
        Family::TransposeMixed,
        Family::FlipNonpositive,
        Family::Dilation,
        Family::Explicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lindblad => "lindblad",
            Family::Hamiltonian => "hamiltonian",
            Family::Dephasing => "dephasing",
            Family::TransposeConjugated => "transpose_conjugated",
            Family::TransposeMixed => "transpose_mixed",
            Family::FlipNonpositive => "flip_nonpositive",
            Family::Dilation => "dilation",
            Family::Explicit => "explicit",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "family", name: s.to_string() })
    }
}

/// Reproducible description of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecipe {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    /// Number of jump operators.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Magnitude bound (spectral norm of the generator's representation).
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Weight of the transpose term in `transpose_mixed`, or of the random
    /// Hamiltonian perturbation in `flip_nonpositive`.
    #[serde(default)]
    pub strength: f64,
}

fn default_k() -> usize {
    2
}

fn default_scale() -> f64 {
    4.0
}

impl InstanceRecipe {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        // The transpose term must dominate the CP part for T_t to leave the CP cone.
        let (scale, strength) = match family {
            Family::TransposeMixed => (1.0, 1.0),
            _ => (default_scale(), 0.0),
        };
        InstanceRecipe { family, n, seed, k: default_k(), scale, strength }
    }

    /// The i-th recipe of a fuzz campaign.
    ///
    /// For `flip_nonpositive`, index 0 is the unperturbed control and later
    /// indices carry a random rescaling and Hamiltonian perturbation.
    pub fn campaign(family: Family, n: usize, seed: u64, index: u64) -> Self {
        let mut r = Self::new(family, n, derive_seed(seed, &format!("campaign/{index}")));
        if family == Family::FlipNonpositive {
            r.n = 2;
            if index == 0 {
                r.scale = 1.0;
            } else {
                let mut g = substream(r.seed, 0);
                r.scale = 0.5 + rand::Rng::gen::<f64>(&mut g);
                r.strength = 0.05;
            }
        }
        if family == Family::Dilation {
            r.scale = 1.0;
        }
        r
    }

    pub fn build(&self) -> Result<GeneratorSpec> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(match self.family {
            Family::Lindblad => random_lindblad(n, self.k, self.seed, self.scale),
            Family::Hamiltonian => {
                let h = random_hermitian(n, self.seed, 1.0);
                let norm = 2.0 * h.spectral_norm();
                GeneratorSpec::hamiltonian(h.scale_real(self.scale / norm.max(1e-300)))?
            }
            Family::Dephasing => dephasing(n),
            Family::TransposeConjugated => transpose_conjugated(&random_lindblad(n, self.k, self.seed, self.scale))?,
            Family::TransposeMixed => {
                transpose_mixed(&random_lindblad(n, self.k, self.seed, self.scale), self.strength)?
            }
            Family::FlipNonpositive => {
                if n != 2 {
                    return Err(Error::InvalidArgument("flip_nonpositive is defined for n = 2".into()));
                }
                flip_perturbed(self.scale, self.strength, self.seed)
            }
            Family::Dilation => GeneratorSpec::explicit(Superoperator::identity(n).scale_real(self.scale)),
            Family::Explicit => random_explicit(n, self.seed, self.scale),
        })
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2")
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diag_real(&[1.0, -1.0])
}

/// Lowering operator |0⟩⟨1|.
pub fn sigma_minus() -> CMatrix {
    CMatrix::unit(2, 0, 1)
}

/// L(x) = i[H, x] + Σ_k (V_k† x V_k − ½{V_k† V_k, x}), Heisenberg picture.
pub fn lindblad(h: CMatrix, vs: Vec<CMatrix>) -> Result<GeneratorSpec> {
    GeneratorSpec::lindblad(h, vs)
}

/// Single jump operator Z = diag(1, −1, 1, …), giving L(x) = Z x Z − x.
pub fn dephasing(n: usize) -> GeneratorSpec {
    let z: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    GeneratorSpec::lindblad(CMatrix::zeros(n), vec![CMatrix::diag_real(&z)]).expect("valid dephasing")
}

pub fn amplitude_damping() -> GeneratorSpec {
    GeneratorSpec::lindblad(CMatrix::zeros(2), vec![sigma_minus()]).expect("valid amplitude damping")
}

/// L'(x) = L(xᵀ)ᵀ for a Lindblad or Hamiltonian generator.
pub fn transpose_conjugated(spec: &GeneratorSpec) -> Result<GeneratorSpec> {
    if spec.lindblad_data().is_none() {
        return Err(Error::InvalidArgument("transpose conjugation expects a lindblad or hamiltonian spec".into()));
    }
    Ok(GeneratorSpec::explicit(spec.superoperator().transpose_conjugate()))
}

/// L + γ(τ − id). The second term generates x ↦ e^{−γt}(cosh γt · x + sinh γt · xᵀ),
/// a convex combination of the identity and the transpose.
pub fn transpose_mixed(spec: &GeneratorSpec, gamma: f64) -> Result<GeneratorSpec> {
    if spec.lindblad_data().is_none() {
        return Err(Error::InvalidArgument("transpose mixing expects a lindblad or hamiltonian spec".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("mixing strength must be non-negative, got {gamma}")));
    }
    let n = spec.n();
    let twist = Superoperator::transpose_map(n).subtract(&Superoperator::identity(n))?.scale_real(gamma);
    Ok(GeneratorSpec::explicit(spec.superoperator().add(&twist)?))
}

/// L(x) = x − σ_x x σ_x on M(2).
pub fn flip_nonpositive() -> GeneratorSpec {
    let sx = pauli_x();
    let l = Superoperator::identity(2).subtract(&Superoperator::conjugation(&sx)).expect("same dim");
    GeneratorSpec::explicit(l)
}

/// s · flip + ε · i[H, ·] with H a seeded unit-scale Hermitian matrix.
pub fn flip_perturbed(s: f64, eps: f64, seed: u64) -> GeneratorSpec {
    let base = flip_nonpositive().superoperator().scale_real(s);
    if eps == 0.0 {
        return GeneratorSpec::explicit(base);
    }
    let h = random_hermitian(2, derive_seed(seed, "flip-perturbation"), eps);
    let ham = GeneratorSpec::hamiltonian(h).expect("hermitian").superoperator();
    GeneratorSpec::explicit(base.add(&ham).expect("same dim"))
}

/// (G + G†)/2 · scale for a complex Gaussian G.
pub fn random_hermitian(n: usize, seed: u64, scale: f64) -> CMatrix {
    let g = CMatrix::from_mat(rng::gaussian_matrix(&mut substream(derive_seed(seed, "hermitian"), 0), n));
    (&g + g.adjoint()).scale_real(0.5 * scale)
}

/// Haar unitary: QR of a complex Gaussian matrix with the phases of R's
/// diagonal moved into Q.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let g = rng::gaussian_matrix(&mut substream(derive_seed(seed, "unitary"), 0), n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    CMatrix::from_mat(q) * CMatrix::diag(&phases)
}

/// G G† / Tr(G G†).
pub fn random_density(n: usize, seed: u64) -> DensityMatrix {
    let g = CMatrix::from_mat(rng::gaussian_matrix(&mut substream(derive_seed(seed, "density"), 0), n));
    let p = &g * g.adjoint();
    let tr = p.trace().re;
    let rho = p.scale_real(1.0 / tr).hermitian_part();
    DensityMatrix::new(rho).expect("normalized Gram matrix is a state")
}

/// Random Hamiltonian and k random jump operators, rescaled so that the
/// generator's representation has spectral norm scale · u, u ∈ [1/4, 1].
pub fn random_lindblad(n: usize, k: usize, seed: u64, scale: f64) -> GeneratorSpec {
    let base = derive_seed(seed, "lindblad");
    let h = random_hermitian(n, derive_seed(base, "H"), 1.0);
    let vs: Vec<CMatrix> =
        (0..k).map(|i| CMatrix::from_mat(rng::gaussian_matrix(&mut substream(base, 1 + i as u64), n))).collect();
    let raw = GeneratorSpec::lindblad(h.clone(), vs.clone()).expect("valid lindblad data");
    let norm = raw.superoperator().rep_norm();
    if norm == 0.0 {
        return raw;
    }
    let u = 0.25 + 0.75 * rand::Rng::gen::<f64>(&mut substream(base, 0));
    let c = scale * u / norm;
    let vs = vs.iter().map(|v| v.scale_real(c.sqrt())).collect();
    GeneratorSpec::lindblad(h.scale_real(c), vs).expect("rescaled lindblad data")
}

/// A random superoperator made hermiticity preserving, S(x) ↦ ½(S(x) + S(x†)†),
/// with representation norm `scale`.
pub fn random_explicit(n: usize, seed: u64, scale: f64) -> GeneratorSpec {
    let d = n * n;
    let mut r = substream(derive_seed(seed, "explicit"), 0);
    let data: Vec<C64> = (0..d * d).map(|_| rng::complex_gaussian(&mut r)).collect();
    let raw = Superoperator::new(n, nalgebra::DMatrix::from_column_slice(d, d, &data)).expect("finite");
    let sym = Superoperator::from_map(n, |x| {
        let a = raw.apply(x).expect("dim");
        let b = raw.apply(&x.adjoint()).expect("dim").adjoint();
        (a + b).scale_real(0.5)
    });
    let norm = sym.rep_norm();
    GeneratorSpec::explicit(sym.scale_real(scale / norm))
}
