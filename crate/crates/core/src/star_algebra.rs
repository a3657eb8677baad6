//! Finite-dimensional C*-algebras: the full matrix algebra `M_d(ℂ)` and the
//! diagonal algebra `ℂ^k`.
//!
//! Elements carry their descriptor; binary operations refuse to mix
//! descriptors. Order and spectral questions are answered on the dense
//! `d × d` representation (diagonal elements are embedded as diagonal
//! matrices).

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::{self, c, CMatrix, C64};
use crate::error::{input, GFrameError, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_COND_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Matrix,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub kind: AlgebraKind,
    pub dim: usize,
}

impl AlgebraDescriptor {
    pub fn new(kind: AlgebraKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return input("algebra dimension must be at least 1");
        }
        Ok(Self { kind, dim })
    }

    pub fn matrix(d: usize) -> Self {
        Self::new(AlgebraKind::Matrix, d).expect("dimension must be positive")
    }

    pub fn diagonal(k: usize) -> Self {
        Self::new(AlgebraKind::Diagonal, k).expect("dimension must be positive")
    }

    /// Number of stored complex entries.
    pub fn entry_count(&self) -> usize {
        match self.kind {
            AlgebraKind::Matrix => self.dim * self.dim,
            AlgebraKind::Diagonal => self.dim,
        }
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return input(format!("descriptor mismatch: {self:?} vs {other:?}"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Scale(C64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElement", into = "RawElement")]
pub struct AlgebraElement {
    descriptor: AlgebraDescriptor,
    entries: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawElement {
    kind: AlgebraKind,
    dim: usize,
    entries: Vec<C64>,
}

impl TryFrom<RawElement> for AlgebraElement {
    type Error = GFrameError;
    fn try_from(raw: RawElement) -> Result<Self> {
        AlgebraElement::new(AlgebraDescriptor::new(raw.kind, raw.dim)?, raw.entries)
    }
}

impl From<AlgebraElement> for RawElement {
    fn from(a: AlgebraElement) -> Self {
        RawElement {
            kind: a.descriptor.kind,
            dim: a.descriptor.dim,
            entries: a.entries,
        }
    }
}

impl AlgebraElement {
    pub fn new(descriptor: AlgebraDescriptor, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != descriptor.entry_count() {
            return input(format!(
                "{:?} algebra of dim {} needs {} entries, got {}",
                descriptor.kind,
                descriptor.dim,
                descriptor.entry_count(),
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input("algebra entries must be finite");
        }
        Ok(Self { descriptor, entries })
    }

    pub fn zero(descriptor: AlgebraDescriptor) -> Self {
        Self {
            descriptor,
            entries: vec![C64::new(0.0, 0.0); descriptor.entry_count()],
        }
    }

    pub fn identity(descriptor: AlgebraDescriptor) -> Self {
        Self::scalar(descriptor, c(1.0, 0.0))
    }

    /// `z · 1_A`.
    pub fn scalar(descriptor: AlgebraDescriptor, z: C64) -> Self {
        let mut a = Self::zero(descriptor);
        match descriptor.kind {
            AlgebraKind::Matrix => {
                for i in 0..descriptor.dim {
                    a.entries[i * descriptor.dim + i] = z;
                }
            }
            AlgebraKind::Diagonal => a.entries.fill(z),
        }
        a
    }

    /// Diagonal element with the given real entries, in either algebra kind.
    pub fn from_real_diagonal(descriptor: AlgebraDescriptor, diag: &[f64]) -> Result<Self> {
        if diag.len() != descriptor.dim {
            return input("diagonal length must equal the algebra dimension");
        }
        let mut a = Self::zero(descriptor);
        for (i, &v) in diag.iter().enumerate() {
            match descriptor.kind {
                AlgebraKind::Matrix => a.entries[i * descriptor.dim + i] = c(v, 0.0),
                AlgebraKind::Diagonal => a.entries[i] = c(v, 0.0),
            }
        }
        Ok(a)
    }

    /// Rebuild an element from its dense `d × d` form. For the diagonal kind
    /// only the diagonal is read.
    pub fn from_matrix(descriptor: AlgebraDescriptor, m: &CMatrix) -> Result<Self> {
        let d = descriptor.dim;
        if m.nrows() != d || m.ncols() != d {
            return input("dense matrix has the wrong size for this algebra");
        }
        let entries = match descriptor.kind {
            AlgebraKind::Matrix => (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)])
                .collect(),
            AlgebraKind::Diagonal => (0..d).map(|i| m[(i, i)]).collect(),
        };
        Self::new(descriptor, entries)
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.descriptor.dim;
        match self.descriptor.kind {
            AlgebraKind::Matrix => CMatrix::from_row_slice(d, d, &self.entries),
            AlgebraKind::Diagonal => {
                CMatrix::from_diagonal(&DVector::from_column_slice(&self.entries))
            }
        }
    }

    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self> {
        if let ArithOp::Scale(z) = op {
            return Ok(self.scale(z));
        }
        self.descriptor.check_same(&other.descriptor)?;
        let entries = match op {
            ArithOp::Add => zip_with(&self.entries, &other.entries, |a, b| a + b),
            ArithOp::Sub => zip_with(&self.entries, &other.entries, |a, b| a - b),
            ArithOp::Mul => match self.descriptor.kind {
                AlgebraKind::Diagonal => zip_with(&self.entries, &other.entries, |a, b| a * b),
                AlgebraKind::Matrix => {
                    let p = self.to_matrix() * other.to_matrix();
                    return Self::from_matrix(self.descriptor, &p);
                }
            },
            ArithOp::Scale(_) => unreachable!(),
        };
        Ok(Self {
            descriptor: self.descriptor,
            entries,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.arith(other, ArithOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            descriptor: self.descriptor,
            entries: self.entries.iter().map(|e| e * z).collect(),
        }
    }

    pub fn scale_real(&self, r: f64) -> Self {
        self.scale(c(r, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let d = self.descriptor.dim;
        let entries = match self.descriptor.kind {
            AlgebraKind::Diagonal => self.entries.iter().map(|z| z.conj()).collect(),
            AlgebraKind::Matrix => (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| self.entries[j * d + i].conj())
                .collect(),
        };
        Self {
            descriptor: self.descriptor,
            entries,
        }
    }

    /// C*-norm: largest singular value, or max modulus for the diagonal kind.
    pub fn norm(&self) -> f64 {
        match self.descriptor.kind {
            AlgebraKind::Diagonal => self.entries.iter().fold(0.0, |m, z| m.max(z.norm())),
            AlgebraKind::Matrix => dense::spectral_norm(&self.to_matrix()),
        }
    }

    /// Largest entry modulus of `self - adjoint(self)`.
    pub fn hermitian_defect(&self) -> f64 {
        dense::hermitian_defect(&self.to_matrix())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.norm().max(1.0)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.descriptor.kind {
            AlgebraKind::Diagonal => {
                let mut v: Vec<f64> = self.entries.iter().map(|z| z.re).collect();
                v.sort_by(f64::total_cmp);
                v
            }
            AlgebraKind::Matrix => dense::hermitian_eigenvalues(&self.to_matrix()),
        }
    }

    /// Hermitian within `tol` and spectrum bounded below by `-tol·max(1,‖a‖)`.
    pub fn is_positive(&self, tol: f64) -> bool {
        let scale = self.norm().max(1.0);
        if self.hermitian_defect() > tol * scale {
            return false;
        }
        self.eigenvalues().first().is_none_or(|&l| l >= -tol * scale)
    }

    /// Norm-shift positivity test: with `t = ‖a‖`, `a ≥ 0` iff `‖a − t·1‖ ≤ t`.
    pub fn is_positive_by_norm_shift(&self, tol: f64) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return input("norm-shift positivity needs a Hermitian element");
        }
        let t = self.norm();
        let shifted = self.sub(&Self::scalar(self.descriptor, c(t, 0.0)))?;
        Ok(shifted.norm() <= t + tol * t.max(1.0))
    }

    /// Positive square root via the spectral decomposition.
    pub fn sqrt_positive(&self, tol: f64) -> Result<Self> {
        if !self.is_positive(tol) {
            return Err(GFrameError::Domain(format!(
                "square root requested for a non-positive element (min eigenvalue {:.3e})",
                self.eigenvalues().first().copied().unwrap_or(0.0)
            )));
        }
        match self.descriptor.kind {
            AlgebraKind::Diagonal => Ok(Self {
                descriptor: self.descriptor,
                entries: self
                    .entries
                    .iter()
                    .map(|z| c(z.re.max(0.0).sqrt(), 0.0))
                    .collect(),
            }),
            AlgebraKind::Matrix => {
                Self::from_matrix(self.descriptor, &dense::psd_sqrt(&self.to_matrix()))
            }
        }
    }

    pub fn invert(&self, cond_cap: f64) -> Result<Self> {
        match self.descriptor.kind {
            AlgebraKind::Diagonal => {
                let hi = self.norm();
                let lo = self.entries.iter().fold(f64::INFINITY, |m, z| m.min(z.norm()));
                let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
                if !cond.is_finite() || cond > cond_cap {
                    return Err(GFrameError::Domain(format!(
                        "element is singular or ill-conditioned (condition estimate {cond:.3e}, cap {cond_cap:.1e})"
                    )));
                }
                Ok(Self {
                    descriptor: self.descriptor,
                    entries: self.entries.iter().map(|z| z.inv()).collect(),
                })
            }
            AlgebraKind::Matrix => Self::from_matrix(
                self.descriptor,
                &dense::inverse(&self.to_matrix(), cond_cap)?,
            ),
        }
    }

    /// `self ≤ other` in the C*-order.
    pub fn leq(&self, other: &Self, tol: f64) -> Result<bool> {
        self.descriptor.check_same(&other.descriptor)?;
        if !self.is_hermitian(tol) || !other.is_hermitian(tol) {
            return input("order comparison needs Hermitian elements");
        }
        Ok(other.sub(self)?.is_positive(tol))
    }

    /// Distance in the C*-norm.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Element with independent standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(descriptor: AlgebraDescriptor, rng: &mut R) -> Self {
        let entries = (0..descriptor.entry_count())
            .map(|_| gaussian_c64(rng))
            .collect();
        Self { descriptor, entries }
    }

    /// `(g + g*)/2` for a Gaussian `g`.
    pub fn random_hermitian<R: Rng + ?Sized>(descriptor: AlgebraDescriptor, rng: &mut R) -> Self {
        let g = Self::random(descriptor, rng);
        g.add(&g.adjoint()).expect("same descriptor").scale_real(0.5)
    }
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn zip_with(a: &[C64], b: &[C64], f: impl Fn(C64, C64) -> C64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}
