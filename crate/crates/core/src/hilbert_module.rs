//! The standard Hilbert C*-module `A^n` and adjointable maps between such
//! modules.
//!
//! Vectors are left modules: `a·x = (a x_1, …, a x_n)`. Operators act by
//! right block multiplication, `(Tx)_j = Σ_i x_i t_ij`, so a map `A^n → A^m`
//! is an `n × m` array of algebra elements indexed by (input, output).
//!
//! Writing `x` as the `d × nd` row of blocks `[x_1 … x_n]`, the action is
//! `X ↦ X·flatten(T)` and `⟨x, y⟩ = X Y^H`. Everything spectral about an
//! operator is read off `flatten(T)`. Composition reverses order under
//! flattening: `flatten(S∘T) = flatten(T)·flatten(S)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{self, c, CMatrix, C64};
use crate::error::{input, GFrameError, Result};
use crate::star_algebra::{AlgebraDescriptor, AlgebraElement, AlgebraKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct ModuleVector {
    descriptor: AlgebraDescriptor,
    coords: Vec<AlgebraElement>,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    rank: usize,
    coords: Vec<AlgebraElement>,
}

impl TryFrom<RawVector> for ModuleVector {
    type Error = GFrameError;
    fn try_from(raw: RawVector) -> Result<Self> {
        if raw.coords.len() != raw.rank {
            return input(format!("rank {} but {} coords", raw.rank, raw.coords.len()));
        }
        ModuleVector::new(raw.coords)
    }
}

impl From<ModuleVector> for RawVector {
    fn from(v: ModuleVector) -> Self {
        RawVector {
            rank: v.coords.len(),
            coords: v.coords,
        }
    }
}

impl ModuleVector {
    pub fn new(coords: Vec<AlgebraElement>) -> Result<Self> {
        let Some(first) = coords.first() else {
            return input("module rank must be at least 1");
        };
        let descriptor = first.descriptor();
        for x in &coords {
            descriptor.check_same(&x.descriptor())?;
        }
        Ok(Self { descriptor, coords })
    }

    pub fn zero(descriptor: AlgebraDescriptor, rank: usize) -> Self {
        Self {
            descriptor,
            coords: vec![AlgebraElement::zero(descriptor); rank],
        }
    }

    /// Standard basis vector `e_i` with `1_A` in slot `i`.
    pub fn basis(descriptor: AlgebraDescriptor, rank: usize, i: usize) -> Self {
        let mut v = Self::zero(descriptor, rank);
        v.coords[i] = AlgebraElement::identity(descriptor);
        v
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[AlgebraElement] {
        &self.coords
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        self.descriptor.check_same(&other.descriptor)?;
        if self.rank() != other.rank() {
            return input(format!("rank mismatch: {} vs {}", self.rank(), other.rank()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            descriptor: self.descriptor,
            coords,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            descriptor: self.descriptor,
            coords: self.coords.iter().map(|a| a.scale(z)).collect(),
        }
    }

    /// Left module action `a·x`.
    pub fn left_mul(&self, a: &AlgebraElement) -> Result<Self> {
        let coords = self
            .coords
            .iter()
            .map(|x| a.mul(x))
            .collect::<Result<_>>()?;
        Ok(Self {
            descriptor: self.descriptor,
            coords,
        })
    }

    /// The `d × nd` row of blocks `[x_1 … x_n]`.
    pub fn flatten(&self) -> CMatrix {
        let d = self.descriptor.dim;
        let mut m = CMatrix::zeros(d, d * self.rank());
        for (i, x) in self.coords.iter().enumerate() {
            m.view_mut((0, i * d), (d, d)).copy_from(&x.to_matrix());
        }
        m
    }

    pub fn from_flat(descriptor: AlgebraDescriptor, m: &CMatrix) -> Result<Self> {
        let d = descriptor.dim;
        if m.nrows() != d || !m.ncols().is_multiple_of(d) || m.ncols() == 0 {
            return input("flattened vector has incompatible shape");
        }
        let coords = (0..m.ncols() / d)
            .map(|i| AlgebraElement::from_matrix(descriptor, &m.view((0, i * d), (d, d)).into_owned()))
            .collect::<Result<_>>()?;
        Self::new(coords)
    }

    /// A vector whose flattening has `u` as one of its rows. For the diagonal
    /// kind a row is only representable inside one component, so the
    /// component carrying most of `u`'s mass is kept.
    pub fn from_row(descriptor: AlgebraDescriptor, u: &[C64]) -> Result<Self> {
        let d = descriptor.dim;
        if u.is_empty() || !u.len().is_multiple_of(d) {
            return input("row length is not a multiple of the algebra dimension");
        }
        let n = u.len() / d;
        let mut m = CMatrix::zeros(d, u.len());
        match descriptor.kind {
            AlgebraKind::Matrix => {
                for (j, z) in u.iter().enumerate() {
                    m[(0, j)] = *z;
                }
            }
            AlgebraKind::Diagonal => {
                let mass = |l: usize| (0..n).map(|i| u[i * d + l].norm_sqr()).sum::<f64>();
                let best = (0..d).max_by(|&a, &b| mass(a).total_cmp(&mass(b))).unwrap_or(0);
                for i in 0..n {
                    m[(best, i * d + best)] = u[i * d + best];
                }
            }
        }
        Self::from_flat(descriptor, &m)
    }

    /// Coordinates with independent standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(descriptor: AlgebraDescriptor, rank: usize, rng: &mut R) -> Self {
        Self {
            descriptor,
            coords: (0..rank).map(|_| AlgebraElement::random(descriptor, rng)).collect(),
        }
    }

    /// Gaussian vector rescaled to `scalar_norm = 1`.
    pub fn random_unit<R: Rng + ?Sized>(descriptor: AlgebraDescriptor, rank: usize, rng: &mut R) -> Self {
        loop {
            let v = Self::random(descriptor, rank, rng);
            let n = scalar_norm(&v);
            if n > 1e-8 {
                return v.scale(c(1.0 / n, 0.0));
            }
        }
    }
}

/// `⟨x, y⟩ = Σ_i x_i y_i*`.
pub fn inner_product(x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
    x.check_shape(y)?;
    let mut acc = AlgebraElement::zero(x.descriptor);
    for (a, b) in x.coords.iter().zip(&y.coords) {
        acc = acc.add(&a.mul(&b.adjoint())?)?;
    }
    Ok(acc)
}

/// `‖x‖ = ‖⟨x,x⟩‖^{1/2}`.
pub fn scalar_norm(x: &ModuleVector) -> f64 {
    inner_product(x, x).expect("same shape").norm().sqrt()
}

/// The algebra-valued modulus `|x| = ⟨x,x⟩^{1/2}`.
pub fn modulus(x: &ModuleVector, tol: f64) -> Result<AlgebraElement> {
    inner_product(x, x)?.sqrt_positive(tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct AdjointableOperator {
    descriptor: AlgebraDescriptor,
    in_rank: usize,
    out_rank: usize,
    blocks: Vec<Vec<AlgebraElement>>,
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    in_rank: usize,
    out_rank: usize,
    blocks: Vec<Vec<AlgebraElement>>,
}

impl TryFrom<RawOperator> for AdjointableOperator {
    type Error = GFrameError;
    fn try_from(raw: RawOperator) -> Result<Self> {
        let op = AdjointableOperator::from_blocks(raw.blocks)?;
        if op.in_rank != raw.in_rank || op.out_rank != raw.out_rank {
            return input(format!(
                "declared ranks ({}, {}) disagree with block shape ({}, {})",
                raw.in_rank, raw.out_rank, op.in_rank, op.out_rank
            ));
        }
        Ok(op)
    }
}

impl From<AdjointableOperator> for RawOperator {
    fn from(t: AdjointableOperator) -> Self {
        RawOperator {
            in_rank: t.in_rank,
            out_rank: t.out_rank,
            blocks: t.blocks,
        }
    }
}

impl AdjointableOperator {
    /// Build from an `n × m` array of blocks (row = input coordinate).
    pub fn from_blocks(blocks: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        let n = blocks.len();
        let m = blocks.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return input("operator ranks must be at least 1");
        }
        let descriptor = blocks[0][0].descriptor();
        for row in &blocks {
            if row.len() != m {
                return input("ragged operator block array");
            }
            for b in row {
                descriptor.check_same(&b.descriptor())?;
            }
        }
        Ok(Self {
            descriptor,
            in_rank: n,
            out_rank: m,
            blocks,
        })
    }

    pub fn zero(descriptor: AlgebraDescriptor, in_rank: usize, out_rank: usize) -> Self {
        Self {
            descriptor,
            in_rank,
            out_rank,
            blocks: vec![vec![AlgebraElement::zero(descriptor); out_rank]; in_rank],
        }
    }

    pub fn identity(descriptor: AlgebraDescriptor, rank: usize) -> Self {
        Self::scalar(descriptor, rank, c(1.0, 0.0))
    }

    /// `z·I` on `A^rank`.
    pub fn scalar(descriptor: AlgebraDescriptor, rank: usize, z: C64) -> Self {
        let mut t = Self::zero(descriptor, rank, rank);
        for i in 0..rank {
            t.blocks[i][i] = AlgebraElement::scalar(descriptor, z);
        }
        t
    }

    /// Block-diagonal operator with the given diagonal blocks.
    pub fn block_diagonal(diag: Vec<AlgebraElement>) -> Result<Self> {
        let Some(first) = diag.first() else {
            return input("operator ranks must be at least 1");
        };
        let descriptor = first.descriptor();
        let mut t = Self::zero(descriptor, diag.len(), diag.len());
        for (i, a) in diag.into_iter().enumerate() {
            descriptor.check_same(&a.descriptor())?;
            t.blocks[i][i] = a;
        }
        Ok(t)
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn in_rank(&self) -> usize {
        self.in_rank
    }

    pub fn out_rank(&self) -> usize {
        self.out_rank
    }

    pub fn blocks(&self) -> &[Vec<AlgebraElement>] {
        &self.blocks
    }

    pub fn block(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.blocks[i][j]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.descriptor.check_same(&other.descriptor)?;
        if self.in_rank != other.in_rank || self.out_rank != other.out_rank {
            return input("operator shape mismatch");
        }
        Ok(())
    }

    fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&AlgebraElement, &AlgebraElement) -> Result<AlgebraElement>,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
            .collect::<Result<_>>()?;
        Ok(Self { blocks, ..self.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|r| r.iter().map(|a| a.scale(z)).collect())
                .collect(),
            ..self.clone()
        }
    }

    pub fn scale_real(&self, r: f64) -> Self {
        self.scale(c(r, 0.0))
    }

    /// `(n·d) × (m·d)` complex matrix whose block `(i, j)` is `t_ij`.
    pub fn flatten(&self) -> CMatrix {
        let d = self.descriptor.dim;
        let mut f = CMatrix::zeros(self.in_rank * d, self.out_rank * d);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                f.view_mut((i * d, j * d), (d, d)).copy_from(&b.to_matrix());
            }
        }
        f
    }

    /// Inverse of [`flatten`](Self::flatten). For the diagonal kind only the
    /// diagonals of the blocks are read.
    pub fn from_flat(descriptor: AlgebraDescriptor, f: &CMatrix) -> Result<Self> {
        let d = descriptor.dim;
        if !f.nrows().is_multiple_of(d) || !f.ncols().is_multiple_of(d) || f.nrows() == 0 || f.ncols() == 0 {
            return input("flattened operator has incompatible shape");
        }
        let (n, m) = (f.nrows() / d, f.ncols() / d);
        let blocks = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| AlgebraElement::from_matrix(descriptor, &f.view((i * d, j * d), (d, d)).into_owned()))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Self::from_blocks(blocks)
    }

    /// Build from per-component matrices: one `(n·d) × (m·d)` matrix for the
    /// matrix kind, `k` matrices of size `n × m` for the diagonal kind.
    pub fn from_components(
        descriptor: AlgebraDescriptor,
        in_rank: usize,
        out_rank: usize,
        comps: &[CMatrix],
    ) -> Result<Self> {
        let d = descriptor.dim;
        match descriptor.kind {
            AlgebraKind::Matrix => {
                if comps.len() != 1 || comps[0].shape() != (in_rank * d, out_rank * d) {
                    return input("matrix-kind operator needs one component of the flattened shape");
                }
                Self::from_flat(descriptor, &comps[0])
            }
            AlgebraKind::Diagonal => {
                if comps.len() != d || comps.iter().any(|c| c.shape() != (in_rank, out_rank)) {
                    return input("diagonal-kind operator needs k components of shape n x m");
                }
                let mut f = CMatrix::zeros(in_rank * d, out_rank * d);
                for (l, comp) in comps.iter().enumerate() {
                    for i in 0..in_rank {
                        for j in 0..out_rank {
                            f[(i * d + l, j * d + l)] = comp[(i, j)];
                        }
                    }
                }
                Self::from_flat(descriptor, &f)
            }
        }
    }

    /// Inverse of [`from_components`](Self::from_components).
    pub fn components(&self) -> Vec<CMatrix> {
        let f = self.flatten();
        let d = self.descriptor.dim;
        match self.descriptor.kind {
            AlgebraKind::Matrix => vec![f],
            AlgebraKind::Diagonal => (0..d)
                .map(|l| CMatrix::from_fn(self.in_rank, self.out_rank, |i, j| f[(i * d + l, j * d + l)]))
                .collect(),
        }
    }

    /// Operator with independent Gaussian blocks.
    pub fn random<R: Rng + ?Sized>(
        descriptor: AlgebraDescriptor,
        in_rank: usize,
        out_rank: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            descriptor,
            in_rank,
            out_rank,
            blocks: (0..in_rank)
                .map(|_| (0..out_rank).map(|_| AlgebraElement::random(descriptor, rng)).collect())
                .collect(),
        }
    }

    /// `q* q + eps·I` for Gaussian `q`: positive and invertible.
    pub fn random_positive_invertible<R: Rng + ?Sized>(
        descriptor: AlgebraDescriptor,
        rank: usize,
        eps: f64,
        rng: &mut R,
    ) -> Self {
        let q = Self::random(descriptor, rank, rank, rng);
        let qq = op_compose(&op_adjoint(&q), &q).expect("square");
        qq.add(&Self::scalar(descriptor, rank, c(eps, 0.0))).expect("same shape")
    }
}

/// `(Tx)_j = Σ_i x_i t_ij`.
pub fn op_apply(t: &AdjointableOperator, x: &ModuleVector) -> Result<ModuleVector> {
    t.descriptor.check_same(&x.descriptor)?;
    if x.rank() != t.in_rank {
        return input(format!("operator expects rank {}, vector has rank {}", t.in_rank, x.rank()));
    }
    let mut coords = Vec::with_capacity(t.out_rank);
    for j in 0..t.out_rank {
        let mut acc = AlgebraElement::zero(t.descriptor);
        for (i, xi) in x.coords.iter().enumerate() {
            acc = acc.add(&xi.mul(&t.blocks[i][j])?)?;
        }
        coords.push(acc);
    }
    ModuleVector::new(coords)
}

/// Blocks `(T*)_ji = (t_ij)*`.
pub fn op_adjoint(t: &AdjointableOperator) -> AdjointableOperator {
    AdjointableOperator {
        descriptor: t.descriptor,
        in_rank: t.out_rank,
        out_rank: t.in_rank,
        blocks: (0..t.out_rank)
            .map(|j| (0..t.in_rank).map(|i| t.blocks[i][j].adjoint()).collect())
            .collect(),
    }
}

/// `S∘T`, i.e. `x ↦ S(Tx)`; block `(i, j)` is `Σ_k t_ik s_kj`.
pub fn op_compose(s: &AdjointableOperator, t: &AdjointableOperator) -> Result<AdjointableOperator> {
    s.descriptor.check_same(&t.descriptor)?;
    if t.out_rank != s.in_rank {
        return input(format!(
            "cannot compose: inner operator has out_rank {}, outer has in_rank {}",
            t.out_rank, s.in_rank
        ));
    }
    let mut blocks = Vec::with_capacity(t.in_rank);
    for i in 0..t.in_rank {
        let mut row = Vec::with_capacity(s.out_rank);
        for j in 0..s.out_rank {
            let mut acc = AlgebraElement::zero(s.descriptor);
            for k in 0..t.out_rank {
                acc = acc.add(&t.blocks[i][k].mul(&s.blocks[k][j])?)?;
            }
            row.push(acc);
        }
        blocks.push(row);
    }
    Ok(AdjointableOperator {
        descriptor: s.descriptor,
        in_rank: t.in_rank,
        out_rank: s.out_rank,
        blocks,
    })
}

/// Compose a chain applied right to left: `chain(&[A, B, C]) = A∘B∘C`.
pub fn op_chain(ops: &[&AdjointableOperator]) -> Result<AdjointableOperator> {
    let (last, rest) = ops.split_last().ok_or_else(|| GFrameError::Input("empty chain".into()))?;
    let mut acc = (*last).clone();
    for op in rest.iter().rev() {
        acc = op_compose(op, &acc)?;
    }
    Ok(acc)
}

pub fn op_norm(t: &AdjointableOperator) -> f64 {
    dense::spectral_norm(&t.flatten())
}

/// Largest `m` with `m‖x‖ ≤ ‖Tx‖` for all `x`, i.e. σ_min of the flattened
/// map acting on row vectors.
pub fn bounded_below_constant(t: &AdjointableOperator) -> f64 {
    if t.in_rank > t.out_rank {
        return 0.0;
    }
    dense::sigma_min(&t.flatten())
}

/// `T⁻¹`, subject to the conditioning cap.
pub fn op_inverse(t: &AdjointableOperator, cond_cap: f64) -> Result<AdjointableOperator> {
    if t.in_rank != t.out_rank {
        return Err(GFrameError::Domain("non-square operator has no inverse".into()));
    }
    AdjointableOperator::from_flat(t.descriptor, &dense::inverse(&t.flatten(), cond_cap)?)
}

/// Positive square root of a positive operator.
pub fn op_sqrt_positive(t: &AdjointableOperator, tol: f64) -> Result<AdjointableOperator> {
    let f = t.flatten();
    if t.in_rank != t.out_rank || !dense::is_psd(&f, tol) {
        return Err(GFrameError::Domain("square root requested for a non-positive operator".into()));
    }
    AdjointableOperator::from_flat(t.descriptor, &dense::psd_sqrt(&f))
}

/// `T^{-1/2}` for a positive invertible operator.
pub fn op_inv_sqrt(t: &AdjointableOperator, tol: f64) -> Result<AdjointableOperator> {
    let checks = positive_part_checks(t, tol);
    if !(checks.positive && checks.invertible) {
        return Err(GFrameError::Domain("inverse square root needs a positive invertible operator".into()));
    }
    AdjointableOperator::from_flat(t.descriptor, &dense::pd_inv_sqrt(&t.flatten()))
}

/// `‖S − T‖`.
pub fn op_distance(s: &AdjointableOperator, t: &AdjointableOperator) -> Result<f64> {
    Ok(op_norm(&s.sub(t)?))
}

/// `‖ST − TS‖`.
pub fn commutator_norm(s: &AdjointableOperator, t: &AdjointableOperator) -> Result<f64> {
    op_distance(&op_compose(s, t)?, &op_compose(t, s)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivePartChecks {
    pub self_adjoint: bool,
    pub positive: bool,
    pub invertible: bool,
    pub lower: f64,
    pub upper: f64,
}

/// Hermitian-ness, positivity, invertibility and spectral range of a square
/// operator, all decided on its flattening. For non-square input everything
/// is false and the range is `[0, ‖T‖²]` of `T T*`.
pub fn positive_part_checks(t: &AdjointableOperator, tol: f64) -> PositivePartChecks {
    let f = t.flatten();
    if t.in_rank != t.out_rank {
        return PositivePartChecks {
            self_adjoint: false,
            positive: false,
            invertible: false,
            lower: 0.0,
            upper: dense::spectral_norm(&f).powi(2),
        };
    }
    let scale = dense::spectral_norm(&f).max(1.0);
    let self_adjoint = dense::hermitian_defect(&f) <= tol * scale;
    let eig = dense::hermitian_eigenvalues(&f);
    let lower = eig.first().copied().unwrap_or(0.0);
    let upper = eig.last().copied().unwrap_or(0.0);
    let positive = self_adjoint && lower >= -tol * scale;
    let invertible = dense::sigma_min(&f) > tol * scale;
    PositivePartChecks {
        self_adjoint,
        positive,
        invertible,
        lower,
        upper,
    }
}
