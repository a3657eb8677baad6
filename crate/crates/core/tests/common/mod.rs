#![allow(dead_code)]

use gframe::controlled_frames::{generate_unit_interval, random_system, Family, GFrameSystem, InstanceKind, RandomSpec, Symbol};
use gframe::dense::{CMatrix, C64};
use gframe::hilbert_module::{AdjointableOperator, ModuleVector};
use gframe::measure::MeasureSpace;
use gframe::star_algebra::{AlgebraDescriptor, AlgebraElement};

/// Block expansion written out by hand: block `(i, j)` of the result is the
/// `d×d` matrix of `t_ij`.
pub fn oracle_flatten(t: &AdjointableOperator) -> CMatrix {
    let d = t.descriptor().dim;
    let mut f = CMatrix::zeros(t.in_rank() * d, t.out_rank() * d);
    for i in 0..t.in_rank() {
        for j in 0..t.out_rank() {
            let e = t.block(i, j).to_matrix();
            for r in 0..d {
                for s in 0..d {
                    f[(i * d + r, j * d + s)] = e[(r, s)];
                }
            }
        }
    }
    f
}

pub fn oracle_row(x: &ModuleVector) -> CMatrix {
    let d = x.descriptor().dim;
    let mut f = CMatrix::zeros(d, x.rank() * d);
    for (i, a) in x.coords().iter().enumerate() {
        let m = a.to_matrix();
        for r in 0..d {
            for s in 0..d {
                f[(r, i * d + s)] = m[(r, s)];
            }
        }
    }
    f
}

/// Triple-loop product, kept apart from nalgebra's.
pub fn naive_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `Σ μ F_C F_Λ F_Λ^H F_{C'}`: the flattening of `Σ μ C'Λ*ΛC`.
pub fn oracle_frame_operator(sys: &GFrameSystem) -> CMatrix {
    let n = sys.module_rank() * sys.algebra().dim;
    let fc = oracle_flatten(sys.c());
    let fcp = oracle_flatten(sys.cp());
    let mut acc = CMatrix::zeros(n, n);
    for atom in sys.measure().atoms() {
        let fl = oracle_flatten(&sys.family()[&atom.label]);
        let term = naive_mul(&naive_mul(&naive_mul(&fc, &fl), &fl.adjoint()), &fcp);
        acc += term * C64::new(atom.weight, 0.0);
    }
    acc
}

/// Flattening of `Σ μ γ Λ*θ`.
pub fn oracle_multiplier(gamma: &Symbol, lam: &Family, theta: &Family, m: &MeasureSpace) -> CMatrix {
    let mut acc: Option<CMatrix> = None;
    for atom in m.atoms() {
        let term = naive_mul(&oracle_flatten(&theta[&atom.label]), &oracle_flatten(&lam[&atom.label]).adjoint())
            * (gamma[&atom.label] * atom.weight);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.expect("atoms")
}

/// `Σ μ⟨F_wCx, F_wC'x⟩` as a `d×d` matrix.
pub fn oracle_gram(sys: &GFrameSystem, family: &Family, x: &ModuleVector) -> CMatrix {
    let xr = oracle_row(x);
    let fc = oracle_flatten(sys.c());
    let fcp = oracle_flatten(sys.cp());
    let d = sys.algebra().dim;
    let mut acc = CMatrix::zeros(d, d);
    for atom in sys.measure().atoms() {
        let fl = oracle_flatten(&family[&atom.label]);
        let u = naive_mul(&naive_mul(&xr, &fc), &fl);
        let v = naive_mul(&naive_mul(&xr, &fcp), &fl);
        acc += naive_mul(&u, &v.adjoint()) * C64::new(atom.weight, 0.0);
    }
    acc
}

pub fn identity_frame(desc: AlgebraDescriptor, rank: usize) -> GFrameSystem {
    let mut fam = Family::new();
    fam.insert("w0".into(), AdjointableOperator::identity(desc, rank));
    GFrameSystem::uncontrolled(desc, rank, MeasureSpace::point("w0"), fam).unwrap()
}

pub fn unit_interval(alpha: f64, beta: f64, k: usize) -> GFrameSystem {
    generate_unit_interval(alpha, beta, k, 11).unwrap()
}

/// Seeded instance sweeping the algebra kinds and sizes.
pub fn seeded_spec(seed: u64, kind: InstanceKind) -> RandomSpec {
    let dim = 1 + (seed % 3) as usize;
    let algebra = if seed.is_multiple_of(2) {
        AlgebraDescriptor::matrix(dim)
    } else {
        AlgebraDescriptor::diagonal(2 + ((seed / 3) % 2) as usize)
    };
    RandomSpec {
        algebra,
        rank: 1 + ((seed / 2) % 4) as usize,
        atoms: 1 + ((seed * 5) % 8) as usize,
        kind,
    }
}

pub fn seeded_system(seed: u64, kind: InstanceKind) -> GFrameSystem {
    random_system(seeded_spec(seed, kind), seed).unwrap()
}

pub fn diag(desc: AlgebraDescriptor, d: &[f64]) -> AlgebraElement {
    AlgebraElement::from_real_diagonal(desc, d).unwrap()
}
