//! Dual families: canonical duals, operator duals and their certification.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GFrameError, Result};
use crate::hilbert_module::{
    op_adjoint, op_apply, op_chain, op_compose, op_inverse, scalar_norm, AdjointableOperator,
    ModuleVector,
};
use crate::star_algebra::DEFAULT_COND_CAP;

use super::system::{frame_operator, map_family, optimal_scalar_bounds, Family, GFrameSystem};
use super::transform::{stack, unstack, StackLayout};

/// Relative tolerance for reconstruction identities.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Number of seeded unit vectors a reconstruction is tested on.
pub const RECONSTRUCTION_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualCertificate {
    pub dual_family: Family,
    pub corresponding_k: Option<AdjointableOperator>,
    /// `sup ‖x − Rx‖/‖x‖` over the test vectors.
    pub reconstruction_residual: f64,
    /// Same quantity for Λ as an operator dual of Γ with `K*`.
    pub converse_residual: Option<f64>,
    pub passed: bool,
}

/// `Σ μ_w C'Λ*_wΓ_wKC`.
pub fn reconstruction_operator(
    sys: &GFrameSystem,
    dual: &Family,
    k: Option<&AdjointableOperator>,
) -> Result<AdjointableOperator> {
    let n = sys.module_rank();
    let id = AdjointableOperator::identity(sys.algebra(), n);
    let k = k.unwrap_or(&id);
    let mut acc = AdjointableOperator::zero(sys.algebra(), n, n);
    for (atom, op) in sys.members() {
        let g = dual
            .get(&atom.label)
            .ok_or_else(|| GFrameError::Input(format!("dual family misses atom {:?}", atom.label)))?;
        let adj = op_adjoint(op);
        let term = op_chain(&[sys.cp(), &adj, g, k, sys.c()])?;
        acc = acc.add(&term.scale_real(atom.weight))?;
    }
    Ok(acc)
}

/// `Σ μ_w C'Γ*_wΛ_wK*C`, the reconstruction with the roles of the families
/// exchanged.
pub fn converse_reconstruction_operator(
    sys: &GFrameSystem,
    dual: &Family,
    k: &AdjointableOperator,
) -> Result<AdjointableOperator> {
    let swapped = sys.with_family(dual.clone())?;
    reconstruction_operator(&swapped, sys.family(), Some(&op_adjoint(k)))
}

/// `max ‖Ex‖/‖x‖` over `samples` seeded unit vectors.
pub fn sampled_gain(e: &AdjointableOperator, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = ModuleVector::random_unit(e.descriptor(), e.in_rank(), &mut rng);
        let nx = scalar_norm(&x);
        if nx > 0.0 {
            worst = worst.max(scalar_norm(&op_apply(e, &x)?) / nx);
        }
    }
    Ok(worst)
}

/// Relative residual of `x = Rx` on the standard sample set.
pub fn reconstruction_residual(r: &AdjointableOperator, seed: u64) -> Result<f64> {
    let id = AdjointableOperator::identity(r.descriptor(), r.in_rank());
    sampled_gain(&id.sub(r)?, RECONSTRUCTION_SAMPLES, seed)
}

/// `Γ_w = Λ_w∘S⁻¹`, certified by reconstruction.
pub fn canonical_dual(sys: &GFrameSystem, seed: u64) -> Result<DualCertificate> {
    let fb = optimal_scalar_bounds(sys, crate::star_algebra::DEFAULT_TOL)?;
    if !fb.frame {
        return Err(GFrameError::Domain("canonical dual needs a frame, system is Bessel-only".into()));
    }
    let s_inv = op_inverse(&frame_operator(sys), DEFAULT_COND_CAP)?;
    let dual = map_family(sys.family(), |_, op| op_compose(op, &s_inv))?;
    let residual = reconstruction_residual(&reconstruction_operator(sys, &dual, None)?, seed)?;
    Ok(DualCertificate {
        dual_family: dual,
        corresponding_k: None,
        reconstruction_residual: residual,
        converse_residual: None,
        passed: residual <= RECONSTRUCTION_TOL,
    })
}

/// Certify `x = Σ μ C'Λ*_wΓ_wKCx` and report the exchanged identity with
/// `K*`. The certificate passes on the forward identity alone.
pub fn operator_dual_check(
    sys: &GFrameSystem,
    dual: &Family,
    k: &AdjointableOperator,
    seed: u64,
) -> Result<DualCertificate> {
    op_inverse(k, DEFAULT_COND_CAP)?;
    let forward = reconstruction_residual(&reconstruction_operator(sys, dual, Some(k))?, seed)?;
    let converse = reconstruction_residual(&converse_reconstruction_operator(sys, dual, k)?, seed)?;
    Ok(DualCertificate {
        dual_family: dual.clone(),
        corresponding_k: Some(k.clone()),
        reconstruction_residual: forward,
        converse_residual: Some(converse),
        passed: forward <= RECONSTRUCTION_TOL,
    })
}

/// An operator dual of Λ with operator `K`, for arbitrary controls:
/// `stack(Γ) = T₀S₀⁻¹C'⁻¹C⁻¹K⁻¹ + (I − T₀S₀⁻¹T₀*)φ` where `T₀` stacks the
/// uncontrolled family and `φ: A^n → A^M` is free.
pub fn operator_dual_family(
    sys: &GFrameSystem,
    k: &AdjointableOperator,
    phi: &AdjointableOperator,
) -> Result<Family> {
    let layout = StackLayout::of(sys);
    let t0 = stack(&layout, sys.family())?;
    let t0_adj = op_adjoint(&t0);
    let s0_inv = op_inverse(&op_compose(&t0_adj, &t0)?, DEFAULT_COND_CAP)?;
    let m = op_chain(&[
        &op_inverse(sys.cp(), DEFAULT_COND_CAP)?,
        &op_inverse(sys.c(), DEFAULT_COND_CAP)?,
        &op_inverse(k, DEFAULT_COND_CAP)?,
    ])?;
    let particular = op_chain(&[&t0, &s0_inv, &m])?;
    let proj = AdjointableOperator::identity(sys.algebra(), layout.total).sub(&op_chain(&[&t0, &s0_inv, &t0_adj])?)?;
    let r = particular.add(&op_compose(&proj, phi)?)?;
    unstack(&layout, &r)
}

/// The zero map `A^n → A^M` for this system's layout.
pub fn zero_free_part(sys: &GFrameSystem) -> AdjointableOperator {
    let total = StackLayout::of(sys).total;
    AdjointableOperator::zero(sys.algebra(), sys.module_rank(), total)
}

/// `Σ_w` of per-atom output ranks, for callers sizing free parts.
pub fn stacked_rank(sys: &GFrameSystem) -> usize {
    StackLayout::of(sys).total
}

