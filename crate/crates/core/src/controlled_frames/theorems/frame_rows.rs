//! Rows about frame operators, transforms and compositions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{self, c, CMatrix, C64};
use crate::error::Result;
use crate::hilbert_module::{
    bounded_below_constant, inner_product, op_adjoint, op_apply, op_chain, op_compose, op_norm,
    AdjointableOperator, ModuleVector,
};
use crate::report::{ReportBuilder, TheoremReport};
use crate::star_algebra::{AlgebraElement, AlgebraKind};

use super::super::generate::{
    commutant_generator, commutant_operator, random_unitary, well_conditioned_operator,
};
use super::super::system::{bessel_bound, frame_operator, map_family, spectral_range, Family, GFrameSystem};
use super::super::transform::{
    analysis, analysis_operator, direct_sum_inner, stack, synthesis, uncontrolled_analysis_operator,
    DirectSumVector, StackLayout,
};
use super::{op_res, psd_violation, rel_comm, Ctx, Mutation};

const SAMPLES: usize = 20;

fn random_direct_sum<R: Rng + ?Sized>(sys: &GFrameSystem, rng: &mut R) -> DirectSumVector {
    sys.members()
        .map(|(a, op)| (a.label.clone(), ModuleVector::random(sys.algebra(), op.out_rank(), rng)))
        .collect()
}

/// Residual of `C = cI` for some real `c`.
fn scalar_control_defect(t: &AdjointableOperator) -> f64 {
    let z = t.block(0, 0).entries()[0];
    let s = AdjointableOperator::scalar(t.descriptor(), t.in_rank(), c(z.re, 0.0));
    op_res(t, &s).unwrap_or(f64::INFINITY)
}

pub(super) fn require_scalar_controls(ctx: &mut Ctx) {
    let sys = ctx.sys.clone();
    let lim = ctx.lim(op_norm(sys.c()).max(op_norm(sys.cp())));
    ctx.b.hyp("C is a multiple of the identity", scalar_control_defect(sys.c()), lim);
    ctx.b.hyp("C' is a multiple of the identity", scalar_control_defect(sys.cp()), lim);
}

fn require_same_controls(ctx: &mut Ctx) {
    let sys = ctx.sys.clone();
    ctx.b.hyp("C = C'", sys.control_gap(), ctx.lim(op_norm(sys.c())));
}

pub(super) fn t23(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let t = analysis_operator(&sys)?;
    let sigma = bounded_below_constant(&t);
    let norm = op_norm(&t);
    let surj = dense::sigma_min(&t.flatten().adjoint());
    ctx.b.info("a", a);
    ctx.b.info("b", b);
    ctx.b.info("sigma_min_T", sigma);
    ctx.b.info("norm_T", norm);
    let lim = ctx.lim(b);
    ctx.b.check("injective and bounded below: σ_min(T) ≥ a", (a - sigma).max(0.0), lim);
    ctx.b.check_flag("closed range: σ_min(T) > 0", sigma > lim);
    ctx.b.check("‖T‖ ≤ b", (norm - b).max(0.0), lim);
    ctx.b.check_flag("T* surjective: σ_min(T*) > 0", surj > lim);
    let s = frame_operator(&sys);
    ctx.b.check("T*T = S", op_res(&op_compose(&op_adjoint(&t), &t)?, &s)?, ctx.lim(b * b));
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let x = ModuleVector::random(sys.algebra(), sys.module_rank(), &mut ctx.rng);
        let y = random_direct_sum(&sys, &mut ctx.rng);
        let lhs = direct_sum_inner(&sys, &analysis(&sys, &x)?, &y)?;
        let rhs = inner_product(&x, &synthesis(&sys, &y)?)?;
        let scale = crate::hilbert_module::scalar_norm(&x) * direct_sum_inner(&sys, &y, &y)?.norm().sqrt();
        worst = worst.max(lhs.distance(&rhs)? / scale.max(1.0));
    }
    ctx.b.check("⟨Tx, y⟩ = ⟨x, T*y⟩ on samples", worst, ctx.lim(b));
    Ok(())
}

fn operator_properties(ctx: &mut Ctx, target: &GFrameSystem, a: f64, b: f64) {
    let s = frame_operator(target);
    let f = s.flatten();
    let (lo, _) = spectral_range(&s);
    let norm = op_norm(&s);
    let lim = ctx.lim(b * b);
    ctx.b.info("norm_S", norm);
    ctx.b.info("lambda_min_S", lo);
    ctx.b.check("self-adjoint", dense::hermitian_defect(&f), lim);
    ctx.b.check("positive", psd_violation(&f), lim);
    ctx.b.check("invertible: λ_min(S) ≥ a²", (a * a - lo).max(0.0), lim);
    ctx.b.check("bounded: ‖S‖ ≤ b²", (norm - b * b).max(0.0), lim);
    ctx.b.check("‖S‖ ≥ a²", (a * a - norm).max(0.0), lim);
}

pub(super) fn fo_props(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let target = ctx.conclusion_system()?;
    operator_properties(ctx, &target, a, b);
    Ok(())
}

pub(super) fn scc_props(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let target = ctx.conclusion_system()?;
    operator_properties(ctx, &target, a, b);
    let s = frame_operator(&target);
    let composite = analysis_operator(&target)
        .and_then(|t| op_res(&op_compose(&op_adjoint(&t), &t)?, &s));
    let lim = ctx.lim(b * b);
    ctx.b.check_result("synthesis∘analysis = S", composite, lim);
    Ok(())
}

pub(super) fn t_t3(ctx: &mut Ctx) -> Result<()> {
    require_same_controls(ctx);
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "(C,C)-controlled") else {
        return Ok(());
    };
    let unc = sys.without_controls()?;
    let Some((a0, b0)) = ctx.require_frame(&unc, "uncontrolled") else {
        return Ok(());
    };
    let (cmin, cmax) = spectral_range(sys.c());
    ctx.b.info("a", a);
    ctx.b.info("b", b);
    ctx.b.info("a0", a0);
    ctx.b.info("b0", b0);
    ctx.b.info("norm_C", cmax);
    ctx.b.info("norm_C_inv", 1.0 / cmin);
    ctx.certify_bounds(&sys, a0 * cmin, b0 * cmax, "uncontrolled ⇒ controlled")?;
    ctx.certify_bounds(&unc, a / cmax, b / cmin, "controlled ⇒ uncontrolled")?;
    Ok(())
}

pub(super) fn t_tt(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((_, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let t = analysis_operator(&sys)?;
    let tt = op_compose(&op_adjoint(&t), &t)?;
    let lower = 1.0 / op_norm(&super::inv(&tt)?);
    let upper = op_norm(&t).powi(2);
    ctx.b.info("lower", lower);
    ctx.b.info("upper", upper);
    ctx.b.check("T*T = S", op_res(&tt, &frame_operator(&sys))?, ctx.lim(b * b));
    let target = ctx.conclusion_system()?;
    ctx.certify_bounds(&target, lower.sqrt(), upper.sqrt(), "bounds ‖(T*T)⁻¹‖⁻¹, ‖T‖²")
}

pub(super) fn bessel_comp(ctx: &mut Ctx) -> Result<()> {
    require_same_controls(ctx);
    let sys = ctx.sys.clone();
    let b_gamma = bessel_bound(&sys);
    ctx.b.hyp_flag("Γ is Bessel", b_gamma.is_finite());
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let n = sys.module_rank();
    let lam: Family = sys
        .members()
        .map(|(a, op)| (a.label.clone(), AdjointableOperator::random(sys.algebra(), n, op.out_rank(), &mut ctx.rng)))
        .collect();
    let b1 = lam.values().map(op_norm).fold(0.0_f64, f64::max);
    let b_lambda = GFrameSystem::uncontrolled(sys.algebra(), n, sys.measure().clone(), lam.clone())
        .map(|s| bessel_bound(&s))?;
    let comp = map_family(sys.family(), |label, g| op_compose(&op_adjoint(&lam[label]), g))?;
    let comp_sys = sys.with_family(comp)?;
    let (_, hi) = spectral_range(&frame_operator(&comp_sys));
    let bound = b1 * b_gamma;
    ctx.b.info("sup_norm_lambda", b1);
    ctx.b.info("bessel_gamma", b_gamma);
    ctx.b.info("bessel_lambda", b_lambda);
    ctx.b.info("composite_bessel", hi.max(0.0).sqrt());
    ctx.b.info("bessel_bound_reading", b_lambda * b_gamma);
    ctx.b.info(
        "bessel_bound_reading_holds",
        if hi <= (b_lambda * b_gamma).powi(2) * (1.0 + ctx.tol()) { 1.0 } else { 0.0 },
    );
    ctx.b.check(
        "λ_max(S_comp) ≤ (sup‖Λ_w‖·b_Γ)²",
        (hi - bound * bound).max(0.0),
        ctx.lim(bound * bound),
    );
    Ok(())
}

pub(super) fn th_surj(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let tol = ctx.tol();
    ctx.b.hyp(
        "controls commute with each other and with Λ*Λ",
        sys.controls().each_other_residual.max(sys.controls().family_residual),
        tol,
    );
    let t0 = uncontrolled_analysis_operator(&sys)?;
    let nu = bounded_below_constant(&t0);
    let theta_norm = op_norm(&t0);
    ctx.b.hyp_flag("θ = Σ μ Λ* surjective", nu > ctx.lim(theta_norm));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let (pmin, _) = spectral_range(&op_compose(sys.cp(), sys.c())?);
    let (_, cmax) = spectral_range(sys.c());
    let (_, cpmax) = spectral_range(sys.cp());
    let a = nu * pmin.sqrt();
    let b = theta_norm * (cmax * cpmax).sqrt();
    ctx.b.info("nu", nu);
    ctx.b.info("norm_theta", theta_norm);
    ctx.b.info("uncontrolled_lower_sq", nu * nu);
    ctx.b.info("uncontrolled_upper_sq", theta_norm * theta_norm);
    ctx.certify_bounds(&sys, a, b, "controlled bounds ν·λ_min(C'C)^{1/2}, ‖θ‖(‖C‖‖C'‖)^{1/2}")
}

pub(super) fn f_kt(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let n = sys.module_rank();
    let gamma: Family = sys
        .members()
        .map(|(a, op)| (a.label.clone(), AdjointableOperator::random(sys.algebra(), n, op.out_rank(), &mut ctx.rng)))
        .collect();
    let gsys = sys.with_family(gamma)?;
    let b_gamma = bessel_bound(&gsys);
    ctx.b.hyp_flag("Γ is Bessel", b_gamma.is_finite());
    let layout = StackLayout::of(&sys);
    let t = stack(&layout, sys.family())?;
    let k = op_adjoint(&stack(&layout, gsys.family())?);
    let mut f = AdjointableOperator::zero(sys.algebra(), n, n);
    for (atom, lam) in sys.members() {
        let term = op_compose(&op_adjoint(&gsys.family()[&atom.label]), lam)?;
        f = f.add(&term.scale_real(atom.weight))?;
    }
    let sigma_f = dense::sigma_min(&f.flatten());
    ctx.b.hyp_flag("F = Σ μ Γ*Λ surjective", sigma_f > ctx.lim(op_norm(&f)));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let norm_t = op_norm(&t);
    let sigma_k = bounded_below_constant(&op_adjoint(&k));
    let (pmin, _) = spectral_range(&op_compose(sys.cp(), sys.c())?);
    let a_gamma = sigma_k * pmin.sqrt();
    ctx.b.info("sigma_min_F", sigma_f);
    ctx.b.info("a_gamma", a_gamma);
    ctx.b.info("b_gamma", b_gamma);
    ctx.b.check("F = K∘T", op_res(&f, &op_compose(&k, &t)?)?, ctx.lim(op_norm(&f)));
    ctx.b.check("σ_min(K*) ≥ σ_min(F)/‖T‖", (sigma_f / norm_t - sigma_k).max(0.0), ctx.lim(1.0));
    ctx.b.check_flag("Γ lower bound positive", a_gamma > ctx.tol());
    ctx.certify_bounds(&gsys, a_gamma, b_gamma, "Γ frame")
}

/// Desk-scale *-homomorphisms together with the matching intertwiner.
enum Hom {
    Identity(C64),
    Unitary(CMatrix),
    Permutation(Vec<usize>),
}

impl Hom {
    fn name(&self) -> &'static str {
        match self {
            Hom::Identity(_) => "identity",
            Hom::Unitary(_) => "unitary_conjugation",
            Hom::Permutation(_) => "diagonal_permutation",
        }
    }

    fn phi(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        match self {
            Hom::Identity(_) => Ok(a.clone()),
            Hom::Unitary(u) => AlgebraElement::from_matrix(a.descriptor(), &(u * a.to_matrix() * u.adjoint())),
            Hom::Permutation(p) => {
                let e = a.entries();
                AlgebraElement::new(a.descriptor(), p.iter().map(|&i| e[i]).collect())
            }
        }
    }

    fn theta(&self, x: &ModuleVector) -> Result<ModuleVector> {
        match self {
            Hom::Identity(z) => Ok(x.scale(*z)),
            _ => ModuleVector::new(x.coords().iter().map(|a| self.phi(a)).collect::<Result<_>>()?),
        }
    }

    fn transport(&self, t: &AdjointableOperator) -> Result<AdjointableOperator> {
        AdjointableOperator::from_blocks(
            t.blocks()
                .iter()
                .map(|row| row.iter().map(|b| self.phi(b)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        )
    }
}

pub(super) fn hom_transport(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let desc = sys.algebra();
    let unitary_ok = desc.kind == AlgebraKind::Matrix && desc.dim >= 2;
    let perm_ok = desc.kind == AlgebraKind::Diagonal && desc.dim >= 2;
    let class = ctx.seed % 3;
    let hom = if class == 0 || !(unitary_ok || perm_ok) {
        Hom::Identity(C64::from_polar(1.0, ctx.rng.random_range(0.0..std::f64::consts::TAU)))
    } else if unitary_ok {
        Hom::Unitary(random_unitary(desc.dim, &mut ctx.rng))
    } else {
        let mut p: Vec<usize> = (0..desc.dim).collect();
        use rand::seq::SliceRandom;
        p.shuffle(&mut ctx.rng);
        Hom::Permutation(p)
    };
    ctx.b.note(format!("homomorphism class: {}", hom.name()));
    let Some((a, b)) = ctx.require_frame(&sys, "Λ over A") else {
        return Ok(());
    };
    let fam_b = map_family(sys.family(), |_, op| hom.transport(op))?;
    let bsys = GFrameSystem::new(
        desc,
        sys.module_rank(),
        sys.measure().clone(),
        fam_b,
        hom.transport(sys.c())?,
        hom.transport(sys.cp())?,
    )?;
    let (mut hom_def, mut star_def, mut ip_def, mut tw_def) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..SAMPLES {
        let p = AlgebraElement::random(desc, &mut ctx.rng);
        let q = AlgebraElement::random(desc, &mut ctx.rng);
        hom_def = hom_def.max(hom.phi(&p.mul(&q)?)?.distance(&hom.phi(&p)?.mul(&hom.phi(&q)?)?)?);
        star_def = star_def.max(hom.phi(&p.adjoint())?.distance(&hom.phi(&p)?.adjoint())?);
        let x = ModuleVector::random(desc, sys.module_rank(), &mut ctx.rng);
        let y = ModuleVector::random(desc, sys.module_rank(), &mut ctx.rng);
        let lhs = inner_product(&hom.theta(&x)?, &hom.theta(&y)?)?;
        ip_def = ip_def.max(lhs.distance(&hom.phi(&inner_product(&x, &y)?)?)?);
        for (atom, op) in sys.members() {
            let left = op_apply(&bsys.family()[&atom.label], &hom.theta(&x)?)?;
            let right = hom.theta(&op_apply(op, &x)?)?;
            tw_def = tw_def.max(crate::hilbert_module::scalar_norm(&left.sub(&right)?));
        }
    }
    let lim = ctx.lim(10.0);
    ctx.b.hyp("φ multiplicative", hom_def, lim);
    ctx.b.hyp("φ preserves adjoints", star_def, lim);
    ctx.b.hyp("⟨θx, θy⟩ = φ(⟨x, y⟩)", ip_def, lim);
    ctx.b.hyp("θΛ_w = Λ_wθ", tw_def, lim);
    ctx.b.hyp_flag("θ surjective", true);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    ctx.certify_bounds(&bsys, a, b, "frame over B with bounds φ(A), φ(B)")?;
    let sa = frame_operator(&sys);
    let sb = frame_operator(&bsys);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let x = ModuleVector::random(desc, sys.module_rank(), &mut ctx.rng);
        let y = ModuleVector::random(desc, sys.module_rank(), &mut ctx.rng);
        let lhs = inner_product(&op_apply(&sb, &hom.theta(&x)?)?, &hom.theta(&y)?)?;
        let rhs = hom.phi(&inner_product(&op_apply(&sa, &x)?, &y)?)?;
        worst = worst.max(lhs.distance(&rhs)? / (1.0 + lhs.norm()));
    }
    ctx.b.check("⟨S_Bθx, θy⟩ = φ(⟨S_Ax, y⟩)", worst, ctx.lim(b * b));
    Ok(())
}

pub(super) fn left_comp(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    let n = sys.module_rank();
    ctx.b.hyp_flag("every V_w equals A^n", sys.out_ranks().iter().all(|&m| m == n));
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let theta = well_conditioned_operator(sys.algebra(), n, &mut ctx.rng);
    let m = bounded_below_constant(&theta);
    ctx.b.hyp_flag("θ invertible", m > ctx.lim(op_norm(&theta)));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let nsys = sys.with_family(map_family(sys.family(), |_, op| op_compose(&theta, op))?)?;
    ctx.b.info("norm_theta_inv_inv", m);
    ctx.b.info("norm_theta", op_norm(&theta));
    ctx.certify_bounds(&nsys, m * a, op_norm(&theta) * b, "θΛ bounds ‖θ⁻¹‖⁻¹A, ‖θ‖B")
}

fn right_comp_core(ctx: &mut Ctx, theta: &AdjointableOperator) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let tol = ctx.tol();
    ctx.b.hyp("θ commutes with C", rel_comm(theta, sys.c())?, tol);
    ctx.b.hyp("θ commutes with C'", rel_comm(theta, sys.cp())?, tol);
    let m = bounded_below_constant(theta);
    let norm = op_norm(theta);
    ctx.b.hyp_flag("θ invertible", m > ctx.lim(norm));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let s = frame_operator(&sys);
    let expected = op_chain(&[&op_adjoint(theta), &s, theta])?;
    let target = ctx.conclusion_system()?;
    let nsys = target.with_family(map_family(target.family(), |_, op| op_compose(op, theta))?)?;
    let s_new = frame_operator(&nsys);
    ctx.b.info("norm_theta", norm);
    ctx.b.info("sigma_min_theta", m);
    ctx.b.check("S_{Λθ} = θ*Sθ", op_res(&s_new, &expected)?, ctx.lim(b * b * norm * norm));
    ctx.certify_bounds(&nsys, m * a, norm * b, "Λθ bounds")
}

pub(super) fn right_comp(ctx: &mut Ctx) -> Result<()> {
    let h = commutant_generator(&ctx.sys, false)?;
    let theta = commutant_operator(&h, &mut ctx.rng)?;
    right_comp_core(ctx, &theta)
}

/// The right-composition row with a caller-chosen `θ`.
pub fn right_composition_report(
    sys: &GFrameSystem,
    theta: &AdjointableOperator,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    let mut ctx = Ctx {
        sys: sys.clone(),
        seed,
        mutation: Mutation::None,
        rng: ChaCha8Rng::seed_from_u64(seed),
        mut_rng: ChaCha8Rng::seed_from_u64(seed),
        b: ReportBuilder::new("RIGHT-COMP", seed, tol),
    };
    if let Err(e) = right_comp_core(&mut ctx, theta) {
        if ctx.b.hypotheses_ok() {
            ctx.b.check("evaluation completed", f64::INFINITY, 0.0);
        }
        ctx.b.note(e.to_string());
    }
    Ok(ctx.b.finish())
}

pub(super) fn any_frame_controlled(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let unc = sys.without_controls()?;
    let Some((a0, b0)) = ctx.require_frame(&unc, "uncontrolled") else {
        return Ok(());
    };
    let tol = ctx.tol();
    ctx.b.hyp(
        "controls commute with each other and with Λ*Λ",
        sys.controls().each_other_residual.max(sys.controls().family_residual),
        tol,
    );
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let (cmin, cmax) = spectral_range(sys.c());
    let (cpmin, cpmax) = spectral_range(sys.cp());
    let (lo, hi) = spectral_range(&frame_operator(&sys));
    let stated_lower = a0 * cmax * cpmax;
    let stated_upper = b0 * cmax * cpmax;
    ctx.b.info("stated_lower", stated_lower);
    ctx.b.info("stated_upper", stated_upper);
    ctx.b.info("stated_lower_holds", if stated_lower.powi(2) <= lo * (1.0 + tol) { 1.0 } else { 0.0 });
    ctx.b.info("stated_upper_holds", if hi <= stated_upper.powi(2) * (1.0 + tol) { 1.0 } else { 0.0 });
    ctx.certify_bounds(
        &sys,
        a0 * (cmin * cpmin).sqrt(),
        b0 * (cmax * cpmax).sqrt(),
        "bounds a0·(λ_min(C)λ_min(C'))^{1/2}, b0·(‖C‖‖C'‖)^{1/2}",
    )
}

pub(super) fn lambda_t(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let h = commutant_generator(&sys, false)?;
    let t = commutant_operator(&h, &mut ctx.rng)?;
    let tol = ctx.tol();
    ctx.b.hyp("T commutes with C", rel_comm(&t, sys.c())?, tol);
    ctx.b.hyp("T commutes with C'", rel_comm(&t, sys.cp())?, tol);
    let m = bounded_below_constant(&t);
    ctx.b.hyp_flag("T invertible", m > ctx.lim(op_norm(&t)));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let nsys = sys.with_family(map_family(sys.family(), |_, op| op_compose(op, &t))?)?;
    ctx.b.info("m", m);
    ctx.b.info("norm_T", op_norm(&t));
    ctx.certify_bounds(&nsys, a * m, b * op_norm(&t), "ΛT bounds (Am, B‖T‖)")
}
