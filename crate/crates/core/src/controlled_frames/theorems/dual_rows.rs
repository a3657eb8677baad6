//! Rows about duals, operator duals and right inverses of synthesis.

use crate::dense::{self, c, C64};
use crate::error::Result;
use crate::hilbert_module::{
    op_adjoint, op_chain, op_compose, op_norm, bounded_below_constant, AdjointableOperator,
};
use crate::star_algebra::{AlgebraElement, AlgebraKind};

use super::super::duals::{converse_reconstruction_operator, operator_dual_family, reconstruction_operator};
use super::super::generate::{
    commutant_generator, commutant_operator, spectral_projection, well_conditioned_operator,
};
use super::super::system::{frame_operator, map_family, spectral_range, Family, GFrameSystem};
use super::super::transform::{
    analysis_operator, control_root, stack, uncontrolled_analysis_operator, unstack, unstack_one, StackLayout,
};
use super::frame_rows::require_scalar_controls;
use super::{identity_defect, inv, op_res, psd_violation, rel_comm, Ctx};

use rand::Rng;

/// Slack for reconstruction identities: conditioning of the inverses involved
/// costs a few digits.
fn recon_lim(ctx: &Ctx) -> f64 {
    ctx.lim(100.0)
}

fn op_dual_residual(sys: &GFrameSystem, dual: &Family, k: &AdjointableOperator) -> Result<f64> {
    identity_defect(&reconstruction_operator(sys, dual, Some(k))?)
}

fn random_like(sys: &GFrameSystem, rng: &mut impl Rng) -> Family {
    sys.members()
        .map(|(a, op)| {
            (a.label.clone(), AdjointableOperator::random(sys.algebra(), sys.module_rank(), op.out_rank(), rng))
        })
        .collect()
}

fn random_free_part(sys: &GFrameSystem, rng: &mut impl Rng) -> AdjointableOperator {
    let total = StackLayout::of(sys).total;
    AdjointableOperator::random(sys.algebra(), sys.module_rank(), total, rng)
}

fn canonical(sys: &GFrameSystem) -> Result<Family> {
    let s_inv = inv(&frame_operator(sys))?;
    map_family(sys.family(), |_, op| op_compose(op, &s_inv))
}

fn right_compose(fam: &Family, t: &AdjointableOperator) -> Result<Family> {
    map_family(fam, |_, op| op_compose(op, t))
}

pub(super) fn dual_sim(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let q = well_conditioned_operator(sys.algebra(), sys.module_rank(), &mut ctx.rng);
    let q_adj = op_adjoint(&q);
    let q_inv = inv(&q)?;
    let moved = sys.with_family(right_compose(sys.family(), &q_adj)?)?;
    if ctx.require_frame(&moved, "ΛQ*").is_none() {
        return Ok(());
    }
    let lim = recon_lim(ctx);
    let target = ctx.conclusion_system()?;

    let pulled = right_compose(&canonical(&moved)?, &q)?;
    let r1 = identity_defect(&reconstruction_operator(&target, &pulled, None)?)?;
    ctx.b.check("canonical dual of ΛQ*, composed with Q, is a dual of Λ", r1, lim);

    let pushed = right_compose(&canonical(&sys)?, &q_inv)?;
    let target_moved = target.with_family(right_compose(target.family(), &q_adj)?)?;
    let r2 = identity_defect(&reconstruction_operator(&target_moved, &pushed, None)?)?;
    ctx.b.check("canonical dual of Λ, composed with Q⁻¹, is a dual of ΛQ*", r2, lim);
    Ok(())
}

pub(super) fn eq_frame_op(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    let Some((_, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let gsys = sys.with_family(random_like(&sys, &mut ctx.rng))?;
    if ctx.require_frame(&gsys, "Γ").is_none() {
        return Ok(());
    }
    let tol = ctx.tol();
    let s_l = frame_operator(&sys);
    let s_g = frame_operator(&gsys);
    let q = op_compose(
        &crate::hilbert_module::op_sqrt_positive(&s_l, tol)?,
        &crate::hilbert_module::op_inv_sqrt(&s_g, tol)?,
    )?;
    let q_inv = inv(&q)?;
    ctx.b.info("cond_Q", op_norm(&q) * op_norm(&q_inv));
    let moved = gsys.with_family(right_compose(gsys.family(), &op_adjoint(&q))?)?;
    let target = ctx.conclusion_system()?;
    ctx.b.check(
        "S_{ΓQ*} = S_Λ",
        op_res(&frame_operator(&moved), &frame_operator(&target))?,
        ctx.lim(b * b),
    );
    let dual = right_compose(&canonical(&gsys)?, &q_inv)?;
    let r = identity_defect(&reconstruction_operator(&moved, &dual, None)?)?;
    ctx.b.check("canonical dual of Γ, composed with Q⁻¹, is a dual of ΓQ*", r, recon_lim(ctx));
    Ok(())
}

pub(super) fn op_dual_corr(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let n = sys.module_rank();
    let k = well_conditioned_operator(sys.algebra(), n, &mut ctx.rng);
    let phi = random_free_part(&sys, &mut ctx.rng);
    let gamma = operator_dual_family(&sys, &k, &phi)?;
    let lim = recon_lim(ctx);
    ctx.b.hyp("Γ is an operator dual of Λ with K", op_dual_residual(&sys, &gamma, &k)?, lim);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let q = well_conditioned_operator(sys.algebra(), n, &mut ctx.rng);
    let q_adj = op_adjoint(&q);
    let q_adj_inv = inv(&q_adj)?;
    let q_inv = inv(&q)?;

    let moved = sys.with_family(right_compose(sys.family(), &q_adj)?)?;
    let gamma_moved = right_compose(&gamma, &q_adj)?;
    let k_moved = op_chain(&[&q_adj_inv, &k, &q_inv])?;
    let r1 = op_dual_residual(&moved, &gamma_moved, &ctx.conclusion_k(&k_moved))?;
    ctx.b.check("ΓQ* is an operator dual of ΛQ* with (Q*)⁻¹KQ⁻¹", r1, lim);

    let phi2 = random_free_part(&moved, &mut ctx.rng);
    let gamma2 = operator_dual_family(&moved, &k, &phi2)?;
    let back = right_compose(&gamma2, &q_adj)?;
    let k_back = op_chain(&[&q_adj_inv, &k, &q])?;
    let r2 = op_dual_residual(&sys, &back, &ctx.conclusion_k(&k_back))?;
    ctx.b.check("an operator dual of ΛQ*, composed with Q*, is one of Λ", r2, lim);
    Ok(())
}

pub(super) fn submodule(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    let Some((a, b)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let h = commutant_generator(&sys, true)?;
    let p = match spectral_projection(&h)? {
        Some(p) => p,
        None => {
            ctx.b.note("generator has a flat spectrum; using the whole module");
            AdjointableOperator::identity(sys.algebra(), sys.module_rank())
        }
    };
    let k = commutant_operator(&h, &mut ctx.rng)?;
    let s = frame_operator(&sys);
    let tol = ctx.tol();
    ctx.b.hyp("P self-adjoint", op_res(&p, &op_adjoint(&p))?, tol);
    ctx.b.hyp("P idempotent", op_res(&op_compose(&p, &p)?, &p)?, tol);
    ctx.b.hyp("P commutes with C", rel_comm(&p, sys.c())?, tol);
    ctx.b.hyp("P commutes with C'", rel_comm(&p, sys.cp())?, tol);
    ctx.b.hyp("P commutes with S", rel_comm(&p, &s)?, tol);
    ctx.b.hyp(
        "PKP = KP",
        op_res(&op_chain(&[&p, &k, &p])?, &op_compose(&k, &p)?)?,
        ctx.lim(op_norm(&k)),
    );
    let phi = random_free_part(&sys, &mut ctx.rng);
    let gamma = operator_dual_family(&sys, &k, &phi)?;
    let lim = recon_lim(ctx);
    ctx.b.hyp("Γ is an operator dual of Λ with K", op_dual_residual(&sys, &gamma, &k)?, lim);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }

    let psys = sys.with_family(right_compose(sys.family(), &p)?)?;
    let s_p = frame_operator(&psys);
    let fp = p.flatten();
    let fs = s_p.flatten();
    let eye = dense::identity(fs.nrows());
    let lower = &fp * (&fs - &eye * c(a * a, 0.0)) * &fp;
    let upper = &fp * (&eye * c(b * b, 0.0) - &fs) * &fp;
    ctx.b.check("S_P ≥ a² on the range of P", psd_violation(&lower), ctx.lim(b * b));
    ctx.b.check("S_P ≤ b² on the range of P", psd_violation(&upper), ctx.lim(b * b));

    let gamma_p = right_compose(&gamma, &p)?;
    let kc = ctx.conclusion_k(&k);
    let rec = reconstruction_operator(&psys, &gamma_p, Some(&kc))?;
    let id = AdjointableOperator::identity(sys.algebra(), sys.module_rank());
    let defect = op_norm(&op_compose(&id.sub(&rec)?, &p)?);
    ctx.b.check("ΓP is an operator dual of ΛP on the range of P", defect, lim);

    let cut = 1e-8 * op_norm(&s_p).max(f64::MIN_POSITIVE);
    let s_p_pinv = AdjointableOperator::from_flat(sys.algebra(), &dense::psd_pinv(&fs, cut))?;
    let lhs = op_compose(&s_p_pinv, &p)?;
    let rhs = op_compose(&p, &inv(&s)?)?;
    let diff = op_compose(&lhs.sub(&rhs)?, &p)?;
    ctx.b.check("S_P⁺P = PS⁻¹ on the range of P", op_norm(&diff), ctx.lim(1.0 / (a * a)));
    Ok(())
}

pub(super) fn t33(ctx: &mut Ctx) -> Result<()> {
    require_scalar_controls(ctx);
    let sys = ctx.sys.clone();
    let Some((_, b_lam)) = ctx.require_frame(&sys, "Λ") else {
        return Ok(());
    };
    let k = well_conditioned_operator(sys.algebra(), sys.module_rank(), &mut ctx.rng);
    let phi = random_free_part(&sys, &mut ctx.rng);
    let gamma = operator_dual_family(&sys, &k, &phi)?;
    let lim = recon_lim(ctx);
    ctx.b.hyp("K invertible", if bounded_below_constant(&k) > ctx.lim(op_norm(&k)) { 0.0 } else { 1.0 }, 0.0);
    ctx.b.hyp("Γ is Bessel", 0.0, 0.0);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let kc = ctx.conclusion_k(&k);
    ctx.b.check("x = Σ μ C'Λ*ΓKCx", op_dual_residual(&sys, &gamma, &kc)?, lim);
    let conv = identity_defect(&converse_reconstruction_operator(&sys, &gamma, &kc)?)?;
    ctx.b.check("x = Σ μ C'Γ*ΛK*Cx", conv, lim);

    let gsys = sys.with_family(gamma)?;
    let (g_lo, g_hi) = spectral_range(&frame_operator(&gsys));
    let (a_gamma, b_gamma) = (g_lo.max(0.0).sqrt(), g_hi.max(0.0).sqrt());
    let (l_lo, _) = spectral_range(&frame_operator(&sys));
    let a_lam = l_lo.max(0.0).sqrt();
    let m = bounded_below_constant(&inv(&kc)?);
    ctx.b.info("a_gamma", a_gamma);
    ctx.b.info("b_gamma", b_gamma);
    ctx.b.info("sigma_min_K_inv", m);
    ctx.b.check("a_Γ ≥ ‖K‖⁻¹/b_Λ", (m / b_lam - a_gamma).max(0.0), ctx.lim(1.0));
    ctx.b.check("a_Λ ≥ ‖K‖⁻¹/b_Γ", (m / b_gamma - a_lam).max(0.0), ctx.lim(1.0));
    Ok(())
}

/// `TS⁻¹K⁻¹ + (I − TS⁻¹T*)θ` with `S = T*T`: every right inverse of `K∘T*`
/// has this form, with `θ` the inverse itself.
pub fn right_inverse_formula(
    t: &AdjointableOperator,
    k: &AdjointableOperator,
    theta: &AdjointableOperator,
) -> Result<AdjointableOperator> {
    let t_adj = op_adjoint(t);
    let s_inv = inv(&op_compose(&t_adj, t)?)?;
    let particular = op_chain(&[t, &s_inv, &inv(k)?])?;
    let proj = AdjointableOperator::identity(t.descriptor(), t.out_rank()).sub(&op_chain(&[t, &s_inv, &t_adj])?)?;
    particular.add(&op_compose(&proj, theta)?)
}

pub(super) fn t55(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    ctx.b.hyp("C = C'", sys.control_gap(), ctx.lim(op_norm(sys.c())));
    let layout = StackLayout::of(&sys);
    let t = stack(&layout, &right_compose(sys.family(), sys.c())?)?;
    let sigma = bounded_below_constant(&t);
    ctx.b.hyp_flag("T bounded below", sigma > ctx.lim(op_norm(&t)));
    let n = sys.module_rank();
    let k = well_conditioned_operator(sys.algebra(), n, &mut ctx.rng);
    ctx.b.hyp_flag("K invertible", bounded_below_constant(&k) > ctx.lim(op_norm(&k)));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let kc = ctx.conclusion_k(&k);
    let t_adj = op_adjoint(&t);
    let id = AdjointableOperator::identity(sys.algebra(), n);
    let lim = recon_lim(ctx);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let theta = random_free_part(&sys, &mut ctx.rng);
        let g = right_inverse_formula(&t, &k, &theta)?;
        worst = worst.max(op_res(&op_chain(&[&kc, &t_adj, &g])?, &id)?);
    }
    ctx.b.check("KT*G = I for G from the formula", worst, lim);

    let m = t_adj.flatten() * k.flatten();
    let rhs = dense::identity(m.ncols());
    let z = dense::least_squares(&m.adjoint(), &rhs, 1e-12)?;
    let g_ls = AdjointableOperator::from_flat(sys.algebra(), &z.adjoint())?;
    ctx.b.hyp(
        "least-squares G is a right inverse of KT*",
        op_res(&op_chain(&[&k, &t_adj, &g_ls])?, &id)?,
        lim,
    );
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let back = right_inverse_formula(&t, &kc, &g_ls)?;
    let d = op_res(&back, &g_ls)?;
    ctx.b.check("a right inverse is reproduced by the formula", d, 1e-8 * op_norm(&g_ls).max(1.0));
    ctx.b.info("right_inverses_verified", if worst <= lim { 20.0 } else { 0.0 });
    ctx.b.info("formula_residual", worst);
    ctx.b.info("decomposition_residual", d);
    Ok(())
}

pub(super) fn midpoint_dual(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let desc = sys.algebra();
    let n = sys.module_rank();
    let v = match desc.kind {
        AlgebraKind::Matrix => {
            AlgebraElement::scalar(desc, C64::from_polar(ctx.rng.random_range(0.5..2.0), ctx.rng.random_range(0.0..std::f64::consts::TAU)))
        }
        AlgebraKind::Diagonal => AlgebraElement::new(
            desc,
            (0..desc.dim)
                .map(|_| C64::from_polar(ctx.rng.random_range(0.5..2.0), ctx.rng.random_range(0.0..std::f64::consts::TAU)))
                .collect(),
        )?,
    };
    let v_half_inv = v.invert(crate::star_algebra::DEFAULT_COND_CAP)?.scale_real(0.5);
    let left = |elt: &AlgebraElement, rank: usize| AdjointableOperator::block_diagonal(vec![elt.clone(); rank]);

    let k = well_conditioned_operator(desc, n, &mut ctx.rng);
    let phi = random_free_part(&sys, &mut ctx.rng);
    let gamma = operator_dual_family(&sys, &k, &phi)?;
    let lim = recon_lim(ctx);
    ctx.b.hyp("Γ is an operator dual of Λ with K", op_dual_residual(&sys, &gamma, &k)?, lim);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let s_inv = inv(&frame_operator(&sys))?;
    let k_inv = inv(&k)?;
    let mut theta = Family::new();
    for (atom, op) in sys.members() {
        let lv = left(&v, op.out_rank())?;
        let g = op_compose(&lv, &gamma[&atom.label])?;
        let h = op_chain(&[&lv, op, &s_inv, &k_inv])?;
        theta.insert(atom.label.clone(), g.add(&h)?);
    }
    let k_mid = op_compose(&left(&v_half_inv, n)?, &ctx.conclusion_k(&k))?;
    ctx.b.check("v(Γ + ΛS⁻¹K⁻¹) is an operator dual with (v⁻¹/2)K", op_dual_residual(&sys, &theta, &k_mid)?, lim);
    Ok(())
}

pub(super) fn t12(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    ctx.b.hyp("C = C'", sys.control_gap(), ctx.lim(op_norm(sys.c())));
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let layout = StackLayout::of(&sys);
    let t0 = uncontrolled_analysis_operator(&sys)?;
    let back = unstack(&layout, &t0)?;
    let mut worst = 0.0_f64;
    for (atom, op) in sys.members() {
        worst = worst.max(op_res(&back[&atom.label], op)?);
    }
    let scale = sys.family().values().map(op_norm).fold(1.0_f64, f64::max);
    ctx.b.check("components of the stacked family are Λ_w", worst, ctx.lim(scale));

    let (_, c_norm) = spectral_range(sys.c());
    let (mut unc, mut ctl) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let theta = random_free_part(&sys, &mut ctx.rng);
        let nt = op_norm(&theta);
        let fam = unstack(&layout, &theta)?;
        let csys = sys.with_family(fam.clone())?;
        let usys = csys.without_controls()?;
        let (_, hi_u) = spectral_range(&frame_operator(&usys));
        let (_, hi_c) = spectral_range(&frame_operator(&csys));
        unc = unc.max((hi_u - nt * nt).abs() / (nt * nt).max(1.0));
        ctl = ctl.max((hi_c - nt * nt * c_norm * c_norm).max(0.0) / (nt * nt * c_norm * c_norm).max(1.0));
    }
    ctx.b.check("uncontrolled components of θ have Bessel bound ‖θ‖", unc, ctx.tol());
    ctx.b.check("controlled components of θ have Bessel bound ‖θ‖‖C‖", ctl, ctx.tol());
    Ok(())
}

pub(super) fn t66(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let h = commutant_generator(&sys, false)?;
    let k = commutant_operator(&h, &mut ctx.rng)?;
    let tol = ctx.tol();
    ctx.b.hyp("K commutes with C", rel_comm(&k, sys.c())?, tol);
    ctx.b.hyp("K commutes with C'", rel_comm(&k, sys.cp())?, tol);
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let t = analysis_operator(&sys)?;
    let phi = random_free_part(&sys, &mut ctx.rng);
    let theta = right_inverse_formula(&t, &k, &phi)?;
    let layout = StackLayout::of(&sys);
    let root_inv = inv(&control_root(&sys)?)?;
    let mut gamma = Family::new();
    for label in &layout.labels {
        gamma.insert(label.clone(), op_compose(&unstack_one(&layout, &theta, label)?, &root_inv)?);
    }
    let kc = ctx.conclusion_k(&k);
    let id = AdjointableOperator::identity(sys.algebra(), sys.module_rank());
    let lim = recon_lim(ctx);
    ctx.b.check("KT*θ = I", op_res(&op_chain(&[&kc, &op_adjoint(&t), &theta])?, &id)?, lim);
    ctx.b.check("components of θ give an operator dual with K", op_dual_residual(&sys, &gamma, &kc)?, lim);
    Ok(())
}

pub(super) fn dual_param(ctx: &mut Ctx) -> Result<()> {
    let sys = ctx.sys.clone();
    ctx.b.hyp("C = C'", sys.control_gap(), ctx.lim(op_norm(sys.c())));
    if ctx.require_frame(&sys, "Λ").is_none() {
        return Ok(());
    }
    let h = commutant_generator(&sys, false)?;
    let k = commutant_operator(&h, &mut ctx.rng)?;
    ctx.b.hyp("K commutes with C", rel_comm(&k, sys.c())?, ctx.tol());
    if !ctx.b.hypotheses_ok() {
        return Ok(());
    }
    let lim = recon_lim(ctx);
    let kc = ctx.conclusion_k(&k);
    let cc = sys.c().clone();
    let s_inv = inv(&frame_operator(&sys))?;
    let c_inv = inv(&cc)?;
    let param = |g: &Family, k: &AdjointableOperator| -> Result<Family> {
        let mut mix = AdjointableOperator::zero(sys.algebra(), sys.module_rank(), sys.module_rank());
        for (atom, op) in sys.members() {
            mix = mix.add(&op_chain(&[&cc, &op_adjoint(op), &g[&atom.label]])?.scale_real(atom.weight))?;
        }
        let k_inv = inv(k)?;
        let mut out = Family::new();
        for (atom, op) in sys.members() {
            let base = op_chain(&[op, &cc, &s_inv, &k_inv, &c_inv])?;
            let corr = op_chain(&[op, &cc, &s_inv, &mix])?;
            out.insert(atom.label.clone(), base.add(&g[&atom.label])?.sub(&corr)?);
        }
        Ok(out)
    };

    let g = random_like(&sys, &mut ctx.rng);
    let gamma = param(&g, &k)?;
    ctx.b.check("the parametrised family is an operator dual with K", op_dual_residual(&sys, &gamma, &kc)?, lim);

    let phi = random_free_part(&sys, &mut ctx.rng);
    let other = operator_dual_family(&sys, &k, &phi)?;
    let again = param(&other, &kc)?;
    let mut worst = 0.0_f64;
    for (label, op) in &other {
        worst = worst.max(op_res(&again[label], op)?);
    }
    let scale = other.values().map(op_norm).fold(1.0_f64, f64::max);
    ctx.b.check("every operator dual with K is of this form", worst, ctx.lim(100.0 * scale));
    Ok(())
}
