//! Executable theorem suite. Each row builds (or receives) an instance,
//! records its hypotheses, and evaluates the conclusion as residual checks.
//!
//! Mutations inject a known violation after the hypotheses have been
//! evaluated on the pristine instance, so a row that consumes a mutation is
//! expected to fail and every other row to pass.

mod dual_rows;
mod frame_rows;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dual_rows::right_inverse_formula;
pub use frame_rows::right_composition_report;

use crate::dense::{self, CMatrix};
use crate::error::{GFrameError, Result};
use crate::hilbert_module::{
    op_chain, op_compose, op_inverse, op_norm, AdjointableOperator,
};
use crate::report::{ReportBuilder, TheoremReport};
use crate::star_algebra::{AlgebraDescriptor, DEFAULT_COND_CAP};

use super::generate::{generate_random, InstanceKind, RandomSpec};
use super::system::{
    check_frame, frame_operator, spectral_range, CheckMode, FrameBounds, GFrameSystem,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "T2.3")]
    T23,
    #[serde(rename = "FO-PROPS")]
    FoProps,
    #[serde(rename = "SCC-PROPS")]
    SccProps,
    #[serde(rename = "T-T3")]
    TT3,
    #[serde(rename = "T-TT")]
    TTt,
    #[serde(rename = "BESSEL-COMP")]
    BesselComp,
    #[serde(rename = "TH-SURJ")]
    ThSurj,
    #[serde(rename = "F-KT")]
    FKt,
    #[serde(rename = "HOM-TRANSPORT")]
    HomTransport,
    #[serde(rename = "LEFT-COMP")]
    LeftComp,
    #[serde(rename = "RIGHT-COMP")]
    RightComp,
    #[serde(rename = "DUAL-SIM")]
    DualSim,
    #[serde(rename = "EQ-FRAME-OP")]
    EqFrameOp,
    #[serde(rename = "OP-DUAL-CORR")]
    OpDualCorr,
    #[serde(rename = "SUBMODULE")]
    Submodule,
    #[serde(rename = "T33")]
    T33,
    #[serde(rename = "T55")]
    T55,
    #[serde(rename = "MIDPOINT-DUAL")]
    MidpointDual,
    #[serde(rename = "T12")]
    T12,
    #[serde(rename = "T66")]
    T66,
    #[serde(rename = "DUAL-PARAM")]
    DualParam,
    #[serde(rename = "ANY-FRAME-CONTROLLED")]
    AnyFrameControlled,
    #[serde(rename = "LAMBDA-T")]
    LambdaT,
}

impl TheoremId {
    pub const ALL: [TheoremId; 23] = [
        TheoremId::T23,
        TheoremId::FoProps,
        TheoremId::SccProps,
        TheoremId::TT3,
        TheoremId::TTt,
        TheoremId::BesselComp,
        TheoremId::ThSurj,
        TheoremId::FKt,
        TheoremId::HomTransport,
        TheoremId::LeftComp,
        TheoremId::RightComp,
        TheoremId::DualSim,
        TheoremId::EqFrameOp,
        TheoremId::OpDualCorr,
        TheoremId::Submodule,
        TheoremId::T33,
        TheoremId::T55,
        TheoremId::MidpointDual,
        TheoremId::T12,
        TheoremId::T66,
        TheoremId::DualParam,
        TheoremId::AnyFrameControlled,
        TheoremId::LambdaT,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T23 => "T2.3",
            TheoremId::FoProps => "FO-PROPS",
            TheoremId::SccProps => "SCC-PROPS",
            TheoremId::TT3 => "T-T3",
            TheoremId::TTt => "T-TT",
            TheoremId::BesselComp => "BESSEL-COMP",
            TheoremId::ThSurj => "TH-SURJ",
            TheoremId::FKt => "F-KT",
            TheoremId::HomTransport => "HOM-TRANSPORT",
            TheoremId::LeftComp => "LEFT-COMP",
            TheoremId::RightComp => "RIGHT-COMP",
            TheoremId::DualSim => "DUAL-SIM",
            TheoremId::EqFrameOp => "EQ-FRAME-OP",
            TheoremId::OpDualCorr => "OP-DUAL-CORR",
            TheoremId::Submodule => "SUBMODULE",
            TheoremId::T33 => "T33",
            TheoremId::T55 => "T55",
            TheoremId::MidpointDual => "MIDPOINT-DUAL",
            TheoremId::T12 => "T12",
            TheoremId::T66 => "T66",
            TheoremId::DualParam => "DUAL-PARAM",
            TheoremId::AnyFrameControlled => "ANY-FRAME-CONTROLLED",
            TheoremId::LambdaT => "LAMBDA-T",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| GFrameError::Input(format!("unknown theorem id {s:?}")))
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|&i| i == self).expect("listed") as u64
    }

    /// Control regime of the generated instance.
    pub fn instance_kind(self) -> InstanceKind {
        use InstanceKind::*;
        match self {
            TheoremId::TT3 | TheoremId::DualParam => CommutingSame,
            TheoremId::BesselComp | TheoremId::T55 | TheoremId::T12 => GeneralSame,
            TheoremId::FKt
            | TheoremId::DualSim
            | TheoremId::EqFrameOp
            | TheoremId::OpDualCorr
            | TheoremId::T33 => ScalarControls,
            TheoremId::LeftComp => ScalarControlsSquare,
            _ => Commuting,
        }
    }

    /// Mutations this row is sensitive to.
    pub fn consumed_mutations(self) -> &'static [Mutation] {
        match self {
            TheoremId::FoProps
            | TheoremId::TTt
            | TheoremId::RightComp
            | TheoremId::DualSim
            | TheoremId::EqFrameOp => &[Mutation::ScaleMember],
            TheoremId::SccProps => &[Mutation::BreakCommutation],
            TheoremId::OpDualCorr
            | TheoremId::Submodule
            | TheoremId::T33
            | TheoremId::T55
            | TheoremId::MidpointDual
            | TheoremId::T66
            | TheoremId::DualParam => &[Mutation::WrongK],
            _ => &[],
        }
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Injected violations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    None,
    /// Double the family member contributing most to the top of the
    /// frame operator's spectrum.
    ScaleMember,
    /// Replace `C'` by a random positive operator that does not commute.
    BreakCommutation,
    /// Evaluate conclusions with `2K` in place of `K`.
    WrongK,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::None,
        Mutation::ScaleMember,
        Mutation::BreakCommutation,
        Mutation::WrongK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::None => "none",
            Mutation::ScaleMember => "scale_member",
            Mutation::BreakCommutation => "break_commutation",
            Mutation::WrongK => "wrong_k",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| GFrameError::Input(format!("unknown mutation {s:?}")))
    }
}

/// Expected status of a row under a mutation.
pub fn expected_to_pass(id: TheoremId, mutation: Mutation) -> bool {
    !id.consumed_mutations().contains(&mutation)
}

/// Instance shape used for generated rows: even seeds get `M_d` with
/// `d = 1 + seed mod 3`, odd seeds `ℂ^k` with `k = 2 + seed mod 2`.
pub fn default_spec(id: TheoremId, seed: u64) -> RandomSpec {
    let algebra = if seed.is_multiple_of(2) {
        AlgebraDescriptor::matrix(1 + (seed % 3) as usize)
    } else {
        AlgebraDescriptor::diagonal(2 + (seed % 2) as usize)
    };
    RandomSpec {
        algebra,
        rank: 2 + ((seed / 2) % 2) as usize,
        atoms: 3 + (seed % 4) as usize,
        kind: id.instance_kind(),
    }
}

pub fn default_instance(id: TheoremId, seed: u64) -> Result<GFrameSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id.index());
    generate_random(default_spec(id, seed), &mut rng)
}

/// Run one row. `supplied` replaces the generated instance; auxiliary
/// operators are always drawn from `seed`.
pub fn verify_theorem(
    id: TheoremId,
    supplied: Option<&GFrameSystem>,
    seed: u64,
    tol: f64,
    mutation: Mutation,
) -> Result<TheoremReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GFrameError::Input(format!("tolerance must be positive, got {tol}")));
    }
    let sys = match supplied {
        Some(s) => s.clone(),
        None => default_instance(id, seed)?,
    };
    let effective = if id.consumed_mutations().contains(&mutation) {
        mutation
    } else {
        Mutation::None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(100 + id.index());
    let mut mut_rng = ChaCha8Rng::seed_from_u64(seed);
    mut_rng.set_stream(1000 + id.index());
    let mut ctx = Ctx {
        sys,
        seed,
        mutation: effective,
        rng,
        mut_rng,
        b: ReportBuilder::new(id.as_str(), seed, tol),
    };
    ctx.b.info("mutation_applied", if effective == Mutation::None { 0.0 } else { 1.0 });
    if effective != Mutation::None {
        ctx.b.note(format!("mutation {} applied to conclusions", effective.name()));
    }
    let outcome = match id {
        TheoremId::T23 => frame_rows::t23(&mut ctx),
        TheoremId::FoProps => frame_rows::fo_props(&mut ctx),
        TheoremId::SccProps => frame_rows::scc_props(&mut ctx),
        TheoremId::TT3 => frame_rows::t_t3(&mut ctx),
        TheoremId::TTt => frame_rows::t_tt(&mut ctx),
        TheoremId::BesselComp => frame_rows::bessel_comp(&mut ctx),
        TheoremId::ThSurj => frame_rows::th_surj(&mut ctx),
        TheoremId::FKt => frame_rows::f_kt(&mut ctx),
        TheoremId::HomTransport => frame_rows::hom_transport(&mut ctx),
        TheoremId::LeftComp => frame_rows::left_comp(&mut ctx),
        TheoremId::RightComp => frame_rows::right_comp(&mut ctx),
        TheoremId::AnyFrameControlled => frame_rows::any_frame_controlled(&mut ctx),
        TheoremId::LambdaT => frame_rows::lambda_t(&mut ctx),
        TheoremId::DualSim => dual_rows::dual_sim(&mut ctx),
        TheoremId::EqFrameOp => dual_rows::eq_frame_op(&mut ctx),
        TheoremId::OpDualCorr => dual_rows::op_dual_corr(&mut ctx),
        TheoremId::Submodule => dual_rows::submodule(&mut ctx),
        TheoremId::T33 => dual_rows::t33(&mut ctx),
        TheoremId::T55 => dual_rows::t55(&mut ctx),
        TheoremId::MidpointDual => dual_rows::midpoint_dual(&mut ctx),
        TheoremId::T12 => dual_rows::t12(&mut ctx),
        TheoremId::T66 => dual_rows::t66(&mut ctx),
        TheoremId::DualParam => dual_rows::dual_param(&mut ctx),
    };
    if let Err(e) = outcome {
        if ctx.b.hypotheses_ok() {
            ctx.b.check("evaluation completed", f64::INFINITY, 0.0);
        }
        ctx.b.note(e.to_string());
    }
    Ok(ctx.b.finish())
}

/// Every row for one seed, in canonical order.
pub fn verify_all(seed: u64, tol: f64, mutation: Mutation) -> Result<Vec<TheoremReport>> {
    TheoremId::ALL
        .into_iter()
        .map(|id| verify_theorem(id, None, seed, tol, mutation))
        .collect()
}

pub(crate) struct Ctx {
    pub sys: GFrameSystem,
    pub seed: u64,
    pub mutation: Mutation,
    pub rng: ChaCha8Rng,
    mut_rng: ChaCha8Rng,
    pub b: ReportBuilder,
}

impl Ctx {
    pub fn tol(&self) -> f64 {
        self.b.tol()
    }

    pub fn lim(&self, scale: f64) -> f64 {
        self.b.lim(scale)
    }

    /// The instance conclusions are evaluated on.
    pub fn conclusion_system(&mut self) -> Result<GFrameSystem> {
        match self.mutation {
            Mutation::ScaleMember => scale_dominant_member(&self.sys),
            Mutation::BreakCommutation => {
                let cp = AdjointableOperator::random_positive_invertible(
                    self.sys.algebra(),
                    self.sys.module_rank(),
                    0.5,
                    &mut self.mut_rng,
                );
                self.sys.with_controls(self.sys.c().clone(), cp)
            }
            _ => Ok(self.sys.clone()),
        }
    }

    /// `K` as seen by the conclusions.
    pub fn conclusion_k(&self, k: &AdjointableOperator) -> AdjointableOperator {
        if self.mutation == Mutation::WrongK {
            k.scale_real(2.0)
        } else {
            k.clone()
        }
    }

    /// Hypotheses: commuting controls and a certified frame. Returns the
    /// optimal scalar bounds.
    pub fn require_frame(&mut self, sys: &GFrameSystem, label: &str) -> Option<(f64, f64)> {
        let tol = self.tol();
        self.b.hyp(
            &format!("{label}: controls commute with each other and with Λ*Λ"),
            sys.controls().each_other_residual.max(sys.controls().family_residual),
            tol,
        );
        if !sys.is_commuting() {
            return None;
        }
        let (lo, hi) = spectral_range(&frame_operator(sys));
        let frame = lo > tol * hi.max(1.0) && lo.max(0.0).sqrt() > tol;
        self.b.hyp_flag(&format!("{label}: frame (λ_min(S) > tol)"), frame);
        frame.then(|| (lo.sqrt(), hi.sqrt()))
    }

    /// Exact PSD certification of scalar bounds on `sys`.
    pub fn certify_bounds(&mut self, sys: &GFrameSystem, a: f64, b: f64, label: &str) -> Result<()> {
        let fb = FrameBounds::scalar(sys.algebra(), a, b);
        let r = check_frame(sys, &fb, CheckMode::ExactScalar, 0, 0, self.tol())?;
        self.b.absorb(label, &r);
        Ok(())
    }
}

/// Double the member `k` maximising `μ_k v^H F(C'Λ*_kΛ_kC) v` for the top
/// eigenvector `v` of the frame operator.
pub fn scale_dominant_member(sys: &GFrameSystem) -> Result<GFrameSystem> {
    let (vals, vecs) = dense::hermitian_eigen(&frame_operator(sys).flatten());
    let v = vecs.column(vals.len() - 1).into_owned();
    let mut best: Option<(String, f64)> = None;
    for (atom, op) in sys.members() {
        let adj = crate::hilbert_module::op_adjoint(op);
        let term = op_chain(&[sys.cp(), &adj, op, sys.c()])?.flatten();
        let val = (v.adjoint() * &term * &v)[(0, 0)].re * atom.weight;
        if best.as_ref().is_none_or(|(_, b)| val > *b) {
            best = Some((atom.label.clone(), val));
        }
    }
    let (label, _) = best.expect("measure has atoms");
    let mut family = sys.family().clone();
    let scaled = family[&label].scale_real(2.0);
    family.insert(label, scaled);
    sys.with_family(family)
}

pub(crate) fn inv(t: &AdjointableOperator) -> Result<AdjointableOperator> {
    op_inverse(t, DEFAULT_COND_CAP)
}

/// `‖a − b‖`.
pub(crate) fn op_res(a: &AdjointableOperator, b: &AdjointableOperator) -> Result<f64> {
    Ok(op_norm(&a.sub(b)?))
}

/// `‖ab − ba‖ / max(1, ‖a‖‖b‖)`.
pub(crate) fn rel_comm(a: &AdjointableOperator, b: &AdjointableOperator) -> Result<f64> {
    let d = op_res(&op_compose(a, b)?, &op_compose(b, a)?)?;
    Ok(d / (op_norm(a) * op_norm(b)).max(1.0))
}

/// Hermitian defect or depth of the most negative eigenvalue.
pub(crate) fn psd_violation(m: &CMatrix) -> f64 {
    let neg = -dense::hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    dense::hermitian_defect(m).max(neg).max(0.0)
}

/// Residual of `x = Rx`, i.e. `‖I − R‖`.
pub(crate) fn identity_defect(r: &AdjointableOperator) -> Result<f64> {
    let id = AdjointableOperator::identity(r.descriptor(), r.in_rank());
    op_res(&id, r)
}
