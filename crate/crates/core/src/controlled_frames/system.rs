//! Frame systems and the quantities read directly off them: the controlled
//! Gram element, the frame operator and scalar frame bounds.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{self, c, CMatrix};
use crate::error::{input, GFrameError, Result};
use crate::hilbert_module::{
    inner_product, op_adjoint, op_apply, op_chain, positive_part_checks, AdjointableOperator,
    ModuleVector,
};
use crate::measure::{Atom, MeasureSpace};
use crate::report::{ReportBuilder, TheoremReport};
use crate::star_algebra::{AlgebraDescriptor, AlgebraElement, DEFAULT_TOL};

/// Operators indexed by atom label.
pub type Family = BTreeMap<String, AdjointableOperator>;

/// The control operators `C`, `C'` with commutation diagnostics computed at
/// construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlPair {
    #[serde(rename = "C")]
    pub c: AdjointableOperator,
    #[serde(rename = "Cp")]
    pub cp: AdjointableOperator,
    pub commute_each_other: bool,
    pub commute_with_family: bool,
    /// `‖CC' − C'C‖ / max(1, ‖C‖‖C'‖)`.
    pub each_other_residual: f64,
    /// Largest relative commutator of `Λ*_wΛ_w` with `C` or `C'`.
    pub family_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile", into = "SystemFile")]
pub struct GFrameSystem {
    algebra: AlgebraDescriptor,
    module_rank: usize,
    measure: MeasureSpace,
    family: Family,
    controls: ControlPair,
}

#[derive(Serialize, Deserialize)]
struct ControlFile {
    #[serde(rename = "C")]
    c: AdjointableOperator,
    #[serde(rename = "Cp")]
    cp: AdjointableOperator,
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    algebra: AlgebraDescriptor,
    module_rank: usize,
    measure: MeasureSpace,
    family: Family,
    controls: ControlFile,
}

impl TryFrom<SystemFile> for GFrameSystem {
    type Error = GFrameError;
    fn try_from(f: SystemFile) -> Result<Self> {
        GFrameSystem::new(f.algebra, f.module_rank, f.measure, f.family, f.controls.c, f.controls.cp)
    }
}

impl From<GFrameSystem> for SystemFile {
    fn from(s: GFrameSystem) -> Self {
        SystemFile {
            algebra: s.algebra,
            module_rank: s.module_rank,
            measure: s.measure,
            family: s.family,
            controls: ControlFile {
                c: s.controls.c,
                cp: s.controls.cp,
            },
        }
    }
}

fn rel_commutator(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = (dense::spectral_norm(a) * dense::spectral_norm(b)).max(1.0);
    dense::spectral_norm(&(a * b - b * a)) / scale
}

fn check_control(name: &str, t: &AdjointableOperator, algebra: AlgebraDescriptor, n: usize) -> Result<()> {
    algebra.check_same(&t.descriptor())?;
    if t.in_rank() != n || t.out_rank() != n {
        return input(format!("control {name} must be {n}x{n}, got {}x{}", t.in_rank(), t.out_rank()));
    }
    let p = positive_part_checks(t, DEFAULT_TOL);
    if !(p.positive && p.invertible) {
        return input(format!(
            "control {name} is not positive and invertible (eigenvalues in [{:.3e}, {:.3e}])",
            p.lower, p.upper
        ));
    }
    Ok(())
}

impl GFrameSystem {
    pub fn new(
        algebra: AlgebraDescriptor,
        module_rank: usize,
        measure: MeasureSpace,
        family: Family,
        c: AdjointableOperator,
        cp: AdjointableOperator,
    ) -> Result<Self> {
        if module_rank == 0 {
            return input("module_rank must be at least 1");
        }
        if family.len() != measure.len() || measure.labels().any(|l| !family.contains_key(l)) {
            return input("family labels must match the measure's atom labels exactly");
        }
        for (label, op) in &family {
            algebra.check_same(&op.descriptor())?;
            if op.in_rank() != module_rank {
                return input(format!(
                    "member {label:?} has in_rank {}, module rank is {module_rank}",
                    op.in_rank()
                ));
            }
        }
        check_control("C", &c, algebra, module_rank)?;
        check_control("Cp", &cp, algebra, module_rank)?;

        let (fc, fcp) = (c.flatten(), cp.flatten());
        let each_other_residual = rel_commutator(&fc, &fcp);
        let mut family_residual = 0.0_f64;
        for op in family.values() {
            let f = op.flatten();
            let g = &f * f.adjoint();
            family_residual = family_residual.max(rel_commutator(&g, &fc)).max(rel_commutator(&g, &fcp));
        }
        let controls = ControlPair {
            c,
            cp,
            commute_each_other: each_other_residual <= DEFAULT_TOL,
            commute_with_family: family_residual <= DEFAULT_TOL,
            each_other_residual,
            family_residual,
        };
        Ok(Self {
            algebra,
            module_rank,
            measure,
            family,
            controls,
        })
    }

    /// System with `C = C' = I`.
    pub fn uncontrolled(
        algebra: AlgebraDescriptor,
        module_rank: usize,
        measure: MeasureSpace,
        family: Family,
    ) -> Result<Self> {
        let id = AdjointableOperator::identity(algebra, module_rank);
        Self::new(algebra, module_rank, measure, family, id.clone(), id)
    }

    pub fn algebra(&self) -> AlgebraDescriptor {
        self.algebra
    }

    pub fn module_rank(&self) -> usize {
        self.module_rank
    }

    pub fn measure(&self) -> &MeasureSpace {
        &self.measure
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn controls(&self) -> &ControlPair {
        &self.controls
    }

    pub fn c(&self) -> &AdjointableOperator {
        &self.controls.c
    }

    pub fn cp(&self) -> &AdjointableOperator {
        &self.controls.cp
    }

    /// Atoms paired with their family members, in measure order.
    pub fn members(&self) -> impl Iterator<Item = (&Atom, &AdjointableOperator)> {
        self.measure.atoms().iter().map(|a| (a, &self.family[&a.label]))
    }

    pub fn out_ranks(&self) -> Vec<usize> {
        self.members().map(|(_, op)| op.out_rank()).collect()
    }

    pub fn is_commuting(&self) -> bool {
        self.controls.commute_each_other && self.controls.commute_with_family
    }

    pub fn require_commuting(&self, what: &str) -> Result<()> {
        if self.is_commuting() {
            Ok(())
        } else {
            Err(GFrameError::Unsupported(format!(
                "{what} needs controls that commute with each other and with every Λ*Λ \
                 (residuals {:.3e}, {:.3e})",
                self.controls.each_other_residual, self.controls.family_residual
            )))
        }
    }

    /// `‖C − C'‖`.
    pub fn control_gap(&self) -> f64 {
        dense::spectral_norm(&(self.controls.c.flatten() - self.controls.cp.flatten()))
    }

    pub fn with_family(&self, family: Family) -> Result<Self> {
        Self::new(
            self.algebra,
            self.module_rank,
            self.measure.clone(),
            family,
            self.controls.c.clone(),
            self.controls.cp.clone(),
        )
    }

    pub fn with_controls(&self, c: AdjointableOperator, cp: AdjointableOperator) -> Result<Self> {
        Self::new(self.algebra, self.module_rank, self.measure.clone(), self.family.clone(), c, cp)
    }

    pub fn without_controls(&self) -> Result<Self> {
        let id = AdjointableOperator::identity(self.algebra, self.module_rank);
        self.with_controls(id.clone(), id)
    }
}

/// Apply `f` to every member, keeping labels.
pub fn map_family(
    family: &Family,
    mut f: impl FnMut(&str, &AdjointableOperator) -> Result<AdjointableOperator>,
) -> Result<Family> {
    family.iter().map(|(k, v)| Ok((k.clone(), f(k, v)?))).collect()
}

/// `∫⟨Λ_wCx, Λ_wC'x⟩ dμ(w)`, assembled at module level.
pub fn controlled_gram(sys: &GFrameSystem, x: &ModuleVector) -> Result<AlgebraElement> {
    let cx = op_apply(sys.c(), x)?;
    let cpx = op_apply(sys.cp(), x)?;
    let mut acc = AlgebraElement::zero(sys.algebra);
    for (atom, op) in sys.members() {
        let g = inner_product(&op_apply(op, &cx)?, &op_apply(op, &cpx)?)?;
        acc = acc.add(&g.scale_real(atom.weight))?;
    }
    Ok(acc)
}

/// `S = Σ_k μ_k C'Λ*_kΛ_kC`, block-assembled.
pub fn frame_operator(sys: &GFrameSystem) -> AdjointableOperator {
    let n = sys.module_rank;
    let mut acc = AdjointableOperator::zero(sys.algebra, n, n);
    for (atom, op) in sys.members() {
        let adj = op_adjoint(op);
        let term = op_chain(&[sys.cp(), &adj, op, sys.c()]).expect("validated shapes");
        acc = acc.add(&term.scale_real(atom.weight)).expect("same shape");
    }
    acc
}

/// `⟨Tx, x⟩` read off the flattening.
pub fn quadratic_form(t: &AdjointableOperator, x: &ModuleVector) -> Result<AlgebraElement> {
    let xf = x.flatten();
    if xf.ncols() != t.flatten().nrows() {
        return input("vector rank does not match operator");
    }
    AlgebraElement::from_matrix(x.descriptor(), &(&xf * t.flatten() * xf.adjoint()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: AlgebraElement,
    pub upper: AlgebraElement,
    pub scalar_lower: f64,
    pub scalar_upper: f64,
    /// `false` means Bessel-only.
    pub frame: bool,
}

impl FrameBounds {
    /// Bounds `a·1_A`, `b·1_A`.
    pub fn scalar(algebra: AlgebraDescriptor, a: f64, b: f64) -> Self {
        Self {
            lower: AlgebraElement::scalar(algebra, c(a, 0.0)),
            upper: AlgebraElement::scalar(algebra, c(b, 0.0)),
            scalar_lower: a,
            scalar_upper: b,
            frame: a > 0.0,
        }
    }
}

/// Extreme eigenvalues of the Hermitian part of `flatten(S)`.
pub fn spectral_range(s: &AdjointableOperator) -> (f64, f64) {
    let eig = dense::hermitian_eigenvalues(&s.flatten());
    (eig.first().copied().unwrap_or(0.0), eig.last().copied().unwrap_or(0.0))
}

/// `a = √λ_min(S)`, `b = √λ_max(S)`. A system counts as a frame only when
/// `λ_min` clears `tol·max(1, λ_max)`.
pub fn optimal_scalar_bounds(sys: &GFrameSystem, tol: f64) -> Result<FrameBounds> {
    sys.require_commuting("scalar frame bounds")?;
    let (lo, hi) = spectral_range(&frame_operator(sys));
    let a = lo.max(0.0).sqrt();
    let b = hi.max(0.0).sqrt();
    let mut fb = FrameBounds::scalar(sys.algebra, a, b);
    fb.frame = lo > tol * hi.max(1.0) && a > tol;
    if !fb.frame {
        fb.scalar_lower = 0.0;
        fb.lower = AlgebraElement::zero(sys.algebra);
    }
    Ok(fb)
}

/// `√λ_max` of the Hermitian part of the frame operator. For `C = C'` this is
/// the optimal Bessel bound whether or not the controls commute with the family.
pub fn bessel_bound(sys: &GFrameSystem) -> f64 {
    spectral_range(&frame_operator(sys)).1.max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    ExactScalar,
    SampledGeneral,
}

/// Module vectors built from the eigenvectors of `flatten(t)`'s Hermitian
/// part, ordered by eigenvalue. Useful as adversarial samples.
pub fn eigen_candidates(t: &AdjointableOperator) -> Result<Vec<ModuleVector>> {
    let (_, vecs) = dense::hermitian_eigen(&t.flatten());
    (0..vecs.ncols())
        .map(|k| {
            let u: Vec<_> = vecs.column(k).iter().map(|z| z.conj()).collect();
            ModuleVector::from_row(t.descriptor(), &u)
        })
        .collect()
}

/// Seeded unit vectors followed by the eigen-candidates of `t`.
pub fn sample_vectors(t: &AdjointableOperator, samples: usize, seed: u64) -> Result<Vec<ModuleVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<ModuleVector> = (0..samples)
        .map(|_| ModuleVector::random_unit(t.descriptor(), t.in_rank(), &mut rng))
        .collect();
    xs.extend(eigen_candidates(t)?);
    Ok(xs)
}

/// How far `g` is from being positive: its Hermitian defect or the depth of
/// its most negative eigenvalue, whichever is larger.
pub fn positivity_violation(g: &AlgebraElement) -> f64 {
    let neg = -g.eigenvalues().first().copied().unwrap_or(0.0);
    g.hermitian_defect().max(neg).max(0.0)
}

/// Certify the frame inequalities for `bounds`.
pub fn check_frame(
    sys: &GFrameSystem,
    bounds: &FrameBounds,
    mode: CheckMode,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    let mut b = ReportBuilder::new("FRAME-CHECK", seed, tol);
    let s = frame_operator(sys);
    let f = s.flatten();
    let s_norm = dense::spectral_norm(&f);
    let a = bounds.scalar_lower;
    let bb = bounds.scalar_upper;
    b.hyp_flag("bounds finite and nonnegative", a.is_finite() && bb.is_finite() && a >= 0.0 && bb >= 0.0);
    b.info("scalar_lower", a);
    b.info("scalar_upper", bb);
    if !b.hypotheses_ok() {
        return Ok(b.finish());
    }
    let lim = b.lim(s_norm.max(bb * bb));
    match mode {
        CheckMode::ExactScalar => {
            let defect = dense::hermitian_defect(&f);
            let (vals, vecs) = dense::hermitian_eigen(&f);
            let (lo, hi) = (vals[0], vals[vals.len() - 1]);
            b.info("lambda_min", lo);
            b.info("lambda_max", hi);
            let lower_viol = defect.max(a * a - lo).max(0.0);
            let upper_viol = defect.max(hi - bb * bb).max(0.0);
            if !b.check("S - a^2 I is PSD", lower_viol, lim) {
                let u: Vec<_> = vecs.column(0).iter().map(|z| z.conj()).collect();
                b.witness(ModuleVector::from_row(sys.algebra, &u)?);
            }
            if !b.check("b^2 I - S is PSD", upper_viol, lim) {
                let u: Vec<_> = vecs.column(vals.len() - 1).iter().map(|z| z.conj()).collect();
                b.witness(ModuleVector::from_row(sys.algebra, &u)?);
            }
        }
        CheckMode::SampledGeneral => {
            let xs = sample_vectors(&s, samples, seed)?;
            let (mut lo_worst, mut hi_worst) = (0.0_f64, 0.0_f64);
            let mut lo_wit = None;
            let mut hi_wit = None;
            for x in &xs {
                let g = quadratic_form(&s, x)?;
                let xx = inner_product(x, x)?;
                let low = bounds.lower.mul(&xx)?.mul(&bounds.lower.adjoint())?;
                let up = bounds.upper.mul(&xx)?.mul(&bounds.upper.adjoint())?;
                let vl = positivity_violation(&g.sub(&low)?);
                let vu = positivity_violation(&up.sub(&g)?);
                if vl > lo_worst {
                    lo_worst = vl;
                    lo_wit = Some(x.clone());
                }
                if vu > hi_worst {
                    hi_worst = vu;
                    hi_wit = Some(x.clone());
                }
            }
            b.info("samples", xs.len() as f64);
            if !b.check("A<x,x>A* <= gram(x) on samples", lo_worst, lim) {
                b.witness(lo_wit.expect("violation has a witness"));
            }
            if !b.check("gram(x) <= B<x,x>B* on samples", hi_worst, lim) {
                b.witness(hi_wit.expect("violation has a witness"));
            }
        }
    }
    Ok(b.finish())
}
