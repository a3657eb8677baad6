//! Perturbation results for `(C,C)`-controlled frames: distances between
//! families, sampled hypothesis checks and certified bounds for the
//! perturbed family.
//!
//! Every inequality here is in norm form, `‖{F_wCx}‖ = ‖Σ μ⟨F_wCx, F_wCx⟩‖^{1/2}`,
//! and bounds are scalar on the square-root scale (`a ≤ ‖{Λ_wCx}‖/‖x‖ ≤ b`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controlled_frames::{
    check_frame, controlled_gram, eigen_candidates, frame_operator, sample_vectors, spectral_range, CheckMode,
    Family, FrameBounds, GFrameSystem,
};
use crate::error::{input, GFrameError, Result};
use crate::hilbert_module::{inner_product, ModuleVector};
use crate::report::{ReportBuilder, TheoremReport};
use crate::star_algebra::AlgebraElement;

/// Random vectors drawn for "for all x" hypotheses, on top of eigenvectors.
pub const DEFAULT_STABILITY_SAMPLES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    #[serde(rename = "equivalence_M")]
    EquivalenceM,
    Sum,
    Weighted,
    Additive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub kind: PerturbationKind,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// Per-atom weights; missing means 1 everywhere.
    #[serde(default)]
    pub alpha_w: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub beta_w: Option<BTreeMap<String, f64>>,
    /// Constant for the equivalence test; `None` uses the one computed from
    /// both systems' bounds.
    #[serde(default, rename = "M")]
    pub m: Option<f64>,
    /// Additive kind only: the `β`-only form `‖dist‖ ≤ α‖⟨x,x⟩‖`.
    #[serde(default)]
    pub corollary: bool,
}

impl PerturbationParams {
    pub fn new(kind: PerturbationKind) -> Self {
        Self {
            kind,
            lambda: 0.0,
            mu: 0.0,
            alpha: 0.0,
            beta: 0.0,
            alpha_w: None,
            beta_w: None,
            m: None,
            corollary: false,
        }
    }
}

fn require_same_structure(a: &GFrameSystem, b: &GFrameSystem, tol: f64) -> Result<()> {
    if a.algebra() != b.algebra() || a.module_rank() != b.module_rank() {
        return input("systems differ in algebra or module rank");
    }
    if a.measure() != b.measure() {
        return input("systems differ in measure");
    }
    if a.out_ranks() != b.out_ranks() {
        return input("systems differ in per-atom output ranks");
    }
    require_equal_controls(a, tol)?;
    let gap = crate::hilbert_module::op_distance(a.c(), b.c())?;
    if gap > tol * crate::hilbert_module::op_norm(a.c()).max(1.0) {
        return input("systems use different controls");
    }
    Ok(())
}

fn require_equal_controls(sys: &GFrameSystem, tol: f64) -> Result<()> {
    let scale = crate::hilbert_module::op_norm(sys.c()).max(1.0);
    if sys.control_gap() > tol * scale {
        return input("perturbation results need C = C'");
    }
    Ok(())
}

fn difference(a: &GFrameSystem, b: &GFrameSystem) -> Result<GFrameSystem> {
    let fam: Family = a
        .members()
        .map(|(atom, op)| Ok((atom.label.clone(), op.sub(&b.family()[&atom.label])?)))
        .collect::<Result<_>>()?;
    a.with_family(fam)
}

/// `Σ μ_w⟨(Λ_w − Γ_w)Cx, (Λ_w − Γ_w)Cx⟩`.
pub fn family_distance(sys_a: &GFrameSystem, sys_b: &GFrameSystem, x: &ModuleVector) -> Result<AlgebraElement> {
    require_same_structure(sys_a, sys_b, crate::star_algebra::DEFAULT_TOL)?;
    controlled_gram(&difference(sys_a, sys_b)?, x)
}

/// `‖{F_wCx}‖²`.
fn gram_norm(sys: &GFrameSystem, x: &ModuleVector) -> Result<f64> {
    Ok(controlled_gram(sys, x)?.norm())
}

/// Exact square-root-scale bounds `(√λ_min(S), √λ_max(S))`.
fn scalar_bounds(sys: &GFrameSystem) -> (f64, f64) {
    let (lo, hi) = spectral_range(&frame_operator(sys));
    (lo.max(0.0).sqrt(), hi.max(0.0).sqrt())
}

fn is_frame(sys: &GFrameSystem, tol: f64) -> bool {
    let (lo, hi) = spectral_range(&frame_operator(sys));
    lo > tol * hi.max(1.0)
}

fn probe_vectors(systems: &[&GFrameSystem], samples: usize, seed: u64) -> Result<Vec<ModuleVector>> {
    let mut xs = sample_vectors(&frame_operator(systems[0]), samples, seed)?;
    for s in &systems[1..] {
        xs.extend(eigen_candidates(&frame_operator(s))?);
    }
    Ok(xs)
}

fn certify(b: &mut ReportBuilder, sys: &GFrameSystem, lower: f64, upper: f64, label: &str) -> Result<()> {
    let fb = FrameBounds::scalar(sys.algebra(), lower, upper);
    let r = check_frame(sys, &fb, CheckMode::ExactScalar, 0, 0, b.tol())?;
    b.absorb(label, &r);
    b.info(&format!("{label}_lower"), lower);
    b.info(&format!("{label}_upper"), upper);
    Ok(())
}

/// Sampled check of `lhs(x) ≤ rhs(x)`, as the worst relative excess and its
/// witness.
fn worst_excess(
    xs: &[ModuleVector],
    mut f: impl FnMut(&ModuleVector) -> Result<(f64, f64)>,
) -> Result<(f64, Option<ModuleVector>)> {
    let mut worst = 0.0_f64;
    let mut wit = None;
    for x in xs {
        let (lhs, rhs) = f(x)?;
        let excess = (lhs - rhs) / rhs.abs().max(1.0);
        if excess > worst {
            worst = excess;
            wit = Some(x.clone());
        }
    }
    Ok((worst, wit))
}

/// Equivalence of the frame property of Γ with the inequality
/// `‖dist(x)‖ ≤ M·min{‖gram_Λ(x)‖, ‖gram_Γ(x)‖}`.
pub fn check_equivalence_m(
    sys_a: &GFrameSystem,
    sys_b: &GFrameSystem,
    m: Option<f64>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    require_same_structure(sys_a, sys_b, tol)?;
    let mut b = ReportBuilder::new("STABILITY-EQUIVALENCE-M", seed, tol);
    b.hyp_flag("Λ is a frame", is_frame(sys_a, tol));
    if !b.hypotheses_ok() {
        return Ok(b.finish());
    }
    let (a_lo, a_hi) = scalar_bounds(sys_a);
    let (e_lo, e_hi) = scalar_bounds(sys_b);
    let b_frame = is_frame(sys_b, tol);
    b.info("a", a_lo);
    b.info("b", a_hi);
    b.info("e", e_lo);
    b.info("f", e_hi);

    let diff = difference(sys_a, sys_b)?;
    let xs = probe_vectors(&[&diff, sys_a, sys_b], samples, seed)?;
    let mut sampled_m = 0.0_f64;
    for x in &xs {
        let d = gram_norm(&diff, x)?;
        let lo = gram_norm(sys_a, x)?.min(gram_norm(sys_b, x)?);
        if d > 0.0 {
            sampled_m = sampled_m.max(if lo > 0.0 { d / lo } else { f64::INFINITY });
        }
    }
    b.info("sampled_min_M", sampled_m);
    b.info("samples", xs.len() as f64);

    let m_star = b_frame.then(|| ((a_hi / e_lo + 1.0).powi(2)).min((e_hi / a_lo + 1.0).powi(2)));
    if let Some(ms) = m_star {
        b.info("M_star", ms);
    }
    let m_used = match (m, m_star) {
        (Some(v), _) => v,
        (None, Some(ms)) => ms,
        (None, None) => {
            b.note("Γ is not a frame, so no constant is available");
            b.check_flag("Γ is a frame", false);
            return Ok(b.finish());
        }
    };
    if !(m_used.is_finite() && m_used > 0.0) {
        return Err(GFrameError::Domain(format!("M must be positive and finite, got {m_used}")));
    }
    b.info("M", m_used);
    let (excess, wit) = worst_excess(&xs, |x| {
        let d = gram_norm(&diff, x)?;
        let lo = gram_norm(sys_a, x)?.min(gram_norm(sys_b, x)?);
        Ok((d, m_used * lo))
    })?;
    if !b.check("‖dist(x)‖ ≤ M·min{‖gram_Λ(x)‖, ‖gram_Γ(x)‖} on samples", excess, tol) {
        if let Some(w) = wit {
            b.witness(w);
        }
        return Ok(b.finish());
    }
    let r = 1.0 + m_used.sqrt();
    certify(&mut b, sys_b, a_lo / r, r * a_hi, "Γ bounds from M")?;
    Ok(b.finish())
}

/// `{Λ_w + Γ_w}` is a frame with bounds `(a − e, b + e)` when `e ≤ a`.
pub fn sum_frame_check(sys_l: &GFrameSystem, sys_g: &GFrameSystem, tol: f64) -> Result<TheoremReport> {
    require_same_structure(sys_l, sys_g, tol)?;
    let mut b = ReportBuilder::new("STABILITY-SUM", 0, tol);
    b.hyp_flag("Λ is a frame", is_frame(sys_l, tol));
    let (a, bb) = scalar_bounds(sys_l);
    let (_, e) = scalar_bounds(sys_g);
    b.info("a", a);
    b.info("b", bb);
    b.info("e", e);
    b.hyp("Bessel bound of Γ at most the lower bound of Λ", (e - a).max(0.0), b.lim(a));
    if !b.hypotheses_ok() {
        return Ok(b.finish());
    }
    let fam: Family = sys_l
        .members()
        .map(|(atom, op)| Ok((atom.label.clone(), op.add(&sys_g.family()[&atom.label])?)))
        .collect::<Result<_>>()?;
    let sum = sys_l.with_family(fam)?;
    let (lo, hi) = scalar_bounds(&sum);
    b.info("exact_lower", lo);
    b.info("exact_upper", hi);
    certify(&mut b, &sum, (a - e).max(0.0), bb + e, "Λ + Γ")?;
    Ok(b.finish())
}

fn weights_for(sys: &GFrameSystem, w: Option<&BTreeMap<String, f64>>, name: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for atom in sys.measure().atoms() {
        let v = match w {
            None => 1.0,
            Some(m) => *m
                .get(&atom.label)
                .ok_or_else(|| GFrameError::Input(format!("{name} misses atom {:?}", atom.label)))?,
        };
        if !(v.is_finite() && v > 0.0) {
            return input(format!("{name} must be positive, got {v} at {:?}", atom.label));
        }
        out.insert(atom.label.clone(), v);
    }
    Ok(out)
}

fn weighted(sys: &GFrameSystem, fam: &Family, w: &BTreeMap<String, f64>) -> Result<GFrameSystem> {
    sys.with_family(fam.iter().map(|(k, op)| (k.clone(), op.scale_real(w[k]))).collect())
}

/// Certify `R` from `‖{(α_wT_w − β_wR_w)Cx}‖ ≤ λ‖{α_wT_wCx}‖ + μ‖{β_wR_wCx}‖`.
pub fn weighted_perturbation_check(
    sys_t: &GFrameSystem,
    family_r: &Family,
    params: &PerturbationParams,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    let (lambda, mu) = (params.lambda, params.mu);
    if !(0.0..1.0).contains(&lambda) || !(0.0..1.0).contains(&mu) {
        return Err(GFrameError::Domain(format!("λ and μ must lie in [0, 1), got {lambda} and {mu}")));
    }
    require_equal_controls(sys_t, tol)?;
    let sys_r = sys_t.with_family(family_r.clone())?;
    let alpha = weights_for(sys_t, params.alpha_w.as_ref(), "alpha_w")?;
    let beta = weights_for(sys_t, params.beta_w.as_ref(), "beta_w")?;
    let mut b = ReportBuilder::new("STABILITY-WEIGHTED", seed, tol);
    b.hyp_flag("T is a frame", is_frame(sys_t, tol));
    if !b.hypotheses_ok() {
        return Ok(b.finish());
    }
    let at = weighted(sys_t, sys_t.family(), &alpha)?;
    let br = weighted(sys_t, family_r, &beta)?;
    let diff = difference(&at, &br)?;
    let xs = probe_vectors(&[&diff, sys_t, &sys_r], samples, seed)?;
    let (excess, wit) = worst_excess(&xs, |x| {
        let lhs = gram_norm(&diff, x)?.sqrt();
        let rhs = lambda * gram_norm(&at, x)?.sqrt() + mu * gram_norm(&br, x)?.sqrt();
        Ok((lhs, rhs))
    })?;
    b.info("samples", xs.len() as f64);
    if !b.hyp("perturbation inequality on samples", excess, tol) {
        if let Some(w) = wit {
            b.witness(w);
        }
        return Ok(b.finish());
    }
    let fold = |m: &BTreeMap<String, f64>, f: fn(f64, f64) -> f64, init: f64| m.values().copied().fold(init, f);
    let (a_inf, a_sup) = (fold(&alpha, f64::min, f64::INFINITY), fold(&alpha, f64::max, 0.0));
    let (b_inf, b_sup) = (fold(&beta, f64::min, f64::INFINITY), fold(&beta, f64::max, 0.0));
    let lower_factor = (1.0 - lambda) * a_inf / ((1.0 + mu) * b_sup);
    let upper_factor = (1.0 + lambda) * a_sup / ((1.0 - mu) * b_inf);
    let (a, bb) = scalar_bounds(sys_t);
    let (lo, hi) = scalar_bounds(&sys_r);
    b.info("lower_factor", lower_factor);
    b.info("upper_factor", upper_factor);
    b.info("exact_lower", lo);
    b.info("exact_upper", hi);
    certify(&mut b, &sys_r, lower_factor * a, upper_factor * bb, "R")?;
    Ok(b.finish())
}

/// Certify `R` from `‖dist(x)‖ ≤ α‖gram_T(x)‖ + β‖⟨x,x⟩‖` with
/// `q = α + β/ν² < 1`, window `(ν(1 − √q), δ(1 + √q))`. The corollary form
/// drops the `α` term and reads `params.alpha` as the coefficient of
/// `‖⟨x,x⟩‖`.
pub fn additive_perturbation_check(
    sys_t: &GFrameSystem,
    family_r: &Family,
    params: &PerturbationParams,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    let (alpha, beta) = if params.corollary { (0.0, params.alpha) } else { (params.alpha, params.beta) };
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(GFrameError::Domain(format!("α and β must be nonnegative, got {alpha} and {beta}")));
    }
    require_equal_controls(sys_t, tol)?;
    let sys_r = sys_t.with_family(family_r.clone())?;
    let id = if params.corollary { "STABILITY-ADDITIVE-COROLLARY" } else { "STABILITY-ADDITIVE" };
    let mut b = ReportBuilder::new(id, seed, tol);
    b.hyp_flag("T is a frame", is_frame(sys_t, tol));
    if !b.hypotheses_ok() {
        return Ok(b.finish());
    }
    let (nu, delta) = scalar_bounds(sys_t);
    let q = alpha + beta / (nu * nu);
    if q >= 1.0 {
        return Err(GFrameError::Domain(format!("α + β/ν² = {q} is not below 1")));
    }
    b.info("nu", nu);
    b.info("delta", delta);
    b.info("q", q);
    let diff = difference(sys_t, &sys_r)?;
    let xs = probe_vectors(&[&diff, sys_t, &sys_r], samples, seed)?;
    let (excess, wit) = worst_excess(&xs, |x| {
        let xx = inner_product(x, x)?.norm();
        Ok((gram_norm(&diff, x)?, alpha * gram_norm(sys_t, x)? + beta * xx))
    })?;
    b.info("samples", xs.len() as f64);
    if !b.hyp("perturbation inequality on samples", excess, tol) {
        if let Some(w) = wit {
            b.witness(w);
        }
        return Ok(b.finish());
    }
    let r = q.sqrt();
    let (lo, hi) = scalar_bounds(&sys_r);
    b.info("exact_lower", lo);
    b.info("exact_upper", hi);
    b.info("squared_window_lower", nu * (1.0 - r).powi(2));
    b.info("squared_window_upper", delta * (1.0 + r).powi(2));
    certify(&mut b, &sys_r, nu * (1.0 - r), delta * (1.0 + r), "R")?;
    Ok(b.finish())
}

/// Dispatch on `params.kind`. `sys_b` holds the second family (Γ or R).
pub fn run_perturbation(
    params: &PerturbationParams,
    sys_a: &GFrameSystem,
    sys_b: &GFrameSystem,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<TheoremReport> {
    match params.kind {
        PerturbationKind::EquivalenceM => check_equivalence_m(sys_a, sys_b, params.m, samples, seed, tol),
        PerturbationKind::Sum => sum_frame_check(sys_a, sys_b, tol),
        PerturbationKind::Weighted | PerturbationKind::Additive => {
            require_same_structure(sys_a, sys_b, tol)?;
            if params.kind == PerturbationKind::Weighted {
                weighted_perturbation_check(sys_a, sys_b.family(), params, samples, seed, tol)
            } else {
                additive_perturbation_check(sys_a, sys_b.family(), params, samples, seed, tol)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled_frames::{generate_unit_interval, map_family};
    use crate::report::Status;
    use crate::star_algebra::DEFAULT_TOL;

    fn scaled(sys: &GFrameSystem, c: f64) -> GFrameSystem {
        sys.with_family(map_family(sys.family(), |_, op| Ok(op.scale_real(c))).unwrap()).unwrap()
    }

    fn unit() -> GFrameSystem {
        generate_unit_interval(1.5, 1.5, 3, 7).unwrap()
    }

    #[test]
    fn distance_to_self_is_zero_and_to_double_is_gram() {
        let s = unit();
        let x = ModuleVector::basis(s.algebra(), 1, 0);
        assert_eq!(family_distance(&s, &s, &x).unwrap().norm(), 0.0);
        let d = family_distance(&s, &scaled(&s, 2.0), &x).unwrap();
        assert!(d.distance(&controlled_gram(&s, &x).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn unequal_controls_are_rejected() {
        let s = generate_unit_interval(1.0, 2.0, 2, 5).unwrap();
        let x = ModuleVector::basis(s.algebra(), 1, 0);
        assert!(matches!(family_distance(&s, &s, &x), Err(GFrameError::Input(_))));
    }

    #[test]
    fn equivalence_with_itself_passes() {
        let s = unit();
        let r = check_equivalence_m(&s, &s, None, 50, 0, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.info["sampled_min_M"], 0.0);
    }

    #[test]
    fn additive_gate_rejects_large_q() {
        let s = unit();
        let mut p = PerturbationParams::new(PerturbationKind::Additive);
        p.alpha = 1.0;
        assert!(additive_perturbation_check(&s, s.family(), &p, 10, 0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn sum_with_zero_family_keeps_bounds() {
        let s = unit();
        let zero = scaled(&s, 0.0);
        let r = sum_frame_check(&s, &zero, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!((r.info["exact_lower"] - r.info["a"]).abs() < 1e-12);
    }
}
