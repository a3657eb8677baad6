mod common;

use common::*;
use gframe::controlled_frames::*;
use gframe::hilbert_module::*;
use gframe::report::{Status, TheoremReport};
use gframe::stability::*;
use gframe::star_algebra::DEFAULT_TOL;
use gframe::GFrameError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 200;

fn scaled(sys: &GFrameSystem, c: f64) -> GFrameSystem {
    sys.with_family(map_family(sys.family(), |_, op| Ok(op.scale_real(c))).unwrap()).unwrap()
}

fn same_controls(sys: &GFrameSystem) -> GFrameSystem {
    sys.with_controls(sys.c().clone(), sys.c().clone()).unwrap()
}

fn info(r: &TheoremReport, k: &str) -> f64 {
    *r.info.get(k).unwrap_or_else(|| panic!("missing info {k}: {r:?}"))
}

/// `(√λ_min, √λ_max)` of the frame operator, computed with the brute-force
/// assembly.
fn exact_bounds(sys: &GFrameSystem) -> (f64, f64) {
    let s = oracle_frame_operator(sys);
    let eig = gframe::dense::hermitian_eigenvalues(&s);
    (eig[0].max(0.0).sqrt(), eig[eig.len() - 1].sqrt())
}

fn window_contains(r: &TheoremReport, label: &str, lo: f64, hi: f64) -> bool {
    let slack = 1e-9 * hi.max(1.0);
    info(r, &format!("{label}_lower")) <= lo + slack && info(r, &format!("{label}_upper")) >= hi - slack
}

#[test]
fn distance_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..6 {
        let a = seeded_system(seed, InstanceKind::CommutingSame);
        let x = ModuleVector::random(a.algebra(), a.module_rank(), &mut rng);
        assert_eq!(family_distance(&a, &a, &x).unwrap().norm(), 0.0);
        let two = scaled(&a, 2.0);
        let d = family_distance(&a, &two, &x).unwrap();
        assert!(d.distance(&controlled_gram(&a, &x).unwrap()).unwrap() <= 1e-12 * d.norm().max(1.0));
        assert_eq!(d, family_distance(&two, &a, &x).unwrap());
    }
    let a = seeded_system(0, InstanceKind::CommutingSame);
    let b = seeded_system(1, InstanceKind::CommutingSame);
    let x = ModuleVector::zero(a.algebra(), a.module_rank());
    assert!(matches!(family_distance(&a, &b, &x), Err(GFrameError::Input(_))));
    let general = seeded_system(0, InstanceKind::General);
    if general.control_gap() > 0.0 {
        let x = ModuleVector::zero(general.algebra(), general.module_rank());
        assert!(matches!(family_distance(&general, &general, &x), Err(GFrameError::Input(_))));
    }
}

#[test]
fn equivalence_examples() {
    let a = unit_interval(1.0, 1.0, 3);
    let r = check_equivalence_m(&a, &a, None, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(info(&r, "sampled_min_M"), 0.0);

    // Γ = 1.5Λ: dist = 0.25·gram_Λ and min(gram_Λ, 2.25·gram_Λ) = gram_Λ
    let b = scaled(&a, 1.5);
    let r = check_equivalence_m(&a, &b, None, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    let want = 0.5f64.powi(2) / 1.0f64.min(1.5f64.powi(2));
    assert!((info(&r, "sampled_min_M") - want).abs() <= 1e-12);

    for seed in 0..5 {
        let a = seeded_system(seed, InstanceKind::CommutingSame);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = map_family(a.family(), |_, op| {
            let p = AdjointableOperator::random(op.descriptor(), op.in_rank(), op.out_rank(), &mut rng);
            op.add(&p.scale_real(1e-3))
        })
        .unwrap();
        let b = a.with_family(fam).unwrap();
        let r = check_equivalence_m(&a, &b, None, SAMPLES, seed, DEFAULT_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        let (a0, b0) = exact_bounds(&a);
        let (e0, f0) = exact_bounds(&b);
        let m_star = ((b0 / e0 + 1.0).powi(2)).min((f0 / a0 + 1.0).powi(2));
        assert!((info(&r, "M_star") - m_star).abs() <= 1e-8 * m_star);
    }
}

#[test]
fn equivalence_rejects_small_m() {
    let a = unit_interval(1.0, 1.0, 3);
    let b = scaled(&a, 1.5);
    let r = check_equivalence_m(&a, &b, Some(0.2), SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(!r.passed());
    assert!(r.witness.is_some());
}

#[test]
fn sum_examples() {
    let a = unit_interval(1.0, 1.0, 3);
    let zero = scaled(&a, 0.0);
    let r = sum_frame_check(&a, &zero, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    let (lo, hi) = exact_bounds(&a);
    assert!((info(&r, "Λ + Γ_lower") - lo).abs() < 1e-12 && (info(&r, "Λ + Γ_upper") - hi).abs() < 1e-12);

    // Γ = Λ has e = b > a
    let r = sum_frame_check(&a, &a, DEFAULT_TOL).unwrap();
    assert_eq!(r.status, Status::NotApplicable);

    for seed in 0..5 {
        let l = seeded_system(seed, InstanceKind::CommutingSame);
        let (al, _) = exact_bounds(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = l.with_family(
            map_family(l.family(), |_, op| {
                Ok(AdjointableOperator::random(op.descriptor(), op.in_rank(), op.out_rank(), &mut rng))
            })
            .unwrap(),
        )
        .unwrap();
        let (_, e_raw) = exact_bounds(&raw);
        let g = scaled(&raw, 0.5 * al / e_raw);
        let r = sum_frame_check(&l, &g, DEFAULT_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        let (lo, hi) = (info(&r, "exact_lower"), info(&r, "exact_upper"));
        assert!(window_contains(&r, "Λ + Γ", lo, hi));
    }
}

#[test]
fn weighted_examples() {
    let t = unit_interval(1.0, 1.0, 3);
    let (a, b) = exact_bounds(&t);
    let p = PerturbationParams::new(PerturbationKind::Weighted);
    let r = weighted_perturbation_check(&t, t.family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    assert!((info(&r, "R_lower") - a).abs() < 1e-12 && (info(&r, "R_upper") - b).abs() < 1e-12);

    // R = cT with α_w = β_w = 1: |1 − c| ≤ λ + μc
    for (c, lambda, mu) in [(0.5, 0.5, 0.0), (2.0, 0.0, 0.5)] {
        let mut p = PerturbationParams::new(PerturbationKind::Weighted);
        p.lambda = lambda;
        p.mu = mu;
        let r = weighted_perturbation_check(&t, scaled(&t, c).family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(info(&r, "lower_factor") <= c + 1e-12 && info(&r, "upper_factor") >= c - 1e-12);
        assert!(window_contains(&r, "R", c * a, c * b));
    }

    for seed in 0..4 {
        let t = seeded_system(seed, InstanceKind::CommutingSame);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
        let fam = map_family(t.family(), |_, op| {
            let p = AdjointableOperator::random(op.descriptor(), op.in_rank(), op.out_rank(), &mut rng);
            op.add(&p.scale_real(1e-3))
        })
        .unwrap();
        let mut p = PerturbationParams::new(PerturbationKind::Weighted);
        p.lambda = 0.1;
        p.mu = 0.1;
        let r = weighted_perturbation_check(&t, &fam, &p, SAMPLES, seed, DEFAULT_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    let mut bad = PerturbationParams::new(PerturbationKind::Weighted);
    bad.lambda = 1.0;
    assert!(matches!(
        weighted_perturbation_check(&t, t.family(), &bad, SAMPLES, 0, DEFAULT_TOL),
        Err(GFrameError::Domain(_))
    ));
}

#[test]
fn weighted_hypothesis_failure_has_witness() {
    let t = unit_interval(1.0, 1.0, 3);
    let p = PerturbationParams::new(PerturbationKind::Weighted);
    let r = weighted_perturbation_check(&t, scaled(&t, 2.0).family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert_eq!(r.status, Status::NotApplicable);
    assert!(r.witness.is_some());
}

#[test]
fn additive_examples() {
    let t = unit_interval(1.0, 1.0, 3);
    let (nu, delta) = exact_bounds(&t);
    let p = PerturbationParams::new(PerturbationKind::Additive);
    let r = additive_perturbation_check(&t, t.family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    assert!((info(&r, "R_lower") - nu).abs() < 1e-12 && (info(&r, "R_upper") - delta).abs() < 1e-12);

    let eps = 0.01;
    let mut p = PerturbationParams::new(PerturbationKind::Additive);
    p.alpha = eps * eps * (1.0 + 1e-6);
    let r = additive_perturbation_check(&t, scaled(&t, 1.0 + eps).family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(window_contains(&r, "R", (1.0 + eps) * nu, (1.0 + eps) * delta));

    let mut gate = PerturbationParams::new(PerturbationKind::Additive);
    gate.alpha = 0.5;
    gate.beta = 0.5 * nu * nu;
    assert!(matches!(
        additive_perturbation_check(&t, t.family(), &gate, SAMPLES, 0, DEFAULT_TOL),
        Err(GFrameError::Domain(_))
    ));

    // corollary: ‖dist‖ ≤ α‖⟨x,x⟩‖ with dist = ε²·gram and ‖gram‖ ≤ δ²‖⟨x,x⟩‖
    let mut cor = PerturbationParams::new(PerturbationKind::Additive);
    cor.corollary = true;
    cor.alpha = eps * eps * delta * delta * (1.0 + 1e-6);
    let r = additive_perturbation_check(&t, scaled(&t, 1.0 + eps).family(), &cor, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn passing_reports_feed_back_into_check_frame() {
    let t = unit_interval(2.0, 2.0, 3);
    for c in [0.5, 1.5] {
        let mut p = PerturbationParams::new(PerturbationKind::Weighted);
        p.alpha_w = Some(t.measure().labels().map(|l| (l.to_string(), c)).collect());
        let r_sys = scaled(&t, c);
        let r = weighted_perturbation_check(&t, r_sys.family(), &p, SAMPLES, 0, DEFAULT_TOL).unwrap();
        assert!(r.passed(), "{r:?}");
        let fb = FrameBounds::scalar(t.algebra(), info(&r, "R_lower"), info(&r, "R_upper"));
        assert!(check_frame(&r_sys, &fb, CheckMode::ExactScalar, 0, 0, DEFAULT_TOL).unwrap().passed());
    }
}

#[test]
fn run_perturbation_dispatch() {
    let t = same_controls(&seeded_system(3, InstanceKind::Commuting));
    let zero = scaled(&t, 0.0);
    let r = run_perturbation(&PerturbationParams::new(PerturbationKind::Sum), &t, &zero, SAMPLES, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    let other = seeded_system(4, InstanceKind::CommutingSame);
    assert!(run_perturbation(&PerturbationParams::new(PerturbationKind::Additive), &t, &other, SAMPLES, 0, DEFAULT_TOL).is_err());
}
