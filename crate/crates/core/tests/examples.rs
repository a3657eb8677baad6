mod common;

use std::collections::BTreeMap;

use common::*;
use gframe::controlled_frames::*;
use gframe::dense::{c, CMatrix, C64};
use gframe::hilbert_module::*;
use gframe::measure::{integrate_algebra, node_position, simpson_unit_interval, MeasureSpace};
use gframe::star_algebra::*;
use gframe::GFrameError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const M2: AlgebraDescriptor = AlgebraDescriptor {
    kind: AlgebraKind::Matrix,
    dim: 2,
};

fn m2(rows: [[C64; 2]; 2]) -> AlgebraElement {
    let m = CMatrix::from_fn(2, 2, |i, j| rows[i][j]);
    AlgebraElement::from_matrix(M2, &m).unwrap()
}

fn re(x: f64) -> C64 {
    c(x, 0.0)
}

/// Eigenvalues of a Hermitian 2×2 matrix from its characteristic polynomial.
fn herm2_eigs(m: &CMatrix) -> (f64, f64) {
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------- algebra ----------

#[test]
fn algebra_arith_and_adjoint() {
    for desc in [AlgebraDescriptor::diagonal(2), M2] {
        let s = diag(desc, &[1.0, 2.0]).add(&diag(desc, &[3.0, 4.0])).unwrap();
        assert_eq!(s, diag(desc, &[4.0, 6.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = AlgebraElement::random(desc, &mut rng);
        assert_eq!(AlgebraElement::identity(desc).mul(&a).unwrap(), a);
        assert_eq!(AlgebraElement::identity(desc).adjoint(), AlgebraElement::identity(desc));
    }
    let z = re(0.0);
    let a = m2([[z, c(0.0, 1.0)], [z, z]]);
    assert_eq!(a.adjoint(), m2([[z, z], [c(0.0, -1.0), z]]));
    assert!(matches!(
        diag(M2, &[1.0, 2.0]).add(&diag(AlgebraDescriptor::diagonal(2), &[1.0, 2.0])),
        Err(GFrameError::Input(_))
    ));
}

#[test]
fn algebra_norm() {
    assert_eq!(AlgebraElement::identity(M2).norm(), 1.0);
    assert!(close(diag(AlgebraDescriptor::diagonal(2), &[3.0, -4.0]).norm(), 4.0, 1e-15));
    let z = re(0.0);
    let a = m2([[z, re(2.0)], [z, z]]);
    let ata = naive_mul(&a.to_matrix().adjoint(), &a.to_matrix());
    let (_, top) = herm2_eigs(&ata);
    assert!(close(a.norm(), top.sqrt(), 1e-12));
    assert!(close(a.norm(), 2.0, 1e-12));
}

#[test]
fn algebra_positivity() {
    let tol = DEFAULT_TOL;
    assert!(AlgebraElement::identity(M2).is_positive(tol));
    let a = m2([[re(1.0), re(2.0)], [re(2.0), re(1.0)]]);
    let (lo, hi) = herm2_eigs(&a.to_matrix());
    assert!(close(lo, -1.0, 1e-14) && close(hi, 3.0, 1e-14));
    assert!(!a.is_positive(tol));
    assert!(diag(M2, &[0.0, 5.0]).is_positive(tol));

    assert!(diag(M2, &[1.0, 2.0]).is_positive_by_norm_shift(tol).unwrap());
    assert!(!diag(M2, &[-1.0, 1.0]).is_positive_by_norm_shift(tol).unwrap());
    let z = re(0.0);
    assert!(matches!(
        m2([[z, re(1.0)], [z, z]]).is_positive_by_norm_shift(tol),
        Err(GFrameError::Input(_))
    ));
}

#[test]
fn algebra_sqrt_and_inverse() {
    let tol = DEFAULT_TOL;
    assert!(diag(M2, &[4.0, 9.0]).sqrt_positive(tol).unwrap().distance(&diag(M2, &[2.0, 3.0])).unwrap() < 1e-14);
    let id = AlgebraElement::identity(M2);
    assert!(id.sqrt_positive(tol).unwrap().distance(&id).unwrap() < 1e-14);

    let a = m2([[re(2.0), re(1.0)], [re(1.0), re(2.0)]]);
    let p = a.sqrt_positive(tol).unwrap();
    assert!(p.mul(&p).unwrap().distance(&a).unwrap() <= 1e-12);
    let (lo, hi) = herm2_eigs(&p.to_matrix());
    assert!(close(lo, 1.0, 1e-12) && close(hi, 3f64.sqrt(), 1e-12));
    assert!(matches!(diag(M2, &[-1.0, 1.0]).sqrt_positive(tol), Err(GFrameError::Domain(_))));

    let inv = diag(M2, &[2.0, 4.0]).invert(DEFAULT_COND_CAP).unwrap();
    assert!(inv.distance(&diag(M2, &[0.5, 0.25])).unwrap() < 1e-15);
    assert!(matches!(diag(M2, &[1.0, 0.0]).invert(DEFAULT_COND_CAP), Err(GFrameError::Domain(_))));
}

#[test]
fn algebra_leq() {
    let zero = AlgebraElement::zero(M2);
    let one = AlgebraElement::identity(M2);
    assert!(zero.leq(&one, DEFAULT_TOL).unwrap());
    assert!(!one.leq(&zero, DEFAULT_TOL).unwrap());
}

// ---------- module ----------

#[test]
fn module_inner_product_and_norm() {
    let d1 = AlgebraDescriptor::matrix(1);
    let e = |v: f64| AlgebraElement::scalar(d1, re(v));
    let x = ModuleVector::new(vec![e(1.0), e(0.0)]).unwrap();
    let y = ModuleVector::new(vec![e(0.0), e(1.0)]).unwrap();
    assert_eq!(inner_product(&x, &y).unwrap().norm(), 0.0);
    let ones = ModuleVector::new(vec![e(1.0), e(1.0)]).unwrap();
    assert!(close(inner_product(&ones, &ones).unwrap().entries()[0].re, 2.0, 1e-15));

    assert_eq!(scalar_norm(&ModuleVector::basis(M2, 3, 0)), 1.0);
    assert_eq!(scalar_norm(&ModuleVector::zero(M2, 3)), 0.0);
    assert!(matches!(
        inner_product(&ModuleVector::zero(M2, 2), &ModuleVector::zero(M2, 3)),
        Err(GFrameError::Input(_))
    ));
}

#[test]
fn module_apply_and_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for desc in [M2, AlgebraDescriptor::diagonal(3)] {
        let x = ModuleVector::random(desc, 3, &mut rng);
        assert_eq!(op_apply(&AdjointableOperator::identity(desc, 3), &x).unwrap(), x);
        let z = op_apply(&AdjointableOperator::zero(desc, 3, 2), &x).unwrap();
        assert_eq!(scalar_norm(&z), 0.0);
        let id = AdjointableOperator::identity(desc, 3);
        assert_eq!(op_adjoint(&id), id);

        let t = AdjointableOperator::random(desc, 3, 2, &mut rng);
        let ta = op_adjoint(&t);
        let scale = op_norm(&t);
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let x = ModuleVector::random(desc, 3, &mut rng);
            let y = ModuleVector::random(desc, 2, &mut rng);
            let lhs = inner_product(&op_apply(&t, &x).unwrap(), &y).unwrap();
            let rhs = inner_product(&x, &op_apply(&ta, &y).unwrap()).unwrap();
            let s = scale * scalar_norm(&x) * scalar_norm(&y);
            worst = worst.max(lhs.distance(&rhs).unwrap() / s);
        }
        assert!(worst <= 1e-12, "adjoint defect {worst}");
    }
    // d = 1: plain conjugate transpose
    let d1 = AlgebraDescriptor::matrix(1);
    let t = AdjointableOperator::random(d1, 3, 4, &mut rng);
    assert!(max_abs_diff(&op_adjoint(&t).flatten(), &t.flatten().adjoint()) == 0.0);
}

#[test]
fn module_compose_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for desc in [M2, AlgebraDescriptor::diagonal(2)] {
        let r = AdjointableOperator::random(desc, 4, 2, &mut rng);
        let s = AdjointableOperator::random(desc, 3, 4, &mut rng);
        let t = AdjointableOperator::random(desc, 2, 3, &mut rng);
        assert_eq!(op_compose(&s, &AdjointableOperator::identity(desc, 3)).unwrap(), s);
        let st = op_compose(&s, &t).unwrap();
        let lhs = op_adjoint(&st);
        let rhs = op_compose(&op_adjoint(&t), &op_adjoint(&s)).unwrap();
        assert!(op_distance(&lhs, &rhs).unwrap() < 1e-12);
        let left = op_compose(&op_compose(&r, &s).unwrap(), &t).unwrap();
        let right = op_compose(&r, &op_compose(&s, &t).unwrap()).unwrap();
        assert!(op_distance(&left, &right).unwrap() < 1e-12);
        // flatten(S∘T) = flatten(T)·flatten(S), checked with the hand-built oracle
        let expect = naive_mul(&oracle_flatten(&t), &oracle_flatten(&s));
        assert!(max_abs_diff(&st.flatten(), &expect) < 1e-12);
        // applying composites matches applying in sequence
        let x = ModuleVector::random(desc, 2, &mut rng);
        let seq = op_apply(&s, &op_apply(&t, &x).unwrap()).unwrap();
        let comp = op_apply(&st, &x).unwrap();
        assert!(scalar_norm(&seq.sub(&comp).unwrap()) < 1e-12);
        assert!(op_compose(&s, &s).is_err());
    }
}

#[test]
fn module_flatten() {
    let id = AdjointableOperator::identity(M2, 2).flatten();
    assert_eq!(id, CMatrix::identity(4, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for desc in [M2, AlgebraDescriptor::diagonal(3)] {
        let t = AdjointableOperator::random(desc, 2, 3, &mut rng);
        assert_eq!(op_adjoint(&t).flatten(), t.flatten().adjoint());
        assert_eq!(t.flatten(), oracle_flatten(&t));
        let x = ModuleVector::random(desc, 2, &mut rng);
        assert_eq!(x.flatten(), oracle_row(&x));
    }
}

#[test]
fn module_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!(close(op_norm(&AdjointableOperator::identity(M2, 3)), 1.0, 1e-14));
    assert!(close(op_norm(&AdjointableOperator::scalar(M2, 3, c(3.0, 4.0))), 5.0, 1e-13));
    assert!(close(bounded_below_constant(&AdjointableOperator::identity(M2, 2)), 1.0, 1e-14));

    let d1 = AlgebraDescriptor::matrix(1);
    let t = AdjointableOperator::random(d1, 2, 3, &mut rng);
    let n = op_norm(&t);
    let mut sampled = 0.0_f64;
    for _ in 0..500 {
        let x = ModuleVector::random_unit(d1, 2, &mut rng);
        let v = scalar_norm(&op_apply(&t, &x).unwrap());
        assert!(v <= n * (1.0 + 1e-12));
        sampled = sampled.max(v);
    }
    assert!(sampled >= 0.95 * n, "sampled {sampled} vs {n}");

    // rank-deficient: the second input coordinate is sent to zero
    let mut blocks = vec![vec![AlgebraElement::zero(M2); 2]; 2];
    blocks[0][0] = AlgebraElement::identity(M2);
    let def = AdjointableOperator::from_blocks(blocks).unwrap();
    assert!(bounded_below_constant(&def) < 1e-14);

    let t = AdjointableOperator::random_positive_invertible(M2, 3, 0.5, &mut rng);
    let m = bounded_below_constant(&t);
    assert!(m > 0.0);
    for _ in 0..200 {
        let x = ModuleVector::random(M2, 3, &mut rng);
        assert!(m * scalar_norm(&x) <= scalar_norm(&op_apply(&t, &x).unwrap()) * (1.0 + 1e-12));
    }
}

#[test]
fn module_positive_part_checks() {
    let p = positive_part_checks(&AdjointableOperator::identity(M2, 2), DEFAULT_TOL);
    assert!(p.self_adjoint && p.positive && p.invertible);
    assert!(close(p.lower, 1.0, 1e-14) && close(p.upper, 1.0, 1e-14));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = AdjointableOperator::random(M2, 2, 4, &mut rng);
    let tt = op_compose(&op_adjoint(&t), &t).unwrap();
    let p = positive_part_checks(&tt, DEFAULT_TOL);
    assert!(p.self_adjoint && p.positive && p.invertible);
    assert!(p.upper <= op_norm(&t).powi(2) * (1.0 + 1e-12));

    let mut blocks = vec![vec![AlgebraElement::zero(M2); 2]; 2];
    blocks[0][1] = AlgebraElement::identity(M2);
    let nil = AdjointableOperator::from_blocks(blocks).unwrap();
    assert!(!positive_part_checks(&nil, DEFAULT_TOL).self_adjoint);
}

// ---------- measure ----------

#[test]
fn measure_integration() {
    let a = diag(M2, &[1.0, -2.0]);
    let point = MeasureSpace::point("p");
    let f: BTreeMap<_, _> = [("p".to_string(), a.clone())].into();
    assert_eq!(integrate_algebra(&f, &point).unwrap(), a);
    let f0: BTreeMap<_, _> = [("p".to_string(), AlgebraElement::zero(M2))].into();
    assert_eq!(integrate_algebra(&f0, &point).unwrap(), AlgebraElement::zero(M2));

    let two = MeasureSpace::from_weights(&[0.25, 0.75]).unwrap();
    let labels: Vec<String> = two.labels().map(str::to_string).collect();
    let one = AlgebraElement::identity(M2);
    let f: BTreeMap<_, _> = [(labels[0].clone(), one.clone()), (labels[1].clone(), one.scale_real(3.0))].into();
    let v = integrate_algebra(&f, &two).unwrap();
    assert!(v.distance(&one.scale_real(2.5)).unwrap() < 1e-15);
    let missing: BTreeMap<_, _> = [(labels[0].clone(), one)].into();
    assert!(matches!(integrate_algebra(&missing, &two), Err(GFrameError::Input(_))));
}

fn simpson_moment(nodes: usize, p: i32) -> f64 {
    let m = simpson_unit_interval(nodes).unwrap();
    let d1 = AlgebraDescriptor::matrix(1);
    let f: BTreeMap<_, _> = m
        .atoms()
        .iter()
        .map(|a| (a.label.clone(), AlgebraElement::scalar(d1, re(node_position(&a.label).unwrap().powi(p)))))
        .collect();
    integrate_algebra(&f, &m).unwrap().entries()[0].re
}

#[test]
fn measure_simpson() {
    let m = simpson_unit_interval(3).unwrap();
    let got: Vec<(f64, f64)> = m.atoms().iter().map(|a| (node_position(&a.label).unwrap(), a.weight)).collect();
    let want = [(0.0, 1.0 / 6.0), (0.5, 4.0 / 6.0), (1.0, 1.0 / 6.0)];
    for (g, w) in got.iter().zip(want) {
        assert!(close(g.0, w.0, 1e-15) && close(g.1, w.1, 1e-15));
    }
    assert!(close(simpson_moment(3, 2), 1.0 / 3.0, 1e-15));
    assert!(close(simpson_moment(3, 3), 0.25, 1e-15));
    assert!(close(simpson_moment(11, 2), 1.0 / 3.0, 1e-15));
    assert!(simpson_unit_interval(4).is_err());
    assert!(simpson_unit_interval(1).is_err());
}

// ---------- frames ----------

#[test]
fn gram_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sys = identity_frame(M2, 2);
    let x = ModuleVector::random(M2, 2, &mut rng);
    let g = controlled_gram(&sys, &x).unwrap();
    assert!(g.distance(&inner_product(&x, &x).unwrap()).unwrap() < 1e-14);
    assert_eq!(controlled_gram(&sys, &ModuleVector::zero(M2, 2)).unwrap().norm(), 0.0);

    let ui = unit_interval(2.0, 3.0, 3);
    let desc = ui.algebra();
    let a = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)];
    let xa = AlgebraElement::new(desc, a.to_vec()).unwrap();
    let x = ModuleVector::new(vec![xa]).unwrap();
    let g = controlled_gram(&ui, &x).unwrap();
    let want: Vec<f64> = a.iter().enumerate().map(|(n, z)| 2.0 * z.norm_sqr() / ((n + 1) * (n + 1)) as f64).collect();
    assert!(g.distance(&diag(desc, &want)).unwrap() < 1e-12);
}

#[test]
fn frame_operator_examples() {
    let sys = identity_frame(M2, 3);
    assert!(op_distance(&frame_operator(&sys), &AdjointableOperator::identity(M2, 3)).unwrap() < 1e-15);
    let ui = unit_interval(1.0, 1.0, 3);
    let want = AdjointableOperator::block_diagonal(vec![diag(ui.algebra(), &[1.0 / 3.0, 1.0 / 12.0, 1.0 / 27.0])]).unwrap();
    assert!(max_abs_diff(&frame_operator(&ui).flatten(), &want.flatten()) <= 1e-12);
}

#[test]
fn scalar_bounds_examples() {
    let fb = optimal_scalar_bounds(&identity_frame(M2, 2), DEFAULT_TOL).unwrap();
    assert!(fb.frame && close(fb.scalar_lower, 1.0, 1e-12) && close(fb.scalar_upper, 1.0, 1e-12));
    let fb = optimal_scalar_bounds(&unit_interval(1.0, 1.0, 3), DEFAULT_TOL).unwrap();
    assert!(close(fb.scalar_lower, 1.0 / 27f64.sqrt(), 1e-9));
    assert!(close(fb.scalar_upper, 1.0 / 3f64.sqrt(), 1e-9));

    let base = identity_frame(M2, 2);
    let zero_fam = map_family(base.family(), |_, op| Ok(op.scale_real(0.0))).unwrap();
    let fb = optimal_scalar_bounds(&base.with_family(zero_fam).unwrap(), DEFAULT_TOL).unwrap();
    assert!(!fb.frame);
    assert_eq!(fb.scalar_lower, 0.0);

    let nc = seeded_system(0, InstanceKind::General);
    if !nc.is_commuting() {
        assert!(matches!(optimal_scalar_bounds(&nc, DEFAULT_TOL), Err(GFrameError::Unsupported(_))));
    }
}

#[test]
fn check_frame_examples() {
    let sys = identity_frame(M2, 2);
    let r = check_frame(&sys, &FrameBounds::scalar(M2, 1.0, 1.0), CheckMode::ExactScalar, 0, 0, DEFAULT_TOL).unwrap();
    assert!(r.passed());
    for mode in [CheckMode::ExactScalar, CheckMode::SampledGeneral] {
        let r = check_frame(&sys, &FrameBounds::scalar(M2, 2.0, 2.0), mode, 50, 0, DEFAULT_TOL).unwrap();
        assert!(!r.passed());
        assert!(r.witness.is_some());
    }

    // element bounds for the unit-interval example: √(αβ)/4·diag(1/n) and √(αβ)·diag(1/n)
    let (alpha, beta) = (2.0, 3.0);
    let ui = unit_interval(alpha, beta, 3);
    let desc = ui.algebra();
    let r = (alpha * beta).sqrt();
    let inv_n: Vec<f64> = (1..=3).map(|n| 1.0 / n as f64).collect();
    let lower = diag(desc, &inv_n.iter().map(|v| r / 4.0 * v).collect::<Vec<_>>());
    let upper = diag(desc, &inv_n.iter().map(|v| r * v).collect::<Vec<_>>());
    let bounds = FrameBounds {
        lower,
        upper,
        scalar_lower: r / 12.0,
        scalar_upper: r,
        frame: true,
    };
    let rep = check_frame(&ui, &bounds, CheckMode::SampledGeneral, 200, 4, DEFAULT_TOL).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn analysis_synthesis_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sys = identity_frame(M2, 2);
    let x = ModuleVector::random(M2, 2, &mut rng);
    let y = analysis(&sys, &x).unwrap();
    assert_eq!(y.len(), 1);
    assert!(scalar_norm(&y["w0"].sub(&x).unwrap()) < 1e-14);
    assert!(scalar_norm(&synthesis(&sys, &y).unwrap().sub(&x).unwrap()) < 1e-14);
    let z = analysis(&sys, &ModuleVector::zero(M2, 2)).unwrap();
    assert!(z.values().all(|v| scalar_norm(v) == 0.0));

    for seed in 0..6 {
        let sys = seeded_system(seed, InstanceKind::CommutingSame);
        let desc = sys.algebra();
        let n = sys.module_rank();
        let s = frame_operator(&sys);
        let scale = op_norm(&s);
        for _ in 0..10 {
            let x = ModuleVector::random(desc, n, &mut rng);
            let ax = analysis(&sys, &x).unwrap();
            let lhs = direct_sum_inner(&sys, &ax, &ax).unwrap();
            let rhs = inner_product(&op_apply(&s, &x).unwrap(), &x).unwrap();
            assert!(lhs.distance(&rhs).unwrap() <= 1e-10 * scale * scalar_norm(&x).powi(2));

            let yv: DirectSumVector = sys
                .members()
                .map(|(atom, op)| (atom.label.clone(), ModuleVector::random(desc, op.out_rank(), &mut rng)))
                .collect();
            let l = inner_product(&synthesis(&sys, &yv).unwrap(), &x).unwrap();
            let r = direct_sum_inner(&sys, &yv, &ax).unwrap();
            let yn = direct_sum_inner(&sys, &yv, &yv).unwrap().norm().sqrt();
            assert!(l.distance(&r).unwrap() <= 1e-10 * scale.sqrt() * yn * scalar_norm(&x));

            let sa = synthesis(&sys, &ax).unwrap();
            assert!(scalar_norm(&sa.sub(&op_apply(&s, &x).unwrap()).unwrap()) <= 1e-10 * scale * scalar_norm(&x));
        }
    }
}

#[test]
fn canonical_dual_examples() {
    let sys = identity_frame(M2, 2);
    let cert = canonical_dual(&sys, 0).unwrap();
    assert!(cert.passed && cert.reconstruction_residual < 1e-14);
    assert!(op_distance(&cert.dual_family["w0"], &AdjointableOperator::identity(M2, 2)).unwrap() < 1e-14);

    let (alpha, beta) = (2.0, 3.0);
    let ui = unit_interval(alpha, beta, 3);
    let cert = canonical_dual(&ui, 0).unwrap();
    assert!(cert.reconstruction_residual <= 1e-10);
    let sinv = diag(ui.algebra(), &[3.0 / (alpha * beta), 12.0 / (alpha * beta), 27.0 / (alpha * beta)]);
    for (label, op) in ui.family() {
        let want = op.block(0, 0).mul(&sinv).unwrap();
        assert!(cert.dual_family[label].block(0, 0).distance(&want).unwrap() < 1e-12);
    }

    for seed in 0..5 {
        let sys = seeded_system(seed, InstanceKind::Commuting);
        let cert = canonical_dual(&sys, seed).unwrap();
        assert!(cert.passed && cert.reconstruction_residual <= 1e-8);
    }
}

#[test]
fn operator_dual_examples() {
    let ui = unit_interval(1.0, 1.0, 3);
    let desc = ui.algebra();
    let canon = canonical_dual(&ui, 0).unwrap().dual_family;
    let id = AdjointableOperator::identity(desc, 1);
    assert!(operator_dual_check(&ui, &canon, &id, 0).unwrap().passed);

    // K diagonal, so it commutes with S
    let k = AdjointableOperator::block_diagonal(vec![diag(desc, &[1.0, 2.0, 3.0])]).unwrap();
    let kinv = op_inverse(&k, DEFAULT_COND_CAP).unwrap();
    let dual = map_family(&canon, |_, g| op_compose(g, &kinv)).unwrap();
    let cert = operator_dual_check(&ui, &dual, &k, 0).unwrap();
    assert!(cert.passed, "{}", cert.reconstruction_residual);

    let two = AdjointableOperator::scalar(desc, 1, re(2.0));
    let cert = operator_dual_check(&ui, &canon, &two, 0).unwrap();
    assert!(!cert.passed);
    assert!(close(cert.reconstruction_residual, 1.0, 1e-9));

    let singular = AdjointableOperator::block_diagonal(vec![diag(desc, &[1.0, 0.0, 1.0])]).unwrap();
    assert!(matches!(operator_dual_check(&ui, &canon, &singular, 0), Err(GFrameError::Domain(_))));
}

fn const_symbol(m: &MeasureSpace, v: C64) -> Symbol {
    m.labels().map(|l| (l.to_string(), v)).collect()
}

#[test]
fn multiplier_examples() {
    for seed in 0..4 {
        let sys = seeded_system(seed, InstanceKind::Commuting).without_controls().unwrap();
        let m = sys.measure();
        let one = const_symbol(m, re(1.0));
        let l = multiplier(&one, sys.family(), sys.family(), m).unwrap();
        assert!(op_distance(&l, &frame_operator(&sys)).unwrap() < 1e-11);
        let zero = multiplier(&const_symbol(m, re(0.0)), sys.family(), sys.family(), m).unwrap();
        assert_eq!(op_norm(&zero), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma: Symbol = m.labels().map(|l| (l.to_string(), gaussian_c64(&mut rng))).collect();
        let other = seeded_system(seed, InstanceKind::Commuting);
        let theta = map_family(other.family(), |_, op| Ok(op.scale(c(0.5, -0.25)))).unwrap();
        let (l, summary) = multiplier_summary(&gamma, sys.family(), &theta, m, DEFAULT_TOL).unwrap();
        assert!(close(op_norm(&op_adjoint(&l)), op_norm(&l), 1e-10 * op_norm(&l).max(1.0)));
        assert!(summary.adjoint_residual <= 1e-10);
        assert!(summary.within_bound);
        let brute = oracle_multiplier(&gamma, sys.family(), &theta, m);
        assert!(max_abs_diff(&l.flatten(), &brute) <= 1e-11);
    }
}

#[test]
fn controlled_multiplier_examples() {
    for seed in 0..4 {
        let base = seeded_system(seed, InstanceKind::Commuting);
        let desc = base.algebra();
        let n = base.module_rank();
        let m = base.measure();
        let one = const_symbol(m, re(1.0));
        let plain = base.without_controls().unwrap();
        let ident = plain.controls().clone();
        let l = controlled_multiplier(&one, base.family(), base.family(), &ident, m).unwrap();
        assert!(op_distance(&l, &frame_operator(&plain)).unwrap() < 1e-11);

        let (cc, ccp) = (1.5, 0.75);
        let scaled = base
            .with_controls(
                AdjointableOperator::scalar(desc, n, re(cc)),
                AdjointableOperator::scalar(desc, n, re(ccp)),
            )
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 50);
        let gamma: Symbol = m.labels().map(|l| (l.to_string(), gaussian_c64(&mut rng))).collect();
        let lc = controlled_multiplier(&gamma, base.family(), base.family(), scaled.controls(), m).unwrap();
        let lu = multiplier(&gamma, base.family(), base.family(), m).unwrap();
        assert!(op_distance(&lc, &lu.scale_real(cc * ccp)).unwrap() <= 1e-11 * op_norm(&lu).max(1.0));

        let zero = controlled_multiplier(&const_symbol(m, re(0.0)), base.family(), base.family(), base.controls(), m).unwrap();
        assert_eq!(op_norm(&zero), 0.0);
    }
}

#[test]
fn theorem_examples() {
    let r = verify_theorem(TheoremId::FoProps, Some(&identity_frame(M2, 2)), 0, DEFAULT_TOL, Mutation::None).unwrap();
    assert!(r.passed(), "{r:?}");
    let conclusion = r.conclusion.as_ref().unwrap();
    assert!(conclusion.checks.iter().all(|c| c.residual <= 1e-14));

    let ui = unit_interval(1.0, 1.0, 3);
    let desc = ui.algebra();
    let theta = AdjointableOperator::block_diagonal(vec![diag(desc, &[1.0, 2.0, 3.0])]).unwrap();
    let rep = right_composition_report(&ui, &theta, 0, DEFAULT_TOL).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let composed = ui.with_family(map_family(ui.family(), |_, op| op_compose(op, &theta)).unwrap()).unwrap();
    let want = AdjointableOperator::block_diagonal(vec![diag(desc, &[1.0 / 3.0; 3])]).unwrap();
    assert!(op_distance(&frame_operator(&composed), &want).unwrap() <= 1e-12);

    assert!(TheoremId::parse("NOPE").is_err());
}
