//! Instance generators: the unit-interval example, seeded random systems in
//! several control regimes, and auxiliary operators (commutant elements,
//! projections, well-conditioned perturbations of the identity).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{self, c, CMatrix, C64};
use crate::error::{input, GFrameError, Result};
use crate::hilbert_module::{op_norm, AdjointableOperator};
use crate::measure::{simpson_unit_interval, MeasureSpace};
use crate::star_algebra::{gaussian_c64, AlgebraDescriptor, AlgebraKind, AlgebraElement};

use super::system::{frame_operator, Family, GFrameSystem};

/// Diagonal algebra `ℂ^k` on `A^1`, `Λ_w = w·diag(1, 1/2, …, 1/k)`,
/// `C = αI`, `C' = βI`, Simpson nodes on `[0, 1]`.
pub fn generate_unit_interval(alpha: f64, beta: f64, rank: usize, nodes: usize) -> Result<GFrameSystem> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return input("alpha and beta must be positive");
    }
    if rank == 0 {
        return input("rank must be at least 1");
    }
    let m = simpson_unit_interval(nodes)?;
    let desc = AlgebraDescriptor::diagonal(rank);
    let family = m
        .atoms()
        .iter()
        .map(|a| {
            let w = crate::measure::node_position(&a.label).expect("Simpson labels are positions");
            let diag: Vec<f64> = (1..=rank).map(|n| w / n as f64).collect();
            let el = AlgebraElement::from_real_diagonal(desc, &diag)?;
            Ok((a.label.clone(), AdjointableOperator::from_blocks(vec![vec![el]])?))
        })
        .collect::<Result<Family>>()?;
    let ca = AdjointableOperator::scalar(desc, 1, c(alpha, 0.0));
    let cb = AdjointableOperator::scalar(desc, 1, c(beta, 0.0));
    GFrameSystem::new(desc, 1, m, family, ca, cb)
}

/// Control regime of a random instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// Gaussian family, independent `C`, `C'` of the form `q*q + εI`.
    General,
    /// Gaussian family, `C = C' = q*q + εI`.
    GeneralSame,
    /// `C`, `C'` and every `Λ*Λ` commute; `C ≠ C'`.
    Commuting,
    /// As `Commuting` with `C = C'`.
    CommutingSame,
    /// Gaussian family, `C = cI`, `C' = c'I`.
    ScalarControls,
    /// As `ScalarControls` with every member square (`m_w = n`).
    ScalarControlsSquare,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 6] = [
        InstanceKind::General,
        InstanceKind::GeneralSame,
        InstanceKind::Commuting,
        InstanceKind::CommutingSame,
        InstanceKind::ScalarControls,
        InstanceKind::ScalarControlsSquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::General => "general",
            InstanceKind::GeneralSame => "general_same",
            InstanceKind::Commuting => "commuting",
            InstanceKind::CommutingSame => "commuting_same",
            InstanceKind::ScalarControls => "scalar_controls",
            InstanceKind::ScalarControlsSquare => "scalar_controls_square",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GFrameError::Input(format!("unknown instance kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub algebra: AlgebraDescriptor,
    pub rank: usize,
    pub atoms: usize,
    pub kind: InstanceKind,
}

/// Seeded instance; the same seed always gives the same system.
pub fn random_system(spec: RandomSpec, seed: u64) -> Result<GFrameSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_random(spec, &mut rng)
}

pub fn generate_random<R: Rng + ?Sized>(spec: RandomSpec, rng: &mut R) -> Result<GFrameSystem> {
    if spec.rank == 0 || spec.atoms == 0 {
        return input("rank and atom count must be at least 1");
    }
    let (desc, n) = (spec.algebra, spec.rank);
    let weights: Vec<f64> = (0..spec.atoms).map(|_| rng.random_range(0.2..1.0)).collect();
    let measure = MeasureSpace::from_weights(&weights)?;
    let square = spec.kind == InstanceKind::ScalarControlsSquare;
    let ranks = output_ranks(n, spec.atoms, square, rng);
    match spec.kind {
        InstanceKind::Commuting | InstanceKind::CommutingSame => {
            let family = commuting_family(desc, n, &measure, &ranks, rng)?;
            let base = GFrameSystem::uncontrolled(desc, n, measure, family)?;
            let s0 = frame_operator(&base);
            let cc = positive_polynomial(&s0, rng)?;
            let cp = if spec.kind == InstanceKind::CommutingSame {
                cc.clone()
            } else {
                positive_polynomial(&s0, rng)?
            };
            base.with_controls(cc, cp)
        }
        _ => {
            let family = gaussian_family(desc, n, &measure, &ranks, rng)?;
            let (cc, cp) = match spec.kind {
                InstanceKind::General => (
                    AdjointableOperator::random_positive_invertible(desc, n, 0.5, rng),
                    AdjointableOperator::random_positive_invertible(desc, n, 0.5, rng),
                ),
                InstanceKind::GeneralSame => {
                    let q = AdjointableOperator::random_positive_invertible(desc, n, 0.5, rng);
                    (q.clone(), q)
                }
                _ => (
                    AdjointableOperator::scalar(desc, n, c(rng.random_range(0.5..2.0), 0.0)),
                    AdjointableOperator::scalar(desc, n, c(rng.random_range(0.5..2.0), 0.0)),
                ),
            };
            GFrameSystem::new(desc, n, measure, family, cc, cp)
        }
    }
}

/// Output ranks in `1..=n` with `Σ m_w ≥ n`.
fn output_ranks<R: Rng + ?Sized>(n: usize, atoms: usize, square: bool, rng: &mut R) -> Vec<usize> {
    if square {
        return vec![n; atoms];
    }
    let mut ranks: Vec<usize> = (0..atoms).map(|_| rng.random_range(1..=n)).collect();
    while ranks.iter().sum::<usize>() < n {
        let k = rng.random_range(0..atoms);
        if ranks[k] < n {
            ranks[k] += 1;
        }
    }
    ranks
}

/// Gaussian members, redrawn until the uncontrolled frame operator has
/// condition number at most `1e3`.
fn gaussian_family<R: Rng + ?Sized>(
    desc: AlgebraDescriptor,
    n: usize,
    measure: &MeasureSpace,
    ranks: &[usize],
    rng: &mut R,
) -> Result<Family> {
    for _ in 0..50 {
        let family: Family = measure
            .atoms()
            .iter()
            .zip(ranks)
            .map(|(a, &m)| (a.label.clone(), AdjointableOperator::random(desc, n, m, rng)))
            .collect();
        let sys = GFrameSystem::uncontrolled(desc, n, measure.clone(), family.clone())?;
        if dense::condition_number(&frame_operator(&sys).flatten()) <= 1e3 {
            return Ok(family);
        }
    }
    Err(GFrameError::Domain("could not draw a well-conditioned Gaussian family".into()))
}

/// Haar-like unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(size: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(size, size, |_, _| gaussian_c64(rng));
    g.qr().q()
}

/// Members `F_w = V^H D_w W_w` per component, with `V` shared so that every
/// `F_w F_w^H` is diagonal in the same basis. The supports of the `D_w`
/// cover the whole component, which makes the family a frame.
fn commuting_family<R: Rng + ?Sized>(
    desc: AlgebraDescriptor,
    n: usize,
    measure: &MeasureSpace,
    ranks: &[usize],
    rng: &mut R,
) -> Result<Family> {
    let (ncomp, size, scale) = match desc.kind {
        AlgebraKind::Matrix => (1, n * desc.dim, desc.dim),
        AlgebraKind::Diagonal => (desc.dim, n, 1),
    };
    let mut comps: Vec<Vec<CMatrix>> = vec![Vec::with_capacity(ncomp); ranks.len()];
    for _ in 0..ncomp {
        let v = random_unitary(size, rng);
        let mut perm: Vec<usize> = (0..size).collect();
        perm.shuffle(rng);
        let mut p = 0;
        for (w, &m) in ranks.iter().enumerate() {
            let cols = m * scale;
            let mut d = CMatrix::zeros(size, cols);
            for col in 0..cols.min(size) {
                d[(perm[p % size], col)] = c(rng.random_range(0.5..1.5), 0.0);
                p += 1;
            }
            let wmat = random_unitary(cols, rng);
            comps[w].push(v.adjoint() * d * wmat);
        }
    }
    measure
        .atoms()
        .iter()
        .zip(ranks)
        .zip(comps)
        .map(|((a, &m), cs)| Ok((a.label.clone(), AdjointableOperator::from_components(desc, n, m, &cs)?)))
        .collect()
}

/// Apply `f` to the spectrum of each component of a square operator.
pub fn componentwise_map(
    t: &AdjointableOperator,
    f: impl Fn(f64) -> C64,
) -> Result<AdjointableOperator> {
    let comps: Vec<CMatrix> = t.components().iter().map(|m| dense::complex_spectral_map(m, &f)).collect();
    AdjointableOperator::from_components(t.descriptor(), t.in_rank(), t.out_rank(), &comps)
}

/// `c₀I + c₁X + c₂X²` with `X = S/‖S‖` and positive coefficients: positive,
/// invertible and commuting with everything that commutes with `S`.
pub fn positive_polynomial<R: Rng + ?Sized>(s: &AdjointableOperator, rng: &mut R) -> Result<AdjointableOperator> {
    let norm = op_norm(s).max(f64::MIN_POSITIVE);
    let (c0, c1, c2) = (
        rng.random_range(0.3..1.5),
        rng.random_range(0.2..1.5),
        rng.random_range(0.0..1.0),
    );
    componentwise_map(s, move |l| {
        let x = l / norm;
        c(c0 + c1 * x + c2 * x * x, 0.0)
    })
}

/// `s·e^{iφ}(I + 0.4·G/‖G‖)` for Gaussian `G`: invertible with condition
/// number below `1.4/0.6`.
pub fn well_conditioned_operator<R: Rng + ?Sized>(desc: AlgebraDescriptor, n: usize, rng: &mut R) -> AdjointableOperator {
    let g = AdjointableOperator::random(desc, n, n, rng);
    let g = g.scale_real(0.4 / op_norm(&g).max(f64::MIN_POSITIVE));
    let s = rng.random_range(0.5..2.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    AdjointableOperator::identity(desc, n)
        .add(&g)
        .expect("same shape")
        .scale(C64::from_polar(s, phase))
}

/// `H = C + 2C'`, plus `3S/‖S‖` when `with_s`; everything that commutes with
/// all three commutes with `H`.
pub fn commutant_generator(sys: &GFrameSystem, with_s: bool) -> Result<AdjointableOperator> {
    let mut h = sys.c().add(&sys.cp().scale_real(2.0))?;
    if with_s {
        let s = frame_operator(sys);
        h = h.add(&s.scale_real(3.0 / op_norm(&s).max(f64::MIN_POSITIVE)))?;
    }
    Ok(h)
}

/// An invertible normal function of `H` with modulus in `[0.5, 2]` and a
/// varying phase.
pub fn commutant_operator<R: Rng + ?Sized>(h: &AdjointableOperator, rng: &mut R) -> Result<AdjointableOperator> {
    let (p, q) = (rng.random_range(0.5..3.0), rng.random_range(0.0..std::f64::consts::TAU));
    let (p2, q2, amp) = (
        rng.random_range(0.5..3.0),
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..1.5),
    );
    componentwise_map(h, move |l| C64::from_polar(1.25 + 0.75 * (p * l + q).sin(), amp * (p2 * l + q2).sin()))
}

/// Spectral projection of `H` onto the eigenvalues above its widest gap.
/// `None` when the spectrum has no gap wider than `1e-6`.
pub fn spectral_projection(h: &AdjointableOperator) -> Result<Option<AdjointableOperator>> {
    let mut eig = dense::hermitian_eigenvalues(&h.flatten());
    eig.sort_by(f64::total_cmp);
    let Some((k, gap)) = eig
        .windows(2)
        .enumerate()
        .map(|(k, w)| (k, w[1] - w[0]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return Ok(None);
    };
    if gap <= 1e-6 {
        return Ok(None);
    }
    let cut = 0.5 * (eig[k] + eig[k + 1]);
    componentwise_map(h, move |l| c(if l > cut { 1.0 } else { 0.0 }, 0.0)).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled_frames::system::optimal_scalar_bounds;
    use crate::hilbert_module::commutator_norm;

    fn spec(seed: u64, kind: InstanceKind) -> RandomSpec {
        let algebra = if seed.is_multiple_of(2) {
            AlgebraDescriptor::matrix(1 + (seed % 3) as usize)
        } else {
            AlgebraDescriptor::diagonal(2 + (seed % 2) as usize)
        };
        RandomSpec {
            algebra,
            rank: 2 + (seed as usize / 2) % 2,
            atoms: 3 + (seed % 4) as usize,
            kind,
        }
    }

    #[test]
    fn commuting_kinds_commute_and_are_frames() {
        for seed in 0..12 {
            for kind in [InstanceKind::Commuting, InstanceKind::CommutingSame] {
                let sys = random_system(spec(seed, kind), seed).unwrap();
                assert!(sys.is_commuting(), "seed {seed}: {:?}", sys.controls().family_residual);
                assert!(sys.controls().each_other_residual < 1e-12);
                assert!(optimal_scalar_bounds(&sys, 1e-9).unwrap().frame);
            }
        }
    }

    #[test]
    fn general_kind_is_not_commuting() {
        let sys = random_system(spec(3, InstanceKind::General), 3).unwrap();
        assert!(!sys.is_commuting());
        assert!(matches!(optimal_scalar_bounds(&sys, 1e-9), Err(GFrameError::Unsupported(_))));
    }

    #[test]
    fn same_seed_same_system() {
        for kind in InstanceKind::ALL {
            let a = random_system(spec(5, kind), 5).unwrap();
            let b = random_system(spec(5, kind), 5).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn commutant_operator_commutes_with_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..6 {
            let sys = random_system(spec(seed, InstanceKind::Commuting), seed).unwrap();
            let h = commutant_generator(&sys, true).unwrap();
            let th = commutant_operator(&h, &mut rng).unwrap();
            assert!(commutator_norm(&th, sys.c()).unwrap() < 1e-10);
            assert!(commutator_norm(&th, sys.cp()).unwrap() < 1e-10);
            assert!(commutator_norm(&th, &frame_operator(&sys)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn unit_interval_rejects_even_nodes() {
        assert!(generate_unit_interval(1.0, 1.0, 3, 4).is_err());
        assert!(generate_unit_interval(0.0, 1.0, 3, 5).is_err());
    }
}
