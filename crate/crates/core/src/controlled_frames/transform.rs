//! The weighted direct sum `⊕V_w` and the analysis/synthesis pair.
//!
//! `⊕V_w` with inner product `Σ μ_w⟨y_w, z_w⟩` is isometric to `A^M`
//! (`M = Σ m_w`) via `y ↦ (√μ_w y_w)_w`, so operators into the direct sum
//! are stored as ordinary operators into `A^M`.

use std::collections::BTreeMap;

use crate::dense::c;
use crate::error::{input, Result};
use crate::hilbert_module::{
    inner_product, op_adjoint, op_apply, op_compose, op_sqrt_positive, AdjointableOperator,
    ModuleVector,
};
use crate::star_algebra::{AlgebraElement, DEFAULT_TOL};

use super::system::{Family, GFrameSystem};

/// Offsets of each atom's block inside `A^M`.
#[derive(Clone, Debug, PartialEq)]
pub struct StackLayout {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub offsets: Vec<usize>,
    pub ranks: Vec<usize>,
    pub total: usize,
}

impl StackLayout {
    pub fn of(sys: &GFrameSystem) -> Self {
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        let mut offsets = Vec::new();
        let mut ranks = Vec::new();
        let mut total = 0;
        for (atom, op) in sys.members() {
            labels.push(atom.label.clone());
            weights.push(atom.weight);
            offsets.push(total);
            ranks.push(op.out_rank());
            total += op.out_rank();
        }
        Self {
            labels,
            weights,
            offsets,
            ranks,
            total,
        }
    }

    fn index(&self, label: &str) -> Result<usize> {
        match self.labels.iter().position(|l| l == label) {
            Some(k) => Ok(k),
            None => input(format!("unknown atom {label:?}")),
        }
    }
}

/// `x ↦ (√μ_w F_w x)_w` as one operator `A^n → A^M`.
pub fn stack(layout: &StackLayout, family: &Family) -> Result<AdjointableOperator> {
    let first = family
        .get(&layout.labels[0])
        .ok_or_else(|| crate::GFrameError::Input("family misses an atom".into()))?;
    let n = first.in_rank();
    let mut rows: Vec<Vec<AlgebraElement>> = vec![Vec::with_capacity(layout.total); n];
    for (k, label) in layout.labels.iter().enumerate() {
        let op = family
            .get(label)
            .ok_or_else(|| crate::GFrameError::Input(format!("family misses atom {label:?}")))?;
        if op.in_rank() != n || op.out_rank() != layout.ranks[k] {
            return input(format!("member {label:?} does not fit the stack layout"));
        }
        let s = layout.weights[k].sqrt();
        for (i, row) in rows.iter_mut().enumerate() {
            row.extend(op.blocks()[i].iter().map(|b| b.scale_real(s)));
        }
    }
    AdjointableOperator::from_blocks(rows)
}

/// The `label` component of a stacked operator, divided by `√μ_w`.
pub fn unstack_one(layout: &StackLayout, t: &AdjointableOperator, label: &str) -> Result<AdjointableOperator> {
    if t.out_rank() != layout.total {
        return input("operator does not map into the stacked space");
    }
    let k = layout.index(label)?;
    let (off, m) = (layout.offsets[k], layout.ranks[k]);
    let s = 1.0 / layout.weights[k].sqrt();
    let rows = t
        .blocks()
        .iter()
        .map(|row| row[off..off + m].iter().map(|b| b.scale_real(s)).collect())
        .collect();
    AdjointableOperator::from_blocks(rows)
}

/// Inverse of [`stack`].
pub fn unstack(layout: &StackLayout, t: &AdjointableOperator) -> Result<Family> {
    layout
        .labels
        .iter()
        .map(|l| Ok((l.clone(), unstack_one(layout, t, l)?)))
        .collect()
}

/// Element of `⊕V_w`, one module vector per atom.
pub type DirectSumVector = BTreeMap<String, ModuleVector>;

/// `Σ μ_w⟨y_w, z_w⟩`.
pub fn direct_sum_inner(sys: &GFrameSystem, y: &DirectSumVector, z: &DirectSumVector) -> Result<AlgebraElement> {
    let mut acc = AlgebraElement::zero(sys.algebra());
    for atom in sys.measure().atoms() {
        let (a, b) = match (y.get(&atom.label), z.get(&atom.label)) {
            (Some(a), Some(b)) => (a, b),
            _ => return input(format!("direct-sum vector misses atom {:?}", atom.label)),
        };
        acc = acc.add(&inner_product(a, b)?.scale_real(atom.weight))?;
    }
    Ok(acc)
}

/// `(C'C)^{1/2}`.
pub fn control_root(sys: &GFrameSystem) -> Result<AdjointableOperator> {
    sys.require_commuting("the analysis operator")?;
    op_sqrt_positive(&op_compose(sys.cp(), sys.c())?, DEFAULT_TOL)
}

/// `x ↦ {Λ_w(C'C)^{1/2}x}`.
pub fn analysis(sys: &GFrameSystem, x: &ModuleVector) -> Result<DirectSumVector> {
    let rx = op_apply(&control_root(sys)?, x)?;
    sys.members()
        .map(|(atom, op)| Ok((atom.label.clone(), op_apply(op, &rx)?)))
        .collect()
}

/// `{y_w} ↦ Σ μ_w (CC')^{1/2}Λ*_w y_w`.
pub fn synthesis(sys: &GFrameSystem, y: &DirectSumVector) -> Result<ModuleVector> {
    let r = control_root(sys)?;
    let mut acc = ModuleVector::zero(sys.algebra(), sys.module_rank());
    for (atom, op) in sys.members() {
        let yw = y
            .get(&atom.label)
            .ok_or_else(|| crate::GFrameError::Input(format!("direct-sum vector misses atom {:?}", atom.label)))?;
        if yw.rank() != op.out_rank() {
            return input(format!("component {:?} has rank {}, expected {}", atom.label, yw.rank(), op.out_rank()));
        }
        let term = op_apply(&r, &op_apply(&op_adjoint(op), yw)?)?;
        acc = acc.add(&term.scale(c(atom.weight, 0.0)))?;
    }
    Ok(acc)
}

/// Analysis as a stacked operator `A^n → A^M`; its adjoint is synthesis and
/// `T*∘T = S`.
pub fn analysis_operator(sys: &GFrameSystem) -> Result<AdjointableOperator> {
    let r = control_root(sys)?;
    let layout = StackLayout::of(sys);
    let fam: Family = sys
        .members()
        .map(|(a, op)| Ok((a.label.clone(), op_compose(op, &r)?)))
        .collect::<Result<_>>()?;
    stack(&layout, &fam)
}

/// `x ↦ {Λ_w x}` stacked, ignoring the controls.
pub fn uncontrolled_analysis_operator(sys: &GFrameSystem) -> Result<AdjointableOperator> {
    stack(&StackLayout::of(sys), sys.family())
}

/// Stacked vector `(√μ_w y_w)_w` in `A^M`.
pub fn stack_vector(layout: &StackLayout, y: &DirectSumVector) -> Result<ModuleVector> {
    let mut coords = Vec::with_capacity(layout.total);
    for (k, label) in layout.labels.iter().enumerate() {
        let v = y
            .get(label)
            .ok_or_else(|| crate::GFrameError::Input(format!("direct-sum vector misses atom {label:?}")))?;
        if v.rank() != layout.ranks[k] {
            return input(format!("component {label:?} has the wrong rank"));
        }
        let s = layout.weights[k].sqrt();
        coords.extend(v.coords().iter().map(|a| a.scale_real(s)));
    }
    ModuleVector::new(coords)
}
