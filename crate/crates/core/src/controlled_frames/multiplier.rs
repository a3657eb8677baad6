//! Multipliers `Σ μ_w γ_w Λ*_wθ_w` and their controlled version.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dense::{self, C64};
use crate::error::{input, GFrameError, Result};
use crate::hilbert_module::{op_adjoint, op_chain, op_compose, op_norm, AdjointableOperator};
use crate::measure::MeasureSpace;

use super::system::{ControlPair, Family};

/// Scalar symbol indexed by atom label.
pub type Symbol = BTreeMap<String, C64>;

fn member<'a>(fam: &'a Family, label: &str, which: &str) -> Result<&'a AdjointableOperator> {
    fam.get(label)
        .ok_or_else(|| GFrameError::Input(format!("{which} family misses atom {label:?}")))
}

fn symbol_at(gamma: &Symbol, label: &str) -> Result<C64> {
    gamma
        .get(label)
        .copied()
        .ok_or_else(|| GFrameError::Input(format!("symbol misses atom {label:?}")))
}

pub fn symbol_sup(gamma: &Symbol) -> f64 {
    gamma.values().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn conj_symbol(gamma: &Symbol) -> Symbol {
    gamma.iter().map(|(k, z)| (k.clone(), z.conj())).collect()
}

/// `Σ μ_w γ_w pre*∘F*_w∘F_w∘pre`, with `pre` defaulting to the identity.
pub fn family_gram(fam: &Family, m: &MeasureSpace, pre: Option<&AdjointableOperator>) -> Result<AdjointableOperator> {
    let mut acc: Option<AdjointableOperator> = None;
    for atom in m.atoms() {
        let f = member(fam, &atom.label, "")?;
        let f = match pre {
            Some(p) => op_compose(f, p)?,
            None => f.clone(),
        };
        let term = op_compose(&op_adjoint(&f), &f)?.scale_real(atom.weight);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| GFrameError::Input("empty measure".into()))
}

/// `√λ_max(Σ μ F*F)`, the optimal Bessel bound of an uncontrolled family.
pub fn family_bessel_bound(fam: &Family, m: &MeasureSpace) -> Result<f64> {
    let g = family_gram(fam, m, None)?;
    Ok(dense::hermitian_eigenvalues(&g.flatten()).last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `L = Σ μ_w γ_w Λ*_w∘θ_w`.
pub fn multiplier(gamma: &Symbol, lam: &Family, theta: &Family, m: &MeasureSpace) -> Result<AdjointableOperator> {
    let mut acc: Option<AdjointableOperator> = None;
    for atom in m.atoms() {
        let l = member(lam, &atom.label, "Λ")?;
        let t = member(theta, &atom.label, "θ")?;
        if l.in_rank() != t.in_rank() || l.out_rank() != t.out_rank() {
            return input(format!("Λ and θ disagree in shape at atom {:?}", atom.label));
        }
        let term = op_compose(&op_adjoint(l), t)?.scale(symbol_at(gamma, &atom.label)? * atom.weight);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| GFrameError::Input("empty measure".into()))
}

/// `Σ μ_w γ_w C∘θ*_w∘Λ_w∘C'`.
pub fn controlled_multiplier(
    gamma: &Symbol,
    theta: &Family,
    lam: &Family,
    controls: &ControlPair,
    m: &MeasureSpace,
) -> Result<AdjointableOperator> {
    let mut acc: Option<AdjointableOperator> = None;
    for atom in m.atoms() {
        let l = member(lam, &atom.label, "Λ")?;
        let t = member(theta, &atom.label, "θ")?;
        let term = op_chain(&[&controls.c, &op_adjoint(t), l, &controls.cp])?
            .scale(symbol_at(gamma, &atom.label)? * atom.weight);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| GFrameError::Input("empty measure".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierSummary {
    pub norm: f64,
    pub symbol_sup: f64,
    pub bessel_lambda: f64,
    pub bessel_theta: f64,
    /// `‖γ‖_∞·b_Λ·b_θ`, the bound enforced.
    pub bound: f64,
    /// `‖γ‖²_∞·b_Λ²·b_θ²`, reported only.
    pub squared_bound: f64,
    /// `‖L* − Σ μ γ̄ θ*Λ‖`.
    pub adjoint_residual: f64,
    /// `‖L* − Σ μ γ̄ Λ*θ‖`; nonzero when the unswapped form is not the adjoint.
    pub unswapped_adjoint_residual: f64,
    pub unswapped_form_differs: bool,
    pub within_bound: bool,
}

/// Assemble `L` and its adjoint diagnostics.
pub fn multiplier_summary(
    gamma: &Symbol,
    lam: &Family,
    theta: &Family,
    m: &MeasureSpace,
    tol: f64,
) -> Result<(AdjointableOperator, MultiplierSummary)> {
    let l = multiplier(gamma, lam, theta, m)?;
    let l_adj = op_adjoint(&l);
    let gbar = conj_symbol(gamma);
    let swapped = multiplier(&gbar, theta, lam, m)?;
    let unswapped = multiplier(&gbar, lam, theta, m)?;
    let norm = op_norm(&l);
    let sup = symbol_sup(gamma);
    let bl = family_bessel_bound(lam, m)?;
    let bt = family_bessel_bound(theta, m)?;
    let bound = sup * bl * bt;
    let unswapped_res = op_norm(&l_adj.sub(&unswapped)?);
    let summary = MultiplierSummary {
        norm,
        symbol_sup: sup,
        bessel_lambda: bl,
        bessel_theta: bt,
        bound,
        squared_bound: bound * bound,
        adjoint_residual: op_norm(&l_adj.sub(&swapped)?),
        unswapped_adjoint_residual: unswapped_res,
        unswapped_form_differs: unswapped_res > tol * norm.max(1.0),
        within_bound: norm <= bound + tol * bound.max(1.0),
    };
    Ok((l, summary))
}
