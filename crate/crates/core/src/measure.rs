//! Finite atomic measure spaces standing in for `(Ω, μ)`.
//!
//! Every integral over `Ω` becomes a weighted sum over atoms. The unit
//! interval is represented by composite Simpson nodes, which integrate
//! cubics exactly.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{input, GFrameError, Result};
use crate::star_algebra::AlgebraElement;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub label: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct MeasureSpace {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for MeasureSpace {
    type Error = GFrameError;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        MeasureSpace::new(raw.atoms)
    }
}

impl MeasureSpace {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return input("measure space needs at least one atom");
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return input(format!("atom {:?} has non-positive weight {}", a.label, a.weight));
            }
            if !seen.insert(a.label.as_str()) {
                return input(format!("duplicate atom label {:?}", a.label));
            }
        }
        Ok(Self { atoms })
    }

    /// Single atom of weight 1.
    pub fn point(label: &str) -> Self {
        Self {
            atoms: vec![Atom {
                label: label.to_string(),
                weight: 1.0,
            }],
        }
    }

    /// Atoms `w0, w1, …` with the given weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .enumerate()
                .map(|(i, &w)| Atom {
                    label: format!("w{i}"),
                    weight: w,
                })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|a| a.label.as_str())
    }
}

/// `Σ_k μ_k f(w_k)`.
pub fn integrate_algebra(
    f: &BTreeMap<String, AlgebraElement>,
    m: &MeasureSpace,
) -> Result<AlgebraElement> {
    let mut acc: Option<AlgebraElement> = None;
    for atom in &m.atoms {
        let v = f
            .get(&atom.label)
            .ok_or_else(|| GFrameError::Input(format!("integrand missing atom {:?}", atom.label)))?
            .scale_real(atom.weight);
        acc = Some(match acc {
            None => v,
            Some(a) => a.add(&v)?,
        });
    }
    Ok(acc.expect("measure has atoms"))
}

/// Composite Simpson rule on `[0, 1]` with `nodes` equispaced points.
/// Atom labels are the node positions printed to 17 significant digits.
pub fn simpson_unit_interval(nodes: usize) -> Result<MeasureSpace> {
    if nodes < 3 || nodes.is_multiple_of(2) {
        return input(format!("Simpson rule needs an odd node count >= 3, got {nodes}"));
    }
    let panels = (nodes - 1) as f64;
    let h = 1.0 / panels;
    let atoms = (0..nodes)
        .map(|i| {
            let coef = if i == 0 || i == nodes - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            Atom {
                label: node_label(i as f64 / panels),
                weight: coef * h / 3.0,
            }
        })
        .collect();
    MeasureSpace::new(atoms)
}

fn node_label(w: f64) -> String {
    format!("{w}")
}

/// Position of a Simpson atom, recovered from its label.
pub fn node_position(label: &str) -> Option<f64> {
    label.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;
    use crate::star_algebra::AlgebraDescriptor;

    fn integrate_poly(m: &MeasureSpace, p: impl Fn(f64) -> f64) -> f64 {
        m.atoms()
            .iter()
            .map(|a| a.weight * p(node_position(&a.label).unwrap()))
            .sum()
    }

    #[test]
    fn three_node_weights() {
        let m = simpson_unit_interval(3).unwrap();
        let w: Vec<f64> = m.atoms().iter().map(|a| a.weight).collect();
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-16);
        assert!((w[1] - 4.0 / 6.0).abs() < 1e-16);
        assert!((w[2] - 1.0 / 6.0).abs() < 1e-16);
        let pos: Vec<f64> = m.labels().map(|l| node_position(l).unwrap()).collect();
        assert_eq!(pos, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let m = simpson_unit_interval(3).unwrap();
        assert!((integrate_poly(&m, |w| w * w) - 1.0 / 3.0).abs() < 1e-16);
        assert!((integrate_poly(&m, |w| w * w * w) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn even_nodes_rejected() {
        assert!(simpson_unit_interval(4).is_err());
        assert!(simpson_unit_interval(1).is_err());
    }

    #[test]
    fn integrate_examples() {
        let d = AlgebraDescriptor::matrix(2);
        let one = AlgebraElement::identity(d);
        let m = MeasureSpace::from_weights(&[0.25, 0.75]).unwrap();
        let f = BTreeMap::from([("w0".to_string(), one.clone()), ("w1".to_string(), one.scale_real(3.0))]);
        assert_eq!(integrate_algebra(&f, &m).unwrap(), one.scale(c(2.5, 0.0)));
        let missing = BTreeMap::from([("w0".to_string(), one.clone())]);
        assert!(integrate_algebra(&missing, &m).is_err());
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(MeasureSpace::from_weights(&[]).is_err());
        assert!(MeasureSpace::from_weights(&[1.0, 0.0]).is_err());
        let dup = vec![
            Atom { label: "a".into(), weight: 1.0 },
            Atom { label: "a".into(), weight: 2.0 },
        ];
        assert!(MeasureSpace::new(dup).is_err());
        let json = r#"{"atoms":[{"label":"a","weight":-1.0}]}"#;
        assert!(serde_json::from_str::<MeasureSpace>(json).is_err());
    }
}
