//! Built-in example frames and the JSON frame document format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrameGeometry, GeometryError, Submersion, DEFAULT_TOLERANCE};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed frame document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown example `{0}` (expected hopf, heisenberg, warped or flat_torus:<n_v>,<n_h>)")]
    UnknownExample(String),
    #[error("bracket [E_{i}, E_{j}] is listed more than once")]
    DuplicateBracket { i: usize, j: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Hopf fibration `S³ → S²` at a point, in a basic frame that is synchronous
/// there. The only bracket is `[f₁, f₂] = −2e₁`, which gives
/// `Ω(f₁, f₂, e₁) = 2`: the round metric of radius one on `S³` over the
/// sphere of radius ½. In the left-invariant picture this is the su(2)
/// normalization `[E_i, E_j] = −2ε_ijk E_k`, with the vertical part of the
/// mixed brackets removed by passing to basic fields.
pub fn hopf() -> FrameGeometry {
    FrameGeometry::from_brackets("hopf", 1, 2, true, &[(1, 2, 0, -2.0)]).expect("static example")
}

/// Heisenberg nilmanifold over a flat torus: `[f₁, f₂] = e₁`.
pub fn heisenberg() -> FrameGeometry {
    FrameGeometry::from_brackets("heisenberg", 1, 2, true, &[(1, 2, 0, 1.0)])
        .expect("static example")
}

/// Circle fibers whose length varies along `f₁`: `[f₁, e₁] = e₁`, so
/// `S(e₁, e₁, f₁) = −1` and `k = −f¹`.
pub fn warped() -> FrameGeometry {
    FrameGeometry::from_brackets("warped", 1, 2, true, &[(1, 0, 0, 1.0)]).expect("static example")
}

pub fn flat_torus(n_v: usize, n_h: usize) -> Result<FrameGeometry, GeometryError> {
    FrameGeometry::zero(format!("flat_torus:{n_v},{n_h}"), n_v, n_h, true)
}

/// Resolves `hopf`, `heisenberg`, `warped` or `flat_torus:<n_v>,<n_h>`.
pub fn by_name(name: &str) -> Result<FrameGeometry, CatalogError> {
    match name {
        "hopf" => Ok(hopf()),
        "heisenberg" => Ok(heisenberg()),
        "warped" => Ok(warped()),
        _ => {
            let dims = name
                .strip_prefix("flat_torus:")
                .and_then(|rest| rest.split_once(','))
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            match dims {
                Some((n_v, n_h)) => Ok(flat_torus(n_v, n_h)?),
                None => Err(CatalogError::UnknownExample(name.to_string())),
            }
        }
    }
}

pub fn names() -> [&'static str; 4] {
    ["hopf", "heisenberg", "warped", "flat_torus:<n_v>,<n_h>"]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDocument {
    pub label: String,
    pub dim_vertical: usize,
    pub dim_horizontal: usize,
    pub brackets: Vec<BracketEntry>,
    pub constant: bool,
}

/// `[E_i, E_j] = Σ value·E_k`, 1-based; omitted coefficients are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coefficients: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub k: usize,
    pub value: f64,
}

impl FrameDocument {
    /// Writes each bracket once, with `i < j`, keeping only nonzero coefficients.
    pub fn from_frame(g: &FrameGeometry) -> Self {
        let n = g.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let coefficients: Vec<Coefficient> = (0..n)
                    .filter(|&k| g.c(k, i, j) != 0.0)
                    .map(|k| Coefficient {
                        k: k + 1,
                        value: g.c(k, i, j),
                    })
                    .collect();
                if !coefficients.is_empty() {
                    brackets.push(BracketEntry {
                        i: i + 1,
                        j: j + 1,
                        coefficients,
                    });
                }
            }
        }
        Self {
            label: g.label().to_string(),
            dim_vertical: g.n_v(),
            dim_horizontal: g.n_h(),
            brackets,
            constant: g.is_constant(),
        }
    }

    /// Builds the raw frame. A bracket listed only as `(i, j)` also fixes
    /// `(j, i)` by antisymmetry; listing both keeps both as written, so that
    /// inconsistent data reaches validation.
    pub fn to_frame(&self) -> Result<FrameGeometry, CatalogError> {
        let mut g = FrameGeometry::zero(
            self.label.clone(),
            self.dim_vertical,
            self.dim_horizontal,
            self.constant,
        )?;
        let dim = g.dim();
        let check = |index: usize| {
            if index == 0 || index > dim {
                Err(GeometryError::IndexOutOfRange { index, dim })
            } else {
                Ok(index - 1)
            }
        };
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.brackets {
            if !seen.insert((entry.i, entry.j)) {
                return Err(CatalogError::DuplicateBracket {
                    i: entry.i,
                    j: entry.j,
                });
            }
        }
        for entry in &self.brackets {
            let (i, j) = (check(entry.i)?, check(entry.j)?);
            let mirrored = seen.contains(&(entry.j, entry.i));
            for coeff in &entry.coefficients {
                let k = check(coeff.k)?;
                g.set_raw(k, i, j, coeff.value);
                if !mirrored {
                    g.set_raw(k, j, i, -coeff.value);
                }
            }
        }
        Ok(g)
    }
}

pub fn to_json(g: &FrameGeometry) -> String {
    serde_json::to_string_pretty(&FrameDocument::from_frame(g))
        .expect("frame documents always serialize")
}

/// Parses a frame document without validating the submersion invariants.
pub fn parse(doc: &str) -> Result<FrameGeometry, CatalogError> {
    let document: FrameDocument = serde_json::from_str(doc)?;
    document.to_frame()
}

/// Parses and validates a frame document.
pub fn load_str(doc: &str) -> Result<Submersion, CatalogError> {
    Ok(Submersion::new(parse(doc)?, DEFAULT_TOLERANCE)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<Submersion, CatalogError> {
    let path = path.as_ref();
    let doc = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_str(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Diagnostic;

    #[test]
    fn catalog_examples_satisfy_jacobi() {
        for g in [hopf(), heisenberg(), warped(), flat_torus(2, 3).unwrap()] {
            assert!(g.is_constant());
            assert_eq!(g.validate(DEFAULT_TOLERANCE), vec![], "{}", g.label());
        }
    }

    #[test]
    fn hopf_curvature_is_two() {
        let s: Submersion = hopf().try_into().unwrap();
        assert_eq!(s.submersion_curvature().get(1, 2, 0), 2.0);
        assert_eq!(s.mean_curvature().max_abs(), 0.0);
        assert_eq!(s.second_fundamental_form().max_abs(), 0.0);
    }

    #[test]
    fn names_resolve() {
        assert_eq!(by_name("hopf").unwrap(), hopf());
        assert_eq!(by_name("flat_torus:2, 3").unwrap().dim(), 5);
        assert!(matches!(
            by_name("flat_torus:0,2"),
            Err(CatalogError::Geometry(_))
        ));
        assert!(matches!(
            by_name("klein"),
            Err(CatalogError::UnknownExample(_))
        ));
        assert!(matches!(
            by_name("flat_torus:2"),
            Err(CatalogError::UnknownExample(_))
        ));
    }

    #[test]
    fn hopf_round_trips() {
        let doc = to_json(&hopf());
        assert_eq!(load_str(&doc).unwrap().into_frame(), hopf());
    }

    #[test]
    fn missing_field_is_named() {
        let doc = r#"{"label": "x", "dim_horizontal": 2, "brackets": [], "constant": true}"#;
        let err = load_str(doc).unwrap_err().to_string();
        assert!(err.contains("dim_vertical"), "{err}");
    }

    #[test]
    fn symmetric_entry_is_an_antisymmetry_violation() {
        let doc = r#"{"label": "bad", "dim_vertical": 1, "dim_horizontal": 2, "constant": true,
            "brackets": [
                {"i": 2, "j": 3, "coefficients": [{"k": 1, "value": 1.0}]},
                {"i": 3, "j": 2, "coefficients": [{"k": 1, "value": 1.0}]}
            ]}"#;
        match load_str(doc).unwrap_err() {
            CatalogError::Geometry(GeometryError::Invalid(diags)) => {
                assert!(diags
                    .iter()
                    .any(|d| matches!(d, Diagnostic::Antisymmetry { .. })));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_and_duplicates_rejected() {
        let doc = r#"{"label": "bad", "dim_vertical": 1, "dim_horizontal": 2, "constant": true,
            "brackets": [{"i": 2, "j": 4, "coefficients": []}]}"#;
        assert!(matches!(
            parse(doc),
            Err(CatalogError::Geometry(GeometryError::IndexOutOfRange {
                index: 4,
                dim: 3
            }))
        ));
        let doc = r#"{"label": "bad", "dim_vertical": 1, "dim_horizontal": 2, "constant": true,
            "brackets": [{"i": 2, "j": 3, "coefficients": []}, {"i": 2, "j": 3, "coefficients": []}]}"#;
        assert!(matches!(
            parse(doc),
            Err(CatalogError::DuplicateBracket { i: 2, j: 3 })
        ));
    }

    #[test]
    fn horizontal_mixed_bracket_reported() {
        let doc = r#"{"label": "bad", "dim_vertical": 1, "dim_horizontal": 2, "constant": false,
            "brackets": [{"i": 1, "j": 2, "coefficients": [{"k": 3, "value": 0.5}]}]}"#;
        match load_str(doc).unwrap_err() {
            CatalogError::Geometry(GeometryError::Invalid(diags)) => {
                assert!(matches!(
                    diags[0],
                    Diagnostic::MixedBracket {
                        k: 3,
                        i: 1,
                        j: 2,
                        ..
                    }
                ));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
