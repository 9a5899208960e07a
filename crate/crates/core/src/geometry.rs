//! Submersion frame data and the tensors derived from it.
//!
//! A Riemannian submersion is presented at a working point by an orthonormal
//! frame `E_1..E_N` whose first `n_v` members are vertical and whose last
//! `n_h` members are horizontal lifts of an orthonormal base frame. All
//! geometry is encoded in the bracket coefficients
//! `[E_i, E_j] = Σ_k c[k][i][j] E_k`. Because the frame is orthonormal, every
//! metric-derivative term in the Koszul formula drops out and the
//! connection coefficients are linear in `c`.
//!
//! Indices are 0-based in code and 1-based in serialized documents.

use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance for double-precision identity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(
        "vertical and horizontal dimensions must both be at least 1 (got n_v = {n_v}, n_h = {n_h})"
    )]
    EmptySplit { n_v: usize, n_h: usize },
    #[error("structure coefficient array has {found} entries, expected {expected} for a {dim}-dimensional frame")]
    Shape {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("bracket index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("frame data violates {} invariant(s): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("{what} must be symmetric positive definite")]
    NotPositiveDefinite { what: &'static str },
    #[error("{what} has shape {found:?}, expected {expected:?}")]
    MatrixShape {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
}

fn summarize(diags: &[Diagnostic]) -> String {
    let shown: Vec<String> = diags.iter().take(3).map(ToString::to_string).collect();
    let mut s = shown.join("; ");
    if diags.len() > 3 {
        s.push_str(&format!("; … and {} more", diags.len() - 3));
    }
    s
}

/// One violated frame invariant. Indices are reported 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    Antisymmetry {
        k: usize,
        i: usize,
        j: usize,
        defect: f64,
    },
    VerticalClosure {
        k: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    MixedBracket {
        k: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    Jacobi {
        l: usize,
        i: usize,
        j: usize,
        k: usize,
        defect: f64,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Antisymmetry { k, i, j, defect } => write!(
                f,
                "antisymmetry: c[{k}][{i}][{j}] + c[{k}][{j}][{i}] = {defect:e}"
            ),
            Self::VerticalClosure { k, i, j, value } => write!(
                f,
                "vertical closure: [E_{i}, E_{j}] has horizontal component c[{k}][{i}][{j}] = {value:e}"
            ),
            Self::MixedBracket { k, i, j, value } => write!(
                f,
                "mixed bracket: [E_{i}, E_{j}] has horizontal component c[{k}][{i}][{j}] = {value:e}"
            ),
            Self::Jacobi { l, i, j, k, defect } => write!(
                f,
                "Jacobi: E_{l}-component of the cyclic sum over ({i}, {j}, {k}) is {defect:e}"
            ),
        }
    }
}

/// Dense `n × n × n` real array, row-major in the three slots.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cube {
    n: usize,
    data: Vec<f64>,
}

impl Cube {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut cube = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    cube.data[(a * n + b) * n + d] = f(a, b, d);
                }
            }
        }
        cube
    }

    #[inline]
    fn get(&self, a: usize, b: usize, d: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + d]
    }

    fn set(&mut self, a: usize, b: usize, d: usize, v: f64) {
        let n = self.n;
        self.data[(a * n + b) * n + d] = v;
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Bracket data of an orthonormal frame adapted to a submersion.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGeometry {
    label: String,
    n_v: usize,
    n_h: usize,
    coeffs: Cube,
    constant: bool,
}

impl FrameGeometry {
    /// Builds a frame from a flat `[k][i][j]` coefficient array.
    pub fn new(
        label: impl Into<String>,
        n_v: usize,
        n_h: usize,
        coeffs: Vec<f64>,
        constant: bool,
    ) -> Result<Self, GeometryError> {
        if n_v == 0 || n_h == 0 {
            return Err(GeometryError::EmptySplit { n_v, n_h });
        }
        let dim = n_v + n_h;
        let expected = dim * dim * dim;
        if coeffs.len() != expected {
            return Err(GeometryError::Shape {
                dim,
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            label: label.into(),
            n_v,
            n_h,
            coeffs: Cube {
                n: dim,
                data: coeffs,
            },
            constant,
        })
    }

    /// All-zero bracket data (an abelian frame).
    pub fn zero(
        label: impl Into<String>,
        n_v: usize,
        n_h: usize,
        constant: bool,
    ) -> Result<Self, GeometryError> {
        let dim = n_v + n_h;
        Self::new(label, n_v, n_h, vec![0.0; dim * dim * dim], constant)
    }

    /// Builds a frame from 0-based bracket entries `(i, j, k, value)` meaning
    /// `[E_i, E_j]` has `E_k`-component `value`; the `(j, i)` entry is filled in
    /// antisymmetrically.
    pub fn from_brackets(
        label: impl Into<String>,
        n_v: usize,
        n_h: usize,
        constant: bool,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self, GeometryError> {
        let mut g = Self::zero(label, n_v, n_h, constant)?;
        let dim = g.dim();
        for &(i, j, k, value) in entries {
            for index in [i, j, k] {
                if index >= dim {
                    return Err(GeometryError::IndexOutOfRange {
                        index: index + 1,
                        dim,
                    });
                }
            }
            g.coeffs.set(k, i, j, value);
            g.coeffs.set(k, j, i, -value);
        }
        Ok(g)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn dim(&self) -> usize {
        self.n_v + self.n_h
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn vertical(&self) -> Range<usize> {
        0..self.n_v
    }

    pub fn horizontal(&self) -> Range<usize> {
        self.n_v..self.dim()
    }

    pub fn is_vertical(&self, index: usize) -> bool {
        index < self.n_v
    }

    /// `E_k`-component of `[E_i, E_j]`.
    #[inline]
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.coeffs.get(k, i, j)
    }

    /// Sets a single coefficient without touching its antisymmetric partner.
    pub fn set_raw(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.coeffs.set(k, i, j, value);
    }

    pub fn raw_coefficients(&self) -> &[f64] {
        &self.coeffs.data
    }

    /// Lists every violated invariant; empty iff the frame is valid.
    /// The Jacobi identity is only checked for constant (homogeneous) data.
    pub fn validate(&self, tol: f64) -> Vec<Diagnostic> {
        let n = self.dim();
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let defect = self.c(k, i, j) + self.c(k, j, i);
                    if defect.abs() > tol {
                        out.push(Diagnostic::Antisymmetry {
                            k: k + 1,
                            i: i + 1,
                            j: j + 1,
                            defect,
                        });
                    }
                }
            }
        }
        for k in self.horizontal() {
            for i in self.vertical() {
                for j in 0..n {
                    let value = self.c(k, i, j);
                    if value.abs() <= tol {
                        continue;
                    }
                    if self.is_vertical(j) {
                        out.push(Diagnostic::VerticalClosure {
                            k: k + 1,
                            i: i + 1,
                            j: j + 1,
                            value,
                        });
                    } else {
                        out.push(Diagnostic::MixedBracket {
                            k: k + 1,
                            i: i + 1,
                            j: j + 1,
                            value,
                        });
                    }
                }
            }
        }
        if self.constant {
            for l in 0..n {
                for i in 0..n {
                    for j in (i + 1)..n {
                        for k in (j + 1)..n {
                            let defect = self.jacobi_component(l, i, j, k);
                            if defect.abs() > tol {
                                out.push(Diagnostic::Jacobi {
                                    l: l + 1,
                                    i: i + 1,
                                    j: j + 1,
                                    k: k + 1,
                                    defect,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn jacobi_component(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        (0..self.dim())
            .map(|m| {
                self.c(m, i, j) * self.c(l, m, k)
                    + self.c(m, j, k) * self.c(l, m, i)
                    + self.c(m, k, i) * self.c(l, m, j)
            })
            .sum()
    }
}

/// Connection coefficients `gamma[k][i][j] = ⟨∇_{E_i} E_j, E_k⟩`.
///
/// The derivative direction `i` ranges over `n_dirs` frame vectors and the
/// section indices `j`, `k` over a rank-`rank` orthonormal frame of the
/// bundle the connection acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    n_dirs: usize,
    rank: usize,
    data: Vec<f64>,
}

impl ConnectionCoefficients {
    pub fn zeros(n_dirs: usize, rank: usize) -> Self {
        Self {
            n_dirs,
            rank,
            data: vec![0.0; rank * n_dirs * rank],
        }
    }

    pub fn from_fn(n_dirs: usize, rank: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n_dirs, rank);
        for k in 0..rank {
            for i in 0..n_dirs {
                for j in 0..rank {
                    out.set(k, i, j, f(k, i, j));
                }
            }
        }
        out
    }

    pub fn n_dirs(&self) -> usize {
        self.n_dirs
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n_dirs + i) * self.rank + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let idx = (k * self.n_dirs + i) * self.rank + j;
        self.data[idx] = v;
    }

    /// `max |gamma[k][i][j] + gamma[j][i][k]|`; zero iff the connection is metric.
    pub fn metricity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.rank {
            for i in 0..self.n_dirs {
                for j in 0..self.rank {
                    worst = worst.max((self.get(k, i, j) + self.get(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Restricts to the directions in `dirs` and the section indices in `fiber`.
    pub fn restrict(&self, dirs: Range<usize>, fiber: Range<usize>) -> Self {
        Self::from_fn(dirs.len(), fiber.len(), |k, i, j| {
            self.get(fiber.start + k, dirs.start + i, fiber.start + j)
        })
    }

    /// Keeps all directions but restricts the section indices to `fiber`.
    pub fn restrict_fiber(&self, fiber: Range<usize>) -> Self {
        self.restrict(0..self.n_dirs, fiber)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.n_dirs, self.rank), (other.n_dirs, other.rank));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Koszul formula in an orthonormal frame with constant coefficients:
/// `gamma[k][i][j] = ½(c[k][i][j] − c[i][j][k] + c[j][k][i])`.
pub fn koszul(n: usize, c: impl Fn(usize, usize, usize) -> f64) -> ConnectionCoefficients {
    ConnectionCoefficients::from_fn(n, n, |k, i, j| 0.5 * (c(k, i, j) - c(i, j, k) + c(j, k, i)))
}

/// Which part of the frame a tensor slot may be evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Vertical,
    Horizontal,
    Any,
}

/// A three-slot frame tensor `t[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n_v: usize,
    slot_kinds: [SlotKind; 3],
    values: Cube,
}

impl Tensor3 {
    fn new(n_v: usize, n: usize, slot_kinds: [SlotKind; 3]) -> Self {
        Self {
            n_v,
            slot_kinds,
            values: Cube::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.n
    }

    pub fn slot_kinds(&self) -> [SlotKind; 3] {
        self.slot_kinds
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values.get(i, j, k)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.max_abs()
    }

    fn admits(&self, slot: usize, index: usize) -> bool {
        match self.slot_kinds[slot] {
            SlotKind::Any => true,
            SlotKind::Vertical => index < self.n_v,
            SlotKind::Horizontal => index >= self.n_v,
        }
    }

    /// Largest entry sitting outside the declared slot ranges.
    pub fn support_violation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !(self.admits(0, i) && self.admits(1, j) && self.admits(2, k)) {
                        worst = worst.max(self.get(i, j, k).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |t[i][j][k] − sign·t[j][i][k]|`.
    pub fn swap12_defect(&self, sign: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.get(i, j, k) - sign * self.get(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// `max |t[i][j][k] − sign·t[i][k][j]|`.
    pub fn swap23_defect(&self, sign: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.get(i, j, k) - sign * self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    /// Nested `[i][j][k]` array for reports.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.get(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }
}

/// A one-form in the orthonormal coframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub v: Vec<f64>,
}

impl Covector {
    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// The three metric connections compared by the Bismut formula, each written
/// as an `N`-direction, rank-`N` coefficient array (zero off their blocks).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConnections {
    pub vertical: ConnectionCoefficients,
    pub horizontal: ConnectionCoefficients,
    pub direct_sum: ConnectionCoefficients,
}

/// A validated [`FrameGeometry`]. Every derived quantity is computed from
/// here, so downstream code never sees frame data that breaks the
/// submersion invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Submersion {
    frame: FrameGeometry,
}

impl TryFrom<FrameGeometry> for Submersion {
    type Error = GeometryError;

    fn try_from(frame: FrameGeometry) -> Result<Self, Self::Error> {
        Self::new(frame, DEFAULT_TOLERANCE)
    }
}

impl Submersion {
    pub fn new(frame: FrameGeometry, tol: f64) -> Result<Self, GeometryError> {
        let diagnostics = frame.validate(tol);
        if diagnostics.is_empty() {
            Ok(Self { frame })
        } else {
            Err(GeometryError::Invalid(diagnostics))
        }
    }

    pub fn frame(&self) -> &FrameGeometry {
        &self.frame
    }

    pub fn into_frame(self) -> FrameGeometry {
        self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn n_v(&self) -> usize {
        self.frame.n_v
    }

    pub fn n_h(&self) -> usize {
        self.frame.n_h
    }

    pub fn levi_civita(&self) -> ConnectionCoefficients {
        let g = &self.frame;
        koszul(g.dim(), |k, i, j| g.c(k, i, j))
    }

    /// Levi-Civita connection of the base in the frame `f_α`, from the
    /// horizontal components of horizontal brackets.
    pub fn base_levi_civita(&self) -> ConnectionCoefficients {
        let g = &self.frame;
        let o = g.n_v;
        koszul(g.n_h, |k, i, j| g.c(o + k, o + i, o + j))
    }

    /// Vertical projection of Levi-Civita, the pulled-back base connection on
    /// horizontals, and their block sum.
    pub fn split_connections(&self) -> SplitConnections {
        let g = &self.frame;
        let n = g.dim();
        let lc = self.levi_civita();
        let base = self.base_levi_civita();
        let o = g.n_v;
        let vertical = ConnectionCoefficients::from_fn(n, n, |k, i, j| {
            if g.is_vertical(j) && g.is_vertical(k) {
                lc.get(k, i, j)
            } else {
                0.0
            }
        });
        // Horizontal frame members are lifts of base fields, so the pullback
        // connection only sees the horizontal part of the direction.
        let horizontal = ConnectionCoefficients::from_fn(n, n, |k, i, j| {
            if !g.is_vertical(i) && !g.is_vertical(j) && !g.is_vertical(k) {
                base.get(k - o, i - o, j - o)
            } else {
                0.0
            }
        });
        let direct_sum = ConnectionCoefficients::from_fn(n, n, |k, i, j| {
            vertical.get(k, i, j) + horizontal.get(k, i, j)
        });
        SplitConnections {
            vertical,
            horizontal,
            direct_sum,
        }
    }

    /// `S(e_i, e_j, f_α) = −½(⟨[f_α, e_i], e_j⟩ + ⟨[f_α, e_j], e_i⟩)`, the
    /// orthonormal-frame form of the second fundamental form.
    pub fn second_fundamental_form(&self) -> Tensor3 {
        let g = &self.frame;
        let mut t = Tensor3::new(
            g.n_v,
            g.dim(),
            [SlotKind::Vertical, SlotKind::Vertical, SlotKind::Horizontal],
        );
        for i in g.vertical() {
            for j in g.vertical() {
                for a in g.horizontal() {
                    let value = -0.5 * (g.c(j, a, i) + g.c(i, a, j));
                    t.values.set(i, j, a, value);
                }
            }
        }
        t
    }

    /// `Ω(f_α, f_β, e_k) = −⟨[f_α, f_β], e_k⟩`.
    pub fn submersion_curvature(&self) -> Tensor3 {
        let g = &self.frame;
        let mut t = Tensor3::new(
            g.n_v,
            g.dim(),
            [
                SlotKind::Horizontal,
                SlotKind::Horizontal,
                SlotKind::Vertical,
            ],
        );
        for a in g.horizontal() {
            for b in g.horizontal() {
                for k in g.vertical() {
                    t.values.set(a, b, k, -g.c(k, a, b));
                }
            }
        }
        t
    }

    /// `ω(X)(Y, Z) = S(X,Z,Y) − S(X,Y,Z) + ½Ω(X,Z,Y) − ½Ω(X,Y,Z) + ½Ω(Y,Z,X)`,
    /// stored as `t[x][y][z]`.
    pub fn omega_tensor(&self) -> Tensor3 {
        let s = self.second_fundamental_form();
        let om = self.submersion_curvature();
        let n = self.dim();
        let values = Cube::from_fn(n, |x, y, z| {
            s.get(x, z, y) - s.get(x, y, z) + 0.5 * om.get(x, z, y) - 0.5 * om.get(x, y, z)
                + 0.5 * om.get(y, z, x)
        });
        Tensor3 {
            n_v: self.n_v(),
            slot_kinds: [SlotKind::Any; 3],
            values,
        }
    }

    /// Trace of the second fundamental form over its vertical slots.
    pub fn mean_curvature(&self) -> Covector {
        let s = self.second_fundamental_form();
        let g = &self.frame;
        let v = (0..g.dim())
            .map(|a| g.vertical().map(|j| s.get(j, j, a)).sum())
            .collect();
        Covector { v }
    }

    /// `ω(E_a)` as an antisymmetric coefficient matrix, one per frame direction.
    pub fn omega_forms(&self) -> Vec<DMatrix<f64>> {
        let omega = self.omega_tensor();
        let n = self.dim();
        (0..n)
            .map(|a| DMatrix::from_fn(n, n, |y, z| omega.get(a, y, z)))
            .collect()
    }

    /// `Ω(·, ·, e_k)` as a horizontal 2-form, one per vertical direction.
    pub fn curvature_forms(&self) -> Vec<DMatrix<f64>> {
        let om = self.submersion_curvature();
        let n = self.dim();
        self.frame
            .vertical()
            .map(|k| DMatrix::from_fn(n, n, |a, b| om.get(a, b, k)))
            .collect()
    }

    /// `max |⟨∇^M_{E_i}E_j, E_k⟩ − ⟨∇^⊕_{E_i}E_j, E_k⟩ − ω(E_i)(E_j, E_k)|`.
    pub fn bismut_residual(&self) -> f64 {
        let lc = self.levi_civita();
        let split = self.split_connections();
        let omega = self.omega_tensor();
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = lc.get(k, i, j) - split.direct_sum.get(k, i, j) - omega.get(i, j, k);
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }

    /// Levi-Civita on horizontal lifts: the vertical part is half the
    /// bracket and the horizontal part is the lifted base connection.
    pub fn lifted_base_residual(&self) -> f64 {
        let g = &self.frame;
        let lc = self.levi_civita();
        let base = self.base_levi_civita();
        let o = g.n_v;
        let mut worst = 0.0_f64;
        for i in g.horizontal() {
            for j in g.horizontal() {
                for k in 0..g.dim() {
                    let expected = if g.is_vertical(k) {
                        0.5 * g.c(k, i, j)
                    } else {
                        base.get(k - o, i - o, j - o)
                    };
                    worst = worst.max((lc.get(k, i, j) - expected).abs());
                }
            }
        }
        worst
    }

    /// `max |gamma[k][i][j] − gamma[k][j][i] − c[k][i][j]|`.
    pub fn torsion_residual(&self, conn: &ConnectionCoefficients) -> f64 {
        let g = &self.frame;
        let n = g.dim();
        let mut worst = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let d = conn.get(k, i, j) - conn.get(k, j, i) - g.c(k, i, j);
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }

    /// Riemannian divergence of `E_a`: `Σ_j c[j][j][a]`.
    pub fn divergence(&self, a: usize) -> f64 {
        let g = &self.frame;
        (0..g.dim()).map(|j| g.c(j, j, a)).sum()
    }

    /// Divergence of a vertical `e_a` along its own fiber: `Σ_{j vertical} c[j][j][a]`.
    pub fn fiber_divergence(&self, a: usize) -> f64 {
        let g = &self.frame;
        g.vertical().map(|j| g.c(j, j, a)).sum()
    }

    pub fn is_vertically_unimodular(&self, tol: f64) -> bool {
        self.frame
            .vertical()
            .all(|a| self.fiber_divergence(a).abs() <= tol)
    }
}

/// Assembles the block metric
/// `[[h + a·g·aᵀ, a·g], [g·aᵀ, g]]` of a submersion whose horizontal space is
/// the graph of `−a` over the base directions.
pub fn submersion_metric(
    h_base: &DMatrix<f64>,
    g_fiber: &DMatrix<f64>,
    a: &DMatrix<f64>,
) -> Result<DMatrix<f64>, GeometryError> {
    let n_h = h_base.nrows();
    let n_v = g_fiber.nrows();
    check_spd(h_base, "base metric")?;
    check_spd(g_fiber, "fiber metric")?;
    if a.shape() != (n_h, n_v) {
        return Err(GeometryError::MatrixShape {
            what: "mixing block",
            expected: (n_h, n_v),
            found: a.shape(),
        });
    }
    let ag = a * g_fiber;
    let mut g = DMatrix::zeros(n_h + n_v, n_h + n_v);
    g.view_mut((0, 0), (n_h, n_h))
        .copy_from(&(h_base + &ag * a.transpose()));
    g.view_mut((0, n_h), (n_h, n_v)).copy_from(&ag);
    g.view_mut((n_h, 0), (n_v, n_h)).copy_from(&ag.transpose());
    g.view_mut((n_h, n_h), (n_v, n_v)).copy_from(g_fiber);
    Ok(g)
}

/// `|det(g) − det(h)·det(g_fiber)|` for the submersion metric built from the inputs.
pub fn det_splitting_residual(
    h_base: &DMatrix<f64>,
    g_fiber: &DMatrix<f64>,
    a: &DMatrix<f64>,
) -> Result<f64, GeometryError> {
    let g = submersion_metric(h_base, g_fiber, a)?;
    Ok((g.determinant() - h_base.determinant() * g_fiber.determinant()).abs())
}

fn check_spd(m: &DMatrix<f64>, what: &'static str) -> Result<(), GeometryError> {
    if !m.is_square() {
        return Err(GeometryError::MatrixShape {
            what,
            expected: (m.nrows(), m.nrows()),
            found: m.shape(),
        });
    }
    let scale = m.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    let asym = (m - m.transpose())
        .iter()
        .fold(0.0_f64, |s, v| s.max(v.abs()));
    if m.nrows() == 0 || asym > 1e-12 * scale || m.clone().cholesky().is_none() {
        return Err(GeometryError::NotPositiveDefinite { what });
    }
    Ok(())
}

/// Draws a frame obeying the submersion invariants but not Jacobi:
/// antisymmetric base coefficients, vertical-valued vertical and mixed
/// brackets, and free vertical parts of horizontal brackets. Entries are
/// uniform in `[-1, 1]`.
pub fn random_frame<R: Rng + ?Sized>(
    rng: &mut R,
    n_v: usize,
    n_h: usize,
    label: impl Into<String>,
) -> FrameGeometry {
    let n = n_v + n_h;
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let both_horizontal = i >= n_v && j >= n_v;
            let targets = if both_horizontal { 0..n } else { 0..n_v };
            for k in targets {
                entries.push((i, j, k, rng.gen_range(-1.0..=1.0)));
            }
        }
    }
    FrameGeometry::from_brackets(label, n_v, n_h, false, &entries)
        .expect("random frame dimensions are positive")
}

/// Random symmetric positive-definite matrix `A·Aᵀ/dim + ½·Id` with `A`
/// uniform in `[-1, 1]`; eigenvalues stay in `[½, dim + ½]` whatever the size.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..=1.0));
    (&a * a.transpose()) / dim.max(1) as f64 + DMatrix::identity(dim, dim) * 0.5
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0))
}
