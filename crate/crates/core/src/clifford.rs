//! Complex Clifford representations and the Clifford maps on 2-forms.
//!
//! Convention: `γ_a γ_b + γ_b γ_a = 2 δ_ab`, every generator self-adjoint.
//!
//! The representation on `n` generators is built recursively. `n = 1` is
//! `[1]` and `n = 2` is `(σ₁, σ₂)`. From a representation `g_1..g_m` of
//! dimension `d` we get one on `m + 2` generators of dimension `2d`:
//! `g_a ⊗ σ₁`, then `Id ⊗ σ₂`, then `Id ⊗ σ₃`. So `n = 3` is exactly the
//! Pauli triple. For even `n` the grading is `(−i)^{n/2} γ_1 ⋯ γ_n`, which
//! gives `σ₃` for `n = 2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    anticommutator, c, commutator, identity, max_abs, max_abs_diff, zeros, CMat, I,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("a Clifford representation needs at least one generator")]
    NoGenerators,
    #[error("2-form has dimension {found}, representation has {expected} generators")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("2-form coefficient matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
}

pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)]),
        CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

/// An irreducible matrix representation of the complex Clifford algebra on
/// `n` generators, graded when `n` is even.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    n: usize,
    gammas: Vec<CMat>,
    grading: Option<CMat>,
}

impl CliffordRep {
    pub fn build(n: usize) -> Result<Self, CliffordError> {
        if n == 0 {
            return Err(CliffordError::NoGenerators);
        }
        let gammas = generators(n);
        let grading = n.is_multiple_of(2).then(|| grading_of(&gammas));
        Ok(Self { n, gammas, grading })
    }

    /// Wraps arbitrary generator matrices; invariants are not checked here.
    pub fn from_parts(gammas: Vec<CMat>, grading: Option<CMat>) -> Self {
        Self {
            n: gammas.len(),
            gammas,
            grading,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn gammas(&self) -> &[CMat] {
        &self.gammas
    }

    pub fn gamma(&self, a: usize) -> &CMat {
        &self.gammas[a]
    }

    pub fn grading(&self) -> Option<&CMat> {
        self.grading.as_ref()
    }

    pub fn relation_residual(&self) -> f64 {
        clifford_relation_residual(&self.gammas)
    }

    /// Worst of `‖γ_a − γ_a*‖` and `‖γ_a γ_a* − Id‖`.
    pub fn self_adjoint_unitary_residual(&self) -> f64 {
        let id = identity(self.dim());
        self.gammas.iter().fold(0.0_f64, |m, g| {
            m.max(max_abs_diff(g, &g.adjoint()))
                .max(max_abs_diff(&(g * g.adjoint()), &id))
        })
    }

    /// Worst violation of the grading axioms; `None` when ungraded.
    pub fn grading_residual(&self) -> Option<f64> {
        self.grading
            .as_ref()
            .map(|gr| grading_residual(gr, &self.gammas))
    }

    /// Product of the generators in index order.
    pub fn volume(&self) -> CMat {
        volume(&self.gammas)
    }

    pub fn two_form(&self, w: &TwoForm) -> Result<CMat, CliffordError> {
        clifford_of_two_form(&self.gammas, w)
    }

    pub fn two_form_tilde(&self, w: &TwoForm) -> Result<Vec<CMat>, CliffordError> {
        clifford_tilde(&self.gammas, w)
    }
}

fn generators(n: usize) -> Vec<CMat> {
    let [s1, s2, s3] = pauli();
    match n {
        1 => vec![identity(1)],
        2 => vec![s1, s2],
        _ => {
            let inner = generators(n - 2);
            let id = identity(inner[0].nrows());
            let mut out: Vec<CMat> = inner.iter().map(|g| g.kronecker(&s1)).collect();
            out.push(id.kronecker(&s2));
            out.push(id.kronecker(&s3));
            out
        }
    }
}

fn grading_of(gammas: &[CMat]) -> CMat {
    let half = gammas.len() / 2;
    let phase = (0..half).fold(c(1.0), |p, _| p * -I);
    volume(gammas) * phase
}

pub fn volume(gammas: &[CMat]) -> CMat {
    gammas
        .iter()
        .fold(identity(gammas[0].nrows()), |acc, g| acc * g)
}

/// `max_{a,b} ‖γ_a γ_b + γ_b γ_a − 2δ_ab Id‖`.
pub fn clifford_relation_residual(gammas: &[CMat]) -> f64 {
    let dim = gammas[0].nrows();
    let two = identity(dim) * c(2.0);
    let mut worst = 0.0_f64;
    for (a, ga) in gammas.iter().enumerate() {
        for (b, gb) in gammas.iter().enumerate().skip(a) {
            let ac = anticommutator(ga, gb);
            let r = if a == b {
                max_abs_diff(&ac, &two)
            } else {
                max_abs(&ac)
            };
            worst = worst.max(r);
        }
    }
    worst
}

/// Worst of: self-adjointness, `Γ² = Id`, and `{Γ, γ_a} = 0`.
pub fn grading_residual(grading: &CMat, gammas: &[CMat]) -> f64 {
    let id = identity(grading.nrows());
    gammas.iter().fold(
        max_abs_diff(grading, &grading.adjoint()).max(max_abs_diff(&(grading * grading), &id)),
        |m, g| m.max(max_abs(&anticommutator(grading, g))),
    )
}

/// A real 2-form `Σ_{a<b} w[a][b] e^a ∧ e^b` given by its antisymmetric
/// coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    w: DMatrix<f64>,
}

impl TwoForm {
    pub fn new(w: DMatrix<f64>) -> Result<Self, CliffordError> {
        if !w.is_square() {
            return Err(CliffordError::DimensionMismatch {
                expected: w.nrows(),
                found: w.ncols(),
            });
        }
        let defect = (&w + w.transpose())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if defect > 1e-12 {
            return Err(CliffordError::NotAntisymmetric(defect));
        }
        Ok(Self { w })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            w: DMatrix::zeros(n, n),
        }
    }

    /// `e^a ∧ e^b` (0-based).
    pub fn wedge(n: usize, a: usize, b: usize) -> Self {
        let mut w = DMatrix::zeros(n, n);
        w[(a, b)] += 1.0;
        w[(b, a)] -= 1.0;
        Self { w }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self, CliffordError> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.w[(a, b)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }
}

fn check_dim(gammas: &[CMat], w: &TwoForm) -> Result<(), CliffordError> {
    if gammas.len() != w.dim() {
        return Err(CliffordError::DimensionMismatch {
            expected: gammas.len(),
            found: w.dim(),
        });
    }
    Ok(())
}

/// `c(ω) = Σ_{a<b} w[a][b] [γ_a, γ_b]`.
pub fn clifford_of_two_form(gammas: &[CMat], w: &TwoForm) -> Result<CMat, CliffordError> {
    check_dim(gammas, w)?;
    let mut out = zeros(gammas[0].nrows());
    for a in 0..gammas.len() {
        for b in (a + 1)..gammas.len() {
            let coeff = w.get(a, b);
            if coeff != 0.0 {
                out += commutator(&gammas[a], &gammas[b]) * c(coeff);
            }
        }
    }
    Ok(out)
}

/// `c̃(ω)(E_a) = Σ_b w[a][b] γ_b`, one matrix per frame direction.
pub fn clifford_tilde(gammas: &[CMat], w: &TwoForm) -> Result<Vec<CMat>, CliffordError> {
    check_dim(gammas, w)?;
    Ok((0..gammas.len())
        .map(|a| {
            gammas
                .iter()
                .enumerate()
                .fold(zeros(gammas[0].nrows()), |acc, (b, g)| {
                    acc + g * c(w.get(a, b))
                })
        })
        .collect())
}

/// `max_a ‖¼[γ_a, c(ω)] − c̃(ω)(E_a)‖`.
pub fn commutator_identity_residual(gammas: &[CMat], w: &TwoForm) -> Result<f64, CliffordError> {
    let cw = clifford_of_two_form(gammas, w)?;
    let tilde = clifford_tilde(gammas, w)?;
    Ok(gammas
        .iter()
        .zip(&tilde)
        .map(|(g, t)| max_abs_diff(&(commutator(g, &cw) * c(0.25)), t))
        .fold(0.0, f64::max))
}

/// Serializable `[[re, im], …]` rows.
pub fn matrix_to_nested(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|col| [m[(r, col)].re, m[(r, col)].im])
                .collect()
        })
        .collect()
}

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}
