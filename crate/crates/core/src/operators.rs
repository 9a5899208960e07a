//! First-order operators in frame form, `D = Σ_a A_a E_a + Z`.
//!
//! Every Dirac-type operator on a constant frame is determined by its
//! symbol matrices `A_a` and zeroth-order matrix `Z`, so comparing operators
//! reduces to comparing finitely many matrices.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::clifford::{clifford_of_two_form, CliffordError, TwoForm};
use crate::geometry::{Covector, GeometryError, Submersion};
use crate::linalg::{c, kron, max_abs, max_abs_diff, zeros, CMat, I};
use crate::spin::{
    build_module_connection, build_vertical_connection, spin_lift, FiberKind, SpinConnection,
    SpinError, SpinLifts, SpinorFactorization, VerticalConnection,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("operator matrices have inconsistent sizes: {0}")]
    DimensionMismatch(String),
    #[error("tensor-sum factors both differentiate along directions {0:?}")]
    OverlappingSupport(Vec<usize>),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `D = Σ_a A_a E_a + Z`, with `A_a` stored only for directions it differentiates along.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    dim: usize,
    symbol: BTreeMap<usize, CMat>,
    zeroth: CMat,
}

impl FrameOperator {
    pub fn new(symbol: BTreeMap<usize, CMat>, zeroth: CMat) -> Result<Self, OperatorError> {
        let dim = zeroth.nrows();
        if !zeroth.is_square() {
            return Err(OperatorError::DimensionMismatch(format!(
                "zeroth-order term is {:?}",
                zeroth.shape()
            )));
        }
        if let Some((a, m)) = symbol.iter().find(|(_, m)| m.shape() != (dim, dim)) {
            return Err(OperatorError::DimensionMismatch(format!(
                "symbol along direction {} is {:?}, zeroth-order term is {dim}x{dim}",
                a + 1,
                m.shape()
            )));
        }
        Ok(Self {
            dim,
            symbol,
            zeroth,
        })
    }

    /// `Σ_a i·γ_a E_a + i Σ_a γ_a ω_a` over the given `(direction, γ_a, ω_a)` triples.
    pub fn dirac<'a>(
        dim: usize,
        parts: impl IntoIterator<Item = (usize, &'a CMat, CMat)>,
    ) -> Result<Self, OperatorError> {
        let mut symbol = BTreeMap::new();
        let mut zeroth = zeros(dim);
        for (a, gamma, omega) in parts {
            zeroth += gamma * omega * I;
            symbol.insert(a, gamma * I);
        }
        Self::new(symbol, zeroth)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbol(&self) -> &BTreeMap<usize, CMat> {
        &self.symbol
    }

    pub fn symbol_at(&self, a: usize) -> Option<&CMat> {
        self.symbol.get(&a)
    }

    pub fn zeroth(&self) -> &CMat {
        &self.zeroth
    }

    pub fn directions(&self) -> impl Iterator<Item = usize> + '_ {
        self.symbol.keys().copied()
    }

    /// `V·D·V*`.
    pub fn conjugate(&self, v: &CMat) -> Self {
        let conj = |m: &CMat| v * m * v.adjoint();
        Self {
            dim: v.nrows(),
            symbol: self.symbol.iter().map(|(a, m)| (*a, conj(m))).collect(),
            zeroth: conj(&self.zeroth),
        }
    }

    /// Worst `‖A_a + A_a*‖`; zero when the principal part is formally symmetric.
    pub fn symbol_skew_residual(&self) -> f64 {
        self.symbol
            .values()
            .map(|m| max_abs(&(m + m.adjoint())))
            .fold(0.0, f64::max)
    }

    /// `‖Z − Z* − Σ_a div(E_a)·A_a‖`. Integrating by parts against the frame
    /// volume shows `D` is formally self-adjoint exactly when this vanishes
    /// (given skew symbols).
    pub fn formal_symmetry_defect(&self, divergence: impl Fn(usize) -> f64) -> f64 {
        let expected = self
            .symbol
            .iter()
            .fold(zeros(self.dim), |acc, (a, m)| acc + m * c(divergence(*a)));
        max_abs_diff(&(&self.zeroth - self.zeroth.adjoint()), &expected)
    }

    /// `‖Z − Z*‖` alone.
    pub fn zeroth_hermitian_defect(&self) -> f64 {
        max_abs(&(&self.zeroth - self.zeroth.adjoint()))
    }

    /// Largest difference between symbols (missing entries count as zero) and zeroth terms.
    pub fn max_abs_diff(&self, other: &Self) -> (f64, f64) {
        let keys: std::collections::BTreeSet<usize> =
            self.directions().chain(other.directions()).collect();
        let z = zeros(self.dim);
        let symbol = keys
            .into_iter()
            .map(|a| {
                max_abs_diff(
                    self.symbol.get(&a).unwrap_or(&z),
                    other.symbol.get(&a).unwrap_or(&z),
                )
            })
            .fold(0.0, f64::max);
        (symbol, max_abs_diff(&self.zeroth, &other.zeroth))
    }
}

/// Dirac operator of a spin connection whose directions coincide with the generators.
pub fn build_total_dirac(
    gens: &[CMat],
    lift: &SpinConnection,
) -> Result<FrameOperator, OperatorError> {
    if gens.len() != lift.directions() {
        return Err(OperatorError::DimensionMismatch(format!(
            "{} generators but connection has {} directions",
            gens.len(),
            lift.directions()
        )));
    }
    FrameOperator::dirac(
        gens[0].nrows(),
        gens.iter()
            .zip(&lift.mats)
            .enumerate()
            .map(|(a, (g, w))| (a, g, w.clone())),
    )
}

/// Vertical Dirac operator `S = Σ_j i·γ^V_j e_j + i Σ_j γ^V_j X_j` on `Σ_V`.
pub fn build_vertical_dirac(
    fact: &SpinorFactorization,
    vertical: &VerticalConnection,
) -> Result<FrameOperator, OperatorError> {
    FrameOperator::dirac(
        fact.vertical_dim(),
        (0..fact.n_v()).map(|j| (j, fact.vert_rep().gamma(j), vertical.factor.mats[j].clone())),
    )
}

/// Base Dirac operator twisted by the module connection and lifted to `M`:
/// `Σ_α i·c(f_α) f_α + i Σ_α c(f_α)(ω^{E_B}_α ⊗ Id + Id ⊗ ∇^X_α)`.
pub fn build_lifted_base_dirac(
    fact: &SpinorFactorization,
    base: &SpinConnection,
    module: &SpinConnection,
) -> Result<FrameOperator, OperatorError> {
    if base.directions() != fact.n_h() || module.directions() != fact.n_h() {
        return Err(OperatorError::DimensionMismatch(format!(
            "base connection has {} directions, module connection {}, base dimension is {}",
            base.directions(),
            module.directions(),
            fact.n_h()
        )));
    }
    FrameOperator::dirac(
        fact.total_dim(),
        (0..fact.n_h()).map(|alpha| {
            let conn =
                fact.lift_horizontal(&base.mats[alpha]) + fact.lift_vertical(&module.mats[alpha]);
            (fact.n_v() + alpha, fact.act_h(alpha), conn)
        }),
    )
}

/// Graded tensor sum `S ⊗̂ 1 + 1 ⊗ D`: the vertical factor is inserted as
/// `γ_H ⊗ S` so it anticommutes with horizontal Clifford multiplication.
pub fn tensor_sum(
    vertical: &FrameOperator,
    lifted: &FrameOperator,
    horizontal_grading: &CMat,
) -> Result<FrameOperator, OperatorError> {
    let overlap: Vec<usize> = vertical
        .directions()
        .filter(|a| lifted.symbol.contains_key(a))
        .map(|a| a + 1)
        .collect();
    if !overlap.is_empty() {
        return Err(OperatorError::OverlappingSupport(overlap));
    }
    if horizontal_grading.nrows() * vertical.dim() != lifted.dim() {
        return Err(OperatorError::DimensionMismatch(format!(
            "grading of size {} times vertical fiber {} does not match lifted fiber {}",
            horizontal_grading.nrows(),
            vertical.dim(),
            lifted.dim()
        )));
    }
    let mut symbol = lifted.symbol.clone();
    for (a, m) in &vertical.symbol {
        symbol.insert(*a, kron(horizontal_grading, m));
    }
    let zeroth = kron(horizontal_grading, vertical.zeroth()) + lifted.zeroth();
    FrameOperator::new(symbol, zeroth)
}

/// `−(i/8) Σ_k c(Ω(·,·,e_k)) c(e_k)`; a self-adjoint, odd endomorphism.
pub fn curvature_term(sub: &Submersion, gens: &[CMat]) -> Result<CMat, OperatorError> {
    let dim = gens[0].nrows();
    let mut out = zeros(dim);
    for (k, form) in sub.curvature_forms().into_iter().enumerate() {
        out += clifford_of_two_form(gens, &TwoForm::new(form)?)? * &gens[k];
    }
    Ok(out * (I * c(-0.125)))
}

/// `‖Σ_a c(E_a) c(ω(E_a)) − (−2 Σ_α k(f_α) c(f_α) − ½ Σ_k c(Ω(·,·,e_k)) c(e_k))‖`.
pub fn mean_curvature_identity_residual(
    sub: &Submersion,
    gens: &[CMat],
) -> Result<f64, OperatorError> {
    let dim = gens[0].nrows();
    let mut lhs = zeros(dim);
    for (a, form) in sub.omega_forms().into_iter().enumerate() {
        lhs += &gens[a] * clifford_of_two_form(gens, &TwoForm::new(form)?)?;
    }
    let k = sub.mean_curvature();
    let mut rhs = zeros(dim);
    for a in sub.frame().horizontal() {
        rhs -= &gens[a] * c(2.0 * k.v[a]);
    }
    for (j, form) in sub.curvature_forms().into_iter().enumerate() {
        rhs -= clifford_of_two_form(gens, &TwoForm::new(form)?)? * &gens[j] * c(0.5);
    }
    Ok(max_abs_diff(&lhs, &rhs))
}

/// How far `D_M` is from `S ⊗̂ 1 + 1 ⊗ D_B − (curvature term)`, measured on
/// the reference spinor module after conjugating by the intertwiner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationResidual {
    pub symbol: f64,
    pub zeroth: f64,
}

impl FactorizationResidual {
    pub fn max(&self) -> f64 {
        self.symbol.max(self.zeroth)
    }
}

/// Every object in the factorization, built once from a submersion.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub factorization: SpinorFactorization,
    pub lifts: SpinLifts,
    pub vertical_connection: VerticalConnection,
    pub mean_curvature: Covector,
    pub module_connection: SpinConnection,
    pub reference_lift: SpinConnection,
    pub total_factorized: FrameOperator,
    pub total_reference: FrameOperator,
    pub vertical_dirac: FrameOperator,
    pub lifted_base_dirac: FrameOperator,
    pub tensor_sum: FrameOperator,
    pub curvature: CMat,
}

impl Assembly {
    pub fn build(sub: &Submersion) -> Result<Self, OperatorError> {
        let factorization = SpinorFactorization::build(sub)?;
        let lifts = SpinLifts::build(sub, &factorization)?;
        let vertical_connection = build_vertical_connection(sub, &factorization, &lifts)?;
        let mean_curvature = sub.mean_curvature();
        let module_connection =
            build_module_connection(sub, &vertical_connection, &mean_curvature)?;
        let reference_gens = factorization.reference().gammas();
        let reference_lift = spin_lift(&sub.levi_civita(), reference_gens, FiberKind::Total)?;
        let total_factorized = build_total_dirac(factorization.act(), &lifts.total)?;
        let total_reference = build_total_dirac(reference_gens, &reference_lift)?;
        let vertical_dirac = build_vertical_dirac(&factorization, &vertical_connection)?;
        let lifted_base_dirac =
            build_lifted_base_dirac(&factorization, &lifts.base, &module_connection)?;
        let tensor_sum = tensor_sum(
            &vertical_dirac,
            &lifted_base_dirac,
            factorization.base_grading(),
        )?;
        let curvature = curvature_term(sub, factorization.act())?;
        Ok(Self {
            factorization,
            lifts,
            vertical_connection,
            mean_curvature,
            module_connection,
            reference_lift,
            total_factorized,
            total_reference,
            vertical_dirac,
            lifted_base_dirac,
            tensor_sum,
            curvature,
        })
    }

    /// `max_a ‖V·A^{sum}_a·V* − A^M_a‖` and `‖V(Z^{sum} − curvature)V* − Z^M‖`.
    pub fn factorization_residual(&self) -> FactorizationResidual {
        let v = self.factorization.intertwiner();
        let mut predicted = self.tensor_sum.clone();
        predicted.zeroth -= &self.curvature;
        let (symbol, zeroth) = predicted.conjugate(v).max_abs_diff(&self.total_reference);
        FactorizationResidual { symbol, zeroth }
    }

    /// Same comparison carried out directly on `Σ_H ⊗ Σ_V`.
    pub fn factorized_fiber_residual(&self) -> FactorizationResidual {
        let mut predicted = self.tensor_sum.clone();
        predicted.zeroth -= &self.curvature;
        let (symbol, zeroth) = predicted.max_abs_diff(&self.total_factorized);
        FactorizationResidual { symbol, zeroth }
    }

    /// Curvature term as a scalar multiple of the identity, when it is one.
    pub fn curvature_scalar(&self, tol: f64) -> Option<num_complex::Complex64> {
        crate::linalg::as_scalar(&self.curvature, tol)
    }

    /// Formal-symmetry defect of `S`, divergences taken along the fiber.
    pub fn vertical_dirac_symmetry(&self, sub: &Submersion) -> f64 {
        self.vertical_dirac
            .formal_symmetry_defect(|j| sub.fiber_divergence(j))
    }
}
