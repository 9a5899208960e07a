//! Spinor fibers and spin connections for a submersion.
//!
//! The total spinor fiber is realized as `Σ_H ⊗ Σ_V`, with `Σ_H` the base
//! spinor module pulled back to `M` and `Σ_V` a concrete vertical Clifford
//! module. Clifford multiplication follows the graded tensor rule
//!
//! ```text
//! c(f_α) = γ^B_α ⊗ Id        c(e_j) = γ_H ⊗ γ^V_j
//! ```
//!
//! so horizontal and vertical actions anticommute. `γ_H` is the base
//! grading, which is why the base dimension must be even.

use serde::Serialize;
use thiserror::Error;

use crate::clifford::{clifford_of_two_form, volume, CliffordError, CliffordRep, TwoForm};
use crate::geometry::{ConnectionCoefficients, Covector, Submersion};
use crate::linalg::{
    c, commutator, identity, kron, max_abs, max_abs_diff, partial_trace_outer, zeros, CMat,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error(
        "the base has odd dimension {n_h}; factorizing the spinor fiber needs a graded base module"
    )]
    UngradedBase { n_h: usize },
    #[error("intertwining system is numerically degenerate (smallest singular value {smallest:e}, next {next:e})")]
    DegenerateIntertwiner { smallest: f64, next: f64 },
    #[error("connection is not metric (defect {0:e})")]
    NonMetric(f64),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

/// Fiber-level data of the isomorphism `Σ_H ⊗ Σ_V ≅ Σ_M`.
#[derive(Debug, Clone)]
pub struct SpinorFactorization {
    n_v: usize,
    n_h: usize,
    base_rep: CliffordRep,
    vert_rep: CliffordRep,
    act: Vec<CMat>,
    horizontal_grading: CMat,
    grading_total: Option<CMat>,
    reference: CliffordRep,
    intertwiner: CMat,
    vertical_negated: bool,
}

impl SpinorFactorization {
    pub fn build(sub: &Submersion) -> Result<Self, SpinError> {
        Self::with_dims(sub.n_v(), sub.n_h())
    }

    /// The factorization only depends on the fiber and base dimensions.
    pub fn with_dims(n_v: usize, n_h: usize) -> Result<Self, SpinError> {
        if n_h % 2 == 1 {
            return Err(SpinError::UngradedBase { n_h });
        }
        let base_rep = CliffordRep::build(n_h)?;
        let mut vert_rep = CliffordRep::build(n_v)?;
        let reference = CliffordRep::build(n_v + n_h)?;
        let gamma_h = base_rep.grading().expect("even base is graded").clone();
        let id_v = identity(vert_rep.dim());

        let assemble = |vert: &CliffordRep| -> Vec<CMat> {
            let mut act: Vec<CMat> = vert.gammas().iter().map(|g| kron(&gamma_h, g)).collect();
            act.extend(base_rep.gammas().iter().map(|g| kron(g, &id_v)));
            act
        };
        let mut act = assemble(&vert_rep);

        // For odd total dimension the two irreducible representations differ by
        // the sign of the volume element; flip the vertical generators (n_v is
        // odd here) to land in the reference class.
        let mut vertical_negated = false;
        if (n_v + n_h) % 2 == 1 && max_abs_diff(&volume(&act), &reference.volume()) > 1e-9 {
            let negated: Vec<CMat> = vert_rep.gammas().iter().map(|g| -g.clone()).collect();
            vert_rep = CliffordRep::from_parts(negated, vert_rep.grading().cloned());
            act = assemble(&vert_rep);
            vertical_negated = true;
        }

        let grading_total = vert_rep.grading().map(|gv| kron(&gamma_h, gv));
        let horizontal_grading = kron(&gamma_h, &id_v);
        let intertwiner = solve_intertwiner(&act, reference.gammas())?;
        Ok(Self {
            n_v,
            n_h,
            base_rep,
            vert_rep,
            act,
            horizontal_grading,
            grading_total,
            reference,
            intertwiner,
            vertical_negated,
        })
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn total_dim(&self) -> usize {
        self.act[0].nrows()
    }

    pub fn base_rep(&self) -> &CliffordRep {
        &self.base_rep
    }

    pub fn vert_rep(&self) -> &CliffordRep {
        &self.vert_rep
    }

    pub fn horizontal_dim(&self) -> usize {
        self.base_rep.dim()
    }

    pub fn vertical_dim(&self) -> usize {
        self.vert_rep.dim()
    }

    /// Clifford action of every frame vector, vertical first.
    pub fn act(&self) -> &[CMat] {
        &self.act
    }

    pub fn act_v(&self, j: usize) -> &CMat {
        &self.act[j]
    }

    pub fn act_h(&self, alpha: usize) -> &CMat {
        &self.act[self.n_v + alpha]
    }

    /// `γ_B` acting on the factorized fiber, `γ_H ⊗ Id`.
    pub fn horizontal_grading(&self) -> &CMat {
        &self.horizontal_grading
    }

    /// Base grading on `Σ_H` alone.
    pub fn base_grading(&self) -> &CMat {
        self.base_rep.grading().expect("even base is graded")
    }

    /// `γ_H ⊗ γ_V`, present when the fiber dimension is even.
    pub fn grading_total(&self) -> Option<&CMat> {
        self.grading_total.as_ref()
    }

    pub fn reference(&self) -> &CliffordRep {
        &self.reference
    }

    /// Unitary `V` with `V · act_a · V* = γ^ref_a`.
    pub fn intertwiner(&self) -> &CMat {
        &self.intertwiner
    }

    pub fn vertical_negated(&self) -> bool {
        self.vertical_negated
    }

    /// Lifts a `Σ_H` matrix to `Σ_H ⊗ Σ_V`.
    pub fn lift_horizontal(&self, m: &CMat) -> CMat {
        kron(m, &identity(self.vertical_dim()))
    }

    /// Lifts a `Σ_V` matrix to `Σ_H ⊗ Σ_V`.
    pub fn lift_vertical(&self, m: &CMat) -> CMat {
        kron(&identity(self.horizontal_dim()), m)
    }

    pub fn conjugate(&self, m: &CMat) -> CMat {
        &self.intertwiner * m * self.intertwiner.adjoint()
    }

    pub fn intertwiner_unitarity_residual(&self) -> f64 {
        let v = &self.intertwiner;
        max_abs_diff(&(v * v.adjoint()), &identity(v.nrows()))
    }

    pub fn intertwiner_conjugation_residual(&self) -> f64 {
        self.act
            .iter()
            .zip(self.reference.gammas())
            .map(|(a, r)| max_abs_diff(&self.conjugate(a), r))
            .fold(0.0, f64::max)
    }

    /// Worst pairwise anticommutator between a vertical and a horizontal action.
    pub fn mixed_anticommutator_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.n_v {
            for a in 0..self.n_h {
                let ac = self.act_v(j) * self.act_h(a) + self.act_h(a) * self.act_v(j);
                worst = worst.max(max_abs(&ac));
            }
        }
        worst
    }
}

/// Solves `V·A_a = B_a·V` for all `a` and returns the unitary solution with
/// its largest entry made real positive.
pub fn solve_intertwiner(from: &[CMat], to: &[CMat]) -> Result<CMat, SpinError> {
    let d = from[0].nrows();
    if to.len() != from.len() || to[0].nrows() != d {
        return Err(SpinError::Mismatch(format!(
            "cannot intertwine {} generators of size {} with {} of size {}",
            from.len(),
            d,
            to.len(),
            to[0].nrows()
        )));
    }
    // Column-major vec: vec(V·A) = (Aᵀ ⊗ I)·vec(V), vec(B·V) = (I ⊗ B)·vec(V).
    let id = identity(d);
    let mut system = CMat::zeros(from.len() * d * d, d * d);
    for (a, (fa, tb)) in from.iter().zip(to).enumerate() {
        let block = kron(&fa.transpose(), &id) - kron(&id, tb);
        system
            .view_mut((a * d * d, 0), (d * d, d * d))
            .copy_from(&block);
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let smallest = svd.singular_values[order[0]];
    let next = order
        .get(1)
        .map_or(f64::INFINITY, |&i| svd.singular_values[i]);
    if smallest > 1e-8 || next < 1e-6 {
        return Err(SpinError::DegenerateIntertwiner { smallest, next });
    }
    let row = v_t.row(order[0]);
    let mut v = CMat::from_fn(d, d, |r, col| row[col * d + r].conj());
    let scale = (v.adjoint() * &v).trace().re / d as f64;
    v /= c(scale.sqrt());
    let peak = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let anchor = *v
        .transpose()
        .iter()
        .find(|z| z.norm() >= peak - 1e-12)
        .expect("nonzero intertwiner");
    v *= anchor.conj() / c(anchor.norm());
    Ok(v)
}

/// Which spinor module a [`SpinConnection`] acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    Total,
    Base,
    Horizontal,
    Vertical,
    Module,
}

/// Connection matrices `ω_a`, one per derivative direction, on a spinor fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConnection {
    pub fiber: FiberKind,
    pub mats: Vec<CMat>,
}

impl SpinConnection {
    pub fn directions(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// Worst `‖ω_a + ω_a*‖`.
    pub fn metricity_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| max_abs(&(m + m.adjoint())))
            .fold(0.0, f64::max)
    }

    /// Worst `‖[ω_a, Γ]‖`.
    pub fn evenness_residual(&self, grading: &CMat) -> f64 {
        self.mats
            .iter()
            .map(|m| max_abs(&commutator(m, grading)))
            .fold(0.0, f64::max)
    }

    /// Dual connection on the dual module, in the dual basis.
    pub fn dual(&self) -> Self {
        Self {
            fiber: self.fiber,
            mats: self.mats.iter().map(|m| -m.transpose()).collect(),
        }
    }
}

/// Canonical lift `ω_a = ¼ Σ_{i<j} gamma[i][a][j] [γ_i, γ_j]` of a metric
/// connection to the Clifford module generated by `gens`.
pub fn spin_lift(
    conn: &ConnectionCoefficients,
    gens: &[CMat],
    fiber: FiberKind,
) -> Result<SpinConnection, SpinError> {
    if conn.rank() != gens.len() {
        return Err(SpinError::Mismatch(format!(
            "connection of rank {} lifted with {} generators",
            conn.rank(),
            gens.len()
        )));
    }
    let defect = conn.metricity_residual();
    if defect > 1e-10 {
        return Err(SpinError::NonMetric(defect));
    }
    let dim = gens[0].nrows();
    let pairs: Vec<(usize, usize, CMat)> = (0..gens.len())
        .flat_map(|i| ((i + 1)..gens.len()).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, commutator(&gens[i], &gens[j])))
        .collect();
    let mats = (0..conn.n_dirs())
        .map(|a| {
            pairs.iter().fold(zeros(dim), |acc, (i, j, comm)| {
                let coeff = conn.get(*i, a, *j);
                if coeff == 0.0 {
                    acc
                } else {
                    acc + comm * c(0.25 * coeff)
                }
            })
        })
        .collect();
    Ok(SpinConnection { fiber, mats })
}

/// `max_{a,b} ‖[ω_a, γ_b] − Σ_k gamma[k][a][b] γ_k‖`.
pub fn clifford_compat_residual(
    sc: &SpinConnection,
    conn: &ConnectionCoefficients,
    gens: &[CMat],
) -> f64 {
    let mut worst = 0.0_f64;
    for (a, omega) in sc.mats.iter().enumerate() {
        for (b, gb) in gens.iter().enumerate() {
            let expected = gens
                .iter()
                .enumerate()
                .fold(zeros(gb.nrows()), |acc, (k, gk)| {
                    acc + gk * c(conn.get(k, a, b))
                });
            worst = worst.max(max_abs_diff(&commutator(omega, gb), &expected));
        }
    }
    worst
}

/// Spin lifts of the Levi-Civita, pulled-back horizontal and base connections.
#[derive(Debug, Clone)]
pub struct SpinLifts {
    /// `∇^{E_M}` on the factorized fiber, every frame direction.
    pub total: SpinConnection,
    /// `∇^{E_H}` on `Σ_H`, every frame direction.
    pub horizontal: SpinConnection,
    /// `∇^{E_B}` on `Σ_B`, base directions only.
    pub base: SpinConnection,
}

impl SpinLifts {
    pub fn build(sub: &Submersion, fact: &SpinorFactorization) -> Result<Self, SpinError> {
        check_dims(sub, fact)?;
        let split = sub.split_connections();
        let total = spin_lift(&sub.levi_civita(), fact.act(), FiberKind::Total)?;
        let horizontal_conn = split.horizontal.restrict_fiber(sub.frame().horizontal());
        let horizontal = spin_lift(
            &horizontal_conn,
            fact.base_rep().gammas(),
            FiberKind::Horizontal,
        )?;
        let base = spin_lift(
            &sub.base_levi_civita(),
            fact.base_rep().gammas(),
            FiberKind::Base,
        )?;
        Ok(Self {
            total,
            horizontal,
            base,
        })
    }
}

fn check_dims(sub: &Submersion, fact: &SpinorFactorization) -> Result<(), SpinError> {
    if (sub.n_v(), sub.n_h()) != (fact.n_v(), fact.n_h()) {
        return Err(SpinError::Mismatch(format!(
            "geometry has (n_v, n_h) = ({}, {}) but factorization was built for ({}, {})",
            sub.n_v(),
            sub.n_h(),
            fact.n_v(),
            fact.n_h()
        )));
    }
    Ok(())
}

/// The corrected vertical connection `∇^{E_V}`.
#[derive(Debug, Clone)]
pub struct VerticalConnection {
    /// Matrices on `Σ_H ⊗ Σ_V`, every frame direction.
    pub full: Vec<CMat>,
    /// The same connection read off on the `Σ_V` factor.
    pub factor: SpinConnection,
}

/// Assembles `∇^{E_V}_a = (dual horizontal part) + ω^{E_M}_a + ¼ c(ω(E_a))`
/// on the factorized fiber and reads off its `Σ_V` factor.
pub fn build_vertical_connection(
    sub: &Submersion,
    fact: &SpinorFactorization,
    lifts: &SpinLifts,
) -> Result<VerticalConnection, SpinError> {
    check_dims(sub, fact)?;
    let dual = lifts.horizontal.dual();
    let mut full = Vec::with_capacity(sub.dim());
    for (a, form) in sub.omega_forms().into_iter().enumerate() {
        let correction = clifford_of_two_form(fact.act(), &TwoForm::new(form)?)? * c(0.25);
        // The dual connection acts on the Σ_H^* slot of Σ_H ⊗ Σ_H^* ⊗_{Cl_H} Σ_M;
        // pairing it back against Σ_H leaves −ω^{E_H}_a ⊗ Id.
        let dual_part = fact.lift_horizontal(&dual.mats[a].transpose());
        full.push(&lifts.total.mats[a] + correction + dual_part);
    }
    let factor = SpinConnection {
        fiber: FiberKind::Vertical,
        mats: full
            .iter()
            .map(|m| partial_trace_outer(m, fact.horizontal_dim(), fact.vertical_dim()))
            .collect(),
    };
    Ok(VerticalConnection { full, factor })
}

impl VerticalConnection {
    /// `max_a ‖∇^{E_V}_a − Id ⊗ X_a‖`: the connection only touches the `Σ_V` factor.
    pub fn factorization_residual(&self, fact: &SpinorFactorization) -> f64 {
        self.full
            .iter()
            .zip(&self.factor.mats)
            .map(|(m, x)| max_abs_diff(m, &fact.lift_vertical(x)))
            .fold(0.0, f64::max)
    }

    /// Commutes with the vertical grading, or with `γ_H ⊗ Id` when the fiber is odd.
    pub fn evenness_residual(&self, fact: &SpinorFactorization) -> f64 {
        match fact.vert_rep().grading() {
            Some(gv) => self.factor.evenness_residual(gv),
            None => self
                .full
                .iter()
                .map(|m| max_abs(&commutator(m, fact.horizontal_grading())))
                .fold(0.0, f64::max),
        }
    }

    pub fn metricity_residual(&self) -> f64 {
        self.factor.metricity_residual()
    }

    /// Clifford compatibility of the `Σ_V` factor with `c_V` against `∇^V`.
    pub fn clifford_residual(&self, sub: &Submersion, fact: &SpinorFactorization) -> f64 {
        let vertical = sub
            .split_connections()
            .vertical
            .restrict_fiber(sub.frame().vertical());
        clifford_compat_residual(&self.factor, &vertical, fact.vert_rep().gammas())
    }

    /// Worst `‖[∇^{E_V}_a, c(f_α)]‖`; zero means the connection is well
    /// defined on the balanced tensor product over the horizontal Clifford algebra.
    pub fn horizontal_commutant_residual(&self, fact: &SpinorFactorization) -> f64 {
        let mut worst = 0.0_f64;
        for m in &self.full {
            for alpha in 0..fact.n_h() {
                worst = worst.max(max_abs(&commutator(m, fact.act_h(alpha))));
            }
        }
        worst
    }
}

/// `∇^X_{f_α} = ∇^{E_V}_{f_α} + ½ k(f_α)`, on `Σ_V`, base directions only.
pub fn build_module_connection(
    sub: &Submersion,
    vertical: &VerticalConnection,
    k: &Covector,
) -> Result<SpinConnection, SpinError> {
    if k.v.len() != sub.dim() {
        return Err(SpinError::Mismatch(format!(
            "mean curvature has {} components, frame has {}",
            k.v.len(),
            sub.dim()
        )));
    }
    if let Some(j) = sub.frame().vertical().find(|&j| k.v[j] != 0.0) {
        return Err(SpinError::Mismatch(format!(
            "mean curvature must vanish on vertical directions (component {} is {})",
            j + 1,
            k.v[j]
        )));
    }
    let dim = vertical.factor.dim();
    let mats = sub
        .frame()
        .horizontal()
        .map(|a| &vertical.factor.mats[a] + identity(dim) * c(0.5 * k.v[a]))
        .collect();
    Ok(SpinConnection {
        fiber: FiberKind::Module,
        mats,
    })
}

/// `max_α ‖½(∇^X_α + ∇^X_α*) − ½k(f_α)·Id‖`: the self-adjoint part of the
/// module connection is exactly the mean-curvature term.
pub fn module_metric_defect(sub: &Submersion, module: &SpinConnection, k: &Covector) -> f64 {
    module
        .mats
        .iter()
        .zip(sub.frame().horizontal())
        .map(|(m, a)| {
            let sym = (m + m.adjoint()) * c(0.5);
            max_abs_diff(&sym, &(identity(m.nrows()) * c(0.5 * k.v[a])))
        })
        .fold(0.0, f64::max)
}

/// `max_{a,T} ‖[ω^{E_M}_a, T] − [ω^{E_H}_a, T] − ¼[T, c(ω(E_a))]‖` over the
/// horizontal Clifford monomials `T` of degree one and two.
pub fn connection_commutator_residual(
    sub: &Submersion,
    fact: &SpinorFactorization,
    lifts: &SpinLifts,
) -> Result<f64, SpinError> {
    let mut monomials: Vec<CMat> = (0..fact.n_h()).map(|a| fact.act_h(a).clone()).collect();
    for a in 0..fact.n_h() {
        for b in (a + 1)..fact.n_h() {
            monomials.push(fact.act_h(a) * fact.act_h(b));
        }
    }
    let mut worst = 0.0_f64;
    for (a, form) in sub.omega_forms().into_iter().enumerate() {
        let c_omega = clifford_of_two_form(fact.act(), &TwoForm::new(form)?)?;
        let total = &lifts.total.mats[a];
        let horizontal = fact.lift_horizontal(&lifts.horizontal.mats[a]);
        for t in &monomials {
            let lhs = commutator(total, t);
            let rhs = commutator(&horizontal, t) + commutator(t, &c_omega) * c(0.25);
            worst = worst.max(max_abs_diff(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// `max_a ‖¼[γ_a, c(ω(E_a'))] − c̃(ω(E_a'))(E_a)‖` over every frame direction `a'`.
pub fn omega_commutator_residual(sub: &Submersion, gens: &[CMat]) -> Result<f64, SpinError> {
    let mut worst = 0.0_f64;
    for form in sub.omega_forms() {
        let r = crate::clifford::commutator_identity_residual(gens, &TwoForm::new(form)?)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::clifford_relation_residual;
    use crate::geometry::{random_frame, FrameGeometry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sub(entries: &[(usize, usize, usize, f64)], n_v: usize, n_h: usize) -> Submersion {
        FrameGeometry::from_brackets("t", n_v, n_h, true, entries)
            .unwrap()
            .try_into()
            .unwrap()
    }

    #[test]
    fn hopf_shape_factorization() {
        let fact = SpinorFactorization::with_dims(1, 2).unwrap();
        assert_eq!(fact.total_dim(), 2);
        assert!(clifford_relation_residual(fact.act()) < 1e-15);
        assert_eq!(fact.mixed_anticommutator_residual(), 0.0);
        assert!(fact.intertwiner_unitarity_residual() < 1e-12);
        assert!(fact.intertwiner_conjugation_residual() < 1e-12);
    }

    #[test]
    fn two_by_two_factorization_is_a_full_clifford_module() {
        let fact = SpinorFactorization::with_dims(2, 2).unwrap();
        assert_eq!(fact.total_dim(), 4);
        assert!(clifford_relation_residual(fact.act()) < 1e-15);
        let gr = fact.grading_total().unwrap();
        assert!(crate::clifford::grading_residual(gr, fact.act()) < 1e-15);
        assert!(fact.intertwiner_conjugation_residual() < 1e-12);
    }

    #[test]
    fn odd_base_rejected() {
        assert_eq!(
            SpinorFactorization::with_dims(2, 3).unwrap_err(),
            SpinError::UngradedBase { n_h: 3 }
        );
    }

    #[test]
    fn intertwiner_phase_is_fixed() {
        let fact = SpinorFactorization::with_dims(3, 2).unwrap();
        let v = fact.intertwiner();
        let peak = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let anchor = v
            .transpose()
            .iter()
            .find(|z| z.norm() >= peak - 1e-12)
            .copied()
            .unwrap();
        assert!(anchor.im.abs() < 1e-12 && anchor.re > 0.0);
        let again = SpinorFactorization::with_dims(3, 2).unwrap();
        assert_eq!(v, again.intertwiner());
    }

    #[test]
    fn inequivalent_generators_have_no_intertwiner() {
        let r = CliffordRep::build(3).unwrap();
        let negated: Vec<CMat> = r.gammas().iter().map(|g| -g.clone()).collect();
        assert!(matches!(
            solve_intertwiner(r.gammas(), &negated),
            Err(SpinError::DegenerateIntertwiner { .. })
        ));
    }

    #[test]
    fn flat_spin_lift_vanishes() {
        let s = sub(&[], 1, 2);
        let fact = SpinorFactorization::build(&s).unwrap();
        let lifts = SpinLifts::build(&s, &fact).unwrap();
        assert!(lifts.total.mats.iter().all(|m| max_abs(m) == 0.0));
        let vc = build_vertical_connection(&s, &fact, &lifts).unwrap();
        assert!(vc.full.iter().all(|m| max_abs(m) == 0.0));
    }

    #[test]
    fn su2_spin_lift_is_clifford_compatible() {
        // Bi-invariant su(2), [E_i, E_j] = λ ε_ijk E_k, on the Pauli module.
        let lambda = -2.0;
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        let conn = crate::geometry::koszul(3, |k, i, j| lambda * eps(i, j, k));
        let rep = CliffordRep::build(3).unwrap();
        let lift = spin_lift(&conn, rep.gammas(), FiberKind::Total).unwrap();
        assert!(clifford_compat_residual(&lift, &conn, rep.gammas()) < 1e-15);
        // gamma[k][i][j] = (λ/2)ε_ijk and [σ_i, σ_j] = 2iε_ijk σ_k give ω_a = −(iλ/4)σ_a.
        for a in 0..3 {
            let expected = rep.gamma(a) * (crate::linalg::I * c(-lambda / 4.0));
            assert!(
                max_abs_diff(&lift.mats[a], &expected) < 1e-15,
                "direction {a}"
            );
        }
    }

    #[test]
    fn heisenberg_spin_lift_has_six_terms() {
        let s = sub(&[(1, 2, 0, 1.0)], 1, 2);
        let fact = SpinorFactorization::build(&s).unwrap();
        let lifts = SpinLifts::build(&s, &fact).unwrap();
        let lc = s.levi_civita();
        assert!(clifford_compat_residual(&lifts.total, &lc, fact.act()) < 1e-15);
        // each direction carries exactly one commutator: the one pairing the other two indices
        for a in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&x| x != a).collect();
            let comm = commutator(&fact.act()[others[0]], &fact.act()[others[1]]);
            let coeff = 0.25 * lc.get(others[0], a, others[1]);
            assert!(coeff != 0.0);
            assert!(max_abs_diff(&lifts.total.mats[a], &(comm * c(coeff))) < 1e-15);
        }
    }

    #[test]
    fn perturbed_lift_is_detected() {
        let s = sub(&[(1, 2, 0, 1.0)], 1, 2);
        let fact = SpinorFactorization::build(&s).unwrap();
        let mut lifts = SpinLifts::build(&s, &fact).unwrap();
        lifts.total.mats[1] += fact.act()[0].clone() * c(1e-3);
        assert!(clifford_compat_residual(&lifts.total, &s.levi_civita(), fact.act()) > 1e-4);
    }

    #[test]
    fn non_metric_connection_rejected() {
        let conn = ConnectionCoefficients::from_fn(2, 2, |k, _, j| if k == j { 1.0 } else { 0.0 });
        let rep = CliffordRep::build(2).unwrap();
        assert!(matches!(
            spin_lift(&conn, rep.gammas(), FiberKind::Base),
            Err(SpinError::NonMetric(_))
        ));
    }

    #[test]
    fn vertical_connection_axioms_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n_v in 1..=3 {
            for n_h in [2, 4] {
                let s: Submersion = random_frame(&mut rng, n_v, n_h, "r").try_into().unwrap();
                let fact = SpinorFactorization::build(&s).unwrap();
                let lifts = SpinLifts::build(&s, &fact).unwrap();
                let vc = build_vertical_connection(&s, &fact, &lifts).unwrap();
                assert!(vc.horizontal_commutant_residual(&fact) < 1e-12);
                assert!(vc.factorization_residual(&fact) < 1e-12);
                assert!(vc.evenness_residual(&fact) < 1e-12);
                assert!(vc.metricity_residual() < 1e-12);
                assert!(vc.clifford_residual(&s, &fact) < 1e-12);
                assert!(connection_commutator_residual(&s, &fact, &lifts).unwrap() < 1e-12);
                let k = s.mean_curvature();
                let module = build_module_connection(&s, &vc, &k).unwrap();
                assert!(module_metric_defect(&s, &module, &k) < 1e-12);
            }
        }
    }

    #[test]
    fn warped_module_connection_gains_half_mean_curvature() {
        let s = sub(&[(1, 0, 0, 1.0)], 1, 2);
        let fact = SpinorFactorization::build(&s).unwrap();
        let lifts = SpinLifts::build(&s, &fact).unwrap();
        let vc = build_vertical_connection(&s, &fact, &lifts).unwrap();
        let k = s.mean_curvature();
        assert_eq!(k.v[1], -1.0);
        let module = build_module_connection(&s, &vc, &k).unwrap();
        let diff = &module.mats[0] - &vc.factor.mats[1];
        assert!(max_abs_diff(&diff, &(identity(diff.nrows()) * c(-0.5))) < 1e-15);
        assert!(max_abs_diff(&module.mats[1], &vc.factor.mats[2]) < 1e-15);
    }

    #[test]
    fn module_connection_rejects_vertical_mean_curvature() {
        let s = sub(&[], 1, 2);
        let fact = SpinorFactorization::build(&s).unwrap();
        let lifts = SpinLifts::build(&s, &fact).unwrap();
        let vc = build_vertical_connection(&s, &fact, &lifts).unwrap();
        let bad = Covector {
            v: vec![1.0, 0.0, 0.0],
        };
        assert!(build_module_connection(&s, &vc, &bad).is_err());
        let short = Covector { v: vec![0.0; 2] };
        assert!(build_module_connection(&s, &vc, &short).is_err());
    }
}
