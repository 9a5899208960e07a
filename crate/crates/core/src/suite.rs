//! The full identity suite for one frame, fuzz campaigns, and the report format.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::{clifford_relation_residual, complex_pair, matrix_to_nested, CliffordRep};
use crate::geometry::{
    det_splitting_residual, random_frame, random_matrix, random_spd, Submersion,
};
use crate::linalg::as_scalar;
use crate::operators::{mean_curvature_identity_residual, Assembly, OperatorError};
use crate::parallel::{map_indexed, Execution};
use crate::spin::{
    clifford_compat_residual, connection_commutator_residual, module_metric_defect,
    omega_commutator_residual, spin_lift, FiberKind,
};

/// Sign and phase choices every reported number depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convention {
    pub clifford_relation: &'static str,
    pub representation: &'static str,
    pub grading: &'static str,
    pub spinor_factorization: &'static str,
    pub spin_lift: &'static str,
    pub curvature_term: &'static str,
    pub hopf_curvature_scalar: &'static str,
}

pub const CONVENTION: Convention = Convention {
    clifford_relation: "γ_a γ_b + γ_b γ_a = 2δ_ab",
    representation: "γ(1) = (1); γ(2) = (σ1, σ2); γ(n+2) = (γ(n)_a ⊗ σ1, Id ⊗ σ2, Id ⊗ σ3)",
    grading: "(−i)^{n/2} γ_1⋯γ_n for even n",
    spinor_factorization: "c(f_α) = γ^B_α ⊗ Id, c(e_j) = γ_B ⊗ γ^V_j on Σ_H ⊗ Σ_V",
    spin_lift: "ω_a = ¼ Σ_{i<j} ⟨∇_{E_a} E_j, E_i⟩ [γ_i, γ_j]",
    curvature_term: "−(i/8) Σ_k c(Ω(·,·,e_k)) c(e_k); D_M = S ⊗̂ 1 + 1 ⊗ D_B − curvature_term",
    hopf_curvature_scalar: "+1/2",
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorReport {
    pub second_fundamental_form: Vec<Vec<Vec<f64>>>,
    pub submersion_curvature: Vec<Vec<Vec<f64>>>,
    pub omega: Vec<Vec<Vec<f64>>>,
    pub mean_curvature: Vec<f64>,
    pub fiber_divergence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    /// Entries as `[re, im]`.
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<[f64; 2]>,
}

/// One report shape for single-frame verification and fuzz campaigns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub target: String,
    pub convention: Convention,
    pub tensors: Option<TensorReport>,
    pub residuals: BTreeMap<String, f64>,
    pub curvature_term: Option<CurvatureReport>,
    pub pass: bool,
    #[serde(skip)]
    pub tolerance: f64,
    #[serde(skip)]
    pub notes: Vec<String>,
}

/// `r ≤ tol`, false for NaN.
fn within(r: f64, tol: f64) -> bool {
    matches!(
        r.partial_cmp(&tol),
        Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
    )
}

impl Report {
    fn finish(
        target: String,
        tensors: Option<TensorReport>,
        residuals: BTreeMap<String, f64>,
        curvature_term: Option<CurvatureReport>,
        tolerance: f64,
        notes: Vec<String>,
    ) -> Self {
        let pass = residuals.values().all(|r| within(*r, tolerance));
        Self {
            target,
            convention: CONVENTION,
            tensors,
            residuals,
            curvature_term,
            pass,
            tolerance,
            notes,
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = (&str, f64)> {
        self.residuals
            .iter()
            .filter(|(_, r)| !within(**r, self.tolerance))
            .map(|(name, r)| (name.as_str(), *r))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "tolerance: {:e}", self.tolerance)?;
        if let Some(t) = &self.tensors {
            writeln!(f, "mean curvature k: {:?}", t.mean_curvature)?;
            writeln!(f, "fiber divergence: {:?}", t.fiber_divergence)?;
            write_tensor(f, "S", &t.second_fundamental_form)?;
            write_tensor(f, "Ω", &t.submersion_curvature)?;
            write_tensor(f, "ω", &t.omega)?;
        }
        if let Some(curv) = &self.curvature_term {
            match curv.scalar {
                Some([re, im]) => writeln!(f, "curvature term: ({re} + {im}i)·Id")?,
                None => {
                    writeln!(f, "curvature term:")?;
                    for row in &curv.matrix {
                        let cells: Vec<String> = row
                            .iter()
                            .map(|[re, im]| format!("{re:+.6}{im:+.6}i"))
                            .collect();
                        writeln!(f, "  [{}]", cells.join(", "))?;
                    }
                }
            }
        }
        writeln!(f, "residuals:")?;
        for (name, r) in &self.residuals {
            let mark = if within(*r, self.tolerance) {
                "ok"
            } else {
                "FAIL"
            };
            writeln!(f, "  {name:<36} {r:.3e}  {mark}")?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        writeln!(
            f,
            "convention: Clifford {}; grading {}; hopf curvature scalar {}",
            self.convention.clifford_relation,
            self.convention.grading,
            self.convention.hopf_curvature_scalar
        )?;
        write!(f, "{}", if self.pass { "PASS" } else { "FAIL" })
    }
}

fn write_tensor(f: &mut fmt::Formatter<'_>, name: &str, t: &[Vec<Vec<f64>>]) -> fmt::Result {
    let mut any = false;
    for (i, plane) in t.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    writeln!(f, "  {name}({}, {}, {}) = {v}", i + 1, j + 1, k + 1)?;
                    any = true;
                }
            }
        }
    }
    if !any {
        writeln!(f, "  {name} = 0")?;
    }
    Ok(())
}

/// Residuals of every identity applicable to one frame.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub residuals: BTreeMap<String, f64>,
    pub assembly: Option<Assembly>,
    pub notes: Vec<String>,
}

/// Runs the identity suite. `rng` only feeds the determinant-splitting check.
pub fn run_suite<R: Rng + ?Sized>(
    sub: &Submersion,
    rng: &mut R,
) -> Result<SuiteOutcome, OperatorError> {
    let mut residuals = BTreeMap::new();
    let mut put = |name: &str, value: f64| {
        residuals.insert(name.to_string(), value);
    };
    let mut notes = Vec::new();

    let lc = sub.levi_civita();
    put("levi_civita_metric", lc.metricity_residual());
    put("levi_civita_torsion", sub.torsion_residual(&lc));
    put("lifted_base_connection", sub.lifted_base_residual());
    put("bismut_comparison", sub.bismut_residual());
    let s = sub.second_fundamental_form();
    put(
        "second_fundamental_form_symmetry",
        s.swap12_defect(1.0).max(s.support_violation()),
    );

    let reference = CliffordRep::build(sub.dim())?;
    let gens = reference.gammas();
    put("clifford_relation", clifford_relation_residual(gens));
    put("two_form_commutator", omega_commutator_residual(sub, gens)?);
    put(
        "mean_curvature_identity",
        mean_curvature_identity_residual(sub, gens)?,
    );
    let reference_lift = spin_lift(&lc, gens, FiberKind::Total)?;
    let mut spin_compat = clifford_compat_residual(&reference_lift, &lc, gens);

    let h = random_spd(rng, sub.n_h());
    let g = random_spd(rng, sub.n_v());
    let a = random_matrix(rng, sub.n_h(), sub.n_v());
    put("det_splitting", det_splitting_residual(&h, &g, &a)?);

    let assembly = if sub.n_h().is_multiple_of(2) {
        let asm = Assembly::build(sub)?;
        let fact = &asm.factorization;
        spin_compat = spin_compat.max(clifford_compat_residual(&asm.lifts.total, &lc, fact.act()));
        put(
            "intertwiner_unitarity",
            fact.intertwiner_unitarity_residual(),
        );
        put(
            "intertwiner_conjugation",
            fact.intertwiner_conjugation_residual(),
        );
        let vc = &asm.vertical_connection;
        put("vertical_connection_even", vc.evenness_residual(fact));
        put("vertical_connection_metric", vc.metricity_residual());
        put(
            "vertical_connection_clifford",
            vc.clifford_residual(sub, fact),
        );
        put(
            "vertical_connection_factorizes",
            vc.factorization_residual(fact)
                .max(vc.horizontal_commutant_residual(fact)),
        );
        put(
            "connection_commutator",
            connection_commutator_residual(sub, fact, &asm.lifts)?,
        );
        put(
            "module_connection_metric_defect",
            module_metric_defect(sub, &asm.module_connection, &asm.mean_curvature),
        );
        let fr = asm.factorization_residual();
        put("factorization_symbol", fr.symbol);
        put("factorization_zeroth", fr.zeroth);
        put("vertical_dirac_symmetry", asm.vertical_dirac_symmetry(sub));
        let raw = asm.vertical_dirac.zeroth_hermitian_defect();
        if !sub.is_vertically_unimodular(1e-14) {
            notes.push(format!(
                "vertical data is not unimodular; S is symmetric only up to the fiber divergence term (‖Z − Z*‖ = {raw:.3e})"
            ));
        }
        if fact.vertical_negated() {
            notes.push("vertical generators negated to match the reference volume element".into());
        }
        Some(asm)
    } else {
        notes.push(format!(
            "base dimension {} is odd: spinor factorization and operator-level checks skipped",
            sub.n_h()
        ));
        None
    };
    put("spin_lift_compatibility", spin_compat);
    Ok(SuiteOutcome {
        residuals,
        assembly,
        notes,
    })
}

pub fn tensor_report(sub: &Submersion) -> TensorReport {
    // Adding +0.0 turns −0.0 into 0.0 so reports read cleanly.
    let nested = |t: crate::geometry::Tensor3| -> Vec<Vec<Vec<f64>>> {
        t.to_nested()
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|r| r.into_iter().map(|x| x + 0.0).collect())
                    .collect()
            })
            .collect()
    };
    TensorReport {
        second_fundamental_form: nested(sub.second_fundamental_form()),
        submersion_curvature: nested(sub.submersion_curvature()),
        omega: nested(sub.omega_tensor()),
        mean_curvature: sub
            .mean_curvature()
            .v
            .into_iter()
            .map(|x| x + 0.0)
            .collect(),
        fiber_divergence: (0..sub.dim())
            .map(|a| sub.fiber_divergence(a) + 0.0)
            .collect(),
    }
}

/// Seed of the determinant-splitting data used by single-frame verification.
pub const VERIFY_SEED: u64 = 0;

/// Full verification report for one frame.
pub fn verify(sub: &Submersion, tolerance: f64) -> Result<Report, OperatorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let outcome = run_suite(sub, &mut rng)?;
    let curvature_term = outcome.assembly.as_ref().map(|asm| CurvatureReport {
        matrix: matrix_to_nested(&asm.curvature),
        scalar: as_scalar(&asm.curvature, tolerance).map(complex_pair),
    });
    Ok(Report::finish(
        sub.frame().label().to_string(),
        Some(tensor_report(sub)),
        outcome.residuals,
        curvature_term,
        tolerance,
        outcome.notes,
    ))
}

/// Generator for fuzz case `index`: independent of evaluation order.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws fuzz case `index`: `n_v ∈ 1..=3`, `n_h ∈ 1..=4`, random valid brackets.
pub fn fuzz_case(seed: u64, index: u64) -> (Submersion, ChaCha8Rng) {
    let mut rng = case_rng(seed, index);
    let n_v = rng.gen_range(1..=3);
    let n_h = rng.gen_range(1..=4);
    let frame = random_frame(&mut rng, n_v, n_h, format!("fuzz:{seed}:{index}"));
    let sub =
        Submersion::try_from(frame).expect("generated frames satisfy the submersion invariants");
    (sub, rng)
}

/// Worst residual per identity over `count` random frames.
pub fn fuzz(
    count: usize,
    seed: u64,
    tolerance: f64,
    exec: Execution,
) -> Result<Report, OperatorError> {
    let outcomes = map_indexed(count, exec, |i| {
        let (sub, mut rng) = fuzz_case(seed, i as u64);
        run_suite(&sub, &mut rng).map(|o| o.residuals)
    });
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut factorized = 0;
    for outcome in outcomes {
        let residuals = outcome?;
        if residuals.contains_key("factorization_zeroth") {
            factorized += 1;
        }
        for (name, r) in residuals {
            let slot = worst.entry(name).or_insert(0.0);
            // NaN must surface as a failure rather than vanish in max().
            if r.is_nan() || *slot < r {
                *slot = r;
            }
        }
    }
    let notes = vec![format!(
        "{count} frames, {factorized} with even base dimension ran the operator-level checks"
    )];
    Ok(Report::finish(
        format!("fuzz:count={count},seed={seed}"),
        None,
        worst,
        None,
        tolerance,
        notes,
    ))
}
