//! Reference computations that share no code with the library.
//!
//! Connections come from solving the metric and torsion-free conditions as a
//! linear system, Clifford generators from the Jordan–Wigner construction,
//! and determinants from the Leibniz expansion.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use spinfac::FrameGeometry;

pub type M = DMatrix<Complex64>;

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn comm(a: &M, b: &M) -> M {
    a * b - b * a
}

/// `Γ[k][i][j] = ⟨∇_{E_i} E_j, E_k⟩` for the unique metric, torsion-free
/// connection with brackets `br(k, i, j)`, found by least squares.
pub fn solve_connection(n: usize, br: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
    let idx = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let unknowns = n * n * n;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // metric: ⟨∇_i E_j, E_k⟩ + ⟨E_j, ∇_i E_k⟩ = 0
                rows.push((vec![(idx(k, i, j), 1.0), (idx(j, i, k), 1.0)], 0.0));
                // torsion-free: ∇_i E_j − ∇_j E_i = [E_i, E_j]
                rows.push((vec![(idx(k, i, j), 1.0), (idx(k, j, i), -1.0)], br(k, i, j)));
            }
        }
    }
    let mut a = DMatrix::<f64>::zeros(rows.len(), unknowns);
    let mut b = DVector::<f64>::zeros(rows.len());
    for (r, (terms, rhs)) in rows.into_iter().enumerate() {
        for (col, v) in terms {
            a[(r, col)] += v;
        }
        b[r] = rhs;
    }
    let normal = a.transpose() * &a;
    let x = normal
        .cholesky()
        .expect("metric and torsion-free conditions determine the connection")
        .solve(&(a.transpose() * b));
    x.iter().copied().collect()
}

/// Oracle tensors of a frame, built from connections rather than closed formulas.
pub struct Oracle {
    pub n: usize,
    pub n_v: usize,
    pub lc: Vec<f64>,
    pub direct_sum: Vec<f64>,
}

impl Oracle {
    pub fn new(g: &FrameGeometry) -> Self {
        let n = g.dim();
        let n_v = g.n_v();
        let n_h = g.n_h();
        let lc = solve_connection(n, |k, i, j| g.c(k, i, j));
        let base = solve_connection(n_h, |k, i, j| g.c(k + n_v, i + n_v, j + n_v));
        let mut direct_sum = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let value = if j < n_v && k < n_v {
                        // vertical projection of the Levi-Civita derivative
                        lc[(k * n + i) * n + j]
                    } else if i >= n_v && j >= n_v && k >= n_v {
                        base[((k - n_v) * n_h + (i - n_v)) * n_h + (j - n_v)]
                    } else {
                        0.0
                    };
                    direct_sum[(k * n + i) * n + j] = value;
                }
            }
        }
        Self {
            n,
            n_v,
            lc,
            direct_sum,
        }
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.lc[(k * self.n + i) * self.n + j]
    }

    /// `ω(E_i)(E_j, E_k) = ⟨(∇^M − ∇^⊕)_{E_i} E_j, E_k⟩`.
    pub fn omega(&self, i: usize, j: usize, k: usize) -> f64 {
        let at = (k * self.n + i) * self.n + j;
        self.lc[at] - self.direct_sum[at]
    }

    /// `k(E_a) = Σ_j ⟨∇_{e_j} E_a, e_j⟩` for horizontal `a`.
    pub fn mean_curvature(&self, a: usize) -> f64 {
        if a < self.n_v {
            return 0.0;
        }
        (0..self.n_v).map(|j| self.gamma(j, j, a)).sum()
    }

    pub fn direct_sum(&self, k: usize, i: usize, j: usize) -> f64 {
        self.direct_sum[(k * self.n + i) * self.n + j]
    }
}

fn pauli() -> [M; 4] {
    let o = re(0.0);
    let l = re(1.0);
    let i = Complex64::new(0.0, 1.0);
    [
        M::from_row_slice(2, 2, &[l, o, o, l]),
        M::from_row_slice(2, 2, &[o, l, l, o]),
        M::from_row_slice(2, 2, &[o, -i, i, o]),
        M::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

fn tensor(factors: &[&M]) -> M {
    factors
        .iter()
        .fold(M::from_element(1, 1, re(1.0)), |acc, f| acc.kronecker(*f))
}

/// Jordan–Wigner generators on `⌊n/2⌋` qubits; for odd `n` the last one is
/// the string `Z ⊗ ⋯ ⊗ Z`, which keeps the module irreducible.
pub fn jordan_wigner(n: usize) -> Vec<M> {
    let qubits = n / 2;
    let [id, x, y, z] = pauli();
    let mut out = Vec::with_capacity(n);
    for a in 0..2 * qubits {
        let q = a / 2;
        let factors: Vec<&M> = (0..qubits)
            .map(|p| {
                if p < q {
                    &z
                } else if p == q {
                    if a % 2 == 0 {
                        &x
                    } else {
                        &y
                    }
                } else {
                    &id
                }
            })
            .collect();
        out.push(tensor(&factors));
    }
    if n % 2 == 1 {
        out.push(tensor(&vec![&z; qubits]));
    }
    out
}

/// `c(w) = Σ_{a<b} w_ab [γ_a, γ_b] = 2 Σ_{a<b} w_ab γ_a γ_b`.
pub fn clifford_two_form(gens: &[M], w: impl Fn(usize, usize) -> f64) -> M {
    let d = gens[0].nrows();
    let mut out = M::zeros(d, d);
    for a in 0..gens.len() {
        for b in (a + 1)..gens.len() {
            out += &gens[a] * &gens[b] * re(2.0 * w(a, b));
        }
    }
    out
}

/// Leibniz determinant, summing over all permutations.
pub fn leibniz_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, 1.0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, start: usize, sign: f64, m: &DMatrix<f64>, total: &mut f64) {
    if start == perm.len() {
        *total += sign
            * perm
                .iter()
                .enumerate()
                .map(|(r, &col)| m[(r, col)])
                .product::<f64>();
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        let s = if i == start { sign } else { -sign };
        permute(perm, start + 1, s, m, total);
        perm.swap(start, i);
    }
}
