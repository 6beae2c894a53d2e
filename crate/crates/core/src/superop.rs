//! Superoperators `ξ ↦ Σ x_j ξ y_j*` on Hilbert–Schmidt space and their
//! operator norms.
//!
//! Vectorization is row-major: `vec(ξ)[i·N + k] = ξ[i, k]`, under which the
//! map above is the matrix `Σ x_j ⊗ conj(y_j)`. The projection onto the
//! identity is `P(ξ) = τ_N(ξ)·I`; restricting to `H₀` means composing with
//! `I − P` on both sides.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{QexError, Result};
use crate::linalg::{c64, gaussian_matrix, normalized_trace, ComplexMatrix, MatrixTuple, RngSpec};

/// Default cap on the dimension `N²` of a dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "QEX_DENSE_CAP";

/// Default iteration cap for the iterative norm methods.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Largest `N` for which [`NormMethod::Auto`] picks the dense path.
pub const AUTO_DENSE_MAX_N: usize = 16;

pub fn dense_cap() -> usize {
    std::env::var(DENSE_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

/// `ξ − τ_N(ξ)·I`, in place.
pub fn project_h0(xi: &mut ComplexMatrix) {
    let t = normalized_trace(xi);
    for i in 0..xi.dim() {
        xi[(i, i)] -= t;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    left: MatrixTuple,
    right: MatrixTuple,
    restrict_h0: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    /// Top singular value of the materialized `N² × N²` matrix.
    Dense,
    /// Power iteration on `T*T`.
    Power,
    /// Restarted Lanczos on `T*T` with full reorthogonalization.
    Lanczos,
    /// Dense for `N ≤ AUTO_DENSE_MAX_N` within the cap, Lanczos otherwise.
    Auto,
}

impl std::str::FromStr for NormMethod {
    type Err = QexError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "power" => Ok(Self::Power),
            "lanczos" => Ok(Self::Lanczos),
            "auto" => Ok(Self::Auto),
            other => Err(QexError::InvalidArgument(format!(
                "unknown norm method {other:?} (expected dense, power, lanczos or auto)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormOptions {
    pub method: NormMethod,
    /// Power: stop when the increment of the norm estimate drops below
    /// `tol`. Lanczos: stop when the Ritz residual is below `tol` times the
    /// Ritz value.
    pub tol: f64,
    pub max_iter: usize,
    /// Stream for random start vectors.
    pub rng: RngSpec,
    pub dense_cap: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            method: NormMethod::Auto,
            tol: 1e-10,
            max_iter: DEFAULT_MAX_ITER,
            rng: RngSpec::new(0x51DE_CA11, 0),
            dense_cap: dense_cap(),
        }
    }
}

impl NormOptions {
    pub fn with_method(method: NormMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn rng(mut self, rng: RngSpec) -> Self {
        self.rng = rng;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Result of an operator-norm computation.
///
/// `value` is `‖T(top_vector)‖` for the unit witness `top_vector`, hence
/// always a lower bound on the true norm; `residual` is
/// `‖T*T ξ − value² ξ‖` at the witness (zero for the dense path up to
/// rounding).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub value: f64,
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip)]
    pub top_vector: Option<ComplexMatrix>,
}

impl GapReport {
    pub fn converged(&self) -> bool {
        !self.method.ends_with("-unconverged")
    }
}

impl SuperOperator {
    pub fn new(left: MatrixTuple, right: MatrixTuple, restrict_h0: bool) -> Result<Self> {
        left.require_same_shape(&right)?;
        Ok(Self {
            left,
            right,
            restrict_h0,
        })
    }

    /// `T_u = Σ u_j ⊗ ū_j`, optionally restricted to `H₀`.
    pub fn from_tuple(u: &MatrixTuple, restrict_h0: bool) -> Self {
        Self {
            left: u.clone(),
            right: u.clone(),
            restrict_h0,
        }
    }

    pub fn left(&self) -> &MatrixTuple {
        &self.left
    }

    pub fn right(&self) -> &MatrixTuple {
        &self.right
    }

    pub fn restricts_h0(&self) -> bool {
        self.restrict_h0
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    pub fn n(&self) -> usize {
        self.left.n()
    }

    fn check_dim(&self, xi: &ComplexMatrix) -> Result<()> {
        if xi.dim() != self.dim() {
            return Err(QexError::DimensionMismatch {
                expected: self.dim(),
                found: xi.dim(),
            });
        }
        Ok(())
    }

    /// `Σ x_j ξ y_j*`, with `I − P` applied to input and output when
    /// restricted.
    pub fn apply(&self, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(xi)?;
        Ok(self.apply_unchecked(xi, false))
    }

    /// `T*(η) = Σ x_j* η y_j` (with the same projections).
    pub fn apply_adjoint(&self, eta: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(eta)?;
        Ok(self.apply_unchecked(eta, true))
    }

    fn apply_unchecked(&self, xi: &ComplexMatrix, adjoint: bool) -> ComplexMatrix {
        let n = self.dim();
        let projected;
        let input = if self.restrict_h0 {
            let mut p = xi.clone();
            project_h0(&mut p);
            projected = p;
            &projected
        } else {
            xi
        };
        let one = c64::new(1.0, 0.0);
        let mut out = ComplexMatrix::zeros(n);
        let mut tmp = ComplexMatrix::zeros(n);
        for (x, y) in self.left.iter().zip(self.right.iter()) {
            if adjoint {
                matmul(
                    tmp.as_faer_mut(),
                    Accum::Replace,
                    x.as_faer().adjoint(),
                    input.as_faer(),
                    one,
                    Par::Seq,
                );
                matmul(
                    out.as_faer_mut(),
                    Accum::Add,
                    tmp.as_faer(),
                    y.as_faer(),
                    one,
                    Par::Seq,
                );
            } else {
                matmul(
                    tmp.as_faer_mut(),
                    Accum::Replace,
                    x.as_faer(),
                    input.as_faer(),
                    one,
                    Par::Seq,
                );
                matmul(
                    out.as_faer_mut(),
                    Accum::Add,
                    tmp.as_faer(),
                    y.as_faer().adjoint(),
                    one,
                    Par::Seq,
                );
            }
        }
        if self.restrict_h0 {
            project_h0(&mut out);
        }
        out
    }

    /// `T*T(ξ)`.
    pub fn apply_gram(&self, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(xi)?;
        let t = self.apply_unchecked(xi, false);
        Ok(self.apply_unchecked(&t, true))
    }

    /// The `N² × N²` matrix of `T` in row-major vectorization.
    pub fn materialize(&self) -> Result<ComplexMatrix> {
        self.materialize_with_cap(dense_cap())
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<ComplexMatrix> {
        let n = self.dim();
        let d = n * n;
        if d > cap {
            return Err(QexError::DenseCapExceeded { dim: d, cap });
        }
        let mut m = ComplexMatrix::zeros(d);
        for (x, y) in self.left.iter().zip(self.right.iter()) {
            let yc = y.conj();
            for c in 0..d {
                let (a, b) = (c / n, c % n);
                for r in 0..d {
                    let (i, k) = (r / n, r % n);
                    m[(r, c)] += x[(i, a)] * yc[(k, b)];
                }
            }
        }
        if self.restrict_h0 {
            compress_h0(&mut m, n);
        }
        Ok(m)
    }

    pub fn operator_norm(&self, opts: &NormOptions) -> Result<GapReport> {
        if !(opts.tol > 0.0) {
            return Err(QexError::Domain {
                name: "tol",
                value: opts.tol,
                domain: "(0, inf)",
            });
        }
        let method = match opts.method {
            NormMethod::Auto => {
                if self.dim() <= AUTO_DENSE_MAX_N && self.dim() * self.dim() <= opts.dense_cap {
                    NormMethod::Dense
                } else {
                    NormMethod::Lanczos
                }
            }
            m => m,
        };
        match method {
            NormMethod::Dense => self.norm_dense(opts.dense_cap),
            NormMethod::Power => self.norm_power(opts),
            NormMethod::Lanczos => self.norm_lanczos(opts),
            NormMethod::Auto => unreachable!(),
        }
    }

    fn norm_dense(&self, cap: usize) -> Result<GapReport> {
        let m = self.materialize_with_cap(cap)?;
        let dec = m
            .as_faer()
            .svd()
            .map_err(|e| QexError::Decomposition(format!("dense svd did not converge: {e:?}")))?;
        let n = self.dim();
        let top = ComplexMatrix::from_fn(n, |i, k| dec.V()[(i * n + k, 0)]);
        let value = dec.S()[0].re;
        let residual = self.witness_residual(&top, value);
        Ok(GapReport {
            value,
            method: "dense".into(),
            iterations: 1,
            residual,
            top_vector: Some(top),
        })
    }

    /// `‖T*Tξ − σ²ξ‖` for unit `ξ`.
    fn witness_residual(&self, xi: &ComplexMatrix, sigma: f64) -> f64 {
        let g = self.apply_unchecked(&self.apply_unchecked(xi, false), true);
        (&g - &xi.scale_real(sigma * sigma)).frobenius_norm()
    }

    /// Random unit start vector in the domain (H₀ when restricted), made
    /// orthogonal to `avoid` if given. `None` when the domain is `{0}`.
    fn start_vector(&self, spec: RngSpec, avoid: Option<&ComplexMatrix>) -> Option<ComplexMatrix> {
        let mut rng = spec.rng();
        let mut v = gaussian_matrix(self.dim(), &mut rng);
        if self.restrict_h0 {
            project_h0(&mut v);
        }
        if let Some(a) = avoid {
            let c = v.inner(a);
            v.axpy(-c, a);
        }
        let nv = v.frobenius_norm();
        if nv <= 1e-300 {
            return None;
        }
        Some(v.scale_real(1.0 / nv))
    }

    fn zero_report(&self, method: &str) -> GapReport {
        GapReport {
            value: 0.0,
            method: method.into(),
            iterations: 0,
            residual: 0.0,
            top_vector: Some(ComplexMatrix::zeros(self.dim())),
        }
    }

    fn norm_power(&self, opts: &NormOptions) -> Result<GapReport> {
        let Some(start) = self.start_vector(opts.rng.child(0), None) else {
            return Ok(self.zero_report("power"));
        };
        let first = self.power_run(start, opts);
        let second = match &first.top_vector {
            Some(top) if first.value > 0.0 => self
                .start_vector(opts.rng.child(1), Some(top))
                .map(|s| self.power_run(s, opts)),
            _ => None,
        };
        let mut best = match second {
            Some(s) if s.value > first.value => GapReport {
                iterations: first.iterations + s.iterations,
                method: if first.converged() {
                    s.method.clone()
                } else {
                    "power-unconverged".into()
                },
                ..s
            },
            Some(s) => GapReport {
                iterations: first.iterations + s.iterations,
                ..first
            },
            None => first,
        };
        if best.value == 0.0 {
            best.residual = 0.0;
        }
        Ok(best)
    }

    fn power_run(&self, mut xi: ComplexMatrix, opts: &NormOptions) -> GapReport {
        let mut sigma_prev = f64::NEG_INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        let mut sigma = 0.0;
        let mut gram = ComplexMatrix::zeros(self.dim());
        while iterations < opts.max_iter {
            iterations += 1;
            let t = self.apply_unchecked(&xi, false);
            sigma = t.frobenius_norm();
            gram = self.apply_unchecked(&t, true);
            if (sigma - sigma_prev).abs() < opts.tol {
                converged = true;
                break;
            }
            sigma_prev = sigma;
            let g = gram.frobenius_norm();
            if g <= 1e-300 {
                converged = true;
                break;
            }
            xi = gram.scale_real(1.0 / g);
        }
        let residual = (&gram - &xi.scale_real(sigma * sigma)).frobenius_norm();
        GapReport {
            value: sigma,
            method: if converged {
                "power"
            } else {
                "power-unconverged"
            }
            .into(),
            iterations,
            residual,
            top_vector: Some(xi),
        }
    }

    fn norm_lanczos(&self, opts: &NormOptions) -> Result<GapReport> {
        let Some(start) = self.start_vector(opts.rng.child(0), None) else {
            return Ok(self.zero_report("lanczos"));
        };
        let domain_dim = if self.restrict_h0 {
            self.dim() * self.dim() - 1
        } else {
            self.dim() * self.dim()
        };
        let krylov = domain_dim.clamp(1, 64);
        let mut q0 = start;
        let mut applies = 0;
        loop {
            let (theta, ritz, resid, exhausted, steps) = self.lanczos_cycle(&q0, krylov);
            applies += steps;
            let converged =
                exhausted || resid <= opts.tol * theta.max(f64::MIN_POSITIVE) || theta == 0.0;
            if converged || applies >= opts.max_iter {
                let sigma = self.apply_unchecked(&ritz, false).frobenius_norm();
                let residual = self.witness_residual(&ritz, sigma);
                return Ok(GapReport {
                    value: sigma,
                    method: if converged {
                        "lanczos"
                    } else {
                        "lanczos-unconverged"
                    }
                    .into(),
                    iterations: applies,
                    residual,
                    top_vector: Some(ritz),
                });
            }
            q0 = ritz;
        }
    }

    /// One Lanczos cycle on `T*T` from the unit vector `q0`. Returns the top
    /// Ritz value, its unit Ritz vector, the Ritz residual estimate, whether
    /// an invariant subspace was reached, and the number of applications.
    fn lanczos_cycle(
        &self,
        q0: &ComplexMatrix,
        m: usize,
    ) -> (f64, ComplexMatrix, f64, bool, usize) {
        let mut basis: Vec<ComplexMatrix> = vec![q0.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut exhausted = false;
        let mut steps = 0;
        for k in 0..m {
            let mut w = self.apply_unchecked(&self.apply_unchecked(&basis[k], false), true);
            steps += 1;
            let a = w.inner(&basis[k]).re;
            alpha.push(a);
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                for q in &basis {
                    let c = w.inner(q);
                    w.axpy(-c, q);
                }
            }
            let b = w.frobenius_norm();
            let scale = alpha
                .iter()
                .fold(0.0f64, |s, &x| s.max(x.abs()))
                .max(1e-300);
            if b <= 1e-13 * scale || k + 1 == m {
                beta.push(b);
                if b <= 1e-13 * scale {
                    exhausted = true;
                }
                break;
            }
            beta.push(b);
            basis.push(w.scale_real(1.0 / b));
        }
        let k = alpha.len();
        let tri = Mat::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let (theta, s) = match tri.self_adjoint_eigen(Side::Lower) {
            Ok(evd) => {
                let top = k - 1;
                let theta = evd.S()[top];
                let s: Vec<f64> = (0..k).map(|i| evd.U()[(i, top)]).collect();
                (theta, s)
            }
            Err(_) => {
                // Fall back to the first basis vector; the caller restarts.
                let mut s = vec![0.0; k];
                s[0] = 1.0;
                (alpha[0], s)
            }
        };
        let mut ritz = ComplexMatrix::zeros(self.dim());
        for (q, &c) in basis.iter().zip(&s) {
            ritz.axpy(c64::new(c, 0.0), q);
        }
        let nr = ritz.frobenius_norm();
        if nr > 0.0 {
            ritz = ritz.scale_real(1.0 / nr);
        }
        let resid = beta[k - 1] * s[k - 1].abs();
        (
            theta.max(0.0),
            ritz,
            if exhausted { 0.0 } else { resid },
            exhausted,
            steps,
        )
    }
}

/// In-place `M ← Q M Q` with `Q = I − P_vec`, `P_vec = vec(I)vec(I)*/N`.
fn compress_h0(m: &mut ComplexMatrix, n: usize) {
    let d = n * n;
    let diag: Vec<usize> = (0..n).map(|i| i * n + i).collect();
    let inv = 1.0 / n as f64;
    // Q M: subtract from each diagonal-index row the mean over diagonal rows.
    for c in 0..d {
        let mean: c64 = diag.iter().map(|&r| m[(r, c)]).sum::<c64>() * inv;
        for &r in &diag {
            m[(r, c)] -= mean;
        }
    }
    // (Q M) Q: same on columns.
    for r in 0..d {
        let mean: c64 = diag.iter().map(|&c| m[(r, c)]).sum::<c64>() * inv;
        for &c in &diag {
            m[(r, c)] -= mean;
        }
    }
}

/// `P_vec` as a dense `N² × N²` matrix.
pub fn identity_projection(n: usize) -> ComplexMatrix {
    let d = n * n;
    let inv = c64::new(1.0 / n as f64, 0.0);
    ComplexMatrix::from_fn(d, |r, c| {
        if r % (n + 1) == 0 && c % (n + 1) == 0 {
            inv
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// `‖T_u: H₀ → H₀‖` with default options.
pub fn spectral_gap(u: &MatrixTuple) -> Result<GapReport> {
    spectral_gap_with(u, &NormOptions::default())
}

pub fn spectral_gap_with(u: &MatrixTuple, opts: &NormOptions) -> Result<GapReport> {
    u.require_unitary("spectral_gap")?;
    SuperOperator::from_tuple(u, true).operator_norm(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_matrices, sample_ginibre, sample_haar_unitary};

    fn pauli() -> MatrixTuple {
        MatrixTuple::unitary(pauli_matrices().to_vec()).unwrap()
    }

    fn random_tuple(n: usize, dim: usize, seed: u64) -> MatrixTuple {
        MatrixTuple::new(
            (0..n)
                .map(|j| sample_ginibre(dim, &RngSpec::new(seed, j as u64)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn apply_identity_pair_doubles() {
        let u = MatrixTuple::unitary(vec![ComplexMatrix::identity(3), ComplexMatrix::identity(3)])
            .unwrap();
        let t = SuperOperator::from_tuple(&u, false);
        let xi = sample_ginibre(3, &RngSpec::new(1, 0));
        assert!(t.apply(&xi).unwrap().max_abs_diff(&xi.scale_real(2.0)) < 1e-14);
    }

    #[test]
    fn pauli_twirl() {
        let t = SuperOperator::from_tuple(&pauli(), false);
        let xi = sample_ginibre(2, &RngSpec::new(2, 0));
        let expect = ComplexMatrix::scalar(2, normalized_trace(&xi) * 4.0);
        assert!(t.apply(&xi).unwrap().max_abs_diff(&expect) < 1e-14);
        let restricted = SuperOperator::from_tuple(&pauli(), true)
            .materialize()
            .unwrap();
        assert!(restricted.frobenius_norm() < 1e-12);
    }

    #[test]
    fn apply_matches_kronecker_oracle() {
        let x = random_tuple(3, 4, 10);
        let y = random_tuple(3, 4, 20);
        let xi = sample_ginibre(4, &RngSpec::new(30, 0));
        let vec_xi: Vec<c64> = xi.row_major();
        for restrict in [false, true] {
            let t = SuperOperator::new(x.clone(), y.clone(), restrict).unwrap();
            // Independent oracle: explicit Kronecker sum and projector.
            let mut k = ComplexMatrix::zeros(16);
            for (a, b) in x.iter().zip(y.iter()) {
                k = &k + &a.kron(&b.conj());
            }
            if restrict {
                let q = &ComplexMatrix::identity(16) - &identity_projection(4);
                k = q.matmul(&k).matmul(&q);
            }
            let out = t.apply(&xi).unwrap().row_major();
            for r in 0..16 {
                let expect: c64 = (0..16).map(|c| k[(r, c)] * vec_xi[c]).sum();
                assert!((expect - out[r]).norm() < 1e-12);
            }
            assert!(t.materialize().unwrap().max_abs_diff(&k) < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_adjoint() {
        let t = SuperOperator::new(random_tuple(2, 3, 1), random_tuple(2, 3, 2), true).unwrap();
        let a = sample_ginibre(3, &RngSpec::new(5, 0));
        let b = sample_ginibre(3, &RngSpec::new(6, 0));
        let lhs = t.apply(&a).unwrap().inner(&b);
        let rhs = a.inner(&t.apply_adjoint(&b).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn identity_materializes_to_identity() {
        let u = MatrixTuple::unitary(vec![ComplexMatrix::identity(2)]).unwrap();
        let m = SuperOperator::from_tuple(&u, false).materialize().unwrap();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let u = MatrixTuple::unitary(vec![ComplexMatrix::identity(9)]).unwrap();
        let err = SuperOperator::from_tuple(&u, false).materialize_with_cap(64);
        assert!(matches!(
            err,
            Err(QexError::DenseCapExceeded { dim: 81, cap: 64 })
        ));
    }

    #[test]
    fn exact_gaps() {
        let [i, _, _, z] = pauli_matrices();
        let iz = MatrixTuple::unitary(vec![i.clone(), z]).unwrap();
        for method in [NormMethod::Dense, NormMethod::Power, NormMethod::Lanczos] {
            let opts = NormOptions::with_method(method);
            let g = spectral_gap_with(&iz, &opts).unwrap();
            assert!((g.value - 2.0).abs() < 1e-8, "{method:?} {}", g.value);
            let g = spectral_gap_with(&pauli(), &opts).unwrap();
            assert!(g.value.abs() < 1e-8, "{method:?} {}", g.value);
            let ones = MatrixTuple::unitary(vec![ComplexMatrix::identity(3); 3]).unwrap();
            let g = spectral_gap_with(&ones, &opts).unwrap();
            assert!((g.value - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_h0_has_zero_norm() {
        let u = MatrixTuple::unitary(vec![ComplexMatrix::identity(1); 2]).unwrap();
        for method in [NormMethod::Dense, NormMethod::Power, NormMethod::Lanczos] {
            let g = spectral_gap_with(&u, &NormOptions::with_method(method)).unwrap();
            assert_eq!(g.value, 0.0);
        }
    }

    #[test]
    fn methods_agree_on_haar() {
        let u = MatrixTuple::unitary(
            (0..3)
                .map(|j| sample_haar_unitary(6, &RngSpec::new(77, j)))
                .collect(),
        )
        .unwrap();
        let d = spectral_gap_with(&u, &NormOptions::with_method(NormMethod::Dense)).unwrap();
        let p =
            spectral_gap_with(&u, &NormOptions::with_method(NormMethod::Power).tol(1e-12)).unwrap();
        let l = spectral_gap_with(&u, &NormOptions::with_method(NormMethod::Lanczos)).unwrap();
        assert!((d.value - p.value).abs() < 1e-6, "{} {}", d.value, p.value);
        assert!((d.value - l.value).abs() < 1e-8, "{} {}", d.value, l.value);
        for r in [&d, &p, &l] {
            let w = r.top_vector.as_ref().unwrap();
            let t = SuperOperator::from_tuple(&u, true);
            assert!(t.apply(w).unwrap().frobenius_norm() >= r.value - r.residual - 1e-12);
        }
    }

    #[test]
    fn report_serializes_without_witness() {
        let g = spectral_gap(&pauli()).unwrap();
        let json = serde_json::to_value(&g).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 4);
        assert!(json.get("value").is_some() && json.get("method").is_some());
    }
}
