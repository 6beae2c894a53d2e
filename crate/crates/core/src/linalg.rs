//! Dense complex linear algebra: the matrix and tuple carriers, traces and
//! norms, SVD-based decompositions, and Gaussian / Haar sampling.
//!
//! Matrices are stored column-major in a contiguous buffer so that they can
//! be viewed as `faer` matrices without copying. Decompositions and products
//! are delegated to `faer` with sequential parallelism, which keeps every
//! result a deterministic function of its inputs.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QexError, Result};

pub use faer::c64;

/// Default absolute tolerance on unitarity residuals `‖m*m − I‖_F`.
pub const UNITARY_TOL: f64 = 1e-10;

/// A dense `N × N` complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<c64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim.min(8) {
            let row: Vec<String> = (0..self.dim.min(8))
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![c64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c64::new(1.0, 0.0);
        }
        m
    }

    pub fn scalar(dim: usize, value: c64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = value;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> c64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn diag(values: &[c64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<c64> = values.iter().map(|&x| c64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(dim: usize, entries: &[c64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(QexError::ShapeMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = Self::from_fn(dim, |i, j| entries[i * dim + j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_faer(m: MatRef<'_, c64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "ComplexMatrix must be square");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn check_finite(&self) -> Result<()> {
        for j in 0..self.dim {
            for i in 0..self.dim {
                let z = self[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(QexError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Column-major entry buffer.
    #[inline]
    pub fn as_slice(&self) -> &[c64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [c64] {
        &mut self.data
    }

    pub fn row_major(&self) -> Vec<c64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn as_faer(&self) -> MatRef<'_, c64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.dim)
    }

    #[inline]
    pub fn as_faer_mut(&mut self) -> MatMut<'_, c64> {
        MatMut::from_column_major_slice_mut(&mut self.data, self.dim, self.dim)
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            self.as_faer(),
            rhs.as_faer(),
            c64::new(1.0, 0.0),
            Par::Seq,
        );
        out
    }

    /// `self · rhs*`.
    pub fn matmul_adjoint(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            self.as_faer(),
            rhs.as_faer().adjoint(),
            c64::new(1.0, 0.0),
            Par::Seq,
        );
        out
    }

    /// `self* · rhs`.
    pub fn adjoint_matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            self.as_faer().adjoint(),
            rhs.as_faer(),
            c64::new(1.0, 0.0),
            Par::Seq,
        );
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> ComplexMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: c64) -> ComplexMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> ComplexMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: c64, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert–Schmidt inner product `tr(other* · self) = Σ self_ij · conj(other_ij)`.
    pub fn inner(&self, other: &ComplexMatrix) -> c64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b.conj())
            .sum()
    }

    /// Kronecker product with row-major index convention
    /// `(A ⊗ B)[(i,k),(a,b)] = A[i,a] · B[k,b]`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.dim, other.dim);
        ComplexMatrix::from_fn(n * m, |r, c| self[(r / m, c / m)] * other[(r % m, c % m)])
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.dim, other.dim);
        ComplexMatrix::from_fn(n + m, |i, j| {
            if i < n && j < n {
                self[(i, j)]
            } else if i >= n && j >= n {
                other[(i - n, j - n)]
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// Embeds `self` in the top-left corner of a zero `dim × dim` matrix.
    pub fn zero_pad(&self, dim: usize) -> ComplexMatrix {
        assert!(dim >= self.dim);
        ComplexMatrix::from_fn(dim, |i, j| {
            if i < self.dim && j < self.dim {
                self[(i, j)]
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// `‖m*m − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.adjoint_matmul(self);
        let mut acc = 0.0;
        for j in 0..self.dim {
            for i in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (g[(i, j)] - c64::new(target, 0.0)).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &c64 {
        &self.data[j * self.dim + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut c64 {
        &mut self.data[j * self.dim + i]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// The canonical Pauli matrices `(I, X, Y, Z)`.
pub fn pauli_matrices() -> [ComplexMatrix; 4] {
    let o = c64::new(0.0, 0.0);
    let one = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_fn(2, |r, c| if r != c { one } else { o }),
        ComplexMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => o,
        }),
        ComplexMatrix::real_diag(&[1.0, -1.0]),
    ]
}

/// An ordered `n`-tuple of `N × N` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    dim: usize,
    matrices: Vec<ComplexMatrix>,
    unitary: bool,
}

impl MatrixTuple {
    /// General (not necessarily unitary) tuple.
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| QexError::InvalidArgument("a tuple needs at least one matrix".into()))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(QexError::InvalidArgument(
                "matrix dimension must be positive".into(),
            ));
        }
        for m in &matrices {
            if m.dim() != dim {
                return Err(QexError::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            matrices,
            unitary: false,
        })
    }

    /// Tuple of unitaries; every member is checked against `n·N·UNITARY_TOL`.
    pub fn unitary(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let mut t = Self::new(matrices)?;
        t.check_unitary(t.default_unitary_tol())?;
        t.unitary = true;
        Ok(t)
    }

    /// Marks the tuple unitary without re-checking. For members produced by
    /// constructions that are unitary by construction.
    pub(crate) fn assume_unitary(mut self) -> Self {
        self.unitary = true;
        self
    }

    pub fn default_unitary_tol(&self) -> f64 {
        self.n() as f64 * self.dim as f64 * UNITARY_TOL
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        for (index, m) in self.matrices.iter().enumerate() {
            let residual = m.unitarity_residual();
            if !(residual <= tol) {
                return Err(QexError::NotUnitary {
                    index,
                    residual,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.matrices
            .iter()
            .map(ComplexMatrix::unitarity_residual)
            .fold(0.0, f64::max)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    #[inline]
    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<ComplexMatrix> {
        self.matrices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexMatrix> {
        self.matrices.iter()
    }

    pub fn require_unitary(&self, what: &str) -> Result<()> {
        if self.unitary {
            Ok(())
        } else {
            Err(QexError::InvalidArgument(format!(
                "{what} requires a unitary tuple"
            )))
        }
    }

    pub fn require_same_shape(&self, other: &MatrixTuple) -> Result<()> {
        if self.n() != other.n() || self.dim != other.dim {
            return Err(QexError::ShapeMismatch(format!(
                "tuples have shapes (n={}, N={}) and (n={}, N={})",
                self.n(),
                self.dim,
                other.n(),
                other.dim
            )));
        }
        Ok(())
    }

    /// The tuple `(a · x_j · b)_j`. Unitarity is preserved when `a`, `b`
    /// are unitary; the flag is kept only if the caller says so.
    pub fn two_sided(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> MatrixTuple {
        let matrices = self
            .matrices
            .iter()
            .map(|x| a.matmul(x).matmul(b))
            .collect();
        MatrixTuple {
            dim: self.dim,
            matrices,
            unitary: false,
        }
    }

    /// Same as [`two_sided`](Self::two_sided) for unitary `a`, `b`.
    pub fn unitary_two_sided(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> MatrixTuple {
        let mut t = self.two_sided(a, b);
        t.unitary = self.unitary;
        t
    }

    /// The recombination `(w.v)_i = Σ_j w_ij v_j` for an `n × n` matrix `w`.
    pub fn recombine(&self, w: &ComplexMatrix) -> Result<MatrixTuple> {
        if w.dim() != self.n() {
            return Err(QexError::DimensionMismatch {
                expected: self.n(),
                found: w.dim(),
            });
        }
        let matrices = (0..self.n())
            .map(|i| {
                let mut acc = ComplexMatrix::zeros(self.dim);
                for (j, v) in self.matrices.iter().enumerate() {
                    acc.axpy(w[(i, j)], v);
                }
                acc
            })
            .collect();
        Ok(MatrixTuple {
            dim: self.dim,
            matrices,
            unitary: false,
        })
    }

    /// `(c_j x_j)_j`.
    pub fn weighted(&self, coeffs: &[c64]) -> Result<MatrixTuple> {
        if coeffs.len() != self.n() {
            return Err(QexError::DimensionMismatch {
                expected: self.n(),
                found: coeffs.len(),
            });
        }
        let matrices = self
            .matrices
            .iter()
            .zip(coeffs)
            .map(|(m, &c)| m.scale(c))
            .collect();
        Ok(MatrixTuple {
            dim: self.dim,
            matrices,
            unitary: false,
        })
    }

    pub fn scale(&self, c: c64) -> MatrixTuple {
        let matrices = self.matrices.iter().map(|m| m.scale(c)).collect();
        let unitary = self.unitary && (c.norm() - 1.0).abs() < 1e-14;
        MatrixTuple {
            dim: self.dim,
            matrices,
            unitary,
        }
    }

    /// Zero-pads every member to `dim × dim`.
    pub fn zero_pad(&self, dim: usize) -> Result<MatrixTuple> {
        if dim < self.dim {
            return Err(QexError::InvalidArgument(format!(
                "cannot pad dimension {} down to {dim}",
                self.dim
            )));
        }
        let unitary = self.unitary && dim == self.dim;
        Ok(MatrixTuple {
            dim,
            matrices: self.matrices.iter().map(|m| m.zero_pad(dim)).collect(),
            unitary,
        })
    }

    /// Member-wise direct sum `(x_j ⊕ y_j)_j`.
    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        if self.n() != other.n() {
            return Err(QexError::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(MatrixTuple {
            dim: self.dim + other.dim,
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a.direct_sum(b))
                .collect(),
            unitary: self.unitary && other.unitary,
        })
    }

    /// `Σ_j τ_N(|x_j|²)`, the squared length in the normalized tuple metric.
    pub fn normalized_mass(&self) -> f64 {
        self.matrices.iter().map(|m| hs_norm(m, true).powi(2)).sum()
    }
}

impl std::ops::Index<usize> for MatrixTuple {
    type Output = ComplexMatrix;
    fn index(&self, j: usize) -> &ComplexMatrix {
        &self.matrices[j]
    }
}

/// Seed plus stream index for a reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSpec {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derived spec for sub-task `index`; distinct indices give independent
    /// streams and the derivation does not depend on execution order.
    pub fn child(&self, index: u64) -> RngSpec {
        RngSpec {
            seed: splitmix64(
                self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_F42D_4C95_7F2D)),
            ),
            stream_id: index,
        }
    }
}

impl Default for RngSpec {
    fn default() -> Self {
        Self::new(0, 0)
    }
}

/// `τ_N(m) = N⁻¹ tr(m)`.
pub fn normalized_trace(m: &ComplexMatrix) -> c64 {
    m.trace() / m.dim() as f64
}

/// Hilbert–Schmidt norm; with `normalized` the trace is `τ_N`, so `‖I‖ = 1`.
pub fn hs_norm(m: &ComplexMatrix, normalized: bool) -> f64 {
    let f = m.frobenius_norm();
    if normalized {
        f / (m.dim() as f64).sqrt()
    } else {
        f
    }
}

/// `m = u · diag(s) · v*` with `s` non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.u.dim();
        let us = ComplexMatrix::from_fn(n, |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul_adjoint(&self.v)
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let dec = m
        .as_faer()
        .svd()
        .map_err(|e| QexError::Decomposition(format!("svd did not converge: {e:?}")))?;
    let s: Vec<f64> = (0..m.dim()).map(|i| dec.S()[i].re).collect();
    Ok(Svd {
        u: ComplexMatrix::from_faer(dec.U()),
        s,
        v: ComplexMatrix::from_faer(dec.V()),
    })
}

pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.as_faer()
        .singular_values()
        .map_err(|e| QexError::Decomposition(format!("svd did not converge: {e:?}")))
}

/// Unitary polar factor `U = A·B*` of `m = A·diag(s)·B*`.
///
/// `U` maximizes `Re tr(W* m)` over unitary `W`, with maximum `tr|m|`. For
/// singular `m` the factor is not unique; the one completed from the SVD
/// bases is returned, which is still a maximizer.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = svd(m)?;
    Ok(d.u.matmul_adjoint(&d.v))
}

/// Polar decomposition `m = U·|m|`, returning `(U, |m|)`.
pub fn polar(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let d = svd(m)?;
    let n = m.dim();
    let vs = ComplexMatrix::from_fn(n, |i, j| d.v[(i, j)] * d.s[j]);
    let modulus = vs.matmul_adjoint(&d.v);
    Ok((d.u.matmul_adjoint(&d.v), modulus))
}

/// `tr|m|`, the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = svd(m)?;
    let smin = d.s.last().copied().unwrap_or(0.0);
    if !(smin > d.s[0] * 1e-14) {
        return Err(QexError::InvalidArgument(
            "matrix is numerically singular".into(),
        ));
    }
    let n = m.dim();
    let vs = ComplexMatrix::from_fn(n, |i, j| d.v[(i, j)] / d.s[j]);
    Ok(vs.matmul_adjoint(&d.u))
}

/// Ginibre matrix from an existing generator: i.i.d. entries
/// `(g + i g')/√(2N)` with `g, g'` standard normal.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let scale = (2.0 * dim as f64).sqrt().recip();
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(c64::new(re * scale, im * scale));
    }
    ComplexMatrix { dim, data }
}

/// Haar unitary as the polar factor of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let y = ginibre(dim, rng);
        // Singular Ginibre draws have probability zero; resample on the
        // off chance the SVD fails.
        if let Ok(u) = polar_unitary(&y) {
            return u;
        }
    }
}

pub fn sample_ginibre(dim: usize, spec: &RngSpec) -> ComplexMatrix {
    ginibre(dim, &mut spec.rng())
}

pub fn sample_haar_unitary(dim: usize, spec: &RngSpec) -> ComplexMatrix {
    haar_unitary(dim, &mut spec.rng())
}

/// Matrix with i.i.d. standard complex Gaussian entries (unit variance),
/// used for start vectors and generic test inputs.
pub fn gaussian_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ginibre(dim, rng);
    let s = (dim as f64).sqrt();
    for z in m.as_mut_slice() {
        *z *= s;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalized_trace_examples() {
        for n in 1..6 {
            let t = normalized_trace(&ComplexMatrix::identity(n));
            assert!(close(t.re, 1.0, 1e-15) && t.im == 0.0);
        }
        let [_, _, _, z] = pauli_matrices();
        assert_eq!(normalized_trace(&z), c64::new(0.0, 0.0));

        let m = sample_ginibre(3, &RngSpec::new(7, 0));
        let mut sum = c64::new(0.0, 0.0);
        for (k, entry) in m.row_major().into_iter().enumerate() {
            if k % 4 == 0 {
                sum += entry;
            }
        }
        assert!((normalized_trace(&m) - sum / 3.0).norm() < 1e-14);
    }

    #[test]
    fn hs_norm_examples() {
        assert!(close(
            hs_norm(&ComplexMatrix::identity(5), true),
            1.0,
            1e-15
        ));
        assert!(close(
            hs_norm(&ComplexMatrix::identity(4), false),
            2.0,
            1e-15
        ));
        let mut e12 = ComplexMatrix::zeros(2);
        e12[(0, 1)] = c64::new(1.0, 0.0);
        assert!(close(hs_norm(&e12, true), 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn svd_examples() {
        let d = svd(&ComplexMatrix::identity(4)).unwrap();
        assert!(d.s.iter().all(|&s| close(s, 1.0, 1e-14)));

        let d = svd(&ComplexMatrix::real_diag(&[3.0, -4.0])).unwrap();
        assert!(close(d.s[0], 4.0, 1e-14) && close(d.s[1], 3.0, 1e-14));

        let m = sample_ginibre(5, &RngSpec::new(11, 3));
        let d = svd(&m).unwrap();
        let err = (&d.reconstruct() - &m).frobenius_norm();
        assert!(err <= 1e-10 * m.frobenius_norm());
        assert!(d.u.unitarity_residual() < 1e-10);
        assert!(d.v.unitarity_residual() < 1e-10);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn polar_examples() {
        let u = sample_haar_unitary(4, &RngSpec::new(1, 1));
        assert!(polar_unitary(&u).unwrap().max_abs_diff(&u) < 1e-10);
        let two = ComplexMatrix::scalar(3, c64::new(2.0, 0.0));
        assert!(
            polar_unitary(&two)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(3))
                < 1e-12
        );

        let m = sample_ginibre(4, &RngSpec::new(2, 0));
        let p = polar_unitary(&m).unwrap();
        let best = p.adjoint_matmul(&m).trace().re;
        assert!(close(best, trace_norm(&m).unwrap(), 1e-10));
        let mut rng = RngSpec::new(3, 0).rng();
        for _ in 0..1000 {
            let w = haar_unitary(4, &mut rng);
            assert!(w.adjoint_matmul(&m).trace().re <= best + 1e-12);
        }
    }

    #[test]
    fn polar_of_singular_input_is_unitary_maximizer() {
        let m = ComplexMatrix::real_diag(&[2.0, 0.0, 0.0]);
        let p = polar_unitary(&m).unwrap();
        assert!(p.unitarity_residual() < 1e-10);
        assert!(close(p.adjoint_matmul(&m).trace().re, 2.0, 1e-12));
        let (u, modulus) = polar(&m).unwrap();
        assert!((&u.matmul(&modulus) - &m).frobenius_norm() < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        assert!(close(
            trace_norm(&ComplexMatrix::identity(3)).unwrap(),
            3.0,
            1e-13
        ));
        let w = ComplexMatrix::real_diag(&[2.0, 0.5]);
        let p = trace_norm(&w).unwrap() * trace_norm(&inverse(&w).unwrap()).unwrap();
        assert!(close(p, 6.25, 1e-12));
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = RngSpec::new(42, 5);
        assert_eq!(sample_ginibre(6, &spec), sample_ginibre(6, &spec));
        assert_eq!(sample_haar_unitary(6, &spec), sample_haar_unitary(6, &spec));
        assert_ne!(
            sample_ginibre(6, &spec),
            sample_ginibre(6, &RngSpec::new(42, 6))
        );
        assert_ne!(spec.child(0), spec.child(1));
    }

    #[test]
    fn haar_output_is_unitary() {
        let mut rng = RngSpec::new(9, 0).rng();
        for n in [1, 2, 5, 17] {
            assert!(haar_unitary(n, &mut rng).unitarity_residual() < 1e-10);
        }
    }

    #[test]
    fn tuple_rejects_mixed_dims_and_non_unitary() {
        let err = MatrixTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]);
        assert!(matches!(err, Err(QexError::DimensionMismatch { .. })));
        let bad = MatrixTuple::unitary(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::real_diag(&[1.0, 2.0]),
        ]);
        assert!(matches!(bad, Err(QexError::NotUnitary { index: 1, .. })));
    }

    #[test]
    fn from_row_major_rejects_nan() {
        let mut e = vec![c64::new(0.0, 0.0); 4];
        e[3] = c64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::from_row_major(2, &e),
            Err(QexError::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn kron_matches_index_convention() {
        let a = sample_ginibre(2, &RngSpec::new(1, 0));
        let b = sample_ginibre(3, &RngSpec::new(2, 0));
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert_eq!(k[(1 * 3 + 2, 0 * 3 + 1)], a[(1, 0)] * b[(2, 1)]);
    }
}
