//! Monte Carlo experiments on sums of random unitaries and Ginibre
//! matrices: the comparison of `Σ a_j U_j ⊗ Ū_j (I−P)` with the decoupled
//! Gaussian sum `Σ a_j Y_j ⊗ Ȳ′_j`, the constants `χ_N` and `b_N`, and the
//! twirl identity `E(Y ⊗ Ȳ) = P`.
//!
//! Sample `s` draws all of its randomness from `rng.child(s)`, so results do
//! not depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QexError, Result};
use crate::expanders::haar_tuple;
use crate::linalg::{c64, ginibre, operator_norm, svd, ComplexMatrix, MatrixTuple, RngSpec};
use crate::superop::{identity_projection, NormOptions, SuperOperator};

/// `8/(3π)`: first absolute moment of the quarter-circle law on `[0, 2]`,
/// the large-`N` limit of `b_N`.
pub const B_LIMIT: f64 = 8.0 / (3.0 * std::f64::consts::PI);

/// `(8/(3π))²`, the large-`N` limit of `χ_N`.
pub const CHI_LIMIT: f64 = B_LIMIT * B_LIMIT;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Mean, unbiased standard deviation and a 95% percentile-bootstrap
/// interval for the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl SampleStats {
    pub fn std_err(&self, samples: usize) -> f64 {
        self.std / (samples as f64).sqrt()
    }
}

pub fn summarize(values: &[f64], rng: &RngSpec) -> SampleStats {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    let std = if m > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (ci_lo, ci_hi) = bootstrap_mean_ci(values, BOOTSTRAP_RESAMPLES, rng);
    SampleStats {
        mean,
        std,
        ci_lo,
        ci_hi,
    }
}

/// 2.5% and 97.5% percentiles of resampled means.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, rng: &RngSpec) -> (f64, f64) {
    let m = values.len();
    if m == 0 || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut r = rng.rng();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..m).map(|_| values[r.random_range(0..m)]).sum::<f64>() / m as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let pick = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (pick(0.025), pick(0.975))
}

fn bootstrap_stream(rng: &RngSpec) -> RngSpec {
    rng.child(u64::MAX)
}

fn per_sample<F>(samples: usize, rng: &RngSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(&RngSpec) -> Result<f64> + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|s| f(&rng.child(s as u64)))
        .collect()
}

fn ginibre_tuple(n: usize, dim: usize, rng: &RngSpec) -> MatrixTuple {
    let mut r = rng.rng();
    MatrixTuple::new((0..n).map(|_| ginibre(dim, &mut r)).collect()).expect("nonempty tuple")
}

fn l2(coeffs: &[c64]) -> f64 {
    coeffs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_samples(samples: usize, min: usize) -> Result<()> {
    if samples < min {
        return Err(QexError::InvalidArgument(format!(
            "samples must be at least {min}, got {samples}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    /// `[re, im]` pairs.
    pub coeffs: Vec<[f64; 2]>,
    pub samples: usize,
    pub mean_norm: f64,
    pub std_norm: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `(Σ|a_j|²)^{1/2}`.
    pub coeff_l2: f64,
    /// `mean_norm / coeff_l2`.
    pub ratio: f64,
    /// Mean norm of the comparison sum when one was computed.
    pub comparison: Option<f64>,
    pub seed: RngSpec,
    pub per_sample: Vec<f64>,
}

impl MomentReport {
    fn build(
        n: usize,
        dim: usize,
        coeffs: &[c64],
        scale: f64,
        values: Vec<f64>,
        rng: &RngSpec,
    ) -> Self {
        let stats = summarize(&values, &bootstrap_stream(rng));
        Self {
            n,
            dim,
            coeffs: coeffs.iter().map(|a| [a.re, a.im]).collect(),
            samples: values.len(),
            mean_norm: stats.mean,
            std_norm: stats.std,
            ci_lo: stats.ci_lo,
            ci_hi: stats.ci_hi,
            coeff_l2: scale,
            ratio: stats.mean / scale,
            comparison: None,
            seed: *rng,
            per_sample: values,
        }
    }
}

/// `‖Σ a_j U_j ⊗ Ū_j (I−P)‖` over independent Haar tuples.
pub fn unitary_sum_norm(
    coeffs: &[c64],
    dim: usize,
    samples: usize,
    rng: &RngSpec,
    opts: &NormOptions,
) -> Result<MomentReport> {
    if coeffs.is_empty() {
        return Err(QexError::InvalidArgument(
            "coefficient list is empty".into(),
        ));
    }
    check_samples(samples, 10)?;
    let n = coeffs.len();
    let values = per_sample(samples, rng, |spec| {
        let u = haar_tuple(n, dim, spec)?;
        let op = SuperOperator::new(u.weighted(coeffs)?, u, true)?;
        Ok(op.operator_norm(opts)?.value)
    })?;
    Ok(MomentReport::build(n, dim, coeffs, l2(coeffs), values, rng))
}

/// `‖Σ a_j Y_j ⊗ Ȳ′_j‖` with `Y` and `Y′` drawn from separate streams.
pub fn gaussian_decoupled_norm(
    coeffs: &[c64],
    dim: usize,
    samples: usize,
    rng: &RngSpec,
    opts: &NormOptions,
) -> Result<MomentReport> {
    if coeffs.is_empty() {
        return Err(QexError::InvalidArgument(
            "coefficient list is empty".into(),
        ));
    }
    check_samples(samples, 2)?;
    let n = coeffs.len();
    let values = per_sample(samples, rng, |spec| {
        let y = ginibre_tuple(n, dim, &spec.child(0));
        let y2 = ginibre_tuple(n, dim, &spec.child(1));
        let op = SuperOperator::new(y.weighted(coeffs)?, y2, false)?;
        Ok(op.operator_norm(opts)?.value)
    })?;
    Ok(MomentReport::build(n, dim, coeffs, l2(coeffs), values, rng))
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceRow {
    #[serde(rename = "N")]
    pub dim: usize,
    pub unitary_mean: f64,
    pub gaussian_mean: f64,
    /// `unitary_mean / gaussian_mean`, an empirical lower estimate of the
    /// comparison constant.
    pub ratio: f64,
}

/// Unitary and decoupled Gaussian means on the same grid of sizes; the
/// Gaussian family uses an independent child stream.
pub fn dominance_grid(
    coeffs: &[c64],
    dims: &[usize],
    samples: usize,
    rng: &RngSpec,
    opts: &NormOptions,
) -> Result<Vec<DominanceRow>> {
    dims.iter()
        .enumerate()
        .map(|(i, &dim)| {
            let base = rng.child(i as u64);
            let mut u = unitary_sum_norm(coeffs, dim, samples, &base.child(0), opts)?;
            let g = gaussian_decoupled_norm(coeffs, dim, samples, &base.child(1), opts)?;
            u.comparison = Some(g.mean_norm);
            Ok(DominanceRow {
                dim,
                unitary_mean: u.mean_norm,
                gaussian_mean: g.mean_norm,
                ratio: u.mean_norm / g.mean_norm,
            })
        })
        .collect()
}

/// Diagonal of `|Y| = (Y*Y)^{1/2}` from the SVD `Y = W S V*`.
pub fn abs_diagonal(y: &ComplexMatrix) -> Result<Vec<f64>> {
    let d = svd(y)?;
    let n = y.dim();
    Ok((0..n)
        .map(|i| (0..n).map(|k| d.s[k] * d.v[(i, k)].norm_sqr()).sum())
        .collect())
}

/// `|Y| = V S V*`.
pub fn abs_matrix(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = svd(y)?;
    let s: Vec<c64> = d.s.iter().map(|&x| c64::new(x, 0.0)).collect();
    Ok(d.v.matmul(&ComplexMatrix::diag(&s)).matmul_adjoint(&d.v))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarEstimate {
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples: usize,
    pub estimate: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Large-`N` limit for reference.
    pub limit: f64,
    pub seed: RngSpec,
}

impl ScalarEstimate {
    fn build(dim: usize, values: &[f64], limit: f64, rng: &RngSpec) -> Self {
        let stats = summarize(values, &bootstrap_stream(rng));
        Self {
            dim,
            samples: values.len(),
            estimate: stats.mean,
            std: stats.std,
            ci_lo: stats.ci_lo,
            ci_hi: stats.ci_hi,
            limit,
            seed: *rng,
        }
    }

    pub fn relative_error(&self) -> f64 {
        (self.estimate - self.limit).abs() / self.limit
    }
}

/// `χ_N = E(|Y|_ii |Y|_jj)` for `i ≠ j`, averaging all `N(N−1)` ordered
/// pairs within each sample.
pub fn chi_n_estimate(dim: usize, samples: usize, rng: &RngSpec) -> Result<ScalarEstimate> {
    if dim < 2 {
        return Err(QexError::InvalidArgument("chi_N needs N ≥ 2".into()));
    }
    check_samples(samples, 100)?;
    let values = per_sample(samples, rng, |spec| {
        let d = abs_diagonal(&ginibre(dim, &mut spec.rng()))?;
        let sum: f64 = d.iter().sum();
        let sq: f64 = d.iter().map(|x| x * x).sum();
        Ok((sum * sum - sq) / (dim * (dim - 1)) as f64)
    })?;
    Ok(ScalarEstimate::build(dim, &values, CHI_LIMIT, rng))
}

/// `b_N = E τ_N(|Y|)`, so that `E|Y| = b_N I`.
pub fn b_n_estimate(dim: usize, samples: usize, rng: &RngSpec) -> Result<ScalarEstimate> {
    if dim == 0 {
        return Err(QexError::InvalidArgument("N must be positive".into()));
    }
    check_samples(samples, 2)?;
    let values = per_sample(samples, rng, |spec| {
        let s = crate::linalg::singular_values(&ginibre(dim, &mut spec.rng()))?;
        Ok(s.iter().sum::<f64>() / dim as f64)
    })?;
    Ok(ScalarEstimate::build(dim, &values, B_LIMIT, rng))
}

pub const TWIRL_MAX_N: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct TwirlReport {
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples: usize,
    /// `‖Ê(Y⊗Ȳ) − P_vec‖_F`.
    pub residual: f64,
    /// `‖Ê((Y⊗Ȳ)(I−P))‖_F`.
    pub off_p_residual: f64,
    /// Mean and standard error of `Re tr((Y⊗Ȳ)(I−P))`.
    pub off_p_trace_mean: f64,
    pub off_p_trace_stderr: f64,
    pub seed: RngSpec,
}

impl TwirlReport {
    pub fn off_p_trace_within(&self, sigmas: f64) -> bool {
        self.off_p_trace_mean.abs() <= sigmas * self.off_p_trace_stderr
    }
}

fn mean_matrix<F>(
    d: usize,
    samples: usize,
    rng: &RngSpec,
    f: F,
) -> Result<(ComplexMatrix, Vec<f64>)>
where
    F: Fn(&RngSpec) -> Result<(ComplexMatrix, f64)> + Sync,
{
    // Fixed-size chunks keep the reduction order independent of scheduling.
    const CHUNK: usize = 256;
    let chunks: Vec<(ComplexMatrix, Vec<f64>)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexMatrix::zeros(d);
            let mut side = Vec::new();
            for s in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let (m, x) = f(&rng.child(s as u64))?;
                acc.axpy(c64::new(1.0, 0.0), &m);
                side.push(x);
            }
            Ok((acc, side))
        })
        .collect::<Result<_>>()?;
    let mut total = ComplexMatrix::zeros(d);
    let mut side = Vec::with_capacity(samples);
    for (m, s) in chunks {
        total.axpy(c64::new(1.0, 0.0), &m);
        side.extend(s);
    }
    Ok((total.scale_real(1.0 / samples as f64), side))
}

/// Monte Carlo of `E(Y ⊗ Ȳ)` against the exact `P_vec`.
pub fn twirl_identity_check(dim: usize, samples: usize, rng: &RngSpec) -> Result<TwirlReport> {
    if dim < 2 {
        return Err(QexError::InvalidArgument("twirl check needs N ≥ 2".into()));
    }
    if dim > TWIRL_MAX_N {
        return Err(QexError::DenseCapExceeded {
            dim: dim * dim,
            cap: TWIRL_MAX_N * TWIRL_MAX_N,
        });
    }
    check_samples(samples, 2)?;
    let p = identity_projection(dim);
    let q = &ComplexMatrix::identity(dim * dim) - &p;
    let (est, traces) = mean_matrix(dim * dim, samples, rng, |spec| {
        let y = ginibre(dim, &mut spec.rng());
        let k = y.kron(&y.conj());
        let off = k.matmul(&q).trace().re;
        Ok((k, off))
    })?;
    let stats = summarize(&traces, &bootstrap_stream(rng));
    Ok(TwirlReport {
        dim,
        samples,
        residual: (&est - &p).frobenius_norm(),
        off_p_residual: est.matmul(&q).frobenius_norm(),
        off_p_trace_mean: stats.mean,
        off_p_trace_stderr: stats.std_err(samples),
        seed: *rng,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsTwirlReport {
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples: usize,
    /// Monte Carlo `χ_N` read off as `⟨T̂ e_01, e_01⟩`.
    pub chi_hat: f64,
    /// `‖T̂ − (P + χ̂(I−P))‖_F` for `T̂ = Ê(|Y| ⊗ conj|Y|)`.
    pub residual: f64,
    pub seed: RngSpec,
}

/// Checks that `E(|Y| ⊗ conj|Y|)` has the two-eigenvalue form `P + χ_N(I−P)`.
pub fn abs_twirl_check(dim: usize, samples: usize, rng: &RngSpec) -> Result<AbsTwirlReport> {
    if !(2..=TWIRL_MAX_N).contains(&dim) {
        return Err(QexError::InvalidArgument(format!(
            "N must lie in 2..={TWIRL_MAX_N}"
        )));
    }
    check_samples(samples, 2)?;
    let (t, _) = mean_matrix(dim * dim, samples, rng, |spec| {
        let a = abs_matrix(&ginibre(dim, &mut spec.rng()))?;
        Ok((a.kron(&a.conj()), 0.0))
    })?;
    // e_01 sits at row-major index 1.
    let chi_hat = t[(1, 1)].re;
    let p = identity_projection(dim);
    let model =
        &p.scale_real(1.0 - chi_hat) + &ComplexMatrix::identity(dim * dim).scale_real(chi_hat);
    Ok(AbsTwirlReport {
        dim,
        samples,
        chi_hat,
        residual: (&t - &model).frobenius_norm(),
        seed: *rng,
    })
}

/// Which random family fills the tensor legs of a coefficient sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `U_i ⊗ Ū_j` with one Haar tuple.
    Haar,
    /// `Y_i ⊗ Ȳ_j` with one Ginibre tuple.
    Gaussian,
    /// `Y_i ⊗ Ȳ′_j` with independent Ginibre tuples.
    GaussianDecoupled,
}

/// A term `a ⊗ X_i ⊗ conj(X′_j)` of a coefficient sum.
#[derive(Clone, Debug)]
pub struct CoefficientTerm {
    pub left: usize,
    pub right: usize,
    pub coeff: ComplexMatrix,
}

/// Dense `Σ a ⊗ X_i ⊗ conj(X′_j)`, composed with `I_k ⊗ (I−P)` on the right
/// when `restrict` is set.
pub fn coefficient_operator(
    terms: &[CoefficientTerm],
    left: &MatrixTuple,
    right: &MatrixTuple,
    restrict: bool,
) -> Result<ComplexMatrix> {
    let first = terms
        .first()
        .ok_or_else(|| QexError::InvalidArgument("no coefficient terms".into()))?;
    let k = first.coeff.dim();
    let dim = left.dim();
    let mut total = ComplexMatrix::zeros(k * dim * dim);
    for t in terms {
        if t.coeff.dim() != k {
            return Err(QexError::DimensionMismatch {
                expected: k,
                found: t.coeff.dim(),
            });
        }
        if t.left >= left.n() || t.right >= right.n() {
            return Err(QexError::InvalidArgument(format!(
                "term index ({}, {}) out of range",
                t.left, t.right
            )));
        }
        let leg = left[t.left].kron(&right[t.right].conj());
        total.axpy(c64::new(1.0, 0.0), &t.coeff.kron(&leg));
    }
    if restrict {
        let q = &ComplexMatrix::identity(dim * dim) - &identity_projection(dim);
        total = total.matmul(&ComplexMatrix::identity(k).kron(&q));
    }
    Ok(total)
}

fn sample_family(
    family: Family,
    n: usize,
    dim: usize,
    spec: &RngSpec,
) -> Result<(MatrixTuple, MatrixTuple)> {
    Ok(match family {
        Family::Haar => {
            let u = haar_tuple(n, dim, spec)?;
            (u.clone(), u)
        }
        Family::Gaussian => {
            let y = ginibre_tuple(n, dim, &spec.child(0));
            (y.clone(), y)
        }
        Family::GaussianDecoupled => (
            ginibre_tuple(n, dim, &spec.child(0)),
            ginibre_tuple(n, dim, &spec.child(1)),
        ),
    })
}

/// Per-sample dense norms of a coefficient sum. The Haar family draws the
/// same tuples as [`unitary_sum_norm`] for equal `rng`.
pub fn coefficient_sum_samples(
    terms: &[CoefficientTerm],
    n: usize,
    dim: usize,
    family: Family,
    restrict: bool,
    samples: usize,
    rng: &RngSpec,
    dense_cap: usize,
) -> Result<Vec<f64>> {
    let k = terms.first().map(|t| t.coeff.dim()).unwrap_or(1);
    if k * dim * dim > dense_cap {
        return Err(QexError::DenseCapExceeded {
            dim: k * dim * dim,
            cap: dense_cap,
        });
    }
    per_sample(samples, rng, |spec| {
        let (x, y) = sample_family(family, n, dim, spec)?;
        operator_norm(&coefficient_operator(terms, &x, &y, restrict)?)
    })
}

/// `max(‖Σ a_j* a_j‖^{1/2}, ‖Σ a_j a_j*‖^{1/2})`.
pub fn row_column_norm(coeffs: &[ComplexMatrix]) -> Result<f64> {
    let k = coeffs
        .first()
        .ok_or_else(|| QexError::InvalidArgument("coefficient list is empty".into()))?
        .dim();
    let mut col = ComplexMatrix::zeros(k);
    let mut row = ComplexMatrix::zeros(k);
    for a in coeffs {
        col = &col + &a.adjoint_matmul(a);
        row = &row + &a.matmul_adjoint(a);
    }
    Ok(operator_norm(&col)?.sqrt().max(operator_norm(&row)?.sqrt()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixCoefficientReport {
    pub k: usize,
    pub moments: MomentReport,
    /// `max(‖Σ a_j* a_j‖^{1/2}, ‖Σ a_j a_j*‖^{1/2})`.
    pub rhs: f64,
}

/// `‖Σ a_j ⊗ U_j ⊗ Ū_j (I−P)‖` for `k × k` coefficients, evaluated densely.
pub fn matrix_coefficient_sum(
    coeff_mats: &[ComplexMatrix],
    dim: usize,
    samples: usize,
    rng: &RngSpec,
    dense_cap: usize,
) -> Result<MatrixCoefficientReport> {
    let rhs = row_column_norm(coeff_mats)?;
    check_samples(samples, 2)?;
    let n = coeff_mats.len();
    let terms: Vec<CoefficientTerm> = coeff_mats
        .iter()
        .enumerate()
        .map(|(j, a)| CoefficientTerm {
            left: j,
            right: j,
            coeff: a.clone(),
        })
        .collect();
    let values =
        coefficient_sum_samples(&terms, n, dim, Family::Haar, true, samples, rng, dense_cap)?;
    let scalar: Vec<c64> = if coeff_mats[0].dim() == 1 {
        coeff_mats.iter().map(|a| a[(0, 0)]).collect()
    } else {
        Vec::new()
    };
    let mut moments = MomentReport::build(n, dim, &scalar, rhs, values, rng);
    moments.coeff_l2 = rhs;
    Ok(MatrixCoefficientReport {
        k: coeff_mats[0].dim(),
        moments,
        rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleSumReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples: usize,
    /// `E‖Σ_{i≠j} a_ij ⊗ U_i ⊗ Ū_j‖`.
    pub unitary_mean: f64,
    /// `E‖Σ_{i≠j} a_ij ⊗ Y_i ⊗ Ȳ_j‖`.
    pub gaussian_mean: f64,
    /// `E‖Σ_{i≠j} a_ij ⊗ Y_i ⊗ Ȳ′_j‖`.
    pub decoupled_mean: f64,
    pub b_n: f64,
    /// `b_N⁻² · gaussian_mean`.
    pub bound: f64,
    /// `2 b_N⁻² · decoupled_mean`.
    pub decoupled_bound: f64,
}

/// Double sums over `i ≠ j`; `grid[i][j]` is `a_ij` and the diagonal is
/// ignored. `b_N` is estimated from `b_samples` Ginibre draws.
pub fn double_sum_check(
    grid: &[Vec<ComplexMatrix>],
    dim: usize,
    samples: usize,
    b_samples: usize,
    rng: &RngSpec,
    dense_cap: usize,
) -> Result<DoubleSumReport> {
    let n = grid.len();
    if n < 2 || grid.iter().any(|row| row.len() != n) {
        return Err(QexError::ShapeMismatch(
            "coefficient grid must be n × n with n ≥ 2".into(),
        ));
    }
    check_samples(samples, 2)?;
    let terms: Vec<CoefficientTerm> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| CoefficientTerm {
            left: i,
            right: j,
            coeff: grid[i][j].clone(),
        })
        .collect();
    let mean = |family: Family, stream: u64| -> Result<f64> {
        let v = coefficient_sum_samples(
            &terms,
            n,
            dim,
            family,
            false,
            samples,
            &rng.child(stream),
            dense_cap,
        )?;
        Ok(v.iter().sum::<f64>() / samples as f64)
    };
    let unitary_mean = mean(Family::Haar, 0)?;
    let gaussian_mean = mean(Family::Gaussian, 1)?;
    let decoupled_mean = mean(Family::GaussianDecoupled, 2)?;
    let b_n = b_n_estimate(dim, b_samples, &rng.child(3))?.estimate;
    Ok(DoubleSumReport {
        n,
        dim,
        samples,
        unitary_mean,
        gaussian_mean,
        decoupled_mean,
        b_n,
        bound: gaussian_mean / (b_n * b_n),
        decoupled_bound: 2.0 * decoupled_mean / (b_n * b_n),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceMomentRow {
    pub p: u32,
    /// `E tr|Σ a_j U_j ⊗ Ū_j (I−P)|^p`.
    pub unitary: f64,
    /// `E tr|Σ a_j Y_j ⊗ Ȳ′_j|^p`.
    pub gaussian: f64,
    /// `(E tr|Y|^p)² (Σ|a_j|²)^{p/2}`.
    pub gaussian_bound: f64,
}

/// Even trace moments at dense sizes, `p ≤ 8`.
pub fn trace_moments(
    coeffs: &[c64],
    dim: usize,
    ps: &[u32],
    samples: usize,
    rng: &RngSpec,
) -> Result<Vec<TraceMomentRow>> {
    if coeffs.is_empty() {
        return Err(QexError::InvalidArgument(
            "coefficient list is empty".into(),
        ));
    }
    if let Some(&p) = ps.iter().find(|&&p| p == 0 || p > 8 || p % 2 == 1) {
        return Err(QexError::InvalidArgument(format!(
            "trace moments need even p in 2..=8, got {p}"
        )));
    }
    check_samples(samples, 2)?;
    let n = coeffs.len();
    let terms: Vec<CoefficientTerm> = coeffs
        .iter()
        .enumerate()
        .map(|(j, &a)| CoefficientTerm {
            left: j,
            right: j,
            coeff: ComplexMatrix::scalar(1, a),
        })
        .collect();
    let spectra = |family: Family, restrict: bool, stream: u64| -> Result<Vec<Vec<f64>>> {
        let base = rng.child(stream);
        (0..samples)
            .into_par_iter()
            .map(|s| {
                let (x, y) = sample_family(family, n, dim, &base.child(s as u64))?;
                crate::linalg::singular_values(&coefficient_operator(&terms, &x, &y, restrict)?)
            })
            .collect()
    };
    let unitary = spectra(Family::Haar, true, 0)?;
    let gaussian = spectra(Family::GaussianDecoupled, false, 1)?;
    let base = rng.child(2);
    let y_spectra: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|s| crate::linalg::singular_values(&ginibre(dim, &mut base.child(s as u64).rng())))
        .collect::<Result<_>>()?;
    let moment = |sets: &[Vec<f64>], p: u32| -> f64 {
        sets.iter()
            .map(|s| s.iter().map(|x| x.powi(p as i32)).sum::<f64>())
            .sum::<f64>()
            / sets.len() as f64
    };
    let a2 = l2(coeffs).powi(2);
    Ok(ps
        .iter()
        .map(|&p| TraceMomentRow {
            p,
            unitary: moment(&unitary, p),
            gaussian: moment(&gaussian, p),
            gaussian_bound: moment(&y_spectra, p).powi(2) * a2.powf(p as f64 / 2.0),
        })
        .collect())
}

/// Sample moments of `‖Y‖`.
pub fn ginibre_norm_stats(dim: usize, samples: usize, rng: &RngSpec) -> Result<SampleStats> {
    check_samples(samples, 2)?;
    let values = per_sample(samples, rng, |spec| {
        operator_norm(&ginibre(dim, &mut spec.rng()))
    })?;
    Ok(summarize(&values, &bootstrap_stream(rng)))
}
