//! Greedy separated families of certified expanders, covers of sample
//! clouds, and the closed-form count bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_open, QexError, Result};
use crate::expanders::{certify_with, haar_tuple};
use crate::geometry::{
    orbit_distance, separation, strong_separation_estimate, tuple_distance, AscentOptions,
};
use crate::linalg::{haar_unitary, MatrixTuple, RngSpec};
use crate::randmat::b_n_estimate;
use crate::superop::NormOptions;

/// How a candidate is compared with the current members.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admission {
    /// `1 − ‖Σ u_j ⊗ v̄_j‖/n ≥ delta`.
    #[default]
    Separation,
    /// `1 − sup_w ‖Σ (w.u)_j ⊗ v̄_j‖/n ≥ delta` with the supremum estimated
    /// by ascent; the resulting family is not certified.
    StrongEstimate,
}

#[derive(Clone, Debug)]
pub struct PackOptions {
    pub n: usize,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub max_samples: usize,
    pub rng: RngSpec,
    pub admission: Admission,
    pub norm: NormOptions,
    /// Used only for [`Admission::StrongEstimate`].
    pub ascent: AscentOptions,
    pub certify_tol: f64,
}

impl PackOptions {
    pub fn new(
        n: usize,
        dim: usize,
        eps: f64,
        delta: f64,
        max_samples: usize,
        rng: RngSpec,
    ) -> Self {
        Self {
            n,
            dim,
            eps,
            delta,
            max_samples,
            rng,
            admission: Admission::Separation,
            norm: NormOptions::default(),
            ascent: AscentOptions::default().restarts(4),
            certify_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PackingFamily {
    #[serde(skip)]
    pub members: Vec<MatrixTuple>,
    /// Index of the sample each member came from.
    pub sample_indices: Vec<usize>,
    /// Certified `epsilon` of each member.
    pub member_eps: Vec<f64>,
    /// Symmetric matrix of measured separations; zero diagonal.
    pub pairwise: Vec<Vec<f64>>,
    pub accept_delta: f64,
    pub eps: f64,
    pub seed: RngSpec,
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples_drawn: usize,
    /// Certified samples that failed the separation test.
    pub rejected_count: usize,
    /// Samples whose certificate was below `eps`.
    pub uncertified_count: usize,
    pub admission: Admission,
}

impl PackingFamily {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn log_count(&self) -> f64 {
        (self.count() as f64).ln()
    }

    /// Symmetry, zero diagonal, admission threshold, member certificates and
    /// the count bound (the latter only for `accept_delta > 0`).
    pub fn check_invariants(&self) -> Result<()> {
        let m = self.count();
        if self.pairwise.len() != m {
            return Err(QexError::Infeasible(
                "pairwise matrix has the wrong size".into(),
            ));
        }
        for i in 0..m {
            if self.pairwise[i][i] != 0.0 {
                return Err(QexError::Infeasible(format!(
                    "diagonal entry {i} is nonzero"
                )));
            }
            if self.member_eps[i] < self.eps - 1e-12 {
                return Err(QexError::Infeasible(format!(
                    "member {i} has epsilon {} < {}",
                    self.member_eps[i], self.eps
                )));
            }
            for j in 0..i {
                if (self.pairwise[i][j] - self.pairwise[j][i]).abs() > 1e-8 {
                    return Err(QexError::Infeasible(format!(
                        "pairwise entry ({i}, {j}) is not symmetric"
                    )));
                }
                if self.pairwise[i][j] < self.accept_delta {
                    return Err(QexError::Infeasible(format!(
                        "pair ({i}, {j}) is below the admission threshold"
                    )));
                }
            }
        }
        if self.accept_delta > 0.0 && m > 0 {
            let bound = packing_upper_bound(self.n, self.dim, self.accept_delta.min(2.0))?;
            if self.log_count() > bound {
                return Err(QexError::Infeasible(format!(
                    "log count {} exceeds {bound}",
                    self.log_count()
                )));
            }
        }
        Ok(())
    }

    /// Rows `(i, j, delta_ij)` for `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let m = self.count();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.pairwise[i][j]))
            .collect()
    }
}

fn measured_delta(u: &MatrixTuple, v: &MatrixTuple, opts: &PackOptions) -> Result<f64> {
    match opts.admission {
        Admission::Separation => Ok(separation(u, v, &opts.norm)?.delta),
        Admission::StrongEstimate => {
            Ok(strong_separation_estimate(u, v, &opts.ascent)?.strong_delta)
        }
    }
}

/// Online greedy packing: Haar samples with `epsilon ≥ eps` are admitted in
/// sample order when their measured separation from every member is at
/// least `delta`. Sample `s` is drawn from `rng.child(s)`.
pub fn greedy_pack(opts: &PackOptions) -> Result<PackingFamily> {
    if opts.n == 0 || opts.dim == 0 {
        return Err(QexError::InvalidArgument("n and N must be positive".into()));
    }
    if !(0.0..=1.0).contains(&opts.eps) {
        return Err(QexError::Domain {
            name: "eps",
            value: opts.eps,
            domain: "[0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&opts.delta) {
        return Err(QexError::Domain {
            name: "delta",
            value: opts.delta,
            domain: "[0, 1]",
        });
    }
    let candidates: Vec<Result<(MatrixTuple, f64)>> = (0..opts.max_samples)
        .into_par_iter()
        .map(|s| {
            let u = haar_tuple(opts.n, opts.dim, &opts.rng.child(s as u64))?;
            let eps = certify_with(&u, opts.certify_tol, &opts.norm)?.epsilon;
            Ok((u, eps))
        })
        .collect();

    let mut members: Vec<MatrixTuple> = Vec::new();
    let mut sample_indices = Vec::new();
    let mut member_eps = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rejected = 0;
    let mut uncertified = 0;
    for (s, cand) in candidates.into_iter().enumerate() {
        let (u, eps) = cand?;
        if eps < opts.eps {
            uncertified += 1;
            continue;
        }
        let deltas: Vec<f64> = members
            .par_iter()
            .map(|m| measured_delta(m, &u, opts))
            .collect::<Result<_>>()?;
        if deltas.iter().any(|&d| d < opts.delta) {
            rejected += 1;
            continue;
        }
        for (row, &d) in rows.iter_mut().zip(&deltas) {
            row.push(d);
        }
        let mut row = deltas;
        row.push(0.0);
        rows.push(row);
        members.push(u);
        sample_indices.push(s);
        member_eps.push(eps);
    }
    Ok(PackingFamily {
        members,
        sample_indices,
        member_eps,
        pairwise: rows,
        accept_delta: opts.delta,
        eps: opts.eps,
        seed: opts.rng,
        n: opts.n,
        dim: opts.dim,
        samples_drawn: opts.max_samples,
        rejected_count: rejected,
        uncertified_count: uncertified,
        admission: opts.admission,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMetric {
    /// Plain tuple distance `d`.
    D,
    /// Orbit distance `d′`, through the ascent's upper bound.
    DPrime,
}

impl std::str::FromStr for CoverMetric {
    type Err = QexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(Self::D),
            "d_prime" | "dprime" => Ok(Self::DPrime),
            other => Err(QexError::InvalidArgument(format!(
                "unknown metric {other:?}; expected d or d_prime"
            ))),
        }
    }
}

/// Symmetric distance matrix, each pair evaluated once.
pub fn distance_matrix(
    points: &[MatrixTuple],
    metric: CoverMetric,
    ascent: &AscentOptions,
) -> Result<Vec<Vec<f64>>> {
    let m = points.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| match metric {
            CoverMetric::D => tuple_distance(&points[i], &points[j]),
            CoverMetric::DPrime => Ok(orbit_distance(&points[i], &points[j], ascent)?.upper),
        })
        .collect::<Result<_>>()?;
    let mut d = vec![vec![0.0; m]; m];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        d[i][j] = v;
        d[j][i] = v;
    }
    Ok(d)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverEstimate {
    pub radius: f64,
    /// Indices of the chosen centers in the input cloud.
    pub center_indices: Vec<usize>,
    #[serde(skip)]
    pub centers: Vec<MatrixTuple>,
    pub metric: CoverMetric,
    pub count: usize,
    /// Largest distance from a point to its nearest center.
    pub covering_radius: f64,
}

/// Farthest-point greedy cover on a precomputed distance matrix: the first
/// point is a center, and the point farthest from all centers is added
/// while that distance exceeds `radius`.
pub fn greedy_cover_indices(dist: &[Vec<f64>], radius: f64) -> Result<(Vec<usize>, f64)> {
    if !(radius > 0.0) {
        return Err(QexError::Domain {
            name: "radius",
            value: radius,
            domain: "(0, ∞)",
        });
    }
    let m = dist.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut centers = vec![0];
    let mut nearest = dist[0].clone();
    loop {
        let (far, &gap) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if gap <= radius {
            return Ok((centers, gap));
        }
        centers.push(far);
        for (x, row) in nearest.iter_mut().zip(&dist[far]) {
            *x = x.min(*row);
        }
    }
}

pub fn greedy_cover(
    points: &[MatrixTuple],
    radius: f64,
    metric: CoverMetric,
    ascent: &AscentOptions,
) -> Result<CoverEstimate> {
    let dist = distance_matrix(points, metric, ascent)?;
    let (idx, covering_radius) = greedy_cover_indices(&dist, radius)?;
    Ok(CoverEstimate {
        radius,
        centers: idx.iter().map(|&i| points[i].clone()).collect(),
        count: idx.len(),
        center_indices: idx,
        metric,
        covering_radius,
    })
}

/// Size of a greedy subset whose pairwise distances all exceed `separation`.
pub fn greedy_packing_count(dist: &[Vec<f64>], separation: f64) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for (i, row) in dist.iter().enumerate() {
        if chosen.iter().all(|&c| row[c] > separation) {
            chosen.push(i);
        }
    }
    chosen.len()
}

/// `log m_max ≤ 2nN² log(1 + √(2/δ))` for `0 < δ ≤ 2`.
pub fn packing_upper_bound(n: usize, dim: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(QexError::Domain {
            name: "delta",
            value: delta,
            domain: "(0, 2]",
        });
    }
    Ok(real_dimension(n, dim) * (1.0 + (2.0 / delta).sqrt()).ln())
}

/// The cruder `2√(2/δ) nN²`, from `log(1 + x) ≤ x`.
pub fn crude_packing_bound(n: usize, dim: usize, delta: f64) -> Result<f64> {
    packing_upper_bound(n, dim, delta)?;
    Ok(real_dimension(n, dim) * (2.0 / delta).sqrt())
}

/// `2nN² log(1 + 2/δ)` for `0 < δ < 1`.
pub fn net_size_bound(n: usize, dim: usize, delta: f64) -> Result<f64> {
    check_open("delta", delta, 0.0, 1.0, "(0, 1)")?;
    Ok(real_dimension(n, dim) * (1.0 + 2.0 / delta).ln())
}

/// `n log(3C/(C−1))`, the scalar net bound at distortion `C > 1`.
pub fn banach_net_bound(n: usize, c: f64) -> Result<f64> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(QexError::Domain {
            name: "C",
            value: c,
            domain: "(1, ∞)",
        });
    }
    Ok(n as f64 * (3.0 * c / (c - 1.0)).ln())
}

/// Lower-bound form for the multiplicity, which has no computable constant.
pub const MULTIPLICITY_LOWER_FORM: &str = "k >= exp(b n N^2) for some b > 0 when C is close to 1";

fn real_dimension(n: usize, dim: usize) -> f64 {
    2.0 * n as f64 * (dim * dim) as f64
}

/// Least-squares line through `(x, y)` points, used for empirical exponent
/// fits such as log-count against `nN²`. Non-rigorous by construction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(QexError::InvalidArgument(
            "a line fit needs at least two points".into(),
        ));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(QexError::InvalidArgument("all x values coincide".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    /// `λ = t√n`.
    pub lambda: f64,
    pub t: f64,
    pub empirical: f64,
    /// `exp(−K̂λ²/n)`.
    pub bound: f64,
    /// Binomial standard deviation of the empirical frequency under the bound.
    pub sigma: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgaussianTable {
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    pub samples: usize,
    /// `b_N²` estimated at this `N`.
    pub k_hat: f64,
    pub mean: f64,
    pub variance: f64,
    pub rows: Vec<TailRow>,
    pub seed: RngSpec,
}

impl SubgaussianTable {
    pub fn any_flag(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Grid of `t` in `λ = t√n`.
pub const TAIL_GRID: [f64; 11] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5];

/// Samples used for `b_N` inside the tail check.
pub const TAIL_B_SAMPLES: usize = 400;

/// Exceedance frequencies of `S = Σ_j Re tr(ω_j)` over Haar tuples against
/// `exp(−K̂λ²/n)`, `K̂ = b_N²`. A row is flagged when the empirical
/// frequency exceeds the bound by more than three binomial deviations.
pub fn subgaussian_tail_check(
    n: usize,
    dim: usize,
    samples: usize,
    rng: &RngSpec,
) -> Result<SubgaussianTable> {
    if n == 0 || dim == 0 {
        return Err(QexError::InvalidArgument("n and N must be positive".into()));
    }
    if samples < 100 {
        return Err(QexError::InvalidArgument(format!(
            "samples must be at least 100, got {samples}"
        )));
    }
    let b = b_n_estimate(dim, TAIL_B_SAMPLES, &rng.child(u64::MAX))?.estimate;
    let k_hat = b * b;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut r = rng.child(s as u64).rng();
            (0..n).map(|_| haar_unitary(dim, &mut r).trace().re).sum()
        })
        .collect();
    let m = samples as f64;
    let mean = values.iter().sum::<f64>() / m;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let rows = TAIL_GRID
        .iter()
        .map(|&t| {
            let lambda = t * (n as f64).sqrt();
            let empirical = values.iter().filter(|&&v| v > lambda).count() as f64 / m;
            let bound = (-k_hat * lambda * lambda / n as f64).exp();
            let sigma = (bound * (1.0 - bound) / m).sqrt();
            TailRow {
                lambda,
                t,
                empirical,
                bound,
                sigma,
                flagged: empirical > bound + 3.0 * sigma,
            }
        })
        .collect();
    Ok(SubgaussianTable {
        n,
        dim,
        samples,
        k_hat,
        mean,
        variance,
        rows,
        seed: *rng,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert!((packing_upper_bound(3, 2, 2.0).unwrap() - 24.0 * 2f64.ln()).abs() < 1e-12);
        assert!((packing_upper_bound(1, 1, 0.5).unwrap() - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert!((net_size_bound(2, 3, 2.0 / 3.0).unwrap() - 36.0 * 4f64.ln()).abs() < 1e-12);
        assert!(packing_upper_bound(1, 1, 0.0).is_err());
        assert!(packing_upper_bound(1, 1, 2.5).is_err());
        assert!(net_size_bound(1, 1, 1.0).is_err());
    }

    #[test]
    fn cover_extremes() {
        let d = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ];
        assert_eq!(greedy_cover_indices(&d, 2.0).unwrap().0, vec![0]);
        assert_eq!(greedy_cover_indices(&d, 1e-9).unwrap().0.len(), 3);
        assert_eq!(greedy_cover_indices(&d, 1.2).unwrap().0, vec![0, 2]);
        assert!(greedy_cover_indices(&d, 0.0).is_err());
    }

    #[test]
    fn zero_threshold_admits_all_certified() {
        let opts = PackOptions::new(3, 2, 0.0, 0.0, 6, RngSpec::new(2, 0));
        let fam = greedy_pack(&opts).unwrap();
        assert_eq!(fam.count(), 6);
        assert_eq!(fam.rejected_count + fam.uncertified_count, 0);
        fam.check_invariants().unwrap();
    }

    #[test]
    fn line_fit_recovers_line() {
        let f = fit_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
    }
}
