//! Distances and separation between unitary tuples.
//!
//! All optimizers here are alternating ascents in which every block update is
//! globally optimal for that block (a polar factor or a top singular pair),
//! so the objective is non-decreasing. They certify one side only: an ascent
//! value is a lower bound for a supremum and yields an upper bound for an
//! infimum such as the orbit distance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_open, QexError, Result};
use crate::linalg::{
    c64, gaussian_matrix, haar_unitary, hs_norm, normalized_trace, polar_unitary, ComplexMatrix,
    MatrixTuple, RngSpec,
};
use crate::superop::{GapReport, NormMethod, NormOptions, SuperOperator};

/// `d(x, y) = (Σ_j ‖x_j − y_j‖²_{L₂(τ_N)})^{1/2}`.
pub fn tuple_distance(x: &MatrixTuple, y: &MatrixTuple) -> Result<f64> {
    x.require_same_shape(y)?;
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| hs_norm(&(a - b), true).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `Re Σ_j τ_N(x_j y_j*)`.
pub fn real_overlap(x: &MatrixTuple, y: &MatrixTuple) -> Result<f64> {
    x.require_same_shape(y)?;
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| normalized_trace(&a.matmul_adjoint(b)).re)
        .sum())
}

/// `‖Σ x_j ⊗ ȳ_j‖` on the full Hilbert–Schmidt space.
pub fn cross_norm(x: &MatrixTuple, y: &MatrixTuple, opts: &NormOptions) -> Result<GapReport> {
    SuperOperator::new(x.clone(), y.clone(), false)?.operator_norm(opts)
}

/// `‖Σ x_j ⊗ x̄_j‖`; exactly `n` for unitary tuples (the identity is a
/// fixed vector and the norm is at most `Σ‖x_j‖² = n`).
pub fn self_norm(x: &MatrixTuple, opts: &NormOptions) -> Result<f64> {
    if x.is_unitary() {
        Ok(x.n() as f64)
    } else {
        Ok(cross_norm(x, x, opts)?.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    /// `1 − norm_value / (self_u · self_v)^{1/2}`, clamped to `[0, 1]`.
    pub delta: f64,
    pub norm_value: f64,
    pub self_norm_u: f64,
    pub self_norm_v: f64,
    pub method: String,
    #[serde(skip)]
    pub witness_xi: ComplexMatrix,
    #[serde(skip)]
    pub witness_eta: ComplexMatrix,
}

pub fn separation(
    u: &MatrixTuple,
    v: &MatrixTuple,
    opts: &NormOptions,
) -> Result<SeparationReport> {
    u.require_same_shape(v)?;
    let cross = cross_norm(u, v, opts)?;
    let su = self_norm(u, opts)?;
    let sv = self_norm(v, opts)?;
    let denom = (su * sv).sqrt();
    let delta = if denom > 0.0 {
        (1.0 - cross.value / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let t = SuperOperator::new(u.clone(), v.clone(), false)?;
    let xi = cross
        .top_vector
        .clone()
        .unwrap_or_else(|| ComplexMatrix::zeros(u.dim()));
    let image = t.apply(&xi)?;
    let ni = image.frobenius_norm();
    let eta = if ni > 0.0 {
        image.scale_real(1.0 / ni)
    } else {
        image
    };
    Ok(SeparationReport {
        delta,
        norm_value: cross.value,
        self_norm_u: su,
        self_norm_v: sv,
        method: cross.method,
        witness_xi: xi,
        witness_eta: eta,
    })
}

/// Controls for the alternating ascents.
#[derive(Clone, Debug)]
pub struct AscentOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop a run when the objective increases by less than this.
    pub tol: f64,
    /// Orbit ascent only: stop when the `V`-update moves by less than this
    /// in Frobenius norm. The objective is flat to second order at the
    /// optimum, so `tol` alone stops far too early.
    pub step_tol: f64,
    pub rng: RngSpec,
    /// Norm computations inside the ascent.
    pub norm: NormOptions,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 20_000,
            tol: 1e-12,
            step_tol: 1e-10,
            rng: RngSpec::new(0xA5CE_0D00, 0),
            norm: NormOptions::default(),
        }
    }
}

impl AscentOptions {
    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn rng(mut self, rng: RngSpec) -> Self {
        self.rng = rng;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitDistanceReport {
    /// `d(best_u · u · best_v, v)`, evaluated directly.
    pub upper: f64,
    /// Certified lower bound; 0 unless a separation certificate is attached.
    pub lower: f64,
    pub restarts_used: usize,
    /// Final distance of every restart (restart 0 starts from `V = I`).
    pub per_restart: Vec<f64>,
    #[serde(skip)]
    pub best_u: ComplexMatrix,
    #[serde(skip)]
    pub best_v: ComplexMatrix,
}

impl OrbitDistanceReport {
    /// Attaches the lower bound `√(2δn)` implied by `δ`-separation.
    pub fn with_separation(mut self, delta: f64, n: usize) -> Result<Self> {
        self.lower = lower_bound_from_separation(delta, n)?;
        Ok(self)
    }
}

/// One alternating run maximizing `Re Σ τ_N(U u_j V v_j*)` from `V = v0`.
fn orbit_run(
    u: &MatrixTuple,
    v: &MatrixTuple,
    v0: ComplexMatrix,
    max_iters: usize,
    step_tol: f64,
) -> Result<(f64, ComplexMatrix, ComplexMatrix)> {
    let dim = u.dim();
    let mut big_v = v0;
    let mut big_u = ComplexMatrix::identity(dim);
    for _ in 0..max_iters {
        // U-step: maximize Re tr(U M), M = Σ u_j V v_j*.
        let mut m = ComplexMatrix::zeros(dim);
        for (a, b) in u.iter().zip(v.iter()) {
            m = &m + &a.matmul(&big_v).matmul_adjoint(b);
        }
        big_u = polar_unitary(&m)?.adjoint();
        // V-step: maximize Re tr(V K), K = Σ v_j* U u_j.
        let mut k = ComplexMatrix::zeros(dim);
        for (a, b) in u.iter().zip(v.iter()) {
            k = &k + &b.adjoint_matmul(&big_u).matmul(a);
        }
        let next = polar_unitary(&k)?.adjoint();
        let step = (&next - &big_v).frobenius_norm();
        big_v = next;
        if step < step_tol {
            break;
        }
    }
    let moved = u.two_sided(&big_u, &big_v);
    Ok((tuple_distance(&moved, v)?, big_u, big_v))
}

/// Upper bound on `d′(u, v) = inf_{U,V} d(U·u·V, v)` by restarted
/// alternating ascent.
pub fn orbit_distance(
    u: &MatrixTuple,
    v: &MatrixTuple,
    opts: &AscentOptions,
) -> Result<OrbitDistanceReport> {
    u.require_same_shape(v)?;
    u.require_unitary("orbit_distance")?;
    v.require_unitary("orbit_distance")?;
    let restarts = opts.restarts.max(1);
    let runs: Vec<Result<(f64, ComplexMatrix, ComplexMatrix)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let v0 = if r == 0 {
                ComplexMatrix::identity(u.dim())
            } else {
                haar_unitary(u.dim(), &mut opts.rng.child(r as u64).rng())
            };
            orbit_run(u, v, v0, opts.max_iters, opts.step_tol)
        })
        .collect();
    let mut per_restart = Vec::with_capacity(restarts);
    let mut best: Option<(f64, ComplexMatrix, ComplexMatrix)> = None;
    for run in runs {
        let (d, bu, bv) = run?;
        per_restart.push(d);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, bu, bv));
        }
    }
    let (upper, best_u, best_v) = best.expect("at least one restart");
    Ok(OrbitDistanceReport {
        upper,
        lower: 0.0,
        restarts_used: restarts,
        per_restart,
        best_u,
        best_v,
    })
}

/// `√(2δn)`: the orbit distance implied by `δ`-separation.
pub fn lower_bound_from_separation(delta: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(QexError::Domain {
            name: "delta",
            value: delta,
            domain: "[0, 1]",
        });
    }
    Ok((2.0 * delta * n as f64).sqrt())
}

fn check_half_open(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(QexError::Domain {
            name,
            value,
            domain: "[0, 1)",
        })
    }
}

/// `3ε′^{1/3} + 2ε`: bound on `‖Σ u_j ⊗ v̄_j‖/n` when both tuples are in
/// `S_ε` and `d′(u, v) ≥ √(2n(1−ε′))`.
pub fn overlap_bound_two_sided(eps: f64, eps_prime: f64) -> Result<f64> {
    check_half_open("eps", eps)?;
    check_half_open("eps_prime", eps_prime)?;
    Ok(3.0 * eps_prime.cbrt() + 2.0 * eps)
}

/// `ε′^{1/5}(2^{−4/5} + 2^{6/5}) + 2ε^{1/2}`: the same bound when only `u`
/// is in `S_ε` and `‖Σ v_j ⊗ v̄_j‖ ≤ n`.
pub fn overlap_bound_one_sided(eps: f64, eps_prime: f64) -> Result<f64> {
    check_half_open("eps", eps)?;
    check_half_open("eps_prime", eps_prime)?;
    Ok(eps_prime.powf(0.2) * (2f64.powf(-0.8) + 2f64.powf(1.2)) + 2.0 * eps.sqrt())
}

/// `ε′` certified by an orbit-distance lower bound `d′ ≥ lower`:
/// the smallest `ε′ ≥ 0` with `lower ≥ √(2n(1−ε′))`.
pub fn eps_prime_from_distance(distance: f64, n: usize) -> f64 {
    (1.0 - distance * distance / (2.0 * n as f64)).max(0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapBoundCheck {
    pub bound: f64,
    pub branch: &'static str,
    /// Measured `‖Σ u_j ⊗ v̄_j‖ / n`.
    pub measured: f64,
    pub holds: bool,
}

/// Evaluates the applicable overlap bound and checks it against the
/// measured cross norm.
///
/// `eps` must be a certified `S_ε` parameter of `u` (and of `v` when
/// `v_in_s_eps`), and `eps_prime` must satisfy `d′(u, v) ≥ √(2n(1−ε′))`.
/// The one-sided branch needs `‖Σ v_j ⊗ v̄_j‖ ≤ n`, which holds for
/// unitary `v`.
pub fn separation_from_distance(
    u: &MatrixTuple,
    v: &MatrixTuple,
    eps: f64,
    eps_prime: f64,
    v_in_s_eps: bool,
    opts: &NormOptions,
) -> Result<OverlapBoundCheck> {
    let one = overlap_bound_one_sided(eps, eps_prime)?;
    let (bound, branch) = if v_in_s_eps {
        let two = overlap_bound_two_sided(eps, eps_prime)?;
        if two <= one {
            (two, "two-sided")
        } else {
            (one, "one-sided")
        }
    } else {
        (one, "one-sided")
    };
    let measured = cross_norm(u, v, opts)?.value / u.n() as f64;
    Ok(OverlapBoundCheck {
        bound,
        branch,
        measured,
        holds: measured <= bound + 1e-6,
    })
}

/// `θ = δ + √2·(2(2δ−δ²)((1−ε)⁻¹+1))^{1/2} + (1−ε)⁻¹(2δ−δ²)`.
pub fn orbit_radius_theta(eps: f64, delta: f64) -> Result<f64> {
    check_half_open("eps", eps)?;
    check_open("delta", delta, 0.0, 1.0, "(0, 1)")?;
    let s = 2.0 * delta - delta * delta;
    let inv = 1.0 / (1.0 - eps);
    Ok(delta + 2f64.sqrt() * (2.0 * s * (inv + 1.0)).sqrt() + inv * s)
}

/// Radius `f_ε(δ)`: `(2θ)^{1/2}` while `θ < 1`, else 3.
///
/// If `u ∈ S_ε`, `‖Σ v_j ⊗ v̄_j‖ ≤ n` and `‖Σ u_j ⊗ v̄_j‖ > n(1−δ)` then
/// `d′(u, v) < f_ε(δ)√n`.
pub fn orbit_radius(eps: f64, delta: f64) -> Result<f64> {
    let theta = orbit_radius_theta(eps, delta)?;
    Ok(if theta < 1.0 {
        (2.0 * theta).sqrt()
    } else {
        3.0
    })
}

/// Largest `k` with `k ≤ (1 − f_ε(δ)²)N`; zero-padded `v ∈ U(k)ⁿ` are then
/// `δ`-separated from every `u ∈ S_ε`.
pub fn max_padded_dim(eps: f64, delta: f64, dim: usize) -> Result<usize> {
    let f = orbit_radius(eps, delta)?;
    let k = ((1.0 - f * f) * dim as f64).floor();
    Ok(if k > 0.0 { k as usize } else { 0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongSeparationReport {
    /// Best `‖Σ (w.u)_i ⊗ v̄_i‖ / n` found: a lower bound on the supremum
    /// over `w ∈ U(n)`.
    pub estimate: f64,
    /// `1 − estimate`; an upper estimate of the strong separation constant.
    pub strong_delta: f64,
    /// Value at `w = I`, i.e. the plain separation norm divided by `n`.
    pub at_identity: f64,
    pub per_restart: Vec<f64>,
    #[serde(skip)]
    pub best_w: ComplexMatrix,
}

fn strong_run(
    u: &MatrixTuple,
    v: &MatrixTuple,
    w0: ComplexMatrix,
    opts: &AscentOptions,
) -> Result<(f64, ComplexMatrix, f64)> {
    let n = u.n();
    let mut w = w0;
    let mut prev = f64::NEG_INFINITY;
    let mut first = None;
    for _ in 0..opts.max_iters {
        let wu = u.recombine(&w)?;
        let t = SuperOperator::new(wu, v.clone(), false)?;
        let rep = t.operator_norm(&opts.norm)?;
        first.get_or_insert(rep.value);
        if rep.value - prev < opts.tol {
            prev = prev.max(rep.value);
            break;
        }
        prev = rep.value;
        let xi = rep.top_vector.expect("witness");
        let image = t.apply(&xi)?;
        let eta = image.scale_real(1.0 / image.frobenius_norm().max(1e-300));
        // M_ij = tr(u_j ξ v_i* η*); optimal w maximizes Re Σ w_ij M_ij.
        let left: Vec<ComplexMatrix> = u.iter().map(|a| a.matmul(&xi)).collect();
        let right: Vec<ComplexMatrix> = v.iter().map(|b| eta.matmul(b)).collect();
        let mt = ComplexMatrix::from_fn(n, |j, i| {
            // (Mᵀ)_ji = tr(u_j ξ (η v_i)*)
            left[j].inner(&right[i])
        });
        w = polar_unitary(&mt)?.adjoint();
    }
    Ok((prev / n as f64, w, first.unwrap_or(0.0) / n as f64))
}

/// Optimal `w` for `ξ = η = I/√N`: the polar maximizer of
/// `Re Σ w_ij τ_N(u_j v_i*)`.
fn trace_alignment(u: &MatrixTuple, v: &MatrixTuple) -> Result<ComplexMatrix> {
    let mt = ComplexMatrix::from_fn(u.n(), |j, i| normalized_trace(&u[j].matmul_adjoint(&v[i])));
    Ok(polar_unitary(&mt)?.adjoint())
}

/// Estimates `sup_{w ∈ U(n)} ‖Σ_i (w.u)_i ⊗ v̄_i‖ / n` with
/// `(w.u)_i = Σ_j w_ij u_j`. Restart 0 starts at `w = I`, restart 1 at the
/// trace alignment of `u` with `v`, the others at Haar-random `w`.
pub fn strong_separation_estimate(
    u: &MatrixTuple,
    v: &MatrixTuple,
    opts: &AscentOptions,
) -> Result<StrongSeparationReport> {
    u.require_same_shape(v)?;
    let n = u.n();
    let restarts = opts.restarts.max(1);
    let runs: Vec<Result<(f64, ComplexMatrix, f64)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let w0 = match r {
                0 => Ok(ComplexMatrix::identity(n)),
                1 => trace_alignment(u, v),
                _ => Ok(haar_unitary(n, &mut opts.rng.child(r as u64).rng())),
            };
            strong_run(u, v, w0?, opts)
        })
        .collect();
    let mut per_restart = Vec::with_capacity(restarts);
    let mut best = (f64::NEG_INFINITY, ComplexMatrix::identity(n));
    let mut at_identity = 0.0;
    for (r, run) in runs.into_iter().enumerate() {
        let (value, w, first) = run?;
        if r == 0 {
            at_identity = first;
        }
        per_restart.push(value);
        if value > best.0 {
            best = (value, w);
        }
    }
    Ok(StrongSeparationReport {
        estimate: best.0,
        strong_delta: (1.0 - best.0).clamp(0.0, 1.0),
        at_identity,
        per_restart,
        best_w: best.1,
    })
}

/// `Δ_{N,n}(t) = n² sup_{i≠j} |τ_N(t_i t_j*)|`.
pub fn delta_overlap(t: &MatrixTuple) -> Result<f64> {
    let n = t.n();
    if n < 2 {
        return Err(QexError::InvalidArgument(
            "delta_overlap needs n >= 2".into(),
        ));
    }
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sup = sup.max(normalized_trace(&t[i].matmul_adjoint(&t[j])).norm());
            }
        }
    }
    Ok((n * n) as f64 * sup)
}

/// `γ₁ = 1 − (1−δ)^{1/2}`, the solution of `(1−γ₁)⁻¹(1−δ) = (1−δ)^{1/2}`.
pub fn gamma1(delta: f64) -> Result<f64> {
    check_open("delta_strong", delta, 0.0, 1.0, "(0, 1)")?;
    Ok(1.0 - (1.0 - delta).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct DcbBound {
    /// `(1 − δ)⁻¹`.
    pub bound: f64,
    pub gamma1: f64,
    pub big_delta: f64,
}

/// Lower bound `(1−δ)⁻¹` on the completely bounded distance between the
/// spans of two strongly `δ`-separated tuples with overlap `Δ < γ₁`.
///
/// The result is conditional on `delta_strong` being a true strong
/// separation constant; estimates from [`strong_separation_estimate`] are
/// not certificates.
pub fn dcb_lower_bound(delta_strong: f64, big_delta: f64, n: usize) -> Result<DcbBound> {
    if n < 2 {
        return Err(QexError::InvalidArgument(
            "dcb_lower_bound needs n >= 2".into(),
        ));
    }
    let g1 = gamma1(delta_strong)?;
    if !(big_delta >= 0.0) {
        return Err(QexError::Domain {
            name: "Delta",
            value: big_delta,
            domain: "[0, inf)",
        });
    }
    if big_delta >= g1 {
        return Err(QexError::Infeasible(format!(
            "overlap condition Delta < gamma1 violated: Delta = {big_delta:.6e} >= gamma1 = {g1:.6e}"
        )));
    }
    Ok(DcbBound {
        bound: 1.0 / (1.0 - delta_strong),
        gamma1: g1,
        big_delta,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormingReport {
    /// Best `‖Σ x_j ⊗ v̄_j‖` over all restarts.
    pub attained: f64,
    /// Final value of each restart; restart 0 starts at `ξ = η = I/√N`.
    pub per_restart: Vec<f64>,
    /// Orbit distance from `x` to the best `v` (upper bound).
    pub orbit_upper: f64,
    #[serde(skip)]
    pub v: MatrixTuple,
    /// Best tuple of each restart.
    #[serde(skip)]
    pub restart_tuples: Vec<MatrixTuple>,
}

fn norming_run(
    x: &MatrixTuple,
    mut xi: ComplexMatrix,
    mut eta: ComplexMatrix,
    opts: &AscentOptions,
) -> Result<(f64, MatrixTuple)> {
    let mut prev = f64::NEG_INFINITY;
    let mut best_v = x.clone();
    for _ in 0..opts.max_iters {
        // v_j maximizes Re tr(v_j* η* x_j ξ).
        let members = x
            .iter()
            .map(|a| polar_unitary(&eta.adjoint_matmul(a).matmul(&xi)))
            .collect::<Result<Vec<_>>>()?;
        let v = MatrixTuple::new(members)?.assume_unitary();
        let t = SuperOperator::new(x.clone(), v.clone(), false)?;
        let rep = t.operator_norm(&opts.norm)?;
        if rep.value - prev < opts.tol {
            if rep.value > prev {
                prev = rep.value;
                best_v = v;
            }
            break;
        }
        prev = rep.value;
        best_v = v;
        xi = rep.top_vector.expect("witness");
        let image = t.apply(&xi)?;
        eta = image.scale_real(1.0 / image.frobenius_norm().max(1e-300));
    }
    Ok((prev, best_v))
}

/// Ascent of `‖Σ x_j ⊗ v̄_j‖` over unitary tuples `v` (a subset of the ball
/// `‖Σ v_j ⊗ v̄_j‖ ≤ n`), alternating between the optimal `v` for fixed
/// `(ξ, η)` and the top singular pair for fixed `v`.
pub fn find_norming_tuple(x: &MatrixTuple, opts: &AscentOptions) -> Result<NormingReport> {
    x.require_unitary("find_norming_tuple")?;
    let dim = x.dim();
    let restarts = opts.restarts.max(1);
    let runs: Vec<Result<(f64, MatrixTuple)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let (xi, eta) = if r == 0 {
                let s = ComplexMatrix::identity(dim).scale_real(1.0 / (dim as f64).sqrt());
                (s.clone(), s)
            } else {
                let mut rng = opts.rng.child(r as u64).rng();
                let a = gaussian_matrix(dim, &mut rng);
                let b = gaussian_matrix(dim, &mut rng);
                (
                    a.scale_real(1.0 / a.frobenius_norm()),
                    b.scale_real(1.0 / b.frobenius_norm()),
                )
            };
            norming_run(x, xi, eta, opts)
        })
        .collect();
    let mut per_restart = Vec::with_capacity(restarts);
    let mut restart_tuples = Vec::with_capacity(restarts);
    let mut best = 0;
    for (r, run) in runs.into_iter().enumerate() {
        let (value, v) = run?;
        if r == 0 || value > per_restart[best] {
            best = r;
        }
        per_restart.push(value);
        restart_tuples.push(v);
    }
    let v = restart_tuples[best].clone();
    let orbit = orbit_distance(
        x,
        &v,
        &AscentOptions {
            restarts: 5,
            ..opts.clone()
        },
    )?;
    Ok(NormingReport {
        attained: per_restart[best],
        per_restart,
        orbit_upper: orbit.upper,
        v,
        restart_tuples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonOrbitWitness {
    /// Rank of the invariant projection `p`; the witness is `y_j = x_j p`.
    pub rank: usize,
    /// `‖Σ x_j ⊗ ȳ_j‖`.
    pub cross_norm: f64,
    /// `‖Σ y_j ⊗ ȳ_j‖`.
    pub self_norm: f64,
    /// `√(n(1 − k/N))`: every tuple in the orbit of `x` is at least this far
    /// from `y`, since `|τ_N(a y_j*)| ≤ k/N` for unitary `a`.
    pub orbit_distance_lower: f64,
    #[serde(skip)]
    pub y: MatrixTuple,
}

/// For a unitary tuple without spectral gap (`‖T_x|H₀‖ = n`), builds a
/// norming tuple outside the scaled orbit of `x` by cutting `x` down to an
/// invariant subspace. Returns `None` when `x` has a gap.
pub fn non_orbit_norming_witness(x: &MatrixTuple, tol: f64) -> Result<Option<NonOrbitWitness>> {
    x.require_unitary("non_orbit_norming_witness")?;
    let n = x.n() as f64;
    let dim = x.dim();
    let gap = SuperOperator::from_tuple(x, true)
        .operator_norm(&NormOptions::with_method(NormMethod::Auto))?;
    if gap.value < n - tol {
        return Ok(None);
    }
    let xi = gap.top_vector.expect("witness");
    // The fixed vector lies in the commutant, which is closed under adjoints,
    // so a nonzero Hermitian part can be taken.
    let herm = (&xi + &xi.adjoint()).scale_real(0.5);
    let skew = (&xi - &xi.adjoint()).scale(c64::new(0.0, -0.5));
    let h = if herm.frobenius_norm() >= skew.frobenius_norm() {
        herm
    } else {
        skew
    };
    let evd = h
        .as_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| QexError::Decomposition(format!("eigendecomposition failed: {e:?}")))?;
    let vals: Vec<f64> = (0..dim).map(|i| evd.S()[i].re).collect();
    let top = vals[dim - 1];
    let spread = (top - vals[0]).max(1e-300);
    let cols: Vec<usize> = (0..dim)
        .filter(|&i| top - vals[i] <= 1e-6 * spread)
        .collect();
    let rank = cols.len();
    if rank == dim {
        return Ok(None);
    }
    let p = ComplexMatrix::from_fn(dim, |a, b| {
        cols.iter()
            .map(|&c| evd.U()[(a, c)] * evd.U()[(b, c)].conj())
            .sum()
    });
    let y = MatrixTuple::new(x.iter().map(|a| a.matmul(&p)).collect())?;
    let opts = NormOptions::with_method(NormMethod::Auto);
    let cross = cross_norm(x, &y, &opts)?.value;
    let self_n = cross_norm(&y, &y, &opts)?.value;
    Ok(Some(NonOrbitWitness {
        rank,
        cross_norm: cross,
        self_norm: self_n,
        orbit_distance_lower: (n * (1.0 - rank as f64 / dim as f64)).sqrt(),
        y,
    }))
}
