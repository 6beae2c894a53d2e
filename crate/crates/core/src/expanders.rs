//! Candidate expanders (Haar, Cayley, Pauli) and their certification.

use serde::{Deserialize, Serialize};

use crate::error::{QexError, Result};
use crate::linalg::{
    c64, haar_unitary, normalized_trace, pauli_matrices, ComplexMatrix, MatrixTuple, RngSpec,
};
use crate::superop::{project_h0, spectral_gap_with, GapReport, NormOptions};

/// A finite group given by the left-translation action of its generators on
/// `{0, …, order−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPresentation {
    pub order: usize,
    pub generators: Vec<Vec<usize>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl GroupPresentation {
    /// Validates that each generator is a bijection and that the action is
    /// transitive.
    pub fn new(order: usize, generators: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let g = Self {
            order,
            generators,
            labels,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(QexError::InvalidArgument(
                "group order must be positive".into(),
            ));
        }
        if self.generators.is_empty() {
            return Err(QexError::InvalidArgument(
                "at least one generator is required".into(),
            ));
        }
        if !self.labels.is_empty() && self.labels.len() != self.generators.len() {
            return Err(QexError::InvalidArgument(format!(
                "{} labels for {} generators",
                self.labels.len(),
                self.generators.len()
            )));
        }
        for (index, p) in self.generators.iter().enumerate() {
            if p.len() != self.order {
                return Err(QexError::InvalidPermutation {
                    index,
                    reason: format!("has {} images, expected {}", p.len(), self.order),
                });
            }
            let mut seen = vec![false; self.order];
            for &img in p {
                if img >= self.order {
                    return Err(QexError::InvalidPermutation {
                        index,
                        reason: format!("image {img} out of range"),
                    });
                }
                if seen[img] {
                    return Err(QexError::InvalidPermutation {
                        index,
                        reason: format!("image {img} repeated"),
                    });
                }
                seen[img] = true;
            }
        }
        let mut reached = vec![false; self.order];
        reached[0] = true;
        let mut stack = vec![0];
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for p in &self.generators {
                let y = p[x];
                if !reached[y] {
                    reached[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        if count != self.order {
            return Err(QexError::NotTransitive {
                reached: count,
                order: self.order,
            });
        }
        Ok(())
    }

    /// `Z_m` with generators `x ↦ x + s (mod m)` for each step `s`.
    pub fn cyclic(m: usize, steps: &[i64]) -> Result<Self> {
        let generators = steps
            .iter()
            .map(|&s| {
                (0..m)
                    .map(|x| (x as i64 + s).rem_euclid(m as i64) as usize)
                    .collect()
            })
            .collect();
        let labels = steps.iter().map(|s| format!("{s:+}")).collect();
        Self::new(m, generators, labels)
    }

    /// Symmetric group `S_k` acting on itself by left multiplication. Elements
    /// are the permutations of `{0..k}` in lexicographic order; each generator
    /// is given as a permutation of `{0..k}`.
    pub fn symmetric(k: usize, gens: &[Vec<usize>]) -> Result<Self> {
        let elements = permutations(k);
        let index = |p: &[usize]| {
            elements
                .iter()
                .position(|q| q.as_slice() == p)
                .expect("element")
        };
        let mut generators = Vec::with_capacity(gens.len());
        let mut labels = Vec::with_capacity(gens.len());
        for (gi, t) in gens.iter().enumerate() {
            if t.len() != k {
                return Err(QexError::InvalidPermutation {
                    index: gi,
                    reason: format!("generator acts on {} points, expected {k}", t.len()),
                });
            }
            let mut sorted = t.clone();
            sorted.sort_unstable();
            if sorted != (0..k).collect::<Vec<_>>() {
                return Err(QexError::InvalidPermutation {
                    index: gi,
                    reason: "not a permutation".into(),
                });
            }
            let images = elements
                .iter()
                .map(|g| {
                    let tg: Vec<usize> = g.iter().map(|&x| t[x]).collect();
                    index(&tg)
                })
                .collect();
            generators.push(images);
            labels.push(format!("{t:?}"));
        }
        Self::new(elements.len(), generators, labels)
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s).map_err(|e| {
            QexError::Parse(format!(
                "group file line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        g.validate()?;
        Ok(g)
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn permutation_matrix(p: &[usize]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(p.len());
    for (x, &y) in p.iter().enumerate() {
        m[(y, x)] = c64::new(1.0, 0.0);
    }
    m
}

/// `n` independent Haar unitaries of size `N`.
pub fn haar_tuple(n: usize, dim: usize, rng: &RngSpec) -> Result<MatrixTuple> {
    if n == 0 || dim == 0 {
        return Err(QexError::InvalidArgument("n and N must be positive".into()));
    }
    let mut r = rng.rng();
    let members = (0..n).map(|_| haar_unitary(dim, &mut r)).collect();
    Ok(MatrixTuple::new(members)?.assume_unitary())
}

/// Left regular representation of the generators as permutation matrices.
pub fn cayley_regular_tuple(g: &GroupPresentation) -> Result<MatrixTuple> {
    g.validate()?;
    let members = g.generators.iter().map(|p| permutation_matrix(p)).collect();
    Ok(MatrixTuple::new(members)?.assume_unitary())
}

/// `‖Σ_j λ(t_j)` restricted to the complement of the constants`‖`.
///
/// Computed as the operator norm; for symmetric generating sets this is the
/// largest modulus of an eigenvalue on that subspace.
pub fn classical_gap(g: &GroupPresentation) -> Result<f64> {
    g.validate()?;
    let m = g.order;
    let mut a = ComplexMatrix::zeros(m);
    for p in &g.generators {
        for (x, &y) in p.iter().enumerate() {
            a[(y, x)] += c64::new(1.0, 0.0);
        }
    }
    let q = ComplexMatrix::from_fn(m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        c64::new(delta - 1.0 / m as f64, 0.0)
    });
    crate::linalg::operator_norm(&q.matmul(&a).matmul(&q))
}

/// `(I, X, Y, Z)` at `N = 2`.
pub fn pauli_tuple() -> MatrixTuple {
    MatrixTuple::new(pauli_matrices().to_vec())
        .expect("pauli matrices")
        .assume_unitary()
}

/// The `N²` clock-and-shift unitaries `X^a Z^b`, `0 ≤ a, b < N`.
///
/// They form an orthonormal basis for the normalized trace inner product,
/// so the averaging channel is the completely depolarizing one and the gap
/// on traceless matrices is zero.
pub fn weyl_tuple(dim: usize) -> Result<MatrixTuple> {
    if dim == 0 {
        return Err(QexError::InvalidArgument("N must be positive".into()));
    }
    let omega = |k: usize| {
        c64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * (k % dim) as f64 / dim as f64,
        )
    };
    let mut members = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            // (X^a Z^b) e_x = ω^{bx} e_{x+a}
            members.push(ComplexMatrix::from_fn(dim, |r, c| {
                if r == (c + a) % dim {
                    omega(b * c)
                } else {
                    c64::new(0.0, 0.0)
                }
            }));
        }
    }
    Ok(MatrixTuple::new(members)?.assume_unitary())
}

/// `n` copies of the identity of size `N`.
pub fn identity_tuple(n: usize, dim: usize) -> MatrixTuple {
    MatrixTuple::new(vec![ComplexMatrix::identity(dim); n.max(1)])
        .expect("identity tuple")
        .assume_unitary()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpanderCertificate {
    #[serde(skip)]
    pub tuple_ref: MatrixTuple,
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    /// `1 − gap/n`, clamped to `[0, 1]`; exactly 1 when the gap is below tol.
    pub epsilon: f64,
    /// `gap − 2√(n−1)`.
    pub ramanujan_slack: f64,
    pub gap: GapReport,
    pub tol: f64,
}

impl ExpanderCertificate {
    /// Whether the tuple is an `eps0`-quantum expander.
    pub fn is_expander(&self, eps0: f64) -> bool {
        self.epsilon >= eps0 - self.tol
    }

    /// Whether the tuple is `eps`-Ramanujan.
    pub fn is_ramanujan(&self, eps: f64) -> bool {
        self.ramanujan_slack <= eps * self.n as f64 + self.tol
    }
}

pub fn certify(u: &MatrixTuple, tol: f64) -> Result<ExpanderCertificate> {
    certify_with(u, tol, &NormOptions::default())
}

pub fn certify_with(u: &MatrixTuple, tol: f64, opts: &NormOptions) -> Result<ExpanderCertificate> {
    let gap = spectral_gap_with(u, opts)?;
    let n = u.n() as f64;
    let epsilon = if gap.value <= tol {
        1.0
    } else {
        (1.0 - gap.value / n).clamp(0.0, 1.0)
    };
    Ok(ExpanderCertificate {
        tuple_ref: u.clone(),
        n: u.n(),
        dim: u.dim(),
        epsilon,
        ramanujan_slack: gap.value - 2.0 * (n - 1.0).sqrt(),
        gap,
        tol,
    })
}

/// The averaging channel `Φ(x) = n⁻¹ Σ u_j x u_j*`.
pub fn channel(u: &MatrixTuple, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.dim() != u.dim() {
        return Err(QexError::DimensionMismatch {
            expected: u.dim(),
            found: x.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(u.dim());
    for m in u.iter() {
        out = &out + &m.matmul(x).matmul_adjoint(m);
    }
    Ok(out.scale_real(1.0 / u.n() as f64))
}

/// `‖Φᵏ(x₀) − τ_N(x₀)I‖_H` for `k = 0..=steps`.
pub fn mixing_curve(u: &MatrixTuple, x0: &ComplexMatrix, steps: usize) -> Result<Vec<f64>> {
    u.require_unitary("mixing_curve")?;
    if steps == 0 {
        return Err(QexError::InvalidArgument("steps must be at least 1".into()));
    }
    let tau = normalized_trace(x0);
    let mut x = x0.clone();
    let dist = |x: &ComplexMatrix| {
        let mut d = x.clone();
        for i in 0..d.dim() {
            d[(i, i)] -= tau;
        }
        crate::linalg::hs_norm(&d, true)
    };
    let mut curve = Vec::with_capacity(steps + 1);
    curve.push(dist(&x));
    for _ in 0..steps {
        x = channel(u, &x)?;
        curve.push(dist(&x));
    }
    Ok(curve)
}

/// Trace-zero part of `x`.
pub fn traceless_part(x: &ComplexMatrix) -> ComplexMatrix {
    let mut d = x.clone();
    project_h0(&mut d);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_ginibre;
    use crate::superop::NormMethod;

    #[test]
    fn weyl_tuple_is_perfect() {
        for dim in [2, 3, 4] {
            let w = weyl_tuple(dim).unwrap();
            assert_eq!(w.n(), dim * dim);
            assert!(w.max_unitarity_residual() < 1e-12);
            let g = spectral_gap_with(&w, &NormOptions::with_method(NormMethod::Dense)).unwrap();
            assert!(g.value < 1e-9, "N={dim} gap {}", g.value);
        }
    }

    #[test]
    fn z5_generators_are_circulant() {
        let g = GroupPresentation::cyclic(5, &[1, -1]).unwrap();
        let t = cayley_regular_tuple(&g).unwrap();
        assert_eq!((t.n(), t.dim()), (2, 5));
        for x in 0..5 {
            assert_eq!(t[0][((x + 1) % 5, x)], c64::new(1.0, 0.0));
            assert_eq!(t[1][((x + 4) % 5, x)], c64::new(1.0, 0.0));
        }
        assert!(t.max_unitarity_residual() < 1e-15);
    }

    #[test]
    fn cyclic_classical_gap_matches_characters() {
        for m in 3..12 {
            let g = GroupPresentation::cyclic(m, &[1, -1]).unwrap();
            let expect = (1..m)
                .map(|k| (2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos()).abs())
                .fold(0.0, f64::max);
            assert!((classical_gap(&g).unwrap() - expect).abs() < 1e-10, "m={m}");
        }
        let z2 = GroupPresentation::cyclic(2, &[1, 1]).unwrap();
        assert!((classical_gap(&z2).unwrap() - 2.0).abs() < 1e-12);
        let z3 = GroupPresentation::cyclic(3, &[1, -1]).unwrap();
        assert!((classical_gap(&z3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_presentations() {
        assert!(matches!(
            GroupPresentation::new(3, vec![vec![0, 0, 1]], vec![]),
            Err(QexError::InvalidPermutation { index: 0, .. })
        ));
        assert!(matches!(
            GroupPresentation::new(4, vec![vec![1, 0, 2, 3]], vec![]),
            Err(QexError::NotTransitive {
                reached: 2,
                order: 4
            })
        ));
        assert!(GroupPresentation::from_json(
            r#"{"order": 2, "generators": [[1, 0]], "extra": 1}"#
        )
        .is_err());
    }

    #[test]
    fn certificate_examples() {
        let c = certify(&pauli_tuple(), 1e-9).unwrap();
        assert_eq!(c.epsilon, 1.0);
        assert!((c.ramanujan_slack + 2.0 * 3f64.sqrt()).abs() < 1e-8);
        let c = certify(&identity_tuple(3, 4), 1e-9).unwrap();
        assert!(c.epsilon.abs() < 1e-12);
    }

    #[test]
    fn mixing_examples() {
        let x0 = sample_ginibre(2, &RngSpec::new(4, 0));
        let c = mixing_curve(&pauli_tuple(), &x0, 5).unwrap();
        assert!(c[0] > 0.1 && c[1..].iter().all(|&v| v < 1e-14));
        let x0 = sample_ginibre(3, &RngSpec::new(5, 0));
        let c = mixing_curve(&identity_tuple(2, 3), &x0, 5).unwrap();
        assert!(c.iter().all(|&v| (v - c[0]).abs() < 1e-14));
    }

    #[test]
    fn certified_expander_mixes_at_its_rate() {
        let u = haar_tuple(6, 4, &RngSpec::new(8, 0)).unwrap();
        let cert = certify_with(&u, 1e-10, &NormOptions::with_method(NormMethod::Dense)).unwrap();
        assert!(cert.epsilon > 0.0);
        let x0 = sample_ginibre(4, &RngSpec::new(9, 0));
        let c = mixing_curve(&u, &x0, 40).unwrap();
        for (k, v) in c.iter().enumerate() {
            assert!(*v <= (1.0 - cert.epsilon).powi(k as i32) * c[0] + 1e-9);
        }
    }
}
