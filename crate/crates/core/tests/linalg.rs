use proptest::prelude::*;
use qex_core::linalg::{
    ginibre, haar_unitary, hs_norm, inverse, normalized_trace, operator_norm, polar, polar_unitary,
    sample_ginibre, sample_haar_unitary, singular_values, svd, trace_norm,
};
use qex_core::{c64, ComplexMatrix, RngSpec};

/// Haar unitary by Gram–Schmidt on a Ginibre matrix with the diagonal phases
/// of the triangular factor removed. Independent of the library sampler.
fn haar_by_gram_schmidt(dim: usize, spec: &RngSpec) -> ComplexMatrix {
    let g = sample_ginibre(dim, spec);
    let mut cols: Vec<Vec<c64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v: Vec<c64> = (0..dim).map(|r| g[(r, c)]).collect();
        for q in &cols {
            let proj: c64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, qa) in v.iter_mut().zip(q) {
                *x -= proj * qa;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r])
}

fn trace_power_moment(sample: impl Fn(u64) -> ComplexMatrix, k: i32, m: u64) -> f64 {
    (0..m)
        .map(|s| sample(s).trace().norm_sqr().powi(k))
        .sum::<f64>()
        / m as f64
}

#[test]
fn haar_trace_moments_match_oracle() {
    // E|tr U|^{2k} = k! for k ≤ N.
    let m = 20_000;
    let lib = |s| sample_haar_unitary(4, &RngSpec::new(1, s));
    let gs = |s| haar_by_gram_schmidt(4, &RngSpec::new(2, s));
    for (k, exact) in [(1, 1.0), (2, 2.0)] {
        let a = trace_power_moment(lib, k, m);
        let b = trace_power_moment(gs, k, m);
        assert!((a - exact).abs() < 0.1 * exact, "library k={k}: {a}");
        assert!((b - exact).abs() < 0.1 * exact, "gram-schmidt k={k}: {b}");
    }
}

#[test]
fn haar_entry_second_moment() {
    let m = 5_000;
    let mean: f64 = (0..m)
        .map(|s| sample_haar_unitary(5, &RngSpec::new(3, s))[(2, 3)].norm_sqr())
        .sum::<f64>()
        / m as f64;
    assert!((mean - 0.2).abs() < 0.01, "{mean}");
}

#[test]
fn ginibre_normalization() {
    // E τ(Y*Y) = 1.
    let m = 2_000;
    let mean: f64 = (0..m)
        .map(|s| {
            let y = sample_ginibre(6, &RngSpec::new(4, s));
            normalized_trace(&y.adjoint_matmul(&y)).re
        })
        .sum::<f64>()
        / m as f64;
    assert!((mean - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn sampling_is_deterministic() {
    let spec = RngSpec::new(77, 1);
    assert_eq!(sample_haar_unitary(7, &spec), sample_haar_unitary(7, &spec));
    assert_eq!(
        haar_unitary(3, &mut spec.rng()),
        haar_unitary(3, &mut spec.rng())
    );
    assert_ne!(sample_ginibre(3, &spec), sample_ginibre(3, &spec.child(0)));
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polar_factors(seed in any::<u64>(), dim in 1usize..7) {
        let m = ginibre(dim, &mut RngSpec::new(seed, 0).rng());
        let (w, p) = polar(&m).unwrap();
        prop_assert!(w.unitarity_residual() < 1e-10);
        prop_assert!(close(&w.matmul(&p), &m, 1e-10));
        prop_assert!(close(&p, &p.adjoint(), 1e-10));
        prop_assert!(close(&polar_unitary(&m).unwrap(), &w, 1e-10));
        // P = |M| is positive: its trace is the trace norm.
        prop_assert!((p.trace().re - trace_norm(&m).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), dim in 1usize..7) {
        let m = sample_ginibre(dim, &RngSpec::new(seed, 1));
        let d = svd(&m).unwrap();
        prop_assert!(close(&d.reconstruct(), &m, 1e-10));
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((d.s[0] - operator_norm(&m).unwrap()).abs() < 1e-12);
        // Frobenius norm from the spectrum.
        let f: f64 = d.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((f - m.frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn hs_norm_is_unitarily_invariant(seed in any::<u64>(), dim in 1usize..7) {
        let spec = RngSpec::new(seed, 2);
        let m = sample_ginibre(dim, &spec.child(0));
        let a = sample_haar_unitary(dim, &spec.child(1));
        let b = sample_haar_unitary(dim, &spec.child(2));
        let moved = a.matmul(&m).matmul(&b);
        prop_assert!((hs_norm(&moved, true) - hs_norm(&m, true)).abs() < 1e-10);
        prop_assert!((hs_norm(&m, false) - m.frobenius_norm()).abs() < 1e-12);
        let s1 = singular_values(&m).unwrap();
        let s2 = singular_values(&moved).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), p in 1usize..4, q in 1usize..4) {
        let spec = RngSpec::new(seed, 3);
        let (a, c) = (sample_ginibre(p, &spec.child(0)), sample_ginibre(p, &spec.child(1)));
        let (b, d) = (sample_ginibre(q, &spec.child(2)), sample_ginibre(q, &spec.child(3)));
        let lhs = a.kron(&b).matmul(&c.kron(&d));
        let rhs = a.matmul(&c).kron(&b.matmul(&d));
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn trace_norm_product_inequality(seed in any::<u64>(), dim in 1usize..7) {
        // tr|W| tr|W⁻¹| ≥ N², equality for scaled unitaries.
        let w = sample_ginibre(dim, &RngSpec::new(seed, 4));
        let prod = trace_norm(&w).unwrap() * trace_norm(&inverse(&w).unwrap()).unwrap();
        prop_assert!(prod >= (dim * dim) as f64 * (1.0 - 1e-10));
        let u = sample_haar_unitary(dim, &RngSpec::new(seed, 5)).scale_real(2.5);
        let eq = trace_norm(&u).unwrap() * trace_norm(&inverse(&u).unwrap()).unwrap();
        prop_assert!((eq - (dim * dim) as f64).abs() < 1e-9);
    }

    #[test]
    fn inner_product_is_hermitian(seed in any::<u64>(), dim in 1usize..6) {
        let a = sample_ginibre(dim, &RngSpec::new(seed, 6));
        let b = sample_ginibre(dim, &RngSpec::new(seed, 7));
        prop_assert!((a.inner(&b) - b.inner(&a).conj()).norm() < 1e-10);
        prop_assert!((a.inner(&a).re - a.frobenius_norm().powi(2)).abs() < 1e-9);
    }
}
