use krylov_core::dynamics::{amplitudes, TimeGrid};
use krylov_core::ensemble::{sample_gue, uniform_eigenstate_superposition, EnsembleSpec};
use krylov_core::krylov::{build_basis, GeneratorOrder};
use krylov_core::linalg::{hermitian_eigendecompose, matrix_function, orthonormalize, ComplexMatrix, StateVector};
use krylov_core::Complex64;
use proptest::prelude::*;

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |raw| {
        let a = ComplexMatrix::from_fn(dim, dim, |i, j| {
            let k = 2 * (i * dim + j);
            Complex64::new(raw[k], raw[k + 1])
        });
        a.add_scaled(&a.adjoint(), Complex64::new(1.0, 0.0)).unwrap().scaled(Complex64::new(0.5, 0.0))
    })
}

fn any_hermitian() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..=7).prop_flat_map(hermitian)
}

fn vectors(dim: usize, count: usize) -> impl Strategy<Value = Vec<StateVector>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2 * dim), count).prop_map(|vs| {
        vs.into_iter()
            .map(|raw| StateVector::new(raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_round_trips(h in any_hermitian()) {
        let eig = hermitian_eigendecompose(&h).unwrap();
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &eig.eigenvectors;
        let gram = v.adjoint().matmul(v).unwrap();
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(h.rows())) <= 1e-10);
        prop_assert!(eig.reconstruct().max_abs_diff(&h) <= 1e-9 * h.max_abs().max(1e-300));
    }

    #[test]
    fn forward_and_backward_evolution_compose_to_identity(h in any_hermitian(), t in -5.0f64..5.0) {
        let fwd = matrix_function(&h, |x| Complex64::new(0.0, -x * t).exp()).unwrap();
        let bwd = matrix_function(&h, |x| Complex64::new(0.0, x * t).exp()).unwrap();
        let id = ComplexMatrix::identity(h.rows());
        prop_assert!(fwd.matmul(&bwd).unwrap().max_abs_diff(&id) <= 1e-9);
        prop_assert!(fwd.adjoint().matmul(&fwd).unwrap().max_abs_diff(&id) <= 1e-10);
    }

    #[test]
    fn orthonormalize_is_orthonormal_and_spans_inputs(
        (dim, vs) in (2usize..=6, 1usize..=9).prop_flat_map(|(d, c)| (Just(d), vectors(d, c)))
    ) {
        let tol = 1e-8;
        let out = orthonormalize(&vs, tol).unwrap();
        prop_assert!(out.basis.len() <= dim);
        prop_assert!(out.kept_indices.windows(2).all(|w| w[0] < w[1]));
        for (i, bi) in out.basis.iter().enumerate() {
            for (j, bj) in out.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((bi.inner(bj) - Complex64::new(expected, 0.0)).norm() <= 1e-10);
            }
        }
        for v in &vs {
            let mut proj = StateVector::zeros(dim);
            for b in &out.basis {
                proj.axpy(b.inner(v), b);
            }
            prop_assert!(proj.max_abs_diff(v) <= tol * v.norm().max(1.0) * 10.0);
        }
    }

    #[test]
    fn grade_never_drops_when_tolerance_shrinks(seed in 0u64..1000, dim in 3usize..=8, order in 1u32..=4) {
        let h = sample_gue(&EnsembleSpec::new(dim, seed)).unwrap();
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let order = if order == 4 { GeneratorOrder::Infinite } else { GeneratorOrder::Finite(order) };
        let mut last = 0;
        for tol in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
            let grade = build_basis(&h, order, 0.7, &psi, tol).unwrap().grade();
            prop_assert!(grade >= last);
            last = grade;
        }
    }

    #[test]
    fn unitary_steps_stay_in_leading_subspace(seed in 0u64..1000, dim in 3usize..=8, dt in 0.05f64..1.5) {
        let h = sample_gue(&EnsembleSpec::new(dim, seed).normalized(true)).unwrap();
        let sup = uniform_eigenstate_superposition(&h).unwrap();
        prop_assume!(!sup.degenerate);
        let basis = build_basis(&h, GeneratorOrder::Infinite, dt, &sup.state, 1e-8).unwrap();
        let grid = TimeGrid::new(0.0, dt * (basis.grade() - 1) as f64, basis.grade()).unwrap();
        let trace = amplitudes(&basis, &h, &sup.state, &grid).unwrap();
        for (k, row) in trace.amplitudes_sq.iter().enumerate() {
            let outside: f64 = row[k + 1..].iter().sum();
            prop_assert!(outside.sqrt() <= 1e-10, "k={k} outside={outside}");
        }
    }

    #[test]
    fn trace_rows_are_normalized(seed in 0u64..1000, dim in 2usize..=8, order in 1u32..=4, dt in 0.1f64..3.0) {
        let h = sample_gue(&EnsembleSpec::new(dim, seed)).unwrap();
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let order = if order == 4 { GeneratorOrder::Infinite } else { GeneratorOrder::Finite(order) };
        let basis = build_basis(&h, order, dt, &psi, 1e-8).unwrap();
        prop_assume!(basis.grade() == dim);
        let trace = amplitudes(&basis, &h, &psi, &TimeGrid::new(0.0, 10.0, 101).unwrap()).unwrap();
        prop_assert!(trace.max_row_sum_error() <= 1e-9);
        prop_assert!(trace.complexity.iter().all(|&c| (0.0..=(dim - 1) as f64 + 1e-9).contains(&c)));
    }

    #[test]
    fn sampling_is_a_pure_function_of_its_spec(seed: u64, dim in 2usize..=10, norm: bool) {
        let spec = EnsembleSpec::new(dim, seed).normalized(norm);
        prop_assert_eq!(sample_gue(&spec).unwrap(), sample_gue(&spec).unwrap());
    }
}
