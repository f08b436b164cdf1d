use nalgebra::DMatrix;
use nhqmc_core::dense::{is_hermitian, kron, max_abs_diff, vectorize, CMatrix};
use nhqmc_core::kernel::{truncation_kc, KernelFamily};
use nhqmc_core::lindblad::{exact_reference, vectorize_model, LindbladModel, OpenSystemObservable};
use nhqmc_core::model::NonHermitianModel;
use nhqmc_core::pauli::{PauliString, PauliSum};
use nhqmc_core::propagate::{evolve_exact, evolve_trotter1, propagate, PropagatorSpec, StateVector};
use nhqmc_core::rng::draw_rng;
use nhqmc_core::schedule::Schedule;
use nhqmc_core::C64;
use proptest::prelude::*;

fn label(n: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n).prop_map(|v| v.into_iter().collect())
}

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((coeff(), label(n)), 1..6)
        .prop_map(|terms| PauliSum::from_labels(terms.iter().map(|(c, l)| (*c, l.as_str()))).unwrap())
}

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(coeff(), dim * dim).prop_map(move |v| DMatrix::from_row_slice(dim, dim, &v))
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(coeff(), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|c| c.norm() > 1e-3))
        .prop_map(|v| StateVector::from_amplitudes(v).unwrap().normalized().unwrap())
}

fn density(dim: usize) -> impl Strategy<Value = CMatrix> {
    matrix(dim).prop_map(|a| {
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    })
}

// scaling and squaring over a truncated Taylor series
fn expm(a: &CMatrix) -> CMatrix {
    let s = a.norm().log2().ceil().max(0.0) as i32 + 1;
    let b = a / C64::new(2f64.powi(s), 0.0);
    let n = a.nrows();
    let (mut sum, mut term) = (CMatrix::identity(n, n), CMatrix::identity(n, n));
    for k in 1..30 {
        term = &term * &b / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiply_respects_dense(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = proptest::test_runner::TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &seed.to_le_bytes().repeat(4));
        let pick = |rng: &mut proptest::test_runner::TestRng| -> String {
            (0..n).map(|_| ['I', 'X', 'Y', 'Z'][(rng.next_u32() % 4) as usize]).collect()
        };
        let p: PauliString = pick(&mut rng).parse().unwrap();
        let q: PauliString = pick(&mut rng).parse().unwrap();
        let (phase, r) = p.multiply(&q).unwrap();
        let lhs = p.to_matrix().unwrap() * q.to_matrix().unwrap();
        let rhs = r.to_matrix().unwrap() * phase;
        prop_assert_eq!(max_abs_diff(&lhs, &rhs), 0.0);
    }

    #[test]
    fn decompose_round_trips(s in pauli_sum(3), m in matrix(4)) {
        let back = PauliSum::decompose(&s.to_matrix().unwrap()).unwrap();
        prop_assert!(max_abs_diff(&back.to_matrix().unwrap(), &s.to_matrix().unwrap()) < 1e-12);
        for t in s.terms() {
            prop_assert!((back.coeff_of(&t.string) - t.coeff).norm() < 1e-12);
        }
        let again = PauliSum::decompose(&m).unwrap().to_matrix().unwrap();
        prop_assert!(max_abs_diff(&again, &m) < 1e-12);
    }

    #[test]
    fn l1_is_absolutely_homogeneous(s in pauli_sum(2), a in coeff()) {
        prop_assert!((s.scaled(a).l1_norm() - a.norm() * s.l1_norm()).abs() < 1e-12 * (1.0 + s.l1_norm()));
    }

    #[test]
    fn hermitian_split_reconstructs(s in pauli_sum(2)) {
        let (hr, hi) = s.hermitian_split();
        let (mr, mi) = (hr.to_matrix().unwrap(), hi.to_matrix().unwrap());
        prop_assert!(is_hermitian(&mr, 1e-12) && is_hermitian(&mi, 1e-12));
        let rebuilt = &mr - &mi * C64::new(0.0, 1.0);
        prop_assert!(max_abs_diff(&rebuilt, &s.to_matrix().unwrap()) < 1e-12);
        prop_assert!(hr.terms().iter().chain(hi.terms()).all(|t| t.coeff.im == 0.0));
    }

    #[test]
    fn k_generator_is_hermitian_and_shift_consistent(s in pauli_sum(2), k in -50.0..50.0f64, e in -3.0..3.0f64) {
        let m = NonHermitianModel::from_complex_sum(&s).unwrap();
        let kg = m.k_generator_at(k, 0.0);
        prop_assert!(is_hermitian(&kg.to_matrix().unwrap(), 1e-12));
        let base = m.clone().with_shift(Schedule::Constant(0.0));
        let shifted = m.with_shift(Schedule::Constant(e));
        let diff = shifted.k_generator_at(k, 0.0).add(&base.k_generator_at(k, 0.0).scaled(C64::new(-1.0, 0.0))).unwrap();
        let want = PauliSum::identity(2).scaled(C64::new(-k * e, 0.0));
        prop_assert!(diff.add(&want.scaled(C64::new(-1.0, 0.0))).unwrap().l1_norm() <= 1e-12 * (1.0 + (k * e).abs()));
    }

    #[test]
    fn bandwidth_ignores_shift(s in pauli_sum(2), e in -3.0..3.0f64) {
        let m = NonHermitianModel::from_complex_sum(&s).unwrap();
        let a = m.spectral_summary(1.0, 3).unwrap().delta;
        let b = m.with_shift(Schedule::Constant(e)).spectral_summary(1.0, 3).unwrap().delta;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn propagators_preserve_norm(h in pauli_sum(2), psi in state(2), seed in any::<u64>()) {
        let (hr, _) = h.hermitian_split();
        let gen = nhqmc_core::propagate::Generator::from_sum(&hr).unwrap();
        let times = [0.3, 1.0];
        for spec in [
            PropagatorSpec::Exact,
            PropagatorSpec::Trotter1 { dt: 0.07 },
            PropagatorSpec::Qdrift { dt: 0.07 },
            PropagatorSpec::Continuous { tau: 0.2 },
        ] {
            for snap in propagate(&spec, &gen, &psi, &times, &mut draw_rng(seed, 0, 0)).unwrap() {
                prop_assert!((snap.state.norm() - 1.0).abs() < 1e-10, "{:?}", spec);
            }
        }
        let _ = evolve_trotter1(&gen, 1.0, 0.1, &psi).unwrap();
        let _ = evolve_exact(&gen, 1.0, &psi).unwrap();
    }

    #[test]
    fn truncation_length_is_monotone(e1 in 1e-4..0.5f64, e2 in 1e-4..0.5f64) {
        prop_assume!((e1 - e2).abs() > 1e-6);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(truncation_kc(KernelFamily::Cauchy, lo).unwrap() > truncation_kc(KernelFamily::Cauchy, hi).unwrap());
    }

    #[test]
    fn vectorization_maps_products_to_kron(a in matrix(2), b in matrix(2), rho in matrix(2)) {
        let lhs = kron(&a, &b.transpose()) * vectorize(&rho);
        prop_assert!((lhs - vectorize(&(&a * &rho * &b))).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_pairing_matches_vectorized_flow(
        o in matrix(4).prop_filter("nonzero", |m| m.norm() > 1e-2),
        rho in density(4),
        g in matrix(4),
        h in pauli_sum(2),
    ) {
        let o = (&o + o.adjoint()) * C64::new(0.5, 0.0);
        prop_assume!(o.norm() > 1e-2);
        let (hr, _) = h.hermitian_split();
        let model = LindbladModel::new(hr, vec![g * C64::new(0.3, 0.0)]).unwrap();
        let obs = OpenSystemObservable::new(&o, &rho).unwrap();
        let gen = vectorize_model(&model).unwrap();
        prop_assert!(gen.trace_residual() < 1e-10);
        let t = 0.4;
        let rho_t = &exact_reference(&model, &rho, &[t]).unwrap()[0];
        let direct = (&o * rho_t).trace();
        let flowed = expm(&(gen.dense() * C64::new(t, 0.0))) * vectorize(&rho);
        let ket = flowed / C64::new(rho.norm(), 0.0);
        let bra = obs.bra.to_vector();
        let via = bra.dotc(&ket) * obs.prefactor;
        prop_assert!((direct - via).norm() < 1e-8 * (1.0 + direct.norm()), "{direct} vs {via}");
    }
}
