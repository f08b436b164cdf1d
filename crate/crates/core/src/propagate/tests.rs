use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::dense::{max_abs_diff, CMatrix, CVector, HermitianEigen};
use crate::rng::draw_rng;
use crate::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn gen(terms: &[(f64, &str)]) -> Generator {
    Generator::from_sum(&PauliSum::from_labels(terms.iter().map(|(v, l)| (c(*v), *l))).unwrap()).unwrap()
}

fn dist(a: &StateVector, b: &StateVector) -> f64 {
    let mut d = a.clone();
    d.axpy(c(-1.0), b);
    d.norm()
}

#[test]
fn rotation_examples() {
    let x: PauliString = "X".parse().unwrap();
    let zero = StateVector::from_bits("0").unwrap();
    let out = apply_pauli_rotation(&zero, &x, core::f64::consts::FRAC_PI_2);
    assert!((out.amplitudes()[1] - C64::new(0.0, -1.0)).norm() < 1e-15);
    assert!(out.amplitudes()[0].norm() < 1e-15);
    assert_eq!(apply_pauli_rotation(&zero, &x, 0.0), zero);
}

#[test]
fn rotation_matches_dense_exponential() {
    let mut rng = draw_rng(3, 0, 0);
    use rand::Rng;
    for _ in 0..20 {
        let label: alloc::string::String =
            (0..3).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect();
        let s: PauliString = label.parse().unwrap();
        let theta = rng.random_range(-3.0..3.0);
        let amps: Vec<C64> = (0..8).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi = StateVector::from_amplitudes(amps).unwrap();
        let m = s.to_matrix().unwrap();
        let u = CMatrix::identity(8, 8) * c(libm::cos(theta)) - m * C64::new(0.0, libm::sin(theta));
        let want = StateVector::from_vector(&(u * psi.to_vector())).unwrap();
        let got = apply_pauli_rotation(&psi, &s, theta);
        assert!(dist(&got, &want) < 1e-12, "{label}");
        assert!((got.norm() - psi.norm()).abs() < 1e-12);
    }
}

#[test]
fn apply_sum_matches_dense() {
    let h = PauliSum::from_labels([(C64::new(0.3, -0.2), "XY"), (c(1.1), "ZI"), (C64::new(0.0, 0.5), "YY")]).unwrap();
    let psi = StateVector::from_bits("+-").unwrap();
    let want = h.to_matrix().unwrap() * psi.to_vector();
    let got = psi.apply_sum(&h).to_vector();
    assert!((got - want).norm() < 1e-14);
}

#[test]
fn exact_examples() {
    let zero = StateVector::from_bits("0").unwrap();
    let out = evolve_exact(&gen(&[(1.0, "Z")]), 0.7, &zero).unwrap();
    assert!((out.amplitudes()[0] - C64::from_polar(1.0, -0.7)).norm() < 1e-14);
    let out = evolve_exact(&gen(&[(1.0, "X")]), core::f64::consts::FRAC_PI_2, &zero).unwrap();
    assert!((out.amplitudes()[1] - C64::new(0.0, -1.0)).norm() < 1e-14);
}

fn sin_x() -> Generator {
    let x: PauliString = "X".parse().unwrap();
    Generator::new(1, [(x, crate::schedule::Schedule::harmonic(0.0, 1.0, 1.0, 0.0).unwrap())]).unwrap()
}

#[test]
fn time_dependent_exact_matches_closed_form() {
    // K = sin(t) X commutes with itself: U = exp(-i (1 - cos T) X)
    let zero = StateVector::from_bits("0").unwrap();
    let t = 2.0;
    let out = evolve_exact(&sin_x(), t, &zero).unwrap();
    let phi = 1.0 - libm::cos(t);
    assert!((out.amplitudes()[0] - c(libm::cos(phi))).norm() < 1e-10);
    assert!((out.amplitudes()[1] - C64::new(0.0, -libm::sin(phi))).norm() < 1e-10);
}

#[test]
fn trotter_is_exact_for_commuting_terms() {
    let g = gen(&[(0.7, "ZZ"), (-0.4, "ZI"), (1.3, "IZ")]);
    let psi = StateVector::from_bits("+-").unwrap();
    let exact = evolve_exact(&g, 1.3, &psi).unwrap();
    for dt in [1.3, 0.1, 0.013] {
        assert!(dist(&evolve_trotter1(&g, 1.3, dt, &psi).unwrap(), &exact) < 1e-10);
    }
}

#[test]
fn trotter_error_is_first_order() {
    let g = gen(&[(1.0, "X"), (1.0, "Z")]);
    let psi = StateVector::from_bits("0").unwrap();
    let exact = evolve_exact(&g, 1.0, &psi).unwrap();
    let e1 = dist(&evolve_trotter1(&g, 1.0, 0.02, &psi).unwrap(), &exact);
    let e2 = dist(&evolve_trotter1(&g, 1.0, 0.01, &psi).unwrap(), &exact);
    let slope = libm::log2(e1 / e2);
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
    let one = dist(&evolve_trotter1(&g, 1.0, 1.0, &psi).unwrap(), &exact);
    // first-order bound ½ T² ‖[X, Z]‖ = 1
    assert!(one > 1e-3 && one <= 1.0);
}

#[test]
fn trotter_snapshots_match_single_runs() {
    let g = gen(&[(1.0, "X"), (0.5, "Z")]);
    let psi = StateVector::from_bits("0").unwrap();
    let times = [0.0, 0.05, 0.3, 0.33];
    let snaps = evolve_trotter1_at(&g, &times, 0.05, &psi).unwrap();
    for (s, &t) in snaps.iter().zip(&times) {
        assert!(dist(s, &evolve_trotter1(&g, t, 0.05, &psi).unwrap()) < 1e-14);
    }
}

#[test]
fn qdrift_single_term_is_exact() {
    let g = gen(&[(-0.8, "Y")]);
    let psi = StateVector::from_bits("0").unwrap();
    let mut rng = draw_rng(1, 0, 0);
    let got = evolve_qdrift(&g, 1.7, 0.1, &mut rng, &psi).unwrap();
    assert!(dist(&got, &evolve_exact(&g, 1.7, &psi).unwrap()) < 1e-12);
}

fn z_expectation(s: &StateVector) -> f64 {
    s.amplitudes()[0].norm_sqr() - s.amplitudes()[1].norm_sqr()
}

#[test]
fn qdrift_mean_tracks_exact() {
    let g = gen(&[(1.0, "X"), (1.0, "Z")]);
    let psi = StateVector::from_bits("0").unwrap();
    let exact = z_expectation(&evolve_exact(&g, 1.0, &psi).unwrap());
    let n = 10_000;
    let vals: Vec<f64> = (0..n)
        .map(|i| z_expectation(&evolve_qdrift(&g, 1.0, 1.0 / 400.0, &mut draw_rng(2, 0, i), &psi).unwrap()))
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let se = libm::sqrt(vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ((n - 1) * n) as f64);
    assert!((mean - exact).abs() < 3.0 * se + 4.0 / 400.0, "{mean} vs {exact} ± {se}");
}

#[test]
fn continuous_counts_and_attenuation() {
    let g = gen(&[(2.0, "X")]);
    let tau = 0.05;
    let seq = sample_continuous_sequence(&g, 2.0, tau, &mut draw_rng(4, 0, 0)).unwrap();
    assert!((seq.attenuation() - libm::exp(-4.0 * libm::tan(0.025))).abs() < 1e-12);
    assert!((seq.attenuation() - 0.904_82).abs() < 1e-5);
    assert!(seq.events.windows(2).all(|w| w[0].t <= w[1].t));
    assert!(seq.events.iter().all(|e| (e.angle - tau).abs() < 1e-15));
    let n = 20_000;
    let counts: Vec<f64> = (0..n)
        .map(|i| sample_continuous_sequence(&g, 2.0, tau, &mut draw_rng(4, 1, i)).unwrap().events.len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let want = 4.0 / libm::sin(tau);
    assert!((mean - want).abs() < 3.0 * libm::sqrt(want / n as f64));

    let empty = Generator::new(1, []).unwrap();
    let seq = sample_continuous_sequence(&empty, 2.0, tau, &mut draw_rng(4, 2, 0)).unwrap();
    assert!(seq.events.is_empty() && seq.attenuation() == 1.0);
}

#[test]
fn thinning_reproduces_integrated_counts() {
    let g = sin_x();
    let tau = 0.1;
    let horizon = 3.0;
    let n = 20_000;
    let counts: Vec<f64> = (0..n)
        .map(|i| sample_continuous_sequence(&g, horizon, tau, &mut draw_rng(8, 0, i)).unwrap().events.len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let integral = 1.0 - libm::cos(horizon);
    let want = integral / libm::sin(tau);
    assert!((mean - want).abs() < 3.0 * libm::sqrt(want / n as f64), "{mean} vs {want}");
}

#[test]
fn sequence_application_basics() {
    let psi = StateVector::from_bits("01").unwrap();
    let empty = GateSequence { events: vec![], horizon: 1.0, log_attenuation: 0.0, phase: 0.0 };
    assert_eq!(apply_sequence(&empty, &psi), psi);
    let s: PauliString = "XY".parse().unwrap();
    let one = GateSequence {
        events: vec![GateEvent { t: 0.2, string: s, angle: 0.05 }],
        horizon: 1.0,
        log_attenuation: 0.0,
        phase: 0.0,
    };
    assert_eq!(apply_sequence(&one, &psi), apply_pauli_rotation(&psi, &s, 0.05));
}

#[test]
fn continuous_mean_reconstructs_exact_evolution() {
    let g = gen(&[(1.0, "XI"), (1.0, "ZZ")]);
    let psi = StateVector::from_bits("00").unwrap();
    let tau = 0.05;
    let n = 20_000u64;
    let mut sum = psi.zeros_like();
    let mut sq = vec![0.0; 2 * psi.dim()];
    let mut scale = 0.0;
    for i in 0..n {
        let seq = sample_continuous_sequence(&g, 1.0, tau, &mut draw_rng(9, 0, i)).unwrap();
        scale = 1.0 / seq.attenuation();
        let v = apply_sequence(&seq, &psi);
        sum.axpy(c(1.0), &v);
        for (j, a) in v.amplitudes().iter().enumerate() {
            sq[2 * j] += a.re * a.re;
            sq[2 * j + 1] += a.im * a.im;
        }
    }
    let nf = n as f64;
    let exact = evolve_exact(&g, 1.0, &psi).unwrap();
    for (j, a) in sum.amplitudes().iter().enumerate() {
        let m = a / nf;
        let se_re = libm::sqrt((sq[2 * j] / nf - m.re * m.re) / (nf - 1.0)) * scale;
        let se_im = libm::sqrt((sq[2 * j + 1] / nf - m.im * m.im) / (nf - 1.0)) * scale;
        let e = exact.amplitudes()[j];
        assert!((m.re * scale - e.re).abs() < 3.5 * se_re + 1e-12);
        assert!((m.im * scale - e.im).abs() < 3.5 * se_im + 1e-12);
    }
}

#[test]
fn gate_identity_holds_only_with_one_minus_p() {
    let mut rng = draw_rng(10, 0, 0);
    use rand::Rng;
    for _ in 0..100 {
        let cc = rng.random_range(-3.0..3.0);
        let tau = rng.random_range(0.01..1.5);
        let dtau = rng.random_range(1e-4..0.05);
        assert!(gate_identity_residual(cc, tau, dtau, -1.0) < 1e-12);
        assert!(gate_identity_residual(cc, tau, dtau, 1.0) > 1e-6);
    }
}

#[test]
fn identity_terms_are_global_phases() {
    let g = gen(&[(0.4, "II"), (0.9, "XZ")]);
    let psi = StateVector::from_bits("10").unwrap();
    let exact = evolve_exact(&g, 1.5, &psi).unwrap();
    assert!(dist(&evolve_trotter1(&g, 1.5, 0.1, &psi).unwrap(), &exact) < 1e-12);
    assert!(dist(&evolve_qdrift(&g, 1.5, 0.1, &mut draw_rng(0, 0, 0), &psi).unwrap(), &exact) < 1e-12);
    let snaps = propagate(&PropagatorSpec::Continuous { tau: 0.1 }, &g, &psi, &[1.5], &mut draw_rng(0, 0, 0)).unwrap();
    let seq = sample_continuous_sequence(&g, 1.5, 0.1, &mut draw_rng(0, 0, 0)).unwrap();
    assert!((seq.phase - 0.6).abs() < 1e-15);
    assert!(dist(&snaps[0].state, &apply_sequence(&seq, &psi)) < 1e-14);
    assert!((snaps[0].log_weight + seq.log_attenuation).abs() < 1e-15);
}

#[test]
fn eigen_evolver_consistency() {
    let g = gen(&[(0.3, "XX"), (-1.2, "ZI"), (0.5, "YZ")]);
    let m = g.at(0.0).to_matrix().unwrap();
    let eig = HermitianEigen::new(&m).unwrap();
    let psi = StateVector::from_bits("1+").unwrap();
    let want = eig.evolve(&psi.to_vector(), 0.9);
    let got: CVector = evolve_exact(&g, 0.9, &psi).unwrap().to_vector();
    assert!(max_abs_diff(&CMatrix::from_column_slice(4, 1, got.as_slice()), &CMatrix::from_column_slice(4, 1, want.as_slice())) < 1e-13);
}
