use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_tau::gl_kernel::riesz_first_column;
use riesz_tau::krylov::{pcg, PcgOptions};
use riesz_tau::preconditioners::{
    build_banded, build_multilevel_tau, build_tau_kron, for_kron_sum, strang_column,
    CirculantPreconditioner, IdentityPreconditioner, Preconditioner, PreconditionerKind,
    TauKronPreconditioner, TauLevel,
};
use riesz_tau::problems::{build_example4_system, build_riesz_system, RhsKind, RieszProblem};
use riesz_tau::spectral::{
    dense_preconditioned_spectrum, lanczos_extremes, symmetric_eigenvalues, SpectrumMethod,
};
use riesz_tau::toeplitz_ops::{
    DenseMaterialize, KronSumOperator, LinearOperator, MultilevelToeplitz, SymToeplitz1D,
};
use riesz_tau::Error;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn mul(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x))
        .iter()
        .copied()
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

fn riesz_level(alpha: f64, n: usize) -> SymToeplitz1D {
    SymToeplitz1D::new(riesz_first_column(alpha, n).unwrap().into_vec()).unwrap()
}

fn iterations(p: &RieszProblem, kind: PreconditionerKind) -> usize {
    let (op, rhs) = build_riesz_system(p).unwrap();
    let pre = for_kron_sum(&op, kind).unwrap();
    pcg(&op, pre.as_ref(), &rhs, None, &PcgOptions::default())
        .unwrap()
        .iterations
}

#[test]
fn tau_kron_dense_is_kron_sum_of_tau_blocks() {
    let p = build_tau_kron(&[
        TauLevel {
            alpha: 1.2,
            n: 8,
            weight: 1.0,
        },
        TauLevel {
            alpha: 1.8,
            n: 8,
            weight: 1.0,
        },
    ])
    .unwrap();
    let dense = p.materialize_dense(4096).unwrap();
    let t1 =
        riesz_tau::sine_transform::tau_dense(riesz_first_column(1.2, 8).unwrap().entries(), 64)
            .unwrap();
    let t2 =
        riesz_tau::sine_transform::tau_dense(riesz_first_column(1.8, 8).unwrap().entries(), 64)
            .unwrap();
    let eye = DMatrix::<f64>::identity(8, 8);
    let expected = eye.kronecker(&t1) + t2.kronecker(&eye);
    assert!((&dense - expected).abs().max() < 1e-12);

    let mut rng = rng();
    let r = random_vec(&mut rng, 64);
    let mut z = vec![0.0; 64];
    p.apply_inverse(&r, &mut z).unwrap();
    let exact: Vec<f64> = dense
        .lu()
        .solve(&DVector::from_column_slice(&r))
        .unwrap()
        .iter()
        .copied()
        .collect();
    assert!(rel_err(&z, &exact) < 1e-10);
}

#[test]
fn tau_kron_eigenvalues_are_dense_spectrum() {
    for levels in [
        vec![(1.3, 8), (1.6, 8)],
        vec![(1.1, 16), (1.5, 8), (1.9, 4)],
    ] {
        let p = build_tau_kron(
            &levels
                .iter()
                .map(|&(alpha, n)| TauLevel {
                    alpha,
                    n,
                    weight: alpha,
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let mut fast = p.fused_eigenvalues().to_vec();
        fast.sort_by(f64::total_cmp);
        let dense = symmetric_eigenvalues(p.materialize_dense(4096).unwrap());
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn tau_kron_rejects_bad_weight() {
    assert!(matches!(
        build_tau_kron(&[TauLevel {
            alpha: 1.5,
            n: 4,
            weight: 0.0
        }]),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        build_tau_kron(&[TauLevel {
            alpha: 2.5,
            n: 4,
            weight: 1.0
        }]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn multilevel_tau_reduces_and_agrees() {
    let col = riesz_first_column(1.4, 20).unwrap().into_vec();
    let ml = MultilevelToeplitz::new(vec![20], col.clone()).unwrap();
    let nat = build_multilevel_tau(&ml).unwrap();
    let direct = riesz_tau::sine_transform::tau_eigenvalues(&col).unwrap();
    for (a, b) in nat.eigenvalues().iter().zip(direct.values()) {
        assert!((a - b).abs() < 1e-12);
    }

    let op = KronSumOperator::new(
        vec![riesz_level(1.2, 6), riesz_level(1.7, 5)],
        vec![2.0, 3.0],
    )
    .unwrap();
    let nat = build_multilevel_tau(&MultilevelToeplitz::from_kron_sum(&op).unwrap()).unwrap();
    let kron = TauKronPreconditioner::for_operator(&op).unwrap();
    for (a, b) in nat.eigenvalues().iter().zip(kron.fused_eigenvalues()) {
        assert!((a - b).abs() < 1e-12 * b.abs());
    }
}

#[test]
fn multilevel_tau_dense_matches_hankel_corrected_assembly() {
    let sys = build_example4_system([1.9, 1.5], [4, 4], RhsKind::Ones).unwrap();
    let from_eigs = sys.tau_b.dense_from_eigenvalues(4096).unwrap();
    let assembled = sys.tau_b.materialize_dense(4096).unwrap();
    assert!((from_eigs - assembled).abs().max() < 1e-10);
}

#[test]
fn example_tau_g_is_positive() {
    let sys = build_example4_system([1.9, 1.5], [32, 32], RhsKind::Ones).unwrap();
    assert!(sys.tau_g.fused_eigenvalues().iter().all(|&v| v > 0.0));
}

#[test]
fn strang_circulant_inverse_and_real_spectrum() {
    let col = riesz_first_column(1.5, 8).unwrap().into_vec();
    let c = CirculantPreconditioner::strang_1d(&col).unwrap();
    assert_eq!(c.first_column(), strang_column(&col).as_slice());
    let scale = c.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(c.max_imaginary_part() < 1e-12 * scale);
    let mut rng = rng();
    let r = random_vec(&mut rng, 8);
    let mut z = vec![0.0; 8];
    c.apply_inverse(&r, &mut z).unwrap();
    let dense = c.materialize_dense(64).unwrap();
    assert_eq!(dense, dense.transpose());
    assert!(rel_err(&mul(&dense, &z), &r) < 1e-10);
}

#[test]
fn banded_preconditioner_builds_and_matches_table_count() {
    let col = riesz_first_column(1.5, 256).unwrap().into_vec();
    assert!(build_banded(&col, 8).is_ok());
    let p = RieszProblem::example1(1.2, 63).unwrap();
    assert_eq!(iterations(&p, PreconditionerKind::Banded), 9);
}

#[test]
fn preconditioners_are_symmetric() {
    let mut rng = rng();
    let op = KronSumOperator::new(vec![riesz_level(1.3, 24)], vec![1.0]).unwrap();
    let sys = build_example4_system([1.9, 1.7], [12, 12], RhsKind::Ones).unwrap();
    let mut list: Vec<Box<dyn Preconditioner>> = [
        PreconditionerKind::Tau,
        PreconditionerKind::Circulant,
        PreconditionerKind::Banded,
        PreconditionerKind::None,
    ]
    .iter()
    .map(|&k| for_kron_sum(&op, k).unwrap())
    .collect();
    list.push(Box::new(sys.tau_b.clone()));
    list.push(Box::new(sys.tau_g.clone()));
    for p in &list {
        let n = p.dim();
        let x = random_vec(&mut rng, n);
        let y = random_vec(&mut rng, n);
        let (mut px, mut py) = (vec![0.0; n], vec![0.0; n]);
        p.apply_inverse(&x, &mut px).unwrap();
        p.apply_inverse(&y, &mut py).unwrap();
        let a: f64 = px.iter().zip(&y).map(|(u, v)| u * v).sum();
        let b: f64 = x.iter().zip(&py).map(|(u, v)| u * v).sum();
        assert!((a - b).abs() < 1e-11 * a.abs().max(b.abs()), "{}", p.name());
    }
}

#[test]
fn pcg_matches_direct_solve() {
    let problems = [
        RieszProblem::example1(1.3, 100).unwrap(),
        RieszProblem::example2([1.2, 1.7], 20).unwrap(),
        RieszProblem::example3([1.1, 1.5, 1.9], 8).unwrap(),
    ];
    for p in &problems {
        let (op, rhs) = build_riesz_system(p).unwrap();
        let dense = op.materialize_dense(4096).unwrap();
        let exact: Vec<f64> = dense
            .cholesky()
            .unwrap()
            .solve(&DVector::from_column_slice(&rhs))
            .iter()
            .copied()
            .collect();
        for kind in [
            PreconditionerKind::Tau,
            PreconditionerKind::Circulant,
            PreconditionerKind::None,
            PreconditionerKind::TauNatural,
        ] {
            let pre = for_kron_sum(&op, kind).unwrap();
            let rep = pcg(&op, pre.as_ref(), &rhs, None, &PcgOptions::default()).unwrap();
            assert!(rep.converged);
            assert!(rel_err(&rep.solution, &exact) < 1e-6, "{}", kind.name());
        }
    }
    let sys = build_example4_system([1.9, 1.5], [32, 32], RhsKind::default()).unwrap();
    let dense = sys.matrix.materialize_dense(4096).unwrap();
    let exact: Vec<f64> = dense
        .cholesky()
        .unwrap()
        .solve(&DVector::from_column_slice(&sys.rhs))
        .iter()
        .copied()
        .collect();
    let rep = pcg(
        &sys.matrix,
        &sys.tau_g,
        &sys.rhs,
        None,
        &PcgOptions::default(),
    )
    .unwrap();
    assert!(rel_err(&rep.solution, &exact) < 1e-6);
}

#[test]
fn example1_iteration_counts() {
    let p = RieszProblem::example1(1.2, 63).unwrap();
    assert_eq!(iterations(&p, PreconditionerKind::None), 32);
    assert_eq!(iterations(&p, PreconditionerKind::Tau), 5);
    let counts: Vec<usize> = (6..=10)
        .map(|k| {
            iterations(
                &RieszProblem::example1(1.5, (1 << k) - 1).unwrap(),
                PreconditionerKind::Tau,
            )
        })
        .collect();
    assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 2);
}

#[test]
fn example2_tau_count() {
    let p = RieszProblem::example2([1.1, 1.2], 63).unwrap();
    assert_eq!(iterations(&p, PreconditionerKind::Tau), 7);
}

#[test]
fn residual_history_sanity() {
    let p = RieszProblem::example2([1.4, 1.5], 31).unwrap();
    let (op, rhs) = build_riesz_system(&p).unwrap();
    for kind in [
        PreconditionerKind::None,
        PreconditionerKind::Tau,
        PreconditionerKind::Circulant,
    ] {
        let pre = for_kron_sum(&op, kind).unwrap();
        let rep = pcg(&op, pre.as_ref(), &rhs, None, &PcgOptions::default()).unwrap();
        assert_eq!(rep.residual_history[0], 1.0);
        assert_eq!(rep.residual_history.len(), rep.iterations + 1);
        assert!(*rep.residual_history.last().unwrap() < 1e-8);
        assert!(rep.residual_history.windows(2).all(|w| w[1] < 10.0 * w[0]));
        assert!(rep.true_residual < 1e-7);
    }
}

#[test]
fn pcg_refuses_indefinite_preconditioner() {
    struct Flip(usize);
    impl Preconditioner for Flip {
        fn dim(&self) -> usize {
            self.0
        }
        fn name(&self) -> &'static str {
            "flip"
        }
        fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> riesz_tau::Result<()> {
            z.iter_mut().zip(r).for_each(|(a, b)| *a = -b);
            Ok(())
        }
        fn apply_inverse_factor(&self, _: &[f64], _: &mut [f64]) -> riesz_tau::Result<()> {
            unreachable!()
        }
        fn apply_inverse_factor_transpose(
            &self,
            _: &[f64],
            _: &mut [f64],
        ) -> riesz_tau::Result<()> {
            unreachable!()
        }
    }
    let op = KronSumOperator::new(vec![riesz_level(1.5, 10)], vec![1.0]).unwrap();
    let res = pcg(&op, &Flip(10), &[1.0; 10], None, &PcgOptions::default());
    assert!(matches!(res, Err(Error::Definiteness(_))));
}

struct TauAsOperator(TauKronPreconditioner);

impl LinearOperator for TauAsOperator {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> riesz_tau::Result<()> {
        self.0.apply_forward(x, y)
    }
}

#[test]
fn spectrum_of_self_preconditioning_is_one() {
    let p = build_tau_kron(&[TauLevel {
        alpha: 1.6,
        n: 40,
        weight: 2.0,
    }])
    .unwrap();
    let a = TauAsOperator(p.clone());
    let e = dense_preconditioned_spectrum(&a, &p, 4096).unwrap();
    assert!(e.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn tau_preconditioned_spectrum_one_level() {
    let col = riesz_first_column(1.5, 128).unwrap().into_vec();
    let a = SymToeplitz1D::new(col.clone()).unwrap();
    let p = TauKronPreconditioner::from_columns(vec![col], vec![1.0]).unwrap();
    let e = dense_preconditioned_spectrum(&a, &p, 4096).unwrap();
    assert!(e[0] > 0.5 && e[127] < 1.5);
    let rep = lanczos_extremes(&a, &p, 500, 1e-8).unwrap();
    assert_eq!(rep.method, SpectrumMethod::Lanczos);
    assert!(rep.converged);
    assert!((rep.lambda_min - e[0]).abs() < 1e-8);
    assert!((rep.lambda_max - e[127]).abs() < 1e-8);
    assert!(rep.condition_number() < 3.0);
}

#[test]
fn indefinite_preconditioner_has_no_symmetric_factor() {
    // A small natural τ matrix of an indefinite tensor.
    let coeffs = vec![1.0, 0.9, 0.9, 0.0];
    let b = MultilevelToeplitz::new(vec![2, 2], coeffs).unwrap();
    let nat = build_multilevel_tau(&b).unwrap();
    assert!(!nat.is_positive_definite());
    let id = IdentityPreconditioner::new(4);
    assert!(matches!(
        dense_preconditioned_spectrum(&b, &nat, 64),
        Err(Error::Definiteness(_))
    ));
    assert!(dense_preconditioned_spectrum(&b, &id, 64).is_ok());
}
