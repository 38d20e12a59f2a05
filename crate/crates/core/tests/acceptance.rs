//! Acceptance suite: every exit criterion of the project, one test per
//! criterion, each printing a single pass/fail line. Tolerances are pinned
//! in the assertions, not configurable.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use kvf_core::classify::{
    class_deviation, classify_r3, motion_image, FoliationClass, DEFAULT_CLASSIFY_SEED,
    DEFAULT_CLASSIFY_TOL,
};
use kvf_core::expr::Expression;
use kvf_core::fields::{euclidean_basis_r3, AffineField, ExprField, GridSpec};
use kvf_core::flow::{flow_affine, flow_numeric, isometry_spotcheck, trajectory};
use kvf_core::lie::{bracket, vectorize, FieldFamily, DEFAULT_RANK_TOL};
use kvf_core::orbit::{orbit_dimension, sample_orbit, DEFAULT_T_SCALE};
use kvf_core::verify::{
    cylinder_killing_decompose, radial_equidistance_residual, random_rigid_motion,
    riemannian_transversality_check, run_all, s3_torus_pair, torus_singular_circle_point,
    VerifyError,
};

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn report(number: u32, name: &str, passed: bool) {
    println!(
        "criterion {number:02} {name}: {}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {number:02} {name} failed");
}

fn random_killing(rng: &mut ChaCha8Rng, dim: usize) -> AffineField {
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v: f64 = rng.random_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    let b = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    AffineField::new(a, b).unwrap()
}

fn witness_indices(report: &kvf_core::fields::KillingReport) -> Vec<(usize, usize)> {
    report.witnesses.iter().map(|w| (w.i, w.j)).collect()
}

#[test]
fn criterion_01_killing_criterion() {
    let mut ok = true;

    for f in euclidean_basis_r3() {
        ok &= f.killing_check(0.0).passed();
    }
    let (x, y) = s3_torus_pair();
    ok &= x.killing_check(0.0).passed();
    ok &= y.killing_check(0.0).passed();

    // x d/dx violates the diagonal condition at (1,1)
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 0)] = 1.0;
    let x_dx = AffineField::new(a, DVector::zeros(3)).unwrap();
    ok &= witness_indices(&x_dx.killing_check(0.0)) == vec![(1, 1)];

    // x d/dy alone violates the off-diagonal condition at (1,2)
    let mut a = DMatrix::zeros(3, 3);
    a[(1, 0)] = 1.0;
    let x_dy = AffineField::new(a, DVector::zeros(3)).unwrap();
    ok &= witness_indices(&x_dy.killing_check(0.0)) == vec![(1, 2)];

    // the radial field violates all three diagonal conditions
    let radial = ExprField::parse(&["x", "y", "z"], 3).unwrap();
    let grid = GridSpec::default();
    let report_radial = radial.killing_check(&grid, 1e-9).unwrap();
    ok &= witness_indices(&report_radial) == vec![(1, 1), (2, 2), (3, 3)];

    report(1, "killing_criterion", ok);
}

#[test]
fn criterion_02_bracket_algebra() {
    let basis = euclidean_basis_r3();
    let mut ok = bracket(&basis[3], &basis[4]) == basis[5];

    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..500 {
        let f = random_killing(&mut rng, 4);
        let g = random_killing(&mut rng, 4);
        ok &= bracket(&f, &g).is_killing();
    }

    for _ in 0..100 {
        let f = random_killing(&mut rng, 3);
        let g = random_killing(&mut rng, 3);
        let h = random_killing(&mut rng, 3);
        let jacobi = &(&bracket(&bracket(&f, &g), &h) + &bracket(&bracket(&g, &h), &f))
            + &bracket(&bracket(&h, &f), &g);
        ok &= vectorize(&jacobi).amax() <= 1e-12;
    }

    report(2, "bracket_algebra", ok);
}

#[test]
fn criterion_03_closure_dimensions() {
    let basis = euclidean_basis_r3();
    let closure_len = |members: Vec<AffineField>| {
        FieldFamily::new(members)
            .unwrap()
            .closure(DEFAULT_RANK_TOL)
            .len()
    };

    let mut ok = closure_len(vec![basis[3].clone(), basis[4].clone()]) == 3;
    ok &= closure_len(vec![basis[5].clone(), basis[2].clone()]) == 2;
    // a rotation about z with a transverse translation generates the second
    // in-plane translation
    ok &= closure_len(vec![basis[5].clone(), basis[0].clone()]) == 3;
    ok &= closure_len(basis) == 6;

    report(3, "closure_dimensions", ok);
}

#[test]
fn criterion_04_exact_flow() {
    let basis = euclidean_basis_r3();
    let screw = |l1: f64, l2: f64| &basis[5].scale(l1) + &basis[2].scale(l2);
    let mut ok = true;

    for p0 in [dv(&[1.0, 0.0, 0.0]), dv(&[0.4, -1.1, 0.3])] {
        for (l1, l2) in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)] {
            let field = screw(l1, l2);
            for t in [0.1, 1.0, std::f64::consts::PI] {
                let reference = dv(&[
                    p0[0] * (l1 * t).cos() + p0[1] * (l1 * t).sin(),
                    -p0[0] * (l1 * t).sin() + p0[1] * (l1 * t).cos(),
                    l2 * t + p0[2],
                ]);
                ok &= (flow_affine(&field, &p0, t) - reference).amax() <= 1e-11;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(515);
    for _ in 0..50 {
        let f = random_killing(&mut rng, 3);
        let p = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
        let s: f64 = rng.random_range(-10.0..10.0);
        let t: f64 = rng.random_range(-10.0..10.0);
        let composed = flow_affine(&f, &flow_affine(&f, &p, s), t);
        ok &= (composed - flow_affine(&f, &p, s + t)).amax() <= 1e-11;
    }

    for _ in 0..20 {
        let f = random_killing(&mut rng, 3);
        let pairs: Vec<_> = (0..5)
            .map(|_| {
                (
                    DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)),
                    DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)),
                )
            })
            .collect();
        ok &= isometry_spotcheck(&f, &pairs, &[0.3, 1.7, -2.5], 1e-10).passed();
    }

    report(4, "exact_flow", ok);
}

#[test]
fn criterion_05_numeric_integrator_order() {
    let (x, _) = s3_torus_pair();
    let p0 = dv(&[0.5, 0.5, 0.5, 0.5]);
    let exact = flow_affine(&x, &p0, 1.0);
    let coarse = (flow_numeric(&x, &p0, 1.0, 1e-2).unwrap() - &exact).norm();
    let fine = (flow_numeric(&x, &p0, 1.0, 5e-3).unwrap() - &exact).norm();
    let ratio = coarse / fine;
    report(
        5,
        "numeric_integrator_order",
        (12.0..=20.0).contains(&ratio),
    );
}

#[test]
fn criterion_06_hopf_scenario() {
    let (hopf, _) = s3_torus_pair();
    let p0 = dv(&[1.0, 0.0, 0.0, 0.0]);
    let tau = 2.0 * std::f64::consts::PI;
    let traj = trajectory(&hopf, &p0, 0.0, tau, 700).unwrap();
    let sphere_residual = traj
        .points()
        .iter()
        .map(|p| (p.norm_squared() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let closure_gap = (flow_affine(&hopf, &p0, tau) - &p0).norm();
    report(
        6,
        "hopf_scenario",
        sphere_residual <= 1e-10 && closure_gap <= 1e-10,
    );
}

#[test]
fn criterion_07_torus_scenario() {
    let (x, y) = s3_torus_pair();
    let family = FieldFamily::new(vec![x.clone(), y.clone()]).unwrap();
    let mut ok = vectorize(&bracket(&x, &y)).amax() == 0.0;

    // 1000 random sphere points away from the singular circles
    let mut rng = ChaCha8Rng::seed_from_u64(8080);
    let mut accepted = 0;
    while accepted < 1000 {
        let v = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() < 1e-9 {
            continue;
        }
        let p = &v / v.norm();
        let near_first = (p[0] - p[3]).abs().max((p[1] + p[2]).abs());
        let near_second = (p[0] + p[3]).abs().max((p[1] - p[2]).abs());
        if near_first.min(near_second) <= 1e-2 {
            continue;
        }
        accepted += 1;
        ok &= orbit_dimension(&family, &p, DEFAULT_RANK_TOL) == 2;
    }

    // 100 points on each singular circle have orbit dimension 1
    for first in [true, false] {
        for k in 0..100 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let p = torus_singular_circle_point(first, theta);
            ok &= orbit_dimension(&family, &p, DEFAULT_RANK_TOL) == 1;
        }
    }

    // invariant drift across a 500-step orbit cloud
    let norm2 = Expression::parse("x^2 + y^2 + z^2 + w^2", 4).unwrap();
    let separating = Expression::parse("y*z - x*w", 4).unwrap();
    let p0 = dv(&[0.6, 0.0, 0.8, 0.0]);
    let mut cloud = sample_orbit(&family, &p0, 500, DEFAULT_T_SCALE, 910);
    cloud.attach_invariant("norm2", &norm2).unwrap();
    cloud.attach_invariant("yz_xw", &separating).unwrap();
    ok &= cloud.invariant_drift(0) <= 1e-9;
    ok &= cloud.invariant_drift(1) <= 1e-9;

    // both singular circles are flow-invariant under both fields
    for first in [true, false] {
        for k in 0..25 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 25.0;
            let p = torus_singular_circle_point(first, theta);
            for f in [&x, &y] {
                for t in [0.5, 1.9, -3.1] {
                    let q = flow_affine(f, &p, t);
                    let residual = if first {
                        (q[0] - q[3]).abs().max((q[1] + q[2]).abs())
                    } else {
                        (q[0] + q[3]).abs().max((q[1] - q[2]).abs())
                    };
                    ok &= residual <= 1e-9;
                }
            }
        }
    }

    report(7, "torus_scenario", ok);
}

#[test]
fn criterion_08_seven_type_classifier() {
    let basis = euclidean_basis_r3();
    let family = |indices: &[usize]| {
        FieldFamily::new(indices.iter().map(|&k| basis[k].clone()).collect()).unwrap()
    };
    let screw = FieldFamily::new(vec![&basis[5] + &basis[2].scale(2.0)]).unwrap();

    let expectations: Vec<(FieldFamily, FoliationClass)> = vec![
        (
            family(&[2]),
            FoliationClass::ParallelLines {
                direction: [0.0, 0.0, 1.0],
            },
        ),
        (
            family(&[5]),
            FoliationClass::ConcentricCircles {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
            },
        ),
        (
            screw,
            FoliationClass::Helices {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
                pitch: 2.0,
            },
        ),
        (
            family(&[0, 1]),
            FoliationClass::ParallelPlanes {
                normal: [0.0, 0.0, 1.0],
            },
        ),
        (
            family(&[3, 4, 5]),
            FoliationClass::ConcentricSpheres {
                center: [0.0, 0.0, 0.0],
            },
        ),
        (
            family(&[5, 2]),
            FoliationClass::ConcentricCylinders {
                axis_point: [0.0, 0.0, 0.0],
                axis_dir: [0.0, 0.0, 1.0],
            },
        ),
        (family(&[0, 1, 2, 3, 4, 5]), FoliationClass::WholeSpace),
    ];

    let mut ok = true;
    for (fam, expected) in &expectations {
        let result = classify_r3(fam, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED).unwrap();
        ok &= matches!(class_deviation(expected, &result), Some(d) if d <= 1e-9);
    }

    // equivariance: conjugated families classify covariantly
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..50 {
        let (r, t) = random_rigid_motion(&mut rng, 3);
        for (fam, _) in &expectations {
            let moved = FieldFamily::new(
                fam.members()
                    .iter()
                    .map(|f| f.conjugate(&r, &t).unwrap())
                    .collect(),
            )
            .unwrap();
            let before = classify_r3(fam, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED).unwrap();
            let after = classify_r3(&moved, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_SEED).unwrap();
            let expected = motion_image(&before, &r, &t);
            ok &= matches!(class_deviation(&expected, &after), Some(d) if d <= 1e-9);
        }
    }

    report(8, "seven_type_classifier", ok);
}

#[test]
fn criterion_09_riemannian_property() {
    let basis = euclidean_basis_r3();
    let spheres =
        FieldFamily::new(vec![basis[3].clone(), basis[4].clone(), basis[5].clone()]).unwrap();
    let cylinders = FieldFamily::new(vec![basis[5].clone(), basis[2].clone()]).unwrap();
    let planes = FieldFamily::new(vec![basis[0].clone(), basis[1].clone()]).unwrap();

    let mut ok = riemannian_transversality_check(
        &spheres,
        &DVector::zeros(3),
        &dv(&[0.0, 0.0, 1.0]),
        &[0.5, 1.0, 2.0],
        1e-9,
    )
    .unwrap()
    .passed();

    ok &= riemannian_transversality_check(
        &cylinders,
        &dv(&[0.0, 0.0, 0.3]),
        &dv(&[1.0, 0.0, 0.0]),
        &[0.5, 1.0, 2.0],
        1e-9,
    )
    .unwrap()
    .passed();

    ok &= riemannian_transversality_check(
        &planes,
        &dv(&[0.4, -0.2, 0.0]),
        &dv(&[0.0, 0.0, 1.0]),
        &[0.5, 1.0, 2.0],
        1e-9,
    )
    .unwrap()
    .passed();

    // the 45-degree line is rejected at its anchor
    ok &= matches!(
        riemannian_transversality_check(
            &spheres,
            &dv(&[0.0, 0.0, 1.0]),
            &dv(&[1.0, 0.0, 1.0]),
            &[0.5],
            1e-9,
        ),
        Err(VerifyError::NotOrthogonalAtAnchor { .. })
    );

    // equidistance between sphere leaves along 10 random radial lines
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let directions: Vec<DVector<f64>> = (0..10)
        .map(|_| DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    ok &= radial_equidistance_residual(&directions, 0.5, 2.0) <= 1e-12;
    ok &= radial_equidistance_residual(&directions, 1.7, 0.4) <= 1e-12;

    report(9, "riemannian_property", ok);
}

#[test]
fn criterion_10_cylinder_decomposition() {
    let basis = euclidean_basis_r3();
    let rotation = &basis[5];
    let axial = &basis[2];

    let combined = &rotation.scale(2.0) + &axial.scale(3.0);
    let (l1, l2) = cylinder_killing_decompose(&combined, 1e-9).unwrap();
    let mut ok = (l1 - 2.0).abs() <= 1e-12 && (l2 - 3.0).abs() <= 1e-12;

    let (l1, l2) = cylinder_killing_decompose(axial, 1e-9).unwrap();
    ok &= l1.abs() <= 1e-12 && (l2 - 1.0).abs() <= 1e-12;

    let (l1, l2) = cylinder_killing_decompose(rotation, 1e-9).unwrap();
    ok &= (l1 - 1.0).abs() <= 1e-12 && l2.abs() <= 1e-12;

    ok &= matches!(
        cylinder_killing_decompose(&basis[0], 1e-9),
        Err(VerifyError::NotTangent { .. })
    );

    report(10, "cylinder_decomposition", ok);
}

#[test]
fn criterion_11_s2xr_scenario() {
    let field = kvf_core::verify::s2xr_rotation_field();
    let p0 = dv(&[0.6, 0.0, 0.8, 0.0]);
    let traj = trajectory(&field, &p0, 0.0, 2.0 * std::f64::consts::PI, 400).unwrap();
    let radius_residual = traj
        .points()
        .iter()
        .map(|p| ((p[0] * p[0] + p[1] * p[1]).sqrt() - 0.6).abs())
        .fold(0.0f64, f64::max);
    report(11, "s2xr_scenario", radius_residual <= 1e-10);
}

#[test]
fn criterion_12_determinism_and_runtime() {
    let started = std::time::Instant::now();
    let first = run_all();
    let second = run_all();
    let elapsed = started.elapsed();

    let mut ok = first.iter().all(|r| r.passed());
    ok &= second.iter().all(|r| r.passed());
    let bytes_first = serde_json::to_vec(&first).unwrap();
    let bytes_second = serde_json::to_vec(&second).unwrap();
    ok &= bytes_first == bytes_second;
    ok &= elapsed.as_secs_f64() < 30.0;

    report(12, "determinism_and_runtime", ok);
}
