//! End-to-end acceptance checks, one test per shipped guarantee.
//!
//! Each test prints a single `ACCEPTANCE k/10 PASS` line on success; a failed
//! assertion makes the corresponding line show up as a test failure, so the
//! suite's output is a pass/fail line per guarantee.

use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use heislorentz::cli::{self, CommandKind, EquivalenceConfig, GridConfig, RunConfig, WitnessConfig};
use heislorentz::examples::{
    adams_cross_check, adams_path, homogeneous_path, monodromy_bundle, AdamsSpec,
};
use heislorentz::geometry::{
    bracket_with_w, equivalence_point_map, killing_field, killing_residual, metric_at,
    signature_of, verify_map_isometry, RigidityProblem, SpacetimePoint, Tangent,
};
use heislorentz::lie_core::{
    ad_exp_tw, basis_vectors, bch_multiply, biinvariant_gram, biinvariant_inner, block_rotation,
    AlgebraVector, WarpedVector,
};
use heislorentz::numeric::uniform_grid;
use heislorentz::paths::{verify_equivalence, AutomorphismPath, EquivalenceMap, EquivalenceWitness};
use heislorentz::quotient::{deck_isometry_report, LatticeSpec};
use heislorentz::rational::{rat_i64, rat_int, Rat};
use heislorentz::symplectic::{Splitting, Verdict};

const TAU: f64 = std::f64::consts::TAU;

/// Serializes the criteria so the runtime budgets are measured on an
/// otherwise idle machine rather than against each other.
fn exclusive() -> MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    GATE.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn rand_algebra(rng: &mut ChaCha8Rng, n: usize) -> AlgebraVector {
    AlgebraVector::from_dvec(&DVector::from_fn(2 * n + 1, |_, _| rng.gen_range(-1.0..1.0)))
        .unwrap()
}

fn rand_points(rng: &mut ChaCha8Rng, n: usize, count: usize, t_range: (f64, f64)) -> Vec<SpacetimePoint> {
    (0..count)
        .map(|_| SpacetimePoint::new(rng.gen_range(t_range.0..t_range.1), rand_algebra(rng, n)))
        .collect()
}

/// A rank-2 path that is neither a preset nor a plain block rotation: a
/// variable-rate rotation whose first plane is conjugated by the symplectic
/// shear `x1 += a y1`. The conjugated block is written out in closed form,
/// `S R(theta) S^-1 = [[c + a s, -(1 + a^2) s], [s, c - a s]]`; the
/// construction is cross-checked against the literal matrix product below.
const USER_SHEAR: f64 = 0.4;

fn user_path_angles(t: f64) -> ([f64; 2], [f64; 2]) {
    ([t + 0.3 * t.sin(), 0.7 * t], [1.0 + 0.3 * t.cos(), 0.7])
}

fn user_path() -> AutomorphismPath {
    let n = 2;
    let dim = 2 * n + 1;
    let a = USER_SHEAR;
    let eval = move |t: f64| {
        let (th, _) = user_path_angles(t);
        let mut m = DMatrix::identity(dim, dim);
        let (c, s) = (th[0].cos(), th[0].sin());
        m[(1, 1)] = c + a * s;
        m[(1, 3)] = -(1.0 + a * a) * s;
        m[(3, 1)] = s;
        m[(3, 3)] = c - a * s;
        let (c, s) = (th[1].cos(), th[1].sin());
        m[(2, 2)] = c;
        m[(2, 4)] = -s;
        m[(4, 2)] = s;
        m[(4, 4)] = c;
        m
    };
    let deriv = move |t: f64| {
        let (th, dth) = user_path_angles(t);
        let mut m = DMatrix::zeros(dim, dim);
        let (c, s) = (th[0].cos(), th[0].sin());
        m[(1, 1)] = dth[0] * (-s + a * c);
        m[(1, 3)] = -(1.0 + a * a) * dth[0] * c;
        m[(3, 1)] = dth[0] * c;
        m[(3, 3)] = dth[0] * (-s - a * c);
        let (c, s) = (th[1].cos(), th[1].sin());
        m[(2, 2)] = -dth[1] * s;
        m[(2, 4)] = -dth[1] * c;
        m[(4, 2)] = dth[1] * c;
        m[(4, 4)] = -dth[1] * s;
        m
    };
    AutomorphismPath::new(n, "sheared variable-rate rotation", None, Arc::new(eval), Some(Arc::new(deriv)))
        .unwrap()
}

#[test]
fn user_path_matches_its_defining_conjugation() {
    let path = user_path();
    let n = 2;
    let mut shear = DMatrix::identity(2 * n + 1, 2 * n + 1);
    shear[(1, 1 + n)] = USER_SHEAR;
    let shear_inv = shear.clone().try_inverse().unwrap();
    for &t in &[-1.9, 0.0, 0.3, 1.7, 4.1] {
        let (th, _) = user_path_angles(t);
        let product = &shear * block_rotation(n, &th).mat * &shear_inv;
        assert!((path.matrix_at(t) - product).abs().max() < 1e-14);
    }
}

/// Worst Killing residual over every algebra basis direction, all coordinate
/// tangent pairs, at the given points.
fn killing_sweep(path: &AutomorphismPath, splitting: &Splitting, points: &[SpacetimePoint]) -> f64 {
    let n = splitting.n();
    let dirs = basis_vectors(n);
    let dim = 2 * n + 2;
    let frame: Vec<Tangent> = (0..dim).map(|i| Tangent::basis(n, i)).collect();
    points
        .par_iter()
        .map(|x| {
            let mut worst = 0.0f64;
            for k in &dirs {
                for i in 0..dim {
                    for j in i..dim {
                        let r = killing_residual(path, splitting, k, x, &frame[i], &frame[j], 1e-5)
                            .unwrap();
                        worst = worst.max(r);
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[test]
fn criterion_01_group_law_axioms_exact_in_rational_arithmetic() {
    let _serial = exclusive();
    let start = Instant::now();
    let mut total = 0usize;
    for n in 1..=3usize {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        let mut rand_rat_vec = |n: usize| {
            let coords: Vec<Rat> = (0..2 * n + 1)
                .map(|_| rat_i64(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                .collect();
            AlgebraVector::<Rat>::from_coords(&coords).unwrap()
        };
        let e = AlgebraVector::<Rat>::zero(n);
        for _ in 0..334 {
            let u = rand_rat_vec(n);
            let v = rand_rat_vec(n);
            let w = rand_rat_vec(n);
            let uv_w = bch_multiply(&bch_multiply(&u, &v), &w);
            let u_vw = bch_multiply(&u, &bch_multiply(&v, &w));
            assert_eq!(uv_w, u_vw, "associativity must hold exactly");
            assert_eq!(bch_multiply(&u, &e), u, "right identity");
            assert_eq!(bch_multiply(&e, &u), u, "left identity");
            assert_eq!(bch_multiply(&u, &u.neg()), e, "inverse");
            total += 1;
        }
    }
    assert!(total >= 1000);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget is 1 s");
    println!("ACCEPTANCE 1/10 PASS group-law axioms exact on {total} rational triples in {elapsed:?}");
}

#[test]
fn criterion_02_biinvariant_form_reproduced_by_the_homogeneous_metric() {
    let _serial = exclusive();
    // signature (1, 2n+1)
    for n in 1..=3usize {
        let (neg, pos) = signature_of(&biinvariant_gram(n)).unwrap();
        assert_eq!((neg, pos), (1, 2 * n + 1), "signature at rank {n}");
    }

    // Ad(exp tW)-invariance over 100 random (t, u, v), generic weights
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_ad = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3usize);
        let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let t = rng.gen_range(-5.0..5.0);
        let ad = ad_exp_tw(t, &lambda);
        let u = WarpedVector::from_column(&DVector::from_fn(2 * n + 2, |_, _| {
            rng.gen_range(-1.0..1.0)
        }))
        .unwrap();
        let v = WarpedVector::from_column(&DVector::from_fn(2 * n + 2, |_, _| {
            rng.gen_range(-1.0..1.0)
        }))
        .unwrap();
        let au = WarpedVector::from_column(&(&ad * u.to_column())).unwrap();
        let av = WarpedVector::from_column(&(&ad * v.to_column())).unwrap();
        worst_ad = worst_ad.max((biinvariant_inner(&au, &av) - biinvariant_inner(&u, &v)).abs());
    }
    assert!(worst_ad < 1e-9, "Ad-invariance residual {worst_ad}");

    // homogeneous metric against the algebra Gram on Killing directions:
    // the coordinate time field corresponds to -W, the fundamental fields to
    // their generators
    let mut worst_match = 0.0f64;
    for n in 1..=2usize {
        let path = homogeneous_path(n, &vec![rat_int(1); n]).unwrap();
        let splitting = Splitting::standard(n);
        let mut rng = ChaCha8Rng::seed_from_u64(20 + n as u64);
        for x in rand_points(&mut rng, n, 20, (-3.0, 3.0)) {
            let sample = metric_at(&path, &splitting, &x).unwrap();
            let mut dirs: Vec<(Tangent, WarpedVector)> =
                vec![(Tangent::new(1.0, AlgebraVector::zero(n)), {
                    let mut w = WarpedVector::zero(n);
                    w.w = -1.0;
                    w
                })];
            for k in basis_vectors(n) {
                dirs.push((killing_field(&path, &k, &x), WarpedVector::from_h(&k, 0.0)));
            }
            for i in 0..dirs.len() {
                for j in i..dirs.len() {
                    let got = sample.pair(&dirs[i].0, &dirs[j].0);
                    let want = biinvariant_inner(&dirs[i].1, &dirs[j].1);
                    worst_match = worst_match.max((got - want).abs());
                }
            }
        }
    }
    assert!(worst_match < 1e-9, "Killing-direction Gram residual {worst_match}");
    println!(
        "ACCEPTANCE 2/10 PASS bi-invariant form: signature, Ad-invariance {worst_ad:.2e}, \
         Killing Gram match {worst_match:.2e}"
    );
}

#[test]
fn criterion_03_fundamental_fields_are_killing_for_all_three_paths() {
    let _serial = exclusive();
    let adams = adams_path(&AdamsSpec::standard(2)).unwrap();
    let user = user_path();
    let cases: Vec<(&str, AutomorphismPath)> = vec![
        ("homogeneous", homogeneous_path(2, &[rat_int(1), rat_i64(1, 2)]).unwrap()),
        ("adams", adams.path.clone()),
        ("user", user),
    ];
    let splitting = Splitting::standard(2);
    let grid = uniform_grid(0.0, TAU, 48);
    for (name, path) in &cases {
        let v = path.validate_metric_defining(Some(&splitting), &grid, 1e-9).unwrap();
        assert!(v.ok, "{name} path must pass validation first");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = rand_points(&mut rng, 2, 50, (-3.0, 3.0));
        let start = Instant::now();
        let worst = killing_sweep(path, &splitting, &points);
        let elapsed = start.elapsed();
        assert!(worst < 1e-6, "{name}: Killing residual {worst}");
        assert!(elapsed.as_secs_f64() < 10.0, "{name}: sweep took {elapsed:?}, budget 10 s");
        println!("  {name}: Killing residual {worst:.2e} over 50 points in {elapsed:?}");
    }
    println!("ACCEPTANCE 3/10 PASS Killing residual < 1e-6 for homogeneous, bump, and user paths");
}

#[test]
fn criterion_04_bracket_with_time_field_matches_finite_differences() {
    let _serial = exclusive();
    let adams = adams_path(&AdamsSpec::standard(2)).unwrap();
    let cases: Vec<(&str, AutomorphismPath)> = vec![
        ("homogeneous", homogeneous_path(2, &[rat_int(1), rat_i64(1, 2)]).unwrap()),
        ("adams", adams.path.clone()),
        ("user", user_path()),
    ];
    let dirs = basis_vectors(2);
    for (name, path) in &cases {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let k = &dirs[rng.gen_range(0..dirs.len())];
            let x = SpacetimePoint::new(rng.gen_range(-3.0..3.0), rand_algebra(&mut rng, 2));
            let out = bracket_with_w(path, k, &x, 1e-5).unwrap();
            worst = worst.max(out.residual);
        }
        assert!(worst < 1e-6, "{name}: bracket residual {worst}");
        println!("  {name}: bracket residual {worst:.2e} over 100 samples");
    }
    println!("ACCEPTANCE 4/10 PASS analytic commutator with the time field matches finite differences");
}

#[test]
fn criterion_05_lightlike_hyperplane_data_is_rigid() {
    let _serial = exclusive();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in 3..=8usize {
        for trial in 0..100 {
            let problem = RigidityProblem::diagonal_model(dim, 1)
                .unwrap()
                .random_transport(&mut rng);
            let report = problem.rigidity_dimension().unwrap();
            assert_eq!(
                report.dimension, 0,
                "dimension {dim}, trial {trial}: residual freedom {}",
                report.dimension
            );
        }
    }
    let control = RigidityProblem::diagonal_model(5, 2)
        .unwrap()
        .random_transport(&mut rng)
        .rigidity_dimension()
        .unwrap();
    assert!(control.dimension >= 1, "codimension-2 control must stay flexible");
    println!(
        "ACCEPTANCE 5/10 PASS rigidity dimension 0 on 600 instances, codimension-2 control = {}",
        control.dimension
    );
}

#[test]
fn criterion_06_rescaling_and_complement_change_are_isometries() {
    let _serial = exclusive();
    let n = 1usize;
    // a genuinely time-dependent metric-defining path
    let wobble_eval = |t: f64| {
        let theta = t + 0.3 * t.sin();
        block_rotation(1, &[theta]).mat
    };
    let wobble_deriv = |t: f64| {
        let theta = t + 0.3 * t.sin();
        let rate = 1.0 + 0.3 * t.cos();
        let (c, s) = (theta.cos(), theta.sin());
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 1)] = -rate * s;
        m[(1, 2)] = -rate * c;
        m[(2, 1)] = rate * c;
        m[(2, 2)] = -rate * s;
        m
    };
    let path = AutomorphismPath::new(
        n,
        "wobble",
        Some(TAU),
        Arc::new(wobble_eval),
        Some(Arc::new(wobble_deriv)),
    )
    .unwrap();
    let std = Splitting::standard(n);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let points = rand_points(&mut rng, n, 50, (-2.0, 3.0));

    // (a) time rescaling by (c, d) = (2, 0.3)
    let rescaled = path.rescale(2.0, 0.3).unwrap();
    let map = EquivalenceMap::time_rescale(n, 2.0, 0.3);
    let dst_split = Splitting::new(
        AlgebraVector::z_basis(n).scale(&2.0),
        vec![AlgebraVector::x_basis(n, 0), AlgebraVector::y_basis(n, 0)],
    )
    .unwrap();
    let rep = verify_map_isometry(
        &equivalence_point_map(&map),
        (&path, &std),
        (&rescaled, &dst_split),
        &points,
        1e-5,
    )
    .unwrap();
    assert_eq!(rep.skipped, 0);
    assert!(rep.max_residual < 1e-6, "rescale isometry residual {}", rep.max_residual);
    let rescale_residual = rep.max_residual;

    // (b) complement change to p' = span{X1 + Z0, Y1}
    let z0 = AlgebraVector::z_basis(n);
    let tilted = Splitting::new(
        z0.clone(),
        vec![AlgebraVector::x_basis(n, 0).add(&z0), AlgebraVector::y_basis(n, 0)],
    )
    .unwrap();
    let changed = path.change_complement(&std, &tilted, (-3.0, 4.0), 2048).unwrap();
    let rep = verify_map_isometry(
        &equivalence_point_map(&changed.map),
        (&path, &std),
        (&changed.path, &tilted),
        &points,
        1e-5,
    )
    .unwrap();
    assert_eq!(rep.skipped, 0);
    assert!(rep.max_residual < 1e-6, "complement-change isometry residual {}", rep.max_residual);
    let theta_residual = rep.max_residual;

    // (c) the decision procedure accepts both witnesses...
    let ts = uniform_grid(0.0, 5.0, 11);
    let rep = verify_equivalence(
        &path,
        &std,
        &rescaled,
        &std,
        Some(EquivalenceWitness { c: 2.0, d: 0.3 }),
        &ts,
        1e-9,
    )
    .unwrap();
    assert!(rep.equivalent && rep.proven, "rescale witness rejected: {}", rep.note);
    let rep = verify_equivalence(
        &path,
        &std,
        &changed.path,
        &tilted,
        Some(EquivalenceWitness { c: 1.0, d: 0.0 }),
        &ts,
        1e-9,
    )
    .unwrap();
    assert!(rep.equivalent && rep.proven, "complement-change witness rejected: {}", rep.note);

    // ...and rejects the homogeneous-vs-monodromy pair on a coarse scan
    let homog = homogeneous_path(n, &[rat_int(1)]).unwrap();
    let mono = monodromy_bundle(n).unwrap();
    let coarse = uniform_grid(0.0, 3.0, 7);
    let rep = verify_equivalence(&homog, &std, &mono.path, &std, None, &coarse, 1e-8).unwrap();
    assert!(!rep.equivalent, "distinct geometries must not scan as equivalent");
    println!(
        "ACCEPTANCE 6/10 PASS equivalences: rescale {rescale_residual:.2e}, \
         complement change {theta_residual:.2e}, witnesses accepted, mismatch rejected"
    );
}

#[test]
fn criterion_07_bump_profile_example_cross_checks() {
    let _serial = exclusive();
    let spec = AdamsSpec::standard(1);
    let report = adams_cross_check(&spec, 100, 1e-6, 7).unwrap();
    assert!(report.nu_display_residual < 1e-8, "nu display {}", report.nu_display_residual);
    assert!(report.alpha_error <= 1e-9, "alpha quadrature error {}", report.alpha_error);
    assert!(
        report.z_equivariance_residual < 1e-8,
        "translation equivariance {}",
        report.z_equivariance_residual
    );
    assert!(report.h_periodicity_residual < 1e-9, "H periodicity {}", report.h_periodicity_residual);
    assert!(
        report.f_equivariance_residual < 1e-6 && report.f_isometry_residual < 1e-6,
        "warped-model cross-check: equivariance {}, isometry {}",
        report.f_equivariance_residual,
        report.f_isometry_residual
    );
    assert!(report.pass);

    // a flat profile degenerates to the homogeneous path
    let flat = adams_path(&AdamsSpec::flat(1)).unwrap();
    let homog = homogeneous_path(1, &[rat_int(1)]).unwrap();
    let mut worst = 0.0f64;
    for &t in &uniform_grid(-6.0, 6.0, 97) {
        worst = worst.max((flat.path.matrix_at(t) - homog.matrix_at(t)).abs().max());
    }
    assert!(worst < 1e-12, "flat bump vs homogeneous: {worst}");
    println!(
        "ACCEPTANCE 7/10 PASS bump example: nu {:.2e}, alpha {:.2e}, model isometry {:.2e}, \
         flat degeneration {worst:.2e}",
        report.nu_display_residual, report.alpha_error, report.f_isometry_residual
    );
}

#[test]
fn criterion_08_hyperbolic_monodromy_example() {
    let _serial = exclusive();
    let bundle = monodromy_bundle(1).unwrap();
    let r = &bundle.report;
    assert!(r.exp_error < 1e-9, "matrix exponential error {}", r.exp_error);
    assert!(r.diagonalization_residual < 1e-12, "diagonalization {}", r.diagonalization_residual);
    assert_eq!(r.det_a, 1);
    assert!(r.lattice_closure.closed, "lattice closure must be exact");
    assert!(r.lattice_preserved_all, "integer powers must preserve the lattice exactly");
    assert_eq!(r.lattice_preserved.len(), 11, "|q| <= 5");
    assert_eq!(r.definiteness.verdict, Verdict::Indefinite);
    assert!(r.definiteness.witness.is_some(), "verdict needs an explicit witness");
    assert!(r.paper_conflict, "the computed verdict disagrees with the source claim");
    println!(
        "ACCEPTANCE 8/10 PASS monodromy example: exp {:.2e}, diag {:.2e}, exact lattice checks, \
         verdict {:?} with witness, conflict flagged",
        r.exp_error, r.diagonalization_residual, r.definiteness.verdict
    );
}

#[test]
fn criterion_09_deck_transformations_act_isometrically() {
    let _serial = exclusive();
    let homog = homogeneous_path(1, &[rat_int(1)]).unwrap();
    let adams = adams_path(&AdamsSpec::standard(1)).unwrap();
    let splitting = Splitting::standard(1);
    let lattice = LatticeSpec::standard(1);
    for (name, path) in [("homogeneous", &homog), ("adams", &adams.path)] {
        let rep = deck_isometry_report(path, &splitting, &lattice, 200, 1e-6, 9).unwrap();
        assert!(rep.samples >= 200);
        assert!(rep.pass, "{name}: deck isometry report failed");
        assert!(rep.max_residual < 1e-6, "{name}: residual {}", rep.max_residual);
        let nu_period = path.check_nu_periodicity(&uniform_grid(0.0, TAU, 64)).unwrap();
        assert!(nu_period < 1e-10, "{name}: nu periodicity {nu_period}");
        println!("  {name}: deck residual {:.2e}, nu periodicity {nu_period:.2e}", rep.max_residual);
    }
    println!("ACCEPTANCE 9/10 PASS deck generators isometric over 200-point fundamental domains");
}

#[test]
fn criterion_10_reports_are_byte_identical_for_fixed_config_and_seed() {
    let _serial = exclusive();
    let base = RunConfig {
        grid: GridConfig { t_min: 0.0, t_max: TAU, samples: 24 },
        seed: 123,
        ..RunConfig::default()
    };
    let mut eq_cfg = base.clone();
    eq_cfg.equivalence = Some(EquivalenceConfig {
        path: eq_cfg.path.clone(),
        splitting: None,
        witness: Some(WitnessConfig { c: 1.0, d: 0.0 }),
    });
    let commands: Vec<(CommandKind, &RunConfig)> = vec![
        (CommandKind::Validate, &base),
        (CommandKind::Metric, &base),
        (CommandKind::Killing, &base),
        (CommandKind::Quotient, &base),
        (CommandKind::Equivalence, &eq_cfg),
        (CommandKind::Example("homogeneous".into()), &base),
        (CommandKind::Example("adams".into()), &base),
        (CommandKind::Example("monodromy".into()), &base),
        (CommandKind::Rigidity, &base),
    ];
    for (command, cfg) in &commands {
        let first = cli::run(command, cfg).unwrap().to_json();
        let second = cli::run(command, cfg).unwrap().to_json();
        assert_eq!(first.as_bytes(), second.as_bytes(), "{command:?} report not reproducible");
    }
    println!("ACCEPTANCE 10/10 PASS byte-identical reports across repeated runs of every command");
}
