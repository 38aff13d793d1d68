//! End-to-end acceptance suite: one test per criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them on success).

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ecswave::construct::{
    self, build_dilational, build_translational, integer_theta_from_charpoly, DilationalBuild,
    TranslationalBuild,
};
use ecswave::curvature::{self, Tensor4};
use ecswave::isometry::{
    self, apply_isometry, compose, conjugate_on_h, invert, isometry_jacobian, killing_bracket,
    killing_value, lie_derivative_metric, numeric_commutator, validate_killing, HeisenbergElement,
    Isometry, KillingTriple, SigmaElement,
};
use ecswave::planewave::{
    closed_form_curvature, closed_form_ricci, closed_form_riemann, metric_at,
    metric_at_coords, Interval, PlaneWaveSpec, Point,
};
use ecswave::profile::{FourierSeries, Profile};
use ecswave::pseudo::{self, PseudoSpace};
use ecswave::quotient::{self, sigma_power};
use ecswave::symplectic::{self, SolutionVector};

fn dilational() -> &'static DilationalBuild {
    static B: OnceLock<DilationalBuild> = OnceLock::new();
    B.get_or_init(|| build_dilational(5, 3, 0).expect("dilational pipeline"))
}

fn translational() -> &'static TranslationalBuild {
    static B: OnceLock<TranslationalBuild> = OnceLock::new();
    B.get_or_init(|| {
        let tmat = integer_theta_from_charpoly(&[-1, 5, -6, 1]).unwrap();
        let seed = FourierSeries { period: 1.0, a0: 0.0, cos: vec![0.3], sin: vec![] };
        build_translational(5, &tmat, &seed, 1.0).expect("translational pipeline")
    })
}

fn sample_point(spec: &PlaneWaveSpec, rng: &mut ChaCha8Rng) -> Point {
    let t = match spec.interval() {
        Interval::Real => rng.gen_range(-2.0..2.0),
        Interval::Positive => (rng.gen_range(-0.5f64..1.0)).exp(),
        Interval::Bounded { bounds: (lo, hi) } => {
            let margin = 0.1 * (hi - lo);
            rng.gen_range(lo + margin..hi - margin)
        }
    };
    let v = DVector::from_fn(spec.m(), |_, _| rng.gen_range(-1.0..1.0));
    Point::new(t, rng.gen_range(-1.0..1.0), v)
}

fn both_specs() -> [&'static PlaneWaveSpec; 2] {
    [&dilational().cert.spec, &translational().cert.spec]
}

/// Contravariant image of the bivector d_t ^ d_j under a lowered
/// curvature-type tensor: X^{cd} = g^{ca} g^{db} W_{0,(2+j),a,b}.
fn bivector_image(g: &DMatrix<f64>, w: &Tensor4, j: usize, n: usize) -> DMatrix<f64> {
    let ginv = g.clone().try_inverse().expect("metric invertible");
    let mut x = DMatrix::zeros(n, n);
    for c in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += ginv[(c, a)] * ginv[(d, b)] * w.get(0, 2 + j, a, b);
                }
            }
            x[(c, d)] = s;
        }
    }
    x
}

#[test]
fn criterion_1_curvature_identity_suite() {
    let start = Instant::now();
    let h = 1e-4;
    for spec in both_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let metric = |x: &[f64]| metric_at_coords(spec, x);
        for _ in 0..20 {
            let p = sample_point(spec, &mut rng);
            let riem = closed_form_riemann(spec, p.t);
            let ric = closed_form_ricci(spec, p.t);
            let rep = curvature::compare_at(&metric, &p.coords(), h, &riem, &ric).unwrap();
            assert!(rep.ricci_residual < 1e-5, "Ricci residual {:.3e}", rep.ricci_residual);
            assert!(rep.scalar_residual < 1e-6, "scalar residual {:.3e}", rep.scalar_residual);
            assert!(rep.nabla_weyl_max < 1e-4, "nabla W {:.3e}", rep.nabla_weyl_max);

            // Weyl bivector images of the numeric tensor vs 2 d_s ^ A d_j
            let g0 = metric(&p.coords());
            let riem_num = curvature::riemann(&metric, &p.coords(), h).unwrap();
            let (_, _, weyl_num) = curvature::weyl_decompose(&g0, &riem_num);
            let closed = closed_form_curvature(spec, &p).unwrap();
            for j in 0..spec.m() {
                let img = bivector_image(&g0, &weyl_num, j, spec.n());
                let res = (&img - &closed.weyl_bivector_images[j]).abs().max();
                assert!(res < 1e-5, "bivector image residual {res:.3e}");
            }
        }
    }
    assert!(start.elapsed().as_secs() < 30, "criterion 1 runtime");
    println!("ACCEPTANCE 1 (curvature identity suite): PASS");
}

#[test]
fn criterion_2_olszak_ranks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let dil = &dilational().cert.spec;
    assert_eq!(dil.a().rank(), 1);
    let p = sample_point(dil, &mut rng);
    let rep = closed_form_curvature(dil, &p).unwrap();
    assert_eq!(rep.olszak_rank, 2);
    assert_eq!(rep.manifold_rank, 2);

    let tra = &translational().cert.spec;
    assert!(tra.a().rank() > 1);
    let p = sample_point(tra, &mut rng);
    let rep = closed_form_curvature(tra, &p).unwrap();
    assert_eq!(rep.olszak_rank, 1);
    assert_eq!(rep.manifold_rank, 1);

    // same answers from the finite-difference Weyl tensor
    for (spec, expected) in [(dil, 2usize), (tra, 1usize)] {
        let p = sample_point(spec, &mut rng);
        let metric = |x: &[f64]| metric_at_coords(spec, x);
        let g0 = metric(&p.coords());
        let riem = curvature::riemann(&metric, &p.coords(), 1e-4).unwrap();
        let (_, _, weyl) = curvature::weyl_decompose(&g0, &riem);
        let basis = curvature::olszak_space(&g0, &weyl, 1e-4);
        assert_eq!(basis.ncols(), expected);
    }
    println!("ACCEPTANCE 2 (Olszak rank dichotomy): PASS");
}

fn random_solution(spec: &PlaneWaveSpec, t: f64, rng: &mut ChaCha8Rng) -> SolutionVector {
    let m = spec.m();
    SolutionVector::new(
        t,
        DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0)),
        DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0)),
    )
}

fn random_isometry(
    spec: &PlaneWaveSpec,
    sigma: &SigmaElement,
    rng: &mut ChaCha8Rng,
) -> Isometry {
    let k = rng.gen_range(-1i64..=1);
    let pow = sigma_power(spec, sigma, k).unwrap();
    let t_star = pow.base_point();
    Isometry::new(spec, pow, rng.gen_range(-1.0..1.0), random_solution(spec, t_star, rng)).unwrap()
}

fn assert_isometries_close(a: &Isometry, b: &Isometry, tol: f64) {
    assert!((a.sigma.q - b.sigma.q).abs() < tol * (1.0 + a.sigma.q.abs()));
    assert!((a.sigma.p - b.sigma.p).abs() < tol * (1.0 + a.sigma.p.abs()));
    let cscale = 1.0 + a.sigma.c.abs().max();
    assert!((&a.sigma.c - &b.sigma.c).abs().max() < tol * cscale);
    assert!((a.r - b.r).abs() < tol * (1.0 + a.r.abs()));
    assert!((&a.u.value - &b.u.value).abs().max() < tol * (1.0 + a.u.value.abs().max()));
    assert!((&a.u.velocity - &b.u.velocity).abs().max() < tol * (1.0 + a.u.velocity.abs().max()));
}

#[test]
fn criterion_3_isometry_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // metric pullback at 100 random (isometry, point) pairs, split between
    // the two witnesses
    for build_sigma in [&dilational().cert.gamma.sigma, &translational().cert.gamma.sigma] {
        let spec = if build_sigma.q > 1.0 {
            &dilational().cert.spec
        } else {
            &translational().cert.spec
        };
        for _ in 0..50 {
            let phi = random_isometry(spec, build_sigma, &mut rng);
            let p = sample_point(spec, &mut rng);
            let image = apply_isometry(spec, &phi, &p).unwrap();
            let jac = isometry_jacobian(spec, &phi, &p).unwrap();
            let g_here = metric_at(spec, &p).unwrap();
            let g_there = metric_at(spec, &image).unwrap();
            let res = (jac.transpose() * g_there * &jac - &g_here).abs().max()
                / g_here.abs().max().max(1.0);
            assert!(res < 1e-8, "pullback residual {res:.3e}");
        }
    }

    // group axioms (associativity, identity, inverses) to 1e-9
    let spec = &dilational().cert.spec;
    let sigma = &dilational().cert.gamma.sigma;
    for _ in 0..10 {
        let a = random_isometry(spec, sigma, &mut rng);
        let b = random_isometry(spec, sigma, &mut rng);
        let c = random_isometry(spec, sigma, &mut rng);
        let left = compose(spec, &compose(spec, &a, &b).unwrap(), &c).unwrap();
        let right = compose(spec, &a, &compose(spec, &b, &c).unwrap()).unwrap();
        assert_isometries_close(&left, &right, 1e-9);

        let e = Isometry::identity(spec);
        assert_isometries_close(&compose(spec, &a, &e).unwrap(), &a, 1e-9);
        assert_isometries_close(&compose(spec, &e, &a).unwrap(), &a, 1e-9);

        let inv = invert(spec, &a).unwrap();
        let prod = compose(spec, &a, &inv).unwrap();
        assert!(prod.sigma.is_identity());
        // residual scale set by the transported solution, whose components
        // grow like powers of q under sigma
        let uscale = 1.0 + a.u.value.abs().max().max(a.u.velocity.abs().max());
        assert!(prod.r.abs() < 1e-9 * uscale * uscale);
        assert!(prod.u.value.abs().max() < 1e-9);
        assert!(prod.u.velocity.abs().max() < 1e-9);
    }

    // conjugation formula on the Heisenberg part vs composed conjugation
    for _ in 0..10 {
        let phi = random_isometry(spec, sigma, &mut rng);
        let t_star = phi.sigma.base_point();
        let h = HeisenbergElement {
            r: rng.gen_range(-1.0..1.0),
            u: random_solution(spec, t_star, &mut rng),
        };
        let h_iso = Isometry::new(spec, isometry::identity_sigma(spec), h.r, h.u.clone()).unwrap();
        let truth = compose(
            spec,
            &compose(spec, &phi, &h_iso).unwrap(),
            &invert(spec, &phi).unwrap(),
        )
        .unwrap();
        let conj = conjugate_on_h(spec, &phi, &h).unwrap();
        assert!((truth.r - conj.r).abs() < 1e-8 * (1.0 + truth.r.abs()));
        assert!((&truth.u.value - &conj.u.value).abs().max() < 1e-8);
        assert!((&truth.u.velocity - &conj.u.velocity).abs().max() < 1e-8);
    }

    // Killing fields: Lie derivative of the metric and the bracket formula
    let mk = |a: f64, ell: f64, wv: &[f64], wd: &[f64]| KillingTriple {
        a,
        b: 0.0,
        p: DMatrix::from_diagonal(&DVector::from_row_slice(&[a, 0.0, -a])),
        ell,
        w: SolutionVector::new(1.0, DVector::from_row_slice(wv), DVector::from_row_slice(wd)),
    };
    let x = mk(0.8, 0.3, &[0.2, -0.1, 0.4], &[0.0, 0.3, -0.2]);
    let y = mk(-0.5, -0.2, &[-0.3, 0.2, 0.1], &[0.1, 0.0, 0.2]);
    validate_killing(spec, &x).unwrap();
    validate_killing(spec, &y).unwrap();
    let fx = |z: &[f64]| killing_value(spec, &x, &Point::from_coords(z)).unwrap();
    let fy = |z: &[f64]| killing_value(spec, &y, &Point::from_coords(z)).unwrap();
    let br = killing_bracket(spec, &x, &y).unwrap();
    validate_killing(spec, &br).unwrap();
    let fb = |z: &[f64]| killing_value(spec, &br, &Point::from_coords(z)).unwrap();
    for _ in 0..10 {
        let p = sample_point(spec, &mut rng);
        let lie = lie_derivative_metric(spec, &fx, &p.coords(), 1e-5);
        assert!(lie.abs().max() < 1e-5, "Lie residual {:.3e}", lie.abs().max());
        let numeric = numeric_commutator(&fx, &fy, &p.coords(), 1e-5);
        let closed = fb(&p.coords());
        assert!((&numeric - &closed).abs().max() < 1e-5);
    }

    assert!(start.elapsed().as_secs() < 60, "criterion 3 runtime");
    println!("ACCEPTANCE 3 (isometry group suite): PASS");
}

#[test]
fn criterion_4_symplectic_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // Omega is constant in time over 100 pairs
    for spec in both_specs() {
        let t0 = symplectic::base_point(spec.interval());
        for _ in 0..50 {
            let u = random_solution(spec, t0, &mut rng);
            let w = random_solution(spec, t0, &mut rng);
            let before = symplectic::omega(spec, &u, &w).unwrap();
            let t1 = match spec.interval() {
                Interval::Positive => (rng.gen_range(-1.0f64..1.0)).exp(),
                _ => rng.gen_range(-2.0..2.0),
            };
            let ut = symplectic::transport(spec, &u, t1).unwrap();
            let wt = symplectic::transport(spec, &w, t1).unwrap();
            let after = symplectic::omega(spec, &ut, &wt).unwrap();
            assert!((before - after).abs() < 1e-8 * (1.0 + before.abs()));
        }
    }

    // sigma rescales Omega by 1/q
    for (build_sigma, spec) in [
        (&dilational().cert.gamma.sigma, &dilational().cert.spec),
        (&translational().cert.gamma.sigma, &translational().cert.spec),
    ] {
        let s = symplectic::sigma_matrix_on_e(spec, build_sigma).unwrap();
        let j = symplectic::j_gram(spec);
        let res = (s.transpose() * &j * &s - &j / build_sigma.q).abs().max();
        assert!(res < 1e-8, "sigma*Omega residual {res:.3e}");
    }

    // flow composition
    let spec = &dilational().cert.spec;
    for _ in 0..10 {
        let (t0, t1, t2) = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        );
        let direct = symplectic::flow(spec, t0, t2).unwrap();
        let stepped = symplectic::flow(spec, t1, t2).unwrap() * symplectic::flow(spec, t0, t1).unwrap();
        assert!((direct - stepped).abs().max() < 1e-8);
    }

    // Riccati <-> subspace round trip on the translational witness
    let tra = translational();
    let spec = &tra.cert.spec;
    let ts: Vec<f64> = (0..=80).map(|i| -0.4 + i as f64 * 0.01).collect();
    let recovered = symplectic::recover_riccati(spec, &tra.cert.l, &ts).unwrap();
    for &t in &ts {
        let (b0, _) = tra.riccati.eval(t);
        let (b1, _) = recovered.eval(t);
        assert!((b0 - b1).abs().max() < 1e-6);
    }

    // restricted determinant: closed formula vs direct, and both equal
    // det Theta = 1
    let (formula, direct) =
        symplectic::det_restriction(spec, &tra.riccati, &tra.cert.gamma.sigma).unwrap();
    assert!((formula - direct).abs() < 1e-6 * direct.abs());
    assert!((direct - 1.0).abs() < 1e-6);

    println!("ACCEPTANCE 4 (symplectic structure suite): PASS");
}

#[test]
fn criterion_5_dilational_witness() {
    let start = Instant::now();
    let build = dilational();
    let q: f64 = (3.0 + 5.0f64.sqrt()) / 2.0;

    assert_eq!(build.zsystem.e, vec![3, -2, 2, -3, 1, -4]);
    assert_eq!(build.zsystem.j, vec![1, 0, 0, 1, 1, 0]);
    build.zsystem.verify().unwrap();

    // sigma-spectrum within 1e-6 relative
    let smat =
        symplectic::sigma_matrix_on_e(&build.cert.spec, &build.cert.gamma.sigma).unwrap();
    let eigs = smat.complex_eigenvalues();
    let mut got: Vec<f64> = eigs
        .iter()
        .map(|z| {
            assert!(z.im.abs() < 1e-6 * (1.0 + z.re.abs()), "complex sigma eigenvalue");
            z.re
        })
        .collect();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut want: Vec<f64> = build.zsystem.e.iter().map(|&e| q.powi(e as i32)).collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-6 * w.abs(), "{g} vs {w}");
    }

    // integral conjugation with char. polynomial (x^2-3x+1)(x^2-18x+1)
    assert_eq!(construct::charpoly_coeffs(&build.lattice_conjugation), vec![1, -21, 56, -21, 1]);

    assert_eq!(build.cert.lattice.theta, 0.0);
    assert!(build.checks.iter().all(|c| c.passed));
    assert_eq!(build.classification.kind, isometry::SigmaKind::Dilational);
    assert!(!build.classification.complete);
    assert_eq!(build.classification.fiber, quotient::FiberKind::Torus);

    assert!(start.elapsed().as_secs() < 60, "criterion 5 runtime");
    println!("ACCEPTANCE 5 (dilational witness n=5, trace 3): PASS");
}

#[test]
fn criterion_6_translational_witness() {
    let start = Instant::now();
    let build = translational();

    // exp(-int B) eigenvalues match the charpoly roots
    let tmat = integer_theta_from_charpoly(&[-1, 5, -6, 1]).unwrap();
    for (log_int, lam) in build.log_integrals.iter().zip(&tmat.eigenvalues) {
        assert!(((-log_int).exp() - lam).abs() < 1e-6 * lam, "{log_int} vs {lam}");
    }

    // B' + B^2: traceless part a nonzero constant, trace part nonconstant
    let m = build.cert.spec.m() as f64;
    let probe: Vec<f64> = (0..50).map(|i| i as f64 * build.period / 50.0).collect();
    let mut first: Option<DMatrix<f64>> = None;
    let mut traces: Vec<f64> = Vec::new();
    for &t in &probe {
        let (b, db) = build.riccati.eval(t);
        let full = &db + &b * &b;
        let tr = full.trace();
        traces.push(tr);
        let traceless = &full - DMatrix::identity(b.nrows(), b.ncols()) * (tr / m);
        match &first {
            None => {
                assert!(traceless.abs().max() > 1e-6, "traceless part is zero");
                first = Some(traceless);
            }
            Some(f0) => {
                assert!((&traceless - f0).abs().max() < 1e-6, "traceless part drifts");
            }
        }
    }
    let range = traces.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - traces.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(range > 1e-2, "trace range {range:.3e}");

    assert_eq!(build.cert.lattice.theta, 1.0);
    assert!(build.checks.iter().all(|c| c.passed));
    assert_eq!(build.classification.kind, isometry::SigmaKind::Translational);
    assert!(build.classification.complete);
    assert_eq!(build.classification.fiber, quotient::FiberKind::Torus);

    assert!(start.elapsed().as_secs() < 120, "criterion 6 runtime");
    println!("ACCEPTANCE 6 (translational witness n=5): PASS");
}

#[test]
fn criterion_7_genericity_predicate() {
    // distinct diagonal spectrum: generic
    let euc = PseudoSpace::euclidean(3);
    let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 0.0, -1.0]));
    let op = pseudo::check_operator(&euc, &a).unwrap();
    let (generic, dim) = pseudo::is_generic(&euc, &op);
    assert!(generic && dim == 0);

    // paired eigenvalues: non-generic; reported dimension must match a
    // brute-force count over a basis of gram-skew matrices
    let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0, -2.0]));
    let op = pseudo::check_operator(&euc, &a).unwrap();
    let (generic, dim) = pseudo::is_generic(&euc, &op);
    assert!(!generic);
    let brute = {
        // commutator action on span{E_ij - E_ji : i < j}
        let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
        let mut sys = DMatrix::zeros(9, pairs.len());
        for (col, &(i, j)) in pairs.iter().enumerate() {
            let mut p = DMatrix::zeros(3, 3);
            p[(i, j)] = 1.0;
            p[(j, i)] = -1.0;
            let comm = &p * &a - &a * &p;
            for r in 0..3 {
                for c in 0..3 {
                    sys[(r * 3 + c, col)] = comm[(r, c)];
                }
            }
        }
        curvature::null_space(&sys, 1e-10).ncols()
    };
    assert_eq!(dim, brute, "centralizer dimension mismatch");

    // any nonzero operator on a 2-dimensional fiber is generic
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let euc2 = PseudoSpace::euclidean(2);
    let anti2 = PseudoSpace::anti_diagonal(2, 1.0);
    for _ in 0..20 {
        let (x, y): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if x.abs() + y.abs() < 0.1 {
            continue;
        }
        // euclidean: symmetric traceless
        let a = DMatrix::from_row_slice(2, 2, &[x, y, y, -x]);
        if let Ok(op) = pseudo::check_operator(&euc2, &a) {
            assert!(pseudo::is_generic(&euc2, &op).0);
        }
        // anti-diagonal gram: off-diagonal entries are free
        let a = DMatrix::from_row_slice(2, 2, &[0.0, x, y, 0.0]);
        if let Ok(op) = pseudo::check_operator(&anti2, &a) {
            assert!(pseudo::is_generic(&anti2, &op).0);
        }
    }
    println!("ACCEPTANCE 7 (genericity predicate): PASS");
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ecswave")
}

/// Runs `verify` on a certificate JSON with one field nudged by `bump`,
/// returning (exit code, stderr).
fn verify_corrupted(
    base: &serde_json::Value,
    mutate: &dyn Fn(&mut serde_json::Value),
    dir: &std::path::Path,
    tag: &str,
) -> (i32, String) {
    let mut doc = base.clone();
    mutate(&mut doc);
    let path = dir.join(format!("{tag}.json"));
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = Command::new(bin()).arg("verify").arg(&path).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn criterion_8_negative_controls() {
    let dir = tempfile::tempdir().unwrap();

    // even-dimensional dilational build is an input error
    let out = Command::new(bin())
        .args(["build-dilational", "--dim", "6", "--trace", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));

    // A = 0 is not a plane-wave spec
    let err = PlaneWaveSpec::new(
        5,
        PseudoSpace::euclidean(3),
        DMatrix::zeros(3, 3),
        Interval::Real,
        Profile::FourierPeriodic {
            series: FourierSeries { period: 1.0, a0: 1.0, cos: vec![0.5], sin: vec![] },
        },
    );
    assert!(matches!(err, Err(ecswave::Error::ZeroOperator)));

    // a pristine certificate verifies with exit 0 ...
    let base = serde_json::to_value(dilational().cert.to_json()).unwrap();
    let (code, log) = verify_corrupted(&base, &|_| {}, dir.path(), "clean");
    assert_eq!(code, 0, "clean certificate failed:\n{log}");

    // ... and each corrupted field fails its named check with exit 1
    let bump = 1e-3;
    let cases: Vec<(&str, Box<dyn Fn(&mut serde_json::Value)>, &str)> = vec![
        (
            "sigma ratio",
            Box::new(move |v| {
                let q = v["gamma"]["q"].as_f64().unwrap();
                v["gamma"]["q"] = (q + bump).into();
            }),
            "certificate_reconstruction",
        ),
        (
            "heisenberg part",
            Box::new(move |v| {
                let x = v["gamma"]["u"]["value"][0][0].as_f64().unwrap();
                v["gamma"]["u"]["value"][0][0] = (x + bump).into();
            }),
            "integral_conjugation",
        ),
        (
            "subspace basis",
            Box::new(move |v| {
                let x = v["subspace"]["basis"][0]["value"][0][0].as_f64().unwrap();
                v["subspace"]["basis"][0]["value"][0][0] = (x + bump).into();
            }),
            "subspace_sigma_invariant",
        ),
        (
            "lattice coordinate",
            Box::new(move |v| {
                let x = v["lattice"]["basis"][1]["coords"][0].as_f64().unwrap();
                v["lattice"]["basis"][1]["coords"][0] = (x + bump).into();
            }),
            "integral_conjugation",
        ),
        (
            "line parameter",
            Box::new(move |v| {
                v["lattice"]["theta"] = bump.into();
            }),
            "line_intersection",
        ),
    ];
    for (tag, mutate, expected_check) in &cases {
        let (code, log) = verify_corrupted(&base, mutate, dir.path(), tag.replace(' ', "_").as_str());
        assert_eq!(code, 1, "corrupting {tag} should exit 1:\n{log}");
        let failed_line = log
            .lines()
            .find(|l| l.starts_with(expected_check) && l.contains("FAIL"))
            .is_some();
        assert!(failed_line, "corrupting {tag} should fail {expected_check}:\n{log}");
    }

    // corrupted translational theta
    let base = serde_json::to_value(translational().cert.to_json()).unwrap();
    let (code, log) = verify_corrupted(
        &base,
        &|v| {
            let th = v["lattice"]["theta"].as_f64().unwrap();
            v["lattice"]["theta"] = (th + 1e-3).into();
        },
        dir.path(),
        "theta_translational",
    );
    assert_eq!(code, 1);
    assert!(log.lines().any(|l| l.starts_with("line_intersection") && l.contains("FAIL")));

    println!("ACCEPTANCE 8 (negative controls): PASS");
}
