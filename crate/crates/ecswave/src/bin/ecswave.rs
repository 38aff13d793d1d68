//! Command-line front end: build the two quotient pipelines, verify
//! certificates, and audit closed-form curvature against the numeric
//! oracle. Exit codes: 0 all checks pass, 1 a check failed, 2 bad input.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ecswave::construct;
use ecswave::curvature;
use ecswave::isometry;
use ecswave::planewave::{self, Interval, PlaneWaveSpec, PlaneWaveSpecJson, Point};
use ecswave::profile::FourierSeries;
use ecswave::quotient::{self, CertificateJson, QuotientCertificate};
use ecswave::report::{NamedCheck, ReportDocument, REPORT_VERSION};
use ecswave::tol;
use ecswave::Error;

#[derive(Parser)]
#[command(name = "ecswave", version, about = "compact plane-wave quotient certificates")]
struct Cli {
    /// Seed for sample points and lattice-vector retries.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an incomplete dilational quotient over I = (0, oo).
    BuildDilational {
        /// Manifold dimension (odd, >= 5).
        #[arg(long)]
        dim: usize,
        /// Integer trace q + 1/q of the dilation ratio (>= 3).
        #[arg(long)]
        trace: i64,
        /// Output file for the JSON report ('-' for stdout).
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Build a complete translational quotient over I = R.
    BuildTranslational {
        /// Manifold dimension (>= 5).
        #[arg(long)]
        dim: usize,
        /// Characteristic polynomial c0,c1,...,1 of the lattice map
        /// (constant term first, monic); omitted = search for one.
        #[arg(long, allow_hyphen_values = true)]
        charpoly: Option<String>,
        /// Amplitude of the cosine seed generating the potential.
        #[arg(long, default_value_t = 0.3)]
        seed_amp: f64,
        /// Period of the seed (= translation step of sigma).
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Generator of the central line Z theta in the lattice.
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Output file for the JSON report ('-' for stdout).
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Re-verify a certificate (or a full report) from a JSON file.
    Verify {
        /// ReportDocument or bare certificate JSON.
        file: String,
        /// Multiplies every tolerance (same as ECS_TOL_SCALE).
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// Audit closed-form curvature of a spec against finite differences.
    Curvature {
        /// Plane-wave spec JSON file.
        #[arg(long)]
        spec: String,
        /// Number of random sample points.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Verify { tol_scale: Some(s), .. } = &cli.command {
        // must land before the first tolerance lookup
        std::env::set_var("ECS_TOL_SCALE", s.to_string());
    }
    let code = match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code)
}

/// Input problems exit 2; failed numerical checks exit 1.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_)
        | Error::DegenerateGram(_)
        | Error::AsymmetricGram(_)
        | Error::NotSelfAdjoint(_)
        | Error::NotTraceless(_)
        | Error::ZeroOperator
        | Error::ConstantProfile(_)
        | Error::OutOfInterval(_)
        | Error::DimensionMismatch { .. }
        | Error::NoSystemFound(_, _)
        | Error::SearchExhausted(_)
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    match &cli.command {
        Cmd::BuildDilational { dim, trace, out } => {
            let build = construct::build_dilational(*dim, *trace, cli.seed)?;
            let report = ReportDocument {
                version: REPORT_VERSION.to_string(),
                spec: build.cert.spec.to_json(),
                certificate: Some(build.cert.to_json()),
                checks: build.checks,
                classification: Some(build.classification),
            };
            emit(&report, out)?;
            Ok(report.all_passed())
        }
        Cmd::BuildTranslational { dim, charpoly, seed_amp, period, theta, out } => {
            if *dim < 5 {
                return Err(Error::InvalidSpec(format!("--dim {dim} must be >= 5")));
            }
            let tmat = match charpoly {
                Some(text) => construct::integer_theta_from_charpoly(&parse_charpoly(text)?)?,
                None => construct::search_integer_theta(dim - 2)?,
            };
            let seed = FourierSeries { period: *period, a0: 0.0, cos: vec![*seed_amp], sin: vec![] };
            let build = construct::build_translational(*dim, &tmat, &seed, *theta)?;
            let report = ReportDocument {
                version: REPORT_VERSION.to_string(),
                spec: build.cert.spec.to_json(),
                certificate: Some(build.cert.to_json()),
                checks: build.checks,
                classification: Some(build.classification),
            };
            emit(&report, out)?;
            Ok(report.all_passed())
        }
        Cmd::Verify { file, .. } => {
            let text = std::fs::read_to_string(file)?;
            let cert_json = extract_certificate(&text)?;
            // a certificate that does not even reconstruct (bad gram,
            // non-validating sigma, ...) fails its reconstruction check
            // rather than aborting as an input error
            let recon = |passed: bool| NamedCheck {
                name: "certificate_reconstruction".into(),
                passed,
                residual: if passed { 0.0 } else { f64::INFINITY },
                tolerance: tol::scaled(tol::ACTION),
            };
            let (checks, classification) = match QuotientCertificate::from_json(&cert_json) {
                Ok(cert) => {
                    let mut checks = vec![recon(true)];
                    checks.extend(quotient::verify_certificate(&cert));
                    checks.extend(curvature_checks(&cert.spec, 5, 1e-4, cli.seed)?);
                    checks.extend(isometry_checks(&cert, 5, cli.seed)?);
                    (checks, quotient::classify_quotient(&cert).ok())
                }
                Err(e) => {
                    eprintln!("reconstruction: {e}");
                    (vec![recon(false)], None)
                }
            };
            let report = ReportDocument {
                version: REPORT_VERSION.to_string(),
                spec: cert_json.spec.clone(),
                certificate: Some(cert_json),
                checks,
                classification,
            };
            emit(&report, "-")?;
            Ok(report.all_passed())
        }
        Cmd::Curvature { spec, samples, step } => {
            let text = std::fs::read_to_string(spec)?;
            let doc: PlaneWaveSpecJson = serde_json::from_str(&text)?;
            let spec = PlaneWaveSpec::from_json(&doc)?;
            let checks = curvature_checks(&spec, *samples, *step, cli.seed)?;
            let rank = planewave::closed_form_curvature(&spec, &sample_point(&spec, &mut seeded(cli.seed)))?;
            eprintln!("olszak rank: {} (manifold rank {})", rank.olszak_rank, rank.manifold_rank);
            let report = ReportDocument {
                version: REPORT_VERSION.to_string(),
                spec: doc,
                certificate: None,
                checks,
                classification: None,
            };
            emit(&report, "-")?;
            Ok(report.all_passed())
        }
    }
}

fn parse_charpoly(text: &str) -> Result<Vec<i64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidSpec(format!("bad charpoly coefficient {s:?}")))
        })
        .collect()
}

/// Accepts either a full ReportDocument or a bare certificate.
fn extract_certificate(text: &str) -> Result<CertificateJson, Error> {
    if let Ok(report) = serde_json::from_str::<ReportDocument>(text) {
        if report.version != REPORT_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported report version {:?}",
                report.version
            )));
        }
        return report
            .certificate
            .ok_or_else(|| Error::InvalidSpec("report carries no certificate".into()));
    }
    Ok(serde_json::from_str::<CertificateJson>(text)?)
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample_point(spec: &PlaneWaveSpec, rng: &mut ChaCha8Rng) -> Point {
    let t = match spec.interval() {
        Interval::Real => rng.gen_range(-3.0..3.0),
        Interval::Positive => (rng.gen_range(-1.0f64..1.0)).exp(),
        Interval::Bounded { bounds: (lo, hi) } => {
            let margin = 0.1 * (hi - lo);
            rng.gen_range(lo + margin..hi - margin)
        }
    };
    let v = DVector::from_fn(spec.m(), |_, _| rng.gen_range(-1.0..1.0));
    Point::new(t, rng.gen_range(-1.0..1.0), v)
}

fn curvature_checks(
    spec: &PlaneWaveSpec,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<NamedCheck>, Error> {
    let mut rng = seeded(seed);
    let metric = |x: &[f64]| planewave::metric_at_coords(spec, x);
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let p = sample_point(spec, &mut rng);
        let riem = planewave::closed_form_riemann(spec, p.t);
        let ric = planewave::closed_form_ricci(spec, p.t);
        let rep = curvature::compare_at(&metric, &p.coords(), step, &riem, &ric)?;
        worst.0 = worst.0.max(rep.ricci_residual);
        worst.1 = worst.1.max(rep.weyl_residual);
        worst.2 = worst.2.max(rep.nabla_weyl_max);
        worst.3 = worst.3.max(rep.scalar_residual);
        worst.4 = worst.4.max(rep.parallel_s_residual);
    }
    Ok(vec![
        NamedCheck::new("curvature_ricci", worst.0, tol::scaled(tol::CURVATURE)),
        NamedCheck::new("curvature_weyl", worst.1, tol::scaled(tol::CURVATURE)),
        NamedCheck::new("curvature_nabla_weyl", worst.2, tol::scaled(10.0 * tol::CURVATURE)),
        NamedCheck::new("curvature_scalar", worst.3, tol::scaled(tol::SPECTRAL)),
        NamedCheck::new("curvature_parallel_s", worst.4, tol::scaled(10.0 * tol::CURVATURE)),
    ])
}

/// Pullback residual of the certificate's generator at random points.
fn isometry_checks(
    cert: &QuotientCertificate,
    samples: usize,
    seed: u64,
) -> Result<Vec<NamedCheck>, Error> {
    let spec = &cert.spec;
    let mut rng = seeded(seed ^ 0x5ca1ab1e);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let p = sample_point(spec, &mut rng);
        let image = isometry::apply_isometry(spec, &cert.gamma, &p)?;
        let jac = isometry::isometry_jacobian(spec, &cert.gamma, &p)?;
        let g_here = planewave::metric_at(spec, &p)?;
        let g_there = planewave::metric_at(spec, &image)?;
        let pulled = jac.transpose() * g_there * &jac;
        let scale = g_here.abs().max().max(1.0);
        worst = worst.max((pulled - g_here).abs().max() / scale);
    }
    Ok(vec![NamedCheck::new("isometry_pullback", worst, tol::scaled(tol::ACTION))])
}

fn emit(report: &ReportDocument, out: &str) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(report)?;
    if out == "-" {
        println!("{json}");
    } else {
        let mut f = std::fs::File::create(out)?;
        writeln!(f, "{json}")?;
    }
    // human-readable table on stderr
    eprintln!("{:<32} {:>6} {:>14} {:>12}", "check", "pass", "residual", "tolerance");
    for c in &report.checks {
        eprintln!(
            "{:<32} {:>6} {:>14.3e} {:>12.1e}",
            c.name,
            if c.passed { "ok" } else { "FAIL" },
            c.residual,
            c.tolerance
        );
    }
    if let Some(cl) = &report.classification {
        eprintln!(
            "classification: {:?}, {}, fiber {:?}, parameter {:.6}",
            cl.kind,
            if cl.complete { "complete" } else { "incomplete" },
            cl.fiber,
            cl.base_parameter
        );
    }
    Ok(())
}
