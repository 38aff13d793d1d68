//! The standard ECS plane wave (I x R x V, kappa dt^2 + dt ds + <.,.>):
//! metric, closed-form curvature, and the Olszak distribution.

use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvature::{self, Tensor4};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::pseudo::{self, PseudoSpace, SymOperator};
use crate::tol;

/// Open interval I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Interval {
    Real,
    Positive,
    Bounded { bounds: (f64, f64) },
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        match self {
            Interval::Real => t.is_finite(),
            Interval::Positive => t > 0.0,
            Interval::Bounded { bounds: (a, b) } => t > *a && t < *b,
        }
    }

    pub fn lo(&self) -> f64 {
        match self {
            Interval::Real => f64::NEG_INFINITY,
            Interval::Positive => 0.0,
            Interval::Bounded { bounds: (a, _) } => *a,
        }
    }

    pub fn hi(&self) -> f64 {
        match self {
            Interval::Real => f64::INFINITY,
            Interval::Positive => f64::INFINITY,
            Interval::Bounded { bounds: (_, b) } => *b,
        }
    }

    /// k interior sample points on a bounded reference window.
    pub fn samples(&self, k: usize) -> Vec<f64> {
        let (a, b) = match self {
            Interval::Real => (-4.0, 4.0),
            // geometric sampling keeps clear of the endpoint 0
            Interval::Positive => {
                return (0..k)
                    .map(|i| 0.25 * (16.0_f64).powf(i as f64 / (k - 1) as f64))
                    .collect();
            }
            Interval::Bounded { bounds: (a, b) } => {
                let margin = (b - a) * 0.05;
                (*a + margin, *b - margin)
            }
        };
        (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect()
    }
}

/// A standard ECS plane wave: dimension n, fiber (V, <.,.>) of dimension
/// n - 2, operator A, interval I, and profile f.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSpec {
    n: usize,
    space: PseudoSpace,
    a: SymOperator,
    interval: Interval,
    profile: Profile,
    fingerprint: u64,
}

/// Serialized form; exact field names are part of the CLI contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveSpecJson {
    pub n: usize,
    pub gram: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub interval: Interval,
    pub profile: Profile,
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidSpec("matrix rows have uneven length".into()));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl PlaneWaveSpec {
    pub fn new(
        n: usize,
        space: PseudoSpace,
        a: DMatrix<f64>,
        interval: Interval,
        profile: Profile,
    ) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidSpec(format!("n = {n} must be >= 4")));
        }
        if space.dim() != n - 2 {
            return Err(Error::InvalidSpec(format!(
                "fiber dimension {} != n - 2 = {}",
                space.dim(),
                n - 2
            )));
        }
        if !profile.defined_on(interval.lo(), interval.hi()) {
            return Err(Error::InvalidSpec(
                "profile has a pole inside the interval".into(),
            ));
        }
        let a = pseudo::check_operator(&space, &a)?;
        profile.check_nonconstant(&interval.samples(64))?;
        let mut spec = Self { n, space, a, interval, profile, fingerprint: 0 };
        spec.fingerprint = spec.compute_fingerprint();
        Ok(spec)
    }

    fn compute_fingerprint(&self) -> u64 {
        let json = serde_json::to_string(&self.to_json()).expect("spec serializes");
        let mut h = std::collections::hash_map::DefaultHasher::new();
        json.hash(&mut h);
        h.finish()
    }

    pub fn to_json(&self) -> PlaneWaveSpecJson {
        PlaneWaveSpecJson {
            n: self.n,
            gram: matrix_to_rows(self.space.gram()),
            a: matrix_to_rows(self.a.matrix()),
            interval: self.interval,
            profile: self.profile.clone(),
        }
    }

    pub fn from_json(doc: &PlaneWaveSpecJson) -> Result<Self> {
        let space = PseudoSpace::new(rows_to_matrix(&doc.gram)?)?;
        let a = rows_to_matrix(&doc.a)?;
        Self::new(doc.n, space, a, doc.interval, doc.profile.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fiber dimension m = n - 2.
    pub fn m(&self) -> usize {
        self.n - 2
    }

    pub fn space(&self) -> &PseudoSpace {
        &self.space
    }

    pub fn a(&self) -> &SymOperator {
        &self.a
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn f(&self, t: f64) -> f64 {
        self.profile.eval(t)
    }

    pub fn check_t(&self, t: f64) -> Result<()> {
        if self.interval.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfInterval(t))
        }
    }
}

/// A point (t, s, v) of the plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub t: f64,
    pub s: f64,
    pub v: DVector<f64>,
}

impl Point {
    pub fn new(t: f64, s: f64, v: DVector<f64>) -> Self {
        Self { t, s, v }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut x = vec![self.t, self.s];
        x.extend(self.v.iter());
        x
    }

    pub fn from_coords(x: &[f64]) -> Self {
        Self {
            t: x[0],
            s: x[1],
            v: DVector::from_row_slice(&x[2..]),
        }
    }
}

/// kappa(t, s, v) = f(t) <v,v> + <Av, v>; independent of s.
pub fn kappa_at(spec: &PlaneWaveSpec, t: f64, v: &DVector<f64>) -> Result<f64> {
    spec.check_t(t)?;
    let g = spec.space();
    Ok(spec.f(t) * g.inner(v, v) + g.inner(&(spec.a().matrix() * v), v))
}

/// Metric matrix in coordinates (t, s, x^1..x^m): g_tt = kappa, g_ts = 1/2,
/// g_ij = gram. The convention g(d_t, d_s) = 1/2 makes d_s correspond to dt/2.
pub fn metric_at(spec: &PlaneWaveSpec, p: &Point) -> Result<DMatrix<f64>> {
    spec.check_t(p.t)?;
    Ok(metric_at_coords(spec, &p.coords()))
}

/// Same as `metric_at` but on a raw coordinate slice (no interval check);
/// used by the finite-difference oracle.
pub fn metric_at_coords(spec: &PlaneWaveSpec, x: &[f64]) -> DMatrix<f64> {
    let n = spec.n();
    let m = spec.m();
    let v = DVector::from_row_slice(&x[2..]);
    let kappa = spec.f(x[0]) * spec.space().inner(&v, &v)
        + spec.space().inner(&(spec.a().matrix() * &v), &v);
    let mut g = DMatrix::zeros(n, n);
    g[(0, 0)] = kappa;
    g[(0, 1)] = 0.5;
    g[(1, 0)] = 0.5;
    for i in 0..m {
        for j in 0..m {
            g[(2 + i, 2 + j)] = spec.space().gram()[(i, j)];
        }
    }
    g
}

/// Closed-form curvature data at a point.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// Ricci tensor (n x n); single nonzero component Ric_tt = (2-n) f(t).
    pub ricci: DMatrix<f64>,
    /// Full lowered Weyl tensor W_{abcd} with layout W(e_a, e_b, e_c, e_d).
    pub weyl: Tensor4,
    /// Images of the basis bivectors d_t ^ d_j under the Weyl operator,
    /// as antisymmetric contravariant matrices; equals 2 d_s ^ A d_j.
    pub weyl_bivector_images: Vec<DMatrix<f64>>,
    /// Basis of the Olszak space at the point, solved brute-force from the
    /// defining wedge equation (columns, in (t, s, v) coordinates).
    pub olszak_basis: DMatrix<f64>,
    pub olszak_rank: usize,
    /// 1 when rank(A) > 1, 2 when rank(A) = 1.
    pub manifold_rank: usize,
}

/// Riemann tensor of the plane wave in closed form (layout
/// T_{abcd} = g(R(e_a, e_b) e_c, e_d), convention
/// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z).
pub fn closed_form_riemann(spec: &PlaneWaveSpec, t: f64) -> Tensor4 {
    let n = spec.n();
    let m = spec.m();
    let e = spec.space().gram() * spec.f(t) + spec.space().gram() * spec.a().matrix();
    let mut out = Tensor4::zeros(n);
    // T_{i t t d} = -E_{id} and its index-symmetry images
    for i in 0..m {
        for d in 0..m {
            let v = e[(i, d)];
            // (a,b,c,d) with fiber indices shifted by 2, t = 0
            out.set_with_symmetries(2 + i, 0, 0, 2 + d, -v);
        }
    }
    out
}

pub fn closed_form_ricci(spec: &PlaneWaveSpec, t: f64) -> DMatrix<f64> {
    let n = spec.n();
    let mut ric = DMatrix::zeros(n, n);
    ric[(0, 0)] = (2.0 - n as f64) * spec.f(t);
    ric
}

/// The closed-form Olszak space: span{d_s} for rank(A) > 1, and
/// span{d_s} + Im(A) for rank(A) = 1 (columns in (t,s,v) coordinates).
pub fn closed_form_olszak(spec: &PlaneWaveSpec) -> DMatrix<f64> {
    let n = spec.n();
    let m = spec.m();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut ds = DVector::zeros(n);
    ds[1] = 1.0;
    cols.push(ds);
    if spec.a().rank() == 1 {
        // image of A: singular direction above tolerance
        let svd = spec.a().matrix().clone().svd(true, false);
        let u = svd.u.expect("svd u");
        let mut dir = DVector::zeros(n);
        for i in 0..m {
            dir[2 + i] = u[(i, 0)];
        }
        cols.push(dir);
    }
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

pub fn closed_form_curvature(spec: &PlaneWaveSpec, p: &Point) -> Result<CurvatureReport> {
    spec.check_t(p.t)?;
    let n = spec.n();
    let m = spec.m();
    let g = metric_at(spec, p)?;
    let riem = closed_form_riemann(spec, p.t);
    let (ricci, scalar, weyl) = curvature::weyl_decompose(&g, &riem);
    debug_assert!(scalar.abs() < 1e-9);
    // bivector images W(d_t ^ d_j) = 2 d_s ^ (A d_j)
    let mut images = Vec::with_capacity(m);
    for j in 0..m {
        let aj = spec.a().matrix().column(j);
        let mut img = DMatrix::zeros(n, n);
        for d in 0..m {
            // (d_s ^ w)^{cd} = delta^c_s w^d - delta^d_s w^c, s index 1
            img[(1, 2 + d)] += 2.0 * aj[d];
            img[(2 + d, 1)] -= 2.0 * aj[d];
        }
        images.push(img);
    }
    let olszak_basis = curvature::olszak_space(&g, &weyl, tol::scaled(tol::RANK));
    let olszak_rank = olszak_basis.ncols();
    let manifold_rank = if spec.a().rank() == 1 { 2 } else { 1 };
    Ok(CurvatureReport {
        ricci,
        weyl,
        weyl_bivector_images: images,
        olszak_basis,
        olszak_rank,
        manifold_rank,
    })
}
