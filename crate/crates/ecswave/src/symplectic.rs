//! The solution space (E, Omega) of the second-order linear ODE
//! u'' = f u + A u: transport by an adaptive fundamental-matrix flow, the
//! symplectic form, the sigma-action, and first-order subspaces described
//! by Riccati curves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::SigmaElement;
use crate::ode;
use crate::planewave::{Interval, PlaneWaveSpec};
use crate::profile::FourierSeries;
use crate::tol;

/// A solution of u'' = f u + A u, stored as initial data at a base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector {
    pub base_t: f64,
    pub value: DVector<f64>,
    pub velocity: DVector<f64>,
}

impl SolutionVector {
    pub fn zero(m: usize, base_t: f64) -> Self {
        Self { base_t, value: DVector::zeros(m), velocity: DVector::zeros(m) }
    }

    pub fn new(base_t: f64, value: DVector<f64>, velocity: DVector<f64>) -> Self {
        Self { base_t, value, velocity }
    }

    /// Stacked initial data (value; velocity) as a 2m-column.
    pub fn column(&self) -> DVector<f64> {
        let m = self.value.len();
        let mut y = DVector::zeros(2 * m);
        y.rows_mut(0, m).copy_from(&self.value);
        y.rows_mut(m, m).copy_from(&self.velocity);
        y
    }

    pub fn from_column(base_t: f64, y: &DVector<f64>) -> Self {
        let m = y.len() / 2;
        Self {
            base_t,
            value: y.rows(0, m).into(),
            velocity: y.rows(m, m).into(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.base_t, other.base_t);
        Self {
            base_t: self.base_t,
            value: &self.value + &other.value,
            velocity: &self.velocity + &other.velocity,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            base_t: self.base_t,
            value: c * &self.value,
            velocity: c * &self.velocity,
        }
    }
}

fn check_span(interval: Interval, t0: f64, t1: f64) -> Result<()> {
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    if interval.contains(lo) && interval.contains(hi) {
        Ok(())
    } else {
        Err(Error::IntervalViolation(lo, hi))
    }
}

/// Step bound keeping the integrator clear of finite interval endpoints
/// (the profile may blow up like 1/t^2 there).
fn pole_guard(interval: Interval) -> Option<Box<dyn Fn(f64) -> f64>> {
    let lo = interval.lo();
    let hi = interval.hi();
    if lo.is_infinite() && hi.is_infinite() {
        return None;
    }
    Some(Box::new(move |t: f64| {
        let mut d = f64::INFINITY;
        if lo.is_finite() {
            d = d.min((t - lo).abs());
        }
        if hi.is_finite() {
            d = d.min((hi - t).abs());
        }
        d / 4.0
    }))
}

/// Fundamental matrix of the first-order system y' = [[0, I], [f I + A, 0]] y
/// taking initial data at t0 to initial data at t1.
pub fn flow(spec: &PlaneWaveSpec, t0: f64, t1: f64) -> Result<DMatrix<f64>> {
    check_span(spec.interval(), t0, t1)?;
    let m = spec.m();
    let a = spec.a().matrix().clone();
    let rhs = move |t: f64, y: &DMatrix<f64>| -> DMatrix<f64> {
        let vals = y.rows(0, m);
        let vels = y.rows(m, m);
        let mut dy = DMatrix::zeros(2 * m, y.ncols());
        dy.rows_mut(0, m).copy_from(&vels);
        dy.rows_mut(m, m).copy_from(&(&a * &vals + spec.f(t) * &vals));
        dy
    };
    let guard = pole_guard(spec.interval());
    ode::integrate(
        rhs,
        t0,
        t1,
        DMatrix::identity(2 * m, 2 * m),
        tol::scaled(tol::ODE),
        guard.as_deref(),
    )
}

/// Initial data of `u` rebased to `t`.
pub fn transport(spec: &PlaneWaveSpec, u: &SolutionVector, t: f64) -> Result<SolutionVector> {
    let fl = flow(spec, u.base_t, t)?;
    Ok(SolutionVector::from_column(t, &(fl * u.column())))
}

/// (u(t), u'(t)).
pub fn evaluate(
    spec: &PlaneWaveSpec,
    u: &SolutionVector,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let moved = transport(spec, u, t)?;
    Ok((moved.value, moved.velocity))
}

/// Block matrix of Omega on stacked initial data:
/// Omega(y1, y2) = y1^T J y2 with J = [[0, -G], [G, 0]].
pub fn j_gram(spec: &PlaneWaveSpec) -> DMatrix<f64> {
    let m = spec.m();
    let g = spec.space().gram();
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    j.view_mut((0, m), (m, m)).copy_from(&(-g));
    j.view_mut((m, 0), (m, m)).copy_from(g);
    j
}

/// Omega(u, w) = <u', w> - <u, w'>; base points are reconciled by transport.
pub fn omega(spec: &PlaneWaveSpec, u: &SolutionVector, w: &SolutionVector) -> Result<f64> {
    let w = if w.base_t == u.base_t {
        w.clone()
    } else {
        transport(spec, w, u.base_t)?
    };
    let g = spec.space();
    Ok(g.inner(&u.velocity, &w.value) - g.inner(&u.value, &w.velocity))
}

/// Omega on stacked data columns at a common base point.
pub fn omega_columns(spec: &PlaneWaveSpec, y1: &DVector<f64>, y2: &DVector<f64>) -> f64 {
    (y1.transpose() * j_gram(spec) * y2)[(0, 0)]
}

/// Matrix of u -> sigma u on initial data at the sigma base point t*:
/// (sigma u)(t) = C u((t - p) / q), so the matrix is
/// [[C, 0], [0, C/q]] . flow(t*, (t* - p)/q).
pub fn sigma_matrix_on_e(spec: &PlaneWaveSpec, sigma: &SigmaElement) -> Result<DMatrix<f64>> {
    let m = spec.m();
    let t_star = sigma.base_point();
    let tau = (t_star - sigma.p) / sigma.q;
    let fl = flow(spec, t_star, tau)?;
    let mut big = DMatrix::zeros(2 * m, 2 * m);
    big.view_mut((0, 0), (m, m)).copy_from(&sigma.c);
    big.view_mut((m, m), (m, m)).copy_from(&(&sigma.c / sigma.q));
    Ok(big * fl)
}

/// A curve of operators B(t) with B' + B^2 = f + A, describing the
/// first-order subspace {u : u'(t) = B(t) u(t)}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiccatiCurve {
    ConstantDiagonal { entries: Vec<f64> },
    FourierDiagonal { entries: Vec<FourierSeries> },
    Sampled { ts: Vec<f64>, mats: Vec<Vec<Vec<f64>>>, dmats: Vec<Vec<Vec<f64>>> },
}

fn to_mat(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    DMatrix::from_fn(m, m, |i, j| rows[i][j])
}

impl RiccatiCurve {
    pub fn dim(&self) -> usize {
        match self {
            RiccatiCurve::ConstantDiagonal { entries } => entries.len(),
            RiccatiCurve::FourierDiagonal { entries } => entries.len(),
            RiccatiCurve::Sampled { mats, .. } => mats[0].len(),
        }
    }

    /// (B(t), B'(t)).
    pub fn eval(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        match self {
            RiccatiCurve::ConstantDiagonal { entries } => {
                let m = entries.len();
                (
                    DMatrix::from_fn(m, m, |i, j| if i == j { entries[i] } else { 0.0 }),
                    DMatrix::zeros(m, m),
                )
            }
            RiccatiCurve::FourierDiagonal { entries } => {
                let m = entries.len();
                let mut b = DMatrix::zeros(m, m);
                let mut db = DMatrix::zeros(m, m);
                for i in 0..m {
                    b[(i, i)] = entries[i].eval(t);
                    db[(i, i)] = entries[i].deriv(t);
                }
                (b, db)
            }
            RiccatiCurve::Sampled { ts, mats, dmats } => {
                // cubic Hermite on the bracketing grid cell
                let k = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(i) => return (to_mat(&mats[i]), to_mat(&dmats[i])),
                    Err(i) => i.clamp(1, ts.len() - 1),
                };
                let (t0, t1) = (ts[k - 1], ts[k]);
                let h = t1 - t0;
                let s = (t - t0) / h;
                let (m0, m1) = (to_mat(&mats[k - 1]), to_mat(&mats[k]));
                let (d0, d1) = (to_mat(&dmats[k - 1]), to_mat(&dmats[k]));
                let (s2, s3) = (s * s, s * s * s);
                let b = &m0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + &d0 * (h * (s3 - 2.0 * s2 + s))
                    + &m1 * (-2.0 * s3 + 3.0 * s2)
                    + &d1 * (h * (s3 - s2));
                let db = &m0 * ((6.0 * s2 - 6.0 * s) / h)
                    + &d0 * (3.0 * s2 - 4.0 * s + 1.0)
                    + &m1 * ((6.0 * s - 6.0 * s2) / h)
                    + &d1 * (3.0 * s2 - 2.0 * s);
                (b, db)
            }
        }
    }

    /// Residual of the defining equation B' + B^2 = f + A on a 128-point
    /// sample of the interval (restricted to the grid span for sampled
    /// representations).
    pub fn validate(&self, spec: &PlaneWaveSpec) -> Result<()> {
        if self.dim() != spec.m() {
            return Err(Error::DimensionMismatch { expected: spec.m(), got: self.dim() });
        }
        let a = spec.a().matrix();
        let bound = 1e-6 * (1.0 + a.abs().max());
        let samples: Vec<f64> = match self {
            RiccatiCurve::Sampled { ts, .. } => {
                let (lo, hi) = (ts[0], *ts.last().unwrap());
                (0..128).map(|i| lo + (hi - lo) * i as f64 / 127.0).collect()
            }
            _ => spec.interval().samples(128),
        };
        let mut worst = 0.0_f64;
        for &t in &samples {
            let (b, db) = self.eval(t);
            let target = a + DMatrix::from_diagonal_element(spec.m(), spec.m(), spec.f(t));
            let res = (db + &b * &b - target).abs().max();
            worst = worst.max(res);
        }
        if worst < bound {
            Ok(())
        } else {
            Err(Error::ResidualTooLarge(worst))
        }
    }
}

/// A subspace of E: columns of stacked initial data at a common base point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Subspace {
    pub base_t: f64,
    pub basis: Vec<SolutionVector>,
}

impl Subspace {
    pub fn new(base_t: f64, basis: Vec<SolutionVector>) -> Result<Self> {
        let mtx = basis_matrix(base_t, &basis);
        let svd = mtx.svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if min <= 1e-8 * max {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: 0 });
        }
        Ok(Self { base_t, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        basis_matrix(self.base_t, &self.basis)
    }
}

fn basis_matrix(base_t: f64, basis: &[SolutionVector]) -> DMatrix<f64> {
    let m2 = 2 * basis[0].value.len();
    let mut mtx = DMatrix::zeros(m2, basis.len());
    for (j, u) in basis.iter().enumerate() {
        debug_assert_eq!(u.base_t, base_t);
        mtx.set_column(j, &u.column());
    }
    mtx
}

/// Default anchoring time for subspaces and Riccati data.
pub fn base_point(interval: Interval) -> f64 {
    if interval.contains(0.0) {
        0.0
    } else if interval.contains(1.0) {
        1.0
    } else {
        0.5 * (interval.lo() + interval.hi())
    }
}

/// The first-order subspace of a Riccati curve: u_i = (e_i, B(t*) e_i).
pub fn riccati_basis(spec: &PlaneWaveSpec, b: &RiccatiCurve) -> Result<Subspace> {
    b.validate(spec)?;
    let m = spec.m();
    let t_star = base_point(spec.interval());
    let (bm, _) = b.eval(t_star);
    let basis = (0..m)
        .map(|i| {
            let e = DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 });
            SolutionVector::new(t_star, e.clone(), &bm * e)
        })
        .collect();
    Subspace::new(t_star, basis)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub first_order_min_sv: f64,
    pub first_order: bool,
    pub lagrangian_max: f64,
    pub lagrangian: bool,
    pub sigma_residual: Option<f64>,
    pub sigma_invariant: Option<bool>,
}

/// First-order / Lagrangian / sigma-invariance checks for a subspace of
/// dimension m.
pub fn subspace_checks(
    spec: &PlaneWaveSpec,
    l: &Subspace,
    sigma: Option<&SigmaElement>,
) -> Result<CheckReport> {
    let m = spec.m();
    if l.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: l.dim() });
    }
    let basis = l.matrix();

    // (a) the value-part projection stays an isomorphism along a grid,
    // transported step by step to reuse short flows
    let mut grid = spec.interval().samples(64);
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut min_sv = f64::INFINITY;
    let mut cur_t = l.base_t;
    let mut cur = basis.clone();
    // normalize column scale so the threshold is scale-free
    let max_sv0 = cur.clone().svd(false, false).singular_values.max();
    for &t in &grid {
        cur = flow(spec, cur_t, t)? * cur;
        cur_t = t;
        let vals: DMatrix<f64> = cur.rows(0, m).into();
        let sv = vals.svd(false, false).singular_values;
        min_sv = min_sv.min(sv.min() / max_sv0);
    }

    // (b) Omega vanishes on the basis
    let j = j_gram(spec);
    let gramian = basis.transpose() * j * &basis;
    let lagrangian_max = gramian.abs().max();

    // (c) sigma-invariance by projection residual at the sigma base point
    let (sigma_residual, sigma_invariant) = if let Some(s) = sigma {
        let t_star = s.base_point();
        let moved = flow(spec, l.base_t, t_star)? * &basis;
        let image = sigma_matrix_on_e(spec, s)? * &moved;
        let qr = moved.clone().qr();
        let q = qr.q();
        let proj = &q * (q.transpose() * &image);
        let res = (&image - proj).abs().max() / image.abs().max().max(1e-300);
        (Some(res), Some(res < tol::scaled(tol::ACTION)))
    } else {
        (None, None)
    };

    Ok(CheckReport {
        first_order_min_sv: min_sv,
        first_order: min_sv > 1e-6,
        lagrangian_max,
        lagrangian: lagrangian_max < tol::scaled(tol::ACTION),
        sigma_residual,
        sigma_invariant,
    })
}

/// det(sigma|_L) two ways: the closed formula
/// (det C) exp(-int_{e}^{sigma e} tr B) and the direct determinant of the
/// sigma-matrix restricted to L(B).
pub fn det_restriction(
    spec: &PlaneWaveSpec,
    b: &RiccatiCurve,
    sigma: &SigmaElement,
) -> Result<(f64, f64)> {
    let l = riccati_basis(spec, b)?;
    let report = subspace_checks(spec, &l, Some(sigma))?;
    if report.sigma_invariant != Some(true) {
        return Err(Error::NotInvariant(report.sigma_residual.unwrap_or(f64::NAN)));
    }
    let eps = sigma.base_point();
    let sigma_eps = sigma.q * eps + sigma.p;
    let trace_b = |t: f64| b.eval(t).0.trace();
    let integral = ode::quad(&trace_b, eps, sigma_eps, tol::scaled(tol::ODE));
    let det_formula = sigma.c.determinant() * (-integral).exp();

    // direct: coordinates of the image in the basis of L (least squares)
    let t_star = sigma.base_point();
    let basis = flow(spec, l.base_t, t_star)? * l.matrix();
    let image = sigma_matrix_on_e(spec, sigma)? * &basis;
    let gram = basis.transpose() * &basis;
    let coords = gram
        .lu()
        .solve(&(basis.transpose() * image))
        .ok_or(Error::NondegenerateCheckFailed(0.0))?;
    Ok((det_formula, coords.determinant()))
}

/// Recover B(t) = [velocity part][value part]^{-1} of a transported basis
/// on a sample grid, as a sampled Riccati curve. The first-order check
/// guards the inversion.
pub fn recover_riccati(spec: &PlaneWaveSpec, l: &Subspace, ts: &[f64]) -> Result<RiccatiCurve> {
    let m = spec.m();
    if l.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: l.dim() });
    }
    let b_at = |t: f64| -> Result<DMatrix<f64>> {
        let moved = flow(spec, l.base_t, t)? * l.matrix();
        let vals: DMatrix<f64> = moved.rows(0, m).into();
        let vels: DMatrix<f64> = moved.rows(m, m).into();
        let svd = vals.clone().svd(false, false);
        if svd.singular_values.min() <= 1e-6 * svd.singular_values.max() {
            return Err(Error::NondegenerateCheckFailed(svd.singular_values.min()));
        }
        Ok(vals
            .lu()
            .solve(&DMatrix::identity(m, m))
            .map(|inv| vels * inv)
            .ok_or(Error::NondegenerateCheckFailed(0.0))?)
    };
    let mut mats = Vec::with_capacity(ts.len());
    let mut dmats = Vec::with_capacity(ts.len());
    let delta = 1e-4;
    for &t in ts {
        let b = b_at(t)?;
        let db = (b_at(t + delta)? - b_at(t - delta)?) / (2.0 * delta);
        mats.push((0..m).map(|i| (0..m).map(|j| b[(i, j)]).collect()).collect());
        dmats.push((0..m).map(|i| (0..m).map(|j| db[(i, j)]).collect()).collect());
    }
    Ok(RiccatiCurve::Sampled { ts: ts.to_vec(), mats, dmats })
}
