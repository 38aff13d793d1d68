//! The two constructive pipelines emitting compactness certificates: the
//! dilational one (integer spectral data + homogeneous profile on (0, oo))
//! and the translational one (periodic profile built by Hill-equation
//! shooting on R), plus the combinatorial and arithmetic searches feeding
//! them.

use nalgebra::{DMatrix, DVector};
use num::{BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::isometry::{self, Isometry, SigmaKind};
use crate::planewave::{Interval, PlaneWaveSpec};
use crate::profile::{FourierSeries, Profile};
use crate::pseudo::PseudoSpace;
use crate::quotient::{
    self, Classification, FiberKind, LatticeData, LatticeVector, QuotientCertificate,
};
use crate::report::NamedCheck;
use crate::symplectic::{self, RiccatiCurve, SolutionVector, Subspace};
use crate::{ode, tol};

// ---------------------------------------------------------------------------
// integer spectral systems
// ---------------------------------------------------------------------------

/// The combinatorial data (m, k, E, J) driving the dilational pipeline.
/// E and J are stored 0-indexed; the defining conditions below use the
/// 1-indexed convention i = idx + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZSpectralSystem {
    pub m: usize,
    pub k: i64,
    pub e: Vec<i64>,
    pub j: Vec<u8>,
}

impl ZSpectralSystem {
    /// Indices (0-based) selected by J = 1.
    pub fn s1(&self) -> Vec<usize> {
        (0..2 * self.m).filter(|&i| self.j[i] == 1).collect()
    }

    /// The symmetric exponent set {-1} union E(S1), sorted.
    pub fn y(&self) -> Vec<i64> {
        let mut y: Vec<i64> = self.s1().iter().map(|&i| self.e[i]).collect();
        y.push(-1);
        y.sort_unstable();
        y
    }

    /// Independent re-check of every defining condition, including the
    /// selector property of S1 for both index pairings.
    pub fn verify(&self) -> Result<()> {
        let m = self.m;
        let fail = |msg: &str| Err(Error::InvalidSpec(format!("spectral system: {msg}")));
        if self.e.len() != 2 * m || self.j.len() != 2 * m {
            return fail("wrong length");
        }
        if self.e.contains(&-1) {
            return fail("E hits -1");
        }
        let mut sorted = self.e.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != 2 * m {
            return fail("E not injective");
        }
        // (i)
        if self.k + 1 != 2 * self.e[0] {
            return fail("k + 1 != 2 E(1)");
        }
        // (ii): i + i' = 2m + 1 (1-indexed) <=> idx + idx' = 2m - 1
        for i in 0..2 * m {
            let ip = 2 * m - 1 - i;
            if self.e[i] + self.e[ip] != -1 || self.j[i] + self.j[ip] != 1 {
                return fail("mirror pair condition");
            }
        }
        // (iii): consecutive pairs (2j-1, 2j)
        for a in 0..m {
            let (i, ip) = (2 * a, 2 * a + 1);
            if self.e[i] - self.e[ip] != self.k || self.j[i] + self.j[ip] != 1 {
                return fail("consecutive pair condition");
            }
        }
        // (iv): Y symmetric about 0
        let y = self.y();
        if y.len() != m + 1 {
            return fail("Y has repeats");
        }
        for &a in &y {
            if !y.contains(&-a) {
                return fail("Y not symmetric");
            }
        }
        // selector: S1 meets each {i, 2m+1-i} and each {2j-1, 2j} exactly once
        let s1 = self.s1();
        for i in 0..m {
            let mirror = s1.contains(&i) as u8 + s1.contains(&(2 * m - 1 - i)) as u8;
            let consec = s1.contains(&(2 * i)) as u8 + s1.contains(&(2 * i + 1)) as u8;
            if mirror != 1 || consec != 1 {
                return fail("S1 is not a selector");
            }
        }
        Ok(())
    }
}

/// Backtracking search for a spectral system with the given (m, k),
/// returning the lexicographically first solution.
///
/// Conditions (i)-(iii) force almost everything: writing p_j = E(2j-1),
/// the even entries are E(2j) = p_j - k and the mirror relation pins
/// p_{m+1-j} = k - 1 - p_j, so only p_2 .. p_{floor(m/2)} are free, plus
/// one J bit per pair with the mirror symmetry b_j = b_{m+1-j}.
pub fn search_zspectral(m: usize, k: i64) -> Result<ZSpectralSystem> {
    if m < 2 || k < 2 || k % 2 == 0 {
        return Err(Error::NoSystemFound(m, k));
    }
    let half = m / 2; // free odd-pair values are p_2 .. p_half
    let free = half.saturating_sub(1);
    let bound: i64 = 3 * k.max(m as i64) + 3;

    // candidate values for each free p_j, in lexicographic order
    let values: Vec<i64> = (-bound..=bound).collect();
    let mut choice = vec![0usize; free];

    loop {
        let mut p = vec![0i64; m];
        p[0] = (k + 1) / 2;
        for (slot, &ci) in choice.iter().enumerate() {
            p[slot + 1] = values[ci];
        }
        if m % 2 == 1 {
            p[m / 2] = (k - 1) / 2;
        }
        for jdx in half..m {
            if jdx != 0 && !(m % 2 == 1 && jdx == m / 2) {
                p[jdx] = k - 1 - p[m - 1 - jdx];
            }
        }

        let mut e = vec![0i64; 2 * m];
        for jdx in 0..m {
            e[2 * jdx] = p[jdx];
            e[2 * jdx + 1] = p[jdx] - k;
        }

        if admissible_e(&e) {
            // J bits: one per pair, mirror-symmetric
            let nb = m.div_ceil(2);
            for mask in 0..(1u32 << nb) {
                let mut b = vec![0u8; m];
                for jdx in 0..nb {
                    b[jdx] = ((mask >> (nb - 1 - jdx)) & 1) as u8;
                    b[m - 1 - jdx] = b[jdx];
                }
                let mut j = vec![0u8; 2 * m];
                for jdx in 0..m {
                    j[2 * jdx] = b[jdx];
                    j[2 * jdx + 1] = 1 - b[jdx];
                }
                let sys = ZSpectralSystem { m, k, e: e.clone(), j };
                if sys.verify().is_ok() {
                    return Ok(sys);
                }
            }
        }

        // advance the free choices
        let mut carry = true;
        for slot in (0..free).rev() {
            if carry {
                choice[slot] += 1;
                if choice[slot] == values.len() {
                    choice[slot] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if free == 0 || carry {
            break;
        }
    }
    Err(Error::NoSystemFound(m, k))
}

fn admissible_e(e: &[i64]) -> bool {
    if e.contains(&-1) {
        return false;
    }
    let mut sorted = e.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == e.len()
}

// ---------------------------------------------------------------------------
// integer matrices with real, distinct, positive spectrum
// ---------------------------------------------------------------------------

/// Companion matrix of a monic integer polynomial whose roots are real,
/// distinct, positive and different from 1; det = +-1 by construction.
#[derive(Debug, Clone)]
pub struct IntegerThetaMatrix {
    /// Coefficients c_0 .. c_{m-1} of x^m + c_{m-1} x^{m-1} + ... + c_0.
    pub coeffs: Vec<i64>,
    pub matrix: Vec<Vec<i64>>,
    /// Roots in increasing order, isolated to 1e-10.
    pub eigenvalues: Vec<f64>,
}

impl IntegerThetaMatrix {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn det(&self) -> i64 {
        let m = self.dim() as u32;
        // companion determinant: (-1)^m * c0
        if m % 2 == 0 { self.coeffs[0] } else { -self.coeffs[0] }
    }
}

/// Validates `coeffs = [c0, ..., c_{m-1}, 1]` (constant term first, monic)
/// and returns the companion matrix with its isolated spectrum.
pub fn integer_theta_from_charpoly(coeffs: &[i64]) -> Result<IntegerThetaMatrix> {
    let bad = |msg: String| Err(Error::InvalidSpec(msg));
    if coeffs.len() < 3 {
        return bad("characteristic polynomial must have degree >= 2".into());
    }
    if *coeffs.last().unwrap() != 1 {
        return bad("characteristic polynomial must be monic (leading 1)".into());
    }
    let m = coeffs.len() - 1;
    let c: Vec<i64> = coeffs[..m].to_vec();
    if c[0].abs() != 1 {
        return bad("constant term must be +-1 (unimodular matrix)".into());
    }
    let roots = positive_distinct_roots(&c)?;
    let mut matrix = vec![vec![0i64; m]; m];
    for i in 0..m {
        if i + 1 < m {
            matrix[i + 1][i] = 1;
        }
        matrix[i][m - 1] = -c[i];
    }
    Ok(IntegerThetaMatrix { coeffs: c, matrix, eigenvalues: roots })
}

/// Searches companion matrices over growing coefficient boxes, returning
/// the first (in shell-then-lexicographic order) whose roots qualify.
pub fn search_integer_theta(m: usize) -> Result<IntegerThetaMatrix> {
    assert!(m >= 3, "search requires m >= 3");
    const MAX_BOUND: i64 = 24;
    for bound in 1..=MAX_BOUND {
        let mut idx = vec![0usize; m - 1]; // c_{m-1} .. c_1, most significant first
        let values: Vec<i64> = (-bound..=bound).collect();
        loop {
            let picked: Vec<i64> = idx.iter().map(|&i| values[i]).collect();
            if picked.iter().map(|v| v.abs()).max() == Some(bound) {
                for c0 in [-1i64, 1] {
                    let mut coeffs = vec![c0];
                    coeffs.extend(picked.iter().rev()); // c_1 .. c_{m-1}
                    coeffs.push(1);
                    if let Ok(t) = integer_theta_from_charpoly(&coeffs) {
                        return Ok(t);
                    }
                }
            }
            let mut carry = true;
            for slot in (0..m - 1).rev() {
                if carry {
                    idx[slot] += 1;
                    if idx[slot] == values.len() {
                        idx[slot] = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
    }
    Err(Error::SearchExhausted(MAX_BOUND))
}

// --- exact root counting (Sturm chains over the rationals) ---

type Poly = Vec<BigRational>;

fn poly_trim(p: &mut Poly) {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
}

fn poly_deriv(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    (1..p.len())
        .map(|i| &p[i] * BigRational::from_i64(i as i64).unwrap())
        .collect()
}

fn poly_eval(p: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Remainder of a by b (b nonzero, trimmed).
fn poly_rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db.max(1) || (db == 0 && !(r.len() == 1 && r[0].is_zero())) {
        let dr = r.len() - 1;
        let q = &r[dr] / &lead;
        for i in 0..=db {
            let sub = &q * &b[i];
            r[dr - db + i] -= sub;
        }
        // the leading term cancels exactly over the rationals
        debug_assert!(r[dr].is_zero());
        if r.len() > 1 {
            r.pop();
        }
        poly_trim(&mut r);
    }
    r
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), poly_deriv(p)];
    loop {
        let k = chain.len();
        let next_candidate = poly_rem(&chain[k - 2], &chain[k - 1]);
        if next_candidate.len() == 1 && next_candidate[0].is_zero() {
            break;
        }
        chain.push(next_candidate.iter().map(|c| -c).collect());
    }
    chain
}

fn sign_variations(chain: &[Poly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in chain {
        let v = poly_eval(p, x);
        let s = if v.is_zero() { 0 } else if v.is_positive() { 1 } else { -1 };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of roots in (a, b].
fn count_roots(chain: &[Poly], a: &BigRational, b: &BigRational) -> usize {
    sign_variations(chain, a) - sign_variations(chain, b)
}

/// All roots of x^m + c_{m-1} x^{m-1} + ... + c_0 when they are real,
/// distinct, positive, and != 1; errors otherwise. Roots are isolated by
/// Sturm counts and refined by bisection to 1e-10.
fn positive_distinct_roots(c: &[i64]) -> Result<Vec<f64>> {
    let m = c.len();
    let mut p: Poly = c
        .iter()
        .map(|&v| BigRational::from_i64(v).unwrap())
        .collect();
    p.push(BigRational::one());

    let one = BigRational::one();
    if poly_eval(&p, &one).is_zero() {
        return Err(Error::InvalidSpec("1 is an eigenvalue".into()));
    }
    let chain = sturm_chain(&p);
    // squarefree <=> gcd(p, p') constant <=> last chain entry has degree 0
    if chain.last().unwrap().len() > 1 {
        return Err(Error::InvalidSpec("repeated eigenvalue".into()));
    }
    let bound = 1 + c.iter().map(|v| v.abs()).max().unwrap();
    let r = BigRational::from_i64(bound).unwrap();
    if count_roots(&chain, &(-r.clone()), &r) != m {
        return Err(Error::InvalidSpec("complex eigenvalues".into()));
    }
    if count_roots(&chain, &BigRational::zero(), &r) != m {
        return Err(Error::InvalidSpec("non-positive eigenvalue".into()));
    }

    // isolate, then bisect in floats
    let two = BigRational::from_i64(2).unwrap();
    let mut stack = vec![(BigRational::zero(), r.clone(), m)];
    let mut isolated: Vec<(f64, f64)> = Vec::new();
    while let Some((lo, hi, cnt)) = stack.pop() {
        if cnt == 0 {
            continue;
        }
        if cnt == 1 {
            isolated.push((lo.to_f64().unwrap(), hi.to_f64().unwrap()));
            continue;
        }
        let mut mid = (&lo + &hi) / &two;
        if poly_eval(&p, &mid).is_zero() {
            // only +-1 can be rational roots of a unimodular monic poly,
            // and 1 was excluded above; nudge just in case
            mid = (&lo + &mid) / &two;
        }
        let left = count_roots(&chain, &lo, &mid);
        stack.push((lo, mid.clone(), left));
        stack.push((mid, hi, cnt - left));
    }
    isolated.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let eval = |x: f64| {
        let mut acc = 1.0f64;
        for &v in c.iter().rev() {
            acc = acc * x + v as f64;
        }
        acc
    };
    let mut roots = Vec::with_capacity(m);
    for (mut lo, mut hi) in isolated {
        let (flo, fhi) = (eval(lo), eval(hi));
        debug_assert!(flo * fhi <= 0.0);
        let target_neg_lo = flo < 0.0;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if (eval(mid) < 0.0) == target_neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    Ok(roots)
}

// ---------------------------------------------------------------------------
// Hill-equation monodromy
// ---------------------------------------------------------------------------

/// Floquet data of x'' = (phi(t) + delta) x over one period.
#[derive(Debug, Clone, Copy)]
pub struct FloquetData {
    pub trace: f64,
    /// (larger, smaller); product 1 by the Wronskian identity.
    pub multipliers: (f64, f64),
}

/// Monodromy matrix over [0, p] acting on (x, x').
pub fn hill_monodromy(profile: &Profile, delta: f64, period: f64) -> Result<DMatrix<f64>> {
    let rhs = move |t: f64, y: &DMatrix<f64>| {
        let mut dy = DMatrix::zeros(2, y.ncols());
        for j in 0..y.ncols() {
            dy[(0, j)] = y[(1, j)];
            dy[(1, j)] = (profile.eval(t) + delta) * y[(0, j)];
        }
        dy
    };
    ode::integrate(rhs, 0.0, period, DMatrix::identity(2, 2), tol::scaled(tol::ODE), None)
}

/// Floquet multipliers of the Hill equation; errors in the stability gap
/// (complex multipliers, |trace| < 2).
pub fn floquet_exponent(profile: &Profile, delta: f64, period: f64) -> Result<FloquetData> {
    let mono = hill_monodromy(profile, delta, period)?;
    let trace = mono.trace();
    let disc = trace * trace - 4.0;
    if disc <= 0.0 {
        return Err(Error::ComplexMultipliers(trace));
    }
    let root = disc.sqrt();
    Ok(FloquetData { trace, multipliers: ((trace + root) / 2.0, (trace - root) / 2.0) })
}

/// delta with monodromy trace equal to `target` (> 2): outward scan from 0
/// followed by bisection. trace(0) = 2 whenever phi = b' + b^2 for a
/// periodic b, so the bracket always opens upward.
fn find_delta(profile: &Profile, period: f64, target: f64) -> Result<f64> {
    assert!(target > 2.0);
    let trace_at = |d: f64| -> Result<f64> { Ok(hill_monodromy(profile, d, period)?.trace()) };
    let mut lo = 0.0;
    if trace_at(lo)? >= target {
        return Err(Error::FloquetGap(format!(
            "monodromy trace already exceeds target {target} at delta = 0"
        )));
    }
    let mut hi = 0.25;
    while trace_at(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::FloquetGap(format!("no delta below 1e6 reaches trace {target}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
        let fm = trace_at(mid)? - target;
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The periodic Riccati entry b = x'/x of the Floquet eigenfunction with
/// multiplier `mu`, sampled at `nodes`+1 equally spaced points of [0, p].
/// Returns (b values, b' values).
fn floquet_riccati_samples(
    profile: &Profile,
    delta: f64,
    period: f64,
    mu: f64,
    nodes: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mono = hill_monodromy(profile, delta, period)?;
    // 2x2 eigenvector for eigenvalue mu, picking the better-conditioned row
    let r1 = DVector::from_vec(vec![-mono[(0, 1)], mono[(0, 0)] - mu]);
    let r2 = DVector::from_vec(vec![mono[(1, 1)] - mu, -mono[(1, 0)]]);
    let mut v = if r1.norm() >= r2.norm() { r1 } else { r2 };
    if v[0].abs() < 1e-9 * v.norm() {
        return Err(Error::FloquetGap("Floquet eigenfunction vanishes at t = 0".into()));
    }
    v /= v[0];

    let rhs = move |t: f64, y: &DMatrix<f64>| {
        let mut dy = DMatrix::zeros(2, 1);
        dy[(0, 0)] = y[(1, 0)];
        dy[(1, 0)] = (profile.eval(t) + delta) * y[(0, 0)];
        dy
    };
    let h = period / nodes as f64;
    let mut bs = Vec::with_capacity(nodes + 1);
    let mut dbs = Vec::with_capacity(nodes + 1);
    let mut state = DMatrix::from_fn(2, 1, |i, _| v[i]);
    for j in 0..=nodes {
        let t = j as f64 * h;
        if j > 0 {
            state = ode::integrate(rhs, (j - 1) as f64 * h, t, state, tol::scaled(tol::ODE), None)?;
        }
        let (x, dx) = (state[(0, 0)], state[(1, 0)]);
        if x.abs() < 1e-8 * (x.abs() + dx.abs()) {
            return Err(Error::FloquetGap(format!("Floquet eigenfunction vanishes near t = {t}")));
        }
        let b = dx / x;
        bs.push(b);
        dbs.push(profile.eval(t) + delta - b * b);
    }
    // closure check: x(p) = mu x(0)
    if (state[(0, 0)] - mu * v[0]).abs() > 1e-6 * (1.0 + mu.abs()) {
        return Err(Error::FloquetGap(format!(
            "monodromy eigenvector drifted: x(p) = {} vs mu = {mu}",
            state[(0, 0)]
        )));
    }
    Ok((bs, dbs))
}

// ---------------------------------------------------------------------------
// translational pipeline
// ---------------------------------------------------------------------------

/// A built certificate plus the intermediate data its invariants are
/// phrased in (kept out of the serialized certificate itself).
#[derive(Debug, Clone)]
pub struct TranslationalBuild {
    pub cert: QuotientCertificate,
    pub checks: Vec<NamedCheck>,
    pub classification: Classification,
    pub riccati: RiccatiCurve,
    pub deltas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub period: f64,
    /// Per-entry integrals of b_i over one period (should be -log lambda_i).
    pub log_integrals: Vec<f64>,
}

/// Builds a complete translational quotient: a diagonal periodic Riccati
/// curve whose per-entry Hill shifts delta_i are tuned so that the period
/// map on L has the eigenvalues of `theta_matrix`, then f and A as the
/// scalar and traceless parts of B' + B^2.
///
/// The seed only fixes the common potential phi = seed' + seed^2; every
/// diagonal entry (including the first) is recovered as the logarithmic
/// derivative of a Floquet eigenfunction, since the seed itself has
/// multiplier 1 and 1 is excluded from the target spectrum.
pub fn build_translational(
    n: usize,
    theta_matrix: &IntegerThetaMatrix,
    seed: &FourierSeries,
    theta: f64,
) -> Result<TranslationalBuild> {
    if n < 5 {
        return Err(Error::InvalidSpec(format!("n = {n} must be >= 5")));
    }
    let m = n - 2;
    if theta_matrix.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: theta_matrix.dim() });
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidSpec("theta must be positive".into()));
    }
    let period = seed.period;
    let phi_series = seed.derivative().add(&seed.mul(seed));
    let phi = Profile::FourierPeriodic { series: phi_series.clone() };
    {
        // nonconstant trace is decided before any shooting
        let ts: Vec<f64> = (0..64).map(|i| i as f64 * period / 64.0).collect();
        phi.check_nonconstant(&ts).map_err(|_| Error::ConstantTrace)?;
    }

    let lambdas = theta_matrix.eigenvalues.clone();
    let nodes = 128;
    let mut deltas = Vec::with_capacity(m);
    let mut entries: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(m);
    let mut log_integrals = Vec::with_capacity(m);
    for &lam in &lambdas {
        let target = lam + 1.0 / lam;
        let delta = find_delta(&phi, period, target)?;
        let (bs, dbs) = floquet_riccati_samples(&phi, delta, period, 1.0 / lam, nodes)?;
        let h = period / nodes as f64;
        // trapezoid over the period; the samples are smooth and dense
        let integral: f64 =
            h * (0.5 * bs[0] + bs[1..nodes].iter().sum::<f64>() + 0.5 * bs[nodes]);
        log_integrals.push(integral);
        deltas.push(delta);
        entries.push((bs, dbs));
    }

    let mean = deltas.iter().sum::<f64>() / m as f64;
    let a = DMatrix::from_fn(m, m, |i, j| if i == j { deltas[i] - mean } else { 0.0 });
    let spec = PlaneWaveSpec::new(
        n,
        PseudoSpace::euclidean(m),
        a,
        Interval::Real,
        Profile::FourierPeriodic { series: phi_series.shifted(mean) },
    )?;

    // tile one period of samples across enough copies to cover the audit
    // window of the real line
    let copies = ((4.0 + 2.0 * period) / period).ceil() as i64;
    let mut ts = Vec::new();
    let mut mats = Vec::new();
    let mut dmats = Vec::new();
    let diag = |vals: &[f64]| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { vals[i] } else { 0.0 }).collect())
            .collect()
    };
    let h = period / nodes as f64;
    for copy in -copies..copies {
        for node in 0..nodes {
            ts.push(copy as f64 * period + node as f64 * h);
            let bvals: Vec<f64> = entries.iter().map(|(bs, _)| bs[node]).collect();
            let dvals: Vec<f64> = entries.iter().map(|(_, dbs)| dbs[node]).collect();
            mats.push(diag(&bvals));
            dmats.push(diag(&dvals));
        }
    }
    ts.push(copies as f64 * period);
    let bvals: Vec<f64> = entries.iter().map(|(bs, _)| bs[nodes]).collect();
    let dvals: Vec<f64> = entries.iter().map(|(_, dbs)| dbs[nodes]).collect();
    mats.push(diag(&bvals));
    dmats.push(diag(&dvals));
    let riccati = RiccatiCurve::Sampled { ts, mats, dmats };

    let sigma = isometry::validate_sigma(&spec, 1.0, period, DMatrix::identity(m, m))?;
    let l = symplectic::riccati_basis(&spec, &riccati)?;

    // lattice in R x L: (theta, 0) plus the columns of P^{-1}, where P
    // diagonalizes the companion matrix in the order of `lambdas` —
    // conjugating diag(lambda) into an integer matrix
    let tc = DMatrix::from_fn(m, m, |i, j| theta_matrix.matrix[i][j] as f64);
    let mut pmat = DMatrix::zeros(m, m);
    for (idx, &lam) in lambdas.iter().enumerate() {
        let ns = crate::curvature::null_space(&(&tc - lam * DMatrix::identity(m, m)), 1e-8);
        if ns.ncols() != 1 {
            return Err(Error::EigenOrderingAmbiguous);
        }
        pmat.set_column(idx, &ns.column(0));
    }
    let v = pmat
        .clone()
        .try_inverse()
        .ok_or(Error::CyclicVectorFailure)?;
    let mut basis = vec![LatticeVector { r: theta, coords: vec![0.0; m] }];
    for j in 0..m {
        basis.push(LatticeVector { r: 0.0, coords: v.column(j).iter().cloned().collect() });
    }
    let lattice = LatticeData { theta, basis };

    let t_star = sigma.base_point();
    let gamma = Isometry::new(&spec, sigma, 0.0, SolutionVector::zero(m, t_star))?;
    let cert = QuotientCertificate { spec, gamma, l, lattice };

    let checks = quotient::verify_certificate(&cert);
    if let Some(bad) = checks.iter().find(|c| !c.passed) {
        return Err(Error::CertificateFailed(bad.name.clone()));
    }
    let classification = quotient::classify_quotient(&cert)?;
    if classification.kind != SigmaKind::Translational
        || !classification.complete
        || classification.fiber != FiberKind::Torus
    {
        return Err(Error::CertificateFailed("unexpected classification".into()));
    }
    Ok(TranslationalBuild {
        cert,
        checks,
        classification,
        riccati,
        deltas,
        lambdas,
        period,
        log_integrals,
    })
}

// ---------------------------------------------------------------------------
// dilational pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DilationalBuild {
    pub cert: QuotientCertificate,
    pub checks: Vec<NamedCheck>,
    pub classification: Classification,
    pub zsystem: ZSpectralSystem,
    pub q: f64,
    /// Eigenvalues q^{E(i)} in the order of the spectral system.
    pub sigma_spectrum: Vec<f64>,
    /// The conjugation matrix on R x L expressed in the emitted lattice
    /// basis, rounded to integers (companion form of prod (x - q^a), a in Y).
    pub lattice_conjugation: Vec<Vec<i64>>,
}

/// Builds an incomplete dilational quotient on I = (0, oo): anti-diagonal
/// gram, rank-one A, homogeneous profile, sigma = (q, 0, C) with C the
/// diagonal dilation from the spectral system, and a lattice spanned by a
/// cyclic-vector companion basis of the conjugation on R x L.
pub fn build_dilational(n: usize, trace: i64, seed: u64) -> Result<DilationalBuild> {
    if n < 5 || n % 2 == 0 {
        return Err(Error::InvalidSpec(format!("n = {n} must be odd and >= 5")));
    }
    if trace < 3 {
        return Err(Error::InvalidSpec(format!("trace = {trace} must be >= 3")));
    }
    let m = n - 2;
    let tr = trace as f64;
    let q = (tr + (tr * tr - 4.0).sqrt()) / 2.0;

    let zsys = search_zspectral(m, n as i64)?;
    zsys.verify()?;

    // exponents a(i) = E(2i-1) + (1-n)/2; the rank-one A maps e_m to e_1,
    // so C A C^{-1} = q^{a(1)-a(m)} A and the exponent gap must be exactly 2
    let shift = (1 - n as i64) / 2;
    let a_exp: Vec<i64> = (0..m).map(|i| zsys.e[2 * i] + shift).collect();
    assert_eq!(a_exp[0] - a_exp[m - 1], 2, "exponent pattern broke the scaling relation");

    let space = PseudoSpace::anti_diagonal(m, 1.0);
    let mut a = DMatrix::zeros(m, m);
    a[(0, m - 1)] = 1.0;
    let spec = PlaneWaveSpec::new(
        n,
        space,
        a,
        Interval::Positive,
        Profile::homogeneous_dilational(n),
    )?;
    let c = DMatrix::from_fn(m, m, |i, j| if i == j { q.powi(a_exp[i] as i32) } else { 0.0 });
    let sigma = isometry::validate_sigma(&spec, q, 0.0, c)?;
    let t_star = sigma.base_point();

    // eigenbasis of the sigma-matrix on E, ordered to match q^{E(i)}
    let smat = symplectic::sigma_matrix_on_e(&spec, &sigma)?;
    let spectrum: Vec<f64> = zsys.e.iter().map(|&ei| q.powi(ei as i32)).collect();
    let mut basis: Vec<SolutionVector> = Vec::with_capacity(2 * m);
    for &lam in &spectrum {
        let ns = crate::curvature::null_space(
            &(&smat - lam * DMatrix::identity(2 * m, 2 * m)),
            1e-8,
        );
        if ns.ncols() != 1 {
            return Err(Error::EigenOrderingAmbiguous);
        }
        let col: DVector<f64> = ns.column(0).into();
        basis.push(SolutionVector::from_column(t_star, &(col.clone() / col.norm())));
    }

    // symplectic orthogonalisation within pair complements: clean previous
    // pairs out of each new pair, then normalise Omega(u_i, u_{i'}) = 1
    for pair in 0..m {
        let (i, ip) = (pair, 2 * m - 1 - pair);
        for prev in 0..pair {
            let (b, bp) = (prev, 2 * m - 1 - prev);
            for target in [i, ip] {
                let cb = symplectic::omega(&spec, &basis[target], &basis[bp])?;
                let cbp = symplectic::omega(&spec, &basis[target], &basis[b])?;
                basis[target] = basis[target]
                    .add(&basis[b].scale(-cb))
                    .add(&basis[bp].scale(cbp));
            }
        }
        let w = symplectic::omega(&spec, &basis[i], &basis[ip])?;
        if w.abs() < 1e-8 {
            return Err(Error::CertificateFailed(
                "eigenbasis pairing degenerated during orthogonalisation".into(),
            ));
        }
        basis[ip] = basis[ip].scale(1.0 / w);
    }

    let l = Subspace::new(t_star, zsys.s1().iter().map(|&i| basis[i].clone()).collect())?;
    let gamma = Isometry::new(&spec, sigma, 0.0, SolutionVector::zero(m, t_star))?;

    // lattice: powers of the conjugation applied to a cyclic vector give a
    // basis in which the conjugation is an integer companion matrix
    let nmat = quotient::conjugation_matrix_on_rxl(&spec, &gamma, &l)?;
    let dim = 1 + m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cyc = DVector::from_element(dim, 1.0);
    let mut blat = DMatrix::zeros(dim, dim);
    let mut ok = false;
    for attempt in 0..32 {
        if attempt > 0 {
            cyc = DVector::from_fn(dim, |_, _| rng.gen_range(-8i32..=8) as f64 / 4.0);
            if cyc.norm() == 0.0 {
                continue;
            }
        }
        let mut col = cyc.clone();
        for j in 0..dim {
            blat.set_column(j, &col);
            col = &nmat * col;
        }
        let sv = blat.clone().svd(false, false).singular_values;
        if sv.min() > 1e-8 * sv.max() {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::CyclicVectorFailure);
    }
    let basis_vecs = (0..dim)
        .map(|j| LatticeVector {
            r: blat[(0, j)],
            coords: (0..m).map(|i| blat[(1 + i, j)]).collect(),
        })
        .collect();
    let lattice = LatticeData { theta: 0.0, basis: basis_vecs };

    let cert = QuotientCertificate { spec, gamma, l, lattice };
    let checks = quotient::verify_certificate(&cert);
    if let Some(bad) = checks.iter().find(|c| !c.passed) {
        return Err(Error::CertificateFailed(bad.name.clone()));
    }
    let classification = quotient::classify_quotient(&cert)?;
    if classification.kind != SigmaKind::Dilational
        || classification.complete
        || classification.fiber != FiberKind::Torus
    {
        return Err(Error::CertificateFailed("unexpected classification".into()));
    }

    let in_lattice = blat
        .clone()
        .try_inverse()
        .ok_or(Error::CyclicVectorFailure)?
        * &nmat
        * &blat;
    let mut lattice_conjugation = vec![vec![0i64; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            lattice_conjugation[i][j] = in_lattice[(i, j)].round() as i64;
        }
    }

    Ok(DilationalBuild {
        cert,
        checks,
        classification,
        zsystem: zsys,
        q,
        sigma_spectrum: spectrum,
        lattice_conjugation,
    })
}

/// Characteristic polynomial coefficients (constant first, monic last) of
/// an integer matrix, by exact Faddeev-LeVerrier over i128-safe floats.
pub fn charpoly_coeffs(mat: &[Vec<i64>]) -> Vec<i64> {
    let d = mat.len();
    let a = DMatrix::from_fn(d, d, |i, j| mat[i][j] as f64);
    // Faddeev-LeVerrier: M_0 = I, c_d = 1; c_{d-k} = -tr(A M_{k-1}) / k
    let mut coeffs = vec![0i64; d + 1];
    coeffs[d] = 1;
    let mut mk = DMatrix::identity(d, d);
    let mut ck = 1.0f64;
    for k in 1..=d {
        let am = &a * &mk;
        ck = -am.trace() / k as f64;
        coeffs[d - k] = ck.round() as i64;
        mk = am + ck * DMatrix::identity(d, d);
    }
    let _ = ck;
    coeffs
}
