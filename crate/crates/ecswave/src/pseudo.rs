//! Pseudo-Euclidean linear algebra: inner products of arbitrary signature,
//! self-adjoint operators, and the genericity predicate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol;

/// A pseudo-Euclidean vector space, stored as an explicit symmetric
/// nondegenerate gram matrix in the caller's working basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpace {
    dim: usize,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

/// Signature of a gram matrix: counts of positive and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub p_plus: usize,
    pub p_minus: usize,
}

impl Signature {
    pub fn semi_neutral(&self) -> bool {
        self.p_plus.abs_diff(self.p_minus) <= 1
    }

    pub fn euclidean(&self) -> bool {
        self.p_plus == 0 || self.p_minus == 0
    }
}

impl PseudoSpace {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let m = gram.nrows();
        if m == 0 || gram.ncols() != m {
            return Err(Error::DegenerateGram("gram must be square".into()));
        }
        let asym = (&gram - gram.transpose()).abs().max();
        let norm = gram.abs().max();
        if asym > tol::scaled(tol::ALGEBRAIC) * norm.max(1.0) {
            return Err(Error::AsymmetricGram(asym));
        }
        let det = gram.determinant();
        if det.abs() <= tol::scaled(tol::ALGEBRAIC) * norm.powi(m as i32) {
            return Err(Error::DegenerateGram(format!("|det| = {:.3e}", det.abs())));
        }
        let gram_inv = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateGram("not invertible".into()))?;
        Ok(Self { dim: m, gram, gram_inv })
    }

    /// Identity gram of dimension `m`.
    pub fn euclidean(m: usize) -> Self {
        Self::new(DMatrix::identity(m, m)).expect("identity gram")
    }

    /// Anti-diagonal gram with entries `eps`, i.e. <e_i, e_{m+1-j}> = eps δ_ij.
    pub fn anti_diagonal(m: usize, eps: f64) -> Self {
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            g[(i, m - 1 - i)] = eps;
        }
        Self::new(g).expect("anti-diagonal gram")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// <u, w> in the working basis.
    pub fn inner(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (u.transpose() * &self.gram * w)[(0, 0)]
    }

    /// Eigenvalue signature of the gram matrix.
    pub fn signature(&self) -> Result<Signature> {
        let eig = self.gram.clone().symmetric_eigenvalues();
        let norm = eig.amax();
        let cutoff = tol::scaled(tol::ALGEBRAIC) * norm.max(1.0);
        let mut sig = Signature { p_plus: 0, p_minus: 0 };
        for &lambda in eig.iter() {
            if lambda.abs() <= cutoff {
                return Err(Error::DegenerateGram(format!(
                    "eigenvalue {lambda:.3e} below tolerance"
                )));
            }
            if lambda > 0.0 {
                sig.p_plus += 1;
            } else {
                sig.p_minus += 1;
            }
        }
        Ok(sig)
    }
}

/// A validated nonzero traceless operator, self-adjoint w.r.t. the gram.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOperator {
    matrix: DMatrix<f64>,
    rank: usize,
}

impl SymOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Validates the defining invariants of the operator `A` and reports its rank.
pub fn check_operator(space: &PseudoSpace, a: &DMatrix<f64>) -> Result<SymOperator> {
    let m = space.dim();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: a.nrows() });
    }
    let norm = a.abs().max();
    if norm == 0.0 {
        return Err(Error::ZeroOperator);
    }
    // self-adjoint w.r.t. gram  <=>  gram * A symmetric
    let ga = space.gram() * a;
    let asym = (&ga - ga.transpose()).abs().max();
    if asym > tol::scaled(tol::ALGEBRAIC) * (ga.abs().max()).max(1.0) {
        return Err(Error::NotSelfAdjoint(asym));
    }
    let tr = a.trace();
    if tr.abs() > tol::scaled(tol::ALGEBRAIC) * norm {
        return Err(Error::NotTraceless(tr.abs()));
    }
    let rank = svd_rank(a, tol::scaled(tol::RANK));
    Ok(SymOperator { matrix: a.clone(), rank })
}

/// Number of singular values above `rel_tol` times the largest.
pub fn svd_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal-ish basis of the (right) null space of `a`, columns of the
/// returned matrix; singular directions below `rel_tol * s_max`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("svd v_t");
    let sv = &svd.singular_values;
    let max = sv.max().max(f64::MIN_POSITIVE);
    let n = a.ncols();
    let mut cols = Vec::new();
    for j in 0..n {
        let s = if j < sv.len() { sv[j] } else { 0.0 };
        if s <= rel_tol * max {
            cols.push(vt.row(j).transpose());
        }
    }
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Dimension of the Lie algebra of the centralizer of `A` inside the isometry
/// group of the gram: solutions P with gram*P antisymmetric and [P, A] = 0.
pub fn centralizer_algebra_dim(space: &PseudoSpace, a: &SymOperator) -> usize {
    let m = space.dim();
    let g = space.gram();
    let am = a.matrix();
    // unknowns: P column-major, x[j*m + i] = P_{ij}
    let n_unknowns = m * m;
    let n_rows = m * m + m * m;
    let mut sys = DMatrix::zeros(n_rows, n_unknowns);
    // rows 0..m^2: (gram P + (gram P)^T)_{ab} = 0
    for a_i in 0..m {
        for b_i in 0..m {
            let row = a_i * m + b_i;
            for k in 0..m {
                sys[(row, b_i * m + k)] += g[(a_i, k)];
                sys[(row, a_i * m + k)] += g[(b_i, k)];
            }
        }
    }
    // rows m^2..2m^2: (P A - A P)_{ab} = 0
    for a_i in 0..m {
        for b_i in 0..m {
            let row = m * m + a_i * m + b_i;
            for k in 0..m {
                sys[(row, k * m + a_i)] += am[(k, b_i)];
                sys[(row, b_i * m + k)] -= am[(a_i, k)];
            }
        }
    }
    null_space(&sys, tol::scaled(tol::RANK)).ncols()
}

/// True iff only finitely many isometries of the gram commute with `A`,
/// decided at the Lie-algebra level: the centralizer algebra must vanish.
pub fn is_generic(space: &PseudoSpace, a: &SymOperator) -> (bool, usize) {
    let dim = centralizer_algebra_dim(space, a);
    (dim == 0, dim)
}
