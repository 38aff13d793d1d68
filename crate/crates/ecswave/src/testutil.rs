//! Shared fixtures for unit tests.
#![cfg(test)]

use nalgebra::DMatrix;

use crate::planewave::{Interval, PlaneWaveSpec};
use crate::profile::{FourierSeries, Profile};
use crate::pseudo::PseudoSpace;

/// n = 5 homogeneous half-line wave: anti-diagonal gram, A e_3 = e_1,
/// f(t) = 6 / t^2.
pub fn dilational_spec_n5() -> PlaneWaveSpec {
    let space = PseudoSpace::anti_diagonal(3, 1.0);
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 2)] = 1.0;
    PlaneWaveSpec::new(
        5,
        space,
        a,
        Interval::Positive,
        Profile::homogeneous_dilational(5),
    )
    .unwrap()
}

/// n = 5 wave over the whole line: Euclidean fiber, full-rank A,
/// 1-periodic profile.
pub fn translational_like_spec_n5() -> PlaneWaveSpec {
    let space = PseudoSpace::euclidean(3);
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 1.0, -2.0]));
    let series = FourierSeries { period: 1.0, a0: 1.0, cos: vec![0.8], sin: vec![] };
    PlaneWaveSpec::new(
        5,
        space,
        a,
        Interval::Real,
        Profile::FourierPeriodic { series },
    )
    .unwrap()
}

/// True when the column spaces of `a` and `b` coincide up to `tol`
/// (mutual projection residuals).
pub fn same_span(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    if a.nrows() != b.nrows() {
        return false;
    }
    let proj = |basis: &DMatrix<f64>| -> DMatrix<f64> {
        // orthogonal projector onto col(basis) via QR of the basis
        let qr = basis.clone().qr();
        let q = qr.q();
        let r = qr.r();
        // drop dependent columns (tiny diagonal of R)
        let mut keep = Vec::new();
        for j in 0..r.ncols().min(r.nrows()) {
            if r[(j, j)].abs() > 1e-12 {
                keep.push(j);
            }
        }
        let mut qk = DMatrix::zeros(basis.nrows(), keep.len());
        for (jj, &j) in keep.iter().enumerate() {
            qk.set_column(jj, &q.column(j));
        }
        &qk * qk.transpose()
    };
    let pa = proj(a);
    let pb = proj(b);
    (&pa - &pb).abs().max() < tol
}
