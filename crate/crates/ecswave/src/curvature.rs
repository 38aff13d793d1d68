//! Finite-difference curvature oracle: Christoffel symbols, Riemann, Ricci,
//! scalar, Weyl and its covariant derivative, computed from nothing but a
//! metric-field closure. Used to cross-check every closed-form formula.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense rank-4 tensor with the symmetries of a curvature tensor, stored
/// flat. Layout: T[a][b][c][d] = g(R(e_a, e_b) e_c, e_d).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = v;
    }

    /// Set T_{abcd} together with its three curvature-symmetry images
    /// T_{bacd} = T_{abdc} = -T_{abcd} and T_{cdab} = T_{abcd}.
    pub fn set_with_symmetries(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.set(a, b, c, d, v);
        self.set(b, a, c, d, -v);
        self.set(a, b, d, c, -v);
        self.set(b, a, d, c, v);
        self.set(c, d, a, b, v);
        self.set(d, c, a, b, -v);
        self.set(c, d, b, a, -v);
        self.set(d, c, b, a, v);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn scale(&self, c: f64) -> Tensor4 {
        Tensor4 { n: self.n, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn sub(&self, other: &Tensor4) -> Tensor4 {
        Tensor4 {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect(),
        }
    }
}

/// Dense rank-5 tensor for nabla W, layout D[e][a][b][c][d].
#[derive(Debug, Clone)]
pub struct Tensor5 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor5 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n * n] }
    }

    #[inline]
    pub fn get(&self, e: usize, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[(((e * self.n + a) * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, e: usize, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[(((e * self.n + a) * self.n + b) * self.n + c) * self.n + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub type MetricField<'a> = dyn Fn(&[f64]) -> DMatrix<f64> + 'a;

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

/// First partials of the metric by central differences:
/// out[k] = d g / d x^k at x.
fn metric_partials(g: &MetricField, x: &[f64], h: f64) -> Vec<DMatrix<f64>> {
    (0..x.len())
        .map(|k| {
            let gp = g(&shifted(x, k, h));
            let gm = g(&shifted(x, k, -h));
            (gp - gm) / (2.0 * h)
        })
        .collect()
}

/// Christoffel symbols Gamma^k_{ij} at x (out[k] is the matrix over (i,j)).
pub fn christoffels(g: &MetricField, x: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
    let n = x.len();
    let g0 = g(x);
    let ginv = g0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateGram("metric not invertible at sample point".into()))?;
    let dg = metric_partials(g, x, h);
    let mut out = vec![DMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                out[k][(i, j)] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Lowered Riemann tensor by nested central differences of the Christoffel
/// symbols (outer step h, inner step h for the Christoffels themselves).
pub fn riemann(g: &MetricField, x: &[f64], h: f64) -> Result<Tensor4> {
    let n = x.len();
    let g0 = g(x);
    let gamma = christoffels(g, x, h)?;
    // dGamma[a][k][b][c] = d_a Gamma^k_{bc}
    let mut dgamma = vec![vec![DMatrix::zeros(n, n); n]; n];
    for a in 0..n {
        let gp = christoffels(g, &shifted(x, a, h), h)?;
        let gm = christoffels(g, &shifted(x, a, -h), h)?;
        for k in 0..n {
            dgamma[a][k] = (&gp[k] - &gm[k]) / (2.0 * h);
        }
    }
    // R^k_{abc}: R(e_a, e_b) e_c = R^k_{abc} e_k
    // = d_a Gamma^k_{bc} - d_b Gamma^k_{ac}
    //   + Gamma^k_{am} Gamma^m_{bc} - Gamma^k_{bm} Gamma^m_{ac}
    let mut out = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut rk = vec![0.0; n];
                    for k in 0..n {
                        let mut v = dgamma[a][k][(b, c)] - dgamma[b][k][(a, c)];
                        for m in 0..n {
                            v += gamma[k][(a, m)] * gamma[m][(b, c)]
                                - gamma[k][(b, m)] * gamma[m][(a, c)];
                        }
                        rk[k] = v;
                    }
                    // lower the last slot: T_{abcd} = g_{kd} R^k_{abc}
                    let mut t = 0.0;
                    for k in 0..n {
                        t += g0[(k, d)] * rk[k];
                    }
                    out.set(a, b, c, d, t);
                }
            }
        }
    }
    Ok(out)
}

/// Ricci (Ric_{bc} = g^{ad} T_{abcd}), scalar curvature, and the Weyl part
/// of a lowered curvature tensor.
pub fn weyl_decompose(g: &DMatrix<f64>, riem: &Tensor4) -> (DMatrix<f64>, f64, Tensor4) {
    let n = riem.dim();
    let ginv = g.clone().try_inverse().expect("nondegenerate metric");
    let mut ric = DMatrix::zeros(n, n);
    for b in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += ginv[(a, d)] * riem.get(a, b, c, d);
                }
            }
            ric[(b, c)] = s;
        }
    }
    let mut scal = 0.0;
    for b in 0..n {
        for c in 0..n {
            scal += ginv[(b, c)] * ric[(b, c)];
        }
    }
    let nf = n as f64;
    let mut weyl = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let kulkarni = g[(a, d)] * ric[(b, c)] - g[(b, d)] * ric[(a, c)]
                        + g[(b, c)] * ric[(a, d)]
                        - g[(a, c)] * ric[(b, d)];
                    let pure = g[(a, d)] * g[(b, c)] - g[(a, c)] * g[(b, d)];
                    let w = riem.get(a, b, c, d) - kulkarni / (nf - 2.0)
                        + scal * pure / ((nf - 1.0) * (nf - 2.0));
                    weyl.set(a, b, c, d, w);
                }
            }
        }
    }
    (ric, scal, weyl)
}

/// Maximum absolute trace g^{ad} W_{abcd} over (b, c); zero for a genuine
/// Weyl tensor.
pub fn weyl_trace_residual(g: &DMatrix<f64>, weyl: &Tensor4) -> f64 {
    let n = weyl.dim();
    let ginv = g.clone().try_inverse().expect("nondegenerate metric");
    let mut worst = 0.0_f64;
    for b in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += ginv[(a, d)] * weyl.get(a, b, c, d);
                }
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Covariant derivative of the Weyl tensor by finite differences:
/// (nabla_e W)_{abcd} = d_e W_{abcd} - Gamma^m_{ea} W_{mbcd} - ... (4 terms).
/// The outer step `h_outer` should exceed the inner step used for the
/// Christoffel/Riemann differences to keep roundoff amplification in check.
pub fn weyl_derivative(
    g: &MetricField,
    x: &[f64],
    h_outer: f64,
    h_inner: f64,
) -> Result<Tensor5> {
    let n = x.len();
    let weyl_at = |y: &[f64]| -> Result<Tensor4> {
        let gy = g(y);
        let r = riemann(g, y, h_inner)?;
        Ok(weyl_decompose(&gy, &r).2)
    };
    let w0 = weyl_at(x)?;
    let gamma = christoffels(g, x, h_inner)?;
    let mut out = Tensor5::zeros(n);
    for e in 0..n {
        let wp = weyl_at(&shifted(x, e, h_outer))?;
        let wm = weyl_at(&shifted(x, e, -h_outer))?;
        let dw = wp.sub(&wm).scale(1.0 / (2.0 * h_outer));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = dw.get(a, b, c, d);
                        for m in 0..n {
                            v -= gamma[m][(e, a)] * w0.get(m, b, c, d);
                            v -= gamma[m][(e, b)] * w0.get(a, m, c, d);
                            v -= gamma[m][(e, c)] * w0.get(a, b, m, d);
                            v -= gamma[m][(e, d)] * w0.get(a, b, c, m);
                        }
                        out.set(e, a, b, c, d, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Brute-force Olszak space: all vectors v with
/// g(v, .) ^ W(v', v'', ., .) = 0 for every bivector (v', v'').
/// Returns an orthonormal basis (columns) of the numerical null space.
pub fn olszak_space(g: &DMatrix<f64>, weyl: &Tensor4, rel_tol: f64) -> DMatrix<f64> {
    let n = weyl.dim();
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            for a in 0..n {
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        let mut row = DVector::zeros(n);
                        for e in 0..n {
                            row[e] += g[(a, e)] * weyl.get(p, q, b, c)
                                - g[(b, e)] * weyl.get(p, q, a, c)
                                + g[(c, e)] * weyl.get(p, q, a, b);
                        }
                        if row.amax() > 0.0 {
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return DMatrix::identity(n, n);
    }
    let mut m = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    null_space(&m, rel_tol)
}

/// Numerical null space of a rectangular matrix via SVD (columns).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    // pad with zero rows so the thin SVD carries a full n x n V
    let padded = if m.nrows() < n {
        m.clone().insert_rows(m.nrows(), n - m.nrows(), 0.0)
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * (1.0 + smax);
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= cut).collect();
    let mut basis = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        basis.set_column(j, &vt.row(i).transpose());
    }
    basis
}

/// Everything the oracle measures at one point, packaged as residuals
/// against the closed forms.
#[derive(Debug, Clone)]
pub struct NumericCurvatureReport {
    pub riemann_residual: f64,
    pub ricci_residual: f64,
    pub scalar_residual: f64,
    pub weyl_residual: f64,
    pub weyl_trace_residual: f64,
    pub parallel_s_residual: f64,
    pub nabla_weyl_max: f64,
}

/// Compare numeric curvature of the metric field against supplied closed
/// forms at x, and measure || nabla W || and the parallelism of d_s.
pub fn compare_at(
    g: &MetricField,
    x: &[f64],
    h: f64,
    riem_closed: &Tensor4,
    ric_closed: &DMatrix<f64>,
) -> Result<NumericCurvatureReport> {
    let g0 = g(x);
    let riem_num = riemann(g, x, h)?;
    let (ric_num, scal_num, weyl_num) = weyl_decompose(&g0, &riem_num);
    let (_, _, weyl_closed) = weyl_decompose(&g0, riem_closed);
    let gamma = christoffels(g, x, h)?;
    // nabla d_s = 0 means Gamma^k_{a s} = 0 for all a, k (s is index 1)
    let mut par = 0.0_f64;
    for k in 0..x.len() {
        for a in 0..x.len() {
            par = par.max(gamma[k][(a, 1)].abs());
        }
    }
    let nabla_w = weyl_derivative(g, x, h * 10.0, h)?;
    Ok(NumericCurvatureReport {
        riemann_residual: riem_num.max_abs_diff(riem_closed),
        ricci_residual: (&ric_num - ric_closed).abs().max(),
        scalar_residual: scal_num.abs(),
        weyl_residual: weyl_num.max_abs_diff(&weyl_closed),
        weyl_trace_residual: weyl_trace_residual(&g0, &weyl_num),
        parallel_s_residual: par,
        nabla_weyl_max: nabla_w.max_abs(),
    })
}
