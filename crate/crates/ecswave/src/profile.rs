//! Curvature profiles f: I -> R and finite Fourier series algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite real Fourier series a0 + sum_k a_k cos(2 pi k t / p) + b_k sin(...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSeries {
    pub period: f64,
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn constant(period: f64, a0: f64) -> Self {
        Self { period, a0, cos: vec![], sin: vec![] }
    }

    fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        let w = self.omega();
        let mut v = self.a0;
        for (k, &a) in self.cos.iter().enumerate() {
            v += a * ((k + 1) as f64 * w * t).cos();
        }
        for (k, &b) in self.sin.iter().enumerate() {
            v += b * ((k + 1) as f64 * w * t).sin();
        }
        v
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let w = self.omega();
        let mut v = 0.0;
        for (k, &a) in self.cos.iter().enumerate() {
            let kw = (k + 1) as f64 * w;
            v -= a * kw * (kw * t).sin();
        }
        for (k, &b) in self.sin.iter().enumerate() {
            let kw = (k + 1) as f64 * w;
            v += b * kw * (kw * t).cos();
        }
        v
    }

    /// Termwise derivative as a series.
    pub fn derivative(&self) -> Self {
        let w = self.omega();
        let n = self.cos.len().max(self.sin.len());
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for (k, &a) in self.cos.iter().enumerate() {
            sin[k] -= a * (k + 1) as f64 * w;
        }
        for (k, &b) in self.sin.iter().enumerate() {
            cos[k] += b * (k + 1) as f64 * w;
        }
        Self { period: self.period, a0: 0.0, cos, sin }
    }

    /// Exact product of two series with the same period.
    pub fn mul(&self, other: &Self) -> Self {
        assert!(
            (self.period - other.period).abs() < 1e-12 * self.period.abs(),
            "period mismatch in Fourier product"
        );
        let n1 = self.cos.len().max(self.sin.len());
        let n2 = other.cos.len().max(other.sin.len());
        let n = n1 + n2;
        let mut out = Self {
            period: self.period,
            a0: 0.0,
            cos: vec![0.0; n],
            sin: vec![0.0; n],
        };
        // harmonic coefficient accessors with index 0 = constant
        let coef = |s: &Self, k: usize, is_cos: bool| -> f64 {
            if k == 0 {
                if is_cos { s.a0 } else { 0.0 }
            } else if is_cos {
                s.cos.get(k - 1).copied().unwrap_or(0.0)
            } else {
                s.sin.get(k - 1).copied().unwrap_or(0.0)
            }
        };
        let mut add = |k: i64, is_cos: bool, v: f64| {
            let k = k.unsigned_abs() as usize;
            if v == 0.0 {
                return;
            }
            if k == 0 {
                if is_cos {
                    out.a0 += v;
                }
                // sin(0) contributes nothing
            } else if is_cos {
                out.cos[k - 1] += v;
            } else {
                out.sin[k - 1] += v;
            }
        };
        for k1 in 0..=n1 {
            for k2 in 0..=n2 {
                let (c1, s1) = (coef(self, k1, true), coef(self, k1, false));
                let (c2, s2) = (coef(other, k2, true), coef(other, k2, false));
                let (k1i, k2i) = (k1 as i64, k2 as i64);
                // cos*cos = (cos(k1-k2) + cos(k1+k2))/2
                add(k1i - k2i, true, c1 * c2 / 2.0);
                add(k1i + k2i, true, c1 * c2 / 2.0);
                // sin*sin = (cos(k1-k2) - cos(k1+k2))/2
                add(k1i - k2i, true, s1 * s2 / 2.0);
                add(k1i + k2i, true, -s1 * s2 / 2.0);
                // sin*cos = (sin(k1+k2) + sin(k1-k2))/2, sign of sin flips with k
                let sc = s1 * c2 / 2.0;
                add(k1i + k2i, false, sc);
                add((k1i - k2i).abs(), false, sc * (k1i - k2i).signum() as f64);
                // cos*sin
                let cs = c1 * s2 / 2.0;
                add(k1i + k2i, false, cs);
                add((k1i - k2i).abs(), false, cs * (k2i - k1i).signum() as f64);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.cos.len().max(other.cos.len());
        let ns = self.sin.len().max(other.sin.len());
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; ns];
        for (k, &a) in self.cos.iter().enumerate() {
            cos[k] += a;
        }
        for (k, &a) in other.cos.iter().enumerate() {
            cos[k] += a;
        }
        for (k, &b) in self.sin.iter().enumerate() {
            sin[k] += b;
        }
        for (k, &b) in other.sin.iter().enumerate() {
            sin[k] += b;
        }
        Self { period: self.period, a0: self.a0 + other.a0, cos, sin }
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.a0 += c;
        s
    }

    pub fn mean(&self) -> f64 {
        self.a0
    }
}

/// Curvature profile of a standard plane wave; supplies f(t) and f'(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// f(t) = coeff / (t - pole)^2, defined on either side of the pole.
    InverseSquare { coeff: f64, pole: f64 },
    /// Periodic profile, defined on all of R.
    FourierPeriodic { series: FourierSeries },
    /// f(t) = S(ln t) / t^2 with S periodic of period ln(ratio); defined on
    /// (0, oo) and satisfying f(t) = q^2 f(qt) identically for q = ratio.
    LogPeriodic { ratio: f64, series: FourierSeries },
}

impl Profile {
    /// The locally homogeneous dilational profile (n^2 - 1) / (4 t^2).
    pub fn homogeneous_dilational(n: usize) -> Self {
        let c = ((n * n - 1) as f64) / 4.0;
        Profile::InverseSquare { coeff: c, pole: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::InverseSquare { coeff, pole } => coeff / (t - pole).powi(2),
            Profile::FourierPeriodic { series } => series.eval(t),
            Profile::LogPeriodic { series, .. } => series.eval(t.ln()) / (t * t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            Profile::InverseSquare { coeff, pole } => -2.0 * coeff / (t - pole).powi(3),
            Profile::FourierPeriodic { series } => series.deriv(t),
            Profile::LogPeriodic { series, .. } => {
                (series.deriv(t.ln()) - 2.0 * series.eval(t.ln())) / (t * t * t)
            }
        }
    }

    /// True when the profile is defined at every point of the open interval.
    pub fn defined_on(&self, lo: f64, hi: f64) -> bool {
        match self {
            Profile::InverseSquare { pole, .. } => *pole <= lo || *pole >= hi,
            Profile::FourierPeriodic { .. } => true,
            Profile::LogPeriodic { .. } => lo >= 0.0,
        }
    }

    /// Pole location when there is one (integration must not cross it).
    pub fn pole(&self) -> Option<f64> {
        match self {
            Profile::InverseSquare { pole, .. } => Some(*pole),
            Profile::LogPeriodic { .. } => Some(0.0),
            Profile::FourierPeriodic { .. } => None,
        }
    }

    /// Rejects constant profiles: max - min over the samples must exceed
    /// 1e-8 * (1 + |mean|).
    pub fn check_nonconstant(&self, samples: &[f64]) -> Result<()> {
        let vals: Vec<f64> = samples.iter().map(|&t| self.eval(t)).collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let range = max - min;
        if range <= 1e-8 * (1.0 + mean.abs()) {
            return Err(Error::ConstantProfile(range));
        }
        Ok(())
    }
}
