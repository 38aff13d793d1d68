//! Report documents emitted by the CLI and the certificate pipeline.

use serde::{Deserialize, Serialize};

use crate::planewave::PlaneWaveSpecJson;
use crate::quotient::{CertificateJson, Classification};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl NamedCheck {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), passed: residual < tolerance, residual, tolerance }
    }
}

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub version: String,
    pub spec: PlaneWaveSpecJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    pub checks: Vec<NamedCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

impl ReportDocument {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
