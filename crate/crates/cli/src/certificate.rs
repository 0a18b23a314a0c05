//! Extremality certificates and their independent re-verification.

use std::path::Path;

use exqip::channels::{choi_condition, instrument_extremal};
use exqip::gqi::{is_extremal, is_valid_gqi, perturbation_residuals, ExtremalityCertificate, Perturbation};
use exqip::linalg::Hermitian;
use exqip::testers::{is_extremal_tester, povm_is_extremal};
use exqip::{Gqi, Tolerance};
use serde::{Deserialize, Serialize};

use crate::format::{canonical_json, decode_matrix, encode_matrix, Kind, MatrixRows, Object, OperatorFile};
use crate::{Failure, Result};

/// Kind-specific criterion run alongside the generic rank test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub extremal: bool,
    pub rank: usize,
    pub family_size: usize,
}

pub struct Assessment {
    pub gqi: Gqi,
    pub certificate: ExtremalityCertificate,
    pub criterion: Option<Criterion>,
}

/// Loads, validates and tests an operator file. Invalid objects and
/// disagreeing criteria are mathematical failures.
pub fn assess(file: &OperatorFile, tol: &Tolerance) -> Result<Assessment> {
    let gqi = file.to_gqi(tol)?;
    let check = is_valid_gqi(&gqi, tol)?;
    if !check.accepted {
        return Err(Failure::math(format!(
            "invalid {}: outcome minimal eigenvalues {:?}, normalization residual {:.3e}",
            file.kind,
            check.outcome_min_eigenvalues,
            check.comb.max_residual()
        )));
    }
    let (certificate, criterion) = match Object::new(file.kind, gqi.clone(), tol)? {
        Object::Generic(g) => (is_extremal(&g, tol)?, None),
        Object::Tester(t) => (is_extremal_tester(&t, tol)?, None),
        Object::Povm(p) => (povm_is_extremal(&p, tol)?, None),
        Object::Channel(c) => {
            let v = choi_condition(&c, tol)?;
            let crit = Criterion { name: "kraus-products".into(), extremal: v.extremal, rank: v.rank, family_size: v.family_size };
            (is_extremal(&gqi, tol)?, Some(crit))
        }
        Object::Instrument(ins) => {
            let v = instrument_extremal(&ins, tol)?;
            let crit = Criterion { name: "kraus-products".into(), extremal: v.extremal, rank: v.rank, family_size: v.family_size };
            (is_extremal(&gqi, tol)?, Some(crit))
        }
    };
    if let Some(c) = &criterion {
        if c.extremal != certificate.is_extremal() {
            return Err(Failure::math(format!(
                "criteria disagree: {} says {}, generic rank test says {}",
                c.name,
                if c.extremal { "extremal" } else { "not extremal" },
                certificate.verdict
            )));
        }
    }
    Ok(Assessment { gqi, certificate, criterion })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel: f64,
    pub comb: f64,
}

impl From<&Tolerance> for TolerancePolicy {
    fn from(t: &Tolerance) -> Self {
        TolerancePolicy { rel: t.rel, comb: t.comb }
    }
}

impl TolerancePolicy {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance::with_rel(self.rel).with_comb(self.comb)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranks {
    pub outcome_ranks: Vec<usize>,
    pub support_family_size: usize,
    pub normalization_family_size: usize,
    pub family_size: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub threshold: f64,
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outside_variable_span: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFile {
    pub epsilon_star: f64,
    pub d: Vec<MatrixRows>,
    pub delta: MatrixRows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub version: String,
    pub kind: Kind,
    pub verdict: String,
    pub tolerance: TolerancePolicy,
    pub ranks: Ranks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    pub residuals: Residuals,
    pub perturbation: Option<PerturbationFile>,
}

impl CertificateFile {
    pub fn new(kind: Kind, a: &Assessment, tol: &Tolerance) -> Self {
        let c = &a.certificate;
        let res = c.perturbation.as_ref().map(|p| perturbation_residuals(&a.gqi, p, tol));
        CertificateFile {
            version: env!("CARGO_PKG_VERSION").to_string(),
            kind,
            verdict: c.verdict.to_string(),
            tolerance: tol.into(),
            ranks: Ranks {
                outcome_ranks: c.outcome_ranks.clone(),
                support_family_size: c.support_family_size,
                normalization_family_size: c.normalization_family_size,
                family_size: c.family_size,
                rank: c.rank,
            },
            criterion: a.criterion.clone(),
            residuals: Residuals {
                threshold: c.threshold,
                margin: c.margin,
                sum: res.as_ref().map(|r| r.sum),
                off_support: res.as_ref().map(|r| r.off_support),
                outside_variable_span: res.as_ref().map(|r| r.outside_variable_span),
            },
            perturbation: c.perturbation.as_ref().map(|p| PerturbationFile {
                epsilon_star: p.epsilon_star,
                d: p.d.iter().map(|x| encode_matrix(x.matrix())).collect(),
                delta: encode_matrix(p.delta.matrix()),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Failure::input(format!("malformed certificate: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub struct Verification {
    pub reproduced: bool,
    pub issues: Vec<String>,
}

fn hermitian(rows: &MatrixRows, tol: &Tolerance) -> Result<Hermitian> {
    Ok(Hermitian::with_tolerance(decode_matrix(rows)?, tol)?)
}

/// Re-runs the test under the certificate's tolerance and, for a
/// non-extremal verdict, checks the stored perturbation directly: both
/// `T_i ± (ε*/2) D_i` must be valid and distinct, with the stored
/// residuals reproduced.
pub fn verify_certificate(file: &OperatorFile, cert: &CertificateFile) -> Result<Verification> {
    let tol = cert.tolerance.tolerance();
    let mut issues = Vec::new();
    if file.kind != cert.kind {
        issues.push(format!("certificate is for a {}, input is a {}", cert.kind, file.kind));
    }
    let a = assess(file, &tol)?;
    let fresh = CertificateFile::new(file.kind, &a, &tol);
    if fresh.verdict != cert.verdict {
        issues.push(format!("verdict {} does not reproduce (recomputed {})", cert.verdict, fresh.verdict));
    }
    if fresh.ranks != cert.ranks {
        issues.push("rank data does not reproduce".into());
    }
    match (&cert.perturbation, a.certificate.is_extremal()) {
        (Some(_), true) => issues.push("perturbation attached to an extremal object".into()),
        (None, false) => issues.push("non-extremal verdict without a perturbation".into()),
        (Some(pf), false) => {
            let p = Perturbation {
                d: pf.d.iter().map(|m| hermitian(m, &tol)).collect::<Result<_>>()?,
                delta: hermitian(&pf.delta, &tol)?,
                epsilon_star: pf.epsilon_star,
            };
            if p.d.len() != a.gqi.len() || p.d.iter().any(|d| d.dim() != a.gqi.dim()) {
                return Err(Failure::input("perturbation shape does not match the input"));
            }
            let r = perturbation_residuals(&a.gqi, &p, &tol);
            let threshold = cert.residuals.threshold;
            for (name, v) in [("sum", r.sum), ("off-support", r.off_support), ("variable-span", r.outside_variable_span)] {
                if v > threshold {
                    issues.push(format!("{name} residual {v:.3e} exceeds {threshold:.3e}"));
                }
            }
            let eps = 0.5 * p.epsilon_star;
            if !eps.is_finite() || eps <= 0.0 {
                issues.push("perturbation step is not positive".into());
            } else {
                let shift = |s: f64| {
                    let outcomes = a.gqi.outcomes().iter().zip(&p.d).map(|(t, d)| t.add_scaled(s * eps, d)).collect();
                    Gqi::new(a.gqi.signature().clone(), outcomes)
                };
                let (plus, minus) = (shift(1.0)?, shift(-1.0)?);
                for (name, g) in [("plus", &plus), ("minus", &minus)] {
                    if !is_valid_gqi(g, &tol)?.accepted {
                        issues.push(format!("{name} branch is not a valid GQI"));
                    }
                }
                if plus.hs_distance(&minus) <= 1e-6 {
                    issues.push("branches coincide".into());
                }
            }
        }
        (None, true) => {}
    }
    Ok(Verification { reproduced: issues.is_empty(), issues })
}
