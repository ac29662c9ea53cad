//! Serializable reports for the verification suite and for explicit surfaces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certify::{Certificate, ClassId, Tables};
use crate::config::{stabilizer_chain_check, verify_all_degrees, verify_degree, Schlafli, VerificationReport, VerifyOptions};
use crate::experiment::{analyze_family, PlaceBudget, PlaceSummary, SCHEMA_VERSION};
use crate::input::{SurfaceInput, SurfaceLine};
use crate::surface::{examine_geometry, gather_evidence, Budget, CubicForm, Resolution, SmoothnessCertificate};
use crate::Result;

/// Per-degree counts and orders, stabilizer chains and the 27-line substructures; `degree` restricts to one row.
pub fn verify_suite(degree: Option<u32>, opts: VerifyOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    match degree {
        Some(d) => {
            report.extend(verify_degree(d, opts)?);
            if d <= 6 {
                report.extend(stabilizer_chain_check(d)?);
            }
            if d == 3 {
                report.extend(schlafli_report()?);
            }
        }
        None => {
            report.extend(verify_all_degrees(opts)?);
            for d in 1..=6 {
                report.extend(stabilizer_chain_check(d)?);
            }
            report.extend(schlafli_report()?);
        }
    }
    Ok(report)
}

fn schlafli_report() -> Result<VerificationReport> {
    let s = Schlafli::build();
    let aut = s.graph.automorphism_group()?;
    Ok(s.report(&aut))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub schema_version: u32,
    pub hashes: BTreeMap<String, String>,
    pub all_pass: bool,
    #[serde(flatten)]
    pub report: VerificationReport,
}

impl VerifyDocument {
    pub fn new(report: VerificationReport, tables: &Tables) -> Self {
        VerifyDocument { schema_version: SCHEMA_VERSION, hashes: tables.hashes.clone(), all_pass: report.all_pass(), report }
    }
}

/// What was learned about a surface over a finite field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSurfaceReport {
    pub q: u64,
    pub smoothness: SmoothnessCertificate,
    pub rational_lines: Option<usize>,
    /// Lines over `F_{Q^m}` for `m = 1, 2, ...`.
    pub line_counts: Vec<usize>,
    /// `t_m` for `m = 1, 2, ...`.
    pub traces: Vec<i64>,
    /// Classes consistent with the evidence; empty when none could be determined.
    pub classes: Vec<ClassId>,
    pub cycle_types: Vec<String>,
    /// Possible splitting degrees (one value when the class is pinned).
    pub splitting_degree: Vec<u64>,
    pub error: Option<String>,
}

pub fn analyze_finite(form: &CubicForm, budget: &Budget, tables: &Tables) -> Result<FiniteSurfaceReport> {
    let mut data = examine_geometry(form, budget)?;
    let mut report = FiniteSurfaceReport {
        q: form.q(),
        smoothness: data.certificate.clone(),
        rational_lines: data.rational_lines.as_ref().map(|l| l.len()),
        line_counts: data.line_counts.clone(),
        traces: Vec::new(),
        classes: Vec::new(),
        cycle_types: Vec::new(),
        splitting_degree: Vec::new(),
        error: None,
    };
    if report.smoothness.is_not_smooth() {
        return Ok(report);
    }
    match gather_evidence(form, &mut data, budget, &tables.classes, Resolution::Class) {
        Ok(classes) => {
            let mut cts: Vec<String> = classes.iter().map(|&c| tables.classes.class(c).cycle_type.to_string()).collect();
            cts.dedup();
            let mut orders: Vec<u64> = classes.iter().map(|&c| tables.classes.class(c).order).collect();
            orders.sort_unstable();
            orders.dedup();
            report.classes = classes;
            report.cycle_types = cts;
            report.splitting_degree = orders;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report.traces = data.traces;
    Ok(report)
}

/// Certificates for a surface over `F_q(u)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySurfaceReport {
    pub places: Vec<PlaceSummary>,
    pub h1: Certificate,
    pub exclusion: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceAnalysis {
    Finite(FiniteSurfaceReport),
    Family(FamilySurfaceReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceEntry {
    pub line: usize,
    pub input: String,
    pub analysis: SurfaceAnalysis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub schema_version: u32,
    pub hashes: BTreeMap<String, String>,
    pub budget: PlaceBudget,
    pub surfaces: Vec<SurfaceEntry>,
}

pub fn analyze_input(input: &SurfaceInput, budget: &PlaceBudget, tables: &Tables) -> Result<SurfaceAnalysis> {
    Ok(match input {
        SurfaceInput::Finite(f) => SurfaceAnalysis::Finite(analyze_finite(f, &budget.surface, tables)?),
        SurfaceInput::Family(f) => {
            let a = analyze_family(f, budget, tables)?;
            SurfaceAnalysis::Family(FamilySurfaceReport { places: a.places, h1: a.h1, exclusion: a.exclusion })
        }
    })
}

pub fn analyze_lines(lines: &[SurfaceLine], budget: &PlaceBudget, tables: &Tables) -> Result<SurfaceDocument> {
    let surfaces = lines
        .iter()
        .map(|l| {
            Ok(SurfaceEntry { line: l.line, input: l.text.clone(), analysis: analyze_input(&l.surface, budget, tables)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceDocument { schema_version: SCHEMA_VERSION, hashes: tables.hashes.clone(), budget: *budget, surfaces })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermat_reports() {
        let t = Tables::get();
        let b = Budget::default();
        let r7 = analyze_finite(&CubicForm::fermat(7, 1).unwrap(), &b, t).unwrap();
        assert_eq!(r7.rational_lines, Some(27));
        assert_eq!(r7.splitting_degree, vec![1]);
        assert_eq!(r7.classes, vec![0]);
        let r2 = analyze_finite(&CubicForm::fermat(2, 1).unwrap(), &b, t).unwrap();
        assert_eq!(r2.rational_lines, Some(3));
        assert_eq!(r2.splitting_degree, vec![2]);
        assert_eq!(r2.cycle_types, vec!["1^3 2^12".to_string()]);
        assert!(r2.smoothness.is_certified());
    }

    #[test]
    fn singular_report_has_witness() {
        let r = analyze_finite(&CubicForm::fermat(3, 1).unwrap(), &Budget::default(), Tables::get()).unwrap();
        match r.smoothness {
            SmoothnessCertificate::NotSmooth { witness, .. } => assert!(witness.is_some()),
            other => panic!("{other:?}"),
        }
        assert!(r.classes.is_empty());
    }

    #[test]
    fn single_degree_verification() {
        let r = verify_suite(Some(7), VerifyOptions::default()).unwrap();
        assert!(r.all_pass());
        assert!(r.records.iter().any(|c| c.claim == "d=7: n_d" && c.computed == serde_json::json!(3)));
    }
}
