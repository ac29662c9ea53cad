//! Cubic surfaces over `F_q(u)`: specialization at finite places, per-place Frobenius evidence,
//! and the seeded density experiment.
//!
//! # Random stream
//!
//! Sample `i` of degree bound `D` uses `ChaCha8Rng::seed_from_u64(seed)` with stream
//! `(D << 32) | i`. Field elements of `F_q` are drawn from successive `next_u32` outputs `x`,
//! rejecting `x >= floor(2^32 / q) * q` and returning `x mod q`. The 20 coefficients are drawn
//! in monomial order, each as `D + 1` elements from the constant term up. An all-zero form is
//! discarded and the next `20 (D + 1)` draws are used.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{
    h1_certificate, subgroup_exclusion_certificate, Certificate, CertificateKind, ClassId, CycleTypeObservation,
    Tables,
};
use crate::gf::{embed, field, is_prime, monic_irreducibles, Elem, Field, UniPoly};
use crate::surface::{examine_geometry, gather_evidence, Budget, CubicForm, Resolution, SmoothnessCertificate};
use crate::{Error, Result};

/// Report format version.
pub const SCHEMA_VERSION: u32 = 1;

/// A cubic form with coefficients in `F_q[u]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyForm {
    field: Arc<Field>,
    coeffs: Vec<UniPoly>,
}

impl FamilyForm {
    pub fn new(field: Arc<Field>, coeffs: Vec<UniPoly>) -> Result<Self> {
        if coeffs.len() != 20 {
            return Err(Error::Dimension { expected: 20, found: coeffs.len() });
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::Precondition("the zero form does not define a surface".into()));
        }
        if coeffs.iter().flat_map(|c| c.coeffs()).any(|&c| c >= field.size()) {
            return Err(Error::Precondition("coefficient outside the field".into()));
        }
        Ok(FamilyForm { field, coeffs })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coeffs(&self) -> &[UniPoly] {
        &self.coeffs
    }

    /// Largest coefficient degree in `u`.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }
}

/// A finite place of `F_q(u)`: a monic irreducible polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub poly: UniPoly,
    pub name: String,
}

impl Place {
    pub fn new(poly: UniPoly) -> Self {
        let name = poly_name(&poly, "u");
        Place { poly, name }
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree().unwrap_or(0) as u32
    }
}

/// `u^2+u+1` style text; coefficients are integer encodings.
pub fn poly_name(p: &UniPoly, var: &str) -> String {
    let mut terms = Vec::new();
    for (i, &c) in p.coeffs().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        terms.push(match i {
            0 => coeff,
            1 => format!("{coeff}{var}"),
            _ => format!("{coeff}{var}^{i}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// Places of degree `1..=max_degree`, by degree and then integer encoding.
pub fn places(f: &Field, max_degree: u32, max_places: usize) -> Result<Vec<Place>> {
    let mut out = Vec::new();
    for s in 1..=max_degree {
        out.extend(monic_irreducibles(f, s as usize)?.into_iter().map(Place::new));
    }
    out.truncate(max_places);
    Ok(out)
}

/// Reduce at a place: evaluate every coefficient at the least root of the place polynomial in
/// `F_{q^s}`.
pub fn specialize(form: &FamilyForm, place: &UniPoly) -> Result<CubicForm> {
    let f = &form.field;
    let s = place.degree().filter(|&s| s > 0).ok_or_else(|| Error::BadPlace("constant place".into()))?;
    if place.lead() != 1 || !place.is_irreducible(f) {
        return Err(Error::BadPlace(format!("{} is not monic irreducible", poly_name(place, "u"))));
    }
    let big = field(f.p() as u64, f.k() * s as u32)?;
    let e = embed(f, &big)?;
    let lifted = place.map(|c| e.apply(c));
    let root = big
        .elements()
        .find(|&r| lifted.eval(r, &big) == 0)
        .ok_or_else(|| Error::BadPlace("place has no root in its residue field".into()))?;
    let coeffs: Vec<Elem> = form.coeffs.iter().map(|c| c.map(|a| e.apply(a)).eval(root, &big)).collect();
    if coeffs.iter().all(|&c| c == 0) {
        return Err(Error::BadPlace(format!("form vanishes at {}", poly_name(place, "u"))));
    }
    CubicForm::new(big, &coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceStatus {
    /// The reduction is the zero form.
    Bad,
    NotSmooth,
    /// Traces and line counts match no class.
    Inconsistent,
    SmoothCertified,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceSummary {
    pub place: String,
    pub degree: u32,
    pub status: PlaceStatus,
    pub classes: Vec<ClassId>,
}

/// Budgets for one family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceBudget {
    pub max_place_degree: u32,
    pub max_places: usize,
    pub surface: Budget,
}

impl Default for PlaceBudget {
    fn default() -> Self {
        PlaceBudget { max_place_degree: 3, max_places: 64, surface: Budget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyAnalysis {
    pub places: Vec<PlaceSummary>,
    pub observation: CycleTypeObservation,
    pub any_certified: bool,
    pub h1: Certificate,
    pub exclusion: Certificate,
}

impl FamilyAnalysis {
    pub fn has_evidence(&self) -> bool {
        !self.observation.is_empty()
    }
}

/// Walk the places in order, collecting Frobenius evidence until both certificates fire.
pub fn analyze_family(form: &FamilyForm, budget: &PlaceBudget, tables: &Tables) -> Result<FamilyAnalysis> {
    let mut obs = CycleTypeObservation::new();
    let mut summaries = Vec::new();
    let mut any_certified = false;
    let mut h1 = h1_certificate(&obs, tables);
    let mut exclusion = subgroup_exclusion_certificate(&obs, &tables.subgroups, tables);
    for place in places(form.field(), budget.max_place_degree, budget.max_places)? {
        let summary = |status, classes| PlaceSummary { place: place.name.clone(), degree: place.degree(), status, classes };
        let reduced = match specialize(form, &place.poly) {
            Ok(r) => r,
            Err(Error::BadPlace(_)) => {
                summaries.push(summary(PlaceStatus::Bad, Vec::new()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut data = examine_geometry(&reduced, &budget.surface)?;
        let status = match data.certificate {
            SmoothnessCertificate::NotSmooth { .. } => {
                summaries.push(summary(PlaceStatus::NotSmooth, Vec::new()));
                continue;
            }
            SmoothnessCertificate::SmoothCertified { .. } => PlaceStatus::SmoothCertified,
            SmoothnessCertificate::Undetermined => PlaceStatus::Undetermined,
        };
        match gather_evidence(&reduced, &mut data, &budget.surface, &tables.classes, Resolution::CycleType) {
            Ok(classes) => {
                any_certified |= status == PlaceStatus::SmoothCertified;
                obs.push(place.name.clone(), classes.clone())?;
                summaries.push(summary(status, classes));
            }
            Err(Error::NotSmoothOrBadReduction(_)) => {
                summaries.push(summary(PlaceStatus::Inconsistent, Vec::new()));
                continue;
            }
            Err(e) => return Err(e),
        }
        h1 = h1_certificate(&obs, tables);
        exclusion = subgroup_exclusion_certificate(&obs, &tables.subgroups, tables);
        if h1.kind == CertificateKind::H1Trivial && exclusion.kind == CertificateKind::NotInListedSubgroups {
            break;
        }
    }
    Ok(FamilyAnalysis { places: summaries, observation: obs, any_certified, h1, exclusion })
}

/// Settings of the density experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub q: u64,
    pub degrees: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub places: PlaceBudget,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { q: 2, degrees: vec![1, 2, 3], samples: 200, seed: 0, places: PlaceBudget::default() }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !is_prime(self.q) {
            return bad(format!("q = {} is not prime", self.q));
        }
        if self.degrees.is_empty() {
            return bad("no coefficient degree bounds given".into());
        }
        let b = &self.places;
        if b.max_place_degree == 0 || b.max_places == 0 {
            return bad("place budget must be positive".into());
        }
        if !b.surface.allows_points(self.q, 1) {
            return bad(format!("point budget {} is below q^3", b.surface.points));
        }
        if !b.surface.allows_lines(self.q, 1) {
            return bad(format!("line budget {} is below q^4", b.surface.lines));
        }
        if (self.q as u128).pow(b.max_place_degree) > crate::gf::DEFAULT_IRREDUCIBLE_CAP as u128 {
            return bad(format!("q^{} places exceed the enumeration cap", b.max_place_degree));
        }
        if b.surface.singular_max_degree == 0 {
            return bad("singular-point search degree must be positive".into());
        }
        Ok(())
    }
}

fn draw_element(rng: &mut ChaCha8Rng, q: u32) -> Elem {
    let zone = (u32::MAX as u64 + 1) / q as u64 * q as u64;
    loop {
        let x = rng.next_u32();
        if (x as u64) < zone {
            return x % q;
        }
    }
}

/// The `index`-th random form with coefficients of degree at most `d`.
pub fn sample_form(f: &Arc<Field>, d: u32, seed: u64, index: u64) -> FamilyForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((d as u64) << 32) | index);
    loop {
        let coeffs: Vec<UniPoly> = (0..20)
            .map(|_| UniPoly::new((0..=d).map(|_| draw_element(&mut rng, f.size())).collect()))
            .collect();
        if let Ok(form) = FamilyForm::new(f.clone(), coeffs) {
            return form;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleVerdict {
    /// A place was certified smooth; counted in the densities.
    Included,
    /// Evidence exists but no place carried a 27-line certificate.
    Undetermined,
    /// No place produced evidence.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub d: u32,
    pub index: u64,
    pub verdict: SampleVerdict,
    pub h1: CertificateKind,
    pub exclusion: CertificateKind,
    pub places: Vec<PlaceSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub d: u32,
    pub samples: usize,
    pub skipped: usize,
    pub undetermined: usize,
    pub included: usize,
    pub h1_trivial: usize,
    pub no_stable_double_six: usize,
    pub no_stable_triple_nine: usize,
    pub not_in_listed_subgroups: usize,
    /// `h1_trivial / included`, 0 when nothing is included.
    pub h1_trivial_density: f64,
    pub not_in_listed_density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub hashes: BTreeMap<String, String>,
    pub rows: Vec<DensityRow>,
    pub samples: Vec<SampleRecord>,
}

impl DensityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "d,samples,skipped,undetermined,included,h1_trivial,no_stable_double_six,no_stable_triple_nine,\
             not_in_listed_subgroups,h1_trivial_density,not_in_listed_density\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.6},{:.6}\n",
                r.d,
                r.samples,
                r.skipped,
                r.undetermined,
                r.included,
                r.h1_trivial,
                r.no_stable_double_six,
                r.no_stable_triple_nine,
                r.not_in_listed_subgroups,
                r.h1_trivial_density,
                r.not_in_listed_density
            ));
        }
        out
    }
}

fn analyze_sample(f: &Arc<Field>, d: u32, index: u64, cfg: &ExperimentConfig, tables: &Tables) -> Result<SampleRecord> {
    let form = sample_form(f, d, cfg.seed, index);
    let a = analyze_family(&form, &cfg.places, tables)?;
    let verdict = if !a.has_evidence() {
        SampleVerdict::Skipped
    } else if !a.any_certified {
        SampleVerdict::Undetermined
    } else {
        SampleVerdict::Included
    };
    Ok(SampleRecord { d, index, verdict, h1: a.h1.kind, exclusion: a.exclusion.kind, places: a.places })
}

#[cfg(feature = "parallel")]
fn map_samples(n: usize, job: impl Fn(u64) -> Result<SampleRecord> + Sync + Send) -> Result<Vec<SampleRecord>> {
    use rayon::prelude::*;
    (0..n as u64).into_par_iter().map(job).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_samples(n: usize, job: impl Fn(u64) -> Result<SampleRecord>) -> Result<Vec<SampleRecord>> {
    (0..n as u64).map(job).collect()
}

/// Run the experiment; the report depends only on the configuration.
pub fn run_density(cfg: &ExperimentConfig) -> Result<DensityReport> {
    cfg.validate()?;
    let tables = Tables::get();
    let f = field(cfg.q, 1)?;
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &d in &cfg.degrees {
        let recs = map_samples(cfg.samples, |i| analyze_sample(&f, d, i, cfg, tables))?;
        let count = |v: SampleVerdict| recs.iter().filter(|r| r.verdict == v).count();
        let included: Vec<&SampleRecord> = recs.iter().filter(|r| r.verdict == SampleVerdict::Included).collect();
        let kind = |k: CertificateKind| included.iter().filter(|r| r.h1 == k).count();
        let h1_trivial = kind(CertificateKind::H1Trivial);
        let not_in_listed =
            included.iter().filter(|r| r.exclusion == CertificateKind::NotInListedSubgroups).count();
        let density = |n: usize| if included.is_empty() { 0.0 } else { n as f64 / included.len() as f64 };
        rows.push(DensityRow {
            d,
            samples: recs.len(),
            skipped: count(SampleVerdict::Skipped),
            undetermined: count(SampleVerdict::Undetermined),
            included: included.len(),
            h1_trivial,
            no_stable_double_six: kind(CertificateKind::NoStableDoubleSix),
            no_stable_triple_nine: kind(CertificateKind::NoStableTripleNine),
            not_in_listed_subgroups: not_in_listed,
            h1_trivial_density: density(h1_trivial),
            not_in_listed_density: density(not_in_listed),
        });
        samples.extend(recs);
    }
    Ok(DensityReport { schema_version: SCHEMA_VERSION, config: cfg.clone(), hashes: tables.hashes.clone(), rows, samples })
}
