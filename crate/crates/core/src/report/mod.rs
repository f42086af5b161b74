//! The classification pipeline and its machine-readable reports.

mod census;
mod sweep;
mod table;

pub use census::{census, census_rows, expected_idempotents, CensusRow, CENSUS_PARAMS};
pub use sweep::{seed_from_env, sweep, write_sweep_csv, SweepOptions, SweepRecord, SEED_ENV};
pub use table::{parse_rational, table1, table1_with, table_has_idempotents, table_planes, Table1Row};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{FamilyId, LieAlgebra3};
use crate::dynamics::{
    closed_form_error, find_idempotents_with_seeds, find_invariant_planes, null_cone_domination, null_vector_with,
    positive_definite_integral, q5_invariant, q8_invariant, seed_grid, Certificate, ClosedForm, Idempotent,
};
use crate::error::{Error, Result};
use crate::integrator::{evidence_of, integrate, invariant_drift, Evidence, IntegrateOptions, Invariant, Outcome, Trajectory};
use crate::linalg::{congruence, dot, inverse, mat_vec, max_abs, norm, scale, sub, sym_eigen, Mat3, Tensor3, Vec3};
use crate::metric::{euler_arnold_field, quadratic_derivative_coefficients, BilinearForm, QuadraticField};
use crate::normal_form::{canonicalize, normal_form_form, verdict_from_table, Boundedness, Mechanism, NormalFormId, NormalFormTag, Status, Verdict};
use crate::problem::{AlgebraSpec, MetricSpec, Problem};

pub const SCHEMA_VERSION: &str = "ea-lab-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Fewest corroborating integrations a report may carry.
pub const MIN_INITIAL_CONDITIONS: usize = 8;
pub const DEFAULT_SEED: u64 = 20_240_601;

const FLOW_HORIZON: f64 = 5.0;
const FLOW_TOL: f64 = 1e-7;
const FLOW_ICS: [Vec3; 3] = [[0.3, 0.5, -0.2], [-0.4, 0.7, 0.6], [0.5, -0.3, 0.8]];
const EQUIVARIANCE_TOL: f64 = 1e-8;
const PD_RESIDUAL_TOL: f64 = 1e-9;
// Far seeds reach idempotents such as (1/λ, 0, 0) for small λ.
const FAR_SEED_SCALE: f64 = 6.0;
const PLANE_SAMPLES: usize = 2;
const MAX_PLANES: usize = 3;
/// Attempted-step budget of one corroborating integration.
const STEP_BUDGET: usize = 50_000;
const MAX_IDEMPOTENT_ICS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraEcho {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub structure_constants: Tensor3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEcho {
    pub matrix: Mat3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    pub signature: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalEcho {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    pub scale: f64,
    pub phi: Mat3,
    pub residual: f64,
}

impl From<&NormalFormId> for CanonicalEcho {
    fn from(nf: &NormalFormId) -> Self {
        CanonicalEcho {
            tag: nf.tag.name().into(),
            param: nf.param,
            scale: nf.scale,
            phi: nf.phi.matrix,
            residual: nf.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundedness: Option<Boundedness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<Mechanism>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    /// `table`, `certificate` or `none`.
    pub decided_by: String,
}

impl VerdictRecord {
    fn from_table(v: &Verdict) -> Self {
        VerdictRecord {
            status: v.status,
            boundedness: Some(v.boundedness),
            mechanism: Some(v.mechanism),
            citation: Some(v.citation.clone()),
            decided_by: "table".into(),
        }
    }

    fn undecided() -> Self {
        VerdictRecord {
            status: Status::Undecided,
            boundedness: None,
            mechanism: None,
            citation: None,
            decided_by: "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub kind: String,
    /// `input` for the problem's own basis, `normal_form` for the canonical frame.
    pub frame: String,
    pub verified: bool,
    pub residual: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    /// `idempotent`, `null_cone`, `invariant_plane` or `random`.
    pub source: String,
    pub initial: Vec3,
    /// `ReachedHorizon`, `BlowUp`, `StepUnderflow`, or `StepBudget` when the run was
    /// cut short by the step budget.
    pub outcome: String,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_uncertainty: Option<f64>,
    pub evidence: Evidence,
    pub sup_norm: f64,
    pub log_norm_slope: f64,
    pub accepted_steps: usize,
    pub energy_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivariance: Option<f64>,
    pub max_certificate: f64,
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub algebra: AlgebraEcho,
    pub metric: MetricEcho,
    pub field: [String; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalEcho>,
    pub verdict: VerdictRecord,
    pub certificates: Vec<CertificateEntry>,
    pub evidence: Vec<TrajectorySummary>,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub horizon: f64,
    pub seed: u64,
    /// Random initial conditions on top of the structured ones.
    pub random_points: usize,
    pub integrate: IntegrateOptions,
    /// Keep full trajectories for sidecar CSV output.
    pub keep_trajectories: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            horizon: crate::integrator::DEFAULT_HORIZON,
            seed: DEFAULT_SEED,
            random_points: 4,
            integrate: IntegrateOptions::default(),
            keep_trajectories: false,
        }
    }
}

impl ClassifyOptions {
    /// These options overridden by a problem file's `[options]` section.
    pub fn with_problem(&self, p: &Problem) -> Self {
        let mut o = self.clone();
        if let Some(h) = p.options.horizon {
            o.horizon = h;
        }
        if let Some(s) = p.options.seed {
            o.seed = s;
        }
        if let Some(n) = p.options.samples {
            o.random_points = n;
        }
        o
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub report: Report,
    /// Same order as `report.evidence`; empty unless trajectories were kept.
    pub trajectories: Vec<Trajectory>,
}

/// The canonical frame of a metric on `h(λ)`: `w = φ v` carries the flow of `q` to that of `Q`.
struct NormalFrame {
    lambda: f64,
    nf: NormalFormId,
    form: BilinearForm,
    field: QuadraticField,
    phi: Mat3,
    phi_inv: Mat3,
    table: Verdict,
    equivariance: f64,
}

fn normal_frame(g: &LieAlgebra3, lambda: f64, q: &BilinearForm, f: &QuadraticField) -> Result<NormalFrame> {
    let nf = canonicalize(lambda, q)?;
    let form = normal_form_form(nf.tag, nf.param)?;
    let field = euler_arnold_field(g, &form)?;
    let phi = nf.phi.matrix;
    let phi_inv = inverse(&phi).ok_or(Error::SingularMatrix)?;
    let table = verdict_from_table(lambda, &nf)?;
    let probes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.3, -0.7, 0.5], [-0.6, 0.2, 0.9]];
    let scale_f = f.max_coefficient().max(1.0);
    let equivariance = probes
        .iter()
        .map(|v| {
            let pulled = mat_vec(&phi_inv, &field.eval(&mat_vec(&phi, v)));
            norm(&sub(&f.eval(v), &pulled)) / (scale_f * (1.0 + norm(v).powi(2)))
        })
        .fold(0.0, f64::max);
    if !(equivariance <= EQUIVARIANCE_TOL) {
        return Err(Error::Internal(format!(
            "field of the canonical form does not match the input field (residual {equivariance:e})"
        )));
    }
    Ok(NormalFrame {
        lambda,
        nf,
        form,
        field,
        phi,
        phi_inv,
        table,
        equivariance,
    })
}

fn algebra_echo(spec: &AlgebraSpec, g: &LieAlgebra3) -> AlgebraEcho {
    let (family, lambda, mu) = match spec {
        AlgebraSpec::H { lambda } => ("h", Some(*lambda), None),
        AlgebraSpec::Psh => ("psh", None, None),
        AlgebraSpec::E { mu } => ("e", None, Some(*mu)),
        AlgebraSpec::Custom { .. } => ("custom", None, None),
    };
    AlgebraEcho {
        family: family.into(),
        lambda,
        mu,
        structure_constants: *g.structure_constants(),
    }
}

fn metric_echo(spec: &MetricSpec, q: &BilinearForm) -> MetricEcho {
    let (normal_form, param) = match spec {
        MetricSpec::Matrix(_) => (None, None),
        MetricSpec::NormalForm { tag, param } => (Some(tag.name().to_string()), *param),
    };
    let (p, n, z) = q.signature();
    MetricEcho {
        matrix: *q.matrix(),
        normal_form,
        param,
        signature: [p, n, z],
    }
}

fn idempotent_certificates(cf: &QuadraticField, f: &QuadraticField, to_input: &dyn Fn(&Vec3) -> Vec3) -> Result<Vec<CertificateEntry>> {
    let far: Vec<Vec3> = seed_grid().iter().map(|s| scale(s, FAR_SEED_SCALE)).collect();
    let points: Vec<Vec3> = match find_idempotents_with_seeds(cf, &far) {
        Ok(list) => list.into_iter().map(|i| i.point).collect(),
        Err(Error::NonIsolatedSolutionSet { sample }) => vec![sample],
        Err(e) => return Err(e),
    };
    Ok(points
        .iter()
        .map(|w| {
            let v = to_input(w);
            let residual = norm(&sub(&f.eval(&v), &v));
            let imp = Idempotent { point: v, residual };
            CertificateEntry {
                kind: "idempotent".into(),
                frame: "input".into(),
                verified: imp.verify(f).is_ok(),
                residual,
                certificate: Certificate::Idempotent(imp),
            }
        })
        .collect())
}

fn pd_certificate(cf: &QuadraticField, f: &QuadraticField, phi: &Mat3) -> Option<CertificateEntry> {
    let s = positive_definite_integral(cf)?;
    let s = congruence(&s, phi);
    let (ev, _) = sym_eigen(&s);
    let s = s.map(|row| row.map(|x| x / ev[2]));
    let min_eigenvalue = ev[0] / ev[2];
    let scale_f = f.max_coefficient().max(1.0) * max_abs(&s).max(1.0);
    let residual = quadratic_derivative_coefficients(&s, f).iter().fold(0.0_f64, |a, x| a.max(x.abs())) / scale_f;
    Some(CertificateEntry {
        kind: "positive_definite_integral".into(),
        frame: "input".into(),
        verified: residual <= PD_RESIDUAL_TOL && crate::dynamics::is_positive_definite(&s),
        residual,
        certificate: Certificate::PositiveDefiniteIntegral { matrix: s, min_eigenvalue },
    })
}

/// The partially defined invariant of the table's compactness argument, in input coordinates,
/// oriented so that its denominator is positive at `v0`.
fn partial_invariant(frame: &NormalFrame, v0: &Vec3) -> Option<Invariant> {
    if frame.table.mechanism != Mechanism::PartialInvariantCompactness {
        return None;
    }
    let inv = match frame.nf.tag {
        NormalFormTag::Q8 => q8_invariant(frame.lambda),
        NormalFormTag::Q5 => q5_invariant(frame.lambda, frame.nf.param?),
        _ => return None,
    };
    let Invariant::PowerRatio {
        name,
        numerator,
        denominator,
        exponent,
    } = inv
    else {
        return None;
    };
    let pull = |c: &Vec3| -> Vec3 { std::array::from_fn(|j| (0..3).map(|i| c[i] * frame.phi[i][j]).sum()) };
    let (num, mut den) = (pull(&numerator), pull(&denominator));
    let d0 = dot(&den, v0);
    if d0.abs() <= 1e-9 * norm(&den) * norm(v0) {
        return None;
    }
    if d0 < 0.0 {
        den = scale(&den, -1.0);
    }
    Some(Invariant::PowerRatio {
        name,
        numerator: num,
        denominator: den,
        exponent,
    })
}

fn random_unitish(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v: Vec3 = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if norm(&v) > 0.1 {
            return v;
        }
    }
}

fn initial_conditions(
    f: &QuadraticField,
    q: &BilinearForm,
    certificates: &[CertificateEntry],
    opts: &ClassifyOptions,
) -> Vec<(String, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ics: Vec<(String, Vec3)> = Vec::new();
    let push = |ics: &mut Vec<(String, Vec3)>, src: &str, v: Vec3| {
        if v.iter().all(|x| x.is_finite()) && !ics.iter().any(|(_, w)| norm(&sub(w, &v)) <= 1e-12 * (1.0 + norm(&v))) {
            ics.push((src.to_string(), v));
        }
    };
    for c in certificates.iter().filter(|c| c.verified) {
        if let Certificate::Idempotent(i) = &c.certificate {
            if ics.len() < MAX_IDEMPOTENT_ICS {
                push(&mut ics, "idempotent", i.point);
            }
        }
    }
    for i in 0..3 {
        for value in [1.0, -1.0] {
            if let Some(v) = null_vector_with(q, i, value) {
                push(&mut ics, "null_cone", v);
            }
        }
    }
    let planes = find_invariant_planes(f);
    for p in planes.planes.iter().take(MAX_PLANES) {
        let n = p.normal;
        for _ in 0..PLANE_SAMPLES {
            let r = random_unitish(&mut rng);
            let v = sub(&r, &scale(&n, dot(&r, &n)));
            // −v runs the same orbit backwards in time
            if norm(&v) > 0.05 {
                push(&mut ics, "invariant_plane", v);
                push(&mut ics, "invariant_plane", scale(&v, -1.0));
            }
        }
    }
    let wanted = ics.len() + opts.random_points.max(MIN_INITIAL_CONDITIONS.saturating_sub(ics.len()));
    while ics.len() < wanted {
        let v = random_unitish(&mut rng);
        push(&mut ics, "random", v);
    }
    ics
}

fn summarize(src: &str, v0: Vec3, traj: &Trajectory, invariant_drift: Option<f64>) -> TrajectorySummary {
    let ev = evidence_of(traj);
    let (outcome, blowup_time, blowup_uncertainty) = match traj.outcome {
        Outcome::ReachedHorizon => ("ReachedHorizon", None, None),
        Outcome::BlowUp { t_est, uncertainty } => ("BlowUp", Some(t_est), Some(uncertainty)),
        Outcome::StepUnderflow { .. } => ("StepUnderflow", None, None),
    };
    TrajectorySummary {
        source: src.into(),
        initial: v0,
        outcome: outcome.into(),
        t_end: traj.last().0,
        blowup_time,
        blowup_uncertainty,
        evidence: ev.evidence,
        sup_norm: ev.sup_norm,
        log_norm_slope: ev.log_norm_slope,
        accepted_steps: traj.stats.accepted_steps,
        energy_drift: traj.stats.energy_drift_max.unwrap_or(0.0),
        invariant_drift,
        csv: None,
    }
}

/// Runs the full pipeline on a parsed problem.
pub fn classify(problem: &Problem, opts: &ClassifyOptions) -> Result<Classification> {
    let opts = opts.with_problem(problem);
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("horizon {}", opts.horizon)));
    }
    let g = problem.algebra.build()?;
    let q = problem.metric.build()?;
    if !q.is_lorentzian() {
        let (p, n, z) = q.signature();
        return Err(Error::NotLorentzian(p, n, z));
    }
    let f = euler_arnold_field(&g, &q)?;
    let frame = match g.family() {
        FamilyId::H(lambda) => Some(normal_frame(&g, lambda, &q, &f)?),
        _ => None,
    };
    let (cf, cq, cframe) = match &frame {
        Some(fr) => (&fr.field, &fr.form, "normal_form"),
        None => (&f, &q, "input"),
    };
    let identity = crate::linalg::IDENTITY;
    let (phi, phi_inv) = frame.as_ref().map_or((identity, identity), |fr| (fr.phi, fr.phi_inv));

    let mut certificates = idempotent_certificates(cf, &f, &|w| mat_vec(&phi_inv, w))?;
    certificates.extend(pd_certificate(cf, &f, &phi));
    if let Some(d) = null_cone_domination(cf, cq) {
        let r = d.verify(cf, cq);
        certificates.push(CertificateEntry {
            kind: "domination".into(),
            frame: cframe.into(),
            verified: r.is_some(),
            residual: r.unwrap_or(d.residual),
            certificate: Certificate::Domination(d),
        });
    }
    if let Some(fr) = &frame {
        if let Some(flow) = ClosedForm::lookup(fr.lambda, fr.nf.tag, fr.nf.param) {
            let err = closed_form_error(&fr.field, flow, &FLOW_ICS, FLOW_HORIZON, &opts.integrate)?;
            certificates.push(CertificateEntry {
                kind: "explicit_flow".into(),
                frame: "normal_form".into(),
                verified: err <= FLOW_TOL,
                residual: err,
                certificate: Certificate::ExplicitFlow {
                    description: flow.description().into(),
                    max_error: err,
                },
            });
        }
    }

    let ics = initial_conditions(&f, &q, &certificates, &opts);
    let runs: Vec<(TrajectorySummary, Trajectory)> = ics
        .par_iter()
        .map(|(src, v0)| {
            let inv = frame.as_ref().and_then(|fr| partial_invariant(fr, v0));
            let mut o = opts.integrate.clone();
            o.dense = true;
            o.energy = Some(*q.matrix());
            if inv.is_some() {
                // the invariant mixes components that decay at different rates
                o.atol = o.atol.min(1e-30);
            }
            o.max_steps = o.max_steps.min(STEP_BUDGET);
            let (traj, truncated) = match integrate(&f, *v0, 0.0, opts.horizon, &o) {
                Ok(t) => (t, false),
                Err(Error::MaxStepsExceeded { t, .. }) => (integrate(&f, *v0, 0.0, 0.99 * t, &o)?, true),
                Err(e) => return Err(e),
            };
            let drift = match &inv {
                Some(i) => match invariant_drift(&traj, std::slice::from_ref(i)) {
                    Ok(d) => Some(d[0].max_drift),
                    Err(Error::DomainExit { .. }) => None,
                    Err(e) => return Err(e),
                },
                None => None,
            };
            let mut summary = summarize(src, *v0, &traj, drift);
            if truncated {
                summary.outcome = "StepBudget".into();
            }
            Ok((summary, traj))
        })
        .collect::<Result<_>>()?;
    let (evidence, trajectories): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let verdict = match &frame {
        Some(fr) => VerdictRecord::from_table(&fr.table),
        None => verdict_from_certificates(&certificates)?,
    };
    let residuals = Residuals {
        canonical: frame.as_ref().map(|fr| fr.nf.residual),
        equivariance: frame.as_ref().map(|fr| fr.equivariance),
        max_certificate: certificates.iter().filter(|c| c.verified).map(|c| c.residual).fold(0.0, f64::max),
        max_energy_drift: evidence.iter().map(|e| e.energy_drift).fold(0.0, f64::max),
    };
    let report = Report {
        schema: SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        algebra: algebra_echo(&problem.algebra, &g),
        metric: metric_echo(&problem.metric, &q),
        field: f.polynomials(),
        canonical: frame.as_ref().map(|fr| CanonicalEcho::from(&fr.nf)),
        verdict,
        certificates,
        evidence,
        residuals,
    };
    report.check()?;
    Ok(Classification {
        report,
        trajectories: if opts.keep_trajectories { trajectories } else { Vec::new() },
    })
}

/// Verdict of an algebra outside the decision table: decided only by a certificate.
fn verdict_from_certificates(certs: &[CertificateEntry]) -> Result<VerdictRecord> {
    let verified = |kind: &str| certs.iter().any(|c| c.verified && c.kind == kind);
    let (idem, dom, pd) = (verified("idempotent"), verified("domination"), verified("positive_definite_integral"));
    if (idem || dom) && pd {
        return Err(Error::CorroborationFailure(
            "a positive-definite integral coexists with an incompleteness certificate".into(),
        ));
    }
    Ok(if idem || dom {
        VerdictRecord {
            status: Status::Incomplete,
            boundedness: Some(Boundedness::NotApplicable),
            mechanism: Some(if idem { Mechanism::Idempotent } else { Mechanism::NoIdempotentNullCone }),
            citation: None,
            decided_by: "certificate".into(),
        }
    } else if pd {
        VerdictRecord {
            status: Status::Complete,
            boundedness: Some(Boundedness::AllBounded),
            mechanism: Some(Mechanism::PositiveDefiniteIntegral),
            citation: None,
            decided_by: "certificate".into(),
        }
    } else {
        VerdictRecord::undecided()
    })
}

impl Report {
    fn has_verified(&self, kind: &str) -> bool {
        self.certificates.iter().any(|c| c.verified && c.kind == kind)
    }

    /// The corroboration invariant: every decided status is backed by evidence, and nothing contradicts it.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::CorroborationFailure(msg));
        if self.evidence.len() < MIN_INITIAL_CONDITIONS {
            return fail(format!("only {} corroborating integrations", self.evidence.len()));
        }
        let incomplete_cert = self.has_verified("idempotent") || self.has_verified("domination");
        let pd = self.has_verified("positive_definite_integral");
        let flow = self.has_verified("explicit_flow");
        let blowups = self.evidence.iter().filter(|e| e.outcome == "BlowUp").count();
        let all_reached = self.evidence.iter().all(|e| e.outcome == "ReachedHorizon");
        match self.verdict.status {
            Status::Incomplete => {
                if pd {
                    return fail("verdict Incomplete but a positive-definite first integral was found".into());
                }
                if !incomplete_cert && blowups == 0 {
                    return fail("verdict Incomplete without an idempotent, a domination certificate or a blow-up".into());
                }
            }
            Status::Complete => {
                if incomplete_cert {
                    return fail("verdict Complete but an incompleteness certificate was found".into());
                }
                if blowups > 0 {
                    return fail(format!("verdict Complete but {blowups} trajectories blew up"));
                }
                let numeric = all_reached && self.verdict.citation.is_some();
                if !(pd || flow || numeric) {
                    let outcomes: Vec<&str> = self.evidence.iter().map(|e| e.outcome.as_str()).collect();
                    return fail(format!(
                        "verdict Complete without a positive-definite integral, a verified flow or complete numeric evidence (outcomes {outcomes:?})"
                    ));
                }
            }
            Status::Undecided => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("report serialization: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))
    }

    /// Strongest boundedness evidence over all trajectories.
    pub fn strongest_evidence(&self) -> Option<Evidence> {
        let rank = |e: &Evidence| match e {
            Evidence::BoundedSoFar => 0,
            Evidence::GrowthDetected => 1,
            Evidence::BlowUp => 2,
        };
        self.evidence.iter().map(|e| e.evidence).max_by_key(rank)
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

impl Classification {
    /// Writes `<stem>.toml` and one `<stem>.traj-NN.csv` per kept trajectory into `dir`.
    pub fn write(&mut self, dir: &Path, stem: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(io)?;
        for (n, traj) in self.trajectories.iter().enumerate() {
            let name = format!("{stem}.traj-{n:02}.csv");
            let file = std::fs::File::create(dir.join(&name)).map_err(io)?;
            traj.write_csv(std::io::BufWriter::new(file))?;
            self.report.evidence[n].csv = Some(name);
        }
        let path = dir.join(format!("{stem}.toml"));
        std::fs::write(&path, self.report.to_toml()?).map_err(io)?;
        Ok(path)
    }
}
