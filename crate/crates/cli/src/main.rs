use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ea_lab_core::algebra::{jacobi_residual, FamilyId, LieAlgebra3};
use ea_lab_core::dynamics::{
    find_idempotents, find_invariant_planes, incompleteness_witness, linear_first_integrals, positive_definite_integral,
    quadratic_first_integrals, Certificate, Idempotent, InvariantPlanes,
};
use ea_lab_core::integrator::{evidence_of, integrate, IntegrateOptions, Outcome, DEFAULT_HORIZON};
use ea_lab_core::linalg::{Mat3, Tensor3, Vec3};
use ea_lab_core::metric::{euler_arnold_field, BilinearForm, QuadraticField};
use ea_lab_core::normal_form::{canonicalize, verdict_from_table, NormalFormTag, Verdict};
use ea_lab_core::problem::{parse_algebra, parse_metric, parse_problem, parse_vector, AlgebraSpec, MetricSpec, Problem, ProblemOptions};
use ea_lab_core::report::{
    census, classify, parse_rational, seed_from_env, sweep, table1_with, write_sweep_csv, CanonicalEcho, CensusRow,
    CertificateEntry, ClassifyOptions, Residuals, SweepOptions, Table1Row,
};
use ea_lab_core::{Error, Result};

#[derive(Parser)]
#[command(name = "ea-lab", version, about = "Geodesic completeness of left-invariant Lorentzian metrics on 3-dimensional Lie algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra: antisymmetry, Jacobi identity, unimodularity.
    Check(System),
    /// Print the geodesic field of a metric.
    Field(System),
    /// Bring a metric on h(λ) to its normal form.
    Canonicalize(System),
    /// Idempotents of the geodesic field.
    Idempotents(System),
    /// Invariant planes through the origin.
    Planes(System),
    /// Linear and quadratic first integrals.
    Integrals(System),
    /// Certificates and the verdict they support; without a metric, an incompleteness witness.
    Certify(System),
    /// Integrate one geodesic and write it as CSV.
    Integrate(IntegrateArgs),
    /// Full pipeline: normal form, verdict, certificates, corroborating integrations.
    Classify(ClassifyArgs),
    /// Exact field table for the twelve Lorentzian normal forms on h(λ).
    Table1(TableArgs),
    /// Closed-form idempotent lists checked against the numeric search.
    Census(CensusArgs),
    /// Classify random metrics on random h(λ).
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Family {
    H,
    Psh,
    E,
}

#[derive(Args, Clone, Default)]
struct System {
    /// Problem file with [algebra] and [metric] sections; flags override it.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// λ for h(λ); implies `--family h`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// μ for e(μ); implies `--family e`.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Metric file: `matrix = [[..]]` or `normal_form = ".."`, optionally under [metric].
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Normal form tag such as Q3.
    #[arg(long)]
    nf: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    param: Option<f64>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    system: System,
    /// Initial condition `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    ic: String,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: f64,
    /// CSV destination; stdout gets only the footer.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    system: System,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report and trajectory CSVs here instead of printing the report.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Rational λ with |λ| < 1, e.g. `1/3` or `-0.5`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    r: String,
    #[arg(long, default_value = "-3/10", allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    t: String,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Defaults to EA_LAB_SEED, then to a fixed seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated λ values; defaults to −0.9, −0.8, …, 0.9.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    horizon: Option<f64>,
    /// CSV destination; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep every report with its trajectory CSVs here.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| Error::Internal(format!("output serialization: {e}")))?;
    std::io::stdout().write_all(text.as_bytes()).map_err(io)
}

struct Resolved {
    algebra: Option<AlgebraSpec>,
    metric: Option<MetricSpec>,
    options: ProblemOptions,
}

impl System {
    fn resolve(&self) -> Result<Resolved> {
        let mut r = Resolved {
            algebra: None,
            metric: None,
            options: ProblemOptions::default(),
        };
        if let Some(path) = &self.problem {
            let text = read(path)?;
            match parse_problem(&text) {
                Ok(p) => {
                    r.algebra = Some(p.algebra);
                    r.metric = Some(p.metric);
                    r.options = p.options;
                }
                // a file with only an [algebra] section is still useful to `check`
                Err(full) => r.algebra = Some(parse_algebra(&text).map_err(|_| full)?),
            }
        }
        let family = match (self.family, self.lambda, self.mu) {
            (Some(f), _, _) => Some(f),
            (None, Some(_), None) => Some(Family::H),
            (None, None, Some(_)) => Some(Family::E),
            (None, Some(_), Some(_)) => return Err(Error::Parse("give --lambda or --mu, not both".into())),
            (None, None, None) => None,
        };
        if let Some(f) = family {
            let need = |x: Option<f64>, flag: &str| x.ok_or_else(|| Error::Parse(format!("this family needs {flag}")));
            r.algebra = Some(match f {
                Family::H => AlgebraSpec::H { lambda: need(self.lambda, "--lambda")? },
                Family::Psh => AlgebraSpec::Psh,
                Family::E => AlgebraSpec::E { mu: need(self.mu, "--mu")? },
            });
        }
        match (&self.metric, &self.nf) {
            (Some(_), Some(_)) => return Err(Error::Parse("give --metric or --nf, not both".into())),
            (Some(path), None) => r.metric = Some(parse_metric(&read(path)?)?),
            (None, Some(tag)) => {
                r.metric = Some(MetricSpec::NormalForm {
                    tag: NormalFormTag::parse(tag)?,
                    param: self.param,
                })
            }
            (None, None) if self.param.is_some() => return Err(Error::Parse("--param needs --nf".into())),
            (None, None) => {}
        }
        Ok(r)
    }

    fn algebra(&self) -> Result<(AlgebraSpec, LieAlgebra3)> {
        let spec = self
            .resolve()?
            .algebra
            .ok_or_else(|| Error::Parse("no algebra: give --problem, --lambda, --mu or --family".into()))?;
        let g = spec.build()?;
        Ok((spec, g))
    }

    fn problem(&self) -> Result<Problem> {
        let r = self.resolve()?;
        Ok(Problem {
            algebra: r.algebra.ok_or_else(|| Error::Parse("no algebra: give --problem, --lambda, --mu or --family".into()))?,
            metric: r.metric.ok_or_else(|| Error::Parse("no metric: give --problem, --metric or --nf".into()))?,
            options: r.options,
        })
    }

    fn field(&self) -> Result<(Problem, LieAlgebra3, BilinearForm, QuadraticField)> {
        let p = self.problem()?;
        let g = p.algebra.build()?;
        let q = p.metric.build()?;
        let f = euler_arnold_field(&g, &q)?;
        Ok((p, g, q, f))
    }
}

#[derive(Serialize)]
struct CheckRecord {
    family: String,
    unimodular: bool,
    jacobi_residual: f64,
    jacobi_triple: [usize; 3],
    structure_constants: Tensor3,
}

fn family_name(id: FamilyId) -> String {
    match id {
        FamilyId::H(l) => format!("h({l})"),
        FamilyId::Psh => "psh".into(),
        FamilyId::E(m) => format!("e({m})"),
        FamilyId::Custom => "custom".into(),
    }
}

fn cmd_check(s: &System) -> Result<()> {
    let (_, g) = s.algebra()?;
    let (triple, residual) = jacobi_residual(g.structure_constants());
    emit(&CheckRecord {
        family: family_name(g.family()),
        unimodular: g.is_unimodular(),
        jacobi_residual: residual,
        jacobi_triple: triple,
        structure_constants: *g.structure_constants(),
    })
}

#[derive(Serialize)]
struct FieldRecord {
    family: String,
    signature: [usize; 3],
    polynomials: [String; 3],
    /// Rows `x'`, `y'`, `z'`; columns x², xy, xz, y², yz, z².
    coefficients: [[f64; 6]; 3],
}

fn cmd_field(s: &System) -> Result<()> {
    let (_, g, q, f) = s.field()?;
    let (p, n, z) = q.signature();
    emit(&FieldRecord {
        family: family_name(g.family()),
        signature: [p, n, z],
        polynomials: f.polynomials(),
        coefficients: f.coefficients(),
    })
}

#[derive(Serialize)]
struct CanonicalRecord {
    #[serde(flatten)]
    canonical: CanonicalEcho,
    verdict: Verdict,
}

fn cmd_canonicalize(s: &System) -> Result<()> {
    let p = s.problem()?;
    let lambda = p
        .algebra
        .lambda()
        .ok_or_else(|| Error::ParameterOutOfRange("normal forms are classified for h(λ) only".into()))?;
    let q = p.metric.build()?;
    let nf = canonicalize(lambda, &q)?;
    emit(&CanonicalRecord {
        canonical: CanonicalEcho::from(&nf),
        verdict: verdict_from_table(lambda, &nf)?,
    })
}

#[derive(Serialize)]
struct IdempotentsRecord {
    count: usize,
    idempotents: Vec<Idempotent>,
}

fn cmd_idempotents(s: &System) -> Result<()> {
    let (_, _, _, f) = s.field()?;
    let idempotents = find_idempotents(&f)?;
    emit(&IdempotentsRecord {
        count: idempotents.len(),
        idempotents,
    })
}

fn cmd_planes(s: &System) -> Result<()> {
    let (_, _, _, f) = s.field()?;
    let planes: InvariantPlanes = find_invariant_planes(&f);
    emit(&planes)
}

#[derive(Serialize)]
struct IntegralsRecord {
    /// Covectors `a` with `a·v` conserved.
    linear: Vec<Vec3>,
    /// Symmetric `S` with `vᵀ S v` conserved; a basis of the space.
    quadratic: Vec<Mat3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positive_definite: Option<Mat3>,
}

fn cmd_integrals(s: &System) -> Result<()> {
    let (_, _, _, f) = s.field()?;
    emit(&IntegralsRecord {
        linear: linear_first_integrals(&f),
        quadratic: quadratic_first_integrals(&f),
        positive_definite: positive_definite_integral(&f),
    })
}

#[derive(Serialize)]
struct CertifyRecord {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mechanism: Option<String>,
    decided_by: String,
    certificates: Vec<CertificateEntry>,
    residuals: Residuals,
}

#[derive(Serialize)]
struct WitnessRecord {
    kind: String,
    proves_incompleteness: bool,
    metric: Mat3,
    certificate: Certificate,
}

fn cmd_certify(s: &System) -> Result<()> {
    let r = s.resolve()?;
    if r.metric.is_none() {
        let (_, g) = s.algebra()?;
        let (q, certificate) = incompleteness_witness(&g)?;
        return emit(&WitnessRecord {
            kind: certificate.kind().into(),
            proves_incompleteness: certificate.proves_incompleteness(),
            metric: *q.matrix(),
            certificate,
        });
    }
    let report = classify(&s.problem()?, &ClassifyOptions::default())?.report;
    emit(&CertifyRecord {
        status: format!("{:?}", report.verdict.status),
        mechanism: report.verdict.mechanism.map(|m| format!("{m:?}")),
        decided_by: report.verdict.decided_by,
        certificates: report.certificates,
        residuals: report.residuals,
    })
}

#[derive(Serialize)]
struct IntegrateFooter {
    outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup_uncertainty: Option<f64>,
    t_end: f64,
    end_state: Vec3,
    accepted_steps: usize,
    rejected_steps: usize,
    sup_norm: f64,
    energy_drift: f64,
    evidence: String,
    log_norm_slope: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

fn cmd_integrate(a: &IntegrateArgs) -> Result<()> {
    let (_, _, q, f) = a.system.field()?;
    let v0 = parse_vector(&a.ic)?;
    let mut opts = IntegrateOptions {
        energy: Some(*q.matrix()),
        ..Default::default()
    };
    if let Some(r) = a.rtol {
        opts.rtol = r;
    }
    if let Some(t) = a.atol {
        opts.atol = t;
    }
    let traj = integrate(&f, v0, 0.0, a.horizon, &opts)?;
    if let Some(path) = &a.out {
        let file = std::fs::File::create(path).map_err(io)?;
        traj.write_csv(std::io::BufWriter::new(file))?;
    }
    let ev = evidence_of(&traj);
    let (outcome, blowup_time, blowup_uncertainty) = match traj.outcome {
        Outcome::ReachedHorizon => ("ReachedHorizon", None, None),
        Outcome::BlowUp { t_est, uncertainty } => ("BlowUp", Some(t_est), Some(uncertainty)),
        Outcome::StepUnderflow { .. } => ("StepUnderflow", None, None),
    };
    let (t_end, end_state) = traj.last();
    emit(&IntegrateFooter {
        outcome: outcome.into(),
        blowup_time,
        blowup_uncertainty,
        t_end,
        end_state,
        accepted_steps: traj.stats.accepted_steps,
        rejected_steps: traj.stats.rejected_steps,
        sup_norm: traj.stats.sup_norm,
        energy_drift: traj.stats.energy_drift_max.unwrap_or(0.0),
        evidence: format!("{:?}", ev.evidence),
        log_norm_slope: ev.log_norm_slope,
        csv: a.out.as_ref().map(|p| p.display().to_string()),
    })
}

fn cmd_classify(a: &ClassifyArgs) -> Result<()> {
    let mut problem = a.system.problem()?;
    // explicit flags win over the problem file's [options]
    if let Some(h) = a.horizon {
        problem.options.horizon = Some(h);
    }
    if let Some(s) = a.seed {
        problem.options.seed = Some(s);
    }
    let opts = ClassifyOptions {
        keep_trajectories: a.out_dir.is_some(),
        ..Default::default()
    };
    let mut c = classify(&problem, &opts)?;
    match &a.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            let path = c.write(dir, "report")?;
            println!("{}", path.display());
            Ok(())
        }
        None => std::io::stdout().write_all(c.report.to_toml()?.as_bytes()).map_err(io),
    }
}

#[derive(Serialize)]
struct TableRecord {
    lambda: String,
    rows: Vec<Table1Row>,
}

fn cmd_table1(a: &TableArgs) -> Result<()> {
    let lambda = parse_rational(&a.lambda)?;
    let rows = table1_with(&lambda, &parse_rational(&a.r)?, &parse_rational(&a.s)?, &parse_rational(&a.t)?)?;
    emit(&TableRecord {
        lambda: lambda.to_string(),
        rows,
    })
}

#[derive(Serialize)]
struct CensusRecord {
    lambda: f64,
    rows: Vec<CensusRow>,
}

fn cmd_census(a: &CensusArgs) -> Result<()> {
    emit(&CensusRecord {
        lambda: a.lambda,
        rows: census(a.lambda)?,
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let mut opts = SweepOptions {
        count: a.count,
        seed: match a.seed {
            Some(s) => s,
            None => seed_from_env()?,
        },
        report_dir: a.report_dir.clone(),
        ..Default::default()
    };
    if let Some(l) = &a.lambdas {
        opts.lambdas = l.clone();
    }
    if let Some(h) = a.horizon {
        opts.classify.horizon = h;
    }
    if let Some(dir) = &opts.report_dir {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let records = sweep(&opts)?;
    match &a.out {
        Some(path) => write_sweep_csv(&records, std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?))?,
        None => write_sweep_csv(&records, std::io::stdout().lock())?,
    }
    let count = |o: &str| records.iter().filter(|r| r.outcome == o).count();
    let (failures, errors) = (count("corroboration_failure"), count("error"));
    eprintln!(
        "sweep: {} cases, {} ok, {} ambiguous, {failures} corroboration failures, {errors} errors (seed {})",
        records.len(),
        count("ok"),
        count("ambiguous"),
        opts.seed
    );
    if failures > 0 {
        return Err(Error::CorroborationFailure(format!("{failures} of {} sweep cases", records.len())));
    }
    if errors > 0 {
        return Err(Error::Internal(format!("{errors} of {} sweep cases failed", records.len())));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Check(s) => cmd_check(s),
        Command::Field(s) => cmd_field(s),
        Command::Canonicalize(s) => cmd_canonicalize(s),
        Command::Idempotents(s) => cmd_idempotents(s),
        Command::Planes(s) => cmd_planes(s),
        Command::Integrals(s) => cmd_integrals(s),
        Command::Certify(s) => cmd_certify(s),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Census(a) => cmd_census(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1: code 2 is reserved for ambiguous cases
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
