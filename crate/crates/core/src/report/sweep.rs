use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, ClassifyOptions, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::linalg::{det, Mat3};
use crate::metric::BilinearForm;
use crate::normal_form::Status;
use crate::problem::{AlgebraSpec, MetricSpec, Problem, ProblemOptions};

pub const SEED_ENV: &str = "EA_LAB_SEED";

/// The sweep seed from `EA_LAB_SEED`, or the default when unset.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV} must be a non-negative integer, got `{s}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub count: usize,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub classify: ClassifyOptions,
    /// Write each report (with trajectory sidecars) here when set.
    pub report_dir: Option<PathBuf>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            count: 500,
            seed: DEFAULT_SEED,
            lambdas: (-9..=9).map(|k| k as f64 / 10.0).collect(),
            classify: ClassifyOptions::default(),
            report_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub lambda: f64,
    pub matrix: Mat3,
    /// `ok`, `ambiguous`, `corroboration_failure` or `error`.
    pub outcome: String,
    pub tag: Option<String>,
    pub param: Option<f64>,
    pub status: Option<Status>,
    pub message: Option<String>,
}

fn random_lorentzian(rng: &mut ChaCha8Rng) -> Mat3 {
    loop {
        let mut m = [[0.0_f64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = rng.random_range(-2.0..2.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        if det(&m).abs() > 0.05 && BilinearForm::new(m).is_ok_and(|q| q.is_lorentzian()) {
            return m;
        }
    }
}

fn run_case(index: usize, opts: &SweepOptions) -> SweepRecord {
    let case_seed = opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
    let lambda = opts.lambdas[rng.random_range(0..opts.lambdas.len())];
    let matrix = random_lorentzian(&mut rng);
    let problem = Problem {
        algebra: AlgebraSpec::H { lambda },
        metric: MetricSpec::Matrix(matrix),
        options: ProblemOptions::default(),
    };
    let copts = ClassifyOptions {
        seed: case_seed,
        keep_trajectories: opts.report_dir.is_some(),
        ..opts.classify.clone()
    };
    let mut rec = SweepRecord {
        index,
        lambda,
        matrix,
        outcome: "ok".into(),
        tag: None,
        param: None,
        status: None,
        message: None,
    };
    let result = classify(&problem, &copts).and_then(|mut c| {
        if let Some(dir) = &opts.report_dir {
            c.write(dir, &format!("case-{index:04}"))?;
        }
        Ok(c)
    });
    match result {
        Ok(c) => {
            let canonical = c.report.canonical.as_ref();
            rec.tag = canonical.map(|n| n.tag.clone());
            rec.param = canonical.and_then(|n| n.param);
            rec.status = Some(c.report.verdict.status);
        }
        Err(e) => {
            rec.outcome = match e {
                Error::NumericallyAmbiguousCase { .. } => "ambiguous",
                Error::CorroborationFailure(_) => "corroboration_failure",
                _ => "error",
            }
            .into();
            rec.message = Some(e.to_string());
        }
    }
    rec
}

/// Classifies `count` random Lorentzian metrics on random `h(λ)`; each case is seeded independently.
pub fn sweep(opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    if opts.lambdas.is_empty() {
        return Err(Error::ParameterOutOfRange("sweep needs at least one lambda".into()));
    }
    Ok((0..opts.count).into_par_iter().map(|i| run_case(i, opts)).collect())
}

pub fn write_sweep_csv<W: std::io::Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["index", "lambda", "m11", "m12", "m13", "m22", "m23", "m33", "outcome", "tag", "param", "status", "message"])
        .map_err(io)?;
    for r in records {
        let m = r.matrix;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        wr.write_record([
            r.index.to_string(),
            r.lambda.to_string(),
            m[0][0].to_string(),
            m[0][1].to_string(),
            m[0][2].to_string(),
            m[1][1].to_string(),
            m[1][2].to_string(),
            m[2][2].to_string(),
            r.outcome.clone(),
            r.tag.clone().unwrap_or_default(),
            opt(r.param),
            r.status.map(|s| format!("{s:?}")).unwrap_or_default(),
            r.message.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_is_deterministic_and_corroborated() {
        let opts = SweepOptions {
            count: 24,
            seed: 11,
            ..Default::default()
        };
        let a = sweep(&opts).unwrap();
        let b = sweep(&opts).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.outcome == "ok" || r.outcome == "ambiguous", "{r:?}");
        }
        let mut buf = Vec::new();
        write_sweep_csv(&a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 25);
    }

    #[test]
    fn empty_lambda_list_is_rejected() {
        let opts = SweepOptions {
            lambdas: vec![],
            ..Default::default()
        };
        assert!(sweep(&opts).is_err());
    }
}
