//! Dormand–Prince 8(5,3) integration of quadratic fields with blow-up detection.
//!
//! Finite-time blow-up is told apart from fast exponential growth by the
//! remaining-time estimate `τ = ‖v‖² / (v·F(v))`: along a solution that blows up
//! like `(T − t)^(−p)` it equals `(T − t)/p` and shrinks to zero, while along
//! exponential growth it stays bounded below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm, Mat3, Vec3};
use crate::metric::QuadraticField;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub blowup_norm: f64,
    pub max_steps: usize,
    /// Keep the dense-output polynomial of every accepted step.
    pub dense: bool,
    /// Bilinear form whose quadratic value is tracked as the energy.
    pub energy: Option<Mat3>,
    /// Take uniform steps of this size with no error control.
    pub fixed_step: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-10,
            atol: 1e-12,
            blowup_norm: 1e8,
            max_steps: 10_000_000,
            dense: false,
            energy: None,
            fixed_step: None,
        }
    }
}

pub const DEFAULT_HORIZON: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    ReachedHorizon,
    BlowUp { t_est: f64, uncertainty: f64 },
    /// The step size collapsed or the state stopped being finite.
    StepUnderflow { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub sup_norm: f64,
    pub energy_drift_max: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Continuous extension of one accepted step on `[t, t + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep {
    pub t: f64,
    pub h: f64,
    cont: [Vec3; 8],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> Vec3 {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            let conpar = c[4][i] + (c[5][i] + (c[6][i] + c[7][i] * s) * s1) * s;
            c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + conpar * s1) * s) * s1) * s
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    /// Step that produced each state; zero for the initial point.
    pub step_sizes: Vec<f64>,
    /// Energy at each state when an energy form was supplied.
    pub energies: Vec<f64>,
    pub outcome: Outcome,
    pub stats: Stats,
    pub dense: Vec<DenseStep>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Vec3) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }

    /// State at time `t` from the dense output, or the nearest stored state when none was kept.
    pub fn at(&self, t: f64) -> Vec3 {
        if !self.dense.is_empty() {
            let idx = self.dense.partition_point(|d| d.t + d.h < t).min(self.dense.len() - 1);
            return self.dense[idx].eval(t);
        }
        let idx = self.times.partition_point(|&x| x < t).min(self.times.len() - 1);
        self.states[idx]
    }

    /// CSV with columns `t, x, y, z, energy, step_size`; energy is empty when not tracked.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        wr.write_record(["t", "x", "y", "z", "energy", "step_size"]).map_err(io)?;
        for n in 0..self.times.len() {
            let s = self.states[n];
            let e = self.energies.get(n).map(|e| format!("{e:e}")).unwrap_or_default();
            wr.write_record([
                format!("{:e}", self.times[n]),
                format!("{:e}", s[0]),
                format!("{:e}", s[1]),
                format!("{:e}", s[2]),
                e,
                format!("{:e}", self.step_sizes[n]),
            ])
            .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Relative drift `|f − f0| / |f0|`, absolute when `|f0|` is tiny.
pub fn relative_drift(f0: f64, f: f64) -> f64 {
    if f0.abs() < 1e-12 {
        (f - f0).abs()
    } else {
        (f - f0).abs() / f0.abs()
    }
}

// Step control.
const SAFE: f64 = 0.9;
const FAC1: f64 = 0.333;
const FAC2: f64 = 6.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;
const FACOLD_MIN: f64 = 1e-4;

// Blow-up declaration.
const BLOWUP_HORIZON_FRACTION: f64 = 1e-3;
const BLOWUP_NORM_RATIO: f64 = 100.0;
const BLOWUP_TAU_RATIO: f64 = 10.0;
const OVERFLOW_NORM: f64 = 1e150;

/// Integrates `v̇ = F(v)` from `v0` at `t0` over `[t0, t0 + horizon]`.
pub fn integrate(f: &QuadraticField, v0: Vec3, t0: f64, horizon: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("horizon must be positive, got {horizon}")));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::ParameterOutOfRange("rtol and atol must be positive".into()));
    }
    if v0.iter().any(|x| !x.is_finite()) {
        return Err(Error::ParameterOutOfRange("initial condition is not finite".into()));
    }
    Integrator::new(f, v0, t0, horizon, opts).run()
}

struct Sample {
    t: f64,
    norm: f64,
    tau: f64,
}

struct Integrator<'a> {
    f: &'a QuadraticField,
    opts: &'a IntegrateOptions,
    t_end: f64,
    horizon: f64,
    traj: Trajectory,
    samples: Vec<Sample>,
    e0: Option<f64>,
}

fn axpy(y: &Vec3, terms: &[(f64, &Vec3)], h: f64) -> Vec3 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn lincomb(terms: &[(f64, &Vec3)]) -> Vec3 {
    axpy(&[0.0; 3], terms, 1.0)
}

fn energy(m: &Mat3, v: &Vec3) -> f64 {
    dot(v, &mat_vec(m, v))
}

struct StepResult {
    y_new: Vec3,
    k_new: Vec3,
    err: f64,
    stages: [Vec3; 12],
}

impl<'a> Integrator<'a> {
    fn new(f: &'a QuadraticField, v0: Vec3, t0: f64, horizon: f64, opts: &'a IntegrateOptions) -> Self {
        let e0 = opts.energy.as_ref().map(|m| energy(m, &v0));
        Integrator {
            f,
            opts,
            t_end: t0 + horizon,
            horizon,
            traj: Trajectory {
                times: vec![t0],
                states: vec![v0],
                step_sizes: vec![0.0],
                energies: e0.into_iter().collect(),
                outcome: Outcome::ReachedHorizon,
                stats: Stats {
                    sup_norm: norm(&v0),
                    energy_drift_max: e0.map(|_| 0.0),
                    accepted_steps: 0,
                    rejected_steps: 0,
                },
                dense: Vec::new(),
            },
            samples: Vec::new(),
            e0,
        }
    }

    fn rhs(&self, v: &Vec3) -> Vec3 {
        self.f.eval(v)
    }

    fn initial_step(&self, y: &Vec3, k1: &Vec3) -> f64 {
        let sk = |i: usize| self.opts.atol + self.opts.rtol * y[i].abs();
        let dnf: f64 = (0..3).map(|i| (k1[i] / sk(i)).powi(2)).sum();
        let dny: f64 = (0..3).map(|i| (y[i] / sk(i)).powi(2)).sum();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
        h = h.min(self.horizon);
        let k2 = self.rhs(&axpy(y, &[(1.0, k1)], h));
        let der2 = (0..3).map(|i| ((k2[i] - k1[i]) / sk(i)).powi(2)).sum::<f64>().sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        // a vanishing component with a tiny atol would otherwise drive the guess below the underflow floor
        (100.0 * h).min(h1).max(1e-10 * self.horizon.max(1.0)).min(self.horizon)
    }

    fn step(&self, y: &Vec3, k1: &Vec3, h: f64) -> StepResult {
        let k2 = self.rhs(&axpy(y, &[(A21, k1)], h));
        let k3 = self.rhs(&axpy(y, &[(A31, k1), (A32, &k2)], h));
        let k4 = self.rhs(&axpy(y, &[(A41, k1), (A43, &k3)], h));
        let k5 = self.rhs(&axpy(y, &[(A51, k1), (A53, &k3), (A54, &k4)], h));
        let k6 = self.rhs(&axpy(y, &[(A61, k1), (A64, &k4), (A65, &k5)], h));
        let k7 = self.rhs(&axpy(y, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)], h));
        let k8 = self.rhs(&axpy(y, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)], h));
        let k9 = self.rhs(&axpy(
            y,
            &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)],
            h,
        ));
        let k10 = self.rhs(&axpy(
            y,
            &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)],
            h,
        ));
        let k11 = self.rhs(&axpy(
            y,
            &[
                (A111, k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
            h,
        ));
        let yy1 = axpy(
            y,
            &[
                (A121, k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
            h,
        );
        let k12 = self.rhs(&yy1);
        let incr = lincomb(&[
            (B1, k1),
            (B6, &k6),
            (B7, &k7),
            (B8, &k8),
            (B9, &k9),
            (B10, &k10),
            (B11, &k11),
            (B12, &k12),
        ]);
        let y_new = axpy(y, &[(1.0, &incr)], h);

        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..3 {
            let sk = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            let e2 = incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            err2 += (e2 / sk).powi(2);
            let e = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            err += (e / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err * (1.0 / (deno * 3.0)).sqrt();
        let k_new = self.rhs(&y_new);
        StepResult {
            y_new,
            k_new,
            err,
            stages: [*k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12],
        }
    }

    fn dense_step(&self, t: f64, h: f64, y: &Vec3, r: &StepResult) -> DenseStep {
        let [k1, _k2, _k3, _k4, _k5, k6, k7, k8, k9, k10, k11, k12] = &r.stages;
        let knew = &r.k_new;
        let ydiff = lincomb(&[(1.0, &r.y_new), (-1.0, y)]);
        let bspl = lincomb(&[(h, k1), (-1.0, &ydiff)]);
        let c4 = lincomb(&[(1.0, &ydiff), (-h, knew), (-1.0, &bspl)]);
        let base = |d: [f64; 8]| {
            lincomb(&[
                (d[0], k1),
                (d[1], k6),
                (d[2], k7),
                (d[3], k8),
                (d[4], k9),
                (d[5], k10),
                (d[6], k11),
                (d[7], k12),
            ])
        };
        let c5 = base([D41, D46, D47, D48, D49, D410, D411, D412]);
        let c6 = base([D51, D56, D57, D58, D59, D510, D511, D512]);
        let c7 = base([D61, D66, D67, D68, D69, D610, D611, D612]);
        let c8 = base([D71, D76, D77, D78, D79, D710, D711, D712]);
        let k14 = self.rhs(&axpy(
            y,
            &[
                (A141, k1),
                (A147, k7),
                (A148, k8),
                (A149, k9),
                (A1410, k10),
                (A1411, k11),
                (A1412, k12),
                (A1413, knew),
            ],
            h,
        ));
        let k15 = self.rhs(&axpy(
            y,
            &[
                (A151, k1),
                (A156, k6),
                (A157, k7),
                (A158, k8),
                (A1511, k11),
                (A1512, k12),
                (A1513, knew),
                (A1514, &k14),
            ],
            h,
        ));
        let k16 = self.rhs(&axpy(
            y,
            &[
                (A161, k1),
                (A166, k6),
                (A167, k7),
                (A168, k8),
                (A169, k9),
                (A1613, knew),
                (A1614, &k14),
                (A1615, &k15),
            ],
            h,
        ));
        let fin = |c: Vec3, d: [f64; 4]| {
            let extra = lincomb(&[(d[0], knew), (d[1], &k14), (d[2], &k15), (d[3], &k16)]);
            lincomb(&[(h, &c), (h, &extra)])
        };
        DenseStep {
            t,
            h,
            cont: [
                *y,
                ydiff,
                bspl,
                c4,
                fin(c5, [D413, D414, D415, D416]),
                fin(c6, [D513, D514, D515, D516]),
                fin(c7, [D613, D614, D615, D616]),
                fin(c8, [D713, D714, D715, D716]),
            ],
        }
    }

    fn accept(&mut self, t: f64, h: f64, y: Vec3) {
        self.traj.times.push(t);
        self.traj.states.push(y);
        self.traj.step_sizes.push(h);
        self.traj.stats.accepted_steps += 1;
        let n = norm(&y);
        self.traj.stats.sup_norm = self.traj.stats.sup_norm.max(n);
        if let (Some(m), Some(e0)) = (self.opts.energy.as_ref(), self.e0) {
            let e = energy(m, &y);
            self.traj.energies.push(e);
            let drift = relative_drift(e0, e);
            let s = self.traj.stats.energy_drift_max.get_or_insert(0.0);
            *s = s.max(drift);
        }
    }

    /// Records the remaining-time sample at the newest state and decides on blow-up.
    fn blowup_check(&mut self, t: f64, y: &Vec3, k: &Vec3) -> Option<Outcome> {
        let n = norm(y);
        let growth = dot(y, k);
        if n == 0.0 || growth <= 0.0 {
            self.samples.clear();
            return None;
        }
        let tau = n * n / growth;
        self.samples.push(Sample { t, norm: n, tau });
        if n < self.opts.blowup_norm || self.samples.len() < 3 {
            return None;
        }
        let earlier = self.samples.iter().rev().find(|s| s.norm * BLOWUP_NORM_RATIO <= n)?;
        if tau * BLOWUP_TAU_RATIO > earlier.tau {
            return None;
        }
        let len = self.samples.len();
        let est = |i: usize| {
            let (a, b) = (&self.samples[i - 1], &self.samples[i]);
            let slope = (b.tau - a.tau) / (b.t - a.t);
            if slope < 0.0 {
                Some(b.t - b.tau / slope)
            } else {
                None
            }
        };
        let t_est = est(len - 1)?;
        let prev = est(len - 2).unwrap_or(t_est);
        if t_est - t >= BLOWUP_HORIZON_FRACTION * self.horizon {
            return None;
        }
        Some(Outcome::BlowUp {
            t_est,
            uncertainty: (t_est - prev).abs(),
        })
    }

    fn run(mut self) -> Result<Trajectory> {
        let mut t = self.traj.times[0];
        let mut y = self.traj.states[0];
        let mut k1 = self.rhs(&y);
        let mut h = match self.opts.fixed_step {
            Some(hf) if hf > 0.0 => hf,
            Some(hf) => return Err(Error::ParameterOutOfRange(format!("fixed step must be positive, got {hf}"))),
            None => self.initial_step(&y, &k1),
        };
        let mut facold = FACOLD_MIN;
        let mut last_rejected = false;
        let mut attempts = 0usize;

        loop {
            if self.t_end - t <= 1e-14 * self.t_end.abs().max(1.0) {
                self.traj.outcome = Outcome::ReachedHorizon;
                break;
            }
            if attempts >= self.opts.max_steps {
                return Err(Error::MaxStepsExceeded {
                    max_steps: self.opts.max_steps,
                    t,
                });
            }
            attempts += 1;
            let last = t + h >= self.t_end;
            let h_try = if last { self.t_end - t } else { h };
            if h_try.abs() <= 1e-14 * t.abs().max(1.0) * 10.0 && !last {
                self.traj.outcome = Outcome::StepUnderflow { t };
                break;
            }
            let r = self.step(&y, &k1, h_try);
            let finite = r.y_new.iter().chain(r.k_new.iter()).all(|x| x.is_finite()) && r.err.is_finite();
            if !finite || norm(&r.y_new) > OVERFLOW_NORM {
                if self.opts.fixed_step.is_some() || h_try <= 1e-14 * t.abs().max(1.0) * 10.0 {
                    self.traj.outcome = Outcome::StepUnderflow { t };
                    break;
                }
                self.traj.stats.rejected_steps += 1;
                h = h_try * 0.25;
                last_rejected = true;
                continue;
            }

            if self.opts.fixed_step.is_some() {
                self.commit(t, h_try, &y, &r);
                t = if last { self.t_end } else { t + h_try };
                y = r.y_new;
                k1 = r.k_new;
                if let Some(o) = self.blowup_check(t, &y, &k1) {
                    self.traj.outcome = o;
                    break;
                }
                continue;
            }

            let fac11 = r.err.powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA)) / SAFE;
            let fac = (1.0 / FAC2).max((1.0 / FAC1).min(fac));
            let mut h_new = h_try / fac;
            if r.err <= 1.0 {
                facold = r.err.max(FACOLD_MIN);
                self.commit(t, h_try, &y, &r);
                t = if last { self.t_end } else { t + h_try };
                y = r.y_new;
                k1 = r.k_new;
                if last_rejected {
                    h_new = h_new.min(h_try);
                }
                last_rejected = false;
                if let Some(o) = self.blowup_check(t, &y, &k1) {
                    self.traj.outcome = o;
                    break;
                }
            } else {
                h_new = h_try / (1.0 / FAC1).min(fac11 / SAFE);
                self.traj.stats.rejected_steps += 1;
                last_rejected = true;
            }
            h = h_new;
        }
        Ok(self.traj)
    }

    fn commit(&mut self, t: f64, h: f64, y: &Vec3, r: &StepResult) {
        if self.opts.dense {
            let d = self.dense_step(t, h, y, r);
            self.traj.dense.push(d);
        }
        let t_new = if t + h >= self.t_end { self.t_end } else { t + h };
        self.accept(t_new, h, r.y_new);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    BoundedSoFar,
    GrowthDetected,
    BlowUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub sup_norm: f64,
    pub evidence: Evidence,
    /// Least-squares slope of `log‖v‖` over the second half of the horizon.
    pub log_norm_slope: f64,
    pub outcome: Outcome,
}

/// Slope threshold on `log‖v‖` above which growth is reported.
pub const GROWTH_SLOPE: f64 = 1e-3;
const GROWTH_SAMPLES: usize = 400;

/// Numerical boundedness evidence; never a proof.
pub fn boundedness_evidence(
    f: &QuadraticField,
    v0: Vec3,
    horizon: f64,
    opts: &IntegrateOptions,
) -> Result<BoundednessReport> {
    let mut o = opts.clone();
    o.dense = true;
    let traj = integrate(f, v0, 0.0, horizon, &o)?;
    Ok(evidence_of(&traj))
}

/// Boundedness evidence read off a finished trajectory; `ReachedHorizon`
/// runs need dense output for the growth regression.
pub fn evidence_of(traj: &Trajectory) -> BoundednessReport {
    let sup_norm = traj.stats.sup_norm;
    match traj.outcome {
        Outcome::BlowUp { .. } => BoundednessReport {
            sup_norm,
            evidence: Evidence::BlowUp,
            log_norm_slope: f64::INFINITY,
            outcome: traj.outcome,
        },
        Outcome::StepUnderflow { .. } => BoundednessReport {
            sup_norm,
            evidence: Evidence::GrowthDetected,
            log_norm_slope: f64::INFINITY,
            outcome: traj.outcome,
        },
        Outcome::ReachedHorizon => {
            let (t0, t1) = (traj.times[0], traj.last().0);
            let (a, b) = (t0 + 0.5 * (t1 - t0), t1);
            let pts: Vec<(f64, f64)> = (0..=GROWTH_SAMPLES)
                .map(|n| {
                    let t = a + (b - a) * n as f64 / GROWTH_SAMPLES as f64;
                    (t, norm(&traj.at(t)).max(f64::MIN_POSITIVE).ln())
                })
                .collect();
            let slope = regression_slope(&pts);
            BoundednessReport {
                sup_norm,
                evidence: if slope > GROWTH_SLOPE {
                    Evidence::GrowthDetected
                } else {
                    Evidence::BoundedSoFar
                },
                log_norm_slope: slope,
                outcome: traj.outcome,
            }
        }
    }
}

fn regression_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// A function monitored along trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Invariant {
    Linear { name: String, covector: Vec3 },
    Quadratic { name: String, matrix: Mat3 },
    /// `(n·v) / (d·v)^exponent`, defined where `d·v > 0`.
    PowerRatio {
        name: String,
        numerator: Vec3,
        denominator: Vec3,
        exponent: f64,
    },
}

impl Invariant {
    pub fn name(&self) -> &str {
        match self {
            Invariant::Linear { name, .. } | Invariant::Quadratic { name, .. } | Invariant::PowerRatio { name, .. } => {
                name
            }
        }
    }

    pub fn eval(&self, v: &Vec3) -> Option<f64> {
        match self {
            Invariant::Linear { covector, .. } => Some(dot(covector, v)),
            Invariant::Quadratic { matrix, .. } => Some(energy(matrix, v)),
            Invariant::PowerRatio {
                numerator,
                denominator,
                exponent,
                ..
            } => {
                let d = dot(denominator, v);
                if d > 0.0 {
                    Some(dot(numerator, v) / d.powf(*exponent))
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
    pub outcome: Outcome,
    pub sup_norm: f64,
}

impl DriftReport {
    pub fn drift(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.max_drift)
    }
}

/// Max drift of each invariant along a trajectory, sampled at accepted steps and step midpoints.
pub fn invariant_drift(traj: &Trajectory, invariants: &[Invariant]) -> Result<Vec<DriftEntry>> {
    let mut pts: Vec<(f64, Vec3)> = traj.times.iter().copied().zip(traj.states.iter().copied()).collect();
    for d in &traj.dense {
        let tm = d.t + 0.5 * d.h;
        pts.push((tm, d.eval(tm)));
    }
    invariants
        .iter()
        .map(|inv| {
            let (t0, v0) = pts[0];
            let f0 = inv.eval(&v0).ok_or(Error::DomainExit { t: t0 })?;
            let mut worst = 0.0_f64;
            for (t, v) in &pts {
                let f = inv.eval(v).ok_or(Error::DomainExit { t: *t })?;
                worst = worst.max(relative_drift(f0, f));
            }
            Ok(DriftEntry {
                name: inv.name().to_string(),
                initial: f0,
                max_drift: worst,
            })
        })
        .collect()
}

/// Integrates and reports the drift of the energy of `q` and of every listed invariant.
pub fn monitor(
    f: &QuadraticField,
    q: &Mat3,
    v0: Vec3,
    horizon: f64,
    invariants: &[Invariant],
    opts: &IntegrateOptions,
) -> Result<DriftReport> {
    let mut o = opts.clone();
    o.dense = true;
    o.energy = Some(*q);
    let traj = integrate(f, v0, 0.0, horizon, &o)?;
    let mut all = vec![Invariant::Quadratic {
        name: "energy".into(),
        matrix: *q,
    }];
    all.extend(invariants.iter().cloned());
    Ok(DriftReport {
        entries: invariant_drift(&traj, &all)?,
        outcome: traj.outcome,
        sup_norm: traj.stats.sup_norm,
    })
}

// Dormand–Prince 8(5,3) tableau (Hairer, Nørsett & Wanner).
const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const A141: f64 = 5.61675022830479523392909219681E-2;
const A147: f64 = 2.53500210216624811088794765333E-1;
const A148: f64 = -2.46239037470802489917441475441E-1;
const A149: f64 = -1.24191423263816360469010140626E-1;
const A1410: f64 = 1.5329179827876569731206322685E-1;
const A1411: f64 = 8.20105229563468988491666602057E-3;
const A1412: f64 = 7.56789766054569976138603589584E-3;
const A1413: f64 = -8.298E-3;
const A151: f64 = 3.18346481635021405060768473261E-2;
const A156: f64 = 2.83009096723667755288322961402E-2;
const A157: f64 = 5.35419883074385676223797384372E-2;
const A158: f64 = -5.49237485713909884646569340306E-2;
const A1511: f64 = -1.08347328697249322858509316994E-4;
const A1512: f64 = 3.82571090835658412954920192323E-4;
const A1513: f64 = -3.40465008687404560802977114492E-4;
const A1514: f64 = 1.41312443674632500278074618366E-1;
const A161: f64 = -4.28896301583791923408573538692E-1;
const A166: f64 = -4.69762141536116384314449447206E0;
const A167: f64 = 7.68342119606259904184240953878E0;
const A168: f64 = 4.06898981839711007970213554331E0;
const A169: f64 = 3.56727187455281109270669543021E-1;
const A1613: f64 = -1.39902416515901462129418009734E-3;
const A1614: f64 = 2.9475147891527723389556272149E0;
const A1615: f64 = -9.15095847217987001081870187138E0;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

const D41: f64 = -0.84289382761090128651353491142E+01;
const D46: f64 = 0.56671495351937776962531783590E+00;
const D47: f64 = -0.30689499459498916912797304727E+01;
const D48: f64 = 0.23846676565120698287728149680E+01;
const D49: f64 = 0.21170345824450282767155149946E+01;
const D410: f64 = -0.87139158377797299206789907490E+00;
const D411: f64 = 0.22404374302607882758541771650E+01;
const D412: f64 = 0.63157877876946881815570249290E+00;
const D413: f64 = -0.88990336451333310820698117400E-01;
const D414: f64 = 0.18148505520854727256656404962E+02;
const D415: f64 = -0.91946323924783554000451984436E+01;
const D416: f64 = -0.44360363875948939664310572000E+01;
const D51: f64 = 0.10427508642579134603413151009E+02;
const D56: f64 = 0.24228349177525818288430175319E+03;
const D57: f64 = 0.16520045171727028198505394887E+03;
const D58: f64 = -0.37454675472269020279518312152E+03;
const D59: f64 = -0.22113666853125306036270938578E+02;
const D510: f64 = 0.77334326684722638389603898808E+01;
const D511: f64 = -0.30674084731089398182061213626E+02;
const D512: f64 = -0.93321305264302278729567221706E+01;
const D513: f64 = 0.15697238121770843886131091075E+02;
const D514: f64 = -0.31139403219565177677282850411E+02;
const D515: f64 = -0.93529243588444783865713862664E+01;
const D516: f64 = 0.35816841486394083752465898540E+02;
const D61: f64 = 0.19985053242002433820987653617E+02;
const D66: f64 = -0.38703730874935176555105901742E+03;
const D67: f64 = -0.18917813819516756882830838328E+03;
const D68: f64 = 0.52780815920542364900561016686E+03;
const D69: f64 = -0.11573902539959630126141871134E+02;
const D610: f64 = 0.68812326946963000169666922661E+01;
const D611: f64 = -0.10006050966910838403183860980E+01;
const D612: f64 = 0.77771377980534432092869265740E+00;
const D613: f64 = -0.27782057523535084065932004339E+01;
const D614: f64 = -0.60196695231264120758267380846E+02;
const D615: f64 = 0.84320405506677161018159903784E+02;
const D616: f64 = 0.11992291136182789328035130030E+02;
const D71: f64 = -0.25693933462703749003312586129E+02;
const D76: f64 = -0.15418974869023643374053993627E+03;
const D77: f64 = -0.23152937917604549567536039109E+03;
const D78: f64 = 0.35763911791061412378285349910E+03;
const D79: f64 = 0.93405324183624310003907691704E+02;
const D710: f64 = -0.37458323136451633156875139351E+02;
const D711: f64 = 0.10409964950896230045147246184E+03;
const D712: f64 = 0.29840293426660503123344363579E+02;
const D713: f64 = -0.43533456590011143754432175058E+02;
const D714: f64 = 0.96324553959188282948394950600E+02;
const D715: f64 = -0.39177261675615439165231486172E+02;
const D716: f64 = -0.14972683625798562581422125276E+03;
