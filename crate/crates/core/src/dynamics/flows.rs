use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::{integrate, IntegrateOptions, Outcome};
use crate::linalg::{norm, sub, Vec3};
use crate::metric::QuadraticField;
use crate::normal_form::NormalFormTag;

/// A normal-form field whose flow is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedForm {
    /// `Q12` on `h(0)`.
    Q12AtZero,
    /// `Q9` on `h(−1)`.
    Q9AtMinusOne,
    /// `Q5` with `s = 0` on `h(−1)`.
    Q5ZeroAtMinusOne,
}

impl ClosedForm {
    pub fn lookup(lambda: f64, tag: NormalFormTag, param: Option<f64>) -> Option<Self> {
        match (lambda, tag) {
            (l, NormalFormTag::Q12) if l == 0.0 => Some(ClosedForm::Q12AtZero),
            (l, NormalFormTag::Q9) if l == -1.0 => Some(ClosedForm::Q9AtMinusOne),
            (l, NormalFormTag::Q5) if l == -1.0 && param == Some(0.0) => Some(ClosedForm::Q5ZeroAtMinusOne),
            _ => None,
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ClosedForm::Q12AtZero => "(x0, y0 e^(x0 t), z0 + y0^2 (1 - e^(2 x0 t)) / (2 x0))",
            ClosedForm::Q9AtMinusOne => "(x0, y0 e^(-x0 t), z0 e^(x0 t))",
            ClosedForm::Q5ZeroAtMinusOne => {
                "x = R tanh(R t + c), y = y0 cosh(c) / cosh(R t + c), z - y = (z0 - y0) cosh(R t + c) / cosh(c), R^2 = x0^2 + y0^2"
            }
        }
    }

    /// The exact solution through `v0` at time `t`; defined for all real `t`.
    pub fn solution(&self, v0: &Vec3, t: f64) -> Vec3 {
        let [x0, y0, z0] = *v0;
        match self {
            ClosedForm::Q12AtZero => {
                // (1 − e^{2x0 t}) / (2x0) → −t as x0 → 0
                let k = if x0.abs() < 1e-300 { -t } else { -(2.0 * x0 * t).exp_m1() / (2.0 * x0) };
                [x0, y0 * (x0 * t).exp(), z0 + y0 * y0 * k]
            }
            ClosedForm::Q9AtMinusOne => [x0, y0 * (-x0 * t).exp(), z0 * (x0 * t).exp()],
            ClosedForm::Q5ZeroAtMinusOne => {
                let r = x0.hypot(y0);
                if y0 == 0.0 {
                    return [x0, 0.0, z0 * (x0 * t).exp()];
                }
                let c = (x0 / r).atanh();
                let (u, uc) = (r * t + c, c.cosh());
                let y = y0 * uc / u.cosh();
                [r * u.tanh(), y, y + (z0 - y0) * u.cosh() / uc]
            }
        }
    }
}

/// Largest endpoint error `|num − exact| / (1 + |exact|)` over the given initial
/// conditions, integrating `f` to `horizon`.
pub fn closed_form_error(
    f: &QuadraticField,
    flow: ClosedForm,
    ics: &[Vec3],
    horizon: f64,
    opts: &IntegrateOptions,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for v0 in ics {
        let t = integrate(f, *v0, 0.0, horizon, opts)?;
        if t.outcome != Outcome::ReachedHorizon {
            return Ok(f64::INFINITY);
        }
        let exact = flow.solution(v0, horizon);
        worst = worst.max(norm(&sub(&t.last().1, &exact)) / (1.0 + norm(&exact)));
    }
    Ok(worst)
}
