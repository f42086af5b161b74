//! Problem files, metric files and initial-condition lists.
//!
//! A problem file is TOML with an `[algebra]` and a `[metric]` section:
//!
//! ```toml
//! [algebra]
//! family = "h"
//! lambda = 0.5
//!
//! [metric]
//! normal_form = "Q5"
//! param = -0.25
//! ```
//!
//! `family` is one of `h` (with `lambda`), `psh` or `e` (with `mu`); a custom
//! algebra is given instead as `custom = [[[..]]]`, the tensor `c[k][i][j]`.
//! The metric is either `matrix = [[..], [..], [..]]` or a normal form with
//! an optional `param`. An optional `[options]` section sets `horizon`,
//! `seed` and `samples` for the corroborating integrations.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::algebra::{make_lie_algebra, standard_family, FamilyId, LieAlgebra3};
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Tensor3, Vec3};
use crate::metric::BilinearForm;
use crate::normal_form::{normal_form_form, NormalFormTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgebraSpec {
    H { lambda: f64 },
    Psh,
    E { mu: f64 },
    Custom { c: Tensor3 },
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<LieAlgebra3> {
        match self {
            AlgebraSpec::H { lambda } => standard_family(FamilyId::H(*lambda)),
            AlgebraSpec::Psh => standard_family(FamilyId::Psh),
            AlgebraSpec::E { mu } => standard_family(FamilyId::E(*mu)),
            AlgebraSpec::Custom { c } => make_lie_algebra(*c),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            AlgebraSpec::H { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricSpec {
    Matrix(Mat3),
    NormalForm { tag: NormalFormTag, param: Option<f64> },
}

impl MetricSpec {
    pub fn build(&self) -> Result<BilinearForm> {
        match self {
            MetricSpec::Matrix(m) => BilinearForm::new(*m),
            MetricSpec::NormalForm { tag, param } => normal_form_form(*tag, *param),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProblemOptions {
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub algebra: AlgebraSpec,
    pub metric: MetricSpec,
    pub options: ProblemOptions,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn number(v: &Value, what: &str) -> Result<f64> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        _ => return Err(err(format!("{what} must be a number"))),
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(format!("{what} must be finite")))
    }
}

fn array<'a>(v: &'a Value, len: usize, what: &str) -> Result<&'a Vec<Value>> {
    match v {
        Value::Array(a) if a.len() == len => Ok(a),
        _ => Err(err(format!("{what} must be an array of length {len}"))),
    }
}

fn vec3(v: &Value, what: &str) -> Result<Vec3> {
    let a = array(v, 3, what)?;
    Ok([number(&a[0], what)?, number(&a[1], what)?, number(&a[2], what)?])
}

fn mat3(v: &Value, what: &str) -> Result<Mat3> {
    let a = array(v, 3, what)?;
    Ok([vec3(&a[0], what)?, vec3(&a[1], what)?, vec3(&a[2], what)?])
}

fn tensor3(v: &Value, what: &str) -> Result<Tensor3> {
    let a = array(v, 3, what)?;
    Ok([mat3(&a[0], what)?, mat3(&a[1], what)?, mat3(&a[2], what)?])
}

fn reject_unknown(t: &Table, allowed: &[&str], section: &str) -> Result<()> {
    match t.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(format!("unknown key `{k}` in {section}"))),
        None => Ok(()),
    }
}

fn section<'a>(doc: &'a Table, name: &str) -> Result<&'a Table> {
    match doc.get(name) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(err(format!("`{name}` must be a table"))),
        None => Err(err(format!("missing [{name}] section"))),
    }
}

fn algebra_from(t: &Table) -> Result<AlgebraSpec> {
    reject_unknown(t, &["family", "lambda", "mu", "custom"], "[algebra]")?;
    if let Some(c) = t.get("custom") {
        if t.contains_key("family") {
            return Err(err("[algebra] takes either `family` or `custom`, not both"));
        }
        return Ok(AlgebraSpec::Custom {
            c: tensor3(c, "algebra.custom")?,
        });
    }
    let family = match t.get("family") {
        Some(Value::String(s)) => s.to_ascii_lowercase(),
        Some(_) => return Err(err("algebra.family must be a string")),
        None => return Err(err("[algebra] needs `family` or `custom`")),
    };
    let param = |key: &str| -> Result<f64> {
        number(t.get(key).ok_or_else(|| err(format!("family `{family}` needs `{key}`")))?, key)
    };
    let extra = |key: &str| -> Result<()> {
        if t.contains_key(key) {
            Err(err(format!("family `{family}` takes no `{key}`")))
        } else {
            Ok(())
        }
    };
    match family.as_str() {
        "h" => {
            extra("mu")?;
            Ok(AlgebraSpec::H { lambda: param("lambda")? })
        }
        "psh" => {
            extra("lambda")?;
            extra("mu")?;
            Ok(AlgebraSpec::Psh)
        }
        "e" => {
            extra("lambda")?;
            Ok(AlgebraSpec::E { mu: param("mu")? })
        }
        other => Err(err(format!("unknown family `{other}` (expected h, psh or e)"))),
    }
}

fn metric_from(t: &Table) -> Result<MetricSpec> {
    reject_unknown(t, &["matrix", "normal_form", "param"], "[metric]")?;
    match (t.get("matrix"), t.get("normal_form")) {
        (Some(m), None) => {
            if t.contains_key("param") {
                return Err(err("metric.param only applies to a normal form"));
            }
            Ok(MetricSpec::Matrix(mat3(m, "metric.matrix")?))
        }
        (None, Some(Value::String(name))) => {
            let tag = NormalFormTag::parse(name)?;
            let param = t.get("param").map(|p| number(p, "metric.param")).transpose()?;
            Ok(MetricSpec::NormalForm { tag, param })
        }
        (None, Some(_)) => Err(err("metric.normal_form must be a string")),
        (Some(_), Some(_)) => Err(err("[metric] takes either `matrix` or `normal_form`, not both")),
        (None, None) => Err(err("[metric] needs `matrix` or `normal_form`")),
    }
}

fn options_from(t: &Table) -> Result<ProblemOptions> {
    reject_unknown(t, &["horizon", "seed", "samples"], "[options]")?;
    let horizon = t.get("horizon").map(|v| number(v, "options.horizon")).transpose()?;
    if horizon.is_some_and(|h| h <= 0.0) {
        return Err(err("options.horizon must be positive"));
    }
    let int = |key: &str| -> Result<Option<u64>> {
        match t.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(err(format!("options.{key} must be a non-negative integer"))),
        }
    };
    Ok(ProblemOptions {
        horizon,
        seed: int("seed")?,
        samples: int("samples")?.map(|n| n as usize),
    })
}

fn document(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| err(e.message().to_string()))
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let doc = document(text)?;
    reject_unknown(&doc, &["algebra", "metric", "options"], "problem file")?;
    Ok(Problem {
        algebra: algebra_from(section(&doc, "algebra")?)?,
        metric: metric_from(section(&doc, "metric")?)?,
        options: match doc.get("options") {
            Some(_) => options_from(section(&doc, "options")?)?,
            None => ProblemOptions::default(),
        },
    })
}

/// Parses the `[algebra]` section of a file; other sections are ignored.
pub fn parse_algebra(text: &str) -> Result<AlgebraSpec> {
    algebra_from(section(&document(text)?, "algebra")?)
}

/// Parses a metric file: either a `[metric]` section or the same keys at top level.
/// Other sections are ignored, so a full problem file is also a metric file.
pub fn parse_metric(text: &str) -> Result<MetricSpec> {
    let doc = document(text)?;
    match doc.get("metric") {
        Some(_) => metric_from(section(&doc, "metric")?),
        None => {
            let mut top = doc.clone();
            top.retain(|_, v| !v.is_table());
            metric_from(&top)
        }
    }
}

/// Parses `x,y,z` (commas and/or whitespace, optional surrounding brackets).
pub fn parse_vector(s: &str) -> Result<Vec3> {
    let body = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
    let parts: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != 3 {
        return Err(err(format!("expected 3 components, got {} in `{}`", parts.len(), s.trim())));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|_| err(format!("`{p}` is not a number")))?;
        if !slot.is_finite() {
            return Err(err(format!("`{p}` is not finite")));
        }
    }
    Ok(v)
}

/// One vector per line; blank lines and `#` comments are skipped.
pub fn parse_vector_list(text: &str) -> Result<Vec<Vec3>> {
    text.lines()
        .enumerate()
        .filter_map(|(n, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then(|| parse_vector(line).map_err(|e| err(format!("line {}: {e}", n + 1))))
        })
        .collect()
}
