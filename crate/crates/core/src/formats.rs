//! Text formats: point and label files, predictor specs, sweep specs and the
//! ground-truth record written by the synthetic generator.
//!
//! Parsers take the whole input as `&str` or bytes so they can be fuzzed
//! directly; file helpers are thin wrappers.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CenterSet, LabelAssignment, PointSet};
use crate::predictors::{AdversarialTarget, CorruptionMode};

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn syntax(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Syntax {
        what,
        reason: reason.into(),
    }
}

fn parse_finite(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

/// Parse a points CSV. A first row containing any non-numeric field is taken
/// as a header and skipped; every other row must hold the same number of
/// finite decimal values. Blank lines are ignored. Line numbers in errors
/// are 1-based.
pub fn parse_points_csv(input: &[u8]) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut d = 0usize;
    let mut values = Vec::new();
    let mut first = true;
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(parse_finite).collect();
        if first {
            first = false;
            if parsed.iter().any(Option::is_none) {
                continue;
            }
        }
        if d == 0 {
            d = parsed.len();
        } else if parsed.len() != d {
            return Err(parse_err(line, format!("expected {d} fields, found {}", parsed.len())));
        }
        for (col, (v, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match v {
                Some(x) if x.is_finite() => values.push(x),
                Some(_) => return Err(parse_err(line, format!("non-finite value in column {}", col + 1))),
                None => return Err(parse_err(line, format!("column {}: cannot parse {raw:?} as a number", col + 1))),
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyPoints);
    }
    PointSet::new(d, values)
}

/// Write one comma-separated row per point using the shortest decimal form
/// that parses back to the same double.
pub fn write_points_csv<W: Write>(mut out: W, points: &PointSet) -> io::Result<()> {
    write_rows(&mut out, points.rows())
}

pub fn write_centers_csv<W: Write>(mut out: W, centers: &CenterSet) -> io::Result<()> {
    write_rows(&mut out, centers.rows())
}

fn write_rows<'a, W: Write>(out: &mut W, rows: impl Iterator<Item = &'a [f64]>) -> io::Result<()> {
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// Parse a labels file: one integer per line, `-1` for an unlabeled point.
/// Blank lines are ignored. Labels are range-checked against `k` when given.
pub fn parse_labels(input: &str, k: Option<usize>) -> Result<LabelAssignment> {
    let mut labels = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let v: i64 = t
            .parse()
            .map_err(|_| parse_err(line, format!("cannot parse {t:?} as an integer label")))?;
        let label = match v {
            -1 => None,
            v if v >= 0 => {
                let v = v as usize;
                if let Some(k) = k {
                    if v >= k {
                        return Err(parse_err(line, format!("label {v} out of range for k={k}")));
                    }
                }
                Some(v)
            }
            v => return Err(parse_err(line, format!("negative label {v}; only -1 marks unlabeled"))),
        };
        labels.push(label);
    }
    Ok(LabelAssignment::new(labels))
}

pub fn write_labels<W: Write>(mut out: W, labels: &LabelAssignment) -> io::Result<()> {
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels.as_slice() {
        match l {
            Some(v) => s.push_str(&v.to_string()),
            None => s.push_str("-1"),
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    out.flush()
}

/// Where a predictor's base labeling comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictorBase {
    /// The labels file passed separately on the command line.
    LabelsArg,
    File(String),
    Nearest { points: String, labels: String },
    KMeansPP { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorExpr {
    pub base: PredictorBase,
    /// Corruption mode and rate; `None` leaves the base labels untouched.
    pub corruption: Option<(CorruptionMode, f64)>,
}

/// Parse `BASE[+MODE:RATE]` where `BASE` is `file:PATH`,
/// `nn:REF_POINTS:REF_LABELS` or `kmeanspp:SEED`, and `MODE` is `uniform`,
/// `adversarial` or `deletion`. A bare `MODE:RATE` corrupts the separately
/// supplied labels. Paths may not contain `+` or `:`.
pub fn parse_predictor(spec: &str) -> Result<PredictorExpr> {
    const WHAT: &str = "predictor spec";
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(syntax(WHAT, "empty"));
    }
    let (base_str, suffix) = match spec.split_once('+') {
        Some((b, s)) => (b, Some(s)),
        None => (spec, None),
    };
    let mut corruption = suffix.map(parse_corruption).transpose()?;
    let base = match base_str.split(':').collect::<Vec<_>>().as_slice() {
        ["labels"] => PredictorBase::LabelsArg,
        ["file", path] if !path.is_empty() => PredictorBase::File(path.to_string()),
        ["nn", p, l] if !p.is_empty() && !l.is_empty() => PredictorBase::Nearest {
            points: p.to_string(),
            labels: l.to_string(),
        },
        ["kmeanspp", seed] => PredictorBase::KMeansPP {
            seed: seed
                .parse()
                .map_err(|_| syntax(WHAT, format!("bad kmeanspp seed {seed:?}")))?,
        },
        [mode, _] if suffix.is_none() && is_mode(mode) => {
            corruption = Some(parse_corruption(base_str)?);
            PredictorBase::LabelsArg
        }
        _ => return Err(syntax(WHAT, format!("unrecognized base {base_str:?}"))),
    };
    Ok(PredictorExpr { base, corruption })
}

fn is_mode(s: &str) -> bool {
    matches!(s, "uniform" | "adversarial" | "deletion")
}

fn parse_corruption(s: &str) -> Result<(CorruptionMode, f64)> {
    const WHAT: &str = "corruption suffix";
    let (mode, rate) = s
        .split_once(':')
        .ok_or_else(|| syntax(WHAT, format!("expected MODE:RATE, got {s:?}")))?;
    let mode = match mode {
        "uniform" => CorruptionMode::Uniform,
        "adversarial" => CorruptionMode::Adversarial(AdversarialTarget::FarthestCenter),
        "deletion" => CorruptionMode::Deletion,
        other => return Err(syntax(WHAT, format!("unknown mode {other:?}"))),
    };
    let rate: f64 = rate
        .parse()
        .map_err(|_| syntax(WHAT, format!("bad rate {rate:?}")))?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(syntax(WHAT, format!("rate {rate} outside [0, 1]")));
    }
    Ok((mode, rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Corruption rate.
    Lambda,
    /// Sampling fraction of the random-sampling baseline.
    Q,
    Alpha,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Q => "q",
            SweepParam::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

const MAX_SWEEP_POINTS: usize = 100_000;

/// Parse `NAME=START:STEP:END` (inclusive, up to rounding) or
/// `NAME=V1,V2,...`. An empty value list is allowed.
pub fn parse_sweep(spec: &str) -> Result<Sweep> {
    const WHAT: &str = "sweep spec";
    let (name, body) = spec
        .trim()
        .split_once('=')
        .ok_or_else(|| syntax(WHAT, "expected NAME=VALUES"))?;
    let param = match name.trim() {
        "lambda" => SweepParam::Lambda,
        "q" => SweepParam::Q,
        "alpha" => SweepParam::Alpha,
        other => return Err(syntax(WHAT, format!("unknown parameter {other:?}"))),
    };
    let body = body.trim();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| syntax(WHAT, format!("bad number {s:?}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(syntax(WHAT, "values must be finite"))
        }
    };
    let values = if body.is_empty() {
        Vec::new()
    } else if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        let [a, s, b] = parts.as_slice() else {
            return Err(syntax(WHAT, "range must be START:STEP:END"));
        };
        let (a, s, b) = (num(a)?, num(s)?, num(b)?);
        if s <= 0.0 || b < a {
            return Err(syntax(WHAT, "range needs STEP > 0 and END >= START"));
        }
        let count = ((b - a) / s + 1e-9).floor() + 1.0;
        if count > MAX_SWEEP_POINTS as f64 {
            return Err(syntax(WHAT, format!("more than {MAX_SWEEP_POINTS} points")));
        }
        // Snap to 12 decimals so 0:0.05:1 yields 0.15 rather than 0.15000000000000002.
        (0..count as usize)
            .map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12)
            .collect()
    } else {
        body.split(',').map(num).collect::<Result<_>>()?
    };
    Ok(Sweep { param, values })
}

/// Ground truth emitted next to a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub scale: f64,
    pub optimal_cost: f64,
    pub centers: CenterSet,
}

pub fn parse_ground_truth(input: &str) -> Result<GroundTruth> {
    let gt: GroundTruth = serde_json::from_str(input).map_err(|e| parse_err(e.line(), e.to_string()))?;
    if gt.centers.k() != gt.k || gt.centers.d() != gt.d {
        return Err(syntax("ground truth", "center matrix shape disagrees with k and d"));
    }
    if !(gt.optimal_cost.is_finite() && gt.optimal_cost >= 0.0) {
        return Err(syntax("ground truth", "optimal_cost must be finite and non-negative"));
    }
    Ok(gt)
}
