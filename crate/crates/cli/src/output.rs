//! Rendering of results as text, JSON and CSV.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use bellbench::lhv::DeterministicStrategy;
use bellbench::model::{AngleConfig, Axis, JointDistribution, Outcome};
use bellbench::{InequalityReport, Source};
use serde_json::{json, Map, Number, Value};

use crate::args::Format;
use crate::table_io::format_float;

/// One command's result in every output format.
#[derive(Debug, Default)]
pub struct Rendered {
    pub text: String,
    pub json: Value,
    /// Header row followed by records.
    pub csv: Vec<Vec<String>>,
}

impl Rendered {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Text => out.write_all(self.text.as_bytes()),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(out);
                for row in &self.csv {
                    writer.write_record(row)?;
                }
                writer.flush()
            }
        }
    }
}

/// 17 significant digits; non-finite values become strings.
pub fn jnum(x: f64) -> Value {
    let text = format_float(x);
    match Number::from_str(&text) {
        Ok(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(text),
    }
}

pub fn num(x: f64) -> String {
    format_float(x)
}

pub fn report_json(r: &InequalityReport) -> Value {
    json!({
        "inequality": r.id.name(),
        "value": jnum(r.value),
        "bound": jnum(r.bound),
        "direction": r.direction.symbol(),
        "violated": r.violated,
        "margin": jnum(r.margin),
        "std_error": r.std_error.map_or(Value::Null, jnum),
    })
}

pub fn report_line(r: &InequalityReport) -> String {
    let mut line = format!(
        "{:<10} value {}  bound {} {}  {}  margin {}",
        r.id.name(),
        num(r.value),
        r.direction.symbol(),
        num(r.bound),
        if r.violated { "VIOLATED" } else { "holds" },
        num(r.margin),
    );
    if let Some(se) = r.std_error {
        let _ = write!(line, "  std_error {}", num(se));
    }
    line
}

pub const REPORT_HEADER: [&str; 7] =
    ["inequality", "value", "bound", "direction", "violated", "margin", "std_error"];

pub fn report_row(r: &InequalityReport) -> Vec<String> {
    vec![
        r.id.name().to_string(),
        num(r.value),
        num(r.bound),
        r.direction.symbol().to_string(),
        r.violated.to_string(),
        num(r.margin),
        r.std_error.map_or_else(String::new, num),
    ]
}

pub fn reports_csv(reports: &[InequalityReport]) -> Vec<Vec<String>> {
    let mut rows = vec![REPORT_HEADER.map(String::from).to_vec()];
    rows.extend(reports.iter().map(report_row));
    rows
}

pub fn dist_json(d: &JointDistribution) -> Value {
    Value::Array(
        d.entries()
            .iter()
            .map(|row| Value::Array(row.iter().map(|&p| jnum(p)).collect()))
            .collect(),
    )
}

pub fn dist_text(d: &JointDistribution) -> String {
    let mut parts = Vec::new();
    for o1 in Outcome::ALL {
        for o2 in Outcome::ALL {
            parts.push(format!("p{o1}{o2}={}", num(d.get(o1, o2))));
        }
    }
    parts.join(" ")
}

pub fn angles_json(config: &AngleConfig) -> Value {
    let mut map = Map::new();
    for axis in Axis::CLI_ORDER {
        map.insert(axis_key(axis).to_string(), jnum(config.angle(axis)));
    }
    Value::Object(map)
}

pub fn axis_key(axis: Axis) -> &'static str {
    match axis {
        Axis::A => "a",
        Axis::B => "b",
        Axis::APrime => "a_prime",
        Axis::BPrime => "b_prime",
        Axis::R => "r",
    }
}

pub fn angles_text(config: &AngleConfig) -> String {
    Axis::CLI_ORDER
        .iter()
        .map(|&axis| format!("{axis}={}", num(config.angle(axis))))
        .collect::<Vec<_>>()
        .join(" ")
}

pub const DIFFERENCE_LABELS: [&str; 4] = ["a-b", "b'-a", "b-a'", "a'-b'"];

pub fn differences_json(config: &AngleConfig) -> Value {
    Value::Array(config.canonical_differences().iter().map(|&d| jnum(d)).collect())
}

pub fn differences_text(config: &AngleConfig) -> String {
    DIFFERENCE_LABELS
        .iter()
        .zip(config.canonical_differences())
        .map(|(label, d)| format!("{label}={}", num(d)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn source_json(source: &Source) -> Value {
    match source {
        Source::Ideal => json!({"kind": "ideal"}),
        Source::Real(p) => json!({
            "kind": "real",
            "eta": jnum(p.eta()),
            "phi_deg": jnum(p.phi_deg()),
            "f_override": p.f_override().map_or(Value::Null, jnum),
            "depolarization": jnum(p.depolarization()),
            "angular_correlation": jnum(p.angular_correlation()),
            "single": jnum(p.single()),
        }),
    }
}

pub fn source_text(source: &Source) -> String {
    match source {
        Source::Ideal => "ideal".to_string(),
        Source::Real(p) => format!(
            "real eta={} phi={} F={} g={} single={}",
            num(p.eta()),
            num(p.phi_deg()),
            num(p.depolarization()),
            num(p.angular_correlation()),
            num(p.single())
        ),
    }
}

/// `a=+ a'=0 r=- | b=+ b'=- r=+`.
pub fn strategy_text(s: &DeterministicStrategy) -> String {
    let side = |labels: [&str; 3], outcomes: [Outcome; 3]| {
        labels
            .iter()
            .zip(outcomes)
            .map(|(l, o)| format!("{l}={o}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "{} | {}",
        side(["a", "a'", "r"], s.first),
        side(["b", "b'", "r"], s.second)
    )
}

pub fn strategy_json(s: &DeterministicStrategy) -> Value {
    let side = |labels: [&str; 3], outcomes: [Outcome; 3]| {
        let mut map = Map::new();
        for (l, o) in labels.iter().zip(outcomes) {
            map.insert(l.to_string(), Value::String(o.symbol().to_string()));
        }
        Value::Object(map)
    };
    json!({
        "first": side(["a", "a_prime", "r"], s.first),
        "second": side(["b", "b_prime", "r"], s.second),
    })
}
