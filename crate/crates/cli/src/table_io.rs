//! CSV exchange format for per-setting tables.
//!
//! One row per outcome pair, header `setting,o1,o2,count_or_prob`. Outcomes
//! are written `+`, `-` or `0`. A file holds counts when every value is a
//! bare non-negative integer and probabilities otherwise; probabilities are
//! written with 17 significant digits so they survive a round trip.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use bellbench::model::{CountTable, JointDistribution, Outcome, Setting, SettingsTable};
use thiserror::Error;

pub const HEADER: [&str; 4] = ["setting", "o1", "o2", "count_or_prob"];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] bellbench::Error),
}

/// Contents of a table file.
#[derive(Clone, Debug, PartialEq)]
pub enum TableFile {
    Counts(BTreeMap<Setting, CountTable>),
    Probabilities(SettingsTable),
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn write_counts<W: Write>(out: W, counts: &BTreeMap<Setting, CountTable>) -> Result<(), TableError> {
    write_rows(out, counts.iter().map(|(s, c)| (*s, c.entries().map(|row| row.map(|n| n.to_string())))))
}

pub fn write_probabilities<W: Write>(out: W, table: &SettingsTable) -> Result<(), TableError> {
    write_rows(out, table.iter().map(|(s, d)| (s, d.entries().map(|row| row.map(format_float)))))
}

fn write_rows<W: Write>(
    out: W,
    rows: impl Iterator<Item = (Setting, [[String; 3]; 3])>,
) -> Result<(), TableError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for (setting, values) in rows {
        for o1 in Outcome::ALL {
            for o2 in Outcome::ALL {
                writer.write_record([
                    setting.label(),
                    o1.symbol(),
                    o2.symbol(),
                    &values[o1.index()][o2.index()],
                ])?;
            }
        }
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<TableFile, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(TableError::Format(format!(
            "expected header `{}`, found `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut raw: BTreeMap<Setting, [[Option<String>; 3]; 3]> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| TableError::Row { line, message };
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", record.len())));
        }
        let setting: Setting = record[0].parse().map_err(|e: bellbench::Error| bad(e.to_string()))?;
        let o1: Outcome = record[1].parse().map_err(|e: bellbench::Error| bad(e.to_string()))?;
        let o2: Outcome = record[2].parse().map_err(|e: bellbench::Error| bad(e.to_string()))?;
        let slot = &mut raw.entry(setting).or_default()[o1.index()][o2.index()];
        if slot.is_some() {
            return Err(bad(format!("duplicate entry {setting} {o1} {o2}")));
        }
        *slot = Some(record[3].to_string());
    }
    if raw.is_empty() {
        return Err(TableError::Format("no rows".into()));
    }

    let mut complete = BTreeMap::new();
    for (setting, grid) in raw {
        let mut values: [[String; 3]; 3] = Default::default();
        for o1 in Outcome::ALL {
            for o2 in Outcome::ALL {
                values[o1.index()][o2.index()] = grid[o1.index()][o2.index()]
                    .clone()
                    .ok_or_else(|| TableError::Format(format!("setting {setting} has no entry {o1} {o2}")))?;
            }
        }
        complete.insert(setting, values);
    }

    let is_count = |v: &String| !v.is_empty() && v.bytes().all(|b| b.is_ascii_digit());
    if complete.values().flatten().flatten().all(is_count) {
        let mut counts = BTreeMap::new();
        for (setting, values) in complete {
            let mut n = [[0u64; 3]; 3];
            for (row, text_row) in n.iter_mut().zip(values.iter()) {
                for (value, text) in row.iter_mut().zip(text_row) {
                    *value = text
                        .parse()
                        .map_err(|_| TableError::Format(format!("count `{text}` out of range")))?;
                }
            }
            let table = CountTable::new(n);
            if table.total_pairs() == 0 {
                return Err(TableError::Format(format!("setting {setting} has no pairs")));
            }
            counts.insert(setting, table);
        }
        return Ok(TableFile::Counts(counts));
    }

    let mut table = SettingsTable::new();
    for (setting, values) in complete {
        let mut p = [[0.0; 3]; 3];
        for (row, text_row) in p.iter_mut().zip(values.iter()) {
            for (value, text) in row.iter_mut().zip(text_row) {
                *value = text
                    .parse()
                    .map_err(|_| TableError::Format(format!("`{text}` is not a number")))?;
            }
        }
        table.insert(setting, JointDistribution::new(p)?);
    }
    Ok(TableFile::Probabilities(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellbench::model::AngleConfig;
    use bellbench::Source;

    #[test]
    fn counts_round_trip() {
        let mut counts = BTreeMap::new();
        counts.insert(Setting::AB, CountTable::new([[1, 2, 3], [4, 5, 6], [7, 8, 9]]));
        counts.insert(Setting::RR, CountTable::new([[0, 0, 0], [0, 1, 0], [0, 0, 0]]));
        let mut buffer = Vec::new();
        write_counts(&mut buffer, &counts).unwrap();
        assert_eq!(read_table(buffer.as_slice()).unwrap(), TableFile::Counts(counts));
    }

    #[test]
    fn probabilities_round_trip_exactly() {
        let config = AngleConfig::from_cli_order([3.0, 17.0, 41.0, 77.0, 101.0]).unwrap();
        let table = Source::Ideal.settings_table(&config, &Setting::ALL).unwrap();
        let mut buffer = Vec::new();
        write_probabilities(&mut buffer, &table).unwrap();
        assert_eq!(read_table(buffer.as_slice()).unwrap(), TableFile::Probabilities(table));
    }

    #[test]
    fn rejects_malformed_files() {
        let cases = [
            "setting,o1,o2,value\n",
            "setting,o1,o2,count_or_prob\n",
            "setting,o1,o2,count_or_prob\na:b,+,+,1\n",
            "setting,o1,o2,count_or_prob\nx:y,+,+,1\n",
            "setting,o1,o2,count_or_prob\na:b,+,*,1\n",
        ];
        for case in cases {
            assert!(read_table(case.as_bytes()).is_err(), "{case}");
        }
        let mut duplicate = String::from("setting,o1,o2,count_or_prob\n");
        for o1 in ["+", "-", "0"] {
            for o2 in ["+", "-", "0"] {
                duplicate.push_str(&format!("a:b,{o1},{o2},1\n"));
            }
        }
        duplicate.push_str("a:b,+,+,1\n");
        assert!(read_table(duplicate.as_bytes()).is_err());
    }

    #[test]
    fn float_formatting_keeps_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let text = format_float(x);
        assert_eq!(text, "3.0000000000000004e-1");
        assert_eq!(text.parse::<f64>().unwrap(), x);
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }
}
