//! CSV writers and parsers for the three artifact schemas.
//!
//! Floats are written with the shortest representation that parses back to
//! the identical value, so `parse(write(rows)) == rows` holds exactly.
//! Lines end in LF.

use linstroke::dynamics::{Sample, Trajectory};
use linstroke::optimizer::{IterationRecord, StepRule, SweepRow};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("line {line}: expected {expected} fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: bad value `{value}` for column `{column}`")]
    BadValue {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("missing or wrong header: expected `{0}`")]
    Header(&'static str),
}

pub const TRAJECTORY_HEADER: &str = "t,x,v,a";
pub const TRACE_HEADER: &str = "j,lambda,x_max,p,s,J,rule,clamped";
pub const SWEEP_HEADER: &str = "lambda,x_max,J";

pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &trajectory.samples {
        out.push_str(&format!("{},{},{},{}\n", s.t, s.x, s.v, s.a));
    }
    out
}

pub fn trace_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.j,
            r.lambda,
            r.x_max,
            r.p,
            r.s,
            r.j_value,
            r.rule.as_str(),
            r.clamped
        ));
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.lambda, r.x_max, r.j_value));
    }
    out
}

struct RowReader<'a> {
    line: usize,
    fields: Vec<&'a str>,
    cursor: usize,
}

impl<'a> RowReader<'a> {
    fn new(line: usize, raw: &'a str, expected: usize) -> Result<Self, CsvError> {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != expected {
            return Err(CsvError::FieldCount {
                line,
                expected,
                got: fields.len(),
            });
        }
        Ok(Self {
            line,
            fields,
            cursor: 0,
        })
    }

    fn next_raw(&mut self) -> &'a str {
        let v = self.fields[self.cursor];
        self.cursor += 1;
        v
    }

    fn f64(&mut self, column: &'static str) -> Result<f64, CsvError> {
        let raw = self.next_raw();
        raw.parse().map_err(|_| CsvError::BadValue {
            line: self.line,
            column,
            value: raw.to_string(),
        })
    }

    fn usize(&mut self, column: &'static str) -> Result<usize, CsvError> {
        let raw = self.next_raw();
        raw.parse().map_err(|_| CsvError::BadValue {
            line: self.line,
            column,
            value: raw.to_string(),
        })
    }
}

fn data_lines<'a>(text: &'a str, header: &'static str) -> Result<Vec<(usize, &'a str)>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == header => {}
        _ => return Err(CsvError::Header(header)),
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory, CsvError> {
    let mut samples = Vec::new();
    for (line, raw) in data_lines(text, TRAJECTORY_HEADER)? {
        let mut row = RowReader::new(line, raw, 4)?;
        samples.push(Sample {
            t: row.f64("t")?,
            x: row.f64("x")?,
            v: row.f64("v")?,
            a: row.f64("a")?,
        });
    }
    Ok(Trajectory { samples })
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<IterationRecord>, CsvError> {
    let mut records = Vec::new();
    for (line, raw) in data_lines(text, TRACE_HEADER)? {
        let mut row = RowReader::new(line, raw, 8)?;
        let j = row.usize("j")?;
        let lambda = row.f64("lambda")?;
        let x_max = row.f64("x_max")?;
        let p = {
            let raw_p = row.next_raw();
            match raw_p {
                "1" => 1,
                "-1" => -1,
                _ => {
                    return Err(CsvError::BadValue {
                        line,
                        column: "p",
                        value: raw_p.to_string(),
                    })
                }
            }
        };
        let s = row.f64("s")?;
        let j_value = row.f64("J")?;
        let rule = {
            let raw_rule = row.next_raw();
            match raw_rule {
                "contracted" => StepRule::Contracted,
                "held" => StepRule::Held,
                _ => {
                    return Err(CsvError::BadValue {
                        line,
                        column: "rule",
                        value: raw_rule.to_string(),
                    })
                }
            }
        };
        let clamped = {
            let raw_c = row.next_raw();
            match raw_c {
                "true" => true,
                "false" => false,
                _ => {
                    return Err(CsvError::BadValue {
                        line,
                        column: "clamped",
                        value: raw_c.to_string(),
                    })
                }
            }
        };
        records.push(IterationRecord {
            j,
            lambda,
            x_max,
            p,
            s,
            j_value,
            rule,
            clamped,
        });
    }
    Ok(records)
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, CsvError> {
    let mut rows = Vec::new();
    for (line, raw) in data_lines(text, SWEEP_HEADER)? {
        let mut row = RowReader::new(line, raw, 3)?;
        rows.push(SweepRow {
            lambda: row.f64("lambda")?,
            x_max: row.f64("x_max")?,
            j_value: row.f64("J")?,
        });
    }
    Ok(rows)
}
