//! CSV and JSON interchange.
//!
//! Floats are always written with 17 significant digits (`{:.16e}`), so
//! identical inputs give byte-identical files. CSV files carry a header row
//! and use LF line endings.

use std::io::{Read, Write};

use serde_json::Value;

use crate::cutoff::{ProfileKind, TVProfile, TimeDomain};
use crate::error::{Error, Result};
use crate::markov::{JumpPath, ProbVector};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Generic table writer: one header row, then rows of pre-formatted cells.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `index,value`.
pub fn write_prob_vector_csv<W: Write>(w: W, p: &ProbVector) -> Result<()> {
    write_table(
        w,
        &["index", "value"],
        p.as_slice().iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt_f64(*v)]),
    )
}

/// Columns `time,value`, plus `se` for Monte-Carlo profiles.
pub fn write_tv_profile_csv<W: Write>(w: W, profile: &TVProfile) -> Result<()> {
    let fmt_time = |t: f64| match profile.domain {
        TimeDomain::Steps => format!("{}", t as i64),
        TimeDomain::Continuous => fmt_f64(t),
    };
    match &profile.se {
        None => write_table(
            w,
            &["time", "value"],
            profile.times.iter().zip(&profile.values).map(|(t, v)| vec![fmt_time(*t), fmt_f64(*v)]),
        ),
        Some(se) => write_table(
            w,
            &["time", "value", "se"],
            profile
                .times
                .iter()
                .zip(&profile.values)
                .zip(se)
                .map(|((t, v), s)| vec![fmt_time(*t), fmt_f64(*v), fmt_f64(*s)]),
        ),
    }
}

/// Reads a profile written by [`write_tv_profile_csv`]. Integer-valued
/// time columns are read as step profiles.
pub fn read_tv_profile_csv<R: Read>(r: R, kind: ProfileKind) -> Result<TVProfile> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(r);
    let header = rdr.headers()?.clone();
    let has_se = match header.iter().collect::<Vec<_>>().as_slice() {
        ["time", "value"] => false,
        ["time", "value", "se"] => true,
        other => return Err(Error::Parse { line: 1, message: format!("unexpected header {other:?}") }),
    };
    let (mut times, mut values, mut se) = (Vec::new(), Vec::new(), Vec::new());
    let mut integral = true;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or(Error::Parse { line, message: format!("missing column {k}") })?
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, message: e.to_string() })
        };
        integral &= !rec.get(0).unwrap_or("").contains(['.', 'e', 'E']);
        times.push(field(0)?);
        values.push(field(1)?);
        if has_se {
            se.push(field(2)?);
        }
    }
    let domain = if integral { TimeDomain::Steps } else { TimeDomain::Continuous };
    TVProfile::new(times, values, kind, has_se.then_some(se), domain)
}

/// Something whose coordinates can be listed as CSV columns.
pub trait StateColumns {
    fn column_names() -> Vec<String>;
    fn columns(&self) -> Vec<String>;
}

impl StateColumns for usize {
    fn column_names() -> Vec<String> {
        vec!["state".into()]
    }
    fn columns(&self) -> Vec<String> {
        vec![self.to_string()]
    }
}

impl StateColumns for i64 {
    fn column_names() -> Vec<String> {
        vec!["state".into()]
    }
    fn columns(&self) -> Vec<String> {
        vec![self.to_string()]
    }
}

/// Columns `time` then the state components; one row for the start and one per jump.
pub fn write_jump_path_csv<W: Write, S: StateColumns + PartialEq>(w: W, path: &JumpPath<S>) -> Result<()> {
    let mut names = vec!["time".to_string()];
    names.extend(S::column_names());
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let starts = std::iter::once(0.0).chain(path.times.iter().copied());
    write_table(
        w,
        &header,
        starts.zip(&path.states).map(|(t, s)| {
            let mut row = vec![fmt_f64(t)];
            row.extend(s.columns());
            row
        }),
    )
}

/// Pretty JSON with every float in 17-significant-digit exponent form.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    write_json(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_json(value: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Number(num) => {
            if num.is_i64() || num.is_u64() {
                out.push_str(&num.to_string());
            } else {
                out.push_str(&fmt_f64(num.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(v, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(1.0 / 3.0).len(), "3.3333333333333331e-1".len());
    }

    #[test]
    fn prob_vector_csv() {
        let mut buf = Vec::new();
        write_prob_vector_csv(&mut buf, &ProbVector::new(vec![0.25, 0.75]).unwrap()).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "index,value\n0,2.5000000000000000e-1\n1,7.5000000000000000e-1\n");
    }

    #[test]
    fn profile_csv_round_trip() {
        let p = TVProfile::new(vec![0.0, 0.5, 1.5], vec![1.0, 0.4, 0.1], ProfileKind::McUpper, Some(vec![0.0, 0.01, 0.02]), TimeDomain::Continuous)
            .unwrap();
        let mut buf = Vec::new();
        write_tv_profile_csv(&mut buf, &p).unwrap();
        let back = read_tv_profile_csv(buf.as_slice(), ProfileKind::McUpper).unwrap();
        assert_eq!(back, p);

        let steps = TVProfile::exact_steps(vec![0.9, 0.5, 0.2]).unwrap();
        let mut buf = Vec::new();
        write_tv_profile_csv(&mut buf, &steps).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("time,value\n0,"));
        assert_eq!(read_tv_profile_csv(buf.as_slice(), ProfileKind::Exact).unwrap(), steps);
    }

    #[test]
    fn bad_profile_header() {
        let e = read_tv_profile_csv("t,v\n0,1\n".as_bytes(), ProfileKind::Exact);
        assert!(matches!(e, Err(Error::Parse { line: 1, .. })));
        let e = read_tv_profile_csv("time,value\n0,x\n".as_bytes(), ProfileKind::Exact);
        assert!(matches!(e, Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn jump_path_csv() {
        let path = JumpPath { times: vec![0.5], states: vec![3usize, 2], t_end: 1.0 };
        let mut buf = Vec::new();
        write_jump_path_csv(&mut buf, &path).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "time,state\n0.0000000000000000e0,3\n5.0000000000000000e-1,2\n");
    }

    #[test]
    fn json_floats() {
        let s = to_json_string(&json!({"bound": 0.25, "n": 3, "xs": [1.5], "ok": true}));
        assert!(s.contains("\"bound\": 2.5000000000000000e-1"));
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["bound"].as_f64(), Some(0.25));
    }
}
