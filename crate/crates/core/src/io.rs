//! Small helpers shared by the CSV readers and writers in this crate.
//!
//! File conventions: metadata travels in leading comment lines starting with
//! `#`, written as `# key=value [key=value ...]`; the first non-comment line
//! is the column header. Floats are written with Rust's shortest
//! round-trip formatting, and missing values are spelled `NaN`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Format a float so that parsing it back reproduces the same bits.
/// `NaN` marks missing values.
pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

pub(crate) fn parse_f64(s: &str, what: &'static str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        what,
        detail: format!("{s:?} is not a number"),
    })
}

pub(crate) fn parse_usize(s: &str, what: &'static str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Parse {
        what,
        detail: format!("{s:?} is not a non-negative integer"),
    })
}

/// Write one `# key=value ...` metadata comment line.
pub(crate) fn write_meta_line(w: &mut impl Write, pairs: &[(&str, String)]) -> Result<()> {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(w, "# {}", body.join(" "))?;
    Ok(())
}

/// Parsed contents of a CSV-like file: the `key=value` pairs collected from
/// all leading `#` comment lines, the header fields, and the data rows.
pub(crate) type CsvContents = (HashMap<String, String>, Vec<String>, Vec<Vec<String>>);

/// Read a CSV-like file into its metadata, header, and rows.
pub(crate) fn read_csv_lines(r: impl BufRead, what: &'static str) -> Result<CsvContents> {
    let mut meta = HashMap::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some((k, v)) = token.split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();
        match header {
            None => header = Some(fields),
            Some(_) => rows.push(fields),
        }
    }
    let header = header.ok_or(Error::Parse {
        what,
        detail: "file has no header line".to_string(),
    })?;
    Ok((meta, header, rows))
}

pub(crate) fn meta_value<'a>(
    meta: &'a HashMap<String, String>,
    key: &str,
    what: &'static str,
) -> Result<&'a str> {
    meta.get(key).map(String::as_str).ok_or(Error::Parse {
        what,
        detail: format!("missing metadata key {key:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::INFINITY, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert!(parse_f64("NaN", "test").unwrap().is_nan());
        assert!(parse_f64("abc", "test").is_err());
    }

    #[test]
    fn comment_metadata_round_trip() {
        let mut buf = Vec::new();
        write_meta_line(
            &mut buf,
            &[("kernel", "gaussian".into()), ("gamma", "0.5".into())],
        )
        .unwrap();
        buf.extend_from_slice(b"a,b\n1,2\n3,4\n");
        let (meta, header, rows) = read_csv_lines(Cursor::new(buf), "test").unwrap();
        assert_eq!(meta["kernel"], "gaussian");
        assert_eq!(meta["gamma"], "0.5");
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(rows, vec![vec!["1", "2"], vec!["3", "4"]]);
    }

    #[test]
    fn missing_header_is_an_error() {
        let r = Cursor::new(b"# only=comments\n".to_vec());
        assert!(read_csv_lines(r, "test").is_err());
    }
}
