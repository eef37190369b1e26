//! Text file formats shared with the CLI.
//!
//! - Prediction-array file: line 1 is `t m k`; then `t` lines of `m`
//!   space-separated integers in `[0, k)`.
//! - Truth file: `m` integers, on one line or one per line.
//! - Out-of-bag mask file: `t` lines of `m` characters `0`/`1`.
//! - Model spec: JSON `{k, pi, mu: [{family, params}]}`.
//! - Dataset CSV: header row, last column is the integer class label.
//!
//! All text is UTF-8 with LF newlines. Parse errors name the line and column
//! of the offending token.

use serde::Serialize;

use crate::ensemble::{Label, OobMask, PredictionArray, TruthLabels};
use crate::error::{CoreError, Result};
use crate::firstorder::FirstOrderModel;
use crate::trainer::Dataset;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens of a line with their 1-based character
/// columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices().chain([(line.len(), ' ')]) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn parse_int<T: std::str::FromStr>(line_no: usize, col: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line_no, col, format!("invalid {what}: `{token}`")))
}

/// Parses a prediction-array file.
pub fn parse_prediction_array(text: &str) -> Result<PredictionArray> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "missing `t m k` header line"))?;
    let head = tokens(header);
    if head.len() != 3 {
        return Err(parse_err(1, 1, format!("header must be `t m k`, got {} fields", head.len())));
    }
    let t: usize = parse_int(1, head[0].0, head[0].1, "t")?;
    let m: usize = parse_int(1, head[1].0, head[1].1, "m")?;
    let k: u32 = parse_int(1, head[2].0, head[2].1, "k")?;

    let mut cells = Vec::with_capacity(t * m);
    let mut rows = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        rows += 1;
        if rows > t {
            return Err(parse_err(line_no, toks[0].0, format!("expected {t} rows, found more")));
        }
        if toks.len() != m {
            return Err(parse_err(
                line_no,
                toks[0].0,
                format!("expected {m} labels per row, got {}", toks.len()),
            ));
        }
        for (col, tok) in toks {
            let v: u32 = parse_int(line_no, col, tok, "label")?;
            if v >= k {
                return Err(parse_err(line_no, col, format!("label {v} out of range for k={k}")));
            }
            cells.push(Label(v));
        }
    }
    if rows != t {
        return Err(parse_err(rows + 1, 1, format!("expected {t} rows, got {rows}")));
    }
    PredictionArray::new(t, m, k, cells)
}

/// Serializes a prediction array in the file format.
pub fn write_prediction_array(array: &PredictionArray) -> String {
    let mut out = format!("{} {} {}\n", array.t(), array.m(), array.k());
    for i in 0..array.t() {
        let row: Vec<String> = array.row(i).iter().map(|l| l.0.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a truth file of `m` integers (any whitespace layout).
pub fn parse_truth(text: &str) -> Result<TruthLabels> {
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        for (col, tok) in tokens(line) {
            let v: u32 = parse_int(idx + 1, col, tok, "truth label")?;
            labels.push(Label(v));
        }
    }
    if labels.is_empty() {
        return Err(parse_err(1, 1, "truth file contains no labels"));
    }
    Ok(TruthLabels(labels))
}

/// Serializes truth labels, one per line.
pub fn write_truth(truth: &TruthLabels) -> String {
    let mut out = String::new();
    for l in &truth.0 {
        out.push_str(&l.0.to_string());
        out.push('\n');
    }
    out
}

/// Parses an out-of-bag mask file: `t` lines of `0`/`1` characters.
pub fn parse_mask(text: &str) -> Result<OobMask> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(line.len());
        for (col, ch) in line.chars().enumerate() {
            match ch {
                '0' => row.push(false),
                '1' => row.push(true),
                _ => {
                    return Err(parse_err(
                        idx + 1,
                        col + 1,
                        format!("mask character must be 0 or 1, got `{ch}`"),
                    ))
                }
            }
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    idx + 1,
                    1,
                    format!("mask row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "mask file contains no rows"));
    }
    OobMask::from_rows(&rows)
}

/// Serializes an out-of-bag mask in the file format.
pub fn write_mask(mask: &OobMask) -> String {
    let mut out = String::new();
    for i in 0..mask.t() {
        for &b in mask.row(i) {
            out.push(if b { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Parses and validates a model spec JSON document.
pub fn parse_model_spec(text: &str) -> Result<FirstOrderModel> {
    let model: FirstOrderModel = serde_json::from_str(text)
        .map_err(|e| parse_err(e.line(), e.column(), format!("model spec: {e}")))?;
    model.validate()?;
    Ok(model)
}

/// Parses a dataset CSV: header row, every feature column numeric, last
/// column an integer class label. The class count is one more than the
/// largest label (at least 2).
pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| parse_err(1, 1, format!("csv header: {e}")))?
        .len();
    if width < 2 {
        return Err(parse_err(1, 1, "dataset needs at least one feature column and a label column"));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut max_label = 0u32;
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2; // header is line 1
        let record = record.map_err(|e| parse_err(line_no, 1, format!("csv record: {e}")))?;
        if record.len() != width {
            return Err(parse_err(
                line_no,
                1,
                format!("row has {} fields, header has {width}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(width - 1);
        for (col, field) in record.iter().take(width - 1).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line_no, col + 1, format!("invalid feature value `{field}`")))?;
            row.push(v);
        }
        let label_field = &record[width - 1];
        let label: u32 = label_field.parse().map_err(|_| {
            parse_err(line_no, width, format!("label column must be a nonnegative integer, got `{label_field}`"))
        })?;
        max_label = max_label.max(label);
        features.push(row);
        labels.push(Label(label));
    }
    if features.is_empty() {
        return Err(parse_err(2, 1, "dataset contains no data rows"));
    }
    Dataset::new(features, labels, (max_label + 1).max(2))
}

struct SignificantDigitsFormatter;

impl serde_json::ser::Formatter for SignificantDigitsFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        // 17 significant digits: lossless for every finite f64
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value as JSON with every real number written with 17
/// significant digits (lossless for doubles, and byte-stable across runs).
pub fn to_json_17sig<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigitsFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CoreError::Config(format!("json serialization: {e}")))?;
    String::from_utf8(out).map_err(|e| CoreError::Config(format!("json not utf-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_array_round_trip() {
        let a = PredictionArray::from_rows(3, &[vec![0, 2, 1], vec![1, 1, 0]]).unwrap();
        let text = write_prediction_array(&a);
        assert_eq!(text, "2 3 3\n0 2 1\n1 1 0\n");
        assert_eq!(parse_prediction_array(&text).unwrap(), a);
    }

    #[test]
    fn prediction_array_errors_name_line_and_column() {
        let err = parse_prediction_array("2 2 2\n0 1\n0 x\n").unwrap_err();
        match err {
            CoreError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse_prediction_array("2 2 2\n0 1\n0 5\n").unwrap_err();
        assert!(matches!(err, CoreError::Parse { line: 3, column: 3, .. }));
        assert!(parse_prediction_array("2 2 2\n0 1\n").is_err()); // missing row
        assert!(parse_prediction_array("").is_err());
    }

    #[test]
    fn truth_round_trip_both_layouts() {
        let t = TruthLabels::from_values(&[0, 1, 2]);
        assert_eq!(parse_truth(&write_truth(&t)).unwrap(), t);
        assert_eq!(parse_truth("0 1 2\n").unwrap(), t);
        assert!(matches!(
            parse_truth("0 -1\n"),
            Err(CoreError::Parse { line: 1, column: 3, .. })
        ));
    }

    #[test]
    fn mask_round_trip() {
        let m = OobMask::from_rows(&[vec![true, false], vec![false, true]]).unwrap();
        let text = write_mask(&m);
        assert_eq!(text, "10\n01\n");
        assert_eq!(parse_mask(&text).unwrap(), m);
        assert!(matches!(
            parse_mask("10\n0x\n"),
            Err(CoreError::Parse { line: 2, column: 2, .. })
        ));
        assert!(parse_mask("10\n011\n").is_err());
    }

    #[test]
    fn model_spec_parses_and_validates() {
        let json = r#"{"k":2,"pi":[0.5,0.5],"mu":[
            {"family":"beta","params":[2.0,5.0]},
            {"family":"beta","params":[5.0,2.0]}]}"#;
        let model = parse_model_spec(json).unwrap();
        assert_eq!(model.k, 2);
        let bad = r#"{"k":2,"pi":[0.5,0.4],"mu":[
            {"family":"beta","params":[2.0,5.0]},
            {"family":"beta","params":[5.0,2.0]}]}"#;
        assert!(matches!(parse_model_spec(bad), Err(CoreError::Config(_))));
        assert!(matches!(parse_model_spec("{"), Err(CoreError::Parse { .. })));
    }

    #[test]
    fn dataset_csv_parses() {
        let csv = "f1,f2,label\n0.5,1.5,0\n1.0,-2.0,1\n0.0,0.25,1\n";
        let d = parse_dataset_csv(csv).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.p(), 2);
        assert_eq!(d.k(), 2);
        assert_eq!(d.label(2), Label(1));
        assert_eq!(d.feature(1, 1), -2.0);
    }

    #[test]
    fn dataset_csv_rejects_non_integer_label() {
        let err = parse_dataset_csv("a,label\n1.0,0.5\n").unwrap_err();
        assert!(matches!(err, CoreError::Parse { line: 2, column: 2, .. }));
        assert!(parse_dataset_csv("a,label\n").is_err());
    }

    #[test]
    fn json_floats_have_17_significant_digits() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let s = to_json_17sig(&S { x: 0.1 }).unwrap();
        assert_eq!(s, "{\"x\":1.0000000000000001e-1}");
        let s = to_json_17sig(&S { x: 800.0 }).unwrap();
        assert_eq!(s, "{\"x\":8.0000000000000000e2}");
        // round trip is lossless
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap(), 800.0);
    }
}
