use std::io::Read;
use std::path::{Path, PathBuf};

use super::sweep::{Scenario, SweepRow, Variant};
use crate::{Error, Result};

pub const COLUMNS: [&str; 10] = [
    "scenario",
    "variant",
    "M",
    "a_over_lambda",
    "mean_rate",
    "stderr",
    "alpha",
    "sigma_d2",
    "p_r_ratio",
    "leakage",
];

/// Significant digits of every float field.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style formatting: fixed notation for moderate exponents, scientific
/// otherwise, never trimmed.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let prec = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{v:.prec$e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (prec as i32 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn record(row: &SweepRow) -> [String; 10] {
    [
        row.scenario.as_str().to_string(),
        row.variant.as_str().to_string(),
        row.elements.to_string(),
        format_float(row.a_over_lambda),
        format_float(row.mean_rate),
        format_float(row.stderr),
        opt(row.alpha),
        opt(row.sigma_d2),
        opt(row.p_r_ratio),
        opt(row.leakage),
    ]
}

fn memory_error(e: csv::Error) -> Error {
    Error::Csv {
        path: PathBuf::from("<memory>"),
        source: e,
    }
}

/// Header plus one line per row.
pub fn to_csv_bytes(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(COLUMNS).map_err(memory_error)?;
    for row in rows {
        w.write_record(record(row)).map_err(memory_error)?;
    }
    w.into_inner().map_err(|e| memory_error(e.into_error().into()))
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let bytes = to_csv_bytes(rows)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_scenario(s: &str) -> Option<Scenario> {
    [Scenario::Uplink, Scenario::Downlink]
        .into_iter()
        .find(|v| v.as_str() == s)
}

fn parse_variant(s: &str) -> Option<Variant> {
    [
        Variant::Ideal,
        Variant::OneBitExact,
        Variant::OneBitExactNoLeak,
        Variant::OneBitUqn,
        Variant::OneBitNoDither,
    ]
    .into_iter()
    .find(|v| v.as_str() == s)
}

/// Parses CSV produced by [`to_csv_bytes`].
pub fn read_rows_from<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = r.records();
    let malformed = |line: u64, reason: String| Error::MalformedRecord { line, reason };
    let csv_error = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        malformed(line, e.to_string())
    };
    match records.next() {
        None => return Err(malformed(1, "missing header".into())),
        Some(h) => {
            let h = h.map_err(csv_error)?;
            if h.iter().ne(COLUMNS) {
                return Err(malformed(1, format!("header must be `{}`", COLUMNS.join(","))));
            }
        }
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| malformed(line, reason);
        if rec.len() != COLUMNS.len() {
            return Err(bad(format!("expected {} fields, found {}", COLUMNS.len(), rec.len())));
        }
        let float = |i: usize| -> Result<f64> {
            let v: f64 = rec[i]
                .parse()
                .map_err(|_| bad(format!("{} `{}` is not a number", COLUMNS[i], &rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("{} is not finite", COLUMNS[i])))
            }
        };
        let optional = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        rows.push(SweepRow {
            scenario: parse_scenario(&rec[0]).ok_or_else(|| bad(format!("unknown scenario `{}`", &rec[0])))?,
            variant: parse_variant(&rec[1]).ok_or_else(|| bad(format!("unknown variant `{}`", &rec[1])))?,
            elements: rec[2]
                .parse()
                .map_err(|_| bad(format!("M `{}` is not a count", &rec[2])))?,
            a_over_lambda: float(3)?,
            mean_rate: float(4)?,
            stderr: float(5)?,
            alpha: optional(6)?,
            sigma_d2: optional(7)?,
            p_r_ratio: optional(8)?,
            leakage: optional(9)?,
        });
    }
    Ok(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_rows_from(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            scenario: Scenario::Downlink,
            variant: Variant::OneBitExact,
            elements: 400,
            a_over_lambda: 0.125,
            mean_rate: 3.684_123_456_789,
            stderr: 0.012_345_678_912,
            alpha: Some(1.5),
            sigma_d2: Some(32.0 / 3.0),
            p_r_ratio: Some(0.157),
            leakage: None,
        }
    }

    #[test]
    fn float_format_examples() {
        assert_eq!(format_float(0.125), "0.125000000");
        assert_eq!(format_float(3.684_123_456_789), "3.68412346");
        assert_eq!(format_float(32.0 / 3.0), "10.6666667");
        assert_eq!(format_float(9.999_999_999_7), "10.0000000");
        assert_eq!(format_float(1.234_567_891e-7), "1.23456789e-7");
        assert_eq!(format_float(-2.5e-3), "-0.00250000000");
        assert_eq!(format_float(123_456_789_012.0), "1.23456789e11");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn empty_rows_give_header_only() {
        let bytes = to_csv_bytes(&[]).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "scenario,variant,M,a_over_lambda,mean_rate,stderr,alpha,sigma_d2,p_r_ratio,leakage\n"
        );
    }

    #[test]
    fn row_layout() {
        let bytes = to_csv_bytes(&[row()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "downlink,onebit_exact,400,0.125000000,3.68412346,0.0123456789,1.50000000,10.6666667,0.157000000,"
        );
    }

    #[test]
    fn round_trip_is_stable() {
        let bytes = to_csv_bytes(&[row(), row()]).unwrap();
        let parsed = read_rows_from(&bytes[..]).unwrap();
        assert_eq!(parsed.len(), 2);
        assert!((parsed[0].mean_rate - row().mean_rate).abs() < 1e-8);
        assert_eq!(parsed[0].leakage, None);
        assert_eq!(to_csv_bytes(&parsed).unwrap(), bytes);
    }

    #[test]
    fn malformed_inputs() {
        let h = COLUMNS.join(",");
        let bad = |body: &str| read_rows_from(format!("{h}\n{body}\n").as_bytes()).unwrap_err();
        assert!(matches!(bad("uplink,ideal,4"), Error::MalformedRecord { line: 2, .. }));
        assert!(bad("sideways,ideal,4,0.5,1,0,,,,").to_string().contains("scenario"));
        assert!(bad("uplink,ideal,x,0.5,1,0,,,,").to_string().contains("M"));
        assert!(bad("uplink,ideal,4,nan,1,0,,,,").to_string().contains("finite"));
        assert!(read_rows_from("a,b\n".as_bytes()).is_err());
        assert!(read_rows_from("".as_bytes()).is_err());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let p = Path::new("/nonexistent-dir/out.csv");
        let e = emit_csv(&[], p).unwrap_err().to_string();
        assert!(e.contains("/nonexistent-dir/out.csv"), "{e}");
        let e = read_rows(p).unwrap_err().to_string();
        assert!(e.contains("/nonexistent-dir/out.csv"), "{e}");
    }
}
