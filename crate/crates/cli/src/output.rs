//! Writers for JSON, JSON lines and CSV with 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

/// Render a float with 17 significant digits, as a valid JSON number.
pub fn fmt17(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..16).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.16e}")
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Serialize one value as a single line of JSON.
pub fn to_json_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// The output file, or stdout.
pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> hcmeta_core::Result<()> {
    let mut w = open(path)?;
    writeln!(w, "{}", to_json_line(value)?)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(1e20), "1.0000000000000000e20");
        assert_eq!(fmt17(-2.5e-7), "-2.4999999999999999e-7");
        assert_eq!(fmt17(0.0), "0.0");
    }

    #[test]
    fn output_parses_back_exactly() {
        for v in [1.0 / 3.0, 123456.789, 6.02e23, 1e-300, -0.0123] {
            let back: f64 = fmt17(v).parse().unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn json_lines_use_the_formatter() {
        let line = to_json_line(&serde_json::json!({"x": 0.5, "n": 3})).unwrap();
        assert_eq!(line, r#"{"n":3,"x":0.50000000000000000}"#);
    }
}
