//! Plain-text complex matrix format used for golden fixtures.
//!
//! ```text
//! complex-matrix v1
//! rows <r> cols <c>
//! <re> <im>        # one line per entry, row-major
//! ```
//!
//! Entries are written with 17 significant digits so that parsing recovers
//! every `f64` bit for bit. Blank lines and `#` comments are ignored on read.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

const HEADER: &str = "complex-matrix v1";

pub fn write_complex_matrix(m: &CMat) -> String {
    let mut out = format!("{HEADER}\nrows {} cols {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
        }
    }
    out
}

pub fn parse_complex_matrix(text: &str) -> Result<CMat> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    if lines.next() != Some(HEADER) {
        return Err(Error::Parse(format!("expected header `{HEADER}`")));
    }
    let shape = lines.next().ok_or_else(|| Error::Parse("missing shape line".into()))?;
    let parts: Vec<&str> = shape.split_whitespace().collect();
    let (rows, cols) = match parts.as_slice() {
        ["rows", r, "cols", c] => (
            r.parse::<usize>().map_err(|e| Error::Parse(format!("rows: {e}")))?,
            c.parse::<usize>().map_err(|e| Error::Parse(format!("cols: {e}")))?,
        ),
        _ => return Err(Error::Parse(format!("bad shape line `{shape}`"))),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (k, line) in lines.enumerate() {
        let mut it = line.split_whitespace();
        let mut num = |what: &str| -> Result<f64> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("entry {k}: missing {what} part")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("entry {k}: {e}")))
        };
        let re = num("real")?;
        let im = num("imaginary")?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("entry {k}: trailing tokens")));
        }
        data.push(C64::new(re, im));
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!("expected {} entries, found {}", rows * cols, data.len())));
    }
    Ok(CMat::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.1, -1.0 / 3.0), C64::new(f64::MIN_POSITIVE, 1e300), C64::new(-0.0, 2f64.sqrt()), C64::new(1.0, 0.0)],
        );
        let back = parse_complex_matrix(&write_complex_matrix(&m)).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let text = "complex-matrix v1\nrows 1 cols 2\n1 0\n";
        assert!(matches!(parse_complex_matrix(text), Err(Error::Parse(_))));
        assert!(parse_complex_matrix("rows 1 cols 1\n0 0\n").is_err());
    }
}
