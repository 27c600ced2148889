//! Plain-text matrix and vector files.
//!
//! `CMAT v1`: a header line `# <rows> <cols>` followed by `rows · cols` lines
//! `<re> <im>` in row-major order, each number in scientific notation with 17
//! significant digits so that values round-trip exactly.
//!
//! Vector files are just `<re> <im>` lines; blank lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

fn format_entry(out: &mut String, z: C64) {
    let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
}

fn parse_entry(line: &str, lineno: usize) -> Result<C64> {
    let mut parts = line.split_whitespace();
    let mut next = |what: &str| -> Result<f64> {
        let tok = parts.next().ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("missing {what} part"),
        })?;
        tok.parse::<f64>().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad number {tok:?}: {e}"),
        })
    };
    let re = next("real")?;
    let im = next("imaginary")?;
    if parts.next().is_some() {
        return Err(Error::Parse { line: lineno, msg: "expected exactly two numbers".into() });
    }
    Ok(C64::new(re, im))
}

pub fn format_cmat(m: &ComplexMatrix) -> String {
    let mut out = format!("# {} {}\n", m.rows(), m.cols());
    for &z in m.as_slice() {
        format_entry(&mut out, z);
    }
    out
}

pub fn parse_cmat(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty CMAT file".into() })?;
    let dims: Vec<&str> = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse { line: hline, msg: "header must start with '#'".into() })?
        .split_whitespace()
        .collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad dimension {s:?}: {e}"),
        })
    };
    if dims.len() != 2 {
        return Err(Error::Parse { line: hline, msg: "header must be '# <rows> <cols>'".into() });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let data = lines
        .map(|(no, l)| parse_entry(l, no))
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header announces {} entries, found {}", rows * cols, data.len()),
        });
    }
    ComplexMatrix::from_row_major(rows, cols, data)
}

pub fn format_vector(v: &[C64]) -> String {
    let mut out = String::new();
    for &z in v {
        format_entry(&mut out, z);
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vec<C64>> {
    let v = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(no, l)| parse_entry(l, no))
        .collect::<Result<Vec<_>>>()?;
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse { line: 0, msg: "vector entries must be finite".into() });
    }
    Ok(v)
}

pub fn read_cmat(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_cmat(&fs::read_to_string(path)?)
}

pub fn write_cmat(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    Ok(fs::write(path, format_cmat(m))?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<C64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[C64]) -> Result<()> {
    Ok(fs::write(path, format_vector(v))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_exact() {
        let m = ComplexMatrix::from_row_major(1, 2, vec![C64::new(1.0, -0.5), C64::new(0.1, 3e-300)])
            .unwrap();
        let text = format_cmat(&m);
        assert_eq!(
            text,
            "# 1 2\n1.0000000000000000e0 -5.0000000000000000e-1\n\
             1.0000000000000001e-1 3.0000000000000002e-300\n"
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_cmat("").is_err());
        assert!(parse_cmat("1 2\n").is_err());
        assert!(parse_cmat("# 1 2\n1 2\n").is_err());
        assert!(parse_cmat("# 1 1\n1 x\n").is_err());
        assert!(parse_cmat("# 1 1\n1 2 3\n").is_err());
        assert!(parse_vector("1\n").is_err());
        assert_eq!(parse_vector("# comment\n\n1 2\n").unwrap(), vec![C64::new(1.0, 2.0)]);
    }

    proptest! {
        #[test]
        fn cmat_round_trips(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(-1e6f64..1e6, 50)) {
            let m = ComplexMatrix::from_fn(rows, cols, |j, k| {
                let i = 2 * (j * cols + k);
                C64::new(seed[i] / 7.0, seed[i + 1] * 1e-9)
            });
            prop_assert_eq!(parse_cmat(&format_cmat(&m)).unwrap(), m.clone());
            let v = m.column(0);
            prop_assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        }
    }
}
