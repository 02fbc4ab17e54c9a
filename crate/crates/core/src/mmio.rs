//! Dense Matrix Market (`array real general`) reading and writing.
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite `f64` exactly through the reader.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

pub const HEADER: &str = "%%MatrixMarket matrix array real general";

pub fn write_matrix_market<W: Write>(mut w: W, a: &RealMatrix, comments: &[String]) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for c in comments {
        for line in c.lines() {
            writeln!(w, "% {line}")?;
        }
    }
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for v in a.as_slice() {
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()
}

pub fn write_matrix_market_file(path: &Path, a: &RealMatrix, comments: &[String]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_matrix_market(BufWriter::new(file), a, comments).map_err(io_err)
}

/// Parses a dense real Matrix Market stream; `path` labels error messages.
pub fn read_matrix_market<R: BufRead>(reader: R, path: &Path) -> Result<RealMatrix> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((no, Ok(text))) => Ok(Some((no, text))),
            Some((_, Err(source))) => Err(Error::Io {
                path: path.to_path_buf(),
                source,
            }),
        }
    };

    let (no, banner) = next_line()?.ok_or_else(|| parse_err(1, "empty file".into()))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(no, format!("not a Matrix Market banner: '{banner}'")));
    }
    if tokens[2] != "array" || tokens[3] != "real" || tokens[4] != "general" {
        return Err(parse_err(
            no,
            format!("only 'array real general' is supported, got '{}'", tokens[2..].join(" ")),
        ));
    }

    let mut shape = None;
    let mut data = Vec::new();
    let mut expected = 0;
    let mut last = no;
    while let Some((no, text)) = next_line()? {
        last = no;
        let body = text.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        match shape {
            None => {
                let dims: Vec<&str> = body.split_whitespace().collect();
                let parse_dim = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(no, format!("bad dimension '{s}'")))
                };
                if dims.len() != 2 {
                    return Err(parse_err(no, format!("expected 'rows cols', got '{body}'")));
                }
                let (m, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
                expected = m.checked_mul(n).ok_or_else(|| parse_err(no, "dimensions overflow".into()))?;
                data.reserve(expected);
                shape = Some((m, n));
            }
            Some(_) => {
                for tok in body.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| parse_err(no, format!("bad value '{tok}'")))?;
                    if !v.is_finite() {
                        return Err(parse_err(no, format!("non-finite value '{tok}'")));
                    }
                    if data.len() == expected {
                        return Err(parse_err(no, format!("more than {expected} values")));
                    }
                    data.push(v);
                }
            }
        }
    }
    let (m, n) = shape.ok_or_else(|| parse_err(last, "missing size line".into()))?;
    if data.len() != expected {
        return Err(parse_err(
            last,
            format!("expected {expected} values for a {m}x{n} matrix, found {}", data.len()),
        ));
    }
    RealMatrix::new(m, n, data)
}

pub fn read_matrix_market_file(path: &Path) -> Result<RealMatrix> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_market(BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::gaussian_matrix;
    use crate::rng::stream;

    fn round_trip(a: &RealMatrix) -> RealMatrix {
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, a, &["generated in a test".to_string()]).unwrap();
        read_matrix_market(buf.as_slice(), Path::new("<memory>")).unwrap()
    }

    #[test]
    fn bit_exact_round_trip() {
        let mut a = gaussian_matrix(7, 5, &mut stream(1, 0));
        a[(0, 0)] = f64::MIN_POSITIVE / 3.0;
        a[(1, 0)] = f64::MAX;
        a[(2, 0)] = -0.0;
        a[(3, 0)] = 0.1;
        let b = round_trip(&a);
        let bits = |m: &RealMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn reads_comments_and_packed_values() {
        let text = "%%MatrixMarket matrix array real general\n% note\n\n2 2\n1 2\n3\n4\n";
        let a = read_matrix_market(text.as_bytes(), Path::new("x.mtx")).unwrap();
        assert_eq!(a, RealMatrix::from_rows(&[&[1.0, 3.0], &[2.0, 4.0]]));
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            "",
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n",
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
            "%%MatrixMarket matrix array real general\n1 1\n1\n2\n",
            "%%MatrixMarket matrix array real general\n1 1\nnan\n",
            "%%MatrixMarket matrix array real general\n1 x\n1\n",
        ];
        for text in cases {
            let err = read_matrix_market(text.as_bytes(), Path::new("bad.mtx")).unwrap_err();
            assert!(matches!(err, Error::Parse { .. }), "{text:?}: {err}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_matrix_market_file(Path::new("/nonexistent/dir/a.mtx")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        let err = write_matrix_market_file(Path::new("/nonexistent/dir/a.mtx"), &RealMatrix::identity(1), &[]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/a.mtx"));
    }
}
