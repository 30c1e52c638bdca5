//! Text formats read and written by the command line tool.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::analysis::RateCurve;
use crate::iteration::Trace;
use crate::kaczmarz::{Hyperplane, KaczmarzError, LinearSystem, ThirdsResult};
use crate::linalg::{orthonormalize, LinalgError, Subspace, Vector, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
    #[error("{path}: {source}")]
    Linalg {
        path: String,
        #[source]
        source: LinalgError,
    },
    #[error("{path}: {source}")]
    System {
        path: String,
        #[source]
        source: KaczmarzError,
    },
}

pub type Result<T> = std::result::Result<T, FormatError>;

/// 17 significant digits, lowercase exponent.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.display().to_string(),
        source,
    })
}

/// Non-empty lines with `#` comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_csv_numbers(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("'{t}' is not a finite number")),
            }
        })
        .collect()
}

/// One basis vector per line, comma separated. Vectors are orthonormalized.
pub fn parse_subspace(text: &str, label: &str) -> Result<Subspace> {
    let mut vectors: Vec<Vector> = Vec::new();
    let mut width = None;
    for (line, l) in content_lines(text) {
        let err = |reason: String| FormatError::Parse {
            path: label.to_string(),
            line,
            reason,
        };
        let xs = parse_csv_numbers(l).map_err(err)?;
        match width {
            None => width = Some(xs.len()),
            Some(w) if w != xs.len() => {
                return Err(err(format!("expected {w} entries, found {}", xs.len())));
            }
            _ => {}
        }
        vectors.push(Vector::from_vec(xs));
    }
    let n = width.ok_or_else(|| FormatError::Parse {
        path: label.to_string(),
        line: 0,
        reason: "no basis vectors".into(),
    })?;
    orthonormalize(&vectors, n, DEFAULT_TOL).map_err(|source| FormatError::Linalg {
        path: label.to_string(),
        source,
    })
}

pub fn read_subspace(path: &Path) -> Result<Subspace> {
    parse_subspace(&read(path)?, &path.display().to_string())
}

/// Comma-separated vector such as `1,2,-0.5`.
pub fn parse_vector(spec: &str) -> std::result::Result<Vector, String> {
    parse_csv_numbers(spec).map(Vector::from_vec)
}

/// Sparse form: first line `n J`, then J lines `c k i1 v1 ... ik vk` with
/// 0-based indices. Dense form: lines `a_1,...,a_n,c`.
pub fn parse_system(text: &str, dense: bool, label: &str) -> Result<LinearSystem> {
    let perr = |line: usize, reason: String| FormatError::Parse {
        path: label.to_string(),
        line,
        reason,
    };
    let serr = |source| FormatError::System {
        path: label.to_string(),
        source,
    };
    let mut rows = Vec::new();
    let mut lines = content_lines(text);
    let n;
    if dense {
        let mut width = None;
        for (line, l) in lines {
            let xs = parse_csv_numbers(l).map_err(|r| perr(line, r))?;
            if xs.len() < 2 {
                return Err(perr(line, "need at least one coefficient and a right-hand side".into()));
            }
            if width.is_some_and(|w| w != xs.len()) {
                return Err(perr(line, "rows have different lengths".into()));
            }
            width = Some(xs.len());
            let (a, c) = xs.split_at(xs.len() - 1);
            rows.push(
                Hyperplane::new(Vector::from_column_slice(a), c[0])
                    .map_err(|e| perr(line, e.to_string()))?,
            );
        }
        n = width.map(|w| w - 1).ok_or_else(|| perr(0, "empty system".into()))?;
    } else {
        let (line, head) = lines.next().ok_or_else(|| perr(0, "empty system".into()))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let parse_usize = |t: &str, line: usize| t.parse::<usize>().map_err(|_| perr(line, format!("'{t}' is not a count")));
        if head.len() != 2 {
            return Err(perr(line, "header must be 'n J'".into()));
        }
        n = parse_usize(head[0], line)?;
        let j = parse_usize(head[1], line)?;
        for (line, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let num = |t: &str| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(perr(line, format!("'{t}' is not a finite number"))),
            };
            if toks.len() < 2 {
                return Err(perr(line, "row must start with 'c k'".into()));
            }
            let c = num(toks[0])?;
            let k = parse_usize(toks[1], line)?;
            if toks.len() != 2 + 2 * k {
                return Err(perr(line, format!("expected {k} index/value pairs")));
            }
            let mut a = Vector::zeros(n);
            for p in 0..k {
                let idx = parse_usize(toks[2 + 2 * p], line)?;
                if idx >= n {
                    return Err(perr(line, format!("index {idx} out of range for n = {n}")));
                }
                a[idx] += num(toks[3 + 2 * p])?;
            }
            rows.push(Hyperplane::new(a, c).map_err(|e| perr(line, e.to_string()))?);
        }
        if rows.len() != j {
            return Err(perr(0, format!("header announces {j} rows, found {}", rows.len())));
        }
    }
    LinearSystem::new(rows, n).map_err(serr)
}

pub fn read_system(path: &Path, dense: bool) -> Result<LinearSystem> {
    parse_system(&read(path)?, dense, &path.display().to_string())
}

/// Sparse text form of a system, listing only nonzero coefficients.
pub fn format_system(sys: &LinearSystem) -> String {
    let mut out = format!("{} {}\n", sys.ambient_dim(), sys.rows().len());
    for h in sys.rows() {
        let nz: Vec<(usize, f64)> = h.normal().iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        let _ = write!(out, "{} {}", fmt_num(h.offset()), nz.len());
        for (i, v) in nz {
            let _ = write!(out, " {i} {}", fmt_num(v));
        }
        out.push('\n');
    }
    out
}

pub fn format_vector_lines(v: &Vector) -> String {
    v.iter().map(|x| fmt_num(*x) + "\n").collect()
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("n,j_n,norm,increment,residual\n");
    for (k, j) in trace.indices.iter().enumerate() {
        let res = trace
            .residuals
            .as_ref()
            .map(|r| fmt_num(r[k + 1]))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            k + 1,
            j,
            fmt_num(trace.iterate_norms[k + 1]),
            fmt_num(trace.increments[k]),
            res
        );
    }
    out
}

pub fn rate_csv(curve: &RateCurve) -> String {
    let mut out = String::from("n,measured,predicted,abs_err\n");
    for (k, (m, p)) in curve.measured.iter().zip(&curve.predicted).enumerate() {
        let _ = writeln!(out, "{},{},{},{}", k + 1, fmt_num(*m), fmt_num(*p), fmt_num((m - p).abs()));
    }
    out
}

pub fn residual_csv(history: &[f64]) -> String {
    let mut out = String::from("sweep,residual\n");
    for (k, r) in history.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, fmt_num(*r));
    }
    out
}

pub fn thirds_csv(r: &ThirdsResult) -> String {
    let mut out = String::from("k,left,right,left_deviation,right_deviation\n");
    for (k, (l, rt)) in r.positions.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{},{},{}",
            fmt_num(*l),
            fmt_num(*rt),
            fmt_num(r.left_deviation[k]),
            fmt_num(r.right_deviation[k])
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_17_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn subspace_with_comments() {
        let s = parse_subspace("# a plane\n1, 0, 0\n\n0, 2, 0 # second\n", "t").unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.ambient_dim(), 3);
    }

    #[test]
    fn ragged_subspace_names_the_line() {
        let err = parse_subspace("1,0,0\n0,1\n", "f.csv").unwrap_err().to_string();
        assert!(err.starts_with("f.csv:2:"), "{err}");
        assert!(parse_subspace("1,x\n", "f").is_err());
        assert!(parse_subspace("# nothing\n", "f").is_err());
    }

    #[test]
    fn sparse_system_round_trip() {
        let sys = parse_system("2 2\n2 1 0 1\n3 1 1 1\n", false, "s").unwrap();
        assert_eq!(sys.rhs(), Vector::from_column_slice(&[2.0, 3.0]));
        let again = parse_system(&format_system(&sys), false, "s").unwrap();
        assert_eq!(again, sys);
        assert!(parse_system("2 1\n1 1 5 1\n", false, "s").is_err());
        assert!(parse_system("2 2\n1 1 0 1\n", false, "s").is_err());
    }

    #[test]
    fn dense_system() {
        let sys = parse_system("1,0,2\n0,1,3\n", true, "d").unwrap();
        assert_eq!(sys.ambient_dim(), 2);
        assert!(parse_system("0,0,1\n", true, "d").is_err());
    }
}
