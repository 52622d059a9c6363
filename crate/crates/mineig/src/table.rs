//! Two-column numeric tables: `x y` per line, whitespace separated.
//! Blank lines and `#` comments are skipped.

use std::path::Path;

use mineig_core::potentials::{Extension, SampledFunction};

use crate::CliError;

pub fn load_table(path: &Path, extension: Extension) -> Result<SampledFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read table {}: {e}", path.display())))?;
    parse_table(&text, extension).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_table(text: &str, extension: Extension) -> Result<SampledFunction, String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = no + 1;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(format!("line {lineno}: expected two columns, found {}", cols.len()));
        }
        let num = |t: &str| -> Result<f64, String> {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("line {lineno}: `{t}` is not a finite number"))
        };
        let (x, y) = (num(cols[0])?, num(cols[1])?);
        if let Some(prev) = xs.last() {
            if x <= *prev {
                return Err(format!(
                    "line {lineno}: abscissa {x} does not increase (previous {prev})"
                ));
            }
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < 2 {
        return Err(format!("a table needs at least two rows, found {}", xs.len()));
    }
    SampledFunction::new(xs, ys, extension).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_two_point_table() {
        let t = parse_table("0 1\n1 1\n", Extension::Periodic).unwrap();
        for x in [-0.3, 0.0, 0.25, 0.99, 3.7] {
            assert_eq!(t.eval(x), 1.0);
        }
    }

    #[test]
    fn periodic_tent() {
        let t = parse_table("# tent\n0 0\n0.5 1\n\n1 0\n", Extension::Periodic).unwrap();
        assert_eq!(t.eval(0.25), 0.5);
        assert_eq!(t.eval(0.5), 1.0);
        assert!((t.eval(1.25) - 0.5).abs() < 1e-15);
        assert!((t.eval(-0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clamped_extension() {
        let t = parse_table("0 0\n1 2\n", Extension::Clamped).unwrap();
        assert_eq!(t.eval(-1.0), 0.0);
        assert_eq!(t.eval(5.0), 2.0);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_table("0 1\n# c\n0.5 x\n", Extension::Periodic).unwrap_err();
        assert!(e.starts_with("line 3:"), "{e}");
        let e = parse_table("0 1\n1 1\n1 2\n", Extension::Periodic).unwrap_err();
        assert!(e.starts_with("line 3:"), "{e}");
        let e = parse_table("0 1 2\n", Extension::Periodic).unwrap_err();
        assert!(e.starts_with("line 1:"), "{e}");
        assert!(parse_table("0 1\n", Extension::Periodic).is_err());
    }
}
