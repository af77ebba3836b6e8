//! Grid arguments: `0.1,0.2,0.3` or `start:stop:count` (inclusive).

use crate::error::CliError;

pub fn parse(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Input(format!("grid {spec:?}: {m}"));
    let num = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| bad(format!("{s:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("{s:?} is not finite")))
        }
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range form is start:stop:count".into()));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be a positive integer".into()))?;
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
        }
    } else {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse("2:4:3").unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(parse("0.1:0.1:1").unwrap(), vec![0.1]);
        assert_eq!(parse("0:0.3:4").unwrap()[3], 0.3);
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["", ",", "a", "0:1", "0:1:0", "0:1:x", "inf", "NaN"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }
}
