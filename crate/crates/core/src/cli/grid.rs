//! Parsing of numeric grids given on the command line.
//!
//! A value list is `start:stop:count` (inclusive, evenly spaced) or a comma
//! list. Numbers may be written as multiples of π: `pi`, `2pi`, `pi/4`,
//! `1.5pi/2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::{Error, Result};

fn usage(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

/// A float, or `[k]pi[/d]`.
pub fn parse_number(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || usage(format!("cannot read '{text}' as a number"));
    if let Some(pos) = t.find("pi") {
        let coef = match t[..pos].trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &t[pos + 2..];
        let div = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(coef * PI / div);
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

/// Inclusive evenly spaced values; `count = 1` gives `[start]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| if i == n - 1 { stop } else { start + (stop - start) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// `start:stop:count` or `a,b,c`; never empty.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| usage(format!("grid count in '{text}' must be a non-negative integer")))?;
            linspace(parse_number(start)?, parse_number(stop)?, count)
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_number)
            .collect::<Result<_>>()?,
        _ => return Err(usage(format!("grid '{text}' must be start:stop:count or a comma list"))),
    };
    if values.is_empty() {
        return Err(usage(format!("grid '{text}' is empty")));
    }
    Ok(values)
}

/// One named sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

fn split_assignment(text: &str) -> Result<(&str, &str)> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v)),
        _ => Err(usage(format!("expected name=value, got '{text}'"))),
    }
}

/// `name=start:stop:count` or `name=a,b,c`.
pub fn parse_axis(text: &str) -> Result<Axis> {
    let (name, v) = split_assignment(text)?;
    Ok(Axis {
        name: name.to_string(),
        values: parse_values(v)?,
    })
}

/// `name=value`, collected into a map; repeated names are an error.
pub fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = split_assignment(item)?;
        if out.insert(k.to_string(), parse_number(v)?).is_some() {
            return Err(usage(format!("parameter '{k}' given twice")));
        }
    }
    Ok(out)
}

/// All combinations, first axis slowest.
pub fn cartesian(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_pi_multiples() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_number("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_number("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_number("3*pi/2").unwrap(), 1.5 * PI);
        for bad in ["", "x", "pix", "pi/", "nan", "inf"] {
            assert!(parse_number(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_values("2:9:1").unwrap(), vec![2.0]);
        assert_eq!(parse_values("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(*parse_values("0:2pi:24").unwrap().last().unwrap(), 2.0 * PI);
        assert!(parse_values("0:1:0").is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("0:1").is_err());
        assert!(parse_values("0:1:-2").is_err());
    }

    #[test]
    fn axes_and_products() {
        let a = parse_axis("theta=0:1:3").unwrap();
        let b = parse_axis("phi=5,6").unwrap();
        assert_eq!(a.name, "theta");
        let pts = cartesian(&[a, b]);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0.0, 5.0]);
        assert_eq!(pts[1], vec![0.0, 6.0]);
        assert_eq!(pts[5], vec![1.0, 6.0]);
        assert_eq!(cartesian(&[]), vec![Vec::<f64>::new()]);
        assert!(parse_axis("=1").is_err());
        let m = parse_assignments(&["lambda=0.5".into(), "phi=pi/8".into()]).unwrap();
        assert_eq!(m["lambda"], 0.5);
        assert!(parse_assignments(&["a=1".into(), "a=2".into()]).is_err());
    }
}
