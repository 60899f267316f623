//! Parameter grid syntax.
//!
//! - `a:b:n`: `n` evenly spaced points from `a` to `b` inclusive.
//! - `log:a:b:n`: `n` logarithmically spaced points from `a` to `b` inclusive (`a, b > 0`).
//! - `x1,x2,...`: explicit list; a single value is a one-point list.
//! - `a,b,...,c`: progression from `a` to `c`. Two leading terms extend geometrically when `b/a` is an
//!   integer of at least two, arithmetically otherwise; three leading terms select whichever
//!   progression they follow. The last term must lie on the progression.

use crate::error::{CliError, CliResult};

const ON_GRID_TOL: f64 = 1e-9;
const MAX_POINTS: usize = 1_000_000;

fn number(text: &str, spec: &str) -> CliResult<f64> {
    let value: f64 = text.trim().parse().map_err(|_| CliError::config(format!("invalid number '{text}' in grid '{spec}'")))?;
    if !value.is_finite() {
        return Err(CliError::config(format!("non-finite value in grid '{spec}'")));
    }
    Ok(value)
}

fn count(text: &str, spec: &str) -> CliResult<usize> {
    match text.trim().parse::<usize>() {
        Ok(0) => Err(CliError::config(format!("grid '{spec}' has zero points"))),
        Ok(n) if n > MAX_POINTS => Err(CliError::config(format!("grid '{spec}' exceeds {MAX_POINTS} points"))),
        Ok(n) => Ok(n),
        Err(_) => Err(CliError::config(format!("invalid point count '{text}' in grid '{spec}'"))),
    }
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= ON_GRID_TOL * x.abs().max(y.abs()).max(1.0)
}

fn progression(mut next: impl FnMut(usize) -> f64, end: f64, ascending: bool) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..=MAX_POINTS {
        let x = next(i);
        if close(x, end) {
            out.push(end);
            return Some(out);
        }
        if (ascending && x > end) || (!ascending && x < end) {
            return None;
        }
        out.push(x);
    }
    None
}

fn arithmetic(a: f64, step: f64, end: f64) -> Option<Vec<f64>> {
    if step == 0.0 {
        return None;
    }
    progression(|i| a + step * i as f64, end, step > 0.0)
}

fn geometric(a: f64, ratio: f64, end: f64) -> Option<Vec<f64>> {
    if a <= 0.0 || end <= 0.0 || ratio <= 0.0 || ratio == 1.0 {
        return None;
    }
    progression(|i| a * ratio.powi(i as i32), end, ratio > 1.0)
}

fn ellipsis(head: &[f64], end: f64, spec: &str) -> CliResult<Vec<f64>> {
    let fail = || CliError::config(format!("grid '{spec}': last term is not on the progression"));
    let (a, b) = (head[0], head[1]);
    let expanded = match head {
        [_, _] => {
            let ratio = b / a;
            let integer_ratio = a > 0.0 && ratio >= 2.0 && ratio.fract() == 0.0;
            if integer_ratio {
                geometric(a, ratio, end).or_else(|| arithmetic(a, b - a, end))
            } else {
                arithmetic(a, b - a, end)
            }
        }
        [_, _, c] => {
            if close(b - a, c - b) {
                arithmetic(a, b - a, end)
            } else if a > 0.0 && close(b / a, c / b) {
                geometric(a, b / a, end)
            } else {
                return Err(CliError::config(format!("grid '{spec}': leading terms are neither arithmetic nor geometric")));
            }
        }
        _ => return Err(CliError::config(format!("grid '{spec}': use two or three terms before '...'"))),
    };
    expanded.ok_or_else(fail)
}

/// Parses a real-valued grid.
pub fn parse_reals(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::config("empty grid"));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        return match parts.as_slice() {
            ["log", a, b, n] => {
                let (a, b, n) = (number(a, spec)?, number(b, spec)?, count(n, spec)?);
                if a <= 0.0 || b <= 0.0 {
                    return Err(CliError::config(format!("log grid '{spec}' needs positive endpoints")));
                }
                let mut points: Vec<f64> = spaced(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
                points[0] = a;
                if n > 1 {
                    points[n - 1] = b;
                }
                Ok(points)
            }
            [a, b, n] => Ok(spaced(number(a, spec)?, number(b, spec)?, count(n, spec)?)),
            _ => Err(CliError::config(format!("invalid grid '{spec}', expected a:b:n or log:a:b:n"))),
        };
    }
    let items: Vec<&str> = spec.split(',').map(str::trim).collect();
    match items.iter().position(|s| *s == "...") {
        None => items.iter().map(|s| number(s, spec)).collect(),
        Some(pos) => {
            if pos + 2 != items.len() || !(2..=3).contains(&pos) {
                return Err(CliError::config(format!("grid '{spec}': '...' must be preceded by two or three terms and followed by one")));
            }
            let head: Vec<f64> = items[..pos].iter().map(|s| number(s, spec)).collect::<CliResult<_>>()?;
            ellipsis(&head, number(items[pos + 1], spec)?, spec)
        }
    }
}

/// Parses a grid of positive integers.
pub fn parse_counts(spec: &str) -> CliResult<Vec<usize>> {
    parse_reals(spec)?
        .into_iter()
        .map(|x| {
            let rounded = x.round();
            if rounded >= 1.0 && close(x, rounded) && rounded <= usize::MAX as f64 {
                Ok(rounded as usize)
            } else {
                Err(CliError::config(format!("grid '{spec}' contains {x}, expected positive integers")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_endpoints_are_exact() {
        let g = parse_reals("0.05:1.0:40").unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!((g[0], g[39]), (0.05, 1.0));
        let g = parse_reals("log:1e-4:1:200").unwrap();
        assert_eq!((g[0], g[199]), (1e-4, 1.0));
        assert!((g[100] / g[99] - g[1] / g[0]).abs() < 1e-12);
        assert_eq!(parse_reals("2:5:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn lists_and_progressions() {
        assert_eq!(parse_reals("0.1, 0.5,2").unwrap(), vec![0.1, 0.5, 2.0]);
        assert_eq!(parse_counts("2,4,...,1024").unwrap(), (1..=10).map(|i| 1usize << i).collect::<Vec<_>>());
        assert_eq!(parse_counts("2,4,6,...,10").unwrap(), vec![2, 4, 6, 8, 10]);
        assert_eq!(parse_counts("1,2,...,5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_counts("1,3,...,9").unwrap(), vec![1, 3, 9]);
        assert_eq!(parse_reals("0.5,0.25,0.125,...,0.0625").unwrap(), vec![0.5, 0.25, 0.125, 0.0625]);
        assert_eq!(parse_counts("7").unwrap(), vec![7]);
    }

    #[test]
    fn malformed_grids_are_config_errors() {
        for bad in ["", "1:2", "1:2:0", "log:0:1:5", "a:b:3", "1,2,...", "1,...,4", "2,4,8,...,20", "1,2,4,...,9", "nan", "1:2:3:4:5"] {
            assert!(matches!(parse_reals(bad), Err(CliError::Config(_))), "{bad}");
        }
        assert!(parse_counts("0.5:2:4").is_err());
        assert!(parse_counts("0,1").is_err());
    }
}
