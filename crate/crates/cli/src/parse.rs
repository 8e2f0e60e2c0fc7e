//! Parsers for grid, path-list and complex-number arguments.

use anyhow::{bail, Context, Result};
use postsel::C64;

/// Grid points are snapped to this resolution so `0:1:0.1` yields `0.3`
/// rather than `0.30000000000000004`.
const SNAP: f64 = 1e12;

fn number(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .with_context(|| format!("`{s}` is not a number"))?;
    if !x.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(x)
}

/// `start:stop:step` (inclusive of `stop` when it lies on the lattice) or a
/// comma-separated list.
pub fn grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                bail!("grid step must be positive, got {step}");
            }
            if stop < start {
                bail!("grid stop {stop} is below start {start}");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| ((start + i as f64 * step) * SNAP).round() / SNAP)
                .collect()
        }
        [list] => list.split(',').map(number).collect::<Result<Vec<_>>>()?,
        _ => bail!("grid must be `start:stop:step` or a comma-separated list, got `{spec}`"),
    };
    if values.is_empty() {
        bail!("empty grid");
    }
    Ok(values)
}

/// Comma-separated 1-based path numbers, returned 0-based.
pub fn paths(spec: &str, dim: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let p: usize = item
            .trim()
            .parse()
            .with_context(|| format!("`{item}` is not a path number"))?;
        if p == 0 || p > dim {
            bail!("path {p} outside 1..={dim}");
        }
        if out.contains(&(p - 1)) {
            bail!("path {p} listed twice");
        }
        out.push(p - 1);
    }
    Ok(out)
}

/// `1`, `-0.5`, `2i`, `-i`, `0.5+0.5i`, `1-2i`.
pub fn complex(s: &str) -> Result<C64> {
    let t = s.trim();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(number(t)?, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (number(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => number(other).with_context(|| format!("`{s}` is not a complex number"))?,
    };
    Ok(C64::new(re, im))
}

pub fn complex_list(spec: &str) -> Result<Vec<C64>> {
    spec.split(',').map(complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_grids_are_inclusive_and_snapped() {
        let g = grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[10], 1.0);
        let g = grid("0.05:1:0.05").unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[19], 1.0);
        assert_eq!(grid("0:0.25:0.1").unwrap(), vec![0.0, 0.1, 0.2]);
    }

    #[test]
    fn list_grids() {
        assert_eq!(grid("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid("0.3").unwrap(), vec![0.3]);
    }

    #[test]
    fn bad_grids() {
        for bad in [
            "", "0:1", "0:1:0", "1:0:0.1", "a,b", "0:1:-1", "1:2:3:4", "nan",
        ] {
            assert!(grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn path_lists() {
        assert_eq!(paths("1,2", 3).unwrap(), vec![0, 1]);
        assert_eq!(paths(" 3 ", 3).unwrap(), vec![2]);
        assert!(paths("0", 3).is_err());
        assert!(paths("4", 3).is_err());
        assert!(paths("1,1", 3).is_err());
        assert!(paths("x", 3).is_err());
    }

    #[test]
    fn complex_numbers() {
        let c = |re, im| C64::new(re, im);
        assert_eq!(complex("1").unwrap(), c(1.0, 0.0));
        assert_eq!(complex("-1").unwrap(), c(-1.0, 0.0));
        assert_eq!(complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(complex("0.5+0.5i").unwrap(), c(0.5, 0.5));
        assert_eq!(complex("1-2i").unwrap(), c(1.0, -2.0));
        assert_eq!(complex("1e-3+2e-3i").unwrap(), c(1e-3, 2e-3));
        assert!(complex("1+xi").is_err());
        assert!(complex("").is_err());
        assert_eq!(complex_list("1,-1,1").unwrap().len(), 3);
    }
}
