//! λ grid syntax.
//!
//! * `a:b:Klog`: `K` values spaced evenly in log scale from `a` to `b`
//!   (either direction), endpoints included.
//! * `a:b:Klin`: the same with linear spacing.
//! * `v1,v2,...`: an explicit list.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid λ grid {input:?}: {reason}")]
pub struct GridError {
    pub input: String,
    pub reason: &'static str,
}

pub fn parse_grid(input: &str) -> Result<Vec<f64>, GridError> {
    let err = |reason| GridError {
        input: input.to_owned(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, k] = parts.as_slice() else {
            return Err(err("expected a:b:K(log|lin)"));
        };
        let a: f64 = a.parse().map_err(|_| err("bad start value"))?;
        let b: f64 = b.parse().map_err(|_| err("bad end value"))?;
        let (count, log) = if let Some(c) = k.strip_suffix("log") {
            (c, true)
        } else if let Some(c) = k.strip_suffix("lin") {
            (c, false)
        } else {
            return Err(err("count must end in 'log' or 'lin'"));
        };
        let count: usize = count.parse().map_err(|_| err("bad point count"))?;
        if count == 0 {
            return Err(err("point count must be positive"));
        }
        if log && !(a > 0.0 && b > 0.0) {
            return Err(err("log grid endpoints must be positive"));
        }
        if count == 1 {
            vec![a]
        } else {
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        return b;
                    }
                    let t = i as f64 / (count - 1) as f64;
                    if log {
                        10f64.powf(a.log10() + t * (b.log10() - a.log10()))
                    } else {
                        a + t * (b - a)
                    }
                })
                .collect()
        }
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| err("bad list value")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(err("all λ values must be positive and finite"));
    }
    Ok(values)
}
