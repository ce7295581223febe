//! Dimension-grid specs.
//!
//! A spec is a comma-separated list of tokens, each one of
//!   `7`               a single dimension,
//!   `2:10`            an inclusive integer range,
//!   `2:1e6:geometric:40`  a geometric grid with 40 points.
//! Endpoints accept float notation (`1e6`). The expanded grid must be
//! strictly increasing; geometric grids drop duplicate points that
//! integer rounding produces.

pub fn parse(spec: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(format!("empty token in dimension grid {spec:?}"));
        }
        expand(token, &mut out)?;
    }
    if out.is_empty() {
        return Err("empty dimension grid".into());
    }
    for pair in out.windows(2) {
        if pair[1] <= pair[0] {
            return Err(format!(
                "dimension grid must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            ));
        }
    }
    Ok(out)
}

fn expand(token: &str, out: &mut Vec<usize>) -> Result<(), String> {
    let parts: Vec<&str> = token.split(':').collect();
    match parts.as_slice() {
        [one] => {
            out.push(int(one)?);
            Ok(())
        }
        [a, b] => {
            let (a, b) = (int(a)?, int(b)?);
            if b < a {
                return Err(format!("range {token:?} runs backwards"));
            }
            out.extend(a..=b);
            Ok(())
        }
        [a, b, kind, count] => {
            if *kind != "geometric" {
                return Err(format!(
                    "unknown grid kind {kind:?} in {token:?}; only \"geometric\" is supported"
                ));
            }
            let (a, b) = (int(a)?, int(b)?);
            let count: usize = count
                .parse()
                .map_err(|_| format!("bad point count {count:?} in {token:?}"))?;
            if a == 0 || b <= a || count < 2 {
                return Err(format!(
                    "geometric grid needs 0 < start < end and at least 2 points, got {token:?}"
                ));
            }
            let (la, lb) = ((a as f64).ln(), (b as f64).ln());
            let mut prev = 0usize;
            for i in 0..count {
                let t = i as f64 / (count - 1) as f64;
                let v = ((la + t * (lb - la)).exp().round() as usize).clamp(a, b);
                if v > prev {
                    out.push(v);
                    prev = v;
                }
            }
            Ok(())
        }
        _ => Err(format!("cannot parse grid token {token:?}")),
    }
}

/// Integer endpoint, accepting float notation like `1e6` or `2.5e3`.
fn int(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !f.is_finite() || !(0.0..=1e12).contains(&f) {
        return Err(format!("endpoint out of range: {s:?}"));
    }
    Ok(f.round() as usize)
}
