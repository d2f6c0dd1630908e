//! Parsing of numeric lists used by `--grid`, `--rates` and `--reserve`.

/// `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(format!("range `{spec}` must be start:end:step"));
        };
        let (start, end, step) = (number(start)?, number(end)?, number(step)?);
        if !(step > 0.0) {
            return Err(format!("range `{spec}`: step must be > 0"));
        }
        if end < start {
            return Err(format!("range `{spec}`: end must be >= start"));
        }
        let count = (end - start) / step;
        let n = count.round();
        if (count - n).abs() > 1e-9 * count.max(1.0) {
            return Err(format!("range `{spec}`: (end - start) is not a multiple of step"));
        }
        // Round away accumulated binary noise (0.1 + 2 * 0.05 -> 0.2).
        Ok((0..=n as usize)
            .map(|i| {
                let v = start + step * i as f64;
                format!("{v:.12}").parse().unwrap_or(v)
            })
            .collect())
    } else {
        let values = spec.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty list".into());
        }
        Ok(values)
    }
}

/// `AXISxAXIS`: compute reservations by storage reservations, row-major.
pub fn parse_grid(spec: &str) -> Result<Vec<(f64, f64)>, String> {
    let Some((c, m)) = spec.split_once('x') else {
        return Err(format!("grid `{spec}` must look like 0:20:5x0:40:10"));
    };
    let cs = parse_axis(c)?;
    let ms = parse_axis(m)?;
    Ok(cs.iter().flat_map(|&c| ms.iter().map(move |&m| (c, m))).collect())
}

/// `C_r,M_r`
pub fn parse_pair(spec: &str) -> Result<(f64, f64), String> {
    match parse_axis(spec)?.as_slice() {
        [a, b] if !spec.contains(':') => Ok((*a, *b)),
        _ => Err(format!("`{spec}` must be two comma-separated numbers")),
    }
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}
