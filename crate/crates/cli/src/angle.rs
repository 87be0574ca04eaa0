//! Angles on the command line: raw radians ("0.3927") or pi-fractions
//! ("pi/8", "3pi/8", "-pi/4", "2pi").

use std::f64::consts::PI;

/// Parse an angle literal. Accepted forms: a plain float in radians, or
/// `[sign][coefficient]pi[/denominator]` with an optional `*` between the
/// coefficient and `pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err("empty angle".to_string());
    }
    if let Some(pos) = trimmed.find("pi") {
        let (coef_text, rest) = (&trimmed[..pos], &trimmed[pos + 2..]);
        let coef_text = coef_text.strip_suffix('*').unwrap_or(coef_text);
        let coefficient = match coef_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("bad coefficient in angle '{trimmed}'"))?,
        };
        let denominator = match rest {
            "" => 1.0,
            den => den
                .strip_prefix('/')
                .ok_or_else(|| format!("expected '/denominator' in angle '{trimmed}'"))?
                .parse::<f64>()
                .map_err(|_| format!("bad denominator in angle '{trimmed}'"))?,
        };
        if denominator == 0.0 {
            return Err(format!("zero denominator in angle '{trimmed}'"));
        }
        return Ok(coefficient * PI / denominator);
    }
    let value = trimmed
        .parse::<f64>()
        .map_err(|_| format!("bad angle '{trimmed}': expected radians or a pi-fraction"))?;
    if !value.is_finite() {
        return Err(format!("angle '{trimmed}' is not finite"));
    }
    Ok(value)
}

/// Canonical display of an angle: a pi-fraction when one matches within
/// 1e-12, the plain radian value otherwise.
pub fn format_angle(radians: f64) -> String {
    if radians == 0.0 {
        return "0".to_string();
    }
    for denominator in [1u32, 2, 3, 4, 6, 8, 12, 16, 24] {
        let numerator = radians * denominator as f64 / PI;
        let rounded = numerator.round();
        if rounded != 0.0 && (numerator - rounded).abs() <= 1e-12 && rounded.abs() <= 48.0 {
            let n = rounded as i64;
            let coef = match n {
                1 => String::new(),
                -1 => "-".to_string(),
                other => other.to_string(),
            };
            return if denominator == 1 {
                format!("{coef}pi")
            } else {
                format!("{coef}pi/{denominator}")
            };
        }
    }
    format!("{radians}")
}
