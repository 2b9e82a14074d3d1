//! Base-point grammar for the command line.
//!
//! Accepted forms:
//!   identity
//!   hecke:<N>                          degree-N periodic orbit base
//!   iwasawa:x=<e>,y=<e>,theta=<e>      explicit coordinates
//!   alpha:<e>,y:<e>,theta:<e>          tangency-point form (theta != 0)
//!
//! Expressions <e> are decimal literals or one of the named constants
//! sqrt2, sqrt3, sqrt5, golden ((sqrt5-1)/2), e, pi, pi/2, pi/3, pi/4, pi/6.

use horolab::sl2::{GroupElement, IwasawaPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

/// Numeric expression: a literal or a named constant.
pub fn parse_expr(s: &str, offset: usize) -> Result<f64, ParseError> {
    let t = s.trim();
    let named = match t {
        "sqrt2" => Some(std::f64::consts::SQRT_2),
        "sqrt3" => Some(3f64.sqrt()),
        "sqrt5" => Some(5f64.sqrt()),
        "golden" => Some((5f64.sqrt() - 1.0) / 2.0),
        "e" => Some(std::f64::consts::E),
        "pi" => Some(std::f64::consts::PI),
        "pi/2" => Some(std::f64::consts::FRAC_PI_2),
        "pi/3" => Some(std::f64::consts::FRAC_PI_3),
        "pi/4" => Some(std::f64::consts::FRAC_PI_4),
        "pi/6" => Some(std::f64::consts::FRAC_PI_6),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v);
    }
    t.parse::<f64>().map_err(|_| {
        err(
            offset,
            format!("expected a number or named constant, got '{t}'"),
        )
    })
}

fn key_value(part: &str, offset: usize, sep: char) -> Result<(&str, &str, usize), ParseError> {
    match part.find(sep) {
        Some(i) => Ok((&part[..i], &part[i + 1..], offset + i + 1)),
        None => Err(err(offset, format!("expected '{sep}' in '{part}'"))),
    }
}

pub fn parse_base_point(spec: &str) -> Result<GroupElement, ParseError> {
    let s = spec.trim();
    if s == "identity" {
        return Ok(GroupElement::IDENTITY);
    }
    if let Some(rest) = s.strip_prefix("hecke:") {
        let n: u64 = rest
            .parse()
            .map_err(|_| err(6, format!("expected an integer degree, got '{rest}'")))?;
        if n == 0 {
            return Err(err(6, "degree must be at least 1"));
        }
        return Ok(GroupElement::a(1.0 / n as f64));
    }
    if let Some(rest) = s.strip_prefix("iwasawa:") {
        let mut x = None;
        let mut y = None;
        let mut theta = None;
        let mut offset = 8;
        for part in rest.split(',') {
            let (k, v, voff) = key_value(part, offset, '=')?;
            let value = parse_expr(v, voff)?;
            match k.trim() {
                "x" => x = Some(value),
                "y" => y = Some(value),
                "theta" => theta = Some(value),
                other => return Err(err(offset, format!("unknown field '{other}'"))),
            }
            offset += part.len() + 1;
        }
        let (Some(x), Some(y), Some(theta)) = (x, y, theta) else {
            return Err(err(8, "iwasawa form needs x=, y= and theta="));
        };
        let p = IwasawaPoint::new(x, y, theta)
            .map_err(|e| err(8, format!("invalid coordinates: {e}")))?;
        return Ok(p.to_group());
    }
    if let Some(rest) = s.strip_prefix("alpha:") {
        // alpha:<e>,y:<e>,theta:<e>
        let mut parts = rest.split(',');
        let alpha_part = parts.next().unwrap_or("");
        let alpha = parse_expr(alpha_part, 6)?;
        let mut y = 1.0;
        let mut theta = std::f64::consts::FRAC_PI_2;
        let mut offset = 6 + alpha_part.len() + 1;
        for part in parts {
            let (k, v, voff) = key_value(part, offset, ':')?;
            let value = parse_expr(v, voff)?;
            match k.trim() {
                "y" => y = value,
                "theta" => theta = value,
                other => return Err(err(offset, format!("unknown field '{other}'"))),
            }
            offset += part.len() + 1;
        }
        if theta.sin() == 0.0 {
            return Err(err(6, "tangency form needs theta != 0"));
        }
        let x = alpha + y * theta.cos() / theta.sin();
        let p = IwasawaPoint::new(x, y, theta)
            .map_err(|e| err(6, format!("invalid coordinates: {e}")))?;
        return Ok(p.to_group());
    }
    Err(err(
        0,
        format!(
            "unknown base-point form '{s}'; expected identity, hecke:<N>, iwasawa:..., alpha:..."
        ),
    ))
}
