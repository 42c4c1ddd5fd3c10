//! Flag value parsers.

use std::str::FromStr;

use rabiq::model::CouplingUnit;
use rabiq::sweep::{Axis, AxisParam, AxisScale};

/// `a:b:n`, an inclusive range of `n` evenly spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let last = self.n - 1;
        (0..self.n)
            .map(|i| match i {
                0 => self.min,
                i if i == last => self.max,
                i => self.min + (self.max - self.min) * i as f64 / last as f64,
            })
            .collect()
    }
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected a:b:n, got {s:?}"));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number {t:?} in {s:?}"))
        };
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad point count {:?} in {s:?}", parts[2]))?;
        if n == 0 {
            return Err("point count must be positive".into());
        }
        if n > 1 && max <= min {
            return Err(format!("range {s:?} must have b > a"));
        }
        Ok(Self { min, max, n })
    }
}

/// `NAME=a:b:n[:gs|gt][:log]` for inline sweep axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisArg(pub Axis);

impl FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=a:b:n, got {s:?}"))?;
        let name = match name.trim() {
            "g1" => AxisParam::G1,
            "g2" => AxisParam::G2,
            "g2_tilde" => AxisParam::G2Tilde,
            "omega" => AxisParam::Omega,
            other => return Err(format!("unknown axis parameter {other:?}")),
        };
        let mut fields: Vec<&str> = rest.split(':').collect();
        let mut unit = CouplingUnit::Energy;
        let mut scale = AxisScale::Linear;
        while fields.len() > 3 {
            match fields.pop().map(str::trim) {
                Some("gs") => unit = CouplingUnit::Gs,
                Some("gt") => unit = CouplingUnit::Gt,
                Some("log") => scale = AxisScale::Log,
                Some("linear") => scale = AxisScale::Linear,
                Some(other) => return Err(format!("unknown axis option {other:?}")),
                None => unreachable!(),
            }
        }
        let range: GridRange = fields.join(":").parse()?;
        Ok(AxisArg(
            Axis::new(name, range.min, range.max, range.n)
                .with_unit(unit)
                .with_scale(scale),
        ))
    }
}

/// `FIELD=FILE` for `--svg`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgArg {
    pub field: String,
    pub path: String,
}

impl FromStr for SvgArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once('=') {
            Some((f, p)) if !f.is_empty() && !p.is_empty() => Ok(SvgArg {
                field: f.to_string(),
                path: p.to_string(),
            }),
            _ => Err(format!("expected FIELD=FILE, got {s:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r: GridRange = "0:0.99:100".parse().unwrap();
        assert_eq!(r.values().len(), 100);
        assert_eq!(r.values()[99], 0.99);
        let neg: GridRange = "-8:8:3".parse().unwrap();
        assert_eq!(neg.values(), vec![-8.0, 0.0, 8.0]);
        assert!("1:0:5".parse::<GridRange>().is_err());
        assert!("0:1".parse::<GridRange>().is_err());
        assert!("0:1:x".parse::<GridRange>().is_err());
    }

    #[test]
    fn axes() {
        let AxisArg(a) = "g1=0:2:21:gs".parse().unwrap();
        assert_eq!(
            (a.name, a.n_points, a.unit),
            (AxisParam::G1, 21, CouplingUnit::Gs)
        );
        let AxisArg(b) = "g2_tilde=1e-6:0.5:13:gt:log".parse().unwrap();
        assert_eq!((b.unit, b.scale), (CouplingUnit::Gt, AxisScale::Log));
        assert!("g3=0:1:3".parse::<AxisArg>().is_err());
        assert!("g1=0:1:3:mm".parse::<AxisArg>().is_err());
    }

    #[test]
    fn svg_pairs() {
        let s: SvgArg = "sigma_z=out/map.svg".parse().unwrap();
        assert_eq!(s.field, "sigma_z");
        assert!("sigma_z".parse::<SvgArg>().is_err());
    }
}
