//! Flat `key = value` configuration files and the range syntax used for level grids.
//!
//! Blank lines and lines starting with `#` are ignored. Recognized keys:
//! d, alpha, t, m, mode, family, beta, kappa, c_small, seed, radius, delta_small,
//! eps_atom, region.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::levy::{LevyMeasure, Mode, ModelConfig};
use crate::sim::SimWindow;
use crate::tails::RegionA;

const KEYS: &[&str] = &[
    "d", "alpha", "t", "m", "mode", "family", "beta", "kappa", "c_small", "seed", "radius", "delta_small", "eps_atom",
    "region",
];

/// One parsed entry with its source position (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub value: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub entries: BTreeMap<String, Entry>,
    pub model: ModelConfig,
    pub seed: u64,
    pub window: Option<SimWindow>,
    pub region: Option<RegionA>,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Splits the text into entries, checking key names and duplicates.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let Some(eq) = raw.find('=') else {
            return Err(perr(line, raw.trim_end().chars().count() + 1, "expected `key = value`"));
        };
        let key = raw[..eq].trim();
        let key_col = raw[..indent].chars().count() + 1;
        if key.is_empty() {
            return Err(perr(line, key_col, "missing key before `=`"));
        }
        if !KEYS.contains(&key) {
            return Err(perr(line, key_col, format!("unknown key `{key}`")));
        }
        let after = &raw[eq + 1..];
        // trailing `# ...` is a comment
        let value = after.split('#').next().unwrap_or("").trim();
        let value_col = raw[..eq + 1].chars().count() + (after.chars().count() - after.trim_start().chars().count()) + 1;
        if value.is_empty() {
            return Err(perr(line, value_col, format!("missing value for `{key}`")));
        }
        if out.contains_key(key) {
            return Err(perr(line, key_col, format!("duplicate key `{key}`")));
        }
        out.insert(key.to_string(), Entry { value: value.to_string(), line, column: value_col });
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(e: &BTreeMap<String, Entry>, key: &str) -> Result<Option<T>> {
    match e.get(key) {
        None => Ok(None),
        Some(en) => en
            .value
            .parse::<T>()
            .map(Some)
            .map_err(|_| perr(en.line, en.column, format!("cannot read `{}` as a number for `{key}`", en.value))),
    }
}

fn required<T: std::str::FromStr>(e: &BTreeMap<String, Entry>, key: &str) -> Result<T> {
    num(e, key)?.ok_or_else(|| perr(0, 0, format!("missing required key `{key}`")))
}

fn at(e: &BTreeMap<String, Entry>, key: &str, err: Error) -> Error {
    match (e.get(key), err) {
        (Some(en), Error::InvalidArgument(m)) => perr(en.line, en.column, m),
        (_, other) => other,
    }
}

fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| invalid(format!("cannot read `{v}` as a number"))))
        .collect()
}

/// `ball:c1,c2:radius` or `box:lo1,lo2:hi1,hi2`
pub fn parse_region(s: &str) -> Result<RegionA> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["ball", c, r] => RegionA::ball(floats(c)?, r.parse().map_err(|_| invalid(format!("bad radius `{r}`")))?),
        ["box", lo, hi] => RegionA::cube(floats(lo)?, floats(hi)?),
        _ => Err(invalid(format!("region must be `ball:center:radius` or `box:lo:hi`, got `{s}`"))),
    }
}

/// `start:stop:logspace:count`, `start:stop:linspace:count`, or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let p: Vec<&str> = s.split(':').map(str::trim).collect();
        if p.len() != 4 {
            return Err(invalid(format!("range must be start:stop:logspace|linspace:count, got `{s}`")));
        }
        let a: f64 = p[0].parse().map_err(|_| invalid(format!("bad range start `{}`", p[0])))?;
        let b: f64 = p[1].parse().map_err(|_| invalid(format!("bad range stop `{}`", p[1])))?;
        let n: usize = p[3].parse().map_err(|_| invalid(format!("bad range count `{}`", p[3])))?;
        if n == 0 || !(a.is_finite() && b.is_finite()) {
            return Err(invalid("range needs finite ends and a positive count"));
        }
        return match p[2] {
            "logspace" => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(invalid("logspace needs positive ends"));
                }
                Ok(crate::tails::logspace(a, b, n))
            }
            "linspace" => Ok(if n == 1 { vec![a] } else { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() }),
            other => Err(invalid(format!("unknown spacing `{other}`"))),
        };
    }
    let v = floats(s)?;
    if v.is_empty() {
        return Err(invalid("empty list"));
    }
    Ok(v)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let e = parse_entries(text)?;
        let d: usize = required(&e, "d")?;
        let alpha: f64 = required(&e, "alpha")?;
        let t: f64 = num(&e, "t")?.unwrap_or(1.0);
        let m: f64 = num(&e, "m")?.unwrap_or(0.0);
        let mode = match e.get("mode").map(|x| x.value.as_str()) {
            None | Some("noncompensated") | Some("non_compensated") | Some("non-compensated") => Mode::NonCompensated,
            Some("compensated") => Mode::Compensated,
            Some(other) => {
                let en = &e["mode"];
                return Err(perr(en.line, en.column, format!("mode must be noncompensated or compensated, got `{other}`")));
            }
        };
        let beta: f64 = required(&e, "beta")?;
        let levy = match e.get("family").map(|x| x.value.as_str()) {
            None | Some("pareto") | Some("pareto_tail") => LevyMeasure::pareto(beta).map_err(|x| at(&e, "beta", x))?,
            Some("power_density") => {
                let kappa: f64 = required(&e, "kappa")?;
                let c: f64 = num(&e, "c_small")?.unwrap_or(1.0);
                LevyMeasure::power_density(kappa, beta, c).map_err(|x| at(&e, "kappa", x))?
            }
            Some(other) => {
                let en = &e["family"];
                return Err(perr(en.line, en.column, format!("family must be pareto or power_density, got `{other}`")));
            }
        };
        let model = ModelConfig::new(d, alpha, t, m, levy, mode).map_err(|x| at(&e, "d", x))?;
        let seed: u64 = num(&e, "seed")?.unwrap_or(0);
        let window = match num::<f64>(&e, "radius")? {
            Some(radius) => {
                let w = SimWindow {
                    radius,
                    delta_small: num(&e, "delta_small")?.unwrap_or(0.0),
                    eps_atom: num(&e, "eps_atom")?.unwrap_or(1e-3),
                    seed,
                };
                w.validate().map_err(|x| at(&e, "radius", x))?;
                Some(w)
            }
            None => None,
        };
        let region = match e.get("region") {
            Some(en) => Some(parse_region(&en.value).map_err(|x| at(&e, "region", x))?),
            None => None,
        };
        Ok(Config { entries: e, model, seed, window, region })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// key → value echo in key order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.value.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model() {
        let c = Config::parse("# model\nd = 1\nalpha=1\n  beta = 3\nseed = 7\nregion = ball:0:1\n").unwrap();
        assert_eq!(c.model.d, 1);
        assert_eq!(c.seed, 7);
        assert!(c.region.is_some());
        let c = Config::parse("d = 2 # plane\nalpha = 1.5\nbeta = 3\n").unwrap();
        assert_eq!(c.model.d, 2);
        assert!(Config::parse("d = # none\n").is_err());
    }

    #[test]
    fn reports_position() {
        match Config::parse("d = 1\n  bogus = 2\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match Config::parse("d = 1\nalpha = x\nbeta=3\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 9)),
            other => panic!("{other:?}"),
        }
        match Config::parse("d 1\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ranges() {
        let r = parse_range("1:1e6:logspace:7").unwrap();
        assert_eq!(r.len(), 7);
        assert!((r[6] - 1e6).abs() < 1e-6 && (r[1] - 10.0).abs() < 1e-12);
        assert_eq!(parse_range("2,4,8").unwrap(), vec![2.0, 4.0, 8.0]);
        assert!(parse_range("1:2:cubic:3").is_err());
    }
}
