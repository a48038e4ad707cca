//! Run configuration: flags merged over an optional `key=value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use carousel_core::polygon::CurveSpec;
use carousel_core::scalar::{AngleState, H_BOUNDARY, H_MAX};

/// Distance kept from the ends of the oscillatory energy range when clamping.
pub const CLAMP_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRange {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

impl FromStr for EnergyRange {
    type Err = UsageError;

    /// `lo:hi:count` or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || UsageError(format!("bad energy grid '{s}', expected lo:hi:count or H"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [h] => {
                let h: f64 = h.parse().map_err(|_| bad())?;
                Ok(Self {
                    low: h,
                    high: h,
                    count: 1,
                })
            }
            [lo, hi, n] => {
                let low: f64 = lo.parse().map_err(|_| bad())?;
                let high: f64 = hi.parse().map_err(|_| bad())?;
                let count: usize = n.parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err(UsageError("energy grid count must be at least 1".into()));
                }
                if !(low.is_finite() && high.is_finite()) || high < low {
                    return Err(bad());
                }
                Ok(Self { low, high, count })
            }
            _ => Err(bad()),
        }
    }
}

impl EnergyRange {
    pub const fn new(low: f64, high: f64, count: usize) -> Self {
        Self { low, high, count }
    }

    /// Pulls both ends into `(H0, H_max)`, returning a warning when anything
    /// moved.
    pub fn clamped(self) -> (Self, Option<String>) {
        let lo_min = H_BOUNDARY + CLAMP_MARGIN;
        let hi_max = H_MAX - CLAMP_MARGIN;
        let low = self.low.clamp(lo_min, hi_max);
        let high = self.high.clamp(lo_min, hi_max);
        let out = Self { low, high, ..self };
        if out == self {
            (out, None)
        } else {
            (
                out,
                Some(format!(
                    "warning: energy grid {}:{} clamped to {low}:{high}",
                    self.low, self.high
                )),
            )
        }
    }
}

pub fn parse_start(s: &str) -> Result<AngleState, UsageError> {
    let bad = || UsageError(format!("bad start state '{s}', expected x,y"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    Ok(AngleState::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn parse_levels(s: &str) -> Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| UsageError(format!("bad level list '{s}'")))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(UsageError(format!("unknown format '{other}', expected csv or json"))),
        }
    }
}

/// Raw settings, every field optional so that flags can be layered over a
/// config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub h: Option<String>,
    pub step: Option<String>,
    pub out: Option<String>,
    pub curve: Option<String>,
    pub n: Option<String>,
    pub kmax: Option<String>,
    pub mmax: Option<String>,
    pub format: Option<String>,
    pub seed: Option<String>,
    pub random: Option<String>,
    pub start: Option<String>,
    pub levels: Option<String>,
    pub tolerances: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key=value` lines; `#` starts a comment and `tol.NAME` sets a
    /// named tolerance.
    pub fn parse_file(text: &str) -> Result<Self, UsageError> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                UsageError(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim().to_string());
            let slot = match key {
                "h" => &mut s.h,
                "step" => &mut s.step,
                "out" => &mut s.out,
                "curve" => &mut s.curve,
                "n" => &mut s.n,
                "kmax" => &mut s.kmax,
                "mmax" => &mut s.mmax,
                "format" => &mut s.format,
                "seed" => &mut s.seed,
                "random" => &mut s.random,
                "start" => &mut s.start,
                "levels" => &mut s.levels,
                _ => match key.strip_prefix("tol.") {
                    Some(name) => {
                        s.tolerances.insert(name.to_string(), value);
                        continue;
                    }
                    None => {
                        return Err(UsageError(format!(
                            "config line {}: unknown key '{key}'",
                            lineno + 1
                        )))
                    }
                },
            };
            *slot = Some(value);
        }
        Ok(s)
    }

    pub fn load(path: &str) -> Result<Self, UsageError> {
        let text = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config '{path}': {e}")))?;
        Self::parse_file(&text)
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        let mut tolerances = base.tolerances;
        tolerances.extend(self.tolerances);
        Settings {
            h: self.h.or(base.h),
            step: self.step.or(base.step),
            out: self.out.or(base.out),
            curve: self.curve.or(base.curve),
            n: self.n.or(base.n),
            kmax: self.kmax.or(base.kmax),
            mmax: self.mmax.or(base.mmax),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
            random: self.random.or(base.random),
            start: self.start.or(base.start),
            levels: self.levels.or(base.levels),
            tolerances,
        }
    }
}

/// Validated configuration shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub h_grid: Option<EnergyRange>,
    pub step: f64,
    pub out: Option<PathBuf>,
    pub curve: Option<CurveSpec>,
    pub n: usize,
    pub kmax: u32,
    pub mmax: u32,
    pub format: Option<Format>,
    pub seed: u64,
    pub random: Option<usize>,
    pub start: Option<AngleState>,
    pub levels: Option<Vec<f64>>,
    pub tolerances: BTreeMap<String, f64>,
}

fn parse_field<T: FromStr>(name: &str, v: Option<&String>, default: T) -> Result<T, UsageError> {
    match v {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("invalid value '{s}' for {name}"))),
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, UsageError> {
        let step: f64 = parse_field("step", s.step.as_ref(), 1e-3)?;
        if !(step > 0.0 && step < 0.5) {
            return Err(UsageError(format!("step {step} must lie in (0, 0.5)")));
        }
        let n: usize = parse_field("n", s.n.as_ref(), 6)?;
        let kmax: u32 = parse_field("kmax", s.kmax.as_ref(), 10)?;
        let mmax: u32 = parse_field("mmax", s.mmax.as_ref(), 10)?;
        if kmax == 0 || mmax == 0 {
            return Err(UsageError("kmax and mmax must be at least 1".into()));
        }
        let mut tolerances = BTreeMap::from([("audit_slack".to_string(), 1e-12)]);
        for (k, v) in &s.tolerances {
            let value: f64 = v
                .parse()
                .map_err(|_| UsageError(format!("invalid tolerance {k}={v}")))?;
            tolerances.insert(k.clone(), value);
        }
        Ok(Self {
            h_grid: s.h.as_deref().map(str::parse).transpose()?,
            step,
            out: s.out.as_ref().map(PathBuf::from),
            curve: s
                .curve
                .as_deref()
                .map(|c| c.parse::<CurveSpec>().map_err(|e| UsageError(e.to_string())))
                .transpose()?,
            n,
            kmax,
            mmax,
            format: s.format.as_deref().map(str::parse).transpose()?,
            seed: parse_field("seed", s.seed.as_ref(), 0)?,
            random: s
                .random
                .as_ref()
                .map(|r| parse_field("random", Some(r), 0usize))
                .transpose()?,
            start: s.start.as_deref().map(parse_start).transpose()?,
            levels: s.levels.as_deref().map(parse_levels).transpose()?,
            tolerances,
        })
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(0.0)
    }

    /// Configured grid or `default`, clamped into the oscillatory range.
    pub fn grid_or(&self, default: EnergyRange) -> (EnergyRange, Option<String>) {
        self.h_grid.unwrap_or(default).clamped()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_range_forms() {
        let r: EnergyRange = "2.42:2.59:50".parse().unwrap();
        assert_eq!(r, EnergyRange::new(2.42, 2.59, 50));
        let r: EnergyRange = "2.5".parse().unwrap();
        assert_eq!(r.count, 1);
        assert!("2.5:2.4:3".parse::<EnergyRange>().is_err());
        assert!("2.4:2.5:0".parse::<EnergyRange>().is_err());
        assert!("2.4:2.5".parse::<EnergyRange>().is_err());
    }

    #[test]
    fn clamping_warns() {
        let (r, w) = EnergyRange::new(2.0, 3.0, 5).clamped();
        assert!(w.is_some());
        assert_eq!(r.low, H_BOUNDARY + CLAMP_MARGIN);
        assert_eq!(r.high, H_MAX - CLAMP_MARGIN);
        let (_, w) = EnergyRange::new(2.45, 2.5, 5).clamped();
        assert!(w.is_none());
    }

    #[test]
    fn file_then_flags() {
        let file = Settings::parse_file("# comment\nh = 2.45:2.5:4\nstep=0.01\ntol.audit_slack=1e-10\n")
            .unwrap();
        let flags = Settings {
            step: Some("0.002".into()),
            ..Settings::default()
        };
        let merged = flags.over(file);
        let cfg = RunConfig::from_settings(&merged).unwrap();
        assert_eq!(cfg.step, 0.002);
        assert_eq!(cfg.h_grid, Some(EnergyRange::new(2.45, 2.5, 4)));
        assert_eq!(cfg.tolerance("audit_slack"), 1e-10);
        assert!(Settings::parse_file("bogus=1").is_err());
        assert!(Settings::parse_file("novalue").is_err());
    }

    #[test]
    fn start_and_levels() {
        let s = parse_start("2.0, 2.2").unwrap();
        assert_eq!((s.x, s.y), (2.0, 2.2));
        assert!(parse_start("2.0").is_err());
        assert_eq!(parse_levels("2.5,2.45").unwrap(), vec![2.5, 2.45]);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let s = Settings {
            step: Some("-1".into()),
            ..Settings::default()
        };
        assert!(RunConfig::from_settings(&s).is_err());
        let s = Settings {
            format: Some("xml".into()),
            ..Settings::default()
        };
        assert!(RunConfig::from_settings(&s).is_err());
    }
}
