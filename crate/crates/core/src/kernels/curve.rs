use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

/// Negative values above this are quadrature noise and are written as 0.
pub const CLIP_TOLERANCE: f64 = 1e-10;

/// Uniform grid `min..=max` with `points` abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || points == 0 || (points > 1 && max <= min) {
            return Err(Error::InvalidParameter(format!(
                "bad grid {min}:{max}:{points}"
            )));
        }
        Ok(Grid { min, max, points })
    }

    pub fn abscissae(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.max
                } else {
                    self.min + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `min:max:points`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("grid must be min:max:points, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let points = parts[2].trim().parse().map_err(|_| bad())?;
        Grid::new(min, max, points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub kind: String,
    pub params: serde_json::Value,
    /// Seconds since the Unix epoch.
    pub generated: u64,
    pub tool_version: String,
    /// Per-point standard errors, for sampled curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl CurveMeta {
    pub fn new(kind: &str, params: serde_json::Value) -> Self {
        CurveMeta {
            kind: kind.to_string(),
            params,
            generated: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            errors: None,
            extra: None,
        }
    }
}

/// Density values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: CurveMeta,
}

impl DensityCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, meta: CurveMeta) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        DensityCurve { grid, values, meta }
    }

    /// Values with noise-level negatives replaced by 0.
    pub fn clipped(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|&v| if v < 0.0 && v >= -CLIP_TOLERANCE { 0.0 } else { v })
            .collect()
    }

    /// `x,rho` CSV; `{}` on `f64` is the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,rho\n");
        for (x, v) in self.grid.iter().zip(self.clipped()) {
            let _ = writeln!(out, "{x},{v}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut copy = self.clone();
        copy.values = self.clipped();
        serde_json::to_string_pretty(&copy).expect("curve serializes")
    }

    pub fn from_csv(text: &str, meta: CurveMeta) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("x,rho") {
            return Err(Error::InvalidParameter("missing x,rho header".into()));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::InvalidParameter(format!("bad CSV row {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number {s:?}")))
            };
            grid.push(parse(x)?);
            values.push(parse(v)?);
        }
        Ok(DensityCurve::new(grid, values, meta))
    }
}
