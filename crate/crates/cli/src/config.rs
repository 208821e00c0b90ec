use std::path::Path;

use dtb_core::forward::{Medium, Medium1D, Medium2D, Pulse, Solver, DEFAULT_SUBSTEPS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub medium: MediumSpec,
    /// Nonscattering medium used by `dtb`, `invert` and `image`; defaults to
    /// the background of `medium`.
    #[serde(default)]
    pub reference: Option<MediumSpec>,
    pub pulse: PulseSpec,
    pub tau: f64,
    pub n: usize,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Rows below the array excluded from image metrics; defaults to one
    /// central wavelength.
    #[serde(default)]
    pub mute_rows: Option<usize>,
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Spectral,
    Fdtd,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub center_frequency: f64,
    pub bandwidth: f64,
    #[serde(default)]
    pub normalization: Normalization,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Spectrum equal to one at zero frequency.
    #[default]
    UnitDc,
    /// Unit amplitude factor.
    Unit,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MediumSpec {
    #[serde(rename = "1d")]
    OneD { cells: usize, t_ell: f64, profile: Profile },
    #[serde(rename = "2d")]
    TwoD {
        nx: usize,
        ny: usize,
        h: f64,
        sensors: Vec<usize>,
        #[serde(default)]
        background: Background,
        #[serde(default)]
        inclusions: Vec<Inclusion>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `values[i]` holds on `[edges[i-1], edges[i])`.
    Layers {
        edges: Vec<f64>,
        values: Vec<f64>,
    },
    Gaussians {
        background: f64,
        bumps: Vec<Bump>,
    },
    /// Piecewise-linear interpolation of equispaced samples over `[0, t_ell]`.
    Samples {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Background {
    pub sigma: f64,
    pub c: f64,
}

impl Default for Background {
    fn default() -> Self {
        Self { sigma: 1.0, c: 1.0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Inclusion {
    Disk {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        c: Option<f64>,
    },
    Rectangle {
        x: [f64; 2],
        z: [f64; 2],
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        c: Option<f64>,
    },
}

impl Inclusion {
    fn contains(&self, x: f64, z: f64) -> bool {
        match self {
            Inclusion::Disk { center, radius, .. } => {
                (x - center[0]).powi(2) + (z - center[1]).powi(2) <= radius * radius
            }
            Inclusion::Rectangle { x: xr, z: zr, .. } => x >= xr[0] && x <= xr[1] && z >= zr[0] && z <= zr[1],
        }
    }

    fn fields(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Inclusion::Disk { sigma, c, .. } | Inclusion::Rectangle { sigma, c, .. } => (*sigma, *c),
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::validation(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::validation(path.display().to_string(), e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(CliError::validation(
                "version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version),
            ));
        }
        positive("tau", self.tau)?;
        if self.n == 0 {
            return Err(CliError::validation("n", "ROM order must be at least 1"));
        }
        positive("pulse.center_frequency", self.pulse.center_frequency)?;
        positive("pulse.bandwidth", self.pulse.bandwidth)?;
        if self.substeps < 8 {
            return Err(CliError::validation("substeps", format!("need at least 8, got {}", self.substeps)));
        }
        self.medium.validate("medium")?;
        if let Some(r) = &self.reference {
            r.validate("reference")?;
            if std::mem::discriminant(r) != std::mem::discriminant(&self.medium) {
                return Err(CliError::validation("reference.kind", "must match the dimension of `medium`"));
            }
        }
        Ok(())
    }

    pub fn pulse(&self) -> Result<Pulse> {
        let p = Pulse::new(self.pulse.center_frequency, self.pulse.bandwidth)?;
        Ok(match self.pulse.normalization {
            Normalization::UnitDc => p.unit_dc(),
            Normalization::Unit => p,
        })
    }

    pub fn solver(&self) -> Solver {
        match self.solver {
            SolverKind::Spectral => Solver::Spectral,
            SolverKind::Fdtd => Solver::Fdtd { substeps: self.substeps },
        }
    }

    pub fn medium(&self) -> Result<Medium> {
        self.medium.build()
    }

    pub fn reference(&self) -> Result<Medium> {
        match &self.reference {
            Some(r) => r.build(),
            None => self.medium.background().build(),
        }
    }

    /// Nodes of a 2D medium that lie inside any inclusion.
    pub fn support(&self) -> Option<Vec<bool>> {
        match &self.medium {
            MediumSpec::TwoD { nx, ny, h, inclusions, .. } => Some(
                (0..nx * ny)
                    .map(|k| {
                        let (x, z) = (((k % nx) + 1) as f64 * h, (k / nx) as f64 * h);
                        inclusions.iter().any(|inc| inc.contains(x, z))
                    })
                    .collect(),
            ),
            MediumSpec::OneD { .. } => None,
        }
    }

    pub fn mute_rows(&self) -> usize {
        let (h, c) = match &self.medium {
            MediumSpec::TwoD { h, background, .. } => (*h, background.c),
            MediumSpec::OneD { .. } => (1.0, 1.0),
        };
        self.mute_rows
            .unwrap_or_else(|| (2.0 * std::f64::consts::PI * c / (self.pulse.center_frequency * h)).ceil() as usize)
    }
}

impl MediumSpec {
    fn validate(&self, at: &str) -> Result<()> {
        match self {
            MediumSpec::OneD { cells, t_ell, profile } => {
                if *cells == 0 {
                    return Err(CliError::validation(format!("{at}.cells"), "must be at least 1"));
                }
                positive(&format!("{at}.t_ell"), *t_ell)?;
                profile.validate(&format!("{at}.profile"))
            }
            MediumSpec::TwoD { nx, ny, h, sensors, background, inclusions } => {
                if *nx == 0 || *ny == 0 {
                    return Err(CliError::validation(format!("{at}.nx"), "grid dimensions must be positive"));
                }
                positive(&format!("{at}.h"), *h)?;
                if sensors.is_empty() {
                    return Err(CliError::validation(format!("{at}.sensors"), "need at least one sensor"));
                }
                for (k, &s) in sensors.iter().enumerate() {
                    if s >= *nx {
                        return Err(CliError::validation(
                            format!("{at}.sensors[{k}]"),
                            format!("column {s} is outside the grid of width {nx}"),
                        ));
                    }
                    if sensors[..k].contains(&s) {
                        return Err(CliError::validation(
                            format!("{at}.sensors[{k}]"),
                            format!("duplicate column {s}"),
                        ));
                    }
                }
                positive(&format!("{at}.background.sigma"), background.sigma)?;
                positive(&format!("{at}.background.c"), background.c)?;
                for (k, inc) in inclusions.iter().enumerate() {
                    let p = format!("{at}.inclusions[{k}]");
                    match inc {
                        Inclusion::Disk { radius, .. } => positive(&format!("{p}.radius"), *radius)?,
                        Inclusion::Rectangle { x, z, .. } => {
                            if !(x[0] <= x[1] && z[0] <= z[1]) {
                                return Err(CliError::validation(p, "rectangle bounds must be ordered"));
                            }
                        }
                    }
                    let (sigma, c) = inc.fields();
                    if let Some(s) = sigma {
                        positive(&format!("{at}.inclusions[{k}].sigma"), s)?;
                    }
                    if let Some(c) = c {
                        positive(&format!("{at}.inclusions[{k}].c"), c)?;
                    }
                }
                Ok(())
            }
        }
    }

    fn background(&self) -> MediumSpec {
        match self {
            MediumSpec::OneD { cells, t_ell, .. } => {
                MediumSpec::OneD { cells: *cells, t_ell: *t_ell, profile: Profile::Constant { value: 1.0 } }
            }
            MediumSpec::TwoD { nx, ny, h, sensors, background, .. } => MediumSpec::TwoD {
                nx: *nx,
                ny: *ny,
                h: *h,
                sensors: sensors.clone(),
                background: background.clone(),
                inclusions: Vec::new(),
            },
        }
    }

    pub fn build(&self) -> Result<Medium> {
        match self {
            MediumSpec::OneD { cells, t_ell, profile } => {
                Ok(Medium1D::from_profile(*cells, *t_ell, |t| profile.eval(t, *t_ell))?.into())
            }
            MediumSpec::TwoD { nx, ny, h, sensors, background, inclusions } => {
                let field = |x: f64, z: f64| {
                    let hit = inclusions.iter().find(|inc| inc.contains(x, z));
                    let (s, c) = hit.map_or((None, None), |inc| inc.fields());
                    (s.unwrap_or(background.sigma), c.unwrap_or(background.c))
                };
                Ok(Medium2D::from_fn(*nx, *ny, *h, sensors.clone(), field)?.into())
            }
        }
    }
}

impl Profile {
    fn validate(&self, at: &str) -> Result<()> {
        match self {
            Profile::Constant { value } => positive(&format!("{at}.value"), *value),
            Profile::Layers { edges, values } => {
                if values.len() != edges.len() + 1 {
                    return Err(CliError::validation(
                        format!("{at}.values"),
                        format!("need {} values for {} edges, got {}", edges.len() + 1, edges.len(), values.len()),
                    ));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(CliError::validation(format!("{at}.edges"), "must be strictly increasing"));
                }
                for (k, &v) in values.iter().enumerate() {
                    positive(&format!("{at}.values[{k}]"), v)?;
                }
                Ok(())
            }
            Profile::Gaussians { background, bumps } => {
                positive(&format!("{at}.background"), *background)?;
                for (k, b) in bumps.iter().enumerate() {
                    positive(&format!("{at}.bumps[{k}].width"), b.width)?;
                }
                Ok(())
            }
            Profile::Samples { values } => {
                if values.len() < 2 {
                    return Err(CliError::validation(format!("{at}.values"), "need at least two samples"));
                }
                for (k, &v) in values.iter().enumerate() {
                    positive(&format!("{at}.values[{k}]"), v)?;
                }
                Ok(())
            }
        }
    }

    fn eval(&self, t: f64, t_ell: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Layers { edges, values } => values[edges.iter().filter(|&&e| t >= e).count()],
            Profile::Gaussians { background, bumps } => {
                background
                    + bumps.iter().map(|b| b.amplitude * (-((t - b.center) / b.width).powi(2)).exp()).sum::<f64>()
            }
            Profile::Samples { values } => {
                let s = (t / t_ell).clamp(0.0, 1.0) * (values.len() - 1) as f64;
                let i = (s.floor() as usize).min(values.len() - 2);
                let w = s - i as f64;
                (1.0 - w) * values[i] + w * values[i + 1]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| CliError::validation("<json>", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    const LAYERED: &str = r#"{
        "version": 1,
        "medium": {"kind": "1d", "cells": 200, "t_ell": 10.0,
                   "profile": {"type": "layers", "edges": [2.0, 4.0], "values": [1.0, 2.0, 1.0]}},
        "pulse": {"center_frequency": 1.2, "bandwidth": 0.6},
        "tau": 1.0, "n": 4
    }"#;

    #[test]
    fn layered_profile_evaluates_piecewise() {
        let c = parse(LAYERED).unwrap();
        let MediumSpec::OneD { profile, .. } = &c.medium else { panic!() };
        assert_eq!(profile.eval(1.0, 10.0), 1.0);
        assert_eq!(profile.eval(3.0, 10.0), 2.0);
        assert_eq!(profile.eval(4.0, 10.0), 1.0);
        assert_eq!(c.solver(), Solver::Spectral);
        assert_eq!(c.pulse.normalization, Normalization::UnitDc);
    }

    #[test]
    fn validation_reports_the_path() {
        let bad = LAYERED.replace("[1.0, 2.0, 1.0]", "[1.0, -2.0, 1.0]");
        match parse(&bad) {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "medium.profile.values[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = LAYERED.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(parse(&bad), Err(CliError::Validation { path, .. }) if path == "version"));
        let bad = LAYERED.replace("\"n\": 4", "\"n\": 4, \"extra\": 1");
        assert!(matches!(parse(&bad), Err(CliError::Validation { .. })));
    }

    #[test]
    fn samples_interpolate_linearly() {
        let p = Profile::Samples { values: vec![1.0, 3.0] };
        assert_eq!(p.eval(5.0, 10.0), 2.0);
        assert_eq!(p.eval(20.0, 10.0), 3.0);
    }

    #[test]
    fn inclusions_override_the_background_in_order() {
        let text = r#"{
            "version": 1,
            "medium": {"kind": "2d", "nx": 10, "ny": 8, "h": 1.0, "sensors": [2, 5],
                       "inclusions": [{"shape": "disk", "center": [5.0, 4.0], "radius": 1.0, "sigma": 2.0},
                                      {"shape": "rectangle", "x": [0.0, 10.0], "z": [3.0, 5.0], "c": 1.5}]},
            "pulse": {"center_frequency": 0.6, "bandwidth": 0.3},
            "tau": 2.0, "n": 3
        }"#;
        let c = parse(text).unwrap();
        let Medium::TwoD(m) = c.medium().unwrap() else { panic!() };
        let centre = m.index(4, 4);
        assert_eq!((m.sigma()[centre], m.c()[centre]), (2.0, 1.0));
        let side = m.index(0, 4);
        assert_eq!((m.sigma()[side], m.c()[side]), (1.0, 1.5));
        let Medium::TwoD(r) = c.reference().unwrap() else { panic!() };
        assert!(r.sigma().iter().chain(r.c()).all(|&v| v == 1.0));
        assert_eq!(
            c.support().unwrap().iter().filter(|&&s| s).count(),
            m.sigma().iter().zip(m.c()).filter(|(s, c)| **s != 1.0 || **c != 1.0).count()
        );
        assert_eq!(c.mute_rows(), 11);
    }
}
