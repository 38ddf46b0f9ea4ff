use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transitions::{WalkFamily, COINED_WINDOW, DEFAULT_GRID};

/// Default `β` window for the ring.
pub const RING_WINDOW: [f64; 2] = [0.1, 1.2];
pub const DEFAULT_STEPS: usize = 500;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Ring,
    Coined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    #[default]
    Beta,
    Qc,
    Size,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// All weight on one basis state (1-based).
    Site(usize),
    Uniform,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Site(1)
    }
}

/// A complete experiment description. Missing optional fields fall back to
/// the documented defaults in [`ExperimentConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Values given on the command line; each one replaces the file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub j3: Option<f64>,
    pub phi: Option<f64>,
    pub length: Option<usize>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        if let Some(m) = o.model {
            self.model = m;
        }
        take!(j1, j2, j3, phi, length, beta, q, grid, out);
        self
    }

    /// Fills every default so the result fully describes the run.
    pub fn resolved(mut self) -> Self {
        self.q.get_or_insert(1.0);
        self.grid.get_or_insert(DEFAULT_GRID);
        self.initial.get_or_insert_with(InitialState::default);
        self.steps.get_or_insert(DEFAULT_STEPS);
        self.scan.get_or_insert_with(ScanKind::default);
        self.out.get_or_insert_with(|| PathBuf::from("out"));
        if self.window.is_none() {
            self.window = Some(match self.model {
                ModelKind::Ring => RING_WINDOW,
                ModelKind::Coined => [COINED_WINDOW.0, COINED_WINDOW.1],
            });
        }
        if self.model == ModelKind::Coined && self.lengths.is_none() {
            self.lengths = Some(vec![3, 4, 5]);
        }
        self
    }

    pub fn family(&self) -> Result<WalkFamily> {
        match self.model {
            ModelKind::Ring => {
                let need =
                    |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("ring model needs `{name}`")));
                WalkFamily::ring(
                    need(self.j1, "j1")?,
                    need(self.j2, "j2")?,
                    need(self.j3, "j3")?,
                    need(self.phi, "phi")?,
                )
            }
            ModelKind::Coined => {
                let l = self
                    .length
                    .ok_or_else(|| Error::Config("coined model needs `L`".into()))?;
                WalkFamily::coined(l)
            }
        }
    }

    pub fn beta(&self) -> Result<f64> {
        let b = self
            .beta
            .ok_or_else(|| Error::Config("this command needs `beta`".into()))?;
        if !b.is_finite() {
            return Err(Error::Config(format!("beta must be finite, got {b}")));
        }
        Ok(b)
    }

    pub fn q(&self) -> Result<f64> {
        let q = self.q.unwrap_or(1.0);
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Config(format!("q must lie in [0, 1], got {q}")));
        }
        Ok(q)
    }

    pub fn window(&self) -> Result<(f64, f64)> {
        let [lo, hi] = self.window.ok_or_else(|| Error::Config("missing `window`".into()))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("window must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }

    pub fn grid(&self) -> Result<usize> {
        let g = self.grid.unwrap_or(DEFAULT_GRID);
        if g < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {g}")));
        }
        Ok(g)
    }

    pub fn steps(&self) -> Result<usize> {
        let s = self.steps.unwrap_or(DEFAULT_STEPS);
        if s > MAX_STEPS {
            return Err(Error::Config(format!("steps {s} exceeds the limit {MAX_STEPS}")));
        }
        Ok(s)
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        self.family()?;
        self.q()?;
        self.grid()?;
        self.steps()?;
        if self.window.is_some() {
            self.window()?;
        }
        Ok(())
    }
}
