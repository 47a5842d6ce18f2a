use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::robust::DensityParams;

/// Every constant of the construction. Defaults are the asymptotic values;
/// with `scaled` set, thresholds that would be vacuous at small `n` are
/// raised to at least one vertex or edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    /// `p = n^-reserve_exp`.
    pub reserve_exp: f64,
    /// `θ = n^-theta_exp`.
    pub theta_exp: f64,
    pub min_deg_coef: f64,
    pub trim_coef: f64,
    /// Small-set bound used while pruning.
    pub epsilon: f64,
    pub density: DensityParams,
    /// Reachability runs at most `step_cap_multiplier · ⌈log2 n⌉` steps.
    pub step_cap_multiplier: f64,
    /// Admissibility floor `d > n^-d_min_exp`, logged only.
    pub d_min_exp: f64,
    pub scaled: bool,
    /// In scaled mode the dense-subpair search starts from this fraction of
    /// each side (highest degrees first).
    pub core_fraction: f64,
    /// Replaces the default reachability floor `4⌈log2 n⌉ + 1`.
    pub theta_floor: Option<usize>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            reserve_exp: 0.32,
            theta_exp: 0.66,
            min_deg_coef: 1e-3,
            trim_coef: 1e-4,
            epsilon: 0.1,
            density: DensityParams::default(),
            step_cap_multiplier: 2.0,
            d_min_exp: 1.0 / 200.0,
            scaled: true,
            core_fraction: 0.5,
            theta_floor: None,
        }
    }
}

pub fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl PipelineParams {
    /// Asymptotic constants with no scaling.
    pub fn unscaled() -> Self {
        PipelineParams {
            scaled: false,
            core_fraction: 1.0,
            ..PipelineParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        let checks = [
            (unit(self.reserve_exp), "reserve_exp must lie in (0, 1)"),
            (unit(self.theta_exp), "theta_exp must lie in (0, 1)"),
            (unit(self.d_min_exp), "d_min_exp must lie in (0, 1)"),
            (unit(self.epsilon), "epsilon must lie in (0, 1)"),
            (self.min_deg_coef > 0.0, "min_deg_coef must be positive"),
            (self.trim_coef > 0.0, "trim_coef must be positive"),
            (self.step_cap_multiplier > 0.0, "step_cap_multiplier must be positive"),
            (
                self.core_fraction > 0.0 && self.core_fraction <= 1.0,
                "core_fraction must lie in (0, 1]",
            ),
            (self.theta_floor != Some(0), "theta_floor must be positive"),
        ];
        if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(Error::Parameter((*msg).into()));
        }
        self.density.validate()
    }

    pub fn reserve_probability(&self, n: usize) -> f64 {
        (n as f64).powf(-self.reserve_exp)
    }

    pub fn theta(&self, n: usize) -> f64 {
        (n as f64).powf(-self.theta_exp)
    }

    pub fn d_min(&self, n: usize) -> f64 {
        (n as f64).powf(-self.d_min_exp)
    }

    /// Minimum number of available-colour edges for reachability.
    pub fn theta_threshold(&self, n: usize, a1: usize) -> usize {
        let base = (self.theta(n) * a1 as f64).ceil() as usize;
        if self.scaled {
            let floor = self.theta_floor.unwrap_or(4 * log2_ceil(n) + 1);
            base.max(floor)
        } else {
            base.max(1)
        }
    }

    pub fn step_cap(&self, n: usize) -> usize {
        ((self.step_cap_multiplier * log2_ceil(n) as f64).ceil() as usize).max(1)
    }

    pub fn effective_min_deg_coef(&self, d: f64, a_prime: usize) -> f64 {
        if self.scaled && a_prime > 0 {
            self.min_deg_coef.max(1.0 / (d * a_prime as f64))
        } else {
            self.min_deg_coef
        }
    }

    /// Vertices trimmed per side of the core.
    pub fn trim_count(&self, d: f64, a1: usize) -> usize {
        let t = (self.trim_coef * d * a1 as f64).ceil() as usize;
        if self.scaled {
            t.max(1)
        } else {
            t
        }
    }

    /// Edge loss above which a core vertex is trimmed first.
    pub fn loss_threshold(&self, d: f64, a1: usize) -> f64 {
        let t = self.trim_coef * d * a1 as f64;
        if self.scaled {
            t.max(1.0)
        } else {
            t
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let params: PipelineParams =
            toml::from_str(text).map_err(|e| Error::Parameter(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params serialize")
    }
}
