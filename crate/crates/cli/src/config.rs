//! Experiment configuration: TOML with dotted keys, or the equivalent JSON.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gibbslab_core::group::{build_octagon, build_schottky, octagon_circumradius, GeneratorSet};
use gibbslab_core::potential::Potential;
use gibbslab_core::DiskPoint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub group: GroupConfig,
    pub potential: PotentialConfig,
    pub orbit: OrbitConfig,
    pub delta: DeltaConfig,
    pub measure: MeasureConfig,
    pub flow: FlowConfig,
    pub cocycle: CocycleConfig,
    pub lemmas: LemmaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("gibbslab-out"),
            group: GroupConfig::default(),
            potential: PotentialConfig::default(),
            orbit: OrbitConfig::default(),
            delta: DeltaConfig::default(),
            measure: MeasureConfig::default(),
            flow: FlowConfig::default(),
            cocycle: CocycleConfig::default(),
            lemmas: LemmaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Octagon,
    Schottky,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupConfig {
    pub kind: GroupKind,
    /// Schottky only.
    pub rank: usize,
    /// Schottky only.
    pub translation_length: f64,
    /// Schottky only; evenly spaced over `[0, pi)` when absent.
    pub axis_angles: Option<Vec<f64>>,
}

impl Default for GroupConfig {
    fn default() -> Self {
        Self {
            kind: GroupKind::Octagon,
            rank: 2,
            translation_length: 4.0,
            axis_angles: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Constant,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Constant only.
    pub level: f64,
    /// Bump only.
    pub amplitude: f64,
    /// Bump only; `0.3 * systole` when absent.
    pub radius: Option<f64>,
    /// Bump only.
    pub center: [f64; 2],
    /// Bump only: a constant added to the bump sum.
    pub offset: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            kind: PotentialKind::Constant,
            level: 0.0,
            amplitude: 0.8,
            radius: None,
            center: [0.0, 0.0],
            offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    pub radius: f64,
    /// Defaults to 2.5 for the octagon and 4 for Schottky groups.
    pub prune_margin: Option<f64>,
    /// The basepoint `x`.
    pub basepoint: [f64; 2],
    /// The orbit point `y`.
    pub orbit_point: [f64; 2],
    pub node_budget: usize,
    /// Step for the potential line integrals.
    pub step: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            radius: 13.0,
            prune_margin: None,
            basepoint: [0.0, 0.0],
            orbit_point: [0.0, 0.0],
            node_budget: 40_000_000,
            step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaConfig {
    /// Regression window `[n0, n1]`; up to seven complete annuli past the first reachable one when absent.
    pub window: Option<[i64; 2]>,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    /// `s = delta_hat + epsilon`.
    pub epsilon: f64,
    /// Atoms are kept in the outer shell `R - shell_width < d <= R`.
    pub shell_width: f64,
    /// Epsilons for the sensitivity report.
    pub sensitivity: Vec<f64>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            shell_width: 3.0,
            sensitivity: vec![0.02, 0.05, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub samples: usize,
    pub horizon: f64,
    pub step: f64,
    pub t_grid: Vec<f64>,
    pub quadrature_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            samples: 12,
            horizon: 200.0,
            step: 0.01,
            t_grid: (2..=8).map(f64::from).collect(),
            quadrature_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CocycleConfig {
    /// The second basepoint `y` of the Radon-Nikodym comparison.
    pub second_basepoint: [f64; 2],
    pub arcs: usize,
    pub arc_half_width: f64,
    pub truncation: f64,
}

impl Default for CocycleConfig {
    fn default() -> Self {
        Self {
            second_basepoint: [0.3, 0.2],
            arcs: 20,
            arc_half_width: 0.05,
            truncation: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub cone_samples: usize,
    /// Largest `d(x, gx)` among the translated basepoints.
    pub max_shift: f64,
    pub inclusion_samples: usize,
    pub inclusion_t_range: [f64; 2],
    pub k_max: u32,
    pub north_south_half_width: f64,
    pub north_south_max_iterations: usize,
    pub bounded_samples: usize,
    pub bounded_t_grid: Vec<f64>,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            cone_samples: 100,
            max_shift: 4.0,
            inclusion_samples: 1000,
            inclusion_t_range: [1.0, 20.0],
            k_max: 5,
            north_south_half_width: 0.3,
            north_south_max_iterations: 50,
            bounded_samples: 6,
            bounded_t_grid: (2..=7).map(f64::from).collect(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a config, choosing JSON for `.json` files and TOML otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group.kind == GroupKind::Schottky && self.potential.kind == PotentialKind::Bump {
            bail!("bump potentials need the octagon group");
        }
        if !(self.orbit.radius > 0.0) {
            bail!("orbit.radius must be positive");
        }
        if !(self.orbit.step > 0.0 && self.flow.step > 0.0) {
            bail!("integration steps must be positive");
        }
        if !(self.measure.epsilon > 0.0 && self.measure.shell_width > 0.0) {
            bail!("measure.epsilon and measure.shell_width must be positive");
        }
        if self.flow.t_grid.windows(2).any(|w| w[1] <= w[0]) || self.lemmas.bounded_t_grid.windows(2).any(|w| w[1] <= w[0]) {
            bail!("time grids must be increasing");
        }
        Ok(())
    }

    /// The config with every defaulted option made explicit.
    pub fn resolved(&self) -> Result<Self> {
        let group = self.build_group()?;
        let mut out = self.clone();
        if out.group.kind == GroupKind::Schottky && out.group.axis_angles.is_none() {
            let k = out.group.rank;
            out.group.axis_angles = Some((0..k).map(|i| PI * i as f64 / k as f64).collect());
        }
        if out.orbit.prune_margin.is_none() {
            out.orbit.prune_margin = Some(self.prune_margin());
        }
        if out.delta.window.is_none() {
            // The first reachable annulus holds only the shortest elements at a single distance, so the
            // window starts one past it, and at most six annuli below the last complete one.
            let complete = (out.orbit.radius - self.prune_margin()).floor() as i64;
            let reach = group.minimal_displacement() - offset(self.orbit.basepoint) - offset(self.orbit.orbit_point);
            let first = (reach.ceil() as i64).max(1) + 1;
            out.delta.window = Some([(complete - 6).max(first), complete]);
        }
        if out.potential.kind == PotentialKind::Bump && out.potential.radius.is_none() {
            out.potential.radius = Some(0.3 * group.systole());
        }
        Ok(out)
    }

    pub fn prune_margin(&self) -> f64 {
        self.orbit.prune_margin.unwrap_or(match self.group.kind {
            GroupKind::Octagon => {
                // Pruning is sound once the margin covers the fundamental domain plus the basepoint offsets.
                let needed = octagon_circumradius() + 2.0 * (offset(self.orbit.basepoint) + offset(self.orbit.orbit_point));
                let rounded = (needed * 20.0).ceil() / 20.0;
                let rounded = if rounded < needed { rounded + 0.05 } else { rounded };
                rounded.max(2.5)
            }
            GroupKind::Schottky => 4.0,
        })
    }

    pub fn build_group(&self) -> Result<GeneratorSet> {
        Ok(match self.group.kind {
            GroupKind::Octagon => build_octagon(),
            GroupKind::Schottky => {
                let k = self.group.rank;
                let angles = self
                    .group
                    .axis_angles
                    .clone()
                    .unwrap_or_else(|| (0..k).map(|i| PI * i as f64 / k as f64).collect());
                build_schottky(k, self.group.translation_length, &angles)?
            }
        })
    }

    pub fn build_potential(&self, group: &GeneratorSet) -> Result<Potential> {
        let p = &self.potential;
        Ok(match p.kind {
            PotentialKind::Constant => Potential::constant(p.level),
            PotentialKind::Bump => {
                let radius = p.radius.unwrap_or(0.3 * group.systole());
                let center = DiskPoint::new(p.center[0], p.center[1])?;
                Potential::bump(group, p.amplitude, radius, center)?.shifted(p.offset)
            }
        })
    }

    pub fn basepoint(&self) -> Result<DiskPoint> {
        Ok(DiskPoint::new(self.orbit.basepoint[0], self.orbit.basepoint[1])?)
    }

    pub fn orbit_point(&self) -> Result<DiskPoint> {
        Ok(DiskPoint::new(self.orbit.orbit_point[0], self.orbit.orbit_point[1])?)
    }
}

/// Hyperbolic distance from the origin to a disk point given by coordinates.
fn offset(p: [f64; 2]) -> f64 {
    2.0 * p[0].hypot(p[1]).atanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_toml_and_json_agree() {
        let toml_text = "seed = 7\ngroup.kind = \"octagon\"\npotential.kind = \"bump\"\npotential.amplitude = 0.5\nflow.t_grid = [2.0, 3.0, 4.0, 5.0]\n";
        let json_text = r#"{"seed": 7, "group": {"kind": "octagon"}, "potential": {"kind": "bump", "amplitude": 0.5},
            "flow": {"t_grid": [2.0, 3.0, 4.0, 5.0]}}"#;
        let a: ExperimentConfig = toml::from_str(toml_text).unwrap();
        let b: ExperimentConfig = serde_json::from_str(json_text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.flow.samples, 12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("group.knd = \"octagon\"").is_err());
        assert!(toml::from_str::<ExperimentConfig>("colour = 3").is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"measure": {"eps": 0.1}}"#).is_err());
    }

    #[test]
    fn resolution_fills_defaults() {
        let mut c = ExperimentConfig::default();
        c.potential.kind = PotentialKind::Bump;
        let r = c.resolved().unwrap();
        assert_eq!(r.orbit.prune_margin, Some(2.5));
        assert_eq!(r.delta.window, Some([5, 10]));
        assert!((r.potential.radius.unwrap() - 0.6770303789797807).abs() < 1e-12);
        c.group.kind = GroupKind::Schottky;
        assert!(c.validate().is_err());
    }
}
