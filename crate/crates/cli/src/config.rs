//! Run configuration: a single JSON document, unknown keys rejected.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symbols,
    Kernels,
    Rp,
    Periodize,
    Thermal,
    Gaussian,
    Fock,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Symbols, Suite::Kernels, Suite::Rp, Suite::Periodize, Suite::Thermal, Suite::Gaussian, Suite::Fock];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symbols => "symbols",
            Suite::Kernels => "kernels",
            Suite::Rp => "rp",
            Suite::Periodize => "periodize",
            Suite::Thermal => "thermal",
            Suite::Gaussian => "gaussian",
            Suite::Fock => "fock",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolsConfig {
    pub samples: usize,
    pub velocities: Vec<f64>,
    pub dims: Vec<usize>,
    /// Samples are drawn from `[-range, range]` in every coordinate.
    pub range: f64,
}

impl Default for SymbolsConfig {
    fn default() -> Self {
        SymbolsConfig {
            samples: 10_000,
            velocities: vec![0.0, 0.1, -0.1, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9],
            dims: vec![2, 3],
            range: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsConfig {
    pub grid_points: usize,
    pub spacing: f64,
    pub velocities: Vec<f64>,
    pub tolerance: f64,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        KernelsConfig { grid_points: 64, spacing: 0.1, velocities: vec![0.0, 0.3, -0.6], tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpConfig {
    pub members: usize,
    pub seeds: usize,
    pub velocities: Vec<f64>,
    pub min_eig_tolerance: f64,
    pub isometry_tolerance: f64,
}

impl Default for RpConfig {
    fn default() -> Self {
        RpConfig {
            members: 20,
            seeds: 5,
            velocities: vec![0.0, 0.6, -0.6],
            min_eig_tolerance: 1e-10,
            isometry_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodizeConfig {
    pub betas: Vec<f64>,
    pub velocities: Vec<f64>,
    pub winding_max: usize,
    pub matsubara_max: usize,
    pub tolerance: f64,
    pub torus_beta: f64,
    pub torus_velocity: f64,
    pub torus_lengths: Vec<f64>,
}

impl Default for PeriodizeConfig {
    fn default() -> Self {
        PeriodizeConfig {
            betas: vec![1.0, 2.0, 5.0],
            velocities: vec![0.0, 0.6, -0.6, 0.9],
            winding_max: 64,
            matsubara_max: 10_000,
            tolerance: 1e-8,
            torus_beta: 2.0,
            torus_velocity: 0.6,
            torus_lengths: vec![4.0, 8.0, 16.0, 32.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalConfig {
    pub beta: f64,
    pub velocities: Vec<f64>,
    pub circumference: f64,
    pub mode_cutoff: usize,
    pub kms_tolerance: f64,
    pub modular_tolerance: f64,
    pub commutator_tolerance: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            beta: 2.0,
            velocities: vec![0.0, 0.6, -0.6],
            circumference: 2.0 * PI,
            mode_cutoff: 16,
            kms_tolerance: 1e-10,
            modular_tolerance: 1e-12,
            commutator_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianConfig {
    pub velocities: Vec<f64>,
    pub members: usize,
    pub max_fields: usize,
    pub moment_tolerance: f64,
    pub norm_law_tolerance: f64,
    pub field_functions: usize,
}

impl Default for GaussianConfig {
    fn default() -> Self {
        GaussianConfig {
            velocities: vec![0.0, 0.6, -0.6],
            members: 5,
            max_fields: 8,
            moment_tolerance: 1e-12,
            norm_law_tolerance: 1e-10,
            field_functions: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    pub coupling: f64,
    pub circumference: f64,
    pub mode_cutoff: usize,
    pub max_particles: usize,
    pub refined_mode_cutoff: usize,
    pub refined_max_particles: usize,
    pub dimension_cap: usize,
    pub velocities: Vec<f64>,
    pub spectrum_tolerance: f64,
    pub gibbs_beta: f64,
    pub gibbs_mode_cutoff: usize,
    pub gibbs_max_particles: usize,
    pub kms_pairs: usize,
    pub kms_tolerance: f64,
    pub triples: usize,
    pub analyticity_times: Vec<f64>,
    pub analyticity_gamma: f64,
    pub analyticity_terms: usize,
    pub fk_times: Vec<f64>,
    pub fk_tolerance: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            coupling: 0.1,
            circumference: 2.0 * PI,
            mode_cutoff: 3,
            max_particles: 6,
            refined_mode_cutoff: 4,
            refined_max_particles: 8,
            dimension_cap: 30_000,
            velocities: vec![0.0, 0.3, -0.3, 0.6, -0.6],
            spectrum_tolerance: 1e-8,
            gibbs_beta: 1.5,
            gibbs_mode_cutoff: 1,
            gibbs_max_particles: 4,
            kms_pairs: 3,
            kms_tolerance: 1e-10,
            triples: 1000,
            analyticity_times: vec![0.5, 1.0, 2.0],
            analyticity_gamma: 0.5,
            analyticity_terms: 8,
            fk_times: vec![0.0, 0.5, 1.0],
            fk_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub mass: f64,
    pub output_dir: String,
    pub symbols: SymbolsConfig,
    pub kernels: KernelsConfig,
    pub rp: RpConfig,
    pub periodize: PeriodizeConfig,
    pub thermal: ThermalConfig,
    pub gaussian: GaussianConfig,
    pub fock: FockConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA,
            suites: Suite::ALL.to_vec(),
            seed: 1,
            mass: 1.0,
            output_dir: "reports".into(),
            symbols: SymbolsConfig::default(),
            kernels: KernelsConfig::default(),
            rp: RpConfig::default(),
            periodize: PeriodizeConfig::default(),
            thermal: ThermalConfig::default(),
            gaussian: GaussianConfig::default(),
            fock: FockConfig::default(),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {x}"))
    }
}

fn speeds(name: &str, vs: &[f64]) -> Result<(), String> {
    match vs.iter().find(|v| !(v.abs() < 1.0)) {
        Some(v) => Err(format!("{name}: speed {v} is not below 1")),
        None => Ok(()),
    }
}

fn nonzero(name: &str, n: usize) -> Result<(), String> {
    if n > 0 {
        Ok(())
    } else {
        Err(format!("{name} must be at least 1"))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.schema != SCHEMA {
            return Err(format!("unsupported schema {}, expected {SCHEMA}", self.schema));
        }
        positive("mass", self.mass)?;
        let s = &self.symbols;
        nonzero("symbols.samples", s.samples)?;
        speeds("symbols.velocities", &s.velocities)?;
        positive("symbols.range", s.range)?;
        if let Some(d) = s.dims.iter().find(|&&d| !(2..=4).contains(&d)) {
            return Err(format!("symbols.dims: dimension {d} outside 2..=4"));
        }
        let k = &self.kernels;
        if k.grid_points < 2 || k.grid_points % 2 != 0 {
            return Err("kernels.grid_points must be even and at least 2".into());
        }
        positive("kernels.spacing", k.spacing)?;
        speeds("kernels.velocities", &k.velocities)?;
        positive("kernels.tolerance", k.tolerance)?;
        let r = &self.rp;
        nonzero("rp.members", r.members)?;
        nonzero("rp.seeds", r.seeds)?;
        speeds("rp.velocities", &r.velocities)?;
        positive("rp.min_eig_tolerance", r.min_eig_tolerance)?;
        positive("rp.isometry_tolerance", r.isometry_tolerance)?;
        let p = &self.periodize;
        for &b in &p.betas {
            positive("periodize.betas", b)?;
        }
        speeds("periodize.velocities", &p.velocities)?;
        nonzero("periodize.winding_max", p.winding_max)?;
        nonzero("periodize.matsubara_max", p.matsubara_max)?;
        positive("periodize.tolerance", p.tolerance)?;
        positive("periodize.torus_beta", p.torus_beta)?;
        speeds("periodize.torus_velocity", &[p.torus_velocity])?;
        for &l in &p.torus_lengths {
            positive("periodize.torus_lengths", l)?;
        }
        let t = &self.thermal;
        positive("thermal.beta", t.beta)?;
        speeds("thermal.velocities", &t.velocities)?;
        positive("thermal.circumference", t.circumference)?;
        nonzero("thermal.mode_cutoff", t.mode_cutoff)?;
        positive("thermal.kms_tolerance", t.kms_tolerance)?;
        positive("thermal.modular_tolerance", t.modular_tolerance)?;
        positive("thermal.commutator_tolerance", t.commutator_tolerance)?;
        let g = &self.gaussian;
        speeds("gaussian.velocities", &g.velocities)?;
        nonzero("gaussian.members", g.members)?;
        if g.max_fields < 2 || g.max_fields > boostfield::gaussian::DEFAULT_MAX_FIELDS || g.max_fields % 2 != 0 {
            return Err(format!(
                "gaussian.max_fields must be even and in 2..={}",
                boostfield::gaussian::DEFAULT_MAX_FIELDS
            ));
        }
        positive("gaussian.moment_tolerance", g.moment_tolerance)?;
        positive("gaussian.norm_law_tolerance", g.norm_law_tolerance)?;
        let f = &self.fock;
        if !(f.coupling >= 0.0 && f.coupling.is_finite()) {
            return Err(format!("fock.coupling must be non-negative, got {}", f.coupling));
        }
        positive("fock.circumference", f.circumference)?;
        speeds("fock.velocities", &f.velocities)?;
        positive("fock.spectrum_tolerance", f.spectrum_tolerance)?;
        positive("fock.gibbs_beta", f.gibbs_beta)?;
        positive("fock.kms_tolerance", f.kms_tolerance)?;
        positive("fock.fk_tolerance", f.fk_tolerance)?;
        for &x in &f.analyticity_times {
            positive("fock.analyticity_times", x)?;
        }
        if !(f.analyticity_gamma > 0.0 && f.analyticity_gamma < 1.0) {
            return Err("fock.analyticity_gamma must lie in (0, 1)".into());
        }
        if f.analyticity_terms < 2 {
            return Err("fock.analyticity_terms must be at least 2".into());
        }
        if let Some(x) = f.fk_times.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(format!("fock.fk_times: {x} is not a non-negative time"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
        assert_eq!(serde_json::from_str::<RunConfig>("{}").unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"fock": {"lambda": 0.1}}"#).is_err());
    }

    #[test]
    fn negative_tolerance_is_invalid() {
        let c: RunConfig = serde_json::from_str(r#"{"kernels": {"tolerance": -1e-6}}"#).unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = serde_json::from_str(r#"{"rp": {"velocities": [1.0]}}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
