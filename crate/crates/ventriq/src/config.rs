//! Run configuration: every tunable named by the pipeline, with defaults,
//! parsed from a line-oriented `key = value` file.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// All pipeline tunables. Field defaults are the shipped configuration; a
/// config file only needs the keys it overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Fraction of shape variance retained by the point distribution model.
    pub variance_fraction: f64,
    /// Half-length k of intensity profiles (2k+1 samples).
    pub profile_half_len: usize,
    /// Profile sampling step in mm.
    pub profile_step_mm: f64,
    /// Boundary search half-width m (candidates at -m..m steps).
    pub search_positions: usize,
    /// Gaussian kernel width for sparse-to-dense update propagation, mm.
    pub propagation_sigma_mm: f64,
    /// Maximum matching iterations per phase.
    pub max_iters: usize,
    /// Convergence threshold on mean landmark displacement, mm.
    pub conv_tol_mm: f64,
    /// Clip shape coefficients to +-3 sqrt(lambda).
    pub clamp_enabled: bool,
    /// Pass threshold for image quality assessment scores.
    pub iqa_threshold: f64,
    /// Pass threshold for segmentation quality assessment scores.
    pub sqa_threshold: f64,
    /// Myocardial tissue density in g/mL.
    pub myocardial_density_g_per_ml: f64,
    /// Trees per random forest.
    pub forest_trees: usize,
    /// Maximum tree depth.
    pub forest_max_depth: usize,
    /// Master seed for all seeded randomness (forest training, corpora).
    pub seed: u64,
    /// Significance level for the two-sample K-S test.
    pub ks_alpha: f64,
    /// Write zeroed timing columns so outputs are byte-reproducible.
    pub deterministic_output: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            variance_fraction: 0.95,
            profile_half_len: 4,
            profile_step_mm: 1.0,
            search_positions: 5,
            propagation_sigma_mm: 10.0,
            max_iters: 50,
            conv_tol_mm: 0.1,
            clamp_enabled: true,
            iqa_threshold: 0.5,
            sqa_threshold: 0.5,
            myocardial_density_g_per_ml: 1.05,
            forest_trees: 50,
            forest_max_depth: 6,
            seed: 7,
            ks_alpha: 0.05,
            deterministic_output: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ConfigError(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::ConfigError(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}`"))
        }
        fn flag(v: &str) -> std::result::Result<bool, String> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(format!("bad flag `{v}`")),
            }
        }
        match key {
            "variance_fraction" => self.variance_fraction = num(value)?,
            "profile_half_len" => self.profile_half_len = num(value)?,
            "profile_step_mm" => self.profile_step_mm = num(value)?,
            "search_positions" => self.search_positions = num(value)?,
            "propagation_sigma_mm" => self.propagation_sigma_mm = num(value)?,
            "max_iters" => self.max_iters = num(value)?,
            "conv_tol_mm" => self.conv_tol_mm = num(value)?,
            "clamp_enabled" => self.clamp_enabled = flag(value)?,
            "iqa_threshold" => self.iqa_threshold = num(value)?,
            "sqa_threshold" => self.sqa_threshold = num(value)?,
            "myocardial_density_g_per_ml" => self.myocardial_density_g_per_ml = num(value)?,
            "forest_trees" => self.forest_trees = num(value)?,
            "forest_max_depth" => self.forest_max_depth = num(value)?,
            "seed" => self.seed = num(value)?,
            "ks_alpha" => self.ks_alpha = num(value)?,
            "deterministic_output" => self.deterministic_output = flag(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Renders the effective configuration as `key = value` lines, in a
    /// fixed order, for echoing into run reports.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variance_fraction = {}", self.variance_fraction);
        let _ = writeln!(s, "profile_half_len = {}", self.profile_half_len);
        let _ = writeln!(s, "profile_step_mm = {}", self.profile_step_mm);
        let _ = writeln!(s, "search_positions = {}", self.search_positions);
        let _ = writeln!(s, "propagation_sigma_mm = {}", self.propagation_sigma_mm);
        let _ = writeln!(s, "max_iters = {}", self.max_iters);
        let _ = writeln!(s, "conv_tol_mm = {}", self.conv_tol_mm);
        let _ = writeln!(s, "clamp_enabled = {}", self.clamp_enabled);
        let _ = writeln!(s, "iqa_threshold = {}", self.iqa_threshold);
        let _ = writeln!(s, "sqa_threshold = {}", self.sqa_threshold);
        let _ = writeln!(
            s,
            "myocardial_density_g_per_ml = {}",
            self.myocardial_density_g_per_ml
        );
        let _ = writeln!(s, "forest_trees = {}", self.forest_trees);
        let _ = writeln!(s, "forest_max_depth = {}", self.forest_max_depth);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "ks_alpha = {}", self.ks_alpha);
        let _ = writeln!(s, "deterministic_output = {}", self.deterministic_output);
        s
    }
}
