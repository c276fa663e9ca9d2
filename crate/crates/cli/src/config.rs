//! Run configuration: defaults, then a flat `key = value` file, then flags.
//!
//! Grammar of the config file: one `key = value` per line, `#` starts a
//! comment, blank lines are ignored, keys are the long flag names
//! (`hurst`, `steps`, `tmax`, `seed`, `generator`, `paths`, `replicates`,
//! `truncation`, `kernel-mesh`, `eps-multiples`, `eps-levels`,
//! `tolerance`, `out`). Lists are comma-separated.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use fracbm::experiments::DEFAULT_ROOT;
use fracbm::gaussianpaths::Generator;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub hurst: f64,
    pub steps: usize,
    pub tmax: f64,
    /// Root seed; path `i` of a run uses stream `i`.
    pub seed: u64,
    pub generator: String,
    pub paths: usize,
    /// Ensemble size for `ito`; overrides the Monte Carlo size in `verify`.
    pub replicates: Option<usize>,
    /// Moving-average cutoff `L`; `50 * tmax` when unset.
    pub truncation: Option<f64>,
    pub kernel_mesh: usize,
    pub eps_multiples: Vec<usize>,
    pub eps_levels: usize,
    pub tolerance: Option<f64>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hurst: 0.5,
            steps: 1024,
            tmax: 1.0,
            seed: DEFAULT_ROOT,
            generator: Generator::FbmCirculant.as_str().to_string(),
            paths: 1,
            replicates: None,
            truncation: None,
            kernel_mesh: 16,
            eps_multiples: fracbm::fbmintegrate::DEFAULT_MULTIPLES.to_vec(),
            eps_levels: 5,
            tolerance: None,
            out: PathBuf::from("fracbm-run"),
        }
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Hurst index H in (0, 1)
    #[arg(long, global = true)]
    pub hurst: Option<f64>,
    /// Number of grid steps
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Time horizon T
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Root seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// bm-increments, fbm-cholesky, fbm-moving-average or fbm-circulant
    #[arg(long, global = true)]
    pub generator: Option<String>,
    /// Number of paths (streams 0..paths)
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Monte Carlo ensemble size
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Moving-average cutoff L
    #[arg(long, global = true)]
    pub truncation: Option<f64>,
    /// Moving-average noise cells per grid step
    #[arg(long, global = true)]
    pub kernel_mesh: Option<usize>,
    /// ε ladder as multiples of the grid spacing, coarse to fine
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps_multiples: Option<Vec<usize>>,
    /// Number of ε levels of the extended forward integral
    #[arg(long, global = true)]
    pub eps_levels: Option<usize>,
    /// Cauchy tolerance of the ε ladder
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_list(value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad list entry `{s}`")))
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = || anyhow!("bad value `{v}` for `{key}`");
        match key.trim() {
            "hurst" => self.hurst = v.parse().map_err(|_| num())?,
            "steps" => self.steps = v.parse().map_err(|_| num())?,
            "tmax" => self.tmax = v.parse().map_err(|_| num())?,
            "seed" => self.seed = v.parse().map_err(|_| num())?,
            "generator" => self.generator = v.to_string(),
            "paths" => self.paths = v.parse().map_err(|_| num())?,
            "replicates" => self.replicates = Some(v.parse().map_err(|_| num())?),
            "truncation" => self.truncation = Some(v.parse().map_err(|_| num())?),
            "kernel-mesh" => self.kernel_mesh = v.parse().map_err(|_| num())?,
            "eps-multiples" => self.eps_multiples = parse_list(v)?,
            "eps-levels" => self.eps_levels = v.parse().map_err(|_| num())?,
            "tolerance" => self.tolerance = Some(v.parse().map_err(|_| num())?),
            "out" => self.out = PathBuf::from(v),
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", i + 1))?;
            self.set(key, value).with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        take!(hurst, steps, tmax, seed, generator, paths, kernel_mesh, eps_multiples, eps_levels, out);
        if o.replicates.is_some() {
            self.replicates = o.replicates;
        }
        if o.truncation.is_some() {
            self.truncation = o.truncation;
        }
        if o.tolerance.is_some() {
            self.tolerance = o.tolerance;
        }
    }

    /// The flat `key = value` form, which [`RunConfig::apply_file`] reads
    /// back to an equal config.
    pub fn to_file(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("hurst", format!("{:?}", self.hurst));
        kv.insert("steps", self.steps.to_string());
        kv.insert("tmax", format!("{:?}", self.tmax));
        kv.insert("seed", self.seed.to_string());
        kv.insert("generator", self.generator.clone());
        kv.insert("paths", self.paths.to_string());
        if let Some(r) = self.replicates {
            kv.insert("replicates", r.to_string());
        }
        if let Some(l) = self.truncation {
            kv.insert("truncation", format!("{l:?}"));
        }
        kv.insert("kernel-mesh", self.kernel_mesh.to_string());
        let list: Vec<String> = self.eps_multiples.iter().map(usize::to_string).collect();
        kv.insert("eps-multiples", list.join(","));
        kv.insert("eps-levels", self.eps_levels.to_string());
        if let Some(t) = self.tolerance {
            kv.insert("tolerance", format!("{t:?}"));
        }
        kv.insert("out", self.out.display().to_string());
        kv.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn generator(&self) -> Result<Generator> {
        match Generator::parse(&self.generator) {
            Some(Generator::External) | None => bail!("unknown generator `{}`", self.generator),
            Some(g) => Ok(g),
        }
    }

    /// Range checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            bail!("hurst must lie in (0, 1), got {}", self.hurst);
        }
        if !(2..=1 << 22).contains(&self.steps) {
            bail!("steps must lie in [2, 2^22], got {}", self.steps);
        }
        if !(self.tmax.is_finite() && self.tmax > 0.0) {
            bail!("tmax must be positive, got {}", self.tmax);
        }
        if !(1..=100_000).contains(&self.paths) {
            bail!("paths must lie in [1, 100000], got {}", self.paths);
        }
        if let Some(r) = self.replicates {
            if r < 2 {
                bail!("replicates must be at least 2, got {r}");
            }
        }
        if let Some(l) = self.truncation {
            if !(l.is_finite() && l > self.tmax) {
                bail!("truncation must exceed tmax, got {l}");
            }
        }
        if self.kernel_mesh == 0 {
            bail!("kernel-mesh must be positive");
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                bail!("tolerance must be positive, got {t}");
            }
        }
        let g = self.generator()?;
        if g == Generator::BmIncrements && self.hurst != 0.5 {
            bail!("bm-increments requires hurst = 0.5, got {}", self.hurst);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let mut c = RunConfig::default();
        c.apply_file("hurst = 0.1234567890123\nreplicates=77 # trailing\n\n# only a comment\neps-multiples = 16, 8, 4\ntolerance = 1e-3\n")
            .unwrap();
        assert_eq!(c.replicates, Some(77));
        assert_eq!(c.eps_multiples, vec![16, 8, 4]);
        let mut back = RunConfig::default();
        back.apply_file(&c.to_file()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn flags_win_over_the_file() {
        let mut c = RunConfig::default();
        c.apply_file("hurst = 0.3\nsteps = 64").unwrap();
        c.apply_flags(&Overrides {
            hurst: Some(0.8),
            ..Default::default()
        });
        assert_eq!((c.hurst, c.steps), (0.8, 64));
    }

    #[test]
    fn bad_input_is_rejected() {
        let mut c = RunConfig::default();
        assert!(c.apply_file("colour = red").is_err());
        assert!(c.apply_file("hurst 0.3").is_err());
        assert!(c.apply_file("steps = -4").is_err());
        c.hurst = 1.5;
        assert!(c.validate().is_err());
        let c = RunConfig {
            generator: "bm-increments".into(),
            hurst: 0.7,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            generator: "external".into(),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
