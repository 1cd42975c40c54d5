//! Flat key-value experiment configuration.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines ignored. Values are scalars, comma-separated lists, or boxes given
//! as `x_min,y_min,x_max,y_max`. Unknown keys are rejected so typos fail
//! loudly. CLI `--set key=value` overrides win over the file.
//!
//! Defaults reproduce the standard study: G = (0.25,0.75)^2 with scatterer
//! Omega = (0.375,0.625)^2, unit cell with inclusion D = (0.25,0.75)^2,
//! eps_e^{-1} = 10, eps_i^{-1} = 10 - 0.01i, delta = 1/32, left-going
//! incident plane wave.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use helmholtz_hmm::cell::CellConfig;
use helmholtz_hmm::effective::MacroProblem;
use helmholtz_hmm::geometry::AxisBox;
use helmholtz_hmm::Complex64;
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    MueffSweep,
    Resolution,
    Eoc,
    Reconstruction,
    Bandgap,
    Manufactured,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "mueff-sweep" => Ok(Self::MueffSweep),
            "resolution" => Ok(Self::Resolution),
            "eoc" => Ok(Self::Eoc),
            "reconstruction" => Ok(Self::Reconstruction),
            "bandgap" => Ok(Self::Bandgap),
            "manufactured" => Ok(Self::Manufactured),
            other => Err(ConfigError(format!("unknown experiment kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MueffSweep => "mueff-sweep",
            Self::Resolution => "resolution",
            Self::Eoc => "eoc",
            Self::Reconstruction => "reconstruction",
            Self::Bandgap => "bandgap",
            Self::Manufactured => "manufactured",
        }
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Single wavenumber (eoc, reconstruction, manufactured).
    pub k: f64,
    /// Wavenumber list (resolution, bandgap).
    pub k_list: Vec<f64>,
    /// Sweep grid (mueff-sweep): min, max, step.
    pub k_min: f64,
    pub k_max: f64,
    pub k_step: f64,
    pub eps_e_inv: f64,
    pub eps_i_inv: Complex64,
    pub delta: f64,
    pub domain: AxisBox,
    pub scatterer: AxisBox,
    pub inclusion: AxisBox,
    pub incident_direction: [f64; 2],
    pub incident_amplitude: Complex64,
    /// Macro refinement levels (squares per side of G).
    pub n_macro_list: Vec<usize>,
    /// Cell subdivision = cell_ratio * n_macro (H = 2h lockstep).
    pub cell_ratio: usize,
    /// Fixed cell subdivision for sweeps and band-gap runs.
    pub n_cell: usize,
    /// Reference macro mesh (homogenized reference solves).
    pub n_ref_macro: usize,
    /// Reference cell mesh feeding the reference effective parameters.
    pub n_ref_cell: usize,
    /// Heterogeneous reference subdivision of G.
    pub n_fine: usize,
    /// Eigen-series truncation (odd indices up to this bound).
    pub truncation: usize,
    /// Line-sample count and line height for field dumps.
    pub n_samples: usize,
    pub y_line: f64,
    /// Canonical serialization of every key actually in force.
    canonical: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::MueffSweep,
            k: 29.0,
            k_list: vec![34.0, 48.0, 68.0],
            k_min: 15.0,
            k_max: 68.0,
            k_step: 0.5,
            eps_e_inv: 10.0,
            eps_i_inv: Complex64::new(10.0, -0.01),
            delta: 1.0 / 32.0,
            domain: AxisBox::new(0.25, 0.25, 0.75, 0.75),
            scatterer: AxisBox::new(0.375, 0.375, 0.625, 0.625),
            inclusion: AxisBox::new(0.25, 0.25, 0.75, 0.75),
            incident_direction: [-1.0, 0.0],
            incident_amplitude: Complex64::new(1.0, 0.0),
            n_macro_list: vec![8, 12, 16, 24, 32, 48, 64],
            cell_ratio: 4,
            n_cell: 256,
            n_ref_macro: 256,
            n_ref_cell: 256,
            n_fine: 256,
            truncation: 41,
            n_samples: 257,
            y_line: 0.545,
            canonical: String::new(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file, then applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            parse_into(&text, &mut map)?;
        }
        for ov in overrides {
            let (k, v) = ov
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("override '{ov}' is not key=value")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(map)
    }

    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let kind = match map.get("experiment") {
            Some(s) => ExperimentKind::parse(s)?,
            None => ExperimentKind::MueffSweep,
        };
        let mut cfg = Self::default_for(kind);
        for (key, value) in &map {
            cfg.apply(key, value)?;
        }
        cfg.canonical = map
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("\n");
        cfg.validate()?;
        Ok(cfg)
    }

    /// Per-experiment defaults: the level ladders and wavenumber sets the
    /// corresponding standard study uses.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = Self { kind, ..Self::default() };
        match kind {
            ExperimentKind::Resolution => {
                cfg.n_macro_list = vec![8, 12, 16, 24, 32, 48, 64, 96];
            }
            ExperimentKind::Reconstruction => {
                cfg.n_macro_list = vec![8, 16, 24, 32, 48, 64];
            }
            ExperimentKind::Bandgap => {
                cfg.k_list = vec![29.0, 38.0];
            }
            ExperimentKind::Manufactured => {
                cfg.n_macro_list = vec![16, 32, 64, 128, 256];
            }
            ExperimentKind::MueffSweep | ExperimentKind::Eoc => {}
        }
        cfg
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError(format!("invalid {what} '{value}' for key '{key}'"));
        match key {
            "experiment" => self.kind = ExperimentKind::parse(value)?,
            "k" => self.k = value.parse().map_err(|_| bad("number"))?,
            "k_list" => self.k_list = parse_list(value).map_err(|_| bad("list"))?,
            "k_min" => self.k_min = value.parse().map_err(|_| bad("number"))?,
            "k_max" => self.k_max = value.parse().map_err(|_| bad("number"))?,
            "k_step" => self.k_step = value.parse().map_err(|_| bad("number"))?,
            "eps_e_inv" => self.eps_e_inv = value.parse().map_err(|_| bad("number"))?,
            "eps_i_inv_re" => self.eps_i_inv.re = value.parse().map_err(|_| bad("number"))?,
            "eps_i_inv_im" => self.eps_i_inv.im = value.parse().map_err(|_| bad("number"))?,
            "delta" => self.delta = value.parse().map_err(|_| bad("number"))?,
            "domain" => self.domain = parse_box(value).map_err(|_| bad("box"))?,
            "scatterer" => self.scatterer = parse_box(value).map_err(|_| bad("box"))?,
            "inclusion" => self.inclusion = parse_box(value).map_err(|_| bad("box"))?,
            "incident_dir" => {
                let v = parse_list(value).map_err(|_| bad("pair"))?;
                if v.len() != 2 {
                    return Err(bad("pair"));
                }
                self.incident_direction = [v[0], v[1]];
            }
            "incident_amp_re" => {
                self.incident_amplitude.re = value.parse().map_err(|_| bad("number"))?
            }
            "incident_amp_im" => {
                self.incident_amplitude.im = value.parse().map_err(|_| bad("number"))?
            }
            "n_macro_list" => {
                self.n_macro_list = parse_usize_list(value).map_err(|_| bad("list"))?
            }
            "cell_ratio" => self.cell_ratio = value.parse().map_err(|_| bad("integer"))?,
            "n_cell" => self.n_cell = value.parse().map_err(|_| bad("integer"))?,
            "n_ref_macro" => self.n_ref_macro = value.parse().map_err(|_| bad("integer"))?,
            "n_ref_cell" => self.n_ref_cell = value.parse().map_err(|_| bad("integer"))?,
            "n_fine" => self.n_fine = value.parse().map_err(|_| bad("integer"))?,
            "truncation" => self.truncation = value.parse().map_err(|_| bad("integer"))?,
            "n_samples" => self.n_samples = value.parse().map_err(|_| bad("integer"))?,
            "y_line" => self.y_line = value.parse().map_err(|_| bad("number"))?,
            other => return Err(ConfigError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Front-loads every downstream precondition that is checkable without
    /// assembling anything: positivity, box nesting, and all grid/interface
    /// divisibility requirements.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        if self.k <= 0.0 || self.k_min <= 0.0 || self.k_step <= 0.0 {
            return err("wavenumbers must be positive".into());
        }
        if self.k_list.iter().any(|&k| k <= 0.0) {
            return err("wavenumbers must be positive".into());
        }
        if self.eps_e_inv <= 0.0 {
            return err("eps_e_inv must be positive".into());
        }
        if self.eps_i_inv.re <= 0.0 || self.eps_i_inv.im >= 0.0 {
            return err("eps_i_inv needs Re > 0 and Im < 0".into());
        }
        if self.delta <= 0.0 {
            return err("delta must be positive".into());
        }
        if !self.domain.contains_box_strictly(&self.scatterer) {
            return err("scatterer must lie strictly inside the domain".into());
        }
        if !AxisBox::unit().contains_box_strictly(&self.inclusion) {
            return err("inclusion must lie strictly inside the unit cell".into());
        }
        if self.cell_ratio == 0 {
            return err("cell_ratio must be positive".into());
        }
        let norm = (self.incident_direction[0].powi(2) + self.incident_direction[1].powi(2)).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return err("incident_dir must be a unit vector".into());
        }

        for &n in &self.n_macro_list {
            if n == 0 {
                return err("macro subdivisions must be positive".into());
            }
            check_aligned(&self.domain, &self.scatterer, n)
                .map_err(|c| ConfigError(format!("scatterer edge {c} off the n={n} macro grid")))?;
            let n_cell = n * self.cell_ratio;
            check_aligned(&AxisBox::unit(), &self.inclusion, n_cell).map_err(|c| {
                ConfigError(format!("inclusion edge {c} off the n={n_cell} cell grid"))
            })?;
        }
        for &(n_macro, n_cell) in &[(self.n_ref_macro, self.n_ref_cell), (self.n_cell, self.n_cell)]
        {
            check_aligned(&self.domain, &self.scatterer, n_macro)
                .map_err(|c| ConfigError(format!("scatterer edge {c} off the reference grid")))?;
            check_aligned(&AxisBox::unit(), &self.inclusion, n_cell)
                .map_err(|c| ConfigError(format!("inclusion edge {c} off the cell grid")))?;
        }
        // Heterogeneous fine grid must resolve every fine-scale inclusion.
        let layout = helmholtz_hmm::effective::InclusionLayout::new(
            &self.scatterer,
            self.delta,
            Some(self.inclusion),
        );
        for b in layout.boxes() {
            check_aligned(&self.domain, &b, self.n_fine).map_err(|c| {
                ConfigError(format!("inclusion edge {c} off the n_fine={} grid", self.n_fine))
            })?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical key-value pairs in force.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn cell_config(&self, n_cell: usize) -> CellConfig {
        CellConfig {
            eps_e_inv: self.eps_e_inv,
            eps_i_inv: self.eps_i_inv,
            inclusion: Some(self.inclusion),
            n_cell,
        }
    }

    pub fn macro_problem(&self, k: f64, n_macro: usize, n_cell: usize) -> MacroProblem {
        MacroProblem {
            domain: self.domain,
            scatterer: self.scatterer,
            k,
            incident_direction: self.incident_direction,
            incident_amplitude: self.incident_amplitude,
            n_macro,
            cell: self.cell_config(n_cell),
            delta: self.delta,
        }
    }

    /// The sweep grid k_min, k_min + k_step, ..., up to k_max (inclusive
    /// within half a step).
    pub fn sweep_grid(&self) -> Vec<f64> {
        let mut ks = Vec::new();
        let mut i = 0usize;
        loop {
            let k = self.k_min + i as f64 * self.k_step;
            if k > self.k_max + 0.5 * self.k_step {
                break;
            }
            ks.push(k);
            i += 1;
        }
        ks
    }
}

fn check_aligned(outer: &AxisBox, inner: &AxisBox, n: usize) -> Result<(), f64> {
    for (coord, min, extent) in [
        (inner.x_min, outer.x_min, outer.width()),
        (inner.x_max, outer.x_min, outer.width()),
        (inner.y_min, outer.y_min, outer.height()),
        (inner.y_max, outer.y_min, outer.height()),
    ] {
        let t = (coord - min) / extent * n as f64;
        if (t - t.round()).abs() > 1e-9 {
            return Err(coord);
        }
    }
    Ok(())
}

fn parse_into(text: &str, map: &mut BTreeMap<String, String>) -> Result<(), ConfigError> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(())
}

fn parse_list(s: &str) -> Result<Vec<f64>, ()> {
    s.split(',').map(|p| p.trim().parse().map_err(|_| ())).collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, ()> {
    s.split(',').map(|p| p.trim().parse().map_err(|_| ())).collect()
}

fn parse_box(s: &str) -> Result<AxisBox, ()> {
    let v = parse_list(s)?;
    if v.len() != 4 || v[0] >= v[2] || v[1] >= v[3] {
        return Err(());
    }
    Ok(AxisBox::new(v[0], v[1], v[2], v[3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::from_map(BTreeMap::new()).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::MueffSweep);
        assert_eq!(cfg.n_macro_list, vec![8, 12, 16, 24, 32, 48, 64]);
        assert_eq!(cfg.sweep_grid().len(), 107);
    }

    #[test]
    fn parse_and_override() {
        let mut map = BTreeMap::new();
        parse_into(
            "experiment = eoc\nk = 34.0  # comment\nn_macro_list = 8, 16\n",
            &mut map,
        )
        .unwrap();
        map.insert("k".into(), "48".into());
        let cfg = ExperimentConfig::from_map(map).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Eoc);
        assert_eq!(cfg.k, 48.0);
        assert_eq!(cfg.n_macro_list, vec![8, 16]);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut map = BTreeMap::new();
        map.insert("k_mx".into(), "3".into());
        assert!(ExperimentConfig::from_map(map).is_err());
    }

    #[test]
    fn misaligned_scatterer_rejected_at_parse_time() {
        let mut map = BTreeMap::new();
        map.insert("n_macro_list".into(), "6".into());
        let err = ExperimentConfig::from_map(map).unwrap_err();
        assert!(err.0.contains("off the n=6 macro grid"), "{}", err.0);
    }

    #[test]
    fn nonpositive_k_rejected() {
        let mut map = BTreeMap::new();
        map.insert("k".into(), "-1".into());
        assert!(ExperimentConfig::from_map(map).is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::from_map(BTreeMap::new()).unwrap();
        let mut map = BTreeMap::new();
        map.insert("k".into(), "31".into());
        let b = ExperimentConfig::from_map(map).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
