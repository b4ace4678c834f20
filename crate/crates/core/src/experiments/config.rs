//! `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::builtin;
use crate::error::{Error, Result};
use crate::spectral::{io, resample_vector, Grid, SobolevIndex, VectorField};

/// A parameter that is either derived automatically or fixed by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Auto,
    Fixed(f64),
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Auto => write!(f, "auto"),
            Setting::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Setting::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected a number or `auto`, got {s:?}"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("expected a nonnegative number, got {v}"));
        }
        Ok(Setting::Fixed(v))
    }
}

/// Where the base velocity comes from: `builtin:<name>` or a field-file path.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Builtin(String),
    File(PathBuf),
}

impl FieldSource {
    pub fn parse(s: &str) -> Self {
        match s.strip_prefix("builtin:") {
            Some(name) => FieldSource::Builtin(name.to_string()),
            None => FieldSource::File(PathBuf::from(s)),
        }
    }

    /// The field on `grid` (file fields are spectrally resampled).
    pub fn load(&self, grid: Grid, seed: u64) -> Result<VectorField> {
        match self {
            FieldSource::Builtin(name) => builtin::builtin(name, grid, seed),
            FieldSource::File(path) => {
                let u = io::load(path)?.into_vector()?;
                Ok(if u.grid() == grid {
                    u
                } else {
                    resample_vector(&u, grid)
                })
            }
        }
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSource::Builtin(name) => write!(f, "builtin:{name}"),
            FieldSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Ball radius `R`; `auto` is `2.02 ||w*||_{H^k}`, just enough for every
    /// sequence member to lie in the ball.
    pub r: Setting,
    pub k: SobolevIndex,
    pub n_list: Vec<usize>,
    pub base: FieldSource,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub eps_list: Vec<f64>,
    /// Grid policy `N = max(grid_min, grid_per_n * n)`.
    pub grid_min: usize,
    pub grid_per_n: usize,
    pub dt_cap: f64,
    /// Grid of the witness search and constant estimation.
    pub witness_n: usize,
    pub candidates: usize,
    pub eps_fd: f64,
    pub constant_samples: usize,
    pub constant_radius: f64,
    /// Bump radius at `n = 1`; `auto` is the smallest radius passing the
    /// resolvability guard for every `n`, plus 5%.
    pub r1: Setting,
    pub mode_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            r: Setting::Auto,
            k: SobolevIndex::default(),
            n_list: vec![1, 2, 4, 8],
            base: FieldSource::Builtin("zero".into()),
            seed: 0,
            out_dir: PathBuf::from("out"),
            eps_list: vec![0.5, 0.25, 0.125],
            grid_min: 128,
            grid_per_n: 64,
            dt_cap: 0.01,
            witness_n: 64,
            candidates: 16,
            eps_fd: 1e-3,
            constant_samples: 8,
            constant_radius: 0.1,
            r1: Setting::Auto,
            mode_seed: 0,
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| format!("bad list entry {t:?}")))
        .collect()
}

fn parse_value<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("cannot parse {s:?}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "R" => self.r = value.parse()?,
            "k" => self.k = SobolevIndex::new(parse_value(value)?).map_err(|e| e.to_string())?,
            "n_list" => self.n_list = parse_list(value)?,
            "base" => self.base = FieldSource::parse(value),
            "seed" => self.seed = parse_value(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "eps_list" => self.eps_list = parse_list(value)?,
            "grid_min" => self.grid_min = parse_value(value)?,
            "grid_per_n" => self.grid_per_n = parse_value(value)?,
            "dt_cap" => self.dt_cap = parse_value(value)?,
            "witness_n" => self.witness_n = parse_value(value)?,
            "candidates" => self.candidates = parse_value(value)?,
            "eps_fd" => self.eps_fd = parse_value(value)?,
            "constant_samples" => self.constant_samples = parse_value(value)?,
            "constant_radius" => self.constant_radius = parse_value(value)?,
            "r1" => self.r1 = value.parse()?,
            "mode_seed" => self.mode_seed = parse_value(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad(format!(
                "n_list must hold positive integers, got {:?}",
                self.n_list
            ));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return bad(format!(
                "eps_list entries must lie in (0, 1], got {:?}",
                self.eps_list
            ));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "eps_list must be decreasing, got {:?}",
                self.eps_list
            ));
        }
        Grid::new(self.grid_min)?;
        Grid::new(self.witness_n)?;
        if self.grid_per_n % 2 != 0 {
            return bad(format!("grid_per_n must be even, got {}", self.grid_per_n));
        }
        if !(self.dt_cap > 0.0 && self.eps_fd > 0.0) {
            return bad("dt_cap and eps_fd must be positive".into());
        }
        if self.candidates == 0 || self.constant_samples < 5 {
            return bad("need at least one candidate and five constant samples".into());
        }
        Ok(())
    }

    /// `N = max(grid_min, grid_per_n * n)`.
    pub fn grid_for(&self, n: usize) -> Grid {
        Grid::new(self.grid_min.max(self.grid_per_n * n)).expect("validated grid policy")
    }

    /// Canonical text form, parseable by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        [
            format!("R = {}", self.r),
            format!("k = {}", self.k.value()),
            format!(
                "n_list = {}",
                join(self.n_list.iter().map(|n| n.to_string()).collect())
            ),
            format!("base = {}", self.base),
            format!("seed = {}", self.seed),
            format!("out_dir = {}", self.out_dir.display()),
            format!(
                "eps_list = {}",
                join(self.eps_list.iter().map(|e| e.to_string()).collect())
            ),
            format!("grid_min = {}", self.grid_min),
            format!("grid_per_n = {}", self.grid_per_n),
            format!("dt_cap = {}", self.dt_cap),
            format!("witness_n = {}", self.witness_n),
            format!("candidates = {}", self.candidates),
            format!("eps_fd = {}", self.eps_fd),
            format!("constant_samples = {}", self.constant_samples),
            format!("constant_radius = {}", self.constant_radius),
            format!("r1 = {}", self.r1),
            format!("mode_seed = {}", self.mode_seed),
        ]
        .join("\n")
            + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = ExperimentConfig::parse(
            "# demo\nR = 0.1\nn_list = 1, 2,4\nbase = builtin:shear # inline\nseed=7\n",
        )
        .unwrap();
        assert_eq!(cfg.r, Setting::Fixed(0.1));
        assert_eq!(cfg.n_list, vec![1, 2, 4]);
        assert_eq!(cfg.base, FieldSource::Builtin("shear".into()));
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn reports_line_numbers() {
        match ExperimentConfig::parse("R = 1\n\nbogus = 3\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected config error, got {other:?}"),
        }
        assert!(ExperimentConfig::parse("n_list = 0,1").is_err());
        assert!(ExperimentConfig::parse("eps_list = 0.1,0.5").is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.r = Setting::Fixed(0.25);
        cfg.base = FieldSource::File("a/b.field".into());
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn grid_policy() {
        let cfg = ExperimentConfig::default();
        let ns: Vec<usize> = [1, 2, 4, 8].iter().map(|&n| cfg.grid_for(n).n()).collect();
        assert_eq!(ns, vec![128, 128, 256, 512]);
    }
}
