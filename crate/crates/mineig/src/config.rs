//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment. Lists are comma-separated.
//! Reals accept `pi` multiples: `pi`, `2pi`, `2*pi`, `-pi/2`, `0.5*pi/3`.
//! Relative table paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mineig_core::potentials::{Extension, Smoothing};
use mineig_core::{CouplingFunction, CouplingKind, Discretization, ManifoldGrid};

use crate::table::load_table;
use crate::CliError;

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "alpha",
    "alphas",
    "amplitude",
    "center",
    "check_gradient",
    "coefficients",
    "count",
    "coupling",
    "coupling_table",
    "delta",
    "deltas",
    "discretization",
    "epsilons",
    "index",
    "kappa0",
    "kick",
    "length",
    "manifold",
    "mode",
    "modes",
    "points",
    "potential",
    "potential_table",
    "q",
    "samples",
    "seed",
    "smoothing",
    "step",
    "steps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Constant,
    /// `κ₀ + amplitude · v_mode`.
    Mode,
    /// `κ₀ + amplitude · q` for a seeded random band-limited `q`.
    Random,
    Spike,
    Ball,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QKind {
    Mode,
    Random,
}

/// Validated run configuration. `entries` echoes the raw assignments.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub entries: BTreeMap<String, String>,
    pub base_dir: PathBuf,
    pub grid: ManifoldGrid,
    pub coupling: CouplingKind,
    pub kappa0: f64,
    pub alpha: f64,
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub delta: f64,
    pub count: usize,
    pub index: usize,
    pub steps: usize,
    pub step: f64,
    pub potential: PotentialKind,
    pub potential_table: Option<PathBuf>,
    pub q: QKind,
    pub mode: usize,
    pub modes: usize,
    pub samples: usize,
    pub amplitude: f64,
    pub kick: f64,
    pub center: usize,
    pub smoothing: Smoothing,
    pub discretization: Discretization,
    pub check_gradient: bool,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let entries = parse_entries(text)?;
        let r = Reader { entries: &entries };
        let manifold = r.word("manifold", "circle")?;
        let grid = match manifold.as_str() {
            "circle" => {
                let l = r.real("length", 1.0)?;
                let n = r.usize("points", 128)?;
                ManifoldGrid::circle(l, n)
            }
            "torus" => {
                let l = r.reals_or("length", &[1.0, 1.0])?;
                let n = r.usizes_or("points", &[32, 32])?;
                let (l1, l2) = pair(&l, "length")?;
                let (n1, n2) = pair(&n, "points")?;
                ManifoldGrid::torus(l1, l2, n1, n2)
            }
            other => return Err(invalid(format!("manifold must be circle or torus, got `{other}`"))),
        }
        .map_err(CliError::from)?;

        let coupling = match r.word("coupling", "square")?.as_str() {
            "square" => CouplingKind::Square,
            "identity" => CouplingKind::Identity,
            "exp" => CouplingKind::Exp,
            "polynomial" => {
                let c = r.reals("coefficients")?;
                if c.is_empty() {
                    return Err(invalid("polynomial coupling needs `coefficients`"));
                }
                CouplingKind::Polynomial(c)
            }
            "table" => {
                let p = r
                    .path("coupling_table", base_dir)?
                    .ok_or_else(|| invalid("table coupling needs `coupling_table`"))?;
                CouplingKind::Table(Box::new(load_table(&p, Extension::Clamped)?))
            }
            other => return Err(invalid(format!("unknown coupling `{other}`"))),
        };

        let potential = match r.word("potential", "constant")?.as_str() {
            "constant" => PotentialKind::Constant,
            "mode" => PotentialKind::Mode,
            "random" => PotentialKind::Random,
            "spike" => PotentialKind::Spike,
            "ball" => PotentialKind::Ball,
            "table" => PotentialKind::Table,
            other => return Err(invalid(format!("unknown potential `{other}`"))),
        };
        let potential_table = r.path("potential_table", base_dir)?;
        if potential == PotentialKind::Table && potential_table.is_none() {
            return Err(invalid("table potential needs `potential_table`"));
        }
        let q = match r.word("q", "mode")?.as_str() {
            "mode" => QKind::Mode,
            "random" => QKind::Random,
            other => return Err(invalid(format!("q must be mode or random, got `{other}`"))),
        };
        let smoothing = match r.word("smoothing", "mollified")?.as_str() {
            "mollified" => Smoothing::Mollified,
            "hard" => Smoothing::Hard,
            other => return Err(invalid(format!("smoothing must be mollified or hard, got `{other}`"))),
        };
        let discretization = parse_discretization(&r.word("discretization", "fourier")?)?;

        let alphas = r.reals("alphas")?;
        let epsilons = r.reals("epsilons")?;
        let deltas = r.reals("deltas")?;
        if !alphas.windows(2).all(|w| w[1] > w[0]) {
            return Err(invalid("`alphas` must be strictly increasing"));
        }
        if !epsilons.windows(2).all(|w| w[1] < w[0]) {
            return Err(invalid("`epsilons` must be strictly decreasing"));
        }
        if !deltas.windows(2).all(|w| w[1] < w[0]) {
            return Err(invalid("`deltas` must be strictly decreasing"));
        }
        let seed = match entries.get("seed") {
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("seed must be an unsigned integer, got `{s}`")))?,
            None => 0,
        };
        let check_gradient = match r.word("check_gradient", "false")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(invalid(format!("check_gradient must be true or false, got `{other}`"))),
        };

        Ok(RunConfig {
            base_dir: base_dir.to_path_buf(),
            grid,
            coupling,
            kappa0: r.real("kappa0", 1.0)?,
            alpha: r.real("alpha", 1.0)?,
            alphas,
            epsilons,
            deltas,
            delta: r.real("delta", 0.1)?,
            count: r.usize("count", 6)?,
            index: r.usize("index", 0)?,
            steps: r.usize("steps", 50)?,
            step: r.real("step", 0.05)?,
            potential,
            potential_table,
            q,
            mode: r.usize("mode", 1)?,
            modes: r.usize("modes", 6)?,
            samples: r.usize("samples", 10)?,
            amplitude: r.real("amplitude", 0.1)?,
            kick: r.real("kick", 0.0)?,
            center: r.usize("center", 0)?,
            smoothing,
            discretization,
            check_gradient,
            seed,
            entries,
        })
    }

    pub fn coupling_function(&self) -> Result<CouplingFunction, CliError> {
        Ok(CouplingFunction::new(self.coupling.clone(), self.kappa0)?)
    }

    /// Overrides applied from command-line flags, mirrored into `entries`.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.entries.insert("seed".into(), seed.to_string());
    }

    pub fn override_discretization(&mut self, d: Discretization) {
        self.discretization = d;
        self.entries.insert("discretization".into(), d.name().into());
    }
}

pub fn parse_discretization(s: &str) -> Result<Discretization, CliError> {
    match s {
        "fourier" => Ok(Discretization::Fourier),
        "fd2" => Ok(Discretization::Fd2),
        other => Err(invalid(format!("discretization must be fourier or fd2, got `{other}`"))),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn pair<T: Copy>(v: &[T], key: &str) -> Result<(T, T), CliError> {
    match v {
        [a, b] => Ok((*a, *b)),
        [a] => Ok((*a, *a)),
        _ => Err(invalid(format!("`{key}` takes one or two values on a torus"))),
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = no + 1;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {lineno}: expected `key = value`")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(invalid(format!("line {lineno}: unknown key `{k}`")));
        }
        if v.is_empty() {
            return Err(invalid(format!("line {lineno}: `{k}` has no value")));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(invalid(format!("line {lineno}: duplicate key `{k}`")));
        }
    }
    Ok(out)
}

/// Parses a real with optional `pi` factor and one optional `/` divisor.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.rsplit_once('/') {
        let d = parse_real(den)?;
        return (d != 0.0).then(|| parse_real(num).map(|n| n / d)).flatten();
    }
    let v = match s.strip_suffix("pi") {
        Some(prefix) => {
            let prefix = prefix.trim().trim_end_matches('*').trim();
            let c = match prefix {
                "" | "+" => 1.0,
                "-" => -1.0,
                p => p.parse::<f64>().ok()?,
            };
            c * PI
        }
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn word(&self, key: &str, default: &str) -> Result<String, CliError> {
        Ok(self
            .entries
            .get(key)
            .map(|s| s.to_lowercase())
            .unwrap_or_else(|| default.into()))
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.entries.get(key) {
            Some(s) => parse_real(s).ok_or_else(|| invalid(format!("`{key}`: `{s}` is not a real number"))),
            None => Ok(default),
        }
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.reals_or(key, &[])
    }

    fn reals_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.entries.get(key) {
            Some(s) => s
                .split(',')
                .map(|t| parse_real(t).ok_or_else(|| invalid(format!("`{key}`: `{}` is not a real number", t.trim()))))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.entries.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("`{key}`: `{s}` is not a nonnegative integer"))),
            None => Ok(default),
        }
    }

    fn usizes_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.entries.get(key) {
            Some(s) => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| invalid(format!("`{key}`: `{}` is not a nonnegative integer", t.trim())))
                })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn path(&self, key: &str, base: &Path) -> Result<Option<PathBuf>, CliError> {
        Ok(self.entries.get(key).map(|s| {
            let p = PathBuf::from(s);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_multiples() {
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("2pi"), Some(2.0 * PI));
        assert_eq!(parse_real("2 * pi"), Some(2.0 * PI));
        assert_eq!(parse_real("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_real("1e-3"), Some(1e-3));
        assert_eq!(parse_real("1/0"), None);
        assert_eq!(parse_real("inf"), None);
        assert_eq!(parse_real("x"), None);
    }

    #[test]
    fn defaults_and_lists() {
        let c = RunConfig::parse("kappa0 = 2pi\nalphas = 0.1, 0.2,0.3 # comment\n", Path::new(".")).unwrap();
        assert_eq!(c.kappa0, 2.0 * PI);
        assert_eq!(c.alphas, vec![0.1, 0.2, 0.3]);
        assert_eq!(c.grid.len(), 128);
        assert_eq!(c.discretization, Discretization::Fourier);
    }

    #[test]
    fn torus_shapes() {
        let c = RunConfig::parse("manifold = torus\nlength = 1, 2\npoints = 16\n", Path::new(".")).unwrap();
        assert_eq!(c.grid.points(), &[16, 16]);
        assert_eq!(c.grid.lengths(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            "foo = 1",
            "alpha 1",
            "alpha = 1\nalpha = 2",
            "alphas = 0.3, 0.2",
            "deltas = 0.1, 0.2",
            "manifold = sphere",
            "kappa0 = two",
            "points = 7",
            "coupling = table",
        ];
        for text in bad {
            assert!(
                matches!(RunConfig::parse(text, Path::new(".")), Err(CliError::Validation(_))),
                "{text}"
            );
        }
        let e = RunConfig::parse("alpha = 1\nbogus = 2", Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("line 2"));
    }
}
