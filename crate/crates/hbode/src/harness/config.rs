//! Run configuration: flat `key = value` files plus CLI flag overrides
//! (flags win). Keys: problem, dim, x0, T, alpha, h, method, stride, out.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ode::{alpha_for_horizon, Method, OdeParams};
use crate::problems::Problem;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum X0Spec {
    /// Per-problem canonical start.
    Standard,
    /// Coordinates i.i.d. uniform in [-scale, scale) from the given seed.
    SeededRandom { seed: u64, scale: f64 },
}

impl X0Spec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "standard" {
            return Ok(X0Spec::Standard);
        }
        if let Some(body) = s
            .strip_prefix("seeded-random(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let parts: Vec<&str> = body.split(',').map(str::trim).collect();
            if parts.len() == 2 {
                let seed = parts[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed in x0 spec `{s}`")))?;
                let scale: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad scale in x0 spec `{s}`")))?;
                if scale <= 0.0 {
                    return Err(Error::Config("x0 scale must be positive".into()));
                }
                return Ok(X0Spec::SeededRandom { seed, scale });
            }
        }
        Err(Error::Config(format!(
            "bad x0 spec `{s}`; use `standard` or `seeded-random(SEED, SCALE)`"
        )))
    }
}

impl std::fmt::Display for X0Spec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            X0Spec::Standard => write!(f, "standard"),
            X0Spec::SeededRandom { seed, scale } => write!(f, "seeded-random({seed}, {scale})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HRule {
    Auto,
    Explicit(f64),
}

impl HRule {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(HRule::Auto);
        }
        let h: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("bad h `{s}`; use `auto` or a positive number")))?;
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::Config(format!("h must be positive, got {h}")));
        }
        Ok(HRule::Explicit(h))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub dim: usize,
    pub x0: X0Spec,
    pub t_grid: Vec<f64>,
    pub alpha_override: Option<f64>,
    pub h_rule: HRule,
    pub method: Method,
    pub checkpoint_stride: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "cos_sum".to_string(),
            dim: 10,
            x0: X0Spec::Standard,
            t_grid: vec![1000.0],
            alpha_override: None,
            h_rule: HRule::Auto,
            method: Method::Rk4,
            checkpoint_stride: 100,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        if self.t_grid.is_empty() {
            return Err(Error::Config("at least one horizon T is required".into()));
        }
        for &t in &self.t_grid {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("horizons must be positive, got {t}")));
            }
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("T grid must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn resolve_problem(&self) -> Result<Problem> {
        let base = Problem::by_name(&self.problem, self.dim)?;
        match self.x0 {
            X0Spec::Standard => Ok(base),
            X0Spec::SeededRandom { seed, scale } => {
                let mut rng = SplitMix64::new(seed);
                base.with_x0(rng.uniform_vec(self.dim, scale))
            }
        }
    }

    /// Friction for one horizon: the explicit override if present, otherwise
    /// the schedule (which refuses L2 = 0 problems).
    pub fn resolve_alpha(&self, problem: &Problem, t_final: f64) -> Result<f64> {
        match self.alpha_override {
            Some(alpha) if alpha > 0.0 => Ok(alpha),
            Some(alpha) => Err(Error::NonPositiveInput {
                name: "alpha",
                value: alpha,
            }),
            None => alpha_for_horizon(problem.l2(), problem.delta_f(), t_final),
        }
    }

    pub fn resolve_params(&self, problem: &Problem, alpha: f64, t_final: f64) -> Result<OdeParams> {
        match self.h_rule {
            HRule::Auto => OdeParams::auto(
                alpha,
                problem.l1(),
                t_final,
                self.method,
                self.checkpoint_stride,
            ),
            HRule::Explicit(h) => {
                OdeParams::new(alpha, t_final, h, self.method, self.checkpoint_stride)
            }
        }
    }
}

/// Partial configuration from one source; later overlays win field by field.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverlay {
    pub problem: Option<String>,
    pub dim: Option<usize>,
    pub x0: Option<String>,
    pub t_grid: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub h: Option<String>,
    pub method: Option<String>,
    pub stride: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigOverlay {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self> {
        let mut overlay = ConfigOverlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad =
                |what: &str| Error::Config(format!("line {}: bad {what} `{value}`", lineno + 1));
            match key {
                "problem" => overlay.problem = Some(value.to_string()),
                "dim" => overlay.dim = Some(value.parse().map_err(|_| bad("dim"))?),
                "x0" => overlay.x0 = Some(value.to_string()),
                "T" => overlay.t_grid = Some(parse_t_grid(value)?),
                "alpha" => overlay.alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
                "h" => overlay.h = Some(value.to_string()),
                "method" => overlay.method = Some(value.to_string()),
                "stride" => overlay.stride = Some(value.parse().map_err(|_| bad("stride"))?),
                "out" => overlay.out = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(overlay)
    }

    /// Apply `self` on top of `base`.
    pub fn over(self, base: ConfigOverlay) -> ConfigOverlay {
        ConfigOverlay {
            problem: self.problem.or(base.problem),
            dim: self.dim.or(base.dim),
            x0: self.x0.or(base.x0),
            t_grid: self.t_grid.or(base.t_grid),
            alpha: self.alpha.or(base.alpha),
            h: self.h.or(base.h),
            method: self.method.or(base.method),
            stride: self.stride.or(base.stride),
            out: self.out.or(base.out),
        }
    }

    pub fn build(self) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let cfg = RunConfig {
            problem: self.problem.unwrap_or(defaults.problem),
            dim: self.dim.unwrap_or(defaults.dim),
            x0: match self.x0 {
                Some(s) => X0Spec::parse(&s)?,
                None => defaults.x0,
            },
            t_grid: self.t_grid.unwrap_or(defaults.t_grid),
            alpha_override: self.alpha,
            h_rule: match self.h {
                Some(s) => HRule::parse(&s)?,
                None => defaults.h_rule,
            },
            method: match self.method {
                Some(s) => Method::parse(&s)?,
                None => defaults.method,
            },
            checkpoint_stride: self.stride.unwrap_or(defaults.checkpoint_stride),
            output_dir: self.out.unwrap_or(defaults.output_dir),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad horizon `{tok}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_file_contents() {
        let text = "\
# laboratory defaults
problem = cos_sum
dim = 10
T = 100, 316.227766, 1000
h = auto
stride = 100
x0 = seeded-random(42, 2.0)
out = results
";
        let cfg = ConfigOverlay::from_str_contents(text)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(cfg.problem, "cos_sum");
        assert_eq!(cfg.dim, 10);
        assert_eq!(cfg.t_grid.len(), 3);
        assert_eq!(
            cfg.x0,
            X0Spec::SeededRandom {
                seed: 42,
                scale: 2.0
            }
        );
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn flags_override_file_values() {
        let file = ConfigOverlay::from_str_contents("problem = quadratic\ndim = 1\n").unwrap();
        let flags = ConfigOverlay {
            dim: Some(4),
            ..Default::default()
        };
        let cfg = flags.over(file).build().unwrap();
        assert_eq!(cfg.problem, "quadratic");
        assert_eq!(cfg.dim, 4);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ConfigOverlay::from_str_contents("problem cos_sum").is_err());
        assert!(ConfigOverlay::from_str_contents("color = red").is_err());
        assert!(X0Spec::parse("seeded-random(1)").is_err());
        assert!(X0Spec::parse("gaussian").is_err());
        assert!(HRule::parse("-0.1").is_err());
        let cfg = ConfigOverlay {
            t_grid: Some(vec![10.0, 5.0]),
            ..Default::default()
        };
        assert!(cfg.build().is_err());
    }

    #[test]
    fn degenerate_schedule_requires_override() {
        let cfg = RunConfig {
            problem: "quadratic".into(),
            dim: 1,
            ..Default::default()
        };
        let p = cfg.resolve_problem().unwrap();
        assert!(matches!(
            cfg.resolve_alpha(&p, 10.0),
            Err(Error::DegenerateSchedule { .. })
        ));
        let with_alpha = RunConfig {
            alpha_override: Some(2.0),
            ..cfg
        };
        assert_eq!(with_alpha.resolve_alpha(&p, 10.0).unwrap(), 2.0);
    }

    #[test]
    fn seeded_x0_is_reproducible_and_in_range() {
        let cfg = RunConfig {
            x0: X0Spec::SeededRandom {
                seed: 7,
                scale: 1.5,
            },
            ..Default::default()
        };
        let a = cfg.resolve_problem().unwrap();
        let b = cfg.resolve_problem().unwrap();
        assert_eq!(a.x0(), b.x0());
        assert!(a.x0().iter().all(|x| x.abs() < 1.5));
    }
}
