//! Run configuration: a flat `key = value` text file with optional
//! `[section]` headers (a header prefixes the keys below it, so `type =
//! per` under `[kernel]` is the same as a bare `kernel.type = per`), and a
//! CLI override flag of the same name for every key.

use std::fs;
use std::path::{Path, PathBuf};

use crate::decoder::{DecoderConfig, InitStrategy};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Query-time specification: an explicit list or an inclusive range.
#[derive(Debug, Clone, PartialEq)]
pub enum QuerySpec {
    List(Vec<f64>),
    /// `start:step:end`, end inclusive up to round-off.
    Range { start: f64, step: f64, end: f64 },
}

impl QuerySpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "query range must be start:step:end, got '{text}'"
                )));
            }
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("invalid query number '{p}'")))
                })
                .collect::<Result<_>>()?;
            if !(nums[1] > 0.0) {
                return Err(Error::Config("query step must be positive".into()));
            }
            Ok(QuerySpec::Range {
                start: nums[0],
                step: nums[1],
                end: nums[2],
            })
        } else {
            let list: Vec<f64> = text
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("invalid query number '{s}'")))
                })
                .collect::<Result<_>>()?;
            Ok(QuerySpec::List(list))
        }
    }

    pub fn expand(&self) -> Result<Vec<f64>> {
        let times = match self {
            QuerySpec::List(v) => v.clone(),
            QuerySpec::Range { start, step, end } => {
                let mut out = Vec::new();
                let n = ((end - start) / step + 1e-9).floor() as i64;
                for k in 0..=n.max(0) {
                    out.push(start + k as f64 * step);
                }
                out
            }
        };
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("query times must be finite".into()));
        }
        Ok(times)
    }
}

/// Everything the CLI commands need, with the defaults documented in
/// `--help`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    // kernel
    pub kernel_type: String,
    pub sigma_s: f64,
    pub l_s: f64,
    pub sigma_p: f64,
    pub l_p: f64,
    pub period: f64,
    pub lambda: f64,
    // decoder
    pub step_size: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub init: String,
    pub line_search: bool,
    // grid
    pub nv: usize,
    pub nh: usize,
    pub v_lines: Option<Vec<f64>>,
    pub h_lines: Option<Vec<f64>>,
    // inputs and outputs
    pub cloud: Option<PathBuf>,
    pub demo: Option<PathBuf>,
    pub queries: Option<QuerySpec>,
    pub out: PathBuf,
    // demo generation
    pub demo_shape: String,
    pub demo_samples: usize,
    pub demo_periods: usize,
    pub demo_center: [f64; 3],
    pub demo_radius: f64,
    // geodesic benchmark
    pub bench_pairs: usize,
    pub bench_mesh: usize,
    pub bench_seed: u64,
    // pattern check
    pub pattern_kind: String,
    pub pattern_period: Option<f64>,
    pub pattern_tolerance: f64,
    // evaluation
    pub eval_pred: Option<PathBuf>,
    pub eval_truth: Option<PathBuf>,
    pub eval_train_n: Option<usize>,
    pub eval_distance: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel_type: "se".into(),
            sigma_s: 5.0,
            l_s: 20.0,
            sigma_p: 1.0,
            l_p: 0.5,
            period: 150.0,
            lambda: 0.01,
            step_size: 0.1,
            max_iterations: 500,
            tolerance: 1e-8,
            init: "previous".into(),
            line_search: true,
            nv: 0,
            nh: 0,
            v_lines: None,
            h_lines: None,
            cloud: None,
            demo: None,
            queries: None,
            out: PathBuf::from("."),
            demo_shape: "infinity".into(),
            demo_samples: 20,
            demo_periods: 6,
            demo_center: [0.0; 3],
            demo_radius: 1.0,
            bench_pairs: 50,
            bench_mesh: 200,
            bench_seed: 7,
            pattern_kind: "periodic".into(),
            pattern_period: None,
            pattern_tolerance: 1e-6,
            eval_pred: None,
            eval_truth: None,
            eval_train_n: None,
            eval_distance: "arccos".into(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for key '{key}'")))
}

fn parse_float_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num::<f64>(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid value '{v}' for key '{key}' (expected on/off)"
        ))),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "kernel.type" => {
                match v {
                    "se" | "per" | "qp" => self.kernel_type = v.into(),
                    _ => {
                        return Err(Error::Config(format!(
                            "kernel.type must be se, per, or qp (got '{v}')"
                        )))
                    }
                }
            }
            "kernel.sigma_s" => self.sigma_s = parse_num(key, v)?,
            "kernel.l_s" => self.l_s = parse_num(key, v)?,
            "kernel.sigma_p" => self.sigma_p = parse_num(key, v)?,
            "kernel.l_p" => self.l_p = parse_num(key, v)?,
            "kernel.period" => self.period = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "decoder.step_size" => self.step_size = parse_num(key, v)?,
            "decoder.max_iterations" => self.max_iterations = parse_num(key, v)?,
            "decoder.tolerance" => self.tolerance = parse_num(key, v)?,
            "decoder.init" => match v {
                "previous" | "nearest" => self.init = v.into(),
                _ => {
                    return Err(Error::Config(format!(
                        "decoder.init must be previous or nearest (got '{v}')"
                    )))
                }
            },
            "decoder.line_search" => self.line_search = parse_bool(key, v)?,
            "grid.nv" => self.nv = parse_num(key, v)?,
            "grid.nh" => self.nh = parse_num(key, v)?,
            "grid.v_lines" => self.v_lines = Some(parse_float_list(key, v)?),
            "grid.h_lines" => self.h_lines = Some(parse_float_list(key, v)?),
            "input.cloud" => self.cloud = Some(PathBuf::from(v)),
            "input.demo" => self.demo = Some(PathBuf::from(v)),
            "queries" => self.queries = Some(QuerySpec::parse(v)?),
            "out" => self.out = PathBuf::from(v),
            "demo.shape" => self.demo_shape = v.into(),
            "demo.samples" => self.demo_samples = parse_num(key, v)?,
            "demo.periods" => self.demo_periods = parse_num(key, v)?,
            "demo.center" => {
                let c = parse_float_list(key, v)?;
                if c.len() != 3 {
                    return Err(Error::Config("demo.center needs three numbers".into()));
                }
                self.demo_center = [c[0], c[1], c[2]];
            }
            "demo.radius" => self.demo_radius = parse_num(key, v)?,
            "bench.pairs" => self.bench_pairs = parse_num(key, v)?,
            "bench.mesh" => self.bench_mesh = parse_num(key, v)?,
            "bench.seed" => self.bench_seed = parse_num(key, v)?,
            "pattern.kind" => self.pattern_kind = v.into(),
            "pattern.period" => self.pattern_period = Some(parse_num(key, v)?),
            "pattern.tolerance" => self.pattern_tolerance = parse_num(key, v)?,
            "eval.pred" => self.eval_pred = Some(PathBuf::from(v)),
            "eval.truth" => self.eval_truth = Some(PathBuf::from(v)),
            "eval.train_n" => self.eval_train_n = Some(parse_num(key, v)?),
            "eval.distance" => match v {
                "arccos" | "atlas" => self.eval_distance = v.into(),
                _ => {
                    return Err(Error::Config(format!(
                        "eval.distance must be arccos or atlas (got '{v}')"
                    )))
                }
            },
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Loads assignments from a config file into `self`.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: no + 1,
                    msg: format!("expected 'key = value', found '{line}'"),
                });
            };
            let key = key.trim();
            let full = if section.is_empty() || key.contains('.') {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            self.set(&full, value).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: no + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// The kernel described by the `kernel.*` keys.
    pub fn kernel(&self) -> Result<KernelSpec> {
        match self.kernel_type.as_str() {
            "se" => KernelSpec::se(self.sigma_s, self.l_s),
            "per" => KernelSpec::periodic(self.sigma_p, self.l_p, self.period),
            "qp" => {
                KernelSpec::quasi_periodic(self.sigma_s, self.l_s, self.sigma_p, self.l_p, self.period)
            }
            other => Err(Error::Config(format!("unknown kernel type '{other}'"))),
        }
    }

    /// The decoder settings described by the `decoder.*` keys.
    pub fn decoder(&self) -> Result<DecoderConfig> {
        let cfg = DecoderConfig {
            step_size: self.step_size,
            max_iterations: self.max_iterations,
            gradient_tolerance: self.tolerance,
            init_strategy: match self.init.as_str() {
                "previous" => InitStrategy::PreviousPrediction,
                "nearest" => InitStrategy::NearestTrainingPoint,
                other => {
                    return Err(Error::Config(format!("unknown init strategy '{other}'")))
                }
            },
            line_search: self.line_search,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn require_cloud(&self) -> Result<&Path> {
        self.cloud
            .as_deref()
            .ok_or_else(|| Error::Config("input.cloud is required for this command".into()))
    }

    pub fn require_demo(&self) -> Result<&Path> {
        self.demo
            .as_deref()
            .ok_or_else(|| Error::Config("input.demo is required for this command".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_a_kernel_and_decoder() {
        let cfg = RunConfig::default();
        assert!(cfg.kernel().is_ok());
        assert!(cfg.decoder().is_ok());
    }

    #[test]
    fn dotted_keys_and_sections_agree() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.cfg");
        std::fs::write(
            &p,
            "kernel.type = per\n[kernel]\nsigma_p = 2.5\nperiod = 30 # comment\n\n[decoder]\nline_search = off\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&p).unwrap();
        assert_eq!(cfg.kernel_type, "per");
        assert_eq!(cfg.sigma_p, 2.5);
        assert_eq!(cfg.period, 30.0);
        assert!(!cfg.line_search);
    }

    #[test]
    fn unknown_key_is_reported_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.cfg");
        std::fs::write(&p, "bogus.key = 1\n").unwrap();
        let mut cfg = RunConfig::default();
        match cfg.apply_file(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn query_range_expansion_is_inclusive() {
        let q = QuerySpec::parse("0:0.5:2").unwrap();
        assert_eq!(q.expand().unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let l = QuerySpec::parse("1, 2.5, 3").unwrap();
        assert_eq!(l.expand().unwrap(), vec![1.0, 2.5, 3.0]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("kernel.type", "cubic").is_err());
        assert!(cfg.set("decoder.line_search", "maybe").is_err());
        assert!(cfg.set("lambda", "abc").is_err());
        assert!(QuerySpec::parse("0:-1:5").is_err());
    }
}
