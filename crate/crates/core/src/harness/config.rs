//! TOML experiment configs and the runner behind `adgt run`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::rates::{fit_rate, RateFit};
use super::setup::{build_map, prepare, MapSpec, ScheduleSpec};
use super::trace::Trace;
use crate::error::{Error, Result};
use crate::gap_tracker::Setting;
use crate::linalg::Vector;
use crate::problems::{make_instance, InstanceSpec, Problem};
use crate::solvers_continuous::{integrate, Alpha, CtProblem, Dynamics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: InstanceSpec,
    #[serde(default)]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub continuous: Option<ContinuousSection>,
    #[serde(default)]
    pub map: MapSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub tracker: TrackerSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: String,
    pub k_max: usize,
    #[serde(default)]
    pub x0: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSection {
    pub dynamics: String,
    pub alpha: Alpha,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub x0: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSection {
    #[serde(default = "yes")]
    pub on: bool,
}

impl Default for TrackerSection {
    fn default() -> Self {
        Self { on: true }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: PathBuf,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match (&c.solver, &c.continuous) {
            (Some(_), None) | (None, Some(_)) => Ok(c),
            _ => Err(Error::Config("exactly one of [solver] and [continuous] is required".into())),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RateReport {
    Fit(RateFit),
    Note(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub solver: String,
    /// Iterations, or the horizon T for continuous runs.
    pub k_max: f64,
    pub final_gap: Option<f64>,
    pub final_f_gap: Option<f64>,
    pub theorem_bound: Option<f64>,
    /// theorem_bound − final_f_gap.
    pub bound_margin: Option<f64>,
    pub rate_fit: Option<RateReport>,
    pub status: String,
    pub violation: Option<String>,
}

impl Summary {
    fn failed(solver: &str, k_max: f64, e: &Error) -> Self {
        Summary {
            solver: solver.to_string(),
            k_max,
            final_gap: None,
            final_f_gap: None,
            theorem_bound: None,
            bound_margin: None,
            rate_fit: None,
            status: "invariant-violation".into(),
            violation: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub trace: Option<Trace>,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn exit_code(&self) -> i32 {
        if self.summary.violation.is_some() {
            2
        } else {
            0
        }
    }
}

fn rate_report(trace: &Trace) -> Option<RateReport> {
    let pts: Vec<(f64, f64)> = trace.rows.iter().map(|r| (r.x(), r.gap)).collect();
    match fit_rate(&pts) {
        Ok(f) => Some(RateReport::Fit(f)),
        Err(Error::DegenerateTrace(m)) if m == "converged-exactly" => Some(RateReport::Note(m)),
        Err(_) => None,
    }
}

/// Run the experiment without touching the file system. Invariant
/// violations come back as a result with exit code 2; anything else that
/// goes wrong is an error (exit code 3).
pub fn execute_config(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let instance = make_instance(&cfg.problem, cfg.seed)?;
    if let Some(s) = &cfg.solver {
        let method: Setting = s.method.parse()?;
        let exp = prepare(method, instance, &cfg.map, &cfg.schedule, s.k_max, s.x0.clone(), cfg.seed)?
            .with_tracker(cfg.tracker.on);
        let out = match exp.execute() {
            Ok(o) => o,
            Err(e @ Error::InvariantViolation { .. }) => {
                return Ok(ExperimentResult { trace: None, summary: Summary::failed(&s.method, s.k_max as f64, &e) })
            }
            Err(e) => return Err(e),
        };
        let trace = Trace::from_records(&out.records, out.vi_rows.as_deref());
        let last = out.records.last();
        let f_gap = out.f_gaps.last().copied();
        let bound = last.map(|r| r.theorem_bound);
        let summary = Summary {
            solver: s.method.clone(),
            k_max: s.k_max as f64,
            final_gap: last.map(|r| r.gap),
            final_f_gap: f_gap,
            theorem_bound: bound,
            bound_margin: bound.zip(f_gap).map(|(b, g)| b - g),
            rate_fit: rate_report(&trace),
            status: "ok".into(),
            violation: None,
        };
        return Ok(ExperimentResult { trace: Some(trace), summary });
    }
    let c = cfg.continuous.as_ref().expect("checked on load");
    let dynamics = Dynamics::parse(&c.dynamics)?;
    let Problem::Objective(f) = &instance.problem else {
        return Err(Error::IncompatibleConfiguration("continuous dynamics need an objective".into()));
    };
    let sigma = cfg.map.sigma.unwrap_or(1.0);
    let map = build_map(&cfg.map, &instance.set, sigma)?;
    let consts = f.constants_for(&map);
    let p = CtProblem {
        objective: f,
        map: &map,
        strong_convexity: consts.strongly_convex.unwrap_or(0.0),
        x_star: instance.truth.x_star.clone(),
        f_star: instance.truth.f_star,
        x0: c.x0.clone(),
    };
    if dynamics == Dynamics::CtAsc && consts.strongly_convex.is_none() {
        return Err(Error::NotStronglyConvex);
    }
    let run = integrate(dynamics, &p, c.alpha, c.h, c.t_end)?;
    let trace = Trace::from_continuous(&run);
    let last = run.final_point();
    let bound = run.monotone_bound();
    let summary = Summary {
        solver: c.dynamics.clone(),
        k_max: c.t_end,
        final_gap: Some(last.gap),
        final_f_gap: Some(last.f_gap),
        theorem_bound: Some(bound),
        bound_margin: Some(bound - last.f_gap),
        rate_fit: rate_report(&trace),
        status: "ok".into(),
        violation: None,
    };
    Ok(ExperimentResult { trace: Some(trace), summary })
}

/// Load, run and write outputs; returns the process exit code.
pub fn run_experiment(path: &Path) -> (i32, std::result::Result<ExperimentResult, Error>) {
    let cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return (3, Err(e)),
    };
    let res = match execute_config(&cfg) {
        Ok(r) => r,
        Err(e) => return (3, Err(e)),
    };
    if let Err(e) = write_outputs(&cfg.output, &res) {
        return (3, Err(e));
    }
    (res.exit_code(), Ok(res))
}

pub fn write_outputs(out: &OutputSection, res: &ExperimentResult) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    if let Some(t) = &res.trace {
        std::fs::write(&out.csv, t.emit()?).map_err(io)?;
    }
    if let Some(j) = &out.json {
        let text = serde_json::to_string_pretty(&res.summary).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(j, text + "\n").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GD: &str = r#"
[problem]
family = "quadratic"
dim = 1
diag = [1.0]

[solver]
method = "gd"
k_max = 10
x0 = [1.0]

[output]
csv = "unused.csv"
"#;

    #[test]
    fn gd_trace_shape() {
        let cfg = ExperimentConfig::from_toml(GD).unwrap();
        let res = execute_config(&cfg).unwrap();
        let text = res.trace.as_ref().unwrap().emit().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], "k,A,f_xhat,U,L,G,Ed,scaled_gap,theorem_bound");
        let t = res.trace.unwrap();
        assert!(t.rows.iter().skip(1).all(|r| r.f_xhat.unwrap() <= r.theorem_bound));
        assert_eq!(Trace::parse(&text).unwrap(), t);
        assert_eq!(res.summary.status, "ok");
    }

    #[test]
    fn zero_iterations_give_one_row() {
        let cfg = ExperimentConfig::from_toml(&GD.replace("k_max = 10", "k_max = 0")).unwrap();
        let t = execute_config(&cfg).unwrap().trace.unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].ed.is_none());
    }

    #[test]
    fn deterministic() {
        let text = GD.replace("family = \"quadratic\"\ndim = 1\ndiag = [1.0]", "family = \"huber\"\ndim = 4");
        let text = text.replace("method = \"gd\"", "method = \"md\"").replace("x0 = [1.0]\n", "");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let a = execute_config(&cfg).unwrap().trace.unwrap().emit().unwrap();
        let b = execute_config(&cfg).unwrap().trace.unwrap().emit().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_configs_rejected() {
        assert!(ExperimentConfig::from_toml("[problem]\nfamily = 3").is_err());
        assert!(ExperimentConfig::from_toml(&GD.replace("k_max", "kmax")).is_err());
        let both = format!("{GD}\n[continuous]\ndynamics = \"ct-gd\"\nalpha = {{ kind = \"linear\", alpha0 = 1.0, c = 1.0 }}\nh = 0.01\nT = 1.0\n");
        assert!(ExperimentConfig::from_toml(&both).is_err());
    }

    #[test]
    fn continuous_config() {
        let text = GD.replace(
            "[solver]\nmethod = \"gd\"\nk_max = 10\nx0 = [1.0]",
            "[continuous]\ndynamics = \"ct-gd\"\nalpha = { kind = \"linear\", alpha0 = 1.0, c = 1.0 }\nh = 0.001\nT = 2.0\nx0 = [1.0]",
        );
        let res = execute_config(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
        let csv = res.trace.unwrap().emit().unwrap();
        assert!(csv.starts_with("t,A,"));
        assert!(res.summary.bound_margin.unwrap() >= 0.0);
    }
}
