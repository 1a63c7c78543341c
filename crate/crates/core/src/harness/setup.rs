//! Turning (method, instance, map spec, schedule spec) into a runnable
//! experiment with its tracker constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap_tracker::{GapRecord, Schedule, Setting, ThmParams, TrackerCtx};
use crate::linalg::Vector;
use crate::mirror_maps::{FeasibleSet, MirrorMap, TimeVaryingMap};
use crate::problems::{default_probes, Instance, Problem};
use crate::solvers_discrete::{run, Oracle, Run, RunOptions};
use crate::vi_saddle::{solve_saddle, solve_vi, ViRow};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    /// "euclidean" (default) or "entropy".
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// "default", "anytime" or "custom".
    #[serde(default)]
    pub kind: Option<String>,
    /// Constant of the anytime schedule c/√(i+1).
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Multiply every weight by this factor.
    #[serde(default)]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub method: Setting,
    pub instance: Instance,
    pub map: TimeVaryingMap,
    pub schedule: Schedule,
    pub opts: RunOptions,
    pub k_max: usize,
    /// Probe set for operator instances.
    pub probes: Vec<Vector>,
    pub theorem: ThmParams,
}

/// What an experiment produced, in a solver-independent form.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub records: Vec<GapRecord>,
    /// f̄(x̂) − f* per record (probe-restricted VI gap for operators).
    pub f_gaps: Vec<f64>,
    pub vi_rows: Option<Vec<ViRow>>,
    pub run: Run,
}

fn default_center(set: &FeasibleSet) -> Vector {
    match set {
        FeasibleSet::Rn { dim } => vec![0.0; *dim],
        FeasibleSet::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
        FeasibleSet::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
        FeasibleSet::Ball { center, .. } => center.clone(),
        FeasibleSet::Product { blocks } => blocks.iter().flat_map(default_center).collect(),
    }
}

fn leaf_map(kind: &str, set: &FeasibleSet, center: Vector, sigma: f64) -> Result<MirrorMap> {
    match kind {
        "euclidean" => MirrorMap::euclidean(set.clone(), center, sigma),
        "entropy" => MirrorMap::entropy_centered(set.clone(), center, sigma),
        other => Err(Error::Config(format!("unknown map kind `{other}`"))),
    }
}

/// The base map on `set`; product sets get one block map per factor.
pub fn build_map(spec: &MapSpec, set: &FeasibleSet, sigma: f64) -> Result<MirrorMap> {
    let kind = spec.kind.as_deref().unwrap_or("euclidean");
    let center = spec.center.clone().unwrap_or_else(|| default_center(set));
    if center.len() != set.dim() {
        return Err(Error::Config(format!("map center has {} entries, set has dimension {}", center.len(), set.dim())));
    }
    match set {
        FeasibleSet::Product { blocks } => {
            let maps = blocks
                .iter()
                .zip(set.block_ranges())
                .map(|(b, r)| leaf_map(kind, b, center[r].to_vec(), sigma))
                .collect::<Result<Vec<_>>>()?;
            MirrorMap::product(maps)
        }
        _ => leaf_map(kind, set, center, sigma),
    }
}

/// Largest dual norm of F over the vertices of a bounded polytope.
fn operator_bound(op: &crate::problems::MonotoneOp, map: &MirrorMap) -> Result<f64> {
    let verts = map.set().vertices().ok_or(Error::MissingConstant("operator bound"))?;
    Ok(verts.iter().map(|v| map.dual_norm(&op.eval(v))).fold(0.0, f64::max))
}

pub fn prepare(
    method: Setting,
    instance: Instance,
    map_spec: &MapSpec,
    sched: &ScheduleSpec,
    k_max: usize,
    x0: Option<Vector>,
    seed: u64,
) -> Result<Experiment> {
    let set = instance.set.clone();
    let recentered;
    let map_spec = match (&x0, method) {
        (Some(x), Setting::Gd) if map_spec.center.is_none() => {
            recentered = MapSpec { center: Some(x.clone()), ..map_spec.clone() };
            &recentered
        }
        _ => map_spec,
    };
    let sigma = map_spec.sigma.unwrap_or(1.0);
    if !(sigma > 0.0) {
        return Err(Error::Config("map sigma must be positive".into()));
    }
    let x_star = instance.truth.x_star.clone();
    let mut theorem = ThmParams { sigma: Some(sigma), ..Default::default() };
    let mut ctx = TrackerCtx::default();

    let (map, lip, smooth) = match &instance.problem {
        Problem::Objective(f) => {
            let probe = build_map(map_spec, &set, sigma)?;
            let c = f.constants_for(&probe);
            ctx.f_star = Some(instance.truth.f_star);
            let map = match method {
                Setting::Asc | Setting::AscUnconstrained => {
                    let l = c.smooth.ok_or(Error::NotSmooth)?;
                    let mu = c.strongly_convex.ok_or(Error::NotStronglyConvex)?;
                    if !(l > mu) {
                        return Err(Error::DomainError("accumulation base needs L > σ".into()));
                    }
                    theorem.kappa = Some(l / mu);
                    let base = build_map(map_spec, &set, l - mu)?;
                    theorem.sigma = Some(l - mu);
                    TimeVaryingMap::accumulation(base, mu)?
                }
                Setting::Cmd => TimeVaryingMap::composite(probe, f.composite().clone(), 0.0)?,
                _ => TimeVaryingMap::fixed(probe),
            };
            ctx.phi_star = map.base().value(&x_star);
            theorem.d_phi = Some(ctx.phi_star);
            (map, c.lipschitz, c.smooth)
        }
        Problem::Operator(_) | Problem::Saddle(_) => {
            let map = TimeVaryingMap::fixed(build_map(map_spec, &set, sigma)?);
            let op = instance.operator().expect("operator");
            ctx.max_phi = map.base().max_value()?;
            theorem.max_phi = Some(ctx.max_phi);
            let lip = operator_bound(&op, map.base()).ok();
            (map.clone(), lip, Some(op.smooth_for(map.base())))
        }
    };
    let big_l = match method {
        Setting::Md | Setting::Cmd | Setting::Vi => lip,
        _ => smooth,
    };
    theorem.l = big_l;
    if method == Setting::Fw {
        theorem.l_nu = smooth;
        theorem.nu = Some(1.0);
        theorem.diameter = set.diameter(false).ok();
    }

    let kind = sched.kind.as_deref().unwrap_or("default");
    let l_req = || big_l.ok_or(Error::MissingConstant("L"));
    let mut schedule = match kind {
        "default" => match method {
            Setting::Md | Setting::Cmd | Setting::Vi => {
                let d = if instance.operator().is_some() { ctx.max_phi } else { ctx.phi_star };
                theorem.horizon = Some(k_max);
                if instance.operator().is_some() {
                    theorem.d_phi = Some(d);
                }
                Schedule::md_fixed_horizon(l_req()?, sigma, d, k_max)?
            }
            Setting::Amd => Schedule::amd(sigma, l_req()?, k_max)?,
            Setting::Gd => Schedule::gd(sigma, l_req()?, k_max)?,
            Setting::Asc => Schedule::asc(theorem.kappa.expect("set above"), k_max)?,
            Setting::AscUnconstrained => Schedule::asc_unconstrained(theorem.kappa.expect("set above"), k_max)?,
            Setting::Fw => Schedule::fw(k_max)?,
            Setting::Mp => Schedule::mp(sigma, l_req()?, k_max)?,
        },
        "anytime" => Schedule::md_anytime(sched.c.unwrap_or(1.0), k_max)?,
        "custom" => {
            let w = sched.weights.clone().ok_or_else(|| Error::Config("custom schedule needs `weights`".into()))?;
            if w.len() < k_max + 1 {
                return Err(Error::Config(format!("custom schedule has {} weights, needs {}", w.len(), k_max + 1)));
            }
            Schedule::custom(w)?
        }
        other => return Err(Error::Config(format!("unknown schedule kind `{other}`"))),
    };
    if let Some(f) = sched.scale {
        schedule = schedule.scaled(f);
    }
    if matches!(method, Setting::Md | Setting::Cmd | Setting::Vi) {
        ctx.step_lipschitz = big_l;
    }
    ctx.params = theorem;
    let probes = if instance.operator().is_some() { default_probes(&set, seed) } else { Vec::new() };
    Ok(Experiment {
        method,
        instance,
        map,
        schedule,
        opts: RunOptions { tracker_on: true, ctx, x0 },
        k_max,
        probes,
        theorem,
    })
}

impl Experiment {
    pub fn with_tracker(mut self, on: bool) -> Self {
        self.opts.tracker_on = on;
        self
    }

    pub fn execute(&self) -> Result<Outcome> {
        let method = if self.method == Setting::Vi { Setting::Md } else { self.method };
        match &self.instance.problem {
            Problem::Objective(f) => {
                let r = run(method, &Oracle::Objective(f), &self.map, &self.schedule, self.k_max, &self.opts)?;
                let fs = self.instance.truth.f_star;
                let f_gaps = r.records.iter().map(|rec| rec.f_xhat.expect("objective") - fs).collect();
                Ok(Outcome { records: r.records.clone(), f_gaps, vi_rows: None, run: r })
            }
            Problem::Operator(op) => {
                let s = solve_vi(op, self.map.base(), &self.schedule, self.k_max, method, &self.probes, &self.opts)?;
                let f_gaps = s.rows.iter().map(|r| r.probe_gap).collect();
                Ok(Outcome { records: s.run.records.clone(), f_gaps, vi_rows: Some(s.rows), run: s.run })
            }
            Problem::Saddle(p) => {
                let s = solve_saddle(p, self.map.base(), &self.schedule, self.k_max, method, &self.probes, &self.opts)?;
                let f_gaps = s.rows.iter().map(|r| r.probe_gap).collect();
                Ok(Outcome { records: s.run.records.clone(), f_gaps, vi_rows: Some(s.rows), run: s.run })
            }
        }
    }
}
