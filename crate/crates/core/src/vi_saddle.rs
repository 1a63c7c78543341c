//! Monotone variational inequalities and convex-concave saddle points,
//! solved with mirror descent or mirror prox on F in place of ∇f.

use crate::error::{Error, Result};
use crate::gap_tracker::{Schedule, Setting};
use crate::linalg::Vector;
use crate::mirror_maps::{MirrorMap, TimeVaryingMap};
use crate::problems::{restricted_vi_gap, MonotoneOp, SaddleProblem};
use crate::solvers_discrete::{run, Oracle, Run, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ViRow {
    pub k: usize,
    /// max over probes u of ⟨F(u), x̂ − u⟩.
    pub probe_gap: f64,
    /// max over probes (v, w) of Φ(v̄, w) − Φ(v, w̄); saddle runs only.
    pub saddle_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SaddleRun {
    pub run: Run,
    pub xhat: Vector,
    pub v_bar: Option<Vector>,
    pub w_bar: Option<Vector>,
    pub rows: Vec<ViRow>,
}

impl SaddleRun {
    pub fn final_probe_gap(&self) -> f64 {
        self.rows.last().map(|r| r.probe_gap).unwrap_or(f64::NAN)
    }
}

fn check_method(method: Setting) -> Result<()> {
    match method {
        Setting::Md | Setting::Mp => Ok(()),
        other => Err(Error::IncompatibleConfiguration(format!("{other} is not an operator method"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    oracle: &Oracle,
    op: &MonotoneOp,
    saddle: Option<&SaddleProblem>,
    map: &MirrorMap,
    schedule: &Schedule,
    k: usize,
    method: Setting,
    probes: &[Vector],
    opts: &RunOptions,
) -> Result<SaddleRun> {
    check_method(method)?;
    if !map.set().is_bounded() {
        return Err(Error::UnboundedSet);
    }
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    let mut opts = opts.clone();
    opts.ctx.max_phi = map.max_value()?;
    let tv = TimeVaryingMap::fixed(map.clone());
    let r = run(method, oracle, &tv, schedule, k, &opts)?;
    let mut rows = Vec::with_capacity(r.records.len());
    for rec in &r.records {
        let xhat = &r.history[rec.k].xhat;
        let saddle_gap = saddle.map(|p| saddle_gap(p, xhat, probes));
        rows.push(ViRow { k: rec.k, probe_gap: restricted_vi_gap(op, xhat, probes)?, saddle_gap });
    }
    let xhat = r.final_state.xhat.clone();
    let (v_bar, w_bar) = match saddle {
        Some(p) => {
            let (v, w) = p.split(&xhat);
            (Some(v.to_vec()), Some(w.to_vec()))
        }
        None => (None, None),
    };
    Ok(SaddleRun { run: r, xhat, v_bar, w_bar, rows })
}

/// Solve the VI for `op` over the map's (bounded) set.
#[allow(clippy::too_many_arguments)]
pub fn solve_vi(
    op: &MonotoneOp,
    map: &MirrorMap,
    schedule: &Schedule,
    k: usize,
    method: Setting,
    probes: &[Vector],
    opts: &RunOptions,
) -> Result<SaddleRun> {
    solve(&Oracle::Operator(op), op, None, map, schedule, k, method, probes, opts)
}

/// Solve min_v max_w Φ(v, w); `map` lives on V × W.
#[allow(clippy::too_many_arguments)]
pub fn solve_saddle(
    prob: &SaddleProblem,
    map: &MirrorMap,
    schedule: &Schedule,
    k: usize,
    method: Setting,
    probes: &[Vector],
    opts: &RunOptions,
) -> Result<SaddleRun> {
    solve(&Oracle::Saddle(prob), &prob.operator(), Some(prob), map, schedule, k, method, probes, opts)
}

/// max over probes (v, w) of Φ(v̄, w) − Φ(v, w̄).
pub fn saddle_gap(prob: &SaddleProblem, xhat: &[f64], probes: &[Vector]) -> f64 {
    let (vb, wb) = prob.split(xhat);
    probes
        .iter()
        .map(|u| {
            let (v, w) = prob.split(u);
            prob.value(vb, w) - prob.value(v, wb)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::mirror_maps::FeasibleSet;
    use crate::problems::{default_probes, make_instance, InstanceSpec, Problem};

    fn square() -> (SaddleProblem, MirrorMap) {
        let i = FeasibleSet::cube(1, 1.0).unwrap();
        let p = SaddleProblem::bilinear(vec![vec![1.0]], i.clone(), i.clone()).unwrap();
        let map = MirrorMap::product(vec![
            MirrorMap::euclidean(i.clone(), vec![0.5], 1.0).unwrap(),
            MirrorMap::euclidean(i, vec![-0.5], 1.0).unwrap(),
        ])
        .unwrap();
        (p, map)
    }

    #[test]
    fn zero_operator_has_zero_gap() {
        let set = FeasibleSet::cube(2, 1.0).unwrap();
        let op = MonotoneOp::zero(2);
        let map = MirrorMap::euclidean(set.clone(), vec![0.0; 2], 1.0).unwrap();
        let probes = default_probes(&set, 0);
        let s = Schedule::mp(1.0, 1.0, 20).unwrap();
        let r = solve_vi(&op, &map, &s, 20, Setting::Mp, &probes, &RunOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.probe_gap == 0.0));
    }

    #[test]
    fn bilinear_converges_to_origin() {
        let (p, map) = square();
        let probes = default_probes(&p.set(), 3);
        let l = p.operator().smooth_for(&map);
        let s = Schedule::mp(1.0, l, 100).unwrap();
        let opts = RunOptions { tracker_on: true, ..Default::default() };
        let r = solve_saddle(&p, &map, &s, 100, Setting::Mp, &probes, &opts).unwrap();
        let v = r.v_bar.clone().unwrap();
        let w = r.w_bar.clone().unwrap();
        assert!(norm2(&[v[0], w[0]]) <= 0.1);
        let vi = solve_vi(&p.operator(), &map, &s, 100, Setting::Mp, &probes, &opts).unwrap();
        assert_eq!(vi.run.history, r.run.history);
    }

    #[test]
    fn unbounded_set_rejected() {
        let p = SaddleProblem::bilinear(vec![vec![1.0]], FeasibleSet::rn(1), FeasibleSet::rn(1)).unwrap();
        let r1 = FeasibleSet::rn(1);
        let map = MirrorMap::product(vec![
            MirrorMap::euclidean(r1.clone(), vec![0.0], 1.0).unwrap(),
            MirrorMap::euclidean(r1, vec![0.0], 1.0).unwrap(),
        ])
        .unwrap();
        let s = Schedule::mp(1.0, 1.0, 3).unwrap();
        let r = solve_saddle(&p, &map, &s, 3, Setting::Mp, &[vec![0.0, 0.0]], &RunOptions::default());
        assert!(matches!(r, Err(Error::UnboundedSet)));
    }

    #[test]
    fn matching_pennies() {
        let spec = InstanceSpec { matrix: Some(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]), ..InstanceSpec::family("matrix_game") };
        let inst = make_instance(&spec, 0).unwrap();
        let Problem::Saddle(p) = &inst.problem else { panic!("saddle instance") };
        let blocks = vec![
            MirrorMap::entropy_centered(p.v_set.clone(), vec![0.8, 0.2], 1.0).unwrap(),
            MirrorMap::entropy_centered(p.w_set.clone(), vec![0.3, 0.7], 1.0).unwrap(),
        ];
        let map = MirrorMap::product(blocks).unwrap();
        let l = p.operator().smooth_for(&map);
        let s = Schedule::mp(1.0, l, 1000).unwrap();
        let probes = default_probes(&inst.set, 1);
        let r = solve_saddle(p, &map, &s, 1000, Setting::Mp, &probes, &RunOptions { tracker_on: true, ..Default::default() })
            .unwrap();
        let v = r.v_bar.clone().unwrap();
        assert!((v[0] - 0.5).abs() < 0.02, "{v:?}");
        assert!(inst.truth.f_star.abs() < 1e-12);
        assert!(r.final_probe_gap() < 0.02);
    }
}
