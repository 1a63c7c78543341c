//! Discrete-time methods: mirror descent (dual averaging), mirror prox,
//! accelerated mirror descent, gradient descent, the strongly convex
//! accelerated method (constrained and unconstrained), composite dual
//! averaging and Frank-Wolfe.

use crate::error::{Error, Result};
use crate::gap_tracker::{chain_tolerance, Accumulator, Entry, GapRecord, Schedule, ScheduleKind, Setting, TrackerCtx};
use crate::linalg::{axpy, mix, norm_inf, Vector};
use crate::mirror_maps::{CompositePart, FeasibleSet, Mode, TimeVaryingMap};
use crate::problems::{Constants, MonotoneOp, Objective, SaddleProblem};

/// First-order information: a (composite) objective or a monotone operator.
#[derive(Debug, Clone, Copy)]
pub enum Oracle<'a> {
    Objective(&'a Objective),
    Operator(&'a MonotoneOp),
    /// Convex-concave Φ seen through F = [∇_vΦ, −∇_wΦ].
    Saddle(&'a SaddleProblem),
}

impl<'a> Oracle<'a> {
    /// Smooth part of the objective; 0 for operators.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Oracle::Objective(f) => f.value(x),
            _ => 0.0,
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vector {
        match self {
            Oracle::Objective(f) => f.gradient(x),
            Oracle::Operator(op) => op.eval(x),
            Oracle::Saddle(p) => {
                let (v, w) = p.split(x);
                let gw = p.grad_w(v, w);
                let mut g = p.grad_v(v, w);
                g.extend(gw.iter().map(|t| -t));
                g
            }
        }
    }

    pub fn composite(&self) -> CompositePart {
        match self {
            Oracle::Objective(f) => f.composite().clone(),
            _ => CompositePart::Zero,
        }
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        match self {
            Oracle::Objective(f) => f.composite().value(x),
            _ => 0.0,
        }
    }

    pub fn is_operator(&self) -> bool {
        !matches!(self, Oracle::Objective(_))
    }

    pub fn constants(&self, map: &TimeVaryingMap) -> Constants {
        match self {
            Oracle::Objective(f) => f.constants_for(map.base()),
            Oracle::Operator(op) => Constants { smooth: Some(op.smooth_for(map.base())), ..Default::default() },
            Oracle::Saddle(p) => {
                Constants { smooth: Some(p.operator().smooth_for(map.base())), ..Default::default() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    pub xhat: Vector,
    pub z: Vector,
    /// ∇f(x) or F(x) at the current x.
    pub g: Vector,
    /// Current regularizer φ_k (composite weight or accumulated anchors).
    pub phi: TimeVaryingMap,
    pub x_tilde: Option<Vector>,
    pub z_tilde: Option<Vector>,
    /// FW vertex for the current gradient.
    pub v: Option<Vector>,
    /// −∇f(x) for FW.
    pub z_hat: Option<Vector>,
    /// Classical gradient-descent iterate, carried alongside GD.
    pub classic: Option<Vector>,
}

fn need_smooth(oracle: &Oracle, map: &TimeVaryingMap) -> Result<f64> {
    oracle.constants(map).smooth.ok_or(Error::NotSmooth)
}

/// Grad(x) = argmin_{u ∈ X} ⟨g, u − x⟩ + L/2‖u − x‖².
fn grad_step(set: &FeasibleSet, x: &[f64], g: &[f64], l: f64) -> Vector {
    let y: Vector = x.iter().zip(g).map(|(xi, gi)| xi - gi / l).collect();
    set.project(&y)
}

fn average(prev: &[f64], x: &[f64], big_a_prev: f64, a: f64, big_a: f64) -> Vector {
    if big_a_prev == 0.0 {
        x.to_vec()
    } else {
        mix(big_a_prev, prev, a, x, big_a)
    }
}

/// State at i = 0. `x0` defaults to the minimizer of φ_0.
pub fn init_state(
    method: Setting,
    oracle: &Oracle,
    map: &TimeVaryingMap,
    schedule: &Schedule,
    x0: Option<Vector>,
) -> Result<SolverState> {
    let n = map.base().dim();
    let a0 = schedule.a(0);
    let mut phi = match map.mode() {
        Mode::Composite { .. } => map.with_weight(schedule.big_a(0)),
        _ => map.clone(),
    };
    let x0 = match x0 {
        Some(x) => x,
        None => phi.grad_conjugate(&vec![0.0; n])?,
    };
    let g = oracle.grad(&x0);
    let mut z = vec![0.0; n];
    axpy(&mut z, -a0, &g);
    let mut st = SolverState {
        k: 0,
        xhat: x0.clone(),
        x: x0.clone(),
        z,
        g,
        phi: phi.clone(),
        x_tilde: None,
        z_tilde: None,
        v: None,
        z_hat: None,
        classic: None,
    };
    match method {
        Setting::Amd | Setting::Asc | Setting::AscUnconstrained => {
            let l = need_smooth(oracle, map)?;
            st.xhat = grad_step(map.set(), &x0, &st.g, l);
            phi.add_anchor(a0, &x0);
            st.phi = phi;
        }
        Setting::Gd => {
            let s = map.base().sigma();
            st.xhat = x0.iter().zip(&st.z).map(|(x, z)| x + z / s).collect();
            st.classic = Some(x0);
        }
        Setting::Fw => {
            st.v = Some(oracle.composite().lmo(map.set(), &st.g)?);
            st.z_hat = Some(st.g.iter().map(|v| -v).collect());
        }
        _ => {}
    }
    Ok(st)
}

pub fn md_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let x = state.phi.grad_conjugate(&state.z)?;
    let g = oracle.grad(&x);
    let mut z = state.z.clone();
    axpy(&mut z, -a, &g);
    let xhat = average(&state.xhat, &x, big_a - a, a, big_a);
    Ok(SolverState { k: i, x, xhat, z, g, ..state.clone() })
}

pub fn mp_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let x_tilde = state.phi.grad_conjugate(&state.z)?;
    let mut z_tilde = state.z.clone();
    axpy(&mut z_tilde, -a, &oracle.grad(&x_tilde));
    let x = state.phi.grad_conjugate(&z_tilde)?;
    let g = oracle.grad(&x);
    let mut z = state.z.clone();
    axpy(&mut z, -a, &g);
    let xhat = average(&state.xhat, &x, big_a - a, a, big_a);
    Ok(SolverState { k: i, x, xhat, z, g, x_tilde: Some(x_tilde), z_tilde: Some(z_tilde), ..state.clone() })
}

pub fn amd_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let l = need_smooth(oracle, &state.phi)?;
    let u = state.phi.grad_conjugate(&state.z)?;
    let x = mix(big_a - a, &state.xhat, a, &u, big_a);
    let g = oracle.grad(&x);
    let mut z = state.z.clone();
    axpy(&mut z, -a, &g);
    let xhat = grad_step(state.phi.set(), &x, &g, l);
    Ok(SolverState { k: i, x, xhat, z, g, ..state.clone() })
}

pub fn gd_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    if !matches!(state.phi.set(), FeasibleSet::Rn { .. }) {
        return Err(Error::Unsupported("gradient descent needs an unconstrained set".into()));
    }
    let a = schedule.a(i);
    let s = state.phi.base().sigma();
    let x0 = state.phi.base().prox_center();
    let x: Vector = x0.iter().zip(&state.z).map(|(c, z)| c + z / s).collect();
    let g = oracle.grad(&x);
    let mut z = state.z.clone();
    axpy(&mut z, -a, &g);
    let xhat = x0.iter().zip(&z).map(|(c, z)| c + z / s).collect();
    let classic = state.classic.as_ref().map(|c| {
        let l = s / schedule.a(i - 1);
        c.iter().zip(&state.g).map(|(ci, gi)| ci - gi / l).collect()
    });
    Ok(SolverState { k: i, x, xhat, z, g, classic, ..state.clone() })
}

fn asc_common(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize, x: Vector) -> Result<SolverState> {
    let a = schedule.a(i);
    let l = need_smooth(oracle, &state.phi)?;
    let g = oracle.grad(&x);
    let mut z = state.z.clone();
    axpy(&mut z, -a, &g);
    let xhat = grad_step(state.phi.set(), &x, &g, l);
    let phi = state.phi.with_anchor(a, &x);
    Ok(SolverState { k: i, x, xhat, z, g, phi, ..state.clone() })
}

pub fn asc_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let u = state.phi.grad_conjugate(&state.z)?;
    let x = mix(big_a - a, &state.xhat, a, &u, big_a);
    asc_common(state, oracle, schedule, i, x)
}

/// Unconstrained variant: x^(i) mixes ∇φ_i*(z^(i−1)), which depends on x^(i)
/// itself; with euclidean φ on R^n the fixed point is linear and solved exactly.
pub fn asc_unconstrained_step(
    state: &SolverState,
    oracle: &Oracle,
    schedule: &Schedule,
    i: usize,
) -> Result<SolverState> {
    if !matches!(state.phi.set(), FeasibleSet::Rn { .. }) || !state.phi.base().is_euclidean() {
        return Err(Error::Unsupported("unconstrained variant needs a euclidean map on R^n".into()));
    }
    let sigma = match state.phi.mode() {
        Mode::Accumulation { sigma, .. } => *sigma,
        _ => return Err(Error::IncompatibleConfiguration("accumulation map required".into())),
    };
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let s_prev = state.phi.sigma();
    let s_new = s_prev + sigma * a;
    // σ_{i−1}∇φ_{i−1}*(z) = z + σΣ_{j<i} a_j x_j + σ0 x0
    let w: Vector = state.phi.grad_conjugate(&state.z)?.iter().map(|u| u * s_prev / s_new).collect();
    let denom = big_a - a * a * sigma / s_new;
    let x: Vector = state.xhat.iter().zip(&w).map(|(xh, wi)| ((big_a - a) * xh + a * wi) / denom).collect();
    asc_common(state, oracle, schedule, i, x)
}

pub fn cmd_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let phi = state.phi.with_weight(schedule.big_a(i));
    let st = SolverState { phi, ..state.clone() };
    md_step(&st, oracle, schedule, i)
}

pub fn fw_step(state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    let (a, big_a) = (schedule.a(i), schedule.big_a(i));
    let v_prev = state.v.as_ref().ok_or(Error::NoLmo)?;
    let x = mix(big_a - a, &state.x, a, v_prev, big_a);
    let g = oracle.grad(&x);
    let v = oracle.composite().lmo(state.phi.set(), &g)?;
    let z_hat = g.iter().map(|v| -v).collect();
    Ok(SolverState { k: i, xhat: x.clone(), x, g, v: Some(v), z_hat: Some(z_hat), ..state.clone() })
}

pub fn step(method: Setting, state: &SolverState, oracle: &Oracle, schedule: &Schedule, i: usize) -> Result<SolverState> {
    match method {
        Setting::Md | Setting::Vi => md_step(state, oracle, schedule, i),
        Setting::Mp => mp_step(state, oracle, schedule, i),
        Setting::Amd => amd_step(state, oracle, schedule, i),
        Setting::Gd => gd_step(state, oracle, schedule, i),
        Setting::Asc => asc_step(state, oracle, schedule, i),
        Setting::AscUnconstrained => asc_unconstrained_step(state, oracle, schedule, i),
        Setting::Cmd => cmd_step(state, oracle, schedule, i),
        Setting::Fw => fw_step(state, oracle, schedule, i),
    }
}

/// Tracker input for the current state.
pub fn entry_of(state: &SolverState, oracle: &Oracle, schedule: &Schedule) -> Entry {
    let i = state.k;
    let v = state.v.clone();
    let psi_v = v.as_ref().map(|v| oracle.psi(v)).unwrap_or(0.0);
    Entry {
        a: schedule.a(i),
        big_a: schedule.big_a(i),
        fx: oracle.value(&state.x),
        psi_x: oracle.psi(&state.x),
        f_xhat: oracle.value(&state.xhat),
        psi_xhat: oracle.psi(&state.xhat),
        x: state.x.clone(),
        g: state.g.clone(),
        xhat: state.xhat.clone(),
        v,
        psi_v,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tracker_on: bool,
    pub ctx: TrackerCtx,
    pub x0: Option<Vector>,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub method: Setting,
    pub history: Vec<Entry>,
    pub records: Vec<GapRecord>,
    pub final_state: SolverState,
}

fn check_compat(method: Setting, oracle: &Oracle, map: &TimeVaryingMap) -> Result<()> {
    let bad = |m: &str| Err(Error::IncompatibleConfiguration(format!("{method}: {m}")));
    if oracle.is_operator() && !matches!(method, Setting::Md | Setting::Mp | Setting::Vi) {
        return bad("operators support md and mp only");
    }
    let composite = oracle.composite();
    match (method, map.mode()) {
        (Setting::Cmd, Mode::Composite { psi, .. }) if *psi == composite => {}
        (Setting::Cmd, Mode::Static) if composite.is_zero() => {}
        (Setting::Cmd, _) => return bad("composite map must carry the objective's ψ"),
        (Setting::Asc | Setting::AscUnconstrained, Mode::Accumulation { .. }) => {}
        (Setting::Asc | Setting::AscUnconstrained, _) => return bad("accumulation map required"),
        (Setting::Fw, _) => {}
        (_, Mode::Static) => {}
        _ => return bad("static map required"),
    }
    if !matches!(method, Setting::Cmd | Setting::Fw) && !composite.is_zero() {
        return bad("composite objectives need cmd or fw");
    }
    match method {
        Setting::Amd | Setting::Asc | Setting::AscUnconstrained | Setting::Gd => {
            if !map.base().is_euclidean() {
                return bad("gradient step needs a euclidean map");
            }
            need_smooth(oracle, map)?;
        }
        Setting::Mp => {
            need_smooth(oracle, map)?;
        }
        _ => {}
    }
    if matches!(method, Setting::Asc | Setting::AscUnconstrained) && oracle.constants(map).strongly_convex.is_none() {
        return Err(Error::NotStronglyConvex);
    }
    if method == Setting::Gd && !matches!(map.set(), FeasibleSet::Rn { .. }) {
        return Err(Error::Unsupported("gradient descent needs an unconstrained set".into()));
    }
    if method == Setting::Fw {
        composite.lmo(map.set(), &vec![0.0; map.base().dim()])?;
    }
    Ok(())
}

/// Tracker setting used for a solver run.
pub fn tracker_setting(method: Setting, oracle: &Oracle) -> Setting {
    if oracle.is_operator() {
        Setting::Vi
    } else if method == Setting::Vi {
        Setting::Md
    } else {
        method
    }
}

/// Run `method` for k_max steps, tracking the gap. With `tracker_on`, every
/// invariant is checked as it is produced and the first failure aborts.
pub fn run(
    method: Setting,
    oracle: &Oracle,
    map: &TimeVaryingMap,
    schedule: &Schedule,
    k_max: usize,
    opts: &RunOptions,
) -> Result<Run> {
    check_compat(method, oracle, map)?;
    if let (Setting::Gd, Some(x0)) = (method, &opts.x0) {
        if x0 != &map.base().prox_center() {
            return Err(Error::IncompatibleConfiguration("gd starts at the center of its map".into()));
        }
    }
    if schedule.k_max() < k_max {
        return Err(Error::IncompatibleConfiguration(format!(
            "schedule covers {} steps, {k_max} requested",
            schedule.k_max()
        )));
    }
    let tset = tracker_setting(method, oracle);
    let track_map = match map.mode() {
        Mode::Composite { .. } => map.clone(),
        _ => map.clone(),
    };
    let mut acc = Accumulator::new(tset, track_map, opts.ctx);
    let mut state = init_state(method, oracle, map, schedule, opts.x0.clone())?;
    let mut history = Vec::with_capacity(k_max + 1);
    let mut records = Vec::with_capacity(k_max + 1);
    let sign_checks = schedule.kind() != ScheduleKind::Custom;
    let consts = oracle.constants(map);
    for i in 0..=k_max {
        if i > 0 {
            state = step(method, &state, oracle, schedule, i)?;
        }
        let e = entry_of(&state, oracle, schedule);
        let st = acc.push(&e)?;
        if opts.tracker_on {
            check_step(method, tset, &state, &e, &st, &acc, map, &consts, opts, sign_checks)?;
        }
        history.push(e);
        if let Some(r) = st.record {
            records.push(r);
        }
    }
    Ok(Run { method, history, records, final_state: state })
}

#[allow(clippy::too_many_arguments)]
fn check_step(
    method: Setting,
    tset: Setting,
    state: &SolverState,
    e: &Entry,
    st: &crate::gap_tracker::StepState,
    acc: &Accumulator,
    map: &TimeVaryingMap,
    consts: &Constants,
    opts: &RunOptions,
    sign_checks: bool,
) -> Result<()> {
    let k = st.k;
    let fail = |which: String| Err(Error::InvariantViolation { k, which });
    let set = map.set();
    if !set.contains_tol(&state.x, 1e-9) || !set.contains_tol(&state.xhat, 1e-9) {
        return fail("iterate left the feasible set".into());
    }
    if !crate::linalg::all_finite(&state.x) || !st.scaled_gap.is_finite() {
        return fail("non-finite iterate or gap".into());
    }
    if method != Setting::Fw {
        let diff = norm_inf(&crate::linalg::sub(&state.z, acc.z()));
        if diff > 1e-12 * norm_inf(acc.z()).max(1.0) {
            return fail(format!("z differs from re-accumulated gradients by {diff:e}"));
        }
    }
    if method == Setting::Gd {
        if let Some(c) = &state.classic {
            let diff = norm_inf(&crate::linalg::sub(c, &state.x));
            if diff > 1e-12 * norm_inf(&state.x).max(1.0) {
                return fail(format!("lazy and classical gradient descent differ by {diff:e}"));
            }
        }
    }
    let Some(ed) = st.ed else { return Ok(()) };
    let prev = st.prev_scaled_gap.expect("ed implies a previous step");
    let tol = chain_tolerance(st.scaled_gap.abs().max(prev.abs()));
    let delta = st.scaled_gap - prev;
    if delta > ed + tol {
        return fail(format!("gap chain: A_k G_k − A_(k−1) G_(k−1) = {delta:e} > E_d = {ed:e}"));
    }
    if tset != Setting::Vi {
        if let Some(r) = &st.record {
            let fx = r.f_xhat.expect("objective record");
            if r.upper < fx - 1e-9 * fx.abs().max(1.0) {
                return fail(format!("upper bound {} below f(x̂) = {fx}", r.upper));
            }
            if let Some(fs) = opts.ctx.f_star {
                if r.lower > fs + 1e-9 * fs.abs().max(1.0) {
                    return fail(format!("lower bound {} above f* = {fs}", r.lower));
                }
            }
        }
    }
    for (name, b) in &st.ed_bounds {
        if ed > b + tol {
            return fail(format!("E_d = {ed:e} > {name} = {b:e}"));
        }
    }
    if !sign_checks {
        return Ok(());
    }
    let a = e.a;
    let sigma = acc.map().sigma();
    match method {
        Setting::Md | Setting::Vi | Setting::Cmd => {
            let gn = map.base().dual_norm(&e.g);
            let bound = a * a * gn * gn / (2.0 * sigma);
            if ed > bound + 1e-9 {
                return fail(format!("E_d = {ed:e} > a²‖g‖²/(2σ) = {bound:e}"));
            }
            if let Some(l) = consts.lipschitz.filter(|_| tset != Setting::Vi) {
                let bound = a * a * l * l / (2.0 * sigma);
                if ed > bound + 1e-9 {
                    return fail(format!("E_d = {ed:e} > a²L²/(2σ) = {bound:e}"));
                }
            }
        }
        Setting::Amd | Setting::Gd | Setting::Asc | Setting::AscUnconstrained | Setting::Mp => {
            if ed > 1e-9 {
                return fail(format!("E_d = {ed:e} > 0"));
            }
        }
        Setting::Fw => {
            let p = &opts.ctx.params;
            if let (Some(l_nu), Some(nu), Some(d)) = (p.l_nu, p.nu, p.diameter) {
                let bound = a.powf(1.0 + nu) / e.big_a.powf(nu) * l_nu * d.powf(1.0 + nu);
                if ed > bound + tol {
                    return fail(format!("E_d = {ed:e} > a^(1+ν)/A^ν L_ν D^(1+ν) = {bound:e}"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror_maps::MirrorMap;
    use crate::problems::{make_instance, InstanceSpec, SaddleProblem};

    fn quad1(set: &FeasibleSet) -> Objective {
        Objective::diagonal_quadratic(&[1.0], &[0.0], set).unwrap()
    }

    #[test]
    fn md_step_example() {
        let set = FeasibleSet::cube(1, 1.0).unwrap();
        let f = Objective::huber(vec![1.0], vec![0.0], 1e-9, &set).unwrap();
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(set, vec![0.5], 1.0).unwrap());
        let s = Schedule::custom(vec![0.25, 0.25]).unwrap();
        let o = Oracle::Objective(&f);
        let st = init_state(Setting::Md, &o, &map, &s, None).unwrap();
        assert_eq!(st.z, vec![-0.25]);
        let st = md_step(&st, &o, &s, 1).unwrap();
        assert_eq!(st.x, vec![0.25]);
    }

    #[test]
    fn mp_step_example() {
        let set = FeasibleSet::rn(2);
        let op = SaddleProblem::bilinear(vec![vec![1.0]], FeasibleSet::rn(1), FeasibleSet::rn(1)).unwrap().operator();
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(set, vec![1.0, 0.0], 1.0).unwrap());
        let s = Schedule::custom(vec![0.5, 0.5]).unwrap();
        let o = Oracle::Operator(&op);
        let st = init_state(Setting::Mp, &o, &map, &s, None).unwrap();
        assert_eq!(st.z, vec![0.0, 0.5]);
        let st = mp_step(&st, &o, &s, 1).unwrap();
        assert_eq!(st.x_tilde.as_deref(), Some(&[1.0, 0.5][..]));
        assert_eq!(st.z_tilde.as_deref(), Some(&[-0.25, 1.0][..]));
        assert_eq!(st.x, vec![0.75, 1.0]);
    }

    #[test]
    fn gd_example() {
        let set = FeasibleSet::rn(1);
        let f = quad1(&set);
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(set, vec![2.0], 1.0).unwrap());
        let s = Schedule::gd(1.0, 1.0, 1).unwrap();
        let o = Oracle::Objective(&f);
        let st = init_state(Setting::Gd, &o, &map, &s, None).unwrap();
        let st = gd_step(&st, &o, &s, 1).unwrap();
        assert_eq!(st.x, vec![0.0]);
        let opts = RunOptions { tracker_on: true, ctx: TrackerCtx { phi_star: 2.0, f_star: Some(0.0), ..Default::default() }, x0: None };
        let r = run(Setting::Gd, &o, &map, &s, 1, &opts).unwrap();
        assert_eq!(r.history.len(), 2);
        assert!(r.records.iter().all(|r| r.gap <= r.theorem_bound + 1e-12));
    }

    #[test]
    fn fw_step_example() {
        let set = FeasibleSet::simplex(3);
        let f = Objective::diagonal_quadratic(&[1.0; 3], &[0.0; 3], &set).unwrap();
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(set, vec![1.0 / 3.0; 3], 1.0).unwrap());
        let s = Schedule::fw(1).unwrap();
        let o = Oracle::Objective(&f);
        let st = init_state(Setting::Fw, &o, &map, &s, Some(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(st.v, Some(vec![0.0, 1.0, 0.0]));
        let st = fw_step(&st, &o, &s, 1).unwrap();
        assert_eq!(st.x, vec![1.0 / 3.0, 2.0 / 3.0, 0.0]);
    }

    #[test]
    fn constant_objective_is_stationary() {
        let set = FeasibleSet::cube(2, 1.0).unwrap();
        let f = Objective::constant(2, 3.0);
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(set, vec![0.2, -0.1], 1.0).unwrap());
        let s = Schedule::amd(1.0, 1.0, 5).unwrap();
        let o = Oracle::Objective(&f);
        for m in [Setting::Md, Setting::Amd] {
            let r = run(m, &o, &map, &s, 5, &RunOptions { tracker_on: true, ..Default::default() }).unwrap();
            let c = [0.2, -0.1];
            for e in &r.history {
                assert!(crate::linalg::dist2(&e.x, &c) < 1e-15 && crate::linalg::dist2(&e.xhat, &c) < 1e-15, "{m} {:?} {:?}", e.x, e.xhat);
            }
        }
    }

    #[test]
    fn cmd_lasso_stays_at_zero() {
        let set = FeasibleSet::rn(1);
        let f = Objective::diagonal_quadratic(&[1.0], &[1.0], &set).unwrap().with_composite(CompositePart::L1 { lambda: 2.0 });
        let base = MirrorMap::euclidean(set, vec![0.0], 1.0).unwrap();
        let map = TimeVaryingMap::composite(base, CompositePart::L1 { lambda: 2.0 }, 0.0).unwrap();
        let s = Schedule::md_anytime(0.5, 20).unwrap();
        let o = Oracle::Objective(&f);
        let r = run(Setting::Cmd, &o, &map, &s, 20, &RunOptions::default()).unwrap();
        assert!(r.history.iter().all(|e| e.x == vec![0.0]));
    }

    #[test]
    fn amd_mutation_is_caught() {
        let inst = make_instance(&InstanceSpec::family("quadratic").dim(2).spectrum(1.0, 4.0), 1).unwrap();
        let f = inst.objective().unwrap();
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(inst.set.clone(), vec![0.0; 2], 1.0).unwrap());
        let l = f.constants_for(map.base()).smooth.unwrap();
        let s = Schedule::amd(1.0, l, 50).unwrap();
        let o = Oracle::Objective(f);
        let opts = RunOptions { tracker_on: true, ..Default::default() };
        assert!(run(Setting::Amd, &o, &map, &s, 50, &opts).is_ok());
        match run(Setting::Amd, &o, &map, &s.scaled(2.0), 50, &opts) {
            Err(Error::InvariantViolation { k, .. }) => assert!(k <= 50),
            other => panic!("expected a violation, got {other:?}"),
        }
    }
}
