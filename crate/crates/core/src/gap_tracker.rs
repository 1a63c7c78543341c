//! Upper/lower bounds, the approximate gap G = U − L, per-step
//! discretization errors E_d, and the closed-form theorem bounds.
//!
//! Everything is accumulated in scaled form (A·U, A·L) with compensated
//! sums; G is only divided out at the end, which keeps linear-rate runs
//! meaningful long after G itself drops below 1e-100.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dot, KahanSum, Vector};
use crate::mirror_maps::TimeVaryingMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    Md,
    Mp,
    Amd,
    Gd,
    Asc,
    AscUnconstrained,
    Cmd,
    Fw,
    /// Mirror prox (or mirror descent) on a monotone operator.
    Vi,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Md => "md",
            Setting::Mp => "mp",
            Setting::Amd => "amd",
            Setting::Gd => "gd",
            Setting::Asc => "asc",
            Setting::AscUnconstrained => "asc-unconstrained",
            Setting::Cmd => "cmd",
            Setting::Fw => "fw",
            Setting::Vi => "vi",
        }
    }

    /// Settings whose upper bound is f at the last output point.
    pub fn last_iterate(&self) -> bool {
        matches!(self, Setting::Amd | Setting::Gd | Setting::Asc | Setting::AscUnconstrained | Setting::Fw)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "md" => Setting::Md,
            "mp" => Setting::Mp,
            "amd" => Setting::Amd,
            "gd" => Setting::Gd,
            "asc" => Setting::Asc,
            "asc-unconstrained" | "asc_unconstrained" => Setting::AscUnconstrained,
            "cmd" => Setting::Cmd,
            "fw" => Setting::Fw,
            "vi" => Setting::Vi,
            other => return Err(Error::UnknownSetting(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    MdFixedHorizon,
    /// a_i = c/√(i+1); not covered by the fixed-horizon theorem.
    MdAnytime,
    Amd,
    Gd,
    Asc,
    AscUnconstrained,
    Fw,
    Mp,
    Custom,
}

/// Weights a_0..a_kmax and their prefix sums A^(k).
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    a: Vec<f64>,
    big_a: Vec<f64>,
}

impl Schedule {
    fn from_weights(kind: ScheduleKind, a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::DomainError("schedule needs at least a_0".into()));
        }
        if !(a[0] >= 0.0) || a[1..].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::DomainError("schedule weights must be positive".into()));
        }
        let mut s = KahanSum::new();
        let big_a = a
            .iter()
            .map(|v| {
                s.add(*v);
                s.value()
            })
            .collect();
        Ok(Self { kind, a, big_a })
    }

    /// a_i = (1/L)√(2σD/(k+1)) for every i ≤ k.
    pub fn md_fixed_horizon(l: f64, sigma: f64, d: f64, k: usize) -> Result<Self> {
        if !(l > 0.0 && sigma > 0.0 && d > 0.0) {
            return Err(Error::DomainError("fixed-horizon schedule needs L, σ, D > 0".into()));
        }
        let a = (2.0 * sigma * d / (k + 1) as f64).sqrt() / l;
        Self::from_weights(ScheduleKind::MdFixedHorizon, vec![a; k + 1])
    }

    pub fn md_anytime(c: f64, k: usize) -> Result<Self> {
        Self::from_weights(ScheduleKind::MdAnytime, (0..=k).map(|i| c / ((i + 1) as f64).sqrt()).collect())
    }

    /// a_i = (σ/L)(i+1)/2, so A^(k) = (σ/L)(k+1)(k+2)/4.
    pub fn amd(sigma: f64, l: f64, k: usize) -> Result<Self> {
        let r = sigma / l;
        let a: Vec<f64> = (0..=k).map(|i| r * (i + 1) as f64 / 2.0).collect();
        let mut s = Self::from_weights(ScheduleKind::Amd, a)?;
        s.big_a = (0..=k).map(|i| r * ((i + 1) * (i + 2)) as f64 / 4.0).collect();
        Ok(s)
    }

    pub fn gd(sigma: f64, l: f64, k: usize) -> Result<Self> {
        let mut s = Self::from_weights(ScheduleKind::Gd, vec![sigma / l; k + 1])?;
        s.big_a = (0..=k).map(|i| (i + 1) as f64 * sigma / l).collect();
        Ok(s)
    }

    /// Ratio a_i/A^(i) of the constrained strongly convex method.
    pub fn asc_ratio(kappa: f64) -> f64 {
        ((4.0 * kappa + 1.0).sqrt() - 1.0) / (2.0 * kappa)
    }

    fn geometric(kind: ScheduleKind, r: f64, k: usize) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::DomainError(format!("ratio {r} outside (0, 1)")));
        }
        let mut a = vec![1.0];
        let mut big_a = vec![1.0];
        for i in 1..=k {
            let ai = big_a[i - 1] / (1.0 - r);
            big_a.push(ai);
            a.push(r * ai);
        }
        Ok(Self { kind, a, big_a })
    }

    pub fn asc(kappa: f64, k: usize) -> Result<Self> {
        Self::geometric(ScheduleKind::Asc, Self::asc_ratio(kappa), k)
    }

    pub fn asc_unconstrained(kappa: f64, k: usize) -> Result<Self> {
        Self::geometric(ScheduleKind::AscUnconstrained, 1.0 / kappa.sqrt(), k)
    }

    /// a_i = i + 1.
    pub fn fw(k: usize) -> Result<Self> {
        let mut s = Self::from_weights(ScheduleKind::Fw, (0..=k).map(|i| (i + 1) as f64).collect())?;
        s.big_a = (0..=k).map(|i| ((i + 1) * (i + 2)) as f64 / 2.0).collect();
        Ok(s)
    }

    /// a_0 = 0, a_i = σ/L.
    pub fn mp(sigma: f64, l: f64, k: usize) -> Result<Self> {
        let mut a = vec![sigma / l; k + 1];
        a[0] = 0.0;
        let mut s = Self::from_weights(ScheduleKind::Mp, a)?;
        s.big_a = (0..=k).map(|i| i as f64 * sigma / l).collect();
        Ok(s)
    }

    pub fn custom(a: Vec<f64>) -> Result<Self> {
        Self::from_weights(ScheduleKind::Custom, a)
    }

    /// Every weight multiplied by `factor`; the kind tag is kept.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kind: self.kind,
            a: self.a.iter().map(|v| v * factor).collect(),
            big_a: self.big_a.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn k_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a[i]
    }

    pub fn big_a(&self, i: usize) -> f64 {
        self.big_a[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    /// Truncated copy with horizon k.
    pub fn truncated(&self, k: usize) -> Self {
        Self { kind: self.kind, a: self.a[..=k].to_vec(), big_a: self.big_a[..=k].to_vec() }
    }
}

/// Whether E_d is the exact per-step change or an upper bound on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdForm {
    Equality,
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub k: usize,
    #[serde(rename = "A")]
    pub a_total: f64,
    /// f̄(x̂); absent for operator runs.
    pub f_xhat: Option<f64>,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub ed: Option<f64>,
    pub ed_form: Option<EdForm>,
    pub scaled_gap: f64,
    pub theorem_bound: f64,
    pub f_best: Option<f64>,
}

/// One iteration's worth of quantities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Entry {
    pub a: f64,
    pub big_a: f64,
    pub x: Vector,
    /// f(x) (smooth part only).
    pub fx: f64,
    /// ∇f(x) or F(x).
    pub g: Vector,
    pub psi_x: f64,
    pub xhat: Vector,
    /// f(x̂) (smooth part only).
    pub f_xhat: f64,
    pub psi_xhat: f64,
    /// FW vertex v = argmin ⟨g, u⟩ + ψ(u).
    pub v: Option<Vector>,
    pub psi_v: f64,
}

/// Closed-form constants a theorem bound may need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThmParams {
    /// Lipschitz (md, cmd) or smoothness (amd, gd, mp) constant.
    pub l: Option<f64>,
    pub sigma: Option<f64>,
    /// D_φ(x*, x0) = φ(x*) for a map centered at x0.
    pub d_phi: Option<f64>,
    /// max over the set of φ (operator settings).
    pub max_phi: Option<f64>,
    pub diameter: Option<f64>,
    pub kappa: Option<f64>,
    pub l_nu: Option<f64>,
    pub nu: Option<f64>,
    /// Horizon of a fixed-horizon schedule.
    pub horizon: Option<usize>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingConstant(name))
}

/// Right-hand side of each setting's convergence theorem at iteration k.
pub fn theorem_bound(setting: Setting, k: usize, p: &ThmParams) -> Result<f64> {
    let kf = k as f64;
    Ok(match setting {
        Setting::Md | Setting::Cmd => {
            let h = p.horizon.unwrap_or(k) as f64;
            (2.0 * need(p.d_phi, "D_phi")? / need(p.sigma, "sigma")?).sqrt() * need(p.l, "L")? / (h + 1.0).sqrt()
        }
        Setting::Amd => {
            4.0 * need(p.l, "L")? * need(p.d_phi, "D_phi")? / (need(p.sigma, "sigma")? * (kf + 1.0) * (kf + 2.0))
        }
        // L‖x* − x0‖²/(2(k+1)) with ‖x* − x0‖² = 2D/σ.
        Setting::Gd => need(p.l, "L")? * need(p.d_phi, "D_phi")? / (need(p.sigma, "sigma")? * (kf + 1.0)),
        Setting::Asc => {
            (1.0 - Schedule::asc_ratio(need(p.kappa, "kappa")?)).powi(k as i32) * need(p.d_phi, "D_phi")?
        }
        Setting::AscUnconstrained => {
            (1.0 - 1.0 / need(p.kappa, "kappa")?.sqrt()).powi(k as i32) * need(p.d_phi, "D_phi")?
        }
        Setting::Fw => {
            let nu = need(p.nu, "nu")?;
            2f64.powf(1.0 + nu) * need(p.l_nu, "L_nu")? * need(p.diameter, "diameter")?.powf(1.0 + nu)
                / (kf + 1.0).powf(nu)
        }
        Setting::Mp | Setting::Vi => {
            if k == 0 {
                f64::INFINITY
            } else {
                need(p.l, "L")? / need(p.sigma, "sigma")? * need(p.max_phi, "max_phi")? / kf
            }
        }
    })
}

/// The MD-form discretization error −a⟨g, u − x⟩ − D_{φ*}(z_prev, z).
pub fn ed_md_form(a: f64, g: &[f64], u: &[f64], x: &[f64], d_dual: f64) -> f64 {
    -a * g.iter().zip(u.iter().zip(x)).map(|(gi, (ui, xi))| gi * (ui - xi)).sum::<f64>() - d_dual
}

/// Constants for the tracker's lower bound and its per-step checks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrackerCtx {
    /// φ(x*) subtracted in the lower bound.
    pub phi_star: f64,
    /// max over the set of φ (operator setting).
    pub max_phi: f64,
    pub f_star: Option<f64>,
    /// Lipschitz constant charged per step in the record bound
    /// (φ(x*) + Σ a_i²L²/(2σ))/A for non-smooth mirror descent.
    pub step_lipschitz: Option<f64>,
    pub params: ThmParams,
}

#[derive(Debug, Clone)]
struct Prev {
    ag: f64,
    fx: f64,
    f_xhat: f64,
    z: Vector,
    u: Vector,
    conj: f64,
    g: Vector,
    v: Option<Vector>,
    psi_v: f64,
}

/// Incremental tracker; `push` one entry per iteration.
#[derive(Debug, Clone)]
pub struct Accumulator {
    setting: Setting,
    base: TimeVaryingMap,
    map: TimeVaryingMap,
    ctx: TrackerCtx,
    k: usize,
    z: Vector,
    s_f: KahanSum,
    s_gx: KahanSum,
    s_psi: KahanSum,
    s_fw: KahanSum,
    s_psiv: KahanSum,
    s_a2: KahanSum,
    f_best: f64,
    prev: Option<Prev>,
}

/// Everything computed at one step, before packaging as a record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub k: usize,
    pub big_a: f64,
    pub scaled_upper: f64,
    pub scaled_lower: f64,
    pub scaled_gap: f64,
    pub prev_scaled_gap: Option<f64>,
    pub ed: Option<f64>,
    pub ed_form: Option<EdForm>,
    /// Setting-specific upper bounds on E_d that the theory guarantees.
    pub ed_bounds: Vec<(&'static str, f64)>,
    pub record: Option<GapRecord>,
}

impl Accumulator {
    pub fn new(setting: Setting, map: TimeVaryingMap, ctx: TrackerCtx) -> Self {
        let n = map.base().dim();
        Self {
            setting,
            base: map.clone(),
            map,
            ctx,
            k: 0,
            z: vec![0.0; n],
            s_f: KahanSum::new(),
            s_gx: KahanSum::new(),
            s_psi: KahanSum::new(),
            s_fw: KahanSum::new(),
            s_psiv: KahanSum::new(),
            s_a2: KahanSum::new(),
            f_best: f64::INFINITY,
            prev: None,
        }
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    /// −Σ a_i g_i, re-accumulated independently of the solver.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn map(&self) -> &TimeVaryingMap {
        &self.map
    }

    pub fn push(&mut self, e: &Entry) -> Result<StepState> {
        let k = if self.prev.is_none() { 0 } else { self.k + 1 };
        let a = e.a;
        let big_a = e.big_a;
        let big_a_prev = big_a - a;
        let setting = self.setting;
        let mut z = self.z.clone();
        crate::linalg::axpy(&mut z, -a, &e.g);

        self.s_f.add(a * e.fx);
        self.s_gx.add(a * dot(&e.g, &e.x));
        self.s_psi.add(a * e.psi_x);
        self.s_a2.add(a * a);
        if setting == Setting::Fw {
            let v = e.v.as_ref().ok_or_else(|| Error::MissingHistory("FW vertex".into()))?;
            let lin: f64 = e.g.iter().zip(v.iter().zip(&e.x)).map(|(g, (vi, xi))| g * (vi - xi)).sum();
            self.s_fw.add(a * (e.fx + lin + e.psi_v));
            // x_k mixes x_0 and v_0..v_{k−1}, so ψ enters the upper bound with a lag.
            match &self.prev {
                None => self.s_psiv.add(a * e.psi_x),
                Some(p) => self.s_psiv.add(a * p.psi_v),
            }
        }

        let new_map = match self.map.mode() {
            crate::mirror_maps::Mode::Static => self.map.clone(),
            crate::mirror_maps::Mode::Composite { .. } => self.base.with_weight(big_a),
            crate::mirror_maps::Mode::Accumulation { .. } => self.map.with_anchor(a, &e.x),
        };
        let (conj, u) = new_map.conjugate(&z)?;

        let (au, al) = match setting {
            Setting::Md | Setting::Mp => {
                (self.s_f.value(), self.s_f.value() - self.s_gx.value() - conj - self.ctx.phi_star)
            }
            Setting::Cmd => (
                self.s_f.value() + self.s_psi.value(),
                self.s_f.value() - self.s_gx.value() - conj - self.ctx.phi_star,
            ),
            Setting::Amd | Setting::Gd | Setting::Asc | Setting::AscUnconstrained => {
                (big_a * e.f_xhat, self.s_f.value() - self.s_gx.value() - conj - self.ctx.phi_star)
            }
            Setting::Fw => (big_a * e.fx + self.s_psiv.value(), self.s_fw.value()),
            Setting::Vi => (conj + self.s_gx.value() + self.ctx.max_phi, 0.0),
        };
        let ag = au - al;

        let mut ed = None;
        let mut ed_bounds = Vec::new();
        if let Some(p) = &self.prev {
            let md_form = || -> f64 {
                let d = self.map.bregman_dual_at(&p.z, &p.u, &u);
                ed_md_form(a, &e.g, &u, &e.x, d)
            };
            let f_terms = big_a_prev * (e.fx - p.fx) + big_a * (e.f_xhat - e.fx) - big_a_prev * (p.f_xhat - p.fx);
            let val = match setting {
                Setting::Md | Setting::Mp | Setting::Vi => md_form(),
                Setting::Amd => md_form() + f_terms,
                Setting::Gd => {
                    let s = self.map.sigma();
                    big_a * (e.f_xhat - e.fx) + a * a * dot(&e.g, &e.g) / (2.0 * s)
                }
                Setting::Asc | Setting::AscUnconstrained => a * dot(&e.g, &e.x) + conj - p.conj + f_terms,
                Setting::Cmd => {
                    let (conj_mid, x_mid) = new_map.conjugate(&p.z)?;
                    let lin: f64 = x_mid.iter().zip(z.iter().zip(&p.z)).map(|(xm, (zn, zp))| xm * (zn - zp)).sum();
                    let psi_mid = new_map_psi(&self.base, &x_mid);
                    let val = conj - p.conj - lin + a * psi_mid;
                    // φ_k*(z_k) − φ_k*(z_{k−1}) − ⟨∇φ_k*(z_{k−1}), z_k − z_{k−1}⟩ = D_{φ_k*}(z_k, z_{k−1})
                    ed_bounds.push(("D_{phi_k*}(z_k, z_{k-1})", conj - conj_mid - lin));
                    val
                }
                Setting::Fw => {
                    let v = e.v.as_ref().expect("checked above");
                    let pv = p.v.as_ref().ok_or_else(|| Error::MissingHistory("previous FW vertex".into()))?;
                    let lin: f64 = e.g.iter().zip(v.iter().zip(&e.x)).map(|(g, (vi, xi))| g * (vi - xi)).sum();
                    let cross: f64 = e
                        .g
                        .iter()
                        .zip(&p.g)
                        .zip(pv.iter().zip(v))
                        .map(|((gk, gp), (vp, vk))| (gk - gp) * (vp - vk))
                        .sum();
                    ed_bounds.push(("a<g_k - g_{k-1}, v_{k-1} - v_k>", a * cross));
                    big_a_prev * (e.fx - p.fx) - a * lin + a * (p.psi_v - e.psi_v)
                }
            };
            ed = Some(val);
        }

        let f_total_xhat = e.f_xhat + e.psi_xhat;
        if setting != Setting::Vi {
            self.f_best = self.f_best.min(e.fx + e.psi_x).min(f_total_xhat);
        }
        let prev_scaled_gap = self.prev.as_ref().map(|p| p.ag);
        let record = if big_a > 0.0 {
            let theorem = self.record_bound(k, big_a)?;
            Some(GapRecord {
                k,
                a_total: big_a,
                f_xhat: if setting == Setting::Vi { None } else { Some(f_total_xhat) },
                upper: au / big_a,
                lower: al / big_a,
                gap: ag / big_a,
                ed,
                ed_form: ed.map(|_| EdForm::Equality),
                scaled_gap: ag,
                theorem_bound: theorem,
                f_best: if setting == Setting::Vi { None } else { Some(self.f_best) },
            })
        } else {
            None
        };
        self.prev = Some(Prev {
            ag,
            fx: e.fx,
            f_xhat: e.f_xhat,
            z: z.clone(),
            u,
            conj,
            g: e.g.clone(),
            v: e.v.clone(),
            psi_v: e.psi_v,
        });
        self.z = z;
        self.map = new_map;
        self.k = k;
        Ok(StepState {
            k,
            big_a,
            scaled_upper: au,
            scaled_lower: al,
            scaled_gap: ag,
            prev_scaled_gap,
            ed,
            ed_form: ed.map(|_| EdForm::Equality),
            ed_bounds,
            record,
        })
    }

    /// The bound each setting's analysis gives for the schedule in use.
    fn record_bound(&self, k: usize, big_a: f64) -> Result<f64> {
        let c = &self.ctx;
        Ok(match self.setting {
            Setting::Md | Setting::Cmd | Setting::Mp | Setting::Vi => {
                let d = if self.setting == Setting::Vi { c.max_phi } else { c.phi_star };
                match (c.step_lipschitz, c.params.sigma) {
                    (Some(l), Some(s)) => (d + self.s_a2.value() * l * l / (2.0 * s)) / big_a,
                    (None, _) if matches!(self.setting, Setting::Md | Setting::Cmd) => f64::NAN,
                    _ => d / big_a,
                }
            }
            Setting::Amd | Setting::Gd | Setting::Asc | Setting::AscUnconstrained => c.phi_star / big_a,
            Setting::Fw => theorem_bound(Setting::Fw, k, &c.params).unwrap_or(f64::NAN),
        })
    }
}

fn new_map_psi(base: &TimeVaryingMap, x: &[f64]) -> f64 {
    match base.mode() {
        crate::mirror_maps::Mode::Composite { psi, .. } => psi.value(x),
        _ => 0.0,
    }
}

/// Tolerance used for all per-step comparisons of scaled quantities.
pub fn chain_tolerance(scaled_gap: f64) -> f64 {
    1e-9 * scaled_gap.abs().max(1.0)
}

fn fold(setting: Setting, entries: &[Entry], map: &TimeVaryingMap, ctx: TrackerCtx) -> Result<StepState> {
    let mut acc = Accumulator::new(setting, map.clone(), ctx);
    let mut last = None;
    for e in entries {
        last = Some(acc.push(e)?);
    }
    last.ok_or_else(|| Error::MissingHistory("at least one entry".into()))
}

/// U^(k) for a history.
pub fn upper_bound(setting: Setting, history: &[Entry]) -> Result<f64> {
    let last = history.last().ok_or_else(|| Error::MissingHistory("at least one entry".into()))?;
    if setting == Setting::Vi {
        return Err(Error::UnknownSetting("vi has no objective upper bound".into()));
    }
    if setting == Setting::Fw {
        let mut s = KahanSum::new();
        for (i, e) in history.iter().enumerate() {
            s.add(e.a * if i == 0 { e.psi_x } else { history[i - 1].psi_v });
        }
        return Ok(last.fx + s.value() / last.big_a);
    }
    if setting.last_iterate() {
        return Ok(last.f_xhat + last.psi_xhat);
    }
    let mut s = KahanSum::new();
    for e in history {
        s.add(e.a * (e.fx + e.psi_x));
    }
    Ok(s.value() / last.big_a)
}

/// L^(k) for a history; `phi_star` is the φ(x*) correction.
pub fn lower_bound(setting: Setting, history: &[Entry], map: &TimeVaryingMap, phi_star: f64) -> Result<f64> {
    let st = fold(setting, history, map, TrackerCtx { phi_star, ..Default::default() })?;
    Ok(st.scaled_lower / st.big_a)
}

/// E_d^(i) for a history, i ≥ 1.
pub fn discretization_error(
    setting: Setting,
    i: usize,
    history: &[Entry],
    map: &TimeVaryingMap,
) -> Result<(f64, EdForm)> {
    if i == 0 || i >= history.len() {
        return Err(Error::MissingHistory(format!("entries 0..={i}")));
    }
    let st = fold(setting, &history[..=i], map, TrackerCtx::default())?;
    Ok((st.ed.expect("i ≥ 1"), EdForm::Equality))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror_maps::{FeasibleSet, MirrorMap};

    fn entry(a: f64, big_a: f64, x: Vec<f64>, fx: f64, g: Vec<f64>) -> Entry {
        Entry { a, big_a, xhat: x.clone(), f_xhat: fx, x, fx, g, ..Default::default() }
    }

    #[test]
    fn upper_bound_examples() {
        let h = vec![entry(1.0, 1.0, vec![0.0], 0.5, vec![0.0]), entry(1.0, 2.0, vec![0.5], 0.125, vec![0.0])];
        assert_eq!(upper_bound(Setting::Gd, &h).unwrap(), 0.125);
        let h = vec![entry(1.0, 1.0, vec![0.0], 1.0, vec![0.0]), entry(1.0, 2.0, vec![0.0], 0.5, vec![0.0])];
        assert_eq!(upper_bound(Setting::Md, &h).unwrap(), 0.75);
        let h = vec![
            entry(1.0, 1.0, vec![0.0], 2.0, vec![0.0]),
            entry(2.0, 3.0, vec![0.0], 1.0, vec![0.0]),
            entry(4.0, 7.0, vec![0.0], 0.5, vec![0.0]),
        ];
        let u = upper_bound(Setting::Cmd, &h).unwrap();
        assert!((u - 6.0 / 7.0).abs() < 1e-15);
        assert!((u - 0.857143).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_single_point() {
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(FeasibleSet::rn(1), vec![1.0], 1.0).unwrap());
        let h = vec![entry(1.0, 1.0, vec![1.0], 0.5, vec![1.0])];
        // Without the φ(x*) correction the bound is 0.5 + min_u{(u−1) + ½(u−1)²} = 0.
        assert_eq!(lower_bound(Setting::Md, &h, &map, 0.0).unwrap(), 0.0);
        // With it, x* = 0 and φ(x*) = ½.
        assert_eq!(lower_bound(Setting::Md, &h, &map, 0.5).unwrap(), -0.5);
    }

    #[test]
    fn lower_bound_zero_gradients() {
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(FeasibleSet::rn(2), vec![0.0, 0.0], 1.0).unwrap());
        let h = vec![
            entry(1.0, 1.0, vec![0.0, 0.0], 3.0, vec![0.0, 0.0]),
            entry(3.0, 4.0, vec![1.0, 0.0], 1.0, vec![0.0, 0.0]),
        ];
        let l = lower_bound(Setting::Md, &h, &map, 0.2).unwrap();
        assert!((l - ((3.0 + 3.0) - 0.2) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn fw_lower_bound_single_point() {
        let set = FeasibleSet::simplex(3);
        let map = TimeVaryingMap::fixed(MirrorMap::entropy(set.clone(), 1.0).unwrap());
        let x = vec![1.0, 0.0, 0.0];
        let g = x.clone();
        let v = set.lmo(&g).unwrap();
        let mut e = entry(1.0, 1.0, x, 0.5, g);
        e.v = Some(v);
        assert_eq!(lower_bound(Setting::Fw, &[e], &map, 0.0).unwrap(), -0.5);
    }

    #[test]
    fn md_error_example() {
        assert!((ed_md_form(1.0, &[1.0], &[0.2], &[0.5], 0.05) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn stationary_history_has_zero_error() {
        let map = TimeVaryingMap::fixed(MirrorMap::euclidean(FeasibleSet::rn(1), vec![0.0], 1.0).unwrap());
        let h = vec![entry(1.0, 1.0, vec![0.0], 0.0, vec![0.0]), entry(1.0, 2.0, vec![0.0], 0.0, vec![0.0])];
        for s in [Setting::Md, Setting::Amd, Setting::Gd] {
            assert_eq!(discretization_error(s, 1, &h, &map).unwrap().0, 0.0);
        }
        assert!(matches!(discretization_error(Setting::Md, 0, &h, &map), Err(Error::MissingHistory(_))));
    }

    #[test]
    fn theorem_bound_examples() {
        let p = ThmParams { l: Some(1.0), sigma: Some(1.0), d_phi: Some(0.5), ..Default::default() };
        assert!((theorem_bound(Setting::Amd, 1, &p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = ThmParams { l: Some(1.0), sigma: Some(1.0), d_phi: Some(2.0), ..Default::default() };
        assert_eq!(theorem_bound(Setting::Gd, 0, &p).unwrap(), 2.0);
        let r = Schedule::asc_ratio(1.0);
        assert!((r - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((r - 0.618034).abs() < 1e-6);
        let p = ThmParams { kappa: Some(1.0), d_phi: Some(1.0), ..Default::default() };
        assert!((theorem_bound(Setting::Asc, 3, &p).unwrap() - (1.0 - r).powi(3)).abs() < 1e-15);
        assert!(matches!(theorem_bound(Setting::Fw, 3, &ThmParams::default()), Err(Error::MissingConstant(_))));
    }

    #[test]
    fn schedule_examples() {
        let s = Schedule::amd(1.0, 1.0, 5).unwrap();
        assert_eq!(s.a(3), 2.0);
        assert_eq!(s.big_a(3), 5.0);
        assert!((Schedule::asc_ratio(4.0) - (17f64.sqrt() - 1.0) / 8.0).abs() < 1e-15);
        assert!((Schedule::asc_ratio(4.0) - 0.390388).abs() < 1e-6);
        let fw = Schedule::fw(10).unwrap();
        assert_eq!(fw.big_a(10), 66.0);
        assert_eq!(Schedule::mp(1.0, 2.0, 3).unwrap().big_a(3), 1.5);
        assert!("nope".parse::<Setting>().is_err());
    }
}
