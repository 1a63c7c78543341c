//! Classical RK4 integration of the continuous-time dynamics, with the
//! scaled gap α(t)G(t) monitored along the trajectory.
//!
//! α(0) = α0 > 0 and A(t) = α(t) − α0 is the mass of dα on [0, t]. The
//! integrals entering the lower bound are accumulated with the trapezoid
//! rule on the integration grid; averaged points come from the ODE state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Vector};
use crate::mirror_maps::{CompositePart, FeasibleSet, MirrorMap, TimeVaryingMap};
use crate::problems::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    CtMd,
    CtAmd,
    CtGd,
    CtAsc,
    CtCmd,
    CtFw,
}

impl Dynamics {
    pub const ALL: [Dynamics; 6] =
        [Dynamics::CtMd, Dynamics::CtAmd, Dynamics::CtGd, Dynamics::CtAsc, Dynamics::CtCmd, Dynamics::CtFw];

    pub fn name(&self) -> &'static str {
        match self {
            Dynamics::CtMd => "ct-md",
            Dynamics::CtAmd => "ct-amd",
            Dynamics::CtGd => "ct-gd",
            Dynamics::CtAsc => "ct-asc",
            Dynamics::CtCmd => "ct-cmd",
            Dynamics::CtFw => "ct-fw",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Dynamics::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownSetting(s.to_string()))
    }

    /// Whether the output point is an average of the trajectory.
    fn averaged(&self) -> bool {
        matches!(self, Dynamics::CtMd | Dynamics::CtCmd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Alpha {
    /// α0 + c·t
    Linear { alpha0: f64, c: f64 },
    /// α0·(1 + t)^p
    Polynomial { alpha0: f64, p: f64 },
}

impl Alpha {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Alpha::Linear { alpha0, c } => alpha0 > 0.0 && c > 0.0,
            Alpha::Polynomial { alpha0, p } => alpha0 > 0.0 && p > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainError("α needs α(0) > 0 and a positive rate".into()))
        }
    }

    pub fn alpha0(&self) -> f64 {
        match *self {
            Alpha::Linear { alpha0, .. } | Alpha::Polynomial { alpha0, .. } => alpha0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Alpha::Linear { alpha0, c } => alpha0 + c * t,
            Alpha::Polynomial { alpha0, p } => alpha0 * (1.0 + t).powf(p),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Alpha::Linear { c, .. } => c,
            Alpha::Polynomial { alpha0, p } => alpha0 * p * (1.0 + t).powf(p - 1.0),
        }
    }
}

/// Objective, regularizer and reference values for one integration.
#[derive(Debug, Clone)]
pub struct CtProblem<'a> {
    pub objective: &'a Objective,
    /// φ; its minimizer is the default x(0).
    pub map: &'a MirrorMap,
    /// Strong convexity used by ct-asc's accumulated regularizer.
    pub strong_convexity: f64,
    pub x_star: Vector,
    /// f̄(x*).
    pub f_star: f64,
    pub x0: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub alpha: f64,
    pub x: Vector,
    pub xhat: Vector,
    pub z: Vector,
    pub upper: f64,
    pub lower: f64,
    /// α(t)·G(t).
    pub scaled_gap: f64,
    pub gap: f64,
    /// f̄(x̂(t)).
    pub f_xhat: f64,
    /// f̄(x̂(t)) − f̄*.
    pub f_gap: f64,
    /// ‖x − (α0·x0 + ∫v dα)/α‖∞ for ct-fw.
    pub avg_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ContinuousRun {
    pub dynamics: Dynamics,
    pub alpha: Alpha,
    pub h: f64,
    pub t_end: f64,
    pub trace: Vec<TracePoint>,
    /// Steps that needed internal halving to stay feasible.
    pub halved_steps: usize,
}

impl ContinuousRun {
    /// α(0)G(0)/α(T): the bound the gap invariant gives at the end.
    pub fn monotone_bound(&self) -> f64 {
        self.trace[0].scaled_gap / self.alpha.value(self.t_end)
    }

    pub fn final_point(&self) -> &TracePoint {
        self.trace.last().expect("trace has the initial point")
    }

    /// Largest increase of α·G between consecutive grid points.
    pub fn monotone_violation(&self) -> f64 {
        self.trace
            .windows(2)
            .map(|w| w[1].scaled_gap - w[0].scaled_gap)
            .fold(0.0, f64::max)
    }

    /// The constant C with violation = C·h.
    pub fn reported_c(&self) -> f64 {
        self.monotone_violation() / self.h
    }
}

/// Trapezoid integrals of the smooth integrands. The ct-fw terms involving
/// v(t) are carried in the ODE state instead, since v jumps between vertices.
#[derive(Debug, Clone, Default)]
struct Integrals {
    f: f64,
    gx: f64,
    psi: f64,
}

struct Sys<'a> {
    dynamics: Dynamics,
    prob: &'a CtProblem<'a>,
    alpha: Alpha,
    n: usize,
    x0: Vector,
}

impl<'a> Sys<'a> {
    fn psi(&self) -> &CompositePart {
        self.prob.objective.composite()
    }

    fn set(&self) -> &FeasibleSet {
        self.prob.map.set()
    }

    /// φ_t for the dynamics that use a time-varying regularizer.
    fn phi_t(&self, t: f64, y: &[f64]) -> Result<TimeVaryingMap> {
        let n = self.n;
        let big_a = self.alpha.value(t) - self.alpha.alpha0();
        Ok(match self.dynamics {
            Dynamics::CtCmd => TimeVaryingMap::composite(self.prob.map.clone(), self.psi().clone(), big_a)?,
            Dynamics::CtAsc => TimeVaryingMap::accumulation_with(
                self.prob.map.clone(),
                self.prob.strong_convexity,
                big_a,
                y[2 * n..3 * n].to_vec(),
                y[3 * n],
            )?,
            _ => TimeVaryingMap::fixed(self.prob.map.clone()),
        })
    }

    /// Current primal point x(t) from the ODE state.
    fn x_of(&self, t: f64, y: &[f64]) -> Result<Vector> {
        let n = self.n;
        match self.dynamics {
            Dynamics::CtMd | Dynamics::CtCmd => self.phi_t(t, y)?.grad_conjugate(&y[..n]),
            Dynamics::CtGd => {
                let s = self.prob.map.sigma();
                Ok(self.x0.iter().zip(&y[..n]).map(|(c, z)| c + z / s).collect())
            }
            Dynamics::CtAmd | Dynamics::CtAsc => Ok(y[n..2 * n].to_vec()),
            Dynamics::CtFw => Ok(y[..n].to_vec()),
        }
    }

    fn z_of(&self, y: &[f64]) -> Vector {
        match self.dynamics {
            Dynamics::CtFw => vec![0.0; self.n],
            _ => y[..self.n].to_vec(),
        }
    }

    fn xhat_of(&self, t: f64, y: &[f64], x: &[f64]) -> Vector {
        if self.dynamics.averaged() {
            let n = self.n;
            let a = self.alpha.value(t);
            let a0 = self.alpha.alpha0();
            self.x0.iter().zip(&y[n..2 * n]).map(|(c, m)| (a0 * c + m) / a).collect()
        } else {
            x.to_vec()
        }
    }

    fn init(&self) -> Vector {
        let n = self.n;
        let zeros = vec![0.0; n];
        match self.dynamics {
            Dynamics::CtMd | Dynamics::CtCmd => [zeros.clone(), zeros].concat(),
            Dynamics::CtGd => zeros,
            Dynamics::CtAmd => [zeros, self.x0.clone()].concat(),
            Dynamics::CtAsc => [zeros.clone(), self.x0.clone(), zeros, vec![0.0]].concat(),
            Dynamics::CtFw => [self.x0.clone(), zeros, vec![0.0]].concat(),
        }
    }

    fn deriv(&self, t: f64, y: &[f64]) -> Result<Vector> {
        let n = self.n;
        let ad = self.alpha.rate(t);
        let a = self.alpha.value(t);
        let x = self.x_of(t, y)?;
        let f = self.prob.objective;
        let g = f.gradient(&x);
        let dz: Vector = g.iter().map(|gi| -ad * gi).collect();
        Ok(match self.dynamics {
            Dynamics::CtMd | Dynamics::CtCmd => {
                let dm: Vector = x.iter().map(|xi| ad * xi).collect();
                [dz, dm].concat()
            }
            Dynamics::CtGd => dz,
            Dynamics::CtAmd | Dynamics::CtAsc => {
                let u = self.phi_t(t, y)?.grad_conjugate(&y[..n])?;
                let dx: Vector = u.iter().zip(&x).map(|(ui, xi)| ad * (ui - xi) / a).collect();
                if self.dynamics == Dynamics::CtAmd {
                    [dz, dx].concat()
                } else {
                    let dm: Vector = x.iter().map(|xi| ad * xi).collect();
                    [dz, dx, dm, vec![ad * dot(&x, &x)]].concat()
                }
            }
            Dynamics::CtFw => {
                let v = self.psi().lmo(self.set(), &g)?;
                let dx: Vector = v.iter().zip(&x).map(|(vi, xi)| ad * (vi - xi) / a).collect();
                let dv: Vector = v.iter().map(|vi| ad * vi).collect();
                let gap: f64 = g.iter().zip(v.iter().zip(&x)).map(|(gi, (vi, xi))| gi * (vi - xi)).sum();
                [dx, dv, vec![ad * gap]].concat()
            }
        })
    }

    fn rk4(&self, t: f64, y: &[f64], h: f64) -> Result<Vector> {
        let k1 = self.deriv(t, y)?;
        let y2: Vector = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = self.deriv(t + 0.5 * h, &y2)?;
        let y3: Vector = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = self.deriv(t + 0.5 * h, &y3)?;
        let y4: Vector = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = self.deriv(t + h, &y4)?;
        Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }

    /// Integrands (f, ⟨g,x⟩, ψ(x)) at one time.
    fn integrands(&self, x: &[f64]) -> (f64, f64, f64) {
        let f = self.prob.objective;
        let g = f.gradient(x);
        (f.value(x), dot(&g, x), self.psi().value(x))
    }

    fn scaled_gap(&self, t: f64, y: &[f64], x: &[f64], ints: &Integrals) -> Result<f64> {
        let n = self.n;
        let a = self.alpha.value(t);
        let a0 = self.alpha.alpha0();
        let f = self.prob.objective;
        let fs = self.prob.f_star;
        let f0_total = f.total_value(&self.x0);
        Ok(match self.dynamics {
            Dynamics::CtFw => a * f.value(x) + a0 * self.psi().value(&self.x0) - a0 * fs - ints.f - y[2 * n],
            _ => {
                let phi = self.phi_t(t, y)?;
                let conj = phi.conjugate_value(&y[..n])?;
                let phi_star = self.prob.map.value(&self.prob.x_star);
                match self.dynamics {
                    Dynamics::CtMd => a0 * (f0_total - fs) + ints.gx + conj + phi_star,
                    Dynamics::CtCmd => a0 * (f0_total - fs) + ints.psi + ints.gx + conj + phi_star,
                    _ => a * f.value(x) - a0 * fs - ints.f + ints.gx + conj + phi_star,
                }
            }
        })
    }
}

/// Integrate `dynamics` on [0, T] with step h.
pub fn integrate(dynamics: Dynamics, prob: &CtProblem, alpha: Alpha, h: f64, t_end: f64) -> Result<ContinuousRun> {
    alpha.validate()?;
    if !(h > 0.0 && t_end > 0.0 && h <= t_end / 100.0 * (1.0 + 1e-12)) {
        return Err(Error::DomainError("need 0 < h ≤ T/100".into()));
    }
    let set = prob.map.set();
    match dynamics {
        Dynamics::CtGd if !matches!(set, FeasibleSet::Rn { .. }) || !prob.map.is_euclidean() => {
            return Err(Error::Unsupported("ct-gd needs a euclidean map on R^n".into()))
        }
        Dynamics::CtAsc if !prob.map.is_euclidean() => {
            return Err(Error::Unsupported("ct-asc needs a euclidean map".into()))
        }
        Dynamics::CtCmd => {}
        _ if !prob.objective.composite().is_zero() && dynamics != Dynamics::CtFw => {
            return Err(Error::IncompatibleConfiguration(format!("{} takes no composite term", dynamics.name())))
        }
        _ => {}
    }
    let n = prob.map.dim();
    let x0 = match &prob.x0 {
        Some(x) => x.clone(),
        None => prob.map.prox_center(),
    };
    let sys = Sys { dynamics, prob, alpha, n, x0 };
    let steps = (t_end / h).round() as usize;
    let every = ((t_end / 2000.0) / h).round().max(1.0) as usize;

    let mut y = sys.init();
    let mut t = 0.0;
    let mut ints = Integrals::default();
    let mut x = sys.x_of(t, &y)?;
    let mut cur = sys.integrands(&x);
    let mut trace = Vec::with_capacity(steps / every + 2);
    let mut halved = 0usize;

    let record = |t: f64, y: &[f64], x: &[f64], ints: &Integrals| -> Result<TracePoint> {
        let a = alpha.value(t);
        let xhat = sys.xhat_of(t, y, x);
        let sg = sys.scaled_gap(t, y, x, ints)?;
        let upper = if dynamics.averaged() {
            (alpha.alpha0() * prob.objective.total_value(&sys.x0) + ints.f + ints.psi) / a
        } else {
            prob.objective.total_value(x)
        };
        let avg_residual = (dynamics == Dynamics::CtFw).then(|| {
            let a0 = alpha.alpha0();
            sys.x0
                .iter()
                .zip(&y[n..2 * n])
                .zip(x)
                .map(|((c, v), xi)| (xi - (a0 * c + v) / a).abs())
                .fold(0.0, f64::max)
        });
        Ok(TracePoint {
            t,
            alpha: a,
            x: x.to_vec(),
            z: sys.z_of(y),
            upper,
            lower: upper - sg / a,
            f_xhat: prob.objective.total_value(&xhat),
            f_gap: prob.objective.total_value(&xhat) - prob.f_star,
            xhat,
            scaled_gap: sg,
            gap: sg / a,
            avg_residual,
        })
    };
    trace.push(record(t, &y, &x, &ints)?);

    for s in 1..=steps {
        let t_next = s as f64 * h;
        // Advance [t, t_next], splitting the interval when an RK4 stage leaves X.
        let mut stack = vec![(t, t_next - t, 0u32)];
        let mut y_cur = y.clone();
        let mut t_cur = t;
        while let Some((ts, hs, depth)) = stack.pop() {
            debug_assert!((ts - t_cur).abs() <= 1e-12 * (1.0 + ts.abs()));
            let y_new = sys.rk4(t_cur, &y_cur, hs)?;
            let x_new = sys.x_of(t_cur + hs, &y_new)?;
            if !set.contains_tol(&x_new, 1e-8) || !crate::linalg::all_finite(&y_new) {
                if depth >= 20 {
                    return Err(Error::StepRejected { t: t_cur });
                }
                halved += 1;
                stack.push((ts + 0.5 * hs, 0.5 * hs, depth + 1));
                stack.push((ts, 0.5 * hs, depth + 1));
                continue;
            }
            let ad0 = alpha.rate(t_cur);
            let ad1 = alpha.rate(t_cur + hs);
            let next = sys.integrands(&x_new);
            let trap = |a: f64, b: f64| 0.5 * hs * (ad0 * a + ad1 * b);
            ints.f += trap(cur.0, next.0);
            ints.gx += trap(cur.1, next.1);
            ints.psi += trap(cur.2, next.2);
            cur = next;
            y_cur = y_new;
            x = x_new;
            t_cur += hs;
        }
        y = y_cur;
        t = t_next;
        if s % every == 0 || s == steps {
            trace.push(record(t, &y, &x, &ints)?);
        }
    }
    Ok(ContinuousRun { dynamics, alpha, h, t_end, trace, halved_steps: halved })
}

/// G(t) at a recorded grid time.
pub fn continuous_gap(run: &ContinuousRun, t: f64) -> Result<f64> {
    run.trace
        .iter()
        .find(|p| (p.t - t).abs() <= 1e-9 * t.abs().max(1.0))
        .map(|p| p.gap)
        .ok_or(Error::OffGrid(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square() -> (Objective, MirrorMap) {
        let set = FeasibleSet::rn(1);
        let f = Objective::diagonal_quadratic(&[1.0], &[0.0], &set).unwrap();
        (f, MirrorMap::euclidean(set, vec![1.0], 1.0).unwrap())
    }

    #[test]
    fn ct_gd_matches_exponential() {
        let (f, map) = half_square();
        let p = CtProblem { objective: &f, map: &map, strong_convexity: 1.0, x_star: vec![0.0], f_star: 0.0, x0: None };
        let r = integrate(Dynamics::CtGd, &p, Alpha::Linear { alpha0: 1.0, c: 1.0 }, 1e-3, 2.0).unwrap();
        let x = r.final_point().x[0];
        assert!((x - (-2f64).exp()).abs() < 1e-6);
        assert!((x - 0.135335).abs() < 1e-6);
        let g0 = continuous_gap(&r, 0.0).unwrap();
        assert!(continuous_gap(&r, 2.0).unwrap() <= g0 * r.alpha.value(0.0) / r.alpha.value(2.0) + 1e-3);
        assert!(matches!(continuous_gap(&r, 0.00037), Err(Error::OffGrid(_))));
    }

    #[test]
    fn constant_objective_stays_put() {
        let set = FeasibleSet::cube(2, 1.0).unwrap();
        let f = Objective::constant(2, 1.0);
        let map = MirrorMap::euclidean(set, vec![0.3, -0.2], 1.0).unwrap();
        let p = CtProblem { objective: &f, map: &map, strong_convexity: 1.0, x_star: vec![0.3, -0.2], f_star: 1.0, x0: None };
        for d in [Dynamics::CtMd, Dynamics::CtAmd, Dynamics::CtAsc, Dynamics::CtCmd] {
            let r = integrate(d, &p, Alpha::Polynomial { alpha0: 1.0, p: 2.0 }, 1e-2, 2.0).unwrap();
            let worst = r.trace.iter().map(|q| crate::linalg::dist2(&q.x, &[0.3, -0.2])).fold(0.0, f64::max);
            assert!(worst < 1e-9, "{} {worst}", d.name());
        }
    }

    #[test]
    fn bad_step_rejected() {
        let (f, map) = half_square();
        let p = CtProblem { objective: &f, map: &map, strong_convexity: 1.0, x_star: vec![0.0], f_star: 0.0, x0: None };
        assert!(integrate(Dynamics::CtGd, &p, Alpha::Linear { alpha0: 1.0, c: 1.0 }, 0.1, 2.0).is_err());
    }

    fn diag14() -> (Objective, MirrorMap) {
        let set = FeasibleSet::rn(2);
        let f = Objective::diagonal_quadratic(&[1.0, 4.0], &[0.0, 0.0], &set).unwrap();
        (f, MirrorMap::euclidean(set, vec![0.0, 0.0], 1.0).unwrap())
    }

    #[test]
    fn ct_amd_within_monotone_bound() {
        let (f, map) = diag14();
        let p = CtProblem {
            objective: &f,
            map: &map,
            strong_convexity: 1.0,
            x_star: vec![0.0, 0.0],
            f_star: 0.0,
            x0: Some(vec![1.0, 1.0]),
        };
        let alpha = Alpha::Polynomial { alpha0: 1.0, p: 2.0 };
        let r = integrate(Dynamics::CtAmd, &p, alpha, 1e-2, 5.0).unwrap();
        let g0 = r.trace[0].scaled_gap;
        for q in &r.trace {
            assert!(q.f_gap <= g0 / q.alpha * (1.0 + 10.0 * r.h), "t={} {} > {}", q.t, q.f_gap, g0 / q.alpha);
        }
        let fine = integrate(Dynamics::CtAmd, &p, alpha, 5e-3, 5.0).unwrap();
        assert!(fine.monotone_violation() <= 0.5 * r.monotone_violation() + 1e-12);
    }

    #[test]
    fn ct_fw_is_an_average_of_vertices() {
        let set = FeasibleSet::simplex(3);
        let f = Objective::diagonal_quadratic(&[1.0, 1.0, 1.0], &[0.2, 0.3, 0.5], &set).unwrap();
        let map = MirrorMap::euclidean(set, vec![1.0 / 3.0; 3], 1.0).unwrap();
        let p = CtProblem {
            objective: &f,
            map: &map,
            strong_convexity: 0.0,
            x_star: vec![0.2, 0.3, 0.5],
            f_star: -0.19,
            x0: Some(vec![1.0, 0.0, 0.0]),
        };
        let r = integrate(Dynamics::CtFw, &p, Alpha::Linear { alpha0: 1.0, c: 1.0 }, 1e-2, 4.0).unwrap();
        assert!(r.trace.iter().all(|q| q.avg_residual.unwrap() < 1e-12));
        assert!(r.final_point().f_gap <= r.monotone_bound() * 1.1);
    }
}
