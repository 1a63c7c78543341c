//! Objectives with certified constants, monotone operators, saddle problems,
//! seeded instance families and their ground truth.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, frobenius, matvec, matvec_t, max_abs_entry, norm1, norm2, norm_inf, sub, Vector,
};
use crate::mirror_maps::{soft_threshold, CompositePart, FeasibleSet, MirrorMap, NormKind};

pub type Matrix = Vec<Vec<f64>>;

/// Certified constants with respect to one norm. Each is an upper bound
/// (lower bound for `strongly_convex`) that held on the certification sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lipschitz: Option<f64>,
    pub smooth: Option<f64>,
    pub strongly_convex: Option<f64>,
    /// (L_ν, ν)
    pub hoelder: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjKind {
    /// ½(x − c)ᵀQ(x − c) + offset
    Quadratic { q: Matrix, center: Vector, offset: f64 },
    /// ½‖Ax − b‖²
    LeastSquares { a: Matrix, b: Vector },
    /// Σ w_j h_δ(x_j − c_j), h_δ the Huber function.
    Huber { w: Vector, center: Vector, delta: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    kind: ObjKind,
    dim: usize,
    l2: Constants,
    l1: Constants,
    composite: CompositePart,
}

fn huber(r: f64, delta: f64) -> (f64, f64) {
    if r.abs() <= delta {
        (0.5 * r * r / delta, r / delta)
    } else {
        (r.abs() - 0.5 * delta, r.signum())
    }
}

fn sym_eigen(q: &Matrix) -> (f64, f64) {
    let n = q.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (q[i][j] + q[j][i]));
    let ev = m.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

impl Objective {
    /// ½(x − c)ᵀQ(x − c) + offset; constants are computed for `set`.
    pub fn quadratic(q: Matrix, center: Vector, offset: f64, set: &FeasibleSet) -> Result<Self> {
        let n = center.len();
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return Err(Error::DomainError("quadratic dimension mismatch".into()));
        }
        Self::build(ObjKind::Quadratic { q, center, offset }, set)
    }

    /// ½xᵀdiag(d)x − bᵀx, written in residual form.
    pub fn diagonal_quadratic(d: &[f64], b: &[f64], set: &FeasibleSet) -> Result<Self> {
        if d.iter().any(|v| !(*v > 0.0)) || d.len() != b.len() {
            return Err(Error::DomainError("diagonal must be positive".into()));
        }
        let n = d.len();
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
            .collect();
        let c: Vector = b.iter().zip(d).map(|(bi, di)| bi / di).collect();
        let offset = -0.5 * b.iter().zip(&c).map(|(bi, ci)| bi * ci).sum::<f64>();
        Self::quadratic(q, c, offset, set)
    }

    pub fn least_squares(a: Matrix, b: Vector, set: &FeasibleSet) -> Result<Self> {
        Self::build(ObjKind::LeastSquares { a, b }, set)
    }

    pub fn huber(w: Vector, center: Vector, delta: f64, set: &FeasibleSet) -> Result<Self> {
        if !(delta > 0.0) || w.len() != center.len() || w.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::DomainError("huber needs δ > 0 and nonnegative weights".into()));
        }
        Self::build(ObjKind::Huber { w, center, delta }, set)
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        // Any nonnegative number bounds the constants of a constant function;
        // 1 keeps step-size formulas finite.
        let c = Constants {
            lipschitz: Some(1.0),
            smooth: Some(1.0),
            strongly_convex: None,
            hoelder: Some((1.0, 1.0)),
        };
        Self { kind: ObjKind::Constant { value }, dim, l2: c, l1: c, composite: CompositePart::Zero }
    }

    fn build(kind: ObjKind, set: &FeasibleSet) -> Result<Self> {
        let dim = match &kind {
            ObjKind::Quadratic { center, .. } | ObjKind::Huber { center, .. } => center.len(),
            ObjKind::LeastSquares { a, .. } => a.first().map_or(0, |r| r.len()),
            ObjKind::Constant { .. } => set.dim(),
        };
        if dim != set.dim() {
            return Err(Error::DomainError("objective and set dimensions differ".into()));
        }
        let mut obj = Self {
            kind,
            dim,
            l2: Constants::default(),
            l1: Constants::default(),
            composite: CompositePart::Zero,
        };
        obj.derive_constants(set);
        Ok(obj)
    }

    fn hessian(&self) -> Option<Matrix> {
        match &self.kind {
            ObjKind::Quadratic { q, .. } => Some(q.clone()),
            ObjKind::LeastSquares { a, .. } => {
                let n = self.dim;
                Some(
                    (0..n)
                        .map(|i| (0..n).map(|j| a.iter().map(|r| r[i] * r[j]).sum()).collect())
                        .collect(),
                )
            }
            _ => None,
        }
    }

    fn derive_constants(&mut self, set: &FeasibleSet) {
        let n = self.dim as f64;
        match &self.kind {
            ObjKind::Quadratic { .. } | ObjKind::LeastSquares { .. } => {
                let h = self.hessian().expect("quadratic");
                let (lo, hi) = sym_eigen(&h);
                let maxabs = max_abs_entry(&h);
                let sc = if lo > 1e-12 { Some(lo) } else { None };
                // Gradients are affine, so their norms peak at vertices.
                let (lip2, lip1) = match set.vertices() {
                    Some(vs) => {
                        let gs: Vec<Vector> = vs.iter().map(|v| self.gradient(v)).collect();
                        (
                            Some(gs.iter().map(|g| norm2(g)).fold(0.0, f64::max)),
                            Some(gs.iter().map(|g| norm_inf(g)).fold(0.0, f64::max)),
                        )
                    }
                    None => match set {
                        FeasibleSet::Ball { center, radius } => {
                            let g = self.gradient(center);
                            (Some(norm2(&g) + hi * radius), Some(norm2(&g) + hi * radius))
                        }
                        _ => (None, None),
                    },
                };
                self.l2 = Constants {
                    lipschitz: lip2,
                    smooth: Some(hi),
                    strongly_convex: sc,
                    hoelder: Some((hi, 1.0)),
                };
                self.l1 = Constants {
                    lipschitz: lip1,
                    smooth: Some(maxabs),
                    strongly_convex: sc.map(|s| s / n),
                    hoelder: Some((maxabs, 1.0)),
                };
            }
            ObjKind::Huber { w, delta, .. } => {
                let sm = w.iter().cloned().fold(0.0, f64::max) / delta;
                self.l2 = Constants {
                    lipschitz: Some(norm2(w)),
                    smooth: Some(sm),
                    strongly_convex: None,
                    hoelder: Some((sm, 1.0)),
                };
                self.l1 = Constants {
                    lipschitz: Some(norm_inf(w)),
                    smooth: Some(sm),
                    strongly_convex: None,
                    hoelder: Some((sm, 1.0)),
                };
            }
            ObjKind::Constant { .. } => {}
        }
    }

    pub fn with_composite(mut self, psi: CompositePart) -> Self {
        self.composite = psi;
        self
    }

    pub fn kind(&self) -> &ObjKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn composite(&self) -> &CompositePart {
        &self.composite
    }

    /// Constants w.r.t. the norm of a map; product norms fall back to ℓ2.
    pub fn constants(&self, norm: NormKind) -> Constants {
        match norm {
            NormKind::L1 => self.l1,
            _ => self.l2,
        }
    }

    pub fn constants_for(&self, map: &MirrorMap) -> Constants {
        self.constants(map.norm_kind())
    }

    /// Smooth part f(x).
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ObjKind::Quadratic { q, center, offset } => {
                let d = sub(x, center);
                0.5 * dot(&d, &matvec(q, &d)) + offset
            }
            ObjKind::LeastSquares { a, b } => {
                let r = sub(&matvec(a, x), b);
                0.5 * dot(&r, &r)
            }
            ObjKind::Huber { w, center, delta } => x
                .iter()
                .zip(center)
                .zip(w)
                .map(|((xj, cj), wj)| wj * huber(xj - cj, *delta).0)
                .sum(),
            ObjKind::Constant { value } => *value,
        }
    }

    /// f(x) + ψ(x).
    pub fn total_value(&self, x: &[f64]) -> f64 {
        self.value(x) + self.composite.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        match &self.kind {
            ObjKind::Quadratic { q, center, .. } => matvec(q, &sub(x, center)),
            ObjKind::LeastSquares { a, b } => matvec_t(a, &sub(&matvec(a, x), b)),
            ObjKind::Huber { w, center, delta } => x
                .iter()
                .zip(center)
                .zip(w)
                .map(|((xj, cj), wj)| wj * huber(xj - cj, *delta).1)
                .collect(),
            ObjKind::Constant { .. } => vec![0.0; self.dim],
        }
    }

    /// Fenchel conjugate f*(y) over R^n, available for strongly convex quadratics.
    pub fn fenchel_conjugate(&self, y: &[f64]) -> Option<f64> {
        match &self.kind {
            ObjKind::Quadratic { q, center, offset } => {
                let n = self.dim;
                let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
                let inv = m.try_inverse()?;
                let yv = DVector::from_column_slice(y);
                let qy = &inv * &yv;
                Some(dot(y, center) + 0.5 * yv.dot(&qy) - offset)
            }
            _ => None,
        }
    }

    /// Finite-difference and constant certification on seeded samples.
    pub fn certify(&self, set: &FeasibleSet, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spread = 3.0;
        for _ in 0..50 {
            let x = set.sample(&mut rng, spread);
            let g = self.gradient(&x);
            let gn = norm_inf(&g).max(1.0);
            for j in 0..self.dim {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                if (fd - g[j]).abs() > 1e-5 * gn {
                    return Err(Error::Certification(format!(
                        "finite difference {fd} vs gradient {} at coordinate {j}",
                        g[j]
                    )));
                }
            }
        }
        for (norm, c) in [(NormKind::L2, self.l2), (NormKind::L1, self.l1)] {
            let pn = |v: &[f64]| if norm == NormKind::L1 { norm1(v) } else { norm2(v) };
            let dn = |v: &[f64]| if norm == NormKind::L1 { norm_inf(v) } else { norm2(v) };
            for _ in 0..500 {
                let x = set.sample(&mut rng, spread);
                let y = set.sample(&mut rng, spread);
                let (gx, gy) = (self.gradient(&x), self.gradient(&y));
                let dg = sub(&gx, &gy);
                let dx = sub(&x, &y);
                if let Some(l) = c.lipschitz {
                    if set.is_bounded() && dn(&gx) > l * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::Certification(format!("lipschitz {l} exceeded")));
                    }
                }
                if let Some(l) = c.smooth {
                    if dn(&dg) > l * pn(&dx) * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::Certification(format!("smoothness {l} exceeded")));
                    }
                }
                if let Some(s) = c.strongly_convex {
                    if dot(&dg, &dx) < s * pn(&dx).powi(2) * (1.0 - 1e-9) - 1e-12 {
                        return Err(Error::Certification(format!("strong convexity {s} violated")));
                    }
                }
                if let Some((l, nu)) = c.hoelder {
                    if dn(&dg) > l * pn(&dx).powf(nu) * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::Certification(format!("hoelder ({l}, {nu}) exceeded")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SaddleKind {
    /// Φ(v, w) = vᵀMw
    Bilinear { m: Matrix },
    /// Φ(v, w) = f(v)
    Primal { f: Objective },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleProblem {
    pub v_set: FeasibleSet,
    pub w_set: FeasibleSet,
    pub kind: SaddleKind,
}

impl SaddleProblem {
    pub fn bilinear(m: Matrix, v_set: FeasibleSet, w_set: FeasibleSet) -> Result<Self> {
        if m.len() != v_set.dim() || m.iter().any(|r| r.len() != w_set.dim()) {
            return Err(Error::DomainError("matrix shape does not match the sets".into()));
        }
        Ok(Self { v_set, w_set, kind: SaddleKind::Bilinear { m } })
    }

    pub fn nv(&self) -> usize {
        self.v_set.dim()
    }

    pub fn set(&self) -> FeasibleSet {
        FeasibleSet::Product { blocks: vec![self.v_set.clone(), self.w_set.clone()] }
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.nv())
    }

    pub fn value(&self, v: &[f64], w: &[f64]) -> f64 {
        match &self.kind {
            SaddleKind::Bilinear { m } => dot(v, &matvec(m, w)),
            SaddleKind::Primal { f } => f.value(v),
        }
    }

    pub fn grad_v(&self, v: &[f64], w: &[f64]) -> Vector {
        match &self.kind {
            SaddleKind::Bilinear { m } => matvec(m, w),
            SaddleKind::Primal { f } => f.gradient(v),
        }
    }

    pub fn grad_w(&self, v: &[f64], _w: &[f64]) -> Vector {
        match &self.kind {
            SaddleKind::Bilinear { m } => matvec_t(m, v),
            SaddleKind::Primal { .. } => vec![0.0; self.w_set.dim()],
        }
    }

    /// F(v, w) = [∇_vΦ, −∇_wΦ].
    pub fn operator(&self) -> MonotoneOp {
        MonotoneOp { dim: self.v_set.dim() + self.w_set.dim(), kind: OpKind::Saddle(Box::new(self.clone())) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    Zero,
    Saddle(Box<SaddleProblem>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneOp {
    pub dim: usize,
    pub kind: OpKind,
}

impl MonotoneOp {
    pub fn zero(dim: usize) -> Self {
        Self { dim, kind: OpKind::Zero }
    }

    pub fn eval(&self, x: &[f64]) -> Vector {
        match &self.kind {
            OpKind::Zero => vec![0.0; self.dim],
            OpKind::Saddle(p) => {
                let (v, w) = p.split(x);
                let mut out = p.grad_v(v, w);
                out.extend(p.grad_w(v, w).iter().map(|g| -g));
                out
            }
        }
    }

    /// Lipschitz constant of F w.r.t. the norm of `map`.
    pub fn smooth_for(&self, map: &MirrorMap) -> f64 {
        match &self.kind {
            // 1 is a valid (if loose) constant and keeps σ/L finite.
            OpKind::Zero => 1.0,
            OpKind::Saddle(p) => match &p.kind {
                SaddleKind::Bilinear { m } => {
                    if all_l1(map) {
                        max_abs_entry(m)
                    } else {
                        frobenius(m)
                    }
                }
                SaddleKind::Primal { f } => f.constants(NormKind::L2).smooth.unwrap_or(f64::INFINITY),
            },
        }
    }

    /// Monotonicity on 500 seeded pairs.
    pub fn certify(&self, set: &FeasibleSet, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let x = set.sample(&mut rng, 3.0);
            let y = set.sample(&mut rng, 3.0);
            let m = dot(&sub(&self.eval(&x), &self.eval(&y)), &sub(&x, &y));
            if m < -1e-10 {
                return Err(Error::Certification(format!("operator not monotone: {m}")));
            }
        }
        Ok(())
    }
}

fn all_l1(map: &MirrorMap) -> bool {
    use crate::mirror_maps::MapKind;
    match map.kind() {
        MapKind::Entropy { .. } => true,
        MapKind::Euclidean { .. } => false,
        MapKind::Product { blocks } => blocks.iter().all(all_l1),
    }
}

/// max over probes u of ⟨F(u), x̂ − u⟩.
pub fn restricted_vi_gap(op: &MonotoneOp, xhat: &[f64], probes: &[Vector]) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    Ok(probes
        .iter()
        .map(|u| dot(&op.eval(u), &sub(xhat, u)))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Vertices (when enumerable) plus 100 seeded random feasible points.
pub fn default_probes(set: &FeasibleSet, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut probes = set.vertices().unwrap_or_default();
    probes.extend((0..100).map(|_| set.sample(&mut rng, 1.0)));
    probes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMethod {
    ClosedForm,
    ReferenceSolve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x_star: Vector,
    /// f̄(x*) for objectives, Φ(v*, w*) for saddle problems.
    pub f_star: f64,
    pub method: TruthMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Objective(Objective),
    Operator(MonotoneOp),
    Saddle(SaddleProblem),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub problem: Problem,
    pub set: FeasibleSet,
    pub truth: GroundTruth,
}

impl Instance {
    pub fn objective(&self) -> Option<&Objective> {
        match &self.problem {
            Problem::Objective(f) => Some(f),
            _ => None,
        }
    }

    pub fn operator(&self) -> Option<MonotoneOp> {
        match &self.problem {
            Problem::Operator(op) => Some(op.clone()),
            Problem::Saddle(p) => Some(p.operator()),
            Problem::Objective(_) => None,
        }
    }

    /// Optimality residual of the ground truth: the norm of the
    /// prox-gradient mapping x* − prox(x* − ∇f(x*)) (or its operator analogue).
    pub fn truth_residual(&self) -> f64 {
        let x = &self.truth.x_star;
        match &self.problem {
            Problem::Objective(f) => {
                let g = f.gradient(x);
                let y: Vector = x.iter().zip(&g).map(|(a, b)| a - b).collect();
                norm2(&sub(x, &prox(f.composite(), &self.set, &y, 1.0)))
            }
            _ => {
                let op = self.operator().expect("operator");
                let g = op.eval(x);
                let y: Vector = x.iter().zip(&g).map(|(a, b)| a - b).collect();
                norm2(&sub(x, &self.set.project(&y)))
            }
        }
    }
}

/// prox of step·ψ restricted to `set`, for the combinations the reference
/// solver needs (separable ones).
fn prox(psi: &CompositePart, set: &FeasibleSet, y: &[f64], step: f64) -> Vector {
    match psi {
        CompositePart::L1 { lambda } => {
            let s: Vector = y.iter().map(|v| soft_threshold(*v, step * lambda)).collect();
            set.project(&s)
        }
        _ => set.project(y),
    }
}

/// Accelerated proximal gradient, stopped when the prox-gradient residual
/// falls below 1e-13 or after 10^6 iterations.
fn reference_solve(f: &Objective, set: &FeasibleSet, x0: Vector) -> Result<Vector> {
    let l = f.constants(NormKind::L2).smooth.ok_or(Error::NotSmooth)?.max(1e-12);
    let step = 1.0 / l;
    let mut x = x0.clone();
    let mut y = x0;
    let mut t = 1.0_f64;
    for it in 0..1_000_000 {
        let g = f.gradient(&y);
        let arg: Vector = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let xn = prox(f.composite(), set, &arg, step);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Restart momentum whenever the objective goes up.
        let restart = f.total_value(&xn) > f.total_value(&x);
        y = if restart {
            t = 1.0;
            xn.clone()
        } else {
            xn.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / tn * (a - b)).collect()
        };
        if !restart {
            t = tn;
        }
        x = xn;
        if it % 50 == 0 {
            let gx = f.gradient(&x);
            let a2: Vector = x.iter().zip(&gx).map(|(a, b)| a - step * b).collect();
            if norm2(&sub(&x, &prox(f.composite(), set, &a2, step))) * l < 1e-13 {
                return Ok(x);
            }
        }
    }
    Err(Error::Certification("reference solve did not converge".into()))
}

/// Instance descriptor; see the README for the per-family keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub family: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub rows: Option<usize>,
    /// Hessian eigenvalues given explicitly (quadratic: used as a diagonal).
    #[serde(default)]
    pub diag: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    /// Strong convexity / smoothness range for random spectra.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub smooth: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Half-width of the box constraint; absent means R^n where allowed.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub origin_minimizer: Option<bool>,
    #[serde(default)]
    pub vertex_optimum: Option<bool>,
    #[serde(default)]
    pub matrix: Option<Matrix>,
    #[serde(default)]
    pub nv: Option<usize>,
    #[serde(default)]
    pub nw: Option<usize>,
}

impl InstanceSpec {
    pub fn family(name: &str) -> Self {
        Self { family: name.to_string(), ..Default::default() }
    }

    pub fn dim(mut self, n: usize) -> Self {
        self.dim = Some(n);
        self
    }

    pub fn radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn spectrum(mut self, mu: f64, smooth: f64) -> Self {
        self.mu = Some(mu);
        self.smooth = Some(smooth);
        self
    }

    pub fn origin(mut self) -> Self {
        self.origin_minimizer = Some(true);
        self
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Q = R diag(eigs) Rᵀ with a seeded random orthogonal R.
fn random_spd(rng: &mut ChaCha8Rng, eigs: &[f64]) -> Matrix {
    let n = eigs.len();
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let r = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigs));
    let q = &r * d * r.transpose();
    (0..n).map(|i| (0..n).map(|j| 0.5 * (q[(i, j)] + q[(j, i)])).collect()).collect()
}

fn spread_eigs(n: usize, mu: f64, smooth: f64) -> Vec<f64> {
    if n == 1 {
        return vec![smooth];
    }
    (0..n).map(|i| mu + (smooth - mu) * i as f64 / (n - 1) as f64).collect()
}

/// Build a seeded instance and certify it.
pub fn make_instance(spec: &InstanceSpec, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match spec.family.as_str() {
        "quadratic" => quadratic_instance(spec, &mut rng)?,
        "lasso" => lasso_instance(spec, &mut rng)?,
        "huber" => huber_instance(spec, &mut rng)?,
        "simplex_quadratic" => simplex_quadratic_instance(spec, &mut rng)?,
        "bilinear" => bilinear_instance(spec, &mut rng)?,
        "matrix_game" => matrix_game_instance(spec)?,
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    match &inst.problem {
        Problem::Objective(f) => f.certify(&inst.set, seed)?,
        _ => inst.operator().expect("operator").certify(&inst.set, seed)?,
    }
    let res = inst.truth_residual();
    if !(res <= 1e-10) {
        return Err(Error::Certification(format!("ground truth residual {res:e}")));
    }
    Ok(inst)
}

fn set_for(spec: &InstanceSpec, n: usize) -> Result<FeasibleSet> {
    match spec.radius {
        Some(r) => FeasibleSet::cube(n, r),
        None => Ok(FeasibleSet::rn(n)),
    }
}

fn quadratic_instance(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let (f, set) = if let Some(d) = &spec.diag {
        let set = set_for(spec, d.len())?;
        let b = spec.b.clone().unwrap_or_else(|| vec![0.0; d.len()]);
        (Objective::diagonal_quadratic(d, &b, &set)?, set)
    } else {
        let n = spec.dim.unwrap_or(5);
        let set = set_for(spec, n)?;
        let q = random_spd(rng, &spread_eigs(n, spec.mu.unwrap_or(1.0), spec.smooth.unwrap_or(10.0)));
        let c: Vector = if spec.origin_minimizer.unwrap_or(false) {
            vec![0.0; n]
        } else {
            let r = spec.radius.map_or(1.0, |r| 0.5 * r);
            (0..n).map(|_| rng.gen_range(-r..r)).collect()
        };
        (Objective::quadratic(q, c, 0.0, &set)?, set)
    };
    let ObjKind::Quadratic { center, offset, .. } = f.kind().clone() else { unreachable!() };
    let truth = if set.contains(&center) {
        GroundTruth { x_star: center, f_star: offset, method: TruthMethod::ClosedForm }
    } else {
        let x = reference_solve(&f, &set, set.project(&center))?;
        GroundTruth { f_star: f.total_value(&x), x_star: x, method: TruthMethod::ReferenceSolve }
    };
    Ok(Instance { problem: Problem::Objective(f), set, truth })
}

fn lasso_instance(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = spec.dim.unwrap_or(5);
    let m = spec.rows.unwrap_or(2 * n);
    let set = FeasibleSet::cube(n, spec.radius.unwrap_or(1.0))?;
    let scale = 1.0 / (m as f64).sqrt();
    let a: Matrix = (0..m).map(|_| (0..n).map(|_| gaussian(rng) * scale).collect()).collect();
    let xt: Vector = (0..n).map(|j| if j % 2 == 0 { rng.gen_range(-0.8..0.8) } else { 0.0 }).collect();
    let b: Vector = matvec(&a, &xt).iter().map(|v| v + 0.05 * gaussian(rng)).collect();
    let lambda = spec.lambda.unwrap_or(0.1);
    let f = Objective::least_squares(a, b, &set)?.with_composite(CompositePart::L1 { lambda });
    let x = reference_solve(&f, &set, vec![0.0; n])?;
    let truth = GroundTruth { f_star: f.total_value(&x), x_star: x, method: TruthMethod::ReferenceSolve };
    Ok(Instance { problem: Problem::Objective(f), set, truth })
}

fn huber_instance(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = spec.dim.unwrap_or(5);
    let r = spec.radius.unwrap_or(1.0);
    let set = FeasibleSet::cube(n, r)?;
    let w: Vector = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let c: Vector = (0..n).map(|_| rng.gen_range(-0.5 * r..0.5 * r)).collect();
    let f = Objective::huber(w, c.clone(), spec.delta.unwrap_or(1e-3), &set)?;
    Ok(Instance {
        problem: Problem::Objective(f),
        set,
        truth: GroundTruth { x_star: c, f_star: 0.0, method: TruthMethod::ClosedForm },
    })
}

fn simplex_quadratic_instance(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = spec.dim.unwrap_or(5);
    let set = FeasibleSet::simplex(n);
    let q = random_spd(rng, &spread_eigs(n, spec.mu.unwrap_or(1.0), spec.smooth.unwrap_or(4.0)));
    if spec.vertex_optimum.unwrap_or(false) {
        // Put the minimizer at e_0 with ∇f(e_0) = −s·e_0, which satisfies the
        // simplex optimality conditions; c = e_0 + s·Q⁻¹e_0.
        let s = rng.gen_range(0.5..1.5);
        let qm = DMatrix::from_fn(n, n, |i, j| q[i][j]);
        let inv = qm.try_inverse().ok_or_else(|| Error::DomainError("singular Q".into()))?;
        let mut c: Vector = (0..n).map(|i| s * inv[(i, 0)]).collect();
        c[0] += 1.0;
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let f = Objective::quadratic(q, c, 0.0, &set)?;
        let f_star = f.value(&e0);
        return Ok(Instance {
            problem: Problem::Objective(f),
            set,
            truth: GroundTruth { x_star: e0, f_star, method: TruthMethod::ClosedForm },
        });
    }
    // Interior minimizer, kept away from the boundary.
    let raw = set.sample(rng, 1.0);
    let c: Vector = raw.iter().map(|v| 0.5 * v + 0.5 / n as f64).collect();
    let f = Objective::quadratic(q, c.clone(), 0.0, &set)?;
    Ok(Instance {
        problem: Problem::Objective(f),
        set,
        truth: GroundTruth { x_star: c, f_star: 0.0, method: TruthMethod::ClosedForm },
    })
}

fn bilinear_instance(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let m: Matrix = match &spec.matrix {
        Some(m) => m.clone(),
        None => {
            let nv = spec.nv.unwrap_or(3);
            let nw = spec.nw.unwrap_or(3);
            (0..nv).map(|_| (0..nw).map(|_| gaussian(rng)).collect()).collect()
        }
    };
    let r = spec.radius.unwrap_or(1.0);
    let nv = m.len();
    let nw = m.first().map_or(0, |row| row.len());
    let p = SaddleProblem::bilinear(m, FeasibleSet::cube(nv, r)?, FeasibleSet::cube(nw, r)?)?;
    let set = p.set();
    Ok(Instance {
        problem: Problem::Saddle(p),
        truth: GroundTruth { x_star: vec![0.0; nv + nw], f_star: 0.0, method: TruthMethod::ClosedForm },
        set,
    })
}

fn matrix_game_instance(spec: &InstanceSpec) -> Result<Instance> {
    let m = spec
        .matrix
        .clone()
        .ok_or_else(|| Error::Config("matrix_game needs `matrix`".into()))?;
    let nv = m.len();
    let nw = m.first().map_or(0, |r| r.len());
    let p = SaddleProblem::bilinear(m.clone(), FeasibleSet::simplex(nv), FeasibleSet::simplex(nw))?;
    let (v, w, value) = solve_matrix_game(&m)?;
    let set = p.set();
    let mut x = v;
    x.extend(w);
    Ok(Instance {
        problem: Problem::Saddle(p),
        set,
        truth: GroundTruth { x_star: x, f_star: value, method: TruthMethod::ReferenceSolve },
    })
}

/// Equilibrium of min_v max_w vᵀMw over simplices by support enumeration.
pub fn solve_matrix_game(m: &Matrix) -> Result<(Vector, Vector, f64)> {
    let nv = m.len();
    let nw = m.first().map_or(0, |r| r.len());
    if nv == 0 || nw == 0 || nv > 10 || nw > 10 {
        return Err(Error::Unsupported("support enumeration is limited to games up to 10x10".into()));
    }
    let subsets = |n: usize, k: usize| -> Vec<Vec<usize>> {
        (0..1usize << n)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| (0..n).filter(|j| mask >> j & 1 == 1).collect())
            .collect()
    };
    let tol = 1e-12;
    for k in 1..=nv.min(nw) {
        for s in subsets(nv, k) {
            for t in subsets(nw, k) {
                // w on t: rows in s equalize at `val`; v on s: columns in t equalize.
                let Some((wt, val)) = equalize(k, |i, j| m[s[i]][t[j]]) else { continue };
                let Some((vs, val2)) = equalize(k, |i, j| m[s[j]][t[i]]) else { continue };
                if wt.iter().chain(&vs).any(|x| *x < -tol) || (val - val2).abs() > 1e-9 {
                    continue;
                }
                let mut w = vec![0.0; nw];
                for (j, x) in t.iter().zip(&wt) {
                    w[*j] = x.max(0.0);
                }
                let mut v = vec![0.0; nv];
                for (i, x) in s.iter().zip(&vs) {
                    v[*i] = x.max(0.0);
                }
                let mw = matvec(m, &w);
                let mtv = matvec_t(m, &v);
                if mw.iter().all(|r| *r >= val - 1e-9) && mtv.iter().all(|c| *c <= val + 1e-9) {
                    return Ok((v, w, val));
                }
            }
        }
    }
    Err(Error::Certification("no equilibrium found".into()))
}

/// Solve Σ_j a(i, j)·y_j = val for all i, Σ y = 1.
fn equalize(k: usize, a: impl Fn(usize, usize) -> f64) -> Option<(Vector, f64)> {
    let n = k + 1;
    let mat = DMatrix::from_fn(n, n, |i, j| {
        if i < k && j < k {
            a(i, j)
        } else if i < k {
            -1.0
        } else if j < k {
            1.0
        } else {
            0.0
        }
    });
    let mut rhs = DVector::zeros(n);
    rhs[k] = 1.0;
    let sol = mat.lu().solve(&rhs)?;
    if !sol.iter().all(|x| x.is_finite()) {
        return None;
    }
    Some(((0..k).map(|j| sol[j]).collect(), sol[k]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_quadratic_example() {
        let set = FeasibleSet::rn(2);
        let f = Objective::diagonal_quadratic(&[1.0, 4.0], &[1.0, 4.0], &set).unwrap();
        // Oracle: x* solves diag(1,4)x = (1,4); f* = ½x*ᵀQx* − bᵀx*.
        let xs = [1.0, 1.0];
        let fstar = 0.5 * (1.0 + 4.0) - (1.0 + 4.0);
        assert!((f.value(&xs) - fstar).abs() < 1e-15);
        assert_eq!(fstar, -2.5);
        let c = f.constants(NormKind::L2);
        assert!((c.smooth.unwrap() - 4.0).abs() < 1e-12);
        assert!((c.strongly_convex.unwrap() - 1.0).abs() < 1e-12);
        f.certify(&set, 1).unwrap();
    }

    #[test]
    fn isotropic_quadratic_instance() {
        let spec = InstanceSpec { diag: Some(vec![1.0; 3]), ..InstanceSpec::family("quadratic") };
        let inst = make_instance(&spec, 0).unwrap();
        assert_eq!(inst.truth.x_star, vec![0.0; 3]);
        assert_eq!(inst.truth.f_star, 0.0);
    }

    #[test]
    fn bilinear_vi_gap_examples() {
        let spec = InstanceSpec { matrix: Some(vec![vec![1.0]]), ..InstanceSpec::family("bilinear") };
        let inst = make_instance(&spec, 0).unwrap();
        assert_eq!(inst.truth.x_star, vec![0.0, 0.0]);
        let op = inst.operator().unwrap();
        let verts = inst.set.vertices().unwrap();
        assert_eq!(verts.len(), 4);
        assert_eq!(restricted_vi_gap(&op, &[0.0, 0.0], &verts).unwrap(), 0.0);
        // Oracle: enumerate the four vertices by hand, ⟨(w, −v), x̂ − (v, w)⟩.
        let manual = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)]
            .iter()
            .map(|(v, w): &(f64, f64)| w * (0.5 - v) + (-v) * (0.0 - w))
            .fold(f64::NEG_INFINITY, f64::max);
        let g = restricted_vi_gap(&op, &[0.5, 0.0], &verts).unwrap();
        assert_eq!(g, manual);
        assert_eq!(g, 0.5);
        assert_eq!(restricted_vi_gap(&op, &[0.3, -0.2], &[vec![0.3, -0.2]]).unwrap(), 0.0);
        assert!(matches!(restricted_vi_gap(&op, &[0.0, 0.0], &[]), Err(Error::EmptyProbeSet)));
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(
            make_instance(&InstanceSpec::family("rosenbrock"), 0),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn matching_pennies_equilibrium() {
        let (v, w, val) = solve_matrix_game(&vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
        assert_eq!(w, vec![0.5, 0.5]);
        assert_eq!(val, 0.0);
    }

    #[test]
    fn families_certify() {
        for fam in ["quadratic", "lasso", "huber", "simplex_quadratic", "bilinear"] {
            for seed in 0..3 {
                let mut spec = InstanceSpec::family(fam);
                if fam == "quadratic" && seed == 2 {
                    spec.radius = Some(0.3);
                }
                let inst = make_instance(&spec, seed).unwrap_or_else(|e| panic!("{fam}/{seed}: {e}"));
                assert!(inst.set.contains(&inst.truth.x_star));
            }
        }
        let spec = InstanceSpec { vertex_optimum: Some(true), ..InstanceSpec::family("simplex_quadratic") };
        let inst = make_instance(&spec, 4).unwrap();
        assert_eq!(inst.truth.x_star[0], 1.0);
    }

    #[test]
    fn quadratic_fenchel_conjugate() {
        let set = FeasibleSet::rn(2);
        let f = Objective::diagonal_quadratic(&[2.0, 1.0], &[1.0, 0.0], &set).unwrap();
        let x = [0.3, -0.7];
        let g = f.gradient(&x);
        // Fenchel–Young holds with equality at y = ∇f(x).
        assert!((f.fenchel_conjugate(&g).unwrap() - (dot(&g, &x) - f.value(&x))).abs() < 1e-14);
    }
}
