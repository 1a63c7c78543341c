//! Feasible sets, mirror maps φ (static or time-varying φ_t), the
//! conjugate-gradient oracle ∇φ*, and Bregman divergences.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_inf, Vector};

/// Coordinates of an entropy iterate below this are treated as zero.
pub const ENTROPY_FLOOR: f64 = 1e-300;
const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Rn { dim: usize },
    Simplex { dim: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Product { blocks: Vec<FeasibleSet> },
}

impl FeasibleSet {
    pub fn rn(dim: usize) -> Self {
        FeasibleSet::Rn { dim }
    }

    pub fn simplex(dim: usize) -> Self {
        FeasibleSet::Simplex { dim }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let s = FeasibleSet::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    /// The symmetric box [-r, r]^dim.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        Self::boxed(vec![-r; dim], vec![r; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let s = FeasibleSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn product(blocks: Vec<FeasibleSet>) -> Result<Self> {
        let s = FeasibleSet::Product { blocks };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Rn { dim } | FeasibleSet::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::DomainError("dimension must be positive".into()));
                }
            }
            FeasibleSet::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::DomainError("box bounds must have equal positive length".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
                    return Err(Error::DomainError("box requires finite lower < upper".into()));
                }
            }
            FeasibleSet::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::DomainError("ball requires radius > 0".into()));
                }
            }
            FeasibleSet::Product { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::DomainError("empty product".into()));
                }
                for b in blocks {
                    b.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Rn { dim } | FeasibleSet::Simplex { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Product { blocks } => blocks.iter().map(|b| b.dim()).sum(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            FeasibleSet::Rn { .. } => false,
            FeasibleSet::Product { blocks } => blocks.iter().all(|b| b.is_bounded()),
            _ => true,
        }
    }

    /// Index ranges of the blocks (a single range for non-product sets).
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        match self {
            FeasibleSet::Product { blocks } => {
                let mut start = 0;
                blocks
                    .iter()
                    .map(|b| {
                        let r = start..start + b.dim();
                        start = r.end;
                        r
                    })
                    .collect()
            }
            _ => std::iter::once(0..self.dim()).collect(),
        }
    }

    /// Euclidean projection.
    pub fn project(&self, x: &[f64]) -> Vector {
        match self {
            FeasibleSet::Rn { .. } => x.to_vec(),
            FeasibleSet::Simplex { .. } => project_simplex(x),
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let d: Vector = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let n = norm2(&d);
                if n <= *radius {
                    x.to_vec()
                } else {
                    center.iter().zip(&d).map(|(c, di)| c + radius * di / n).collect()
                }
            }
            FeasibleSet::Product { blocks } => {
                let mut out = Vec::with_capacity(x.len());
                for (b, r) in blocks.iter().zip(self.block_ranges()) {
                    out.extend(b.project(&x[r]));
                }
                out
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, MEMBERSHIP_TOL)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self {
            FeasibleSet::Rn { .. } => true,
            FeasibleSet::Simplex { .. } => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol * x.len() as f64
            }
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            FeasibleSet::Ball { center, radius } => {
                crate::linalg::dist2(x, center) <= radius + tol
            }
            FeasibleSet::Product { blocks } => blocks
                .iter()
                .zip(self.block_ranges())
                .all(|(b, r)| b.contains_tol(&x[r], tol)),
        }
    }

    /// argmin over the set of ⟨g, u⟩. Ties go to the lowest coordinate index.
    pub fn lmo(&self, g: &[f64]) -> Result<Vector> {
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        match self {
            FeasibleSet::Rn { .. } => Err(Error::NoLmo),
            FeasibleSet::Simplex { dim } => {
                let mut best = 0;
                for j in 1..*dim {
                    if g[j] < g[best] {
                        best = j;
                    }
                }
                let mut v = vec![0.0; *dim];
                v[best] = 1.0;
                Ok(v)
            }
            // g_j = 0 counts as a tie between the two endpoints; take the lower one.
            FeasibleSet::Box { lower, upper } => Ok(g
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(gj, (l, u))| if *gj < 0.0 { *u } else { *l })
                .collect()),
            FeasibleSet::Ball { center, radius } => {
                let n = norm2(g);
                if n == 0.0 {
                    let mut v = center.clone();
                    v[0] -= radius;
                    return Ok(v);
                }
                Ok(center.iter().zip(g).map(|(c, gj)| c - radius * gj / n).collect())
            }
            FeasibleSet::Product { blocks } => {
                let mut out = Vec::with_capacity(g.len());
                for (b, r) in blocks.iter().zip(self.block_ranges()) {
                    out.extend(b.lmo(&g[r])?);
                }
                Ok(out)
            }
        }
    }

    /// Extreme points, when there are finitely many and not too many of them.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        match self {
            FeasibleSet::Simplex { dim } => Some(
                (0..*dim)
                    .map(|j| {
                        let mut v = vec![0.0; *dim];
                        v[j] = 1.0;
                        v
                    })
                    .collect(),
            ),
            FeasibleSet::Box { lower, upper } => {
                let n = lower.len();
                if n > 16 {
                    return None;
                }
                Some(
                    (0..1usize << n)
                        .map(|mask| {
                            (0..n)
                                .map(|j| if mask >> j & 1 == 1 { upper[j] } else { lower[j] })
                                .collect()
                        })
                        .collect(),
                )
            }
            FeasibleSet::Product { blocks } => {
                let mut acc: Vec<Vector> = vec![Vec::new()];
                for b in blocks {
                    let vb = b.vertices()?;
                    if acc.len() * vb.len() > 1 << 16 {
                        return None;
                    }
                    acc = acc
                        .iter()
                        .flat_map(|prefix| {
                            vb.iter().map(move |v| {
                                let mut p = prefix.clone();
                                p.extend_from_slice(v);
                                p
                            })
                        })
                        .collect();
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// A random point of the set. For R^n, a point of the cube [-spread, spread]^n.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, spread: f64) -> Vector {
        match self {
            FeasibleSet::Rn { dim } => (0..*dim).map(|_| rng.gen_range(-spread..spread)).collect(),
            FeasibleSet::Simplex { dim } => {
                let e: Vector = (0..*dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|v| v / s).collect()
            }
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.gen::<f64>())
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let n = center.len();
                let d: Vector = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let nd = norm2(&d).max(f64::MIN_POSITIVE);
                let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
                center.iter().zip(&d).map(|(c, di)| c + r * di / nd).collect()
            }
            FeasibleSet::Product { blocks } => {
                blocks.iter().flat_map(|b| b.sample(rng, spread)).collect()
            }
        }
    }

    /// Diameter in the ℓ2 norm (`l1 = false`) or the ℓ1 norm.
    pub fn diameter(&self, l1: bool) -> Result<f64> {
        match self {
            FeasibleSet::Rn { .. } => Err(Error::UnboundedSet),
            FeasibleSet::Simplex { .. } => Ok(if l1 { 2.0 } else { 2f64.sqrt() }),
            FeasibleSet::Box { lower, upper } => {
                let w: Vector = upper.iter().zip(lower).map(|(u, l)| u - l).collect();
                Ok(if l1 { norm1(&w) } else { norm2(&w) })
            }
            FeasibleSet::Ball { center, radius } => {
                Ok(if l1 { 2.0 * radius * (center.len() as f64).sqrt() } else { 2.0 * radius })
            }
            FeasibleSet::Product { blocks } => {
                let mut s = 0.0;
                for b in blocks {
                    let d = b.diameter(l1)?;
                    s += d * d;
                }
                Ok(s.sqrt())
            }
        }
    }
}

fn project_simplex(y: &[f64]) -> Vector {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cs = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cs += uj;
        let t = (cs - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Soft-thresholding: sign(v)·max(|v| − t, 0).
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapKind {
    /// φ(x) = σ0/2 ‖x − center‖².
    Euclidean { center: Vector },
    /// φ(x) = σ0 Σ x_j ln(x_j / center_j) on the simplex.
    Entropy { center: Vector },
    /// Sum of per-block maps.
    Product { blocks: Vec<MirrorMap> },
}

/// Norm a map is strongly convex with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    L1,
    /// sqrt of the sum of squared block norms.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorMap {
    set: FeasibleSet,
    kind: MapKind,
    sigma0: f64,
}

impl MirrorMap {
    pub fn euclidean(set: FeasibleSet, center: Vector, sigma0: f64) -> Result<Self> {
        set.validate()?;
        if center.len() != set.dim() {
            return Err(Error::DomainError("center dimension mismatch".into()));
        }
        if !(sigma0 > 0.0) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::DomainError("euclidean map needs σ0 > 0 and a finite center".into()));
        }
        if matches!(set, FeasibleSet::Product { .. }) {
            return Err(Error::Unsupported("use MirrorMap::product for product sets".into()));
        }
        Ok(Self { set, kind: MapKind::Euclidean { center }, sigma0 })
    }

    /// Entropy map centered at the uniform distribution.
    pub fn entropy(set: FeasibleSet, sigma0: f64) -> Result<Self> {
        let n = set.dim();
        Self::entropy_centered(set, vec![1.0 / n as f64; n], sigma0)
    }

    pub fn entropy_centered(set: FeasibleSet, center: Vector, sigma0: f64) -> Result<Self> {
        if !matches!(set, FeasibleSet::Simplex { .. }) {
            return Err(Error::Unsupported("entropy map is defined on the simplex only".into()));
        }
        if !(sigma0 > 0.0) || center.len() != set.dim() || !set.contains(&center) || center.iter().any(|c| *c <= 0.0) {
            return Err(Error::DomainError("entropy map needs σ0 > 0 and an interior center".into()));
        }
        Ok(Self { set, kind: MapKind::Entropy { center }, sigma0 })
    }

    /// Block-sum map; all blocks must share the same σ0.
    pub fn product(blocks: Vec<MirrorMap>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::DomainError("empty product".into()))?;
        let sigma0 = first.sigma0;
        if blocks.iter().any(|b| b.sigma0 != sigma0) {
            return Err(Error::Unsupported("product blocks must share σ0".into()));
        }
        let set = FeasibleSet::product(blocks.iter().map(|b| b.set.clone()).collect())?;
        Ok(Self { set, kind: MapKind::Product { blocks }, sigma0 })
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Strong convexity constant.
    pub fn sigma(&self) -> f64 {
        self.sigma0
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn norm_kind(&self) -> NormKind {
        match self.kind {
            MapKind::Euclidean { .. } => NormKind::L2,
            MapKind::Entropy { .. } => NormKind::L1,
            MapKind::Product { .. } => NormKind::Product,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, MapKind::Euclidean { .. })
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MapKind::Euclidean { .. } => norm2(x),
            MapKind::Entropy { .. } => norm1(x),
            MapKind::Product { blocks } => blocks
                .iter()
                .zip(self.set.block_ranges())
                .map(|(b, r)| b.norm(&x[r]).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        match &self.kind {
            MapKind::Euclidean { .. } => norm2(g),
            MapKind::Entropy { .. } => norm_inf(g),
            MapKind::Product { blocks } => blocks
                .iter()
                .zip(self.set.block_ranges())
                .map(|(b, r)| b.dual_norm(&g[r]).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MapKind::Euclidean { center } => {
                0.5 * self.sigma0 * x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
            }
            MapKind::Entropy { center } => {
                self.sigma0
                    * x.iter()
                        .zip(center)
                        .map(|(a, c)| if *a > 0.0 { a * (a / c).ln() } else { 0.0 })
                        .sum::<f64>()
            }
            MapKind::Product { blocks } => blocks
                .iter()
                .zip(self.set.block_ranges())
                .map(|(b, r)| b.value(&x[r]))
                .sum(),
        }
    }

    /// ∇φ(x); entropy requires strictly positive coordinates.
    pub fn grad(&self, x: &[f64]) -> Vector {
        match &self.kind {
            MapKind::Euclidean { center } => {
                x.iter().zip(center).map(|(a, c)| self.sigma0 * (a - c)).collect()
            }
            MapKind::Entropy { center } => x
                .iter()
                .zip(center)
                .map(|(a, c)| self.sigma0 * ((a.max(ENTROPY_FLOOR) / c).ln() + 1.0))
                .collect(),
            MapKind::Product { blocks } => blocks
                .iter()
                .zip(self.set.block_ranges())
                .flat_map(|(b, r)| b.grad(&x[r]))
                .collect(),
        }
    }

    /// The minimizer of φ over the set, ∇φ*(0).
    pub fn prox_center(&self) -> Vector {
        self.grad_conjugate(&vec![0.0; self.dim()]).expect("zero is finite")
    }

    /// ∇φ*(z) = argmax_{x ∈ X} ⟨z, x⟩ − φ(x).
    pub fn grad_conjugate(&self, z: &[f64]) -> Result<Vector> {
        TimeVaryingMap::fixed(self.clone()).grad_conjugate(z)
    }

    /// D_φ(x, y) = φ(x) − φ(y) − ⟨∇φ(y), x − y⟩.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.kind {
            MapKind::Euclidean { .. } => Ok(0.5
                * self.sigma0
                * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()),
            MapKind::Entropy { .. } => {
                let mut s = 0.0;
                for (a, b) in x.iter().zip(y) {
                    if *b < ENTROPY_FLOOR {
                        if *a == 0.0 && *b >= 0.0 {
                            continue;
                        }
                        return Err(Error::DomainError("KL second argument has a zero coordinate".into()));
                    }
                    let t = if *a > 0.0 { a * (a / b).ln() } else { 0.0 };
                    s += t - a + b;
                }
                Ok(self.sigma0 * s)
            }
            MapKind::Product { blocks } => {
                let mut s = 0.0;
                for (b, r) in blocks.iter().zip(self.set.block_ranges()) {
                    s += b.bregman(&x[r.clone()], &y[r])?;
                }
                Ok(s)
            }
        }
    }

    /// max_{x ∈ X} φ(x).
    pub fn max_value(&self) -> Result<f64> {
        match (&self.kind, &self.set) {
            (MapKind::Euclidean { .. }, FeasibleSet::Rn { .. }) => Err(Error::UnboundedSet),
            (MapKind::Euclidean { center }, FeasibleSet::Box { lower, upper }) => Ok(0.5
                * self.sigma0
                * center
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(c, (l, u))| ((l - c) * (l - c)).max((u - c) * (u - c)))
                    .sum::<f64>()),
            (MapKind::Euclidean { center }, FeasibleSet::Ball { center: bc, radius }) => {
                let d = crate::linalg::dist2(center, bc) + radius;
                Ok(0.5 * self.sigma0 * d * d)
            }
            (MapKind::Euclidean { .. }, FeasibleSet::Simplex { .. }) => Ok(self
                .set
                .vertices()
                .expect("simplex has vertices")
                .iter()
                .map(|v| self.value(v))
                .fold(f64::NEG_INFINITY, f64::max)),
            (MapKind::Entropy { center }, _) => Ok(self.sigma0
                * center.iter().map(|c| -c.ln()).fold(f64::NEG_INFINITY, f64::max)),
            (MapKind::Product { blocks }, _) => {
                let mut s = 0.0;
                for b in blocks {
                    s += b.max_value()?;
                }
                Ok(s)
            }
            _ => Err(Error::Unsupported("max of φ over this set".into())),
        }
    }
}

/// The composite part ψ of f̄ = f + ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompositePart {
    Zero,
    L1 { lambda: f64 },
    Indicator { set: FeasibleSet },
}

impl CompositePart {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            CompositePart::Zero => 0.0,
            CompositePart::L1 { lambda } => lambda * norm1(x),
            CompositePart::Indicator { set } => {
                if set.contains_tol(x, 1e-9) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CompositePart::Zero => true,
            CompositePart::L1 { lambda } => *lambda == 0.0,
            CompositePart::Indicator { .. } => false,
        }
    }

    /// argmin over `set` of ⟨g, u⟩ + ψ(u), with lowest-index tie-breaking.
    pub fn lmo(&self, set: &FeasibleSet, g: &[f64]) -> Result<Vector> {
        match self {
            CompositePart::Zero => set.lmo(g),
            CompositePart::Indicator { set: s } if s == set => set.lmo(g),
            CompositePart::L1 { lambda } => match set {
                FeasibleSet::Simplex { .. } => set.lmo(g),
                // Per coordinate, g·u + λ|u| is piecewise linear; its minimum
                // over [l, u] sits at l, 0 (if inside) or u.
                FeasibleSet::Box { lower, upper } => Ok(g
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(gj, (l, u))| {
                        let mut cands = vec![*l];
                        if *l < 0.0 && *u > 0.0 {
                            cands.push(0.0);
                        }
                        cands.push(*u);
                        let mut best = cands[0];
                        let mut bv = gj * best + lambda * best.abs();
                        for c in &cands[1..] {
                            let v = gj * c + lambda * c.abs();
                            if v < bv {
                                bv = v;
                                best = *c;
                            }
                        }
                        best
                    })
                    .collect()),
                _ => Err(Error::NoLmo),
            },
            CompositePart::Indicator { .. } => Err(Error::NoLmo),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Static,
    /// φ_t = A·ψ + φ.
    Composite { psi: CompositePart, weight: f64 },
    /// φ_t = Σ_j a_j σ/2 ‖x − x_j‖² + φ, stored as sufficient statistics.
    Accumulation { sigma: f64, sum_a: f64, sum_ax: Vector, sum_axx: f64 },
}

/// A possibly time-dependent regularizer φ_t built on a base map.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingMap {
    base: MirrorMap,
    mode: Mode,
}

enum View<'a> {
    Static,
    L1 { t: f64 },
    Accum { sigma: f64, sum_a: f64, sum_ax: &'a [f64] },
}

impl TimeVaryingMap {
    pub fn fixed(base: MirrorMap) -> Self {
        Self { base, mode: Mode::Static }
    }

    pub fn composite(base: MirrorMap, psi: CompositePart, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) {
            return Err(Error::DomainError("composite weight must be nonnegative".into()));
        }
        if let CompositePart::L1 { lambda } = psi {
            if !(lambda >= 0.0) {
                return Err(Error::DomainError("l1 weight must be nonnegative".into()));
            }
        }
        Ok(Self { base, mode: Mode::Composite { psi, weight } })
    }

    pub fn accumulation(base: MirrorMap, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::DomainError("accumulation σ must be nonnegative".into()));
        }
        let n = base.dim();
        Ok(Self {
            base,
            mode: Mode::Accumulation { sigma, sum_a: 0.0, sum_ax: vec![0.0; n], sum_axx: 0.0 },
        })
    }

    /// Accumulation mode with given sufficient statistics
    /// (Σa, Σa·x, Σa·‖x‖²), e.g. integrals over a continuous trajectory.
    pub fn accumulation_with(base: MirrorMap, sigma: f64, sum_a: f64, sum_ax: Vector, sum_axx: f64) -> Result<Self> {
        if sum_ax.len() != base.dim() {
            return Err(Error::DomainError("anchor sum has the wrong dimension".into()));
        }
        let mut m = Self::accumulation(base, sigma)?;
        m.mode = Mode::Accumulation { sigma, sum_a, sum_ax, sum_axx };
        Ok(m)
    }

    pub fn base(&self) -> &MirrorMap {
        &self.base
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn set(&self) -> &FeasibleSet {
        self.base.set()
    }

    /// Composite mode with the accumulated weight replaced by `weight`.
    pub fn with_weight(&self, weight: f64) -> Self {
        let mut out = self.clone();
        if let Mode::Composite { weight: w, .. } = &mut out.mode {
            *w = weight;
        }
        out
    }

    /// Accumulation mode with the anchor (a, x) added.
    pub fn with_anchor(&self, a: f64, x: &[f64]) -> Self {
        let mut out = self.clone();
        out.add_anchor(a, x);
        out
    }

    pub fn add_anchor(&mut self, a: f64, x: &[f64]) {
        if let Mode::Accumulation { sum_a, sum_ax, sum_axx, .. } = &mut self.mode {
            *sum_a += a;
            crate::linalg::axpy(sum_ax, a, x);
            *sum_axx += a * dot(x, x);
        }
    }

    /// Strong convexity of φ_t: σ·Σa + σ0 in accumulation mode, σ0 otherwise.
    pub fn sigma(&self) -> f64 {
        match &self.mode {
            Mode::Accumulation { sigma, sum_a, .. } => sigma * sum_a + self.base.sigma(),
            _ => self.base.sigma(),
        }
    }

    fn psi_value(&self, x: &[f64]) -> f64 {
        match &self.mode {
            Mode::Composite { psi, weight } => match psi {
                CompositePart::Indicator { .. } => psi.value(x),
                _ if *weight == 0.0 => 0.0,
                _ => weight * psi.value(x),
            },
            _ => 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.mode {
            Mode::Static => self.base.value(x),
            Mode::Composite { .. } => self.psi_value(x) + self.base.value(x),
            Mode::Accumulation { sigma, sum_a, sum_ax, sum_axx } => {
                0.5 * sigma * (sum_a * dot(x, x) - 2.0 * dot(x, sum_ax) + sum_axx) + self.base.value(x)
            }
        }
    }

    /// ∇φ_t*(z) = argmax_{x ∈ X} ⟨z, x⟩ − φ_t(x).
    pub fn grad_conjugate(&self, z: &[f64]) -> Result<Vector> {
        if z.len() != self.base.dim() {
            return Err(Error::DomainError("dual vector dimension mismatch".into()));
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let x = match &self.mode {
            Mode::Static => leaf_argmax(&self.base, View::Static, z)?,
            Mode::Composite { psi, weight } => match psi {
                _ if psi.is_zero() => leaf_argmax(&self.base, View::Static, z)?,
                CompositePart::L1 { lambda } => leaf_argmax(&self.base, View::L1 { t: weight * lambda }, z)?,
                CompositePart::Indicator { set } => {
                    if set == self.base.set() {
                        leaf_argmax(&self.base, View::Static, z)?
                    } else {
                        match (&self.base.kind, &self.base.set) {
                            (MapKind::Euclidean { center }, FeasibleSet::Rn { .. }) => {
                                let s = self.base.sigma0;
                                set.project(&center.iter().zip(z).map(|(c, zj)| c + zj / s).collect::<Vector>())
                            }
                            _ => {
                                return Err(Error::Unsupported(
                                    "indicator composite over a different constrained set".into(),
                                ))
                            }
                        }
                    }
                }
                CompositePart::Zero => unreachable!(),
            },
            Mode::Accumulation { sigma, sum_a, sum_ax, .. } => {
                leaf_argmax(&self.base, View::Accum { sigma: *sigma, sum_a: *sum_a, sum_ax }, z)?
            }
        };
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(x)
    }

    /// φ_t*(z) together with the maximizer u = ∇φ_t*(z).
    pub fn conjugate(&self, z: &[f64]) -> Result<(f64, Vector)> {
        let u = self.grad_conjugate(z)?;
        Ok((dot(z, &u) - self.value(&u), u))
    }

    pub fn conjugate_value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.conjugate(z)?.0)
    }

    /// D_{φ_t*}(z1, z2) = φ_t(u2) − φ_t(u1) − ⟨z1, u2 − u1⟩ with u = ∇φ_t*(z).
    pub fn bregman_dual(&self, z1: &[f64], z2: &[f64]) -> Result<f64> {
        let u1 = self.grad_conjugate(z1)?;
        let u2 = self.grad_conjugate(z2)?;
        Ok(self.bregman_dual_at(z1, &u1, &u2))
    }

    /// Same as [`bregman_dual`](Self::bregman_dual) with precomputed maximizers.
    pub fn bregman_dual_at(&self, z1: &[f64], u1: &[f64], u2: &[f64]) -> f64 {
        let lin: f64 = z1.iter().zip(u2.iter().zip(u1)).map(|(z, (b, a))| z * (b - a)).sum();
        self.value(u2) - self.value(u1) - lin
    }

    /// ⟨z − s, x − u⟩ for u = ∇φ_t*(z) and the subgradient s ∈ ∂φ_t(u)
    /// closest to z. Nonpositive for every feasible x at an exact maximizer.
    pub fn first_order_gap(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        let u = self.grad_conjugate(z)?;
        let mut s = self.base.grad(&u);
        match &self.mode {
            Mode::Static => {}
            Mode::Composite { psi, weight } => {
                if let CompositePart::L1 { lambda } = psi {
                    let t = weight * lambda;
                    if t > 0.0 && !matches!(self.base.set, FeasibleSet::Simplex { .. }) {
                        for j in 0..u.len() {
                            let w = if u[j] > 0.0 {
                                1.0
                            } else if u[j] < 0.0 {
                                -1.0
                            } else {
                                ((z[j] - s[j]) / t).clamp(-1.0, 1.0)
                            };
                            s[j] += t * w;
                        }
                    }
                }
            }
            Mode::Accumulation { sigma, sum_a, sum_ax, .. } => {
                for j in 0..u.len() {
                    s[j] += sigma * (sum_a * u[j] - sum_ax[j]);
                }
            }
        }
        Ok(z.iter()
            .zip(&s)
            .zip(x.iter().zip(&u))
            .map(|((zj, sj), (xj, uj))| (zj - sj) * (xj - uj))
            .sum())
    }
}

fn leaf_argmax(map: &MirrorMap, view: View<'_>, z: &[f64]) -> Result<Vector> {
    let s0 = map.sigma0;
    match (&map.kind, view) {
        (MapKind::Product { blocks }, view) => {
            let mut out = Vec::with_capacity(z.len());
            for (b, r) in blocks.iter().zip(map.set.block_ranges()) {
                let v = match &view {
                    View::Static => View::Static,
                    View::L1 { t } => View::L1 { t: *t },
                    View::Accum { sigma, sum_a, sum_ax } => {
                        View::Accum { sigma: *sigma, sum_a: *sum_a, sum_ax: &sum_ax[r.clone()] }
                    }
                };
                out.extend(leaf_argmax(b, v, &z[r])?);
            }
            Ok(out)
        }
        (MapKind::Euclidean { center }, View::Static) => {
            Ok(map.set.project(&center.iter().zip(z).map(|(c, zj)| c + zj / s0).collect::<Vector>()))
        }
        (MapKind::Euclidean { center }, View::L1 { t }) => match &map.set {
            FeasibleSet::Rn { .. } | FeasibleSet::Box { .. } => {
                let y: Vector = center
                    .iter()
                    .zip(z)
                    .map(|(c, zj)| soft_threshold(c + zj / s0, t / s0))
                    .collect();
                Ok(map.set.project(&y))
            }
            // ‖x‖₁ = 1 on the simplex, so the l1 term is a constant there.
            FeasibleSet::Simplex { .. } => leaf_argmax(map, View::Static, z),
            _ => Err(Error::Unsupported("l1 composite on this set".into())),
        },
        (MapKind::Euclidean { center }, View::Accum { sigma, sum_a, sum_ax }) => {
            let st = sigma * sum_a + s0;
            Ok(map.set.project(
                &center
                    .iter()
                    .zip(sum_ax)
                    .zip(z)
                    .map(|((c, m), zj)| (sigma * m + s0 * c + zj) / st)
                    .collect::<Vector>(),
            ))
        }
        (MapKind::Entropy { center }, View::Static) | (MapKind::Entropy { center }, View::L1 { .. }) => {
            let w: Vector = z.iter().zip(center).map(|(zj, c)| zj / s0 + c.ln()).collect();
            let m = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vector = w.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            Ok(e.iter().map(|v| v / s).collect())
        }
        (MapKind::Entropy { center }, View::Accum { sigma, sum_a, sum_ax }) => {
            entropy_accum_argmax(center, s0, sigma * sum_a, sigma, sum_ax, z)
        }
    }
}

/// Maximizer of ⟨z,x⟩ − σ/2 Σa‖x−x_j‖² − σ0 KL(x‖c) over the simplex.
///
/// Stationarity gives q·x_j + σ0 ln x_j = r_j − μ per coordinate, with
/// q = σΣa; each coordinate is a monotone scalar root and μ is fixed by
/// Σx = 1. Both levels are solved by bisection.
fn entropy_accum_argmax(
    center: &[f64],
    s0: f64,
    q: f64,
    sigma: f64,
    sum_ax: &[f64],
    z: &[f64],
) -> Result<Vector> {
    let r: Vector = z
        .iter()
        .zip(sum_ax)
        .zip(center)
        .map(|((zj, m), c)| zj + sigma * m + s0 * c.ln() - s0)
        .collect();
    if q == 0.0 {
        let w: Vector = r.iter().map(|v| v / s0).collect();
        let m = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vector = w.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        return Ok(e.iter().map(|v| v / s).collect());
    }
    // Solve q·e^y + s0·y = rhs for y = ln x.
    let coord = |rhs: f64| -> f64 {
        let g = |y: f64| q * y.exp() + s0 * y - rhs;
        let mut hi = (rhs / s0).min((rhs.max(q) / q).ln().max(0.0)) + 1.0;
        while g(hi) < 0.0 {
            hi = 2.0 * hi.abs() + 1.0;
        }
        let mut lo = hi - 1.0;
        while g(lo) > 0.0 {
            lo -= 2.0 * (hi - lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let total = |mu: f64| -> f64 { r.iter().map(|rj| coord(rj - mu)).sum::<f64>() };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut guard = 0;
    while total(lo) < 1.0 {
        lo = 2.0 * lo - 1.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Unsupported("entropy accumulation solve did not bracket".into()));
        }
    }
    while total(hi) > 1.0 {
        hi = 2.0 * hi + 1.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Unsupported("entropy accumulation solve did not bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x: Vector = r.iter().map(|rj| coord(rj - 0.5 * (lo + hi))).collect();
    let s: f64 = x.iter().sum();
    if !((s - 1.0).abs() < 1e-9) {
        return Err(Error::Unsupported("entropy accumulation solve missed tolerance".into()));
    }
    Ok(x.iter().map(|v| v / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid_rn(n: usize) -> MirrorMap {
        MirrorMap::euclidean(FeasibleSet::rn(n), vec![0.0; n], 1.0).unwrap()
    }

    #[test]
    fn euclidean_conjugate_is_identity_at_unit_scale() {
        let x = euclid_rn(2).grad_conjugate(&[3.0, -2.0]).unwrap();
        assert_eq!(x, vec![3.0, -2.0]);
    }

    #[test]
    fn entropy_zero_dual_is_uniform() {
        let m = MirrorMap::entropy(FeasibleSet::simplex(3), 1.0).unwrap();
        let x = m.grad_conjugate(&[0.0; 3]).unwrap();
        for v in x {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_softmax_matches_grid_search() {
        let m = MirrorMap::entropy(FeasibleSet::simplex(2), 1.0).unwrap();
        let z = [3f64.ln(), 0.0];
        let x = m.grad_conjugate(&z).unwrap();
        // Oracle: maximize ⟨z,x⟩ − Σ x ln(2x) over a 1e-4 grid.
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 1..10_000 {
            let p = i as f64 * 1e-4;
            let q = 1.0 - p;
            let val = z[0] * p + z[1] * q - p * (2.0 * p).ln() - q * (2.0 * q).ln();
            if val > best.0 {
                best = (val, p);
            }
        }
        assert!((best.1 - 0.75).abs() <= 1e-4);
        assert!((x[0] - 0.75).abs() < 1e-14 && (x[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bregman_examples() {
        let e = euclid_rn(2);
        assert_eq!(e.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(e.bregman(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        let h = MirrorMap::entropy(FeasibleSet::simplex(2), 1.0).unwrap();
        let kl = h.bregman(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let oracle = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((kl - oracle).abs() < 1e-15);
        assert!((kl - 0.143841).abs() < 1e-6);
        assert_eq!(h.bregman(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert!(matches!(h.bregman(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::DomainError(_))));
    }

    #[test]
    fn bregman_dual_examples() {
        let e = TimeVaryingMap::fixed(euclid_rn(2));
        assert_eq!(e.bregman_dual(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(e.bregman_dual(&[0.7, -0.1], &[0.7, -0.1]).unwrap(), 0.0);
        let h = TimeVaryingMap::fixed(MirrorMap::entropy(FeasibleSet::simplex(2), 1.0).unwrap());
        let v = h.bregman_dual(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        let u1 = h.grad_conjugate(&[1.0, 0.0]).unwrap();
        let d1 = (u1[0] - 0.5).abs() + (u1[1] - 0.5).abs();
        assert!(v >= 0.5 * d1 * d1);
    }

    #[test]
    fn box_and_ball_projections() {
        let b = FeasibleSet::cube(2, 1.0).unwrap();
        assert_eq!(b.project(&[2.0, -0.5]), vec![1.0, -0.5]);
        let ball = FeasibleSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ball.project(&[3.0, 4.0]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        let s = FeasibleSet::simplex(3);
        let p = s.project(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn lmo_breaks_ties_low() {
        let s = FeasibleSet::simplex(3);
        assert_eq!(s.lmo(&[1.0, 0.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(FeasibleSet::boxed(vec![1.0], vec![1.0]).is_err());
        assert!(FeasibleSet::ball(vec![0.0], 0.0).is_err());
    }

    #[test]
    fn l1_composite_soft_thresholds() {
        let m = TimeVaryingMap::composite(euclid_rn(2), CompositePart::L1 { lambda: 1.0 }, 2.0).unwrap();
        assert_eq!(m.grad_conjugate(&[3.0, -1.5]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn composite_zero_matches_static_bitwise() {
        let base = MirrorMap::euclidean(FeasibleSet::cube(2, 1.0).unwrap(), vec![0.1, 0.2], 0.7).unwrap();
        let z = [0.123, -0.456];
        let c = TimeVaryingMap::composite(base.clone(), CompositePart::Zero, 5.0).unwrap();
        assert_eq!(c.grad_conjugate(&z).unwrap(), base.grad_conjugate(&z).unwrap());
    }

    #[test]
    fn accumulation_closed_form() {
        let base = MirrorMap::euclidean(FeasibleSet::rn(1), vec![0.0], 1.0).unwrap();
        let m = TimeVaryingMap::accumulation(base, 2.0).unwrap().with_anchor(1.0, &[3.0]);
        // argmax z·x − (x − 3)² − x²/2 → x = (z + 6)/3
        assert!((m.grad_conjugate(&[0.0]).unwrap()[0] - 2.0).abs() < 1e-15);
        assert_eq!(m.sigma(), 3.0);
    }

    #[test]
    fn entropy_accumulation_is_stationary() {
        let base = MirrorMap::entropy(FeasibleSet::simplex(3), 0.5).unwrap();
        let m = TimeVaryingMap::accumulation(base, 1.0)
            .unwrap()
            .with_anchor(2.0, &[0.6, 0.3, 0.1])
            .with_anchor(1.0, &[0.1, 0.1, 0.8]);
        let z = [0.4, -1.0, 0.3];
        for v in FeasibleSet::simplex(3).vertices().unwrap() {
            assert!(m.first_order_gap(&z, &v).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn max_value_on_box() {
        let m = MirrorMap::euclidean(FeasibleSet::cube(2, 1.0).unwrap(), vec![0.5, 0.0], 1.0).unwrap();
        assert!((m.max_value().unwrap() - 0.5 * (2.25 + 1.0)).abs() < 1e-15);
        assert!(matches!(euclid_rn(2).max_value(), Err(Error::UnboundedSet)));
    }
}
