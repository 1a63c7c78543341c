//! Small dense vector helpers. Vectors are plain `Vec<f64>` / `&[f64]`.

pub type Vector = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// `(wa * a + wb * b) / denom`, written so that a convex combination of
/// identical points returns that point exactly.
pub fn mix(wa: f64, a: &[f64], wb: f64, b: &[f64], denom: f64) -> Vector {
    a.iter()
        .zip(b)
        .map(|(x, y)| (wa * x + wb * y) / denom)
        .collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vector {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn matvec_t(m: &[Vec<f64>], x: &[f64]) -> Vector {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![0.0; cols];
    for (row, xi) in m.iter().zip(x) {
        axpy(&mut out, *xi, row);
    }
    out
}

pub fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn ksum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = KahanSum::new();
    for x in xs {
        s.add(x);
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        let mut s = KahanSum::new();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn mix_of_equal_points_is_exact() {
        let p = [0.1, 0.7];
        assert_eq!(mix(3.0, &p, 7.0, &p, 10.0), p.to_vec());
    }
}
