//! Angular Fourier modes of vector fields on the unit disk:
//! `eta = A_0 / 2 + sum_j (A_j cos j theta + B_j sin j theta)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{e_r, e_t, Mat2, Vec2};
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussRule;

/// Composite Gauss-Legendre nodes on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialNodes {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialNodes {
    pub fn gauss(cells: usize, order: usize) -> Result<Self> {
        if cells == 0 || order == 0 {
            return Err(invalid("need at least one cell and one node per cell"));
        }
        let rule = GaussRule::new(order);
        let h = 1.0 / cells as f64;
        let mut radii = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for c in 0..cells {
            for (s, w) in rule.unit() {
                radii.push((c as f64 + s) * h);
                weights.push(w * h);
            }
        }
        Ok(Self { radii, weights })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Samples of a vector field and its radial derivative on `radii x thetas`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarVectorField {
    pub nodes: RadialNodes,
    pub n_theta: usize,
    /// Row-major over `(radius, theta)`.
    pub values: Vec<Vec2>,
    pub d_radial: Vec<Vec2>,
}

impl PolarVectorField {
    /// Samples `f(R, theta) -> (eta, eta_R)` at uniform angles `2 pi j / n_theta`.
    pub fn sample(nodes: RadialNodes, n_theta: usize, f: impl Fn(f64, f64) -> (Vec2, Vec2)) -> Self {
        let mut values = Vec::with_capacity(nodes.len() * n_theta);
        let mut d_radial = Vec::with_capacity(nodes.len() * n_theta);
        for &x in &nodes.radii {
            for j in 0..n_theta {
                let (v, d) = f(x, 2.0 * PI * j as f64 / n_theta as f64);
                values.push(v);
                d_radial.push(d);
            }
        }
        Self {
            nodes,
            n_theta,
            values,
            d_radial,
        }
    }
}

/// Radial coefficient profiles of a field: `a[j][i]` is `A_j(R_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskField {
    pub jmax: usize,
    pub nodes: RadialNodes,
    pub a: Vec<Vec<Vec2>>,
    pub b: Vec<Vec<Vec2>>,
    pub da: Vec<Vec<Vec2>>,
    pub db: Vec<Vec<Vec2>>,
}

impl DiskField {
    /// Field with all coefficients zero.
    pub fn zeros(jmax: usize, nodes: RadialNodes) -> Self {
        let z = vec![vec![Vec2::ZERO; nodes.len()]; jmax + 1];
        Self {
            jmax,
            nodes,
            a: z.clone(),
            b: z.clone(),
            da: z.clone(),
            db: z,
        }
    }

    /// Sets mode `j` from closures `R -> (A_j, A_j')` and `R -> (B_j, B_j')`.
    pub fn set_mode(&mut self, j: usize, fa: impl Fn(f64) -> (Vec2, Vec2), fb: impl Fn(f64) -> (Vec2, Vec2)) {
        for (i, &x) in self.nodes.radii.iter().enumerate() {
            let (a, da) = fa(x);
            self.a[j][i] = a;
            self.da[j][i] = da;
            if j > 0 {
                let (b, db) = fb(x);
                self.b[j][i] = b;
                self.db[j][i] = db;
            }
        }
    }

    /// `(eta, eta_R, eta_theta)` at node `i` and angle `theta`, restricted to `modes`.
    fn eval_modes(&self, i: usize, theta: f64, modes: impl Iterator<Item = usize>) -> (Vec2, Vec2, Vec2) {
        let mut v = Vec2::ZERO;
        let mut dr = Vec2::ZERO;
        let mut dt = Vec2::ZERO;
        for j in modes {
            if j == 0 {
                v = v + self.a[0][i] * 0.5;
                dr = dr + self.da[0][i] * 0.5;
                continue;
            }
            let jf = j as f64;
            let (s, c) = (jf * theta).sin_cos();
            v = v + self.a[j][i] * c + self.b[j][i] * s;
            dr = dr + self.da[j][i] * c + self.db[j][i] * s;
            dt = dt + self.b[j][i] * (jf * c) - self.a[j][i] * (jf * s);
        }
        (v, dr, dt)
    }

    /// `eta` at node `i` and angle `theta`.
    pub fn eval(&self, i: usize, theta: f64) -> Vec2 {
        self.eval_modes(i, theta, 0..=self.jmax).0
    }

    /// Samples the field on `n_theta` uniform angles.
    pub fn reconstruct(&self, n_theta: usize) -> PolarVectorField {
        let mut values = Vec::with_capacity(self.nodes.len() * n_theta);
        let mut d_radial = Vec::with_capacity(self.nodes.len() * n_theta);
        for i in 0..self.nodes.len() {
            for j in 0..n_theta {
                let (v, d, _) = self.eval_modes(i, 2.0 * PI * j as f64 / n_theta as f64, 0..=self.jmax);
                values.push(v);
                d_radial.push(d);
            }
        }
        PolarVectorField {
            nodes: self.nodes.clone(),
            n_theta,
            values,
            d_radial,
        }
    }

    fn has_nonzero(&self, j: usize) -> bool {
        let nz = |v: &Vec<Vec2>| v.iter().any(|x| *x != Vec2::ZERO);
        nz(&self.a[j]) || nz(&self.b[j]) || nz(&self.da[j]) || nz(&self.db[j])
    }

    /// Angular resolution used when integrating the field: enough to integrate
    /// products of modes up to `jmax` exactly.
    fn quad_theta(&self) -> usize {
        4 * self.jmax + 4
    }
}

/// Projects sampled fields onto modes `0..=jmax` with the trapezoid rule:
/// `A_j = (1/pi) integral of eta cos(j theta)`, `B_j = (1/pi) integral of eta sin(j theta)`.
pub fn decompose(samples: &PolarVectorField, jmax: usize) -> Result<DiskField> {
    let n_t = samples.n_theta;
    if 2 * jmax >= n_t {
        return Err(Error::AliasRisk { jmax, n_theta: n_t });
    }
    let mut out = DiskField::zeros(jmax, samples.nodes.clone());
    let w = 2.0 / n_t as f64;
    for i in 0..samples.nodes.len() {
        for j in 0..=jmax {
            let (mut a, mut b, mut da, mut db) = (Vec2::ZERO, Vec2::ZERO, Vec2::ZERO, Vec2::ZERO);
            for k in 0..n_t {
                let th = 2.0 * PI * k as f64 / n_t as f64;
                let (s, c) = (j as f64 * th).sin_cos();
                let v = samples.values[i * n_t + k];
                let d = samples.d_radial[i * n_t + k];
                a = a + v * c;
                b = b + v * s;
                da = da + d * c;
                db = db + d * s;
            }
            out.a[j][i] = a * w;
            out.da[j][i] = da * w;
            if j > 0 {
                out.b[j][i] = b * w;
                out.db[j][i] = db * w;
            }
        }
    }
    Ok(out)
}

/// `(integral of R^-2 |eta_theta|^2, integral of R^-2 |eta|^2)` over the disk.
pub fn weighted_norms(f: &DiskField) -> Result<(f64, f64)> {
    if f.has_nonzero(0) {
        return Err(invalid("weighted norms apply to fields without a zero mode"));
    }
    Ok(weighted_norms_of(f, 1..=f.jmax))
}

fn weighted_norms_of(f: &DiskField, modes: std::ops::RangeInclusive<usize>) -> (f64, f64) {
    let n_t = f.quad_theta();
    let dt = 2.0 * PI / n_t as f64;
    let (mut tn, mut pn) = (0.0, 0.0);
    for i in 0..f.nodes.len() {
        let x = f.nodes.radii[i];
        let w = f.nodes.weights[i] * dt / x;
        for k in 0..n_t {
            let (v, _, d) = f.eval_modes(i, k as f64 * dt, modes.clone());
            tn += w * d.norm_sq();
            pn += w * v.norm_sq();
        }
    }
    (tn, pn)
}

/// Per-mode `(j, plain_norm_j, theta_norm_j)` for `j >= 1`.
pub fn mode_table(f: &DiskField) -> Vec<(usize, f64, f64)> {
    (1..=f.jmax)
        .map(|j| {
            let (t, p) = weighted_norms_of(f, j..=j);
            (j, p, t)
        })
        .collect()
}

/// Zeroes modes `1..n`; the zero mode is kept when `keep_zero` is set.
pub fn strip_low_modes(f: &DiskField, n: usize, keep_zero: bool) -> DiskField {
    let mut out = f.clone();
    let zero = vec![Vec2::ZERO; f.nodes.len()];
    for j in 0..=f.jmax {
        let drop = if j == 0 { !keep_zero && n > 0 } else { j < n };
        if drop {
            out.a[j] = zero.clone();
            out.b[j] = zero.clone();
            out.da[j] = zero.clone();
            out.db[j] = zero.clone();
        }
    }
    out
}

/// Largest `|det grad eta_0|` for the zero mode `eta_0 = A_0(R) / 2`.
pub fn zero_mode_det_check(f: &DiskField) -> Result<f64> {
    if (1..=f.jmax).any(|j| f.has_nonzero(j)) {
        return Err(invalid("zero-mode check needs a field without modes j >= 1"));
    }
    let n_t = 64;
    let mut worst = 0.0f64;
    for i in 0..f.nodes.len() {
        for k in 0..n_t {
            let th = 2.0 * PI * k as f64 / n_t as f64;
            let g: Mat2 = (f.da[0][i] * 0.5).outer(e_r(th)) + Vec2::ZERO.outer(e_t(th));
            worst = worst.max(g.det().abs());
        }
    }
    Ok(worst)
}

/// Dirichlet energy of the whole field and the sum of per-mode Dirichlet energies.
pub fn parseval_gradient_check(f: &DiskField) -> (f64, f64) {
    let lhs = dirichlet_of(f, 0..=f.jmax);
    let rhs = (0..=f.jmax).map(|j| dirichlet_of(f, j..=j)).sum();
    (lhs, rhs)
}

fn dirichlet_of(f: &DiskField, modes: std::ops::RangeInclusive<usize>) -> f64 {
    let n_t = f.quad_theta();
    let dt = 2.0 * PI / n_t as f64;
    let mut total = 0.0;
    for i in 0..f.nodes.len() {
        let x = f.nodes.radii[i];
        for k in 0..n_t {
            let (_, dr, dth) = f.eval_modes(i, k as f64 * dt, modes.clone());
            total += f.nodes.weights[i] * dt * x * (dr.norm_sq() + dth.norm_sq() / (x * x));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nodes() -> RadialNodes {
        RadialNodes::gauss(16, 8).unwrap()
    }

    /// Random field with modes in `modes`, profiles `c R^j (1 + b R)` so that each mode is regular at 0.
    fn random_field(jmax: usize, modes: &[usize], seed: u64) -> DiskField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = DiskField::zeros(jmax, nodes());
        for &j in modes {
            let mut coef = || {
                let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let b: f64 = rng.gen_range(-0.5..0.5);
                (c, b)
            };
            let (ca, ba) = coef();
            let (cb, bb) = coef();
            let jf = j as f64;
            let prof = move |c: Vec2, b: f64| {
                move |x: f64| {
                    let v = x.powf(jf) * (1.0 + b * x);
                    let dv = if j == 0 {
                        b
                    } else {
                        jf * x.powf(jf - 1.0) * (1.0 + b * x) + b * x.powf(jf)
                    };
                    (c * v, c * dv)
                }
            };
            f.set_mode(j, prof(ca, ba), prof(cb, bb));
        }
        f
    }

    fn max_diff(a: &[Vec2], b: &[Vec2]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_cosine_mode() {
        let s = PolarVectorField::sample(nodes(), 32, |x, t| {
            (Vec2::new(x * (2.0 * t).cos(), 0.0), Vec2::new((2.0 * t).cos(), 0.0))
        });
        let f = decompose(&s, 6).unwrap();
        for (i, &x) in f.nodes.radii.iter().enumerate() {
            for j in 0..=6 {
                let want = if j == 2 { Vec2::new(x, 0.0) } else { Vec2::ZERO };
                assert!((f.a[j][i] - want).norm() < 1e-14);
                assert!(f.b[j][i].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn radial_field_keeps_only_zero_mode() {
        let s = PolarVectorField::sample(nodes(), 24, |x, _| {
            (Vec2::new(x * x, 1.0 - x), Vec2::new(2.0 * x, -1.0))
        });
        let f = decompose(&s, 5).unwrap();
        assert!((1..=5).all(|j| f.a[j].iter().chain(&f.b[j]).all(|v| v.norm() < 1e-14)));
        assert!((f.a[0][3] * 0.5 - Vec2::new(f.nodes.radii[3].powi(2), 1.0 - f.nodes.radii[3])).norm() < 1e-14);
    }

    #[test]
    fn round_trip() {
        for seed in 0..5 {
            let f = random_field(7, &[0, 1, 2, 3, 4, 5, 6, 7], seed);
            let s = f.reconstruct(40);
            let g = decompose(&s, 7).unwrap();
            let back = g.reconstruct(40);
            assert!(max_diff(&s.values, &back.values) < 1e-8);
            assert!(max_diff(&s.d_radial, &back.d_radial) < 1e-8);
        }
    }

    #[test]
    fn alias_risk_is_reported() {
        let s = PolarVectorField::sample(nodes(), 16, |_, _| (Vec2::ZERO, Vec2::ZERO));
        assert!(matches!(
            decompose(&s, 8),
            Err(Error::AliasRisk { jmax: 8, n_theta: 16 })
        ));
        assert!(decompose(&s, 7).is_ok());
    }

    #[test]
    fn per_mode_identity() {
        for j in 1..=8 {
            let f = random_field(8, &[j], 100 + j as u64);
            let (t, p) = weighted_norms(&f).unwrap();
            let jj = (j * j) as f64;
            assert!((t - jj * p).abs() < 1e-8 * (1.0 + t), "j={j}: {t} vs {}", jj * p);
            let table = mode_table(&f);
            assert!((table[j - 1].1 - p).abs() < 1e-12 * (1.0 + p));
        }
    }

    #[test]
    fn empty_field_has_zero_norms() {
        assert_eq!(weighted_norms(&DiskField::zeros(4, nodes())).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn weighted_norms_reject_zero_mode() {
        assert!(weighted_norms(&random_field(3, &[0, 2], 7)).is_err());
    }

    #[test]
    fn stripped_fields_obey_mode_floor() {
        for n in [1usize, 2, 3, 5] {
            for seed in 0..10 {
                let full = random_field(8, &[0, 1, 2, 3, 4, 5, 6, 7, 8], 1000 + seed);
                let f = strip_low_modes(&full, n, false);
                let (t, p) = weighted_norms(&f).unwrap();
                assert!(t >= (n * n) as f64 * p - 1e-8, "n={n}: {t} < {}", (n * n) as f64 * p);
            }
        }
    }

    #[test]
    fn strip_examples() {
        let f = random_field(5, &[0, 1, 2, 3, 4, 5], 3);
        let kept = strip_low_modes(&f, 0, true);
        assert_eq!(kept, f);
        let none = strip_low_modes(&f, 6, false);
        assert_eq!(none, DiskField::zeros(5, nodes()));
        let g = random_field(5, &[1, 3], 4);
        let only3 = strip_low_modes(&g, 2, false);
        assert!(!only3.has_nonzero(1) && only3.has_nonzero(3));
        assert_eq!(only3.a[3], g.a[3]);
        assert!(strip_low_modes(&f, 2, true).has_nonzero(0));
    }

    #[test]
    fn zero_mode_determinant_vanishes() {
        for seed in 0..5 {
            let f = strip_low_modes(&random_field(4, &[0, 1, 2, 3, 4], seed), 5, true);
            assert!(zero_mode_det_check(&f).unwrap() < 1e-10);
        }
        let mut c = DiskField::zeros(2, nodes());
        c.set_mode(0, |_| (Vec2::new(1.0, 2.0), Vec2::ZERO), |_| (Vec2::ZERO, Vec2::ZERO));
        assert_eq!(zero_mode_det_check(&c).unwrap(), 0.0);
        assert!(zero_mode_det_check(&random_field(2, &[0, 1], 9)).is_err());
    }

    #[test]
    fn parseval_examples() {
        let single = random_field(3, &[2], 5);
        let (l, r) = parseval_gradient_check(&single);
        assert!((l - r).abs() <= 1e-14 * l);
        let pair = random_field(6, &[1, 4], 6);
        let (l, r) = parseval_gradient_check(&pair);
        assert!((l - r).abs() < 1e-10 * l);
        for seed in 0..5 {
            let f = random_field(6, &[0, 1, 2, 5, 6], 50 + seed);
            let (l, r) = parseval_gradient_check(&f);
            assert!((l - r).abs() < 1e-6 * l, "{l} vs {r}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn theta_norm_dominates(seed in any::<u64>(), n in 1usize..6) {
            let f = strip_low_modes(&random_field(6, &[0, 1, 2, 3, 4, 5, 6], seed), n, false);
            let (t, p) = weighted_norms(&f).unwrap();
            prop_assert!(t >= p - 1e-8);
            prop_assert!(t >= (n * n) as f64 * p - 1e-8);
        }
    }
}
