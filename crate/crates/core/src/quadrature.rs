//! Grids, Gauss-Legendre rules and cubic Hermite reconstruction.

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        // Store on [0, 1] for cheap mapping.
        Self {
            nodes: x.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
        }
    }

    /// Nodes and weights on `[0, 1]`.
    pub fn unit(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = b - a;
        self.unit().map(|(x, w)| w * f(a + h * x)).sum::<f64>() * h
    }
}

/// Geometric grid of `n` radii from `eps0` to 1.
pub fn log_grid(eps0: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && eps0 > 0.0 && eps0 < 1.0);
    let l0 = eps0.ln();
    let mut g: Vec<f64> = (0..n).map(|i| (l0 * (1.0 - i as f64 / (n - 1) as f64)).exp()).collect();
    g[0] = eps0;
    g[n - 1] = 1.0;
    g
}

/// Cubic Hermite basis on the unit interval: values and `d/ds`.
#[derive(Debug, Clone, Copy)]
pub struct HermiteBasis {
    pub h00: f64,
    pub h10: f64,
    pub h01: f64,
    pub h11: f64,
    pub d00: f64,
    pub d10: f64,
    pub d01: f64,
    pub d11: f64,
}

impl HermiteBasis {
    pub fn at(s: f64) -> Self {
        let s2 = s * s;
        let s3 = s2 * s;
        Self {
            h00: 2.0 * s3 - 3.0 * s2 + 1.0,
            h10: s3 - 2.0 * s2 + s,
            h01: -2.0 * s3 + 3.0 * s2,
            h11: s3 - s2,
            d00: 6.0 * s2 - 6.0 * s,
            d10: 3.0 * s2 - 4.0 * s + 1.0,
            d01: -6.0 * s2 + 6.0 * s,
            d11: 3.0 * s2 - 2.0 * s,
        }
    }

    /// Value and derivative of the cubic through `(y0, m0)`, `(y1, m1)` on a cell of width `h`.
    pub fn eval(&self, h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> (f64, f64) {
        let v = self.h00 * y0 + self.h10 * h * m0 + self.h01 * y1 + self.h11 * h * m1;
        let d = (self.d00 * y0 + self.d01 * y1) / h + self.d10 * m0 + self.d11 * m1;
        (v, d)
    }
}

/// Hermite interpolation of `(x_i, y_i, y'_i)` at `x`; clamps outside the grid.
pub fn hermite_interp(xs: &[f64], ys: &[f64], dys: &[f64], x: f64) -> (f64, f64) {
    let n = xs.len();
    if x <= xs[0] {
        return (ys[0], dys[0]);
    }
    if x >= xs[n - 1] {
        return (ys[n - 1], dys[n - 1]);
    }
    let i = xs.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
    let h = xs[i + 1] - xs[i];
    HermiteBasis::at((x - xs[i]) / h).eval(h, ys[i], dys[i], ys[i + 1], dys[i + 1])
}

/// Second-order three-point derivative weights at each node of a nonuniform grid.
///
/// Row `i` holds `(offset, [w0, w1, w2])` with `y'_i ~ sum_k w_k y_{offset + k}`.
pub fn three_point_weights(xs: &[f64]) -> Vec<(usize, [f64; 3])> {
    let n = xs.len();
    assert!(n >= 3);
    (0..n)
        .map(|i| {
            let off = i.saturating_sub(1).min(n - 3);
            let (x0, x1, x2) = (xs[off], xs[off + 1], xs[off + 2]);
            let x = xs[i];
            // Derivative of the Lagrange basis through x0, x1, x2 evaluated at x.
            let w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
            let w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
            let w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
            (off, [w0, w1, w2])
        })
        .collect()
}

/// Three-point derivative of `ys` on the grid `xs`.
pub fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    three_point_weights(xs)
        .iter()
        .map(|(off, w)| w[0] * ys[*off] + w[1] * ys[off + 1] + w[2] * ys[off + 2])
        .collect()
}

/// Central difference weights of order 6 for the first derivative on a uniform grid.
const C6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Sixth-order first derivative of periodic samples with spacing `h`.
pub fn periodic_derivative(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (k, c) in C6.iter().enumerate() {
                let k = k + 1;
                acc += c * (ys[(j + k) % n] - ys[(j + n * k - k) % n]);
            }
            acc / h
        })
        .collect()
}

/// High-order first derivative on a uniform grid: sixth-order central
/// differences inside, one-sided seven-point stencils at the ends.
pub fn uniform_derivative(ys: &[f64], h: f64) -> Vec<f64> {
    // One-sided sixth-order stencil for y'(x_0) from y_0..y_6.
    const ONE_SIDED: [[f64; 7]; 3] = [
        [
            -49.0 / 20.0,
            6.0,
            -15.0 / 2.0,
            20.0 / 3.0,
            -15.0 / 4.0,
            6.0 / 5.0,
            -1.0 / 6.0,
        ],
        [
            -1.0 / 6.0,
            -77.0 / 60.0,
            5.0 / 2.0,
            -5.0 / 3.0,
            5.0 / 6.0,
            -1.0 / 4.0,
            1.0 / 30.0,
        ],
        [
            1.0 / 30.0,
            -2.0 / 5.0,
            -7.0 / 12.0,
            4.0 / 3.0,
            -1.0 / 2.0,
            2.0 / 15.0,
            -1.0 / 60.0,
        ],
    ];
    let n = ys.len();
    if n < 7 {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        return derivative(&xs, ys);
    }
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        *o = if i < 3 {
            ONE_SIDED[i].iter().enumerate().map(|(k, c)| c * ys[k]).sum::<f64>() / h
        } else if i + 3 >= n {
            let m = n - 1 - i;
            -ONE_SIDED[m]
                .iter()
                .enumerate()
                .map(|(k, c)| c * ys[n - 1 - k])
                .sum::<f64>()
                / h
        } else {
            C6.iter()
                .enumerate()
                .map(|(k, c)| c * (ys[i + k + 1] - ys[i - k - 1]))
                .sum::<f64>()
                / h
        };
    }
    out
}

/// Returns the constant spacing of `ln xs` when the grid is geometric.
pub fn geometric_step(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 || xs[0] <= 0.0 {
        return None;
    }
    let h = (xs[1] / xs[0]).ln();
    let ok = xs
        .windows(2)
        .all(|w| ((w[1] / w[0]).ln() - h).abs() <= 1e-9 * h.abs().max(1e-300));
    ok.then_some(h)
}

/// `ceil` that ignores rounding noise just above an integer.
pub fn ceil_tol(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let c = (x - 1e-12 * x.max(1.0)).ceil();
    c.max(0.0) as u64
}
