//! Product quadrature on the sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.

use std::f64::consts::PI;

/// A chart point `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub theta: f64,
    pub phi: f64,
}

impl Node {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Node>,
    /// Weights for the chart measure `dθ dφ`.
    pub weights: Vec<f64>,
    pub degrees: (usize, usize),
}

impl QuadratureRule {
    /// `n_theta` Gauss–Legendre nodes in `cos θ` times `n_phi` azimuths
    /// offset by half a step from `φ = 0`.
    pub fn gauss_sphere(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 1 && n_phi >= 1);
        let (xs, ws) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in xs.iter().zip(&ws) {
            let theta = x.acos();
            let chart_w = w * dphi / theta.sin();
            for j in 0..n_phi {
                nodes.push(Node::new(theta, dphi * (j as f64 + 0.5)));
                weights.push(chart_w);
            }
        }
        Self { nodes, weights, degrees: (n_theta, n_phi) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{S²} f dA` for the round metric.
    pub fn integrate_sphere(&self, f: impl Fn(Node) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * n.theta.sin() * f(*n));
        }
        acc.total()
    }
}

/// Gauss–Legendre nodes (descending) and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = x;
        ws[i] = w;
        xs[n - 1 - i] = -x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}
