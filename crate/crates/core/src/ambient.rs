//! De Sitter space `dS³` in the chart `(ρ, θ, φ)` with metric
//! `−dρ² + cosh²ρ (dθ² + sin²θ dφ²)`, and in the pseudosphere model
//! `{x ∈ ℝ^{1,3} : −x₀² + x₁² + x₂² + x₃² = 1}`.
//!
//! Isometries live in the pseudosphere model as Lorentz matrices; chart
//! level actions always go through [`embed`] and [`unembed`].

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use thiserror::Error;

/// Chart points within this distance of a pole are rejected.
pub const POLE_GUARD: f64 = 1e-6;

/// Allowed violation of `⟨x, x⟩_η = 1` when leaving the pseudosphere model.
pub const SHELL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbientError {
    #[error("point is off the pseudosphere: <x,x> - 1 = {0:e}")]
    OffShell(f64),
    #[error("spatial part of the embedding vanishes (|x_spatial| = {0:e})")]
    PolarDegeneracy(f64),
    #[error("chart point θ = {0} is within the pole guard")]
    ChartPole(f64),
    #[error("direction must be a unit vector (|v| = {0})")]
    NotUnit(f64),
}

/// The Minkowski form `η = diag(−1, 1, 1, 1)`.
pub fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

pub fn minkowski(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Unit sphere direction for spherical angles.
pub fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Spherical angles `(θ, φ)` of a unit direction, with `φ ∈ (−π, π]`.
pub fn angles(omega: &Vector3<f64>) -> (f64, f64) {
    (omega[2].clamp(-1.0, 1.0).acos(), omega[1].atan2(omega[0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeSitterPoint {
    pub rho: f64,
    pub omega: Vector3<f64>,
}

impl DeSitterPoint {
    pub fn new(rho: f64, omega: Vector3<f64>) -> Result<Self, AmbientError> {
        let n = omega.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(AmbientError::NotUnit(n));
        }
        Ok(Self { rho, omega })
    }

    pub fn from_chart(rho: f64, theta: f64, phi: f64) -> Self {
        Self { rho, omega: direction(theta, phi) }
    }

    /// Chart coordinates `(ρ, θ, φ)`.
    pub fn chart(&self) -> [f64; 3] {
        let (t, p) = angles(&self.omega);
        [self.rho, t, p]
    }
}

/// `x = (sinh ρ, cosh ρ · ω)`.
pub fn embed(p: &DeSitterPoint) -> Vector4<f64> {
    let (s, c) = (p.rho.sinh(), p.rho.cosh());
    Vector4::new(s, c * p.omega[0], c * p.omega[1], c * p.omega[2])
}

pub fn unembed(x: &Vector4<f64>) -> Result<DeSitterPoint, AmbientError> {
    let shell = minkowski(x, x) - 1.0;
    if shell.abs() > SHELL_TOL {
        return Err(AmbientError::OffShell(shell));
    }
    let spatial = Vector3::new(x[1], x[2], x[3]);
    let r = spatial.norm();
    if r < 1e-12 {
        return Err(AmbientError::PolarDegeneracy(r));
    }
    Ok(DeSitterPoint { rho: x[0].asinh(), omega: spatial / r })
}

/// `φ̄(ρ) = cosh ρ`, the profile of `V = φ̄ ∂_ρ`.
pub fn phi(rho: f64) -> f64 {
    rho.cosh()
}

/// `Φ̄(ρ) = ∫₀^ρ φ̄ = sinh ρ`.
pub fn potential(rho: f64) -> f64 {
    rho.sinh()
}

/// `φ̄′(ρ) = sinh ρ`, equal to the potential itself.
pub fn phi_prime(rho: f64) -> f64 {
    rho.sinh()
}

/// Chart components of `V = cosh ρ ∂_ρ`.
pub fn v_field(rho: f64) -> [f64; 3] {
    [phi(rho), 0.0, 0.0]
}

/// Metric and Levi-Civita connection of the chart `(ρ, θ, φ)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientMetricJet {
    pub g_bar: Matrix3<f64>,
    /// `christoffels[a][b][c] = Γ^a_{bc}`.
    pub christoffels: [[[f64; 3]; 3]; 3],
}

pub fn metric_jet(p: &DeSitterPoint) -> Result<AmbientMetricJet, AmbientError> {
    let [rho, theta, _] = p.chart();
    chart_metric_jet(rho, theta)
}

/// [`metric_jet`] directly from chart coordinates.
pub fn chart_metric_jet(rho: f64, theta: f64) -> Result<AmbientMetricJet, AmbientError> {
    if !(POLE_GUARD..=std::f64::consts::PI - POLE_GUARD).contains(&theta) {
        return Err(AmbientError::ChartPole(theta));
    }
    let (sr, cr) = (rho.sinh(), rho.cosh());
    let (st, ct) = theta.sin_cos();
    let g_bar = Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, cr * cr, cr * cr * st * st));
    let mut gam = [[[0.0; 3]; 3]; 3];
    let tanh = sr / cr;
    gam[0][1][1] = cr * sr;
    gam[0][2][2] = cr * sr * st * st;
    gam[1][0][1] = tanh;
    gam[1][1][0] = tanh;
    gam[2][0][2] = tanh;
    gam[2][2][0] = tanh;
    gam[1][2][2] = -st * ct;
    gam[2][1][2] = ct / st;
    gam[2][2][1] = ct / st;
    Ok(AmbientMetricJet { g_bar, christoffels: gam })
}

impl AmbientMetricJet {
    pub fn inner(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += self.g_bar[(i, j)] * a[i] * b[j];
            }
        }
        acc
    }

    /// `∇̄_X V` in chart components.
    pub fn covariant_derivative_of_v(&self, rho: f64, x: &[f64; 3]) -> [f64; 3] {
        let v = v_field(rho);
        // ∂_a V^c is nonzero only for a = c = ρ.
        let mut out = [0.0; 3];
        out[0] += x[0] * rho.sinh();
        for (c, o) in out.iter_mut().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    *o += self.christoffels[c][a][b] * x[a] * v[b];
                }
            }
        }
        out
    }
}

/// `⟨∇̄_{e_i}V, e_j⟩ + ⟨∇̄_{e_j}V, e_i⟩ − 2 φ′ ḡ(e_i, e_j)`, computed from the
/// chart connection.
pub fn lie_derivative_residual(p: &DeSitterPoint, e_i: &[f64; 3], e_j: &[f64; 3]) -> Result<f64, AmbientError> {
    let jet = metric_jet(p)?;
    let di = jet.covariant_derivative_of_v(p.rho, e_i);
    let dj = jet.covariant_derivative_of_v(p.rho, e_j);
    Ok(jet.inner(&di, e_j) + jet.inner(&dj, e_i) - 2.0 * phi_prime(p.rho) * jet.inner(e_i, e_j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryKind {
    Identity,
    Rotation,
    Boost,
    EquatorReflection,
    Composite,
}

/// A Lorentz matrix acting on the pseudosphere model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientIsometry {
    pub lambda: Matrix4<f64>,
    pub kind: IsometryKind,
}

impl AmbientIsometry {
    pub fn identity() -> Self {
        Self { lambda: Matrix4::identity(), kind: IsometryKind::Identity }
    }

    /// Rotation of the spatial directions about `axis` by `angle` (right-hand rule).
    pub fn rotation(axis: Vector3<f64>, angle: f64) -> Result<Self, AmbientError> {
        let n = axis.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(AmbientError::NotUnit(n));
        }
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), angle);
        let mut lambda = Matrix4::identity();
        lambda.fixed_view_mut::<3, 3>(1, 1).copy_from(rot.matrix());
        Ok(Self { lambda, kind: IsometryKind::Rotation })
    }

    /// Boost with the given rapidity, mixing `x₀` with the spatial `axis`.
    pub fn boost(rapidity: f64, axis: Vector3<f64>) -> Result<Self, AmbientError> {
        let n = axis.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(AmbientError::NotUnit(n));
        }
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        let mut lambda = Matrix4::identity();
        lambda[(0, 0)] = ch;
        for i in 0..3 {
            lambda[(0, i + 1)] = sh * axis[i];
            lambda[(i + 1, 0)] = sh * axis[i];
            for j in 0..3 {
                lambda[(i + 1, j + 1)] += (ch - 1.0) * axis[i] * axis[j];
            }
        }
        Ok(Self { lambda, kind: IsometryKind::Boost })
    }

    /// The reflection `ρ ↦ −ρ` fixing the equator slice.
    pub fn reflect_equator() -> Self {
        Self {
            lambda: Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0)),
            kind: IsometryKind::EquatorReflection,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AmbientIsometry) -> Self {
        let kind = match (self.kind, other.kind) {
            (IsometryKind::Identity, k) | (k, IsometryKind::Identity) => k,
            _ => IsometryKind::Composite,
        };
        Self { lambda: self.lambda * other.lambda, kind }
    }

    pub fn inverse(&self) -> Self {
        let e = eta();
        Self { lambda: e * self.lambda.transpose() * e, kind: self.kind }
    }

    /// `max |λᵀ η λ − η|`.
    pub fn lorentz_defect(&self) -> f64 {
        let e = eta();
        (self.lambda.transpose() * e * self.lambda - e).abs().max()
    }

    pub fn preserves_time_orientation(&self) -> bool {
        self.lambda[(0, 0)] > 0.0
    }

    pub fn act(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.lambda * x
    }

    pub fn apply(&self, p: &DeSitterPoint) -> Result<DeSitterPoint, AmbientError> {
        unembed(&self.act(&embed(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn embed_examples() {
        let p = DeSitterPoint::new(0.0, Vector3::x()).unwrap();
        assert_eq!(embed(&p), Vector4::new(0.0, 1.0, 0.0, 0.0));
        let p = DeSitterPoint::from_chart(0.8, 1.1, -2.0);
        let x = embed(&p);
        assert_relative_eq!(minkowski(&x, &x), 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[0], 0.8f64.sinh(), epsilon = 1e-15);
    }

    #[test]
    fn unembed_examples() {
        let p = unembed(&Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(p.rho, 0.0);
        assert_eq!(p.omega, Vector3::x());
        let p = unembed(&Vector4::new(1f64.sinh(), 0.0, 0.0, 1f64.cosh())).unwrap();
        assert_relative_eq!(p.rho, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.omega, Vector3::z(), epsilon = 1e-14);
        let q = DeSitterPoint::from_chart(-0.4, 2.0, 0.3);
        let back = unembed(&embed(&q)).unwrap();
        assert_relative_eq!(back.rho, q.rho, epsilon = 1e-12);
        assert_relative_eq!(back.omega, q.omega, epsilon = 1e-12);
    }

    #[test]
    fn unembed_errors() {
        assert!(matches!(unembed(&Vector4::new(0.0, 2.0, 0.0, 0.0)), Err(AmbientError::OffShell(_))));
        // On the shell the spatial norm is at least 1, so degeneracy only
        // shows up off-shell; the shell check fires first.
        assert!(matches!(unembed(&Vector4::new(1.0, 0.0, 0.0, 0.0)), Err(AmbientError::OffShell(_))));
    }

    #[test]
    fn christoffel_examples() {
        let j = chart_metric_jet(1.0, 1.0).unwrap();
        // Closed forms from differentiating −dρ² + cosh²ρ σ by hand.
        assert_relative_eq!(j.christoffels[0][1][1], 1.813_430_203_923_509_4, epsilon = 1e-12);
        assert_relative_eq!(j.christoffels[1][0][1], 0.761_594_155_955_764_9, epsilon = 1e-12);
        let j0 = chart_metric_jet(0.0, 0.7).unwrap();
        for b in 0..3 {
            for c in 0..3 {
                assert_eq!(j0.christoffels[0][b][c], 0.0);
            }
        }
        assert!(matches!(chart_metric_jet(0.0, 1e-7), Err(AmbientError::ChartPole(_))));
        assert!(matches!(chart_metric_jet(0.0, PI - 1e-7), Err(AmbientError::ChartPole(_))));
    }

    fn fd_metric(rho: f64, theta: f64) -> Matrix3<f64> {
        chart_metric_jet(rho, theta).unwrap().g_bar
    }

    #[test]
    fn christoffels_match_finite_difference_metric() {
        // Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc), with ∂ by central
        // differences of the metric (no φ dependence).
        let (rho, theta) = (0.37, 1.2);
        let h = 1e-5;
        let dg = |k: usize| -> Matrix3<f64> {
            match k {
                0 => (fd_metric(rho + h, theta) - fd_metric(rho - h, theta)) / (2.0 * h),
                1 => (fd_metric(rho, theta + h) - fd_metric(rho, theta - h)) / (2.0 * h),
                _ => Matrix3::zeros(),
            }
        };
        let d = [dg(0), dg(1), dg(2)];
        let g = fd_metric(rho, theta);
        let gi = g.try_inverse().unwrap();
        let jet = chart_metric_jet(rho, theta).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let mut s = 0.0;
                    for dd in 0..3 {
                        s += 0.5 * gi[(a, dd)] * (d[b][(dd, c)] + d[c][(dd, b)] - d[dd][(b, c)]);
                    }
                    assert!((s - jet.christoffels[a][b][c]).abs() < 1e-6, "Γ^{a}_{b}{c}");
                }
            }
        }
    }

    #[test]
    fn lie_derivative_examples() {
        let p = DeSitterPoint::from_chart(0.9, 1.3, 0.2);
        let dr = [1.0, 0.0, 0.0];
        let dt = [0.0, 1.0, 0.0];
        assert!(lie_derivative_residual(&p, &dr, &dr).unwrap().abs() < 1e-14);
        assert!(lie_derivative_residual(&p, &dt, &dt).unwrap().abs() < 1e-14);
        assert!(lie_derivative_residual(&p, &dr, &dt).unwrap().abs() < 1e-14);
    }

    #[test]
    fn boost_examples() {
        let b = AmbientIsometry::boost(0.0, Vector3::x()).unwrap();
        assert_eq!(b.lambda, Matrix4::identity());
        let axis = Vector3::new(1.0, 2.0, -2.0) / 3.0;
        let b = AmbientIsometry::boost(0.7, axis).unwrap();
        let bi = AmbientIsometry::boost(-0.7, axis).unwrap();
        assert_relative_eq!(b.compose(&bi).lambda, Matrix4::identity(), epsilon = 1e-12);
        assert!(b.lorentz_defect() < 1e-12);
        let x = b.act(&Vector4::new(0.0, 1.0, 0.0, 0.0));
        assert_relative_eq!(minkowski(&x, &x), 1.0, epsilon = 1e-12);
        assert!(b.preserves_time_orientation());
        assert!(AmbientIsometry::boost(0.3, Vector3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn reflection_examples() {
        let r = AmbientIsometry::reflect_equator();
        let p = DeSitterPoint::from_chart(0.6, 0.9, 2.1);
        let q = r.apply(&p).unwrap();
        assert_relative_eq!(q.rho, -0.6, epsilon = 1e-15);
        assert_relative_eq!(q.omega, p.omega, epsilon = 1e-15);
        assert_eq!(r.compose(&r).lambda, Matrix4::identity());
        let e = DeSitterPoint::from_chart(0.0, 0.9, 2.1);
        assert_eq!(r.apply(&e).unwrap().rho, 0.0);
        assert!(!r.preserves_time_orientation());
    }

    #[test]
    fn apply_examples() {
        let p = DeSitterPoint::from_chart(0.25, 1.0, 0.5);
        let q = AmbientIsometry::identity().apply(&p).unwrap();
        assert_relative_eq!(q.omega, p.omega, epsilon = 1e-15);
        let rot = AmbientIsometry::rotation(Vector3::z(), PI / 2.0).unwrap();
        let q = rot.apply(&DeSitterPoint::new(0.4, Vector3::x()).unwrap()).unwrap();
        assert_relative_eq!(q.rho, 0.4, epsilon = 1e-15);
        assert_relative_eq!(q.omega, Vector3::y(), epsilon = 1e-15);
        let r = AmbientIsometry::reflect_equator();
        let q = r.apply(&r.apply(&p).unwrap()).unwrap();
        assert_relative_eq!(q.rho, p.rho, epsilon = 1e-15);
    }

    #[test]
    fn compositions_stay_lorentz() {
        let a = AmbientIsometry::boost(0.4, Vector3::y()).unwrap();
        let b = AmbientIsometry::rotation(Vector3::new(0.0, 0.6, 0.8), 1.1).unwrap();
        let c = AmbientIsometry::reflect_equator();
        let prod = a.compose(&b).compose(&c).compose(&a.inverse());
        assert!(prod.lorentz_defect() < 1e-12);
        assert_eq!(prod.kind, IsometryKind::Composite);
        assert_relative_eq!(a.compose(&a.inverse()).lambda, Matrix4::identity(), epsilon = 1e-12);
    }
}
