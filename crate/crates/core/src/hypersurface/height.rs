//! Height functions `ρ = y(ω)` over the sphere.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Vector3};

use super::SurfaceError;
use crate::ambient::AmbientIsometry;
use crate::jet::{Jet, Scalar};

/// One real spherical harmonic term `amplitude · Re Y_l^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTerm {
    pub amplitude: f64,
    pub l: u32,
    pub m: i32,
}

/// Closed-form height `y = ρ₀ + Σ ε_k Re Y_{l_k}^{m_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDescriptor {
    pub rho0: f64,
    pub terms: Vec<HarmonicTerm>,
}

impl SurfaceDescriptor {
    pub fn slice(rho0: f64) -> Self {
        Self { rho0, terms: Vec::new() }
    }

    pub fn perturbed_slice(rho0: f64, amplitude: f64, l: u32, m: i32) -> Self {
        Self::slice(rho0).with_term(amplitude, l, m)
    }

    pub fn with_term(mut self, amplitude: f64, l: u32, m: i32) -> Self {
        assert!(m.unsigned_abs() <= l, "harmonic order |m| must not exceed degree l");
        self.terms.push(HarmonicTerm { amplitude, l, m });
        self
    }

    pub fn negated(&self) -> Self {
        Self {
            rho0: -self.rho0,
            terms: self.terms.iter().map(|t| HarmonicTerm { amplitude: -t.amplitude, ..*t }).collect(),
        }
    }

    pub fn height<S: Scalar>(&self, omega: &[S; 3]) -> S {
        let mut y = S::cst(self.rho0);
        for t in &self.terms {
            y = y + real_harmonic(t.l, t.m, omega) * t.amplitude;
        }
        y
    }
}

/// `Re Y_l^m` (orthonormal, Condon–Shortley phase) as a polynomial in the
/// Cartesian components of a unit vector.
///
/// Uses `P_l^m(cos θ) cos(mφ) = (−1)^m Q_l^m(z) Re (x + i y)^m` where
/// `Q_l^m = d^m P_l / dz^m`.
pub fn real_harmonic<S: Scalar>(l: u32, m: i32, omega: &[S; 3]) -> S {
    let ma = m.unsigned_abs();
    assert!(ma <= l);
    let [x, y, z] = *omega;

    // Q_m^m = (2m−1)!!, Q_{m+1}^m = (2m+1) z Q_m^m, then the Bonnet-type recurrence.
    let mut dfact = 1.0;
    for k in 1..=ma {
        dfact *= (2 * k - 1) as f64;
    }
    let mut q_prev = S::cst(dfact);
    let q = if l == ma {
        q_prev
    } else {
        let mut q_cur = z * (dfact * (2 * ma + 1) as f64);
        for ll in (ma + 2)..=l {
            let next = (z * q_cur * (2 * ll - 1) as f64 - q_prev * (ll + ma - 1) as f64) / (ll - ma) as f64;
            q_prev = q_cur;
            q_cur = next;
        }
        q_cur
    };

    let (mut re, mut im) = (S::cst(1.0), S::cst(0.0));
    for _ in 0..ma {
        let nr = re * x - im * y;
        let ni = re * y + im * x;
        re = nr;
        im = ni;
    }

    let mut ratio = 1.0;
    for k in (l - ma + 1)..=(l + ma) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    // Re Y_l^{−m} = (−1)^m Re Y_l^m, which cancels the Condon–Shortley sign.
    let sign = if m < 0 || ma.is_multiple_of(2) { 1.0 } else { -1.0 };
    q * re * (norm * sign)
}

/// A rotated spherical chart: `ω(u, v) = R · (sin u cos v, sin u sin v, cos u)`.
///
/// The round metric reads `du² + sin²u dv²` in every such chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    rot: Matrix3<f64>,
}

impl Chart {
    pub fn standard() -> Self {
        Self { rot: Matrix3::identity() }
    }

    /// A chart whose point `(u, v) = (π/2, 0)` is the direction `omega`.
    pub fn centered_on(omega: &Vector3<f64>) -> Self {
        let a = omega.normalize();
        let helper = if a[2].abs() < 0.9 { Vector3::z() } else { Vector3::x() };
        let b = helper.cross(&a).normalize();
        let c = a.cross(&b);
        Self { rot: Matrix3::from_columns(&[a, b, c]) }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rot
    }

    pub fn is_standard(&self) -> bool {
        self.rot == Matrix3::identity()
    }

    pub fn direction_generic<S: Scalar>(&self, u: S, v: S) -> [S; 3] {
        let (su, cu) = (u.sin(), u.cos());
        let local = [su * v.cos(), su * v.sin(), cu];
        let r = &self.rot;
        let mut out = [S::cst(0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = local[0] * r[(i, 0)] + local[1] * r[(i, 1)] + local[2] * r[(i, 2)];
        }
        out
    }

    pub fn direction(&self, u: f64, v: f64) -> Vector3<f64> {
        let d = self.direction_generic(u, v);
        Vector3::new(d[0], d[1], d[2])
    }

    /// Chart coordinates of a jet-valued unit direction.
    pub fn coordinates_of(&self, omega: &[Jet; 3]) -> (Jet, Jet) {
        let r = &self.rot;
        let mut local = [Jet::constant(0.0); 3];
        for (i, l) in local.iter_mut().enumerate() {
            *l = omega[0] * r[(0, i)] + omega[1] * r[(1, i)] + omega[2] * r[(2, i)];
        }
        (local[2].acos(), Jet::atan2(local[1], local[0]))
    }
}

/// Bracket for the radial root search when regraphing.
pub const REGRAPH_RHO_MAX: f64 = 3.0;
const REGRAPH_SCAN_STEPS: usize = 120;
const REGRAPH_BISECT_TOL: f64 = 1e-12;

/// Height of the image of an analytic graph under an ambient isometry, as a
/// graph over the sphere again.
#[derive(Debug, Clone, PartialEq)]
pub struct Regraphed {
    pub base: SurfaceDescriptor,
    pub iso: AmbientIsometry,
    inverse: Matrix4<f64>,
}

impl Regraphed {
    pub fn new(base: SurfaceDescriptor, iso: AmbientIsometry) -> Self {
        let inverse = iso.inverse().lambda;
        Self { base, iso, inverse }
    }

    /// `asinh(x₀) − y_base(x̂)` for `x = Λ⁻¹ (sinh ρ, cosh ρ ω)`: zero exactly
    /// when `(ρ, ω)` lies on the image surface.
    fn residual<S: Scalar>(&self, rho: S, omega: &[S; 3]) -> S {
        let (s, c) = (rho.sinh(), rho.cosh());
        let x = [s, c * omega[0], c * omega[1], c * omega[2]];
        let m = &self.inverse;
        let mut y = [S::cst(0.0); 4];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[0] * m[(i, 0)] + x[1] * m[(i, 1)] + x[2] * m[(i, 2)] + x[3] * m[(i, 3)];
        }
        let r = (y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt();
        let dir = [y[1] / r, y[2] / r, y[3] / r];
        y[0].asinh() - self.base.height(&dir)
    }

    /// Unique root of the radial residual along `omega`.
    pub fn height_value(&self, omega: &Vector3<f64>) -> Result<f64, SurfaceError> {
        let om = [omega[0], omega[1], omega[2]];
        let step = 2.0 * REGRAPH_RHO_MAX / REGRAPH_SCAN_STEPS as f64;
        let mut roots = 0usize;
        let mut bracket = None;
        let mut prev_rho = -REGRAPH_RHO_MAX;
        let mut prev = self.residual(prev_rho, &om);
        for k in 1..=REGRAPH_SCAN_STEPS {
            let rho = -REGRAPH_RHO_MAX + step * k as f64;
            let cur = self.residual(rho, &om);
            if prev == 0.0 || prev.signum() != cur.signum() && cur != 0.0 {
                roots += 1;
                bracket = Some((prev_rho, rho, prev));
            }
            prev = cur;
            prev_rho = rho;
        }
        if prev == 0.0 {
            roots += 1;
            bracket = Some((prev_rho, prev_rho, 0.0));
        }
        let Some((mut lo, mut hi, f_lo)) = bracket.filter(|_| roots == 1) else {
            return Err(SurfaceError::NotAGraph { direction: *omega, roots });
        };
        if f_lo == 0.0 {
            hi = lo;
        }
        while hi - lo > REGRAPH_BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            let f = self.residual(mid, &om);
            if f == 0.0 {
                lo = mid;
                hi = mid;
            } else if f.signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut rho = 0.5 * (lo + hi);
        // Newton polish with the exact radial derivative.
        for _ in 0..2 {
            let cst = om.map(Jet::constant);
            let r = self.residual(Jet::var_u(rho), &cst);
            let slope = r.partial(1, 0);
            if slope == 0.0 {
                break;
            }
            rho -= r.value() / slope;
        }
        Ok(rho)
    }

    /// Height jet in a chart, by implicit differentiation of the radial
    /// residual: each fixed-point sweep fixes one more Taylor order.
    pub fn height_jet(&self, chart: &Chart, u: f64, v: f64) -> Result<Jet, SurfaceError> {
        let omega = chart.direction_generic(Jet::var_u(u), Jet::var_v(v));
        let base_dir = Vector3::new(omega[0].value(), omega[1].value(), omega[2].value());
        let rho0 = self.height_value(&base_dir)?;
        let cst = base_dir.map(Jet::constant);
        let slope = self.residual(Jet::var_u(rho0), &[cst[0], cst[1], cst[2]]).partial(1, 0);
        let mut rho = Jet::constant(rho0);
        for _ in 0..=crate::jet::ORDER + 1 {
            rho = rho - self.residual(rho, &omega) / slope;
        }
        Ok(rho)
    }
}

/// Height samples on the grid `θ_i = π(i + ½)/N_θ`, `φ_j = 2πj/N_φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    n_theta: usize,
    n_phi: usize,
    samples: Vec<f64>,
}

impl SampledGrid {
    pub fn new(n_theta: usize, n_phi: usize, samples: Vec<f64>) -> Result<Self, SurfaceError> {
        if n_theta < 4 || n_phi < 4 || !n_phi.is_multiple_of(2) {
            return Err(SurfaceError::BadGrid(format!("need n_theta >= 4 and even n_phi >= 4, got {n_theta}x{n_phi}")));
        }
        if samples.len() != n_theta * n_phi {
            return Err(SurfaceError::BadGrid(format!("expected {} samples, got {}", n_theta * n_phi, samples.len())));
        }
        if let Some(k) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SurfaceError::BadGrid(format!("sample {k} is not finite")));
        }
        Ok(Self { n_theta, n_phi, samples })
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn theta(&self, i: isize) -> f64 {
        PI * (i as f64 + 0.5) / self.n_theta as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    pub fn spacing(&self) -> (f64, f64) {
        (PI / self.n_theta as f64, 2.0 * PI / self.n_phi as f64)
    }

    /// Sample at an extended row index; rows past either pole are read
    /// across it, using `y(−θ, φ) = y(θ, φ + π)`.
    pub fn sample_ext(&self, i: isize, j: isize) -> f64 {
        let n = self.n_theta as isize;
        let np = self.n_phi as isize;
        let (row, shift) = if i < 0 {
            (-1 - i, np / 2)
        } else if i >= n {
            (2 * n - 1 - i, np / 2)
        } else {
            (i, 0)
        };
        let col = (j + shift).rem_euclid(np);
        self.samples[row as usize * self.n_phi + col as usize]
    }

    /// Grid index of a chart point, if it is a node.
    pub fn locate(&self, theta: f64, phi: f64) -> Option<(usize, usize)> {
        let (dt, dp) = self.spacing();
        let fi = theta / dt - 0.5;
        let i = fi.round();
        let fj = phi.rem_euclid(2.0 * PI) / dp;
        let j = fj.round();
        if (fi - i).abs() > 1e-9 || (fj - j).abs() > 1e-9 || i < 0.0 || i >= self.n_theta as f64 {
            return None;
        }
        Some((i as usize, (j as usize) % self.n_phi))
    }
}
