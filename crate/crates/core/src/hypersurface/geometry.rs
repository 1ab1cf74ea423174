//! Pointwise geometry of a spacelike graph `ρ = y(u, v)` in a spherical chart.
//!
//! Chart formulas are written once over [`Scalar`] so they can be evaluated on
//! plain numbers or on Taylor jets.

use super::SurfaceError;
use crate::jet::{Jet, Scalar};
use crate::symfun::{self, SymOperator};

pub type Mat2 = [[f64; 2]; 2];

/// Squared round-sphere norm of `dy`.
pub fn sphere_grad_sq<S: Scalar>(u: S, dy: [S; 2]) -> S {
    let su = u.sin();
    dy[0] * dy[0] + dy[1] * dy[1] / (su * su)
}

/// `g_ij = −y_i y_j + cosh²y σ_ij`.
pub fn induced_metric<S: Scalar>(u: S, y: S, dy: [S; 2]) -> [[S; 2]; 2] {
    let c = y.cosh();
    let c2 = c * c;
    let su = u.sin();
    let off = -(dy[0] * dy[1]);
    [[c2 - dy[0] * dy[0], off], [off, c2 * su * su - dy[1] * dy[1]]]
}

/// Second fundamental form against the future unit normal.
pub fn second_fundamental_form<S: Scalar>(u: S, y: S, dy: [S; 2], ddy: [[S; 2]; 2]) -> [[S; 2]; 2] {
    let (su, cu) = (u.sin(), u.cos());
    let (c, s) = (y.cosh(), y.sinh());
    let t = s / c;
    let lam = (S::cst(1.0) - sphere_grad_sq(u, dy) / (c * c)).sqrt();
    // Round-sphere Hessian of y.
    let hs = [[ddy[0][0], ddy[0][1] - cu / su * dy[1]], [ddy[1][0] - cu / su * dy[1], ddy[1][1] + su * cu * dy[0]]];
    let sigma = [[S::cst(1.0), S::cst(0.0)], [S::cst(0.0), su * su]];
    let mut h = [[S::cst(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            h[i][j] = (hs[i][j] + c * s * sigma[i][j] - t * dy[i] * dy[j] * 2.0) / lam;
        }
    }
    h
}

fn inverse2<S: Scalar>(g: &[[S; 2]; 2]) -> [[S; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

/// Shape operator `W^i_j = g^{ik} h_kj`.
pub fn mixed_weingarten<S: Scalar>(g: &[[S; 2]; 2], h: &[[S; 2]; 2]) -> [[S; 2]; 2] {
    let gi = inverse2(g);
    let mut w = [[S::cst(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            w[i][j] = gi[i][0] * h[0][j] + gi[i][1] * h[1][j];
        }
    }
    w
}

/// Derivative data at one point: everything the geometry core needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalJet {
    pub u: f64,
    pub y: f64,
    pub dy: [f64; 2],
    pub ddy: Mat2,
    /// `g_d[k][i][j] = ∂_k g_ij`.
    pub g_d: [Mat2; 2],
    /// `g_dd[k][l][i][j] = ∂_k ∂_l g_ij`.
    pub g_dd: [[Mat2; 2]; 2],
    pub phi_d: [f64; 2],
    pub phi_dd: Mat2,
    /// `w_d[k][i][j] = ∂_k W^i_j`.
    pub w_d: [Mat2; 2],
}

fn partial_of(j: &Jet, idx: &[usize]) -> f64 {
    let a = idx.iter().filter(|&&k| k == 0).count();
    j.partial(a, idx.len() - a)
}

impl LocalJet {
    /// From a third-order height jet at chart point `(u, ·)`.
    pub fn from_height_jet(u: f64, y: &Jet) -> Self {
        let uj = Jet::var_u(u);
        let dy = [y.d(0), y.d(1)];
        let ddy = [[dy[0].d(0), dy[0].d(1)], [dy[1].d(0), dy[1].d(1)]];
        let g = induced_metric(uj, *y, dy);
        let h = second_fundamental_form(uj, *y, dy, ddy);
        let w = mixed_weingarten(&g, &h);
        let phi = y.sinh();

        let mut out = LocalJet {
            u,
            y: y.value(),
            dy: y.gradient(),
            ddy: y.hessian(),
            g_d: [[[0.0; 2]; 2]; 2],
            g_dd: [[[[0.0; 2]; 2]; 2]; 2],
            phi_d: phi.gradient(),
            phi_dd: phi.hessian(),
            w_d: [[[0.0; 2]; 2]; 2],
        };
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out.g_d[k][i][j] = partial_of(&g[i][j], &[k]);
                    out.w_d[k][i][j] = partial_of(&w[i][j], &[k]);
                    for l in 0..2 {
                        out.g_dd[k][l][i][j] = partial_of(&g[i][j], &[k, l]);
                    }
                }
            }
        }
        out
    }
}

/// Second derivatives of a scalar function on the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarJet2 {
    pub value: f64,
    pub d: [f64; 2],
    pub dd: Mat2,
}

impl ScalarJet2 {
    pub fn from_jet(j: &Jet) -> Self {
        Self { value: j.value(), d: j.gradient(), dd: j.hessian() }
    }
}

/// Geometry of the surface at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGeometry {
    pub u: f64,
    pub rho: f64,
    pub dy: [f64; 2],
    pub metric: Mat2,
    pub metric_inv: Mat2,
    pub det_g: f64,
    /// `cosh²y − |dy|²_σ`; positive exactly on spacelike points.
    pub spacelike_margin: f64,
    pub lambda: f64,
    /// Future unit normal, chart components `(ρ, u, v)`.
    pub normal: [f64; 3],
    /// `⟨V, ν⟩ = −cosh y / λ`.
    pub support: f64,
    pub second_form: Mat2,
    /// Mixed chart components `W^i_j`.
    pub weingarten: Mat2,
    /// Columns are a g-orthonormal frame in chart components.
    pub frame: Mat2,
    pub w_frame: SymOperator,
    /// Antisymmetric part of `E⁻¹ W E` before symmetrizing.
    pub w_frame_asym: f64,
    /// `christoffels[k][i][j] = Γ^k_ij` of the induced metric.
    pub christoffels: [Mat2; 2],
    pub potential: ScalarJet2,
    /// Hessian of `Φ = sinh ρ` in the frame, taken against `V` (sign-flipped
    /// relative to `∇dΦ`).
    pub hess_phi: Mat2,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gauss_curvature: f64,
    /// g-norm of the divergence of `σ₁ I − W`.
    pub newton_divergence: f64,
}

impl PointGeometry {
    pub fn from_local(lj: &LocalJet) -> Result<Self, SurfaceError> {
        let LocalJet { u, y, dy, ddy, .. } = *lj;
        let su = u.sin();
        let (c, s) = (y.cosh(), y.sinh());
        let grad2 = sphere_grad_sq(u, dy);
        let margin = c * c - grad2;
        let g = induced_metric(u, y, dy);
        let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        // Timelike-normal criterion and positivity of the induced metric.
        let spacelike = margin > 0.0 && det_g > 0.0 && g[0][0] > 0.0;
        if !spacelike || !margin.is_finite() {
            return Err(SurfaceError::NonSpacelike { u, margin });
        }
        let lambda = (margin / (c * c)).sqrt();
        let gi = inverse2(&g);
        let h = second_fundamental_form(u, y, dy, ddy);
        let w = mixed_weingarten(&g, &h);
        let normal = [1.0 / lambda, dy[0] / (c * c * lambda), dy[1] / (c * c * su * su * lambda)];
        let support = -c / lambda;

        let n2 = (det_g / g[0][0]).sqrt();
        let e = [[1.0 / g[0][0].sqrt(), -g[0][1] / (g[0][0] * n2)], [0.0, 1.0 / n2]];
        let h_frame = congruence(&e, &h);
        // E⁻¹ W E, for the symmetry check.
        let einv = inverse2(&e);
        let we = mul(&w, &e);
        let wf = mul(&einv, &we);
        let w_frame_asym = (wf[0][1] - wf[1][0]).abs();
        let w_frame = SymOperator::from_2x2(h_frame)?;

        let christoffels = christoffels(&gi, &lj.g_d);
        let potential = ScalarJet2 { value: s, d: lj.phi_d, dd: lj.phi_dd };

        let mut pg = PointGeometry {
            u,
            rho: y,
            dy,
            metric: g,
            metric_inv: gi,
            det_g,
            spacelike_margin: margin,
            lambda,
            normal,
            support,
            second_form: h,
            weingarten: w,
            frame: e,
            sigma1: symfun::sigma1(&w_frame),
            sigma2: symfun::sigma2(&w_frame),
            w_frame,
            w_frame_asym,
            christoffels,
            potential,
            hess_phi: [[0.0; 2]; 2],
            gauss_curvature: 0.0,
            newton_divergence: 0.0,
        };
        pg.hess_phi = pg.potential_hessian(&potential);
        pg.gauss_curvature = gauss_curvature(&g, &gi, &christoffels, &lj.g_d, &lj.g_dd);
        pg.newton_divergence = newton_divergence(&gi, &christoffels, &w, &lj.w_d);
        Ok(pg)
    }

    /// Frame components of `−∇dF` for a function `F` on the surface.
    pub fn potential_hessian(&self, f: &ScalarJet2) -> Mat2 {
        let mut hc = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let conn = self.christoffels[0][i][j] * f.d[0] + self.christoffels[1][i][j] * f.d[1];
                hc[i][j] = -(f.dd[i][j] - conn);
            }
        }
        let mut out = congruence(&self.frame, &hc);
        let sym = 0.5 * (out[0][1] + out[1][0]);
        out[0][1] = sym;
        out[1][0] = sym;
        out
    }

    /// `φ′ δ + W ⟨V, ν⟩` in the frame.
    pub fn pre_integral_rhs(&self) -> Mat2 {
        let phi_p = self.rho.sinh();
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                let id = if i == j { phi_p } else { 0.0 };
                *o = id + self.w_frame.get(i, j) * self.support;
            }
        }
        out
    }

    /// Largest entry of `Hess Φ − (φ′ g + h ⟨V, ν⟩)` in the frame.
    pub fn pre_integral_residual(&self) -> f64 {
        let rhs = self.pre_integral_rhs();
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((self.hess_phi[i][j] - rhs[i][j]).abs());
            }
        }
        r
    }

    /// Tangent frame vectors pushed into the ambient chart `(ρ, u, v)`.
    pub fn ambient_frame(&self) -> [[f64; 3]; 2] {
        let mut out = [[0.0; 3]; 2];
        for (a, o) in out.iter_mut().enumerate() {
            let eu = self.frame[0][a];
            let ev = self.frame[1][a];
            *o = [self.dy[0] * eu + self.dy[1] * ev, eu, ev];
        }
        out
    }

    /// Pull back a chart bilinear form into the frame.
    pub fn to_frame(&self, b: &Mat2) -> Mat2 {
        congruence(&self.frame, b)
    }

    /// Chart components to the standard volume weight `√det g`.
    pub fn area_density(&self) -> f64 {
        self.det_g.sqrt()
    }
}

pub(crate) fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `Aᵀ B A`.
pub(crate) fn congruence(a: &Mat2, b: &Mat2) -> Mat2 {
    let ba = mul(b, a);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[0][i] * ba[0][j] + a[1][i] * ba[1][j];
        }
    }
    out
}

fn lowered_christoffels(g_d: &[Mat2; 2]) -> [Mat2; 2] {
    let mut low = [[[0.0; 2]; 2]; 2];
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                low[l][i][j] = 0.5 * (g_d[i][j][l] + g_d[j][i][l] - g_d[l][i][j]);
            }
        }
    }
    low
}

fn christoffels(gi: &Mat2, g_d: &[Mat2; 2]) -> [Mat2; 2] {
    let low = lowered_christoffels(g_d);
    let mut gam = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                gam[k][i][j] = gi[k][0] * low[0][i][j] + gi[k][1] * low[1][i][j];
            }
        }
    }
    gam
}

/// Intrinsic curvature from the Riemann tensor of `g`.
fn gauss_curvature(g: &Mat2, gi: &Mat2, gam: &[Mat2; 2], g_d: &[Mat2; 2], g_dd: &[[Mat2; 2]; 2]) -> f64 {
    let low = lowered_christoffels(g_d);
    // ∂_m Γ_lij and ∂_m g^{kl}.
    let mut dlow = [[[[0.0; 2]; 2]; 2]; 2];
    let mut dgi = [[[0.0; 2]; 2]; 2];
    for m in 0..2 {
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    dlow[m][l][i][j] = 0.5 * (g_dd[m][i][j][l] + g_dd[m][j][i][l] - g_dd[m][l][i][j]);
                }
            }
        }
        for k in 0..2 {
            for l in 0..2 {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc -= gi[k][a] * g_d[m][a][b] * gi[b][l];
                    }
                }
                dgi[m][k][l] = acc;
            }
        }
    }
    // dgam[m][k][i][j] = ∂_m Γ^k_ij.
    let mut dgam = [[[[0.0; 2]; 2]; 2]; 2];
    for m in 0..2 {
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for l in 0..2 {
                        acc += dgi[m][k][l] * low[l][i][j] + gi[k][l] * dlow[m][l][i][j];
                    }
                    dgam[m][k][i][j] = acc;
                }
            }
        }
    }
    // R^k_{l i j} with (k, l, i, j) = (·, 1, 0, 1).
    let riem = |k: usize| {
        let (l, i, j) = (1, 0, 1);
        let mut r = dgam[i][k][j][l] - dgam[j][k][i][l];
        for m in 0..2 {
            r += gam[k][i][m] * gam[m][j][l] - gam[k][j][m] * gam[m][i][l];
        }
        r
    };
    let r0101 = g[0][0] * riem(0) + g[0][1] * riem(1);
    r0101 / (g[0][0] * g[1][1] - g[0][1] * g[1][0])
}

fn newton_divergence(gi: &Mat2, gam: &[Mat2; 2], w: &Mat2, w_d: &[Mat2; 2]) -> f64 {
    let tr = w[0][0] + w[1][1];
    let t = [[tr - w[0][0], -w[0][1]], [-w[1][0], tr - w[1][1]]];
    let mut dt = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        let dtr = w_d[k][0][0] + w_d[k][1][1];
        for i in 0..2 {
            for j in 0..2 {
                dt[k][i][j] = if i == j { dtr } else { 0.0 } - w_d[k][i][j];
            }
        }
    }
    let mut div = [0.0; 2];
    for (j, dj) in div.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..2 {
            acc += dt[i][i][j];
            for k in 0..2 {
                acc += gam[i][i][k] * t[k][j] - gam[k][i][j] * t[i][k];
            }
        }
        *dj = acc;
    }
    let mut n2 = 0.0;
    for j in 0..2 {
        for l in 0..2 {
            n2 += gi[j][l] * div[j] * div[l];
        }
    }
    n2.max(0.0).sqrt()
}
