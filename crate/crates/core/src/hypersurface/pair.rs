//! Pairs of surfaces related by a point correspondence `f : M → M̃`.

use std::f64::consts::FRAC_PI_2;

use super::geometry::{congruence, Mat2, PointGeometry, ScalarJet2};
use super::{jet_embedding, point_geometry, point_geometry_in, transform_surface, Chart};
use super::{GraphSurface, SurfaceError};
use crate::ambient::AmbientIsometry;
use crate::jet::{Jet, Scalar};
use crate::quadrature::Node;
use crate::symfun::SymOperator;

#[derive(Debug, Clone, PartialEq)]
pub enum Correspondence {
    /// Same chart point on both surfaces.
    Identity,
    /// `f = Λ|_M`.
    Ambient(AmbientIsometry),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometricPair {
    pub m: GraphSurface,
    pub mt: GraphSurface,
    pub correspondence: Correspondence,
}

/// Both surfaces seen from one node of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint {
    pub geometry: PointGeometry,
    /// Geometry of `M̃` at `f(p)`, in a chart centred there for ambient
    /// correspondences.
    pub tilde: PointGeometry,
    /// `Φ̃ ∘ f` as a function on `M`.
    pub tilde_potential: ScalarJet2,
    /// Hessian of `Φ̃ ∘ f` on `(M, g)` in the frame of `M`, same sign
    /// convention as [`PointGeometry::hess_phi`].
    pub tilde_hess: Mat2,
    /// `W̃` pulled back through `f` into the frame of `M`.
    pub w_tilde: SymOperator,
    /// `f*g̃` in the chart of `M`.
    pub pulled_metric: Mat2,
    /// `max |g − f*g̃|` over chart components.
    pub metric_mismatch: f64,
    /// `|ρ(f(p)) − ỹ(f(p))|`: how far `f(p)` lands from `M̃`.
    pub landing_error: f64,
}

impl IsometricPair {
    pub fn with_identity(m: GraphSurface, mt: GraphSurface) -> Self {
        Self { m, mt, correspondence: Correspondence::Identity }
    }

    pub fn from_isometry(
        m: GraphSurface,
        iso: &AmbientIsometry,
        regraph_grid: (usize, usize),
    ) -> Result<Self, SurfaceError> {
        let (mt, correspondence) = transform_surface(&m, iso, regraph_grid)?;
        Ok(Self { m, mt, correspondence })
    }

    pub fn isometry(&self) -> AmbientIsometry {
        match &self.correspondence {
            Correspondence::Identity => AmbientIsometry::identity(),
            Correspondence::Ambient(iso) => *iso,
        }
    }

    pub fn evaluate(&self, node: Node) -> Result<PairPoint, SurfaceError> {
        let geometry = point_geometry(&self.m, node)?;
        let (tilde, jac, tilde_potential, landing_error) = match &self.correspondence {
            Correspondence::Identity => {
                let tilde = point_geometry(&self.mt, node)?;
                let pot = tilde.potential;
                (tilde, [[1.0, 0.0], [0.0, 1.0]], pot, 0.0)
            }
            Correspondence::Ambient(iso) => {
                let chart = Chart::standard();
                let y = self.m.height_jet(&chart, node.theta, node.phi)?;
                let omega = chart.direction_generic(Jet::var_u(node.theta), Jet::var_v(node.phi));
                let x = jet_embedding(y, omega);
                let lam = &iso.lambda;
                let mut xt = [Jet::constant(0.0); 4];
                for (i, xi) in xt.iter_mut().enumerate() {
                    for (j, xj) in x.iter().enumerate() {
                        *xi = *xi + *xj * lam[(i, j)];
                    }
                }
                let r = (xt[1] * xt[1] + xt[2] * xt[2] + xt[3] * xt[3]).sqrt();
                let om_t = [xt[1] / r, xt[2] / r, xt[3] / r];
                let centre = nalgebra::Vector3::new(om_t[0].value(), om_t[1].value(), om_t[2].value());
                let tchart = Chart::centered_on(&centre);
                let (ut, vt) = tchart.coordinates_of(&om_t);
                let tilde = point_geometry_in(&self.mt, &tchart, FRAC_PI_2, 0.0)?;
                let landing = (xt[0].value().asinh() - tilde.rho).abs();
                let jac = [ut.gradient(), vt.gradient()];
                (tilde, jac, ScalarJet2::from_jet(&xt[0]), landing)
            }
        };
        let pulled_metric = congruence(&jac, &tilde.metric);
        let pulled_h = congruence(&jac, &tilde.second_form);
        let mut metric_mismatch: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                metric_mismatch = metric_mismatch.max((geometry.metric[i][j] - pulled_metric[i][j]).abs());
            }
        }
        let w_tilde = SymOperator::from_2x2(geometry.to_frame(&pulled_h))?;
        let tilde_hess = geometry.potential_hessian(&tilde_potential);
        Ok(PairPoint {
            geometry,
            tilde,
            tilde_potential,
            tilde_hess,
            w_tilde,
            pulled_metric,
            metric_mismatch,
            landing_error,
        })
    }
}
