//! Spacelike graphs `ρ = y(ω)` over the sphere in de Sitter space.

mod geometry;
mod height;
mod pair;
mod sampled;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::ambient::{self, AmbientError, AmbientIsometry, IsometryKind, POLE_GUARD};
use crate::jet::{Jet, Scalar};
use crate::quadrature::Node;
use crate::symfun::{self, ConeLabel, SymfunError};

pub use geometry::{
    induced_metric, mixed_weingarten, second_fundamental_form, sphere_grad_sq, LocalJet, Mat2, PointGeometry,
    ScalarJet2,
};
pub use height::{real_harmonic, Chart, HarmonicTerm, Regraphed, SampledGrid, SurfaceDescriptor, REGRAPH_RHO_MAX};
pub use pair::{Correspondence, IsometricPair, PairPoint};

/// Gate threshold on `σ₂(W)`.
pub const GATE_SIGMA2_MIN: f64 = 1e-10;

/// Sampled-grid residuals are measured where `sin θ` is at least this; in
/// the polar caps the chart factors `1/sin²θ` amplify difference errors.
pub const SAMPLED_BAND_MIN_SIN: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("surface is not spacelike at u = {u}: cosh^2 y - |dy|^2 = {margin:e}")]
    NonSpacelike { u: f64, margin: f64 },
    #[error("chart point too close to a pole: u = {0}")]
    ChartPole(f64),
    #[error("radial line through {direction:?} meets the image {roots} times")]
    NotAGraph { direction: Vector3<f64>, roots: usize },
    #[error("({theta}, {phi}) is not a node of the sampled grid")]
    NotAGridNode { theta: f64, phi: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Symfun(#[from] SymfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Analytic,
    Regraphed,
    SampledGrid,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum HeightModel {
    Analytic(SurfaceDescriptor),
    Regraphed(Regraphed),
    Sampled(SampledGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSurface {
    model: HeightModel,
}

impl GraphSurface {
    pub fn analytic(desc: SurfaceDescriptor) -> Self {
        Self { model: HeightModel::Analytic(desc) }
    }

    pub fn slice(rho0: f64) -> Self {
        Self::analytic(SurfaceDescriptor::slice(rho0))
    }

    pub fn perturbed_slice(rho0: f64, amplitude: f64, l: u32, m: i32) -> Self {
        Self::analytic(SurfaceDescriptor::perturbed_slice(rho0, amplitude, l, m))
    }

    pub fn sampled(grid: SampledGrid) -> Self {
        Self { model: HeightModel::Sampled(grid) }
    }

    pub fn model(&self) -> &HeightModel {
        &self.model
    }

    pub fn backend(&self) -> Backend {
        match self.model {
            HeightModel::Analytic(_) => Backend::Analytic,
            HeightModel::Regraphed(_) => Backend::Regraphed,
            HeightModel::Sampled(_) => Backend::SampledGrid,
        }
    }

    /// Height along a unit direction.
    pub fn height_at(&self, omega: &Vector3<f64>) -> Result<f64, SurfaceError> {
        match &self.model {
            HeightModel::Analytic(d) => Ok(d.height(&[omega[0], omega[1], omega[2]])),
            HeightModel::Regraphed(r) => r.height_value(omega),
            HeightModel::Sampled(g) => {
                let (theta, phi) = ambient::angles(omega);
                let (i, j) = g.locate(theta, phi).ok_or(SurfaceError::NotAGridNode { theta, phi })?;
                Ok(g.samples()[i * g.resolution().1 + j])
            }
        }
    }

    /// Third-order height jet at a chart point.
    pub fn height_jet(&self, chart: &Chart, u: f64, v: f64) -> Result<Jet, SurfaceError> {
        match &self.model {
            HeightModel::Analytic(d) => Ok(d.height(&chart.direction_generic(Jet::var_u(u), Jet::var_v(v)))),
            HeightModel::Regraphed(r) => r.height_jet(chart, u, v),
            HeightModel::Sampled(_) => Err(SurfaceError::Unsupported("sampled surfaces carry no Taylor jets")),
        }
    }

    pub fn local_jet(&self, chart: &Chart, u: f64, v: f64) -> Result<LocalJet, SurfaceError> {
        if u.sin() < POLE_GUARD {
            return Err(SurfaceError::ChartPole(u));
        }
        match &self.model {
            HeightModel::Sampled(g) => {
                if !chart.is_standard() {
                    return Err(SurfaceError::Unsupported("sampled surfaces are only read in the standard chart"));
                }
                let (i, j) = g.locate(u, v).ok_or(SurfaceError::NotAGridNode { theta: u, phi: v })?;
                Ok(sampled::local_jet(g, i, j))
            }
            _ => Ok(LocalJet::from_height_jet(u, &self.height_jet(chart, u, v)?)),
        }
    }

    /// Samples the height on the `n_theta × n_phi` grid.
    pub fn resample(&self, n_theta: usize, n_phi: usize) -> Result<GraphSurface, SurfaceError> {
        let probe = SampledGrid::new(n_theta, n_phi, vec![0.0; n_theta * n_phi])?;
        let samples = (0..n_theta * n_phi)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n_phi, k % n_phi);
                let om = ambient::direction(probe.theta(i as isize), probe.phi(j));
                self.height_at(&om)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::sampled(SampledGrid::new(n_theta, n_phi, samples)?))
    }

    /// Nodes of the sampled grid, if any.
    pub fn grid_nodes(&self) -> Option<Vec<Node>> {
        match &self.model {
            HeightModel::Sampled(g) => {
                let (nt, np) = g.resolution();
                Some(
                    (0..nt)
                        .flat_map(|i| (0..np).map(move |j| (i, j)))
                        .map(|(i, j)| Node::new(g.theta(i as isize), g.phi(j)))
                        .collect(),
                )
            }
            _ => None,
        }
    }
}

pub fn point_geometry(s: &GraphSurface, node: Node) -> Result<PointGeometry, SurfaceError> {
    point_geometry_in(s, &Chart::standard(), node.theta, node.phi)
}

pub fn point_geometry_in(s: &GraphSurface, chart: &Chart, u: f64, v: f64) -> Result<PointGeometry, SurfaceError> {
    PointGeometry::from_local(&s.local_jet(chart, u, v)?)
}

pub fn check_pre_integral(s: &GraphSurface, node: Node) -> Result<f64, SurfaceError> {
    Ok(point_geometry(s, node)?.pre_integral_residual())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCheck {
    pub sigma2: f64,
    /// Sectional curvature of the induced metric.
    pub k_norm: f64,
    /// `|σ₂ − (K̄ − K)|` with `K̄ = 1`.
    pub residual: f64,
    /// `|σ₂ − (K − K̄)|`, the opposite sign convention.
    pub residual_flipped: f64,
}

pub fn check_sigma2_curvature(s: &GraphSurface, node: Node) -> Result<CurvatureCheck, SurfaceError> {
    let pg = point_geometry(s, node)?;
    Ok(CurvatureCheck {
        sigma2: pg.sigma2,
        k_norm: pg.gauss_curvature,
        residual: (pg.sigma2 - (1.0 - pg.gauss_curvature)).abs(),
        residual_flipped: (pg.sigma2 - (pg.gauss_curvature - 1.0)).abs(),
    })
}

pub fn newton_divergence(s: &GraphSurface, node: Node) -> Result<f64, SurfaceError> {
    Ok(point_geometry(s, node)?.newton_divergence)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub passed: bool,
    pub min_sigma2: f64,
    pub labels: Vec<ConeLabel>,
    /// The common cone label, when every node agrees.
    pub uniform_label: Option<ConeLabel>,
}

/// `σ₂(W) > GATE_SIGMA2_MIN` at every node, with one cone label throughout.
pub fn curvature_gate(s: &GraphSurface, nodes: &[Node]) -> Result<GateReport, SurfaceError> {
    let per_node = nodes
        .par_iter()
        .map(|n| {
            let pg = point_geometry(s, *n)?;
            let label = symfun::cone_classify(&pg.w_frame)?.label;
            Ok((pg.sigma2, label))
        })
        .collect::<Result<Vec<_>, SurfaceError>>()?;
    let min_sigma2 = per_node.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let labels: Vec<ConeLabel> = per_node.iter().map(|p| p.1).collect();
    let uniform_label = match labels.first() {
        Some(&l0) if labels.iter().all(|&l| l == l0) => Some(l0),
        _ => None,
    };
    let passed = min_sigma2 > GATE_SIGMA2_MIN && uniform_label.is_some();
    Ok(GateReport { passed, min_sigma2, labels, uniform_label })
}

/// The image under `ρ ↦ −ρ`.
pub fn reflect_surface(s: &GraphSurface) -> GraphSurface {
    let model = match &s.model {
        HeightModel::Analytic(d) => HeightModel::Analytic(d.negated()),
        HeightModel::Regraphed(r) => {
            // R F(M) = (R F R)(R M).
            let refl = AmbientIsometry::reflect_equator();
            let iso = refl.compose(&r.iso).compose(&refl);
            HeightModel::Regraphed(Regraphed::new(r.base.negated(), iso))
        }
        HeightModel::Sampled(g) => {
            let (nt, np) = g.resolution();
            let neg = g.samples().iter().map(|y| -y).collect();
            HeightModel::Sampled(SampledGrid::new(nt, np, neg).expect("same shape"))
        }
    };
    GraphSurface { model }
}

/// Image of `s` under an ambient isometry, regraphed over the sphere, plus
/// the point correspondence. Root uniqueness and spacelikeness of the image
/// are checked at every node of `regraph_grid`.
pub fn transform_surface(
    s: &GraphSurface,
    iso: &AmbientIsometry,
    regraph_grid: (usize, usize),
) -> Result<(GraphSurface, Correspondence), SurfaceError> {
    if iso.kind == IsometryKind::Identity {
        return Ok((s.clone(), Correspondence::Identity));
    }
    let image = match &s.model {
        HeightModel::Analytic(d) => Regraphed::new(d.clone(), *iso),
        HeightModel::Regraphed(r) => Regraphed::new(r.base.clone(), iso.compose(&r.iso)),
        HeightModel::Sampled(_) => return Err(SurfaceError::Unsupported("transforming a sampled surface")),
    };
    let out = GraphSurface { model: HeightModel::Regraphed(image) };
    let (nt, np) = regraph_grid;
    let probe = SampledGrid::new(nt, np, vec![0.0; nt * np])?;
    (0..nt * np).into_par_iter().try_for_each(|k| {
        let (i, j) = (k / np, k % np);
        let lj = out.local_jet(&Chart::standard(), probe.theta(i as isize), probe.phi(j))?;
        PointGeometry::from_local(&lj).map(|_| ())
    })?;
    Ok((out, Correspondence::Ambient(*iso)))
}

/// Frobenius distance between two frame operators.
pub fn frame_distance(a: &symfun::SymOperator, b: &symfun::SymOperator) -> f64 {
    (a.matrix() - b.matrix()).norm()
}

pub(crate) fn jet_embedding(y: Jet, omega: [Jet; 3]) -> [Jet; 4] {
    let c = y.cosh();
    [y.sinh(), c * omega[0], c * omega[1], c * omega[2]]
}
