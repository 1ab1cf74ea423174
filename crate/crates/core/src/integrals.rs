//! Quadrature of curvature integrands over graph surfaces and isometric pairs.

use rayon::prelude::*;
use thiserror::Error;

use crate::hypersurface::{
    point_geometry, GraphSurface, IsometricPair, Mat2, PairPoint, SurfaceError, GATE_SIGMA2_MIN,
};
use crate::quadrature::CompensatedSum;
pub use crate::quadrature::{Node, QuadratureRule};
use crate::symfun::{self, ConeLabel, SymOperator, SymfunError};

/// Surface dimension of the numerical engine.
const N: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("curvature gate failed: {0}")]
    GateFailed(String),
    #[error("correspondence invalid at ({theta}, {phi}): {reason}")]
    CorrespondenceInvalid { theta: f64, phi: f64, reason: String },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Symfun(#[from] SymfunError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual of an integral identity.
    pub integral_rel: f64,
    /// Absolute pointwise residual.
    pub pointwise: f64,
    /// `max |g − f*g̃|` for a pair to count as isometric.
    pub metric: f64,
    /// `max ‖W − W̃‖_F` for a rigid verdict.
    pub w_mismatch: f64,
    /// Rigidity integral relative to the area.
    pub rigidity_rel: f64,
    /// How far `f(p)` may land from `M̃`.
    pub landing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { integral_rel: 1e-6, pointwise: 1e-8, metric: 1e-8, w_mismatch: 1e-6, rigidity_rel: 1e-8, landing: 1e-8 }
    }
}

/// `Σ_k w_k f(node_k) √det g(node_k)`, compensated, in node order.
pub fn integrate_over_m(
    s: &GraphSurface,
    rule: &QuadratureRule,
    f: impl Fn(Node) -> f64 + Sync,
) -> Result<f64, IntegralError> {
    let terms = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(n, w)| Ok(w * f(*n) * point_geometry(s, *n)?.area_density()))
        .collect::<Result<Vec<f64>, SurfaceError>>()?;
    Ok(crate::quadrature::compensated_sum(terms))
}

/// Per-node evaluation of a pair, kept in rule order.
#[derive(Debug, Clone)]
pub struct PairSamples {
    /// Quadrature weight times area density.
    pub area_weights: Vec<f64>,
    pub points: Vec<PairPoint>,
}

impl PairSamples {
    pub fn evaluate(pair: &IsometricPair, rule: &QuadratureRule) -> Result<Self, IntegralError> {
        let points = rule.nodes.par_iter().map(|n| pair.evaluate(*n)).collect::<Result<Vec<_>, SurfaceError>>()?;
        let area_weights = points.iter().zip(&rule.weights).map(|(p, w)| w * p.geometry.area_density()).collect();
        Ok(Self { area_weights, points })
    }

    fn integrate(&self, f: impl Fn(&PairPoint) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (p, w) in self.points.iter().zip(&self.area_weights) {
            acc.add(w * f(p));
        }
        acc.total()
    }

    pub fn area(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn max_metric_mismatch(&self) -> f64 {
        self.points.iter().map(|p| p.metric_mismatch).fold(0.0, f64::max)
    }

    pub fn max_landing_error(&self) -> f64 {
        self.points.iter().map(|p| p.landing_error).fold(0.0, f64::max)
    }

    fn check_landing(&self, rule: &QuadratureRule, tol: &Tolerances) -> Result<(), IntegralError> {
        for (p, n) in self.points.iter().zip(&rule.nodes) {
            if p.landing_error.is_nan() || p.landing_error > tol.landing {
                return Err(IntegralError::CorrespondenceInvalid {
                    theta: n.theta,
                    phi: n.phi,
                    reason: format!("image lands {:e} off the target surface", p.landing_error),
                });
            }
        }
        Ok(())
    }

    /// Both shape operators have `σ₂ > GATE_SIGMA2_MIN` and one cone label
    /// throughout.
    pub fn gate(&self) -> Result<GateSummary, IntegralError> {
        let mut min_sigma2 = f64::INFINITY;
        let mut min_sigma2_tilde = f64::INFINITY;
        let mut labels = Vec::with_capacity(2 * self.points.len());
        for p in &self.points {
            min_sigma2 = min_sigma2.min(p.geometry.sigma2);
            min_sigma2_tilde = min_sigma2_tilde.min(symfun::sigma2(&p.w_tilde));
            labels.push(symfun::cone_classify(&p.geometry.w_frame)?.label);
            labels.push(symfun::cone_classify(&p.w_tilde)?.label);
        }
        let label = match labels.first() {
            Some(&l0) if labels.iter().all(|&l| l == l0) => Some(l0),
            _ => None,
        };
        let min_rho = self.points.iter().map(|p| p.geometry.rho).fold(f64::INFINITY, f64::min);
        let min_rho_tilde = self.points.iter().map(|p| p.tilde.rho).fold(f64::INFINITY, f64::min);
        Ok(GateSummary { min_sigma2, min_sigma2_tilde, label, min_rho, min_rho_tilde })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSummary {
    pub min_sigma2: f64,
    pub min_sigma2_tilde: f64,
    pub label: Option<ConeLabel>,
    pub min_rho: f64,
    pub min_rho_tilde: f64,
}

impl GateSummary {
    pub fn curvature_ok(&self) -> bool {
        self.min_sigma2 > GATE_SIGMA2_MIN && self.min_sigma2_tilde > GATE_SIGMA2_MIN && self.label.is_some()
    }

    pub fn describe(&self) -> String {
        format!(
            "min sigma2 = {:e}, min sigma2~ = {:e}, cone label = {:?}, min rho = {}, min rho~ = {}",
            self.min_sigma2, self.min_sigma2_tilde, self.label, self.min_rho, self.min_rho_tilde
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityLabel {
    A,
    B,
    C,
    D,
}

impl IdentityLabel {
    pub const ALL: [IdentityLabel; 4] = [IdentityLabel::A, IdentityLabel::B, IdentityLabel::C, IdentityLabel::D];

    pub fn letter(self) -> char {
        match self {
            IdentityLabel::A => 'a',
            IdentityLabel::B => 'b',
            IdentityLabel::C => 'c',
            IdentityLabel::D => 'd',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub label: IdentityLabel,
    /// `∫ Σ ∂σ₂/∂w_ij(A) · factor · Hess(e_i, e_j)`.
    pub lhs: f64,
    /// `∫ (n−1)·factor·φ_own·σ₁(A) + 2·factor·σ₁,₁(A, B)·support`.
    pub rhs: f64,
    /// The same with `−2` in front of the support term.
    pub rhs_statement: f64,
    /// `∫` of the absolute values of every term on both sides.
    pub scale: f64,
    pub residual_rel: f64,
    pub residual_rel_statement: f64,
    /// Max over nodes of `|lhs integrand − rhs integrand|`.
    pub pointwise_max: f64,
    /// Max over nodes of the gap between the expanded integrand
    /// `Σ ∂σ₂(A)(factor·φ_own δ_ij + factor·B_ij·support)` and its closed form.
    pub proof_step_max: f64,
    pub sign_note: String,
    pub tolerance: f64,
    pub pass: bool,
}

struct Pointwise {
    lhs: f64,
    closed_trace: f64,
    closed_support: f64,
    proof_step: f64,
    abs_terms: f64,
}

fn contract(d: &nalgebra::DMatrix<f64>, m: &Mat2) -> (f64, f64) {
    let mut sum = 0.0;
    let mut abs = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            sum += d[(i, j)] * m[i][j];
            abs += (d[(i, j)] * m[i][j]).abs();
        }
    }
    (sum, abs)
}

/// One identity at one node: `a` is the operator differentiated, `b` the
/// shape operator paired with the Hessian's potential.
fn pointwise(a: &SymOperator, b: &SymOperator, hess: &Mat2, factor: f64, phi_own: f64, support: f64) -> Pointwise {
    let d = symfun::d_sigma2(a);
    let (h_sum, h_abs) = contract(&d, hess);
    let lhs = factor * h_sum;
    let mut expanded = [[0.0; 2]; 2];
    for (i, row) in expanded.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let id = if i == j { phi_own } else { 0.0 };
            *e = factor * (id + b.get(i, j) * support);
        }
    }
    let (proof_step, _) = contract(&d, &expanded);
    let closed_trace = (N - 1.0) * factor * phi_own * symfun::sigma1(a);
    let s11 = symfun::sigma11(a, b).expect("same dimension");
    let closed_support = 2.0 * factor * s11 * support;
    let abs_terms = (factor * h_abs).abs() + closed_trace.abs() + closed_support.abs();
    Pointwise { lhs, closed_trace, closed_support, proof_step, abs_terms }
}

fn node_identity(label: IdentityLabel, p: &PairPoint) -> Pointwise {
    let g = &p.geometry;
    let phi_p = g.rho.sinh();
    let phi_t = p.tilde_potential.value;
    let (w, wt) = (&g.w_frame, &p.w_tilde);
    match label {
        IdentityLabel::A => pointwise(w, w, &g.hess_phi, phi_t, phi_p, g.support),
        IdentityLabel::B => pointwise(wt, w, &g.hess_phi, phi_t, phi_p, g.support),
        IdentityLabel::C => pointwise(w, wt, &p.tilde_hess, phi_p, phi_t, p.tilde.support),
        IdentityLabel::D => pointwise(wt, wt, &p.tilde_hess, phi_p, phi_t, p.tilde.support),
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

impl PairSamples {
    pub fn identity_report(&self, label: IdentityLabel, tol: &Tolerances) -> IdentityReport {
        let pts: Vec<Pointwise> = self.points.iter().map(|p| node_identity(label, p)).collect();
        let sum = |f: &dyn Fn(&Pointwise) -> f64| {
            let mut acc = CompensatedSum::default();
            for (p, w) in pts.iter().zip(&self.area_weights) {
                acc.add(w * f(p));
            }
            acc.total()
        };
        let lhs = sum(&|p| p.lhs);
        let trace = sum(&|p| p.closed_trace);
        let supp = sum(&|p| p.closed_support);
        let scale = sum(&|p| p.abs_terms);
        let rhs = trace + supp;
        let rhs_statement = trace - supp;
        let pointwise_max = pts.iter().map(|p| (p.lhs - p.closed_trace - p.closed_support).abs()).fold(0.0, f64::max);
        let proof_step_max =
            pts.iter().map(|p| (p.proof_step - p.closed_trace - p.closed_support).abs()).fold(0.0, f64::max);
        let residual_rel = relative(lhs - rhs, scale);
        let residual_rel_statement = relative(lhs - rhs_statement, scale);
        let sign_note =
            format!("+2 support term: rel {:.3e}; -2 support term: rel {:.3e}", residual_rel, residual_rel_statement);
        IdentityReport {
            label,
            lhs,
            rhs,
            rhs_statement,
            scale,
            residual_rel,
            residual_rel_statement,
            pointwise_max,
            proof_step_max,
            sign_note,
            tolerance: tol.integral_rel,
            pass: residual_rel <= tol.integral_rel,
        }
    }

    pub fn tilde_symmetry(&self, tol: &Tolerances) -> TildeSymmetryReport {
        let mut fwd = CompensatedSum::default();
        let mut swp = CompensatedSum::default();
        let mut scale = CompensatedSum::default();
        for (p, w) in self.points.iter().zip(&self.area_weights) {
            let d = symfun::d_sigma2(&p.geometry.w_frame);
            let phi_p = p.geometry.rho.sinh();
            let phi_t = p.tilde_potential.value;
            let (a, a_abs) = contract(&d, &p.tilde_hess);
            let (b, b_abs) = contract(&d, &p.geometry.hess_phi);
            fwd.add(w * phi_p * a);
            swp.add(w * phi_t * b);
            scale.add(w * (phi_p * a_abs).abs() + w * (phi_t * b_abs).abs());
        }
        let (forward, swapped, scale) = (fwd.total(), swp.total(), scale.total());
        let residual_rel = relative(forward - swapped, scale);
        TildeSymmetryReport {
            forward,
            swapped,
            scale,
            residual_rel,
            tolerance: tol.integral_rel,
            pass: residual_rel <= tol.integral_rel,
        }
    }

    pub fn rigidity(&self, tol: &Tolerances) -> Result<RigidityReport, IntegralError> {
        let gate = self.gate()?;
        let mut integral = CompensatedSum::default();
        let mut scale = CompensatedSum::default();
        let mut max_w_mismatch: f64 = 0.0;
        let mut sign_factor_min = f64::INFINITY;
        let mut gap_max = f64::NEG_INFINITY;
        let mut gap_min = f64::INFINITY;
        let mut garding_min = f64::INFINITY;
        for (p, w) in self.points.iter().zip(&self.area_weights) {
            let g = &p.geometry;
            let (wm, wt) = (&g.w_frame, &p.w_tilde);
            let factor = p.tilde_potential.value * g.support + g.rho.sinh() * p.tilde.support;
            let s11 = symfun::sigma11(wm, wt)?;
            let s2 = g.sigma2;
            let s2t = symfun::sigma2(wt);
            integral.add(w * factor * (s2 - s11));
            scale.add(w * (factor * s2).abs() + w * (factor * s11).abs());
            max_w_mismatch = max_w_mismatch.max((wm.matrix() - wt.matrix()).norm());
            sign_factor_min = sign_factor_min.min(-factor);
            gap_max = gap_max.max(s11 - s2);
            gap_min = gap_min.min(s11 - s2);
            if s2 > 0.0 && s2t > 0.0 {
                garding_min = garding_min.min(s11 - (s2 * s2t).sqrt());
            }
        }
        let area = self.area();
        let integral_value = integral.total();
        let integral_rel = integral_value.abs() / area;
        let max_metric_mismatch = self.max_metric_mismatch();
        let in_future_half = gate.min_rho > 0.0 && gate.min_rho_tilde > 0.0;
        let verdict = if !in_future_half || !gate.curvature_ok() {
            RigidityVerdict::GateFailed
        } else if max_metric_mismatch > tol.metric {
            RigidityVerdict::NotIsometric
        } else if integral_rel <= tol.rigidity_rel && max_w_mismatch <= tol.w_mismatch {
            RigidityVerdict::Rigid
        } else {
            RigidityVerdict::NotRigid
        };
        Ok(RigidityReport {
            integral_value,
            integral_scale: scale.total(),
            area,
            integral_rel,
            max_w_mismatch,
            max_metric_mismatch,
            sign_factor_min,
            gap_max,
            gap_min,
            garding_min,
            gate,
            verdict,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeSymmetryReport {
    /// `∫ Σ ∂σ₂/∂w_ij(W) φ′ Hess Φ̃(e_i, e_j)`.
    pub forward: f64,
    /// `∫ Σ ∂σ₂/∂w_ij(W) φ̃′ Hess Φ(e_i, e_j)`.
    pub swapped: f64,
    pub scale: f64,
    pub residual_rel: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidityVerdict {
    Rigid,
    /// Isometric and gated, but the shape operators differ.
    NotRigid,
    NotIsometric,
    GateFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    /// `∫ (φ̃′⟨V,ν⟩ + φ′⟨Ṽ,ν̃⟩)(σ₂(W) − σ₁,₁(W, W̃))`.
    pub integral_value: f64,
    pub integral_scale: f64,
    pub area: f64,
    /// `|integral_value| / area`.
    pub integral_rel: f64,
    pub max_w_mismatch: f64,
    pub max_metric_mismatch: f64,
    /// Min over nodes of `−(φ̃′⟨V,ν⟩ + φ′⟨Ṽ,ν̃⟩)`.
    pub sign_factor_min: f64,
    /// Max over nodes of `σ₁,₁(W, W̃) − σ₂(W)`.
    pub gap_max: f64,
    pub gap_min: f64,
    /// Min over nodes of `σ₁,₁(W, W̃) − (σ₂(W) σ₂(W̃))^{1/2}`.
    pub garding_min: f64,
    pub gate: GateSummary,
    pub verdict: RigidityVerdict,
}

/// The four identities `a`–`d` for a gated pair.
pub fn verify_integral_identities(
    pair: &IsometricPair,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<[IdentityReport; 4], IntegralError> {
    let samples = gated_samples(pair, rule, tol)?;
    Ok(IdentityLabel::ALL.map(|l| samples.identity_report(l, tol)))
}

pub fn verify_tilde_symmetry(
    pair: &IsometricPair,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<TildeSymmetryReport, IntegralError> {
    Ok(gated_samples(pair, rule, tol)?.tilde_symmetry(tol))
}

pub fn rigidity_experiment(
    pair: &IsometricPair,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<RigidityReport, IntegralError> {
    let samples = PairSamples::evaluate(pair, rule)?;
    samples.check_landing(rule, tol)?;
    samples.rigidity(tol)
}

/// Samples a pair, failing unless the correspondence lands on `M̃` and both
/// curvature gates pass.
pub fn gated_samples(
    pair: &IsometricPair,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<PairSamples, IntegralError> {
    let samples = PairSamples::evaluate(pair, rule)?;
    samples.check_landing(rule, tol)?;
    let gate = samples.gate()?;
    if !gate.curvature_ok() {
        return Err(IntegralError::GateFailed(gate.describe()));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientIsometry;
    use crate::hypersurface::{transform_surface, SurfaceDescriptor};
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn rule() -> QuadratureRule {
        QuadratureRule::gauss_sphere(24, 48)
    }

    #[test]
    fn slice_area_and_odd_integrand() {
        let r = rule();
        let s = GraphSurface::slice(0.5);
        let area = integrate_over_m(&s, &r, |_| 1.0).unwrap();
        assert!((area - 4.0 * PI * 0.5f64.cosh().powi(2)).abs() < 1e-10);
        // cosh²(½) = (1 + cosh 1)/2.
        assert!((area - 2.0 * PI * (1.0 + 1f64.cosh())).abs() < 1e-10);
        assert!((area - 15.978646879644).abs() < 1e-9);
        let eq = integrate_over_m(&GraphSurface::slice(0.0), &r, |_| 1.0).unwrap();
        assert!((eq - 4.0 * PI).abs() < 1e-12);
        let odd = integrate_over_m(&s, &r, |n| n.theta.cos()).unwrap();
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn identity_pair_on_slice_balances_pointwise() {
        let s = GraphSurface::slice(0.5);
        let pair = IsometricPair::with_identity(s.clone(), s);
        let tol = Tolerances::default();
        let reps = verify_integral_identities(&pair, &rule(), &tol).unwrap();
        let a = &reps[0];
        assert!(a.lhs.abs() < 1e-13);
        assert!(a.rhs.abs() < 1e-12);
        assert!(a.pass && a.pointwise_max < 1e-14);
        assert!(a.residual_rel_statement > 0.1);
        // With M̃ = M, identity (b) collapses onto (a).
        assert!((reps[1].lhs - a.lhs).abs() < 1e-14 && (reps[1].rhs - a.rhs).abs() < 1e-13);
        let ts = verify_tilde_symmetry(&pair, &rule(), &tol).unwrap();
        assert_eq!(ts.forward, ts.swapped);
    }

    #[test]
    fn gate_rejects_equator() {
        let s = GraphSurface::slice(0.0);
        let pair = IsometricPair::with_identity(s.clone(), s);
        let err = verify_integral_identities(&pair, &rule(), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, IntegralError::GateFailed(_)));
    }

    #[test]
    fn boosted_pair_identities_and_rigidity() {
        let s = GraphSurface::perturbed_slice(0.6, 0.05, 2, 0);
        let boost = AmbientIsometry::boost(0.3, Vector3::x()).unwrap();
        let pair = IsometricPair::from_isometry(s, &boost, (16, 32)).unwrap();
        let tol = Tolerances::default();
        let samples = gated_samples(&pair, &rule(), &tol).unwrap();
        for l in IdentityLabel::ALL {
            let rep = samples.identity_report(l, &tol);
            assert!(rep.pass, "{rep:?}");
            assert!(rep.proof_step_max < 1e-8);
        }
        assert!(samples.tilde_symmetry(&tol).pass);
        let rig = samples.rigidity(&tol).unwrap();
        assert_eq!(rig.verdict, RigidityVerdict::Rigid);
        assert!(rig.sign_factor_min > 0.0);
        assert!(rig.gap_min >= -1e-10);
    }

    #[test]
    fn tilde_symmetry_needs_integration() {
        // A non-trivial boost: the two integrands differ node by node but not
        // in total.
        let s = GraphSurface::slice(0.6);
        let boost = AmbientIsometry::boost(0.25, Vector3::x()).unwrap();
        let pair = IsometricPair::from_isometry(s, &boost, (16, 32)).unwrap();
        let samples = gated_samples(&pair, &rule(), &Tolerances::default()).unwrap();
        let max_node_gap = samples
            .points
            .iter()
            .map(|p| {
                let d = symfun::d_sigma2(&p.geometry.w_frame);
                let a = contract(&d, &p.tilde_hess).0 * p.geometry.rho.sinh();
                let b = contract(&d, &p.geometry.hess_phi).0 * p.tilde_potential.value;
                (a - b).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_node_gap > 1e-3);
        assert!(samples.tilde_symmetry(&Tolerances::default()).residual_rel < 1e-8);
    }

    #[test]
    fn negative_controls() {
        let tol = Tolerances::default();
        let m = GraphSurface::perturbed_slice(0.6, 0.05, 2, 0);
        let mt = GraphSurface::perturbed_slice(0.6, 0.08, 2, 0);
        let rep = rigidity_experiment(&IsometricPair::with_identity(m, mt), &rule(), &tol).unwrap();
        assert_eq!(rep.verdict, RigidityVerdict::NotIsometric);
        assert!(rep.max_metric_mismatch > 1e-3);

        let low = GraphSurface::slice(-0.3);
        let rep = rigidity_experiment(&IsometricPair::with_identity(low.clone(), low), &rule(), &tol).unwrap();
        assert_eq!(rep.verdict, RigidityVerdict::GateFailed);

        let s = GraphSurface::analytic(SurfaceDescriptor::slice(0.6));
        let (mt, _) = transform_surface(&s, &AmbientIsometry::boost(0.2, Vector3::y()).unwrap(), (8, 16)).unwrap();
        // Boosted image paired with the wrong correspondence.
        let wrong = IsometricPair::with_identity(s, mt);
        let rep = rigidity_experiment(&wrong, &rule(), &tol).unwrap();
        assert_eq!(rep.verdict, RigidityVerdict::NotIsometric);
    }
}
