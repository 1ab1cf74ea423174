//! The four subcommands. Each returns a report plus, when a hypothesis was
//! violated, the reason (exit code 2).

use dsrigid_core::ambient::{self, DeSitterPoint};
use dsrigid_core::hypersurface::{
    check_sigma2_curvature, curvature_gate, frame_distance, point_geometry, reflect_surface, GraphSurface,
    IsometricPair, PointGeometry, SurfaceError, GATE_SIGMA2_MIN,
};
use dsrigid_core::integrals::{self, IntegralError, PairSamples, QuadratureRule, RigidityVerdict};
use dsrigid_core::symfun::{self, cone_classify, garding_gap, ConeLabel, SymOperator, SymfunError};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{Command, ExperimentConfig, IsometryChoice};
use crate::report::{fmt_num, CheckRecord, RunReport};

/// Gårding gaps below `−GAP_FLOOR` count as violations.
pub const GAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Symfun(#[from] SymfunError),
}

#[derive(Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub violation: Option<String>,
}

impl Outcome {
    fn checked(report: RunReport) -> Self {
        Self { report, violation: None }
    }

    fn violated(mut report: RunReport, reason: String) -> Self {
        report.aborted = true;
        report.notes.push(format!("hypothesis violated: {reason}"));
        Self { report, violation: Some(reason) }
    }
}

/// Parses `diag a b ...`, `identity n`, or rows separated by `;`.
pub fn parse_matrix(text: &str) -> Result<SymOperator, InputError> {
    let text = text.trim();
    let num = |t: &str| -> Result<f64, InputError> {
        t.parse::<f64>().map_err(|_| InputError::Parse(format!("not a number: {t:?} in {text:?}")))
    };
    let mut words = text.split_whitespace();
    match words.next() {
        None => Err(InputError::Parse("empty matrix".into())),
        Some("diag") => {
            let v = words.map(num).collect::<Result<Vec<_>, _>>()?;
            Ok(SymOperator::diag(&v)?)
        }
        Some("identity") => {
            let n: usize = words
                .next()
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| InputError::Parse(format!("identity expects a dimension: {text:?}")))?;
            if words.next().is_some() {
                return Err(InputError::Parse(format!("trailing input in {text:?}")));
            }
            Ok(SymOperator::identity(n)?)
        }
        Some(_) => {
            let rows = text
                .split(';')
                .map(|r| r.split_whitespace().map(num).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SymOperator::from_rows(&rows)?)
        }
    }
}

fn label_name(l: ConeLabel) -> &'static str {
    match l {
        ConeLabel::PlusCone => "PlusCone",
        ConeLabel::MinusCone => "MinusCone",
        ConeLabel::Outside => "Outside",
        ConeLabel::Boundary => "Boundary",
    }
}

pub struct ConeArgs {
    pub matrices: Vec<String>,
    pub random: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
}

/// A random member of the positive σ₂ cone: a random symmetric matrix
/// shifted past the larger root of `t ↦ σ₂(B + tI)`.
fn random_plus_cone(rng: &mut ChaCha8Rng, n: usize) -> Result<SymOperator, SymfunError> {
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-1.0..1.0);
            b[(i, j)] = x;
            b[(j, i)] = x;
        }
    }
    let b = SymOperator::new(b)?;
    let t2 = cone_classify(&b)?.roots.1;
    Ok(b.shifted(t2 + rng.gen_range(0.01..2.0)))
}

pub fn check_cone(args: &ConeArgs) -> Result<Outcome, InputError> {
    let mut config = vec![("seed".to_string(), args.seed.to_string())];
    for (k, m) in args.matrices.iter().enumerate() {
        config.push((format!("matrix{}", k + 1), m.clone()));
    }
    let mut report = RunReport::new("check-cone", config);
    if args.matrices.len() > 2 {
        return Err(InputError::Parse("check-cone takes at most two matrices".into()));
    }
    if args.matrices.is_empty() && args.random == 0 {
        return Err(InputError::Parse("give one or two matrices, or --random N".into()));
    }
    let ops = args.matrices.iter().map(|m| parse_matrix(m)).collect::<Result<Vec<_>, _>>()?;
    if let [a, b] = ops.as_slice() {
        if a.dim() != b.dim() {
            return Err(SymfunError::DimensionMismatch { left: a.dim(), right: b.dim() }.into());
        }
    }
    for (k, op) in ops.iter().enumerate() {
        let c = cone_classify(op)?;
        report.notes.push(format!(
            "matrix{}: label={} roots=({}, {}) sigma1={} sigma2={}",
            k + 1,
            label_name(c.label),
            fmt_num(c.roots.0),
            fmt_num(c.roots.1),
            fmt_num(symfun::sigma1(op)),
            fmt_num(symfun::sigma2(op))
        ));
    }
    if let [a, b] = ops.as_slice() {
        match garding_gap(a, b) {
            Ok(g) => report.push(
                CheckRecord::bounded("garding_gap", "Gårding inequality", (-g.gap).max(0.0), GAP_FLOOR)
                    .with("gap", fmt_num(g.gap))
                    .with("sigma11", fmt_num(g.sigma11))
                    .with("geo_mean", fmt_num(g.geo_mean))
                    .with("equality", g.equality.to_string())
                    .with("proportionality", fmt_num(g.proportionality)),
            ),
            Err(e @ SymfunError::NotInCone { .. }) => return Ok(Outcome::violated(report, e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    if args.random > 0 {
        if args.dims.is_empty() {
            return Err(InputError::Parse("--dims needs at least one dimension".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut min_gap = f64::INFINITY;
        let mut count = 0usize;
        for k in 0..args.random {
            let n = args.dims[k % args.dims.len()];
            let w = random_plus_cone(&mut rng, n)?;
            let wt = random_plus_cone(&mut rng, n)?;
            match garding_gap(&w, &wt) {
                Ok(g) => {
                    min_gap = min_gap.min(g.gap);
                    count += 1;
                }
                // A shift landing within rounding of the cone boundary.
                Err(SymfunError::NotInCone { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        report.push(
            CheckRecord::bounded("garding_random", "Gårding inequality", (-min_gap).max(0.0), GAP_FLOOR)
                .with("pairs", count.to_string())
                .with("min_gap", fmt_num(min_gap)),
        );
    }
    Ok(Outcome::checked(report))
}

fn surface_violation(e: &SurfaceError) -> String {
    match e {
        SurfaceError::NonSpacelike { u, margin } => {
            format!("NonSpacelike: surface is not spacelike at theta={u} (margin {margin:e})")
        }
        other => other.to_string(),
    }
}

/// Passes iff `σ₂ > GATE_SIGMA2_MIN` throughout with one cone label (and,
/// for pairs, `ρ > 0`); the residual is the shortfall below the threshold.
fn gate_record(min_sigma2: f64, passed: bool, label: Option<ConeLabel>) -> CheckRecord {
    CheckRecord {
        name: "curvature_gate".into(),
        anchor: "cone hypothesis sigma2 > 0",
        residual: (GATE_SIGMA2_MIN - min_sigma2).max(0.0),
        tolerance: 0.0,
        pass: passed,
        extra: vec![
            ("min_sigma2".into(), fmt_num(min_sigma2)),
            ("label".into(), label.map_or("mixed", label_name).into()),
        ],
    }
}

pub fn geometry(cfg: &ExperimentConfig) -> Result<Outcome, InputError> {
    cfg.validate_for(Command::Geometry)?;
    let mut report = RunReport::new("geometry", cfg.echo());
    let tol = &cfg.tolerances;
    let s = GraphSurface::analytic(cfg.surface.clone());
    let nodes = QuadratureRule::gauss_sphere(cfg.quadrature.0, cfg.quadrature.1).nodes;

    let pgs: Vec<PointGeometry> = match nodes.iter().map(|n| point_geometry(&s, *n)).collect() {
        Ok(v) => v,
        Err(e) => return Ok(Outcome::violated(report, surface_violation(&e))),
    };

    if cfg.suite_enabled("pre_integral") {
        let worst = pgs.iter().map(|p| p.pre_integral_residual()).fold(0.0, f64::max);
        report.push(CheckRecord::bounded("pre_integral", "Lemma preIntegral", worst, tol.core.pointwise));
    }
    if cfg.suite_enabled("sigma2_curvature") {
        let mut worst: f64 = 0.0;
        let mut worst_flipped: f64 = 0.0;
        for n in &nodes {
            let c = check_sigma2_curvature(&s, *n).map_err(|e| InputError::Parse(e.to_string()))?;
            worst = worst.max(c.residual);
            worst_flipped = worst_flipped.max(c.residual_flipped);
        }
        report.push(
            CheckRecord::bounded("sigma2_curvature", "Lemma sigma2KK", worst, tol.core.pointwise)
                .with("opposite_sign_residual", fmt_num(worst_flipped)),
        );
    }
    if cfg.suite_enabled("newton_divergence") {
        let worst = pgs.iter().map(|p| p.newton_divergence.abs()).fold(0.0, f64::max);
        report.push(CheckRecord::bounded("newton_divergence", "Prop gradSigma2", worst, tol.newton));
    }
    if cfg.suite_enabled("deriv_v") {
        let mut worst: f64 = 0.0;
        for (p, n) in pgs.iter().zip(&nodes) {
            let x = DeSitterPoint::from_chart(p.rho, n.theta, n.phi);
            let [e1, e2] = p.ambient_frame();
            let basis = [e1, e2, p.normal];
            for i in 0..3 {
                for j in i..3 {
                    let r = ambient::lie_derivative_residual(&x, &basis[i], &basis[j])
                        .map_err(|e| InputError::Parse(e.to_string()))?;
                    worst = worst.max(r.abs());
                }
            }
        }
        report.push(CheckRecord::bounded("deriv_v", "Lemma DerivV", worst, tol.deriv_v));
    }
    if cfg.suite_enabled("reflection") {
        let r = reflect_surface(&s);
        let mut worst: f64 = 0.0;
        let mut label_flips = 0usize;
        for (p, n) in pgs.iter().zip(&nodes) {
            let pr = match point_geometry(&r, *n) {
                Ok(v) => v,
                Err(e) => return Ok(Outcome::violated(report, surface_violation(&e))),
            };
            worst = worst.max(frame_distance(&pr.w_frame, &p.w_frame.neg()));
            let up = cone_classify(&p.w_frame)?.label;
            let down = cone_classify(&pr.w_frame)?.label;
            if down != up.mirror() {
                label_flips += 1;
            }
        }
        let mut rec = CheckRecord::bounded("reflection", "reflection parity", worst, tol.reflection)
            .with("label_mismatches", label_flips.to_string());
        rec.pass &= label_flips == 0;
        report.push(rec);
    }

    let gate = curvature_gate(&s, &nodes).map_err(|e| InputError::Parse(e.to_string()))?;
    report.push(gate_record(gate.min_sigma2, gate.passed, gate.uniform_label));
    if !gate.passed {
        let reason = format!(
            "GateFailed: min sigma2 = {:e}, cone label = {}",
            gate.min_sigma2,
            gate.uniform_label.map_or("mixed", label_name)
        );
        return Ok(Outcome::violated(report, reason));
    }
    Ok(Outcome::checked(report))
}

fn build_pair(cfg: &ExperimentConfig) -> Result<Result<IsometricPair, String>, InputError> {
    let iso_cfg = cfg.isometry.as_ref().expect("validated pair config");
    let m = GraphSurface::analytic(cfg.surface.clone());
    if iso_cfg.kind == IsometryChoice::Identity {
        let mt = cfg.surface_tilde.clone().map_or_else(|| m.clone(), GraphSurface::analytic);
        return Ok(Ok(IsometricPair::with_identity(m, mt)));
    }
    let iso = iso_cfg.build()?;
    Ok(IsometricPair::from_isometry(m, &iso, cfg.regraph).map_err(|e| surface_violation(&e)))
}

fn integral_violation(e: IntegralError) -> String {
    match e {
        IntegralError::GateFailed(msg) => format!("GateFailed: {msg}"),
        IntegralError::Surface(s) => surface_violation(&s),
        other => other.to_string(),
    }
}

pub fn verify_identities(cfg: &ExperimentConfig) -> Result<Outcome, InputError> {
    cfg.validate_for(Command::VerifyIdentities)?;
    let mut report = RunReport::new("verify-identities", cfg.echo());
    let tol = &cfg.tolerances.core;
    let rule = QuadratureRule::gauss_sphere(cfg.quadrature.0, cfg.quadrature.1);
    let pair = match build_pair(cfg)? {
        Ok(p) => p,
        Err(reason) => return Ok(Outcome::violated(report, reason)),
    };
    let samples = match integrals::gated_samples(&pair, &rule, tol) {
        Ok(s) => s,
        Err(e) => {
            if let Ok(raw) = PairSamples::evaluate(&pair, &rule) {
                if let Ok(g) = raw.gate() {
                    report.push(gate_record(g.min_sigma2.min(g.min_sigma2_tilde), false, g.label));
                }
            }
            return Ok(Outcome::violated(report, integral_violation(e)));
        }
    };
    report.push(
        CheckRecord::bounded("metric_match", "isometric pair", samples.max_metric_mismatch(), tol.metric)
            .with("landing_error", fmt_num(samples.max_landing_error())),
    );
    if cfg.suite_enabled("identities") {
        for label in integrals::IdentityLabel::ALL {
            let r = samples.identity_report(label, tol);
            let anchor = match label {
                integrals::IdentityLabel::A => "Theorem IntegralEqn (a)",
                integrals::IdentityLabel::B => "Theorem IntegralEqn (b)",
                integrals::IdentityLabel::C => "Theorem IntegralEqn (c)",
                integrals::IdentityLabel::D => "Theorem IntegralEqn (d)",
            };
            let mut rec =
                CheckRecord::bounded(format!("identity_{}", label.letter()), anchor, r.residual_rel, r.tolerance)
                    .with("lhs", fmt_num(r.lhs))
                    .with("rhs", fmt_num(r.rhs))
                    .with("scale", fmt_num(r.scale))
                    .with("proof_step_max", fmt_num(r.proof_step_max))
                    .with("statement_sign_residual", fmt_num(r.residual_rel_statement));
            rec.pass = r.pass;
            report.push(rec);
        }
    }
    if cfg.suite_enabled("tilde_symmetry") {
        let t = samples.tilde_symmetry(tol);
        let mut rec = CheckRecord::bounded("tilde_symmetry", "Theorem IntegralSym", t.residual_rel, t.tolerance)
            .with("forward", fmt_num(t.forward))
            .with("swapped", fmt_num(t.swapped));
        rec.pass = t.pass;
        report.push(rec);
    }
    Ok(Outcome::checked(report))
}

fn verdict_name(v: RigidityVerdict) -> &'static str {
    match v {
        RigidityVerdict::Rigid => "Rigid",
        RigidityVerdict::NotRigid => "NotRigid",
        RigidityVerdict::NotIsometric => "NotIsometric",
        RigidityVerdict::GateFailed => "GateFailed",
    }
}

pub fn rigidity(cfg: &ExperimentConfig) -> Result<Outcome, InputError> {
    cfg.validate_for(Command::Rigidity)?;
    let mut report = RunReport::new("rigidity", cfg.echo());
    let tol = &cfg.tolerances.core;
    let rule = QuadratureRule::gauss_sphere(cfg.quadrature.0, cfg.quadrature.1);
    let pair = match build_pair(cfg)? {
        Ok(p) => p,
        Err(reason) => return Ok(Outcome::violated(report, reason)),
    };
    let r = match integrals::rigidity_experiment(&pair, &rule, tol) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::violated(report, integral_violation(e))),
    };
    report.notes.push(format!("verdict {}", verdict_name(r.verdict)));
    if r.verdict == RigidityVerdict::GateFailed {
        report.push(
            gate_record(r.gate.min_sigma2.min(r.gate.min_sigma2_tilde), false, r.gate.label)
                .with("min_rho", fmt_num(r.gate.min_rho.min(r.gate.min_rho_tilde))),
        );
        let reason = format!("GateFailed: surface must lie where rho > 0 with sigma2 > 0 ({})", r.gate.describe());
        return Ok(Outcome::violated(report, reason));
    }
    report.push(
        CheckRecord::bounded("metric_match", "isometric pair", r.max_metric_mismatch, tol.metric)
            .with("verdict", verdict_name(r.verdict)),
    );
    report.push(
        CheckRecord::bounded("rigidity_integral", "Eq Rigidity2", r.integral_rel, tol.rigidity_rel)
            .with("integral", fmt_num(r.integral_value))
            .with("area", fmt_num(r.area))
            .with("sign_factor_min", fmt_num(r.sign_factor_min))
            .with("gap_min", fmt_num(r.gap_min))
            .with("garding_min", fmt_num(r.garding_min)),
    );
    report.push(CheckRecord::bounded("w_match", "shape operators agree", r.max_w_mismatch, tol.w_mismatch));
    let mut verdict = CheckRecord::bounded("verdict", "rigidity", 0.0, 0.0).with("verdict", verdict_name(r.verdict));
    verdict.pass = r.verdict == RigidityVerdict::Rigid;
    report.push(verdict);
    Ok(Outcome::checked(report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_formats() {
        assert_eq!(parse_matrix("diag 1 -2").unwrap(), SymOperator::diag(&[1.0, -2.0]).unwrap());
        assert_eq!(parse_matrix("identity 3").unwrap(), SymOperator::identity(3).unwrap());
        assert_eq!(
            parse_matrix("1 0.5; 0.5 2").unwrap(),
            SymOperator::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap()
        );
        assert!(matches!(parse_matrix("1 2; 3 4"), Err(InputError::Symfun(SymfunError::NotSymmetric { .. }))));
        assert!(matches!(parse_matrix("1 2; 3"), Err(InputError::Symfun(SymfunError::NotSquare { .. }))));
        assert!(matches!(parse_matrix("diag 1 x"), Err(InputError::Parse(_))));
    }

    #[test]
    fn random_cone_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=6 {
            let w = random_plus_cone(&mut rng, n).unwrap();
            assert_eq!(cone_classify(&w).unwrap().label, ConeLabel::PlusCone);
        }
    }
}
