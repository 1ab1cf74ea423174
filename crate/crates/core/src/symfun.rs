//! Elementary symmetric functions of self-adjoint operators, the σ₂
//! hyperbolicity cones, the polarized form σ₁,₁ and the Gårding gap.
//!
//! Everything here works on the matrix entries of an operator in an
//! orthonormal frame. σ₂ is computed from principal 2×2 minors rather than
//! from eigenvalues, which keeps it exact on rational input.

use nalgebra::DMatrix;
use thiserror::Error;

/// Largest operator dimension supported.
pub const MAX_DIM: usize = 8;

/// Absolute tolerance on cone roots for the `Boundary` label.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Relative tolerance used to declare Gårding equality.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Relative slack on the σ₂ discriminant before declaring non-hyperbolicity.
pub const DISCRIMINANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymfunError {
    #[error("operator dimension {0} outside supported range 2..={MAX_DIM}")]
    BadDimension(usize),
    #[error("operator is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("operator is not symmetric: |w[{row}][{col}] - w[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("sigma_2 restricted to W + tI has discriminant {discriminant:e} (scale {scale:e})")]
    NonHyperbolic { discriminant: f64, scale: f64 },
    #[error("{which} operator is not in the positive cone (label {label:?})")]
    NotInCone { which: &'static str, label: ConeLabel },
}

/// A real symmetric operator written in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOperator {
    m: DMatrix<f64>,
}

impl SymOperator {
    /// Builds an operator from a matrix, rejecting anything that is not
    /// exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self, SymfunError> {
        Self::check_shape(&m)?;
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if !m[(i, j)].is_finite() {
                    return Err(SymfunError::NonFinite { row: i, col: j });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if diff != 0.0 {
                    return Err(SymfunError::NotSymmetric { row: i, col: j, diff });
                }
            }
        }
        Ok(Self { m })
    }

    /// Builds an operator from a nearly symmetric matrix by averaging it with
    /// its transpose.
    pub fn symmetrized(m: DMatrix<f64>) -> Result<Self, SymfunError> {
        Self::check_shape(&m)?;
        let sym = (&m + m.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SymfunError> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(SymfunError::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diag(values: &[f64]) -> Result<Self, SymfunError> {
        let n = values.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    pub fn identity(n: usize) -> Result<Self, SymfunError> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Result<Self, SymfunError> {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn from_2x2(w: [[f64; 2]; 2]) -> Result<Self, SymfunError> {
        Self::symmetrized(DMatrix::from_fn(2, 2, |i, j| w[i][j]))
    }

    fn check_shape(m: &DMatrix<f64>) -> Result<(), SymfunError> {
        if m.nrows() != m.ncols() {
            return Err(SymfunError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !(2..=MAX_DIM).contains(&m.nrows()) {
            return Err(SymfunError::BadDimension(m.nrows()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn shifted(&self, t: f64) -> Self {
        let n = self.dim();
        Self { m: &self.m + DMatrix::identity(n, n) * t }
    }

    pub fn neg(&self) -> Self {
        Self { m: -&self.m }
    }

    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }
}

/// Trace of `w`.
pub fn sigma1(w: &SymOperator) -> f64 {
    w.m.trace()
}

/// Second elementary symmetric function, summed over principal 2×2 minors:
/// `Σ_{i<j} w_ii w_jj − w_ij w_ji`.
pub fn sigma2(w: &SymOperator) -> f64 {
    let n = w.dim();
    let m = &w.m;
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        }
    }
    acc
}

/// All elementary symmetric functions `σ₀ … σ_n` from the Faddeev–LeVerrier
/// recursion on the characteristic polynomial.
pub fn sigma_all(w: &SymOperator) -> Vec<f64> {
    let n = w.dim();
    let a = &w.m;
    let id = DMatrix::<f64>::identity(n, n);
    // det(tI − A) = Σ_k c_k t^k with c_n = 1.
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        mk = a * &mk + &id * c[n - k + 1];
        c[n - k] = -(a * &mk).trace() / k as f64;
    }
    // det(tI − A) = Σ_k (−1)^k σ_k t^{n−k}
    (0..=n).map(|k| if k % 2 == 0 { c[n - k] } else { -c[n - k] }).collect()
}

/// Matrix of partial derivatives `∂σ₂/∂w_ij`: the diagonal holds
/// `Σ_{k≠i} w_kk` and the off-diagonal entries are `−w_ji`.
pub fn d_sigma2(w: &SymOperator) -> DMatrix<f64> {
    let n = w.dim();
    let tr = sigma1(w);
    DMatrix::from_fn(n, n, |i, j| if i == j { tr - w.m[(i, i)] } else { -w.m[(j, i)] })
}

/// The polarized form of σ₂: `½ Σ_ij ∂σ₂/∂w_ij(W) · w̃_ij`.
pub fn sigma11(w: &SymOperator, wt: &SymOperator) -> Result<f64, SymfunError> {
    if w.dim() != wt.dim() {
        return Err(SymfunError::DimensionMismatch { left: w.dim(), right: wt.dim() });
    }
    let d = d_sigma2(w);
    Ok(0.5 * d.component_mul(&wt.m).sum())
}

/// Coefficients (constant term first) of the polynomial `t ↦ σ_k(W + tI)`.
///
/// Shifting every eigenvalue by `t` gives
/// `σ_k(W + tI) = Σ_{j≤k} C(n−j, k−j) σ_j(W) t^{k−j}`.
pub fn shifted_sigma_coeffs(w: &SymOperator, k: usize) -> Vec<f64> {
    let n = w.dim();
    assert!(k <= n, "σ_k needs k <= n");
    let sig = sigma_all(w);
    let mut coeffs = vec![0.0; k + 1];
    for (j, s) in sig.iter().enumerate().take(k + 1) {
        coeffs[k - j] = binomial(n - j, k - j) * s;
    }
    coeffs
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeLabel {
    /// Roots of `t ↦ σ₂(W + tI)` are all negative: the cone containing `I`.
    PlusCone,
    /// Roots are all positive: the cone containing `−I`.
    MinusCone,
    Outside,
    Boundary,
}

impl ConeLabel {
    pub fn mirror(self) -> Self {
        match self {
            ConeLabel::PlusCone => ConeLabel::MinusCone,
            ConeLabel::MinusCone => ConeLabel::PlusCone,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReport {
    /// Ordered roots `t₁ ≤ t₂` of `t ↦ σ₂(W + tI)`.
    pub roots: (f64, f64),
    pub label: ConeLabel,
}

/// Locates `W` relative to the σ₂ hyperbolicity cones of `±I`.
///
/// Along the line `W + tI` σ₂ is the quadratic
/// `C(n,2) t² + (n−1) σ₁(W) t + σ₂(W)`.
pub fn cone_classify(w: &SymOperator) -> Result<ConeReport, SymfunError> {
    let n = w.dim() as f64;
    let a = n * (n - 1.0) / 2.0;
    let b = (n - 1.0) * sigma1(w);
    let c = sigma2(w);
    let mut disc = b * b - 4.0 * a * c;
    let scale = b * b + (4.0 * a * c).abs();
    if disc < 0.0 {
        if disc < -DISCRIMINANT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(SymfunError::NonHyperbolic { discriminant: disc, scale });
        }
        disc = 0.0;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        // b = 0 and disc = 0 forces c = 0: double root at the origin.
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    let roots = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let label = if roots.0.abs() <= BOUNDARY_TOL || roots.1.abs() <= BOUNDARY_TOL {
        ConeLabel::Boundary
    } else if roots.1 < 0.0 {
        ConeLabel::PlusCone
    } else if roots.0 > 0.0 {
        ConeLabel::MinusCone
    } else {
        ConeLabel::Outside
    };
    Ok(ConeReport { roots, label })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GardingGap {
    pub sigma11: f64,
    /// `(σ₂(W) σ₂(W̃))^{1/2}`.
    pub geo_mean: f64,
    pub gap: f64,
    pub equality: bool,
    /// Scalar `c` with `W̃ ≈ c W`, recovered from the traces.
    pub proportionality: f64,
    /// `‖W̃ − c W‖_F / ‖W̃‖_F`.
    pub proportionality_residual: f64,
}

/// Gårding's inequality for σ₂ on a pair in the positive cone.
pub fn garding_gap(w: &SymOperator, wt: &SymOperator) -> Result<GardingGap, SymfunError> {
    if w.dim() != wt.dim() {
        return Err(SymfunError::DimensionMismatch { left: w.dim(), right: wt.dim() });
    }
    for (which, op) in [("first", w), ("second", wt)] {
        let label = cone_classify(op)?.label;
        if label != ConeLabel::PlusCone {
            return Err(SymfunError::NotInCone { which, label });
        }
    }
    let s11 = sigma11(w, wt)?;
    let geo_mean = (sigma2(w) * sigma2(wt)).sqrt();
    let gap = s11 - geo_mean;
    let equality = gap <= EQUALITY_TOL * geo_mean.abs().max(1.0);

    let s1 = sigma1(w);
    let c = if s1 != 0.0 {
        sigma1(wt) / s1
    } else {
        let denom = w.m.norm_squared();
        if denom > 0.0 {
            w.m.dot(&wt.m) / denom
        } else {
            0.0
        }
    };
    let resid = (&wt.m - &w.m * c).norm() / wt.m.norm().max(f64::MIN_POSITIVE);
    Ok(GardingGap { sigma11: s11, geo_mean, gap, equality, proportionality: c, proportionality_residual: resid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym(rows: &[&[f64]]) -> SymOperator {
        SymOperator::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sigma1_examples() {
        assert_eq!(sigma1(&SymOperator::diag(&[1.0, 2.0, 3.0]).unwrap()), 6.0);
        assert_eq!(sigma1(&SymOperator::identity(5).unwrap()), 5.0);
        assert_eq!(sigma1(&SymOperator::zeros(3).unwrap()), 0.0);
    }

    #[test]
    fn sigma2_examples() {
        assert_eq!(sigma2(&SymOperator::identity(3).unwrap()), 3.0);
        assert_eq!(sigma2(&SymOperator::diag(&[1.0, 2.0, 3.0]).unwrap()), 11.0);
        assert_eq!(sigma2(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])), -1.0);
    }

    #[test]
    fn sigma_all_examples() {
        let v = sigma_all(&SymOperator::diag(&[1.0, 2.0, 3.0]).unwrap());
        for (a, b) in v.iter().zip([1.0, 6.0, 11.0, 6.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        let v = sigma_all(&SymOperator::identity(2).unwrap());
        assert_eq!(v, vec![1.0, 2.0, 1.0]);
        let v = sigma_all(&SymOperator::zeros(2).unwrap());
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn d_sigma2_examples() {
        let d = d_sigma2(&SymOperator::diag(&[1.0, 2.0, 3.0]).unwrap());
        assert_eq!(d[(0, 0)], 5.0);
        assert_eq!(d[(0, 1)], 0.0);
        assert_eq!(d[(2, 2)], 3.0);
        let d = d_sigma2(&SymOperator::identity(4).unwrap());
        assert_eq!(d, DMatrix::identity(4, 4) * 3.0);
        let d = d_sigma2(&sym(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
    }

    #[test]
    fn sigma11_examples() {
        let i2 = SymOperator::identity(2).unwrap();
        let d21 = SymOperator::diag(&[2.0, 1.0]).unwrap();
        assert_eq!(sigma11(&i2, &d21).unwrap(), 1.5);
        let a = SymOperator::diag(&[1.0, 2.0]).unwrap();
        let b = SymOperator::diag(&[3.0, 4.0]).unwrap();
        assert_eq!(sigma11(&a, &b).unwrap(), 5.0);
        let w = sym(&[&[1.0, 0.5, 0.0], &[0.5, -2.0, 1.0], &[0.0, 1.0, 3.0]]);
        assert_relative_eq!(sigma11(&w, &w).unwrap(), sigma2(&w), max_relative = 1e-12);
    }

    #[test]
    fn sigma11_dimension_mismatch() {
        let a = SymOperator::identity(2).unwrap();
        let b = SymOperator::identity(3).unwrap();
        assert!(matches!(sigma11(&a, &b), Err(SymfunError::DimensionMismatch { .. })));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            SymOperator::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]),
            Err(SymfunError::NotSymmetric { .. })
        ));
        assert!(matches!(
            SymOperator::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]),
            Err(SymfunError::NonFinite { .. })
        ));
        assert!(matches!(SymOperator::identity(1), Err(SymfunError::BadDimension(1))));
        assert!(matches!(SymOperator::identity(9), Err(SymfunError::BadDimension(9))));
    }

    #[test]
    fn cone_examples() {
        let r = cone_classify(&SymOperator::identity(2).unwrap()).unwrap();
        assert_eq!(r.roots, (-1.0, -1.0));
        assert_eq!(r.label, ConeLabel::PlusCone);
        let r = cone_classify(&SymOperator::identity(2).unwrap().neg()).unwrap();
        assert_eq!(r.roots, (1.0, 1.0));
        assert_eq!(r.label, ConeLabel::MinusCone);
        let r = cone_classify(&SymOperator::diag(&[1.0, -2.0]).unwrap()).unwrap();
        assert_relative_eq!(r.roots.0, -1.0, epsilon = 1e-15);
        assert_relative_eq!(r.roots.1, 2.0, epsilon = 1e-15);
        assert_eq!(r.label, ConeLabel::Outside);
        let r = cone_classify(&SymOperator::diag(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.label, ConeLabel::Boundary);
    }

    #[test]
    fn garding_examples() {
        let i2 = SymOperator::identity(2).unwrap();
        let g = garding_gap(&i2, &SymOperator::diag(&[2.0, 1.0]).unwrap()).unwrap();
        // 1.5 − √2 from the minor formula for σ₂ and the polarized form.
        assert_eq!(g.sigma11, 1.5);
        assert_relative_eq!(g.geo_mean, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.gap, 0.085_786_437_626_904_9, epsilon = 1e-15);
        assert!(!g.equality);

        let g = garding_gap(&i2, &SymOperator::diag(&[1.0, 2.0]).unwrap()).unwrap();
        assert_relative_eq!(g.gap, 1.5 - 2f64.sqrt(), epsilon = 1e-15);
        assert!(!g.equality);

        let w = sym(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let g = garding_gap(&w, &w.scaled(3.0)).unwrap();
        assert!(g.gap.abs() < 1e-13);
        assert!(g.equality);
        assert_relative_eq!(g.proportionality, 3.0, epsilon = 1e-14);
        assert!(g.proportionality_residual < 1e-14);
    }

    #[test]
    fn garding_requires_plus_cone() {
        let i2 = SymOperator::identity(2).unwrap();
        let out = SymOperator::diag(&[1.0, -2.0]).unwrap();
        assert!(matches!(garding_gap(&i2, &out), Err(SymfunError::NotInCone { which: "second", .. })));
        assert!(matches!(garding_gap(&i2.neg(), &i2), Err(SymfunError::NotInCone { which: "first", .. })));
    }

    fn principal_minor_sum(w: &SymOperator, k: usize) -> f64 {
        // Brute force: σ_k is the sum of all k×k principal minors.
        let n = w.dim();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub = DMatrix::from_fn(k, k, |a, b| w.get(idx[a], idx[b]));
            total += if k == 0 { 1.0 } else { sub.determinant() };
        }
        total
    }

    fn sym_strategy() -> impl Strategy<Value = SymOperator> {
        (2usize..=6).prop_flat_map(|n| {
            proptest::collection::vec(-5.0f64..5.0, n * n)
                .prop_map(move |v| SymOperator::symmetrized(DMatrix::from_row_slice(n, n, &v)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn sigma_all_matches_principal_minors(w in sym_strategy()) {
            let s = sigma_all(&w);
            for k in 0..=w.dim() {
                let brute = principal_minor_sum(&w, k);
                prop_assert!((s[k] - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
            }
            prop_assert!((s[2] - sigma2(&w)).abs() <= 1e-12 * sigma2(&w).abs().max(1.0) * 10.0);
        }

        #[test]
        fn sigma2_trace_identity(w in sym_strategy()) {
            let s1 = sigma1(&w);
            let tr_sq = (w.matrix() * w.matrix()).trace();
            let alt = 0.5 * (s1 * s1 - tr_sq);
            prop_assert!((sigma2(&w) - alt).abs() <= 1e-12 * (s1 * s1 + tr_sq).max(1.0));
        }

        #[test]
        fn sigma11_is_symmetric_and_bilinear(a in sym_strategy(), seed in 0u64..1000) {
            let n = a.dim();
            let b = SymOperator::symmetrized(DMatrix::from_fn(n, n, |i, j| {
                (((i * 7 + j * 13) as u64 + seed) % 11) as f64 - 5.0
            })).unwrap();
            let ab = sigma11(&a, &b).unwrap();
            let ba = sigma11(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
            let a2 = sigma11(&a.scaled(2.0), &b).unwrap();
            prop_assert!((a2 - 2.0 * ab).abs() <= 1e-12 * ab.abs().max(1.0));
        }

        #[test]
        fn shifted_coeffs_evaluate_sigma_k(w in sym_strategy(), t in -3.0f64..3.0) {
            let shifted = sigma_all(&w.shifted(t));
            for k in 0..=w.dim() {
                let c = shifted_sigma_coeffs(&w, k);
                let val: f64 = c.iter().rev().fold(0.0, |acc, x| acc * t + x);
                prop_assert!((val - shifted[k]).abs() <= 1e-8 * (1.0 + shifted[k].abs()));
            }
        }

        #[test]
        fn cone_label_mirrors_under_negation(w in sym_strategy()) {
            let r = cone_classify(&w).unwrap();
            let m = cone_classify(&w.neg()).unwrap();
            prop_assert_eq!(m.label, r.label.mirror());
        }
    }
}
