//! Grid-evaluated identity checks on scattering data.
//!
//! Identities that only hold for a symmetry class are gated: the system is
//! first classified, and a check whose gate is not met reports
//! [`CheckStatus::NotApplicable`] instead of failing.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::symmetry::{
    classify_system, sigma_and_signs, transform_transfer, usable_data, SymmetryOp, SymmetryVerdict,
    DEFAULT_SYMMETRY_TOL,
};
use crate::transfer::{
    det_s, mat_mul, negative_k_data, s_eigenvalues, s_matrix, SConvention, ScatteringData,
    TransferMatrix,
};
use crate::{ScatteringSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub identity: String,
    pub grid: Vec<f64>,
    /// `None` when no grid point was evaluated.
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: f64,
    /// True exactly when `max_residual <= tolerance`.
    pub passed: bool,
    pub skipped_points: usize,
    pub status: CheckStatus,
    /// Why the check was not applicable, if it was not.
    pub note: Option<String>,
}

impl ResidualReport {
    fn from_residuals(
        identity: &str,
        grid: &[f64],
        tolerance: f64,
        residuals: Vec<Option<f64>>,
    ) -> Self {
        let skipped_points = residuals.iter().filter(|r| r.is_none()).count();
        let values: Vec<f64> = residuals.into_iter().flatten().collect();
        if values.is_empty() {
            return Self::not_applicable(identity, grid, tolerance, "no usable grid point");
        }
        let max =
            values.iter().copied().fold(
                0.0,
                |a: f64, b| {
                    if b.is_nan() {
                        f64::INFINITY
                    } else {
                        a.max(b)
                    }
                },
            );
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let passed = max <= tolerance;
        Self {
            identity: identity.to_string(),
            grid: grid.to_vec(),
            max_residual: Some(max),
            mean_residual: Some(mean),
            tolerance,
            passed,
            skipped_points,
            status: if passed {
                CheckStatus::Passed
            } else {
                CheckStatus::Failed
            },
            note: None,
        }
    }

    fn not_applicable(identity: &str, grid: &[f64], tolerance: f64, why: &str) -> Self {
        Self {
            identity: identity.to_string(),
            grid: grid.to_vec(),
            max_residual: None,
            mean_residual: None,
            tolerance,
            passed: false,
            skipped_points: 0,
            status: CheckStatus::NotApplicable,
            note: Some(why.to_string()),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == CheckStatus::Failed
    }
}

/// Applies `f` at every usable grid point; `None` marks a skipped point.
fn per_point<S, F>(system: &S, grid: &[f64], f: F) -> Vec<Option<f64>>
where
    S: ScatteringSystem + ?Sized,
    F: Fn(f64, &TransferMatrix, &ScatteringData) -> Option<f64> + Sync,
{
    grid.par_iter()
        .map(|&k| {
            let (m, d) = usable_data(system.transfer_matrix(C64::new(k, 0.0)))?;
            f(k, &m, &d)
        })
        .collect()
}

fn rel(x: C64, scale: f64) -> f64 {
    x.norm() / scale.max(1.0)
}

pub const DEFAULT_IDENTITY_TOL: f64 = 1e-10;
pub const DEFAULT_PT_TOL: f64 = 1e-8;

/// `t_l = t_r` and `det M = 1`; residuals relative to `max(1, |t|)`.
pub fn check_reciprocity<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    let r = per_point(system, grid, |_, m, d| {
        let t = rel(d.t_l - d.t_r, d.t_l.norm());
        let det = (m.det() - 1.0).norm();
        Some(t.max(det))
    });
    ResidualReport::from_residuals("reciprocity", grid, tol, r)
}

/// `det M` equals the value the system predicts independently (the product
/// of matching-matrix determinants for point interactions, 1 for potentials).
pub fn check_determinant_product<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    let r = per_point(system, grid, |k, m, _| {
        let expected = system.expected_det(C64::new(k, 0.0))?.ok()?;
        Some(rel(m.det() - expected, expected.norm()))
    });
    ResidualReport::from_residuals("determinant_product", grid, tol, r)
}

fn gate(
    system: &(impl ScatteringSystem + ?Sized),
    grid: &[f64],
    op: SymmetryOp,
) -> Option<SymmetryVerdict> {
    classify_system(system, grid, op, DEFAULT_SYMMETRY_TOL)
        .ok()
        .filter(|v| v.holds)
}

/// `|r|² + |t|² = 1` for reciprocal transmission, otherwise
/// `|r_l|² = |r_r|² = 1 − ε_lε_r|t_l t_r|`. Requires time-reversal symmetry.
pub fn check_unitarity<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    const NAME: &str = "unitarity";
    if gate(system, grid, SymmetryOp::TimeReversal).is_none() {
        return ResidualReport::not_applicable(NAME, grid, tol, "system is not T-symmetric");
    }
    let r = per_point(system, grid, |_, _, d| {
        let (rl2, rr2) = (d.r_l.norm_sqr(), d.r_r.norm_sqr());
        let tt = (d.t_l * d.t_r).norm();
        let scale = rl2.max(tt).max(1.0);
        if (d.t_l - d.t_r).norm() <= 1e-8 * d.t_l.norm().max(1.0) {
            let t2 = d.t_l.norm_sqr();
            Some(((rl2 + t2 - 1.0).abs().max((rr2 + t2 - 1.0).abs())) / scale)
        } else {
            let s = sigma_and_signs(d, 1e-8 * scale).ok()?;
            if !(s.eps_l.is_definite() && s.eps_r.is_definite()) {
                return None;
            }
            let sign = s.eps_l.value() * s.eps_r.value();
            Some(((rl2 - rr2).abs().max((rl2 + sign * tt - 1.0).abs())) / scale)
        }
    });
    ResidualReport::from_residuals(NAME, grid, tol, r)
}

/// `ε_lε_r|t_l t_r| + η_lη_r|r_l r_r| = 1` and `S†σ₁Sσ₁ = I`. Requires PT
/// symmetry about the origin.
pub fn check_pt_pseudo_unitarity<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    const NAME: &str = "pt_pseudo_unitarity";
    if gate(system, grid, SymmetryOp::PT).is_none() {
        return ResidualReport::not_applicable(NAME, grid, tol, "system is not PT-symmetric");
    }
    let r = per_point(system, grid, |_, _, d| {
        let scale = d
            .amplitudes()
            .iter()
            .map(|a| a.norm_sqr())
            .fold(1.0, f64::max);
        let signs_res = match sigma_and_signs(d, 1e-8 * scale) {
            Ok(s) => {
                let lhs = s.eps_l.value() * s.eps_r.value() * (d.t_l * d.t_r).norm()
                    + s.eta_l.value() * s.eta_r.value() * (d.r_l * d.r_r).norm();
                (lhs - 1.0).abs() / scale
            }
            Err(_) => (det_s(d).norm() - 1.0).abs() / scale,
        };
        Some(signs_res.max(pseudo_unitarity_residual(d) / scale))
    });
    ResidualReport::from_residuals(NAME, grid, tol, r)
}

/// Largest entry of `S†σ₁Sσ₁ − I`.
pub fn pseudo_unitarity_residual(d: &ScatteringData) -> f64 {
    let s = s_matrix(d, SConvention::S1).entries;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let sigma1 = [[zero, one], [one, zero]];
    let s_dag = [
        [s[0][0].conj(), s[1][0].conj()],
        [s[0][1].conj(), s[1][1].conj()],
    ];
    let p = mat_mul(&mat_mul(&s_dag, &sigma1), &mat_mul(&s, &sigma1));
    [p[0][0] - one, p[0][1], p[1][0], p[1][1] - one]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `|r_{l/r}(−k)| = |r_{r/l}(k)|`, `|t_{l/r}(−k)| = |t_{l/r}(k)|` and
/// `r_{l/r}(−k) r_{l/r}(k) + t_{l/r}(−k) t_{r/l}(k) = 1`, with the data at `−k`
/// obtained from the data at `k`. Requires `|det S| = 1` on the grid.
pub fn check_modulus_relations<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    const NAME: &str = "modulus_relations";
    let off_unit = per_point(system, grid, |_, _, d| {
        let scale = d.t_l.norm().max(d.r_l.norm()).max(1.0);
        Some((det_s(d).norm() - 1.0).abs() / scale)
    });
    if off_unit.iter().flatten().any(|dev| *dev >= tol) {
        return ResidualReport::not_applicable(NAME, grid, tol, "|det S| differs from 1");
    }
    let r = per_point(system, grid, |_, _, d| {
        let n = negative_k_data(d).ok()?;
        let scale = d.amplitudes().iter().map(|a| a.norm()).fold(1.0, f64::max);
        let x1 = [
            n.r_l.norm() - d.r_r.norm(),
            n.r_r.norm() - d.r_l.norm(),
            n.t_l.norm() - d.t_l.norm(),
            n.t_r.norm() - d.t_r.norm(),
        ]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
        let x2 = (n.r_l * d.r_l + n.t_l * d.t_r - 1.0)
            .norm()
            .max((n.r_r * d.r_r + n.t_r * d.t_l - 1.0).norm());
        Some(x1.max(x2) / scale)
    });
    ResidualReport::from_residuals(NAME, grid, tol, r)
}

/// Determinant laws of the P, T, PT and translation transforms.
pub fn check_transform_determinants<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    let r = per_point(system, grid, |_, m, _| {
        let det = m.det();
        let laws = [
            (SymmetryOp::Parity, det.inv()),
            (SymmetryOp::TimeReversal, det.conj()),
            (SymmetryOp::PT, det.conj().inv()),
            (SymmetryOp::Translation(1.0), det),
        ];
        let mut worst: f64 = 0.0;
        for (op, want) in laws {
            let got = transform_transfer(m, op).ok()?.det();
            worst = worst.max(rel(got - want, want.norm()));
        }
        Some(worst)
    });
    ResidualReport::from_residuals("transform_determinants", grid, tol, r)
}

/// For time-reversal-symmetric systems: `|τ| ≤ 1` with unimodular S-matrix
/// eigenvalues, or `|τ| > 1` with `𝔰₋ = 1/𝔰₊*`.
pub fn check_s_eigenvalue_dichotomy<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    tol: f64,
) -> ResidualReport {
    const NAME: &str = "s_eigenvalue_dichotomy";
    if gate(system, grid, SymmetryOp::TimeReversal).is_none() {
        return ResidualReport::not_applicable(NAME, grid, tol, "system is not T-symmetric");
    }
    let r = per_point(system, grid, |_, _, d| {
        let scale = d.t_l.norm().max(d.t_r.norm()).max(1.0);
        let s = sigma_and_signs(d, 1e-8 * scale).ok()?;
        if !(s.eps_l.is_definite() || s.eps_r.is_definite()) {
            return None;
        }
        let tau = s.tau(d);
        let (sp, sm) = s_eigenvalues(d);
        if tau.abs() <= 1.0 {
            Some((sp.norm() - 1.0).abs().max((sm.norm() - 1.0).abs()))
        } else {
            Some((sm * sp.conj() - 1.0).norm())
        }
    });
    ResidualReport::from_residuals(NAME, grid, tol, r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Overrides every check's default tolerance when set.
    pub tol: Option<f64>,
    pub symmetry_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: None,
            symmetry_tol: DEFAULT_SYMMETRY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub verdicts: Vec<SymmetryVerdict>,
    pub reports: Vec<ResidualReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        !self.reports.iter().any(ResidualReport::is_failure)
    }
}

/// Symmetry classification under P, T and PT followed by every identity
/// check, in a fixed order.
pub fn run_all<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    opts: &VerifyOptions,
) -> VerifyReport {
    let tol = |default: f64| opts.tol.unwrap_or(default);
    let verdicts = [SymmetryOp::Parity, SymmetryOp::TimeReversal, SymmetryOp::PT]
        .iter()
        .filter_map(|op| classify_system(system, grid, *op, opts.symmetry_tol).ok())
        .collect();

    let potential_like = grid
        .iter()
        .all(|&k| match system.expected_det(C64::new(k, 0.0)) {
            Some(Ok(d)) => (d - 1.0).norm() == 0.0,
            Some(Err(_)) => true,
            None => true,
        });
    let reciprocity = if potential_like {
        check_reciprocity(system, grid, tol(DEFAULT_IDENTITY_TOL))
    } else {
        ResidualReport::not_applicable(
            "reciprocity",
            grid,
            tol(DEFAULT_IDENTITY_TOL),
            "matching matrices with det B != 1 break reciprocity by construction",
        )
    };
    let reports = vec![
        reciprocity,
        check_determinant_product(system, grid, tol(DEFAULT_IDENTITY_TOL)),
        check_unitarity(system, grid, tol(DEFAULT_IDENTITY_TOL)),
        check_pt_pseudo_unitarity(system, grid, tol(DEFAULT_PT_TOL)),
        check_modulus_relations(system, grid, tol(DEFAULT_IDENTITY_TOL)),
        check_transform_determinants(system, grid, tol(DEFAULT_IDENTITY_TOL)),
        check_s_eigenvalue_dichotomy(system, grid, tol(DEFAULT_PT_TOL)),
    ];
    VerifyReport { verdicts, reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_grid;
    use crate::models::{MatchingMatrix, PointInteraction, PotentialModel};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn point(b: [[f64; 2]; 2]) -> PotentialModel {
        let b = [
            [c(b[0][0], 0.0), c(b[0][1], 0.0)],
            [c(b[1][0], 0.0), c(b[1][1], 0.0)],
        ];
        PotentialModel::PointInteractions {
            points: vec![PointInteraction {
                center: 0.0,
                matrix: MatchingMatrix::Constant(b),
            }],
        }
    }

    #[test]
    fn real_barrier_passes_everything_applicable() {
        let model = PotentialModel::barrier(c(5.0, 0.0), 1.0);
        let report = run_all(&model, &default_grid(1.0), &VerifyOptions::default());
        assert!(report.all_passed(), "{:#?}", report.reports);
        let unitarity = &report.reports[2];
        assert_eq!(unitarity.status, CheckStatus::Passed);
        assert!(unitarity.max_residual.unwrap() < 1e-10);
        assert_eq!(report.reports[3].status, CheckStatus::NotApplicable);
    }

    #[test]
    fn real_delta_unitarity_exact() {
        let model = PotentialModel::delta(c(-4.0, 0.0));
        let r = check_unitarity(&model, &[1.0, 2.0, 3.0], 1e-14);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn anomalous_point_interaction() {
        // real B with det B ≠ 1: T-symmetric, nonreciprocal
        let model = point([[2.0, 0.3], [0.1, 0.7]]);
        let grid = default_grid(1.0);
        let rec = check_reciprocity(&model, &grid, 1e-10);
        assert_eq!(rec.status, CheckStatus::Failed);
        let det = check_determinant_product(&model, &grid, 1e-10);
        assert!(det.passed, "{det:?}");
        let u = check_unitarity(&model, &grid, 1e-10);
        assert!(u.passed, "{u:?}");
        let all = run_all(&model, &grid, &VerifyOptions::default());
        assert_eq!(all.reports[0].status, CheckStatus::NotApplicable);
    }

    #[test]
    fn imaginary_delta() {
        let model = PotentialModel::delta(c(0.0, 2.0));
        let report = run_all(&model, &default_grid(1.0), &VerifyOptions::default());
        assert_eq!(report.reports[0].status, CheckStatus::Passed);
        assert_eq!(report.reports[2].status, CheckStatus::NotApplicable);
    }

    #[test]
    fn mirrored_pair_pseudo_unitarity() {
        let model = PotentialModel::mirrored_pair(c(2.0, 1.5), 1.0);
        let grid = default_grid(1.0);
        let r = check_pt_pseudo_unitarity(&model, &grid, 1e-8);
        assert!(r.passed, "{r:?}");
        let m = check_modulus_relations(&model, &grid, 1e-10);
        assert!(m.passed, "{m:?}");
    }

    #[test]
    fn gain_barrier_not_applicable() {
        let model = PotentialModel::barrier(c(3.0, -0.5), 1.0);
        let grid = default_grid(1.0);
        assert_eq!(
            check_modulus_relations(&model, &grid, 1e-10).status,
            CheckStatus::NotApplicable
        );
        assert_eq!(
            check_pt_pseudo_unitarity(&model, &grid, 1e-8).status,
            CheckStatus::NotApplicable
        );
    }

    #[test]
    fn free_model_passes() {
        let model = PotentialModel::barrier(c(0.0, 0.0), 1.0);
        let report = run_all(&model, &default_grid(1.0), &VerifyOptions::default());
        for r in &report.reports {
            assert_eq!(r.status, CheckStatus::Passed, "{r:?}");
        }
    }

    #[test]
    fn deterministic() {
        let model = PotentialModel::mirrored_pair(c(1.0, 0.5), 0.8);
        let grid = default_grid(0.8);
        let a = run_all(&model, &grid, &VerifyOptions::default());
        let b = run_all(&model, &grid, &VerifyOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn broken_t_symmetry_dichotomy() {
        // a T-symmetric point interaction with ε_lε_r = −1 has |τ| > 1 somewhere
        let model = point([[0.5, 2.0], [8.0, -0.5]]);
        let grid = default_grid(1.0);
        let r = check_s_eigenvalue_dichotomy(&model, &grid, 1e-8);
        assert!(r.passed, "{r:?}");
    }
}
