//! Complex-`k` zeros of `M22` and `M11` and their physical meaning.
//!
//! Zeros of `M22` on the positive real axis are spectral singularities
//! (purely outgoing solutions), zeros of `M11` there are time-reversed
//! singularities (purely incoming solutions). Off-axis zeros of `M22` are
//! bound states, complex eigenvalues, resonances or antiresonances depending
//! on where they lie.

mod invisibility;
mod laser;
mod polynomial;
mod roots;

pub use invisibility::{
    find_invisibility, InvisibilityKind, InvisibilityOptions, InvisibilityPoint, InvisibilityScan,
};
pub use laser::{
    laser_modes, slab_laser_solve, tune_threshold, LaserQuery, LaserSolution, LaserTarget,
    ThresholdOptions, ThresholdPoint,
};
pub use polynomial::{
    polynomial_fit_residual, verify_polynomial_exactness, MatrixEntry, PolynomialCheck,
    DEFAULT_POLYNOMIAL_TOL,
};
pub use roots::{count_zeros, find_zeros, Rect, Root, ZeroOptions};

use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::transfer::{s_eigenvalues, scattering_from_transfer, TransferMatrix};
use crate::{ScatteringSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    SpectralSingularity,
    TimeReversedSingularity,
    SelfDualSingularity,
    Resonance,
    Antiresonance,
    BoundState,
    ComplexEigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub k: C64,
    /// `E = Re(k)² − Im(k)²`.
    pub energy: f64,
    /// `Γ = −2 Re(k) Im(k)`.
    pub width: f64,
    pub kind: SpectralKind,
    /// `|M22(k)|`, or `|M11(k)|` for time-reversed singularities.
    pub residual: f64,
}

impl SpectralPoint {
    fn new(k: C64, kind: SpectralKind, residual: f64) -> Self {
        Self {
            k,
            energy: k.re * k.re - k.im * k.im,
            width: -2.0 * k.re * k.im,
            kind,
            residual,
        }
    }

    /// Whether the stored fields are consistent with `kind`.
    pub fn is_consistent(&self) -> bool {
        let k = self.k;
        let e_ok = self.energy == k.re * k.re - k.im * k.im;
        let g_ok = self.width == -2.0 * k.re * k.im;
        let kind_ok = match self.kind {
            SpectralKind::SpectralSingularity
            | SpectralKind::TimeReversedSingularity
            | SpectralKind::SelfDualSingularity => k.im == 0.0 && k.re > 0.0,
            SpectralKind::Resonance => self.width > 0.0,
            SpectralKind::Antiresonance => self.width < 0.0,
            SpectralKind::BoundState => k.re == 0.0 && k.im > 0.0 && self.energy < 0.0,
            SpectralKind::ComplexEigenvalue => k.im > 0.0 && k.re != 0.0,
        };
        e_ok && g_ok && kind_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub zeros: ZeroOptions,
    /// Roots with `|Im k|` (or `|Re k|`) below this are snapped onto the axis.
    pub axis_tol: f64,
    /// Relative bound on `|M11|/‖M‖_∞` marking a spectral singularity self-dual.
    pub self_dual_tol: f64,
    /// If set, additionally search the imaginary-axis segment `(0, i·k_max]`
    /// for bound states.
    pub bound_state_kmax: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            zeros: ZeroOptions::default(),
            axis_tol: 1e-8,
            self_dual_tol: 1e-6,
            bound_state_kmax: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<SpectralPoint>,
    /// Zeros that lie in the region but fit none of the kinds above: the
    /// negative real and negative imaginary axes, and `M11` zeros off the
    /// positive real axis.
    pub unclassified: Vec<Root>,
    /// Seeds where Newton's method did not reach the residual tolerance.
    pub unconverged: Vec<Root>,
}

fn entry<S: ScatteringSystem + ?Sized>(
    system: &S,
    k: C64,
    pick: fn(&TransferMatrix) -> C64,
) -> C64 {
    match system.transfer_matrix(k) {
        Ok(m) => pick(&m),
        Err(_) => C64::new(f64::NAN, f64::NAN),
    }
}

fn merge_roots(mut a: Vec<Root>, b: Vec<Root>, tol_sep: f64) -> Vec<Root> {
    for r in b {
        if !a.iter().any(|x| (x.k - r.k).norm() <= tol_sep) {
            a.push(r);
        }
    }
    a
}

pub fn classify_spectrum<S: ScatteringSystem + ?Sized>(
    system: &S,
    rect: Rect,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    let m22 = |k: C64| entry(system, k, |m| m.m22);
    let m11 = |k: C64| entry(system, k, |m| m.m11);

    let mut roots22 = find_zeros(m22, rect, &opts.zeros)?;
    if let Some(kmax) = opts.bound_state_kmax {
        let h = 1e-3 * kmax;
        let axis = Rect::new(-h, h, opts.axis_tol.max(1e-6 * kmax), kmax);
        let axis_opts = ZeroOptions {
            nx: 5,
            ny: opts.zeros.ny.max(400),
            ..opts.zeros
        };
        roots22 = merge_roots(
            roots22,
            find_zeros(m22, axis, &axis_opts)?,
            opts.zeros.tol_sep,
        );
    }
    let roots11 = find_zeros(m11, rect, &opts.zeros)?;

    let on_real_axis =
        |k: C64| k.im.abs() <= opts.axis_tol * k.norm().max(1.0) && k.re > opts.axis_tol;
    let on_imag_axis = |k: C64| k.re.abs() <= opts.axis_tol * k.norm().max(1.0);

    let mut points = Vec::new();
    let mut unclassified = Vec::new();
    let mut unconverged = Vec::new();
    let mut singular_ks = Vec::new();

    for root in roots22 {
        if !root.converged {
            unconverged.push(root);
            continue;
        }
        let k = root.k;
        if on_real_axis(k) {
            let k0 = C64::new(k.re, 0.0);
            let m = system.transfer_matrix(k0)?;
            let self_dual = m.m11.norm() < opts.self_dual_tol * m.norm_inf();
            let kind = if self_dual {
                SpectralKind::SelfDualSingularity
            } else {
                SpectralKind::SpectralSingularity
            };
            singular_ks.push(k0);
            points.push(SpectralPoint::new(k0, kind, m.m22.norm()));
        } else if on_imag_axis(k) && k.im > 0.0 {
            let kb = C64::new(0.0, k.im);
            let res = m22(kb).norm();
            points.push(SpectralPoint::new(kb, SpectralKind::BoundState, res));
        } else if k.im > 0.0 {
            points.push(SpectralPoint::new(
                k,
                SpectralKind::ComplexEigenvalue,
                root.residual,
            ));
        } else if k.im < 0.0 && k.re > 0.0 {
            points.push(SpectralPoint::new(
                k,
                SpectralKind::Resonance,
                root.residual,
            ));
        } else if k.im < 0.0 && k.re < 0.0 {
            points.push(SpectralPoint::new(
                k,
                SpectralKind::Antiresonance,
                root.residual,
            ));
        } else {
            log::debug!("zero of M22 at {k} is outside the classified regions");
            unclassified.push(root);
        }
    }

    for root in roots11 {
        if !root.converged {
            unconverged.push(root);
            continue;
        }
        if !on_real_axis(root.k) {
            unclassified.push(root);
            continue;
        }
        let k0 = C64::new(root.k.re, 0.0);
        if singular_ks
            .iter()
            .any(|s| (s - k0).norm() <= opts.self_dual_tol * k0.norm().max(1.0))
        {
            // already reported as a spectral singularity, possibly self-dual
            continue;
        }
        let res = m11(k0).norm();
        points.push(SpectralPoint::new(
            k0,
            SpectralKind::TimeReversedSingularity,
            res,
        ));
    }

    points.sort_by(|a, b| {
        a.k.re
            .total_cmp(&b.k.re)
            .then_with(|| a.k.im.total_cmp(&b.k.im))
    });
    Ok(Spectrum {
        points,
        unclassified,
        unconverged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SEigenvalueLimit {
    /// The bounded eigenvalue at the approach point closest to `k0`.
    pub finite_limit: C64,
    /// Exponent `p` in `|𝔰_divergent| ∝ |k − k0|^{−p}`, from a log-log fit.
    pub divergent_rate: f64,
    /// `M11(k0)/2`, the value the bounded eigenvalue tends to up to sign.
    pub half_m11: C64,
}

/// Default bound on `|M22(k0)|` accepted as a spectral singularity.
pub const SINGULARITY_TOL: f64 = 1e-8;

/// Behavior of the two S-matrix eigenvalues as `k` approaches a spectral
/// singularity `k0` along `approach`.
pub fn s_eigenvalue_limit<S: ScatteringSystem + ?Sized>(
    system: &S,
    k0: f64,
    approach: &[f64],
) -> Result<SEigenvalueLimit> {
    let m0 = system.transfer_matrix(C64::new(k0, 0.0))?;
    let residual = m0.m22.norm();
    if residual > SINGULARITY_TOL * m0.norm_inf().max(1.0) {
        return Err(ScatterError::NotASingularity { k0, residual });
    }
    let pts: Vec<f64> = approach.iter().copied().filter(|k| *k != k0).collect();
    if pts.len() < 2 {
        return Err(ScatterError::InsufficientSamples {
            needed: 2,
            got: pts.len(),
        });
    }
    let mut finite = Vec::with_capacity(pts.len());
    let mut fit = Vec::with_capacity(pts.len());
    for &k in &pts {
        let d = scattering_from_transfer(&system.transfer_matrix(C64::new(k, 0.0))?)?;
        let (sp, sm) = s_eigenvalues(&d);
        let (small, big) = if sp.norm() <= sm.norm() {
            (sp, sm)
        } else {
            (sm, sp)
        };
        finite.push(((k - k0).abs(), small));
        fit.push(((k - k0).abs().ln(), big.norm().ln()));
    }
    let closest = finite
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|x| x.1)
        .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let n = fit.len() as f64;
    let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
    let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(ScatterError::DuplicateSamples(pts[0]));
    }
    Ok(SEigenvalueLimit {
        finite_limit: closest,
        divergent_rate: -sxy / sxx,
        half_m11: 0.5 * m0.m11,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PotentialModel;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn coarse() -> SpectrumOptions {
        SpectrumOptions {
            zeros: ZeroOptions {
                nx: 81,
                ny: 81,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn delta_singularity() {
        let s = classify_spectrum(
            &PotentialModel::delta(c(0.0, 2.0)),
            Rect::new(0.1, 3.0, -2.0, 2.0),
            &coarse(),
        )
        .unwrap();
        assert_eq!(s.points.len(), 1, "{s:?}");
        let p = s.points[0];
        assert_eq!(p.kind, SpectralKind::SpectralSingularity);
        assert!((p.k - c(1.0, 0.0)).norm() < 1e-8);
        assert!((p.energy - 1.0).abs() < 1e-8);
        assert!(p.is_consistent());
    }

    #[test]
    fn delta_bound_state() {
        let s = classify_spectrum(
            &PotentialModel::delta(c(-4.0, 0.0)),
            Rect::new(-1.0, 1.5, -1.0, 3.0),
            &coarse(),
        )
        .unwrap();
        let bs: Vec<_> = s
            .points
            .iter()
            .filter(|p| p.kind == SpectralKind::BoundState)
            .collect();
        assert_eq!(bs.len(), 1, "{s:?}");
        assert!((bs[0].k - c(0.0, 2.0)).norm() < 1e-8);
        assert!(bs[0].is_consistent());
    }

    #[test]
    fn delta_off_axis_zeros() {
        // k0 = −iz/2
        for (z, kind) in [
            (c(1.0, 2.0), SpectralKind::Resonance),
            (c(-1.0, 2.0), SpectralKind::ComplexEigenvalue),
            (c(1.0, -2.0), SpectralKind::Antiresonance),
        ] {
            let k0 = -c(0.0, 1.0) * z / 2.0;
            let s = classify_spectrum(
                &PotentialModel::delta(z),
                Rect::new(-2.0, 2.0, -2.0, 2.0),
                &coarse(),
            )
            .unwrap();
            assert_eq!(s.points.len(), 1, "{z} {s:?}");
            assert_eq!(s.points[0].kind, kind, "{z}");
            assert!((s.points[0].k - k0).norm() < 1e-8);
            assert!(s.points[0].is_consistent());
        }
    }

    #[test]
    fn real_matching_matrix_singularity_is_found() {
        use crate::models::{MatchingMatrix, PointInteraction};
        let b = [[c(0.5, 0.0), c(2.0, 0.0)], [c(8.0, 0.0), c(-0.5, 0.0)]];
        let model = PotentialModel::PointInteractions {
            points: vec![PointInteraction {
                center: 0.0,
                matrix: MatchingMatrix::Constant(b),
            }],
        };
        let s = classify_spectrum(&model, Rect::new(0.5, 4.0, -1.0, 1.0), &coarse()).unwrap();
        let ss: Vec<_> = s
            .points
            .iter()
            .filter(|p| {
                matches!(
                    p.kind,
                    SpectralKind::SpectralSingularity | SpectralKind::SelfDualSingularity
                )
            })
            .collect();
        assert_eq!(ss.len(), 1, "{s:?}");
        assert!((ss[0].k.re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn eigenvalue_limit_needs_a_singularity() {
        let free = PotentialModel::barrier(c(0.0, 0.0), 1.0);
        assert!(matches!(
            s_eigenvalue_limit(&free, 1.0, &[1.1, 1.01]),
            Err(ScatterError::NotASingularity { .. })
        ));
    }

    #[test]
    fn eigenvalue_divergence_rate() {
        let approach: Vec<f64> = (2..=8).map(|j| 1.0 + 10f64.powi(-j)).collect();
        let lim = s_eigenvalue_limit(&PotentialModel::delta(c(0.0, 2.0)), 1.0, &approach).unwrap();
        assert!((lim.divergent_rate - 1.0).abs() < 1e-3);
        assert!((lim.half_m11 - c(1.0, 0.0)).norm() < 1e-14);
        // the bounded eigenvalue tends to +M11(k0)/2 here
        assert!((lim.finite_limit - lim.half_m11).norm() < 1e-6);
    }
}
