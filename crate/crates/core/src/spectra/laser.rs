//! Lasing thresholds: spectral singularities of a homogeneous gain slab, and
//! gain tuning of general one-parameter families.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Result, ScatterError};
use crate::models::{gain_coefficient, PotentialModel};
use crate::{ScatteringSystem, C64};

/// Quantity held fixed while solving the threshold equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaserTarget {
    /// Fix `η₀ = Re 𝔫₀` and solve for `κ₀` and `k₀`.
    RealIndex(f64),
    /// Fix the emission wavenumber `k₀` and solve for `η₀` and `κ₀`.
    Wavenumber(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserQuery {
    pub length: f64,
    pub mode: u32,
    pub target: LaserTarget,
    pub max_iter: usize,
    /// Under-relaxation factor in `(0, 1]`.
    pub damping: f64,
}

impl LaserQuery {
    pub fn new(length: f64, mode: u32, target: LaserTarget) -> Self {
        Self {
            length,
            mode,
            target,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserSolution {
    pub k0: f64,
    pub n0: C64,
    pub eta0: f64,
    pub kappa0: f64,
    pub mode: u32,
    pub phi0: f64,
    /// Threshold gain `(2/L) ln|(𝔫₀+1)/(𝔫₀−1)|`.
    pub g: f64,
    /// `|M22(k₀)|` of the equivalent barrier.
    pub m22_residual: f64,
}

impl LaserSolution {
    /// Barrier with the threshold refractive index at `k₀`: `z = k₀²(1 − 𝔫₀²)`.
    pub fn barrier(&self, length: f64) -> PotentialModel {
        PotentialModel::barrier(self.k0 * self.k0 * (1.0 - self.n0 * self.n0), length)
    }

    /// Gain `−2k₀κ₀` from the refractive index alone.
    pub fn gain_from_index(&self) -> f64 {
        gain_coefficient(self.n0, self.k0)
    }
}

/// Threshold residual accepted for a slab solution.
pub const LASER_M22_TOL: f64 = 1e-8;

fn kappa_update(eta: f64, kappa: f64, k: f64, l: f64) -> f64 {
    let num = (eta - 1.0).powi(2) + kappa * kappa;
    let den = (eta + 1.0).powi(2) + kappa * kappa;
    (num / den).abs().ln() / (2.0 * k * l)
}

/// Principal argument of `((𝔫−1)/(𝔫+1))²`.
fn phase(n: C64) -> f64 {
    let w = (n - 1.0) / (n + 1.0);
    (w * w).arg()
}

/// Solves the slab threshold equations
/// `κ₀ = ln|((η₀−1)²+κ₀²)/((η₀+1)²+κ₀²)| / (2k₀L)` and
/// `k₀ = (2πm − φ₀)/(2Lη₀)` by damped fixed-point iteration.
pub fn slab_laser_solve(q: &LaserQuery) -> Result<LaserSolution> {
    if q.mode == 0 {
        return Err(ScatterError::InvalidArgument(
            "mode index must be >= 1".into(),
        ));
    }
    if !(q.length.is_finite() && q.length > 0.0) {
        return Err(ScatterError::InvalidArgument(format!(
            "slab length must be positive, got {}",
            q.length
        )));
    }
    if !(q.damping > 0.0 && q.damping <= 1.0) {
        return Err(ScatterError::InvalidArgument(
            "damping must lie in (0, 1]".into(),
        ));
    }
    let l = q.length;
    let m = q.mode as f64;
    let (mut eta, mut k) = match q.target {
        LaserTarget::RealIndex(eta) => {
            if !(eta > 0.0) || eta == 1.0 {
                return Err(ScatterError::InvalidArgument(format!(
                    "real index must be positive and differ from 1, got {eta}"
                )));
            }
            (eta, PI * m / (l * eta))
        }
        LaserTarget::Wavenumber(k) => {
            if !(k > 0.0) {
                return Err(ScatterError::InvalidArgument(format!(
                    "wavenumber must be positive, got {k}"
                )));
            }
            (PI * m / (l * k), k)
        }
    };
    // start on the gain side, away from the logarithmic singularity at 𝔫 = 1
    let mut kappa = -1e-3;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < q.max_iter {
        iterations += 1;
        let new_kappa = kappa_update(eta, kappa, k, l);
        let phi = phase(C64::new(eta, new_kappa));
        let (new_eta, new_k) = match q.target {
            LaserTarget::RealIndex(_) => (eta, (2.0 * PI * m - phi) / (2.0 * l * eta)),
            LaserTarget::Wavenumber(_) => ((2.0 * PI * m - phi) / (2.0 * l * k), k),
        };
        if !(new_kappa.is_finite() && new_k > 0.0 && new_eta > 0.0) {
            return Err(ScatterError::NotConverged {
                iterations,
                residual: f64::NAN,
            });
        }
        let w = q.damping;
        let next = (
            eta + w * (new_eta - eta),
            kappa + w * (new_kappa - kappa),
            k + w * (new_k - k),
        );
        change = (next.0 - eta)
            .abs()
            .max((next.1 - kappa).abs())
            .max((next.2 - k).abs());
        (eta, kappa, k) = next;
        if change <= 1e-15 * (1.0 + k.abs().max(eta.abs())) {
            break;
        }
    }
    let n0 = C64::new(eta, kappa);
    let model = PotentialModel::barrier(k * k * (1.0 - n0 * n0), l);
    let m22_residual = model.transfer_matrix(C64::new(k, 0.0))?.m22.norm();
    if iterations >= q.max_iter && change > 1e-12 {
        return Err(ScatterError::NotConverged {
            iterations,
            residual: m22_residual,
        });
    }
    if kappa >= 0.0 {
        return Err(ScatterError::InvalidArgument(format!(
            "threshold solution has Im n = {kappa} >= 0, which is not a gain medium"
        )));
    }
    if m22_residual > LASER_M22_TOL {
        return Err(ScatterError::NotConverged {
            iterations,
            residual: m22_residual,
        });
    }
    Ok(LaserSolution {
        k0: k,
        n0,
        eta0: eta,
        kappa0: kappa,
        mode: q.mode,
        phi0: phase(n0),
        g: 2.0 / l * ((n0 + 1.0) / (n0 - 1.0)).norm().ln(),
        m22_residual,
    })
}

/// Threshold solutions at fixed `η₀` for every mode whose `k₀` falls in
/// `[k_min, k_max]`.
pub fn laser_modes(length: f64, eta0: f64, k_min: f64, k_max: f64) -> Result<Vec<LaserSolution>> {
    if !(k_min > 0.0 && k_max >= k_min) {
        return Err(ScatterError::InvalidArgument(format!(
            "invalid wavenumber window [{k_min}, {k_max}]"
        )));
    }
    // k₀ ≈ (2πm − φ₀)/(2Lη₀) with |φ₀| ≤ π brackets the admissible m
    let m_lo = ((2.0 * length * eta0 * k_min - PI) / (2.0 * PI))
        .floor()
        .max(1.0) as u32;
    let m_hi = ((2.0 * length * eta0 * k_max + PI) / (2.0 * PI)).ceil() as u32;
    let mut out = Vec::new();
    for m in m_lo..=m_hi {
        let s = slab_laser_solve(&LaserQuery::new(length, m, LaserTarget::RealIndex(eta0)))?;
        if s.k0 >= k_min && s.k0 <= k_max {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub k_samples: usize,
    pub gain_samples: usize,
    pub tol_res: f64,
    pub max_iter: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            k_samples: 400,
            gain_samples: 200,
            tol_res: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub gain: f64,
    pub k0: f64,
    /// `|M22(k₀)|` at the tuned gain.
    pub residual: f64,
}

/// Tunes the real parameter of a model family so that `M22` acquires a real
/// zero.
///
/// For every gain sample the smallest `|M22|` over the wavenumber window is
/// recorded; the best `(gain, k)` cell then seeds a two-variable Newton
/// iteration on `(Re M22, Im M22)` with a finite-difference Jacobian.
pub fn tune_threshold<F, S>(
    family: F,
    k_window: (f64, f64),
    gain_window: (f64, f64),
    opts: &ThresholdOptions,
) -> Result<ThresholdPoint>
where
    F: Fn(f64) -> S + Sync,
    S: ScatteringSystem,
{
    let (k_lo, k_hi) = k_window;
    let (g_lo, g_hi) = gain_window;
    if !(k_lo > 0.0 && k_hi > k_lo && g_hi > g_lo) || opts.k_samples < 2 || opts.gain_samples < 2 {
        return Err(ScatterError::InvalidArgument(
            "threshold tuning needs nondegenerate windows and at least two samples".into(),
        ));
    }
    let m22 = |g: f64, k: f64| -> C64 {
        family(g)
            .transfer_matrix(C64::new(k, 0.0))
            .map(|m| m.m22)
            .unwrap_or(C64::new(f64::NAN, f64::NAN))
    };
    let lerp = |a: f64, b: f64, i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let best = (0..opts.gain_samples)
        .into_par_iter()
        .map(|i| {
            let g = lerp(g_lo, g_hi, i, opts.gain_samples);
            let sys = family(g);
            (0..opts.k_samples)
                .map(|j| {
                    let k = lerp(k_lo, k_hi, j, opts.k_samples);
                    let v = sys
                        .transfer_matrix(C64::new(k, 0.0))
                        .map(|m| m.m22.norm())
                        .unwrap_or(f64::INFINITY);
                    (if v.is_finite() { v } else { f64::INFINITY }, g, k)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("k_samples >= 2")
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("gain_samples >= 2");

    let (_, mut g, mut k) = best;
    let mut f = m22(g, k);
    for _ in 0..opts.max_iter {
        if f.norm() < opts.tol_res {
            break;
        }
        let hg = 1e-7 * g.abs().max(1.0);
        let hk = 1e-7 * k.abs().max(1.0);
        let dg = (m22(g + hg, k) - m22(g - hg, k)) / (2.0 * hg);
        let dk = (m22(g, k + hk) - m22(g, k - hk)) / (2.0 * hk);
        // solve [[dg.re, dk.re], [dg.im, dk.im]] (δg, δk) = −(f.re, f.im)
        let det = dg.re * dk.im - dk.re * dg.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_g = -(f.re * dk.im - dk.re * f.im) / det;
        let step_k = -(dg.re * f.im - f.re * dg.im) / det;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (tg, tk) = (g + lambda * step_g, k + lambda * step_k);
            let ft = m22(tg, tk);
            if ft.norm() < f.norm() {
                (g, k, f) = (tg, tk, ft);
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let residual = f.norm();
    if !(residual < opts.tol_res.max(1e-10)) {
        return Err(ScatterError::NotConverged {
            iterations: opts.max_iter,
            residual,
        });
    }
    Ok(ThresholdPoint {
        gain: g,
        k0: k,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_relations() {
        let s = slab_laser_solve(&LaserQuery::new(10.0, 12, LaserTarget::RealIndex(2.0))).unwrap();
        assert!(s.kappa0 < 0.0);
        assert!(s.m22_residual < 1e-8);
        assert!((s.g - s.gain_from_index()).abs() < 1e-10);
        // phase condition
        let lhs = 2.0 * s.k0 * 10.0 * s.eta0;
        assert!((lhs - (2.0 * PI * 12.0 - s.phi0)).abs() < 1e-9);
    }

    #[test]
    fn fixed_wavenumber_target() {
        let s = slab_laser_solve(&LaserQuery::new(20.0, 30, LaserTarget::Wavenumber(3.0))).unwrap();
        assert_eq!(s.k0, 3.0);
        assert!(s.m22_residual < 1e-8);
        assert!(s.eta0 > 1.0);
    }

    #[test]
    fn invalid_queries() {
        assert!(slab_laser_solve(&LaserQuery::new(1.0, 0, LaserTarget::RealIndex(1.5))).is_err());
        assert!(slab_laser_solve(&LaserQuery::new(1.0, 1, LaserTarget::RealIndex(1.0))).is_err());
        assert!(slab_laser_solve(&LaserQuery::new(-1.0, 1, LaserTarget::RealIndex(1.5))).is_err());
    }

    #[test]
    fn modes_in_window() {
        let modes = laser_modes(10.0, 1.5, 1.0, 2.0).unwrap();
        assert!(!modes.is_empty());
        for w in modes.windows(2) {
            assert_eq!(w[1].mode, w[0].mode + 1);
            // mode spacing ≈ π/(Lη)
            assert!((w[1].k0 - w[0].k0 - PI / 15.0).abs() < 0.02);
        }
    }
}
