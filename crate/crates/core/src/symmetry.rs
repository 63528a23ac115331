//! Parity, time-reversal, PT and translation transforms, and symmetry
//! classification over a wavenumber grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, ScatterError};
use crate::transfer::{det_s, scattering_from_transfer, ScatteringData, TransferMatrix};
use crate::{ScatteringSystem, C64};

const I: C64 = Complex64::new(0.0, 1.0);

/// Default relative tolerance for symmetry classification.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-8;

/// Grid points with `|M22| < SINGULAR_SKIP · ‖M‖_∞` are excluded.
pub const SINGULAR_SKIP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetryOp {
    /// Reflection `x → −x`.
    Parity,
    /// Reflection about the point `x = a`.
    ParityAbout(f64),
    TimeReversal,
    PT,
    /// PT with the reflection taken about `x = a`.
    PTAbout(f64),
    /// Shift of the system by `a`.
    Translation(f64),
}

impl SymmetryOp {
    pub fn name(&self) -> String {
        match self {
            SymmetryOp::Parity => "P".into(),
            SymmetryOp::ParityAbout(a) => format!("P@{a}"),
            SymmetryOp::TimeReversal => "T".into(),
            SymmetryOp::PT => "PT".into(),
            SymmetryOp::PTAbout(a) => format!("PT@{a}"),
            SymmetryOp::Translation(a) => format!("shift({a})"),
        }
    }

    fn involves_time_reversal(&self) -> bool {
        matches!(
            self,
            SymmetryOp::TimeReversal | SymmetryOp::PT | SymmetryOp::PTAbout(_)
        )
    }
}

fn translate(m: TransferMatrix, a: f64) -> TransferMatrix {
    let phase = (2.0 * I * a * m.k).exp();
    TransferMatrix {
        m12: m.m12 / phase,
        m21: m.m21 * phase,
        ..m
    }
}

pub fn transform_transfer(m: &TransferMatrix, op: SymmetryOp) -> Result<TransferMatrix> {
    let det = m.det();
    if det.norm() == 0.0 {
        return Err(ScatterError::SingularMatrix { det });
    }
    let parity = |m: &TransferMatrix| {
        TransferMatrix::new(m.k, m.m11 / det, -m.m21 / det, -m.m12 / det, m.m22 / det)
    };
    let pt = |m: &TransferMatrix| -> Result<TransferMatrix> {
        let inv = m.inverse()?;
        Ok(inv.conj())
    };
    Ok(match op {
        SymmetryOp::Parity => parity(m),
        SymmetryOp::ParityAbout(a) => translate(parity(m), 2.0 * a),
        SymmetryOp::TimeReversal => {
            TransferMatrix::new(m.k, m.m22.conj(), m.m21.conj(), m.m12.conj(), m.m11.conj())
        }
        SymmetryOp::PT => pt(m)?,
        SymmetryOp::PTAbout(a) => translate(pt(m)?, 2.0 * a),
        SymmetryOp::Translation(a) => translate(*m, a),
    })
}

fn translate_data(d: ScatteringData, a: f64) -> ScatteringData {
    let phase = (2.0 * I * a * d.k).exp();
    ScatteringData {
        r_l: d.r_l * phase,
        r_r: d.r_r / phase,
        ..d
    }
}

pub fn transform_scattering(d: &ScatteringData, op: SymmetryOp) -> Result<ScatteringData> {
    let parity = |d: &ScatteringData| ScatteringData::new(d.k, d.r_r, d.r_l, d.t_r, d.t_l);
    let conj_d = || -> Result<C64> {
        let dd = det_s(d);
        if dd.norm() == 0.0 {
            return Err(ScatterError::VanishingDeterminantS { k: d.k });
        }
        Ok(dd.conj())
    };
    let pt = || -> Result<ScatteringData> {
        let dc = conj_d()?;
        Ok(ScatteringData::new(
            d.k,
            -d.r_l.conj() / dc,
            -d.r_r.conj() / dc,
            d.t_r.conj() / dc,
            d.t_l.conj() / dc,
        ))
    };
    Ok(match op {
        SymmetryOp::Parity => parity(d),
        SymmetryOp::ParityAbout(a) => translate_data(parity(d), 2.0 * a),
        SymmetryOp::TimeReversal => {
            let dc = conj_d()?;
            ScatteringData::new(
                d.k,
                -d.r_r.conj() / dc,
                -d.r_l.conj() / dc,
                d.t_l.conj() / dc,
                d.t_r.conj() / dc,
            )
        }
        SymmetryOp::PT => pt()?,
        SymmetryOp::PTAbout(a) => translate_data(pt()?, 2.0 * a),
        SymmetryOp::Translation(a) => translate_data(*d, a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// The amplitude is too small for its phase to carry a sign.
    Indeterminate,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Plus
        } else if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Indeterminate
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
            Sign::Indeterminate => 0.0,
        }
    }

    pub fn is_definite(self) -> bool {
        self != Sign::Indeterminate
    }
}

/// `σ = arg 𝔇` and the signs in `t = ε|t|e^{iσ/2}`, `r = iη|r|e^{iσ/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSigns {
    pub sigma: f64,
    pub eps_l: Sign,
    pub eps_r: Sign,
    pub eta_l: Sign,
    pub eta_r: Sign,
}

impl PhaseSigns {
    /// `τ = (ε_l|t_l| + ε_r|t_r|)/2`.
    pub fn tau(&self, d: &ScatteringData) -> f64 {
        0.5 * (self.eps_l.value() * d.t_l.norm() + self.eps_r.value() * d.t_r.norm())
    }
}

pub fn sigma_and_signs(d: &ScatteringData, tol: f64) -> Result<PhaseSigns> {
    let dd = det_s(d);
    let deviation = (dd.norm() - 1.0).abs();
    if deviation > tol {
        return Err(ScatterError::NotUnimodular { deviation });
    }
    let sigma = dd.arg();
    let h = Complex64::from_polar(1.0, -0.5 * sigma);
    let eps = |t: C64| {
        if t.norm() > tol {
            Sign::of((t * h).re)
        } else {
            Sign::Indeterminate
        }
    };
    let eta = |r: C64| {
        if r.norm() > tol {
            Sign::of((r * h / I).re)
        } else {
            Sign::Indeterminate
        }
    };
    Ok(PhaseSigns {
        sigma,
        eps_l: eps(d.t_l),
        eps_r: eps(d.t_r),
        eta_l: eta(d.r_l),
        eta_r: eta(d.r_r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Broken,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVerdict {
    pub op: SymmetryOp,
    pub holds: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub exactness: Exactness,
    /// Largest `|τ|` over the grid, for time-reversal type operations that hold.
    pub tau_max: Option<f64>,
    /// Grid points excluded because they sit at or near a divergence.
    pub skipped: usize,
}

/// Largest entrywise difference relative to `max(1, |a_i|)`.
pub fn relative_residual(a: &ScatteringData, b: &ScatteringData) -> f64 {
    a.max_rel_diff(b)
}

enum PointOutcome {
    Skipped,
    Checked { residual: f64, tau: Option<f64> },
}

/// Transfer matrix at `k`, skipping points near a zero of `M22`.
pub(crate) fn usable_data(m: Result<TransferMatrix>) -> Option<(TransferMatrix, ScatteringData)> {
    let m = m.ok()?;
    if !m.is_finite() || m.m22.norm() < SINGULAR_SKIP * m.norm_inf() {
        return None;
    }
    let d = scattering_from_transfer(&m).ok()?;
    Some((m, d))
}

pub fn classify<F>(model: F, grid: &[f64], op: SymmetryOp, tol: f64) -> Result<SymmetryVerdict>
where
    F: Fn(f64) -> Result<TransferMatrix> + Sync,
{
    if grid.is_empty() {
        return Err(ScatterError::InvalidArgument(
            "classification grid is empty".into(),
        ));
    }
    if let Some(k) = grid.iter().find(|k| !(**k > 0.0)) {
        return Err(ScatterError::InvalidArgument(format!(
            "classification grid needs k > 0, got {k}"
        )));
    }
    let outcomes: Vec<PointOutcome> = grid
        .par_iter()
        .map(|&k| {
            let Some((_, d)) = usable_data(model(k)) else {
                return PointOutcome::Skipped;
            };
            let Ok(td) = transform_scattering(&d, op) else {
                return PointOutcome::Skipped;
            };
            let residual = relative_residual(&d, &td);
            let tau = if op.involves_time_reversal() {
                sigma_and_signs(&d, tol.max(residual))
                    .ok()
                    .map(|s| s.tau(&d))
            } else {
                None
            };
            PointOutcome::Checked { residual, tau }
        })
        .collect();

    let mut skipped = 0;
    let mut max_residual: f64 = 0.0;
    let mut tau_max: Option<f64> = None;
    let mut checked = 0;
    for o in &outcomes {
        match o {
            PointOutcome::Skipped => skipped += 1,
            PointOutcome::Checked { residual, tau } => {
                checked += 1;
                max_residual = max_residual.max(*residual);
                if let Some(t) = tau {
                    tau_max = Some(tau_max.unwrap_or(0.0).max(t.abs()));
                }
            }
        }
    }
    if skipped > 0 {
        log::warn!(
            "{} of {} grid points skipped near divergences while checking {}",
            skipped,
            grid.len(),
            op.name()
        );
    }
    let holds = checked > 0 && max_residual <= tol;
    let exactness = match (holds && op.involves_time_reversal(), tau_max) {
        (true, Some(t)) if t <= 1.0 + tol => Exactness::Exact,
        (true, Some(_)) => Exactness::Broken,
        _ => Exactness::NotApplicable,
    };
    Ok(SymmetryVerdict {
        op,
        holds,
        max_residual,
        tolerance: tol,
        exactness,
        tau_max: if holds { tau_max } else { None },
        skipped,
    })
}

/// [`classify`] applied to a [`ScatteringSystem`] on the real axis.
pub fn classify_system<S: ScatteringSystem + ?Sized>(
    system: &S,
    grid: &[f64],
    op: SymmetryOp,
    tol: f64,
) -> Result<SymmetryVerdict> {
    classify(|k| system.transfer_matrix(C64::new(k, 0.0)), grid, op, tol)
}
