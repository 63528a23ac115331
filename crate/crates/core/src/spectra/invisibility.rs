//! Real wavenumbers at which a system is reflectionless, transparent or
//! invisible from one or both sides.
//!
//! Left reflectionlessness means `M21(k) = 0`, right reflectionlessness
//! `M12(k) = 0`, and transparency `M22(k) = 1` (so `t_r = 1`).

use crate::error::{Result, ScatterError};
use crate::spectra::roots::{find_zeros, Rect, Root, ZeroOptions};
use crate::transfer::TransferMatrix;
use crate::{ScatteringSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvisibilityKind {
    LeftReflectionless,
    RightReflectionless,
    Transparent,
    LeftInvisible,
    RightInvisible,
    BidirectionallyInvisible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvisibilityPoint {
    pub k: f64,
    pub kind: InvisibilityKind,
    /// Largest of the relevant `|M21|`, `|M12|`, `|M22 − 1|` at `k`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvisibilityScan {
    /// Set when `M ≡ I` on the whole interval; `points` is then empty.
    pub transparent_everywhere: bool,
    pub points: Vec<InvisibilityPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvisibilityOptions {
    pub zeros: ZeroOptions,
    /// Half-height of the search strip around the real axis.
    pub strip: f64,
    /// Roots with `|Im k|` above this are not real zeros.
    pub axis_tol: f64,
    /// Roots of different entries closer than this coincide.
    pub merge_tol: f64,
    /// Samples used to detect `M ≡ I`.
    pub identity_samples: usize,
}

impl Default for InvisibilityOptions {
    fn default() -> Self {
        Self {
            zeros: ZeroOptions {
                nx: 2000,
                ny: 5,
                ..ZeroOptions::default()
            },
            strip: 1e-2,
            axis_tol: 1e-8,
            merge_tol: 1e-6,
            identity_samples: 64,
        }
    }
}

fn entry<S: ScatteringSystem + ?Sized>(
    system: &S,
    k: C64,
    pick: fn(&TransferMatrix) -> C64,
) -> C64 {
    system
        .transfer_matrix(k)
        .map(|m| pick(&m))
        .unwrap_or(C64::new(f64::NAN, f64::NAN))
}

pub fn find_invisibility<S: ScatteringSystem + ?Sized>(
    system: &S,
    interval: (f64, f64),
    opts: &InvisibilityOptions,
) -> Result<InvisibilityScan> {
    let (k_min, k_max) = interval;
    if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
        return Err(ScatterError::InvalidArgument(format!(
            "invisibility search needs 0 < k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }

    let n = opts.identity_samples.max(2);
    let mut identity = true;
    for i in 0..n {
        let k = k_min + (k_max - k_min) * i as f64 / (n - 1) as f64;
        let kc = C64::new(k, 0.0);
        let m = system.transfer_matrix(kc)?;
        if m.max_abs_diff(&TransferMatrix::identity(kc)) > 1e-12 {
            identity = false;
            break;
        }
    }
    if identity {
        return Ok(InvisibilityScan {
            transparent_everywhere: true,
            points: Vec::new(),
        });
    }

    let rect = Rect::around_real_axis(k_min, k_max, opts.strip);
    let real_roots = |roots: Vec<Root>| -> Vec<f64> {
        roots
            .into_iter()
            .filter(|r| r.converged && r.k.im.abs() <= opts.axis_tol)
            .map(|r| r.k.re)
            .collect()
    };
    let left = real_roots(find_zeros(
        |k| entry(system, k, |m| m.m21),
        rect,
        &opts.zeros,
    )?);
    let right = real_roots(find_zeros(
        |k| entry(system, k, |m| m.m12),
        rect,
        &opts.zeros,
    )?);
    let transparent = real_roots(find_zeros(
        |k| entry(system, k, |m| m.m22 - 1.0),
        rect,
        &opts.zeros,
    )?);

    // cluster the three root sets
    let mut clusters: Vec<(f64, [bool; 3])> = Vec::new();
    for (which, set) in [&left, &right, &transparent].into_iter().enumerate() {
        for &k in set {
            match clusters
                .iter_mut()
                .find(|(c, _)| (c - k).abs() <= opts.merge_tol * k.max(1.0))
            {
                Some((_, flags)) => flags[which] = true,
                None => {
                    let mut flags = [false; 3];
                    flags[which] = true;
                    clusters.push((k, flags));
                }
            }
        }
    }

    let mut points = Vec::new();
    for (k, [l, r, t]) in clusters {
        let m = system.transfer_matrix(C64::new(k, 0.0))?;
        let (rl, rr, rt) = (m.m21.norm(), m.m12.norm(), (m.m22 - 1.0).norm());
        let mut push = |kind, residual| points.push(InvisibilityPoint { k, kind, residual });
        match (l, r, t) {
            (true, true, true) => push(
                InvisibilityKind::BidirectionallyInvisible,
                rl.max(rr).max(rt),
            ),
            (true, false, true) => push(InvisibilityKind::LeftInvisible, rl.max(rt)),
            (false, true, true) => push(InvisibilityKind::RightInvisible, rr.max(rt)),
            (true, true, false) => {
                push(InvisibilityKind::LeftReflectionless, rl);
                push(InvisibilityKind::RightReflectionless, rr);
            }
            (true, false, false) => push(InvisibilityKind::LeftReflectionless, rl),
            (false, true, false) => push(InvisibilityKind::RightReflectionless, rr),
            (false, false, true) => push(InvisibilityKind::Transparent, rt),
            (false, false, false) => {}
        }
    }
    points.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.kind.cmp(&b.kind)));
    Ok(InvisibilityScan {
        transparent_everywhere: false,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PotentialModel;
    use std::f64::consts::PI;

    #[test]
    fn free_model_is_flagged() {
        let scan = find_invisibility(
            &PotentialModel::barrier(C64::new(0.0, 0.0), 1.0),
            (0.5, 5.0),
            &InvisibilityOptions::default(),
        )
        .unwrap();
        assert!(scan.transparent_everywhere);
        assert!(scan.points.is_empty());
    }

    #[test]
    fn real_barrier_reflectionless_points() {
        // real barrier: r = 0 whenever kL𝔫 = πm; t = 1 additionally needs kL(1 − 𝔫) ∈ 2πℤ
        let model = PotentialModel::barrier(C64::new(8.0 * PI * PI, 0.0), 1.0);
        let scan = find_invisibility(&model, (9.0, 9.8), &InvisibilityOptions::default()).unwrap();
        assert!(!scan.transparent_everywhere);
        assert_eq!(scan.points.len(), 1, "{scan:?}");
        assert_eq!(
            scan.points[0].kind,
            InvisibilityKind::BidirectionallyInvisible
        );
        assert!((scan.points[0].k - 3.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn bad_interval() {
        let model = PotentialModel::delta(C64::new(1.0, 0.0));
        assert!(find_invisibility(&model, (0.0, 1.0), &InvisibilityOptions::default()).is_err());
    }
}
