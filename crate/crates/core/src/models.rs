//! Interaction models and their transfer matrices.
//!
//! Delta functions, multi-delta potentials, rectangular barriers and general
//! point interactions have exact transfer matrices. Locally periodic and
//! sampled potentials are cut into piecewise-constant slices, each treated as
//! a rectangular barrier, and the slice matrices are composed left to right.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::transfer::{
    mat_det, mat_mul, principal_sqrt, CoefficientPair, Matrix2, ScatteringData, TransferMatrix,
};
use crate::{ScatteringSystem, C64};

const I: C64 = Complex64::new(0.0, 1.0);
const ONE: C64 = Complex64::new(1.0, 0.0);
const ZERO: C64 = Complex64::new(0.0, 0.0);

/// Default number of slices per shortest Fourier period of a locally periodic
/// potential.
pub const DEFAULT_SLICES_PER_PERIOD: usize = 64;

/// Complex potential `x ↦ v(x)`; must be callable from several threads.
pub type PotentialFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Wavenumber-dependent matching matrix `k ↦ B(k)`.
pub type MatchingFn = Arc<dyn Fn(C64) -> Matrix2 + Send + Sync>;

/// Matching matrix `B` relating `(ψ, ψ')` on the two sides of a point
/// interaction: `(ψ(c⁺), ψ'(c⁺)) = B (ψ(c⁻), ψ'(c⁻))`.
#[derive(Clone)]
pub enum MatchingMatrix {
    Constant(Matrix2),
    Dynamic(MatchingFn),
}

impl MatchingMatrix {
    pub fn at(&self, k: C64) -> Matrix2 {
        match self {
            MatchingMatrix::Constant(b) => *b,
            MatchingMatrix::Dynamic(f) => f(k),
        }
    }
}

impl fmt::Debug for MatchingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingMatrix::Constant(b) => f.debug_tuple("Constant").field(b).finish(),
            MatchingMatrix::Dynamic(_) => f.write_str("Dynamic(<fn>)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointInteraction {
    pub center: f64,
    pub matrix: MatchingMatrix,
}

/// The supported interaction catalog.
#[derive(Clone)]
pub enum PotentialModel {
    /// `v(x) = z δ(x)`.
    Delta { z: C64 },
    /// `v(x) = ε Σ z_j δ(x − c_j)` with strictly increasing centers.
    MultiDelta {
        eps: f64,
        couplings: Vec<C64>,
        centers: Vec<f64>,
    },
    /// `v(x) = z` on `[x0, x0 + length]`, zero elsewhere.
    Barrier { z: C64, x0: f64, length: f64 },
    /// Point interactions at strictly increasing centers.
    PointInteractions { points: Vec<PointInteraction> },
    /// `v(x) = Σ z_n e^{2πinx/L}` on `[−L/2, L/2]`, zero elsewhere.
    LocallyPeriodic {
        length: f64,
        coefficients: Vec<(i32, C64)>,
        slices_per_period: usize,
    },
    /// Arbitrary `v` on `[a, b]`, approximated by `slices` constant pieces
    /// sampled at slice midpoints.
    Sampled {
        v: PotentialFn,
        a: f64,
        b: f64,
        slices: usize,
    },
}

impl fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialModel::Delta { z } => f.debug_struct("Delta").field("z", z).finish(),
            PotentialModel::MultiDelta {
                eps,
                couplings,
                centers,
            } => f
                .debug_struct("MultiDelta")
                .field("eps", eps)
                .field("couplings", couplings)
                .field("centers", centers)
                .finish(),
            PotentialModel::Barrier { z, x0, length } => f
                .debug_struct("Barrier")
                .field("z", z)
                .field("x0", x0)
                .field("length", length)
                .finish(),
            PotentialModel::PointInteractions { points } => f
                .debug_struct("PointInteractions")
                .field("points", points)
                .finish(),
            PotentialModel::LocallyPeriodic {
                length,
                coefficients,
                slices_per_period,
            } => f
                .debug_struct("LocallyPeriodic")
                .field("length", length)
                .field("coefficients", coefficients)
                .field("slices_per_period", slices_per_period)
                .finish(),
            PotentialModel::Sampled { a, b, slices, .. } => f
                .debug_struct("Sampled")
                .field("a", a)
                .field("b", b)
                .field("slices", slices)
                .finish_non_exhaustive(),
        }
    }
}

/// A spatially localized building block of a model.
#[derive(Debug, Clone, Copy)]
enum Segment {
    Point { center: f64, index: usize },
    Delta { center: f64, z: C64 },
    Slab { x0: f64, width: f64, z: C64 },
}

impl Segment {
    fn span(&self) -> (f64, f64) {
        match *self {
            Segment::Point { center, .. } | Segment::Delta { center, .. } => (center, center),
            Segment::Slab { x0, width, .. } => (x0, x0 + width),
        }
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl PotentialModel {
    pub fn delta(z: C64) -> Self {
        PotentialModel::Delta { z }
    }

    pub fn barrier(z: C64, length: f64) -> Self {
        PotentialModel::Barrier { z, x0: 0.0, length }
    }

    pub fn sampled<F>(v: F, a: f64, b: f64, slices: usize) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        PotentialModel::Sampled {
            v: Arc::new(v),
            a,
            b,
            slices,
        }
    }

    /// `v(x) = −depth · e^{−x²/(2w²)}` truncated to `|x| ≤ cutoff · w`.
    pub fn gaussian_well(depth: f64, width: f64, cutoff: f64, slices: usize) -> Self {
        Self::sampled(
            move |x| C64::new(-depth * (-(x * x) / (2.0 * width * width)).exp(), 0.0),
            -cutoff * width,
            cutoff * width,
            slices,
        )
    }

    /// `v(x) = −ζ / cosh²(αx)` truncated to `|x| ≤ cutoff / α`.
    pub fn sech2_well(zeta: f64, alpha: f64, cutoff: f64, slices: usize) -> Self {
        Self::sampled(
            move |x| {
                let c = (alpha * x).cosh();
                C64::new(-zeta / (c * c), 0.0)
            },
            -cutoff / alpha,
            cutoff / alpha,
            slices,
        )
    }

    /// `v(x) = z` on `[−L, 0)` and `z*` on `[0, L]`, a PT-symmetric pair of
    /// barriers. Two midpoint slices represent it exactly.
    pub fn mirrored_pair(z: C64, length: f64) -> Self {
        Self::sampled(
            move |x| if x < 0.0 { z } else { z.conj() },
            -length,
            length,
            2,
        )
    }

    /// `v(x) = z e^{2πix/L}` on `[−L/2, L/2]`.
    pub fn exponential(z: C64, length: f64) -> Self {
        PotentialModel::LocallyPeriodic {
            length,
            coefficients: vec![(1, z)],
            slices_per_period: DEFAULT_SLICES_PER_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ScatterError::InvalidModel(msg));
        match self {
            PotentialModel::Delta { z } => {
                if !finite(*z) {
                    return bad(format!("delta coupling must be finite, got {z}"));
                }
            }
            PotentialModel::MultiDelta {
                eps,
                couplings,
                centers,
            } => {
                if !eps.is_finite() {
                    return bad(format!("eps must be finite, got {eps}"));
                }
                if couplings.len() != centers.len() {
                    return bad(format!(
                        "{} couplings but {} centers",
                        couplings.len(),
                        centers.len()
                    ));
                }
                if centers.is_empty() {
                    return bad("multi-delta needs at least one center".into());
                }
                if !couplings.iter().all(|z| finite(*z)) || !centers.iter().all(|c| c.is_finite()) {
                    return bad("multi-delta couplings and centers must be finite".into());
                }
                if !strictly_increasing(centers) {
                    return bad("centers must be strictly increasing".into());
                }
            }
            PotentialModel::Barrier { z, x0, length } => {
                if !(length.is_finite() && *length > 0.0) {
                    return bad(format!("barrier length must be positive, got {length}"));
                }
                if !finite(*z) || !x0.is_finite() {
                    return bad("barrier height and offset must be finite".into());
                }
            }
            PotentialModel::PointInteractions { points } => {
                let centers: Vec<f64> = points.iter().map(|p| p.center).collect();
                if points.is_empty() {
                    return bad("point interaction list is empty".into());
                }
                if !centers.iter().all(|c| c.is_finite()) {
                    return bad("centers must be finite".into());
                }
                if !strictly_increasing(&centers) {
                    return bad("centers must be strictly increasing".into());
                }
            }
            PotentialModel::LocallyPeriodic {
                length,
                coefficients,
                slices_per_period,
            } => {
                if !(length.is_finite() && *length > 0.0) {
                    return bad(format!("length must be positive, got {length}"));
                }
                if *slices_per_period == 0 {
                    return bad("slices_per_period must be at least 1".into());
                }
                if !coefficients.iter().all(|(_, z)| finite(*z)) {
                    return bad("Fourier coefficients must be finite".into());
                }
            }
            PotentialModel::Sampled { a, b, slices, .. } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("support must satisfy a < b, got [{a}, {b}]"));
                }
                if *slices == 0 {
                    return bad("slices must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    fn segments(&self) -> Vec<Segment> {
        match self {
            PotentialModel::Delta { z } => vec![Segment::Delta { center: 0.0, z: *z }],
            PotentialModel::MultiDelta {
                eps,
                couplings,
                centers,
            } => centers
                .iter()
                .zip(couplings)
                .map(|(&c, &z)| Segment::Delta {
                    center: c,
                    z: *eps * z,
                })
                .collect(),
            PotentialModel::Barrier { z, x0, length } => vec![Segment::Slab {
                x0: *x0,
                width: *length,
                z: *z,
            }],
            PotentialModel::PointInteractions { points } => points
                .iter()
                .enumerate()
                .map(|(index, p)| Segment::Point {
                    center: p.center,
                    index,
                })
                .collect(),
            PotentialModel::LocallyPeriodic {
                length,
                coefficients,
                slices_per_period,
            } => {
                let max_n = coefficients
                    .iter()
                    .map(|(n, _)| n.unsigned_abs() as usize)
                    .max()
                    .unwrap_or(0)
                    .max(1);
                let l = *length;
                let coefficients = coefficients.clone();
                let f = move |x: f64| {
                    coefficients
                        .iter()
                        .map(|&(n, z)| {
                            z * Complex64::from_polar(
                                1.0,
                                2.0 * std::f64::consts::PI * n as f64 * x / l,
                            )
                        })
                        .sum::<C64>()
                };
                slab_slices(&f, -0.5 * l, 0.5 * l, slices_per_period * max_n)
            }
            PotentialModel::Sampled { v, a, b, slices } => slab_slices(v.as_ref(), *a, *b, *slices),
        }
    }

    fn segment_matrix(&self, seg: &Segment, k: C64) -> Result<TransferMatrix> {
        match *seg {
            Segment::Delta { center, z } => {
                if center == 0.0 {
                    Ok(delta_matrix(z, k))
                } else {
                    point_matrix(&[[ONE, ZERO], [z, ONE]], center, k)
                }
            }
            Segment::Point { center, index } => {
                let PotentialModel::PointInteractions { points } = self else {
                    unreachable!("point segments only come from point interactions")
                };
                point_matrix(&points[index].matrix.at(k), center, k)
            }
            Segment::Slab { x0, width, z } => Ok(slab_matrix(z, x0, width, k)),
        }
    }

    /// Transfer matrices of the model's pieces, ordered left to right, with
    /// the spatial interval each piece occupies.
    pub fn pieces(&self, k: C64) -> Result<Vec<((f64, f64), TransferMatrix)>> {
        self.validate()?;
        if k.norm() == 0.0 {
            return Err(ScatterError::ZeroWavenumber);
        }
        self.segments()
            .iter()
            .map(|s| Ok((s.span(), self.segment_matrix(s, k)?)))
            .collect()
    }

    /// Coefficients of the free-wave representation in each gap between
    /// pieces, obtained by propagating `left` through the pieces in order.
    /// The last entry equals `M · left`.
    pub fn coefficient_profile(&self, k: f64, left: CoefficientPair) -> Result<Vec<ProfileEntry>> {
        if k <= 0.0 {
            return Err(ScatterError::InvalidArgument(format!(
                "coefficient profile needs k > 0, got {k}"
            )));
        }
        let pieces = self.pieces(C64::new(k, 0.0))?;
        let mut out = Vec::with_capacity(pieces.len() + 1);
        let mut pair = left;
        let mut start = None;
        for (index, ((a, b), m)) in pieces.iter().enumerate() {
            out.push(ProfileEntry {
                region: Region {
                    index,
                    start,
                    end: Some(*a),
                },
                coefficients: pair,
            });
            pair = m.apply(pair);
            start = Some(*b);
        }
        out.push(ProfileEntry {
            region: Region {
                index: pieces.len(),
                start,
                end: None,
            },
            coefficients: pair,
        });
        Ok(out)
    }
}

fn slab_slices(v: &dyn Fn(f64) -> C64, a: f64, b: f64, n: usize) -> Vec<Segment> {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|j| {
            let x0 = a + j as f64 * h;
            Segment::Slab {
                x0,
                width: h,
                z: v(x0 + 0.5 * h),
            }
        })
        .collect()
}

/// A gap between consecutive pieces; `None` bounds extend to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub index: usize,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEntry {
    pub region: Region,
    pub coefficients: CoefficientPair,
}

impl ScatteringSystem for PotentialModel {
    fn transfer_matrix(&self, k: C64) -> Result<TransferMatrix> {
        let pieces = self.pieces(k)?;
        pieces
            .iter()
            .try_fold(TransferMatrix::identity(k), |acc, (_, m)| {
                m.checked_mul(&acc)
            })
    }

    fn expected_det(&self, k: C64) -> Option<Result<C64>> {
        match self {
            PotentialModel::PointInteractions { points } => Some(if k.norm() == 0.0 {
                Err(ScatterError::ZeroWavenumber)
            } else {
                Ok(points.iter().map(|p| mat_det(&p.matrix.at(k))).product())
            }),
            _ => Some(Ok(ONE)),
        }
    }

    fn length_scale(&self) -> f64 {
        match self {
            PotentialModel::Delta { .. } => 1.0,
            PotentialModel::MultiDelta { centers, .. } => {
                span_or_one(centers.first(), centers.last())
            }
            PotentialModel::Barrier { length, .. } => *length,
            PotentialModel::PointInteractions { points } => span_or_one(
                points.first().map(|p| &p.center),
                points.last().map(|p| &p.center),
            ),
            PotentialModel::LocallyPeriodic { length, .. } => *length,
            PotentialModel::Sampled { a, b, .. } => b - a,
        }
    }
}

fn span_or_one(first: Option<&f64>, last: Option<&f64>) -> f64 {
    match (first, last) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => 1.0,
    }
}

fn delta_matrix(z: C64, k: C64) -> TransferMatrix {
    let w = I * z / (2.0 * k);
    TransferMatrix::new(k, ONE - w, -w, w, ONE + w)
}

/// `M = N_c⁻¹ B N_c` for a point interaction at `c`.
fn point_matrix(b: &Matrix2, c: f64, k: C64) -> Result<TransferMatrix> {
    let det = mat_det(b);
    if det.norm() == 0.0 || !finite(det) {
        return Err(ScatterError::SingularMatrix { det });
    }
    let e = (I * k * c).exp();
    let ei = e.inv();
    let n = [[e, ei], [I * k * e, -I * k * ei]];
    let two_ik = 2.0 * I * k;
    let n_inv = [[0.5 * ei, ei / two_ik], [0.5 * e, -e / two_ik]];
    Ok(TransferMatrix::from_array(
        k,
        mat_mul(&n_inv, &mat_mul(b, &n)),
    ))
}

/// `sin(w)/w`, entire in `w`.
fn sinc(w: C64) -> C64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        ONE - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// Trigonometric pieces of a barrier of height `z` and width `L`:
/// `(cos(kL𝔫), 𝔫₊ sin(kL𝔫), 𝔫₋ sin(kL𝔫))`. All three are even in `𝔫`, so
/// the branch of the square root is irrelevant, and `sin(kL𝔫)/𝔫` is taken
/// through `sinc` so that `𝔫 → 0` is harmless.
fn slab_trig(z: C64, width: f64, k: C64) -> (C64, C64, C64) {
    let n = principal_sqrt(ONE - z / (k * k));
    let kl = k * width;
    let w = kl * n;
    let sin_over_n = kl * sinc(w);
    let n_sin = n * w.sin();
    (
        w.cos(),
        0.5 * (n_sin + sin_over_n),
        0.5 * (n_sin - sin_over_n),
    )
}

fn slab_matrix(z: C64, x0: f64, width: f64, k: C64) -> TransferMatrix {
    let (c, np_s, nm_s) = slab_trig(z, width, k);
    let e = (I * k * width).exp();
    let ei = e.inv();
    let shift = (2.0 * I * k * x0).exp();
    TransferMatrix::new(
        k,
        (c + I * np_s) * ei,
        I * nm_s * ei / shift,
        -I * nm_s * e * shift,
        (c - I * np_s) * e,
    )
}

/// Amplitudes from the delta and barrier closed forms, bypassing matrix
/// composition.
pub fn closed_form_scattering(model: &PotentialModel, k: f64) -> Result<ScatteringData> {
    if k <= 0.0 {
        return Err(ScatterError::InvalidArgument(format!(
            "closed forms need k > 0, got {k}"
        )));
    }
    model.validate()?;
    let kc = C64::new(k, 0.0);
    match *model {
        PotentialModel::Delta { z } => {
            let den = 2.0 * kc + I * z;
            let r = -I * z / den;
            let t = 2.0 * kc / den;
            Ok(ScatteringData::new(kc, r, r, t, t))
        }
        PotentialModel::Barrier { z, x0, length } => {
            let (c, np_s, nm_s) = slab_trig(z, length, kc);
            let den = c - I * np_s;
            let r = I * nm_s / den;
            let t = (-I * kc * length).exp() / den;
            let shift = (2.0 * I * kc * x0).exp();
            let r_l = r * shift;
            let r_r = r * (-2.0 * I * kc * length).exp() / shift;
            Ok(ScatteringData::new(kc, r_l, r_r, t, t))
        }
        _ => Err(ScatterError::InvalidArgument(
            "closed forms exist only for Delta and Barrier".into(),
        )),
    }
}

/// `𝔫 = √(1 − z/k²)` on the principal branch with `𝔫± = (𝔫 ± 1/𝔫)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractiveIndex {
    pub n: C64,
    pub n_plus: C64,
    pub n_minus: C64,
}

pub fn refractive_index(z: C64, k: f64) -> Result<RefractiveIndex> {
    if k == 0.0 {
        return Err(ScatterError::ZeroWavenumber);
    }
    let n = principal_sqrt(ONE - z / (k * k));
    if n.norm() == 0.0 {
        return Err(ScatterError::ZeroRefractiveIndex);
    }
    let inv = n.inv();
    Ok(RefractiveIndex {
        n,
        n_plus: 0.5 * (n + inv),
        n_minus: 0.5 * (n - inv),
    })
}

/// Gain coefficient `g = −2k Im 𝔫` of a homogeneous medium.
pub fn gain_coefficient(n: C64, k: f64) -> f64 {
    -2.0 * k * n.im
}

/// Homogeneous slab of relative permittivity `eps_slab` on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabOptics {
    pub eps_slab: C64,
    pub length: f64,
}

impl SlabOptics {
    pub fn new(eps_slab: C64, length: f64) -> Result<Self> {
        if eps_slab.norm() == 0.0 {
            return Err(ScatterError::InvalidModel(
                "slab permittivity must be nonzero".into(),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(ScatterError::InvalidModel(format!(
                "slab length must be positive, got {length}"
            )));
        }
        Ok(Self { eps_slab, length })
    }

    /// Refractive index `√ε` on the branch with non-negative real part, so a
    /// gain medium has `Im 𝔫 < 0`.
    pub fn index(&self) -> C64 {
        self.eps_slab.sqrt()
    }

    /// The equivalent barrier at wavenumber `k`: `z = k²(1 − ε)`.
    pub fn barrier(&self, k: f64) -> PotentialModel {
        PotentialModel::barrier(k * k * (ONE - self.eps_slab), self.length)
    }

    pub fn gain(&self, k: f64) -> f64 {
        gain_coefficient(self.index(), k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::scattering_from_transfer;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(k: f64) -> C64 {
        c(k, 0.0)
    }

    #[test]
    fn delta_det_is_one() {
        for &k in &[0.3, 1.0, 7.5] {
            let m = PotentialModel::delta(c(1.3, -0.4))
                .transfer_matrix(real(k))
                .unwrap();
            assert!((m.det() - ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_barrier_is_identity() {
        let m = PotentialModel::barrier(ZERO, 2.5)
            .transfer_matrix(real(1.7))
            .unwrap();
        assert!(m.max_abs_diff(&TransferMatrix::identity(real(1.7))) < 1e-14);
    }

    #[test]
    fn zero_wavenumber_rejected() {
        assert_eq!(
            PotentialModel::delta(ONE).transfer_matrix(ZERO),
            Err(ScatterError::ZeroWavenumber)
        );
    }

    #[test]
    fn invalid_models_rejected() {
        let md = PotentialModel::MultiDelta {
            eps: 1.0,
            couplings: vec![ONE, ONE],
            centers: vec![1.0, 0.0],
        };
        assert!(matches!(md.validate(), Err(ScatterError::InvalidModel(_))));
        let b = PotentialModel::Barrier {
            z: ONE,
            x0: 0.0,
            length: 0.0,
        };
        assert!(b.validate().is_err());
        let s = PotentialModel::sampled(|_| ONE, 1.0, 1.0, 4);
        assert!(s.validate().is_err());
        let s = PotentialModel::sampled(|_| ONE, 0.0, 1.0, 0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn singular_matching_matrix_rejected() {
        let m = PotentialModel::PointInteractions {
            points: vec![PointInteraction {
                center: 0.0,
                matrix: MatchingMatrix::Constant([[ONE, ONE], [ONE, ONE]]),
            }],
        };
        assert!(matches!(
            m.transfer_matrix(ONE),
            Err(ScatterError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn real_matching_matrix_singularity() {
        // B = [[α, β], [γ, −α]] at the origin: M22 = −i(βk² − γ)/(2k)
        let (alpha, beta, gamma) = (0.5, 2.0, 8.0);
        let b = [
            [c(alpha, 0.0), c(beta, 0.0)],
            [c(gamma, 0.0), c(-alpha, 0.0)],
        ];
        let model = PotentialModel::PointInteractions {
            points: vec![PointInteraction {
                center: 0.0,
                matrix: MatchingMatrix::Constant(b),
            }],
        };
        for &k in &[0.5, 1.0, 3.0] {
            let m = model.transfer_matrix(real(k)).unwrap();
            let want = -I * (beta * k * k - gamma) / (2.0 * k);
            assert!((m.m22 - want).norm() < 1e-13);
            assert!((m.det() - c(-alpha * alpha - beta * gamma, 0.0)).norm() < 1e-12);
        }
        // k0² = γ/β = 4
        let m = model.transfer_matrix(real(2.0)).unwrap();
        assert!(m.m22.norm() < 1e-14);
    }

    #[test]
    fn dynamic_matching_matrix() {
        let model = PotentialModel::PointInteractions {
            points: vec![PointInteraction {
                center: 0.3,
                matrix: MatchingMatrix::Dynamic(Arc::new(|k: C64| [[ONE, ZERO], [k * k, ONE]])),
            }],
        };
        let k = real(1.5);
        let m = model.transfer_matrix(k).unwrap();
        let md = PotentialModel::MultiDelta {
            eps: 1.0,
            couplings: vec![k * k],
            centers: vec![0.3],
        };
        assert!(m.max_abs_diff(&md.transfer_matrix(k).unwrap()) < 1e-13);
    }

    #[test]
    fn off_center_delta_matches_point_interaction_product() {
        // two deltas at −1 and +1, by direct evaluation of N⁻¹BN products
        let (z1, z2) = (c(0.7, 0.2), c(-1.1, 0.5));
        let k = real(1.3);
        let md = PotentialModel::MultiDelta {
            eps: 1.0,
            couplings: vec![z1, z2],
            centers: vec![-1.0, 1.0],
        };
        let direct = |z: C64, cc: f64| {
            let e = (I * k * cc).exp();
            let n = [[e, e.inv()], [I * k * e, -I * k / e]];
            let det = mat_det(&n);
            let n_inv = [
                [n[1][1] / det, -n[0][1] / det],
                [-n[1][0] / det, n[0][0] / det],
            ];
            mat_mul(&n_inv, &mat_mul(&[[ONE, ZERO], [z, ONE]], &n))
        };
        let want = TransferMatrix::from_array(k, mat_mul(&direct(z2, 1.0), &direct(z1, -1.0)));
        assert!(md.transfer_matrix(k).unwrap().max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn split_barrier_matches_whole() {
        let z = c(5.0, -1.5);
        let k = real(2.3);
        let whole = PotentialModel::barrier(z, 1.0).transfer_matrix(k).unwrap();
        let halves = crate::compose(
            k,
            &[
                PotentialModel::Barrier {
                    z,
                    x0: 0.0,
                    length: 0.5,
                }
                .transfer_matrix(k)
                .unwrap(),
                PotentialModel::Barrier {
                    z,
                    x0: 0.5,
                    length: 0.5,
                }
                .transfer_matrix(k)
                .unwrap(),
            ],
        )
        .unwrap();
        assert!(whole.max_abs_diff(&halves) < 1e-12);
    }

    #[test]
    fn barrier_near_zero_index() {
        // z = k² makes 𝔫 = 0; the matrix stays finite and continuous
        let k = 1.7;
        let b = |z: C64| {
            PotentialModel::barrier(z, 1.3)
                .transfer_matrix(real(k))
                .unwrap()
        };
        let at = b(c(k * k, 0.0));
        let near = b(c(k * k * (1.0 + 1e-9), 0.0));
        assert!(at.is_finite());
        assert!(at.max_abs_diff(&near) < 1e-7);
        assert!((at.det() - ONE).norm() < 1e-12);
    }

    #[test]
    fn sampled_constant_equals_barrier() {
        let z = c(3.0, 0.5);
        let k = real(1.1);
        let exact = PotentialModel::Barrier {
            z,
            x0: -0.4,
            length: 1.2,
        }
        .transfer_matrix(k)
        .unwrap();
        for n in [1, 3, 17] {
            let s = PotentialModel::sampled(move |_| z, -0.4, 0.8, n);
            assert!(s.transfer_matrix(k).unwrap().max_abs_diff(&exact) < 1e-12);
        }
    }

    #[test]
    fn delta_closed_form() {
        let d = closed_form_scattering(&PotentialModel::delta(c(0.0, 2.0)), 2.0).unwrap();
        assert!((d.r_l - ONE).norm() < 1e-15 && (d.t_l - c(2.0, 0.0)).norm() < 1e-15);
        assert!(closed_form_scattering(&PotentialModel::delta(ONE), 0.0).is_err());
    }

    #[test]
    fn barrier_reflectionless_at_real_index_resonance() {
        // real 𝔫, k = πm/(L𝔫): r = 0, t = e^{−imπ(1/𝔫 + 1)}
        let (l, z) = (1.0, c(3.0, 0.0));
        for m in 1..4 {
            // solve k²𝔫² = k² − z with k𝔫 = πm/L
            let kn = PI * m as f64 / l;
            let k = (kn * kn + z.re).sqrt();
            let n = kn / k;
            let d = closed_form_scattering(&PotentialModel::barrier(z, l), k).unwrap();
            assert!(d.r_l.norm() < 1e-12 && d.r_r.norm() < 1e-12);
            let want = Complex64::from_polar(1.0, -(m as f64) * PI * (1.0 / n + 1.0));
            assert!((d.t_l - want).norm() < 1e-12);
        }
    }

    #[test]
    fn bidirectional_invisibility_point() {
        let d = closed_form_scattering(
            &PotentialModel::barrier(c(8.0 * PI * PI, 0.0), 1.0),
            3.0 * PI,
        )
        .unwrap();
        assert!(d.r_l.norm() < 1e-12 && d.r_r.norm() < 1e-12);
        assert!((d.t_l - ONE).norm() < 1e-12);
    }

    #[test]
    fn refractive_index_values() {
        let n = refractive_index(ZERO, 2.0).unwrap();
        assert_eq!((n.n, n.n_plus, n.n_minus), (ONE, ONE, ZERO));
        let n = refractive_index(c(8.0 * PI * PI, 0.0), 3.0 * PI).unwrap();
        assert!((n.n - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
        assert_eq!(
            refractive_index(c(4.0, 0.0), 2.0),
            Err(ScatterError::ZeroRefractiveIndex)
        );
        // slab: 𝔫² = ε
        let eps = c(2.25, -0.01);
        let slab = SlabOptics::new(eps, 1.0).unwrap();
        let k = 1.3;
        let z = k * k * (ONE - eps);
        let n = refractive_index(z, k).unwrap().n;
        assert!((n * n - eps).norm() < 1e-14);
        assert!((slab.index() * slab.index() - eps).norm() < 1e-14);
        assert!(slab.index().im < 0.0);
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain_coefficient(c(1.5, 0.0), 3.0), 0.0);
        let g = gain_coefficient(c(1.5, -0.001), 2.0 * PI);
        assert!((g - 0.004 * PI).abs() < 1e-15);
    }

    #[test]
    fn profile_free_and_final_pair() {
        let left = CoefficientPair::new(c(0.3, 0.1), c(-0.2, 0.7));
        let free = PotentialModel::barrier(ZERO, 1.0);
        for e in free.coefficient_profile(1.2, left).unwrap() {
            assert!((e.coefficients.a - left.a).norm() < 1e-15);
            assert!((e.coefficients.b - left.b).norm() < 1e-15);
        }
        let md = PotentialModel::MultiDelta {
            eps: 1.0,
            couplings: vec![ONE, c(0.0, 1.0), c(-2.0, 0.0)],
            centers: vec![-1.0, 0.0, 2.0],
        };
        let prof = md.coefficient_profile(0.9, left).unwrap();
        assert_eq!(prof.len(), 4);
        assert_eq!(prof[0].region.start, None);
        assert_eq!(prof[1].region.start, Some(-1.0));
        assert_eq!(prof[3].region.end, None);
        let want = md.transfer_matrix(real(0.9)).unwrap().apply(left);
        assert!((prof[3].coefficients.a - want.a).norm() < 1e-14);
        assert!((prof[3].coefficients.b - want.b).norm() < 1e-14);
    }

    #[test]
    fn profile_outgoing_at_spectral_singularity() {
        let model = PotentialModel::delta(c(0.0, 2.0));
        let prof = model
            .coefficient_profile(1.0, CoefficientPair::new(ZERO, ONE))
            .unwrap();
        let last = prof.last().unwrap().coefficients;
        assert!(last.b.norm() < 1e-15);
        let m = model.transfer_matrix(ONE).unwrap();
        assert!((last.a - m.m12).norm() < 1e-15);
    }

    #[test]
    fn translation_covariance() {
        let k = real(1.7);
        let z = c(2.0, 0.4);
        let base =
            scattering_from_transfer(&PotentialModel::barrier(z, 0.8).transfer_matrix(k).unwrap())
                .unwrap();
        let a = 0.65;
        let moved = scattering_from_transfer(
            &PotentialModel::Barrier {
                z,
                x0: a,
                length: 0.8,
            }
            .transfer_matrix(k)
            .unwrap(),
        )
        .unwrap();
        assert!((moved.r_l - base.r_l * (2.0 * I * k * a).exp()).norm() < 1e-13);
        assert!((moved.r_r - base.r_r * (-2.0 * I * k * a).exp()).norm() < 1e-13);
        assert!((moved.t_l - base.t_l).norm() < 1e-13);
    }

    #[test]
    fn debug_hides_callbacks() {
        let s = format!("{:?}", PotentialModel::gaussian_well(2.0, 1.0, 8.0, 16));
        assert!(s.starts_with("Sampled"));
    }
}
