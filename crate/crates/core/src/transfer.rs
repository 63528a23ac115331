//! 2×2 transfer-matrix algebra and conversions to scattering data and the S-matrix.
//!
//! A transfer matrix `M(k)` maps the plane-wave coefficients `(A₋, B₋)` of a
//! solution at `x → −∞` to `(A₊, B₊)` at `x → +∞`, where the solution behaves
//! as `A e^{ikx} + B e^{−ikx}`. Units are natural (`ħ = 2m = 1`), so `E = k²`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::C64;

/// Relative floor on `|M22|` (scaled by `‖M‖_∞`) below which amplitudes are
/// treated as divergent.
pub const DEFAULT_M22_FLOOR: f64 = 1e-14;

const I: C64 = Complex64::new(0.0, 1.0);

/// Square root on the branch `√w = √|w| e^{iφ}` with `φ ∈ [0, π)`.
///
/// This differs from [`Complex64::sqrt`] in the lower half-plane: the result
/// always has a non-negative imaginary part.
pub fn principal_sqrt(w: C64) -> C64 {
    let mut arg = w.arg();
    if arg < 0.0 {
        arg += 2.0 * PI;
    }
    if arg >= 2.0 * PI {
        arg = 0.0;
    }
    Complex64::from_polar(w.norm().sqrt(), 0.5 * arg)
}

/// Plain 2×2 complex matrix stored row-major.
pub type Matrix2 = [[C64; 2]; 2];

pub(crate) fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub(crate) fn mat_det(a: &Matrix2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Transfer matrix of a scattering system at a single wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
    /// Wavenumber at which the matrix was evaluated.
    pub k: C64,
}

impl TransferMatrix {
    pub fn new(k: C64, m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self {
            m11,
            m12,
            m21,
            m22,
            k,
        }
    }

    pub fn from_array(k: C64, m: Matrix2) -> Self {
        Self::new(k, m[0][0], m[0][1], m[1][0], m[1][1])
    }

    pub fn identity(k: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::new(k, one, zero, zero, one)
    }

    pub fn as_array(&self) -> Matrix2 {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Row-sum (∞) norm.
    pub fn norm_inf(&self) -> f64 {
        (self.m11.norm() + self.m12.norm()).max(self.m21.norm() + self.m22.norm())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.re.is_finite() || !det.im.is_finite() {
            return Err(ScatterError::SingularMatrix { det });
        }
        Ok(Self::new(
            self.k,
            self.m22 / det,
            -self.m12 / det,
            -self.m21 / det,
            self.m11 / det,
        ))
    }

    /// Entrywise complex conjugate; the stored `k` is kept unchanged.
    pub fn conj(&self) -> Self {
        Self::new(
            self.k,
            self.m11.conj(),
            self.m12.conj(),
            self.m21.conj(),
            self.m22.conj(),
        )
    }

    /// Product `self · rhs`, rejecting matrices evaluated at different `k`.
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.k != rhs.k {
            return Err(ScatterError::MismatchedWavenumber {
                expected: self.k,
                found: rhs.k,
            });
        }
        Ok(Self::from_array(
            self.k,
            mat_mul(&self.as_array(), &rhs.as_array()),
        ))
    }

    pub fn apply(&self, c: CoefficientPair) -> CoefficientPair {
        CoefficientPair {
            a: self.m11 * c.a + self.m12 * c.b,
            b: self.m21 * c.a + self.m22 * c.b,
        }
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.m11 - other.m11)
            .norm()
            .max((self.m12 - other.m12).norm())
            .max((self.m21 - other.m21).norm())
            .max((self.m22 - other.m22).norm())
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    /// Panics on mismatched wavenumbers; use [`TransferMatrix::checked_mul`] to
    /// handle that case.
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs)
            .expect("multiplying transfer matrices at different wavenumbers")
    }
}

impl fmt::Display for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M(k={}) = [[{}, {}], [{}, {}]]",
            self.k, self.m11, self.m12, self.m21, self.m22
        )
    }
}

/// Amplitudes `(A, B)` of `e^{ikx}` and `e^{−ikx}` in a force-free region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPair {
    pub a: C64,
    pub b: C64,
}

impl CoefficientPair {
    pub fn new(a: C64, b: C64) -> Self {
        Self { a, b }
    }
}

/// Left/right reflection and transmission amplitudes at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData {
    pub r_l: C64,
    pub r_r: C64,
    pub t_l: C64,
    pub t_r: C64,
    pub k: C64,
}

impl ScatteringData {
    pub fn new(k: C64, r_l: C64, r_r: C64, t_l: C64, t_r: C64) -> Self {
        Self {
            r_l,
            r_r,
            t_l,
            t_r,
            k,
        }
    }

    /// Data of the interaction-free system.
    pub fn free(k: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::new(k, zero, zero, one, one)
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        [self.r_l, self.r_r, self.t_l, self.t_r]
    }

    /// Largest entrywise difference, each scaled by `max(1, |self_i|)`.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        self.amplitudes()
            .iter()
            .zip(other.amplitudes().iter())
            .map(|(a, b)| (a - b).norm() / a.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// The four ways of arranging the S-matrix in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SConvention {
    /// `[[t_l, r_r], [r_l, t_r]]`, the adopted convention.
    S1,
    /// `σ₁ S1`
    S2,
    /// `S1 σ₁`
    S3,
    /// `σ₁ S1 σ₁`
    S4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix {
    pub entries: Matrix2,
    pub convention: SConvention,
}

impl SMatrix {
    pub fn det(&self) -> C64 {
        mat_det(&self.entries)
    }
}

/// `M = M_{n+1} ⋯ M_1` for matrices listed left-to-right in space.
///
/// An empty list yields the identity at `k`.
pub fn compose(k: C64, ms: &[TransferMatrix]) -> Result<TransferMatrix> {
    let mut acc = TransferMatrix::identity(k);
    for m in ms {
        acc = m.checked_mul(&acc)?;
    }
    Ok(acc)
}

pub fn scattering_from_transfer(m: &TransferMatrix) -> Result<ScatteringData> {
    scattering_from_transfer_with_floor(m, DEFAULT_M22_FLOOR)
}

/// As [`scattering_from_transfer`] with an explicit relative floor on `|M22|`.
pub fn scattering_from_transfer_with_floor(
    m: &TransferMatrix,
    rel_floor: f64,
) -> Result<ScatteringData> {
    if !m.is_finite() {
        return Err(ScatterError::InvalidArgument(format!(
            "non-finite transfer matrix {m}"
        )));
    }
    let floor = rel_floor * m.norm_inf();
    let m22_abs = m.m22.norm();
    if m22_abs <= floor || m22_abs == 0.0 {
        return Err(ScatterError::SpectralSingularityProximity { m22_abs, floor });
    }
    Ok(ScatteringData {
        r_l: -m.m21 / m.m22,
        r_r: m.m12 / m.m22,
        t_l: m.det() / m.m22,
        t_r: m.m22.inv(),
        k: m.k,
    })
}

pub fn transfer_from_scattering(d: &ScatteringData) -> Result<TransferMatrix> {
    if d.t_r.norm() == 0.0 {
        return Err(ScatterError::ZeroTransmission);
    }
    let inv_t = d.t_r.inv();
    Ok(TransferMatrix::new(
        d.k,
        (d.t_l * d.t_r - d.r_l * d.r_r) * inv_t,
        d.r_r * inv_t,
        -d.r_l * inv_t,
        inv_t,
    ))
}

pub fn s_matrix(d: &ScatteringData, convention: SConvention) -> SMatrix {
    let s1 = [[d.t_l, d.r_r], [d.r_l, d.t_r]];
    let swap_rows = |m: Matrix2| [m[1], m[0]];
    let swap_cols = |m: Matrix2| [[m[0][1], m[0][0]], [m[1][1], m[1][0]]];
    let entries = match convention {
        SConvention::S1 => s1,
        SConvention::S2 => swap_rows(s1),
        SConvention::S3 => swap_cols(s1),
        SConvention::S4 => swap_cols(swap_rows(s1)),
    };
    SMatrix {
        entries,
        convention,
    }
}

/// Eigenvalues `(𝔰₊, 𝔰₋)` of the S-matrix in the adopted convention.
pub fn s_eigenvalues(d: &ScatteringData) -> (C64, C64) {
    let mean = 0.5 * (d.t_l + d.t_r);
    let half_diff = 0.5 * (d.t_l - d.t_r);
    let root = principal_sqrt(half_diff * half_diff + d.r_l * d.r_r);
    (mean + root, mean - root)
}

/// `𝔇 = t_l t_r − r_l r_r = det S`, equal to `M11/M22`.
pub fn det_s(d: &ScatteringData) -> C64 {
    d.t_l * d.t_r - d.r_l * d.r_r
}

/// Scattering data at `−k` from data at `k`, valid for systems whose
/// transfer matrix continues analytically to negative wavenumbers.
pub fn negative_k_data(d: &ScatteringData) -> Result<ScatteringData> {
    if d.k.norm() == 0.0 {
        return Err(ScatterError::ZeroWavenumber);
    }
    let dd = det_s(d);
    if dd.norm() == 0.0 {
        return Err(ScatterError::VanishingDeterminantS { k: d.k });
    }
    Ok(ScatteringData {
        r_l: -d.r_r / dd,
        r_r: -d.r_l / dd,
        t_l: d.t_l / dd,
        t_r: d.t_r / dd,
        k: -d.k,
    })
}

/// Relative tolerance used to decide whether `t_l = t_r`.
pub const RECIPROCITY_TOL: f64 = 1e-8;

/// Wronskian `2ik/t` of the Jost solutions; requires reciprocal transmission.
pub fn wronskian_constant(d: &ScatteringData) -> Result<C64> {
    let scale = d.t_l.norm().max(d.t_r.norm()).max(1.0);
    if (d.t_l - d.t_r).norm() > RECIPROCITY_TOL * scale {
        return Err(ScatterError::NonReciprocal {
            t_l: d.t_l,
            t_r: d.t_r,
        });
    }
    let t = 0.5 * (d.t_l + d.t_r);
    if t.norm() == 0.0 {
        return Err(ScatterError::ZeroTransmission);
    }
    Ok(2.0 * I * d.k / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn delta_matrix(z: C64, k: f64) -> TransferMatrix {
        let w = I * z / (2.0 * k);
        TransferMatrix::new(c(k, 0.0), 1.0 - w, -w, w, 1.0 + w)
    }

    #[test]
    fn principal_sqrt_branch() {
        assert!((principal_sqrt(c(4.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((principal_sqrt(c(-4.0, 0.0)) - c(0.0, 2.0)).norm() < 1e-15);
        // lower half-plane maps to the second quadrant
        let s = principal_sqrt(c(0.0, -1.0));
        assert!(s.im > 0.0 && s.re < 0.0);
        assert!((s * s - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(principal_sqrt(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn compose_identity_and_errors() {
        let k = c(1.3, 0.0);
        let id = TransferMatrix::identity(k);
        assert_eq!(compose(k, &[id, id]).unwrap(), id);
        assert_eq!(compose(k, &[]).unwrap(), id);
        let other = TransferMatrix::identity(c(2.0, 0.0));
        assert!(matches!(
            compose(k, &[id, other]),
            Err(ScatterError::MismatchedWavenumber { .. })
        ));
    }

    #[test]
    fn compose_order_is_right_to_left() {
        let k = c(1.0, 0.0);
        let a = TransferMatrix::new(k, c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let b = TransferMatrix::new(k, c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(1.0, 0.0));
        // list [a, b] means a acts first, so the product is b·a
        let m = compose(k, &[a, b]).unwrap();
        assert_eq!(m, b * a);
        assert_ne!(m, a * b);
    }

    #[test]
    fn free_data_conversions() {
        let k = c(1.0, 0.0);
        let d = scattering_from_transfer(&TransferMatrix::identity(k)).unwrap();
        assert_eq!(d, ScatteringData::free(k));
        assert_eq!(
            transfer_from_scattering(&ScatteringData::free(k)).unwrap(),
            TransferMatrix::identity(k)
        );
        let s = s_matrix(&d, SConvention::S1);
        assert_eq!(
            s.entries,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
        );
        assert_eq!(s_eigenvalues(&d), (c(1.0, 0.0), c(1.0, 0.0)));
        assert_eq!(det_s(&d), c(1.0, 0.0));
        assert_eq!(negative_k_data(&d).unwrap(), ScatteringData::free(-k));
        assert!((wronskian_constant(&d).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn delta_two_i_at_k_two() {
        // r = -iz/(2k+iz) = 2/2 = 1, t = 4/2 = 2
        let d = scattering_from_transfer(&delta_matrix(c(0.0, 2.0), 2.0)).unwrap();
        for (got, want) in d.amplitudes().iter().zip([1.0, 1.0, 2.0, 2.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-14, "{got} vs {want}");
        }
        let s = s_matrix(&d, SConvention::S1);
        assert!((s.entries[0][0] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((s.entries[0][1] - c(1.0, 0.0)).norm() < 1e-14);
        let (sp, sm) = s_eigenvalues(&d);
        assert!((sp - c(3.0, 0.0)).norm() < 1e-14);
        assert!((sm - c(1.0, 0.0)).norm() < 1e-14);
        assert!((det_s(&d) - c(3.0, 0.0)).norm() < 1e-14);
        // 2ik/t = 4i/2
        assert!((wronskian_constant(&d).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn delta_minus_four_at_k_one() {
        let d = scattering_from_transfer(&delta_matrix(c(-4.0, 0.0), 1.0)).unwrap();
        let den = c(2.0, -4.0);
        let r = c(0.0, 4.0) / den;
        let t = c(2.0, 0.0) / den;
        assert!((d.r_l - r).norm() < 1e-15);
        assert!((d.r_r - r).norm() < 1e-15);
        assert!((d.t_l - t).norm() < 1e-15);
        assert!((d.t_r - t).norm() < 1e-15);
    }

    #[test]
    fn delta_closed_form_to_matrix() {
        // r = -i/(2+i), t = 2/(2+i) at k = 1, z = 1
        let den = c(2.0, 1.0);
        let r = c(0.0, -1.0) / den;
        let t = c(2.0, 0.0) / den;
        let m = transfer_from_scattering(&ScatteringData::new(c(1.0, 0.0), r, r, t, t)).unwrap();
        assert!(m.max_abs_diff(&delta_matrix(c(1.0, 0.0), 1.0)) < 1e-15);
    }

    #[test]
    fn s_conventions() {
        let (a, b, cc, d) = (c(1.0, 0.5), c(-2.0, 0.0), c(0.3, 3.0), c(4.0, -1.0));
        let data = ScatteringData::new(c(1.0, 0.0), a, b, cc, d);
        let s4 = s_matrix(&data, SConvention::S4);
        assert_eq!(s4.entries, [[d, a], [b, cc]]);
        let s2 = s_matrix(&data, SConvention::S2);
        assert_eq!(s2.entries, [[a, d], [cc, b]]);
        let s3 = s_matrix(&data, SConvention::S3);
        assert_eq!(s3.entries, [[b, cc], [d, a]]);
    }

    #[test]
    fn p_symmetric_eigenvalues() {
        let (r, t) = (c(0.2, -0.7), c(0.6, 0.1));
        let (sp, sm) = s_eigenvalues(&ScatteringData::new(c(1.0, 0.0), r, r, t, t));
        // principal root of r² is ±r; the pair is {t + r, t − r}
        let ok = ((sp - (t + r)).norm() < 1e-14 && (sm - (t - r)).norm() < 1e-14)
            || ((sp - (t - r)).norm() < 1e-14 && (sm - (t + r)).norm() < 1e-14);
        assert!(ok, "{sp} {sm}");
    }

    #[test]
    fn floor_rejects_divergent_amplitudes() {
        let m = delta_matrix(c(0.0, 2.0), 1.0);
        match scattering_from_transfer(&m) {
            Err(ScatterError::SpectralSingularityProximity { m22_abs, .. }) => {
                assert!(m22_abs < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_transmission_and_zero_d_rejected() {
        let mut d = ScatteringData::free(c(1.0, 0.0));
        d.t_r = c(0.0, 0.0);
        assert_eq!(
            transfer_from_scattering(&d),
            Err(ScatterError::ZeroTransmission)
        );
        // r_l r_r = t_l t_r makes det S vanish
        let d = ScatteringData::new(
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
        );
        assert!(matches!(
            negative_k_data(&d),
            Err(ScatterError::VanishingDeterminantS { .. })
        ));
    }

    #[test]
    fn wronskian_rejects_nonreciprocal() {
        let d = ScatteringData::new(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.5, 0.0),
        );
        assert!(matches!(
            wronskian_constant(&d),
            Err(ScatterError::NonReciprocal { .. })
        ));
    }

    #[test]
    fn wronskian_diverges_toward_delta_singularity() {
        let mut last = 0.0;
        for j in 1..8 {
            let k = 1.0 + 10f64.powi(-j);
            let d = scattering_from_transfer(&delta_matrix(c(0.0, 2.0), k)).unwrap();
            let w = wronskian_constant(&d).unwrap().norm();
            // W = 2ik M22 → 0, so 1/W and |t| blow up
            let t = d.t_r.norm();
            assert!(t > last);
            assert!(w < 1.0);
            last = t;
        }
        assert!(last > 1e6);
    }

    #[test]
    fn inverse_and_singular() {
        let m = delta_matrix(c(1.0, 2.0), 0.7);
        let id = m * m.inverse().unwrap();
        assert!(id.max_abs_diff(&TransferMatrix::identity(m.k)) < 1e-14);
        let s = TransferMatrix::new(m.k, c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(matches!(
            s.inverse(),
            Err(ScatterError::SingularMatrix { .. })
        ));
    }
}
