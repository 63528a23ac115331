//! Checks that multi-delta transfer matrices are polynomials in the overall
//! coupling scale `ε` of degree at most the number of centers.

use crate::error::{Result, ScatterError};
use crate::models::PotentialModel;
use crate::transfer::TransferMatrix;
use crate::{ScatteringSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixEntry {
    M11,
    M12,
    M21,
    M22,
}

impl MatrixEntry {
    pub const ALL: [MatrixEntry; 4] = [Self::M11, Self::M12, Self::M21, Self::M22];

    pub fn of(&self, m: &TransferMatrix) -> C64 {
        match self {
            Self::M11 => m.m11,
            Self::M12 => m.m12,
            Self::M21 => m.m21,
            Self::M22 => m.m22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialCheck {
    pub is_polynomial: bool,
    pub degree: usize,
    /// Largest held-out interpolation error relative to `max(1, max|f|)`.
    pub max_residual: f64,
}

/// Default relative tolerance for the interpolation test.
pub const DEFAULT_POLYNOMIAL_TOL: f64 = 1e-9;

/// Interpolates `ys` at the first `degree + 1` abscissae and returns the
/// largest error at the remaining ones, relative to `max(1, max|y|)`.
pub fn polynomial_fit_residual(xs: &[f64], ys: &[C64], degree: usize) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(ScatterError::InvalidArgument(format!(
            "{} abscissae but {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < degree + 2 {
        return Err(ScatterError::InsufficientSamples {
            needed: degree + 2,
            got: xs.len(),
        });
    }
    for (i, a) in xs.iter().enumerate() {
        if !a.is_finite() {
            return Err(ScatterError::InvalidArgument(format!(
                "non-finite sample {a}"
            )));
        }
        if xs[..i].contains(a) {
            return Err(ScatterError::DuplicateSamples(*a));
        }
    }
    let (nodes, held) = xs.split_at(degree + 1);
    let values = &ys[..degree + 1];
    let interpolate = |x: f64| -> C64 {
        nodes
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let w: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, xj)| (x - xj) / (xi - xj))
                    .product();
                values[i] * w
            })
            .sum()
    };
    let scale = ys.iter().map(|y| y.norm()).fold(1.0, f64::max);
    Ok(held
        .iter()
        .zip(&ys[degree + 1..])
        .map(|(x, y)| (interpolate(*x) - y).norm() / scale)
        .fold(0.0, f64::max))
}

/// Interpolation test of one transfer-matrix entry of a multi-delta model
/// as a function of `ε`. The degree defaults to the number of centers.
pub fn verify_polynomial_exactness(
    model: &PotentialModel,
    k: f64,
    entry: MatrixEntry,
    eps_samples: &[f64],
    degree: Option<usize>,
    tol: f64,
) -> Result<PolynomialCheck> {
    let PotentialModel::MultiDelta {
        couplings, centers, ..
    } = model
    else {
        return Err(ScatterError::InvalidArgument(
            "polynomial exactness applies to multi-delta models".into(),
        ));
    };
    let degree = degree.unwrap_or(centers.len());
    let kc = C64::new(k, 0.0);
    let values = eps_samples
        .iter()
        .map(|&eps| {
            let m = PotentialModel::MultiDelta {
                eps,
                couplings: couplings.clone(),
                centers: centers.clone(),
            };
            Ok(entry.of(&m.transfer_matrix(kc)?))
        })
        .collect::<Result<Vec<C64>>>()?;
    let max_residual = polynomial_fit_residual(eps_samples, &values, degree)?;
    Ok(PolynomialCheck {
        is_polynomial: max_residual < tol,
        degree,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(n: usize) -> PotentialModel {
        PotentialModel::MultiDelta {
            eps: 1.0,
            couplings: (0..n)
                .map(|j| C64::new(1.0 + j as f64, 0.5 - j as f64))
                .collect(),
            centers: (0..n).map(|j| -1.0 + 0.8 * j as f64).collect(),
        }
    }

    fn samples(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn single_delta_is_linear() {
        let r = verify_polynomial_exactness(&md(1), 1.3, MatrixEntry::M22, &samples(5), None, 1e-9)
            .unwrap();
        assert!(r.is_polynomial && r.degree == 1 && r.max_residual < 1e-14);
    }

    #[test]
    fn three_deltas_need_degree_three() {
        let s = samples(7);
        for e in MatrixEntry::ALL {
            let ok = verify_polynomial_exactness(&md(3), 0.9, e, &s, None, 1e-9).unwrap();
            assert!(ok.is_polynomial, "{e:?} {ok:?}");
        }
        let low =
            verify_polynomial_exactness(&md(3), 0.9, MatrixEntry::M22, &s, Some(2), 1e-9).unwrap();
        assert!(!low.is_polynomial);
    }

    #[test]
    fn sample_errors() {
        assert_eq!(
            verify_polynomial_exactness(
                &md(2),
                1.0,
                MatrixEntry::M11,
                &[0.0, 0.5, 0.5, 1.0],
                None,
                1e-9
            ),
            Err(ScatterError::DuplicateSamples(0.5))
        );
        assert!(matches!(
            verify_polynomial_exactness(
                &md(2),
                1.0,
                MatrixEntry::M11,
                &[0.0, 0.5, 1.0],
                None,
                1e-9
            ),
            Err(ScatterError::InsufficientSamples { needed: 4, got: 3 })
        ));
        let barrier = PotentialModel::barrier(C64::new(1.0, 0.0), 1.0);
        assert!(verify_polynomial_exactness(
            &barrier,
            1.0,
            MatrixEntry::M11,
            &samples(5),
            None,
            1e-9
        )
        .is_err());
    }
}
