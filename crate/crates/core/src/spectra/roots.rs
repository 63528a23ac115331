//! Zeros of a complex function in a rectangle of the complex plane.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Result, ScatterError};
use crate::C64;

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    /// Thin rectangle around a segment of the real axis.
    pub fn around_real_axis(k_min: f64, k_max: f64, half_height: f64) -> Self {
        Self::new(k_min, k_max, -half_height, half_height)
    }

    pub fn contains(&self, k: C64) -> bool {
        k.re >= self.re_min && k.re <= self.re_max && k.im >= self.im_min && k.im <= self.im_max
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.re_min >= self.re_max || self.im_min > self.im_max {
            return Err(ScatterError::InvalidArgument(format!(
                "invalid search rectangle {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOptions {
    /// Grid nodes along the real direction.
    pub nx: usize,
    /// Grid nodes along the imaginary direction.
    pub ny: usize,
    pub tol_res: f64,
    pub tol_sep: f64,
    pub max_iter: usize,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self {
            nx: 400,
            ny: 400,
            tol_res: 1e-10,
            tol_sep: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub k: C64,
    pub residual: f64,
    pub converged: bool,
}

fn norm_or_inf(z: C64) -> f64 {
    let n = z.norm();
    if n.is_finite() {
        n
    } else {
        f64::INFINITY
    }
}

fn derivative<F: Fn(C64) -> C64>(f: &F, k: C64) -> C64 {
    let h = 1e-6 * k.norm().max(1.0);
    (f(k + h) - f(k - h)) / (2.0 * h)
}

/// Damped Newton iteration from `k`.
fn newton<F: Fn(C64) -> C64>(f: &F, mut k: C64, opts: &ZeroOptions) -> Root {
    let mut fk = f(k);
    let mut res = norm_or_inf(fk);
    let mut polish = 0;
    for _ in 0..opts.max_iter {
        if res < opts.tol_res {
            // a couple of extra steps tighten k well below the residual tolerance
            polish += 1;
            if polish > 2 || res == 0.0 {
                break;
            }
        }
        let d = derivative(f, k);
        if !(d.norm() > 0.0) || !d.re.is_finite() || !d.im.is_finite() {
            break;
        }
        let step = fk / d;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = k - lambda * step;
            let ft = f(trial);
            let rt = norm_or_inf(ft);
            if rt < res {
                k = trial;
                fk = ft;
                res = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Root {
        k,
        residual: res,
        converged: res < opts.tol_res,
    }
}

/// Locates zeros of `f` in `rect`.
///
/// `|f|` is sampled on an `nx × ny` grid; every local minimum seeds a damped
/// Newton iteration with a central-difference derivative. Converged roots
/// outside the rectangle are discarded, as are seeds on the rectangle's edge
/// that fail to converge (for analytic `f` the modulus has no interior minima
/// away from zeros, so such seeds are artifacts of the truncation). Interior
/// seeds that fail to converge are returned with `converged = false`.
pub fn find_zeros<F>(f: F, rect: Rect, opts: &ZeroOptions) -> Result<Vec<Root>>
where
    F: Fn(C64) -> C64 + Sync,
{
    rect.validate()?;
    if opts.nx < 2 || opts.ny < 1 {
        return Err(ScatterError::InvalidArgument(
            "root search grid needs nx >= 2 and ny >= 1".into(),
        ));
    }
    let (nx, ny) = (opts.nx, opts.ny);
    let node = |i: usize, j: usize| {
        let x = rect.re_min + (rect.re_max - rect.re_min) * i as f64 / (nx - 1) as f64;
        let y = if ny == 1 {
            0.5 * (rect.im_min + rect.im_max)
        } else {
            rect.im_min + (rect.im_max - rect.im_min) * j as f64 / (ny - 1) as f64
        };
        C64::new(x, y)
    };
    let values: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| norm_or_inf(f(node(idx % nx, idx / nx))))
        .collect();
    let at = |i: usize, j: usize| values[j * nx + i];

    let mut seeds = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = at(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    let w = at(ii as usize, jj as usize);
                    // strict on one side so that plateaus yield a single seed
                    let earlier = (jj, ii) < (j as i64, i as i64);
                    if w < v || (earlier && w == v) {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                let edge = i == 0 || i == nx - 1 || (ny > 1 && (j == 0 || j == ny - 1));
                seeds.push((node(i, j), edge));
            }
        }
    }

    let refined: Vec<(Root, bool)> = seeds
        .par_iter()
        .map(|&(k, edge)| (newton(&f, k, opts), edge))
        .collect();

    let mut roots: Vec<Root> = Vec::new();
    for (root, edge) in refined {
        if !rect.contains(root.k) {
            if !root.converged && !edge {
                log::debug!("seed left the search region without converging: {:?}", root);
            }
            continue;
        }
        if !root.converged && edge {
            continue;
        }
        if let Some(existing) = roots
            .iter_mut()
            .find(|r| (r.k - root.k).norm() <= opts.tol_sep)
        {
            if root.residual < existing.residual {
                *existing = root;
            }
        } else {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| {
        a.k.re
            .total_cmp(&b.k.re)
            .then_with(|| a.k.im.total_cmp(&b.k.im))
    });
    Ok(roots)
}

/// Number of zeros minus poles of `f` inside `rect`, from the winding of `f`
/// along the boundary sampled at `per_side` points per edge.
pub fn count_zeros<F>(f: F, rect: Rect, per_side: usize) -> Result<i64>
where
    F: Fn(C64) -> C64,
{
    rect.validate()?;
    let n = per_side.max(8);
    let corners = [
        C64::new(rect.re_min, rect.im_min),
        C64::new(rect.re_max, rect.im_min),
        C64::new(rect.re_max, rect.im_max),
        C64::new(rect.re_min, rect.im_max),
    ];
    let mut total = 0.0;
    let mut prev = f(corners[0]);
    for side in 0..4 {
        let (a, b) = (corners[side], corners[(side + 1) % 4]);
        for s in 1..=n {
            let cur = f(a + (b - a) * (s as f64 / n as f64));
            if prev.norm() == 0.0 || cur.norm() == 0.0 {
                return Err(ScatterError::InvalidArgument(
                    "function vanishes on the contour".into(),
                ));
            }
            total += (cur / prev).arg();
            prev = cur;
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn linear_function() {
        let target = c(1.0, 2.0);
        let roots = find_zeros(
            |k| k - target,
            Rect::new(-5.0, 5.0, -5.0, 5.0),
            &ZeroOptions {
                nx: 101,
                ny: 101,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].converged);
        assert!((roots[0].k - target).norm() < 1e-12);
    }

    #[test]
    fn several_zeros_sorted_and_deduplicated() {
        let zs = [c(-1.0, 0.5), c(0.5, -0.25), c(2.0, 1.0)];
        let f = move |k: C64| zs.iter().map(|z| k - z).product::<C64>();
        let roots = find_zeros(
            f,
            Rect::new(-3.0, 3.0, -2.0, 2.0),
            &ZeroOptions {
                nx: 120,
                ny: 80,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(roots.len(), 3);
        for (r, z) in roots.iter().zip(zs) {
            assert!((r.k - z).norm() < 1e-10, "{:?}", r);
        }
    }

    #[test]
    fn zeros_outside_are_dropped() {
        let roots = find_zeros(
            |k| k - c(10.0, 0.0),
            Rect::new(-1.0, 1.0, -1.0, 1.0),
            &ZeroOptions {
                nx: 21,
                ny: 21,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn real_axis_zero_in_thin_rectangle() {
        let roots = find_zeros(
            |k| k.sin(),
            Rect::around_real_axis(2.0, 7.0, 1e-3),
            &ZeroOptions {
                nx: 200,
                ny: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].k - c(PI, 0.0)).norm() < 1e-12);
        assert!((roots[1].k - c(2.0 * PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn winding_count() {
        let f = |k: C64| (k - c(0.5, 0.5)) * (k + c(0.3, 0.2)) * (k - c(5.0, 0.0));
        assert_eq!(
            count_zeros(f, Rect::new(-1.0, 1.0, -1.0, 1.0), 200).unwrap(),
            2
        );
    }

    #[test]
    fn bad_rectangle() {
        assert!(find_zeros(
            |k| k,
            Rect::new(1.0, 0.0, 0.0, 1.0),
            &ZeroOptions::default()
        )
        .is_err());
    }
}
