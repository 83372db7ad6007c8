//! Bracketing root finders shared by the analyses.

use crate::error::{Error, Result};

pub const SCAN_SAMPLES: usize = 2048;
pub const ROOT_TOL: f64 = 1e-12;

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::RootNotConverged { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if !fm.is_finite() {
            return Err(Error::RootNotConverged { lo, hi });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::RootNotConverged { lo, hi })
}

/// All roots of `f` on `[lo, hi]` found by a uniform sign scan with `samples`
/// intervals followed by bisection. Exact zeros at sample points are kept.
pub fn scan_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    samples: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let h = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        roots.push(x0);
    }
    for i in 1..=samples {
        let x1 = if i == samples { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            roots.push(bisect(&f, x0, x1, tol)?);
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_finds_cubic_roots() {
        let r = scan_roots(|x| (x - 0.5) * (x - 1.0) * (x - 2.25), 0.0, 3.0, 100, 1e-12).unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.5, 1.0, 2.25]) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn scan_keeps_exact_zero_at_endpoint() {
        let r = scan_roots(|x| -x, 0.0, 1.0, 8, 1e-12).unwrap();
        assert_eq!(r, vec![0.0]);
    }
}
