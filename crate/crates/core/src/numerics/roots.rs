//! Bracketed root finding (Brent–Dekker).

use crate::error::{Error, Result};
use crate::Scalar;

/// Stopping rule: stop once `|f(x)| ≤ f_tol` or the bracket is narrower than `x_tol`
/// (plus a relative floor of a few ulps of `x`).
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance<T> {
    pub x_tol: T,
    pub f_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootTolerance<T> {
    fn default() -> Self {
        RootTolerance {
            x_tol: T::zero(),
            f_tol: T::zero(),
            max_iter: 200,
        }
    }
}

/// Finds a root of `f` in `[a, b]`, which must bracket a sign change
/// (a zero at either end is accepted).
///
/// Combines bisection with secant and inverse-quadratic steps; never leaves the bracket.
pub fn brent<T, F>(f: F, a: T, b: T, tol: RootTolerance<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed: f({}) = {}, f({}) = {}",
            a, fa, b, fb
        )));
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let two = T::two();
    let three = T::c(3.0);

    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let x_tol = two * T::epsilon() * b.abs() + T::half() * tol.x_tol;
        let m = T::half() * (c - b);
        if fb.abs() <= tol.f_tol || m.abs() <= x_tol || fb == T::zero() {
            return Ok(b);
        }

        if e.abs() >= x_tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = three * m * q - (x_tol * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b = if d.abs() > x_tol {
            b + d
        } else if m > T::zero() {
            b + x_tol
        } else {
            b - x_tol
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!("non-finite f({}) during root search", b)));
        }
    }

    Err(Error::Numerical(format!(
        "root search did not converge in {} iterations",
        tol.max_iter
    )))
}
