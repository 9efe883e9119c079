//! Shape-preserving piecewise cubic Hermite interpolation (Fritsch–Butland slopes).

use super::roots::{brent, RootTolerance};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic<T> {
    knots: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Scalar> MonotoneCubic<T> {
    /// `knots` strictly increasing, `values` strictly monotone, at least two points.
    /// Callers validate; this only asserts in debug builds.
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Self {
        debug_assert!(knots.len() >= 2 && knots.len() == values.len());
        let n = knots.len();
        let h: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|k| (values[k + 1] - values[k]) / h[k]).collect();

        let mut slopes = vec![T::zero(); n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 == T::zero() || d1 == T::zero() || d0.signum() != d1.signum() {
                    slopes[k] = T::zero();
                } else {
                    let w1 = T::two() * h[k] + h[k - 1];
                    let w2 = h[k] + T::two() * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        MonotoneCubic {
            knots,
            values,
            slopes,
        }
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn segment_of_knot(&self, x: T) -> usize {
        let k = self.knots.partition_point(|&t| t <= x);
        k.saturating_sub(1).min(self.knots.len() - 2)
    }

    fn eval_segment(&self, k: usize, x: T) -> T {
        let h = self.knots[k + 1] - self.knots[k];
        let t = (x - self.knots[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::two();
        let three = T::c(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.values[k]
            + h10 * h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.slopes[k + 1]
    }

    /// Evaluates at `x`, clamped to the knot range. Knots are reproduced exactly.
    pub fn eval(&self, x: T) -> T {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let k = self.segment_of_knot(x);
        if x == self.knots[k] {
            return self.values[k];
        }
        self.eval_segment(k, x)
    }

    /// Inverse of the (monotone) interpolant: the knot-space point mapping to `y`,
    /// clamped to the value range.
    pub fn inverse(&self, y: T) -> T {
        let n = self.values.len();
        let increasing = self.values[n - 1] > self.values[0];
        let (lo_v, hi_v) = if increasing {
            (self.values[0], self.values[n - 1])
        } else {
            (self.values[n - 1], self.values[0])
        };
        if y <= lo_v {
            return if increasing { self.knots[0] } else { self.knots[n - 1] };
        }
        if y >= hi_v {
            return if increasing { self.knots[n - 1] } else { self.knots[0] };
        }
        let k = if increasing {
            self.values.partition_point(|&v| v <= y)
        } else {
            self.values.partition_point(|&v| v >= y)
        }
        .saturating_sub(1)
        .min(n - 2);
        if self.values[k] == y {
            return self.knots[k];
        }
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        brent(
            |x| self.eval_segment(k, x) - y,
            a,
            b,
            RootTolerance {
                x_tol: T::zero(),
                f_tol: T::zero(),
                max_iter: 200,
            },
        )
        .unwrap_or_else(|_| {
            // Monotone segment always brackets; fall back to linear interpolation.
            a + (b - a) * (y - self.values[k]) / (self.values[k + 1] - self.values[k])
        })
    }
}

fn edge_slope<T: Scalar>(h0: T, h1: T, d0: T, d1: T) -> T {
    let s = ((T::two() * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        T::zero()
    } else if d0.signum() != d1.signum() && s.abs() > T::c(3.0) * d0.abs() {
        T::c(3.0) * d0
    } else {
        s
    }
}
