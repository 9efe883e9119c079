//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Error estimation follows QUADPACK's `qk21`/`qag`: the Kronrod–Gauss
//! difference is rescaled by the integrand's mean absolute deviation and
//! floored at the roundoff level of the rule.

use crate::Scalar;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Maximum number of subintervals kept by the adaptive driver.
pub const MAX_INTERVALS: usize = 2000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
    /// `false` when the interval budget ran out or the error stalled at roundoff.
    pub converged: bool,
}

impl<T: Scalar> Integral<T> {
    pub fn zero() -> Self {
        Integral {
            value: T::zero(),
            abs_error: T::zero(),
            converged: true,
        }
    }

    /// Sum of two integrals over adjacent ranges.
    pub fn join(self, other: Self) -> Self {
        Integral {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, k: T) -> Self {
        Integral {
            value: self.value * k,
            abs_error: self.abs_error * k.abs(),
            converged: self.converged,
        }
    }
}

/// Absolute/relative accuracy request. Satisfied when `err ≤ max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs: T::tol(abs),
            rel: T::tol(rel),
        }
    }

    fn target(&self, value: T) -> T {
        self.abs.max(self.rel * value.abs())
    }
}

fn rescale_error<T: Scalar>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::c(200.0) * err / res_asc).powf(T::c(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let fifty_eps = T::c(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        err = err.max(fifty_eps * res_abs);
    }
    err
}

/// Single application of the 21-point Kronrod rule on `[a, b]`.
pub fn gk21<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let center = T::half() * (a + b);
    let half = T::half() * (b - a);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut res_g = T::zero();
    let mut res_k = f_center * T::c(WGK[10]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half * T::c(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::c(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::c(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * T::half();
    let mut res_asc = T::c(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::c(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    (value, err)
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<T, F>(f: F, a: T, b: T, tol: Tolerance<T>) -> Integral<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if a == b {
        return Integral::zero();
    }
    let (value, err) = gk21(&f, a, b);
    let mut pieces = vec![Piece { a, b, value, err }];
    let mut total = value;
    let mut total_err = err;

    loop {
        if !(total.is_finite() && total_err.is_finite()) {
            return Integral {
                value: total,
                abs_error: total_err,
                converged: false,
            };
        }
        if total_err <= tol.target(total) {
            break;
        }
        if pieces.len() >= MAX_INTERVALS {
            return Integral {
                value: total,
                abs_error: total_err,
                converged: false,
            };
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                if p.err > be {
                    (i, p.err)
                } else {
                    (bi, be)
                }
            });
        let Piece { a, b, value, err } = pieces.swap_remove(worst);
        let mid = T::half() * (a + b);
        let width = (b - a).abs();
        let scale = a.abs().max(b.abs()).max(T::min_positive_value());
        if width <= T::c(100.0) * T::epsilon() * scale {
            // Cannot split further: accept the roundoff-limited result.
            pieces.push(Piece { a, b, value, err });
            return Integral {
                value: total,
                abs_error: total_err,
                converged: false,
            };
        }
        let (v1, e1) = gk21(&f, a, mid);
        let (v2, e2) = gk21(&f, mid, b);
        pieces.push(Piece {
            a,
            b: mid,
            value: v1,
            err: e1,
        });
        pieces.push(Piece {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
        // Re-summing keeps the total free of cancellation drift.
        total = pieces.iter().fold(T::zero(), |acc, p| acc + p.value);
        total_err = pieces.iter().fold(T::zero(), |acc, p| acc + p.err);
    }

    Integral {
        value: total,
        abs_error: total_err,
        converged: true,
    }
}

/// Integrates `f` over `[a, ∞)` through `t = a + L·(1 − s)/s`, `s ∈ (0, 1]`,
/// with `L = max(|a|, 1)`. Endpoints of the mapped range are never sampled.
pub fn integrate_to_infinity<T, F>(f: F, a: T, tol: Tolerance<T>) -> Integral<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let length = a.abs().max(T::one());
    let mapped = |s: T| {
        let t = a + length * (T::one() - s) / s;
        let v = f(t);
        if v == T::zero() {
            T::zero()
        } else {
            v * length / (s * s)
        }
    };
    integrate(mapped, T::zero(), T::one(), tol)
}
