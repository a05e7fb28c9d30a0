//! Thin wrappers over `libm` so the rest of the crate reads like std code.

pub use core::f64::consts::{PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Reduce an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a - TAU * floor(a / TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Reduce `x` modulo `period` into (-period/2, period/2].
/// x mod period in [0, period).
pub fn rem_euclid(x: f64, period: f64) -> f64 {
    let r = x - period * floor(x / period);
    if r >= period {
        0.0
    } else {
        r
    }
}

pub fn wrap_centered(x: f64, period: f64) -> f64 {
    let mut r = x - period * floor(x / period);
    if r > 0.5 * period {
        r -= period;
    }
    r
}
