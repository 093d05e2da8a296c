//! The Lobachevsky function `Λ(x) = −∫₀ˣ ln|2 sin t| dt`.
//!
//! `Λ` is odd and π-periodic. After reduction to `|x| ≤ π/2` it is evaluated
//! from the expansion
//!
//! ```text
//! Λ(x) = x − x ln|2x| + x Σ_{n≥1} ζ(2n) / (n (2n+1)) · (x/π)^{2n}
//! ```
//!
//! whose ratio is at most 1/4 on the reduced range, so a fixed number of
//! terms gives full double precision everywhere.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Low-order part of π, so that `PI + PI_LO` carries about 107 bits.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

const TERMS: usize = 30;

/// An angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Radians(pub f64);

impl Radians {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("non-finite angle {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Radians> for f64 {
    fn from(r: Radians) -> f64 {
        r.0
    }
}

fn coefficients() -> &'static [f64; TERMS] {
    static COEFFS: OnceLock<[f64; TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let n = (i + 1) as f64;
            *slot = zeta_even(i + 1) / (n * (2.0 * n + 1.0));
        }
        c
    })
}

/// ζ(2n) for n ≥ 1.
fn zeta_even(n: usize) -> f64 {
    let p2 = PI * PI;
    match n {
        1 => p2 / 6.0,
        2 => p2 * p2 / 90.0,
        3 => p2 * p2 * p2 / 945.0,
        4 => p2 * p2 * p2 * p2 / 9450.0,
        _ => {
            // Direct sum plus Euler–Maclaurin tail; accurate to rounding for s ≥ 10.
            let s = 2.0 * n as f64;
            let k = 24.0f64;
            let head: f64 = (1..24).map(|j| (j as f64).powf(-s)).sum();
            let tail = k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
                - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0;
            head + tail
        }
    }
}

/// Reduces `x` modulo π into `[−π/2, π/2]`.
fn reduce(x: f64) -> f64 {
    let n = (x / PI).round();
    let r = (x - n * PI) - n * PI_LO;
    r.clamp(-PI / 2.0, PI / 2.0)
}

fn lobachevsky_reduced(r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let a = r.abs();
    let u2 = (a / PI) * (a / PI);
    let coeffs = coefficients();
    // Horner in u² from the smallest term.
    let mut series = 0.0;
    for &c in coeffs.iter().rev() {
        series = series * u2 + c;
    }
    series *= u2;
    let value = a - a * (2.0 * a).ln() + a * series;
    value.copysign(r)
}

/// Λ(x) for a validated angle.
pub fn lobachevsky(x: Radians) -> f64 {
    lobachevsky_reduced(reduce(x.0))
}

/// Λ(x) for a raw value, rejecting non-finite input.
pub fn lobachevsky_checked(x: f64) -> Result<f64> {
    Radians::new(x).map(lobachevsky)
}

/// Λ(x) on finite input. Non-finite input yields NaN; kernels that have
/// already validated their angles use this form.
pub(crate) fn lob(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    lobachevsky_reduced(reduce(x))
}
