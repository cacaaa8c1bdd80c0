//! Exact rational arithmetic for regime boundaries.
//!
//! The classifier compares growth exponents against critical thresholds;
//! those comparisons decide between qualitatively different limit laws, so
//! they are carried out in `Ratio<i128>` rather than floating point.

use num::rational::Ratio;
use num::{One, Signed, Zero};

pub type Rat = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rat {
    Ratio::new(numer, denom)
}

pub fn rat_int(n: i128) -> Rat {
    Ratio::from_integer(n)
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact rational value of a float via its shortest decimal representation.
///
/// Rust's `Display` for `f64` prints the shortest string that round-trips,
/// so inputs that were given as decimals (0.4, 0.005, ...) recover the exact
/// intended rational. Returns `None` if the value does not fit in `i128`
/// rationals (absurd exponents), is non-finite, or fails to reduce.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    rat_from_decimal_str(&format!("{x}"))
}

/// Parse a plain or scientific decimal literal into an exact rational.
pub fn rat_from_decimal_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut numer: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(10)? as i128;
        numer = numer.checked_mul(10)?.checked_add(d)?;
    }
    let shift = exp10 - frac_part.len() as i32;
    let mut r = Rat::new(sign * numer, 1);
    let ten = rat_int(10);
    for _ in 0..shift.abs() {
        r = if shift > 0 { r * ten } else { r / ten };
    }
    Some(r)
}

/// Render a rational as `p/q` (or just `p` when integral).
pub fn rat_display(r: Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Memory exponent `delta(q) = q d - (q - 1)/2` in exact arithmetic.
pub fn delta_rat(q: Rat, d: Rat) -> Rat {
    q * d - (q - Rat::one()) / rat_int(2)
}

pub fn delta_plus_rat(q: Rat, d: Rat) -> Rat {
    let v = delta_rat(q, d);
    if v.is_positive() {
        v
    } else {
        Rat::zero()
    }
}
