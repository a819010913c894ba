//! Overflow-checked integer arithmetic on 32-bit scaled points.
//!
//! Every routine here reproduces the engine's integer trace step for step:
//! divisions truncate toward zero, and the approximations (the two-path
//! `muldiv`, the bit-by-bit `isqrt`, the halving `hypot`) are kept exactly
//! as the engine performs them. The only difference is that intermediate
//! results leaving the signed 32-bit range are reported as errors instead
//! of wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A length in scaled points (1 pt = 65536 sp).
pub type Sp = i32;

/// One point in scaled points.
pub const PT: Sp = 65536;

/// `b` values at or above this take the slow `muldiv` path.
pub const MULDIV_FAST_LIMIT: i32 = 10_737_418;

/// Components at or above this magnitude are halved before squaring in `hypot`.
pub const HYPOT_LIMIT: i32 = 23_171;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("overflow")]
    Overflow,
    #[error("degenerate ratio")]
    DegenerateRatio,
}

pub type MathResult<T> = Result<T, MathError>;

fn mul(a: i32, b: i32) -> MathResult<i32> {
    a.checked_mul(b).ok_or(MathError::Overflow)
}

fn div(a: i32, b: i32) -> MathResult<i32> {
    if b == 0 {
        return Err(MathError::DegenerateRatio);
    }
    a.checked_div(b).ok_or(MathError::Overflow)
}

fn neg(a: i32) -> MathResult<i32> {
    a.checked_neg().ok_or(MathError::Overflow)
}

/// The engine's approximation of `a * b / c`.
///
/// Fast path (`b < 10737418`): `((b * 100) / c) * a / 100`.
/// Slow path: negate `a` and `c` if `a < 0`, find the smallest power of two
/// `d >= max(a, 2)` by doubling, and return `((b / d) * a) / (c / d)`.
pub fn muldiv(a: i32, b: i32, c: i32) -> MathResult<i32> {
    if c == 0 {
        return Err(MathError::DegenerateRatio);
    }
    if b < MULDIV_FAST_LIMIT {
        let t = div(mul(b, 100)?, c)?;
        let t = mul(t, a)?;
        return div(t, 100);
    }
    let (mut a, mut c) = (a, c);
    if a < 0 {
        a = neg(a)?;
        c = neg(c)?;
    }
    let mut d: i32 = 1;
    loop {
        d = mul(d, 2)?;
        if a <= d {
            break;
        }
    }
    let scaled_b = div(b, d)?;
    let scaled_c = div(c, d)?;
    if scaled_c == 0 {
        return Err(MathError::DegenerateRatio);
    }
    div(mul(scaled_b, a)?, scaled_c)
}

/// Which branch `muldiv` takes for the given `b`.
pub fn muldiv_is_fast(b: i32) -> bool {
    b < MULDIV_FAST_LIMIT
}

/// Bit-by-bit integer square root.
///
/// Floor-correct for `n < 32768²`; saturates at 32767 above that.
/// Negative input is treated as zero.
pub fn isqrt(n: i32) -> i32 {
    let mut step: i32 = 32768;
    let mut acc: i32 = 0;
    loop {
        step /= 2;
        let probe = acc + step;
        // probe <= 32767, so the square fits.
        if probe * probe <= n {
            acc = probe;
        }
        if step <= 1 {
            break;
        }
    }
    acc
}

/// `hypot` together with the power-of-two scale factor the trace used.
///
/// Both components should be nonzero; axis-aligned lengths are the
/// caller's business (see [`segment_length`]).
pub fn hypot_traced(dx: Sp, dy: Sp) -> MathResult<(Sp, i32)> {
    debug_assert!(dx != 0 && dy != 0, "hypot called on an axis-aligned vector");
    let mut x = i64::from(dx).abs();
    let mut y = i64::from(dy).abs();
    let mut k: i64 = 1;
    while !(x < i64::from(HYPOT_LIMIT) && y < i64::from(HYPOT_LIMIT)) {
        x /= 2;
        y /= 2;
        k *= 2;
    }
    let root = i64::from(isqrt((x * x + y * y) as i32));
    let value = i32::try_from(root * k).map_err(|_| MathError::Overflow)?;
    let k = i32::try_from(k).map_err(|_| MathError::Overflow)?;
    Ok((value, k))
}

/// Euclidean length of `(dx, dy)` by repeated halving and `isqrt`.
pub fn hypot(dx: Sp, dy: Sp) -> MathResult<Sp> {
    hypot_traced(dx, dy).map(|(v, _)| v)
}

/// Length of a segment: the absolute delta when axis-aligned, `hypot` otherwise.
pub fn segment_length(dx: Sp, dy: Sp) -> MathResult<Sp> {
    match (dx, dy) {
        (0, 0) => Ok(0),
        (0, d) | (d, 0) => d.checked_abs().ok_or(MathError::Overflow),
        _ => hypot(dx, dy),
    }
}

/// Normalizes degrees into `[0, 360)`; exactly 360 maps to 0.
pub fn mod360(x: i32) -> i32 {
    x.rem_euclid(360)
}

/// Compass direction of an arrow, numbered as the engine's direction codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Octant {
    R = 1,
    Rd = 2,
    D = 3,
    Ld = 4,
    L = 5,
    Lu = 6,
    U = 7,
    Ru = 8,
}

impl Octant {
    pub const ALL: [Octant; 8] = [
        Octant::R,
        Octant::Rd,
        Octant::D,
        Octant::Ld,
        Octant::L,
        Octant::Lu,
        Octant::U,
        Octant::Ru,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Octant> {
        Octant::ALL.get(usize::from(code).wrapping_sub(1)).copied()
    }

    /// Unit step in `(row, col)` terms, rows growing downward.
    pub fn step(self) -> (i32, i32) {
        match self {
            Octant::R => (0, 1),
            Octant::Rd => (1, 1),
            Octant::D => (1, 0),
            Octant::Ld => (1, -1),
            Octant::L => (0, -1),
            Octant::Lu => (-1, -1),
            Octant::U => (-1, 0),
            Octant::Ru => (-1, 1),
        }
    }

    pub fn reverse(self) -> Octant {
        Octant::from_code((self.code() + 3) % 8 + 1).expect("code in range")
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Octant::R | Octant::L)
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Octant::U | Octant::D)
    }

    pub fn name(self) -> &'static str {
        match self {
            Octant::R => "r",
            Octant::Rd => "rd",
            Octant::D => "d",
            Octant::Ld => "ld",
            Octant::L => "l",
            Octant::Lu => "lu",
            Octant::U => "u",
            Octant::Ru => "ru",
        }
    }
}

impl fmt::Display for Octant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Compass octant of a delta; `dh` grows rightward, `dv` upward.
pub fn octant(dh: i32, dv: i32) -> Option<Octant> {
    use std::cmp::Ordering::*;
    // The engine's table keys on (vertical, horizontal).
    match (dv.cmp(&0), dh.cmp(&0)) {
        (Greater, Greater) => Some(Octant::Ru),
        (Greater, Equal) => Some(Octant::U),
        (Greater, Less) => Some(Octant::Lu),
        (Equal, Greater) => Some(Octant::R),
        (Equal, Equal) => None,
        (Equal, Less) => Some(Octant::L),
        (Less, Greater) => Some(Octant::Rd),
        (Less, Equal) => Some(Octant::D),
        (Less, Less) => Some(Octant::Ld),
    }
}

/// Distance along a ray from a box anchor to where it leaves the padded box.
///
/// `ex`/`ey` are the half-extents on the exit side, `(dx, dy)` the ray
/// direction and `len` its length. The binding axis is the one the ray
/// crosses first; only that axis goes through `muldiv` unless both tie.
pub fn clip_distance(ex: Sp, ey: Sp, dx: Sp, dy: Sp, len: Sp) -> MathResult<Sp> {
    debug_assert!(dx != 0 || dy != 0, "clip_distance on a zero ray");
    let adx = dx.checked_abs().ok_or(MathError::Overflow)?;
    let ady = dy.checked_abs().ok_or(MathError::Overflow)?;
    if adx == 0 {
        return Ok(ey);
    }
    if ady == 0 {
        return Ok(ex);
    }
    let x_rate = i64::from(adx) * i64::from(ey);
    let y_rate = i64::from(ady) * i64::from(ex);
    match x_rate.cmp(&y_rate) {
        std::cmp::Ordering::Greater => muldiv(ex, len, adx),
        std::cmp::Ordering::Less => muldiv(ey, len, ady),
        std::cmp::Ordering::Equal => Ok(muldiv(ex, len, adx)?.min(muldiv(ey, len, ady)?)),
    }
}

/// `tan(k°) * 65536`, rounded, for k in 0..=45.
const TAN_TABLE: [i64; 46] = [
    0, 1144, 2289, 3435, 4583, 5734, 6888, 8047, 9210, 10380, 11556, 12739, 13930, 15130, 16340,
    17560, 18792, 20036, 21294, 22566, 23853, 25157, 26478, 27818, 29179, 30560, 31964, 33392,
    34846, 36327, 37837, 39378, 40951, 42560, 44205, 45889, 47615, 49385, 51202, 53070, 54991,
    56970, 59009, 61113, 63287, 65536,
];

/// floor(atan(num/den)) in degrees for 0 <= num <= den, den > 0.
fn atan_floor_first_octant(num: i64, den: i64) -> i32 {
    if num == den {
        return 45;
    }
    let scaled = num * 65536;
    // largest k with tan(k) * den <= num * 65536
    let mut k = 0;
    while k < 44 && TAN_TABLE[k + 1] * den <= scaled {
        k += 1;
    }
    k as i32
}

/// Slope angle of `(dh, dv)` in whole degrees (truncated), `dv` upward, in `[0, 360)`.
///
/// Integer-only: the first octant uses a fixed tangent table.
pub fn slope_degrees(dh: Sp, dv: Sp) -> i32 {
    let a = i64::from(dh).abs();
    let b = i64::from(dv).abs();
    if a == 0 && b == 0 {
        return 0;
    }
    // floor of the first-quadrant angle, and whether it is exact
    let (floor, exact) = if b == 0 {
        (0, true)
    } else if a == 0 {
        (90, true)
    } else if a == b {
        (45, true)
    } else if b < a {
        (atan_floor_first_octant(b, a), false)
    } else {
        (89 - atan_floor_first_octant(a, b), false)
    };
    let angle = match (dh >= 0, dv >= 0) {
        (true, true) => floor,
        (false, true) if exact => 180 - floor,
        (false, true) => 179 - floor,
        (false, false) => 180 + floor,
        (true, false) if exact => 360 - floor,
        (true, false) => 359 - floor,
    };
    mod360(angle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn muldiv_fast_path_trace() {
        assert_eq!(muldiv(48, 700, 100), Ok(336));
        for n in [1, 7, 99, 1000, 999_999] {
            assert_eq!(muldiv(1, n, n), Ok(1));
        }
    }

    #[test]
    fn muldiv_slow_path_trace() {
        // d = 8: (20000000 / 8) * 7 / (400 / 8)
        assert!(!muldiv_is_fast(20_000_000));
        assert_eq!(muldiv(7, 20_000_000, 400), Ok(350_000));
        // c / d truncates to zero
        assert_eq!(muldiv(7, 20_000_000, 4), Err(MathError::DegenerateRatio));
        // a <= 2 still scales by 2
        assert_eq!(muldiv(1, 20_000_000, 10), Ok(2_000_000));
    }

    #[test]
    fn muldiv_errors() {
        assert_eq!(muldiv(1, 5, 0), Err(MathError::DegenerateRatio));
        assert_eq!(muldiv(i32::MAX, 10_000, 1), Err(MathError::Overflow));
    }

    #[test]
    fn muldiv_negative_multiplier_slow_path() {
        // a < 0 negates a and c together
        assert_eq!(muldiv(-7, 20_000_000, 400), Ok(-350_000));
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(2), 1);
        assert_eq!(isqrt(536_895_241), 23171);
        assert_eq!(isqrt(i32::MAX), 32767);
    }

    #[test]
    fn hypot_examples() {
        assert_eq!(hypot(3, 4), Ok(5));
        assert_eq!(hypot_traced(30000, 40000), Ok((50000, 2)));
        let (v, k) = hypot_traced(65536, 65537).unwrap();
        let exact = (2f64.sqrt() * 65536.0).round() as i32;
        assert!((v - exact).abs() <= k.max(4), "{v} vs {exact}");
    }

    #[test]
    fn segment_length_axis_aligned() {
        assert_eq!(segment_length(0, -7), Ok(7));
        assert_eq!(segment_length(12, 0), Ok(12));
        assert_eq!(segment_length(0, 0), Ok(0));
    }

    #[test]
    fn mod360_examples() {
        assert_eq!(mod360(360), 0);
        assert_eq!(mod360(-90), 270);
        assert_eq!(mod360(725), 5);
    }

    #[test]
    fn octant_examples() {
        assert_eq!(octant(1, 0), Some(Octant::R));
        assert_eq!(octant(0, 0), None);
        assert_eq!(octant(1, -1), Some(Octant::Rd));
        assert_eq!(octant(-1, 1), Some(Octant::Lu));
    }

    #[test]
    fn octant_steps_and_reverse() {
        for o in Octant::ALL {
            let (dr, dc) = o.step();
            assert_eq!(octant(dc, -dr), Some(o));
            assert_eq!(o.reverse().reverse(), o);
            let (rr, rc) = o.reverse().step();
            assert_eq!((rr, rc), (-dr, -dc));
            assert_eq!(Octant::from_code(o.code()), Some(o));
        }
        assert_eq!(Octant::from_code(0), None);
        assert_eq!(Octant::from_code(9), None);
    }

    #[test]
    fn clip_distance_examples() {
        assert_eq!(clip_distance(327_680, 327_680, 30, 40, 50), Ok(409_600));
        assert_eq!(clip_distance(0, 0, 30, 40, 50), Ok(0));
        assert_eq!(clip_distance(0, 0, 0, 1, 1), Ok(0));
        assert_eq!(clip_distance(999, 131_072, 0, 5, 5), Ok(131_072));
        assert_eq!(clip_distance(131_072, 999, -5, 0, 5), Ok(131_072));
    }

    #[test]
    fn slope_degrees_cardinal_and_diagonal() {
        assert_eq!(slope_degrees(1, 0), 0);
        assert_eq!(slope_degrees(0, 1), 90);
        assert_eq!(slope_degrees(-1, 0), 180);
        assert_eq!(slope_degrees(0, -1), 270);
        assert_eq!(slope_degrees(5, 5), 45);
        assert_eq!(slope_degrees(-5, 5), 135);
        assert_eq!(slope_degrees(-5, -5), 225);
        assert_eq!(slope_degrees(5, -5), 315);
    }

    #[test]
    fn slope_degrees_matches_float_oracle() {
        let mut mismatches = 0;
        for dh in (-60..=60).step_by(7) {
            for dv in (-60..=60).step_by(5) {
                if dh == 0 && dv == 0 {
                    continue;
                }
                let oracle = (f64::from(dv).atan2(f64::from(dh)).to_degrees()).rem_euclid(360.0);
                let got = f64::from(slope_degrees(dh, dv));
                // truncation of the oracle, allowing the table's rounding at exact boundaries
                let diff = (oracle - got).rem_euclid(360.0);
                if !(diff < 1.0 + 1e-9 || diff > 359.999) {
                    mismatches += 1;
                    eprintln!("dh={dh} dv={dv} oracle={oracle} got={got}");
                }
            }
        }
        assert_eq!(mismatches, 0);
    }
}
