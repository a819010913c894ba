//! Label anchoring: along-arrow position, side, perpendicular offset and rotation.

use serde::{Deserialize, Serialize};

use crate::dsl::{Label, LabelCode, Slide};
use crate::fixedmath::{slope_degrees, Sp};
use crate::settings::Settings;
use crate::styles::{BoxSize, Metrics, Param, TextContext};
use crate::units::FRACTION_ONE;

/// Anchor codes: the label extends right of, is centered on, or extends left of its anchor.
pub const ANCHOR_EXTEND_RIGHT: u8 = 0;
pub const ANCHOR_CENTERED: u8 = 1;
pub const ANCHOR_EXTEND_LEFT: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAnchor {
    pub code: LabelCode,
    pub text: String,
    pub x: Sp,
    pub y: Sp,
    pub anchor_code: u8,
    /// Slope angle in degrees when rotated labels are on, else 0.
    pub rotation: i32,
    #[serde(rename = "box")]
    pub size: BoxSize,
    /// Placed on the shaft, which is broken around it.
    pub on_line: bool,
    /// Distance of the along-arrow point from the trimmed start.
    pub along: Sp,
}

/// A trimmed shaft: start, end, and the untrimmed direction with its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shaft {
    pub start: (Sp, Sp),
    pub end: (Sp, Sp),
    pub dx: Sp,
    pub dy: Sp,
    pub len: Sp,
}

/// `a + (b - a) * t` for a 16.16 `t`, truncating toward zero.
pub fn lerp(a: Sp, b: Sp, t: i32) -> Sp {
    let v = i64::from(a) + (i64::from(b) - i64::from(a)) * i64::from(t) / i64::from(FRACTION_ONE);
    v.clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as Sp
}

/// `n * num / den` rounded away from zero.
fn outward(n: i64, num: i64, den: i64) -> i64 {
    let p = n * num;
    let q = p.abs().div_euclid(den) + i64::from(p.abs().rem_euclid(den) != 0);
    if p < 0 {
        -q
    } else {
        q
    }
}

/// Rotation in degrees: the slope of `(dx, dy)` (y downward) when rotated mode is on, else 0.
pub fn rotation_angle(dx: Sp, dy: Sp, rotated: bool) -> i32 {
    if rotated && (dx != 0 || dy != 0) {
        slope_degrees(dx, -dy)
    } else {
        0
    }
}

/// The rotate transform actually emitted for a label, in SVG degrees.
/// Horizontal labels stay upright; vertical ones always read bottom to top.
pub fn emitted_rotation(rotation: i32) -> Option<i32> {
    match rotation {
        0 | 180 => None,
        90 | 270 => Some(-90),
        r => Some(-r),
    }
}

/// Unit normal sign for a label code: side A (left of travel) for `^` and `<`.
pub fn on_side_a(code: LabelCode) -> bool {
    matches!(code, LabelCode::Caret | LabelCode::Lt)
}

pub fn place_label(
    label: &Label,
    shaft: &Shaft,
    style: &str,
    slide: Option<&Slide>,
    on_line: bool,
    settings: &Settings,
    metrics: &dyn Metrics,
) -> LabelAnchor {
    let size = metrics.measure(&label.text, TextContext::Label);
    let t = slide.and_then(|s| s.point).unwrap_or_else(|| settings.effective(Param::LabelPoint, style));
    let bx = lerp(shaft.start.0, shaft.end.0, t);
    let by = lerp(shaft.start.1, shaft.end.1, t);
    let us = {
        let (ux, uy) = (shaft.end.0 - shaft.start.0, shaft.end.1 - shaft.start.1);
        crate::fixedmath::segment_length(ux, uy).unwrap_or(0)
    };
    let along = lerp(0, us, t);
    let rotation = rotation_angle(shaft.dx, shaft.dy, settings.rotated_labels);
    let pad = settings.effective(Param::LabelPad, style);
    let (dx, dy, len) = (i64::from(shaft.dx), i64::from(shaft.dy), i64::from(shaft.len.max(1)));
    // Side A normal in y-down coordinates is (dy, -dx) / len.
    let sign = if on_side_a(label.code) { 1 } else { -1 };
    let (nx, ny) = (sign * dy, -sign * dx);
    let (mut x, mut y, anchor_code) = if on_line {
        (i64::from(bx), i64::from(by), ANCHOR_CENTERED)
    } else if dx == 0 && !settings.rotated_labels {
        let code = if nx > 0 { ANCHOR_EXTEND_RIGHT } else { ANCHOR_EXTEND_LEFT };
        (i64::from(bx) + nx.signum() * i64::from(pad), i64::from(by), code)
    } else {
        // Width of the label box measured along the normal.
        let tall = i64::from(size.h) + i64::from(size.d);
        let extent = if settings.rotated_labels { tall } else { (dy.abs() * i64::from(size.w) + dx.abs() * tall) / len };
        let offset = i64::from(pad) + (extent + 1) / 2;
        (i64::from(bx) + outward(nx, offset, len), i64::from(by) + outward(ny, offset, len), ANCHOR_CENTERED)
    };
    if let Some(s) = slide {
        x += i64::from(s.offx.unwrap_or(0));
        y -= i64::from(s.offy.unwrap_or(0));
    }
    let clamp = |v: i64| v.clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as Sp;
    LabelAnchor {
        code: label.code,
        text: label.text.clone(),
        x: clamp(x),
        y: clamp(y),
        anchor_code,
        rotation,
        size,
        on_line,
        along,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Settings;
    use crate::styles::{EmMetrics, StyleRegistry};

    const PT: Sp = 65536;

    fn shaft(dx: Sp, dy: Sp) -> Shaft {
        let len = crate::fixedmath::segment_length(dx, dy).unwrap();
        Shaft { start: (0, 0), end: (dx, dy), dx, dy, len }
    }

    fn place(code: LabelCode, s: &Shaft, slide: Option<&Slide>, settings: &Settings) -> LabelAnchor {
        let label = Label { code, text: "f".into() };
        place_label(&label, s, "To", slide, false, settings, &EmMetrics::default())
    }

    #[test]
    fn caret_above_horizontal() {
        let settings = Settings::new(StyleRegistry::builtin());
        let s = shaft(100 * PT, 0);
        let a = place(LabelCode::Caret, &s, None, &settings);
        // label h + d = 321126 + 91750sp, half rounds up to 206438
        assert_eq!((a.x, a.y), (50 * PT, -(3 * PT + 206_438)));
        assert_eq!(a.anchor_code, ANCHOR_CENTERED);
        let b = place(LabelCode::Under, &s, None, &settings);
        assert_eq!((b.x, b.y), (50 * PT, 3 * PT + 206_438));
    }

    #[test]
    fn slide_overrides_point_and_offsets() {
        let settings = Settings::new(StyleRegistry::builtin());
        let s = shaft(100 * PT, 0);
        let slide = Slide { point: Some(16384), offx: Some(0), offy: Some(2 * PT) };
        let a = place(LabelCode::Caret, &s, Some(&slide), &settings);
        assert_eq!(a.x, 25 * PT);
        assert_eq!(a.y, -(3 * PT + 206_438) - 2 * PT);
    }

    #[test]
    fn vertical_sides() {
        let settings = Settings::new(StyleRegistry::builtin());
        // Downward arrow: left of travel is +x.
        let s = shaft(0, 40 * PT);
        let a = place(LabelCode::Caret, &s, None, &settings);
        assert_eq!((a.x, a.anchor_code), (3 * PT, ANCHOR_EXTEND_RIGHT));
        let b = place(LabelCode::Gt, &s, None, &settings);
        assert_eq!((b.x, b.anchor_code), (-3 * PT, ANCHOR_EXTEND_LEFT));
    }

    #[test]
    fn rotation() {
        assert_eq!(rotation_angle(10, 0, true), 0);
        assert_eq!(rotation_angle(10, -10, true), 45);
        assert_eq!(rotation_angle(0, -10, true), 90);
        assert_eq!(rotation_angle(0, -10, false), 0);
        assert_eq!(emitted_rotation(90), Some(-90));
        assert_eq!(emitted_rotation(270), Some(-90));
        assert_eq!(emitted_rotation(180), None);
        assert_eq!(emitted_rotation(45), Some(-45));
    }
}
