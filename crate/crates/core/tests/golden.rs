//! Small diagrams whose SVG is worked out by hand.

use cdiag_core::compile;
use cdiag_core::settings::CompileOptions;
use cdiag_core::styles::EmMetrics;

fn svg(src: &str) -> String {
    compile::compile_svg(src, &CompileOptions::default(), &EmMetrics::default()).unwrap()
}

// Em model: vertex "A" is 5pt wide, 7pt high, 2pt deep; label "f" has
// h + d = 321126 + 91750 = 412876sp. xgrid is 1cm = 1864679sp.
//
// Columns sit at 0 and 3729358. The shaft is trimmed by half a box plus
// the 2pt cellpush, so it runs from 4.5pt to 3729358sp - 4.5pt.
// The label centre is 3pt + 206438sp above the shaft, so its top edge is
// at -609484sp, which is the top of the drawing. The arrowhead reaches
// 2.5pt below the axis, plus .2pt of stroke and a .01pt margin: 177602sp.
// Left edge is -2.5pt. With the 5pt pad the origin moves by (491520, 937164)sp.
const ONE_ARROW: &str = r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="71.905pt" height="22.010pt" viewBox="0 0 71.905 22.010">
<g font-family="serif">
<text x="7.500" y="14.300" text-anchor="middle" font-size="10.000" fill="rgb(0,0,0)">A</text>
<text x="64.405" y="14.300" text-anchor="middle" font-size="10.000" fill="rgb(0,0,0)">B</text>
<path d="M12.000,14.300 L59.905,14.300" stroke="rgb(0,0,0)" stroke-width="0.400" fill="none"/>
<path class="arrowhead" d="M-4,-2.5 Q-1.5,-0.5 0,0 Q-1.5,0.5 -4,2.5" transform="matrix(1.0000 0.0000 0.0000 1.0000 59.905 14.300)" stroke="rgb(0,0,0)" stroke-width="0.400" fill="none"/>
<text x="35.953" y="9.900" text-anchor="middle" font-size="7.000" fill="rgb(0,0,0)">f</text>
</g>
</svg>
"#;

#[test]
fn one_labelled_arrow() {
    assert_eq!(svg(r"A & \rTo^{f} & B"), ONE_ARROW);
}

// A downward arrow: head glyph rotated a quarter turn, label to the right
// of travel, left-anchored 3pt off the shaft.
#[test]
fn vertical_arrow_with_side_label() {
    let out = svg(r"A \\ \dTo>{g} \\ B");
    assert!(out.contains(r#"transform="matrix(0.0000 1.0000 -1.0000 0.0000 "#), "{out}");
    assert!(out.contains(r#"text-anchor="end""#) || out.contains(r#"text-anchor="start""#), "{out}");
}

#[test]
fn gridline_overlay_counts() {
    let out = compile::compile_svg(r"\Diagram[gridlines] A & B & C \\ D & E & F", &CompileOptions::default(), &EmMetrics::default()).unwrap();
    assert_eq!(out.matches(r#"stroke="rgb(128,128,128)""#).count(), 3 + 2);
}
