//! Property tests over generated diagrams and the arithmetic kernel.

use cdiag_core::cache;
use cdiag_core::compile;
use cdiag_core::dsl::{self, Cell};
use cdiag_core::fixedmath::{self, Octant, MULDIV_FAST_LIMIT};
use cdiag_core::layout;
use cdiag_core::settings::CompileOptions;
use cdiag_core::styles::EmMetrics;
use cdiag_core::units;
use proptest::prelude::*;

const DIRS: [&str; 8] = ["r", "rd", "d", "ld", "l", "lu", "u", "ru"];
const STYLES: [&str; 8] = ["To", "Epi", "Into", "Two", "Eq", "Line", "Dots", "Mapsto"];

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => Just(String::new()),
        3 => "[A-Z][a-z]{0,6}",
        1 => Just(r"\stop".to_string()),
        1 => Just(r"\nodot".to_string()),
        1 => ("[A-Z]", 1..4i32).prop_map(|(t, n)| format!(r"{t}\dx{{{n}pt}}")),
        4 => (0..8usize, 0..8usize, proptest::option::of("[a-z]{1,5}"), any::<bool>()).prop_map(|(d, s, label, below)| {
            let mut out = format!(r"\{}{}", DIRS[d], STYLES[s]);
            if let Some(l) = label {
                out.push_str(&format!("{}{{{l}}}", if below { "_" } else { "^" }));
            }
            out
        }),
    ]
}

fn diagram() -> impl Strategy<Value = String> {
    let header = prop_oneof![Just(r"\Diagram"), Just(r"\Diag"), Just(r"\Dg"), Just(r"\Long"), Just(r"\Diagram[flexible]")];
    (header, 1..4usize, 1..5usize)
        .prop_flat_map(|(h, rows, cols)| (Just(h), proptest::collection::vec(proptest::collection::vec(cell(), cols), rows)))
        .prop_map(|(h, rows)| {
            let body: Vec<String> = rows.iter().map(|r| r.join(" & ")).collect();
            format!("{h}\n{}\n", body.join(" \\\\\n"))
        })
}

fn has_movements(ast: &dsl::DiagramAst) -> bool {
    ast.cells().any(|(_, _, c)| matches!(c, Cell::Vertex(v) if !v.movements.is_empty()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compile_is_total_and_deterministic(src in diagram()) {
        let m = EmMetrics::default();
        let opts = CompileOptions::default();
        let first = compile::compile(&src, &opts, &m);
        let second = compile::compile(&src, &opts, &m);
        match (first, second) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.svg(), b.svg()),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "outcome changed between runs"),
        }
    }

    #[test]
    fn canonical_form_is_a_fixed_point(src in diagram()) {
        let ast = dsl::parse(&src).unwrap();
        let text = dsl::canonicalize(&ast);
        let again = dsl::parse(&text).unwrap();
        prop_assert_eq!(&again, &ast);
        prop_assert_eq!(dsl::canonicalize(&again), text);
    }

    #[test]
    fn solved_columns_meet_every_constraint(src in diagram()) {
        let m = EmMetrics::default();
        let flex = CompileOptions { flexible: Some(true), ..CompileOptions::default() };
        let p = compile::prepare(&src, &flex).unwrap();
        let l = layout::layout(&p.ast, &p.settings, &m);
        let sol = layout::flexible_solve(&l.constraints, p.ast.column_count(), l.grid.gravity);
        for c in &l.constraints {
            prop_assert!(c.deficiency(&sol.x) <= 0, "{:?} unmet by {:?}", c, sol.x);
        }
        prop_assert!(sol.x.windows(2).all(|w| w[0] <= w[1]));
        if !has_movements(&p.ast) {
            for c in &l.constraints {
                prop_assert!(c.deficiency(&l.grid.x) <= 0);
            }
        }
    }

    #[test]
    fn drawing_stays_inside_its_bounds(src in diagram(), dotted in any::<bool>(), gridlines in any::<bool>()) {
        let opts = CompileOptions { dotted, gridlines, ..CompileOptions::default() };
        if let Ok(c) = compile::compile(&src, &opts, &EmMetrics::default()) {
            let (x0, y0, x1, y1) = c.drawing.bounds();
            for item in &c.drawing.items {
                let (a, b, cc, d) = item.bbox();
                prop_assert!(a >= x0 && b >= y0 && cc <= x1 && d <= y1);
            }
            prop_assert!(x0 <= 0 && y0 <= 0);
        }
    }

    #[test]
    fn cache_records_replay_exactly(src in diagram()) {
        if let Ok(c) = compile::compile(&src, &CompileOptions::default(), &EmMetrics::default()) {
            let digest = cache::digest(&src).unwrap();
            let text = cache::encode(&digest, &c.drawing);
            let (d, drawing) = cache::decode(&text).unwrap();
            prop_assert_eq!(d, digest);
            prop_assert_eq!(&drawing, &c.drawing);
        }
    }

    #[test]
    fn muldiv_fast_path_follows_its_formula(a in -1_000_000i32..1_000_000, b in 0..MULDIV_FAST_LIMIT, c in 1i32..1_000_000_000) {
        let want = ((i64::from(b) * 100) / i64::from(c)) * i64::from(a) / 100;
        prop_assert_eq!(fixedmath::muldiv(a, b, c).ok().map(i64::from), Some(want));
        prop_assert_eq!(fixedmath::muldiv(-a, b, c).unwrap(), -fixedmath::muldiv(a, b, c).unwrap());
    }

    #[test]
    fn hypot_is_symmetric(dx in 1i32..1 << 29, dy in 1i32..1 << 29) {
        let h = fixedmath::hypot(dx, dy).unwrap();
        prop_assert_eq!(h, fixedmath::hypot(dy, dx).unwrap());
        prop_assert_eq!(h, fixedmath::hypot(-dx, dy).unwrap());
        prop_assert_eq!(h, fixedmath::hypot(dx, -dy).unwrap());
        // The trace never overshoots the true length.
        prop_assert!(f64::from(h) <= f64::from(dx).hypot(f64::from(dy)));
    }

    #[test]
    fn isqrt_is_monotone(n in 0i32..(32768 * 32768 - 1)) {
        prop_assert!(fixedmath::isqrt(n) <= fixedmath::isqrt(n + 1));
    }

    #[test]
    fn slope_lies_in_its_octant(dh in -1_000_000i32..1_000_000, dv in -1_000_000i32..1_000_000) {
        prop_assume!(dh != 0 || dv != 0);
        let deg = fixedmath::slope_degrees(dh, dv);
        prop_assert!((0..360).contains(&deg));
        let o = fixedmath::octant(dh, dv).unwrap();
        let centre = match o {
            Octant::R => 0,
            Octant::Ru => 45,
            Octant::U => 90,
            Octant::Lu => 135,
            Octant::L => 180,
            Octant::Ld => 225,
            Octant::D => 270,
            Octant::Rd => 315,
        };
        let off = (deg - centre).rem_euclid(360);
        prop_assert!(off < 90 || off > 270, "{} degrees in octant {:?}", deg, o);
    }

    #[test]
    fn lengths_format_and_parse_back(sp in -(1i32 << 30)..(1 << 30)) {
        prop_assert_eq!(units::parse_length(&units::format_length(sp)).unwrap(), sp);
    }

    #[test]
    fn fractions_format_and_parse_back(raw in -(1i32 << 20)..(1 << 20)) {
        prop_assert_eq!(units::parse_fraction(&units::format_fraction(raw)).unwrap(), raw);
    }
}
