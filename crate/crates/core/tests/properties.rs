mod common;

use std::collections::BTreeSet;

use kiloscript::codegen::{emit_c, ms_to_ticks, CodegenOptions, KILOLIB_SYMBOLS};
use kiloscript::parser::parse_with_diagnostics;
use kiloscript::{format_screenplay, lower, parse_screenplay};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_screenplay;

const C_KEYWORDS: &[&str] = &[
    "break", "case", "const", "default", "define", "else", "enum", "for", "if", "include", "int", "return", "static",
    "switch", "void", "while", "unsigned", "struct", "sizeof",
];

// locals, parameters and entry points the generator names itself
const GENERATOR_LOCALS: &[&str] = &["m", "d", "s", "i", "slot", "setup", "loop", "main"];

/// Identifiers in `c` that must come from the companion header.
fn external_identifiers(c: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for line in c.lines() {
        let line = line.trim_start();
        if line.starts_with("/*") || line.starts_with('*') {
            continue;
        }
        let code = line.split('"').step_by(2).collect::<Vec<_>>().join(" ");
        let mut prev_member = false;
        let bytes = code.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_alphanumeric() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &code[start..i];
                let local = word.starts_with("ks_") || word.starts_with("KS_");
                let number = word.as_bytes()[0].is_ascii_digit();
                if !prev_member && !local && !number && !C_KEYWORDS.contains(&word) && !GENERATOR_LOCALS.contains(&word) {
                    out.insert(word.to_string());
                }
                prev_member = false;
                continue;
            }
            prev_member = c == b'.' || (c == b'>' && i > 0 && bytes[i - 1] == b'-');
            if c.is_ascii_whitespace() {
                prev_member = false;
            }
            i += 1;
        }
    }
    out
}

fn symbols_declared(c: &str) -> Result<(), String> {
    let unknown: Vec<String> = external_identifiers(c).into_iter().filter(|w| !KILOLIB_SYMBOLS.contains(&w.as_str())).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(format!("identifiers outside the header surface: {unknown:?}"))
    }
}

#[test]
fn golden_c_uses_only_header_symbols() {
    let dir = common::manifest_dir().join("tests/codegen");
    let mut seen = BTreeSet::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "c") {
            let c = std::fs::read_to_string(&p).unwrap();
            symbols_declared(&c).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen.extend(external_identifiers(&c));
        }
    }
    // every listed symbol is exercised by at least one golden
    let unused: Vec<&&str> = KILOLIB_SYMBOLS.iter().filter(|s| !seen.contains(**s)).collect();
    assert!(unused.is_empty(), "never emitted: {unused:?}");
}

#[test]
fn symbol_scanner_ignores_members_and_strings() {
    let ids = external_identifiers("x = m->data[0] + y.z; f(\"hello\");\n/* note */\n");
    assert_eq!(ids, ["f", "x", "y"].iter().map(|s| s.to_string()).collect());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip_through_text(seed in any::<u64>()) {
        let sp = random_screenplay(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = format_screenplay(&sp);
        let back = parse_screenplay(&text);
        prop_assert!(back.is_ok(), "{text}");
        prop_assert_eq!(back.unwrap(), sp);
    }

    #[test]
    fn emitted_c_stays_inside_header_surface(seed in any::<u64>()) {
        let sp = random_screenplay(&mut ChaCha8Rng::seed_from_u64(seed));
        for program in sp.programs.values() {
            let Ok(a) = lower(program) else { continue };
            for counters in [true, false] {
                let opts = CodegenOptions { emit_counters: counters, ..CodegenOptions::default() };
                if let Ok(c) = emit_c(&a, &opts) {
                    prop_assert!(symbols_declared(&c).is_ok(), "{:?}", symbols_declared(&c));
                }
            }
        }
    }

    #[test]
    fn parser_is_total_on_arbitrary_text(src in "\\PC{0,200}") {
        let (sp, diags) = parse_with_diagnostics(&src);
        prop_assert!(sp.is_some() || !diags.is_empty());
    }

    #[test]
    fn parser_is_total_on_token_soup(
        words in proptest::collection::vec(
            prop::sample::select(vec![
                "role", "a", "{", "}", "move", "straight", "left", "stop", "led", "3", "0", "send", "0xff",
                "0x", "for", "1s", "500ms", "ms", "repeat", "2", "until", "message", "first", "silence", ";", "#",
                "\n", "99999999999", "-1",
            ]),
            0..60,
        )
    ) {
        let src = words.join(" ");
        let (sp, diags) = parse_with_diagnostics(&src);
        prop_assert!(sp.is_some() || !diags.is_empty());
    }

    #[test]
    fn parser_is_total_on_mutated_sources(seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "\\PC{0,8}") {
        let text = format_screenplay(&random_screenplay(&mut ChaCha8Rng::seed_from_u64(seed)));
        let mut at = cut.index(text.len() + 1);
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let mutated = format!("{}{junk}{}", &text[..at], &text[at..]);
        let _ = parse_with_diagnostics(&mutated);
        let _ = parse_with_diagnostics(&text[..at]);
    }

    #[test]
    fn tick_conversion_rounds_to_nearest(ms in 0u32..10_000_000, tps in 1u32..1000) {
        let ticks = ms_to_ticks(ms, tps);
        let exact = f64::from(ms) * f64::from(tps) / 1000.0;
        prop_assert!((f64::from(ticks) - exact).abs() <= 0.5);
        prop_assert!(ms_to_ticks(ms + 1, tps) >= ticks);
        // halves go up
        if (exact.fract() - 0.5).abs() < 1e-12 {
            prop_assert_eq!(f64::from(ticks), exact.ceil());
        }
    }
}

#[test]
fn tick_conversion_examples() {
    assert_eq!(ms_to_ticks(500, 32), 16);
    assert_eq!(ms_to_ticks(1000, 32), 32);
    assert_eq!(ms_to_ticks(15, 100), 2);
    assert_eq!(ms_to_ticks(0, 32), 0);
}
