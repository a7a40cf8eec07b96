//! Deterministic text and CSV rendering.
//!
//! Identical inputs produce byte-identical files: no timestamps, fixed row
//! and column order, and a fixed numeric format (six significant digits for
//! summaries, shortest round-trip for raw dumps).

/// Format with six significant digits, fixed-point where reasonable.
pub fn g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// RFC-4180 style field quoting; our fields rarely need it.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The provenance comment block at the top of every output file.
pub fn provenance(seed: u64, hash: u64, version: &str) -> String {
    format!("# seed={seed}\n# spec_hash={hash:016x}\n# version={version}\n")
}
