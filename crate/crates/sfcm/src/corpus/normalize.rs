//! Arabic-aware text normalization.
//!
//! The pipeline runs, in order: canonical composition (NFC), alif folding,
//! punctuation removal, and whitespace collapsing. Each step can be toggled
//! off. Two extra folds (hamza carriers, tashkeel) are available but off by
//! default.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Alif variants folded to bare alif (U+0627).
const ALIF_VARIANTS: [char; 4] = ['\u{0623}', '\u{0625}', '\u{0622}', '\u{0671}'];

/// Arabic punctuation removed in addition to the Unicode P* categories.
const ARABIC_PUNCTUATION: [char; 3] = ['\u{061F}', '\u{060C}', '\u{061B}'];

/// Toggles for the normalization steps. Defaults match the training pipeline:
/// compose, fold alif, strip punctuation, and collapse whitespace are on;
/// hamza-carrier folding and tashkeel stripping are off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationOptions {
    /// Apply Unicode canonical composition (NFC) first.
    pub compose: bool,
    /// Fold alif variants (أ إ آ ٱ) to bare alif (ا).
    pub fold_alif: bool,
    /// Remove code points in general categories P* plus ؟ ، ؛.
    pub strip_punctuation: bool,
    /// Collapse whitespace runs to single spaces and trim the ends.
    pub collapse_whitespace: bool,
    /// Fold hamza carriers: ؤ to و, ئ to ي, and drop standalone ء.
    pub fold_hamza: bool,
    /// Strip tashkeel marks (U+064B..=U+065F, U+0670).
    pub strip_tashkeel: bool,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        NormalizationOptions {
            compose: true,
            fold_alif: true,
            strip_punctuation: true,
            collapse_whitespace: true,
            fold_hamza: false,
            strip_tashkeel: false,
        }
    }
}

impl NormalizationOptions {
    /// All steps disabled; `normalize_text` becomes the identity.
    pub fn none() -> Self {
        NormalizationOptions {
            compose: false,
            fold_alif: false,
            strip_punctuation: false,
            collapse_whitespace: false,
            fold_hamza: false,
            strip_tashkeel: false,
        }
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
        || ARABIC_PUNCTUATION.contains(&c)
}

fn is_tashkeel(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}')
}

fn one_pass(text: &str, options: &NormalizationOptions) -> String {
    let composed: String = if options.compose {
        text.nfc().collect()
    } else {
        text.to_string()
    };

    let mut out = String::with_capacity(composed.len());
    let mut pending_space = false;
    let mut seen_non_space = false;
    for c in composed.chars() {
        let c = if options.fold_alif && ALIF_VARIANTS.contains(&c) {
            '\u{0627}'
        } else {
            c
        };
        let c = match c {
            '\u{0624}' if options.fold_hamza => '\u{0648}',
            '\u{0626}' if options.fold_hamza => '\u{064A}',
            '\u{0621}' if options.fold_hamza => continue,
            c => c,
        };
        if options.strip_tashkeel && is_tashkeel(c) {
            continue;
        }
        if options.strip_punctuation && is_punctuation(c) {
            continue;
        }
        if options.collapse_whitespace {
            if c.is_whitespace() {
                pending_space = seen_non_space;
                continue;
            }
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            seen_non_space = true;
        }
        out.push(c);
    }
    out
}

/// Normalizes `text` according to `options`.
///
/// Removal steps can expose new composition opportunities (a combining mark
/// left adjacent to a base letter once punctuation between them is gone), so
/// the pass repeats until the text is a fixed point. This keeps the function
/// idempotent for any input.
pub fn normalize_text(text: &str, options: &NormalizationOptions) -> String {
    let mut current = one_pass(text, options);
    for _ in 0..8 {
        let next = one_pass(&current, options);
        if next == current {
            return current;
        }
        current = next;
    }
    current
}
