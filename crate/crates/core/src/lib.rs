//! Exact analysis of strong structural controllability for colored
//! structured systems: pattern matrices whose nonzero (`c<r>`) and
//! arbitrary (`g<s>`) entries are tied together by color classes.
//!
//! The decision path is [`verification::check_controllability`], built from
//! the barred matrix ([`pattern::build_barred`]), the color change rule
//! ([`color_rule::is_colorable`]) and the matching test for square blocks
//! ([`matching::is_nonsingular`]). [`symbolic`] and the Kalman/Hautus checks
//! in [`verification`] are independent oracles. All arithmetic is exact.

pub mod cli;
pub mod color_rule;
pub mod error;
pub mod matching;
pub mod pattern;
pub mod rational;
pub mod symbolic;
pub mod univariate;
pub mod verification;

pub use error::{Error, Result};
pub use pattern::{
    ColorId, ColorKind, ColoredPatternMatrix, ColoredSystem, Entry, PatternDocument,
};
