//! One module per subcommand, each with its flag set and `run`.

pub mod concordance;
pub mod evaluate;
pub mod lesions;
pub mod phantom;
pub mod sextants;
pub mod simulate;
pub mod standardize;
