pub mod cli;
pub mod config;
pub mod corrections;
pub mod error;
pub mod fixtures;
pub mod instrument;
pub mod interp;
pub mod lifshitz;
pub mod materials;
pub mod metrology;
pub mod pipeline;
pub mod quad;
pub mod units;
pub mod yukawa;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/materials.md")]
    mod materials {}
    #[doc = include_str!("../../../book/src/lifshitz.md")]
    mod lifshitz {}
    #[doc = include_str!("../../../book/src/corrections.md")]
    mod corrections {}
    #[doc = include_str!("../../../book/src/instrument.md")]
    mod instrument {}
    #[doc = include_str!("../../../book/src/metrology.md")]
    mod metrology {}
    #[doc = include_str!("../../../book/src/yukawa.md")]
    mod yukawa {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
