pub mod correlate;
pub mod equidist;
pub mod error;
pub mod io;
pub mod multfunc;
pub mod nilgroup;
pub mod polyseq;
pub mod scalar;
pub mod summation;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/nilmanifolds.md")]
    pub mod nilmanifolds {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    pub mod sequences {}
    #[doc = include_str!("../../../book/src/equidistribution.md")]
    pub mod equidistribution {}
    #[doc = include_str!("../../../book/src/multiplicative.md")]
    pub mod multiplicative {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    pub mod correlations {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
