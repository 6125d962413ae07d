//! Apollonian gaskets, round Sierpiński carpets and discretizations of
//! their canonical Dirichlet forms.

pub mod carpet;
pub mod fit;
pub mod forms;
pub mod gasket;
pub mod geom;
pub mod spectra;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gaskets.md")]
    mod gaskets {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/carpets.md")]
    mod carpets {}
}
