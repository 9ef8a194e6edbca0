// The guide chapters under book/src/ carry runnable snippets. Including them
// as doc attributes makes `cargo test --doc` execute every snippet, keeping
// the book and the library in sync. The modules exist only while rustdoc
// collects doctests.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/norms-and-moments.md")]
pub mod book_norms_and_moments {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/correlation-series.md")]
pub mod book_correlation_series {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/inversion-and-constants.md")]
pub mod book_inversion_and_constants {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/relaxation-and-duality.md")]
pub mod book_relaxation_and_duality {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/krivine-rounding.md")]
pub mod book_krivine_rounding {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
pub mod book_verification {}
