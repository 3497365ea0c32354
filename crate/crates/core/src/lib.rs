//! Exact non-signalling boxes, the genuine-box polytope and a coupler that
//! swaps non-locality between two boxes.
//!
//! ```
//! use nlswap::boxes::{ch_value, make_pr_box};
//! use nlswap::protocols::swap;
//! use nlswap::rational::ratio;
//!
//! let pr = make_pr_box();
//! assert_eq!(ch_value(&pr), ratio(3, 2));
//! let out = swap(&pr, &pr).unwrap();
//! assert_eq!(out.q, ratio(1, 3));
//! assert_eq!(out.success_box, pr);
//! ```

pub mod boxes;
pub mod cli;
pub mod coupler;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod protocols;
pub mod rational;
pub mod sampling;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/boxes.md")]
    mod boxes {}
    #[doc = include_str!("../../../book/src/membership.md")]
    mod membership {}
    #[doc = include_str!("../../../book/src/coupler.md")]
    mod coupler {}
    #[doc = include_str!("../../../book/src/swapping.md")]
    mod swapping {}
    #[doc = include_str!("../../../book/src/teleportation.md")]
    mod teleportation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
