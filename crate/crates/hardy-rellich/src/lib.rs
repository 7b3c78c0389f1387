pub mod hp;
pub mod quadrature;
pub mod radial;
pub mod families;
pub mod modes;
pub mod coefficients;
pub mod report;
pub mod identities;
pub mod profile;
pub mod manifold;
pub mod hyperbolic;
pub mod sharp;
pub mod sweep;
pub mod oracle;

/// The guide chapters, compiled as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/radial-terms.md")]
    pub mod radial_terms {}
    #[doc = include_str!("../../../book/src/modes.md")]
    pub mod modes {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    pub mod coefficients {}
    #[doc = include_str!("../../../book/src/identities.md")]
    pub mod identities {}
    #[doc = include_str!("../../../book/src/log-weights.md")]
    pub mod log_weights {}
    #[doc = include_str!("../../../book/src/general-weights.md")]
    pub mod general_weights {}
    #[doc = include_str!("../../../book/src/hyperbolic.md")]
    pub mod hyperbolic {}
    #[doc = include_str!("../../../book/src/sharp-constants.md")]
    pub mod sharp_constants {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    pub mod sweeps {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    pub mod acceptance {}
}
