pub mod arrangement;
pub mod catalog;
pub mod induction;
pub mod field;
pub mod linalg;
pub mod rank2;
pub mod scalar;
pub mod verify;

/// The guide, compiled so its examples run as doc-tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/scalars.md")]
    pub mod scalars {}
    #[doc = include_str!("../../../book/src/arrangements.md")]
    pub mod arrangements {}
    #[doc = include_str!("../../../book/src/restrictions.md")]
    pub mod restrictions {}
    #[doc = include_str!("../../../book/src/rank2.md")]
    pub mod rank2 {}
    #[doc = include_str!("../../../book/src/induction.md")]
    pub mod induction {}
    #[doc = include_str!("../../../book/src/refuter.md")]
    pub mod refuter {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
