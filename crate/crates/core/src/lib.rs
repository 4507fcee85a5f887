//! Black-box algorithms for finite distributive Ω-expanded groups.
//!
//! Algebras are held as explicit Cayley tables ([`algebra`]) but algorithms
//! only ever see them through an [`blackbox::Oracle`]: opaque fixed-length
//! handles plus equality and operation queries. On top of that sit random
//! subsums and the additive-generator algorithm ([`generation`]), ideal
//! generators through the derived `Φ(m)` oracle ([`ideal`]), and variety
//! membership ([`variety`]). [`truth`] holds brute-force ground truth and
//! [`harness`] the file formats and Monte Carlo experiment runner.

pub mod algebra;
pub mod blackbox;
pub mod generation;
pub mod harness;
pub mod ideal;
pub mod signature;
pub mod truth;
pub mod variety;
