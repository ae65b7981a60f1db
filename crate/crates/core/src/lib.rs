//! Carlitz zeta and multizeta values over `F_q[t]`, Anderson-Thakur
//! polynomials, and period matrices of the associated dual t-motives.
//!
//! All transcendental quantities are truncated Laurent series in
//! `u = 1/t̃`, where `t̃^{q−1} = −t`; see [`series::TildeSeries`].

pub mod carlitz;
pub mod error;
pub mod field;
pub mod motive;
pub mod mzv;
pub mod poly;
pub mod powersums;
pub mod reconstruct;
pub mod relations;
pub mod series;
pub mod tseries;

pub use error::{Error, Result};
pub use field::{make_field_context, Field, FieldContext, Fq};
pub use poly::{PolyT, RatFunc, TPoly};
pub use series::{TildeSeries, EXACT};
pub use tseries::{Profile, TSeries};
