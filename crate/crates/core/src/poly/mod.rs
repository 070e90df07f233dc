//! Exact sparse homogeneous polynomials, univariate restrictions, and the
//! special families `e_d`, `q_M` and the statistic `m_d`.

mod json;
mod multi;
mod special;
mod uni;

pub use json::{CoefJson, PolyJson, TermJson};
pub use multi::{Exponent, MultiPoly};
pub use special::{
    elementary_symmetric, indicator, m_d, matching_poly, ones, shifted, Matching,
};
pub use uni::UniPoly;
