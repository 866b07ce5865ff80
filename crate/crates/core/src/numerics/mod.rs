//! Special functions and numerical kernels shared by the boundary and
//! sample-size engines.

mod normal;
mod quadrature;
mod root;

pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use quadrature::{gauss_legendre, QuadratureGrid};
pub use root::find_root;
