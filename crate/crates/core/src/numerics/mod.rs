//! Numerical building blocks shared by the exact and asymptotic engines.

pub(crate) mod double_double;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod special;
pub mod vandermonde;

pub use quadrature::{integrate, integrate_semi_infinite, GaussLegendre, QuadratureSpec};
pub use roots::find_root_bracketed;
pub use series::sum_series;
pub use special::{ln_factorial, log_factorial_ratio};
pub use vandermonde::{min_relative_gap, VandermondeSystem, DEGENERACY_THRESHOLD};
