//! Synthetic plane geometry over two kernels: an exact rational projective
//! plane and numeric metric straight planes (Euclidean, Minkowski, Hilbert).

pub mod body;
pub mod constructions;
pub mod line_systems;
pub mod metric;
pub mod projective;
pub mod rat;
pub mod sampling;

pub use body::{ConvexBody, ConvexPolygon, GaugeBody, P2, V2};
pub use metric::{GeodesicLine, StraightPlane};
pub use projective::{ProjLine, ProjPoint};
pub use rat::{Rat, RatPoint};
