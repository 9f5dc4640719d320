pub mod converge;
pub mod dynamics;
pub mod exactalg;
pub mod graphgeom;
pub mod meromap;
pub mod parallel;
pub mod scalar;
mod serial;

/// Double-precision aliases for the generic core types.
pub type Point = meromap::ProjectivePoint<f64>;
pub type Cloud = graphgeom::GraphCloud<f64>;
pub type Compiled = meromap::CompiledMap<f64>;
