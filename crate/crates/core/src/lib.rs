pub mod body;
pub mod config;
pub mod error;
pub mod linalg;
pub mod sphere;
pub mod schema;
pub mod ellipsoids;
pub mod constructions;
pub mod points;
pub mod symmetry;
pub mod measures;
