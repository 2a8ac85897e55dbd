pub mod airy;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod evolve;
pub mod fronts;
pub mod hydro;
pub mod numerics;

pub use dispersion::{canonicalize, Canonical, GaugeMap, WalkParams};
pub use error::WalkError;
pub use fronts::{
    critical_coupling, find_extremal_fronts, Chirality, ConeTopology, ExtremalFront, FrontDiagram,
};
