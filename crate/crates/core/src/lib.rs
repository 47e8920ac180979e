pub mod engine;
pub mod gpoly;
pub mod io;
pub mod lp;
pub mod model;
pub mod sfm;
