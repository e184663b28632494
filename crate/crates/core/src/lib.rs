pub mod gf;
pub mod linalg;
pub mod mpoly;
pub mod steenrod;
pub mod groups;
pub mod constructions;
pub mod lab;
