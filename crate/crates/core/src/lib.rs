pub mod chains;
pub mod polyalg;
pub mod geometry;
pub mod sabitov;
pub mod flex;
pub mod cli;
