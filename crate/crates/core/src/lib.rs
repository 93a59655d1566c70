pub mod bigrid;
pub mod error;
pub mod measure;
pub mod rational;
pub mod refine;
pub mod weight;
pub mod flow;
pub mod functionals;
pub mod constructions;
pub mod maximal;
pub mod io;
pub mod report;
pub mod sampling;
pub mod verify;
pub mod cli;
