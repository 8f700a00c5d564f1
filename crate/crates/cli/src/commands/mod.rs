pub mod allocate;
pub mod benchmark;
pub mod deploy;
pub mod price;
pub mod simulate;
