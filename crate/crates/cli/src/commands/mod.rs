pub mod bench;
pub mod eigvec;
pub mod evolve;
pub mod spectrum;
pub mod verify;
