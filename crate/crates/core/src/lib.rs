pub mod affinity;
pub mod bench;
pub mod autoseed;
pub mod eval;
pub mod image;
pub mod mofs;
pub mod synth;
