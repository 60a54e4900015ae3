//! Exact-rational abacus and RNN register machines.
//!
//! * [`numeric`]: sign-magnitude rationals, vectors and vector sequences
//! * [`machine`]: the two machine models and their interpreter
//! * [`asm`]: the `.abm` text format and sequence literals
//! * [`godel`]: bijections between naturals and sequences/programs
//! * [`translate`]: bounded compilers between the two machine models
//! * [`analysis`]: input/output metrics, cluster indices and the robustness
//!   falsifier
//! * [`cli`]: the `abm` command-line front end

pub mod analysis;
pub mod asm;
pub mod cli;
pub mod fixtures;
pub mod godel;
pub mod machine;
pub mod numeric;
pub mod translate;
