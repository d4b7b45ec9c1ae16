//! Verification laboratory for max-plus path transforms, M/M/1 queues in
//! tandem, non-colliding processes and random-matrix ensembles.
//!
//! The crate is split by subsystem:
//!
//! * [`pathcore`]: step and grid paths, the min-plus/max-plus convolutions
//!   `⊗`/`⊙` and the recursive transform `Γₙ`.
//! * [`sampler`]: reproducible random inputs (Poisson, Brownian, walks, GUE).
//! * [`queuesim`]: stationary M/M/1 queues and tandems with their output
//!   processes.
//! * [`spectra`]: Hermitian eigensolver and the GUE/Charlier densities.
//! * [`analogue`]: Pitman-type transforms and the Brownian, `log∫exp` and
//!   autoregressive output theorems.
//! * [`shape`]: first-order asymptotics (tandem shape functions, polymer
//!   free energy).
//! * [`stattest`]: goodness-of-fit machinery producing [`TestReport`]s.
//! * [`harness`]: the experiment registry used by the CLI and the
//!   acceptance suite.

pub mod analogue;
pub mod error;
pub mod harness;
pub mod pathcore;
pub mod queuesim;
pub mod sampler;
pub mod shape;
pub mod spectra;
pub mod stattest;

pub use error::{Error, Result};
pub use pathcore::{GridPath, Path, PathBundle, StepPath};
pub use sampler::{derive_stream, HermitianMatrix, RngStream};
pub use spectra::Spectrum;
pub use stattest::TestReport;
