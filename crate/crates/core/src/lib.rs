//! Nanoslit-metasurface LED transmitters and photodiode receivers for
//! visible-light links.
//!
//! * [`specfun`]: Bessel `J0`, `Y0` and the Hankel function `H0(2)`.
//! * [`quad`]: deterministic adaptive Simpson quadrature.
//! * [`beam`]: slit-array fields, radiation pattern, lobe count, beamwidth, `g_max`.
//! * [`link`]: Poynting flux through (misaligned) apertures, SIR, SNR enhancement.
//! * [`sweep`]: parameter grids and the bundled presets.
//! * [`cli`]: the `metaslit` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod beam;
pub mod cli;
pub mod link;
pub mod quad;
pub mod specfun;
pub mod sweep;

pub use beam::{LambertianPattern, MetasurfacePattern, RadiationPattern, SourceGeometry, Wave, C0, ETA0};
pub use error::{Error, Result};
pub use link::{LinkGeometry, LinkModel, NoiseModel, Ratio, ReceiverPose};
pub use sweep::{preset, run_sweep, Preset, SweepResult, SweepSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pattern.md")]
    mod pattern {}
    #[doc = include_str!("../../../book/src/lobes.md")]
    mod lobes {}
    #[doc = include_str!("../../../book/src/link.md")]
    mod link {}
    #[doc = include_str!("../../../book/src/misalignment.md")]
    mod misalignment {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
}
