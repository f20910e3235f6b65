//! Restores damaged pen strokes by fitting a cubic B-spline whose control
//! points carry `(x, y, r)`: a centre line plus a pen radius.
//!
//! [`pipeline::restore`] is the entry point. It lays out nodes for the
//! sample points, builds an interpolating initial curve, and runs
//! [`optimizer::run_descent`] on the image energy in [`energy`]. Then it
//! rasterises the result with [`stroke::render_stroke`].
//! [`profile`] has the closed-form energy of a straight band, and [`bench`](mod@bench)
//! generates, degrades and scores synthetic strokes.

pub mod bench;
pub mod energy;
pub mod error;
pub mod image_io;
pub mod optimizer;
pub mod pipeline;
pub mod profile;
pub mod spline;
pub mod stroke;
pub mod trace;

pub use error::{Error, ErrorKind, Result};
