//! Digital twin of a magnetorheological (MR) grease clutch hand exoskeleton.
//!
//! The crate models one clutch (holding force vs. supply voltage, coil
//! dynamics, hysteresis), the soft-switching supply waveform, finger-linkage
//! statics, the grip-intent latch of the control board, the sEMG fatigue
//! metric pipeline, and a fixed-step scenario engine that ties them together.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clutch;
pub mod control;
pub mod emg;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod numfmt;
pub mod plot;
pub mod report;
pub mod sim;
pub mod waveform;

pub use error::{Result, TwinError};
