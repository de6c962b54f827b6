//! Pilot books, QAM, frame assembly and received-signal synthesis.

mod frames;
mod pilots;
mod qam;

pub use frames::{assemble_frames, synthesize_received, DataModel, FramePlan, FrameSet, ReceivedBlock, UserScheme};
pub use pilots::{dft_matrix, make_pilot_books, PilotBook, SpLayout};
pub use qam::Qam;
