//! Simultaneous interpretation pipeline.
//!
//! A word stream is segmented online into chunks and sentences by two
//! multi-shift boundary detectors. Each closed chunk is translated at once
//! through a broker that picks, among several engines, the output whose
//! back-translation is closest to the source. When a sentence closes it is
//! retranslated as a whole and the result replaces that sentence's chunk
//! captions in the emitted caption stream.

pub mod caption;
pub mod context;
pub mod corpus;
pub mod engines;
pub mod eval;
pub mod lang;
pub mod par;
pub mod pipeline;
pub mod segment;
pub mod segmenter;
pub mod token;

pub use caption::{CaptionEvent, CaptionKind};
pub use lang::LanguageCode;
pub use segment::{Segment, SegmentKind};
pub use token::TokenEvent;
