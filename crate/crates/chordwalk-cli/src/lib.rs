//! Support library for the `chordwalk` binary: output-file readers that
//! reparse emitted CSV/JSONL to full precision, used by downstream
//! consumers and by the round-trip tests.

pub mod reader;
