//! Multi-modal vocabulary, token documents, the greedy decoding harness and
//! recognition preprocessing.

mod decode;
mod document;
mod preprocess;
mod vocab;


pub use decode::{fuse_embeddings, greedy_decode, DecodeOutput, EmbeddingTable, Predictor};
pub use document::{
    check_step, load_document, parse_streams, save_document, serialize_streams,
    steps_from_streams, streams_from_steps, MultiModalStep, TokenDocument, DOCUMENT_MAGIC,
    DOCUMENT_VERSION,
};
pub use preprocess::{
    deinterleave, interleave, is_active, trim_signing_window, SigningWindow, TrimThresholds,
    Wrists,
};
pub use vocab::{build_vocabulary, motion_word, tag_word, Vocabulary, BOS_WORD, EOS_WORD, PAD_WORD};
