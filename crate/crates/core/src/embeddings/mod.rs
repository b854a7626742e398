//! Embedding and class-probability file formats, plus a small
//! network-free embedder built on log-mel statistics.

mod baseline;
mod io;

pub use baseline::{baseline_embed, BaselineEmbedder, Embedder, BASELINE_DIM};
pub use io::{
    decode_embeddings, decode_probs, encode_embeddings, encode_probs, read_embeddings, read_probs,
    write_embeddings, write_probs,
};
