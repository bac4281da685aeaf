//! Core library for exploring support exchanged in online mental health
//! communities: corpus ingestion, full-text search, support labeling, topic
//! modeling, post similarity, zoomable circle-packing views, highlight
//! notes and LLM-assisted summaries and question boards.

pub mod api;
pub mod corpus;
pub mod explorer;
pub mod labeling;
pub mod llm;
pub mod notes;
pub mod search;
pub mod session;
pub mod similarity;
pub mod text;
pub mod topics;
