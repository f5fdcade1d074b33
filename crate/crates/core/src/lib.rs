mod binio;
pub mod dataset;
pub mod eval;
pub mod ingest;
pub mod models;
pub mod nncore;
pub mod train;
