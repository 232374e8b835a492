pub mod cca;
mod common;
pub mod enrich;
pub mod scca;
pub mod simulate;
pub mod summarize;
