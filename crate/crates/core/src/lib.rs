pub mod archive_report;
pub mod classfile;
pub mod engine;
pub mod equivalence;
pub mod extractor;
pub mod rulelang;
pub mod rules_library;
