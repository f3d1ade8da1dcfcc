pub mod checkpoint;
pub mod clock;
pub mod corpus;
pub mod format;
pub mod harness;
pub mod report;
