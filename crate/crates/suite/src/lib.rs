//! Holds the `acceptance` test target; see `tests/acceptance.rs`.
//!
//! Kept in its own package so `cargo test --workspace` runs it after the
//! unit and integration tests of the other crates.
