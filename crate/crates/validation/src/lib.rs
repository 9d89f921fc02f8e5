//! Holds the `acceptance` test target (`tests/acceptance.rs`). It lives in its
//! own package so its failures do not stop the other suites under
//! `cargo test --workspace`.
