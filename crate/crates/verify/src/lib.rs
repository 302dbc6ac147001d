//! Host crate for the `acceptance` test target. It sorts after the library
//! crates, so their suites run before the long acceptance checks.
