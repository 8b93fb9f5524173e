//! The acceptance run lives in `tests/acceptance.rs`.
