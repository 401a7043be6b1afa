//! Command line and HTTP front ends for `ontogrow`.

pub mod commands;
pub mod http;
