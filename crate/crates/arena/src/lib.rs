//! Command-line and HTTP front end for the k-regular graph game engine.

pub mod cli;
pub mod server;
pub mod session;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CHECK_FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
}
