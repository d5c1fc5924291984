//! Command-line runner and study server for `groupchoice`.

pub mod commands;
pub mod config;
pub mod server;
pub mod study;
