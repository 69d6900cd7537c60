//! Shared fixtures for the sonospace test suites.

pub mod capture;
pub mod checks;
pub mod compare;
pub mod fuzz;
pub mod oracle;
pub mod scenes;
pub mod signal;
pub mod ws;
