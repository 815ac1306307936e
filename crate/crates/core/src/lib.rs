//! Anonymous electronic voting over a password-authenticated no-key exchange.

pub mod crypto;
pub mod election;
pub mod enk;
pub mod harness;
pub mod numtheory;
pub mod security;
pub mod seeded;
