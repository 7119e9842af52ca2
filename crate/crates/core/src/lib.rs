//! Tail-biting spatially coupled protograph LDPC codes for bit-interleaved
//! coded modulation with iterative decoding (BICM-ID).

pub mod constellation;
pub mod exit;
pub mod harness;
pub mod interleave;
pub mod lifting;
pub mod phy;
pub mod protograph;
pub mod seeding;
