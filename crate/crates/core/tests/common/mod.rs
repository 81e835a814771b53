#![allow(dead_code)]

pub mod eager;
pub mod sequences;
