#![allow(dead_code)]

pub mod cfg;
pub mod gen;
pub mod golden;
pub mod iso;
pub mod naive;
pub mod oracle;
pub mod pipeline;
