pub mod analysis;
pub mod gf;
pub mod gmd;
pub mod pipeline;
pub mod poly;
pub mod rm;
pub mod rs;
