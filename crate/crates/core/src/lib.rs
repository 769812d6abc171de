pub mod array;
pub mod baseline;
pub mod bench;
pub mod error;
pub mod gls;
pub mod io;
pub mod linalg;
pub mod noise_cov;
pub mod pipeline;
pub mod poly;
pub mod select;
