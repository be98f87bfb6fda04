pub mod audit;
pub mod hardmax;
pub mod replay;
pub mod scenario;
pub mod solve;
pub mod train;
