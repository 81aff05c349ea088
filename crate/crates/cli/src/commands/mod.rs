pub mod sim;
pub mod tables;
pub mod validate;
