pub mod exactnum;
pub mod placeval;
pub mod bounds;
pub mod diophfun;
pub mod divclass;
pub mod exec;
pub mod geomdemo;
pub mod scanlab;
