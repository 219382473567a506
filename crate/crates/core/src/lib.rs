pub mod algebra;
pub mod fca;
pub mod pipeline;
pub mod witness;
