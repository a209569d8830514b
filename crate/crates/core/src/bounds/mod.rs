//! Converse and achievability bounds, exact evaluation on small instances
//! and mixed-source rates.

pub mod exact;
pub mod gaussian;
pub mod mixed;
pub mod np;
pub mod second_order;
pub mod theorems;
