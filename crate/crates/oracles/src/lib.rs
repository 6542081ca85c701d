//! Reference computations for tests. Nothing here shares code with the
//! library under test: the discretizations and algorithms are deliberately
//! different (ODE shooting, dense eigensolvers, closed-form roots).

pub mod eigen;
pub mod quad;
pub mod roots;
pub mod shooting;
