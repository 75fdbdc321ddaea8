pub mod certify;
pub mod error;
pub mod integrator;
pub mod interval;
pub mod lyapunov;
pub mod model;
pub mod taylor;
