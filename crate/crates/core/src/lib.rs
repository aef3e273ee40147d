//! Symbolic-numeric toolkit for small-amplitude limit cycles of polynomial
//! perturbations of the linear center `x ∂y - y ∂x`.
//!
//! Layers, bottom up:
//! - [`polycore`]: exact sparse polynomials in the perturbation parameters.
//! - [`trigsym`]: polynomials in θ, cos(lθ), sin(lθ) with parameter coefficients.
//! - [`bautin`]: return-map recursion, focal values `L_k`, rotation-invariant generators.
//! - [`idealkit`]: Gröbner bases with cofactors, norm-tracked division, Bautin index.
//! - [`bernstein`]: Bernstein classes and the displacement certificate.
//! - [`melnikov`]: successive ε-derivatives of the return map of `X0 + εX1`.
//! - [`numlab`]: floating-point integrators used to cross-check all of the above.

pub mod polycore;
pub mod trigsym;
pub mod idealkit;
pub mod bautin;
pub mod bernstein;
pub mod melnikov;
pub mod numlab;
