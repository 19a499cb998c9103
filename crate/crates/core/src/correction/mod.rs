//! Anharmonic correction to the harmonic kernel: algebraic factors, nested integrals,
//! the order-by-order series and the assembled propagator.

mod factors;
mod nested;
mod series;

pub use factors::{
    enumerate_multi_indices, f_exact, f_factor, f_product_exact, half_pochhammer_signed, sigma_exact,
    sigma_factor, sigma_product_exact, sigma_table_exact, MultiIndex,
};
pub use nested::{nested_integral, NestedIntegrator};
pub use series::{
    assembly_p0, assembly_p1, assembly_p2, correction_series, exponent_ratio, full_propagator,
    polynomial_by_power, published_mismatches, published_terms, reduced_terms, universal_exponent,
    CorrectionSeries, OrderContribution, PropagatorResult, ReducedTerm,
};
